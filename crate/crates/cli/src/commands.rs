use super::*;
use crate::input::{float_list, float_rows, mode_list, rational_rows, sign_pair, Inputs};
use cylhom::complex::{
    chain_homotopy_check, chain_map, chain_map_check, dataset_stages, direct_limit, homology, homotopy_map,
    integer_audit, stage_complex, verify_d_squared, GradedRationalComplex, IdentityCheck,
};
use cylhom::dataset::{parse_records, Level, ModuliDataset};
use cylhom::evaluation::{
    path_intersections, pole_preimages, s0_zero_locus_check, scan_pole_count, EvMapSpec, ParamDomain, Pole as EvPole,
    PoleChoice, ScanCount,
};
use cylhom::gluing::{
    make_cutoffs, momo_check, obstruction_pairing, sigma, two_sided_pairing, two_sided_quadrature, estimate_sweep,
    CokernelBasisModel, NeckField, NeckParams,
};
use cylhom::index::{
    automatic_transversality, cover_index, cover_index_checked, fredholm_index, orbit_table, winding_bounds_check,
    CurveTopology,
};
use cylhom::orientation::{
    arc_consistent, comparison_sign, comparison_sign_oracle, ds0_sign, glued_sign, ComparisonBases, Direction,
    FredholmModel, Pole, CONTRACTION_CONVENTION,
};
use cylhom::rational::{parse_rational, QMat, Q};
use cylhom::spectral::{closed_form_spectrum, numeric_spectrum, OperatorKind};
use std::path::Path;

#[derive(Default)]
pub(crate) struct Ctx {
    pub inputs: Inputs,
    pub body: Vec<String>,
    pub values: Vec<(String, String)>,
    pub findings: Vec<Finding>,
    pub convention: Option<String>,
}

impl Ctx {
    fn line(&mut self, s: impl Into<String>) {
        self.body.push(s.into());
    }

    fn value(&mut self, key: impl Into<String>, value: impl ToString) {
        self.values.push((key.into(), value.to_string()));
    }

    fn finding(&mut self, check: impl Into<String>, status: Status, detail: impl Into<String>) {
        self.findings.push(Finding { check: check.into(), status, detail: detail.into() });
    }

    /// Ok when `holds`, violation otherwise.
    fn check(&mut self, check: impl Into<String>, holds: bool, detail: impl Into<String>) {
        let status = if holds { Status::Ok } else { Status::Violation };
        self.finding(check, status, detail);
    }
}

/// A failure that stops the command; recorded as its last finding.
pub(crate) struct Fail {
    pub check: String,
    pub status: Status,
    pub detail: String,
}

impl From<String> for Fail {
    fn from(detail: String) -> Self {
        Fail { check: "input".into(), status: Status::Error, detail }
    }
}

impl From<cylhom::Error> for Fail {
    fn from(e: cylhom::Error) -> Self {
        let status = match e {
            cylhom::Error::Degenerate(_) | cylhom::Error::IllConditioned(_) => Status::Degenerate,
            _ => Status::Error,
        };
        Fail { check: "compute".into(), status, detail: e.to_string() }
    }
}

type Run = Result<(), Fail>;

pub(crate) fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Run {
    match cmd {
        Command::Spectrum(a) => spectrum(ctx, a),
        Command::Index(a) => index(ctx, a),
        Command::CoverIndex(a) => cover(ctx, a),
        Command::Transversality(a) => transversality(ctx, a),
        Command::Homology(a) => stage_homology(ctx, a),
        Command::DSquared(a) => d_squared(ctx, a),
        Command::ChainmapCheck(a) => chainmap(ctx, a),
        Command::HomotopyCheck(a) => homotopy(ctx, a),
        Command::DirectLimit(a) => limit(ctx, a),
        Command::Ev(a) => ev(ctx, a),
        Command::Glue { command } => glue(ctx, command),
        Command::Sign { command } => sign(ctx, command),
    }
}

// ---- spectral and index ----

fn spectrum(ctx: &mut Ctx, a: &SpectrumArgs) -> Run {
    let kind = a.kind.with(a.eps);
    for w in kind.validate()? {
        ctx.line(format!("warning: {w}"));
    }
    let table = closed_form_spectrum(kind, a.max)?;
    let numeric = if a.numeric { Some(numeric_spectrum(kind, a.grid, a.max)?) } else { None };
    ctx.line(format!("{} eps={}", kind.name(), a.eps));
    ctx.line(if numeric.is_some() { "index  eigenvalue  winding  numeric" } else { "index  eigenvalue  winding" });
    let mut worst = 0.0f64;
    for e in &table.entries {
        let mut row = format!("{:>5}  {}  {}", e.index, e.eigenvalue, e.winding);
        if let Some(n) = &numeric {
            match n.eigenvalue(e.index) {
                Some(x) => {
                    worst = worst.max((x - e.eigenvalue).abs());
                    row.push_str(&format!("  {x}"));
                }
                None => worst = f64::INFINITY,
            }
        }
        ctx.line(row);
        ctx.value(format!("lambda[{}]", e.index), e.eigenvalue);
    }
    let bad = table.ordering_violations();
    ctx.check("ordering", bad.is_empty(), if bad.is_empty() { "sign(lambda_i) = sign(i), nondecreasing".into() } else { format!("violated at indices {bad:?}") });
    if !matches!(kind, OperatorKind::Elliptic(_)) {
        let asym = (1..=a.max as i64)
            .filter_map(|i| Some((table.eigenvalue(i)? + table.eigenvalue(-i)?).abs()))
            .fold(0.0, f64::max);
        ctx.check("pair-symmetry", asym == 0.0, format!("max |lambda_i + lambda_-i| = {asym:e}"));
    }
    if numeric.is_some() {
        ctx.check("numeric-oracle", worst < a.tol, format!("max |closed - numeric| = {worst:.3e} at grid {} (tol {:e})", a.grid, a.tol));
    }
    Ok(())
}

fn index(ctx: &mut Ctx, a: &IndexArgs) -> Run {
    let text = ctx.inputs.read(&a.orbits)?;
    let (recs, diags) = parse_records(&text, &a.orbits.display().to_string());
    if let Some(d) = diags.first() {
        return Err(format!("{d}").into());
    }
    for r in &recs.orbits {
        r.orbit.validate().map_err(|e| format!("{}: {e}", r.at))?;
    }
    let n = recs.orbits.len();
    let table = orbit_table(recs.orbits.into_iter().map(|r| r.orbit));
    let ids = |s: &str| s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect::<Vec<_>>();
    let topo = CurveTopology { genus: a.genus, positive: ids(&a.plus), negative: ids(&a.minus), c1: a.c1 };
    if topo.positive.is_empty() && topo.negative.is_empty() {
        return Err("give at least one puncture with --plus or --minus".to_string().into());
    }
    let ind = fredholm_index(&topo, &table)?;
    ctx.line(format!("chi = {}", topo.euler_characteristic()));
    ctx.line(format!("ind = {ind}"));
    ctx.value("ind", ind);
    ctx.finding("orbits", Status::Ok, format!("{n} orbit records valid"));
    if let Some(want) = a.expect {
        ctx.check("expected-index", ind == want, format!("ind = {ind}, expected {want}"));
    }
    Ok(())
}

/// Any punctured surface with Euler characteristic chi <= 2 works for the
/// Riemann-Hurwitz count: a sphere with 2 - chi punctures.
fn surface_with_chi(chi: i64) -> Result<CurveTopology, Fail> {
    if chi > 2 {
        return Err(format!("Euler characteristic {chi} exceeds 2").into());
    }
    Ok(CurveTopology { genus: 0, positive: (0..2 - chi).map(|i| format!("p{i}")).collect(), negative: vec![], c1: 0 })
}

fn cover(ctx: &mut Ctx, a: &CoverIndexArgs) -> Run {
    let ind = match (a.base_chi, a.cover_chi) {
        (Some(b), Some(c)) => {
            let checked = cover_index_checked(a.base, a.degree, a.branch, &surface_with_chi(b)?, &surface_with_chi(c)?);
            match checked {
                Ok(v) => {
                    ctx.finding("riemann-hurwitz", Status::Ok, format!("{c} = {} * {b} - {}", a.degree, a.branch));
                    v
                }
                Err(e) => {
                    ctx.finding("riemann-hurwitz", Status::Violation, e.to_string());
                    cover_index(a.base, a.degree, a.branch)
                }
            }
        }
        _ => {
            if a.degree == 0 {
                return Err("cover degree must be positive".to_string().into());
            }
            cover_index(a.base, a.degree, a.branch)
        }
    };
    ctx.line(ind.to_string());
    ctx.value("ind", ind);
    ctx.finding("cover-index", Status::Ok, format!("{} * {} + {} = {ind}", a.degree, a.base, a.branch));
    if let Some(want) = a.expect {
        ctx.check("expected-index", ind == want, format!("ind = {ind}, expected {want}"));
    }
    Ok(())
}

fn transversality(ctx: &mut Ctx, a: &TransversalityArgs) -> Run {
    let holds = automatic_transversality(a.ind, a.genus, a.gamma0);
    let bound = 2 * a.genus as i64 - 2 + a.gamma0 as i64;
    ctx.line(format!("ind = {}, 2g - 2 + #Gamma_0 = {bound}: {}", a.ind, if holds { "holds" } else { "not met" }));
    ctx.value("automatic_transversality", holds);
    ctx.check("automatic-transversality", holds, format!("ind {} > {bound} is {holds}", a.ind));
    if let (Some(kind), Some(eps), Some(cz)) = (a.kind, a.eps, a.cz) {
        let table = closed_form_spectrum(kind.with(eps), a.max)?;
        let rep = winding_bounds_check(&table, cz);
        let detail = if rep.ok() {
            format!("{} eigenfunctions within the bounds for cz = {cz}", rep.checked)
        } else {
            let v = &rep.violations[0];
            format!("index {} has winding {} against cz = {}", v.index, v.winding, v.cz)
        };
        ctx.check("winding-bounds", rep.ok(), detail);
    }
    Ok(())
}

// ---- chain complexes ----

fn load(ctx: &mut Ctx, d: &DatasetArgs) -> Result<(ModuliDataset, Option<Q>), Fail> {
    let cap = match &d.cap {
        Some(c) => Some(parse_rational(c).map_err(|e| format!("--cap: {e}"))?),
        None => None,
    };
    match ctx.inputs.dataset(&[d.orbits.as_path(), d.curves.as_path()])? {
        Ok(ds) => Ok((ds, cap)),
        Err(diags) => Err(Fail { check: "validate".into(), status: Status::Error, detail: diags.to_string() }),
    }
}

fn need_stage(ds: &ModuliDataset, stage: u32) -> Run {
    if (stage as usize) < ds.stage_count() {
        Ok(())
    } else {
        Err(format!("stage {stage} does not exist (dataset has {})", ds.stage_count()).into())
    }
}

fn describe(check: &IdentityCheck) -> String {
    match check {
        IdentityCheck::Ok => "holds exactly".into(),
        IdentityCheck::Violation { grading, source, target, value } => {
            format!("nonzero entry {value} from {source} to {target} (source grading {grading})")
        }
    }
}

fn print_complex(ctx: &mut Ctx, c: &GradedRationalComplex) {
    for g in c.gradings() {
        ctx.line(format!("grading {g}: {}", c.gens(g).join(" ")));
    }
}

fn stage_homology(ctx: &mut Ctx, a: &StageArgs) -> Run {
    let (ds, cap) = load(ctx, &a.data)?;
    need_stage(&ds, a.stage)?;
    let c = stage_complex(&ds, a.stage, cap.as_ref());
    print_complex(ctx, &c);
    let d2 = verify_d_squared(&c);
    ctx.check("d-squared", d2.is_ok(), describe(&d2));
    if !d2.is_ok() {
        return Ok(());
    }
    for (g, dim) in homology(&c)? {
        ctx.line(format!("H_{g} has dimension {dim}"));
        ctx.value(format!("H[{g}]"), dim);
    }
    Ok(())
}

fn d_squared(ctx: &mut Ctx, a: &DSquaredArgs) -> Run {
    let (ds, cap) = load(ctx, &a.data)?;
    let stages: Vec<u32> = match a.stage {
        Some(s) => {
            need_stage(&ds, s)?;
            vec![s]
        }
        None => (0..ds.stage_count() as u32).collect(),
    };
    for s in stages {
        let c = stage_complex(&ds, s, cap.as_ref());
        let check = verify_d_squared(&c);
        if let IdentityCheck::Violation { source, target, .. } = &check {
            ctx.line(format!("stage {s}: d^2 != 0, offending pair ({source}, {target})"));
            ctx.value(format!("offending_pair[{s}]"), format!("{source},{target}"));
        }
        ctx.check(format!("d-squared[stage {s}]"), check.is_ok(), describe(&check));
    }
    let warnings = integer_audit(&ds, cap.as_ref());
    let detail = match warnings.first() {
        None => "every coefficient is an integer".to_string(),
        Some(w) => format!(
            "{} non-integer coefficient(s); first {} -> {} = {} ({})",
            warnings.len(),
            w.source,
            w.target,
            w.coefficient,
            w.level.token()
        ),
    };
    for w in &warnings {
        ctx.line(format!("warning: {} coefficient {} -> {} is {}", w.level.token(), w.source, w.target, w.coefficient));
    }
    ctx.check("integer-coefficients", warnings.is_empty(), detail);
    Ok(())
}

fn chainmap(ctx: &mut Ctx, a: &ChainmapArgs) -> Run {
    let (ds, cap) = load(ctx, &a.data)?;
    need_stage(&ds, a.stage + 1)?;
    let plus = stage_complex(&ds, a.stage, cap.as_ref());
    let minus = stage_complex(&ds, a.stage + 1, cap.as_ref());
    let phi = chain_map(&ds, a.stage, a.map, cap.as_ref());
    let check = chain_map_check(&plus, &minus, &phi)?;
    ctx.check(format!("chain-map[stage {} map {}]", a.stage, a.map), check.is_ok(), describe(&check));
    Ok(())
}

fn homotopy(ctx: &mut Ctx, a: &StageArgs) -> Run {
    let (ds, cap) = load(ctx, &a.data)?;
    need_stage(&ds, a.stage + 1)?;
    let plus = stage_complex(&ds, a.stage, cap.as_ref());
    let minus = stage_complex(&ds, a.stage + 1, cap.as_ref());
    let phi0 = chain_map(&ds, a.stage, 0, cap.as_ref());
    let phi1 = chain_map(&ds, a.stage, 1, cap.as_ref());
    for (m, phi) in [(0, &phi0), (1, &phi1)] {
        let check = chain_map_check(&plus, &minus, phi)?;
        ctx.check(format!("chain-map[map {m}]"), check.is_ok(), describe(&check));
    }
    let kp = homotopy_map(&ds, Level::KPlus, a.stage, cap.as_ref())?;
    let km = homotopy_map(&ds, Level::KMinus, a.stage, cap.as_ref())?;
    let check = chain_homotopy_check(&phi0, &phi1, &kp, &km, &plus, &minus)?;
    ctx.check("homotopy", check.is_ok(), describe(&check));
    Ok(())
}

fn limit(ctx: &mut Ctx, a: &DirectLimitArgs) -> Run {
    let (ds, cap) = load(ctx, &a.data)?;
    let (stages, maps) = dataset_stages(&ds, cap.as_ref());
    let horizon = a.horizon.unwrap_or(stages.len());
    let dl = direct_limit(&stages, &maps, horizon)?;
    for (g, l) in &dl.gradings {
        let from = l.stable_from.map_or("-".to_string(), |s| s.to_string());
        ctx.line(format!(
            "grading {g}: homology {:?} image {:?} limit {} stable_from {from}",
            l.homology, l.image, l.value
        ));
        ctx.value(format!("dim[{g}]"), l.value);
    }
    let unstable: Vec<i64> = dl.gradings.iter().filter(|(_, l)| !l.stable).map(|(&g, _)| g).collect();
    let status = if unstable.is_empty() { Status::Ok } else { Status::Degenerate };
    let detail = if unstable.is_empty() {
        format!("image dimensions settled within {horizon} stages")
    } else {
        format!("gradings {unstable:?} still change at stage {}", horizon - 1)
    };
    ctx.finding("stable", status, detail);
    Ok(())
}

// ---- evaluation maps ----

fn ev(ctx: &mut Ctx, a: &EvArgs) -> Run {
    let text = ctx.inputs.read(&a.spec)?;
    let spec = EvMapSpec::parse(&text)?;
    spec.validate()?;
    let choices: &[(PoleChoice, &str)] = match a.pole_choice {
        PoleChoiceArg::Last => &[(PoleChoice::LastCoordinate, "last")],
        PoleChoiceArg::First => &[(PoleChoice::FirstCoordinate, "first")],
        PoleChoiceArg::Both => &[(PoleChoice::LastCoordinate, "last"), (PoleChoice::FirstCoordinate, "first")],
    };
    let resolution = a.scan.unwrap_or(match spec.domain {
        ParamDomain::Circle => 10_000,
        _ => 100,
    });
    for &(choice, name) in choices {
        let pre = pole_preimages(&spec, choice)?;
        for p in &pre {
            let pole = if p.pole == EvPole::North { "north" } else { "south" };
            let param: Vec<String> = p.param.iter().map(|x| format!("{x:.9}")).collect();
            ctx.line(format!("{name}-coordinate pole {pole} at ({}) sign {:+}", param.join(", "), p.sign));
        }
        let count = ScanCount::of(&pre);
        ctx.value(format!("{name}.north_signed"), count.north_signed);
        ctx.value(format!("{name}.south_signed"), count.south_signed);
        if resolution > 0 {
            let scan = scan_pole_count(&spec, choice, resolution)?;
            ctx.check(
                format!("scan[{name}]"),
                scan == count,
                format!(
                    "root finder north {}/{} south {}/{}, scan north {}/{} south {}/{} (count/signed)",
                    count.north, count.north_signed, count.south, count.south_signed, scan.north, scan.north_signed, scan.south, scan.south_signed
                ),
            );
        }
    }
    let grid = float_list(&a.t_grid)?;
    if !grid.is_empty() {
        let rep = s0_zero_locus_check(&spec, &grid)?;
        for r in &rep.rows {
            ctx.line(format!("T = {}: {} zeros of s0, {} pole preimages, max distance {:.1e}", r.t, r.found.len(), r.expected, r.max_distance));
        }
        let detail = match rep.rows.iter().find(|r| !r.ok()) {
            None => format!("{} values of T agree within {:e}", rep.rows.len(), rep.tolerance),
            Some(r) if r.underflow => format!("T = {}: e^(-2 lambda T) underflows", r.t),
            Some(r) => format!("T = {}: {} unmatched point(s)", r.t, r.unmatched.len()),
        };
        ctx.check("zero-locus", rep.ok(), detail);
    }
    if a.paths {
        let comps = path_intersections(&spec)?;
        for (i, c) in comps.iter().enumerate() {
            ctx.line(format!("arc {i}: {} endpoints, crossing {}", c.endpoints.len(), c.crossing()));
        }
        let all = comps.iter().all(|c| c.consistent());
        ctx.check("paths", all, format!("{} arcs, total crossing {}", comps.len(), comps.iter().map(|c| c.crossing()).sum::<i64>()));
    }
    Ok(())
}

// ---- gluing ----

fn neck_params(ctx: &mut Ctx, path: Option<&Path>, t: Option<f64>) -> Result<NeckParams, Fail> {
    let mut p = match path {
        Some(path) => NeckParams::parse(&ctx.inputs.read(path)?)?,
        None => NeckParams::default(),
    };
    if let Some(t) = t {
        p.t = t;
    }
    p.validate()?;
    Ok(p)
}

fn glue(ctx: &mut Ctx, cmd: &GlueCommand) -> Run {
    match cmd {
        GlueCommand::MomoCheck { neck, c, d, k, tol } => {
            let params = neck_params(ctx, neck.neck.as_deref(), neck.t)?;
            let nk = make_cutoffs(&params)?;
            let table = params.table()?;
            let rep = momo_check(&nk, &table, &mode_list(c)?, &mode_list(d)?, *k)?;
            ctx.line(format!("T = {}, k = {k}", params.t));
            ctx.value("positive_spread", rep.positive_spread);
            ctx.value("negative_endpoint_error", rep.negative_endpoint_error);
            ctx.check("positive-modes-constant", rep.positive_spread < *tol, format!("spread {:.3e} (tol {tol:e})", rep.positive_spread));
            ctx.check("negative-endpoints", rep.negative_endpoint_error < *tol, format!("max |b_i(2T) + d_i| = {:.3e} (tol {tol:e})", rep.negative_endpoint_error));
        }
        GlueCommand::Pairing { neck, coeffs, k, tol } => {
            let params = neck_params(ctx, neck.neck.as_deref(), neck.t)?;
            let nk = make_cutoffs(&params)?;
            let table = params.table()?;
            let c = mode_list(coeffs)?;
            let eta = NeckField::holomorphic_end(&nk, &table, &c, 2.0 * params.t)?;
            ctx.line(format!("T = {}; pairings in units of e^(-2 lambda_i T)", params.t));
            let mut worst = 0.0f64;
            for i in 1..=*k as i64 {
                let lam = table.eigenvalue(i).ok_or_else(|| format!("mode {i} is outside the table"))?;
                let p = obstruction_pairing(&sigma(i), &eta, &nk)?.relative_to(-2.0 * lam * params.t);
                let ci = c.iter().filter(|(j, _)| *j == i).map(|x| x.1).sum::<f64>();
                worst = worst.max((p - ci).abs());
                ctx.line(format!("i = {i}: lambda {lam:.9}, pairing {p:.12}, c_i {ci}"));
                ctx.value(format!("pairing[{i}]"), p);
            }
            ctx.check("closed-form", worst < *tol, format!("max |pairing - c_i| = {worst:.3e} (tol {tol:e})"));
        }
        GlueCommand::Sweep { neck, t_grid, r_grid, amplitudes, k } => {
            let params = neck_params(ctx, neck.neck.as_deref(), neck.t)?;
            let rep = estimate_sweep(&float_list(t_grid)?, &float_list(r_grid)?, &float_list(amplitudes)?, &params, *k)?;
            ctx.line(format!("lambda = {:.9}", rep.lambda));
            ctx.line("T  r  T0  a  ln||psi_+||*  ln||psi_-||*  ratio");
            for p in &rep.points {
                ctx.line(format!("{}  {}  {}  {}  {:.6}  {:.6}  {:.6}", p.t, p.r, p.t0, p.amplitude, p.ln_psi_plus, p.ln_psi_minus, p.ratio));
            }
            ctx.value("max_ratio", rep.max_ratio);
            ctx.check("bounded", rep.bounded, format!("max ratio {:.6}", rep.max_ratio));
            ctx.check("nonincreasing-in-T", rep.nonincreasing_in_t, "ratio does not grow with T (relative slack 1e-4)");
        }
        GlueCommand::CaseB { k, t_minus, t_plus, eps_plus, eps_minus, c_matrix, d_matrix, c_end, d_end, neck, tol } => {
            let k = *k;
            let base = neck_params(ctx, neck.as_deref(), None)?;
            let plus = closed_form_spectrum(OperatorKind::NegHyperbolic(*eps_plus), k.max(4))?;
            let minus = closed_form_spectrum(OperatorKind::PosHyperbolic(*eps_minus), k.max(4))?;
            let square = |text: &Option<String>, ctx: &mut Ctx, upper: bool| -> Result<Vec<Vec<f64>>, Fail> {
                match text {
                    Some(t) => Ok(float_rows(&ctx.inputs.inline(t)?)?),
                    None => Ok((0..k)
                        .map(|i| {
                            (0..k)
                                .map(|j| match (i == j, upper && j > i, !upper && j < i) {
                                    (true, ..) => 1.0,
                                    (_, true, _) => 0.5,
                                    (_, _, true) => -0.25,
                                    _ => 0.0,
                                })
                                .collect()
                        })
                        .collect()),
                }
            };
            let c = square(c_matrix, ctx, true)?;
            let d = square(d_matrix, ctx, false)?;
            let model = CokernelBasisModel::from_tables(k, &plus, &minus, c, d)?;
            let ends = |text: &Option<String>, ctx: &mut Ctx, start: f64| -> Result<Vec<f64>, Fail> {
                match text {
                    Some(t) => Ok(float_list(&ctx.inputs.inline(t)?)?),
                    None => Ok((0..k).map(|j| start - 0.3 * j as f64).collect()),
                }
            };
            let ce = ends(c_end, ctx, 1.0)?;
            let de = ends(d_end, ctx, 0.8)?;
            let closed = two_sided_pairing(*t_minus, *t_plus, &model, &ce, &de)?;
            let quad = two_sided_quadrature(*t_minus, *t_plus, &model, &ce, &de, &plus, &minus, &base)?;
            let mut worst = 0.0f64;
            for (i, (x, y)) in closed.iter().zip(&quad).enumerate() {
                let rel = if *x == 0.0 { y.abs() } else { (x - y).abs() / x.abs() };
                worst = worst.max(rel);
                ctx.line(format!("i = {}: closed form {x:.12e}, quadrature {y:.12e}", i + 1));
                ctx.value(format!("pairing[{}]", i + 1), x);
            }
            ctx.check("closed-form", worst < *tol, format!("max relative discrepancy {worst:.3e} (tol {tol:e})"));
        }
    }
    Ok(())
}

// ---- signs ----

fn vectors(ctx: &mut Ctx, text: &str) -> Result<Vec<Vec<Q>>, Fail> {
    Ok(rational_rows(&ctx.inputs.inline(text)?)?)
}

fn sign(ctx: &mut Ctx, cmd: &SignCommand) -> Run {
    ctx.convention = Some(CONTRACTION_CONVENTION.to_string());
    match cmd {
        SignCommand::Comparison { matrix, e, ker, f, coker, reference } => {
            let rows = vectors(ctx, matrix)?;
            if rows.is_empty() {
                return Err("--matrix needs at least one row".to_string().into());
            }
            let model = FredholmModel::new(QMat::from_rows(rows), vectors(ctx, e)?)?;
            let bases = ComparisonBases { ker: vectors(ctx, ker)?, f: vectors(ctx, f)?, coker: vectors(ctx, coker)? };
            let u = match reference {
                Some(r) => vectors(ctx, r)?,
                None => model.preimage_basis(),
            };
            let s = comparison_sign(&model, &bases, Some(&u))?;
            let oracle = comparison_sign_oracle(&model, &bases, &u)?;
            ctx.line(format!("{s:+}"));
            ctx.value("sign", s);
            ctx.check("determinant-oracle", s == oracle, format!("elimination {s:+}, Leibniz expansion {oracle:+}"));
        }
        SignCommand::Ds0 { k, pole, jacobian, lambda, t } => {
            let rows = vectors(ctx, jacobian)?;
            let j = if rows.is_empty() { QMat::zeros(0, 0) } else { QMat::from_rows(rows) };
            let p = match pole {
                PoleArg::North => Pole::North,
                PoleArg::South => Pole::South,
            };
            let s = ds0_sign(*k, p, &j, &float_list(lambda)?, *t)?;
            ctx.line(format!("{s:+}"));
            ctx.value("sign", s);
            ctx.finding("ds0", Status::Ok, format!("ds0 sign {s:+} at the {pole:?} pole").to_lowercase());
        }
        SignCommand::Glued { s1, s2, direction } => {
            let dir = match direction {
                DirectionArg::Away => Direction::AwayFrom,
                DirectionArg::Toward => Direction::Toward,
            };
            let s = glued_sign(*s1, *s2, dir)?;
            ctx.line(format!("{s:+}"));
            ctx.value("sign", s);
            ctx.finding("glued", Status::Ok, format!("glued sign {s:+}"));
        }
        SignCommand::Arc { ends, flat } => {
            let (a, b) = (sign_pair(ends)?, sign_pair(flat)?);
            let ok = arc_consistent(a, b)?;
            ctx.check("arc", ok, format!("-(s1 s2) = {:+}, s1' s2' = {:+}", -(a.0 * a.1), b.0 * b.1));
        }
    }
    Ok(())
}
