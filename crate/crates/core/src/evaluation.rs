//! Evaluation maps at negative ends, the flow quotient onto the sphere, the
//! linearized obstruction section s0 and its zero locus.
//!
//! Evaluation maps are synthetic trigonometric polynomials on a circle (k = 2)
//! or on a torus chart (k = 3). The flow s -> (c_i e^{lambda_i s}) preserves
//! the sign pattern of c, so pole preimages of the normalized map are the common
//! zeros of the matching components of the raw map.

use crate::error::{Error, Result};
use crate::spectral::SpectrumTable;
use std::f64::consts::{PI, TAU};

#[derive(Clone, Debug, PartialEq)]
pub struct EndExpansion {
    pub lambda: Vec<f64>,
    pub c: Vec<f64>,
}

impl EndExpansion {
    pub fn new(lambda: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || lambda.len() != c.len() {
            return Err(Error::Dimension(format!("{} eigenvalues for {} coefficients", lambda.len(), c.len())));
        }
        if lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) || lambda.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("eigenvalues must be positive and nondecreasing".into()));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        Ok(EndExpansion { lambda, c })
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }
}

/// First k Fourier coefficients of a section sampled on the circle at height s,
/// c_i = e^{-lambda_i s} <u(s, .), f_i>, using the positive entries of `table`.
pub fn extract_coefficients(table: &SpectrumTable, s: f64, samples: &[[f64; 2]], k: usize) -> Result<EndExpansion> {
    let n = samples.len();
    let mut lambda = Vec::with_capacity(k);
    let mut c = Vec::with_capacity(k);
    for i in 1..=k as i64 {
        let e = table.entry(i).ok_or_else(|| Error::Domain(format!("table has no entry {i}")))?;
        let f = e.eigenfunction.samples(n)?;
        let dot: f64 = f.iter().zip(samples).map(|(a, b)| a[0] * b[0] + a[1] * b[1]).sum::<f64>() / n as f64;
        lambda.push(e.eigenvalue);
        c.push(dot * (-e.eigenvalue * s).exp());
    }
    EndExpansion::new(lambda, c)
}

/// log sum c_i^2 e^{2 lambda_i s} and its derivative in s, computed stably.
fn log_norm_sq(e: &EndExpansion, s: f64) -> (f64, f64) {
    let logs: Vec<(f64, f64)> = e
        .c
        .iter()
        .zip(&e.lambda)
        .filter(|(c, _)| **c != 0.0)
        .map(|(c, l)| (2.0 * (c.abs().ln() + l * s), 2.0 * l))
        .collect();
    let m = logs.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let (mut sum, mut dsum) = (0.0, 0.0);
    for (x, d) in logs {
        let w = (x - m).exp();
        sum += w;
        dsum += d * w;
    }
    (m + sum.ln(), dsum / sum)
}

/// Flow time s* with |(c_i e^{lambda_i s*})| = r.
///
/// The log of the squared norm is convex and increasing in s, so Newton's
/// method started to the right of the root decreases monotonically onto it.
pub fn flow_time(e: &EndExpansion, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if e.c.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("the flow quotient is undefined at c = 0".into()));
    }
    let target = 2.0 * r.ln();
    // a single term already reaches r^2 here, so the root lies to the left
    let mut s = f64::INFINITY;
    for (c, l) in e.c.iter().zip(&e.lambda).filter(|(c, _)| **c != 0.0) {
        s = s.min((r.ln() - c.abs().ln()) / l);
    }
    for _ in 0..100 {
        let (v, dv) = log_norm_sq(e, s);
        let step = (v - target) / dv;
        if !(step > 0.0) {
            break;
        }
        s -= step;
        if step <= 4.0 * f64::EPSILON * (1.0 + s.abs()) {
            break;
        }
    }
    Ok(s)
}

/// The point of the flow line through c on the sphere of radius r.
pub fn flow_normalize(e: &EndExpansion, r: f64) -> Result<Vec<f64>> {
    let s = flow_time(e, r)?;
    let p: Vec<f64> = e.c.iter().zip(&e.lambda).map(|(c, l)| c * (l * s).exp()).collect();
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(p.into_iter().map(|x| x * r / norm).collect())
}

/// (e^{-2 lambda_i T} c_i) for i = 1..k-1.
pub fn s0_eval(t: f64, e: &EndExpansion) -> Result<Vec<f64>> {
    if e.k() < 2 {
        return Err(Error::Domain("s0 needs k >= 2".into()));
    }
    Ok(e.c[..e.k() - 1].iter().zip(&e.lambda).map(|(c, l)| (-2.0 * l * t).exp() * c).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamDomain {
    Circle,
    Torus,
}

impl ParamDomain {
    pub fn dim(self) -> usize {
        match self {
            ParamDomain::Circle => 1,
            ParamDomain::Torus => 2,
        }
    }
}

/// Basis function of one term. The first letter acts on theta, the second on
/// phi; single letters act on theta only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigBasis {
    C,
    S,
    CC,
    CS,
    SC,
    SS,
}

impl TrigBasis {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "c" => TrigBasis::C,
            "s" => TrigBasis::S,
            "cc" => TrigBasis::CC,
            "cs" => TrigBasis::CS,
            "sc" => TrigBasis::SC,
            "ss" => TrigBasis::SS,
            _ => return None,
        })
    }

    fn token(self) -> &'static str {
        match self {
            TrigBasis::C => "c",
            TrigBasis::S => "s",
            TrigBasis::CC => "cc",
            TrigBasis::CS => "cs",
            TrigBasis::SC => "sc",
            TrigBasis::SS => "ss",
        }
    }

    fn factors(self) -> (bool, Option<bool>) {
        // (theta is cos, phi is cos); None when phi is absent
        match self {
            TrigBasis::C => (true, None),
            TrigBasis::S => (false, None),
            TrigBasis::CC => (true, Some(true)),
            TrigBasis::CS => (true, Some(false)),
            TrigBasis::SC => (false, Some(true)),
            TrigBasis::SS => (false, Some(false)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    /// Zero-based output component.
    pub comp: usize,
    pub basis: TrigBasis,
    pub n: i32,
    pub m: i32,
    pub a: f64,
}

impl TrigTerm {
    /// Value and partial derivatives in (theta, phi).
    fn eval(&self, p: &[f64]) -> (f64, [f64; 2]) {
        let th = p[0];
        let ph = p.get(1).copied().unwrap_or(0.0);
        let (ct, st) = ((self.n as f64 * th).cos(), (self.n as f64 * th).sin());
        let n = self.n as f64;
        let (tv, td) = match self.basis.factors().0 {
            true => (ct, -n * st),
            false => (st, n * ct),
        };
        let (pv, pd) = match self.basis.factors().1 {
            None => (1.0, 0.0),
            Some(cos) => {
                let m = self.m as f64;
                let (cp, sp) = ((m * ph).cos(), (m * ph).sin());
                if cos {
                    (cp, -m * sp)
                } else {
                    (sp, m * cp)
                }
            }
        };
        (self.a * tv * pv, [self.a * td * pv, self.a * tv * pd])
    }
}

/// Synthetic evaluation map: trig polynomials from the parameter domain to R^k.
#[derive(Clone, Debug, PartialEq)]
pub struct EvMapSpec {
    pub k: usize,
    pub domain: ParamDomain,
    /// +1 or -1: orientation of the parameter domain relative to dtheta (^ dphi).
    pub orientation: i8,
    pub lambda: Vec<f64>,
    pub terms: Vec<TrigTerm>,
}

impl EvMapSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut k = None;
        let mut domain = None;
        let mut orientation = 1i8;
        let mut lambda = None;
        let mut terms = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::Validation(format!("line {}: {m}", n + 1));
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let arg = |i: usize| tokens.get(i).copied().ok_or_else(|| err(format!("'{}' needs a value", tokens[0])));
            match tokens[0] {
                "k" => k = Some(arg(1)?.parse::<usize>().map_err(|e| err(e.to_string()))?),
                "domain" => {
                    domain = Some(match arg(1)? {
                        "circle" => ParamDomain::Circle,
                        "torus" => ParamDomain::Torus,
                        d => return Err(err(format!("unknown domain '{d}'"))),
                    })
                }
                "orientation" => {
                    orientation = match arg(1)? {
                        "1" | "+1" => 1,
                        "-1" => -1,
                        o => return Err(err(format!("orientation must be 1 or -1, got '{o}'"))),
                    }
                }
                "lambda" => {
                    lambda = Some(
                        tokens[1..].iter().map(|t| t.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|e| err(e.to_string()))?,
                    )
                }
                "term" => {
                    let mut comp = None;
                    let mut basis = None;
                    let (mut tn, mut tm, mut a) = (0i32, 0i32, None);
                    for t in &tokens[1..] {
                        let (key, v) = t.split_once('=').ok_or_else(|| err(format!("expected key=value, got '{t}'")))?;
                        let bad = || err(format!("bad value in '{t}'"));
                        match key {
                            "c" => comp = Some(v.parse::<usize>().map_err(|_| bad())?),
                            "f" => basis = Some(TrigBasis::parse(v).ok_or_else(|| err(format!("unknown basis '{v}'")))?),
                            "n" => tn = v.parse().map_err(|_| bad())?,
                            "m" => tm = v.parse().map_err(|_| bad())?,
                            "a" => a = Some(v.parse::<f64>().map_err(|_| bad())?),
                            _ => return Err(err(format!("unknown term field '{key}'"))),
                        }
                    }
                    let comp = comp.ok_or_else(|| err("term needs c=".into()))?;
                    if comp == 0 {
                        return Err(err("components are numbered from 1".into()));
                    }
                    terms.push(TrigTerm {
                        comp: comp - 1,
                        basis: basis.ok_or_else(|| err("term needs f=".into()))?,
                        n: tn,
                        m: tm,
                        a: a.ok_or_else(|| err("term needs a=".into()))?,
                    });
                }
                other => return Err(err(format!("unknown record '{other}'"))),
            }
        }
        let spec = EvMapSpec {
            k: k.ok_or_else(|| Error::Validation("missing 'k'".into()))?,
            domain: domain.ok_or_else(|| Error::Validation("missing 'domain'".into()))?,
            orientation,
            lambda: lambda.ok_or_else(|| Error::Validation("missing 'lambda'".into()))?,
            terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "k {}\ndomain {}\norientation {}\nlambda {}\n",
            self.k,
            if self.domain == ParamDomain::Circle { "circle" } else { "torus" },
            self.orientation,
            self.lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
        );
        for t in &self.terms {
            s += &format!("term c={} f={} n={} m={} a={}\n", t.comp + 1, t.basis.token(), t.n, t.m, t.a);
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Domain("k must be at least 2".into()));
        }
        EndExpansion::new(self.lambda.clone(), vec![0.0; self.k]).map_err(|e| Error::Validation(e.to_string()))?;
        if self.lambda.len() != self.k {
            return Err(Error::Validation(format!("{} eigenvalues for k = {}", self.lambda.len(), self.k)));
        }
        if let Some(t) = self.terms.iter().find(|t| t.comp >= self.k) {
            return Err(Error::Validation(format!("term for component {} but k = {}", t.comp + 1, self.k)));
        }
        if self.domain == ParamDomain::Circle && self.terms.iter().any(|t| t.basis.factors().1.is_some() && t.m != 0) {
            return Err(Error::Validation("circle maps cannot depend on phi".into()));
        }
        if self.orientation.abs() != 1 {
            return Err(Error::Validation("orientation must be +1 or -1".into()));
        }
        Ok(())
    }

    /// Root finding needs the domain dimension to be k - 1.
    fn check_root_setting(&self) -> Result<()> {
        self.validate()?;
        if self.domain.dim() + 1 != self.k {
            return Err(Error::Domain(format!(
                "pole search needs a {}-dimensional domain for k = {}, spec has {}",
                self.k - 1,
                self.k,
                self.domain.dim()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.k];
        for t in &self.terms {
            v[t.comp] += t.eval(p).0;
        }
        v
    }

    /// Rows are components, columns are parameters.
    pub fn jacobian(&self, p: &[f64]) -> Vec<[f64; 2]> {
        let mut j = vec![[0.0; 2]; self.k];
        for t in &self.terms {
            let d = t.eval(p).1;
            j[t.comp][0] += d[0];
            j[t.comp][1] += d[1];
        }
        j
    }

    /// The flow-normalized map onto the unit sphere.
    pub fn normalized(&self, p: &[f64]) -> Result<Vec<f64>> {
        let c = self.eval(p);
        flow_normalize(&EndExpansion { lambda: self.lambda.clone(), c }, 1.0).map_err(|e| match e {
            Error::Degenerate(_) => Error::Degenerate(format!("ev hits the origin at parameter {p:?}")),
            other => other,
        })
    }

    /// Same map precomposed with a translation of the parameters.
    pub fn shifted(&self, dtheta: f64, dphi: f64) -> EvMapSpec {
        let mut terms = Vec::new();
        for t in &self.terms {
            // cos(n(x+d)) = cos(nd) cos(nx) - sin(nd) sin(nx); sin(n(x+d)) = sin(nd) cos(nx) + cos(nd) sin(nx)
            let (ct, st) = ((t.n as f64 * dtheta).cos(), (t.n as f64 * dtheta).sin());
            let (cp, sp) = ((t.m as f64 * dphi).cos(), (t.m as f64 * dphi).sin());
            let theta_parts: [(bool, f64); 2] = if t.basis.factors().0 { [(true, ct), (false, -st)] } else { [(true, st), (false, ct)] };
            let phi_parts: Vec<(Option<bool>, f64)> = match t.basis.factors().1 {
                None => vec![(None, 1.0)],
                Some(true) => vec![(Some(true), cp), (Some(false), -sp)],
                Some(false) => vec![(Some(true), sp), (Some(false), cp)],
            };
            for (tc, tw) in theta_parts {
                for &(pc, pw) in &phi_parts {
                    let basis = match (tc, pc) {
                        (true, None) => TrigBasis::C,
                        (false, None) => TrigBasis::S,
                        (true, Some(true)) => TrigBasis::CC,
                        (true, Some(false)) => TrigBasis::CS,
                        (false, Some(true)) => TrigBasis::SC,
                        (false, Some(false)) => TrigBasis::SS,
                    };
                    let a = t.a * tw * pw;
                    if a != 0.0 {
                        terms.push(TrigTerm { basis, a, ..*t });
                    }
                }
            }
        }
        EvMapSpec { terms, ..self.clone() }
    }

    /// Same map precomposed with theta -> -theta, with the orientation flag
    /// flipped so that signed counts are unchanged.
    pub fn reflected(&self) -> EvMapSpec {
        let terms = self
            .terms
            .iter()
            .map(|t| if t.basis.factors().0 { *t } else { TrigTerm { a: -t.a, ..*t } })
            .collect();
        EvMapSpec { terms, orientation: -self.orientation, ..self.clone() }
    }

    /// Composes with the inclusion R^k -> R^{k'} placing component j at
    /// `positions[j]`; the remaining coordinates are zero.
    pub fn lift(&self, new_k: usize, positions: &[usize], lambda: Vec<f64>) -> Result<EvMapSpec> {
        if positions.len() != self.k {
            return Err(Error::Dimension(format!("{} positions for k = {}", positions.len(), self.k)));
        }
        let mut seen = vec![false; new_k];
        for &p in positions {
            if p >= new_k || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Domain(format!("positions must be distinct and below {new_k}")));
            }
        }
        let terms = self.terms.iter().map(|t| TrigTerm { comp: positions[t.comp], ..*t }).collect();
        let out = EvMapSpec { k: new_k, lambda, terms, ..self.clone() };
        out.validate()?;
        Ok(out)
    }
}

/// The inclusion (x_1, ..., x_k) -> (.., x_1 at positions[0], .., x_k at positions[k-1], ..).
pub fn inclusion(x: &[f64], new_k: usize, positions: &[usize]) -> Result<Vec<f64>> {
    if positions.len() != x.len() {
        return Err(Error::Dimension(format!("{} positions for {} coordinates", positions.len(), x.len())));
    }
    let mut out = vec![0.0; new_k];
    let mut seen = vec![false; new_k];
    for (&p, &v) in positions.iter().zip(x) {
        if p >= new_k || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Domain(format!("positions must be distinct and below {new_k}")));
        }
        out[p] = v;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoleChoice {
    /// (0, ..., 0, +-1)
    LastCoordinate,
    /// (+-1, 0, ..., 0)
    FirstCoordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pole {
    /// The positive pole of the chosen coordinate.
    North,
    South,
}

impl Pole {
    pub fn sign(self) -> i8 {
        match self {
            Pole::North => 1,
            Pole::South => -1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolePreimage {
    pub param: Vec<f64>,
    pub pole: Pole,
    /// Local degree of the normalized map, with the sphere oriented as the
    /// boundary of the ball.
    pub sign: i8,
}

struct Setting {
    eqs: Vec<usize>,
    sign_comp: usize,
    /// Orientation of the pole tangent frame spanned by the equation directions.
    frame: i8,
}

fn setting(spec: &EvMapSpec, choice: PoleChoice) -> Setting {
    let k = spec.k;
    match choice {
        PoleChoice::LastCoordinate => Setting {
            eqs: (0..k - 1).collect(),
            sign_comp: k - 1,
            frame: if (k - 1) % 2 == 0 { 1 } else { -1 },
        },
        PoleChoice::FirstCoordinate => Setting { eqs: (1..k).collect(), sign_comp: 0, frame: 1 },
    }
}

fn scale(spec: &EvMapSpec) -> f64 {
    spec.terms.iter().map(|t| t.a.abs()).sum::<f64>().max(f64::MIN_POSITIVE)
}

fn wrap(x: f64) -> f64 {
    x.rem_euclid(TAU)
}

fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(TAU);
            d.min(TAU - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn finish_root(spec: &EvMapSpec, st: &Setting, p: Vec<f64>) -> Result<PolePreimage> {
    let v = spec.eval(&p);
    let j = spec.jacobian(&p);
    let det = if st.eqs.len() == 1 {
        j[st.eqs[0]][0]
    } else {
        j[st.eqs[0]][0] * j[st.eqs[1]][1] - j[st.eqs[0]][1] * j[st.eqs[1]][0]
    };
    let sc = scale(spec);
    if det.abs() < 1e-9 * sc.powi(st.eqs.len() as i32) {
        return Err(Error::Degenerate(format!("pole preimage at parameter {p:?} is not transverse (det = {det:.3e})")));
    }
    let s = v[st.sign_comp];
    if s.abs() < 1e-9 * sc {
        return Err(Error::Degenerate(format!("ev hits the origin at parameter {p:?}")));
    }
    let pole = if s > 0.0 { Pole::North } else { Pole::South };
    let sign = spec.orientation * st.frame * pole.sign() * if det > 0.0 { 1 } else { -1 };
    Ok(PolePreimage { param: p, pole, sign })
}

fn circle_roots(spec: &EvMapSpec, comp: usize, samples: usize) -> Vec<f64> {
    let f = |x: f64| spec.eval(&[x])[comp];
    let h = TAU / samples as f64;
    let vals: Vec<f64> = (0..samples).map(|j| f(j as f64 * h)).collect();
    let mut roots = Vec::new();
    for j in 0..samples {
        let (a, b) = (vals[j], vals[(j + 1) % samples]);
        if a == 0.0 {
            roots.push(j as f64 * h);
            continue;
        }
        if a * b < 0.0 {
            let (mut lo, mut hi) = (j as f64 * h, (j + 1) as f64 * h);
            let lo_sign = a.signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid).signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(wrap(0.5 * (lo + hi)));
        }
    }
    roots
}

fn newton2(spec: &EvMapSpec, eqs: &[usize], mut p: [f64; 2]) -> Option<[f64; 2]> {
    let sc = scale(spec);
    for _ in 0..60 {
        let v = spec.eval(&p);
        let j = spec.jacobian(&p);
        let (f0, f1) = (v[eqs[0]], v[eqs[1]]);
        let (a, b, c, d) = (j[eqs[0]][0], j[eqs[0]][1], j[eqs[1]][0], j[eqs[1]][1]);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let mut dx = [(d * f0 - b * f1) / det, (-c * f0 + a * f1) / det];
        let len = dx[0].hypot(dx[1]);
        if len > 0.5 {
            dx = [dx[0] * 0.5 / len, dx[1] * 0.5 / len];
        }
        p = [p[0] - dx[0], p[1] - dx[1]];
        if len < 1e-14 {
            let v = spec.eval(&p);
            return (v[eqs[0]].abs() < 1e-11 * sc && v[eqs[1]].abs() < 1e-11 * sc).then(|| [wrap(p[0]), wrap(p[1])]);
        }
    }
    None
}

/// All preimages of the chosen poles under the normalized map, sorted by
/// parameter.
pub fn pole_preimages(spec: &EvMapSpec, choice: PoleChoice) -> Result<Vec<PolePreimage>> {
    spec.check_root_setting()?;
    let st = setting(spec, choice);
    let mut params: Vec<Vec<f64>> = Vec::new();
    match spec.domain {
        ParamDomain::Circle => {
            for r in circle_roots(spec, st.eqs[0], 4096) {
                params.push(vec![r]);
            }
        }
        ParamDomain::Torus => {
            let n = 96;
            for i in 0..n {
                for j in 0..n {
                    let seed = [(i as f64 + 0.5) * TAU / n as f64, (j as f64 + 0.5) * TAU / n as f64];
                    if let Some(r) = newton2(spec, &st.eqs, seed) {
                        if !params.iter().any(|q| torus_dist(q, &r) < 1e-7) {
                            params.push(r.to_vec());
                        }
                    }
                }
            }
        }
    }
    let mut out = params.into_iter().map(|p| finish_root(spec, &st, p)).collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.param.partial_cmp(&b.param).unwrap());
    Ok(out)
}

/// Brute-force count of pole preimages on a grid with `resolution` points
/// (circle) or cells (torus), independent of the root finder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanCount {
    pub north: usize,
    pub south: usize,
    pub north_signed: i64,
    pub south_signed: i64,
}

impl ScanCount {
    pub fn total(&self) -> usize {
        self.north + self.south
    }

    pub fn of(pre: &[PolePreimage]) -> Self {
        let mut s = ScanCount { north: 0, south: 0, north_signed: 0, south_signed: 0 };
        for p in pre {
            match p.pole {
                Pole::North => {
                    s.north += 1;
                    s.north_signed += p.sign as i64;
                }
                Pole::South => {
                    s.south += 1;
                    s.south_signed += p.sign as i64;
                }
            }
        }
        s
    }
}

pub fn scan_pole_count(spec: &EvMapSpec, choice: PoleChoice, resolution: usize) -> Result<ScanCount> {
    spec.check_root_setting()?;
    let st = setting(spec, choice);
    let mut out = ScanCount { north: 0, south: 0, north_signed: 0, south_signed: 0 };
    let mut record = |pole_val: f64, deg: i64| {
        let s = spec.orientation as i64 * st.frame as i64 * deg;
        if pole_val > 0.0 {
            out.north += deg.unsigned_abs() as usize;
            out.north_signed += s;
        } else {
            out.south += deg.unsigned_abs() as usize;
            out.south_signed -= s;
        }
    };
    match spec.domain {
        ParamDomain::Circle => {
            let h = TAU / resolution as f64;
            let vals: Vec<Vec<f64>> = (0..resolution).map(|j| spec.eval(&[j as f64 * h])).collect();
            for j in 0..resolution {
                let (a, b) = (&vals[j], &vals[(j + 1) % resolution]);
                let (fa, fb) = (a[st.eqs[0]], b[st.eqs[0]]);
                if fa * fb < 0.0 || (fa == 0.0 && fb != 0.0) {
                    let mid = spec.eval(&[(j as f64 + 0.5) * h]);
                    record(mid[st.sign_comp], if fb > fa { 1 } else { -1 });
                }
            }
        }
        ParamDomain::Torus => {
            let n = (resolution as f64).sqrt().round() as usize;
            let h = TAU / n as f64;
            let per_edge = 8;
            let g = |p: [f64; 2]| {
                let v = spec.eval(&p);
                (v[st.eqs[0]], v[st.eqs[1]])
            };
            for i in 0..n {
                for j in 0..n {
                    let (x0, y0) = (i as f64 * h, j as f64 * h);
                    let mut pts = Vec::with_capacity(4 * per_edge);
                    for e in 0..4 {
                        for t in 0..per_edge {
                            let u = t as f64 / per_edge as f64 * h;
                            pts.push(match e {
                                0 => [x0 + u, y0],
                                1 => [x0 + h, y0 + u],
                                2 => [x0 + h - u, y0 + h],
                                _ => [x0, y0 + h - u],
                            });
                        }
                    }
                    let vals: Vec<(f64, f64)> = pts.iter().map(|p| g(*p)).collect();
                    let mut total = 0.0;
                    for m in 0..vals.len() {
                        let (a, b) = (vals[m], vals[(m + 1) % vals.len()]);
                        total += (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1);
                    }
                    let w = (total / TAU).round() as i64;
                    if w != 0 {
                        let mid = spec.eval(&[x0 + 0.5 * h, y0 + 0.5 * h]);
                        record(mid[st.sign_comp], w);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One component of the preimage of the meridian nu through the first
/// coordinate axis, running between pole preimages.
#[derive(Clone, Debug, PartialEq)]
pub struct PathComponent {
    /// Parameter where the component starts (its first endpoint).
    pub start: Vec<f64>,
    pub endpoints: Vec<PolePreimage>,
    /// Signed count over endpoints mapping to the north pole.
    pub north_sum: i64,
    /// Signed count over endpoints mapping to the south pole.
    pub south_sum: i64,
}

impl PathComponent {
    /// Signed number of times this component sweeps across nu.
    pub fn crossing(&self) -> i64 {
        self.north_sum
    }

    pub fn consistent(&self) -> bool {
        self.north_sum == self.south_sum
    }
}

fn component_from(endpoints: Vec<PolePreimage>) -> PathComponent {
    let sum = |p: Pole| endpoints.iter().filter(|e| e.pole == p).map(|e| e.sign as i64).sum();
    PathComponent { start: endpoints[0].param.clone(), north_sum: sum(Pole::North), south_sum: sum(Pole::South), endpoints }
}

/// Preimage of nu = {x_2 = ... = x_{k-1} = 0, x_1 >= 0} on the unit sphere,
/// split into arcs between (last coordinate) pole preimages. Closed loops
/// that never meet a pole carry no crossing and are omitted.
pub fn path_intersections(spec: &EvMapSpec) -> Result<Vec<PathComponent>> {
    let poles = pole_preimages(spec, PoleChoice::LastCoordinate)?;
    let mut out = match spec.domain {
        ParamDomain::Circle => circle_path(spec, &poles),
        ParamDomain::Torus => torus_path(spec, &poles, 256)?,
    };
    out.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap());
    Ok(out)
}

fn circle_path(spec: &EvMapSpec, poles: &[PolePreimage]) -> Vec<PathComponent> {
    let n = poles.len();
    let mut out = Vec::new();
    for i in 0..n {
        let a = poles[i].param[0];
        let b = if i + 1 < n { poles[i + 1].param[0] } else { poles[0].param[0] + TAU };
        if spec.eval(&[0.5 * (a + b)])[0] > 0.0 {
            out.push(component_from(vec![poles[i].clone(), poles[(i + 1) % n].clone()]));
        }
    }
    out
}

fn torus_path(spec: &EvMapSpec, poles: &[PolePreimage], n: usize) -> Result<Vec<PathComponent>> {
    let h = TAU / n as f64;
    let node = |i: usize, j: usize| [(i % n) as f64 * h, (j % n) as f64 * h];
    let g: Vec<f64> = (0..n * n)
        .map(|idx| {
            let v = spec.eval(&node(idx / n, idx % n))[1];
            if v == 0.0 {
                f64::MIN_POSITIVE
            } else {
                v
            }
        })
        .collect();
    let gv = |i: usize, j: usize| g[(i % n) * n + (j % n)];
    // Edge ids: horizontal edge (i,j)-(i+1,j) is 2(i n + j), vertical (i,j)-(i,j+1) is 2(i n + j) + 1.
    let hid = |i: usize, j: usize| 2 * ((i % n) * n + (j % n));
    let vid = |i: usize, j: usize| 2 * ((i % n) * n + (j % n)) + 1;
    let crossing_point = |e: usize| -> [f64; 2] {
        let idx = e / 2;
        let (i, j) = (idx / n, idx % n);
        let (i2, j2) = if e % 2 == 0 { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (gv(i, j), gv(i2, j2));
        let t = a / (a - b);
        let p0 = node(i, j);
        if e % 2 == 0 {
            [p0[0] + t * h, p0[1]]
        } else {
            [p0[0], p0[1] + t * h]
        }
    };
    let mut adj: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for i in 0..n {
        for j in 0..n {
            // cell corners in counterclockwise order and the edges between them
            let corners = [gv(i, j), gv(i + 1, j), gv(i + 1, j + 1), gv(i, j + 1)];
            let edges = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let cut: Vec<usize> = (0..4).filter(|&e| corners[e] * corners[(e + 1) % 4] < 0.0).collect();
            let pairs: Vec<(usize, usize)> = match cut.len() {
                0 => vec![],
                2 => vec![(edges[cut[0]], edges[cut[1]])],
                4 => {
                    let center = spec.eval(&[(i as f64 + 0.5) * h, (j as f64 + 0.5) * h])[1];
                    // join the edges around each corner whose sign differs from the center
                    if (center > 0.0) == (corners[0] > 0.0) {
                        vec![(edges[0], edges[1]), (edges[2], edges[3])]
                    } else {
                        vec![(edges[3], edges[0]), (edges[1], edges[2])]
                    }
                }
                _ => unreachable!("a cell boundary changes sign an even number of times"),
            };
            for (a, b) in pairs {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut keys: Vec<usize> = adj.keys().copied().collect();
    keys.sort_unstable();
    let mut components = Vec::new();
    let mut matched = vec![false; poles.len()];
    for start in keys {
        if seen.contains(&start) {
            continue;
        }
        let mut lp = vec![start];
        seen.insert(start);
        let mut prev = start;
        let mut cur = adj[&start][0];
        while cur != start {
            seen.insert(cur);
            lp.push(cur);
            let nb = &adj[&cur];
            let next = if nb[0] == prev && nb.len() > 1 { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        let pts: Vec<[f64; 2]> = lp.iter().map(|&e| crossing_point(e)).collect();
        let f1: Vec<f64> = pts.iter().map(|p| spec.eval(p)[0]).collect();
        let m = pts.len();
        // sign changes of F_1 along the loop are the pole preimages on it
        let mut cuts: Vec<(usize, usize)> = Vec::new();
        for a in 0..m {
            let b = (a + 1) % m;
            if (f1[a] >= 0.0) != (f1[b] >= 0.0) {
                let mid = [
                    pts[a][0] + 0.5 * ((pts[b][0] - pts[a][0] + PI).rem_euclid(TAU) - PI),
                    pts[a][1] + 0.5 * ((pts[b][1] - pts[a][1] + PI).rem_euclid(TAU) - PI),
                ];
                let (best, dist) = poles
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, torus_dist(&p.param, &mid)))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .ok_or_else(|| Error::Numeric("the traced curve meets F_1 = 0 away from every pole preimage".into()))?;
                if dist > 3.0 * h || matched[best] {
                    return Err(Error::Degenerate(format!(
                        "could not resolve the crossing near parameter {mid:?}; the curve may be tangent to nu"
                    )));
                }
                matched[best] = true;
                cuts.push((a, best));
            }
        }
        // arcs between consecutive cuts with F_1 >= 0 inside
        for c in 0..cuts.len() {
            let (a, pa) = cuts[c];
            let (_, pb) = cuts[(c + 1) % cuts.len()];
            if f1[(a + 1) % m] >= 0.0 {
                components.push(component_from(vec![poles[pa].clone(), poles[pb].clone()]));
            }
        }
    }
    if let Some(i) = matched.iter().position(|m| !m) {
        return Err(Error::Numeric(format!(
            "pole preimage at {:?} was not met by the traced curve; refine the grid",
            poles[i].param
        )));
    }
    Ok(components)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroLocusRow {
    pub t: f64,
    pub found: Vec<Vec<f64>>,
    pub expected: usize,
    /// Largest distance from a found zero to its matching pole preimage.
    pub max_distance: f64,
    /// Zeros with no pole preimage within tolerance, and preimages with no zero.
    pub unmatched: Vec<Vec<f64>>,
    /// Some factor e^{-2 lambda_i T} is below the normal f64 range.
    pub underflow: bool,
}

impl ZeroLocusRow {
    pub fn ok(&self) -> bool {
        !self.underflow && self.unmatched.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroLocusReport {
    pub tolerance: f64,
    pub rows: Vec<ZeroLocusRow>,
}

impl ZeroLocusReport {
    pub fn ok(&self) -> bool {
        self.rows.iter().all(ZeroLocusRow::ok)
    }
}

fn s0_of(spec: &EvMapSpec, t: f64, p: &[f64]) -> Result<Vec<f64>> {
    let e = EndExpansion { lambda: spec.lambda.clone(), c: spec.normalized(p)? };
    s0_eval(t, &e)
}

/// Newton iteration for s0(T, ev~(p)) = 0 with a finite-difference Jacobian.
fn s0_newton(spec: &EvMapSpec, t: f64, seed: &[f64], weights: &[f64]) -> Result<Option<Vec<f64>>> {
    let d = seed.len();
    let mut p = seed.to_vec();
    let fd = 1e-7;
    for _ in 0..40 {
        let g: Vec<f64> = s0_of(spec, t, &p)?.iter().zip(weights).map(|(x, w)| x / w).collect();
        let mut jac = vec![vec![0.0; d]; d];
        for c in 0..d {
            let mut q = p.clone();
            q[c] += fd;
            let gp = s0_of(spec, t, &q)?;
            q[c] -= 2.0 * fd;
            let gm = s0_of(spec, t, &q)?;
            for r in 0..d {
                jac[r][c] = (gp[r] - gm[r]) / (2.0 * fd * weights[r]);
            }
        }
        let step: Vec<f64> = if d == 1 {
            if jac[0][0] == 0.0 {
                return Ok(None);
            }
            vec![g[0] / jac[0][0]]
        } else {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 {
                return Ok(None);
            }
            vec![(jac[1][1] * g[0] - jac[0][1] * g[1]) / det, (-jac[1][0] * g[0] + jac[0][0] * g[1]) / det]
        };
        let len = step.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cap = if len > 0.3 { 0.3 / len } else { 1.0 };
        for (x, s) in p.iter_mut().zip(&step) {
            *x -= s * cap;
        }
        if len < 1e-14 {
            let g: Vec<f64> = s0_of(spec, t, &p)?.iter().zip(weights).map(|(x, w)| x / w).collect();
            let ok = g.iter().all(|x| x.abs() < 1e-10);
            return Ok(ok.then(|| p.iter().map(|x| wrap(*x)).collect()));
        }
    }
    Ok(None)
}

/// For each T, locates zeros of p -> s0(T, ev~(p)) by Newton iteration from a
/// seed grid and compares them with the last-coordinate pole preimages.
pub fn s0_zero_locus_check(spec: &EvMapSpec, t_grid: &[f64]) -> Result<ZeroLocusReport> {
    let tol = 1e-8;
    let poles = pole_preimages(spec, PoleChoice::LastCoordinate)?;
    let seeds: Vec<Vec<f64>> = match spec.domain {
        ParamDomain::Circle => (0..256).map(|i| vec![(i as f64 + 0.5) * TAU / 256.0]).collect(),
        ParamDomain::Torus => {
            let n = 24;
            (0..n * n).map(|i| vec![((i / n) as f64 + 0.5) * TAU / n as f64, ((i % n) as f64 + 0.5) * TAU / n as f64]).collect()
        }
    };
    let mut rows = Vec::new();
    for &t in t_grid {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("T must be positive, got {t}")));
        }
        let weights: Vec<f64> = spec.lambda[..spec.k - 1].iter().map(|l| (-2.0 * l * t).exp()).collect();
        let underflow = weights.iter().any(|w| !w.is_normal());
        let mut found: Vec<Vec<f64>> = Vec::new();
        if !underflow {
            for s in &seeds {
                if let Some(z) = s0_newton(spec, t, s, &weights)? {
                    if !found.iter().any(|f| torus_dist(f, &z) < 1e-7) {
                        found.push(z);
                    }
                }
            }
        }
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut unmatched = Vec::new();
        let mut max_distance: f64 = 0.0;
        for z in &found {
            let d = poles.iter().map(|p| torus_dist(&p.param, z)).fold(f64::INFINITY, f64::min);
            if d > tol {
                unmatched.push(z.clone());
            } else {
                max_distance = max_distance.max(d);
            }
        }
        for p in &poles {
            if !found.iter().any(|z| torus_dist(&p.param, z) <= tol) {
                unmatched.push(p.param.clone());
            }
        }
        rows.push(ZeroLocusRow { t, found, expected: poles.len(), max_distance, unmatched, underflow });
    }
    Ok(ZeroLocusReport { tolerance: tol, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_spec(terms: &[(usize, &str, i32, f64)], lambda: Vec<f64>) -> EvMapSpec {
        let mut text = format!("k 2\ndomain circle\nlambda {} {}\n", lambda[0], lambda[1]);
        for (c, f, n, a) in terms {
            text += &format!("term c={c} f={f} n={n} a={a}\n");
        }
        EvMapSpec::parse(&text).unwrap()
    }

    fn identity_map() -> EvMapSpec {
        circle_spec(&[(1, "c", 1, 1.0), (2, "s", 1, 1.0)], vec![0.5, 1.0])
    }

    #[test]
    fn flow_normalize_examples() {
        let p = flow_normalize(&EndExpansion::new(vec![0.5, 1.0], vec![2.0, 0.0]).unwrap(), 1.0).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0);
        let p = flow_normalize(&EndExpansion::new(vec![0.2, 0.3, 0.9], vec![0.0, 0.0, 3.0]).unwrap(), 1.0).unwrap();
        assert_eq!(p, vec![0.0, 0.0, 1.0]);
        let p = flow_normalize(&EndExpansion::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap(), 1.0).unwrap();
        assert!((p[0] - 0.7861513777574233).abs() < 1e-14);
        assert!((p[1] - 0.6180339887498949).abs() < 1e-14);
        assert!(matches!(
            flow_normalize(&EndExpansion::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap(), 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn flow_normalize_against_bisection_oracle() {
        // e^{2s} + e^{4s} = 1 solved by plain bisection on the raw sum
        let (mut lo, mut hi) = (-5.0f64, 5.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (2.0 * mid).exp() + (4.0 * mid).exp() > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let e = EndExpansion::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!((flow_time(&e, 1.0).unwrap() - lo).abs() < 1e-14);
    }

    #[test]
    fn s0_examples() {
        let e = EndExpansion::new(vec![0.5, 1.0], vec![1.0, 0.3]).unwrap();
        assert!((s0_eval(1.0, &e).unwrap()[0] - 0.36787944117144233).abs() < 1e-16);
        let pole = EndExpansion::new(vec![0.5, 1.0, 2.0], vec![0.0, 0.0, -1.0]).unwrap();
        assert_eq!(s0_eval(3.0, &pole).unwrap(), vec![0.0, 0.0]);
        let a = s0_eval(1.0, &e).unwrap()[0];
        let b = s0_eval(2.0, &e).unwrap()[0];
        assert!(b < a && (b - a * (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn identity_and_doubled_angle_poles() {
        let pre = pole_preimages(&identity_map(), PoleChoice::LastCoordinate).unwrap();
        assert_eq!(pre.len(), 2);
        assert!((pre[0].param[0] - PI / 2.0).abs() < 1e-12 && pre[0].pole == Pole::North);
        assert!(pre.iter().all(|p| p.sign == 1));
        let doubled = circle_spec(&[(1, "c", 2, 1.0), (2, "s", 2, 1.0)], vec![0.5, 1.0]);
        let pre = pole_preimages(&doubled, PoleChoice::LastCoordinate).unwrap();
        assert_eq!(ScanCount::of(&pre), ScanCount { north: 2, south: 2, north_signed: 2, south_signed: 2 });
        let first = pole_preimages(&doubled, PoleChoice::FirstCoordinate).unwrap();
        assert_eq!(ScanCount::of(&first), ScanCount { north: 2, south: 2, north_signed: 2, south_signed: 2 });
        assert_eq!(scan_pole_count(&doubled, PoleChoice::LastCoordinate, 10_000).unwrap(), ScanCount::of(&pre));
    }

    #[test]
    fn degenerate_root_is_reported() {
        // F_1 = 1 + cos(theta) touches zero at theta = pi without crossing; F_1 = cos^2 has double zeros
        let spec = circle_spec(&[(1, "c", 0, 0.5), (1, "c", 2, 0.5), (2, "s", 1, 1.0), (2, "c", 0, 0.1)], vec![0.5, 1.0]);
        let found = pole_preimages(&spec, PoleChoice::LastCoordinate);
        assert!(matches!(found, Err(Error::Degenerate(_))) || found.unwrap().is_empty());
    }

    #[test]
    fn reparametrization_keeps_signed_counts() {
        let spec = circle_spec(&[(1, "c", 2, 1.0), (1, "s", 1, 0.2), (2, "s", 2, 1.0), (2, "c", 1, 0.2)], vec![0.5, 6.3]);
        let base = ScanCount::of(&pole_preimages(&spec, PoleChoice::LastCoordinate).unwrap());
        for d in [0.3, 1.7, 4.0] {
            let s = ScanCount::of(&pole_preimages(&spec.shifted(d, 0.0), PoleChoice::LastCoordinate).unwrap());
            assert_eq!((s.north_signed, s.south_signed), (base.north_signed, base.south_signed));
        }
        let r = ScanCount::of(&pole_preimages(&spec.reflected(), PoleChoice::LastCoordinate).unwrap());
        assert_eq!((r.north_signed, r.south_signed), (base.north_signed, base.south_signed));
    }

    #[test]
    fn path_examples() {
        let away = circle_spec(&[(1, "c", 0, -1.0), (2, "c", 0, 0.5)], vec![0.5, 1.0]);
        assert!(path_intersections(&away).unwrap().is_empty());
        let comps = path_intersections(&identity_map()).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].crossing(), 1);
        assert!(comps[0].consistent());
    }

    #[test]
    fn zero_locus_identity() {
        let r = s0_zero_locus_check(&identity_map(), &[1.0, 5.0]).unwrap();
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.rows[0].found.len(), 2);
        let none = circle_spec(&[(1, "c", 0, 1.0), (2, "s", 1, 1.0)], vec![0.5, 1.0]);
        let r = s0_zero_locus_check(&none, &[1.0, 2.0]).unwrap();
        assert!(r.ok() && r.rows.iter().all(|x| x.found.is_empty()));
        let r = s0_zero_locus_check(&identity_map(), &[800.0]).unwrap();
        assert!(r.rows[0].underflow && !r.ok());
    }

    #[test]
    fn lift_and_inclusion() {
        assert_eq!(inclusion(&[1.0, 2.0], 4, &[0, 2]).unwrap(), vec![1.0, 0.0, 2.0, 0.0]);
        assert!(inclusion(&[1.0, 2.0], 4, &[1, 1]).is_err());
        let l = identity_map().lift(4, &[0, 2], vec![0.5, 0.7, 1.0, 1.3]).unwrap();
        assert_eq!(l.eval(&[0.3]), inclusion(&identity_map().eval(&[0.3]), 4, &[0, 2]).unwrap());
        assert!(pole_preimages(&l, PoleChoice::LastCoordinate).is_err());
    }

    #[test]
    fn spec_text_round_trip() {
        let s = identity_map();
        assert_eq!(EvMapSpec::parse(&s.to_text()).unwrap(), s);
        assert!(EvMapSpec::parse("k 2\ndomain circle\nlambda 1 0.5\n").is_err());
        assert!(EvMapSpec::parse("k 2\ndomain sphere\nlambda 0.5 1\n").is_err());
    }

    #[test]
    fn coefficients_from_samples() {
        use crate::spectral::{closed_form_spectrum, OperatorKind};
        let t = closed_form_spectrum(OperatorKind::NegHyperbolic(0.2), 4).unwrap();
        let s = -0.5;
        let n = 512;
        let want = [0.7, -0.2, 0.1];
        let samples: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let tt = j as f64 / n as f64;
                let mut v = [0.0; 2];
                for (i, c) in want.iter().enumerate() {
                    let e = t.entry(i as i64 + 1).unwrap();
                    let f = e.eigenfunction.closed().unwrap().eval(tt);
                    let a = c * (e.eigenvalue * s).exp();
                    v[0] += a * f[0];
                    v[1] += a * f[1];
                }
                v
            })
            .collect();
        let e = extract_coefficients(&t, s, &samples, 3).unwrap();
        for (a, b) in e.c.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
