//! Linear gluing on a supersimple neck.
//!
//! On the neck the operator is exactly D = d/ds - A, so a section
//! psi = sum_i b_i(s) e^{lambda_i s} f_i(t) satisfies D psi = sum_i b_i' e^{lambda_i s} f_i
//! and every equation splits into one scalar ODE per mode. Fields are stored per
//! mode as coefficient functions on a piecewise uniform s-grid over [T0, 2T]
//! with breakpoints at T0 + hr, T - hr and T, so each cutoff ramp has its own
//! uniform segment.
//!
//! Cutoff derivatives enter as ramp densities: delta_+ = d beta_+/ds and
//! delta_- = -d beta_-/ds, both nonnegative with unit mass.
//!
//! Pairings against cokernel elements e^{-lambda_i s} f_i involve factors like
//! e^{-2 lambda_i T} that leave the f64 range for long necks, so they are kept
//! as a mantissa and a natural-log exponent.

use crate::error::{Error, Result};
use crate::spectral::{closed_form_spectrum, Eigenfunction, OperatorKind, SpectrumTable};
use std::collections::BTreeMap;

/// The smoothstep 6x^5 - 15x^4 + 10x^3, clamped to [0, 1] outside the unit interval.
pub fn beta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (x * (6.0 * x - 15.0) + 10.0)
    }
}

pub fn beta_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        30.0 * x * x * (1.0 - x) * (1.0 - x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeckParams {
    pub t0: f64,
    pub t: f64,
    pub h: f64,
    pub r: f64,
    pub s_grid: usize,
    pub t_modes: usize,
    /// Parameter of the negative hyperbolic operator on the neck.
    pub eps: f64,
}

impl Default for NeckParams {
    fn default() -> Self {
        NeckParams { t0: 21.0, t: 60.0, h: 0.5, r: 4.0, s_grid: 8192, t_modes: 4, eps: 0.2 }
    }
}

impl NeckParams {
    pub fn hr(&self) -> f64 {
        self.h * self.r
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t0, self.t, self.h, self.r, self.eps].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Domain("neck parameters must be finite".into()));
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::Domain(format!("h must lie in (0,1), got {}", self.h)));
        }
        if !(self.r > 1.0 / self.h) {
            return Err(Error::Domain(format!("need r > 1/h, got r = {} with h = {}", self.r, self.h)));
        }
        if !(self.t0 > 5.0 * self.r) {
            return Err(Error::Domain(format!("need T0 > 5r, got T0 = {} with r = {}", self.t0, self.r)));
        }
        if !(self.t > 2.0 * self.t0) {
            return Err(Error::Domain(format!("need T > 2 T0, got T = {} with T0 = {}", self.t, self.t0)));
        }
        if self.s_grid < 64 || self.s_grid % 4 != 0 {
            return Err(Error::Domain(format!("s_grid must be a multiple of 4 and at least 64, got {}", self.s_grid)));
        }
        if self.t_modes == 0 {
            return Err(Error::Domain("t_modes must be positive".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {}", self.eps)));
        }
        Ok(())
    }

    /// Reads `key value` lines; `#` starts a comment. Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = NeckParams::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (key, val) = match (it.next(), it.next(), it.next()) {
                (Some(k), Some(v), None) => (k, v),
                _ => return Err(Error::Validation(format!("line {}: expected `key value`", n + 1))),
            };
            let bad = || Error::Validation(format!("line {}: bad value `{val}` for {key}", n + 1));
            let real = || val.parse::<f64>().map_err(|_| bad());
            let int = || val.parse::<usize>().map_err(|_| bad());
            match key {
                "T0" => p.t0 = real()?,
                "T" => p.t = real()?,
                "h" => p.h = real()?,
                "r" => p.r = real()?,
                "eps" => p.eps = real()?,
                "s_grid" => p.s_grid = int()?,
                "t_modes" => p.t_modes = int()?,
                _ => return Err(Error::Validation(format!("line {}: unknown key `{key}`", n + 1))),
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        format!(
            "h {}\nr {}\nT0 {}\nT {}\neps {}\ns_grid {}\nt_modes {}\n",
            self.h, self.r, self.t0, self.t, self.eps, self.s_grid, self.t_modes
        )
    }

    /// Closed-form negative hyperbolic spectrum with modes +-1..+-t_modes.
    pub fn table(&self) -> Result<SpectrumTable> {
        closed_form_spectrum(OperatorKind::NegHyperbolic(self.eps), self.t_modes)
    }
}

/// Cutoff profiles, ramp densities and trapezoid weights on the neck grid.
#[derive(Clone, Debug)]
pub struct Neck {
    pub params: NeckParams,
    pub s: Vec<f64>,
    /// Spacing of interval j, [s_j, s_{j+1}].
    pub ds: Vec<f64>,
    pub weights: Vec<f64>,
    pub beta_minus: Vec<f64>,
    pub beta_plus: Vec<f64>,
    pub delta_minus: Vec<f64>,
    pub delta_plus: Vec<f64>,
}

pub fn beta_minus_at(p: &NeckParams, s: f64) -> f64 {
    beta((p.t - s) / p.hr())
}

pub fn beta_plus_at(p: &NeckParams, s: f64) -> f64 {
    beta((s - p.t0) / p.hr())
}

pub fn make_cutoffs(params: &NeckParams) -> Result<Neck> {
    params.validate()?;
    let hr = params.hr();
    let breaks = [params.t0, params.t0 + hr, params.t - hr, params.t, 2.0 * params.t];
    let n = params.s_grid / 4;
    let mut s = Vec::with_capacity(4 * n + 1);
    let mut ds = Vec::with_capacity(4 * n);
    s.push(breaks[0]);
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / n as f64;
        for j in 1..=n {
            s.push(if j == n { w[1] } else { w[0] + j as f64 * h });
            ds.push(h);
        }
    }
    let mut weights = vec![0.0; s.len()];
    for (j, h) in ds.iter().enumerate() {
        weights[j] += h / 2.0;
        weights[j + 1] += h / 2.0;
    }
    let beta_minus = s.iter().map(|&x| beta_minus_at(params, x)).collect();
    let beta_plus = s.iter().map(|&x| beta_plus_at(params, x)).collect();
    let delta_minus = s.iter().map(|&x| beta_deriv((params.t - x) / hr) / hr).collect();
    let delta_plus = s.iter().map(|&x| beta_deriv((x - params.t0) / hr) / hr).collect();
    Ok(Neck { params: params.clone(), s, ds, weights, beta_minus, beta_plus, delta_minus, delta_plus })
}

impl Neck {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    /// Running trapezoid integral from the bottom of the grid.
    pub fn cumulative(&self, g: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(g.len());
        let mut acc = 0.0;
        out.push(0.0);
        for j in 0..self.ds.len() {
            acc += self.ds[j] * (g[j] + g[j + 1]) / 2.0;
            out.push(acc);
        }
        out
    }

    /// Center of the beta_+ ramp, used as the reference height for pairings.
    fn ramp_center(&self) -> f64 {
        self.params.t0 + self.params.hr() / 2.0
    }
}

/// A real number mant * e^{exp}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledReal {
    pub mant: f64,
    pub exp: f64,
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal { mant: 0.0, exp: 0.0 };

    pub fn new(mant: f64, exp: f64) -> Self {
        if mant == 0.0 {
            return Self::ZERO;
        }
        let sh = mant.abs().ln();
        ScaledReal { mant: mant.signum(), exp: exp + sh }
    }

    pub fn value(&self) -> f64 {
        self.mant * self.exp.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.mant == 0.0
    }

    /// ln |x|; -inf for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.mant == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mant.abs().ln() + self.exp
        }
    }

    /// The value divided by e^{exp}.
    pub fn relative_to(&self, exp: f64) -> f64 {
        self.mant * (self.exp - exp).exp()
    }

    pub fn add(self, other: ScaledReal) -> ScaledReal {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let e = self.exp.max(other.exp);
        ScaledReal::new(self.relative_to(e) + other.relative_to(e), e)
    }

    pub fn neg(self) -> ScaledReal {
        ScaledReal { mant: -self.mant, exp: self.exp }
    }

    pub fn sqrt(self) -> ScaledReal {
        debug_assert!(self.mant >= 0.0);
        if self.is_zero() {
            return self;
        }
        ScaledReal::new(self.mant.sqrt(), self.exp / 2.0)
    }
}

/// Coefficient function of one mode: the mode's value at s_j is
/// b[j] * e^{log_scale + lambda s_j}.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCoeff {
    pub lambda: f64,
    pub log_scale: f64,
    pub b: Vec<f64>,
}

impl ModeCoeff {
    pub fn value(&self, j: usize, s: f64) -> f64 {
        if self.b[j] == 0.0 {
            0.0
        } else {
            self.b[j] * (self.log_scale + self.lambda * s).exp()
        }
    }

    fn is_zero(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0)
    }

    fn rescaled(&self, log_scale: f64) -> Vec<f64> {
        let f = (self.log_scale - log_scale).exp();
        self.b.iter().map(|x| x * f).collect()
    }
}

#[derive(Clone, Debug)]
pub struct NeckField {
    pub table: SpectrumTable,
    pub s: Vec<f64>,
    pub modes: BTreeMap<i64, ModeCoeff>,
}

impl NeckField {
    pub fn zero(neck: &Neck, table: &SpectrumTable) -> Self {
        NeckField { table: table.clone(), s: neck.s.clone(), modes: BTreeMap::new() }
    }

    /// sum c_i e^{lambda_i (s - offset)} f_i(t), a holomorphic end on the neck.
    pub fn holomorphic_end(neck: &Neck, table: &SpectrumTable, coeffs: &[(i64, f64)], offset: f64) -> Result<Self> {
        let mut f = NeckField::zero(neck, table);
        for &(i, c) in coeffs {
            let lambda = table
                .eigenvalue(i)
                .ok_or_else(|| Error::Domain(format!("mode {i} is not in the spectrum table")))?;
            if !c.is_finite() {
                return Err(Error::Domain(format!("coefficient of mode {i} is not finite")));
            }
            if f.modes.contains_key(&i) {
                return Err(Error::Domain(format!("mode {i} given twice")));
            }
            f.modes.insert(i, ModeCoeff { lambda, log_scale: -lambda * offset, b: vec![c; neck.len()] });
        }
        Ok(f)
    }

    /// The field u(s - s0).
    pub fn translated(&self, s0: f64) -> Self {
        let mut f = self.clone();
        for m in f.modes.values_mut() {
            m.log_scale -= m.lambda * s0;
        }
        f
    }

    /// Modes with a nonzero coefficient somewhere on the grid.
    pub fn support(&self) -> Vec<i64> {
        self.modes.iter().filter(|(_, m)| !m.is_zero()).map(|(&i, _)| i).collect()
    }

    pub fn mode(&self, i: i64) -> Option<&ModeCoeff> {
        self.modes.get(&i)
    }

    /// Value of mode i at grid point j, zero if the mode is absent.
    pub fn mode_value(&self, i: i64, j: usize) -> f64 {
        self.modes.get(&i).map_or(0.0, |m| m.value(j, self.s[j]))
    }

    /// Point value at (s_j, t) from closed-form eigenfunctions.
    pub fn eval(&self, j: usize, t: f64) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        for (&i, m) in &self.modes {
            let v = m.value(j, self.s[j]);
            if v == 0.0 {
                continue;
            }
            let f = eigen_loop(&self.table, i)?.eval(t);
            out[0] += v * f[0];
            out[1] += v * f[1];
        }
        Ok(out)
    }

    /// Finite energy on the stored range: every mode value is finite.
    pub fn check_finite(&self) -> Result<()> {
        for (&i, m) in &self.modes {
            if m.b.len() != self.s.len() {
                return Err(Error::Dimension(format!("mode {i} has {} samples on a grid of {}", m.b.len(), self.s.len())));
            }
            if (0..self.s.len()).any(|j| !m.value(j, self.s[j]).is_finite()) {
                return Err(Error::Numeric(format!("mode {i} is unbounded on the neck")));
            }
        }
        Ok(())
    }

    fn same_grid(&self, neck: &Neck) -> Result<()> {
        let ok = self.s.len() == neck.s.len() && self.s.first() == neck.s.first() && self.s.last() == neck.s.last();
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension("field and neck use different s-grids".into()))
        }
    }

    /// Pointwise sum; each mode is brought to the larger of the two log scales.
    pub fn add(&self, other: &NeckField) -> Result<NeckField> {
        if self.s.len() != other.s.len() {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        let mut out = self.clone();
        for (&i, m) in &other.modes {
            match out.modes.get_mut(&i) {
                None => {
                    out.modes.insert(i, m.clone());
                }
                Some(cur) if cur.is_zero() => *cur = m.clone(),
                Some(_) if m.is_zero() => {}
                Some(cur) => {
                    let ls = cur.log_scale.max(m.log_scale);
                    let a = cur.rescaled(ls);
                    let b = m.rescaled(ls);
                    cur.b = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                    cur.log_scale = ls;
                }
            }
        }
        Ok(out)
    }

    fn multiplied(&self, profile: &[f64]) -> NeckField {
        let mut out = self.clone();
        for m in out.modes.values_mut() {
            for (x, p) in m.b.iter_mut().zip(profile) {
                *x *= p;
            }
        }
        out
    }
}

fn eigen_loop(table: &SpectrumTable, i: i64) -> Result<crate::spectral::TrigLoop> {
    let e = table.entry(i).ok_or_else(|| Error::Domain(format!("mode {i} is not in the spectrum table")))?;
    e.eigenfunction
        .closed()
        .copied()
        .ok_or_else(|| Error::Domain(format!("mode {i} has no closed-form eigenfunction")))
}

/// L2 inner product over the circle of the eigenfunctions of modes i and j.
///
/// Closed-form loops are integrated exactly; frequencies are multiples of pi
/// with the same parity within one table, so distinct frequencies give 0.
pub fn t_inner(table: &SpectrumTable, i: i64, j: i64) -> Result<f64> {
    let ei = table.entry(i).ok_or_else(|| Error::Domain(format!("mode {i} is not in the spectrum table")))?;
    let ej = table.entry(j).ok_or_else(|| Error::Domain(format!("mode {j} is not in the spectrum table")))?;
    match (&ei.eigenfunction, &ej.eigenfunction) {
        (Eigenfunction::Closed(a), Eigenfunction::Closed(b)) => {
            if (a.w - b.w).abs() > 1e-9 {
                Ok(0.0)
            } else if a.w == 0.0 {
                Ok(a.a[0] * b.a[0] + a.a[1] * b.a[1])
            } else {
                Ok((a.a[0] * b.a[0] + a.a[1] * b.a[1] + a.b[0] * b.b[0] + a.b[1] * b.b[1]) / 2.0)
            }
        }
        (x, y) => {
            let n = match (x, y) {
                (Eigenfunction::Sampled(v), _) | (_, Eigenfunction::Sampled(v)) => v.len(),
                _ => unreachable!(),
            };
            let fa = x.samples(n)?;
            let fb = y.samples(n)?;
            Ok(fa.iter().zip(&fb).map(|(p, q)| p[0] * q[0] + p[1] * q[1]).sum::<f64>() / n as f64)
        }
    }
}

/// v_* = beta_+ eta_+ + beta_- eta_- on the neck. It equals eta_- at s = T0
/// and eta_+ on [T, 2T].
pub fn preglue(eta_plus: &NeckField, eta_minus: &NeckField, neck: &Neck) -> Result<NeckField> {
    check_supports(eta_plus, eta_minus)?;
    eta_plus.same_grid(neck)?;
    eta_minus.same_grid(neck)?;
    eta_plus.multiplied(&neck.beta_plus).add(&eta_minus.multiplied(&neck.beta_minus))
}

fn check_supports(eta_plus: &NeckField, eta_minus: &NeckField) -> Result<()> {
    if let Some(i) = eta_plus.support().into_iter().find(|&i| i < 0) {
        return Err(Error::Domain(format!("eta_plus has content in negative mode {i}")));
    }
    if let Some(i) = eta_minus.support().into_iter().find(|&i| i > 0) {
        return Err(Error::Domain(format!("eta_minus has content in positive mode {i}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct NeckSolution {
    pub psi_plus: NeckField,
    pub psi_minus: NeckField,
    /// Components of the forcing of the psi_- equation along sigma_1..sigma_k,
    /// removed before solving.
    pub obstruction: Vec<ScaledReal>,
    pub iterations: usize,
}

const MAX_ITER: usize = 50;

/// Solves Theta_+ = 0 and the projected Theta_- = 0 mode by mode.
///
/// psi_+ solves b' = -delta_- (eta_- + psi_-) integrated up from T0, so it
/// vanishes below the beta_- ramp. psi_- solves b' = -delta_+ (eta_+ + psi_+)
/// after the forcing of modes 1..k has its sigma_i component removed
/// (g -> g - <sigma_i, g> delta_+). Positive modes of psi_- are anchored to
/// vanish at 2T, negative modes at T0. The two solves alternate until the
/// fields stop changing.
pub fn solve_neck(eta_plus: &NeckField, eta_minus: &NeckField, neck: &Neck, k: usize) -> Result<NeckSolution> {
    check_supports(eta_plus, eta_minus)?;
    eta_plus.same_grid(neck)?;
    eta_minus.same_grid(neck)?;
    let table = &eta_plus.table;
    let mode_ids: Vec<i64> = table.entries.iter().map(|e| e.index).collect();
    if (k as i64) > table.entries.iter().filter(|e| e.index > 0).count() as i64 {
        return Err(Error::Domain(format!("k = {k} exceeds the number of positive modes")));
    }
    let mut psi_plus = NeckField::zero(neck, table);
    let mut psi_minus = NeckField::zero(neck, table);
    let mut obstruction = vec![ScaledReal::ZERO; k];
    for iter in 1..=MAX_ITER {
        let m = eta_minus.add(&psi_minus)?;
        let mut new_plus = NeckField::zero(neck, table);
        for &i in &mode_ids {
            let Some(src) = m.modes.get(&i).filter(|c| !c.is_zero()) else { continue };
            let g: Vec<f64> = src.b.iter().zip(&neck.delta_minus).map(|(x, d)| x * d).collect();
            let b = neck.cumulative(&g).into_iter().map(|x| -x).collect();
            new_plus.modes.insert(i, ModeCoeff { lambda: src.lambda, log_scale: src.log_scale, b });
        }
        let p = eta_plus.add(&new_plus)?;
        let mut new_minus = NeckField::zero(neck, table);
        for &i in &mode_ids {
            let Some(src) = p.modes.get(&i).filter(|c| !c.is_zero()) else { continue };
            let mut g: Vec<f64> = src.b.iter().zip(&neck.delta_plus).map(|(x, d)| x * d).collect();
            if i >= 1 && i as usize <= k {
                let obs = neck.integrate(&g);
                for (x, d) in g.iter_mut().zip(&neck.delta_plus) {
                    *x -= obs * d;
                }
                obstruction[i as usize - 1] = ScaledReal::new(obs, src.log_scale);
            }
            let cum = neck.cumulative(&g);
            let b = if i > 0 {
                let top = *cum.last().unwrap();
                cum.iter().map(|x| top - x).collect()
            } else {
                cum.into_iter().map(|x| -x).collect()
            };
            new_minus.modes.insert(i, ModeCoeff { lambda: src.lambda, log_scale: src.log_scale, b });
        }
        let settled = fields_close(&new_plus, &psi_plus) && fields_close(&new_minus, &psi_minus);
        psi_plus = new_plus;
        psi_minus = new_minus;
        if settled {
            return Ok(NeckSolution { psi_plus, psi_minus, obstruction, iterations: iter });
        }
    }
    Err(Error::Numeric(format!("neck iteration did not settle in {MAX_ITER} rounds")))
}

fn fields_close(a: &NeckField, b: &NeckField) -> bool {
    let ids: std::collections::BTreeSet<i64> = a.modes.keys().chain(b.modes.keys()).copied().collect();
    ids.into_iter().all(|i| {
        let (ma, mb) = (a.modes.get(&i), b.modes.get(&i));
        match (ma, mb) {
            (Some(x), Some(y)) => {
                let ls = x.log_scale.max(y.log_scale);
                let (u, v) = (x.rescaled(ls), y.rescaled(ls));
                let scale = u.iter().chain(&v).fold(0.0f64, |m, z| m.max(z.abs()));
                u.iter().zip(&v).all(|(p, q)| (p - q).abs() <= 1e-14 * scale)
            }
            (Some(x), None) | (None, Some(x)) => x.is_zero(),
            (None, None) => true,
        }
    })
}

/// Residuals of the discrete Theta_+ and projected Theta_- equations, in the
/// discrete L2 norm over the neck (trapezoid differences, midpoint forcing).
/// Returned as ln of the norm together with ln of the forcing norm.
#[derive(Clone, Copy, Debug)]
pub struct ThetaResiduals {
    pub plus: ScaledReal,
    pub minus: ScaledReal,
    pub plus_forcing: ScaledReal,
    pub minus_forcing: ScaledReal,
}

pub fn theta_residuals(
    eta_plus: &NeckField,
    eta_minus: &NeckField,
    sol: &NeckSolution,
    neck: &Neck,
    k: usize,
) -> Result<ThetaResiduals> {
    let m = eta_minus.add(&sol.psi_minus)?;
    let p = eta_plus.add(&sol.psi_plus)?;
    let (plus, plus_forcing) = residual_pair(&sol.psi_plus, &m, &neck.delta_minus, neck, 0)?;
    let (minus, minus_forcing) = residual_pair(&sol.psi_minus, &p, &neck.delta_plus, neck, k)?;
    Ok(ThetaResiduals { plus, minus, plus_forcing, minus_forcing })
}

fn residual_pair(psi: &NeckField, src: &NeckField, delta: &[f64], neck: &Neck, k: usize) -> Result<(ScaledReal, ScaledReal)> {
    let mut res = ScaledReal::ZERO;
    let mut force = ScaledReal::ZERO;
    let ids: std::collections::BTreeSet<i64> = psi.modes.keys().chain(src.modes.keys()).copied().collect();
    for i in ids {
        let (lambda, ls) = match (psi.modes.get(&i), src.modes.get(&i)) {
            (Some(a), Some(b)) => (a.lambda, a.log_scale.max(b.log_scale)),
            (Some(a), None) => (a.lambda, a.log_scale),
            (None, Some(b)) => (b.lambda, b.log_scale),
            (None, None) => continue,
        };
        let n = neck.len();
        let bp = psi.modes.get(&i).map_or(vec![0.0; n], |c| c.rescaled(ls));
        let mut g: Vec<f64> = match src.modes.get(&i) {
            Some(c) => c.rescaled(ls).iter().zip(delta).map(|(x, d)| x * d).collect(),
            None => vec![0.0; n],
        };
        if i >= 1 && i as usize <= k {
            let obs = neck.integrate(&g);
            for (x, d) in g.iter_mut().zip(delta) {
                *x -= obs * d;
            }
        }
        let mut r_vals = Vec::with_capacity(n - 1);
        let mut f_vals = Vec::with_capacity(n - 1);
        for j in 0..n - 1 {
            let mid = (neck.s[j] + neck.s[j + 1]) / 2.0;
            let r = (bp[j + 1] - bp[j]) / neck.ds[j] + (g[j] + g[j + 1]) / 2.0;
            r_vals.push((r, mid));
            f_vals.push(((g[j] + g[j + 1]) / 2.0, mid));
        }
        res = res.add(weighted_sq(&r_vals, &neck.ds, lambda, ls));
        force = force.add(weighted_sq(&f_vals, &neck.ds, lambda, ls));
    }
    Ok((res.sqrt(), force.sqrt()))
}

/// sum_j ds_j (v_j e^{ls + lambda s_j})^2 as a scaled real.
fn weighted_sq(vals: &[(f64, f64)], ds: &[f64], lambda: f64, ls: f64) -> ScaledReal {
    let top = vals
        .iter()
        .filter(|(v, _)| *v != 0.0)
        .map(|(_, s)| ls + lambda * s)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return ScaledReal::ZERO;
    }
    let sum: f64 = vals
        .iter()
        .zip(ds)
        .filter(|((v, _), _)| *v != 0.0)
        .map(|((v, s), h)| {
            let x = v * (ls + lambda * s - top).exp();
            h * x * x
        })
        .sum();
    ScaledReal::new(sum, 2.0 * top)
}

/// Discrete L2 norm of a field over the neck, as a scaled real.
pub fn l2_norm(field: &NeckField, neck: &Neck) -> Result<ScaledReal> {
    field.same_grid(neck)?;
    Ok(norm_parts(field, neck)?.0.sqrt())
}

/// Discrete ||psi||_* = ||grad psi|| + ||psi|| with L2 in both terms.
/// d/ds uses centered differences inside each uniform segment; d/dt uses the
/// eigenfunction frequency, ||f_i'|| = w_i.
pub fn star_norm(field: &NeckField, neck: &Neck) -> Result<ScaledReal> {
    field.same_grid(neck)?;
    let (v, ds, dt) = norm_parts(field, neck)?;
    Ok(ds.add(dt).sqrt().add(v.sqrt()))
}

fn norm_parts(field: &NeckField, neck: &Neck) -> Result<(ScaledReal, ScaledReal, ScaledReal)> {
    let n = neck.len();
    let seg = neck.params.s_grid / 4;
    let mut v = ScaledReal::ZERO;
    let mut ds_part = ScaledReal::ZERO;
    let mut dt_part = ScaledReal::ZERO;
    for (&i, m) in &field.modes {
        if m.is_zero() {
            continue;
        }
        let w = eigen_loop(&field.table, i)?.w;
        let top = (0..n)
            .filter(|&j| m.b[j] != 0.0)
            .map(|j| m.log_scale + m.lambda * neck.s[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let scaled = |x: f64, j: usize| if x == 0.0 { 0.0 } else { x * (m.log_scale + m.lambda * neck.s[j] - top).exp() };
        let vals: Vec<f64> = (0..n).map(|j| scaled(m.b[j], j)).collect();
        let mut dvals = Vec::with_capacity(n);
        for j in 0..n {
            // One-sided differences at segment breakpoints keep the stencil
            // inside a uniform segment.
            let local = j % seg;
            let bprime = if j == n - 1 {
                (m.b[j] - m.b[j - 1]) / neck.ds[j - 1]
            } else if local == 0 {
                (m.b[j + 1] - m.b[j]) / neck.ds[j]
            } else {
                (m.b[j + 1] - m.b[j - 1]) / (2.0 * neck.ds[j])
            };
            dvals.push(scaled(bprime + m.lambda * m.b[j], j));
        }
        let sq = |xs: &[f64]| xs.iter().zip(&neck.weights).map(|(x, w)| w * x * x).sum::<f64>();
        let vs = sq(&vals);
        v = v.add(ScaledReal::new(vs, 2.0 * top));
        ds_part = ds_part.add(ScaledReal::new(sq(&dvals), 2.0 * top));
        dt_part = dt_part.add(ScaledReal::new(w * w * vs, 2.0 * top));
    }
    Ok((v, ds_part, dt_part))
}

/// A cokernel element at the positive end, sum_j a_j e^{-lambda_j s} f_j(t).
pub type CokernelElement = Vec<(i64, f64)>;

/// sigma_i = e^{-lambda_i s} f_i(t).
pub fn sigma(i: i64) -> CokernelElement {
    vec![(i, 1.0)]
}

/// Discrete L2 pairing <sigma, delta_+ field> over the neck.
pub fn obstruction_pairing(sigma: &[(i64, f64)], field: &NeckField, neck: &Neck) -> Result<ScaledReal> {
    field.same_grid(neck)?;
    let sc = neck.ramp_center();
    let mut total = ScaledReal::ZERO;
    for &(i, a) in sigma {
        let li = field
            .table
            .eigenvalue(i)
            .ok_or_else(|| Error::Domain(format!("cokernel mode {i} is not in the spectrum table")))?;
        if a == 0.0 {
            continue;
        }
        for (&j, m) in &field.modes {
            let g = t_inner(&field.table, i, j)?;
            if g == 0.0 || m.is_zero() {
                continue;
            }
            let dl = m.lambda - li;
            let integrand: Vec<f64> = (0..neck.len())
                .map(|p| neck.delta_plus[p] * m.b[p] * (dl * (neck.s[p] - sc)).exp())
                .collect();
            let integral = neck.integrate(&integrand);
            total = total.add(ScaledReal::new(a * g * integral, m.log_scale + dl * sc));
        }
    }
    Ok(total)
}

/// Leading data of a cokernel basis.
///
/// Row i (0-based) of `c` holds c_{i+1, j} for j = 1..k: upper triangular with
/// unit diagonal. Row i of `d` holds d_{i+1, j} for j = -k..-1 in that order and
/// vanishes for j > -k + i. `lambda_plus` are lambda_1..lambda_k at the positive
/// end, `lambda_minus` are lambda'_{-k}..lambda'_{-1} at the negative end.
/// The last element sigma_k is the one identified with Y.
#[derive(Clone, Debug, PartialEq)]
pub struct CokernelBasisModel {
    pub k: usize,
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

impl CokernelBasisModel {
    pub fn new(lambda_plus: Vec<f64>, lambda_minus: Vec<f64>, c: Vec<Vec<f64>>, d: Vec<Vec<f64>>) -> Result<Self> {
        let k = lambda_plus.len();
        let m = CokernelBasisModel { k, lambda_plus, lambda_minus, c, d };
        m.validate()?;
        Ok(m)
    }

    /// c = identity, d = 0: every sigma_i is e^{-lambda_i s} f_i at the positive
    /// end with no negative-end data.
    pub fn diagonal(lambda_plus: Vec<f64>, lambda_minus: Vec<f64>) -> Result<Self> {
        let k = lambda_plus.len();
        let c = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let d = vec![vec![0.0; k]; k];
        Self::new(lambda_plus, lambda_minus, c, d)
    }

    /// Eigenvalues read from a table at each end: lambda_1..lambda_k of `plus`
    /// and lambda_{-k}..lambda_{-1} of `minus`.
    pub fn from_tables(
        k: usize,
        plus: &SpectrumTable,
        minus: &SpectrumTable,
        c: Vec<Vec<f64>>,
        d: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let get = |t: &SpectrumTable, i: i64| t.eigenvalue(i).ok_or_else(|| Error::Domain(format!("table has no mode {i}")));
        let lp = (1..=k as i64).map(|i| get(plus, i)).collect::<Result<Vec<_>>>()?;
        let lm = (-(k as i64)..=-1).map(|i| get(minus, i)).collect::<Result<Vec<_>>>()?;
        Self::new(lp, lm, c, d)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        if k == 0 {
            return Err(Error::Domain("k must be positive".into()));
        }
        if self.lambda_minus.len() != k || self.c.len() != k || self.d.len() != k {
            return Err(Error::Dimension(format!("cokernel model with k = {k} has mismatched sizes")));
        }
        if self.c.iter().chain(&self.d).any(|row| row.len() != k) {
            return Err(Error::Dimension("coefficient rows must have length k".into()));
        }
        if self.lambda_plus.iter().any(|&l| !(l > 0.0)) || self.lambda_plus.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("lambda_1..lambda_k must be positive and nondecreasing".into()));
        }
        if self.lambda_minus.iter().any(|&l| !(l < 0.0)) || self.lambda_minus.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("lambda'_{-k}..lambda'_{-1} must be negative and nondecreasing".into()));
        }
        for i in 0..k {
            if self.c[i][i] != 1.0 || self.c[i][..i].iter().any(|&x| x != 0.0) {
                return Err(Error::Domain(format!("row {} of c must start with a unit leading term", i + 1)));
            }
            if self.d[i][i + 1..].iter().any(|&x| x != 0.0) {
                return Err(Error::Domain(format!("row {} of d has terms beyond j = -k + {}", i + 1, i)));
            }
        }
        if self.c.iter().chain(&self.d).flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// Positive-end truncation of sigma'_i (1-based i).
    pub fn positive_element(&self, i: usize) -> CokernelElement {
        (1..=self.k).map(|j| (j as i64, self.c[i - 1][j - 1])).filter(|(_, a)| *a != 0.0).collect()
    }

    /// Negative-end truncation of sigma'_i as (j, d_{i,j}) with j in -k..-1.
    pub fn negative_element(&self, i: usize) -> CokernelElement {
        (0..self.k)
            .map(|jj| (jj as i64 - self.k as i64, self.d[i - 1][jj]))
            .filter(|(_, a)| *a != 0.0)
            .collect()
    }

    /// Index of the element identified with Y.
    pub fn y_index(&self) -> usize {
        self.k
    }
}

/// Closed-form case B pairing: entry i is
/// sum_{j>=i} c_{i,j} c_j e^{-2 lambda_j T_+} - sum_{j<=-k+i-1} d_{i,j} d_j e^{2 lambda'_j T_-}.
/// `c_end` holds c_1..c_k, `d_end` holds d_{-k}..d_{-1}.
pub fn two_sided_pairing(
    t_minus: f64,
    t_plus: f64,
    model: &CokernelBasisModel,
    c_end: &[f64],
    d_end: &[f64],
) -> Result<Vec<f64>> {
    model.validate()?;
    let k = model.k;
    if c_end.len() != k || d_end.len() != k {
        return Err(Error::Dimension(format!(
            "k = {k} but {} positive and {} negative end coefficients",
            c_end.len(),
            d_end.len()
        )));
    }
    if !(t_minus > 0.0 && t_plus > 0.0) {
        return Err(Error::Domain("T_- and T_+ must be positive".into()));
    }
    Ok((0..k)
        .map(|i| {
            let up: f64 = (i..k).map(|j| model.c[i][j] * c_end[j] * (-2.0 * model.lambda_plus[j] * t_plus).exp()).sum();
            let down: f64 = (0..=i).map(|jj| model.d[i][jj] * d_end[jj] * (2.0 * model.lambda_minus[jj] * t_minus).exp()).sum();
            up - down
        })
        .collect())
}

/// The table seen through s -> -s: mode j becomes mode -j with eigenvalue negated.
pub fn reflect_table(table: &SpectrumTable) -> SpectrumTable {
    let mut entries: Vec<_> = table
        .entries
        .iter()
        .map(|e| {
            let mut r = e.clone();
            r.index = -e.index;
            r.eigenvalue = -e.eigenvalue;
            r
        })
        .collect();
    entries.sort_by_key(|e| e.index);
    SpectrumTable { kind: table.kind, entries }
}

/// Case B pairing by quadrature on two necks.
///
/// The positive side is the neck [T0, 2T_+] with eta_1 = sum c_j e^{lambda_j (s - 2T_+)} f_j
/// over `plus`. The negative side is mirrored through s -> -s onto a neck
/// [T0, 2T_-] over the reflected `minus` table, where the beta_{-1} ramp
/// becomes a beta_+ ramp. `base` supplies h, r, T0 and the grid size.
pub fn two_sided_quadrature(
    t_minus: f64,
    t_plus: f64,
    model: &CokernelBasisModel,
    c_end: &[f64],
    d_end: &[f64],
    plus: &SpectrumTable,
    minus: &SpectrumTable,
    base: &NeckParams,
) -> Result<Vec<f64>> {
    let k = model.k;
    if c_end.len() != k || d_end.len() != k {
        return Err(Error::Dimension("end coefficient lengths must equal k".into()));
    }
    let neck_p = make_cutoffs(&NeckParams { t: t_plus, ..base.clone() })?;
    let neck_m = make_cutoffs(&NeckParams { t: t_minus, ..base.clone() })?;
    let reflected = reflect_table(minus);
    let cp: Vec<(i64, f64)> = (1..=k as i64).zip(c_end.iter().copied()).collect();
    let dm: Vec<(i64, f64)> = (0..k).map(|jj| (k as i64 - jj as i64, d_end[jj])).collect();
    let eta_p = NeckField::holomorphic_end(&neck_p, plus, &cp, 2.0 * t_plus)?;
    let eta_m = NeckField::holomorphic_end(&neck_m, &reflected, &dm, 2.0 * t_minus)?;
    (1..=k)
        .map(|i| {
            let up = obstruction_pairing(&model.positive_element(i), &eta_p, &neck_p)?;
            let neg: Vec<(i64, f64)> = model.negative_element(i).into_iter().map(|(j, a)| (-j, a)).collect();
            let down = obstruction_pairing(&neg, &eta_m, &neck_m)?;
            Ok(up.add(down.neg()).value())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub t: f64,
    pub r: f64,
    pub t0: f64,
    pub amplitude: f64,
    pub ln_psi_plus: f64,
    pub ln_psi_minus: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub lambda: f64,
    pub points: Vec<SweepPoint>,
    pub max_ratio: f64,
    pub bounded: bool,
    /// For each (r, amplitude) the ratio does not grow with T beyond a relative
    /// slack of 1e-4. For the default forcing the continuum ratio is independent
    /// of T (|lambda_{-1}| = lambda_1), so the slack absorbs quadrature drift.
    pub nonincreasing_in_t: bool,
}

/// Sweeps the estimate ||psi_+||_* <= c r^{-1} (e^{-lambda T} + ||psi_-||_*).
///
/// Each point uses T0 = 5r + 1 and the remaining constants of `base`, forcing
/// eta_- = a e^{lambda_{-1} s} f_{-1} and eta_+ = a e^{lambda_1 (s - 2T)} f_1,
/// with lambda = min(lambda_1, |lambda_{-1}|).
pub fn estimate_sweep(t_grid: &[f64], r_grid: &[f64], amplitudes: &[f64], base: &NeckParams, k: usize) -> Result<SweepReport> {
    let table = base.table()?;
    let l1 = table.eigenvalue(1).unwrap();
    let lm1 = table.eigenvalue(-1).unwrap();
    let lambda = l1.min(lm1.abs());
    let mut points = Vec::new();
    for &r in r_grid {
        for &a in amplitudes {
            for &t in t_grid {
                let params = NeckParams { t, r, t0: 5.0 * r + 1.0, ..base.clone() };
                let neck = make_cutoffs(&params)?;
                let eta_m = NeckField::holomorphic_end(&neck, &table, &[(-1, a)], 0.0)?;
                let eta_p = NeckField::holomorphic_end(&neck, &table, &[(1, a)], 2.0 * t)?;
                let sol = solve_neck(&eta_p, &eta_m, &neck, k)?;
                let np = star_norm(&sol.psi_plus, &neck)?;
                let nm = star_norm(&sol.psi_minus, &neck)?;
                let den = ScaledReal::new(1.0, -lambda * t).add(nm);
                let ratio = if np.is_zero() { 0.0 } else { (np.ln_abs() - den.ln_abs() + r.ln()).exp() };
                points.push(SweepPoint {
                    t,
                    r,
                    t0: params.t0,
                    amplitude: a,
                    ln_psi_plus: np.ln_abs(),
                    ln_psi_minus: nm.ln_abs(),
                    ratio,
                });
            }
        }
    }
    let max_ratio = points.iter().map(|p| p.ratio).fold(0.0, f64::max);
    let bounded = points.iter().all(|p| p.ratio.is_finite());
    let mut nonincreasing_in_t = true;
    for &r in r_grid {
        for &a in amplitudes {
            let mut row: Vec<&SweepPoint> = points.iter().filter(|p| p.r == r && p.amplitude == a).collect();
            row.sort_by(|x, y| x.t.total_cmp(&y.t));
            if row.windows(2).any(|w| w[1].ratio > w[0].ratio * (1.0 + 1e-4)) {
                nonincreasing_in_t = false;
            }
        }
    }
    Ok(SweepReport { lambda, points, max_ratio, bounded, nonincreasing_in_t })
}

/// Mode profile of psi_+ on the neck for eta_- = sum d_i e^{lambda_i s} f_i and a
/// holomorphic eta_+: the largest deviation of positive modes of psi_+ from
/// their value at 2T, and the largest |b_i(2T) + d_i| over negative modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomoReport {
    pub positive_spread: f64,
    pub negative_endpoint_error: f64,
}

pub fn momo_check(neck: &Neck, table: &SpectrumTable, c: &[(i64, f64)], d: &[(i64, f64)], k: usize) -> Result<MomoReport> {
    let eta_p = NeckField::holomorphic_end(neck, table, c, 2.0 * neck.params.t)?;
    let eta_m = NeckField::holomorphic_end(neck, table, d, 0.0)?;
    let sol = solve_neck(&eta_p, &eta_m, neck, k)?;
    let mut positive_spread = 0.0f64;
    let mut negative_endpoint_error = 0.0f64;
    for (&i, m) in &sol.psi_plus.modes {
        let last = *m.b.last().unwrap();
        if i > 0 {
            // Compare in the scale of the forcing eta_- (log scale 0).
            let f = m.log_scale.exp();
            for x in &m.b {
                positive_spread = positive_spread.max(((x - last) * f).abs());
            }
        }
    }
    for &(i, di) in d {
        let end = sol.psi_plus.mode(i).map_or(0.0, |m| *m.b.last().unwrap() * m.log_scale.exp());
        negative_endpoint_error = negative_endpoint_error.max((end + di).abs());
    }
    Ok(MomoReport { positive_spread, negative_endpoint_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neck(t: f64) -> Neck {
        make_cutoffs(&NeckParams { t, ..NeckParams::default() }).unwrap()
    }

    #[test]
    fn cutoff_endpoints() {
        let p = NeckParams::default();
        assert_eq!(beta_minus_at(&p, p.t), 0.0);
        assert_eq!(beta_minus_at(&p, p.t - p.hr()), 1.0);
        assert_eq!(beta_plus_at(&p, p.t0), 0.0);
        assert_eq!(beta_plus_at(&p, p.t0 + p.hr()), 1.0);
    }

    #[test]
    fn ramp_mass_is_one() {
        let n = neck(60.0);
        assert!((n.integrate(&n.delta_plus) - 1.0).abs() < 1e-12);
        assert!((n.integrate(&n.delta_minus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn params_invariants() {
        assert!(NeckParams { t0: 20.0, ..NeckParams::default() }.validate().is_err());
        assert!(NeckParams { t: 40.0, ..NeckParams::default() }.validate().is_err());
        assert!(NeckParams { r: 1.5, ..NeckParams::default() }.validate().is_err());
        let p = NeckParams::parse(crate::bundled::NECK).unwrap();
        assert_eq!(p, NeckParams::default());
        assert_eq!(NeckParams::parse(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn preglue_branches() {
        let n = neck(60.0);
        let table = n.params.table().unwrap();
        let ep = NeckField::holomorphic_end(&n, &table, &[(1, 0.7), (2, -0.3)], 2.0 * n.params.t).unwrap();
        let em = NeckField::holomorphic_end(&n, &table, &[(-1, 1.1)], 0.0).unwrap();
        let v = preglue(&ep, &em, &n).unwrap();
        let t = 0.37;
        let at = |f: &NeckField, j: usize| f.eval(j, t).unwrap();
        assert_eq!(at(&v, 0), at(&em, 0));
        let mid = n.s.iter().position(|&s| s > 30.0).unwrap();
        let (a, b, c) = (at(&v, mid), at(&ep, mid), at(&em, mid));
        for q in 0..2 {
            assert!((a[q] - (b[q] + c[q])).abs() <= 1e-15 * (b[q].abs() + c[q].abs()));
        }
        let zero = preglue(&NeckField::zero(&n, &table), &NeckField::zero(&n, &table), &n).unwrap();
        assert!(zero.support().is_empty());
        assert!(preglue(&em, &ep, &n).is_err());
    }

    #[test]
    fn momo_values() {
        let n = neck(60.0);
        let table = n.params.table().unwrap();
        let rep = momo_check(&n, &table, &[(1, 1.0), (2, 0.5)], &[(-1, 1.0), (-3, 0.25)], 2).unwrap();
        assert!(rep.positive_spread < 1e-9);
        assert!(rep.negative_endpoint_error < 1e-9, "{rep:?}");
    }

    #[test]
    fn zero_forcing_gives_zero_psi_plus() {
        let n = neck(60.0);
        let table = n.params.table().unwrap();
        let ep = NeckField::holomorphic_end(&n, &table, &[(1, 1.0)], 2.0 * n.params.t).unwrap();
        let sol = solve_neck(&ep, &NeckField::zero(&n, &table), &n, 2).unwrap();
        assert!(sol.psi_plus.support().is_empty());
    }

    #[test]
    fn single_mode_pairing() {
        for t in [45.0, 60.0, 120.0] {
            let n = neck(t);
            let table = n.params.table().unwrap();
            for i in 1..=3i64 {
                let c = 0.8;
                let lam = table.eigenvalue(i).unwrap();
                let ep = NeckField::holomorphic_end(&n, &table, &[(i, c)], 2.0 * t).unwrap();
                let p = obstruction_pairing(&sigma(i), &ep, &n).unwrap();
                assert!((p.relative_to(-2.0 * lam * t) - c).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn mixed_modes_do_not_leak() {
        let n = neck(60.0);
        let table = n.params.table().unwrap();
        let s_c = n.params.t0 + n.params.hr() / 2.0;
        let ep = NeckField::holomorphic_end(&n, &table, &[(1, 1.0), (3, 1.0), (4, 1.0)], s_c).unwrap();
        let p2 = obstruction_pairing(&sigma(2), &ep, &n).unwrap();
        assert!(p2.value().abs() < 1e-10);
    }

    #[test]
    fn case_b_sample() {
        let m = CokernelBasisModel::diagonal(vec![0.5, 1.0], vec![-1.0, -0.5]).unwrap();
        let v = two_sided_pairing(3.0, 2.0, &m, &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((v[0] - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn case_b_quadrature_matches_closed_form() {
        let plus = closed_form_spectrum(OperatorKind::NegHyperbolic(0.2), 4).unwrap();
        let minus = closed_form_spectrum(OperatorKind::PosHyperbolic(0.3), 4).unwrap();
        let c = vec![vec![1.0, 0.4, -0.2], vec![0.0, 1.0, 0.7], vec![0.0, 0.0, 1.0]];
        let d = vec![vec![0.5, 0.0, 0.0], vec![-0.3, 1.2, 0.0], vec![0.2, 0.1, -0.8]];
        let m = CokernelBasisModel::from_tables(3, &plus, &minus, c, d).unwrap();
        let base = NeckParams { s_grid: 2048, ..NeckParams::default() };
        let (tm, tp) = (50.0, 45.0);
        let ce = [0.9, -0.4, 0.3];
        let de = [0.6, -0.5, 1.1];
        let closed = two_sided_pairing(tm, tp, &m, &ce, &de).unwrap();
        let quad = two_sided_quadrature(tm, tp, &m, &ce, &de, &plus, &minus, &base).unwrap();
        for (a, b) in closed.iter().zip(&quad) {
            assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn theta_residuals_small() {
        let n = neck(60.0);
        let table = n.params.table().unwrap();
        let ep = NeckField::holomorphic_end(&n, &table, &[(1, 1.0), (3, -0.5)], 2.0 * n.params.t).unwrap();
        let em = NeckField::holomorphic_end(&n, &table, &[(-1, 1.0), (-2, 0.3)], 0.0).unwrap();
        let sol = solve_neck(&ep, &em, &n, 2).unwrap();
        let r = theta_residuals(&ep, &em, &sol, &n, 2).unwrap();
        assert!(r.plus.value() < 1e-9 && r.minus.value() < 1e-9);
        assert!(r.plus.ln_abs() - r.plus_forcing.ln_abs() < (1e-12f64).ln());
        assert!((sol.obstruction[0].relative_to(-2.0 * table.eigenvalue(1).unwrap() * 60.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sweep_shape() {
        let base = NeckParams { s_grid: 2048, ..NeckParams::default() };
        let rep = estimate_sweep(&[90.0, 100.0, 120.0], &[4.0, 8.0], &[1.0], &base, 2).unwrap();
        assert!(rep.bounded && rep.max_ratio > 0.0);
        assert!(rep.nonincreasing_in_t);
        let zero = estimate_sweep(&[90.0], &[4.0], &[0.0], &base, 2).unwrap();
        assert_eq!(zero.max_ratio, 0.0);
        // Doubling r never shrinks psi_+ by more than half.
        for t in [90.0, 100.0, 120.0] {
            let at = |r: f64| rep.points.iter().find(|p| p.t == t && p.r == r).unwrap().ln_psi_plus;
            assert!((at(8.0) - at(4.0)).exp() >= 0.5 * 0.9);
        }
    }
}
