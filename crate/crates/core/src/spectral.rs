//! Spectra of the model asymptotic operators A = -j0 d/dt - S on the circle.
//!
//! Closed forms cover the elliptic, positive hyperbolic and negative hyperbolic
//! models. An independent finite-difference solver gives a numeric check.

use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix, Matrix2};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    Elliptic(f64),
    PosHyperbolic(f64),
    NegHyperbolic(f64),
}

impl OperatorKind {
    pub fn epsilon(&self) -> f64 {
        match *self {
            OperatorKind::Elliptic(e) | OperatorKind::PosHyperbolic(e) | OperatorKind::NegHyperbolic(e) => e,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Elliptic(_) => "elliptic",
            OperatorKind::PosHyperbolic(_) => "pos_hyp",
            OperatorKind::NegHyperbolic(_) => "neg_hyp",
        }
    }

    /// Checks the parameter range. Returns warnings for valid but unusual input.
    pub fn validate(&self) -> Result<Vec<String>> {
        let e = self.epsilon();
        if !e.is_finite() || e <= 0.0 {
            return Err(Error::Domain(format!("epsilon must be positive, got {e}")));
        }
        let mut warnings = Vec::new();
        match self {
            OperatorKind::Elliptic(_) if e >= 2.0 * PI => {
                return Err(Error::Domain(format!("elliptic epsilon must lie in (0, 2pi), got {e}")));
            }
            OperatorKind::PosHyperbolic(_) | OperatorKind::NegHyperbolic(_) if e > 1.0 => {
                warnings.push(format!("epsilon = {e} is not small; the model is still well defined"));
            }
            _ => {}
        }
        Ok(warnings)
    }

    pub fn s_matrix(&self) -> [[f64; 2]; 2] {
        let e = self.epsilon();
        match self {
            OperatorKind::Elliptic(_) => [[e, 0.0], [0.0, e]],
            _ => [[0.0, e], [e, 0.0]],
        }
    }

    /// The negative hyperbolic model lives on the twisted bundle f(1) = -f(0).
    pub fn is_antiperiodic(&self) -> bool {
        matches!(self, OperatorKind::NegHyperbolic(_))
    }
}

/// A loop t -> a cos(wt) + b sin(wt) in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigLoop {
    pub w: f64,
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl TrigLoop {
    pub fn eval(&self, t: f64) -> [f64; 2] {
        let (s, c) = (self.w * t).sin_cos();
        [self.a[0] * c + self.b[0] * s, self.a[1] * c + self.b[1] * s]
    }

    pub fn deriv(&self, t: f64) -> [f64; 2] {
        let (s, c) = (self.w * t).sin_cos();
        [self.w * (self.b[0] * c - self.a[0] * s), self.w * (self.b[1] * c - self.a[1] * s)]
    }

    pub fn samples(&self, n: usize) -> Vec<[f64; 2]> {
        (0..n).map(|j| self.eval(j as f64 / n as f64)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Eigenfunction {
    Closed(TrigLoop),
    /// Values at t_j = j/N, j = 0..N.
    Sampled(Vec<[f64; 2]>),
}

impl Eigenfunction {
    pub fn samples(&self, n: usize) -> Result<Vec<[f64; 2]>> {
        match self {
            Eigenfunction::Closed(l) => Ok(l.samples(n)),
            Eigenfunction::Sampled(v) if v.len() == n => Ok(v.clone()),
            Eigenfunction::Sampled(v) => Err(Error::Dimension(format!(
                "sampled eigenfunction has {} points, {} requested",
                v.len(),
                n
            ))),
        }
    }

    pub fn closed(&self) -> Option<&TrigLoop> {
        match self {
            Eigenfunction::Closed(l) => Some(l),
            Eigenfunction::Sampled(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralEntry {
    pub index: i64,
    pub eigenvalue: f64,
    pub eigenfunction: Eigenfunction,
    pub winding: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTable {
    pub kind: OperatorKind,
    /// Sorted by index.
    pub entries: Vec<SpectralEntry>,
}

impl SpectrumTable {
    pub fn entry(&self, index: i64) -> Option<&SpectralEntry> {
        self.entries.iter().find(|e| e.index == index)
    }

    pub fn eigenvalue(&self, index: i64) -> Option<f64> {
        self.entry(index).map(|e| e.eigenvalue)
    }

    pub fn max_index(&self) -> i64 {
        self.entries.iter().map(|e| e.index.abs()).max().unwrap_or(0)
    }

    /// Indices whose eigenvalue sign disagrees with the index sign, or where
    /// eigenvalues decrease with the index on one side of zero.
    pub fn ordering_violations(&self) -> Vec<i64> {
        let mut bad = Vec::new();
        for e in &self.entries {
            if e.eigenvalue.signum() != (e.index as f64).signum() {
                bad.push(e.index);
            }
        }
        for w in self.entries.windows(2) {
            let same_side = w[0].index.signum() == w[1].index.signum();
            if same_side && w[1].eigenvalue < w[0].eigenvalue {
                bad.push(w[1].index);
            }
        }
        bad
    }
}

/// Closed-form eigenpair for one index. Eigenfunctions have unit L2 norm.
///
/// For the positive hyperbolic model the printed eigenfunction pair is kept and
/// the eigenvalue follows the global convention sign(index) = sign(eigenvalue).
pub fn closed_form_entry(kind: OperatorKind, index: i64) -> Result<SpectralEntry> {
    kind.validate()?;
    if index == 0 {
        return Err(Error::Domain("index 0 does not exist".into()));
    }
    let eps = kind.epsilon();
    let sign = index.signum();
    let m = index.abs();
    let (lambda, trig, winding) = match kind {
        OperatorKind::Elliptic(_) => {
            // n >= 1: f_{2n-1} = e^{2 pi i n t}, f_{2n} = i e^{2 pi i n t}
            // n <= 0: f_{2n-2} = e^{2 pi i n t}, f_{2n-1} = i e^{2 pi i n t}
            let (n, real) = if index > 0 {
                ((index + 1) / 2, index % 2 != 0)
            } else if index % 2 == 0 {
                ((index + 2) / 2, true)
            } else {
                ((index + 1) / 2, false)
            };
            let w = 2.0 * PI * n as f64;
            let trig = if real {
                TrigLoop { w, a: [1.0, 0.0], b: [0.0, 1.0] }
            } else {
                TrigLoop { w, a: [0.0, 1.0], b: [-1.0, 0.0] }
            };
            (w - eps, trig, n)
        }
        OperatorKind::PosHyperbolic(_) => {
            if m == 1 {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let trig = TrigLoop { w: 0.0, a: [r, -(sign as f64) * r], b: [0.0, 0.0] };
                (sign as f64 * eps, trig, 0)
            } else {
                let n = m / 2;
                let w = 2.0 * PI * n as f64;
                let l = w.hypot(eps);
                let sg = sign as f64;
                let trig = if m % 2 == 0 {
                    TrigLoop { w, a: [eps / l, -sg], b: [w / l, 0.0] }
                } else {
                    TrigLoop { w, a: [-w / l, 0.0], b: [eps / l, -sg] }
                };
                (sg * l, trig, sign * n)
            }
        }
        OperatorKind::NegHyperbolic(_) => {
            let n = (m + 1) / 2;
            let w = (2 * n - 1) as f64 * PI;
            let l = w.hypot(eps);
            let sg = sign as f64;
            let trig = if m % 2 == 1 {
                TrigLoop { w, a: [eps / l, -sg], b: [w / l, 0.0] }
            } else {
                TrigLoop { w, a: [-w / l, 0.0], b: [eps / l, -sg] }
            };
            // Winding after untwisting the half-turn: n above the gap, 1 - n below.
            let winding = if sign > 0 { n } else { 1 - n };
            (sg * l, trig, winding)
        }
    };
    Ok(SpectralEntry { index, eigenvalue: lambda, eigenfunction: Eigenfunction::Closed(trig), winding })
}

pub fn closed_form_spectrum(kind: OperatorKind, max_index: usize) -> Result<SpectrumTable> {
    kind.validate()?;
    if max_index == 0 {
        return Err(Error::Domain("max_index must be at least 1".into()));
    }
    let m = max_index as i64;
    let entries = (-m..=m)
        .filter(|&i| i != 0)
        .map(|i| closed_form_entry(kind, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable { kind, entries })
}

/// Finite-difference spectrum with centered differences on a uniform grid.
///
/// The discretized operator commutes with grid shifts, so it splits into 2x2
/// Hermitian blocks, one per discrete wavenumber; each block is diagonalized
/// numerically and real eigenvectors are rebuilt on the grid. Centered
/// differences carry a spurious copy of every mode near the Nyquist frequency;
/// only the resolved branch (wavenumber up to N/4) is kept. `count` eigenpairs
/// are returned on each side of zero. Every eigenpair is checked against the
/// sparse operator and rejected if the residual is too large.
pub fn numeric_spectrum(kind: OperatorKind, grid_size: usize, count: usize) -> Result<SpectrumTable> {
    kind.validate()?;
    if grid_size < 64 {
        return Err(Error::Domain(format!("grid_size must be at least 64, got {grid_size}")));
    }
    if count == 0 || count > grid_size / 4 {
        return Err(Error::Domain(format!("count must lie in 1..={}, got {count}", grid_size / 4)));
    }
    let n = grid_size;
    let nf = n as f64;
    let s = kind.s_matrix();
    let anti = kind.is_antiperiodic();
    let kmax = (count / 2 + 2).min(n / 4);

    let mut pos: Vec<(f64, Vec<[f64; 2]>)> = Vec::new();
    let mut neg: Vec<(f64, Vec<[f64; 2]>)> = Vec::new();
    for k in 0..=kmax {
        let theta = if anti { PI * (2 * k + 1) as f64 / nf } else { 2.0 * PI * k as f64 / nf };
        let sigma = nf * theta.sin();
        let i = Complex::new(0.0, 1.0);
        let c = |x: f64| Complex::new(x, 0.0);
        // symbol of -j0 D - S with D e^{i theta j} = i sigma e^{i theta j}
        let h = Matrix2::new(
            c(-s[0][0]),
            i * sigma - c(s[0][1]),
            -i * sigma - c(s[1][0]),
            c(-s[1][1]),
        );
        let mut pairs: Vec<(f64, Vec<[f64; 2]>)> = Vec::new();
        if theta == 0.0 {
            // The zero-wavenumber block is real; a real solve keeps degenerate
            // eigenvectors orthogonal.
            let h0 = Matrix2::new(-s[0][0], -s[0][1], -s[1][0], -s[1][1]);
            let eig = h0.symmetric_eigen();
            for col in 0..2 {
                let v = eig.eigenvectors.column(col);
                pairs.push((eig.eigenvalues[col], normalized(vec![[v[0], v[1]]; n])));
            }
        } else {
            let eig = h.symmetric_eigen();
            for col in 0..2 {
                let v = eig.eigenvectors.column(col);
                for f in real_eigenvectors([v[0], v[1]], theta, n) {
                    pairs.push((eig.eigenvalues[col], f));
                }
            }
        }
        {
            for (lambda, f) in pairs {
                let res = fd_residual(&f, lambda, s, anti);
                let tol = 1e-10 * (nf + lambda.abs());
                if !(res <= tol) {
                    return Err(Error::Numeric(format!(
                        "eigenpair at wavenumber {k} (lambda = {lambda:.6e}) has residual {res:.3e} > {tol:.3e}"
                    )));
                }
                if lambda >= 0.0 {
                    pos.push((lambda, f));
                } else {
                    neg.push((lambda, f));
                }
            }
        }
    }
    pos.sort_by(|a, b| a.0.total_cmp(&b.0));
    neg.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pos.len() < count || neg.len() < count {
        return Err(Error::Numeric("not enough resolved eigenpairs on the grid".into()));
    }
    let mut entries = Vec::with_capacity(2 * count);
    for (side, list) in [(-1i64, &neg), (1, &pos)] {
        for (j, (lambda, f)) in list.iter().take(count).enumerate() {
            let loop_ = if anti { untwist(f) } else { f.clone() };
            let winding = winding_number(&loop_)?;
            entries.push(SpectralEntry {
                index: side * (j as i64 + 1),
                eigenvalue: *lambda,
                eigenfunction: Eigenfunction::Sampled(f.clone()),
                winding,
            });
        }
    }
    entries.sort_by_key(|e| e.index);
    Ok(SpectrumTable { kind, entries })
}

/// Real and imaginary parts of j -> v e^{i theta j}, orthonormalized in the
/// discrete L2 norm. Requires theta != 0.
fn real_eigenvectors(v: [Complex<f64>; 2], theta: f64, n: usize) -> Vec<Vec<[f64; 2]>> {
    let (re, im): (Vec<[f64; 2]>, Vec<[f64; 2]>) = (0..n)
        .map(|j| {
            let z = Complex::from_polar(1.0, theta * j as f64);
            let a = v[0] * z;
            let b = v[1] * z;
            ([a.re, b.re], [a.im, b.im])
        })
        .unzip();
    let re = normalized(re);
    let proj = dot(&re, &im);
    let im: Vec<[f64; 2]> = im.iter().zip(&re).map(|(x, r)| [x[0] - proj * r[0], x[1] - proj * r[1]]).collect();
    vec![re, normalized(im)]
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).sum::<f64>() / a.len() as f64
}

fn normalized(mut f: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let norm = dot(&f, &f).sqrt();
    for x in &mut f {
        x[0] /= norm;
        x[1] /= norm;
    }
    f
}

/// Discrete L2 norm of (A_h f - lambda f) for the centered-difference operator.
fn fd_residual(f: &[[f64; 2]], lambda: f64, s: [[f64; 2]; 2], anti: bool) -> f64 {
    let n = f.len();
    let half_inv_h = n as f64 / 2.0;
    let wrap = if anti { -1.0 } else { 1.0 };
    let mut acc = 0.0;
    for j in 0..n {
        let (next, sn) = if j + 1 == n { (f[0], wrap) } else { (f[j + 1], 1.0) };
        let (prev, sp) = if j == 0 { (f[n - 1], wrap) } else { (f[j - 1], 1.0) };
        let d = [
            (sn * next[0] - sp * prev[0]) * half_inv_h,
            (sn * next[1] - sp * prev[1]) * half_inv_h,
        ];
        // -j0 (x, y) = (y, -x)
        let af = [d[1] - s[0][0] * f[j][0] - s[0][1] * f[j][1], -d[0] - s[1][0] * f[j][0] - s[1][1] * f[j][1]];
        let r = [af[0] - lambda * f[j][0], af[1] - lambda * f[j][1]];
        acc += r[0] * r[0] + r[1] * r[1];
    }
    (acc / n as f64).sqrt()
}

/// Rotates sample j of an antiperiodic loop by the angle pi j / N so that it
/// closes up.
pub fn untwist(samples: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let (s, c) = (PI * j as f64 / n).sin_cos();
            [c * p[0] - s * p[1], s * p[0] + c * p[1]]
        })
        .collect()
}

/// Signed winding number about the origin of a closed sampled loop (the last
/// sample connects back to the first).
pub fn winding_number(samples: &[[f64; 2]]) -> Result<i64> {
    if samples.is_empty() {
        return Err(Error::IllConditioned("empty loop".into()));
    }
    let mut total = 0.0;
    for j in 0..samples.len() {
        let p = samples[j];
        let q = samples[(j + 1) % samples.len()];
        if p[0] == 0.0 && p[1] == 0.0 {
            return Err(Error::IllConditioned(format!("sample {j} lies at the origin")));
        }
        let step = (p[0] * q[1] - p[1] * q[0]).atan2(p[0] * q[0] + p[1] * q[1]);
        if step.abs() >= PI - 1e-9 {
            return Err(Error::IllConditioned(format!("angular jump of {step:.4} rad after sample {j}")));
        }
        total += step;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Pairwise discrete L2 inner products of the table's eigenfunctions, in table
/// order, using `quad_points` equally spaced samples.
pub fn gram_matrix(table: &SpectrumTable, quad_points: usize) -> Result<DMatrix<f64>> {
    if table.entries.is_empty() {
        return Err(Error::Domain("empty spectrum table".into()));
    }
    if quad_points == 0 {
        return Err(Error::Domain("quad_points must be positive".into()));
    }
    let samples = table
        .entries
        .iter()
        .map(|e| e.eigenfunction.samples(quad_points))
        .collect::<Result<Vec<_>>>()?;
    let m = samples.len();
    Ok(DMatrix::from_fn(m, m, |i, j| dot(&samples[i], &samples[j])))
}
