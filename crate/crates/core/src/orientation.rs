//! Signs on determinant lines of finite-dimensional linear maps.
//!
//! An orientation of a vector space is a basis up to positive change of basis.
//! For phi: V -> W the determinant line is Lambda ker phi (x) Lambda (coker phi)^*,
//! and a dual wedge is always written in reverse order, w_n^* ^ ... ^ w_1^*,
//! so that it pairs to +1 with w_1 ^ ... ^ w_n.

use crate::error::{Error, Result};
use crate::rational::{sign_of, QMat, Q};
use num_traits::Zero;

/// Contraction convention recorded in every sign report.
pub const CONTRACTION_CONVENTION: &str =
    "tangent space of M/R oriented by -[e_1^...^e_k (x) ds^*]; contraction against e*_{k-1}^...^e*_1";

/// Sign of a permutation of 0..n or of 1..n.
pub fn wedge_sign(perm: &[usize]) -> Result<i8> {
    let n = perm.len();
    let base = if n > 0 && !perm.contains(&0) { 1 } else { 0 };
    let mut seen = vec![false; n];
    for &p in perm {
        let i = p.checked_sub(base).filter(|&i| i < n);
        match i {
            Some(i) if !seen[i] => seen[i] = true,
            _ => return Err(Error::Domain(format!("{perm:?} is not a permutation"))),
        }
    }
    // Parity from the cycle decomposition.
    let mut visited = vec![false; n];
    let mut sign = 1i8;
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !visited[j] {
            visited[j] = true;
            j = perm[j] - base;
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    Ok(sign)
}

/// Moving the radial vector past k-1 tangent vectors: (-1)^{k-1}.
pub fn radial_reorder_sign(k: usize) -> i8 {
    if k % 2 == 1 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrientedBasis {
    pub vectors: Vec<Vec<Q>>,
    pub sign: i8,
}

impl OrientedBasis {
    pub fn new(vectors: Vec<Vec<Q>>, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Domain(format!("orientation sign must be +-1, got {sign}")));
        }
        if let Some(n) = vectors.first().map(|v| v.len()) {
            if vectors.iter().any(|v| v.len() != n) {
                return Err(Error::Dimension("basis vectors have different lengths".into()));
            }
            if QMat::from_cols(n, &vectors).rank() != vectors.len() {
                return Err(Error::Degenerate("basis vectors are linearly dependent".into()));
            }
        }
        Ok(OrientedBasis { vectors, sign })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// +1 if both bases span the same subspace with the same orientation, -1 if opposite.
    pub fn compare(&self, other: &OrientedBasis) -> Result<i8> {
        Ok(self.sign * other.sign * change_of_basis_sign(&other.vectors, &self.vectors)?)
    }
}

/// Sign of det X where new = old X, for two bases of the same subspace.
pub fn change_of_basis_sign(old: &[Vec<Q>], new: &[Vec<Q>]) -> Result<i8> {
    if old.len() != new.len() {
        return Err(Error::Dimension(format!("bases of sizes {} and {}", old.len(), new.len())));
    }
    let q = old.len();
    if q == 0 {
        return Ok(1);
    }
    let n = old[0].len();
    if new.iter().chain(old).any(|v| v.len() != n) {
        return Err(Error::Dimension("vectors of different lengths".into()));
    }
    let aug = QMat::from_cols(n, &[old, new].concat());
    let (r, pivots) = aug.rref();
    if pivots.len() != q || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return Err(Error::Validation("the two bases do not span the same subspace".into()));
    }
    let mut x = QMat::zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            x[(i, j)] = r[(i, q + j)].clone();
        }
    }
    match sign_of(&x.det()) {
        0 => Err(Error::Degenerate("new vectors are linearly dependent".into())),
        s => Ok(s),
    }
}

/// A linear map V -> W (matrix with dim W rows) and a subspace E of W given by a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FredholmModel {
    pub matrix: QMat,
    pub e: Vec<Vec<Q>>,
}

impl FredholmModel {
    pub fn new(matrix: QMat, e: Vec<Vec<Q>>) -> Result<Self> {
        let w = matrix.rows();
        if e.iter().any(|v| v.len() != w) {
            return Err(Error::Dimension(format!("E vectors must have length dim W = {w}")));
        }
        if !e.is_empty() && QMat::from_cols(w, &e).rank() != e.len() {
            return Err(Error::Degenerate("E basis is linearly dependent".into()));
        }
        let m = FredholmModel { matrix, e };
        if m.span_rank() != w {
            return Err(Error::Validation("Im(phi) + E does not span W".into()));
        }
        Ok(m)
    }

    fn span_rank(&self) -> usize {
        let w = self.matrix.rows();
        if self.e.is_empty() {
            self.matrix.rank()
        } else {
            self.matrix.hstack(&QMat::from_cols(w, &self.e)).rank()
        }
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        (0..self.matrix.rows())
            .map(|i| (0..self.matrix.cols()).fold(Q::zero(), |acc, j| acc + &self.matrix[(i, j)] * &v[j]))
            .collect()
    }

    /// Basis of phi^{-1}(E) as the kernel of V -> W/E, in reduced-echelon form.
    pub fn preimage_basis(&self) -> Vec<Vec<Q>> {
        let w = self.matrix.rows();
        let v = self.matrix.cols();
        if self.e.is_empty() {
            return self.matrix.kernel().columns();
        }
        // Solve phi x = E y: kernel of [phi | -E], projected to x.
        let neg_e = QMat::from_cols(w, &self.e).scale(&-Q::from_integer(1.into()));
        let k = self.matrix.hstack(&neg_e).kernel();
        let xs: Vec<Vec<Q>> = k.columns().into_iter().map(|c| c[..v].to_vec()).collect();
        if xs.is_empty() {
            return xs;
        }
        // Extract an independent subset in order.
        let m = QMat::from_cols(v, &xs);
        let (_, pivots) = m.rref();
        pivots.into_iter().map(|p| xs[p].clone()).collect()
    }
}

/// Bases chosen for the comparison isomorphism: ker phi, a complement F of
/// ker phi in phi^{-1}(E), and a complement of phi(F) in E standing for coker phi.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonBases {
    pub ker: Vec<Vec<Q>>,
    pub f: Vec<Vec<Q>>,
    pub coker: Vec<Vec<Q>>,
}

/// Sign of Phi_E([v ^ .. ^ v_m (x) w_n^* ^ .. ^ w_1^*]) against the reference
/// orientation [u_1 ^ .. ^ u_q (x) e_p^* ^ .. ^ e_1^*] of det phi^{-1}(E) (x) det E^*.
///
/// Phi_E sends the class to [v ^ f (x) phi(f_l)^* ^ .. ^ phi(f_1)^* ^ w_n^* ^ .. ^ w_1^*];
/// the dual wedge is the reversed dual of the basis (w, phi(f)) of E. The sign is
/// sign det[(v, f) in u] * sign det[(w, phi(f)) in e]. `reference` defaults to
/// [`FredholmModel::preimage_basis`].
pub fn comparison_sign(model: &FredholmModel, bases: &ComparisonBases, reference: Option<&[Vec<Q>]>) -> Result<i8> {
    check_bases(model, bases)?;
    let default_ref;
    let u = match reference {
        Some(u) => u,
        None => {
            default_ref = model.preimage_basis();
            &default_ref
        }
    };
    let vf: Vec<Vec<Q>> = bases.ker.iter().chain(&bases.f).cloned().collect();
    let phi_f: Vec<Vec<Q>> = bases.f.iter().map(|x| model.apply(x)).collect();
    let w_phi_f: Vec<Vec<Q>> = bases.coker.iter().cloned().chain(phi_f).collect();
    let a = change_of_basis_sign(u, &vf)
        .map_err(|e| Error::Validation(format!("kernel and F do not form a basis of phi^-1(E): {e}")))?;
    let b = change_of_basis_sign(&model.e, &w_phi_f)
        .map_err(|e| Error::Validation(format!("cokernel and phi(F) do not form a basis of E: {e}")))?;
    Ok(a * b)
}

fn check_bases(model: &FredholmModel, bases: &ComparisonBases) -> Result<()> {
    let v = model.matrix.cols();
    let w = model.matrix.rows();
    if bases.ker.iter().chain(&bases.f).any(|x| x.len() != v) || bases.coker.iter().any(|x| x.len() != w) {
        return Err(Error::Dimension("basis vectors have the wrong length".into()));
    }
    let kernel_dim = v - model.matrix.rank();
    if bases.ker.len() != kernel_dim || bases.ker.iter().any(|x| model.apply(x).iter().any(|c| !c.is_zero())) {
        return Err(Error::Validation(format!("ker basis must be {kernel_dim} vectors killed by phi")));
    }
    let coker_dim = w - model.matrix.rank();
    if bases.coker.len() != coker_dim {
        return Err(Error::Validation(format!("coker basis must have {coker_dim} vectors")));
    }
    if coker_dim > 0 {
        let stacked = model.matrix.hstack(&QMat::from_cols(w, &bases.coker));
        if stacked.rank() != w {
            return Err(Error::Validation("coker basis does not complement Im(phi)".into()));
        }
    }
    Ok(())
}

/// Pole on the sphere S^{k-1}: (0,..,0,+1) or (0,..,0,-1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pole {
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

    pub fn opposite(self) -> Pole {
        match self {
            Pole::North => Pole::South,
            Pole::South => Pole::North,
        }
    }
}

/// Sign of d s_0 at a zero over a pole: the pole sign times
/// sign det(diag(e^{-2 lambda_i T}) J). The diagonal factor is positive, so only
/// det J matters; lambda and T are validated and kept for the record.
pub fn ds0_sign(k: usize, pole: Pole, jacobian: &QMat, lambda: &[f64], t: f64) -> Result<i8> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let n = k - 1;
    if jacobian.rows() != n || jacobian.cols() != n {
        return Err(Error::Dimension(format!(
            "Jacobian must be {n}x{n}, got {}x{}",
            jacobian.rows(),
            jacobian.cols()
        )));
    }
    if lambda.len() < n || lambda.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Domain(format!("need {n} positive eigenvalues")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain("T must be positive".into()));
    }
    match sign_of(&jacobian.det()) {
        0 => Err(Error::Degenerate("Jacobian is singular; the pole is not a regular value".into())),
        s => Ok(pole.sign() * s),
    }
}

/// Which way the boundary vector field a of a one-dimensional component points
/// at the boundary point being glued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AwayFrom,
    Toward,
}

/// sgn(a) at a boundary point u_1 u u_2: sgn(u_1) sgn(u_2) = -sgn(a) where a
/// points away, and sgn(u_1) sgn(u_2) = sgn(a) where it points toward.
pub fn glued_sign(sgn1: i8, sgn2: i8, direction: Direction) -> Result<i8> {
    if sgn1.abs() != 1 || sgn2.abs() != 1 {
        return Err(Error::Domain("signs must be +-1".into()));
    }
    Ok(match direction {
        Direction::AwayFrom => -sgn1 * sgn2,
        Direction::Toward => sgn1 * sgn2,
    })
}

/// Whether two boundary points can be the two ends of one arc: the sign of a
/// read off at either end must agree, i.e. sgn(u_1') sgn(u_2') = -sgn(u_1) sgn(u_2).
pub fn arc_consistent(ends: (i8, i8), flat_ends: (i8, i8)) -> Result<bool> {
    let a = glued_sign(ends.0, ends.1, Direction::AwayFrom)?;
    let b = glued_sign(flat_ends.0, flat_ends.1, Direction::Toward)?;
    Ok(a == b)
}

/// Determinant by the Leibniz sum over permutations.
pub fn leibniz_det(m: &QMat) -> Result<Q> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Dimension("Leibniz determinant of a non-square matrix".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Q::zero();
    loop {
        let mut term = Q::from_integer(wedge_sign(&perm)?.into());
        for (i, &p) in perm.iter().enumerate() {
            term *= &m[(i, p)];
        }
        total += term;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(total)
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| p[i] < p[i + 1]) else { return false };
    let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Orientation chase in ambient coordinates, independent of the reduced-echelon
/// solve: two bases S, S' of one subspace compare by
/// sign det[S' | C] * sign det[S | C] for any completion C to a basis of the
/// ambient space. Determinants are Leibniz sums.
pub fn comparison_sign_oracle(model: &FredholmModel, bases: &ComparisonBases, reference: &[Vec<Q>]) -> Result<i8> {
    let v = model.matrix.cols();
    let w = model.matrix.rows();
    let vf: Vec<Vec<Q>> = bases.ker.iter().chain(&bases.f).cloned().collect();
    let phi_f: Vec<Vec<Q>> = bases.f.iter().map(|x| model.apply(x)).collect();
    let w_phi_f: Vec<Vec<Q>> = bases.coker.iter().cloned().chain(phi_f).collect();
    Ok(ambient_compare(v, reference, &vf)? * ambient_compare(w, &model.e, &w_phi_f)?)
}

fn ambient_compare(n: usize, old: &[Vec<Q>], new: &[Vec<Q>]) -> Result<i8> {
    let mut completion: Vec<Vec<Q>> = Vec::new();
    let mut current: Vec<Vec<Q>> = old.to_vec();
    for i in 0..n {
        if current.len() == n {
            break;
        }
        let mut unit = vec![Q::zero(); n];
        unit[i] = Q::from_integer(1.into());
        let mut trial = current.clone();
        trial.push(unit.clone());
        if QMat::from_cols(n, &trial).rank() == trial.len() {
            current = trial;
            completion.push(unit);
        }
    }
    let a = leibniz_det(&QMat::from_cols(n, &[old, &completion[..]].concat()))?;
    let b = leibniz_det(&QMat::from_cols(n, &[new, &completion[..]].concat()))?;
    match (sign_of(&a), sign_of(&b)) {
        (0, _) | (_, 0) => Err(Error::Degenerate("bases do not span the same subspace".into())),
        (x, y) => Ok(x * y),
    }
}

/// A random consistent instance with dim V, dim W <= max_dim and small integer
/// entries, bases scrambled by random invertible recombinations.
pub fn random_comparison_instance(seed: u64, max_dim: usize) -> (FredholmModel, ComparisonBases) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dv = rng.gen_range(1..=max_dim);
    let dw = rng.gen_range(1..=max_dim);
    let target_rank = rng.gen_range(0..=dv.min(dw));
    // phi = A B with A: dw x rank, B: rank x dv.
    let mut rand_mat = |r: usize, c: usize| {
        QMat::from_rows((0..r).map(|_| (0..c).map(|_| Q::from_integer(rng.gen_range(-3i64..=3).into())).collect()).collect())
    };
    let phi = if target_rank == 0 { QMat::zeros(dw, dv) } else { rand_mat(dw, target_rank).mul(&rand_mat(target_rank, dv)) };
    let rank = phi.rank();
    let image: Vec<Vec<Q>> = {
        let (_, piv) = phi.rref();
        piv.into_iter().map(|j| phi.col(j)).collect()
    };
    // E: a complement of Im phi from unit vectors, plus random image vectors, plus
    // random mixtures, reduced to an independent set.
    let mut e: Vec<Vec<Q>> = Vec::new();
    let mut span = image.clone();
    for i in 0..dw {
        let mut unit = vec![Q::zero(); dw];
        unit[i] = Q::from_integer(1.into());
        let mut trial = span.clone();
        trial.push(unit.clone());
        if QMat::from_cols(dw, &trial).rank() == trial.len() {
            span = trial;
            e.push(unit);
        }
    }
    let extra = if rank == 0 { 0 } else { rng.gen_range(0..=rank) };
    for _ in 0..extra {
        let mut x = vec![Q::zero(); dw];
        for col in &image {
            let c = Q::from_integer(rng.gen_range(-2i64..=2).into());
            for (xi, ci) in x.iter_mut().zip(col) {
                *xi += &c * ci;
            }
        }
        let mut trial = e.clone();
        trial.push(x.clone());
        if QMat::from_cols(dw, &trial).rank() == trial.len() {
            e = trial;
        }
    }
    let e = scramble(&e, &mut rng);
    let model = FredholmModel::new(phi, e).expect("constructed model is valid");
    let ker = scramble(&model.matrix.kernel().columns(), &mut rng);
    let mut f = Vec::new();
    let mut span = ker.clone();
    for x in model.preimage_basis() {
        let mut trial = span.clone();
        trial.push(x.clone());
        if QMat::from_cols(dv, &trial).rank() == trial.len() {
            span = trial;
            f.push(x);
        }
    }
    let f = scramble(&f, &mut rng);
    let mut coker = Vec::new();
    let mut span = image;
    for x in &model.e {
        let mut trial = span.clone();
        trial.push(x.clone());
        if QMat::from_cols(dw, &trial).rank() == trial.len() {
            span = trial;
            coker.push(x.clone());
        }
    }
    let coker = scramble(&coker, &mut rng);
    (model, ComparisonBases { ker, f, coker })
}

/// Random unimodular-ish recombination: a random order, random signs and
/// random lower-triangular mixing.
fn scramble(vs: &[Vec<Q>], rng: &mut impl rand::Rng) -> Vec<Vec<Q>> {
    use rand::seq::SliceRandom;
    let mut out: Vec<Vec<Q>> = vs.to_vec();
    out.shuffle(rng);
    for i in 0..out.len() {
        if rng.gen_bool(0.5) {
            out[i] = out[i].iter().map(|x| -x).collect();
        }
        for j in 0..i {
            let c = Q::from_integer(rng.gen_range(-1i64..=1).into());
            if !c.is_zero() {
                let add: Vec<Q> = out[j].iter().map(|x| x * &c).collect();
                for (a, b) in out[i].iter_mut().zip(add) {
                    *a += b;
                }
            }
        }
    }
    out
}
