//! Orbit classification and index arithmetic for hyperbolic Reeb orbits.

use crate::error::{Error, Result};
use crate::rational::Q;
use crate::spectral::SpectrumTable;
use num_traits::Signed;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrbitType {
    PosHyperbolic,
    NegHyperbolic,
}

impl OrbitType {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pos_hyp" | "pos_hyperbolic" => Ok(OrbitType::PosHyperbolic),
            "neg_hyp" | "neg_hyperbolic" => Ok(OrbitType::NegHyperbolic),
            _ => Err(Error::Validation(format!("unknown orbit type '{s}'"))),
        }
    }
}

impl fmt::Display for OrbitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrbitType::PosHyperbolic => "pos_hyp",
            OrbitType::NegHyperbolic => "neg_hyp",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReebOrbit {
    pub id: String,
    pub simple_id: String,
    pub multiplicity: u32,
    pub simple_type: OrbitType,
    /// Action of this (possibly multiply covered) orbit.
    pub action: Q,
    /// CZ index of the underlying simple orbit in the fixed framing.
    pub cz_simple: i64,
}

impl ReebOrbit {
    pub fn validate(&self) -> Result<()> {
        if self.multiplicity == 0 {
            return Err(Error::Validation(format!("orbit {}: multiplicity must be positive", self.id)));
        }
        if !self.action.is_positive() {
            return Err(Error::Validation(format!("orbit {}: action must be positive", self.id)));
        }
        let even = self.cz_simple % 2 == 0;
        match (self.simple_type, even) {
            (OrbitType::PosHyperbolic, false) => Err(Error::Validation(format!(
                "orbit {}: pos_hyp simple orbit needs even cz, got {}",
                self.id, self.cz_simple
            ))),
            (OrbitType::NegHyperbolic, true) => Err(Error::Validation(format!(
                "orbit {}: neg_hyp simple orbit needs odd cz, got {}",
                self.id, self.cz_simple
            ))),
            _ => Ok(()),
        }
    }

    pub fn cz(&self) -> i64 {
        cz_index(self)
    }

    pub fn is_bad(&self) -> bool {
        self.simple_type == OrbitType::NegHyperbolic && self.multiplicity % 2 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quality {
    Good,
    Bad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub parity: Parity,
    pub quality: Quality,
}

pub fn classify_orbit(orbit: &ReebOrbit) -> Result<Classification> {
    orbit.validate()?;
    let parity = if cz_index(orbit) % 2 == 0 { Parity::Even } else { Parity::Odd };
    let quality = if orbit.is_bad() { Quality::Bad } else { Quality::Good };
    Ok(Classification { parity, quality })
}

pub fn cz_index(orbit: &ReebOrbit) -> i64 {
    orbit.multiplicity as i64 * orbit.cz_simple
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveTopology {
    pub genus: u32,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
    pub c1: i64,
}

impl CurveTopology {
    pub fn cylinder(plus: &str, minus: &str) -> Self {
        CurveTopology { genus: 0, positive: vec![plus.into()], negative: vec![minus.into()], c1: 0 }
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - (self.positive.len() + self.negative.len()) as i64
    }
}

pub type OrbitTable = BTreeMap<String, ReebOrbit>;

pub fn orbit_table(orbits: impl IntoIterator<Item = ReebOrbit>) -> OrbitTable {
    orbits.into_iter().map(|o| (o.id.clone(), o)).collect()
}

/// ind(u) = -chi + sum cz(positive ends) - sum cz(negative ends) + 2 c1.
pub fn fredholm_index(topology: &CurveTopology, orbits: &OrbitTable) -> Result<i64> {
    if topology.positive.is_empty() && topology.negative.is_empty() {
        return Err(Error::Validation("curve has no punctures".into()));
    }
    let cz_sum = |ids: &[String]| -> Result<i64> {
        ids.iter()
            .map(|id| orbits.get(id).map(cz_index).ok_or_else(|| Error::Lookup(id.clone())))
            .sum()
    };
    Ok(-topology.euler_characteristic() + cz_sum(&topology.positive)? - cz_sum(&topology.negative)? + 2 * topology.c1)
}

/// Index of a k-fold cover with total interior branching b.
pub fn cover_index(base_index: i64, degree: u32, branching: u32) -> i64 {
    degree as i64 * base_index + branching as i64
}

/// Same as [`cover_index`], after checking Riemann-Hurwitz for the punctured
/// surfaces: chi(cover) = k chi(base) - b.
pub fn cover_index_checked(
    base_index: i64,
    degree: u32,
    branching: u32,
    base: &CurveTopology,
    cover: &CurveTopology,
) -> Result<i64> {
    if degree == 0 {
        return Err(Error::Validation("cover degree must be positive".into()));
    }
    let expected = degree as i64 * base.euler_characteristic() - branching as i64;
    if cover.euler_characteristic() != expected {
        return Err(Error::Validation(format!(
            "Riemann-Hurwitz fails: cover has chi = {}, expected {} chi(base) - {} = {}",
            cover.euler_characteristic(),
            degree,
            branching,
            expected
        )));
    }
    Ok(cover_index(base_index, degree, branching))
}

/// True iff ind > 2g - 2 + #Gamma_0.
pub fn automatic_transversality(ind: i64, genus: u32, gamma0_count: u32) -> bool {
    ind > 2 * genus as i64 - 2 + gamma0_count as i64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindingViolation {
    pub index: i64,
    pub winding: i64,
    pub cz: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindingReport {
    pub cz: i64,
    pub checked: usize,
    pub violations: Vec<WindingViolation>,
}

impl WindingReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks 2 wind(f_i) <= cz below the gap and 2 wind(f_i) >= cz above it.
/// Equality can only occur for even cz since 2 wind is even.
pub fn winding_bounds_check(spectrum: &SpectrumTable, cz: i64) -> WindingReport {
    let violations = spectrum
        .entries
        .iter()
        .filter(|e| if e.index < 0 { 2 * e.winding > cz } else { 2 * e.winding < cz })
        .map(|e| WindingViolation { index: e.index, winding: e.winding, cz })
        .collect();
    WindingReport { cz, checked: spectrum.entries.len(), violations }
}
