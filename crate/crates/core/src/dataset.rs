//! Line-oriented orbit and curve records, with located diagnostics.
//!
//! ```text
//! orbit <id> simple=<id> mult=<int> type=<pos_hyp|neg_hyp> action=<rational> cz=<int> [stage=<int>]
//! curve level=<symp|cob|k_plus|k_minus> ind=<int> from=<id> to=<id> count=<rational> [map=<int>]
//! ```
//!
//! `cz` is the index of the underlying simple orbit. `stage` places an orbit in
//! one complex of a sequence (default 0). Symplectization curves stay inside a
//! stage; cobordism and homotopy curves go from stage s to stage s + 1. `map`
//! separates the two chain maps compared by a homotopy (default 0).

use crate::error::Error;
use crate::index::{OrbitType, ReebOrbit};
use crate::rational::{parse_rational, Q};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Symplectization,
    Cobordism,
    KPlus,
    KMinus,
}

impl Level {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "symp" => Some(Level::Symplectization),
            "cob" => Some(Level::Cobordism),
            "k_plus" => Some(Level::KPlus),
            "k_minus" => Some(Level::KMinus),
            _ => None,
        }
    }

    /// Fredholm index every curve of this level must have.
    pub fn required_index(self) -> i64 {
        match self {
            Level::Symplectization => 1,
            Level::Cobordism => 0,
            Level::KPlus | Level::KMinus => -1,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Level::Symplectization => "symp",
            Level::Cobordism => "cob",
            Level::KPlus => "k_plus",
            Level::KMinus => "k_minus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub source: String,
    pub line: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.source, self.line)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub at: Location,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.at, self.message)
    }
}

/// All problems found in a dataset, in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl From<Diagnostics> for Error {
    fn from(d: Diagnostics) -> Self {
        Error::Validation(d.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub orbit: ReebOrbit,
    pub stage: u32,
    pub at: Location,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRecord {
    pub level: Level,
    pub ind: i64,
    pub from: String,
    pub to: String,
    pub count: Q,
    pub map: u32,
    pub at: Location,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedRecords {
    pub orbits: Vec<OrbitRecord>,
    pub curves: Vec<CurveRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModuliDataset {
    pub orbits: Vec<OrbitRecord>,
    pub curves: Vec<CurveRecord>,
}

impl ModuliDataset {
    pub fn orbit(&self, id: &str) -> Option<&OrbitRecord> {
        self.orbits.iter().find(|o| o.orbit.id == id)
    }

    pub fn stage_count(&self) -> usize {
        self.orbits.iter().map(|o| o.stage as usize + 1).max().unwrap_or(0)
    }
}

fn fields(tokens: &[&str]) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for t in tokens {
        let (k, v) = t.split_once('=').ok_or_else(|| format!("expected key=value, got '{t}'"))?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(format!("field '{k}' given twice"));
        }
    }
    Ok(map)
}

fn take<'a>(f: &'a BTreeMap<String, String>, key: &str) -> std::result::Result<&'a str, String> {
    f.get(key).map(String::as_str).ok_or_else(|| format!("missing field '{key}'"))
}

fn int<T: std::str::FromStr>(f: &BTreeMap<String, String>, key: &str) -> std::result::Result<T, String> {
    let s = take(f, key)?;
    s.parse().map_err(|_| format!("field '{key}': '{s}' is not a valid integer"))
}

fn check_known(f: &BTreeMap<String, String>, known: &[&str]) -> std::result::Result<(), String> {
    match f.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(format!("unknown field '{k}'")),
        None => Ok(()),
    }
}

fn parse_orbit(tokens: &[&str]) -> std::result::Result<(ReebOrbit, u32), String> {
    let (id, rest) = tokens.split_first().ok_or("orbit record needs an id")?;
    if id.contains('=') {
        return Err(format!("orbit id expected before fields, got '{id}'"));
    }
    let f = fields(rest)?;
    check_known(&f, &["simple", "mult", "type", "action", "cz", "stage"])?;
    let action = parse_rational(take(&f, "action")?).map_err(|e| format!("field 'action': {e}"))?;
    let stage = if f.contains_key("stage") { int(&f, "stage")? } else { 0 };
    let orbit = ReebOrbit {
        id: id.to_string(),
        simple_id: take(&f, "simple")?.to_string(),
        multiplicity: int(&f, "mult")?,
        simple_type: OrbitType::parse(take(&f, "type")?).map_err(|e| e.to_string())?,
        action,
        cz_simple: int(&f, "cz")?,
    };
    Ok((orbit, stage))
}

fn parse_curve(tokens: &[&str]) -> std::result::Result<(Level, i64, String, String, Q, u32), String> {
    let f = fields(tokens)?;
    check_known(&f, &["level", "ind", "from", "to", "count", "map"])?;
    let lv = take(&f, "level")?;
    let level = Level::parse(lv).ok_or_else(|| format!("unknown level '{lv}'"))?;
    let count = parse_rational(take(&f, "count")?).map_err(|e| format!("field 'count': {e}"))?;
    let map = if f.contains_key("map") { int(&f, "map")? } else { 0 };
    Ok((level, int(&f, "ind")?, take(&f, "from")?.to_string(), take(&f, "to")?.to_string(), count, map))
}

/// Parses every record in `text`. Blank lines and lines starting with `#` are
/// skipped. Syntax errors are collected, not fatal.
pub fn parse_records(text: &str, source: &str) -> (ParsedRecords, Vec<Diagnostic>) {
    let mut out = ParsedRecords::default();
    let mut diags = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = Location { source: source.to_string(), line: n + 1 };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let result = match tokens[0] {
            "orbit" => parse_orbit(&tokens[1..]).map(|(orbit, stage)| out.orbits.push(OrbitRecord { orbit, stage, at: at.clone() })),
            "curve" => parse_curve(&tokens[1..]).map(|(level, ind, from, to, count, map)| {
                out.curves.push(CurveRecord { level, ind, from, to, count, map, at: at.clone() })
            }),
            other => Err(format!("unknown record type '{other}'")),
        };
        if let Err(message) = result {
            diags.push(Diagnostic { at, message });
        }
    }
    (out, diags)
}

/// Semantic validation. Every violation is reported with its record location.
pub fn load_dataset(orbits: Vec<OrbitRecord>, curves: Vec<CurveRecord>) -> Result<ModuliDataset, Diagnostics> {
    let mut diags = Vec::new();
    let mut by_id: BTreeMap<&str, &OrbitRecord> = BTreeMap::new();
    let mut by_simple: BTreeMap<&str, &OrbitRecord> = BTreeMap::new();
    for rec in &orbits {
        let o = &rec.orbit;
        let mut push = |message: String| diags.push(Diagnostic { at: rec.at.clone(), message });
        if let Err(e) = o.validate() {
            push(e.to_string());
            continue;
        }
        if o.is_bad() {
            push(format!(
                "orbit {} is bad (even cover of a negative hyperbolic orbit) and cannot be a generator",
                o.id
            ));
        }
        if let Some(prev) = by_id.insert(&o.id, rec) {
            push(format!("duplicate orbit id '{}' (first defined at line {})", o.id, prev.at.line));
        }
        match by_simple.get(o.simple_id.as_str()) {
            None => {
                by_simple.insert(&o.simple_id, rec);
            }
            Some(first) => {
                let f = &first.orbit;
                if f.simple_type != o.simple_type || f.cz_simple != o.cz_simple {
                    push(format!(
                        "orbit {} disagrees with orbit {} (line {}) on type or cz of simple orbit {}",
                        o.id, f.id, first.at.line, o.simple_id
                    ));
                } else if &f.action / Q::from_integer(f.multiplicity.into())
                    != &o.action / Q::from_integer(o.multiplicity.into())
                {
                    push(format!(
                        "orbit {}: action is not multiplicity times the simple action implied by orbit {} (line {})",
                        o.id, f.id, first.at.line
                    ));
                }
            }
        }
    }
    for c in &curves {
        let mut push = |message: String| diags.push(Diagnostic { at: c.at.clone(), message });
        let (Some(from), Some(to)) = (by_id.get(c.from.as_str()), by_id.get(c.to.as_str())) else {
            for id in [&c.from, &c.to] {
                if !by_id.contains_key(id.as_str()) {
                    push(format!("unknown orbit id '{id}'"));
                }
            }
            continue;
        };
        let need = c.level.required_index();
        if c.ind != need {
            push(format!("{} curve must have ind={need}, got ind={}", c.level.token(), c.ind));
        }
        let drop = from.orbit.cz() - to.orbit.cz();
        if c.ind != drop {
            push(format!(
                "ind={} does not equal cz({})-cz({}) = {}",
                c.ind, c.from, c.to, drop
            ));
        }
        let (a_from, a_to) = (&from.orbit.action, &to.orbit.action);
        match c.level {
            Level::Symplectization if a_from <= a_to => push(format!(
                "action violation: symp curve must strictly decrease action, {} -> {}",
                a_from, a_to
            )),
            Level::Cobordism | Level::KPlus | Level::KMinus if a_from < a_to => push(format!(
                "action violation: {} curve must not increase action, {} -> {}",
                c.level.token(),
                a_from,
                a_to
            )),
            _ => {}
        }
        let step = if c.level == Level::Symplectization { 0 } else { 1 };
        if to.stage != from.stage + step {
            push(format!(
                "{} curve must go from stage s to stage s+{step}, got {} -> {}",
                c.level.token(),
                from.stage,
                to.stage
            ));
        }
        if c.map != 0 && c.level != Level::Cobordism {
            push("only cob curves may carry map=".into());
        }
    }
    if diags.is_empty() {
        Ok(ModuliDataset { orbits, curves })
    } else {
        Err(Diagnostics(diags))
    }
}

/// Parses and validates an orbit file and a curve file.
pub fn load_dataset_text(orbits: (&str, &str), curves: (&str, &str)) -> Result<ModuliDataset, Diagnostics> {
    let (o, mut diags) = parse_records(orbits.0, orbits.1);
    let (c, d2) = parse_records(curves.0, curves.1);
    diags.extend(d2);
    let mut all_orbits = o.orbits;
    all_orbits.extend(c.orbits);
    let mut all_curves = o.curves;
    all_curves.extend(c.curves);
    if !diags.is_empty() {
        return Err(Diagnostics(diags));
    }
    load_dataset(all_orbits, all_curves)
}
