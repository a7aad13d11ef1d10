//! Example inputs shipped with the crate. The same files live in `ex/` at the
//! workspace root for use with the command-line tool.

pub const ORBITS: &str = include_str!("../../../ex/orbits.txt");
pub const CURVES: &str = include_str!("../../../ex/curves.txt");
/// Copy of [`CURVES`] with one sign flipped so that d^2(a) hits c.
pub const CURVES_CORRUPTED: &str = include_str!("../../../ex/bad.txt");
/// Copy of [`CURVES`] with odd counts into a double cover.
pub const CURVES_NONDIVISIBLE: &str = include_str!("../../../ex/nondivisible.txt");
pub const LIMIT_ORBITS: &str = include_str!("../../../ex/limit_orbits.txt");
pub const LIMIT_CURVES: &str = include_str!("../../../ex/limit_curves.txt");
pub const EV2: &str = include_str!("../../../ex/ev2.txt");
pub const EV3: &str = include_str!("../../../ex/ev3.txt");
pub const NECK: &str = include_str!("../../../ex/neck.txt");
