//! Reference catalog of mode-fuel combinations and their fuel groups.

use super::Mode;

/// `(fuel, group, modes)` with fuel and group ids in lowercase.
pub const CATALOG: &[(&str, &str, &[Mode])] = &[
    ("hfo", "established", &[Mode::Sea]),
    ("mgo", "established", &[Mode::Sea]),
    ("lng", "established", &[Mode::Sea]),
    ("cl", "established", &[Mode::Rail]),
    ("diesel", "established", &[Mode::Rail, Mode::Road]),
    ("battery", "battery", &[Mode::Rail, Mode::Road]),
    ("hybrid", "battery", &[Mode::Rail]),
    ("h2", "hydrogen", &[Mode::Rail, Mode::Road, Mode::Sea]),
    ("nh3", "hydrogen", &[Mode::Sea]),
    ("biodiesel", "biofuels", &[Mode::Rail, Mode::Road, Mode::Sea]),
    ("biogas", "biofuels", &[Mode::Road, Mode::Sea]),
];

/// Catalog group of `fuel` if it is listed, with whether `mode` may use it.
pub fn catalog_group(fuel: &str, mode: Mode) -> Option<(&'static str, bool)> {
    let key = fuel.to_ascii_lowercase().replace(['-', '_', ' '], "");
    CATALOG.iter().find(|(f, _, _)| *f == key).map(|(_, g, modes)| (*g, modes.contains(&mode)))
}
