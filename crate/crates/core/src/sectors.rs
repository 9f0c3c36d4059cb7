//! Bundled display names for known sector codes.
//!
//! Covers the 28 SWS level-1 sector indices of the Chinese market (six-digit
//! codes) and 16 Thomson Reuters sector indices of the US market (mnemonics).
//! Used only to label output; unknown labels pass through unchanged.

use std::sync::OnceLock;

const SECTORS_CSV: &str = include_str!("../data/sectors.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    pub market: String,
    pub code: String,
    pub name: String,
}

pub fn all() -> &'static [Sector] {
    static TABLE: OnceLock<Vec<Sector>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut reader = csv::Reader::from_reader(SECTORS_CSV.as_bytes());
        reader
            .records()
            .map(|r| {
                let r = r.expect("bundled sector table is well-formed");
                Sector {
                    market: r[0].to_string(),
                    code: r[1].to_string(),
                    name: r[2].to_string(),
                }
            })
            .collect()
    })
}

pub fn lookup(code: &str) -> Option<&'static Sector> {
    all().iter().find(|s| s.code == code)
}

pub fn display_name(label: &str) -> Option<&'static str> {
    lookup(label).map(|s| s.name.as_str())
}

/// Chinese six-digit codes shortened to their last three digits, as on heat
/// map axes; any other label is returned as is.
pub fn short_label(label: &str) -> &str {
    match lookup(label) {
        Some(s) if s.market == "CN" && label.len() == 6 => &label[3..],
        _ => label,
    }
}
