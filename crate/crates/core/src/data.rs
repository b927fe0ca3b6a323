//! Bundled datasets and plain-text sample ingestion.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BundledDataset {
    /// Lead concentration (mg/kg) in off-site soil borings.
    SoilLeadOffsite,
    /// Lead concentration (mg/kg) in on-site soil borings.
    SoilLeadOnsite,
    /// Machine first breakdown times (hours).
    MachineBreakdowns,
}

const SOIL_LEAD_OFFSITE: [f64; 15] = [
    26.0, 63.0, 3.0, 70.0, 16.0, 5.0, 1.0, 57.0, 5.0, 3.0, 24.0, 2.0, 1.0, 48.0, 3.0,
];
const SOIL_LEAD_ONSITE: [f64; 5] = [50.0, 82.0, 95.0, 103.0, 88.0];
const MACHINE_BREAKDOWNS: [f64; 20] = [
    18.0, 23.0, 29.0, 409.0, 24.0, 74.0, 13.0, 62.0, 46.0, 4.0, 57.0, 19.0, 47.0, 13.0, 19.0, 208.0, 119.0, 209.0,
    10.0, 188.0,
];

impl BundledDataset {
    pub const ALL: [BundledDataset; 3] = [
        BundledDataset::SoilLeadOffsite,
        BundledDataset::SoilLeadOnsite,
        BundledDataset::MachineBreakdowns,
    ];

    pub fn values(self) -> &'static [f64] {
        match self {
            BundledDataset::SoilLeadOffsite => &SOIL_LEAD_OFFSITE,
            BundledDataset::SoilLeadOnsite => &SOIL_LEAD_ONSITE,
            BundledDataset::MachineBreakdowns => &MACHINE_BREAKDOWNS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BundledDataset::SoilLeadOffsite => "soil_lead_offsite",
            BundledDataset::SoilLeadOnsite => "soil_lead_onsite",
            BundledDataset::MachineBreakdowns => "machine_breakdowns",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            BundledDataset::SoilLeadOffsite => "lead (mg/kg), off-site soil borings",
            BundledDataset::SoilLeadOnsite => "lead (mg/kg), on-site soil borings",
            BundledDataset::MachineBreakdowns => "machine first breakdown times (hours)",
        }
    }
}

impl fmt::Display for BundledDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BundledDataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        BundledDataset::ALL
            .into_iter()
            .find(|d| d.name() == key)
            .ok_or_else(|| Error::Data(format!("no bundled dataset named '{s}'")))
    }
}

/// Parses one value per line, or a single-column CSV whose first line may be
/// a header. Blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_start_matches('\u{feff}');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let first_content = !seen_content;
        seen_content = true;
        let cells: Vec<&str> = line.split(',').map(|c| c.trim()).collect();
        if cells.len() > 1 && !(cells.len() == 2 && cells[1].is_empty()) {
            return Err(Error::Data(format!("line {}: expected a single column, found {}", i + 1, cells.len())));
        }
        let cell = cells[0].trim_matches('"');
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(Error::Data(format!("line {}: non-finite value '{cell}'", i + 1))),
            Err(_) if first_content => {}
            Err(_) => return Err(Error::Data(format!("line {}: cannot parse '{cell}' as a number", i + 1))),
        }
    }
    if out.is_empty() {
        return Err(Error::Data("input contains no values".into()));
    }
    Ok(out)
}

pub fn ingest(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}
