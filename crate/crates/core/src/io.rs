//! File formats: measure-space inputs, ψ/φ descriptors and CSV tables.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bphi::{PhiDescriptor, PhiFunction};
use crate::measure::{DiscreteMeasureSpace, MeasurableFunction};
use crate::psi::{PsiDescriptor, PsiFunction};
use crate::{Error, Result};

/// Weights summing to 1 within this tolerance mark a CSV input as a
/// probability space.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub probability: bool,
}

impl SpaceFile {
    pub fn into_parts(self) -> Result<(DiscreteMeasureSpace, MeasurableFunction)> {
        if self.weights.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: self.values.len(),
            });
        }
        let space = if self.probability {
            DiscreteMeasureSpace::probability(self.weights)?
        } else {
            DiscreteMeasureSpace::new(self.weights)?
        };
        Ok((space, MeasurableFunction::new(self.values)?))
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    weight: f64,
    value: f64,
}

/// `weight,value` rows after a header line.
pub fn read_space_csv(path: &Path) -> Result<(DiscreteMeasureSpace, MeasurableFunction)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut weights = Vec::new();
    let mut values = Vec::new();
    for row in reader.deserialize() {
        let row: CsvRow = row?;
        weights.push(row.weight);
        values.push(row.value);
    }
    let total: f64 = weights.iter().sum();
    SpaceFile {
        probability: (total - 1.0).abs() <= PROBABILITY_TOL,
        weights,
        values,
    }
    .into_parts()
}

pub fn read_space_json(path: &Path) -> Result<(DiscreteMeasureSpace, MeasurableFunction)> {
    let file: SpaceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_parts()
}

/// Dispatches on the extension: `.json` or CSV otherwise.
pub fn read_space(path: &Path) -> Result<(DiscreteMeasureSpace, MeasurableFunction)> {
    if has_extension(path, "json") {
        read_space_json(path)
    } else {
        read_space_csv(path)
    }
}

pub fn write_space_csv(path: &Path, s: &DiscreteMeasureSpace, f: &MeasurableFunction) -> Result<()> {
    s.check_bound(f)?;
    let rows: Vec<(f64, f64)> = s.weights().iter().copied().zip(f.values().iter().copied()).collect();
    write_table(path, ("weight", "value"), &rows)
}

/// Two-column CSV with a header row.
pub fn write_table(path: &Path, header: (&str, &str), rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([header.0, header.1])?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        let row: (f64, f64) = record?;
        rows.push(row);
    }
    Ok(rows)
}

/// `p,psi` table.
pub fn write_psi_table(path: &Path, table: &[(f64, f64)]) -> Result<()> {
    write_table(path, ("p", "psi"), table)
}

pub fn read_psi_table(path: &Path) -> Result<PsiFunction> {
    PsiFunction::tabulated(read_table(path)?)
}

/// Inline JSON (starting with `{`), a `.csv` table path, or a JSON file path.
pub fn parse_psi(arg: &str) -> Result<PsiFunction> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return serde_json::from_str::<PsiDescriptor>(trimmed)?.build();
    }
    let path = Path::new(arg);
    if has_extension(path, "csv") {
        read_psi_table(path)
    } else {
        serde_json::from_str::<PsiDescriptor>(&fs::read_to_string(path)?)?.build()
    }
}

/// Inline JSON or a JSON file path.
pub fn parse_phi(arg: &str) -> Result<PhiFunction> {
    parse_phi_descriptor(arg)?.build()
}

pub fn parse_phi_descriptor(arg: &str) -> Result<PhiDescriptor> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        fs::read_to_string(arg)?
    };
    Ok(serde_json::from_str(&text)?)
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::{tabulate, ExponentGrid};

    #[test]
    fn csv_round_trip_and_probability_flag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.csv");
        fs::write(&path, "weight,value\n0.5,0\n0.5,2\n").unwrap();
        let (s, f) = read_space(&path).unwrap();
        assert!(s.is_probability());
        assert_eq!(f.values(), &[0.0, 2.0]);

        fs::write(&path, "weight,value\n1,0\n2,2\n").unwrap();
        let (s, _) = read_space(&path).unwrap();
        assert!(!s.is_probability());

        fs::write(&path, "weight,value\n-1,0\n").unwrap();
        assert!(matches!(read_space(&path), Err(Error::InvalidWeight { .. })));
        fs::write(&path, "weight,value\n1,abc\n").unwrap();
        assert!(matches!(read_space(&path), Err(Error::Csv(_))));
    }

    #[test]
    fn json_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("space.json");
        fs::write(&path, r#"{"weights":[0.25,0.75],"values":[1,-1],"probability":true}"#).unwrap();
        let (s, f) = read_space(&path).unwrap();
        assert!(s.is_probability());
        assert_eq!(f.len(), 2);
        fs::write(&path, r#"{"weights":[0.25,0.5],"values":[1,-1],"probability":true}"#).unwrap();
        assert!(matches!(read_space(&path), Err(Error::NotProbability { .. })));
        fs::write(&path, r#"{"weights":[1],"values":[1,-1]}"#).unwrap();
        assert!(matches!(read_space(&path), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn psi_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.csv");
        let psi = PsiFunction::slowly_varying_log(2.0, 1.0).unwrap();
        let table = tabulate(&psi, &ExponentGrid::default());
        write_psi_table(&path, &table).unwrap();
        let back = parse_psi(path.to_str().unwrap()).unwrap();
        for &(p, v) in &table {
            assert!((back.eval(p) - v).abs() <= 1e-9 * v);
        }
    }

    #[test]
    fn descriptors() {
        let psi = parse_psi(r#"{"family":"extremal","params":{"r":3}}"#).unwrap();
        assert_eq!(psi.b(), 3.0);
        let phi = parse_phi(r#"{"family":"quadratic","params":{},"lambda0":"inf"}"#).unwrap();
        assert_eq!(phi.eval(2.0), 2.0);
        assert!(parse_psi(r#"{"family":"nope","params":{}}"#).is_err());
        assert!(parse_psi("/nonexistent/psi.json").is_err());
    }
}
