//! Dataset files: a CSV of records plus a JSON metadata sidecar.
//!
//! The CSV header is `temperature_K,volume_L,moles_mol,pressure_atm`. Values
//! are written in plain decimal with 17 significant digits, enough to read
//! every `f64` back exactly. The sidecar sits next to the CSV with the
//! extension replaced by `.meta.json` and records the gas, sampler
//! parameters, seed and size.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{Dataset, GasRecord, GasSpec, SamplerParams, R};
use crate::error::{Error, Result};

pub const DATASET_COLUMNS: [&str; 4] = ["temperature_K", "volume_L", "moles_mol", "pressure_atm"];

/// `x` in positional notation with 17 significant digits.
pub fn fmt_decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.1}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (16 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub gas: GasSpec,
    pub params: SamplerParams,
    pub seed: u64,
    pub size: usize,
    pub gas_constant: f64,
    pub columns: Vec<String>,
}

impl DatasetMetadata {
    pub fn of(dataset: &Dataset) -> Self {
        DatasetMetadata {
            gas: dataset.gas.clone(),
            params: dataset.params,
            seed: dataset.seed,
            size: dataset.len(),
            gas_constant: R,
            columns: DATASET_COLUMNS.iter().map(|c| c.to_string()).collect(),
        }
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub(crate) fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

pub fn write_records<W: std::io::Write>(out: W, records: &[GasRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DATASET_COLUMNS)?;
    for r in records {
        w.write_record([
            fmt_decimal(r.temperature),
            fmt_decimal(r.volume),
            fmt_decimal(r.moles),
            fmt_decimal(r.pressure),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Writes the CSV and its metadata sidecar.
pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    write_records(create(path)?, &dataset.records)?;
    let meta = sidecar_path(path);
    let mut json = serde_json::to_string_pretty(&DatasetMetadata::of(dataset))?;
    json.push('\n');
    std::fs::write(&meta, json).map_err(|e| Error::io(&meta, e))
}

pub fn read_metadata(csv_path: &Path) -> Result<DatasetMetadata> {
    let meta = sidecar_path(csv_path);
    let text = std::fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// A numeric CSV: header plus columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn { name: name.to_string(), available: self.header.clone() })
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

/// Reads a CSV whose columns are all numeric.
pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Format {
                path: path.to_path_buf(),
                reason: format!("row {}, column {:?}: {field:?} is not a number", row + 1, header[col]),
            })?;
            columns[col].push(v);
        }
    }
    Ok(Table { header, columns })
}

/// Reads gas records from any CSV carrying the four dataset columns.
pub fn read_records(path: &Path) -> Result<Vec<GasRecord>> {
    let t = read_table(path)?;
    let [tc, vc, nc, pc] = DATASET_COLUMNS.map(|c| t.column(c));
    let (tc, vc, nc, pc) = (tc?, vc?, nc?, pc?);
    Ok((0..t.n_rows())
        .map(|i| GasRecord { temperature: tc[i], volume: vc[i], moles: nc[i], pressure: pc[i] })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{builtin_gas_table, exp1_params, generate};
    use proptest::prelude::*;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/xe.csv");
        let xe = builtin_gas_table().lookup("Xenon").unwrap().clone();
        let d = generate(&xe, &exp1_params(), 100, 7).unwrap();
        write_dataset(&path, &d).unwrap();
        assert_eq!(read_records(&path).unwrap(), d.records);
        let meta = read_metadata(&path).unwrap();
        assert_eq!(meta, DatasetMetadata::of(&d));
        assert!(dir.path().join("sub/xe.meta.json").exists());

        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "temperature_K,volume_L,moles_mol,pressure_atm");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 4);
        for f in first {
            let digits = f.chars().filter(char::is_ascii_digit).count();
            assert!(digits >= 12 && !f.contains('e'), "{f}");
        }
    }

    #[test]
    fn missing_column_names_alternatives() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "a,b\n1,2\n3,4\n").unwrap();
        let t = read_table(&path).unwrap();
        assert_eq!(t.column("b").unwrap(), &[2.0, 4.0]);
        match t.column("c") {
            Err(Error::UnknownColumn { available, .. }) => assert_eq!(available, vec!["a", "b"]),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "a,b\n1,x\n").unwrap();
        assert!(matches!(read_table(&path), Err(Error::Format { .. })));
    }

    proptest! {
        #[test]
        fn decimal_format_round_trips(x in prop::num::f64::NORMAL) {
            let s = fmt_decimal(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
