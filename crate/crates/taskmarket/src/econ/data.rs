//! Firm-year panel storage and CSV round-trips.

use std::io::{Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::error::EconError;
use crate::numfmt::fmt_sig;

/// Names of the identifier columns, in file order.
pub const KEY_COLUMNS: [&str; 5] = ["firm", "year", "city", "industry", "province"];

/// A firm-year panel: five integer identifier columns plus named numeric
/// columns. `(firm, year)` pairs are unique; missing numeric values are
/// stored as NaN and serialized as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDataset {
    pub firm: Vec<i64>,
    pub year: Vec<i64>,
    pub city: Vec<i64>,
    pub industry: Vec<i64>,
    pub province: Vec<i64>,
    columns: IndexMap<String, Vec<f64>>,
}

impl PanelDataset {
    pub fn new(
        firm: Vec<i64>,
        year: Vec<i64>,
        city: Vec<i64>,
        industry: Vec<i64>,
        province: Vec<i64>,
    ) -> Result<Self, EconError> {
        let n = firm.len();
        for (name, len) in [
            ("year", year.len()),
            ("city", city.len()),
            ("industry", industry.len()),
            ("province", province.len()),
        ] {
            if len != n {
                return Err(EconError::ColumnLengthMismatch {
                    name: name.to_string(),
                    len,
                    expected: n,
                });
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for (&f, &y) in firm.iter().zip(&year) {
            if !seen.insert((f, y)) {
                return Err(EconError::DuplicateFirmYear { firm: f, year: y });
            }
        }
        Ok(Self {
            firm,
            year,
            city,
            industry,
            province,
            columns: IndexMap::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.firm.len()
    }

    pub fn add_column(&mut self, name: &str, values: Vec<f64>) -> Result<(), EconError> {
        if values.len() != self.n_rows() {
            return Err(EconError::ColumnLengthMismatch {
                name: name.to_string(),
                len: values.len(),
                expected: self.n_rows(),
            });
        }
        self.columns.insert(name.to_string(), values);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<&[f64], EconError> {
        self.columns
            .get(name)
            .map(|v| v.as_slice())
            .ok_or_else(|| EconError::UnknownColumn(name.to_string()))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    /// Registered numeric column names, in registration order.
    pub fn column_names(&self) -> Vec<&str> {
        self.columns.keys().map(|s| s.as_str()).collect()
    }

    /// A categorical factor by name: one of the identifier columns, or a
    /// numeric column with integral values.
    pub fn factor(&self, name: &str) -> Result<Vec<i64>, EconError> {
        match name {
            "firm" => Ok(self.firm.clone()),
            "year" => Ok(self.year.clone()),
            "city" => Ok(self.city.clone()),
            "industry" => Ok(self.industry.clone()),
            "province" => Ok(self.province.clone()),
            other => {
                let values = self.column(other)?;
                Ok(values.iter().map(|v| v.round() as i64).collect())
            }
        }
    }

    /// Writes the panel as CSV: identifier columns, then numeric columns in
    /// registration order. Floats carry 12 significant digits; NaN cells
    /// are empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), EconError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = KEY_COLUMNS.to_vec();
        header.extend(self.column_names());
        w.write_record(&header).map_err(|e| EconError::Csv(e.to_string()))?;
        for i in 0..self.n_rows() {
            let mut record = vec![
                self.firm[i].to_string(),
                self.year[i].to_string(),
                self.city[i].to_string(),
                self.industry[i].to_string(),
                self.province[i].to_string(),
            ];
            for values in self.columns.values() {
                let v = values[i];
                record.push(if v.is_nan() { String::new() } else { fmt_sig(v) });
            }
            w.write_record(&record).map_err(|e| EconError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| EconError::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, EconError> {
        let mut out = Vec::new();
        self.write_csv(&mut out)?;
        String::from_utf8(out).map_err(|e| EconError::Csv(e.to_string()))
    }

    /// Reads a panel from CSV with a declared header. The five identifier
    /// columns must be present; all other columns load as numeric, with
    /// empty cells as NaN.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, EconError> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r
            .headers()
            .map_err(|e| EconError::Csv(e.to_string()))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        for key in KEY_COLUMNS {
            if !header.iter().any(|h| h == key) {
                return Err(EconError::UnknownColumn(key.to_string()));
            }
        }
        let index_of = |name: &str| header.iter().position(|h| h == name).unwrap();
        let key_idx: Vec<usize> = KEY_COLUMNS.iter().map(|k| index_of(k)).collect();
        let numeric: Vec<(usize, String)> = header
            .iter()
            .enumerate()
            .filter(|(i, _)| !key_idx.contains(i))
            .map(|(i, name)| (i, name.clone()))
            .collect();

        let mut keys: [Vec<i64>; 5] = Default::default();
        let mut numeric_data: Vec<Vec<f64>> = vec![Vec::new(); numeric.len()];
        for record in r.records() {
            let record = record.map_err(|e| EconError::Csv(e.to_string()))?;
            for (slot, &idx) in key_idx.iter().enumerate() {
                let raw = record.get(idx).unwrap_or("");
                let value: i64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| EconError::Csv(format!("bad integer {raw:?} in {}", KEY_COLUMNS[slot])))?;
                keys[slot].push(value);
            }
            for (slot, (idx, name)) in numeric.iter().enumerate() {
                let raw = record.get(*idx).unwrap_or("").trim();
                let value = if raw.is_empty() {
                    f64::NAN
                } else {
                    raw.parse()
                        .map_err(|_| EconError::Csv(format!("bad number {raw:?} in {name}")))?
                };
                numeric_data[slot].push(value);
            }
        }

        let [firm, year, city, industry, province] = keys;
        let mut panel = Self::new(firm, year, city, industry, province)?;
        for ((_, name), values) in numeric.into_iter().zip(numeric_data) {
            panel.add_column(&name, values)?;
        }
        Ok(panel)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self, EconError> {
        let file = std::fs::File::open(path).map_err(|e| EconError::Csv(format!("{}: {e}", path.display())))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_panel() -> PanelDataset {
        let mut panel = PanelDataset::new(
            vec![1, 1, 2, 2],
            vec![2016, 2017, 2016, 2017],
            vec![10, 10, 20, 20],
            vec![5, 5, 6, 6],
            vec![3, 3, 4, 4],
        )
        .unwrap();
        panel
            .add_column("digital", vec![1.0, 2.0, f64::NAN, 4.0])
            .unwrap();
        panel
            .add_column("share_prof", vec![0.25, 0.5, 0.125, 0.5])
            .unwrap();
        panel
    }

    #[test]
    fn duplicate_firm_year_rejected() {
        let result = PanelDataset::new(
            vec![1, 1],
            vec![2016, 2016],
            vec![0, 0],
            vec![0, 0],
            vec![0, 0],
        );
        assert!(matches!(result, Err(EconError::DuplicateFirmYear { .. })));
    }

    #[test]
    fn csv_round_trip_preserves_panel() {
        let panel = small_panel();
        let text = panel.to_csv_string().unwrap();
        let back = PanelDataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.firm, panel.firm);
        assert_eq!(back.column_names(), panel.column_names());
        let orig = panel.column("digital").unwrap();
        let round = back.column("digital").unwrap();
        for (a, b) in orig.iter().zip(round) {
            assert!(a.is_nan() && b.is_nan() || a == b);
        }
    }

    #[test]
    fn missing_column_is_an_error() {
        let panel = small_panel();
        assert!(matches!(
            panel.column("roa"),
            Err(EconError::UnknownColumn(_))
        ));
    }

    #[test]
    fn factor_resolution() {
        let panel = small_panel();
        assert_eq!(panel.factor("year").unwrap(), vec![2016, 2017, 2016, 2017]);
        assert_eq!(panel.factor("city").unwrap(), vec![10, 10, 20, 20]);
        assert!(panel.factor("nope").is_err());
    }
}
