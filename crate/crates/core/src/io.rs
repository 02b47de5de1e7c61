//! File formats: numeric CSV tables and the JSON model document.
//!
//! CSV files hold one exemplar per row and are UTF-8 with an optional header
//! row. Numbers are parsed and printed with '.' as decimal separator and
//! printed in shortest round-trip form, so writing and re-reading is exact.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MccaError, Result};
use crate::matrix::Mat;
use crate::solver::{MccaModel, Method, Regularization};

pub const SCHEMA_VERSION: u32 = 1;

/// A parsed numeric table and its header, if one was present.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub values: Mat,
}

fn parse_number(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a numeric CSV table. The first row is taken as a header when any of
/// its fields is not a number.
pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| MccaError::InvalidData(format!("line {}: {e}", line + 1)))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(parse_number).collect();
        if line == 0 && parsed.iter().any(Option::is_none) {
            header = Some(rec.iter().map(str::to_owned).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(MccaError::InvalidData(format!(
                "line {}: expected {w} fields, found {}",
                line + 1,
                rec.len()
            )));
        }
        let row = parsed
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                v.ok_or_else(|| {
                    MccaError::InvalidData(format!(
                        "line {}, column {}: '{}' is not a finite number",
                        line + 1,
                        j + 1,
                        &rec[j]
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(MccaError::InvalidData("no data rows".into()));
    }
    Ok(Table {
        header,
        values: Mat::from_rows(&rows)?,
    })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    let f = File::open(path)
        .map_err(|e| MccaError::Io(format!("cannot open {}: {e}", path.display())))?;
    read_table(f)
}

/// Writes a table; every value uses Rust's shortest round-trip formatting.
pub fn write_table<W: Write>(writer: W, header: Option<&[String]>, values: &Mat) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let err = |e: csv::Error| MccaError::Io(e.to_string());
    if let Some(h) = header {
        w.write_record(h).map_err(err)?;
    }
    for i in 0..values.rows() {
        w.write_record(values.row(i).iter().map(|v| format!("{v:?}")))
            .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_file(path: &Path, header: Option<&[String]>, values: &Mat) -> Result<()> {
    let f = File::create(path)
        .map_err(|e| MccaError::Io(format!("cannot create {}: {e}", path.display())))?;
    write_table(BufWriter::new(f), header, values)
}

/// The serialized form of [`MccaModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub dims: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    pub method: Method,
    pub reg: Regularization,
    pub lambda: Vec<f64>,
    pub rho_analytic: Vec<f64>,
    pub rho_empirical: Vec<f64>,
    /// `V[l][i][n]`: set `l`, feature `i`, component `n`.
    #[serde(rename = "V")]
    pub v: Vec<Vec<Vec<f64>>>,
}

impl From<&MccaModel> for ModelFile {
    fn from(m: &MccaModel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dims: m.dims().to_vec(),
            means: m.means().to_vec(),
            method: m.method(),
            reg: m.regularization().clone(),
            lambda: m.lambda().to_vec(),
            rho_analytic: m.rho_analytic().to_vec(),
            rho_empirical: m.rho_empirical().to_vec(),
            v: m.projections().iter().map(Mat::to_rows).collect(),
        }
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<MccaModel> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(MccaError::ModelFormat(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let k = self.lambda.len();
        let projections = self
            .v
            .iter()
            .enumerate()
            .map(|(l, rows)| {
                if rows.is_empty() {
                    return Err(MccaError::ModelFormat(format!("V[{l}] is empty")));
                }
                let m = Mat::from_rows(rows)?;
                if m.cols() != k {
                    return Err(MccaError::ModelFormat(format!(
                        "V[{l}] has {} columns, lambda has {k} entries",
                        m.cols()
                    )));
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        MccaModel::from_parts(
            self.dims,
            self.means,
            self.method,
            self.reg,
            self.lambda,
            self.rho_analytic,
            self.rho_empirical,
            projections,
        )
    }
}

pub fn model_to_json(model: &MccaModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from(model)).expect("model serializes")
}

pub fn model_from_json(s: &str) -> Result<MccaModel> {
    let f: ModelFile =
        serde_json::from_str(s).map_err(|e| MccaError::ModelFormat(e.to_string()))?;
    f.into_model()
}

pub fn save_model(path: &Path, model: &MccaModel) -> Result<()> {
    let mut f = File::create(path)
        .map_err(|e| MccaError::Io(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(model_to_json(model).as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MccaModel> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| MccaError::Io(format!("cannot read {}: {e}", path.display())))?;
    model_from_json(&s)
}
