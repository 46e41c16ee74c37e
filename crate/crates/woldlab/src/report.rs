//! JSON documents for operators, measures and reports, plus the text
//! rendering. Complex entries serialize as `[re, im]` arrays and
//! residuals as decimal strings with 17 significant digits so reports
//! are diff-stable across platforms.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WoldlabError};
use crate::measure::OpValuedMeasure;
use crate::tol::TolerancePolicy;
use crate::C64;

pub const SCHEMA: &str = "woldlab/1";

/// `[re, im]` pairs, row-major.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &DMatrix<C64>) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<DMatrix<C64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(WoldlabError::InvalidInput("matrix entries must be rectangular and nonempty".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// 17 significant digits; fixed format shared by every residual field.
pub fn residual_string(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeasureDocument {
    pub coeff_dim: usize,
    pub window: usize,
    /// `mu_hat(k)` for `k = 0..=window`
    pub fourier: Vec<MatrixJson>,
}

impl MeasureDocument {
    pub fn from_measure(mu: &OpValuedMeasure) -> Self {
        Self {
            coeff_dim: mu.coeff_dim(),
            window: mu.window(),
            fourier: (0..=mu.window() as i64).map(|k| matrix_to_json(&mu.fourier(k))).collect(),
        }
    }

    pub fn to_measure(&self, tol: &TolerancePolicy) -> Result<OpValuedMeasure> {
        let fourier = self.fourier.iter().map(|m| matrix_from_json(m)).collect::<Result<Vec<_>>>()?;
        OpValuedMeasure::from_coefficients(self.coeff_dim, fourier, tol)
    }
}

/// Input document: a dense operator with optional Gram, a graded model
/// spec, or a registered gallery example.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorDocument {
    Dense {
        schema: String,
        matrix: MatrixJson,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        gram: Option<MatrixJson>,
    },
    Graded {
        schema: String,
        cap: usize,
        mu1: MeasureDocument,
        mu2: MeasureDocument,
    },
    Gallery {
        schema: String,
        name: String,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        cap: Option<usize>,
    },
}

impl OperatorDocument {
    pub fn schema(&self) -> &str {
        match self {
            OperatorDocument::Dense { schema, .. }
            | OperatorDocument::Graded { schema, .. }
            | OperatorDocument::Gallery { schema, .. } => schema,
        }
    }

    pub fn validate_schema(&self) -> Result<()> {
        if self.schema() != SCHEMA {
            return Err(WoldlabError::InvalidInput(format!(
                "unsupported schema {:?} (expected {SCHEMA:?}) at field 'schema'",
                self.schema()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ToleranceEcho {
    pub rank_tol: String,
    pub residual_tol: String,
    pub max_iter: usize,
}

impl ToleranceEcho {
    pub fn from_policy(tol: &TolerancePolicy) -> Self {
        Self {
            rank_tol: residual_string(tol.rank_tol),
            residual_tol: residual_string(tol.residual_tol),
            max_iter: tol.max_iter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PieceDocument {
    pub dim: usize,
    pub unitary_residuals: Vec<String>,
    pub reducing_residuals: Vec<String>,
}

/// The one report shape every command emits; empty maps are omitted.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportDocument {
    pub schema: String,
    pub command: String,
    pub tolerance: ToleranceEcho,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub dims: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub residuals: BTreeMap<String, String>,
    /// joint pieces keyed by alpha bitstring (`0` = unitary direction)
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pieces: Option<BTreeMap<String, PieceDocument>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub measures: BTreeMap<String, MeasureDocument>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truncation_limited: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub pass: bool,
}

impl ReportDocument {
    pub fn new(command: &str, tol: &TolerancePolicy) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            tolerance: ToleranceEcho::from_policy(tol),
            dims: BTreeMap::new(),
            residuals: BTreeMap::new(),
            pieces: None,
            measures: BTreeMap::new(),
            truncation_limited: None,
            error: None,
            pass: false,
        }
    }

    pub fn dim(&mut self, key: &str, value: usize) -> &mut Self {
        self.dims.insert(key.to_string(), value);
        self
    }

    pub fn residual(&mut self, key: &str, value: f64) -> &mut Self {
        self.residuals.insert(key.to_string(), residual_string(value));
        self
    }

    pub fn measure(&mut self, key: &str, mu: &OpValuedMeasure) -> &mut Self {
        self.measures.insert(key.to_string(), MeasureDocument::from_measure(mu));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        out.push_str(&format!(
            "tolerance: rank {} residual {} max_iter {}\n",
            self.tolerance.rank_tol, self.tolerance.residual_tol, self.tolerance.max_iter
        ));
        for (k, v) in &self.dims {
            out.push_str(&format!("dim {k}: {v}\n"));
        }
        for (k, v) in &self.residuals {
            out.push_str(&format!("residual {k}: {v}\n"));
        }
        if let Some(pieces) = &self.pieces {
            for (alpha, p) in pieces {
                out.push_str(&format!("piece {alpha}: dim {}\n", p.dim));
            }
        }
        for (k, m) in &self.measures {
            out.push_str(&format!("measure {k}: coeff_dim {} window {}\n", m.coeff_dim, m.window));
        }
        if let Some(t) = self.truncation_limited {
            out.push_str(&format!("truncation_limited: {t}\n"));
        }
        if let Some(e) = &self.error {
            out.push_str(&format!("error: {e}\n"));
        }
        out.push_str(&format!("pass: {}\n", self.pass));
        out
    }
}
