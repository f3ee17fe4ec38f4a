//! Report rows and their CSV/JSON encodings.
//!
//! The CSV header is fixed; fields are never reordered. Absent values (e.g.
//! simulated columns in an analytic-only report) are empty in CSV and null
//! in JSON. Floats print with six decimals so identical runs are
//! byte-identical.

use serde::Serialize;

use crate::CliError;

pub const CSV_HEADER: &str =
    "slicing_choice,slice_id,protocol,E_D,E_I,E_G,T_nu,ci_D,ci_I,ci_G,analytic_E_D,analytic_E_G,flags";

/// One report line: a (slicing choice, slice) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub slicing_choice: Option<usize>,
    pub slice_id: String,
    pub protocol: String,
    pub e_d: Option<f64>,
    pub e_i: Option<f64>,
    pub e_g: Option<f64>,
    pub t_nu: Option<f64>,
    pub ci_d: Option<f64>,
    pub ci_i: Option<f64>,
    pub ci_g: Option<f64>,
    pub analytic_e_d: Option<f64>,
    pub analytic_e_g: Option<f64>,
    pub flags: String,
}

impl ReportRow {
    pub fn empty(slice_id: impl Into<String>, protocol: impl Into<String>) -> Self {
        ReportRow {
            slicing_choice: None,
            slice_id: slice_id.into(),
            protocol: protocol.into(),
            e_d: None,
            e_i: None,
            e_g: None,
            t_nu: None,
            ci_d: None,
            ci_i: None,
            ci_g: None,
            analytic_e_d: None,
            analytic_e_g: None,
            flags: String::new(),
        }
    }

    fn csv_line(&self) -> String {
        let num = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        let choice = self
            .slicing_choice
            .map(|c| c.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            choice,
            self.slice_id,
            self.protocol,
            num(self.e_d),
            num(self.e_i),
            num(self.e_g),
            num(self.t_nu),
            num(self.ci_d),
            num(self.ci_i),
            num(self.ci_g),
            num(self.analytic_e_d),
            num(self.analytic_e_g),
            self.flags
        )
    }
}

pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[ReportRow]) -> Result<String, CliError> {
    serde_json::to_string_pretty(rows)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Runtime(format!("report serialization failed: {e}")))
}
