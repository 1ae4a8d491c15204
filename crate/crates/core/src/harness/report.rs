//! Sweep results in machine-readable form.
//!
//! Reports are built to be byte-identical across runs with the same
//! configuration: rows are emitted in configuration order, floats go through
//! the shortest-roundtrip formatter, and nothing time- or host-dependent is
//! recorded. JSON is the roundtrip format; CSV is a flat view of the rows for
//! spreadsheets and plotting.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// One resolvent solve: where it was posed, at which parameter, and how the
/// measured solution norms compare against the data functional.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    /// "whole", "half" or "graph".
    pub domain: String,
    /// Lebesgue exponent used for every norm in this row.
    pub q: f64,
    /// |λ|.
    pub lambda_abs: f64,
    /// Angular position as a fraction of the sector half-opening π − θ.
    pub lambda_frac: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// |λ| ‖u‖_q over the zeroth-order data functional.
    pub ratio_u: f64,
    /// |λ|^{1/2} ‖∇u‖_q over the gradient-level data functional.
    pub ratio_grad: f64,
    pub norm_u: f64,
    pub norm_grad_u: f64,
    pub denom_u: f64,
    pub denom_grad: f64,
    /// Solver self-check: relative residual of the returned fields.
    pub residual_rel: f64,
}

/// Uniformity digest for one (domain, q) slice of the sweep: the largest
/// ratio across the parameter range against the ratio at the calibration
/// point |λ| = 1, frac = 0.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepSummary {
    pub domain: String,
    pub q: f64,
    pub baseline_ratio_u: f64,
    pub max_ratio_u: f64,
    pub uniformity_u: f64,
    pub baseline_ratio_grad: f64,
    pub max_ratio_grad: f64,
    pub uniformity_grad: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepReport {
    pub schema: u32,
    pub dim: usize,
    pub n: usize,
    pub n_vertical: usize,
    pub height: f64,
    pub theta: f64,
    pub seed: u64,
    pub lip: f64,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<SweepSummary>,
}

pub const SCHEMA: u32 = 1;

impl SweepReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: SweepReport = serde_json::from_str(text)?;
        if report.schema != SCHEMA {
            return Err(Error::Format(format!(
                "unsupported report schema {} (expected {SCHEMA})",
                report.schema
            )));
        }
        Ok(report)
    }

    /// Flat CSV of the rows; the header names match the JSON field names.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "domain,q,lambda_abs,lambda_frac,lambda_re,lambda_im,ratio_u,ratio_grad,norm_u,norm_grad_u,denom_u,denom_grad,residual_rel\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.domain,
                r.q,
                r.lambda_abs,
                r.lambda_frac,
                r.lambda_re,
                r.lambda_im,
                r.ratio_u,
                r.ratio_grad,
                r.norm_u,
                r.norm_grad_u,
                r.denom_u,
                r.denom_grad,
                r.residual_rel,
            );
        }
        out
    }

    /// Largest `uniformity_u` across the summaries, the headline number for
    /// the sweep.
    pub fn worst_uniformity(&self) -> f64 {
        self.summaries
            .iter()
            .fold(0.0f64, |m, s| m.max(s.uniformity_u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_report() -> SweepReport {
        SweepReport {
            schema: SCHEMA,
            dim: 2,
            n: 32,
            n_vertical: 33,
            height: 8.0,
            theta: std::f64::consts::FRAC_PI_4,
            seed: 7,
            lip: 0.0,
            rows: vec![SweepRow {
                domain: "whole".into(),
                q: 2.0,
                lambda_abs: 1.0,
                lambda_frac: 0.0,
                lambda_re: 1.0,
                lambda_im: 0.0,
                ratio_u: 0.62,
                ratio_grad: 0.48,
                norm_u: 0.62,
                norm_grad_u: 0.48,
                denom_u: 1.0,
                denom_grad: 1.0,
                residual_rel: 1.0e-13,
            }],
            summaries: vec![SweepSummary {
                domain: "whole".into(),
                q: 2.0,
                baseline_ratio_u: 0.62,
                max_ratio_u: 0.62,
                uniformity_u: 1.0,
                baseline_ratio_grad: 0.48,
                max_ratio_grad: 0.48,
                uniformity_grad: 1.0,
            }],
        }
    }

    #[test]
    fn json_roundtrips_exactly() {
        let report = tiny_report();
        let text = report.to_json().unwrap();
        let back = SweepReport::from_json(&text).unwrap();
        assert_eq!(report, back);
        assert_eq!(text, back.to_json().unwrap());
    }

    #[test]
    fn schema_mismatch_is_refused() {
        let mut report = tiny_report();
        report.schema = 99;
        let text = serde_json::to_string(&report).unwrap();
        assert!(SweepReport::from_json(&text).is_err());
    }

    #[test]
    fn csv_has_one_line_per_row_plus_header() {
        let report = tiny_report();
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 1 + report.rows.len());
        assert!(csv.starts_with("domain,q,lambda_abs"));
    }
}
