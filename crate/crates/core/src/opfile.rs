//! Operator definition files: structured key-value text (TOML) with fields
//! `kind`, `lambda_min`, `lambda_max`, `gamma`, `delta`, `dim` and inline
//! coefficient arrays.
//!
//! ```toml
//! kind = "pucci_plus"        # pucci_minus | linear | bellman_max | bellman_min
//! lambda_min = 1.0
//! lambda_max = 2.0
//! gamma = 0.0
//! delta = 0.0
//! dim = 1
//!
//! # linear kind only: samples on [lo, hi], linearly interpolated
//! [coeffs]
//! lo = 0.0
//! hi = 1.0
//! second = [1.0]             # a(t)
//! gradient = [0.0]           # b(t)
//! zero = [0.0]               # c(t)
//!
//! # bellman kinds only: one [[tables]] block per linear form
//! [[tables]]
//! lo = 0.0
//! hi = 1.0
//! second = [1.0]
//! gradient = [0.0]
//! zero = [0.0]
//! ```
//!
//! For pucci kinds the constants must be given explicitly; for linear and
//! bellman kinds missing constants are derived from the coefficient sample
//! ranges. Parsing does not enforce ellipticity, so a degenerate file can
//! be loaded and then flagged by the structure check.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::operator::{Coefficients, LinearCoeffs, OperatorKind, OperatorSpec};
use crate::real::Real;
use crate::sampled::SampledFn;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpFile {
    kind: String,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    gamma: Option<f64>,
    delta: Option<f64>,
    dim: Option<usize>,
    coeffs: Option<TableFile>,
    tables: Option<Vec<TableFile>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    lo: f64,
    hi: f64,
    second: Vec<f64>,
    gradient: Vec<f64>,
    zero: Vec<f64>,
}

impl TableFile {
    fn into_coeffs<T: Real>(self) -> Result<LinearCoeffs<T>> {
        let sample = |values: &[f64], name: &str| -> Result<SampledFn<T>> {
            if values.is_empty() {
                return Err(Error::OpFile(format!("coefficient `{name}` has no samples")));
            }
            if values.len() == 1 {
                return Ok(SampledFn::constant(T::c(values[0])));
            }
            if !(self.hi > self.lo) {
                return Err(Error::OpFile("coefficient table needs lo < hi".into()));
            }
            Ok(SampledFn::new(
                T::c(self.lo),
                T::c(self.hi),
                values.iter().map(|&v| T::c(v)).collect(),
            ))
        };
        Ok(LinearCoeffs {
            second: sample(&self.second, "second")?,
            gradient: sample(&self.gradient, "gradient")?,
            zero: sample(&self.zero, "zero")?,
        })
    }
}

/// Parses an operator definition from TOML text.
pub fn parse_operator<T: Real>(text: &str) -> Result<OperatorSpec<T>> {
    let file: OpFile = toml::from_str(text).map_err(|e| Error::OpFile(e.to_string()))?;
    let kind = match file.kind.as_str() {
        "pucci_plus" | "pucci+" => OperatorKind::PucciPlus,
        "pucci_minus" | "pucci-" => OperatorKind::PucciMinus,
        "linear" => OperatorKind::Linear,
        "bellman_max" => OperatorKind::BellmanMax,
        "bellman_min" => OperatorKind::BellmanMin,
        other => return Err(Error::OpFile(format!("unknown kind `{other}`"))),
    };
    let dim = file.dim.unwrap_or(1);

    let mut spec: OperatorSpec<T> = match kind {
        OperatorKind::PucciPlus | OperatorKind::PucciMinus => {
            let lam = file
                .lambda_min
                .ok_or_else(|| Error::OpFile("pucci kinds need lambda_min".into()))?;
            let lam_up = file
                .lambda_max
                .ok_or_else(|| Error::OpFile("pucci kinds need lambda_max".into()))?;
            let base = if kind == OperatorKind::PucciPlus {
                OperatorSpec::pucci_plus(T::c(lam), T::c(lam_up))
            } else {
                OperatorSpec::pucci_minus(T::c(lam), T::c(lam_up))
            };
            if file.coeffs.is_some() || file.tables.is_some() {
                return Err(Error::OpFile("pucci kinds take no coefficient tables".into()));
            }
            base.with_dim(dim)
        }
        OperatorKind::Linear => {
            let table =
                file.coeffs.ok_or_else(|| Error::OpFile("linear kind needs [coeffs]".into()))?;
            OperatorSpec::linear(table.into_coeffs()?, dim)
        }
        OperatorKind::BellmanMax | OperatorKind::BellmanMin => {
            let tables =
                file.tables.ok_or_else(|| Error::OpFile("bellman kinds need [[tables]]".into()))?;
            if tables.is_empty() {
                return Err(Error::OpFile("bellman kinds need at least one table".into()));
            }
            let coeffs: Result<Vec<_>> = tables.into_iter().map(|t| t.into_coeffs()).collect();
            if kind == OperatorKind::BellmanMax {
                OperatorSpec::bellman_max(coeffs?, dim)
            } else {
                OperatorSpec::bellman_min(coeffs?, dim)
            }
        }
    };

    // Explicit constants override the derived ones.
    if let Some(g) = file.gamma {
        spec.gamma = T::c(g);
    }
    if let Some(d) = file.delta {
        spec.delta = T::c(d);
    }
    if matches!(kind, OperatorKind::Linear | OperatorKind::BellmanMax | OperatorKind::BellmanMin) {
        if let Some(l) = file.lambda_min {
            spec.lambda_min = T::c(l);
        }
        if let Some(l) = file.lambda_max {
            spec.lambda_max = T::c(l);
        }
    }
    Ok(spec)
}

/// Serializes an operator back into the file schema (used by the CLI to
/// embed the operator in result files).
pub fn describe_operator<T: Real>(spec: &OperatorSpec<T>) -> String {
    let mut out = String::new();
    out.push_str(&format!("kind = \"{}\"\n", spec.kind.label()));
    out.push_str(&format!("lambda_min = {}\n", spec.lambda_min.to_f64_lossy()));
    out.push_str(&format!("lambda_max = {}\n", spec.lambda_max.to_f64_lossy()));
    out.push_str(&format!("gamma = {}\n", spec.gamma.to_f64_lossy()));
    out.push_str(&format!("delta = {}\n", spec.delta.to_f64_lossy()));
    out.push_str(&format!("dim = {}\n", spec.dim));
    let table = |c: &LinearCoeffs<T>, header: &str| {
        let fmt = |f: &SampledFn<T>| {
            let vals: Vec<String> =
                f.values().iter().map(|v| format!("{}", v.to_f64_lossy())).collect();
            format!("[{}]", vals.join(", "))
        };
        let (lo, hi) = c.second.domain();
        format!(
            "{header}\nlo = {}\nhi = {}\nsecond = {}\ngradient = {}\nzero = {}\n",
            lo.to_f64_lossy(),
            hi.to_f64_lossy(),
            fmt(&c.second),
            fmt(&c.gradient),
            fmt(&c.zero),
        )
    };
    match &spec.coeffs {
        Coefficients::None => {}
        Coefficients::Linear(c) => out.push_str(&table(c, "\n[coeffs]")),
        Coefficients::Bellman(ts) => {
            for t in ts {
                out.push_str(&table(t, "\n[[tables]]"));
            }
        }
    }
    out
}
