//! Result serialization: versioned JSON, eigenfunction CSV files and the
//! human-readable summary table. Floating-point output is rounded to 12
//! significant digits so identical runs produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fneig::diagnostics::{AbpReport, NormKind};
use fneig::ivp::Trajectory;
use fneig::operator::OperatorSpec;
use fneig::semi_eigen::{Method, Sign};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const CONVENTION: &str = "F(u'',u',u,t) = -lambda*u";

/// Round to 12 significant digits; the JSON layer then prints the shortest
/// representation of the rounded value.
pub fn sig12(x: f64) -> Value {
    if !x.is_finite() {
        return json!(format!("{x}"));
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap();
    json!(rounded)
}

pub fn sign_label(sign: Sign) -> i8 {
    match sign {
        Sign::Plus => 1,
        Sign::Minus => -1,
    }
}

pub fn method_label(method: Method) -> &'static str {
    match method {
        Method::Shoot => "shoot",
        Method::InverseIteration => "inverse_iteration",
    }
}

pub fn operator_json(spec: &OperatorSpec<f64>) -> Value {
    json!({
        "kind": spec.kind.label(),
        "lambda_min": sig12(spec.lambda_min),
        "lambda_max": sig12(spec.lambda_max),
        "gamma": sig12(spec.gamma),
        "delta": sig12(spec.delta),
        "dim": spec.dim,
    })
}

pub fn abp_json(report: &AbpReport<f64>) -> Value {
    json!({
        "sup_u_plus": sig12(report.sup_u_plus),
        "sup_u_minus": sig12(report.sup_u_minus),
        "bound_plus": sig12(report.bound_plus),
        "bound_minus": sig12(report.bound_minus),
        "b_constant": sig12(report.b_constant),
        "norm": match report.norm_kind {
            NormKind::L1Interval => "L1(interval)".to_string(),
            NormKind::LnBall { dim } => format!("L{dim}(ball)"),
        },
        "pass": report.pass,
        "vacuous": report.vacuous,
    })
}

pub struct OutputWriter {
    dir: PathBuf,
    json: bool,
    csv: bool,
}

impl OutputWriter {
    pub fn new(dir: &Path, format: &str) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let (json, csv) = match format {
            "json" => (true, false),
            "csv" => (false, true),
            _ => (true, true),
        };
        Ok(Self { dir: dir.to_path_buf(), json, csv })
    }

    pub fn write_results(&self, command: &str, mut body: Map<String, Value>) -> std::io::Result<()> {
        if !self.json {
            return Ok(());
        }
        let mut root = Map::new();
        root.insert("schema_version".into(), json!(SCHEMA_VERSION));
        root.insert("convention".into(), json!(CONVENTION));
        root.insert("command".into(), json!(command));
        root.append(&mut body);
        let path = self.dir.join("results.json");
        let mut file = fs::File::create(path)?;
        writeln!(file, "{}", serde_json::to_string_pretty(&Value::Object(root))?)?;
        Ok(())
    }

    pub fn write_trajectory(
        &self,
        name: &str,
        traj: &Trajectory<f64>,
        abscissa: &str,
    ) -> std::io::Result<Option<String>> {
        if !self.csv {
            return Ok(None);
        }
        let filename = format!("{name}.csv");
        let mut file = fs::File::create(self.dir.join(&filename))?;
        traj.write_csv(&mut file, abscissa)?;
        Ok(Some(filename))
    }

    pub fn write_summary(&self, text: &str) -> std::io::Result<()> {
        let mut file = fs::File::create(self.dir.join("summary.txt"))?;
        file.write_all(text.as_bytes())
    }
}

/// Eigenfunction CSV file name for one `(sign, n)` pair.
pub fn eig_name(sign: Sign, n: usize) -> String {
    format!("eig_{}{n}", if sign == Sign::Plus { "+" } else { "-" })
}
