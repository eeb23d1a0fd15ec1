//! Command-line front end: operator ingestion, orchestration of the
//! eigenvalue computations, and persistence of results as JSON, CSV and a
//! summary table.
//!
//! Exit codes: 0 on success, 1 on a configuration error, 2 on solver
//! failure, 3 on a structure-check failure.

mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fneig::bvp::{choose_kappa, solve_dirichlet, BvpProblem};
use fneig::diagnostics::{abp_check, Geometry};
use fneig::ivp::IvpConfig;
use fneig::nehari::{assemble, solve_nodes, EigenPair, LineSolver, SemiEigenSolve};
use fneig::operator::{check_structure, LinearCoeffs, OperatorSpec, StructureReport};
use fneig::opfile::{describe_operator, parse_operator};
use fneig::radial::{
    radial_dirichlet, radial_inverse_iteration, radial_semi_eigenvalue, RadialProblem,
    RadialSolver,
};
use fneig::sampled::SampledFn;
use fneig::semi_eigen::{inverse_iteration, semi_eigenvalue, SemiEigenResult, Sign};
use fneig::{Error, Trajectory64};
use output::{
    abp_json, eig_name, method_label, operator_json, sig12, sign_label, OutputWriter, CONVENTION,
};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "fneig",
    about = "Eigenvalue sequences for fully nonlinear radially symmetric elliptic operators",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OperatorArgs {
    /// Operator definition file (TOML schema, see the repository README).
    #[arg(long = "op-file", value_name = "PATH", conflicts_with = "op")]
    op_file: Option<PathBuf>,

    /// Catalog kind: pucci+ | pucci- | linear | bellman-max | bellman-min.
    #[arg(long = "op")]
    op: Option<String>,

    /// Ellipticity lower constant.
    #[arg(long = "lam", default_value_t = 1.0)]
    lam: f64,

    /// Ellipticity upper constant (defaults to --lam).
    #[arg(long = "Lam")]
    lam_up: Option<f64>,

    /// Gradient Lipschitz constant (pucci kinds).
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,

    /// Zero-order Lipschitz constant (pucci kinds).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,

    /// Spatial dimension.
    #[arg(long, default_value_t = 1)]
    dim: usize,

    /// Constant second-order coefficient (linear kind).
    #[arg(long = "a", default_value_t = 1.0)]
    coeff_a: f64,

    /// Constant gradient coefficient (linear kind).
    #[arg(long = "b", default_value_t = 0.0)]
    coeff_b: f64,

    /// Constant zero-order coefficient (linear kind).
    #[arg(long = "c", default_value_t = 0.0)]
    coeff_c: f64,
}

impl OperatorArgs {
    fn build(&self) -> Result<OperatorSpec<f64>, Failure> {
        if let Some(path) = &self.op_file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::config(format!("op-file: cannot read {}: {e}", path.display()))
            })?;
            return parse_operator(&text)
                .map_err(|e| Failure::config(format!("op-file: {e}")));
        }
        let kind = self.op.as_deref().unwrap_or("pucci+");
        let lam_up = self.lam_up.unwrap_or(self.lam);
        let spec = match kind {
            "pucci+" | "pucci_plus" => OperatorSpec::pucci_plus(self.lam, lam_up),
            "pucci-" | "pucci_minus" => OperatorSpec::pucci_minus(self.lam, lam_up),
            "linear" => OperatorSpec::linear(
                LinearCoeffs::constant(self.coeff_a, self.coeff_b, self.coeff_c),
                self.dim,
            ),
            "bellman-max" | "bellman_max" => OperatorSpec::bellman_max(
                vec![
                    LinearCoeffs::constant(self.lam, 0.0, 0.0),
                    LinearCoeffs::constant(lam_up, self.gamma, -self.delta),
                ],
                self.dim,
            ),
            "bellman-min" | "bellman_min" => OperatorSpec::bellman_min(
                vec![
                    LinearCoeffs::constant(self.lam, 0.0, 0.0),
                    LinearCoeffs::constant(lam_up, self.gamma, -self.delta),
                ],
                self.dim,
            ),
            other => {
                return Err(Failure::config(format!(
                    "op: unknown kind `{other}` (expected pucci+, pucci-, linear, bellman-max, bellman-min)"
                )))
            }
        };
        let spec = if matches!(kind, "pucci+" | "pucci_plus" | "pucci-" | "pucci_minus") {
            spec.with_gamma(self.gamma).with_delta(self.delta).with_dim(self.dim)
        } else {
            spec.with_dim(self.dim)
        };
        Ok(spec)
    }
}

#[derive(Args)]
struct GeometryArgs {
    /// Interval endpoints a b.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    interval: Option<Vec<f64>>,

    /// Ball radius.
    #[arg(long = "R", visible_alias = "radius")]
    radius: Option<f64>,
}

enum Domain {
    Interval(f64, f64),
    Ball(f64),
}

impl GeometryArgs {
    fn build(&self) -> Result<Domain, Failure> {
        match (&self.interval, self.radius) {
            (Some(ab), None) => {
                if ab.len() != 2 || !(ab[0] < ab[1]) {
                    return Err(Failure::config("interval: needs two values a < b".into()));
                }
                Ok(Domain::Interval(ab[0], ab[1]))
            }
            (None, Some(r)) if r > 0.0 => Ok(Domain::Ball(r)),
            (None, Some(_)) => Err(Failure::config("R: must be positive".into())),
            (Some(_), Some(_)) => {
                Err(Failure::config("geometry: give either --interval or --R, not both".into()))
            }
            (None, None) => Err(Failure::config("geometry: --interval A B or --R required".into())),
        }
    }
}

#[derive(Args)]
struct ToleranceArgs {
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Maximum integrator step as a fraction of the interval length.
    #[arg(long, default_value_t = 1e-3)]
    max_step: f64,
    #[arg(long, default_value_t = 1e-12)]
    event_tol: f64,
}

impl ToleranceArgs {
    fn build(&self) -> Result<IvpConfig<f64>, Failure> {
        let cfg = IvpConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            event_tol: self.event_tol,
        };
        cfg.validate().map_err(|e| Failure::config(format!("tolerances: {e}")))?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Output format: json | csv | both.
    #[arg(long, default_value = "both")]
    format: String,

    /// Worker threads for independent solves (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl OutputArgs {
    fn writer(&self) -> Result<OutputWriter, Failure> {
        if !matches!(self.format.as_str(), "json" | "csv" | "both") {
            return Err(Failure::config("format: expected json, csv or both".into()));
        }
        OutputWriter::new(&self.out, &self.format)
            .map_err(|e| Failure::config(format!("out: {e}")))
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Failure> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Failure::config(format!("jobs: {e}")))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Audit the structural hypotheses of an operator by sampling.
    CheckOperator {
        #[command(flatten)]
        op: OperatorArgs,
        /// Sample pairs per hypothesis.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        /// RNG seed for the sampling audit.
        #[arg(long, default_value_t = fneig::operator::DEFAULT_CHECK_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve the shifted Dirichlet problem F - kappa*u = f.
    Dirichlet {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Constant right-hand side.
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        f_const: f64,
        /// Zero-order shift (defaults to the margin rule delta + 1).
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// First semi-eigenvalues with one-signed eigenfunctions.
    SemiEig {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Eigenfunction sign: +1 | -1 | both.
        #[arg(long, default_value = "both")]
        sign: String,
        /// Method: shoot | inverse | both.
        #[arg(long, default_value = "shoot")]
        method: String,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Full eigenpair sequences on an interval.
    Spectrum {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long = "n-max", default_value_t = 2)]
        n_max: usize,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Full radial eigenpair sequences on a ball.
    RadialSpectrum {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long = "n-max", default_value_t = 2)]
        n_max: usize,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve a Dirichlet problem and audit it against the ABP bounds,
    /// including a deliberate violation control.
    AbpAudit {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        f_const: f64,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: String) -> Self {
        Self { code: 1, message }
    }

    fn solver(err: Error) -> Self {
        Self { code: 2, message: format!("solver: {err}") }
    }

    fn structure(message: String) -> Self {
        Self { code: 3, message }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not configuration errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            let _ = e.print();
            std::process::exit(1);
        }
    };
    match run(cli.command) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn structure_json(report: &StructureReport<f64>) -> Value {
    let hyp = |h: &fneig::operator::HypothesisCheck<f64>| {
        json!({ "pass": h.pass, "worst_violation": sig12(h.worst_violation) })
    };
    json!({
        "F1_homogeneity": hyp(&report.f1_homogeneity),
        "F2_ellipticity": hyp(&report.f2_ellipticity),
        "F3_convexity": hyp(&report.f3_convexity),
        "F4_radial_invariance": hyp(&report.f4_radial),
        "concave": report.concave,
        "admissible": report.admissible(),
        "samples": report.samples,
        "seed": report.seed,
    })
}

/// Runs the sampling audit and reports which hypotheses fail by name.
fn ensure_admissible(spec: &OperatorSpec<f64>) -> Result<(), Failure> {
    let report = check_structure(spec, 512, fneig::operator::DEFAULT_CHECK_SEED);
    if report.admissible() {
        return Ok(());
    }
    let mut failed = Vec::new();
    if !report.f1_homogeneity.pass {
        failed.push("(F1) positive homogeneity");
    }
    if !report.f2_ellipticity.pass {
        failed.push("(F2) uniform ellipticity");
    }
    if !report.f3_convexity.pass && !report.concave {
        failed.push("(F3) convexity");
    }
    Err(Failure::structure(format!("structure check failed: {}", failed.join(", "))))
}

fn parse_signs(s: &str) -> Result<Vec<Sign>, Failure> {
    match s {
        "+1" | "+" | "plus" => Ok(vec![Sign::Plus]),
        "-1" | "-" | "minus" => Ok(vec![Sign::Minus]),
        "both" => Ok(vec![Sign::Plus, Sign::Minus]),
        other => Err(Failure::config(format!("sign: unknown value `{other}`"))),
    }
}

/// Eigen right-hand side `-(lambda + kappa) u` as a sampled function, for
/// the ABP audit of an eigenpair.
fn eigen_rhs(traj: &Trajectory64, lambda: f64, kappa: f64) -> SampledFn<f64> {
    let (a, b) = traj.span();
    SampledFn::from_fn(a, b, 2049, |t| -(lambda + kappa) * traj.u_at(t))
}

fn pair_json(
    spec: &OperatorSpec<f64>,
    pair: &EigenPair<f64>,
    geometry: Geometry<f64>,
    csv: Option<String>,
) -> Result<Value, Failure> {
    let kappa = choose_kappa(spec);
    let abp = abp_check(&pair.global, &eigen_rhs(&pair.global, pair.lambda, kappa), spec, geometry)
        .map_err(Failure::solver)?;
    let piece = &pair.pieces[0];
    let mut map = Map::new();
    map.insert("n".into(), json!(pair.n));
    map.insert("sign".into(), json!(sign_label(pair.sign)));
    map.insert("lambda".into(), sig12(pair.lambda));
    map.insert(
        "nodes".into(),
        Value::Array(pair.nodes.nodes().iter().map(|&t| sig12(t)).collect()),
    );
    map.insert(
        "alphas".into(),
        Value::Array(pair.alphas.iter().map(|&a| sig12(a)).collect()),
    );
    map.insert("method".into(), json!(method_label(piece.method)));
    map.insert("iterations".into(), json!(piece.iterations));
    map.insert(
        "residual".into(),
        sig12(pair.pieces.iter().map(|p| p.residual).fold(0.0, f64::max)),
    );
    map.insert("abp".into(), abp_json(&abp));
    if let Some(csv) = csv {
        map.insert("csv".into(), json!(csv));
    }
    Ok(Value::Object(map))
}

fn summary_table(pairs: &[&EigenPair<f64>]) -> String {
    let mut text = String::from("  n  sign  lambda                nodes\n");
    for pair in pairs {
        let nodes = if pair.nodes.nodes().is_empty() {
            "-".to_string()
        } else {
            pair.nodes
                .nodes()
                .iter()
                .map(|t| format!("{t:.9}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        text.push_str(&format!(
            "  {}  {}     {:<20.12}  {}\n",
            pair.n,
            if pair.sign == Sign::Plus { "+" } else { "-" },
            pair.lambda,
            nodes
        ));
    }
    text
}

fn run_spectrum_tasks<S: SemiEigenSolve<f64> + Sync>(
    solver: &S,
    n_max: usize,
    domain: (f64, f64),
    pool: &rayon::ThreadPool,
) -> Result<Vec<EigenPair<f64>>, Failure> {
    use rayon::prelude::*;
    let tasks: Vec<(usize, Sign)> = (0..=n_max)
        .flat_map(|n| [(n, Sign::Plus), (n, Sign::Minus)])
        .collect();
    let results: Result<Vec<EigenPair<f64>>, Error> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(n, sign)| {
                let nodes = solve_nodes(solver, n, sign, domain)?;
                assemble(solver, &nodes, sign)
            })
            .collect()
    });
    results.map_err(Failure::solver)
}

fn emit_spectrum(
    command: &str,
    spec: &OperatorSpec<f64>,
    pairs: &[EigenPair<f64>],
    geometry: Geometry<f64>,
    geometry_json: Value,
    abscissa: &str,
    writer: &OutputWriter,
) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::config(format!("output: {e}"));
    let mut records = Vec::new();
    for pair in pairs {
        let csv = writer
            .write_trajectory(&eig_name(pair.sign, pair.n), &pair.global, abscissa)
            .map_err(io)?;
        records.push(pair_json(spec, pair, geometry, csv)?);
    }
    let mut body = Map::new();
    body.insert("operator".into(), operator_json(spec));
    body.insert("geometry".into(), geometry_json);
    body.insert("results".into(), Value::Array(records));
    writer.write_results(command, body).map_err(io)?;
    let table = summary_table(&pairs.iter().collect::<Vec<_>>());
    writer.write_summary(&table).map_err(io)?;
    print!("{table}");
    Ok(())
}

fn semi_result_json(
    res: &SemiEigenResult<f64>,
    csv: Option<String>,
) -> Value {
    let mut map = Map::new();
    map.insert("lambda".into(), sig12(res.lambda));
    map.insert("sign".into(), json!(sign_label(res.sign)));
    map.insert(
        "interval".into(),
        json!([sig12(res.interval.0), sig12(res.interval.1)]),
    );
    map.insert("method".into(), json!(method_label(res.method)));
    map.insert("iterations".into(), json!(res.iterations));
    map.insert("residual".into(), sig12(res.residual));
    if let Some(csv) = csv {
        map.insert("csv".into(), json!(csv));
    }
    Value::Object(map)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::CheckOperator { op, samples, seed, out } => {
            let spec = op.build()?;
            let writer = out.writer()?;
            let report = check_structure(&spec, samples.max(1), seed);
            let mut body = Map::new();
            body.insert("operator".into(), operator_json(&spec));
            body.insert("operator_file".into(), json!(describe_operator(&spec)));
            body.insert("structure".into(), structure_json(&report));
            body.insert("seed".into(), json!(seed));
            writer
                .write_results("check-operator", body)
                .map_err(|e| Failure::config(format!("output: {e}")))?;
            println!(
                "(F1) homogeneity: {}\n(F2) ellipticity: {}\n(F3) convexity: {}{}\n(F4) radial invariance: {}",
                if report.f1_homogeneity.pass { "pass" } else { "FAIL" },
                if report.f2_ellipticity.pass { "pass" } else { "FAIL" },
                if report.f3_convexity.pass { "pass" } else { "FAIL" },
                if report.concave { " (concave: handled by sign-flip reduction)" } else { "" },
                if report.f4_radial.pass { "pass" } else { "FAIL" },
            );
            if !report.admissible() {
                let mut failed = Vec::new();
                if !report.f1_homogeneity.pass {
                    failed.push("(F1)");
                }
                if !report.f2_ellipticity.pass {
                    failed.push("(F2)");
                }
                if !report.f3_convexity.pass && !report.concave {
                    failed.push("(F3)");
                }
                return Err(Failure::structure(format!(
                    "operator violates {}",
                    failed.join(", ")
                )));
            }
            Ok(())
        }

        Command::Dirichlet { op, geometry, f_const, kappa, tol, out } => {
            let spec = op.build()?;
            ensure_admissible(&spec)?;
            let cfg = tol.build()?;
            let writer = out.writer()?;
            let io = |e: std::io::Error| Failure::config(format!("output: {e}"));
            let kappa = kappa.unwrap_or_else(|| choose_kappa(&spec));
            let mut body = Map::new();
            body.insert("operator".into(), operator_json(&spec));
            body.insert("kappa".into(), sig12(kappa));
            body.insert("f_const".into(), sig12(f_const));
            match geometry.build()? {
                Domain::Interval(a, b) => {
                    let f = SampledFn::constant(f_const);
                    let prob = BvpProblem::dirichlet(spec.clone(), f.clone(), (a, b), kappa);
                    let traj = solve_dirichlet(&prob, &cfg).map_err(Failure::solver)?;
                    let abp = abp_check(&traj, &f, &spec, Geometry::Interval { a, b })
                        .map_err(Failure::solver)?;
                    let csv = writer.write_trajectory("solution", &traj, "t").map_err(io)?;
                    body.insert("geometry".into(), json!({"type": "interval", "a": sig12(a), "b": sig12(b)}));
                    let mut sol = Map::new();
                    sol.insert("sup_abs_u".into(), sig12(traj.sup_abs_u()));
                    sol.insert("shooting_slope".into(), sig12(traj.start().1));
                    sol.insert("abp".into(), abp_json(&abp));
                    if let Some(csv) = csv {
                        sol.insert("csv".into(), json!(csv));
                    }
                    body.insert("solution".into(), Value::Object(sol));
                    writer.write_results("dirichlet", body).map_err(io)?;
                    let summary = format!(
                        "dirichlet on ({a}, {b}): sup|u| = {:.12e}, ABP {}\n",
                        traj.sup_abs_u(),
                        if abp.pass { "pass" } else { "FAIL" }
                    );
                    writer.write_summary(&summary).map_err(io)?;
                    print!("{summary}");
                }
                Domain::Ball(radius) => {
                    let f = SampledFn::constant(f_const);
                    let prob = RadialProblem::new(spec.clone(), radius, f.clone(), kappa);
                    let report = radial_dirichlet(&prob, &cfg).map_err(Failure::solver)?;
                    let abp = abp_check(
                        &report.solution,
                        &f,
                        &spec,
                        Geometry::Ball { radius, dim: spec.dim },
                    )
                    .map_err(Failure::solver)?;
                    let csv =
                        writer.write_trajectory("solution", &report.solution, "r").map_err(io)?;
                    body.insert(
                        "geometry".into(),
                        json!({"type": "ball", "radius": sig12(radius), "dim": spec.dim}),
                    );
                    let mut sol = Map::new();
                    sol.insert("origin_value".into(), sig12(report.origin_value));
                    sol.insert("origin_curvature".into(), sig12(report.origin_curvature));
                    sol.insert(
                        "eps_family".into(),
                        Value::Array(
                            report
                                .eps_family
                                .iter()
                                .map(|&(e, u)| json!([sig12(e), sig12(u)]))
                                .collect(),
                        ),
                    );
                    sol.insert("eps_extrapolated".into(), sig12(report.eps_extrapolated));
                    sol.insert("cross_method_discrepancy".into(), sig12(report.discrepancy));
                    sol.insert("flagged".into(), json!(report.flagged));
                    sol.insert("abp".into(), abp_json(&abp));
                    if let Some(csv) = csv {
                        sol.insert("csv".into(), json!(csv));
                    }
                    body.insert("solution".into(), Value::Object(sol));
                    writer.write_results("dirichlet", body).map_err(io)?;
                    let summary = format!(
                        "radial dirichlet on B_{radius}: u(0) = {:.12e}, eps-family {:.12e}, ABP {}\n",
                        report.origin_value,
                        report.eps_extrapolated,
                        if abp.pass { "pass" } else { "FAIL" }
                    );
                    writer.write_summary(&summary).map_err(io)?;
                    print!("{summary}");
                }
            }
            Ok(())
        }

        Command::SemiEig { op, geometry, sign, method, tol, out } => {
            let spec = op.build()?;
            ensure_admissible(&spec)?;
            let cfg = tol.build()?;
            let writer = out.writer()?;
            let io = |e: std::io::Error| Failure::config(format!("output: {e}"));
            let signs = parse_signs(&sign)?;
            let methods: Vec<&str> = match method.as_str() {
                "shoot" => vec!["shoot"],
                "inverse" => vec!["inverse"],
                "both" => vec!["shoot", "inverse"],
                other => {
                    return Err(Failure::config(format!(
                        "method: unknown value `{other}` (expected shoot, inverse or both)"
                    )))
                }
            };
            let domain = geometry.build()?;
            let mut records = Vec::new();
            let mut lines = String::new();
            for &s in &signs {
                for &m in &methods {
                    let res = match (&domain, m) {
                        (Domain::Interval(a, b), "shoot") => {
                            semi_eigenvalue(&spec, *a, *b, s, &cfg)
                        }
                        (Domain::Interval(a, b), _) => inverse_iteration(&spec, *a, *b, s, &cfg),
                        (Domain::Ball(r), "shoot") => {
                            radial_semi_eigenvalue(&spec, 0.0, *r, s, &cfg)
                        }
                        (Domain::Ball(r), _) => radial_inverse_iteration(&spec, *r, s, &cfg),
                    }
                    .map_err(Failure::solver)?;
                    let name = format!(
                        "eig_{}0_{}",
                        if s == Sign::Plus { "+" } else { "-" },
                        m
                    );
                    let abscissa = if matches!(domain, Domain::Ball(_)) { "r" } else { "t" };
                    let csv = writer
                        .write_trajectory(&name, &res.eigenfunction, abscissa)
                        .map_err(io)?;
                    lines.push_str(&format!(
                        "lambda{} = {:.12e}  ({m}, {} iterations, residual {:.3e})\n",
                        if s == Sign::Plus { "+" } else { "-" },
                        res.lambda,
                        res.iterations,
                        res.residual
                    ));
                    records.push(semi_result_json(&res, csv));
                }
            }
            let mut body = Map::new();
            body.insert("operator".into(), operator_json(&spec));
            body.insert(
                "geometry".into(),
                match domain {
                    Domain::Interval(a, b) => {
                        json!({"type": "interval", "a": sig12(a), "b": sig12(b)})
                    }
                    Domain::Ball(r) => json!({"type": "ball", "radius": sig12(r), "dim": spec.dim}),
                },
            );
            body.insert("results".into(), Value::Array(records));
            writer.write_results("semi-eig", body).map_err(io)?;
            writer.write_summary(&lines).map_err(io)?;
            print!("{lines}");
            Ok(())
        }

        Command::Spectrum { op, geometry, n_max, tol, out } => {
            let spec = op.build()?;
            ensure_admissible(&spec)?;
            let cfg = tol.build()?;
            let writer = out.writer()?;
            let Domain::Interval(a, b) = geometry.build()? else {
                return Err(Failure::config(
                    "spectrum: needs --interval (use radial-spectrum for balls)".into(),
                ));
            };
            let pool = out.pool()?;
            let solver = LineSolver { spec: &spec, cfg };
            let pairs = run_spectrum_tasks(&solver, n_max, (a, b), &pool)?;
            emit_spectrum(
                "spectrum",
                &spec,
                &pairs,
                Geometry::Interval { a, b },
                json!({"type": "interval", "a": sig12(a), "b": sig12(b)}),
                "t",
                &writer,
            )
        }

        Command::RadialSpectrum { op, geometry, n_max, tol, out } => {
            let spec = op.build()?;
            ensure_admissible(&spec)?;
            let cfg = tol.build()?;
            let writer = out.writer()?;
            let Domain::Ball(radius) = geometry.build()? else {
                return Err(Failure::config("radial-spectrum: needs --R".into()));
            };
            if spec.dim < 1 {
                return Err(Failure::config("dim: must be at least 1".into()));
            }
            let pool = out.pool()?;
            let solver = RadialSolver { spec: &spec, cfg };
            let pairs = run_spectrum_tasks(&solver, n_max, (0.0, radius), &pool)?;
            emit_spectrum(
                "radial-spectrum",
                &spec,
                &pairs,
                Geometry::Ball { radius, dim: spec.dim },
                json!({"type": "ball", "radius": sig12(radius), "dim": spec.dim}),
                "r",
                &writer,
            )
        }

        Command::AbpAudit { op, geometry, f_const, tol, out } => {
            let spec = op.build()?;
            ensure_admissible(&spec)?;
            let cfg = tol.build()?;
            let writer = out.writer()?;
            let io = |e: std::io::Error| Failure::config(format!("output: {e}"));
            let kappa = choose_kappa(&spec);
            let f = SampledFn::constant(f_const);
            let (traj, geom, geom_json) = match geometry.build()? {
                Domain::Interval(a, b) => {
                    let prob = BvpProblem::dirichlet(spec.clone(), f.clone(), (a, b), kappa);
                    let traj = solve_dirichlet(&prob, &cfg).map_err(Failure::solver)?;
                    (
                        traj,
                        Geometry::Interval { a, b },
                        json!({"type": "interval", "a": sig12(a), "b": sig12(b)}),
                    )
                }
                Domain::Ball(radius) => {
                    let prob = RadialProblem::new(spec.clone(), radius, f.clone(), kappa);
                    let report = radial_dirichlet(&prob, &cfg).map_err(Failure::solver)?;
                    (
                        report.solution,
                        Geometry::Ball { radius, dim: spec.dim },
                        json!({"type": "ball", "radius": sig12(radius), "dim": spec.dim}),
                    )
                }
            };
            let genuine = abp_check(&traj, &f, &spec, geom).map_err(Failure::solver)?;

            // Deliberate violation control: scale the solution past the
            // bound without scaling the data. Skipped for a trivial
            // solution, where no scaling can violate anything.
            let sup = genuine.sup_u_plus.max(genuine.sup_u_minus);
            let control = if sup > 1e-9 {
                let factor =
                    (10.0 * (genuine.bound_plus.max(genuine.bound_minus) + 1.0) / sup).max(100.0);
                let mut scaled = traj.clone();
                scaled.scale(factor);
                Some(abp_check(&scaled, &f, &spec, geom).map_err(Failure::solver)?)
            } else {
                None
            };

            let mut body = Map::new();
            body.insert("operator".into(), operator_json(&spec));
            body.insert("geometry".into(), geom_json);
            body.insert("kappa".into(), sig12(kappa));
            body.insert("abp".into(), abp_json(&genuine));
            body.insert(
                "violation_control".into(),
                match &control {
                    Some(rep) => abp_json(rep),
                    None => json!("skipped (trivial solution)"),
                },
            );
            writer.write_results("abp-audit", body).map_err(io)?;
            let control_text = match &control {
                Some(rep) if !rep.pass => "correctly flagged",
                Some(_) => "NOT FLAGGED",
                None => "skipped (trivial solution)",
            };
            let summary = format!(
                "ABP audit: solution {}; deliberate violation control {control_text} (convention: {CONVENTION})\n",
                if genuine.pass { "pass" } else { "FAIL" },
            );
            writer.write_summary(&summary).map_err(io)?;
            print!("{summary}");
            if !genuine.pass {
                return Err(Failure { code: 2, message: "ABP check failed".into() });
            }
            if matches!(&control, Some(rep) if rep.pass) {
                return Err(Failure {
                    code: 2,
                    message: "violation control unexpectedly passed".into(),
                });
            }
            Ok(())
        }
    }
}
