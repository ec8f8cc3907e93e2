//! Command-line front end.
//!
//! Every command reads a [`RunConfig`] (JSON, all fields optional), applies the
//! flag overrides and writes one JSON document with the envelope described in
//! [`report::Envelope`]. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, all checks passed |
//! | 1 | a verification check failed (`verify`, `donati`, `korn`, `divcurl`) |
//! | 2 | configuration, parameter, input-format or precondition error |
//! | 3 | an iterative solver did not converge |
//! | 4 | `homogenize` self-checks failed; the report is still written |

pub mod config;
pub mod fields;
pub mod report;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    decay_exponent, div_curl_demo, doubling_schedule, isomorphism_constant, korn_ratios_with, oscillation_demo,
    KornRatios, OscillationRecord, ScalarSamples, TestFunction,
};
use crate::cell::{cell_average, MandelMat66, MandelVec6, SymField, VecField};
use crate::discrete::{make_divfree, sym_gradient};
use crate::donati::{compatibility_check, donati_project_lp, relative_divergence, CompatibilityCheck};
use crate::error::{Error, Result};
use crate::homogenize::{homogenize_with_solutions, laminate_oracle_for_cell, relative_error, HomReport};
use crate::solver::CellProblem;

pub use config::RunConfig;
use config::MaterialSource;
use fields::FieldData;
use report::{emit, to_json, Envelope};
use verify::{Check, Suite, SuiteReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CROSS_CHECK: i32 = 4;

/// Relative error below which a laminate run matches its closed form.
pub const LAMINATE_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "cellhom", version, about = "Periodic homogenization of linear elastic cells")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the homogenized tensor and its self-checks.
    Homogenize(Common),
    /// Run property suites.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Split a strain field into a symmetric gradient and a divergence-free part.
    Donati {
        /// Binary field file; overrides `donati.input`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the Korn and gradient-ratio constants.
    Korn(Common),
    /// Oscillating-product demonstrations on the cell solutions.
    Divcurl(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid as `N` or `N1,N2,N3`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<[usize; 3]>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub deterministic: bool,
}

fn parse_grid(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad grid entry {p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [n] => Ok([n, n, n]),
        [a, b, c] => Ok([a, b, c]),
        _ => Err(format!("grid needs 1 or 3 entries, got {}", parts.len())),
    }
}

impl Common {
    /// Load the config file and apply the flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = self.grid {
            c.grid = g;
        }
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.outputs.report = Some(o.clone());
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        c.deterministic |= self.deterministic;
        c.validate()?;
        Ok(c)
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

/// Run one command and return its exit code. Errors go to stderr.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cellhom: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Homogenize(common) => with_pool(&common, cmd_homogenize),
        Command::Verify { suite, common } => with_pool(&common, |c| cmd_verify(c, suite)),
        Command::Donati { input, common } => with_pool(&common, |mut c| {
            if input.is_some() {
                c.donati.input = input.clone();
            }
            cmd_donati(c)
        }),
        Command::Korn(common) => with_pool(&common, cmd_korn),
        Command::Divcurl(common) => with_pool(&common, cmd_divcurl),
    }
}

fn with_pool(common: &Common, f: impl FnOnce(RunConfig) -> Result<i32> + Send) -> Result<i32> {
    let config = common.resolve()?;
    let threads = config.threads.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| f(config))
}

fn write_envelope<T: Serialize>(config: &RunConfig, command: &str, passed: bool, result: T) -> Result<()> {
    let envelope = Envelope {
        schema: report::SCHEMA,
        command,
        timestamp: report::timestamp(),
        seed: config.seed,
        threads: rayon::current_num_threads(),
        deterministic: config.deterministic,
        config,
        passed,
        result,
    };
    emit(config.outputs.report.as_deref(), &to_json(&envelope)?)
}

fn write_csv(path: Option<&Path>, text: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, text)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct LaminateComparison {
    oracle: MandelMat66,
    relative_error: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct HomogenizeResult {
    report: HomReport,
    laminate: Option<LaminateComparison>,
}

pub fn cmd_homogenize(config: RunConfig) -> Result<i32> {
    let map = config.material_map()?;
    let cell = map.cell;
    let (report, solutions) =
        homogenize_with_solutions(&map, config.tol, config.max_iter(&cell), config.checks)?;
    let laminate = match &config.material {
        MaterialSource::Laminate {
            fraction, direction, ..
        } => {
            let phases = map.phases();
            let oracle = laminate_oracle_for_cell(
                &cell,
                phases[0].stiffness(),
                phases[1].stiffness(),
                *fraction,
                *direction,
            )?;
            let err = relative_error(report.tensor(), &oracle);
            Some(LaminateComparison {
                oracle,
                relative_error: err,
                tolerance: LAMINATE_TOL,
                passed: err <= LAMINATE_TOL,
            })
        }
        _ => None,
    };
    if let Some(path) = &config.outputs.vtk {
        report::write_vtk(path, &map, &[("strain0", &solutions[0].strain), ("stress0", &solutions[0].stress)])?;
    }
    let passed = report.checks.passed && laminate.as_ref().is_none_or(|l| l.passed);
    write_envelope(&config, "homogenize", passed, HomogenizeResult { report, laminate })?;
    Ok(if passed { EXIT_OK } else { EXIT_CROSS_CHECK })
}

pub fn cmd_verify(config: RunConfig, suite: Suite) -> Result<i32> {
    let reports: Vec<SuiteReport> = verify::run_suite(suite, &config)?;
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        log::info!("{}: {}", r.suite, if r.passed { "pass" } else { "FAIL" });
    }
    write_envelope(&config, "verify", passed, &reports)?;
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Serialize)]
struct DonatiResult {
    source: String,
    affine: MandelVec6,
    strain_norm: f64,
    gradient_norm: f64,
    residual_norm: f64,
    /// `‖residual‖ / ‖e‖`.
    relative_residual: f64,
    residual_divergence: f64,
    ortho_defect: f64,
    iterations: usize,
    checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
struct NodalCompatibility {
    source: String,
    saint_venant: f64,
    curl_curl: f64,
    scale: f64,
    compatible: bool,
    residuals_agree: bool,
}

pub fn cmd_donati(config: RunConfig) -> Result<i32> {
    let cell = config.cell()?;
    let (e, source) = match &config.donati.input {
        Some(path) => match fields::read(path, cell)? {
            FieldData::Quadrature(e) => (e, path.display().to_string()),
            FieldData::Nodal(n) => {
                let c: CompatibilityCheck = compatibility_check(&n)?;
                let result = NodalCompatibility {
                    source: path.display().to_string(),
                    saint_venant: c.saint_venant,
                    curl_curl: c.curl_curl,
                    scale: c.scale,
                    compatible: c.saint_venant_vanishes(),
                    residuals_agree: c.agree(),
                };
                let passed = c.agree();
                write_envelope(&config, "donati", passed, result)?;
                return Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED });
            }
        },
        None => {
            let mut rng = config.rng();
            let mut phi = VecField::random(cell, &mut rng);
            phi.remove_mean();
            let a = MandelVec6(std::array::from_fn(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)));
            let grad = sym_gradient(&crate::cell::LPField::new(a, phi))?;
            let rest = make_divfree(&SymField::random(cell, &mut rng), &MandelMat66::identity())?;
            let rest = rest.shifted(-cell_average(&rest));
            (grad.add(&rest)?, format!("synthetic (seed {})", config.seed))
        }
    };
    let split = donati_project_lp(&e, config.tol)?;
    let e_norm = e.norm();
    // measured against the input, the scale of the projection's own residual
    let op = crate::discrete::SymGradOp::new(cell);
    let residual_divergence = op.weak_divergence(&split.residual)?.norm() / op.element_load_norm(&e);
    let checks = vec![
        Check::at_most("residual_divergence", residual_divergence, config.tol),
        Check::at_most("orthogonality_relative", split.ortho_defect / (e_norm * e_norm), config.tol),
    ];
    let passed = checks.iter().all(|c| c.passed);
    if let Some(prefix) = &config.outputs.fields {
        let with = |ext: &str| {
            let mut p = prefix.clone().into_os_string();
            p.push(ext);
            PathBuf::from(p)
        };
        fields::write_quadrature(with(".grad.bin"), &split.grad_part)?;
        fields::write_quadrature(with(".residual.bin"), &split.residual)?;
    }
    let result = DonatiResult {
        source,
        affine: split.v.affine,
        strain_norm: e_norm,
        gradient_norm: split.grad_part.norm(),
        residual_norm: split.residual.norm(),
        relative_residual: split.residual.norm() / e_norm,
        residual_divergence,
        ortho_defect: split.ortho_defect,
        iterations: split.iterations,
        checks,
    };
    write_envelope(&config, "donati", passed, result)?;
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Serialize)]
struct KornResult {
    #[serde(flatten)]
    ratios: KornRatios,
    isomorphism_constant: f64,
    steps_isomorphism: usize,
    checks: Vec<Check>,
}

pub fn cmd_korn(config: RunConfig) -> Result<i32> {
    let cell = config.cell()?;
    let ratios = korn_ratios_with(cell, config.korn.max_steps, config.korn.ritz_tol)?;
    let iso = isomorphism_constant(cell, config.korn.max_steps)?;
    let checks = vec![
        Check::at_least("lambda_grad_lower", ratios.lambda_grad, 1.8),
        Check::at_most("lambda_grad_upper", ratios.lambda_grad, 2.000001),
    ];
    let passed = checks.iter().all(|c| c.passed);
    let result = KornResult {
        ratios,
        isomorphism_constant: iso.value,
        steps_isomorphism: iso.steps,
        checks,
    };
    write_envelope(&config, "korn", passed, result)?;
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, Serialize)]
struct Series {
    name: &'static str,
    row: Option<usize>,
    records: Vec<OscillationRecord>,
    decay_exponent: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DivCurlResult {
    stress_divergence: f64,
    series: Vec<Series>,
    checks: Vec<Check>,
}

/// Largest decay exponent accepted as a `1/n` trend.
pub const DECAY_THRESHOLD: f64 = -0.8;

pub fn cmd_divcurl(config: RunConfig) -> Result<i32> {
    let map = config.material_map()?;
    let cell = map.cell;
    let problem = CellProblem::new(&map);
    // tight solves keep the stress divergence below the demo's precondition
    let tol = config.tol.min(1e-11);
    let max_iter = config.max_iter(&cell);
    let row = config.divcurl.row;
    let stress_case = problem.solve(MandelVec6::basis(row), tol, max_iter)?;
    let other = MandelVec6::basis((row + 1) % 3) + MandelVec6::basis(3 + row).scale(0.5);
    let disp_case = problem.solve(other, tol, max_iter)?;
    let sigma = stress_case.stress;
    let stress_divergence = relative_divergence(&sigma)?;

    let schedule = doubling_schedule(config.divcurl.schedule_max);
    let phi = TestFunction::coordinate(0);
    let products = div_curl_demo(&sigma, &disp_case.displacement(), row, &schedule, &phi)?;
    let indicator = ScalarSamples {
        cell,
        values: (0..cell.grid.element_count())
            .flat_map(|e| std::iter::repeat_n(map.phase_of(e) as f64, 8))
            .collect(),
    };
    let oscillation = oscillation_demo(&indicator, &schedule, &phi)?;

    let mut checks = Vec::new();
    let mut series = Vec::new();
    for (name, row, records) in [("divcurl", Some(row), products), ("phase_indicator", None, oscillation)] {
        let exponent = decay_exponent(&records);
        let largest = records.iter().map(|r| r.error.abs()).fold(0.0, f64::max);
        match exponent {
            Some(x) => checks.push(Check::at_most(format!("{name}_decay_exponent"), x, DECAY_THRESHOLD)),
            None => checks.push(Check::at_most(format!("{name}_max_error"), largest, 1e-12)),
        }
        series.push(Series {
            name,
            row,
            records,
            decay_exponent: exponent,
        });
    }
    let csv_rows: Vec<(&str, Option<usize>, &[OscillationRecord])> =
        series.iter().map(|s| (s.name, s.row, s.records.as_slice())).collect();
    write_csv(config.outputs.csv.as_deref(), &report::oscillation_csv(&csv_rows))?;
    let passed = checks.iter().all(|c| c.passed);
    write_envelope(
        &config,
        "divcurl",
        passed,
        DivCurlResult {
            stress_divergence,
            series,
            checks,
        },
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_flag_forms() {
        assert_eq!(parse_grid("8"), Ok([8, 8, 8]));
        assert_eq!(parse_grid("4,6,8"), Ok([4, 6, 8]));
        assert!(parse_grid("4,6").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn flags_override_config() {
        let common = Common {
            grid: Some([4, 4, 4]),
            tol: Some(1e-6),
            seed: Some(7),
            ..Common::default()
        };
        let c = common.resolve().unwrap();
        assert_eq!((c.grid, c.tol, c.seed), ([4, 4, 4], 1e-6, 7));
    }

    #[test]
    fn exit_codes() {
        let solver = Error::Solver {
            iterations: 1,
            residual: 1.0,
            context: String::new(),
        };
        assert_eq!(exit_code(&solver), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Precondition("x".into())), EXIT_CONFIG);
    }
}
