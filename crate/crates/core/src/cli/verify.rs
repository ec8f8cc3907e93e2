//! Property suites behind `cellhom verify`.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    decay_exponent, div_curl_demo, doubling_schedule, korn_ratios_with, korn_sides, trace_audit_h1,
    trace_audit_hdiv, TestFunction,
};
use crate::cell::{cell_average, inner, Cell, LPField, MandelMat66, MandelVec6, SymField, VecField};
use crate::discrete::{green_defect, make_divfree, sym_gradient, SymGradOp};
use crate::donati::{
    compatibility_battery, compatibility_check, divergence_free_batch, donati_project_lp, hill_mandel,
};
use crate::error::Result;

use super::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Green,
    Korn,
    Traces,
    Donati,
    Hillmandel,
    Divcurl,
    Compat,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Green,
        Suite::Korn,
        Suite::Traces,
        Suite::Donati,
        Suite::Hillmandel,
        Suite::Divcurl,
        Suite::Compat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Green => "green",
            Suite::Korn => "korn",
            Suite::Traces => "traces",
            Suite::Donati => "donati",
            Suite::Hillmandel => "hillmandel",
            Suite::Divcurl => "divcurl",
            Suite::Compat => "compat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// One measured quantity against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtMost,
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtLeast,
            threshold,
            passed: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn run_suite(suite: Suite, config: &RunConfig) -> Result<Vec<SuiteReport>> {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let cell = config.cell()?;
    suites
        .into_iter()
        .map(|s| {
            log::info!("suite {}", s.name());
            let mut rng = config.rng();
            let checks = match s {
                Suite::Green => green(cell, config, &mut rng),
                Suite::Korn => korn(cell, config, &mut rng),
                Suite::Traces => traces(cell, config, &mut rng),
                Suite::Donati => donati(cell, config, &mut rng),
                Suite::Hillmandel => hillmandel(cell, config, &mut rng),
                Suite::Divcurl => divcurl(cell, config, &mut rng),
                Suite::Compat => compat(cell),
                Suite::All => unreachable!(),
            }?;
            Ok(SuiteReport {
                suite: s.name(),
                passed: checks.iter().all(|c| c.passed),
                checks,
            })
        })
        .collect()
}

fn random_affine(rng: &mut ChaCha8Rng) -> MandelVec6 {
    MandelVec6(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
}

fn random_lp(cell: Cell, rng: &mut ChaCha8Rng) -> LPField {
    let a = random_affine(rng);
    let mut phi = VecField::random(cell, rng);
    phi.remove_mean();
    LPField::new(a, phi)
}

fn green(cell: Cell, config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let op = SymGradOp::new(cell);
    let mut worst: f64 = 0.0;
    for _ in 0..config.verify.cases {
        let mu = SymField::random(cell, rng);
        let v = VecField::random(cell, rng);
        let scale = mu.norm() * op.apply_periodic(&v)?.norm();
        worst = worst.max(green_defect(&mu, &v)?.abs() / scale);
    }
    Ok(vec![Check::at_most("green_identity_relative_defect", worst, 1e-12)])
}

fn korn(cell: Cell, config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let k = korn_ratios_with(cell, config.korn.max_steps, config.korn.ritz_tol)?;
    let mut worst: f64 = 0.0;
    for _ in 0..config.verify.cases {
        let v = VecField::random(cell, rng);
        let (h1, rhs) = korn_sides(&v)?;
        worst = worst.max(h1 / (k.c_korn * rhs));
    }
    Ok(vec![
        Check::at_least("lambda_grad_lower", k.lambda_grad, 1.8),
        Check::at_most("lambda_grad_upper", k.lambda_grad, 2.000001),
        Check::at_most("c_korn", k.c_korn, 2f64.sqrt() + 1e-6),
        Check::at_most("korn_inequality_ratio", worst, 1.0 + 1e-9),
    ])
}

fn traces(cell: Cell, config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut periodic: f64 = 0.0;
    let mut affine: f64 = 0.0;
    let mut flux: f64 = 0.0;
    let id = MandelMat66::identity();
    for _ in 0..config.verify.cases {
        let u = random_lp(cell, rng);
        let a = u.affine.to_matrix();
        let fluct = LPField::new(MandelVec6([0.0; 6]), u.phi.clone());
        for r in trace_audit_h1(&fluct) {
            periodic = periodic.max(r.max_mismatch);
        }
        for r in trace_audit_h1(&u) {
            let expected = a * cell.lattice.vector(r.direction);
            for j in &r.jumps {
                let d = (0..3).map(|c| (j[c] - expected[c]).abs()).fold(0.0, f64::max);
                affine = affine.max(d / expected.amax().max(1e-300));
            }
        }
        let sigma = make_divfree(&SymField::random(cell, rng), &id)?;
        for k in 0..3 {
            flux = flux.max(trace_audit_hdiv(&sigma, k)?.max_mismatch);
        }
    }
    Ok(vec![
        Check::at_most("h1_periodic_mismatch", periodic, 1e-12),
        Check::at_most("h1_affine_jump_relative_error", affine, 1e-12),
        Check::at_most("hdiv_flux_mismatch", flux, 1e-6),
    ])
}

fn donati(cell: Cell, config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let tol = config.tol;
    let mut round_trip: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let mut gradient_leak: f64 = 0.0;
    for _ in 0..config.verify.cases {
        let u = random_lp(cell, rng);
        let e = sym_gradient(&u)?;
        let split = donati_project_lp(&e, tol * 1e-3)?;
        residual = residual.max(split.residual.norm() / e.norm());
        let mut d = split.v.phi.clone();
        d.axpy(-1.0, &u.phi);
        round_trip = round_trip.max(
            ((d.gradient_norm_sq() / u.phi.gradient_norm_sq()).sqrt())
                .max((split.v.affine - u.affine).norm() / u.affine.norm()),
        );

        let f = SymField::random(cell, rng);
        let split = donati_project_lp(&f, tol * 1e-3)?;
        ortho = ortho.max(split.ortho_defect / (f.norm() * f.norm()));
        // the remainder carries no gradient component
        let again = donati_project_lp(&split.residual.shifted(-cell_average(&split.residual)), tol * 1e-3)?;
        gradient_leak = gradient_leak.max(again.grad_part.norm() / f.norm());
    }
    Ok(vec![
        Check::at_most("gradient_residual_relative", residual, tol),
        Check::at_most("displacement_recovery_relative", round_trip, tol),
        Check::at_most("orthogonality_relative", ortho, tol),
        Check::at_most("remainder_gradient_relative", gradient_leak, tol),
    ])
}

fn hillmandel(cell: Cell, config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let batch = divergence_free_batch(cell, config.seed, config.verify.cases)?;
    let mut worst: f64 = 0.0;
    let mut product: f64 = 0.0;
    for sigma in &batch {
        let v = random_lp(cell, rng);
        let hm = hill_mandel(&v, sigma)?;
        worst = worst.max(hm.defect() / hm.scale);
        let e = sym_gradient(&v)?;
        let lhs = inner(&e, sigma)? / cell.volume();
        let rhs = cell_average(&e).dot(&cell_average(sigma));
        product = product.max((lhs - rhs).abs() / (e.norm() * sigma.norm() / cell.volume()));
    }
    Ok(vec![
        Check::at_most("hill_mandel_relative_defect", worst, 1e-10),
        Check::at_most("average_of_product_defect", product, 1e-10),
    ])
}

fn divcurl(cell: Cell, config: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let sigma = make_divfree(&SymField::random(cell, rng), &MandelMat66::identity())?
        .shifted(random_affine(rng));
    let v = random_lp(cell, rng);
    let schedule = doubling_schedule(config.divcurl.schedule_max);
    let phi = TestFunction::coordinate(0);
    let records = div_curl_demo(&sigma, &v, config.divcurl.row, &schedule, &phi)?;
    let last = records.last().map(|r| r.error.abs()).unwrap_or(f64::NAN);
    let first = records.first().map(|r| r.error.abs()).unwrap_or(f64::NAN);
    let exponent = decay_exponent(&records).unwrap_or(f64::NEG_INFINITY);
    let mut checks = vec![Check::at_most("decay_exponent", exponent, -0.8)];
    if records.len() > 1 {
        checks.push(Check::at_most("final_over_initial_error", last / first, 1.0));
    }
    Ok(checks)
}

/// Fewest nodes per direction at which the battery is sampled; the analytic
/// fields are resolved too coarsely below this.
pub const COMPAT_MIN_NODES: usize = 16;

fn compat(cell: Cell) -> Result<Vec<Check>> {
    let [n1, n2, n3] = cell.grid.dims().map(|n| n.max(COMPAT_MIN_NODES));
    let cell = Cell::new(cell.lattice, crate::cell::Grid::new(n1, n2, n3)?);
    let mut checks = Vec::new();
    let mut disagreements = 0usize;
    let mut misclassified = 0usize;
    for field in compatibility_battery() {
        let c = compatibility_check(&field.sample(cell))?;
        if !c.agree() {
            disagreements += 1;
        }
        if c.saint_venant_vanishes() != field.compatible {
            misclassified += 1;
        }
    }
    checks.push(Check::at_most("residual_disagreements", disagreements as f64, 0.0));
    checks.push(Check::at_most("misclassified_fields", misclassified as f64, 0.0));
    let shear = VecField::from_fn(cell, |y| [(2.0 * PI * y[1]).sin(), 0.0, 0.0]);
    checks.push(Check::at_most(
        "shear_gradient_ratio_defect",
        (crate::analysis::gradient_ratio(&shear)? - 2.0).abs(),
        1e-9,
    ));
    Ok(checks)
}
