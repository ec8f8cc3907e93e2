//! Discrete Korn and norm-equivalence constants.
//!
//! Each constant is the top eigenvalue of a generalized problem
//! `A x = λ B x`, estimated by Lanczos in the `B` inner product with full
//! reorthogonalization. `B⁻¹` is applied by (deflated) CG. The stopping test
//! is the relative change of the top Ritz value.

use log::debug;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cell::{Cell, VecField};
use crate::discrete::{ElementOperator, SymGradOp};
use crate::error::{Error, Result};
use crate::solver::{deflated_pcg, project_translations, CgOptions, LinearOperator};
use crate::cell::MandelMat66;

/// Relative Ritz-value change at which an estimate is accepted.
pub const RITZ_TOL: f64 = 1e-8;
const INNER_TOL: f64 = 1e-12;
const SEED: u64 = 0x6b6f726e;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KornRatios {
    /// `sup ‖∇v‖² / ‖∇s v‖²` over zero-mean periodic fields.
    pub lambda_grad: f64,
    /// `sqrt(sup (‖v‖² + ‖∇v‖²) / (‖v‖² + ‖∇s v‖²))`, which bounds
    /// `‖v‖_{H¹} / (‖v‖ + ‖∇s v‖)` from above.
    pub c_korn: f64,
    pub steps_grad: usize,
    pub steps_korn: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `λ` with `A x = λ B x`, `B` symmetric positive definite on the
/// working subspace (the zero-mean fields when `deflate` is set). Accepted
/// once the top Ritz value changes by at most `tol` relative in one step.
pub fn top_generalized_eigenvalue(
    a: &impl LinearOperator,
    b: &impl LinearOperator,
    deflate: bool,
    max_steps: usize,
    tol: f64,
) -> Result<Estimate> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("eigenvalue tolerance must be positive, got {tol}")));
    }
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::Dimension(format!("operator sizes {n} and {}", b.dim())));
    }
    let inner = CgOptions {
        tol: INNER_TOL,
        max_iter: 20_000,
        deflate_translations: deflate,
        reference_norm: None,
    };
    let project = |v: &mut [f64]| {
        if deflate {
            project_translations(v);
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut q: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
    project(&mut q);

    // Lanczos vectors, their images under B, and the tridiagonal coefficients
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut b_basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut bq = vec![0.0; n];
    b.apply(&q, &mut bq);
    let norm = dot(&q, &bq).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);
    bq.iter_mut().for_each(|x| *x /= norm);

    let mut last = f64::NAN;
    let mut aq = vec![0.0; n];
    for step in 1..=max_steps {
        a.apply(&q, &mut aq);
        let alpha = dot(&q, &aq);
        let mut w = deflated_pcg(b, &aq, None, &inner)
            .map_err(|e| e.with_solver_context("Korn inner solve"))?
            .x;
        basis.push(q.clone());
        b_basis.push(bq.clone());
        alphas.push(alpha);

        // full reorthogonalization in the B inner product, twice
        for _ in 0..2 {
            for (v, bv) in basis.iter().zip(&b_basis) {
                let c = dot(&w, bv);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
            // constants are invisible to the B norm and must be removed explicitly
            project(&mut w);
        }

        let ritz = top_ritz(&alphas, &betas);
        let change = ((ritz - last) / ritz).abs();
        debug!("lanczos step {step}: ritz {ritz:.12} change {change:.2e}");
        if change <= tol {
            return Ok(Estimate { value: ritz, steps: step });
        }
        last = ritz;

        let mut bw = vec![0.0; n];
        b.apply(&w, &mut bw);
        let beta = dot(&w, &bw).max(0.0).sqrt();
        if beta <= 1e-14 * ritz.abs().max(1.0) {
            // invariant subspace: the Ritz values are exact
            return Ok(Estimate { value: ritz, steps: step });
        }
        betas.push(beta);
        q = w.into_iter().map(|x| x / beta).collect();
        bq = bw.into_iter().map(|x| x / beta).collect();
    }
    Err(Error::Solver {
        iterations: max_steps,
        residual: last,
        context: format!(" (eigenvalue iteration stagnated, last Rayleigh quotient {last:.12})"),
    })
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alphas` and off-diagonal `betas`, by Sturm-sequence bisection.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> f64 {
    let m = alphas.len();
    let off = |i: usize| if i < betas.len() { betas[i].abs() } else { 0.0 };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..m {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(alphas[i] - r);
        hi = hi.max(alphas[i] + r);
    }
    // eigenvalues strictly greater than x
    let count_above = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..m {
            let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { 0.0 };
            d = alphas[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = f64::EPSILON * (x.abs() + 1.0);
            }
            if d > 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_above(mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Estimate the gradient-ratio and Korn constants on `cell`.
pub fn korn_ratios(cell: Cell, max_steps: usize) -> Result<KornRatios> {
    korn_ratios_with(cell, max_steps, RITZ_TOL)
}

/// [`korn_ratios`] with an explicit Ritz tolerance.
pub fn korn_ratios_with(cell: Cell, max_steps: usize, tol: f64) -> Result<KornRatios> {
    let mass = ElementOperator::mass(cell);
    let grad = ElementOperator::gradient_gram(cell);
    let sym = ElementOperator::homogeneous_stiffness(cell, &MandelMat66::identity());
    let lambda = top_generalized_eigenvalue(&grad, &sym, true, max_steps, tol)?;
    let korn = top_generalized_eigenvalue(&mass.sum(&grad)?, &mass.sum(&sym)?, false, max_steps, tol)?;
    Ok(KornRatios {
        lambda_grad: lambda.value,
        c_korn: korn.value.sqrt(),
        steps_grad: lambda.steps,
        steps_korn: korn.steps,
    })
}

/// `sup ‖∇v‖² / ‖∇s v‖²` alone, with an explicit Ritz tolerance.
pub fn gradient_ratio_sup(cell: Cell, max_steps: usize, tol: f64) -> Result<Estimate> {
    let grad = ElementOperator::gradient_gram(cell);
    let sym = ElementOperator::homogeneous_stiffness(cell, &MandelMat66::identity());
    top_generalized_eigenvalue(&grad, &sym, true, max_steps, tol)
}

/// `sqrt(sup (‖v‖² + ‖∇v‖²) / ‖∇s v‖²)` over zero-mean periodic fields: the
/// constant bounding the full norm by the symmetric-gradient seminorm.
pub fn isomorphism_constant(cell: Cell, max_steps: usize) -> Result<Estimate> {
    let grad = ElementOperator::gradient_gram(cell);
    let sym = ElementOperator::homogeneous_stiffness(cell, &MandelMat66::identity());
    let mass = ElementOperator::mass(cell);
    let e = top_generalized_eigenvalue(&mass.sum(&grad)?, &sym, true, max_steps, RITZ_TOL)?;
    Ok(Estimate {
        value: e.value.sqrt(),
        steps: e.steps,
    })
}

/// `‖∇v‖²_W / ‖∇s v‖²_W` for one field.
pub fn gradient_ratio(v: &VecField) -> Result<f64> {
    let e = SymGradOp::new(v.cell).apply_periodic(v)?;
    let sym = e.norm();
    if sym == 0.0 {
        return Err(Error::Parameter("field has zero symmetric gradient".into()));
    }
    Ok(v.gradient_norm_sq() / (sym * sym))
}

/// `(‖v‖² + ‖∇v‖²)^½` and `‖v‖ + ‖∇s v‖` for one field.
pub fn korn_sides(v: &VecField) -> Result<(f64, f64)> {
    let e = SymGradOp::new(v.cell).apply_periodic(v)?;
    let l2 = v.l2_norm_sq();
    Ok(((l2 + v.gradient_norm_sq()).sqrt(), l2.sqrt() + e.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gradient_ratio_is_bounded_by_two() {
        let cell = Cell::unit_cube(6).unwrap();
        let k = korn_ratios(cell, 200).unwrap();
        assert!(k.lambda_grad <= 2.0 + 1e-6, "{k:?}");
        assert!(k.lambda_grad >= 1.8, "{k:?}");
        assert!(k.c_korn >= 1.0 && k.c_korn <= 2f64.sqrt() + 1e-6, "{k:?}");
    }

    #[test]
    fn divergence_identity_holds_discretely() {
        // ‖∇v‖² − 2‖∇s v‖² = −‖div v‖² at the Gauss points
        let cell = Cell::unit_cube(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = VecField::random(cell, &mut rng);
        let e = SymGradOp::new(cell).apply_periodic(&v).unwrap();
        let w = cell.quadrature_weight();
        let div2: f64 = v
            .gradient_at_quadrature()
            .iter()
            .map(|g| w * g.trace() * g.trace())
            .sum();
        let lhs = v.gradient_norm_sq() - 2.0 * e.norm() * e.norm();
        assert!((lhs + div2).abs() <= 1e-11 * div2, "{lhs} {div2}");
    }

    #[test]
    fn shear_field_attains_two() {
        let cell = Cell::unit_cube(8).unwrap();
        let v = VecField::from_fn(cell, |y| [(2.0 * PI * y[1]).sin(), 0.0, 0.0]);
        assert!((gradient_ratio(&v).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn korn_inequality_for_random_fields() {
        let cell = Cell::unit_cube(4).unwrap();
        let k = korn_ratios(cell, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = VecField::random(cell, &mut rng);
            let (h1, rhs) = korn_sides(&v).unwrap();
            assert!(h1 <= k.c_korn * rhs);
        }
    }

    #[test]
    fn isomorphism_constant_is_stable() {
        let a = isomorphism_constant(Cell::unit_cube(4).unwrap(), 300).unwrap();
        let b = isomorphism_constant(Cell::unit_cube(8).unwrap(), 300).unwrap();
        assert!(a.value.is_finite() && b.value.is_finite());
        assert!(((b.value - a.value) / a.value).abs() <= 0.05, "{a:?} {b:?}");
    }

    #[test]
    fn tridiagonal_top_eigenvalue() {
        use nalgebra::{DMatrix, SymmetricEigen};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1, 2, 7, 40] {
            let alphas: Vec<f64> = (0..m).map(|_| rand::Rng::random_range(&mut rng, -2.0..3.0)).collect();
            let betas: Vec<f64> = (1..m).map(|_| rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let dense = SymmetricEigen::new(t).eigenvalues.max();
            assert!((top_ritz(&alphas, &betas) - dense).abs() <= 1e-13 * dense.abs().max(1.0));
        }
    }

    #[test]
    fn stagnation_is_reported() {
        let cell = Cell::unit_cube(4).unwrap();
        let grad = ElementOperator::gradient_gram(cell);
        let mass = ElementOperator::mass(cell);
        let err = top_generalized_eigenvalue(&grad, &mass, false, 1, RITZ_TOL).unwrap_err();
        assert!(err.to_string().contains("Rayleigh"), "{err}");
    }
}
