//! Deflated preconditioned conjugate gradients and the cellular problem.
//!
//! The periodic stiffness operator is singular: constant translations span
//! its kernel. Right-hand sides, iterates and residuals are projected onto the
//! zero-mean subspace, where the operator is symmetric positive definite, and
//! the Jacobi preconditioner is sandwiched between the same projections.

use log::debug;

use crate::cell::{Cell, LPField, MandelVec6, SymField, VecField};
use crate::discrete::{ElementOperator, SymGradOp};
use crate::error::{Error, Result};
use crate::material::MaterialMap;

/// A symmetric linear operator on interleaved nodal 3-vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOptions {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Project out the three constant translations.
    pub deflate_translations: bool,
    /// Norm the residual is measured against; `‖b‖` when absent.
    pub reference_norm: Option<f64>,
}

impl CgOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            deflate_translations: true,
            reference_norm: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual, recomputed from `b − A x`.
    pub residual: f64,
    /// Relative residual after every iteration, starting with the initial one.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Subtract the componentwise mean of an interleaved nodal vector.
pub(crate) fn project_translations(v: &mut [f64]) {
    let n = (v.len() / 3) as f64;
    let mut mean = [0.0; 3];
    for c in v.chunks_exact(3) {
        for d in 0..3 {
            mean[d] += c[d];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    for c in v.chunks_exact_mut(3) {
        for d in 0..3 {
            c[d] -= mean[d];
        }
    }
}

/// Jacobi-preconditioned CG with optional deflation of constant translations.
pub fn deflated_pcg(
    op: &impl LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &CgOptions,
) -> Result<CgOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} entries, operator has {n}",
            b.len()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let project = |v: &mut [f64]| {
        if opts.deflate_translations {
            project_translations(v);
        }
    };
    let inv_diag: Vec<f64> = op
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precondition = |r: &[f64], z: &mut [f64]| {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&inv_diag) {
            *z = r * d;
        }
        project(z);
    };

    let mut rhs = b.to_vec();
    project(&mut rhs);
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    project(&mut x);

    let reference = opts
        .reference_norm
        .unwrap_or_else(|| dot(&rhs, &rhs).sqrt());
    if reference == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }

    let true_residual = |x: &[f64], r: &mut [f64]| {
        op.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(&rhs) {
            *ri = bi - *ri;
        }
        project(r);
    };

    let mut r = vec![0.0; n];
    true_residual(&x, &mut r);
    let mut rel = dot(&r, &r).sqrt() / reference;
    let mut history = vec![rel];
    if rel <= opts.tol {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual: rel,
            history,
        });
    }

    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];

    for it in 1..=opts.max_iter {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Solver {
                iterations: it,
                residual: rel,
                context: format!(" (operator not positive definite on search direction, pᵀAp = {pq:e})"),
            });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        project(&mut r);
        rel = dot(&r, &r).sqrt() / reference;
        history.push(rel);

        if rel <= opts.tol {
            true_residual(&x, &mut r);
            rel = dot(&r, &r).sqrt() / reference;
            if rel <= opts.tol {
                debug!("pcg converged in {it} iterations, relative residual {rel:.3e}");
                return Ok(CgOutcome {
                    x,
                    iterations: it,
                    residual: rel,
                    history,
                });
            }
            // recursive residual drifted: restart from the true one
            precondition(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }

        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    true_residual(&x, &mut r);
    Err(Error::Solver {
        iterations: opts.max_iter,
        residual: dot(&r, &r).sqrt() / reference,
        context: String::new(),
    })
}

/// Default iteration cap `10·(unknowns)^(1/3)`, at least 1000.
pub fn default_max_iter(cell: &Cell) -> usize {
    let unknowns = 3.0 * cell.grid.node_count() as f64;
    ((10.0 * unknowns.cbrt()).ceil() as usize).max(1000)
}

pub const DEFAULT_TOL: f64 = 1e-8;

/// Solution of one cellular problem `u_A = A·y + φ_A`.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub affine: MandelVec6,
    pub phi: VecField,
    /// `e = A + G φ` at the Gauss points.
    pub strain: SymField,
    /// `σ = C e` at the Gauss points.
    pub stress: SymField,
    /// Relative residual `‖Gᵀ W C (A + G φ)‖` against the element load scale.
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

impl CellSolution {
    pub fn displacement(&self) -> LPField {
        LPField::new(self.affine, self.phi.clone())
    }
}

/// Operators of the cellular problem for one material, reusable across load cases.
#[derive(Debug, Clone)]
pub struct CellProblem<'a> {
    map: &'a MaterialMap,
    grad: SymGradOp,
    stiffness: ElementOperator,
}

impl<'a> CellProblem<'a> {
    pub fn new(map: &'a MaterialMap) -> Self {
        Self {
            map,
            grad: SymGradOp::new(map.cell),
            stiffness: ElementOperator::stiffness(map),
        }
    }

    pub fn material(&self) -> &MaterialMap {
        self.map
    }

    pub fn gradient(&self) -> &SymGradOp {
        &self.grad
    }

    pub fn stiffness(&self) -> &ElementOperator {
        &self.stiffness
    }

    /// Find the zero-mean periodic `φ` with `Gᵀ W C (A + G φ) = 0`.
    pub fn solve(&self, affine: MandelVec6, tol: f64, max_iter: usize) -> Result<CellSolution> {
        let cell = self.map.cell;
        let macro_stress = self.map.apply(&SymField::constant(cell, affine))?;
        // K φ = −Gᵀ W C A = div_w(C A)
        let rhs = self.grad.weak_divergence(&macro_stress)?.to_flat();
        let opts = CgOptions {
            tol,
            max_iter,
            deflate_translations: true,
            reference_norm: Some(self.grad.element_load_norm(&macro_stress)),
        };
        let out = deflated_pcg(&self.stiffness, &rhs, None, &opts)?;
        let mut phi = VecField::from_flat(cell, &out.x);
        phi.remove_mean();
        let strain = self.grad.apply_periodic(&phi)?.shifted(affine);
        let stress = self.map.apply(&strain)?;
        Ok(CellSolution {
            affine,
            phi,
            strain,
            stress,
            residual: out.residual,
            iterations: out.iterations,
            history: out.history,
        })
    }
}

/// Solve the cellular problem for macroscopic strain `A`.
pub fn solve_cell_problem(
    map: &MaterialMap,
    affine: MandelVec6,
    tol: f64,
    max_iter: usize,
) -> Result<CellSolution> {
    CellProblem::new(map).solve(affine, tol, max_iter)
}

/// Strain energy `inner(C e, e)` of `e = A + G φ`.
pub fn energy(map: &MaterialMap, affine: MandelVec6, phi: &VecField) -> Result<f64> {
    let e = SymGradOp::new(map.cell).apply_periodic(phi)?.shifted(affine);
    crate::cell::inner(&map.apply(&e)?, &e)
}
