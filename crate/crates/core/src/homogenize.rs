//! Homogenized elasticity tensor from six cellular solves.
//!
//! Column `k` of `C^H` is the cell average of the stress produced by the
//! `k`-th Mandel unit strain. The same tensor is also assembled from energy
//! products `(1/|Y|)·inner(C e_j, e_k)`; both are always computed and their
//! agreement is part of the report.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::{cell_average, inner, Cell, MandelMat66, MandelVec6};
use crate::error::{Error, Result};
use crate::material::{voigt_reuss, MaterialMap};
use crate::solver::{CellProblem, CellSolution};

/// Thresholds of the report's standing self-checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckThresholds {
    /// Relative asymmetry of `C^H`.
    pub symmetry: f64,
    /// Relative difference between the stress-average and energy routes.
    pub routes: f64,
    /// Smallest allowed eigenvalue of `voigt − C^H` and `C^H − reuss`,
    /// relative to the largest Voigt eigenvalue.
    pub bounds_slack: f64,
}

impl Default for CheckThresholds {
    fn default() -> Self {
        Self {
            symmetry: 1e-10,
            routes: 1e-10,
            bounds_slack: -1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossChecks {
    pub symmetry_defect: f64,
    pub route_defect: f64,
    /// Smallest eigenvalue of `voigt − C^H`, relative.
    pub voigt_slack: f64,
    /// Smallest eigenvalue of `C^H − reuss`, relative.
    pub reuss_slack: f64,
    pub thresholds: CheckThresholds,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadCase {
    pub index: usize,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialSummary {
    pub phase_count: usize,
    pub fractions: Vec<f64>,
    /// Upper triangle of each phase's Mandel matrix.
    pub phases: Vec<Vec<f64>>,
}

/// Homogenization results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomReport {
    /// `C^H` from averages of stress.
    pub ch_stress: MandelMat66,
    /// `C^H` from energy products.
    pub ch_energy: MandelMat66,
    pub voigt: MandelMat66,
    pub reuss: MandelMat66,
    pub loads: Vec<LoadCase>,
    pub grid: [usize; 3],
    pub lattice: [[f64; 3]; 3],
    pub material: MaterialSummary,
    pub tol: f64,
    pub checks: CrossChecks,
}

impl HomReport {
    pub fn tensor(&self) -> &MandelMat66 {
        &self.ch_stress
    }
}

/// `C^H` with the default self-check thresholds.
pub fn homogenized_tensor(map: &MaterialMap, tol: f64) -> Result<HomReport> {
    let max_iter = crate::solver::default_max_iter(&map.cell);
    Ok(homogenize_with_solutions(map, tol, max_iter, CheckThresholds::default())?.0)
}

/// Like [`homogenized_tensor`], also returning the six cell solutions.
pub fn homogenize_with_solutions(
    map: &MaterialMap,
    tol: f64,
    max_iter: usize,
    thresholds: CheckThresholds,
) -> Result<(HomReport, Vec<CellSolution>)> {
    let problem = CellProblem::new(map);
    let solutions = (0..6)
        .into_par_iter()
        .map(|k| {
            problem
                .solve(MandelVec6::basis(k), tol, max_iter)
                .map_err(|e| e.with_solver_context(&format!("load case {k}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let volume = map.cell.volume();
    let mut ch_stress = MandelMat66::zeros();
    let mut ch_energy = MandelMat66::zeros();
    for (k, sol) in solutions.iter().enumerate() {
        let s = cell_average(&sol.stress);
        for j in 0..6 {
            ch_stress.0[(j, k)] = s[j];
        }
    }
    for j in 0..6 {
        for k in 0..6 {
            ch_energy.0[(j, k)] = inner(&solutions[j].stress, &solutions[k].strain)? / volume;
        }
    }

    let (voigt, reuss) = voigt_reuss(map)?;
    let checks = cross_checks(&ch_stress, &ch_energy, &voigt, &reuss, thresholds);
    let report = HomReport {
        ch_stress,
        ch_energy,
        voigt,
        reuss,
        loads: solutions
            .iter()
            .enumerate()
            .map(|(index, s)| LoadCase {
                index,
                residual: s.residual,
                iterations: s.iterations,
            })
            .collect(),
        grid: map.cell.grid.dims(),
        lattice: map.cell.lattice.vectors(),
        material: MaterialSummary {
            phase_count: map.phases().len(),
            fractions: map.fractions(),
            phases: map
                .phases()
                .iter()
                .map(|p| p.stiffness().upper_triangle())
                .collect(),
        },
        tol,
        checks,
    };
    Ok((report, solutions))
}

fn cross_checks(
    ch: &MandelMat66,
    ch_energy: &MandelMat66,
    voigt: &MandelMat66,
    reuss: &MandelMat66,
    thresholds: CheckThresholds,
) -> CrossChecks {
    let scale = voigt.eigenvalues()[5];
    let sym = MandelMat66((ch.0 + ch.0.transpose()) * 0.5);
    let symmetry_defect = ch.asymmetry();
    let route_defect = (ch.0 - ch_energy.0).norm() / ch.norm();
    let voigt_slack = (*voigt - sym).min_eigenvalue() / scale;
    let reuss_slack = (sym - *reuss).min_eigenvalue() / scale;
    let passed = symmetry_defect <= thresholds.symmetry
        && route_defect <= thresholds.routes
        && voigt_slack >= thresholds.bounds_slack
        && reuss_slack >= thresholds.bounds_slack;
    CrossChecks {
        symmetry_defect,
        route_defect,
        voigt_slack,
        reuss_slack,
        thresholds,
        passed,
    }
}

fn sym_dyad(a: &Vector3<f64>, n: &Vector3<f64>) -> MandelVec6 {
    MandelVec6::from_symmetric(&((a * n.transpose() + n * a.transpose()) * 0.5))
}

fn traction(c: &MandelMat66, e: &MandelVec6, n: &Vector3<f64>) -> Vector3<f64> {
    c.apply(e).to_matrix() * n
}

/// Acoustic tensor `K(n)ᵢₖ = Cᵢⱼₖₗ nⱼ nₗ`.
fn acoustic(c: &MandelMat66, n: &Vector3<f64>) -> Matrix3<f64> {
    let mut k = Matrix3::zeros();
    for col in 0..3 {
        let t = traction(c, &sym_dyad(&Vector3::ith(col, 1.0), n), n);
        k.set_column(col, &t);
    }
    k
}

/// Exact effective tensor of a rank-one laminate with unit normal `normal`,
/// phase 1 occupying the volume fraction `fraction`.
///
/// Each layer carries the strain `A + sym(a ⊗ n)`. The jumps `a₁ = (1−θ)c`,
/// `a₂ = −θc` keep the average strain at `A` and keep tangential strains
/// continuous; traction continuity `(C₁e₁)n = (C₂e₂)n` then gives the 3×3 system
/// `((1−θ)K₁(n) + θK₂(n)) c = (C₂A − C₁A) n`.
pub fn laminate_oracle(
    phase1: &MandelMat66,
    phase2: &MandelMat66,
    fraction: f64,
    normal: &Vector3<f64>,
) -> Result<MandelMat66> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "laminate fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let len = normal.norm();
    if !(len > 0.0) {
        return Err(Error::Parameter("laminate normal is zero".into()));
    }
    for (k, c) in [phase1, phase2].iter().enumerate() {
        if !(c.min_eigenvalue() > 0.0) {
            return Err(Error::Parameter(format!(
                "laminate phase {} is not positive definite",
                k + 1
            )));
        }
    }
    let n = normal / len;
    let theta = fraction;
    let system = acoustic(phase1, &n) * (1.0 - theta) + acoustic(phase2, &n) * theta;
    let lu = system.lu();
    let mut out = MandelMat66::zeros();
    for k in 0..6 {
        let a = MandelVec6::basis(k);
        let rhs = traction(phase2, &a, &n) - traction(phase1, &a, &n);
        let c = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Inversion("laminate acoustic system is singular".into()))?;
        let jump = sym_dyad(&c, &n);
        let e1 = a + jump.scale(1.0 - theta);
        let e2 = a - jump.scale(theta);
        let s = phase1.apply(&e1).scale(theta) + phase2.apply(&e2).scale(1.0 - theta);
        for j in 0..6 {
            out.0[(j, k)] = s[j];
        }
    }
    Ok(out)
}

/// Laminate oracle for layers stacked along lattice direction `direction`
/// of `cell`: the interfaces are spanned by the other two lattice vectors.
pub fn laminate_oracle_for_cell(
    cell: &Cell,
    phase1: &MandelMat66,
    phase2: &MandelMat66,
    fraction: f64,
    direction: usize,
) -> Result<MandelMat66> {
    if direction > 2 {
        return Err(Error::Parameter(format!(
            "lattice direction must be 0, 1 or 2, got {direction}"
        )));
    }
    laminate_oracle(phase1, phase2, fraction, &cell.lattice.face_normal(direction))
}

/// Relative Frobenius distance `‖a − b‖ / ‖b‖`.
pub fn relative_error(a: &MandelMat66, b: &MandelMat66) -> f64 {
    (a.0 - b.0).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{Grid, Lattice};
    use crate::material::{isotropic_tensor, Phase};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn homogeneous_is_exact() {
        let cell = Cell::unit_cube(4).unwrap();
        let p = Phase::isotropic(1.2, 0.9).unwrap();
        let r = homogenized_tensor(&MaterialMap::homogeneous(cell, p), 1e-8).unwrap();
        assert!(relative_error(&r.ch_stress, p.stiffness()) <= 1e-12);
        assert!(r.checks.passed);
        assert!(r.loads.iter().all(|l| l.iterations <= 1));
    }

    #[test]
    fn oracle_limits_and_identity() {
        let c1 = isotropic_tensor(10.0, 10.0).unwrap();
        let c2 = isotropic_tensor(1.0, 1.0).unwrap();
        let n = Vector3::new(1.0, 0.0, 0.0);
        let near0 = laminate_oracle(&c1, &c2, 1e-9, &n).unwrap();
        assert!(relative_error(&near0, &c2) < 1e-7);
        for theta in [0.1, 0.5, 0.77] {
            let same = laminate_oracle(&c1, &c1, theta, &n).unwrap();
            assert!(relative_error(&same, &c1) < 1e-14);
        }
        assert!(laminate_oracle(&c1, &c2, 0.0, &n).is_err());
    }

    #[test]
    fn oracle_shear_is_harmonic_mean() {
        let (mu1, mu2, theta) = (3.0, 0.5, 0.3);
        let c1 = isotropic_tensor(1.0, mu1).unwrap();
        let c2 = isotropic_tensor(2.0, mu2).unwrap();
        let ch = laminate_oracle(&c1, &c2, theta, &Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let harmonic = 1.0 / (theta / mu1 + (1.0 - theta) / mu2);
        // Mandel shear slots 4 (13) and 5 (12) involve the normal e1
        assert!((ch.0[(5, 5)] - 2.0 * harmonic).abs() < 1e-13);
        assert!((ch.0[(4, 4)] - 2.0 * harmonic).abs() < 1e-13);
        // the in-plane shear (23) is the arithmetic mean
        let arith = theta * mu1 + (1.0 - theta) * mu2;
        assert!((ch.0[(3, 3)] - 2.0 * arith).abs() < 1e-13);
        assert!(ch.is_symmetric(1e-14));
    }

    #[test]
    fn laminate_matches_oracle_on_skewed_lattice() {
        let l = Lattice::new([1.0, 0.0, 0.0], [0.4, 1.0, 0.0], [0.2, 0.1, 1.0]).unwrap();
        let cell = Cell::new(l, Grid::new(4, 3, 3).unwrap());
        let p1 = Phase::isotropic(10.0, 10.0).unwrap();
        let p2 = Phase::isotropic(1.0, 1.0).unwrap();
        let map = MaterialMap::laminate(cell, p1, p2, 0.5, 0).unwrap();
        let r = homogenized_tensor(&map, 1e-12).unwrap();
        let oracle =
            laminate_oracle_for_cell(&cell, p1.stiffness(), p2.stiffness(), 0.5, 0).unwrap();
        assert!(relative_error(&r.ch_stress, &oracle) <= 1e-8, "{}", relative_error(&r.ch_stress, &oracle));
    }

    #[test]
    fn energy_form_decreases_under_refinement() {
        let cell = Cell::unit_cube(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p1 = Phase::isotropic(5.0, 4.0).unwrap();
        let p2 = Phase::isotropic(1.0, 0.5).unwrap();
        let coarse = MaterialMap::random_two_phase(cell, p1, p2, 0.5, &mut rng).unwrap();
        let fine = coarse.refined(2).unwrap();
        let rc = homogenized_tensor(&coarse, 1e-12).unwrap();
        let rf = homogenized_tensor(&fine, 1e-12).unwrap();
        let diff = MandelMat66(rc.ch_energy.0 - rf.ch_energy.0);
        assert!(diff.min_eigenvalue() >= -1e-8);
    }
}
