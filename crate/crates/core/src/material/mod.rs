//! Voxelwise elasticity tensors, compliances and the Voigt–Reuss bounds.

mod io;

pub use io::{
    load_microstructure, load_phase_table, parse_microstructure, parse_phase_table,
    write_microstructure, PhaseSpec, PhaseTable, HEADER_LEN, MICROSTRUCTURE_MAGIC,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cell::{Cell, MandelMat66, SymField};
#[cfg(test)]
use crate::cell::MandelVec6;
use crate::error::{Error, Result};

/// Mandel matrix of the isotropic tensor `λ I⊗I + 2μ 𝕀`.
///
/// Its eigenvalues are `3λ + 2μ` on the hydrostatic axis and `2μ` on the five
/// deviatoric directions.
pub fn isotropic_tensor(lambda: f64, mu: f64) -> Result<MandelMat66> {
    if !(mu > 0.0 && 3.0 * lambda + 2.0 * mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
        return Err(Error::Parameter(format!(
            "isotropic moduli are not positive definite: lambda = {lambda}, mu = {mu}"
        )));
    }
    let mut c = MandelMat66::zeros();
    for i in 0..3 {
        for j in 0..3 {
            c.0[(i, j)] = lambda;
        }
    }
    for m in 0..6 {
        c.0[(m, m)] += 2.0 * mu;
    }
    Ok(c)
}

/// Compliance `B = C⁻¹`.
pub fn compliance(c: &MandelMat66) -> Result<MandelMat66> {
    c.inverse_spd()
}

/// A constituent of the microstructure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    stiffness: MandelMat66,
    #[serde(skip_serializing_if = "Option::is_none")]
    lame: Option<(f64, f64)>,
}

impl Phase {
    pub fn isotropic(lambda: f64, mu: f64) -> Result<Self> {
        Ok(Self {
            stiffness: isotropic_tensor(lambda, mu)?,
            lame: Some((lambda, mu)),
        })
    }

    /// Anisotropic phase from its Mandel matrix, which must be symmetric positive definite.
    pub fn anisotropic(stiffness: MandelMat66) -> Result<Self> {
        if !stiffness.is_symmetric(1e-12) {
            return Err(Error::Parameter(format!(
                "phase tensor is not symmetric (relative asymmetry {:e})",
                stiffness.asymmetry()
            )));
        }
        let min = stiffness.min_eigenvalue();
        if !(min > 0.0) {
            return Err(Error::Parameter(format!(
                "phase tensor is not positive definite (smallest eigenvalue {min:e})"
            )));
        }
        Ok(Self {
            stiffness,
            lame: None,
        })
    }

    pub fn stiffness(&self) -> &MandelMat66 {
        &self.stiffness
    }

    /// Lamé parameters, when the phase was built as isotropic.
    pub fn lame(&self) -> Option<(f64, f64)> {
        self.lame
    }
}

/// Phase assignment for every voxel of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialMap {
    pub cell: Cell,
    phase_ids: Vec<u8>,
    phases: Vec<Phase>,
}

impl MaterialMap {
    pub fn new(cell: Cell, phase_ids: Vec<u8>, phases: Vec<Phase>) -> Result<Self> {
        if phase_ids.len() != cell.grid.element_count() {
            return Err(Error::Dimension(format!(
                "material map needs {} voxels, got {}",
                cell.grid.element_count(),
                phase_ids.len()
            )));
        }
        if phases.is_empty() {
            return Err(Error::Parameter("material map has no phases".into()));
        }
        if let Some((voxel, id)) = phase_ids
            .iter()
            .enumerate()
            .find(|(_, &id)| id as usize >= phases.len())
        {
            return Err(Error::Ingestion(format!(
                "voxel {voxel} refers to phase {id}, but only {} phases are defined",
                phases.len()
            )));
        }
        for (k, p) in phases.iter().enumerate() {
            let min = p.stiffness.min_eigenvalue();
            if !(min > 0.0) {
                return Err(Error::Parameter(format!(
                    "phase {k} is not positive definite (smallest eigenvalue {min:e})"
                )));
            }
        }
        Ok(Self {
            cell,
            phase_ids,
            phases,
        })
    }

    pub fn homogeneous(cell: Cell, phase: Phase) -> Self {
        Self {
            cell,
            phase_ids: vec![0; cell.grid.element_count()],
            phases: vec![phase],
        }
    }

    /// Rank-one laminate: voxels whose index along `direction` is below
    /// `round(θ·n)` get `phase1`, the rest `phase2`. Interfaces are element faces.
    pub fn laminate(
        cell: Cell,
        phase1: Phase,
        phase2: Phase,
        fraction: f64,
        direction: usize,
    ) -> Result<Self> {
        if direction > 2 {
            return Err(Error::Parameter(format!(
                "laminate direction must be 0, 1 or 2, got {direction}"
            )));
        }
        let n = cell.grid.dims()[direction];
        let layers = Self::laminate_layers(fraction, n)?;
        let ids = (0..cell.grid.element_count())
            .map(|e| u8::from(cell.grid.coords(e)[direction] >= layers))
            .collect();
        Self::new(cell, ids, vec![phase1, phase2])
    }

    /// Number of phase-1 layers for a volume fraction, requiring exact alignment
    /// of the interfaces with element faces.
    pub fn laminate_layers(fraction: f64, n: usize) -> Result<usize> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Parameter(format!(
                "laminate fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let layers = (fraction * n as f64).round() as usize;
        if ((layers as f64) - fraction * n as f64).abs() > 1e-9 || layers == 0 || layers == n {
            return Err(Error::Parameter(format!(
                "laminate fraction {fraction} does not put interfaces on element faces of a {n}-voxel grid"
            )));
        }
        Ok(layers)
    }

    /// Each voxel independently takes `phase1` with probability `fraction`.
    pub fn random_two_phase(
        cell: Cell,
        phase1: Phase,
        phase2: Phase,
        fraction: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::Parameter(format!(
                "volume fraction must lie in [0, 1], got {fraction}"
            )));
        }
        let ids = (0..cell.grid.element_count())
            .map(|_| u8::from(rng.random::<f64>() >= fraction))
            .collect();
        Self::new(cell, ids, vec![phase1, phase2])
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn phase_ids(&self) -> &[u8] {
        &self.phase_ids
    }

    #[inline]
    pub fn phase_of(&self, element: usize) -> u8 {
        self.phase_ids[element]
    }

    #[inline]
    pub fn stiffness_at(&self, element: usize) -> &MandelMat66 {
        &self.phases[self.phase_ids[element] as usize].stiffness
    }

    /// Volume fraction of every phase.
    pub fn fractions(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.phases.len()];
        for &id in &self.phase_ids {
            counts[id as usize] += 1;
        }
        let n = self.phase_ids.len() as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }

    /// Pointwise `σ = C(y)·e(y)`.
    pub fn apply(&self, e: &SymField) -> Result<SymField> {
        self.cell.check_same(&e.cell, "material action")?;
        Ok(e.map(|q, v| self.stiffness_at(q / 8).apply(v)))
    }

    /// Same microstructure on a grid refined `factor` times per direction.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let grid = self.cell.grid.refined(factor)?;
        let cell = Cell::new(self.cell.lattice, grid);
        let ids = (0..grid.element_count())
            .map(|e| {
                let [i, j, k] = grid.coords(e);
                self.phase_ids[self.cell.grid.wrap(
                    (i / factor) as isize,
                    (j / factor) as isize,
                    (k / factor) as isize,
                )]
            })
            .collect();
        Self::new(cell, ids, self.phases.clone())
    }

    /// Smallest eigenvalue over all phase tensors.
    pub fn min_eigenvalue(&self) -> f64 {
        self.phases
            .iter()
            .map(|p| p.stiffness.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Arithmetic mean of `C` and inverse of the arithmetic mean of `B = C⁻¹`.
pub fn voigt_reuss(m: &MaterialMap) -> Result<(MandelMat66, MandelMat66)> {
    let fractions = m.fractions();
    let mut voigt = MandelMat66::zeros();
    let mut mean_compliance = MandelMat66::zeros();
    for (phase, &f) in m.phases.iter().zip(&fractions) {
        if f == 0.0 {
            continue;
        }
        voigt = voigt + f * phase.stiffness;
        mean_compliance = mean_compliance + f * compliance(&phase.stiffness)?;
    }
    let reuss = compliance(&mean_compliance)?;
    Ok((voigt, reuss))
}
