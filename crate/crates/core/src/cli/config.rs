use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cell::{Cell, Grid, Lattice, MandelMat66};
use crate::error::{Error, Result};
use crate::homogenize::CheckThresholds;
use crate::material::{load_microstructure, load_phase_table};
use crate::material::{MaterialMap, Phase};

/// Parameters of one phase in a built-in material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PhaseParams {
    Isotropic { lambda: f64, mu: f64 },
    /// Upper triangle of the Mandel matrix, row by row (21 entries).
    Mandel { mandel: Vec<f64> },
}

impl PhaseParams {
    pub fn to_phase(&self) -> Result<Phase> {
        match self {
            PhaseParams::Isotropic { lambda, mu } => Phase::isotropic(*lambda, *mu),
            PhaseParams::Mandel { mandel } => {
                Phase::anisotropic(MandelMat66::from_upper_triangle(mandel)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialSource {
    Homogeneous {
        phase: PhaseParams,
    },
    /// Layers normal to a lattice direction; phase 1 fills the fraction
    /// nearest the origin.
    Laminate {
        phase1: PhaseParams,
        phase2: PhaseParams,
        fraction: f64,
        direction: usize,
    },
    RandomTwoPhase {
        phase1: PhaseParams,
        phase2: PhaseParams,
        fraction: f64,
        /// Defaults to the run seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Binary microstructure plus a JSON phase table.
    File {
        microstructure: PathBuf,
        phases: PathBuf,
    },
}

impl Default for MaterialSource {
    fn default() -> Self {
        MaterialSource::RandomTwoPhase {
            phase1: PhaseParams::Isotropic { lambda: 10.0, mu: 10.0 },
            phase2: PhaseParams::Isotropic { lambda: 1.0, mu: 1.0 },
            fraction: 0.5,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    /// JSON report; printed to stdout when absent.
    pub report: Option<PathBuf>,
    /// CSV records (oscillation or trace audits).
    pub csv: Option<PathBuf>,
    /// Legacy VTK structured-points export.
    pub vtk: Option<PathBuf>,
    /// Binary field outputs of `donati`, written as `<prefix>.grad.bin` and
    /// `<prefix>.residual.bin`.
    pub fields: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DonatiOptions {
    /// Binary strain field to split; a seeded synthetic field when absent.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KornOptions {
    pub max_steps: usize,
    /// Relative Ritz-value change per step at which an estimate is accepted.
    pub ritz_tol: f64,
}

impl Default for KornOptions {
    fn default() -> Self {
        Self {
            max_steps: 400,
            ritz_tol: crate::analysis::RITZ_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DivCurlOptions {
    /// Largest oscillation index of the doubling schedule `1, 2, 4, …`.
    pub schedule_max: usize,
    /// Stress row paired with the displacement gradient row.
    pub row: usize,
}

impl Default for DivCurlOptions {
    fn default() -> Self {
        Self {
            schedule_max: 64,
            row: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Random cases per property.
    pub cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { cases: 5 }
    }
}

/// Default solver tolerance of CLI runs. Tighter than the library default so
/// that the stress-average route meets the `1e-10` self-check thresholds.
pub const CLI_TOL: f64 = 1e-10;

/// Everything a run depends on. A run is reproducible from its config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: [usize; 3],
    /// Lattice vectors as rows.
    pub lattice: [[f64; 3]; 3],
    pub material: MaterialSource,
    pub tol: f64,
    /// Defaults to `max(1000, 10·(3N)^(1/3))`.
    pub max_iter: Option<usize>,
    /// Thresholds of the homogenization self-checks.
    pub checks: CheckThresholds,
    pub seed: u64,
    pub threads: Option<usize>,
    pub deterministic: bool,
    pub outputs: OutputPaths,
    pub donati: DonatiOptions,
    pub korn: KornOptions,
    pub divcurl: DivCurlOptions,
    pub verify: VerifyOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: [8, 8, 8],
            lattice: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            material: MaterialSource::default(),
            tol: CLI_TOL,
            max_iter: None,
            checks: CheckThresholds::default(),
            seed: 42,
            threads: None,
            deterministic: false,
            outputs: OutputPaths::default(),
            donati: DonatiOptions::default(),
            korn: KornOptions::default(),
            divcurl: DivCurlOptions::default(),
            verify: VerifyOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn cell(&self) -> Result<Cell> {
        let [g1, g2, g3] = self.lattice;
        let grid = Grid::new(self.grid[0], self.grid[1], self.grid[2])
            .map_err(|e| Error::Config(e.to_string()))?;
        let lattice = Lattice::new(g1, g2, g3).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Cell::new(lattice, grid))
    }

    pub fn max_iter(&self, cell: &Cell) -> usize {
        self.max_iter
            .unwrap_or_else(|| crate::solver::default_max_iter(cell))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        if !(self.korn.ritz_tol > 0.0) {
            return Err(Error::Config(format!("korn.ritz_tol must be positive, got {}", self.korn.ritz_tol)));
        }
        if self.divcurl.row > 2 {
            return Err(Error::Config(format!("divcurl.row must be 0, 1 or 2, got {}", self.divcurl.row)));
        }
        if self.divcurl.schedule_max == 0 {
            return Err(Error::Config("divcurl.schedule_max must be positive".into()));
        }
        self.cell().map(|_| ())
    }

    /// Build the material map. Invalid parameters and unreadable or corrupt
    /// files surface as configuration errors.
    pub fn material_map(&self) -> Result<MaterialMap> {
        let cell = self.cell()?;
        let as_config = |e: Error| match e {
            Error::Solver { .. } => e,
            other => Error::Config(other.to_string()),
        };
        let build = || -> Result<MaterialMap> {
            Ok(match &self.material {
            MaterialSource::Homogeneous { phase } => MaterialMap::homogeneous(cell, phase.to_phase()?),
            MaterialSource::Laminate {
                phase1,
                phase2,
                fraction,
                direction,
            } => MaterialMap::laminate(cell, phase1.to_phase()?, phase2.to_phase()?, *fraction, *direction)?,
            MaterialSource::RandomTwoPhase {
                phase1,
                phase2,
                fraction,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(self.seed));
                MaterialMap::random_two_phase(cell, phase1.to_phase()?, phase2.to_phase()?, *fraction, &mut rng)?
            }
            MaterialSource::File {
                microstructure,
                phases,
            } => {
                let table = load_phase_table(phases)?;
                load_microstructure(microstructure, cell, &table)?
            }
        })
        };
        build().map_err(as_config)
    }
}
