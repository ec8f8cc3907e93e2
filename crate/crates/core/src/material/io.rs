//! Microstructure and phase-table files.
//!
//! Microstructure: 16-byte little-endian header (`"CHOM"`, `u32 n1`, `u32 n2`,
//! `u32 n3`) followed by `n1·n2·n3` unsigned 8-bit phase ids, `i` fastest.
//!
//! Phase table: a JSON document
//! `{"phases": [{"id": 0, "lambda": 1.0, "mu": 1.0}, {"id": 1, "mandel": [21 numbers]}]}`
//! where `mandel` lists the upper triangle of the 6×6 Mandel matrix row by row.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MaterialMap, Phase};
use crate::cell::{Cell, MandelMat66};
use crate::error::{Error, Result};

pub const MICROSTRUCTURE_MAGIC: &[u8; 4] = b"CHOM";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseSpec {
    Isotropic { id: u8, lambda: f64, mu: f64 },
    Mandel { id: u8, mandel: Vec<f64> },
}

impl PhaseSpec {
    pub fn id(&self) -> u8 {
        match self {
            PhaseSpec::Isotropic { id, .. } | PhaseSpec::Mandel { id, .. } => *id,
        }
    }

    pub fn to_phase(&self) -> Result<Phase> {
        match self {
            PhaseSpec::Isotropic { lambda, mu, .. } => Phase::isotropic(*lambda, *mu),
            PhaseSpec::Mandel { mandel, .. } => {
                Phase::anisotropic(MandelMat66::from_upper_triangle(mandel)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub phases: Vec<PhaseSpec>,
}

impl PhaseTable {
    /// Phases ordered by id. Ids must be exactly `0..count`.
    pub fn to_phases(&self) -> Result<Vec<Phase>> {
        let mut specs: Vec<&PhaseSpec> = self.phases.iter().collect();
        specs.sort_by_key(|s| s.id());
        for (k, s) in specs.iter().enumerate() {
            if s.id() as usize != k {
                return Err(Error::Ingestion(format!(
                    "phase table ids must be 0..{} without gaps or duplicates (found id {} at position {k})",
                    specs.len(),
                    s.id()
                )));
            }
        }
        specs
            .iter()
            .map(|s| {
                s.to_phase()
                    .map_err(|e| Error::Ingestion(format!("phase {}: {e}", s.id())))
            })
            .collect()
    }
}

pub fn parse_phase_table(text: &str) -> Result<PhaseTable> {
    serde_json::from_str(text).map_err(|e| Error::Ingestion(format!("phase table: {e}")))
}

pub fn load_phase_table(path: impl AsRef<Path>) -> Result<PhaseTable> {
    parse_phase_table(&std::fs::read_to_string(path)?)
}

/// Decode a microstructure file body into its dimensions and phase ids.
pub fn parse_microstructure(bytes: &[u8]) -> Result<([usize; 3], Vec<u8>)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format {
            offset: bytes.len(),
            message: format!("file too short for the {HEADER_LEN}-byte header"),
        });
    }
    if &bytes[0..4] != MICROSTRUCTURE_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {:?}, expected \"CHOM\"", &bytes[0..4]),
        });
    }
    let mut dims = [0usize; 3];
    for (d, slot) in dims.iter_mut().enumerate() {
        let at = 4 + 4 * d;
        *slot = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        if *slot == 0 {
            return Err(Error::Format {
                offset: at,
                message: format!("dimension n{} is zero", d + 1),
            });
        }
    }
    let voxels = dims[0] * dims[1] * dims[2];
    let body = &bytes[HEADER_LEN..];
    if body.len() != voxels {
        return Err(Error::Ingestion(format!(
            "voxel count mismatch: header declares {}x{}x{} = {voxels} voxels, file holds {} (data ends at byte {})",
            dims[0],
            dims[1],
            dims[2],
            body.len(),
            bytes.len()
        )));
    }
    Ok((dims, body.to_vec()))
}

/// Read a microstructure file and bind its ids to a phase table.
pub fn load_microstructure(
    path: impl AsRef<Path>,
    cell: Cell,
    table: &PhaseTable,
) -> Result<MaterialMap> {
    let bytes = std::fs::read(path)?;
    let (dims, ids) = parse_microstructure(&bytes)?;
    if dims != cell.grid.dims() {
        return Err(Error::Ingestion(format!(
            "microstructure is {:?} voxels but the grid is {:?}",
            dims,
            cell.grid.dims()
        )));
    }
    let phases = table.to_phases()?;
    if let Some((voxel, id)) = ids
        .iter()
        .enumerate()
        .find(|(_, &id)| id as usize >= phases.len())
    {
        let [i, j, k] = cell.grid.coords(voxel);
        return Err(Error::Ingestion(format!(
            "voxel {voxel} (i={i}, j={j}, k={k}, byte {}) has unknown phase id {id}",
            HEADER_LEN + voxel
        )));
    }
    MaterialMap::new(cell, ids, phases)
}

pub fn write_microstructure(path: impl AsRef<Path>, map: &MaterialMap) -> Result<()> {
    let dims = map.cell.grid.dims();
    let mut bytes = Vec::with_capacity(HEADER_LEN + map.phase_ids().len());
    bytes.extend_from_slice(MICROSTRUCTURE_MAGIC);
    for d in dims {
        bytes.extend_from_slice(&(d as u32).to_le_bytes());
    }
    bytes.extend_from_slice(map.phase_ids());
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_two() -> PhaseTable {
        parse_phase_table(
            r#"{"phases": [
                {"id": 1, "mandel": [2,0,0,0,0,0, 2,0,0,0,0, 2,0,0,0, 2,0,0, 2,0, 2]},
                {"id": 0, "lambda": 1.0, "mu": 0.5}
            ]}"#,
        )
        .unwrap()
    }

    fn header(dims: [u32; 3]) -> Vec<u8> {
        let mut b = MICROSTRUCTURE_MAGIC.to_vec();
        for d in dims {
            b.extend_from_slice(&d.to_le_bytes());
        }
        b
    }

    #[test]
    fn homogeneous_and_striped_files() {
        let dir = tempfile::tempdir().unwrap();
        let cell = Cell::unit_cube(4).unwrap();

        let mut zeros = header([4, 4, 4]);
        zeros.extend(std::iter::repeat(0u8).take(64));
        let p = dir.path().join("zeros.chom");
        std::fs::write(&p, &zeros).unwrap();
        let m = load_microstructure(&p, cell, &table_two()).unwrap();
        assert!(m.phase_ids().iter().all(|&x| x == 0));

        let mut striped = header([4, 4, 4]);
        striped.extend((0..64).map(|v| u8::from(v % 4 >= 2)));
        let p = dir.path().join("striped.chom");
        std::fs::write(&p, &striped).unwrap();
        let m = load_microstructure(&p, cell, &table_two()).unwrap();
        let lam = MaterialMap::laminate(
            cell,
            m.phases()[0],
            m.phases()[1],
            0.5,
            0,
        )
        .unwrap();
        assert_eq!(m.phase_ids(), lam.phase_ids());
    }

    #[test]
    fn ingestion_errors() {
        let cell = Cell::unit_cube(4).unwrap();
        let mut short = header([4, 4, 4]);
        short.extend(std::iter::repeat(0u8).take(63));
        let err = parse_microstructure(&short).unwrap_err();
        assert!(err.to_string().contains("voxel count mismatch"), "{err}");

        let mut bad = header([4, 4, 4]);
        bad[0] = b'X';
        assert!(matches!(parse_microstructure(&bad), Err(Error::Format { offset: 0, .. })));

        let dir = tempfile::tempdir().unwrap();
        let mut unknown = header([4, 4, 4]);
        unknown.extend(std::iter::repeat(0u8).take(64));
        unknown[16 + 5] = 7;
        let p = dir.path().join("u.chom");
        std::fs::write(&p, &unknown).unwrap();
        let err = load_microstructure(&p, cell, &table_two()).unwrap_err();
        assert!(err.to_string().contains("voxel 5"), "{err}");
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let cell = Cell::unit_cube(4).unwrap();
        let phases = table_two().to_phases().unwrap();
        let m = MaterialMap::laminate(cell, phases[0], phases[1], 0.25, 2).unwrap();
        let p = dir.path().join("m.chom");
        write_microstructure(&p, &m).unwrap();
        assert_eq!(load_microstructure(&p, cell, &table_two()).unwrap(), m);
    }

    #[test]
    fn phase_table_gaps_rejected() {
        let t = parse_phase_table(r#"{"phases": [{"id": 1, "lambda": 1.0, "mu": 1.0}]}"#).unwrap();
        assert!(t.to_phases().is_err());
    }
}
