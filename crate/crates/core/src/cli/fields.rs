//! Binary symmetric-field files.
//!
//! Layout: the 16-byte microstructure header (`CHOM`, then `n₁ n₂ n₃` as
//! little-endian `u32`), followed by six little-endian `f64` Mandel components
//! per sample. A file with `n₁n₂n₃` samples holds nodal values in node order;
//! one with `8·n₁n₂n₃` samples holds Gauss-point values, element-major.

use std::path::Path;

use crate::cell::{Cell, MandelVec6, NodalSymField, SymField};
use crate::error::{Error, Result};
use crate::material::{HEADER_LEN, MICROSTRUCTURE_MAGIC};

const SAMPLE_BYTES: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Nodal(NodalSymField),
    Quadrature(SymField),
}

fn encode(dims: [usize; 3], values: &[MandelVec6]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(HEADER_LEN + SAMPLE_BYTES * values.len());
    bytes.extend_from_slice(MICROSTRUCTURE_MAGIC);
    for d in dims {
        bytes.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in values {
        for x in v.0 {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    bytes
}

pub fn encode_quadrature(field: &SymField) -> Vec<u8> {
    encode(field.cell.grid.dims(), &field.values)
}

pub fn encode_nodal(field: &NodalSymField) -> Vec<u8> {
    encode(field.cell.grid.dims(), &field.values)
}

pub fn write_quadrature(path: impl AsRef<Path>, field: &SymField) -> Result<()> {
    std::fs::write(path, encode_quadrature(field))?;
    Ok(())
}

pub fn write_nodal(path: impl AsRef<Path>, field: &NodalSymField) -> Result<()> {
    std::fs::write(path, encode_nodal(field))?;
    Ok(())
}

/// Decode a field for `cell`; the header dimensions must match its grid.
pub fn decode(bytes: &[u8], cell: Cell) -> Result<FieldData> {
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
    }
    if dims != cell.grid.dims() {
        return Err(Error::Format {
            offset: 4,
            message: format!("header declares {dims:?} but the grid is {:?}", cell.grid.dims()),
        });
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() % SAMPLE_BYTES != 0 {
        let complete = body.len() / SAMPLE_BYTES;
        return Err(Error::Format {
            offset: HEADER_LEN + complete * SAMPLE_BYTES,
            message: format!(
                "truncated sample {complete}: {} trailing bytes, samples are {SAMPLE_BYTES} bytes",
                body.len() % SAMPLE_BYTES
            ),
        });
    }
    let count = body.len() / SAMPLE_BYTES;
    let nodes = cell.grid.node_count();
    let points = cell.grid.quadrature_count();
    if count != nodes && count != points {
        return Err(Error::Format {
            offset: bytes.len(),
            message: format!(
                "{count} samples match neither the {nodes} nodes nor the {points} Gauss points of the grid"
            ),
        });
    }
    let mut values = Vec::with_capacity(count);
    for (s, chunk) in body.chunks_exact(SAMPLE_BYTES).enumerate() {
        let mut v = [0.0; 6];
        for (m, slot) in v.iter_mut().enumerate() {
            let at = 8 * m;
            *slot = f64::from_le_bytes(chunk[at..at + 8].try_into().unwrap());
            if !slot.is_finite() {
                return Err(Error::Format {
                    offset: HEADER_LEN + s * SAMPLE_BYTES + at,
                    message: format!("non-finite component {m} of sample {s}"),
                });
            }
        }
        values.push(MandelVec6(v));
    }
    Ok(if count == nodes {
        FieldData::Nodal(NodalSymField { cell, values })
    } else {
        FieldData::Quadrature(SymField::from_values(cell, values)?)
    })
}

pub fn read(path: impl AsRef<Path>, cell: Cell) -> Result<FieldData> {
    decode(&std::fs::read(path)?, cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trips() {
        let cell = Cell::unit_cube(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = SymField::random(cell, &mut rng);
        assert_eq!(decode(&encode_quadrature(&q), cell).unwrap(), FieldData::Quadrature(q));
        let n = NodalSymField::from_fn(cell, |y| MandelVec6::basis(1).scale(y[2]));
        assert_eq!(decode(&encode_nodal(&n), cell).unwrap(), FieldData::Nodal(n));
    }

    #[test]
    fn errors_carry_offsets() {
        let cell = Cell::unit_cube(2).unwrap();
        let n = NodalSymField::from_fn(cell, |_| MandelVec6::identity());
        let good = encode_nodal(&n);

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad, cell), Err(Error::Format { offset: 0, .. })));

        let truncated = &good[..good.len() - 5];
        match decode(truncated, cell) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, HEADER_LEN + 7 * SAMPLE_BYTES),
            other => panic!("{other:?}"),
        }

        let mut nan = good.clone();
        let at = HEADER_LEN + 3 * SAMPLE_BYTES + 16;
        nan[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&nan, cell), Err(Error::Format { offset, .. }) if offset == at));

        let other = Cell::unit_cube(3).unwrap();
        assert!(matches!(decode(&good, other), Err(Error::Format { offset: 4, .. })));

        let extra = [good.clone(), vec![0u8; SAMPLE_BYTES]].concat();
        assert!(matches!(decode(&extra, cell), Err(Error::Format { .. })));
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = decode(&bytes, Cell::unit_cube(2).unwrap());
        }
    }
}
