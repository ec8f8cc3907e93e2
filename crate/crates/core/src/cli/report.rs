use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::analysis::{OscillationRecord, TraceReport};
use crate::cell::SymField;
use crate::error::Result;
use crate::material::MaterialMap;

use super::config::RunConfig;

pub const SCHEMA: &str = "cellhom/1";

/// Pretty JSON with every float written to 17 significant digits.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize with the report float format.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| crate::Error::Config(format!("report serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Common envelope of every JSON document the CLI writes.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
    pub seed: u64,
    pub threads: usize,
    pub deterministic: bool,
    pub config: &'a RunConfig,
    pub passed: bool,
    pub result: T,
}

pub fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Write `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Columns `series,row,n,integral,target,error`.
pub fn oscillation_csv(series: &[(&str, Option<usize>, &[OscillationRecord])]) -> String {
    let mut s = String::from("series,row,n,integral,target,error\n");
    for (name, row, records) in series {
        let row = row.map(|r| r.to_string()).unwrap_or_default();
        for r in *records {
            s.push_str(&format!(
                "{name},{row},{},{:.16e},{:.16e},{:.16e}\n",
                r.n, r.integral, r.target, r.error
            ));
        }
    }
    s
}

/// Columns `kind,direction,p,q,jump_x,jump_y,jump_z,mismatch`; `p`, `q` index
/// the face lattice with the lower remaining direction first.
pub fn trace_csv(reports: &[(&str, &TraceReport)]) -> String {
    let mut s = String::from("kind,direction,p,q,jump_x,jump_y,jump_z,mismatch\n");
    for (kind, r) in reports {
        for (idx, (j, m)) in r.jumps.iter().zip(&r.mismatch).enumerate() {
            let (p, q) = (idx % r.face_dims[0], idx / r.face_dims[0]);
            s.push_str(&format!(
                "{kind},{},{p},{q},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.direction, j[0], j[1], j[2], m
            ));
        }
    }
    s
}

/// Legacy ASCII VTK structured points with one value per voxel: the phase id
/// and, when given, the element-averaged Mandel components of symmetric fields.
/// The lattice is written as an axis-aligned box with the lengths of the lattice
/// vectors; skewed geometry is not represented.
pub fn write_vtk(path: &Path, map: &MaterialMap, fields: &[(&str, &SymField)]) -> Result<()> {
    let cell = map.cell;
    let [n1, n2, n3] = cell.grid.dims();
    let lengths: Vec<f64> = (0..3).map(|k| cell.lattice.vector(k).norm()).collect();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\ncellhom voxel data\nASCII\nDATASET STRUCTURED_POINTS\n");
    s.push_str(&format!("DIMENSIONS {} {} {}\n", n1 + 1, n2 + 1, n3 + 1));
    s.push_str("ORIGIN 0 0 0\n");
    s.push_str(&format!(
        "SPACING {:e} {:e} {:e}\n",
        lengths[0] / n1 as f64,
        lengths[1] / n2 as f64,
        lengths[2] / n3 as f64
    ));
    let count = cell.grid.element_count();
    s.push_str(&format!("CELL_DATA {count}\nSCALARS phase int 1\nLOOKUP_TABLE default\n"));
    for id in map.phase_ids() {
        s.push_str(&format!("{id}\n"));
    }
    for (name, field) in fields {
        cell.check_same(&field.cell, "vtk export")?;
        for m in 0..6 {
            s.push_str(&format!("SCALARS {name}_{m} double 1\nLOOKUP_TABLE default\n"));
            for e in 0..count {
                let mean: f64 = field.values[8 * e..8 * e + 8].iter().map(|v| v[m]).sum::<f64>() / 8.0;
                s.push_str(&format!("{mean:.16e}\n"));
            }
        }
    }
    std::fs::write(path, s)?;
    log::info!("wrote {}", path.display());
    Ok(())
}
