//! Trace audits on opposite faces of the cell and across an interior interface.

use serde::Serialize;

use crate::cell::{corner, Cell, LPField, MandelVec6, SymField, VecField};
use crate::discrete::SymGradOp;
use crate::donati::relative_divergence;
use crate::error::{Error, Result};

/// Relative weak divergence above which flux audits carry a warning.
pub const HDIV_WARN: f64 = 1e-6;

/// Mismatch between identically indexed samples on the two faces normal to
/// one lattice direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    /// Lattice direction `k`; the faces are `ŷ_k = 0` and `ŷ_k = 1`.
    pub direction: usize,
    pub max_mismatch: f64,
    /// Face lattice dimensions, first index fastest.
    pub face_dims: [usize; 2],
    /// Euclidean norm of the jump at every face sample.
    pub mismatch: Vec<f64>,
    /// Jump vector (top minus bottom, or flux sum) at every face sample.
    pub jumps: Vec<[f64; 3]>,
    pub warning: Option<String>,
}

impl TraceReport {
    fn new(direction: usize, face_dims: [usize; 2], jumps: Vec<[f64; 3]>, warning: Option<String>) -> Self {
        let mismatch: Vec<f64> = jumps
            .iter()
            .map(|j| (j[0] * j[0] + j[1] * j[1] + j[2] * j[2]).sqrt())
            .collect();
        let max_mismatch = mismatch.iter().copied().fold(0.0, f64::max);
        Self {
            direction,
            max_mismatch,
            face_dims,
            mismatch,
            jumps,
            warning,
        }
    }

    /// Face-lattice position of the largest mismatch.
    pub fn argmax(&self) -> (usize, usize) {
        let idx = self
            .mismatch
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
            .0;
        (idx % self.face_dims[0], idx / self.face_dims[0])
    }
}

/// The two directions spanning the face normal to `k`.
pub fn face_axes(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn node_index(k: usize, along: isize, p: isize, q: isize) -> [isize; 3] {
    let (a, b) = face_axes(k);
    let mut idx = [0isize; 3];
    idx[k] = along;
    idx[a] = p;
    idx[b] = q;
    idx
}

/// Displacement-like data addressable on the closed node lattice
/// `0..=n` per direction.
pub trait NodeSampled {
    fn cell(&self) -> &Cell;
    fn sample(&self, i: isize, j: isize, k: isize) -> [f64; 3];
}

impl NodeSampled for VecField {
    fn cell(&self) -> &Cell {
        &self.cell
    }

    fn sample(&self, i: isize, j: isize, k: isize) -> [f64; 3] {
        self.at_indices(i, j, k)
    }
}

impl NodeSampled for LPField {
    fn cell(&self) -> &Cell {
        LPField::cell(self)
    }

    fn sample(&self, i: isize, j: isize, k: isize) -> [f64; 3] {
        self.at_indices(i, j, k)
    }
}

/// Nodal samples on the closed lattice `(n₁+1)×(n₂+1)×(n₃+1)`, without any
/// identification of opposite faces.
#[derive(Debug, Clone, PartialEq)]
pub struct UnwrappedVecField {
    pub cell: Cell,
    pub values: Vec<[f64; 3]>,
}

impl UnwrappedVecField {
    pub fn sample_from(u: &impl NodeSampled) -> Self {
        let cell = *u.cell();
        let [n1, n2, n3] = cell.grid.dims();
        let mut values = Vec::with_capacity((n1 + 1) * (n2 + 1) * (n3 + 1));
        for k in 0..=n3 {
            for j in 0..=n2 {
                for i in 0..=n1 {
                    values.push(u.sample(i as isize, j as isize, k as isize));
                }
            }
        }
        Self { cell, values }
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [n1, n2, _] = self.cell.grid.dims();
        i + (n1 + 1) * (j + (n2 + 1) * k)
    }

    /// Add `delta` to one sample.
    pub fn perturb(&mut self, i: usize, j: usize, k: usize, delta: [f64; 3]) -> Result<()> {
        let dims = self.cell.grid.dims();
        if i > dims[0] || j > dims[1] || k > dims[2] {
            return Err(Error::Dimension(format!(
                "node ({i}, {j}, {k}) outside the closed lattice {dims:?}"
            )));
        }
        let idx = self.index(i, j, k);
        for d in 0..3 {
            self.values[idx][d] += delta[d];
        }
        Ok(())
    }
}

impl NodeSampled for UnwrappedVecField {
    fn cell(&self) -> &Cell {
        &self.cell
    }

    fn sample(&self, i: isize, j: isize, k: isize) -> [f64; 3] {
        self.values[self.index(i as usize, j as usize, k as usize)]
    }
}

/// Value mismatch `u(y + g_k) − u(y)` between identically indexed nodes on
/// opposite faces, for the three lattice directions.
pub fn trace_audit_h1(u: &impl NodeSampled) -> [TraceReport; 3] {
    let dims = u.cell().grid.dims();
    std::array::from_fn(|k| {
        let (a, b) = face_axes(k);
        let mut jumps = Vec::with_capacity(dims[a] * dims[b]);
        for q in 0..dims[b] as isize {
            for p in 0..dims[a] as isize {
                let top = node_index(k, dims[k] as isize, p, q);
                let bottom = node_index(k, 0, p, q);
                let t = u.sample(top[0], top[1], top[2]);
                let s = u.sample(bottom[0], bottom[1], bottom[2]);
                jumps.push([t[0] - s[0], t[1] - s[1], t[2] - s[2]]);
            }
        }
        TraceReport::new(k, [dims[a], dims[b]], jumps, None)
    })
}

/// Per-face-node flux functionals `Σ ∫ σ·∇N` of the element layers adjacent to
/// the node plane `layer` of direction `k`, from below (`lower`) and above.
fn face_fluxes(
    op: &SymGradOp,
    sigma: &SymField,
    k: usize,
    lower_layer: usize,
    upper_layer: usize,
) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let grid = sigma.cell.grid;
    let dims = grid.dims();
    let (a, b) = face_axes(k);
    let face = |p: usize, q: usize| p + dims[a] * q;
    let mut below = vec![[0.0; 3]; dims[a] * dims[b]];
    let mut above = vec![[0.0; 3]; dims[a] * dims[b]];
    for e in 0..grid.element_count() {
        let c = grid.coords(e);
        let is_lower = c[k] == lower_layer;
        let is_upper = c[k] == upper_layer;
        if !is_lower && !is_upper {
            continue;
        }
        let forces = op.element_forces(e, sigma);
        for (local, f) in forces.iter().enumerate() {
            let (o0, o1, o2) = corner(local);
            let off = [o0, o1, o2];
            let p = (c[a] + off[a]) % dims[a];
            let q = (c[b] + off[b]) % dims[b];
            let target = if is_lower && off[k] == 1 {
                &mut below[face(p, q)]
            } else if is_upper && off[k] == 0 {
                &mut above[face(p, q)]
            } else {
                continue;
            };
            for d in 0..3 {
                target[d] += f[d];
            }
        }
    }
    (below, above)
}

fn divergence_warning(sigma: &SymField) -> Result<Option<String>> {
    let div = relative_divergence(sigma)?;
    Ok((div > HDIV_WARN).then(|| {
        format!("field is far from divergence-free (relative weak divergence {div:.3e}); flux traces are not well defined")
    }))
}

/// Normal-flux mismatch on the faces normal to lattice direction `k`.
///
/// Flux functionals are formed on the mesh opened along `k`: the top face
/// gathers from the last element layer, the bottom face from the first. With
/// outward normals of opposite sign their sum must vanish; the reported jump is
/// that sum divided by the face area of one node.
pub fn trace_audit_hdiv(sigma: &SymField, k: usize) -> Result<TraceReport> {
    if k > 2 {
        return Err(Error::Parameter(format!("direction must be 0, 1 or 2, got {k}")));
    }
    let cell = sigma.cell;
    let dims = cell.grid.dims();
    let (a, b) = face_axes(k);
    let op = SymGradOp::new(cell);
    let (top, bottom) = face_fluxes(&op, sigma, k, dims[k] - 1, 0);
    let node_area = cell.lattice.face_area(k) / (dims[a] * dims[b]) as f64;
    let jumps = top
        .iter()
        .zip(&bottom)
        .map(|(t, s)| std::array::from_fn(|d| (t[d] + s[d]) / node_area))
        .collect();
    Ok(TraceReport::new(k, [dims[a], dims[b]], jumps, divergence_warning(sigma)?))
}

/// Element layers `[start, end)` along `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HalfCell {
    pub direction: usize,
    pub start: usize,
    pub end: usize,
}

impl HalfCell {
    /// Split the cell at element layer `layer` of `direction`.
    pub fn split(cell: &Cell, direction: usize, layer: usize) -> Result<(HalfCell, HalfCell)> {
        if direction > 2 {
            return Err(Error::Parameter(format!("direction must be 0, 1 or 2, got {direction}")));
        }
        let n = cell.grid.dims()[direction];
        if layer == 0 || layer >= n {
            return Err(Error::Parameter(format!(
                "split layer {layer} must lie strictly inside 0..{n}"
            )));
        }
        Ok((
            HalfCell { direction, start: 0, end: layer },
            HalfCell { direction, start: layer, end: n },
        ))
    }

    fn node_layers(&self) -> usize {
        self.end - self.start + 1
    }

    fn check_pair(cell: &Cell, first: &HalfCell, second: &HalfCell) -> Result<()> {
        let n = cell.grid.dims()[first.direction];
        let conforming = first.direction == second.direction
            && first.start == 0
            && first.end == second.start
            && second.end == n
            && first.end > 0
            && first.end < n;
        if conforming {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "halves {first:?} and {second:?} do not split the {n} element layers"
            )))
        }
    }
}

/// Displacement samples on the closed node slab of a half cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfVecField {
    pub cell: Cell,
    pub half: HalfCell,
    /// Node layers `start..=end` along the split direction, the other two
    /// directions periodic; ordering `(i, j, k)` with the first index fastest.
    pub values: Vec<[f64; 3]>,
}

impl HalfVecField {
    fn slab_dims(cell: &Cell, half: &HalfCell) -> [usize; 3] {
        let mut d = cell.grid.dims();
        d[half.direction] = half.node_layers();
        d
    }

    fn slab_index(&self, idx: [usize; 3]) -> usize {
        let d = Self::slab_dims(&self.cell, &self.half);
        idx[0] + d[0] * (idx[1] + d[1] * idx[2])
    }

    /// Restriction of a periodic field to a half cell.
    pub fn restrict(v: &VecField, half: HalfCell) -> Self {
        let d = Self::slab_dims(&v.cell, &half);
        let mut values = Vec::with_capacity(d[0] * d[1] * d[2]);
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let mut idx = [i as isize, j as isize, k as isize];
                    idx[half.direction] += half.start as isize;
                    values.push(v.at_indices(idx[0], idx[1], idx[2]));
                }
            }
        }
        Self { cell: v.cell, half, values }
    }

    pub fn shifted(&self, c: [f64; 3]) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            for d in 0..3 {
                v[d] += c[d];
            }
        }
        out
    }

    /// Value at global node indices; the split coordinate is taken unwrapped
    /// within `start..=end`.
    fn at_global(&self, idx: [usize; 3]) -> [f64; 3] {
        let mut local = idx;
        local[self.half.direction] -= self.half.start;
        self.values[self.slab_index(local)]
    }
}

/// Outcome of joining two displacement halves.
#[derive(Debug, Clone)]
pub struct H1Join {
    pub joined: VecField,
    /// Interface values agree to the tolerance on both interfaces (the interior
    /// plane and the periodic face).
    pub valid: bool,
    pub interface_mismatch: f64,
    pub face_mismatch: f64,
    /// `‖e_broken − G v̄‖_W / ‖e_broken‖_W`: zero exactly when the piecewise
    /// symmetric gradient is the symmetric gradient of the join.
    pub green_defect: f64,
    /// Element layers carrying a nonzero defect.
    pub defect_layers: Vec<usize>,
    /// Every defect layer touches an interface.
    pub localized: bool,
}

/// Glue two displacement halves. Interface nodes take the values of the first
/// half.
pub fn interface_join_h1(first: &HalfVecField, second: &HalfVecField, tol: f64) -> Result<H1Join> {
    first.cell.check_same(&second.cell, "interface join")?;
    let cell = first.cell;
    HalfCell::check_pair(&cell, &first.half, &second.half)?;
    let k = first.half.direction;
    let m = first.half.end;
    let grid = cell.grid;
    let dims = grid.dims();

    let joined_values = (0..grid.node_count())
        .map(|node| {
            let idx = grid.coords(node);
            if idx[k] <= m {
                first.at_global(idx)
            } else {
                second.at_global(idx)
            }
        })
        .collect();
    let joined = VecField::from_values(cell, joined_values)?;

    let (a, b) = face_axes(k);
    let mut interface_mismatch = 0.0f64;
    let mut face_mismatch = 0.0f64;
    for q in 0..dims[b] {
        for p in 0..dims[a] {
            let at = |along: usize| {
                let mut idx = [0usize; 3];
                idx[k] = along;
                idx[a] = p;
                idx[b] = q;
                idx
            };
            let d1 = norm3(sub3(first.at_global(at(m)), second.at_global(at(m))));
            let d0 = norm3(sub3(first.at_global(at(0)), second.at_global(at(dims[k]))));
            interface_mismatch = interface_mismatch.max(d1);
            face_mismatch = face_mismatch.max(d0);
        }
    }

    // piecewise symmetric gradient: every element reads its own half
    let op = SymGradOp::new(cell);
    let broken_nodes = |e: usize| -> [[f64; 3]; 8] {
        let c = grid.coords(e);
        let half = if c[k] < m { first } else { second };
        std::array::from_fn(|local| {
            let (o0, o1, o2) = corner(local);
            let off = [o0, o1, o2];
            let mut idx = [0usize; 3];
            for d in 0..3 {
                idx[d] = if d == k { c[d] + off[d] } else { (c[d] + off[d]) % dims[d] };
            }
            half.at_global(idx)
        })
    };
    let joined_nodes = |e: usize| -> [[f64; 3]; 8] {
        let nodes = grid.element_nodes(e);
        std::array::from_fn(|local| joined.values[nodes[local]])
    };
    let w = cell.quadrature_weight();
    let mut defect_sq = 0.0;
    let mut broken_sq = 0.0;
    let mut defect_layers = Vec::new();
    for e in 0..grid.element_count() {
        let (ub, uj) = (broken_nodes(e), joined_nodes(e));
        let mut layer_sq = 0.0;
        for g in 0..8 {
            let mut eb = MandelVec6::ZERO;
            let mut ej = MandelVec6::ZERO;
            for local in 0..8 {
                let grad = op.shape_gradient(g, local);
                eb += crate::discrete::strain_of(grad, &ub[local]);
                ej += crate::discrete::strain_of(grad, &uj[local]);
            }
            layer_sq += w * (eb - ej).norm().powi(2);
            broken_sq += w * eb.norm().powi(2);
        }
        if layer_sq > 0.0 {
            let layer = grid.coords(e)[k];
            if !defect_layers.contains(&layer) {
                defect_layers.push(layer);
            }
        }
        defect_sq += layer_sq;
    }
    defect_layers.sort_unstable();
    let localized = defect_layers.iter().all(|&l| l == m || l == m - 1 || l == 0 || l == dims[k] - 1);
    let scale = broken_sq.sqrt();
    Ok(H1Join {
        joined,
        valid: interface_mismatch <= tol && face_mismatch <= tol,
        interface_mismatch,
        face_mismatch,
        green_defect: if scale > 0.0 { defect_sq.sqrt() / scale } else { defect_sq.sqrt() },
        defect_layers,
        localized,
    })
}

/// Stress samples on the elements of a half cell, element-major in the
/// global element order restricted to the half.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSymField {
    pub cell: Cell,
    pub half: HalfCell,
    pub values: Vec<MandelVec6>,
}

impl HalfSymField {
    pub fn restrict(sigma: &SymField, half: HalfCell) -> Self {
        let grid = sigma.cell.grid;
        let values = (0..grid.element_count())
            .filter(|&e| (half.start..half.end).contains(&grid.coords(e)[half.direction]))
            .flat_map(|e| sigma.values[8 * e..8 * e + 8].iter().copied())
            .collect();
        Self { cell: sigma.cell, half, values }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v.scale(s)).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct HdivJoin {
    pub joined: SymField,
    /// Normal fluxes agree on both interfaces to the tolerance.
    pub valid: bool,
    /// Flux sum per node area on the interior plane.
    pub interface_mismatch: f64,
    /// Flux sum per node area on the periodic face.
    pub face_mismatch: f64,
    /// Relative weak divergence of the joined field.
    pub divergence: f64,
}

/// Glue two stress halves and compare their normal fluxes across the interfaces.
pub fn interface_join_hdiv(first: &HalfSymField, second: &HalfSymField, tol: f64) -> Result<HdivJoin> {
    first.cell.check_same(&second.cell, "interface join")?;
    let cell = first.cell;
    HalfCell::check_pair(&cell, &first.half, &second.half)?;
    let grid = cell.grid;
    let k = first.half.direction;
    let m = first.half.end;
    let dims = grid.dims();
    let per_layer = grid.element_count() / dims[k];
    if first.values.len() != 8 * per_layer * m || second.values.len() != 8 * per_layer * (dims[k] - m) {
        return Err(Error::Dimension("half-cell sample counts do not match their layers".into()));
    }
    let (mut i1, mut i2) = (0, 0);
    let mut values = Vec::with_capacity(8 * grid.element_count());
    for e in 0..grid.element_count() {
        if grid.coords(e)[k] < m {
            values.extend_from_slice(&first.values[8 * i1..8 * i1 + 8]);
            i1 += 1;
        } else {
            values.extend_from_slice(&second.values[8 * i2..8 * i2 + 8]);
            i2 += 1;
        }
    }
    let joined = SymField::from_values(cell, values)?;
    let op = SymGradOp::new(cell);
    let (a, b) = face_axes(k);
    let node_area = cell.lattice.face_area(k) / (dims[a] * dims[b]) as f64;
    let max_sum = |(x, y): (Vec<[f64; 3]>, Vec<[f64; 3]>)| {
        x.iter()
            .zip(&y)
            .map(|(s, t)| norm3([s[0] + t[0], s[1] + t[1], s[2] + t[2]]) / node_area)
            .fold(0.0, f64::max)
    };
    let interface_mismatch = max_sum(face_fluxes(&op, &joined, k, m - 1, m));
    let face_mismatch = max_sum(face_fluxes(&op, &joined, k, dims[k] - 1, 0));
    Ok(HdivJoin {
        valid: interface_mismatch <= tol && face_mismatch <= tol,
        divergence: relative_divergence(&joined)?,
        joined,
        interface_mismatch,
        face_mismatch,
    })
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{Grid, Lattice, MandelMat66};
    use crate::discrete::make_divfree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn skew_cell(n: usize) -> Cell {
        let l = Lattice::new([1.0, 0.0, 0.0], [0.2, 0.9, 0.0], [0.1, 0.3, 1.2]).unwrap();
        Cell::new(l, Grid::new(n, n + 1, n + 2).unwrap())
    }

    #[test]
    fn periodic_part_has_no_mismatch() {
        let cell = skew_cell(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = VecField::random(cell, &mut rng);
        for r in trace_audit_h1(&LPField::new(MandelVec6::ZERO, phi.clone())) {
            assert_eq!(r.max_mismatch, 0.0);
        }
        for r in trace_audit_h1(&phi) {
            assert_eq!(r.max_mismatch, 0.0);
        }
    }

    #[test]
    fn affine_jump_is_a_times_g() {
        let cell = skew_cell(3);
        let a = MandelVec6([0.3, -0.2, 0.5, 0.1, 0.7, -0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = LPField::new(a, VecField::random(cell, &mut rng));
        for r in trace_audit_h1(&u) {
            let expected = a.to_matrix() * cell.lattice.vector(r.direction);
            for j in &r.jumps {
                for d in 0..3 {
                    assert!((j[d] - expected[d]).abs() < 1e-14);
                }
            }
        }

        let unit = Cell::unit_cube(4).unwrap();
        let reports = trace_audit_h1(&LPField::affine_only(unit, MandelVec6::basis(0)));
        assert!(reports[0].jumps.iter().all(|j| *j == [1.0, 0.0, 0.0]));
        assert_eq!(reports[1].max_mismatch, 0.0);
        assert_eq!(reports[2].max_mismatch, 0.0);
    }

    #[test]
    fn tampered_node_is_located() {
        let cell = Cell::unit_cube(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = VecField::random(cell, &mut rng);
        let mut raw = UnwrappedVecField::sample_from(&phi);
        raw.perturb(4, 1, 2, [0.0, 3e-3, 0.0]).unwrap();
        let reports = trace_audit_h1(&raw);
        assert!((reports[0].max_mismatch - 3e-3).abs() < 1e-15);
        assert_eq!(reports[0].argmax(), (1, 2));
        assert_eq!(reports[1].max_mismatch, 0.0);
        assert!(raw.perturb(5, 0, 0, [1.0; 3]).is_err());
    }

    #[test]
    fn flux_audits() {
        let cell = skew_cell(4);
        let s = SymField::constant(cell, MandelVec6([1.0, 2.0, 3.0, 0.4, -0.5, 0.6]));
        for k in 0..3 {
            let r = trace_audit_hdiv(&s, k).unwrap();
            assert!(r.max_mismatch < 1e-12, "{}", r.max_mismatch);
            assert!(r.warning.is_none());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sigma = make_divfree(&SymField::random(cell, &mut rng), &MandelMat66::identity()).unwrap();
        for k in 0..3 {
            assert!(trace_audit_hdiv(&sigma, k).unwrap().max_mismatch <= 1e-9);
        }

        let unit = Cell::unit_cube(8).unwrap();
        let ramp = SymField::from_fn(unit, |y| MandelVec6::basis(0).scale(y[0]));
        let r = trace_audit_hdiv(&ramp, 0).unwrap();
        assert!(r.warning.is_some());
        assert!((r.max_mismatch - 1.0).abs() <= 0.2, "{}", r.max_mismatch);
        // away from the y₁ seam only the volume term h of the divergence remains
        let side = trace_audit_hdiv(&ramp, 1).unwrap();
        for (idx, m) in side.mismatch.iter().enumerate() {
            if idx % side.face_dims[0] != 0 {
                assert!((m - 0.125).abs() < 1e-12, "{m}");
            }
        }
        assert!(trace_audit_hdiv(&ramp, 3).is_err());
    }

    #[test]
    fn h1_joins() {
        let cell = Cell::unit_cube(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = VecField::random(cell, &mut rng);
        let (h1, h2) = HalfCell::split(&cell, 0, 2).unwrap();
        let (u1, u2) = (HalfVecField::restrict(&v, h1), HalfVecField::restrict(&v, h2));
        let join = interface_join_h1(&u1, &u2, 1e-12).unwrap();
        assert!(join.valid);
        assert!(join.green_defect <= 1e-12);
        assert_eq!(join.joined, v);

        let shifted = interface_join_h1(&u1, &u2.shifted([0.0, 0.3, 0.4]), 1e-12).unwrap();
        assert!(!shifted.valid);
        assert!((shifted.interface_mismatch - 0.5).abs() < 1e-14);
        assert!(shifted.green_defect > 1e-3);
        assert!(shifted.localized);
        assert_eq!(shifted.defect_layers, vec![2, 5]);

        assert!(interface_join_h1(&u2, &u1, 1e-12).is_err());
        assert!(HalfCell::split(&cell, 0, 0).is_err());
    }

    #[test]
    fn hdiv_joins() {
        let cell = Cell::unit_cube(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sigma = make_divfree(&SymField::random(cell, &mut rng), &MandelMat66::identity()).unwrap();
        let (h1, h2) = HalfCell::split(&cell, 1, 3).unwrap();
        let (s1, s2) = (HalfSymField::restrict(&sigma, h1), HalfSymField::restrict(&sigma, h2));
        let join = interface_join_hdiv(&s1, &s2, 1e-9).unwrap();
        assert!(join.valid);
        assert!(join.divergence <= 1e-9);
        assert_eq!(join.joined, sigma);

        let bad = interface_join_hdiv(&s1, &s2.scaled(2.0), 1e-9).unwrap();
        assert!(!bad.valid);
        assert!(bad.divergence > 1e-6);
    }
}
