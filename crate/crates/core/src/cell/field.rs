use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use super::quadrature::{shape, shape_grad_local};
use super::{Cell, MandelVec6};
use crate::error::{Error, Result};

/// Periodic nodal vector field (a discrete member of `H¹_#`).
///
/// Values live on the wrapped node lattice, so periodicity holds by
/// construction. Between nodes the field is trilinear.
#[derive(Debug, Clone, PartialEq)]
pub struct VecField {
    pub cell: Cell,
    pub values: Vec<[f64; 3]>,
}

impl VecField {
    pub fn zeros(cell: Cell) -> Self {
        Self {
            cell,
            values: vec![[0.0; 3]; cell.grid.node_count()],
        }
    }

    pub fn from_values(cell: Cell, values: Vec<[f64; 3]>) -> Result<Self> {
        if values.len() != cell.grid.node_count() {
            return Err(Error::Dimension(format!(
                "vector field needs {} nodal values, got {}",
                cell.grid.node_count(),
                values.len()
            )));
        }
        Ok(Self { cell, values })
    }

    /// Sample a function of the physical position at the nodes.
    pub fn from_fn(cell: Cell, f: impl Fn(&Vector3<f64>) -> [f64; 3]) -> Self {
        let values = (0..cell.grid.node_count())
            .map(|n| f(&cell.node_point(n)))
            .collect();
        Self { cell, values }
    }

    /// Uniform random nodal values in `[-1, 1)`.
    pub fn random(cell: Cell, rng: &mut impl Rng) -> Self {
        let values = (0..cell.grid.node_count())
            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
            .collect();
        Self { cell, values }
    }

    pub fn from_flat(cell: Cell, flat: &[f64]) -> Self {
        let values = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self { cell, values }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    /// Cell average `(1/|Y|)∫_Y v`. On the uniform periodic grid every hat
    /// function has the same integral, so this is the nodal mean.
    pub fn mean(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for v in &self.values {
            for d in 0..3 {
                s[d] += v[d];
            }
        }
        let n = self.values.len() as f64;
        s.map(|x| x / n)
    }

    /// Subtract the cell average so the field lies in the zero-mean subspace.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        for v in &mut self.values {
            for d in 0..3 {
                v[d] -= m[d];
            }
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &VecField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            for d in 0..3 {
                a[d] += alpha * b[d];
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            cell: self.cell,
            values: self.values.iter().map(|v| v.map(|x| x * s)).collect(),
        }
    }

    /// Euclidean norm of the nodal values.
    pub fn nodal_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            .sum::<f64>()
            .sqrt()
    }

    /// Value at node indices, wrapped periodically.
    pub fn at_indices(&self, i: isize, j: isize, k: isize) -> [f64; 3] {
        self.values[self.cell.grid.wrap(i, j, k)]
    }

    /// Trilinear interpolation at a physical point. Any point of ℝ³ is
    /// accepted; the field is evaluated through the periodic wrap.
    pub fn eval(&self, y: &Vector3<f64>) -> [f64; 3] {
        let r = self.cell.lattice.to_reference(y);
        let dims = self.cell.grid.dims();
        let mut base = [0isize; 3];
        let mut xi = [0.0; 3];
        for d in 0..3 {
            let t = r[d] * dims[d] as f64;
            let fl = t.floor();
            base[d] = fl as isize;
            xi[d] = t - fl;
        }
        let mut out = [0.0; 3];
        for a in 0..8 {
            let n = self.at_indices(
                base[0] + (a & 1) as isize,
                base[1] + ((a >> 1) & 1) as isize,
                base[2] + ((a >> 2) & 1) as isize,
            );
            let w = shape(a, &xi);
            for d in 0..3 {
                out[d] += w * n[d];
            }
        }
        out
    }

    /// Full gradient `∇v` at every Gauss point, element-major.
    pub fn gradient_at_quadrature(&self) -> Vec<Matrix3<f64>> {
        let cell = &self.cell;
        let table = GradTable::new(cell);
        let mut out = Vec::with_capacity(cell.grid.quadrature_count());
        for e in 0..cell.grid.element_count() {
            let nodes = cell.grid.element_nodes(e);
            for g in 0..8 {
                let mut m = Matrix3::zeros();
                for (a, &node) in nodes.iter().enumerate() {
                    let grad = &table.grads[g][a];
                    let v = &self.values[node];
                    for i in 0..3 {
                        for j in 0..3 {
                            m[(i, j)] += v[i] * grad[j];
                        }
                    }
                }
                out.push(m);
            }
        }
        out
    }

    /// Values at every Gauss point, element-major.
    pub fn values_at_quadrature(&self) -> Vec<[f64; 3]> {
        let cell = &self.cell;
        let gp = super::quadrature::gauss_points();
        let mut out = Vec::with_capacity(cell.grid.quadrature_count());
        for e in 0..cell.grid.element_count() {
            let nodes = cell.grid.element_nodes(e);
            for xi in &gp {
                let mut v = [0.0; 3];
                for (a, &node) in nodes.iter().enumerate() {
                    let w = shape(a, xi);
                    for d in 0..3 {
                        v[d] += w * self.values[node][d];
                    }
                }
                out.push(v);
            }
        }
        out
    }

    /// `‖v‖²_{L²}` by Gauss quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.cell.quadrature_weight();
        self.values_at_quadrature()
            .iter()
            .map(|v| w * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]))
            .sum()
    }

    /// `‖∇v‖²_{L²}` by Gauss quadrature.
    pub fn gradient_norm_sq(&self) -> f64 {
        let w = self.cell.quadrature_weight();
        self.gradient_at_quadrature()
            .iter()
            .map(|m| w * m.norm_squared())
            .sum()
    }
}

/// Physical shape-function gradients at the Gauss points of any element.
/// All voxels are congruent, so one table serves the whole grid.
#[derive(Debug, Clone)]
pub(crate) struct GradTable {
    /// `grads[g][a]` = ∇N_a at Gauss point `g`.
    pub grads: [[[f64; 3]; 8]; 8],
}

impl GradTable {
    pub fn new(cell: &Cell) -> Self {
        let dims = cell.grid.dims();
        let gp = super::quadrature::gauss_points();
        let mut grads = [[[0.0; 3]; 8]; 8];
        for (g, xi) in gp.iter().enumerate() {
            for (a, slot) in grads[g].iter_mut().enumerate() {
                let local = shape_grad_local(a, xi);
                let reference = Vector3::new(
                    local[0] * dims[0] as f64,
                    local[1] * dims[1] as f64,
                    local[2] * dims[2] as f64,
                );
                let phys = cell.lattice.physical_gradient(&reference);
                *slot = [phys[0], phys[1], phys[2]];
            }
        }
        Self { grads }
    }
}

/// Linear-plus-periodic displacement `u(y) = A·y + φ(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LPField {
    pub affine: MandelVec6,
    pub phi: VecField,
}

impl LPField {
    pub fn new(affine: MandelVec6, phi: VecField) -> Self {
        Self { affine, phi }
    }

    pub fn affine_only(cell: Cell, affine: MandelVec6) -> Self {
        Self::new(affine, VecField::zeros(cell))
    }

    pub fn cell(&self) -> &Cell {
        &self.phi.cell
    }

    /// Evaluate `u(y) = A·y + φ(y)`. Only `φ` is wrapped; the affine part is not.
    pub fn eval(&self, y: &Vector3<f64>) -> [f64; 3] {
        let ay = self.affine.to_matrix() * y;
        let p = self.phi.eval(y);
        [ay[0] + p[0], ay[1] + p[1], ay[2] + p[2]]
    }

    /// Value at node indices of the unwrapped lattice, so index `n1` lies on the
    /// far face `y + g₁` of the cell.
    pub fn at_indices(&self, i: isize, j: isize, k: isize) -> [f64; 3] {
        let dims = self.cell().grid.dims();
        let r = Vector3::new(
            i as f64 / dims[0] as f64,
            j as f64 / dims[1] as f64,
            k as f64 / dims[2] as f64,
        );
        let y = self.cell().lattice.to_physical(&r);
        let ay = self.affine.to_matrix() * y;
        let p = self.phi.at_indices(i, j, k);
        [ay[0] + p[0], ay[1] + p[1], ay[2] + p[2]]
    }
}

/// Symmetric-tensor field sampled at the 2×2×2 Gauss points of every voxel.
///
/// Values are element-major: point `8·e + g`. Every point carries the same
/// quadrature weight `|Y| / (8·elements)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymField {
    pub cell: Cell,
    pub values: Vec<MandelVec6>,
}

impl SymField {
    pub fn zeros(cell: Cell) -> Self {
        Self::constant(cell, MandelVec6::ZERO)
    }

    pub fn constant(cell: Cell, value: MandelVec6) -> Self {
        Self {
            cell,
            values: vec![value; cell.grid.quadrature_count()],
        }
    }

    pub fn from_values(cell: Cell, values: Vec<MandelVec6>) -> Result<Self> {
        if values.len() != cell.grid.quadrature_count() {
            return Err(Error::Dimension(format!(
                "symmetric field needs {} quadrature values, got {}",
                cell.grid.quadrature_count(),
                values.len()
            )));
        }
        Ok(Self { cell, values })
    }

    /// Sample a function of the physical position at every Gauss point.
    pub fn from_fn(cell: Cell, f: impl Fn(&Vector3<f64>) -> MandelVec6) -> Self {
        let mut values = Vec::with_capacity(cell.grid.quadrature_count());
        for e in 0..cell.grid.element_count() {
            for g in 0..8 {
                values.push(f(&cell.quadrature_point(e, g)));
            }
        }
        Self { cell, values }
    }

    /// Uniform random components in `[-1, 1)`.
    pub fn random(cell: Cell, rng: &mut impl Rng) -> Self {
        let values = (0..cell.grid.quadrature_count())
            .map(|_| MandelVec6(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
            .collect();
        Self { cell, values }
    }

    pub fn weight(&self) -> f64 {
        self.cell.quadrature_weight()
    }

    /// Sum of all quadrature weights, which is `|Y|`.
    pub fn total_weight(&self) -> f64 {
        self.weight() * self.values.len() as f64
    }

    pub fn mean(&self) -> MandelVec6 {
        let mut s = MandelVec6::ZERO;
        for v in &self.values {
            s += *v;
        }
        s.scale(1.0 / self.values.len() as f64)
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).map(f64::sqrt).unwrap_or(0.0)
    }

    pub fn map(&self, f: impl Fn(usize, &MandelVec6) -> MandelVec6) -> Self {
        Self {
            cell: self.cell,
            values: self.values.iter().enumerate().map(|(q, v)| f(q, v)).collect(),
        }
    }

    pub fn add(&self, other: &SymField) -> Result<Self> {
        self.cell.check_same(&other.cell, "field sum")?;
        Ok(self.map(|q, v| *v + other.values[q]))
    }

    pub fn sub(&self, other: &SymField) -> Result<Self> {
        self.cell.check_same(&other.cell, "field difference")?;
        Ok(self.map(|q, v| *v - other.values[q]))
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|_, v| v.scale(s))
    }

    pub fn shifted(&self, c: MandelVec6) -> Self {
        self.map(|_, v| *v + c)
    }

    /// Largest Mandel norm over all points.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(MandelVec6::norm).fold(0.0, f64::max)
    }
}

/// Cell average of a symmetric field, `(1/|Y|) Σ w_q f(q)`.
pub fn cell_average(f: &SymField) -> MandelVec6 {
    f.mean()
}

/// Weighted pairing `Σ_q w_q ⟨e(q), s(q)⟩ ≈ ∫_Y ⟨e, s⟩`.
pub fn inner(e: &SymField, s: &SymField) -> Result<f64> {
    e.cell.check_same(&s.cell, "inner product")?;
    let sum: f64 = e.values.iter().zip(&s.values).map(|(a, b)| a.dot(b)).sum();
    Ok(e.weight() * sum)
}

/// Nodal covector: a linear functional on periodic vector fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector {
    pub cell: Cell,
    pub values: Vec<[f64; 3]>,
}

impl Covector {
    pub fn zeros(cell: Cell) -> Self {
        Self {
            cell,
            values: vec![[0.0; 3]; cell.grid.node_count()],
        }
    }

    pub fn from_flat(cell: Cell, flat: &[f64]) -> Self {
        let values = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self { cell, values }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max)
    }

    /// Componentwise sum over all nodes.
    pub fn total(&self) -> [f64; 3] {
        let mut s = [0.0; 3];
        for v in &self.values {
            for d in 0..3 {
                s[d] += v[d];
            }
        }
        s
    }
}

/// Duality pairing `Σ_a r_a · v_a` between a covector and a nodal field.
pub fn pair(r: &Covector, v: &VecField) -> Result<f64> {
    r.cell.check_same(&v.cell, "covector pairing")?;
    Ok(r
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
        .sum())
}

/// Symmetric-tensor field sampled at the nodes, used for smooth-field
/// compatibility checks with finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalSymField {
    pub cell: Cell,
    pub values: Vec<MandelVec6>,
}

impl NodalSymField {
    pub fn from_fn(cell: Cell, f: impl Fn(&Vector3<f64>) -> MandelVec6) -> Self {
        let values = (0..cell.grid.node_count())
            .map(|n| f(&cell.node_point(n)))
            .collect();
        Self { cell, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(MandelVec6::norm).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{Grid, Lattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Cell {
        Cell::unit_cube(n).unwrap()
    }

    #[test]
    fn weights_sum_to_cell_volume() {
        let l = Lattice::new([2.0, 0.0, 0.0], [0.5, 1.5, 0.0], [0.0, 0.3, 0.7]).unwrap();
        let cell = Cell::new(l, Grid::new(3, 4, 5).unwrap());
        let f = SymField::zeros(cell);
        assert!((f.total_weight() - l.volume()).abs() < 1e-13);
    }

    #[test]
    fn average_of_constant_and_odd_mode() {
        let cell = unit(16);
        let c = MandelVec6([1.0, -2.0, 3.0, 0.5, 0.25, -1.0]);
        let f = SymField::constant(cell, c);
        let m = cell_average(&f);
        for k in 0..6 {
            assert!((m[k] - c[k]).abs() < 1e-14);
        }
        let s = SymField::from_fn(cell, |y| MandelVec6::basis(0).scale((2.0 * PI * y[0]).sin()));
        assert!(cell_average(&s)[0].abs() < 1e-15);
        let s2 = SymField::from_fn(cell, |y| {
            MandelVec6::basis(0).scale((2.0 * PI * y[0]).sin().powi(2))
        });
        assert!((cell_average(&s2)[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        let cell = unit(8);
        let id = SymField::constant(cell, MandelVec6::identity());
        assert!((inner(&id, &id).unwrap() - 3.0).abs() < 1e-13);
        let a = MandelVec6([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = MandelVec6([0.5, -1.0, 0.0, 2.0, 0.0, 1.0]);
        let v = inner(&SymField::constant(cell, a), &SymField::constant(cell, s)).unwrap();
        assert!((v - a.dot(&s)).abs() < 1e-12);
        let e = SymField::from_fn(unit(16), |y| {
            MandelVec6::basis(0).scale((2.0 * PI * y[0]).sin())
        });
        assert!((inner(&e, &e).unwrap() - 0.5).abs() < 1e-12);
        assert!(inner(&e, &SymField::zeros(unit(4))).is_err());
    }

    #[test]
    fn constant_embedding_is_adjoint_to_average() {
        let cell = unit(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = SymField::random(cell, &mut rng);
        let a = MandelVec6([0.3, -0.2, 0.9, 0.1, -0.4, 0.7]);
        let lhs = inner(&SymField::constant(cell, a), &s).unwrap();
        let rhs = cell.volume() * a.dot(&cell_average(&s));
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn eval_lp_examples() {
        let cell = unit(4);
        let zero = LPField::affine_only(cell, MandelVec6::ZERO);
        assert_eq!(zero.eval(&Vector3::new(0.3, 0.2, 0.9)), [0.0; 3]);
        let u = LPField::affine_only(cell, MandelVec6::basis(0));
        assert_eq!(u.eval(&Vector3::new(1.0, 0.0, 0.0)), [1.0, 0.0, 0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = MandelVec6([0.1, 0.2, -0.3, 0.4, 0.5, -0.6]);
        let u = LPField::new(a, VecField::random(cell, &mut rng));
        for k in 0..3 {
            let g = cell.lattice.vector(k);
            let jump = a.to_matrix() * g;
            for p in [[0.1, 0.7, 0.33], [0.5, 0.05, 0.9], [0.0, 0.0, 0.0]] {
                let y = Vector3::from(p);
                let u0 = u.eval(&y);
                let u1 = u.eval(&(y + g));
                for d in 0..3 {
                    assert!((u1[d] - u0[d] - jump[d]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_wraps() {
        let cell = unit(5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = VecField::random(cell, &mut rng);
        for node in 0..cell.grid.node_count() {
            let y = cell.node_point(node);
            let e = v.eval(&y);
            for d in 0..3 {
                assert!((e[d] - v.values[node][d]).abs() < 1e-14);
            }
        }
        for k in 0..3 {
            let y = Vector3::new(0.37, 0.61, 0.13);
            let a = v.eval(&y);
            let b = v.eval(&(y + cell.lattice.vector(k)));
            for d in 0..3 {
                assert!((a[d] - b[d]).abs() < 1e-13);
            }
        }
    }
}
