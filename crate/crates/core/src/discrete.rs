//! Matrix-free periodic operators on the voxel grid.
//!
//! `G` maps nodal displacements to symmetric gradients at Gauss points,
//! `div_w = −Gᵀ·W` is its negative adjoint for the quadrature pairing, and
//! the stiffness is `K = Gᵀ·W·C·G`. With these definitions
//!
//! ```text
//! inner(μ, G v) + pair(div_w μ, v) = 0
//! ```
//!
//! holds for every discrete `μ` and `v` up to roundoff.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;

use crate::cell::field::GradTable;
use crate::cell::{corner, inner, pair, Cell, Covector, LPField, MandelMat66, MandelVec6, SymField, VecField};
use crate::error::{Error, Result};
use crate::material::MaterialMap;
use crate::solver::{deflated_pcg, CgOptions, LinearOperator};

/// Mandel strain of `sym(u ⊗ ∇N)`.
#[inline]
pub(crate) fn strain_of(grad: &[f64; 3], u: &[f64; 3]) -> MandelVec6 {
    MandelVec6([
        u[0] * grad[0],
        u[1] * grad[1],
        u[2] * grad[2],
        FRAC_1_SQRT_2 * (u[1] * grad[2] + u[2] * grad[1]),
        FRAC_1_SQRT_2 * (u[0] * grad[2] + u[2] * grad[0]),
        FRAC_1_SQRT_2 * (u[0] * grad[1] + u[1] * grad[0]),
    ])
}

/// Nodal force `σ·∇N` of a Mandel stress against one shape-function gradient.
#[inline]
pub(crate) fn force_of(grad: &[f64; 3], s: &MandelVec6) -> [f64; 3] {
    let (s23, s13, s12) = (
        s[3] * FRAC_1_SQRT_2,
        s[4] * FRAC_1_SQRT_2,
        s[5] * FRAC_1_SQRT_2,
    );
    [
        s[0] * grad[0] + s12 * grad[1] + s13 * grad[2],
        s12 * grad[0] + s[1] * grad[1] + s23 * grad[2],
        s13 * grad[0] + s23 * grad[1] + s[2] * grad[2],
    ]
}

/// Symmetric gradient operator `G` and its weighted adjoint on one cell.
#[derive(Debug, Clone)]
pub struct SymGradOp {
    cell: Cell,
    table: GradTable,
}

impl SymGradOp {
    pub fn new(cell: Cell) -> Self {
        Self {
            table: GradTable::new(&cell),
            cell,
        }
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    /// `∇N_a` at Gauss point `g` (identical for every element).
    pub fn shape_gradient(&self, g: usize, a: usize) -> &[f64; 3] {
        &self.table.grads[g][a]
    }

    /// `G φ` for a periodic nodal field.
    pub fn apply_periodic(&self, phi: &VecField) -> Result<SymField> {
        self.cell.check_same(&phi.cell, "symmetric gradient")?;
        let grid = self.cell.grid;
        let values: Vec<MandelVec6> = (0..grid.element_count())
            .into_par_iter()
            .flat_map_iter(|e| {
                let nodes = grid.element_nodes(e);
                (0..8).map(move |g| {
                    let mut s = MandelVec6::ZERO;
                    for (a, &n) in nodes.iter().enumerate() {
                        s += strain_of(&self.table.grads[g][a], &phi.values[n]);
                    }
                    s
                })
            })
            .collect();
        SymField::from_values(self.cell, values)
    }

    /// `∇s u = A + G φ` for `u = (A, φ)`.
    pub fn apply(&self, u: &LPField) -> Result<SymField> {
        Ok(self.apply_periodic(&u.phi)?.shifted(u.affine))
    }

    /// `div_w σ = −Gᵀ W σ`, the nodal covector with
    /// `pair(div_w σ, v) = −inner(σ, G v)` for every periodic `v`.
    pub fn weak_divergence(&self, sigma: &SymField) -> Result<Covector> {
        self.cell.check_same(&sigma.cell, "weak divergence")?;
        let w = self.cell.quadrature_weight();
        let values = self.assemble(|e, local| {
            let mut f = [0.0; 3];
            for g in 0..8 {
                let t = force_of(&self.table.grads[g][local], &sigma.values[8 * e + g]);
                for d in 0..3 {
                    f[d] -= w * t[d];
                }
            }
            f
        });
        Ok(Covector {
            cell: self.cell,
            values,
        })
    }

    /// Norm of the unassembled element contributions to `Gᵀ W σ`. Unlike the
    /// assembled covector it does not vanish for divergence-free `σ`, so it
    /// serves as the scale of residuals.
    pub fn element_load_norm(&self, sigma: &SymField) -> f64 {
        let w = self.cell.quadrature_weight();
        let grid = self.cell.grid;
        (0..grid.element_count())
            .map(|e| {
                let mut s = 0.0;
                for a in 0..8 {
                    let mut f = [0.0; 3];
                    for g in 0..8 {
                        let t = force_of(&self.table.grads[g][a], &sigma.values[8 * e + g]);
                        for d in 0..3 {
                            f[d] += w * t[d];
                        }
                    }
                    s += f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
                }
                s
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_g w σ·∇N_a` for the eight corners of one element.
    pub(crate) fn element_forces(&self, e: usize, sigma: &SymField) -> [[f64; 3]; 8] {
        let w = self.cell.quadrature_weight();
        let mut out = [[0.0; 3]; 8];
        for (a, f) in out.iter_mut().enumerate() {
            for g in 0..8 {
                let t = force_of(&self.table.grads[g][a], &sigma.values[8 * e + g]);
                for d in 0..3 {
                    f[d] += w * t[d];
                }
            }
        }
        out
    }

    /// Node-centric assembly: each node gathers from its 8 elements in a fixed
    /// order, so the result does not depend on the thread count.
    pub(crate) fn assemble(
        &self,
        contribution: impl Fn(usize, usize) -> [f64; 3] + Sync,
    ) -> Vec<[f64; 3]> {
        let grid = self.cell.grid;
        (0..grid.node_count())
            .into_par_iter()
            .map(|node| {
                let mut f = [0.0; 3];
                for (e, local) in grid.node_elements(node) {
                    let c = contribution(e, local);
                    for d in 0..3 {
                        f[d] += c[d];
                    }
                }
                f
            })
            .collect()
    }
}

/// `∇s u` for an LP displacement.
pub fn sym_gradient(u: &LPField) -> Result<SymField> {
    SymGradOp::new(*u.cell()).apply(u)
}

/// `div_w σ`, see [`SymGradOp::weak_divergence`].
pub fn weak_divergence(sigma: &SymField) -> Result<Covector> {
    SymGradOp::new(sigma.cell).weak_divergence(sigma)
}

/// Defect of the discrete Green identity, `inner(μ, G v) + pair(div_w μ, v)`.
pub fn green_defect(mu: &SymField, v: &VecField) -> Result<f64> {
    let op = SymGradOp::new(mu.cell);
    let gv = op.apply_periodic(v)?;
    let div = op.weak_divergence(mu)?;
    Ok(inner(mu, &gv)? + pair(&div, v)?)
}

/// Block operator assembled from one dense 24×24 matrix per material phase.
///
/// Applies `Σ_e Pₑᵀ Kₑ Pₑ` without forming the global matrix.
#[derive(Debug, Clone)]
pub struct ElementOperator {
    cell: Cell,
    matrices: Vec<Box<[f64; 576]>>,
    element_matrix: Option<Vec<u8>>,
}

impl ElementOperator {
    /// `K = Gᵀ W C G` for a voxelwise material.
    pub fn stiffness(map: &MaterialMap) -> Self {
        let op = SymGradOp::new(map.cell);
        let matrices = map
            .phases()
            .iter()
            .map(|p| Self::stiffness_matrix(&op, p.stiffness()))
            .collect();
        Self {
            cell: map.cell,
            matrices,
            element_matrix: Some(map.phase_ids().to_vec()),
        }
    }

    /// `K = Gᵀ W C G` with one tensor everywhere.
    pub fn homogeneous_stiffness(cell: Cell, c: &MandelMat66) -> Self {
        let op = SymGradOp::new(cell);
        Self {
            cell,
            matrices: vec![Self::stiffness_matrix(&op, c)],
            element_matrix: None,
        }
    }

    /// Vector Laplacian form `∫ ∇u : ∇v`.
    pub fn gradient_gram(cell: Cell) -> Self {
        let table = GradTable::new(&cell);
        let w = cell.quadrature_weight();
        let mut k = Box::new([0.0; 576]);
        for g in 0..8 {
            for a in 0..8 {
                for b in 0..8 {
                    let ga = &table.grads[g][a];
                    let gb = &table.grads[g][b];
                    let s = w * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2]);
                    for d in 0..3 {
                        k[(3 * a + d) * 24 + 3 * b + d] += s;
                    }
                }
            }
        }
        Self {
            cell,
            matrices: vec![k],
            element_matrix: None,
        }
    }

    /// Consistent mass form `∫ u · v`.
    pub fn mass(cell: Cell) -> Self {
        let w = cell.quadrature_weight();
        let gp = crate::cell::quadrature::gauss_points();
        let mut k = Box::new([0.0; 576]);
        for xi in &gp {
            for a in 0..8 {
                for b in 0..8 {
                    let s = w
                        * crate::cell::quadrature::shape(a, xi)
                        * crate::cell::quadrature::shape(b, xi);
                    for d in 0..3 {
                        k[(3 * a + d) * 24 + 3 * b + d] += s;
                    }
                }
            }
        }
        Self {
            cell,
            matrices: vec![k],
            element_matrix: None,
        }
    }

    /// Sum of two operators on the same cell, `self + other`.
    pub fn sum(&self, other: &ElementOperator) -> Result<Self> {
        self.cell.check_same(&other.cell, "operator sum")?;
        if self.element_matrix.is_some() || other.element_matrix.is_some() {
            return Err(Error::Parameter(
                "only uniform element operators can be summed".into(),
            ));
        }
        let mut k = self.matrices[0].clone();
        for (a, b) in k.iter_mut().zip(other.matrices[0].iter()) {
            *a += b;
        }
        Ok(Self {
            cell: self.cell,
            matrices: vec![k],
            element_matrix: None,
        })
    }

    fn stiffness_matrix(op: &SymGradOp, c: &MandelMat66) -> Box<[f64; 576]> {
        let w = op.cell.quadrature_weight();
        let mut k = Box::new([0.0; 576]);
        let unit = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for g in 0..8 {
            let mut b = [MandelVec6::ZERO; 24];
            for a in 0..8 {
                for d in 0..3 {
                    b[3 * a + d] = strain_of(op.shape_gradient(g, a), &unit[d]);
                }
            }
            let cb: Vec<MandelVec6> = b.iter().map(|x| c.apply(x)).collect();
            for r in 0..24 {
                for s in 0..24 {
                    k[r * 24 + s] += w * b[r].dot(&cb[s]);
                }
            }
        }
        // exact symmetry regardless of summation order
        for r in 0..24 {
            for s in r + 1..24 {
                let m = 0.5 * (k[r * 24 + s] + k[s * 24 + r]);
                k[r * 24 + s] = m;
                k[s * 24 + r] = m;
            }
        }
        k
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    #[inline]
    fn matrix_of(&self, element: usize) -> &[f64; 576] {
        match &self.element_matrix {
            Some(ids) => &self.matrices[ids[element] as usize],
            None => &self.matrices[0],
        }
    }

    pub fn apply_field(&self, v: &VecField) -> Result<Covector> {
        self.cell.check_same(&v.cell, "operator application")?;
        let mut out = vec![0.0; 3 * self.cell.grid.node_count()];
        self.apply(&v.to_flat(), &mut out);
        Ok(Covector::from_flat(self.cell, &out))
    }
}

impl LinearOperator for ElementOperator {
    fn dim(&self) -> usize {
        3 * self.cell.grid.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let [n1, n2, _] = self.cell.grid.dims();
        let tables = neighbour_tables(self.cell.grid.dims());
        let [tx, ty, tz] = [&tables[0], &tables[1], &tables[2]];
        match &self.element_matrix {
            // translation invariant: one 27-point stencil of 3×3 blocks
            None => {
                let blocks = stencil(&self.matrices[0]);
                y.par_chunks_mut(3 * n1 * n2).enumerate().for_each(|(k, slab)| {
                    for j in 0..n2 {
                        for i in 0..n1 {
                            let mut f = [0.0; 3];
                            for (dz, &kk) in tz[k].iter().enumerate() {
                                for (dy, &jj) in ty[j].iter().enumerate() {
                                    let base = (kk * n2 + jj) * n1;
                                    for (dx, &ii) in tx[i].iter().enumerate() {
                                        let b = &blocks[dx + 3 * dy + 9 * dz];
                                        let u = &x[3 * (base + ii)..3 * (base + ii) + 3];
                                        for r in 0..3 {
                                            f[r] += b[3 * r] * u[0] + b[3 * r + 1] * u[1] + b[3 * r + 2] * u[2];
                                        }
                                    }
                                }
                            }
                            let at = 3 * (j * n1 + i);
                            slab[at..at + 3].copy_from_slice(&f);
                        }
                    }
                });
            }
            Some(ids) => {
                y.par_chunks_mut(3 * n1 * n2).enumerate().for_each(|(k, slab)| {
                    for j in 0..n2 {
                        for i in 0..n1 {
                            let mut f = [0.0; 3];
                            for la in 0..8 {
                                let (a, b, c) = corner(la);
                                let e = (tz[k][1 - c] * n2 + ty[j][1 - b]) * n1 + tx[i][1 - a];
                                let km = &self.matrices[ids[e] as usize];
                                for lb in 0..8 {
                                    let (a2, b2, c2) = corner(lb);
                                    let nb = (tz[k][1 + c2 - c] * n2 + ty[j][1 + b2 - b]) * n1
                                        + tx[i][1 + a2 - a];
                                    let u = &x[3 * nb..3 * nb + 3];
                                    for r in 0..3 {
                                        let row = &km[(3 * la + r) * 24 + 3 * lb..(3 * la + r) * 24 + 3 * lb + 3];
                                        f[r] += row[0] * u[0] + row[1] * u[1] + row[2] * u[2];
                                    }
                                }
                            }
                            let at = 3 * (j * n1 + i);
                            slab[at..at + 3].copy_from_slice(&f);
                        }
                    }
                });
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let grid = self.cell.grid;
        let mut d = vec![0.0; self.dim()];
        for (node, out) in d.chunks_mut(3).enumerate() {
            for (e, la) in grid.node_elements(node) {
                let k = self.matrix_of(e);
                for i in 0..3 {
                    out[i] += k[(3 * la + i) * 24 + 3 * la + i];
                }
            }
        }
        d
    }
}

/// Periodic indices `i − 1, i, i + 1` for every index along each axis.
fn neighbour_tables(dims: [usize; 3]) -> [Vec<[usize; 3]>; 3] {
    dims.map(|n| (0..n).map(|i| [(i + n - 1) % n, i, (i + 1) % n]).collect())
}

/// Node-to-node blocks of a uniform element matrix, indexed by the offset
/// `(dx + 1) + 3(dy + 1) + 9(dz + 1)`.
fn stencil(k: &[f64; 576]) -> [[f64; 9]; 27] {
    let mut blocks = [[0.0; 9]; 27];
    for la in 0..8 {
        let (a, b, c) = corner(la);
        for lb in 0..8 {
            let (a2, b2, c2) = corner(lb);
            let o = (1 + a2 - a) + 3 * (1 + b2 - b) + 9 * (1 + c2 - c);
            for r in 0..3 {
                for s in 0..3 {
                    blocks[o][3 * r + s] += k[(3 * la + r) * 24 + 3 * lb + s];
                }
            }
        }
    }
    blocks
}

/// `K v = Gᵀ W C G v` for the voxelwise material.
pub fn apply_stiffness(map: &MaterialMap, v: &VecField) -> Result<Covector> {
    ElementOperator::stiffness(map).apply_field(v)
}

/// Options for the divergence-free projector's inner solve.
pub fn divfree_options() -> CgOptions {
    CgOptions {
        tol: 1e-13,
        max_iter: 20_000,
        deflate_translations: true,
        reference_norm: None,
    }
}

/// Remove the `C_ref`-weighted gradient component of `τ`:
/// `σ = τ − C_ref G z` with `Gᵀ W C_ref G z = Gᵀ W τ`, so `div_w σ = 0`.
///
/// The correction has zero cell average, hence `cell_average(σ) = cell_average(τ)`.
pub fn make_divfree(tau: &SymField, c_ref: &MandelMat66) -> Result<SymField> {
    make_divfree_with(tau, c_ref, &divfree_options())
}

pub fn make_divfree_with(tau: &SymField, c_ref: &MandelMat66, opts: &CgOptions) -> Result<SymField> {
    let op = SymGradOp::new(tau.cell);
    let k = ElementOperator::homogeneous_stiffness(tau.cell, c_ref);
    let (z, _) = solve_gradient_system(&op, &k, tau, opts)?;
    let gz = op.apply_periodic(&z)?;
    tau.sub(&gz.map(|_, v| c_ref.apply(v)))
}

/// Solve `K z = Gᵀ W τ` on the zero-mean subspace; returns `z` and the solver outcome.
pub(crate) fn solve_gradient_system(
    op: &SymGradOp,
    k: &ElementOperator,
    tau: &SymField,
    opts: &CgOptions,
) -> Result<(VecField, crate::solver::CgOutcome)> {
    let rhs = op.weak_divergence(tau)?.to_flat();
    let rhs: Vec<f64> = rhs.iter().map(|x| -x).collect();
    let mut opts = opts.clone();
    if opts.reference_norm.is_none() {
        opts.reference_norm = Some(op.element_load_norm(tau));
    }
    let out = deflated_pcg(k, &rhs, None, &opts)?;
    let mut z = VecField::from_flat(tau.cell, &out.x);
    z.remove_mean();
    Ok((z, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{cell_average, Grid, Lattice};
    use crate::material::Phase;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn skew_cell(n: usize) -> Cell {
        let l = Lattice::new([1.0, 0.0, 0.0], [0.3, 1.1, 0.0], [0.1, -0.2, 0.9]).unwrap();
        Cell::new(l, Grid::cubic(n).unwrap())
    }

    #[test]
    fn affine_part_passes_through() {
        let cell = Cell::unit_cube(3).unwrap();
        let a = MandelVec6([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let e = sym_gradient(&LPField::affine_only(cell, a)).unwrap();
        assert!(e.values.iter().all(|v| (*v - a).norm() < 1e-15));
    }

    #[test]
    fn shear_of_sine_mode_converges_second_order() {
        let mut errs = vec![];
        for n in [8usize, 16, 32] {
            let cell = Cell::unit_cube(n).unwrap();
            let phi = VecField::from_fn(cell, |y| [(2.0 * PI * y[1]).sin(), 0.0, 0.0]);
            let e = sym_gradient(&LPField::new(MandelVec6::ZERO, phi)).unwrap();
            let mut err: f64 = 0.0;
            // the element-mean gradient is superconvergent at the element centre
            for el in 0..cell.grid.element_count() {
                let y1 = (cell.grid.coords(el)[1] as f64 + 0.5) / n as f64;
                let exact = PI * (2.0 * PI * y1).cos();
                let mean: f64 = (0..8).map(|g| e.values[8 * el + g].entry(0, 1)).sum::<f64>() / 8.0;
                err = err.max((mean - exact).abs());
            }
            errs.push(err);
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.8, "rate {rate} from {errs:?}");
        }
    }

    #[test]
    fn fluctuation_gradients_have_zero_mean() {
        let cell = skew_cell(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let phi = VecField::random(cell, &mut rng);
            let e = sym_gradient(&LPField::new(MandelVec6::ZERO, phi)).unwrap();
            assert!(cell_average(&e).norm() < 1e-13);
        }
    }

    #[test]
    fn green_identity_and_zero_sum() {
        let cell = skew_cell(4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let mu = SymField::random(cell, &mut rng);
            let v = VecField::random(cell, &mut rng);
            let d = green_defect(&mu, &v).unwrap();
            let scale = mu.norm() * v.nodal_norm();
            assert!(d.abs() <= 1e-13 * scale, "{d} vs {scale}");
            let r = weak_divergence(&mu).unwrap();
            for s in r.total() {
                assert!(s.abs() < 1e-12);
            }
        }
        let c = SymField::constant(cell, MandelVec6([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        assert!(weak_divergence(&c).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn stiffness_matches_composed_operators() {
        let cell = skew_cell(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p1 = Phase::isotropic(2.0, 1.0).unwrap();
        let p2 = Phase::isotropic(0.5, 3.0).unwrap();
        let map = crate::material::MaterialMap::random_two_phase(cell, p1, p2, 0.5, &mut rng)
            .unwrap();
        let op = SymGradOp::new(cell);
        for _ in 0..5 {
            let u = VecField::random(cell, &mut rng);
            let w = VecField::random(cell, &mut rng);
            let ku = apply_stiffness(&map, &u).unwrap();
            let composed = -1.0
                * pair(
                    &op.weak_divergence(&map.apply(&op.apply_periodic(&u).unwrap()).unwrap())
                        .unwrap(),
                    &w,
                )
                .unwrap();
            let direct = pair(&ku, &w).unwrap();
            assert!((direct - composed).abs() <= 1e-12 * direct.abs().max(1.0));
            let kw = apply_stiffness(&map, &w).unwrap();
            let sym = pair(&kw, &u).unwrap();
            assert!((direct - sym).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn stiffness_kernel_and_positivity() {
        let cell = Cell::unit_cube(4).unwrap();
        let map = crate::material::MaterialMap::homogeneous(cell, Phase::isotropic(1.0, 1.0).unwrap());
        let c = VecField::from_fn(cell, |_| [0.3, -1.2, 2.0]);
        assert!(apply_stiffness(&map, &c).unwrap().max_abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let mut u = VecField::random(cell, &mut rng);
            u.remove_mean();
            assert!(pair(&apply_stiffness(&map, &u).unwrap(), &u).unwrap() > 0.0);
        }
    }

    #[test]
    fn divfree_projection_properties() {
        let cell = Cell::unit_cube(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let id = MandelMat66::identity();
        let s = MandelVec6([1.0, 0.0, -1.0, 0.5, 0.0, 0.2]);
        let sigma = make_divfree(&SymField::constant(cell, s), &id).unwrap();
        assert!(sigma.values.iter().all(|v| (*v - s).norm() < 1e-14));

        let tau = SymField::random(cell, &mut rng);
        let sigma = make_divfree(&tau, &id).unwrap();
        let op = SymGradOp::new(cell);
        assert!(op.weak_divergence(&sigma).unwrap().norm() <= 1e-10 * sigma.norm());
        assert!((cell_average(&sigma) - cell_average(&tau)).norm() < 1e-12);
        for _ in 0..20 {
            let v = VecField::random(cell, &mut rng);
            let gv = op.apply_periodic(&v).unwrap();
            assert!(inner(&sigma, &gv).unwrap().abs() <= 1e-10 * sigma.norm() * gv.norm());
        }
        let again = make_divfree(&sigma, &id).unwrap();
        assert!(again.sub(&sigma).unwrap().norm() <= 1e-10 * sigma.norm());
    }
}
