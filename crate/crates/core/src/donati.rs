//! Orthogonal splitting of periodic strain fields into a symmetric gradient
//! and a divergence-free remainder, the product-of-averages identity, and the
//! classical compatibility operators on smooth nodal samples.
//!
//! Discretely, the divergence-free fields `T_h` are the kernel of the weak
//! divergence, i.e. the quadrature-orthogonal complement of `Im G` within all
//! symmetric fields. Projecting onto `Im G` is a least-squares solve with the
//! identity-material stiffness, so every split below is orthogonal up to the
//! inner solver tolerance.

use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cell::{
    cell_average, inner, Cell, LPField, MandelMat66, MandelVec6, NodalSymField, SymField, VecField,
};
use crate::discrete::{divfree_options, make_divfree, solve_gradient_system, ElementOperator, SymGradOp};
use crate::error::{Error, Result};
use crate::solver::CgOptions;

/// Result of splitting `e = ∇s v + residual`.
#[derive(Debug, Clone)]
pub struct DonatiSplit {
    /// Recovered displacement `(A, ṽ)`, `ṽ` zero-mean.
    pub v: LPField,
    /// `∇s v = A + G ṽ`.
    pub grad_part: SymField,
    /// Divergence-free remainder `e − ∇s v`.
    pub residual: SymField,
    /// `|inner(G ṽ, residual)|`.
    pub ortho_defect: f64,
    pub iterations: usize,
}

fn projection_options(cell: &Cell, tol: f64) -> CgOptions {
    CgOptions {
        tol,
        max_iter: crate::solver::default_max_iter(cell).max(divfree_options().max_iter),
        deflate_translations: true,
        reference_norm: None,
    }
}

/// Least-squares symmetric-gradient fit of a symmetric field.
///
/// Returns the zero-mean periodic `v` minimizing `‖G v − e‖_W` and the
/// remainder `e − G v`, whose weak divergence vanishes to `tol`.
pub fn donati_project_periodic(e: &SymField, tol: f64) -> Result<(VecField, SymField)> {
    let (v, residual, _) = project_periodic(e, tol)?;
    Ok((v, residual))
}

fn project_periodic(e: &SymField, tol: f64) -> Result<(VecField, SymField, usize)> {
    let op = SymGradOp::new(e.cell);
    let k = ElementOperator::homogeneous_stiffness(e.cell, &MandelMat66::identity());
    let (v, out) = solve_gradient_system(&op, &k, e, &projection_options(&e.cell, tol))?;
    let residual = e.sub(&op.apply_periodic(&v)?)?;
    Ok((v, residual, out.iterations))
}

/// Split a symmetric field into `∇s v` with `v ∈ LP` and a divergence-free part.
///
/// The affine part of `v` is `A = cell_average(e)`; the fluctuation comes from
/// [`donati_project_periodic`] applied to `e − A`. Among the displacements
/// differing by a constant vector, the zero-mean one is returned.
pub fn donati_project_lp(e: &SymField, tol: f64) -> Result<DonatiSplit> {
    let a = cell_average(e);
    let fluct = e.shifted(-a);
    let (phi, residual, iterations) = project_periodic(&fluct, tol)?;
    let op = SymGradOp::new(e.cell);
    let g_phi = op.apply_periodic(&phi)?;
    let ortho_defect = inner(&g_phi, &residual)?.abs();
    Ok(DonatiSplit {
        grad_part: g_phi.shifted(a),
        v: LPField::new(a, phi),
        residual,
        ortho_defect,
        iterations,
    })
}

/// Both sides of the product-of-averages identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HillMandel {
    /// `(1/|Y|)·inner(∇s v, σ)`.
    pub lhs: f64,
    /// `⟨cell_average(∇s v), cell_average(σ)⟩`.
    pub rhs: f64,
    /// `‖div_w σ‖` relative to the element load scale of `σ`.
    pub divergence: f64,
    /// `‖∇s v‖·‖σ‖/|Y|`, the natural scale of both sides.
    pub scale: f64,
}

impl HillMandel {
    pub fn defect(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Default bound on the relative weak divergence accepted by [`hill_mandel`].
pub const HILL_MANDEL_DIV_TOL: f64 = 1e-8;

/// Evaluate `(1/|Y|)∫⟨∇s v, σ⟩` and `⟨A, S⟩` for `v ∈ LP`, `σ ∈ T_h`.
pub fn hill_mandel(v: &LPField, sigma: &SymField) -> Result<HillMandel> {
    hill_mandel_with(v, sigma, HILL_MANDEL_DIV_TOL)
}

pub fn hill_mandel_with(v: &LPField, sigma: &SymField, div_tol: f64) -> Result<HillMandel> {
    v.cell().check_same(&sigma.cell, "product of averages")?;
    let divergence = relative_divergence(sigma)?;
    if divergence > div_tol {
        return Err(Error::Precondition(format!(
            "stress is not divergence-free: relative ‖div_w σ‖ = {divergence:e} > {div_tol:e}"
        )));
    }
    let op = SymGradOp::new(sigma.cell);
    let e = op.apply(v)?;
    let volume = sigma.cell.volume();
    Ok(HillMandel {
        lhs: inner(&e, sigma)? / volume,
        rhs: cell_average(&e).dot(&cell_average(sigma)),
        divergence,
        scale: e.norm() * sigma.norm() / volume,
    })
}

/// `‖div_w σ‖` divided by the norm of the unassembled element loads of `σ`.
pub fn relative_divergence(sigma: &SymField) -> Result<f64> {
    let op = SymGradOp::new(sigma.cell);
    let scale = op.element_load_norm(sigma);
    let div = op.weak_divergence(sigma)?.norm();
    Ok(if scale == 0.0 { 0.0 } else { div / scale })
}

/// `(1/|Y|)·inner(e, s) − ⟨cell_average(e), cell_average(s)⟩`.
///
/// Vanishes for every divergence-free `s` exactly when `e` is a symmetric
/// gradient of an LP displacement.
pub fn product_of_averages_defect(e: &SymField, s: &SymField) -> Result<f64> {
    Ok(inner(e, s)? / e.cell.volume() - cell_average(e).dot(&cell_average(s)))
}

/// Seeded batch of divergence-free fields: the six constant Mandel basis
/// fields followed by `size` projected random fields, some with nonzero mean.
pub fn divergence_free_batch(cell: Cell, seed: u64, size: usize) -> Result<Vec<SymField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<SymField> = (0..6)
        .map(|m| SymField::constant(cell, MandelVec6::basis(m)))
        .collect();
    let id = MandelMat66::identity();
    for _ in 0..size {
        let tau = SymField::random(cell, &mut rng);
        out.push(make_divfree(&tau, &id)?);
    }
    Ok(out)
}

/// Per-node fourth-order field `R_ijkl`, stored flat with index `27i + 9j + 3k + l`.
#[derive(Debug, Clone)]
pub struct RiemannField {
    pub cell: Cell,
    pub values: Vec<[f64; 81]>,
}

impl RiemannField {
    #[inline]
    pub fn component(&self, node: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.values[node][27 * i + 9 * j + 3 * k + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Per-node 3×3 matrix field.
#[derive(Debug, Clone)]
pub struct NodalMatField {
    pub cell: Cell,
    pub values: Vec<Matrix3<f64>>,
}

impl NodalMatField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }

    fn from_sym(e: &NodalSymField) -> Self {
        Self {
            cell: e.cell,
            values: e.values.iter().map(MandelVec6::to_matrix).collect(),
        }
    }
}

fn check_stencil(cell: &Cell) -> Result<()> {
    let dims = cell.grid.dims();
    if dims.iter().any(|&n| n < 4) {
        return Err(Error::Parameter(format!(
            "finite-difference stencils need at least 4 nodes per direction, grid is {dims:?}"
        )));
    }
    Ok(())
}

/// Physical Hessians of the six Mandel components at every node, with
/// second-order periodic central differences.
fn hessians(e: &NodalSymField) -> Vec<[Matrix3<f64>; 6]> {
    let cell = e.cell;
    let grid = cell.grid;
    let dims = grid.dims();
    let ginv = cell.lattice.inverse();
    let h: [f64; 3] = std::array::from_fn(|d| 1.0 / dims[d] as f64);
    let at = |base: [usize; 3], off: [isize; 3]| -> &MandelVec6 {
        &e.values[grid.wrap(
            base[0] as isize + off[0],
            base[1] as isize + off[1],
            base[2] as isize + off[2],
        )]
    };
    (0..grid.node_count())
        .map(|node| {
            let base = grid.coords(node);
            let centre = &e.values[node];
            let mut out = [Matrix3::zeros(); 6];
            for c in 0..3 {
                for d in c..3 {
                    for (m, slot) in out.iter_mut().enumerate() {
                        let value = if c == d {
                            let mut p = [0isize; 3];
                            p[c] = 1;
                            let mut q = [0isize; 3];
                            q[c] = -1;
                            (at(base, p)[m] - 2.0 * centre[m] + at(base, q)[m]) / (h[c] * h[c])
                        } else {
                            let off = |sc: isize, sd: isize| {
                                let mut o = [0isize; 3];
                                o[c] = sc;
                                o[d] = sd;
                                o
                            };
                            (at(base, off(1, 1))[m] - at(base, off(1, -1))[m]
                                - at(base, off(-1, 1))[m]
                                + at(base, off(-1, -1))[m])
                                / (4.0 * h[c] * h[d])
                        };
                        slot[(c, d)] = value;
                        slot[(d, c)] = value;
                    }
                }
            }
            // reference Hessian → physical: Ginvᵀ H Ginv
            for slot in &mut out {
                *slot = ginv.transpose() * *slot * ginv;
            }
            out
        })
        .collect()
}

/// Saint-Venant incompatibility
/// `R_ijkl = ∂_lj e_ik + ∂_ki e_jl − ∂_li e_jk − ∂_kj e_il`
/// on smooth nodal samples, with periodic central differences.
pub fn saint_venant_residual(e: &NodalSymField) -> Result<RiemannField> {
    check_stencil(&e.cell)?;
    let hess = hessians(e);
    let comp = |h: &[Matrix3<f64>; 6], i: usize, j: usize, a: usize, b: usize| {
        let m = crate::cell::mandel_slot(i, j);
        let f = if m < 3 { 1.0 } else { std::f64::consts::SQRT_2 };
        h[m][(a, b)] / f
    };
    let values = hess
        .iter()
        .map(|h| {
            let mut r = [0.0; 81];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            r[27 * i + 9 * j + 3 * k + l] = comp(h, i, k, l, j)
                                + comp(h, j, l, k, i)
                                - comp(h, j, k, l, i)
                                - comp(h, i, l, k, j);
                        }
                    }
                }
            }
            r
        })
        .collect();
    Ok(RiemannField {
        cell: e.cell,
        values,
    })
}

/// Levi-Civita symbol with `ε₁₂₃ = +1`.
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Row-wise curl `(CURL M)_ij = ε_ilk ∂_l M_jk` with periodic central differences.
pub fn curl(m: &NodalMatField) -> Result<NodalMatField> {
    check_stencil(&m.cell)?;
    let cell = m.cell;
    let grid = cell.grid;
    let dims = grid.dims();
    let ginv = cell.lattice.inverse();
    let values = (0..grid.node_count())
        .map(|node| {
            let [i0, j0, k0] = grid.coords(node).map(|x| x as isize);
            // reference first derivatives of every entry
            let mut dref = [Matrix3::zeros(); 3];
            for (c, slot) in dref.iter_mut().enumerate() {
                let mut o = [0isize; 3];
                o[c] = 1;
                let plus = &m.values[grid.wrap(i0 + o[0], j0 + o[1], k0 + o[2])];
                let minus = &m.values[grid.wrap(i0 - o[0], j0 - o[1], k0 - o[2])];
                *slot = (plus - minus) * (0.5 * dims[c] as f64);
            }
            // physical ∂_l = Σ_c Ginv[c][l] ∂_ŷc
            let dphys: [Matrix3<f64>; 3] = std::array::from_fn(|l| {
                (0..3).fold(Matrix3::zeros(), |acc, c| acc + dref[c] * ginv[(c, l)])
            });
            let mut out = Matrix3::zeros();
            for i in 0..3 {
                for j in 0..3 {
                    let mut s = 0.0;
                    for l in 0..3 {
                        for k in 0..3 {
                            let eps = levi_civita(i, l, k);
                            if eps != 0.0 {
                                s += eps * dphys[l][(j, k)];
                            }
                        }
                    }
                    out[(i, j)] = s;
                }
            }
            out
        })
        .collect();
    Ok(NodalMatField { cell, values })
}

/// `CURL CURL e`: two applications of the row-wise curl.
pub fn curl_curl(e: &NodalSymField) -> Result<NodalMatField> {
    curl(&curl(&NodalMatField::from_sym(e))?)
}

/// `amplitude·sin(2π k·y + phase)` added to displacement component `component`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub component: usize,
    pub k: [f64; 3],
    pub amplitude: f64,
    pub phase: f64,
}

/// `amplitude·cos(2π k·y + phase)` added to the strain entries `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainWave {
    pub i: usize,
    pub j: usize,
    pub k: [f64; 3],
    pub amplitude: f64,
    pub phase: f64,
}

/// Smooth periodic strain field `A + ∇s v + extra`, where `v` is a sum of
/// waves and `extra` a sum of strain waves that are not gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryField {
    pub name: &'static str,
    /// Whether the field is a symmetric gradient.
    pub compatible: bool,
    pub affine: MandelVec6,
    pub displacement: Vec<Wave>,
    pub strain: Vec<StrainWave>,
}

impl BatteryField {
    pub fn strain_at(&self, y: &nalgebra::Vector3<f64>) -> MandelVec6 {
        let tau = 2.0 * std::f64::consts::PI;
        let phase_of = |k: &[f64; 3], p: f64| tau * (k[0] * y[0] + k[1] * y[1] + k[2] * y[2]) + p;
        let mut grad = Matrix3::zeros();
        for w in &self.displacement {
            let c = w.amplitude * phase_of(&w.k, w.phase).cos();
            for j in 0..3 {
                grad[(w.component, j)] += tau * w.k[j] * c;
            }
        }
        let mut e = (grad + grad.transpose()) * 0.5;
        for s in &self.strain {
            let v = s.amplitude * phase_of(&s.k, s.phase).cos();
            e[(s.i, s.j)] += v;
            if s.i != s.j {
                e[(s.j, s.i)] += v;
            }
        }
        self.affine + MandelVec6::from_symmetric(&e)
    }

    pub fn sample(&self, cell: Cell) -> NodalSymField {
        NodalSymField::from_fn(cell, |y| self.strain_at(y))
    }
}

fn wave(component: usize, k: [f64; 3], amplitude: f64, phase: f64) -> Wave {
    Wave { component, k, amplitude, phase }
}

fn strain_wave(i: usize, j: usize, k: [f64; 3], amplitude: f64, phase: f64) -> StrainWave {
    StrainWave { i, j, k, amplitude, phase }
}

/// Ten symmetric gradients followed by ten incompatible strain fields.
pub fn compatibility_battery() -> Vec<BatteryField> {
    use std::f64::consts::FRAC_PI_2;
    let gradient = |name, affine, displacement| BatteryField {
        name,
        compatible: true,
        affine,
        displacement,
        strain: vec![],
    };
    let incompatible = |name, displacement, strain| BatteryField {
        name,
        compatible: false,
        affine: MandelVec6::ZERO,
        displacement,
        strain,
    };
    let zero = MandelVec6::ZERO;
    vec![
        gradient("shear wave", zero, vec![wave(0, [1.0, 2.0, 0.0], 1.0, 0.0)]),
        gradient(
            "two components",
            zero,
            vec![wave(1, [0.0, 1.0, 2.0], 0.5, 0.3), wave(2, [1.0, 0.0, 0.0], 1.0, 0.0)],
        ),
        gradient("oblique wave", zero, vec![wave(2, [2.0, 1.0, 1.0], 0.3, 1.0)]),
        gradient(
            "crossed waves",
            zero,
            vec![wave(0, [0.0, 2.0, 1.0], 0.7, 0.0), wave(1, [1.0, 0.0, 2.0], 0.4, 0.5)],
        ),
        gradient(
            "affine plus wave",
            MandelVec6([0.3, -0.1, 0.2, 0.4, 0.0, -0.5]),
            vec![wave(1, [1.0, 1.0, 2.0], 0.5, 0.0)],
        ),
        gradient(
            "three components",
            zero,
            vec![
                wave(0, [1.0, 2.0, 0.0], 0.5, 0.0),
                wave(1, [2.0, 1.0, 0.0], 0.5, 0.7),
                wave(2, [0.0, 1.0, 2.0], 0.5, 1.4),
            ],
        ),
        gradient("steep wave", zero, vec![wave(2, [3.0, 1.0, 0.0], 0.2, 2.0)]),
        gradient(
            "diagonal and oblique",
            zero,
            vec![wave(0, [1.0, 1.0, 1.0], 1.0, 0.0), wave(1, [1.0, 0.0, 2.0], 0.6, 0.0)],
        ),
        gradient(
            "axial and oblique",
            zero,
            vec![wave(0, [0.0, 0.0, 1.0], 1.0, 0.0), wave(2, [2.0, 0.0, 1.0], 0.5, 0.2)],
        ),
        gradient(
            "mixed frequencies",
            zero,
            vec![wave(1, [1.0, 3.0, 0.0], 0.25, 0.0), wave(0, [2.0, 0.0, 1.0], 0.5, 1.2)],
        ),
        incompatible("e11 = cos 2πy2", vec![], vec![strain_wave(0, 0, [0.0, 1.0, 0.0], 1.0, 0.0)]),
        incompatible("e11 = cos 4πy2", vec![], vec![strain_wave(0, 0, [0.0, 2.0, 0.0], 1.0, 0.0)]),
        incompatible("e22 = cos 2πy3", vec![], vec![strain_wave(1, 1, [0.0, 0.0, 1.0], 1.0, 0.0)]),
        incompatible("e33 = sin 2πy1", vec![], vec![strain_wave(2, 2, [1.0, 0.0, 0.0], 1.0, -FRAC_PI_2)]),
        incompatible("e12 = cos 2πy3", vec![], vec![strain_wave(0, 1, [0.0, 0.0, 1.0], 1.0, 0.0)]),
        incompatible(
            "cos 2πy1 times identity",
            vec![],
            (0..3).map(|d| strain_wave(d, d, [1.0, 0.0, 0.0], 1.0, 0.0)).collect(),
        ),
        incompatible("e23 = sin 2πy1", vec![], vec![strain_wave(1, 2, [1.0, 0.0, 0.0], 1.0, -FRAC_PI_2)]),
        incompatible(
            "gradient plus e11 = cos 2πy2",
            vec![wave(0, [0.0, 0.0, 1.0], 0.5, 0.0)],
            vec![strain_wave(0, 0, [0.0, 1.0, 0.0], 1.0, 0.0)],
        ),
        incompatible("e11 = cos 2π(y2 + y3)", vec![], vec![strain_wave(0, 0, [0.0, 1.0, 1.0], 1.0, 0.0)]),
        incompatible(
            "e13 and e22 waves",
            vec![],
            vec![
                strain_wave(0, 2, [0.0, 1.0, 0.0], 1.0, -FRAC_PI_2),
                strain_wave(1, 1, [1.0, 0.0, 0.0], 1.0, 0.0),
            ],
        ),
    ]
}

/// Fraction of the largest second derivative below which a compatibility
/// residual counts as vanishing.
pub const COMPATIBILITY_RATIO: f64 = 0.1;

/// Both compatibility residuals of one sampled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityCheck {
    pub saint_venant: f64,
    pub curl_curl: f64,
    /// Largest second derivative of any strain entry.
    pub scale: f64,
}

impl CompatibilityCheck {
    pub fn saint_venant_vanishes(&self) -> bool {
        self.saint_venant <= COMPATIBILITY_RATIO * self.scale
    }

    pub fn curl_curl_vanishes(&self) -> bool {
        self.curl_curl <= COMPATIBILITY_RATIO * self.scale
    }

    /// The two residuals classify the field the same way.
    pub fn agree(&self) -> bool {
        self.saint_venant_vanishes() == self.curl_curl_vanishes()
    }
}

pub fn compatibility_check(e: &NodalSymField) -> Result<CompatibilityCheck> {
    let saint_venant = saint_venant_residual(e)?.max_abs();
    let curl_curl = curl_curl(e)?.max_abs();
    let scale = hessians(e)
        .iter()
        .flat_map(|h| {
            h.iter()
                .enumerate()
                .map(|(m, x)| x.amax() / if m < 3 { 1.0 } else { std::f64::consts::SQRT_2 })
        })
        .fold(0.0, f64::max);
    Ok(CompatibilityCheck {
        saint_venant,
        curl_curl,
        scale,
    })
}
