//! Mandel representation of symmetric second- and fourth-order tensors.
//!
//! A symmetric tensor `e` is stored as
//! `(e11, e22, e33, √2·e23, √2·e13, √2·e12)`. With this scaling the Euclidean
//! inner product of two 6-vectors is the full contraction `eᵢⱼsᵢⱼ`, and a
//! fourth-order tensor with minor symmetries acts as a plain 6×6 matrix.

use std::f64::consts::SQRT_2;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index pairs `(i, j)` of the six Mandel components.
pub const MANDEL_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

/// Mandel slot holding the `(i, j)` entry of a symmetric tensor.
#[inline]
pub fn mandel_slot(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => panic!("tensor index out of range: ({i}, {j})"),
    }
}

#[inline]
fn slot_factor(m: usize) -> f64 {
    if m < 3 {
        1.0
    } else {
        SQRT_2
    }
}

/// Symmetric second-order tensor in Mandel form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MandelVec6(pub [f64; 6]);

impl MandelVec6 {
    pub const ZERO: Self = Self([0.0; 6]);

    pub fn identity() -> Self {
        Self([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    /// The `m`-th Mandel unit vector; shears correspond to `√2`-normalized tensors.
    pub fn basis(m: usize) -> Self {
        let mut v = [0.0; 6];
        v[m] = 1.0;
        Self(v)
    }

    /// From a symmetric 3×3 matrix. Only the upper triangle is read.
    pub fn from_symmetric(m: &Matrix3<f64>) -> Self {
        Self([
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            SQRT_2 * m[(1, 2)],
            SQRT_2 * m[(0, 2)],
            SQRT_2 * m[(0, 1)],
        ])
    }

    /// Symmetric part of an arbitrary 3×3 matrix, plus a flag telling whether
    /// the input had a non-negligible skew part.
    pub fn from_matrix_symmetrized(m: &Matrix3<f64>) -> (Self, bool) {
        let sym = (m + m.transpose()) * 0.5;
        let skew = (m - m.transpose()) * 0.5;
        let was_skew = skew.norm() > 1e-14 * m.norm().max(f64::MIN_POSITIVE);
        (Self::from_symmetric(&sym), was_skew)
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let v = &self.0;
        let (a, b, c) = (v[3] / SQRT_2, v[4] / SQRT_2, v[5] / SQRT_2);
        Matrix3::new(v[0], c, b, c, v[1], a, b, a, v[2])
    }

    /// Tensor entry `(i, j)`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let m = mandel_slot(i, j);
        self.0[m] / slot_factor(m)
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::from(self.0)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self([v[0], v[1], v[2], v[3], v[4], v[5]])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|x| x * s))
    }
}

impl Index<usize> for MandelVec6 {
    type Output = f64;
    fn index(&self, m: usize) -> &f64 {
        &self.0[m]
    }
}

impl IndexMut<usize> for MandelVec6 {
    fn index_mut(&mut self, m: usize) -> &mut f64 {
        &mut self.0[m]
    }
}

impl Add for MandelVec6 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for MandelVec6 {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for MandelVec6 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl Neg for MandelVec6 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul<MandelVec6> for f64 {
    type Output = MandelVec6;
    fn mul(self, rhs: MandelVec6) -> MandelVec6 {
        rhs.scale(self)
    }
}

/// Fourth-order tensor with minor symmetries, as a 6×6 Mandel matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MandelMat66(pub Matrix6<f64>);

impl MandelMat66 {
    pub fn identity() -> Self {
        Self(Matrix6::identity())
    }

    pub fn zeros() -> Self {
        Self(Matrix6::zeros())
    }

    pub fn from_rows(rows: [[f64; 6]; 6]) -> Self {
        Self(Matrix6::from_fn(|i, j| rows[i][j]))
    }

    pub fn to_rows(&self) -> [[f64; 6]; 6] {
        let mut out = [[0.0; 6]; 6];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[(i, j)];
            }
        }
        out
    }

    /// Build a symmetric matrix from its 21-entry upper triangle, row by row.
    pub fn from_upper_triangle(entries: &[f64]) -> Result<Self> {
        if entries.len() != 21 {
            return Err(Error::Parameter(format!(
                "upper triangle of a 6x6 matrix has 21 entries, got {}",
                entries.len()
            )));
        }
        let mut m = Matrix6::zeros();
        let mut it = entries.iter();
        for i in 0..6 {
            for j in i..6 {
                let x = *it.next().unwrap();
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        Ok(Self(m))
    }

    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(21);
        for i in 0..6 {
            for j in i..6 {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Component `C_ijkl` of the underlying fourth-order tensor.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let a = mandel_slot(i, j);
        let b = mandel_slot(k, l);
        self.0[(a, b)] / (slot_factor(a) * slot_factor(b))
    }

    #[inline]
    pub fn apply(&self, e: &MandelVec6) -> MandelVec6 {
        let mut out = [0.0; 6];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..6 {
                s += self.0[(i, j)] * e.0[j];
            }
            *o = s;
        }
        MandelVec6(out)
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Frobenius norm of the Mandel matrix (equals the norm of the 4th-order tensor).
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Relative asymmetry `‖M − Mᵀ‖ / ‖M‖`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            0.0
        } else {
            (self.0 - self.0.transpose()).norm() / n
        }
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> [f64; 6] {
        let sym = (self.0 + self.0.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut out = [0.0; 6];
        for (o, x) in out.iter_mut().zip(eig.eigenvalues.iter()) {
            *o = *x;
        }
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol
    }

    /// Inverse of a symmetric positive-definite matrix.
    pub fn inverse_spd(&self) -> Result<Self> {
        if !self.is_symmetric(1e-10) {
            return Err(Error::Inversion(format!(
                "matrix is not symmetric (relative asymmetry {:e})",
                self.asymmetry()
            )));
        }
        let sym = (self.0 + self.0.transpose()) * 0.5;
        let chol = sym.cholesky().ok_or_else(|| {
            Error::Inversion(format!(
                "matrix is not positive definite (smallest eigenvalue {:e})",
                self.min_eigenvalue()
            ))
        })?;
        let inv = chol.inverse();
        Ok(Self((inv + inv.transpose()) * 0.5))
    }
}

impl Add for MandelMat66 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for MandelMat66 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul<MandelMat66> for f64 {
    type Output = MandelMat66;
    fn mul(self, rhs: MandelMat66) -> MandelMat66 {
        MandelMat66(rhs.0 * self)
    }
}

impl Serialize for MandelMat66 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MandelMat66 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[f64; 6]; 6]>::deserialize(d)?;
        Ok(Self::from_rows(rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
        let m = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        m + m.transpose()
    }

    #[test]
    fn mandel_isometry_on_random_tensors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let e = random_sym(&mut rng);
            let s = random_sym(&mut rng);
            let (me, ms) = (MandelVec6::from_symmetric(&e), MandelVec6::from_symmetric(&s));
            let full: f64 = e.component_mul(&e).sum();
            assert!((me.dot(&me) - full).abs() <= 1e-14 * full.max(1.0));
            let cross: f64 = e.component_mul(&s).sum();
            assert!((me.dot(&ms) - cross).abs() <= 1e-14 * 10.0);
            assert!((me.to_matrix() - e).norm() <= 1e-15 * 10.0);
        }
    }

    #[test]
    fn entry_and_slot_agree() {
        let e = Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0);
        let m = MandelVec6::from_symmetric(&e);
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.entry(i, j) - e[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetrize_flags_skew_input() {
        let a = Matrix3::new(1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        let (m, skew) = MandelVec6::from_matrix_symmetrized(&a);
        assert!(skew);
        assert!((m.entry(0, 1) - 1.0).abs() < 1e-15);
        let (_, skew) = MandelVec6::from_matrix_symmetrized(&Matrix3::identity());
        assert!(!skew);
    }

    #[test]
    fn matrix_action_matches_fourth_order_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Matrix6::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let c = MandelMat66(a + a.transpose());
        let e = random_sym(&mut rng);
        let s = c.apply(&MandelVec6::from_symmetric(&e)).to_matrix();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += c.component(i, j, k, l) * e[(k, l)];
                    }
                }
                assert!((acc - s[(i, j)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn upper_triangle_round_trip() {
        let vals: Vec<f64> = (0..21).map(|x| x as f64).collect();
        let m = MandelMat66::from_upper_triangle(&vals).unwrap();
        assert_eq!(m.upper_triangle(), vals);
        assert!(m.is_symmetric(0.0));
        assert!(MandelMat66::from_upper_triangle(&vals[..20]).is_err());
    }

    #[test]
    fn spd_inverse_rejects_indefinite() {
        let mut m = MandelMat66::identity();
        m.0[(2, 2)] = -1.0;
        assert!(matches!(m.inverse_spd(), Err(Error::Inversion(_))));
    }
}
