use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodicity lattice spanned by three linearly independent vectors.
///
/// The matrix `G` has the lattice vectors as columns. The reference map
/// `y = G ŷ` sends the unit cube onto the periodicity cell `Y`, and gradients
/// transform by `G⁻ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    g: Matrix3<f64>,
    g_inv: Matrix3<f64>,
    volume: f64,
}

impl Lattice {
    /// Build a lattice from its three periodicity vectors.
    pub fn new(g1: [f64; 3], g2: [f64; 3], g3: [f64; 3]) -> Result<Self> {
        let g = Matrix3::from_columns(&[
            Vector3::from(g1),
            Vector3::from(g2),
            Vector3::from(g3),
        ]);
        let det = g.determinant();
        let scale = Vector3::from(g1).norm() * Vector3::from(g2).norm() * Vector3::from(g3).norm();
        if !det.is_finite() || det.abs() <= 1e-12 * scale || scale == 0.0 {
            return Err(Error::Parameter(format!(
                "lattice vectors are linearly dependent (det G = {det:e})"
            )));
        }
        let g_inv = g
            .try_inverse()
            .ok_or_else(|| Error::Parameter("lattice matrix is singular".into()))?;
        Ok(Self {
            g,
            g_inv,
            volume: det.abs(),
        })
    }

    /// The unit cube lattice, `G = I`.
    pub fn unit_cube() -> Self {
        Self {
            g: Matrix3::identity(),
            g_inv: Matrix3::identity(),
            volume: 1.0,
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.g
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.g_inv
    }

    /// Lattice vector `g_k` for `k ∈ {0, 1, 2}`.
    pub fn vector(&self, k: usize) -> Vector3<f64> {
        self.g.column(k).into_owned()
    }

    /// Volume `|Y| = |det G|` of the periodicity cell.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Physical point of reference coordinates `ŷ`.
    pub fn to_physical(&self, reference: &Vector3<f64>) -> Vector3<f64> {
        self.g * reference
    }

    pub fn to_reference(&self, y: &Vector3<f64>) -> Vector3<f64> {
        self.g_inv * y
    }

    /// Transform a gradient taken in reference coordinates into a physical gradient.
    pub fn physical_gradient(&self, reference_gradient: &Vector3<f64>) -> Vector3<f64> {
        self.g_inv.transpose() * reference_gradient
    }

    /// Unit normal of the cell faces spanned by the two lattice vectors other than `g_k`.
    pub fn face_normal(&self, k: usize) -> Vector3<f64> {
        let row = self.g_inv.row(k).transpose();
        row / row.norm()
    }

    /// Area of the faces of `Y` spanned by the two lattice vectors other than `g_k`.
    pub fn face_area(&self, k: usize) -> f64 {
        let a = self.vector((k + 1) % 3);
        let b = self.vector((k + 2) % 3);
        a.cross(&b).norm()
    }

    pub fn vectors(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (k, v) in out.iter_mut().enumerate() {
            let c = self.vector(k);
            *v = [c[0], c[1], c[2]];
        }
        out
    }
}

impl Default for Lattice {
    fn default() -> Self {
        Self::unit_cube()
    }
}

/// Periodic structured grid on the reference cube.
///
/// Nodes sit at `ŷ = (i/n1, j/n2, k/n3)` and are stored once: node `n1` in
/// direction 1 is node `0`. Element `(i, j, k)` is the voxel whose lowest
/// corner is node `(i, j, k)`, so there are as many elements as nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dims: [usize; 3],
}

impl Grid {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if n1 < 2 || n2 < 2 || n3 < 2 {
            return Err(Error::Parameter(format!(
                "grid needs at least 2 nodes per direction, got {n1}x{n2}x{n3}"
            )));
        }
        Ok(Self { dims: [n1, n2, n3] })
    }

    pub fn cubic(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn node_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn element_count(&self) -> usize {
        self.node_count()
    }

    /// Number of 2×2×2 Gauss points over the whole cell.
    pub fn quadrature_count(&self) -> usize {
        8 * self.element_count()
    }

    /// Linear id of the node with (possibly out-of-range) indices, wrapped periodically.
    #[inline]
    pub fn wrap(&self, i: isize, j: isize, k: isize) -> usize {
        let [n1, n2, n3] = self.dims;
        let i = i.rem_euclid(n1 as isize) as usize;
        let j = j.rem_euclid(n2 as isize) as usize;
        let k = k.rem_euclid(n3 as isize) as usize;
        i + n1 * (j + n2 * k)
    }

    /// Inverse of the linear indexing, `i` fastest.
    #[inline]
    pub fn coords(&self, id: usize) -> [usize; 3] {
        let [n1, n2, _] = self.dims;
        [id % n1, (id / n1) % n2, id / (n1 * n2)]
    }

    /// The 8 node ids of an element, local index `a + 2b + 4c` for the corner offset `(a, b, c)`.
    #[inline]
    pub fn element_nodes(&self, element: usize) -> [usize; 8] {
        let [i, j, k] = self.coords(element).map(|x| x as isize);
        let mut out = [0usize; 8];
        for (local, slot) in out.iter_mut().enumerate() {
            let (a, b, c) = corner(local);
            *slot = self.wrap(i + a as isize, j + b as isize, k + c as isize);
        }
        out
    }

    /// Elements touching a node, paired with the node's local index inside each.
    #[inline]
    pub fn node_elements(&self, node: usize) -> [(usize, usize); 8] {
        let [i, j, k] = self.coords(node).map(|x| x as isize);
        let mut out = [(0usize, 0usize); 8];
        for (local, slot) in out.iter_mut().enumerate() {
            let (a, b, c) = corner(local);
            *slot = (
                self.wrap(i - a as isize, j - b as isize, k - c as isize),
                local,
            );
        }
        out
    }

    /// Reference coordinates of a node.
    pub fn node_reference(&self, node: usize) -> [f64; 3] {
        let c = self.coords(node);
        [
            c[0] as f64 / self.dims[0] as f64,
            c[1] as f64 / self.dims[1] as f64,
            c[2] as f64 / self.dims[2] as f64,
        ]
    }

    /// Grid refined by an integer factor in every direction.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            self.dims[0] * factor,
            self.dims[1] * factor,
            self.dims[2] * factor,
        )
    }
}

/// Corner offset of a local node (or Gauss point) index.
#[inline]
pub(crate) fn corner(local: usize) -> (usize, usize, usize) {
    (local & 1, (local >> 1) & 1, (local >> 2) & 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_periodic() {
        let g = Grid::new(3, 4, 5).unwrap();
        for i in -4..8isize {
            for j in -5..9isize {
                for k in -6..10isize {
                    assert_eq!(g.wrap(i + 3, j, k), g.wrap(i, j, k));
                    assert_eq!(g.wrap(i, j + 4, k), g.wrap(i, j, k));
                    assert_eq!(g.wrap(i, j, k + 5), g.wrap(i, j, k));
                }
            }
        }
    }

    #[test]
    fn element_and_node_incidence_agree() {
        let g = Grid::new(2, 3, 4).unwrap();
        for node in 0..g.node_count() {
            for (e, local) in g.node_elements(node) {
                assert_eq!(g.element_nodes(e)[local], node);
            }
        }
    }

    #[test]
    fn rejects_small_or_degenerate() {
        assert!(Grid::new(1, 4, 4).is_err());
        assert!(Lattice::new([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn skewed_lattice_volume_and_normals() {
        let l = Lattice::new([2.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 3.0]).unwrap();
        assert!((l.volume() - 6.0).abs() < 1e-14);
        let n = l.face_normal(0);
        // normal to the plane spanned by g2, g3
        assert!(n.dot(&l.vector(1)).abs() < 1e-14);
        assert!(n.dot(&l.vector(2)).abs() < 1e-14);
        assert!((l.face_area(0) - 3.0 * 2f64.sqrt()).abs() < 1e-13);
    }
}
