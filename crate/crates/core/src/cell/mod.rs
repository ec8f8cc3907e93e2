//! Periodicity cell, its voxel discretization, tensors and fields.

pub(crate) mod field;
mod lattice;
pub mod quadrature;
mod tensor;

pub use field::{cell_average, inner, pair, Covector, LPField, NodalSymField, SymField, VecField};
pub use lattice::{Grid, Lattice};
pub(crate) use lattice::corner;
pub use tensor::{mandel_slot, MandelMat66, MandelVec6, MANDEL_PAIRS};

use nalgebra::Vector3;

/// A lattice together with the periodic grid that discretizes its cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub lattice: Lattice,
    pub grid: Grid,
}

impl Cell {
    pub fn new(lattice: Lattice, grid: Grid) -> Self {
        Self { lattice, grid }
    }

    /// Unit cube cell with `n³` voxels.
    pub fn unit_cube(n: usize) -> crate::Result<Self> {
        Ok(Self::new(Lattice::unit_cube(), Grid::cubic(n)?))
    }

    pub fn volume(&self) -> f64 {
        self.lattice.volume()
    }

    /// Weight of one Gauss point; all points share it on a uniform grid.
    pub fn quadrature_weight(&self) -> f64 {
        self.volume() / self.grid.quadrature_count() as f64
    }

    /// Reference coordinates of Gauss point `g` of `element`.
    pub fn quadrature_reference(&self, element: usize, g: usize) -> [f64; 3] {
        let [i, j, k] = self.grid.coords(element);
        let [n1, n2, n3] = self.grid.dims();
        let xi = quadrature::gauss_points()[g];
        [
            (i as f64 + xi[0]) / n1 as f64,
            (j as f64 + xi[1]) / n2 as f64,
            (k as f64 + xi[2]) / n3 as f64,
        ]
    }

    pub fn quadrature_point(&self, element: usize, g: usize) -> Vector3<f64> {
        self.lattice
            .to_physical(&Vector3::from(self.quadrature_reference(element, g)))
    }

    pub fn node_point(&self, node: usize) -> Vector3<f64> {
        self.lattice
            .to_physical(&Vector3::from(self.grid.node_reference(node)))
    }

    pub(crate) fn check_same(&self, other: &Cell, what: &str) -> crate::Result<()> {
        if self.grid != other.grid {
            return Err(crate::Error::Dimension(format!(
                "{what}: grids differ ({:?} vs {:?})",
                self.grid.dims(),
                other.grid.dims()
            )));
        }
        if self.lattice != other.lattice {
            return Err(crate::Error::Dimension(format!("{what}: lattices differ")));
        }
        Ok(())
    }
}
