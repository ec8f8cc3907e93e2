//! Trilinear hexahedral shape functions and the 2×2×2 Gauss rule on one voxel.
//!
//! Local coordinates `ξ ∈ [0, 1]³`. Local node `a + 2b + 4c` sits at the
//! corner `(a, b, c)`; Gauss point `p + 2q + 4r` uses the abscissa pair
//! `(p, q, r)`.

use super::lattice::corner;

/// Gauss abscissae on `[0, 1]`.
pub const GAUSS_1D: [f64; 2] = [
    0.5 - 0.288_675_134_594_812_9,
    0.5 + 0.288_675_134_594_812_9,
];

/// Local coordinates of the 8 Gauss points.
pub fn gauss_points() -> [[f64; 3]; 8] {
    let mut out = [[0.0; 3]; 8];
    for (g, p) in out.iter_mut().enumerate() {
        let (a, b, c) = corner(g);
        *p = [GAUSS_1D[a], GAUSS_1D[b], GAUSS_1D[c]];
    }
    out
}

#[inline]
fn hat(bit: usize, x: f64) -> f64 {
    if bit == 1 {
        x
    } else {
        1.0 - x
    }
}

#[inline]
fn dhat(bit: usize) -> f64 {
    if bit == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Value of local shape function `a` at local coordinates `xi`.
#[inline]
pub fn shape(a: usize, xi: &[f64; 3]) -> f64 {
    let (p, q, r) = corner(a);
    hat(p, xi[0]) * hat(q, xi[1]) * hat(r, xi[2])
}

/// Gradient of local shape function `a` with respect to `ξ`.
#[inline]
pub fn shape_grad_local(a: usize, xi: &[f64; 3]) -> [f64; 3] {
    let (p, q, r) = corner(a);
    [
        dhat(p) * hat(q, xi[1]) * hat(r, xi[2]),
        hat(p, xi[0]) * dhat(q) * hat(r, xi[2]),
        hat(p, xi[0]) * hat(q, xi[1]) * dhat(r),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        for xi in gauss_points() {
            let s: f64 = (0..8).map(|a| shape(a, &xi)).sum();
            assert!((s - 1.0).abs() < 1e-15);
            for d in 0..3 {
                let g: f64 = (0..8).map(|a| shape_grad_local(a, &xi)[d]).sum();
                assert!(g.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gauss_rule_integrates_cubics_per_direction() {
        // ∫₀¹ x³ dx = 1/4 with two points
        let s: f64 = GAUSS_1D.iter().map(|x| 0.5 * x.powi(3)).sum();
        assert!((s - 0.25).abs() < 1e-15);
    }
}
