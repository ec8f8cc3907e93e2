use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cellhom::cell::{
    cell_average, inner, pair, Cell, Grid, LPField, Lattice, MandelMat66, MandelVec6, SymField, VecField,
};
use cellhom::discrete::{apply_stiffness, green_defect, make_divfree, sym_gradient, weak_divergence};
use cellhom::donati::{divergence_free_batch, donati_project_lp, product_of_averages_defect};
use cellhom::material::{MaterialMap, Phase};

fn small_cell() -> impl Strategy<Value = Cell> {
    (2usize..5, 2usize..5, 2usize..5, -0.3f64..0.3, -0.3f64..0.3).prop_map(|(a, b, c, s, t)| {
        let lattice = Lattice::new([1.0, 0.0, 0.0], [s, 1.0, 0.0], [0.0, t, 0.8]).unwrap();
        Cell::new(lattice, Grid::new(a, b, c).unwrap())
    })
}

fn mandel() -> impl Strategy<Value = MandelVec6> {
    proptest::array::uniform6(-2.0f64..2.0).prop_map(MandelVec6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mandel_round_trip_preserves_the_inner_product(a in mandel(), b in mandel()) {
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let frobenius: f64 = ma.component_mul(&mb).sum();
        prop_assert!((a.dot(&b) - frobenius).abs() <= 1e-12 * (1.0 + frobenius.abs()));
        let back = MandelVec6::from_symmetric(&ma);
        prop_assert!((back - a).norm() <= 1e-14 * (1.0 + a.norm()));
        prop_assert_eq!(ma, ma.transpose());
    }

    #[test]
    fn average_is_adjoint_to_constant_embedding(cell in small_cell(), a in mandel(), seed in any::<u64>()) {
        let s = SymField::random(cell, &mut ChaCha8Rng::seed_from_u64(seed));
        let lhs = inner(&SymField::constant(cell, a), &s).unwrap();
        let rhs = cell.volume() * a.dot(&cell_average(&s));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn green_identity_on_skewed_cells(cell in small_cell(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = SymField::random(cell, &mut rng);
        let v = VecField::random(cell, &mut rng);
        let scale = mu.norm() * v.gradient_norm_sq().sqrt();
        prop_assert!(green_defect(&mu, &v).unwrap().abs() <= 1e-13 * scale);
    }

    #[test]
    fn stiffness_is_symmetric_and_kills_translations(cell in small_cell(), seed in any::<u64>(), t in proptest::array::uniform3(-1.0f64..1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = MaterialMap::random_two_phase(
            cell,
            Phase::isotropic(5.0, 3.0).unwrap(),
            Phase::isotropic(1.0, 0.5).unwrap(),
            0.4,
            &mut rng,
        ).unwrap();
        let u = VecField::random(cell, &mut rng);
        let w = VecField::random(cell, &mut rng);
        let uw = pair(&apply_stiffness(&map, &u).unwrap(), &w).unwrap();
        let wu = pair(&apply_stiffness(&map, &w).unwrap(), &u).unwrap();
        prop_assert!((uw - wu).abs() <= 1e-12 * (uw.abs() + wu.abs() + 1.0));
        let translation = VecField::from_fn(cell, |_| t);
        prop_assert!(apply_stiffness(&map, &translation).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn projected_fields_are_weakly_divergence_free(cell in small_cell(), seed in any::<u64>()) {
        let tau = SymField::random(cell, &mut ChaCha8Rng::seed_from_u64(seed));
        let sigma = make_divfree(&tau, &MandelMat66::identity()).unwrap();
        let load = weak_divergence(&sigma).unwrap().norm();
        let reference = weak_divergence(&tau).unwrap().norm();
        prop_assert!(load <= 1e-8 * reference.max(1e-300));
        prop_assert!((cell_average(&sigma) - cell_average(&tau)).norm() <= 1e-10 * (1.0 + tau.norm()));
    }

    #[test]
    fn donati_split_is_orthogonal(cell in small_cell(), seed in any::<u64>()) {
        let e = SymField::random(cell, &mut ChaCha8Rng::seed_from_u64(seed));
        let split = donati_project_lp(&e, 1e-11).unwrap();
        let (a, b, c) = (e.norm(), split.grad_part.norm(), split.residual.norm());
        prop_assert!((a * a - b * b - c * c).abs() <= 1e-9 * a * a);
        let sum = split.grad_part.add(&split.residual).unwrap();
        prop_assert!(sum.sub(&e).unwrap().norm() <= 1e-12 * a);
    }
}

#[test]
fn symmetric_matrices_round_trip_exactly() {
    let m = Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0);
    assert_eq!(MandelVec6::from_symmetric(&m).to_matrix(), m);
}

#[test]
fn product_of_averages_characterizes_gradients() {
    let cell = Cell::unit_cube(6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let batch = divergence_free_batch(cell, 9, 10).unwrap();
    let e = sym_gradient(&LPField::new(MandelVec6([0.2, -0.1, 0.3, 0.4, 0.0, -0.2]), VecField::random(cell, &mut rng)))
        .unwrap();
    for s in &batch {
        let scale = e.norm() * s.norm() / cell.volume();
        assert!(product_of_averages_defect(&e, s).unwrap().abs() <= 1e-10 * scale);
    }

    // a divergence-free fluctuation is no gradient: pairing it with itself exposes it
    let r = &batch[6];
    let r = r.shifted(-cell_average(r));
    let scale = r.norm() * r.norm() / cell.volume();
    assert!(product_of_averages_defect(&r, &r).unwrap() >= 0.5 * scale);
}
