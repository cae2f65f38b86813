//! Randomized invariants over small algebras.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qlevy::bialgebra::{function_algebra, group_algebra, GroupTable};
use qlevy::cocycle::{inner_product, StepFunction};
use qlevy::convolution::{conv_exp, convolve, ExpAlgorithm};
use qlevy::walk::{build_walk_unitary, unitarity_residual};
use qlevy::Functional;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im)), n)
}

proptest! {
    #[test]
    fn convolution_is_associative_on_s3_group_algebra(a in coeffs(6), b in coeffs(6), c in coeffs(6)) {
        let alg = group_algebra(&GroupTable::s3()).unwrap();
        let (a, b, c) = (Functional::new(a), Functional::new(b), Functional::new(c));
        let left = convolve(&alg, &convolve(&alg, &a, &b), &c);
        let right = convolve(&alg, &a, &convolve(&alg, &b, &c));
        prop_assert!(left.distance(&right) <= 1e-12);
    }

    #[test]
    fn counit_is_the_convolution_unit(a in coeffs(6)) {
        let alg = function_algebra(&GroupTable::s3()).unwrap();
        let a = Functional::new(a);
        prop_assert!(convolve(&alg, &alg.counit(), &a).distance(&a) <= 1e-15);
        prop_assert!(convolve(&alg, &a, &alg.counit()).distance(&a) <= 1e-15);
    }

    #[test]
    fn jump_rates_give_probability_vectors(r1 in 0.0..3.0f64, r2 in 0.0..3.0f64, t in 0.0..2.0f64) {
        let alg = function_algebra(&GroupTable::cyclic(3)).unwrap();
        let gamma = Functional::from_real(&[-(r1 + r2), r1, r2]);
        let p = conv_exp(&alg, &gamma, t, ExpAlgorithm::Rmap);
        let total: C64 = p.coeffs.iter().sum();
        prop_assert!((total - 1.0).norm() <= 1e-12);
        prop_assert!(p.coeffs.iter().all(|z| z.re >= -1e-14 && z.im.abs() <= 1e-14));
    }

    #[test]
    fn refinement_keeps_inner_products(v in coeffs(2), w in coeffs(2), cut in 0.0..3.0f64, a in 0.0..1.0f64, b in 1.0..3.0f64) {
        let f = StepFunction::indicator(DVector::from_vec(v), 0.25, 1.75).unwrap();
        let g = StepFunction::indicator(DVector::from_vec(w), 0.5, 2.5).unwrap();
        let base = inner_product(&f, &g, a, b);
        prop_assert!((inner_product(&f.refine(cut), &g, a, b) - base).norm() <= 1e-14);
    }

    #[test]
    fn walk_unitaries_are_unitary(xi in coeffs(3), frac in 0.0..1.0f64) {
        let xi = DVector::from_vec(xi);
        prop_assume!(xi.norm() > 1e-3);
        let h = frac.max(1e-6) / xi.norm_squared();
        let u = build_walk_unitary(&xi, h).unwrap();
        prop_assert!(unitarity_residual(&u) <= 1e-13);
    }
}
