//! Property tests over randomly drawn polynomials, systems and orderings.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use rosenfied_core::fiedler::{Bijection, FiedlerSet};
use rosenfied_core::matpoly::{lu_det, CMatrix, Cx, MatrixPolynomial, DEFAULT_TRIM_TOL};
use rosenfied_core::rosenbrock::SystemMatrix;

fn c(re: f64, im: f64) -> Cx {
    Complex64::new(re, im)
}

fn entry() -> impl Strategy<Value = Cx> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| c(re, im))
}

fn square(size: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(entry(), size * size)
        .prop_map(move |v| DMatrix::from_vec(size, size, v))
}

fn matpoly(size: usize, deg: usize) -> impl Strategy<Value = MatrixPolynomial> {
    proptest::collection::vec(square(size), deg + 1)
        .prop_map(|coeffs| MatrixPolynomial::new(coeffs).unwrap())
}

fn any_matpoly() -> impl Strategy<Value = MatrixPolynomial> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(size, deg)| matpoly(size, deg))
}

fn lambda_point() -> impl Strategy<Value = Cx> {
    (0.2f64..1.5, 0.0f64..std::f64::consts::TAU).prop_map(|(r, th)| Cx::from_polar(r, th))
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn horner_shift_recurrence(p in any_matpoly(), lambda0 in lambda_point()) {
        for k in 0..p.deg() {
            let left = p.horner_shift(k + 1).unwrap().evaluate(lambda0);
            let right = p.horner_shift(k).unwrap().evaluate(lambda0).map(|z| z * lambda0)
                + p.coeff(p.deg() - k - 1);
            let scale = max_entry(&left).max(1.0);
            prop_assert!(max_entry(&(left - right)) <= 1e-12 * scale);
        }
    }

    #[test]
    fn det_poly_interpolates_pointwise(p in any_matpoly(), lambda0 in lambda_point()) {
        let det = p.det_poly();
        let direct = lu_det(&p.evaluate(lambda0));
        let interp = det.evaluate(lambda0);
        prop_assert!((direct - interp).norm() <= 1e-8 * direct.norm().max(1e-6));
    }

    #[test]
    fn unimodularity_survives_constant_factors(g in square(2)) {
        prop_assume!(lu_det(&g).norm() > 0.1);
        // triangular with nonconstant off-diagonal entry: unimodular by construction
        let base = MatrixPolynomial::new(vec![
            CMatrix::identity(2, 2),
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.5), c(0.0, 0.0), c(0.0, 0.0)]),
        ])
        .unwrap();
        prop_assert!(base.is_unimodular(1e-10));
        let scaled = &MatrixPolynomial::constant(g) * &base;
        prop_assert!(scaled.is_unimodular(1e-10));
    }

    #[test]
    fn scalar_roots_annihilate(p in matpoly(2, 3)) {
        let det = p.det_poly();
        prop_assume!(!det.is_zero());
        let scale = det.max_abs();
        for root in det.roots() {
            prop_assume!(root.norm() < 1e3);
            let value = det.evaluate(root).norm();
            let growth = (1.0 + root.norm()).powi(det.trimmed(DEFAULT_TRIM_TOL).formal_degree() as i32);
            prop_assert!(value <= 1e-7 * scale * growth, "p(root) = {value:e}");
        }
    }

    #[test]
    fn ciss_totals_and_factor_order(images in proptest::sample::subsequence((1usize..=6).collect::<Vec<_>>(), 6)) {
        prop_assume!(images.len() == 6);
        // subsequence of the full range of length 6 is the identity; shuffle it
        // deterministically by reversing chunks to get varied permutations
        let mut perm = images;
        perm.reverse();
        let sigma = Bijection::new(perm).unwrap();
        let ciss = sigma.ciss();
        prop_assert_eq!(ciss.total_consecutions() + ciss.total_inversions(), 5);
        // factor_order inverts images
        let order = sigma.factor_order();
        for (pos, &idx) in order.iter().enumerate() {
            prop_assert_eq!(sigma.image(idx), pos + 1);
        }
    }
}

fn small_system() -> impl Strategy<Value = SystemMatrix> {
    (1usize..=2, 1usize..=2, 1usize..=3, 1usize..=3).prop_flat_map(|(n, m, da, dd)| {
        (
            matpoly(n, da),
            square(n),
            proptest::collection::vec(entry(), n * m),
            proptest::collection::vec(entry(), m * n),
            matpoly(m, dd),
        )
            .prop_filter_map("regular leading coefficient", move |(a, lead, b, cc, d)| {
                if lu_det(&lead).norm() < 0.2 {
                    return None;
                }
                let mut coeffs = a.coeffs().to_vec();
                let deg = coeffs.len() - 1;
                coeffs[deg] = lead;
                let a = MatrixPolynomial::new(coeffs).unwrap();
                SystemMatrix::new(
                    a,
                    DMatrix::from_vec(n, m, b),
                    DMatrix::from_vec(m, n, cc),
                    d,
                )
                .ok()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn det_factorization(sys in small_system(), lambda0 in lambda_point()) {
        let a_det = lu_det(&sys.a().evaluate(lambda0));
        prop_assume!(a_det.norm() > 1e-3);
        let s_det = lu_det(&sys.eval_s(lambda0));
        let r_det = lu_det(&sys.eval_r(lambda0).unwrap());
        prop_assert!((s_det - a_det * r_det).norm() <= 1e-8 * s_det.norm().max(1e-9));
    }

    #[test]
    fn product_and_operation_free_assembly_agree(sys in small_system(), seed in any::<u64>()) {
        let ms = FiedlerSet::build(&sys);
        let d = ms.layout().d();
        let sigma = {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Bijection::random(d, &mut rng)
        };
        let product = ms.assemble_product(&sigma).unwrap();
        let direct = rosenfied_core::fiedler::assemble_algorithmic(&sys, &sigma).unwrap();
        prop_assert_eq!(product, direct);
    }

    #[test]
    fn pencil_couplings_sit_at_predicted_blocks(sys in small_system(), sigma_seed in any::<u64>()) {
        let ms = FiedlerSet::build(&sys);
        let d = ms.layout().d();
        let sigma = {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sigma_seed);
            Bijection::random(d, &mut rng)
        };
        prop_assert!(rosenfied_core::fiedler::corner_structure(&ms, &sigma).is_ok());
    }
}
