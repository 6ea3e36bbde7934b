use super::*;
use crate::matpoly::lu_det;
use crate::random::{random_integer_system, SystemParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn c(re: f64) -> Cx {
    Cx::new(re, 0.0)
}

fn scalar_poly(vals: &[f64]) -> MatrixPolynomial {
    MatrixPolynomial::new(vals.iter().map(|&v| CMatrix::from_element(1, 1, c(v))).collect())
        .unwrap()
}

fn one_by_one(b: f64, cc: f64, a: &[f64], d: &[f64]) -> SystemMatrix {
    SystemMatrix::new(
        scalar_poly(a),
        CMatrix::from_element(1, 1, c(b)),
        CMatrix::from_element(1, 1, c(cc)),
        scalar_poly(d),
    )
    .unwrap()
}

/// Degree-3 state part, degree-2 output part, distinct primes everywhere.
fn prime_system_3_2() -> SystemMatrix {
    one_by_one(19.0, 23.0, &[2.0, 3.0, 5.0, 7.0], &[11.0, 13.0, 17.0])
}

fn mat5(rows: [[f64; 5]; 5]) -> CMatrix {
    CMatrix::from_fn(5, 5, |i, j| c(rows[i][j]))
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn ciss_examples() {
    let asc = Bijection::ascending(5);
    assert_eq!(asc.ciss().pairs(), &[(4, 0)]);
    let desc = Bijection::descending(5);
    assert_eq!(desc.ciss().pairs(), &[(0, 4)]);
    let s1 = Bijection::new(vec![1, 3, 2]).unwrap();
    assert_eq!(s1.ciss().pairs(), &[(1, 1)]);
    let mixed = Bijection::new(vec![2, 1, 3]).unwrap();
    assert_eq!(mixed.ciss().pairs(), &[(0, 1), (1, 0)]);
    // totals always sum to d-1
    for sigma in Bijection::all(4) {
        let ciss = sigma.ciss();
        assert_eq!(ciss.total_consecutions() + ciss.total_inversions(), 3);
    }
}

#[test]
fn bijection_validation() {
    assert!(Bijection::new(vec![]).is_err());
    assert!(Bijection::new(vec![1, 1, 3]).is_err());
    assert!(Bijection::new(vec![0, 1]).is_err());
    assert!(Bijection::new(vec![2, 3]).is_err());
}

#[test]
fn factor_order_inverts_images() {
    let sigma = Bijection::new(vec![2, 3, 1, 4]).unwrap();
    // position 1 holds factor 2, then 0, 1, 3
    assert_eq!(sigma.factor_order(), vec![2, 0, 1, 3]);
}

#[test]
fn side_factors_shapes() {
    // degenerate degree 1: only M0 = -A0 and M1 = A1
    let a = scalar_poly(&[4.0, 9.0]);
    let m = build_m(&a);
    assert_eq!(m.len(), 2);
    assert_eq!(m[0], CMatrix::from_element(1, 1, c(-4.0)));
    assert_eq!(m[1], CMatrix::from_element(1, 1, c(9.0)));

    // degree 2 middle factor is the bare pivot
    let a = scalar_poly(&[1.0, 2.0, 3.0]);
    let m = build_m(&a);
    assert_eq!(
        m[1],
        CMatrix::from_row_slice(2, 2, &[c(-2.0), c(1.0), c(1.0), c(0.0)])
    );

    // degree 3: M2 pivot in the top-left corner
    let a = scalar_poly(&[2.0, 3.0, 5.0, 7.0]);
    let m = build_m(&a);
    let expect = CMatrix::from_row_slice(
        3,
        3,
        &[c(-5.0), c(1.0), c(0.0), c(1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)],
    );
    assert_eq!(m[2], expect);
}

#[test]
fn factor_family_matches_printed_example() {
    let sys = prime_system_3_2();
    let ms = FiedlerSet::build(&sys);
    assert_eq!(ms.mm().len(), 4);
    let mm0 = mat5([
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -2.0, 0.0, 19.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, -23.0, 0.0, -11.0],
    ]);
    let mm1 = mat5([
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, -3.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -13.0, 1.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
    ]);
    let mm2 = mat5([
        [-5.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ]);
    let mm3 = mat5([
        [7.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 17.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ]);
    assert_eq!(ms.mm()[0], mm0);
    assert_eq!(ms.mm()[1], mm1);
    assert_eq!(ms.mm()[2], mm2);
    assert_eq!(ms.mm()[3], mm3);
}

#[test]
fn product_reproduces_printed_ordering_and_commutes() {
    let sys = prime_system_3_2();
    let ms = FiedlerSet::build(&sys);
    let s1 = Bijection::new(vec![1, 3, 2]).unwrap();
    let s2 = Bijection::new(vec![2, 3, 1]).unwrap();
    let printed = mat5([
        [-5.0, -3.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, -2.0, 0.0, 19.0, 0.0],
        [0.0, 0.0, 0.0, -13.0, 1.0],
        [0.0, -23.0, 0.0, -11.0, 0.0],
    ]);
    let p1 = ms.assemble_product(&s1).unwrap();
    let p2 = ms.assemble_product(&s2).unwrap();
    assert_eq!(p1, printed);
    assert_eq!(p1, p2);
}

#[test]
fn interior_factors_block_diagonal_when_degrees_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let sys = random_integer_system(&SystemParams { n: 2, m: 2, d_a: 3, d_d: 3 }, &mut rng).unwrap();
    let ms = FiedlerSet::build(&sys);
    let l = ms.layout();
    for i in 1..l.d() {
        for bi in 0..l.d_a {
            for bj in 0..l.d_d {
                assert_eq!(l.b_block(&ms.mm()[i], bi, bj), CMatrix::zeros(l.n, l.m));
                assert_eq!(l.c_block(&ms.mm()[i], bj, bi), CMatrix::zeros(l.m, l.n));
            }
        }
    }
}

#[test]
fn padded_factor_matches_printed_mixed_degree_case() {
    // d_A = 3 < d_D = 4: factor 3 is identity on the state part, N_3 below
    let sys = one_by_one(19.0, 23.0, &[2.0, 3.0, 5.0, 7.0], &[11.0, 13.0, 17.0, 29.0, 31.0]);
    let ms = FiedlerSet::build(&sys);
    let l = ms.layout();
    let mm3 = &ms.mm()[3];
    assert_eq!(
        mm3.view((0, 0), (3, 3)).clone_owned(),
        CMatrix::identity(3, 3)
    );
    // N_3 pivot at output blocks (0, 1)
    assert_eq!(l.d_block(mm3, 0, 0)[(0, 0)], c(-29.0));
    assert_eq!(l.d_block(mm3, 0, 1)[(0, 0)], c(1.0));
    assert_eq!(l.d_block(mm3, 1, 0)[(0, 0)], c(1.0));
    assert_eq!(l.d_block(mm3, 1, 1)[(0, 0)], c(0.0));
}

#[test]
fn single_factor_degree_one() {
    let sys = one_by_one(2.0, 3.0, &[5.0, 7.0], &[11.0, 13.0]);
    let ms = FiedlerSet::build(&sys);
    let sigma = Bijection::new(vec![1]).unwrap();
    assert_eq!(ms.assemble_product(&sigma).unwrap(), ms.mm()[0]);
}

#[test]
fn commutativity_of_distant_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for params in [
        SystemParams { n: 2, m: 1, d_a: 4, d_d: 2 },
        SystemParams { n: 1, m: 2, d_a: 2, d_d: 5 },
        SystemParams { n: 2, m: 2, d_a: 3, d_d: 3 },
    ] {
        let sys = random_integer_system(&params, &mut rng).unwrap();
        let ms = FiedlerSet::build(&sys);
        // the product factors 𝕄_0..𝕄_{d-1}; the leading factor can collide
        // with low indices on the shorter part despite a large index gap
        let d = ms.layout().d();
        for i in 0..d {
            for j in 0..d {
                if i.abs_diff(j) > 1 {
                    let ij = &ms.mm()[i] * &ms.mm()[j];
                    let ji = &ms.mm()[j] * &ms.mm()[i];
                    assert_eq!(ij, ji, "factors {i},{j} must commute");
                }
            }
        }
    }
}

#[test]
fn interior_factors_have_unit_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for params in [
        SystemParams { n: 3, m: 2, d_a: 4, d_d: 3 },
        SystemParams { n: 1, m: 3, d_a: 2, d_d: 4 },
    ] {
        let sys = random_integer_system(&params, &mut rng).unwrap();
        let ms = FiedlerSet::build(&sys);
        for i in 1..ms.layout().d() {
            let det = lu_det(&ms.mm()[i]).norm();
            assert!((det - 1.0).abs() <= 1e-8, "|det 𝕄_{i}| = {det}");
        }
    }
}

#[test]
fn algorithmic_equals_product_across_degree_regimes() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for params in [
        SystemParams { n: 2, m: 2, d_a: 4, d_d: 2 },
        SystemParams { n: 2, m: 2, d_a: 2, d_d: 4 },
        SystemParams { n: 2, m: 2, d_a: 3, d_d: 3 },
        SystemParams { n: 1, m: 3, d_a: 5, d_d: 1 },
        SystemParams { n: 3, m: 1, d_a: 1, d_d: 5 },
    ] {
        let sys = random_integer_system(&params, &mut rng).unwrap();
        let ms = FiedlerSet::build(&sys);
        for _ in 0..50 {
            let sigma = Bijection::random(ms.layout().d(), &mut rng);
            let product = ms.assemble_product(&sigma).unwrap();
            let direct = assemble_algorithmic(&sys, &sigma).unwrap();
            assert_eq!(direct, product, "σ = {:?}", sigma.images());
        }
    }
}

#[test]
fn algorithmic_matches_printed_w0_branches() {
    // degree 2 on both parts: the first fold already is the whole product
    let sys = one_by_one(19.0, 23.0, &[2.0, 3.0, 5.0], &[11.0, 13.0, 17.0]);
    let consecution = assemble_algorithmic(&sys, &Bijection::ascending(2)).unwrap();
    let expect_c = CMatrix::from_row_slice(
        4,
        4,
        &[
            c(-3.0), c(1.0), c(0.0), c(0.0),
            c(-2.0), c(0.0), c(19.0), c(0.0),
            c(0.0), c(0.0), c(-13.0), c(1.0),
            c(-23.0), c(0.0), c(-11.0), c(0.0),
        ],
    );
    assert_eq!(consecution, expect_c);

    let inversion = assemble_algorithmic(&sys, &Bijection::descending(2)).unwrap();
    let expect_i = CMatrix::from_row_slice(
        4,
        4,
        &[
            c(-3.0), c(-2.0), c(0.0), c(19.0),
            c(1.0), c(0.0), c(0.0), c(0.0),
            c(0.0), c(-23.0), c(-13.0), c(-11.0),
            c(0.0), c(0.0), c(1.0), c(0.0),
        ],
    );
    assert_eq!(inversion, expect_i);
}

#[test]
fn algorithmic_rejects_degree_mismatch() {
    let sys = prime_system_3_2();
    let sigma = Bijection::ascending(2);
    assert!(matches!(
        assemble_algorithmic(&sys, &sigma),
        Err(FiedlerError::DegreeMismatch { expected: 3, got: 2 })
    ));
}

#[test]
fn pencil_descending_is_first_companion() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for params in [
        SystemParams { n: 2, m: 1, d_a: 3, d_d: 2 },
        SystemParams { n: 1, m: 2, d_a: 2, d_d: 3 },
        SystemParams { n: 1, m: 1, d_a: 1, d_d: 1 },
    ] {
        let sys = random_integer_system(&params, &mut rng).unwrap();
        let ms = FiedlerSet::build(&sys);
        let pencil = fiedler_pencil(&ms, &Bijection::descending(ms.layout().d())).unwrap();
        let companion = companion_first(&sys);
        assert_eq!(pencil, companion);
    }
}

#[test]
fn pencil_ascending_is_second_companion() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for params in [
        SystemParams { n: 2, m: 1, d_a: 3, d_d: 2 },
        SystemParams { n: 2, m: 2, d_a: 2, d_d: 2 },
    ] {
        let sys = random_integer_system(&params, &mut rng).unwrap();
        let ms = FiedlerSet::build(&sys);
        let pencil = fiedler_pencil(&ms, &Bijection::ascending(ms.layout().d())).unwrap();
        let companion = companion_second(&sys);
        assert_eq!(pencil, companion);
    }
}

#[test]
fn companion_first_degree_one_collapse() {
    let sys = one_by_one(19.0, 23.0, &[2.0, 7.0], &[11.0, 17.0]);
    let p = companion_first(&sys);
    assert_eq!(p.x, CMatrix::from_row_slice(2, 2, &[c(7.0), c(0.0), c(0.0), c(17.0)]));
    assert_eq!(p.y, CMatrix::from_row_slice(2, 2, &[c(2.0), c(-19.0), c(23.0), c(11.0)]));
}

#[test]
fn pencil_x_holds_leading_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let sys = random_integer_system(&SystemParams { n: 2, m: 2, d_a: 3, d_d: 2 }, &mut rng).unwrap();
    let ms = FiedlerSet::build(&sys);
    for sigma in Bijection::all(3) {
        let p = fiedler_pencil(&ms, &sigma).unwrap();
        let l = p.layout;
        assert_eq!(l.a_block(&p.x, 0, 0), sys.a().coeff(3));
        assert_eq!(l.d_block(&p.x, 0, 0), sys.d().coeff(2));
        for i in 1..l.d_a {
            assert_eq!(l.a_block(&p.x, i, i), CMatrix::identity(2, 2));
        }
    }
}

#[test]
fn corner_structure_on_printed_example() {
    let sys = prime_system_3_2();
    let ms = FiedlerSet::build(&sys);
    let report = corner_structure(&ms, &Bijection::new(vec![1, 3, 2]).unwrap()).unwrap();
    assert_eq!(report.c1, 1);
    assert_eq!(report.b_block, (3, 1));
    assert_eq!(report.c_block, (2, 2));
    assert!(report.exact_match);
}

#[test]
fn corner_structure_extreme_orderings() {
    let sys = prime_system_3_2();
    let ms = FiedlerSet::build(&sys);
    // descending: c1 = 0, i1 = 2; runs saturate at each part's last factor
    let report = corner_structure(&ms, &Bijection::descending(3)).unwrap();
    assert_eq!(report.b_block, (1, 2));
    assert_eq!(report.c_block, (1, 3));
    // ascending: c1 = 2
    let report = corner_structure(&ms, &Bijection::ascending(3)).unwrap();
    assert_eq!(report.b_block, (3, 1));
    assert_eq!(report.c_block, (2, 1));
}

#[test]
fn corner_structure_whole_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    for params in [
        SystemParams { n: 2, m: 1, d_a: 4, d_d: 2 },
        SystemParams { n: 1, m: 2, d_a: 2, d_d: 4 },
        SystemParams { n: 2, m: 2, d_a: 4, d_d: 4 },
    ] {
        let sys = random_integer_system(&params, &mut rng).unwrap();
        let ms = FiedlerSet::build(&sys);
        for sigma in Bijection::all(ms.layout().d()) {
            corner_structure(&ms, &sigma).unwrap();
        }
    }
}

#[test]
fn corner_structure_detects_sign_corruption() {
    let sys = prime_system_3_2();
    let mut ms = FiedlerSet::build(&sys);
    ms.inject_c_sign_typo();
    match corner_structure(&ms, &Bijection::new(vec![1, 3, 2]).unwrap()) {
        Err(FiedlerError::StructureMismatch { report }) => {
            assert!(!report.exact_match);
            assert!(report.mismatches.iter().any(|(q, _, _)| q == "C"));
        }
        other => panic!("expected StructureMismatch, got {other:?}"),
    }
}

#[test]
fn block_transpose_maps_companions() {
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    for params in [
        SystemParams { n: 2, m: 1, d_a: 3, d_d: 2 },
        SystemParams { n: 1, m: 2, d_a: 2, d_d: 4 },
    ] {
        let sys = random_integer_system(&params, &mut rng).unwrap();
        let c1 = companion_first(&sys);
        let c2 = companion_second(&sys);
        assert_eq!(block_transpose(&c1), c2);
        // involution
        assert_eq!(block_transpose(&block_transpose(&c1)), c1);
    }
}

#[test]
fn block_transpose_decoupled_acts_per_part() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let base = random_integer_system(&SystemParams { n: 2, m: 2, d_a: 2, d_d: 2 }, &mut rng).unwrap();
    let sys = SystemMatrix::new(
        base.a().clone(),
        CMatrix::zeros(2, 2),
        CMatrix::zeros(2, 2),
        base.d().clone(),
    )
    .unwrap();
    let p = companion_first(&sys);
    let t = block_transpose(&p);
    let l = p.layout;
    assert_eq!(t.x, l.part_block_transpose(&p.x));
    assert_eq!(t.y, l.part_block_transpose(&p.y));
}

#[test]
fn ordering_classes_collapse_to_ciss() {
    // over every ordering of degree 4: same consecution pattern <=> same product
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let sys = random_integer_system(&SystemParams { n: 2, m: 1, d_a: 4, d_d: 3 }, &mut rng).unwrap();
    let ms = FiedlerSet::build(&sys);
    let mut by_pattern: BTreeMap<Vec<bool>, CMatrix> = BTreeMap::new();
    let mut distinct_ciss = std::collections::BTreeSet::new();
    for sigma in Bijection::all(4) {
        let pattern: Vec<bool> = (0..3).map(|j| sigma.has_consecution(j)).collect();
        let product = ms.assemble_product(&sigma).unwrap();
        distinct_ciss.insert(format!("{:?}", sigma.ciss().pairs()));
        match by_pattern.get(&pattern) {
            Some(seen) => assert_eq!(seen, &product, "pattern {pattern:?}"),
            None => {
                by_pattern.insert(pattern, product);
            }
        }
    }
    assert_eq!(by_pattern.len(), 8, "2^(d-1) consecution patterns");
    assert_eq!(distinct_ciss.len(), 8, "CISS is a bijection onto patterns");
    // distinct patterns give distinct products on a generic system
    let mats: Vec<&CMatrix> = by_pattern.values().collect();
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            assert!(max_abs_diff(mats[i], mats[j]) > 0.0);
        }
    }
}
