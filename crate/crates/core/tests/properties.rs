mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use pclass::fplin::{FpMatrix, FpVector};
use pclass::gmodule::{self, GModule, MultiplicityVector};
use pclass::local::{make_base, make_k, LocalTower};
use pclass::quadratic::{self, QuadTower};
use pclass::structure;
use pclass::tower::{build_j, reduce, FiniteClasses, JPresentation, KummerTower};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn arb_profile() -> impl Strategy<Value = (u64, Vec<usize>)> {
    prop_oneof![Just(2u64), Just(3u64), Just(5u64)].prop_flat_map(|p| {
        (Just(p), proptest::collection::vec(0usize..4, p as usize)).prop_filter("nonzero", |(_, v)| v.iter().any(|&x| x > 0))
    })
}

fn module_from(p: u64, counts: &[usize], seed: u64) -> (MultiplicityVector, GModule) {
    let pairs: Vec<(usize, usize)> = counts.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect();
    let prof = MultiplicityVector::from_pairs(p, &pairs).unwrap();
    let m = gmodule::random_module(p, &prof, seed);
    (prof, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn socle_series_shape((p, counts) in arb_profile(), seed in any::<u64>()) {
        let (_, m) = module_from(p, &counts, seed);
        let s = m.socle_series();
        prop_assert_eq!(s.len(), p as usize);
        prop_assert_eq!(*s.last().unwrap(), m.dim());
        let mut prev = 0;
        let mut prev_layer = usize::MAX;
        for &d in &s {
            prop_assert!(d >= prev);
            prop_assert!(d - prev <= prev_layer);
            prev_layer = d - prev;
            prev = d;
        }
        // layer i counts blocks of length >= i
        for i in 1..=p as usize {
            let at_least: usize = counts[i - 1..].iter().sum();
            let below = if i == 1 { 0 } else { s[i - 2] };
            prop_assert_eq!(s[i - 1] - below, at_least);
        }
    }

    #[test]
    fn norm_is_a_power_of_sigma_minus_one((p, counts) in arb_profile(), seed in any::<u64>()) {
        let (prof, m) = module_from(p, &counts, seed);
        let t = common::minus_identity(p, &m.sigma().to_rows());
        let mut pw: Vec<Vec<u64>> = (0..m.dim()).map(|i| (0..m.dim()).map(|j| u64::from(i == j)).collect()).collect();
        for _ in 0..p - 1 {
            pw = common::mat_mul(p, &pw, &t);
        }
        prop_assert_eq!(&pw, &m.norm_operator().to_rows());
        prop_assert_eq!(m.norm_operator().rank(), prof.get(p as usize));
    }

    #[test]
    fn profile_is_a_conjugation_invariant((p, counts) in arb_profile(), seed in any::<u64>()) {
        let (prof, m) = module_from(p, &counts, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let (s, s_inv) = gmodule::random_invertible(p, m.dim(), &mut rng);
        let conj = GModule::new(s.mul(m.sigma()).unwrap().mul(&s_inv).unwrap()).unwrap();
        prop_assert_eq!(conj.jordan_multiplicities(), prof.clone());
        let oracle = common::jordan_from_ranks(p, &conj.sigma().to_rows());
        prop_assert_eq!(oracle, counts.clone());
    }

    #[test]
    fn jordan_decomposition_is_a_direct_sum((p, counts) in arb_profile(), seed in any::<u64>()) {
        let (prof, m) = module_from(p, &counts, seed);
        let d = m.decompose_jordan();
        prop_assert!(m.verify_direct_sum(&d.parts));
        prop_assert_eq!(d.profile(p), prof);
    }

    #[test]
    fn rank_nullity_mod_p(p in prop_oneof![Just(2u64), Just(3), Just(5), Just(7)], rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<u64> = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        let m = FpMatrix::new(p, rows, cols, entries).unwrap();
        prop_assert_eq!(m.rank() + m.kernel_basis().len(), cols);
        prop_assert_eq!(m.rank(), common::rank_mod(p, &m.to_rows()));
    }
}

// ---- Kummer towers ----

struct Sample {
    tower: LocalTower,
    pres: JPresentation<pclass::local::LocalElement>,
}

fn samples() -> &'static Vec<Sample> {
    static CELL: OnceLock<Vec<Sample>> = OnceLock::new();
    CELL.get_or_init(|| {
        [(7u64, 3u64, "7"), (3, 2, "u"), (2, 2, "-1"), (2, 2, "5"), (3, 3, "pi"), (11, 5, "11*u")]
            .iter()
            .map(|&(ell, p, a)| {
                let base = make_base(ell, p, 32).unwrap();
                let a = pclass::expr::parse(a).unwrap().eval(&base).unwrap();
                let tower = make_k(&base, &a).unwrap();
                let (pres, _) = build_j(&tower).unwrap();
                Sample { tower, pres }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduce_is_a_homomorphism(which in 0usize..6, seed in any::<u64>()) {
        let s = &samples()[which];
        let t = &s.tower;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = t.random_k(&mut rng);
        let y = t.random_k(&mut rng);
        prop_assume!(!t.k_is_zero(&x) && !t.k_is_zero(&y));
        let lhs = reduce(t, &s.pres, &t.k_mul(&x, &y)).unwrap().coords;
        let rhs = reduce(t, &s.pres, &x).unwrap().coords.add(&reduce(t, &s.pres, &y).unwrap().coords);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn norm_class_follows_the_group_ring_norm(which in 0usize..6, seed in any::<u64>()) {
        let s = &samples()[which];
        let t = &s.tower;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = t.random_k(&mut rng);
        prop_assume!(!t.k_is_zero(&x));
        let n = t.norm(&x).unwrap();
        prop_assert!(t.f_eq(&n, &t.norm(&t.sigma(&x).unwrap()).unwrap()));
        let lhs = reduce(t, &s.pres, &t.embed(&n)).unwrap().coords;
        let rhs = s.pres.module.norm_operator().mul_vec(&reduce(t, &s.pres, &x).unwrap().coords).unwrap();
        prop_assert_eq!(lhs, rhs);
        // the norm is an element of F: its F-class agrees with the norm map
        let via_map = s.pres.norm_map.mul_vec(&reduce(t, &s.pres, &x).unwrap().coords).unwrap();
        prop_assert_eq!(t.f_dlog(&n).unwrap(), via_map);
    }

    #[test]
    fn fixed_classes_lie_in_the_socle(which in 0usize..6, seed in any::<u64>()) {
        let s = &samples()[which];
        let t = &s.tower;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = t.random_k(&mut rng);
        prop_assume!(!t.k_is_zero(&x));
        // N(x) is σ-fixed, so its class lies in J_1
        let v = reduce(t, &s.pres, &t.embed(&t.norm(&x).unwrap())).unwrap().coords;
        prop_assert!(s.pres.module.apply_nilpotent(&v).is_zero());
        prop_assert!(pclass::fplin::in_span(&s.pres.module.fixed_submodule(), &v));
    }
}

// ---- quadratic fields ----

fn small_rat() -> impl Strategy<Value = BigRational> {
    (-60i64..60, 1i64..12).prop_filter("nonzero", |(n, _)| *n != 0).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn quad_a() -> impl Strategy<Value = i64> {
    prop_oneof![Just(-1i64), Just(2), Just(3), Just(5), Just(-3), Just(6), Just(-5), Just(7), Just(13), Just(-15)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quadratic_norm_is_multiplicative(a in quad_a(), u1 in small_rat(), v1 in small_rat(), u2 in small_rat(), v2 in small_rat()) {
        let t = QuadTower::new(a).unwrap();
        let x = t.element(u1, v1);
        let y = t.element(u2, v2);
        prop_assert_eq!(t.quad_norm(&t.k_mul(&x, &y)), t.quad_norm(&x) * t.quad_norm(&y));
        prop_assert_eq!(t.quad_norm(&t.conjugate(&x)), t.quad_norm(&x));
    }

    #[test]
    fn squares_are_recognized(a in quad_a(), u in small_rat(), v in small_rat()) {
        let t = QuadTower::new(a).unwrap();
        let x = t.element(u, v);
        let sq = t.k_mul(&x, &x);
        let r = t.is_square(&sq);
        prop_assert!(r.is_some());
        let r = r.unwrap();
        prop_assert!(t.k_eq(&t.k_mul(&r, &r), &sq));
    }

    #[test]
    fn equal_norms_differ_by_f_times_a_square(a in quad_a(), u in small_rat(), v in small_rat(), s in small_rat(), w in small_rat()) {
        let t = QuadTower::new(a).unwrap();
        let g1 = t.element(u, v);
        // g2 has the same norm as g1: σ(g1) times a norm-one element σ(h)/h
        let h = t.element(s, w);
        let g2 = t.k_mul(&t.conjugate(&g1), &t.k_div(&t.conjugate(&h), &h).unwrap());
        prop_assert_eq!(t.quad_norm(&g1), t.quad_norm(&g2));
        let (f, k) = structure::identical_norm_witness(&t, &g1, &g2).unwrap();
        let rebuilt = t.k_mul(&t.k_mul(&t.embed(&f), &t.k_mul(&k, &k)), &g2);
        prop_assert!(t.k_eq(&rebuilt, &g1));
    }

    #[test]
    fn hilbert_symbols_multiply_to_one(b in small_rat(), c in small_rat()) {
        prop_assert_eq!(quadratic::hilbert_product(&b, &c).unwrap(), 1);
    }
}

#[test]
fn fp_vector_add_matches_coordinates() {
    let a = FpVector::new(5, vec![1, 4, 3]);
    let b = FpVector::new(5, vec![4, 4, 0]);
    assert_eq!(a.add(&b), FpVector::new(5, vec![0, 3, 3]));
}
