mod common;

use std::collections::HashSet;

use arithdiff_core::*;
use common::*;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11])
}

fn odd_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![3u64, 5, 7, 11])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_ops_keep_min_precision(p in prime(), x in any::<i64>(), y in any::<i64>(), n1 in 1u32..20, n2 in 1u32..20) {
        let a = pi(p, n1, x);
        let b = pi(p, n2, y);
        let n = n1.min(n2);
        let exact = |z: BigInt| PadicInt::from_bigint(p, n, &z).unwrap();
        let (bx, by) = (BigInt::from(x), BigInt::from(y));
        prop_assert_eq!(&a + &b, exact(&bx + &by));
        prop_assert_eq!(&a - &b, exact(&bx - &by));
        prop_assert_eq!(&a * &b, exact(&bx * &by));
    }

    #[test]
    fn delta_matches_integer_oracle(p in prime(), z in any::<i32>(), n in 2u32..16) {
        let x = pi(p, n, z as i64);
        let d = x.delta().unwrap();
        prop_assert_eq!(d.precision(), n - 1);
        let want = exact_delta(&BigInt::from(z), p).mod_floor(&pow_big(p, n - 1));
        prop_assert_eq!(d.value(), &want.to_biguint().unwrap());
    }

    #[test]
    fn delta_iter_composes(p in prime(), z in any::<i64>(), n in 4u32..14, i in 0u32..2, j in 0u32..2) {
        let x = pi(p, n, z);
        let lhs = x.delta_iter(i).unwrap().delta_iter(j).unwrap();
        prop_assert_eq!(&lhs, &x.delta_iter(i + j).unwrap());
        prop_assert_eq!(lhs.value(), &exact_delta_iter(&BigInt::from(z), p, i + j, n - i - j));
    }

    #[test]
    fn unit_inverse_inverts(p in prime(), seed in any::<u64>(), n in 1u32..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unit(&mut rng, p, n);
        prop_assert_eq!(&u * &u.unit_inverse().unwrap(), PadicInt::one(p, n).unwrap());
    }

    #[test]
    fn hensel_root_solves_its_equation(p in prime(), seed in any::<u64>(), n in 1u32..24) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_padic(&mut rng, p, n);
        for j in 0..p {
            let t = PadicInt::hensel_root(p, n, &a, j).unwrap();
            prop_assert_eq!(t.residue(), j);
            let f = &(&t.pow(p) - &t) + &a.mul_small(p);
            prop_assert!(f.is_zero());
            if n >= 2 {
                prop_assert_eq!(t.delta().unwrap(), a.truncate(n - 1));
            }
        }
    }

    /// Full expansions (cap = p^k) evaluated at integer u agree with the exact
    /// iterated quotient of a + p^n u.
    #[test]
    fn expansion_evaluates_to_delta(p in prop::sample::select(vec![2u64, 3]), z in any::<i32>(), u in -50i64..50, n in 1u32..4, k in 0u32..3) {
        prop_assume!(k <= n);
        let prec = 12;
        let center = pi(p, prec, z as i64);
        let e = delta_expansion(&center, n, k, p.pow(k) as usize).unwrap();
        prop_assert_eq!(e.tail_valuation(), None);
        let got = e.poly().eval(&pi(p, prec, u));
        let point = BigInt::from(z) + BigInt::from(p).pow(n) * u;
        prop_assert_eq!(got.precision(), prec - k);
        prop_assert_eq!(got.value(), &exact_delta_iter(&point, p, k, prec - k));
    }

    #[test]
    fn expansion_bounds_hold(p in prop::sample::select(vec![2u64, 3, 5]), seed in any::<u64>(), n in 1u32..5, k in 0u32..4) {
        prop_assume!(k <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = random_padic(&mut rng, p, 60);
        let e = delta_expansion(&center, n, k, 8).unwrap();
        prop_assert_eq!(check_le1_bounds(&e).verdict(), Outcome::Pass);
    }

    #[test]
    fn roots_are_stable_under_precision(p in prop::sample::select(vec![2u64, 3, 5]), m in 0u32..3, n in 3u32..10, extra in 1u32..8) {
        let lo = compute_cm(p, m, n).unwrap();
        let hi = compute_cm(p, m, n + extra).unwrap();
        for (a, b) in lo.roots().iter().zip(hi.roots()) {
            prop_assert_eq!(a, &b.truncate(n));
        }
    }

    #[test]
    fn solve_satisfies_system(p in prop::sample::select(vec![2u64, 3, 5]), m in 1u32..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = w_matrix(p, m, 10).unwrap();
        let rhs: Vec<_> = (0..w.dim()).map(|_| random_padic(&mut rng, p, w.precision())).collect();
        let x = solve_unit_system(&w, &rhs).unwrap();
        for (row, b) in w.rows().iter().zip(&rhs) {
            let dot = row.iter().zip(&x).fold(PadicInt::zero(p, w.precision()).unwrap(), |acc, (r, v)| &acc + &(r * v));
            prop_assert_eq!(&dot, b);
        }
    }

    #[test]
    fn legendre_is_multiplicative(p in odd_prime(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = LegendreSeriesParams::new(p, 8);
        let a = random_unit(&mut rng, p, 10);
        let b = random_unit(&mut rng, p, 10);
        let la = legendre_series_eval(&a, params).unwrap();
        let lb = legendre_series_eval(&b, params).unwrap();
        prop_assert_eq!(legendre_series_eval(&(&a * &b), params).unwrap(), &la * &lb);
    }

    #[test]
    fn legendre_is_locally_constant(p in odd_prime(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = LegendreSeriesParams::new(p, 8);
        let a = random_unit(&mut rng, p, 10);
        let shift = random_divisible(&mut rng, p, 10, 1);
        prop_assert_eq!(
            legendre_series_eval(&a, params).unwrap(),
            legendre_series_eval(&(&a + &shift), params).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn roundtrip_recovers_series(p in prop::sample::select(vec![2u64, 3]), m in 1u32..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_series(&mut rng, p, m, 3, 10);
        let r = roundtrip_report(&f, 10).unwrap();
        prop_assert!(r.pass, "worst deviation {:?}", r.worst);
    }

    #[test]
    fn point_consistency(p in prop::sample::select(vec![2u64, 3]), m in 1u32..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 10;
        let k = (n - 2 * m) as usize;
        let l = random_decaying_local(&mut rng, p, m, k, n);
        let s = represent(&l).unwrap();
        let x = random_padic(&mut rng, p, n);
        let lhs = evaluate_canonical(&s, &x).unwrap().value;
        let rhs = evaluate_local(&l, &x).unwrap().value;
        prop_assert!(lhs.congruent(&rhs, n - 2 * m));
    }

    #[test]
    fn serde_roundtrips(p in prop::sample::select(vec![2u64, 3]), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_series(&mut rng, p, 1, 2, 6);
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<CanonicalSeries>(&json).unwrap(), f.clone());
        let l = expand(&f, 6).unwrap();
        let json = serde_json::to_string(&l).unwrap();
        prop_assert_eq!(serde_json::from_str::<LocalFunctionData>(&json).unwrap(), l);
        let x = random_padic(&mut rng, p, 7);
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<PadicInt>(&json).unwrap(), x);
    }
}

#[test]
fn digit_coordinates_are_injective() {
    for (p, m) in [(2u64, 1u32), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (5, 3)] {
        let count = p.pow(m);
        let mut seen = HashSet::new();
        for r in 0..count {
            let x = PadicInt::new(p, m, BigUint::from(r)).unwrap();
            assert!(seen.insert(digit_coords(&x, m).unwrap()), "p={p} m={m} r={r}");
        }
        assert_eq!(seen.len() as u64, count);
    }
}

#[test]
fn w_determinant_is_a_unit() {
    for (p, m) in [(2u64, 1u32), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (5, 2), (7, 1)] {
        let w = w_matrix(p, m, 12).unwrap();
        assert!(det_unit_certificate(&w).is_unit(), "p={p} m={m}");
    }
}
