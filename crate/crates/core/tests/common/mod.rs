//! Exact-integer oracles shared by the integration tests.
#![allow(dead_code)]

use arithdiff_core::{CanonicalSeries, LocalFunctionData, PadicInt};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use rand::Rng;

pub fn pi(p: u64, n: u32, v: i64) -> PadicInt {
    PadicInt::from_integer(p, n, v).unwrap()
}

pub fn pow_big(p: u64, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

/// `(z - z^p)/p` over the integers; panics if the division is inexact.
pub fn exact_delta(z: &BigInt, p: u64) -> BigInt {
    let (q, r) = (z - z.pow(p as u32)).div_rem(&BigInt::from(p));
    assert!(r.is_zero(), "z - z^p not divisible by p");
    q
}

/// `δ^k z mod p^target`, computed with exact integer divisions on the
/// representative `z mod p^{target + k}`.
pub fn exact_delta_iter(z: &BigInt, p: u64, k: u32, target: u32) -> BigUint {
    let mut x = z.mod_floor(&pow_big(p, target + k));
    for i in 0..k {
        x = exact_delta(&x, p).mod_floor(&pow_big(p, target + k - i - 1));
    }
    x.mod_floor(&pow_big(p, target)).to_biguint().unwrap()
}

pub fn random_padic<R: Rng>(rng: &mut R, p: u64, prec: u32) -> PadicInt {
    let modulus = BigUint::from(p).pow(prec);
    let digits: Vec<u64> = (0..prec).map(|_| rng.gen_range(0..p)).collect();
    let v = digits
        .iter()
        .rev()
        .fold(BigUint::zero(), |acc, &d| acc * p + d);
    PadicInt::new(p, prec, v % modulus).unwrap()
}

/// A random element of `p^v Z_p` at precision `prec`.
pub fn random_divisible<R: Rng>(rng: &mut R, p: u64, prec: u32, v: u32) -> PadicInt {
    if v >= prec {
        return PadicInt::zero(p, prec).unwrap();
    }
    let mut x = random_padic(rng, p, prec - v);
    for _ in 0..v {
        x = x.scale_by_p().unwrap();
    }
    x
}

pub fn random_unit<R: Rng>(rng: &mut R, p: u64, prec: u32) -> PadicInt {
    loop {
        let x = random_padic(rng, p, prec);
        if x.is_unit() {
            return x;
        }
    }
}

pub fn random_series<R: Rng>(rng: &mut R, p: u64, m: u32, k: usize, prec: u32) -> CanonicalSeries {
    let width = p.pow(m) as usize;
    let layers = (0..=k)
        .map(|_| (0..width).map(|_| random_padic(rng, p, prec)).collect())
        .collect();
    CanonicalSeries::new(p, m, k, layers).unwrap()
}

/// Local data with `v(g_{α,k}) >= k`.
pub fn random_decaying_local<R: Rng>(rng: &mut R, p: u64, m: u32, k: usize, prec: u32) -> LocalFunctionData {
    let discs = (0..p.pow(m))
        .map(|_| {
            (0..=k)
                .map(|j| random_divisible(rng, p, prec, j as u32))
                .collect()
        })
        .collect();
    LocalFunctionData::new(p, m, prec, k, discs).unwrap()
}
