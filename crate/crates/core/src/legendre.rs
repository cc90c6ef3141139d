//! The Legendre symbol as an order-1 operator, and locally constant functions
//! as inputs to [`crate::repr::represent`].
//!
//! With `x = p·δa·a^{-p} = a^{1-p} - 1`, the binomial series
//! `sqrt(1 + x) = 1 + Σ_{n>=1} (-1)^{n-1} C_{n-1} 2^{1-2n} x^n` (Catalan `C`)
//! converges because `p | x`, and `a^{(p-1)/2}·sqrt(a^{1-p})` is the
//! Teichmüller-side square root of 1 congruent to `a^{(p-1)/2}`, i.e. `(a/p)`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{check_prime, PadicInt};
use crate::repr::LocalFunctionData;
use crate::roots::disc_count;

/// Euler's criterion: `a^{(p-1)/2} mod p` as `±1`.
pub fn legendre_oracle(a: i64, p: u64) -> Result<i8> {
    check_prime(p)?;
    if p == 2 {
        return Err(Error::InvalidArgument("the Legendre symbol needs an odd prime".into()));
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Err(Error::InvalidArgument(format!("{a} is divisible by {p}")));
    }
    let e = BigUint::from(r).modpow(&BigUint::from((p - 1) / 2), &BigUint::from(p));
    Ok(if e == BigUint::from(1u32) { 1 } else { -1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LegendreSeriesParams {
    pub p: u64,
    /// Output precision.
    #[serde(rename = "N")]
    pub precision: u32,
    /// Number of series terms after the constant one.
    #[serde(rename = "T")]
    pub terms: u32,
}

impl LegendreSeriesParams {
    /// `T = N`: term `n` is divisible by `p^n`, so later terms vanish mod `p^N`.
    pub fn new(p: u64, precision: u32) -> Self {
        LegendreSeriesParams {
            p,
            precision,
            terms: precision,
        }
    }

    pub fn with_terms(mut self, terms: u32) -> Self {
        self.terms = terms;
        self
    }
}

/// `C_k = (2k)! / (k! (k+1)!)`.
fn catalan(k: u32) -> BigUint {
    let mut c = BigUint::from(1u32);
    for i in 0..k {
        c = c * (2 * (2 * i as u64 + 1)) / (i as u64 + 2);
    }
    c
}

/// `a^{(p-1)/2} (1 + Σ_{n=1}^{T} (-1)^{n-1} C_{n-1} p^n 2^{1-2n} (δa)^n a^{-pn})`
/// modulo `p^N`.
pub fn legendre_series_eval(a: &PadicInt, params: LegendreSeriesParams) -> Result<PadicInt> {
    let LegendreSeriesParams { p, precision, terms } = params;
    check_prime(p)?;
    if p == 2 {
        return Err(Error::InvalidArgument("the Legendre series needs an odd prime".into()));
    }
    if a.prime() != p {
        return Err(Error::PrimeMismatch(p, a.prime()));
    }
    if precision == 0 {
        return Err(Error::InvalidPrecision { min: 1, got: 0 });
    }
    if a.precision() < precision + 2 {
        return Err(Error::insufficient("legendre_series_eval", precision + 2, a.precision()));
    }
    if !a.is_unit() {
        return Err(Error::NotUnit(a.valuation()));
    }
    let work = a.precision();
    // x / p = δa · a^{-p}, one digit short
    let ratio = &a.delta()? * &a.pow(p).unit_inverse()?;
    let inv4 = PadicInt::small_unchecked(p, work, 4).unit_inverse()?;
    let mut two_power = PadicInt::small_unchecked(p, work, 2).unit_inverse()?;
    let mut ratio_power = ratio.clone();
    let mut sum = PadicInt::one_unchecked(p, work);
    for n in 1..=terms {
        let mut term = PadicInt::reduced(p, work, catalan(n - 1)) * &two_power * &ratio_power;
        if n % 2 == 0 {
            term = -term;
        }
        for _ in 0..n {
            term = term.scale_by_p()?;
        }
        sum = &sum + &term;
        two_power = &two_power * &inv4;
        ratio_power = &ratio_power * &ratio;
    }
    let prefactor = a.pow((p - 1) / 2);
    Ok((&prefactor * &sum).truncate(precision))
}

/// The function equal to `values[α]` on `α + p^m Z_p`, as per-disc constant
/// series.
pub fn locally_constant_to_level_m(
    values: &BTreeMap<u64, PadicInt>,
    p: u64,
    m: u32,
    precision: u32,
    truncation: usize,
) -> Result<LocalFunctionData> {
    check_prime(p)?;
    let count = disc_count(p, m)? as u64;
    if let Some(extra) = values.keys().find(|&&k| k >= count) {
        return Err(Error::Malformed(format!("residue {extra} is not below {p}^{m}")));
    }
    let discs = (0..count)
        .map(|alpha| {
            values
                .get(&alpha)
                .map(|v| vec![v.clone()])
                .ok_or_else(|| Error::Malformed(format!("no value given for residue {alpha}")))
        })
        .collect::<Result<Vec<_>>>()?;
    LocalFunctionData::new(p, m, precision, truncation, discs)
}
