//! Truncated p-adic integers.
//!
//! A [`PadicInt`] stands for the congruence class of all `x ∈ Z_p` with
//! `x ≡ v (mod p^N)`, where `N` is the number of known base-`p` digits. Ring
//! operations keep the smaller of the two precisions; the Fermat quotient
//! `δx = (x - x^p)/p` costs exactly one digit.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::rc::Rc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic trial division; primes here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

thread_local! {
    static MODULI: RefCell<HashMap<(u64, u32), Rc<BigUint>>> = RefCell::new(HashMap::new());
}

/// `p^n`, memoized per thread.
pub(crate) fn modulus(p: u64, n: u32) -> Rc<BigUint> {
    MODULI.with(|cache| {
        cache
            .borrow_mut()
            .entry((p, n))
            .or_insert_with(|| Rc::new(BigUint::from(p).pow(n)))
            .clone()
    })
}

/// p-adic valuation of a truncated value.
///
/// `AtLeast(N)` is returned for a zero representative at precision `N`: the
/// true valuation of any member of the class is only known to be `≥ N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    AtLeast(u32),
}

impl Valuation {
    /// The largest `v` such that the valuation is known to be `≥ v`.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        }
    }

    /// Decides `valuation ≥ bound`, or `None` when the precision is too low.
    pub fn is_at_least(self, bound: u32) -> Option<bool> {
        match self {
            Valuation::Finite(v) => Some(v >= bound),
            Valuation::AtLeast(n) if n >= bound => Some(true),
            Valuation::AtLeast(_) => None,
        }
    }

    /// Decides `valuation == exact`, or `None` when the precision is too low.
    pub fn is_exactly(self, exact: u32) -> Option<bool> {
        match self {
            Valuation::Finite(v) => Some(v == exact),
            Valuation::AtLeast(n) if n > exact => Some(false),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(n) => write!(f, ">= {n}"),
        }
    }
}

/// A p-adic integer known modulo `p^N`.
///
/// Invariant: `0 <= value < p^N`. Precision 0 is the "no information" value;
/// it can come out of [`PadicInt::divide_by_p`] but is rejected as an operand.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PadicIntRecord", into = "PadicIntRecord")]
pub struct PadicInt {
    p: u64,
    prec: u32,
    value: BigUint,
}

#[derive(Serialize, Deserialize)]
struct PadicIntRecord {
    p: u64,
    #[serde(rename = "N")]
    n: u32,
    v: String,
}

impl TryFrom<PadicIntRecord> for PadicInt {
    type Error = Error;

    fn try_from(r: PadicIntRecord) -> Result<Self> {
        let value: BigUint = r
            .v
            .parse()
            .map_err(|_| Error::Malformed(format!("not a decimal integer: {:?}", r.v)))?;
        check_prime(r.p)?;
        if r.n == 0 {
            return Err(Error::InvalidPrecision { min: 1, got: 0 });
        }
        if value >= *modulus(r.p, r.n) {
            return Err(Error::Malformed(format!(
                "residue {value} is not reduced modulo {}^{}",
                r.p, r.n
            )));
        }
        Ok(PadicInt::raw(r.p, r.n, value))
    }
}

impl From<PadicInt> for PadicIntRecord {
    fn from(x: PadicInt) -> Self {
        PadicIntRecord {
            p: x.p,
            n: x.prec,
            v: x.value.to_string(),
        }
    }
}

impl PadicInt {
    /// Caller guarantees `p` prime and `value < p^prec`.
    pub(crate) fn raw(p: u64, prec: u32, value: BigUint) -> Self {
        debug_assert!(value < *modulus(p, prec));
        PadicInt { p, prec, value }
    }

    /// Reduces `value` modulo `p^prec`. Caller guarantees `p` prime.
    pub(crate) fn reduced(p: u64, prec: u32, value: BigUint) -> Self {
        let m = modulus(p, prec);
        PadicInt {
            p,
            prec,
            value: value % &*m,
        }
    }

    pub fn new(p: u64, prec: u32, value: BigUint) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(Error::InvalidPrecision { min: 1, got: 0 });
        }
        Ok(Self::reduced(p, prec, value))
    }

    pub fn from_integer(p: u64, prec: u32, z: i64) -> Result<Self> {
        Self::from_bigint(p, prec, &BigInt::from(z))
    }

    pub fn from_bigint(p: u64, prec: u32, z: &BigInt) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(Error::InvalidPrecision { min: 1, got: 0 });
        }
        let m = BigInt::from_biguint(Sign::Plus, (*modulus(p, prec)).clone());
        let v = z.mod_floor(&m);
        Ok(Self::raw(p, prec, v.to_biguint().expect("mod_floor is non-negative")))
    }

    pub(crate) fn zero_unchecked(p: u64, prec: u32) -> Self {
        PadicInt {
            p,
            prec,
            value: BigUint::zero(),
        }
    }

    pub(crate) fn one_unchecked(p: u64, prec: u32) -> Self {
        Self::reduced(p, prec, BigUint::one())
    }

    pub(crate) fn small_unchecked(p: u64, prec: u32, v: u64) -> Self {
        Self::reduced(p, prec, BigUint::from(v))
    }

    pub fn zero(p: u64, prec: u32) -> Result<Self> {
        Self::new(p, prec, BigUint::zero())
    }

    pub fn one(p: u64, prec: u32) -> Result<Self> {
        Self::new(p, prec, BigUint::one())
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Canonical representative in `[0, p^N)`.
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    pub fn signed_value(&self) -> BigInt {
        let m = modulus(self.p, self.prec);
        let v = BigInt::from(self.value.clone());
        if &self.value * 2u32 > *m {
            v - BigInt::from((*m).clone())
        } else {
            v
        }
    }

    /// The reduction modulo `p`.
    pub fn residue(&self) -> u64 {
        (&self.value % self.p)
            .to_u64()
            .expect("residue below p fits in u64")
    }

    /// The reduction modulo `p^k` as a plain integer, `k <= N`.
    pub fn residue_mod_pow(&self, k: u32) -> BigUint {
        debug_assert!(k <= self.prec);
        &self.value % &*modulus(self.p, k)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.prec > 0 && self.residue() != 0
    }

    /// Forgets digits beyond `prec`. A no-op when `prec >= N`.
    pub fn truncate(&self, prec: u32) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::reduced(self.p, prec, self.value.clone())
    }

    /// True when both classes agree modulo `p^k`; `k` must not exceed
    /// either precision.
    pub fn congruent(&self, other: &Self, k: u32) -> bool {
        debug_assert!(k <= self.prec && k <= other.prec);
        self.p == other.p && self.residue_mod_pow(k) == other.residue_mod_pow(k)
    }

    pub fn valuation(&self) -> Valuation {
        if self.value.is_zero() {
            return Valuation::AtLeast(self.prec);
        }
        let mut v = 0u32;
        let mut x = self.value.clone();
        loop {
            let (q, r) = x.div_rem(&BigUint::from(self.p));
            if !r.is_zero() {
                return Valuation::Finite(v);
            }
            x = q;
            v += 1;
        }
    }

    fn check_operand(&self) -> Result<()> {
        if self.prec == 0 {
            Err(Error::PrecisionExhausted)
        } else {
            Ok(())
        }
    }

    fn check_binary(&self, other: &Self) -> Result<u32> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        self.check_operand()?;
        other.check_operand()?;
        Ok(self.prec.min(other.prec))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let prec = self.check_binary(other)?;
        Ok(Self::reduced(self.p, prec, &self.value + &other.value))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        let prec = self.check_binary(other)?;
        let m = modulus(self.p, prec);
        let a = &self.value % &*m;
        let b = &other.value % &*m;
        let v = if a >= b { a - b } else { a + &*m - b };
        Ok(Self::raw(self.p, prec, v))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let prec = self.check_binary(other)?;
        Ok(Self::reduced(self.p, prec, &self.value * &other.value))
    }

    pub fn try_neg(&self) -> Result<Self> {
        self.check_operand()?;
        if self.value.is_zero() {
            return Ok(self.clone());
        }
        let m = modulus(self.p, self.prec);
        Ok(Self::raw(self.p, self.prec, &*m - &self.value))
    }

    /// Multiplies by `p`, which determines one more digit.
    pub fn scale_by_p(&self) -> Result<Self> {
        self.check_operand()?;
        Ok(Self::raw(self.p, self.prec + 1, &self.value * self.p))
    }

    /// Exact division by `p`, losing one digit. The output may have precision
    /// 0; such a value is only good for inspection.
    pub fn divide_by_p(&self) -> Result<Self> {
        self.check_operand()?;
        let (q, r) = self.value.div_rem(&BigUint::from(self.p));
        if !r.is_zero() {
            return Err(Error::Internal(format!(
                "{self} is not divisible by {}",
                self.p
            )));
        }
        Ok(Self::raw(self.p, self.prec - 1, q))
    }

    /// Multiplies by an ordinary integer, keeping precision.
    pub fn mul_small(&self, k: u64) -> Self {
        Self::reduced(self.p, self.prec, &self.value * k)
    }

    pub fn pow(&self, e: u64) -> Self {
        let m = modulus(self.p, self.prec);
        Self::raw(self.p, self.prec, self.value.modpow(&BigUint::from(e), &m))
    }

    pub fn unit_inverse(&self) -> Result<Self> {
        self.check_operand()?;
        if !self.is_unit() {
            return Err(Error::NotUnit(self.valuation()));
        }
        let m = modulus(self.p, self.prec);
        let inv = self
            .value
            .modinv(&m)
            .ok_or_else(|| Error::Internal(format!("{self} has no inverse")))?;
        Ok(Self::raw(self.p, self.prec, inv))
    }

    /// The Fermat quotient `(x - x^p)/p`, determined modulo `p^{N-1}`.
    pub fn delta(&self) -> Result<Self> {
        if self.prec < 2 {
            return Err(Error::insufficient("delta", 2, self.prec));
        }
        let m = modulus(self.p, self.prec);
        let xp = self.value.modpow(&BigUint::from(self.p), &m);
        let diff = if self.value >= xp {
            &self.value - xp
        } else {
            &self.value + &*m - xp
        };
        let (q, r) = diff.div_rem(&BigUint::from(self.p));
        if !r.is_zero() {
            return Err(Error::Internal(format!(
                "x - x^p not divisible by p for {self}"
            )));
        }
        Ok(Self::raw(self.p, self.prec - 1, q))
    }

    /// `δ^k x` at precision `N - k`.
    pub fn delta_iter(&self, k: u32) -> Result<Self> {
        if self.prec < k + 1 {
            return Err(Error::insufficient("iterated delta", k + 1, self.prec));
        }
        let mut x = self.clone();
        for _ in 0..k {
            x = x.delta()?;
        }
        Ok(x)
    }

    /// The root `t ≡ j (mod p)` of `t^p - t + p·a` modulo `p^prec`, i.e. the
    /// unique `t` in that branch with `δt = a`.
    ///
    /// Newton iteration; `f'(t) = p·t^{p-1} - 1` is always a unit, so every
    /// branch lifts and the error exponent doubles each step.
    pub fn hensel_root(p: u64, prec: u32, a: &PadicInt, j: u64) -> Result<Self> {
        check_prime(p)?;
        if prec == 0 {
            return Err(Error::InvalidPrecision { min: 1, got: 0 });
        }
        if a.p != p {
            return Err(Error::PrimeMismatch(p, a.p));
        }
        if a.prec < prec {
            return Err(Error::insufficient("hensel_root", prec, a.prec));
        }
        if j >= p {
            return Err(Error::InvalidArgument(format!(
                "branch {j} is not a residue modulo {p}"
            )));
        }
        let m = modulus(p, prec);
        let pa = (&a.value * p) % &*m;
        let exp_p = BigUint::from(p);
        let exp_pm1 = BigUint::from(p - 1);
        let mut t = BigUint::from(j) % &*m;
        // ceil(log2 prec) + 1 steps suffice; the slack only guards the loop.
        let max_steps = 2 + (u32::BITS - prec.leading_zeros());
        for _ in 0..=max_steps {
            let f = (t.modpow(&exp_p, &m) + &pa + &*m - &t) % &*m;
            if f.is_zero() {
                return Ok(Self::raw(p, prec, t));
            }
            let fp = (t.modpow(&exp_pm1, &m) * p + &*m - 1u32) % &*m;
            let inv = fp
                .modinv(&m)
                .ok_or_else(|| Error::Internal("Newton derivative is not a unit".into()))?;
            let step = (f * inv) % &*m;
            t = (t + &*m - step) % &*m;
        }
        Err(Error::Internal(format!(
            "Newton iteration for t^{p} - t + p*{a} did not converge"
        )))
    }
}

impl fmt::Display for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.prec, self.value)
    }
}

impl fmt::Debug for PadicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.value, self.p, self.prec)
    }
}

// Operator forms panic where the `try_*` forms return an error: mixing primes
// or consuming a precision-0 value is a programming error at these call sites.
macro_rules! forward_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&PadicInt> for &PadicInt {
            type Output = PadicInt;
            fn $method(self, rhs: &PadicInt) -> PadicInt {
                self.$try(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<PadicInt> for PadicInt {
            type Output = PadicInt;
            fn $method(self, rhs: PadicInt) -> PadicInt {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&PadicInt> for PadicInt {
            type Output = PadicInt;
            fn $method(self, rhs: &PadicInt) -> PadicInt {
                (&self).$method(rhs)
            }
        }
        impl $trait<PadicInt> for &PadicInt {
            type Output = PadicInt;
            fn $method(self, rhs: PadicInt) -> PadicInt {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        self.try_neg().unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for PadicInt {
    type Output = PadicInt;
    fn neg(self) -> PadicInt {
        -&self
    }
}
