use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{check_prime, PadicInt};

/// Polynomial in one variable `u` with truncated p-adic coefficients.
///
/// Coefficients are stored densely by degree; each keeps its own precision.
/// Absent coefficients are exact zeros.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolyRecord", into = "PolyRecord")]
pub struct PadicPoly {
    p: u64,
    coeffs: Vec<PadicInt>,
}

#[derive(Serialize, Deserialize)]
struct PolyRecord {
    p: u64,
    var: String,
    coeffs: Vec<PadicInt>,
}

impl TryFrom<PolyRecord> for PadicPoly {
    type Error = Error;

    fn try_from(r: PolyRecord) -> Result<Self> {
        if r.var != "u" {
            return Err(Error::Malformed(format!("unknown variable {:?}", r.var)));
        }
        PadicPoly::new(r.p, r.coeffs)
    }
}

impl From<PadicPoly> for PolyRecord {
    fn from(poly: PadicPoly) -> Self {
        PolyRecord {
            p: poly.p,
            var: "u".to_string(),
            coeffs: poly.coeffs,
        }
    }
}

impl PadicPoly {
    pub fn new(p: u64, coeffs: Vec<PadicInt>) -> Result<Self> {
        check_prime(p)?;
        for c in &coeffs {
            if c.prime() != p {
                return Err(Error::PrimeMismatch(p, c.prime()));
            }
            if c.precision() == 0 {
                return Err(Error::PrecisionExhausted);
            }
        }
        Ok(PadicPoly { p, coeffs })
    }

    pub(crate) fn from_coeffs_unchecked(p: u64, coeffs: Vec<PadicInt>) -> Self {
        PadicPoly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        PadicPoly { p, coeffs: Vec::new() }
    }

    pub fn constant(c: PadicInt) -> Self {
        PadicPoly {
            p: c.prime(),
            coeffs: vec![c],
        }
    }

    pub(crate) fn one(p: u64, prec: u32) -> Self {
        Self::constant(PadicInt::one_unchecked(p, prec))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[PadicInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<PadicInt> {
        self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Option<&PadicInt> {
        self.coeffs.get(j)
    }

    /// Number of stored coefficients (degree bound + 1).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest coefficient precision, `None` for the empty polynomial.
    pub fn precision(&self) -> Option<u32> {
        self.coeffs.iter().map(PadicInt::precision).min()
    }

    pub fn truncate(&mut self, cap: usize) {
        self.coeffs.truncate(cap + 1);
    }

    pub fn reduce_precision(&self, prec: u32) -> Self {
        PadicPoly {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c.truncate(prec)).collect(),
        }
    }

    /// True when every coefficient of degree `<= deg` is zero at its precision.
    pub fn vanishes_through(&self, deg: usize) -> bool {
        self.coeffs.iter().take(deg + 1).all(PadicInt::is_zero)
    }

    fn check_same_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "polynomials over different primes");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_prime(other);
        let n = self.len().max(other.len());
        let coeffs = (0..n)
            .map(|j| match (self.coeff(j), other.coeff(j)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        PadicPoly { p: self.p, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same_prime(other);
        let n = self.len().max(other.len());
        let coeffs = (0..n)
            .map(|j| match (self.coeff(j), other.coeff(j)) {
                (Some(a), Some(b)) => a - b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => -b,
                (None, None) => unreachable!(),
            })
            .collect();
        PadicPoly { p: self.p, coeffs }
    }

    pub fn scale(&self, c: &PadicInt) -> Self {
        PadicPoly {
            p: self.p,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Product truncated to degree `cap`.
    pub fn mul_truncated(&self, other: &Self, cap: usize) -> Self {
        self.check_same_prime(other);
        if self.is_empty() || other.is_empty() {
            return PadicPoly::zero(self.p);
        }
        let len = (self.len() + other.len() - 1).min(cap + 1);
        let mut coeffs: Vec<Option<PadicInt>> = vec![None; len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                let term = a * b;
                let slot = &mut coeffs[i + j];
                *slot = Some(match slot.take() {
                    Some(acc) => acc + term,
                    None => term,
                });
            }
        }
        PadicPoly {
            p: self.p,
            coeffs: coeffs
                .into_iter()
                .map(|c| c.expect("every degree below len is hit"))
                .collect(),
        }
    }

    /// `self^e` truncated to degree `cap`, `e >= 1`.
    pub fn pow_truncated(&self, e: u64, cap: usize) -> Self {
        assert!(e >= 1, "pow_truncated needs a positive exponent");
        let mut base = self.clone();
        base.truncate(cap);
        let mut acc: Option<PadicPoly> = None;
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a.mul_truncated(&base, cap),
                    None => base.clone(),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul_truncated(&base, cap);
        }
        acc.expect("e >= 1")
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &PadicInt) -> PadicInt {
        let mut iter = self.coeffs.iter().rev();
        let Some(lead) = iter.next() else {
            return PadicInt::zero_unchecked(self.p, x.precision());
        };
        iter.fold(lead.clone(), |acc, c| &(&acc * x) + c)
    }
}
