//! Polynomial δ-calculus on discs `a + p^n Z_p`.
//!
//! `δ^k(a + p^n u)` is a polynomial in `u` of degree `p^k` whose coefficients
//! `c_j` obey, for `k <= n`:
//!
//! * `v(c_0) >= 0`, with `c_0 = δ^k a`;
//! * `v(c_1) = n - k` exactly;
//! * `v(c_j) >= (n - k + 1) j - 1` for `j >= 2`.
//!
//! Expansions are truncated at a caller-chosen degree cap `D`; the last bound
//! evaluated at `j = D + 1` controls what was dropped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{PadicInt, Valuation};
use crate::poly::PadicPoly;

/// One application of `P ↦ (P - P^p)/p`, truncated to degree `cap`.
///
/// Every coefficient of `P - P^p` must be divisible by `p`; this holds for the
/// iterates of a seed `a + p^n u` as long as fewer than `n` steps were taken.
pub fn delta_poly_step(poly: &PadicPoly, cap: usize) -> Result<PadicPoly> {
    let p = poly.prime();
    if poly.is_empty() {
        return Ok(PadicPoly::zero(p));
    }
    let mut base = poly.clone();
    base.truncate(cap);
    let diff = base.sub(&base.pow_truncated(p, cap));
    let coeffs = diff
        .into_coeffs()
        .into_iter()
        .enumerate()
        .map(|(degree, c)| {
            if c.precision() < 2 {
                return Err(Error::insufficient("delta_poly_step", 2, c.precision()));
            }
            if c.residue() != 0 {
                return Err(Error::NotDivisible { degree });
            }
            c.divide_by_p()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PadicPoly::from_coeffs_unchecked(p, coeffs))
}

/// `δ^k(a + p^n u)` as a truncated polynomial in `u`.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaExpansion {
    center: PadicInt,
    level: u32,
    order: u32,
    cap: usize,
    poly: PadicPoly,
    tail_valuation: Option<u32>,
}

impl DeltaExpansion {
    pub fn center(&self) -> &PadicInt {
        &self.center
    }

    /// The disc level `n`.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// The iterate order `k`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn poly(&self) -> &PadicPoly {
        &self.poly
    }

    pub fn into_poly(self) -> PadicPoly {
        self.poly
    }

    /// Lower bound on the valuation of every coefficient dropped by the degree
    /// cap, `None` when nothing was dropped.
    pub fn tail_valuation(&self) -> Option<u32> {
        self.tail_valuation
    }
}

/// Expands `δ^k(a + p^n u)`, keeping degrees `<= cap`.
///
/// Coefficients come out at precision `N - k` where `N` is the precision of
/// the center.
pub fn delta_expansion(center: &PadicInt, level: u32, order: u32, cap: usize) -> Result<DeltaExpansion> {
    if order > level {
        return Err(Error::InvalidArgument(format!(
            "iterate order {order} exceeds disc level {level}"
        )));
    }
    let prec = center.precision();
    if prec < order + 1 {
        return Err(Error::insufficient("delta_expansion", order + 1, prec));
    }
    let p = center.prime();
    let mut coeffs = vec![center.clone()];
    if cap >= 1 {
        coeffs.push(PadicInt::reduced(
            p,
            prec,
            num_bigint::BigUint::from(p).pow(level),
        ));
    }
    let mut poly = PadicPoly::from_coeffs_unchecked(p, coeffs);
    for _ in 0..order {
        poly = delta_poly_step(&poly, cap)?;
    }
    let full_degree = p.checked_pow(order).map(|d| d as usize);
    let tail_valuation = match full_degree {
        Some(d) if d <= cap => None,
        _ => Some(((level - order + 1) as usize * (cap + 1)).saturating_sub(1) as u32),
    };
    Ok(DeltaExpansion {
        center: center.clone(),
        level,
        order,
        cap,
        poly,
        tail_valuation,
    })
}

/// Which valuation claim a coefficient is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Claim {
    /// `v(c_0) >= 0`.
    Integral,
    /// `v(c_1) = n - k`.
    Exact(u32),
    /// `v(c_j) >= (n - k + 1) j - 1`.
    AtLeast(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Pass,
    Violated,
    /// The coefficient's precision is too low to decide the claim.
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientCheck {
    pub degree: usize,
    pub claim: Claim,
    pub observed: Valuation,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub checks: Vec<CoefficientCheck>,
    pub tail_valuation: Option<u32>,
}

impl BoundReport {
    /// `Violated` beats `Undecided` beats `Pass`.
    pub fn verdict(&self) -> Outcome {
        let mut verdict = Outcome::Pass;
        for c in &self.checks {
            match c.outcome {
                Outcome::Violated => return Outcome::Violated,
                Outcome::Undecided => verdict = Outcome::Undecided,
                Outcome::Pass => {}
            }
        }
        verdict
    }
}

fn decided(answer: Option<bool>) -> Outcome {
    match answer {
        Some(true) => Outcome::Pass,
        Some(false) => Outcome::Violated,
        None => Outcome::Undecided,
    }
}

/// Checks every retained coefficient of `e` against its valuation bound.
pub fn check_le1_bounds(e: &DeltaExpansion) -> BoundReport {
    let gap = e.level - e.order;
    let checks = e
        .poly
        .coeffs()
        .iter()
        .enumerate()
        .map(|(degree, c)| {
            let observed = c.valuation();
            let (claim, outcome) = match degree {
                0 => (Claim::Integral, Outcome::Pass),
                1 => (Claim::Exact(gap), decided(observed.is_exactly(gap))),
                j => {
                    let bound = (gap + 1) * j as u32 - 1;
                    (Claim::AtLeast(bound), decided(observed.is_at_least(bound)))
                }
            };
            CoefficientCheck {
                degree,
                claim,
                observed,
                outcome,
            }
        })
        .collect();
    BoundReport {
        checks,
        tail_valuation: e.tail_valuation,
    }
}

/// `(δ^i a mod p)` for `i = 0..m`.
pub fn digit_coords(a: &PadicInt, m: u32) -> Result<Vec<u64>> {
    if a.precision() < m {
        return Err(Error::insufficient("digit_coords", m, a.precision()));
    }
    let mut coords = Vec::with_capacity(m as usize);
    let mut x = a.clone();
    for i in 0..m {
        coords.push(x.residue());
        if i + 1 < m {
            x = x.delta()?;
        }
    }
    Ok(coords)
}
