//! The root set `C_m = {a ∈ Z_p : δ^m a = 0}`.
//!
//! `C_0 = {0}`, and every `a ∈ C_{m-1}` has exactly `p` preimages under `δ`,
//! the roots of `t^p - t + p·a`, one per residue class mod `p`. The resulting
//! `p^m` elements reduce bijectively onto `Z/p^m`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{check_prime, modulus, PadicInt};

/// Sizes above this are rejected before any work is done.
pub const MAX_DISCS: u64 = 1 << 16;

pub(crate) fn disc_count(p: u64, m: u32) -> Result<usize> {
    match p.checked_pow(m) {
        Some(n) if n <= MAX_DISCS => Ok(n as usize),
        _ => Err(Error::InvalidArgument(format!(
            "{p}^{m} discs exceeds the supported maximum of {MAX_DISCS}"
        ))),
    }
}

/// `C_m` at precision `N`, indexed so that `roots[α] ≡ α (mod p^m)`.
#[derive(Clone, Debug, Serialize)]
pub struct RootSystem {
    p: u64,
    m: u32,
    precision: u32,
    roots: Vec<PadicInt>,
    /// `iterates[α][i] = δ^i a_α` for `0 <= i <= m`, at precision `N - i`.
    iterates: Vec<Vec<PadicInt>>,
}

impl RootSystem {
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn roots(&self) -> &[PadicInt] {
        &self.roots
    }

    pub fn root(&self, alpha: usize) -> &PadicInt {
        &self.roots[alpha]
    }

    /// `δ^i a_α`.
    pub fn iterate(&self, alpha: usize, i: u32) -> &PadicInt {
        &self.iterates[alpha][i as usize]
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Builds `C_m` by lifting each root of level `ℓ - 1` along all `p` branches.
pub fn compute_cm(p: u64, m: u32, precision: u32) -> Result<RootSystem> {
    check_prime(p)?;
    let count = disc_count(p, m)?;
    if precision < m + 1 {
        return Err(Error::insufficient("compute_cm", m + 1, precision));
    }
    let mut level = vec![PadicInt::zero_unchecked(p, precision)];
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * p as usize);
        for a in &level {
            for j in 0..p {
                next.push(PadicInt::hensel_root(p, precision, a, j)?);
            }
        }
        level = next;
    }

    let pm = modulus(p, m);
    let mut slots: Vec<Option<PadicInt>> = vec![None; count];
    for root in level {
        let alpha = (root.value() % &*pm)
            .to_usize()
            .expect("residue below p^m fits in usize");
        if slots[alpha].replace(root).is_some() {
            return Err(Error::Internal(format!(
                "two roots of delta^{m} share the residue {alpha} mod {p}^{m}"
            )));
        }
    }
    let roots: Vec<PadicInt> = slots
        .into_iter()
        .enumerate()
        .map(|(alpha, r)| {
            r.ok_or_else(|| Error::Internal(format!("no root of delta^{m} is {alpha} mod {p}^{m}")))
        })
        .collect::<Result<_>>()?;

    let iterates = roots
        .iter()
        .map(|a| (0..=m).map(|i| a.delta_iter(i)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    Ok(RootSystem {
        p,
        m,
        precision,
        roots,
        iterates,
    })
}

/// The single element of `C_m` congruent to `alpha` mod `p^m`.
///
/// Walks the lifting tree from the top: the parent `δ a_α` is the root of
/// level `m - 1` congruent to `δα` mod `p^{m-1}`, and the branch is `α mod p`.
pub fn root_for_residue(p: u64, m: u32, precision: u32, alpha: &BigUint) -> Result<PadicInt> {
    check_prime(p)?;
    if precision < m + 1 {
        return Err(Error::insufficient("root_for_residue", m + 1, precision));
    }
    if m == 0 {
        return Ok(PadicInt::zero_unchecked(p, precision));
    }
    let alpha = alpha % &*modulus(p, m);
    let branch = (&alpha % p).to_u64().expect("residue below p");
    let parent_residue = if m == 1 {
        BigUint::from(0u32)
    } else {
        PadicInt::reduced(p, m, alpha).delta()?.value().clone()
    };
    let parent = root_for_residue(p, m - 1, precision, &parent_residue)?;
    PadicInt::hensel_root(p, precision, &parent, branch)
}

/// An ordering of the exponent vectors `β ∈ {0..p-1}^m`: lexicographic with
/// `β_0` most significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexOrder {
    p: u64,
    m: u32,
    betas: Vec<Vec<u32>>,
}

impl IndexOrder {
    pub fn lexicographic(p: u64, m: u32) -> Result<Self> {
        check_prime(p)?;
        let count = disc_count(p, m)?;
        let betas = (0..count)
            .map(|mut idx| {
                let mut beta = vec![0u32; m as usize];
                for slot in beta.iter_mut().rev() {
                    *slot = (idx % p as usize) as u32;
                    idx /= p as usize;
                }
                beta
            })
            .collect();
        Ok(IndexOrder { p, m, betas })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn betas(&self) -> &[Vec<u32>] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn position(&self, beta: &[u32]) -> Option<usize> {
        if beta.len() != self.m as usize || beta.iter().any(|&b| b as u64 >= self.p) {
            return None;
        }
        Some(
            beta.iter()
                .fold(0usize, |acc, &b| acc * self.p as usize + b as usize),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(rs: &RootSystem) -> Vec<u64> {
        rs.roots().iter().map(|r| r.value().to_u64().unwrap()).collect()
    }

    #[test]
    fn level_zero_is_origin() {
        let rs = compute_cm(5, 0, 4).unwrap();
        assert_eq!(values(&rs), vec![0]);
    }

    #[test]
    fn small_root_sets() {
        assert_eq!(values(&compute_cm(3, 1, 3).unwrap()), vec![0, 1, 26]);
        assert_eq!(values(&compute_cm(2, 1, 5).unwrap()), vec![0, 1]);
    }

    #[test]
    fn iterates_end_in_zero() {
        let rs = compute_cm(3, 2, 8).unwrap();
        for alpha in 0..rs.len() {
            assert!(rs.iterate(alpha, 2).is_zero());
            assert_eq!(rs.iterate(alpha, 2).precision(), 6);
        }
    }

    #[test]
    fn single_root_agrees_with_tree() {
        for (p, m) in [(2, 3), (3, 2), (5, 2)] {
            let rs = compute_cm(p, m, 10).unwrap();
            for (alpha, root) in rs.roots().iter().enumerate() {
                let single = root_for_residue(p, m, 10, &BigUint::from(alpha)).unwrap();
                assert_eq!(&single, root);
            }
        }
    }

    #[test]
    fn insufficient_precision() {
        assert!(compute_cm(3, 2, 2).unwrap_err().is_precision());
    }

    #[test]
    fn index_order_is_lexicographic() {
        let ord = IndexOrder::lexicographic(2, 2).unwrap();
        assert_eq!(ord.betas(), &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(ord.position(&[1, 0]), Some(2));
        assert_eq!(ord.position(&[2, 0]), None);
        assert_eq!(IndexOrder::lexicographic(3, 0).unwrap().betas(), &[Vec::<u32>::new()]);
    }
}
