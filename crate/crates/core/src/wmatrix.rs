//! The matrix `W = (w_{αβ})` with `w_{αβ} = Π_{i<m} (δ^i a_α)^{β_i}` over the
//! root set `C_m`, and linear solves against it over `Z/p^N`.
//!
//! Rows are indexed by residues `α ∈ {0..p^m-1}` (equivalently by `a_α ∈ C_m`),
//! columns by exponent vectors in [`IndexOrder`]. The reduction of `W` mod `p`
//! is invertible, so every elimination step finds a unit pivot.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{check_prime, PadicInt, Valuation};
use crate::roots::{disc_count, IndexOrder, RootSystem};

#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "WMatrixRecord", into = "WMatrixRecord")]
pub struct WMatrix {
    p: u64,
    m: u32,
    precision: u32,
    order: IndexOrder,
    rows: Vec<Vec<PadicInt>>,
    lu: OnceLock<Result<LuFactors>>,
}

#[derive(Serialize, Deserialize)]
struct WMatrixRecord {
    p: u64,
    m: u32,
    #[serde(rename = "N")]
    n: u32,
    order: Vec<Vec<u32>>,
    rows: Vec<Vec<PadicInt>>,
}

impl TryFrom<WMatrixRecord> for WMatrix {
    type Error = Error;

    fn try_from(r: WMatrixRecord) -> Result<Self> {
        let order = IndexOrder::lexicographic(r.p, r.m)?;
        if order.betas() != r.order.as_slice() {
            return Err(Error::Malformed(
                "column order is not the lexicographic order".into(),
            ));
        }
        let w = WMatrix::from_rows(r.p, r.m, r.rows)?;
        if w.precision != r.n {
            return Err(Error::Malformed(format!(
                "declared precision {} but entries carry {}",
                r.n, w.precision
            )));
        }
        Ok(w)
    }
}

impl From<WMatrix> for WMatrixRecord {
    fn from(w: WMatrix) -> Self {
        WMatrixRecord {
            p: w.p,
            m: w.m,
            n: w.precision,
            order: w.order.betas().to_vec(),
            rows: w.rows,
        }
    }
}

impl Clone for WMatrix {
    fn clone(&self) -> Self {
        WMatrix {
            p: self.p,
            m: self.m,
            precision: self.precision,
            order: self.order.clone(),
            rows: self.rows.clone(),
            lu: OnceLock::new(),
        }
    }
}

impl PartialEq for WMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.rows == other.rows
    }
}

#[derive(Debug)]
struct LuFactors {
    perm: Vec<usize>,
    /// Unit lower part below the diagonal, upper part on and above it.
    lu: Vec<Vec<PadicInt>>,
    pivot_inv: Vec<PadicInt>,
}

impl WMatrix {
    /// A `p^m × p^m` matrix from explicit rows in the lexicographic column
    /// order. All entries are truncated to the smallest entry precision.
    pub fn from_rows(p: u64, m: u32, rows: Vec<Vec<PadicInt>>) -> Result<Self> {
        check_prime(p)?;
        let n = disc_count(p, m)?;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed(format!("W must be {n} x {n}")));
        }
        let mut precision = u32::MAX;
        for e in rows.iter().flatten() {
            if e.prime() != p {
                return Err(Error::PrimeMismatch(p, e.prime()));
            }
            precision = precision.min(e.precision());
        }
        if precision == 0 {
            return Err(Error::PrecisionExhausted);
        }
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|e| e.truncate(precision)).collect())
            .collect();
        Ok(WMatrix {
            p,
            m,
            precision,
            order: IndexOrder::lexicographic(p, m)?,
            rows,
            lu: OnceLock::new(),
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    /// Common entry precision.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn order(&self) -> &IndexOrder {
        &self.order
    }

    pub fn rows(&self) -> &[Vec<PadicInt>] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn factors(&self) -> Result<&LuFactors> {
        self.lu
            .get_or_init(|| factor(&self.rows))
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Entries from the cached iterates of `rs`, at precision `N - (m - 1)`.
pub fn build_w(rs: &RootSystem, order: &IndexOrder) -> Result<WMatrix> {
    let (p, m) = (rs.prime(), rs.level());
    if order.prime() != p || order.level() != m {
        return Err(Error::InvalidArgument(format!(
            "index order for ({}, {}) does not match root system ({p}, {m})",
            order.prime(),
            order.level()
        )));
    }
    let precision = rs.precision() + 1 - m.max(1);
    let rows = (0..rs.len())
        .map(|alpha| {
            order
                .betas()
                .iter()
                .map(|beta| {
                    beta.iter().enumerate().fold(
                        PadicInt::one_unchecked(p, precision),
                        |acc, (i, &e)| {
                            if e == 0 {
                                acc
                            } else {
                                &acc * &rs.iterate(alpha, i as u32).pow(e as u64)
                            }
                        },
                    )
                })
                .collect()
        })
        .collect();
    WMatrix::from_rows(p, m, rows)
}

/// Whether `det W` is a unit in `Z_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetCertificate {
    Unit { det_mod_p: u64 },
    NonUnit { valuation: Valuation },
}

impl DetCertificate {
    pub fn is_unit(&self) -> bool {
        matches!(self, DetCertificate::Unit { .. })
    }
}

/// Decides unit-ness of `det W` from its reduction mod `p`. For a non-unit the
/// valuation is computed exactly from integer representatives, up to the
/// entry precision.
pub fn det_unit_certificate(w: &WMatrix) -> DetCertificate {
    let p = w.p;
    let residues: Vec<Vec<u64>> = w
        .rows
        .iter()
        .map(|r| r.iter().map(PadicInt::residue).collect())
        .collect();
    let det = det_mod_prime(residues, p);
    if det != 0 {
        return DetCertificate::Unit { det_mod_p: det };
    }
    let integer_rows: Vec<Vec<BigInt>> = w
        .rows
        .iter()
        .map(|r| r.iter().map(|e| BigInt::from(e.value().clone())).collect())
        .collect();
    let det = bareiss_det(integer_rows);
    let det = PadicInt::from_bigint(p, w.precision, &det).expect("prime and precision validated");
    DetCertificate::NonUnit {
        valuation: det.valuation(),
    }
}

fn det_mod_prime(mut a: Vec<Vec<u64>>, p: u64) -> u64 {
    let n = a.len();
    let mul = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let inv = |x: u64| {
        // Fermat: x^{p-2}
        let (mut base, mut e, mut acc) = (x, p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            e >>= 1;
        }
        acc
    };
    let mut det = 1u64;
    for k in 0..n {
        let Some(r) = (k..n).find(|&r| a[r][k] != 0) else {
            return 0;
        };
        if r != k {
            a.swap(r, k);
            det = (p - det) % p;
        }
        det = mul(det, a[k][k]);
        let piv_inv = inv(a[k][k]);
        for i in k + 1..n {
            if a[i][k] == 0 {
                continue;
            }
            let f = mul(a[i][k], piv_inv);
            for j in k..n {
                let t = mul(f, a[k][j]);
                a[i][j] = (a[i][j] + p - t) % p;
            }
        }
    }
    det
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(r, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn factor(rows: &[Vec<PadicInt>]) -> Result<LuFactors> {
    let n = rows.len();
    let mut a = rows.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut pivot_inv = Vec::with_capacity(n);
    for k in 0..n {
        let r = (k..n).find(|&r| a[r][k].is_unit()).ok_or_else(|| {
            Error::Internal(format!("no unit pivot in column {k}; det W is not a unit"))
        })?;
        a.swap(k, r);
        perm.swap(k, r);
        let inv = a[k][k].unit_inverse()?;
        for i in k + 1..n {
            let l = &a[i][k] * &inv;
            for j in k + 1..n {
                let t = &l * &a[k][j];
                a[i][j] = &a[i][j] - &t;
            }
            a[i][k] = l;
        }
        pivot_inv.push(inv);
    }
    Ok(LuFactors {
        perm,
        lu: a,
        pivot_inv,
    })
}

/// Solves `W x = rhs` over `Z/p^{N_r}`, `N_r` the smallest right-hand-side
/// precision (capped by the entry precision). The factorization is computed
/// once per matrix and reused.
pub fn solve_unit_system(w: &WMatrix, rhs: &[PadicInt]) -> Result<Vec<PadicInt>> {
    let n = w.dim();
    if rhs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has {} entries, W has {n} rows",
            rhs.len()
        )));
    }
    for b in rhs {
        if b.prime() != w.p {
            return Err(Error::PrimeMismatch(w.p, b.prime()));
        }
        if b.precision() == 0 {
            return Err(Error::PrecisionExhausted);
        }
    }
    let f = w.factors()?;
    let mut y: Vec<PadicInt> = f.perm.iter().map(|&i| rhs[i].clone()).collect();
    for i in 0..n {
        for j in 0..i {
            let t = &f.lu[i][j] * &y[j];
            y[i] = &y[i] - &t;
        }
    }
    let mut x: Vec<Option<PadicInt>> = vec![None; n];
    for i in (0..n).rev() {
        let mut acc = y[i].clone();
        for j in i + 1..n {
            let xj = x[j].as_ref().expect("solved above");
            acc = &acc - &(&f.lu[i][j] * xj);
        }
        x[i] = Some(&acc * &f.pivot_inv[i]);
    }
    Ok(x.into_iter().map(|v| v.expect("all solved")).collect())
}

/// Signed determinant of small integer matrices; used by tests and the CLI
/// summary of tiny cases.
pub fn integer_det(rows: &[Vec<i64>]) -> i64 {
    let big = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let d = bareiss_det(big);
    d.to_i64().unwrap_or_else(|| {
        if d.is_negative() {
            i64::MIN
        } else {
            i64::MAX
        }
    })
}
