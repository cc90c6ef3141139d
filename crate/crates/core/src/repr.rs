//! Conversion between the two encodings of a level-`m` analytic function
//! `f: Z_p → Z_p`.
//!
//! * [`LocalFunctionData`]: one power series `G_α(u)` per disc, with
//!   `f(a_α + p^m u) = G_α(u)`. The disc centers are the elements `a_α` of
//!   `C_m` (so `a_α ≡ α mod p^m`); any complete residue system would do, and
//!   this one makes `δ^m` vanish at every center.
//! * [`CanonicalSeries`]: the coefficients `a_{β,n}` of the unique series
//!   `F = Σ_n Σ_β a_{β,n} x_0^{β_0}…x_{m-1}^{β_{m-1}} x_m^n` with all `β_i < p`
//!   and `f(x) = F(x, δx, …, δ^m x)`.
//!
//! [`expand`] goes from the operator to the local series by substituting
//! δ-expansions. [`represent`] goes back: on disc `α`, `δ^m(a_α + p^m u)` has
//! zero constant term and unit linear coefficient `c_α`, so the `u^k`
//! coefficient of the partial sum over `n <= k` is
//! `c_α^k Σ_β w_{αβ} a_{β,k}` plus terms in `a_{β,n}`, `n < k`. Each layer
//! `k` is then one solve against `W`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::delta_calc::delta_expansion;
use crate::error::{Error, Result};
use crate::padic::{check_prime, modulus, PadicInt, Valuation};
use crate::poly::PadicPoly;
use crate::roots::{compute_cm, disc_count, root_for_residue, IndexOrder, RootSystem};
use crate::wmatrix::{build_w, solve_unit_system, WMatrix};

/// Per-disc truncated power series `G_α(u) = Σ_{k<=K} g_{α,k} u^k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LocalRecord", into = "LocalRecord")]
pub struct LocalFunctionData {
    p: u64,
    m: u32,
    precision: u32,
    truncation: usize,
    discs: Vec<Vec<PadicInt>>,
}

#[derive(Serialize, Deserialize)]
struct LocalRecord {
    p: u64,
    m: u32,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "K")]
    k: usize,
    discs: Vec<DiscRecord>,
}

#[derive(Serialize, Deserialize)]
struct DiscRecord {
    alpha: u64,
    coeffs: Vec<PadicInt>,
}

impl TryFrom<LocalRecord> for LocalFunctionData {
    type Error = Error;

    fn try_from(r: LocalRecord) -> Result<Self> {
        check_prime(r.p)?;
        let count = disc_count(r.p, r.m)?;
        let mut by_alpha: BTreeMap<u64, Vec<PadicInt>> = BTreeMap::new();
        for d in r.discs {
            if d.alpha >= count as u64 {
                return Err(Error::Malformed(format!(
                    "disc index {} out of range 0..{count}",
                    d.alpha
                )));
            }
            if by_alpha.insert(d.alpha, d.coeffs).is_some() {
                return Err(Error::Malformed(format!("disc {} listed twice", d.alpha)));
            }
        }
        if by_alpha.len() != count {
            return Err(Error::Malformed(format!(
                "{} of {count} discs present",
                by_alpha.len()
            )));
        }
        LocalFunctionData::new(r.p, r.m, r.n, r.k, by_alpha.into_values().collect())
    }
}

impl From<LocalFunctionData> for LocalRecord {
    fn from(l: LocalFunctionData) -> Self {
        LocalRecord {
            p: l.p,
            m: l.m,
            n: l.precision,
            k: l.truncation,
            discs: l
                .discs
                .into_iter()
                .enumerate()
                .map(|(alpha, coeffs)| DiscRecord {
                    alpha: alpha as u64,
                    coeffs,
                })
                .collect(),
        }
    }
}

impl LocalFunctionData {
    /// `discs[α]` lists `g_{α,0}, g_{α,1}, …`; shorter lists are padded with
    /// zeros up to degree `truncation`. Coefficients are truncated to
    /// `precision` and must carry at least that many digits.
    pub fn new(
        p: u64,
        m: u32,
        precision: u32,
        truncation: usize,
        discs: Vec<Vec<PadicInt>>,
    ) -> Result<Self> {
        check_prime(p)?;
        let count = disc_count(p, m)?;
        if precision == 0 {
            return Err(Error::InvalidPrecision { min: 1, got: 0 });
        }
        if discs.len() != count {
            return Err(Error::Malformed(format!(
                "expected {count} discs, got {}",
                discs.len()
            )));
        }
        let discs = discs
            .into_iter()
            .enumerate()
            .map(|(alpha, coeffs)| {
                if coeffs.len() > truncation + 1 {
                    return Err(Error::Malformed(format!(
                        "disc {alpha} has {} coefficients, more than K + 1 = {}",
                        coeffs.len(),
                        truncation + 1
                    )));
                }
                let mut out = Vec::with_capacity(truncation + 1);
                for c in coeffs {
                    if c.prime() != p {
                        return Err(Error::PrimeMismatch(p, c.prime()));
                    }
                    if c.precision() < precision {
                        return Err(Error::insufficient(
                            "local series coefficient",
                            precision,
                            c.precision(),
                        ));
                    }
                    out.push(c.truncate(precision));
                }
                out.resize(truncation + 1, PadicInt::zero_unchecked(p, precision));
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalFunctionData {
            p,
            m,
            precision,
            truncation,
            discs,
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// The truncation degree `K`.
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn discs(&self) -> &[Vec<PadicInt>] {
        &self.discs
    }

    pub fn disc(&self, alpha: usize) -> &[PadicInt] {
        &self.discs[alpha]
    }

    fn disc_poly(&self, alpha: usize) -> PadicPoly {
        PadicPoly::from_coeffs_unchecked(self.p, self.discs[alpha].clone())
    }
}

/// Truncated canonical series, `a_{β,n}` for `β` in lexicographic order and
/// `0 <= n <= K`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CanonicalRecord", into = "CanonicalRecord")]
pub struct CanonicalSeries {
    p: u64,
    m: u32,
    truncation: usize,
    order: IndexOrder,
    /// `layers[n][β]`.
    layers: Vec<Vec<PadicInt>>,
}

#[derive(Serialize, Deserialize)]
struct CanonicalRecord {
    p: u64,
    m: u32,
    #[serde(rename = "K")]
    k: usize,
    terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    beta: Vec<u32>,
    n: usize,
    coeff: PadicInt,
}

impl TryFrom<CanonicalRecord> for CanonicalSeries {
    type Error = Error;

    /// Missing terms are zero at the smallest precision among listed terms.
    fn try_from(r: CanonicalRecord) -> Result<Self> {
        let order = IndexOrder::lexicographic(r.p, r.m)?;
        let prec = r
            .terms
            .iter()
            .map(|t| t.coeff.precision())
            .min()
            .ok_or_else(|| Error::Malformed("canonical series lists no terms".into()))?;
        let mut layers: Vec<Vec<Option<PadicInt>>> = vec![vec![None; order.len()]; r.k + 1];
        for t in r.terms {
            let idx = order
                .position(&t.beta)
                .ok_or_else(|| Error::Malformed(format!("exponent vector {:?} not in I'", t.beta)))?;
            if t.n > r.k {
                return Err(Error::Malformed(format!("term degree {} exceeds K = {}", t.n, r.k)));
            }
            if layers[t.n][idx].replace(t.coeff).is_some() {
                return Err(Error::Malformed(format!("term ({:?}, {}) listed twice", t.beta, t.n)));
            }
        }
        let layers = layers
            .into_iter()
            .map(|layer| {
                layer
                    .into_iter()
                    .map(|c| c.unwrap_or_else(|| PadicInt::zero_unchecked(r.p, prec)))
                    .collect()
            })
            .collect();
        CanonicalSeries::new(r.p, r.m, r.k, layers)
    }
}

impl From<CanonicalSeries> for CanonicalRecord {
    fn from(s: CanonicalSeries) -> Self {
        let mut terms = Vec::with_capacity(s.layers.len() * s.order.len());
        for (n, layer) in s.layers.into_iter().enumerate() {
            for (beta, coeff) in s.order.betas().iter().zip(layer) {
                terms.push(TermRecord {
                    beta: beta.clone(),
                    n,
                    coeff,
                });
            }
        }
        CanonicalRecord {
            p: s.p,
            m: s.m,
            k: s.truncation,
            terms,
        }
    }
}

impl CanonicalSeries {
    /// `layers[n][β]` for `n = 0..=K`, `β` in lexicographic order.
    pub fn new(p: u64, m: u32, truncation: usize, layers: Vec<Vec<PadicInt>>) -> Result<Self> {
        let order = IndexOrder::lexicographic(p, m)?;
        if layers.len() != truncation + 1 || layers.iter().any(|l| l.len() != order.len()) {
            return Err(Error::Malformed(format!(
                "expected {} layers of {} coefficients",
                truncation + 1,
                order.len()
            )));
        }
        for c in layers.iter().flatten() {
            if c.prime() != p {
                return Err(Error::PrimeMismatch(p, c.prime()));
            }
            if c.precision() == 0 {
                return Err(Error::PrecisionExhausted);
            }
        }
        Ok(CanonicalSeries {
            p,
            m,
            truncation,
            order,
            layers,
        })
    }

    pub fn zero(p: u64, m: u32, truncation: usize, precision: u32) -> Result<Self> {
        let width = disc_count(p, m)?;
        let zero = PadicInt::zero(p, precision)?;
        Self::new(p, m, truncation, vec![vec![zero; width]; truncation + 1])
    }

    /// The series with a single term `coeff · x^β x_m^n`, others zero at the
    /// same precision.
    pub fn monomial(p: u64, m: u32, truncation: usize, beta: &[u32], n: usize, coeff: PadicInt) -> Result<Self> {
        let mut s = Self::zero(p, m, truncation, coeff.precision())?;
        let idx = s
            .order
            .position(beta)
            .ok_or_else(|| Error::InvalidArgument(format!("exponent vector {beta:?} not in I'")))?;
        if n > truncation {
            return Err(Error::InvalidArgument(format!("degree {n} exceeds K = {truncation}")));
        }
        s.layers[n][idx] = coeff;
        Ok(s)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn order(&self) -> &IndexOrder {
        &self.order
    }

    pub fn layers(&self) -> &[Vec<PadicInt>] {
        &self.layers
    }

    /// `a_{β,n}` with `β` given by its position in [`Self::order`].
    pub fn coeff(&self, beta: usize, n: usize) -> &PadicInt {
        &self.layers[n][beta]
    }

    /// Smallest coefficient precision.
    pub fn precision(&self) -> u32 {
        self.layers
            .iter()
            .flatten()
            .map(PadicInt::precision)
            .min()
            .expect("at least one coefficient")
    }

    pub fn truncate_precision(&self, prec: u32) -> Self {
        let mut s = self.clone();
        for c in s.layers.iter_mut().flatten() {
            *c = c.truncate(prec);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.layers.iter().flatten().all(PadicInt::is_zero)
    }
}

/// What a disc contributes to both directions of the conversion.
struct Disc {
    /// `Π_i (δ^i(a_α + p^m u))^{β_i}` for each `β`, truncated to degree `K`.
    monomials: Vec<PadicPoly>,
    /// `(δ^m(a_α + p^m u))^n` for `n = 0..=K`, constant term forced to 0.
    last_powers: Vec<PadicPoly>,
    lead_inv: PadicInt,
}

struct DiscBasis {
    roots: RootSystem,
    order: IndexOrder,
    discs: Vec<Disc>,
}

impl DiscBasis {
    fn build(p: u64, m: u32, precision: u32, truncation: usize) -> Result<Self> {
        let roots = compute_cm(p, m, precision)?;
        let order = IndexOrder::lexicographic(p, m)?;
        // the linear coefficient of δ^m is needed even when K = 0
        let cap = truncation.max(1);
        let discs = roots
            .roots()
            .iter()
            .map(|center| {
                let mut expansions = (0..=m)
                    .map(|i| delta_expansion(center, m, i, cap).map(|e| e.into_poly()))
                    .collect::<Result<Vec<_>>>()?;
                let mut last = expansions.pop().expect("m + 1 expansions");
                let mut coeffs = last.clone().into_coeffs();
                let constant = &mut coeffs[0];
                if !constant.is_zero() {
                    return Err(Error::Internal(format!(
                        "delta^{m} of root {center} is {constant}, not 0"
                    )));
                }
                // exact zero keeps the minimal degree of the n-th power at n
                *constant = PadicInt::zero_unchecked(p, constant.precision());
                let lead = coeffs
                    .get(1)
                    .cloned()
                    .ok_or_else(|| Error::Internal("delta^m expansion has no linear term".into()))?;
                if !lead.is_unit() {
                    return Err(Error::Internal(format!(
                        "linear coefficient {lead} of delta^{m} at {center} is not a unit"
                    )));
                }
                let lead_inv = lead.unit_inverse()?;
                last = PadicPoly::from_coeffs_unchecked(p, coeffs);
                last.truncate(truncation);

                let last_prec = precision - m;
                let mut last_powers = vec![PadicPoly::one(p, last_prec)];
                for n in 1..=truncation {
                    let next = last_powers[n - 1].mul_truncated(&last, truncation);
                    last_powers.push(next);
                }

                // powers[i][e] = (δ^i(a + p^m u))^e for e < p
                let powers: Vec<Vec<PadicPoly>> = expansions
                    .iter_mut()
                    .map(|e| {
                        e.truncate(truncation);
                        let mut row = vec![PadicPoly::one(p, precision)];
                        for k in 1..p as usize {
                            let next = row[k - 1].mul_truncated(e, truncation);
                            row.push(next);
                        }
                        row
                    })
                    .collect();
                let monomials = order
                    .betas()
                    .iter()
                    .map(|beta| {
                        beta.iter().enumerate().fold(
                            PadicPoly::one(p, precision),
                            |acc, (i, &e)| {
                                if e == 0 {
                                    acc
                                } else {
                                    acc.mul_truncated(&powers[i][e as usize], truncation)
                                }
                            },
                        )
                    })
                    .collect();
                Ok(Disc {
                    monomials,
                    last_powers,
                    lead_inv,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscBasis {
            roots,
            order,
            discs,
        })
    }
}

impl Disc {
    /// `Σ_β x_β · monomial_β`.
    fn combine(&self, p: u64, weights: &[PadicInt]) -> PadicPoly {
        self.monomials
            .iter()
            .zip(weights)
            .fold(PadicPoly::zero(p), |acc, (mono, w)| acc.add(&mono.scale(w)))
    }
}

fn pad(poly: PadicPoly, len: usize, prec: u32) -> Vec<PadicInt> {
    let p = poly.prime();
    let mut coeffs = poly.into_coeffs();
    coeffs.resize(len, PadicInt::zero_unchecked(p, prec));
    coeffs
}

/// Local series of the operator `F` on every disc `a_α + p^m Z_p`, truncated
/// at `F`'s own `K`, at precision `N - m` (or `F`'s precision if lower).
pub fn expand(series: &CanonicalSeries, precision: u32) -> Result<LocalFunctionData> {
    let (p, m, k) = (series.p, series.m, series.truncation);
    if precision < m + 1 {
        return Err(Error::insufficient("expand", m + 1, precision));
    }
    let basis = DiscBasis::build(p, m, precision, k)?;
    let out_prec = series.precision().min(precision - m);
    let discs = basis
        .discs
        .iter()
        .map(|disc| {
            let local = series
                .layers
                .iter()
                .zip(&disc.last_powers)
                .fold(PadicPoly::zero(p), |acc, (layer, power)| {
                    acc.add(&disc.combine(p, layer).mul_truncated(power, k))
                });
            pad(local.reduce_precision(out_prec), k + 1, out_prec)
        })
        .collect();
    LocalFunctionData::new(p, m, out_prec, k, discs)
}

/// A canonical series together with the residuals left after the last layer.
#[derive(Clone, Debug)]
pub struct Representation {
    pub series: CanonicalSeries,
    /// `G_α - Σ_{n<=K} Σ_β a_{β,n} (…)` per disc, truncated at degree `K`.
    pub residuals: Vec<PadicPoly>,
}

impl Representation {
    pub fn residuals_vanish(&self) -> bool {
        let k = self.series.truncation;
        self.residuals.iter().all(|r| r.vanishes_through(k))
    }
}

/// The first `K + 1` layers of the canonical series of the function given by
/// `local`, at precision `N - m`.
pub fn represent(local: &LocalFunctionData) -> Result<CanonicalSeries> {
    represent_detailed(local).map(|r| r.series)
}

pub fn represent_detailed(local: &LocalFunctionData) -> Result<Representation> {
    let (p, m, k_max) = (local.p, local.m, local.truncation);
    if local.precision < m + 1 {
        return Err(Error::insufficient("represent", m + 1, local.precision));
    }
    let basis = DiscBasis::build(p, m, local.precision, k_max)?;
    let w = build_w(&basis.roots, &basis.order)?;

    let mut residuals: Vec<PadicPoly> = (0..basis.discs.len()).map(|a| local.disc_poly(a)).collect();
    let mut layers = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let rhs = basis
            .discs
            .iter()
            .zip(&residuals)
            .map(|(disc, r)| {
                let g = r.coeff(k).expect("residuals keep K + 1 coefficients");
                g * &disc.lead_inv.pow(k as u64)
            })
            .collect::<Vec<_>>();
        let layer = solve_unit_system(&w, &rhs)?;
        for (alpha, (disc, r)) in basis.discs.iter().zip(residuals.iter_mut()).enumerate() {
            let update = disc.combine(p, &layer).mul_truncated(&disc.last_powers[k], k_max);
            *r = r.sub(&update);
            if !r.coeff(k).is_some_and(PadicInt::is_zero) {
                return Err(Error::Internal(format!(
                    "residual of disc {alpha} not annihilated at degree {k}"
                )));
            }
        }
        layers.push(layer);
    }
    let out_prec = layers
        .iter()
        .flatten()
        .map(PadicInt::precision)
        .min()
        .expect("at least one coefficient");
    let layers = layers
        .into_iter()
        .map(|l| l.into_iter().map(|c| c.truncate(out_prec)).collect())
        .collect();
    Ok(Representation {
        series: CanonicalSeries::new(p, m, k_max, layers)?,
        residuals,
    })
}

/// A value together with a lower bound on the valuation of what truncation
/// left out (assuming the omitted coefficients are p-adic integers).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evaluation {
    pub value: PadicInt,
    pub tail_valuation: u32,
}

fn tail_bound(truncation: usize, v: Valuation) -> u32 {
    (truncation as u64 + 1)
        .saturating_mul(v.lower_bound() as u64)
        .min(u32::MAX as u64) as u32
}

/// `F(x, δx, …, δ^m x)` summed over the stored coefficients.
pub fn evaluate_canonical(series: &CanonicalSeries, x: &PadicInt) -> Result<Evaluation> {
    let (p, m) = (series.p, series.m);
    if x.prime() != p {
        return Err(Error::PrimeMismatch(p, x.prime()));
    }
    if x.precision() < m + 1 {
        return Err(Error::insufficient("evaluate_canonical", m + 1, x.precision()));
    }
    let deltas = (0..=m).map(|i| x.delta_iter(i)).collect::<Result<Vec<_>>>()?;
    let last = &deltas[m as usize];
    let prec = last.precision();
    let monomials: Vec<PadicInt> = series
        .order
        .betas()
        .iter()
        .map(|beta| {
            beta.iter()
                .enumerate()
                .fold(PadicInt::one_unchecked(p, prec), |acc, (i, &e)| {
                    &acc * &deltas[i].pow(e as u64)
                })
        })
        .collect();
    let mut value = PadicInt::zero_unchecked(p, prec);
    let mut power = PadicInt::one_unchecked(p, prec);
    for layer in &series.layers {
        for (a, mono) in layer.iter().zip(&monomials) {
            value = &value + &(a * mono * &power);
        }
        power = &power * last;
    }
    Ok(Evaluation {
        value,
        tail_valuation: tail_bound(series.truncation, last.valuation()),
    })
}

/// `G_α(u)` for `x = a_α + p^m u`.
pub fn evaluate_local(local: &LocalFunctionData, x: &PadicInt) -> Result<Evaluation> {
    let (p, m) = (local.p, local.m);
    if x.prime() != p {
        return Err(Error::PrimeMismatch(p, x.prime()));
    }
    if x.precision() < m + 1 {
        return Err(Error::insufficient("evaluate_local", m + 1, x.precision()));
    }
    let alpha = x.value() % &*modulus(p, m);
    let center = root_for_residue(p, m, x.precision(), &alpha)?;
    let mut u = x - &center;
    for _ in 0..m {
        u = u.divide_by_p()?;
    }
    let alpha = alpha.to_usize().expect("disc count fits in usize");
    Ok(Evaluation {
        value: local.disc_poly(alpha).eval(&u),
        tail_valuation: tail_bound(local.truncation, u.valuation()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Deviation {
    pub beta: Vec<u32>,
    pub n: usize,
    pub valuation: Valuation,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTripReport {
    pub recovered: CanonicalSeries,
    /// Agreement is required modulo `p^modulus_exponent`, i.e. `N - 2m`.
    pub modulus_exponent: u32,
    pub deviations: Vec<Deviation>,
    /// Smallest deviation valuation: the largest p-adic deviation.
    pub worst: Valuation,
    pub pass: bool,
}

/// `represent(expand(F, N))` compared with `F` modulo `p^{N-2m}`.
pub fn roundtrip_report(series: &CanonicalSeries, precision: u32) -> Result<RoundTripReport> {
    let m = series.m;
    if precision < 2 * m + 1 {
        return Err(Error::insufficient("roundtrip", 2 * m + 1, precision));
    }
    if series.precision() + m < precision {
        return Err(Error::insufficient(
            "roundtrip (series coefficients)",
            precision - m,
            series.precision(),
        ));
    }
    let modulus_exponent = precision - 2 * m;
    let recovered = represent(&expand(series, precision)?)?;
    let mut deviations = Vec::new();
    let mut worst = Valuation::AtLeast(modulus_exponent);
    for (n, (got, want)) in recovered.layers.iter().zip(&series.layers).enumerate() {
        for ((beta, g), w) in series.order.betas().iter().zip(got).zip(want) {
            let diff = g.truncate(modulus_exponent) - w.truncate(modulus_exponent);
            let valuation = diff.valuation();
            if valuation.lower_bound() < worst.lower_bound() {
                worst = valuation;
            }
            deviations.push(Deviation {
                beta: beta.clone(),
                n,
                valuation,
            });
        }
    }
    let pass = recovered.precision() >= modulus_exponent
        && deviations
            .iter()
            .all(|d| d.valuation == Valuation::AtLeast(modulus_exponent));
    Ok(RoundTripReport {
        recovered,
        modulus_exponent,
        deviations,
        worst,
        pass,
    })
}

/// The center `a_α ∈ C_m` of disc `α` at the given precision.
pub fn disc_center(p: u64, m: u32, precision: u32, alpha: u64) -> Result<PadicInt> {
    root_for_residue(p, m, precision, &BigUint::from(alpha))
}

/// Builds the explicit `W` used by [`represent`] for `(p, m)` at precision `N`.
pub fn w_matrix(p: u64, m: u32, precision: u32) -> Result<WMatrix> {
    let rs = compute_cm(p, m, precision)?;
    build_w(&rs, &IndexOrder::lexicographic(p, m)?)
}
