//! Arithmetic differential calculus on the p-adic integers.
//!
//! The Fermat quotient `δx = (x - x^p)/p` plays the role of a derivative on
//! `Z_p`. This crate computes with it at finite precision:
//!
//! * [`PadicInt`]: truncated p-adic integers with honest precision tracking.
//! * [`delta_expansion`]: `δ^k(a + p^n u)` as a polynomial in `u`, with
//!   valuation bound checks.
//! * [`compute_cm`]: the `p^m` roots of `δ^m`, one per residue mod `p^m`.
//! * [`build_w`]: the matrix `W` whose unit determinant makes canonical
//!   representations unique.
//! * [`represent`] and [`expand`]: conversion between per-disc power series
//!   and canonical series in `x, δx, …, δ^m x`.
//! * [`legendre_series_eval`]: the Legendre symbol as an operator of order 1.
//!
//! ```
//! use arithdiff_core::PadicInt;
//!
//! let x = PadicInt::from_integer(3, 4, 2).unwrap();
//! assert_eq!(x.delta().unwrap(), PadicInt::from_integer(3, 3, -2).unwrap());
//! ```

pub mod delta_calc;
pub mod error;
pub mod legendre;
pub mod padic;
pub mod poly;
pub mod repr;
pub mod roots;
pub mod wmatrix;

pub use delta_calc::{
    check_le1_bounds, delta_expansion, delta_poly_step, digit_coords, BoundReport, Claim,
    CoefficientCheck, DeltaExpansion, Outcome,
};
pub use error::{Error, Result};
pub use legendre::{
    legendre_oracle, legendre_series_eval, locally_constant_to_level_m, LegendreSeriesParams,
};
pub use padic::{is_prime, PadicInt, Valuation};
pub use poly::PadicPoly;
pub use repr::{
    disc_center, evaluate_canonical, evaluate_local, expand, represent, represent_detailed,
    roundtrip_report, w_matrix, CanonicalSeries, Deviation, Evaluation, LocalFunctionData,
    Representation, RoundTripReport,
};
pub use roots::{compute_cm, root_for_residue, IndexOrder, RootSystem, MAX_DISCS};
pub use wmatrix::{
    build_w, det_unit_certificate, integer_det, solve_unit_system, DetCertificate, WMatrix,
};
