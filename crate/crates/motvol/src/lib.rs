//! Exact motivic volumes on loop spaces.
//!
//! The crate computes volumes of definable subsets of `A^d((t))` and of
//! `G((t))` for `G` in `{G_a^d, G_m^m, SL_2}` as closed-form expressions in
//! the Lefschetz class `L`, inside the subring
//! `Z[L, L^{-1}, (L^b - 1)^{-1} : b >= 1]` of the dimensionally completed
//! Grothendieck ring.  Every identity the construction relies on (shift
//! Jacobians, translation invariance, chart independence, restriction to the
//! canonical arc-space measure) is verified both symbolically and against a
//! brute-force point count over small finite fields.
//!
//! Module map:
//! * [`ring`] — arithmetic in the value ring, truncated `L^{-1}` expansions,
//!   counting specializations `L -> q`.
//! * [`laurent`] — truncated Laurent series over `Q` or `F_p` with explicit
//!   valuation and precision tracking.
//! * [`mpoly`] — multivariate polynomials and rational functions with Laurent
//!   coefficients, exact gcd, symbolic Jacobians.
//! * [`cylinder`] — finite-level definable subsets of `A^d((t))`, their jet
//!   classes and the shift action.
//! * [`measure`] — stable and bounded volumes, weighted integrals, sigma-sums
//!   of geometric stratum families.
//! * [`biggroup`] — big-cell charts, translation maps, the invariance
//!   identity, Haar measures and the canonical-restriction checks.
//! * [`oracle`] — brute-force jet enumeration over `F_q`.
//! * [`cli`] — config-driven task runner producing deterministic reports.

pub mod biggroup;
pub mod cli;
pub mod cylinder;
pub mod laurent;
pub mod measure;
pub mod mpoly;
pub mod oracle;
pub mod ring;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("order indeterminate: {0}")]
    IndeterminateOrder(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divergent series: {0}")]
    Divergence(String),
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("unsupported constraint: {0}")]
    UnsupportedConstraint(String),
    #[error("not in the big cell: {0}")]
    NotInBigCell(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
