//! Named numerical tolerances.
//!
//! Every threshold that decides pass/fail or switches an algorithm lives here
//! with a one-line rationale, so that no module carries ad-hoc magic numbers.

/// Constraint check for sum-to-zero / product-to-one variables (relative).
pub const CONSTRAINT: f64 = 1e-12;

/// Target absolute error of `log Γ_h` from the integral representation.
pub const HYP_GAMMA_LOG: f64 = 1e-10;

/// Analytic bound on the neglected tail of the `Γ_h` integral.
pub const HYP_GAMMA_TAIL: f64 = 1e-14;

/// A cosh factor smaller than this in a division marks a pole of the extended `Γ_h`.
pub const POLE: f64 = 1e-12;

/// Central finite-difference step used by all derivative identity checks.
pub const FD_STEP: f64 = 1e-5;

/// Default residual target of the 5-point solvers.
pub const SOLVE: f64 = 1e-10;

/// Relative coefficient threshold below which a cubic counts as degenerate.
pub const CUBIC_DEGENERATE: f64 = 1e-12;

/// Minimal relative root separation of the n = 3 cubic.
pub const ROOT_SEPARATION: f64 = 1e-9;

/// Relative tolerance used to identify two variables up to permutation.
pub const MATCH: f64 = 1e-7;

/// Partial check residual above which a consistency branch is pruned.
pub const CAFCC_PRUNE: f64 = 1e-3;

/// Check residual below which a consistency cell counts as consistent.
pub const CAFCC_SUCCESS: f64 = 1e-6;

/// Reflection identity of the edge weight `W`.
pub const REFLECTION: f64 = 1e-8;
