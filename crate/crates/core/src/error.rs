//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failures reported by the numerical routines.
///
/// Every variant carries enough context to locate the offending input; no
/// routine silently returns a non-finite value in place of an error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of a function (branch cut, strip, size limits, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The meromorphic extension of the hyperbolic gamma function hit a pole.
    #[error("pole of the extended hyperbolic gamma function near z = {re} + {im}i")]
    Pole {
        /// Real part of the offending argument.
        re: f64,
        /// Imaginary part of the offending argument.
        im: f64,
    },

    /// A leg function or equation has a vanishing denominator.
    #[error("singular leg function: {0}")]
    Singular(String),

    /// A constrained variable violates its sum/product constraint.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// A polynomial or equation is degenerate (vanishing leading coefficient, repeated roots).
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// An iterative search failed to find any solution.
    #[error("search failed after {starts} starts; best residual {best_residual:e}")]
    SearchFailure {
        /// Number of multistart initialisations tried.
        starts: usize,
        /// Smallest residual reached over all starts.
        best_residual: f64,
    },

    /// A quadrature did not reach the requested accuracy.
    #[error("quadrature accuracy not reached: estimate {estimate_re} + {estimate_im}i, error {error:e}")]
    Accuracy {
        /// Real part of the best available estimate.
        estimate_re: f64,
        /// Imaginary part of the best available estimate.
        estimate_im: f64,
        /// Estimated absolute error of that estimate.
        error: f64,
    },

    /// A lattice evolution stopped at a site; the lattice keeps the sites solved so far.
    #[error("lattice evolution failed at site ({x}, {y}): {source}")]
    AtSite {
        /// Column of the failing site.
        x: usize,
        /// Row of the failing site.
        y: usize,
        /// The underlying failure.
        source: Box<Error>,
    },

    /// Invalid configuration or input file.
    #[error("configuration error: {0}")]
    Config(String),
}
