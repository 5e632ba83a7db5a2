//! Numerical toolkit for multicomponent 5-point difference equations and the
//! hyperbolic star-star relation they come from.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`special_fn`] | complex dilogarithm, hyperbolic gamma function `Γ_h(z; b)` |
//! | [`multispin`] | constrained multicomponent variables, pictures, rapidities |
//! | [`legs`] | Lagrangians, leg functions, the four-leg ratio `A_a`, the rational limit |
//! | [`cubic3`] | closed-form solution of the three-component equations |
//! | [`solver`] | solving one stencil for an unknown corner |
//! | [`lattice`] | checkerboard evolution, residual maps, classical action |
//! | [`cafcc`] | consistency around a face-centred cube |
//! | [`quadrature`] | Boltzmann weights and the star-star relation by quadrature |
//! | [`quad`] | adaptive Gauss–Kronrod integration used throughout |
//! | [`tolerances`] | the numerical thresholds, with their rationale |
//!
//! Every fallible operation returns [`Result`] with an [`Error`] that says
//! whether the input was malformed, outside the domain of a function,
//! singular, or numerically unresolved.
//!
//! ```
//! use multistar::legs::Color;
//! use multistar::multispin::Picture;
//! use multistar::solver::{max_residual, random_stencil, solve_for_corner, Slot, SolveConfig};
//!
//! let stencil = random_stencil(Picture::Rational, 4, Color::Black, 12).unwrap();
//! let report = solve_for_corner(&stencil, Slot::I, &SolveConfig::default()).unwrap();
//! assert_eq!(report.branch_count, 1);
//! let solved = stencil.with_corner(Slot::I, report.solutions[0].clone());
//! assert!(max_residual(&solved).unwrap() < 1e-8);
//! ```
//!
//! A guide with worked examples lives in the `book/` directory of the
//! repository; its code blocks are compiled and run as doc-tests of this crate.

pub mod cafcc;
pub mod cubic3;
pub mod error;
pub mod lattice;
pub mod legs;
pub mod multispin;
pub mod quad;
pub mod quadrature;
pub mod solver;
pub mod special_fn;
pub mod tolerances;

pub use error::{Error, Result};

/// The guide's chapters, compiled so that their code blocks run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/variables.md")]
    mod variables {}
    #[doc = include_str!("../../../book/src/hyperbolic-gamma.md")]
    mod hyperbolic_gamma {}
    #[doc = include_str!("../../../book/src/five-point.md")]
    mod five_point {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/lattice.md")]
    mod lattice {}
    #[doc = include_str!("../../../book/src/consistency.md")]
    mod consistency {}
    #[doc = include_str!("../../../book/src/star-star.md")]
    mod star_star {}
    #[doc = include_str!("../../../book/src/accuracy.md")]
    mod accuracy {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
