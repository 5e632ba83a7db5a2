//! Resolved run configurations.
//!
//! Each command has one configuration struct. It is built from defaults, then
//! an optional JSON file (`--config`), then explicit flags, and is validated
//! before any computation. The resolved struct is echoed in the output and
//! its canonical JSON is hashed into the metadata header.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use multistar::cafcc::CafccConfig;
use multistar::lattice::{BranchPolicy, IcKind};
use multistar::legs::Color;
use multistar::multispin::Picture;
use multistar::quadrature::{QuadratureConfig, WeightParams};
use multistar::solver::{Slot, SolveConfig};
use multistar::special_fn::HyperbolicParams;

use crate::Failure;

/// Read a JSON configuration file; unknown fields are rejected.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed configuration {}: {e}", path.display())))
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

/// Identity checks offered by `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GammaCheck {
    /// `Γ_h(z) Γ_h(−z) = 1`.
    Inversion,
    /// Both difference equations, where `z` and the shifted point lie in the strip.
    Shift,
}

/// `gamma`: one value of the hyperbolic gamma function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaRun {
    /// Argument `z` as `[re, im]`.
    pub z: Complex64,
    /// Modulus `b`.
    pub b: f64,
    /// Identity checks to run.
    pub checks: Vec<GammaCheck>,
    /// Pass threshold of the checks.
    pub tol: f64,
}

impl Default for GammaRun {
    fn default() -> Self {
        Self { z: Complex64::new(0.0, 0.0), b: 1.0, checks: Vec::new(), tol: 1e-8 }
    }
}

impl GammaRun {
    pub fn validate(&self) -> Result<HyperbolicParams, Failure> {
        if !(self.z.re.is_finite() && self.z.im.is_finite()) {
            return Err(Failure::Usage(format!("z must be finite, got {}", self.z)));
        }
        if !(self.tol > 0.0) {
            return Err(Failure::Usage("tol must be positive".into()));
        }
        HyperbolicParams::new(self.b).map_err(usage)
    }
}

/// `solve`: one seeded random stencil solved for one corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveRun {
    /// Number of components.
    pub n: usize,
    /// Picture of the variables.
    pub picture: Picture,
    /// Colour of the stencil.
    pub color: Color,
    /// Corner to solve for.
    pub corner: Slot,
    /// Seed of the random stencil (the multistart seed is `solver.seed`).
    pub seed: u64,
    /// Solver settings.
    pub solver: SolveConfig,
}

impl Default for SolveRun {
    fn default() -> Self {
        Self { n: 3, picture: Picture::Hyperbolic, color: Color::Black, corner: Slot::L, seed: 0, solver: SolveConfig::default() }
    }
}

impl SolveRun {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.n < 2 {
            return Err(Failure::Usage(format!("n must be at least 2, got {}", self.n)));
        }
        self.solver.validate().map_err(usage)
    }
}

/// `evolve`: a seeded lattice evolved from a staircase or corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveRun {
    /// Number of components.
    pub n: usize,
    /// Picture of the variables.
    pub picture: Picture,
    /// Lattice width and height.
    pub size: usize,
    /// Initial-condition shape.
    pub ic: IcKind,
    /// Branch selection policy.
    pub branch: BranchPolicy,
    /// Angles `u`; `None` selects the library default.
    pub u: Option<[f64; 2]>,
    /// Angles `v`; `None` selects the library default.
    pub v: Option<[f64; 2]>,
    /// Seed of the initial values.
    pub seed: u64,
    /// Solver settings.
    pub solver: SolveConfig,
}

impl Default for EvolveRun {
    fn default() -> Self {
        Self {
            n: 2,
            picture: Picture::Hyperbolic,
            size: 8,
            ic: IcKind::Corner,
            branch: BranchPolicy::Nearest,
            u: None,
            v: None,
            seed: 0,
            solver: SolveConfig::default(),
        }
    }
}

impl EvolveRun {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.n < 2 {
            return Err(Failure::Usage(format!("n must be at least 2, got {}", self.n)));
        }
        if !(3..=256).contains(&self.size) {
            return Err(Failure::Usage(format!("size must lie in 3..=256, got {}", self.size)));
        }
        self.solver.validate().map_err(usage)
    }
}

/// `cafcc`: a batch of consistency experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CafccRun {
    /// Number of components.
    pub n: usize,
    /// Picture of the variables.
    pub picture: Picture,
    /// Number of trials; trial `t` uses seed `seed + t`.
    pub trials: usize,
    /// Seed of the first trial.
    pub seed: u64,
    /// Experiment settings.
    pub experiment: CafccConfig,
    /// Exit with status 1 when the success rate is below this.
    pub min_rate: Option<f64>,
}

impl Default for CafccRun {
    fn default() -> Self {
        Self { n: 3, picture: Picture::Hyperbolic, trials: 20, seed: 0, experiment: CafccConfig::default(), min_rate: None }
    }
}

impl CafccRun {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.n < 2 || self.trials == 0 {
            return Err(Failure::Usage(format!("need n >= 2 and trials >= 1, got n = {}, trials = {}", self.n, self.trials)));
        }
        if let Some(r) = self.min_rate {
            if !(0.0..=1.0).contains(&r) {
                return Err(Failure::Usage(format!("min_rate must lie in [0, 1], got {r}")));
            }
        }
        self.experiment.validate().map_err(usage)
    }
}

/// `ssr`: both sides of the star-star relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsrRun {
    /// Number of components (2, or 3 with `expensive`).
    pub n: usize,
    /// Modulus `b`.
    pub b: f64,
    /// Rapidities `p`.
    pub p: [f64; 2],
    /// Rapidities `q`.
    pub q: [f64; 2],
    /// Free components of the boundary spins `ξ_i, ξ_j, ξ_k, ξ_l`; drawn
    /// uniformly from `[−1, 1]` with `seed` when absent.
    pub boundary: Option<[Vec<f64>; 4]>,
    /// Seed of the random boundary.
    pub seed: u64,
    /// Allow the slow two-dimensional quadrature (n = 3).
    pub expensive: bool,
    /// Quadrature settings; `None` selects the defaults for `n`.
    pub quadrature: Option<QuadratureConfig>,
    /// Exit with status 1 when the residual exceeds this; `None` selects
    /// 1e-6 (n = 2) or 1e-4 (n = 3).
    pub threshold: Option<f64>,
}

impl Default for SsrRun {
    fn default() -> Self {
        Self { n: 2, b: 1.0, p: [0.7, 0.5], q: [0.1, 0.0], boundary: None, seed: 0, expensive: false, quadrature: None, threshold: None }
    }
}

impl SsrRun {
    pub fn validate(&self) -> Result<WeightParams, Failure> {
        match (self.n, self.expensive) {
            (2, _) | (3, true) => {}
            (3, false) => return Err(Failure::Usage("n = 3 needs --expensive (two-dimensional quadrature, minutes)".into())),
            (n, _) => return Err(Failure::Usage(format!("the star-star check supports n = 2 and n = 3, got {n}"))),
        }
        if let Some(bd) = &self.boundary {
            if bd.iter().any(|s| s.len() != self.n - 1 || s.iter().any(|x| !x.is_finite())) {
                return Err(Failure::Usage(format!("each boundary spin needs {} finite free components", self.n - 1)));
            }
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return Err(Failure::Usage("threshold must be positive".into()));
            }
        }
        self.quadrature_config().validate().map_err(usage)?;
        let hp = HyperbolicParams::new(self.b).map_err(usage)?;
        WeightParams::new(hp, self.p, self.q).map_err(usage)
    }

    pub fn quadrature_config(&self) -> QuadratureConfig {
        self.quadrature.unwrap_or(if self.n == 3 { QuadratureConfig::expensive() } else { QuadratureConfig::default() })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(if self.n == 3 { 1e-4 } else { 1e-6 })
    }
}
