//! Consistency around a face-centred cube (CAFCC).
//!
//! A face-centred cube carries fourteen variables: the corners `a, b, c, d,
//! a′, b′, c′, d′` and the face centres `e, f, g, e′, f′, g′`. Each variable is
//! the centre of one 5-point equation `A_a(centre; i, j, k, l; P, Q) = 1`
//! whose corners are four of its neighbours and whose rapidity pairs are
//! built from a triple `(α, β, γ)`. The six face-centre equations
//! use whole pairs, the eight corner equations use mixed pairs such as
//! `((β₁, γ₂), (α₂, γ₁))`.
//!
//! Fixing `a, b, c, e, f, g`, eight of the equations determine the remaining
//! eight variables one at a time. The system is consistent when the other
//! six equations then hold automatically. [`consistency_experiment`] draws a
//! random cell, performs the eight solves (backtracking over solution
//! classes when a solve has several) and audits every equation.
//!
//! ```
//! use multistar::cafcc::{consistency_experiment, CafccConfig};
//! use multistar::multispin::Picture;
//!
//! let report = consistency_experiment(3, Picture::Hyperbolic, 11, &CafccConfig::default()).unwrap();
//! assert!(report.success);
//! assert_eq!(report.all_residuals.len(), 14);
//! assert!(report.all_residuals.iter().all(|r| r.residual < 1e-6));
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{random_var, site_seed};
use crate::legs::Color;
use crate::multispin::{Picture, RapidityPair, Var};
use crate::solver::{residual, solve_for_corner, Slot, SolveConfig, Stencil5};

/// The fourteen variables of a face-centred cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Corner `a`.
    #[serde(rename = "a")]
    A,
    /// Corner `b`.
    #[serde(rename = "b")]
    B,
    /// Corner `c`.
    #[serde(rename = "c")]
    C,
    /// Corner `d`.
    #[serde(rename = "d")]
    D,
    /// Corner `a′`.
    #[serde(rename = "a'")]
    APrime,
    /// Corner `b′`.
    #[serde(rename = "b'")]
    BPrime,
    /// Corner `c′`.
    #[serde(rename = "c'")]
    CPrime,
    /// Corner `d′`.
    #[serde(rename = "d'")]
    DPrime,
    /// Face centre `e`.
    #[serde(rename = "e")]
    E,
    /// Face centre `f`.
    #[serde(rename = "f")]
    F,
    /// Face centre `g`.
    #[serde(rename = "g")]
    G,
    /// Face centre `e′`.
    #[serde(rename = "e'")]
    EPrime,
    /// Face centre `f′`.
    #[serde(rename = "f'")]
    FPrime,
    /// Face centre `g′`.
    #[serde(rename = "g'")]
    GPrime,
}

impl Label {
    /// Every label, corners first.
    pub const ALL: [Label; 14] = [
        Label::A,
        Label::B,
        Label::C,
        Label::D,
        Label::APrime,
        Label::BPrime,
        Label::CPrime,
        Label::DPrime,
        Label::E,
        Label::F,
        Label::G,
        Label::EPrime,
        Label::FPrime,
        Label::GPrime,
    ];

    /// The six variables fixed by the initial data of the experiment.
    pub const INITIAL: [Label; 6] = [Label::A, Label::B, Label::C, Label::E, Label::F, Label::G];

    /// Position in [`Label::ALL`].
    pub fn index(self) -> usize {
        Label::ALL.iter().position(|&l| l == self).expect("ALL lists every label")
    }

    /// Printable name (`a`, `a'`, ...).
    pub fn name(self) -> &'static str {
        match self {
            Label::A => "a",
            Label::B => "b",
            Label::C => "c",
            Label::D => "d",
            Label::APrime => "a'",
            Label::BPrime => "b'",
            Label::CPrime => "c'",
            Label::DPrime => "d'",
            Label::E => "e",
            Label::F => "f",
            Label::G => "g",
            Label::EPrime => "e'",
            Label::FPrime => "f'",
            Label::GPrime => "g'",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace('′', "'");
        Label::ALL
            .iter()
            .copied()
            .find(|l| l.name() == t)
            .ok_or_else(|| Error::Domain(format!("unknown cell label {s:?} (expected a, b, c, d, e, f, g, optionally primed)")))
    }
}

/// One equation of the cell: `A_a(centre; i, j, k, l; p, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellEquation {
    /// Centre variable; it also names the equation.
    pub center: Label,
    /// Corners in equation order `i, j, k, l`.
    pub corners: [Label; 4],
    /// First rapidity pair.
    pub p: RapidityPair,
    /// Second rapidity pair.
    pub q: RapidityPair,
}

impl CellEquation {
    /// The five variables the equation involves.
    pub fn variables(&self) -> [Label; 5] {
        [self.center, self.corners[0], self.corners[1], self.corners[2], self.corners[3]]
    }
}

fn pair(first: Complex64, second: Complex64) -> RapidityPair {
    RapidityPair { first, second }
}

/// The fourteen equations of a cell with rapidities `(α, β, γ)`, in the
/// order of [`Label::ALL`] of their centres.
pub fn equations(alpha: &RapidityPair, beta: &RapidityPair, gamma: &RapidityPair) -> [CellEquation; 14] {
    use Label::*;
    let (a1, a2) = (alpha.first, alpha.second);
    let (b1, b2) = (beta.first, beta.second);
    let (g1, g2) = (gamma.first, gamma.second);
    let eq = |center, corners, p, q| CellEquation { center, corners, p, q };
    [
        eq(A, [G, APrime, E, F], pair(b1, g2), pair(a2, g1)),
        eq(B, [GPrime, BPrime, E, F], pair(b2, g2), pair(a2, g1)),
        eq(C, [G, CPrime, E, FPrime], pair(b1, g2), pair(a1, g1)),
        eq(D, [GPrime, DPrime, E, FPrime], pair(b2, g2), pair(a1, g1)),
        eq(APrime, [G, A, EPrime, F], pair(b1, g1), pair(a2, g2)),
        eq(BPrime, [GPrime, B, EPrime, F], pair(b2, g1), pair(a2, g2)),
        eq(CPrime, [G, C, EPrime, FPrime], pair(b1, g1), pair(a1, g2)),
        eq(DPrime, [GPrime, D, EPrime, FPrime], pair(b2, g1), pair(a1, g2)),
        eq(E, [A, B, C, D], *alpha, *beta),
        eq(F, [APrime, BPrime, A, B], *gamma, *beta),
        eq(G, [APrime, A, CPrime, C], *alpha, *gamma),
        eq(EPrime, [APrime, BPrime, CPrime, DPrime], *alpha, *beta),
        eq(FPrime, [CPrime, DPrime, C, D], *gamma, *beta),
        eq(GPrime, [BPrime, B, DPrime, D], *alpha, *gamma),
    ]
}

/// A face-centred cube: fourteen optional variables and the rapidity triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FccCell {
    /// Number of components of every variable.
    pub n: usize,
    /// Picture of every variable.
    pub picture: Picture,
    /// Rapidity pair `α`.
    pub alpha: RapidityPair,
    /// Rapidity pair `β`.
    pub beta: RapidityPair,
    /// Rapidity pair `γ`.
    pub gamma: RapidityPair,
    vars: Vec<Option<Var>>,
}

impl FccCell {
    /// An empty cell.
    pub fn new(n: usize, picture: Picture, alpha: RapidityPair, beta: RapidityPair, gamma: RapidityPair) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("a cell needs n ≥ 2 components, got {n}")));
        }
        Ok(Self { n, picture, alpha, beta, gamma, vars: vec![None; 14] })
    }

    /// A random cell with `a, b, c, e, f, g` filled: real-positive
    /// components drawn log-uniformly from `[e⁻¹, e]` (hyperbolic) or real
    /// components uniform in `[−1, 1]` (rational). The six rapidity angles
    /// are uniform in `(0.1, 1.0)` and pairwise at least 0.05 apart; they
    /// enter as `e^{iθ}` in the hyperbolic picture and as `θ` in the
    /// rational one.
    pub fn random(n: usize, picture: Picture, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("a cell needs n ≥ 2 components, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = loop {
            let t: Vec<f64> = (0..6).map(|_| rng.gen_range(0.1..1.0)).collect();
            let generic = (0..6).all(|i| (i + 1..6).all(|j| (t[i] - t[j]).abs() >= 0.05));
            if generic {
                break t;
            }
        };
        let mk = |p: f64, q: f64| match picture {
            Picture::Hyperbolic => RapidityPair::from_angles(p, q),
            Picture::Rational => RapidityPair::real(p, q),
        };
        let mut cell = Self::new(n, picture, mk(theta[0], theta[1]), mk(theta[2], theta[3]), mk(theta[4], theta[5]))?;
        for label in Label::INITIAL {
            let v = random_var(&mut rng, n, picture);
            cell.vars[label.index()] = Some(v);
        }
        Ok(cell)
    }

    /// The variable at `label`, if set.
    pub fn get(&self, label: Label) -> Option<&Var> {
        self.vars[label.index()].as_ref()
    }

    /// Set the variable at `label`; it must match the cell's `n` and picture.
    pub fn set(&mut self, label: Label, v: Var) -> Result<()> {
        if v.n() != self.n || v.picture() != self.picture {
            return Err(Error::Domain(format!(
                "variable for {label} has n = {} ({:?}); the cell has n = {} ({:?})",
                v.n(),
                v.picture(),
                self.n,
                self.picture
            )));
        }
        self.vars[label.index()] = Some(v);
        Ok(())
    }

    /// Remove the variable at `label`.
    pub fn clear(&mut self, label: Label) {
        self.vars[label.index()] = None;
    }

    /// Whether all fourteen variables are set.
    pub fn is_complete(&self) -> bool {
        self.vars.iter().all(Option::is_some)
    }

    /// The fourteen equations of this cell.
    pub fn equations(&self) -> [CellEquation; 14] {
        equations(&self.alpha, &self.beta, &self.gamma)
    }

    /// The equation centred at `label`.
    pub fn equation(&self, label: Label) -> CellEquation {
        self.equations()[label.index()]
    }

    /// The equation as a black-ordered stencil; missing corners stay `None`.
    fn stencil(&self, eq: &CellEquation) -> Result<Stencil5> {
        let center = self.get(eq.center).cloned().ok_or_else(|| Error::Domain(format!("equation {}: centre is not set", eq.center)))?;
        let corners = eq.corners.map(|l| self.get(l).cloned());
        Stencil5::new(center, corners, Color::Black, eq.p, eq.q)
    }

    fn equation_residual(&self, eq: &CellEquation) -> Result<Vec<Complex64>> {
        let label = eq.center;
        let tag = |e: Error| match e {
            Error::Singular(m) => Error::Singular(format!("{m} (equation {label})")),
            Error::Domain(m) => Error::Domain(format!("{m} (equation {label})")),
            other => other,
        };
        residual(&self.stencil(eq).map_err(tag)?).map_err(tag)
    }
}

/// Residual vector `A_a − 1` (a = 1..n−1) of one equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    /// Centre of the equation.
    pub center: Label,
    /// `A_a − 1` for each free component.
    pub values: Vec<Complex64>,
}

impl EquationResidual {
    /// `max_a |A_a − 1|`.
    pub fn max(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Evaluate all fourteen equations of a complete cell.
///
/// ```
/// use multistar::cafcc::{cell_equations, FccCell};
/// use multistar::multispin::Picture;
///
/// // Only six variables are set.
/// let cell = FccCell::random(2, Picture::Hyperbolic, 0).unwrap();
/// assert!(cell_equations(&cell).is_err());
/// ```
pub fn cell_equations(cell: &FccCell) -> Result<Vec<EquationResidual>> {
    if let Some(missing) = Label::ALL.iter().find(|&&l| cell.get(l).is_none()) {
        return Err(Error::Domain(format!("cell variable {missing} is not set")));
    }
    cell.equations().iter().map(|eq| Ok(EquationResidual { center: eq.center, values: cell.equation_residual(eq)? })).collect()
}

/// One solve of the experiment: `unknown` from the equation centred at `equation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStep {
    /// Variable determined by this step.
    pub unknown: Label,
    /// Centre of the equation used.
    pub equation: Label,
}

fn steps(list: [(Label, Label); 8]) -> Vec<SolveStep> {
    list.iter().map(|&(unknown, equation)| SolveStep { unknown, equation }).collect()
}

/// The solve order used by default:
/// `d ← e, a′ ← a, c′ ← g, b′ ← f, e′ ← a′, g′ ← b, f′ ← c, d′ ← e′`,
/// leaving the equations centred at `b′, c′, d, d′, f′, g′` as checks.
pub fn canonical_order() -> Vec<SolveStep> {
    use Label::*;
    steps([(D, E), (APrime, A), (CPrime, G), (BPrime, F), (EPrime, APrime), (GPrime, B), (FPrime, C), (DPrime, EPrime)])
}

/// Two further dependency-respecting orders, for order-independence tests.
pub fn alternative_orders() -> [Vec<SolveStep>; 2] {
    use Label::*;
    [
        steps([(APrime, A), (CPrime, G), (BPrime, F), (FPrime, C), (GPrime, B), (EPrime, APrime), (D, E), (DPrime, D)]),
        steps([(APrime, A), (BPrime, F), (CPrime, G), (EPrime, APrime), (GPrime, B), (DPrime, EPrime), (FPrime, C), (D, E)]),
    ]
}

/// Validate a solve order and return the centres of the six check equations.
///
/// Each step's equation must involve its unknown, and every other variable
/// of the equation must be initial data or solved by an earlier step. The
/// eight unknowns must be exactly the eight non-initial variables.
pub fn check_order(order: &[SolveStep]) -> Result<Vec<Label>> {
    let table = equations(&RapidityPair::from_angles(0.1, 0.2), &RapidityPair::from_angles(0.3, 0.4), &RapidityPair::from_angles(0.5, 0.6));
    let mut known: Vec<Label> = Label::INITIAL.to_vec();
    let mut used = Vec::new();
    for (k, st) in order.iter().enumerate() {
        if known.contains(&st.unknown) {
            return Err(Error::Domain(format!("step {k}: {} is already known", st.unknown)));
        }
        let eq = table[st.equation.index()];
        if !eq.variables().contains(&st.unknown) {
            return Err(Error::Domain(format!("step {k}: equation {} does not involve {}", st.equation, st.unknown)));
        }
        if let Some(missing) = eq.variables().iter().find(|&&l| l != st.unknown && !known.contains(&l)) {
            return Err(Error::Domain(format!("step {k}: equation {} needs {missing} before solving {}", st.equation, st.unknown)));
        }
        if used.contains(&st.equation) {
            return Err(Error::Domain(format!("step {k}: equation {} is used twice", st.equation)));
        }
        known.push(st.unknown);
        used.push(st.equation);
    }
    if known.len() != 14 {
        return Err(Error::Domain(format!("order determines {} of the 8 unknown variables", known.len() - 6)));
    }
    Ok(Label::ALL.iter().copied().filter(|l| !used.contains(l)).collect())
}

/// Settings of the consistency experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CafccConfig {
    /// Settings of each 5-point solve.
    pub solve: SolveConfig,
    /// A partial branch whose already-evaluable checks exceed this is abandoned.
    pub prune: f64,
    /// A cell succeeds when all six checks are below this.
    pub success: f64,
    /// Upper bound on the number of complete branches visited.
    pub max_leaves: usize,
}

impl Default for CafccConfig {
    fn default() -> Self {
        Self { solve: SolveConfig::default(), prune: 1e-3, success: 1e-6, max_leaves: 6561 }
    }
}

impl CafccConfig {
    /// Reject non-positive thresholds and an invalid solver configuration.
    pub fn validate(&self) -> Result<()> {
        self.solve.validate()?;
        if !(self.prune > 0.0 && self.success > 0.0 && self.success <= self.prune) {
            return Err(Error::Config(format!(
                "need 0 < success ≤ prune, got success = {:e}, prune = {:e}",
                self.success, self.prune
            )));
        }
        if self.max_leaves == 0 {
            return Err(Error::Config("max_leaves must be at least 1".into()));
        }
        Ok(())
    }
}

/// Record of one solve on the accepted branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Variable determined.
    pub unknown: Label,
    /// Centre of the equation used.
    pub equation: Label,
    /// Index of the chosen solution class.
    pub class: usize,
    /// Number of classes the solve produced.
    pub classes: usize,
}

/// Largest residual of one equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledResidual {
    /// Centre of the equation.
    pub center: Label,
    /// `max_a |A_a − 1|`.
    pub residual: f64,
}

/// Outcome of one consistency experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CafccReport {
    /// Number of components.
    pub n: usize,
    /// Picture of the variables.
    pub picture: Picture,
    /// Seed of the random cell.
    pub seed: u64,
    /// The solves of the reported branch, in order.
    pub steps: Vec<StepRecord>,
    /// The six check equations of the reported branch.
    pub checks: Vec<LabeledResidual>,
    /// All fourteen equations when the reported branch is complete, else empty.
    pub all_residuals: Vec<LabeledResidual>,
    /// Whether every check is below the success threshold.
    pub success: bool,
    /// Branches abandoned (failed solves or pruned prefixes) during the search.
    pub backtracks: usize,
    /// Why the search failed, if it did.
    pub failure: Option<String>,
}

impl CafccReport {
    /// Largest check residual (infinite when no branch completed).
    pub fn max_check(&self) -> f64 {
        if self.checks.is_empty() {
            f64::INFINITY
        } else {
            self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
        }
    }
}

struct Search<'a> {
    order: &'a [SolveStep],
    checks: Vec<Label>,
    cfg: &'a CafccConfig,
    seed: u64,
    backtracks: usize,
    leaves: usize,
    path: Vec<StepRecord>,
    best: Option<(f64, Vec<StepRecord>, FccCell)>,
    solved: Option<(Vec<StepRecord>, FccCell)>,
    last_error: Option<String>,
}

impl Search<'_> {
    /// Largest residual over the checks whose variables are all known.
    fn partial_checks(&self, cell: &FccCell) -> f64 {
        let mut worst: f64 = 0.0;
        for &c in &self.checks {
            let eq = cell.equation(c);
            if eq.variables().iter().all(|&l| cell.get(l).is_some()) {
                let r = cell.equation_residual(&eq).map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max)).unwrap_or(f64::INFINITY);
                worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
            }
        }
        worst
    }

    fn run(&mut self, cell: &mut FccCell, depth: usize) {
        if self.solved.is_some() || self.leaves >= self.cfg.max_leaves {
            return;
        }
        if depth == self.order.len() {
            self.leaves += 1;
            let worst = self.partial_checks(cell);
            if worst < self.cfg.success {
                self.solved = Some((self.path.clone(), cell.clone()));
            } else {
                self.backtracks += 1;
                if self.best.as_ref().map_or(true, |(b, _, _)| worst < *b) {
                    self.best = Some((worst, self.path.clone(), cell.clone()));
                }
            }
            return;
        }
        let step = self.order[depth];
        let eq = cell.equation(step.equation);
        let slot = if eq.center == step.unknown {
            None
        } else {
            Some(Slot::ALL[eq.corners.iter().position(|&l| l == step.unknown).expect("validated order")])
        };
        let Some(slot) = slot else {
            // Orders never solve for an equation's own centre.
            self.last_error = Some(format!("step {depth}: unknown {} is the centre of its equation", step.unknown));
            return;
        };
        let mut solve_cfg = self.cfg.solve.clone();
        solve_cfg.seed = site_seed(self.seed, depth, step.unknown.index());
        let report = cell.stencil(&eq).and_then(|st| solve_for_corner(&st, slot, &solve_cfg));
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                self.backtracks += 1;
                self.last_error = Some(format!("solving {} from equation {}: {e}", step.unknown, step.equation));
                return;
            }
        };
        let classes = report.solutions.len();
        for (class, sol) in report.solutions.into_iter().enumerate() {
            cell.vars[step.unknown.index()] = Some(sol);
            if self.partial_checks(cell) > self.cfg.prune {
                self.backtracks += 1;
                continue;
            }
            self.path.push(StepRecord { unknown: step.unknown, equation: step.equation, class, classes });
            self.run(cell, depth + 1);
            self.path.pop();
            if self.solved.is_some() {
                return;
            }
        }
        cell.clear(step.unknown);
    }
}

fn labeled(cell: &FccCell, labels: &[Label]) -> Vec<LabeledResidual> {
    labels
        .iter()
        .map(|&l| LabeledResidual {
            center: l,
            residual: cell
                .equation_residual(&cell.equation(l))
                .map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max))
                .unwrap_or(f64::INFINITY),
        })
        .collect()
}

/// Run the experiment on a given cell (its six initial variables must be
/// set) with a given solve order, searching depth-first over solution classes.
pub fn run_cell(cell: &FccCell, order: &[SolveStep], seed: u64, cfg: &CafccConfig) -> Result<(CafccReport, FccCell)> {
    cfg.validate()?;
    let checks = check_order(order)?;
    if let Some(missing) = Label::INITIAL.iter().find(|&&l| cell.get(l).is_none()) {
        return Err(Error::Domain(format!("initial variable {missing} is not set")));
    }
    let mut work = cell.clone();
    for st in order {
        work.clear(st.unknown);
    }
    let mut search = Search {
        order,
        checks: checks.clone(),
        cfg,
        seed,
        backtracks: 0,
        leaves: 0,
        path: Vec::new(),
        best: None,
        solved: None,
        last_error: None,
    };
    search.run(&mut work, 0);
    let (success, steps, out, failure) = match (search.solved.take(), search.best.take()) {
        (Some((steps, c)), _) => (true, steps, c, None),
        (None, Some((worst, steps, c))) => (false, steps, c, Some(format!("no branch reached the check threshold; best check residual {worst:e}"))),
        (None, None) => (false, Vec::new(), work, Some(search.last_error.unwrap_or_else(|| "every branch was pruned".into()))),
    };
    let complete = out.is_complete();
    let report = CafccReport {
        n: cell.n,
        picture: cell.picture,
        seed,
        steps,
        checks: if complete { labeled(&out, &checks) } else { Vec::new() },
        all_residuals: if complete { labeled(&out, &Label::ALL) } else { Vec::new() },
        success,
        backtracks: search.backtracks,
        failure,
    };
    Ok((report, out))
}

/// Draw a random cell from `seed` and run the experiment in the canonical order.
pub fn consistency_experiment(n: usize, picture: Picture, seed: u64, cfg: &CafccConfig) -> Result<CafccReport> {
    let cell = FccCell::random(n, picture, seed)?;
    Ok(run_cell(&cell, &canonical_order(), seed, cfg)?.0)
}

/// Aggregate of a batch of experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    /// Number of components.
    pub n: usize,
    /// Picture of the variables.
    pub picture: Picture,
    /// Number of trials.
    pub trials: usize,
    /// Seed of the first trial; trial `t` uses `seed + t`.
    pub seed: u64,
    /// Successful trials.
    pub successes: usize,
    /// `successes / trials`.
    pub success_rate: f64,
    /// Largest check residual among successful trials.
    pub max_check_residual: f64,
    /// Median over all trials of the largest check residual.
    pub median_check_residual: f64,
    /// Total backtracks.
    pub backtracks: usize,
    /// Seeds of the failed trials.
    pub failed_seeds: Vec<u64>,
}

/// Run `trials` independent experiments (in parallel) with seeds
/// `seed, seed + 1, ...` and aggregate them. The result does not depend on
/// the number of threads.
pub fn cafcc_batch(n: usize, picture: Picture, trials: usize, seed: u64, cfg: &CafccConfig) -> Result<(BatchSummary, Vec<CafccReport>)> {
    if trials == 0 {
        return Err(Error::Config("a batch needs at least one trial".into()));
    }
    cfg.validate()?;
    let reports: Vec<CafccReport> = (0..trials as u64)
        .into_par_iter()
        .map(|t| consistency_experiment(n, picture, seed.wrapping_add(t), cfg))
        .collect::<Result<_>>()?;
    let successes = reports.iter().filter(|r| r.success).count();
    let mut maxima: Vec<f64> = reports.iter().map(CafccReport::max_check).collect();
    maxima.sort_by(f64::total_cmp);
    let median = if maxima.len() % 2 == 1 {
        maxima[maxima.len() / 2]
    } else {
        0.5 * (maxima[maxima.len() / 2 - 1] + maxima[maxima.len() / 2])
    };
    let summary = BatchSummary {
        n,
        picture,
        trials,
        seed,
        successes,
        success_rate: successes as f64 / trials as f64,
        max_check_residual: reports.iter().filter(|r| r.success).map(CafccReport::max_check).fold(0.0, f64::max),
        median_check_residual: median,
        backtracks: reports.iter().map(|r| r.backtracks).sum(),
        failed_seeds: reports.iter().filter(|r| !r.success).map(|r| r.seed).collect(),
    };
    Ok((summary, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::match_up_to_permutation;

    #[test]
    fn labels_round_trip() {
        for l in Label::ALL {
            assert_eq!(l.name().parse::<Label>().unwrap(), l);
            assert_eq!(Label::ALL[l.index()], l);
            let json = serde_json::to_string(&l).unwrap();
            assert_eq!(json, format!("\"{}\"", l.name()));
        }
        assert_eq!("d′".parse::<Label>().unwrap(), Label::DPrime);
        assert!("h".parse::<Label>().is_err());
    }

    #[test]
    fn equation_table_is_indexed_by_centre() {
        let cell = FccCell::random(2, Picture::Hyperbolic, 0).unwrap();
        for (k, eq) in cell.equations().iter().enumerate() {
            assert_eq!(eq.center, Label::ALL[k]);
            let mut vars = eq.variables().to_vec();
            vars.sort();
            vars.dedup();
            assert_eq!(vars.len(), 5, "equation {} repeats a variable", eq.center);
        }
        // The repaired g′ equation.
        let g = cell.equation(Label::GPrime);
        assert_eq!(g.corners, [Label::BPrime, Label::B, Label::DPrime, Label::D]);
        assert_eq!((g.p, g.q), (cell.alpha, cell.gamma));
    }

    #[test]
    fn orders_are_valid_and_checks_are_the_unused_equations() {
        use Label::*;
        assert_eq!(check_order(&canonical_order()).unwrap(), vec![D, BPrime, CPrime, DPrime, FPrime, GPrime]);
        for order in alternative_orders() {
            assert_eq!(check_order(&order).unwrap().len(), 6);
        }
        // Solving b′ from the f-centred equation needs a′ first.
        let bad = steps([(BPrime, F), (APrime, A), (CPrime, G), (D, E), (EPrime, APrime), (GPrime, B), (FPrime, C), (DPrime, EPrime)]);
        let err = check_order(&bad).unwrap_err().to_string();
        assert!(err.contains("needs a'"), "{err}");
        assert!(check_order(&canonical_order()[..7]).is_err());
    }

    #[test]
    fn experiment_succeeds_and_every_equation_holds() {
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            for n in [2, 3, 4] {
                let r = consistency_experiment(n, picture, 3, &CafccConfig::default()).unwrap();
                assert!(r.success, "{picture:?} n = {n}: {r:?}");
                assert_eq!(r.steps.len(), 8);
                assert!(r.all_residuals.iter().all(|x| x.residual < 1e-6), "{picture:?} n = {n}: {:?}", r.all_residuals);
            }
        }
    }

    #[test]
    fn solved_cell_audit_and_permutation_invariance() {
        let cell = FccCell::random(3, Picture::Hyperbolic, 5).unwrap();
        let (rep, solved) = run_cell(&cell, &canonical_order(), 5, &CafccConfig::default()).unwrap();
        assert!(rep.success);
        let res = cell_equations(&solved).unwrap();
        assert_eq!(res.len(), 14);
        assert!(res.iter().all(|r| r.max() < 1e-8), "{res:?}");
        for l in Label::ALL {
            let mut p = solved.clone();
            p.set(l, solved.get(l).unwrap().permuted(&[2, 0, 1])).unwrap();
            let q = cell_equations(&p).unwrap();
            for (a, b) in res.iter().zip(&q) {
                assert!((a.max() - b.max()).abs() < 1e-12, "permuting {l} changed equation {}", a.center);
            }
        }
    }

    #[test]
    fn random_cell_is_not_consistent() {
        let mut cell = FccCell::random(2, Picture::Hyperbolic, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l in Label::ALL {
            if cell.get(l).is_none() {
                cell.set(l, random_var(&mut rng, 2, Picture::Hyperbolic)).unwrap();
            }
        }
        let worst = cell_equations(&cell).unwrap().iter().map(EquationResidual::max).fold(0.0, f64::max);
        assert!(worst > 1e-2, "{worst}");
    }

    #[test]
    fn order_independence() {
        for n in [2, 3] {
            for seed in 0..5 {
                let cell = FccCell::random(n, Picture::Hyperbolic, seed).unwrap();
                let (base, a) = run_cell(&cell, &canonical_order(), seed, &CafccConfig::default()).unwrap();
                assert!(base.success);
                for order in alternative_orders() {
                    let (r, b) = run_cell(&cell, &order, seed, &CafccConfig::default()).unwrap();
                    assert!(r.success, "n = {n}, seed {seed}");
                    // Unique solutions: both orders reach the same cell up to permutations.
                    for l in Label::ALL {
                        assert!(match_up_to_permutation(a.get(l).unwrap(), b.get(l).unwrap(), 1e-7), "n = {n}, seed {seed}, {l}");
                    }
                }
            }
        }
    }

    #[test]
    fn batch_is_deterministic_and_counts() {
        let cfg = CafccConfig::default();
        let (s1, r1) = cafcc_batch(2, Picture::Hyperbolic, 6, 40, &cfg).unwrap();
        let (s2, _) = cafcc_batch(2, Picture::Hyperbolic, 6, 40, &cfg).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(r1.len(), 6);
        assert_eq!(r1[3].seed, 43);
        assert_eq!(s1.successes, r1.iter().filter(|r| r.success).count());
        let json = serde_json::to_string(&r1[0]).unwrap();
        let back: CafccReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r1[0]);
    }

    #[test]
    fn errors() {
        assert!(FccCell::random(1, Picture::Hyperbolic, 0).is_err());
        assert!(cafcc_batch(2, Picture::Hyperbolic, 0, 0, &CafccConfig::default()).is_err());
        let bad = CafccConfig { success: 1e-2, prune: 1e-3, ..CafccConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let mut cell = FccCell::random(2, Picture::Hyperbolic, 0).unwrap();
        assert!(cell.set(Label::D, Var::from_free(Picture::Hyperbolic, &[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)])).is_err());
        cell.clear(Label::A);
        assert!(run_cell(&cell, &canonical_order(), 0, &CafccConfig::default()).is_err());
    }

    #[test]
    fn failures_are_reported_not_hidden() {
        // An impossible success threshold: the search exhausts its branches.
        let cfg = CafccConfig { success: 1e-300, ..CafccConfig::default() };
        let r = consistency_experiment(2, Picture::Hyperbolic, 1, &cfg).unwrap();
        assert!(!r.success);
        assert!(r.failure.as_deref().unwrap().contains("best check residual"));
        assert_eq!(r.checks.len(), 6);
    }
}
