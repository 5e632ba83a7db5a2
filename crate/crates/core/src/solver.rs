//! Solving a single 5-point stencil for one unknown corner.
//!
//! A [`Stencil5`] is a centre, four corners `(i, j, k, l)` and a colour:
//!
//! ```text
//! black:  A_a(centre; i, j, k, l; α, β) = 1,   a = 1, …, n − 1
//! white:  A_a(centre; i, k, j, l; β, α) = 1
//! ```
//!
//! [`solve_for_corner`] moves the unknown to position `l` with the exact
//! symmetries of `A`:
//!
//! ```text
//! A(l, k, j, i; α̂, β̂) = A(i, j, k, l; α, β)
//! A(k, l, i, j; α̂, β) = A(j, i, l, k; α, β̂) = A(i, j, k, l; α, β)⁻¹
//! ```
//!
//! and then dispatches on `n`: a quadratic for n = 2, the cubic of
//! [`crate::cubic3`] for n = 3, and for n ≥ 4 a candidate built from the
//! linear structure of the equations in the elementary symmetric functions
//! of the unknown (see [`solve_for_corner`]). Damped multistart Newton
//! ([`solve_newton_general`]) is the fallback and the independent oracle.
//! Every candidate is polished by Newton and accepted only if its residual
//! `max_a |A_a − 1|` is at most the configured tolerance, or, for stencils
//! close to a pole of a leg, at the rounding floor set by the Jacobian
//! (capped at 10³ × tolerance). Solutions are
//! reported once per class, that is up to permutation of their components.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cubic3;
use crate::error::{Error, Result};
use crate::legs::{half_power, leg_ratio_cond, leg_ratio_raw, phi_raw, phi_rational_raw, Color};
use crate::multispin::{Picture, RapidityPair, Var};
use crate::tolerances;

/// Corner position within a stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    /// Corner `i`.
    I,
    /// Corner `j`.
    J,
    /// Corner `k`.
    K,
    /// Corner `l`.
    L,
}

impl Slot {
    /// All four slots in order.
    pub const ALL: [Slot; 4] = [Slot::I, Slot::J, Slot::K, Slot::L];

    /// Position in the `(i, j, k, l)` array.
    pub fn index(self) -> usize {
        match self {
            Slot::I => 0,
            Slot::J => 1,
            Slot::K => 2,
            Slot::L => 3,
        }
    }
}

impl std::str::FromStr for Slot {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Slot::I),
            "j" => Ok(Slot::J),
            "k" => Ok(Slot::K),
            "l" => Ok(Slot::L),
            other => Err(Error::Config(format!("unknown corner '{other}' (expected i, j, k or l)"))),
        }
    }
}

/// A centre, four corners and the rapidities of one 5-point equation.
///
/// A corner may be `None` when it is the unknown of [`solve_for_corner`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stencil5 {
    /// Centre variable.
    pub center: Var,
    /// Corners `(i, j, k, l)`.
    pub corners: [Option<Var>; 4],
    /// Colour of the centre; decides the equation.
    pub color: Color,
    /// First rapidity pair.
    pub alpha: RapidityPair,
    /// Second rapidity pair.
    pub beta: RapidityPair,
}

impl Stencil5 {
    /// Build a stencil, checking that every present variable shares `n` and picture.
    pub fn new(center: Var, corners: [Option<Var>; 4], color: Color, alpha: RapidityPair, beta: RapidityPair) -> Result<Self> {
        let st = Self { center, corners, color, alpha, beta };
        st.validate()?;
        Ok(st)
    }

    /// A stencil with all four corners known.
    pub fn complete(center: Var, corners: [Var; 4], color: Color, alpha: RapidityPair, beta: RapidityPair) -> Result<Self> {
        let [i, j, k, l] = corners;
        Self::new(center, [Some(i), Some(j), Some(k), Some(l)], color, alpha, beta)
    }

    /// Check the shared-shape invariant.
    pub fn validate(&self) -> Result<()> {
        let (n, pic) = (self.center.n(), self.center.picture());
        if n < 2 {
            return Err(Error::Domain("stencil variables need n >= 2".into()));
        }
        for c in self.corners.iter().flatten() {
            if c.n() != n || c.picture() != pic {
                return Err(Error::Domain("all stencil variables must share n and picture".into()));
            }
        }
        Ok(())
    }

    /// Number of components.
    pub fn n(&self) -> usize {
        self.center.n()
    }

    /// Picture of the stencil.
    pub fn picture(&self) -> Picture {
        self.center.picture()
    }

    /// Copy with corner `slot` replaced.
    pub fn with_corner(&self, slot: Slot, value: Var) -> Self {
        let mut st = self.clone();
        st.corners[slot.index()] = Some(value);
        st
    }
}

/// Newton and multistart settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Residual target `max_a |A_a − 1|`.
    pub tol: f64,
    /// Newton iterations per start.
    pub max_iter: usize,
    /// Number of multistart initial points.
    pub starts: usize,
    /// Seed of the multistart generator.
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { tol: tolerances::SOLVE, max_iter: 100, starts: 64, seed: 0 }
    }
}

impl SolveConfig {
    /// Check `tol > 0` and `starts >= 1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.starts == 0 || self.max_iter == 0 {
            return Err(Error::Config("solve config needs tol > 0, starts >= 1 and max_iter >= 1".into()));
        }
        Ok(())
    }
}

/// Solutions of one stencil, one representative per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// Canonically ordered solutions, sorted.
    pub solutions: Vec<Var>,
    /// `max_a |A_a − 1|` of each solution: at most the tolerance, or at most
    /// the rounding floor of an ill-conditioned stencil (and 10³ × tolerance).
    pub residuals: Vec<f64>,
    /// Number of distinct solution classes.
    pub branch_count: usize,
    /// Newton iterations spent.
    pub iterations: usize,
}

/// The equation in `A`-form with the unknown at position `l`.
struct EqForm<'a> {
    picture: Picture,
    center: &'a [Complex64],
    known: [&'a [Complex64]; 3],
    alpha: RapidityPair,
    beta: RapidityPair,
}

impl EqForm<'_> {
    fn values(&self, yl: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.center.len();
        let corners = [self.known[0], self.known[1], self.known[2], yl];
        (0..n - 1).map(|a| leg_ratio_raw(self.picture, a, self.center, corners, &self.alpha, &self.beta).map(|v| v - 1.0)).collect()
    }
}

fn colored_order(color: Color) -> ([usize; 4], bool) {
    match color {
        Color::Black => ([0, 1, 2, 3], false),
        Color::White => ([0, 2, 1, 3], true),
    }
}

/// Equation-ordered corners with the unknown (equation position `s`) moved to `l`.
fn move_to_l(s: usize) -> ([usize; 4], bool, bool) {
    // (permutation of equation positions, hat α, hat β)
    match s {
        3 => ([0, 1, 2, 3], false, false),
        0 => ([3, 2, 1, 0], true, true),
        1 => ([2, 3, 0, 1], true, false),
        _ => ([1, 0, 3, 2], false, true),
    }
}

fn eq_form(st: &Stencil5, which: Slot) -> Result<EqForm<'_>> {
    st.validate()?;
    let (order, swap) = colored_order(st.color);
    let (mut al, mut be) = if swap { (st.beta, st.alpha) } else { (st.alpha, st.beta) };
    let s = order.iter().position(|&g| g == which.index()).expect("order is a permutation");
    let (perm, ha, hb) = move_to_l(s);
    if ha {
        al = al.hat();
    }
    if hb {
        be = be.hat();
    }
    let geo = |p: usize| order[perm[p]];
    let mut known: [&[Complex64]; 3] = [&[], &[], &[]];
    for (p, slot) in known.iter_mut().enumerate() {
        let g = geo(p);
        *slot = st.corners[g]
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("corner {:?} must be known to solve for {:?}", Slot::ALL[g], which)))?
            .components();
    }
    Ok(EqForm { picture: st.picture(), center: st.center.components(), known, alpha: al, beta: be })
}

/// Values `A_a − 1`, `a = 1, …, n − 1`, of the colour-appropriate equation.
///
/// ```
/// use multistar::legs::Color;
/// use multistar::multispin::{Picture, RapidityPair, Var};
/// use multistar::solver::{residual, Stencil5};
/// use num_complex::Complex64;
///
/// let v = |x: f64| Var::from_free(Picture::Hyperbolic, &[Complex64::new(x, 0.0)]);
/// // β₁ = β₂, y_i = y_j and y_k = y_l: every A_a is exactly one.
/// let st = Stencil5::complete(v(1.3), [v(0.7), v(0.7), v(2.1), v(2.1)], Color::Black,
///     RapidityPair::from_angles(0.8, 0.3), RapidityPair::from_angles(0.1, 0.1)).unwrap();
/// assert!(residual(&st).unwrap().iter().all(|r| r.norm() < 1e-14));
/// ```
pub fn residual(st: &Stencil5) -> Result<Vec<Complex64>> {
    let eq = eq_form(st, Slot::L)?;
    let yl = st.corners[3].as_ref().ok_or_else(|| Error::Domain("residual needs all four corners".into()))?;
    eq.values(yl.components())
}

/// `max_a |A_a − 1|` of a complete stencil.
pub fn max_residual(st: &Stencil5) -> Result<f64> {
    Ok(residual(st)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// True iff `a` and `b` agree up to a permutation of their components, each
/// pair within `tol · max(1, |a_k|)`.
///
/// ```
/// use multistar::multispin::{Picture, Var};
/// use multistar::solver::match_up_to_permutation;
/// use num_complex::Complex64;
///
/// let a = Var::from_free(Picture::Rational, &[Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.0)]);
/// assert!(match_up_to_permutation(&a, &a.permuted(&[2, 0, 1]), 1e-12));
/// ```
pub fn match_up_to_permutation(a: &Var, b: &Var, tol: f64) -> bool {
    a.n() == b.n() && a.picture() == b.picture() && match_slices(a.components(), b.components(), tol)
}

fn match_slices(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    fn assign(k: usize, a: &[Complex64], b: &[Complex64], used: &mut [bool], tol: f64) -> bool {
        if k == a.len() {
            return true;
        }
        let scale = a[k].norm().max(1.0);
        for j in 0..b.len() {
            if !used[j] && (a[k] - b[j]).norm() <= tol * scale {
                used[j] = true;
                if assign(k + 1, a, b, used, tol) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    a.len() == b.len() && assign(0, a, b, &mut vec![false; b.len()], tol)
}

fn lex_cmp(a: &Var, b: &Var) -> std::cmp::Ordering {
    for (x, y) in a.components().iter().zip(b.components()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Accumulates accepted solutions, deduplicated up to permutation.
struct Classes {
    sols: Vec<(Var, f64)>,
}

impl Classes {
    fn new() -> Self {
        Self { sols: Vec::new() }
    }

    fn insert(&mut self, v: Var, res: f64) {
        let v = v.canonical();
        for s in self.sols.iter_mut() {
            if match_up_to_permutation(&s.0, &v, tolerances::MATCH) {
                if res < s.1 {
                    *s = (v, res);
                }
                return;
            }
        }
        self.sols.push((v, res));
    }

    fn into_report(mut self, iterations: usize) -> SolverReport {
        self.sols.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let branch_count = self.sols.len();
        let (solutions, residuals) = self.sols.into_iter().unzip();
        SolverReport { solutions, residuals, branch_count, iterations }
    }
}

/// Largest Newton step, in chart units.
const MAX_STEP: f64 = 1.0;
/// Chart points beyond this modulus are treated as divergent.
const MAX_CHART: f64 = 1e3;

/// Damped Newton on the chart of the unknown. Returns the final chart point,
/// its residual and the iterations used.
fn newton(eq: &EqForm<'_>, start: Vec<Complex64>, tol: f64, max_iter: usize) -> NewtonOutcome {
    let pic = eq.picture;
    let m = start.len();
    let eval = |z: &[Complex64]| -> Option<Vec<Complex64>> {
        let y = Var::from_chart(pic, z);
        let v = eq.values(y.components()).ok()?;
        v.iter().all(|c| c.re.is_finite() && c.im.is_finite()).then_some(v)
    };
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z = start;
    let Some(mut f) = eval(&z) else { return NewtonOutcome { z, residual: f64::INFINITY, iterations: 0, floor: 0.0 } };
    let mut fn0 = norm(&f);
    let mut it = 0;
    let mut floor = 0.0;
    // Two extra iterations after reaching the target sharpen the root.
    let mut extra = 0;
    while it < max_iter {
        if fn0 <= tol {
            if extra == 2 || fn0 < 1e-15 {
                break;
            }
            extra += 1;
        }
        it += 1;
        let mut jac = DMatrix::<Complex64>::zeros(m, m);
        for c in 0..m {
            let h = 1e-7 * z[c].norm().max(1.0);
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[c] += h;
            zm[c] -= h;
            let (Some(fp), Some(fm)) = (eval(&zp), eval(&zm)) else {
                return NewtonOutcome { z, residual: fn0, iterations: it, floor };
            };
            for r in 0..m {
                jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        floor = rounding_floor(&jac, &z).max(evaluation_noise(eq, &z));
        let rhs = DVector::from_iterator(m, f.iter().map(|c| -c));
        let Some(step) = jac.lu().solve(&rhs) else { return NewtonOutcome { z, residual: fn0, iterations: it, floor } };
        // Trust region: A_a tends to constants at infinity, so unbounded
        // steps can look like progress while running away.
        let len = step.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let mut lambda = if len > MAX_STEP { MAX_STEP / len } else { 1.0 };
        let mut improved = false;
        for _ in 0..=30 {
            let cand: Vec<Complex64> = z.iter().zip(step.iter()).map(|(a, d)| a + d * lambda).collect();
            if cand.iter().any(|c| c.norm() > MAX_CHART) {
                lambda *= 0.5;
                continue;
            }
            if let Some(fc) = eval(&cand) {
                let nc = norm(&fc);
                if nc < fn0 {
                    z = cand;
                    f = fc;
                    fn0 = nc;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    NewtonOutcome { z, residual: fn0, iterations: it, floor }
}

/// Result of one Newton run.
struct NewtonOutcome {
    z: Vec<Complex64>,
    residual: f64,
    iterations: usize,
    /// Rounding floor of the residual near `z`; see [`rounding_floor`].
    floor: f64,
}

impl NewtonOutcome {
    /// Converged: the residual meets `tol`, or Newton stalled at the rounding
    /// floor of an ill-conditioned stencil that is still within
    /// [`FLOOR_CAP`]` · tol`.
    fn accepted(&self, tol: f64) -> bool {
        self.residual <= tol || (self.residual <= self.floor && self.residual <= FLOOR_CAP * tol)
    }
}

/// How far above the requested tolerance a rounding-limited residual may be.
const FLOOR_CAP: f64 = 1e3;

/// Change of the residual caused by perturbing the chart point at the level
/// of a few ulps: `64 ε (1 + max_r Σ_c |J_rc| max(1, |z_c|))`. Near a pole of
/// a leg this exceeds any fixed tolerance, and no double-precision point can
/// do better.
fn rounding_floor(jac: &DMatrix<Complex64>, z: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..jac.nrows() {
        let row: f64 = (0..jac.ncols()).map(|c| jac[(r, c)].norm() * z[c].norm().max(1.0)).sum();
        worst = worst.max(row);
    }
    64.0 * f64::EPSILON * (1.0 + worst)
}

/// Rounding noise of evaluating the equations at `z`: a known corner whose
/// leg factor nearly cancels makes `A_a` noisy whatever the unknown is.
fn evaluation_noise(eq: &EqForm<'_>, z: &[Complex64]) -> f64 {
    let y = Var::from_chart(eq.picture, z);
    let corners = [eq.known[0], eq.known[1], eq.known[2], y.components()];
    (0..eq.center.len() - 1)
        .map(|a| {
            let val = leg_ratio_raw(eq.picture, a, eq.center, corners, &eq.alpha, &eq.beta).map(|v| v.norm()).unwrap_or(0.0);
            4.0 * f64::EPSILON * val * leg_ratio_cond(eq.picture, a, eq.center, corners, &eq.alpha, &eq.beta)
        })
        .fold(0.0, f64::max)
}

/// Initial chart points: the known corners, their mean, perturbations of
/// these, and uniform draws with real parts in (−2, 2) and arguments in (−π, π).
fn starts(eq: &EqForm<'_>, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let pic = eq.picture;
    let n = eq.center.len();
    let charts: Vec<Vec<Complex64>> =
        [eq.center, eq.known[0], eq.known[1], eq.known[2]].iter().map(|y| Var::new(pic, y.to_vec()).map(|v| v.chart()).unwrap_or_default()).collect();
    let mut anchors: Vec<Vec<Complex64>> = charts.iter().filter(|c| c.len() == n - 1).cloned().collect();
    if !anchors.is_empty() {
        let mean: Vec<Complex64> =
            (0..n - 1).map(|a| anchors.iter().map(|c| c[a]).sum::<Complex64>() / anchors.len() as f64).collect();
        anchors.insert(0, mean);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for s in 0..count {
        let p = if s < anchors.len() {
            anchors[s].clone()
        } else if s < 3 * anchors.len() {
            anchors[s % anchors.len()]
                .iter()
                .map(|z| z + Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)))
                .collect()
        } else {
            (0..n - 1).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-PI..PI))).collect()
        };
        out.push(p);
    }
    out
}

fn newton_classes(eq: &EqForm<'_>, cfg: &SolveConfig, classes: &mut Classes) -> (usize, f64) {
    let mut iterations = 0;
    let mut best = f64::INFINITY;
    for z0 in starts(eq, cfg.starts, cfg.seed) {
        let out = newton(eq, z0, cfg.tol, cfg.max_iter);
        iterations += out.iterations;
        best = best.min(out.residual);
        if out.accepted(cfg.tol) {
            classes.insert(Var::from_chart(eq.picture, &out.z), out.residual);
        }
    }
    (iterations, best)
}

/// Polish closed-form candidates and record those meeting the tolerance.
fn accept_candidates(eq: &EqForm<'_>, cands: Vec<Var>, cfg: &SolveConfig, classes: &mut Classes) -> usize {
    let mut iterations = 0;
    for c in cands {
        let out = newton(eq, c.chart(), cfg.tol, 8);
        iterations += out.iterations;
        if out.accepted(cfg.tol) {
            classes.insert(Var::from_chart(eq.picture, &out.z), out.residual);
        }
    }
    iterations
}

/// Solve the stencil for the corner `which` (its current value is ignored).
///
/// ```
/// use multistar::legs::Color;
/// use multistar::multispin::{Picture, RapidityPair, Var};
/// use multistar::solver::{max_residual, solve_for_corner, Slot, SolveConfig, Stencil5};
/// use num_complex::Complex64;
///
/// let v = |x: f64, y: f64| Var::from_free(Picture::Hyperbolic, &[Complex64::new(x, 0.0), Complex64::new(y, 0.0)]);
/// let st = Stencil5::new(v(1.1, 0.8), [Some(v(0.6, 1.4)), None, Some(v(1.7, 0.9)), Some(v(0.5, 0.5))],
///     Color::White, RapidityPair::from_angles(0.9, 0.6), RapidityPair::from_angles(0.4, 0.2)).unwrap();
/// let report = solve_for_corner(&st, Slot::J, &SolveConfig::default()).unwrap();
/// assert_eq!(report.branch_count, 1);
/// let solved = st.with_corner(Slot::J, report.solutions[0].clone());
/// assert!(max_residual(&solved).unwrap() < 1e-10);
/// ```
pub fn solve_for_corner(st: &Stencil5, which: Slot, cfg: &SolveConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let eq = eq_form(st, which)?;
    let mut classes = Classes::new();
    let mut iterations = 0;
    let closed = match st.n() {
        2 => solve_n2_raw(&eq).map(|(t1, t2)| vec![Var::from_free(eq.picture, &[t1]), Var::from_free(eq.picture, &[t2])]),
        3 => n3_candidates(&eq),
        _ => symmetric_candidates(&eq),
    };
    if let Ok(cands) = closed {
        iterations += accept_candidates(&eq, cands, cfg, &mut classes);
    }
    let mut best = f64::INFINITY;
    if classes.sols.is_empty() {
        let (it, b) = newton_classes(&eq, cfg, &mut classes);
        iterations += it;
        best = b;
    }
    if classes.sols.is_empty() {
        return Err(Error::SearchFailure { starts: cfg.starts, best_residual: best });
    }
    Ok(classes.into_report(iterations))
}

fn n3_candidates(eq: &EqForm<'_>) -> Result<Vec<Var>> {
    let c = cubic3::f_cubic_raw(eq.picture, eq.known[0], eq.known[1], eq.known[2], eq.center, &eq.alpha, &eq.beta);
    if c.scale() == 0.0 || c.c3.norm() < tolerances::CUBIC_DEGENERATE * c.scale() {
        return Err(Error::Degenerate("n = 3 cubic is degenerate".into()));
    }
    let t = cubic3::cubic_roots(&c)?;
    Ok(vec![Var::from_free(eq.picture, &[t[0], t[1]])])
}

/// Candidate from the linear structure of the equations.
///
/// With `P(t) = Π_b (t − y_{l,b})` the leg containing the unknown is
/// `C_a·P(u)/P(v_a)` for constants `C_a`, `u`, `v_a` fixed by the centre and
/// the rapidities, so `A_a = 1` reads `C_a P(u) − K_a P(v_a) = 0` with `K_a`
/// the ratio of the three known legs. These n − 1 equations are linear in
/// the n − 1 free coefficients of `P`, the remaining coefficient being fixed
/// by the constraint (`e_n = (−1)ⁿ` hyperbolic, `e₁ = 0` rational). The
/// unknown is the root set of `P`: when the linear system is regular the
/// solution is unique up to permutation.
fn symmetric_candidates(eq: &EqForm<'_>) -> Result<Vec<Var>> {
    let pic = eq.picture;
    let f = eq.center;
    let n = f.len();
    let (al, be) = (eq.alpha, eq.beta);
    let leg = |a: usize, y: &[Complex64], p: Complex64, q: Complex64| match pic {
        Picture::Hyperbolic => phi_raw(a, f, y, p, q),
        Picture::Rational => phi_rational_raw(a, f, y, p, q),
    };
    let one = Complex64::new(1.0, 0.0);
    let mut mat = DMatrix::<Complex64>::zeros(n - 1, n - 1);
    let mut rhs = DVector::<Complex64>::zeros(n - 1);
    // Coefficient indices k = 0..=n of e_k t^{n−k}; `free` lists the unknown ones.
    let (free, fixed): (Vec<usize>, Vec<(usize, Complex64)>) = match pic {
        Picture::Hyperbolic => ((1..n).collect(), vec![(0, one), (n, if n % 2 == 0 { one } else { -one })]),
        Picture::Rational => ((2..=n).collect(), vec![(0, one), (1, Complex64::new(0.0, 0.0))]),
    };
    for a in 0..n - 1 {
        let fi = leg(a, eq.known[0], al.second, be.first)?;
        let fj = leg(a, eq.known[1], al.second, be.second)?;
        let fk = leg(a, eq.known[2], al.first, be.first)?;
        if fi.norm_sqr() == 0.0 {
            return Err(Error::Singular("vanishing leg at corner i".into()));
        }
        let k = fj * fk / fi;
        let (c, u, v) = match pic {
            Picture::Hyperbolic => {
                let cap: Complex64 = f[..n - 1].iter().product();
                let ratio = al.first / be.second;
                (half_power(f[a] / cap, n) * cap.powi(n as i32), ratio / cap, ratio * f[a])
            }
            Picture::Rational => {
                let cap: Complex64 = f[..n - 1].iter().sum();
                let d = al.first - be.second;
                (if n % 2 == 0 { one } else { -one }, d - cap, f[a] + d)
            }
        };
        let col = |kk: usize| c * u.powi((n - kk) as i32) - k * v.powi((n - kk) as i32);
        for (m, &kk) in free.iter().enumerate() {
            mat[(a, m)] = col(kk);
        }
        rhs[a] = -fixed.iter().map(|&(kk, e)| e * col(kk)).sum::<Complex64>();
    }
    let e = mat.lu().solve(&rhs).ok_or_else(|| Error::Degenerate("symmetric-function system is singular".into()))?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    for &(kk, v) in &fixed {
        coeffs[kk] = v;
    }
    for (m, &kk) in free.iter().enumerate() {
        coeffs[kk] = e[m];
    }
    let roots = monic_roots(&coeffs)?;
    Ok(vec![Var::from_free(pic, &roots[..n - 1])])
}

/// Roots of the monic polynomial `Σ_k coeffs[k] t^{n−k}` (`coeffs[0] = 1`)
/// from the companion matrix, each polished by Newton's method.
fn monic_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        comp[(0, k)] = -coeffs[k + 1];
        if k + 1 < n {
            comp[(k + 1, k)] = Complex64::new(1.0, 0.0);
        }
    }
    let mut roots: Vec<Complex64> = comp
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Degenerate("companion eigenvalues did not converge".into()))?
        .iter()
        .copied()
        .collect();
    for t in roots.iter_mut() {
        for _ in 0..3 {
            let (mut p, mut dp) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for c in coeffs {
                dp = dp * *t + p;
                p = p * *t + c;
            }
            if dp.norm_sqr() == 0.0 {
                break;
            }
            *t -= p / dp;
        }
    }
    if roots.iter().any(|t| !(t.re.is_finite() && t.im.is_finite())) {
        return Err(Error::Degenerate("non-finite polynomial root".into()));
    }
    Ok(roots)
}

/// Clear the denominators of the single leg containing the unknown.
fn solve_n2_raw(eq: &EqForm<'_>) -> Result<(Complex64, Complex64)> {
    let pic = eq.picture;
    let f = eq.center;
    // The three known legs fix the value K that the unknown leg must take.
    let leg = |y: &[Complex64], al: Complex64, be: Complex64| match pic {
        Picture::Hyperbolic => phi_raw(0, f, y, al, be),
        Picture::Rational => phi_rational_raw(0, f, y, al, be),
    };
    let (a, b) = (eq.alpha, eq.beta);
    let fi = leg(eq.known[0], a.second, b.first)?;
    let fj = leg(eq.known[1], a.second, b.second)?;
    let fk = leg(eq.known[2], a.first, b.first)?;
    if fi.norm_sqr() == 0.0 {
        return Err(Error::Singular("n = 2 solve: vanishing leg at corner i".into()));
    }
    let k = fj * fk / fi;
    let (al, be) = (a.first, b.second);
    // Quadratic N(t) − K·D(t) with y_l = (t, 1/t) or (t, −t).
    let (n, d) = match pic {
        Picture::Hyperbolic => {
            // φ = Π_b (α − β f₀ y_b)/(α f₀ − β y_b); multiply each factor pair by t.
            let n = mul_lin([al, -be * f[0]], [-be * f[0], al]);
            let d = mul_lin([al * f[0], -be], [-be, al * f[0]]);
            (n, d)
        }
        Picture::Rational => {
            let dd = al - be;
            let n = mul_lin([f[0] - dd, Complex64::new(1.0, 0.0)], [f[0] - dd, Complex64::new(-1.0, 0.0)]);
            let d = mul_lin([f[0] + dd, Complex64::new(-1.0, 0.0)], [f[0] + dd, Complex64::new(1.0, 0.0)]);
            (n, d)
        }
    };
    let q = [n[0] - k * d[0], n[1] - k * d[1], n[2] - k * d[2]];
    quadratic_roots(q)
}

/// Product of two linear polynomials given as `[constant, slope]`.
fn mul_lin(p: [Complex64; 2], q: [Complex64; 2]) -> [Complex64; 3] {
    [p[0] * q[0], p[0] * q[1] + p[1] * q[0], p[1] * q[1]]
}

fn quadratic_roots(q: [Complex64; 3]) -> Result<(Complex64, Complex64)> {
    let scale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 || q[2].norm() < tolerances::CUBIC_DEGENERATE * scale {
        return Err(Error::Degenerate("n = 2 quadratic has a vanishing leading coefficient".into()));
    }
    let disc = (q[1] * q[1] - 4.0 * q[2] * q[0]).sqrt();
    let s = if (-q[1] + disc).norm() >= (-q[1] - disc).norm() { -q[1] + disc } else { -q[1] - disc };
    let t1 = s / (2.0 * q[2]);
    let t2 = if s.norm_sqr() == 0.0 { t1 } else { 2.0 * q[0] / s };
    Ok((t1, t2))
}

/// The two roots of the n = 2 quadratic for the unknown's first component.
///
/// The roots are `t` and `1/t` (hyperbolic) or `t` and `−t` (rational): the
/// two orderings of a single solution.
pub fn solve_n2(st: &Stencil5, which: Slot) -> Result<(Complex64, Complex64)> {
    if st.n() != 2 {
        return Err(Error::Domain("solve_n2 requires n = 2".into()));
    }
    solve_n2_raw(&eq_form(st, which)?)
}

/// Multistart damped Newton for any `n >= 2`, without closed forms.
pub fn solve_newton_general(st: &Stencil5, which: Slot, cfg: &SolveConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let eq = eq_form(st, which)?;
    let mut classes = Classes::new();
    let (iterations, best) = newton_classes(&eq, cfg, &mut classes);
    if classes.sols.is_empty() {
        return Err(Error::SearchFailure { starts: cfg.starts, best_residual: best });
    }
    Ok(classes.into_report(iterations))
}

/// A seeded random complete stencil: real positive components
/// `e^{U(−1,1)}` (hyperbolic) or real `U(−1, 1)` components (rational), and
/// unit-modulus (hyperbolic) or real (rational) rapidities.
///
/// ```
/// use multistar::legs::Color;
/// use multistar::multispin::Picture;
/// use multistar::solver::{random_stencil, solve_for_corner, Slot, SolveConfig};
///
/// let st = random_stencil(Picture::Hyperbolic, 3, Color::Black, 1).unwrap();
/// let report = solve_for_corner(&st, Slot::L, &SolveConfig::default()).unwrap();
/// assert_eq!(report.branch_count, 1);
/// ```
pub fn random_stencil(picture: Picture, n: usize, color: Color, seed: u64) -> Result<Stencil5> {
    if n < 2 {
        return Err(Error::Domain(format!("random_stencil needs n >= 2, got {n}")));
    }
    let c = Complex64::new;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = || {
        let free: Vec<Complex64> = (0..n - 1)
            .map(|_| match picture {
                Picture::Hyperbolic => c(rng.gen_range(-1.0f64..1.0).exp(), 0.0),
                Picture::Rational => c(rng.gen_range(-1.0..1.0), 0.0),
            })
            .collect();
        Var::from_free(picture, &free)
    };
    let (f, i, j, k, l) = (v(), v(), v(), v(), v());
    let (al, be) = match picture {
        Picture::Hyperbolic => (
            RapidityPair::from_angles(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
            RapidityPair::from_angles(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
        ),
        Picture::Rational => (
            RapidityPair::real(rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)),
            RapidityPair::real(rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)),
        ),
    };
    Stencil5::complete(f, [i, j, k, l], color, al, be)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetries_of_a() {
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            let st = random_stencil(picture, 3, Color::Black, 11).unwrap();
            let comps: Vec<&[Complex64]> = st.corners.iter().map(|c| c.as_ref().unwrap().components()).collect();
            let f = st.center.components();
            for a in 0..2 {
                let base = leg_ratio_raw(picture, a, f, [comps[0], comps[1], comps[2], comps[3]], &st.alpha, &st.beta).unwrap();
                let s0 = leg_ratio_raw(picture, a, f, [comps[3], comps[2], comps[1], comps[0]], &st.alpha.hat(), &st.beta.hat()).unwrap();
                let s1 = leg_ratio_raw(picture, a, f, [comps[2], comps[3], comps[0], comps[1]], &st.alpha.hat(), &st.beta).unwrap();
                let s2 = leg_ratio_raw(picture, a, f, [comps[1], comps[0], comps[3], comps[2]], &st.alpha, &st.beta.hat()).unwrap();
                assert!((s0 - base).norm() < 1e-12 * base.norm());
                assert!((s1 * base - 1.0).norm() < 1e-12);
                assert!((s2 * base - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn solve_every_corner_both_colors_n2_n3() {
        let cfg = SolveConfig::default();
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            for n in [2, 3] {
                for color in [Color::Black, Color::White] {
                    for seed in 0..5 {
                        let st = random_stencil(picture, n, color, seed).unwrap();
                        for slot in Slot::ALL {
                            let rep = solve_for_corner(&st, slot, &cfg).unwrap();
                            assert_eq!(rep.branch_count, 1, "{picture:?} n={n} {color:?} {slot:?}");
                            for s in &rep.solutions {
                                let r = max_residual(&st.with_corner(slot, s.clone())).unwrap();
                                assert!(r <= 1e-10, "{picture:?} n={n} {color:?} {slot:?}: {r}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn n2_roots_are_swaps() {
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            let st = random_stencil(picture, 2, Color::Black, 3).unwrap();
            let (t1, t2) = solve_n2(&st, Slot::L).unwrap();
            match picture {
                Picture::Hyperbolic => assert!((t1 * t2 - 1.0).norm() < 1e-12),
                Picture::Rational => assert!((t1 + t2).norm() < 1e-12),
            }
            let a = Var::from_free(picture, &[t1]);
            let b = Var::from_free(picture, &[t2]);
            assert!(match_up_to_permutation(&a, &b, 1e-10));
            assert!(max_residual(&st.with_corner(Slot::L, a)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn newton_matches_closed_forms() {
        let cfg = SolveConfig { seed: 5, ..SolveConfig::default() };
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            for n in [2, 3] {
                for seed in 0..10 {
                    let st = random_stencil(picture, n, Color::White, 100 + seed).unwrap();
                    let closed = solve_for_corner(&st, Slot::K, &cfg).unwrap();
                    let newton = solve_newton_general(&st, Slot::K, &cfg).unwrap_or_else(|e| panic!("{picture:?} n={n} seed={seed}: {e}"));
                    assert_eq!(closed.branch_count, newton.branch_count);
                    for (a, b) in closed.solutions.iter().zip(&newton.solutions) {
                        assert!(match_up_to_permutation(a, b, 1e-7), "{a:?} vs {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn newton_n4_n5_converges() {
        let cfg = SolveConfig::default();
        for n in [4, 5] {
            for seed in 0..3 {
                let st = random_stencil(Picture::Hyperbolic, n, Color::Black, seed).unwrap();
                let rep = solve_for_corner(&st, Slot::L, &cfg).unwrap_or_else(|e| panic!("n={n} seed={seed}: {e}"));
                assert!(rep.branch_count >= 1);
                for s in &rep.solutions {
                    assert!(max_residual(&st.with_corner(Slot::L, s.clone())).unwrap() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn symmetric_candidate_agrees_with_multistart() {
        let cfg = SolveConfig { seed: 3, ..SolveConfig::default() };
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            for n in [3, 4, 5] {
                for seed in 0..6 {
                    let st = random_stencil(picture, n, Color::Black, 200 + seed).unwrap();
                    let eq = eq_form(&st, Slot::L).unwrap();
                    let cand = symmetric_candidates(&eq).unwrap().remove(0);
                    let Ok(multi) = solve_newton_general(&st, Slot::L, &cfg) else { continue };
                    assert_eq!(multi.branch_count, 1, "{picture:?} n={n}");
                    assert!(match_up_to_permutation(&cand, &multi.solutions[0], 1e-6), "{picture:?} n={n} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn monic_roots_known() {
        // (t − 1)(t + 2)(t − 3i)(t + 0.5)
        let want = [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0), c(-0.5, 0.0)];
        let mut coeffs = vec![c(1.0, 0.0)];
        for r in want {
            let mut next = coeffs.clone();
            next.push(c(0.0, 0.0));
            for k in 1..next.len() {
                next[k] -= r * coeffs[k - 1];
            }
            coeffs = next;
        }
        let roots = monic_roots(&coeffs).unwrap();
        for w in want {
            assert!(roots.iter().any(|r| (r - w).norm() < 1e-12));
        }
    }

    #[test]
    fn residual_is_permutation_invariant() {
        let st = random_stencil(Picture::Hyperbolic, 4, Color::White, 8).unwrap();
        let base = max_residual(&st).unwrap();
        assert!(base > 1e-6);
        let permuted = st.with_corner(Slot::J, st.corners[1].as_ref().unwrap().permuted(&[3, 1, 0, 2]));
        let p = residual(&permuted).unwrap();
        let b = residual(&st).unwrap();
        // Permuting a corner permutes nothing in the A_a: each leg is a product over the corner's components.
        for (x, y) in p.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn matching() {
        let a = Var::from_free(Picture::Hyperbolic, &[c(1.5, 0.2), c(0.7, 0.0)]);
        let b = Var::from_free(Picture::Hyperbolic, &[c(0.9, 0.0), c(1.1, 0.0)]);
        assert!(match_up_to_permutation(&a, &a.permuted(&[1, 2, 0]), 1e-14));
        assert!(!match_up_to_permutation(&a, &b, 1e-7));
        // Near-equal components: greedy matching after sorting could fail, assignment does not.
        let x = Var::new(Picture::Rational, vec![c(1.0, 1e-9), c(1.0, -1e-9), c(-2.0, 0.0)]).unwrap();
        let y = Var::new(Picture::Rational, vec![c(1.0 + 1e-9, -1e-9), c(-2.0, 0.0), c(1.0 - 1e-9, 1e-9)]).unwrap();
        assert!(match_up_to_permutation(&x, &y, 1e-7));
    }

    #[test]
    fn errors() {
        let st = random_stencil(Picture::Hyperbolic, 3, Color::Black, 1).unwrap();
        let mut missing = st.clone();
        missing.corners[0] = None;
        assert!(solve_for_corner(&missing, Slot::L, &SolveConfig::default()).is_err());
        assert!(residual(&missing).is_err());
        let bad = SolveConfig { starts: 0, ..SolveConfig::default() };
        assert!(matches!(solve_for_corner(&st, Slot::L, &bad), Err(Error::Config(_))));
        let other = Var::from_free(Picture::Hyperbolic, &[c(1.0, 0.0)]);
        assert!(Stencil5::new(st.center.clone(), [Some(other), None, None, None], Color::Black, st.alpha, st.beta).is_err());
    }

    #[test]
    fn deterministic() {
        let st = random_stencil(Picture::Rational, 4, Color::White, 2).unwrap();
        let cfg = SolveConfig { seed: 9, ..SolveConfig::default() };
        assert_eq!(solve_for_corner(&st, Slot::I, &cfg).unwrap(), solve_for_corner(&st, Slot::I, &cfg).unwrap());
    }
}

