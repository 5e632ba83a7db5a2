//! Checkerboard lattice evolution and the classical action.
//!
//! Sites are the points `(x, y)` of a `w × h` grid with `x ≡ y (mod 2)`;
//! nearest neighbours are diagonal. A site is black when `x` is even and
//! white otherwise. The stencil centred at `(x, y)` has corners
//!
//! ```text
//! TL = (x−1, y+1)   TR = (x+1, y+1)
//! BL = (x−1, y−1)   BR = (x+1, y−1)
//! ```
//!
//! and is the [`Stencil5`] with corners `(i, j, k, l) = (TL, TR, BL, BR)`:
//! `A_a(f; TL, TR, BL, BR; α, β) = 1` at black centres and
//! `A_a(g; TL, BL, TR, BR; β, α) = 1` at white centres.
//!
//! Evolution towards the north-east fills each new site `(x, y)` as the TR
//! corner of the stencil centred at `(x − 1, y − 1)`, sweeping anti-diagonals
//! `x + y = const` in increasing order. Two initial conditions are provided:
//!
//! * **corner** — every site with `x ≤ 1` or `y ≤ 1`;
//! * **staircase** — the two anti-diagonal bands `x + y ∈ {s₀, s₀ + 2}` with
//!   `s₀ = 2⌊max(w, h)/2⌋ − 2`; sites below the band lie outside the domain.
//!
//! In the hyperbolic picture the rapidities come from angles `u`, `v` through
//! [`saddle_parameters`], and the action
//!
//! ```text
//! 𝒜 = Σ_sites C(x) + Σ_E¹ 𝓛_{u₁−v₂}(x_b, x_w) + Σ_E² 𝓛_{u₂−v₁}(x_b, x_w)
//!                  + Σ_E³ 𝓛̄_{u₁−v₁}(x_w, x_b) + Σ_E⁴ 𝓛̄_{u₂−v₂}(x_w, x_b)
//! ```
//!
//! has the 5-point equations as its Euler–Lagrange equations. Here E¹, …, E⁴
//! are the edges leaving a black site `b` to its BR, TL, BL and TR white
//! neighbour `w`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legs::{c_term_raw, fd_free, lagrangian_bar_raw, lagrangian_raw, saddle_parameters, Color};
use crate::multispin::{Picture, RapidityPair, Var};
use crate::solver::{max_residual, solve_for_corner, Slot, SolveConfig, Stencil5};
use crate::tolerances;

/// Shape of the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    /// L-shaped border `x ≤ 1` or `y ≤ 1`.
    Corner,
    /// Two anti-diagonal bands across the lattice.
    Staircase,
}

impl std::str::FromStr for IcKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corner" => Ok(IcKind::Corner),
            "staircase" => Ok(IcKind::Staircase),
            other => Err(Error::Config(format!("unknown initial condition '{other}' (expected corner or staircase)"))),
        }
    }
}

/// Initial data: the shape, plus optional user values for some seed sites
/// (the remaining seed sites are drawn at random).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    /// Shape of the seed set.
    pub kind: IcKind,
    /// User-specified values at seed sites, as `((x, y), value)`.
    #[serde(default)]
    pub values: Vec<((usize, usize), Var)>,
}

impl InitialCondition {
    /// Seed set of the given shape with all values random.
    pub fn random(kind: IcKind) -> Self {
        Self { kind, values: Vec::new() }
    }
}

/// Model parameters of a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    /// Number of components.
    pub n: usize,
    /// Picture of the variables.
    pub picture: Picture,
    /// Angles `u = (u₁, u₂)`.
    pub u: [f64; 2],
    /// Angles `v = (v₁, v₂)`.
    pub v: [f64; 2],
}

impl LatticeParams {
    /// Defaults `u = (2.0, 1.6)`, `v = (0.3, 0.7)`: every `u_a − v_b` lies
    /// inside `(0, π)`, and random 8 × 8 evolutions stay well away from the
    /// poles of the leg functions. Evolved hyperbolic values are complex, and
    /// for some angle choices (e.g. `u = (1.3, 1.0)`, `v = (0.2, 0.4)`) the
    /// n = 3 corner evolution drifts towards a pole along a diagonal until the
    /// equations can no longer be resolved in double precision.
    pub fn new(n: usize, picture: Picture) -> Self {
        Self { n, picture, u: [2.0, 1.6], v: [0.3, 0.7] }
    }

    /// Rapidities of the 5-point equations: [`saddle_parameters`] in the
    /// hyperbolic picture, the angles themselves in the rational one.
    pub fn rapidities(&self) -> (RapidityPair, RapidityPair) {
        match self.picture {
            Picture::Hyperbolic => saddle_parameters(self.u, self.v, true),
            Picture::Rational => (RapidityPair::real(self.u[0], self.u[1]), RapidityPair::real(self.v[0], self.v[1])),
        }
    }
}

/// How to pick among several solution classes at a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy", content = "index")]
pub enum BranchPolicy {
    /// The class closest to the arithmetic mean of the stencil's known variables.
    Nearest,
    /// The class with this index after canonical sorting (clamped to the last).
    Indexed(usize),
}

impl Default for BranchPolicy {
    fn default() -> Self {
        BranchPolicy::Nearest
    }
}

impl std::str::FromStr for BranchPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(BranchPolicy::Nearest),
            "indexed" => Ok(BranchPolicy::Indexed(0)),
            other => match other.strip_prefix("indexed:").map(str::parse::<usize>) {
                Some(Ok(k)) => Ok(BranchPolicy::Indexed(k)),
                _ => Err(Error::Config(format!("unknown branch policy '{other}' (expected nearest, indexed or indexed:K)"))),
            },
        }
    }
}

/// A checkerboard lattice with optional values at its sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerLattice {
    /// Number of columns.
    pub width: usize,
    /// Number of rows.
    pub height: usize,
    /// Model parameters.
    pub params: LatticeParams,
    /// Initial-condition shape; decides the evolution domain.
    pub ic: IcKind,
    /// Row-major site values (`index = y·width + x`); `None` when unknown
    /// and always `None` at points with `x ≢ y (mod 2)`.
    pub sites: Vec<Option<Var>>,
}

/// One solved site of an evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    /// Column.
    pub x: usize,
    /// Row.
    pub y: usize,
    /// Number of solution classes found.
    pub classes: usize,
    /// Index of the class chosen.
    pub chosen: usize,
    /// Residual of the chosen class.
    pub residual: f64,
}

/// Summary of an evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    /// Per-site branch log, in solve order.
    pub branches: Vec<BranchRecord>,
    /// Largest residual over all solved sites.
    pub max_residual: f64,
    /// Newton iterations spent.
    pub iterations: usize,
}

/// Residual of one stencil of a lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    /// Column of the centre.
    pub x: usize,
    /// Row of the centre.
    pub y: usize,
    /// Colour of the centre.
    pub color: Color,
    /// `max_a |A_a − 1|`.
    pub residual: f64,
}

/// The classical action with its breakdown by term type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    /// Total action.
    pub value: Complex64,
    /// Vertex terms `Σ C(x)`.
    pub vertex: Complex64,
    /// Edge classes E¹ … E⁴.
    pub edges: [Complex64; 4],
}

impl CheckerLattice {
    /// True for grid points that carry a site.
    pub fn is_site(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && (x + y) % 2 == 0
    }

    /// Colour of a site: black for even `x`.
    pub fn color(x: usize) -> Color {
        if x % 2 == 0 {
            Color::Black
        } else {
            Color::White
        }
    }

    /// True for sites inside the evolution domain of the initial condition.
    pub fn in_domain(&self, x: usize, y: usize) -> bool {
        self.is_site(x, y)
            && match self.ic {
                IcKind::Corner => true,
                IcKind::Staircase => x + y >= staircase_base(self.width, self.height),
            }
    }

    /// Value at a site.
    pub fn get(&self, x: usize, y: usize) -> Option<&Var> {
        if self.is_site(x, y) {
            self.sites[y * self.width + x].as_ref()
        } else {
            None
        }
    }

    fn set(&mut self, x: usize, y: usize, v: Var) {
        let w = self.width;
        self.sites[y * w + x] = Some(v);
    }

    /// True when every domain site has a value.
    pub fn is_complete(&self) -> bool {
        self.domain_sites().all(|(x, y)| self.get(x, y).is_some())
    }

    fn domain_sites(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| (x, y))).filter(|&(x, y)| self.in_domain(x, y))
    }

    /// Centres whose five stencil sites are all in the domain.
    pub fn stencil_centers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 1..self.height.saturating_sub(1) {
            for x in 1..self.width.saturating_sub(1) {
                if self.in_domain(x, y) && corner_coords(x, y).iter().all(|&(cx, cy)| self.in_domain(cx, cy)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// The stencil centred at `(x, y)`, with missing sites as `None` corners.
    pub fn stencil(&self, x: usize, y: usize) -> Result<Stencil5> {
        let center =
            self.get(x, y).cloned().ok_or_else(|| Error::Domain(format!("stencil centre ({x}, {y}) has no value")))?;
        let [tl, tr, bl, br] = corner_coords(x, y);
        let corner = |(cx, cy): (usize, usize)| self.get(cx, cy).cloned();
        let (alpha, beta) = self.params.rapidities();
        Stencil5::new(center, [corner(tl), corner(tr), corner(bl), corner(br)], Self::color(x), alpha, beta)
    }

    /// Residual of every complete stencil.
    pub fn residual_map(&self) -> Result<Vec<ResidualEntry>> {
        let mut out = Vec::new();
        for (x, y) in self.stencil_centers() {
            let st = self.stencil(x, y)?;
            if st.corners.iter().all(Option::is_some) {
                out.push(ResidualEntry { x, y, color: Self::color(x), residual: max_residual(&st)? });
            }
        }
        Ok(out)
    }

    /// Largest stencil residual (zero for a lattice without complete stencils).
    pub fn max_residual(&self) -> Result<f64> {
        Ok(self.residual_map()?.iter().map(|e| e.residual).fold(0.0, f64::max))
    }
}

fn staircase_base(w: usize, h: usize) -> usize {
    (2 * (w.max(h) / 2)).saturating_sub(2)
}

/// `[TL, TR, BL, BR]` of the stencil centred at `(x, y)`; requires `x, y ≥ 1`.
fn corner_coords(x: usize, y: usize) -> [(usize, usize); 4] {
    [(x - 1, y + 1), (x + 1, y + 1), (x - 1, y - 1), (x + 1, y - 1)]
}

pub(crate) fn random_var(rng: &mut ChaCha8Rng, n: usize, picture: Picture) -> Var {
    let free: Vec<Complex64> = (0..n - 1)
        .map(|_| match picture {
            Picture::Hyperbolic => Complex64::new(rng.gen_range(-1.0f64..1.0).exp(), 0.0),
            Picture::Rational => Complex64::new(rng.gen_range(-1.0..1.0), 0.0),
        })
        .collect();
    Var::from_free(picture, &free)
}

/// Seed sites of the initial condition on a `w × h` lattice.
fn seed_sites(kind: IcKind, w: usize, h: usize) -> Vec<(usize, usize)> {
    let s0 = staircase_base(w, h);
    (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| (x + y) % 2 == 0)
        .filter(|&(x, y)| match kind {
            IcKind::Corner => x <= 1 || y <= 1,
            IcKind::Staircase => x + y == s0 || x + y == s0 + 2,
        })
        .collect()
}

/// Build a lattice with its seed sites filled: user values where given,
/// otherwise real components (log-uniform in `[e⁻¹, e]` hyperbolic, uniform
/// in `[−1, 1]` rational) drawn from `seed`.
///
/// ```
/// use multistar::lattice::{init_lattice, IcKind, InitialCondition, LatticeParams};
/// use multistar::multispin::Picture;
///
/// let lat = init_lattice(8, 8, &InitialCondition::random(IcKind::Corner), &LatticeParams::new(2, Picture::Hyperbolic), 1).unwrap();
/// assert!(lat.get(0, 6).is_some() && lat.get(3, 1).is_some());
/// assert!(lat.get(4, 4).is_none());
/// ```
pub fn init_lattice(w: usize, h: usize, ic: &InitialCondition, params: &LatticeParams, seed: u64) -> Result<CheckerLattice> {
    if w < 4 || h < 4 {
        return Err(Error::Config(format!("lattice must be at least 4 × 4, got {w} × {h}")));
    }
    if params.n < 2 {
        return Err(Error::Config("lattice variables need n >= 2".into()));
    }
    if params.u.iter().chain(&params.v).any(|t| !t.is_finite()) {
        return Err(Error::Config("lattice angles must be finite".into()));
    }
    let mut lat = CheckerLattice { width: w, height: h, params: *params, ic: ic.kind, sites: vec![None; w * h] };
    let seeds = seed_sites(ic.kind, w, h);
    for ((x, y), v) in &ic.values {
        if !seeds.contains(&(*x, *y)) {
            return Err(Error::Config(format!("({x}, {y}) is not a seed site of the {:?} initial condition", ic.kind)));
        }
        if v.n() != params.n || v.picture() != params.picture {
            return Err(Error::Config(format!("value at ({x}, {y}) does not match n = {} / {:?}", params.n, params.picture)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (x, y) in seeds {
        // Draw for every seed site so user overrides do not shift the stream.
        let random = random_var(&mut rng, params.n, params.picture);
        let v = ic.values.iter().find(|(p, _)| *p == (x, y)).map(|(_, v)| v.clone()).unwrap_or(random);
        lat.set(x, y, v);
    }
    Ok(lat)
}

pub(crate) fn site_seed(seed: u64, x: usize, y: usize) -> u64 {
    // SplitMix64 finaliser on the packed coordinates.
    let mut z = seed ^ ((x as u64) << 32 | y as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn component_distance(a: &Var, b: &[Complex64]) -> f64 {
    a.canonical().components().iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt()
}

/// Evolve towards the north-east until every domain site has a value.
///
/// On failure the lattice keeps every site solved so far and the error is
/// [`Error::AtSite`] with the failing coordinates.
///
/// ```
/// use multistar::lattice::{evolve_ne, init_lattice, BranchPolicy, IcKind, InitialCondition, LatticeParams};
/// use multistar::multispin::Picture;
/// use multistar::solver::SolveConfig;
///
/// let params = LatticeParams::new(2, Picture::Hyperbolic);
/// let mut lat = init_lattice(6, 6, &InitialCondition::random(IcKind::Corner), &params, 3).unwrap();
/// let report = evolve_ne(&mut lat, &SolveConfig::default(), BranchPolicy::Nearest).unwrap();
/// assert!(lat.is_complete());
/// assert!(report.max_residual < 1e-10);
/// ```
pub fn evolve_ne(lat: &mut CheckerLattice, cfg: &SolveConfig, policy: BranchPolicy) -> Result<EvolveReport> {
    cfg.validate()?;
    let (w, h) = (lat.width, lat.height);
    let mut report = EvolveReport { branches: Vec::new(), max_residual: 0.0, iterations: 0 };
    for diag in 0..w + h {
        for x in 0..=diag.min(w - 1) {
            let y = diag - x;
            if y >= h || x < 2 || y < 2 || !lat.in_domain(x, y) || lat.get(x, y).is_some() {
                continue;
            }
            let fail = |e: Error| Error::AtSite { x, y, source: Box::new(e) };
            let st = lat.stencil(x - 1, y - 1).map_err(fail)?;
            let site_cfg = SolveConfig { seed: site_seed(cfg.seed, x, y), ..*cfg };
            let rep = solve_for_corner(&st, Slot::J, &site_cfg).map_err(fail)?;
            let chosen = match policy {
                BranchPolicy::Indexed(k) => k.min(rep.solutions.len() - 1),
                BranchPolicy::Nearest => {
                    let known: Vec<&Var> =
                        std::iter::once(&st.center).chain(st.corners.iter().flatten()).collect();
                    let n = st.n();
                    let mean: Vec<Complex64> = (0..n)
                        .map(|a| known.iter().map(|v| v.canonical().components()[a]).sum::<Complex64>() / known.len() as f64)
                        .collect();
                    (0..rep.solutions.len())
                        .min_by(|&p, &q| {
                            component_distance(&rep.solutions[p], &mean).total_cmp(&component_distance(&rep.solutions[q], &mean))
                        })
                        .expect("a report has at least one solution")
                }
            };
            report.iterations += rep.iterations;
            report.max_residual = report.max_residual.max(rep.residuals[chosen]);
            report.branches.push(BranchRecord { x, y, classes: rep.branch_count, chosen, residual: rep.residuals[chosen] });
            lat.set(x, y, rep.solutions[chosen].clone());
        }
    }
    Ok(report)
}

fn additive(v: &Var) -> Result<Vec<Complex64>> {
    match v {
        Var::Hyperbolic(_) => {
            let free: Vec<Complex64> = v.components()[..v.n() - 1].iter().map(|z| z.ln()).collect();
            let last = -free.iter().sum::<Complex64>();
            Ok(free.into_iter().chain(std::iter::once(last)).collect())
        }
        Var::Rational(_) => Err(Error::Domain("the action is defined in the hyperbolic picture only".into())),
    }
}

/// Action terms of one black site with the given additive variables; `None`
/// neighbours are outside the domain.
fn black_edges(xb: &[Complex64], nb: [Option<&[Complex64]>; 4], u: [f64; 2], v: [f64; 2]) -> Result<[Complex64; 4]> {
    let c = |t: f64| Complex64::new(t, 0.0);
    let [tl, tr, bl, br] = nb;
    let zero = Complex64::new(0.0, 0.0);
    let e1 = br.map(|w| lagrangian_raw(c(u[0] - v[1]), xb, w)).transpose()?.unwrap_or(zero);
    let e2 = tl.map(|w| lagrangian_raw(c(u[1] - v[0]), xb, w)).transpose()?.unwrap_or(zero);
    let e3 = bl.map(|w| lagrangian_bar_raw(c(u[0] - v[0]), w, xb)).transpose()?.unwrap_or(zero);
    let e4 = tr.map(|w| lagrangian_bar_raw(c(u[1] - v[1]), w, xb)).transpose()?.unwrap_or(zero);
    Ok([e1, e2, e3, e4])
}

fn action_of(lat: &CheckerLattice, xs: &[Option<Vec<Complex64>>]) -> Result<ActionValue> {
    action_window(lat, xs, (0, lat.width), (0, lat.height))
}

/// The vertex terms of the sites in `xr × yr` plus the edge terms owned by the
/// black sites among them.
fn action_window(
    lat: &CheckerLattice,
    xs: &[Option<Vec<Complex64>>],
    xr: (usize, usize),
    yr: (usize, usize),
) -> Result<ActionValue> {
    let (w, h) = (lat.width, lat.height);
    let (u, v) = (lat.params.u, lat.params.v);
    let get = |x: isize, y: isize| -> Option<&[Complex64]> {
        if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
            return None;
        }
        xs[y as usize * w + x as usize].as_deref()
    };
    let mut out = ActionValue { value: Complex64::new(0.0, 0.0), vertex: Complex64::new(0.0, 0.0), edges: [Complex64::new(0.0, 0.0); 4] };
    for y in yr.0..yr.1 {
        for x in xr.0..xr.1 {
            let Some(xf) = get(x as isize, y as isize) else { continue };
            out.vertex += c_term_raw(xf);
            if x % 2 == 0 {
                let (xi, yi) = (x as isize, y as isize);
                let nb = [get(xi - 1, yi + 1), get(xi + 1, yi + 1), get(xi - 1, yi - 1), get(xi + 1, yi - 1)];
                let e = black_edges(xf, nb, u, v).map_err(|e| match e {
                    Error::Domain(m) => Error::Domain(format!("{m} (black site ({x}, {y}))")),
                    other => other,
                })?;
                for k in 0..4 {
                    out.edges[k] += e[k];
                }
            }
        }
    }
    out.value = out.vertex + out.edges.iter().sum::<Complex64>();
    Ok(out)
}

fn additive_sites(lat: &CheckerLattice) -> Result<Vec<Option<Vec<Complex64>>>> {
    if !lat.is_complete() {
        return Err(Error::Domain("the action needs every domain site filled".into()));
    }
    lat.sites.iter().map(|s| s.as_ref().map(additive).transpose()).collect()
}

/// The classical action of a filled hyperbolic lattice, with variables
/// `x = log y` (principal logarithms of the first n − 1 components) and the
/// angles stored in its parameters.
///
/// ```
/// use multistar::lattice::{action, init_lattice, IcKind, InitialCondition, LatticeParams};
/// use multistar::multispin::Picture;
///
/// let lat = init_lattice(4, 4, &InitialCondition::random(IcKind::Corner), &LatticeParams::new(2, Picture::Hyperbolic), 0);
/// // A 4 × 4 corner lattice still has unfilled sites.
/// assert!(action(&lat.unwrap()).is_err());
/// ```
pub fn action(lat: &CheckerLattice) -> Result<ActionValue> {
    action_of(lat, &additive_sites(lat)?)
}

/// Distance in additive coordinates from the free direction `a` at a site to
/// the nearest logarithmic branch point of the edge terms touching it.
fn branch_distance(lat: &CheckerLattice, xs: &[Option<Vec<Complex64>>], x: usize, y: usize) -> f64 {
    let w = lat.width;
    let (u, v) = (lat.params.u, lat.params.v);
    let xf = xs[y * w + x].as_deref().expect("domain sites are filled");
    // Edge angle and orientation (black first) towards TL, TR, BL, BR.
    let black = x % 2 == 0;
    let thetas = if black {
        [u[1] - v[0], PI - (u[1] - v[1]), PI - (u[0] - v[0]), u[0] - v[1]]
    } else {
        // Seen from a white site, the TL neighbour owns the edge as its BR, etc.
        [u[0] - v[1], PI - (u[0] - v[0]), PI - (u[1] - v[1]), u[1] - v[0]]
    };
    let offsets: [(isize, isize); 4] = [(-1, 1), (1, 1), (-1, -1), (1, -1)];
    let mut best = f64::INFINITY;
    for (k, (dx, dy)) in offsets.iter().enumerate() {
        let (nx, ny) = (x as isize + dx, y as isize + dy);
        if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= lat.height {
            continue;
        }
        let Some(xn) = xs[ny as usize * w + nx as usize].as_deref() else { continue };
        for &p in xf {
            for &q in xn {
                // The singular set of Li₂(−e^{±(p − q) + iθ}) is ±(p − q) + iθ ∈ iπ(2ℤ + 1);
                // its distance from the current point is orientation independent.
                for d in [p - q, q - p] {
                    let mut im = (d.im + thetas[k] - PI).rem_euclid(2.0 * PI);
                    if im > PI {
                        im -= 2.0 * PI;
                    }
                    best = best.min(Complex64::new(d.re, im).norm());
                }
            }
        }
    }
    best
}

/// `max |exp(∂𝒜/∂x_{f,a}) − 1|` over the centres of all complete stencils,
/// with derivatives by fourth-order central differences in the n − 1 free
/// components. Only the terms of 𝒜 that involve the site are differenced;
/// the rest cancel exactly. The step is [`tolerances::FD_STEP`], reduced to
/// a sixteenth of the distance to the nearest logarithmic branch point of
/// the edge terms: evolved values are complex and occasionally pass within
/// 1e-4 of one, where a fixed step straddles the singularity. On a solved
/// lattice this is the discrete Euler–Lagrange check of the 5-point
/// equations.
pub fn action_gradient_check(lat: &CheckerLattice) -> Result<f64> {
    let xs = additive_sites(lat)?;
    let w = lat.width;
    let mut worst: f64 = 0.0;
    for (x, y) in lat.stencil_centers() {
        let idx = y * w + x;
        let base = xs[idx].clone().expect("domain sites are filled");
        let window = ((x.saturating_sub(1), (x + 2).min(w)), (y.saturating_sub(1), (y + 2).min(lat.height)));
        let h = tolerances::FD_STEP.min(branch_distance(lat, &xs, x, y) / 16.0);
        for a in 0..lat.params.n - 1 {
            let f = |p: &[Complex64]| {
                let mut trial = xs.clone();
                trial[idx] = Some(p.to_vec());
                Ok(action_window(lat, &trial, window.0, window.1)?.value)
            };
            let d1 = fd_free(&base, a, h, f)?;
            let d2 = fd_free(&base, a, 2.0 * h, f)?;
            let d = (4.0 * d1 - d2) / 3.0;
            worst = worst.max((d.exp() - 1.0).norm());
        }
    }
    Ok(worst)
}
