//! Classical Lagrangians, leg functions and the four-leg ratio `A_a`.
//!
//! | Function | Formula |
//! |----------|---------|
//! | [`c_term`] | C(x) = −iπ Σ_{a<b} (x_a − x_b) |
//! | [`lagrangian`] | 𝓛_θ(x_i, x_j) = n²(π² − 3θ²)/12 + (n/4)Σ(x_{i,a}² + x_{j,a}²) + Σ_{a,b} Li₂(−e^{x_{i,a} − x_{j,b} + iθ}) |
//! | [`lagrangian_bar`] | 𝓛̄_θ = 𝓛_{π−θ} |
//! | [`phi`] | φ_a(y_i, y_j; α, β) = (y_{i,a}/Y_i)^{n/2} Π_b (α − βY_i y_{j,b}) / (α y_{i,a} − β y_{j,b}),  Y_i = Π_{a<n} y_{i,a} |
//! | [`phi_rational`] | φ⁽ʳ⁾_a(y_i, y_j; α, β) = Π_b (Y_i + y_{j,b} − α + β) / (y_{i,a} − y_{j,b} + α − β),  Y_i = Σ_{a<n} y_{i,a} |
//! | [`leg_ratio`] | A_a = φ_a(f,i; α₂,β₁) φ_a(f,l; α₁,β₂) / (φ_a(f,j; α₂,β₂) φ_a(f,k; α₁,β₁)) |
//!
//! Component indices `a` are 0-based in the API (`a = 0` is the first component).
//!
//! The derivative identities connecting the two layers are
//!
//! ```text
//! exp ∂𝓛_{u−v}(x_i, x_j)/∂x_{i,a} = φ_a(y_i, y_j; α, −β)      exp ∂𝓛̄_{u−v}(x_i, x_j)/∂x_{i,a} = φ_a(y_i, y_j; β, α)
//! exp ∂𝓛_{u−v}(x_j, x_i)/∂x_{i,a} = φ_a(y_i, y_j; β, −α)⁻¹   exp ∂𝓛̄_{u−v}(x_j, x_i)/∂x_{i,a} = φ_a(y_i, y_j; α, β)⁻¹
//! ```
//!
//! with `α = e^{iu}`, `β = e^{iv}`, `y = eˣ`, and derivatives taken in the
//! n − 1 independent components. Summed over the four edges of a star they
//! give the 5-point equations `A_a = 1`, provided the rapidities are mapped as
//! in [`saddle_parameters`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multispin::{AdditiveVar, Constrained, MultiplicativeVar, Picture, RapidityPair, RationalVar, Var};
use crate::special_fn::dilog;
use crate::tolerances;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Angle and the two spins entering one Lagrangian term.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianInputs {
    /// The rapidity difference `u − v`.
    pub angle: Complex64,
    /// First spin `x_i`.
    pub left: AdditiveVar,
    /// Second spin `x_j`.
    pub right: AdditiveVar,
}

impl LagrangianInputs {
    /// Evaluate `𝓛_angle(left, right)`.
    pub fn lagrangian(&self) -> Result<Complex64> {
        lagrangian(self.angle, &self.left, &self.right)
    }

    /// Evaluate `𝓛̄_angle(left, right)`.
    pub fn lagrangian_bar(&self) -> Result<Complex64> {
        lagrangian_bar(self.angle, &self.left, &self.right)
    }
}

/// Spectral parameters `α`, `β` of a 5-point equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegContext {
    /// Horizontal rapidity pair.
    pub alpha: RapidityPair,
    /// Vertical rapidity pair.
    pub beta: RapidityPair,
}

/// Vertex term `C(x) = −iπ Σ_{a<b} (x_a − x_b)`.
pub fn c_term(x: &AdditiveVar) -> Complex64 {
    c_term_raw(x.components())
}

pub(crate) fn c_term_raw(x: &[Complex64]) -> Complex64 {
    let n = x.len();
    // Σ_{a<b} (x_a − x_b) = Σ_a (n − 1 − 2a) x_a.
    let s: Complex64 = x.iter().enumerate().map(|(a, &xa)| xa * (n as f64 - 1.0 - 2.0 * a as f64)).sum();
    -I * PI * s
}

/// Edge Lagrangian `𝓛_θ(x_i, x_j)`.
///
/// Fails with [`Error::Domain`] naming the component pair `(a, b)` whose
/// dilogarithm argument falls on the branch cut.
pub fn lagrangian(theta: Complex64, xi: &AdditiveVar, xj: &AdditiveVar) -> Result<Complex64> {
    if xi.n() != xj.n() {
        return Err(Error::Domain(format!("lagrangian spins differ in size: {} vs {}", xi.n(), xj.n())));
    }
    lagrangian_raw(theta, xi.components(), xj.components())
}

pub(crate) fn lagrangian_raw(theta: Complex64, xi: &[Complex64], xj: &[Complex64]) -> Result<Complex64> {
    let n = xi.len() as f64;
    let mut v = n * n * (PI * PI - 3.0 * theta * theta) / 12.0;
    let sq: Complex64 = xi.iter().chain(xj.iter()).map(|z| z * z).sum();
    v += n / 4.0 * sq;
    for (a, &p) in xi.iter().enumerate() {
        for (b, &q) in xj.iter().enumerate() {
            let arg = -(p - q + I * theta).exp();
            // Arguments within rounding of the cut are as ill-defined as those on it.
            if arg.re >= 1.0 && arg.im.abs() <= 1e-14 * arg.norm() {
                return Err(Error::Domain(format!(
                    "lagrangian: dilogarithm argument {arg} on the branch cut for components ({a}, {b})"
                )));
            }
            v += dilog(arg).map_err(|_| {
                Error::Domain(format!("lagrangian: dilogarithm argument {arg} on the branch cut for components ({a}, {b})"))
            })?;
        }
    }
    Ok(v)
}

/// Conjugate edge Lagrangian `𝓛̄_θ = 𝓛_{π−θ}`.
pub fn lagrangian_bar(theta: Complex64, xi: &AdditiveVar, xj: &AdditiveVar) -> Result<Complex64> {
    lagrangian(PI - theta, xi, xj)
}

pub(crate) fn lagrangian_bar_raw(theta: Complex64, xi: &[Complex64], xj: &[Complex64]) -> Result<Complex64> {
    lagrangian_raw(PI - theta, xi, xj)
}

/// `w^{n/2}` on the principal branch: `w^{⌊n/2⌋}·√w` for odd `n`.
pub(crate) fn half_power(w: Complex64, n: usize) -> Complex64 {
    let p = w.powi((n / 2) as i32);
    if n % 2 == 1 {
        p * w.sqrt()
    } else {
        p
    }
}

fn check_index(a: usize, n: usize) -> Result<()> {
    if a >= n {
        return Err(Error::Domain(format!("component index {a} out of range for n = {n}")));
    }
    Ok(())
}

fn finite_or_singular(v: Complex64, what: &str) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Singular(what.to_string()))
    }
}

pub(crate) fn phi_raw(a: usize, yi: &[Complex64], yj: &[Complex64], alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    let n = yi.len();
    let y_cap: Complex64 = yi[..n - 1].iter().product();
    let mut num = half_power(yi[a] / y_cap, n);
    let mut den = Complex64::new(1.0, 0.0);
    for (b, &q) in yj.iter().enumerate() {
        let d = alpha * yi[a] - beta * q;
        if d.norm_sqr() == 0.0 {
            return Err(Error::Singular(format!("phi: denominator vanishes for components ({a}, {b})")));
        }
        num *= alpha - beta * y_cap * q;
        den *= d;
    }
    finite_or_singular(num / den, "phi: non-finite value")
}

pub(crate) fn phi_rational_raw(
    a: usize,
    yi: &[Complex64],
    yj: &[Complex64],
    alpha: Complex64,
    beta: Complex64,
) -> Result<Complex64> {
    let n = yi.len();
    let y_cap: Complex64 = yi[..n - 1].iter().sum();
    let mut num = Complex64::new(1.0, 0.0);
    let mut den = Complex64::new(1.0, 0.0);
    for (b, &q) in yj.iter().enumerate() {
        let d = yi[a] - q + alpha - beta;
        if d.norm_sqr() == 0.0 {
            return Err(Error::Singular(format!("phi_rational: denominator vanishes for components ({a}, {b})")));
        }
        num *= y_cap + q - alpha + beta;
        den *= d;
    }
    finite_or_singular(num / den, "phi_rational: non-finite value")
}

/// Hyperbolic leg function `φ_a(y_i, y_j; α, β)` (0-based `a`).
///
/// ```
/// use multistar::legs::phi;
/// use multistar::multispin::{MultiplicativeVar, Constrained};
/// use num_complex::Complex64;
///
/// let ones = MultiplicativeVar::from_free(&[Complex64::new(1.0, 0.0); 2]);
/// let yj = MultiplicativeVar::from_free(&[Complex64::new(2.0, 0.5), Complex64::new(0.3, 0.0)]);
/// let v = phi(0, &ones, &yj, Complex64::new(0.2, 1.0), Complex64::new(1.5, 0.0)).unwrap();
/// assert!((v - 1.0).norm() < 1e-14);
/// ```
pub fn phi(a: usize, yi: &MultiplicativeVar, yj: &MultiplicativeVar, alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    check_index(a, yi.n())?;
    phi_raw(a, yi.components(), yj.components(), alpha, beta)
}

/// Rational leg function `φ⁽ʳ⁾_a(y_i, y_j; α, β)` (0-based `a`).
pub fn phi_rational(a: usize, yi: &RationalVar, yj: &RationalVar, alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    check_index(a, yi.n())?;
    phi_rational_raw(a, yi.components(), yj.components(), alpha, beta)
}

/// Four-leg ratio on raw component slices; corners ordered `(i, j, k, l)`.
pub(crate) fn leg_ratio_raw(
    picture: Picture,
    a: usize,
    center: &[Complex64],
    corners: [&[Complex64]; 4],
    alpha: &RapidityPair,
    beta: &RapidityPair,
) -> Result<Complex64> {
    let leg = |y: &[Complex64], al: Complex64, be: Complex64| match picture {
        Picture::Hyperbolic => phi_raw(a, center, y, al, be),
        Picture::Rational => phi_rational_raw(a, center, y, al, be),
    };
    let label = |e: Error, corner: &str| match e {
        Error::Singular(m) => Error::Singular(format!("{m} (corner {corner})")),
        other => other,
    };
    let fi = leg(corners[0], alpha.second, beta.first).map_err(|e| label(e, "i"))?;
    let fl = leg(corners[3], alpha.first, beta.second).map_err(|e| label(e, "l"))?;
    let fj = leg(corners[1], alpha.second, beta.second).map_err(|e| label(e, "j"))?;
    let fk = leg(corners[2], alpha.first, beta.first).map_err(|e| label(e, "k"))?;
    let den = fj * fk;
    if den.norm_sqr() == 0.0 {
        return Err(Error::Singular("leg ratio: vanishing denominator legs j/k".into()));
    }
    finite_or_singular(fi * fl / den, "leg ratio: non-finite value")
}

/// Relative condition of evaluating `A_a` in floating point: the sum over its
/// difference factors `x − y` of `(|x| + |y|)/|x − y|`. A factor whose terms
/// nearly cancel dominates the sum, whichever corner it belongs to.
pub(crate) fn leg_ratio_cond(
    picture: Picture,
    a: usize,
    center: &[Complex64],
    corners: [&[Complex64]; 4],
    alpha: &RapidityPair,
    beta: &RapidityPair,
) -> f64 {
    let n = center.len();
    let pair = |x: Complex64, y: Complex64| (x.norm() + y.norm()) / (x - y).norm().max(f64::MIN_POSITIVE);
    let pairs = [(0, alpha.second, beta.first), (3, alpha.first, beta.second), (1, alpha.second, beta.second), (2, alpha.first, beta.first)];
    let mut cond = 0.0;
    for (c, al, be) in pairs {
        for &q in corners[c] {
            cond += match picture {
                Picture::Hyperbolic => {
                    let y_cap: Complex64 = center[..n - 1].iter().product();
                    pair(al, be * y_cap * q) + pair(al * center[a], be * q)
                }
                Picture::Rational => {
                    let y_cap: Complex64 = center[..n - 1].iter().sum();
                    pair(y_cap + q, al - be) + pair(center[a] - q, be - al)
                }
            };
        }
    }
    cond
}

/// Four-leg ratio `A_a(center; i, j, k, l; α, β)` (0-based `a`) in the picture of `center`.
///
/// ```
/// use multistar::legs::{leg_ratio, LegContext};
/// use multistar::multispin::{Picture, RapidityPair, Var};
/// use num_complex::Complex64;
///
/// let v = |x: f64, y: f64| Var::from_free(Picture::Hyperbolic, &[Complex64::new(x, 0.0), Complex64::new(y, 0.0)]);
/// let ctx = LegContext {
///     alpha: RapidityPair::from_angles(0.9, 0.4),
///     beta: RapidityPair::from_angles(0.2, 0.2), // β₁ = β₂
/// };
/// // y_i = y_j and y_k = y_l make the numerator and denominator equal factor by factor.
/// let (f, p, q) = (v(1.3, 0.7), v(0.8, 1.9), v(2.2, 0.6));
/// let a = leg_ratio(0, &f, [&p, &p, &q, &q], &ctx).unwrap();
/// assert!((a - 1.0).norm() < 1e-14);
/// ```
pub fn leg_ratio(a: usize, center: &Var, corners: [&Var; 4], ctx: &LegContext) -> Result<Complex64> {
    let n = center.n();
    check_index(a, n)?;
    for c in corners {
        if c.n() != n || c.picture() != center.picture() {
            return Err(Error::Domain("leg_ratio: all five variables must share n and picture".into()));
        }
    }
    leg_ratio_raw(
        center.picture(),
        a,
        center.components(),
        [corners[0].components(), corners[1].components(), corners[2].components(), corners[3].components()],
        &ctx.alpha,
        &ctx.beta,
    )
}

/// `ln(sinh x / x) − x²/6`, by its Taylor series near 0 so that small
/// arguments keep full relative accuracy.
fn ln_sinhc_quartic(x: Complex64) -> Complex64 {
    // 2^{2k} B_{2k} / (2k (2k)!) for k = 2..7.
    const C: [f64; 6] = [-1.0 / 180.0, 1.0 / 2835.0, -1.0 / 37800.0, 1.0 / 467_775.0, -691.0 / 3_831_077_250.0, 2.0 / 127_702_575.0];
    let x2 = x * x;
    if x.norm() < 0.1 {
        let mut p = x2 * x2;
        let mut sum = Complex64::new(0.0, 0.0);
        for c in C {
            sum += c * p;
            p *= x2;
        }
        sum
    } else {
        (x.sinh() / x).ln() - x2 / 6.0
    }
}

/// Defect of the rational limit: `A_a(e^{εy}; e^{εα}, e^{εβ}) − A⁽ʳ⁾_a(y; α, β)`
/// for rational-picture data `y`, `α`, `β`, where the exponential is applied
/// componentwise.
///
/// Evaluating the hyperbolic ratio at `e^{εy}` and subtracting loses about
/// `2 log₁₀(1/ε)` digits to cancellation in each factor `e^{εu} − e^{εv}`,
/// while the defect itself vanishes like `ε⁴`; below `ε ≈ 10⁻²` direct
/// subtraction only measures rounding. Here each factor is instead written as
/// `ε(u − v) e^{ε(u+v)/2} sinh(ε(u−v)/2)/(ε(u−v)/2)`; the powers of `ε`, the
/// signs, the exponentials `e^{ε(u+v)/2}` and the centre's `(y_a/Y)^{n/2}`
/// prefactors cancel exactly between the four legs, which leaves
/// `A⁽ʳ⁾ · expm1(Σ ± ln sinhc(ε(u−v)/2))` with `sinhc x = sinh x / x`, whose
/// quadratic terms also cancel identically.
///
/// ```
/// use multistar::legs::{rational_limit_defect, LegContext};
/// use multistar::multispin::{Picture, RapidityPair, Var};
/// use num_complex::Complex64;
///
/// let v = |a: f64, b: f64| Var::from_free(Picture::Rational, &[Complex64::new(a, 0.0), Complex64::new(b, 0.0)]);
/// let (f, i, j, k, l) = (v(0.33, -0.52), v(0.1, 0.7), v(-0.4, 0.2), v(0.6, -0.2), v(-0.1, 0.4));
/// let ctx = LegContext { alpha: RapidityPair::real(0.8, 0.3), beta: RapidityPair::real(0.5, 0.2) };
/// let d1 = rational_limit_defect(0, &f, [&i, &j, &k, &l], &ctx, 2e-3).unwrap();
/// let d2 = rational_limit_defect(0, &f, [&i, &j, &k, &l], &ctx, 1e-3).unwrap();
/// assert!((d2 / d1).norm() < 0.07); // fourth order: 1/16
/// ```
pub fn rational_limit_defect(a: usize, center: &Var, corners: [&Var; 4], ctx: &LegContext, eps: f64) -> Result<Complex64> {
    let n = center.n();
    check_index(a, n)?;
    if center.picture() != Picture::Rational || corners.iter().any(|c| c.picture() != Picture::Rational || c.n() != n) {
        return Err(Error::Domain("rational_limit_defect: expects rational-picture variables sharing n".into()));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain(format!("rational_limit_defect: eps must be positive, got {eps}")));
    }
    let x = center.components();
    let x_cap: Complex64 = x[..n - 1].iter().sum();
    // The linear parts ε(u + v)/2 of one leg sum to nε(X − x_a)/2 whatever the
    // corner, and the quadratic parts (ε(u − v))²/24 of one leg sum to
    // −nε²(X + x_a)(2(α − β) + x_a − X)/24 because the corner components sum
    // to zero; both cancel between the four legs and are left out.
    let term = |u: Complex64, v: Complex64| ln_sinhc_quartic(eps * (u - v) / 2.0);
    let leg_log = |w: &[Complex64], al: Complex64, be: Complex64| {
        w.iter().map(|&q| term(al, be + x_cap + q) - term(al + x[a], be + q)).sum::<Complex64>()
    };
    let (al, be) = (&ctx.alpha, &ctx.beta);
    let log_ratio = leg_log(corners[0].components(), al.second, be.first) + leg_log(corners[3].components(), al.first, be.second)
        - leg_log(corners[1].components(), al.second, be.second)
        - leg_log(corners[2].components(), al.first, be.first);
    let rational = leg_ratio(a, center, corners, ctx)?;
    // expm1 for a complex argument: exp(L) − 1 = 2 e^{L/2} sinh(L/2).
    let expm1 = 2.0 * (log_ratio / 2.0).exp() * (log_ratio / 2.0).sinh();
    finite_or_singular(rational * expm1, "rational_limit_defect: non-finite value")
}

/// Rapidities of the 5-point equations obtained from the saddle point of a
/// star with angles `u = (u₁, u₂)`, `v = (v₁, v₂)`:
/// `α = (e^{iu₁}, −e^{iu₂})`, `β = (e^{iv₁}, −e^{iv₂})`.
///
/// With `shifted = false` the plain map `α = e^{iu}`, `β = e^{iv}` is returned;
/// it does not reproduce the 5-point equations and is kept for negative controls.
pub fn saddle_parameters(u: [f64; 2], v: [f64; 2], shifted: bool) -> (RapidityPair, RapidityPair) {
    let s = if shifted { PI } else { 0.0 };
    (RapidityPair::from_angles(u[0], u[1] + s), RapidityPair::from_angles(v[0], v[1] + s))
}

/// Colour of a star; it decides the edge pattern of the local Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    /// Centre `f` with corners `(i, j, k, l)`.
    Black,
    /// Centre `g` with corners `(i, j, k, l)`.
    White,
}

/// Local Lagrangian of a star: the vertex term of the centre plus its four edges.
///
/// ```text
/// black:  C(x_f) + 𝓛_{u₂−v₁}(x_f,x_i) + 𝓛_{u₁−v₂}(x_f,x_l) + 𝓛̄_{u₂−v₂}(x_j,x_f) + 𝓛̄_{u₁−v₁}(x_k,x_f)
/// white:  C(x_g) + 𝓛_{u₁−v₂}(x_i,x_g) + 𝓛_{u₂−v₁}(x_l,x_g) + 𝓛̄_{u₁−v₁}(x_g,x_j) + 𝓛̄_{u₂−v₂}(x_g,x_k)
/// ```
///
/// Its gradient in the centre gives `log A_a(f; i,j,k,l; α,β)` (black) and
/// `−log A_a(g; i,k,j,l; β,α)` (white), with `α, β` from [`saddle_parameters`].
pub fn star_lagrangian(
    color: Color,
    center: &[Complex64],
    corners: [&[Complex64]; 4],
    u: [f64; 2],
    v: [f64; 2],
) -> Result<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let [xi, xj, xk, xl] = corners;
    match color {
        Color::Black => Ok(c_term_raw(center)
            + lagrangian_raw(c(u[1] - v[0]), center, xi)?
            + lagrangian_raw(c(u[0] - v[1]), center, xl)?
            + lagrangian_bar_raw(c(u[1] - v[1]), xj, center)?
            + lagrangian_bar_raw(c(u[0] - v[0]), xk, center)?),
        Color::White => Ok(c_term_raw(center)
            + lagrangian_raw(c(u[0] - v[1]), xi, center)?
            + lagrangian_raw(c(u[1] - v[0]), xl, center)?
            + lagrangian_bar_raw(c(u[0] - v[0]), center, xj)?
            + lagrangian_bar_raw(c(u[1] - v[1]), center, xk)?),
    }
}

/// Central finite difference of `f` with respect to free component `a`
/// (the last component compensates so the sum stays zero).
pub(crate) fn fd_free<F>(x: &[Complex64], a: usize, h: f64, f: F) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Result<Complex64>,
{
    let n = x.len();
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[a] += h;
    p[n - 1] -= h;
    m[a] -= h;
    m[n - 1] += h;
    Ok((f(&p)? - f(&m)?) / (2.0 * h))
}

fn rel_err(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(1e-300)
}

fn random_real_spin(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let free: Vec<Complex64> = (0..n - 1).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    AdditiveVar::from_free(&free).components().to_vec()
}

fn exp_all(x: &[Complex64]) -> Vec<Complex64> {
    x.iter().map(|z| z.exp()).collect()
}

/// Compare `exp` of central finite differences (step [`tolerances::FD_STEP`])
/// of `𝓛` and `𝓛̄` against the four leg-function expressions, for random real
/// spins and angles with `0 < u − v < π`. Returns the largest relative error.
///
/// ```
/// let err = multistar::legs::verify_phi_derivative(1, 2, 5).unwrap();
/// assert!(err < 1e-6);
/// ```
pub fn verify_phi_derivative(seed: u64, n: usize, trials: usize) -> Result<f64> {
    if trials == 0 || n < 2 {
        return Err(Error::Domain("verify_phi_derivative needs trials >= 1 and n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = tolerances::FD_STEP;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let xi = random_real_spin(&mut rng, n);
        let xj = random_real_spin(&mut rng, n);
        let v: f64 = rng.gen_range(0.0..1.5);
        let theta: f64 = rng.gen_range(0.1..PI - 0.1);
        let u = v + theta;
        let (al, be) = (Complex64::from_polar(1.0, u), Complex64::from_polar(1.0, v));
        let th = Complex64::new(theta, 0.0);
        let (yi, yj) = (exp_all(&xi), exp_all(&xj));
        for a in 0..n - 1 {
            let d1 = fd_free(&xi, a, h, |x| lagrangian_raw(th, x, &xj))?.exp();
            let d2 = fd_free(&xi, a, h, |x| lagrangian_bar_raw(th, x, &xj))?.exp();
            let d3 = fd_free(&xi, a, h, |x| lagrangian_raw(th, &xj, x))?.exp();
            let d4 = fd_free(&xi, a, h, |x| lagrangian_bar_raw(th, &xj, x))?.exp();
            worst = worst
                .max(rel_err(d1, phi_raw(a, &yi, &yj, al, -be)?))
                .max(rel_err(d2, phi_raw(a, &yi, &yj, be, al)?))
                .max(rel_err(d3, 1.0 / phi_raw(a, &yi, &yj, be, -al)?))
                .max(rel_err(d4, 1.0 / phi_raw(a, &yi, &yj, al, be)?));
        }
    }
    Ok(worst)
}

/// Largest relative error between `exp ∂(star Lagrangian)` and the 5-point
/// ratio over random real stars; shared by the saddle-point bridge check.
pub(crate) fn star_derivative_error(seed: u64, n: usize, trials: usize, shifted: bool) -> Result<f64> {
    if trials == 0 || n < 2 {
        return Err(Error::Domain("star derivative check needs trials >= 1 and n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = tolerances::FD_STEP;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        // Angles with every difference u_a − v_b inside (0, π).
        let v: [f64; 2] = [rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5)];
        let vmax = v[0].max(v[1]);
        let u = [vmax + rng.gen_range(0.1..0.6), vmax + rng.gen_range(0.1..0.6)];
        let (al, be) = saddle_parameters(u, v, shifted);
        let xs: Vec<Vec<Complex64>> = (0..5).map(|_| random_real_spin(&mut rng, n)).collect();
        let ys: Vec<Vec<Complex64>> = xs.iter().map(|x| exp_all(x)).collect();
        let corners = [&xs[1][..], &xs[2][..], &xs[3][..], &xs[4][..]];
        let ycorners = [&ys[1][..], &ys[2][..], &ys[3][..], &ys[4][..]];
        let ywhite = [&ys[1][..], &ys[3][..], &ys[2][..], &ys[4][..]];
        for a in 0..n - 1 {
            let db = fd_free(&xs[0], a, h, |x| star_lagrangian(Color::Black, x, corners, u, v))?.exp();
            let ab = leg_ratio_raw(Picture::Hyperbolic, a, &ys[0], ycorners, &al, &be)?;
            let dw = fd_free(&xs[0], a, h, |x| star_lagrangian(Color::White, x, corners, u, v))?.exp();
            let aw = 1.0 / leg_ratio_raw(Picture::Hyperbolic, a, &ys[0], ywhite, &be, &al)?;
            worst = worst.max(rel_err(db, ab)).max(rel_err(dw, aw));
        }
    }
    Ok(worst)
}
