//! Hyperbolic Boltzmann weights and a direct numerical check of the
//! star-star relation.
//!
//! Spins are real n-component vectors `ξ` with `Σ_a ξ_a = 0` ([`SpinVar`]).
//! The weights are
//!
//! * vertex: `S(ξ) = Π_{a<b} 4 sinh(π(ξ_a − ξ_b)/b) sinh(π b(ξ_a − ξ_b))`;
//! * edge: `W_θ(ξ_i, ξ_j) = Π_{a,b} Γ_h(ξ_{i,a} − ξ_{j,b} + iθ)` and
//!   `W̄_θ = W_{η−θ}`.
//!
//! The interaction-round-a-face weights integrate one interior spin against
//! four edges:
//!
//! * `V^{(B)} = ∫ dξ S(ξ) W_{p₂−q₁}(ξ, ξ_i) W̄_{p₂−q₂}(ξ_j, ξ) W̄_{p₁−q₁}(ξ_k, ξ) W_{p₁−q₂}(ξ, ξ_l)`;
//! * `V^{(W)} = ∫ dξ S(ξ) W_{p₁−q₂}(ξ_i, ξ) W̄_{p₁−q₁}(ξ, ξ_j) W̄_{p₂−q₂}(ξ, ξ_k) W_{p₂−q₁}(ξ_l, ξ)`.
//!
//! The integration runs over the n − 1 free components of `ξ`. The
//! star-star relation states
//! `W_{p₁−p₂}(ξ_i, ξ_k) W_{q₁−q₂}(ξ_i, ξ_j) V^{(B)} = W_{p₁−p₂}(ξ_j, ξ_l) W_{q₁−q₂}(ξ_k, ξ_l) V^{(W)}`
//! whenever `0 < p_a − q_b < η`.
//!
//! ```
//! use multistar::multispin::SpinVar;
//! use multistar::quadrature::weight_s;
//! use multistar::special_fn::HyperbolicParams;
//!
//! let hp = HyperbolicParams::new(1.0).unwrap();
//! let t: f64 = 0.3;
//! let s = weight_s(&SpinVar::from_free(&[t]), &hp);
//! let pi = std::f64::consts::PI;
//! assert!((s - 4.0 * (2.0 * pi * t).sinh().powi(2)).abs() < 1e-12);
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legs::star_derivative_error;
use crate::multispin::SpinVar;
use crate::quad::{integrate_par, QuadOptions};
use crate::special_fn::{log_extend_hyp_gamma, HyperbolicParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Modulus and rapidities of the star-star relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    /// Modulus of `Γ_h`.
    pub hyper: HyperbolicParams,
    /// Rapidities `p = (p₁, p₂)`.
    pub p: [f64; 2],
    /// Rapidities `q = (q₁, q₂)`.
    pub q: [f64; 2],
}

impl WeightParams {
    /// Build and check `0 < p_a − q_b < η` for all `a, b`.
    pub fn new(hyper: HyperbolicParams, p: [f64; 2], q: [f64; 2]) -> Result<Self> {
        let wp = Self { hyper, p, q };
        wp.validate()?;
        Ok(wp)
    }

    /// Check the domain `0 < p_a − q_b < η`.
    pub fn validate(&self) -> Result<()> {
        let eta = self.hyper.eta();
        for a in 0..2 {
            for b in 0..2 {
                let d = self.p[a] - self.q[b];
                if !(d > 0.0 && d < eta) {
                    return Err(Error::Domain(format!(
                        "p{} − q{} = {d} lies outside (0, η = {eta})",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Truncation and accuracy of the interior-spin integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Initial truncation radius of each free component, in units of `η`.
    pub radius_eta: f64,
    /// Target relative error of an integral (quadrature plus tail).
    pub rel_tol: f64,
    /// Maximum number of panels of each one-dimensional adaptive rule.
    pub max_panels: usize,
    /// Largest radius (in units of `η`) the tail control may double to.
    pub max_radius_eta: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { radius_eta: 6.0, rel_tol: 1e-7, max_panels: 2000, max_radius_eta: 48.0 }
    }
}

impl QuadratureConfig {
    /// Looser settings for the two-dimensional (n = 3) integrals.
    pub fn expensive() -> Self {
        Self { rel_tol: 1e-4, max_panels: 400, ..Self::default() }
    }

    /// Reject non-positive radii and tolerances.
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_eta > 0.0 && self.max_radius_eta >= self.radius_eta && self.rel_tol > 0.0 && self.max_panels > 0) {
            return Err(Error::Config(format!("invalid quadrature configuration {self:?}")));
        }
        Ok(())
    }
}

/// `log Γ_h(z)`, using the large-`|Re z|` asymptotics
/// `±iπ(z²/2 + (b² + b⁻²)/24)` once their exponentially small error,
/// about `2(1 + |Re z|) e^{−2π min(b, 1/b) |Re z|}`, is below 1e-14.
fn log_gh(z: Complex64, hp: &HyperbolicParams) -> Result<Complex64> {
    let b = hp.b();
    let m = b.min(1.0 / b);
    let x = z.re.abs();
    if z.im.abs() < hp.eta() && 2.0 * (1.0 + x) * (-2.0 * PI * m * x).exp() < 1e-14 {
        let s = z.re.signum();
        return Ok(s * I * PI * (z * z / 2.0 + (b * b + 1.0 / (b * b)) / 24.0));
    }
    log_extend_hyp_gamma(z, hp)
}

/// Vertex weight `S(ξ) = Π_{a<b} 4 sinh(π(ξ_a − ξ_b)/b) sinh(π b (ξ_a − ξ_b))`.
pub fn weight_s(xi: &SpinVar, hp: &HyperbolicParams) -> f64 {
    let b = hp.b();
    let x = xi.components();
    let mut s = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = x[i] - x[j];
            s *= 4.0 * (PI * d / b).sinh() * (PI * b * d).sinh();
        }
    }
    s
}

/// `S(ξ)` from the gamma-function form `Π_{a≠b} 1/Γ_h(ξ_a − ξ_b + iη)`,
/// an independent cross-check of [`weight_s`]. Equal components hit a pole
/// of the extended `Γ_h` and are reported as [`Error::Pole`].
pub fn weight_s_gamma(xi: &SpinVar, hp: &HyperbolicParams) -> Result<Complex64> {
    let x = xi.components();
    let mut l = Complex64::new(0.0, 0.0);
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i != j {
                l -= log_extend_hyp_gamma(Complex64::new(x[i] - x[j], hp.eta()), hp)?;
            }
        }
    }
    Ok(l.exp())
}

fn check_pair(xi: &SpinVar, xj: &SpinVar) -> Result<()> {
    if xi.n() != xj.n() {
        return Err(Error::Domain(format!("spins with {} and {} components", xi.n(), xj.n())));
    }
    Ok(())
}

fn log_w(theta: f64, xi: &[f64], xj: &[f64], hp: &HyperbolicParams) -> Result<Complex64> {
    let mut l = Complex64::new(0.0, 0.0);
    for &p in xi {
        for &q in xj {
            l += log_gh(Complex64::new(p - q, theta), hp)?;
        }
    }
    Ok(l)
}

/// Edge weight `W_θ(ξ_i, ξ_j) = Π_{a,b} Γ_h(ξ_{i,a} − ξ_{j,b} + iθ)`.
///
/// ```
/// use multistar::multispin::SpinVar;
/// use multistar::quadrature::weight_w;
/// use multistar::special_fn::HyperbolicParams;
///
/// let hp = HyperbolicParams::new(1.0).unwrap();
/// let (x, y) = (SpinVar::from_free(&[0.4]), SpinVar::from_free(&[-0.2]));
/// // Reflection: W_θ(ξ_i, ξ_j) W_{−θ}(ξ_j, ξ_i) = 1.
/// let r = weight_w(0.3, &x, &y, &hp).unwrap() * weight_w(-0.3, &y, &x, &hp).unwrap();
/// assert!((r - 1.0).norm() < 1e-8);
/// ```
pub fn weight_w(theta: f64, xi: &SpinVar, xj: &SpinVar, hp: &HyperbolicParams) -> Result<Complex64> {
    check_pair(xi, xj)?;
    Ok(log_w(theta, xi.components(), xj.components(), hp)?.exp())
}

/// Conjugate edge weight `W̄_θ = W_{η−θ}`.
pub fn weight_wbar(theta: f64, xi: &SpinVar, xj: &SpinVar, hp: &HyperbolicParams) -> Result<Complex64> {
    weight_w(hp.eta() - theta, xi, xj, hp)
}

/// The two face weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IrfKind {
    /// `V^{(B)}`, interior spin on a black site.
    B,
    /// `V^{(W)}`, interior spin on a white site.
    W,
}

/// Boundary spins `ξ_i, ξ_j, ξ_k, ξ_l` of a face.
pub type Boundary = [SpinVar; 4];

/// Value of a face weight with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrfValue {
    /// The integral.
    pub value: Complex64,
    /// Estimated absolute error (quadrature plus truncated tail).
    pub error: f64,
    /// Final truncation radius of each free component.
    pub radius: f64,
}

/// `log` of the integrand without `S`, for interior spin components `f`.
fn log_edges(kind: IrfKind, f: &[f64], bd: &Boundary, wp: &WeightParams) -> Result<Complex64> {
    let hp = &wp.hyper;
    let eta = hp.eta();
    let ([p1, p2], [q1, q2]) = (wp.p, wp.q);
    let c = |s: &SpinVar| s.components().to_vec();
    let (i, j, k, l) = (c(&bd[0]), c(&bd[1]), c(&bd[2]), c(&bd[3]));
    Ok(match kind {
        IrfKind::B => {
            log_w(p2 - q1, f, &i, hp)? + log_w(eta - (p2 - q2), &j, f, hp)? + log_w(eta - (p1 - q1), &k, f, hp)? + log_w(p1 - q2, f, &l, hp)?
        }
        IrfKind::W => {
            log_w(p1 - q2, &i, f, hp)? + log_w(eta - (p1 - q1), f, &j, hp)? + log_w(eta - (p2 - q2), f, &k, hp)? + log_w(p2 - q1, &l, f, hp)?
        }
    })
}

fn integrand(kind: IrfKind, free: &[f64], bd: &Boundary, wp: &WeightParams) -> Result<Complex64> {
    let xi = SpinVar::from_free(free);
    let s = weight_s(&xi, &wp.hyper);
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // S ≥ 0 on real spins; combine in log space to avoid overflow.
    Ok((s.ln() + log_edges(kind, xi.components(), bd, wp)?).exp())
}

/// Integrate `g` over `[−r, r]`, recording the first integrand error.
fn integrate_line<G>(g: G, r: f64, opts: &QuadOptions) -> Result<(Complex64, f64)>
where
    G: Fn(f64) -> Result<Complex64> + Sync,
{
    let failure = std::sync::Mutex::new(None::<Error>);
    let res = integrate_par(
        |t| match g(t) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("no panics while holding the lock").get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        -r,
        r,
        opts,
    );
    if let Some(e) = failure.into_inner().expect("no panics while holding the lock") {
        return Err(e);
    }
    let res = res?;
    Ok((res.value, res.error))
}

/// `|F(±r)|/κ` summed over both ends, with the decay rate κ of `|F|` measured
/// over the last unit of length; infinite when `|F|` does not decay.
fn tail_estimate<G: Fn(f64) -> Result<f64>>(g: G, r: f64) -> Result<f64> {
    let mut tail = 0.0;
    for s in [-1.0, 1.0] {
        let (outer, inner) = (g(s * r)?, g(s * (r - 1.0))?);
        if outer == 0.0 {
            continue;
        }
        let kappa = (inner / outer).ln();
        if !(kappa > 0.0) {
            return Ok(f64::INFINITY);
        }
        tail += outer / kappa;
    }
    Ok(tail)
}

/// Face weight `V^{(B)}` or `V^{(W)}` by adaptive quadrature over the n − 1
/// free components of the interior spin.
///
/// Each component is integrated over `[−R, R]`, starting from
/// `R = radius_eta · η`. After each pass the neglected tail is estimated
/// from the exponential decay of the integrand at the boundary; `R` is
/// doubled until that estimate is below the target. n = 2 is a
/// one-dimensional integral; n = 3 nests two (slow; see
/// [`QuadratureConfig::expensive`]).
pub fn irf_weight(kind: IrfKind, boundary: &Boundary, wp: &WeightParams, qc: &QuadratureConfig) -> Result<IrfValue> {
    wp.validate()?;
    qc.validate()?;
    let n = boundary[0].n();
    if boundary.iter().any(|s| s.n() != n) {
        return Err(Error::Domain("boundary spins must have equal n".into()));
    }
    let eta = wp.hyper.eta();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 0.5 * qc.rel_tol, max_panels: qc.max_panels };
    let mut r = qc.radius_eta * eta;
    loop {
        let (value, error, tail) = match n {
            2 => {
                let f = |t: f64| integrand(kind, &[t], boundary, wp);
                let (v, e) = integrate_line(f, r, &opts)?;
                (v, e, tail_estimate(|t| f(t).map(|z| z.norm()), r)?)
            }
            3 => {
                let inner_opts = QuadOptions { rel_tol: 0.25 * qc.rel_tol, ..opts };
                let inner = |t1: f64| -> Result<Complex64> {
                    let mut v = Complex64::new(0.0, 0.0);
                    let res = crate::quad::integrate(
                        |t2| match integrand(kind, &[t1, t2], boundary, wp) {
                            Ok(z) => z,
                            Err(_) => Complex64::new(f64::NAN, 0.0),
                        },
                        -r,
                        r,
                        &inner_opts,
                    )?;
                    v += res.value;
                    Ok(v)
                };
                let (v, e) = integrate_line(inner, r, &opts)?;
                // Decay along both axes and the diagonal ξ₃ direction.
                let t1 = tail_estimate(|t| integrand(kind, &[t, 0.0], boundary, wp).map(|z| z.norm()), r)?;
                let t2 = tail_estimate(|t| integrand(kind, &[0.0, t], boundary, wp).map(|z| z.norm()), r)?;
                let t3 = tail_estimate(|t| integrand(kind, &[t, -t], boundary, wp).map(|z| z.norm()), r)?;
                (v, e, 2.0 * r * (t1 + t2 + t3))
            }
            _ => return Err(Error::Domain(format!("face weights are implemented for n = 2 and n = 3, got n = {n}"))),
        };
        let target = 0.5 * qc.rel_tol * value.norm();
        if tail <= target {
            return Ok(IrfValue { value, error: error + tail, radius: r });
        }
        if 2.0 * r > qc.max_radius_eta * eta {
            return Err(Error::Accuracy { estimate_re: value.re, estimate_im: value.im, error: error + tail });
        }
        r *= 2.0;
    }
}

/// Both sides of the star-star relation and their relative difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarStar {
    /// `W_{p₁−p₂}(ξ_i, ξ_k) W_{q₁−q₂}(ξ_i, ξ_j) V^{(B)}`.
    pub lhs: Complex64,
    /// `W_{p₁−p₂}(ξ_j, ξ_l) W_{q₁−q₂}(ξ_k, ξ_l) V^{(W)}`.
    pub rhs: Complex64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`.
    pub residual: f64,
    /// Estimated relative quadrature error of the two sides combined.
    pub error: f64,
}

/// Evaluate both sides of the star-star relation.
pub fn star_star_residual(boundary: &Boundary, wp: &WeightParams, qc: &QuadratureConfig) -> Result<StarStar> {
    wp.validate()?;
    let hp = &wp.hyper;
    let [i, j, k, l] = boundary;
    let vb = irf_weight(IrfKind::B, boundary, wp, qc)?;
    let vw = irf_weight(IrfKind::W, boundary, wp, qc)?;
    let (dp, dq) = (wp.p[0] - wp.p[1], wp.q[0] - wp.q[1]);
    let lhs = weight_w(dp, i, k, hp)? * weight_w(dq, i, j, hp)? * vb.value;
    let rhs = weight_w(dp, j, l, hp)? * weight_w(dq, k, l, hp)? * vw.value;
    let scale = lhs.norm().max(rhs.norm());
    Ok(StarStar {
        lhs,
        rhs,
        residual: (lhs - rhs).norm() / scale,
        error: vb.error / vb.value.norm() + vw.error / vw.value.norm(),
    })
}

/// Quasi-classical bridge: largest relative error between the exponentials
/// of finite-difference derivatives of the black/white star Lagrangians and
/// the 5-point ratios `A_a(y_f; …; α, β)` and `A_a(y_g; …; β, α)⁻¹` over
/// `trials` random real stars, with the rapidities
/// `α = (e^{iu₁}, −e^{iu₂})`, `β = (e^{iv₁}, −e^{iv₂})`.
pub fn saddle_bridge_check(n: usize, seed: u64, trials: usize) -> Result<f64> {
    star_derivative_error(seed, n, trials, true)
}

/// [`saddle_bridge_check`] with the sign shift of the second rapidities
/// removed, i.e. `α = e^{iu}`, `β = e^{iv}` componentwise. This variant is
/// expected to fail; it guards the shift.
pub fn saddle_bridge_check_unshifted(n: usize, seed: u64, trials: usize) -> Result<f64> {
    star_derivative_error(seed, n, trials, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::log_hyp_gamma;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hp(b: f64) -> HyperbolicParams {
        HyperbolicParams::new(b).unwrap()
    }

    fn spins(seed: u64, n: usize) -> Boundary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        std::array::from_fn(|_| SpinVar::from_free(&(0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
    }

    #[test]
    fn asymptotic_branch_agrees_with_the_integral() {
        for b in [0.5, 1.0, 1.7] {
            let h = hp(b);
            let m = b.min(1.0 / b);
            // Just past the switch-over the fast branch is taken.
            let x = (1..200).map(|k| k as f64 * 0.1).find(|&x| 2.0 * (1.0 + x) * (-2.0 * PI * m * x).exp() < 1e-14).unwrap();
            for s in [-1.0, 1.0] {
                for im in [0.0, 0.5 * h.eta(), 0.9 * h.eta()] {
                    let z = Complex64::new(s * x, im);
                    let d = (log_gh(z, &h).unwrap() - log_hyp_gamma(z, &h).unwrap()).norm();
                    assert!(d < 1e-10, "b {b}, z {z}: {d:e}");
                }
            }
        }
    }

    #[test]
    fn vertex_weight_forms_agree() {
        for b in [0.7, 1.0, 1.4] {
            let h = hp(b);
            for n in [2, 3] {
                for seed in 0..5 {
                    let xi = &spins(seed, n)[0];
                    let s = weight_s(xi, &h);
                    let g = weight_s_gamma(xi, &h).unwrap();
                    assert!((g - s).norm() < 1e-8 * s.abs().max(1.0), "b {b} n {n}: {s} vs {g}");
                }
            }
        }
        let h = hp(1.0);
        assert_eq!(weight_s(&SpinVar::new(vec![0.5, 0.5, -1.0]).unwrap(), &h), 0.0);
        let t: f64 = 0.37;
        let direct = 4.0 * (2.0 * PI * t / 1.3).sinh() * (2.0 * PI * t * 1.3).sinh();
        assert!((weight_s(&SpinVar::from_free(&[t]), &hp(1.3)) - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn edge_weight_identities() {
        let h = hp(1.2);
        for n in [2, 3] {
            let [x, y, _, _] = spins(3, n);
            for theta in [0.2, 0.6, 0.9] {
                let r = weight_w(theta, &x, &y, &h).unwrap() * weight_w(-theta, &y, &x, &h).unwrap();
                assert!((r - 1.0).norm() < 1e-8);
            }
            let mid = 0.5 * h.eta();
            assert_eq!(weight_w(mid, &x, &y, &h).unwrap(), weight_wbar(mid, &x, &y, &h).unwrap());
        }
        // Factorwise oracle at n = 2.
        let (x, y) = (SpinVar::from_free(&[0.3]), SpinVar::from_free(&[-0.45]));
        let mut prod = Complex64::new(1.0, 0.0);
        for &p in x.components() {
            for &q in y.components() {
                prod *= log_hyp_gamma(Complex64::new(p - q, 0.4), &h).unwrap().exp();
            }
        }
        assert!((weight_w(0.4, &x, &y, &h).unwrap() - prod).norm() < 1e-10 * prod.norm());
        assert!(weight_w(0.4, &x, &SpinVar::from_free(&[0.1, 0.2]), &h).is_err());
    }

    #[test]
    fn domain_gate() {
        let h = hp(1.0);
        assert!(WeightParams::new(h, [0.7, 0.5], [0.1, 0.0]).is_ok());
        assert!(WeightParams::new(h, [1.2, 0.5], [0.1, 0.0]).is_err());
        assert!(WeightParams::new(h, [0.7, 0.05], [0.1, 0.0]).is_err());
        assert!(QuadratureConfig { rel_tol: 0.0, ..QuadratureConfig::default() }.validate().is_err());
    }

    #[test]
    fn integrand_decays_at_the_default_radius() {
        let wp = WeightParams::new(hp(1.0), [0.7, 0.5], [0.1, 0.0]).unwrap();
        let bd = spins(0, 2);
        let r = QuadratureConfig::default().radius_eta * wp.hyper.eta();
        for kind in [IrfKind::B, IrfKind::W] {
            let peak = (0..41).map(|k| integrand(kind, &[-2.0 + 0.1 * k as f64], &bd, &wp).unwrap().norm()).fold(0.0, f64::max);
            for t in [-r, r] {
                let edge = integrand(kind, &[t], &bd, &wp).unwrap().norm();
                assert!(edge / peak < 1e-10, "{kind:?} at {t}: {:e}", edge / peak);
            }
        }
    }

    #[test]
    fn star_star_holds_at_n2() {
        let wp = WeightParams::new(hp(1.0), [0.7, 0.5], [0.1, 0.0]).unwrap();
        let bd = spins(0, 2);
        let ss = star_star_residual(&bd, &wp, &QuadratureConfig::default()).unwrap();
        assert!(ss.residual < 1e-6, "{ss:?}");
        // Pairing the two sides at mismatched rapidities breaks it.
        let other = WeightParams::new(hp(1.0), [0.7, 0.5], [0.15, 0.0]).unwrap();
        let rhs = star_star_residual(&bd, &other, &QuadratureConfig::default()).unwrap().rhs;
        assert!((ss.lhs - rhs).norm() / ss.lhs.norm() > 1e-3);
    }

    #[test]
    fn irf_weight_is_stable_under_larger_radius() {
        let wp = WeightParams::new(hp(1.0), [0.7, 0.5], [0.1, 0.0]).unwrap();
        let bd = spins(2, 2);
        let a = irf_weight(IrfKind::B, &bd, &wp, &QuadratureConfig::default()).unwrap();
        let b = irf_weight(IrfKind::B, &bd, &wp, &QuadratureConfig { radius_eta: 9.0, ..QuadratureConfig::default() }).unwrap();
        assert!((a.value - b.value).norm() < 1e-7 * a.value.norm());
    }

    #[test]
    fn bridge_and_guard() {
        for n in [2, 3] {
            assert!(saddle_bridge_check(n, 1, 30).unwrap() < 1e-5);
            assert!(saddle_bridge_check_unshifted(n, 1, 30).unwrap() > 1e-2);
        }
        assert!(saddle_bridge_check(2, 0, 0).is_err());
    }

    #[test]
    #[ignore = "two-dimensional quadrature; takes minutes"]
    fn star_star_holds_at_n3() {
        let wp = WeightParams::new(hp(1.0), [0.7, 0.5], [0.1, 0.0]).unwrap();
        let ss = star_star_residual(&spins(0, 3), &wp, &QuadratureConfig::expensive()).unwrap();
        assert!(ss.residual < 1e-3, "{ss:?}");
    }
}
