//! Complex dilogarithm and the hyperbolic gamma function.
//!
//! | Function | Description |
//! |----------|-------------|
//! | [`dilog`] | Principal-branch Li₂(z), cut on [1, ∞) |
//! | [`log_hyp_gamma`] / [`hyp_gamma`] | Γ_h(z; b) from its integral representation on the strip \|Im z\| < η |
//! | [`log_extend_hyp_gamma`] / [`extend_hyp_gamma`] | meromorphic continuation by the difference equations |
//! | [`qc_leading_log`] | leading ħ → 0 term of log Γ_h(z/(2πb)) |
//!
//! The hyperbolic gamma function is
//!
//! ```text
//! Γ_h(z) = exp( ∫₀^∞ dx/x [ iz/x − sinh(2izx) / (2 sinh(bx) sinh(x/b)) ] ),   |Im z| < η = (b + 1/b)/2
//! ```
//!
//! and satisfies the inversion relation Γ_h(z)Γ_h(−z) = 1 together with the
//! two difference equations
//!
//! ```text
//! Γ_h(z − ib)  / Γ_h(z) = 2 cosh(π b (2z − ib) / 2)
//! Γ_h(z − i/b) / Γ_h(z) = 2 cosh(π (2z − i/b) / (2b))
//! ```
//!
//! # Example
//!
//! ```
//! use multistar::special_fn::{hyp_gamma, HyperbolicParams};
//! use num_complex::Complex64;
//!
//! let hp = HyperbolicParams::new(1.0).unwrap();
//! let z = Complex64::new(0.2, 0.0);
//! let prod = hyp_gamma(z, &hp).unwrap() * hyp_gamma(-z, &hp).unwrap();
//! assert!((prod - 1.0).norm() < 1e-10);
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::tolerances;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The modulus `b > 0` of the hyperbolic gamma function and its crossing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicParams {
    b: f64,
    eta: f64,
}

impl HyperbolicParams {
    /// Build from `b`, which must be finite and positive.
    pub fn new(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("modulus b must be positive, got {b}")));
        }
        Ok(Self { b, eta: 0.5 * (b + 1.0 / b) })
    }

    /// The modulus `b`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// The crossing parameter `η = (b + 1/b)/2 ≥ 1`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// The quasi-classical parameter `ħ = 2π b²` belonging to this modulus.
    pub fn qc(&self) -> QcParams {
        QcParams { hbar: 2.0 * PI * self.b * self.b }
    }
}

/// Quasi-classical expansion parameter `ħ = 2π b²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcParams {
    hbar: f64,
}

impl QcParams {
    /// Build from `ħ > 0`.
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { hbar })
    }

    /// The value of `ħ`.
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// The modulus `b = sqrt(ħ / 2π)`.
    pub fn b(&self) -> f64 {
        (self.hbar / (2.0 * PI)).sqrt()
    }
}

// B_{2k} / (2k+1)! for k = 1..20.
const DILOG_COEFFS: [f64; 20] = [
    2.777_777_777_777_777_62e-02,
    -2.777_777_777_777_777_78e-04,
    4.724_111_866_969_009_78e-06,
    -9.185_773_074_661_964_08e-08,
    1.897_886_998_897_100_05e-09,
    -4.064_761_645_144_225_60e-11,
    8.921_691_020_456_452_30e-13,
    -1.993_929_586_072_107_44e-14,
    4.518_980_029_619_918_25e-16,
    -1.035_651_761_218_124_72e-17,
    2.395_218_621_026_186_98e-19,
    -5.581_785_874_325_008_98e-21,
    1.309_150_755_418_321_25e-22,
    -3.087_419_802_426_740_29e-24,
    7.315_975_652_702_202_93e-26,
    -1.740_845_657_234_000_88e-27,
    4.157_635_644_613_899_88e-29,
    -9.962_148_488_284_621_68e-31,
    2.394_034_424_896_165_22e-32,
    -5.768_347_355_367_389_70e-34,
];

/// Bernoulli series in `u = −ln(1 − z)`, accurate for |z| ≤ 1 and Re z ≤ 1/2.
fn dilog_core(z: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - z).ln();
    let u2 = u * u;
    let mut term = u * u2;
    let mut sum = u - 0.25 * u2;
    for c in DILOG_COEFFS {
        let t = term * c;
        sum += t;
        if t.norm() <= 1e-17 * sum.norm() {
            break;
        }
        term *= u2;
    }
    sum
}

/// Principal-branch dilogarithm `Li₂(z) = Σ_{k≥1} z^k / k²`, analytically continued.
///
/// Real arguments `z ≥ 1` lie on the branch cut and are rejected.
///
/// ```
/// use multistar::special_fn::dilog;
/// use num_complex::Complex64;
/// use std::f64::consts::PI;
///
/// let v = dilog(Complex64::new(-1.0, 0.0)).unwrap();
/// assert!((v.re + PI * PI / 12.0).abs() < 1e-14);
/// assert!(dilog(Complex64::new(2.0, 0.0)).is_err());
/// ```
pub fn dilog(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("dilog of non-finite argument {z}")));
    }
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(Error::Domain(format!("dilog argument {z} lies on the branch cut [1, inf)")));
    }
    if z.norm_sqr() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    let pi2_6 = PI * PI / 6.0;
    if z.norm() > 1.0 {
        // Inversion: Li₂(z) = −Li₂(1/z) − π²/6 − ½ ln²(−z).
        let w = one / z;
        let lw = (-z).ln();
        return Ok(-dilog_unit(w) - pi2_6 - 0.5 * lw * lw);
    }
    Ok(dilog_unit(z))
}

/// Li₂ on the closed unit disk (excluding z = 1).
fn dilog_unit(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if z.re > 0.5 {
        // Reflection: Li₂(z) = −Li₂(1−z) + π²/6 − ln z ln(1−z).
        let w = one - z;
        if w.norm_sqr() == 0.0 {
            return Complex64::new(PI * PI / 6.0, 0.0);
        }
        return -dilog_core(w) + PI * PI / 6.0 - z.ln() * w.ln();
    }
    dilog_core(z)
}

/// Coefficients of the small-x expansion `c₀ + c₂x² + c₄x⁴` of the combined integrand.
fn small_x_coeffs(z: Complex64, b: f64) -> [Complex64; 3] {
    let iz = I * z;
    let z2 = z * z;
    let (b2, b4, b6, b8, b10, b12) = (b * b, b.powi(4), b.powi(6), b.powi(8), b.powi(10), b.powi(12));
    let c0 = iz * (b4 + 4.0 * b2 * z2 + 1.0) / (6.0 * b2);
    let c2 = -iz * (7.0 * b8 + 40.0 * b6 * z2 + 48.0 * b4 * z2 * z2 + 10.0 * b4 + 40.0 * b2 * z2 + 7.0) / (360.0 * b4);
    let z4 = z2 * z2;
    let z6 = z4 * z2;
    let c4 = iz
        * (31.0 * b12 + 196.0 * b10 * z2 + 336.0 * b8 * z4 + 49.0 * b8 + 192.0 * b6 * z6 + 280.0 * b6 * z2 + 336.0 * b4 * z4
            + 49.0 * b4
            + 196.0 * b2 * z2
            + 31.0)
        / (15120.0 * b6);
    [c0, c2, c4]
}

/// `log Γ_h(z; b)` from the integral representation, valid for |Im z| < η.
///
/// The integral is split into a Taylor-expanded piece on `(0, x₀]` (removable
/// singularity), an adaptive Gauss–Kronrod piece on `[x₀, X]`, and the exact
/// `iz/X` tail of the `iz/x²` term; `X` is chosen so the remaining
/// exponentially small tail is below [`tolerances::HYP_GAMMA_TAIL`].
pub fn log_hyp_gamma(z: Complex64, hp: &HyperbolicParams) -> Result<Complex64> {
    let (b, eta) = (hp.b, hp.eta);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("hyp_gamma of non-finite argument {z}")));
    }
    let gap = eta - z.im.abs();
    if gap <= 0.0 {
        return Err(Error::Domain(format!(
            "hyp_gamma argument {z} outside the strip |Im z| < {eta}; use extend_hyp_gamma"
        )));
    }
    if z.norm_sqr() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let x0 = 1e-2 * b.min(1.0 / b).min(1.0) / z.norm().max(1.0);
    let [c0, c2, c4] = small_x_coeffs(z, b);
    let head = c0 * x0 + c2 * x0.powi(3) / 3.0 + c4 * x0.powi(5) / 5.0;

    // Tail of the sinh term is bounded by ~ 4 e^{−2·gap·x}/x (1 − e^{−2bx})⁻¹(1 − e^{−2x/b})⁻¹.
    let rate = 2.0 * gap;
    let mut x_max = (x0 * 2.0).max(1.0);
    loop {
        let pref = 4.0 / ((1.0 - (-2.0 * b * x_max).exp()) * (1.0 - (-2.0 * x_max / b).exp()));
        let bound = pref * (-rate * x_max).exp() / (rate * x_max);
        if bound < tolerances::HYP_GAMMA_TAIL || x_max > 1e6 {
            break;
        }
        x_max *= 1.25;
    }
    let iz = I * z;
    let two_iz = 2.0 * iz;
    // sinh(2izx) / (2 sinh(bx) sinh(x/b)) with the growth e^{2ηx} divided out
    // of numerator and denominator, so large x neither overflows nor cancels.
    let f = |x: f64| {
        let den = (-2.0 * b * x).exp_m1() * (-2.0 * x / b).exp_m1();
        let num = (two_iz * x - 2.0 * eta * x).exp() - (-two_iz * x - 2.0 * eta * x).exp();
        (iz / x - num / den) / x
    };
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-14, max_panels: 20_000 };
    let body = integrate(f, x0, x_max, &opts).or_else(|e| match e {
        Error::Accuracy { estimate_re, estimate_im, error } if error < tolerances::HYP_GAMMA_LOG => {
            Ok(crate::quad::QuadResult { value: Complex64::new(estimate_re, estimate_im), error, evaluations: 0 })
        }
        other => Err(other),
    })?;
    Ok(head + body.value + iz / x_max)
}

/// `Γ_h(z; b)` on the strip |Im z| < η; see [`log_hyp_gamma`].
pub fn hyp_gamma(z: Complex64, hp: &HyperbolicParams) -> Result<Complex64> {
    log_hyp_gamma(z, hp).map(|l| l.exp())
}

/// Logarithm of `2 cosh(w)` with a check that the factor is not (numerically) zero.
fn log_two_cosh(w: Complex64) -> (Complex64, f64) {
    let c = 2.0 * w.cosh();
    (c.ln(), c.norm())
}

/// Shift period and the matching cosh argument for `Γ_h(w − i m)/Γ_h(w)`.
fn shift_factor_arg(w: Complex64, b: f64, use_b: bool) -> Complex64 {
    if use_b {
        PI * b * (2.0 * w - I * b) / 2.0
    } else {
        PI * (2.0 * w - I / b) / (2.0 * b)
    }
}

/// `log Γ_h(z; b)` for any `z` off the poles, by the difference equations.
///
/// Points with |Im z| ≤ η − m/4 (m = min(b, 1/b)) are evaluated directly;
/// others are shifted by ±i·m until they land there, accumulating the cosh
/// factors. A cosh factor that must be divided out and is below
/// [`tolerances::POLE`] in modulus reports [`Error::Pole`].
pub fn log_extend_hyp_gamma(z: Complex64, hp: &HyperbolicParams) -> Result<Complex64> {
    let (b, eta) = (hp.b, hp.eta);
    let use_b = b <= 1.0 / b;
    let m = b.min(1.0 / b);
    let limit = eta - 0.25 * m;
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut steps = 0usize;
    while w.im > limit {
        // Γ_h(w) = Γ_h(w − im) / (2 cosh(arg(w))).
        let (lc, modulus) = log_two_cosh(shift_factor_arg(w, b, use_b));
        if modulus < tolerances::POLE {
            return Err(Error::Pole { re: z.re, im: z.im });
        }
        acc -= lc;
        w -= I * m;
        steps += 1;
        if steps > 100_000 {
            return Err(Error::Domain(format!("argument {z} too far from the strip")));
        }
    }
    while w.im < -limit {
        // Γ_h(w) = Γ_h(w + im) · 2 cosh(arg(w + im)).
        let up = w + I * m;
        let (lc, _) = log_two_cosh(shift_factor_arg(up, b, use_b));
        if !(lc.re.is_finite()) {
            return Err(Error::Domain(format!("extended hyp_gamma vanishes at {z}")));
        }
        acc += lc;
        w = up;
        steps += 1;
        if steps > 100_000 {
            return Err(Error::Domain(format!("argument {z} too far from the strip")));
        }
    }
    Ok(acc + log_hyp_gamma(w, hp)?)
}

/// `Γ_h(z; b)` continued meromorphically to the whole plane; see [`log_extend_hyp_gamma`].
pub fn extend_hyp_gamma(z: Complex64, hp: &HyperbolicParams) -> Result<Complex64> {
    log_extend_hyp_gamma(z, hp).map(|l| l.exp())
}

/// Leading quasi-classical term of `log Γ_h(z / (2πb); b)` as ħ = 2πb² → 0:
///
/// ```text
/// −i ħ⁻¹ ( Li₂(−e^z) + π²/12 + z²/4 )
/// ```
///
/// The correction to this term is O(ħ). Requires Im z < π so that the
/// dilogarithm argument stays off its cut.
///
/// ```
/// use multistar::special_fn::{log_hyp_gamma, qc_leading_log, HyperbolicParams};
/// use num_complex::Complex64;
/// use std::f64::consts::PI;
///
/// let hp = HyperbolicParams::new(0.1).unwrap();
/// let z = Complex64::new(0.5, 0.0);
/// let exact = log_hyp_gamma(z / (2.0 * PI * hp.b()), &hp).unwrap();
/// let lead = qc_leading_log(z, &hp.qc()).unwrap();
/// assert!((exact - lead).norm() < 1e-3);
/// ```
pub fn qc_leading_log(z: Complex64, qc: &QcParams) -> Result<Complex64> {
    if z.im >= PI || z.im <= -PI {
        return Err(Error::Domain(format!("qc_leading_log requires |Im z| < pi, got {z}")));
    }
    let li = dilog(-z.exp())?;
    Ok(-I / qc.hbar * (li + PI * PI / 12.0 + z * z / 4.0))
}
