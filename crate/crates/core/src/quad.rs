//! Adaptive Gauss–Kronrod (7–15) quadrature for complex-valued integrands.
//!
//! The interval is bisected greedily at the panel with the largest error
//! estimate until the total estimate meets `max(abs_tol, rel_tol·|I|)`.
//! The error estimate is the usual |K15 − G7| per panel; summation is done
//! in panel order so results are bit-for-bit deterministic.
//!
//! ```
//! use multistar::quad::{integrate, QuadOptions};
//! use num_complex::Complex64;
//!
//! let r = integrate(|x| Complex64::new(x.cos(), x.sin()), 0.0, 1.0, &QuadOptions::default()).unwrap();
//! // ∫₀¹ e^{ix} dx = (e^{i} − 1)/i
//! let exact = (Complex64::new(0.0, 1.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
//! assert!((r.value - exact).norm() < 1e-13);
//! ```

use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

// Kronrod abscissae (positive half, descending) and weights for the 15-point rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss 7-point weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target.
    pub rel_tol: f64,
    /// Maximum number of panels before giving up.
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-12, max_panels: 4000 }
    }
}

/// Value and error estimate of an integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    /// Integral estimate.
    pub value: Complex64,
    /// Estimated absolute error.
    pub error: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

/// Apply the 15-point Kronrod rule (with embedded 7-point Gauss rule) on `[a, b]`.
pub fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let x = nodes(a, b);
    let v: [Complex64; 15] = std::array::from_fn(|k| f(x[k]));
    combine(&v, a, b)
}

/// Nodes of the rule on `[a, b]`: the centre, then `c − dx_j, c + dx_j` for j = 0..7.
fn nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [c; 15];
    for j in 0..7 {
        x[1 + 2 * j] = c - h * XGK[j];
        x[2 + 2 * j] = c + h * XGK[j];
    }
    x
}

fn combine(v: &[Complex64; 15], a: f64, b: f64) -> (Complex64, f64) {
    let h = 0.5 * (b - a);
    let mut k = v[0] * WGK[7];
    let mut g = v[0] * WG[3];
    for j in 0..7 {
        let s = v[1 + 2 * j] + v[2 + 2 * j];
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptively integrate `f` over the finite interval `[a, b]`.
///
/// Returns [`Error::Accuracy`] carrying the best estimate when the panel
/// budget is exhausted before the tolerance is met, and [`Error::Domain`]
/// when the integrand produces non-finite values.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    adaptive(|p, q| gk15(&f, p, q), a, b, opts)
}

/// [`integrate`] with the 15 nodes of each panel evaluated in parallel.
///
/// For expensive integrands. The result is identical to [`integrate`]'s:
/// node values are combined in a fixed order.
pub fn integrate_par<F: Fn(f64) -> Complex64 + Sync>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    adaptive(
        |p, q| {
            let x = nodes(p, q);
            let v: Vec<Complex64> = x.par_iter().map(|&t| f(t)).collect();
            combine(&v.try_into().expect("fifteen nodes"), p, q)
        },
        a,
        b,
        opts,
    )
}

fn adaptive<R: Fn(f64, f64) -> (Complex64, f64)>(rule: R, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 });
    }
    let (v, e) = rule(a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    loop {
        if !(total.re.is_finite() && total.im.is_finite() && total_err.is_finite()) {
            return Err(Error::Domain(format!("non-finite integrand on [{a}, {b}]")));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if total_err <= target {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Accuracy { estimate_re: total.re, estimate_im: total.im, error: total_err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel too small to split further: accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = rule(worst.a, mid);
        let (v2, e2) = rule(mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum in interval order so the result does not depend on heap history.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    let error = panels.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, evaluations })
}
