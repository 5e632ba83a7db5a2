//! Closed-form solution of the n = 3 five-point equations.
//!
//! For n = 3 the two equations `A_a(y_h; y_i, y_j, y_k, y_l; α, β) = 1`
//! depend on the unknown `y_l` only through `r = y_{l,1} y_{l,2}` and
//! `s = y_{l,1} + y_{l,2}`, and reduce to a pair of polynomial equations
//!
//! ```text
//! hyperbolic:  P₂(r² + s) + P₁ r + P₀(rs + 1) = 0        (and the same with ŷ_h)
//! rational:    P₀(s² − r) + P₁ rs + P₂ = 0               (and the same with ŷ_h)
//! ```
//!
//! where `ŷ_h` swaps the first two components of the centre. Eliminating
//! gives a cubic whose three roots `t₁, t₂, t₃` are the components of the
//! solution:
//!
//! ```text
//! hyperbolic:  c₀ + c₁x + c₂x² − c₀x³,   c₀ = P₀P̂₂ − P₂P̂₀,  c₁ = P₀P̂₁ − P₁P̂₀,  c₂ = P₂P̂₁ − P₁P̂₂
//! rational:    F₀ − F₃x − F₁x³,          F₀ = P₂P̂₀ − P₀P̂₂,  F₁ = P₁P̂₀ − P₀P̂₁,  F₃ = P₁P̂₂ − P₂P̂₁
//! ```
//!
//! so that `t₁t₂t₃ = 1` (hyperbolic) or `t₁ + t₂ + t₃ = 0` (rational). Each
//! ordered pair `(t_a, t_b)` completes to a permutation of `(t₁, t₂, t₃)`:
//! the solution is unique up to permutation of its components.
//!
//! An independent cross-check eliminates `s` (hyperbolic) or `r` (rational)
//! instead, giving the [`pair_cubic`] whose roots are `t_a t_b = 1/t_c`
//! or `t_a + t_b = −t_c` respectively; see [`p_system_solutions`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multispin::{Picture, RapidityPair, Var};
use crate::tolerances;

/// Symmetric functions `r = y₁y₂`, `s = y₁ + y₂` of the first two components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricPair {
    /// Product of the two components.
    pub r: Complex64,
    /// Sum of the two components.
    pub s: Complex64,
}

impl SymmetricPair {
    /// From the first two components of a variable.
    pub fn of(y: &[Complex64]) -> Self {
        Self { r: y[0] * y[1], s: y[0] + y[1] }
    }

    /// The two components, as roots of `t² − s t + r`.
    pub fn components(&self) -> (Complex64, Complex64) {
        let d = (self.s * self.s - 4.0 * self.r).sqrt();
        // Pick the numerically stable branch for the larger root.
        let big = if (self.s + d).norm() >= (self.s - d).norm() { 0.5 * (self.s + d) } else { 0.5 * (self.s - d) };
        let small = if big.norm_sqr() == 0.0 { Complex64::new(0.0, 0.0) } else { self.r / big };
        (big, small)
    }
}

/// Coefficients of `c0 + c1·x + c2·x² + c3·x³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    /// Constant term.
    pub c0: Complex64,
    /// Linear coefficient.
    pub c1: Complex64,
    /// Quadratic coefficient.
    pub c2: Complex64,
    /// Cubic coefficient.
    pub c3: Complex64,
}

impl CubicCoeffs {
    /// `max |c_i|`, the scale used for all relative thresholds.
    pub fn scale(&self) -> f64 {
        [self.c0, self.c1, self.c2, self.c3].iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Evaluate the polynomial and its derivative at `x`.
    pub fn eval(&self, x: Complex64) -> (Complex64, Complex64) {
        let v = ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0;
        let d = (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1;
        (v, d)
    }
}

/// The three roots `t₁, t₂, t₃` of the n = 3 cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootTriple {
    /// First root.
    pub t1: Complex64,
    /// Second root.
    pub t2: Complex64,
    /// Third root.
    pub t3: Complex64,
}

impl RootTriple {
    /// The roots as an array.
    pub fn as_array(&self) -> [Complex64; 3] {
        [self.t1, self.t2, self.t3]
    }

    /// The six ordered pairs `(t_a, t_b)`, `a ≠ b`.
    pub fn pairs(&self) -> [(Complex64, Complex64); 6] {
        let t = self.as_array();
        [(t[0], t[1]), (t[1], t[0]), (t[0], t[2]), (t[2], t[0]), (t[1], t[2]), (t[2], t[1])]
    }
}

fn require_n3(vars: [&[Complex64]; 4]) -> Result<()> {
    if vars.iter().any(|v| v.len() != 3) {
        return Err(Error::Domain("closed-form solution requires n = 3".into()));
    }
    Ok(())
}

fn swap12(y: &[Complex64]) -> [Complex64; 3] {
    [y[1], y[0], y[2]]
}

pub(crate) fn g_polys_raw(
    picture: Picture,
    yi: &[Complex64],
    yj: &[Complex64],
    yk: &[Complex64],
    yh: &[Complex64],
    al: &RapidityPair,
    be: &RapidityPair,
) -> (Complex64, Complex64) {
    let (a1, a2, b1, b2) = (al.first, al.second, be.first, be.second);
    let (h2, h3) = (yh[1], yh[2]);
    let mut g1 = Complex64::new(1.0, 0.0);
    let mut g2 = Complex64::new(1.0, 0.0);
    for a in 0..3 {
        match picture {
            Picture::Hyperbolic => {
                g1 *= (yi[a] / h3 - a2 / b1) * (yj[a] - h2 * a2 / b2) * (yk[a] - h2 * a1 / b1);
                g2 *= (yi[a] - h2 * a2 / b1) * (yj[a] / h3 - a2 / b2) * (yk[a] / h3 - a1 / b1);
            }
            Picture::Rational => {
                g1 *= (yi[a] - h3 - a2 + b1) * (yj[a] - h2 - a2 + b2) * (yk[a] - h2 - a1 + b1);
                g2 *= (yi[a] - h2 - a2 + b1) * (yj[a] - h3 - a2 + b2) * (yk[a] - h3 - a1 + b1);
            }
        }
    }
    (g1, g2)
}

pub(crate) fn p_polys_raw(
    picture: Picture,
    yi: &[Complex64],
    yj: &[Complex64],
    yk: &[Complex64],
    yh: &[Complex64],
    al: &RapidityPair,
    be: &RapidityPair,
) -> [Complex64; 3] {
    let (g1, g2) = g_polys_raw(picture, yi, yj, yk, yh, al, be);
    let (h2, h3) = (yh[1], yh[2]);
    match picture {
        Picture::Hyperbolic => {
            let c = al.first / be.second;
            let ch = c * h2;
            [
                g1 * c * c / h3 - g2 * ch * ch,
                g1 * (h3.powi(-3) - c.powi(3)) - g2 * (1.0 - ch.powi(3)),
                g2 * ch - g1 * c / (h3 * h3),
            ]
        }
        Picture::Rational => {
            let d = al.first - be.second;
            [g1 * (-d - h3) + g2 * (h2 + d), g1 - g2, g1 * (h3 + d).powi(3) + g2 * (-d - h2).powi(3)]
        }
    }
}

/// The two nine-factor products `G₁`, `G₂` (n = 3; picture taken from `yh`).
pub fn g_polys(yi: &Var, yj: &Var, yk: &Var, yh: &Var, alpha: &RapidityPair, beta: &RapidityPair) -> Result<(Complex64, Complex64)> {
    require_n3([yi.components(), yj.components(), yk.components(), yh.components()])?;
    Ok(g_polys_raw(yh.picture(), yi.components(), yj.components(), yk.components(), yh.components(), alpha, beta))
}

/// The polynomials `(P₀, P₁, P₂)` of the n = 3 reduction (picture taken from `yh`).
pub fn p_polys(yi: &Var, yj: &Var, yk: &Var, yh: &Var, alpha: &RapidityPair, beta: &RapidityPair) -> Result<[Complex64; 3]> {
    require_n3([yi.components(), yj.components(), yk.components(), yh.components()])?;
    Ok(p_polys_raw(yh.picture(), yi.components(), yj.components(), yk.components(), yh.components(), alpha, beta))
}

/// Value of the reduced equation `P(r, s)` for given coefficients.
pub fn p_equation(picture: Picture, p: &[Complex64; 3], pair: &SymmetricPair) -> Complex64 {
    let (r, s) = (pair.r, pair.s);
    match picture {
        Picture::Hyperbolic => p[2] * (r * r + s) + p[1] * r + p[0] * (r * s + 1.0),
        Picture::Rational => p[0] * (s * s - r) + p[1] * r * s + p[2],
    }
}

/// Relative residuals of the two reduced equations (with `y_h` and `ŷ_h`) at
/// the pair `(r, s)`: `|P(r,s)| / (max|P_i| · max(1, |r|, |s|)²)`.
pub fn reduction_residuals(
    yi: &Var,
    yj: &Var,
    yk: &Var,
    yh: &Var,
    alpha: &RapidityPair,
    beta: &RapidityPair,
    pair: &SymmetricPair,
) -> Result<[f64; 2]> {
    let p = p_polys(yi, yj, yk, yh, alpha, beta)?;
    let hh = swap12(yh.components());
    let ph = p_polys_raw(yh.picture(), yi.components(), yj.components(), yk.components(), &hh, alpha, beta);
    let mag = 1f64.max(pair.r.norm()).max(pair.s.norm()).powi(2);
    let rel = |q: &[Complex64; 3]| {
        let scale = q.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        p_equation(yh.picture(), q, pair).norm() / (scale * mag)
    };
    Ok([rel(&p), rel(&ph)])
}

fn both_p(
    picture: Picture,
    yi: &[Complex64],
    yj: &[Complex64],
    yk: &[Complex64],
    yh: &[Complex64],
    al: &RapidityPair,
    be: &RapidityPair,
) -> ([Complex64; 3], [Complex64; 3]) {
    let hh = swap12(yh);
    (p_polys_raw(picture, yi, yj, yk, yh, al, be), p_polys_raw(picture, yi, yj, yk, &hh, al, be))
}

pub(crate) fn f_cubic_raw(
    picture: Picture,
    yi: &[Complex64],
    yj: &[Complex64],
    yk: &[Complex64],
    yh: &[Complex64],
    al: &RapidityPair,
    be: &RapidityPair,
) -> CubicCoeffs {
    let (p, q) = both_p(picture, yi, yj, yk, yh, al, be);
    match picture {
        Picture::Hyperbolic => {
            let c0 = p[0] * q[2] - p[2] * q[0];
            CubicCoeffs { c0, c1: p[0] * q[1] - p[1] * q[0], c2: p[2] * q[1] - p[1] * q[2], c3: -c0 }
        }
        Picture::Rational => {
            let f0 = p[2] * q[0] - p[0] * q[2];
            let f1 = p[1] * q[0] - p[0] * q[1];
            let f3 = p[1] * q[2] - p[2] * q[1];
            CubicCoeffs { c0: f0, c1: -f3, c2: Complex64::new(0.0, 0.0), c3: -f1 }
        }
    }
}

/// The component cubic whose roots are `t₁, t₂, t₃` (picture taken from `yh`).
///
/// Hyperbolic: `c3 = −c0` (roots multiply to one). Rational: `c2 = 0` (roots
/// sum to zero).
pub fn f_cubic(yi: &Var, yj: &Var, yk: &Var, yh: &Var, alpha: &RapidityPair, beta: &RapidityPair) -> Result<CubicCoeffs> {
    require_n3([yi.components(), yj.components(), yk.components(), yh.components()])?;
    let c = f_cubic_raw(yh.picture(), yi.components(), yj.components(), yk.components(), yh.components(), alpha, beta);
    if c.c3.norm() < tolerances::CUBIC_DEGENERATE * c.scale() || c.scale() == 0.0 {
        return Err(Error::Degenerate(format!("cubic leading coefficient {} vanishes relative to scale {}", c.c3, c.scale())));
    }
    Ok(c)
}

/// The cubic obtained by eliminating the other symmetric function: its roots
/// are the products `t_a t_b` (hyperbolic, variable `r`) or the sums
/// `t_a + t_b` (rational, variable `s`).
pub fn pair_cubic(yi: &Var, yj: &Var, yk: &Var, yh: &Var, alpha: &RapidityPair, beta: &RapidityPair) -> Result<CubicCoeffs> {
    require_n3([yi.components(), yj.components(), yk.components(), yh.components()])?;
    let picture = yh.picture();
    let (p, q) = both_p(picture, yi.components(), yj.components(), yk.components(), yh.components(), alpha, beta);
    Ok(match picture {
        Picture::Hyperbolic => {
            let d = p[0] * q[2] - p[2] * q[0];
            CubicCoeffs { c0: d, c1: p[1] * q[2] - p[2] * q[1], c2: p[1] * q[0] - p[0] * q[1], c3: -d }
        }
        Picture::Rational => CubicCoeffs {
            c0: p[2] * q[0] - p[0] * q[2],
            c1: p[1] * q[2] - p[2] * q[1],
            c2: Complex64::new(0.0, 0.0),
            c3: p[1] * q[0] - p[0] * q[1],
        },
    })
}

/// Roots of a cubic by complex Cardano, each polished by Newton's method.
///
/// Fails with [`Error::Degenerate`] when the leading coefficient vanishes
/// relative to the coefficient scale.
pub fn cubic_roots(c: &CubicCoeffs) -> Result<[Complex64; 3]> {
    let scale = c.scale();
    if scale == 0.0 || c.c3.norm() < tolerances::CUBIC_DEGENERATE * scale {
        return Err(Error::Degenerate("cubic leading coefficient vanishes".into()));
    }
    let (a, b, cc) = (c.c2 / c.c3, c.c1 / c.c3, c.c0 / c.c3);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let w1 = -q / 2.0 + disc;
    let w2 = -q / 2.0 - disc;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    if w.norm_sqr() == 0.0 {
        roots = [-a / 3.0; 3];
    } else {
        let u = w.powf(1.0 / 3.0);
        let mut uk = u;
        for root in roots.iter_mut() {
            let vk = -p / (3.0 * uk);
            *root = uk + vk - a / 3.0;
            uk *= omega;
        }
    }
    for t in roots.iter_mut() {
        let mut last = f64::INFINITY;
        for _ in 0..3 {
            let (v, d) = c.eval(*t);
            if d.norm_sqr() == 0.0 {
                break;
            }
            let step = v / d;
            if !(step.norm() < last) {
                break;
            }
            last = step.norm();
            *t -= step;
        }
    }
    Ok(roots)
}

fn check_separation(roots: &[Complex64; 3]) -> Result<()> {
    let mag = roots.iter().map(|t| t.norm()).fold(1.0, f64::max);
    for a in 0..3 {
        for b in a + 1..3 {
            if (roots[a] - roots[b]).norm() < tolerances::ROOT_SEPARATION * mag {
                return Err(Error::Degenerate(format!("repeated roots {} and {}", roots[a], roots[b])));
            }
        }
    }
    Ok(())
}

/// Solve `A_a(y_h; y_i, y_j, y_k, y_l; α, β) = 1`, a = 1, 2, for `y_l` at n = 3.
///
/// Returns the three roots of [`f_cubic`]; every ordered pair of distinct
/// roots `(t_a, t_b)` (see [`RootTriple::pairs`]) is a solution
/// `y_l = (t_a, t_b, ·)` once completed by the constraint.
///
/// ```
/// use multistar::cubic3::solve5_n3;
/// use multistar::legs::{leg_ratio, LegContext};
/// use multistar::multispin::{Picture, RapidityPair, Var};
/// use num_complex::Complex64;
///
/// let v = |x: f64, y: f64| Var::from_free(Picture::Hyperbolic, &[Complex64::new(x, 0.0), Complex64::new(y, 0.0)]);
/// let (yh, yi, yj, yk) = (v(1.2, 0.7), v(0.5, 1.9), v(2.1, 1.3), v(0.8, 0.6));
/// let ctx = LegContext { alpha: RapidityPair::from_angles(0.9, 0.5), beta: RapidityPair::from_angles(0.3, 0.1) };
/// let roots = solve5_n3(&yi, &yj, &yk, &yh, &ctx.alpha, &ctx.beta).unwrap();
/// for (t1, t2) in roots.pairs() {
///     let yl = Var::from_free(Picture::Hyperbolic, &[t1, t2]);
///     for a in 0..2 {
///         let r = leg_ratio(a, &yh, [&yi, &yj, &yk, &yl], &ctx).unwrap();
///         assert!((r - 1.0).norm() < 1e-8);
///     }
/// }
/// ```
pub fn solve5_n3(yi: &Var, yj: &Var, yk: &Var, yh: &Var, alpha: &RapidityPair, beta: &RapidityPair) -> Result<RootTriple> {
    let c = f_cubic(yi, yj, yk, yh, alpha, beta)?;
    let roots = cubic_roots(&c)?;
    check_separation(&roots)?;
    Ok(RootTriple { t1: roots[0], t2: roots[1], t3: roots[2] })
}

/// Simultaneous solutions `(r, s)` of the two reduced equations, found by
/// eliminating one symmetric function ([`pair_cubic`]) and back-substituting
/// into the linear relation for the other.
pub fn p_system_solutions(
    yi: &Var,
    yj: &Var,
    yk: &Var,
    yh: &Var,
    alpha: &RapidityPair,
    beta: &RapidityPair,
) -> Result<Vec<SymmetricPair>> {
    let picture = yh.picture();
    let p = p_polys(yi, yj, yk, yh, alpha, beta)?;
    let cubic = pair_cubic(yi, yj, yk, yh, alpha, beta)?;
    let roots = cubic_roots(&cubic)?;
    let mut out = Vec::with_capacity(3);
    for x in roots {
        let pair = match picture {
            Picture::Hyperbolic => {
                // s (P₂ + P₀ r) = −(P₂ r² + P₁ r + P₀)
                let den = p[2] + p[0] * x;
                if den.norm_sqr() == 0.0 {
                    return Err(Error::Degenerate("reduced system: vanishing back-substitution denominator".into()));
                }
                SymmetricPair { r: x, s: -(p[2] * x * x + p[1] * x + p[0]) / den }
            }
            Picture::Rational => {
                // r (P₁ s − P₀) = −(P₀ s² + P₂)
                let den = p[1] * x - p[0];
                if den.norm_sqr() == 0.0 {
                    return Err(Error::Degenerate("reduced system: vanishing back-substitution denominator".into()));
                }
                SymmetricPair { r: -(p[0] * x * x + p[2]) / den, s: x }
            }
        };
        out.push(pair);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legs::leg_ratio_raw;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    struct Inst {
        yh: Var,
        yi: Var,
        yj: Var,
        yk: Var,
        al: RapidityPair,
        be: RapidityPair,
    }

    fn instance(picture: Picture, seed: u64) -> Inst {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = || match picture {
            Picture::Hyperbolic => {
                Var::from_free(picture, &[c(rng.gen_range(-1.0f64..1.0).exp(), 0.0), c(rng.gen_range(-1.0f64..1.0).exp(), 0.0)])
            }
            Picture::Rational => Var::from_free(picture, &[c(rng.gen_range(-1.0..1.0), 0.0), c(rng.gen_range(-1.0..1.0), 0.0)]),
        };
        let (yh, yi, yj, yk) = (v(), v(), v(), v());
        let (al, be) = match picture {
            Picture::Hyperbolic => (
                RapidityPair::from_angles(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
                RapidityPair::from_angles(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
            ),
            Picture::Rational => (
                RapidityPair::new(c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)))
                    .unwrap(),
                RapidityPair::real(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ),
        };
        Inst { yh, yi, yj, yk, al, be }
    }

    fn max_residual(inst: &Inst, yl: &[Complex64]) -> f64 {
        (0..2)
            .map(|a| {
                let r = leg_ratio_raw(
                    inst.yh.picture(),
                    a,
                    inst.yh.components(),
                    [inst.yi.components(), inst.yj.components(), inst.yk.components(), yl],
                    &inst.al,
                    &inst.be,
                )
                .unwrap();
                (r - 1.0).norm()
            })
            .fold(0.0, f64::max)
    }

    fn complete(picture: Picture, t1: Complex64, t2: Complex64) -> Vec<Complex64> {
        Var::from_free(picture, &[t1, t2]).components().to_vec()
    }

    #[test]
    fn all_pairs_solve_both_pictures() {
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            for seed in 0..20 {
                let inst = instance(picture, seed);
                let roots = solve5_n3(&inst.yi, &inst.yj, &inst.yk, &inst.yh, &inst.al, &inst.be).unwrap();
                for (t1, t2) in roots.pairs() {
                    let r = max_residual(&inst, &complete(picture, t1, t2));
                    assert!(r < 1e-8, "{picture:?} seed {seed}: residual {r}");
                }
                let t = roots.as_array();
                match picture {
                    Picture::Hyperbolic => assert!((t[0] * t[1] * t[2] - 1.0).norm() < 1e-9),
                    Picture::Rational => assert!((t[0] + t[1] + t[2]).norm() < 1e-9),
                }
            }
        }
    }

    #[test]
    fn structure_of_coefficients() {
        let h = instance(Picture::Hyperbolic, 1);
        let ch = f_cubic(&h.yi, &h.yj, &h.yk, &h.yh, &h.al, &h.be).unwrap();
        assert_eq!(ch.c3, -ch.c0);
        let r = instance(Picture::Rational, 1);
        let cr = f_cubic(&r.yi, &r.yj, &r.yk, &r.yh, &r.al, &r.be).unwrap();
        assert_eq!(cr.c2, c(0.0, 0.0));
    }

    #[test]
    fn g_polys_independent_oracle_and_zero_factor() {
        let h = instance(Picture::Hyperbolic, 4);
        let (g1, g2) = g_polys(&h.yi, &h.yj, &h.yk, &h.yh, &h.al, &h.be).unwrap();
        // Straight-line re-evaluation with the nine factors grouped per variable.
        let (yi, yj, yk, yh) = (h.yi.components(), h.yj.components(), h.yk.components(), h.yh.components());
        let (a1, a2, b1, b2) = (h.al.first, h.al.second, h.be.first, h.be.second);
        let pi: Complex64 = yi.iter().map(|&y| y / yh[2] - a2 / b1).product();
        let pj: Complex64 = yj.iter().map(|&y| y - yh[1] * a2 / b2).product();
        let pk: Complex64 = yk.iter().map(|&y| y - yh[1] * a1 / b1).product();
        assert!((g1 - pi * pj * pk).norm() < 1e-12 * g1.norm());
        let qi: Complex64 = yi.iter().map(|&y| y - yh[1] * a2 / b1).product();
        let qj: Complex64 = yj.iter().map(|&y| y / yh[2] - a2 / b2).product();
        let qk: Complex64 = yk.iter().map(|&y| y / yh[2] - a1 / b1).product();
        assert!((g2 - qi * qj * qk).norm() < 1e-12 * g2.norm());
        // A vanishing factor: y_{i,1} = y_{h,3} α₂/β₁.
        let first = yh[2] * a2 / b1;
        let yi0 = Var::from_free(Picture::Hyperbolic, &[first, c(1.3, 0.0)]);
        let (z1, _) = g_polys(&yi0, &h.yj, &h.yk, &h.yh, &h.al, &h.be).unwrap();
        assert!(z1.norm() < 1e-12);
    }

    #[test]
    fn g_rational_is_limit_of_g_hyperbolic() {
        let r = instance(Picture::Rational, 6);
        let (g1r, g2r) = g_polys(&r.yi, &r.yj, &r.yk, &r.yh, &r.al, &r.be).unwrap();
        let err = |eps: f64| {
            let e = |v: &Var| {
                let f: Vec<Complex64> = v.components()[..2].iter().map(|z| (z * eps).exp()).collect();
                Var::from_free(Picture::Hyperbolic, &f)
            };
            let ep = |p: &RapidityPair| RapidityPair::new((p.first * eps).exp(), (p.second * eps).exp()).unwrap();
            let (g1, g2) = g_polys(&e(&r.yi), &e(&r.yj), &e(&r.yk), &e(&r.yh), &ep(&r.al), &ep(&r.be)).unwrap();
            // Each of the nine factors is ε·(rational factor) + O(ε²).
            let s = eps.powi(9);
            ((g1 / s - g1r).norm() / g1r.norm()).max((g2 / s - g2r).norm() / g2r.norm())
        };
        let (e1, e2) = (err(1e-3), err(1e-4));
        assert!(e2 < 0.2 * e1, "{e1} {e2}");
    }

    #[test]
    fn p_polys_vanish_with_g() {
        let h = instance(Picture::Hyperbolic, 2);
        let (g1, g2) = g_polys(&h.yi, &h.yj, &h.yk, &h.yh, &h.al, &h.be).unwrap();
        let p = p_polys(&h.yi, &h.yj, &h.yk, &h.yh, &h.al, &h.be).unwrap();
        let c_ = h.al.first / h.be.second;
        let (h2, h3) = (h.yh.components()[1], h.yh.components()[2]);
        assert!((p[0] - (g1 * c_ * c_ / h3 - g2 * (c_ * h2).powi(2))).norm() < 1e-12 * p[0].norm().max(1.0));
        assert!((p[2] - (g2 * c_ * h2 - g1 * c_ / (h3 * h3))).norm() < 1e-12 * p[2].norm().max(1.0));
        // A shared zero factor kills both G, hence all P.
        let yh = h.yh.components();
        let (a2, b1) = (h.al.second, h.be.first);
        let yi = Var::from_free(Picture::Hyperbolic, &[yh[2] * a2 / b1, yh[1] * a2 / b1]);
        let p = p_polys(&yi, &h.yj, &h.yk, &h.yh, &h.al, &h.be).unwrap();
        assert!(p.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn pair_cubic_roots_are_pairwise_products_or_sums() {
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            let inst = instance(picture, 9);
            let t = solve5_n3(&inst.yi, &inst.yj, &inst.yk, &inst.yh, &inst.al, &inst.be).unwrap().as_array();
            let sols = p_system_solutions(&inst.yi, &inst.yj, &inst.yk, &inst.yh, &inst.al, &inst.be).unwrap();
            assert_eq!(sols.len(), 3);
            for sp in sols {
                let want = [SymmetricPair::of(&[t[0], t[1]]), SymmetricPair::of(&[t[0], t[2]]), SymmetricPair::of(&[t[1], t[2]])];
                assert!(
                    want.iter().any(|w| (w.r - sp.r).norm() < 1e-8 && (w.s - sp.s).norm() < 1e-8),
                    "{picture:?}: {sp:?} not among {want:?}"
                );
                let (y1, y2) = sp.components();
                assert!(max_residual(&inst, &complete(picture, y1, y2)) < 1e-8);
            }
        }
    }

    #[test]
    fn cubic_roots_known_polynomial() {
        // (x − 1)(x − 2)(x + 3) = x³ − 7x + 6
        let cc = CubicCoeffs { c0: c(6.0, 0.0), c1: c(-7.0, 0.0), c2: c(0.0, 0.0), c3: c(1.0, 0.0) };
        let mut r = cubic_roots(&cc).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (got, want) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((got - want).norm() < 1e-14);
        }
        let triple = CubicCoeffs { c0: c(-1.0, 0.0), c1: c(3.0, 0.0), c2: c(-3.0, 0.0), c3: c(1.0, 0.0) };
        assert!(check_separation(&cubic_roots(&triple).unwrap()).is_err());
        let flat = CubicCoeffs { c0: c(1.0, 0.0), c1: c(1.0, 0.0), c2: c(1.0, 0.0), c3: c(0.0, 0.0) };
        assert!(matches!(cubic_roots(&flat), Err(Error::Degenerate(_))));
    }

    #[test]
    fn reduction_residuals_vanish_on_solutions() {
        for picture in [Picture::Hyperbolic, Picture::Rational] {
            let inst = instance(picture, 3);
            let t = solve5_n3(&inst.yi, &inst.yj, &inst.yk, &inst.yh, &inst.al, &inst.be).unwrap();
            for (t1, t2) in t.pairs() {
                let res =
                    reduction_residuals(&inst.yi, &inst.yj, &inst.yk, &inst.yh, &inst.al, &inst.be, &SymmetricPair::of(&[t1, t2])).unwrap();
                assert!(res[0] < 1e-8 && res[1] < 1e-8, "{picture:?}: {res:?}");
            }
        }
    }

    #[test]
    fn non_n3_rejected() {
        let v = Var::from_free(Picture::Hyperbolic, &[c(1.2, 0.0)]);
        let p = RapidityPair::from_angles(0.1, 0.2);
        assert!(solve5_n3(&v, &v, &v, &v, &p, &p).is_err());
    }
}
