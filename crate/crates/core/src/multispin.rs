//! Multicomponent variables and the coordinate changes between pictures.
//!
//! | Type | Constraint | Role |
//! |------|------------|------|
//! | [`AdditiveVar`] | Σ xₐ = 0 | classical spins `x` |
//! | [`MultiplicativeVar`] | Π yₐ = 1 | hyperbolic picture `y = eˣ` |
//! | [`RationalVar`] | Σ yₐ = 0 | rational-limit picture |
//! | [`SpinVar`] | Σ ξₐ = 0, real | quantum spins `ξ` |
//! | [`RapidityPair`] | both entries ≠ 0 | spectral parameters `α = (α₁, α₂)` |
//!
//! All n components are stored; the constraint is checked on construction
//! (and on deserialisation). The `from_free` constructors take the first
//! n − 1 components and complete the last one exactly.
//!
//! Components are serialised as arrays of `[re, im]` pairs.
//!
//! ```
//! use multistar::multispin::{exp_map, AdditiveVar, Constrained};
//! use num_complex::Complex64;
//!
//! let x = AdditiveVar::from_free(&[Complex64::new(0.3, 0.0)]);
//! let y = exp_map(&x);
//! assert!((y.components()[0] - 0.3f64.exp()).norm() < 1e-15);
//! assert!((y.components()[0] * y.components()[1] - 1.0).norm() < 1e-15);
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::QcParams;
use crate::tolerances;

/// Serialised form of a complex vector: `[[re, im], ...]`.
pub type PairVec = Vec<[f64; 2]>;

fn to_pairs(c: &[Complex64]) -> PairVec {
    c.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(p: &[[f64; 2]]) -> Vec<Complex64> {
    p.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn check_finite(c: &[Complex64]) -> Result<()> {
    if c.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Constraint("non-finite component".into()))
    }
}

fn check_sum_zero(c: &[Complex64], what: &str) -> Result<()> {
    if c.len() < 2 {
        return Err(Error::Constraint(format!("{what} needs n >= 2 components, got {}", c.len())));
    }
    check_finite(c)?;
    let sum: Complex64 = c.iter().sum();
    let scale: f64 = c.iter().map(|z| z.norm()).sum::<f64>().max(1.0);
    if sum.norm() > tolerances::CONSTRAINT * scale {
        return Err(Error::Constraint(format!("{what} components sum to {sum}, expected 0")));
    }
    Ok(())
}

fn check_product_one(c: &[Complex64]) -> Result<()> {
    if c.len() < 2 {
        return Err(Error::Constraint(format!("multiplicative variable needs n >= 2 components, got {}", c.len())));
    }
    check_finite(c)?;
    if c.iter().any(|z| z.norm_sqr() == 0.0) {
        return Err(Error::Constraint("multiplicative variable has a zero component".into()));
    }
    let prod: Complex64 = c.iter().product();
    if (prod - 1.0).norm() > tolerances::CONSTRAINT * c.len() as f64 {
        return Err(Error::Constraint(format!("multiplicative components multiply to {prod}, expected 1")));
    }
    Ok(())
}

/// Common interface of the constrained complex variable types.
pub trait Constrained: Sized + Clone {
    /// All n components.
    fn components(&self) -> &[Complex64];
    /// Build from all n components, validating the constraint.
    fn new(components: Vec<Complex64>) -> Result<Self>;
    /// Build from the first n − 1 components, completing the last exactly.
    fn from_free(free: &[Complex64]) -> Self;

    /// Number of components.
    fn n(&self) -> usize {
        self.components().len()
    }

    /// The n − 1 independent components.
    fn free(&self) -> &[Complex64] {
        let c = self.components();
        &c[..c.len() - 1]
    }
}

macro_rules! complex_var {
    ($name:ident, $doc:expr) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(try_from = "PairVec", into = "PairVec")]
        pub struct $name {
            comps: Vec<Complex64>,
        }

        impl TryFrom<PairVec> for $name {
            type Error = Error;
            fn try_from(p: PairVec) -> Result<Self> {
                <$name as Constrained>::new(from_pairs(&p))
            }
        }

        impl From<$name> for PairVec {
            fn from(v: $name) -> PairVec {
                to_pairs(&v.comps)
            }
        }
    };
}

complex_var!(AdditiveVar, "Additive variable `x`: n complex components summing to zero.");
complex_var!(MultiplicativeVar, "Multiplicative variable `y`: n nonzero complex components with product one.");
complex_var!(RationalVar, "Rational-picture variable: n complex components summing to zero.");

impl Constrained for AdditiveVar {
    fn components(&self) -> &[Complex64] {
        &self.comps
    }
    fn new(components: Vec<Complex64>) -> Result<Self> {
        check_sum_zero(&components, "additive")?;
        Ok(Self { comps: components })
    }
    fn from_free(free: &[Complex64]) -> Self {
        let mut comps = free.to_vec();
        comps.push(-free.iter().sum::<Complex64>());
        Self { comps }
    }
}

impl Constrained for RationalVar {
    fn components(&self) -> &[Complex64] {
        &self.comps
    }
    fn new(components: Vec<Complex64>) -> Result<Self> {
        check_sum_zero(&components, "rational")?;
        Ok(Self { comps: components })
    }
    fn from_free(free: &[Complex64]) -> Self {
        let mut comps = free.to_vec();
        comps.push(-free.iter().sum::<Complex64>());
        Self { comps }
    }
}

impl Constrained for MultiplicativeVar {
    fn components(&self) -> &[Complex64] {
        &self.comps
    }
    fn new(components: Vec<Complex64>) -> Result<Self> {
        check_product_one(&components)?;
        Ok(Self { comps: components })
    }
    fn from_free(free: &[Complex64]) -> Self {
        let mut comps = free.to_vec();
        comps.push(1.0 / free.iter().product::<Complex64>());
        Self { comps }
    }
}

/// Which system of equations a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    /// Multiplicative variables, leg function `φ`.
    Hyperbolic,
    /// Additive variables of the rational limit, leg function `φ⁽ʳ⁾`.
    Rational,
}

impl std::str::FromStr for Picture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperbolic" => Ok(Picture::Hyperbolic),
            "rational" => Ok(Picture::Rational),
            other => Err(Error::Config(format!("unknown picture '{other}' (expected hyperbolic|rational)"))),
        }
    }
}

/// A 5-point equation variable in either picture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "picture", content = "components", rename_all = "lowercase")]
pub enum Var {
    /// Hyperbolic picture.
    Hyperbolic(MultiplicativeVar),
    /// Rational picture.
    Rational(RationalVar),
}

impl Var {
    /// Build from free components in the given picture.
    pub fn from_free(picture: Picture, free: &[Complex64]) -> Self {
        match picture {
            Picture::Hyperbolic => Var::Hyperbolic(MultiplicativeVar::from_free(free)),
            Picture::Rational => Var::Rational(RationalVar::from_free(free)),
        }
    }

    /// Build from all components in the given picture, validating the constraint.
    pub fn new(picture: Picture, components: Vec<Complex64>) -> Result<Self> {
        Ok(match picture {
            Picture::Hyperbolic => Var::Hyperbolic(MultiplicativeVar::new(components)?),
            Picture::Rational => Var::Rational(RationalVar::new(components)?),
        })
    }

    /// The picture of this variable.
    pub fn picture(&self) -> Picture {
        match self {
            Var::Hyperbolic(_) => Picture::Hyperbolic,
            Var::Rational(_) => Picture::Rational,
        }
    }

    /// All n components.
    pub fn components(&self) -> &[Complex64] {
        match self {
            Var::Hyperbolic(v) => v.components(),
            Var::Rational(v) => v.components(),
        }
    }

    /// Number of components.
    pub fn n(&self) -> usize {
        self.components().len()
    }

    /// Apply a component permutation: result component `a` is `self[perm[a]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let c = self.components();
        let comps: Vec<Complex64> = perm.iter().map(|&p| c[p]).collect();
        match self {
            Var::Hyperbolic(_) => Var::Hyperbolic(MultiplicativeVar { comps }),
            Var::Rational(_) => Var::Rational(RationalVar { comps }),
        }
    }

    /// Canonical representative of the permutation class; see [`canonical_order`].
    pub fn canonical(&self) -> Self {
        match self {
            Var::Hyperbolic(v) => Var::Hyperbolic(canonical_order(v)),
            Var::Rational(v) => Var::Rational(canonical_order(v)),
        }
    }

    /// Chart coordinates used by the iterative solvers: principal logs of the
    /// free components (hyperbolic) or the free components themselves (rational).
    pub fn chart(&self) -> Vec<Complex64> {
        match self {
            Var::Hyperbolic(v) => v.free().iter().map(|z| z.ln()).collect(),
            Var::Rational(v) => v.free().to_vec(),
        }
    }

    /// Inverse of [`Var::chart`].
    pub fn from_chart(picture: Picture, chart: &[Complex64]) -> Self {
        match picture {
            Picture::Hyperbolic => {
                let free: Vec<Complex64> = chart.iter().map(|z| z.exp()).collect();
                let mut comps = free.clone();
                comps.push((-chart.iter().sum::<Complex64>()).exp());
                Var::Hyperbolic(MultiplicativeVar { comps })
            }
            Picture::Rational => Var::Rational(RationalVar::from_free(chart)),
        }
    }
}

/// Quantum spin `ξ`: n real components summing to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpinVar {
    comps: Vec<f64>,
}

impl SpinVar {
    /// Build from all n components, validating the sum-to-zero constraint.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let c: Vec<Complex64> = components.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        check_sum_zero(&c, "spin")?;
        Ok(Self { comps: components })
    }

    /// Build from the first n − 1 components.
    pub fn from_free(free: &[f64]) -> Self {
        let mut comps = free.to_vec();
        comps.push(-free.iter().sum::<f64>());
        Self { comps }
    }

    /// All n components.
    pub fn components(&self) -> &[f64] {
        &self.comps
    }

    /// Number of components.
    pub fn n(&self) -> usize {
        self.comps.len()
    }
}

impl TryFrom<Vec<f64>> for SpinVar {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpinVar::new(v)
    }
}

impl From<SpinVar> for Vec<f64> {
    fn from(s: SpinVar) -> Vec<f64> {
        s.comps
    }
}

/// A pair of spectral parameters such as `α = (α₁, α₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct RapidityPair {
    /// First entry (`α₁`).
    pub first: Complex64,
    /// Second entry (`α₂`).
    pub second: Complex64,
}

impl RapidityPair {
    /// Build a pair; both entries must be nonzero and finite.
    pub fn new(first: Complex64, second: Complex64) -> Result<Self> {
        check_finite(&[first, second])?;
        if first.norm_sqr() == 0.0 || second.norm_sqr() == 0.0 {
            return Err(Error::Domain("rapidity entries must be nonzero".into()));
        }
        Ok(Self { first, second })
    }

    /// Unit-modulus pair `(e^{iθ₁}, e^{iθ₂})`.
    pub fn from_angles(theta1: f64, theta2: f64) -> Self {
        Self { first: Complex64::from_polar(1.0, theta1), second: Complex64::from_polar(1.0, theta2) }
    }

    /// Real pair `(p₁, p₂)` as used by the rational picture; entries may be any finite value.
    pub fn real(p1: f64, p2: f64) -> Self {
        Self { first: Complex64::new(p1, 0.0), second: Complex64::new(p2, 0.0) }
    }

    /// The swapped pair `(α₂, α₁)`.
    pub fn hat(&self) -> Self {
        Self { first: self.second, second: self.first }
    }

    /// Entry by 1-based index as used in the formulas (`1` → first, `2` → second).
    pub fn get(&self, index: usize) -> Complex64 {
        match index {
            1 => self.first,
            2 => self.second,
            _ => panic!("rapidity index must be 1 or 2, got {index}"),
        }
    }
}

impl TryFrom<[[f64; 2]; 2]> for RapidityPair {
    type Error = Error;
    fn try_from(p: [[f64; 2]; 2]) -> Result<Self> {
        RapidityPair::new(Complex64::new(p[0][0], p[0][1]), Complex64::new(p[1][0], p[1][1]))
    }
}

impl From<RapidityPair> for [[f64; 2]; 2] {
    fn from(p: RapidityPair) -> Self {
        [[p.first.re, p.first.im], [p.second.re, p.second.im]]
    }
}

/// Componentwise exponential `x ↦ y = eˣ`; the last component is set to the
/// reciprocal of the product of the others so that Π y = 1 exactly.
pub fn exp_map(x: &AdditiveVar) -> MultiplicativeVar {
    let free: Vec<Complex64> = x.free().iter().map(|z| z.exp()).collect();
    MultiplicativeVar::from_free(&free)
}

/// Inverse of [`exp_map`]: principal logarithms of the first n − 1
/// components, the last set to minus their sum.
pub fn log_map(y: &MultiplicativeVar) -> AdditiveVar {
    let free: Vec<Complex64> = y.free().iter().map(|z| z.ln()).collect();
    AdditiveVar::from_free(&free)
}

/// Exchange components 1 and 2 of an n = 3 variable.
pub fn hat<T: Constrained>(y: &T) -> Result<T> {
    let c = y.components();
    if c.len() != 3 {
        return Err(Error::Domain(format!("hat is defined for n = 3 only, got n = {}", c.len())));
    }
    T::new(vec![c[1], c[0], c[2]])
}

/// Classical variable `x` with `ξ = x / sqrt(2πħ)`.
pub fn qc_scale(spin: &SpinVar, qc: &QcParams) -> AdditiveVar {
    let s = (2.0 * PI * qc.hbar()).sqrt();
    let free: Vec<Complex64> = spin.comps[..spin.n() - 1].iter().map(|&v| Complex64::new(v * s, 0.0)).collect();
    AdditiveVar::from_free(&free)
}

/// Inverse of [`qc_scale`]; the classical variable must be real.
pub fn qc_unscale(x: &AdditiveVar, qc: &QcParams) -> Result<SpinVar> {
    if x.components().iter().any(|z| z.im != 0.0) {
        return Err(Error::Domain("only real classical variables map to quantum spins".into()));
    }
    let s = (2.0 * PI * qc.hbar()).sqrt();
    let free: Vec<f64> = x.free().iter().map(|z| z.re / s).collect();
    Ok(SpinVar::from_free(&free))
}

fn lex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Sort components lexicographically by (real part, imaginary part).
///
/// Idempotent and invariant under permutations of the input; the constraint
/// is re-validated on the result.
pub fn canonical_order<T: Constrained>(y: &T) -> T {
    let mut c = y.components().to_vec();
    c.sort_by(lex);
    T::new(c).expect("permutation preserves the constraint")
}
