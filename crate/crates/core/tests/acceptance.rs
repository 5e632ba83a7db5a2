//! Acceptance suite: one pass/fail line per criterion, with the measured
//! figure, its tolerance and the runtime against its budget.
//!
//! Run with `cargo test -p multistar --test acceptance`. Set
//! `MULTISTAR_EXPENSIVE=1` to add the n = 3 star-star relation (minutes).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multistar::cafcc::{cafcc_batch, CafccConfig};
use multistar::cubic3::{reduction_residuals, p_system_solutions, solve5_n3, SymmetricPair};
use multistar::lattice::{action_gradient_check, evolve_ne, init_lattice, BranchPolicy, IcKind, InitialCondition, LatticeParams};
use multistar::legs::{leg_ratio, rational_limit_defect, verify_phi_derivative, Color, LegContext};
use multistar::multispin::{Picture, RapidityPair, SpinVar, Var};
use multistar::quadrature::{saddle_bridge_check, star_star_residual, QuadratureConfig, WeightParams};
use multistar::solver::{match_up_to_permutation, solve_newton_general, Slot, SolveConfig, Stencil5};
use multistar::special_fn::{hyp_gamma, log_hyp_gamma, qc_leading_log, HyperbolicParams, QcParams};
use multistar::Result;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(1e-300)
}

/// Inversion and both difference equations at 200 random strip points for
/// each b ∈ {0.5, 1, 1.7}. Points are drawn so that both ends of a shift lie
/// at least 0.05 inside the strip.
fn criterion_1() -> Result<Outcome> {
    let tol = 1e-8;
    let mut worst = [0.0f64; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for b in [0.5, 1.0, 1.7] {
        let hp = HyperbolicParams::new(b)?;
        let eta = hp.eta();
        for _ in 0..200 {
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-eta + 0.05..eta - 0.05));
            worst[0] = worst[0].max((hyp_gamma(z, &hp)? * hyp_gamma(-z, &hp)? - 1.0).norm());
            for (k, shift) in [b, 1.0 / b].into_iter().enumerate() {
                let lo = (shift - eta + 0.05).max(-eta + 0.05);
                let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(lo..eta - 0.05));
                let got = hyp_gamma(z - I * shift, &hp)? / hyp_gamma(z, &hp)?;
                let want = if k == 0 { 2.0 * (PI * b * (2.0 * z - I * b) / 2.0).cosh() } else { 2.0 * (PI * (2.0 * z - I / b) / (2.0 * b)).cosh() };
                worst[k + 1] = worst[k + 1].max(rel(got, want));
            }
        }
    }
    Ok(Outcome {
        pass: worst.iter().all(|&w| w < tol),
        detail: format!("inversion {:.1e}, shift by ib {:.1e}, shift by i/b {:.1e} (tol {tol:.0e})", worst[0], worst[1], worst[2]),
    })
}

/// Log-error of the leading quasi-classical term at z = 0.5 must at least
/// halve when b goes from 0.2 to 0.1.
fn criterion_2() -> Result<Outcome> {
    let z = c(0.5, 0.0);
    let err = |b: f64| -> Result<f64> {
        let hp = HyperbolicParams::new(b)?;
        let qc = QcParams::new(2.0 * PI * b * b)?;
        Ok((log_hyp_gamma(z / (2.0 * PI * b), &hp)? - qc_leading_log(z, &qc)?).norm())
    };
    let (e2, e1) = (err(0.2)?, err(0.1)?);
    Ok(Outcome { pass: e1 < 0.5 * e2, detail: format!("error {e1:.2e} at b = 0.1 vs {e2:.2e} at b = 0.2, ratio {:.3} (< 0.5)", e1 / e2) })
}

/// Finite-difference derivative identities of the leg functions and of the
/// star Lagrangians, 30 trials each at n = 2, 3, 5.
fn criterion_3() -> Result<Outcome> {
    let tol = 1e-5;
    let mut legs: f64 = 0.0;
    let mut stars: f64 = 0.0;
    for n in [2, 3, 5] {
        legs = legs.max(verify_phi_derivative(30 + n as u64, n, 30)?);
        stars = stars.max(saddle_bridge_check(n, 60 + n as u64, 30)?);
    }
    Ok(Outcome {
        pass: legs < tol && stars < tol,
        detail: format!("leg derivatives {legs:.1e}, star derivatives {stars:.1e} (tol {tol:.0e})"),
    })
}

struct Instance {
    f: Var,
    i: Var,
    j: Var,
    k: Var,
    alpha: RapidityPair,
    beta: RapidityPair,
}

fn instance(picture: Picture, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = || {
        let free: Vec<Complex64> = (0..2)
            .map(|_| match picture {
                Picture::Hyperbolic => c(rng.gen_range(-1.0f64..1.0).exp(), 0.0),
                Picture::Rational => c(rng.gen_range(-1.0..1.0), 0.0),
            })
            .collect();
        Var::from_free(picture, &free)
    };
    let (f, i, j, k) = (v(), v(), v(), v());
    let (alpha, beta) = match picture {
        Picture::Hyperbolic => (
            RapidityPair::from_angles(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
            RapidityPair::from_angles(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
        ),
        Picture::Rational => (
            RapidityPair::real(rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)),
            RapidityPair::real(rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)),
        ),
    };
    Instance { f, i, j, k, alpha, beta }
}

fn five_point_residual(inst: &Instance, l: &Var) -> Result<f64> {
    let ctx = LegContext { alpha: inst.alpha, beta: inst.beta };
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        worst = worst.max((leg_ratio(a, &inst.f, [&inst.i, &inst.j, &inst.k, l], &ctx)? - 1.0).norm());
    }
    Ok(worst)
}

/// Closed-form n = 3 solutions: residuals, root constraint and agreement
/// with Newton multistart, 50 instances per picture.
fn criterion_4() -> Result<Outcome> {
    let mut worst_res: f64 = 0.0;
    let mut worst_constraint: f64 = 0.0;
    let mut agree = [0usize; 2];
    for (p, picture) in [Picture::Hyperbolic, Picture::Rational].into_iter().enumerate() {
        for seed in 0..50 {
            let inst = instance(picture, 4000 + seed);
            let roots = solve5_n3(&inst.i, &inst.j, &inst.k, &inst.f, &inst.alpha, &inst.beta)?;
            for (t1, t2) in roots.pairs() {
                worst_res = worst_res.max(five_point_residual(&inst, &Var::from_free(picture, &[t1, t2]))?);
            }
            let t = roots.as_array();
            worst_constraint = worst_constraint.max(match picture {
                Picture::Hyperbolic => (t[0] * t[1] * t[2] - 1.0).norm(),
                Picture::Rational => (t[0] + t[1] + t[2]).norm(),
            });
            let closed = Var::from_free(picture, &[t[0], t[1]]);
            let st = Stencil5::new(
                inst.f.clone(),
                [Some(inst.i.clone()), Some(inst.j.clone()), Some(inst.k.clone()), None],
                Color::Black,
                inst.alpha,
                inst.beta,
            )?;
            let newton = solve_newton_general(&st, Slot::L, &SolveConfig { seed, ..SolveConfig::default() })?;
            if !newton.solutions.is_empty() && newton.solutions.iter().all(|s| match_up_to_permutation(s, &closed, 1e-7)) {
                agree[p] += 1;
            }
        }
    }
    Ok(Outcome {
        pass: worst_res < 1e-8 && worst_constraint < 1e-9 && agree == [50, 50],
        detail: format!(
            "residual {worst_res:.1e} (tol 1e-8), root constraint {worst_constraint:.1e} (tol 1e-9), Newton agreement {}/50 hyperbolic, {}/50 rational",
            agree[0], agree[1]
        ),
    })
}

/// Equivalence with the reduced P-equations in both directions.
fn criterion_5() -> Result<Outcome> {
    let tol = 1e-8;
    let mut forward: f64 = 0.0;
    let mut backward: f64 = 0.0;
    for picture in [Picture::Hyperbolic, Picture::Rational] {
        for seed in 0..50 {
            let inst = instance(picture, 5000 + seed);
            let (i, j, k, f, al, be) = (&inst.i, &inst.j, &inst.k, &inst.f, &inst.alpha, &inst.beta);
            let roots = solve5_n3(i, j, k, f, al, be)?;
            for (t1, t2) in roots.pairs() {
                let r = reduction_residuals(i, j, k, f, al, be, &SymmetricPair::of(&[t1, t2]))?;
                forward = forward.max(r[0]).max(r[1]);
            }
            for pair in p_system_solutions(i, j, k, f, al, be)? {
                let (t1, t2) = pair.components();
                backward = backward.max(five_point_residual(&inst, &Var::from_free(picture, &[t1, t2]))?);
            }
        }
    }
    Ok(Outcome {
        pass: forward < tol && backward < tol,
        detail: format!("P-equations at solutions {forward:.1e}, A_a − 1 at P-roots {backward:.1e} (tol {tol:.0e})"),
    })
}

/// Consistency around a face-centred cube.
fn criterion_6() -> Result<Outcome> {
    let cfg = CafccConfig::default();
    let runs = [
        (2, Picture::Hyperbolic, 100, 95),
        (3, Picture::Hyperbolic, 100, 95),
        (4, Picture::Hyperbolic, 20, 18),
        (5, Picture::Hyperbolic, 20, 18),
        (2, Picture::Rational, 100, 95),
        (3, Picture::Rational, 100, 95),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, picture, trials, need) in runs {
        let (summary, _) = cafcc_batch(n, picture, trials, 1000, &cfg)?;
        pass &= summary.successes >= need;
        parts.push(format!("{picture:?} n={n} {}/{trials}", summary.successes));
    }
    Ok(Outcome { pass, detail: parts.join(", ") })
}

fn random_ssr_case(seed: u64, n: usize) -> Result<([SpinVar; 4], WeightParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hp = HyperbolicParams::new(rng.gen_range(0.8..1.25))?;
    let q: [f64; 2] = [rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2)];
    let qmax = q[0].max(q[1]);
    let p = [qmax + rng.gen_range(0.2..0.8), qmax + rng.gen_range(0.2..0.8)];
    let bd = std::array::from_fn(|_| SpinVar::from_free(&(0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()));
    Ok((bd, WeightParams::new(hp, p, q)?))
}

/// Star-star relation at n = 2 for five random parameter/boundary sets.
fn criterion_7() -> Result<Outcome> {
    let tol = 1e-6;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let (bd, wp) = random_ssr_case(7000 + seed, 2)?;
        worst = worst.max(star_star_residual(&bd, &wp, &QuadratureConfig::default())?.residual);
    }
    Ok(Outcome { pass: worst < tol, detail: format!("n = 2 worst residual {worst:.1e} over 5 sets (tol {tol:.0e})") })
}

fn criterion_7_n3() -> Result<Outcome> {
    let tol = 1e-4;
    let (bd, wp) = random_ssr_case(7100, 3)?;
    let r = star_star_residual(&bd, &wp, &QuadratureConfig::expensive())?.residual;
    Ok(Outcome { pass: r < tol, detail: format!("n = 3 residual {r:.1e} (tol {tol:.0e})") })
}

/// 8 × 8 lattice evolution and the Euler–Lagrange check.
fn criterion_8() -> Result<Outcome> {
    let tol = 1e-8;
    let cfg = SolveConfig::default();
    let mut worst: f64 = 0.0;
    let mut el: f64 = 0.0;
    let mut complete = true;
    for picture in [Picture::Hyperbolic, Picture::Rational] {
        for n in [2, 3] {
            for kind in [IcKind::Corner, IcKind::Staircase] {
                let params = LatticeParams::new(n, picture);
                let mut lat = init_lattice(8, 8, &InitialCondition::random(kind), &params, 8)?;
                evolve_ne(&mut lat, &cfg, BranchPolicy::Nearest)?;
                complete &= lat.is_complete();
                worst = worst.max(lat.max_residual()?);
                if picture == Picture::Hyperbolic && n == 2 {
                    el = el.max(action_gradient_check(&lat)?);
                }
            }
        }
    }
    Ok(Outcome {
        pass: complete && worst < tol && el < 1e-5,
        detail: format!("complete {complete}, stencil residual {worst:.1e} (tol {tol:.0e}), |exp ∂𝒜 − 1| {el:.1e} (tol 1e-5)"),
    })
}

/// Convergence of the exponentiated 5-point ratio to the rational one: the
/// defect at ε = 1e-3 must be below 0.6 × the defect at ε = 2e-3.
///
/// The defect vanishes like ε⁴, so at these ε it is ~1e-16 relative and
/// direct subtraction in double precision only measures rounding (reported
/// alongside for reference); the verdict uses the cancellation-free
/// [`rational_limit_defect`].
fn criterion_9() -> Result<Outcome> {
    let mut worst_ratio: f64 = 0.0;
    let mut worst_direct: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let xs: Vec<[Complex64; 2]> = (0..5).map(|_| [c(rng.gen_range(-1.0..1.0), 0.0), c(rng.gen_range(-1.0..1.0), 0.0)]).collect();
        let al = [rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)];
        let be = [rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)];
        let rat: Vec<Var> = xs.iter().map(|x| Var::from_free(Picture::Rational, x)).collect();
        let ctx = LegContext { alpha: RapidityPair::real(al[0], al[1]), beta: RapidityPair::real(be[0], be[1]) };
        let corners = [&rat[1], &rat[2], &rat[3], &rat[4]];
        let defect = |eps: f64| -> Result<f64> {
            let mut e: f64 = 0.0;
            for a in 0..2 {
                e = e.max(rational_limit_defect(a, &rat[0], corners, &ctx, eps)?.norm());
            }
            Ok(e)
        };
        worst_ratio = worst_ratio.max(defect(1e-3)? / defect(2e-3)?);
        let direct = |eps: f64| -> Result<f64> {
            let e = |t: f64| c((t * eps).exp(), 0.0);
            let hyp: Vec<Var> = xs.iter().map(|x| Var::from_free(Picture::Hyperbolic, &x.map(|z| (z * eps).exp()))).collect();
            let hctx = LegContext { alpha: RapidityPair::new(e(al[0]), e(al[1]))?, beta: RapidityPair::new(e(be[0]), e(be[1]))? };
            let mut d: f64 = 0.0;
            for a in 0..2 {
                let h = leg_ratio(a, &hyp[0], [&hyp[1], &hyp[2], &hyp[3], &hyp[4]], &hctx)?;
                d = d.max((h - leg_ratio(a, &rat[0], corners, &ctx)?).norm());
            }
            Ok(d)
        };
        worst_direct = worst_direct.max(direct(1e-3)? / direct(2e-3)?);
    }
    Ok(Outcome {
        pass: worst_ratio < 0.6,
        detail: format!(
            "worst defect ratio ε = 1e-3 vs 2e-3: {worst_ratio:.4} (< 0.6) over 20 instances; direct subtraction, rounding-dominated: {worst_direct:.1}"
        ),
    })
}

fn main() {
    type Check = fn() -> Result<Outcome>;
    let mut criteria: Vec<(&str, &str, Check, Duration)> = vec![
        ("1", "hyperbolic gamma identities", criterion_1, Duration::from_secs(60)),
        ("2", "quasi-classical asymptotics", criterion_2, Duration::from_secs(30)),
        ("3", "derivative identities", criterion_3, Duration::from_secs(60)),
        ("4", "n = 3 closed form", criterion_4, Duration::from_secs(120)),
        ("5", "reduced-equation equivalence", criterion_5, Duration::from_secs(120)),
        ("6", "face-centred cube consistency", criterion_6, Duration::from_secs(600)),
        ("7", "star-star relation", criterion_7, Duration::from_secs(300)),
        ("8", "lattice evolution", criterion_8, Duration::from_secs(120)),
        ("9", "rational limit", criterion_9, Duration::from_secs(120)),
    ];
    if std::env::var("MULTISTAR_EXPENSIVE").is_ok_and(|v| v == "1") {
        criteria.push(("7b", "star-star relation, n = 3", criterion_7_n3, Duration::from_secs(1800)));
    }
    let mut failures = 0;
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass && took <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:<2} {} {name}: {detail}; {:.1} s (budget {} s)",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
