//! The five subcommands. Each returns the exit status on success and a
//! [`Failure`] otherwise; a one-line summary goes to standard error.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use multistar::cafcc::cafcc_batch;
use multistar::lattice::{evolve_ne, init_lattice, InitialCondition, LatticeParams};
use multistar::multispin::SpinVar;
use multistar::quadrature::star_star_residual;
use multistar::solver::{random_stencil, solve_for_corner};
use multistar::special_fn::{hyp_gamma, log_extend_hyp_gamma, HyperbolicParams};

use crate::config::{CafccRun, EvolveRun, GammaCheck, GammaRun, SolveRun, SsrRun};
use crate::output::{emit, Meta};
use crate::{Failure, Output};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Serialize)]
struct CheckResult {
    check: &'static str,
    /// Relative error, or `None` when not applicable.
    error: Option<f64>,
    pass: bool,
    note: Option<String>,
}

#[derive(Serialize)]
struct GammaResult {
    value: Complex64,
    log_value: Complex64,
    checks: Vec<CheckResult>,
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm().max(f64::MIN_POSITIVE)
}

fn shift_check(name: &'static str, z: Complex64, shift: f64, hp: &HyperbolicParams, tol: f64) -> Result<CheckResult, Failure> {
    let eta = hp.eta();
    let w = z - I * shift;
    if z.im.abs() >= eta || w.im.abs() >= eta {
        return Ok(CheckResult { check: name, error: None, pass: true, note: Some(format!("z or z − {shift}i lies outside the strip; not applicable")) });
    }
    let got = hyp_gamma(w, hp)? / hyp_gamma(z, hp)?;
    let want = 2.0 * (PI * shift * (2.0 * z - I * shift) / 2.0).cosh();
    let e = rel(got, want);
    Ok(CheckResult { check: name, error: Some(e), pass: e < tol, note: None })
}

pub fn gamma(cfg: &GammaRun, out: &Output) -> Result<i32, Failure> {
    let hp = cfg.validate()?;
    let meta = Meta::new("gamma", 0, cfg)?;
    let log_value = log_extend_hyp_gamma(cfg.z, &hp)?;
    let mut checks = Vec::new();
    for check in &cfg.checks {
        match check {
            GammaCheck::Inversion => {
                let p = (log_value + log_extend_hyp_gamma(-cfg.z, &hp)?).exp();
                let e = (p - 1.0).norm();
                checks.push(CheckResult { check: "inversion", error: Some(e), pass: e < cfg.tol, note: None });
            }
            GammaCheck::Shift => {
                checks.push(shift_check("shift_b", cfg.z, hp.b(), &hp, cfg.tol)?);
                checks.push(shift_check("shift_inv_b", cfg.z, 1.0 / hp.b(), &hp, cfg.tol)?);
            }
        }
    }
    let result = GammaResult { value: log_value.exp(), log_value, checks };
    let mut rows: Vec<(String, f64, f64, String)> = vec![
        ("value".into(), result.value.re, result.value.im, String::new()),
        ("log_value".into(), result.log_value.re, result.log_value.im, String::new()),
    ];
    for c in &result.checks {
        rows.push((format!("check_{}", c.check), c.error.unwrap_or(f64::NAN), 0.0, if c.pass { "pass" } else { "fail" }.into()));
    }
    emit(&meta, cfg, &result, &["quantity", "re", "im", "status"], &rows, out.format, out.path.as_deref())?;
    let failed = result.checks.iter().filter(|c| !c.pass).count();
    eprintln!("gamma: Γ_h({}; b = {}) = {}; {} of {} checks failed", cfg.z, cfg.b, result.value, failed, result.checks.len());
    Ok(if failed == 0 { 0 } else { 1 })
}

pub fn solve(cfg: &SolveRun, out: &Output) -> Result<i32, Failure> {
    cfg.validate()?;
    let meta = Meta::new("solve", cfg.seed, cfg)?;
    let stencil = random_stencil(cfg.picture, cfg.n, cfg.color, cfg.seed)?;
    let report = solve_for_corner(&stencil, cfg.corner, &cfg.solver)?;
    #[derive(Serialize)]
    struct SolveResult<'a> {
        stencil: &'a multistar::solver::Stencil5,
        report: &'a multistar::solver::SolverReport,
    }
    let mut rows = Vec::new();
    for (k, (v, r)) in report.solutions.iter().zip(&report.residuals).enumerate() {
        for (a, z) in v.components().iter().enumerate() {
            rows.push((k, a, z.re, z.im, *r));
        }
    }
    emit(&meta, cfg, &SolveResult { stencil: &stencil, report: &report }, &["class", "component", "re", "im", "residual"], &rows, out.format, out.path.as_deref())?;
    let worst = report.residuals.iter().copied().fold(0.0, f64::max);
    eprintln!("solve: {} solution class(es), max residual {worst:.2e}", report.branch_count);
    Ok(0)
}

pub fn evolve(cfg: &EvolveRun, out: &Output) -> Result<i32, Failure> {
    cfg.validate()?;
    let meta = Meta::new("evolve", cfg.seed, cfg)?;
    let mut params = LatticeParams::new(cfg.n, cfg.picture);
    params.u = cfg.u.unwrap_or(params.u);
    params.v = cfg.v.unwrap_or(params.v);
    let mut lattice = init_lattice(cfg.size, cfg.size, &InitialCondition::random(cfg.ic), &params, cfg.seed)?;
    let report = evolve_ne(&mut lattice, &cfg.solver, cfg.branch)?;
    let residuals = lattice.residual_map()?;
    #[derive(Serialize)]
    struct EvolveResult<'a> {
        complete: bool,
        report: &'a multistar::lattice::EvolveReport,
        residual_map: &'a [multistar::lattice::ResidualEntry],
        lattice: &'a multistar::lattice::CheckerLattice,
    }
    let complete = lattice.is_complete();
    let rows: Vec<(usize, usize, f64)> = residuals.iter().map(|e| (e.x, e.y, e.residual)).collect();
    let result = EvolveResult { complete, report: &report, residual_map: &residuals, lattice: &lattice };
    emit(&meta, cfg, &result, &["x", "y", "residual"], &rows, out.format, out.path.as_deref())?;
    let worst = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    eprintln!("evolve: {0}×{0} lattice complete = {complete}, max stencil residual {worst:.2e}", cfg.size);
    Ok(if complete { 0 } else { 1 })
}

pub fn cafcc(cfg: &CafccRun, out: &Output) -> Result<i32, Failure> {
    cfg.validate()?;
    let meta = Meta::new("cafcc", cfg.seed, cfg)?;
    let (summary, reports) = cafcc_batch(cfg.n, cfg.picture, cfg.trials, cfg.seed, &cfg.experiment)?;
    #[derive(Serialize)]
    struct CafccResult<'a> {
        summary: &'a multistar::cafcc::BatchSummary,
        trials: &'a [multistar::cafcc::CafccReport],
    }
    let rows: Vec<(u64, bool, f64, usize, String)> =
        reports.iter().map(|r| (r.seed, r.success, r.max_check(), r.backtracks, r.failure.clone().unwrap_or_default())).collect();
    emit(&meta, cfg, &CafccResult { summary: &summary, trials: &reports }, &["seed", "success", "max_check", "backtracks", "failure"], &rows, out.format, out.path.as_deref())?;
    eprintln!(
        "cafcc: {}/{} consistent (n = {}, {:?}), max check residual {:.2e}",
        summary.successes, summary.trials, cfg.n, cfg.picture, summary.max_check_residual
    );
    Ok(match cfg.min_rate {
        Some(r) if summary.success_rate < r => 1,
        _ => 0,
    })
}

pub fn ssr(cfg: &SsrRun, out: &Output) -> Result<i32, Failure> {
    let wp = cfg.validate()?;
    let meta = Meta::new("ssr", cfg.seed, cfg)?;
    let boundary: [SpinVar; 4] = match &cfg.boundary {
        Some(bd) => std::array::from_fn(|k| SpinVar::from_free(&bd[k])),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            std::array::from_fn(|_| SpinVar::from_free(&(0..cfg.n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
        }
    };
    let ss = star_star_residual(&boundary, &wp, &cfg.quadrature_config())?;
    #[derive(Serialize)]
    struct SsrResult<'a> {
        boundary: &'a [SpinVar; 4],
        lhs: Complex64,
        rhs: Complex64,
        residual: f64,
        quadrature_error: f64,
        threshold: f64,
        pass: bool,
    }
    let threshold = cfg.threshold();
    let pass = ss.residual < threshold;
    let result = SsrResult { boundary: &boundary, lhs: ss.lhs, rhs: ss.rhs, residual: ss.residual, quadrature_error: ss.error, threshold, pass };
    let rows = vec![("lhs", ss.lhs.re, ss.lhs.im), ("rhs", ss.rhs.re, ss.rhs.im), ("residual", ss.residual, 0.0)];
    emit(&meta, cfg, &result, &["quantity", "re", "im"], &rows, out.format, out.path.as_deref())?;
    eprintln!("ssr: n = {}, residual {:.2e} (threshold {threshold:.0e}) {}", cfg.n, ss.residual, if pass { "pass" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}
