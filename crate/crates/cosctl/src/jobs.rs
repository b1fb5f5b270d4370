//! Job execution for the CLI commands.

use crate::config::Config;
use crate::csvout;
use anyhow::{anyhow, bail, Context, Result};
use damped_cos::models::DecayExponent;
use damped_cos::oracles::{
    digital_bs_problem, high_res_cos_oracle, mc_estimate_threaded, required_paths, Z_99,
};
use damped_cos::solver::{Problem, Solution};
use damped_cos::tuning::{convergence_slope_bound, ConvergenceStudy};
use damped_cos::{DampingFactor, Payoff, PlanGeometry};
use std::path::{Path, PathBuf};

/// Global flags shared by every command.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub strict: bool,
}

fn print_solution(kind: &str, sol: &Solution) {
    println!(
        "{kind} value = {:.6} ({})",
        sol.value,
        csvout::g17(sol.value)
    );
    println!("alpha = {}", csvout::join(&sol.alpha));
    println!("M = {}", csvout::join(sol.geom.m()));
    println!("L = {}", csvout::join(sol.geom.l()));
    println!(
        "N = {}",
        sol.n
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    for (k, v) in &sol.diagnostics {
        println!("{k} = {:.6e}", v);
    }
    println!("time_ms = {:.3}", sol.wall_time.as_secs_f64() * 1e3);
}

fn handle_plateau(sol: &Solution, strict: bool) -> Result<()> {
    if sol.plateau() {
        let gap = sol.n_outcome.map(|o| o.gap()).unwrap_or(f64::NAN);
        eprintln!(
            "warning: Parseval gap plateaued at {gap:.3e} before reaching the tolerance \
             (floating-point floor); result uses the best achieved term count"
        );
        if strict {
            bail!("plateau detected in strict mode");
        }
    }
    Ok(())
}

/// Shared assembly for price/cdf/moment/tune: model, payoff, damping, and
/// either the tuned or a pinned plan.
fn solve_value_job(cfg: &Config, opts: &RunOptions, expect: Option<&str>) -> Result<Solution> {
    let model = cfg.model()?;
    let payoff = match expect {
        Some("cdf") => {
            let p = cfg.payoff()?;
            if !matches!(p, Payoff::Cdf { .. }) {
                bail!("the cdf command needs payoff.kind = cdf");
            }
            p
        }
        Some("abs_moment") => match cfg.get("payoff.kind") {
            None => Payoff::AbsMoment,
            Some("abs_moment") => Payoff::AbsMoment,
            Some(other) => bail!("the moment command needs payoff.kind = abs_moment, got {other}"),
        },
        _ => cfg.payoff()?,
    };
    let d = model.dim();
    let alpha = cfg.alpha(&payoff, d)?;
    let market = if cfg.has_market() {
        Some(cfg.market()?)
    } else {
        None
    };
    let problem = Problem::new(model.as_dyn(), payoff, market, alpha)
        .map_err(|e| anyhow!("{e}"))?
        .with_threads(opts.threads);
    let sol = match cfg.get("plan.n") {
        Some(_) => {
            let n = cfg.usize_or("plan.n", 0)?;
            let l = cfg.vec_f64("plan.l")?;
            let l = if l.len() == 1 && d > 1 {
                vec![l[0]; d]
            } else {
                l
            };
            let m = match cfg.get("plan.m") {
                Some(_) => cfg.vec_f64("plan.m")?,
                None => l.clone(),
            };
            let geom = PlanGeometry::new(m, l).map_err(|e| anyhow!("plan: {e}"))?;
            problem
                .solve_fixed(&geom, &vec![n; d])
                .map_err(|e| anyhow!("{e}"))?
        }
        None => {
            let tol = cfg.tolerance()?;
            problem.solve_auto(&tol).map_err(|e| anyhow!("{e}"))?
        }
    };
    handle_plateau(&sol, opts.strict)?;
    Ok(sol)
}

pub fn run_price(cfg: &Config, opts: &RunOptions) -> Result<()> {
    if !cfg.has_market() {
        bail!("the price command needs a market section for discounting");
    }
    let sol = solve_value_job(cfg, opts, None)?;
    print_solution("price", &sol);
    Ok(())
}

pub fn run_cdf(cfg: &Config, opts: &RunOptions) -> Result<()> {
    let sol = solve_value_job(cfg, opts, Some("cdf"))?;
    print_solution("cdf", &sol);
    Ok(())
}

pub fn run_moment(cfg: &Config, opts: &RunOptions) -> Result<()> {
    let sol = solve_value_job(cfg, opts, Some("abs_moment"))?;
    print_solution("moment", &sol);
    Ok(())
}

pub fn run_tune(cfg: &Config, opts: &RunOptions) -> Result<()> {
    let model = cfg.model()?;
    let payoff = cfg.payoff()?;
    let d = model.dim();
    let alpha = cfg.alpha(&payoff, d)?;
    let market = if cfg.has_market() {
        Some(cfg.market()?)
    } else {
        None
    };
    let problem =
        Problem::new(model.as_dyn(), payoff, market, alpha.clone()).map_err(|e| anyhow!("{e}"))?;
    let tol = cfg.tolerance()?;
    let (geom, outcome) = problem.tune(&tol).map_err(|e| anyhow!("{e}"))?;
    println!("alpha = {}", csvout::join(alpha.as_slice()));
    println!("M = {}", csvout::join(geom.m()));
    println!("L = {}", csvout::join(geom.l()));
    println!("N = {}", outcome.n());
    println!("parseval_gap = {:.6e}", outcome.gap());
    if outcome.is_plateau() {
        eprintln!("warning: term-count search plateaued (floating-point floor)");
        if opts.strict {
            bail!("plateau detected in strict mode");
        }
    }
    Ok(())
}

/// Order-of-convergence study: for each `n` in the grid, run the COS method
/// with `M = L = γ n^β` per axis against the high-resolution self-oracle and
/// emit `n, abs_error, slope_bound` rows.
pub fn run_convergence(cfg: &Config, opts: &RunOptions) -> Result<()> {
    let model = cfg.model()?;
    let payoff = cfg.payoff()?;
    let d = model.dim();
    let alpha = cfg.alpha(&payoff, d)?;
    let market = if cfg.has_market() {
        Some(cfg.market()?)
    } else {
        None
    };
    let study = ConvergenceStudy::new(
        cfg.f64("convergence.beta")?,
        cfg.f64("convergence.gamma")?,
        cfg.vec_usize("convergence.n_grid")?,
    )
    .map_err(|e| anyhow!("convergence: {e}"))?;
    let damped = !alpha.is_zero();
    let problem = Problem::new(model.as_dyn(), payoff, market, alpha)
        .map_err(|e| anyhow!("{e}"))?
        .with_threads(opts.threads);
    let slope_bound = match model.as_dyn().decay() {
        DecayExponent::Exponential => f64::NEG_INFINITY,
        decay => {
            convergence_slope_bound(decay, d, study.beta, damped).map_err(|e| anyhow!("{e}"))?
        }
    };
    let reference = high_res_cos_oracle(&problem).map_err(|e| anyhow!("oracle: {e}"))?;
    let mut rows = Vec::new();
    for &n in &study.n_grid {
        let half = study.box_half_width(n);
        let geom = PlanGeometry::cube(vec![half; d]).map_err(|e| anyhow!("{e}"))?;
        let sol = problem
            .solve_fixed(&geom, &vec![n; d])
            .map_err(|e| anyhow!("{e}"))?;
        let err = (sol.value - reference).abs();
        println!("n = {n}: abs_error = {err:.6e}");
        rows.push(vec![
            n.to_string(),
            csvout::g17(err),
            csvout::g17(slope_bound),
        ]);
    }
    if let Some(path) = &opts.out {
        csvout::write_csv(path, &["n", "abs_error", "slope_bound"], &rows)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// COS-vs-Monte-Carlo timing comparison on the uncorrelated BS digital put.
/// Emits `d, N, L, U, cos_time, mc_time, value` rows; `mc_time` extrapolates
/// the pilot run's per-path cost to the `U` paths required for the target
/// accuracy.
pub fn run_compare_mc(cfg: &Config, opts: &RunOptions) -> Result<()> {
    let dims = cfg.vec_usize("compare.dims")?;
    let ns = cfg.vec_usize("compare.n")?;
    let ls = cfg.vec_f64("compare.l")?;
    if ns.len() != dims.len() || ls.len() != dims.len() {
        bail!("compare.n and compare.l must list one entry per compare.dims entry");
    }
    let sigma = cfg.f64_or("compare.sigma", 0.2)?;
    let spot = cfg.f64_or("compare.spot", 100.0)?;
    let strike = cfg.f64_or("compare.strike", 100.0)?;
    let rate = cfg.f64_or("compare.rate", 0.0)?;
    let maturity = cfg.f64_or("compare.maturity", 1.0)?;
    let alpha = cfg.f64_or("compare.alpha", -7.0)?;
    let epsilon = cfg.f64_or("compare.epsilon", 1e-5)?;
    let pilot = cfg.usize_or("compare.pilot_paths", 200_000)? as u64;
    let mut rows = Vec::new();
    for ((&d, &n), &l) in dims.iter().zip(&ns).zip(&ls) {
        let (model, market, payoff) = digital_bs_problem(d, sigma, spot, strike, rate, maturity)
            .map_err(|e| anyhow!("{e}"))?;
        let problem = Problem::new(
            &model,
            payoff.clone(),
            Some(market.clone()),
            DampingFactor::uniform(alpha, d),
        )
        .map_err(|e| anyhow!("{e}"))?
        .with_threads(opts.threads);
        let geom = PlanGeometry::cube(vec![l; d]).map_err(|e| anyhow!("{e}"))?;
        let t0 = std::time::Instant::now();
        let sol = problem
            .solve_fixed(&geom, &vec![n; d])
            .map_err(|e| anyhow!("{e}"))?;
        let cos_time = t0.elapsed().as_secs_f64();
        let t1 = std::time::Instant::now();
        let mc = mc_estimate_threaded(
            &model,
            &payoff,
            Some(&market),
            pilot,
            opts.seed,
            opts.threads,
        );
        let pilot_time = t1.elapsed().as_secs_f64();
        let variance = (mc.half_width_99 / Z_99).powi(2) * pilot as f64;
        let u = required_paths(epsilon, variance);
        let mc_time = pilot_time / pilot as f64 * u as f64;
        println!(
            "d = {d}: N = {n}, L = {l}, U = {u}, cos {cos_time:.3e} s, mc {mc_time:.3e} s (extrapolated), value {:.6}",
            sol.value
        );
        rows.push(vec![
            d.to_string(),
            n.to_string(),
            csvout::g17(l),
            u.to_string(),
            csvout::g17(cos_time),
            csvout::g17(mc_time),
            csvout::g17(sol.value),
        ]);
    }
    if let Some(path) = &opts.out {
        csvout::write_csv(
            path,
            &["d", "N", "L", "U", "cos_time", "mc_time", "value"],
            &rows,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn dispatch(command: &str, config_path: &Path, opts: &RunOptions) -> Result<()> {
    let cfg = Config::load(config_path)?;
    match command {
        "price" => run_price(&cfg, opts),
        "cdf" => run_cdf(&cfg, opts),
        "moment" => run_moment(&cfg, opts),
        "tune" => run_tune(&cfg, opts),
        "convergence" => run_convergence(&cfg, opts),
        "compare-mc" => run_compare_mc(&cfg, opts),
        other => Err(anyhow!("unknown command {other}")),
    }
    .with_context(|| format!("{command} job failed"))
}
