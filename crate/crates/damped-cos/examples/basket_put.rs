//! Prices a two-asset arithmetic basket put in the Black-Scholes model with
//! tolerance-driven parameter selection, and cross-checks the answer against
//! a seeded Monte Carlo run.

use damped_cos::models::{bs_log_return_model, MarketSpec};
use damped_cos::oracles::mc_estimate;
use damped_cos::solver::Problem;
use damped_cos::tuning::Tolerance;
use damped_cos::{DampingFactor, Payoff};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let market = MarketSpec::new(vec![50.0, 50.0], 0.0, 1.0)?;
    let sigma = [0.04, 0.04, 0.04, 0.16]; // rho = 1/2
    let model = bs_log_return_model(&market, &sigma)?;
    let payoff = Payoff::BasketPut { strike: 100.0 };

    let problem = Problem::new(
        &model,
        payoff.clone(),
        Some(market.clone()),
        DampingFactor::uniform(-4.0, 2),
    )?;
    let sol = problem.solve_auto(&Tolerance::new(1e-2)?)?;
    println!(
        "COS price {:.6}  (M = {:.3?}, N = {:?}, {:.2?})",
        sol.value,
        sol.geom.m(),
        sol.n,
        sol.wall_time
    );

    let mc = mc_estimate(&model, &payoff, Some(&market), 2_000_000, 42);
    println!(
        "MC  price {:.6} ± {:.1e} (99%)",
        mc.estimate, mc.half_width_99
    );
    assert!((sol.value - mc.estimate).abs() <= mc.half_width_99 + 1e-2);
    Ok(())
}
