//! Independent reference values: seeded Monte Carlo for both model families,
//! the closed-form normal CDF (uncorrelated case) and a high-resolution COS
//! self-oracle for convergence studies.

use crate::engine::neumaier_add;
use crate::models::{CharacteristicModel, MarketSpec, NormalModel};
use crate::payoffs::Payoff;
use crate::solver::Problem;
use crate::special::normal_cdf;
use crate::tuning::Tolerance;
use crate::{CosError, Result, MAX_DIM};
use alloc::vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Standard normal quantile at 0.995; half-widths below are 99% two-sided.
pub const Z_99: f64 = 2.5758293035489004;

/// Paths per RNG substream. Substream `b` seeds `ChaCha8(seed)` with stream
/// id `b`, so the estimate is bitwise reproducible for any worker count.
pub const MC_BLOCK: u64 = 8192;

/// A Monte Carlo estimate with its 99% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub estimate: f64,
    pub half_width_99: f64,
    pub n_paths: u64,
    pub seed: u64,
}

pub(crate) fn mc_block_sums(
    model: &dyn CharacteristicModel,
    payoff: &Payoff,
    discount: f64,
    seed: u64,
    block: u64,
    count: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let d = model.dim();
    let mut x = [0.0f64; MAX_DIM];
    let (mut s, mut sc) = (0.0, 0.0);
    let (mut q, mut qc) = (0.0, 0.0);
    for _ in 0..count {
        model.sample_into(&mut rng, &mut x[..d]);
        let w = discount * payoff.evaluate(&x[..d]);
        neumaier_add(&mut s, &mut sc, w);
        neumaier_add(&mut q, &mut qc, w * w);
    }
    (s + sc, q + qc)
}

pub(crate) fn mc_combine(
    sums: impl Iterator<Item = (f64, f64)>,
    n_paths: u64,
    seed: u64,
) -> McResult {
    let (mut s, mut sc) = (0.0, 0.0);
    let (mut q, mut qc) = (0.0, 0.0);
    for (bs, bq) in sums {
        neumaier_add(&mut s, &mut sc, bs);
        neumaier_add(&mut q, &mut qc, bq);
    }
    let n = n_paths as f64;
    let mean = (s + sc) / n;
    let var = ((q + qc) / n - mean * mean).max(0.0) * n / (n - 1.0);
    McResult {
        estimate: mean,
        half_width_99: Z_99 * (var / n).sqrt(),
        n_paths,
        seed,
    }
}

/// Plain Monte Carlo estimate of the discounted payoff expectation. Paths
/// are partitioned into fixed-size substream blocks and the block sums are
/// combined in block order, so the result does not depend on how blocks are
/// scheduled.
pub fn mc_estimate(
    model: &dyn CharacteristicModel,
    payoff: &Payoff,
    market: Option<&MarketSpec>,
    n_paths: u64,
    seed: u64,
) -> McResult {
    let discount = market.map(|m| m.discount()).unwrap_or(1.0);
    let blocks = n_paths.div_ceil(MC_BLOCK);
    let sums = (0..blocks).map(|b| {
        let count = MC_BLOCK.min(n_paths - b * MC_BLOCK);
        mc_block_sums(model, payoff, discount, seed, b, count)
    });
    mc_combine(sums, n_paths, seed)
}

/// Block-parallel variant; bitwise identical to [`mc_estimate`] for every
/// thread count.
#[cfg(feature = "std")]
pub fn mc_estimate_threaded(
    model: &dyn CharacteristicModel,
    payoff: &Payoff,
    market: Option<&MarketSpec>,
    n_paths: u64,
    seed: u64,
    threads: usize,
) -> McResult {
    let discount = market.map(|m| m.discount()).unwrap_or(1.0);
    let blocks = n_paths.div_ceil(MC_BLOCK) as usize;
    let threads = threads.max(1).min(blocks.max(1));
    let mut sums = vec![(0.0f64, 0.0f64); blocks];
    std::thread::scope(|scope| {
        for (t, chunk) in sums.chunks_mut(blocks.div_ceil(threads)).enumerate() {
            let first = t * blocks.div_ceil(threads);
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let b = (first + i) as u64;
                    let count = MC_BLOCK.min(n_paths - b * MC_BLOCK);
                    *slot = mc_block_sums(model, payoff, discount, seed, b, count);
                }
            });
        }
    });
    mc_combine(sums.into_iter(), n_paths, seed)
}

/// Paths needed to push the 99% half-width below `target_epsilon`:
/// `U = ceil((z_{0.995} σ / ε)²)`.
pub fn required_paths(target_epsilon: f64, variance_estimate: f64) -> u64 {
    let u = (Z_99 * variance_estimate.sqrt() / target_epsilon).powi(2);
    u.ceil() as u64
}

/// Product of univariate normal CDFs; requires a diagonal covariance.
pub fn normal_cdf_closed_form(model: &NormalModel, y: &[f64]) -> Result<f64> {
    let d = model.dim();
    for i in 0..d {
        for j in 0..d {
            if i != j && model.covariance_entry(i, j) != 0.0 {
                return Err(CosError::CorrelatedNotSupported);
            }
        }
    }
    let mut acc = 1.0;
    for h in 0..d {
        let sd = model.covariance_entry(h, h).sqrt();
        acc *= normal_cdf((y[h] - model.eta()[h]) / sd);
    }
    Ok(acc)
}

/// High-resolution COS self-oracle: truncation from the moment formula at
/// `ε = 1e-9` and 2000 terms per axis for `d ≤ 2` (300 for `d = 3`). Used
/// as ground truth for convergence plots.
pub fn high_res_cos_oracle(problem: &Problem<'_>) -> Result<f64> {
    let d = problem.model.dim();
    let n_per_axis = match d {
        1 | 2 => 2000usize,
        3 => 300,
        _ => {
            return Err(CosError::Unsupported(
                "the high-resolution oracle is capped at d = 3".into(),
            ))
        }
    };
    let tol = Tolerance::new(1e-9)?;
    let dd = crate::damping::build_damped_density(problem.model, problem.alpha.clone())?;
    let unit = vec![1.0; d];
    let sup = crate::payoffs::payoff_bounds(&problem.payoff, dd.alpha(), dd.lambda(), &unit)?
        .sup_norm
        .max(1.0);
    let m = crate::tuning::truncation_range(&dd, sup, &tol)?;
    let geom = crate::engine::PlanGeometry::cube(m)?;
    let sol = problem.solve_fixed(&geom, &vec![n_per_axis; d])?;
    Ok(sol.value)
}

/// Convenience constructor for digital-put problems in the uncorrelated BS
/// world of the timing comparison: `Σ = σ² I`, `S(0) = K`.
pub fn digital_bs_problem(
    d: usize,
    sigma: f64,
    spot: f64,
    strike: f64,
    rate: f64,
    maturity: f64,
) -> Result<(NormalModel, MarketSpec, Payoff)> {
    let market = MarketSpec::new(vec![spot; d], rate, maturity)?;
    let mut cov = vec![0.0; d * d];
    for h in 0..d {
        cov[h * d + h] = sigma * sigma;
    }
    let model = crate::models::bs_log_return_model(&market, &cov)?;
    Ok((
        model,
        market,
        Payoff::DigitalPut {
            strike: vec![strike; d],
        },
    ))
}
