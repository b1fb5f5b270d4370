//! Problem assembly: wires a model, payoff, damping factor and market into
//! the tuner and engine, either tolerance-driven or with a pinned plan.

use crate::damping::{build_damped_density, DampedDensity, DampingFactor};
use crate::engine::{
    approximate_integral, ApproxResult, CosPlan, PlanGeometry, DEFAULT_TENSOR_CAP,
};
use crate::models::{CharacteristicModel, MarketSpec};
use crate::payoffs::{
    abs_moment_vk, cdf_vk, payoff_bounds, payoff_vk_tilde, vanilla_put_vk, MomentBranch, Payoff,
};
use crate::tuning::{select_n_terms, truncation_range, NTermsOutcome, Tolerance};
use crate::{CosError, Result};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

/// One integral to evaluate: `∫ w(x) g(x) dx`, discounted when a market is
/// attached.
pub struct Problem<'m> {
    pub model: &'m dyn CharacteristicModel,
    pub payoff: Payoff,
    pub market: Option<MarketSpec>,
    pub alpha: DampingFactor,
    /// Workers for the coefficient-tensor fill (ignored without `std`).
    pub threads: usize,
}

/// A solved problem: the value plus everything the run selected or was given.
#[derive(Debug, Clone)]
pub struct Solution {
    pub value: f64,
    pub geom: PlanGeometry,
    pub n: Vec<usize>,
    pub alpha: Vec<f64>,
    /// Populated by tolerance-driven runs; `None` for pinned plans.
    pub n_outcome: Option<NTermsOutcome>,
    pub diagnostics: BTreeMap<String, f64>,
    pub wall_time: Duration,
}

impl Solution {
    pub fn plateau(&self) -> bool {
        self.n_outcome.map(|o| o.is_plateau()).unwrap_or(false)
    }
}

/// Payoff-coefficient provider for a given damped density and geometry:
/// closed forms for the classical payoffs, the transform route otherwise.
pub fn coefficient_provider<'a>(
    payoff: &'a Payoff,
    dd: &'a DampedDensity<'_>,
    geom: &'a PlanGeometry,
    branch: Option<MomentBranch>,
) -> impl FnMut(&[usize]) -> Result<f64> + 'a {
    move |k: &[usize]| match payoff {
        Payoff::Cdf { y } => cdf_vk(y, geom, dd.alpha(), dd.lambda(), dd.mu(), k),
        Payoff::VanillaPut { strike } => {
            vanilla_put_vk(*strike, geom, dd.alpha(), dd.lambda(), dd.mu(), k)
        }
        Payoff::AbsMoment => {
            let a = dd.alpha()[0];
            let v = match branch {
                Some(b) => abs_moment_vk(geom, a, dd.lambda(), dd.mu()[0], b, k[0]),
                None => {
                    abs_moment_vk(
                        geom,
                        a,
                        dd.lambda(),
                        dd.mu()[0],
                        MomentBranch::PositivePart,
                        k[0],
                    ) + abs_moment_vk(
                        geom,
                        a,
                        dd.lambda(),
                        dd.mu()[0],
                        MomentBranch::NegativePart,
                        k[0],
                    )
                }
            };
            Ok(v)
        }
        Payoff::DigitalPut { .. } | Payoff::BasketPut { .. } => {
            payoff_vk_tilde(payoff, dd, geom.l(), k)
        }
    }
}

struct SubRun {
    raw: ApproxResult,
    geom: PlanGeometry,
    n: Vec<usize>,
    outcome: Option<NTermsOutcome>,
}

impl<'m> Problem<'m> {
    pub fn new(
        model: &'m dyn CharacteristicModel,
        payoff: Payoff,
        market: Option<MarketSpec>,
        alpha: DampingFactor,
    ) -> Result<Self> {
        payoff.validate()?;
        if let Some(d) = payoff.dim_hint() {
            if d != model.dim() {
                return Err(CosError::InvalidParameters(alloc::format!(
                    "payoff dimension {d} does not match model dimension {}",
                    model.dim()
                )));
            }
        }
        if alpha.dim() != model.dim() {
            return Err(CosError::InvalidParameters(
                "damping factor length must match the model dimension".into(),
            ));
        }
        if let Some(mk) = &market {
            if mk.spot.len() != model.dim() {
                return Err(CosError::InvalidParameters(
                    "market spot length must match the model dimension".into(),
                ));
            }
        }
        Ok(Self {
            model,
            payoff,
            market,
            alpha,
            threads: 1,
        })
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    fn discount(&self) -> f64 {
        self.market.as_ref().map(|m| m.discount()).unwrap_or(1.0)
    }

    /// Tolerance-driven solve: truncation box from the moment formula, term
    /// count from the Parseval rule, then the primed-sum pairing.
    pub fn solve_auto(&self, tol: &Tolerance) -> Result<Solution> {
        #[cfg(feature = "std")]
        let t0 = std::time::Instant::now();
        self.payoff.check_alpha(self.alpha.as_slice())?;
        let runs = if matches!(self.payoff, Payoff::AbsMoment) && !self.alpha.is_zero() {
            // |x| splits into two independently damped branches: α > 0 keeps
            // the positive part bounded, α < 0 the negative part.
            let a = self.alpha.as_slice()[0].abs();
            vec![
                (
                    DampingFactor::uniform(a, 1),
                    Some(MomentBranch::PositivePart),
                ),
                (
                    DampingFactor::uniform(-a, 1),
                    Some(MomentBranch::NegativePart),
                ),
            ]
        } else {
            vec![(self.alpha.clone(), None)]
        };
        let mut total = 0.0;
        let mut last: Option<SubRun> = None;
        let mut worst_outcome: Option<NTermsOutcome> = None;
        for (alpha, branch) in runs {
            let sub = self.solve_auto_single(tol, alpha, branch)?;
            total += sub.raw.value;
            worst_outcome = match (worst_outcome, sub.outcome) {
                (None, o) => o,
                (Some(w), Some(o)) if o.is_plateau() && !w.is_plateau() => Some(o),
                (w, _) => w,
            };
            last = Some(sub);
        }
        let run = last.expect("at least one sub-run");
        let mut diagnostics = run.raw.diagnostics.clone();
        if let Some(o) = worst_outcome {
            diagnostics.insert(String::from("parseval_gap"), o.gap());
        }
        Ok(Solution {
            value: total * self.discount(),
            geom: run.geom,
            n: run.n,
            alpha: self.alpha.as_slice().to_vec(),
            n_outcome: worst_outcome,
            diagnostics,
            #[cfg(feature = "std")]
            wall_time: t0.elapsed(),
            #[cfg(not(feature = "std"))]
            wall_time: Duration::default(),
        })
    }

    fn solve_auto_single(
        &self,
        tol: &Tolerance,
        alpha: DampingFactor,
        branch: Option<MomentBranch>,
    ) -> Result<SubRun> {
        let dd = build_damped_density(self.model, alpha)?;
        let m = self.pick_truncation(&dd, tol)?;
        let l: Vec<f64> = m.iter().map(|&x| x * tol.l_over_m).collect();
        let geom = PlanGeometry::new(m, l)?;
        let bounds = payoff_bounds(&self.payoff, dd.alpha(), dd.lambda(), geom.m())?;
        let outcome = select_n_terms(&dd, geom.l(), tol, bounds.l2_norm_sq)?;
        let n = vec![outcome.n(); dd.dim()];
        let plan = CosPlan::build_with_threads(
            &dd,
            geom.clone(),
            n.clone(),
            DEFAULT_TENSOR_CAP,
            self.threads,
        )?;
        let raw = {
            let mut provider = coefficient_provider(&self.payoff, &dd, &geom, branch);
            approximate_integral(&plan, &mut provider)?
        };
        Ok(SubRun {
            raw,
            geom,
            n,
            outcome: Some(outcome),
        })
    }

    /// Truncation box from `‖v‖_∞`; the box-dependent absolute-moment bound
    /// is resolved by a short fixed-point iteration (contraction with
    /// exponent `1/n`).
    fn pick_truncation(&self, dd: &DampedDensity<'_>, tol: &Tolerance) -> Result<Vec<f64>> {
        let unit = vec![1.0; dd.dim()];
        let mut sup = payoff_bounds(&self.payoff, dd.alpha(), dd.lambda(), &unit)?.sup_norm;
        if matches!(self.payoff, Payoff::AbsMoment) && dd.alpha()[0] == 0.0 {
            let shift = dd.mu()[0].abs();
            let mut m = truncation_range(dd, 1.0f64.max(shift), tol)?;
            for _ in 0..40 {
                let sup_box = (m[0] + shift) / dd.lambda();
                let next = truncation_range(dd, sup_box, tol)?;
                let done = (next[0] - m[0]).abs() <= 1e-12 * next[0];
                m = next;
                if done {
                    return Ok(m);
                }
            }
            return Ok(m);
        }
        if !(sup > 0.0) || !sup.is_finite() {
            sup = 1.0;
        }
        truncation_range(dd, sup, tol)
    }

    /// Evaluation on a pinned plan (reference `(N, L)` reproductions and
    /// convergence studies).
    pub fn solve_fixed(&self, geom: &PlanGeometry, n: &[usize]) -> Result<Solution> {
        #[cfg(feature = "std")]
        let t0 = std::time::Instant::now();
        self.payoff.check_alpha(self.alpha.as_slice())?;
        if matches!(self.payoff, Payoff::AbsMoment) && !self.alpha.is_zero() {
            return Err(CosError::Unsupported(
                "pinned-plan absolute moments run per damped branch; use alpha = 0".into(),
            ));
        }
        let dd = build_damped_density(self.model, self.alpha.clone())?;
        let plan = CosPlan::build_with_threads(
            &dd,
            geom.clone(),
            n.to_vec(),
            DEFAULT_TENSOR_CAP,
            self.threads,
        )?;
        let mut provider = coefficient_provider(&self.payoff, &dd, geom, None);
        let raw = approximate_integral(&plan, &mut provider)?;
        Ok(Solution {
            value: raw.value * self.discount(),
            geom: geom.clone(),
            n: n.to_vec(),
            alpha: self.alpha.as_slice().to_vec(),
            n_outcome: None,
            diagnostics: raw.diagnostics,
            #[cfg(feature = "std")]
            wall_time: t0.elapsed(),
            #[cfg(not(feature = "std"))]
            wall_time: Duration::default(),
        })
    }

    /// Truncation box and term count only (the `tune` command).
    pub fn tune(&self, tol: &Tolerance) -> Result<(PlanGeometry, NTermsOutcome)> {
        self.payoff.check_alpha(self.alpha.as_slice())?;
        let alpha = if matches!(self.payoff, Payoff::AbsMoment) && !self.alpha.is_zero() {
            DampingFactor::uniform(self.alpha.as_slice()[0].abs(), 1)
        } else {
            self.alpha.clone()
        };
        let dd = build_damped_density(self.model, alpha)?;
        let m = self.pick_truncation(&dd, tol)?;
        let l: Vec<f64> = m.iter().map(|&x| x * tol.l_over_m).collect();
        let geom = PlanGeometry::new(m, l)?;
        let bounds = payoff_bounds(&self.payoff, dd.alpha(), dd.lambda(), geom.m())?;
        let outcome = select_n_terms(&dd, geom.l(), tol, bounds.l2_norm_sq)?;
        Ok((geom, outcome))
    }
}
