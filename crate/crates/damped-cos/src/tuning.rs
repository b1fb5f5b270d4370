//! Error-tolerance-driven parameter selection: the truncation box from axis
//! moments, the number of terms from a Parseval stopping rule, a 1-d
//! smoothness-based term bound, and the convergence-order predictor.

use crate::damping::{DampedDensity, DampingFactor};
use crate::engine::{coefficient, neumaier_add};
use crate::models::{axis_moment, cf_l2_norm, DecayExponent};
use crate::payoffs::Payoff;
use crate::quad::panel_integrate;
use crate::special::ln_gamma_real;
use crate::{CosError, Result};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Error budget and knobs for automatic parameter selection.
#[derive(Debug, Clone)]
pub struct Tolerance {
    /// Absolute error budget for the final integral.
    pub epsilon: f64,
    /// Moment order `n` in the truncation-range formula (even, default 8).
    pub moment_order: u32,
    /// Per-axis cap for the term-count search (default 2000).
    pub n_max: usize,
    /// Expansion-to-integration box ratio `L/M >= 1` (default 1).
    pub l_over_m: f64,
}

impl Tolerance {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(CosError::InvalidParameters(
                "epsilon must be positive".into(),
            ));
        }
        Ok(Self {
            epsilon,
            moment_order: 8,
            n_max: 2000,
            l_over_m: 1.0,
        })
    }

    pub fn with_moment_order(mut self, n: u32) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(CosError::InvalidParameters(
                "moment order must be even and at least 2".into(),
            ));
        }
        self.moment_order = n;
        Ok(self)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_l_over_m(mut self, r: f64) -> Result<Self> {
        if !(r >= 1.0) {
            return Err(CosError::InvalidParameters("l_over_m must be >= 1".into()));
        }
        self.l_over_m = r;
        Ok(self)
    }
}

/// Parameters of an order-of-convergence study: `N = (n, ..., n)` and
/// `M = L = (γ n^β, ..., γ n^β)` over the grid `n_grid`.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub beta: f64,
    pub gamma: f64,
    pub n_grid: Vec<usize>,
}

impl ConvergenceStudy {
    pub fn new(beta: f64, gamma: f64, n_grid: Vec<usize>) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(CosError::InvalidParameters(
                "beta must lie in (0, 1)".into(),
            ));
        }
        if !(gamma > 0.0) {
            return Err(CosError::InvalidParameters("gamma must be positive".into()));
        }
        if n_grid.is_empty() || n_grid.contains(&0) {
            return Err(CosError::InvalidParameters(
                "n_grid must be positive".into(),
            ));
        }
        Ok(Self {
            beta,
            gamma,
            n_grid,
        })
    }

    pub fn box_half_width(&self, n: usize) -> f64 {
        self.gamma * (n as f64).powf(self.beta)
    }
}

/// Truncation half-widths `M_h = (3d ‖v‖_∞ m_h(n) / ε)^{1/n}`.
pub fn truncation_range(
    dd: &DampedDensity<'_>,
    sup_norm: f64,
    tol: &Tolerance,
) -> Result<Vec<f64>> {
    if !(sup_norm > 0.0) || !sup_norm.is_finite() {
        return Err(CosError::InvalidParameters(
            "sup norm must be positive and finite".into(),
        ));
    }
    let d = dd.dim();
    let n = tol.moment_order;
    let mut m = Vec::with_capacity(d);
    for h in 0..d {
        let mom = axis_moment(dd, h, n)?;
        m.push((3.0 * d as f64 * sup_norm * mom / tol.epsilon).powf(1.0 / n as f64));
    }
    Ok(m)
}

/// Outcome of the term-count search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NTermsOutcome {
    /// The Parseval gap met the tolerance at per-axis count `n`.
    Converged { n: usize, gap: f64 },
    /// The gap stopped shrinking (floating-point floor) before the tolerance
    /// was met; `n` and `gap` are the best achieved.
    Plateau { n: usize, gap: f64 },
}

impl NTermsOutcome {
    pub fn n(&self) -> usize {
        match *self {
            NTermsOutcome::Converged { n, .. } | NTermsOutcome::Plateau { n, .. } => n,
        }
    }

    pub fn gap(&self) -> f64 {
        match *self {
            NTermsOutcome::Converged { gap, .. } | NTermsOutcome::Plateau { gap, .. } => gap,
        }
    }

    pub fn is_plateau(&self) -> bool {
        matches!(self, NTermsOutcome::Plateau { .. })
    }
}

/// Incremental accumulator for `∏ L_h Σ'_{0≤k≤(n,...,n)} |c̃_k|²`.
struct ParsevalAccumulator<'a, 'm> {
    dd: &'a DampedDensity<'m>,
    l: &'a [f64],
    vol: f64,
    skip_odd: bool,
    sum: f64,
    comp: f64,
}

impl<'a, 'm> ParsevalAccumulator<'a, 'm> {
    fn new(dd: &'a DampedDensity<'m>, l: &'a [f64]) -> Self {
        let vol = l.iter().product();
        let skip_odd = dd.cf_is_real();
        Self {
            dd,
            l,
            vol,
            skip_odd,
            sum: 0.0,
            comp: 0.0,
        }
    }

    fn add_index(&mut self, k: &[usize]) -> Result<()> {
        let parity: usize = k.iter().sum();
        if self.skip_odd && parity % 2 == 1 {
            return Ok(());
        }
        let c = coefficient(self.dd, self.l, k)?;
        let zeros = k.iter().filter(|&&x| x == 0).count() as i32;
        neumaier_add(
            &mut self.sum,
            &mut self.comp,
            0.5f64.powi(zeros) * self.vol * c * c,
        );
        Ok(())
    }

    /// Adds the shell `[0,n]^d \ [0,n-1]^d`, decomposed into disjoint faces
    /// by the last axis holding the value `n`.
    fn add_shell(&mut self, n: usize) -> Result<()> {
        let d = self.dd.dim();
        let mut k = vec![0usize; d];
        for pin in 0..d {
            // axis `pin` holds n; axes before it range over [0, n], axes
            // after it over [0, n-1] (they reach n in a later face).
            for kk in k.iter_mut() {
                *kk = 0;
            }
            k[pin] = n;
            'face: loop {
                self.add_index(&k)?;
                let mut h = d;
                loop {
                    if h == 0 {
                        break 'face;
                    }
                    h -= 1;
                    if h == pin {
                        continue;
                    }
                    let cap = if h < pin { n } else { n - 1 };
                    if k[h] < cap {
                        k[h] += 1;
                        continue 'face;
                    }
                    k[h] = 0;
                }
            }
        }
        Ok(())
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `∏ L_h Σ'_{0≤k≤(n,...,n)} |c̃_k|²` (diagnostic / test helper).
pub fn parseval_partial_sum(dd: &DampedDensity<'_>, l: &[f64], n: usize) -> Result<f64> {
    let mut acc = ParsevalAccumulator::new(dd, l);
    acc.add_index(&vec![0usize; dd.dim()])?;
    for shell in 1..=n {
        acc.add_shell(shell)?;
    }
    Ok(acc.value())
}

/// Selects the diagonal term count `N = (n, ..., n)` by growing `n` until
/// `|(2π)^{-d} ∫|f̂|² - ∏ L_h Σ' |c̃_k|²| ≤ ε² / (162 ‖v 1_{[-M,M]}‖₂²)`,
/// reusing previously accumulated shells. Reports a plateau when the gap
/// stops shrinking by 0.1% over three consecutive shells.
pub fn select_n_terms(
    dd: &DampedDensity<'_>,
    l: &[f64],
    tol: &Tolerance,
    payoff_l2_norm_sq: f64,
) -> Result<NTermsOutcome> {
    if !(payoff_l2_norm_sq > 0.0) || !payoff_l2_norm_sq.is_finite() {
        return Err(CosError::InvalidParameters(
            "payoff L2 norm bound must be positive and finite".into(),
        ));
    }
    let i2 = cf_l2_norm(dd)?;
    let rhs = tol.epsilon * tol.epsilon / (162.0 * payoff_l2_norm_sq);
    let mut acc = ParsevalAccumulator::new(dd, l);
    acc.add_index(&vec![0usize; dd.dim()])?;
    let mut prev_gap = (i2 - acc.value()).abs();
    let mut best_gap = prev_gap;
    let mut best_n = 0usize;
    let mut stalled = 0u32;
    for n in 1..=tol.n_max {
        acc.add_shell(n)?;
        let gap = (i2 - acc.value()).abs();
        if gap <= rhs {
            return Ok(NTermsOutcome::Converged { n, gap });
        }
        if gap < best_gap {
            best_gap = gap;
            best_n = n;
        }
        if gap > prev_gap * (1.0 - 1e-3) {
            stalled += 1;
            if stalled >= 3 {
                return Ok(NTermsOutcome::Plateau {
                    n: best_n.max(1),
                    gap: best_gap,
                });
            }
        } else {
            stalled = 0;
        }
        prev_gap = gap;
    }
    Err(CosError::NotConverged {
        n_max: tol.n_max,
        best_gap,
        required: rhs,
    })
}

/// Largest admissible smoothness order for the 1-d bound: the damped density
/// is `J+1` times continuously differentiable with `J` the largest natural
/// number below `p - 2` for polynomial cf decay with exponent `p`, and
/// unbounded for exponential decay.
pub fn max_smoothness_order(dd: &DampedDensity<'_>) -> Option<usize> {
    match dd.model().decay() {
        DecayExponent::Exponential => None,
        DecayExponent::Polynomial(p) => {
            let bound = p - 2.0;
            if bound <= 1.0 {
                Some(0)
            } else {
                let j = bound.ceil() - 1.0;
                Some(j as usize)
            }
        }
    }
}

/// `ln ∫_R |u|^{s+1} |f̂(u)| du` for the 1-d smoothness bound: closed form
/// for the (Gaussian) exponential-decay family, quadrature with a decay-based
/// tail cut otherwise.
fn ln_abs_cf_moment(dd: &DampedDensity<'_>, s: usize) -> Result<f64> {
    let m = (s + 1) as f64;
    match dd.model().decay() {
        DecayExponent::Exponential => {
            // f̂(u) = exp(-v u²/2): ∫ |u|^m f̂ = Γ((m+1)/2) (v/2)^{-(m+1)/2}
            let v = axis_moment(dd, 0, 2)?;
            Ok(ln_gamma_real((m + 1.0) / 2.0)? - (m + 1.0) / 2.0 * (v / 2.0).ln())
        }
        DecayExponent::Polynomial(p) => {
            let integrand = |u: f64| {
                let mag = dd.eval_cf(&[u]).map(|c| c.norm()).unwrap_or(0.0);
                u.powf(m) * mag
            };
            let mut upper = 16.0;
            loop {
                let body = panel_integrate(integrand, 0.0, upper, 1.0, 32, 1e-14);
                // beyond `upper` the integrand decays like u^{m-p}
                let tail = integrand(upper) * upper / (p - m - 1.0);
                if tail <= 1e-3 * body || upper > 1e12 {
                    return Ok((2.0 * (body + tail)).ln());
                }
                upper *= 2.0;
            }
        }
    }
}

/// 1-d term bound from the smoothness route:
/// `N ≥ (2^{s+5/2} ‖f^{(s+1)}‖_∞ L^{s+2} / (s π^{s+1}) · 12 ‖v‖_∞ / ε)^{1/s}`
/// with `‖f^{(s+1)}‖_∞ ≤ (2π)^{-1} ∫ |u|^{s+1} |f̂(u)| du`.
pub fn select_n_smoothness_1d(
    dd: &DampedDensity<'_>,
    l: f64,
    tol: &Tolerance,
    sup_norm: f64,
    s: usize,
) -> Result<usize> {
    if dd.dim() != 1 {
        return Err(CosError::Unsupported(
            "the smoothness-based term bound is one-dimensional".into(),
        ));
    }
    if s < 1 {
        return Err(CosError::InvalidParameters("s must be at least 1".into()));
    }
    if let Some(max_s) = max_smoothness_order(dd) {
        if s > max_s {
            return Err(CosError::SmoothnessExceeded { s, max_s });
        }
    }
    let sf = s as f64;
    let ln_deriv = ln_abs_cf_moment(dd, s)? - (2.0 * PI).ln();
    let ln_term = (sf + 2.5) * core::f64::consts::LN_2 + ln_deriv + (sf + 2.0) * l.ln()
        - sf.ln()
        - (sf + 1.0) * PI.ln()
        + (12.0 * sup_norm / tol.epsilon).ln();
    let n = (ln_term / sf).exp();
    if !n.is_finite() {
        return Err(CosError::Overflow("smoothness term bound".into()));
    }
    Ok(n.ceil() as usize)
}

/// Exponent of the convergence-order bound of the study `M = L = γ n^β`:
/// `-(1-β) p + d/2` for the classical method, `-(1-β)(p - d/2)` for the
/// damped method; `-∞` for exponential cf decay.
pub fn convergence_slope_bound(
    decay: DecayExponent,
    d: usize,
    beta: f64,
    damped: bool,
) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(CosError::InvalidParameters(
            "beta must lie in (0, 1)".into(),
        ));
    }
    match decay {
        DecayExponent::Exponential => Ok(f64::NEG_INFINITY),
        DecayExponent::Polynomial(p) => {
            if p <= d as f64 / 2.0 {
                return Err(CosError::DecayTooSlow { p, d });
            }
            Ok(if damped {
                -(1.0 - beta) * (p - d as f64 / 2.0)
            } else {
                -(1.0 - beta) * p + d as f64 / 2.0
            })
        }
    }
}

/// Payoff-dependent default damping factors: the classical method for
/// payoffs with closed-form cosine coefficients, `-4` per axis for basket
/// puts and `-7` per axis for digital puts.
pub fn default_alpha(payoff: &Payoff, d: usize) -> DampingFactor {
    match payoff {
        Payoff::BasketPut { .. } => DampingFactor::uniform(-4.0, d),
        Payoff::DigitalPut { .. } => DampingFactor::uniform(-7.0, d),
        Payoff::Cdf { .. } | Payoff::VanillaPut { .. } | Payoff::AbsMoment => {
            DampingFactor::zero(d)
        }
    }
}
