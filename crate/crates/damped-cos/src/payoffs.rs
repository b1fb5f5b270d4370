//! Functions of interest: closed-form cosine coefficients (CDF, 1-d vanilla
//! put, 1-d absolute moment) and complex Fourier transforms (digital
//! cash-or-nothing put, arithmetic basket put) with their norm bounds.

use crate::damping::DampedDensity;
use crate::engine::{sign_vector_sum, PlanGeometry};
use crate::special::{ln_gamma, ln_gamma_real};
use crate::{CosError, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// The function of interest `w`.
#[derive(Debug, Clone, PartialEq)]
pub enum Payoff {
    /// `w = 1_{(-∞, y]}`: the CDF of the density at `y`.
    Cdf { y: Vec<f64> },
    /// `w(x) = 1_{[0, K]}(e^x)`: pays 1 if every `S_h(T) ≤ K_h`.
    DigitalPut { strike: Vec<f64> },
    /// `w(x) = max(K - Σ_h e^{x_h}, 0)`.
    BasketPut { strike: f64 },
    /// `w(x) = max(K - e^x, 0)`, one-dimensional.
    VanillaPut { strike: f64 },
    /// `w(x) = |x|`, one-dimensional.
    AbsMoment,
}

/// Admissible damping sign per payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaRequirement {
    Any,
    StrictlyNegative,
    ZeroOnly,
}

impl Payoff {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Payoff::Cdf { y } => !y.is_empty() && y.iter().all(|v| v.is_finite()),
            Payoff::DigitalPut { strike } => {
                !strike.is_empty() && strike.iter().all(|&k| k > 0.0 && k.is_finite())
            }
            Payoff::BasketPut { strike } | Payoff::VanillaPut { strike } => {
                *strike > 0.0 && strike.is_finite()
            }
            Payoff::AbsMoment => true,
        };
        if ok {
            Ok(())
        } else {
            Err(CosError::InvalidParameters(
                "strikes must be positive and thresholds finite".into(),
            ))
        }
    }

    pub fn required_alpha_sign(&self) -> AlphaRequirement {
        match self {
            Payoff::Cdf { .. } | Payoff::VanillaPut { .. } => AlphaRequirement::ZeroOnly,
            Payoff::DigitalPut { .. } | Payoff::BasketPut { .. } => {
                AlphaRequirement::StrictlyNegative
            }
            Payoff::AbsMoment => AlphaRequirement::Any,
        }
    }

    pub fn check_alpha(&self, alpha: &[f64]) -> Result<()> {
        match self.required_alpha_sign() {
            AlphaRequirement::Any => Ok(()),
            AlphaRequirement::ZeroOnly => {
                if alpha.iter().all(|&a| a == 0.0) {
                    Ok(())
                } else {
                    Err(CosError::DampingNotSupported(format!(
                        "{self:?} has closed-form coefficients only for alpha = 0"
                    )))
                }
            }
            AlphaRequirement::StrictlyNegative => {
                if alpha.iter().all(|&a| a < 0.0) {
                    Ok(())
                } else {
                    Err(CosError::StripViolation(format!(
                        "{self:?} requires every damping entry strictly negative"
                    )))
                }
            }
        }
    }

    /// Dimension pinned by the payoff parameters, if any.
    pub fn dim_hint(&self) -> Option<usize> {
        match self {
            Payoff::Cdf { y } => Some(y.len()),
            Payoff::DigitalPut { strike } => Some(strike.len()),
            Payoff::VanillaPut { .. } | Payoff::AbsMoment => Some(1),
            Payoff::BasketPut { .. } => None,
        }
    }

    /// Raw `w(x)` (Monte Carlo oracle path).
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            Payoff::Cdf { y } => {
                if x.iter().zip(y).all(|(xi, yi)| xi <= yi) {
                    1.0
                } else {
                    0.0
                }
            }
            Payoff::DigitalPut { strike } => {
                if x.iter().zip(strike).all(|(xi, k)| *xi <= k.ln()) {
                    1.0
                } else {
                    0.0
                }
            }
            Payoff::BasketPut { strike } => {
                let basket: f64 = x.iter().map(|xi| xi.exp()).sum();
                (strike - basket).max(0.0)
            }
            Payoff::VanillaPut { strike } => (strike - x[0].exp()).max(0.0),
            Payoff::AbsMoment => x[0].abs(),
        }
    }

    /// Whether `ŵ` is available on a complex strip (transform route).
    pub fn has_transform(&self) -> bool {
        matches!(self, Payoff::DigitalPut { .. } | Payoff::BasketPut { .. })
    }
}

/// Norm bounds of the damped function of interest used by the tuner:
/// `‖v‖_∞` for the truncation range, an upper bound on
/// `‖v 1_{[-M,M]}‖₂²` for the Parseval criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffBounds {
    pub sup_norm: f64,
    pub l2_norm_sq: f64,
}

/// Closed-form CDF coefficient `v_k` on `[-M, M]` (classical method only):
/// with `γ_h = min(y_h - μ_h, M_h)`, zero when some `γ_h < -M_h`, else
/// `λ^{-1} ∏_{k_h = 0} (γ_h + M_h) ∏_{k_h > 0} (2L_h/(π k_h))
///  (sin(k_h π (γ_h + L_h)/(2L_h)) - sin(k_h π (L_h - M_h)/(2L_h)))`.
pub fn cdf_vk(
    y: &[f64],
    geom: &PlanGeometry,
    alpha: &[f64],
    lambda: f64,
    mu: &[f64],
    k: &[usize],
) -> Result<f64> {
    if alpha.iter().any(|&a| a != 0.0) {
        return Err(CosError::DampingNotSupported(
            "the closed-form CDF coefficients require alpha = 0".into(),
        ));
    }
    let mut acc = 1.0 / lambda;
    for h in 0..y.len() {
        let (m, l) = (geom.m()[h], geom.l()[h]);
        let gamma = (y[h] - mu[h]).min(m);
        if gamma < -m {
            return Ok(0.0);
        }
        if k[h] == 0 {
            acc *= gamma + m;
        } else {
            let w = k[h] as f64 * PI / (2.0 * l);
            acc *= (2.0 * l / (PI * k[h] as f64)) * ((w * (gamma + l)).sin() - (w * (l - m)).sin());
        }
    }
    Ok(acc)
}

/// Closed-form coefficient of the 1-d vanilla put `max(K - e^x, 0)` on
/// `[-M, M]` (classical method): the cosine/exponential antiderivative pair,
/// validated against quadrature in the test-suite.
pub fn vanilla_put_vk(
    strike: f64,
    geom: &PlanGeometry,
    alpha: &[f64],
    lambda: f64,
    mu: &[f64],
    k: &[usize],
) -> Result<f64> {
    if alpha.iter().any(|&a| a != 0.0) {
        return Err(CosError::DampingNotSupported(
            "the closed-form put coefficients require alpha = 0".into(),
        ));
    }
    let (m, l) = (geom.m()[0], geom.l()[0]);
    let mu = mu[0];
    let b = (strike.ln() - mu).min(m);
    if b <= -m {
        return Ok(0.0);
    }
    let psi = if k[0] == 0 {
        b + m
    } else {
        let w = k[0] as f64 * PI / (2.0 * l);
        ((w * (b + l)).sin() - (w * (l - m)).sin()) / w
    };
    let w = k[0] as f64 * PI / (2.0 * l);
    let anti = |x: f64| x.exp() * ((w * (x + l)).cos() + w * (w * (x + l)).sin()) / (1.0 + w * w);
    let chi = anti(b) - anti(-m);
    Ok((strike * psi - mu.exp() * chi) / lambda)
}

/// Which half of `|x| = max(x, 0) + max(-x, 0)` a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentBranch {
    PositivePart,
    NegativePart,
}

/// Antiderivative of `y e^{Ay} cos(ωy + c)`.
fn moment_primitive(y: f64, a: f64, w: f64, c: f64) -> f64 {
    if a == 0.0 && w == 0.0 {
        return 0.5 * y * y;
    }
    if a == 0.0 {
        return y * (w * y + c).sin() / w + (w * y + c).cos() / (w * w);
    }
    let denom = a * a + w * w;
    let e = (a * y).exp();
    let lead = y * e * (a * (w * y + c).cos() + w * (w * y + c).sin()) / denom;
    lead - e * ((a * a - w * w) * (w * y + c).cos() + 2.0 * a * w * (w * y + c).sin())
        / (denom * denom)
}

/// Closed-form coefficient of one damped branch of `|x|` on `[-M, M]`:
/// `v^±(x) = λ^{-1} e^{-α(x+μ)} max(±(x+μ), 0)`, any real `α`. Pairing
/// `α > 0` with the positive and `α < 0` with the negative branch keeps
/// the damped branch bounded; `α = 0` works for both.
pub fn abs_moment_vk(
    geom: &PlanGeometry,
    alpha: f64,
    lambda: f64,
    mu: f64,
    branch: MomentBranch,
    k: usize,
) -> f64 {
    let (m, l) = (geom.m()[0], geom.l()[0]);
    let a = -alpha;
    let w = k as f64 * PI / (2.0 * l);
    // cos(ω(x + L)) = cos(ωy + c) in the shifted variable y = x + μ
    let c = w * (l - mu);
    match branch {
        MomentBranch::PositivePart => {
            let y_hi = mu + m;
            if y_hi <= 0.0 {
                return 0.0;
            }
            let y_lo = (mu - m).max(0.0);
            (moment_primitive(y_hi, a, w, c) - moment_primitive(y_lo, a, w, c)) / lambda
        }
        MomentBranch::NegativePart => {
            let y_lo = mu - m;
            if y_lo >= 0.0 {
                return 0.0;
            }
            let y_hi = (mu + m).min(0.0);
            -(moment_primitive(y_hi, a, w, c) - moment_primitive(y_lo, a, w, c)) / lambda
        }
    }
}

fn require_lower_half_plane(z: &[Complex64]) -> Result<()> {
    if z.iter().all(|zh| zh.im < 0.0) {
        Ok(())
    } else {
        Err(CosError::StripViolation(
            "payoff transform requires Im z_h < 0 for every axis".into(),
        ))
    }
}

/// `log ŵ(z)` for the digital cash-or-nothing put:
/// `ŵ(z) = ∏_h K_h^{i z_h} / (i z_h)`.
fn digital_log_transform(strike: &[f64], z: &[Complex64]) -> Result<Complex64> {
    require_lower_half_plane(z)?;
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, zh) in strike.iter().zip(z) {
        acc += i * zh * k.ln() - (i * zh).ln();
    }
    Ok(acc)
}

/// `log ŵ(z)` for the arithmetic basket put:
/// `ŵ(z) = K^{1 + i Σ z_h} ∏_h Γ(i z_h) / Γ(i Σ z_h + 2)`, evaluated
/// entirely in log space (the Γ ratios overflow at moderate `|α| d`).
fn basket_log_transform(strike: f64, z: &[Complex64]) -> Result<Complex64> {
    require_lower_half_plane(z)?;
    let i = Complex64::new(0.0, 1.0);
    let zsum: Complex64 = z.iter().sum();
    let mut acc = (1.0 + i * zsum) * strike.ln() - ln_gamma(i * zsum + 2.0);
    for zh in z {
        acc += ln_gamma(i * zh);
    }
    Ok(acc)
}

fn exp_checked(lw: Complex64) -> Result<Complex64> {
    if lw.re > 709.0 {
        return Err(CosError::Overflow(format!(
            "transform magnitude exp({:.1}) exceeds the floating-point range",
            lw.re
        )));
    }
    Ok(lw.exp())
}

/// `ŵ(z) = ∏_h K_h^{i z_h} / (i z_h)` on the strip `Im z_h < 0`.
pub fn digital_put_transform(strike: &[f64], z: &[Complex64]) -> Result<Complex64> {
    exp_checked(digital_log_transform(strike, z)?)
}

/// `ŵ(z) = K^{1 + i Σ z_h} ∏ Γ(i z_h) / Γ(i Σ z_h + 2)` on `Im z_h < 0`.
pub fn basket_put_transform(strike: f64, z: &[Complex64]) -> Result<Complex64> {
    exp_checked(basket_log_transform(strike, z)?)
}

/// Transform-based payoff coefficient
/// `ṽ_k = 2^{-(d-1)} Σ_s Re{ v̂(π/2 · sk/L) exp(iπ/2 s·k) }` with
/// `v̂(u) = λ^{-1} e^{-i u·μ} ŵ(u + iα)`.
pub fn payoff_vk_tilde(
    payoff: &Payoff,
    dd: &DampedDensity<'_>,
    l: &[f64],
    k: &[usize],
) -> Result<f64> {
    if !payoff.has_transform() {
        return Err(CosError::DampingNotSupported(format!(
            "{payoff:?} has no transform; use its closed-form coefficients"
        )));
    }
    let d = l.len();
    let alpha = dd.alpha();
    let ln_lambda = dd.lambda().ln();
    let mu = dd.mu();
    let mut z = [Complex64::new(0.0, 0.0); crate::MAX_DIM];
    let sum = sign_vector_sum(k, l, |u, s_dot_k| -> Result<f64> {
        let mut u_dot_mu = 0.0;
        for h in 0..d {
            z[h] = Complex64::new(u[h], alpha[h]);
            u_dot_mu += u[h] * mu[h];
        }
        let lw = match payoff {
            Payoff::DigitalPut { strike } => digital_log_transform(strike, &z[..d])?,
            Payoff::BasketPut { strike } => basket_log_transform(*strike, &z[..d])?,
            _ => unreachable!(),
        };
        let v_hat = exp_checked(lw - ln_lambda - Complex64::new(0.0, u_dot_mu))?;
        Ok(match s_dot_k.rem_euclid(4) {
            0 => v_hat.re,
            1 => -v_hat.im,
            2 => -v_hat.re,
            _ => v_hat.im,
        })
    })?;
    Ok(sum / (1u64 << (d - 1)) as f64)
}

/// Norm bounds of the damped function of interest per payoff kind. `m` is
/// the integration box used by the box-dependent bounds.
pub fn payoff_bounds(
    payoff: &Payoff,
    alpha: &[f64],
    lambda: f64,
    m: &[f64],
) -> Result<PayoffBounds> {
    payoff.validate()?;
    let d = m.len();
    match payoff {
        Payoff::Cdf { .. } => {
            let vol: f64 = m.iter().product();
            Ok(PayoffBounds {
                sup_norm: 1.0 / lambda,
                l2_norm_sq: 2.0f64.powi(d as i32) * vol / (lambda * lambda),
            })
        }
        Payoff::DigitalPut { strike } => {
            payoff.check_alpha(alpha)?;
            let mut sup = 1.0 / lambda;
            let mut l2 = 1.0 / (lambda * lambda);
            for (kh, ah) in strike.iter().zip(alpha) {
                sup *= (-ah * kh.ln()).exp();
                l2 *= (-2.0 * ah * kh.ln()).exp() / (-2.0 * ah);
            }
            Ok(PayoffBounds {
                sup_norm: sup,
                l2_norm_sq: l2,
            })
        }
        Payoff::BasketPut { strike } => {
            if alpha.iter().all(|&a| a == 0.0) {
                if d != 1 {
                    return Err(CosError::DampingNotSupported(
                        "basket put needs strictly negative damping in d > 1".into(),
                    ));
                }
                return Ok(PayoffBounds {
                    sup_norm: *strike,
                    l2_norm_sq: 2.0 * m[0] * strike * strike,
                });
            }
            payoff.check_alpha(alpha)?;
            let alpha_sum: f64 = alpha.iter().sum();
            let sup = strike.powf(1.0 - alpha_sum) / lambda;
            // ‖v‖₂² ≤ K^{2-2Σα}/λ² · ∏Γ(-2α_h)/Γ(1+Σ(-2α_h)), in log space
            let mut ln_l2 = (2.0 - 2.0 * alpha_sum) * strike.ln()
                - 2.0 * lambda.ln()
                - ln_gamma_real(1.0 - 2.0 * alpha_sum)?;
            for &ah in alpha {
                ln_l2 += ln_gamma_real(-2.0 * ah)?;
            }
            Ok(PayoffBounds {
                sup_norm: sup,
                l2_norm_sq: ln_l2.exp(),
            })
        }
        Payoff::VanillaPut { strike } => Ok(PayoffBounds {
            sup_norm: strike / lambda,
            l2_norm_sq: 2.0 * m[0] * strike * strike / (lambda * lambda),
        }),
        Payoff::AbsMoment => {
            let a = alpha[0];
            if a == 0.0 {
                // sup over the box of the centered |x| payoff; the recentring
                // shift is absorbed by the solver's fixed-point iteration
                Ok(PayoffBounds {
                    sup_norm: m[0] / lambda,
                    l2_norm_sq: 2.0 * m[0].powi(3) / (3.0 * lambda * lambda),
                })
            } else {
                // one damped branch: sup of y e^{-|α| y} on y >= 0 is 1/(|α| e)
                let aa = a.abs();
                Ok(PayoffBounds {
                    sup_norm: 1.0 / (lambda * aa * core::f64::consts::E),
                    l2_norm_sq: 1.0 / (lambda * lambda * 4.0 * aa.powi(3)),
                })
            }
        }
    }
}
