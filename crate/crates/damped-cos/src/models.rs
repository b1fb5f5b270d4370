//! Characteristic-function families (normal, Variance Gamma) with
//! complex-argument evaluation, damped-density moments, decay exponents and
//! the financial log-return wrappers.

use crate::damping::DampedDensity;
use crate::quad::{panel_integrate, tensor_gl_integrate};
use crate::special::{binomial, double_factorial};
use crate::{CosError, Result, MAX_DIM};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Polynomial decay rate of `|f̂(u)|`, or the marker for faster-than-any-
/// polynomial (exponential) decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayExponent {
    Polynomial(f64),
    Exponential,
}

/// A distribution known through its characteristic function, extended to the
/// admissible complex strip. Everything the COS pipeline needs is derived
/// from this interface.
pub trait CharacteristicModel: Sync {
    fn dim(&self) -> usize;

    /// `ĝ(z) = ∫ e^{i z·x} g(x) dx` for complex `z` in the admissible strip.
    fn cf(&self, z: &[Complex64]) -> Result<Complex64>;

    /// Whether `ĝ(-iα)` exists (the damping strip contains `-iα`).
    fn alpha_admissible(&self, alpha: &[f64]) -> bool;

    /// Closed-form `(λ, μ)` of the damped density when available.
    fn damped_params(&self, alpha: &[f64]) -> Option<(f64, Vec<f64>)>;

    /// `∫ x_h^n f(x) dx` of the damped density (centered), even `n`.
    fn damped_axis_moment(&self, alpha: &[f64], axis: usize, order: u32) -> Result<f64>;

    /// Closed form of `(2π)^{-d} ∫ |f̂|² du` when available.
    fn damped_cf_l2_closed_form(&self, _alpha: &[f64]) -> Option<f64> {
        None
    }

    /// Whether the damped characteristic function is real-valued. Feeds the
    /// engine's odd-index-sum skip; declared by the model, never detected by
    /// sampling.
    fn damped_cf_is_real(&self, alpha: &[f64]) -> bool;

    fn decay(&self) -> DecayExponent;

    /// Mean vector of the raw density `g`.
    fn mean(&self) -> Vec<f64>;

    /// Draw one sample of `X ~ g` into `out` (used by the Monte Carlo oracle).
    fn sample_into(&self, rng: &mut dyn rand::RngCore, out: &mut [f64]);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor of a symmetric matrix (row-major),
/// `None` if the matrix is not positive definite.
fn cholesky(mat: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = mat[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Smallest eigenvalue of an SPD matrix by inverse power iteration on the
/// Cholesky factor (validates the factorization in tests).
#[cfg(test)]
fn min_eigenvalue(chol: &[f64], d: usize) -> f64 {
    let solve = |b: &[f64], x: &mut [f64]| {
        // forward L y = b
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut s = b[i];
            for k in 0..i {
                s -= chol[i * d + k] * y[k];
            }
            y[i] = s / chol[i * d + i];
        }
        // backward L^T x = y
        for i in (0..d).rev() {
            let mut s = y[i];
            for k in (i + 1)..d {
                s -= chol[k * d + i] * x[k];
            }
            x[i] = s / chol[i * d + i];
        }
    };
    let mut v = vec![1.0; d];
    let mut w = vec![0.0; d];
    let mut lambda = 0.0;
    for _ in 0..200 {
        solve(&v, &mut w);
        let norm = dot(&w, &w).sqrt();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        // Rayleigh quotient of A at v: v·Av, with Av = L L^T v
        let mut lt_v = vec![0.0; d];
        for i in 0..d {
            for k in i..d {
                lt_v[i] += chol[k * d + i] * v[k];
            }
        }
        let new_lambda = dot(&lt_v, &lt_v);
        if (new_lambda - lambda).abs() <= 1e-12 * new_lambda.abs() {
            return new_lambda;
        }
        lambda = new_lambda;
    }
    lambda
}

/// Multivariate normal with location `η` and SPD covariance `Σ`.
#[derive(Debug, Clone)]
pub struct NormalModel {
    eta: Vec<f64>,
    cov: Vec<f64>,
    chol: Vec<f64>,
}

impl NormalModel {
    /// `cov` is row-major `d×d`; it must be symmetric and positive definite.
    pub fn new(eta: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let d = eta.len();
        if d == 0 || d > MAX_DIM {
            return Err(CosError::InvalidParameters(format!(
                "dimension must be in 1..={MAX_DIM}, got {d}"
            )));
        }
        if cov.len() != d * d {
            return Err(CosError::InvalidParameters(format!(
                "covariance must be {d}x{d} row-major"
            )));
        }
        if !eta.iter().chain(cov.iter()).all(|x| x.is_finite()) {
            return Err(CosError::InvalidParameters("non-finite parameter".into()));
        }
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (cov[i * d + j], cov[j * d + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(CosError::InvalidParameters(
                        "covariance not symmetric".into(),
                    ));
                }
            }
        }
        let chol = cholesky(&cov, d).ok_or_else(|| {
            CosError::InvalidParameters("covariance not positive definite".into())
        })?;
        Ok(Self { eta, cov, chol })
    }

    pub fn scalar(eta: f64, variance: f64) -> Result<Self> {
        Self::new(vec![eta], vec![variance])
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn covariance(&self) -> &[f64] {
        &self.cov
    }

    pub fn covariance_entry(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.dim() + j]
    }

    fn cov_mul(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| dot(&self.cov[i * d..(i + 1) * d], v))
            .collect()
    }

    fn det(&self) -> f64 {
        let d = self.dim();
        let mut det = 1.0;
        for i in 0..d {
            det *= self.chol[i * d + i] * self.chol[i * d + i];
        }
        det
    }
}

/// `exp(i η·z - z·Σz/2)` with the bilinear form extended to complex `z`.
pub fn normal_cf(model: &NormalModel, z: &[Complex64]) -> Complex64 {
    let d = model.dim();
    let i = Complex64::new(0.0, 1.0);
    let mut lin = Complex64::new(0.0, 0.0);
    let mut quad = Complex64::new(0.0, 0.0);
    for h in 0..d {
        lin += model.eta[h] * z[h];
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..d {
            row += model.cov[h * d + j] * z[j];
        }
        quad += z[h] * row;
    }
    (i * lin - 0.5 * quad).exp()
}

impl CharacteristicModel for NormalModel {
    fn dim(&self) -> usize {
        self.eta.len()
    }

    fn cf(&self, z: &[Complex64]) -> Result<Complex64> {
        Ok(normal_cf(self, z))
    }

    fn alpha_admissible(&self, _alpha: &[f64]) -> bool {
        true // entire functions: ĝ extends to all of C^d
    }

    fn damped_params(&self, alpha: &[f64]) -> Option<(f64, Vec<f64>)> {
        let lambda = (-dot(&self.eta, alpha) - 0.5 * dot(alpha, &self.cov_mul(alpha))).exp();
        let mu = self
            .eta
            .iter()
            .zip(self.cov_mul(alpha))
            .map(|(e, sa)| e + sa)
            .collect();
        Some((lambda, mu))
    }

    fn damped_axis_moment(&self, _alpha: &[f64], axis: usize, order: u32) -> Result<f64> {
        if order == 0 || order % 2 != 0 {
            return Err(CosError::InvalidParameters(
                "moment order must be even and positive".into(),
            ));
        }
        // damped normal is N(0, Σ) for every α
        let var = self.covariance_entry(axis, axis);
        Ok(double_factorial(order - 1) * var.powi(order as i32 / 2))
    }

    fn damped_cf_l2_closed_form(&self, _alpha: &[f64]) -> Option<f64> {
        let d = self.dim() as i32;
        Some(0.5f64.powi(d) / (core::f64::consts::PI.powi(d) * self.det()).sqrt())
    }

    fn damped_cf_is_real(&self, _alpha: &[f64]) -> bool {
        true // f̂(u) = exp(-u·Σu/2) for every α
    }

    fn decay(&self) -> DecayExponent {
        DecayExponent::Exponential
    }

    fn mean(&self) -> Vec<f64> {
        self.eta.clone()
    }

    fn sample_into(&self, rng: &mut dyn rand::RngCore, out: &mut [f64]) {
        let d = self.dim();
        let mut z = [0.0f64; MAX_DIM];
        for zh in z.iter_mut().take(d) {
            *zh = rng.sample(StandardNormal);
        }
        for i in 0..d {
            let mut x = self.eta[i];
            for j in 0..=i {
                x += self.chol[i * d + j] * z[j];
            }
            out[i] = x;
        }
    }
}

/// Variance Gamma distribution `VG(a, s, η, θ, σ)`: `X = η + θG + √G σZ`
/// with `G ~ Gamma(shape a, scale s)` and diagonal `Σ`, `Σ_hh = σ_h²`.
#[derive(Debug, Clone)]
pub struct VarianceGammaModel {
    a: f64,
    s: f64,
    eta: Vec<f64>,
    theta: Vec<f64>,
    sigma: Vec<f64>,
}

impl VarianceGammaModel {
    pub fn new(a: f64, s: f64, eta: Vec<f64>, theta: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let d = eta.len();
        if d == 0 || d > MAX_DIM {
            return Err(CosError::InvalidParameters(format!(
                "dimension must be in 1..={MAX_DIM}, got {d}"
            )));
        }
        if theta.len() != d || sigma.len() != d {
            return Err(CosError::InvalidParameters(
                "eta, theta, sigma must share a length".into(),
            ));
        }
        if !(a > 0.0 && s > 0.0) || !sigma.iter().all(|&x| x > 0.0) {
            return Err(CosError::InvalidParameters(
                "VG requires a > 0, s > 0, sigma > 0".into(),
            ));
        }
        if !eta.iter().chain(&theta).all(|x| x.is_finite()) {
            return Err(CosError::InvalidParameters("non-finite parameter".into()));
        }
        Ok(Self {
            a,
            s,
            eta,
            theta,
            sigma,
        })
    }

    pub fn shape(&self) -> f64 {
        self.a
    }

    pub fn scale(&self) -> f64 {
        self.s
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `ζ = 1 - s θ·α - s α·Σα / 2`; the strip requires `ζ > 0`.
    pub fn zeta(&self, alpha: &[f64]) -> f64 {
        let ta: f64 = dot(&self.theta, alpha);
        let asa: f64 = alpha
            .iter()
            .zip(&self.sigma)
            .map(|(a, s)| a * a * s * s)
            .sum();
        1.0 - self.s * ta - 0.5 * self.s * asa
    }

    /// Parameters `(s', θ')` of the damped density, itself a centered VG:
    /// `f ~ VG(a, s/ζ, -a s' θ', θ + Σα, σ)`.
    fn damped_vg_params(&self, alpha: &[f64]) -> (f64, Vec<f64>) {
        let zeta = self.zeta(alpha);
        let s_d = self.s / zeta;
        let theta_d = self
            .theta
            .iter()
            .zip(&self.sigma)
            .zip(alpha)
            .map(|((t, sg), al)| t + sg * sg * al)
            .collect();
        (s_d, theta_d)
    }

    /// Cumulant `κ_n` (n ≥ 2) of the 1-d marginal of a VG with scale `s`,
    /// drift `θ` and volatility `σ`:
    /// `κ_n = n! a Σ_m C(m, n-m) (sθ)^{2m-n} (sσ²/2)^{n-m} / m`.
    fn marginal_cumulant(a: f64, s: f64, theta: f64, sigma: f64, n: u32) -> f64 {
        let mut acc = 0.0;
        let c1 = s * theta;
        let c2 = 0.5 * s * sigma * sigma;
        for m in n.div_ceil(2)..=n {
            let j = n - m;
            acc += binomial(m, j) * c1.powi((2 * m - n) as i32) * c2.powi(j as i32) / m as f64;
        }
        let mut fact = 1.0;
        for k in 2..=n {
            fact *= k as f64;
        }
        fact * a * acc
    }
}

/// `ĝ(z) = exp(i η·z) (1 - i s θ·z + s z·Σz / 2)^{-a}`, principal branch.
pub fn vg_cf(model: &VarianceGammaModel, z: &[Complex64]) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut lin = Complex64::new(0.0, 0.0);
    let mut tz = Complex64::new(0.0, 0.0);
    let mut quad = Complex64::new(0.0, 0.0);
    for h in 0..model.dim() {
        lin += model.eta[h] * z[h];
        tz += model.theta[h] * z[h];
        quad += model.sigma[h] * model.sigma[h] * z[h] * z[h];
    }
    let base = Complex64::new(1.0, 0.0) - i * model.s * tz + 0.5 * model.s * quad;
    if base.re <= 0.0 {
        return Err(CosError::StripViolation(format!(
            "VG characteristic base has non-positive real part ({})",
            base.re
        )));
    }
    Ok((i * lin).exp() * base.powc(Complex64::new(-model.a, 0.0)))
}

impl CharacteristicModel for VarianceGammaModel {
    fn dim(&self) -> usize {
        self.eta.len()
    }

    fn cf(&self, z: &[Complex64]) -> Result<Complex64> {
        vg_cf(self, z)
    }

    fn alpha_admissible(&self, alpha: &[f64]) -> bool {
        self.zeta(alpha) > 0.0
    }

    fn damped_params(&self, alpha: &[f64]) -> Option<(f64, Vec<f64>)> {
        let zeta = self.zeta(alpha);
        if zeta <= 0.0 {
            return None;
        }
        let lambda = (-dot(&self.eta, alpha)).exp() * zeta.powf(self.a);
        let (s_d, theta_d) = self.damped_vg_params(alpha);
        let mu = self
            .eta
            .iter()
            .zip(&theta_d)
            .map(|(e, td)| e + self.a * s_d * td)
            .collect();
        Some((lambda, mu))
    }

    fn damped_axis_moment(&self, alpha: &[f64], axis: usize, order: u32) -> Result<f64> {
        if order == 0 || order % 2 != 0 {
            return Err(CosError::InvalidParameters(
                "moment order must be even and positive".into(),
            ));
        }
        if self.zeta(alpha) <= 0.0 {
            return Err(CosError::StripViolation("zeta <= 0".into()));
        }
        let (s_d, theta_d) = self.damped_vg_params(alpha);
        // central moments from cumulants: m_n = Σ_j C(n-1, j-1) κ_j m_{n-j},
        // κ_1 = 0 because the damped density is centered by construction.
        let n = order as usize;
        let mut kappa = vec![0.0; n + 1];
        for (j, k) in kappa.iter_mut().enumerate().skip(2) {
            *k = Self::marginal_cumulant(self.a, s_d, theta_d[axis], self.sigma[axis], j as u32);
        }
        let mut mom = vec![0.0; n + 1];
        mom[0] = 1.0;
        for i in 1..=n {
            let mut acc = 0.0;
            for j in 2..=i {
                acc += binomial(i as u32 - 1, j as u32 - 1) * kappa[j] * mom[i - j];
            }
            mom[i] = acc;
        }
        Ok(mom[n])
    }

    fn damped_cf_is_real(&self, alpha: &[f64]) -> bool {
        let (_, theta_d) = self.damped_vg_params(alpha);
        theta_d.iter().all(|&t| t == 0.0)
    }

    fn decay(&self) -> DecayExponent {
        DecayExponent::Polynomial(2.0 * self.a)
    }

    fn mean(&self) -> Vec<f64> {
        self.eta
            .iter()
            .zip(&self.theta)
            .map(|(e, t)| e + t * self.a * self.s)
            .collect()
    }

    fn sample_into(&self, rng: &mut dyn rand::RngCore, out: &mut [f64]) {
        let gamma = Gamma::new(self.a, self.s).expect("validated at construction");
        let g: f64 = gamma.sample(rng);
        let sq = g.sqrt();
        for h in 0..self.dim() {
            let z: f64 = rng.sample(StandardNormal);
            out[h] = self.eta[h] + self.theta[h] * g + sq * self.sigma[h] * z;
        }
    }
}

/// Market data for European pricing: spot vector, continuously compounded
/// rate and maturity in years.
#[derive(Debug, Clone)]
pub struct MarketSpec {
    pub spot: Vec<f64>,
    pub rate: f64,
    pub maturity: f64,
}

impl MarketSpec {
    pub fn new(spot: Vec<f64>, rate: f64, maturity: f64) -> Result<Self> {
        if spot.is_empty() || !spot.iter().all(|&s| s > 0.0 && s.is_finite()) {
            return Err(CosError::InvalidParameters("spot must be positive".into()));
        }
        if !(maturity > 0.0) || !rate.is_finite() {
            return Err(CosError::InvalidParameters(
                "maturity must be positive and rate finite".into(),
            ));
        }
        Ok(Self {
            spot,
            rate,
            maturity,
        })
    }

    pub fn discount(&self) -> f64 {
        (-self.rate * self.maturity).exp()
    }
}

/// Black-Scholes log returns: `X(T) ~ N(log S(0) + (r - diag(Σ)/2)T, TΣ)`.
pub fn bs_log_return_model(market: &MarketSpec, sigma_mat: &[f64]) -> Result<NormalModel> {
    let d = market.spot.len();
    if sigma_mat.len() != d * d {
        return Err(CosError::InvalidParameters(format!(
            "sigma_mat must be {d}x{d} row-major"
        )));
    }
    let t = market.maturity;
    let eta = (0..d)
        .map(|h| market.spot[h].ln() + (market.rate - 0.5 * sigma_mat[h * d + h]) * t)
        .collect();
    let cov = sigma_mat.iter().map(|x| x * t).collect();
    NormalModel::new(eta, cov)
}

/// Variance Gamma log returns: `X(T) ~ VG(T/ν, ν, η, θ, σ)` with the
/// martingale drift `η_h = log S_h(0) + (r + log(1 - σ_h²ν/2 - θ_hν)/ν)T`.
pub fn vg_log_return_model(
    market: &MarketSpec,
    nu: f64,
    theta: Vec<f64>,
    sigma: Vec<f64>,
) -> Result<VarianceGammaModel> {
    let d = market.spot.len();
    if theta.len() != d || sigma.len() != d {
        return Err(CosError::InvalidParameters(
            "theta and sigma must match the spot dimension".into(),
        ));
    }
    if !(nu > 0.0) {
        return Err(CosError::InvalidParameters("nu must be positive".into()));
    }
    let t = market.maturity;
    let mut eta = Vec::with_capacity(d);
    for h in 0..d {
        let arg = 1.0 - 0.5 * sigma[h] * sigma[h] * nu - theta[h] * nu;
        if arg <= 0.0 {
            return Err(CosError::InvalidParameters(format!(
                "1 - sigma_h^2 nu/2 - theta_h nu must be positive (axis {h}: {arg})"
            )));
        }
        eta.push(market.spot[h].ln() + (market.rate + arg.ln() / nu) * t);
    }
    VarianceGammaModel::new(t / nu, nu, eta, theta, sigma)
}

/// `m_h(n) = ∫ x_h^n f(x) dx` of the damped density, even `n ≥ 2`.
pub fn axis_moment(dd: &DampedDensity<'_>, axis: usize, order: u32) -> Result<f64> {
    if axis >= dd.dim() {
        return Err(CosError::InvalidParameters("axis out of range".into()));
    }
    let m = dd.model().damped_axis_moment(dd.alpha(), axis, order)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(CosError::MomentUnavailable(format!(
            "axis {axis} order {order} moment is {m}"
        )));
    }
    Ok(m)
}

/// `(2π)^{-d} ∫ |f̂(u)|² du`: model closed form when available, otherwise
/// quadrature in Fourier space with the truncation radius chosen from the
/// model's decay so the discarded tail sits below the stopping-rule
/// resolution.
pub fn cf_l2_norm(dd: &DampedDensity<'_>) -> Result<f64> {
    if let Some(v) = dd.model().damped_cf_l2_closed_form(dd.alpha()) {
        return Ok(v);
    }
    let d = dd.dim();
    match dd.model().decay() {
        DecayExponent::Polynomial(p) if p <= d as f64 / 2.0 => {
            return Err(CosError::NotSquareIntegrable(format!(
                "decay exponent {p} <= d/2 = {}",
                d as f64 / 2.0
            )))
        }
        _ => {}
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    if d == 1 {
        // |f̂| is even; geometric panels chase the tail to the requested
        // resolution, the analytic tail below 1e-12 relative is dropped.
        let value = panel_integrate(
            |u| dd.eval_cf(&[u]).map(|c| c.norm_sqr()).unwrap_or(0.0),
            0.0,
            f64::INFINITY,
            1.0,
            32,
            1e-16,
        );
        return Ok(2.0 * value / two_pi);
    }
    if d > 3 {
        return Err(CosError::Unsupported(
            "numeric cf_l2_norm fallback implemented for d <= 3; higher dimensions \
             need a model closed form"
                .into(),
        ));
    }
    // probe a decay radius per axis and along the diagonal, take the max
    let mut radius: f64 = 1.0;
    let probe = |dir: &dyn Fn(f64, usize) -> f64| {
        let mut r = 1.0f64;
        let mut u = [0.0f64; MAX_DIM];
        for _ in 0..60 {
            for (h, uh) in u.iter_mut().enumerate().take(d) {
                *uh = dir(r, h);
            }
            let mag = dd.eval_cf(&u[..d]).map(|c| c.norm()).unwrap_or(0.0);
            if mag < 1e-9 {
                return r;
            }
            r *= 1.5;
        }
        r
    };
    for h in 0..d {
        let r = probe(&|r, j| if j == h { r } else { 0.0 });
        radius = radius.max(r);
    }
    let diag = probe(&|r, _| r / (d as f64).sqrt());
    radius = radius.max(diag) * 1.5;
    let lo = vec![-radius; d];
    let hi = vec![radius; d];
    let value = tensor_gl_integrate(
        |u| dd.eval_cf(u).map(|c| c.norm_sqr()).unwrap_or(0.0),
        &lo,
        &hi,
        200,
    );
    Ok(value / two_pi.powi(d as i32))
}

#[cfg(test)]
pub(crate) fn spd_min_eigenvalue(model: &NormalModel) -> f64 {
    min_eigenvalue(&model.chol, model.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::{build_damped_density, DampingFactor};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn cvec(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn normal_cf_basic_values() {
        let m = NormalModel::scalar(0.0, 0.04).unwrap();
        assert_eq!(m.cf(&cvec(&[0.0])).unwrap(), Complex64::new(1.0, 0.0));
        let v = m.cf(&cvec(&[1.0])).unwrap();
        assert_relative_eq!(v.re, (-0.02f64).exp(), max_relative = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0);
    }

    #[test]
    fn normal_cf_matrix_quadratic_form() {
        // reference basket covariance with rho = 1/2, hand-expanded 2x2 oracle:
        // z = (1,1): z·Σz = 0.04 + 0.16 + 2*0.04 = 0.28
        let m = NormalModel::new(vec![0.3, -0.2], vec![0.04, 0.04, 0.04, 0.16]).unwrap();
        let v = m.cf(&cvec(&[1.0, 1.0])).unwrap();
        let want = (Complex64::new(0.0, 0.3 - 0.2) - 0.14).exp();
        assert_relative_eq!(v.re, want.re, max_relative = 1e-14);
        assert_relative_eq!(v.im, want.im, max_relative = 1e-14);
    }

    #[test]
    fn normal_model_rejects_bad_covariance() {
        assert!(NormalModel::new(vec![0.0, 0.0], vec![1.0, 0.9, 0.2, 1.0]).is_err());
        assert!(NormalModel::new(vec![0.0, 0.0], vec![1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(NormalModel::scalar(0.0, 0.0).is_err());
    }

    #[test]
    fn vg_cf_reference_cdf_parameters() {
        // a = 1/0.19, s = 0.19, theta = eta = 0, sigma = 0.13: real positive cf
        let a = 1.0 / 0.19;
        let m = VarianceGammaModel::new(a, 0.19, vec![0.0], vec![0.0], vec![0.13]).unwrap();
        assert_eq!(m.cf(&cvec(&[0.0])).unwrap(), Complex64::new(1.0, 0.0));
        let u = 3.7;
        let want = (1.0f64 + 0.5 * 0.19 * 0.0169 * u * u).powf(-a);
        let got = m.cf(&cvec(&[u])).unwrap();
        assert_relative_eq!(got.re, want, max_relative = 1e-13);
        assert_abs_diff_eq!(got.im, 0.0);
    }

    #[test]
    fn vg_cf_decay_slope_matches_2a() {
        let a = 1.0 / 0.19;
        let m = VarianceGammaModel::new(a, 0.19, vec![0.0], vec![0.0], vec![0.13]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        // log-log slope of |f̂(t)| between t = 1e2 and t = 1e4
        let f2 = dd.eval_cf(&[1e2]).unwrap().norm().ln();
        let f4 = dd.eval_cf(&[1e4]).unwrap().norm().ln();
        let slope = (f4 - f2) / (1e4f64.ln() - 1e2f64.ln());
        assert_relative_eq!(slope, -2.0 * a, max_relative = 0.05);
    }

    #[test]
    fn vg_strip_violation_detected() {
        let m = VarianceGammaModel::new(2.0, 1.0, vec![0.0], vec![0.0], vec![1.0]).unwrap();
        // zeta = 1 - 0.5 * 1 * alpha^2: |alpha| >= sqrt(2) leaves the strip
        assert!(m.alpha_admissible(&[-1.0]));
        assert!(!m.alpha_admissible(&[-1.5]));
        let z = [Complex64::new(0.0, 1.5)]; // z = u - i*alpha with alpha = -1.5
        assert!(matches!(m.cf(&z), Err(CosError::StripViolation(_))));
    }

    #[test]
    fn bs_log_return_reference_setup() {
        let market = MarketSpec::new(vec![100.0], 0.0, 1.0).unwrap();
        let m = bs_log_return_model(&market, &[0.04]).unwrap();
        assert_relative_eq!(m.eta()[0], 100.0f64.ln() - 0.02, max_relative = 1e-15);
        assert_relative_eq!(m.covariance_entry(0, 0), 0.04, max_relative = 1e-15);
        // d = 2 reference basket
        let market2 = MarketSpec::new(vec![50.0, 50.0], 0.0, 1.0).unwrap();
        let m2 = bs_log_return_model(&market2, &[0.04, 0.04, 0.04, 0.16]).unwrap();
        assert_relative_eq!(m2.eta()[0], 50.0f64.ln() - 0.02, max_relative = 1e-15);
        assert_relative_eq!(m2.eta()[1], 50.0f64.ln() - 0.08, max_relative = 1e-15);
    }

    #[test]
    fn vg_log_return_parameters_and_martingale() {
        let market = MarketSpec::new(vec![50.0, 50.0], 0.0, 1.0).unwrap();
        let m = vg_log_return_model(&market, 0.1, vec![-0.03, -0.03], vec![0.2, 0.2]).unwrap();
        assert_relative_eq!(m.shape(), 10.0, max_relative = 1e-15);
        assert_relative_eq!(m.scale(), 0.1, max_relative = 1e-15);
        // discounted spot is a martingale: e^{-rT} ĝ(-i e_h) = S_h(0)
        for h in 0..2 {
            let mut z = [Complex64::new(0.0, 0.0); 2];
            z[h] = Complex64::new(0.0, -1.0);
            let v = m.cf(&z).unwrap();
            assert_relative_eq!(v.re, 50.0, max_relative = 1e-12);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
        }
        // T = 0.5 variant has shape a = 5
        let market05 = MarketSpec::new(vec![50.0, 50.0], 0.0, 0.5).unwrap();
        let m05 = vg_log_return_model(&market05, 0.1, vec![-0.03, -0.03], vec![0.2, 0.2]).unwrap();
        assert_relative_eq!(m05.shape(), 5.0, max_relative = 1e-15);
    }

    #[test]
    fn vg_log_return_rejects_bad_log_argument() {
        let market = MarketSpec::new(vec![50.0], 0.0, 1.0).unwrap();
        let r = vg_log_return_model(&market, 2.0, vec![0.6], vec![0.2]);
        assert!(matches!(r, Err(CosError::InvalidParameters(_))));
    }

    #[test]
    fn normal_axis_moments_closed_form() {
        let m = NormalModel::scalar(0.7, 0.04).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        assert_relative_eq!(axis_moment(&dd, 0, 2).unwrap(), 0.04, max_relative = 1e-15);
        assert_relative_eq!(
            axis_moment(&dd, 0, 8).unwrap(),
            105.0 * 0.04f64.powi(4),
            max_relative = 1e-14
        );
        assert!(axis_moment(&dd, 0, 3).is_err());
    }

    #[test]
    fn vg_moments_match_frozen_cumulant_oracle() {
        // VG put reference damped density (alpha = 0): m8 cross-checked against
        // adaptive quadrature of x^8 against the VG density (mpmath, 30 digits).
        let market = MarketSpec::new(vec![50.0], 0.0, 1.0).unwrap();
        let m = vg_log_return_model(&market, 0.1686, vec![-0.1436], vec![0.1213]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        assert_relative_eq!(
            axis_moment(&dd, 0, 2).unwrap(),
            0.018190383856,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            axis_moment(&dd, 0, 8).unwrap(),
            4.58844441815561e-5,
            max_relative = 1e-10
        );
    }

    #[test]
    fn vg_moment_symmetric_product_form() {
        // theta = 0: E[X^8] = 105 sigma^8 (1+s)(1+2s)(1+3s)
        let a = 1.0 / 0.19;
        let m = VarianceGammaModel::new(a, 0.19, vec![0.0], vec![0.0], vec![0.13]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        let want = 105.0 * 0.13f64.powi(8) * 1.19 * 1.38 * 1.57;
        assert_relative_eq!(axis_moment(&dd, 0, 8).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn cf_l2_norm_normal_closed_forms() {
        let m = NormalModel::scalar(0.0, 1.0).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        assert_relative_eq!(
            cf_l2_norm(&dd).unwrap(),
            0.28209479177387814,
            max_relative = 1e-14
        );
        let m2 = NormalModel::new(vec![0.0, 0.0], vec![0.04, 0.04, 0.04, 0.16]).unwrap();
        let dd2 = build_damped_density(&m2, DampingFactor::zero(2)).unwrap();
        let det = 0.04 * 0.16 - 0.04 * 0.04;
        let want = 0.25 / (core::f64::consts::PI.powi(2) * det).sqrt();
        assert_relative_eq!(cf_l2_norm(&dd2).unwrap(), want, max_relative = 1e-13);
    }

    #[test]
    fn cf_l2_norm_vg_matches_levy_density_at_zero() {
        // Lévy-density oracle: (2π)^{-1} ∫ |f̂_{X_T}|² = f_{X_{2T}}(0), VG density
        // at zero from the gamma-mixture closed form (mpmath: 2.25128987674756425)
        let a = 1.0 / 0.19;
        let m = VarianceGammaModel::new(a, 0.19, vec![0.0], vec![0.0], vec![0.13]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        assert_relative_eq!(
            cf_l2_norm(&dd).unwrap(),
            2.25128987674756425,
            max_relative = 1e-9
        );
    }

    #[test]
    fn vg_sampler_matches_cumulants() {
        use rand::SeedableRng;
        let market = MarketSpec::new(vec![50.0], 0.0, 1.0).unwrap();
        let m = vg_log_return_model(&market, 0.1686, vec![-0.1436], vec![0.1213]).unwrap();
        let n = 1_000_000usize;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut x = [0.0f64];
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            m.sample_into(&mut rng, &mut x);
            sum += x[0];
            sumsq += x[0] * x[0];
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let want_mean = m.mean()[0];
        let want_var = m.shape() * m.scale() * 0.1213f64.powi(2)
            + m.shape() * m.scale().powi(2) * 0.1436f64.powi(2);
        // 5 standard errors
        let se_mean = (want_var / n as f64).sqrt();
        assert!((mean - want_mean).abs() < 5.0 * se_mean);
        let m4 = axis_moment(
            &build_damped_density(&m, DampingFactor::zero(1)).unwrap(),
            0,
            4,
        )
        .unwrap();
        let se_var = ((m4 - want_var * want_var) / n as f64).sqrt();
        assert!((var - want_var).abs() < 5.0 * se_var);
    }

    #[test]
    fn min_eigenvalue_2x2_closed_form() {
        let m = NormalModel::new(vec![0.0, 0.0], vec![0.04, 0.04, 0.04, 0.16]).unwrap();
        let tr: f64 = 0.2;
        let det = 0.0048;
        let want = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
        assert_relative_eq!(spd_min_eigenvalue(&m), want, max_relative = 1e-9);
    }
}
