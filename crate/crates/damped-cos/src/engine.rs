//! The COS core: cosine basis, coefficient tensors `c̃_k` from `f̂` and the
//! primed-sum pairing `Σ' c̃_k ṽ_k`.

use crate::damping::DampedDensity;
use crate::models::MarketSpec;
use crate::{CosError, Result};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::time::Duration;
use num_complex::Complex64;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Default cap on dense coefficient-tensor entries.
pub const DEFAULT_TENSOR_CAP: u128 = 1 << 31;

/// A nonnegative multi-index `k` with its zero-component count `Λ(k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    /// Number of components equal to zero; the primed-sum weight is
    /// `2^{-Λ(k)}`.
    pub fn zeros(&self) -> u32 {
        self.0.iter().filter(|&&k| k == 0).count() as u32
    }
}

/// Integration box half-widths `M` and expansion box half-widths `L ≥ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanGeometry {
    m: Vec<f64>,
    l: Vec<f64>,
}

impl PlanGeometry {
    pub fn new(m: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        if m.is_empty() || m.len() != l.len() {
            return Err(CosError::InvalidParameters(
                "M and L must be nonempty and of equal length".into(),
            ));
        }
        for (mh, lh) in m.iter().zip(&l) {
            if !(*mh > 0.0 && lh >= mh && lh.is_finite()) {
                return Err(CosError::InvalidParameters(format!(
                    "need 0 < M <= L componentwise, got M = {mh}, L = {lh}"
                )));
            }
        }
        Ok(Self { m, l })
    }

    /// Square geometry `L = M`.
    pub fn cube(m: Vec<f64>) -> Result<Self> {
        Self::new(m.clone(), m)
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub fn box_volume_half(&self) -> f64 {
        self.l.iter().product()
    }
}

/// `e_k(x) = ∏_h cos(k_h π (x_h + L_h) / (2 L_h))`.
pub fn basis_eval(k: &[usize], l: &[f64], x: &[f64]) -> f64 {
    let mut acc = 1.0;
    for h in 0..k.len() {
        acc *= (k[h] as f64 * core::f64::consts::PI * (x[h] + l[h]) / (2.0 * l[h])).cos();
    }
    acc
}

/// Real part of `w · i^m` for integer `m`; the phases `exp(iπ/2 s·k)` are
/// quarter turns, so no trigonometry (and no trigonometric rounding) is
/// involved.
#[inline]
fn re_times_i_pow(w: Complex64, m: i64) -> f64 {
    match m.rem_euclid(4) {
        0 => w.re,
        1 => -w.im,
        2 => -w.re,
        _ => w.im,
    }
}

/// Runs `body` over the sign vectors `s = (1, ±1, ..., ±1)`: `s_1 = 1`
/// fixed, remaining signs from a `(d-1)`-bit counter, so the summation
/// order is reproducible. `body` receives `(u, s·k)` where
/// `u_h = (π/2) s_h k_h / L_h`.
#[inline]
pub(crate) fn sign_vector_sum<E>(
    k: &[usize],
    l: &[f64],
    mut body: impl FnMut(&[f64], i64) -> core::result::Result<f64, E>,
) -> core::result::Result<f64, E> {
    let d = k.len();
    let mut u = [0.0f64; crate::MAX_DIM];
    let mut acc = 0.0;
    for bits in 0..(1u32 << (d - 1)) {
        let mut s_dot_k = k[0] as i64;
        u[0] = FRAC_PI_2 * k[0] as f64 / l[0];
        for h in 1..d {
            let neg = (bits >> (h - 1)) & 1 == 1;
            let s = if neg { -1.0 } else { 1.0 };
            u[h] = FRAC_PI_2 * s * k[h] as f64 / l[h];
            s_dot_k += if neg { -(k[h] as i64) } else { k[h] as i64 };
        }
        acc += body(&u[..d], s_dot_k)?;
    }
    Ok(acc)
}

/// Coefficient `c̃_k` of the damped density on `[-L, L]`:
/// `(2^{d-1} ∏ L_h)^{-1} Σ_s Re{ f̂(π/2 · sk/L) exp(iπ/2 s·k) }`.
pub fn coefficient(dd: &DampedDensity<'_>, l: &[f64], k: &[usize]) -> Result<f64> {
    let d = k.len();
    let sum = sign_vector_sum(k, l, |u, s_dot_k| {
        dd.eval_cf(u).map(|f| re_times_i_pow(f, s_dot_k))
    })?;
    let vol: f64 = l.iter().product();
    Ok(sum / ((1u64 << (d - 1)) as f64 * vol))
}

fn grid_len(n: &[usize]) -> u128 {
    n.iter().map(|&nh| nh as u128 + 1).product()
}

/// Dense tensor of `c̃_k` for `0 ≤ k ≤ N` in lexicographic layout (last axis
/// fastest). With a real-valued `f̂` (model-declared), entries with odd
/// `Σ k_h` are exact zeros and are never evaluated.
pub fn coefficient_tensor(
    dd: &DampedDensity<'_>,
    l: &[f64],
    n: &[usize],
    cap: u128,
) -> Result<Vec<f64>> {
    let total = grid_len(n);
    if total > cap {
        return Err(CosError::AllocationTooLarge {
            requested: total,
            cap,
        });
    }
    let mut coeffs = vec![0.0f64; total as usize];
    fill_coefficient_range(dd, l, n, 0, &mut coeffs)?;
    Ok(coeffs)
}

/// Fills `out` with `c̃_k` for the flat lexicographic indices
/// `start..start + out.len()`. Entries are independent, so disjoint ranges
/// may be filled concurrently and still agree bitwise with a serial fill.
pub fn fill_coefficient_range(
    dd: &DampedDensity<'_>,
    l: &[f64],
    n: &[usize],
    start: u128,
    out: &mut [f64],
) -> Result<()> {
    let d = n.len();
    let skip_odd = dd.cf_is_real();
    let mut k = vec![0usize; d];
    let mut rem = start;
    let mut parity = 0usize;
    for h in (0..d).rev() {
        let base = n[h] as u128 + 1;
        k[h] = (rem % base) as usize;
        parity += k[h];
        rem /= base;
    }
    for slot in out.iter_mut() {
        *slot = if skip_odd && parity % 2 == 1 {
            0.0
        } else {
            coefficient(dd, l, &k)?
        };
        // lexicographic odometer, last axis fastest
        for h in (0..d).rev() {
            if k[h] < n[h] {
                k[h] += 1;
                parity += 1;
                break;
            }
            parity -= k[h];
            k[h] = 0;
        }
    }
    Ok(())
}

/// Parallel tensor fill over disjoint flat-index ranges; entries are
/// independent, so the result is bitwise identical to the serial fill for
/// every thread count.
#[cfg(feature = "std")]
pub fn coefficient_tensor_threaded(
    dd: &DampedDensity<'_>,
    l: &[f64],
    n: &[usize],
    cap: u128,
    threads: usize,
) -> Result<Vec<f64>> {
    let total = grid_len(n);
    if total > cap {
        return Err(CosError::AllocationTooLarge {
            requested: total,
            cap,
        });
    }
    let total = total as usize;
    let threads = threads.max(1).min(total);
    if threads == 1 {
        return coefficient_tensor(dd, l, n, cap);
    }
    let mut coeffs = vec![0.0f64; total];
    let chunk = total.div_ceil(threads);
    let mut failure: Option<CosError> = None;
    std::thread::scope(|scope| {
        let mut handles = alloc::vec::Vec::new();
        for (t, slice) in coeffs.chunks_mut(chunk).enumerate() {
            let start = (t * chunk) as u128;
            handles.push(scope.spawn(move || fill_coefficient_range(dd, l, n, start, slice)));
        }
        for h in handles {
            if let Err(e) = h.join().expect("tensor fill worker panicked") {
                failure = Some(e);
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(coeffs),
    }
}

/// Result of a primed-sum evaluation.
#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub value: f64,
    pub n_terms_used: Vec<usize>,
    pub wall_time: Duration,
    pub diagnostics: BTreeMap<String, f64>,
}

/// Truncation box, term counts and the coefficient tensor of one COS run.
#[derive(Debug, Clone)]
pub struct CosPlan {
    geom: PlanGeometry,
    n: Vec<usize>,
    coefficients: Vec<f64>,
}

impl CosPlan {
    /// Computes the coefficient tensor for the given geometry and term counts.
    pub fn build(
        dd: &DampedDensity<'_>,
        geom: PlanGeometry,
        n: Vec<usize>,
        cap: u128,
    ) -> Result<Self> {
        Self::build_with_threads(dd, geom, n, cap, 1)
    }

    /// Like [`CosPlan::build`], filling the tensor on `threads` workers
    /// (bitwise identical to the serial build; `threads` is ignored without
    /// the `std` feature).
    pub fn build_with_threads(
        dd: &DampedDensity<'_>,
        geom: PlanGeometry,
        n: Vec<usize>,
        cap: u128,
        threads: usize,
    ) -> Result<Self> {
        if n.len() != geom.dim() || n.contains(&0) {
            return Err(CosError::InvalidParameters(
                "term counts must be positive and match the geometry dimension".into(),
            ));
        }
        #[cfg(feature = "std")]
        let coefficients = coefficient_tensor_threaded(dd, geom.l(), &n, cap, threads)?;
        #[cfg(not(feature = "std"))]
        let coefficients = {
            let _ = threads;
            coefficient_tensor(dd, geom.l(), &n, cap)?
        };
        Ok(Self {
            geom,
            n,
            coefficients,
        })
    }

    /// Wraps a precomputed tensor (shape must match `∏ (N_h + 1)`).
    pub fn from_parts(geom: PlanGeometry, n: Vec<usize>, coefficients: Vec<f64>) -> Result<Self> {
        if grid_len(&n) != coefficients.len() as u128 {
            return Err(CosError::InvalidParameters(
                "coefficient tensor shape does not match N".into(),
            ));
        }
        Ok(Self {
            geom,
            n,
            coefficients,
        })
    }

    pub fn geometry(&self) -> &PlanGeometry {
        &self.geom
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient_at(&self, k: &[usize]) -> f64 {
        let mut flat = 0usize;
        for h in 0..k.len() {
            flat = flat * (self.n[h] + 1) + k[h];
        }
        self.coefficients[flat]
    }
}

#[inline]
pub(crate) fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// `Σ'_{0 ≤ k ≤ N} c̃_k v_k` with `v_k` supplied per index. Terms are summed
/// in lexicographic order with compensated (Neumaier) accumulation, so the
/// result is deterministic across runs.
pub fn approximate_integral<F>(plan: &CosPlan, mut payoff_coeff: F) -> Result<ApproxResult>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    #[cfg(feature = "std")]
    let t0 = std::time::Instant::now();
    let d = plan.n.len();
    let mut k = vec![0usize; d];
    let mut zeros = d as u32;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &c in &plan.coefficients {
        if c != 0.0 {
            let v = payoff_coeff(&k)?;
            let w = 0.5f64.powi(zeros as i32);
            neumaier_add(&mut sum, &mut comp, w * c * v);
        }
        for h in (0..d).rev() {
            if k[h] < plan.n[h] {
                if k[h] == 0 {
                    zeros -= 1;
                }
                k[h] += 1;
                break;
            }
            if k[h] > 0 {
                zeros += 1;
            }
            k[h] = 0;
        }
    }
    let value = sum + comp;
    if !value.is_finite() {
        return Err(CosError::NonFinite("primed sum".into()));
    }
    #[cfg(feature = "std")]
    let wall_time = t0.elapsed();
    #[cfg(not(feature = "std"))]
    let wall_time = Duration::default();
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert(String::from("sum_compensation"), comp);
    Ok(ApproxResult {
        value,
        n_terms_used: plan.n.clone(),
        wall_time,
        diagnostics,
    })
}

/// Discounts a raw integral to a time-0 price: `e^{-rT} · value`.
pub fn price_option(market: &MarketSpec, result: &ApproxResult) -> f64 {
    market.discount() * result.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::{build_damped_density, DampingFactor};
    use crate::models::NormalModel;
    use crate::quad::tensor_gl_integrate;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn multi_index_zero_count_and_geometry_validation() {
        assert_eq!(MultiIndex(vec![0, 3, 0, 1]).zeros(), 2);
        assert_eq!(MultiIndex(vec![5]).zeros(), 0);
        assert!(PlanGeometry::new(vec![1.0], vec![0.9]).is_err()); // L < M
        assert!(PlanGeometry::new(vec![0.0], vec![1.0]).is_err()); // M = 0
        assert!(PlanGeometry::new(vec![1.0, 1.0], vec![1.0]).is_err());
        let g = PlanGeometry::new(vec![1.0, 2.0], vec![1.5, 2.0]).unwrap();
        assert_eq!(g.box_volume_half(), 3.0);
    }

    #[test]
    fn basis_eval_trivial_points() {
        let l = [1.3, 0.7];
        assert_eq!(basis_eval(&[0, 0], &l, &[0.4, -0.2]), 1.0);
        let x = [-1.3, -0.7];
        assert_relative_eq!(basis_eval(&[3, 5], &l, &x), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn basis_orthogonality_quadrature() {
        // <e_k, e_l> over [-L, L] = 2^{Λ(k)} ∏ L_h when k = l, else 0
        let l = [0.9, 1.7];
        let lo = [-0.9, -1.7];
        let hi = [0.9, 1.7];
        for (k, kk) in [
            ([0usize, 2], [0usize, 2]),
            ([1, 3], [1, 3]),
            ([2, 1], [2, 2]),
            ([0, 1], [1, 1]),
        ] {
            let v = tensor_gl_integrate(
                |x| basis_eval(&k, &l, x) * basis_eval(&kk, &l, x),
                &lo,
                &hi,
                48,
            );
            let want = if k == kk {
                let zeros = k.iter().filter(|&&x| x == 0).count() as i32;
                2.0f64.powi(zeros) * l.iter().product::<f64>()
            } else {
                0.0
            };
            assert_abs_diff_eq!(v, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn coefficient_k0_is_inverse_box_volume() {
        let m = NormalModel::new(vec![0.0, 0.0], vec![0.04, 0.0, 0.0, 0.09]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(2)).unwrap();
        let l = [1.5, 2.0];
        let c0 = coefficient(&dd, &l, &[0, 0]).unwrap();
        assert_relative_eq!(c0, 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn coefficient_reference_value_and_odd_zero() {
        // centered normal, sigma = 0.2, L = 1: c_2 = -exp(-0.02 pi^2)
        let m = NormalModel::scalar(0.0, 0.04).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        let c2 = coefficient(&dd, &[1.0], &[2]).unwrap();
        assert_relative_eq!(c2, -0.820868717415539937, max_relative = 1e-14);
        for k in [1usize, 3, 5, 9] {
            let c = coefficient(&dd, &[1.0], &[k]).unwrap();
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-16);
        }
    }

    #[test]
    fn coefficient_vs_density_quadrature_normal_2d() {
        // c_k within 1e-8 of (∏L)^{-1} ∫_{[-L,L]} f e_k for a 2-d normal
        // (Gaussian mass outside the box is below 1e-12 at 8 sigma)
        let m = NormalModel::new(vec![0.0, 0.0], vec![0.04, 0.01, 0.01, 0.09]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::new(vec![-1.0, 2.0]).unwrap()).unwrap();
        let l = [1.8, 2.6]; // ~9 and ~8.7 sigma
        let lo = [-l[0], -l[1]];
        let hi = [l[0], l[1]];
        let det = 0.04 * 0.09 - 0.0001;
        let inv = [0.09 / det, -0.01 / det, -0.01 / det, 0.04 / det];
        let dens = |x: &[f64]| {
            let q = x[0] * x[0] * inv[0] + 2.0 * x[0] * x[1] * inv[1] + x[1] * x[1] * inv[3];
            (-0.5 * q).exp() / (2.0 * core::f64::consts::PI * det.sqrt())
        };
        for k in [[0usize, 1], [2, 2], [3, 1], [1, 4]] {
            let want = tensor_gl_integrate(|x| dens(x) * basis_eval(&k, &l, x), &lo, &hi, 120)
                / (l[0] * l[1]);
            let got = coefficient(&dd, &l, &k).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn tensor_respects_cap_and_axis_swap_symmetry() {
        let m = NormalModel::new(vec![0.0, 0.0], vec![0.04, 0.01, 0.01, 0.04]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(2)).unwrap();
        assert!(matches!(
            coefficient_tensor(&dd, &[1.0, 1.0], &[100, 100], 100),
            Err(CosError::AllocationTooLarge { .. })
        ));
        let n = [6usize, 6];
        let t = coefficient_tensor(&dd, &[1.2, 1.2], &n, DEFAULT_TENSOR_CAP).unwrap();
        let plan = CosPlan::from_parts(PlanGeometry::cube(vec![1.2, 1.2]).unwrap(), n.to_vec(), t)
            .unwrap();
        for i in 0..=6 {
            for j in 0..=6 {
                assert_relative_eq!(
                    plan.coefficient_at(&[i, j]),
                    plan.coefficient_at(&[j, i]),
                    max_relative = 1e-12,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn single_entry_tensor() {
        let m = NormalModel::scalar(0.0, 0.04).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(1)).unwrap();
        // N = 0 not allowed in CosPlan::build, but the raw tensor is defined
        let t = coefficient_tensor(&dd, &[2.0], &[0], 10).unwrap();
        assert_eq!(t.len(), 1);
        assert_relative_eq!(t[0], 0.5, max_relative = 1e-14);
    }

    #[test]
    fn primed_weights_sum_to_closed_form() {
        // provider ≡ 1: Σ 2^{-Λ(k)} = ∏ (N_h + 1/2)
        let geom = PlanGeometry::cube(vec![1.0, 1.0]).unwrap();
        let n = vec![5usize, 7];
        let ones = vec![1.0; 48];
        let plan = CosPlan::from_parts(geom, n.clone(), ones).unwrap();
        let got = approximate_integral(&plan, |_| Ok(1.0)).unwrap();
        assert_relative_eq!(got.value, 5.5 * 7.5, max_relative = 1e-14);
    }

    #[test]
    fn constant_payoff_picks_out_c0() {
        // v = 1 on the box exactly: provider = ∏L 2^{Λ(k)} [k = 0]; with the
        // density mass essentially inside the box the value is 1.
        let m = NormalModel::new(vec![0.0, 0.0], vec![0.01, 0.0, 0.0, 0.01]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::zero(2)).unwrap();
        let geom = PlanGeometry::cube(vec![1.5, 1.5]).unwrap();
        let plan = CosPlan::build(&dd, geom, vec![4, 4], DEFAULT_TENSOR_CAP).unwrap();
        let vol = 1.5 * 1.5;
        let got = approximate_integral(&plan, |k| {
            Ok(if k.iter().all(|&x| x == 0) {
                vol * 4.0
            } else {
                0.0
            })
        })
        .unwrap();
        assert_relative_eq!(got.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn deterministic_across_runs() {
        let m = NormalModel::new(vec![0.1, -0.2], vec![0.05, 0.02, 0.02, 0.07]).unwrap();
        let dd = build_damped_density(&m, DampingFactor::new(vec![-2.0, -1.0]).unwrap()).unwrap();
        let geom = PlanGeometry::cube(vec![2.0, 2.5]).unwrap();
        let run = || {
            let plan = CosPlan::build(&dd, geom.clone(), vec![12, 9], DEFAULT_TENSOR_CAP).unwrap();
            approximate_integral(&plan, |k| Ok(((k[0] + 2 * k[1]) as f64).sin()))
                .unwrap()
                .value
        };
        let a = run();
        let b = run();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[cfg(feature = "std")]
    #[test]
    fn threaded_tensor_bitwise_equals_serial() {
        let m = NormalModel::new(vec![0.2, -0.1], vec![0.06, 0.02, 0.02, 0.09]).unwrap();
        let dd =
            build_damped_density(&m, DampingFactor::new(vec![-2.0, 1.0]).unwrap()).unwrap();
        let l = [2.1, 2.4];
        let n = [13usize, 9];
        let serial = coefficient_tensor(&dd, &l, &n, DEFAULT_TENSOR_CAP).unwrap();
        for threads in [2usize, 3, 7] {
            let par =
                coefficient_tensor_threaded(&dd, &l, &n, DEFAULT_TENSOR_CAP, threads).unwrap();
            assert_eq!(serial.len(), par.len());
            for (a, b) in serial.iter().zip(&par) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn price_option_discounts() {
        let market = MarketSpec::new(vec![100.0], 0.05, 1.0).unwrap();
        let res = ApproxResult {
            value: 10.0,
            n_terms_used: vec![4],
            wall_time: Duration::default(),
            diagnostics: BTreeMap::new(),
        };
        assert_relative_eq!(
            price_option(&market, &res),
            10.0 * (-0.05f64).exp(),
            max_relative = 1e-15
        );
        let market0 = MarketSpec::new(vec![100.0], 0.0, 1.0).unwrap();
        assert_relative_eq!(price_option(&market0, &res), 10.0, max_relative = 1e-15);
    }
}
