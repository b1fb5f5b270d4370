//! Quadrature helpers: Gauss–Legendre rules (single interval and tensor
//! product) and a recursive adaptive Simpson rule for 1-d oracle integrals.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; standard cosine initial
/// guesses converge in a handful of steps for any practical order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Fixed-order Gauss–Legendre integral of `f` over `[a, b]`.
pub fn gl_integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integral over geometrically growing panels `[a, a+w0], [a+w0, a+2 w0], ...`
/// (doubling width), stopping when a panel contributes less than
/// `tail_tol * |accumulated|` twice in a row or `b` is reached.
pub fn panel_integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    first_width: f64,
    order: usize,
    tail_tol: f64,
) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mut lo = a;
    let mut width = first_width;
    let mut acc = 0.0;
    let mut small_panels = 0;
    while lo < b {
        let hi = (lo + width).min(b);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (lo + hi);
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            panel += w * f(mid + half * x);
        }
        panel *= half;
        acc += panel;
        if panel.abs() < tail_tol * acc.abs() {
            small_panels += 1;
            if small_panels >= 2 {
                break;
            }
        } else {
            small_panels = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    acc
}

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    // the relative floor stops subdivision once the requested absolute
    // tolerance is unreachable in double precision on this panel
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 1e-14 * (left.abs() + right.abs())
    {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    adaptive_step(&mut f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Tensor-product Gauss–Legendre integral over the box `[lo, hi]^d` with
/// `order` nodes per axis.
pub fn tensor_gl_integrate<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    lo: &[f64],
    hi: &[f64],
    order: usize,
) -> f64 {
    let d = lo.len();
    assert_eq!(d, hi.len());
    let (nodes, weights) = gauss_legendre(order);
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0f64; d];
    let mut scale = 1.0;
    for h in 0..d {
        scale *= 0.5 * (hi[h] - lo[h]);
    }
    let mut acc = 0.0;
    let mut comp = 0.0;
    loop {
        let mut w = scale;
        for h in 0..d {
            let mid = 0.5 * (lo[h] + hi[h]);
            let half = 0.5 * (hi[h] - lo[h]);
            x[h] = mid + half * nodes[idx[h]];
            w *= weights[idx[h]];
        }
        let term = w * f(&x);
        let t = acc + term;
        if acc.abs() >= term.abs() {
            comp += (acc - t) + term;
        } else {
            comp += (term - t) + acc;
        }
        acc = t;
        // odometer
        let mut h = 0;
        loop {
            if h == d {
                return acc + comp;
            }
            idx[h] += 1;
            if idx[h] < nodes.len() {
                break;
            }
            idx[h] = 0;
            h += 1;
        }
    }
}
