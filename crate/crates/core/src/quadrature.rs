//! Gauss–Legendre nodes for the smooth pieces of distance integrals.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// found by Newton iteration on the Legendre recurrence.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, accurate enough for a handful of steps.
        let mut x =
            (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(-x);
        weights.push(w);
    }
    // Mirror to the positive half (skip the shared center for odd n).
    for i in (0..n - half).rev() {
        nodes.push(-nodes[i]);
        weights.push(weights[i]);
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let k = k as f64;
        let next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// `∫_a^b f` using a fixed rule.
pub(crate) fn integrate<F: Fn(f64) -> f64>(
    nodes: &[f64],
    weights: &[f64],
    a: f64,
    b: f64,
    f: F,
) -> f64 {
    let mid = 0.5 * (a + b);
    let scale = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + scale * x);
    }
    acc * scale
}
