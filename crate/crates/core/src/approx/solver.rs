//! Best approximation within a cone: discretized nonnegative least squares.
//!
//! The objective is discretized on an equal-measure quantile grid of the
//! weight, giving `min_{c >= 0} (1/M) Σ_j |A_j c - b_j|^p`. For `p = 2`
//! this is NNLS, solved by projected gradient descent with a backtracking
//! line search on the Gram form; for `p = 1` an IRLS loop reuses the same
//! projection and falls back to projected subgradient steps when it stalls.
//!
//! The reported distance is always re-measured exactly (via
//! [`super::distance`]) and never exceeds the distance of any seed, so the
//! constructive approximants act as certified warm starts.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::DemandCurve;
use crate::error::{Error, Result};
use crate::measure::WeightFunction;
use crate::mechanism::{Basis, BasisKind, ConeCoefficients};

use super::{distance, midpoint_lob_approximant, univ3_replicant, ApproxConfig};

/// Result of a cone fit: achieved (not certified-optimal) coefficients and
/// their exact distance.
#[derive(Clone, Debug)]
pub struct ConeFit {
    pub coefficients: ConeCoefficients,
    pub distance: f64,
    /// False when the iteration cap ran out before the relative objective
    /// tolerance was met.
    pub converged: bool,
}

/// [`best_in_cone_seeded`] with only the construction-matched seeds.
pub fn best_in_cone(
    f: &DemandCurve,
    basis: &Basis,
    w: &WeightFunction,
    cfg: &ApproxConfig,
) -> Result<ConeFit> {
    best_in_cone_seeded(f, basis, w, cfg, &[])
}

/// Approximately minimizes `distance(f, synthesize(basis, c), w, p)` over
/// nonnegative `c`. The returned fit never measures worse than any seed in
/// `extra_seeds` nor than the built-in construction seed for LOB/v3 bases.
pub fn best_in_cone_seeded(
    f: &DemandCurve,
    basis: &Basis,
    w: &WeightFunction,
    cfg: &ApproxConfig,
    extra_seeds: &[ConeCoefficients],
) -> Result<ConeFit> {
    cfg.validate()?;
    if f.domain() != basis.domain() || f.domain() != w.domain() {
        return Err(Error::DomainMismatch);
    }
    if cfg.p_exp != 1.0 && cfg.p_exp != 2.0 {
        return Err(Error::UnsupportedExponent(cfg.p_exp));
    }
    let k = basis.complexity();
    if k == 0 {
        let zero = ConeCoefficients::zeros(0);
        let d = distance(f, &basis.synthesize(&zero)?, w, cfg.p_exp)?;
        return Ok(ConeFit { coefficients: zero, distance: d, converged: true });
    }

    // Discretized problem on the equal-measure midpoint grid.
    let m = cfg.grid_size;
    let mut grid = Vec::with_capacity(m);
    for j in 0..m {
        grid.push(w.quantile((j as f64 + 0.5) / m as f64)?);
    }
    let mut a = vec![0.0; m * k];
    for (i, curve) in basis.curves().iter().enumerate() {
        for (j, s) in grid.iter().enumerate() {
            a[j * k + i] = curve.evaluate(*s)?;
        }
    }
    let b: Vec<f64> = grid.iter().map(|s| f.evaluate(*s)).collect::<Result<_>>()?;

    let mut seeds: Vec<Vec<f64>> = vec![vec![0.0; k]];
    if let Some(seed) = construction_seed(f, basis)? {
        seeds.push(seed);
    }
    for extra in extra_seeds {
        if extra.len() == k {
            seeds.push(extra.as_slice().to_vec());
        }
    }

    // Start the solver from the best seed under the discrete objective.
    let start = seeds
        .iter()
        .min_by(|x, y| {
            let fx = discrete_objective(&a, &b, x, cfg.p_exp);
            let fy = discrete_objective(&a, &b, y, cfg.p_exp);
            fx.partial_cmp(&fy).expect("objectives are finite")
        })
        .expect("at least the zero seed")
        .clone();

    let mut solved: Vec<Vec<f64>> = Vec::with_capacity(2);
    let converged;
    if cfg.p_exp == 2.0 {
        let (q, qv, offset) = gram(&a, &b, m, k, None);
        let out = pgd(&q, &qv, offset, start, cfg.solver_tol, cfg.max_iters);
        converged = out.1;
        solved.push(out.0);
    } else {
        let out = irls_l1(&a, &b, m, k, start.clone(), cfg);
        converged = out.1;
        solved.push(out.0);
        // Companion least-squares run: on exact-fit targets both norms share
        // the optimum and the quadratic path reaches it far more accurately.
        let (q, qv, offset) = gram(&a, &b, m, k, None);
        solved.push(pgd(&q, &qv, offset, start, cfg.solver_tol, cfg.max_iters).0);
    }

    // Pick the winner by exact distance; seeds guarantee dominance.
    let mut best: Option<(Vec<f64>, f64)> = None;
    for candidate in seeds.iter().chain(solved.iter()) {
        let coefs = ConeCoefficients::new(candidate.clone())?;
        let d = distance(f, &basis.synthesize(&coefs)?, w, cfg.p_exp)?;
        if best.as_ref().map_or(true, |(_, bd)| d < *bd) {
            best = Some((candidate.clone(), d));
        }
    }
    let (coefficients, dist) = best.expect("candidate set is nonempty");
    Ok(ConeFit {
        coefficients: ConeCoefficients::new(coefficients)?,
        distance: dist,
        converged,
    })
}

/// Construction-matched warm start, when the basis kind has one. For bases
/// without the all-ones element the final-level coefficient is dropped,
/// which stays feasible but keeps no guarantee.
fn construction_seed(f: &DemandCurve, basis: &Basis) -> Result<Option<Vec<f64>>> {
    Ok(match basis.kind() {
        BasisKind::Lob { ticks, with_ones } => {
            if let Some(exact) = exact_staircase_seed(f, ticks, *with_ones) {
                return Ok(Some(exact));
            }
            let full = midpoint_lob_approximant(f, ticks)?;
            let mut seed = full.as_slice().to_vec();
            if !with_ones {
                seed.pop();
            }
            Some(seed)
        }
        BasisKind::Univ3 { ticks, with_ones } => {
            let full = univ3_replicant(f, ticks)?;
            let mut seed = full.as_slice().to_vec();
            if !with_ones {
                seed.pop();
            }
            Some(seed)
        }
        _ => None,
    })
}

/// Exact decomposition of a staircase whose drops all land on ticks: the
/// jump sizes become the step coefficients and the final level rides the
/// all-ones curve. `None` when `f` is not such a staircase (or its floor is
/// unrepresentable without the ones element).
fn exact_staircase_seed(f: &DemandCurve, ticks: &[f64], with_ones: bool) -> Option<Vec<f64>> {
    use crate::curve::SegmentKind;
    if f.segments().iter().any(|s| !matches!(s, SegmentKind::Constant { .. })) {
        return None;
    }
    let floor = f.value_at_max();
    if !with_ones && floor != 0.0 {
        return None;
    }
    let mut seed = alloc::vec![0.0; ticks.len() + usize::from(with_ones)];
    for (at, size) in f.jumps() {
        match ticks.iter().position(|t| *t == at) {
            Some(i) => seed[i] = size,
            None => return None,
        }
    }
    if with_ones {
        *seed.last_mut().expect("ones slot") = floor;
    }
    Some(seed)
}

fn discrete_objective(a: &[f64], b: &[f64], c: &[f64], p_exp: f64) -> f64 {
    let (m, k) = (b.len(), c.len());
    let mut total = 0.0;
    for j in 0..m {
        let row = &a[j * k..(j + 1) * k];
        let r = dot(row, c) - b[j];
        total += if p_exp == 2.0 { r * r } else { r.abs() };
    }
    total / m as f64
}

/// Gram form of the weighted least squares objective: `AᵀWA`, `AᵀWb` and
/// the constant `½bᵀWb`, with row weights `1/m` (optionally rescaled per
/// row for IRLS).
fn gram(
    a: &[f64],
    b: &[f64],
    m: usize,
    k: usize,
    row_scale: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>, f64) {
    let mut q = vec![0.0; k * k];
    let mut qv = vec![0.0; k];
    let mut offset = 0.0;
    let base = 1.0 / m as f64;
    for j in 0..m {
        let wj = base * row_scale.map_or(1.0, |s| s[j]);
        if wj == 0.0 {
            continue;
        }
        offset += 0.5 * wj * b[j] * b[j];
        let row = &a[j * k..(j + 1) * k];
        for (i, ai) in row.iter().enumerate() {
            if *ai == 0.0 {
                continue;
            }
            let wa = wj * ai;
            qv[i] += wa * b[j];
            for (i2, ai2) in row.iter().enumerate() {
                q[i * k + i2] += wa * ai2;
            }
        }
    }
    (q, qv, offset)
}

/// Accelerated projected gradient descent (FISTA with a monotone restart)
/// for `min_{c >= 0} ½cᵀQc - qᵀc + offset`, with Armijo backtracking from
/// the momentum point; the offset makes the objective vanish at a perfect
/// fit so the relative stopping test stays meaningful. Returns the iterate,
/// a convergence flag, and iterations spent.
///
/// The problem is Jacobi-preconditioned first (`y = D c`, `D = diag
/// sqrt(Q_ii)`), which leaves the nonnegativity constraint untouched and
/// tames both the wild row weights IRLS produces and the near-collinear
/// columns of nested step bases.
fn pgd(
    q_raw: &[f64],
    qv_raw: &[f64],
    offset: f64,
    c0: Vec<f64>,
    tol: f64,
    max_iters: usize,
) -> (Vec<f64>, bool, usize) {
    let k = c0.len();
    let d: Vec<f64> = (0..k).map(|i| q_raw[i * k + i].max(1e-300).sqrt()).collect();
    let mut q = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            q[i * k + j] = q_raw[i * k + j] / (d[i] * d[j]);
        }
    }
    let qv: Vec<f64> = qv_raw.iter().zip(&d).map(|(v, di)| v / di).collect();
    let unscale = |y: &[f64]| -> Vec<f64> { y.iter().zip(&d).map(|(yi, di)| yi / di).collect() };
    // Gershgorin upper bound on the spectral norm.
    let mut lipschitz = 0.0f64;
    for i in 0..k {
        let row_sum: f64 = q[i * k..(i + 1) * k].iter().map(|x| x.abs()).sum();
        lipschitz = lipschitz.max(row_sum);
    }
    let mut x: Vec<f64> = c0.iter().zip(&d).map(|(ci, di)| (ci * di).max(0.0)).collect();
    if lipschitz <= 0.0 || !lipschitz.is_finite() {
        return (unscale(&x), true, 0);
    }
    let objective = |c: &[f64]| -> f64 {
        let mut acc = offset;
        for i in 0..k {
            acc += 0.5 * c[i] * dot(&q[i * k..(i + 1) * k], c) - qv[i] * c[i];
        }
        acc
    };
    let grad_at = |c: &[f64], grad: &mut [f64]| {
        for i in 0..k {
            grad[i] = dot(&q[i * k..(i + 1) * k], c) - qv[i];
        }
    };
    let mut x_prev = x.clone();
    let mut f_x = objective(&x);
    let mut t_mom = 1.0f64;
    let mut grad = vec![0.0; k];
    for iter in 0..max_iters {
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom).sqrt());
        let beta = (t_mom - 1.0) / t_next;
        let y: Vec<f64> =
            x.iter().zip(&x_prev).map(|(xi, pi)| xi + beta * (xi - pi)).collect();
        grad_at(&y, &mut grad);
        let f_y = objective(&y);
        let mut eta = 2.0 / lipschitz;
        let mut trial: Vec<f64> = y.clone();
        let mut f_trial = f_y;
        for _ in 0..40 {
            trial = y.iter().zip(&grad).map(|(yi, gi)| (yi - eta * gi).max(0.0)).collect();
            f_trial = objective(&trial);
            let gd: f64 =
                grad.iter().zip(trial.iter().zip(&y)).map(|(g, (t, yi))| g * (t - yi)).sum();
            let dist2: f64 = trial.iter().zip(&y).map(|(t, yi)| (t - yi) * (t - yi)).sum();
            if f_trial <= f_y + gd + dist2 / (2.0 * eta) + 1e-300 {
                break;
            }
            eta *= 0.5;
        }
        if f_trial > f_x {
            // Momentum overshot: restart and take a guaranteed-descent step.
            t_mom = 1.0;
            grad_at(&x, &mut grad);
            trial = x
                .iter()
                .zip(&grad)
                .map(|(xi, gi)| (xi - gi / lipschitz).max(0.0))
                .collect();
            f_trial = objective(&trial);
            if f_trial > f_x {
                // No float-representable descent left.
                return (unscale(&x), true, iter + 1);
            }
        } else {
            t_mom = t_next;
        }
        let done = (f_x - f_trial).abs() <= tol * f_x.abs().max(1e-300);
        x_prev = core::mem::replace(&mut x, trial);
        f_x = f_trial;
        if done {
            return (unscale(&x), true, iter + 1);
        }
    }
    (unscale(&x), false, max_iters)
}

/// IRLS for the weighted `l1` objective, with a projected-subgradient
/// polish when the reweighting stalls before tolerance.
fn irls_l1(
    a: &[f64],
    b: &[f64],
    m: usize,
    k: usize,
    mut c: Vec<f64>,
    cfg: &ApproxConfig,
) -> (Vec<f64>, bool) {
    let scale = b.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    let l1 = |c: &[f64]| discrete_objective(a, b, c, 1.0);
    let mut best = c.clone();
    let mut best_obj = l1(&c);
    let rounds = 16;
    let inner = (cfg.max_iters / 8).max(60);
    let mut converged = false;
    let mut row_scale = vec![0.0; m];
    let mut residuals = vec![0.0; m];
    for _ in 0..rounds {
        let mut mean_abs = 0.0;
        for j in 0..m {
            let r = dot(&a[j * k..(j + 1) * k], &c) - b[j];
            residuals[j] = r;
            mean_abs += r.abs() / m as f64;
        }
        // Smoothing floor tracks the residual scale so the reweighting
        // stays solvable; it tightens automatically on exact-fit targets.
        let floor = (1e-2 * mean_abs).max(1e-12 * scale);
        for j in 0..m {
            row_scale[j] = 1.0 / residuals[j].abs().max(floor);
        }
        let (q, qv, offset) = gram(a, b, m, k, Some(&row_scale));
        let (next, _, _) = pgd(&q, &qv, offset, c, cfg.solver_tol * 0.1, inner);
        c = next;
        let obj = l1(&c);
        if obj < best_obj {
            let improved = best_obj - obj > cfg.solver_tol * best_obj.max(1e-12);
            best_obj = obj;
            best = c.clone();
            if !improved {
                converged = true;
                break;
            }
        } else {
            converged = (best_obj - obj).abs() <= cfg.solver_tol * best_obj.max(1e-12);
            break;
        }
    }
    if !converged {
        // Subgradient polish from the best iterate seen so far.
        c = best.clone();
        let c_span = c.iter().fold(scale, |acc, x| acc.max(*x));
        let steps = (cfg.max_iters / 4).max(50);
        for t in 0..steps {
            let mut grad = vec![0.0; k];
            for j in 0..m {
                let r = dot(&a[j * k..(j + 1) * k], &c) - b[j];
                let s = if r > 0.0 { 1.0 } else if r < 0.0 { -1.0 } else { 0.0 };
                for i in 0..k {
                    grad[i] += s * a[j * k + i] / m as f64;
                }
            }
            let eta = 0.25 * c_span / (1.0 + t as f64).sqrt();
            for i in 0..k {
                c[i] = (c[i] - eta * grad[i]).max(0.0);
            }
            let obj = l1(&c);
            if obj < best_obj {
                best_obj = obj;
                best = c.clone();
            }
        }
    }
    (best, converged)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
