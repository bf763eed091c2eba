//! Shared generators and independent oracles for the integration tests.
//!
//! The Stieltjes oracle here deliberately avoids the library's closed-form
//! antiderivatives: the continuous part is adaptive-Simpson quadrature of
//! `-p g'(p)` using the analytic derivative of each segment, and jumps are
//! summed from raw segment values.

#![allow(dead_code)]

use demex_core::{DemandCurve, PriceDomain, SegmentKind};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_domain(r: &mut ChaCha8Rng) -> PriceDomain {
    let pmin = 0.2 + 1.8 * r.random::<f64>();
    let ratio = 1.5 + 6.5 * r.random::<f64>();
    PriceDomain::new(pmin, pmin * ratio).unwrap()
}

/// Random valid demand curve with up to `max_segments` mixed segments and
/// occasional jumps.
pub fn random_curve(r: &mut ChaCha8Rng, domain: PriceDomain, max_segments: usize) -> DemandCurve {
    let segments_n = 1 + r.random_range(0..max_segments);
    let mut breakpoints = Vec::with_capacity(segments_n + 1);
    breakpoints.push(domain.pmin());
    for _ in 0..segments_n - 1 {
        breakpoints.push(domain.pmin() + (domain.pmax() - domain.pmin()) * r.random::<f64>());
    }
    breakpoints.push(domain.pmax());
    breakpoints.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup();

    let mut segments = Vec::with_capacity(breakpoints.len() - 1);
    let mut level = 0.5 + 4.5 * r.random::<f64>();
    for pair in breakpoints.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        let end;
        if r.random::<f64>() < 0.5 {
            segments.push(SegmentKind::Constant { c: level });
            end = level;
        } else {
            end = level * (0.2 + 0.8 * r.random::<f64>());
            let a = (level - end) / (1.0 / u.sqrt() - 1.0 / v.sqrt());
            let b = level - a / u.sqrt();
            segments.push(SegmentKind::InverseSqrtAffine { a, b });
        }
        // Maybe jump down at the next breakpoint.
        level = if r.random::<f64>() < 0.4 { end * r.random::<f64>() } else { end };
    }
    DemandCurve::new(domain, breakpoints, segments).expect("generator emits valid curves")
}

/// Strictly decreasing continuous curve (chained inverse-sqrt arcs).
pub fn random_strictly_decreasing(
    r: &mut ChaCha8Rng,
    domain: PriceDomain,
    max_segments: usize,
) -> DemandCurve {
    let segments_n = 1 + r.random_range(0..max_segments);
    let mut breakpoints = Vec::with_capacity(segments_n + 1);
    breakpoints.push(domain.pmin());
    for _ in 0..segments_n - 1 {
        breakpoints.push(domain.pmin() + (domain.pmax() - domain.pmin()) * r.random::<f64>());
    }
    breakpoints.push(domain.pmax());
    breakpoints.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    breakpoints.dedup();

    let mut segments = Vec::with_capacity(breakpoints.len() - 1);
    let mut level = 1.0 + 4.0 * r.random::<f64>();
    let floor = level * 0.05;
    for pair in breakpoints.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        let end = floor + (level - floor) * (0.3 + 0.6 * r.random::<f64>());
        let a = (level - end) / (1.0 / u.sqrt() - 1.0 / v.sqrt());
        let b = level - a / u.sqrt();
        segments.push(SegmentKind::InverseSqrtAffine { a, b });
        level = end;
    }
    DemandCurve::new(domain, breakpoints, segments).expect("generator emits valid curves")
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = simpson(f, a, mid);
    let right = simpson(f, mid, b);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        adaptive_simpson_rec(f, a, mid, left, 0.5 * tol, depth - 1)
            + adaptive_simpson_rec(f, mid, b, right, 0.5 * tol, depth - 1)
    }
}

pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adaptive_simpson_rec(&f, a, b, simpson(&f, a, b), tol, 40)
}

/// Independent oracle for `-∫_a^b p dg(p)` (`a <= b`): quadrature of the
/// analytic `-p g'(p)` per segment plus the jump sum over `(a, b]`.
pub fn stieltjes_oracle(g: &DemandCurve, a: f64, b: f64) -> f64 {
    assert!(a <= b);
    let domain = g.domain();
    let lo = a.max(domain.pmin());
    let hi = b.min(domain.pmax());
    let mut total = 0.0;
    if lo < hi {
        let breakpoints = g.breakpoints();
        for (j, seg) in g.segments().iter().enumerate() {
            let u = breakpoints[j].max(lo);
            let v = breakpoints[j + 1].min(hi);
            if u >= v {
                continue;
            }
            if let SegmentKind::InverseSqrtAffine { a: coef, .. } = seg {
                // -p g'(p) = coef / (2 sqrt(p))
                total += adaptive_simpson(|p| coef / (2.0 * p.sqrt()), u, v, 1e-12);
            }
        }
        for j in 1..g.segments().len() {
            let t = breakpoints[j];
            if lo < t && t <= hi {
                let left = g.segments()[j - 1].value_at(t);
                let right = g.segments()[j].value_at(t);
                if left > right {
                    total += t * (left - right);
                }
            }
        }
    }
    total
}
