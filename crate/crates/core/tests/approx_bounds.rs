//! Desk-scale checks of the attainable error of the constructive
//! approximants, the pigeonhole/large-drop machinery, and the adversarial
//! lower bound, across weight kinds and norm exponents.

mod common;

use common::{random_curve, random_domain, rng};
use demex_core::approx::{
    adversarial_grid, adversarial_step_family, best_in_cone, distance, err_estimate,
    large_drop_intervals, midpoint_lob_approximant, monotone_sampler, pigeonhole_interval,
    univ3_replicant, ApproxConfig, TargetClassBounds,
};
use demex_core::mechanism::{equal_measure_ticks, geometric_ticks};
use demex_core::{Basis, ConeCoefficients, DemandCurve, PriceDomain, WeightFunction};
use rand::Rng;

fn unit_bounds() -> TargetClassBounds {
    TargetClassBounds::new(0.0, 1.0).unwrap()
}

/// Monotone targets for bound checks: sampled staircases plus the
/// adversarial family sized to the mechanism.
fn target_pool(
    w: &WeightFunction,
    bounds: TargetClassBounds,
    adversary_n: usize,
    samples: usize,
    seed: u64,
) -> Vec<DemandCurve> {
    let mut pool = adversarial_step_family(w, adversary_n, bounds).unwrap();
    for i in 0..samples {
        pool.push(monotone_sampler(seed + i as u64, bounds, 1 + i % 7, w).unwrap());
    }
    pool
}

#[test]
fn midpoint_lob_attains_the_equal_measure_bound() {
    let domain = PriceDomain::new(1.0, 4.0).unwrap();
    let bounds = unit_bounds();
    let weights = [
        WeightFunction::uniform(domain),
        WeightFunction::log_uniform(domain),
        WeightFunction::piecewise_constant(vec![1.0, 1.5, 2.5, 4.0], vec![2.0, 0.5, 1.0])
            .unwrap(),
    ];
    for w in &weights {
        for p_exp in [1.0, 2.0] {
            for eps in [0.5f64, 0.25] {
                let k = (1.0 / eps.powf(p_exp)).ceil() as usize;
                let ticks = equal_measure_ticks(w, k).unwrap();
                let basis = Basis::lob_with_ones(domain, &ticks).unwrap();
                assert_eq!(basis.complexity(), k);
                let bound = 0.5 * bounds.spread() / (k as f64).powf(1.0 / p_exp);
                for f in target_pool(w, bounds, k + 1, 12, 99) {
                    let coefs = midpoint_lob_approximant(&f, &ticks).unwrap();
                    let g = basis.synthesize(&coefs).unwrap();
                    let d = distance(&f, &g, w, p_exp).unwrap();
                    assert!(d <= bound + 1e-9, "distance {d} above bound {bound}");
                    let fit = best_in_cone(&f, &basis, w, &ApproxConfig::new(p_exp)).unwrap();
                    assert!(fit.distance <= d + 1e-12, "solver above its warm start");
                }
            }
        }
    }
}

#[test]
fn univ3_replicant_attains_the_geometric_bound() {
    let domain = PriceDomain::new(1.0, 16.0).unwrap();
    let w = WeightFunction::log_uniform(domain);
    let bounds = unit_bounds();
    for p_exp in [1.0, 2.0] {
        for eps in [0.5, 0.25] {
            let ticks = geometric_ticks(domain, eps, p_exp).unwrap();
            // Per-interval mass under the log-uniform weight is exactly 1/n.
            let max_mass = w.max_interval_mass(&ticks).unwrap();
            assert!((max_mass - 1.0 / (ticks.len() - 1) as f64).abs() < 1e-12);
            let basis = Basis::univ3(domain, &ticks, true).unwrap();
            let bound = eps * bounds.spread();
            for f in target_pool(&w, bounds, basis.complexity() + 1, 12, 7) {
                let coefs = univ3_replicant(&f, &ticks).unwrap();
                let g = basis.synthesize(&coefs).unwrap();
                let d = distance(&f, &g, &w, p_exp).unwrap();
                assert!(d <= bound * (1.0 + 1e-6), "distance {d} above bound {bound}");
            }
        }
    }
}

#[test]
fn at_most_one_large_drop_interval_ever() {
    let mut r = rng(0xa11);
    for trial in 0..200 {
        let domain = random_domain(&mut r);
        let w = match trial % 3 {
            0 => WeightFunction::uniform(domain),
            1 => WeightFunction::log_uniform(domain),
            _ => {
                let mid = (domain.pmin() + domain.pmax()) / 2.0;
                WeightFunction::piecewise_constant(
                    vec![domain.pmin(), mid, domain.pmax()],
                    vec![1.0 + r.random::<f64>(), 0.2 + r.random::<f64>()],
                )
                .unwrap()
            }
        };
        let n = 1 + r.random_range(0..10);
        let grid = adversarial_grid(&w, n).unwrap();
        let g = random_curve(&mut r, domain, 10);
        let count = large_drop_intervals(&g, &grid).unwrap().len();
        assert!(count <= 1, "{count} large-drop intervals");
    }
}

#[test]
fn pigeonhole_interval_caps_cone_drops() {
    let mut r = rng(0xbee);
    for _ in 0..40 {
        let domain = random_domain(&mut r);
        let w = WeightFunction::uniform(domain);
        let ticks = equal_measure_ticks(&w, 4).unwrap();
        let basis = Basis::lob_with_ones(domain, &ticks).unwrap();
        let n = basis.complexity() + 1;
        let grid = adversarial_grid(&w, n).unwrap();
        let l = pigeonhole_interval(&basis, &grid)
            .unwrap()
            .expect("a basis of size n-1 must leave a candidate uncovered");
        for _ in 0..8 {
            let coefs: Vec<f64> =
                (0..basis.complexity()).map(|_| 2.0 * r.random::<f64>()).collect();
            let g = basis.synthesize(&ConeCoefficients::new(coefs).unwrap()).unwrap();
            let outer = g.evaluate(grid[3]).unwrap() - g.evaluate(grid[2 * n + 3]).unwrap();
            let drop =
                g.evaluate(grid[2 * l + 1]).unwrap() - g.evaluate(grid[2 * l + 3]).unwrap();
            assert!(drop <= 0.5 * outer + 1e-10);
        }
    }
}

#[test]
fn adversarial_family_forces_the_lower_bound_constant() {
    let domain = PriceDomain::new(1.0, 4.0).unwrap();
    let w = WeightFunction::uniform(domain);
    let bounds = unit_bounds();
    for p_exp in [1.0, 2.0] {
        for k in [2usize, 4] {
            let ticks = equal_measure_ticks(&w, k).unwrap();
            let basis = Basis::lob_with_ones(domain, &ticks).unwrap();
            let n = basis.complexity() + 1;
            let cfg = ApproxConfig::new(p_exp);
            let mut worst = 0.0f64;
            for f in adversarial_step_family(&w, n, bounds).unwrap() {
                worst = worst.max(best_in_cone(&f, &basis, &w, &cfg).unwrap().distance);
            }
            let floor = 0.125
                * bounds.spread()
                * (1.0 / (2.0 * (k as f64 + 3.0))).powf(1.0 / p_exp);
            assert!(worst >= floor, "worst {worst} under floor {floor} (k={k}, p={p_exp})");
        }
    }
}

#[test]
fn err_estimate_stays_within_the_analytic_bracket() {
    let domain = PriceDomain::new(1.0, 4.0).unwrap();
    let w = WeightFunction::uniform(domain);
    let bounds = unit_bounds();
    let k = 5usize;
    let ticks = equal_measure_ticks(&w, k).unwrap();
    let basis = Basis::lob_with_ones(domain, &ticks).unwrap();
    let cfg = ApproxConfig { grid_size: 128, ..ApproxConfig::new(1.0) };
    let estimate = err_estimate(&basis, &w, bounds, &cfg, 3, 16).unwrap();
    // Upper: the constructive bound holds for every target in the class.
    let upper = 0.5 * bounds.spread() / k as f64;
    assert!(estimate.value <= upper + 1e-9, "estimate {} above {upper}", estimate.value);
    // Lower: the adversary pool includes the pigeonhole family.
    let lower = 0.125 * bounds.spread() / (2.0 * (k as f64 + 3.0));
    assert!(estimate.value >= lower, "estimate {} under {lower}", estimate.value);
}
