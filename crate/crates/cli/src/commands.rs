//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::PathBuf;

use demex_core::approx::{
    adversarial_grid, adversarial_step_family, best_in_cone, classify_branch, distance,
    err_estimate, midpoint_lob_approximant, pigeonhole_interval, univ3_replicant, ApproxConfig,
    TargetClassBounds,
};
use demex_core::engine::{LedgerRow, PoolEvent, PoolState};
use demex_core::mechanism::{equal_measure_ticks, geometric_ticks};
use demex_core::{Basis, BasisKind, ConeCoefficients, Error as CoreError, WeightFunction};
use rayon::prelude::*;

use crate::formats::{
    branch_name, ApproxReportDto, CurveDto, EventDto, LowerBoundReportDto, MechanismDto,
    TradeoffConfigDto, WeightDto,
};
use crate::{parse_json, read_file, write_output, Cli, CliError};

fn ledger_header() -> &'static str {
    "step,op,p0,risky_reserve,numeraire_reserve,risky_delta,numeraire_delta"
}

fn ledger_line(row: &LedgerRow) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        row.step,
        row.op,
        row.p0,
        row.risky_reserve,
        row.numeraire_reserve,
        row.risky_delta,
        row.numeraire_delta
    )
}

fn norm_exponent(cli: &Cli, fallback: f64) -> Result<f64, CliError> {
    let p = cli.p.unwrap_or(fallback);
    if p != 1.0 && p != 2.0 {
        return Err(CliError::input("--p must be 1 or 2"));
    }
    Ok(p)
}

pub fn simulate(
    cli: &Cli,
    events_path: &PathBuf,
    mechanism_path: &PathBuf,
    p0: Option<f64>,
) -> Result<(), CliError> {
    let mechanism: MechanismDto = parse_json(mechanism_path, &read_file(mechanism_path)?)?;
    let basis = mechanism.to_core()?;
    let domain = basis.domain();
    let mut events: Vec<PoolEvent> = Vec::new();
    for (lineno, line) in read_file(events_path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let dto: EventDto = serde_json::from_str(line).map_err(|e| {
            CliError::input(format!("{}:{}: {e}", events_path.display(), lineno + 1))
        })?;
        events.push(dto.to_core()?);
    }
    let p0 = p0.unwrap_or_else(|| (domain.pmin() * domain.pmax()).sqrt());
    let mut pool = PoolState::new(domain, p0).map_err(CliError::from_core)?;
    // Runtime event failures are property breaches (exit 1), reported with
    // their step index; only unreadable/invalid inputs exit 2.
    let ledger = pool.run_sequence(&events).map_err(|e| match e {
        CoreError::SequenceFailed { index, cause } => {
            CliError::breach(format!("step {}: {cause}", index + 1))
        }
        other => CliError::from_core(other),
    })?;
    let mut out = String::from(ledger_header());
    out.push('\n');
    for row in &ledger {
        out.push_str(&ledger_line(row));
        out.push('\n');
    }
    write_output(cli, &out)
}

pub fn approx(
    cli: &Cli,
    curve_path: &PathBuf,
    mechanism_path: &PathBuf,
    weight_path: &PathBuf,
    grid: usize,
) -> Result<(), CliError> {
    let curve_dto: CurveDto = parse_json(curve_path, &read_file(curve_path)?)?;
    let mechanism_dto: MechanismDto = parse_json(mechanism_path, &read_file(mechanism_path)?)?;
    let weight_dto: WeightDto = parse_json(weight_path, &read_file(weight_path)?)?;
    let f = curve_dto.to_core()?;
    let basis = mechanism_dto.to_core()?;
    let w = weight_dto.to_core()?;
    let p = norm_exponent(cli, 1.0)?;
    let cfg = ApproxConfig { grid_size: grid, ..ApproxConfig::new(p) };
    let fit = best_in_cone(&f, &basis, &w, &cfg).map_err(CliError::from_core)?;
    let bound = constructive_bound(&f, &basis, &w, p)?;
    let report = ApproxReportDto {
        mechanism: mechanism_dto,
        p,
        weight: weight_dto,
        coeffs: fit.coefficients.as_slice().to_vec(),
        distance: fit.distance,
        bound,
        converged: fit.converged,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::input(format!("serializing report: {e}")))?;
    text.push('\n');
    write_output(cli, &text)
}

/// Exact distance of the construction-matched approximant, when the
/// mechanism has one with a guarantee (the all-ones element is required to
/// carry positive floors).
fn constructive_bound(
    f: &demex_core::DemandCurve,
    basis: &Basis,
    w: &WeightFunction,
    p: f64,
) -> Result<Option<f64>, CliError> {
    let coefs = match basis.kind() {
        BasisKind::Lob { ticks, with_ones: true } => {
            Some(midpoint_lob_approximant(f, ticks).map_err(CliError::from_core)?)
        }
        BasisKind::Univ3 { ticks, with_ones: true } => {
            Some(univ3_replicant(f, ticks).map_err(CliError::from_core)?)
        }
        _ => None,
    };
    match coefs {
        Some(coefs) => {
            let g = basis.synthesize(&coefs).map_err(CliError::from_core)?;
            Ok(Some(distance(f, &g, w, p).map_err(CliError::from_core)?))
        }
        None => Ok(None),
    }
}

pub fn tradeoff(cli: &Cli, config_path: &PathBuf) -> Result<(), CliError> {
    let config: TradeoffConfigDto = parse_json(config_path, &read_file(config_path)?)?;
    let w = config.weight.to_core()?;
    let domain = w.domain();
    let bounds = TargetClassBounds::new(config.bounds.fmin, config.bounds.fmax)
        .map_err(CliError::from_core)?;
    let p = norm_exponent(cli, config.p)?;
    let seed = cli.seed.unwrap_or(config.seed);
    if config.epsilons.iter().any(|e| !(0.0 < *e && *e <= 1.0)) {
        return Err(CliError::input("epsilons must lie in (0, 1]"));
    }
    let cfg = ApproxConfig {
        p_exp: p,
        grid_size: config.grid_size,
        solver_tol: config.solver_tol,
        max_iters: config.max_iters,
    };

    struct Row {
        epsilon: f64,
        complexity: usize,
        mechanism: &'static str,
        error_est: f64,
        error_bound: Option<f64>,
    }

    let jobs: Vec<(usize, f64, &'static str)> = config
        .epsilons
        .iter()
        .enumerate()
        .flat_map(|(i, eps)| [(2 * i, *eps, "lob"), (2 * i + 1, *eps, "univ3")])
        .collect();

    let compute = |&(index, epsilon, mechanism): &(usize, f64, &'static str)| -> Result<Row, CliError> {
        let row_seed = seed.wrapping_add(10_007 * index as u64);
        let spread = bounds.spread();
        let (basis, error_bound) = match mechanism {
            "lob" => {
                // Attainability construction: k - 1 equal-measure interior
                // ticks plus the all-ones element, complexity k.
                let k = (1.0 / epsilon.powf(p) - 1e-9).ceil().max(1.0) as usize;
                let ticks = equal_measure_ticks(&w, k).map_err(CliError::from_core)?;
                let basis = Basis::lob_with_ones(domain, &ticks).map_err(CliError::from_core)?;
                let bound = 0.5 * spread / (k as f64).powf(1.0 / p);
                (basis, Some(bound))
            }
            _ => {
                let ticks = geometric_ticks(domain, epsilon, p).map_err(CliError::from_core)?;
                let basis =
                    Basis::univ3(domain, &ticks, config.include_ones).map_err(CliError::from_core)?;
                // The replication bound needs the all-ones element whenever
                // the class floor is positive.
                let bound = if config.include_ones || bounds.fmin() == 0.0 {
                    let max_mass = w.max_interval_mass(&ticks).map_err(CliError::from_core)?;
                    Some(spread * max_mass.powf(1.0 / p))
                } else {
                    None
                };
                (basis, bound)
            }
        };
        let estimate = err_estimate(&basis, &w, bounds, &cfg, row_seed, config.samples)
            .map_err(CliError::from_core)?;
        Ok(Row {
            epsilon,
            complexity: basis.complexity(),
            mechanism,
            error_est: estimate.value,
            error_bound,
        })
    };

    let rows: Result<Vec<Row>, CliError> = match cli.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::input(format!("thread pool: {e}")))?
            .install(|| jobs.par_iter().map(compute).collect()),
        None => jobs.par_iter().map(compute).collect(),
    };

    let mut out = String::from("epsilon,complexity,mechanism,error_est,error_bound\n");
    for row in rows? {
        let bound = row.error_bound.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            row.epsilon, row.complexity, row.mechanism, row.error_est, bound
        )
        .expect("writing to string");
    }
    write_output(cli, &out)
}

pub fn lowerbound(
    cli: &Cli,
    mechanism_path: &PathBuf,
    weight_path: &PathBuf,
    fmin: f64,
    fmax: f64,
    adversaries: Option<usize>,
) -> Result<(), CliError> {
    let mechanism_dto: MechanismDto = parse_json(mechanism_path, &read_file(mechanism_path)?)?;
    let weight_dto: WeightDto = parse_json(weight_path, &read_file(weight_path)?)?;
    let basis = mechanism_dto.to_core()?;
    let w = weight_dto.to_core()?;
    let bounds = TargetClassBounds::new(fmin, fmax).map_err(CliError::from_core)?;
    let p = norm_exponent(cli, 1.0)?;
    let cfg = ApproxConfig::new(p);

    // The default family is one larger than the basis, the smallest size
    // the pigeonhole argument guarantees a hard member for.
    let n = adversaries.unwrap_or(basis.complexity() + 1);
    if n == 0 {
        return Err(CliError::input("--adversaries must be at least 1"));
    }
    let family = adversarial_step_family(&w, n, bounds).map_err(CliError::from_core)?;
    let grid = adversarial_grid(&w, n).map_err(CliError::from_core)?;
    let mut per_adversary = Vec::with_capacity(family.len());
    let mut fits = Vec::with_capacity(family.len());
    for f in &family {
        let fit = best_in_cone(f, &basis, &w, &cfg).map_err(CliError::from_core)?;
        per_adversary.push(fit.distance);
        fits.push(fit);
    }
    let worst_index = per_adversary
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("distances are finite"))
        .map(|(i, _)| i + 1)
        .unwrap_or(1);
    let distance = per_adversary[worst_index - 1];
    let pigeonhole = pigeonhole_interval(&basis, &grid).map_err(CliError::from_core)?;
    // Classify the branch that fired for the cone's best response to the
    // pigeonhole adversary.
    let branch = match pigeonhole {
        Some(l) => {
            let g = basis
                .synthesize(&fits[l - 1].coefficients)
                .map_err(CliError::from_core)?;
            Some(branch_name(
                classify_branch(&g, &grid, bounds, l).map_err(CliError::from_core)?,
            ))
        }
        None => None,
    };
    let report = LowerBoundReportDto {
        mechanism: mechanism_dto,
        p,
        fmin,
        fmax,
        adversaries: n,
        distance,
        worst_index,
        pigeonhole_index: pigeonhole,
        branch,
        absorbed: distance <= 1e-6 * bounds.spread(),
        per_adversary,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::input(format!("serializing report: {e}")))?;
    text.push('\n');
    write_output(cli, &text)
}

pub fn arbitrage(
    cli: &Cli,
    mechanism_path: &PathBuf,
    prices_path: &PathBuf,
    p0: Option<f64>,
    coeffs: Option<&str>,
) -> Result<(), CliError> {
    let mechanism_dto: MechanismDto = parse_json(mechanism_path, &read_file(mechanism_path)?)?;
    let basis = mechanism_dto.to_core()?;
    let domain = basis.domain();
    let mut prices = Vec::new();
    for (lineno, line) in read_file(prices_path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p: f64 = line.parse().map_err(|e| {
            CliError::input(format!("{}:{}: {e}", prices_path.display(), lineno + 1))
        })?;
        prices.push(p);
    }
    let coefficients = match coeffs {
        Some(list) => {
            let values: Result<Vec<f64>, _> =
                list.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let values =
                values.map_err(|e| CliError::input(format!("--coeffs: {e}")))?;
            ConeCoefficients::new(values).map_err(CliError::from_core)?
        }
        None => ConeCoefficients::new(vec![1.0; basis.complexity()])
            .map_err(CliError::from_core)?,
    };
    let seed_curve = basis.synthesize(&coefficients).map_err(CliError::from_core)?;
    let p0 = p0.unwrap_or_else(|| (domain.pmin() * domain.pmax()).sqrt());
    let mut pool = PoolState::new(domain, p0).map_err(CliError::from_core)?;
    pool.mint("seed", seed_curve).map_err(CliError::from_core)?;

    let mut out = String::from(
        "step,op,p0,risky_reserve,numeraire_reserve,risky_delta,numeraire_delta,\
         external_p,profit,cum_profit\n",
    );
    let (risky0, numeraire0) = pool.reserves();
    writeln!(out, "0,init,{},{},{},0,0,,,", pool.p0(), risky0, numeraire0)
        .expect("writing to string");
    let mut cumulative = 0.0;
    for (step, &external) in prices.iter().enumerate() {
        let response = pool.arbitrage_best_response(external).map_err(CliError::from_core)?;
        let receipt = pool.trade_to_price(response.p1).map_err(CliError::from_core)?;
        cumulative += response.profit;
        let (risky, numeraire) = pool.reserves();
        writeln!(
            out,
            "{},arb,{},{},{},{},{},{},{},{}",
            step + 1,
            pool.p0(),
            risky,
            numeraire,
            -receipt.risky_to_trader,
            receipt.numeraire_from_trader,
            external,
            response.profit,
            cumulative
        )
        .expect("writing to string");
        if !pool.is_solvent() {
            return Err(CliError::breach(format!("solvency breach at step {}", step + 1)));
        }
    }
    write_output(cli, &out)
}
