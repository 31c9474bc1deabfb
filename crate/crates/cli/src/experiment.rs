use std::time::Instant;

use rayon::prelude::*;

use pricemech_core::market::expected_welfare;
use pricemech_core::pricing::{benchmark_welfare, compute_prices};
use pricemech_core::{Exact, PricingMode, Prior, Scalar};

use crate::report::{OutcomeRow, Report};
use crate::scenario::{Arithmetic, Scenario};
use crate::Result;

/// Prices the scenario and evaluates every listed arrival policy.
///
/// Sampled pricing runs on the prior rescaled to `v(M) <= 1` and the
/// resulting prices are scaled back, so the report is always in the
/// scenario's own units.
pub fn run_experiment(scenario: &Scenario) -> Result<Report> {
    scenario.validate()?;
    match scenario.arithmetic {
        Arithmetic::Exact => run_typed(scenario, scenario.prior.clone()),
        Arithmetic::Float => run_typed(scenario, scenario.prior.convert::<f64>()?),
    }
}

/// Runs independent scenarios on the rayon pool. Results come back in
/// input order, so output assembled from them is deterministic.
pub fn run_batch(scenarios: &[Scenario]) -> Vec<Result<Report>> {
    scenarios.par_iter().map(run_experiment).collect()
}

fn run_typed<S: Scalar>(scenario: &Scenario, prior: Prior<S>) -> Result<Report> {
    let start = Instant::now();
    let cfg = scenario.pricing_config();
    let alg = scenario.algorithm;
    let (normalized, scale) = prior.normalized();
    let (prices, samples) = match cfg.mode {
        PricingMode::Exact => {
            let out = compute_prices(&prior, alg, &cfg)?;
            (out.prices, out.samples)
        }
        PricingMode::Sampled { .. } => {
            let out = compute_prices(&normalized, alg, &cfg)?;
            (out.prices.scaled(&scale), out.samples)
        }
    };
    let opt = benchmark_welfare(&prior, alg)?;
    let mut rows = Vec::with_capacity(scenario.policies.len());
    for policy in &scenario.policies {
        let est = expected_welfare(
            &prior,
            &prices,
            policy,
            scenario.eval_mode(),
            scenario.tie_break,
        )?;
        let ratio = if opt.is_zero() {
            S::one()
        } else {
            est.welfare.clone() / opt.clone()
        };
        rows.push(OutcomeRow {
            policy: policy.name().to_owned(),
            order: est.order.clone(),
            welfare: exact_of(&est.welfare),
            revenue: exact_of(&est.revenue),
            utility_total: exact_of(&est.utility_total),
            opt_welfare: exact_of(&opt),
            ratio: exact_of(&ratio),
            std_error: est.std_error,
        });
    }
    Ok(Report {
        scenario: scenario.name.clone(),
        buyers: prior.num_buyers(),
        items: prior.items(),
        algorithm: alg.name(),
        family: match cfg.family {
            pricemech_core::PriceFamily::Xos => "xos".to_owned(),
            pricemech_core::PriceFamily::Mph { k } => format!("mph(k={k})"),
        },
        arithmetic: scenario.arithmetic,
        seed: scenario.seed,
        samples,
        scale: exact_of(&scale),
        prices: prices.iter().map(exact_of).collect(),
        rows,
        elapsed: start.elapsed(),
    })
}

fn exact_of<S: Scalar>(x: &S) -> Exact {
    x.to_exact()
}
