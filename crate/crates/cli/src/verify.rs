//! Invariant suite run by `pricemech verify`.

use std::fmt::Write as _;

use pricemech_core::market::{
    adaptive_adversary_welfare, all_orders, expected_welfare, misreport_gain,
    per_profile_worst_welfare, simulate, MAX_ADAPTIVE_ATOMS, MAX_ADAPTIVE_BUYERS,
};
use pricemech_core::pricing::{benchmark_welfare, compute_prices};
use pricemech_core::{
    ArrivalPolicy, EvalMode, PriceFamily, PriceVector, PricingMode, Prior, Scalar, TieBreak,
};

use crate::scenario::{Arithmetic, Scenario};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub scenario: String,
    pub checks: Vec<Check>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verify {}", self.scenario);
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skipped => "SKIP",
            };
            let _ = writeln!(s, "{tag} {:<22} {}", c.name, c.detail);
        }
        s
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: &'static str, failure: Option<String>, ok: impl Into<String>) {
        let (status, detail) = match failure {
            Some(f) => (Status::Fail, f),
            None => (Status::Pass, ok.into()),
        };
        self.checks.push(Check {
            name,
            status,
            detail,
        });
    }

    fn skip(&mut self, name: &'static str, why: impl Into<String>) {
        self.checks.push(Check {
            name,
            status: Status::Skipped,
            detail: why.into(),
        });
    }
}

/// Runs every applicable check with exact expectations over the support.
pub fn verify(scenario: &Scenario) -> Result<Verification> {
    scenario.validate()?;
    let checks = match scenario.arithmetic {
        Arithmetic::Exact => run(scenario, &scenario.prior)?,
        Arithmetic::Float => run(scenario, &scenario.prior.convert::<f64>()?)?,
    };
    Ok(Verification {
        scenario: scenario.name.clone(),
        checks,
    })
}

fn show<S: Scalar>(x: &S) -> String {
    let text = x.to_string();
    if text.len() <= 12 {
        text
    } else {
        format!("{:.9}", x.to_f64())
    }
}

fn leq<S: Scalar>(a: &S, b: &S) -> bool {
    if S::EXACT {
        a <= b
    } else {
        a.to_f64() <= b.to_f64() + 1e-9
    }
}

fn run<S: Scalar>(scenario: &Scenario, prior: &Prior<S>) -> Result<Vec<Check>> {
    let mut suite = Suite { checks: Vec::new() };
    let cfg = scenario.pricing_config();
    let alg = scenario.algorithm;
    let tie = scenario.tie_break;
    let prices: PriceVector<S> = match cfg.mode {
        PricingMode::Exact => compute_prices(prior, alg, &cfg)?.prices,
        PricingMode::Sampled { .. } => {
            let (normalized, scale) = prior.normalized();
            compute_prices(&normalized, alg, &cfg)?
                .prices
                .scaled(&scale)
        }
    };
    let opt = benchmark_welfare(prior, alg)?;
    let orders = all_orders(prior.num_buyers())?;
    let support: Vec<_> = prior
        .support_iter(pricemech_core::bayes::DEFAULT_SUPPORT_CAP)?
        .collect();

    let mut failure = None;
    'outer: for draw in &support {
        for order in &orders {
            let outcome = simulate(&draw.profile, &prices, order, tie)?;
            if let Some(what) = outcome.find_inconsistency(&draw.profile, &prices) {
                failure = Some(format!("{what} at atoms {:?}, order {order:?}", draw.atoms));
                break 'outer;
            }
        }
    }
    suite.record(
        "outcome-consistency",
        failure,
        format!("{} profiles x {} orders", support.len(), orders.len()),
    );

    let exact_pricing = matches!(cfg.mode, PricingMode::Exact);
    if exact_pricing && cfg.family == PriceFamily::Xos {
        let half = opt.clone() * S::from_ratio(1, 2);
        let total = prices.total();
        let ok = if S::EXACT {
            total == half
        } else {
            (total.to_f64() - half.to_f64()).abs() <= 1e-9
        };
        suite.record(
            "price-sum",
            (!ok).then(|| {
                format!(
                    "sum of prices {} differs from E[SW]/2 = {}",
                    show(&total),
                    show(&half)
                )
            }),
            format!("sum of prices = E[SW]/2 = {}", show(&half)),
        );
    } else {
        suite.skip("price-sum", "only defined for exact XOS prices");
    }

    let bound = match (cfg.family, exact_pricing) {
        (PriceFamily::Xos, true) => Some((S::from_ratio(1, 2), "1/2".to_owned())),
        (PriceFamily::Mph { k }, true) if cfg.alpha == 2.0 => {
            Some((S::from_ratio(1, 4 * k as i64), format!("1/{}", 4 * k)))
        }
        _ => None,
    };
    match bound {
        Some((factor, label)) => {
            let target = factor * opt.clone();
            let mut policies = scenario.policies.clone();
            if !policies.contains(&ArrivalPolicy::WorstCaseStatic) {
                policies.push(ArrivalPolicy::WorstCaseStatic);
            }
            let mut failure = None;
            let mut weakest: Option<S> = None;
            for policy in &policies {
                let w = expected_welfare(prior, &prices, policy, EvalMode::Exact, tie)?.welfare;
                if !leq(&target, &w) {
                    failure = Some(format!(
                        "{} welfare {} below {label} E[SW] = {}",
                        policy.name(),
                        show(&w),
                        show(&target)
                    ));
                    break;
                }
                if weakest.as_ref().is_none_or(|x| w < *x) {
                    weakest = Some(w);
                }
            }
            suite.record(
                "welfare-guarantee",
                failure,
                format!(
                    "min welfare {} >= {label} E[SW] = {}",
                    show(&weakest.expect("at least one policy")),
                    show(&target)
                ),
            );
        }
        None => suite.skip(
            "welfare-guarantee",
            "needs exact prices (and alpha = 2 for MPH)",
        ),
    }

    let adaptive_fits = prior.num_buyers() <= MAX_ADAPTIVE_BUYERS
        && prior.buyers().iter().all(|b| b.len() <= MAX_ADAPTIVE_ATOMS);
    if adaptive_fits {
        let adaptive = adaptive_adversary_welfare(prior, &prices)?;
        // the adaptive game breaks ties canonically, so compare like with like
        let clairvoyant = per_profile_worst_welfare(prior, &prices, TieBreak::Canonical)?;
        let static_canonical = expected_welfare(
            prior,
            &prices,
            &ArrivalPolicy::WorstCaseStatic,
            EvalMode::Exact,
            TieBreak::Canonical,
        )?
        .welfare;
        let failure = if !leq(&adaptive, &static_canonical) {
            Some(format!(
                "adaptive {} above worst static {}",
                show(&adaptive),
                show(&static_canonical)
            ))
        } else if !leq(&clairvoyant, &adaptive) {
            Some(format!(
                "per-profile worst {} above adaptive {}",
                show(&clairvoyant),
                show(&adaptive)
            ))
        } else {
            None
        };
        suite.record(
            "adversary-ordering",
            failure,
            format!(
                "per-profile {} <= adaptive {} <= static {}",
                show(&clairvoyant),
                show(&adaptive),
                show(&static_canonical)
            ),
        );
    } else {
        suite.skip(
            "adversary-ordering",
            "too many buyers or atoms for the adaptive game",
        );
    }

    let mut failure = None;
    let mut trials = 0u64;
    'dsic: for draw in &support {
        for order in &orders {
            for (i, buyer) in prior.buyers().iter().enumerate() {
                for (a, (report, _)) in buyer.atoms().iter().enumerate() {
                    if a == draw.atoms[i] {
                        continue;
                    }
                    trials += 1;
                    let gain = misreport_gain(&draw.profile, &prices, order, i, report)?;
                    if !leq(&gain, &S::zero()) {
                        failure = Some(format!(
                            "buyer {i} gains {} reporting atom {a} at atoms {:?}, order {order:?}",
                            show(&gain),
                            draw.atoms
                        ));
                        break 'dsic;
                    }
                }
            }
        }
    }
    suite.record(
        "truthfulness",
        failure,
        format!("{trials} misreports, none profitable"),
    );

    Ok(suite.checks)
}
