//! Built-in instances.
//!
//! - `prophet-hard`: one item, `n` i.i.d. buyers worth `X` with probability
//!   `q` and 1 otherwise, where `q` makes `P(max = X) = 1/X`. No single
//!   price earns much more than half of `E[max] = 2 - 1/X`.
//! - `prophet-halfprice`: one item, `n` i.i.d. buyers with a user-given
//!   value distribution, priced at half the expected maximum.
//! - `mph-lower-bound`: a unit-demand buyer and a buyer who only wants all
//!   `m` items at `m - 1`. Every anonymous price vector gets welfare at most
//!   1 when the unit-demand buyer comes first.
//! - `xos-running-example`: two items, an XOS buyer `max(x0, x1)` and an
//!   additive buyer worth 1/2 per item.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use pricemech_core::{ArrivalPolicy, Exact, ItemSet, PriceFamily, Prior, Scalar, Valuation};

use crate::scenario::{parse_exact, PricingSpec, Scenario, ScenarioError};

pub const NAMES: [&str; 4] = [
    "prophet-hard",
    "prophet-halfprice",
    "mph-lower-bound",
    "xos-running-example",
];

fn q(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

fn built(r: pricemech_core::Result<Prior<Exact>>) -> Prior<Exact> {
    r.expect("built-in instances are well formed")
}

/// Probability that one buyer is high so that `P(max = X) = 1/X` over `n`
/// buyers. Exact for `n = 1`; otherwise the dyadic nearest to
/// `1 - (1 - 1/X)^(1/n)`.
pub fn prophet_high_probability(x: u64, n: usize) -> Exact {
    if n == 1 {
        return q(1, x as i64);
    }
    let low = (1.0 - 1.0 / x as f64).powf(1.0 / n as f64);
    Exact::from_f64(1.0 - low).expect("finite probability")
}

pub fn prophet_hard(x: u64, n: usize) -> Scenario {
    assert!(x >= 2 && n >= 1, "prophet-hard needs X >= 2 and n >= 1");
    let high = prophet_high_probability(x, n);
    let value = Exact::from_integer((x as i64).into());
    prophet_halfprice(
        &[value, Exact::one()],
        &[high.clone(), Exact::one() - high],
        n,
    )
    .renamed(format!("prophet-hard-x{x}-n{n}"))
}

/// One item and `n` i.i.d. buyers. XOS prices on a single item are exactly
/// half the expected maximum value.
pub fn prophet_halfprice(values: &[Exact], probs: &[Exact], n: usize) -> Scenario {
    let atoms: Vec<_> = values
        .iter()
        .zip(probs)
        .map(|(v, p)| {
            (
                Valuation::additive(vec![v.clone()]).expect("one item"),
                p.clone(),
            )
        })
        .collect();
    let prior = built(Prior::from_atoms(vec![atoms; n]));
    Scenario::new(format!("prophet-halfprice-n{n}"), prior)
}

pub fn mph_lower_bound(m: usize) -> Scenario {
    assert!(m >= 2, "mph-lower-bound needs m >= 2");
    let unit = Valuation::unit_demand(vec![Exact::one(); m]).expect("unit demand");
    let bundle = Valuation::single_minded(
        m,
        ItemSet::full(m),
        Exact::from_integer((m as i64 - 1).into()),
    )
    .expect("single minded");
    let prior = built(Prior::deterministic(vec![unit, bundle]));
    let mut s = Scenario::new(format!("mph-lower-bound-m{m}"), prior);
    s.pricing = PricingSpec {
        family: PriceFamily::Mph { k: m },
        ..PricingSpec::default()
    };
    s.policies = vec![
        ArrivalPolicy::Fixed(vec![0, 1]),
        ArrivalPolicy::Fixed(vec![1, 0]),
        ArrivalPolicy::WorstCaseStatic,
    ];
    s
}

pub fn xos_running_example() -> Scenario {
    let xos = Valuation::xos(
        2,
        vec![vec![q(1, 1), Exact::zero()], vec![Exact::zero(), q(1, 1)]],
    )
    .expect("xos");
    let additive = Valuation::additive(vec![q(1, 2), q(1, 2)]).expect("additive");
    let prior = built(Prior::deterministic(vec![xos, additive]));
    let mut s = Scenario::new("xos-running-example", prior);
    s.policies = vec![
        ArrivalPolicy::Fixed(vec![0, 1]),
        ArrivalPolicy::Fixed(vec![1, 0]),
        ArrivalPolicy::WorstCaseStatic,
    ];
    s
}

impl Scenario {
    fn renamed(mut self, name: String) -> Self {
        self.name = name;
        self
    }
}

fn param<T: std::str::FromStr>(
    params: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, ScenarioError> {
    match params.get(key) {
        None => Ok(default),
        Some(text) => text.parse().map_err(|_| {
            ScenarioError::Schema(format!("parameter {key}: cannot parse \"{text}\""))
        }),
    }
}

fn exact_list(params: &BTreeMap<String, String>, key: &str) -> Result<Vec<Exact>, ScenarioError> {
    let text = params
        .get(key)
        .ok_or_else(|| ScenarioError::Schema(format!("missing parameter {key}")))?;
    text.split(',')
        .map(|t| {
            parse_exact(t).ok_or_else(|| {
                ScenarioError::Schema(format!("parameter {key}: \"{t}\" is not a number"))
            })
        })
        .collect()
}

/// Builds a named instance from `key=value` parameters.
pub fn build(name: &str, params: &BTreeMap<String, String>) -> Result<Scenario, ScenarioError> {
    let known: &[&str] = match name {
        "prophet-hard" => &["x", "n"],
        "prophet-halfprice" => &["values", "probs", "n"],
        "mph-lower-bound" => &["m"],
        "xos-running-example" => &[],
        _ => {
            return Err(ScenarioError::Unsupported {
                what: "builtin",
                name: name.to_owned(),
            })
        }
    };
    if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(ScenarioError::Schema(format!(
            "{name} takes no parameter {k}"
        )));
    }
    let scenario = match name {
        "prophet-hard" => {
            let x: u64 = param(params, "x", 4)?;
            let n: usize = param(params, "n", 4)?;
            if x < 2 || n == 0 {
                return Err(ScenarioError::Invariant {
                    locus: "parameters".into(),
                    message: "prophet-hard needs x >= 2 and n >= 1".into(),
                });
            }
            prophet_hard(x, n)
        }
        "prophet-halfprice" => {
            let values = exact_list(params, "values")?;
            let probs = exact_list(params, "probs")?;
            let n: usize = param(params, "n", 2)?;
            if values.len() != probs.len() || values.is_empty() || n == 0 {
                return Err(ScenarioError::Invariant {
                    locus: "parameters".into(),
                    message: "values and probs must be non-empty lists of equal length, n >= 1"
                        .into(),
                });
            }
            let atoms: Vec<_> = values
                .iter()
                .zip(&probs)
                .map(|(v, p)| Valuation::additive(vec![v.clone()]).map(|v| (v, p.clone())))
                .collect::<Result<_, _>>()
                .map_err(|e| ScenarioError::Invariant {
                    locus: "parameters".into(),
                    message: e.to_string(),
                })?;
            Prior::from_atoms(vec![atoms; n]).map_err(|e| ScenarioError::Invariant {
                locus: "parameters".into(),
                message: e.to_string(),
            })?;
            prophet_halfprice(&values, &probs, n)
        }
        "mph-lower-bound" => {
            let m: usize = param(params, "m", 4)?;
            if !(2..=20).contains(&m) {
                return Err(ScenarioError::Invariant {
                    locus: "parameters".into(),
                    message: "mph-lower-bound needs 2 <= m <= 20".into(),
                });
            }
            mph_lower_bound(m)
        }
        _ => xos_running_example(),
    };
    scenario.validate()?;
    Ok(scenario)
}
