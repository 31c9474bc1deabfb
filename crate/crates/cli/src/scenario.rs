//! Scenario documents.
//!
//! A scenario is a JSON document describing the prior, the welfare
//! algorithm, the pricing rule, the arrival policies to evaluate and the
//! replication settings:
//!
//! ```json
//! {
//!   "name": "example",
//!   "items": 2,
//!   "buyers": [
//!     [{"prob": "1", "valuation": {"type": "xos", "clauses": [["1", "0"], ["0", "1"]]}}],
//!     [{"prob": 1, "valuation": {"type": "additive", "weights": [0.5, 0.5]}}]
//!   ],
//!   "algorithm": "exact",
//!   "pricing": {"family": "xos", "mode": "exact"},
//!   "policies": [{"type": "fixed", "order": [1, 0]}, {"type": "worst_case_static"}],
//!   "evaluation": {"mode": "exact"},
//!   "tie_break": "canonical",
//!   "seed": 0,
//!   "arithmetic": "exact"
//! }
//! ```
//!
//! Numbers may be JSON numbers or strings holding an integer, a decimal or a
//! fraction such as `"1/3"`. They are read exactly from their text, so
//! `0.1` means one tenth even in exact arithmetic.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use pricemech_core::bayes::Prior;
use pricemech_core::items::MAX_ITEMS;
use pricemech_core::pricing::{PriceFamily, PricingConfig, PricingMode};
use pricemech_core::valuation::ValuationKind;
use pricemech_core::{
    ArrivalPolicy, EvalMode, Exact, Hypergraph, ItemSet, TieBreak, Valuation, WelfareAlgorithm,
};

/// Markets up to this size get their valuations checked by full
/// enumeration at load time.
pub const EAGER_CHECK_ITEMS: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("invalid scenario at {locus}: {message}")]
    Invariant { locus: String, message: String },
    #[error("unsupported {what} \"{name}\"")]
    Unsupported { what: &'static str, name: String },
}

fn invariant(locus: impl Into<String>, message: impl fmt::Display) -> ScenarioError {
    ScenarioError::Invariant {
        locus: locus.into(),
        message: message.to_string(),
    }
}

/// An exact number that reads from JSON numbers or strings.
#[derive(Clone, Debug, PartialEq)]
pub struct Num(pub Exact);

impl FromStr for Num {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        parse_exact(text)
            .map(Num)
            .ok_or_else(|| format!("\"{text}\" is not a number"))
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Parses `"3"`, `"-1/4"`, `"0.125"` or `"2.5e-3"` into an exact rational.
pub fn parse_exact(text: &str) -> Option<Exact> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], i32::from_str(&text[i + 1..]).ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).ok()?);
    let shift = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= Pow::pow(&ten, shift as u32);
    } else {
        value /= Pow::pow(&ten, shift.unsigned_abs());
    }
    Some(if negative { -value } else { value })
}

impl Serialize for Num {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Number(serde_json::Number),
        }
        let text = match Repr::deserialize(d)? {
            Repr::Text(t) => t,
            Repr::Number(n) => n.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub items: usize,
    pub buyers: Vec<Vec<AtomDoc>>,
    #[serde(default)]
    pub algorithm: AlgorithmDoc,
    #[serde(default)]
    pub pricing: PricingDoc,
    #[serde(default)]
    pub policies: Vec<PolicyDoc>,
    #[serde(default)]
    pub evaluation: EvaluationDoc,
    #[serde(default)]
    pub tie_break: TieBreakDoc,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub arithmetic: Arithmetic,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub prob: Num,
    pub valuation: Value,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmDoc {
    #[default]
    Exact,
    Greedy,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyDoc {
    #[default]
    Xos,
    Mph,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PricingModeDoc {
    #[default]
    Exact,
    Sampled,
}

fn default_alpha() -> f64 {
    2.0
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PricingDoc {
    #[serde(default)]
    pub family: FamilyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub mode: PricingModeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub per_item: bool,
}

impl Default for PricingDoc {
    fn default() -> Self {
        PricingDoc {
            family: FamilyDoc::Xos,
            k: None,
            mode: PricingModeDoc::Exact,
            epsilon: None,
            alpha: default_alpha(),
            per_item: false,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyDoc {
    Fixed {
        order: Vec<usize>,
    },
    UniformRandom {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    WorstCaseStatic,
    AdaptiveAdversary,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationModeDoc {
    #[default]
    Exact,
    Mc,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EvaluationDoc {
    #[serde(default)]
    pub mode: EvaluationModeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TieBreakDoc {
    #[default]
    Canonical,
    Adversarial,
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    #[default]
    Exact,
    Float,
}

impl Arithmetic {
    pub fn name(self) -> &'static str {
        match self {
            Arithmetic::Exact => "exact",
            Arithmetic::Float => "float",
        }
    }
}

/// Pricing rule as written in a scenario; the random seed comes from the
/// scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PricingSpec {
    pub family: PriceFamily,
    /// `Some` selects sampled pricing at this accuracy.
    pub epsilon: Option<f64>,
    pub per_item: bool,
    pub alpha: f64,
}

impl Default for PricingSpec {
    fn default() -> Self {
        PricingSpec {
            family: PriceFamily::Xos,
            epsilon: None,
            per_item: false,
            alpha: 2.0,
        }
    }
}

/// Default number of Monte-Carlo profiles per policy.
pub const DEFAULT_MC_SAMPLES: u64 = 10_000;

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub prior: Prior<Exact>,
    pub algorithm: WelfareAlgorithm,
    pub pricing: PricingSpec,
    pub policies: Vec<ArrivalPolicy>,
    /// `None` for exact evaluation, otherwise the Monte-Carlo sample count.
    pub mc_samples: Option<u64>,
    pub tie_break: TieBreak,
    pub seed: u64,
    pub arithmetic: Arithmetic,
}

impl Scenario {
    /// A scenario with default settings around `prior`.
    pub fn new(name: impl Into<String>, prior: Prior<Exact>) -> Self {
        let n = prior.num_buyers();
        Scenario {
            name: name.into(),
            prior,
            algorithm: WelfareAlgorithm::ExactBruteForce,
            pricing: PricingSpec::default(),
            policies: vec![ArrivalPolicy::Fixed((0..n).collect())],
            mc_samples: None,
            tie_break: TieBreak::Canonical,
            seed: 0,
            arithmetic: Arithmetic::Exact,
        }
    }

    pub fn pricing_config(&self) -> PricingConfig {
        PricingConfig {
            family: self.pricing.family,
            mode: match self.pricing.epsilon {
                None => PricingMode::Exact,
                Some(epsilon) => PricingMode::Sampled {
                    epsilon,
                    seed: self.seed,
                    per_item: self.pricing.per_item,
                },
            },
            alpha: self.pricing.alpha,
        }
    }

    pub fn eval_mode(&self) -> EvalMode {
        match self.mc_samples {
            None => EvalMode::Exact,
            Some(samples) => EvalMode::MonteCarlo {
                samples,
                seed: self.seed ^ 1,
            },
        }
    }

    /// Checks cross-field consistency: pricing family against valuation
    /// classes, policies against the buyer count, positive epsilon.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let n = self.prior.num_buyers();
        self.pricing_config()
            .validate()
            .map_err(|e| invariant("pricing", e))?;
        for (i, b) in self.prior.buyers().iter().enumerate() {
            for (a, (v, _)) in b.atoms().iter().enumerate() {
                let locus = format!("buyer {i} atom {a}");
                match self.pricing.family {
                    PriceFamily::Xos if !v.is_xos() => {
                        return Err(invariant(
                            locus,
                            format!(
                                "XOS pricing needs XOS valuations but this one is {}",
                                v.variant_name()
                            ),
                        ))
                    }
                    PriceFamily::Mph { k } if v.hypergraph_rank() > k => {
                        return Err(invariant(
                            locus,
                            format!(
                                "valuation has hypergraph rank {} above the declared k = {k}",
                                v.hypergraph_rank()
                            ),
                        ))
                    }
                    _ => {}
                }
                if v.items() <= EAGER_CHECK_ITEMS {
                    if let Some((set, item)) = v.find_monotonicity_violation() {
                        return Err(invariant(
                            format!("{locus} item {item}"),
                            format!("adding item {item} to {set} lowers the value"),
                        ));
                    }
                }
            }
        }
        for (p, policy) in self.policies.iter().enumerate() {
            if let ArrivalPolicy::Fixed(order) = policy {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != (0..n).collect::<Vec<_>>() {
                    return Err(invariant(
                        format!("policy {p}"),
                        format!("order {order:?} is not a permutation of 0..{n}"),
                    ));
                }
            }
        }
        if self.mc_samples == Some(0) {
            return Err(invariant(
                "evaluation",
                "Monte-Carlo sample count must be positive",
            ));
        }
        Ok(())
    }

    pub fn to_document(&self) -> ScenarioDoc {
        let buyers = self
            .prior
            .buyers()
            .iter()
            .map(|b| {
                b.atoms()
                    .iter()
                    .map(|(v, p)| AtomDoc {
                        prob: Num(p.clone()),
                        valuation: valuation_to_json(v),
                    })
                    .collect()
            })
            .collect();
        let (family, k) = match self.pricing.family {
            PriceFamily::Xos => (FamilyDoc::Xos, None),
            PriceFamily::Mph { k } => (FamilyDoc::Mph, Some(k)),
        };
        ScenarioDoc {
            name: Some(self.name.clone()),
            items: self.prior.items(),
            buyers,
            algorithm: match self.algorithm {
                WelfareAlgorithm::ExactBruteForce => AlgorithmDoc::Exact,
                WelfareAlgorithm::GreedyMarginal => AlgorithmDoc::Greedy,
            },
            pricing: PricingDoc {
                family,
                k,
                mode: if self.pricing.epsilon.is_some() {
                    PricingModeDoc::Sampled
                } else {
                    PricingModeDoc::Exact
                },
                epsilon: self.pricing.epsilon,
                alpha: self.pricing.alpha,
                per_item: self.pricing.per_item,
            },
            policies: self
                .policies
                .iter()
                .map(|p| match p {
                    ArrivalPolicy::Fixed(order) => PolicyDoc::Fixed {
                        order: order.clone(),
                    },
                    ArrivalPolicy::UniformRandom { seed } => {
                        PolicyDoc::UniformRandom { seed: Some(*seed) }
                    }
                    ArrivalPolicy::WorstCaseStatic => PolicyDoc::WorstCaseStatic,
                    ArrivalPolicy::AdaptiveAdversary => PolicyDoc::AdaptiveAdversary,
                })
                .collect(),
            evaluation: EvaluationDoc {
                mode: if self.mc_samples.is_some() {
                    EvaluationModeDoc::Mc
                } else {
                    EvaluationModeDoc::Exact
                },
                samples: self.mc_samples,
            },
            tie_break: match self.tie_break {
                TieBreak::Canonical => TieBreakDoc::Canonical,
                TieBreak::Adversarial => TieBreakDoc::Adversarial,
            },
            seed: self.seed,
            arithmetic: self.arithmetic,
        }
    }

    /// Pretty-printed JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scenario documents serialize")
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc =
        serde_json::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    from_document(doc)
}

pub fn from_document(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
    let m = doc.items;
    if m == 0 || m > MAX_ITEMS {
        return Err(invariant(
            "items",
            format!("must be between 1 and {MAX_ITEMS}, got {m}"),
        ));
    }
    if doc.buyers.is_empty() {
        return Err(invariant("buyers", "at least one buyer is required"));
    }
    let mut atoms = Vec::with_capacity(doc.buyers.len());
    for (i, buyer) in doc.buyers.iter().enumerate() {
        if buyer.is_empty() {
            return Err(invariant(format!("buyer {i}"), "no atoms"));
        }
        let mut list = Vec::with_capacity(buyer.len());
        for (a, atom) in buyer.iter().enumerate() {
            let locus = format!("buyer {i} atom {a}");
            let v = valuation_from_json(&atom.valuation, m, &locus)?;
            list.push((v, atom.prob.0.clone()));
        }
        atoms.push(list);
    }
    let prior = Prior::from_atoms(atoms).map_err(|e| match e {
        pricemech_core::Error::InvalidPrior { buyer, reason } => {
            invariant(format!("buyer {buyer}"), reason)
        }
        other => invariant("buyers", other),
    })?;

    let family = match (doc.pricing.family, doc.pricing.k) {
        (FamilyDoc::Xos, None | Some(1)) => PriceFamily::Xos,
        (FamilyDoc::Xos, Some(k)) => {
            return Err(invariant(
                "pricing.k",
                format!("k = {k} is only meaningful for MPH pricing"),
            ))
        }
        (FamilyDoc::Mph, Some(k)) => PriceFamily::Mph { k },
        (FamilyDoc::Mph, None) => {
            // smallest rank that covers every valuation
            let k = prior
                .buyers()
                .iter()
                .flat_map(|b| b.atoms())
                .map(|(v, _)| v.hypergraph_rank())
                .max()
                .unwrap_or(1);
            PriceFamily::Mph { k }
        }
    };
    let epsilon = match (doc.pricing.mode, doc.pricing.epsilon) {
        (PricingModeDoc::Exact, None) => None,
        (PricingModeDoc::Exact, Some(_)) => {
            return Err(invariant(
                "pricing.epsilon",
                "epsilon is only used in sampled mode",
            ))
        }
        (PricingModeDoc::Sampled, Some(e)) => Some(e),
        (PricingModeDoc::Sampled, None) => {
            return Err(invariant(
                "pricing.epsilon",
                "sampled pricing needs epsilon",
            ))
        }
    };
    let n = prior.num_buyers();
    let policies = if doc.policies.is_empty() {
        vec![ArrivalPolicy::Fixed((0..n).collect())]
    } else {
        doc.policies
            .iter()
            .map(|p| match p {
                PolicyDoc::Fixed { order } => ArrivalPolicy::Fixed(order.clone()),
                PolicyDoc::UniformRandom { seed } => ArrivalPolicy::UniformRandom {
                    seed: seed.unwrap_or(doc.seed),
                },
                PolicyDoc::WorstCaseStatic => ArrivalPolicy::WorstCaseStatic,
                PolicyDoc::AdaptiveAdversary => ArrivalPolicy::AdaptiveAdversary,
            })
            .collect()
    };
    let mc_samples = match doc.evaluation.mode {
        EvaluationModeDoc::Exact => None,
        EvaluationModeDoc::Mc => Some(doc.evaluation.samples.unwrap_or(DEFAULT_MC_SAMPLES)),
    };
    let scenario = Scenario {
        name: doc.name.unwrap_or_else(|| "scenario".to_owned()),
        prior,
        algorithm: match doc.algorithm {
            AlgorithmDoc::Exact => WelfareAlgorithm::ExactBruteForce,
            AlgorithmDoc::Greedy => WelfareAlgorithm::GreedyMarginal,
        },
        pricing: PricingSpec {
            family,
            epsilon,
            per_item: doc.pricing.per_item,
            alpha: doc.pricing.alpha,
        },
        policies,
        mc_samples,
        tie_break: match doc.tie_break {
            TieBreakDoc::Canonical => TieBreak::Canonical,
            TieBreakDoc::Adversarial => TieBreak::Adversarial,
        },
        seed: doc.seed,
        arithmetic: doc.arithmetic,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdditiveDoc {
    weights: Vec<Num>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitDemandDoc {
    values: Vec<Num>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SingleMindedDoc {
    target: Vec<usize>,
    value: Num,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverageDoc {
    universe: Vec<Num>,
    covers: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct XosDoc {
    clauses: Vec<Vec<Num>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    edge: Vec<usize>,
    weight: Num,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MphDoc {
    rank: usize,
    candidates: Vec<Vec<EdgeDoc>>,
}

const VALUATION_TYPES: [&str; 6] = [
    "additive",
    "unit_demand",
    "single_minded",
    "coverage",
    "xos",
    "mph",
];

fn nums(v: Vec<Num>) -> Vec<Exact> {
    v.into_iter().map(|n| n.0).collect()
}

fn item_set(items: &[usize], m: usize, locus: &str) -> Result<ItemSet, ScenarioError> {
    ItemSet::from_items(items.iter().copied(), m).map_err(|e| match e {
        pricemech_core::Error::ItemOutOfRange { item, .. } => {
            invariant(format!("{locus} item {item}"), e)
        }
        other => invariant(locus, other),
    })
}

fn valuation_from_json(
    value: &Value,
    m: usize,
    locus: &str,
) -> Result<Valuation<Exact>, ScenarioError> {
    let schema = |msg: String| ScenarioError::Schema(format!("{locus}: {msg}"));
    let Some(obj) = value.as_object() else {
        return Err(schema("valuation must be an object".into()));
    };
    let Some(kind) = obj.get("type").and_then(Value::as_str) else {
        return Err(schema("valuation needs a string \"type\" field".into()));
    };
    if !VALUATION_TYPES.contains(&kind) {
        return Err(ScenarioError::Unsupported {
            what: "valuation type",
            name: kind.to_owned(),
        });
    }
    let mut body = obj.clone();
    body.remove("type");
    let body = Value::Object(body);
    fn parse<T: for<'de> Deserialize<'de>>(body: Value, locus: &str) -> Result<T, ScenarioError> {
        serde_json::from_value(body).map_err(|e| ScenarioError::Schema(format!("{locus}: {e}")))
    }
    let built = match kind {
        "additive" => {
            let d: AdditiveDoc = parse(body, locus)?;
            Valuation::additive(nums(d.weights))
        }
        "unit_demand" => {
            let d: UnitDemandDoc = parse(body, locus)?;
            Valuation::unit_demand(nums(d.values))
        }
        "single_minded" => {
            let d: SingleMindedDoc = parse(body, locus)?;
            Valuation::single_minded(m, item_set(&d.target, m, locus)?, d.value.0)
        }
        "coverage" => {
            let d: CoverageDoc = parse(body, locus)?;
            let universe = nums(d.universe);
            let covers = d
                .covers
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    ItemSet::from_items(c.iter().copied(), universe.len()).map_err(|e| {
                        invariant(format!("{locus} item {j}"), format!("covered element: {e}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Valuation::coverage(universe, covers)
        }
        "xos" => {
            let d: XosDoc = parse(body, locus)?;
            Valuation::xos(m, d.clauses.into_iter().map(nums).collect())
        }
        "mph" => {
            let d: MphDoc = parse(body, locus)?;
            let mut candidates = Vec::with_capacity(d.candidates.len());
            for (c, edges) in d.candidates.iter().enumerate() {
                let mut list = Vec::with_capacity(edges.len());
                for e in edges {
                    list.push((item_set(&e.edge, m, locus)?, e.weight.0.clone()));
                }
                candidates.push(
                    Hypergraph::new(list)
                        .map_err(|e| invariant(format!("{locus} candidate {c}"), e))?,
                );
            }
            Valuation::mph(m, d.rank, candidates)
        }
        _ => unreachable!("checked against VALUATION_TYPES"),
    };
    let v = built.map_err(|e| match e {
        pricemech_core::Error::ItemOutOfRange { item, .. } => {
            invariant(format!("{locus} item {item}"), e)
        }
        other => invariant(locus, other),
    })?;
    if v.items() != m {
        return Err(invariant(
            locus,
            format!(
                "valuation covers {} items but the scenario has {m}",
                v.items()
            ),
        ));
    }
    Ok(v)
}

fn valuation_to_json(v: &Valuation<Exact>) -> Value {
    let n = |x: &Exact| Num(x.clone());
    let ns = |xs: &[Exact]| xs.iter().map(n).collect::<Vec<_>>();
    let (kind, body) = match v.kind() {
        ValuationKind::Additive(c) => (
            "additive",
            serde_json::to_value(AdditiveDoc {
                weights: ns(c.weights()),
            }),
        ),
        ValuationKind::UnitDemand(values) => (
            "unit_demand",
            serde_json::to_value(UnitDemandDoc { values: ns(values) }),
        ),
        ValuationKind::SingleMinded { target, value } => (
            "single_minded",
            serde_json::to_value(SingleMindedDoc {
                target: target.to_vec(),
                value: n(value),
            }),
        ),
        ValuationKind::Coverage(c) => (
            "coverage",
            serde_json::to_value(CoverageDoc {
                universe: ns(c.universe()),
                covers: c.covers().iter().map(|s| s.to_vec()).collect(),
            }),
        ),
        ValuationKind::Xos(clauses) => (
            "xos",
            serde_json::to_value(XosDoc {
                clauses: clauses.iter().map(|c| ns(c.weights())).collect(),
            }),
        ),
        ValuationKind::Mph { rank, candidates } => (
            "mph",
            serde_json::to_value(MphDoc {
                rank: *rank,
                candidates: candidates
                    .iter()
                    .map(|h| {
                        h.edges()
                            .iter()
                            .map(|(e, w)| EdgeDoc {
                                edge: e.to_vec(),
                                weight: n(w),
                            })
                            .collect()
                    })
                    .collect(),
            }),
        ),
    };
    let mut obj = Map::new();
    obj.insert("type".into(), Value::String(kind.into()));
    if let Ok(Value::Object(fields)) = body {
        obj.extend(fields);
    }
    Value::Object(obj)
}
