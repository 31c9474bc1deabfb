use std::collections::BTreeMap;

use pricemech::scenario::{load_scenario, Arithmetic, ScenarioError};
use pricemech::{builtin, random, run_experiment};
use pricemech_core::rng::stream_rng;
use pricemech_core::{ArrivalPolicy, Exact, PriceFamily, Scalar, TieBreak, WelfareAlgorithm};

fn q(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

const MINIMAL: &str =
    r#"{"items": 1, "buyers": [[{"prob": 1, "valuation": {"type": "additive", "weights": [2]}}]]}"#;

#[test]
fn minimal_document_gets_defaults() {
    let s = load_scenario(MINIMAL).unwrap();
    assert_eq!(s.prior.num_buyers(), 1);
    assert_eq!(s.algorithm, WelfareAlgorithm::ExactBruteForce);
    assert_eq!(s.pricing.family, PriceFamily::Xos);
    assert_eq!(s.pricing.epsilon, None);
    assert_eq!(s.policies, vec![ArrivalPolicy::Fixed(vec![0])]);
    assert_eq!(s.mc_samples, None);
    assert_eq!(s.tie_break, TieBreak::Canonical);
    assert_eq!(s.arithmetic, Arithmetic::Exact);
}

#[test]
fn running_example_golden() {
    let s = load_scenario(include_str!("data/running_example.json")).unwrap();
    let report = run_experiment(&s).unwrap();
    assert_eq!(report.prices, vec![q(1, 2), q(1, 4)]);
    let welfare: Vec<_> = report.rows.iter().map(|r| r.welfare.clone()).collect();
    assert_eq!(welfare, vec![q(1, 1), q(3, 2), q(1, 1)]);
    let ratios: Vec<_> = report.rows.iter().map(|r| r.ratio.clone()).collect();
    assert_eq!(ratios, vec![q(2, 3), q(1, 1), q(2, 3)]);
    assert!(report.rows.iter().all(|r| r.opt_welfare == q(3, 2)));
    assert_eq!(
        report.outcome_csv(),
        include_str!("data/running_example.outcome.csv")
    );
}

#[test]
fn builtin_running_example_matches_document() {
    let from_doc = load_scenario(include_str!("data/running_example.json")).unwrap();
    let built = builtin::xos_running_example();
    assert_eq!(built.prior, from_doc.prior);
    assert_eq!(built.policies, from_doc.policies);
}

#[test]
fn round_trip_builtins() {
    let mut params = BTreeMap::new();
    params.insert("values".to_owned(), "0,1/2,3".to_owned());
    params.insert("probs".to_owned(), "1/4,1/4,1/2".to_owned());
    let scenarios = vec![
        builtin::xos_running_example(),
        builtin::mph_lower_bound(5),
        builtin::prophet_hard(16, 3),
        builtin::build("prophet-halfprice", &params).unwrap(),
    ];
    for s in scenarios {
        let back = load_scenario(&s.to_json()).unwrap();
        assert_eq!(back, s, "{}", s.name);
    }
}

#[test]
fn round_trip_random_priors() {
    let mut rng = stream_rng(11, 0);
    for i in 0..40 {
        let prior = if i % 2 == 0 {
            random::random_xos_prior(&mut rng, 3, 4, 3, 3)
        } else {
            let atoms = (0..2)
                .map(|_| {
                    random::random_probs(&mut rng, 2)
                        .into_iter()
                        .map(|p| (random::random_valuation(&mut rng, 4), p))
                        .collect()
                })
                .collect();
            pricemech_core::Prior::from_atoms(atoms).unwrap()
        };
        let mut s = pricemech::Scenario::new(format!("random-{i}"), prior);
        if i % 2 == 1 {
            let k = s
                .prior
                .buyers()
                .iter()
                .flat_map(|b| b.atoms())
                .map(|(v, _)| v.hypergraph_rank())
                .max()
                .unwrap();
            s.pricing.family = PriceFamily::Mph { k };
        }
        s.policies.push(ArrivalPolicy::UniformRandom { seed: 5 });
        s.mc_samples = Some(100);
        s.pricing.epsilon = Some(0.3);
        s.seed = i;
        let back = load_scenario(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}

#[test]
fn probabilities_must_sum_to_one() {
    let doc = r#"{"items": 1, "buyers": [
        [{"prob": 1, "valuation": {"type": "additive", "weights": [1]}}],
        [{"prob": 0.5, "valuation": {"type": "additive", "weights": [1]}},
         {"prob": 0.4, "valuation": {"type": "additive", "weights": [2]}}]]}"#;
    match load_scenario(doc) {
        Err(ScenarioError::Invariant { locus, .. }) => assert_eq!(locus, "buyer 1"),
        other => panic!("expected an invariant error, got {other:?}"),
    }
}

#[test]
fn error_classes_are_distinct() {
    let schema = r#"{"items": 1, "buyers": [[{"prob": 1, "valuation": {"type": "additive"}}]]}"#;
    assert!(matches!(
        load_scenario(schema),
        Err(ScenarioError::Schema(_))
    ));
    assert!(matches!(
        load_scenario("not json"),
        Err(ScenarioError::Schema(_))
    ));
    let extra = r#"{"items": 1, "buyers": [], "colour": "red"}"#;
    assert!(matches!(
        load_scenario(extra),
        Err(ScenarioError::Schema(_))
    ));

    let unsupported =
        r#"{"items": 1, "buyers": [[{"prob": 1, "valuation": {"type": "gross_substitutes"}}]]}"#;
    assert!(matches!(
        load_scenario(unsupported),
        Err(ScenarioError::Unsupported { .. })
    ));

    let bad_item = r#"{"items": 2, "buyers": [[{"prob": 1,
        "valuation": {"type": "single_minded", "target": [0, 5], "value": 1}}]]}"#;
    match load_scenario(bad_item) {
        Err(ScenarioError::Invariant { locus, .. }) => assert_eq!(locus, "buyer 0 atom 0 item 5"),
        other => panic!("expected an invariant error, got {other:?}"),
    }
}

#[test]
fn declared_k_must_cover_ranks() {
    let doc = r#"{"items": 3, "buyers": [[{"prob": 1,
        "valuation": {"type": "single_minded", "target": [0, 1, 2], "value": 2}}]],
        "pricing": {"family": "mph", "k": 2}}"#;
    assert!(matches!(
        load_scenario(doc),
        Err(ScenarioError::Invariant { .. })
    ));
    let ok = doc.replace("\"k\": 2", "\"k\": 3");
    assert!(load_scenario(&ok).is_ok());
}

#[test]
fn xos_pricing_rejects_complements() {
    let doc = r#"{"items": 2, "buyers": [[{"prob": 1,
        "valuation": {"type": "single_minded", "target": [0, 1], "value": 2}}]]}"#;
    match load_scenario(doc) {
        Err(ScenarioError::Invariant { locus, .. }) => assert_eq!(locus, "buyer 0 atom 0"),
        other => panic!("expected an invariant error, got {other:?}"),
    }
}

#[test]
fn sampled_pricing_needs_positive_epsilon() {
    let base = r#"{"items": 1, "buyers": [[{"prob": 1, "valuation": {"type": "additive", "weights": [1]}}]],
        "pricing": {"mode": "sampled", "epsilon": EPS}}"#;
    assert!(load_scenario(&base.replace("EPS", "0.2")).is_ok());
    assert!(matches!(
        load_scenario(&base.replace("EPS", "0")),
        Err(ScenarioError::Invariant { .. })
    ));
    assert!(matches!(
        load_scenario(&base.replace("EPS", "-1")),
        Err(ScenarioError::Invariant { .. })
    ));
}

#[test]
fn fixed_orders_must_be_permutations() {
    let doc = r#"{"items": 2, "buyers": [[{"prob": 1, "valuation": {"type": "additive", "weights": [1, 1]}}]],
        "policies": [{"type": "fixed", "order": [1]}]}"#;
    match load_scenario(doc) {
        Err(ScenarioError::Invariant { locus, .. }) => assert_eq!(locus, "policy 0"),
        other => panic!("expected an invariant error, got {other:?}"),
    }
}

#[test]
fn negative_weights_are_rejected() {
    let doc = r#"{"items": 2, "buyers": [[{"prob": 1, "valuation": {"type": "xos", "clauses": [[1, "-1/2"]]}}]]}"#;
    match load_scenario(doc) {
        Err(ScenarioError::Invariant { locus, .. }) => assert!(locus.starts_with("buyer 0 atom 0")),
        other => panic!("expected an invariant error, got {other:?}"),
    }
}

#[test]
fn prophet_hard_instance() {
    let s = builtin::prophet_hard(4, 2);
    let atoms = s.prior.buyer(0).atoms();
    assert_eq!(atoms.len(), 2);
    let high = &atoms[0].1;
    let expected = 1.0 - 0.75f64.sqrt();
    assert!((high.to_f64() - expected).abs() < 1e-15);
    let report = run_experiment(&s).unwrap();
    let opt = report.rows[0].opt_welfare.to_f64();
    assert!((opt - 1.75).abs() < 1e-9);
    // half-price earns at least half the prophet for every order
    let mut s2 = s.clone();
    s2.policies = vec![
        ArrivalPolicy::Fixed(vec![0, 1]),
        ArrivalPolicy::Fixed(vec![1, 0]),
    ];
    for row in run_experiment(&s2).unwrap().rows {
        assert!(row.welfare.clone() * q(2, 1) >= row.opt_welfare);
    }
}

#[test]
fn mph_lower_bound_instance() {
    let s = builtin::mph_lower_bound(4);
    let report = run_experiment(&s).unwrap();
    assert_eq!(report.rows[0].opt_welfare, q(3, 1));
    assert_eq!(report.prices, vec![q(3, 8); 4]);
    assert_eq!(report.rows[0].welfare, q(1, 1));
}

#[test]
fn float_mode_agrees_with_exact_on_dyadic_instances() {
    let mut s = builtin::xos_running_example();
    let exact = run_experiment(&s).unwrap();
    s.arithmetic = Arithmetic::Float;
    let float = run_experiment(&s).unwrap();
    assert_eq!(exact.prices, float.prices);
    for (a, b) in exact.rows.iter().zip(&float.rows) {
        assert_eq!(a.welfare, b.welfare);
    }
}

#[test]
fn unknown_builtin_is_unsupported() {
    assert!(matches!(
        builtin::build("nope", &BTreeMap::new()),
        Err(ScenarioError::Unsupported { .. })
    ));
    let mut bad = BTreeMap::new();
    bad.insert("y".to_owned(), "1".to_owned());
    assert!(matches!(
        builtin::build("mph-lower-bound", &bad),
        Err(ScenarioError::Schema(_))
    ));
}
