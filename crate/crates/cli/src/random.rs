//! Random instance generators for sweeps and the acceptance suite.
//!
//! Weights are small dyadic rationals so exact runs stay cheap and ties
//! show up often.

use num_traits::Zero;
use rand::Rng;

use pricemech_core::{Exact, Hypergraph, ItemSet, PriceVector, Prior, Scalar, Valuation};

/// A weight in `{0, 1/4, ..., 2}`, zero with probability about 1/5.
pub fn random_weight<R: Rng + ?Sized>(rng: &mut R) -> Exact {
    if rng.random_ratio(1, 5) {
        Exact::zero()
    } else {
        Exact::from_ratio(rng.random_range(1..=8), 4)
    }
}

pub fn random_positive_weight<R: Rng + ?Sized>(rng: &mut R) -> Exact {
    Exact::from_ratio(rng.random_range(1..=8), 4)
}

/// `k` positive probabilities summing to exactly one.
pub fn random_probs<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<Exact> {
    let raw: Vec<i64> = (0..k).map(|_| rng.random_range(1..=4)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter()
        .map(|r| Exact::from_ratio(r, total))
        .collect()
}

/// A non-empty random subset of `0..m` with at most `max_len` items.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, m: usize, max_len: usize) -> ItemSet {
    let len = rng.random_range(1..=max_len.min(m).max(1));
    let mut items: Vec<usize> = (0..m).collect();
    rand::seq::SliceRandom::shuffle(items.as_mut_slice(), rng);
    ItemSet::from_items(items.into_iter().take(len), m).expect("items in range")
}

pub fn random_xos<R: Rng + ?Sized>(rng: &mut R, m: usize, max_clauses: usize) -> Valuation<Exact> {
    let clauses = rng.random_range(1..=max_clauses.max(1));
    let weights = (0..clauses)
        .map(|_| (0..m).map(|_| random_weight(rng)).collect())
        .collect();
    Valuation::xos(m, weights).expect("valid xos")
}

/// A maximum over positive hypergraphs with edges of size at most `k`.
pub fn random_mph<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    k: usize,
    max_candidates: usize,
    max_edges: usize,
) -> Valuation<Exact> {
    let candidates = (0..rng.random_range(1..=max_candidates.max(1)))
        .map(|_| {
            let edges = (0..rng.random_range(1..=max_edges.max(1)))
                .map(|_| (random_subset(rng, m, k), random_positive_weight(rng)))
                .collect();
            Hypergraph::new(edges).expect("positive edges")
        })
        .collect();
    Valuation::mph(m, k, candidates).expect("valid mph")
}

/// Number of valuation classes [`random_valuation_of`] can produce.
pub const VALUATION_CLASSES: usize = 6;

/// A valuation from any supported class.
pub fn random_valuation<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Valuation<Exact> {
    let class = rng.random_range(0..VALUATION_CLASSES);
    random_valuation_of(rng, m, class)
}

/// A valuation of class `class`: additive, unit-demand, single-minded,
/// coverage, XOS, MPH in that order.
pub fn random_valuation_of<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    class: usize,
) -> Valuation<Exact> {
    match class % VALUATION_CLASSES {
        0 => Valuation::additive((0..m).map(|_| random_weight(rng)).collect()).expect("additive"),
        1 => Valuation::unit_demand((0..m).map(|_| random_weight(rng)).collect())
            .expect("unit demand"),
        2 => {
            let target = random_subset(rng, m, m);
            Valuation::single_minded(m, target, random_positive_weight(rng)).expect("single minded")
        }
        3 => {
            let u = rng.random_range(1..=4);
            let universe = (0..u).map(|_| random_positive_weight(rng)).collect();
            let covers = (0..m)
                .map(|_| ItemSet::from_bits(rng.random_range(0..1u64 << u)))
                .collect();
            Valuation::coverage(universe, covers).expect("coverage")
        }
        4 => random_xos(rng, m, 3),
        _ => {
            let k = rng.random_range(1..=m.min(3));
            random_mph(rng, m, k, 2, 3)
        }
    }
}

fn prior_from<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_atoms: usize,
    mut draw: impl FnMut(&mut R) -> Valuation<Exact>,
) -> Prior<Exact> {
    let buyers = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=max_atoms.max(1));
            let probs = random_probs(rng, k);
            probs.into_iter().map(|p| (draw(rng), p)).collect()
        })
        .collect();
    Prior::from_atoms(buyers).expect("valid prior")
}

pub fn random_xos_prior<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    max_atoms: usize,
    max_clauses: usize,
) -> Prior<Exact> {
    prior_from(rng, n, max_atoms, |r| random_xos(r, m, max_clauses))
}

pub fn random_mph_prior<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    k: usize,
    max_atoms: usize,
) -> Prior<Exact> {
    prior_from(rng, n, max_atoms, |r| random_mph(r, m, k, 2, 3))
}

/// Moves every price by independent noise in `[-delta, delta]` (multiples
/// of `delta / 8`), clamped at zero, so no price moves by more than `delta`.
pub fn perturb_prices<R: Rng + ?Sized>(
    rng: &mut R,
    prices: &PriceVector<Exact>,
    delta: &Exact,
) -> PriceVector<Exact> {
    let noisy = prices
        .iter()
        .map(|p| {
            let step = Exact::from_ratio(rng.random_range(-8..=8), 8);
            let x = p.clone() + step * delta.clone();
            if x < Exact::zero() {
                Exact::zero()
            } else {
                x
            }
        })
        .collect();
    PriceVector::new(noisy).expect("non-negative prices")
}
