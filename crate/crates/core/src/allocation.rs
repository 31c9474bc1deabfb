//! Black-box welfare maximization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::scalar::Scalar;
use crate::valuation::Valuation;

/// Largest number of item-to-buyer assignments searched by
/// [`solve_exact`].
pub const DEFAULT_EXACT_CAP: u128 = 10_000_000;

/// Disjoint bundles, one per buyer. Items may stay unallocated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<ItemSet>,
}

impl Allocation {
    pub fn new(bundles: Vec<ItemSet>) -> Self {
        Allocation { bundles }
    }

    pub fn empty(buyers: usize) -> Self {
        Allocation {
            bundles: vec![ItemSet::EMPTY; buyers],
        }
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn bundle(&self, buyer: usize) -> ItemSet {
        self.bundles[buyer]
    }

    pub fn allocated(&self) -> ItemSet {
        self.bundles
            .iter()
            .fold(ItemSet::EMPTY, |acc, b| acc.union(*b))
    }

    /// Owner of `item`, if any.
    pub fn owner(&self, item: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(item))
    }

    /// Checks bundle count, disjointness and item range.
    pub fn validate(&self, buyers: usize, items: usize) -> Result<()> {
        if self.bundles.len() != buyers {
            return Err(Error::Malformed(format!(
                "allocation has {} bundles for {buyers} buyers",
                self.bundles.len()
            )));
        }
        let mut seen = ItemSet::EMPTY;
        for (i, b) in self.bundles.iter().enumerate() {
            if b.span() > items {
                return Err(Error::ItemOutOfRange {
                    item: b.span() - 1,
                    items,
                });
            }
            if !b.is_disjoint(seen) {
                return Err(Error::Malformed(format!(
                    "bundle of buyer {i} overlaps an earlier bundle"
                )));
            }
            seen = seen.union(*b);
        }
        Ok(())
    }

    pub fn welfare<S: Scalar>(&self, profile: &[Valuation<S>]) -> S {
        profile
            .iter()
            .zip(&self.bundles)
            .map(|(v, b)| v.eval(*b))
            .sum()
    }
}

/// Welfare-maximization routine used to define prices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WelfareAlgorithm {
    #[default]
    ExactBruteForce,
    GreedyMarginal,
}

impl WelfareAlgorithm {
    pub fn solve<S: Scalar>(self, profile: &[Valuation<S>]) -> Result<Allocation> {
        match self {
            WelfareAlgorithm::ExactBruteForce => solve_exact(profile),
            WelfareAlgorithm::GreedyMarginal => solve_greedy(profile),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WelfareAlgorithm::ExactBruteForce => "exact",
            WelfareAlgorithm::GreedyMarginal => "greedy",
        }
    }
}

fn market_size<S: Scalar>(profile: &[Valuation<S>]) -> Result<usize> {
    let items = profile.first().map_or(0, |v| v.items());
    if profile.iter().any(|v| v.items() != items) {
        return Err(Error::Malformed(
            "valuations in a profile disagree on the number of items".into(),
        ));
    }
    Ok(items)
}

pub fn solve_exact<S: Scalar>(profile: &[Valuation<S>]) -> Result<Allocation> {
    solve_exact_capped(profile, DEFAULT_EXACT_CAP)
}

/// Optimal allocation by trying every assignment of each item to a buyer or
/// to nobody.
///
/// Assignments are visited in lexicographic order of the per-item owner
/// vector, where owner `n` (nobody) sorts after every buyer, and only strict
/// improvements replace the incumbent, so ties resolve to the
/// lexicographically first optimum.
pub fn solve_exact_capped<S: Scalar>(profile: &[Valuation<S>], cap: u128) -> Result<Allocation> {
    let items = market_size(profile)?;
    let buyers = profile.len();
    if buyers == 0 {
        return Ok(Allocation::empty(0));
    }
    let choices = buyers as u128 + 1;
    let total = (0..items).try_fold(1u128, |acc, _| acc.checked_mul(choices));
    match total {
        Some(t) if t <= cap => {}
        _ => {
            return Err(Error::capacity(
                "exact allocation (assignments)",
                total.unwrap_or(u128::MAX),
                cap,
            ))
        }
    }

    // Odometer over owner vectors; item 0 is the most significant digit.
    let mut owner = vec![0usize; items];
    let mut bundles = vec![ItemSet::EMPTY; buyers];
    bundles[0] = ItemSet::full(items);
    let eval =
        |bundles: &[ItemSet]| -> S { profile.iter().zip(bundles).map(|(v, b)| v.eval(*b)).sum() };
    let mut best = bundles.clone();
    let mut best_welfare = eval(&bundles);
    loop {
        let mut pos = items;
        loop {
            if pos == 0 {
                return Ok(Allocation::new(best));
            }
            pos -= 1;
            let from = owner[pos];
            if from < buyers {
                bundles[from].remove(pos);
                owner[pos] = from + 1;
                if from + 1 < buyers {
                    bundles[from + 1].insert(pos);
                }
                break;
            }
            owner[pos] = 0;
            bundles[0].insert(pos);
        }
        let welfare = eval(&bundles);
        if welfare > best_welfare {
            best_welfare = welfare;
            best.clone_from(&bundles);
        }
    }
}

/// Assigns items in ascending index order, each to the buyer with the
/// largest positive marginal value (lowest index on ties).
pub fn solve_greedy<S: Scalar>(profile: &[Valuation<S>]) -> Result<Allocation> {
    let items = market_size(profile)?;
    let mut bundles = vec![ItemSet::EMPTY; profile.len()];
    for j in 0..items {
        let mut best: Option<(usize, S)> = None;
        for (i, v) in profile.iter().enumerate() {
            let mut with = bundles[i];
            with.insert(j);
            let marginal = v.eval(with) - v.eval(bundles[i]);
            if marginal > S::zero() && best.as_ref().is_none_or(|(_, b)| marginal > *b) {
                best = Some((i, marginal));
            }
        }
        if let Some((i, _)) = best {
            bundles[i].insert(j);
        }
    }
    Ok(Allocation::new(bundles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn running_profile() -> Vec<Valuation<Exact>> {
        vec![
            Valuation::xos(2, vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]).unwrap(),
            Valuation::additive(vec![q(1, 2), q(1, 2)]).unwrap(),
        ]
    }

    fn lower_bound_profile(m: usize) -> Vec<Valuation<Exact>> {
        vec![
            Valuation::unit_demand(vec![q(1, 1); m]).unwrap(),
            Valuation::single_minded(m, ItemSet::full(m), q(m as i64 - 1, 1)).unwrap(),
        ]
    }

    #[test]
    fn exact_running_example() {
        let alloc = solve_exact(&running_profile()).unwrap();
        assert_eq!(
            alloc.bundles(),
            &[ItemSet::singleton(0), ItemSet::singleton(1)]
        );
        assert_eq!(alloc.welfare(&running_profile()), q(3, 2));
    }

    #[test]
    fn exact_lower_bound_instance() {
        let profile = lower_bound_profile(4);
        let alloc = solve_exact(&profile).unwrap();
        assert_eq!(alloc.bundles(), &[ItemSet::EMPTY, ItemSet::full(4)]);
        assert_eq!(alloc.welfare(&profile), q(3, 1));
    }

    #[test]
    fn exact_single_buyer_takes_everything() {
        let profile = vec![Valuation::additive(vec![q(1, 2), q(0, 1), q(1, 3)]).unwrap()];
        let alloc = solve_exact(&profile).unwrap();
        assert_eq!(alloc.bundle(0), ItemSet::full(3));
    }

    #[test]
    fn exact_cap_is_enforced() {
        let profile = vec![Valuation::additive(vec![1.0; 20]).unwrap(); 3];
        assert!(matches!(
            solve_exact(&profile).unwrap_err(),
            Error::Capacity { .. }
        ));
        assert!(solve_exact_capped(&running_profile(), 8).is_err());
        assert!(solve_exact_capped(&running_profile(), 9).is_ok());
    }

    #[test]
    fn greedy_examples() {
        let add = vec![Valuation::additive(vec![q(1, 4), q(1, 2)]).unwrap()];
        let alloc = solve_greedy(&add).unwrap();
        assert_eq!(alloc.welfare(&add), q(3, 4));

        let alloc = solve_greedy(&running_profile()).unwrap();
        assert_eq!(
            alloc.bundles(),
            &[ItemSet::singleton(0), ItemSet::singleton(1)]
        );
        assert_eq!(alloc.welfare(&running_profile()), q(3, 2));

        let profile = lower_bound_profile(4);
        let alloc = solve_greedy(&profile).unwrap();
        assert_eq!(alloc.bundles(), &[ItemSet::singleton(0), ItemSet::EMPTY]);
        assert_eq!(alloc.welfare(&profile), q(1, 1));
    }

    #[test]
    fn validate_catches_overlap() {
        let alloc = Allocation::new(vec![ItemSet::full(2), ItemSet::singleton(1)]);
        assert!(alloc.validate(2, 2).is_err());
        assert!(Allocation::empty(2).validate(3, 2).is_err());
        assert!(Allocation::new(vec![ItemSet::singleton(4)])
            .validate(1, 2)
            .is_err());
    }

    /// Independent oracle: recursive search over items, returning the best
    /// welfare achievable.
    fn recursive_best(profile: &[Valuation<Exact>], j: usize, bundles: &mut Vec<ItemSet>) -> Exact {
        let items = profile[0].items();
        if j == items {
            return profile
                .iter()
                .zip(bundles.iter())
                .map(|(v, b)| v.value(*b).unwrap())
                .sum();
        }
        let mut best = recursive_best(profile, j + 1, bundles);
        for i in 0..profile.len() {
            bundles[i].insert(j);
            let w = recursive_best(profile, j + 1, bundles);
            bundles[i].remove(j);
            if w > best {
                best = w;
            }
        }
        best
    }

    fn xos_strategy(m: usize) -> impl Strategy<Value = Valuation<Exact>> {
        prop::collection::vec(prop::collection::vec(0i64..5, m), 1..=3).prop_map(move |cls| {
            let clauses = cls
                .into_iter()
                .map(|c| c.into_iter().map(|w| q(w, 4)).collect())
                .collect();
            Valuation::xos(m, clauses).unwrap()
        })
    }

    fn profile_strategy() -> impl Strategy<Value = Vec<Valuation<Exact>>> {
        (1usize..=3, 1usize..=4).prop_flat_map(|(n, m)| prop::collection::vec(xos_strategy(m), n))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn exact_matches_recursive_oracle(profile in profile_strategy()) {
            let alloc = solve_exact(&profile).unwrap();
            alloc.validate(profile.len(), profile[0].items()).unwrap();
            let mut scratch = vec![ItemSet::EMPTY; profile.len()];
            prop_assert_eq!(alloc.welfare(&profile), recursive_best(&profile, 0, &mut scratch));
        }

        #[test]
        fn exact_dominates_greedy(profile in profile_strategy()) {
            let exact = solve_exact(&profile).unwrap();
            let greedy = solve_greedy(&profile).unwrap();
            greedy.validate(profile.len(), profile[0].items()).unwrap();
            prop_assert!(exact.welfare(&profile) >= greedy.welfare(&profile));
        }
    }
}
