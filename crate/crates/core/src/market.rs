//! The posted-price market.
//!
//! Prices are posted up front, then buyers arrive one at a time and each
//! takes a utility-maximizing bundle from the items still unsold. Unsold
//! items stay unsold. This module runs that consumption phase for a single
//! profile and computes expected welfare over a prior under fixed, random,
//! worst-case static and adaptive arrival orders.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::allocation::Allocation;
use crate::bayes::{Prior, DEFAULT_SUPPORT_CAP};
use crate::error::{Error, Result};
use crate::items::ItemSet;
use crate::pricing::PriceVector;
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::valuation::{Valuation, DEFAULT_DEMAND_SEARCH_CAP};

/// Largest buyer count for policies that enumerate all `n!` orders.
pub const MAX_ORDER_ENUMERATION_BUYERS: usize = 8;
/// Largest market searched by the adversarial tie-break.
pub const MAX_ADVERSARIAL_TIE_ITEMS: usize = 8;
/// Game-tree limits for the adaptive adversary.
pub const MAX_ADAPTIVE_BUYERS: usize = 5;
pub const MAX_ADAPTIVE_ATOMS: usize = 4;

/// How buyers pick among equally good bundles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Fewest items, then lexicographically smallest.
    #[default]
    Canonical,
    /// Whichever utility-maximizing bundle leads to the lowest final
    /// welfare, searched exhaustively.
    Adversarial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArrivalPolicy {
    /// A permutation of buyer indices.
    Fixed(Vec<usize>),
    /// A uniformly random order. Exact evaluation averages over all orders;
    /// Monte-Carlo evaluation shuffles with this seed.
    UniformRandom { seed: u64 },
    /// The single order minimizing expected welfare, chosen before values
    /// are realized.
    WorstCaseStatic,
    /// An adversary that picks each next buyer after seeing all earlier
    /// realizations and purchases.
    AdaptiveAdversary,
}

impl ArrivalPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ArrivalPolicy::Fixed(_) => "fixed",
            ArrivalPolicy::UniformRandom { .. } => "uniform_random",
            ArrivalPolicy::WorstCaseStatic => "worst_case_static",
            ArrivalPolicy::AdaptiveAdversary => "adaptive_adversary",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvalMode {
    #[default]
    Exact,
    MonteCarlo {
        samples: u64,
        seed: u64,
    },
}

/// Result of one consumption phase.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketOutcome<S> {
    pub purchases: Allocation,
    pub payments: Vec<S>,
    pub utilities: Vec<S>,
    pub revenue: S,
    pub welfare: S,
    /// `(buyer, bundle bought)` in arrival order.
    pub sold_trace: Vec<(usize, ItemSet)>,
}

impl<S: Scalar> MarketOutcome<S> {
    fn from_purchases(
        profile: &[Valuation<S>],
        prices: &[S],
        trace: Vec<(usize, ItemSet)>,
    ) -> Self {
        let n = profile.len();
        let mut bundles = vec![ItemSet::EMPTY; n];
        let mut payments = vec![S::zero(); n];
        let mut utilities = vec![S::zero(); n];
        for &(i, bundle) in &trace {
            bundles[i] = bundle;
            payments[i] = bundle.iter().map(|j| &prices[j]).sum();
            utilities[i] = profile[i].eval(bundle) - payments[i].clone();
        }
        let revenue: S = payments.iter().sum();
        let welfare = profile.iter().zip(&bundles).map(|(v, b)| v.eval(*b)).sum();
        MarketOutcome {
            purchases: Allocation::new(bundles),
            payments,
            utilities,
            revenue,
            welfare,
            sold_trace: trace,
        }
    }

    pub fn utility_total(&self) -> S {
        self.utilities.iter().sum()
    }

    pub fn sold(&self) -> ItemSet {
        self.purchases.allocated()
    }

    /// Checks the accounting identities, individual rationality, and
    /// consistency of the trace with the purchases. Exact backends are held
    /// to equality, floats to `1e-9`.
    pub fn find_inconsistency(
        &self,
        profile: &[Valuation<S>],
        prices: &[S],
    ) -> Option<&'static str> {
        let close = |a: &S, b: &S| {
            if S::EXACT {
                a == b
            } else {
                (a.to_f64() - b.to_f64()).abs() <= 1e-9
            }
        };
        let items = prices.len();
        if self.purchases.validate(profile.len(), items).is_err() {
            return Some("purchased bundles overlap or leave the market");
        }
        let mut seen = ItemSet::EMPTY;
        for &(i, b) in &self.sold_trace {
            if self.purchases.bundle(i) != b || !b.is_disjoint(seen) {
                return Some("sold trace disagrees with purchases");
            }
            seen = seen.union(b);
        }
        if seen != self.sold() {
            return Some("sold trace disagrees with purchases");
        }
        for (i, v) in profile.iter().enumerate() {
            let bundle = self.purchases.bundle(i);
            let pay: S = bundle.iter().map(|j| &prices[j]).sum();
            if !close(&pay, &self.payments[i]) {
                return Some("payment differs from the price of the bundle");
            }
            if !close(&(v.eval(bundle) - pay), &self.utilities[i]) {
                return Some("utility differs from value minus payment");
            }
            if self.utilities[i].is_negative() && !close(&self.utilities[i], &S::zero()) {
                return Some("negative utility");
            }
        }
        if !close(&self.revenue, &self.payments.iter().sum()) {
            return Some("revenue differs from total payments");
        }
        if !close(
            &self.welfare,
            &(self.revenue.clone() + self.utility_total()),
        ) {
            return Some("welfare differs from revenue plus utilities");
        }
        None
    }
}

fn check_market<S: Scalar>(profile: &[Valuation<S>], prices: &[S], order: &[usize]) -> Result<()> {
    let items = profile.first().map_or(prices.len(), |v| v.items());
    if profile.iter().any(|v| v.items() != items) || prices.len() != items {
        return Err(Error::Malformed(format!(
            "prices cover {} items but the profile is over {items}",
            prices.len()
        )));
    }
    check_order(order, profile.len())
}

fn check_order(order: &[usize], buyers: usize) -> Result<()> {
    let mut seen = vec![false; buyers];
    if order.len() != buyers {
        return Err(Error::Malformed(format!(
            "arrival order has {} entries for {buyers} buyers",
            order.len()
        )));
    }
    for &i in order {
        if i >= buyers || seen[i] {
            return Err(Error::Malformed(format!(
                "arrival order is not a permutation of 0..{buyers}"
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Runs the consumption phase with canonical tie-breaking.
pub fn run_consumption<S: Scalar>(
    profile: &[Valuation<S>],
    prices: &PriceVector<S>,
    order: &[usize],
) -> Result<MarketOutcome<S>> {
    check_market(profile, prices, order)?;
    let mut remaining = ItemSet::full(prices.len());
    let mut trace = Vec::with_capacity(order.len());
    for &i in order {
        let bundle = profile[i].demand(prices, remaining)?;
        remaining = remaining.difference(bundle);
        trace.push((i, bundle));
    }
    Ok(MarketOutcome::from_purchases(profile, prices, trace))
}

/// Runs the consumption phase letting every tie go against welfare.
pub fn run_consumption_adversarial<S: Scalar>(
    profile: &[Valuation<S>],
    prices: &PriceVector<S>,
    order: &[usize],
) -> Result<MarketOutcome<S>> {
    check_market(profile, prices, order)?;
    if prices.len() > MAX_ADVERSARIAL_TIE_ITEMS {
        return Err(Error::capacity(
            "adversarial tie-breaking (items)",
            prices.len() as u128,
            MAX_ADVERSARIAL_TIE_ITEMS as u128,
        ));
    }
    fn worst<S: Scalar>(
        profile: &[Valuation<S>],
        prices: &[S],
        order: &[usize],
        remaining: ItemSet,
    ) -> Result<(S, Vec<ItemSet>)> {
        let Some((&i, rest)) = order.split_first() else {
            return Ok((S::zero(), Vec::new()));
        };
        let options =
            profile[i].demand_correspondence(prices, remaining, DEFAULT_DEMAND_SEARCH_CAP)?;
        let mut best: Option<(S, Vec<ItemSet>)> = None;
        for bundle in options {
            let (tail, mut picks) = worst(profile, prices, rest, remaining.difference(bundle))?;
            let welfare = profile[i].eval(bundle) + tail;
            if best.as_ref().is_none_or(|(w, _)| welfare < *w) {
                picks.insert(0, bundle);
                best = Some((welfare, picks));
            }
        }
        Ok(best.expect("the empty bundle is always a candidate"))
    }
    let (_, picks) = worst(profile, prices, order, ItemSet::full(prices.len()))?;
    let trace = order.iter().copied().zip(picks).collect();
    Ok(MarketOutcome::from_purchases(profile, prices, trace))
}

pub fn simulate<S: Scalar>(
    profile: &[Valuation<S>],
    prices: &PriceVector<S>,
    order: &[usize],
    tie_break: TieBreak,
) -> Result<MarketOutcome<S>> {
    match tie_break {
        TieBreak::Canonical => run_consumption(profile, prices, order),
        TieBreak::Adversarial => run_consumption_adversarial(profile, prices, order),
    }
}

/// Change in buyer `buyer`'s true utility when they shop as if their
/// valuation were `report`, everyone else unchanged.
pub fn misreport_gain<S: Scalar>(
    profile: &[Valuation<S>],
    prices: &PriceVector<S>,
    order: &[usize],
    buyer: usize,
    report: &Valuation<S>,
) -> Result<S> {
    let truthful = run_consumption(profile, prices, order)?;
    let mut lying = profile.to_vec();
    lying[buyer] = report.clone();
    let outcome = run_consumption(&lying, prices, order)?;
    let bundle = outcome.purchases.bundle(buyer);
    let true_utility = profile[buyer].utility(prices, bundle);
    Ok(true_utility - truthful.utilities[buyer].clone())
}

/// Every permutation of `0..n` in lexicographic order.
pub fn all_orders(n: usize) -> Result<Vec<Vec<usize>>> {
    if n > MAX_ORDER_ENUMERATION_BUYERS {
        return Err(Error::capacity(
            "arrival order enumeration (buyers)",
            n as u128,
            MAX_ORDER_ENUMERATION_BUYERS as u128,
        ));
    }
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    // standard next-permutation
    loop {
        let Some(k) = (1..n)
            .rev()
            .find(|&k| current[k - 1] < current[k])
            .map(|k| k - 1)
        else {
            return Ok(out);
        };
        let l = (k + 1..n).rev().find(|&l| current[k] < current[l]).unwrap();
        current.swap(k, l);
        current[k + 1..].reverse();
        out.push(current.clone());
    }
}

/// Expected market performance under a policy.
#[derive(Clone, Debug, PartialEq)]
pub struct WelfareEstimate<S> {
    pub welfare: S,
    pub revenue: S,
    pub utility_total: S,
    /// Standard error of the welfare estimate (Monte-Carlo only).
    pub std_error: Option<f64>,
    /// The order the estimate refers to, when a single one does.
    pub order: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
struct Totals<S> {
    welfare: S,
    revenue: S,
    utility: S,
}

impl<S: Scalar> Totals<S> {
    fn zero() -> Self {
        Totals {
            welfare: S::zero(),
            revenue: S::zero(),
            utility: S::zero(),
        }
    }

    fn add_weighted(&mut self, outcome: &MarketOutcome<S>, weight: &S) {
        self.welfare += weight.clone() * outcome.welfare.clone();
        self.revenue += weight.clone() * outcome.revenue.clone();
        self.utility += weight.clone() * outcome.utility_total();
    }

    fn scale(self, factor: &S) -> Self {
        Totals {
            welfare: self.welfare * factor.clone(),
            revenue: self.revenue * factor.clone(),
            utility: self.utility * factor.clone(),
        }
    }

    fn into_estimate(
        self,
        std_error: Option<f64>,
        order: Option<Vec<usize>>,
    ) -> WelfareEstimate<S> {
        WelfareEstimate {
            welfare: self.welfare,
            revenue: self.revenue,
            utility_total: self.utility,
            std_error,
            order,
        }
    }
}

/// Expected welfare, revenue and buyer utility of the market at `prices`.
///
/// In exact mode the expectation runs over the enumerated support; a
/// uniformly random order is averaged over all `n!` orders and the
/// worst-case static order is the minimizer over them. Monte-Carlo mode
/// reuses the same sampled profiles for every order it compares.
pub fn expected_welfare<S: Scalar>(
    prior: &Prior<S>,
    prices: &PriceVector<S>,
    policy: &ArrivalPolicy,
    mode: EvalMode,
    tie_break: TieBreak,
) -> Result<WelfareEstimate<S>> {
    if prices.len() != prior.items() {
        return Err(Error::Malformed(format!(
            "prices cover {} items but the prior is over {}",
            prices.len(),
            prior.items()
        )));
    }
    let n = prior.num_buyers();
    match mode {
        EvalMode::Exact => exact_welfare(prior, prices, policy, tie_break),
        EvalMode::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Config(
                    "Monte-Carlo evaluation needs samples > 0".into(),
                ));
            }
            let mut rng = stream_rng(seed, 0);
            let draws: Vec<_> = (0..samples)
                .map(|_| prior.sample_profile(&mut rng).profile)
                .collect();
            match policy {
                ArrivalPolicy::Fixed(order) => {
                    check_order(order, n)?;
                    let outcomes = draws
                        .iter()
                        .map(|p| simulate(p, prices, order, tie_break))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(mc_estimate(&outcomes, Some(order.clone())))
                }
                ArrivalPolicy::UniformRandom { seed: order_seed } => {
                    let mut order_rng = stream_rng(*order_seed, 0);
                    let mut order: Vec<usize> = (0..n).collect();
                    let mut outcomes = Vec::with_capacity(draws.len());
                    for p in &draws {
                        order.shuffle(&mut order_rng);
                        outcomes.push(simulate(p, prices, &order, tie_break)?);
                    }
                    Ok(mc_estimate(&outcomes, None))
                }
                ArrivalPolicy::WorstCaseStatic => {
                    let mut worst: Option<WelfareEstimate<S>> = None;
                    for order in all_orders(n)? {
                        let outcomes = draws
                            .iter()
                            .map(|p| simulate(p, prices, &order, tie_break))
                            .collect::<Result<Vec<_>>>()?;
                        let est = mc_estimate(&outcomes, Some(order));
                        if worst.as_ref().is_none_or(|w| est.welfare < w.welfare) {
                            worst = Some(est);
                        }
                    }
                    Ok(worst.expect("at least one order"))
                }
                ArrivalPolicy::AdaptiveAdversary => Err(Error::Config(
                    "the adaptive adversary is only evaluated exactly".into(),
                )),
            }
        }
    }
}

fn mc_estimate<S: Scalar>(
    outcomes: &[MarketOutcome<S>],
    order: Option<Vec<usize>>,
) -> WelfareEstimate<S> {
    let count = outcomes.len();
    let inv = S::one() / S::from_usize(count);
    let mut totals = Totals::zero();
    for o in outcomes {
        totals.add_weighted(o, &S::one());
    }
    let totals = totals.scale(&inv);
    let mean = totals.welfare.to_f64();
    let var = if count > 1 {
        outcomes
            .iter()
            .map(|o| {
                let d = o.welfare.to_f64() - mean;
                d * d
            })
            .sum::<f64>()
            / (count - 1) as f64
    } else {
        0.0
    };
    totals.into_estimate(Some(libm::sqrt(var / count as f64)), order)
}

fn exact_welfare<S: Scalar>(
    prior: &Prior<S>,
    prices: &PriceVector<S>,
    policy: &ArrivalPolicy,
    tie_break: TieBreak,
) -> Result<WelfareEstimate<S>> {
    let n = prior.num_buyers();
    let support = prior.enumerate_support_capped(DEFAULT_SUPPORT_CAP)?;
    let fixed = |order: &[usize]| -> Result<Totals<S>> {
        let mut totals = Totals::zero();
        for draw in &support {
            let outcome = simulate(&draw.profile, prices, order, tie_break)?;
            totals.add_weighted(&outcome, &draw.probability);
        }
        Ok(totals)
    };
    match policy {
        ArrivalPolicy::Fixed(order) => {
            check_order(order, n)?;
            Ok(fixed(order)?.into_estimate(None, Some(order.clone())))
        }
        ArrivalPolicy::UniformRandom { .. } => {
            let orders = all_orders(n)?;
            let weight = S::one() / S::from_usize(orders.len());
            let mut totals = Totals::zero();
            for order in &orders {
                let t = fixed(order)?;
                totals.welfare += t.welfare;
                totals.revenue += t.revenue;
                totals.utility += t.utility;
            }
            Ok(totals.scale(&weight).into_estimate(None, None))
        }
        ArrivalPolicy::WorstCaseStatic => {
            let mut worst: Option<(Totals<S>, Vec<usize>)> = None;
            for order in all_orders(n)? {
                let t = fixed(&order)?;
                if worst.as_ref().is_none_or(|(w, _)| t.welfare < w.welfare) {
                    worst = Some((t, order));
                }
            }
            let (t, order) = worst.expect("at least one order");
            Ok(t.into_estimate(None, Some(order)))
        }
        ArrivalPolicy::AdaptiveAdversary => adaptive_adversary(prior, prices, tie_break),
    }
}

/// `E[min over orders of welfare]`: the adversary picks a worst order for
/// each realized profile. Never above the worst-case static value.
pub fn per_profile_worst_welfare<S: Scalar>(
    prior: &Prior<S>,
    prices: &PriceVector<S>,
    tie_break: TieBreak,
) -> Result<S> {
    let orders = all_orders(prior.num_buyers())?;
    let mut total = S::zero();
    for draw in prior.support_iter(DEFAULT_SUPPORT_CAP)? {
        let mut worst: Option<S> = None;
        for order in &orders {
            let w = simulate(&draw.profile, prices, order, tie_break)?.welfare;
            if worst.as_ref().is_none_or(|x| w < *x) {
                worst = Some(w);
            }
        }
        total += draw.probability * worst.expect("at least one order");
    }
    Ok(total)
}

/// Expected welfare against an adversary who chooses each next buyer after
/// observing every earlier buyer's realized valuation and purchase.
///
/// Since valuations are independent, the continuation value depends only on
/// which buyers and items remain, so backward induction over
/// `(remaining buyers, remaining items)` is exact.
pub fn adaptive_adversary_welfare<S: Scalar>(
    prior: &Prior<S>,
    prices: &PriceVector<S>,
) -> Result<S> {
    Ok(adaptive_adversary(prior, prices, TieBreak::Canonical)?.welfare)
}

fn adaptive_adversary<S: Scalar>(
    prior: &Prior<S>,
    prices: &PriceVector<S>,
    tie_break: TieBreak,
) -> Result<WelfareEstimate<S>> {
    let n = prior.num_buyers();
    if n > MAX_ADAPTIVE_BUYERS {
        return Err(Error::capacity(
            "adaptive adversary (buyers)",
            n as u128,
            MAX_ADAPTIVE_BUYERS as u128,
        ));
    }
    if let Some(b) = prior.buyers().iter().find(|b| b.len() > MAX_ADAPTIVE_ATOMS) {
        return Err(Error::capacity(
            "adaptive adversary (atoms per buyer)",
            b.len() as u128,
            MAX_ADAPTIVE_ATOMS as u128,
        ));
    }
    if tie_break == TieBreak::Adversarial && prices.len() > MAX_ADVERSARIAL_TIE_ITEMS {
        return Err(Error::capacity(
            "adversarial tie-breaking (items)",
            prices.len() as u128,
            MAX_ADVERSARIAL_TIE_ITEMS as u128,
        ));
    }
    let mut game = AdaptiveGame {
        prior,
        prices,
        tie_break,
        memo: BTreeMap::new(),
    };
    let all_buyers = (1u32 << n) - 1;
    let t = game.value(all_buyers, ItemSet::full(prices.len()))?;
    Ok(t.into_estimate(None, None))
}

struct AdaptiveGame<'a, S> {
    prior: &'a Prior<S>,
    prices: &'a PriceVector<S>,
    tie_break: TieBreak,
    memo: BTreeMap<(u32, ItemSet), Totals<S>>,
}

impl<S: Scalar> AdaptiveGame<'_, S> {
    fn value(&mut self, buyers: u32, remaining: ItemSet) -> Result<Totals<S>> {
        if buyers == 0 {
            return Ok(Totals::zero());
        }
        if let Some(t) = self.memo.get(&(buyers, remaining)) {
            return Ok(t.clone());
        }
        let mut best: Option<Totals<S>> = None;
        for i in (0..self.prior.num_buyers()).filter(|i| buyers >> i & 1 == 1) {
            let rest = buyers & !(1u32 << i);
            let mut expected = Totals::zero();
            for (v, p) in self.prior.buyer(i).atoms() {
                let candidates = match self.tie_break {
                    TieBreak::Canonical => vec![v.demand(self.prices, remaining)?],
                    TieBreak::Adversarial => {
                        v.demand_correspondence(self.prices, remaining, DEFAULT_DEMAND_SEARCH_CAP)?
                    }
                };
                let mut branch: Option<Totals<S>> = None;
                for bundle in candidates {
                    let tail = self.value(rest, remaining.difference(bundle))?;
                    let value = v.eval(bundle);
                    let pay: S = bundle.iter().map(|j| &self.prices[j]).sum();
                    let t = Totals {
                        welfare: value.clone() + tail.welfare,
                        revenue: pay.clone() + tail.revenue,
                        utility: value - pay + tail.utility,
                    };
                    if branch.as_ref().is_none_or(|b| t.welfare < b.welfare) {
                        branch = Some(t);
                    }
                }
                let branch = branch.expect("demand returns at least one bundle");
                expected.welfare += p.clone() * branch.welfare;
                expected.revenue += p.clone() * branch.revenue;
                expected.utility += p.clone() * branch.utility;
            }
            if best.as_ref().is_none_or(|b| expected.welfare < b.welfare) {
                best = Some(expected);
            }
        }
        let best = best.expect("at least one buyer remains");
        self.memo.insert((buyers, remaining), best.clone());
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::WelfareAlgorithm;
    use crate::pricing::{benchmark_welfare, xos_prices_exact};
    use crate::scalar::Exact;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn running_profile() -> Vec<Valuation<Exact>> {
        vec![
            Valuation::xos(2, vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]).unwrap(),
            Valuation::additive(vec![q(1, 2), q(1, 2)]).unwrap(),
        ]
    }

    fn running_prices() -> PriceVector<Exact> {
        PriceVector::new(vec![q(1, 2), q(1, 4)]).unwrap()
    }

    #[test]
    fn consumption_order_two_then_one() {
        let profile = running_profile();
        let out = run_consumption(&profile, &running_prices(), &[1, 0]).unwrap();
        assert_eq!(
            out.sold_trace,
            vec![(1, ItemSet::singleton(1)), (0, ItemSet::singleton(0))]
        );
        assert_eq!(out.welfare, q(3, 2));
        assert_eq!(out.revenue, q(3, 4));
        assert_eq!(out.utilities, vec![q(1, 2), q(1, 4)]);
        assert_eq!(out.find_inconsistency(&profile, &running_prices()), None);
    }

    #[test]
    fn consumption_order_one_then_two() {
        let profile = running_profile();
        let out = run_consumption(&profile, &running_prices(), &[0, 1]).unwrap();
        assert_eq!(
            out.sold_trace,
            vec![(0, ItemSet::singleton(1)), (1, ItemSet::EMPTY)]
        );
        assert_eq!(out.welfare, q(1, 1));
        assert_eq!(out.find_inconsistency(&profile, &running_prices()), None);
    }

    #[test]
    fn prohibitive_prices_sell_nothing() {
        let prices = PriceVector::uniform(2, q(5, 1)).unwrap();
        let out = run_consumption(&running_profile(), &prices, &[0, 1]).unwrap();
        assert_eq!(out.welfare, q(0, 1));
        assert!(out.sold().is_empty());
    }

    #[test]
    fn bad_orders_are_rejected() {
        let p = running_prices();
        assert!(run_consumption(&running_profile(), &p, &[0]).is_err());
        assert!(run_consumption(&running_profile(), &p, &[0, 0]).is_err());
        assert!(run_consumption(&running_profile(), &p, &[0, 2]).is_err());
    }

    #[test]
    fn adversarial_ties_can_lower_welfare() {
        // additive (1/2, 1/2) at (1/2, 1/4): {b} and {a,b} tie. Taking both
        // leaves nothing for buyer 0.
        let profile = running_profile();
        let out = run_consumption_adversarial(&profile, &running_prices(), &[1, 0]).unwrap();
        assert_eq!(out.purchases.bundle(1), ItemSet::full(2));
        assert_eq!(out.welfare, q(1, 1));
        assert_eq!(out.find_inconsistency(&profile, &running_prices()), None);
    }

    #[test]
    fn all_orders_is_lexicographic() {
        assert_eq!(
            all_orders(3).unwrap(),
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0],
            ]
        );
        assert_eq!(all_orders(0).unwrap(), vec![Vec::<usize>::new()]);
        assert_eq!(all_orders(5).unwrap().len(), 120);
        assert!(all_orders(9).is_err());
    }

    #[test]
    fn deterministic_fixed_order_matches_consumption() {
        let prior = Prior::deterministic(running_profile()).unwrap();
        let est = expected_welfare(
            &prior,
            &running_prices(),
            &ArrivalPolicy::Fixed(vec![1, 0]),
            EvalMode::Exact,
            TieBreak::Canonical,
        )
        .unwrap();
        assert_eq!(est.welfare, q(3, 2));
        assert_eq!(est.revenue + est.utility_total, q(3, 2));
    }

    #[test]
    fn running_example_worst_case_and_adaptive() {
        let prior = Prior::deterministic(running_profile()).unwrap();
        let prices = running_prices();
        let worst = expected_welfare(
            &prior,
            &prices,
            &ArrivalPolicy::WorstCaseStatic,
            EvalMode::Exact,
            TieBreak::Canonical,
        )
        .unwrap();
        assert_eq!(worst.welfare, q(1, 1));
        assert_eq!(worst.order, Some(vec![0, 1]));
        let bench = benchmark_welfare(&prior, WelfareAlgorithm::ExactBruteForce).unwrap();
        assert!(worst.welfare >= bench * q(1, 2));
        assert_eq!(
            adaptive_adversary_welfare(&prior, &prices).unwrap(),
            q(1, 1)
        );
        let random = expected_welfare(
            &prior,
            &prices,
            &ArrivalPolicy::UniformRandom { seed: 1 },
            EvalMode::Exact,
            TieBreak::Canonical,
        )
        .unwrap();
        assert_eq!(random.welfare, q(5, 4));
    }

    #[test]
    fn lower_bound_instance_caps_welfare_at_one() {
        let m = 4;
        let profile = vec![
            Valuation::unit_demand(vec![q(1, 1); m]).unwrap(),
            Valuation::single_minded(m, ItemSet::full(m), q(3, 1)).unwrap(),
        ];
        for step in 0..=8 {
            let prices = PriceVector::uniform(m, q(step, 4)).unwrap();
            let out = run_consumption(&profile, &prices, &[0, 1]).unwrap();
            assert!(out.welfare <= q(1, 1));
        }
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let atom = |a, b| Valuation::additive(vec![q(a, 4), q(b, 4)]).unwrap();
        let buyer = |x, y| vec![(x, q(1, 2)), (y, q(1, 2))];
        let prior = Prior::from_atoms(vec![
            buyer(atom(4, 0), atom(1, 3)),
            buyer(atom(2, 2), atom(0, 1)),
        ])
        .unwrap();
        let prices = xos_prices_exact(&prior, WelfareAlgorithm::ExactBruteForce).unwrap();
        let policy = ArrivalPolicy::Fixed(vec![0, 1]);
        let exact = expected_welfare(
            &prior,
            &prices,
            &policy,
            EvalMode::Exact,
            TieBreak::Canonical,
        )
        .unwrap();
        let mc = expected_welfare(
            &prior,
            &prices,
            &policy,
            EvalMode::MonteCarlo {
                samples: 4000,
                seed: 9,
            },
            TieBreak::Canonical,
        )
        .unwrap();
        let se = mc.std_error.unwrap();
        let gap = (Scalar::to_f64(&mc.welfare) - Scalar::to_f64(&exact.welfare)).abs();
        assert!(gap <= 3.0 * se + 1e-12, "gap {gap}, se {se}");
        assert!(matches!(
            expected_welfare(
                &prior,
                &prices,
                &ArrivalPolicy::AdaptiveAdversary,
                EvalMode::MonteCarlo {
                    samples: 1,
                    seed: 0
                },
                TieBreak::Canonical
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn adaptive_limits_are_enforced() {
        let v = Valuation::additive(vec![q(1, 2)]).unwrap();
        let prior = Prior::deterministic(vec![v; 6]).unwrap();
        let prices = PriceVector::zeros(1);
        assert!(matches!(
            adaptive_adversary_welfare(&prior, &prices),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn misreporting_never_helps_in_running_example() {
        let profile = running_profile();
        let prices = running_prices();
        for order in all_orders(2).unwrap() {
            for buyer in 0..2 {
                for report in &profile {
                    let gain = misreport_gain(&profile, &prices, &order, buyer, report).unwrap();
                    assert!(gain <= q(0, 1));
                }
            }
        }
    }
}
