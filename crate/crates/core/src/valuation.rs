//! Buyer valuation classes and their oracles.
//!
//! Every valuation answers three kinds of queries:
//!
//! * **value**: `v(S)` for a bundle `S`;
//! * **demand**: a utility-maximizing bundle at given item prices;
//! * **representative**: an additive clause (XOS) or positive hypergraph
//!   (MPH-k) that agrees with `v` on the queried bundle and lies below `v`
//!   everywhere else.
//!
//! Additive, unit-demand and coverage valuations are XOS and answer the
//! additive-clause query directly. Single-minded valuations are positive
//! hypergraphs with one edge, so they only answer the hypergraph query.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::items::{ItemSet, MAX_ITEMS};
use crate::scalar::{convert, Scalar};

/// Bundles larger than this are not searched exhaustively by `demand`.
pub const DEFAULT_DEMAND_SEARCH_CAP: usize = 20;

fn check_weight<S: Scalar>(w: &S, what: &str) -> Result<()> {
    if !w.is_finite() {
        return Err(Error::Malformed(format!("{what} is not finite")));
    }
    if w.is_negative() {
        return Err(Error::Malformed(format!("{what} is negative ({w})")));
    }
    Ok(())
}

/// A nonnegative additive set function `A(S) = Σ_{j∈S} w_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveClause<S> {
    weights: Vec<S>,
}

impl<S: Scalar> AdditiveClause<S> {
    pub fn new(weights: Vec<S>) -> Result<Self> {
        if weights.len() > MAX_ITEMS {
            return Err(Error::Malformed(format!(
                "clause has {} items, at most {MAX_ITEMS} supported",
                weights.len()
            )));
        }
        for (j, w) in weights.iter().enumerate() {
            check_weight(w, &format!("weight of item {j}"))?;
        }
        Ok(AdditiveClause { weights })
    }

    pub fn zero(items: usize) -> Self {
        AdditiveClause {
            weights: vec![S::zero(); items],
        }
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, item: usize) -> &S {
        &self.weights[item]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn value(&self, set: ItemSet) -> S {
        set.iter().map(|j| &self.weights[j]).sum()
    }

    /// The same clause with every weight outside `set` zeroed.
    pub fn restrict(&self, set: ItemSet) -> Self {
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| {
                if set.contains(j) {
                    w.clone()
                } else {
                    S::zero()
                }
            })
            .collect();
        AdditiveClause { weights }
    }

    fn scaled(&self, factor: &S) -> Self {
        AdditiveClause {
            weights: self
                .weights
                .iter()
                .map(|w| w.clone() * factor.clone())
                .collect(),
        }
    }
}

/// A positive hypergraph function `h(S) = Σ_{T⊆S} w(T)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypergraph<S> {
    edges: Vec<(ItemSet, S)>,
}

impl<S: Scalar> Hypergraph<S> {
    /// Edges must be nonempty with nonnegative weight.
    pub fn new(edges: Vec<(ItemSet, S)>) -> Result<Self> {
        for (n, (edge, w)) in edges.iter().enumerate() {
            if edge.is_empty() {
                return Err(Error::Malformed(format!("hyperedge {n} is empty")));
            }
            check_weight(w, &format!("weight of hyperedge {n}"))?;
        }
        Ok(Hypergraph { edges })
    }

    pub fn empty() -> Self {
        Hypergraph { edges: Vec::new() }
    }

    /// Singleton edges carrying the nonzero weights of `clause`.
    pub fn from_clause(clause: &AdditiveClause<S>) -> Self {
        let edges = clause
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(j, w)| (ItemSet::singleton(j), w.clone()))
            .collect();
        Hypergraph { edges }
    }

    pub fn edges(&self) -> &[(ItemSet, S)] {
        &self.edges
    }

    /// Largest edge cardinality (0 when there are no edges).
    pub fn rank(&self) -> usize {
        self.edges.iter().map(|(e, _)| e.len()).max().unwrap_or(0)
    }

    pub fn value(&self, set: ItemSet) -> S {
        self.edges
            .iter()
            .filter(|(e, _)| e.is_subset(set))
            .map(|(_, w)| w)
            .sum()
    }

    /// Keeps only the edges contained in `set`.
    pub fn restrict(&self, set: ItemSet) -> Self {
        Hypergraph {
            edges: self
                .edges
                .iter()
                .filter(|(e, _)| e.is_subset(set))
                .cloned()
                .collect(),
        }
    }

    fn span(&self) -> usize {
        self.edges.iter().map(|(e, _)| e.span()).max().unwrap_or(0)
    }

    fn scaled(&self, factor: &S) -> Self {
        Hypergraph {
            edges: self
                .edges
                .iter()
                .map(|(e, w)| (*e, w.clone() * factor.clone()))
                .collect(),
        }
    }
}

/// Weighted coverage: item `j` covers the universe elements `covers[j]`
/// and `v(S)` is the total weight of elements covered by some item of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage<S> {
    universe: Vec<S>,
    covers: Vec<ItemSet>,
}

impl<S: Scalar> Coverage<S> {
    pub fn new(universe: Vec<S>, covers: Vec<ItemSet>) -> Result<Self> {
        if universe.len() > MAX_ITEMS {
            return Err(Error::Malformed(format!(
                "coverage universe has {} elements, at most {MAX_ITEMS} supported",
                universe.len()
            )));
        }
        for (e, w) in universe.iter().enumerate() {
            check_weight(w, &format!("weight of universe element {e}"))?;
        }
        for (j, c) in covers.iter().enumerate() {
            if c.span() > universe.len() {
                return Err(Error::Malformed(format!(
                    "item {j} covers element {} outside the universe",
                    c.span() - 1
                )));
            }
        }
        Ok(Coverage { universe, covers })
    }

    pub fn universe(&self) -> &[S] {
        &self.universe
    }

    pub fn covers(&self) -> &[ItemSet] {
        &self.covers
    }

    fn covered(&self, set: ItemSet) -> ItemSet {
        set.iter()
            .fold(ItemSet::EMPTY, |acc, j| acc.union(self.covers[j]))
    }

    fn weight_of(&self, elements: ItemSet) -> S {
        elements.iter().map(|e| &self.universe[e]).sum()
    }

    /// Credits each covered element to the first item of `set` (ascending
    /// index) that covers it.
    fn clause(&self, set: ItemSet) -> AdditiveClause<S> {
        let mut weights = vec![S::zero(); self.covers.len()];
        let mut seen = ItemSet::EMPTY;
        for j in set {
            let fresh = self.covers[j].difference(seen);
            weights[j] = self.weight_of(fresh);
            seen = seen.union(fresh);
        }
        AdditiveClause { weights }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValuationKind<S> {
    Additive(AdditiveClause<S>),
    /// Value of a bundle is its best single item.
    UnitDemand(Vec<S>),
    /// `value` if the bundle contains `target`, else 0.
    SingleMinded {
        target: ItemSet,
        value: S,
    },
    Coverage(Coverage<S>),
    /// Pointwise maximum of additive clauses.
    Xos(Vec<AdditiveClause<S>>),
    /// Pointwise maximum of positive hypergraphs of rank at most `rank`.
    Mph {
        rank: usize,
        candidates: Vec<Hypergraph<S>>,
    },
}

/// One buyer's monotone set function over `items` items.
#[derive(Clone, Debug, PartialEq)]
pub struct Valuation<S> {
    items: usize,
    kind: ValuationKind<S>,
}

impl<S: Scalar> Valuation<S> {
    /// Validates `kind` against an `items`-item market.
    pub fn new(items: usize, kind: ValuationKind<S>) -> Result<Self> {
        if items > MAX_ITEMS {
            return Err(Error::Malformed(format!(
                "{items} items requested, at most {MAX_ITEMS} supported"
            )));
        }
        let len_check = |len: usize, what: &str| {
            if len == items {
                Ok(())
            } else {
                Err(Error::Malformed(format!(
                    "{what} has {len} entries but the market has {items} items"
                )))
            }
        };
        match &kind {
            ValuationKind::Additive(c) => len_check(c.len(), "additive weights")?,
            ValuationKind::UnitDemand(values) => {
                len_check(values.len(), "unit-demand values")?;
                for (j, w) in values.iter().enumerate() {
                    check_weight(w, &format!("unit-demand value of item {j}"))?;
                }
            }
            ValuationKind::SingleMinded { target, value } => {
                if target.span() > items {
                    return Err(Error::ItemOutOfRange {
                        item: target.span() - 1,
                        items,
                    });
                }
                if target.is_empty() {
                    return Err(Error::Malformed("single-minded target is empty".into()));
                }
                check_weight(value, "single-minded value")?;
            }
            ValuationKind::Coverage(c) => len_check(c.covers.len(), "coverage item list")?,
            ValuationKind::Xos(clauses) => {
                if clauses.is_empty() {
                    return Err(Error::Malformed("XOS valuation has no clauses".into()));
                }
                for c in clauses {
                    len_check(c.len(), "XOS clause")?;
                }
            }
            ValuationKind::Mph { rank, candidates } => {
                if *rank == 0 {
                    return Err(Error::Malformed("MPH rank must be at least 1".into()));
                }
                if candidates.is_empty() {
                    return Err(Error::Malformed("MPH valuation has no candidates".into()));
                }
                for (n, h) in candidates.iter().enumerate() {
                    if h.span() > items {
                        return Err(Error::ItemOutOfRange {
                            item: h.span() - 1,
                            items,
                        });
                    }
                    if h.rank() > *rank {
                        return Err(Error::Malformed(format!(
                            "candidate {n} has an edge of size {} above the declared rank {rank}",
                            h.rank()
                        )));
                    }
                }
            }
        }
        Ok(Valuation { items, kind })
    }

    pub fn additive(weights: Vec<S>) -> Result<Self> {
        let items = weights.len();
        Self::new(
            items,
            ValuationKind::Additive(AdditiveClause::new(weights)?),
        )
    }

    pub fn unit_demand(values: Vec<S>) -> Result<Self> {
        Self::new(values.len(), ValuationKind::UnitDemand(values))
    }

    pub fn single_minded(items: usize, target: ItemSet, value: S) -> Result<Self> {
        Self::new(items, ValuationKind::SingleMinded { target, value })
    }

    pub fn coverage(universe: Vec<S>, covers: Vec<ItemSet>) -> Result<Self> {
        let items = covers.len();
        Self::new(
            items,
            ValuationKind::Coverage(Coverage::new(universe, covers)?),
        )
    }

    /// XOS valuation from raw clause weight vectors.
    pub fn xos(items: usize, clauses: Vec<Vec<S>>) -> Result<Self> {
        let clauses = clauses
            .into_iter()
            .map(AdditiveClause::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(items, ValuationKind::Xos(clauses))
    }

    pub fn mph(items: usize, rank: usize, candidates: Vec<Hypergraph<S>>) -> Result<Self> {
        Self::new(items, ValuationKind::Mph { rank, candidates })
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn kind(&self) -> &ValuationKind<S> {
        &self.kind
    }

    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            ValuationKind::Additive(_) => "additive",
            ValuationKind::UnitDemand(_) => "unit-demand",
            ValuationKind::SingleMinded { .. } => "single-minded",
            ValuationKind::Coverage(_) => "coverage",
            ValuationKind::Xos(_) => "XOS",
            ValuationKind::Mph { .. } => "MPH",
        }
    }

    /// True for classes that answer the additive-clause query.
    pub fn is_xos(&self) -> bool {
        !matches!(
            self.kind,
            ValuationKind::SingleMinded { .. } | ValuationKind::Mph { .. }
        )
    }

    /// Upper bound on the rank of any hypergraph returned by
    /// [`mph_clause`](Self::mph_clause).
    pub fn hypergraph_rank(&self) -> usize {
        match &self.kind {
            ValuationKind::SingleMinded { target, .. } => target.len(),
            ValuationKind::Mph { rank, .. } => *rank,
            _ => 1,
        }
    }

    fn check_set(&self, set: ItemSet) -> Result<()> {
        if set.span() > self.items {
            Err(Error::ItemOutOfRange {
                item: set.span() - 1,
                items: self.items,
            })
        } else {
            Ok(())
        }
    }

    /// `v(S)`.
    pub fn value(&self, set: ItemSet) -> Result<S> {
        self.check_set(set)?;
        Ok(self.eval(set))
    }

    /// `v(S)` without the range check.
    pub(crate) fn eval(&self, set: ItemSet) -> S {
        match &self.kind {
            ValuationKind::Additive(c) => c.value(set),
            ValuationKind::UnitDemand(values) => set
                .iter()
                .map(|j| values[j].clone())
                .fold(S::zero(), S::max_of),
            ValuationKind::SingleMinded { target, value } => {
                if target.is_subset(set) {
                    value.clone()
                } else {
                    S::zero()
                }
            }
            ValuationKind::Coverage(c) => c.weight_of(c.covered(set)),
            ValuationKind::Xos(clauses) => clauses
                .iter()
                .map(|c| c.value(set))
                .fold(S::zero(), S::max_of),
            ValuationKind::Mph { candidates, .. } => candidates
                .iter()
                .map(|h| h.value(set))
                .fold(S::zero(), S::max_of),
        }
    }

    /// `v(M)`.
    pub fn grand_value(&self) -> S {
        self.eval(ItemSet::full(self.items))
    }

    /// The same valuation multiplied by a nonnegative constant.
    pub fn scaled(&self, factor: &S) -> Self {
        let kind = match &self.kind {
            ValuationKind::Additive(c) => ValuationKind::Additive(c.scaled(factor)),
            ValuationKind::UnitDemand(values) => ValuationKind::UnitDemand(
                values.iter().map(|v| v.clone() * factor.clone()).collect(),
            ),
            ValuationKind::SingleMinded { target, value } => ValuationKind::SingleMinded {
                target: *target,
                value: value.clone() * factor.clone(),
            },
            ValuationKind::Coverage(c) => ValuationKind::Coverage(Coverage {
                universe: c
                    .universe
                    .iter()
                    .map(|w| w.clone() * factor.clone())
                    .collect(),
                covers: c.covers.clone(),
            }),
            ValuationKind::Xos(clauses) => {
                ValuationKind::Xos(clauses.iter().map(|c| c.scaled(factor)).collect())
            }
            ValuationKind::Mph { rank, candidates } => ValuationKind::Mph {
                rank: *rank,
                candidates: candidates.iter().map(|h| h.scaled(factor)).collect(),
            },
        };
        Valuation {
            items: self.items,
            kind,
        }
    }

    /// The same valuation over another numeric backend.
    pub fn convert<T: Scalar>(&self) -> Valuation<T> {
        let c = |x: &S| convert::<S, T>(x);
        let clause = |a: &AdditiveClause<S>| AdditiveClause {
            weights: a.weights.iter().map(c).collect(),
        };
        let kind = match &self.kind {
            ValuationKind::Additive(a) => ValuationKind::Additive(clause(a)),
            ValuationKind::UnitDemand(values) => {
                ValuationKind::UnitDemand(values.iter().map(c).collect())
            }
            ValuationKind::SingleMinded { target, value } => ValuationKind::SingleMinded {
                target: *target,
                value: c(value),
            },
            ValuationKind::Coverage(cov) => ValuationKind::Coverage(Coverage {
                universe: cov.universe.iter().map(c).collect(),
                covers: cov.covers.clone(),
            }),
            ValuationKind::Xos(clauses) => ValuationKind::Xos(clauses.iter().map(clause).collect()),
            ValuationKind::Mph { rank, candidates } => ValuationKind::Mph {
                rank: *rank,
                candidates: candidates
                    .iter()
                    .map(|h| Hypergraph {
                        edges: h.edges.iter().map(|(e, w)| (*e, c(w))).collect(),
                    })
                    .collect(),
            },
        };
        Valuation {
            items: self.items,
            kind,
        }
    }

    /// Checks `v(S) <= v(S ∪ {j})` over the whole lattice. Only feasible
    /// for small markets; returns the first violating pair.
    pub fn find_monotonicity_violation(&self) -> Option<(ItemSet, usize)> {
        let full = ItemSet::full(self.items);
        for set in full.subsets() {
            let base = self.eval(set);
            for j in full.difference(set) {
                let mut bigger = set;
                bigger.insert(j);
                if self.eval(bigger) < base {
                    return Some((set, j));
                }
            }
        }
        None
    }

    fn check_prices(&self, prices: &[S]) -> Result<()> {
        if prices.len() != self.items {
            return Err(Error::Malformed(format!(
                "price vector has {} entries but the market has {} items",
                prices.len(),
                self.items
            )));
        }
        Ok(())
    }

    /// A utility-maximizing bundle among `available` at `prices`.
    ///
    /// Ties go to the bundle with the fewest items, then to the
    /// lexicographically smallest item sequence; in particular a buyer
    /// never buys a nonempty bundle at zero utility.
    pub fn demand(&self, prices: &[S], available: ItemSet) -> Result<ItemSet> {
        self.demand_with_cap(prices, available, DEFAULT_DEMAND_SEARCH_CAP)
    }

    pub fn demand_with_cap(
        &self,
        prices: &[S],
        available: ItemSet,
        search_cap: usize,
    ) -> Result<ItemSet> {
        self.check_prices(prices)?;
        self.check_set(available)?;
        match &self.kind {
            ValuationKind::Additive(c) => Ok(available
                .iter()
                .filter(|&j| c.weights[j] > prices[j])
                .fold(ItemSet::EMPTY, |mut acc, j| {
                    acc.insert(j);
                    acc
                })),
            ValuationKind::UnitDemand(values) => {
                let mut best: Option<(usize, S)> = None;
                for j in available {
                    let surplus = values[j].clone() - prices[j].clone();
                    if surplus > S::zero() && best.as_ref().is_none_or(|(_, b)| surplus > *b) {
                        best = Some((j, surplus));
                    }
                }
                Ok(best.map_or(ItemSet::EMPTY, |(j, _)| ItemSet::singleton(j)))
            }
            ValuationKind::SingleMinded { target, value } => {
                let cost: S = target.iter().map(|j| &prices[j]).sum();
                if target.is_subset(available) && value.clone() - cost > S::zero() {
                    Ok(*target)
                } else {
                    Ok(ItemSet::EMPTY)
                }
            }
            _ => self.demand_exhaustive(prices, available, search_cap),
        }
    }

    /// Demand by enumerating every subset of `available`, for any variant.
    pub fn demand_exhaustive(
        &self,
        prices: &[S],
        available: ItemSet,
        search_cap: usize,
    ) -> Result<ItemSet> {
        self.check_prices(prices)?;
        self.check_set(available)?;
        if available.len() > search_cap {
            return Err(Error::capacity(
                "exhaustive demand search (available items)",
                available.len() as u128,
                search_cap as u128,
            ));
        }
        let mut best = ItemSet::EMPTY;
        let mut best_utility = S::zero();
        for set in available.subsets().skip(1) {
            let utility = self.utility(prices, set);
            if utility > best_utility
                || (utility == best_utility && set.canonical_cmp(best).is_lt())
            {
                best = set;
                best_utility = utility;
            }
        }
        Ok(best)
    }

    /// Every utility-maximizing bundle among `available`, in canonical order.
    pub fn demand_correspondence(
        &self,
        prices: &[S],
        available: ItemSet,
        search_cap: usize,
    ) -> Result<Vec<ItemSet>> {
        self.check_prices(prices)?;
        self.check_set(available)?;
        if available.len() > search_cap {
            return Err(Error::capacity(
                "demand correspondence (available items)",
                available.len() as u128,
                search_cap as u128,
            ));
        }
        let mut best_utility = S::zero();
        let mut argmax = vec![ItemSet::EMPTY];
        for set in available.subsets().skip(1) {
            let utility = self.utility(prices, set);
            if utility > best_utility {
                best_utility = utility;
                argmax.clear();
                argmax.push(set);
            } else if utility == best_utility {
                argmax.push(set);
            }
        }
        argmax.sort_by(|a, b| a.canonical_cmp(*b));
        Ok(argmax)
    }

    /// Quasi-linear utility `v(S) - Σ_{j∈S} p_j`.
    pub fn utility(&self, prices: &[S], set: ItemSet) -> S {
        let cost: S = set.iter().map(|j| &prices[j]).sum();
        self.eval(set) - cost
    }

    /// Additive representative for `set`: a clause `A` with `A(set) = v(set)`
    /// and `A(T) <= v(T)` for every `T`, zero outside `set`.
    pub fn xos_clause(&self, set: ItemSet) -> Result<AdditiveClause<S>> {
        self.check_set(set)?;
        let clause = match &self.kind {
            ValuationKind::Additive(c) => c.restrict(set),
            ValuationKind::UnitDemand(values) => {
                let mut clause = AdditiveClause::zero(self.items);
                let mut best: Option<usize> = None;
                for j in set {
                    if best.is_none_or(|b| values[j] > values[b]) {
                        best = Some(j);
                    }
                }
                if let Some(j) = best {
                    clause.weights[j] = values[j].clone();
                }
                clause
            }
            ValuationKind::Coverage(c) => c.clause(set),
            ValuationKind::Xos(clauses) => {
                let mut best = &clauses[0];
                let mut best_value = best.value(set);
                for c in &clauses[1..] {
                    let v = c.value(set);
                    if v > best_value {
                        best = c;
                        best_value = v;
                    }
                }
                best.restrict(set)
            }
            ValuationKind::SingleMinded { .. } | ValuationKind::Mph { .. } => {
                return Err(Error::WrongOracle {
                    oracle: "XOS",
                    variant: self.variant_name(),
                })
            }
        };
        Ok(clause)
    }

    /// Hypergraph representative for `set`: nonnegative edges inside `set`,
    /// rank at most [`hypergraph_rank`](Self::hypergraph_rank), agreeing
    /// with `v` on `set` and lying below `v` everywhere.
    pub fn mph_clause(&self, set: ItemSet) -> Result<Hypergraph<S>> {
        self.check_set(set)?;
        match &self.kind {
            ValuationKind::SingleMinded { target, value } => {
                if target.is_subset(set) && !value.is_zero() {
                    Ok(Hypergraph {
                        edges: vec![(*target, value.clone())],
                    })
                } else {
                    Ok(Hypergraph::empty())
                }
            }
            ValuationKind::Mph { candidates, .. } => {
                let mut best = &candidates[0];
                let mut best_value = best.value(set);
                for h in &candidates[1..] {
                    let v = h.value(set);
                    if v > best_value {
                        best = h;
                        best_value = v;
                    }
                }
                Ok(best.restrict(set))
            }
            _ => Ok(Hypergraph::from_clause(&self.xos_clause(set)?)),
        }
    }
}

/// Per-item welfare contributions of an allocation: item `j` held by buyer
/// `i` contributes `A_i({j})`, where `A_i` is buyer `i`'s additive
/// representative for their bundle. Unallocated items contribute 0.
pub fn sw_contributions<S: Scalar>(
    profile: &[Valuation<S>],
    allocation: &Allocation,
) -> Result<Vec<S>> {
    let items = profile.first().map_or(0, |v| v.items());
    allocation.validate(profile.len(), items)?;
    let mut contributions = vec![S::zero(); items];
    for (v, &bundle) in profile.iter().zip(allocation.bundles()) {
        if bundle.is_empty() {
            continue;
        }
        let clause = v.xos_clause(bundle)?;
        for j in bundle {
            contributions[j] = clause.weight(j).clone();
        }
    }
    Ok(contributions)
}
