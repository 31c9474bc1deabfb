//! Anonymous item prices from a prior and a welfare algorithm.
//!
//! XOS prices charge each item half of its expected contribution to the
//! welfare of the black-box allocation. MPH-k prices split each hyperedge of
//! the owner's representative hypergraph evenly over its items and scale the
//! result by `1/alpha`. Both come in an exact form (expectation over the
//! enumerated support) and a sampled form whose sample count gives a
//! per-item accuracy guarantee for valuations normalized to `v(M) <= 1`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use rand::Rng;

use crate::allocation::{Allocation, WelfareAlgorithm};
use crate::bayes::{Prior, DEFAULT_SUPPORT_CAP};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::valuation::{sw_contributions, Valuation};

/// Nonnegative, finite per-item prices.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceVector<S>(Vec<S>);

impl<S: Scalar> PriceVector<S> {
    pub fn new(prices: Vec<S>) -> Result<Self> {
        for (j, p) in prices.iter().enumerate() {
            if !p.is_finite() || p.is_negative() {
                return Err(Error::Malformed(format!("price of item {j} is {p}")));
            }
        }
        Ok(PriceVector(prices))
    }

    pub fn zeros(items: usize) -> Self {
        PriceVector(vec![S::zero(); items])
    }

    /// The same price on every item.
    pub fn uniform(items: usize, price: S) -> Result<Self> {
        Self::new(vec![price; items])
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }

    pub fn total(&self) -> S {
        self.0.iter().sum()
    }

    /// Largest per-item absolute difference.
    pub fn max_deviation(&self, other: &PriceVector<S>) -> S {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(S::zero(), S::max_of)
    }

    pub fn scaled(&self, factor: &S) -> Self {
        PriceVector(self.0.iter().map(|p| p.clone() * factor.clone()).collect())
    }
}

impl<S> Deref for PriceVector<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriceFamily {
    Xos,
    /// Hypergraph prices for valuations of rank at most `k`.
    Mph {
        k: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PricingMode {
    Exact,
    /// Monte-Carlo estimate with the sample count derived from `epsilon`.
    /// `per_item` draws a fresh sample pool for every item instead of
    /// sharing one pool across items.
    Sampled {
        epsilon: f64,
        seed: u64,
        per_item: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PricingConfig {
    pub family: PriceFamily,
    pub mode: PricingMode,
    /// Price scale-down factor for the MPH family.
    pub alpha: f64,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig {
            family: PriceFamily::Xos,
            mode: PricingMode::Exact,
            alpha: 2.0,
        }
    }
}

impl PricingConfig {
    pub fn validate(&self) -> Result<()> {
        if let PricingMode::Sampled { epsilon, .. } = self.mode {
            check_epsilon(epsilon)?;
        }
        if let PriceFamily::Mph { k } = self.family {
            if k == 0 {
                return Err(Error::Config("MPH rank k must be at least 1".into()));
            }
            check_alpha(k, self.alpha)?;
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "epsilon must be positive, got {epsilon}"
        )))
    }
}

fn check_alpha(k: usize, alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha * k as f64 >= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "alpha = {alpha} with k = {k} violates alpha * k >= 1"
        )))
    }
}

/// Number of sampled profiles
/// `ceil((ln m + ln n - ln eps) * c * m^2 / eps^2)`, at least 1.
///
/// `c = 4` gives per-item accuracy `eps / 2m` for XOS prices and `c = 16`
/// gives `eps / 4m` for MPH prices, each failing with probability below
/// `eps / n` over all items jointly.
pub fn sample_count(items: usize, buyers: usize, epsilon: f64, constant: f64) -> Result<u64> {
    check_epsilon(epsilon)?;
    if items == 0 || buyers == 0 {
        return Err(Error::Config(
            "sample count needs at least one item and one buyer".into(),
        ));
    }
    let m = items as f64;
    let n = buyers as f64;
    let log_term = libm::log(m) + libm::log(n) - libm::log(epsilon);
    let t = libm::ceil(log_term * constant * m * m / (epsilon * epsilon));
    if !t.is_finite() || t > u64::MAX as f64 {
        return Err(Error::Config(format!(
            "sample count for epsilon = {epsilon} overflows"
        )));
    }
    Ok((t as u64).max(1))
}

pub fn xos_sample_count(items: usize, buyers: usize, epsilon: f64) -> Result<u64> {
    sample_count(items, buyers, epsilon, 4.0)
}

pub fn mph_sample_count(items: usize, buyers: usize, epsilon: f64) -> Result<u64> {
    sample_count(items, buyers, epsilon, 16.0)
}

/// Prices together with the number of samples behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct PricingOutcome<S> {
    pub prices: PriceVector<S>,
    /// Profiles drawn per item, or `None` in exact mode.
    pub samples: Option<u64>,
}

/// `E[SW(A(v))]` over the enumerated support.
pub fn benchmark_welfare<S: Scalar>(prior: &Prior<S>, alg: WelfareAlgorithm) -> Result<S> {
    let mut total = S::zero();
    for draw in prior.support_iter(DEFAULT_SUPPORT_CAP)? {
        let alloc = alg.solve(&draw.profile)?;
        total += draw.probability * alloc.welfare(&draw.profile);
    }
    Ok(total)
}

fn half<S: Scalar>() -> S {
    S::from_ratio(1, 2)
}

/// Expectation of a per-profile price rule over the enumerated support.
fn exact_expectation<S: Scalar>(
    prior: &Prior<S>,
    alg: WelfareAlgorithm,
    rule: impl Fn(&[Valuation<S>], &Allocation) -> Result<Vec<S>>,
) -> Result<Vec<S>> {
    let mut acc = vec![S::zero(); prior.items()];
    for draw in prior.support_iter(DEFAULT_SUPPORT_CAP)? {
        let alloc = alg.solve(&draw.profile)?;
        let per_item = rule(&draw.profile, &alloc)?;
        for (a, x) in acc.iter_mut().zip(per_item) {
            *a += draw.probability.clone() * x;
        }
    }
    Ok(acc)
}

/// Sample average of a per-profile price rule.
fn sampled_average<S: Scalar, R: Rng + ?Sized>(
    prior: &Prior<S>,
    alg: WelfareAlgorithm,
    samples: u64,
    per_item: bool,
    rng: &mut R,
    rule: impl Fn(&[Valuation<S>], &Allocation) -> Result<Vec<S>>,
) -> Result<Vec<S>> {
    let items = prior.items();
    let mut acc = vec![S::zero(); items];
    if per_item {
        for (j, a) in acc.iter_mut().enumerate() {
            for _ in 0..samples {
                let draw = prior.sample_profile(rng);
                let alloc = alg.solve(&draw.profile)?;
                *a += rule(&draw.profile, &alloc)?.swap_remove(j);
            }
        }
    } else {
        for _ in 0..samples {
            let draw = prior.sample_profile(rng);
            let alloc = alg.solve(&draw.profile)?;
            for (a, x) in acc.iter_mut().zip(rule(&draw.profile, &alloc)?) {
                *a += x;
            }
        }
    }
    let t = S::from_f64(samples as f64)
        .ok_or_else(|| Error::Config("sample count is not representable".into()))?;
    Ok(acc.into_iter().map(|a| a / t.clone()).collect())
}

/// `p_j = E[SW_j(v)] / 2`, exactly.
pub fn xos_prices_exact<S: Scalar>(
    prior: &Prior<S>,
    alg: WelfareAlgorithm,
) -> Result<PriceVector<S>> {
    let sums = exact_expectation(prior, alg, sw_contributions)?;
    PriceVector::new(sums.into_iter().map(|x| x * half()).collect())
}

/// Sampled XOS prices: half the average observed contribution of each item
/// over [`xos_sample_count`] profiles. Values must be normalized to
/// `v(M) <= 1` so the accuracy guarantee applies.
pub fn xos_prices_sampled<S: Scalar, R: Rng + ?Sized>(
    prior: &Prior<S>,
    alg: WelfareAlgorithm,
    epsilon: f64,
    per_item: bool,
    rng: &mut R,
) -> Result<PricingOutcome<S>> {
    let samples = xos_sample_count(prior.items(), prior.num_buyers(), epsilon)?;
    require_normalized(prior)?;
    let means = sampled_average(prior, alg, samples, per_item, rng, sw_contributions)?;
    Ok(PricingOutcome {
        prices: PriceVector::new(means.into_iter().map(|x| x * half()).collect())?,
        samples: Some(samples),
    })
}

fn require_normalized<S: Scalar>(prior: &Prior<S>) -> Result<()> {
    if prior.is_normalized() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "sampled pricing needs v(M) <= 1 for every atom (largest is {}); normalize the prior first",
            prior.max_grand_value()
        )))
    }
}

/// Full-information MPH prices for one profile: every hyperedge `T` of
/// buyer `i`'s representative hypergraph on `X_i` puts `w(T) / |T|` on each
/// of its items, and the totals are divided by `alpha`.
pub fn mph_profile_prices<S: Scalar>(
    profile: &[Valuation<S>],
    allocation: &Allocation,
    k: usize,
    alpha: f64,
) -> Result<PriceVector<S>> {
    check_alpha(k, alpha)?;
    let alpha = S::from_f64(alpha).ok_or_else(|| Error::Config("alpha is not finite".into()))?;
    PriceVector::new(
        mph_profile_contributions(profile, allocation, k)?
            .into_iter()
            .map(|x| x / alpha.clone())
            .collect(),
    )
}

/// Per-item hyperedge weight shares, before the `1/alpha` scaling.
fn mph_profile_contributions<S: Scalar>(
    profile: &[Valuation<S>],
    allocation: &Allocation,
    k: usize,
) -> Result<Vec<S>> {
    let items = profile.first().map_or(0, |v| v.items());
    allocation.validate(profile.len(), items)?;
    let mut shares = vec![S::zero(); items];
    for (i, (v, &bundle)) in profile.iter().zip(allocation.bundles()).enumerate() {
        if bundle.is_empty() {
            continue;
        }
        let graph = v.mph_clause(bundle)?;
        if graph.rank() > k {
            return Err(Error::Config(format!(
                "buyer {i} has a representative hyperedge of size {} above k = {k}",
                graph.rank()
            )));
        }
        for (edge, w) in graph.edges() {
            let share = w.clone() / S::from_usize(edge.len());
            for j in *edge {
                shares[j] += share.clone();
            }
        }
    }
    Ok(shares)
}

/// `p_j = E[p_j(v)]` for the MPH rule, exact or sampled per `cfg.mode`.
pub fn mph_prices<S: Scalar>(
    prior: &Prior<S>,
    alg: WelfareAlgorithm,
    cfg: &PricingConfig,
) -> Result<PricingOutcome<S>> {
    cfg.validate()?;
    let PriceFamily::Mph { k } = cfg.family else {
        return Err(Error::Config(
            "mph_prices called with a non-MPH price family".into(),
        ));
    };
    let alpha =
        S::from_f64(cfg.alpha).ok_or_else(|| Error::Config("alpha is not finite".into()))?;
    let rule = |p: &[Valuation<S>], a: &Allocation| mph_profile_contributions(p, a, k);
    let (shares, samples) = match cfg.mode {
        PricingMode::Exact => (exact_expectation(prior, alg, rule)?, None),
        PricingMode::Sampled {
            epsilon,
            seed,
            per_item,
        } => {
            let t = mph_sample_count(prior.items(), prior.num_buyers(), epsilon)?;
            require_normalized(prior)?;
            let mut rng = stream_rng(seed, 0);
            (
                sampled_average(prior, alg, t, per_item, &mut rng, rule)?,
                Some(t),
            )
        }
    };
    Ok(PricingOutcome {
        prices: PriceVector::new(shares.into_iter().map(|x| x / alpha.clone()).collect())?,
        samples,
    })
}

/// Prices for any configuration.
pub fn compute_prices<S: Scalar>(
    prior: &Prior<S>,
    alg: WelfareAlgorithm,
    cfg: &PricingConfig,
) -> Result<PricingOutcome<S>> {
    cfg.validate()?;
    match (cfg.family, cfg.mode) {
        (PriceFamily::Xos, PricingMode::Exact) => Ok(PricingOutcome {
            prices: xos_prices_exact(prior, alg)?,
            samples: None,
        }),
        (
            PriceFamily::Xos,
            PricingMode::Sampled {
                epsilon,
                seed,
                per_item,
            },
        ) => {
            let mut rng = stream_rng(seed, 0);
            xos_prices_sampled(prior, alg, epsilon, per_item, &mut rng)
        }
        (PriceFamily::Mph { .. }, _) => mph_prices(prior, alg, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::items::ItemSet;
    use crate::scalar::Exact;
    use crate::valuation::Hypergraph;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn running_profile() -> Vec<Valuation<Exact>> {
        vec![
            Valuation::xos(2, vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]]).unwrap(),
            Valuation::additive(vec![q(1, 2), q(1, 2)]).unwrap(),
        ]
    }

    #[test]
    fn sample_count_formula() {
        // (ln 2 + ln 2 - ln 0.1) * 4 * 4 / 0.01 = 5902.2...
        assert_eq!(xos_sample_count(2, 2, 0.1).unwrap(), 5903);
        // (ln 2 + ln 2 - ln 0.2) * 16 * 4 / 0.04 = 4793.2...
        assert_eq!(mph_sample_count(2, 2, 0.2).unwrap(), 4794);
        assert!(xos_sample_count(2, 2, 0.0).is_err());
        assert!(xos_sample_count(2, 2, -1.0).is_err());
        assert_eq!(xos_sample_count(1, 1, 1.0).unwrap(), 1);
    }

    #[test]
    fn running_example_prices() {
        let prior = Prior::deterministic(running_profile()).unwrap();
        let p = xos_prices_exact(&prior, WelfareAlgorithm::ExactBruteForce).unwrap();
        assert_eq!(p.as_slice(), &[q(1, 2), q(1, 4)]);
        let bench = benchmark_welfare(&prior, WelfareAlgorithm::ExactBruteForce).unwrap();
        assert_eq!(p.total(), bench * q(1, 2));
    }

    #[test]
    fn worthless_item_is_free() {
        let profile = vec![
            Valuation::additive(vec![q(1, 1), q(0, 1)]).unwrap(),
            Valuation::xos(2, vec![vec![q(1, 3), q(0, 1)]]).unwrap(),
        ];
        let prior = Prior::deterministic(profile).unwrap();
        let p = xos_prices_exact(&prior, WelfareAlgorithm::ExactBruteForce).unwrap();
        assert_eq!(p[1], q(0, 1));
    }

    #[test]
    fn single_item_price_is_half_expected_maximum() {
        // three i.i.d. buyers, value 3 w.p. 1/4 else 1
        let atom = |v| Valuation::additive(vec![q(v, 1)]).unwrap();
        let buyer = vec![(atom(3), q(1, 4)), (atom(1), q(3, 4))];
        let prior = Prior::from_atoms(vec![buyer; 3]).unwrap();
        let p = xos_prices_exact(&prior, WelfareAlgorithm::ExactBruteForce).unwrap();
        // oracle: enumerate the 8 profiles and average the maximum
        let mut expected_max = q(0, 1);
        for mask in 0u32..8 {
            let highs = mask.count_ones() as i64;
            let prob = q(1, 4).pow(highs as i32) * q(3, 4).pow(3 - highs as i32);
            let max = if highs > 0 { q(3, 1) } else { q(1, 1) };
            expected_max += prob * max;
        }
        assert_eq!(p[0], expected_max * q(1, 2));
    }

    #[test]
    fn sampled_prices_of_deterministic_prior_are_exact() {
        let prior = Prior::deterministic(running_profile()).unwrap();
        let exact = xos_prices_exact(&prior, WelfareAlgorithm::ExactBruteForce).unwrap();
        let mut rng = stream_rng(5, 0);
        let sampled = xos_prices_sampled(
            &prior,
            WelfareAlgorithm::ExactBruteForce,
            0.5,
            false,
            &mut rng,
        )
        .unwrap();
        assert_eq!(sampled.prices, exact);
        assert_eq!(sampled.samples, Some(xos_sample_count(2, 2, 0.5).unwrap()));
        let strict = xos_prices_sampled(
            &prior,
            WelfareAlgorithm::ExactBruteForce,
            0.5,
            true,
            &mut rng,
        )
        .unwrap();
        assert_eq!(strict.prices, exact);
    }

    #[test]
    fn sampled_prices_reject_bad_inputs() {
        let big = Prior::deterministic(vec![Valuation::additive(vec![q(2, 1)]).unwrap()]).unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(matches!(
            xos_prices_sampled(
                &big,
                WelfareAlgorithm::ExactBruteForce,
                0.5,
                false,
                &mut rng
            ),
            Err(Error::Config(_))
        ));
        let prior = Prior::deterministic(running_profile()).unwrap();
        assert!(matches!(
            xos_prices_sampled(
                &prior,
                WelfareAlgorithm::ExactBruteForce,
                0.0,
                false,
                &mut rng
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn mph_profile_price_examples() {
        let ab = ItemSet::full(2);
        let edge = Hypergraph::new(vec![(ab, q(1, 1))]).unwrap();
        let v = Valuation::mph(2, 2, vec![edge]).unwrap();
        let p = mph_profile_prices(&[v], &Allocation::new(vec![ab]), 2, 2.0).unwrap();
        assert_eq!(p.as_slice(), &[q(1, 4), q(1, 4)]);

        let profile = running_profile();
        let alloc = Allocation::new(vec![ItemSet::singleton(0), ItemSet::singleton(1)]);
        let p = mph_profile_prices(&profile, &alloc, 1, 2.0).unwrap();
        let sw = sw_contributions(&profile, &alloc).unwrap();
        assert_eq!(
            p.as_slice(),
            &[sw[0].clone() * q(1, 2), sw[1].clone() * q(1, 2)]
        );

        let m = 4;
        let sm = Valuation::single_minded(m, ItemSet::full(m), q(3, 1)).unwrap();
        let ud = Valuation::unit_demand(vec![q(1, 1); m]).unwrap();
        let alloc = Allocation::new(vec![ItemSet::EMPTY, ItemSet::full(m)]);
        let p = mph_profile_prices(&[ud, sm], &alloc, m, 2.0).unwrap();
        assert!(p.iter().all(|x| *x == q(3, 8)));
    }

    #[test]
    fn mph_profile_prices_check_rank_and_alpha() {
        let m = 3;
        let sm = Valuation::single_minded(m, ItemSet::full(m), q(1, 1)).unwrap();
        let alloc = Allocation::new(vec![ItemSet::full(m)]);
        assert!(matches!(
            mph_profile_prices(core::slice::from_ref(&sm), &alloc, 2, 2.0),
            Err(Error::Config(_))
        ));
        assert!(mph_profile_prices(&[sm], &alloc, 3, 0.25).is_err());
    }

    #[test]
    fn mph_prices_average_over_atoms() {
        let ab = ItemSet::full(2);
        let g1 = Hypergraph::new(vec![(ab, q(1, 1))]).unwrap();
        let g2 = Hypergraph::new(vec![(ItemSet::singleton(0), q(1, 2))]).unwrap();
        let v1 = Valuation::mph(2, 2, vec![g1]).unwrap();
        let v2 = Valuation::mph(2, 2, vec![g2]).unwrap();
        let prior =
            Prior::from_atoms(vec![vec![(v1.clone(), q(1, 2)), (v2.clone(), q(1, 2))]]).unwrap();
        let cfg = PricingConfig {
            family: PriceFamily::Mph { k: 2 },
            ..PricingConfig::default()
        };
        let p = mph_prices(&prior, WelfareAlgorithm::ExactBruteForce, &cfg)
            .unwrap()
            .prices;
        let full = Allocation::new(vec![ab]);
        let p1 = mph_profile_prices(&[v1], &full, 2, 2.0).unwrap();
        let p2 = mph_profile_prices(&[v2], &full, 2, 2.0).unwrap();
        for j in 0..2 {
            assert_eq!(p[j], (p1[j].clone() + p2[j].clone()) * q(1, 2));
        }

        let det = Prior::deterministic(running_profile()).unwrap();
        let cfg1 = PricingConfig {
            family: PriceFamily::Mph { k: 1 },
            ..PricingConfig::default()
        };
        let mph = mph_prices(&det, WelfareAlgorithm::ExactBruteForce, &cfg1)
            .unwrap()
            .prices;
        assert_eq!(
            mph,
            xos_prices_exact(&det, WelfareAlgorithm::ExactBruteForce).unwrap()
        );
    }

    #[test]
    fn config_validation() {
        let bad = PricingConfig {
            family: PriceFamily::Mph { k: 0 },
            ..PricingConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PricingConfig {
            mode: PricingMode::Sampled {
                epsilon: 0.0,
                seed: 1,
                per_item: false,
            },
            ..PricingConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(PricingConfig::default().validate().is_ok());
    }

    #[test]
    fn price_vector_rejects_negative_entries() {
        assert!(PriceVector::new(vec![q(-1, 2)]).is_err());
        assert!(PriceVector::new(vec![f64::INFINITY]).is_err());
    }
}
