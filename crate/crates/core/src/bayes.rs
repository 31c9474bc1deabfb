//! Finite-support product priors over valuation profiles.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{convert, Scalar};
use crate::valuation::Valuation;

/// Largest support enumerated by [`Prior::enumerate_support`].
pub const DEFAULT_SUPPORT_CAP: u128 = 1_000_000;

/// Float-mode tolerance on the total probability of a buyer's atoms.
pub const FLOAT_PROBABILITY_TOLERANCE: f64 = 1e-12;

/// A buyer's valuation distribution: a list of `(valuation, probability)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BuyerPrior<S> {
    atoms: Vec<(Valuation<S>, S)>,
}

impl<S: Scalar> BuyerPrior<S> {
    pub fn new(atoms: Vec<(Valuation<S>, S)>) -> Result<Self> {
        Self::validated(atoms, 0)
    }

    fn validated(atoms: Vec<(Valuation<S>, S)>, buyer: usize) -> Result<Self> {
        let invalid = |reason| Error::InvalidPrior { buyer, reason };
        let Some((first, _)) = atoms.first() else {
            return Err(invalid("no atoms".into()));
        };
        let items = first.items();
        for (n, (v, p)) in atoms.iter().enumerate() {
            if !p.is_finite() || p.is_negative() {
                return Err(invalid(format!("atom {n} has probability {p}")));
            }
            if v.items() != items {
                return Err(invalid(format!(
                    "atom {n} is defined on {} items, atom 0 on {items}",
                    v.items()
                )));
            }
        }
        let total: S = atoms.iter().map(|(_, p)| p).sum();
        let sums_to_one = if S::EXACT {
            total == S::one()
        } else {
            (total.to_f64() - 1.0).abs() <= FLOAT_PROBABILITY_TOLERANCE
        };
        if !sums_to_one {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(BuyerPrior { atoms })
    }

    /// A point mass on `v`.
    pub fn certain(v: Valuation<S>) -> Self {
        BuyerPrior {
            atoms: vec![(v, S::one())],
        }
    }

    pub fn atoms(&self) -> &[(Valuation<S>, S)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn items(&self) -> usize {
        self.atoms[0].0.items()
    }

    /// Draws an atom index.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (n, (_, p)) in self.atoms.iter().enumerate() {
            acc += p.to_f64();
            if u < acc {
                return n;
            }
        }
        // rounding left u above the running total; take the last atom with mass
        self.atoms
            .iter()
            .rposition(|(_, p)| !p.is_zero())
            .unwrap_or(self.atoms.len() - 1)
    }
}

/// Independent buyer priors over a common set of items.
#[derive(Clone, Debug, PartialEq)]
pub struct Prior<S> {
    buyers: Vec<BuyerPrior<S>>,
    items: usize,
}

/// One valuation profile, with its probability under the prior when it was
/// produced by enumeration (sampled draws carry the product of their atom
/// probabilities too).
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileDraw<S> {
    pub profile: Vec<Valuation<S>>,
    pub atoms: Vec<usize>,
    pub probability: S,
}

impl<S: Scalar> Prior<S> {
    pub fn new(buyers: Vec<BuyerPrior<S>>) -> Result<Self> {
        if buyers.is_empty() {
            return Err(Error::Malformed("prior has no buyers".into()));
        }
        let mut checked: Vec<BuyerPrior<S>> = Vec::with_capacity(buyers.len());
        for (i, b) in buyers.into_iter().enumerate() {
            let b = BuyerPrior::validated(b.atoms, i)?;
            let items = checked.first().map_or(b.items(), |f| f.items());
            if b.items() != items {
                return Err(Error::InvalidPrior {
                    buyer: i,
                    reason: format!("defined on {} items, buyer 0 on {items}", b.items()),
                });
            }
            checked.push(b);
        }
        let items = checked[0].items();
        Ok(Prior {
            buyers: checked,
            items,
        })
    }

    /// Builds a prior, reporting the offending buyer index on failure.
    pub fn from_atoms(buyers: Vec<Vec<(Valuation<S>, S)>>) -> Result<Self> {
        Self::new(
            buyers
                .into_iter()
                .map(|atoms| BuyerPrior { atoms })
                .collect(),
        )
    }

    /// The point mass on a single profile.
    pub fn deterministic(profile: Vec<Valuation<S>>) -> Result<Self> {
        Self::new(profile.into_iter().map(BuyerPrior::certain).collect())
    }

    pub fn buyers(&self) -> &[BuyerPrior<S>] {
        &self.buyers
    }

    pub fn buyer(&self, i: usize) -> &BuyerPrior<S> {
        &self.buyers[i]
    }

    pub fn num_buyers(&self) -> usize {
        self.buyers.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    /// Number of profiles in the support, saturating.
    pub fn support_size(&self) -> u128 {
        self.buyers
            .iter()
            .fold(1u128, |acc, b| acc.saturating_mul(b.len() as u128))
    }

    pub fn is_deterministic(&self) -> bool {
        self.buyers.iter().all(|b| b.len() == 1)
    }

    /// Draws each buyer's valuation independently.
    pub fn sample_profile<R: Rng + ?Sized>(&self, rng: &mut R) -> ProfileDraw<S> {
        let atoms: Vec<usize> = self.buyers.iter().map(|b| b.sample_index(rng)).collect();
        self.profile_at(atoms)
    }

    fn profile_at(&self, atoms: Vec<usize>) -> ProfileDraw<S> {
        let mut probability = S::one();
        let mut profile = Vec::with_capacity(atoms.len());
        for (b, &a) in self.buyers.iter().zip(&atoms) {
            let (v, p) = &b.atoms[a];
            profile.push(v.clone());
            probability = probability * p.clone();
        }
        ProfileDraw {
            profile,
            atoms,
            probability,
        }
    }

    /// Every support point with its exact product probability.
    pub fn enumerate_support(&self) -> Result<Vec<ProfileDraw<S>>> {
        self.enumerate_support_capped(DEFAULT_SUPPORT_CAP)
    }

    pub fn enumerate_support_capped(&self, cap: u128) -> Result<Vec<ProfileDraw<S>>> {
        Ok(self.support_iter(cap)?.collect())
    }

    /// Lazy version of [`enumerate_support_capped`](Self::enumerate_support_capped).
    /// Profiles come in lexicographic order of atom indices, buyer 0 most
    /// significant.
    pub fn support_iter(&self, cap: u128) -> Result<SupportIter<'_, S>> {
        let size = self.support_size();
        if size > cap {
            return Err(Error::capacity(
                "support enumeration (profiles); use Monte-Carlo sampling",
                size,
                cap,
            ));
        }
        Ok(SupportIter {
            prior: self,
            next: Some(vec![0; self.buyers.len()]),
        })
    }

    /// Largest `v(M)` over every atom of every buyer.
    pub fn max_grand_value(&self) -> S {
        self.buyers
            .iter()
            .flat_map(|b| b.atoms.iter())
            .map(|(v, _)| v.grand_value())
            .fold(S::zero(), S::max_of)
    }

    /// Whether every atom satisfies `v(M) <= 1`.
    pub fn is_normalized(&self) -> bool {
        self.max_grand_value() <= S::one()
    }

    /// Divides every value by [`max_grand_value`](Self::max_grand_value).
    /// Returns the rescaled prior and the divisor (1 for an all-zero prior).
    pub fn normalized(&self) -> (Prior<S>, S) {
        let scale = self.max_grand_value();
        if scale.is_zero() {
            return (self.clone(), S::one());
        }
        let factor = S::one() / scale.clone();
        let buyers = self
            .buyers
            .iter()
            .map(|b| BuyerPrior {
                atoms: b
                    .atoms
                    .iter()
                    .map(|(v, p)| (v.scaled(&factor), p.clone()))
                    .collect(),
            })
            .collect();
        (
            Prior {
                buyers,
                items: self.items,
            },
            scale,
        )
    }

    /// The same prior over another numeric backend. Probabilities are
    /// converted through `f64`, so a float prior must still sum to one
    /// within tolerance.
    pub fn convert<T: Scalar>(&self) -> Result<Prior<T>> {
        Prior::from_atoms(
            self.buyers
                .iter()
                .map(|b| {
                    b.atoms
                        .iter()
                        .map(|(v, p)| (v.convert(), convert::<S, T>(p)))
                        .collect()
                })
                .collect(),
        )
    }
}

pub struct SupportIter<'a, S> {
    prior: &'a Prior<S>,
    next: Option<Vec<usize>>,
}

impl<S: Scalar> Iterator for SupportIter<'_, S> {
    type Item = ProfileDraw<S>;

    fn next(&mut self) -> Option<ProfileDraw<S>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        self.next = loop {
            if pos == 0 {
                break None;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.prior.buyers[pos].len() {
                break Some(succ);
            }
            succ[pos] = 0;
        };
        Some(self.prior.profile_at(current))
    }
}
