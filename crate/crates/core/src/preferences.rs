//! Robust preference order over distributions, the under/oversampled token
//! partition, and the order embedding into the rationals used by the
//! strategy-mapping construction.

use std::cmp::Ordering;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{DistError, TokenDistribution};
use crate::scalar::Scalar;

/// Outcome of comparing two candidate aggregates against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreferenceVerdict {
    #[serde(rename = "preferred")]
    StrictlyPreferred,
    Equal,
    #[serde(rename = "less")]
    StrictlyLess,
    Incomparable,
}

impl PreferenceVerdict {
    /// True for the weak upper side of the order: preferred or equal.
    pub fn weakly_preferred(self) -> bool {
        matches!(self, Self::StrictlyPreferred | Self::Equal)
    }
}

/// Split of the alphabet into undersampled (`t_plus`) and oversampled
/// (`t_minus`) tokens, relative to a zero-bid aggregate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenPartition {
    under: Vec<bool>,
}

impl TokenPartition {
    pub fn is_undersampled(&self, token: usize) -> bool {
        self.under[token]
    }

    pub fn t_plus(&self) -> Vec<usize> {
        (0..self.under.len()).filter(|&t| self.under[t]).collect()
    }

    pub fn t_minus(&self) -> Vec<usize> {
        (0..self.under.len()).filter(|&t| !self.under[t]).collect()
    }

    pub fn len(&self) -> usize {
        self.under.len()
    }

    pub fn is_empty(&self) -> bool {
        self.under.is_empty()
    }
}

/// `t_plus` collects tokens whose zero-bid mass does not exceed the agent's
/// preferred mass; everything else is oversampled.
pub fn partition_tokens<S: Scalar>(
    p_ref: &TokenDistribution<S>,
    q_at_zero: &TokenDistribution<S>,
) -> Result<TokenPartition, DistError> {
    if p_ref.len() != q_at_zero.len() {
        return Err(DistError::AlphabetMismatch { left: p_ref.len(), right: q_at_zero.len() });
    }
    let under = (0..p_ref.len()).map(|t| q_at_zero.prob(t) <= p_ref.prob(t)).collect();
    Ok(TokenPartition { under })
}

fn weakly_dominates<S: Scalar>(dev_q: &[S], dev_q2: &[S]) -> bool {
    // sign check avoids multiplying: a*b can produce -0.0 for floats, which
    // num-traits counts as negative
    dev_q.iter().zip(dev_q2).all(|(a, b)| {
        a.abs() <= b.abs() && (a.is_zero() || a.is_negative() == b.is_negative())
    })
}

fn compare_deviations<S: Scalar>(
    p_ref: &TokenDistribution<S>,
    q: &TokenDistribution<S>,
    q2: &TokenDistribution<S>,
    snap: Option<&S>,
) -> Result<PreferenceVerdict, DistError> {
    if p_ref.len() != q.len() || p_ref.len() != q2.len() {
        return Err(DistError::AlphabetMismatch { left: q.len(), right: q2.len() });
    }
    let dev = |d: &TokenDistribution<S>| -> Vec<S> {
        d.probs()
            .iter()
            .zip(p_ref.probs())
            .map(|(x, p)| {
                let v = x.clone() - p.clone();
                match snap {
                    Some(tol) if v.abs() < *tol => S::zero(),
                    _ => v,
                }
            })
            .collect()
    };
    let dq = dev(q);
    let dq2 = dev(q2);
    if dq == dq2 {
        return Ok(PreferenceVerdict::Equal);
    }
    if weakly_dominates(&dq, &dq2) {
        Ok(PreferenceVerdict::StrictlyPreferred)
    } else if weakly_dominates(&dq2, &dq) {
        Ok(PreferenceVerdict::StrictlyLess)
    } else {
        Ok(PreferenceVerdict::Incomparable)
    }
}

/// Robust comparison of `q` against `q2` from the viewpoint of an agent
/// preferring `p_ref`: `q` wins when it deviates from `p_ref` no more than
/// `q2` does, entrywise and in the same direction.
pub fn robust_compare<S: Scalar>(
    p_ref: &TokenDistribution<S>,
    q: &TokenDistribution<S>,
    q2: &TokenDistribution<S>,
) -> Result<PreferenceVerdict, DistError> {
    compare_deviations(p_ref, q, q2, None)
}

/// Floating adapter: deviations below `tol` are treated as exactly zero
/// before the sign tests, so rounding noise cannot flip a verdict.
pub fn robust_compare_tol<S: Scalar>(
    p_ref: &TokenDistribution<S>,
    q: &TokenDistribution<S>,
    q2: &TokenDistribution<S>,
    tol: S,
) -> Result<PreferenceVerdict, DistError> {
    compare_deviations(p_ref, q, q2, Some(&tol))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("comparator reports elements {left} and {right} as incomparable")]
    NotTotal { left: usize, right: usize },
    #[error("empty element list")]
    Empty,
}

/// Embeds a finite total preorder into the non-negative rationals, one
/// element at a time: equal-rank elements share a value, otherwise the new
/// value is the midpoint of the tightest bounding pair (or bound+1 /
/// bound/2 at the extremes, starting from 1).
///
/// Returns one rational per input element, in input order.
pub fn order_embedding<T>(
    elements: &[T],
    cmp: impl Fn(&T, &T) -> Option<Ordering>,
) -> Result<Vec<BigRational>, OrderError> {
    if elements.is_empty() {
        return Err(OrderError::Empty);
    }
    let mut values: Vec<BigRational> = Vec::with_capacity(elements.len());
    for (n, x) in elements.iter().enumerate() {
        let mut lower: Option<BigRational> = None;
        let mut upper: Option<BigRational> = None;
        let mut assigned: Option<BigRational> = None;
        for (i, y) in elements[..n].iter().enumerate() {
            match cmp(x, y).ok_or(OrderError::NotTotal { left: n, right: i })? {
                Ordering::Equal => {
                    assigned = Some(values[i].clone());
                    break;
                }
                Ordering::Greater => {
                    if lower.as_ref().map_or(true, |l| values[i] > *l) {
                        lower = Some(values[i].clone());
                    }
                }
                Ordering::Less => {
                    if upper.as_ref().map_or(true, |u| values[i] < *u) {
                        upper = Some(values[i].clone());
                    }
                }
            }
        }
        let value = match assigned {
            Some(v) => v,
            None => match (lower, upper) {
                (Some(l), Some(u)) => (l + u) / BigRational::from_int(2),
                (Some(l), None) => l + BigRational::from_int(1),
                (None, Some(u)) => u / BigRational::from_int(2),
                (None, None) => BigRational::from_int(1),
            },
        };
        values.push(value);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FloatDist, Rational, RationalDist};
    use crate::distributions::TokenDistribution;

    fn fdist(probs: &[f64]) -> FloatDist {
        TokenDistribution::new(probs.to_vec()).unwrap()
    }

    fn rdist(parts: &[(i64, i64)]) -> RationalDist {
        TokenDistribution::new(parts.iter().map(|&(n, d)| Rational::from_ratio(n, d)).collect())
            .unwrap()
    }

    #[test]
    fn two_token_verdicts() {
        let p = fdist(&[0.6, 0.4]);
        // q3 = (0.7, 0.3) beats q2 = (0.8, 0.2)
        let q3 = fdist(&[0.7, 0.3]);
        let q2 = fdist(&[0.8, 0.2]);
        assert_eq!(robust_compare(&p, &q3, &q2).unwrap(), PreferenceVerdict::StrictlyPreferred);
        assert_eq!(robust_compare(&p, &q2, &q3).unwrap(), PreferenceVerdict::StrictlyLess);
        // (0.5, 0.5) vs (0.8, 0.2): deviations point in opposite directions
        let q1 = fdist(&[0.5, 0.5]);
        assert_eq!(robust_compare(&p, &q1, &q2).unwrap(), PreferenceVerdict::Incomparable);
        assert_eq!(robust_compare(&p, &q2, &q2).unwrap(), PreferenceVerdict::Equal);
    }

    #[test]
    fn tolerance_snaps_noise_to_zero() {
        let p = fdist(&[0.6, 0.4]);
        let q = fdist(&[0.6 - 1e-15, 0.4 + 1e-15]);
        let q2 = fdist(&[0.8, 0.2]);
        // without snapping, the -1e-15 deviation has the wrong sign and the
        // verdict would degrade to Incomparable
        assert_eq!(
            robust_compare_tol(&p, &q, &q2, 1e-12).unwrap(),
            PreferenceVerdict::StrictlyPreferred
        );
    }

    #[test]
    fn partition_examples() {
        let p = rdist(&[(0, 1), (0, 1), (1, 2), (1, 2)]);
        let q0 = rdist(&[(1, 2), (1, 2), (0, 1), (0, 1)]);
        let part = partition_tokens(&p, &q0).unwrap();
        assert_eq!(part.t_plus(), vec![2, 3]);
        assert_eq!(part.t_minus(), vec![0, 1]);

        let part = partition_tokens(&p, &p).unwrap();
        assert_eq!(part.t_plus(), vec![0, 1, 2, 3]);

        let p = rdist(&[(1, 1), (0, 1)]);
        let q0 = rdist(&[(3, 10), (7, 10)]);
        let part = partition_tokens(&p, &q0).unwrap();
        assert_eq!(part.t_plus(), vec![0]);
        assert_eq!(part.t_minus(), vec![1]);
    }

    #[test]
    fn embedding_chain_and_ties() {
        let rank = [1u8, 2, 3];
        let f = order_embedding(&rank, |a, b| Some(a.cmp(b))).unwrap();
        assert!(f[0] < f[1] && f[1] < f[2]);

        // a ~ b < c
        let rank = [1u8, 1, 2];
        let f = order_embedding(&rank, |a, b| Some(a.cmp(b))).unwrap();
        assert_eq!(f[0], f[1]);
        assert!(f[1] < f[2]);
    }

    #[test]
    fn embedding_adversarial_insertion_order() {
        // elements inserted as (c, a, b) with a < b < c; brute-force pairwise
        // comparator oracle on the output must reproduce the input order.
        let rank = [3u8, 1, 2];
        let f = order_embedding(&rank, |a, b| Some(a.cmp(b))).unwrap();
        for i in 0..rank.len() {
            for j in 0..rank.len() {
                assert_eq!(f[i].cmp(&f[j]), rank[i].cmp(&rank[j]), "pair ({i},{j})");
            }
        }
    }

    #[test]
    fn embedding_rejects_partial_comparators() {
        let items = [0u8, 1];
        let err = order_embedding(&items, |_, _| None).unwrap_err();
        assert_eq!(err, OrderError::NotTotal { left: 1, right: 0 });
    }
}
