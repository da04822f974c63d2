//! Bid-weighted aggregation rules (linear and log-linear), the aggregated
//! KL losses they minimize, and the numeric identities behind those
//! optimality claims.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::distributions::{kl_divergence, DistError, TokenDistribution};
use crate::scalar::{rational_from_f64, FloatScalar, Scalar};
use crate::{FloatDist, Rational, RationalDist};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggError {
    #[error("negative bid at index {index}")]
    NegativeBid { index: usize },
    #[error("total bid is zero")]
    ZeroTotalBid,
    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("expected {expected} distributions, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("log-linear weights vanish on every token")]
    EmptySupport,
    #[error("grid would exceed {limit} points")]
    TooLarge { limit: u64 },
    #[error("probe distribution must have full support (token {token} is zero)")]
    SupportViolation { token: usize },
    #[error("beta must be positive")]
    NonPositiveBeta,
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Per-agent non-negative bids.
#[derive(Debug, Clone, PartialEq)]
pub struct BidProfile<S: Scalar> {
    bids: Vec<S>,
}

impl<S: Scalar> BidProfile<S> {
    pub fn new(bids: Vec<S>) -> Result<Self, AggError> {
        for (index, b) in bids.iter().enumerate() {
            if b.is_negative() {
                return Err(AggError::NegativeBid { index });
            }
        }
        Ok(Self { bids })
    }

    pub fn from_ints(bids: &[i64]) -> Self {
        Self { bids: bids.iter().map(|&b| S::from_int(b)).collect() }
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn bid(&self, agent: usize) -> &S {
        &self.bids[agent]
    }

    pub fn bids(&self) -> &[S] {
        &self.bids
    }

    pub fn total(&self) -> S {
        self.bids.iter().fold(S::zero(), |acc, b| acc + b.clone())
    }

    /// Replaces one agent's bid, leaving the others fixed.
    pub fn with_bid(&self, agent: usize, bid: S) -> Self {
        let mut bids = self.bids.clone();
        bids[agent] = bid;
        Self { bids }
    }
}

fn check_inputs<S: Scalar>(
    bids: &BidProfile<S>,
    dists: &[TokenDistribution<S>],
) -> Result<usize, AggError> {
    if dists.len() != bids.len() {
        return Err(AggError::CountMismatch { expected: bids.len(), got: dists.len() });
    }
    let n = dists.first().map(|d| d.len()).unwrap_or(0);
    for d in dists {
        if d.len() != n {
            return Err(AggError::AlphabetMismatch { left: n, right: d.len() });
        }
    }
    if bids.total().is_zero() {
        return Err(AggError::ZeroTotalBid);
    }
    Ok(n)
}

/// Bid-weighted arithmetic mean: q(t) = Σ b_i·p_i(t) / Σ b_i.
pub fn linear_aggregate<S: Scalar>(
    bids: &BidProfile<S>,
    dists: &[TokenDistribution<S>],
) -> Result<TokenDistribution<S>, AggError> {
    let n = check_inputs(bids, dists)?;
    let total = bids.total();
    let mut probs = vec![S::zero(); n];
    for (b, d) in bids.bids().iter().zip(dists) {
        if b.is_zero() {
            continue;
        }
        for (t, p) in d.probs().iter().enumerate() {
            probs[t] = probs[t].clone() + b.clone() * p.clone();
        }
    }
    let probs = probs.into_iter().map(|v| v / total.clone()).collect();
    Ok(TokenDistribution::new(probs)?)
}

/// Bid-weighted geometric mean, renormalized: q(t) ∝ Π p_i(t)^{b_i/B}.
///
/// Computed in log space with max-subtraction before exponentiation. A token
/// gets exactly zero mass iff some agent with a positive bid assigns it zero.
pub fn loglinear_aggregate<S: FloatScalar>(
    bids: &BidProfile<S>,
    dists: &[TokenDistribution<S>],
) -> Result<TokenDistribution<S>, AggError> {
    let n = check_inputs(bids, dists)?;
    let total = bids.total();
    let mut log_w: Vec<Option<S>> = vec![Some(S::zero()); n];
    for (b, d) in bids.bids().iter().zip(dists) {
        if b.is_zero() {
            continue;
        }
        let w = *b / total;
        for (t, p) in d.probs().iter().enumerate() {
            match &mut log_w[t] {
                None => {}
                slot if p.is_zero() => *slot = None,
                Some(acc) => *acc = *acc + w * p.ln(),
            }
        }
    }
    let max = log_w
        .iter()
        .flatten()
        .cloned()
        .fold(None::<S>, |m, v| Some(m.map_or(v, |m| if v > m { v } else { m })))
        .ok_or(AggError::EmptySupport)?;
    let weights: Vec<S> =
        log_w.into_iter().map(|l| l.map_or(S::zero(), |l| (l - max).exp())).collect();
    let sum = weights.iter().fold(S::zero(), |acc, w| acc + *w);
    Ok(TokenDistribution::new(weights.into_iter().map(|w| w / sum).collect())?)
}

fn exact_root(v: &BigInt, k: u32) -> Option<BigInt> {
    if k == 1 {
        return Some(v.clone());
    }
    let r = v.nth_root(k);
    (r.pow(k) == *v).then_some(r)
}

/// Exact-rational log-linear aggregation.
///
/// Bids are scaled to a common integer denominator so per-token weights are
/// B-th roots of exact rational products. Tokens whose root is irrational
/// fall back to the float value, embedded back into the rationals, so the
/// whole pipeline keeps a single scalar type. An optional epsilon floor
/// (1e-12, off by default) lifts annihilated tokens before renormalizing.
pub fn loglinear_aggregate_exact(
    bids: &BidProfile<Rational>,
    dists: &[RationalDist],
) -> Result<RationalDist, AggError> {
    loglinear_exact_impl(bids, dists, false)
}

/// Epsilon-floor variant of [`loglinear_aggregate_exact`].
pub fn loglinear_aggregate_exact_floored(
    bids: &BidProfile<Rational>,
    dists: &[RationalDist],
) -> Result<RationalDist, AggError> {
    loglinear_exact_impl(bids, dists, true)
}

fn loglinear_exact_impl(
    bids: &BidProfile<Rational>,
    dists: &[RationalDist],
    floor: bool,
) -> Result<RationalDist, AggError> {
    let n = check_inputs(bids, dists)?;
    // scale bids to integers
    let lcm = bids
        .bids()
        .iter()
        .fold(BigInt::one(), |acc, b| acc.lcm(b.denom()));
    let exps: Vec<BigInt> =
        bids.bids().iter().map(|b| (b.clone() * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let root: BigInt = exps.iter().sum();
    let root_u32 = root.to_u32();

    let mut weights = vec![Rational::zero(); n];
    for t in 0..n {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        let mut zero = false;
        let mut overflow = false;
        for (e, d) in exps.iter().zip(dists) {
            if e.is_zero() {
                continue;
            }
            let p = d.prob(t);
            if p.is_zero() {
                zero = true;
                break;
            }
            match e.to_u32() {
                Some(e) => {
                    num *= p.numer().pow(e);
                    den *= p.denom().pow(e);
                }
                None => {
                    overflow = true;
                    break;
                }
            }
        }
        if zero {
            continue;
        }
        let exact = if overflow {
            None
        } else {
            // reduce first: the ratio can be a perfect power even when the
            // raw products are not
            let frac = BigRational::new(num, den);
            root_u32.and_then(|k| {
                let rn = exact_root(frac.numer(), k)?;
                let rd = exact_root(frac.denom(), k)?;
                Some(BigRational::new(rn, rd))
            })
        };
        weights[t] = match exact {
            Some(w) => w,
            None => {
                // irrational root: take the float route for this token
                let b_total = Scalar::to_f64(&bids.total());
                let log_w: f64 = bids
                    .bids()
                    .iter()
                    .zip(dists)
                    .filter(|(b, _)| !b.is_zero())
                    .map(|(b, d)| Scalar::to_f64(b) / b_total * Scalar::to_f64(d.prob(t)).ln())
                    .sum();
                rational_from_f64(log_w.exp()).unwrap_or_else(Rational::zero)
            }
        };
    }
    if floor {
        let eps = Rational::from_ratio(1, 1_000_000_000_000);
        for w in &mut weights {
            if w.is_zero() {
                *w = eps.clone();
            }
        }
    }
    let sum: Rational = weights.iter().fold(Rational::zero(), |acc, w| acc + w);
    if sum.is_zero() {
        return Err(AggError::EmptySupport);
    }
    Ok(RationalDist::new(weights.into_iter().map(|w| w / sum.clone()).collect())?)
}

/// Parametric aggregation rule as used by the auditors and the runner.
///
/// Custom rules are opaque callbacks; auditors treat them as black boxes on
/// finite bid grids.
#[derive(Clone)]
pub enum AggregationRule {
    Linear,
    LogLinear,
    Custom(CustomRule),
}

#[derive(Clone)]
pub struct CustomRule {
    pub name: String,
    pub declared_monotone: bool,
    eval: Arc<dyn Fn(&BidProfile<Rational>, &[RationalDist]) -> Result<RationalDist, AggError> + Send + Sync>,
}

impl CustomRule {
    pub fn new(
        name: impl Into<String>,
        declared_monotone: bool,
        eval: impl Fn(&BidProfile<Rational>, &[RationalDist]) -> Result<RationalDist, AggError>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        Self { name: name.into(), declared_monotone, eval: Arc::new(eval) }
    }
}

impl std::fmt::Debug for AggregationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Linear => write!(f, "Linear"),
            Self::LogLinear => write!(f, "LogLinear"),
            Self::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

impl AggregationRule {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(Self::Linear),
            "loglinear" | "log-linear" => Some(Self::LogLinear),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Linear => "linear",
            Self::LogLinear => "loglinear",
            Self::Custom(c) => &c.name,
        }
    }

    pub fn declared_monotone(&self) -> bool {
        match self {
            Self::Linear => true,
            Self::LogLinear => false,
            Self::Custom(c) => c.declared_monotone,
        }
    }

    pub fn evaluate(
        &self,
        bids: &BidProfile<Rational>,
        dists: &[RationalDist],
    ) -> Result<RationalDist, AggError> {
        match self {
            Self::Linear => linear_aggregate(bids, dists),
            Self::LogLinear => loglinear_aggregate_exact(bids, dists),
            Self::Custom(c) => (c.eval)(bids, dists),
        }
    }
}

/// Forward aggregated loss Σ b_i·D_KL(p_i ‖ q).
pub fn loss_kl<S: FloatScalar>(
    bids: &BidProfile<S>,
    dists: &[TokenDistribution<S>],
    q: &TokenDistribution<S>,
) -> Result<S, AggError> {
    check_inputs(bids, dists)?;
    let mut acc = S::zero();
    for (b, p) in bids.bids().iter().zip(dists) {
        if b.is_zero() {
            continue;
        }
        acc = acc + *b * kl_divergence(p, q)?;
    }
    Ok(acc)
}

/// Reverse aggregated loss Σ b_i·D_KL(q ‖ p_i).
pub fn loss_kl_reverse<S: FloatScalar>(
    bids: &BidProfile<S>,
    dists: &[TokenDistribution<S>],
    q: &TokenDistribution<S>,
) -> Result<S, AggError> {
    check_inputs(bids, dists)?;
    let mut acc = S::zero();
    for (b, p) in bids.bids().iter().zip(dists) {
        if b.is_zero() {
            continue;
        }
        acc = acc + *b * kl_divergence(q, p)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Forward,
    Reverse,
}

const GRID_LIMIT: u64 = 100_000_000;

fn grid_point_count(steps: u64, k: u64) -> Option<u64> {
    // C(steps + k - 1, k - 1)
    let mut acc: u64 = 1;
    for i in 0..k - 1 {
        acc = acc.checked_mul(steps + i + 1)?;
        acc /= i + 1;
        if acc > GRID_LIMIT {
            return None;
        }
    }
    Some(acc)
}

/// Independent verification oracle: exhaustively minimizes the chosen loss
/// over the probability simplex discretized at `1/steps`, returning the
/// lexicographically smallest argmin grid point.
pub fn minimize_loss_oracle(
    loss: LossKind,
    bids: &BidProfile<f64>,
    dists: &[FloatDist],
    steps: u32,
) -> Result<FloatDist, AggError> {
    let n = check_inputs(bids, dists)?;
    if n > 6 {
        return Err(AggError::TooLarge { limit: GRID_LIMIT });
    }
    grid_point_count(steps as u64, n as u64).ok_or(AggError::TooLarge { limit: GRID_LIMIT })?;

    let mut counts = vec![0u32; n];
    let mut best: Option<(f64, Vec<u32>)> = None;
    enumerate_compositions(steps, &mut counts, 0, &mut |counts| {
        let q = TokenDistribution::new_unchecked(
            counts.iter().map(|&c| c as f64 / steps as f64).collect(),
        );
        let value = match loss {
            LossKind::Forward => loss_kl(bids, dists, &q),
            LossKind::Reverse => loss_kl_reverse(bids, dists, &q),
        }
        .unwrap_or(f64::INFINITY);
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, counts.to_vec()));
        }
    });
    let (_, counts) = best.expect("grid is non-empty");
    Ok(TokenDistribution::new_unchecked(
        counts.iter().map(|&c| c as f64 / steps as f64).collect(),
    ))
}

fn enumerate_compositions(
    remaining: u32,
    counts: &mut [u32],
    idx: usize,
    visit: &mut impl FnMut(&[u32]),
) {
    if idx == counts.len() - 1 {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[idx] = c;
        enumerate_compositions(remaining - c, counts, idx + 1, visit);
    }
}

/// Finite dataset as a distribution over (context, label) pairs: marginal
/// context weights plus one conditional label distribution per context.
#[derive(Debug, Clone)]
pub struct FiniteConditionalDataset {
    contexts: Vec<String>,
    weights: Vec<f64>,
    conditionals: Vec<FloatDist>,
}

impl FiniteConditionalDataset {
    pub fn new(
        contexts: Vec<String>,
        weights: Vec<f64>,
        conditionals: Vec<FloatDist>,
    ) -> Result<Self, AggError> {
        if contexts.len() != weights.len() || contexts.len() != conditionals.len() {
            return Err(AggError::CountMismatch { expected: contexts.len(), got: weights.len() });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(AggError::Dist(DistError::InvalidSum { sum: sum.literal() }));
        }
        Ok(Self { contexts, weights, conditionals })
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn conditional(&self, x: usize) -> &FloatDist {
        &self.conditionals[x]
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    /// Dataset KL loss Σ_x μ(x)·D_KL(μ(·|x) ‖ f(x)).
    pub fn kl_loss(&self, model: &[FloatDist]) -> Result<f64, AggError> {
        if model.len() != self.len() {
            return Err(AggError::CountMismatch { expected: self.len(), got: model.len() });
        }
        let mut acc = 0.0;
        for x in 0..self.len() {
            acc += self.weights[x] * kl_divergence(&self.conditionals[x], &model[x])?;
        }
        Ok(acc)
    }
}

/// Per-context, per-token rewards with the RL regularization strength β.
#[derive(Debug, Clone)]
pub struct RewardTable {
    rewards: Vec<Vec<f64>>,
    beta: f64,
}

impl RewardTable {
    pub fn new(rewards: Vec<Vec<f64>>, beta: f64) -> Result<Self, AggError> {
        if beta <= 0.0 {
            return Err(AggError::NonPositiveBeta);
        }
        if rewards.iter().flatten().any(|r| !r.is_finite()) {
            return Err(AggError::Dist(DistError::BadLiteral("non-finite reward".into())));
        }
        Ok(Self { rewards, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rewards[x]
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// Per-context RL objective Σ_t r(t)·f(t) − β·D_KL(f ‖ f_sft).
pub fn rl_objective(
    f: &FloatDist,
    f_sft: &FloatDist,
    rewards: &[f64],
    beta: f64,
) -> Result<f64, AggError> {
    if beta <= 0.0 {
        return Err(AggError::NonPositiveBeta);
    }
    let gain: f64 = rewards.iter().zip(f.probs()).map(|(r, p)| r * p).sum();
    Ok(gain - beta * kl_divergence(f, f_sft)?)
}

/// KKT closed form of the RL objective: f*(t) ∝ f_sft(t)·exp(r(t)/β).
pub fn rl_closed_form(
    f_sft: &FloatDist,
    rewards: &[f64],
    beta: f64,
) -> Result<FloatDist, AggError> {
    if beta <= 0.0 {
        return Err(AggError::NonPositiveBeta);
    }
    if rewards.len() != f_sft.len() {
        return Err(AggError::AlphabetMismatch { left: f_sft.len(), right: rewards.len() });
    }
    let max = rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / beta;
    let weights: Vec<f64> = f_sft
        .probs()
        .iter()
        .zip(rewards)
        .map(|(p, r)| p * (r / beta - max).exp())
        .collect();
    let sum: f64 = weights.iter().sum();
    Ok(TokenDistribution::new_unchecked(weights.into_iter().map(|w| w / sum).collect()))
}

/// Residual of the proof identity
/// Σ b_i·D_KL(p_i ‖ q) − B·D_KL(p̄ ‖ q), which must not depend on the probe.
pub fn kl_identity_residual(
    bids: &BidProfile<f64>,
    dists: &[FloatDist],
    probe_q: &FloatDist,
) -> Result<f64, AggError> {
    if let Some(token) = probe_q.probs().iter().position(|p| *p == 0.0) {
        return Err(AggError::SupportViolation { token });
    }
    let mean = linear_aggregate(bids, dists)?;
    let weighted = loss_kl(bids, dists, probe_q)?;
    Ok(weighted - bids.total() * kl_divergence(&mean, probe_q)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fdist(probs: &[f64]) -> FloatDist {
        TokenDistribution::new(probs.to_vec()).unwrap()
    }

    fn rdist(parts: &[(i64, i64)]) -> RationalDist {
        TokenDistribution::new(parts.iter().map(|&(n, d)| Rational::from_ratio(n, d)).collect())
            .unwrap()
    }

    fn example_dists() -> Vec<RationalDist> {
        vec![rdist(&[(1, 2), (2, 5), (1, 10)]), rdist(&[(1, 2), (1, 10), (2, 5)])]
    }

    #[test]
    fn linear_examples() {
        let dists = example_dists();
        let bids = BidProfile::from_ints(&[1, 1]);
        let q = linear_aggregate(&bids, &dists).unwrap();
        assert_eq!(q, rdist(&[(1, 2), (1, 4), (1, 4)]));

        let bids = BidProfile::from_ints(&[1, 0]);
        assert_eq!(linear_aggregate(&bids, &dists).unwrap(), dists[0]);

        let scaled = BidProfile::from_ints(&[2, 2]);
        assert_eq!(linear_aggregate(&scaled, &dists).unwrap(), q);
    }

    #[test]
    fn loglinear_equal_bids_is_renormalized_geometric_mean() {
        let dists = example_dists();
        let bids = BidProfile::from_ints(&[1, 1]);
        let q = loglinear_aggregate_exact(&bids, &dists).unwrap();
        assert_eq!(q, rdist(&[(5, 9), (2, 9), (2, 9)]));

        // zero exponent removes the agent entirely
        let bids = BidProfile::from_ints(&[1, 0]);
        assert_eq!(loglinear_aggregate_exact(&bids, &dists).unwrap(), dists[0]);

        // a zero factor annihilates the token
        let dists = vec![rdist(&[(1, 1), (0, 1)]), rdist(&[(1, 2), (1, 2)])];
        let bids = BidProfile::from_ints(&[1, 1]);
        assert_eq!(loglinear_aggregate_exact(&bids, &dists).unwrap(), rdist(&[(1, 1), (0, 1)]));
    }

    #[test]
    fn loglinear_float_matches_exact() {
        let dists = example_dists();
        let fdists: Vec<FloatDist> = dists.iter().map(|d| d.to_f64()).collect();
        let bids = BidProfile::from_ints(&[1, 1]);
        let q = loglinear_aggregate(&bids, &fdists).unwrap();
        for (got, want) in q.probs().iter().zip([5.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn loglinear_irrational_bids_fall_back_to_float() {
        let dists = example_dists();
        let bids = BidProfile::from_ints(&[100, 1]);
        let q = loglinear_aggregate_exact(&bids, &dists).unwrap();
        let fq = loglinear_aggregate(
            &BidProfile::from_ints(&[100, 1]),
            &dists.iter().map(|d| d.to_f64()).collect::<Vec<_>>(),
        )
        .unwrap();
        for (got, want) in q.probs().iter().zip(fq.probs()) {
            assert!((Scalar::to_f64(got) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn aggregation_input_validation() {
        let dists = example_dists();
        assert!(matches!(
            linear_aggregate(&BidProfile::from_ints(&[0, 0]), &dists),
            Err(AggError::ZeroTotalBid)
        ));
        assert!(matches!(
            linear_aggregate(&BidProfile::from_ints(&[1]), &dists),
            Err(AggError::CountMismatch { .. })
        ));
        let bad = vec![rdist(&[(1, 2), (1, 2)]), rdist(&[(1, 3), (1, 3), (1, 3)])];
        assert!(matches!(
            linear_aggregate(&BidProfile::<Rational>::from_ints(&[1, 1]), &bad),
            Err(AggError::AlphabetMismatch { .. })
        ));
        assert!(BidProfile::new(vec![-1.0]).is_err());
    }

    #[test]
    fn loss_examples() {
        let p = fdist(&[0.3, 0.7]);
        let bids = BidProfile::from_ints(&[1, 1]);
        let dists = vec![p.clone(), p.clone()];
        assert_eq!(loss_kl(&bids, &dists, &p).unwrap(), 0.0);
        assert_eq!(loss_kl_reverse(&bids, &dists, &p).unwrap(), 0.0);

        let single = BidProfile::from_ints(&[1]);
        let q = fdist(&[0.5, 0.5]);
        assert_eq!(
            loss_kl(&single, &[p.clone()], &q).unwrap(),
            kl_divergence(&p, &q).unwrap()
        );

        // support violation on the reverse loss
        let dists = vec![fdist(&[1.0, 0.0])];
        assert!(loss_kl_reverse(&single, &dists, &q).unwrap().is_infinite());
    }

    #[test]
    fn oracle_agrees_with_closed_forms() {
        let dists: Vec<FloatDist> =
            vec![fdist(&[0.5, 0.4, 0.1]), fdist(&[0.5, 0.1, 0.4])];
        let bids = BidProfile::from_ints(&[1, 1]);

        let lin = minimize_loss_oracle(LossKind::Forward, &bids, &dists, 100).unwrap();
        for (got, want) in lin.probs().iter().zip([0.5, 0.25, 0.25]) {
            assert!((got - want).abs() <= 0.01 + 1e-12);
        }

        let log = minimize_loss_oracle(LossKind::Reverse, &bids, &dists, 100).unwrap();
        for (got, want) in log.probs().iter().zip([5.0 / 9.0, 2.0 / 9.0, 2.0 / 9.0]) {
            assert!((got - want).abs() <= 0.01 + 1e-12);
        }

        // single agent: the oracle returns p itself when the grid contains it
        let single = BidProfile::from_ints(&[1]);
        let p = fdist(&[0.25, 0.75]);
        let got = minimize_loss_oracle(LossKind::Forward, &single, &[p.clone()], 100).unwrap();
        assert_eq!(got.probs(), p.probs());
    }

    #[test]
    fn oracle_rejects_oversized_grids() {
        let dists: Vec<FloatDist> = (0..6).map(|_| fdist(&[1.0 / 6.0; 6])).collect();
        let bids = BidProfile::from_ints(&[1; 6]);
        assert!(matches!(
            minimize_loss_oracle(LossKind::Forward, &bids, &dists, 100_000),
            Err(AggError::TooLarge { .. })
        ));
    }

    #[test]
    fn rl_closed_form_examples() {
        let f_sft = fdist(&[0.5, 0.5]);
        // zero reward collapses to f_sft
        let f = rl_closed_form(&f_sft, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(f.probs(), f_sft.probs());

        // independent evaluation of (e/(e+1), 1/(e+1))
        let f = rl_closed_form(&f_sft, &[1.0, 0.0], 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((f.prob(0) - e / (e + 1.0)).abs() < 1e-15);
        assert!((f.prob(1) - 1.0 / (e + 1.0)).abs() < 1e-15);
        assert!((f.prob(0) - 0.7311).abs() < 1e-4);

        // zero mass stays zero
        let f = rl_closed_form(&fdist(&[1.0, 0.0]), &[-3.0, 10.0], 0.7).unwrap();
        assert_eq!(f.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn identity_residual_examples() {
        let dists = vec![fdist(&[0.5, 0.4, 0.1]), fdist(&[0.2, 0.3, 0.5])];
        let bids = BidProfile::new(vec![1.5, 0.5]).unwrap();
        let r1 = kl_identity_residual(&bids, &dists, &fdist(&[0.4, 0.3, 0.3])).unwrap();
        let r2 = kl_identity_residual(&bids, &dists, &fdist(&[0.1, 0.1, 0.8])).unwrap();
        assert!((r1 - r2).abs() < 1e-12);

        // identical inputs give zero residual at any probe
        let dists = vec![fdist(&[0.3, 0.7]); 3];
        let bids = BidProfile::from_ints(&[1, 2, 3]);
        let r = kl_identity_residual(&bids, &dists, &fdist(&[0.6, 0.4])).unwrap();
        assert!(r.abs() < 1e-12);

        // single agent: residual is exactly zero
        let one = BidProfile::from_ints(&[2]);
        let r = kl_identity_residual(&one, &dists[..1], &fdist(&[0.9, 0.1])).unwrap();
        assert!(r.abs() < 1e-12);

        assert!(matches!(
            kl_identity_residual(&one, &dists[..1], &fdist(&[1.0, 0.0])),
            Err(AggError::SupportViolation { token: 1 })
        ));
    }

    #[test]
    fn dataset_and_rewards_validate() {
        let ds = FiniteConditionalDataset::new(
            vec!["a".into(), "b".into()],
            vec![0.5, 0.5],
            vec![fdist(&[0.9, 0.1]), fdist(&[0.2, 0.8])],
        )
        .unwrap();
        // the conditionals themselves minimize the dataset loss
        let at_opt = ds.kl_loss(&[fdist(&[0.9, 0.1]), fdist(&[0.2, 0.8])]).unwrap();
        let off = ds.kl_loss(&[fdist(&[0.5, 0.5]), fdist(&[0.5, 0.5])]).unwrap();
        assert!(at_opt.abs() < 1e-15 && off > at_opt);

        assert!(FiniteConditionalDataset::new(
            vec!["a".into()],
            vec![0.7],
            vec![fdist(&[1.0, 0.0])]
        )
        .is_err());
        assert!(RewardTable::new(vec![vec![1.0]], 0.0).is_err());
        assert!(RewardTable::new(vec![vec![f64::NAN]], 1.0).is_err());
    }
}
