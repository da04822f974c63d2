//! Token alphabets, probability vectors over them, and the
//! information-theoretic primitives used across the engine.


use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{FloatScalar, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("all weights are zero")]
    AllZero,
    #[error("negative weight at index {index}")]
    NegativeWeight { index: usize },
    #[error("alphabet size mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error("probabilities sum to {sum}, not 1")]
    InvalidSum { sum: String },
    #[error("invalid alphabet: {0}")]
    BadAlphabet(String),
    #[error("cannot parse probability literal {0:?}")]
    BadLiteral(String),
}

/// Finite ordered token set with a designated end-of-sentence token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAlphabet {
    tokens: Vec<String>,
    eos: usize,
}

impl TokenAlphabet {
    pub fn new(tokens: Vec<String>, eos: usize) -> Result<Self, DistError> {
        if tokens.len() < 2 {
            return Err(DistError::BadAlphabet("need at least 2 tokens".into()));
        }
        if eos >= tokens.len() {
            return Err(DistError::BadAlphabet(format!(
                "eos index {eos} out of range for {} tokens",
                tokens.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &tokens {
            if !seen.insert(t) {
                return Err(DistError::BadAlphabet(format!("duplicate token {t:?}")));
            }
        }
        Ok(Self { tokens, eos })
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn eos(&self) -> usize {
        self.eos
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t == token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Bounded token sequence; the generation context window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<usize>,
    max_len: usize,
}

impl TokenSequence {
    pub fn new(tokens: Vec<usize>, max_len: usize) -> Self {
        let mut seq = Self { tokens, max_len };
        seq.trim();
        seq
    }

    pub fn empty(max_len: usize) -> Self {
        Self { tokens: Vec::new(), max_len }
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn push(&mut self, token: usize) {
        self.tokens.push(token);
        self.trim();
    }

    fn trim(&mut self) {
        if self.tokens.len() > self.max_len {
            let start = self.tokens.len() - self.max_len;
            self.tokens.drain(..start);
        }
    }
}

/// Keeps the last `k` tokens of a sequence.
pub fn trim_context(seq: &TokenSequence, k: usize) -> TokenSequence {
    let tokens = seq.tokens();
    let start = tokens.len().saturating_sub(k);
    TokenSequence { tokens: tokens[start..].to_vec(), max_len: k }
}

/// Probability vector over a token alphabet.
///
/// In exact mode the entries sum to one exactly; in floating mode the
/// constructor re-normalizes inputs that are off by at most 1e-6 and
/// rejects anything worse.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenDistribution<S: Scalar> {
    probs: Vec<S>,
}

impl<S: Scalar> TokenDistribution<S> {
    pub fn new(probs: Vec<S>) -> Result<Self, DistError> {
        for (index, p) in probs.iter().enumerate() {
            if p.is_negative() {
                return Err(DistError::NegativeWeight { index });
            }
        }
        let sum = probs.iter().fold(S::zero(), |acc, p| acc + p.clone());
        let err = (sum.clone() - S::one()).abs();
        if err <= S::sum_slack() {
            if S::EXACT || err.is_zero() {
                Ok(Self { probs })
            } else {
                let probs = probs.into_iter().map(|p| p / sum.clone()).collect();
                Ok(Self { probs })
            }
        } else {
            Err(DistError::InvalidSum { sum: sum.literal() })
        }
    }

    /// Skips validation; only for values that are normalized by construction.
    pub(crate) fn new_unchecked(probs: Vec<S>) -> Self {
        Self { probs }
    }

    pub fn point_mass(len: usize, token: usize) -> Self {
        let mut probs = vec![S::zero(); len];
        probs[token] = S::one();
        Self { probs }
    }

    pub fn uniform(len: usize) -> Self {
        Self { probs: vec![S::from_ratio(1, len as i64); len] }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, token: usize) -> &S {
        &self.probs[token]
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TokenDistribution<T> {
        TokenDistribution { probs: self.probs.iter().map(f).collect() }
    }

    /// Floating-point view of this distribution.
    pub fn to_f64(&self) -> TokenDistribution<f64> {
        self.map(|p| p.to_f64())
    }

    pub fn literals(&self) -> Vec<String> {
        self.probs.iter().map(|p| p.literal()).collect()
    }

    pub fn from_literals(lits: &[String]) -> Result<Self, DistError> {
        let probs = lits
            .iter()
            .map(|s| S::parse_literal(s).ok_or_else(|| DistError::BadLiteral(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(probs)
    }
}

fn check_same_len<S: Scalar>(
    p: &TokenDistribution<S>,
    q: &TokenDistribution<S>,
) -> Result<(), DistError> {
    if p.len() != q.len() {
        return Err(DistError::AlphabetMismatch { left: p.len(), right: q.len() });
    }
    Ok(())
}

/// Scales a non-negative weight vector onto the simplex.
pub fn normalize<S: Scalar>(weights: &[S]) -> Result<TokenDistribution<S>, DistError> {
    for (index, w) in weights.iter().enumerate() {
        if w.is_negative() {
            return Err(DistError::NegativeWeight { index });
        }
    }
    let total = weights.iter().fold(S::zero(), |acc, w| acc + w.clone());
    if total.is_zero() {
        return Err(DistError::AllZero);
    }
    Ok(TokenDistribution::new_unchecked(
        weights.iter().map(|w| w.clone() / total.clone()).collect(),
    ))
}

/// Total variation distance ½·Σ|p − q|.
pub fn tv_distance<S: Scalar>(
    p: &TokenDistribution<S>,
    q: &TokenDistribution<S>,
) -> Result<S, DistError> {
    check_same_len(p, q)?;
    let sum = p
        .probs()
        .iter()
        .zip(q.probs())
        .fold(S::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    Ok(sum / S::from_int(2))
}

/// D_KL(p ‖ q) = Σ p(t)·ln(p(t)/q(t)), with 0·ln 0 = 0.
pub fn kl_divergence<S: FloatScalar>(
    p: &TokenDistribution<S>,
    q: &TokenDistribution<S>,
) -> Result<S, DistError> {
    check_same_len(p, q)?;
    let mut acc = S::zero();
    for (a, b) in p.probs().iter().zip(q.probs()) {
        if a.is_zero() {
            continue;
        }
        if b.is_zero() {
            return Ok(S::infinity());
        }
        acc = acc + *a * (*a / *b).ln();
    }
    Ok(acc)
}

/// Shannon entropy H(p) in nats.
pub fn entropy<S: FloatScalar>(p: &TokenDistribution<S>) -> S {
    let mut acc = S::zero();
    for a in p.probs() {
        if !a.is_zero() {
            acc = acc - *a * a.ln();
        }
    }
    acc
}

/// Cross entropy H(p, q) in nats.
pub fn cross_entropy<S: FloatScalar>(
    p: &TokenDistribution<S>,
    q: &TokenDistribution<S>,
) -> Result<S, DistError> {
    check_same_len(p, q)?;
    let mut acc = S::zero();
    for (a, b) in p.probs().iter().zip(q.probs()) {
        if a.is_zero() {
            continue;
        }
        if b.is_zero() {
            return Ok(S::infinity());
        }
        acc = acc - *a * b.ln();
    }
    Ok(acc)
}

impl<S: Scalar> Serialize for TokenDistribution<S> {
    fn serialize<Ser: serde::Serializer>(&self, ser: Ser) -> Result<Ser::Ok, Ser::Error> {
        self.literals().serialize(ser)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for TokenDistribution<S> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Text(String),
            Number(f64),
        }
        let entries = Vec::<Entry>::deserialize(de)?;
        let lits: Vec<String> = entries
            .into_iter()
            .map(|e| match e {
                Entry::Text(s) => s,
                Entry::Number(v) => format!("{v}"),
            })
            .collect();
        Self::from_literals(&lits).map_err(serde::de::Error::custom)
    }
}
