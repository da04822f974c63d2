//! Mock generative agents (context in, next-token distribution out) and the
//! autoregressive auction runner that aggregates, samples, and bills one
//! token at a time.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::{AggError, AggregationRule, BidProfile};
use crate::distributions::{trim_context, DistError, TokenAlphabet, TokenSequence};
use crate::payments::{step_prices, PayError};
use crate::scalar::{rational_from_f64, Scalar};
use crate::{Rational, RationalDist};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("at least one agent is required")]
    NoAgents,
    #[error("expected {expected} bids, got {got}")]
    BidCountMismatch { expected: usize, got: usize },
    #[error("agent {agent} produced a distribution over {got} tokens, expected {expected}")]
    VocabMismatch { agent: usize, expected: usize, got: usize },
    #[error("lambda must lie in [0, 1]")]
    BadLambda,
    #[error(transparent)]
    Agg(#[from] AggError),
    #[error(transparent)]
    Pay(#[from] PayError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// One lookup-table row: a context suffix and the distribution it triggers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub context: Vec<usize>,
    pub probs: RationalDist,
}

/// A stateless mock model f: T* -> Δ(T).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Agent {
    /// Longest-matching-suffix lookup with a default fallback.
    Table {
        #[serde(default)]
        entries: Vec<TableEntry>,
        default: RationalDist,
    },
    /// Order-m counts with add-one smoothing over a fixed vocabulary.
    Ngram {
        order: usize,
        vocab: usize,
        counts: Vec<(Vec<usize>, Vec<u64>)>,
    },
    /// A base agent evaluated behind a fixed prompt prefix.
    PromptPrefix {
        base: Box<Agent>,
        prompt: Vec<usize>,
    },
}

impl Agent {
    /// Counts order-m transitions in a token corpus.
    pub fn ngram_from_corpus(order: usize, vocab: usize, corpus: &[Vec<usize>]) -> Self {
        let mut counts: Vec<(Vec<usize>, Vec<u64>)> = Vec::new();
        for seq in corpus {
            for i in order..seq.len() {
                let ctx = seq[i - order..i].to_vec();
                let next = seq[i];
                match counts.iter_mut().find(|(c, _)| *c == ctx) {
                    Some((_, row)) => row[next] += 1,
                    None => {
                        let mut row = vec![0u64; vocab];
                        row[next] += 1;
                        counts.push((ctx, row));
                    }
                }
            }
        }
        counts.sort_by(|(a, _), (b, _)| a.cmp(b));
        Agent::Ngram { order, vocab, counts }
    }

    pub fn vocab_size(&self) -> usize {
        match self {
            Agent::Table { default, .. } => default.len(),
            Agent::Ngram { vocab, .. } => *vocab,
            Agent::PromptPrefix { base, .. } => base.vocab_size(),
        }
    }

    /// The next-token distribution for a context (already capped at the
    /// model's window by `TokenSequence`).
    pub fn next_distribution(&self, context: &TokenSequence) -> Result<RationalDist, DistError> {
        match self {
            Agent::Table { entries, default } => {
                let ctx = context.tokens();
                // longest matching suffix wins
                let mut best: Option<&TableEntry> = None;
                for e in entries {
                    if ctx.ends_with(&e.context)
                        && best.map_or(true, |b| e.context.len() > b.context.len())
                    {
                        best = Some(e);
                    }
                }
                Ok(best.map_or_else(|| default.clone(), |e| e.probs.clone()))
            }
            Agent::Ngram { order, vocab, counts } => {
                let ctx = trim_context(context, *order);
                let row = counts
                    .iter()
                    .find(|(c, _)| c.as_slice() == ctx.tokens())
                    .map(|(_, row)| row.clone())
                    .unwrap_or_else(|| vec![0; *vocab]);
                let total: u64 = row.iter().sum::<u64>() + *vocab as u64;
                let probs = row
                    .iter()
                    .map(|&c| Rational::from_ratio(c as i64 + 1, total as i64))
                    .collect();
                RationalDist::new(probs)
            }
            Agent::PromptPrefix { base, prompt } => {
                let mut tokens = prompt.clone();
                tokens.extend_from_slice(context.tokens());
                base.next_distribution(&TokenSequence::new(tokens, context.max_len()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Eos,
    MaxLen,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub context: Vec<usize>,
    pub agent_dists: Vec<RationalDist>,
    pub bids: Vec<String>,
    pub aggregate: RationalDist,
    pub token: usize,
    /// expected second-price payments, as exact literals; absent when the
    /// rule is not declared monotone
    pub payments: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuctionTrace {
    pub seed: u64,
    pub rule: String,
    pub steps: Vec<TraceStep>,
    pub tokens: Vec<usize>,
    pub terminated_by: Termination,
    pub warnings: Vec<String>,
}

impl AuctionTrace {
    /// Sum of expected payments per agent over the whole trace, when billed.
    pub fn total_payments(&self) -> Option<Vec<Rational>> {
        let agents = self.steps.first()?.agent_dists.len();
        let mut totals = vec![Rational::zero(); agents];
        for step in &self.steps {
            let pays = step.payments.as_ref()?;
            for (t, p) in totals.iter_mut().zip(pays) {
                *t += Rational::parse_literal(p).expect("trace literals are well-formed");
            }
        }
        Some(totals)
    }

    /// One JSON object per step.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&serde_json::to_string(step).expect("trace steps serialize"));
            out.push('\n');
        }
        out
    }

    /// Tidy summary: step, token, per-agent payment columns.
    pub fn to_csv_summary(&self) -> String {
        let agents = self.steps.first().map_or(0, |s| s.agent_dists.len());
        let mut out = String::from("step,token");
        for a in 0..agents {
            out.push_str(&format!(",payment_{a}"));
        }
        out.push('\n');
        for s in &self.steps {
            out.push_str(&format!("{},{}", s.step, s.token));
            for a in 0..agents {
                let cell = s
                    .payments
                    .as_ref()
                    .map_or_else(|| "n/a".to_string(), |p| p[a].clone());
                out.push_str(&format!(",{cell}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, alphabet: &TokenAlphabet) -> String {
        self.tokens
            .iter()
            .map(|&t| alphabet.tokens()[t].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub seed: u64,
    pub max_len: usize,
    /// context window K
    pub context_window: usize,
    pub eos: Option<usize>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { seed: 0, max_len: 32, context_window: 8, eos: None }
    }
}

/// One uniform draw per step from a counter-based stream: the generator is
/// repositioned to `step`'s fixed offset before each draw, so a step's
/// randomness never depends on how earlier steps consumed the stream.
fn step_uniform(rng: &mut ChaCha8Rng, step: usize) -> f64 {
    rng.set_word_pos(step as u128 * 2);
    rng.gen::<f64>()
}

/// CDF inversion in canonical token order: the emitted token is the first t
/// with Σ_{j<t} q_j < r ≤ Σ_{j≤t} q_j.
fn invert_cdf(q: &RationalDist, r: f64) -> usize {
    let r = rational_from_f64(r.clamp(0.0, 1.0)).unwrap_or_else(Rational::zero);
    let mut acc = Rational::zero();
    let mut last_support = 0;
    for (t, p) in q.probs().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        last_support = t;
        acc += p.clone();
        if r <= acc {
            return t;
        }
    }
    last_support
}

/// Runs the token auction autoregressively from `prompt` until EOS or
/// `max_len` generated tokens.
pub fn run_auction(
    agents: &[Agent],
    bids: &BidProfile<Rational>,
    rule: &AggregationRule,
    prompt: &[usize],
    settings: &RunSettings,
) -> Result<AuctionTrace, GenError> {
    if agents.is_empty() {
        return Err(GenError::NoAgents);
    }
    if bids.len() != agents.len() {
        return Err(GenError::BidCountMismatch { expected: agents.len(), got: bids.len() });
    }
    let vocab = agents[0].vocab_size();
    let mut warnings = Vec::new();
    if !rule.declared_monotone() {
        warnings.push(format!(
            "rule {} is not declared monotone; per-step payments are not billed",
            rule.name()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut context: Vec<usize> = prompt.to_vec();
    let mut steps = Vec::new();
    let mut tokens = Vec::new();
    let mut terminated_by = Termination::MaxLen;
    for step in 0..settings.max_len {
        let ctx = trim_context(
            &TokenSequence::new(context.clone(), context.len().max(1)),
            settings.context_window,
        );
        let mut agent_dists = Vec::with_capacity(agents.len());
        for (i, agent) in agents.iter().enumerate() {
            let d = agent.next_distribution(&ctx)?;
            if d.len() != vocab {
                return Err(GenError::VocabMismatch { agent: i, expected: vocab, got: d.len() });
            }
            agent_dists.push(d);
        }
        let aggregate = rule.evaluate(bids, &agent_dists)?;
        let token = invert_cdf(&aggregate, step_uniform(&mut rng, step));
        let payments = if rule.declared_monotone() {
            Some(step_prices(rule, bids, &agent_dists)?.iter().map(|z| z.literal()).collect())
        } else {
            None
        };
        steps.push(TraceStep {
            step,
            context: ctx.tokens().to_vec(),
            agent_dists,
            bids: bids.bids().iter().map(|b| b.literal()).collect(),
            aggregate,
            token,
            payments,
        });
        tokens.push(token);
        context.push(token);
        if Some(token) == settings.eos {
            terminated_by = Termination::Eos;
            break;
        }
    }
    Ok(AuctionTrace {
        seed: settings.seed,
        rule: rule.name().to_string(),
        steps,
        tokens,
        terminated_by,
        warnings,
    })
}

/// Runs the two-agent sweep with bids (λ, 1−λ) for each λ, sharing one seed.
pub fn sweep_lambda(
    agents: &[Agent],
    rule: &AggregationRule,
    prompt: &[usize],
    lambdas: &[Rational],
    settings: &RunSettings,
) -> Result<Vec<(Rational, AuctionTrace)>, GenError> {
    if agents.len() != 2 {
        return Err(GenError::BidCountMismatch { expected: 2, got: agents.len() });
    }
    let one = Rational::one();
    let mut out = Vec::with_capacity(lambdas.len());
    for lam in lambdas {
        if lam.is_negative() || *lam > one {
            return Err(GenError::BadLambda);
        }
        let bids = BidProfile::new(vec![lam.clone(), one.clone() - lam.clone()])
            .expect("lambda bids are non-negative");
        out.push((lam.clone(), run_auction(agents, &bids, rule, prompt, settings)?));
    }
    Ok(out)
}

/// Bundled mock agents: two brands sharing a 12-token toy alphabet.
pub mod mock {
    use super::*;

    /// 12 tokens, index 0 is EOS.
    pub fn toy_alphabet() -> TokenAlphabet {
        TokenAlphabet::new(
            ["<eos>", "fly", "sky", "wings", "miles", "sun", "sand", "waves", "spa", "book", "your", "trip"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            0,
        )
        .expect("toy alphabet is valid")
    }

    /// Tokens the airline brand pushes.
    pub const AIRLINE_BRAND: [usize; 4] = [1, 2, 3, 4];
    /// Tokens the resort brand pushes.
    pub const RESORT_BRAND: [usize; 4] = [5, 6, 7, 8];

    fn bigram_brand_agent(brand: &[usize; 4]) -> Agent {
        // short slogans: shared opener "book your trip", brand body, EOS
        let b = brand;
        let corpus: Vec<Vec<usize>> = vec![
            vec![9, 10, 11, b[0], b[1], b[2], b[3], 0],
            vec![9, 10, b[0], b[2], b[1], b[3], 0],
            vec![10, 11, b[1], b[0], b[3], 0],
            vec![b[0], b[1], b[0], b[2], 0],
            vec![9, b[3], b[2], b[1], 0],
        ];
        Agent::ngram_from_corpus(1, 12, &corpus)
    }

    pub fn airline_agent() -> Agent {
        Agent::PromptPrefix {
            base: Box::new(bigram_brand_agent(&AIRLINE_BRAND)),
            prompt: vec![9],
        }
    }

    pub fn resort_agent() -> Agent {
        Agent::PromptPrefix {
            base: Box::new(bigram_brand_agent(&RESORT_BRAND)),
            prompt: vec![9],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn rd(parts: &[(i64, i64)]) -> RationalDist {
        RationalDist::new(parts.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    fn table_agent(probs: RationalDist) -> Agent {
        Agent::Table { entries: vec![], default: probs }
    }

    #[test]
    fn table_agent_lookup_and_fallback() {
        let agent = Agent::Table {
            entries: vec![
                TableEntry { context: vec![], probs: rd(&[(1, 2), (1, 2)]) },
                TableEntry { context: vec![1], probs: rd(&[(1, 1), (0, 1)]) },
                TableEntry { context: vec![0, 1], probs: rd(&[(0, 1), (1, 1)]) },
            ],
            default: rd(&[(1, 4), (3, 4)]),
        };
        let ctx = |t: &[usize]| TokenSequence::new(t.to_vec(), 8);
        // empty-context entry matches everything as a last resort
        assert_eq!(agent.next_distribution(&ctx(&[])).unwrap(), rd(&[(1, 2), (1, 2)]));
        // longest suffix wins
        assert_eq!(agent.next_distribution(&ctx(&[1])).unwrap(), rd(&[(1, 1), (0, 1)]));
        assert_eq!(agent.next_distribution(&ctx(&[0, 1])).unwrap(), rd(&[(0, 1), (1, 1)]));
        assert_eq!(agent.next_distribution(&ctx(&[1, 0])).unwrap(), rd(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn ngram_counts_and_smoothing() {
        // "abab" with a=0, b=1: after 'a' the counts are (0, 2); add-one
        // smoothing over a 2-token vocab gives (1/4, 3/4)
        let agent = Agent::ngram_from_corpus(1, 2, &[vec![0, 1, 0, 1]]);
        let after_a = agent.next_distribution(&TokenSequence::new(vec![0], 4)).unwrap();
        assert_eq!(after_a, rd(&[(1, 4), (3, 4)]));
        // unseen context: uniform
        let unseen = Agent::ngram_from_corpus(1, 2, &[vec![0, 1]]);
        let after_b = unseen.next_distribution(&TokenSequence::new(vec![1], 4)).unwrap();
        assert_eq!(after_b, rd(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn prompt_prefix_is_prepended_and_trimmed() {
        // order-1 model: prefix shifts which bigram row a short context hits
        let base = Agent::ngram_from_corpus(1, 2, &[vec![0, 0, 1, 1]]);
        let wrapped = Agent::PromptPrefix { base: Box::new(base.clone()), prompt: vec![1] };
        let empty = TokenSequence::empty(4);
        assert_eq!(
            wrapped.next_distribution(&empty).unwrap(),
            base.next_distribution(&TokenSequence::new(vec![1], 4)).unwrap()
        );
        // with a non-empty context the suffix, not the prompt, decides
        let ctx = TokenSequence::new(vec![0], 4);
        assert_eq!(
            wrapped.next_distribution(&ctx).unwrap(),
            base.next_distribution(&ctx).unwrap()
        );
    }

    #[test]
    fn zero_bid_opponent_collapses_to_solo_run() {
        let a = table_agent(rd(&[(1, 2), (1, 4), (1, 4)]));
        let b = table_agent(rd(&[(1, 10), (1, 10), (4, 5)]));
        let settings = RunSettings { seed: 7, max_len: 12, ..Default::default() };
        let duo = run_auction(
            &[a.clone(), b],
            &BidProfile::from_ints(&[1, 0]),
            &AggregationRule::Linear,
            &[],
            &settings,
        )
        .unwrap();
        let solo = run_auction(
            &[a],
            &BidProfile::from_ints(&[1]),
            &AggregationRule::Linear,
            &[],
            &settings,
        )
        .unwrap();
        assert_eq!(duo.tokens, solo.tokens);
    }

    #[test]
    fn traces_replay_deterministically() {
        let agents = [mock::airline_agent(), mock::resort_agent()];
        let settings = RunSettings { seed: 3, max_len: 16, eos: Some(0), ..Default::default() };
        let bids = BidProfile::new(vec![rat(1, 3), rat(2, 3)]).unwrap();
        let t1 = run_auction(&agents, &bids, &AggregationRule::Linear, &[10], &settings).unwrap();
        let t2 = run_auction(&agents, &bids, &AggregationRule::Linear, &[10], &settings).unwrap();
        assert_eq!(serde_json::to_string(&t1).unwrap(), serde_json::to_string(&t2).unwrap());
        // statelessness: each step's distributions recompute from its context
        for step in &t1.steps {
            let ctx = TokenSequence::new(step.context.clone(), settings.context_window);
            for (agent, recorded) in agents.iter().zip(&step.agent_dists) {
                assert_eq!(&agent.next_distribution(&ctx).unwrap(), recorded);
            }
        }
        assert!(t1.steps.len() <= 16);
    }

    #[test]
    fn equal_agents_make_lambda_irrelevant() {
        let agents = [mock::airline_agent(), mock::airline_agent()];
        let settings = RunSettings { seed: 11, max_len: 10, eos: Some(0), ..Default::default() };
        let lambdas = vec![rat(0, 1), rat(1, 2), rat(1, 1)];
        let sweeps =
            sweep_lambda(&agents, &AggregationRule::Linear, &[9], &lambdas, &settings).unwrap();
        let first = &sweeps[0].1.tokens;
        assert!(sweeps.iter().all(|(_, t)| &t.tokens == first));
    }

    #[test]
    fn sweep_endpoints_match_solo_runs() {
        let agents = [mock::airline_agent(), mock::resort_agent()];
        let settings = RunSettings { seed: 5, max_len: 16, eos: Some(0), ..Default::default() };
        for rule in [AggregationRule::Linear, AggregationRule::LogLinear] {
            let sweeps = sweep_lambda(
                &agents,
                &rule,
                &[9],
                &[rat(1, 1), rat(0, 1)],
                &settings,
            )
            .unwrap();
            for (lam, trace) in &sweeps {
                let solo_agent =
                    if lam.is_one() { agents[0].clone() } else { agents[1].clone() };
                let solo = run_auction(
                    &[solo_agent],
                    &BidProfile::from_ints(&[1]),
                    &rule,
                    &[9],
                    &settings,
                )
                .unwrap();
                assert_eq!(trace.tokens, solo.tokens);
                assert_eq!(trace.terminated_by, solo.terminated_by);
            }
        }
    }

    #[test]
    fn loglinear_runs_unbilled_with_a_warning() {
        let agents = [mock::airline_agent(), mock::resort_agent()];
        let settings = RunSettings { seed: 2, max_len: 6, ..Default::default() };
        let bids = BidProfile::from_ints(&[1, 1]);
        let trace =
            run_auction(&agents, &bids, &AggregationRule::LogLinear, &[9], &settings).unwrap();
        assert_eq!(trace.warnings.len(), 1);
        assert!(trace.steps.iter().all(|s| s.payments.is_none()));
        assert!(trace.total_payments().is_none());

        let billed =
            run_auction(&agents, &bids, &AggregationRule::Linear, &[9], &settings).unwrap();
        assert!(billed.warnings.is_empty());
        let totals = billed.total_payments().unwrap();
        assert_eq!(totals.len(), 2);
        assert!(totals.iter().all(|t| !t.is_negative()));
    }

    #[test]
    fn trace_artifacts_have_expected_shape() {
        let agents = [mock::airline_agent(), mock::resort_agent()];
        let settings = RunSettings { seed: 1, max_len: 4, ..Default::default() };
        let trace = run_auction(
            &agents,
            &BidProfile::from_ints(&[1, 1]),
            &AggregationRule::Linear,
            &[9],
            &settings,
        )
        .unwrap();
        let jsonl = trace.to_jsonl();
        assert_eq!(jsonl.trim().lines().count(), trace.steps.len());
        let csv = trace.to_csv_summary();
        assert!(csv.starts_with("step,token,payment_0,payment_1\n"));
        assert_eq!(csv.trim().lines().count(), trace.steps.len() + 1);
        let text = trace.render(&mock::toy_alphabet());
        assert_eq!(text.split(' ').count(), trace.tokens.len());
    }

    #[test]
    fn agents_round_trip_through_json() {
        let agent = mock::airline_agent();
        let json = serde_json::to_string(&agent).unwrap();
        assert!(json.contains("\"kind\":\"prompt_prefix\""));
        let back: Agent = serde_json::from_str(&json).unwrap();
        let ctx = TokenSequence::new(vec![9, 10], 8);
        assert_eq!(
            agent.next_distribution(&ctx).unwrap(),
            back.next_distribution(&ctx).unwrap()
        );
    }
}
