//! Finite-grid auditors for monotone aggregation, consistency, and payment
//! monotonicity, plus the constructive strategy-mapping (revelation)
//! procedure on finite bid sets.
//!
//! All verdicts are grid-relative: a Pass certifies the tested grid only,
//! and every report records a hash of that grid.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::aggregation::{AggError, AggregationRule, BidProfile, CustomRule};
use crate::distributions::DistError;
use crate::payments::PayError;
use crate::preferences::{
    order_embedding, partition_tokens, robust_compare, OrderError, PreferenceVerdict,
};
use crate::scalar::Scalar;
use crate::{Rational, RationalDist};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("bid grid must be non-empty, strictly increasing, and non-negative (agent {agent})")]
    BadGrid { agent: usize },
    #[error("agent index {agent} out of range for {agents} agents")]
    BadAgent { agent: usize, agents: usize },
    #[error("rule is inconsistent on this grid; no strategy mapping exists")]
    Inconsistent { report: Box<AuditReport> },
    #[error("aggregates at bids {left} and {right} are not totally ordered")]
    NotTotallyOrdered { left: String, right: String },
    #[error(transparent)]
    Agg(#[from] AggError),
    #[error(transparent)]
    Pay(#[from] PayError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Per-agent sorted exact bid values.
#[derive(Debug, Clone, PartialEq)]
pub struct BidGrid {
    per_agent: Vec<Vec<Rational>>,
}

impl BidGrid {
    pub fn new(per_agent: Vec<Vec<Rational>>) -> Result<Self, AuditError> {
        for (agent, bids) in per_agent.iter().enumerate() {
            let bad = bids.is_empty()
                || bids[0].is_negative()
                || bids.windows(2).any(|w| w[0] >= w[1]);
            if bad {
                return Err(AuditError::BadGrid { agent });
            }
        }
        Ok(Self { per_agent })
    }

    /// The same bid list for every agent.
    pub fn uniform(agents: usize, bids: Vec<Rational>) -> Result<Self, AuditError> {
        Self::new(vec![bids; agents])
    }

    pub fn agents(&self) -> usize {
        self.per_agent.len()
    }

    pub fn agent(&self, i: usize) -> &[Rational] {
        &self.per_agent[i]
    }

    /// All combinations of opponents' bids (agent `i` excluded), in
    /// lexicographic grid order. Each tuple lists (agent, bid).
    fn opponent_tuples(&self, agent: usize) -> Vec<Vec<(usize, Rational)>> {
        let others: Vec<usize> = (0..self.agents()).filter(|&j| j != agent).collect();
        let mut tuples = vec![Vec::new()];
        for &j in &others {
            let mut next = Vec::new();
            for t in &tuples {
                for b in &self.per_agent[j] {
                    let mut t = t.clone();
                    t.push((j, b.clone()));
                    next.push(t);
                }
            }
            tuples = next;
        }
        tuples
    }

    fn hash(&self) -> String {
        // FNV-1a over the literal grid values
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for bids in &self.per_agent {
            for b in bids {
                eat(b.literal().as_bytes());
                eat(b";");
            }
            eat(b"|");
        }
        format!("{h:016x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

/// One counterexample tuple. All numeric values are exact literals so the
/// violation can be re-verified independently.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub agent: usize,
    pub opponent_bids: Vec<String>,
    pub bid_low: String,
    pub bid_high: String,
    pub token: Option<usize>,
    pub values: Vec<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub check: String,
    pub rule: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub checked_points: u64,
    pub grid_hash: String,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl AuditReport {
    fn new(check: &str, rule: &AggregationRule, grid: &BidGrid) -> Self {
        Self {
            check: check.to_string(),
            rule: rule.name().to_string(),
            verdict: Verdict::Pass,
            witnesses: Vec::new(),
            checked_points: 0,
            grid_hash: grid.hash(),
            warnings: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, w: Witness) {
        self.verdict = Verdict::Fail;
        self.witnesses.push(w);
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn validate_instance(
    dists: &[RationalDist],
    grid: &BidGrid,
    agent: usize,
) -> Result<(), AuditError> {
    if agent >= grid.agents() || grid.agents() != dists.len() {
        return Err(AuditError::BadAgent { agent, agents: grid.agents().min(dists.len()) });
    }
    Ok(())
}

fn anchor_warning(report: &mut AuditReport, grid: &BidGrid, agent: usize) {
    if !grid.agent(agent)[0].is_zero() {
        report.warnings.push(format!(
            "agent {agent}: 0 not in grid; token partition anchored at bid {}",
            grid.agent(agent)[0].literal()
        ));
    }
}

fn profile_with(tuple: &[(usize, Rational)], agent: usize, bid: &Rational, n: usize) -> Bids {
    let mut bids = vec![Rational::zero(); n];
    for (j, b) in tuple {
        bids[*j] = b.clone();
    }
    bids[agent] = bid.clone();
    BidProfile::new(bids).expect("grid bids are non-negative")
}

type Bids = BidProfile<Rational>;

fn tuple_literals(tuple: &[(usize, Rational)]) -> Vec<String> {
    tuple.iter().map(|(j, b)| format!("{}={}", j, b.literal())).collect()
}

const ZERO_PROFILE_WARNING: &str =
    "all-zero bid profiles are outside the rule's domain and were skipped";

/// Evaluates the rule, treating the all-zero profile (outside the rule's
/// domain) as an absent grid point rather than an error.
fn try_eval(
    rule: &AggregationRule,
    profile: &Bids,
    dists: &[RationalDist],
    report: &mut AuditReport,
) -> Result<Option<RationalDist>, AuditError> {
    match rule.evaluate(profile, dists) {
        Ok(q) => {
            report.checked_points += 1;
            Ok(Some(q))
        }
        Err(AggError::ZeroTotalBid) => {
            if !report.warnings.iter().any(|w| w == ZERO_PROFILE_WARNING) {
                report.warnings.push(ZERO_PROFILE_WARNING.into());
            }
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Checks the per-token monotone conditions for one agent: along their bid
/// axis, undersampled tokens weakly rise toward the agent's preferred mass
/// and oversampled ones weakly fall toward it, for every opponent tuple.
///
/// The token partition is anchored at the agent's minimum grid bid.
pub fn check_monotone(
    rule: &AggregationRule,
    dists: &[RationalDist],
    agent: usize,
    grid: &BidGrid,
) -> Result<AuditReport, AuditError> {
    validate_instance(dists, grid, agent)?;
    let mut report = AuditReport::new("monotone", rule, grid);
    anchor_warning(&mut report, grid, agent);
    let p = &dists[agent];
    for tuple in grid.opponent_tuples(agent) {
        let mut bids_used = Vec::new();
        let mut points = Vec::new();
        for b in grid.agent(agent) {
            let profile = profile_with(&tuple, agent, b, dists.len());
            if let Some(q) = try_eval(rule, &profile, dists, &mut report)? {
                bids_used.push(b.clone());
                points.push(q);
            }
        }
        if points.is_empty() {
            continue;
        }
        let partition = partition_tokens(p, &points[0])?;
        for token in 0..p.len() {
            let under = partition.is_undersampled(token);
            for k in 0..points.len() {
                let q_t = points[k].prob(token);
                let bound_ok = if under { q_t <= p.prob(token) } else { q_t >= p.prob(token) };
                let step_ok = k == 0
                    || if under {
                        points[k - 1].prob(token) <= q_t
                    } else {
                        points[k - 1].prob(token) >= q_t
                    };
                if bound_ok && step_ok {
                    continue;
                }
                let prev = if k == 0 { k } else { k - 1 };
                report.fail(Witness {
                    agent,
                    opponent_bids: tuple_literals(&tuple),
                    bid_low: bids_used[prev].literal(),
                    bid_high: bids_used[k].literal(),
                    token: Some(token),
                    values: vec![
                        points[prev].prob(token).literal(),
                        q_t.literal(),
                        p.prob(token).literal(),
                    ],
                    detail: if !bound_ok {
                        format!(
                            "token {token} crosses the preferred mass ({} side)",
                            if under { "undersampled" } else { "oversampled" }
                        )
                    } else {
                        format!(
                            "token {token} moves the wrong way ({} side)",
                            if under { "undersampled" } else { "oversampled" }
                        )
                    },
                });
            }
        }
    }
    Ok(report)
}

/// Checks that each agent's bid raises order aggregates the same way under
/// every opponent tuple: a pair judged strictly preferred under one tuple
/// must never be judged strictly less under another.
pub fn check_consistency(
    rule: &AggregationRule,
    dists: &[RationalDist],
    grid: &BidGrid,
) -> Result<AuditReport, AuditError> {
    let mut report = AuditReport::new("consistency", rule, grid);
    for agent in 0..grid.agents() {
        validate_instance(dists, grid, agent)?;
        let p = &dists[agent];
        let bids = grid.agent(agent);
        let tuples = grid.opponent_tuples(agent);
        for lo in 0..bids.len() {
            for hi in lo + 1..bids.len() {
                let mut first_preferred: Option<usize> = None;
                let mut first_less: Option<usize> = None;
                for (ti, tuple) in tuples.iter().enumerate() {
                    let q_lo = try_eval(
                        rule,
                        &profile_with(tuple, agent, &bids[lo], dists.len()),
                        dists,
                        &mut report,
                    )?;
                    let q_hi = try_eval(
                        rule,
                        &profile_with(tuple, agent, &bids[hi], dists.len()),
                        dists,
                        &mut report,
                    )?;
                    let (Some(q_lo), Some(q_hi)) = (q_lo, q_hi) else {
                        continue;
                    };
                    match robust_compare(p, &q_hi, &q_lo)? {
                        PreferenceVerdict::StrictlyPreferred => {
                            first_preferred.get_or_insert(ti);
                        }
                        PreferenceVerdict::StrictlyLess => {
                            first_less.get_or_insert(ti);
                        }
                        _ => {}
                    }
                }
                if let (Some(a), Some(b)) = (first_preferred, first_less) {
                    report.fail(Witness {
                        agent,
                        opponent_bids: tuple_literals(&tuples[a]),
                        bid_low: bids[lo].literal(),
                        bid_high: bids[hi].literal(),
                        token: None,
                        values: tuple_literals(&tuples[b]),
                        detail: "preference between this bid pair flips across opponent tuples"
                            .into(),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Payment-monotonicity audit (Def. iff): a higher payment must coincide
/// exactly with a weakly preferred aggregate. Incomparable aggregate pairs
/// fail by definition: real payments are totally ordered.
pub fn check_payment_monotonicity(
    rule: &AggregationRule,
    mut payment: impl FnMut(&Bids, &[RationalDist]) -> Result<Vec<Rational>, PayError>,
    dists: &[RationalDist],
    grid: &BidGrid,
) -> Result<AuditReport, AuditError> {
    let mut report = AuditReport::new("payment", rule, grid);
    for agent in 0..grid.agents() {
        validate_instance(dists, grid, agent)?;
        let p = &dists[agent];
        let bids = grid.agent(agent);
        for tuple in grid.opponent_tuples(agent) {
            for lo in 0..bids.len() {
                for hi in lo + 1..bids.len() {
                    let pr_lo = profile_with(&tuple, agent, &bids[lo], dists.len());
                    let pr_hi = profile_with(&tuple, agent, &bids[hi], dists.len());
                    let q_lo = try_eval(rule, &pr_lo, dists, &mut report)?;
                    let q_hi = try_eval(rule, &pr_hi, dists, &mut report)?;
                    let (Some(q_lo), Some(q_hi)) = (q_lo, q_hi) else {
                        continue;
                    };
                    let z_lo = payment(&pr_lo, dists)?[agent].clone();
                    let z_hi = payment(&pr_hi, dists)?[agent].clone();
                    let verdict = robust_compare(p, &q_hi, &q_lo)?;
                    let ok = match verdict {
                        PreferenceVerdict::Equal => z_hi == z_lo,
                        PreferenceVerdict::StrictlyPreferred => z_hi > z_lo,
                        PreferenceVerdict::StrictlyLess => z_hi < z_lo,
                        PreferenceVerdict::Incomparable => false,
                    };
                    if !ok {
                        report.fail(Witness {
                            agent,
                            opponent_bids: tuple_literals(&tuple),
                            bid_low: bids[lo].literal(),
                            bid_high: bids[hi].literal(),
                            token: None,
                            values: vec![z_lo.literal(), z_hi.literal()],
                            detail: format!(
                                "payments ({}, {}) disagree with preference verdict {verdict:?}",
                                z_lo.literal(),
                                z_hi.literal()
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Result of the revelation construction for one agent.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyMapping {
    pub agent: usize,
    /// original bid -> image, in grid order
    pub bids: Vec<String>,
    pub images: Vec<String>,
    /// monotone re-audit of the relabeled rule on the image grid
    pub report: AuditReport,
}

/// Builds the strategy mapping π of the revelation argument on a finite bid
/// set: bids are ranked by the preference order their aggregates induce
/// (which consistency makes opponent-independent), embedded into the
/// rationals, and the rule is relabeled through π and re-audited for
/// monotonicity on the image grid.
pub fn construct_strategy_mapping(
    rule: &AggregationRule,
    dists: &[RationalDist],
    agent: usize,
    grid: &BidGrid,
) -> Result<StrategyMapping, AuditError> {
    validate_instance(dists, grid, agent)?;
    let consistency = check_consistency(rule, dists, grid)?;
    if !consistency.passed() {
        return Err(AuditError::Inconsistent { report: Box::new(consistency) });
    }
    let p = &dists[agent];
    let bids = grid.agent(agent);
    let tuples = grid.opponent_tuples(agent);
    // aggregates per (bid, tuple), evaluated once; None marks the all-zero
    // profile, which carries no preference information
    let mut scratch = AuditReport::new("scratch", rule, grid);
    let mut table = Vec::with_capacity(bids.len());
    for b in bids {
        let mut row = Vec::with_capacity(tuples.len());
        for tuple in &tuples {
            row.push(try_eval(rule, &profile_with(tuple, agent, b, dists.len()), dists, &mut scratch)?);
        }
        table.push(row);
    }
    // combine verdicts across tuples; consistency rules out conflicts, but
    // any Incomparable pair breaks totality
    let cmp = |i: &usize, j: &usize| -> Option<std::cmp::Ordering> {
        let mut order = std::cmp::Ordering::Equal;
        for t in 0..tuples.len() {
            let (Some(qi), Some(qj)) = (&table[*i][t], &table[*j][t]) else {
                continue;
            };
            match robust_compare(p, qi, qj).ok()? {
                PreferenceVerdict::Equal => {}
                PreferenceVerdict::StrictlyPreferred => order = std::cmp::Ordering::Greater,
                PreferenceVerdict::StrictlyLess => order = std::cmp::Ordering::Less,
                PreferenceVerdict::Incomparable => return None,
            }
        }
        Some(order)
    };
    let indices: Vec<usize> = (0..bids.len()).collect();
    let images = order_embedding(&indices, cmp).map_err(|e| match e {
        OrderError::NotTotal { left, right } => AuditError::NotTotallyOrdered {
            left: bids[left].literal(),
            right: bids[right].literal(),
        },
        OrderError::Empty => AuditError::BadGrid { agent },
    })?;

    // relabeled rule: translate the agent's image bid back to the original
    let back: Vec<(Rational, Rational)> =
        images.iter().cloned().zip(bids.iter().cloned()).collect();
    let inner = rule.clone();
    let relabeled = AggregationRule::Custom(CustomRule::new(
        format!("{}~relabel", rule.name()),
        true,
        move |b: &Bids, d: &[RationalDist]| {
            let original = back
                .iter()
                .find(|(img, _)| img == b.bid(agent))
                .map(|(_, orig)| orig.clone())
                .unwrap_or_else(|| b.bid(agent).clone());
            inner.evaluate(&b.with_bid(agent, original), d)
        },
    ));
    let mut image_grid: Vec<Rational> = images.clone();
    image_grid.sort();
    image_grid.dedup();
    let mut per_agent: Vec<Vec<Rational>> = (0..grid.agents()).map(|j| grid.agent(j).to_vec()).collect();
    per_agent[agent] = image_grid;
    let mut report = check_monotone(&relabeled, dists, agent, &BidGrid::new(per_agent)?)?;
    report.notes.push(
        "finite construction: demonstrates the revelation argument on this bid set only".into(),
    );
    Ok(StrategyMapping {
        agent,
        bids: bids.iter().map(|b| b.literal()).collect(),
        images: images.iter().map(|b| b.literal()).collect(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::TokenDistribution;
    use crate::payments::step_prices;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn rd(parts: &[(i64, i64)]) -> RationalDist {
        TokenDistribution::new(parts.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    fn example_dists() -> Vec<RationalDist> {
        vec![rd(&[(1, 2), (2, 5), (1, 10)]), rd(&[(1, 2), (1, 10), (2, 5)])]
    }

    fn int_grid(agents: usize, upto: i64) -> BidGrid {
        BidGrid::uniform(agents, (0..=upto).map(|b| rat(b, 1)).collect()).unwrap()
    }

    #[test]
    fn linear_rule_is_monotone_on_the_example() {
        let dists = example_dists();
        let grid = int_grid(2, 10);
        for agent in 0..2 {
            let report = check_monotone(&AggregationRule::Linear, &dists, agent, &grid).unwrap();
            assert!(report.passed(), "{:?}", report.witnesses.first());
            // only the skipped all-zero profile is worth a warning here
            assert_eq!(report.warnings, vec![ZERO_PROFILE_WARNING.to_string()]);
        }
    }

    #[test]
    fn loglinear_fails_with_the_token_one_witness() {
        let dists = example_dists();
        let grid = BidGrid::new(vec![
            vec![rat(0, 1), rat(1, 1), rat(100, 1)],
            vec![rat(1, 1)],
        ])
        .unwrap();
        let report = check_monotone(&AggregationRule::LogLinear, &dists, 0, &grid).unwrap();
        assert!(!report.passed());
        // q_{t1} is exactly 1/2 at both extremes but 5/9 > 1/2 at b1 = 1
        let w = report.witnesses.iter().find(|w| w.token == Some(0)).unwrap();
        assert_eq!(w.agent, 0);
        assert!(w.detail.contains("crosses") || w.detail.contains("wrong way"));
    }

    #[test]
    fn constant_rule_passes_everything() {
        let constant = AggregationRule::Custom(CustomRule::new("constant", true, |_, _| {
            Ok(TokenDistribution::new(vec![
                rat(1, 3),
                rat(1, 3),
                rat(1, 3),
            ])?)
        }));
        let dists = example_dists();
        let grid = int_grid(2, 3);
        assert!(check_monotone(&constant, &dists, 0, &grid).unwrap().passed());
        assert!(check_consistency(&constant, &dists, &grid).unwrap().passed());
        // zero payments alongside a constant rule
        let zero = |b: &Bids, _: &[RationalDist]| Ok(vec![Rational::zero(); b.len()]);
        assert!(check_payment_monotonicity(&constant, zero, &dists, &grid)
            .unwrap()
            .passed());
    }

    #[test]
    fn anchor_warning_when_zero_missing() {
        let dists = example_dists();
        let grid = BidGrid::uniform(2, vec![rat(1, 1), rat(2, 1)]).unwrap();
        let report = check_monotone(&AggregationRule::Linear, &dists, 0, &grid).unwrap();
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn consistency_detects_a_constructed_flip() {
        // hand-built rule: agent 0's raise helps them when agent 1 bids low
        // and hurts them when agent 1 bids high
        let flip = AggregationRule::Custom(CustomRule::new("flip", false, |b: &Bids, d| {
            let dists = [d[0].clone(), d[1].clone()];
            let raise = *b.bid(0) >= Rational::from_int(1);
            let high_opp = *b.bid(1) >= Rational::from_int(1);
            let toward = raise != high_opp;
            Ok(if toward { dists[0].clone() } else { dists[1].clone() })
        }));
        let dists = vec![rd(&[(1, 1), (0, 1)]), rd(&[(0, 1), (1, 1)])];
        let grid = int_grid(2, 1);
        let report = check_consistency(&flip, &dists, &grid).unwrap();
        assert!(!report.passed());
        assert_eq!(report.witnesses[0].agent, 0);
    }

    #[test]
    fn single_agent_consistency_is_vacuous() {
        let dists = vec![rd(&[(1, 2), (1, 2)])];
        let grid = BidGrid::uniform(1, vec![rat(1, 1), rat(2, 1)]).unwrap();
        let report = check_consistency(&AggregationRule::Linear, &dists, &grid).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn second_price_payments_are_payment_monotone() {
        let dists = vec![rd(&[(1, 1), (0, 1)]), rd(&[(0, 1), (1, 1)])];
        let grid = int_grid(2, 3);
        let rule = AggregationRule::Linear;
        let pay = |b: &Bids, d: &[RationalDist]| step_prices(&rule, b, d);
        let report =
            check_payment_monotonicity(&AggregationRule::Linear, pay, &dists, &grid).unwrap();
        assert!(report.passed(), "{:?}", report.witnesses.first());
    }

    #[test]
    fn constant_payment_fails_when_bids_move_q() {
        let dists = vec![rd(&[(1, 1), (0, 1)]), rd(&[(0, 1), (1, 1)])];
        let grid = int_grid(2, 2);
        let one = |b: &Bids, _: &[RationalDist]| Ok(vec![Rational::from_int(1); b.len()]);
        let report =
            check_payment_monotonicity(&AggregationRule::Linear, one, &dists, &grid).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn strategy_mapping_is_identity_like_for_monotone_rules() {
        let dists = example_dists();
        let grid = int_grid(2, 3);
        let m = construct_strategy_mapping(&AggregationRule::Linear, &dists, 0, &grid).unwrap();
        assert!(m.report.passed());
        // order-preserving: images strictly increase with the original bids
        let imgs: Vec<Rational> =
            m.images.iter().map(|s| Rational::parse_literal(s).unwrap()).collect();
        assert!(imgs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn strategy_mapping_reverses_an_antitone_rule() {
        // linear rule driven by 1/(1+b): monotone in the reversed bid
        let reversed = AggregationRule::Custom(CustomRule::new("reversed", false, |b: &Bids, d| {
            let one = Rational::from_int(1);
            let mapped: Vec<Rational> =
                b.bids().iter().map(|x| one.clone() / (one.clone() + x.clone())).collect();
            let mapped = BidProfile::new(mapped)?;
            crate::aggregation::linear_aggregate(&mapped, d)
        }));
        let dists = vec![rd(&[(1, 1), (0, 1)]), rd(&[(0, 1), (1, 1)])];
        let grid = BidGrid::new(vec![
            (0..=3).map(|b| rat(b, 1)).collect(),
            vec![rat(1, 1)],
        ])
        .unwrap();
        let m = construct_strategy_mapping(&reversed, &dists, 0, &grid).unwrap();
        assert!(m.report.passed(), "{:?}", m.report.witnesses.first());
        let imgs: Vec<Rational> =
            m.images.iter().map(|s| Rational::parse_literal(s).unwrap()).collect();
        assert!(imgs.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn loglinear_example_is_not_totally_ordered() {
        let dists = example_dists();
        let grid = BidGrid::new(vec![
            vec![rat(0, 1), rat(1, 1), rat(100, 1)],
            vec![rat(1, 1)],
        ])
        .unwrap();
        let err = construct_strategy_mapping(&AggregationRule::LogLinear, &dists, 0, &grid)
            .unwrap_err();
        assert!(matches!(err, AuditError::NotTotallyOrdered { .. }));
    }

    #[test]
    fn reports_serialize_and_hash_the_grid() {
        let dists = example_dists();
        let g1 = int_grid(2, 2);
        let g2 = int_grid(2, 3);
        let r1 = check_monotone(&AggregationRule::Linear, &dists, 0, &g1).unwrap();
        let r2 = check_monotone(&AggregationRule::Linear, &dists, 0, &g2).unwrap();
        assert_ne!(r1.grid_hash, r2.grid_hash);
        let json = serde_json::to_value(&r1).unwrap();
        assert_eq!(json["verdict"], "Pass");
    }
}
