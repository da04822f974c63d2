//! Stable samplers: coupled token draws along a monotone bid curve whose
//! marginals reproduce the aggregation rule exactly, plus the exhaustive
//! search for universal stable samplers over 2x2 bid tables.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::aggregation::{AggError, AggregationRule, BidProfile};
use crate::distributions::{DistError, TokenDistribution};
use crate::preferences::{partition_tokens, TokenPartition};
use crate::scalar::{rational_from_f64, Scalar};
use crate::{Rational, RationalDist};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("bid grid is empty")]
    EmptyGrid,
    #[error("bid grid must be strictly increasing and non-negative")]
    BadGrid,
    #[error("expected {expected} curve points, got {got}")]
    PointCountMismatch { expected: usize, got: usize },
    #[error("curve violates monotonicity at token {token}, bid index {bid_index}")]
    NotMonotone { token: usize, bid_index: usize },
    #[error("table denominators exceed the search limit (lcm {lcm} > {limit})")]
    DenominatorTooLarge { lcm: u64, limit: u64 },
    #[error(transparent)]
    Agg(#[from] AggError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// One agent's slice of an aggregation rule: the aggregate distribution as a
/// function of that agent's bid on a finite grid, opponents held fixed.
///
/// Construction verifies the per-token monotone conditions: undersampled
/// tokens weakly rise without crossing the agent's preferred mass, and
/// oversampled tokens weakly fall without crossing it.
#[derive(Debug, Clone)]
pub struct MonotoneBidCurve {
    grid: Vec<Rational>,
    points: Vec<RationalDist>,
    p_ref: RationalDist,
    partition: TokenPartition,
}

impl MonotoneBidCurve {
    pub fn new(
        grid: Vec<Rational>,
        points: Vec<RationalDist>,
        p_ref: RationalDist,
    ) -> Result<Self, SamplingError> {
        if grid.is_empty() {
            return Err(SamplingError::EmptyGrid);
        }
        if grid[0].is_negative() || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SamplingError::BadGrid);
        }
        if points.len() != grid.len() {
            return Err(SamplingError::PointCountMismatch {
                expected: grid.len(),
                got: points.len(),
            });
        }
        for q in &points {
            if q.len() != p_ref.len() {
                return Err(SamplingError::Dist(DistError::AlphabetMismatch {
                    left: p_ref.len(),
                    right: q.len(),
                }));
            }
        }
        let partition = partition_tokens(&p_ref, &points[0])?;
        for token in 0..p_ref.len() {
            let under = partition.is_undersampled(token);
            for (bid_index, w) in points.windows(2).enumerate() {
                let (prev, next) = (w[0].prob(token), w[1].prob(token));
                let ok = if under { next >= prev } else { next <= prev };
                if !ok {
                    return Err(SamplingError::NotMonotone { token, bid_index: bid_index + 1 });
                }
            }
            for (bid_index, q) in points.iter().enumerate() {
                let ok = if under {
                    q.prob(token) <= p_ref.prob(token)
                } else {
                    q.prob(token) >= p_ref.prob(token)
                };
                if !ok {
                    return Err(SamplingError::NotMonotone { token, bid_index });
                }
            }
        }
        Ok(Self { grid, points, p_ref, partition })
    }

    /// Evaluates `rule` along `grid` for `agent`, opponents fixed at `bids`.
    pub fn from_rule(
        rule: &AggregationRule,
        bids: &BidProfile<Rational>,
        dists: &[RationalDist],
        agent: usize,
        grid: Vec<Rational>,
    ) -> Result<Self, SamplingError> {
        let mut points = Vec::with_capacity(grid.len());
        for b in &grid {
            points.push(rule.evaluate(&bids.with_bid(agent, b.clone()), dists)?);
        }
        Self::new(grid, points, dists[agent].clone())
    }

    pub fn grid(&self) -> &[Rational] {
        &self.grid
    }

    pub fn points(&self) -> &[RationalDist] {
        &self.points
    }

    pub fn p_ref(&self) -> &RationalDist {
        &self.p_ref
    }

    pub fn partition(&self) -> &TokenPartition {
        &self.partition
    }

    /// Right-continuous step evaluation; bids below the grid extend the
    /// first point.
    pub fn value(&self, bid: &Rational) -> &RationalDist {
        let idx = self.grid.iter().rposition(|g| g <= bid).unwrap_or(0);
        &self.points[idx]
    }
}

/// One mass element of a stable sampler. Emits `over_token` while the bid is
/// below `threshold` and `under_token` from the threshold on; a `None`
/// threshold never switches.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub mass: Rational,
    pub over_token: usize,
    pub under_token: usize,
    pub threshold: Option<Rational>,
}

impl Atom {
    pub fn emit(&self, bid: &Rational) -> usize {
        match &self.threshold {
            Some(theta) if bid >= theta => self.under_token,
            _ => self.over_token,
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("Atom", 4)?;
        s.serialize_field("mass", &self.mass.literal())?;
        s.serialize_field("over_token", &self.over_token)?;
        s.serialize_field("under_token", &self.under_token)?;
        let theta = self.threshold.as_ref().map_or_else(|| "inf".to_string(), |t| t.literal());
        s.serialize_field("threshold", &theta)?;
        s.end()
    }
}

/// Order in which over/under residuals are paired into atoms. The
/// decomposition differs, its marginals and payment totals do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingOrder {
    #[default]
    TokenAscending,
    TokenDescending,
}

/// Outcome of one draw: the emitted token, which atom produced it, and the
/// second-price critical bid for that atom (None when the atom never
/// switches or has not switched yet).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleOutcome {
    pub token: usize,
    pub atom: usize,
    pub price: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StableSampler {
    pub atoms: Vec<Atom>,
    num_tokens: usize,
}

impl StableSampler {
    /// Builds a sampler from an explicit atom table (masses must sum to 1).
    pub fn from_atoms(atoms: Vec<Atom>, num_tokens: usize) -> Result<Self, SamplingError> {
        let total = atoms.iter().fold(Rational::zero(), |acc, a| acc + a.mass.clone());
        if atoms.iter().any(|a| a.mass.is_negative()) || !total.is_one() {
            return Err(SamplingError::Dist(DistError::InvalidSum { sum: total.literal() }));
        }
        if atoms.iter().any(|a| a.over_token >= num_tokens || a.under_token >= num_tokens) {
            return Err(SamplingError::Dist(DistError::BadAlphabet(
                "atom token index out of range".into(),
            )));
        }
        Ok(Self { atoms, num_tokens })
    }

    pub fn num_tokens(&self) -> usize {
        self.num_tokens
    }

    /// Exact per-token marginal at a given bid.
    pub fn exact_marginal(&self, bid: &Rational) -> RationalDist {
        let mut probs = vec![Rational::zero(); self.num_tokens];
        for atom in &self.atoms {
            let t = atom.emit(bid);
            probs[t] = probs[t].clone() + atom.mass.clone();
        }
        TokenDistribution::new(probs).expect("atom masses sum to one")
    }

    /// Draws a token by CDF inversion over atoms. The second randomness
    /// coordinate is accepted for interface parity and deliberately unused:
    /// one source suffices for a stable sampler.
    pub fn sample(&self, bid: &Rational, randomness: (f64, f64)) -> SampleOutcome {
        let (r, _unused) = randomness;
        let r = rational_from_f64(r.clamp(0.0, 1.0)).unwrap_or_else(Rational::zero);
        let mut acc = Rational::zero();
        let mut chosen = self.atoms.len() - 1;
        for (i, atom) in self.atoms.iter().enumerate() {
            acc += atom.mass.clone();
            if r <= acc && !atom.mass.is_zero() {
                chosen = i;
                break;
            }
        }
        let atom = &self.atoms[chosen];
        let token = atom.emit(bid);
        let price = match &atom.threshold {
            Some(theta) if bid >= theta => Some(theta.literal()),
            _ => None,
        };
        SampleOutcome { token, atom: chosen, price }
    }

    /// Exact expected payment at a bid: each switched atom pays its
    /// threshold.
    pub fn expected_payment(&self, bid: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for atom in &self.atoms {
            if let Some(theta) = &atom.threshold {
                if theta <= bid {
                    acc += atom.mass.clone() * theta.clone();
                }
            }
        }
        acc
    }
}

/// Decomposes a monotone bid curve into a stable sampler whose marginal at
/// every grid bid equals the curve point exactly.
pub fn build_stable_sampler(curve: &MonotoneBidCurve) -> StableSampler {
    build_stable_sampler_ordered(curve, PairingOrder::TokenAscending)
}

pub fn build_stable_sampler_ordered(
    curve: &MonotoneBidCurve,
    order: PairingOrder,
) -> StableSampler {
    let n = curve.p_ref().len();
    let points = curve.points();
    let last = points.len() - 1;
    let mut atoms = Vec::new();

    // never-switching mass: the floor each token keeps across the curve
    for t in 0..n {
        let fixed = if curve.partition().is_undersampled(t) {
            points[0].prob(t).clone()
        } else {
            points[last].prob(t).clone()
        };
        if !fixed.is_zero() {
            atoms.push(Atom { mass: fixed, over_token: t, under_token: t, threshold: None });
        }
    }

    // per grid step, pair mass leaving oversampled tokens with mass arriving
    // at undersampled ones
    for k in 1..points.len() {
        let mut overs: Vec<(usize, Rational)> = Vec::new();
        let mut unders: Vec<(usize, Rational)> = Vec::new();
        for t in 0..n {
            let delta = points[k].prob(t).clone() - points[k - 1].prob(t).clone();
            if delta.is_positive() {
                unders.push((t, delta));
            } else if delta.is_negative() {
                overs.push((t, -delta));
            }
        }
        if order == PairingOrder::TokenDescending {
            overs.reverse();
            unders.reverse();
        }
        let (mut i, mut j) = (0, 0);
        while i < overs.len() && j < unders.len() {
            let m = overs[i].1.clone().min(unders[j].1.clone());
            atoms.push(Atom {
                mass: m.clone(),
                over_token: overs[i].0,
                under_token: unders[j].0,
                threshold: Some(curve.grid()[k].clone()),
            });
            overs[i].1 -= m.clone();
            unders[j].1 -= m;
            if overs[i].1.is_zero() {
                i += 1;
            }
            if j < unders.len() && unders[j].1.is_zero() {
                j += 1;
            }
        }
    }
    StableSampler { atoms, num_tokens: n }
}

/// A two-agent, two-level bid table: aggregate distributions at the four
/// bid profiles plus each agent's preferred distribution. Cell order is
/// q(0,0), q(1,0), q(0,1), q(1,1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregationTable2x2 {
    pub name: String,
    pub cells: [RationalDist; 4],
    pub prefs: [RationalDist; 2],
}

const CELL_00: usize = 0;
const CELL_10: usize = 1;
const CELL_01: usize = 2;

/// One mass element of a universal sampler candidate: the token it emits at
/// each of the four bid profiles, in cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalAtom {
    pub mass: Rational,
    pub tokens: [usize; 4],
}

impl Serialize for UniversalAtom {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("UniversalAtom", 2)?;
        s.serialize_field("mass", &self.mass.literal())?;
        s.serialize_field("tokens", &self.tokens)?;
        s.end()
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum UniversalSearch {
    Exists { atoms: Vec<UniversalAtom>, denominator: u64 },
    None { denominator: u64, profiles: usize, nodes: u64 },
}

const DENOMINATOR_LIMIT: u64 = 64;

/// A bid raise by one agent may only move an atom from a token that agent
/// oversamples to one it undersamples (or leave it alone), judged against
/// the aggregate at that agent's zero bid.
fn stable_edge(p: &RationalDist, q_base: &RationalDist, from: usize, to: usize) -> bool {
    from == to || (q_base.prob(from) > p.prob(from) && q_base.prob(to) <= p.prob(to))
}

/// Exhaustive search for a universal stable sampler on a 2x2 table.
///
/// Scales every cell to a common denominator D (rejected above 64) and
/// looks for an integer assignment of D mass units to stability-respecting
/// atom profiles matching all four cell marginals. Returns the
/// lexicographically first witness, or search statistics when none exists
/// at that denominator.
pub fn search_universal_stable(
    table: &AggregationTable2x2,
) -> Result<UniversalSearch, SamplingError> {
    let n = table.cells[0].len();
    for d in table.cells.iter().chain(table.prefs.iter()) {
        if d.len() != n {
            return Err(SamplingError::Dist(DistError::AlphabetMismatch {
                left: n,
                right: d.len(),
            }));
        }
    }
    let lcm = table
        .cells
        .iter()
        .flat_map(|c| c.probs())
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let denominator = lcm.to_u64().filter(|&d| d <= DENOMINATOR_LIMIT).ok_or(
        SamplingError::DenominatorTooLarge {
            lcm: lcm.to_u64().unwrap_or(u64::MAX),
            limit: DENOMINATOR_LIMIT,
        },
    )?;
    let counts: Vec<Vec<u64>> = table
        .cells
        .iter()
        .map(|c| {
            c.probs()
                .iter()
                .map(|p| (p * Rational::from_integer(lcm.clone())).to_integer().to_u64().unwrap())
                .collect()
        })
        .collect();

    // stability-valid atom profiles, lexicographic in (t00, t10, t01, t11)
    let (p1, p2) = (&table.prefs[0], &table.prefs[1]);
    let mut profiles = Vec::new();
    for t00 in 0..n {
        for t10 in 0..n {
            if !stable_edge(p1, &table.cells[CELL_00], t00, t10) {
                continue;
            }
            for t01 in 0..n {
                if !stable_edge(p2, &table.cells[CELL_00], t00, t01) {
                    continue;
                }
                for t11 in 0..n {
                    if stable_edge(p1, &table.cells[CELL_01], t01, t11)
                        && stable_edge(p2, &table.cells[CELL_10], t10, t11)
                    {
                        profiles.push([t00, t10, t01, t11]);
                    }
                }
            }
        }
    }

    let mut remaining = counts.clone();
    let mut assignment = vec![0u64; profiles.len()];
    let mut nodes = 0u64;
    if dfs(&profiles, 0, &mut remaining, &mut assignment, &mut nodes) {
        let atoms = profiles
            .iter()
            .zip(&assignment)
            .filter(|(_, &m)| m > 0)
            .map(|(tokens, &m)| UniversalAtom {
                mass: Rational::from_ratio(m as i64, denominator as i64),
                tokens: *tokens,
            })
            .collect();
        Ok(UniversalSearch::Exists { atoms, denominator })
    } else {
        Ok(UniversalSearch::None { denominator, profiles: profiles.len(), nodes })
    }
}

fn dfs(
    profiles: &[[usize; 4]],
    idx: usize,
    remaining: &mut [Vec<u64>],
    assignment: &mut [u64],
    nodes: &mut u64,
) -> bool {
    *nodes += 1;
    if idx == profiles.len() {
        return remaining.iter().all(|cell| cell.iter().all(|&c| c == 0));
    }
    let profile = &profiles[idx];
    let cap = (0..4).map(|c| remaining[c][profile[c]]).min().unwrap();
    for m in (0..=cap).rev() {
        for c in 0..4 {
            remaining[c][profile[c]] -= m;
        }
        assignment[idx] = m;
        if dfs(profiles, idx + 1, remaining, assignment, nodes) {
            return true;
        }
        for c in 0..4 {
            remaining[c][profile[c]] += m;
        }
    }
    assignment[idx] = 0;
    false
}

fn rd(parts: &[(i64, i64)]) -> RationalDist {
    TokenDistribution::new(parts.iter().map(|&(n, d)| Rational::from_ratio(n, d)).collect())
        .unwrap()
}

/// Four-token table with no universal stable sampler.
pub fn four_token_table() -> AggregationTable2x2 {
    let p = rd(&[(0, 1), (0, 1), (1, 2), (1, 2)]);
    AggregationTable2x2 {
        name: "four-token".into(),
        cells: [
            rd(&[(1, 2), (1, 2), (0, 1), (0, 1)]),
            rd(&[(0, 1), (1, 2), (1, 2), (0, 1)]),
            rd(&[(1, 2), (0, 1), (1, 2), (0, 1)]),
            rd(&[(0, 1), (0, 1), (1, 2), (1, 2)]),
        ],
        prefs: [p.clone(), p],
    }
}

/// Three-token table with no universal stable sampler.
pub fn three_token_table() -> AggregationTable2x2 {
    AggregationTable2x2 {
        name: "three-token".into(),
        cells: [
            rd(&[(1, 2), (1, 2), (0, 1)]),
            rd(&[(1, 2), (0, 1), (1, 2)]),
            rd(&[(0, 1), (1, 2), (1, 2)]),
            rd(&[(1, 2), (0, 1), (1, 2)]),
        ],
        prefs: [rd(&[(1, 2), (0, 1), (1, 2)]), rd(&[(0, 1), (1, 4), (3, 4)])],
    }
}

/// Control table (agent 2's bid is ignored) that does admit a universal
/// stable sampler.
pub fn control_table() -> AggregationTable2x2 {
    let p = rd(&[(0, 1), (0, 1), (1, 2), (1, 2)]);
    let low = rd(&[(1, 2), (1, 2), (0, 1), (0, 1)]);
    let high = rd(&[(0, 1), (1, 2), (1, 2), (0, 1)]);
    AggregationTable2x2 {
        name: "control".into(),
        cells: [low.clone(), high.clone(), low, high],
        prefs: [p.clone(), p],
    }
}

pub fn builtin_table(name: &str) -> Option<AggregationTable2x2> {
    match name {
        "four-token" => Some(four_token_table()),
        "three-token" => Some(three_token_table()),
        "control" => Some(control_table()),
        _ => None,
    }
}
