//! Seeded generators for exact random instances: distributions over a
//! common denominator, monotone piecewise curves built from bounded mass
//! transfers, and grid/bid profiles for the auditors.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::BidGrid;
use crate::distributions::TokenDistribution;
use crate::sampling::MonotoneBidCurve;
use crate::scalar::Scalar;
use crate::{FloatDist, Rational, RationalDist};

pub struct Fuzzer {
    rng: ChaCha8Rng,
}

impl Fuzzer {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen()
    }

    /// Random integer composition: `units` mass points over `parts` cells.
    fn composition(&mut self, units: i64, parts: usize) -> Vec<i64> {
        let mut cuts: Vec<i64> = (0..parts - 1).map(|_| self.rng.gen_range(0..=units)).collect();
        cuts.sort_unstable();
        cuts.push(units);
        let mut prev = 0;
        cuts.into_iter()
            .map(|c| {
                let d = c - prev;
                prev = c;
                d
            })
            .collect()
    }

    /// Exact distribution with denominator at most `max_den`.
    pub fn rational_dist(&mut self, tokens: usize, max_den: i64) -> RationalDist {
        let den = self.int(tokens as i64, max_den.max(tokens as i64));
        let counts = self.composition(den, tokens);
        TokenDistribution::new(
            counts.into_iter().map(|c| Rational::from_ratio(c, den)).collect(),
        )
        .expect("composition sums to the denominator")
    }

    /// Float distribution whose smallest mass is at least `min_prob`.
    pub fn float_dist_min(&mut self, tokens: usize, min_prob: f64) -> FloatDist {
        assert!(min_prob * tokens as f64 <= 1.0);
        let raw: Vec<f64> = (0..tokens).map(|_| self.rng.gen::<f64>() + 1e-9).collect();
        let sum: f64 = raw.iter().sum();
        let free = 1.0 - min_prob * tokens as f64;
        TokenDistribution::new(raw.into_iter().map(|x| min_prob + free * x / sum).collect())
            .expect("positive masses close to one")
    }

    /// Strictly increasing non-negative grid of `points` rationals starting
    /// at zero.
    pub fn bid_grid(&mut self, points: usize) -> Vec<Rational> {
        let mut acc = Rational::zero();
        let mut grid = vec![acc.clone()];
        for _ in 1..points {
            acc += Rational::from_ratio(self.int(1, 8), self.int(1, 4));
            grid.push(acc.clone());
        }
        grid
    }

    /// Random monotone piecewise curve over a common denominator: starts at
    /// a random point and moves a bounded random amount of mass from
    /// oversampled to undersampled tokens at each grid step.
    pub fn monotone_curve(&mut self, tokens: usize, grid_len: usize, den: i64) -> MonotoneBidCurve {
        let den = den.max(tokens as i64);
        let p_counts = self.composition(den, tokens);
        let q_counts = self.composition(den, tokens);
        let under: Vec<bool> =
            (0..tokens).map(|t| q_counts[t] <= p_counts[t]).collect();
        let mut current = q_counts;
        let to_dist = |counts: &[i64]| {
            TokenDistribution::new(
                counts.iter().map(|&c| Rational::from_ratio(c, den)).collect(),
            )
            .expect("counts sum to the denominator")
        };
        let mut points = vec![to_dist(&current)];
        let mut order: Vec<usize> = (0..tokens).collect();
        for _ in 1..grid_len {
            let surplus: i64 =
                (0..tokens).filter(|&t| !under[t]).map(|t| current[t] - p_counts[t]).sum();
            let mut move_units = self.int(0, surplus);
            // drain oversampled tokens in a random order...
            order.shuffle(&mut self.rng);
            for &t in &order {
                if under[t] || move_units == 0 {
                    continue;
                }
                let take = (current[t] - p_counts[t]).min(self.int(0, move_units));
                current[t] -= take;
                move_units -= take;
            }
            // ...and whatever was actually taken arrives at undersampled ones
            let mut arrived: i64 = den - current.iter().sum::<i64>();
            order.shuffle(&mut self.rng);
            for &t in &order {
                if !under[t] || arrived == 0 {
                    continue;
                }
                let give = (p_counts[t] - current[t]).min(self.int(0, arrived));
                current[t] += give;
                arrived -= give;
            }
            // leftovers go to the first undersampled token with room
            for &t in &order {
                if arrived == 0 {
                    break;
                }
                if under[t] {
                    let give = (p_counts[t] - current[t]).min(arrived);
                    current[t] += give;
                    arrived -= give;
                }
            }
            debug_assert_eq!(arrived, 0);
            points.push(to_dist(&current));
        }
        MonotoneBidCurve::new(self.bid_grid(grid_len), points, to_dist(&p_counts))
            .expect("construction preserves the monotone conditions")
    }

    /// Random audit instance for the linear rule: agent count, preferred
    /// distributions, audited agent, and a bid grid giving the audited
    /// agent `agent_points` values and opponents up to three each.
    pub fn linear_instance(
        &mut self,
        max_agents: usize,
        max_tokens: usize,
        agent_points: usize,
    ) -> (Vec<RationalDist>, usize, BidGrid) {
        let n = self.int(1, max_agents as i64) as usize;
        let tokens = self.int(2, max_tokens as i64) as usize;
        let dists: Vec<RationalDist> =
            (0..n).map(|_| self.rational_dist(tokens, 12)).collect();
        let agent = self.int(0, n as i64 - 1) as usize;
        let mut per_agent = Vec::with_capacity(n);
        for i in 0..n {
            if i == agent {
                per_agent.push(self.bid_grid(agent_points));
            } else {
                let pts = self.int(1, 3) as usize;
                per_agent.push(self.bid_grid(pts));
            }
        }
        (dists, agent, BidGrid::new(per_agent).expect("generated grids are valid"))
    }
}
