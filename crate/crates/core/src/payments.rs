//! Second-price critical-bid payments from a stable sampler, and the
//! total-variation integral they equal in expectation.

use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::aggregation::{AggError, AggregationRule, BidProfile};
use crate::distributions::{tv_distance, DistError};
use crate::sampling::{build_stable_sampler, MonotoneBidCurve, SamplingError, StableSampler};
use crate::scalar::{rational_from_f64, Scalar};
use crate::{FloatDist, Rational, RationalDist};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PayError {
    #[error("curve is not monotone over the integration range")]
    NotMonotone,
    #[error("quadrature did not converge within {intervals} intervals")]
    NonConvergent { intervals: u64 },
    #[error("bid must be non-negative")]
    NegativeBid,
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Agg(#[from] AggError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// One priced draw: the emitted token, the realized critical-bid charge ζ,
/// and the distribution-level expectation z at the same bid.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentQuote {
    pub agent: usize,
    pub bid: Rational,
    pub token: usize,
    pub price: Rational,
    pub expected: Rational,
}

impl Serialize for PaymentQuote {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("PaymentQuote", 5)?;
        s.serialize_field("agent", &self.agent)?;
        s.serialize_field("bid", &self.bid.literal())?;
        s.serialize_field("token", &self.token)?;
        s.serialize_field("price", &self.price.literal())?;
        s.serialize_field("expected", &self.expected.literal())?;
        s.end()
    }
}

/// Critical bid of the atom selected by `r`; `None` means +infinity (the
/// agent can never flip this atom).
pub fn critical_bid(sampler: &StableSampler, r: f64) -> Option<Rational> {
    let r = rational_from_f64(r.clamp(0.0, 1.0)).unwrap_or_else(Rational::zero);
    let mut acc = Rational::zero();
    let mut chosen = sampler.atoms.len() - 1;
    for (i, atom) in sampler.atoms.iter().enumerate() {
        acc += atom.mass.clone();
        if r <= acc && !atom.mass.is_zero() {
            chosen = i;
            break;
        }
    }
    sampler.atoms[chosen].threshold.clone()
}

/// Draws a token and prices it: ζ = 0 when the atom emits its over token,
/// otherwise the atom's threshold.
pub fn price_token(sampler: &StableSampler, bid: &Rational, r: f64) -> PaymentQuote {
    let outcome = sampler.sample(bid, (r, 0.0));
    let atom = &sampler.atoms[outcome.atom];
    let price = match &atom.threshold {
        Some(theta) if outcome.token == atom.under_token && bid >= theta => theta.clone(),
        _ => Rational::zero(),
    };
    PaymentQuote {
        agent: 0,
        bid: bid.clone(),
        token: outcome.token,
        price,
        expected: sampler.expected_payment(bid),
    }
}

/// Exact Myerson payment for a right-continuous step curve:
/// z(b) = ∫₀^b [tv(q(b'), p) − tv(q(b), p)] db', summed segment by segment.
///
/// The curve is re-validated over [0, bid]; points below the grid extend the
/// first one.
pub fn myerson_payment_piecewise(
    curve: &MonotoneBidCurve,
    bid: &Rational,
) -> Result<Rational, PayError> {
    if bid.is_negative() {
        return Err(PayError::NegativeBid);
    }
    let p = curve.p_ref();
    let tv_at_bid = tv_distance(curve.value(bid), p)?;
    let mut total = Rational::zero();
    let mut start = Rational::zero();
    // breakpoints of the step function inside (0, bid]
    let mut cuts: Vec<Rational> =
        curve.grid().iter().filter(|g| g.is_positive() && *g < bid).cloned().collect();
    cuts.push(bid.clone());
    for cut in cuts {
        if cut <= start {
            continue;
        }
        let tv_here = tv_distance(curve.value(&start), p)?;
        if tv_here < tv_at_bid {
            return Err(PayError::NotMonotone);
        }
        total += (cut.clone() - start.clone()) * (tv_here - tv_at_bid.clone());
        start = cut;
    }
    Ok(total)
}

const QUADRATURE_CAP: u64 = 1 << 20;

/// Adaptive trapezoid evaluation of the same integral for continuous
/// curves, refining until successive estimates differ by less than
/// `abs_tol` (default 1e-9 when `None`).
pub fn myerson_payment_quadrature(
    mut curve_eval: impl FnMut(f64) -> Result<FloatDist, PayError>,
    p_ref: &FloatDist,
    bid: f64,
    abs_tol: Option<f64>,
) -> Result<f64, PayError> {
    if bid < 0.0 {
        return Err(PayError::NegativeBid);
    }
    if bid == 0.0 {
        return Ok(0.0);
    }
    let tol = abs_tol.unwrap_or(1e-9);
    let tv_at_bid = tv_distance(&curve_eval(bid)?, p_ref)?;
    let g = |s: f64, eval: &mut dyn FnMut(f64) -> Result<FloatDist, PayError>| {
        Ok::<f64, PayError>(tv_distance(&eval(s)?, p_ref)? - tv_at_bid)
    };
    let g0 = g(0.0, &mut curve_eval)?;
    let gb = g(bid, &mut curve_eval)?;
    // spot checks: the integrand must be non-negative and non-increasing
    if g0 < -1e-12 || gb.abs() > 1e-12 {
        return Err(PayError::NotMonotone);
    }
    let mut n: u64 = 1;
    let mut estimate = bid * (g0 + gb) / 2.0;
    let mut prev_sample = g0;
    loop {
        let h = bid / (2 * n) as f64;
        let mut new_sum = 0.0;
        for i in 0..n {
            let s = h * (2 * i + 1) as f64;
            let v = g(s, &mut curve_eval)?;
            if v > prev_sample + 1e-9 || v < -1e-9 {
                return Err(PayError::NotMonotone);
            }
            prev_sample = v;
            new_sum += v;
        }
        let next = estimate / 2.0 + h * new_sum;
        n *= 2;
        if (next - estimate).abs() < tol {
            return Ok(next);
        }
        estimate = next;
        prev_sample = g0;
        if n > QUADRATURE_CAP {
            return Err(PayError::NonConvergent { intervals: n });
        }
    }
}

/// Grid for per-step pricing: {0, b/2, b, 2b} plus every opponent bid.
pub fn default_payment_grid(bid: &Rational, opponents: &[Rational]) -> Vec<Rational> {
    let two = Rational::from_int(2);
    let mut grid = vec![
        Rational::zero(),
        bid.clone() / two.clone(),
        bid.clone(),
        bid.clone() * two,
    ];
    grid.extend(opponents.iter().cloned());
    grid.sort();
    grid.dedup();
    grid
}

/// Expected payment per agent for one auction step: each agent is priced on
/// their own monotone slice of the rule, opponents' bids held fixed.
///
/// Agents whose opponents bid zero in total face a constant curve and pay
/// nothing.
pub fn step_prices(
    rule: &AggregationRule,
    bids: &BidProfile<Rational>,
    dists: &[RationalDist],
) -> Result<Vec<Rational>, PayError> {
    let mut out = Vec::with_capacity(bids.len());
    for agent in 0..bids.len() {
        let bid = bids.bid(agent);
        let opponents: Vec<Rational> = (0..bids.len())
            .filter(|&j| j != agent)
            .map(|j| bids.bid(j).clone())
            .collect();
        if bid.is_zero() || opponents.iter().all(|b| b.is_zero()) {
            out.push(Rational::zero());
            continue;
        }
        let grid = default_payment_grid(bid, &opponents);
        let curve = MonotoneBidCurve::from_rule(rule, bids, dists, agent, grid)?;
        let sampler = build_stable_sampler(&curve);
        out.push(sampler.expected_payment(bid));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::TokenDistribution;
    use crate::sampling::Atom;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn rd(parts: &[(i64, i64)]) -> RationalDist {
        TokenDistribution::new(parts.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    // two-token worked example: half the mass never moves, 0.3 flips at
    // bid 1 and 0.2 flips at bid 2
    fn two_token_sampler() -> StableSampler {
        StableSampler::from_atoms(
            vec![
                Atom { mass: rat(1, 2), over_token: 1, under_token: 1, threshold: None },
                Atom { mass: rat(3, 10), over_token: 0, under_token: 1, threshold: Some(rat(1, 1)) },
                Atom { mass: rat(1, 5), over_token: 0, under_token: 1, threshold: Some(rat(2, 1)) },
            ],
            2,
        )
        .unwrap()
    }

    fn two_token_curve() -> MonotoneBidCurve {
        MonotoneBidCurve::new(
            vec![rat(0, 1), rat(1, 1), rat(2, 1)],
            vec![rd(&[(1, 2), (1, 2)]), rd(&[(1, 5), (4, 5)]), rd(&[(0, 1), (1, 1)])],
            rd(&[(0, 1), (1, 1)]),
        )
        .unwrap()
    }

    #[test]
    fn critical_bid_reads_the_atom_table() {
        let s = two_token_sampler();
        // cumulative masses: 1/2, 4/5, 1
        assert_eq!(critical_bid(&s, 0.25), None);
        assert_eq!(critical_bid(&s, 0.6), Some(rat(1, 1)));
        assert_eq!(critical_bid(&s, 0.9), Some(rat(2, 1)));
    }

    #[test]
    fn price_token_charges_only_switched_atoms() {
        let s = two_token_sampler();
        // bid 2, r lands in the θ=2 atom: token switched, pay 2
        let q = price_token(&s, &rat(2, 1), 0.9);
        assert_eq!((q.token, q.price.clone()), (1, rat(2, 1)));
        assert!(q.price <= q.bid);
        // same r, bid below the threshold: over token, no charge
        let q = price_token(&s, &rat(3, 2), 0.9);
        assert_eq!((q.token, q.price), (0, rat(0, 1)));
        // bid 0 never charges
        let q = price_token(&s, &rat(0, 1), 0.6);
        assert_eq!(q.price, rat(0, 1));
    }

    #[test]
    fn expected_payment_examples() {
        let s = two_token_sampler();
        assert_eq!(s.expected_payment(&rat(0, 1)), rat(0, 1));
        assert_eq!(s.expected_payment(&rat(1, 2)), rat(0, 1));
        // 0.3·1 + 0.2·2 = 0.7
        assert_eq!(s.expected_payment(&rat(2, 1)), rat(7, 10));
    }

    #[test]
    fn piecewise_matches_expected_payment() {
        let curve = two_token_curve();
        let sampler = build_stable_sampler(&curve);
        assert_eq!(myerson_payment_piecewise(&curve, &rat(0, 1)).unwrap(), rat(0, 1));
        assert_eq!(myerson_payment_piecewise(&curve, &rat(2, 1)).unwrap(), rat(7, 10));
        for b in [rat(0, 1), rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1), rat(5, 1)] {
            assert_eq!(
                myerson_payment_piecewise(&curve, &b).unwrap(),
                sampler.expected_payment(&b)
            );
        }
        assert!(matches!(
            myerson_payment_piecewise(&curve, &rat(-1, 1)),
            Err(PayError::NegativeBid)
        ));
    }

    #[test]
    fn quadrature_matches_the_closed_form() {
        // q(b) = (b/(b+1), 1/(b+1)) against p=(1,0): z(1) = ln 2 - 1/2
        let p = TokenDistribution::new(vec![1.0, 0.0]).unwrap();
        let eval = |b: f64| {
            Ok(TokenDistribution::new_unchecked(vec![b / (b + 1.0), 1.0 / (b + 1.0)]))
        };
        let z = myerson_payment_quadrature(eval, &p, 1.0, None).unwrap();
        assert!((z - (2f64.ln() - 0.5)).abs() < 1e-6);
        assert_eq!(myerson_payment_quadrature(eval, &p, 0.0, None).unwrap(), 0.0);

        // a curve moving away from p is rejected
        let away = |b: f64| {
            Ok(TokenDistribution::new_unchecked(vec![1.0 / (b + 1.0), b / (b + 1.0)]))
        };
        assert!(matches!(
            myerson_payment_quadrature(away, &p, 1.0, None),
            Err(PayError::NotMonotone)
        ));
    }

    #[test]
    fn step_prices_examples() {
        let dists = vec![rd(&[(1, 1), (0, 1)]), rd(&[(0, 1), (1, 1)])];
        let rule = AggregationRule::Linear;

        // all zero bids
        let z = step_prices(&rule, &BidProfile::from_ints(&[0, 0]), &dists).unwrap();
        assert_eq!(z, vec![rat(0, 1), rat(0, 1)]);

        // symmetric instance: equal payments, cross-checked against the
        // exact piecewise integral
        let bids = BidProfile::from_ints(&[1, 1]);
        let z = step_prices(&rule, &bids, &dists).unwrap();
        assert_eq!(z[0], z[1]);
        let grid = default_payment_grid(&rat(1, 1), &[rat(1, 1)]);
        let curve = MonotoneBidCurve::from_rule(&rule, &bids, &dists, 0, grid).unwrap();
        assert_eq!(z[0], myerson_payment_piecewise(&curve, &rat(1, 1)).unwrap());
        assert_eq!(z[0], rat(1, 3));

        // identical preferred distributions: constant curves, zero payments
        let same = vec![rd(&[(1, 2), (1, 2)]); 2];
        let z = step_prices(&rule, &BidProfile::from_ints(&[2, 3]), &same).unwrap();
        assert_eq!(z, vec![rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn quote_serializes_with_literals() {
        let s = two_token_sampler();
        let q = price_token(&s, &rat(2, 1), 0.9);
        let json = serde_json::to_value(&q).unwrap();
        assert_eq!(json["price"], "2");
        assert_eq!(json["expected"], "7/10");
    }
}
