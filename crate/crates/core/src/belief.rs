//! Common-information beliefs.
//!
//! Both controllers observe every past routing action, so the conditional
//! laws of the two queue lengths given those actions are common knowledge.
//! This module holds those laws as dense PMFs and implements the exact filter
//! step by step: propagate through one slot of arrivals and departures,
//! condition on the observed routing decision, and translate by the routing.
//!
//! Supports are exact: a probability is zero only when it is structurally
//! zero, never because it is small. The support-bound recursion in
//! [`update_bounds_recursive`] is a fast path that is checked against the filter,
//! not a replacement for it.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{step_queue, ModelParams};

/// Probabilities must sum to 1 within this tolerance after every operation.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// User-supplied PMFs are accepted if they sum to 1 within this tolerance and
/// are then renormalized.
pub const INPUT_TOLERANCE: f64 = 1e-9;

/// A finitely supported PMF over queue lengths `0..=max_support`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates entries, trims trailing zeros and renormalizes.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidPmf(format!("entry {bad} is negative or not finite")));
        }
        while probs.last() == Some(&0.0) {
            probs.pop();
        }
        let total: f64 = probs.iter().sum();
        if probs.is_empty() || (total - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::InvalidPmf(format!("entries sum to {total}, expected 1")));
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        Ok(Pmf { probs })
    }

    pub fn point(x: u32) -> Self {
        let mut probs = vec![0.0; x as usize + 1];
        probs[x as usize] = 1.0;
        Pmf { probs }
    }

    /// Builds a PMF from `(value, probability)` pairs.
    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        let len = pairs.iter().map(|&(x, _)| x as usize + 1).max().unwrap_or(0);
        let mut probs = vec![0.0; len];
        for &(x, p) in pairs {
            probs[x as usize] += p;
        }
        Pmf::new(probs)
    }

    /// Normalizes a non-negative weight vector produced internally. Entries
    /// that are exactly zero stay zero.
    fn from_weights(mut probs: Vec<f64>, what: impl FnOnce() -> String) -> Result<Self> {
        while probs.last() == Some(&0.0) {
            probs.pop();
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroProbabilityEvent(what()));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(Pmf { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, x: u32) -> f64 {
        self.probs.get(x as usize).copied().unwrap_or(0.0)
    }

    pub fn max_support(&self) -> u32 {
        (self.probs.len() - 1) as u32
    }

    pub fn min_support(&self) -> u32 {
        self.probs
            .iter()
            .position(|&p| p != 0.0)
            .expect("a pmf has at least one non-zero entry") as u32
    }

    /// Values with non-zero probability.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(x, &p)| (x as u32, p))
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p != 0.0).count()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(x, p)| f64::from(x) * p).sum()
    }

    pub fn expect(&self, f: impl Fn(u32) -> f64) -> f64 {
        self.support().map(|(x, p)| f(x) * p).sum()
    }

    pub fn is_point(&self) -> bool {
        self.support_size() == 1
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (x, p) in self.support() {
            acc += p;
            if u < acc {
                return x;
            }
        }
        self.max_support()
    }

    /// Checks the type's invariants; used by tests and debug assertions.
    pub fn check(&self) -> Result<()> {
        if self.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidPmf("negative or non-finite entry".into()));
        }
        if self.probs.last().is_none_or(|&p| p == 0.0) {
            return Err(Error::InvalidPmf("trailing zero entry".into()));
        }
        if (self.total() - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidPmf(format!("mass {}", self.total())));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.probs
    }
}

impl fmt::Debug for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.support()).finish()
    }
}

/// Closed integer interval `[lb, ub]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lb: u32,
    pub ub: u32,
}

impl Interval {
    pub fn new(lb: u32, ub: u32) -> Self {
        Interval { lb, ub }
    }

    pub fn of(pmf: &Pmf) -> Self {
        Interval {
            lb: pmf.min_support(),
            ub: pmf.max_support(),
        }
    }

    pub fn gap(&self) -> u32 {
        self.ub - self.lb
    }

    pub fn contains(&self, x: u32) -> bool {
        self.lb <= x && x <= self.ub
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lb: self.lb.min(other.lb),
            ub: self.ub.max(other.ub),
        }
    }
}

/// Per-queue support bounds of a belief pair and their joint hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportBounds {
    pub queues: [Interval; 2],
    pub joint: Interval,
}

impl SupportBounds {
    pub fn from_queues(q1: Interval, q2: Interval) -> Self {
        SupportBounds {
            queues: [q1, q2],
            joint: q1.hull(&q2),
        }
    }
}

/// Per-queue min/max non-zero indices and their joint min/max.
pub fn support_bounds(pmf1: &Pmf, pmf2: &Pmf) -> SupportBounds {
    SupportBounds::from_queues(Interval::of(pmf1), Interval::of(pmf2))
}

/// A routing threshold `(ub + lb) / 2`, kept exactly as a half-integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Threshold {
    twice: u64,
}

impl Threshold {
    pub fn from_halves(twice: u64) -> Self {
        Threshold { twice }
    }

    pub fn twice(self) -> u64 {
        self.twice
    }

    /// `x ≥ TH`, compared exactly.
    #[inline]
    pub fn is_met_by(self, x: u32) -> bool {
        2 * u64::from(x) >= self.twice
    }

    /// `⌈TH⌉`.
    pub fn ceil(self) -> u32 {
        self.twice.div_ceil(2) as u32
    }

    /// Smallest length that routes under the threshold rule. An empty queue
    /// never routes, so the cut is at least 1.
    pub fn route_cut(self) -> u32 {
        self.ceil().max(1)
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}.5", self.twice / 2)
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// `(joint ub + joint lb) / 2`.
pub fn threshold(bounds: &SupportBounds) -> Threshold {
    Threshold {
        twice: u64::from(bounds.joint.ub) + u64::from(bounds.joint.lb),
    }
}

/// Law of `(X − D)⁺ + A` for `X ~ pi` and one slot of primitives.
pub fn propagate_arrivals_departures(pi: &Pmf, params: &ModelParams) -> Pmf {
    let mut out = vec![0.0; pi.probs.len() + 1];
    for (x, p) in pi.support() {
        for o in params.queue_outcomes() {
            out[step_queue(x, o.departure, o.arrival) as usize] += p * o.prob;
        }
    }
    Pmf::from_weights(out, || "propagation".into()).expect("propagation keeps all mass")
}

/// Conditions a pre-decision belief on the routing decision of a rule that
/// routes exactly when the length is at least `cut`.
pub fn condition_on_cut(pibar: &Pmf, routed: bool, cut: u32) -> Result<Pmf> {
    let cut = cut as usize;
    let probs: Vec<f64> = pibar
        .probs
        .iter()
        .enumerate()
        .map(|(x, &p)| if (x >= cut) == routed { p } else { 0.0 })
        .collect();
    Pmf::from_weights(probs, || {
        format!("routed = {routed} with cut {cut} under {pibar:?}")
    })
}

/// Bayes step for the threshold rule: keep `{x̄ ≥ TH}` if the queue routed,
/// `{x̄ < TH}` otherwise, and renormalize.
pub fn condition_on_action(pibar: &Pmf, routed: bool, th: Threshold) -> Result<Pmf> {
    condition_on_cut(pibar, routed, th.route_cut())
}

/// Law of `X − u_own + u_other`.
pub fn shift_by_routing(pi: &Pmf, own: bool, other: bool) -> Result<Pmf> {
    if own && pi.probs[0] != 0.0 {
        return Err(Error::NegativeSupport);
    }
    let probs = match (own, other) {
        (true, false) => pi.probs[1..].to_vec(),
        (false, true) => {
            let mut v = Vec::with_capacity(pi.probs.len() + 1);
            v.push(0.0);
            v.extend_from_slice(&pi.probs);
            v
        }
        _ => pi.probs.clone(),
    };
    Ok(Pmf { probs })
}

/// Joint support bounds after routing, from the pre-decision bounds, under
/// the threshold rule.
///
/// Exact when both pre-decision supports are intervals. With gaps in a
/// support the true bounds can lie strictly inside the returned interval.
pub fn update_bounds_recursive(barred: &SupportBounds, u: [bool; 2], th: Threshold) -> Interval {
    let c = th.ceil();
    match u {
        [false, false] => Interval::new(barred.joint.lb, c.saturating_sub(1)),
        [true, true] => Interval::new(c, barred.joint.ub),
        [u1, _] => {
            let (i, j) = if u1 { (0, 1) } else { (1, 0) };
            Interval::new(
                (barred.queues[j].lb + 1).min(c.saturating_sub(1)),
                barred.queues[i].ub.saturating_sub(1).max(c),
            )
        }
    }
}

/// Joint bounds one slot after `bounds` when arrivals and departures both
/// have positive probability: `ub + 1` and `(lb − 1)⁺`.
pub fn barred_bounds_recursive(bounds: Interval) -> Interval {
    Interval::new(bounds.lb.saturating_sub(1), bounds.ub + 1)
}

/// The controllers' shared knowledge at decision time: both pre-decision
/// beliefs, their support bounds and the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonInfo {
    pub pibar: [Pmf; 2],
    pub bounds: SupportBounds,
    pub threshold: Threshold,
}

impl CommonInfo {
    pub fn from_pre_decision(pibar1: Pmf, pibar2: Pmf) -> Self {
        let bounds = support_bounds(&pibar1, &pibar2);
        CommonInfo {
            threshold: threshold(&bounds),
            pibar: [pibar1, pibar2],
            bounds,
        }
    }

    /// Information at the first decision, from the beliefs on the lengths at
    /// the start of the slot.
    pub fn from_prior(pi: &[Pmf; 2], params: &ModelParams) -> Self {
        CommonInfo::from_pre_decision(
            propagate_arrivals_departures(&pi[0], params),
            propagate_arrivals_departures(&pi[1], params),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Convention;
    use proptest::prelude::*;

    fn params(l: f64, m: f64) -> ModelParams {
        ModelParams::new(l, m).unwrap()
    }

    /// Independent oracle: enumerate every (A, D) pair explicitly.
    fn brute_force_propagate(pi: &[(u32, f64)], l: f64, m: f64) -> Vec<(u32, f64)> {
        let mut out = std::collections::BTreeMap::new();
        for &(x, p) in pi {
            for a in [0u32, 1] {
                for d in [0u32, 1] {
                    let w = p * if a == 1 { l } else { 1.0 - l } * if d == 1 { m } else { 1.0 - m };
                    let y = x.saturating_sub(d) + a;
                    *out.entry(y).or_insert(0.0) += w;
                }
            }
        }
        out.into_iter().filter(|&(_, w)| w > 0.0).collect()
    }

    fn assert_pmf(p: &Pmf, expected: &[(u32, f64)]) {
        p.check().unwrap();
        assert_eq!(p.support_size(), expected.len(), "{p:?} vs {expected:?}");
        for &(x, w) in expected {
            assert!((p.get(x) - w).abs() < 1e-14, "{p:?} vs {expected:?}");
        }
    }

    #[test]
    fn construction_rules() {
        assert!(Pmf::new(vec![]).is_err());
        assert!(Pmf::new(vec![0.5, -0.1, 0.6]).is_err());
        assert!(Pmf::new(vec![0.5, 0.4]).is_err());
        let p = Pmf::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(p.probs().len(), 2);
        assert_eq!(Pmf::point(3).probs(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn propagate_point_at_zero() {
        let p = propagate_arrivals_departures(&Pmf::point(0), &params(0.1, 0.5));
        assert_pmf(&p, &[(0, 0.9), (1, 0.1)]);
        assert_pmf(&p, &brute_force_propagate(&[(0, 1.0)], 0.1, 0.5));
    }

    #[test]
    fn propagate_point_at_three() {
        let p = propagate_arrivals_departures(&Pmf::point(3), &params(0.1, 0.5));
        assert_pmf(&p, &[(2, 0.45), (3, 0.5), (4, 0.05)]);
    }

    #[test]
    fn propagate_point_at_three_exclusive() {
        let exc = ModelParams::with_convention(0.1, 0.5, Convention::Exclusive).unwrap();
        let p = propagate_arrivals_departures(&Pmf::point(3), &exc);
        assert_pmf(&p, &[(2, 0.5), (3, 0.4), (4, 0.1)]);
    }

    #[test]
    fn propagate_is_linear_in_the_prior() {
        let mix = Pmf::from_pairs(&[(1, 0.9), (5, 0.1)]).unwrap();
        let p = propagate_arrivals_departures(&mix, &params(0.1, 0.5));
        let a = propagate_arrivals_departures(&Pmf::point(1), &params(0.1, 0.5));
        let b = propagate_arrivals_departures(&Pmf::point(5), &params(0.1, 0.5));
        for x in 0..8 {
            assert!((p.get(x) - (0.9 * a.get(x) + 0.1 * b.get(x))).abs() < 1e-15);
        }
        assert_pmf(&p, &brute_force_propagate(&[(1, 0.9), (5, 0.1)], 0.1, 0.5));
    }

    #[test]
    fn condition_examples() {
        let pibar = Pmf::from_pairs(&[(2, 0.45), (3, 0.5), (4, 0.05)]).unwrap();
        let th = Threshold::from_halves(6);
        let c = condition_on_action(&pibar, true, th).unwrap();
        assert_pmf(&c, &[(3, 10.0 / 11.0), (4, 1.0 / 11.0)]);

        let sure = condition_on_action(&pibar, false, Threshold::from_halves(11)).unwrap();
        assert_eq!(sure, pibar);

        assert!(matches!(
            condition_on_action(&Pmf::point(5), false, th),
            Err(Error::ZeroProbabilityEvent(_))
        ));
    }

    #[test]
    fn empty_queue_cannot_signal_a_route() {
        // TH = 0: an empty queue still cannot route.
        assert!(condition_on_action(&Pmf::point(0), true, Threshold::from_halves(0)).is_err());
        let c = condition_on_action(&Pmf::point(0), false, Threshold::from_halves(0)).unwrap();
        assert_eq!(c, Pmf::point(0));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_by_routing(&Pmf::point(3), true, false).unwrap(), Pmf::point(2));
        assert_eq!(shift_by_routing(&Pmf::point(3), true, true).unwrap(), Pmf::point(3));
        let p = Pmf::from_pairs(&[(3, 10.0 / 11.0), (4, 1.0 / 11.0)]).unwrap();
        let s = shift_by_routing(&p, true, false).unwrap();
        assert_pmf(&s, &[(2, 10.0 / 11.0), (3, 1.0 / 11.0)]);
        assert_eq!(
            shift_by_routing(&Pmf::from_pairs(&[(0, 0.5), (1, 0.5)]).unwrap(), true, false),
            Err(Error::NegativeSupport)
        );
    }

    #[test]
    fn bounds_and_thresholds() {
        let b = support_bounds(&Pmf::point(3), &Pmf::point(3));
        assert_eq!(b.joint, Interval::new(3, 3));
        assert_eq!(b.queues, [Interval::new(3, 3); 2]);

        let b = support_bounds(&Pmf::from_pairs(&[(0, 0.5), (2, 0.5)]).unwrap(), &Pmf::point(1));
        assert_eq!(b.queues, [Interval::new(0, 2), Interval::new(1, 1)]);
        assert_eq!(b.joint, Interval::new(0, 2));

        let th = |lb, ub| threshold(&SupportBounds::from_queues(Interval::new(lb, ub), Interval::new(lb, ub)));
        assert_eq!(th(0, 6).value(), 3.0);
        assert_eq!(th(2, 5).value(), 3.5);
        assert_eq!(th(2, 5).to_string(), "3.5");
        assert_eq!(th(2, 5).ceil(), 4);
        assert_eq!(th(0, 0).value(), 0.0);
        assert!(th(2, 5).is_met_by(4));
        assert!(!th(2, 5).is_met_by(3));
    }

    #[test]
    fn skewed_example_pre_decision_bounds() {
        // δ₃ against 0.9·δ₁ + 0.1·δ₅ at λ = 0.1, μ = 0.5.
        for conv in Convention::ALL {
            let p = ModelParams::with_convention(0.1, 0.5, conv).unwrap();
            let info = CommonInfo::from_prior(
                &[Pmf::point(3), Pmf::from_pairs(&[(1, 0.9), (5, 0.1)]).unwrap()],
                &p,
            );
            assert_eq!(info.bounds.joint, Interval::new(0, 6));
            assert_eq!(info.threshold.to_string(), "3");
        }
    }

    /// Pre-decision pair with contiguous supports and joint bounds [0, 6].
    fn contiguous_pair() -> (Pmf, Pmf) {
        (
            Pmf::new(vec![0.0, 0.1, 0.2, 0.3, 0.2, 0.1, 0.1]).unwrap(),
            Pmf::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap(),
        )
    }

    fn filtered_joint(pibar: &(Pmf, Pmf), u: [bool; 2], th: Threshold) -> Interval {
        let c1 = condition_on_action(&pibar.0, u[0], th).unwrap();
        let c2 = condition_on_action(&pibar.1, u[1], th).unwrap();
        let s1 = shift_by_routing(&c1, u[0], u[1]).unwrap();
        let s2 = shift_by_routing(&c2, u[1], u[0]).unwrap();
        support_bounds(&s1, &s2).joint
    }

    #[test]
    fn bound_recursion_matches_filter_on_intervals() {
        let pair = contiguous_pair();
        let b = support_bounds(&pair.0, &pair.1);
        let th = threshold(&b);
        assert_eq!(th.value(), 3.0);
        let cases = [
            ([false, false], Interval::new(0, 2)),
            ([true, true], Interval::new(3, 6)),
            ([true, false], Interval::new(1, 5)),
        ];
        for (u, expected) in cases {
            assert_eq!(update_bounds_recursive(&b, u, th), expected);
            assert_eq!(filtered_joint(&pair, u, th), expected);
        }
        assert_eq!(
            update_bounds_recursive(&b, [false, true], th),
            filtered_joint(&pair, [false, true], th)
        );
    }

    #[test]
    fn bound_recursion_is_loose_on_gapped_support() {
        // Queue 2 has no mass at ⌈TH⌉ = 3: after (0, 1) the true joint lower
        // bound is 3 while the recursion gives ⌈TH⌉ − 1 = 2.
        let pair = (
            Pmf::from_pairs(&[(2, 0.45), (3, 0.5), (4, 0.05)]).unwrap(),
            Pmf::from_pairs(&[(0, 0.405), (1, 0.45), (2, 0.045), (4, 0.045), (5, 0.05), (6, 0.005)])
                .unwrap(),
        );
        let b = support_bounds(&pair.0, &pair.1);
        let th = threshold(&b);
        let exact = filtered_joint(&pair, [false, true], th);
        let fast = update_bounds_recursive(&b, [false, true], th);
        assert_eq!(exact, Interval::new(3, 5));
        assert_eq!(fast, Interval::new(2, 5));
    }

    fn arb_pmf() -> impl Strategy<Value = Pmf> {
        prop::collection::vec(0u32..5, 1..8).prop_map(|w| {
            let mut v: Vec<f64> = w.into_iter().map(f64::from).collect();
            if v.iter().all(|&x| x == 0.0) {
                v[0] = 1.0;
            }
            let s: f64 = v.iter().sum();
            Pmf::new(v.into_iter().map(|x| x / s).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn emitted_pmfs_are_valid(
            pi in arb_pmf(),
            l in 0.0f64..=1.0,
            m in 0.0f64..=1.0,
            routed: bool,
            twice in 0u64..16,
        ) {
            let p = propagate_arrivals_departures(&pi, &params(l, m));
            p.check().unwrap();
            if let Ok(c) = condition_on_action(&p, routed, Threshold::from_halves(twice)) {
                c.check().unwrap();
                if let Ok(s) = shift_by_routing(&c, routed, false) {
                    s.check().unwrap();
                }
            }
        }

        #[test]
        fn barred_bounds_follow_the_recursion(
            a in arb_pmf(),
            b in arb_pmf(),
            l in 0.01f64..0.99,
            m in 0.01f64..0.99,
        ) {
            let before = support_bounds(&a, &b).joint;
            let p = params(l, m);
            let after = support_bounds(
                &propagate_arrivals_departures(&a, &p),
                &propagate_arrivals_departures(&b, &p),
            ).joint;
            prop_assert_eq!(after, barred_bounds_recursive(before));
        }

        #[test]
        fn recursion_encloses_filter(a in arb_pmf(), b in arb_pmf(), x1 in 0u32..8, x2 in 0u32..8) {
            let bounds = support_bounds(&a, &b);
            let th = threshold(&bounds);
            let x1 = x1.min(a.max_support());
            let x2 = x2.min(b.max_support());
            prop_assume!(a.get(x1) > 0.0 && b.get(x2) > 0.0);
            let u = [x1 >= th.route_cut(), x2 >= th.route_cut()];
            let exact = filtered_joint(&(a.clone(), b.clone()), u, th);
            let fast = update_bounds_recursive(&bounds, u, th);
            prop_assert!(fast.lb <= exact.lb && exact.ub <= fast.ub, "{:?} vs {:?}", exact, fast);
        }

        #[test]
        fn json_round_trip_is_exact(pi in arb_pmf()) {
            let s = serde_json::to_string(&pi).unwrap();
            let back: Pmf = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, pi);
        }
    }
}
