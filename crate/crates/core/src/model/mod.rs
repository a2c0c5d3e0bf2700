//! The physical two-queue system: primitive randomness, queue dynamics and
//! holding cost.
//!
//! Within a slot `t` the order of events is fixed:
//!
//! 1. the holding cost `c_t(X¹ₜ) + c_t(X²ₜ)` of the current lengths is charged;
//! 2. departures and arrivals act on each queue, giving the pre-decision
//!    lengths `X̄ⁱₜ = (Xⁱₜ − Dⁱₜ)⁺ + Aⁱₜ`;
//! 3. each controller decides whether to route one customer to the other
//!    queue, giving `X¹ₜ₊₁ = X̄¹ₜ − U¹ₜ + U²ₜ` and symmetrically for queue 2.

mod cost;
pub mod rng;

pub use cost::{CostFn, CostModel, DEFAULT_VALIDATION_RANGE};
pub use rng::{PrimitiveStreams, StreamId};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the arrival and departure indicators of one queue are jointly drawn
/// within a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `A ~ Bernoulli(λ)` and `D ~ Bernoulli(μ)` independently.
    #[default]
    Independent,
    /// At most one event per queue per slot: an arrival with probability λ,
    /// a departure attempt with probability μ, nothing otherwise. Requires
    /// `λ + μ ≤ 1`.
    Exclusive,
}

impl Convention {
    pub const ALL: [Convention; 2] = [Convention::Independent, Convention::Exclusive];

    pub fn name(self) -> &'static str {
        match self {
            Convention::Independent => "independent",
            Convention::Exclusive => "exclusive",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Convention::Independent),
            "exclusive" => Ok(Convention::Exclusive),
            other => Err(Error::Config(format!("unknown convention `{other}`"))),
        }
    }
}

/// Arrival probability `lambda` and service probability `mu` per slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    #[serde(default)]
    pub convention: Convention,
}

/// One joint (arrival, departure) outcome for a single queue in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueOutcome {
    pub arrival: bool,
    pub departure: bool,
    pub prob: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        Self::with_convention(lambda, mu, Convention::Independent)
    }

    pub fn with_convention(lambda: f64, mu: f64, convention: Convention) -> Result<Self> {
        let p = ModelParams {
            lambda,
            mu,
            convention,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} = {v} not in [0, 1]")));
            }
        }
        if self.convention == Convention::Exclusive && self.lambda + self.mu > 1.0 + 1e-15 {
            return Err(Error::InvalidParams(format!(
                "exclusive convention needs lambda + mu <= 1, got {}",
                self.lambda + self.mu
            )));
        }
        Ok(())
    }

    /// Infinite-horizon routines need a strictly stable system.
    pub fn require_stable(&self) -> Result<()> {
        self.validate()?;
        if self.mu <= self.lambda {
            return Err(Error::InvalidParams(format!(
                "need mu > lambda, got mu = {}, lambda = {}",
                self.mu, self.lambda
            )));
        }
        Ok(())
    }

    /// The per-queue outcome law, with zero-probability outcomes dropped.
    pub fn queue_outcomes(&self) -> impl Iterator<Item = QueueOutcome> {
        let (l, m) = (self.lambda, self.mu);
        let table = match self.convention {
            Convention::Independent => [
                (false, false, (1.0 - l) * (1.0 - m)),
                (false, true, (1.0 - l) * m),
                (true, false, l * (1.0 - m)),
                (true, true, l * m),
            ],
            Convention::Exclusive => [
                (false, false, (1.0 - l - m).max(0.0)),
                (false, true, m),
                (true, false, l),
                (true, true, 0.0),
            ],
        };
        table
            .into_iter()
            .filter(|&(_, _, p)| p > 0.0)
            .map(|(arrival, departure, prob)| QueueOutcome {
                arrival,
                departure,
                prob,
            })
    }

    /// All joint primitive outcomes of one slot with their probabilities.
    pub fn slot_outcomes(&self) -> Vec<(Primitives, f64)> {
        let per_queue: Vec<QueueOutcome> = self.queue_outcomes().collect();
        let mut out = Vec::with_capacity(per_queue.len() * per_queue.len());
        for o1 in &per_queue {
            for o2 in &per_queue {
                out.push((
                    Primitives {
                        arrivals: [o1.arrival, o2.arrival],
                        departures: [o1.departure, o2.departure],
                    },
                    o1.prob * o2.prob,
                ));
            }
        }
        out
    }

    /// Smallest and largest `(x − d)⁺ + a` reachable in one slot from `x`.
    pub fn one_step_reach(&self, x: u32) -> (u32, u32) {
        let mut lo = u32::MAX;
        let mut hi = 0;
        for o in self.queue_outcomes() {
            let y = step_queue(x, o.departure, o.arrival);
            lo = lo.min(y);
            hi = hi.max(y);
        }
        (lo, hi)
    }
}

/// Arrival and departure indicators `(A¹, A²)`, `(D¹, D²)` of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Primitives {
    pub arrivals: [bool; 2],
    pub departures: [bool; 2],
}

impl Primitives {
    pub fn new(a1: bool, a2: bool, d1: bool, d2: bool) -> Self {
        Primitives {
            arrivals: [a1, a2],
            departures: [d1, d2],
        }
    }

    pub fn pre_decision(&self, x: [u32; 2]) -> [u32; 2] {
        [
            step_queue(x[0], self.departures[0], self.arrivals[0]),
            step_queue(x[1], self.departures[1], self.arrivals[1]),
        ]
    }
}

/// True lengths `x` at the start of a slot and pre-decision lengths `xbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SystemState {
    pub x: [u32; 2],
    pub xbar: [u32; 2],
}

impl SystemState {
    pub fn new(x: [u32; 2]) -> Self {
        SystemState { x, xbar: x }
    }

    /// Runs one full slot: primitives, then routing. Returns the new state
    /// with `xbar` holding this slot's pre-decision lengths.
    pub fn advance(
        &self,
        prim: &Primitives,
        decide: impl FnOnce([u32; 2]) -> [bool; 2],
    ) -> Result<(SystemState, [bool; 2])> {
        let xbar = prim.pre_decision(self.x);
        let u = decide(xbar);
        let x = apply_routing(xbar, u)?;
        Ok((SystemState { x, xbar }, u))
    }
}

/// `(x − d)⁺ + a`.
#[inline]
pub fn step_queue(x: u32, departure: bool, arrival: bool) -> u32 {
    x.saturating_sub(u32::from(departure)) + u32::from(arrival)
}

/// Applies both controllers' routing decisions to the pre-decision lengths.
pub fn apply_routing(xbar: [u32; 2], u: [bool; 2]) -> Result<[u32; 2]> {
    for i in 0..2 {
        if u[i] && xbar[i] == 0 {
            return Err(Error::InfeasibleAction { queue: i + 1 });
        }
    }
    let (u1, u2) = (u32::from(u[0]), u32::from(u[1]));
    Ok([xbar[0] - u1 + u2, xbar[1] - u2 + u1])
}

/// `c_t(x¹) + c_t(x²)`.
pub fn stage_cost(x: [u32; 2], cost: &CostModel, t: usize) -> f64 {
    let c = cost.stage(t);
    c.eval(x[0]) + c.eval(x[1])
}
