//! Decentralized routing rules.
//!
//! A rule sees only its own pre-decision length and the common information.
//! Each rule also declares the event on which it routes so that the other
//! controller (and the common-information filter) can condition on the
//! observed action.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::belief::{
    condition_on_cut, propagate_arrivals_departures, shift_by_routing, CommonInfo, Pmf,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Pre-decision lengths on which a controller routes a customer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteEvent {
    /// Routes iff `x̄ ≥ cut`; `cut ≥ 1`.
    AtLeast(u32),
    Never,
}

impl RouteEvent {
    fn cut(self) -> u32 {
        match self {
            RouteEvent::AtLeast(c) => c.max(1),
            RouteEvent::Never => u32::MAX,
        }
    }

    pub fn routes(self, xbar: u32) -> bool {
        xbar >= self.cut()
    }
}

pub trait Policy: Send + Sync {
    fn name(&self) -> &str;

    /// Routing decision of controller `queue` (0 or 1) at time `t`.
    fn decide(&self, queue: usize, xbar: u32, info: &CommonInfo, t: usize) -> bool;

    /// The routing event, if the rule exposes one. Rules that do not cannot
    /// be tracked by the common-information filter.
    fn route_event(&self, _queue: usize, _info: &CommonInfo, _t: usize) -> Option<RouteEvent> {
        None
    }
}

/// The built-in policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Route iff `x̄ ≥ (ūb + l̄b) / 2`.
    Ghat,
    /// Never route.
    G0,
    /// Route iff `x̄` is at least the mean of the other queue's belief.
    Gtilde,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Ghat, PolicyKind::G0, PolicyKind::Gtilde];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Ghat => "ghat",
            PolicyKind::G0 => "g0",
            PolicyKind::Gtilde => "gtilde",
        }
    }

    /// Whether decisions depend on the common information at all.
    pub fn needs_beliefs(self) -> bool {
        self != PolicyKind::G0
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghat" => Ok(PolicyKind::Ghat),
            "g0" => Ok(PolicyKind::G0),
            "gtilde" => Ok(PolicyKind::Gtilde),
            other => Err(Error::Config(format!(
                "unknown policy `{other}` (expected ghat, g0 or gtilde)"
            ))),
        }
    }
}

impl Policy for PolicyKind {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn decide(&self, queue: usize, xbar: u32, info: &CommonInfo, _t: usize) -> bool {
        match self {
            PolicyKind::Ghat => ghat_decide(xbar, info),
            PolicyKind::G0 => g0_decide(xbar, info),
            PolicyKind::Gtilde => gtilde_decide(xbar, info, queue),
        }
    }

    fn route_event(&self, queue: usize, info: &CommonInfo, _t: usize) -> Option<RouteEvent> {
        Some(match self {
            PolicyKind::Ghat => RouteEvent::AtLeast(info.threshold.route_cut()),
            PolicyKind::G0 => RouteEvent::Never,
            PolicyKind::Gtilde => RouteEvent::AtLeast(mean_cut(&info.pibar[1 - queue])),
        })
    }
}

pub fn ghat_decide(xbar: u32, info: &CommonInfo) -> bool {
    xbar > 0 && info.threshold.is_met_by(xbar)
}

pub fn g0_decide(_xbar: u32, _info: &CommonInfo) -> bool {
    false
}

pub fn gtilde_decide(xbar: u32, info: &CommonInfo, queue: usize) -> bool {
    RouteEvent::AtLeast(mean_cut(&info.pibar[1 - queue])).routes(xbar)
}

/// Tolerance under which a floating-point belief mean counts as an integer.
const MEAN_SNAP: f64 = 1e-9;

/// Smallest integer `k` with `k ≥ mean`, where a mean within `MEAN_SNAP` of an
/// integer is taken to be that integer.
fn mean_cut(other: &Pmf) -> u32 {
    let m = other.mean();
    let r = m.round();
    let k = if (m - r).abs() <= MEAN_SNAP { r } else { m.ceil() };
    (k as u32).max(1)
}

/// Beliefs on the lengths at `t + 1` given the actions taken at `t`:
/// condition each pre-decision belief on its controller's action, then
/// translate by the routing.
pub fn posterior_beliefs(
    info: &CommonInfo,
    u: [bool; 2],
    policy: &dyn Policy,
    t: usize,
) -> Result<[Pmf; 2]> {
    let mut out: [Option<Pmf>; 2] = [None, None];
    for i in 0..2 {
        let event = policy
            .route_event(i, info, t)
            .ok_or_else(|| Error::ConditioningUnavailable(policy.name().to_string()))?;
        let conditioned = match event {
            RouteEvent::Never if !u[i] => info.pibar[i].clone(),
            e => condition_on_cut(&info.pibar[i], u[i], e.cut())?,
        };
        out[i] = Some(shift_by_routing(&conditioned, u[i], u[1 - i])?);
    }
    let [a, b] = out;
    Ok([a.unwrap(), b.unwrap()])
}

/// Common information at `t + 1`: Bayes update on the observed actions, the
/// routing translation, then one slot of arrivals and departures.
pub fn advance_common_info(
    info: &CommonInfo,
    u: [bool; 2],
    params: &ModelParams,
    policy: &dyn Policy,
    t: usize,
) -> Result<CommonInfo> {
    let post = posterior_beliefs(info, u, policy, t)?;
    Ok(CommonInfo::from_pre_decision(
        propagate_arrivals_departures(&post[0], params),
        propagate_arrivals_departures(&post[1], params),
    ))
}
