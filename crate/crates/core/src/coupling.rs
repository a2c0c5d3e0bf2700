//! Pathwise coupling of the `ĝ` system with two uncontrolled queues.
//!
//! The uncontrolled lengths `Y` evolve as `Y' = (Y − D̃)⁺ + Ã`, where the
//! primitives `(Ã, D̃)` are those of the controlled system re-associated by
//! rank: the longer `Y` queue receives the arrival and departure of the
//! longer `X` queue, and likewise for the shorter ones. The single exception
//! is when `Y^{My} − 1 = X^{Mx} = X^{mx}` and `(A^{Mx}, D^{Mx}, A^{mx}, D^{mx})`
//! is `(0,1,1,0)` or `(0,0,1,1)`; then the departures are associated the
//! other way round. Ties in the ranking put queue 1 first.
//!
//! Each `Y^i` then has the law of a queue that never routes, while
//! `X¹ + X² ≤ Y¹ + Y²` and `max X ≤ max Y` hold on every path.

use rayon::prelude::*;
use serde::Serialize;

use crate::belief::{CommonInfo, Pmf};
use crate::error::{Error, Result};
use crate::model::rng::{stream, PrimitiveStreams, StreamId};
use crate::model::{apply_routing, Convention, CostFn, ModelParams, Primitives};
use crate::policy::{advance_common_info, Policy, PolicyKind};

pub const DEFAULT_CHECKPOINTS: [usize; 3] = [1, 5, 20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoupledState {
    pub x: [u32; 2],
    pub y: [u32; 2],
}

fn ranks(v: [u32; 2]) -> (usize, usize) {
    if v[0] >= v[1] {
        (0, 1)
    } else {
        (1, 0)
    }
}

fn dominated(x: [u32; 2], y: [u32; 2]) -> Option<&'static str> {
    if x[0] + x[1] > y[0] + y[1] {
        Some("sum")
    } else if x[0].max(x[1]) > y[0].max(y[1]) {
        Some("max")
    } else {
        None
    }
}

impl CoupledState {
    pub fn new(x: [u32; 2], y: [u32; 2]) -> Result<Self> {
        let s = CoupledState { x, y };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        match dominated(self.x, self.y) {
            Some(what) => Err(Error::Dominance(format!("{what}: x = {:?}, y = {:?}", self.x, self.y))),
            None => Ok(()),
        }
    }
}

/// The primitives driving `Y` for one slot, and whether the departures were
/// swapped.
pub fn coupled_primitives(x: [u32; 2], y: [u32; 2], prim: &Primitives) -> (Primitives, bool) {
    let (mx_hi, mx_lo) = ranks(x);
    let (my_hi, my_lo) = ranks(y);
    let a = prim.arrivals;
    let d = prim.departures;
    let pattern = (a[mx_hi], d[mx_hi], a[mx_lo], d[mx_lo]);
    let swap = y[my_hi] == x[mx_hi] + 1
        && x[mx_hi] == x[mx_lo]
        && (pattern == (false, true, true, false) || pattern == (false, false, true, true));
    let mut out = Primitives::default();
    out.arrivals[my_hi] = a[mx_hi];
    out.arrivals[my_lo] = a[mx_lo];
    if swap {
        out.departures[my_hi] = d[mx_lo];
        out.departures[my_lo] = d[mx_hi];
    } else {
        out.departures[my_hi] = d[mx_hi];
        out.departures[my_lo] = d[mx_lo];
    }
    (out, swap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoupledStep {
    pub state: CoupledState,
    pub xbar: [u32; 2],
    pub u: [bool; 2],
    pub swapped: bool,
}

/// Advances both systems one slot. `X` follows `ĝ` with the common
/// information `info`; `Y` follows the coupled primitives. Fails if either
/// dominance relation breaks, both against the pre-decision lengths and after
/// routing.
pub fn couple_step(
    state: &CoupledState,
    prim: &Primitives,
    info: &CommonInfo,
    params: &ModelParams,
    t: usize,
) -> Result<CoupledStep> {
    require_independent(params)?;
    let xbar = prim.pre_decision(state.x);
    let u = [
        PolicyKind::Ghat.decide(0, xbar[0], info, t),
        PolicyKind::Ghat.decide(1, xbar[1], info, t),
    ];
    let x = apply_routing(xbar, u)?;
    let (yprim, swapped) = coupled_primitives(state.x, state.y, prim);
    let y = yprim.pre_decision(state.y);
    if let Some(what) = dominated(xbar, y) {
        return Err(Error::Dominance(format!(
            "{what} before routing: x = {:?}, x̄ = {xbar:?}, y = {:?} -> {y:?}",
            state.x, state.y
        )));
    }
    let next = CoupledState { x, y };
    next.check()?;
    Ok(CoupledStep {
        state: next,
        xbar,
        u,
        swapped,
    })
}

fn require_independent(params: &ModelParams) -> Result<()> {
    if params.convention != Convention::Independent {
        return Err(Error::InvalidParams(
            "the coupling re-associates departures and needs independent arrivals and departures".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    pub params: ModelParams,
    pub initial: [Pmf; 2],
    pub cost: CostFn,
    pub horizon: usize,
    pub replications: u64,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
}

/// Total-variation comparison of one marginal at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvCheck {
    pub t: usize,
    pub queue: usize,
    pub tv: f64,
    /// `½ Σ_k 3 √((p̂_k(1 − p̂_k) + q̂_k(1 − q̂_k)) / n)`.
    pub band: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub replications: u64,
    pub horizon: usize,
    pub steps_checked: u64,
    pub cost_checks: u64,
    pub case1_events: u64,
    pub tv: Vec<TvCheck>,
}

impl CouplingReport {
    pub fn tv_within_bands(&self) -> bool {
        self.tv.iter().all(|c| c.within)
    }
}

struct PathOutcome {
    swaps: u64,
    y_at: Vec<[u32; 2]>,
    free_at: Vec<[u32; 2]>,
}

fn sample_initial(initial: &[Pmf; 2], seed: u64, rep: u64, id: u64) -> [u32; 2] {
    let mut rng = stream(seed, rep, id);
    let x1 = initial[0].sample(&mut rng);
    let x2 = initial[1].sample(&mut rng);
    [x1, x2]
}

fn run_path(cfg: &CouplingConfig, rep: u64) -> Result<PathOutcome> {
    let params = &cfg.params;
    let x0 = sample_initial(&cfg.initial, cfg.seed, rep, StreamId::Initial as u64);
    let mut state = CoupledState { x: x0, y: x0 };
    let mut prims = PrimitiveStreams::new(cfg.seed, rep);
    let mut info = CommonInfo::from_prior(&cfg.initial, params);

    let shadow = StreamId::Shadow as u64;
    let mut free = sample_initial(&cfg.initial, cfg.seed, rep, shadow + StreamId::Initial as u64);
    let mut free_prims = PrimitiveStreams::with_offset(cfg.seed, rep, shadow);

    let mut out = PathOutcome {
        swaps: 0,
        y_at: Vec::with_capacity(cfg.checkpoints.len()),
        free_at: Vec::with_capacity(cfg.checkpoints.len()),
    };
    let wrap = |step: usize| move |e: Error| Error::Replication {
        replication: rep,
        step,
        source: Box::new(e),
    };
    for t in 0..=cfg.horizon {
        let lhs = cfg.cost.eval(state.x[0]) + cfg.cost.eval(state.x[1]);
        let rhs = cfg.cost.eval(state.y[0]) + cfg.cost.eval(state.y[1]);
        if lhs > rhs + 1e-9 * rhs.abs().max(1.0) {
            return Err(wrap(t)(Error::Dominance(format!(
                "cost {lhs} > {rhs}: x = {:?}, y = {:?}",
                state.x, state.y
            ))));
        }
        if cfg.checkpoints.contains(&t) {
            out.y_at.push(state.y);
            out.free_at.push(free);
        }
        if t == cfg.horizon {
            break;
        }
        let prim = prims.sample(params);
        let step = couple_step(&state, &prim, &info, params, t).map_err(wrap(t))?;
        info = advance_common_info(&info, step.u, params, &PolicyKind::Ghat, t).map_err(wrap(t))?;
        state = step.state;
        out.swaps += u64::from(step.swapped);
        free = free_prims.sample(params).pre_decision(free);
    }
    Ok(out)
}

/// Runs the coupled construction on `replications` paths, checking sum, max
/// and cost dominance at every step, and compares the marginals of `Y` with
/// independently simulated uncontrolled queues at the checkpoints.
pub fn run_coupling(cfg: &CouplingConfig) -> Result<CouplingReport> {
    require_independent(&cfg.params)?;
    cfg.params.validate()?;
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if let Some(&t) = checkpoints.iter().find(|&&t| t > cfg.horizon) {
        return Err(Error::Config(format!("checkpoint {t} beyond horizon {}", cfg.horizon)));
    }
    let cfg = CouplingConfig {
        checkpoints,
        ..cfg.clone()
    };
    let outcomes: Vec<PathOutcome> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_path(&cfg, rep))
        .collect::<Result<_>>()?;

    let n = cfg.replications as f64;
    let mut tv = Vec::new();
    for (k, &t) in cfg.checkpoints.iter().enumerate() {
        for q in 0..2 {
            let y = histogram(outcomes.iter().map(|o| o.y_at[k][q]));
            let f = histogram(outcomes.iter().map(|o| o.free_at[k][q]));
            tv.push(tv_check(t, q + 1, &y, &f, n));
        }
    }
    Ok(CouplingReport {
        replications: cfg.replications,
        horizon: cfg.horizon,
        steps_checked: cfg.replications * cfg.horizon as u64,
        cost_checks: cfg.replications * (cfg.horizon as u64 + 1),
        case1_events: outcomes.iter().map(|o| o.swaps).sum(),
        tv,
    })
}

fn histogram(values: impl Iterator<Item = u32>) -> Vec<u64> {
    let mut h = Vec::new();
    for v in values {
        let v = v as usize;
        if h.len() <= v {
            h.resize(v + 1, 0);
        }
        h[v] += 1;
    }
    h
}

fn tv_check(t: usize, queue: usize, a: &[u64], b: &[u64], n: f64) -> TvCheck {
    let len = a.len().max(b.len());
    let mut tv = 0.0;
    let mut band = 0.0;
    for k in 0..len {
        let p = a.get(k).copied().unwrap_or(0) as f64 / n;
        let q = b.get(k).copied().unwrap_or(0) as f64 / n;
        tv += (p - q).abs();
        band += 3.0 * ((p * (1.0 - p) + q * (1.0 - q)) / n).sqrt();
    }
    let (tv, band) = (tv / 2.0, band / 2.0);
    TvCheck {
        t,
        queue,
        tv,
        band,
        within: tv <= band,
    }
}

/// Marginal-law comparison at `t ∈ {1, 5, 20}` (those within the horizon).
pub fn verify_distribution_match(
    params: &ModelParams,
    initial: &[Pmf; 2],
    horizon: usize,
    replications: u64,
    seed: u64,
) -> Result<Vec<TvCheck>> {
    let cfg = CouplingConfig {
        params: *params,
        initial: initial.clone(),
        cost: CostFn::Zero,
        horizon,
        replications,
        seed,
        checkpoints: DEFAULT_CHECKPOINTS.into_iter().filter(|&t| t <= horizon).collect(),
    };
    Ok(run_coupling(&cfg)?.tv)
}

/// Pathwise `c(X¹) + c(X²) ≤ c(Y¹) + c(Y²)`; the first failure is returned
/// as an error naming the replication and step.
pub fn verify_cost_dominance(
    params: &ModelParams,
    initial: &[Pmf; 2],
    cost: &CostFn,
    horizon: usize,
    replications: u64,
    seed: u64,
) -> Result<CouplingReport> {
    run_coupling(&CouplingConfig {
        params: *params,
        initial: initial.clone(),
        cost: cost.clone(),
        horizon,
        replications,
        seed,
        checkpoints: Vec::new(),
    })
}
