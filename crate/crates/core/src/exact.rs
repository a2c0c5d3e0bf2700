//! Exact finite-horizon evaluation.
//!
//! A horizon of `T` charges the stages `t = 0, …, T − 1`, so a decision is
//! taken at `t = 0, …, T − 2` and the last decision would only affect an
//! uncharged state.
//!
//! The default evaluation walks layers of nodes. A node is one value of the
//! common information together with the (unnormalized) joint law of the true
//! lengths given the action history that produced it. Nodes whose common
//! information coincides are merged, since the future depends on nothing
//! else. The raw-path mode enumerates every initial state and primitive
//! sequence one by one, in a fixed order, and serves as the reference.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::belief::{CommonInfo, Pmf};
use crate::error::{Error, Result};
use crate::model::{apply_routing, stage_cost, CostModel, ModelParams, Primitives};
use crate::policy::{advance_common_info, Policy};

pub const DEFAULT_BUDGET: u128 = 50_000_000;

/// Action pairs in tie-breaking order.
pub const ACTIONS: [[bool; 2]; 4] = [[false, false], [true, false], [false, true], [true, true]];

#[derive(Debug, Clone, PartialEq)]
pub struct ExactEvalConfig {
    pub horizon: usize,
    pub params: ModelParams,
    pub initial: [Pmf; 2],
    pub cost: CostModel,
    /// Largest queue length represented in the dynamic program's grid.
    pub state_cap: u32,
    /// Upper bound on the enumeration size.
    pub budget: u128,
}

impl ExactEvalConfig {
    /// A config whose state cap is the smallest one that keeps every
    /// reachable state.
    pub fn new(horizon: usize, params: ModelParams, initial: [Pmf; 2], cost: CostModel) -> Result<Self> {
        let mut cfg = ExactEvalConfig {
            horizon,
            params,
            initial,
            cost,
            state_cap: 0,
            budget: DEFAULT_BUDGET,
        };
        cfg.state_cap = cfg.required_cap();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// Each slot can add one arrival and one routed customer to a queue.
    pub fn required_cap(&self) -> u32 {
        let m = self.initial[0].max_support().max(self.initial[1].max_support());
        m + 2 * self.horizon.saturating_sub(1) as u32
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParams("horizon must be at least 1".into()));
        }
        self.params.validate()?;
        self.initial[0].check()?;
        self.initial[1].check()?;
        if self.state_cap < self.required_cap() {
            return Err(Error::StateCapTooSmall {
                cap: self.state_cap,
                required: self.required_cap(),
            });
        }
        Ok(())
    }

    /// Number of (initial state, primitive sequence) paths.
    pub fn raw_path_count(&self) -> u128 {
        let outcomes = self.params.slot_outcomes().len() as u128;
        let init = (self.initial[0].support_size() * self.initial[1].support_size()) as u128;
        (0..self.horizon.saturating_sub(1)).fold(init, |acc, _| acc.saturating_mul(outcomes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExactMode {
    #[default]
    Layered,
    RawPaths,
}

#[derive(Debug, Clone)]
struct Node {
    info: CommonInfo,
    mass: BTreeMap<[u32; 2], f64>,
}

fn info_key(info: &CommonInfo) -> Vec<u64> {
    let mut key = Vec::new();
    for p in &info.pibar {
        key.push(p.probs().len() as u64);
        key.extend(p.probs().iter().map(|x| x.to_bits()));
    }
    key
}

fn initial_nodes(cfg: &ExactEvalConfig) -> Vec<Node> {
    let mut mass = BTreeMap::new();
    for (x1, p1) in cfg.initial[0].support() {
        for (x2, p2) in cfg.initial[1].support() {
            mass.insert([x1, x2], p1 * p2);
        }
    }
    vec![Node {
        info: CommonInfo::from_prior(&cfg.initial, &cfg.params),
        mass,
    }]
}

fn step_layer(
    nodes: Vec<Node>,
    policy: &dyn Policy,
    params: &ModelParams,
    outcomes: &[(Primitives, f64)],
    t: usize,
) -> Result<Vec<Node>> {
    let mut next: Vec<Node> = Vec::new();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    for node in nodes {
        let mut by_action: [BTreeMap<[u32; 2], f64>; 4] = Default::default();
        for (&x, &w) in &node.mass {
            for (prim, p) in outcomes {
                let xbar = prim.pre_decision(x);
                let u = [
                    policy.decide(0, xbar[0], &node.info, t),
                    policy.decide(1, xbar[1], &node.info, t),
                ];
                let y = apply_routing(xbar, u)?;
                let k = ACTIONS.iter().position(|a| *a == u).unwrap();
                *by_action[k].entry(y).or_insert(0.0) += w * p;
            }
        }
        for (k, mass) in by_action.into_iter().enumerate() {
            if mass.is_empty() {
                continue;
            }
            let info = advance_common_info(&node.info, ACTIONS[k], params, policy, t)?;
            let key = info_key(&info);
            match index.get(&key) {
                Some(&i) => {
                    for (y, w) in mass {
                        *next[i].mass.entry(y).or_insert(0.0) += w;
                    }
                }
                None => {
                    index.insert(key, next.len());
                    next.push(Node { info, mass });
                }
            }
        }
    }
    Ok(next)
}

/// Walks the layers `t = 0, …, steps`, handing each to `visit`.
fn walk_layers(
    policy: &dyn Policy,
    cfg: &ExactEvalConfig,
    steps: usize,
    mut visit: impl FnMut(usize, &[Node]),
) -> Result<()> {
    cfg.validate()?;
    let outcomes = cfg.params.slot_outcomes();
    let mut nodes = initial_nodes(cfg);
    for t in 0..=steps {
        let size: u128 = nodes.iter().map(|n| n.mass.len() as u128).sum();
        if size.saturating_mul(outcomes.len() as u128) > cfg.budget {
            return Err(Error::BudgetExceeded {
                size: size * outcomes.len() as u128,
                budget: cfg.budget,
            });
        }
        visit(t, &nodes);
        if t < steps {
            nodes = step_layer(nodes, policy, &cfg.params, &outcomes, t)?;
        }
    }
    Ok(())
}

/// Expected total cost `E[Σ_{t<T} c_t(X¹_t) + c_t(X²_t)]` under `policy`.
pub fn exact_finite_cost(policy: &dyn Policy, cfg: &ExactEvalConfig) -> Result<f64> {
    exact_finite_cost_with(policy, cfg, ExactMode::Layered)
}

pub fn exact_finite_cost_with(policy: &dyn Policy, cfg: &ExactEvalConfig, mode: ExactMode) -> Result<f64> {
    match mode {
        ExactMode::Layered => {
            let mut total = 0.0;
            let mut mass_error: f64 = 0.0;
            walk_layers(policy, cfg, cfg.horizon - 1, |t, nodes| {
                let mut m = 0.0;
                for n in nodes {
                    for (&x, &w) in &n.mass {
                        total += w * stage_cost(x, &cfg.cost, t);
                        m += w;
                    }
                }
                mass_error = mass_error.max((m - 1.0).abs());
            })?;
            debug_assert!(mass_error < 1e-12, "layer mass off by {mass_error}");
            Ok(total)
        }
        ExactMode::RawPaths => raw_paths(policy, cfg),
    }
}

fn raw_paths(policy: &dyn Policy, cfg: &ExactEvalConfig) -> Result<f64> {
    cfg.validate()?;
    let size = cfg.raw_path_count();
    if size > cfg.budget {
        return Err(Error::BudgetExceeded {
            size,
            budget: cfg.budget,
        });
    }
    let outcomes = cfg.params.slot_outcomes();
    let info0 = CommonInfo::from_prior(&cfg.initial, &cfg.params);
    let mut total = 0.0;
    for (x1, p1) in cfg.initial[0].support() {
        for (x2, p2) in cfg.initial[1].support() {
            total += p1 * p2 * path_cost(policy, cfg, &outcomes, [x1, x2], &info0, 0)?;
        }
    }
    Ok(total)
}

/// Expected cost from stage `t` on, given the state and common information.
fn path_cost(
    policy: &dyn Policy,
    cfg: &ExactEvalConfig,
    outcomes: &[(Primitives, f64)],
    x: [u32; 2],
    info: &CommonInfo,
    t: usize,
) -> Result<f64> {
    let here = stage_cost(x, &cfg.cost, t);
    if t + 1 == cfg.horizon {
        return Ok(here);
    }
    let mut rest = 0.0;
    for (prim, p) in outcomes {
        let xbar = prim.pre_decision(x);
        let u = [policy.decide(0, xbar[0], info, t), policy.decide(1, xbar[1], info, t)];
        let y = apply_routing(xbar, u)?;
        let next = advance_common_info(info, u, &cfg.params, policy, t)?;
        rest += p * path_cost(policy, cfg, outcomes, y, &next, t + 1)?;
    }
    Ok(here + rest)
}

/// Exact law of `X¹_t + X²_t` for `t = 0, …, T`.
pub fn sum_laws(policy: &dyn Policy, cfg: &ExactEvalConfig) -> Result<Vec<Pmf>> {
    let mut laws = Vec::with_capacity(cfg.horizon + 1);
    walk_layers(policy, cfg, cfg.horizon, |_, nodes| {
        let mut v: Vec<f64> = Vec::new();
        for n in nodes {
            for (&x, &w) in &n.mass {
                let s = (x[0] + x[1]) as usize;
                if v.len() <= s {
                    v.resize(s + 1, 0.0);
                }
                v[s] += w;
            }
        }
        laws.push(v);
    })?;
    laws.into_iter().map(Pmf::new).collect()
}

/// Value and optimal decisions of the centralized problem, in which one
/// controller observes both lengths.
#[derive(Debug, Clone)]
pub struct DpSolution {
    pub value: f64,
    /// `actions[t][(x̄¹, x̄²)]` for decisions `t = 0, …, T − 2`, on the grid
    /// reachable at `t`.
    actions: Vec<Vec<Vec<[bool; 2]>>>,
}

impl DpSolution {
    pub fn action(&self, t: usize, xbar: [u32; 2]) -> Option<[bool; 2]> {
        self.actions
            .get(t)?
            .get(xbar[0] as usize)?
            .get(xbar[1] as usize)
            .copied()
    }

    pub fn decision_stages(&self) -> usize {
        self.actions.len()
    }
}

/// Backward induction over the joint state, with every feasible action pair
/// available at every pre-decision state.
pub fn centralized_dp(cfg: &ExactEvalConfig) -> Result<DpSolution> {
    cfg.validate()?;
    let m = cfg.initial[0].max_support().max(cfg.initial[1].max_support()) as usize;
    let horizon = cfg.horizon;
    let grid = |t: usize| m + 2 * t + 1;
    let last = grid(horizon - 1) as u128;
    let size = last * last * 4 * cfg.params.slot_outcomes().len() as u128 * horizon as u128;
    if size > cfg.budget {
        return Err(Error::BudgetExceeded {
            size,
            budget: cfg.budget,
        });
    }
    let outcomes = cfg.params.slot_outcomes();

    let stage = |t: usize| -> Vec<Vec<f64>> {
        let n = grid(t);
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| stage_cost([a as u32, b as u32], &cfg.cost, t))
                    .collect()
            })
            .collect()
    };

    let mut value = stage(horizon - 1);
    let mut actions = vec![Vec::new(); horizon - 1];
    for t in (0..horizon - 1).rev() {
        // Best continuation from each pre-decision state reachable at t.
        let nb = grid(t) + 1;
        let mut best = vec![vec![0.0; nb]; nb];
        let mut choice = vec![vec![[false, false]; nb]; nb];
        for a in 0..nb {
            for b in 0..nb {
                let xbar = [a as u32, b as u32];
                let mut best_v = f64::INFINITY;
                for u in ACTIONS {
                    let Ok(y) = apply_routing(xbar, u) else {
                        continue;
                    };
                    let v = value[y[0] as usize][y[1] as usize];
                    if best_v.is_infinite() || v < best_v - 1e-12 * best_v.abs().max(1.0) {
                        best_v = v;
                        choice[a][b] = u;
                    }
                }
                best[a][b] = best_v;
            }
        }
        let mut here = stage(t);
        for (a, row) in here.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                let mut e = 0.0;
                for (prim, p) in &outcomes {
                    let xbar = prim.pre_decision([a as u32, b as u32]);
                    e += p * best[xbar[0] as usize][xbar[1] as usize];
                }
                *v += e;
            }
        }
        actions[t] = choice;
        value = here;
    }

    let mut total = 0.0;
    for (x1, p1) in cfg.initial[0].support() {
        for (x2, p2) in cfg.initial[1].support() {
            total += p1 * p2 * value[x1 as usize][x2 as usize];
        }
    }
    Ok(DpSolution {
        value: total,
        actions,
    })
}

/// A point where the reference policy's sum has a heavier tail than the
/// comparison's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceViolation {
    pub t: usize,
    pub a: u32,
    pub reference_tail: f64,
    pub comparison_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub reference: String,
    pub comparison: String,
    pub points_checked: usize,
    pub violations: Vec<DominanceViolation>,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `P(S^ref_t ≥ a) ≤ P(S^cmp_t ≥ a)` for every `t ≤ T` and every `a`,
/// where `S_t = X¹_t + X²_t`, up to `tol`.
pub fn verify_dominance_smallcase(
    reference: &dyn Policy,
    comparisons: &[&dyn Policy],
    cfg: &ExactEvalConfig,
    tol: f64,
) -> Result<Vec<DominanceReport>> {
    let ref_laws = sum_laws(reference, cfg)?;
    let mut reports = Vec::new();
    for cmp in comparisons {
        let cmp_laws = sum_laws(*cmp, cfg)?;
        let mut report = DominanceReport {
            reference: reference.name().to_string(),
            comparison: cmp.name().to_string(),
            points_checked: 0,
            violations: Vec::new(),
        };
        for (t, (r, c)) in ref_laws.iter().zip(&cmp_laws).enumerate() {
            let top = r.max_support().max(c.max_support());
            for a in 0..=top + 1 {
                let rt = tail(r, a);
                let ct = tail(c, a);
                report.points_checked += 1;
                if rt > ct + tol {
                    report.violations.push(DominanceViolation {
                        t,
                        a,
                        reference_tail: rt,
                        comparison_tail: ct,
                    });
                }
            }
        }
        reports.push(report);
    }
    Ok(reports)
}

fn tail(p: &Pmf, a: u32) -> f64 {
    p.probs().iter().skip(a as usize).sum()
}

/// One line of `exact` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactRecord {
    pub policy: String,
    pub horizon: usize,
    pub cost: f64,
    pub cost_model: String,
    pub convention: String,
    pub lambda: f64,
    pub mu: f64,
    pub threshold0: crate::belief::Threshold,
}

impl ExactRecord {
    pub fn evaluate(policy: &dyn Policy, cfg: &ExactEvalConfig) -> Result<Self> {
        let info = CommonInfo::from_prior(&cfg.initial, &cfg.params);
        Ok(ExactRecord {
            policy: policy.name().to_string(),
            horizon: cfg.horizon,
            cost: exact_finite_cost(policy, cfg)?,
            cost_model: cfg.cost.to_string(),
            convention: cfg.params.convention.to_string(),
            lambda: cfg.params.lambda,
            mu: cfg.params.mu,
            threshold0: info.threshold,
        })
    }
}
