use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InitialState, RunMode};
use crate::belief::{
    propagate_arrivals_departures, support_bounds, update_bounds_recursive, CommonInfo, Interval, Pmf,
};
use crate::error::{Error, Result};
use crate::model::rng::{stream, PrimitiveStreams, StreamId};
use crate::model::{apply_routing, stage_cost, Primitives};
use crate::policy::{posterior_beliefs, Policy, PolicyKind};

pub const SUMMARY_SCHEMA: &str = "sigroute-summary/1";

/// One slot of one replication.
///
/// `lb`, `ub` and `threshold` describe the pre-decision beliefs used for the
/// decision; `pi_lb` and `pi_ub` are the joint bounds of the beliefs on the
/// lengths at the start of the slot. All five are empty for `g₀`, which does
/// not track beliefs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub replication: u64,
    pub t: usize,
    pub x1: u32,
    pub x2: u32,
    pub xbar1: u32,
    pub xbar2: u32,
    pub u1: u8,
    pub u2: u8,
    pub a1: u8,
    pub a2: u8,
    pub d1: u8,
    pub d2: u8,
    pub lb: Option<u32>,
    pub ub: Option<u32>,
    pub threshold: Option<f64>,
    pub pi_lb: Option<u32>,
    pub pi_ub: Option<u32>,
    pub cost: f64,
}

impl TraceRecord {
    pub fn x(&self) -> [u32; 2] {
        [self.x1, self.x2]
    }

    pub fn primitives(&self) -> Primitives {
        Primitives::new(self.a1 != 0, self.a2 != 0, self.d1 != 0, self.d2 != 0)
    }

    pub fn pi_gap(&self) -> Option<u32> {
        Some(self.pi_ub? - self.pi_lb?)
    }
}

/// Counts of failed checks.
///
/// The first group are claims that hold for every path; any nonzero count
/// there fails a run. The second group compares the bound recursion and the
/// monotonicity of the support gap with the exact filter; both can differ on
/// some paths (the recursion assumes gap-free supports, and a gap of 0 can
/// grow to 1) and are reported without failing the run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationCounts {
    /// `|x¹ − x²| > 1` under `ĝ` after an equal, known start.
    pub balancing: u64,
    /// A true length outside the support of its belief.
    pub containment: u64,
    /// Total length differs from the reconstructed `S_t` after `T₀`.
    pub s_identity: u64,
    /// Support gap above 1 after `T₀`.
    pub post_t0_gap: u64,
    /// Gap after a hold-hold step above half the previous gap, rounded up.
    pub halving: u64,

    /// Bound recursion differs from the exact filter's bounds.
    pub recursion_mismatch: u64,
    /// Of which at `t = 0`.
    pub recursion_mismatch_initial: u64,
    /// Steps where the support gap grew.
    pub gap_increase: u64,
    /// Of which from a gap of 0 to a gap of 1.
    pub gap_reopen: u64,
}

impl ViolationCounts {
    pub fn failing(&self) -> u64 {
        self.balancing + self.containment + self.s_identity + self.post_t0_gap + self.halving
    }

    fn add(&mut self, o: &ViolationCounts) {
        self.balancing += o.balancing;
        self.containment += o.containment;
        self.s_identity += o.s_identity;
        self.post_t0_gap += o.post_t0_gap;
        self.halving += o.halving;
        self.recursion_mismatch += o.recursion_mismatch;
        self.recursion_mismatch_initial += o.recursion_mismatch_initial;
        self.gap_increase += o.gap_increase;
        self.gap_reopen += o.gap_reopen;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationStats {
    pub replication: u64,
    /// `Σ_{t<T} c_t(X¹_t) + c_t(X²_t)`.
    pub total_cost: f64,
    /// Cumulative cost at each averaging checkpoint.
    pub checkpoint_costs: Vec<f64>,
    pub t0: Option<usize>,
    pub violations: ViolationCounts,
    /// Step and description of the first failing check.
    pub first_failure: Option<(usize, String)>,
}

/// `S_{t+1}` from `S_t`, the length of queue 1 and one slot of primitives,
/// valid once the two queues are balanced.
pub fn s_next(s: u32, x1: u32, p: &Primitives) -> u32 {
    let [a1, a2] = p.arrivals.map(i64::from);
    let [d1, d2] = p.departures.map(i64::from);
    let s = i64::from(s);
    let mut next = s - d1 - d2 + a1 + a2;
    if s == 1 {
        next += if x1 == 0 { d1 - d2 } else { 0 } + d2;
    }
    if s == 0 {
        next += d1 + d2;
    }
    next as u32
}

/// Log-spaced times `1, 2, 5, 10, 20, 50, …` up to `horizon`, plus `horizon`.
pub fn log_checkpoints(horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut base = 1usize;
    'outer: loop {
        for m in [1, 2, 5] {
            let t = base * m;
            if t >= horizon {
                break 'outer;
            }
            out.push(t);
        }
        base *= 10;
    }
    out.push(horizon);
    out
}

struct Tracker {
    t0: Option<usize>,
    s: Option<u32>,
    prev_gap: Option<u32>,
    counts: ViolationCounts,
    first_failure: Option<(usize, String)>,
}

impl Tracker {
    fn fail(&mut self, t: usize, what: impl FnOnce() -> String) {
        if self.first_failure.is_none() {
            self.first_failure = Some((t, what()));
        }
    }
}

/// Runs replication `rep`. When `trace` is given every slot is appended to it.
pub fn simulate_replication(
    cfg: &ExperimentConfig,
    rep: u64,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> Result<ReplicationStats> {
    let params = &cfg.params;
    let policy = cfg.policy;
    let with_beliefs = policy.needs_beliefs();
    let is_ghat = policy == PolicyKind::Ghat;
    let balanced_start = is_ghat && cfg.equal_start();
    let checkpoints = match cfg.mode {
        RunMode::Average => log_checkpoints(cfg.horizon),
        RunMode::Finite => Vec::new(),
    };

    let mut x = match cfg.start {
        InitialState::Fixed(x) => x,
        InitialState::Sample => {
            let mut rng = stream(cfg.seed, rep, StreamId::Initial as u64);
            let x1 = cfg.initial[0].sample(&mut rng);
            [x1, cfg.initial[1].sample(&mut rng)]
        }
    };
    let mut prims = PrimitiveStreams::new(cfg.seed, rep);
    let mut pi: [Pmf; 2] = cfg.initial.clone();
    let mut info = with_beliefs.then(|| CommonInfo::from_prior(&pi, params));
    let idle = CommonInfo::from_pre_decision(Pmf::point(0), Pmf::point(0));

    let mut tr = Tracker {
        t0: None,
        s: None,
        prev_gap: None,
        counts: ViolationCounts::default(),
        first_failure: None,
    };
    let mut total = 0.0;
    let mut checkpoint_costs = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0;

    let wrap = |t: usize| {
        move |e: Error| Error::Replication {
            replication: rep,
            step: t,
            source: Box::new(e),
        }
    };

    for t in 0..=cfg.horizon {
        // Checks on the state at the start of slot t.
        if balanced_start && x[0].abs_diff(x[1]) > 1 {
            tr.counts.balancing += 1;
            tr.fail(t, || format!("unbalanced lengths {x:?}"));
        }
        let pi_bounds = with_beliefs.then(|| support_bounds(&pi[0], &pi[1]));
        if let Some(b) = &pi_bounds {
            if !(0..2).all(|i| pi[i].get(x[i]) > 0.0) {
                tr.counts.containment += 1;
                tr.fail(t, || format!("lengths {x:?} outside belief supports {b:?}"));
            }
        }
        if is_ghat {
            let gap = pi_bounds.as_ref().unwrap().joint.gap();
            if let Some(prev) = tr.prev_gap {
                if gap > prev {
                    tr.counts.gap_increase += 1;
                    if prev == 0 && gap == 1 {
                        tr.counts.gap_reopen += 1;
                    }
                }
            }
            match tr.t0 {
                None if gap <= 1 => tr.t0 = Some(t),
                Some(_) if gap > 1 => {
                    tr.counts.post_t0_gap += 1;
                    tr.fail(t, || format!("support gap {gap} after T0"));
                }
                _ => {}
            }
            tr.prev_gap = Some(gap);
            if let Some(t0) = tr.t0 {
                let sum = x[0] + x[1];
                if t == t0 + 1 {
                    tr.s = Some(sum);
                } else if let Some(s) = tr.s {
                    if s != sum {
                        tr.counts.s_identity += 1;
                        tr.fail(t, || format!("S = {s} but x¹ + x² = {sum}"));
                        tr.s = Some(sum);
                    }
                }
            }
        }
        if t == cfg.horizon {
            break;
        }

        let c = stage_cost(x, &cfg.cost, t);
        total += c;
        let prim = prims.sample(params);
        let xbar = prim.pre_decision(x);
        let decision_info = info.as_ref().unwrap_or(&idle);
        let u = [
            policy.decide(0, xbar[0], decision_info, t),
            policy.decide(1, xbar[1], decision_info, t),
        ];
        let next_x = apply_routing(xbar, u).map_err(wrap(t))?;

        if let Some(inf) = &info {
            for i in 0..2 {
                if inf.pibar[i].get(xbar[i]) <= 0.0 {
                    tr.counts.containment += 1;
                    tr.fail(t, || format!("pre-decision lengths {xbar:?} outside belief supports"));
                    break;
                }
            }
        }

        if let Some(rec) = trace.as_deref_mut() {
            let b = info.as_ref().map(|i| i.bounds.joint);
            rec.push(TraceRecord {
                replication: rep,
                t,
                x1: x[0],
                x2: x[1],
                xbar1: xbar[0],
                xbar2: xbar[1],
                u1: u[0] as u8,
                u2: u[1] as u8,
                a1: prim.arrivals[0] as u8,
                a2: prim.arrivals[1] as u8,
                d1: prim.departures[0] as u8,
                d2: prim.departures[1] as u8,
                lb: b.map(|b| b.lb),
                ub: b.map(|b| b.ub),
                threshold: info.as_ref().map(|i| i.threshold.value()),
                pi_lb: pi_bounds.map(|b| b.joint.lb),
                pi_ub: pi_bounds.map(|b| b.joint.ub),
                cost: c,
            });
        }

        if let Some(inf) = info.take() {
            let post = posterior_beliefs(&inf, u, &policy, t).map_err(wrap(t))?;
            if is_ghat {
                let exact = support_bounds(&post[0], &post[1]).joint;
                let fast: Interval = update_bounds_recursive(&inf.bounds, u, inf.threshold);
                if exact != fast {
                    tr.counts.recursion_mismatch += 1;
                    if t == 0 {
                        tr.counts.recursion_mismatch_initial += 1;
                    }
                }
                if u == [false, false] {
                    let before = pi_bounds.as_ref().unwrap().joint.gap();
                    if exact.gap() > before.div_ceil(2) {
                        tr.counts.halving += 1;
                        tr.fail(t, || {
                            format!("gap {} after holding from gap {before}", exact.gap())
                        });
                    }
                }
                if let Some(s) = tr.s {
                    tr.s = Some(s_next(s, x[0], &prim));
                }
            }
            info = Some(CommonInfo::from_pre_decision(
                propagate_arrivals_departures(&post[0], params),
                propagate_arrivals_departures(&post[1], params),
            ));
            pi = post;
        }
        x = next_x;

        if next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] == t + 1 {
            checkpoint_costs.push(total);
            next_checkpoint += 1;
        }
    }

    Ok(ReplicationStats {
        replication: rep,
        total_cost: total,
        checkpoint_costs,
        t0: tr.t0,
        violations: tr.counts,
        first_failure: tr.first_failure,
    })
}

/// One replication with its full trace.
pub fn run_replication(cfg: &ExperimentConfig, rep: u64) -> Result<(Vec<TraceRecord>, ReplicationStats)> {
    let mut trace = Vec::with_capacity(cfg.horizon);
    let stats = simulate_replication(cfg, rep, Some(&mut trace))?;
    Ok((trace, stats))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct T0Summary {
    pub histogram: BTreeMap<usize, u64>,
    pub censored: u64,
    pub censoring_fraction: f64,
    pub mean_uncensored: Option<f64>,
}

impl T0Summary {
    fn from_values(values: impl Iterator<Item = Option<usize>>) -> Self {
        let mut s = T0Summary::default();
        let mut n = 0u64;
        let mut sum = 0.0;
        let mut count = 0u64;
        for v in values {
            n += 1;
            match v {
                Some(t) => {
                    *s.histogram.entry(t).or_insert(0) += 1;
                    sum += t as f64;
                    count += 1;
                }
                None => s.censored += 1,
            }
        }
        s.censoring_fraction = if n == 0 { 0.0 } else { s.censored as f64 / n as f64 };
        s.mean_uncensored = (count > 0).then(|| sum / count as f64);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunningPoint {
    pub t: usize,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema_version: &'static str,
    pub policy: PolicyKind,
    pub mode: RunMode,
    pub lambda: f64,
    pub mu: f64,
    pub convention: String,
    pub cost: String,
    pub horizon: usize,
    pub replications: u64,
    pub seed: u64,
    /// Mean total cost (finite mode) or mean terminal average cost (average
    /// mode) across replications.
    pub mean_cost: f64,
    pub std_error: f64,
    /// Running average cost, pooled over replications (average mode).
    pub running_average: Vec<RunningPoint>,
    pub terminal_average: Option<f64>,
    /// Largest distance between the running average and its terminal value
    /// over the checkpoints in the second half of the horizon.
    pub tail_max_deviation: Option<f64>,
    pub t0: Option<T0Summary>,
    pub violations: ViolationCounts,
    pub first_failure: Option<FailureSite>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureSite {
    pub replication: u64,
    pub step: usize,
    pub what: String,
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs all replications (in parallel, merged in replication order).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let stats: Vec<ReplicationStats> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| simulate_replication(cfg, rep, None))
        .collect::<Result<_>>()?;
    Ok(summarize(cfg, &stats))
}

pub fn summarize(cfg: &ExperimentConfig, stats: &[ReplicationStats]) -> RunSummary {
    let mut violations = ViolationCounts::default();
    let mut first_failure = None;
    for s in stats {
        violations.add(&s.violations);
        if first_failure.is_none() {
            if let Some((step, what)) = &s.first_failure {
                first_failure = Some(FailureSite {
                    replication: s.replication,
                    step: *step,
                    what: what.clone(),
                });
            }
        }
    }
    let horizon = cfg.horizon as f64;
    let (per_rep, running_average) = match cfg.mode {
        RunMode::Finite => (stats.iter().map(|s| s.total_cost).collect::<Vec<_>>(), Vec::new()),
        RunMode::Average => {
            let points = log_checkpoints(cfg.horizon);
            let running = points
                .iter()
                .enumerate()
                .map(|(k, &t)| RunningPoint {
                    t,
                    average: stats.iter().map(|s| s.checkpoint_costs[k]).sum::<f64>()
                        / (t as f64 * stats.len() as f64),
                })
                .collect();
            (stats.iter().map(|s| s.total_cost / horizon).collect(), running)
        }
    };
    let (mean_cost, std_error) = mean_and_se(&per_rep);
    let terminal_average = running_average.last().map(|p: &RunningPoint| p.average);
    let tail_max_deviation = terminal_average.map(|w| {
        running_average
            .iter()
            .filter(|p| 2 * p.t >= cfg.horizon)
            .map(|p| (p.average - w).abs())
            .fold(0.0, f64::max)
    });
    RunSummary {
        schema_version: SUMMARY_SCHEMA,
        policy: cfg.policy,
        mode: cfg.mode,
        lambda: cfg.params.lambda,
        mu: cfg.params.mu,
        convention: cfg.params.convention.to_string(),
        cost: cfg.cost.to_string(),
        horizon: cfg.horizon,
        replications: cfg.replications,
        seed: cfg.seed,
        mean_cost,
        std_error,
        running_average,
        terminal_average,
        tail_max_deviation,
        t0: (cfg.policy == PolicyKind::Ghat).then(|| T0Summary::from_values(stats.iter().map(|s| s.t0))),
        violations,
        first_failure,
        passed: violations.failing() == 0,
    }
}

/// Empirical law of `T₀`, the first time the joint support gap is at most 1.
pub fn measure_t0(cfg: &ExperimentConfig) -> Result<(T0Summary, ViolationCounts)> {
    if cfg.policy != PolicyKind::Ghat {
        return Err(Error::Config("T0 is defined for the ghat policy only".into()));
    }
    let s = run_experiment(cfg)?;
    Ok((s.t0.unwrap_or_default(), s.violations))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SIdentityCheck {
    pub t0: Option<usize>,
    pub steps_checked: usize,
    pub first_mismatch: Option<usize>,
}

impl SIdentityCheck {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Rebuilds `S_t` from `T₀ + 1` on out of the recorded primitives and checks
/// it against `x¹_t + x²_t` at every later slot. The trace must be one
/// replication of `ĝ`, in time order.
pub fn assert_s_identity(trace: &[TraceRecord]) -> Result<SIdentityCheck> {
    let mut t0 = None;
    for r in trace {
        let gap = r
            .pi_gap()
            .ok_or_else(|| Error::Config("trace carries no belief bounds".into()))?;
        if gap <= 1 {
            t0 = Some(r.t);
            break;
        }
    }
    let mut check = SIdentityCheck {
        t0,
        steps_checked: 0,
        first_mismatch: None,
    };
    let Some(t0) = t0 else {
        return Ok(check);
    };
    let start = trace.iter().position(|r| r.t == t0 + 1);
    let Some(start) = start else {
        return Ok(check);
    };
    let mut s = trace[start].x1 + trace[start].x2;
    for w in trace[start..].windows(2) {
        s = s_next(s, w[0].x1, &w[0].primitives());
        check.steps_checked += 1;
        if s != w[1].x1 + w[1].x2 {
            check.first_mismatch = Some(w[1].t);
            break;
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::InitSpec;
    use crate::model::{CostFn, CostModel, ModelParams};

    fn cfg(l: f64, m: f64, policy: PolicyKind, init: &str, horizon: usize) -> ExperimentConfig {
        ExperimentConfig::new(
            ModelParams::new(l, m).unwrap(),
            policy,
            &InitSpec::parse(init).unwrap(),
            horizon,
        )
    }

    #[test]
    fn s_next_cases() {
        let p = |a1, a2, d1, d2| Primitives::new(a1, a2, d1, d2);
        assert_eq!(s_next(0, 0, &p(true, true, true, true)), 2);
        assert_eq!(s_next(1, 0, &p(false, false, true, false)), 1);
        assert_eq!(s_next(1, 0, &p(false, false, false, true)), 0);
        assert_eq!(s_next(1, 1, &p(false, false, true, true)), 0);
        assert_eq!(s_next(5, 3, &p(true, false, true, true)), 4);
    }

    #[test]
    fn checkpoints() {
        assert_eq!(log_checkpoints(100), vec![1, 2, 5, 10, 20, 50, 100]);
        assert_eq!(log_checkpoints(1), vec![1]);
        assert_eq!(log_checkpoints(30), vec![1, 2, 5, 10, 20, 30]);
    }

    #[test]
    fn frozen_system_routes_both_ways() {
        let c = cfg(0.0, 0.0, PolicyKind::Ghat, "eq:3", 50);
        let (trace, stats) = run_replication(&c, 0).unwrap();
        for r in &trace {
            assert_eq!((r.x1, r.x2, r.u1, r.u2), (3, 3, 1, 1));
            assert_eq!(r.threshold, Some(3.0));
        }
        assert_eq!(stats.t0, Some(0));
        assert_eq!(stats.violations.failing(), 0);
        let s = assert_s_identity(&trace).unwrap();
        assert!(s.passed());
        assert_eq!(s.steps_checked, 48);
    }

    #[test]
    fn equal_start_stays_balanced() {
        let mut c = cfg(0.3, 0.5, PolicyKind::Ghat, "eq:2", 300);
        c.replications = 50;
        let s = run_experiment(&c).unwrap();
        assert_eq!(s.violations.balancing, 0);
        assert!(s.passed);
        assert_eq!(s.t0.unwrap().histogram.get(&0), Some(&50));
    }

    #[test]
    fn single_replication_summary_matches() {
        let c = cfg(0.3, 0.5, PolicyKind::Gtilde, "[[0,0.5,0.5],[0.2,0,0.8]]", 100);
        let (trace, stats) = run_replication(&c, 0).unwrap();
        let sum: f64 = trace.iter().map(|r| r.cost).sum();
        assert_eq!(sum, stats.total_cost);
        let s = run_experiment(&c).unwrap();
        assert_eq!(s.mean_cost, stats.total_cost);
        assert_eq!(s.std_error, 0.0);
    }

    #[test]
    fn traces_are_reproducible() {
        let c = cfg(0.3, 0.5, PolicyKind::Ghat, "[[0,0,0,1],[0,0.9,0,0,0,0.1]]", 200);
        assert_eq!(run_replication(&c, 4).unwrap().0, run_replication(&c, 4).unwrap().0);
        assert_ne!(run_replication(&c, 4).unwrap().0, run_replication(&c, 5).unwrap().0);
    }

    #[test]
    fn trace_is_consistent_with_dynamics() {
        let c = cfg(0.3, 0.5, PolicyKind::Ghat, "[[0,0,0,1],[0,0.9,0,0,0,0.1]]", 300);
        let (trace, _) = run_replication(&c, 1).unwrap();
        for w in trace.windows(2) {
            let xbar = w[0].primitives().pre_decision(w[0].x());
            assert_eq!(xbar, [w[0].xbar1, w[0].xbar2]);
            let next = apply_routing(xbar, [w[0].u1 != 0, w[0].u2 != 0]).unwrap();
            assert_eq!(next, w[1].x());
        }
        for r in &trace {
            let (lb, ub) = (r.lb.unwrap(), r.ub.unwrap());
            assert!(lb <= r.xbar1.min(r.xbar2) && r.xbar1.max(r.xbar2) <= ub);
        }
    }

    #[test]
    fn g0_runs_without_beliefs() {
        let mut c = cfg(0.1, 0.5, PolicyKind::G0, "eq:0", 100);
        c.mode = RunMode::Average;
        let (trace, _) = run_replication(&c, 0).unwrap();
        assert!(trace.iter().all(|r| r.lb.is_none() && r.u1 == 0 && r.u2 == 0));
        assert!(assert_s_identity(&trace).is_err());
        let s = run_experiment(&c).unwrap();
        assert!(s.t0.is_none());
        assert_eq!(s.running_average.last().unwrap().t, 100);
    }

    #[test]
    fn measure_t0_needs_ghat() {
        let c = cfg(0.1, 0.5, PolicyKind::G0, "eq:0", 10);
        assert!(measure_t0(&c).is_err());
    }

    #[test]
    fn finite_mean_is_close_to_exact_cost() {
        use crate::exact::{exact_finite_cost, ExactEvalConfig};
        let init = "[[0,0.5,0.5],[0.2,0,0,0.8]]";
        let mut c = cfg(0.3, 0.5, PolicyKind::Ghat, init, 4);
        c.cost = CostModel::stationary(CostFn::Square);
        c.replications = 20_000;
        c.seed = 17;
        let s = run_experiment(&c).unwrap();
        let e = ExactEvalConfig::new(4, c.params, c.initial.clone(), c.cost.clone()).unwrap();
        let exact = exact_finite_cost(&PolicyKind::Ghat, &e).unwrap();
        assert!((s.mean_cost - exact).abs() < 4.0 * s.std_error, "{} ± {} vs {exact}", s.mean_cost, s.std_error);
    }
}
