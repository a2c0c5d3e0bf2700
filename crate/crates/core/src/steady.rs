//! Average-cost analysis.
//!
//! Under `ĝ` the total number of customers `S_t` is a Markov chain once the
//! bounds have met: the customers are split as evenly as possible, so from
//! `s` the next total has the law of one slot of both queues started at
//! `(⌈s/2⌉, ⌊s/2⌋)`. Under `g₀` each queue is an independent birth-death
//! chain. Both chains are truncated at `cap`; mass that would leave
//! `{0, …, cap}` is put on `cap` and recorded.

use serde::Serialize;

use crate::belief::Pmf;
use crate::error::{Error, Result};
use crate::model::{step_queue, CostFn, CostModel, ModelParams};

pub const DEFAULT_CAP: usize = 500;
/// Largest truncated chain solved by elimination; longer chains use power
/// iteration.
pub const DIRECT_SOLVE_MAX: usize = 2000;
pub const DEFAULT_TAIL_BOUND: f64 = 1e-12;
const POWER_ITERATIONS: usize = 5_000_000;
const RESIDUAL_TARGET: f64 = 1e-12;
const RESIDUAL_CHECK: f64 = 1e-10;

/// One row of a banded transition kernel: `P(s, start + k) = probs[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub start: usize,
    pub probs: Vec<f64>,
}

impl Row {
    pub fn get(&self, j: usize) -> f64 {
        j.checked_sub(self.start)
            .and_then(|k| self.probs.get(k))
            .copied()
            .unwrap_or(0.0)
    }

    fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(k, &p)| (self.start + k, p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub cap: usize,
    pub rows: Vec<Row>,
    /// Mass of each row that was folded onto `cap`.
    pub reflected: Vec<f64>,
}

impl ChainSpec {
    /// Builds the chain on `{0, …, cap}` from the untruncated law of the
    /// next state.
    pub fn from_kernel(cap: usize, law: impl Fn(usize) -> Vec<(usize, f64)>) -> Self {
        let mut rows = Vec::with_capacity(cap + 1);
        let mut reflected = Vec::with_capacity(cap + 1);
        for s in 0..=cap {
            let mut entries: Vec<(usize, f64)> = Vec::new();
            let mut spill = 0.0;
            for (j, p) in law(s) {
                if j > cap {
                    spill += p;
                }
                let j = j.min(cap);
                match entries.iter_mut().find(|(k, _)| *k == j) {
                    Some(e) => e.1 += p,
                    None => entries.push((j, p)),
                }
            }
            let lo = entries.iter().map(|e| e.0).min().unwrap_or(s);
            let hi = entries.iter().map(|e| e.0).max().unwrap_or(s);
            let mut probs = vec![0.0; hi - lo + 1];
            for (j, p) in entries {
                probs[j - lo] += p;
            }
            rows.push(Row { start: lo, probs });
            reflected.push(spill);
        }
        ChainSpec {
            cap,
            rows,
            reflected,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn check_rows(&self) -> Result<()> {
        for (s, r) in self.rows.iter().enumerate() {
            let total: f64 = r.probs.iter().sum();
            if (total - 1.0).abs() > 1e-12 || r.probs.iter().any(|p| *p < 0.0) {
                return Err(Error::InvalidPmf(format!("row {s} sums to {total}")));
            }
        }
        Ok(())
    }

    /// `E[s' − s | s]`.
    pub fn drift(&self, s: usize) -> f64 {
        self.rows[s]
            .entries()
            .map(|(j, p)| p * (j as f64 - s as f64))
            .sum()
    }

    /// `‖πP − π‖₁`.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let next = self.apply(pi);
        next.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Probability per step, under `pi`, of a transition cut by the cap.
    pub fn tail_mass(&self, pi: &[f64]) -> f64 {
        pi.iter().zip(&self.reflected).map(|(p, r)| p * r).sum()
    }

    fn apply(&self, pi: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; self.len()];
        for (s, row) in self.rows.iter().enumerate() {
            let w = pi.get(s).copied().unwrap_or(0.0);
            if w == 0.0 {
                continue;
            }
            for (j, p) in row.entries() {
                next[j] += w * p;
            }
        }
        next
    }

    /// Every state must be able to reach 0, so that there is a single
    /// closed class and the stationary law is unique.
    fn check_reaches_zero(&self) -> Result<()> {
        let n = self.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (s, row) in self.rows.iter().enumerate() {
            for (j, p) in row.entries() {
                if p > 0.0 && j != s {
                    preds[j].push(s);
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(j) = stack.pop() {
            for &s in &preds[j] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        match seen.iter().position(|v| !v) {
            Some(state) => Err(Error::Reducible { state }),
            None => Ok(()),
        }
    }
}

/// Law of one slot of a single queue started at `x`.
fn queue_step(params: &ModelParams, x: u32) -> Vec<(usize, f64)> {
    params
        .queue_outcomes()
        .map(|o| (step_queue(x, o.departure, o.arrival) as usize, o.prob))
        .collect()
}

/// Kernel of the total number of customers under `ĝ` once the queues are
/// balanced.
pub fn build_s_chain(params: &ModelParams, cap: usize) -> Result<ChainSpec> {
    params.require_stable()?;
    let chain = ChainSpec::from_kernel(cap, |s| {
        let hi = s.div_ceil(2) as u32;
        let lo = (s / 2) as u32;
        let mut out = Vec::new();
        for (a, p) in queue_step(params, hi) {
            for (b, q) in queue_step(params, lo) {
                out.push((a + b, p * q));
            }
        }
        out
    });
    Ok(chain)
}

/// Kernel of one queue that never routes.
pub fn build_single_queue_chain(params: &ModelParams, cap: usize) -> Result<ChainSpec> {
    params.require_stable()?;
    Ok(ChainSpec::from_kernel(cap, |x| queue_step(params, x as u32)))
}

/// The stationary law of the truncated chain.
pub fn stationary_distribution(chain: &ChainSpec) -> Result<Pmf> {
    chain.check_rows()?;
    chain.check_reaches_zero()?;
    let pi = if chain.len() <= DIRECT_SOLVE_MAX + 1 {
        solve_gth(chain)?
    } else {
        solve_power(chain)?
    };
    let residual = chain.residual(&pi);
    if residual.is_nan() || residual > RESIDUAL_CHECK {
        return Err(Error::Convergence {
            iterations: 0,
            residual,
        });
    }
    Pmf::new(pi)
}

/// Grassmann–Taksar–Heyman elimination, restricted to the band of the
/// kernel (elimination creates no fill-in outside it).
fn solve_gth(chain: &ChainSpec) -> Result<Vec<f64>> {
    let n = chain.len();
    let below = chain
        .rows
        .iter()
        .enumerate()
        .map(|(s, r)| s.saturating_sub(r.start))
        .max()
        .unwrap_or(0);
    let above = chain
        .rows
        .iter()
        .enumerate()
        .map(|(s, r)| (r.start + r.probs.len() - 1).saturating_sub(s))
        .max()
        .unwrap_or(0);
    // band[i][k] = P(i, i − below + k)
    let width = below + above + 1;
    let mut band = vec![vec![0.0; width]; n];
    for (i, row) in chain.rows.iter().enumerate() {
        for (j, p) in row.entries() {
            band[i][j + below - i] = p;
        }
    }
    let at = |band: &Vec<Vec<f64>>, i: usize, j: usize| -> f64 {
        if j + below < i || j > i + above {
            0.0
        } else {
            band[i][j + below - i]
        }
    };
    for k in (1..n).rev() {
        let lo = k.saturating_sub(below);
        let s: f64 = (lo..k).map(|j| at(&band, k, j)).sum();
        if s <= 0.0 {
            return Err(Error::Reducible { state: k });
        }
        let rows = k.saturating_sub(above)..k;
        for i in rows.clone() {
            band[i][k + below - i] /= s;
        }
        for i in rows {
            let pik = band[i][k + below - i];
            if pik == 0.0 {
                continue;
            }
            for j in lo..k {
                let pkj = at(&band, k, j);
                if pkj != 0.0 {
                    band[i][j + below - i] += pik * pkj;
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        pi[k] = (k.saturating_sub(above)..k).map(|i| pi[i] * at(&band, i, k)).sum();
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(pi)
}

fn solve_power(chain: &ChainSpec) -> Result<Vec<f64>> {
    let n = chain.len();
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_ITERATIONS {
        let next = chain.apply(&pi);
        residual = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if residual <= RESIDUAL_TARGET {
            let total: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|p| *p /= total);
            return Ok(pi);
        }
    }
    Err(Error::Convergence {
        iterations: POWER_ITERATIONS,
        residual,
    })
}

/// `Σ_s π(s) f(s)`, refusing sums whose last quarter still carries weight.
fn checked_expectation(pi: &Pmf, cap: usize, f: impl Fn(usize) -> f64) -> Result<f64> {
    let mut total = 0.0;
    let mut tail = 0.0;
    let from = cap - cap / 4;
    for (s, p) in pi.support() {
        let v = p * f(s as usize);
        total += v;
        if s as usize >= from {
            tail += v;
        }
    }
    if !total.is_finite() || tail > 1e-9 * total.abs().max(1.0) {
        return Err(Error::DivergingCost { cap, tail });
    }
    Ok(total)
}

fn check_tail(chain: &ChainSpec, pi: &Pmf, bound: f64) -> Result<f64> {
    let tail = chain.tail_mass(pi.probs());
    if tail > bound {
        return Err(Error::TailMass {
            cap: chain.cap,
            tail,
            bound,
        });
    }
    Ok(tail)
}

/// Average cost per slot under `ĝ`: `Σ_s π(s) (c(⌊s/2⌋) + c(⌈s/2⌉))`.
///
/// Requires the average cost under `g₀` to be finite as well.
pub fn infinite_cost_ghat(params: &ModelParams, cost: &CostModel, cap: usize) -> Result<f64> {
    Ok(steady_report(params, cost, cap)?.j_ghat)
}

/// Average cost per slot under `g₀`: `2 Σ_x π(x) c(x)` for the single
/// uncontrolled queue.
pub fn infinite_cost_g0(params: &ModelParams, cost: &CostModel, cap: usize) -> Result<f64> {
    Ok(g0_part(params, cost.terminal(), cap)?.0)
}

fn g0_part(params: &ModelParams, c: &CostFn, cap: usize) -> Result<(f64, f64)> {
    let chain = build_single_queue_chain(params, cap)?;
    let pi = stationary_distribution(&chain)?;
    let tail = check_tail(&chain, &pi, DEFAULT_TAIL_BOUND)?;
    let j = 2.0 * checked_expectation(&pi, cap, |x| c.eval(x as u32))?;
    Ok((j, tail))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyReport {
    pub lambda: f64,
    pub mu: f64,
    pub convention: String,
    pub cost_name: String,
    pub j_ghat: f64,
    pub j_g0: f64,
    pub cap: usize,
    /// Larger of the two chains' per-step truncation probabilities.
    pub tail_mass: f64,
}

pub fn steady_report(params: &ModelParams, cost: &CostModel, cap: usize) -> Result<SteadyReport> {
    let c = cost.terminal();
    let (j_g0, tail_g0) = g0_part(params, c, cap)?;
    let chain = build_s_chain(params, cap)?;
    let pi = stationary_distribution(&chain)?;
    let tail = check_tail(&chain, &pi, DEFAULT_TAIL_BOUND)?;
    let j_ghat = checked_expectation(&pi, cap, |s| {
        c.eval((s / 2) as u32) + c.eval(s.div_ceil(2) as u32)
    })?;
    Ok(SteadyReport {
        lambda: params.lambda,
        mu: params.mu,
        convention: params.convention.to_string(),
        cost_name: c.to_string(),
        j_ghat,
        j_g0,
        cap,
        tail_mass: tail.max(tail_g0),
    })
}
