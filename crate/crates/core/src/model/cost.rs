use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Range of queue lengths on which monotonicity and convexity are checked.
pub const DEFAULT_VALIDATION_RANGE: u32 = 256;

/// Per-queue holding cost drawn from a small registry, so that convexity and
/// monotonicity can be checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostFn {
    Zero,
    Linear,
    Square,
    /// `Σ_k coeffs[k] · x^k`, coefficients non-negative.
    Poly(Vec<f64>),
}

impl CostFn {
    #[inline]
    pub fn eval(&self, x: u32) -> f64 {
        let x = f64::from(x);
        match self {
            CostFn::Zero => 0.0,
            CostFn::Linear => x,
            CostFn::Square => x * x,
            CostFn::Poly(c) => c.iter().rev().fold(0.0, |acc, &k| acc * x + k),
        }
    }

    pub fn validate(&self, range: u32) -> Result<()> {
        if let CostFn::Poly(c) = self {
            if let Some(bad) = c.iter().find(|k| !k.is_finite() || **k < 0.0) {
                return Err(Error::InvalidCost(format!(
                    "polynomial coefficient {bad} must be finite and non-negative"
                )));
            }
        }
        for x in 0..range {
            if self.eval(x + 1) < self.eval(x) {
                return Err(Error::InvalidCost(format!("{self} decreases at {x}")));
            }
            if x >= 1 {
                let lhs = self.eval(x + 1) + self.eval(x - 1);
                let rhs = 2.0 * self.eval(x);
                if lhs < rhs - 1e-9 * rhs.abs().max(1.0) {
                    return Err(Error::InvalidCost(format!("{self} is not convex at {x}")));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for CostFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostFn::Zero => f.write_str("zero"),
            CostFn::Linear => f.write_str("linear"),
            CostFn::Square => f.write_str("square"),
            CostFn::Poly(c) => {
                f.write_str("poly:")?;
                for (i, k) in c.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{k}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for CostFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let cost = match s {
            "zero" => CostFn::Zero,
            "linear" | "identity" => CostFn::Linear,
            "square" => CostFn::Square,
            _ => {
                let coeffs = s
                    .strip_prefix("poly:")
                    .ok_or_else(|| Error::InvalidCost(format!("unknown cost `{s}`")))?;
                let c = coeffs
                    .split(',')
                    .map(|k| {
                        k.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidCost(format!("bad coefficient `{k}`: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                CostFn::Poly(c)
            }
        };
        cost.validate(DEFAULT_VALIDATION_RANGE)?;
        Ok(cost)
    }
}

/// Stage costs `c_0, c_1, …`; the last listed stage repeats forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    stages: Vec<CostFn>,
}

impl CostModel {
    pub fn stationary(c: CostFn) -> Self {
        CostModel { stages: vec![c] }
    }

    pub fn per_stage(stages: Vec<CostFn>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidCost("no stages given".into()));
        }
        let m = CostModel { stages };
        m.validate(DEFAULT_VALIDATION_RANGE)?;
        Ok(m)
    }

    pub fn validate(&self, range: u32) -> Result<()> {
        self.stages.iter().try_for_each(|c| c.validate(range))
    }

    #[inline]
    pub fn stage(&self, t: usize) -> &CostFn {
        &self.stages[t.min(self.stages.len() - 1)]
    }

    /// The cost used from some stage on, for average-cost problems.
    pub fn terminal(&self) -> &CostFn {
        self.stages.last().expect("non-empty by construction")
    }

    pub fn is_stationary(&self) -> bool {
        self.stages.len() == 1
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.stages.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Parses `linear`, `square`, `poly:1,0,2`, or a `/`-separated list of stages
/// such as `zero/square` (stage 0 costs nothing, later stages are squared).
impl FromStr for CostModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let stages = s
            .split('/')
            .map(str::parse)
            .collect::<Result<Vec<CostFn>>>()?;
        CostModel::per_stage(stages)
    }
}
