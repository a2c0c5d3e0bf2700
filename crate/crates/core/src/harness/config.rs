use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::belief::Pmf;
use crate::error::{Error, Result};
use crate::model::{Convention, CostModel, ModelParams};
use crate::policy::PolicyKind;

/// Largest initial support point accepted by default.
pub const DEFAULT_MAX_SUPPORT: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

/// Finite horizon: total cost per replication. Average: running average cost
/// per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    Finite,
    Average,
}

impl FromStr for RunMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite" => Ok(RunMode::Finite),
            "average" => Ok(RunMode::Average),
            _ => Err(Error::Config(format!("unknown mode `{s}` (expected finite or average)"))),
        }
    }
}

/// How the true lengths at time 0 are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialState {
    /// Independent draws from the initial beliefs.
    Sample,
    Fixed([u32; 2]),
}

/// Parsed `--init` value.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// `eq:x0`: both queues start at `x0`, which both controllers know.
    Equal(u32),
    Beliefs { pi: [Pmf; 2], x0: Option<[u32; 2]> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InitJson {
    Pair([Pmf; 2]),
    Named {
        pi1: Pmf,
        pi2: Pmf,
        #[serde(default)]
        x0: Option<[u32; 2]>,
    },
}

impl InitSpec {
    /// Accepts `eq:<x0>`, an inline JSON document or the path of a JSON file.
    /// The JSON is either `[[p0, p1, …], [q0, q1, …]]` or
    /// `{"pi1": [...], "pi2": [...], "x0": [a, b]}` with `x0` optional.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(x) = s.strip_prefix("eq:") {
            let x0 = x
                .trim()
                .parse()
                .map_err(|e| Error::Config(format!("bad initial length `{x}`: {e}")))?;
            return Ok(InitSpec::Equal(x0));
        }
        let text = if s.starts_with('[') || s.starts_with('{') {
            s.to_string()
        } else {
            std::fs::read_to_string(Path::new(s))
                .map_err(|e| Error::Config(format!("cannot read init file `{s}`: {e}")))?
        };
        let parsed: InitJson = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad init document: {e}")))?;
        Ok(match parsed {
            InitJson::Pair(pi) => InitSpec::Beliefs { pi, x0: None },
            InitJson::Named { pi1, pi2, x0 } => InitSpec::Beliefs { pi: [pi1, pi2], x0 },
        })
    }

    pub fn beliefs(&self) -> [Pmf; 2] {
        match self {
            InitSpec::Equal(x) => [Pmf::point(*x), Pmf::point(*x)],
            InitSpec::Beliefs { pi, .. } => pi.clone(),
        }
    }

    pub fn start(&self) -> InitialState {
        match self {
            InitSpec::Equal(x) => InitialState::Fixed([*x, *x]),
            InitSpec::Beliefs { x0: Some(x), .. } => InitialState::Fixed(*x),
            InitSpec::Beliefs { x0: None, .. } => InitialState::Sample,
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Equal(x) => write!(f, "eq:{x}"),
            InitSpec::Beliefs { pi, x0 } => {
                let pi1: Vec<f64> = pi[0].clone().into();
                let pi2: Vec<f64> = pi[1].clone().into();
                let mut v = serde_json::json!({ "pi1": pi1, "pi2": pi2 });
                if let Some(x) = x0 {
                    v["x0"] = serde_json::json!(x);
                }
                write!(f, "{v}")
            }
        }
    }
}

/// Settings as read from a flat key-value file or the command line; every
/// field is optional so that sources can be layered.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigValues {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub policy: Option<String>,
    pub horizon: Option<usize>,
    pub replications: Option<u64>,
    pub seed: Option<u64>,
    pub cost: Option<String>,
    pub init: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub convention: Option<String>,
    pub mode: Option<String>,
    pub max_support: Option<u32>,
}

impl ConfigValues {
    /// Reads `key = value` lines (TOML syntax, no tables).
    pub fn from_flat_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
        Self::from_flat_str(&text)
    }

    pub fn from_flat_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: ConfigValues) -> ConfigValues {
        ConfigValues {
            lambda: over.lambda.or(self.lambda),
            mu: over.mu.or(self.mu),
            policy: over.policy.or(self.policy),
            horizon: over.horizon.or(self.horizon),
            replications: over.replications.or(self.replications),
            seed: over.seed.or(self.seed),
            cost: over.cost.or(self.cost),
            init: over.init.or(self.init),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            convention: over.convention.or(self.convention),
            mode: over.mode.or(self.mode),
            max_support: over.max_support.or(self.max_support),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let lambda = self.lambda.ok_or_else(|| Error::Config("missing lambda".into()))?;
        let mu = self.mu.ok_or_else(|| Error::Config("missing mu".into()))?;
        let convention = match &self.convention {
            Some(c) => c.parse()?,
            None => Convention::default(),
        };
        ModelParams::with_convention(lambda, mu, convention)
    }

    pub fn build(&self) -> Result<ExperimentConfig> {
        let init = InitSpec::parse(self.init.as_deref().unwrap_or("eq:0"))?;
        let cfg = ExperimentConfig {
            params: self.params()?,
            policy: self.policy.as_deref().unwrap_or("ghat").parse()?,
            initial: init.beliefs(),
            start: init.start(),
            horizon: self.horizon.unwrap_or(1000),
            replications: self.replications.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            cost: self.cost.as_deref().unwrap_or("linear").parse()?,
            mode: self.mode.as_deref().unwrap_or("finite").parse()?,
            max_support: self.max_support.unwrap_or(DEFAULT_MAX_SUPPORT),
            out: self.out.clone(),
            format: self.format.as_deref().unwrap_or("json").parse()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub policy: PolicyKind,
    pub initial: [Pmf; 2],
    pub start: InitialState,
    pub horizon: usize,
    pub replications: u64,
    pub seed: u64,
    pub cost: CostModel,
    pub mode: RunMode,
    pub max_support: u32,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, policy: PolicyKind, init: &InitSpec, horizon: usize) -> Self {
        ExperimentConfig {
            params,
            policy,
            initial: init.beliefs(),
            start: init.start(),
            horizon,
            replications: 1,
            seed: 0,
            cost: CostModel::stationary(crate::model::CostFn::Linear),
            mode: RunMode::Finite,
            max_support: DEFAULT_MAX_SUPPORT,
            out: None,
            format: OutputFormat::Json,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        for (i, p) in self.initial.iter().enumerate() {
            p.check()?;
            if p.max_support() > self.max_support {
                return Err(Error::Config(format!(
                    "initial belief {} reaches {} beyond the support limit {}",
                    i + 1,
                    p.max_support(),
                    self.max_support
                )));
            }
        }
        if let InitialState::Fixed(x) = self.start {
            for (i, (pi, &xi)) in self.initial.iter().zip(&x).enumerate() {
                if pi.get(xi) <= 0.0 {
                    return Err(Error::Config(format!(
                        "initial length {xi} of queue {} is outside its belief's support",
                        i + 1
                    )));
                }
            }
        }
        self.cost.validate(crate::model::DEFAULT_VALIDATION_RANGE)
    }

    /// Both queues start at the same known length.
    pub fn equal_start(&self) -> bool {
        matches!(self.start, InitialState::Fixed([a, b]) if a == b)
            && self.initial[0].is_point()
            && self.initial[1].is_point()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_forms() {
        assert_eq!(InitSpec::parse("eq:3").unwrap(), InitSpec::Equal(3));
        let pair = InitSpec::parse("[[0,0,0,1],[0,0.9,0,0,0,0.1]]").unwrap();
        assert_eq!(pair.beliefs()[1], Pmf::from_pairs(&[(1, 0.9), (5, 0.1)]).unwrap());
        assert_eq!(pair.start(), InitialState::Sample);
        let named = InitSpec::parse(r#"{"pi1":[0,1],"pi2":[0.5,0.5],"x0":[1,0]}"#).unwrap();
        assert_eq!(named.start(), InitialState::Fixed([1, 0]));
        assert_eq!(InitSpec::parse(&named.to_string()).unwrap(), named);
        assert!(InitSpec::parse("eq:-1").is_err());
        assert!(InitSpec::parse("[[0.5]]").is_err());
        assert!(InitSpec::parse("/no/such/file.json").is_err());
    }

    #[test]
    fn flat_file_and_overrides() {
        let file = ConfigValues::from_flat_str(
            "lambda = 0.1\nmu = 0.5\npolicy = \"g0\"\nhorizon = 20\ncost = \"square\"\n",
        )
        .unwrap();
        let cli = ConfigValues {
            policy: Some("ghat".into()),
            seed: Some(7),
            ..Default::default()
        };
        let cfg = file.overridden_by(cli).build().unwrap();
        assert_eq!(cfg.policy, PolicyKind::Ghat);
        assert_eq!(cfg.horizon, 20);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.cost.to_string(), "square");
        assert!(cfg.equal_start());
        assert!(ConfigValues::from_flat_str("lamda = 0.1").is_err());
        assert!(ConfigValues::from_flat_str("[table]\nx = 1").is_err());
    }

    #[test]
    fn validation() {
        let base = ConfigValues {
            lambda: Some(0.1),
            mu: Some(0.5),
            ..Default::default()
        };
        assert!(ConfigValues { replications: Some(0), ..base.clone() }.build().is_err());
        assert!(ConfigValues { lambda: None, ..base.clone() }.build().is_err());
        assert!(ConfigValues {
            init: Some(r#"{"pi1":[0,1],"pi2":[1],"x0":[0,0]}"#.into()),
            ..base.clone()
        }
        .build()
        .is_err());
        assert!(ConfigValues {
            init: Some("eq:20".into()),
            max_support: Some(10),
            ..base.clone()
        }
        .build()
        .is_err());
        assert!(ConfigValues {
            convention: Some("exclusive".into()),
            mu: Some(0.95),
            ..base
        }
        .build()
        .is_err());
    }
}
