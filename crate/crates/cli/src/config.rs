//! Flat `key = value` configuration shared by every subcommand.
//!
//! Values come from an optional config file, then command-line flags (flags
//! win), then defaults. `AP_OUTDIR` supplies `output.dir` when neither sets it.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use ap_staggered::scenarios::{ScenarioKind, DEFAULT_DIRECTIONS};

use crate::error::CliError;

/// A config key and its flag spelling.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub flag: &'static str,
}

pub const KEYS: &[KeySpec] = &[
    KeySpec { key: "scenario", flag: "scenario" },
    KeySpec { key: "grid.n", flag: "n" },
    KeySpec { key: "physics.epsilon", flag: "epsilon" },
    KeySpec { key: "time.t_final", flag: "t-final" },
    KeySpec { key: "time.safety", flag: "safety" },
    KeySpec { key: "relaxation.phi", flag: "phi" },
    KeySpec { key: "angular.n_points", flag: "n-points" },
    KeySpec { key: "output.dir", flag: "out-dir" },
    KeySpec { key: "output.snapshot_times", flag: "snapshot-times" },
    KeySpec { key: "run.growth_limit", flag: "growth-limit" },
    KeySpec { key: "geometry.layout", flag: "layout" },
    KeySpec { key: "converge.n_list", flag: "n-list" },
    KeySpec { key: "converge.epsilon_list", flag: "epsilon-list" },
    KeySpec { key: "converge.reference_n", flag: "reference-n" },
    KeySpec { key: "stability.epsilon_list", flag: "stab-epsilons" },
    KeySpec { key: "stability.h_list", flag: "stab-h" },
    KeySpec { key: "stability.sigma_s_list", flag: "stab-sigma-s" },
    KeySpec { key: "stability.sigma_a_list", flag: "stab-sigma-a" },
    KeySpec { key: "stability.phi_rule", flag: "phi-rule" },
    KeySpec { key: "stability.theta_points", flag: "theta-points" },
];

fn lookup(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

/// Where a raw value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line { path: String, line: usize },
    Flag(&'static str),
    Env(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line { path, line } => write!(f, "{path}:{line}"),
            Origin::Flag(flag) => write!(f, "flag --{flag}"),
            Origin::Env(var) => write!(f, "environment variable {var}"),
        }
    }
}

/// Unresolved string values by key.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<&'static str, (String, Origin)>,
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, path: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let origin = Origin::Line {
                path: path.to_string(),
                line: n + 1,
            };
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(CliError::Config(format!("{origin}: expected `key = value`")));
            };
            let key = key.trim();
            let Some(spec) = lookup(key) else {
                return Err(CliError::Config(format!("{origin}: unknown key {key:?}")));
            };
            if raw.entries.contains_key(spec.key) {
                return Err(CliError::Config(format!("{origin}: duplicate key {key:?}")));
            }
            raw.entries.insert(spec.key, (value.trim().to_string(), origin));
        }
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>, origin: Origin) {
        let spec = lookup(key).unwrap_or_else(|| panic!("unregistered key {key}"));
        self.entries.insert(spec.key, (value.into(), origin));
    }

    /// Sets `key` from its flag when the flag was given.
    pub fn set_flag(&mut self, key: &str, value: Option<&String>) {
        if let Some(v) = value {
            let spec = lookup(key).unwrap_or_else(|| panic!("unregistered key {key}"));
            self.set(key, v.clone(), Origin::Flag(spec.flag));
        }
    }

    fn get(&self, key: &str) -> Option<&(String, Origin)> {
        self.entries.get(key)
    }

    fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((v, origin)) => v.parse().map(Some).map_err(|e| {
                CliError::Config(format!("{origin}: {key} = {v:?}: {e}"))
            }),
        }
    }

    /// `none` maps to `Some(None)`.
    fn parse_optional<T: FromStr>(&self, key: &str) -> Result<Option<Option<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            Some((v, _)) if v.eq_ignore_ascii_case("none") => Ok(Some(None)),
            _ => Ok(self.parse_value(key)?.map(Some)),
        }
    }

    fn parse_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((v, origin)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|e| {
                        CliError::Config(format!("{origin}: {key}: item {s:?}: {e}"))
                    })
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    fn origin_of(&self, key: &str) -> String {
        self.get(key)
            .map(|(_, o)| o.to_string())
            .unwrap_or_else(|| "default".to_string())
    }
}

/// Relaxation parameter used by the stability sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiRule {
    /// The largest value allowed by the stability condition.
    Stable,
    /// `1/ε²`.
    Max,
}

impl FromStr for PhiRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stable" => Ok(PhiRule::Stable),
            "max" => Ok(PhiRule::Max),
            _ => Err("expected `stable` or `max`".into()),
        }
    }
}

impl fmt::Display for PhiRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhiRule::Stable => "stable",
            PhiRule::Max => "max",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub epsilon_list: Vec<f64>,
    pub h_list: Vec<f64>,
    pub sigma_s_list: Vec<f64>,
    pub sigma_a_list: Vec<f64>,
    pub phi_rule: PhiRule,
    pub theta_points: usize,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub n: usize,
    pub epsilon: f64,
    pub t_final: f64,
    pub safety: f64,
    pub phi: Option<f64>,
    pub n_points: usize,
    pub out_dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    /// Abort when `max|ρ|` exceeds this multiple of its initial value.
    pub growth_limit: Option<f64>,
    pub layout: Option<PathBuf>,
    pub n_list: Vec<usize>,
    pub epsilon_list: Vec<f64>,
    pub reference_n: Option<usize>,
    pub stability: StabilityConfig,
}

fn join<T: fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn opt<T: fmt::Debug>(v: &Option<T>) -> String {
    v.as_ref().map(|x| format!("{x:?}")).unwrap_or_else(|| "none".into())
}

impl RunConfig {
    /// Applies defaults and checks invariants. `env_out_dir` is the value of
    /// `AP_OUTDIR`, if set.
    pub fn resolve(raw: &RawConfig, env_out_dir: Option<String>) -> Result<Self, CliError> {
        let scenario: ScenarioKind = raw
            .parse_value::<String>("scenario")?
            .map(|s| {
                s.parse().map_err(|e: ap_staggered::Error| {
                    CliError::Config(format!("{}: {e}", raw.origin_of("scenario")))
                })
            })
            .transpose()?
            .unwrap_or(ScenarioKind::Gauss);
        let base = scenario.build();
        let n = raw.parse_value("grid.n")?.unwrap_or(base.default_n);
        let epsilon = raw.parse_value("physics.epsilon")?.unwrap_or(base.epsilon);
        let t_final = raw.parse_value("time.t_final")?.unwrap_or(base.t_final);
        let mut raw = raw.clone();
        if raw.get("output.dir").is_none() {
            if let Some(dir) = env_out_dir.filter(|d| !d.is_empty()) {
                raw.set("output.dir", dir, Origin::Env("AP_OUTDIR"));
            }
        }
        let cfg = RunConfig {
            scenario,
            n,
            epsilon,
            t_final,
            safety: raw.parse_value("time.safety")?.unwrap_or(0.9),
            phi: raw.parse_optional("relaxation.phi")?.unwrap_or(None),
            n_points: raw.parse_value("angular.n_points")?.unwrap_or(DEFAULT_DIRECTIONS),
            out_dir: raw
                .parse_value::<String>("output.dir")?
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(".")),
            snapshot_times: raw.parse_list("output.snapshot_times")?.unwrap_or_default(),
            growth_limit: raw.parse_optional("run.growth_limit")?.unwrap_or(Some(1e6)),
            layout: raw
                .parse_optional::<String>("geometry.layout")?
                .unwrap_or(None)
                .map(PathBuf::from),
            n_list: raw.parse_list("converge.n_list")?.unwrap_or_else(|| vec![16, 32, 64]),
            epsilon_list: raw.parse_list("converge.epsilon_list")?.unwrap_or_else(|| vec![epsilon]),
            reference_n: raw.parse_optional("converge.reference_n")?.unwrap_or(None),
            stability: StabilityConfig {
                epsilon_list: raw.parse_list("stability.epsilon_list")?.unwrap_or_else(|| vec![epsilon]),
                h_list: raw
                    .parse_list("stability.h_list")?
                    .unwrap_or_else(|| vec![base.side / n.max(1) as f64]),
                sigma_s_list: raw.parse_list("stability.sigma_s_list")?.unwrap_or_else(|| vec![1.0]),
                sigma_a_list: raw.parse_list("stability.sigma_a_list")?.unwrap_or_else(|| vec![0.0]),
                phi_rule: raw.parse_value("stability.phi_rule")?.unwrap_or(PhiRule::Stable),
                theta_points: raw.parse_value("stability.theta_points")?.unwrap_or(256),
            },
        };
        cfg.validate(&raw)?;
        Ok(cfg)
    }

    fn validate(&self, raw: &RawConfig) -> Result<(), CliError> {
        let fail = |key: &str, msg: String| Err(CliError::Config(format!("{}: {key}: {msg}", raw.origin_of(key))));
        if self.n < 2 {
            return fail("grid.n", format!("N must be at least 2 (got {})", self.n));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return fail("physics.epsilon", format!("epsilon must be positive (got {})", self.epsilon));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return fail("time.t_final", format!("t_final must be nonnegative (got {})", self.t_final));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return fail("time.safety", format!("safety must lie in (0, 1] (got {})", self.safety));
        }
        if self.n_points == 0 {
            return fail("angular.n_points", "need at least one direction".into());
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return fail("output.snapshot_times", "times must be sorted".into());
        }
        if let Some(&t) = self.snapshot_times.iter().find(|&&t| !(t >= 0.0 && t <= self.t_final)) {
            return fail("output.snapshot_times", format!("time {t} outside [0, {}]", self.t_final));
        }
        if let Some(g) = self.growth_limit {
            if !(g > 1.0) {
                return fail("run.growth_limit", format!("limit must exceed 1 (got {g})"));
            }
        }
        if self.layout.is_some() && self.scenario != ScenarioKind::TwoMaterial {
            return fail("geometry.layout", "only the two_material scenario takes a layout".into());
        }
        if self.stability.theta_points < 8 {
            return fail("stability.theta_points", "need at least 8 modes".into());
        }
        Ok(())
    }

    /// Every key with its effective value, in registry order.
    pub fn to_text(&self) -> String {
        let s = &self.stability;
        let values = [
            self.scenario.name().to_string(),
            self.n.to_string(),
            format!("{:?}", self.epsilon),
            format!("{:?}", self.t_final),
            format!("{:?}", self.safety),
            opt(&self.phi),
            self.n_points.to_string(),
            self.out_dir.display().to_string(),
            join(&self.snapshot_times),
            opt(&self.growth_limit),
            self.layout
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "none".into()),
            join(&self.n_list),
            join(&self.epsilon_list),
            opt(&self.reference_n),
            join(&s.epsilon_list),
            join(&s.h_list),
            join(&s.sigma_s_list),
            join(&s.sigma_a_list),
            s.phi_rule.to_string(),
            s.theta_points.to_string(),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{} = {v}", k.key);
        }
        out
    }
}
