//! Flat `key = value` experiment configuration with dotted sections.
//!
//! Every key has a default, unknown keys are errors, and [`ExperimentConfig::to_text`]
//! emits the fully resolved configuration in the same format so a run can be
//! reproduced from its summary.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use shockstab_core::reconstruction::ProjectionAverage;
use shockstab_core::shock::{Outflow, SteadyMethod};
use shockstab_core::stability::JacobianMethod;
use shockstab_core::{NearShockCap, Order, SolverKind, VariableSpace, WenoVariant};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analyze,
    March,
    Validate,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSettings {
    pub solver: SolverKind,
    pub order: Order,
    pub weno: WenoVariant,
    pub space: VariableSpace,
    pub cap: NearShockCap,
    pub projection: ProjectionAverage,
    pub delta0: f64,
    /// Last column of the near-shock zone; the first is the shock column.
    pub zone_end: Option<isize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSettings {
    pub mach: f64,
    pub epsilon: f64,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub cfl: f64,
    pub gamma: f64,
    pub shock_column: isize,
    pub steady: SteadyMethod,
    pub outflow: Outflow,
    pub damping: bool,
    pub tolerance: f64,
    pub accept_tolerance: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub mode: Mode,
    pub seed: u64,
    pub end_time: f64,
    pub amplitude: f64,
    pub stop_level: f64,
    pub jacobian: JacobianMethod,
    pub dump_matrix: bool,
    /// Report eigenvector components as primitive perturbations.
    pub primitive_eigvec: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme: SchemeSettings,
    pub problem: ProblemSettings,
    pub run: RunSettings,
    /// Sweep axes in declaration order: a config key and its values. The
    /// points are the Cartesian product, first axis slowest.
    pub sweep: Vec<(String, Vec<String>)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeSettings {
                solver: SolverKind::Roe,
                order: Order::Fifth,
                weno: WenoVariant::Z,
                space: VariableSpace::Primitive,
                cap: NearShockCap::None,
                projection: ProjectionAverage::Arithmetic,
                delta0: 1e-4,
                zone_end: None,
            },
            problem: ProblemSettings {
                mach: 20.0,
                epsilon: 0.1,
                nx: 11,
                ny: 11,
                h: 1.0,
                cfl: 0.1,
                gamma: 1.4,
                shock_column: 6,
                steady: SteadyMethod::MassPinned,
                outflow: Outflow::PinnedPressure,
                damping: true,
                tolerance: 1e-12,
                accept_tolerance: 1e-8,
                max_steps: 200_000,
            },
            run: RunSettings {
                mode: Mode::Analyze,
                seed: 0,
                end_time: 60.0,
                amplitude: 1e-7,
                stop_level: f64::INFINITY,
                jacobian: JacobianMethod::Dual,
                dump_matrix: false,
                primitive_eigvec: true,
            },
            sweep: Vec::new(),
        }
    }
}

/// Every scalar key, in emission order.
pub const KEYS: &[&str] = &[
    "scheme.solver",
    "scheme.order",
    "scheme.weno",
    "scheme.space",
    "scheme.cap",
    "scheme.projection",
    "scheme.delta0",
    "scheme.zone_end",
    "problem.mach",
    "problem.epsilon",
    "problem.nx",
    "problem.ny",
    "problem.h",
    "problem.cfl",
    "problem.gamma",
    "problem.shock_column",
    "problem.steady",
    "problem.outflow",
    "problem.damping",
    "problem.tolerance",
    "problem.accept_tolerance",
    "problem.max_steps",
    "run.mode",
    "run.seed",
    "run.end_time",
    "run.amplitude",
    "run.stop_level",
    "run.jacobian",
    "run.dump_matrix",
    "run.primitive_eigvec",
];

const SWEEP_PREFIX: &str = "sweep.";

fn value_err(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| value_err(key, value, e))
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T, ConfigError> {
    options
        .iter()
        .find(|(name, _)| *name == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            value_err(key, value, format!("expected one of {}", names.join(", ")))
        })
}

fn name_of<T: PartialEq + Copy>(v: &T, options: &[(&'static str, T)]) -> &'static str {
    options
        .iter()
        .find(|(_, o)| o == v)
        .map(|(n, _)| *n)
        .expect("every variant is named")
}

const SOLVERS: &[(&str, SolverKind)] = &[
    ("roe", SolverKind::Roe),
    ("hll", SolverKind::Hll),
    ("hllc", SolverKind::Hllc),
    ("vanleer", SolverKind::VanLeer),
    ("hybrid1", SolverKind::Hybrid1),
    ("hybrid2", SolverKind::Hybrid2),
];
const ORDERS: &[(&str, Order)] = &[
    ("1", Order::First),
    ("2", Order::Second),
    ("5", Order::Fifth),
];
const WENOS: &[(&str, WenoVariant)] = &[
    ("js", WenoVariant::Js),
    ("z", WenoVariant::Z),
    ("linear", WenoVariant::Linear),
];
const SPACES: &[(&str, VariableSpace)] = &[
    ("conservative", VariableSpace::Conservative),
    ("primitive", VariableSpace::Primitive),
    ("characteristic", VariableSpace::Characteristic),
];
const CAPS: &[(&str, NearShockCap)] = &[
    ("none", NearShockCap::None),
    ("first", NearShockCap::First),
    ("second", NearShockCap::Second),
    ("smoothest-third", NearShockCap::SmoothestThird),
];
const PROJECTIONS: &[(&str, ProjectionAverage)] = &[
    ("arithmetic", ProjectionAverage::Arithmetic),
    ("roe", ProjectionAverage::Roe),
];
const STEADY: &[(&str, SteadyMethod)] = &[
    ("mass-pinned", SteadyMethod::MassPinned),
    ("march", SteadyMethod::March),
];
const OUTFLOWS: &[(&str, Outflow)] = &[
    ("pinned-pressure", Outflow::PinnedPressure),
    ("fixed-state", Outflow::FixedState),
];
const MODES: &[(&str, Mode)] = &[
    ("analyze", Mode::Analyze),
    ("march", Mode::March),
    ("validate", Mode::Validate),
    ("sweep", Mode::Sweep),
];
const JACOBIANS: &[(&str, JacobianMethod)] = &[
    ("dual", JacobianMethod::Dual),
    ("central-difference", JacobianMethod::CentralDifference),
];
const BOOLS: &[(&str, bool)] = &[("true", true), ("false", false)];

impl Mode {
    pub fn name(self) -> &'static str {
        name_of(&self, MODES)
    }

    pub fn parse(s: &str) -> Option<Self> {
        MODES.iter().find(|(n, _)| *n == s).map(|(_, m)| *m)
    }
}

impl ExperimentConfig {
    /// Parses a configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped; a key may appear once per text.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = std::collections::HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(a, b)| (a.trim(), b.trim()))
                .filter(|(a, _)| !a.is_empty())
                .ok_or_else(|| ConfigError::Syntax {
                    line: k + 1,
                    text: raw.to_string(),
                })?;
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate(key.to_string()));
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Sets one key. `sweep.<key>` takes a comma-separated list of values
    /// for `<key>` and replaces any earlier axis on the same key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if let Some(target) = key.strip_prefix(SWEEP_PREFIX) {
            if !KEYS.contains(&target) || target == "run.mode" {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            let values: Vec<String> = value
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(value_err(key, value, "empty sweep"));
            }
            let mut probe = self.clone();
            for v in &values {
                probe.set(target, v)?;
            }
            self.sweep.retain(|(k, _)| k != target);
            self.sweep.push((target.to_string(), values));
            return Ok(());
        }
        let s = &mut self.scheme;
        let p = &mut self.problem;
        let r = &mut self.run;
        match key {
            "scheme.solver" => s.solver = choice(key, value, SOLVERS)?,
            "scheme.order" => s.order = choice(key, value, ORDERS)?,
            "scheme.weno" => s.weno = choice(key, value, WENOS)?,
            "scheme.space" => s.space = choice(key, value, SPACES)?,
            "scheme.cap" => s.cap = choice(key, value, CAPS)?,
            "scheme.projection" => s.projection = choice(key, value, PROJECTIONS)?,
            "scheme.delta0" => s.delta0 = positive(key, value)?,
            "scheme.zone_end" => {
                s.zone_end = if value == "none" {
                    None
                } else {
                    Some(number(key, value)?)
                }
            }
            "problem.mach" => p.mach = number(key, value)?,
            "problem.epsilon" => p.epsilon = number(key, value)?,
            "problem.nx" => p.nx = number(key, value)?,
            "problem.ny" => p.ny = number(key, value)?,
            "problem.h" => p.h = positive(key, value)?,
            "problem.cfl" => p.cfl = positive(key, value)?,
            "problem.gamma" => p.gamma = number(key, value)?,
            "problem.shock_column" => p.shock_column = number(key, value)?,
            "problem.steady" => p.steady = choice(key, value, STEADY)?,
            "problem.outflow" => p.outflow = choice(key, value, OUTFLOWS)?,
            "problem.damping" => p.damping = choice(key, value, BOOLS)?,
            "problem.tolerance" => p.tolerance = positive(key, value)?,
            "problem.accept_tolerance" => p.accept_tolerance = positive(key, value)?,
            "problem.max_steps" => p.max_steps = number(key, value)?,
            "run.mode" => r.mode = choice(key, value, MODES)?,
            "run.seed" => r.seed = number(key, value)?,
            "run.end_time" => r.end_time = positive(key, value)?,
            "run.amplitude" => {
                r.amplitude = number(key, value)?;
                if r.amplitude.is_nan() || r.amplitude < 0.0 {
                    return Err(value_err(key, value, "must be non-negative"));
                }
            }
            "run.stop_level" => r.stop_level = positive(key, value)?,
            "run.jacobian" => r.jacobian = choice(key, value, JACOBIANS)?,
            "run.dump_matrix" => r.dump_matrix = choice(key, value, BOOLS)?,
            "run.primitive_eigvec" => r.primitive_eigvec = choice(key, value, BOOLS)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Current value of a scalar key, formatted so that `set` reads it back
    /// exactly.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = &self.scheme;
        let p = &self.problem;
        let r = &self.run;
        Some(match key {
            "scheme.solver" => name_of(&s.solver, SOLVERS).to_string(),
            "scheme.order" => name_of(&s.order, ORDERS).to_string(),
            "scheme.weno" => name_of(&s.weno, WENOS).to_string(),
            "scheme.space" => name_of(&s.space, SPACES).to_string(),
            "scheme.cap" => name_of(&s.cap, CAPS).to_string(),
            "scheme.projection" => name_of(&s.projection, PROJECTIONS).to_string(),
            "scheme.delta0" => s.delta0.to_string(),
            "scheme.zone_end" => s.zone_end.map_or("none".to_string(), |z| z.to_string()),
            "problem.mach" => p.mach.to_string(),
            "problem.epsilon" => p.epsilon.to_string(),
            "problem.nx" => p.nx.to_string(),
            "problem.ny" => p.ny.to_string(),
            "problem.h" => p.h.to_string(),
            "problem.cfl" => p.cfl.to_string(),
            "problem.gamma" => p.gamma.to_string(),
            "problem.shock_column" => p.shock_column.to_string(),
            "problem.steady" => name_of(&p.steady, STEADY).to_string(),
            "problem.outflow" => name_of(&p.outflow, OUTFLOWS).to_string(),
            "problem.damping" => p.damping.to_string(),
            "problem.tolerance" => p.tolerance.to_string(),
            "problem.accept_tolerance" => p.accept_tolerance.to_string(),
            "problem.max_steps" => p.max_steps.to_string(),
            "run.mode" => r.mode.name().to_string(),
            "run.seed" => r.seed.to_string(),
            "run.end_time" => r.end_time.to_string(),
            "run.amplitude" => r.amplitude.to_string(),
            "run.stop_level" => r.stop_level.to_string(),
            "run.jacobian" => name_of(&r.jacobian, JACOBIANS).to_string(),
            "run.dump_matrix" => r.dump_matrix.to_string(),
            "run.primitive_eigvec" => r.primitive_eigvec.to_string(),
            _ => return None,
        })
    }

    /// The fully resolved configuration, one key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(&format!("{key} = {}\n", self.get(key).expect("listed key")));
        }
        for (key, values) in &self.sweep {
            out.push_str(&format!("{SWEEP_PREFIX}{key} = {}\n", values.join(", ")));
        }
        out
    }

    /// One configuration per sweep point, with the axis values that define
    /// it. Without sweep axes this is the configuration itself.
    pub fn points(&self) -> Vec<(Vec<(String, String)>, ExperimentConfig)> {
        let mut points = vec![(
            Vec::new(),
            ExperimentConfig {
                sweep: Vec::new(),
                ..self.clone()
            },
        )];
        for (key, values) in &self.sweep {
            points = points
                .into_iter()
                .flat_map(|(axes, cfg)| {
                    values.iter().map(move |v| {
                        let mut cfg = cfg.clone();
                        cfg.set(key, v).expect("sweep values are validated on set");
                        let mut axes = axes.clone();
                        axes.push((key.clone(), v.clone()));
                        (axes, cfg)
                    })
                })
                .collect();
        }
        points
    }
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = number(key, value)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(value_err(key, value, "must be positive"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn every_key_reads_back() {
        let cfg = ExperimentConfig::default();
        for key in KEYS {
            let v = cfg.get(key).unwrap();
            let mut other = cfg.clone();
            other.set(key, &v).unwrap();
            assert_eq!(other, cfg, "{key}");
        }
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert_eq!(
            ExperimentConfig::parse("scheme.flux = roe"),
            Err(ConfigError::UnknownKey("scheme.flux".into()))
        );
        assert!(matches!(
            ExperimentConfig::parse("problem.mach = 3\nproblem.mach = 4"),
            Err(ConfigError::Duplicate(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("just words"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("scheme.order = 3"),
            Err(ConfigError::Value { .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("sweep.run.mode = analyze"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            ExperimentConfig::parse("sweep.scheme.order = 1, 4"),
            Err(ConfigError::Value { .. })
        ));
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = ExperimentConfig::parse(
            "# header\n  scheme.solver=hll   # trailing\n\nproblem.epsilon = 0.25\n",
        )
        .unwrap();
        assert_eq!(cfg.scheme.solver, SolverKind::Hll);
        assert_eq!(cfg.problem.epsilon, 0.25);
    }

    #[test]
    fn sweep_points_are_a_product() {
        let cfg =
            ExperimentConfig::parse("sweep.scheme.solver = roe, hll\nsweep.scheme.order = 1, 2, 5")
                .unwrap();
        let pts = cfg.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(
            pts[0].0,
            vec![
                ("scheme.solver".to_string(), "roe".to_string()),
                ("scheme.order".into(), "1".into())
            ]
        );
        assert_eq!(pts[5].1.scheme.solver, SolverKind::Hll);
        assert_eq!(pts[5].1.scheme.order, Order::Fifth);
        assert!(pts.iter().all(|(_, c)| c.sweep.is_empty()));
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("problem.epsilon", "0.30000000000000004").unwrap();
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(
            back.problem.epsilon.to_bits(),
            cfg.problem.epsilon.to_bits()
        );
    }
}
