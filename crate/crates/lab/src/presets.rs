//! Named configurations for the standard experiments. Each is a config text
//! applied on top of the defaults, before any user config.

use crate::config::{ConfigError, ExperimentConfig};

pub struct Preset {
    pub name: &'static str,
    pub about: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "validation-sweep",
        about: "Roe-5: spectral max Re λ against the marched growth rate over the shock position",
        text: "run.mode = validate\n\
               sweep.problem.epsilon = 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99\n",
    },
    Preset {
        name: "solver-grid",
        about: "verdict of every Riemann solver at every order, shock position 0.1",
        text: "run.mode = sweep\n\
               sweep.scheme.solver = roe, hllc, hll, vanleer\n\
               sweep.scheme.order = 1, 2, 5\n",
    },
    Preset {
        name: "hybrid",
        about: "the two direction-split Roe-5 / van Leer-1 hybrids",
        text: "run.mode = sweep\n\
               sweep.scheme.solver = hybrid1, hybrid2\n",
    },
    Preset {
        name: "entropy-eps",
        about: "Roe-5 max Re λ and entropy increase over the shock position",
        text: "run.mode = sweep\n\
               sweep.problem.epsilon = 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99\n",
    },
    Preset {
        name: "char-vs-prim",
        about:
            "Roe-5 in characteristic against primitive reconstruction over the upstream Mach number",
        text: "run.mode = sweep\n\
               sweep.problem.mach = 5, 10, 15, 20\n\
               sweep.scheme.space = primitive, characteristic\n",
    },
    Preset {
        name: "localization",
        about: "HLL-5 and Roe-5 leading modes with their column profiles",
        text: "run.mode = sweep\n\
               sweep.scheme.solver = roe, hll\n",
    },
    Preset {
        name: "near-shock-cap",
        about: "HLL-5 with each near-shock order cap",
        text: "run.mode = sweep\n\
               scheme.solver = hll\n\
               sweep.scheme.cap = none, first, second, smoothest-third\n",
    },
];

pub fn find(name: &str) -> Result<&'static Preset, ConfigError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

/// Defaults with the named preset applied.
pub fn load(name: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::parse(find(name)?.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            let cfg = load(p.name).unwrap();
            assert!(!cfg.points().is_empty(), "{}", p.name);
        }
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(load("nope"), Err(ConfigError::UnknownPreset(_))));
    }

    #[test]
    fn solver_grid_has_twelve_points() {
        assert_eq!(load("solver-grid").unwrap().points().len(), 12);
    }
}
