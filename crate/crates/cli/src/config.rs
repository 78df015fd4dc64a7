//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use focksim::schemes::decode_table;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `experiment` field")]
    MissingExperiment,
    #[error("experiment: unknown name `{0}` (run `focksim list`)")]
    UnknownExperiment(String),
    #[error("{key}: not a parameter of `{experiment}`")]
    UnknownKey {
        key: String,
        experiment: &'static str,
    },
    #[error("{key}: {reason}")]
    BadValue { key: String, reason: String },
    #[error("seed: required when `{0}` draws samples")]
    MissingSeed(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Cascade,
    SymmetryDetect,
    PsiTheta,
    GhzCircuit,
    PdcWeights,
    HomodyneSweep,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Count,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

const fn p(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        default,
        help,
    }
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Cascade,
        Experiment::SymmetryDetect,
        Experiment::PsiTheta,
        Experiment::GhzCircuit,
        Experiment::PdcWeights,
        Experiment::HomodyneSweep,
        Experiment::Mixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Cascade => "cascade",
            Experiment::SymmetryDetect => "symmetry-detect",
            Experiment::PsiTheta => "psi-theta",
            Experiment::GhzCircuit => "ghz-circuit",
            Experiment::PdcWeights => "pdc-weights",
            Experiment::HomodyneSweep => "homodyne-sweep",
            Experiment::Mixture => "mixture",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::Cascade => {
                "symmetry-detector cascade, closed form with simulated step probabilities"
            }
            Experiment::SymmetryDetect => "sampled symmetry-detector readouts",
            Experiment::PsiTheta => "six-path state preparation over a θ grid",
            Experiment::GhzCircuit => {
                "GHZ extraction: interval table, exact or sampled frequencies"
            }
            Experiment::PdcWeights => "truncated two-mode squeezed emission weights",
            Experiment::HomodyneSweep => "homodyne density and corrected fidelity along x",
            Experiment::Mixture => "six-photon multi-window mixture weights",
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        use Kind::*;
        match self {
            Experiment::Cascade => {
                const P: &[ParamSpec] = &[
                    p(
                        "m0",
                        Real,
                        "0",
                        "initial |3,0;0,3⟩ coefficient (rescaled to m²+n² = 1/2)",
                    ),
                    p("n0", Real, "0.70710678", "initial |1,2;2,1⟩ coefficient"),
                    p("k", Count, "10", "number of detector passes (≤ 30)"),
                    p("alpha", Real, "1000", "probe amplitude"),
                    p("theta", Real, "0.1", "Kerr phase"),
                ];
                P
            }
            Experiment::SymmetryDetect => {
                const P: &[ParamSpec] = &[
                    p("m0", Real, "0.5", "input |3,0;0,3⟩ coefficient"),
                    p("n0", Real, "0.5", "input |1,2;2,1⟩ coefficient"),
                    p("alpha", Real, "1000", "probe amplitude"),
                    p("theta", Real, "0.1", "Kerr phase"),
                    p("samples", Count, "1000", "number of readouts"),
                ];
                P
            }
            Experiment::PsiTheta => {
                const P: &[ParamSpec] = &[
                    p("points", Count, "20", "grid points"),
                    p("theta_min", Real, "0", "first grid angle"),
                    p("theta_max", Real, "1.5707963267948966", "last grid angle"),
                ];
                P
            }
            Experiment::GhzCircuit => {
                const P: &[ParamSpec] = &[
                    p("alpha", Real, "1000", "probe amplitude"),
                    p("theta", Real, "0.1", "Kerr phase (≤ π/12)"),
                    p(
                        "samples",
                        Count,
                        "0",
                        "readouts to draw; 0 reports exact interval masses",
                    ),
                ];
                P
            }
            Experiment::PdcWeights => {
                const P: &[ParamSpec] = &[
                    p("tau", Real, "0.1", "interaction parameter"),
                    p("n_max", Count, "10", "highest emission order"),
                ];
                P
            }
            Experiment::HomodyneSweep => {
                const P: &[ParamSpec] = &[
                    p("circuit", Text, "ghz", "ghz or symmetry"),
                    p("alpha", Real, "1000", "probe amplitude"),
                    p("theta", Real, "0.1", "Kerr phase"),
                    p(
                        "m0",
                        Real,
                        "0.5",
                        "symmetry circuit input |3,0;0,3⟩ coefficient",
                    ),
                    p(
                        "n0",
                        Real,
                        "0.5",
                        "symmetry circuit input |1,2;2,1⟩ coefficient",
                    ),
                    p("x_min", Text, "auto", "sweep start, or auto"),
                    p("x_max", Text, "auto", "sweep end, or auto"),
                    p("points", Count, "201", "grid points"),
                ];
                P
            }
            Experiment::Mixture => {
                const P: &[ParamSpec] = &[p(
                    "k",
                    Text,
                    "1,2,3,10",
                    "comma-separated window ratios (≥ 1)",
                )];
                P
            }
        }
    }

    pub fn sampled(self) -> bool {
        matches!(self, Experiment::SymmetryDetect | Experiment::GhzCircuit)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Every declared parameter, defaults filled in.
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub output: PathBuf,
}

fn split_pair(raw: &str) -> Option<(&str, &str)> {
    let (k, v) = raw.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty()).then_some((k, v))
}

impl ExperimentConfig {
    /// Parses a config file; `overrides` are `key=value` pairs applied on top.
    pub fn parse<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<Self, ConfigError> {
        let mut raw: Vec<(String, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_pair(line).ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            if raw.iter().any(|(seen, _)| seen == k) {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    message: format!("`{k}` given twice"),
                });
            }
            raw.push((k.to_string(), v.to_string()));
        }
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = split_pair(o).ok_or_else(|| ConfigError::BadValue {
                key: o.to_string(),
                reason: "override must look like key=value".into(),
            })?;
            raw.retain(|(seen, _)| seen != k);
            raw.push((k.to_string(), v.to_string()));
        }

        let experiment: Experiment = raw
            .iter()
            .find(|(k, _)| k == "experiment")
            .ok_or(ConfigError::MissingExperiment)?
            .1
            .parse()?;
        let mut params: BTreeMap<String, String> = experiment
            .params()
            .iter()
            .map(|s| (s.name.to_string(), s.default.to_string()))
            .collect();
        let mut seed = None;
        let mut output = PathBuf::from(format!("{}.csv", experiment.name()));
        for (k, v) in &raw {
            match k.as_str() {
                "experiment" => {}
                "seed" => {
                    seed = Some(v.parse::<u64>().map_err(|_| ConfigError::BadValue {
                        key: "seed".into(),
                        reason: format!("`{v}` is not an unsigned 64-bit integer"),
                    })?)
                }
                "output" => output = PathBuf::from(v),
                _ => match params.get_mut(k) {
                    Some(slot) => *slot = v.clone(),
                    None => {
                        return Err(ConfigError::UnknownKey {
                            key: k.clone(),
                            experiment: experiment.name(),
                        })
                    }
                },
            }
        }
        let config = Self {
            experiment,
            params,
            seed,
            output,
        };
        config.check()?;
        Ok(config)
    }

    pub fn real(&self, key: &str) -> Result<f64, ConfigError> {
        let v = &self.params[key];
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ConfigError::BadValue {
                key: key.into(),
                reason: format!("`{v}` is not a finite number"),
            })
    }

    pub fn count(&self, key: &str) -> Result<u64, ConfigError> {
        let v = &self.params[key];
        v.parse::<u64>().map_err(|_| ConfigError::BadValue {
            key: key.into(),
            reason: format!("`{v}` is not a non-negative integer"),
        })
    }

    pub fn text(&self, key: &str) -> &str {
        &self.params[key]
    }

    /// `auto` or a finite number.
    pub fn optional_real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.text(key) == "auto" {
            Ok(None)
        } else {
            self.real(key).map(Some)
        }
    }

    pub fn real_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.text(key)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ConfigError::BadValue {
                        key: key.into(),
                        reason: format!("`{}` is not a finite number", s.trim()),
                    })
            })
            .collect()
    }

    fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Type and range checks that need no simulation.
    fn check(&self) -> Result<(), ConfigError> {
        for spec in self.experiment.params() {
            match spec.kind {
                Kind::Real => {
                    self.real(spec.name)?;
                }
                Kind::Count => {
                    self.count(spec.name)?;
                }
                Kind::Text => {}
            }
        }
        let positive = |key: &str| -> Result<(), ConfigError> {
            if self.real(key)? > 0.0 {
                Ok(())
            } else {
                Err(Self::bad(key, "must be > 0"))
            }
        };
        let has = |key: &str| self.params.contains_key(key);
        for key in ["alpha", "theta"] {
            if has(key) {
                positive(key)?;
            }
        }
        if has("m0") && self.real("m0")? == 0.0 && self.real("n0")? == 0.0 {
            return Err(Self::bad("m0", "m0 and n0 cannot both be zero"));
        }
        if has("points") && self.count("points")? == 0 {
            return Err(Self::bad("points", "must be ≥ 1"));
        }
        match self.experiment {
            Experiment::GhzCircuit => {
                decode_table(self.real("alpha")?, self.real("theta")?)
                    .map_err(|e| Self::bad("theta", e.to_string()))?;
            }
            Experiment::PdcWeights => {
                if self.real("tau")? < 0.0 {
                    return Err(Self::bad("tau", "must be ≥ 0"));
                }
            }
            Experiment::HomodyneSweep => {
                let circuit = self.text("circuit");
                if circuit != "ghz" && circuit != "symmetry" {
                    return Err(Self::bad(
                        "circuit",
                        format!("`{circuit}` is neither ghz nor symmetry"),
                    ));
                }
                if circuit == "ghz" {
                    decode_table(self.real("alpha")?, self.real("theta")?)
                        .map_err(|e| Self::bad("theta", e.to_string()))?;
                }
                if let (Some(lo), Some(hi)) =
                    (self.optional_real("x_min")?, self.optional_real("x_max")?)
                {
                    if lo >= hi {
                        return Err(Self::bad("x_max", "must exceed x_min"));
                    }
                }
            }
            Experiment::Mixture if self.real_list("k")?.iter().any(|&k| k < 1.0) => {
                return Err(Self::bad("k", "window ratios must be ≥ 1"));
            }
            _ => {}
        }
        let draws = match self.experiment {
            Experiment::SymmetryDetect => true,
            Experiment::GhzCircuit => self.count("samples")? > 0,
            _ => false,
        };
        if draws && self.seed.is_none() {
            return Err(ConfigError::MissingSeed(self.experiment.name()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::parse(
            "experiment = cascade\n# comment\nk = 4 # trailing\n",
            &["k=6"],
        )
        .unwrap();
        assert_eq!(c.count("k").unwrap(), 6);
        assert_eq!(c.real("m0").unwrap(), 0.0);
        assert_eq!(c.output, PathBuf::from("cascade.csv"));
    }

    #[test]
    fn errors_name_the_field() {
        let e = ExperimentConfig::parse("experiment = nope\n", &[] as &[&str]).unwrap_err();
        assert!(e.to_string().starts_with("experiment:"));
        let e = ExperimentConfig::parse("experiment = cascade\nbogus = 1\n", &[] as &[&str])
            .unwrap_err();
        assert!(e.to_string().starts_with("bogus:"));
        let e = ExperimentConfig::parse("experiment = cascade\n\nno equals sign\n", &[] as &[&str])
            .unwrap_err();
        assert!(e.to_string().starts_with("line 3:"));
    }

    #[test]
    fn sampling_needs_a_seed() {
        let e = ExperimentConfig::parse("experiment = ghz-circuit\nsamples = 5\n", &[] as &[&str])
            .unwrap_err();
        assert!(matches!(e, ConfigError::MissingSeed(_)));
        assert!(ExperimentConfig::parse("experiment = ghz-circuit\n", &[] as &[&str]).is_ok());
    }

    #[test]
    fn large_ghz_theta_rejected() {
        let e = ExperimentConfig::parse("experiment = ghz-circuit\ntheta = 0.3\n", &[] as &[&str])
            .unwrap_err();
        assert!(e.to_string().starts_with("theta:"));
    }
}
