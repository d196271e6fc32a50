use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::MechanismWeights;
use crate::nem::{CheckpointSchedule, DEFAULT_ITERATIONS, DEFAULT_Q, DEFAULT_UNITS};

/// When relative fit is computed during a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RfMode {
    None,
    /// only at the last checkpoint
    Final,
    /// at every checkpoint, for every theta
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitTheta {
    pub id: usize,
    pub theta: MechanismWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_thetas: usize,
    pub reps: usize,
    pub n_units: usize,
    pub q: f64,
    pub total_iterations: usize,
    /// explicit checkpoints; `None` selects [`ExperimentConfig::schedule`]'s default
    pub schedule: Option<Vec<usize>>,
    pub restarts: usize,
    pub k_clusters: usize,
    pub k_rand: usize,
    pub rf: RfMode,
    /// theta ids that get relative fit at every checkpoint regardless of `rf`
    pub rf_trajectory: Vec<usize>,
    pub seed: u64,
    pub output: PathBuf,
    pub snapshots: bool,
    /// when non-empty, replaces sampled thetas
    pub thetas: Vec<ExplicitTheta>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_thetas: 30,
            reps: 10,
            n_units: DEFAULT_UNITS,
            q: DEFAULT_Q,
            total_iterations: DEFAULT_ITERATIONS,
            schedule: None,
            restarts: 100,
            k_clusters: 3,
            k_rand: 20,
            rf: RfMode::Final,
            rf_trajectory: Vec::new(),
            seed: 1,
            output: PathBuf::from("simulation"),
            snapshots: false,
            thetas: Vec::new(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

/// Accepts a decimal or a fraction such as `5/9`.
fn parse_real(key: &str, value: &str) -> Result<f64> {
    match value.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (parse_num(key, a)?, parse_num(key, b)?);
            if b == 0.0 {
                return Err(Error::Config(format!("{key}: division by zero")));
            }
            Ok(a / b)
        }
        None => parse_num(key, value),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&crate::io::read_text(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_thetas" => self.n_thetas = parse_num(key, value)?,
            "reps" | "reps_per_theta" => self.reps = parse_num(key, value)?,
            "n_units" => self.n_units = parse_num(key, value)?,
            "q" => self.q = parse_real(key, value)?,
            "total_iterations" => self.total_iterations = parse_num(key, value)?,
            "schedule" => self.schedule = Some(parse_list(key, value)?),
            "restarts" => self.restarts = parse_num(key, value)?,
            "k_clusters" => self.k_clusters = parse_num(key, value)?,
            "k_rand" => self.k_rand = parse_num(key, value)?,
            "rf" => {
                self.rf = match value.to_ascii_lowercase().as_str() {
                    "none" => RfMode::None,
                    "final" => RfMode::Final,
                    "all" => RfMode::All,
                    other => return Err(Error::Config(format!("rf: unknown mode {other:?}"))),
                }
            }
            "rf_trajectory" => self.rf_trajectory = parse_list(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "snapshots" => self.snapshots = parse_bool(key, value)?,
            _ => {
                if let Some(id) = key.strip_prefix("theta.") {
                    let id: usize = parse_num(key, id)?;
                    let w: Vec<f64> = parse_list(key, value)?;
                    let w: [f64; 5] = w.try_into().map_err(|_| {
                        Error::Config(format!("{key}: expected 5 mechanism weights"))
                    })?;
                    if self.thetas.iter().any(|t| t.id == id) {
                        return Err(Error::Config(format!("{key}: duplicate theta id")));
                    }
                    self.thetas.push(ExplicitTheta {
                        id,
                        theta: MechanismWeights::from_array(w),
                    });
                } else {
                    return Err(Error::Config(format!("unknown key {key:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_thetas", self.n_thetas),
            ("reps", self.reps),
            ("total_iterations", self.total_iterations),
            ("restarts", self.restarts),
            ("k_rand", self.k_rand),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::Config(format!("q = {} is outside [0, 1]", self.q)));
        }
        if self.n_units < 4 {
            return Err(Error::Config("n_units must be at least 4".into()));
        }
        if self.k_clusters < 3 || self.k_clusters > self.n_units {
            return Err(Error::Config(format!(
                "k_clusters = {} must lie in 3..={}",
                self.k_clusters, self.n_units
            )));
        }
        let schedule = self.schedule()?;
        if schedule.is_empty() {
            return Err(Error::Config("schedule is empty".into()));
        }
        if schedule.last().unwrap_or(0) > self.total_iterations {
            return Err(Error::Config(format!(
                "checkpoint {} exceeds total_iterations {}",
                schedule.last().unwrap_or(0),
                self.total_iterations
            )));
        }
        Ok(())
    }

    /// Explicit schedule if given; otherwise the reference iteration counts
    /// for the default total, or factor-1.9 growth from 100 for other totals.
    pub fn schedule(&self) -> Result<CheckpointSchedule> {
        match &self.schedule {
            Some(points) => CheckpointSchedule::new(points.clone()),
            None if self.total_iterations == DEFAULT_ITERATIONS => Ok(CheckpointSchedule::reference()),
            None if self.total_iterations < 100 => {
                CheckpointSchedule::new(vec![self.total_iterations])
            }
            None => CheckpointSchedule::geometric(100, 1.9, self.total_iterations),
        }
    }

    pub fn computes_rf(&self, theta_id: usize, is_final: bool) -> bool {
        match self.rf {
            RfMode::All => true,
            RfMode::Final if is_final => true,
            _ => self.rf_trajectory.contains(&theta_id),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_desk_scale() {
        let c = ExperimentConfig::default();
        assert_eq!((c.n_thetas, c.reps, c.restarts), (30, 10, 100));
        assert_eq!(c.schedule().unwrap(), CheckpointSchedule::reference());
        c.validate().unwrap();
    }

    #[test]
    fn parse_full_config() {
        let text = "
            # comment
            n_thetas = 3
            reps = 2
            q = 5/9
            total_iterations = 400
            schedule = 100, 200, 400
            rf = all
            seed = 77
            theta.136 = -0.18, 0.74, 0.37, -0.35, 0.42
            snapshots = yes
        ";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.reps, 2);
        assert!((c.q - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(c.schedule().unwrap().points(), &[100, 200, 400]);
        assert_eq!(c.rf, RfMode::All);
        assert_eq!(c.thetas[0].id, 136);
        assert_eq!(c.thetas[0].theta.popularity, 0.74);
        assert!(c.snapshots);
    }

    #[test]
    fn parse_errors() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("reps").is_err());
        assert!(ExperimentConfig::parse("reps = 0").is_err());
        assert!(ExperimentConfig::parse("q = 1.5").is_err());
        assert!(ExperimentConfig::parse("theta.1 = 1,2,3").is_err());
        assert!(ExperimentConfig::parse("total_iterations = 50\nschedule = 100").is_err());
        assert!(ExperimentConfig::parse("k_clusters = 2").is_err());
    }

    #[test]
    fn default_schedule_for_other_totals() {
        let mut c = ExperimentConfig::default();
        c.total_iterations = 1000;
        assert_eq!(c.schedule().unwrap().points(), &[100, 190, 361, 686, 1000]);
        c.total_iterations = 60;
        assert_eq!(c.schedule().unwrap().points(), &[60]);
    }
}
