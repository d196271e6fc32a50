use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExplicitTheta};
use crate::blockmodel::{classify_blocks, fit, FitOptions};
use crate::error::{Error, Result};
use crate::fitmetrics::{ideal_image, inconsistent_blocks, relative_fit, IdealType};
use crate::io::{to_csv, write_text};
use crate::nem::{generate, sample_theta, GeneratorConfig};
use crate::network::BinaryNetwork;
use crate::seed::{derive_seed, rng_from_seed};

// seed-derivation stream tags
const THETA_STREAM: u64 = 0x0074_6865_7461;
const NONSPEC_FIT: u64 = 1;
const RF_FIT: u64 = 2;

/// One measurement of one trajectory at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub theta_id: usize,
    pub rep: usize,
    pub iter: usize,
    /// density of the symmetrized network
    pub density: f64,
    pub inconsistent_blocks: usize,
    pub rf_core_cohesive: Option<f64>,
    pub rf_cohesive: Option<f64>,
    pub rf_core_periphery: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFailure {
    pub theta_id: usize,
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub schedule: Vec<usize>,
    pub thetas: Vec<ExplicitTheta>,
    pub record_count: usize,
    pub failures: Vec<TrajectoryFailure>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<SimulationRecord>,
    pub manifest: RunManifest,
    pub records_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// The thetas of an experiment: the explicit ones when configured, otherwise
/// `n_thetas` samples (ids 1..) from a stream derived from the master seed.
pub fn experiment_thetas(config: &ExperimentConfig) -> Vec<ExplicitTheta> {
    if !config.thetas.is_empty() {
        return config.thetas.clone();
    }
    let mut rng = rng_from_seed(derive_seed(config.seed, &[THETA_STREAM]));
    (1..=config.n_thetas)
        .map(|id| ExplicitTheta {
            id,
            theta: sample_theta(&mut rng),
        })
        .collect()
}

/// Blockmodels one generated network: symmetrize, fit the non-specified
/// model, count inconsistent blocks against the symmetric core-cohesive
/// image and optionally compute relative fit for the three ideal types.
pub fn analyse_snapshot(
    config: &ExperimentConfig,
    net: &BinaryNetwork,
    with_rf: bool,
    seed: u64,
) -> Result<(f64, usize, [Option<f64>; 3])> {
    let sym = net.symmetrize_union();
    let density = sym.density()?;
    let opts = FitOptions::non_specified(config.k_clusters, config.restarts);
    let fitted = fit(&sym, &opts, &mut rng_from_seed(derive_seed(seed, &[NONSPEC_FIT])))?;
    let observed = classify_blocks(&sym, &fitted.partition)?;
    let ideal = ideal_image(IdealType::SymmetricCoreCohesive {
        k: config.k_clusters,
    })?;
    let inconsistent = inconsistent_blocks(&observed, &ideal)?;
    let mut rf = [None; 3];
    if with_rf {
        let types = [
            IdealType::SymmetricCoreCohesive {
                k: config.k_clusters,
            },
            IdealType::Cohesive {
                k: config.k_clusters,
            },
            IdealType::SymmetricCorePeriphery,
        ];
        for (slot, (t, tag)) in rf.iter_mut().zip(types.into_iter().zip(0u64..)) {
            let mut rng = rng_from_seed(derive_seed(seed, &[RF_FIT, tag]));
            *slot = relative_fit(&sym, t, config.k_rand, config.restarts, &mut rng)?.rf;
        }
    }
    Ok((density, inconsistent, rf))
}

/// Generates one trajectory from the empty directed network and analyses
/// each checkpoint. Optionally writes each snapshot to `snapshot_dir`.
pub fn run_trajectory(
    config: &ExperimentConfig,
    theta: &ExplicitTheta,
    rep: usize,
    snapshot_dir: Option<&Path>,
) -> Result<Vec<SimulationRecord>> {
    let schedule = config.schedule()?;
    let traj_seed = derive_seed(config.seed, &[theta.id as u64, rep as u64]);
    let gen = GeneratorConfig {
        q: config.q,
        iterations: config.total_iterations,
        n: config.n_units,
        seed: traj_seed,
    };
    let initial = BinaryNetwork::empty(config.n_units, true);
    let trajectory = generate(&gen, &theta.theta, &schedule, &initial)?;
    let last = schedule.last();
    let mut records = Vec::with_capacity(trajectory.snapshots.len());
    for (iter, net) in &trajectory.snapshots {
        if let Some(dir) = snapshot_dir {
            let path = dir.join(format!("{}_{}_{}.csv", theta.id, rep, iter));
            write_text(&path, &to_csv(net))?;
        }
        let with_rf = config.computes_rf(theta.id, Some(*iter) == last);
        let seed = derive_seed(traj_seed, &[*iter as u64]);
        let (density, inconsistent, rf) = analyse_snapshot(config, net, with_rf, seed)?;
        records.push(SimulationRecord {
            theta_id: theta.id,
            rep,
            iter: *iter,
            density,
            inconsistent_blocks: inconsistent,
            rf_core_cohesive: rf[0],
            rf_cohesive: rf[1],
            rf_core_periphery: rf[2],
        });
    }
    Ok(records)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs the full (theta, repetition) grid in parallel. Records are appended
/// to `records.csv` by a single writer as trajectories finish, so row order
/// on disk follows completion order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let out = &config.output;
    create_dir(out)?;
    let snapshot_dir = if config.snapshots {
        let d = out.join("snapshots");
        create_dir(&d)?;
        Some(d)
    } else {
        None
    };
    let thetas = experiment_thetas(config);
    let grid: Vec<(&ExplicitTheta, usize)> = thetas
        .iter()
        .flat_map(|t| (0..config.reps).map(move |r| (t, r)))
        .collect();

    let records_path = out.join("records.csv");
    let file = fs::File::create(&records_path).map_err(|e| Error::io(&records_path, e))?;
    let (tx, rx) = mpsc::channel::<std::result::Result<Vec<SimulationRecord>, TrajectoryFailure>>();

    let (records, failures) = std::thread::scope(|scope| -> Result<_> {
        let writer = scope.spawn(move || -> Result<(Vec<SimulationRecord>, Vec<TrajectoryFailure>)> {
            let mut w = csv::Writer::from_writer(file);
            let mut all = Vec::new();
            let mut failures = Vec::new();
            for msg in rx {
                match msg {
                    Ok(batch) => {
                        for r in &batch {
                            w.serialize(r)?;
                        }
                        w.flush().map_err(|e| Error::io("records.csv", e))?;
                        all.extend(batch);
                    }
                    Err(f) => failures.push(f),
                }
            }
            Ok((all, failures))
        });
        grid.par_iter().for_each_with(tx, |tx, (theta, rep)| {
            let msg = run_trajectory(config, theta, *rep, snapshot_dir.as_deref()).map_err(|e| {
                TrajectoryFailure {
                    theta_id: theta.id,
                    rep: *rep,
                    error: e.to_string(),
                }
            });
            let _ = tx.send(msg);
        });
        writer.join().expect("record writer panicked")
    })?;

    let mut failures = failures;
    failures.sort_by_key(|f| (f.theta_id, f.rep));
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        schedule: config.schedule()?.points().to_vec(),
        thetas,
        record_count: records.len(),
        failures,
    };
    let manifest_path = out.join("manifest.json");
    write_text(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunOutcome {
        records,
        manifest,
        records_path,
        manifest_path,
    })
}

pub fn write_records(path: &Path, records: &[SimulationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<SimulationRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let records: std::result::Result<Vec<SimulationRecord>, _> = reader.deserialize().collect();
    Ok(records?)
}
