use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use blocknem::blockmodel::{fit, BlockImage, BlockmodelFit, FitOptions, Partition};
use blocknem::error::{Error, Result};
use blocknem::fitmetrics::{ideal_image, inconsistent_blocks, relative_fit, IdealType, DEFAULT_K_RAND};
use blocknem::harness::{read_records, run_experiment, summarize, ExperimentConfig};
use blocknem::io;
use blocknem::mechanisms::MechanismWeights;
use blocknem::nem::{generate, sample_theta, CheckpointSchedule, GeneratorConfig, DEFAULT_ITERATIONS, DEFAULT_Q};
use blocknem::network::{binarize, BinaryNetwork};
use blocknem::plot;
use blocknem::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "blocknem", version, about = "Blockmodeling and network evolution simulations")]
struct Cli {
    /// RNG seed (default 1; for `simulate`, overrides the config's seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory (standard output when omitted, where applicable)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one trajectory of the evolution model and dump snapshots
    Gen {
        /// Five comma-separated mechanism weights; sampled when omitted
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, default_value_t = DEFAULT_Q)]
        q: f64,
        #[arg(long, default_value_t = 116_490)]
        iterations: usize,
        #[arg(long, default_value_t = 24)]
        n: usize,
        /// Comma-separated checkpoints (default: the standard twelve at 116490
        /// iterations, otherwise factor 1.9 from 100)
        #[arg(long)]
        schedule: Option<String>,
        /// Initial directed network (default: empty)
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        theta_id: usize,
        #[arg(long, default_value_t = 0)]
        rep: usize,
    },
    /// Blockmodel a network (non-specified unless --image is given)
    Fit {
        network: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 500)]
        restarts: usize,
        /// Pre-specified image, e.g. "com,com,com;com,com,null;com,null,com"
        #[arg(long)]
        image: Option<String>,
        /// Fit the union-symmetrized network
        #[arg(long)]
        symmetrize: bool,
    },
    /// Relative fit of a network to an ideal blockmodel type
    Rf {
        network: PathBuf,
        /// core-cohesive[:k], cohesive[:k] or core-periphery
        #[arg(long = "type", default_value = "core-cohesive")]
        ideal: String,
        #[arg(long, default_value_t = DEFAULT_K_RAND)]
        k_rand: usize,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long)]
        symmetrize: bool,
    },
    /// Count inconsistent blocks between an observed image and an ideal one
    Inconsistent {
        /// Image string, or a file holding an image or a fit report
        observed: String,
        /// Image string or file; defaults to the ideal of --type
        ideal: Option<String>,
        #[arg(long = "type")]
        ideal_type: Option<String>,
    },
    /// Run a simulation experiment from a key = value config file
    Simulate { config: PathBuf },
    /// Aggregate one or more records.csv files
    Summarize {
        #[arg(required = true)]
        records: Vec<PathBuf>,
    },
    /// Draw the adjacency matrix permuted by a partition (.svg or .pbm)
    Plot {
        network: PathBuf,
        /// Fit report JSON, or a list of cluster labels
        partition: PathBuf,
        #[arg(long, default_value_t = 10)]
        scale: usize,
    },
    /// Binarize an interaction-count matrix into an undirected network
    Ingest { counts: PathBuf },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_theta(s: &str) -> Result<MechanismWeights> {
    let w: std::result::Result<Vec<f64>, _> = s.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let w = w.map_err(|e| Error::Parse(format!("theta: {e}")))?;
    let w: [f64; 5] = w
        .try_into()
        .map_err(|_| Error::Parse("theta needs exactly 5 weights".into()))?;
    Ok(MechanismWeights::from_array(w))
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad list entry {v:?}")))
        })
        .collect()
}

fn load(path: &Path, symmetrize: bool) -> Result<BinaryNetwork> {
    let net = io::read_network(path)?;
    Ok(if symmetrize && net.is_directed() {
        net.symmetrize_union()
    } else {
        net
    })
}

/// An image given inline or in a file (plain text, JSON image, or fit report).
fn load_image(arg: &str) -> Result<BlockImage> {
    let path = Path::new(arg);
    if !path.exists() {
        return arg.parse();
    }
    let text = io::read_text(path)?;
    if let Ok(fit) = serde_json::from_str::<BlockmodelFit>(&text) {
        return Ok(fit.image);
    }
    if let Ok(img) = serde_json::from_str::<BlockImage>(&text) {
        return Ok(img);
    }
    text.parse()
}

fn load_partition(path: &Path, n: usize) -> Result<Partition> {
    let text = io::read_text(path)?;
    if let Ok(fit) = serde_json::from_str::<BlockmodelFit>(&text) {
        return Ok(fit.partition);
    }
    let labels: std::result::Result<Vec<usize>, _> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect();
    let labels = labels.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if labels.len() != n {
        return Err(Error::Partition(format!(
            "{} labels for {n} units",
            labels.len()
        )));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    Partition::new(labels, k)
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    let seed = cli.seed.unwrap_or(1);
    let format = cli.format;
    match cli.command {
        Command::Gen {
            theta,
            q,
            iterations,
            n,
            schedule,
            initial,
            theta_id,
            rep,
        } => {
            let mut rng = rng_from_seed(seed);
            let theta = match theta {
                Some(s) => parse_theta(&s)?,
                None => sample_theta(&mut rng),
            };
            let schedule = match schedule {
                Some(s) => CheckpointSchedule::new(parse_usize_list(&s)?)?,
                None if iterations == DEFAULT_ITERATIONS => CheckpointSchedule::reference(),
                None if iterations >= 100 => CheckpointSchedule::geometric(100, 1.9, iterations)?,
                None => CheckpointSchedule::new(vec![iterations])?,
            };
            let initial = match initial {
                Some(p) => io::read_network(&p)?,
                None => BinaryNetwork::empty(n, true),
            };
            let config = GeneratorConfig {
                q,
                iterations,
                n,
                seed,
            };
            let traj = generate(&config, &theta, &schedule, &initial)?;
            let dir = out.unwrap_or(Path::new("."));
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            for (iter, net) in &traj.snapshots {
                let path = dir.join(format!("{theta_id}_{rep}_{iter}.csv"));
                io::write_text(&path, &io::to_csv(net))?;
            }
            eprintln!(
                "theta = {:?}; wrote {} snapshots to {}",
                theta.to_array(),
                traj.snapshots.len(),
                dir.display()
            );
        }
        Command::Fit {
            network,
            k,
            restarts,
            image,
            symmetrize,
        } => {
            let net = load(&network, symmetrize)?;
            let opts = match image {
                Some(s) => FitOptions::specified(load_image(&s)?, restarts),
                None => FitOptions::non_specified(k, restarts),
            };
            let result = fit(&net, &opts, &mut rng_from_seed(seed))?;
            let text = match format {
                Some(Format::Csv) => {
                    let labels: Vec<String> =
                        result.partition.labels().iter().map(|l| l.to_string()).collect();
                    format!("{}\n", labels.join(","))
                }
                _ => serde_json::to_string_pretty(&result)? + "\n",
            };
            emit(out, &text)?;
        }
        Command::Rf {
            network,
            ideal,
            k_rand,
            restarts,
            symmetrize,
        } => {
            let net = load(&network, symmetrize)?;
            let t: IdealType = ideal.parse()?;
            let report = relative_fit(&net, t, k_rand, restarts, &mut rng_from_seed(seed))?;
            let text = match format {
                Some(Format::Csv) => format!(
                    "type,p_m,mean_p_r,rf\n{},{},{},{}\n",
                    t,
                    report.p_m,
                    report.mean_baseline(),
                    report.rf.map_or("NA".to_string(), |v| v.to_string())
                ),
                _ => serde_json::to_string_pretty(&report)? + "\n",
            };
            emit(out, &text)?;
        }
        Command::Inconsistent {
            observed,
            ideal,
            ideal_type,
        } => {
            let observed = load_image(&observed)?;
            let ideal = match (ideal, ideal_type) {
                (Some(s), _) => load_image(&s)?,
                (None, Some(t)) => ideal_image(t.parse()?)?,
                (None, None) => ideal_image(IdealType::SymmetricCoreCohesive { k: observed.k() })?,
            };
            emit(out, &format!("{}\n", inconsistent_blocks(&observed, &ideal)?))?;
        }
        Command::Simulate { config } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(dir) = out {
                cfg.output = dir.to_path_buf();
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let outcome = run_experiment(&cfg)?;
            eprintln!(
                "{} records written to {} ({} failed trajectories)",
                outcome.records.len(),
                outcome.records_path.display(),
                outcome.manifest.failures.len()
            );
        }
        Command::Summarize { records } => {
            let mut all = Vec::new();
            for path in &records {
                all.extend(read_records(path)?);
            }
            let summary = summarize(&all);
            let text = match format {
                Some(Format::Json) => serde_json::to_string_pretty(&summary)? + "\n",
                _ => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for t in &summary {
                        for c in &t.checkpoints {
                            w.serialize(c)?;
                        }
                    }
                    String::from_utf8(w.into_inner().map_err(|e| Error::Parse(e.to_string()))?)
                        .expect("csv output is utf-8")
                }
            };
            emit(out, &text)?;
        }
        Command::Plot {
            network,
            partition,
            scale,
        } => {
            let net = io::read_network(&network)?;
            let p = load_partition(&partition, net.n())?;
            let svg = out.is_none_or(|o| o.extension().and_then(|e| e.to_str()) != Some("pbm"));
            let text = if svg {
                plot::to_svg(&net, &p, scale)?
            } else {
                plot::to_pbm(&net, &p, scale)?
            };
            emit(out, &text)?;
        }
        Command::Ingest { counts } => {
            let net = binarize(&io::read_counts(&counts)?)?;
            let pajek = out.is_some_and(|o| matches!(o.extension().and_then(|e| e.to_str()), Some("net")));
            let text = if pajek { io::to_pajek(&net) } else { io::to_csv(&net) };
            emit(out, &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
