use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use trajmean::format::TrajectorySetFile;
use trajmean::report::{write_outputs, write_series};
use trajmean::sim::{self, ExperimentConfig, Method};
use trajmean::Error;
use trajmean_core::mot_mean::{gibbs_mot_mean, greedy_mot_mean};
use trajmean_core::trajectory::ospa_trajectory_distance;
use trajmean_core::{GibbsConfig, MotMeanConfig, MotMetricConfig, OspaParams};

#[derive(Parser)]
#[command(
    name = "trajmean",
    version,
    about = "Trajectory distances, consensus means and fusion simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanMethod {
    Greedy,
    Gibbs,
}

#[derive(Clone, Copy, ValueEnum)]
enum KappaArg {
    Ospa2,
    Cola,
    Tt,
}

#[derive(Subcommand)]
enum Command {
    /// OSPA distance between two trajectories of a file.
    DistTraj {
        file: PathBuf,
        /// Trajectory id, or `set/trajectory` when ids repeat across sets.
        id_a: String,
        id_b: String,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Consensus of every set of a file; writes the mean and prints its cost.
    MeanMot {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MeanMethod::Greedy)]
        method: MeanMethod,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        c: f64,
        /// Cardinality penalty; defaults to `c`. Ignored by cola and tt.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum, default_value_t = KappaArg::Ospa2)]
        kappa: KappaArg,
        /// Scale of the tt normaliser.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Greedy outer iterations (default 100) or Gibbs sweeps (default 10).
        #[arg(long)]
        iters: Option<usize>,
        /// Gibbs only: sample rows from the pairwise surrogate.
        #[arg(long)]
        efficient: bool,
        /// Gibbs only: resample the entries of non-existent slots.
        #[arg(long)]
        rearrange: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo fusion experiment; writes reports and CSV series.
    Simulate {
        /// JSON experiment configuration; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "greedy1,greedy2")]
        methods: Vec<String>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the scenario seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock seconds per method (reports then differ between runs).
        #[arg(long)]
        timing: bool,
        /// Also write the truth and node estimates of every trial.
        #[arg(long)]
        save_scenarios: bool,
    },
    /// Expanding-window OSPA² of every set of a file against a truth set.
    Evaluate {
        #[arg(long)]
        truth: PathBuf,
        /// Set of the truth file to use; defaults to its only set.
        #[arg(long)]
        truth_set: Option<String>,
        #[arg(long)]
        estimates: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        p: f64,
        #[arg(long, default_value_t = 100.0 * std::f64::consts::SQRT_2)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::DistTraj {
            file,
            id_a,
            id_b,
            c,
            r,
        } => {
            let params = OspaParams::new(c, r)?;
            let doc = TrajectorySetFile::read(&file)?;
            let d =
                ospa_trajectory_distance(&doc.trajectory(&id_a)?, &doc.trajectory(&id_b)?, params)?;
            emit(format_args!("{d:.9}\n"));
            Ok(())
        }
        Command::MeanMot {
            file,
            method,
            r,
            c,
            p,
            kappa,
            alpha,
            seed,
            iters,
            efficient,
            rearrange,
            out,
        } => {
            let metric = match kappa {
                KappaArg::Ospa2 => MotMetricConfig::ospa2(r, p.unwrap_or(c), c)?,
                KappaArg::Cola => MotMetricConfig::cola(r, c)?,
                KappaArg::Tt => MotMetricConfig::tt(r, c, alpha)?,
            };
            let doc = TrajectorySetFile::read(&file)?;
            let samples = doc.to_mots()?;
            let cfg = MotMeanConfig::new(metric).with_seed(seed);
            let mean = match method {
                MeanMethod::Greedy => {
                    greedy_mot_mean(&samples, &cfg.with_max_iters(iters.unwrap_or(100)))?
                }
                MeanMethod::Gibbs => {
                    let mut gibbs = GibbsConfig::new(iters.unwrap_or(10), seed);
                    gibbs.use_efficient_proposal = efficient;
                    gibbs.rearrange_nonexistence = rearrange;
                    gibbs_mot_mean(&samples, &cfg, &gibbs)?
                }
            };
            TrajectorySetFile::from_mots(doc.window, [("mean", &mean.mean)]).write(&out)?;
            emit(format_args!("{:.9}\n", mean.cost));
            Ok(())
        }
        Command::Simulate {
            config,
            trials,
            methods,
            out_dir,
            seed,
            timing,
            save_scenarios,
        } => {
            let mut cfg = match config {
                Some(path) => read_config(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.scenario.seed = seed;
            }
            let methods = methods
                .iter()
                .map(|m| m.parse())
                .collect::<Result<Vec<Method>, _>>()?;
            let reports =
                sim::run_monte_carlo(&cfg, &methods, trials, timing, sim::threads_from_env())?;
            let summary = write_outputs(&out_dir, &reports)?;
            if save_scenarios {
                for t in 0..trials {
                    let s = sim::generate_scenario(&cfg.scenario, t);
                    let names: Vec<String> =
                        (1..=s.nodes.len()).map(|i| format!("node{i}")).collect();
                    let sets = std::iter::once(("truth", &s.truth))
                        .chain(names.iter().map(String::as_str).zip(&s.nodes));
                    TrajectorySetFile::from_mots(cfg.scenario.window, sets)
                        .write(&out_dir.join(format!("scenario_{t:03}.json")))?;
                }
            }
            emit(format_args!("{}", summary.to_text()));
            Ok(())
        }
        Command::Evaluate {
            truth,
            truth_set,
            estimates,
            p,
            c,
            r,
            out_dir,
        } => {
            let metric = MotMetricConfig::ospa2(r, p, c)?;
            let truth_doc = TrajectorySetFile::read(&truth)?;
            let index = match &truth_set {
                Some(id) => truth_doc
                    .sets
                    .iter()
                    .position(|s| &s.id == id)
                    .ok_or_else(|| Error::Invalid(format!("unknown set {id:?} in truth file")))?,
                None if truth_doc.sets.len() == 1 => 0,
                None => {
                    return Err(Error::Invalid(
                        "truth file holds several sets; pass --truth-set".into(),
                    ))
                }
            };
            let gt = truth_doc.to_mots()?.swap_remove(index);
            let est_doc = TrajectorySetFile::read(&estimates)?;
            if est_doc.window != truth_doc.window {
                return Err(Error::Invalid(format!(
                    "estimate window {} differs from truth window {}",
                    est_doc.window, truth_doc.window
                )));
            }
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            write_counts(
                &out_dir.join("cardinality_truth.csv"),
                &sim::cardinality_series(&gt),
            )?;
            for (set, est) in est_doc.sets.iter().zip(est_doc.to_mots()?) {
                let series = sim::expanding_window_ospa2(&est, &gt, &metric)?;
                write_series(&out_dir.join(format!("ospa2_{}.csv", set.id)), &series)?;
                write_counts(
                    &out_dir.join(format!("cardinality_{}.csv", set.id)),
                    &sim::cardinality_series(&est),
                )?;
                emit(format_args!(
                    "{} {:.9}\n",
                    set.id,
                    series.last().copied().unwrap_or(0.0)
                ));
            }
            Ok(())
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_counts(path: &Path, counts: &[usize]) -> Result<(), Error> {
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    write_series(path, &values)
}

/// Writes to stdout; a reader that has gone away is not an error.
fn emit(args: std::fmt::Arguments) {
    let _ = std::io::stdout().lock().write_fmt(args);
}
