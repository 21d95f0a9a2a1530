use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fmiom::assign::root_relaxation;
use fmiom::bench::{emit_tables, run_experiment, BenchOptions, TableFormat};
use fmiom::data::{load_features, write_csv};
use fmiom::{cluster, fit, friedman_generate, load_csv, Config, Dataset, Error, FittedModel, Result};

#[derive(Parser)]
#[command(name = "fmiom", version, about = "Piecewise-polyhedral regression with outlier removal")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a CSV (last column is the response).
    Fit {
        #[arg(long)]
        train: PathBuf,
        /// Validation CSV used to select feature transforms.
        #[arg(long)]
        val: Option<PathBuf>,
        /// Where to write the model.
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the root assignment LP in text form.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Predict with a saved model; writes one prediction per input row.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// CSV with the model's feature columns, optionally followed by a
        /// response column which is ignored.
        #[arg(long)]
        input: PathBuf,
        /// Output CSV; standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the repeated-split experiment and print MAE, MSE and CPU tables.
    Bench {
        /// friedman1, friedman2 or friedman3.
        #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
        dataset: Option<String>,
        /// Data set from a CSV file instead of a generator.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Rows generated for a Friedman data set.
        #[arg(long, default_value_t = 500)]
        n: usize,
        /// Noise standard deviation for a Friedman data set.
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        /// Generator seed for a Friedman data set.
        #[arg(long, default_value_t = 0)]
        data_seed: u64,
        /// Comma-separated values of K tried on validation.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        k_candidates: Vec<usize>,
        /// Use raw features only.
        #[arg(long)]
        no_transforms: bool,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value = "markdown")]
        format: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Generate a Friedman benchmark data set as CSV.
    Gen {
        #[arg(long, default_value_t = 1)]
        variant: u8,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of regression groups.
    #[arg(short = 'K', long = "groups")]
    k: Option<usize>,
    /// Number of clusters.
    #[arg(short = 'L', long = "clusters")]
    l: Option<usize>,
    /// Big-M constant.
    #[arg(short = 'M', long = "big-m")]
    big_m: Option<f64>,
    /// Crisp outlier fraction.
    #[arg(long)]
    rho: Option<f64>,
    /// Alpha level used to crispify fuzzy parameters.
    #[arg(long)]
    alpha: Option<f64>,
    /// Neighbours consulted outside every region.
    #[arg(short = 'F', long = "neighbors")]
    neighbors: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    time_limit_s: Option<f64>,
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Any configuration key, e.g. --set rho.g=0.005 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let pairs = [
            ("K", self.k.map(|v| v.to_string())),
            ("L", self.l.map(|v| v.to_string())),
            ("M", self.big_m.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("F", self.neighbors.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("reps", self.reps.map(|v| v.to_string())),
            ("time_limit_s", self.time_limit_s.map(|v| v.to_string())),
            ("gap_tol", self.gap_tol.map(|v| v.to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if let Some(rho) = self.rho {
            cfg.rho = fmiom::FuzzyNumber::crisp(rho);
        }
        for item in &self.set {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("--set expects KEY=VALUE, got {item:?}")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn dump_root_lp(train: &Dataset, model: &FittedModel, path: &Path) -> Result<()> {
    let data = model.spec.design_dataset(train)?;
    let clustering = cluster(data.x(), data.y(), model.cfg.l)?;
    let lp = root_relaxation(&data, &clustering, &model.cfg)?;
    std::fs::write(path, lp.to_text())?;
    log::info!(
        "wrote root LP ({} variables, {} rows) to {}",
        lp.num_vars(),
        lp.num_constraints(),
        path.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            train,
            val,
            out,
            dump_lp,
            cfg,
        } => {
            let cfg = cfg.resolve()?;
            let train = load_csv(&train)?;
            let val = val.map(load_csv).transpose()?;
            let model = fit(&train, val.as_ref(), &cfg)?;
            let d = &model.diagnostics;
            log::info!(
                "objective {:.6}, {} nodes, {}, {:.2}% of points discarded",
                d.objective,
                d.nodes,
                d.optimality,
                100.0 * d.eliminated_fraction
            );
            for w in &d.big_m_warnings {
                eprintln!("warning: {w}");
            }
            model.save(&out)?;
            if let Some(path) = dump_lp {
                dump_root_lp(&train, &model, &path)?;
            }
        }
        Command::Predict { model, input, out } => {
            let model = FittedModel::load(&model)?;
            let rows = load_features(&input, model.spec.input_dim())?;
            let mut w = output(out.as_deref())?;
            writeln!(w, "prediction")?;
            for row in &rows {
                writeln!(w, "{:?}", model.predict(row)?)?;
            }
            w.flush()?;
        }
        Command::Bench {
            dataset,
            csv,
            n,
            noise,
            data_seed,
            k_candidates,
            no_transforms,
            threads,
            format,
            cfg,
        } => {
            let format: TableFormat = format.parse()?;
            let cfg = cfg.resolve()?;
            let (name, ds) = match (dataset, csv) {
                (Some(name), _) => {
                    let variant = match name.as_str() {
                        "friedman1" => 1,
                        "friedman2" => 2,
                        "friedman3" => 3,
                        other => return Err(Error::InvalidInput(format!("unknown data set {other:?}"))),
                    };
                    (name, friedman_generate(variant, n, noise, data_seed)?)
                }
                (None, Some(path)) => {
                    let name = path
                        .file_stem()
                        .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
                    (name, load_csv(&path)?)
                }
                (None, None) => unreachable!("clap requires one of --dataset and --csv"),
            };
            let opts = BenchOptions {
                k_candidates,
                select_transforms: !no_transforms,
                threads,
            };
            let rows = run_experiment(&ds, &name, &cfg, &opts)?;
            print!("{}", emit_tables(&rows, format)?);
        }
        Command::Gen {
            variant,
            n,
            noise,
            seed,
            out,
        } => {
            let ds = friedman_generate(variant, n, noise, seed)?;
            write_csv(&ds, "y", output(out.as_deref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
