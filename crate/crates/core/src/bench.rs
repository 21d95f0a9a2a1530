//! Repeated-split experiments comparing the piecewise model against a least
//! squares baseline, and their MAE / MSE / CPU tables.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::config::Config;
use crate::data::{split, SplitSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lp::dot;
use crate::model::fit_with_spec;
use crate::transforms::select_transforms;

pub const FMIOM: &str = "FMIOM";
pub const LLSR: &str = "LLSR";

/// Diagonal jitter added when the Gram matrix is not positive definite.
pub const RIDGE_JITTER: f64 = 1e-10;

/// Least squares coefficients from the normal equations. The design matrix
/// is used as given, so include a constant column for an intercept.
pub fn llsr_fit<R: AsRef<[f64]>>(x: &[R], y: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::invalid("llsr_fit needs at least one point"));
    }
    if x.len() != y.len() {
        return Err(Error::invalid("llsr_fit: x and y lengths differ"));
    }
    let d = x[0].as_ref().len();
    if x.iter().any(|r| r.as_ref().len() != d) {
        return Err(Error::invalid("llsr_fit: ragged rows"));
    }
    let xm = DMatrix::from_fn(x.len(), d, |i, j| x[i].as_ref()[j]);
    let gram = xm.transpose() * &xm;
    let rhs = xm.transpose() * DVector::from_column_slice(y);
    if let Some(chol) = gram.clone().cholesky() {
        return Ok(chol.solve(&rhs).iter().copied().collect());
    }
    let mut jittered = gram.clone();
    for j in 0..d {
        jittered[(j, j)] += RIDGE_JITTER;
    }
    if let Some(chol) = jittered.cholesky() {
        return Ok(chol.solve(&rhs).iter().copied().collect());
    }
    // Badly scaled Gram matrices can defeat even the jitter; the minimum-norm
    // solution is the natural limit.
    let svd = gram.svd(true, true);
    let beta = svd
        .solve(&rhs, 1e-12 * svd.singular_values.max())
        .map_err(|e| Error::Solver(format!("least squares: {e}")))?;
    Ok(beta.iter().copied().collect())
}

fn with_intercept(ds: &Dataset) -> Vec<Vec<f64>> {
    ds.x()
        .iter()
        .map(|r| {
            let mut v = r.clone();
            v.push(1.0);
            v
        })
        .collect()
}

/// Mean absolute and mean squared error.
pub fn errors(pred: &[f64], y: &[f64]) -> PhaseErrors {
    let n = y.len().max(1) as f64;
    let (mut abs, mut sq) = (0.0, 0.0);
    for (p, t) in pred.iter().zip(y) {
        let r = t - p;
        abs += r.abs();
        sq += r * r;
    }
    PhaseErrors {
        mae: abs / n,
        mse: sq / n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseErrors {
    pub mae: f64,
    pub mse: f64,
}

/// One method on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMetrics {
    pub rep: usize,
    /// Train, validation, test.
    pub phases: [PhaseErrors; 3],
    pub seconds: f64,
    /// Number of groups picked on validation; 0 for the baseline.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation, 0 for a single repetition.
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        if values.is_empty() {
            return Summary { mean: 0.0, sd: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Summary { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    /// Indexed like [`RepMetrics::phases`].
    pub mae: [Summary; 3],
    pub mse: [Summary; 3],
    pub cpu_seconds: f64,
    /// Per-repetition values, ordered by repetition.
    pub reps: Vec<RepMetrics>,
}

impl MetricsRow {
    fn aggregate(method: &str, dataset: &str, n: usize, d: usize, mut reps: Vec<RepMetrics>) -> Self {
        reps.sort_by_key(|r| r.rep);
        let collect = |f: &dyn Fn(&RepMetrics) -> f64| -> Vec<f64> { reps.iter().map(f).collect() };
        let mae = [0, 1, 2].map(|p| Summary::of(&collect(&|r| r.phases[p].mae)));
        let mse = [0, 1, 2].map(|p| Summary::of(&collect(&|r| r.phases[p].mse)));
        let cpu_seconds = Summary::of(&collect(&|r| r.seconds)).mean;
        MetricsRow {
            method: method.to_string(),
            dataset: dataset.to_string(),
            n,
            d,
            mae,
            mse,
            cpu_seconds,
            reps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    /// Values of K tried on each split; the lowest validation MAE wins.
    pub k_candidates: Vec<usize>,
    /// Select transforms on the validation set; otherwise raw features only.
    pub select_transforms: bool,
    /// Worker threads for repetitions; 0 means one per available core.
    pub threads: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            k_candidates: vec![1, 2, 3],
            select_transforms: true,
            threads: 0,
        }
    }
}

struct RepOutcome {
    rep: usize,
    fmiom: RepMetrics,
    llsr: RepMetrics,
}

fn run_rep(ds: &Dataset, cfg: &Config, opts: &BenchOptions, rep: usize) -> Result<RepOutcome> {
    let (train, val, test) = split(ds, &SplitSpec::new(cfg.seed, rep as u64))?;
    let sets = [&train, &val, &test];

    // The timed span covers transform selection and the K search, which
    // together make up one model fit.
    let start = Instant::now();
    let spec = if opts.select_transforms {
        select_transforms(&train, &val)?
    } else {
        crate::transforms::TransformSpec::identity(ds.d())
    };
    let mut best: Option<(f64, usize, crate::model::FittedModel)> = None;
    for &k in &opts.k_candidates {
        let kcfg = Config { k, ..cfg.clone() };
        let model = match fit_with_spec(&train, spec.clone(), &kcfg) {
            Ok(m) => m,
            Err(Error::InvalidConfig(msg)) if best.is_some() => {
                log::warn!("repetition {rep}: skipping K = {k}: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let val_mae = errors(&model.predict_all(&val)?, val.y()).mae;
        log::debug!("repetition {rep}: K = {k}, validation MAE {val_mae:.6}");
        if best.as_ref().map_or(true, |(m, _, _)| val_mae < *m) {
            best = Some((val_mae, k, model));
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let (_, k, model) = best.ok_or_else(|| Error::config("no K candidates"))?;
    let mut phases = [PhaseErrors { mae: 0.0, mse: 0.0 }; 3];
    for (p, set) in sets.iter().enumerate() {
        phases[p] = errors(&model.predict_all(set)?, set.y());
    }
    let fmiom = RepMetrics {
        rep,
        phases,
        seconds,
        k,
    };

    let start = Instant::now();
    let beta = llsr_fit(&with_intercept(&train), train.y())?;
    let seconds = start.elapsed().as_secs_f64();
    for (p, set) in sets.iter().enumerate() {
        let pred: Vec<f64> = with_intercept(set).iter().map(|r| dot(r, &beta)).collect();
        phases[p] = errors(&pred, set.y());
    }
    let llsr = RepMetrics {
        rep,
        phases,
        seconds,
        k: 0,
    };
    Ok(RepOutcome { rep, fmiom, llsr })
}

/// Runs `cfg.reps` random 50/30/20 splits and returns one row per method.
pub fn run_experiment(ds: &Dataset, name: &str, cfg: &Config, opts: &BenchOptions) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    if cfg.reps == 0 {
        return Err(Error::config("reps must be at least 1"));
    }
    if opts.k_candidates.is_empty() {
        return Err(Error::config("no K candidates"));
    }
    let threads = match opts.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(cfg.reps);
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, Result<RepOutcome>)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let rep = next.fetch_add(1, Ordering::SeqCst);
                if rep >= cfg.reps {
                    break;
                }
                let out = run_rep(ds, cfg, opts, rep);
                if let Ok(o) = &out {
                    log::info!(
                        "{name} repetition {rep}: K = {}, test MAE {:.4} (LLSR {:.4}), {:.2}s",
                        o.fmiom.k,
                        o.fmiom.phases[2].mae,
                        o.llsr.phases[2].mae,
                        o.fmiom.seconds
                    );
                }
                done.lock().expect("no worker panicked").push((rep, out));
            });
        }
    });
    let mut done = done.into_inner().expect("no worker panicked");
    done.sort_by_key(|(rep, _)| *rep);
    let mut outcomes = Vec::with_capacity(done.len());
    for (rep, out) in done {
        outcomes.push(out.map_err(|e| Error::Repetition {
            rep,
            source: Box::new(e),
        })?);
    }
    Ok(rows_from(ds, name, outcomes))
}

fn rows_from(ds: &Dataset, name: &str, outcomes: Vec<RepOutcome>) -> Vec<MetricsRow> {
    let (mut f, mut l) = (Vec::new(), Vec::new());
    for o in outcomes {
        debug_assert_eq!(o.fmiom.rep, o.rep);
        f.push(o.fmiom);
        l.push(o.llsr);
    }
    vec![
        MetricsRow::aggregate(FMIOM, name, ds.n(), ds.d(), f),
        MetricsRow::aggregate(LLSR, name, ds.n(), ds.d(), l),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mae,
    Mse,
    Cpu,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mae, Metric::Mse, Metric::Cpu];

    fn title(self) -> &'static str {
        match self {
            Metric::Mae => "MAE",
            Metric::Mse => "MSE",
            Metric::Cpu => "CPU seconds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Tsv,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(TableFormat::Tsv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::invalid(format!("unknown table format {other:?}"))),
        }
    }
}

fn cell(s: Summary) -> String {
    format!("{:.3} ({:.3})", s.mean, s.sd)
}

const PHASES: [&str; 3] = ["Train", "Validation", "Test"];

/// One table: a line per dataset, and Train / Validation / Test columns per
/// method (a single column per method for CPU time).
pub fn emit_table(rows: &[MetricsRow], metric: Metric, format: TableFormat) -> String {
    let mut datasets: Vec<(&str, usize, usize)> = Vec::new();
    let mut methods: Vec<&str> = Vec::new();
    for r in rows {
        if !datasets.iter().any(|(n, _, _)| *n == r.dataset) {
            datasets.push((&r.dataset, r.n, r.d));
        }
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut header = vec!["Dataset".to_string(), "n".into(), "d".into()];
    for m in &methods {
        match metric {
            Metric::Cpu => header.push(m.to_string()),
            _ => header.extend(PHASES.iter().map(|p| format!("{m} {p}"))),
        }
    }
    let mut lines = vec![header];
    for &(name, n, d) in &datasets {
        let mut line = vec![name.to_string(), n.to_string(), d.to_string()];
        for m in &methods {
            let row = rows.iter().find(|r| r.dataset == name && r.method == *m);
            match (metric, row) {
                (Metric::Cpu, Some(r)) => line.push(format!("{:.3}", r.cpu_seconds)),
                (Metric::Cpu, None) => line.push("-".into()),
                (_, None) => line.extend(std::iter::repeat("-".to_string()).take(3)),
                (Metric::Mae, Some(r)) => line.extend(r.mae.iter().map(|s| cell(*s))),
                (Metric::Mse, Some(r)) => line.extend(r.mse.iter().map(|s| cell(*s))),
            }
        }
        lines.push(line);
    }

    let mut out = String::new();
    match format {
        TableFormat::Tsv => {
            for line in lines {
                out.push_str(&line.join("\t"));
                out.push('\n');
            }
        }
        TableFormat::Markdown => {
            for (i, line) in lines.iter().enumerate() {
                let _ = writeln!(out, "| {} |", line.join(" | "));
                if i == 0 {
                    let _ = writeln!(out, "|{}", "---|".repeat(line.len()));
                }
            }
        }
    }
    out
}

/// The MAE, MSE and CPU tables, each under its title.
pub fn emit_tables(rows: &[MetricsRow], format: TableFormat) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::invalid("no benchmark rows to tabulate"));
    }
    let mut out = String::new();
    for (i, metric) in Metric::ALL.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match format {
            TableFormat::Tsv => {
                let _ = writeln!(out, "{}", metric.title());
            }
            TableFormat::Markdown => {
                let _ = writeln!(out, "### {}\n", metric.title());
            }
        }
        out.push_str(&emit_table(rows, metric, format));
    }
    Ok(out)
}
