//! `rampcast` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rampcast::atmos::{detect_ramps, log_law_transform, power_series, TurbineSpec};
use rampcast::data_io::{
    export_csv, load_csv, read_column, synth_series, write_columns, SiteSpec, DEFAULT_MEASUREMENT_HEIGHT,
};
use rampcast::evalx::{fmt_opt, metrics_with, ramp_errors, EvaluationReport, RampErrors, U2Form};
use rampcast::pipeline::config::DEFAULT_DT;
use rampcast::pipeline::experiment::summary_line;
use rampcast::pipeline::{
    build_features, entropy_analysis, load_data, run_experiment, train_model, ExperimentConfig, GridOutcome,
    ModelKind, TrainedModel,
};
use rampcast::sigproc::{dwt_decompose, emd_decompose};
use rampcast::{Error, Result};
use serde::{Deserialize, Serialize};

const THREADS_ENV: &str = "RAMPCAST_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rampcast", version, about = "Wind-power ramp forecasting pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic speed series calibrated to a site's mean and SD.
    Synth(SynthArgs),
    /// Extrapolate measured speeds to hub height and add turbine power.
    Transform(TransformArgs),
    /// Split a speed series into wavelet bands or EMD components.
    Decompose(DecomposeArgs),
    /// Fit one model on the training split of a configured experiment.
    Train(TrainArgs),
    /// Forecast the test split with a model saved by `train`.
    Predict(PredictArgs),
    /// Score a forecast against actual speeds.
    Evaluate(EvaluateArgs),
    /// Log energy entropy of a forecast's ramp signal (WT vs EMD).
    Entropy(EntropyArgs),
    /// Run the full multi-model experiment and write all artifacts.
    Run(RunArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Built-in site name (see `--list-sites`).
    #[arg(long, default_value = "amrumbank")]
    site: String,
    #[arg(long, default_value_t = 4464)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Sampling interval in seconds.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: i64,
    #[arg(long, required_unless_present = "list_sites")]
    out: Option<PathBuf>,
    /// Print the built-in site table and exit.
    #[arg(long)]
    list_sites: bool,
}

#[derive(Debug, Args)]
struct SeriesInput {
    /// `timestamp,speed_mps` CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: i64,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[command(flatten)]
    series: SeriesInput,
    /// Measurement height of the input speeds (m).
    #[arg(long, default_value_t = DEFAULT_MEASUREMENT_HEIGHT)]
    height: f64,
    /// Site whose roughness length is used.
    #[arg(long, default_value = "amrumbank")]
    site: String,
    /// Roughness length override (m).
    #[arg(long)]
    z0: Option<f64>,
    #[arg(long, default_value_t = 90.0)]
    hub_height: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Wt,
    Emd,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    series: SeriesInput,
    #[arg(long, value_enum, default_value = "wt")]
    method: Method,
    /// Wavelet levels, or the IMF cap for EMD.
    #[arg(long, default_value_t = 5)]
    levels: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// persistence, eps_svr, lssvr, tsvr, eps_tsvr, rfr or gbm.
    #[arg(long)]
    model: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    config: PathBuf,
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum U2Arg {
    AsPrinted,
    Conventional,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// CSV holding the actual hub-height speeds.
    #[arg(long)]
    actual: PathBuf,
    /// CSV holding the forecast speeds.
    #[arg(long)]
    pred: PathBuf,
    /// Column of `--actual` to read (default: last column).
    #[arg(long)]
    actual_column: Option<String>,
    /// Column of `--pred` to read (default: last column).
    #[arg(long)]
    pred_column: Option<String>,
    /// Ramp threshold as a fraction of nominal power.
    #[arg(long, default_value_t = 0.10)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "as-printed")]
    u2: U2Arg,
    /// Model name for the output row.
    #[arg(long, default_value = "forecast")]
    name: String,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    /// CSV holding forecast speeds.
    #[arg(long)]
    input: PathBuf,
    /// Column to read (default: last column).
    #[arg(long)]
    column: Option<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config's.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write forecast.svg.
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    kind: ModelKind,
    grid: Option<GridOutcome>,
    train_rows: usize,
    model: TrainedModel,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size worker pool: {e}")))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Transform(a) => transform(a),
        Command::Decompose(a) => decompose(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Entropy(a) => entropy(a),
        Command::Run(a) => run(a),
    }
}

fn site(name: &str) -> Result<SiteSpec> {
    SiteSpec::lookup(name).ok_or_else(|| Error::Config(format!("unknown site '{name}'")))
}

fn synth(a: SynthArgs) -> Result<()> {
    if a.list_sites {
        println!("name,kind,z0,mean_speed,sd_speed");
        for s in SiteSpec::builtin() {
            println!("{},{:?},{},{},{}", s.name, s.kind, s.z0, s.mean_speed, s.sd_speed);
        }
        return Ok(());
    }
    let series = synth_series(&site(&a.site)?, a.n, a.dt, a.seed)?;
    export_csv(&series, a.out.expect("required by clap"))
}

fn transform(a: TransformArgs) -> Result<()> {
    let series = load_csv(&a.series.input, a.series.dt)?.with_height(a.height)?;
    let z0 = match a.z0 {
        Some(z) => z,
        None => site(&a.site)?.z0,
    };
    let hub = log_law_transform(&series, z0, a.hub_height)?;
    let turbine = TurbineSpec {
        hub_height: a.hub_height,
        ..TurbineSpec::default()
    };
    let power = power_series(hub.values(), &turbine);
    write_columns(
        &a.out,
        Some(hub.timestamps()),
        &[("speed_mps", hub.values()), ("power_w", &power)],
    )
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    let series = load_csv(&a.series.input, a.series.dt)?;
    let x = series.values();
    let (names, cols): (Vec<String>, Vec<Vec<f64>>) = match a.method {
        Method::Wt => {
            let bands = dwt_decompose(x, a.levels)?;
            let mut cols = vec![bands.approx.clone()];
            cols.extend(bands.details.iter().cloned());
            (bands.names(), cols)
        }
        Method::Emd => {
            let r = emd_decompose(x, a.levels)?;
            let names = (1..=r.imfs.len())
                .map(|i| format!("imf{i}"))
                .chain(std::iter::once("residue".to_string()))
                .collect();
            let mut cols = r.imfs;
            cols.push(r.residue);
            (names, cols)
        }
    };
    let named: Vec<(&str, &[f64])> = names.iter().map(String::as_str).zip(cols.iter().map(Vec::as_slice)).collect();
    write_columns(&a.out, Some(series.timestamps()), &named)
}

fn train(a: TrainArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let kind = ModelKind::parse(&a.model)?;
    let data = load_data(&cfg)?;
    let out = features_of(&cfg, &data)?;
    let train = out.0.slice(0..out.1);
    let (model, grid) = train_model(kind, &cfg, &train)?;
    let file = ModelFile {
        kind,
        grid,
        train_rows: out.1,
        model,
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(&a.out, text).map_err(|e| io_error(&a.out, e))
}

/// Hub-height feature rows and the number of training rows.
fn features_of(
    cfg: &ExperimentConfig,
    data: &rampcast::data_io::WindSeries,
) -> Result<(rampcast::pipeline::FeatureMatrix, usize)> {
    cfg.validate()?;
    let hub = log_law_transform(data, cfg.site.z0, cfg.turbine.hub_height)?;
    let split = rampcast::data_io::SplitIndex::new(hub.len() - 1, cfg.split_frac, 2)?;
    Ok((build_features(hub.values())?, split.train_end))
}

fn predict(a: PredictArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let text = std::fs::read_to_string(&a.model).map_err(|e| io_error(&a.model, e))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", a.model.display())))?;
    let data = load_data(&cfg)?;
    let (features, train_end) = features_of(&cfg, &data)?;
    let test = features.slice(train_end..features.len());
    // persistence needs the step before the first test row
    let pred = match file.model {
        TrainedModel::Persistence { .. } if train_end > 0 => {
            let with_prev = features.slice(train_end - 1..features.len());
            file.model.predict(&with_prev.rows)?.split_off(1)
        }
        ref m => m.predict(&test.rows)?,
    };
    let ts: Vec<i64> = test.index_map.iter().map(|&t| data.timestamps()[t + 1]).collect();
    write_columns(
        &a.out,
        Some(&ts),
        &[("actual", &test.targets), (file.kind.as_str(), &pred)],
    )
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let actual = read_column(&a.actual, a.actual_column.as_deref())?;
    let pred = read_column(&a.pred, a.pred_column.as_deref())?;
    let form = match a.u2 {
        U2Arg::AsPrinted => U2Form::AsPrinted,
        U2Arg::Conventional => U2Form::Conventional,
    };
    let m = metrics_with(&actual, &pred, form)?;
    let turbine = TurbineSpec::default();
    let clip = |v: &[f64]| v.iter().map(|x| x.max(0.0)).collect::<Vec<f64>>();
    let p_actual = power_series(&clip(&actual), &turbine);
    let p_pred = power_series(&clip(&pred), &turbine);
    let events = detect_ramps(&p_actual, a.threshold, &turbine)?;
    let ramps: RampErrors = ramp_errors(&p_actual, &p_pred, &events, turbine.nominal_power())?;
    let r = EvaluationReport::new(&a.name, &m, &ramps, 0.0);
    println!("model,rmse,nmse,r2,u1,u2,r_up,r_down");
    println!(
        "{},{},{},{},{},{},{},{}",
        r.model_id,
        fmt_opt(r.rmse),
        fmt_opt(r.nmse),
        fmt_opt(r.r2),
        fmt_opt(r.u1),
        fmt_opt(r.u2),
        fmt_opt(r.r_up),
        fmt_opt(r.r_down)
    );
    Ok(())
}

fn entropy(a: EntropyArgs) -> Result<()> {
    let speeds = read_column(&a.input, a.column.as_deref())?;
    let e = entropy_analysis(&speeds, &TurbineSpec::default())?;
    println!("wt_entropy,emd_entropy,n_imfs");
    println!("{},{},{}", e.wt_entropy, e.emd_entropy, e.n_imfs);
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let dir = a
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let data = load_data(&cfg)?;
    let out = run_experiment(&cfg, &data)?;
    out.write_artifacts(&dir, a.svg || cfg.svg)?;
    for r in out.runs.iter().filter(|r| !r.report.is_ok()) {
        eprintln!("{}", one_line(&summary_line(&r.report)));
    }
    print!("{}", rampcast::evalx::render_table(&out.reports()));
    println!();
    print!("{}", out.entropy_table());
    Ok(())
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
