use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{DataSource, Decomposition, ExperimentConfig};
use super::entropy::{entropy_analysis, EntropyResult};
use super::features::{build_features, build_features_causal, FeatureMatrix};
use super::grid::{grid_search, GridOutcome};
use super::models::{fit_fixed, ModelKind, TrainedModel};
use super::svg::line_chart;
use crate::atmos::{detect_ramps, export_ramps, log_law_transform, power_curve, RampEvent};
use crate::data_io::{load_csv, synth_series, write_columns, SplitIndex, WindSeries};
use crate::ensembles::persistence_forecast;
use crate::error::{Error, Result};
use crate::evalx::{
    fmt_opt, metrics_with, ramp_errors, timed, write_report_csv, write_text, write_timing_csv,
    EvaluationReport,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRun {
    pub kind: ModelKind,
    pub report: EvaluationReport,
    /// Test-window speed forecasts; `None` when the model failed.
    pub predictions: Option<Vec<f64>>,
    pub grid: Option<GridOutcome>,
    pub entropy: Option<EntropyResult>,
    pub entropy_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub hub_speed: WindSeries,
    pub power: Vec<f64>,
    pub features: FeatureMatrix,
    pub train_rows: usize,
    /// Actual hub-height speed at each test row's target timestep.
    pub test_actual: Vec<f64>,
    pub test_power: Vec<f64>,
    /// Ramps of the test-window power; indices are test-row positions.
    pub events: Vec<RampEvent>,
    pub runs: Vec<ModelRun>,
    pub actual_entropy: Option<EntropyResult>,
}

impl ExperimentOutput {
    pub fn reports(&self) -> Vec<EvaluationReport> {
        self.runs.iter().map(|r| r.report.clone()).collect()
    }

    pub fn run(&self, kind: ModelKind) -> Option<&ModelRun> {
        self.runs.iter().find(|r| r.kind == kind)
    }

    /// Test-row target timestamps.
    pub fn test_timestamps(&self) -> Vec<i64> {
        let ts = self.hub_speed.timestamps();
        self.features.index_map[self.train_rows..]
            .iter()
            .map(|&t| ts[t + 1])
            .collect()
    }

    pub fn entropy_table(&self) -> String {
        let mut out = format!("{:<12} {:>16} {:>16}\n", "Signal", "WT entropy", "EMD entropy");
        let rows = self
            .actual_entropy
            .iter()
            .map(|e| ("actual", Some(e)))
            .chain(self.runs.iter().map(|r| (r.kind.as_str(), r.entropy.as_ref())));
        for (name, e) in rows {
            let (w, m) = e.map_or((None, None), |e| (Some(e.wt_entropy), Some(e.emd_entropy)));
            let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4e}"));
            let _ = writeln!(out, "{name:<12} {:>16} {:>16}", cell(w), cell(m));
        }
        out
    }

    /// Writes report.csv, timing.csv, bands.csv, predictions.csv, ramps.csv,
    /// entropy.csv and optionally forecast.svg into `dir`.
    pub fn write_artifacts(&self, dir: &Path, svg: bool) -> Result<()> {
        let reports = self.reports();
        write_report_csv(&dir.join("report.csv"), &reports)?;
        write_timing_csv(&dir.join("timing.csv"), &reports)?;

        let ts: Vec<i64> = self
            .features
            .index_map
            .iter()
            .map(|&t| self.hub_speed.timestamps()[t])
            .collect();
        let band_cols: Vec<Vec<f64>> = (0..self.features.dim())
            .map(|j| self.features.rows.iter().map(|r| r[j]).collect())
            .collect();
        let named: Vec<(&str, &[f64])> = self
            .features
            .names
            .iter()
            .zip(&band_cols)
            .map(|(n, c)| (n.as_str(), c.as_slice()))
            .chain(std::iter::once(("target", self.features.targets.as_slice())))
            .collect();
        write_columns(dir.join("bands.csv"), Some(&ts), &named)?;

        let test_ts = self.test_timestamps();
        let mut cols: Vec<(&str, &[f64])> = vec![("actual", &self.test_actual)];
        for r in &self.runs {
            if let Some(p) = &r.predictions {
                cols.push((r.kind.as_str(), p));
            }
        }
        write_columns(dir.join("predictions.csv"), Some(&test_ts), &cols)?;
        export_ramps(&self.events, dir.join("ramps.csv"))?;

        let mut text = String::from("signal,wt_entropy,emd_entropy,status\n");
        if let Some(e) = &self.actual_entropy {
            let _ = writeln!(text, "actual,{},{},ok", e.wt_entropy, e.emd_entropy);
        }
        for r in &self.runs {
            match (&r.entropy, &r.entropy_error) {
                (Some(e), _) => {
                    let _ = writeln!(text, "{},{},{},ok", r.kind.as_str(), e.wt_entropy, e.emd_entropy);
                }
                (None, err) => {
                    let status = err.as_deref().unwrap_or("model failed").replace(',', ";");
                    let _ = writeln!(text, "{},NA,NA,error: {status}", r.kind.as_str());
                }
            }
        }
        write_text(&dir.join("entropy.csv"), &text)?;

        if svg {
            let chart = line_chart("Test-window hub-height speed (m/s)", &cols);
            write_text(&dir.join("forecast.svg"), &chart)?;
        }
        Ok(())
    }
}

/// Reads the configured CSV or generates the synthetic series.
pub fn load_data(cfg: &ExperimentConfig) -> Result<WindSeries> {
    match &cfg.data {
        DataSource::Csv { path, dt, height } => load_csv(path, *dt)?.with_height(*height),
        DataSource::Synthetic { n, dt } => synth_series(&cfg.site, *n, *dt, cfg.seed),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, data: &WindSeries) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let hub = log_law_transform(data, cfg.site.z0, cfg.turbine.hub_height)?;
    let speed = hub.values();
    let power: Vec<f64> = speed.iter().map(|&v| power_curve(v, &cfg.turbine)).collect();

    let split = SplitIndex::new(speed.len() - 1, cfg.split_frac, 2)?;
    let train_rows = split.train_end;
    let features = match cfg.decomposition {
        Decomposition::Full => build_features(speed)?,
        Decomposition::Causal => build_features_causal(speed, train_rows)?,
    };
    let train = features.slice(0..train_rows);
    let test = features.slice(train_rows..features.len());
    let test_actual = test.targets.clone();
    let test_power: Vec<f64> = test.index_map.iter().map(|&t| power[t + 1]).collect();
    let events = detect_ramps(&test_power, cfg.threshold_frac, &cfg.turbine)?;
    let p_nom = cfg.turbine.nominal_power();

    let actual_entropy = entropy_analysis(&test_actual, &cfg.turbine).ok();

    let mut runs = Vec::with_capacity(cfg.models.len());
    for &kind in &cfg.models {
        let fitted = forecast(kind, cfg, speed, &train, &test);
        let run = match fitted {
            Ok((pred, grid, secs)) => {
                let scored = metrics_with(&test_actual, &pred, cfg.u2_form).and_then(|m| {
                    let pred_power: Vec<f64> =
                        pred.iter().map(|&v| power_curve(v.max(0.0), &cfg.turbine)).collect();
                    let ramps = ramp_errors(&test_power, &pred_power, &events, p_nom)?;
                    Ok(EvaluationReport::new(kind.as_str(), &m, &ramps, secs))
                });
                match scored {
                    Ok(report) => {
                        let (entropy, entropy_error) = match entropy_analysis(&pred, &cfg.turbine) {
                            Ok(e) => (Some(e), None),
                            Err(e) => (None, Some(e.to_string())),
                        };
                        ModelRun {
                            kind,
                            report,
                            predictions: Some(pred),
                            grid,
                            entropy,
                            entropy_error,
                        }
                    }
                    Err(e) => failed(kind, &e),
                }
            }
            Err(e) => failed(kind, &e),
        };
        runs.push(run);
    }

    Ok(ExperimentOutput {
        hub_speed: hub,
        power,
        features,
        train_rows,
        test_actual,
        test_power,
        events,
        runs,
        actual_entropy,
    })
}

fn failed(kind: ModelKind, e: &Error) -> ModelRun {
    ModelRun {
        kind,
        report: EvaluationReport::failed(kind.as_str(), e),
        predictions: None,
        grid: None,
        entropy: None,
        entropy_error: None,
    }
}

/// Test-window forecasts, the grid outcome for kernel models, and the
/// seconds spent on the final fit plus prediction.
fn forecast(
    kind: ModelKind,
    cfg: &ExperimentConfig,
    speed: &[f64],
    train: &FeatureMatrix,
    test: &FeatureMatrix,
) -> Result<(Vec<f64>, Option<GridOutcome>, f64)> {
    let settings = &cfg.settings;
    match kind {
        ModelKind::Persistence => {
            let (out, secs) = timed(|| {
                persistence_forecast(speed, settings.persistence)
                    .map(|f| test.index_map.iter().map(|&t| f[t]).collect::<Vec<f64>>())
            });
            Ok((out?, None, secs))
        }
        k if k.is_kernel() => {
            let variant = k.svr_variant().expect("kernel model");
            let rows = match cfg.kernel_train_rows {
                0 => train.clone(),
                cap => train.tail(cap),
            };
            let g = grid_search(&rows, variant, &cfg.grid, settings, cfg.holdout_frac)?;
            let (out, secs) = timed(|| {
                settings
                    .fit_svr(variant, &rows.rows, &rows.targets, g.sigma, g.c)
                    .and_then(|m| m.predict(&test.rows))
            });
            Ok((out?, Some(g), secs))
        }
        k => {
            let (out, secs) = timed(|| {
                fit_fixed(k, &train.rows, &train.targets, settings).and_then(|m| m.predict(&test.rows))
            });
            Ok((out?, None, secs))
        }
    }
}

/// Fits `kind` on every row of `features` (grid-searching kernel models) for
/// later use on new rows.
pub fn train_model(kind: ModelKind, cfg: &ExperimentConfig, features: &FeatureMatrix) -> Result<(TrainedModel, Option<GridOutcome>)> {
    let settings = &cfg.settings;
    match kind.svr_variant() {
        Some(variant) => {
            let rows = match cfg.kernel_train_rows {
                0 => features.clone(),
                cap => features.tail(cap),
            };
            let g = grid_search(&rows, variant, &cfg.grid, settings, cfg.holdout_frac)?;
            let m = settings.fit_svr(variant, &rows.rows, &rows.targets, g.sigma, g.c)?;
            Ok((TrainedModel::Svr(m), Some(g)))
        }
        None => Ok((fit_fixed(kind, &features.rows, &features.targets, settings)?, None)),
    }
}

/// `NA`-aware summary line for logs.
pub fn summary_line(r: &EvaluationReport) -> String {
    format!(
        "{}: rmse={} r_up={} r_down={} status={}",
        r.model_id,
        fmt_opt(r.rmse),
        fmt_opt(r.r_up),
        fmt_opt(r.r_down),
        r.status
    )
}
