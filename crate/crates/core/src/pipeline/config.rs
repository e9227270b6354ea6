//! Experiment configuration and its flat TOML file form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::models::{ModelKind, ModelSettings};
use crate::atmos::TurbineSpec;
use crate::data_io::{SiteKind, SiteSpec, DEFAULT_MEASUREMENT_HEIGHT};
use crate::ensembles::{ForestParams, GbmParams, PersistenceMode};
use crate::error::{Error, Result};
use crate::evalx::U2Form;

/// Length of March at 10-minute resolution.
pub const MARCH_10MIN_SAMPLES: usize = 4464;
pub const DEFAULT_DT: i64 = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decomposition {
    /// One decomposition of the whole series before splitting.
    #[default]
    Full,
    /// Training-only decomposition; test rows from growing prefixes.
    Causal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf, dt: i64, height: f64 },
    Synthetic { n: usize, dt: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub site: SiteSpec,
    pub turbine: TurbineSpec,
    pub models: Vec<ModelKind>,
    pub threshold_frac: f64,
    pub split_frac: f64,
    pub grid: Grid,
    pub seed: u64,
    pub settings: ModelSettings,
    /// Kernel models train on at most this many of the most recent training
    /// rows; 0 keeps them all.
    pub kernel_train_rows: usize,
    pub holdout_frac: f64,
    pub decomposition: Decomposition,
    pub u2_form: U2Form,
    pub data: DataSource,
    pub output_dir: Option<PathBuf>,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    /// All seven models on a synthetic Amrumbank month with the desk grid.
    fn default() -> Self {
        let seed = 7;
        Self {
            site: SiteSpec::lookup("amrumbank").expect("built-in site"),
            turbine: TurbineSpec::default(),
            models: ModelKind::ALL.to_vec(),
            threshold_frac: 0.10,
            split_frac: 0.80,
            grid: Grid::desk(),
            seed,
            settings: ModelSettings {
                forest: ForestParams {
                    seed,
                    ..ForestParams::default()
                },
                ..ModelSettings::default()
            },
            kernel_train_rows: 1000,
            holdout_frac: 0.25,
            decomposition: Decomposition::Full,
            u2_form: U2Form::AsPrinted,
            data: DataSource::Synthetic {
                n: MARCH_10MIN_SAMPLES,
                dt: DEFAULT_DT,
            },
            output_dir: None,
            svg: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        open_unit("threshold_frac", self.threshold_frac)?;
        open_unit("split_frac", self.split_frac)?;
        open_unit("holdout_frac", self.holdout_frac)?;
        if self.models.is_empty() {
            return Err(Error::Config("no models selected".into()));
        }
        if self.grid.candidates().is_empty() && self.models.iter().any(|m| m.is_kernel()) {
            return Err(Error::Config("kernel models need a nonempty grid".into()));
        }
        self.turbine.validate()
    }

    /// Parses the flat TOML form. Relative paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.into_config(base)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path.parent())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ModelList {
    Csv(String),
    List(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    site: Option<String>,
    site_kind: Option<SiteKind>,
    z0: Option<f64>,
    mean_speed: Option<f64>,
    sd_speed: Option<f64>,

    input: Option<PathBuf>,
    n: Option<usize>,
    dt: Option<i64>,
    measurement_height: Option<f64>,
    seed: Option<u64>,

    models: Option<ModelList>,
    threshold_frac: Option<f64>,
    split_frac: Option<f64>,
    holdout_frac: Option<f64>,
    sigma_exp_min: Option<i32>,
    sigma_exp_max: Option<i32>,
    sigma_exp_step: Option<i32>,
    c_exp_min: Option<i32>,
    c_exp_max: Option<i32>,
    c_exp_step: Option<i32>,

    epsilon: Option<f64>,
    tsvr_delta: Option<f64>,
    eps_tsvr_c3: Option<f64>,
    sor_omega: Option<f64>,
    kernel_train_rows: Option<usize>,
    rfr_trees: Option<usize>,
    rfr_mtry: Option<usize>,
    rfr_min_leaf: Option<usize>,
    gbm_trees: Option<usize>,
    gbm_eta: Option<f64>,
    gbm_depth: Option<usize>,
    gbm_min_leaf: Option<usize>,
    persistence: Option<String>,

    decomposition: Option<Decomposition>,
    u2_form: Option<U2Form>,
    output_dir: Option<PathBuf>,
    svg: Option<bool>,

    rotor_diameter: Option<f64>,
    hub_height: Option<f64>,
    rated_speed: Option<f64>,
    cut_in: Option<f64>,
    cut_out: Option<f64>,
    air_density: Option<f64>,
    cp: Option<f64>,
}

impl RawConfig {
    fn into_config(self, base: Option<&Path>) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let resolve = |p: PathBuf| match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        };

        let mut site = match &self.site {
            Some(name) => SiteSpec::lookup(name).unwrap_or(SiteSpec {
                name: name.clone(),
                ..d.site.clone()
            }),
            None => d.site.clone(),
        };
        let custom = self.site.as_deref().is_some_and(|n| SiteSpec::lookup(n).is_none());
        if custom && (self.mean_speed.is_none() || self.sd_speed.is_none()) && self.input.is_none() {
            return Err(Error::Config(format!(
                "site '{}' is not built in; give mean_speed and sd_speed or an input file",
                site.name
            )));
        }
        if let Some(kind) = self.site_kind {
            site.kind = kind;
            site.z0 = kind.roughness_length();
        }
        site = SiteSpec::with_roughness(
            site.name,
            site.kind,
            self.z0.unwrap_or(site.z0),
            self.mean_speed.unwrap_or(site.mean_speed),
            self.sd_speed.unwrap_or(site.sd_speed),
        )?;

        let t = d.turbine;
        let turbine = TurbineSpec {
            rotor_diameter: self.rotor_diameter.unwrap_or(t.rotor_diameter),
            hub_height: self.hub_height.unwrap_or(t.hub_height),
            rated_speed: self.rated_speed.unwrap_or(t.rated_speed),
            cut_in: self.cut_in.unwrap_or(t.cut_in),
            cut_out: self.cut_out.unwrap_or(t.cut_out),
            air_density: self.air_density.unwrap_or(t.air_density),
            cp: self.cp.unwrap_or(t.cp),
        };

        let models = match self.models {
            None => d.models.clone(),
            Some(ModelList::Csv(s)) => s
                .split(',')
                .filter(|m| !m.trim().is_empty())
                .map(ModelKind::parse)
                .collect::<Result<_>>()?,
            Some(ModelList::List(v)) => v.iter().map(|m| ModelKind::parse(m)).collect::<Result<_>>()?,
        };

        let grid = Grid {
            sigmas: Grid::powers_of_two(
                self.sigma_exp_min.unwrap_or(-10),
                self.sigma_exp_max.unwrap_or(10),
                self.sigma_exp_step.unwrap_or(5),
            )?,
            cs: Grid::powers_of_two(
                self.c_exp_min.unwrap_or(-10),
                self.c_exp_max.unwrap_or(10),
                self.c_exp_step.unwrap_or(5),
            )?,
        };

        let seed = self.seed.unwrap_or(d.seed);
        let ds = d.settings;
        let settings = ModelSettings {
            epsilon: self.epsilon.unwrap_or(ds.epsilon),
            tsvr_delta: self.tsvr_delta.unwrap_or(ds.tsvr_delta),
            eps_tsvr_c3: self.eps_tsvr_c3.unwrap_or(ds.eps_tsvr_c3),
            sor_omega: self.sor_omega.unwrap_or(ds.sor_omega),
            forest: ForestParams {
                n_trees: self.rfr_trees.unwrap_or(ds.forest.n_trees),
                mtry: self.rfr_mtry.or(ds.forest.mtry),
                min_leaf: self.rfr_min_leaf.unwrap_or(ds.forest.min_leaf),
                seed,
                ..ds.forest
            },
            gbm: GbmParams {
                n_trees: self.gbm_trees.unwrap_or(ds.gbm.n_trees),
                eta: self.gbm_eta.unwrap_or(ds.gbm.eta),
                max_depth: self.gbm_depth.unwrap_or(ds.gbm.max_depth),
                min_leaf: self.gbm_min_leaf.unwrap_or(ds.gbm.min_leaf),
            },
            persistence: match &self.persistence {
                Some(s) => PersistenceMode::parse(s)?,
                None => ds.persistence,
            },
        };

        let dt = self.dt.unwrap_or(DEFAULT_DT);
        let data = match self.input {
            Some(path) => DataSource::Csv {
                path: resolve(path),
                dt,
                height: self.measurement_height.unwrap_or(DEFAULT_MEASUREMENT_HEIGHT),
            },
            None => DataSource::Synthetic {
                n: self.n.unwrap_or(MARCH_10MIN_SAMPLES),
                dt,
            },
        };

        let cfg = ExperimentConfig {
            site,
            turbine,
            models,
            threshold_frac: self.threshold_frac.unwrap_or(d.threshold_frac),
            split_frac: self.split_frac.unwrap_or(d.split_frac),
            grid,
            seed,
            settings,
            kernel_train_rows: self.kernel_train_rows.unwrap_or(d.kernel_train_rows),
            holdout_frac: self.holdout_frac.unwrap_or(d.holdout_frac),
            decomposition: self.decomposition.unwrap_or_default(),
            u2_form: self.u2_form.unwrap_or_default(),
            data,
            output_dir: self.output_dir.map(resolve),
            svg: self.svg.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ExperimentConfig::from_toml_str("", None).unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn full_file() {
        let text = r#"
            site = "Horns Rev 2"
            seed = 11
            models = "persistence, gbm,eps-tsvr"
            threshold_frac = 0.2
            sigma_exp_min = -2
            sigma_exp_max = 2
            sigma_exp_step = 1
            gbm_trees = 50
            input = "data/speeds.csv"
            output_dir = "out"
            decomposition = "causal"
            hub_height = 100.0
        "#;
        let c = ExperimentConfig::from_toml_str(text, Some(Path::new("/cfg"))).unwrap();
        assert_eq!(c.site.name, "horns_rev_2");
        assert_eq!(c.models, vec![ModelKind::Persistence, ModelKind::Gbm, ModelKind::EpsTsvr]);
        assert_eq!(c.grid.sigmas.len(), 5);
        assert_eq!(c.grid.cs.len(), 5);
        assert_eq!(c.settings.gbm.n_trees, 50);
        assert_eq!(c.settings.forest.seed, 11);
        assert_eq!(c.turbine.hub_height, 100.0);
        assert_eq!(c.decomposition, Decomposition::Causal);
        assert_eq!(c.output_dir, Some(PathBuf::from("/cfg/out")));
        assert!(matches!(c.data, DataSource::Csv { ref path, .. } if path == Path::new("/cfg/data/speeds.csv")));
    }

    #[test]
    fn models_as_list_and_custom_site() {
        let text = r#"
            models = ["lssvr", "rfr"]
            site = "test farm"
            site_kind = "onshore"
            mean_speed = 5.0
            sd_speed = 1.0
        "#;
        let c = ExperimentConfig::from_toml_str(text, None).unwrap();
        assert_eq!(c.models, vec![ModelKind::Lssvr, ModelKind::Rfr]);
        assert_eq!(c.site.z0, 0.005);
        assert_eq!(c.site.mean_speed, 5.0);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "unknown_key = 1",
            "threshold_frac = 1.5",
            "models = \"svm\"",
            "site = \"nowhere\"",
            "split_frac = 0",
            "c_exp_step = 0",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml_str(text, None), Err(Error::Config(_))),
                "{text}"
            );
        }
    }
}
