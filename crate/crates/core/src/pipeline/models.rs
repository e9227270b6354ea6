use serde::{Deserialize, Serialize};

use crate::ensembles::{
    fit_gbm, fit_rfr, persistence_forecast, ForestModel, ForestParams, GbmModel, GbmParams,
    PersistenceMode,
};
use crate::error::{Error, Result};
use crate::svr::{
    self, EpsTsvrParams, Kernel, SvrModel, SvrParams, SvrVariant, TsvrParams, DEFAULT_EPSILON,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Persistence,
    EpsSvr,
    Lssvr,
    Tsvr,
    EpsTsvr,
    Rfr,
    Gbm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Persistence,
        ModelKind::EpsSvr,
        ModelKind::Lssvr,
        ModelKind::Tsvr,
        ModelKind::EpsTsvr,
        ModelKind::Rfr,
        ModelKind::Gbm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Persistence => "persistence",
            ModelKind::EpsSvr => "eps_svr",
            ModelKind::Lssvr => "lssvr",
            ModelKind::Tsvr => "tsvr",
            ModelKind::EpsTsvr => "eps_tsvr",
            ModelKind::Rfr => "rfr",
            ModelKind::Gbm => "gbm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', 'ε'], "_");
        let key = key.trim_start_matches('_');
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == key || k.as_str().replace('_', "") == key)
            .ok_or_else(|| Error::Config(format!("unknown model '{s}'")))
    }

    pub fn svr_variant(self) -> Option<SvrVariant> {
        match self {
            ModelKind::EpsSvr => Some(SvrVariant::EpsSvr),
            ModelKind::Lssvr => Some(SvrVariant::Lssvr),
            ModelKind::Tsvr => Some(SvrVariant::Tsvr),
            ModelKind::EpsTsvr => Some(SvrVariant::EpsTsvr),
            _ => None,
        }
    }

    pub fn is_kernel(self) -> bool {
        self.svr_variant().is_some()
    }
}

/// Fixed hyperparameters of every model except the grid-searched (σ, C).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSettings {
    pub epsilon: f64,
    pub tsvr_delta: f64,
    pub eps_tsvr_c3: f64,
    pub sor_omega: f64,
    pub forest: ForestParams,
    pub gbm: GbmParams,
    pub persistence: PersistenceMode,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            tsvr_delta: 1e-7,
            eps_tsvr_c3: 1e-3,
            sor_omega: 1.0,
            forest: ForestParams::default(),
            gbm: GbmParams::default(),
            persistence: PersistenceMode::default(),
        }
    }
}

impl ModelSettings {
    /// Maps a grid value C onto the variant's hyperparameters: C for ε-SVR,
    /// γ = C for LSSVR, C1 = C2 = C for the twin variants.
    pub fn svr_params(&self, variant: SvrVariant, c: f64) -> SvrParams {
        let eps = self.epsilon;
        match variant {
            SvrVariant::EpsSvr => SvrParams::EpsSvr { c, eps },
            SvrVariant::Lssvr => SvrParams::Lssvr { gamma: c },
            SvrVariant::Tsvr => SvrParams::Tsvr(TsvrParams {
                delta: self.tsvr_delta,
                ..TsvrParams::new(c, c, eps, eps)
            }),
            SvrVariant::EpsTsvr => SvrParams::EpsTsvr(EpsTsvrParams {
                omega: self.sor_omega,
                ..EpsTsvrParams::new(c, c, self.eps_tsvr_c3, self.eps_tsvr_c3, eps, eps)
            }),
        }
    }

    pub fn fit_svr(&self, variant: SvrVariant, x: &[Vec<f64>], y: &[f64], sigma: f64, c: f64) -> Result<SvrModel> {
        svr::fit(x, y, Kernel::rbf(sigma)?, self.svr_params(variant, c))
    }
}

/// Any trained forecaster, serializable for the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum TrainedModel {
    Persistence { mode: PersistenceMode },
    Svr(SvrModel),
    Forest(ForestModel),
    Gbm(GbmModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Persistence { .. } => ModelKind::Persistence,
            TrainedModel::Svr(m) => match m.variant() {
                SvrVariant::EpsSvr => ModelKind::EpsSvr,
                SvrVariant::Lssvr => ModelKind::Lssvr,
                SvrVariant::Tsvr => ModelKind::Tsvr,
                SvrVariant::EpsTsvr => ModelKind::EpsTsvr,
            },
            TrainedModel::Forest(_) => ModelKind::Rfr,
            TrainedModel::Gbm(_) => ModelKind::Gbm,
        }
    }

    /// Predicts targets for consecutive feature rows. Persistence reads s(t)
    /// back as the row's band sum.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        match self {
            TrainedModel::Persistence { mode } => {
                let s: Vec<f64> = x.iter().map(|r| r.iter().sum()).collect();
                match s.len() {
                    0 => Ok(Vec::new()),
                    1 => Ok(s),
                    _ => persistence_forecast(&s, *mode),
                }
            }
            TrainedModel::Svr(m) => m.predict(x),
            TrainedModel::Forest(m) => m.predict(x),
            TrainedModel::Gbm(m) => m.predict(x),
        }
    }
}

/// Fits a non-kernel model on the given rows.
pub fn fit_fixed(kind: ModelKind, x: &[Vec<f64>], y: &[f64], settings: &ModelSettings) -> Result<TrainedModel> {
    match kind {
        ModelKind::Persistence => Ok(TrainedModel::Persistence {
            mode: settings.persistence,
        }),
        ModelKind::Rfr => fit_rfr(x, y, settings.forest).map(TrainedModel::Forest),
        ModelKind::Gbm => fit_gbm(x, y, settings.gbm).map(TrainedModel::Gbm),
        other => Err(Error::Config(format!(
            "{} needs kernel hyperparameters",
            other.as_str()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(ModelKind::parse(k.as_str()).unwrap(), k);
        }
        assert_eq!(ModelKind::parse("EPS-TSVR").unwrap(), ModelKind::EpsTsvr);
        assert_eq!(ModelKind::parse("epstsvr").unwrap(), ModelKind::EpsTsvr);
        assert!(ModelKind::parse("mlp").is_err());
    }

    #[test]
    fn grid_value_mapping() {
        let s = ModelSettings::default();
        assert_eq!(s.svr_params(SvrVariant::Lssvr, 8.0), SvrParams::Lssvr { gamma: 8.0 });
        match s.svr_params(SvrVariant::EpsTsvr, 2.0) {
            SvrParams::EpsTsvr(p) => {
                assert_eq!((p.c1, p.c2), (2.0, 2.0));
                assert_eq!(p.c3, s.eps_tsvr_c3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn persistence_from_band_sums() {
        let rows = vec![vec![4.0, 0.0], vec![5.0, 1.0]];
        let m = TrainedModel::Persistence {
            mode: PersistenceMode::TwoWindow,
        };
        assert_eq!(m.predict(&rows).unwrap(), vec![4.0, 8.0]);
    }
}
