//! Scenario files: one JSON document per run.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use lagput::fd::{PsorOptions, StudyGrid};
use lagput::{LagContract, MarketParams};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StudyName {
    LagMonotonicity,
    SmallLag,
    LargeMaturity,
}

/// Study settings; anything left out takes the study's default.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySettings {
    pub name: Option<StudyName>,
    pub lags: Option<Vec<f64>>,
    pub tau_max: Option<f64>,
    pub value_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub market: MarketParams,
    pub contract: LagContract,
    /// Stock price for the reported value; defaults to the strike.
    #[serde(default)]
    pub spot: Option<f64>,
    #[serde(default)]
    pub grid: StudyGrid,
    #[serde(default)]
    pub psor: PsorOptions,
    #[serde(default)]
    pub study: StudySettings,
    /// Output directory used when `--out` is not given.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        let s: Scenario = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        s.psor.validate().map_err(|e| Failure::Input(e.to_string()))?;
        if let Some(spot) = s.spot {
            if !(spot > 0.0 && spot.is_finite()) {
                return Err(Failure::Input(format!("spot must be positive, got {spot}")));
            }
        }
        Ok(s)
    }

    pub fn spot(&self) -> f64 {
        self.spot.unwrap_or(self.market.strike())
    }

    pub fn out_dir(&self, flag: Option<&Path>) -> Result<PathBuf, Failure> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .ok_or_else(|| Failure::Input("no output directory: pass --out or set output_dir".into()))
    }
}
