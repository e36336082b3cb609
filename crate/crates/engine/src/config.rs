//! Engine configuration: a flat TOML document whose keys are the detector
//! parameter names. Unknown keys are rejected so a misspelt threshold cannot
//! silently fall back to its default.

use std::path::Path;

use aura_core::agitation::{AgitationParams, VelocityPooling};
use aura_core::collision::CollisionParams;
use aura_core::geometry::{AuraMode, AuraVariant};
use aura_core::metrics::{DEFAULT_REPLICATES, DEFAULT_SEED};
use aura_core::DetectorParams;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Fixed,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolingName {
    PerTransition,
    PerKeypoint,
}

/// On-disk form. Every key is optional and defaults to the calibrated value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub tau_base: f64,
    pub r_m: f64,
    pub r_h: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau_score: f64,
    pub tau_duration: f64,
    pub tau_speed: f64,
    pub tau_valid: f64,
    pub w: usize,
    pub aura_mode: ModeName,
    pub lambda: f64,
    pub s_r: f64,
    pub velocity_pooling: PoolingName,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let c = CollisionParams::default();
        let a = AgitationParams::default();
        Self {
            tau_base: c.tau_base,
            r_m: c.r_m_base,
            r_h: c.r_h_base,
            alpha: c.alpha,
            beta: c.beta,
            tau_score: c.tau_score,
            tau_duration: c.tau_duration,
            tau_speed: a.tau_speed,
            tau_valid: c.tau_valid,
            w: a.window,
            aura_mode: ModeName::Fixed,
            lambda: c.mode.lambda,
            s_r: c.mode.s_r,
            velocity_pooling: PoolingName::PerTransition,
            bootstrap: DEFAULT_REPLICATES,
            seed: DEFAULT_SEED,
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub detector: DetectorParams,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        ConfigFile::default().into_config().expect("defaults are valid")
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<ModeName>,
    pub lambda: Option<f64>,
    pub s_r: Option<f64>,
    pub bootstrap: Option<usize>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| EngineError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| EngineError::io(path, e))?;
        Self::parse(&text).map_err(|e| EngineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.mode {
            self.aura_mode = m;
        }
        if let Some(l) = o.lambda {
            self.lambda = l;
        }
        if let Some(s) = o.s_r {
            self.s_r = s;
        }
        if let Some(b) = o.bootstrap {
            self.bootstrap = b;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    pub fn into_config(self) -> Result<EngineConfig> {
        let mode = AuraMode {
            variant: match self.aura_mode {
                ModeName::Fixed => AuraVariant::Fixed,
                ModeName::Relative => AuraVariant::Relative,
            },
            lambda: self.lambda,
            s_r: self.s_r,
        };
        let collision = CollisionParams {
            tau_base: self.tau_base,
            alpha: self.alpha,
            beta: self.beta,
            tau_score: self.tau_score,
            tau_duration: self.tau_duration,
            tau_valid: self.tau_valid,
            mode,
            r_m_base: self.r_m,
            r_h_base: self.r_h,
        };
        let agitation = AgitationParams {
            tau_speed: self.tau_speed,
            window: self.w,
            tau_valid: self.tau_valid,
            tracked: None,
            pooling: match self.velocity_pooling {
                PoolingName::PerTransition => VelocityPooling::PerTransition,
                PoolingName::PerKeypoint => VelocityPooling::PerKeypoint,
            },
        };
        let detector = DetectorParams { collision, agitation };
        detector.validate().map_err(|e| EngineError::Config(e.to_string()))?;
        if self.bootstrap == 0 {
            return Err(EngineError::Config("bootstrap must be at least 1".into()));
        }
        Ok(EngineConfig {
            detector,
            bootstrap: self.bootstrap,
            seed: self.seed,
        })
    }
}

impl EngineConfig {
    /// Loads `path` (or the defaults), applies overrides and validates.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut file = match path {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        file.apply(overrides);
        file.into_config()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_calibrated_defaults() {
        let c = ConfigFile::parse("").unwrap().into_config().unwrap();
        assert_eq!(c.detector, DetectorParams::default());
        assert_eq!(c.detector.collision.r_m_base, 150.0);
        assert_eq!(c.detector.collision.r_h_base, 100.0);
        assert_eq!(c.detector.agitation.window, 5);
        assert_eq!(c.detector.collision.mode.variant, AuraVariant::Fixed);
        assert_eq!(c.detector.collision.mode.s_r, 1.0);
        assert_eq!(c.bootstrap, 1000);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = ConfigFile::parse("tau_scor = 0.4\n").unwrap_err();
        assert!(err.to_string().contains("tau_scor"), "{err}");
    }

    #[test]
    fn integers_accepted_for_real_keys() {
        let c = ConfigFile::parse("r_m = 200\nw = 7\naura_mode = \"relative\"\n").unwrap();
        assert_eq!(c.r_m, 200.0);
        assert_eq!(c.w, 7);
        assert_eq!(c.aura_mode, ModeName::Relative);
    }

    #[test]
    fn invalid_values_fail_validation() {
        for doc in [
            "tau_valid = 1.5",
            "w = 1",
            "alpha = -0.1",
            "tau_score = 0",
            "bootstrap = 0",
            "lambda = 0",
        ] {
            let parsed = ConfigFile::parse(doc).unwrap();
            let mut relative = parsed.clone();
            relative.aura_mode = ModeName::Relative;
            assert!(
                parsed.into_config().is_err() || relative.into_config().is_err(),
                "{doc} should be rejected"
            );
        }
    }

    #[test]
    fn tau_valid_reaches_both_detectors() {
        let c = ConfigFile::parse("tau_valid = 0.63").unwrap().into_config().unwrap();
        assert_eq!(c.detector.collision.tau_valid, 0.63);
        assert_eq!(c.detector.agitation.tau_valid, 0.63);
    }

    #[test]
    fn overrides_win_over_file() {
        let mut f = ConfigFile::parse("s_r = 1.1\nseed = 3").unwrap();
        f.apply(&Overrides {
            mode: Some(ModeName::Relative),
            lambda: Some(2.5),
            s_r: Some(0.9),
            bootstrap: Some(10),
            seed: None,
        });
        let c = f.into_config().unwrap();
        assert_eq!(
            c.detector.collision.mode,
            AuraMode {
                variant: AuraVariant::Relative,
                lambda: 2.5,
                s_r: 0.9
            }
        );
        assert_eq!((c.bootstrap, c.seed), (10, 3));
    }
}
