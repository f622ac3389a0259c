//! TOML problem files.
//!
//! ```toml
//! dim = 3
//! radius = 16.0
//! grid_points = 1024
//! dt0 = 1e-3
//! t_end = 1.0
//!
//! [h]
//! terms = [[1.0, 0.5]]
//!
//! [V]
//! c = 1.0
//! m = 1.0
//! sign = -1
//! bounded = 0.0
//! epsilon = 1e-3
//!
//! [u0]
//! amplitude = 1.0
//! sigma = 1.0
//! chirp = 0.0
//!
//! [stepper]          # optional, every key optional
//! record_every = 10
//! ```

use serde::{Deserialize, Serialize};

use crate::diagnostics::RecordSettings;
use crate::error::{Error, Result};
use crate::model::{InitialData, Nonlinearity, Potential, PowerTerm, ProblemSpec, Sign, DEFAULT_EPSILON};
use crate::solver::StepperConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dim: usize,
    pub radius: f64,
    pub grid_points: usize,
    pub dt0: f64,
    pub t_end: f64,
    #[serde(default)]
    pub h: HSection,
    #[serde(rename = "V", default)]
    pub v: VSection,
    pub u0: U0Section,
    #[serde(default)]
    pub stepper: StepperSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HSection {
    #[serde(default)]
    pub terms: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VSection {
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub m: f64,
    #[serde(default = "plus_one")]
    pub sign: f64,
    #[serde(default)]
    pub bounded: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn plus_one() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for VSection {
    fn default() -> Self {
        Self {
            c: 0.0,
            m: 0.0,
            sign: 1.0,
            bounded: 0.0,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct U0Section {
    pub amplitude: f64,
    pub sigma: f64,
    #[serde(default)]
    pub chirp: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    pub dt_min: Option<f64>,
    pub cn_tol: Option<f64>,
    pub cn_max_iter: Option<usize>,
    pub blowup_factor: Option<f64>,
    pub record_every: Option<usize>,
    pub max_rel_change: Option<f64>,
    pub boundary_tol: Option<f64>,
    pub lr_exponent: Option<f64>,
    pub morawetz_lambda: Option<f64>,
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map_or((0, 0), |span| line_column(text, span.start));
            Error::Config {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let h = Nonlinearity::new(
            self.h
                .terms
                .iter()
                .map(|&[coeff, exponent]| PowerTerm { coeff, exponent })
                .collect(),
        )?;
        let v = &self.v;
        let potential = Potential::new(v.c, v.m, Sign::from_factor(v.sign)?, v.bounded, v.epsilon)?;
        let spec = ProblemSpec {
            dim: self.dim,
            h,
            potential,
            initial: InitialData::gaussian(self.u0.amplitude, self.u0.sigma, self.u0.chirp),
            radius: self.radius,
            grid_points: self.grid_points,
            dt0: self.dt0,
            t_end: self.t_end,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        let mut cfg = StepperConfig::new(self.dt0);
        let s = &self.stepper;
        let defaults = RecordSettings::default();
        cfg.dt_min = s.dt_min.unwrap_or(cfg.dt_min);
        cfg.cn_tol = s.cn_tol.unwrap_or(cfg.cn_tol);
        cfg.cn_max_iter = s.cn_max_iter.unwrap_or(cfg.cn_max_iter);
        cfg.blowup_factor = s.blowup_factor.unwrap_or(cfg.blowup_factor);
        cfg.record_every = s.record_every.unwrap_or(cfg.record_every);
        cfg.max_rel_change = s.max_rel_change.unwrap_or(cfg.max_rel_change);
        cfg.boundary_tol = s.boundary_tol.unwrap_or(cfg.boundary_tol);
        cfg.record = RecordSettings {
            lr_exponent: s.lr_exponent.unwrap_or(defaults.lr_exponent),
            morawetz_lambda: s.morawetz_lambda.unwrap_or(defaults.morawetz_lambda),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`ConfigFile::problem`] for Gaussian data.
    pub fn from_problem(spec: &ProblemSpec, cfg: &StepperConfig) -> Result<Self> {
        let InitialData::Gaussian {
            amplitude,
            sigma,
            chirp,
        } = spec.initial
        else {
            return Err(Error::Usage("only Gaussian initial data has a file form".into()));
        };
        Ok(Self {
            dim: spec.dim,
            radius: spec.radius,
            grid_points: spec.grid_points,
            dt0: spec.dt0,
            t_end: spec.t_end,
            h: HSection {
                terms: spec.h.terms().iter().map(|t| [t.coeff, t.exponent]).collect(),
            },
            v: VSection {
                c: spec.potential.c,
                m: spec.potential.m,
                sign: spec.potential.sign.factor(),
                bounded: spec.potential.bounded,
                epsilon: spec.potential.epsilon,
            },
            u0: U0Section {
                amplitude,
                sigma,
                chirp,
            },
            stepper: StepperSection {
                dt_min: Some(cfg.dt_min),
                cn_tol: Some(cfg.cn_tol),
                cn_max_iter: Some(cfg.cn_max_iter),
                blowup_factor: Some(cfg.blowup_factor),
                record_every: Some(cfg.record_every),
                max_rel_change: Some(cfg.max_rel_change),
                boundary_tol: Some(cfg.boundary_tol),
                lr_exponent: Some(cfg.record.lr_exponent),
                morawetz_lambda: Some(cfg.record.morawetz_lambda),
            },
        })
    }
}
