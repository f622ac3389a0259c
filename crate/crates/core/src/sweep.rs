//! Parameter sweeps over a base problem file.
//!
//! Runs are independent; the caller decides how to schedule them. Rows are
//! always reported in parameter order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::criteria;
use crate::diagnostics::{fit_decay, Series};
use crate::error::{Error, Result};
use crate::solver::{self, RunStatus};

/// Start of the window used for the decay fit of each run.
pub const FIT_T_MIN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parameter {
    /// Exponent of the leading term of `h` (a unit term is created for `h = 0`).
    Alpha,
    /// Power of the singular potential (`c` defaults to 1 when unset).
    M,
    /// Chirp of the Gaussian.
    Beta,
    Amplitude,
}

impl Parameter {
    pub const ALL: [Parameter; 4] = [Parameter::Alpha, Parameter::M, Parameter::Beta, Parameter::Amplitude];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::Alpha => "alpha",
            Parameter::M => "m",
            Parameter::Beta => "beta",
            Parameter::Amplitude => "amplitude",
        }
    }

    /// Writes `value` into `cfg`.
    pub fn apply(self, cfg: &mut ConfigFile, value: f64) {
        match self {
            Parameter::Alpha => match cfg.h.terms.first_mut() {
                Some(term) => term[1] = value,
                None => cfg.h.terms.push([1.0, value]),
            },
            Parameter::M => {
                if cfg.v.c == 0.0 {
                    cfg.v.c = 1.0;
                }
                cfg.v.m = value;
            }
            Parameter::Beta => cfg.u0.chirp = value,
            Parameter::Amplitude => cfg.u0.amplitude = value,
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            Error::Usage(format!("unknown sweep parameter '{s}', expected alpha, m, beta or amplitude"))
        })
    }
}

/// `NAME:MIN:MAX:COUNT`, evenly spaced and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: Parameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(parameter: Parameter, min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Usage(format!("axis {parameter}: count must be >= 1")));
        }
        if !min.is_finite() || !max.is_finite() || max < min {
            return Err(Error::Usage(format!("axis {parameter}: need finite min <= max, got {min}..{max}")));
        }
        Ok(Self {
            parameter,
            min,
            max,
            count,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, min, max, count] = parts[..] else {
            return Err(Error::Usage(format!("axis '{s}' must look like NAME:MIN:MAX:COUNT")));
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("axis '{s}': '{x}' is not a number")))
        };
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Usage(format!("axis '{s}': count '{count}' is not a positive integer")))?;
        Axis::new(name.trim().parse()?, num(min)?, num(max)?, count)
    }
}

/// Cartesian product of the axes, first axis slowest.
pub fn grid_points(axes: &[Axis]) -> Result<Vec<Vec<(Parameter, f64)>>> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::Usage(format!("a sweep takes one or two axes, got {}", axes.len())));
    }
    if axes.len() == 2 && axes[0].parameter == axes[1].parameter {
        return Err(Error::Usage(format!("axis {} given twice", axes[0].parameter)));
    }
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values().into_iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.parameter, v));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Summary of a single sweep run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: Vec<(Parameter, f64)>,
    pub status: RunStatus,
    pub t_final: f64,
    pub fitted_l: Option<f64>,
    pub blowup_estimate: Option<f64>,
    /// `J(0) / (4 y(0))` when `y(0) > 0`.
    pub bound: Option<f64>,
    pub energy0: f64,
    pub max_gradient_ratio: f64,
}

/// Applies `point` to a copy of `base` and runs it.
pub fn run_point(base: &ConfigFile, point: &[(Parameter, f64)]) -> Result<SweepRow> {
    let mut cfg = base.clone();
    for &(p, v) in point {
        p.apply(&mut cfg, v);
    }
    let spec = cfg.problem()?;
    let stepper = cfg.stepper()?;
    let out = solver::run(&spec, &stepper)?;
    let r0 = &out.records[0];
    let fitted_l = if out.status == RunStatus::Completed {
        fit_decay(&out.records, Series::MorawetzDensity, FIT_T_MIN).ok().map(|f| f.l)
    } else {
        None
    };
    let g0 = r0.gradient_functional();
    let gmax = out
        .records
        .iter()
        .map(|r| r.gradient_functional())
        .fold(g0, f64::max);
    Ok(SweepRow {
        params: point.to_vec(),
        status: out.status,
        t_final: out.t_final,
        fitted_l,
        blowup_estimate: out.blowup_time_estimate,
        bound: criteria::blowup_time_bound(r0.variance, r0.virial).ok(),
        energy0: r0.energy,
        max_gradient_ratio: gmax / g0,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.10e}"))
}

/// Summary CSV: parameter columns, then the run columns.
pub fn summary_csv(axes: &[Axis], rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for a in axes {
        out.push_str(a.parameter.name());
        out.push(',');
    }
    out.push_str("status,t_final,fitted_l,blowup_estimate,bound,energy0,max_gradient_ratio\n");
    for row in rows {
        for (_, v) in &row.params {
            out.push_str(&format!("{v:.10e},"));
        }
        out.push_str(&format!(
            "{},{:.10e},{},{},{},{:.10e},{:.10e}\n",
            row.status,
            row.t_final,
            opt(row.fitted_l),
            opt(row.blowup_estimate),
            opt(row.bound),
            row.energy0,
            row.max_gradient_ratio
        ));
    }
    out
}

/// Where a one-axis sweep switches from completed runs to blowup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transition {
    /// Last completed value and first blowup value.
    Between(f64, f64),
    NoBlowup,
    /// Blowup already at the first value.
    BlowupEverywhere,
    /// Statuses are not a single completed-then-blowup run.
    NotMonotone,
}

pub fn locate_transition(rows: &[SweepRow]) -> Transition {
    let blown: Vec<bool> = rows.iter().map(|r| r.status == RunStatus::BlowupDetected).collect();
    let Some(first) = blown.iter().position(|&b| b) else {
        return Transition::NoBlowup;
    };
    if first == 0 {
        return Transition::BlowupEverywhere;
    }
    let clean = blown[first..].iter().all(|&b| b)
        && rows[..first].iter().all(|r| r.status == RunStatus::Completed);
    if !clean {
        return Transition::NotMonotone;
    }
    Transition::Between(rows[first - 1].params[0].1, rows[first].params[0].1)
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Between(a, b) => write!(f, "between {a} and {b}"),
            Transition::NoBlowup => f.write_str("no blowup at any value"),
            Transition::BlowupEverywhere => f.write_str("blowup at every value"),
            Transition::NotMonotone => f.write_str("statuses do not switch once"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: Axis = "m:1:3:9".parse().unwrap();
        assert_eq!(a.parameter, Parameter::M);
        let v = a.values();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 1.0);
        assert!((v[8] - 3.0).abs() < 1e-15);
        assert!((v[4] - 2.0).abs() < 1e-15);
        assert!("gamma:1:2:3".parse::<Axis>().is_err());
        assert!("m:1:2".parse::<Axis>().is_err());
        assert!("m:2:1:3".parse::<Axis>().is_err());
        assert!("m:1:2:0".parse::<Axis>().is_err());
        assert_eq!("beta:0.5:0.5:1".parse::<Axis>().unwrap().values(), vec![0.5]);
    }

    #[test]
    fn product_order() {
        let axes = ["alpha:0.3:0.5:3".parse().unwrap(), "m:1:2:2".parse().unwrap()];
        let pts = grid_points(&axes).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![(Parameter::Alpha, 0.3), (Parameter::M, 1.0)]);
        assert_eq!(pts[1], vec![(Parameter::Alpha, 0.3), (Parameter::M, 2.0)]);
        assert_eq!(pts[5][0].0, Parameter::Alpha);
        assert!(grid_points(&[]).is_err());
        assert!(grid_points(&[axes[1], axes[1]]).is_err());
    }

    fn row(m: f64, status: RunStatus) -> SweepRow {
        SweepRow {
            params: vec![(Parameter::M, m)],
            status,
            t_final: 0.0,
            fitted_l: None,
            blowup_estimate: None,
            bound: None,
            energy0: 0.0,
            max_gradient_ratio: 1.0,
        }
    }

    #[test]
    fn transitions() {
        use RunStatus::*;
        let rows = [row(1.0, Completed), row(2.0, Completed), row(3.0, BlowupDetected)];
        assert_eq!(locate_transition(&rows), Transition::Between(2.0, 3.0));
        assert_eq!(locate_transition(&rows[..2]), Transition::NoBlowup);
        assert_eq!(locate_transition(&rows[2..]), Transition::BlowupEverywhere);
        let mixed = [row(1.0, BlowupDetected), row(2.0, Completed)];
        assert_eq!(locate_transition(&mixed), Transition::BlowupEverywhere);
        let gap = [row(1.0, Completed), row(2.0, BlowupDetected), row(3.0, Completed)];
        assert_eq!(locate_transition(&gap), Transition::NotMonotone);
    }

    #[test]
    fn apply_fills_missing_pieces() {
        let mut cfg = ConfigFile::parse(
            "dim = 3\nradius = 16.0\ngrid_points = 64\ndt0 = 1e-3\nt_end = 0.0\n[u0]\namplitude = 1.0\nsigma = 1.0\n",
        )
        .unwrap();
        Parameter::Alpha.apply(&mut cfg, 0.7);
        Parameter::M.apply(&mut cfg, 1.5);
        Parameter::Beta.apply(&mut cfg, 0.1);
        Parameter::Amplitude.apply(&mut cfg, 2.0);
        assert_eq!(cfg.h.terms, vec![[1.0, 0.7]]);
        assert_eq!((cfg.v.c, cfg.v.m), (1.0, 1.5));
        assert_eq!((cfg.u0.chirp, cfg.u0.amplitude), (0.1, 2.0));
    }

    #[test]
    fn summary_layout() {
        let axes = ["m:1:1:1".parse().unwrap()];
        let csv = summary_csv(&axes, &[row(1.0, RunStatus::Completed)]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "m,status,t_final,fitted_l,blowup_estimate,bound,energy0,max_gradient_ratio"
        );
        assert!(lines.next().unwrap().starts_with("1.0000000000e0,completed,"));
    }
}
