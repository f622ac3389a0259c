//! Pinned verification scenarios. Each one runs a fixed problem and
//! compares the trajectory against an oracle with a fixed tolerance.

use std::fmt;

use num_complex::Complex64;

use crate::criteria::{self, extract_h_constants, spacetime_m_exponents, theorem4_case};
use crate::diagnostics::{centered_derivative, fit_decay, write_csv, Series};
use crate::error::{Error, Result};
use crate::model::{InitialData, Nonlinearity, Potential, PowerTerm, ProblemSpec, Sign};
use crate::solver::{self, RunOutcome, RunStatus, StepperConfig};

/// One pass/fail comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable form of the tolerance, e.g. `<= 1e-3`.
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("<= {limit:e}"),
            passed: value <= limit,
        }
    }

    pub fn at_least(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!(">= {limit}"),
            passed: value >= limit,
        }
    }

    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        Self {
            label: label.into(),
            value: f64::from(u8::from(ok)),
            bound: "true".into(),
            passed: ok,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        if self.bound == "true" {
            write!(f, "{verdict} {}", self.label)
        } else {
            write!(f, "{verdict} {} = {:.6e} ({})", self.label, self.value, self.bound)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    FreeGaussian,
    PhaseGauge,
    VirialIdentity,
    PseudoConformal,
    BlowupBound,
    DecayEx41,
    MorawetzEx43,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub outcome: RunOutcome,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_csv(&self.outcome.records, &mut buf).expect("writing to memory");
        buf
    }
}

/// Chirp of the blowup scenario; the analytic bound is `1 / (8 beta)`.
pub const BLOWUP_CHIRP: f64 = 0.25;
/// Constant potential of the gauge scenario.
pub const GAUGE_POTENTIAL: f64 = 0.5;
/// Spacetime exponents of the two-term example: `(q, r_bar)`.
pub const EX43_EXPONENTS: (f64, f64) = (1.45, 3.0);

fn gaussian_problem(
    h: Nonlinearity,
    potential: Potential,
    initial: InitialData,
    radius: f64,
    grid_points: usize,
    dt0: f64,
    t_end: f64,
) -> ProblemSpec {
    ProblemSpec {
        dim: 3,
        h,
        potential,
        initial,
        radius,
        grid_points,
        dt0,
        t_end,
    }
}

fn quasilinear_smooth() -> ProblemSpec {
    gaussian_problem(
        Nonlinearity::power(1.0, 0.5).expect("valid"),
        Potential::new(1.0, 1.0, Sign::Minus, 0.0, 1e-3).expect("valid"),
        InitialData::gaussian(1.0, 1.0, 0.0),
        32.0,
        2048,
        1e-3,
        0.5,
    )
}

fn free_problem(t_end: f64) -> ProblemSpec {
    gaussian_problem(
        Nonlinearity::zero(),
        Potential::zero(),
        InitialData::gaussian(1.0, 1.0, 0.0),
        16.0,
        1024,
        1e-3,
        t_end,
    )
}

/// `exp(-r^2 / 2)` evolved by the free flow in three dimensions.
pub fn free_gaussian_exact(r: f64, t: f64) -> Complex64 {
    let a = Complex64::new(0.5, 0.0);
    let d = Complex64::new(1.0, -2.0 * t);
    d.powf(-1.5) * (-a * r * r / d).exp()
}

fn relative_l2(outcome: &RunOutcome, reference: &[Complex64]) -> Result<f64> {
    let g = &outcome.final_state.grid;
    let sq: Vec<f64> = reference.iter().map(|z| z.norm_sqr()).collect();
    Ok(outcome.final_state.l2_distance(reference)? / g.integrate(&sq)?.sqrt())
}

fn conservation(outcome: &RunOutcome) -> Vec<Check> {
    vec![
        Check::at_most("relative mass drift", outcome.mass_drift(), 1e-6),
        Check::at_most("relative energy drift", outcome.energy_drift(), 1e-4),
    ]
}

fn completed(outcome: &RunOutcome) -> Check {
    Check::holds(
        format!("run completed (status {}, t = {})", outcome.status, outcome.t_final),
        outcome.status == RunStatus::Completed,
    )
}

fn value_at(outcome: &RunOutcome, t: f64, f: impl Fn(&crate::diagnostics::DiagnosticsRecord) -> f64) -> f64 {
    outcome
        .records
        .iter()
        .take_while(|r| r.t <= t + 1e-9)
        .last()
        .map_or(f64::NAN, f)
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::FreeGaussian,
        Scenario::PhaseGauge,
        Scenario::VirialIdentity,
        Scenario::PseudoConformal,
        Scenario::BlowupBound,
        Scenario::DecayEx41,
        Scenario::MorawetzEx43,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::FreeGaussian => "free-gaussian",
            Scenario::PhaseGauge => "phase-gauge",
            Scenario::VirialIdentity => "virial-identity",
            Scenario::PseudoConformal => "pseudo-conformal",
            Scenario::BlowupBound => "blowup-bound",
            Scenario::DecayEx41 => "decay-ex41",
            Scenario::MorawetzEx43 => "morawetz-ex43",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|s| s.name()).collect();
                Error::Usage(format!(
                    "unknown scenario '{name}', expected one of {}",
                    names.join(", ")
                ))
            })
    }

    /// The pinned problem and stepper settings.
    pub fn problem(self) -> (ProblemSpec, StepperConfig) {
        match self {
            Scenario::FreeGaussian => (free_problem(1.0), StepperConfig::new(1e-3)),
            Scenario::PhaseGauge => {
                let mut p = free_problem(0.1);
                p.potential = Potential::constant(GAUGE_POTENTIAL);
                (p, StepperConfig::new(1e-3))
            }
            Scenario::VirialIdentity | Scenario::PseudoConformal => {
                let mut cfg = StepperConfig::new(1e-3);
                cfg.record_every = 5;
                (quasilinear_smooth(), cfg)
            }
            Scenario::BlowupBound => {
                let p = gaussian_problem(
                    Nonlinearity::zero(),
                    Potential::new(1.0, 2.0, Sign::Plus, 0.0, 0.01).expect("valid"),
                    InitialData::gaussian(1.0, 1.0, BLOWUP_CHIRP),
                    48.0,
                    24576,
                    1e-3,
                    1.2 / (8.0 * BLOWUP_CHIRP),
                );
                let mut cfg = StepperConfig::new(1e-3);
                cfg.dt_min = 1e-7;
                cfg.record_every = 20;
                (p, cfg)
            }
            Scenario::DecayEx41 => {
                let p = gaussian_problem(
                    Nonlinearity::power(1.0, 0.5).expect("valid"),
                    Potential::new(1.0, 2.0, Sign::Minus, 0.0, 0.25).expect("valid"),
                    InitialData::gaussian(1.0, 2.0, 0.0),
                    512.0,
                    8192,
                    0.02,
                    40.0,
                );
                let mut cfg = StepperConfig::new(0.02);
                cfg.record_every = 20;
                (p, cfg)
            }
            Scenario::MorawetzEx43 => {
                let h = Nonlinearity::new(vec![
                    PowerTerm {
                        coeff: 1.0,
                        exponent: 0.6,
                    },
                    PowerTerm {
                        coeff: 1.0,
                        exponent: 0.8,
                    },
                ])
                .expect("valid");
                let p = gaussian_problem(
                    h,
                    Potential::new(1.0, 2.0, Sign::Minus, 0.0, 0.25).expect("valid"),
                    InitialData::gaussian(1.0, 2.0, 0.0),
                    512.0,
                    8192,
                    0.02,
                    20.0,
                );
                let mut cfg = StepperConfig::new(0.02);
                cfg.record_every = 20;
                cfg.record.lr_exponent = EX43_EXPONENTS.1;
                (p, cfg)
            }
        }
    }

    pub fn run(self) -> Result<ScenarioReport> {
        let (spec, cfg) = self.problem();
        let outcome = solver::run(&spec, &cfg)?;
        let mut checks = Vec::new();
        match self {
            Scenario::FreeGaussian => {
                checks.push(completed(&outcome));
                let exact: Vec<Complex64> = outcome
                    .final_state
                    .grid
                    .nodes()
                    .iter()
                    .map(|&r| free_gaussian_exact(r, outcome.t_final))
                    .collect();
                checks.push(Check::at_most(
                    "discrete L2 error vs closed form at t = 1",
                    outcome.final_state.l2_distance(&exact)?,
                    1e-3,
                ));
                checks.extend(conservation(&outcome));
            }
            Scenario::PhaseGauge => {
                checks.push(completed(&outcome));
                let free = solver::run(&free_problem(spec.t_end), &cfg)?;
                let phase = Complex64::from_polar(1.0, -GAUGE_POTENTIAL * free.t_final);
                let expected: Vec<Complex64> =
                    free.final_state.values.iter().map(|z| z * phase).collect();
                checks.push(Check::at_most(
                    "relative L2 distance to phase-rotated free evolution",
                    relative_l2(&outcome, &expected)?,
                    1e-6,
                ));
                checks.extend(conservation(&outcome));
            }
            Scenario::VirialIdentity => {
                checks.push(completed(&outcome));
                let recs = &outcome.records;
                let times: Vec<f64> = recs.iter().map(|r| r.t).collect();
                let js: Vec<f64> = recs.iter().map(|r| r.variance).collect();
                let ys: Vec<f64> = recs.iter().map(|r| r.virial).collect();
                let dj = centered_derivative(&times, &js)?;
                let dy = centered_derivative(&times, &ys)?;
                let virial_err = dj
                    .iter()
                    .zip(&recs[1..])
                    .map(|(d, r)| (d + 4.0 * r.virial).abs() / (1.0 + r.virial.abs()))
                    .fold(0.0, f64::max);
                checks.push(Check::at_most(
                    "max |dJ/dt + 4y| / (1 + |y|)",
                    virial_err,
                    1e-2,
                ));
                let scale = recs.iter().map(|r| r.virial_rate.abs()).fold(0.0, f64::max);
                let rate_err = dy
                    .iter()
                    .zip(&recs[1..])
                    .map(|(d, r)| (d - r.virial_rate).abs())
                    .fold(0.0, f64::max)
                    / scale;
                checks.push(Check::at_most(
                    "max |dy/dt - rate| / max |rate|",
                    rate_err,
                    2e-2,
                ));
                checks.extend(conservation(&outcome));
            }
            Scenario::PseudoConformal => {
                checks.push(completed(&outcome));
                let err = outcome
                    .records
                    .iter()
                    .map(|r| r.p_residual.abs() / (1.0 + r.pseudo_conformal.abs()))
                    .fold(0.0, f64::max);
                checks.push(Check::at_most(
                    "max |P - J(0) - 4 int t theta| / (1 + |P|)",
                    err,
                    1e-2,
                ));
                checks.extend(conservation(&outcome));
            }
            Scenario::BlowupBound => {
                let r0 = &outcome.records[0];
                let bound = criteria::blowup_time_bound(r0.variance, r0.virial)?;
                let analytic = 1.0 / (8.0 * BLOWUP_CHIRP);
                checks.push(Check::holds(
                    format!("E(u0) = {:.6} < 0", r0.energy),
                    r0.energy < 0.0,
                ));
                checks.push(Check::holds(format!("y(0) = {:.6} > 0", r0.virial), r0.virial > 0.0));
                checks.push(Check::at_most(
                    "|J(0)/(4y(0)) - 1/(8 beta)|",
                    (bound - analytic).abs(),
                    1e-6,
                ));
                let gmax = outcome
                    .records
                    .iter()
                    .map(|r| r.gradient_functional())
                    .fold(0.0, f64::max);
                checks.push(Check::holds(
                    format!(
                        "blowup declared by t = 1.2 J(0)/(4y(0)) = {:.4} (status {}, t = {:.4}, max G/G(0) = {:.3e})",
                        1.2 * bound,
                        outcome.status,
                        outcome.t_final,
                        gmax / r0.gradient_functional()
                    ),
                    outcome.status == RunStatus::BlowupDetected
                        && outcome.blowup_time_estimate.is_some_and(|t| t <= 1.2 * bound),
                ));
            }
            Scenario::DecayEx41 => {
                checks.push(completed(&outcome));
                let hc = extract_h_constants(&spec.h);
                let predicted = theorem4_case(&hc, &spec.potential, spec.dim)?.predicted_l;
                let early: Vec<_> = outcome
                    .records
                    .iter()
                    .filter(|r| r.t <= 20.0 + 1e-9)
                    .cloned()
                    .collect();
                let fit = fit_decay(&early, Series::MorawetzDensity, 1.0)?;
                checks.push(Check::at_least(
                    format!(
                        "fitted decay exponent of grad_h2 + |V||u|^2 on [1, 20] (predicted {})",
                        predicted.map_or("none".to_string(), |l| l.to_string())
                    ),
                    fit.l,
                    1.5,
                ));
                checks.extend(morawetz_checks(&outcome, 20.0, 40.0));
                checks.extend(conservation(&outcome));
            }
            Scenario::MorawetzEx43 => {
                checks.push(completed(&outcome));
                let (q, r_bar) = EX43_EXPONENTS;
                let hc = extract_h_constants(&spec.h);
                let l = theorem4_case(&hc, &spec.potential, spec.dim)?
                    .predicted_l
                    .ok_or_else(|| Error::Hypothesis("no decay case for this example".into()))?;
                let (m1, m2) = spacetime_m_exponents(&spec.h, r_bar, spec.dim)?;
                checks.push(Check::holds(
                    format!("exponent conditions hold for q = {q}, r = {r_bar}, m1 = {m1}, m2 = {m2}, l = {l}"),
                    criteria::spacetime_exponent_check(q, q, r_bar, m1, m2, l, spec.dim)?,
                ));
                checks.extend(morawetz_checks(&outcome, 10.0, 20.0));
                checks.extend(conservation(&outcome));
            }
        }
        Ok(ScenarioReport {
            scenario: self,
            outcome,
            checks,
        })
    }
}

/// Monotonicity of both accumulators and the relative growth of the
/// power-weighted one over `[t_mid, t_end]`.
fn morawetz_checks(outcome: &RunOutcome, t_mid: f64, t_end: f64) -> Vec<Check> {
    let recs = &outcome.records;
    let monotone = recs.windows(2).all(|w| {
        w[1].morawetz_const >= w[0].morawetz_const && w[1].morawetz_power >= w[0].morawetz_power
    });
    let mid = value_at(outcome, t_mid, |r| r.morawetz_power);
    let end = value_at(outcome, t_end, |r| r.morawetz_power);
    vec![
        Check::holds("Morawetz accumulators nondecreasing", monotone),
        Check::at_most(
            format!("(|x|+t)^0.5-weighted accumulator growth over [{t_mid}, {t_end}] relative to t = {t_mid}"),
            (end - mid) / mid,
            0.05,
        ),
    ]
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
