//! Functionals of a field and of a recorded trajectory: mass, energy,
//! variance and virial, the pseudo-conformal quantities, Morawetz and
//! spacetime integrals, and power-law decay fits.
//!
//! Gradient energies (`int |grad u|^2`, `int |grad h(|u|^2)|^2`) use the
//! face-based Dirichlet form of the grid, which is the quadratic form the
//! solver's Laplacian is built from; pointwise gradient densities (virial,
//! theta) use the node-centered radial gradient.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FieldState;
use crate::model::ProblemSpec;

/// Per-record settings for the norm and weight that are sampled in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordSettings {
    /// Exponent `r_bar` of the recorded `L^r_bar` norm.
    pub lr_exponent: f64,
    /// Exponent `lambda` of the `(|x| + t)^lambda` Morawetz weight.
    pub morawetz_lambda: f64,
}

impl Default for RecordSettings {
    fn default() -> Self {
        Self {
            lr_exponent: 4.0,
            morawetz_lambda: 0.5,
        }
    }
}

/// One time sample of every functional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Step size in use when the record was taken.
    pub dt: f64,
    pub mass2: f64,
    pub grad_u2: f64,
    pub grad_h2: f64,
    /// `int V |u|^2`.
    pub pot_term: f64,
    /// `int |V| |u|^2`.
    pub abs_pot_term: f64,
    /// Share of `int |V||u|^2` coming from the capped core `r < epsilon`.
    pub core_pot_share: f64,
    pub energy: f64,
    /// `J = int |x|^2 |u|^2`.
    pub variance: f64,
    /// `y = Im int conj(u) (x . grad u)`.
    pub virial: f64,
    /// Right-hand side of the evolution law for `y`.
    pub virial_rate: f64,
    pub theta: f64,
    /// `4 int_0^t tau theta(tau) dtau` by the trapezoid rule over records.
    pub theta_integral: f64,
    pub pseudo_conformal: f64,
    pub p_residual: f64,
    /// `int [|grad h|^2 + |V||u|^2]`.
    pub morawetz_density: f64,
    /// Same density weighted by `(|x| + t)^{-lambda}`.
    pub morawetz_power_density: f64,
    pub morawetz_const: f64,
    pub morawetz_power: f64,
    pub morawetz_lambda: f64,
    pub lr_norm: f64,
    pub lr_exponent: f64,
}

impl DiagnosticsRecord {
    /// Blowup functional `int [|grad u|^2 + |grad h(|u|^2)|^2]`.
    pub fn gradient_functional(&self) -> f64 {
        self.grad_u2 + self.grad_h2
    }
}

/// Time series used by [`fit_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    /// `int |grad h|^2 + int |V||u|^2`.
    MorawetzDensity,
    GradH,
    AbsPotential,
    GradU,
    LrNorm,
}

impl Series {
    pub fn value(self, r: &DiagnosticsRecord) -> f64 {
        match self {
            Series::MorawetzDensity => r.morawetz_density,
            Series::GradH => r.grad_h2,
            Series::AbsPotential => r.abs_pot_term,
            Series::GradU => r.grad_u2,
            Series::LrNorm => r.lr_norm,
        }
    }
}

fn h_profile(state: &FieldState, spec: &ProblemSpec) -> Vec<f64> {
    state
        .values
        .iter()
        .map(|z| spec.h.value(z.norm_sqr()))
        .collect()
}

/// `m(u) = (int |u|^2)^{1/2}`.
pub fn mass(state: &FieldState) -> f64 {
    mass_squared(state).sqrt()
}

pub fn mass_squared(state: &FieldState) -> f64 {
    state.grid.integrate_map(&state.values, |_, z| z.norm_sqr())
}

/// `int |grad u|^2`.
pub fn gradient_energy(state: &FieldState) -> f64 {
    state
        .grid
        .dirichlet_energy_complex(&state.values)
        .expect("state matches its grid")
}

/// `int |grad h(|u|^2)|^2`.
pub fn nonlinear_gradient_energy(state: &FieldState, spec: &ProblemSpec) -> f64 {
    if spec.h.is_zero() {
        return 0.0;
    }
    let hv = h_profile(state, spec);
    state.grid.dirichlet_unchecked(&hv, &hv)
}

/// `int V |u|^2`.
pub fn potential_term(state: &FieldState, spec: &ProblemSpec) -> f64 {
    state
        .grid
        .integrate_map(&state.values, |r, z| spec.potential.eval(r).value * z.norm_sqr())
}

/// `E(u) = 1/2 int [|grad u|^2 + |grad h|^2] - 1/2 int V |u|^2`.
pub fn energy(state: &FieldState, spec: &ProblemSpec) -> f64 {
    0.5 * (gradient_energy(state) + nonlinear_gradient_energy(state, spec))
        - 0.5 * potential_term(state, spec)
}

/// `y = Im int conj(u) (x . grad u) dx`.
pub fn virial_y(state: &FieldState) -> f64 {
    let du = state
        .grid
        .radial_gradient_complex(&state.values)
        .expect("state matches its grid");
    let g = &state.grid;
    g.nodes()
        .iter()
        .zip(g.weights())
        .zip(state.values.iter().zip(&du))
        .map(|((r, w), (u, d))| w * r * (u.conj() * d).im)
        .sum()
}

/// `J = int |x|^2 |u|^2 dx`.
pub fn variance_j(state: &FieldState) -> f64 {
    state.grid.integrate_map(&state.values, |r, z| r * r * z.norm_sqr())
}

/// `(|u|^2, |grad |u|^2|^2)` at the nodes, with `grad |u|^2 = 2 Re(conj(u) grad u)`.
fn modulus_gradient(state: &FieldState) -> Vec<(f64, f64)> {
    let du = state
        .grid
        .radial_gradient_complex(&state.values)
        .expect("state matches its grid");
    state
        .values
        .iter()
        .zip(&du)
        .map(|(u, d)| {
            let ds = 2.0 * (u.conj() * d).re;
            (u.norm_sqr(), ds * ds)
        })
        .collect()
}

/// `theta = -N int [2 h'' h' s + (h')^2] |grad s|^2 - int [2V + x.grad V] |u|^2`
/// with `s = |u|^2`.
///
/// When `u` has a spatially constant phase, `|grad s|^2 = 4 s |grad u|^2` and
/// this is `-4N int [2 h'' h' s + (h')^2] s |grad u|^2 - ...`. For general
/// complex `u` only the `|grad s|^2` form satisfies `P' = 4 t theta`.
pub fn theta(state: &FieldState, spec: &ProblemSpec) -> f64 {
    let g = &state.grid;
    let n = g.dim() as f64;
    let potential_part = g.integrate_map(&state.values, |r, z| {
        let p = spec.potential.eval(r);
        (2.0 * p.value + p.radial_derivative) * z.norm_sqr()
    });
    if spec.h.is_zero() {
        return -potential_part;
    }
    let nonlinear_part: f64 = g
        .weights()
        .iter()
        .zip(modulus_gradient(state))
        .map(|(w, (s, ds2))| {
            let dh = spec.h.derivative(s);
            let d2h = spec.h.second_derivative(s);
            w * (2.0 * d2h * dh * s + dh * dh) * ds2
        })
        .sum();
    -n * nonlinear_part - potential_part
}

/// Right-hand side of `dy/dt = -2 int |grad u|^2 - (N+2) int |grad h|^2
/// - 2N int h'' h' s |grad s|^2 - int (x . grad V) |u|^2`, `s = |u|^2`.
///
/// For constant-phase `u` the third term equals `-8N int h'' h' |u|^4 |grad u|^2`.
pub fn virial_rate(state: &FieldState, spec: &ProblemSpec) -> f64 {
    let g = &state.grid;
    let n = g.dim() as f64;
    let grad_u2 = gradient_energy(state);
    let grad_h2 = nonlinear_gradient_energy(state, spec);
    let pot = g.integrate_map(&state.values, |r, z| {
        spec.potential.eval(r).radial_derivative * z.norm_sqr()
    });
    let quartic: f64 = if spec.h.is_zero() {
        0.0
    } else {
        g.weights()
            .iter()
            .zip(modulus_gradient(state))
            .map(|(w, (s, ds2))| {
                w * spec.h.second_derivative(s) * spec.h.derivative(s) * s * ds2
            })
            .sum()
    };
    -2.0 * grad_u2 - (n + 2.0) * grad_h2 - 2.0 * n * quartic - pot
}

/// Data from the start of a trajectory needed by the pseudo-conformal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoConformalContext {
    /// `E(u0)`.
    pub energy0: f64,
    /// `int |x u0|^2`.
    pub variance0: f64,
    /// `4 int_0^t tau theta(tau) dtau`.
    pub theta_integral: f64,
}

/// `P(t) = int |xu|^2 + 4t y + 8 t^2 E(u0)` and its residual against
/// `int |x u0|^2 + 4 int_0^t tau theta`.
pub fn pseudo_conformal_p(
    state: &FieldState,
    ctx: Option<&PseudoConformalContext>,
) -> Result<(f64, f64)> {
    let ctx = ctx.ok_or_else(|| {
        Error::Usage("P(t) needs E(u0), int |x u0|^2 and the theta integral".into())
    })?;
    let t = state.t;
    let p = variance_j(state) + 4.0 * t * virial_y(state) + 8.0 * t * t * ctx.energy0;
    let residual = p - (ctx.variance0 + ctx.theta_integral);
    Ok((p, residual))
}

/// `B(t) = int |xu|^2 - 4(T-t) y + 8 (T-t)^2 E(u0)` for a blowup time `T > t`.
pub fn blowup_b(state: &FieldState, blowup_time: f64, energy0: f64) -> Result<f64> {
    let remaining = blowup_time - state.t;
    if !(remaining > 0.0) {
        return Err(Error::Domain(format!(
            "B(t) needs T > t, got T = {blowup_time}, t = {}",
            state.t
        )));
    }
    Ok(variance_j(state) - 4.0 * remaining * virial_y(state)
        + 8.0 * remaining * remaining * energy0)
}

/// Operator form `int |x u + 2i (T-t) grad u|^2 + 4 (T-t)^2 [int |grad h|^2 - int V |u|^2]`,
/// evaluated pointwise with the node gradient. Cross-check for [`blowup_b`].
pub fn blowup_b_direct(state: &FieldState, spec: &ProblemSpec, blowup_time: f64) -> Result<f64> {
    let remaining = blowup_time - state.t;
    if !(remaining > 0.0) {
        return Err(Error::Domain(format!(
            "B(t) needs T > t, got T = {blowup_time}, t = {}",
            state.t
        )));
    }
    let g = &state.grid;
    let du = g.radial_gradient_complex(&state.values)?;
    let i2 = Complex64::new(0.0, 2.0 * remaining);
    let operator: f64 = g
        .nodes()
        .iter()
        .zip(g.weights())
        .zip(state.values.iter().zip(&du))
        .map(|((r, w), (u, d))| w * (u * r + i2 * d).norm_sqr())
        .sum();
    let hv = h_profile(state, spec);
    let dh = g.radial_gradient(&hv)?;
    let grad_h2: f64 = g.weights().iter().zip(&dh).map(|(w, d)| w * d * d).sum();
    Ok(operator + 4.0 * remaining * remaining * (grad_h2 - potential_term(state, spec)))
}

/// Both forms of the positivity hypothesis for the blowup-rate lower bound:
/// `-c T^2 E(u0) - int |x u0|^2 - 4T y(0) > 0` with `c = 4` and `c = 8`.
pub fn blowup_rate_hypothesis(energy0: f64, variance0: f64, virial0: f64, blowup_time: f64) -> (bool, bool) {
    let base = -variance0 - 4.0 * blowup_time * virial0;
    let t2 = blowup_time * blowup_time;
    (base - 4.0 * t2 * energy0 > 0.0, base - 8.0 * t2 * energy0 > 0.0)
}

/// `int |V||u|^2` and its part from the capped core.
fn absolute_potential(state: &FieldState, spec: &ProblemSpec) -> (f64, f64) {
    let eps = spec.potential.epsilon;
    let g = &state.grid;
    let mut total = 0.0;
    let mut core = 0.0;
    for ((r, w), z) in g.nodes().iter().zip(g.weights()).zip(&state.values) {
        let x = w * spec.potential.eval(*r).value.abs() * z.norm_sqr();
        total += x;
        if *r < eps {
            core += x;
        }
    }
    (total, core)
}

/// `int [|grad h|^2 + |V||u|^2] (|x| + t)^{-lambda}`; the gradient part is
/// weighted at the cell faces, the potential part at the nodes.
fn power_weighted_density(state: &FieldState, spec: &ProblemSpec, hv: &[f64], lambda: f64) -> f64 {
    let g = &state.grid;
    let t = state.t;
    let m = g.len();
    let grad: f64 = if spec.h.is_zero() {
        0.0
    } else {
        (0..m)
            .map(|j| {
                let face = (j + 1) as f64 * g.dr();
                let next = if j + 1 < m { hv[j + 1] } else { 0.0 };
                let d = next - hv[j];
                g.face_coeffs()[j] * d * d * (face + t).powf(-lambda)
            })
            .sum()
    };
    let pot = g.integrate_map(&state.values, |r, z| {
        spec.potential.eval(r).value.abs() * z.norm_sqr() * (r + t).powf(-lambda)
    });
    grad + pot
}

/// Builds [`DiagnosticsRecord`]s along a trajectory, carrying the running
/// time integrals between calls.
#[derive(Debug, Clone)]
pub struct RecordBuilder {
    spec: ProblemSpec,
    settings: RecordSettings,
    energy0: f64,
    variance0: f64,
    last: Option<DiagnosticsRecord>,
}

impl RecordBuilder {
    pub fn new(spec: &ProblemSpec, settings: RecordSettings, initial: &FieldState) -> Result<Self> {
        if !(settings.lr_exponent > 2.0) {
            return Err(Error::Domain(format!(
                "L^r exponent must exceed 2, got {}",
                settings.lr_exponent
            )));
        }
        MorawetzWeight::Power {
            lambda: settings.morawetz_lambda,
        }
        .validate()?;
        Ok(Self {
            spec: spec.clone(),
            settings,
            energy0: energy(initial, spec),
            variance0: variance_j(initial),
            last: None,
        })
    }

    pub fn energy0(&self) -> f64 {
        self.energy0
    }

    pub fn variance0(&self) -> f64 {
        self.variance0
    }

    pub fn settings(&self) -> RecordSettings {
        self.settings
    }

    pub fn record(&mut self, state: &FieldState, dt: f64) -> DiagnosticsRecord {
        let spec = &self.spec;
        let g = &state.grid;
        let t = state.t;
        let hv = h_profile(state, spec);
        let mass2 = mass_squared(state);
        let grad_u2 = gradient_energy(state);
        let grad_h2 = if spec.h.is_zero() {
            0.0
        } else {
            g.dirichlet_unchecked(&hv, &hv)
        };
        let pot_term = potential_term(state, spec);
        let (abs_pot_term, core_pot_share) = absolute_potential(state, spec);
        let energy = 0.5 * (grad_u2 + grad_h2) - 0.5 * pot_term;
        let variance = variance_j(state);
        let virial = virial_y(state);
        let theta = theta(state, spec);
        let morawetz_density = grad_h2 + abs_pot_term;
        let lambda = self.settings.morawetz_lambda;
        let morawetz_power_density = power_weighted_density(state, spec, &hv, lambda);
        let rbar = self.settings.lr_exponent;
        let lr_norm = g
            .integrate_map(&state.values, |_, z| z.norm().powf(rbar))
            .powf(1.0 / rbar);

        let (theta_integral, morawetz_const, morawetz_power) = match &self.last {
            None => (0.0, 0.0, 0.0),
            Some(prev) => {
                let h = t - prev.t;
                (
                    prev.theta_integral + 2.0 * h * (prev.t * prev.theta + t * theta),
                    prev.morawetz_const + 0.5 * h * (prev.morawetz_density + morawetz_density),
                    prev.morawetz_power
                        + 0.5 * h * (prev.morawetz_power_density + morawetz_power_density),
                )
            }
        };
        let pseudo_conformal = variance + 4.0 * t * virial + 8.0 * t * t * self.energy0;
        let p_residual = pseudo_conformal - (self.variance0 + theta_integral);

        let rec = DiagnosticsRecord {
            t,
            dt,
            mass2,
            grad_u2,
            grad_h2,
            pot_term,
            abs_pot_term,
            core_pot_share,
            energy,
            variance,
            virial,
            virial_rate: virial_rate(state, spec),
            theta,
            theta_integral,
            pseudo_conformal,
            p_residual,
            morawetz_density,
            morawetz_power_density,
            morawetz_const,
            morawetz_power,
            morawetz_lambda: lambda,
            lr_norm,
            lr_exponent: rbar,
        };
        self.last = Some(rec.clone());
        rec
    }
}

/// Spacetime exponents `(q_bar, r_bar)` of `L^q_t L^r_x` and the exponent
/// `M` of the Morawetz-density norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeNormSpec {
    pub q_bar: f64,
    pub r_bar: f64,
    pub m_exp: f64,
}

/// Weight `a(x, t)` dividing the Morawetz density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MorawetzWeight {
    /// `a(x, t) = a`.
    Constant { a: f64 },
    /// `a(x, t) = (|x| + t)^lambda`, `0 <= lambda < 1`.
    Power { lambda: f64 },
    /// `a t^lambda` for `t <= 1`, `b t^mu` for `t > 1`.
    Split { a: f64, lambda: f64, b: f64, mu: f64 },
}

impl MorawetzWeight {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MorawetzWeight::Constant { a } if !(a > 0.0) => {
                Err(Error::Domain(format!("constant weight must be > 0, got {a}")))
            }
            MorawetzWeight::Power { lambda } if !(0.0..1.0).contains(&lambda) => Err(
                Error::Domain(format!("power weight needs 0 <= lambda < 1, got {lambda}")),
            ),
            MorawetzWeight::Split { a, lambda, b, .. } if !(a > 0.0 && b > 0.0 && lambda < 1.0) => {
                Err(Error::Domain(
                    "split weight needs a, b > 0 and lambda < 1".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// `int_{t0}^{t1} dt / a(t)` for the space-independent kinds.
    fn inverse_integral(&self, t0: f64, t1: f64) -> f64 {
        // antiderivative of t^{-p}
        fn prim(t: f64, p: f64) -> f64 {
            if (p - 1.0).abs() < 1e-14 {
                t.ln()
            } else {
                t.powf(1.0 - p) / (1.0 - p)
            }
        }
        match *self {
            MorawetzWeight::Constant { a } => (t1 - t0) / a,
            MorawetzWeight::Split { a, lambda, b, mu } => {
                let mut total = 0.0;
                let (lo, hi) = (t0.min(1.0), t1.min(1.0));
                if hi > lo {
                    total += (prim(hi, lambda) - prim(lo, lambda)) / a;
                }
                let (lo, hi) = (t0.max(1.0), t1.max(1.0));
                if hi > lo {
                    total += (prim(hi, mu) - prim(lo, mu)) / b;
                }
                total
            }
            MorawetzWeight::Power { .. } => unreachable!("power weight depends on x"),
        }
    }
}

/// Time integral of the weighted Morawetz density up to the last record.
pub fn morawetz_accumulate(records: &[DiagnosticsRecord], weight: MorawetzWeight) -> Result<f64> {
    weight.validate()?;
    if records.is_empty() {
        return Err(Error::Usage("Morawetz integral needs at least one record".into()));
    }
    let mut total = 0.0;
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        total += match weight {
            MorawetzWeight::Power { lambda } => {
                if (lambda - a.morawetz_lambda).abs() > 1e-12 {
                    return Err(Error::Usage(format!(
                        "records carry the lambda = {} weight, asked for {lambda}",
                        a.morawetz_lambda
                    )));
                }
                0.5 * (b.t - a.t) * (a.morawetz_power_density + b.morawetz_power_density)
            }
            _ => {
                0.5 * (a.morawetz_density + b.morawetz_density) * weight.inverse_integral(a.t, b.t)
            }
        };
    }
    Ok(total)
}

/// `(int_0^T (int |u|^r_bar dx)^{q_bar / r_bar} dt)^{1 / q_bar}` over the records.
pub fn spacetime_norm(records: &[DiagnosticsRecord], spec: &SpacetimeNormSpec) -> Result<f64> {
    if !(spec.r_bar > 2.0) {
        return Err(Error::Domain(format!("r_bar must exceed 2, got {}", spec.r_bar)));
    }
    if !(spec.q_bar >= 1.0) {
        return Err(Error::Domain(format!("q_bar must be >= 1, got {}", spec.q_bar)));
    }
    if records.is_empty() {
        return Err(Error::Usage("spacetime norm needs at least one record".into()));
    }
    if let Some(r) = records
        .iter()
        .find(|r| (r.lr_exponent - spec.r_bar).abs() > 1e-12)
    {
        return Err(Error::Usage(format!(
            "records carry the L^{} norm, asked for L^{}",
            r.lr_exponent, spec.r_bar
        )));
    }
    let integral: f64 = records
        .windows(2)
        .map(|w| {
            0.5 * (w[1].t - w[0].t) * (w[0].lr_norm.powf(spec.q_bar) + w[1].lr_norm.powf(spec.q_bar))
        })
        .sum();
    Ok(integral.powf(1.0 / spec.q_bar))
}

/// Power law `value ~ C t^{-l}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub l: f64,
    pub c: f64,
    pub points: usize,
}

/// Least-squares fit of `log value` against `log t` over `t >= max(t_min, 1)`.
pub fn fit_power_law(times: &[f64], values: &[f64], t_min: f64) -> Result<DecayFit> {
    crate::error::check_len(times.len(), values.len())?;
    let start = t_min.max(1.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t >= start {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Fit(format!("nonpositive value {v} at t = {t}")));
            }
            xs.push(t.ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 8 {
        return Err(Error::Fit(format!(
            "need at least 8 samples with t >= {start}, have {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("degenerate time window".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(DecayFit {
        l: -slope,
        c: intercept.exp(),
        points: xs.len(),
    })
}

pub fn fit_decay(records: &[DiagnosticsRecord], series: Series, t_min: f64) -> Result<DecayFit> {
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let values: Vec<f64> = records.iter().map(|r| series.value(r)).collect();
    fit_power_law(&times, &values, t_min)
}

/// Three-point derivative at the interior samples of a nonuniform series;
/// exact on quadratics. Entry `i` is the derivative at `times[i + 1]`.
pub fn centered_derivative(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    crate::error::check_len(times.len(), values.len())?;
    Ok((1..times.len().saturating_sub(1))
        .map(|i| {
            let h1 = times[i] - times[i - 1];
            let h2 = times[i + 1] - times[i];
            (h1 * h1 * values[i + 1] - h2 * h2 * values[i - 1] + (h2 * h2 - h1 * h1) * values[i])
                / (h1 * h2 * (h1 + h2))
        })
        .collect())
}

pub const CSV_HEADER: &str = "t,mass2,grad_u2,grad_h2,pot_term,energy,J,y,theta,P,P_residual,morawetz_const,morawetz_power,Lr_norm";

/// Writes one CSV row per record, every value with 17 significant digits.
pub fn write_csv<W: std::io::Write>(records: &[DiagnosticsRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let row = [
            r.t,
            r.mass2,
            r.grad_u2,
            r.grad_h2,
            r.pot_term,
            r.energy,
            r.variance,
            r.virial,
            r.theta,
            r.pseudo_conformal,
            r.p_residual,
            r.morawetz_const,
            r.morawetz_power,
            r.lr_norm,
        ];
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
