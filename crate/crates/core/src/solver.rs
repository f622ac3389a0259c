//! Crank–Nicolson time integration with adaptive step control.
//!
//! The nonlinear term is taken at the step midpoint in the form
//! `2 u_mid Q Delta_h((h(|u^{n+1}|^2) + h(|u^n|^2)) / 2)` with `Q` the secant
//! slope of `h` between `|u^n|^2` and `|u^{n+1}|^2`. With this choice the
//! discrete mass and the discrete energy are both invariants of the step
//! once the inner iteration has converged, and the step is time-symmetric.
//!
//! The implicit system is solved by quasi-linearization: the part of the
//! nonlinear term that contains the second derivative of `h(|u|^2)` is
//! linearized around the current iterate and solved together with the
//! linear part as a 2x2 block tridiagonal system; the remainder is lagged.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    gradient_energy, nonlinear_gradient_energy, DiagnosticsRecord, RecordBuilder, RecordSettings,
};
use crate::error::{Error, Result};
use crate::grid::{FieldState, RadialGrid, BOUNDARY_TOLERANCE};
use crate::linalg::{solve_block_tridiagonal, solve_tridiagonal, Block};
use crate::model::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt0: f64,
    pub dt_min: f64,
    /// Relative tolerance on successive inner iterates in discrete `L^2`.
    pub cn_tol: f64,
    pub cn_max_iter: usize,
    /// Growth of `int |grad u|^2 + |grad h|^2` over its initial value that,
    /// together with `dt < dt_min`, is read as blowup.
    pub blowup_factor: f64,
    pub record_every: usize,
    /// Largest relative change of the state, or of the gradient functional,
    /// accepted in one step.
    pub max_rel_change: f64,
    pub boundary_tol: f64,
    pub record: RecordSettings,
}

impl StepperConfig {
    pub fn new(dt0: f64) -> Self {
        Self {
            dt0,
            dt_min: dt0 * 1e-4,
            cn_tol: 1e-12,
            cn_max_iter: 60,
            blowup_factor: 1e3,
            record_every: 10,
            max_rel_change: 0.1,
            boundary_tol: BOUNDARY_TOLERANCE,
            record: RecordSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return Err(Error::Invalid(format!("dt0 must be > 0, got {}", self.dt0)));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt0) {
            return Err(Error::Invalid(format!(
                "dt_min must lie in (0, dt0), got {}",
                self.dt_min
            )));
        }
        if !(self.cn_tol > 0.0) {
            return Err(Error::Invalid(format!("cn_tol must be > 0, got {}", self.cn_tol)));
        }
        if self.cn_max_iter == 0 {
            return Err(Error::Invalid("cn_max_iter must be >= 1".into()));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::Invalid(format!(
                "blowup_factor must exceed 1, got {}",
                self.blowup_factor
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Invalid("record_every must be >= 1".into()));
        }
        if !(self.max_rel_change > 0.0) {
            return Err(Error::Invalid("max_rel_change must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowupDetected,
    StepCollapse,
    BoundaryContaminated,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowupDetected => "blowup_detected",
            RunStatus::StepCollapse => "step_collapse",
            RunStatus::BoundaryContaminated => "boundary_contaminated",
        }
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub t_final: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub blowup_time_estimate: Option<f64>,
    pub final_state: FieldState,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Inner iterations over all attempted steps.
    pub inner_iterations: usize,
    /// `E(u0)` and `int |x u0|^2`, as used by the pseudo-conformal records.
    pub energy0: f64,
    pub variance0: f64,
}

impl RunOutcome {
    /// Largest `|m(t)^2 - m(0)^2| / m(0)^2` over the records.
    pub fn mass_drift(&self) -> f64 {
        relative_drift(&self.records, |r| r.mass2)
    }

    /// Largest `|E(t) - E(0)| / max(|E(0)|, tiny)` over the records.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.records, |r| r.energy)
    }
}

fn relative_drift(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> f64 {
    let Some(first) = records.first() else {
        return 0.0;
    };
    let base = f(first).abs().max(1e-300);
    records
        .iter()
        .map(|r| (f(r) - f(first)).abs() / base)
        .fold(0.0, f64::max)
}

/// Why a single step was not produced.
#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    NotConverged { iterations: usize, change: f64 },
    NonFinite,
    Singular,
}

impl std::fmt::Display for StepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepFailure::NotConverged { iterations, change } => write!(
                f,
                "inner iteration did not converge in {iterations} iterations (last change {change:.3e})"
            ),
            StepFailure::NonFinite => f.write_str("non-finite values in the iterate"),
            StepFailure::Singular => f.write_str("singular linear system"),
        }
    }
}

/// Time stepper for one problem on one grid.
#[derive(Debug, Clone)]
pub struct Solver {
    spec: ProblemSpec,
    grid: Arc<RadialGrid>,
    potential: Vec<f64>,
    lap: Vec<(f64, f64, f64)>,
    cn_tol: f64,
    cn_max_iter: usize,
}

impl Solver {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let grid = Arc::new(RadialGrid::new(spec.dim, spec.radius, spec.grid_points)?);
        Ok(Self::with_grid(spec, grid))
    }

    pub fn with_grid(spec: &ProblemSpec, grid: Arc<RadialGrid>) -> Self {
        let potential = grid
            .nodes()
            .iter()
            .map(|&r| spec.potential.eval(r).value)
            .collect();
        let lap = (0..grid.len()).map(|j| grid.laplacian_row(j)).collect();
        Self {
            spec: spec.clone(),
            grid,
            potential,
            lap,
            cn_tol: 1e-12,
            cn_max_iter: 60,
        }
    }

    pub fn with_tolerance(mut self, cn_tol: f64, cn_max_iter: usize) -> Self {
        self.cn_tol = cn_tol;
        self.cn_max_iter = cn_max_iter;
        self
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn initial_state(&self) -> Result<FieldState> {
        let values = self.spec.initial.sample(self.grid.nodes())?;
        FieldState::new(self.grid.clone(), 0.0, values)
    }

    /// `(Delta_h + V) f` at node `j`.
    #[inline]
    fn apply_l(&self, f: &[Complex64], j: usize) -> Complex64 {
        let (lo, di, up) = self.lap[j];
        let mut acc = f[j] * (di + self.potential[j]);
        if j > 0 {
            acc += f[j - 1] * lo;
        }
        if j + 1 < f.len() {
            acc += f[j + 1] * up;
        }
        acc
    }

    /// One Crank–Nicolson step of size `dt`; negative `dt` integrates
    /// backwards in time.
    pub fn step(&self, state: &FieldState, dt: f64) -> std::result::Result<FieldState, StepFailure> {
        self.step_counted(state, dt).map(|(s, _)| s)
    }

    /// [`Solver::step`] that also reports the number of inner iterations.
    pub fn step_counted(
        &self,
        state: &FieldState,
        dt: f64,
    ) -> std::result::Result<(FieldState, usize), StepFailure> {
        if !state.is_finite() {
            return Err(StepFailure::NonFinite);
        }
        let u0 = &state.values;
        let m = u0.len();
        let tau = 0.5 * dt;
        let i_tau = Complex64::new(0.0, tau);
        let rhs0: Vec<Complex64> = (0..m).map(|j| u0[j] - i_tau * self.apply_l(u0, j)).collect();

        let lower: Vec<Complex64> = self.lap.iter().map(|l| i_tau * l.0).collect();
        let upper: Vec<Complex64> = self.lap.iter().map(|l| i_tau * l.2).collect();
        let diag: Vec<Complex64> = self
            .lap
            .iter()
            .zip(&self.potential)
            .map(|(l, v)| Complex64::new(1.0, 0.0) + i_tau * (l.1 + v))
            .collect();

        let mut v = rhs0.clone();
        solve_tridiagonal(&lower, &diag, &upper, &mut v).map_err(|_| StepFailure::Singular)?;
        if self.spec.h.is_zero() {
            return finish(state, v, dt).map(|s| (s, 1));
        }

        let h = &self.spec.h;
        let w0: Vec<f64> = u0.iter().map(|z| z.norm_sqr()).collect();
        let h0: Vec<f64> = w0.iter().map(|&s| h.value(s)).collect();
        let scale = state.grid.integrate_map(u0, |_, z| z.norm_sqr()).sqrt().max(1e-300);

        let mut lo_b: Vec<Block> = vec![[0.0; 4]; m];
        let mut di_b: Vec<Block> = vec![[0.0; 4]; m];
        let mut up_b: Vec<Block> = vec![[0.0; 4]; m];
        let mut rhs: Vec<[f64; 2]> = vec![[0.0; 2]; m];
        let mut hbar = vec![0.0; m];
        let mut lap_hbar = vec![0.0; m];
        let mut coef = vec![Complex64::new(0.0, 0.0); m];
        let mut p = vec![0.0; m];
        let mut q = vec![0.0; m];
        let mut last_change = f64::INFINITY;

        for iteration in 1..=self.cn_max_iter {
            for j in 0..m {
                let w1 = v[j].norm_sqr();
                hbar[j] = 0.5 * (h.value(w1) + h0[j]);
                let umid = 0.5 * (u0[j] + v[j]);
                coef[j] = umid * (2.0 * h.secant_slope(w0[j], w1));
                let dh1 = h.derivative(w1);
                p[j] = dh1 * v[j].re;
                q[j] = dh1 * v[j].im;
            }
            self.grid.laplacian_into(&hbar, &mut lap_hbar);

            // P(v) = c Delta_h(h'(w1) Re(conj(v) v)) at the current iterate.
            for j in 0..m {
                let (ll, ld, lu) = self.lap[j];
                let mut pv = ld * (p[j] * v[j].re + q[j] * v[j].im);
                if j > 0 {
                    pv += ll * (p[j - 1] * v[j - 1].re + q[j - 1] * v[j - 1].im);
                }
                if j + 1 < m {
                    pv += lu * (p[j + 1] * v[j + 1].re + q[j + 1] * v[j + 1].im);
                }
                let nl = coef[j] * lap_hbar[j];
                let pl = coef[j] * pv;
                // rhs0 - i dt (N(v) - P(v))
                let corr = Complex64::new(0.0, dt) * (nl - pl);
                let r = rhs0[j] - corr;
                rhs[j] = [r.re, r.im];

                let (cr, ci) = (coef[j].re * dt, coef[j].im * dt);
                let vj = self.potential[j];
                let block = |lap: f64, pk: f64, qk: f64, diag: bool| -> Block {
                    let id = if diag { 1.0 } else { 0.0 };
                    let tl = tau * (lap + if diag { vj } else { 0.0 });
                    [
                        id - ci * lap * pk,
                        -tl - ci * lap * qk,
                        tl + cr * lap * pk,
                        id + cr * lap * qk,
                    ]
                };
                di_b[j] = block(ld, p[j], q[j], true);
                if j > 0 {
                    lo_b[j] = block(ll, p[j - 1], q[j - 1], false);
                }
                if j + 1 < m {
                    up_b[j] = block(lu, p[j + 1], q[j + 1], false);
                }
            }
            solve_block_tridiagonal(&lo_b, &di_b, &up_b, &mut rhs)
                .map_err(|_| StepFailure::Singular)?;

            let mut diff = 0.0;
            let mut finite = true;
            for ((x, old), w) in rhs.iter().zip(v.iter_mut()).zip(self.grid.weights()) {
                let new = Complex64::new(x[0], x[1]);
                if !(new.re.is_finite() && new.im.is_finite()) {
                    finite = false;
                    break;
                }
                diff += w * (new - *old).norm_sqr();
                *old = new;
            }
            if !finite {
                return Err(StepFailure::NonFinite);
            }
            last_change = diff.sqrt() / scale;
            if last_change < self.cn_tol {
                return finish(state, v, dt).map(|s| (s, iteration));
            }
        }
        Err(StepFailure::NotConverged {
            iterations: self.cn_max_iter,
            change: last_change,
        })
    }

    /// `int |grad u|^2 + int |grad h(|u|^2)|^2`.
    pub fn gradient_functional(&self, state: &FieldState) -> f64 {
        gradient_energy(state) + nonlinear_gradient_energy(state, &self.spec)
    }

    /// Adaptive integration from `t = 0` to `spec.t_end`.
    pub fn run(&self, cfg: &StepperConfig) -> Result<RunOutcome> {
        cfg.validate()?;
        let solver = self.clone().with_tolerance(cfg.cn_tol, cfg.cn_max_iter);
        solver.run_inner(cfg)
    }

    fn run_inner(&self, cfg: &StepperConfig) -> Result<RunOutcome> {
        let t_end = self.spec.t_end;
        let mut state = self.initial_state()?;
        let mut builder = RecordBuilder::new(&self.spec, cfg.record, &state)?;
        let mut records = vec![builder.record(&state, cfg.dt0)];
        let g0 = self.gradient_functional(&state);
        let mut g_cur = g0;
        let mut dt = cfg.dt0;
        let mut accepted = 0usize;
        let mut rejected = 0usize;
        let mut iterations = 0usize;
        let mut since_record = 0usize;
        let mut status = RunStatus::Completed;
        let mut blowup = None;
        // remaining time below this is treated as arrival
        let t_eps = 1e-12 * t_end.max(1.0);

        if !state.boundary_decayed(cfg.boundary_tol) {
            status = RunStatus::BoundaryContaminated;
        }

        while status == RunStatus::Completed && t_end - state.t > t_eps {
            if dt < cfg.dt_min {
                if g_cur > cfg.blowup_factor * g0 {
                    status = RunStatus::BlowupDetected;
                    blowup = Some(state.t);
                } else {
                    status = RunStatus::StepCollapse;
                }
                break;
            }
            let remaining = t_end - state.t;
            let (trial, lands) = if dt >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else {
                (dt, false)
            };
            let next = match self.step_counted(&state, trial) {
                Ok((next, k)) => {
                    iterations += k;
                    next
                }
                Err(_) => {
                    iterations += self.cn_max_iter;
                    rejected += 1;
                    dt = 0.5 * trial;
                    continue;
                }
            };
            let norm = state
                .grid
                .integrate_map(&state.values, |_, z| z.norm_sqr())
                .sqrt()
                .max(1e-300);
            let change = next.l2_distance(&state.values)? / norm;
            let g_next = self.gradient_functional(&next);
            let g_change = (g_next - g_cur).abs() / g_cur.max(1e-300);
            if change > cfg.max_rel_change || g_change > cfg.max_rel_change {
                rejected += 1;
                dt = 0.5 * trial;
                continue;
            }
            let mut next = next;
            if lands || t_end - next.t <= t_eps {
                next.t = t_end;
            }
            state = next;
            g_cur = g_next;
            accepted += 1;
            since_record += 1;
            let done = t_end - state.t <= t_eps;
            if !state.boundary_decayed(cfg.boundary_tol) {
                status = RunStatus::BoundaryContaminated;
            }
            if since_record >= cfg.record_every || done || status != RunStatus::Completed {
                if state.t > records.last().map_or(f64::NEG_INFINITY, |r| r.t) {
                    records.push(builder.record(&state, trial));
                }
                since_record = 0;
            }
            let small = change < 0.25 * cfg.max_rel_change && g_change < 0.25 * cfg.max_rel_change;
            if small && !lands {
                dt = (2.0 * trial).min(cfg.dt0);
            } else if !lands {
                dt = trial;
            }
        }

        if status != RunStatus::Completed
            && records.last().is_none_or(|r| state.t > r.t)
        {
            records.push(builder.record(&state, dt));
        }

        Ok(RunOutcome {
            status,
            t_final: state.t,
            records,
            blowup_time_estimate: blowup,
            final_state: state,
            accepted_steps: accepted,
            rejected_steps: rejected,
            inner_iterations: iterations,
            energy0: builder.energy0(),
            variance0: builder.variance0(),
        })
    }
}

fn finish(
    state: &FieldState,
    values: Vec<Complex64>,
    dt: f64,
) -> std::result::Result<FieldState, StepFailure> {
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(StepFailure::NonFinite);
    }
    Ok(FieldState {
        grid: state.grid.clone(),
        t: state.t + dt,
        values,
    })
}

/// Convenience wrapper: build a solver for `spec` and run it.
pub fn run(spec: &ProblemSpec, cfg: &StepperConfig) -> Result<RunOutcome> {
    Solver::new(spec)?.run(cfg)
}

/// One step of size `dt` with default inner tolerances.
pub fn step(state: &FieldState, spec: &ProblemSpec, dt: f64) -> Result<FieldState> {
    let solver = Solver::with_grid(spec, state.grid.clone());
    solver
        .step(state, dt)
        .map_err(|e| Error::Domain(format!("step rejected: {e}")))
}
