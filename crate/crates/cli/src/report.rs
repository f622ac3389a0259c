use std::fmt::Write as _;

use qnls::criteria::{self, ClassifyInput, InitialDiagnostics};
use qnls::diagnostics::{fit_decay, Series};
use qnls::sweep::FIT_T_MIN;
use qnls::{ProblemSpec, RunOutcome, RunStatus};

/// `report.txt` of a single simulation: the run, then the classification
/// of the problem with the initial diagnostics filled in.
pub fn run_report(spec: &ProblemSpec, outcome: &RunOutcome) -> String {
    let mut s = String::new();
    let r0 = &outcome.records[0];
    let _ = writeln!(s, "run");
    let _ = writeln!(s, "  status: {}", outcome.status);
    let _ = writeln!(s, "  t_final: {}", outcome.t_final);
    let _ = writeln!(
        s,
        "  steps: {} accepted, {} rejected, {} inner iterations",
        outcome.accepted_steps, outcome.rejected_steps, outcome.inner_iterations
    );
    let _ = writeln!(s, "  records: {}", outcome.records.len());
    let _ = writeln!(s, "  relative mass drift: {:e}", outcome.mass_drift());
    let _ = writeln!(s, "  relative energy drift: {:e}", outcome.energy_drift());
    let _ = writeln!(s, "  E(u0) = {}, J(0) = {}, y(0) = {}", r0.energy, r0.variance, r0.virial);
    match criteria::blowup_time_bound(r0.variance, r0.virial) {
        Ok(b) => {
            let _ = writeln!(s, "  blowup time bound J(0)/(4y(0)) = {b}");
        }
        Err(_) => {
            let _ = writeln!(s, "  blowup time bound: none (y(0) <= 0)");
        }
    }
    if let Some(t) = outcome.blowup_time_estimate {
        let _ = writeln!(s, "  blowup time estimate: {t}");
    }
    if outcome.status == RunStatus::Completed {
        match fit_decay(&outcome.records, Series::MorawetzDensity, FIT_T_MIN) {
            Ok(fit) => {
                let _ = writeln!(
                    s,
                    "  decay fit of grad_h2 + |V||u|^2 on t >= {FIT_T_MIN}: l = {} ({} points)",
                    fit.l, fit.points
                );
            }
            Err(e) => {
                let _ = writeln!(s, "  decay fit: unavailable ({e})");
            }
        }
    }
    s.push('\n');
    let input = ClassifyInput {
        dim: spec.dim,
        h: spec.h.clone(),
        v: spec.potential,
        q: None,
        v1_norm: None,
        initial: Some(InitialDiagnostics {
            energy: r0.energy,
            variance: r0.variance,
            virial: r0.virial,
        }),
    };
    match criteria::classify(&input) {
        Ok(rep) => {
            s.push_str(&rep.to_text());
            s.push('\n');
            s.push_str(&rep.to_key_values());
        }
        Err(e) => {
            let _ = writeln!(s, "classification unavailable: {e}");
        }
    }
    s
}
