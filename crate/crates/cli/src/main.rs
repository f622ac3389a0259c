//! `qnls`: simulate, classify, verify and sweep.

mod plot;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use plot::{LineChart, Scale};
use qnls::config::ConfigFile;
use qnls::criteria::{self, ClassifyInput};
use qnls::scenarios::Scenario;
use qnls::sweep::{self, Axis, Parameter};
use qnls::{Nonlinearity, Potential, PowerTerm, RunStatus, Sign};

#[derive(Parser)]
#[command(name = "qnls", version, about = "Radial quasilinear Schrödinger lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem file and write diagnostics, a report and plots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
    },
    /// Print the analytic classification of a power-law problem.
    Classify {
        #[arg(long)]
        dim: usize,
        /// `b:alpha[,b:alpha...]`, or `0` for h = 0.
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        /// `sign:c:m[:bounded]` with sign +1 or -1.
        #[arg(long, allow_hyphen_values = true)]
        pot: String,
        /// Exponent q of V in L^q + L^inf; defaults to every q below N/m.
        #[arg(long)]
        q: Option<f64>,
        /// L^{N/2} norm of the singular part, for the q = N/2 case.
        #[arg(long)]
        v1_norm: Option<f64>,
    },
    /// Run a pinned scenario and print its checks.
    Verify { scenario: String },
    /// Run a grid of problems derived from one file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `NAME:MIN:MAX:COUNT` over alpha, m, beta or amplitude.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        /// Worker threads; overrides QNLS_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Failure with its exit status.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<qnls::Error> for Failure {
    fn from(e: qnls::Error) -> Self {
        use qnls::Error::*;
        match e {
            Hypothesis(_) | Fit(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))
}

/// Creates `dir` and refuses to clobber any of `files` unless forced.
fn prepare_out(dir: &Path, files: &[&str], force: bool) -> Outcome {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    if !force {
        for f in files {
            let p = dir.join(f);
            if p.exists() {
                return Err(Failure::Usage(format!(
                    "refusing to overwrite {}; pass --force",
                    p.display()
                )));
            }
        }
    }
    Ok(())
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(path, bytes).map_err(io_err(path))
}

fn simulate(config: &Path, out: &Path, force: bool) -> Outcome {
    let file = ConfigFile::from_path(config)?;
    let spec = file.problem()?;
    let stepper = file.stepper()?;
    const PLOTS: [&str; 4] = ["energy", "J", "P_residual", "decay"];
    let plot_files: Vec<String> = PLOTS.iter().map(|p| format!("plots/{p}.svg")).collect();
    let mut files = vec!["diagnostics.csv", "report.txt"];
    files.extend(plot_files.iter().map(String::as_str));
    prepare_out(out, &files, force)?;

    let outcome = qnls::solver::run(&spec, &stepper)?;
    let mut csv = Vec::new();
    qnls::diagnostics::write_csv(&outcome.records, &mut csv)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    write(&out.join("diagnostics.csv"), csv)?;
    write(&out.join("report.txt"), report::run_report(&spec, &outcome))?;

    let recs = &outcome.records;
    let t: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let series = [
        ("energy", "energy E(t)", "E", recs.iter().map(|r| r.energy).collect::<Vec<_>>(), Scale::Linear, Scale::Linear),
        ("J", "variance J(t)", "J", recs.iter().map(|r| r.variance).collect(), Scale::Linear, Scale::Linear),
        ("P_residual", "pseudo-conformal residual", "P residual", recs.iter().map(|r| r.p_residual).collect(), Scale::Linear, Scale::Linear),
        ("decay", "grad_h2 + |V||u|^2 (log-log)", "density", recs.iter().map(|r| r.morawetz_density).collect(), Scale::Log, Scale::Log),
    ];
    for (name, title, y_label, ys, xs, yscale) in series {
        let chart = LineChart {
            title,
            x_label: "t",
            y_label,
            x_scale: xs,
            y_scale: yscale,
        };
        write(&out.join(format!("plots/{name}.svg")), chart.render(&t, &ys))?;
    }

    println!(
        "status {} at t = {} ({} records) -> {}",
        outcome.status,
        outcome.t_final,
        recs.len(),
        out.display()
    );
    match outcome.status {
        RunStatus::Completed | RunStatus::BlowupDetected => Ok(()),
        s => Err(Failure::Runtime(format!("run ended with status {s} at t = {}", outcome.t_final))),
    }
}

fn parse_h(text: &str) -> Result<Nonlinearity, Failure> {
    let t = text.trim();
    if t.is_empty() || t == "0" || t == "none" {
        return Ok(Nonlinearity::zero());
    }
    let mut terms = Vec::new();
    for part in t.split(',') {
        let (b, a) = part
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("h term '{part}' must look like b:alpha")))?;
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("h term '{part}': '{x}' is not a number")))
        };
        terms.push(PowerTerm {
            coeff: num(b)?,
            exponent: num(a)?,
        });
    }
    Ok(Nonlinearity::new(terms)?)
}

fn parse_pot(text: &str) -> Result<Potential, Failure> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(Failure::Usage(format!("potential '{text}' must look like sign:c:m[:bounded]")));
    }
    let num = |x: &str| {
        x.parse::<f64>()
            .map_err(|_| Failure::Usage(format!("potential '{text}': '{x}' is not a number")))
    };
    let sign = match parts[0] {
        "+" | "+1" | "1" => Sign::Plus,
        "-" | "-1" => Sign::Minus,
        s => return Err(Failure::Usage(format!("potential sign must be +1 or -1, got '{s}'"))),
    };
    let bounded = parts.get(3).map_or(Ok(0.0), |b| num(b))?;
    Ok(Potential::new(
        num(parts[1])?,
        num(parts[2])?,
        sign,
        bounded,
        qnls::model::DEFAULT_EPSILON,
    )?)
}

fn classify(dim: usize, h: &str, pot: &str, q: Option<f64>, v1_norm: Option<f64>) -> Outcome {
    let input = ClassifyInput {
        dim,
        h: parse_h(h)?,
        v: parse_pot(pot)?,
        q,
        v1_norm,
        initial: None,
    };
    let rep = criteria::classify(&input)?;
    println!("{}", rep.summary());
    println!();
    print!("{}", rep.to_text());
    println!();
    print!("{}", rep.to_key_values());
    Ok(())
}

fn verify(name: &str) -> Outcome {
    let scenario = Scenario::from_name(name)?;
    let rep = scenario.run()?;
    for c in &rep.checks {
        println!("{c}");
    }
    let passed = rep.passed();
    println!("{} {scenario}", if passed { "PASS" } else { "FAIL" });
    if passed {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("scenario {scenario} failed")))
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("QNLS_THREADS") {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Failure::Usage(format!("QNLS_THREADS must be a positive integer, got '{v}'")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Failure::Usage("thread count must be >= 1".into()));
    }
    Ok(n)
}

fn run_sweep(config: &Path, axis_args: &[String], out: &Path, force: bool, threads: Option<usize>) -> Outcome {
    let base = ConfigFile::from_path(config)?;
    let axes = axis_args
        .iter()
        .map(|a| a.parse::<Axis>())
        .collect::<qnls::Result<Vec<_>>>()?;
    let points = sweep::grid_points(&axes)?;
    // reject bad parameter values before any run starts
    for p in &points {
        let mut cfg = base.clone();
        for &(param, v) in p {
            param.apply(&mut cfg, v);
        }
        cfg.problem()?;
        cfg.stepper()?;
    }
    let params: Vec<Parameter> = axes.iter().map(|a| a.parameter).collect();
    let phase = params.contains(&Parameter::Alpha) && params.contains(&Parameter::M);
    let mut files = vec!["summary.csv"];
    if phase {
        files.push("phase.svg");
    }
    prepare_out(out, &files, force)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Runtime(e.to_string()))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|p| sweep::run_point(&base, p))
            .collect::<qnls::Result<Vec<_>>>()
    })
    .map_err(|e| Failure::Runtime(e.to_string()))?;

    write(&out.join("summary.csv"), sweep::summary_csv(&axes, &rows))?;
    if phase {
        let ia = params.iter().position(|&p| p == Parameter::Alpha).unwrap_or(0);
        let im = 1 - ia;
        let pts: Vec<(f64, f64, &str)> = rows
            .iter()
            .map(|r| (r.params[ia].1, r.params[im].1, r.status.as_str()))
            .collect();
        write(&out.join("phase.svg"), plot::phase_diagram("run status", "alpha", "m", &pts))?;
    }
    for r in &rows {
        let label: Vec<String> = r.params.iter().map(|(p, v)| format!("{p} = {v}")).collect();
        println!(
            "{}: {} at t = {}{}",
            label.join(", "),
            r.status,
            r.t_final,
            r.fitted_l.map_or_else(String::new, |l| format!(", l = {l:.4}"))
        );
    }
    if axes.len() == 1 {
        println!("transition: {}", sweep::locate_transition(&rows));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out, force } => simulate(config, out, *force),
        Command::Classify {
            dim,
            h,
            pot,
            q,
            v1_norm,
        } => classify(*dim, h, pot, *q, *v1_norm),
        Command::Verify { scenario } => verify(scenario),
        Command::Sweep {
            config,
            axes,
            out,
            force,
            threads,
        } => run_sweep(config, axes, out, *force, *threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Usage(msg) | Failure::Runtime(msg)) = &f;
            eprintln!("qnls: {msg}");
            ExitCode::from(f.code())
        }
    }
}
