use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fiberq::scenario::{
    parse_config_with, run_scenario, self_test, FinalObservables, ModelKind, RunSummary,
};

const EXIT_CONFIG: u8 = 1;
const EXIT_ABORT: u8 = 2;

#[derive(Parser)]
#[command(
    name = "fiberq",
    version,
    about = "Quantum light propagation in nonlinear fiber"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-pump Bragg scattering between signal and idler.
    RunBs(RunArgs),
    /// Spontaneous four-wave mixing from a single pump.
    RunSpfwm(RunArgs),
    /// Discretised multimode master equation.
    RunMultimode(RunArgs),
    /// Classical mean field on the multimode grid.
    RunSemiclassical(RunArgs),
    /// Runs the built-in invariant checks.
    Validate,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    output: Option<String>,
    /// Integration step in km.
    #[arg(long)]
    step: Option<f64>,
    /// Fock cutoff per mode.
    #[arg(long)]
    nmax: Option<usize>,
    /// Number of sample rows.
    #[arg(long)]
    samples: Option<usize>,
    /// `key=v1,v2,...`: runs one scenario per value in parallel, each in its own
    /// subdirectory of the output directory.
    #[arg(long)]
    sweep: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (model, args) = match cli.command {
        Command::RunBs(a) => (ModelKind::Bs, a),
        Command::RunSpfwm(a) => (ModelKind::Spfwm, a),
        Command::RunMultimode(a) => (ModelKind::Multimode, a),
        Command::RunSemiclassical(a) => (ModelKind::Semiclassical, a),
        Command::Validate => return validate(),
    };
    let text = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => String::new(),
    };
    let overrides = overrides(model, &args);
    match &args.sweep {
        None => run_one(&text, &overrides),
        Some(plan) => sweep(&text, &overrides, plan),
    }
}

fn overrides(model: ModelKind, args: &RunArgs) -> Vec<(String, String)> {
    let section = match model {
        ModelKind::Semiclassical => "multimode",
        m => m.as_str(),
    };
    let mut out = vec![("model".to_string(), model.to_string())];
    if let Some(dir) = &args.output {
        out.push(("output.dir".into(), dir.clone()));
    }
    if let Some(h) = args.step {
        out.push(("integrator.step_km".into(), h.to_string()));
    }
    if let Some(n) = args.nmax {
        out.push((format!("{section}.n_max"), n.to_string()));
    }
    if let Some(s) = args.samples {
        out.push(("sample_count".into(), s.to_string()));
    }
    out
}

fn run_one(text: &str, overrides: &[(String, String)]) -> ExitCode {
    let config = match parse_config_with(text, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run_scenario(&config) {
        Ok(summary) => {
            // One write per run keeps parallel sweep output readable.
            print!("{}", report(&summary, Path::new(&config.output.dir)));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            ExitCode::from(if e.is_invariant_abort() {
                EXIT_ABORT
            } else {
                EXIT_CONFIG
            })
        }
    }
}

fn sweep(text: &str, base: &[(String, String)], plan: &str) -> ExitCode {
    let Some((key, values)) = plan.split_once('=') else {
        eprintln!("--sweep expects key=v1,v2,...");
        return ExitCode::from(EXIT_CONFIG);
    };
    let key = key.trim();
    // Resolve the base output directory once so every point nests under it.
    let root = match parse_config_with(text, base) {
        Ok(c) => PathBuf::from(c.output.dir),
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let points: Vec<Vec<(String, String)>> = values
        .split(',')
        .map(str::trim)
        .map(|v| {
            let mut o = base.to_vec();
            o.push((key.to_string(), v.to_string()));
            let dir = root.join(format!("{key}={v}"));
            o.push(("output.dir".into(), dir.to_string_lossy().into_owned()));
            o
        })
        .collect();
    let codes: Vec<ExitCode> = std::thread::scope(|s| {
        let handles: Vec<_> = points
            .iter()
            .map(|o| s.spawn(move || run_one(text, o)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    codes
        .into_iter()
        .find(|c| *c != ExitCode::SUCCESS)
        .unwrap_or(ExitCode::SUCCESS)
}

fn report(summary: &RunSummary, dir: &Path) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}: {} rows, {} steps in {:.2} s -> {}",
        summary.model,
        summary.rows,
        summary.steps_taken,
        summary.wall_time_s,
        dir.display()
    );
    match &summary.final_observables {
        FinalObservables::Quantum { record, heralding } => {
            let n: Vec<String> = record
                .mean_numbers
                .iter()
                .map(|x| format!("{x:.6}"))
                .collect();
            let _ = writeln!(out, "  final <n>: {}", n.join(", "));
            if let Some(h) = heralding {
                let _ = writeln!(
                    out,
                    "  coincidence {:.3e}  mismatch {:.3e}  false herald {:.3e}",
                    h.p_coincidence, h.p_mismatch, h.p_false_herald
                );
            }
        }
        FinalObservables::Classical {
            total_power,
            sprs_depletion_law,
            ..
        } => {
            let _ = writeln!(
                out,
                "  total power {total_power:.6e} W (depletion law {sprs_depletion_law:.6e} W)"
            );
        }
    }
    if let Some(w) = summary.invariant_maxima {
        let _ = writeln!(
            out,
            "  worst trace error {:.2e}, hermiticity {:.2e}, min eigenvalue {:.2e}",
            w.trace_err, w.herm_err, w.min_eig
        );
    }
    if let Some(pm) = &summary.phase_match {
        for w in &pm.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
    }
    out
}

fn validate() -> ExitCode {
    let results = self_test();
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ABORT)
    }
}
