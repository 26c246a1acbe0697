use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{InitialState, ModelConfig, ModelKind, ScenarioConfig};
use crate::error::{Error, Result};
use crate::lindblad::{
    propagate, propagate_varying, uniform_samples, InvariantRecord, LindbladSystem, Propagation,
};
use crate::models::{
    build_bragg, build_multimode, build_multimode_at, build_spfwm, phase_match, MultimodeParams,
    PhaseMatchReport,
};
use crate::observables::{heralding_metrics, HeraldingMetrics, ObservableRecord};
use crate::semiclassical::{integrate_mean_field, pump_depletion, MeanFieldConfig, SpectralField};
use crate::state::DensityMatrix;
use crate::tensor::CompositeSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FinalObservables {
    Quantum {
        record: ObservableRecord,
        /// Two-mode runs only.
        heralding: Option<HeraldingMetrics>,
    },
    Classical {
        powers: Vec<f64>,
        total_power: f64,
        /// Total input power after spontaneous-Raman depletion alone.
        sprs_depletion_law: f64,
    },
}

/// Machine-readable record of one run, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: ModelKind,
    pub final_observables: FinalObservables,
    /// Worst trace/Hermiticity error and smallest eigenvalue over all samples
    /// and monitor checkpoints. Absent for the classical model.
    pub invariant_maxima: Option<InvariantRecord>,
    pub phase_match: Option<PhaseMatchReport>,
    pub steps_taken: usize,
    pub rows: usize,
    pub wall_time_s: f64,
    pub config: ScenarioConfig,
}

/// Sampled trajectory as CSV text plus the run summary.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub summary: RunSummary,
}

/// Executes the configured model end to end without touching the filesystem.
pub fn simulate(config: &ScenarioConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let length = config.model.length_km();
    let samples = uniform_samples(length, config.sample_count);
    let (csv, final_observables, invariants, phase, steps, rows) = match &config.model {
        ModelConfig::Bs(p) => {
            let sys = build_bragg(p)?;
            let run = run_quantum(&sys, config, &samples)?;
            quantum_output(run, Some(phase_match(p)), None)?
        }
        ModelConfig::Spfwm(p) => {
            let sys = build_spfwm(p)?;
            let run = run_quantum(&sys, config, &samples)?;
            quantum_output(run, Some(phase_match(p)), None)?
        }
        ModelConfig::Multimode { params, length_km } => {
            let rho0 = initial_density(params.space()?, &config.initial_state)?;
            let run = if params.pumps.is_empty() {
                propagate(
                    &build_multimode(params)?,
                    &rho0,
                    *length_km,
                    &config.integrator,
                    &samples,
                )?
            } else {
                let build = |z: f64| build_multimode_at(params, z);
                propagate_varying(build, &rho0, *length_km, &config.integrator, &samples)?
            };
            quantum_output(run, None, Some(params))?
        }
        ModelConfig::Semiclassical {
            params,
            length_km,
            initial_powers,
            self_steepening,
            sprs_loss,
        } => {
            let mf = MeanFieldConfig {
                step_km: config.integrator.step_km,
                include_self_steepening: *self_steepening,
                include_sprs_loss: *sprs_loss,
            };
            let initial = SpectralField::from_powers(initial_powers, params.delta_w)?;
            let traj = integrate_mean_field(params, &initial, *length_km, &mf, &samples)?;
            let total0: f64 = initial_powers.iter().sum();
            let mut csv = String::from("z_km");
            for g in &params.grid {
                let _ = write!(csv, ",power_{g}");
            }
            csv.push_str(",total_power,sprs_depletion_law\n");
            let mut last = None;
            for (z, field) in traj.z_samples.iter().zip(&traj.fields) {
                let powers = field.powers(params.delta_w);
                let total: f64 = powers.iter().sum();
                let law = pump_depletion(total0, *z, params)?;
                let _ = write!(csv, "{z}");
                for p in &powers {
                    let _ = write!(csv, ",{p}");
                }
                let _ = writeln!(csv, ",{total},{law}");
                last = Some(FinalObservables::Classical {
                    powers,
                    total_power: total,
                    sprs_depletion_law: law,
                });
            }
            let steps = if *length_km > 0.0 {
                (length_km / config.integrator.step_km - 1e-9).ceil() as usize
            } else {
                0
            };
            let rows = traj.z_samples.len();
            (csv, last.expect("initial row"), None, None, steps, rows)
        }
    };
    Ok(RunOutput {
        csv,
        summary: RunSummary {
            model: config.model.kind(),
            final_observables,
            invariant_maxima: invariants,
            phase_match: phase,
            steps_taken: steps,
            rows,
            wall_time_s: started.elapsed().as_secs_f64(),
            config: config.clone(),
        },
    })
}

type QuantumOutput = (
    String,
    FinalObservables,
    Option<InvariantRecord>,
    Option<PhaseMatchReport>,
    usize,
    usize,
);

fn run_quantum(
    sys: &LindbladSystem,
    config: &ScenarioConfig,
    samples: &[f64],
) -> Result<Propagation> {
    let rho0 = initial_density(sys.space().clone(), &config.initial_state)?;
    propagate(
        sys,
        &rho0,
        config.model.length_km(),
        &config.integrator,
        samples,
    )
}

fn quantum_output(
    run: Propagation,
    phase: Option<PhaseMatchReport>,
    grid: Option<&MultimodeParams>,
) -> Result<QuantumOutput> {
    let records = &run.trajectory.records;
    let two_mode = records[0].joint.is_some();
    let mut csv = String::new();
    if two_mode {
        let joint = records[0].joint.as_ref().expect("two-mode table");
        csv.push_str("z_km");
        for s in 0..joint.signal_levels() {
            for i in 0..joint.idler_levels() {
                let _ = write!(csv, ",P_{s}_{i}");
            }
        }
        csv.push_str(",n_s_mean,n_i_mean,re_b_s,im_b_s,re_b_i,im_b_i,trace_err,min_eig\n");
    } else {
        let labels: Vec<String> = match grid {
            Some(p) => p.quantum_modes().iter().map(i64::to_string).collect(),
            None => (0..records[0].mean_numbers.len())
                .map(|k| k.to_string())
                .collect(),
        };
        csv.push_str("z_km");
        for l in &labels {
            let _ = write!(csv, ",n_mean_{l},re_a_{l},im_a_{l}");
        }
        csv.push_str(",trace_err,min_eig\n");
    }
    for (z, rec) in run.trajectory.z_samples.iter().zip(records) {
        let _ = write!(csv, "{z}");
        if let Some(joint) = &rec.joint {
            for p in joint.probs() {
                let _ = write!(csv, ",{p}");
            }
            let (b_s, b_i) = (rec.mean_fields[0], rec.mean_fields[1]);
            let _ = write!(
                csv,
                ",{},{},{},{},{},{}",
                rec.mean_numbers[0], rec.mean_numbers[1], b_s.re, b_s.im, b_i.re, b_i.im
            );
        } else {
            for (n, a) in rec.mean_numbers.iter().zip(&rec.mean_fields) {
                let _ = write!(csv, ",{n},{},{}", a.re, a.im);
            }
        }
        let _ = writeln!(
            csv,
            ",{},{}",
            rec.invariants.trace_err, rec.invariants.min_eig
        );
    }
    let record = ObservableRecord::from_state(&run.final_state)?;
    let heralding = record.joint.as_ref().map(heralding_metrics);
    let rows = run.trajectory.z_samples.len();
    Ok((
        csv,
        FinalObservables::Quantum { record, heralding },
        Some(run.worst),
        phase,
        run.steps_taken,
        rows,
    ))
}

pub fn initial_density(space: CompositeSpace, state: &InitialState) -> Result<DensityMatrix> {
    let modes = space.n_modes();
    let check = |len: usize| crate::error::ensure_dim("initial state modes", modes, len);
    match state {
        InitialState::Vacuum => Ok(DensityMatrix::vacuum(space)),
        InitialState::Fock(n) => {
            check(n.len())?;
            DensityMatrix::fock(space, n)
        }
        InitialState::Coherent(a) => {
            check(a.len())?;
            let alphas: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            DensityMatrix::coherent(space, &alphas)
        }
    }
}

/// Failure of [`run_scenario`].
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Simulation(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    /// True when the integrator stopped on a trace or positivity violation.
    pub fn is_invariant_abort(&self) -> bool {
        matches!(self, RunError::Simulation(Error::InvariantBreach { .. }))
    }
}

/// Runs the scenario and writes the CSV and summary under `config.output.dir`.
pub fn run_scenario(config: &ScenarioConfig) -> std::result::Result<RunSummary, RunError> {
    let out = simulate(config)?;
    let dir = Path::new(&config.output.dir);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let csv_path = dir.join(&config.output.csv);
    fs::write(&csv_path, &out.csv).map_err(io(&csv_path))?;
    let summary_path = dir.join(&config.output.summary);
    let json = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    fs::write(&summary_path, json).map_err(io(&summary_path))?;
    Ok(out.summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::IntegratorConfig;
    use crate::models::BsParams;
    use crate::scenario::config::{parse_config, OutputPaths};

    fn bs_config(params: BsParams, samples: usize) -> ScenarioConfig {
        ScenarioConfig {
            model: ModelConfig::Bs(params),
            initial_state: InitialState::Fock(vec![1, 0]),
            integrator: IntegratorConfig::default(),
            sample_count: samples,
            output: OutputPaths::default(),
        }
    }

    fn column(csv: &str, name: &str) -> Vec<f64> {
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let idx = header.iter().position(|h| *h == name).unwrap();
        lines
            .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
            .collect()
    }

    #[test]
    fn ideal_bragg_csv_follows_rabi_curve() {
        let p = BsParams {
            length_km: 2.0,
            ..BsParams::ideal().with_zero_wavenumbers()
        };
        let out = simulate(&bs_config(p, 21)).unwrap();
        let header = out.csv.lines().next().unwrap();
        assert_eq!(
            header,
            "z_km,P_0_0,P_0_1,P_1_0,P_1_1,n_s_mean,n_i_mean,re_b_s,im_b_s,re_b_i,im_b_i,trace_err,min_eig"
        );
        let z = column(&out.csv, "z_km");
        let p_i = column(&out.csv, "P_0_1");
        assert_eq!(z.len(), 21);
        for (z, p) in z.iter().zip(&p_i) {
            assert!((p - (2.0 * z).sin().powi(2)).abs() < 1e-8);
        }
        assert!(z.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(out.summary.rows, 21);
        assert_eq!(out.summary.steps_taken, 2000);
    }

    #[test]
    fn zero_length_gives_one_row() {
        let p = BsParams {
            length_km: 0.0,
            ..BsParams::ideal()
        };
        let out = simulate(&bs_config(p, 11)).unwrap();
        assert_eq!(out.csv.lines().count(), 2);
        assert_eq!(column(&out.csv, "P_1_0"), vec![1.0]);
    }

    #[test]
    fn identical_configs_give_identical_csv() {
        let cfg = bs_config(
            BsParams {
                length_km: 0.5,
                n_max: 2,
                ..BsParams::lossy()
            },
            11,
        );
        assert_eq!(simulate(&cfg).unwrap().csv, simulate(&cfg).unwrap().csv);
    }

    #[test]
    fn shared_schema_across_two_mode_models() {
        let spfwm = parse_config(
            "model = spfwm\nspfwm.gamma = 1\nspfwm.pump_power = 1\nspfwm.length_km = 0.1\nspfwm.n_max = 1\nsample_count = 3\n",
        )
        .unwrap();
        let bs = bs_config(
            BsParams {
                length_km: 0.1,
                ..BsParams::ideal()
            },
            3,
        );
        let header =
            |c: &ScenarioConfig| simulate(c).unwrap().csv.lines().next().unwrap().to_string();
        assert_eq!(header(&spfwm), header(&bs));
    }

    #[test]
    fn multimode_and_semiclassical_runs() {
        let mm = parse_config(
            "model = multimode\nmultimode.grid = -1, 0, 1\nmultimode.delta_w = 1e12\nmultimode.pumps = 0:1:0.5\nmultimode.n_max = 2\nmultimode.length_km = 0.2\nsample_count = 5\n",
        )
        .unwrap();
        let out = simulate(&mm).unwrap();
        assert!(out.csv.starts_with("z_km,P_0_0,"));
        assert_eq!(out.csv.lines().count(), 6);

        let semi = parse_config(
            "model = semiclassical\nmultimode.grid = -1, 0, 1\nmultimode.delta_w = 1e12\nmultimode.length_km = 0.5\nsemiclassical.initial_powers = 0.1, 1, 0\nsample_count = 6\n",
        )
        .unwrap();
        let out = simulate(&semi).unwrap();
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(
            lines[0],
            "z_km,power_-1,power_0,power_1,total_power,sprs_depletion_law"
        );
        assert_eq!(lines.len(), 7);
        let total = column(&out.csv, "total_power");
        assert!(total.iter().all(|t| (t - 1.1).abs() < 1e-9));
    }

    #[test]
    fn invariant_abort_is_reported_with_position() {
        let mut cfg = bs_config(
            BsParams {
                alpha_s: 1000.0,
                ..BsParams::ideal()
            },
            3,
        );
        cfg.integrator.step_km = 0.01;
        let err = simulate(&cfg).unwrap_err();
        assert!(matches!(err, Error::InvariantBreach { z_km, .. } if z_km > 0.0));
        assert!(RunError::from(err).is_invariant_abort());
    }

    #[test]
    fn run_writes_csv_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = bs_config(
            BsParams {
                length_km: 0.2,
                ..BsParams::ideal()
            },
            3,
        );
        cfg.output.dir = dir.path().join("nested").to_string_lossy().into_owned();
        let summary = run_scenario(&cfg).unwrap();
        let csv = fs::read_to_string(dir.path().join("nested/trajectory.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
        let json = fs::read_to_string(dir.path().join("nested/summary.json")).unwrap();
        let back: RunSummary = serde_json::from_str(&json).unwrap();
        assert_eq!(back.config, summary.config);
        assert!(back.invariant_maxima.unwrap().trace_err < 1e-12);
    }
}
