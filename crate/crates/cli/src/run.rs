//! Integration, analysis and the checks a scenario asks for.

use std::path::{Path, PathBuf};

use geofreq::analysis::{
    analyze_trajectory, compare_tail, detect_limit_cycle, modal_block_series, modal_projection,
    predict_asymptote, AnalysisSeries, AsymptoteForecast, BlockSeries, CycleReport, DominantMode,
    TailReport, TailTolerance,
};
use geofreq::dynsys::{equilibrium_find, integrate, Trajectory};
use geofreq::modal::{classify_spectrum, real_modal_form_from, RealModalForm, Spectrum};
use nalgebra::DVector;

use crate::error::{CliError, Result};
use crate::output;
use crate::scenario::{DominantKind, Expectation, Scenario, DEFAULT_IDENTITY_TOL};

/// Largest accepted `|∮ rho dt|` over one detected period.
pub const CYCLE_INTEGRAL_TOL: f64 = 1e-2;
/// Largest accepted relative deviation from `T`-periodicity.
pub const CYCLE_PERIODICITY_TOL: f64 = 0.01;

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub no_modal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Equilibrium reached by the trajectory and the forecast built from its
/// Jacobian.
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub state: DVector<f64>,
    pub spectrum: Spectrum,
    pub forecast: AsymptoteForecast,
}

/// Everything computed for one scenario, before anything is written.
#[derive(Debug, Clone)]
pub struct Execution {
    pub scenario: Scenario,
    pub trajectory: Trajectory,
    pub series: AnalysisSeries,
    /// Spectrum and real modal form of `A` for affine systems.
    pub spectrum: Option<Spectrum>,
    pub modal: Option<RealModalForm>,
    pub blocks: Vec<BlockSeries>,
    pub equilibrium: Option<EquilibriumReport>,
    pub tail: Option<TailReport>,
    pub cycle: Option<CycleReport>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Execution {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Paths written by [`run`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub execution: Execution,
    pub csv: PathBuf,
    pub summary: PathBuf,
}

/// Applies the step/horizon overrides.
pub fn apply_overrides(scenario: &Scenario, opts: &RunOptions) -> Result<Scenario> {
    let mut s = scenario.clone();
    if let Some(h) = opts.step {
        s.integration.step = h;
    }
    if let Some(t) = opts.t_end {
        s.integration.t_end = t;
    }
    if opts.no_modal {
        s.analysis.modal = false;
    }
    s.validate()?;
    Ok(s)
}

/// Integrates and analyses `scenario` in memory.
pub fn execute(scenario: &Scenario) -> Result<Execution> {
    let model = scenario.system.build()?;
    let x0 = DVector::from_column_slice(&scenario.initial.x0);
    let trajectory = integrate(
        &model,
        &x0,
        scenario.integration.t_end,
        scenario.integration.step,
    )?;
    let mut series = analyze_trajectory(&trajectory, &model)?;
    let mut notes = Vec::new();

    let (mut spectrum, mut modal) = (None, None);
    if let Some((a, _)) = model.affine_parts() {
        match classify_spectrum(a) {
            Ok(found) => {
                modal = Some(real_modal_form_from(a, &found));
                spectrum = Some(found);
            }
            Err(e @ geofreq::Error::NonDiagonalizable { .. }) => {
                notes.push(format!("modal transform unavailable: {e}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let blocks = match &modal {
        Some(form) => modal_block_series(&trajectory, form)?,
        None => Vec::new(),
    };
    series.blocks = blocks.clone();

    let analysis = &scenario.analysis;
    let mut exec = Execution {
        scenario: scenario.clone(),
        trajectory,
        series,
        spectrum,
        modal,
        blocks,
        equilibrium: None,
        tail: None,
        cycle: None,
        checks: Vec::new(),
        notes,
    };

    match analysis.expect {
        Expectation::None => {}
        Expectation::ModalIdentity => modal_identity_checks(&mut exec),
        Expectation::Asymptote => asymptote_checks(&mut exec, &model)?,
        Expectation::LimitCycle => cycle_checks(&mut exec)?,
    }
    Ok(exec)
}

fn modal_identity_checks(exec: &mut Execution) {
    let tol = exec
        .scenario
        .analysis
        .identity_tol
        .unwrap_or(DEFAULT_IDENTITY_TOL);
    if exec.blocks.is_empty() {
        let reason = exec
            .notes
            .first()
            .cloned()
            .unwrap_or_else(|| "no modal blocks".into());
        exec.checks
            .push(Check::new("modal-identity", false, reason));
        return;
    }
    for (k, b) in exec.blocks.iter().enumerate() {
        let lambda = b.block.eigenvalue();
        let mut worst: f64 = 0.0;
        let mut valid = 0usize;
        for ((rho, omega), ok) in b.rho.iter().zip(&b.omega).zip(&b.valid) {
            if *ok {
                valid += 1;
                worst = worst
                    .max((rho - lambda.re).abs())
                    .max((omega - lambda.im).abs());
            }
        }
        exec.checks.push(Check::new(
            format!("modal-identity m{}", k + 1),
            valid > 0 && worst <= tol,
            format!(
                "block eigenvalue {} {:+}j, max deviation {worst:e} over {valid} valid samples (tol {tol:e})",
                lambda.re, lambda.im
            ),
        ));
    }
}

fn asymptote_checks(exec: &mut Execution, model: &geofreq::dynsys::SystemModel) -> Result<()> {
    let analysis = exec.scenario.analysis.clone();
    let x_end = exec
        .trajectory
        .last_state()
        .expect("trajectories are non-empty")
        .clone();
    let state = match equilibrium_find(model, &x_end) {
        Ok(x) => x,
        Err(e) => {
            exec.checks
                .push(Check::new("equilibrium", false, e.to_string()));
            return Ok(());
        }
    };
    let spectrum = match classify_spectrum(&model.jacobian(&state)) {
        Ok(s) => s,
        Err(e) => {
            exec.checks
                .push(Check::new("equilibrium spectrum", false, e.to_string()));
            return Ok(());
        }
    };
    let u0 = exec.trajectory.velocities[0].as_slice();
    let forecast =
        match modal_projection(&spectrum, u0).and_then(|p| predict_asymptote(&spectrum, &p)) {
            Ok(f) => f,
            Err(e) => {
                exec.checks
                    .push(Check::new("forecast", false, e.to_string()));
                return Ok(());
            }
        };

    if let Some(kind) = analysis.dominant {
        let found = match forecast.mode {
            DominantMode::Real(_) => DominantKind::Real,
            DominantMode::Pair { .. } => DominantKind::Pair,
        };
        exec.checks.push(Check::new(
            "dominant mode",
            found == kind,
            format!("expected {kind:?}, found {:?}", forecast.mode),
        ));
    }

    let preset = match forecast.mode {
        DominantMode::Real(_) => TailTolerance::real_dominant(),
        DominantMode::Pair { .. } => TailTolerance::oscillatory(),
    };
    let uniform = analysis.uniform.unwrap_or(preset.uniform);
    let tol = TailTolerance {
        rel: analysis.rel_tol.unwrap_or(preset.rel),
        abs: analysis.abs_tol.unwrap_or(if uniform {
            analysis.rel_tol.unwrap_or(preset.abs)
        } else {
            preset.abs
        }),
        min_sign_changes: analysis.min_sign_changes.unwrap_or(if uniform {
            0
        } else {
            preset.min_sign_changes
        }),
        uniform,
    };
    let tail = compare_tail(&exec.series, &forecast, analysis.tail_window, &tol)?;

    let rho_measure = if tol.uniform {
        tail.rho_max_dev
    } else {
        (tail.rho_mean - tail.rho_target).abs()
    };
    exec.checks.push(Check::new(
        "tail rho",
        tail.rho_ok,
        format!(
            "target {}, mean {}, deviation {rho_measure:e} (rel tol {:e}{})",
            tail.rho_target,
            tail.rho_mean,
            tol.rel,
            if tol.uniform { ", every sample" } else { "" }
        ),
    ));
    let omega_detail = if tail.omega_target == 0.0 {
        format!("max |omega| {:e} (abs tol {:e})", tail.omega_max, tol.abs)
    } else {
        let measure = if tol.uniform {
            tail.omega_max_dev
        } else {
            (tail.omega_mean - tail.omega_target).abs()
        };
        format!(
            "target {}, mean {}, deviation {measure:e} (rel tol {:e}{})",
            tail.omega_target,
            tail.omega_mean,
            tol.rel,
            if tol.uniform { ", every sample" } else { "" }
        )
    };
    exec.checks
        .push(Check::new("tail |omega|", tail.omega_ok, omega_detail));
    if tol.min_sign_changes > 0 {
        exec.checks.push(Check::new(
            "tail oscillation",
            tail.oscillation_ok,
            format!(
                "{} sign changes of rho - target, {} of |omega| - target (need {})",
                tail.rho_sign_changes, tail.omega_sign_changes, tol.min_sign_changes
            ),
        ));
    }
    if tail.assumes_orthonormal_frame && model.affine_parts().is_none() {
        exec.notes.push(
            "elliptical forecast treats the dominant eigenvectors as an orthonormal frame".into(),
        );
    }
    exec.tail = Some(tail);
    exec.equilibrium = Some(EquilibriumReport {
        state,
        spectrum,
        forecast,
    });
    Ok(())
}

fn cycle_checks(exec: &mut Execution) -> Result<()> {
    let Some(cycle) = detect_limit_cycle(&exec.trajectory, &exec.series)? else {
        exec.checks.push(Check::new(
            "limit cycle",
            false,
            "fewer than three periods found in the second half of the horizon",
        ));
        return Ok(());
    };
    exec.checks.push(Check::new(
        "limit cycle period",
        cycle.is_consistent(),
        format!(
            "T = {} over {} periods, spread {:e} (max {:e})",
            cycle.period,
            cycle.periods.len(),
            cycle.spread,
            geofreq::analysis::MAX_PERIOD_SPREAD
        ),
    ));
    exec.checks.push(Check::new(
        "limit cycle rho integral",
        cycle.rho_integral.abs() < CYCLE_INTEGRAL_TOL,
        format!(
            "∮ rho dt = {:e}, ln(|u(t0+T)|/|u(t0)|) = {:e} (tol {CYCLE_INTEGRAL_TOL:e})",
            cycle.rho_integral, cycle.log_radius_ratio
        ),
    ));
    exec.checks.push(Check::new(
        "limit cycle periodicity",
        cycle.rho_periodicity < CYCLE_PERIODICITY_TOL
            && cycle.omega_periodicity < CYCLE_PERIODICITY_TOL,
        format!(
            "rho {:e}, |omega| {:e} (tol {CYCLE_PERIODICITY_TOL:e})",
            cycle.rho_periodicity, cycle.omega_periodicity
        ),
    ));
    exec.cycle = Some(cycle);
    Ok(())
}

/// Output directory: `--out-dir`, then the scenario, then `GEOFREQ_OUT`,
/// then the working directory.
pub fn output_dir(scenario: &Scenario, opts: &RunOptions) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| scenario.output.dir.clone())
        .or_else(|| std::env::var_os("GEOFREQ_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Executes `scenario` and writes `<name>_timeseries.csv` and
/// `<name>_summary.txt`.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let scenario = apply_overrides(scenario, opts)?;
    let execution = execute(&scenario)?;
    let dir = output_dir(&scenario, opts);
    write_outputs(execution, &dir)
}

pub fn write_outputs(execution: Execution, dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = &execution.scenario.name;
    let csv = dir.join(format!("{name}_timeseries.csv"));
    let summary = dir.join(format!("{name}_summary.txt"));
    output::write_csv(&execution, &csv)?;
    std::fs::write(&summary, output::summary(&execution)).map_err(|e| CliError::io(&summary, e))?;
    Ok(RunOutcome {
        execution,
        csv,
        summary,
    })
}
