//! CSV and text report writers.

use std::fmt::Write as _;
use std::path::Path;

use geofreq::modal::{dq_split, BlockKind, RealModalForm, Spectrum};
use nalgebra::{DMatrix, Matrix2};

use crate::error::{CliError, Result};
use crate::run::Execution;

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// Column names of the time-series CSV for a system of dimension `n`.
pub fn csv_header(n: usize, modal: Option<&RealModalForm>) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=n).map(|i| format!("u{i}")));
    cols.push("rho".into());
    if n >= 2 {
        cols.push("omega_norm".into());
    }
    cols.push("valid".into());
    for j in 1..=n {
        cols.push(format!("eig{j}_re"));
        cols.push(format!("eig{j}_im"));
    }
    if let Some(form) = modal {
        for (k, b) in form.blocks.iter().enumerate() {
            cols.push(format!("m{}_rho", k + 1));
            if matches!(b.kind, BlockKind::Pair(..)) {
                cols.push(format!("m{}_omega", k + 1));
            }
        }
    }
    cols
}

pub fn write_csv(exec: &Execution, path: &Path) -> Result<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let traj = &exec.trajectory;
    let series = &exec.series;
    let n = traj.dim();
    let modal = exec.modal.as_ref().filter(|_| exec.scenario.analysis.modal);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(csv_header(n, modal)).map_err(csv_err)?;

    let stride = exec.scenario.output.stride.max(1);
    let mut row: Vec<String> = Vec::new();
    for k in (0..traj.len()).step_by(stride) {
        row.clear();
        row.push(fmt_num(traj.times[k]));
        row.extend(traj.states[k].iter().map(|&v| fmt_num(v)));
        row.extend(traj.velocities[k].iter().map(|&v| fmt_num(v)));
        row.push(fmt_num(series.rho[k]));
        if n >= 2 {
            row.push(fmt_num(series.omega_norm[k]));
        }
        row.push(if series.valid[k] { "1" } else { "0" }.into());
        for j in 0..n {
            row.push(fmt_num(series.eig_re[k][j]));
            row.push(fmt_num(series.eig_im[k][j]));
        }
        if modal.is_some() {
            for b in &exec.blocks {
                row.push(fmt_num(b.rho[k]));
                if matches!(b.block.kind, BlockKind::Pair(..)) {
                    row.push(fmt_num(b.omega[k]));
                }
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

fn write_matrix(out: &mut String, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_num(v)).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

fn write_matrix2(out: &mut String, m: &Matrix2<f64>) {
    for i in 0..2 {
        let _ = writeln!(out, "    {} {}", fmt_num(m[(i, 0)]), fmt_num(m[(i, 1)]));
    }
}

/// Spectrum, `W`, `G`, residual and the `D`/`Q` split of each pair block.
pub fn modal_report(spectrum: &Spectrum, form: &RealModalForm) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dimension {}", spectrum.dim());
    let _ = writeln!(out, "eigenvalues");
    for z in spectrum.eigenvalues() {
        let _ = writeln!(out, "  {} {}", fmt_num(z.re), fmt_num(z.im));
    }
    let _ = writeln!(out, "blocks");
    for (k, b) in form.blocks.iter().enumerate() {
        match b.kind {
            BlockKind::Real(mu) => {
                let _ = writeln!(out, "  m{} real {}", k + 1, fmt_num(mu));
            }
            BlockKind::Pair(alpha, beta) => {
                let _ = writeln!(
                    out,
                    "  m{} pair {} {}",
                    k + 1,
                    fmt_num(alpha),
                    fmt_num(beta)
                );
            }
        }
    }
    let _ = writeln!(out, "W");
    write_matrix(&mut out, &form.w);
    let _ = writeln!(out, "G");
    write_matrix(&mut out, &form.g);
    let _ = writeln!(out, "residual {}", fmt_num(form.residual));
    let _ = writeln!(
        out,
        "eigenvector_condition {}",
        fmt_num(spectrum.eigvec_cond)
    );
    let _ = writeln!(out, "w_condition {}", fmt_num(form.w_cond));
    for (k, b) in form.blocks.iter().enumerate() {
        if !matches!(b.kind, BlockKind::Pair(..)) {
            continue;
        }
        let g = form.g.fixed_view::<2, 2>(b.offset, b.offset).into_owned();
        if let Ok((d, q)) = dq_split(&g) {
            let _ = writeln!(out, "m{} D", k + 1);
            write_matrix2(&mut out, &d);
            let _ = writeln!(out, "m{} Q", k + 1);
            write_matrix2(&mut out, &q);
        }
    }
    for w in &form.warnings {
        let _ = writeln!(out, "warning {w}");
    }
    out
}

/// Plain-text summary of a scenario run.
pub fn summary(exec: &Execution) -> String {
    let s = &exec.scenario;
    let traj = &exec.trajectory;
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", s.name);
    if !s.description.is_empty() {
        let _ = writeln!(out, "description {}", s.description);
    }
    let _ = writeln!(out, "system {}", s.system.kind());
    let _ = writeln!(out, "dimension {}", traj.dim());
    let _ = writeln!(out, "t_end {}", fmt_num(s.integration.t_end));
    let _ = writeln!(out, "step {}", fmt_num(s.integration.step));
    let _ = writeln!(out, "samples {}", traj.len());
    let invalid = exec.series.valid.iter().filter(|v| !**v).count();
    let _ = writeln!(out, "degenerate_samples {invalid}");
    let vec_str = |v: &[f64]| v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "x0 {}", vec_str(&s.initial.x0));
    if let Some(x) = traj.last_state() {
        let _ = writeln!(out, "x_final {}", vec_str(x.as_slice()));
    }
    let switches = exec.series.switch_indices();
    if !switches.is_empty() {
        let times: Vec<f64> = switches.iter().map(|&k| traj.times[k]).collect();
        let _ = writeln!(
            out,
            "eigenvalue_switches {} at t = {}",
            switches.len(),
            vec_str(&times)
        );
    }

    if let (Some(spectrum), Some(form)) = (&exec.spectrum, &exec.modal) {
        let _ = writeln!(out);
        let _ = writeln!(out, "[modal form of A]");
        out.push_str(&modal_report(spectrum, form));
    }

    if let Some(eq) = &exec.equilibrium {
        let _ = writeln!(out);
        let _ = writeln!(out, "[equilibrium]");
        let _ = writeln!(out, "x_star {}", vec_str(eq.state.as_slice()));
        let _ = writeln!(out, "jacobian_eigenvalues");
        for z in eq.spectrum.eigenvalues() {
            let _ = writeln!(out, "  {} {}", fmt_num(z.re), fmt_num(z.im));
        }
        let f = &eq.forecast;
        let _ = writeln!(out, "forecast_mode {:?}", f.mode);
        let _ = writeln!(out, "forecast_rho {}", fmt_num(f.rho_target));
        let _ = writeln!(out, "forecast_rho_amplitude {}", fmt_num(f.rho_amplitude));
        let _ = writeln!(out, "forecast_omega {}", fmt_num(f.omega_target));
        let _ = writeln!(
            out,
            "forecast_omega_range {} {}",
            fmt_num(f.omega_min),
            fmt_num(f.omega_max)
        );
        let _ = writeln!(out, "forecast_c12 {}", fmt_num(f.c12));
    }

    if let Some(t) = &exec.tail {
        let _ = writeln!(out);
        let _ = writeln!(out, "[tail]");
        let _ = writeln!(
            out,
            "window {} from t = {}",
            fmt_num(t.window),
            fmt_num(t.t_start)
        );
        let _ = writeln!(out, "valid_samples {}", t.samples);
        let _ = writeln!(out, "whole_cycles {}", t.whole_cycles);
        let _ = writeln!(
            out,
            "rho_mean {} std {}",
            fmt_num(t.rho_mean),
            fmt_num(t.rho_std)
        );
        let _ = writeln!(
            out,
            "omega_mean {} std {}",
            fmt_num(t.omega_mean),
            fmt_num(t.omega_std)
        );
        let _ = writeln!(
            out,
            "sign_changes rho {} omega {}",
            t.rho_sign_changes, t.omega_sign_changes
        );
    }

    if let Some(c) = &exec.cycle {
        let _ = writeln!(out);
        let _ = writeln!(out, "[limit cycle]");
        let _ = writeln!(out, "period {}", fmt_num(c.period));
        let _ = writeln!(out, "periods_detected {}", c.periods.len());
        let _ = writeln!(out, "period_spread {}", fmt_num(c.spread));
        let _ = writeln!(out, "t0 {}", fmt_num(c.t0));
        let _ = writeln!(out, "rho_integral {}", fmt_num(c.rho_integral));
        let _ = writeln!(out, "log_radius_ratio {}", fmt_num(c.log_radius_ratio));
        let _ = writeln!(out, "rho_periodicity {}", fmt_num(c.rho_periodicity));
        let _ = writeln!(out, "omega_periodicity {}", fmt_num(c.omega_periodicity));
    }

    if !exec.notes.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "[notes]");
        for n in &exec.notes {
            let _ = writeln!(out, "{n}");
        }
    }

    if !exec.checks.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "[checks]");
        for c in &exec.checks {
            let _ = writeln!(
                out,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    out
}
