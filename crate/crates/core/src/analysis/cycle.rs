use super::AnalysisSeries;
use crate::dynsys::Trajectory;
use crate::error::{Error, Result};

/// Largest accepted relative spread `(max − min) / mean` of the detected
/// periods.
pub const MAX_PERIOD_SPREAD: f64 = 0.01;

/// Share of the horizon discarded as transient before looking for a cycle.
const TRANSIENT_FRACTION: f64 = 0.5;

/// A periodic orbit found on the Poincaré section `u1 = mean(u1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    /// Times of the positive-going section crossings.
    pub crossings: Vec<f64>,
    pub periods: Vec<f64>,
    pub period: f64,
    /// `(max − min) / mean` over `periods`.
    pub spread: f64,
    /// Start of the cycle used for the integrals below.
    pub t0: f64,
    /// `∫ rho dt` over `[t0, t0 + T]`.
    pub rho_integral: f64,
    /// `ln(|u(t0 + T)| / |u(t0)|)`.
    pub log_radius_ratio: f64,
    /// `max |rho(t + T) − rho(t)| / max |rho|` over one cycle.
    pub rho_periodicity: f64,
    /// Same for `|omega|`.
    pub omega_periodicity: f64,
}

impl CycleReport {
    pub fn is_consistent(&self) -> bool {
        self.periods.len() >= 3 && self.spread < MAX_PERIOD_SPREAD
    }
}

/// Linear interpolation of `values` sampled at the uniform-or-not `times`.
fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = match times.binary_search_by(|x| x.total_cmp(&t)) {
        Ok(k) => return values[k],
        Err(k) => k,
    };
    let k = k.clamp(1, times.len() - 1);
    let (t0, t1) = (times[k - 1], times[k]);
    let w = (t - t0) / (t1 - t0);
    values[k - 1] * (1.0 - w) + values[k] * w
}

/// Trapezoidal `∫ values dt` over `[a, b]`, with linearly interpolated ends.
fn integrate_between(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let mut pts = vec![(a, interp(times, values, a))];
    pts.extend(
        times
            .iter()
            .zip(values)
            .filter(|(t, _)| **t > a && **t < b)
            .map(|(t, v)| (*t, *v)),
    );
    pts.push((b, interp(times, values, b)));
    pts.windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum()
}

/// Looks for a periodic orbit in the second half of the trajectory.
///
/// Returns `Ok(None)` when fewer than three full periods are found. All
/// samples in the analysed half must be non-degenerate.
pub fn detect_limit_cycle(
    traj: &Trajectory,
    series: &AnalysisSeries,
) -> Result<Option<CycleReport>> {
    if traj.len() != series.len() || traj.is_empty() {
        return Err(Error::InvalidInput(
            "trajectory and analysis series must be aligned and non-empty".into(),
        ));
    }
    let start = ((traj.len() as f64) * TRANSIENT_FRACTION) as usize;
    let times = &traj.times[start..];
    if series.valid[start..].iter().any(|v| !v) {
        return Ok(None);
    }
    let u1: Vec<f64> = traj.velocities[start..].iter().map(|u| u[0]).collect();
    let section = u1.iter().sum::<f64>() / u1.len() as f64;

    let crossings: Vec<f64> = (1..u1.len())
        .filter(|&k| u1[k - 1] < section && u1[k] >= section)
        .map(|k| {
            let w = (section - u1[k - 1]) / (u1[k] - u1[k - 1]);
            times[k - 1] + w * (times[k] - times[k - 1])
        })
        .collect();
    if crossings.len() < 4 {
        return Ok(None);
    }
    let periods: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let period = periods.iter().sum::<f64>() / periods.len() as f64;
    let max = periods.iter().copied().fold(f64::MIN, f64::max);
    let min = periods.iter().copied().fold(f64::MAX, f64::min);
    let spread = (max - min) / period;

    let rho = &series.rho[start..];
    let omega = &series.omega_norm[start..];
    let radius: Vec<f64> = traj.velocities[start..].iter().map(|u| u.norm()).collect();

    // Compare the second-to-last complete cycle with the one after it.
    let n = crossings.len();
    let t0 = crossings[n - 3];
    let t1 = t0 + period;
    let rho_integral = integrate_between(times, rho, t0, t1);
    let log_radius_ratio = (interp(times, &radius, t1) / interp(times, &radius, t0)).ln();

    let periodicity = |values: &[f64]| {
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for (t, v) in times.iter().zip(values) {
            if *t < t0 || *t > t1 {
                continue;
            }
            scale = scale.max(v.abs());
            worst = worst.max((interp(times, values, t + period) - v).abs());
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    };

    Ok(Some(CycleReport {
        rho_periodicity: periodicity(rho),
        omega_periodicity: periodicity(omega),
        crossings,
        periods,
        period,
        spread,
        t0,
        rho_integral,
        log_radius_ratio,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze_trajectory;
    use crate::dynsys::{integrate, SystemModel};
    use nalgebra::{DMatrix, DVector};
    use std::sync::Arc;

    #[test]
    fn interpolation_and_quadrature() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let v: Vec<f64> = t.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((interp(&t, &v, 0.555) - 2.11).abs() < 1e-12);
        // ∫ (2x + 1) dx over [0.105, 0.905] = [x² + x]
        let exact = (0.905f64.powi(2) + 0.905) - (0.105f64.powi(2) + 0.105);
        assert!((integrate_between(&t, &v, 0.105, 0.905) - exact).abs() < 1e-12);
    }

    #[test]
    fn van_der_pol_orbit() {
        // x'' − μ (1 − x²) x' + x = 0 with μ = 1 has a stable limit cycle
        // with period ≈ 6.6633.
        let mu = 1.0;
        let model = SystemModel::nonlinear(
            2,
            Arc::new(move |x: &DVector<f64>| {
                DVector::from_vec(vec![x[1], mu * (1.0 - x[0] * x[0]) * x[1] - x[0]])
            }),
            Some(Arc::new(move |x: &DVector<f64>| {
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        0.0,
                        1.0,
                        -2.0 * mu * x[0] * x[1] - 1.0,
                        mu * (1.0 - x[0] * x[0]),
                    ],
                )
            })),
        );
        let traj = integrate(&model, &DVector::from_vec(vec![2.0, 0.0]), 120.0, 1e-3).unwrap();
        let series = analyze_trajectory(&traj, &model).unwrap();
        let report = detect_limit_cycle(&traj, &series).unwrap().unwrap();
        assert!(report.is_consistent(), "{report:?}");
        assert!(
            (report.period - 6.6633).abs() < 1e-3,
            "period {}",
            report.period
        );
        assert!((report.rho_integral - report.log_radius_ratio).abs() < 1e-4);
        assert!(report.rho_integral.abs() < 1e-2);
        assert!(report.rho_periodicity < 0.01 && report.omega_periodicity < 0.01);
    }

    #[test]
    fn decaying_system_has_no_cycle() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        let model = SystemModel::linear(a).unwrap();
        let traj = integrate(&model, &DVector::from_vec(vec![1.0, 1.0]), 10.0, 1e-2).unwrap();
        let series = analyze_trajectory(&traj, &model).unwrap();
        assert_eq!(detect_limit_cycle(&traj, &series).unwrap(), None);
    }
}
