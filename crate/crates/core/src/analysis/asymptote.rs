use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::AnalysisSeries;
use crate::error::{Error, Result};
use crate::modal::{Spectrum, CLUSTER_TOL};

/// Minimum real-part gap between the dominant mode and the next excited one.
pub const DOMINANCE_GAP: f64 = 1e-9;

/// Relative size below which a modal coefficient counts as not excited.
const EXCITATION_TOL: f64 = 1e-12;

/// Initial participation of each mode in `u(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalProjection {
    /// `cⱼ = lⱼᵀ u(0)`, aligned with [`Spectrum::eigenvalues`].
    pub coefficients: Vec<Complex64>,
    /// Index of the dominant eigenvalue (the `β > 0` member for a pair), or
    /// `None` when no mode is excited.
    pub dominant: Option<usize>,
    /// Real-part gap between the dominant mode and the next excited mode
    /// with a different eigenvalue; infinite when there is none.
    pub dominance_gap: f64,
    /// Semi-axes `(c1, c2)`, `c1 ≥ c2`, of the ellipse traced by a dominant
    /// pair in its own plane.
    pub ellipse: Option<(f64, f64)>,
    pub c12: Option<f64>,
    pub c21: Option<f64>,
}

/// Participation factors of `u0` in the modes of `spectrum`.
///
/// For a dominant pair, `c1` and `c2` are taken as the semi-axes of the
/// ellipse `2 Re(c r e^{jβt})`, whose principal directions are orthogonal,
/// so the elliptical forecast applies without assuming orthonormal
/// eigenvectors.
pub fn modal_projection(spectrum: &Spectrum, u0: &[f64]) -> Result<ModalProjection> {
    let n = spectrum.dim();
    if u0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u0.len(),
        });
    }
    let u = DVector::from_iterator(n, u0.iter().map(|&v| Complex64::new(v, 0.0)));
    let coefficients: Vec<Complex64> = (&spectrum.left * u).iter().copied().collect();
    let eigs = spectrum.eigenvalues();

    // Contribution size of each mode to u(0).
    let weight: Vec<f64> = (0..n)
        .map(|j| coefficients[j].norm() * spectrum.right.column(j).norm())
        .collect();
    let max_weight = weight.iter().copied().fold(0.0, f64::max);
    let excited = |j: usize| max_weight > 0.0 && weight[j] > EXCITATION_TOL * max_weight;
    // One representative per mode: reals, and the β > 0 member of each pair.
    let representatives: Vec<usize> = (0..n)
        .filter(|&j| eigs[j].im >= 0.0)
        .filter(|&j| excited(j) || (eigs[j].im > 0.0 && excited(j + 1)))
        .collect();

    let dominant = representatives
        .iter()
        .copied()
        .max_by(|&a, &b| eigs[a].re.total_cmp(&eigs[b].re).then(b.cmp(&a)));
    let scale = 1.0 + eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dominance_gap = match dominant {
        Some(d) => representatives
            .iter()
            .filter(|&&j| (eigs[j] - eigs[d]).norm() > CLUSTER_TOL * scale)
            .map(|&j| eigs[d].re - eigs[j].re)
            .fold(f64::INFINITY, f64::min),
        None => 0.0,
    };

    let mut projection = ModalProjection {
        coefficients,
        dominant,
        dominance_gap,
        ellipse: None,
        c12: None,
        c21: None,
    };
    if let Some(d) = dominant {
        if eigs[d].im > 0.0 {
            let cr = spectrum.right.column(d) * projection.coefficients[d];
            let mut pq = DMatrix::zeros(n, 2);
            for i in 0..n {
                pq[(i, 0)] = cr[i].re;
                pq[(i, 1)] = cr[i].im;
            }
            let sv = pq.singular_values();
            let (c1, c2) = (2.0 * sv.max(), 2.0 * sv.min());
            projection.ellipse = Some((c1, c2));
            projection.c12 = Some(c1 / c2);
            projection.c21 = Some(c2 / c1);
        }
    }
    Ok(projection)
}

impl ModalProjection {
    /// `Σ cⱼ e^{λⱼ t} rⱼ`, the linear solution for `u(t)`.
    pub fn reconstruct(&self, spectrum: &Spectrum, t: f64) -> DVector<f64> {
        let eigs = spectrum.eigenvalues();
        let n = spectrum.dim();
        let mut out = DVector::<Complex64>::zeros(n);
        for (j, (c, lambda)) in self.coefficients.iter().zip(&eigs).enumerate() {
            out += spectrum.right.column(j) * (c * (lambda * t).exp());
        }
        out.map(|z| z.re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DominantMode {
    Real(f64),
    Pair { alpha: f64, beta: f64 },
}

/// Where `rho` and `|omega|` settle as the dominant mode takes over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteForecast {
    pub mode: DominantMode,
    /// Centre of the `rho` oscillation (or its limit).
    pub rho_target: f64,
    /// Half peak-to-peak of the `rho` oscillation.
    pub rho_amplitude: f64,
    pub omega_target: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub c12: f64,
    pub isotropic: bool,
}

impl AsymptoteForecast {
    /// Real dominant eigenvalue: `rho → μ`, `|omega| → 0`.
    pub fn real(mu: f64) -> Self {
        Self {
            mode: DominantMode::Real(mu),
            rho_target: mu,
            rho_amplitude: 0.0,
            omega_target: 0.0,
            omega_min: 0.0,
            omega_max: 0.0,
            c12: 1.0,
            isotropic: false,
        }
    }

    /// Dominant pair `α ± jβ` whose trajectory is an ellipse with axis ratio
    /// `c12 = c1/c2`.
    ///
    /// With `η = c1 cos βt`, `σ = c2 sin βt`:
    ///
    /// ```text
    /// rho     = α + β (c21 − c12) ησ / (η² + σ²)
    /// |omega| = β (c21 η² + c12 σ²) / (η² + σ²)
    /// ```
    ///
    /// `|ησ / (η² + σ²)| ≤ 1/2`, so `rho` swings by `|β (c12 − c21)| / 2`
    /// around `α`, and `|omega|` stays between `β min(c12, c21)` and
    /// `β max(c12, c21)`.
    pub fn pair(alpha: f64, beta: f64, c12: f64) -> Self {
        let c21 = 1.0 / c12;
        Self {
            mode: DominantMode::Pair { alpha, beta },
            rho_target: alpha,
            rho_amplitude: (beta * (c12 - c21)).abs() / 2.0,
            omega_target: beta,
            omega_min: beta * c12.min(c21),
            omega_max: beta * c12.max(c21),
            c12,
            isotropic: (c12 - 1.0).abs() <= 1e-9,
        }
    }

    /// `(rho, |omega|)` at phase `θ = βt` of the dominant pair. Real modes
    /// return the constant limits.
    pub fn profile(&self, theta: f64) -> (f64, f64) {
        match self.mode {
            DominantMode::Real(mu) => (mu, 0.0),
            DominantMode::Pair { alpha, beta } => {
                let c21 = 1.0 / self.c12;
                let eta = self.c12 * theta.cos();
                let sigma = theta.sin();
                let r2 = eta * eta + sigma * sigma;
                (
                    alpha + beta * (c21 - self.c12) * eta * sigma / r2,
                    beta * (c21 * eta * eta + self.c12 * sigma * sigma) / r2,
                )
            }
        }
    }
}

/// Forecast of the asymptotic `rho` and `|omega|` from the dominant mode.
pub fn predict_asymptote(
    spectrum: &Spectrum,
    projection: &ModalProjection,
) -> Result<AsymptoteForecast> {
    let d = projection
        .dominant
        .ok_or_else(|| Error::InvalidInput("no mode is excited".into()))?;
    if projection.dominance_gap.is_nan() || projection.dominance_gap <= DOMINANCE_GAP {
        return Err(Error::AmbiguousDominance {
            gap: projection.dominance_gap,
        });
    }
    let lambda = spectrum.eigenvalues()[d];
    if lambda.im == 0.0 {
        return Ok(AsymptoteForecast::real(lambda.re));
    }
    Ok(AsymptoteForecast::pair(
        lambda.re,
        lambda.im,
        projection.c12.unwrap_or(1.0),
    ))
}

/// Acceptance thresholds for [`compare_tail`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailTolerance {
    /// Relative tolerance on the tail mean (or on every sample when
    /// `uniform`).
    pub rel: f64,
    /// Absolute bound on `|omega|` when its target is zero.
    pub abs: f64,
    /// Minimum sign changes of `rho − target` and `|omega| − target`.
    pub min_sign_changes: usize,
    pub uniform: bool,
}

impl TailTolerance {
    pub fn real_dominant() -> Self {
        Self {
            rel: 0.01,
            abs: 1e-3,
            min_sign_changes: 0,
            uniform: false,
        }
    }

    pub fn oscillatory() -> Self {
        Self {
            rel: 0.05,
            abs: 1e-3,
            min_sign_changes: 2,
            uniform: false,
        }
    }

    pub fn exact(rel: f64) -> Self {
        Self {
            rel,
            abs: rel,
            min_sign_changes: 0,
            uniform: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub window: f64,
    pub t_start: f64,
    pub samples: usize,
    /// Means were taken over whole oscillation cycles.
    pub whole_cycles: bool,
    pub rho_target: f64,
    pub rho_mean: f64,
    pub rho_std: f64,
    pub rho_max_dev: f64,
    pub rho_sign_changes: usize,
    pub omega_target: f64,
    pub omega_mean: f64,
    pub omega_std: f64,
    pub omega_max: f64,
    pub omega_max_dev: f64,
    pub omega_sign_changes: usize,
    pub rho_ok: bool,
    pub omega_ok: bool,
    pub oscillation_ok: bool,
    /// The elliptical forecast treats the dominant eigenvectors as spanning
    /// an orthonormal frame; for a state-dependent Jacobian this only holds
    /// approximately near the equilibrium.
    pub assumes_orthonormal_frame: bool,
}

impl TailReport {
    pub fn passed(&self) -> bool {
        self.rho_ok && self.omega_ok && self.oscillation_ok
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn sign_changes(values: &[f64], target: f64) -> usize {
    values
        .windows(2)
        .filter(|w| (w[0] - target > 0.0) != (w[1] - target > 0.0))
        .count()
}

/// Compares the last `window` fraction of the horizon with a forecast.
///
/// Degenerate samples are skipped. For an oscillating forecast the means are
/// taken between the first and last upward crossing of `rho` through its
/// target, so that they cover whole cycles.
pub fn compare_tail(
    series: &AnalysisSeries,
    forecast: &AsymptoteForecast,
    window: f64,
    tol: &TailTolerance,
) -> Result<TailReport> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "window",
            value: window,
            reason: "must lie in (0, 1]",
        });
    }
    let (t0, t1) = match (series.times.first(), series.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InsufficientTail { valid: 0 }),
    };
    let t_start = t1 - window * (t1 - t0);
    let idx: Vec<usize> = (0..series.len())
        .filter(|&k| series.times[k] >= t_start && series.valid[k])
        .collect();
    if idx.len() < 2 {
        return Err(Error::InsufficientTail { valid: idx.len() });
    }
    let rho: Vec<f64> = idx.iter().map(|&k| series.rho[k]).collect();
    let omega: Vec<f64> = idx.iter().map(|&k| series.omega_norm[k]).collect();
    let (rho_target, omega_target) = (forecast.rho_target, forecast.omega_target);

    let rho_sign_changes = sign_changes(&rho, rho_target);
    let omega_sign_changes = sign_changes(&omega, omega_target);

    let oscillating =
        matches!(forecast.mode, super::DominantMode::Pair { .. }) && !forecast.isotropic;
    let upward: Vec<usize> = (1..rho.len())
        .filter(|&k| rho[k - 1] < rho_target && rho[k] >= rho_target)
        .collect();
    let (range, whole_cycles) = if oscillating && upward.len() >= 2 {
        (upward[0]..*upward.last().unwrap(), true)
    } else {
        (0..rho.len(), false)
    };
    let (rho_mean, rho_std) = mean_std(&rho[range.clone()]);
    let (omega_mean, omega_std) = mean_std(&omega[range]);
    let rho_max_dev = rho
        .iter()
        .map(|r| (r - rho_target).abs())
        .fold(0.0, f64::max);
    let omega_max_dev = omega
        .iter()
        .map(|w| (w - omega_target).abs())
        .fold(0.0, f64::max);
    let omega_max = omega.iter().copied().fold(0.0, f64::max);

    let rho_scale = rho_target.abs().max(f64::MIN_POSITIVE);
    let rho_ok = if tol.uniform {
        rho_max_dev <= tol.rel * rho_scale
    } else {
        (rho_mean - rho_target).abs() <= tol.rel * rho_scale
    };
    let omega_ok = if omega_target == 0.0 {
        omega_max <= tol.abs
    } else if tol.uniform {
        omega_max_dev <= tol.rel * omega_target.abs()
    } else {
        (omega_mean - omega_target).abs() <= tol.rel * omega_target.abs()
    };
    let oscillation_ok =
        rho_sign_changes >= tol.min_sign_changes && omega_sign_changes >= tol.min_sign_changes;

    Ok(TailReport {
        window,
        t_start,
        samples: idx.len(),
        whole_cycles,
        rho_target,
        rho_mean,
        rho_std,
        rho_max_dev,
        rho_sign_changes,
        omega_target,
        omega_mean,
        omega_std,
        omega_max,
        omega_max_dev,
        omega_sign_changes,
        rho_ok,
        omega_ok,
        oscillation_ok,
        assumes_orthonormal_frame: matches!(forecast.mode, super::DominantMode::Pair { .. }),
    })
}
