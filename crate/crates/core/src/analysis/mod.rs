//! Along-trajectory analytics: geometric frequency per sample, the
//! eigenvalues of the Jacobian at each sample, modal block frequencies and
//! asymptotic forecasts.

mod asymptote;
mod cycle;

pub use asymptote::{
    compare_tail, modal_projection, predict_asymptote, AsymptoteForecast, DominantMode,
    ModalProjection, TailReport, TailTolerance, DOMINANCE_GAP,
};
pub use cycle::{detect_limit_cycle, CycleReport, MAX_PERIOD_SPREAD};

use num_complex::Complex64;

use crate::dynsys::{SystemModel, Trajectory};
use crate::error::{Error, Result};
use crate::geomalg::geometric_frequency;
use crate::modal::{block_complex_frequency, eigenvalues, BlockDesc, RealModalForm};

/// Per-sample analysis aligned with a [`Trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSeries {
    pub times: Vec<f64>,
    pub rho: Vec<f64>,
    pub omega_norm: Vec<f64>,
    pub valid: Vec<bool>,
    /// `eig_re[k][j]`: real part of trace `j` at sample `k`.
    pub eig_re: Vec<Vec<f64>>,
    pub eig_im: Vec<Vec<f64>>,
    /// True at samples where the number of real Jacobian eigenvalues changed
    /// relative to the previous sample.
    pub switches: Vec<bool>,
    pub blocks: Vec<BlockSeries>,
}

/// Complex frequency of one modal subsystem along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSeries {
    pub block: BlockDesc,
    pub rho: Vec<f64>,
    /// Signed `e1 ∧ e2` coefficient for pair blocks, zero for real blocks.
    pub omega: Vec<f64>,
    pub valid: Vec<bool>,
}

impl AnalysisSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.eig_re.first().map_or(0, |e| e.len())
    }

    /// Indices of the samples at which a real/complex switch was flagged.
    pub fn switch_indices(&self) -> Vec<usize> {
        self.switches
            .iter()
            .enumerate()
            .filter_map(|(k, &s)| s.then_some(k))
            .collect()
    }
}

/// Assigns the eigenvalues in `current` to the traces whose previous values
/// are in `previous`, greedily by nearest distance, trace by trace.
fn match_traces(previous: &[Complex64], current: &[Complex64]) -> Vec<Complex64> {
    let mut used = vec![false; current.len()];
    previous
        .iter()
        .map(|p| {
            let (k, _) = current
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, c)| (k, (c - p).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("same number of eigenvalues at each sample");
            used[k] = true;
            current[k]
        })
        .collect()
}

/// Geometric frequency and Jacobian eigenvalues at every sample.
pub fn analyze_trajectory(traj: &Trajectory, model: &SystemModel) -> Result<AnalysisSeries> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let n = traj.len();
    let mut series = AnalysisSeries {
        times: traj.times.clone(),
        rho: Vec::with_capacity(n),
        omega_norm: Vec::with_capacity(n),
        valid: Vec::with_capacity(n),
        eig_re: Vec::with_capacity(n),
        eig_im: Vec::with_capacity(n),
        switches: Vec::with_capacity(n),
        blocks: Vec::new(),
    };

    // Affine models have a constant Jacobian.
    let constant = model
        .affine_parts()
        .map(|(a, _)| eigenvalues(a))
        .transpose()?;

    let mut previous: Option<Vec<Complex64>> = None;
    for k in 0..n {
        let sample = geometric_frequency(
            traj.velocities[k].as_slice(),
            traj.accelerations[k].as_slice(),
        )?;
        series.rho.push(sample.rho);
        series.omega_norm.push(sample.omega_norm);
        series.valid.push(sample.valid);

        let eigs = match &constant {
            Some(e) => e.clone(),
            None => eigenvalues(&model.jacobian(&traj.states[k]))?,
        };
        let real_count = |e: &[Complex64]| e.iter().filter(|z| z.im == 0.0).count();
        let (ordered, switched) = match &previous {
            Some(prev) => (
                match_traces(prev, &eigs),
                real_count(prev) != real_count(&eigs),
            ),
            None => (eigs, false),
        };
        series.eig_re.push(ordered.iter().map(|z| z.re).collect());
        series.eig_im.push(ordered.iter().map(|z| z.im).collect());
        series.switches.push(switched);
        previous = Some(ordered);
    }
    Ok(series)
}

/// Complex frequency of each modal block of `form` along `traj`, using
/// `ζ = W u` and `ζ' = W u'`.
pub fn modal_block_series(traj: &Trajectory, form: &RealModalForm) -> Result<Vec<BlockSeries>> {
    let mut out: Vec<BlockSeries> = form
        .blocks
        .iter()
        .map(|b| BlockSeries {
            block: *b,
            rho: Vec::with_capacity(traj.len()),
            omega: Vec::with_capacity(traj.len()),
            valid: Vec::with_capacity(traj.len()),
        })
        .collect();
    for (u, du) in traj.velocities.iter().zip(&traj.accelerations) {
        let zeta = &form.w * u;
        let dzeta = &form.w * du;
        for series in out.iter_mut() {
            let range = series.block.offset..series.block.offset + series.block.size;
            let value = block_complex_frequency(
                &series.block,
                &zeta.as_slice()[range.clone()],
                &dzeta.as_slice()[range],
            )?;
            match value {
                Some(m) => {
                    series.rho.push(m.scalar);
                    series.omega.push(m.bivector);
                    series.valid.push(true);
                }
                None => {
                    series.rho.push(f64::NAN);
                    series.omega.push(f64::NAN);
                    series.valid.push(false);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{
        build_rc, build_tunnel_diode, DiodeCharacteristic, RcParams, TunnelDiodeParams,
    };
    use crate::dynsys::integrate;
    use nalgebra::DVector;

    #[test]
    fn affine_eigenvalue_series_is_constant() {
        let model = crate::circuits::build_third_order(&Default::default()).unwrap();
        let traj = integrate(&model, &DVector::zeros(3), 2.0, 1e-2).unwrap();
        let s = analyze_trajectory(&traj, &model).unwrap();
        assert_eq!(s.len(), traj.len());
        assert!(s.eig_re.iter().all(|e| e == &s.eig_re[0]));
        assert!(s.eig_im.iter().all(|e| e == &s.eig_im[0]));
        assert!(s.switches.iter().all(|&x| !x));
    }

    #[test]
    fn rc_rho_is_constant() {
        let model = build_rc(&RcParams {
            r: 2.0,
            c: 0.25,
            v_dc: 3.0,
        })
        .unwrap();
        let traj = integrate(&model, &DVector::zeros(1), 3.0, 1e-3).unwrap();
        let s = analyze_trajectory(&traj, &model).unwrap();
        for (&rho, &ok) in s.rho.iter().zip(&s.valid) {
            assert!(ok);
            assert!((rho + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn limit_cycle_eigenvalues_switch_with_discriminant_sign() {
        let p = TunnelDiodeParams {
            l: 1.0,
            c: 1.0,
            r: 0.3688,
            v_dc: 0.264,
            diode: DiodeCharacteristic::default(),
        };
        let model = build_tunnel_diode(&p).unwrap();
        let traj = integrate(&model, &DVector::zeros(2), 60.0, 1e-3).unwrap();
        let s = analyze_trajectory(&traj, &model).unwrap();
        // (tr J)² − 4 det J changes sign exactly where the pair becomes real.
        let disc: Vec<f64> = traj
            .states
            .iter()
            .map(|x| {
                let j = model.jacobian(x);
                let tr = j.trace();
                tr * tr - 4.0 * j.determinant()
            })
            .collect();
        let expected: Vec<usize> = (1..disc.len())
            .filter(|&k| (disc[k] > 0.0) != (disc[k - 1] > 0.0))
            .collect();
        assert!(
            expected.len() >= 4,
            "the orbit should cross the real/complex boundary"
        );
        let flagged = s.switch_indices();
        assert_eq!(flagged.len(), expected.len());
        for (f, e) in flagged.iter().zip(&expected) {
            assert!(
                f.abs_diff(*e) <= 1,
                "switch at {f}, discriminant sign change at {e}"
            );
        }
    }

    #[test]
    fn eigenvalue_traces_are_continuous_away_from_switches() {
        let p = TunnelDiodeParams {
            l: 1.0,
            c: 0.5,
            r: 0.2,
            v_dc: 0.5,
            diode: DiodeCharacteristic::default(),
        };
        let model = build_tunnel_diode(&p).unwrap();
        let traj = integrate(&model, &DVector::zeros(2), 20.0, 1e-3).unwrap();
        let s = analyze_trajectory(&traj, &model).unwrap();
        let h = traj.times[1] - traj.times[0];
        let near_switch = |k: usize| s.switch_indices().iter().any(|&w| w.abs_diff(k) <= 50);
        for k in 1..s.len() {
            if near_switch(k) {
                continue;
            }
            let dj = (model.jacobian(&traj.states[k]) - model.jacobian(&traj.states[k - 1])).norm();
            let jdot = dj / h;
            for j in 0..2 {
                let jump = Complex64::new(
                    s.eig_re[k][j] - s.eig_re[k - 1][j],
                    s.eig_im[k][j] - s.eig_im[k - 1][j],
                )
                .norm();
                assert!(
                    jump <= 10.0 * h * jdot + 1e-12,
                    "sample {k} trace {j}: jump {jump}"
                );
            }
        }
    }
}
