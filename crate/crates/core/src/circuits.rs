//! Example circuits as state-space models.
//!
//! State orderings: RC `(v_C)`, series RLC `(i_L, v_C)`, third-order
//! RLC ‖ RC `(v_C1, i_L, v_C2)`, tunnel diode `(v_C, i_L)`. Every circuit is
//! switched onto its dc source at `t = 0` from the given initial state.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dynsys::SystemModel;
use crate::error::{Error, Result};

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcParams {
    pub r: f64,
    pub c: f64,
    pub v_dc: f64,
}

/// `R C v' = −v + V_dc`. The single eigenvalue is `−1/(RC)`.
pub fn build_rc(p: &RcParams) -> Result<SystemModel> {
    positive("R", p.r)?;
    positive("C", p.c)?;
    positive("V_dc", p.v_dc)?;
    let tau = p.r * p.c;
    SystemModel::affine(
        DMatrix::from_element(1, 1, -1.0 / tau),
        DVector::from_element(1, p.v_dc / tau),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlcParams {
    pub r: f64,
    pub l: f64,
    pub c: f64,
    pub v_dc: f64,
}

impl RlcParams {
    /// `R² < 4L/C`.
    pub fn is_underdamped(&self) -> bool {
        self.r * self.r < 4.0 * self.l / self.c
    }
}

/// Series RLC with state `(i, v_C)`:
/// `A = [[−R/L, −1/L], [1/C, 0]]`, `b = (V_dc/L, 0)`.
pub fn build_rlc(p: &RlcParams) -> Result<SystemModel> {
    positive("R", p.r)?;
    positive("L", p.l)?;
    positive("C", p.c)?;
    positive("V_dc", p.v_dc)?;
    let a = DMatrix::from_row_slice(2, 2, &[-p.r / p.l, -1.0 / p.l, 1.0 / p.c, 0.0]);
    let b = DVector::from_vec(vec![p.v_dc / p.l, 0.0]);
    SystemModel::affine(a, b)
}

/// Series RLC branch in parallel with a series RC branch across the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdOrderParams {
    pub r1: f64,
    pub l: f64,
    pub c1: f64,
    pub r2: f64,
    pub c2: f64,
    pub v_dc: f64,
}

impl Default for ThirdOrderParams {
    /// Gives `A = [[0, 2, 0], [−1, −1, 0], [0, 0, −1]]`.
    fn default() -> Self {
        Self {
            r1: 1.0,
            l: 1.0,
            c1: 0.5,
            r2: 1.0,
            c2: 1.0,
            v_dc: 1.0,
        }
    }
}

/// State `(v_C1, i_L, v_C2)`:
///
/// ```text
/// v_C1' = i_L / C1
/// i_L'  = (V_dc − R1 i_L − v_C1) / L
/// v_C2' = (V_dc − v_C2) / (R2 C2)
/// ```
pub fn build_third_order(p: &ThirdOrderParams) -> Result<SystemModel> {
    positive("R1", p.r1)?;
    positive("L", p.l)?;
    positive("C1", p.c1)?;
    positive("R2", p.r2)?;
    positive("C2", p.c2)?;
    positive("V_dc", p.v_dc)?;
    let tau2 = p.r2 * p.c2;
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(3, 3, &[
        0.0,           1.0 / p.c1,     0.0,
        -1.0 / p.l,    -p.r1 / p.l,    0.0,
        0.0,           0.0,            -1.0 / tau2,
    ]);
    let b = DVector::from_vec(vec![0.0, p.v_dc / p.l, p.v_dc / tau2]);
    SystemModel::affine(a, b)
}

/// Default tunnel-diode characteristic `i_R(v) = Σ cₘ vᵐ`, `m = 1..5`
/// (v in volts, i in amperes).
///
/// Peak near 0.07 V, valley near 0.43 V. Calibrated so that the built-in
/// operating points land in the intended regimes: a real dominant mode at
/// `V_dc = 0.5`, an oscillatory one at `V_dc = 0.15`, a nearly isotropic one
/// (`i_R'(v*) ≈ R`) at `V_dc = 0.402`, a limit cycle at `V_dc = 0.264` and
/// two stable equilibria at `R = 1.5`, `V_dc = 0.35`.
pub const DEFAULT_DIODE: [f64; 5] = [14.686, -164.38, 692.26, -1307.0, 926.3];

/// Voltage interval on which the characteristic must be N-shaped.
pub const DIODE_OPERATING_RANGE: (f64, f64) = (0.0, 1.0);

/// Polynomial `i_R(v)` without constant term, so `i_R(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiodeCharacteristic {
    coeffs: Vec<f64>,
}

impl Default for DiodeCharacteristic {
    fn default() -> Self {
        Self {
            coeffs: DEFAULT_DIODE.to_vec(),
        }
    }
}

impl DiodeCharacteristic {
    /// Validates that `i_R'` changes sign exactly twice (rising, falling,
    /// rising) on [`DIODE_OPERATING_RANGE`].
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCharacteristic(
                "coefficients must be finite and non-empty".into(),
            ));
        }
        let d = Self { coeffs };
        let (lo, hi) = DIODE_OPERATING_RANGE;
        let samples = 2000;
        let mut signs: Vec<bool> = Vec::new();
        for k in 0..=samples {
            let v = lo + (hi - lo) * k as f64 / samples as f64;
            let s = d.slope(v);
            if s == 0.0 {
                continue;
            }
            let rising = s > 0.0;
            if signs.last() != Some(&rising) {
                signs.push(rising);
            }
        }
        if signs != [true, false, true] {
            return Err(Error::InvalidCharacteristic(format!(
                "i_R'(v) must go rising/falling/rising on [{lo}, {hi}] V, found {} monotone pieces",
                signs.len()
            )));
        }
        Ok(d)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `i_R(v)`.
    pub fn current(&self, v: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * v)
    }

    /// `i_R'(v)`.
    pub fn slope(&self, v: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * v + (k + 1) as f64 * c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunnelDiodeParams {
    pub l: f64,
    pub c: f64,
    pub r: f64,
    pub v_dc: f64,
    pub diode: DiodeCharacteristic,
}

/// State `(v_C, i_L)`:
///
/// ```text
/// v_C' = (−i_R(v_C) + i_L) / C
/// i_L' = (V_dc − R i_L − v_C) / L
/// ```
pub fn build_tunnel_diode(p: &TunnelDiodeParams) -> Result<SystemModel> {
    positive("L", p.l)?;
    positive("C", p.c)?;
    positive("R", p.r)?;
    positive("V_dc", p.v_dc)?;
    let (l, c, r, v_dc) = (p.l, p.c, p.r, p.v_dc);
    let flow_diode = p.diode.clone();
    let jac_diode = p.diode.clone();
    Ok(SystemModel::nonlinear(
        2,
        Arc::new(move |x: &DVector<f64>| {
            DVector::from_vec(vec![
                (-flow_diode.current(x[0]) + x[1]) / c,
                (v_dc - r * x[1] - x[0]) / l,
            ])
        }),
        Some(Arc::new(move |x: &DVector<f64>| {
            DMatrix::from_row_slice(
                2,
                2,
                &[-jac_diode.slope(x[0]) / c, 1.0 / c, -1.0 / l, -r / l],
            )
        })),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{equilibrium_find, integrate, jacobian_fd};
    use crate::modal::{classified_eigenvalues, classify_spectrum};

    fn td(l: f64, c: f64, r: f64, v_dc: f64) -> TunnelDiodeParams {
        TunnelDiodeParams {
            l,
            c,
            r,
            v_dc,
            diode: DiodeCharacteristic::default(),
        }
    }

    #[test]
    fn rc_eigenvalue() {
        for (r, c) in [(1.0, 1.0), (2.0, 0.5)] {
            let m = build_rc(&RcParams { r, c, v_dc: 1.0 }).unwrap();
            let (a, _) = m.affine_parts().unwrap();
            assert_eq!(a[(0, 0)], -1.0);
        }
        assert!(build_rc(&RcParams {
            r: 0.0,
            c: 1.0,
            v_dc: 1.0
        })
        .is_err());
    }

    #[test]
    fn rlc_damping_regimes() {
        let p = RlcParams {
            r: 1.0,
            l: 1.0,
            c: 1.0,
            v_dc: 1.0,
        };
        assert!(p.is_underdamped());
        let m = build_rlc(&p).unwrap();
        let (_, pairs) = classified_eigenvalues(m.affine_parts().unwrap().0).unwrap();
        // −R/2L ± sqrt((R/2L)² − 1/LC)
        let disc: f64 = 0.25 - 1.0;
        assert!((pairs[0].0 + 0.5).abs() < 1e-12);
        assert!((pairs[0].1 - (-disc).sqrt()).abs() < 1e-12);

        let m = build_rlc(&RlcParams { r: 2.0, ..p }).unwrap();
        assert!(classify_spectrum(m.affine_parts().unwrap().0).is_err());

        let m = build_rlc(&RlcParams { r: 3.0, ..p }).unwrap();
        let (reals, pairs) = classified_eigenvalues(m.affine_parts().unwrap().0).unwrap();
        assert_eq!((reals.len(), pairs.len()), (2, 0));
        let d = (2.25f64 - 1.0).sqrt();
        assert!((reals[0] - (-1.5 + d)).abs() < 1e-12);
        assert!((reals[1] - (-1.5 - d)).abs() < 1e-12);

        assert!(build_rlc(&RlcParams { l: -1.0, ..p }).is_err());
    }

    #[test]
    fn third_order_matrix() {
        let m = build_third_order(&ThirdOrderParams::default()).unwrap();
        let (a, b) = m.affine_parts().unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, -1.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
        assert_eq!(a, &expected);
        assert_eq!(b.as_slice(), &[0.0, 1.0, 1.0]);
    }

    #[test]
    fn rlc_settles_at_linear_solve_equilibrium() {
        let m = build_rlc(&RlcParams {
            r: 1.0,
            l: 1.0,
            c: 1.0,
            v_dc: 1.0,
        })
        .unwrap();
        let (a, b) = m.affine_parts().unwrap();
        let x_star = a.clone().lu().solve(&(-b)).unwrap();
        let traj = integrate(&m, &DVector::zeros(2), 60.0, 1e-3).unwrap();
        let x_end = traj.last_state().unwrap();
        assert!((x_end - &x_star).amax() < 1e-8);
        assert!(m.flow(x_end).amax() < 1e-8);
    }

    #[test]
    fn default_diode_is_n_shaped() {
        let d = DiodeCharacteristic::default();
        assert_eq!(DiodeCharacteristic::new(DEFAULT_DIODE.to_vec()).unwrap(), d);
        assert_eq!(d.current(0.0), 0.0);
        assert!(d.slope(0.0) > 0.0 && d.slope(0.2) < 0.0 && d.slope(0.5) > 0.0);
        assert!(DiodeCharacteristic::new(vec![1.0]).is_err());
        assert!(DiodeCharacteristic::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn diode_current_and_slope_match_direct_evaluation() {
        let d = DiodeCharacteristic::default();
        let c = DEFAULT_DIODE;
        for v in [-0.1, 0.05, 0.2, 0.37, 0.8] {
            let i: f64 = (0..5).map(|k| c[k] * f64::powi(v, k as i32 + 1)).sum();
            let di: f64 = (0..5)
                .map(|k| (k + 1) as f64 * c[k] * f64::powi(v, k as i32))
                .sum();
            assert!((d.current(v) - i).abs() < 1e-12);
            assert!((d.slope(v) - di).abs() < 1e-10);
        }
    }

    #[test]
    fn tunnel_diode_structure() {
        let m = build_tunnel_diode(&td(1.0, 0.5, 0.2, 0.5)).unwrap();
        let j = m.jacobian(&DVector::from_vec(vec![0.3, 0.1]));
        assert_eq!(j[(0, 1)], 2.0);
        assert_eq!(j[(1, 0)], -1.0);
        assert_eq!(j[(1, 1)], -0.2);
    }

    #[test]
    fn tunnel_diode_fd_jacobian_matches_analytic() {
        let m = build_tunnel_diode(&td(1.0, 0.5, 0.2, 0.5)).unwrap();
        let x_star = equilibrium_find(&m, &DVector::from_vec(vec![0.45, 0.2])).unwrap();
        let analytic = m.jacobian(&x_star);
        let fd = jacobian_fd(|x| m.flow(x), &x_star, None);
        assert!((&fd - &analytic).amax() <= 1e-5 * analytic.amax());
    }

    /// Bisection on `i_R(v) − (V − v)/R` over `[lo, hi]`.
    fn bisect_reduced(p: &TunnelDiodeParams, mut lo: f64, mut hi: f64) -> f64 {
        let g = |v: f64| p.diode.current(v) - (p.v_dc - v) / p.r;
        assert!(g(lo) * g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn two_equilibria_match_bisection() {
        let p = td(1.0, 0.5, 1.5, 0.35);
        let m = build_tunnel_diode(&p).unwrap();
        let v_low = bisect_reduced(&p, 0.0, 0.1);
        let v_high = bisect_reduced(&p, 0.4, 0.5);
        let low = equilibrium_find(&m, &DVector::from_vec(vec![0.02, 0.2])).unwrap();
        let high = equilibrium_find(&m, &DVector::from_vec(vec![0.45, -0.07])).unwrap();
        assert!((low[0] - v_low).abs() < 1e-9);
        assert!((high[0] - v_high).abs() < 1e-9);
        assert!((low[1] - (p.v_dc - v_low) / p.r).abs() < 1e-9);
        assert!((low[0] - high[0]).abs() > 0.1);
        for x in [&low, &high] {
            let (reals, pairs) = classified_eigenvalues(&m.jacobian(x)).unwrap();
            let max_re = reals
                .iter()
                .copied()
                .chain(pairs.iter().map(|p| p.0))
                .fold(f64::MIN, f64::max);
            assert!(max_re < 0.0, "equilibrium {x} is not stable");
        }
    }

    #[test]
    fn operating_points_are_in_their_regimes() {
        let eq = |p: &TunnelDiodeParams, guess: [f64; 2]| {
            let m = build_tunnel_diode(p).unwrap();
            let x = equilibrium_find(&m, &DVector::from_vec(guess.to_vec())).unwrap();
            let (reals, pairs) = classified_eigenvalues(&m.jacobian(&x)).unwrap();
            (x, reals, pairs)
        };
        let (_, reals, _) = eq(&td(1.0, 0.5, 0.2, 0.5), [0.45, 0.2]);
        assert_eq!(reals.len(), 2);
        assert!(reals[0] < 0.0);
        let (_, _, pairs) = eq(&td(1.0, 0.5, 0.2, 0.15), [0.06, 0.45]);
        assert!(pairs.len() == 1 && pairs[0].0 < 0.0);
        let (x, _, pairs) = eq(&td(1.0, 1.0, 0.3688, 0.402), [0.38, 0.05]);
        assert!(pairs.len() == 1 && pairs[0].0 < 0.0);
        assert!((DiodeCharacteristic::default().slope(x[0]) - 0.3688).abs() < 0.01);
        let (_, _, pairs) = eq(&td(1.0, 1.0, 0.3688, 0.264), [0.245, 0.05]);
        assert!(
            pairs.len() == 1 && pairs[0].0 > 0.0,
            "limit-cycle equilibrium must be unstable"
        );
    }
}
