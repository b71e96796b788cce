//! State-space models `x' = f(x)` and their trajectories.
//!
//! Along a trajectory the generalized velocity is `u = x' = f(x)` and its
//! derivative is `u' = J(x) u`, both evaluated exactly from the model rather
//! than by differencing samples.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type FlowFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
pub type JacobianFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Default integration step in seconds.
pub const DEFAULT_STEP: f64 = 1e-3;

/// An autonomous system `x' = f(x)` with an optional analytic Jacobian.
#[derive(Clone)]
pub struct SystemModel {
    dim: usize,
    flow: Arc<FlowFn>,
    jacobian: Option<Arc<JacobianFn>>,
    affine: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("affine", &self.affine)
            .finish()
    }
}

impl SystemModel {
    /// `x' = A x + b`.
    pub fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::InvalidInput(
                "state matrix must be square and non-empty".into(),
            ));
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
            });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine system"));
        }
        let dim = a.nrows();
        let (fa, fb) = (a.clone(), b.clone());
        let ja = a.clone();
        Ok(Self {
            dim,
            flow: Arc::new(move |x| &fa * x + &fb),
            jacobian: Some(Arc::new(move |_| ja.clone())),
            affine: Some((a, b)),
        })
    }

    /// `x' = A x`.
    pub fn linear(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::affine(a, DVector::zeros(n))
    }

    /// A general nonlinear flow. Without an analytic Jacobian, central
    /// differences are used.
    pub fn nonlinear(dim: usize, flow: Arc<FlowFn>, jacobian: Option<Arc<JacobianFn>>) -> Self {
        Self {
            dim,
            flow,
            jacobian,
            affine: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(A, b)` when the model is affine.
    pub fn affine_parts(&self) -> Option<(&DMatrix<f64>, &DVector<f64>)> {
        self.affine.as_ref().map(|(a, b)| (a, b))
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn flow(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.flow)(x)
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => jacobian_fd(|y| self.flow(y), x, None),
        }
    }
}

/// Central-difference Jacobian. Column `j` is
/// `(f(x + h eⱼ) − f(x − h eⱼ)) / 2h`, accurate to `O(h²)`.
///
/// With `h_fd = None` the step is `ε^{1/3} (1 + |xⱼ|)` per component.
pub fn jacobian_fd(
    f: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    h_fd: Option<f64>,
) -> DMatrix<f64> {
    let n = x.len();
    let f0 = f(x);
    let mut jac = DMatrix::zeros(f0.len(), n);
    let mut probe = x.clone();
    for j in 0..n {
        let h = h_fd.unwrap_or_else(|| f64::EPSILON.cbrt() * (1.0 + x[j].abs()));
        probe[j] = x[j] + h;
        let fp = f(&probe);
        probe[j] = x[j] - h;
        let fm = f(&probe);
        probe[j] = x[j];
        // divide by the actually represented step
        let span = (x[j] + h) - (x[j] - h);
        jac.set_column(j, &((fp - fm) / span));
    }
    jac
}

/// Uniformly sampled solution of `x' = f(x)` with velocities and
/// accelerations.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// `u(tₖ) = f(x(tₖ))`.
    pub velocities: Vec<DVector<f64>>,
    /// `u'(tₖ) = J(x(tₖ)) u(tₖ)`.
    pub accelerations: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |x| x.len())
    }

    pub fn last_state(&self) -> Option<&DVector<f64>> {
        self.states.last()
    }
}

fn rk4_step(model: &SystemModel, x: &DVector<f64>, h: f64) -> DVector<f64> {
    let k1 = model.flow(x);
    let k2 = model.flow(&(x + &k1 * (h / 2.0)));
    let k3 = model.flow(&(x + &k2 * (h / 2.0)));
    let k4 = model.flow(&(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Fixed-step classical Runge-Kutta integration from `t = 0` to `t_end`.
///
/// Samples are taken at `tₖ = k h`; the number of steps is `t_end / h`
/// rounded to the nearest integer, so the final time is within `h/2` of
/// `t_end`.
pub fn integrate(model: &SystemModel, x0: &DVector<f64>, t_end: f64, h: f64) -> Result<Trajectory> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: h,
            reason: "must be positive",
        });
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be positive",
        });
    }
    if x0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    let steps = ((t_end / h).round() as usize).max(1);
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
        accelerations: Vec::with_capacity(steps + 1),
    };
    let mut x = x0.clone();
    for k in 0..=steps {
        let t = k as f64 * h;
        let u = model.flow(&x);
        let du = model.jacobian(&x) * &u;
        if u.iter().chain(du.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Diverged { time: t });
        }
        traj.times.push(t);
        traj.states.push(x.clone());
        traj.velocities.push(u);
        traj.accelerations.push(du);
        if k < steps {
            x = rk4_step(model, &x, h);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged {
                    time: (k + 1) as f64 * h,
                });
            }
        }
    }
    Ok(traj)
}

/// Tolerance on `‖f(x*)‖∞` for [`equilibrium_find`].
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 100;

/// Damped Newton iteration on `f(x) = 0`.
pub fn equilibrium_find(model: &SystemModel, x_guess: &DVector<f64>) -> Result<DVector<f64>> {
    if x_guess.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x_guess.len(),
        });
    }
    let mut x = x_guess.clone();
    let mut fx = model.flow(&x);
    let mut res = fx.amax();
    for _ in 0..NEWTON_MAX_ITER {
        if res < EQUILIBRIUM_TOL {
            return Ok(x);
        }
        let step = match model.jacobian(&x).lu().solve(&(-&fx)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => break,
        };
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &x + &step * damping;
            let ft = model.flow(&trial);
            let rt = ft.amax();
            if rt.is_finite() && rt < res {
                x = trial;
                fx = ft;
                res = rt;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < EQUILIBRIUM_TOL {
        return Ok(x);
    }
    Err(Error::NoEquilibrium {
        iterations: NEWTON_MAX_ITER,
        residual: res,
    })
}
