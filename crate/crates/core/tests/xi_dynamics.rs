use geofreq::dynsys::{integrate, SystemModel, Trajectory};
use geofreq::modal::verify_xi_dynamics;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples of `u` from integrating `u' = A u`, with `u'` taken by central
/// differences of the samples rather than from `A`.
fn sampled(a: &DMatrix<f64>, u0: &[f64], t_end: f64, h: f64) -> Trajectory {
    let model = SystemModel::linear(a.clone()).unwrap();
    let traj = integrate(&model, &DVector::from_column_slice(u0), t_end, h).unwrap();
    let k = traj.len();
    let du: Vec<DVector<f64>> = (1..k - 1)
        .map(|i| (&traj.states[i + 1] - &traj.states[i - 1]) / (2.0 * h))
        .collect();
    Trajectory {
        times: traj.times[1..k - 1].to_vec(),
        states: traj.states[1..k - 1].to_vec(),
        velocities: traj.states[1..k - 1].to_vec(),
        accelerations: du,
    }
}

#[test]
fn diagonal_system() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
    let r = verify_xi_dynamics(&a, &sampled(&a, &[1.0, 1.0], 2.0, 1e-4)).unwrap();
    assert!(r < 1e-8, "{r:e}");
}

#[test]
fn pure_rotation() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let r = verify_xi_dynamics(&a, &sampled(&a, &[1.0, 0.0], 2.0, 1e-4)).unwrap();
    assert!(r < 1e-8, "{r:e}");
}

#[test]
fn third_order_random_start() {
    let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, -1.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let u0: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = verify_xi_dynamics(&a, &sampled(&a, &u0, 2.0, 1e-4)).unwrap();
        assert!(r < 1e-6, "{r:e}");
    }
}

#[test]
fn wrong_dynamics_are_detected() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
    let other = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -3.0]);
    let r = verify_xi_dynamics(&a, &sampled(&other, &[1.0, 1.0], 2.0, 1e-3)).unwrap();
    assert!(r > 0.1, "{r:e}");
}

#[test]
fn defective_matrix_is_rejected() {
    let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
    let traj = sampled(&a, &[1.0, 1.0], 1.0, 1e-2);
    assert!(matches!(
        verify_xi_dynamics(&a, &traj),
        Err(geofreq::Error::NonDiagonalizable { .. })
    ));
}
