//! Vector operations of the Clifford algebra over ℝⁿ and the geometric
//! frequency of a velocity sample.
//!
//! The geometric product of two vectors splits into a symmetric part (the
//! inner product) and an antisymmetric part (the wedge product). Applied to a
//! velocity `u` and its time derivative `u'`, normalized by `|u|²`, the two
//! parts give the radial rate `rho` and the rotation bivector `omega`:
//!
//! ```text
//! u u' / |u|² = (u · u') / |u|²  +  (u ∧ u') / |u|²  =  rho + omega
//! ```
//!
//! Bivectors are stored as the strict upper triangle of the antisymmetric
//! coefficient array, row-major in `(i, j)` with `i < j`. In two dimensions
//! there is a single coefficient on `e1 ∧ e2`, positive for counter-clockwise
//! rotation (from `e1` toward `e2`).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative scale of the degeneracy threshold, see [`degeneracy_threshold`].
pub const DEGENERACY_SCALE: f64 = 1e-12;

/// Samples with `|u| < DEGENERACY_SCALE * (1 + |u'|)` are flagged as
/// degenerate: the normalization by `|u|²` is meaningless there.
pub fn degeneracy_threshold(du_norm: f64) -> f64 {
    DEGENERACY_SCALE * (1.0 + du_norm)
}

/// Euclidean norm of a vector.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidInput(
            "vectors must have at least one component".into(),
        ));
    }
    Ok(())
}

fn check_finite(x: &[f64], what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Inner product `Σ xᵢ yᵢ`.
pub fn inner(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

/// Antisymmetric grade-2 element of the algebra over ℝᴺ.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector {
    dim: usize,
    coeffs: Vec<f64>,
}

impl Bivector {
    /// The zero bivector in `dim` dimensions. For `dim < 2` it has no
    /// coefficients at all.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            coeffs: vec![0.0; Self::coeff_count(dim)],
        }
    }

    /// Builds a bivector from its strict-upper-triangle coefficients in
    /// row-major `(i, j)`, `i < j` order.
    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = Self::coeff_count(dim);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { dim, coeffs })
    }

    /// Number of independent coefficients, `N (N - 1) / 2`.
    pub fn coeff_count(dim: usize) -> usize {
        dim * dim.saturating_sub(1) / 2
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        // Row i starts after rows 0..i, each holding dim - 1 - r entries.
        i * (2 * self.dim - i - 1) / 2 + (j - i - 1)
    }

    /// Coefficient `b[i][j]` of the full antisymmetric array.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "bivector index out of range");
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.coeffs[self.index(i, j)],
            std::cmp::Ordering::Greater => -self.coeffs[self.index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Signed coefficient on `e1 ∧ e2`. Only meaningful in two dimensions.
    pub fn e12(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// `sqrt(Σ_{i<j} b[i][j]²)`.
    pub fn norm(&self) -> f64 {
        norm(&self.coeffs)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }
}

impl std::ops::Neg for Bivector {
    type Output = Bivector;

    fn neg(self) -> Bivector {
        self.scale(-1.0)
    }
}

/// Wedge product `x ∧ y`; the coefficient on `eᵢ ∧ eⱼ` is `xᵢ yⱼ − xⱼ yᵢ`.
pub fn wedge(x: &[f64], y: &[f64]) -> Result<Bivector> {
    check_dims(x, y)?;
    let n = x.len();
    if n < 2 {
        return Err(Error::WedgeUndefined(n));
    }
    let mut coeffs = Vec::with_capacity(Bivector::coeff_count(n));
    for i in 0..n {
        for j in i + 1..n {
            coeffs.push(x[i] * y[j] - x[j] * y[i]);
        }
    }
    Ok(Bivector { dim: n, coeffs })
}

/// Scalar plus `e1 ∧ e2` bivector: the even subalgebra of the plane,
/// isomorphic to ℂ with the bivector playing the imaginary unit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Multivector2 {
    pub scalar: f64,
    pub bivector: f64,
}

impl Multivector2 {
    pub fn new(scalar: f64, bivector: f64) -> Self {
        Self { scalar, bivector }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.scalar, self.bivector)
    }
}

impl From<Complex64> for Multivector2 {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

fn as_plane(x: &[f64], y: &[f64]) -> Result<()> {
    check_dims(x, y)?;
    if x.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x.len(),
        });
    }
    Ok(())
}

/// Geometric product `x y` of two plane vectors.
pub fn geometric_product_2d(x: &[f64], y: &[f64]) -> Result<Multivector2> {
    as_plane(x, y)?;
    check_finite(x, "x")?;
    check_finite(y, "y")?;
    Ok(Multivector2::new(
        x[0] * y[0] + x[1] * y[1],
        x[0] * y[1] - x[1] * y[0],
    ))
}

/// Geometric frequency of one velocity sample.
///
/// When `valid` is false, `rho`, `omega_norm` and the omega coefficients are
/// NaN. For `N = 1` omega has no coefficients and `omega_norm` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GeomFreqSample {
    pub rho: f64,
    pub omega: Bivector,
    pub omega_norm: f64,
    pub valid: bool,
}

impl GeomFreqSample {
    fn degenerate(dim: usize) -> Self {
        let omega = Bivector {
            dim,
            coeffs: vec![f64::NAN; Bivector::coeff_count(dim)],
        };
        Self {
            rho: f64::NAN,
            omega,
            omega_norm: f64::NAN,
            valid: false,
        }
    }
}

/// `rho = (u · u') / |u|²` and `omega = (u ∧ u') / |u|²`.
///
/// A velocity below the degeneracy threshold is not an error: the sample
/// comes back with `valid == false`.
pub fn geometric_frequency(u: &[f64], du: &[f64]) -> Result<GeomFreqSample> {
    check_dims(u, du)?;
    check_finite(u, "u")?;
    check_finite(du, "du")?;
    let n = u.len();
    let n2: f64 = u.iter().map(|v| v * v).sum();
    if n2.sqrt() < degeneracy_threshold(norm(du)) {
        return Ok(GeomFreqSample::degenerate(n));
    }
    let inv = 1.0 / n2;
    let rho = inner(u, du)? * inv;
    let omega = if n >= 2 {
        wedge(u, du)?.scale(inv)
    } else {
        Bivector::zero(n)
    };
    let omega_norm = omega.norm();
    Ok(GeomFreqSample {
        rho,
        omega,
        omega_norm,
        valid: true,
    })
}

/// Complex frequency `|u|'/|u| + θ' j` of a plane velocity.
///
/// Returns `Ok(None)` for a degenerate sample.
pub fn complex_frequency(u: &[f64], du: &[f64]) -> Result<Option<Multivector2>> {
    as_plane(u, du)?;
    check_finite(u, "u")?;
    check_finite(du, "du")?;
    let n2 = u[0] * u[0] + u[1] * u[1];
    if n2.sqrt() < degeneracy_threshold(norm(du)) {
        return Ok(None);
    }
    Ok(Some(Multivector2::new(
        (u[0] * du[0] + u[1] * du[1]) / n2,
        (u[0] * du[1] - u[1] * du[0]) / n2,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inner_examples() {
        assert_eq!(inner(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(inner(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(inner(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert!(matches!(
            inner(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(wedge(&[1.0, 0.0], &[0.0, 1.0]).unwrap().e12(), 1.0);
        assert_eq!(wedge(&[1.0, 2.0], &[3.0, 4.0]).unwrap().e12(), -2.0);
        let x = [0.3, -1.2, 4.0];
        assert_eq!(wedge(&x, &x).unwrap().norm(), 0.0);
        assert_eq!(wedge(&[1.0], &[2.0]), Err(Error::WedgeUndefined(1)));
    }

    #[test]
    fn bivector_layout_is_row_major_upper_triangle() {
        let e = |k: usize| {
            let mut v = vec![0.0; 4];
            v[k] = 1.0;
            v
        };
        // coefficient order: 01 02 03 12 13 23
        let b = wedge(&e(1), &e(3)).unwrap();
        assert_eq!(b.coeffs(), &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(b.get(1, 3), 1.0);
        assert_eq!(b.get(3, 1), -1.0);
        assert_eq!(b.get(2, 2), 0.0);
    }

    #[test]
    fn geometric_product_examples() {
        let m = geometric_product_2d(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!((m.scalar, m.bivector), (1.0, 0.0));
        let m = geometric_product_2d(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!((m.scalar, m.bivector), (0.0, 1.0));
        // 2*1 + 0*1 = 2, 2*1 - 0*1 = 2
        let m = geometric_product_2d(&[2.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!((m.scalar, m.bivector), (2.0, 2.0));
    }

    #[test]
    fn geometric_frequency_examples() {
        let s = geometric_frequency(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(s.valid);
        assert_eq!(s.rho, 0.0);
        assert_eq!(s.omega_norm, 1.0);

        let s = geometric_frequency(&[1.0], &[-2.0]).unwrap();
        assert_eq!(s.rho, -2.0);
        assert!(s.omega.coeffs().is_empty());
        assert_eq!(s.omega_norm, 0.0);

        let s = geometric_frequency(&[1.0, 1.0], &[-1.0, -1.0]).unwrap();
        assert_eq!(s.rho, -1.0);
        assert_eq!(s.omega_norm, 0.0);
    }

    #[test]
    fn degenerate_sample_is_flagged() {
        let s = geometric_frequency(&[1e-14, 0.0], &[0.0, 1.0]).unwrap();
        assert!(!s.valid);
        assert!(s.rho.is_nan() && s.omega_norm.is_nan());
        assert_eq!(complex_frequency(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), None);
        assert_eq!(
            geometric_frequency(&[f64::NAN, 0.0], &[0.0, 1.0]),
            Err(Error::NonFinite("u"))
        );
    }

    #[test]
    fn complex_frequency_examples() {
        let (a, b) = (0.7, -1.3);
        let z = complex_frequency(&[1.0, 0.0], &[a, b]).unwrap().unwrap();
        assert_eq!((z.scalar, z.bivector), (a, b));
        let z = complex_frequency(&[0.0, 1.0], &[-1.0, 0.0])
            .unwrap()
            .unwrap();
        assert_eq!((z.scalar, z.bivector), (0.0, 1.0));
        let z = complex_frequency(&[3.0, 4.0], &[3.0, 4.0])
            .unwrap()
            .unwrap();
        assert_eq!((z.scalar, z.bivector), (1.0, 0.0));
    }

    #[test]
    fn anisotropic_scaling_changes_frequency() {
        let u = [1.0, 1.0];
        let du = [0.0, 1.0];
        let scaled = |v: &[f64]| [2.0 * v[0], v[1]];
        let a = geometric_frequency(&u, &du).unwrap();
        let b = geometric_frequency(&scaled(&u), &scaled(&du)).unwrap();
        // rho: 1/2 -> 1/5, |omega|: 1/2 -> 2/5
        assert!((a.rho - b.rho).abs() > 0.05);
        assert!((a.omega_norm - b.omega_norm).abs() > 0.05);
    }

    fn vec_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..=6).prop_flat_map(|n| {
            (
                prop::collection::vec(-10.0..10.0f64, n),
                prop::collection::vec(-10.0..10.0f64, n),
            )
        })
    }

    proptest! {
        #[test]
        fn lagrange_identity((u, du) in vec_pair()) {
            let lhs = wedge(&u, &du).unwrap().norm().powi(2);
            let d = inner(&u, &du).unwrap();
            let rhs = norm(&u).powi(2) * norm(&du).powi(2) - d * d;
            let scale = norm(&u).powi(2) * norm(&du).powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
        }

        #[test]
        fn inner_symmetric_wedge_antisymmetric((x, y) in vec_pair()) {
            prop_assert_eq!(inner(&x, &y).unwrap(), inner(&y, &x).unwrap());
            prop_assert_eq!(wedge(&x, &y).unwrap(), -wedge(&y, &x).unwrap());
        }

        #[test]
        fn complex_and_geometric_frequency_agree(
            u in prop::collection::vec(-5.0..5.0f64, 2),
            du in prop::collection::vec(-5.0..5.0f64, 2),
        ) {
            prop_assume!(norm(&u) > 1e-6);
            let g = geometric_frequency(&u, &du).unwrap();
            let c = complex_frequency(&u, &du).unwrap().unwrap();
            prop_assert!((g.rho - c.scalar).abs() <= 1e-15 * g.rho.abs().max(1.0));
            prop_assert!((g.omega.e12() - c.bivector).abs() <= 1e-15 * c.bivector.abs().max(1.0));
            prop_assert!((g.omega_norm - c.bivector.abs()).abs() <= 1e-15 * c.bivector.abs().max(1.0));
        }
    }
}
