//! Eigenstructure of real state matrices and the real block-modal form.
//!
//! For a diagonalizable real `A` with `r` real eigenvalues `μᵢ` and `s`
//! conjugate pairs `αₖ ± jβₖ` (`r + 2s = N`), the rows of `W` are the real
//! left eigenvectors followed by the real and imaginary parts of one left
//! eigenvector per pair. Then `W A = G W` with
//!
//! ```text
//! G = diag(μ₁, …, μᵣ, [[α₁, −β₁], [β₁, α₁]], …, [[αₛ, −βₛ], [βₛ, αₛ]])
//! ```
//!
//! and `ζ = W u` splits `u' = A u` into decoupled first- and second-order
//! subsystems whose complex frequencies are exactly the eigenvalues of `A`.
//! `W` is in general not orthogonal, so this is a non-isometric change of
//! coordinates.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::dynsys::Trajectory;
use crate::error::{Error, Result};
use crate::geomalg::{self, degeneracy_threshold, Multivector2};

/// `|Im λ| ≤ REAL_TOL · (1 + ‖A‖_F)` classifies an eigenvalue as real.
pub const REAL_TOL: f64 = 1e-9;
/// Absolute tolerance for matching `λ` with `conj(λ)`.
pub const PAIR_TOL: f64 = 1e-8;
/// Eigenvalues closer than `CLUSTER_TOL · (1 + ‖A‖_F)` are treated as one
/// repeated eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Condition number of `W` above which a warning is attached.
pub const W_COND_WARN: f64 = 1e12;

/// Eigenvector-matrix condition number above which `A` is rejected as
/// defective, `1/√ε`.
pub fn defective_cond_threshold() -> f64 {
    1.0 / f64::EPSILON.sqrt()
}

/// `a + b j` represented as the real matrix `[[a, −b], [b, a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CMatrix2 {
    pub a: f64,
    pub b: f64,
}

/// The field isomorphism ℂ → M₂(ℝ).
pub fn phi(a: f64, b: f64) -> CMatrix2 {
    CMatrix2 { a, b }
}

impl CMatrix2 {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.a, -self.b, self.b, self.a)
    }

    /// `a² + b²`, the squared modulus of the represented complex number.
    pub fn det(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }
}

impl From<Complex64> for CMatrix2 {
    fn from(z: Complex64) -> Self {
        phi(z.re, z.im)
    }
}

impl std::ops::Add for CMatrix2 {
    type Output = CMatrix2;

    fn add(self, rhs: CMatrix2) -> CMatrix2 {
        phi(self.a + rhs.a, self.b + rhs.b)
    }
}

impl std::ops::Mul for CMatrix2 {
    type Output = CMatrix2;

    fn mul(self, rhs: CMatrix2) -> CMatrix2 {
        phi(
            self.a * rhs.a - self.b * rhs.b,
            self.a * rhs.b + self.b * rhs.a,
        )
    }
}

/// Classified eigenstructure of a diagonalizable real matrix.
///
/// Eigenvalues are ordered as: real eigenvalues (descending), then for each
/// pair (descending by `α`, then `β`) the `β > 0` member followed by its
/// conjugate. `right` holds the matching eigenvectors as columns, `left`
/// holds the rows of `right⁻¹`, so `left · right = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub real_eigs: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
    pub right: DMatrix<Complex64>,
    pub left: DMatrix<Complex64>,
    /// Condition number of `right`.
    pub eigvec_cond: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.real_eigs.len() + 2 * self.pairs.len()
    }

    /// All `N` eigenvalues in the canonical order.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self
            .real_eigs
            .iter()
            .map(|&mu| Complex64::new(mu, 0.0))
            .collect();
        for &(alpha, beta) in &self.pairs {
            out.push(Complex64::new(alpha, beta));
            out.push(Complex64::new(alpha, -beta));
        }
        out
    }

    pub fn right_eigvec(&self, k: usize) -> DVector<Complex64> {
        self.right.column(k).into_owned()
    }

    pub fn left_eigvec(&self, k: usize) -> DVector<Complex64> {
        self.left.row(k).transpose()
    }

    /// Modal blocks in canonical order.
    pub fn blocks(&self) -> Vec<BlockDesc> {
        let mut blocks = Vec::with_capacity(self.real_eigs.len() + self.pairs.len());
        let mut offset = 0;
        for &mu in &self.real_eigs {
            blocks.push(BlockDesc {
                kind: BlockKind::Real(mu),
                offset,
                size: 1,
            });
            offset += 1;
        }
        for &(alpha, beta) in &self.pairs {
            blocks.push(BlockDesc {
                kind: BlockKind::Pair(alpha, beta),
                offset,
                size: 2,
            });
            offset += 2;
        }
        blocks
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockKind {
    Real(f64),
    /// `(α, β)` with `β > 0`.
    Pair(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDesc {
    pub kind: BlockKind,
    pub offset: usize,
    pub size: usize,
}

impl BlockDesc {
    /// The block's `G` entries: `[μ]` or `[[α, −β], [β, α]]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        match self.kind {
            BlockKind::Real(mu) => DMatrix::from_element(1, 1, mu),
            BlockKind::Pair(alpha, beta) => {
                DMatrix::from_row_slice(2, 2, &[alpha, -beta, beta, alpha])
            }
        }
    }

    /// The eigenvalue (`β > 0` member for pairs) the block represents.
    pub fn eigenvalue(&self) -> Complex64 {
        match self.kind {
            BlockKind::Real(mu) => Complex64::new(mu, 0.0),
            BlockKind::Pair(alpha, beta) => Complex64::new(alpha, beta),
        }
    }
}

/// Real block-modal decomposition `A = W⁻¹ G W`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealModalForm {
    pub w: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub blocks: Vec<BlockDesc>,
    /// 2-norm condition number of `W`.
    pub w_cond: f64,
    /// `‖W A − G W‖_F / ‖A‖_F` (absolute when `A = 0`).
    pub residual: f64,
    pub warnings: Vec<String>,
}

impl RealModalForm {
    /// `ζ = W u`.
    pub fn transform(&self, u: &[f64]) -> DVector<f64> {
        &self.w * DVector::from_column_slice(u)
    }
}

/// Ordering key for eigenvalues: descending real part, then descending
/// imaginary part.
fn desc(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

fn check_square_finite(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    Ok(())
}

/// Real eigenvalues and canonical `(α, β)` pairs.
pub type ClassifiedEigenvalues = (Vec<f64>, Vec<(f64, f64)>);

/// Eigenvalues split into real values and canonical (`β > 0`) pairs, both in
/// the deterministic order, without computing eigenvectors.
pub fn classified_eigenvalues(a: &DMatrix<f64>) -> Result<ClassifiedEigenvalues> {
    check_square_finite(a)?;
    let scale = 1.0 + a.norm();
    let raw = a.complex_eigenvalues();

    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for z in raw.iter() {
        if z.im.abs() <= REAL_TOL * scale {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push(*z);
        } else {
            lower.push(*z);
        }
    }
    if upper.len() != lower.len() {
        return Err(Error::InvalidInput(
            "complex eigenvalues do not come in conjugate pairs".into(),
        ));
    }
    let mut used = vec![false; lower.len()];
    let mut pairs = Vec::with_capacity(upper.len());
    for z in &upper {
        let best = lower
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, w)| (k, (z.conj() - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((k, d)) if d <= PAIR_TOL * scale.max(1.0) => {
                used[k] = true;
                let w = lower[k];
                pairs.push(((z.re + w.re) / 2.0, (z.im - w.im) / 2.0));
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "eigenvalue {z} has no conjugate partner"
                )))
            }
        }
    }
    reals.sort_by(|x, y| y.total_cmp(x));
    pairs.sort_by(|x, y| desc(&Complex64::new(x.0, x.1), &Complex64::new(y.0, y.1)));
    Ok((reals, pairs))
}

/// All eigenvalues of `a` in the canonical order (reals descending, then
/// each pair as `α + jβ`, `α − jβ`). No diagonalizability check.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let (reals, pairs) = classified_eigenvalues(a)?;
    let mut out: Vec<Complex64> = reals.iter().map(|&mu| Complex64::new(mu, 0.0)).collect();
    for (alpha, beta) in pairs {
        out.push(Complex64::new(alpha, beta));
        out.push(Complex64::new(alpha, -beta));
    }
    Ok(out)
}

/// Groups consecutive (already sorted) values closer than `tol`.
fn clusters<T: Copy>(values: &[T], dist: impl Fn(T, T) -> f64, tol: f64) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some(group) if dist(*group.last().unwrap(), v) <= tol => group.push(v),
            _ => out.push(vec![v]),
        }
    }
    out
}

/// Unit-norm, phase-rotated so the first largest-magnitude component is real
/// and positive.
fn normalize_phase(v: &mut DVector<Complex64>) {
    let n = v.norm();
    if n > 0.0 {
        *v /= Complex64::new(n, 0.0);
    }
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .copied()
        .find(|c| c.norm() >= max * (1.0 - 1e-9))
        .unwrap();
    let rot = pivot.conj() / pivot.norm();
    *v *= rot;
}

/// Orthonormal basis of the approximate null space of `m` of dimension
/// `dim`, from the right singular vectors of the `dim` smallest singular
/// values. `None` when the `dim`-th smallest singular value exceeds `tol`.
fn null_space(m: DMatrix<Complex64>, dim: usize, tol: f64) -> Option<Vec<DVector<Complex64>>> {
    let n = m.ncols();
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    if svd.singular_values[order[dim - 1]] > tol {
        return None;
    }
    Some(order[..dim].iter().map(|&k| v_t.row(k).adjoint()).collect())
}

fn cond_complex(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Full eigenstructure of a diagonalizable real matrix.
///
/// Rejects defective matrices: a repeated eigenvalue whose null space is too
/// small, or an eigenvector matrix with condition number above `1/√ε`.
pub fn classify_spectrum(a: &DMatrix<f64>) -> Result<Spectrum> {
    let (reals, pairs) = classified_eigenvalues(a)?;
    let n = a.nrows();
    let scale = 1.0 + a.norm();
    let null_tol = f64::EPSILON.sqrt() * scale;
    let cluster_tol = CLUSTER_TOL * scale;
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let shifted = |lambda: Complex64| &ac - DMatrix::from_diagonal_element(n, n, lambda);

    let mut real_eigs = Vec::with_capacity(reals.len());
    let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(n);

    for group in clusters(&reals, |x, y| (x - y).abs(), cluster_tol) {
        let mu = group.iter().sum::<f64>() / group.len() as f64;
        let lambda = Complex64::new(mu, 0.0);
        let basis = null_space(shifted(lambda), group.len(), null_tol)
            .ok_or(Error::NonDiagonalizable { eigenvalue: lambda })?;
        for mut v in basis {
            normalize_phase(&mut v);
            // The null space of a real matrix is real up to the phase removed above.
            v.iter_mut().for_each(|c| c.im = 0.0);
            let norm = v.norm();
            v /= Complex64::new(norm, 0.0);
            columns.push(v);
            real_eigs.push(mu);
        }
    }

    let mut canon_pairs = Vec::with_capacity(pairs.len());
    for group in clusters(
        &pairs,
        |x, y| Complex64::new(x.0 - y.0, x.1 - y.1).norm(),
        cluster_tol,
    ) {
        let k = group.len() as f64;
        let alpha = group.iter().map(|p| p.0).sum::<f64>() / k;
        let beta = group.iter().map(|p| p.1).sum::<f64>() / k;
        let lambda = Complex64::new(alpha, beta);
        let basis = null_space(shifted(lambda), group.len(), null_tol)
            .ok_or(Error::NonDiagonalizable { eigenvalue: lambda })?;
        for mut v in basis {
            normalize_phase(&mut v);
            let conj = v.map(|c| c.conj());
            columns.push(v);
            columns.push(conj);
            canon_pairs.push((alpha, beta));
        }
    }

    let right = DMatrix::from_columns(&columns);
    let eigvec_cond = cond_complex(&right);
    let eigenvalues = {
        let mut e: Vec<Complex64> = real_eigs.iter().map(|&m| Complex64::new(m, 0.0)).collect();
        for &(al, be) in &canon_pairs {
            e.push(Complex64::new(al, be));
            e.push(Complex64::new(al, -be));
        }
        e
    };
    if eigvec_cond.is_nan() || eigvec_cond > defective_cond_threshold() {
        return Err(Error::NonDiagonalizable {
            eigenvalue: most_parallel(&right, &eigenvalues),
        });
    }
    let left = right
        .clone()
        .try_inverse()
        .ok_or(Error::NonDiagonalizable {
            eigenvalue: most_parallel(&right, &eigenvalues),
        })?;

    Ok(Spectrum {
        real_eigs,
        pairs: canon_pairs,
        right,
        left,
        eigvec_cond,
    })
}

/// Eigenvalue belonging to the most nearly parallel pair of eigenvectors.
fn most_parallel(right: &DMatrix<Complex64>, eigenvalues: &[Complex64]) -> Complex64 {
    let n = right.ncols();
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let c = right.column(i).dotc(&right.column(j)).norm();
            if c > best.1 {
                best = (i, c);
            }
        }
    }
    eigenvalues[best.0]
}

fn two_norm_cond(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Builds `(W, G)` from an already classified spectrum of `a`.
pub fn real_modal_form_from(a: &DMatrix<f64>, spectrum: &Spectrum) -> RealModalForm {
    let n = spectrum.dim();
    let r = spectrum.real_eigs.len();
    let mut w = DMatrix::zeros(n, n);
    let mut g = DMatrix::zeros(n, n);

    for i in 0..r {
        let row = spectrum.left.row(i);
        for j in 0..n {
            w[(i, j)] = row[j].re;
        }
        g[(i, i)] = spectrum.real_eigs[i];
    }
    for (k, &(alpha, beta)) in spectrum.pairs.iter().enumerate() {
        let off = r + 2 * k;
        // Row `off` of the inverse is the left eigenvector for α + jβ.
        let row = spectrum.left.row(off);
        for j in 0..n {
            w[(off, j)] = row[j].re;
            w[(off + 1, j)] = row[j].im;
        }
        g[(off, off)] = alpha;
        g[(off, off + 1)] = -beta;
        g[(off + 1, off)] = beta;
        g[(off + 1, off + 1)] = alpha;
    }

    let a_norm = a.norm();
    let diff = (&w * a - &g * &w).norm();
    let residual = if a_norm > 0.0 { diff / a_norm } else { diff };
    let w_cond = two_norm_cond(&w);
    let mut warnings = Vec::new();
    if w_cond.is_nan() || w_cond > W_COND_WARN {
        warnings.push(format!("W is ill-conditioned (cond = {w_cond:e})"));
    }
    RealModalForm {
        w,
        g,
        blocks: spectrum.blocks(),
        w_cond,
        residual,
        warnings,
    }
}

/// Real block-modal decomposition of a diagonalizable matrix.
pub fn real_modal_form(a: &DMatrix<f64>) -> Result<RealModalForm> {
    let spectrum = classify_spectrum(a)?;
    Ok(real_modal_form_from(a, &spectrum))
}

/// Splits a rotation-scaling block into its symmetric part `D = αI` and
/// antisymmetric part `Q = [[0, −β], [β, 0]]`.
pub fn dq_split(block: &Matrix2<f64>) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let tol = 1e-9 * (1.0 + block.norm());
    let deviation = (block[(0, 0)] - block[(1, 1)])
        .abs()
        .max((block[(0, 1)] + block[(1, 0)]).abs());
    if deviation.is_nan() || deviation > tol {
        return Err(Error::NotCanonicalPair { deviation });
    }
    let d = (block + block.transpose()) * 0.5;
    let q = (block - block.transpose()) * 0.5;
    Ok((d, q))
}

/// Complex frequency of one modal subsystem.
///
/// A 1×1 block gives `(ζ'/ζ, 0)`, a 2×2 block the plane complex frequency of
/// `(ζ, ζ')`. Returns `Ok(None)` for a degenerate `ζ`.
pub fn block_complex_frequency(
    block: &BlockDesc,
    zeta: &[f64],
    dzeta: &[f64],
) -> Result<Option<Multivector2>> {
    for v in [zeta, dzeta] {
        if v.len() != block.size {
            return Err(Error::DimensionMismatch {
                expected: block.size,
                got: v.len(),
            });
        }
    }
    match block.size {
        1 => {
            if !(zeta[0].is_finite() && dzeta[0].is_finite()) {
                return Err(Error::NonFinite("zeta"));
            }
            if zeta[0].abs() < degeneracy_threshold(dzeta[0].abs()) {
                return Ok(None);
            }
            Ok(Some(Multivector2::new(dzeta[0] / zeta[0], 0.0)))
        }
        _ => geomalg::complex_frequency(zeta, dzeta),
    }
}

/// Checks `ξ' = Λ ξ` along a trajectory of `u' = A u`, with `ξ = Ū u` built
/// from the left eigenvectors. Returns the largest relative residual
/// `‖ξ' − Λξ‖ / max(‖ξ'‖, ‖Λξ‖)` over samples where `u ≠ 0`.
pub fn verify_xi_dynamics(a: &DMatrix<f64>, trajectory: &Trajectory) -> Result<f64> {
    let spectrum = classify_spectrum(a)?;
    let lambda = spectrum.eigenvalues();
    let n = spectrum.dim();
    let mut worst: f64 = 0.0;
    for (u, du) in trajectory.velocities.iter().zip(&trajectory.accelerations) {
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        let uc = u.map(|v| Complex64::new(v, 0.0));
        let duc = du.map(|v| Complex64::new(v, 0.0));
        let xi = &spectrum.left * uc;
        let dxi = &spectrum.left * duc;
        let lxi = DVector::from_iterator(n, xi.iter().zip(&lambda).map(|(x, l)| x * l));
        let denom = dxi.norm().max(lxi.norm());
        if denom == 0.0 {
            continue;
        }
        worst = worst.max((dxi - lxi).norm() / denom);
    }
    Ok(worst)
}
