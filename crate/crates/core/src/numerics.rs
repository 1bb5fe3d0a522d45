//! Hermitian matrix calculus on the support of positive matrices.
//!
//! Everything here works from one spectral decomposition: fractional
//! powers, support projections and positive/negative parts are all
//! functions of the eigenvalues. Eigenvalues at or below a *relative* cut
//! (`support_cut * scale`) are treated as exact zeros, so that `0^z := 0`
//! for every exponent including `z = 0`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Numerical thresholds shared by every verdict in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Eigenvalues `<= support_cut * max eigenvalue` are treated as zero.
    pub support_cut: f64,
    /// Negative eigenvalues down to `-psd_slack * norm` are rounding noise.
    pub psd_slack: f64,
    /// Relative slack for inequality verdicts.
    pub ineq_slack: f64,
    /// Bound on `||p q||` for projections to count as orthogonal.
    pub orth_slack: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            support_cut: 1e-10,
            psd_slack: 1e-10,
            ineq_slack: 1e-9,
            orth_slack: 1e-8,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("support_cut", self.support_cut),
            ("psd_slack", self.psd_slack),
            ("ineq_slack", self.ineq_slack),
            ("orth_slack", self.orth_slack),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("tolerance {name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

impl HermitianMatrix {
    /// Symmetrizes `m` to `(m + m*)/2`. Rejects non-square, empty or
    /// non-finite input; does not judge how asymmetric `m` was.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::input(format!("matrix is not square: {}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::input("matrix has dimension 0"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("matrix has non-finite entries"));
        }
        Ok(Self { inner: symmetrize(&m) })
    }

    /// Symmetrizes without validation; for matrices built internally.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { inner: symmetrize(&m) }
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("rows have inconsistent lengths"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: CMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: CMatrix::zeros(n, n) }
    }

    /// `U diag(w) U*` using only the columns with non-zero weight.
    pub fn from_eigen_parts(u: &CMatrix, weights: &[f64]) -> Self {
        Self::from_matrix_unchecked(spectral_synthesis(u, weights.iter().map(|&w| Complex64::new(w, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { inner: &self.inner * Complex64::new(c, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.inner + &other.inner)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(&self.inner - &other.inner)
    }

    /// Whether every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.inner[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).collect()
    }

    /// Kronecker product, itself Hermitian.
    pub fn kron(&self, other: &Self) -> Self {
        Self { inner: self.inner.kronecker(&other.inner) }
    }
}

/// Eigenvalues in ascending order with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

pub fn eigh(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let m = h.as_matrix();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

fn spectral_synthesis(u: &CMatrix, values: impl Iterator<Item = Complex64>) -> CMatrix {
    let n = u.nrows();
    let kept: Vec<(usize, Complex64)> = values
        .enumerate()
        .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
        .collect();
    if kept.is_empty() {
        return CMatrix::zeros(n, n);
    }
    let cols = CMatrix::from_fn(n, kept.len(), |i, c| u[(i, kept[c].0)]);
    let mut scaled = cols.clone();
    for (c, (_, v)) in kept.iter().enumerate() {
        for i in 0..n {
            scaled[(i, c)] *= v;
        }
    }
    scaled * cols.adjoint()
}

/// `lambda^z` on the support, `0` elsewhere.
fn scalar_pseudo_power(lambda: f64, z: Complex64, cut: f64) -> Complex64 {
    if lambda <= cut {
        Complex64::new(0.0, 0.0)
    } else if z.im == 0.0 {
        Complex64::new(lambda.powf(z.re), 0.0)
    } else {
        (z * lambda.ln()).exp()
    }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> CMatrix {
        spectral_synthesis(&self.eigenvectors, self.eigenvalues.iter().map(|&v| Complex64::new(v, 0.0)))
    }

    /// `f(H) = U diag(f(lambda)) U*`.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        spectral_synthesis(&self.eigenvectors, self.eigenvalues.iter().map(|&v| f(v)))
    }

    /// `H^z` restricted to eigenvalues above the absolute threshold `cut`.
    pub fn pseudo_power(&self, z: Complex64, cut: f64) -> CMatrix {
        self.apply(|l| scalar_pseudo_power(l, z, cut))
    }

    pub fn support(&self, cut: f64) -> CMatrix {
        self.pseudo_power(Complex64::new(0.0, 0.0), cut)
    }

    pub fn rank(&self, cut: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }
}

/// Spectral data of a positive matrix together with the absolute
/// threshold below which eigenvalues count as kernel.
#[derive(Debug, Clone)]
pub struct PsdSpectrum {
    pub decomposition: SpectralDecomposition,
    pub cut: f64,
}

impl PsdSpectrum {
    /// `scale` sets the reference for both the PSD check and the support cut;
    /// callers holding several blocks pass the largest eigenvalue over all of them.
    pub fn with_scale(h: &HermitianMatrix, scale: f64, tol: &TolerancePolicy) -> Result<Self> {
        let decomposition = eigh(h)?;
        Self::from_decomposition(decomposition, scale, tol)
    }

    pub fn new(h: &HermitianMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let decomposition = eigh(h)?;
        let scale = decomposition.max_abs();
        Self::from_decomposition(decomposition, scale, tol)
    }

    pub(crate) fn from_decomposition(decomposition: SpectralDecomposition, scale: f64, tol: &TolerancePolicy) -> Result<Self> {
        let allowed = -tol.psd_slack * scale;
        let min = decomposition.min();
        if min < allowed {
            return Err(Error::NotPsd { min_eigenvalue: min, allowed });
        }
        Ok(Self { decomposition, cut: tol.support_cut * scale })
    }

    pub fn power(&self, z: Complex64) -> CMatrix {
        self.decomposition.pseudo_power(z, self.cut)
    }

    pub fn real_power(&self, s: f64) -> CMatrix {
        self.power(Complex64::new(s, 0.0))
    }

    pub fn support(&self) -> CMatrix {
        self.decomposition.support(self.cut)
    }

    pub fn rank(&self) -> usize {
        self.decomposition.rank(self.cut)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.decomposition.max().max(0.0)
    }

    /// `(eigenvalue, eigenvector column)` pairs on the support.
    pub fn support_pairs(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.decomposition
            .eigenvalues
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l > self.cut)
            .map(|(k, &l)| (l, k))
    }
}

/// Support-restricted power `H^z` of a positive matrix. Real `z` gives a
/// Hermitian result; `z = 0` gives the support projection.
pub fn pseudo_power(h: &HermitianMatrix, z: Complex64, tol: &TolerancePolicy) -> Result<CMatrix> {
    Ok(PsdSpectrum::new(h, tol)?.power(z))
}

pub fn support_proj(h: &HermitianMatrix, tol: &TolerancePolicy) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::from_matrix_unchecked(PsdSpectrum::new(h, tol)?.support()))
}

/// Spectral positive and negative parts `(P, N)` with `H = P - N`, `PN = 0`.
/// Eigenvalues within `support_cut * ||H||` of zero go to neither part.
pub fn jordan_parts(h: &HermitianMatrix, tol: &TolerancePolicy) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let d = eigh(h)?;
    let cut = tol.support_cut * d.max_abs();
    Ok(jordan_from_decomposition(&d, cut))
}

pub(crate) fn jordan_from_decomposition(d: &SpectralDecomposition, cut: f64) -> (HermitianMatrix, HermitianMatrix) {
    let zero = Complex64::new(0.0, 0.0);
    let pos = d.apply(|l| if l > cut { Complex64::new(l, 0.0) } else { zero });
    let neg = d.apply(|l| if l < -cut { Complex64::new(-l, 0.0) } else { zero });
    (HermitianMatrix::from_matrix_unchecked(pos), HermitianMatrix::from_matrix_unchecked(neg))
}

pub fn abs_val(h: &HermitianMatrix, tol: &TolerancePolicy) -> Result<HermitianMatrix> {
    let (p, n) = jordan_parts(h, tol)?;
    Ok(p.add(&n))
}

pub fn trace(h: &HermitianMatrix) -> f64 {
    h.trace()
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(h: &HermitianMatrix) -> Result<f64> {
    Ok(eigh(h)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// Largest absolute eigenvalue.
pub fn op_norm(h: &HermitianMatrix) -> Result<f64> {
    Ok(eigh(h)?.max_abs())
}

/// Largest singular value of an arbitrary square or rectangular matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = HermitianMatrix::from_matrix_unchecked(m.adjoint() * m);
    let top = eigh(&gram).map(|d| d.max()).unwrap_or(f64::NAN);
    top.max(0.0).sqrt()
}

/// Whether `p` is a Hermitian idempotent within `tol` in operator norm.
pub fn is_projection(p: &HermitianMatrix, tol: f64) -> bool {
    let m = p.as_matrix();
    spectral_norm(&(m * m - m)) <= tol
}

/// Projection onto `range(p) + range(q)`, the support of `p + q`.
pub fn projection_join(p: &HermitianMatrix, q: &HermitianMatrix, tol: &TolerancePolicy) -> Result<HermitianMatrix> {
    if p.dim() != q.dim() {
        return Err(Error::input(format!("dimension mismatch: {} vs {}", p.dim(), q.dim())));
    }
    for (name, x) in [("p", p), ("q", q)] {
        if !is_projection(x, tol.orth_slack) {
            return Err(Error::input(format!("{name} is not a projection")));
        }
    }
    let sum = p.add(q);
    // Relative cut against ||p + q|| <= 2 would keep near-parallel pairs rank-deficient.
    support_proj(&sum, tol)
}
