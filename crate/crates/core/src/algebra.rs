//! Finite-dimensional von Neumann algebras `M = ⊕_k M_{n_k}(C)` and their
//! normal functionals, stored as block densities against the block trace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    eigh, is_projection, jordan_from_decomposition, spectral_norm, CMatrix, HermitianMatrix, PsdSpectrum,
    SpectralDecomposition, TolerancePolicy,
};

/// Largest admissible block size.
pub const MAX_BLOCK_DIM: usize = 256;
/// Cap on the Hilbert-Schmidt dimension `Σ n_k²`.
pub const MAX_HILBERT_DIM: usize = 4 * MAX_BLOCK_DIM * MAX_BLOCK_DIM;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Algebra {
    blocks: Vec<usize>,
}

impl Algebra {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::input("algebra needs at least one block"));
        }
        if let Some(&bad) = blocks.iter().find(|&&n| n == 0) {
            return Err(Error::input(format!("block dimension must be >= 1, got {bad}")));
        }
        if let Some(&big) = blocks.iter().find(|&&n| n > MAX_BLOCK_DIM) {
            return Err(Error::DimensionCap { dim: big, cap: MAX_BLOCK_DIM });
        }
        let hs: usize = blocks.iter().map(|n| n * n).sum();
        if hs > MAX_HILBERT_DIM {
            return Err(Error::DimensionCap { dim: hs, cap: MAX_HILBERT_DIM });
        }
        Ok(Self { blocks })
    }

    pub fn full_matrix(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `n` one-dimensional blocks: the commutative algebra `C^n`.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Σ n_k, the dimension the algebra acts on.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// Σ n_k², the dimension of the standard Hilbert space.
    pub fn hilbert_dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Blocks of `self ⊗ other`, ordered lexicographically by `(i, j)`.
    pub fn tensor(&self, other: &Algebra) -> Result<Algebra> {
        let blocks = self
            .blocks
            .iter()
            .flat_map(|&a| other.blocks.iter().map(move |&b| a * b))
            .collect();
        Algebra::new(blocks)
    }

    fn check_same(&self, other: &Algebra) -> Result<()> {
        if self != other {
            return Err(Error::input(format!("algebra mismatch: {:?} vs {:?}", self.blocks, other.blocks)));
        }
        Ok(())
    }
}

/// Element of `M`, one matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub blocks: Vec<CMatrix>,
}

impl BlockOperator {
    pub fn new(algebra: &Algebra, blocks: Vec<CMatrix>) -> Result<Self> {
        check_shapes(algebra, blocks.iter().map(|b| (b.nrows(), b.ncols())))?;
        Ok(Self { blocks })
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self { blocks: algebra.blocks().iter().map(|&n| CMatrix::identity(n, n)).collect() }
    }

    pub fn zeros(algebra: &Algebra) -> Self {
        Self { blocks: algebra.blocks().iter().map(|&n| CMatrix::zeros(n, n)).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect() }
    }

    /// `max_k ||x_k||_op`.
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    fn shapes(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.blocks.iter().map(|b| (b.nrows(), b.ncols()))
    }
}

fn check_shapes(algebra: &Algebra, shapes: impl ExactSizeIterator<Item = (usize, usize)>) -> Result<()> {
    if shapes.len() != algebra.num_blocks() {
        return Err(Error::input(format!(
            "expected {} blocks, got {}",
            algebra.num_blocks(),
            shapes.len()
        )));
    }
    for (k, ((r, c), &n)) in shapes.zip(algebra.blocks()).enumerate() {
        if r != n || c != n {
            return Err(Error::input(format!("block {k}: expected {n}x{n}, got {r}x{c}")));
        }
    }
    Ok(())
}

/// Self-adjoint functional `x ↦ Σ_k Tr(D_k x_k)` with Hermitian densities.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianFunctional {
    algebra: Algebra,
    densities: Vec<HermitianMatrix>,
}

impl HermitianFunctional {
    pub fn new(algebra: Algebra, densities: Vec<HermitianMatrix>) -> Result<Self> {
        check_shapes(&algebra, densities.iter().map(|d| (d.dim(), d.dim())))?;
        Ok(Self { algebra, densities })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn densities(&self) -> &[HermitianMatrix] {
        &self.densities
    }

    pub fn value_at_one(&self) -> f64 {
        self.densities.iter().map(HermitianMatrix::trace).sum()
    }

    pub(crate) fn decompositions(&self) -> Result<Vec<SpectralDecomposition>> {
        self.densities.iter().map(eigh).collect()
    }
}

/// Positive normal functional `x ↦ Σ_k Tr(D_k x_k)` with PSD densities.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFunctional {
    algebra: Algebra,
    densities: Vec<HermitianMatrix>,
}

impl NormalFunctional {
    /// Validates block shapes and positivity up to `psd_slack` relative to
    /// the largest eigenvalue over all blocks.
    pub fn new(algebra: Algebra, densities: Vec<HermitianMatrix>, tol: &TolerancePolicy) -> Result<Self> {
        let f = Self::from_parts_unchecked(algebra, densities);
        check_shapes(&f.algebra, f.densities.iter().map(|d| (d.dim(), d.dim())))?;
        f.spectra(tol)?;
        Ok(f)
    }

    pub(crate) fn from_parts_unchecked(algebra: Algebra, densities: Vec<HermitianMatrix>) -> Self {
        Self { algebra, densities }
    }

    pub fn zero(algebra: &Algebra) -> Self {
        let densities = algebra.blocks().iter().map(|&n| HermitianMatrix::zeros(n)).collect();
        Self { algebra: algebra.clone(), densities }
    }

    /// Single-block functional on `M_n(C)`.
    pub fn from_density(density: HermitianMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let algebra = Algebra::full_matrix(density.dim())?;
        Self::new(algebra, vec![density], tol)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn densities(&self) -> &[HermitianMatrix] {
        &self.densities
    }

    /// `f(1)`, the total mass.
    pub fn mass(&self) -> f64 {
        self.densities.iter().map(HermitianMatrix::trace).sum()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::input(format!("scale factor must be finite and >= 0, got {c}")));
        }
        Ok(self.map_blocks(|d| d.scale(c)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.algebra.check_same(&other.algebra)?;
        let densities = self.densities.iter().zip(&other.densities).map(|(a, b)| a.add(b)).collect();
        Ok(Self::from_parts_unchecked(self.algebra.clone(), densities))
    }

    /// `self - other` as a Hermitian functional.
    pub fn difference(&self, other: &Self) -> Result<HermitianFunctional> {
        self.algebra.check_same(&other.algebra)?;
        let densities = self.densities.iter().zip(&other.densities).map(|(a, b)| a.sub(b)).collect();
        HermitianFunctional::new(self.algebra.clone(), densities)
    }

    pub fn as_hermitian(&self) -> HermitianFunctional {
        HermitianFunctional { algebra: self.algebra.clone(), densities: self.densities.clone() }
    }

    fn map_blocks(&self, f: impl Fn(&HermitianMatrix) -> HermitianMatrix) -> Self {
        Self::from_parts_unchecked(self.algebra.clone(), self.densities.iter().map(f).collect())
    }

    /// Per-block spectra sharing one support cut, relative to the largest
    /// eigenvalue across all blocks.
    pub fn spectra(&self, tol: &TolerancePolicy) -> Result<FunctionalSpectrum> {
        let decompositions: Vec<SpectralDecomposition> = self.densities.iter().map(eigh).collect::<Result<_>>()?;
        let scale = decompositions.iter().map(SpectralDecomposition::max_abs).fold(0.0, f64::max);
        let blocks = decompositions
            .into_iter()
            .map(|d| PsdSpectrum::from_decomposition(d, scale, tol))
            .collect::<Result<_>>()?;
        Ok(FunctionalSpectrum { algebra: self.algebra.clone(), blocks, mass: self.mass() })
    }

    pub fn support(&self, tol: &TolerancePolicy) -> Result<BlockOperator> {
        Ok(self.spectra(tol)?.support())
    }

    /// Every density is diagonal, i.e. the functional lives on the diagonal subalgebra.
    pub fn is_diagonal(&self) -> bool {
        self.densities.iter().all(HermitianMatrix::is_diagonal)
    }

    /// Re-express a diagonal functional on `C^{Σ n_k}` (one 1x1 block per diagonal entry).
    pub fn split_diagonal(&self) -> Result<Self> {
        if !self.is_diagonal() {
            return Err(Error::input("functional has off-diagonal entries"));
        }
        let values: Vec<f64> = self.densities.iter().flat_map(HermitianMatrix::diagonal_values).collect();
        let algebra = Algebra::diagonal(values.len())?;
        let densities = values.iter().map(|&v| HermitianMatrix::diagonal(&[v])).collect::<Result<_>>()?;
        Ok(Self::from_parts_unchecked(algebra, densities))
    }

    /// `self ⊗ other` on the tensor-product algebra.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let algebra = self.algebra.tensor(&other.algebra)?;
        let densities = self
            .densities
            .iter()
            .flat_map(|a| other.densities.iter().map(move |b| a.kron(b)))
            .collect();
        Ok(Self::from_parts_unchecked(algebra, densities))
    }

    /// `self^{⊗n}` with the acting dimension `Σ n_k` capped at `cap`.
    pub fn tensor_power(&self, n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("tensor power needs n >= 1"));
        }
        let dim = (self.algebra.total_dim() as f64).powi(n as i32);
        if dim > cap as f64 {
            return Err(Error::DimensionCap { dim: dim.min(usize::MAX as f64) as usize, cap });
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.tensor(self)?;
        }
        Ok(acc)
    }
}

/// Cached spectra of every block of a normal functional.
#[derive(Debug, Clone)]
pub struct FunctionalSpectrum {
    pub algebra: Algebra,
    pub blocks: Vec<PsdSpectrum>,
    pub mass: f64,
}

impl FunctionalSpectrum {
    pub fn power(&self, z: Complex64) -> BlockOperator {
        BlockOperator { blocks: self.blocks.iter().map(|b| b.power(z)).collect() }
    }

    pub fn real_power(&self, s: f64) -> BlockOperator {
        self.power(Complex64::new(s, 0.0))
    }

    pub fn support(&self) -> BlockOperator {
        BlockOperator { blocks: self.blocks.iter().map(PsdSpectrum::support).collect() }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(PsdSpectrum::max_eigenvalue).fold(0.0, f64::max)
    }

    pub fn rank(&self) -> usize {
        self.blocks.iter().map(PsdSpectrum::rank).sum()
    }
}

/// `f(x) = Σ_k Tr(D_k x_k)`.
pub fn evaluate(f: &NormalFunctional, x: &BlockOperator) -> Result<Complex64> {
    check_shapes(&f.algebra, x.shapes())?;
    Ok(f.densities.iter().zip(&x.blocks).map(|(d, xb)| (d.as_matrix() * xb).trace()).sum())
}

/// Scale for order and inequality verdicts: `max(f(1), g(1), 1)`.
pub fn verdict_scale(masses: &[f64]) -> f64 {
    masses.iter().copied().fold(1.0, f64::max)
}

/// Smallest eigenvalue of `g - f` over all blocks.
pub fn order_margin(f: &NormalFunctional, g: &NormalFunctional) -> Result<f64> {
    let d = g.difference(f)?;
    Ok(d.decompositions()?.iter().map(SpectralDecomposition::min).fold(f64::INFINITY, f64::min))
}

/// `f <= g`: every block of `g - f` has min eigenvalue `>= -ineq_slack * scale`.
pub fn leq(f: &NormalFunctional, g: &NormalFunctional, tol: &TolerancePolicy) -> Result<bool> {
    let scale = verdict_scale(&[f.mass(), g.mass()]);
    Ok(order_margin(f, g)? >= -tol.ineq_slack * scale)
}

/// Positive and negative parts of a Hermitian functional, orthogonally supported.
#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    pub plus: NormalFunctional,
    pub minus: NormalFunctional,
}

impl JordanDecomposition {
    /// `|d| = d_+ + d_-`.
    pub fn abs(&self) -> NormalFunctional {
        let densities = self.plus.densities.iter().zip(&self.minus.densities).map(|(a, b)| a.add(b)).collect();
        NormalFunctional::from_parts_unchecked(self.plus.algebra.clone(), densities)
    }
}

/// Blockwise spectral split `d = d_+ - d_-`. Eigenvalues within
/// `support_cut * max_k ||d_k||` of zero are assigned to neither part.
pub fn jordan(d: &HermitianFunctional, tol: &TolerancePolicy) -> Result<JordanDecomposition> {
    let decompositions = d.decompositions()?;
    let scale = decompositions.iter().map(SpectralDecomposition::max_abs).fold(0.0, f64::max);
    let cut = tol.support_cut * scale;
    let (plus, minus): (Vec<_>, Vec<_>) = decompositions.iter().map(|dec| jordan_from_decomposition(dec, cut)).unzip();
    Ok(JordanDecomposition {
        plus: NormalFunctional::from_parts_unchecked(d.algebra.clone(), plus),
        minus: NormalFunctional::from_parts_unchecked(d.algebra.clone(), minus),
    })
}

/// `max_k ||s(f)_k s(g)_k||_op`: zero for orthogonal supports, one for overlapping ones.
pub fn support_overlap(f: &NormalFunctional, g: &NormalFunctional, tol: &TolerancePolicy) -> Result<f64> {
    f.algebra.check_same(&g.algebra)?;
    let sf = f.support(tol)?;
    let sg = g.support(tol)?;
    Ok(sf.mul(&sg).op_norm())
}

pub fn orthogonal(f: &NormalFunctional, g: &NormalFunctional, tol: &TolerancePolicy) -> Result<bool> {
    Ok(support_overlap(f, g, tol)? <= tol.orth_slack)
}

/// Reduction of `M` to `eMe` for a projection `e ∈ M`: each block is
/// replaced by the range of `e_k`, blocks where `e_k = 0` are dropped.
#[derive(Debug, Clone)]
pub struct Compression {
    source: Algebra,
    algebra: Algebra,
    /// Isometry onto `range(e_k)` for every kept block, with its source index.
    isometries: Vec<(usize, CMatrix)>,
    projection: BlockOperator,
}

impl Compression {
    pub fn new(source: &Algebra, e: &BlockOperator, tol: &TolerancePolicy) -> Result<Self> {
        check_shapes(source, e.shapes())?;
        let mut isometries = Vec::new();
        for (k, block) in e.blocks.iter().enumerate() {
            let h = HermitianMatrix::new(block.clone())?;
            if !is_projection(&h, tol.orth_slack) {
                return Err(Error::input(format!("block {k} of e is not a projection")));
            }
            let d = eigh(&h)?;
            let cols: Vec<usize> = (0..d.dim()).filter(|&j| d.eigenvalues[j] > 0.5).collect();
            if cols.is_empty() {
                continue;
            }
            let n = d.dim();
            let v = CMatrix::from_fn(n, cols.len(), |i, c| d.eigenvectors[(i, cols[c])]);
            isometries.push((k, v));
        }
        if isometries.is_empty() {
            return Err(Error::domain("compression by the zero projection"));
        }
        let algebra = Algebra::new(isometries.iter().map(|(_, v)| v.ncols()).collect())?;
        Ok(Self { source: source.clone(), algebra, isometries, projection: e.clone() })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    /// Restriction of `f` to `eMe`; requires `s(f) <= e`.
    pub fn functional(&self, f: &NormalFunctional, tol: &TolerancePolicy) -> Result<NormalFunctional> {
        self.source.check_same(&f.algebra)?;
        let sf = f.support(tol)?;
        let leak = BlockOperator::identity(&self.source).sub(&self.projection).mul(&sf).op_norm();
        if leak > tol.orth_slack {
            return Err(Error::domain(format!("projection does not dominate the support (leak {leak:e})")));
        }
        let densities = self
            .isometries
            .iter()
            .map(|(k, v)| HermitianMatrix::from_matrix_unchecked(v.adjoint() * f.densities[*k].as_matrix() * v))
            .collect();
        Ok(NormalFunctional::from_parts_unchecked(self.algebra.clone(), densities))
    }

    /// `x ↦ V* x V`, the compression of an operator to `eMe`.
    pub fn operator(&self, x: &BlockOperator) -> Result<BlockOperator> {
        check_shapes(&self.source, x.shapes())?;
        Ok(BlockOperator {
            blocks: self.isometries.iter().map(|(k, v)| v.adjoint() * &x.blocks[*k] * v).collect(),
        })
    }
}

/// Compress `f` to `eMe`.
pub fn compress(f: &NormalFunctional, e: &BlockOperator, tol: &TolerancePolicy) -> Result<NormalFunctional> {
    Compression::new(&f.algebra, e, tol)?.functional(f, tol)
}

/// Blockwise join `s(f) ∨ s(g)`.
pub fn support_join(f: &NormalFunctional, g: &NormalFunctional, tol: &TolerancePolicy) -> Result<BlockOperator> {
    f.algebra.check_same(&g.algebra)?;
    let sf = f.support(tol)?;
    let sg = g.support(tol)?;
    let blocks = sf
        .blocks
        .into_iter()
        .zip(sg.blocks)
        .map(|(p, q)| {
            let p = HermitianMatrix::from_matrix_unchecked(p);
            let q = HermitianMatrix::from_matrix_unchecked(q);
            crate::numerics::projection_join(&p, &q, tol).map(HermitianMatrix::into_matrix)
        })
        .collect::<Result<_>>()?;
    Ok(BlockOperator { blocks })
}
