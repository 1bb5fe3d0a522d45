//! Standard form `{M, H, J, P}` on Hilbert-Schmidt space.
//!
//! `H = ⊕_k M_{n_k}(C)` with `⟨ξ, ζ⟩ = Σ_k Tr(ζ_k* ξ_k)`, `M` acting on the
//! left, `J ξ = ξ*`, so that `j(y) = J y J` is right multiplication by `y*`.
//! With pseudo-powers, `Δ_{φψ}^z ξ = D_φ^z ξ D_ψ^{-z}` and the support of
//! `Δ_{φψ}` is `ξ ↦ s(φ) ξ s(ψ)`.

use num_complex::Complex64;

use crate::algebra::{Algebra, BlockOperator, FunctionalSpectrum, NormalFunctional};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, HermitianMatrix, PsdSpectrum, TolerancePolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct StandardVector {
    algebra: Algebra,
    pub blocks: Vec<CMatrix>,
}

impl StandardVector {
    pub fn new(algebra: &Algebra, blocks: Vec<CMatrix>) -> Result<Self> {
        BlockOperator::new(algebra, blocks.clone())?;
        Ok(Self { algebra: algebra.clone(), blocks })
    }

    pub fn zero(algebra: &Algebra) -> Self {
        Self { algebra: algebra.clone(), blocks: BlockOperator::zeros(algebra).blocks }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    /// `⟨self, other⟩`, linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| b.dotc(a)).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|b| b * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    /// `x ξ` for `x ∈ M`.
    pub fn left_mul(&self, x: &BlockOperator) -> Self {
        Self { algebra: self.algebra.clone(), blocks: x.blocks.iter().zip(&self.blocks).map(|(x, b)| x * b).collect() }
    }

    /// `ξ y`, i.e. the action of `j(y*) ∈ M'`.
    pub fn right_mul(&self, y: &BlockOperator) -> Self {
        Self { algebra: self.algebra.clone(), blocks: self.blocks.iter().zip(&y.blocks).map(|(b, y)| b * y).collect() }
    }

    pub fn max_block_distance(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        Self { algebra: self.algebra.clone(), blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect() }
    }
}

/// Cone vector `ξ_f = D^{1/2}` blockwise.
pub fn xi_of(f: &NormalFunctional, tol: &TolerancePolicy) -> Result<StandardVector> {
    Ok(xi_from_spectrum(&f.spectra(tol)?))
}

fn xi_from_spectrum(spec: &FunctionalSpectrum) -> StandardVector {
    StandardVector { algebra: spec.algebra.clone(), blocks: spec.real_power(0.5).blocks }
}

/// Modular conjugation `J ξ = ξ*`.
pub fn apply_j(xi: &StandardVector) -> StandardVector {
    xi.map(|b| b.adjoint())
}

/// `Δ_{φψ}`, held as the two spectra; powers are applied, never materialized.
#[derive(Debug, Clone)]
pub struct RelativeModularOperator {
    phi: FunctionalSpectrum,
    psi: FunctionalSpectrum,
}

impl RelativeModularOperator {
    pub fn new(phi: &NormalFunctional, psi: &NormalFunctional, tol: &TolerancePolicy) -> Result<Self> {
        if phi.algebra() != psi.algebra() {
            return Err(Error::input("functionals live on different algebras"));
        }
        Ok(Self { phi: phi.spectra(tol)?, psi: psi.spectra(tol)? })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.phi.algebra
    }

    /// `Δ^z ξ = D_φ^z ξ D_ψ^{-z}` for `Re z ∈ [-1, 1]`.
    pub fn apply_power(&self, z: Complex64, xi: &StandardVector) -> Result<StandardVector> {
        if !(-1.0..=1.0).contains(&z.re) || !z.im.is_finite() {
            return Err(Error::domain(format!("exponent {z} outside Re z ∈ [-1, 1]")));
        }
        if xi.algebra() != self.algebra() {
            return Err(Error::input("vector lives on a different algebra"));
        }
        let left = self.phi.power(z);
        let right = self.psi.power(-z);
        Ok(xi.left_mul(&left).right_mul(&right))
    }

    /// `s(φ) j(s(ψ))`, the support projection of `Δ`.
    pub fn support_apply(&self, xi: &StandardVector) -> Result<StandardVector> {
        self.apply_power(Complex64::new(0.0, 0.0), xi)
    }
}

pub fn apply_delta_power(delta: &RelativeModularOperator, z: Complex64, xi: &StandardVector) -> Result<StandardVector> {
    delta.apply_power(z, xi)
}

/// Support eigenpairs of two positive functionals and the squared overlaps
/// `W_ij = |⟨u_i, v_j⟩|²` of their eigenvectors, per block.
#[derive(Debug, Clone)]
pub struct SpectralPair {
    blocks: Vec<PairBlock>,
}

#[derive(Debug, Clone)]
struct PairBlock {
    a: Vec<f64>,
    b: Vec<f64>,
    // row-major a.len() x b.len()
    w: Vec<f64>,
}

impl SpectralPair {
    pub fn new(a: &FunctionalSpectrum, b: &FunctionalSpectrum) -> Self {
        let blocks = a.blocks.iter().zip(&b.blocks).map(|(sa, sb)| pair_block(sa, sb)).collect();
        Self { blocks }
    }

    /// `Σ_ij a_i^s b_j^{1-s} W_ij = Tr A^s B^{1-s}` with `0^0 := 0`.
    pub fn trace_power(&self, s: f64) -> f64 {
        let mut total = 0.0;
        for blk in &self.blocks {
            let nb = blk.b.len();
            let bp: Vec<f64> = blk.b.iter().map(|&b| b.powf(1.0 - s)).collect();
            for (i, &a) in blk.a.iter().enumerate() {
                let ap = a.powf(s);
                let row = &blk.w[i * nb..(i + 1) * nb];
                total += ap * row.iter().zip(&bp).map(|(w, b)| w * b).sum::<f64>();
            }
        }
        total
    }

    /// `⟨Δ_{A,B}(Δ_{A,B} + λ)^{-1} ξ_B, ξ_B⟩ = Σ_ij a_i b_j / (a_i + λ b_j) W_ij`.
    pub fn resolvent_form(&self, lambda: f64) -> f64 {
        let mut total = 0.0;
        for blk in &self.blocks {
            let nb = blk.b.len();
            for (i, &a) in blk.a.iter().enumerate() {
                for (j, &b) in blk.b.iter().enumerate() {
                    total += a * b / (a + lambda * b) * blk.w[i * nb + j];
                }
            }
        }
        total
    }
}

fn pair_block(sa: &PsdSpectrum, sb: &PsdSpectrum) -> PairBlock {
    let ua = &sa.decomposition.eigenvectors;
    let ub = &sb.decomposition.eigenvectors;
    let pa: Vec<(f64, usize)> = sa.support_pairs().collect();
    let pb: Vec<(f64, usize)> = sb.support_pairs().collect();
    let mut w = Vec::with_capacity(pa.len() * pb.len());
    for &(_, i) in &pa {
        for &(_, j) in &pb {
            w.push(ua.column(i).dotc(&ub.column(j)).norm_sqr());
        }
    }
    PairBlock { a: pa.iter().map(|p| p.0).collect(), b: pb.iter().map(|p| p.0).collect(), w }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::input(format!("s = {s} outside [0, 1]")));
    }
    Ok(())
}

/// `F_s(η, φ) = ‖Δ_{η,φ}^{s/2} ξ_φ‖²` for one pair, with cached spectra.
#[derive(Debug, Clone)]
pub struct Overlap {
    eta: FunctionalSpectrum,
    phi: FunctionalSpectrum,
    pair: SpectralPair,
}

impl Overlap {
    pub fn new(eta: &NormalFunctional, phi: &NormalFunctional, tol: &TolerancePolicy) -> Result<Self> {
        if eta.algebra() != phi.algebra() {
            return Err(Error::input("functionals live on different algebras"));
        }
        let eta = eta.spectra(tol)?;
        let phi = phi.spectra(tol)?;
        let pair = SpectralPair::new(&eta, &phi);
        Ok(Self { eta, phi, pair })
    }

    /// Trace route `Tr D_η^s D_φ^{1-s}`, evaluated in the eigenbases.
    pub fn value(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        Ok(self.pair.trace_power(s))
    }

    /// Superoperator route: apply `Δ_{η,φ}^{s/2}` to `ξ_φ` and take the squared norm.
    pub fn value_via_delta(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        let delta = RelativeModularOperator { phi: self.eta.clone(), psi: self.phi.clone() };
        let xi = xi_from_spectrum(&self.phi);
        Ok(delta.apply_power(Complex64::new(s / 2.0, 0.0), &xi)?.norm_sqr())
    }

    pub fn eta_mass(&self) -> f64 {
        self.eta.mass
    }

    pub fn phi_mass(&self) -> f64 {
        self.phi.mass
    }
}

/// `F_s(η, φ) = ‖Δ_{η,φ}^{s/2} ξ_φ‖² = Tr D_η^s D_φ^{1-s}`; at `s ∈ {0, 1}`
/// the zero power is the support projection.
pub fn overlap_f(eta: &NormalFunctional, phi: &NormalFunctional, s: f64, tol: &TolerancePolicy) -> Result<f64> {
    Overlap::new(eta, phi, tol)?.value(s)
}

/// Radon-Nikodym cocycle `(Dφ : Dψ)_t = D_φ^{it} D_ψ^{-it}` and its
/// continuation to imaginary times.
#[derive(Debug, Clone)]
pub struct ConnesCocycle {
    phi: FunctionalSpectrum,
    psi: FunctionalSpectrum,
    support_leak: f64,
    lambda_star: f64,
    orth_slack: f64,
}

impl ConnesCocycle {
    pub fn new(phi: &NormalFunctional, psi: &NormalFunctional, tol: &TolerancePolicy) -> Result<Self> {
        if phi.algebra() != psi.algebra() {
            return Err(Error::input("functionals live on different algebras"));
        }
        let phi = phi.spectra(tol)?;
        let psi = psi.spectra(tol)?;
        let sphi = phi.support();
        let complement = BlockOperator::identity(&psi.algebra).sub(&psi.support());
        let support_leak = complement.mul(&sphi).op_norm();
        let lambda_star = if support_leak > tol.orth_slack { 0.0 } else { largest_order_constant(&phi, &psi) };
        Ok(Self { phi, psi, support_leak, lambda_star, orth_slack: tol.orth_slack })
    }

    /// Largest `λ` with `λ φ <= ψ`; `0` when `s(φ) ⊄ s(ψ)`, `∞` when `φ = 0`.
    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    pub fn support_contained(&self) -> bool {
        self.support_leak <= self.orth_slack
    }

    /// `(Dφ : Dψ)_{-is} = D_φ^s D_ψ^{-s}` for `s ∈ (0, 1)`.
    pub fn at(&self, s: f64) -> Result<BlockOperator> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("cocycle parameter s = {s} outside (0, 1)")));
        }
        self.at_time(Complex64::new(0.0, -s))
    }

    /// `D_φ^{it} D_ψ^{-it}` for complex `t` with `|Im t| <= 1`.
    pub fn at_time(&self, t: Complex64) -> Result<BlockOperator> {
        if !self.support_contained() {
            return Err(Error::domain(format!(
                "support of φ not contained in support of ψ (leak {:e})",
                self.support_leak
            )));
        }
        let z = Complex64::new(0.0, 1.0) * t;
        if z.re.abs() > 1.0 {
            return Err(Error::domain(format!("|Im t| = {} > 1", t.im.abs())));
        }
        Ok(self.phi.power(z).mul(&self.psi.power(-z)))
    }

    /// `λ*^{-s}`, the norm bound at `t = -is`; it holds for `s ∈ [0, 1/2]`.
    pub fn norm_bound(&self, s: f64) -> f64 {
        self.lambda_star.powf(-s)
    }
}

/// `1 / max_k λ_max(D_ψ^{-1/2} D_φ D_ψ^{-1/2})` on the support of `ψ`.
fn largest_order_constant(phi: &FunctionalSpectrum, psi: &FunctionalSpectrum) -> f64 {
    let mut top: f64 = 0.0;
    for (p, q) in phi.blocks.iter().zip(&psi.blocks) {
        if p.rank() == 0 {
            continue;
        }
        let inv_half = q.real_power(-0.5);
        let dphi = p.decomposition.reconstruct();
        let m = HermitianMatrix::from_matrix_unchecked(&inv_half * dphi * &inv_half);
        let d = crate::numerics::eigh(&m).expect("finite by construction");
        top = top.max(d.max());
    }
    if top > 0.0 {
        1.0 / top
    } else {
        f64::INFINITY
    }
}

/// `xξ_ψ + (1 - j(s(ψ)))ζ`, the core vectors on which `S_{φψ}` is defined.
pub fn core_vector(
    psi: &NormalFunctional,
    x: &BlockOperator,
    zeta: &StandardVector,
    tol: &TolerancePolicy,
) -> Result<StandardVector> {
    let spec = psi.spectra(tol)?;
    let xi_psi = xi_from_spectrum(&spec);
    let complement = BlockOperator::identity(psi.algebra()).sub(&spec.support());
    Ok(xi_psi.left_mul(x).add(&zeta.right_mul(&complement)))
}

/// `S_{φψ}(xξ_ψ + (1 - j(s(ψ)))ζ) = s(ψ) x* ξ_φ`.
pub fn s_operator_apply(
    phi: &NormalFunctional,
    psi: &NormalFunctional,
    x: &BlockOperator,
    zeta: &StandardVector,
    tol: &TolerancePolicy,
) -> Result<StandardVector> {
    if phi.algebra() != psi.algebra() || zeta.algebra() != phi.algebra() {
        return Err(Error::input("arguments live on different algebras"));
    }
    BlockOperator::new(phi.algebra(), x.blocks.clone())?;
    let xi_phi = xi_of(phi, tol)?;
    let s_psi = psi.support(tol)?;
    Ok(xi_phi.left_mul(&s_psi.mul(&x.adjoint())))
}

/// The polar-decomposition route `J Δ_{φψ}^{1/2} v`.
pub fn j_delta_half(phi: &NormalFunctional, psi: &NormalFunctional, v: &StandardVector, tol: &TolerancePolicy) -> Result<StandardVector> {
    let delta = RelativeModularOperator::new(phi, psi, tol)?;
    Ok(apply_j(&delta.apply_power(Complex64::new(0.5, 0.0), v)?))
}
