//! Verifiers for the overlap inequalities, their equality condition and the
//! auxiliary monotonicity, orthogonality and continuity statements.
//!
//! Every verifier returns a [`VerificationReport`] for a claim `lhs <= rhs`
//! with `gap = rhs - lhs`, judged against `ineq_slack * scale` where
//! `scale = max(masses, 1)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{
    compress, jordan, leq, orthogonal, support_join, verdict_scale, Algebra, BlockOperator, HermitianFunctional,
    JordanDecomposition, NormalFunctional,
};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, HermitianMatrix, TolerancePolicy};
use crate::rng::{random_psd, random_unitary, CounterRng};
use crate::standard_form::{overlap_f, Overlap};

/// Default `s` grid: 0.05, 0.10, ..., 0.95.
pub fn default_s_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub scale: f64,
    pub pass: bool,
    pub details: BTreeMap<String, f64>,
}

impl VerificationReport {
    /// Report for `lhs <= rhs`.
    pub fn leq(name: &str, lhs: f64, rhs: f64, scale: f64, tol: &TolerancePolicy) -> Self {
        let gap = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            gap,
            scale,
            pass: gap >= -tol.ineq_slack * scale,
            details: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Gap relative to the verdict scale.
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.scale
    }
}

fn same_algebra(a: &NormalFunctional, b: &NormalFunctional) -> Result<()> {
    if a.algebra() != b.algebra() {
        return Err(Error::input(format!(
            "algebra mismatch: {:?} vs {:?}",
            a.algebra().blocks(),
            b.algebra().blocks()
        )));
    }
    Ok(())
}

/// Everything the main inequality and its corollary need for one pair,
/// computed once and reused across an `s` grid.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    eta_mass: f64,
    phi_mass: f64,
    plus_mass: f64,
    minus_mass: f64,
    forward: Overlap,
    backward: Overlap,
    scale: f64,
    tol: TolerancePolicy,
}

impl PairAnalysis {
    pub fn new(eta: &NormalFunctional, phi: &NormalFunctional, tol: &TolerancePolicy) -> Result<Self> {
        same_algebra(eta, phi)?;
        let jd = jordan(&eta.difference(phi)?, tol)?;
        Ok(Self {
            eta_mass: eta.mass(),
            phi_mass: phi.mass(),
            plus_mass: jd.plus.mass(),
            minus_mass: jd.minus.mass(),
            forward: Overlap::new(eta, phi, tol)?,
            backward: Overlap::new(phi, eta, tol)?,
            scale: verdict_scale(&[eta.mass(), phi.mass()]),
            tol: *tol,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `F_s(η, φ)`.
    pub fn overlap(&self, s: f64) -> Result<f64> {
        self.forward.value(s)
    }

    /// `η(1) - (η-φ)_+(1) <= F_s(η, φ)`.
    pub fn main(&self, s: f64) -> Result<VerificationReport> {
        let lhs = self.eta_mass - self.plus_mass;
        let rhs = self.forward.value(s)?;
        Ok(VerificationReport::leq("main", lhs, rhs, self.scale, &self.tol)
            .with("s", s)
            .with("plus_mass", self.plus_mass))
    }

    /// `φ(1) + η(1) - |φ-η|(1) <= 2 F_s(η, φ)` together with
    /// `F_{1-s}(φ, η) = F_s(η, φ)`.
    pub fn corollary(&self, s: f64) -> Result<VerificationReport> {
        let lhs = self.phi_mass + self.eta_mass - (self.plus_mass + self.minus_mass);
        let f = self.forward.value(s)?;
        let swapped = self.backward.value(1.0 - s)?;
        let swap_residual = (f - swapped).abs();
        let mut report = VerificationReport::leq("corollary", lhs, 2.0 * f, self.scale, &self.tol)
            .with("s", s)
            .with("swap_residual", swap_residual)
            .with("abs_mass", self.plus_mass + self.minus_mass);
        report.pass &= swap_residual <= self.tol.ineq_slack * self.scale;
        Ok(report)
    }
}

pub fn verify_main(eta: &NormalFunctional, phi: &NormalFunctional, s: f64, tol: &TolerancePolicy) -> Result<VerificationReport> {
    PairAnalysis::new(eta, phi, tol)?.main(s)
}

pub fn verify_corollary(
    eta: &NormalFunctional,
    phi: &NormalFunctional,
    s: f64,
    tol: &TolerancePolicy,
) -> Result<VerificationReport> {
    PairAnalysis::new(eta, phi, tol)?.corollary(s)
}

/// `F(φ2,η) - F(φ1,η) <= F(φ2,ψ) - F(φ1,ψ)` for `φ1 <= φ2`, `η <= ψ`.
pub fn verify_diff_monotonicity(
    phi1: &NormalFunctional,
    phi2: &NormalFunctional,
    eta: &NormalFunctional,
    psi: &NormalFunctional,
    s: f64,
    tol: &TolerancePolicy,
) -> Result<VerificationReport> {
    same_algebra(phi1, phi2)?;
    same_algebra(phi1, eta)?;
    same_algebra(phi1, psi)?;
    if !leq(phi1, phi2, tol)? {
        return Err(Error::Precondition("φ1 <= φ2 fails".into()));
    }
    if !leq(eta, psi, tol)? {
        return Err(Error::Precondition("η <= ψ fails".into()));
    }
    let lhs = overlap_f(phi2, eta, s, tol)? - overlap_f(phi1, eta, s, tol)?;
    let rhs = overlap_f(phi2, psi, s, tol)? - overlap_f(phi1, psi, s, tol)?;
    let scale = verdict_scale(&[phi1.mass(), phi2.mass(), eta.mass(), psi.mass()]);
    Ok(VerificationReport::leq("diff_monotonicity", lhs, rhs, scale, tol).with("s", s))
}

/// For `φ <= η`: `F_s(η, φ) = φ(1)` iff `η - φ ⊥ φ`.
///
/// The report is the claim `φ(1) <= F_s(η, φ)` and passes only when the
/// numerical equality test and the support test agree. The boolean is the
/// support test.
pub fn verify_lemma_ec(
    eta: &NormalFunctional,
    phi: &NormalFunctional,
    s: f64,
    tol: &TolerancePolicy,
) -> Result<(VerificationReport, bool)> {
    same_algebra(eta, phi)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::input(format!("s = {s} outside (0, 1)")));
    }
    if !leq(phi, eta, tol)? {
        return Err(Error::Precondition("φ <= η fails".into()));
    }
    let excess = jordan(&eta.difference(phi)?, tol)?.plus;
    let orth = orthogonal(&excess, phi, tol)?;
    let f = overlap_f(eta, phi, s, tol)?;
    let scale = verdict_scale(&[eta.mass(), phi.mass()]);
    let equal = (f - phi.mass()).abs() <= tol.ineq_slack * scale;
    let mut report = VerificationReport::leq("lemma_ec", phi.mass(), f, scale, tol)
        .with("s", s)
        .with("equal", equal as u8 as f64)
        .with("orthogonal", orth as u8 as f64);
    report.pass &= equal == orth;
    Ok((report, orth))
}

#[derive(Debug, Clone)]
pub struct EqualityCertificate {
    /// `max_k ‖s((η-φ)_+)_k D_φ,k‖`.
    pub plus_orth_phi: f64,
    /// `max_k ‖s((η-φ)_-)_k D_η,k‖`.
    pub minus_orth_eta: f64,
    /// `η - (η-φ)_+`, the common part; positive whenever the verdict holds.
    pub psi: HermitianFunctional,
    /// Smallest eigenvalue of `psi` over all blocks.
    pub psi_min_eigenvalue: f64,
    /// `max_k ‖φ_k - (η-φ)_-,k - ψ_k‖_F`.
    pub reconstruction_residual: f64,
    pub scale: f64,
    pub verdict: bool,
}

impl EqualityCertificate {
    /// The common part as a positive functional.
    pub fn psi_positive(&self, tol: &TolerancePolicy) -> Result<NormalFunctional> {
        NormalFunctional::new(self.psi.algebra().clone(), self.psi.densities().to_vec(), tol)
    }
}

fn residual(p: &BlockOperator, d: &NormalFunctional) -> f64 {
    p.blocks
        .iter()
        .zip(d.densities())
        .map(|(p, d)| crate::numerics::spectral_norm(&(p * d.as_matrix())))
        .fold(0.0, f64::max)
}

/// Structural test of the equality condition: `s((η-φ)_+) ⊥ φ` and `s((η-φ)_-) ⊥ η`.
pub fn certify_equality(eta: &NormalFunctional, phi: &NormalFunctional, tol: &TolerancePolicy) -> Result<EqualityCertificate> {
    same_algebra(eta, phi)?;
    let JordanDecomposition { plus, minus } = jordan(&eta.difference(phi)?, tol)?;
    let plus_orth_phi = residual(&plus.support(tol)?, phi);
    let minus_orth_eta = residual(&minus.support(tol)?, eta);
    let psi = eta.difference(&plus)?;
    let psi_min_eigenvalue = psi_min(&psi)?;
    let reconstruction_residual = phi
        .densities()
        .iter()
        .zip(minus.densities())
        .zip(psi.densities())
        .map(|((p, m), c)| p.sub(m).sub(c).frobenius_norm())
        .fold(0.0, f64::max);
    let scale = verdict_scale(&[eta.mass(), phi.mass()]);
    let verdict = plus_orth_phi <= tol.orth_slack * scale && minus_orth_eta <= tol.orth_slack * scale;
    Ok(EqualityCertificate {
        plus_orth_phi,
        minus_orth_eta,
        psi,
        psi_min_eigenvalue,
        reconstruction_residual,
        scale,
        verdict,
    })
}

fn psi_min(psi: &HermitianFunctional) -> Result<f64> {
    let mut min = f64::INFINITY;
    for d in psi.densities() {
        min = min.min(crate::numerics::eigh(d)?.min());
    }
    Ok(min)
}

/// Build `η = P + C`, `φ = M + C` with `P`, `M`, `C` of the given ranks on
/// mutually orthogonal subspaces. Each part is a random PSD matrix on its
/// subspace; subspaces are unions of columns of a random unitary per block,
/// with the slots spread across blocks at random.
pub fn construct_equality_instance(
    algebra: &Algebra,
    ranks: (usize, usize, usize),
    seed: u64,
) -> Result<(NormalFunctional, NormalFunctional)> {
    let (rp, rm, rc) = ranks;
    let total = algebra.total_dim();
    if rp + rm + rc > total {
        return Err(Error::input(format!("ranks {rp}+{rm}+{rc} exceed total dimension {total}")));
    }
    let mut rng = CounterRng::new(seed);
    let mut slots: Vec<(usize, usize)> = algebra
        .blocks()
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| (0..n).map(move |i| (k, i)))
        .collect();
    rng.shuffle(&mut slots);
    let unitaries: Vec<CMatrix> = algebra.blocks().iter().map(|&n| random_unitary(&mut rng, n)).collect();

    let part = |rng: &mut CounterRng, chosen: &[(usize, usize)]| -> Vec<HermitianMatrix> {
        algebra
            .blocks()
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let cols: Vec<usize> = chosen.iter().filter(|(b, _)| *b == k).map(|(_, i)| *i).collect();
                if cols.is_empty() {
                    return HermitianMatrix::zeros(n);
                }
                let basis = CMatrix::from_fn(n, cols.len(), |i, c| unitaries[k][(i, cols[c])]);
                let inner = random_psd(rng, cols.len(), cols.len()).scale(rng.uniform(0.2, 1.2));
                HermitianMatrix::from_matrix_unchecked(&basis * inner.as_matrix() * basis.adjoint())
            })
            .collect()
    };
    let plus = part(&mut rng, &slots[..rp]);
    let minus = part(&mut rng, &slots[rp..rp + rm]);
    let common = part(&mut rng, &slots[rp + rm..rp + rm + rc]);
    let eta = plus.iter().zip(&common).map(|(a, c)| a.add(c)).collect();
    let phi = minus.iter().zip(&common).map(|(a, c)| a.add(c)).collect();
    Ok((
        NormalFunctional::from_parts_unchecked(algebra.clone(), eta),
        NormalFunctional::from_parts_unchecked(algebra.clone(), phi),
    ))
}

/// Threshold on `d_{n_max}` relative to the scale.
pub const CONTINUITY_THRESHOLD: f64 = 1e-5;

/// `d_n = |F_s(φ + χ/n, η) - F_s(φ, η)|` for `n = 1..=n_max`.
pub fn continuity_series(
    phi: &NormalFunctional,
    chi: &NormalFunctional,
    eta: &NormalFunctional,
    s: f64,
    n_max: usize,
    tol: &TolerancePolicy,
) -> Result<Vec<f64>> {
    same_algebra(phi, chi)?;
    same_algebra(phi, eta)?;
    if n_max == 0 {
        return Err(Error::input("n_max must be at least 1"));
    }
    let base = overlap_f(phi, eta, s, tol)?;
    (1..=n_max)
        .map(|n| {
            let phi_n = phi.add(&chi.scale(1.0 / n as f64)?)?;
            Ok((overlap_f(&phi_n, eta, s, tol)? - base).abs())
        })
        .collect()
}

/// `d_{n_max} <= 1e-5 * scale` and `d_n` non-increasing on `n >= n_max / 2`.
pub fn verify_continuity(
    phi: &NormalFunctional,
    chi: &NormalFunctional,
    eta: &NormalFunctional,
    s: f64,
    n_max: usize,
    tol: &TolerancePolicy,
) -> Result<VerificationReport> {
    let d = continuity_series(phi, chi, eta, s, n_max, tol)?;
    let scale = verdict_scale(&[phi.mass(), chi.mass(), eta.mass()]);
    let last = *d.last().expect("n_max >= 1");
    let start = (n_max / 2).max(1) - 1;
    let noise = 1e-14 * scale;
    let decreasing = d[start..].windows(2).all(|w| w[1] <= w[0] + noise);
    let mut report = VerificationReport::leq("continuity", last, CONTINUITY_THRESHOLD * scale, scale, tol)
        .with("s", s)
        .with("n_max", n_max as f64)
        .with("eventually_decreasing", decreasing as u8 as f64);
    for (i, v) in d.iter().enumerate() {
        let n = i + 1;
        if n.is_power_of_two() || n == n_max {
            report = report.with(&format!("d_{n:03}"), *v);
        }
    }
    report.pass = last <= CONTINUITY_THRESHOLD * scale && decreasing;
    Ok(report)
}

/// The three steps of the proof chain with `ω = φ + (η-φ)_+`:
/// `F(ω,φ) - φ(1)`, the difference-monotonicity step, and `F_{1-s}(ω,η) - η(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainGaps {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    /// Sum of the three, equal to `F_s(η,φ) - η(1) + (η-φ)_+(1)`.
    pub total: f64,
}

pub fn chain_gaps(eta: &NormalFunctional, phi: &NormalFunctional, s: f64, tol: &TolerancePolicy) -> Result<ChainGaps> {
    same_algebra(eta, phi)?;
    let plus = jordan(&eta.difference(phi)?, tol)?.plus;
    let omega = phi.add(&plus)?;
    let f_omega_phi = overlap_f(&omega, phi, s, tol)?;
    let f_eta_phi = overlap_f(eta, phi, s, tol)?;
    let f_eta_omega = overlap_f(eta, &omega, s, tol)?;
    let f_omega_eta = overlap_f(&omega, eta, 1.0 - s, tol)?;
    let first = f_omega_phi - phi.mass();
    let second = (omega.mass() - f_eta_omega) - (f_omega_phi - f_eta_phi);
    let third = f_omega_eta - eta.mass();
    Ok(ChainGaps { first, second, third, total: first + second + third })
}

/// Both sides of the main inequality for the faithful regularization
/// `η + δφ`, `φ + εη`.
pub fn regularized_main(
    eta: &NormalFunctional,
    phi: &NormalFunctional,
    s: f64,
    epsilon: f64,
    delta: f64,
    tol: &TolerancePolicy,
) -> Result<VerificationReport> {
    let eta_d = eta.add(&phi.scale(delta)?)?;
    let phi_e = phi.add(&eta.scale(epsilon)?)?;
    Ok(verify_main(&eta_d, &phi_e, s, tol)?.with("epsilon", epsilon).with("delta", delta))
}

/// Main inequality evaluated on `eMe` with `e = s(η) ∨ s(φ)`.
pub fn compressed_main(eta: &NormalFunctional, phi: &NormalFunctional, s: f64, tol: &TolerancePolicy) -> Result<VerificationReport> {
    let e = support_join(eta, phi, tol)?;
    if e.blocks.iter().all(|b| b.norm() == 0.0) {
        return verify_main(eta, phi, s, tol);
    }
    verify_main(&compress(eta, &e, tol)?, &compress(phi, &e, tol)?, s, tol)
}

/// Largest distance between the direct overlap and the regularized one along
/// `ε = δ = 10^{-k}` for `k` in `exponents`; the last entry is the limit error.
pub fn regularization_errors(
    eta: &NormalFunctional,
    phi: &NormalFunctional,
    s: f64,
    exponents: &[i32],
    tol: &TolerancePolicy,
) -> Result<Vec<(f64, f64)>> {
    let direct = overlap_f(eta, phi, s, tol)?;
    exponents
        .iter()
        .map(|&k| {
            let eps = 10f64.powi(-k);
            let r = regularized_main(eta, phi, s, eps, eps, tol)?;
            Ok((eps, (r.rhs - direct).abs()))
        })
        .collect()
}
