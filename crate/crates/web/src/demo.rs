//! Qubit computations behind the page, kept free of wasm types so they can
//! be tested natively.
//!
//! A qubit functional is given by its mass `m` and Bloch vector `r`,
//! `|r| <= 1`, with density `D = (m/2)(1 + r·σ)`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use modineq::chernoff::{exponent_convergence, Exponent, TestingInstance, DEFAULT_DIM_CAP};
use modineq::inequalities::{certify_equality, PairAnalysis};
use modineq::{CMatrix, HermitianMatrix, NormalFunctional, TolerancePolicy};

/// Upper limit on sweep and curve resolution.
pub const MAX_POINTS: usize = 2001;
/// Upper limit on the number of copies; `2^n` must stay within the dimension cap.
pub const MAX_COPIES: usize = 10;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("Bloch vector has length {0:.6}, must be at most 1")]
    OutsideBall(f64),
    #[error("{0}")]
    Range(String),
    #[error(transparent)]
    Core(#[from] modineq::Error),
}

pub type Result<T> = std::result::Result<T, DemoError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit {
    pub mass: f64,
    pub bloch: [f64; 3],
}

impl Qubit {
    pub fn new(mass: f64, bloch: [f64; 3]) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(DemoError::Range(format!("mass must be finite and >= 0, got {mass}")));
        }
        if bloch.iter().any(|c| !c.is_finite()) {
            return Err(DemoError::Range("Bloch vector has non-finite components".into()));
        }
        let len = bloch.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len > 1.0 + 1e-12 {
            return Err(DemoError::OutsideBall(len));
        }
        Ok(Self { mass, bloch })
    }

    pub fn state(bloch: [f64; 3]) -> Result<Self> {
        Self::new(1.0, bloch)
    }

    pub fn functional(&self) -> Result<NormalFunctional> {
        let [x, y, z] = self.bloch;
        let h = 0.5 * self.mass;
        let c = |re: f64, im: f64| Complex64::new(h * re, h * im);
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0 + z, 0.0), c(x, -y), c(x, y), c(1.0 - z, 0.0)]);
        Ok(NormalFunctional::from_density(HermitianMatrix::new(m)?, &TolerancePolicy::default())?)
    }
}

fn grid(points: usize) -> Result<Vec<f64>> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(DemoError::Range(format!("points must lie in 2..={MAX_POINTS}, got {points}")));
    }
    Ok((0..points).map(|i| i as f64 / (points - 1) as f64).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapSweep {
    pub s: Vec<f64>,
    pub overlap: Vec<f64>,
    /// `η(1) - (η-φ)_+(1)`, independent of `s`.
    pub main_lower: f64,
    /// `(φ(1) + η(1) - |φ-η|(1)) / 2`, independent of `s`.
    pub corollary_lower: f64,
    /// Smallest `F_s - main_lower` over the grid.
    pub min_main_gap: f64,
    pub all_pass: bool,
}

pub fn overlap_sweep(eta: Qubit, phi: Qubit, points: usize) -> Result<OverlapSweep> {
    let tol = TolerancePolicy::default();
    let pair = PairAnalysis::new(&eta.functional()?, &phi.functional()?, &tol)?;
    let s = grid(points)?;
    let mut overlap = Vec::with_capacity(s.len());
    let (mut main_lower, mut corollary_lower) = (0.0, 0.0);
    let mut min_main_gap = f64::INFINITY;
    let mut all_pass = true;
    for &si in &s {
        let main = pair.main(si)?;
        let cor = pair.corollary(si)?;
        main_lower = main.lhs;
        corollary_lower = 0.5 * cor.lhs;
        min_main_gap = min_main_gap.min(main.gap);
        all_pass &= main.pass && cor.pass;
        overlap.push(pair.overlap(si)?);
    }
    Ok(OverlapSweep { s, overlap, main_lower, corollary_lower, min_main_gap, all_pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChernoffCurve {
    pub s: Vec<f64>,
    /// `Q(s) = Tr ρ^s σ^{1-s}`.
    pub q: Vec<f64>,
    pub s_star: f64,
    pub q_star: f64,
    /// `None` when the states are orthogonal.
    pub exponent: Option<f64>,
    pub n: Vec<usize>,
    pub p_e: Vec<f64>,
    pub bound: Vec<f64>,
    pub bound_holds: bool,
}

pub fn chernoff_curve(rho: Qubit, sigma: Qubit, prior: f64, n_max: usize, points: usize) -> Result<ChernoffCurve> {
    if !(1..=MAX_COPIES).contains(&n_max) {
        return Err(DemoError::Range(format!("copies must lie in 1..={MAX_COPIES}, got {n_max}")));
    }
    let tol = TolerancePolicy::default();
    let (r, sg) = (rho.functional()?, sigma.functional()?);
    let inst = TestingInstance::new(r.clone(), sg.clone(), prior)?;
    let (result, rows) = exponent_convergence(&inst, n_max, DEFAULT_DIM_CAP, &tol)?;
    let s = grid(points)?;
    let q = s.iter().map(|&x| modineq::chernoff::chernoff_q(&r, &sg, x, &tol)).collect::<modineq::Result<Vec<_>>>()?;
    Ok(ChernoffCurve {
        s,
        q,
        s_star: result.s_star,
        q_star: result.q_star,
        exponent: match result.exponent {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        },
        n: rows.iter().map(|r| r.n).collect(),
        p_e: rows.iter().map(|r| r.p_e).collect(),
        bound: rows.iter().map(|r| r.bound_value).collect(),
        bound_holds: rows.iter().all(|r| r.holds),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub verdict: bool,
    pub plus_orth_phi: f64,
    pub minus_orth_eta: f64,
    pub psi_min_eigenvalue: f64,
    /// `F_{1/2}(η, φ) - (η(1) - (η-φ)_+(1))`.
    pub gap_at_half: f64,
    /// Largest `|gap|` over `s ∈ {0.1, ..., 0.9}`.
    pub max_gap: f64,
    pub scale: f64,
}

pub fn equality_certificate(eta: Qubit, phi: Qubit) -> Result<Certificate> {
    let tol = TolerancePolicy::default();
    let (e, p) = (eta.functional()?, phi.functional()?);
    let cert = certify_equality(&e, &p, &tol)?;
    let pair = PairAnalysis::new(&e, &p, &tol)?;
    let gap_at_half = pair.main(0.5)?.gap;
    let mut max_gap: f64 = 0.0;
    for k in 1..=9 {
        max_gap = max_gap.max(pair.main(k as f64 / 10.0)?.gap.abs());
    }
    Ok(Certificate {
        verdict: cert.verdict,
        plus_orth_phi: cert.plus_orth_phi,
        minus_orth_eta: cert.minus_orth_eta,
        psi_min_eigenvalue: cert.psi_min_eigenvalue,
        gap_at_half,
        max_gap,
        scale: cert.scale,
    })
}
