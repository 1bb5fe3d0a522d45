//! Fractional powers through the resolvent integral
//!
//! ```text
//! t^s = (sin sπ / π) ∫_0^∞ λ^{s-1} t (t + λ)^{-1} dλ,    0 < s < 1,
//! ```
//!
//! lifted to matrices with `R(λ) = H (H + λ)^{-1}` obtained from LU solves.
//! No eigendecomposition enters the value, which makes this an independent
//! check on the spectral path.
//!
//! After `λ = e^u` the integrand is `e^{su} R(e^u)`. The window is
//! `[ln(floor·‖H‖_F) - margin, ln‖H‖_F + margin]`; outside it `R` is
//! replaced by its leading behaviour, giving the closed-form tails
//! `R(e^L) e^{sL} / s` and `R(e^U) e^{sU} / (1 - s)`. The window itself is
//! covered by composite Gauss-Legendre panels whose number doubles until
//! successive results agree to the target.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::NormalFunctional;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, HermitianMatrix, PsdSpectrum, TolerancePolicy};
use crate::standard_form::SpectralPair;

/// Smallest and largest `s` the oracle accepts.
pub const S_MIN: f64 = 0.02;
pub const S_MAX: f64 = 0.98;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub target_rel_error: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
    /// Gauss-Legendre points per panel.
    pub order: usize,
    /// Extra room in `u` on both sides of the spectral window.
    pub window_margin: f64,
    /// Smallest eigenvalue resolved, relative to `‖H‖_F`.
    pub floor: f64,
    /// Condition number on the support above which a warning is attached.
    pub warn_condition: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            target_rel_error: 1e-8,
            initial_panels: 32,
            max_panels: 4096,
            order: 8,
            window_margin: 30.0,
            floor: 1e-10,
            warn_condition: 1e8,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_rel_error > 0.0) {
            return Err(Error::input("target_rel_error must be positive"));
        }
        if self.initial_panels == 0 || self.max_panels < self.initial_panels {
            return Err(Error::input("need 0 < initial_panels <= max_panels"));
        }
        if self.order < 2 {
            return Err(Error::input("quadrature order must be at least 2"));
        }
        if !(self.window_margin > 0.0) || !(self.floor > 0.0 && self.floor < 1.0) {
            return Err(Error::input("window_margin > 0 and floor in (0, 1) required"));
        }
        Ok(())
    }
}

/// One fractional power computed by the oracle.
#[derive(Debug, Clone)]
pub struct FracPower {
    pub s: f64,
    pub value: HermitianMatrix,
    /// Relative Frobenius change at the last doubling.
    pub error_estimate: f64,
    /// Error estimate after each doubling, first entry at `initial_panels * 2`.
    pub history: Vec<f64>,
    pub panels: usize,
    pub conditioning_warning: Option<String>,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, via Newton on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn check_s(s: f64) -> Result<()> {
    if !(S_MIN..=S_MAX).contains(&s) {
        return Err(Error::domain(format!("oracle needs s in [{S_MIN}, {S_MAX}], got {s}")));
    }
    Ok(())
}

/// `H (H + λ)^{-1}` by an LU solve of `(H + λ) X = H`.
fn resolvent(h: &CMatrix, lambda: f64) -> Result<CMatrix> {
    let n = h.nrows();
    let shifted = h + DMatrix::<Complex64>::identity(n, n) * Complex64::new(lambda, 0.0);
    shifted
        .lu()
        .solve(h)
        .ok_or_else(|| Error::Convergence(format!("singular shifted matrix at λ = {lambda:e}")))
}

/// `H^s` for PSD `H` and `s ∈ [0.02, 0.98]`.
pub fn frac_power_integral(h: &HermitianMatrix, s: f64, cfg: &QuadratureConfig) -> Result<FracPower> {
    Ok(frac_powers_integral(h, &[s], cfg)?.pop().expect("one exponent in, one out"))
}

/// Several powers of one matrix; resolvents do not depend on `s` and are shared.
pub fn frac_powers_integral(h: &HermitianMatrix, exponents: &[f64], cfg: &QuadratureConfig) -> Result<Vec<FracPower>> {
    cfg.validate()?;
    for &s in exponents {
        check_s(s)?;
    }
    // validation and diagnostics only; the value never touches these eigenvalues
    let spec = PsdSpectrum::new(h, &TolerancePolicy::default())?;
    let warning = conditioning_warning(&spec, cfg.warn_condition);

    let n = h.dim();
    let norm = h.frobenius_norm();
    if norm == 0.0 {
        return Ok(exponents
            .iter()
            .map(|&s| FracPower {
                s,
                value: HermitianMatrix::zeros(n),
                error_estimate: 0.0,
                history: Vec::new(),
                panels: 0,
                conditioning_warning: warning.clone(),
            })
            .collect());
    }

    let lo = (cfg.floor * norm).ln() - cfg.window_margin;
    let hi = norm.ln() + cfg.window_margin;
    let hm = h.as_matrix();
    let (gx, gw) = gauss_legendre(cfg.order);

    let r_lo = resolvent(hm, lo.exp())?;
    let r_hi = resolvent(hm, hi.exp())?;
    let tails: Vec<CMatrix> = exponents
        .iter()
        .map(|&s| &r_lo * Complex64::new((s * lo).exp() / s, 0.0) + &r_hi * Complex64::new((s * hi).exp() / (1.0 - s), 0.0))
        .collect();

    let integrate = |panels: usize| -> Result<Vec<CMatrix>> {
        let width = (hi - lo) / panels as f64;
        let mut sums: Vec<CMatrix> = tails.clone();
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * width;
            for (x, w) in gx.iter().zip(&gw) {
                let u = mid + 0.5 * width * x;
                let r = resolvent(hm, u.exp())?;
                for (sum, &s) in sums.iter_mut().zip(exponents) {
                    *sum += &r * Complex64::new(0.5 * width * w * (s * u).exp(), 0.0);
                }
            }
        }
        Ok(sums)
    };

    let mut panels = cfg.initial_panels;
    let mut prev = integrate(panels)?;
    let mut history = Vec::new();
    loop {
        if panels * 2 > cfg.max_panels {
            let worst = history.last().copied().unwrap_or(f64::INFINITY);
            return Err(Error::Convergence(format!(
                "quadrature error {worst:e} above {:e} at {panels} panels",
                cfg.target_rel_error
            )));
        }
        panels *= 2;
        let next = integrate(panels)?;
        let errors: Vec<f64> = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| {
                let size = b.norm();
                if size > 0.0 {
                    (a - b).norm() / size
                } else {
                    (a - b).norm()
                }
            })
            .collect();
        let worst = errors.iter().copied().fold(0.0, f64::max);
        history.push(worst);
        if worst <= cfg.target_rel_error {
            return Ok(exponents
                .iter()
                .zip(next)
                .zip(errors)
                .map(|((&s, m), err)| {
                    let c = (s * std::f64::consts::PI).sin() / std::f64::consts::PI;
                    let sym = (&m + m.adjoint()) * Complex64::new(0.5 * c, 0.0);
                    FracPower {
                        s,
                        value: HermitianMatrix::from_matrix_unchecked(sym),
                        error_estimate: err,
                        history: history.clone(),
                        panels,
                        conditioning_warning: warning.clone(),
                    }
                })
                .collect());
        }
        prev = next;
    }
}

fn conditioning_warning(spec: &PsdSpectrum, limit: f64) -> Option<String> {
    let support: Vec<f64> = spec.support_pairs().map(|(v, _)| v).collect();
    let (min, max) = support.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if support.is_empty() || max / min <= limit {
        None
    } else {
        Some(format!("condition number on support {:.3e} exceeds {limit:.0e}", max / min))
    }
}

/// `Tr D_η^s D_φ^{1-s}` with both powers taken from the integral.
///
/// The integral reproduces `t^s` for every eigenvalue it is handed, so
/// kernels must be exact for the result to match the support convention.
pub fn overlap_integral(eta: &NormalFunctional, phi: &NormalFunctional, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if eta.algebra() != phi.algebra() {
        return Err(Error::input("functionals live on different algebras"));
    }
    check_s(s)?;
    let mut total = 0.0;
    for (de, dp) in eta.densities().iter().zip(phi.densities()) {
        let a = frac_power_integral(de, s, cfg)?;
        let b = frac_power_integral(dp, 1.0 - s, cfg)?;
        total += (a.value.as_matrix() * b.value.as_matrix()).trace().re;
    }
    Ok(total)
}

/// `g(λ) = ⟨Δ_{φ,η} (Δ_{φ,η} + λ)^{-1} ξ_η, ξ_η⟩`.
pub fn resolvent_form(phi: &NormalFunctional, eta: &NormalFunctional, lambda: f64, tol: &TolerancePolicy) -> Result<f64> {
    let pair = SpectralPair::new(&phi.spectra(tol)?, &eta.spectra(tol)?);
    Ok(pair.resolvent_form(lambda))
}

#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub lambda: f64,
    /// `f_n(λ) = λ^{s-1} (g_n(λ) - g(λ))`.
    pub integrand: f64,
    /// `λ^{s-1} η(1)`.
    pub small_lambda_bound: f64,
    /// `λ^{s-2} (φ(1) + φ_n(1))`.
    pub large_lambda_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
    pub pass: bool,
}

/// Absolute slack on the pointwise integrand bounds.
pub const BOUNDS_SLACK: f64 = 1e-12;

/// Pointwise check of both dominating functions of the continuity integrand.
pub fn integrand_bounds_check(
    eta: &NormalFunctional,
    phi_n: &NormalFunctional,
    phi: &NormalFunctional,
    s: f64,
    lambdas: &[f64],
    tol: &TolerancePolicy,
) -> Result<BoundsReport> {
    if eta.algebra() != phi.algebra() || phi_n.algebra() != phi.algebra() {
        return Err(Error::input("functionals live on different algebras"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::input(format!("s = {s} outside (0, 1)")));
    }
    let eta_spec = eta.spectra(tol)?;
    let g_n = SpectralPair::new(&phi_n.spectra(tol)?, &eta_spec);
    let g = SpectralPair::new(&phi.spectra(tol)?, &eta_spec);
    let masses = phi.mass() + phi_n.mass();
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::input(format!("λ = {lambda} must be positive and finite")));
        }
        let integrand = lambda.powf(s - 1.0) * (g_n.resolvent_form(lambda) - g.resolvent_form(lambda));
        let small_lambda_bound = lambda.powf(s - 1.0) * eta.mass();
        let large_lambda_bound = lambda.powf(s - 2.0) * masses;
        let pass = integrand.abs() <= small_lambda_bound.min(large_lambda_bound) + BOUNDS_SLACK;
        rows.push(BoundsRow { lambda, integrand, small_lambda_bound, large_lambda_bound, pass });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(BoundsReport { rows, pass })
}

/// `count` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}
