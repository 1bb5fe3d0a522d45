//! Symmetric binary hypothesis testing between two states.
//!
//! With priors `p`, `1 - p` and `n` copies, the optimal Bayes error is
//! `P_e(n) = ½ (A(1) + B(1) - ‖A - B‖_1)` for `A = p ρ^{⊗n}`,
//! `B = (1-p) σ^{⊗n}`. The corollary applied to `A`, `B` gives
//! `P_e(n) <= p^s (1-p)^{1-s} Q(s)^n` with `Q(s) = Tr ρ^s σ^{1-s}`, hence the
//! Chernoff exponent `-log min_s Q(s)`.

use serde::{Deserialize, Serialize};

use crate::algebra::NormalFunctional;
use crate::error::{Error, Result};
use crate::numerics::{trace_norm, TolerancePolicy};
use crate::standard_form::{overlap_f, Overlap};

/// Default cap on the acting dimension of `ρ^{⊗n}`.
pub const DEFAULT_DIM_CAP: usize = 1024;

/// Masses must equal one within this.
pub const STATE_MASS_TOL: f64 = 1e-10;

/// Points of the coarse grid in [`minimize_q`].
pub const COARSE_GRID: usize = 101;

/// Final bracket width of the golden-section refinement.
pub const GOLDEN_WIDTH: f64 = 1e-8;

/// Below this `q*` counts as zero and the exponent is infinite.
pub const Q_ZERO: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct TestingInstance {
    pub rho: NormalFunctional,
    pub sigma: NormalFunctional,
    pub prior: f64,
}

impl TestingInstance {
    pub fn new(rho: NormalFunctional, sigma: NormalFunctional, prior: f64) -> Result<Self> {
        if rho.algebra() != sigma.algebra() {
            return Err(Error::input("ρ and σ live on different algebras"));
        }
        check_state(&rho, "ρ")?;
        check_state(&sigma, "σ")?;
        if !(prior > 0.0 && prior < 1.0) {
            return Err(Error::input(format!("prior must lie in (0, 1), got {prior}")));
        }
        Ok(Self { rho, sigma, prior })
    }
}

fn check_state(f: &NormalFunctional, name: &str) -> Result<()> {
    if (f.mass() - 1.0).abs() > STATE_MASS_TOL {
        return Err(Error::input(format!("{name} has mass {} instead of 1", f.mass())));
    }
    Ok(())
}

/// An error exponent; `Infinite` when the error vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// `-ln q`, infinite for `q < 1e-300`.
    pub fn from_probability(q: f64) -> Self {
        if q < Q_ZERO {
            Exponent::Infinite
        } else {
            Exponent::Finite(-q.ln())
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffResult {
    pub s_star: f64,
    pub q_star: f64,
    pub exponent: Exponent,
}

/// `Q(s) = Tr ρ^s σ^{1-s}`.
pub fn chernoff_q(rho: &NormalFunctional, sigma: &NormalFunctional, s: f64, tol: &TolerancePolicy) -> Result<f64> {
    overlap_f(rho, sigma, s, tol)
}

/// Coarse grid followed by golden-section search on the bracketing cell.
pub fn minimize_q(rho: &NormalFunctional, sigma: &NormalFunctional, tol: &TolerancePolicy) -> Result<ChernoffResult> {
    if rho.algebra() != sigma.algebra() {
        return Err(Error::input("ρ and σ live on different algebras"));
    }
    check_state(rho, "ρ")?;
    check_state(sigma, "σ")?;
    let q = Overlap::new(rho, sigma, tol)?;
    let last = COARSE_GRID - 1;
    let grid: Vec<f64> = (0..COARSE_GRID).map(|i| i as f64 / last as f64).collect();
    let values = grid.iter().map(|&s| q.value(s)).collect::<Result<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");

    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(last)]);
    let (mut s_star, mut q_star) = (grid[best], values[best]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = q.value(c)?;
    let mut fd = q.value(d)?;
    while b - a > GOLDEN_WIDTH {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = q.value(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = q.value(d)?;
        }
    }
    for (s, v) in [(c, fc), (d, fd)] {
        if v < q_star {
            s_star = s;
            q_star = v;
        }
    }
    Ok(ChernoffResult { s_star, q_star, exponent: Exponent::from_probability(q_star) })
}

/// `P_e(n) = ½ (A(1) + B(1) - ‖A - B‖_1)`.
///
/// Diagonal inputs are first split into one-dimensional blocks so that the
/// tensor power stays block diagonal.
pub fn bayes_error(instance: &TestingInstance, n: usize, cap: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::input("number of copies must be at least 1"));
    }
    let (rho, sigma) = if instance.rho.is_diagonal() && instance.sigma.is_diagonal() {
        (instance.rho.split_diagonal()?, instance.sigma.split_diagonal()?)
    } else {
        (instance.rho.clone(), instance.sigma.clone())
    };
    let p = instance.prior;
    let a = rho.tensor_power(n, cap)?.scale(p)?;
    let b = sigma.tensor_power(n, cap)?.scale(1.0 - p)?;
    let diff = a.difference(&b)?;
    let mut norm = 0.0;
    for d in diff.densities() {
        norm += trace_norm(d)?;
    }
    Ok(0.5 * (a.mass() + b.mass() - norm))
}

/// `p^s (1-p)^{1-s} Q(s)^n`.
pub fn error_bound(prior: f64, s: f64, q: f64, n: usize) -> f64 {
    prior.powf(s) * (1.0 - prior).powf(1.0 - s) * q.powi(n as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub p_e: f64,
    /// `-(1/n) ln P_e(n)`.
    pub empirical: Exponent,
    /// `-ln q* - (1/n) ln(p^{s*} (1-p)^{1-s*})`.
    pub bound: Exponent,
    /// `p^{s*} (1-p)^{1-s*} (q*)^n`.
    pub bound_value: f64,
    /// `P_e(n) <= bound_value` within slack.
    pub holds: bool,
}

/// Relative and absolute slack on `P_e(n) <= bound_value`.
pub const BOUND_REL_SLACK: f64 = 1e-10;
pub const BOUND_ABS_SLACK: f64 = 1e-12;

/// One row per `n = 1..=n_max` comparing `P_e(n)` with the Chernoff bound at `s*`.
pub fn exponent_convergence(
    instance: &TestingInstance,
    n_max: usize,
    cap: usize,
    tol: &TolerancePolicy,
) -> Result<(ChernoffResult, Vec<ConvergenceRow>)> {
    let result = minimize_q(&instance.rho, &instance.sigma, tol)?;
    let p = instance.prior;
    let prior_factor = p.powf(result.s_star) * (1.0 - p).powf(1.0 - result.s_star);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let p_e = bayes_error(instance, n, cap)?;
        let nf = n as f64;
        let empirical = match Exponent::from_probability(p_e) {
            Exponent::Finite(v) => Exponent::Finite(v / nf),
            Exponent::Infinite => Exponent::Infinite,
        };
        let bound = match result.exponent {
            Exponent::Finite(v) => Exponent::Finite(v - prior_factor.ln() / nf),
            Exponent::Infinite => Exponent::Infinite,
        };
        let bound_value = error_bound(p, result.s_star, result.q_star, n);
        let holds = p_e <= bound_value * (1.0 + BOUND_REL_SLACK) + BOUND_ABS_SLACK;
        rows.push(ConvergenceRow { n, p_e, empirical, bound, bound_value, holds });
    }
    Ok((result, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::numerics::HermitianMatrix;
    use crate::rng::{random_functional, CounterRng, RankMode};

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn diag(values: &[f64]) -> NormalFunctional {
        NormalFunctional::from_density(HermitianMatrix::diagonal(values).unwrap(), &tol()).unwrap()
    }

    fn state(rng: &mut CounterRng, n: usize) -> NormalFunctional {
        let f = random_functional(rng, &Algebra::new(vec![n]).unwrap(), RankMode::Faithful);
        f.scale(1.0 / f.mass()).unwrap()
    }

    #[test]
    fn q_examples() {
        let t = tol();
        let mut rng = CounterRng::new(1);
        let rho = state(&mut rng, 3);
        for s in [0.0, 0.3, 1.0] {
            assert!((chernoff_q(&rho, &rho, s, &t).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(chernoff_q(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), 0.5, &t).unwrap(), 0.0);
        let expect = 0.3f64.sqrt() + 0.2f64.sqrt();
        assert!((chernoff_q(&diag(&[0.6, 0.4]), &diag(&[0.5, 0.5]), 0.5, &t).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn q_is_log_convex_and_bounded() {
        let t = tol();
        let mut rng = CounterRng::new(2);
        let rho = state(&mut rng, 3);
        let sigma = state(&mut rng, 3);
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let q: Vec<f64> = grid.iter().map(|&s| chernoff_q(&rho, &sigma, s, &t).unwrap()).collect();
        assert!(q.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        for w in q.windows(3) {
            assert!(w[1].ln() <= 0.5 * (w[0].ln() + w[2].ln()) + 1e-12);
        }
    }

    #[test]
    fn minimize_examples() {
        let t = tol();
        let mut rng = CounterRng::new(3);
        let rho = state(&mut rng, 2);
        let r = minimize_q(&rho, &rho, &t).unwrap();
        assert!(r.exponent.finite().unwrap().abs() < 1e-12);
        let r = minimize_q(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), &t).unwrap();
        assert!(r.exponent.is_infinite());

        // scalar brute force on a 1e-4 grid for Σ p_i^s q_i^{1-s}
        let (p, q) = ([0.6, 0.4], [0.5, 0.5]);
        let brute = (0..=10_000)
            .map(|i| {
                let s = i as f64 * 1e-4;
                p.iter().zip(&q).map(|(a, b): (&f64, &f64)| a.powf(s) * b.powf(1.0 - s)).sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let r = minimize_q(&diag(&p), &diag(&q), &t).unwrap();
        assert!(r.q_star <= brute + 1e-15);
        assert!((r.q_star - brute).abs() <= 1e-8 * brute);
    }

    #[test]
    fn minimizer_beats_grid() {
        let t = tol();
        let mut rng = CounterRng::new(4);
        let rho = state(&mut rng, 3);
        let sigma = state(&mut rng, 3);
        let r = minimize_q(&rho, &sigma, &t).unwrap();
        for i in 0..=100 {
            let v = chernoff_q(&rho, &sigma, i as f64 / 100.0, &t).unwrap();
            assert!(v >= r.q_star - 1e-9);
        }
    }

    #[test]
    fn bayes_error_examples() {
        let mut rng = CounterRng::new(5);
        let rho = state(&mut rng, 2);
        let inst = TestingInstance::new(rho.clone(), rho, 0.3).unwrap();
        assert!((bayes_error(&inst, 2, DEFAULT_DIM_CAP).unwrap() - 0.3).abs() < 1e-12);

        let inst = TestingInstance::new(diag(&[1.0, 0.0]), diag(&[0.0, 1.0]), 0.5).unwrap();
        assert!(bayes_error(&inst, 1, DEFAULT_DIM_CAP).unwrap().abs() < 1e-15);

        // exhaustive 8-outcome computation for three copies
        let inst = TestingInstance::new(diag(&[0.6, 0.4]), diag(&[0.5, 0.5]), 0.5).unwrap();
        let mut expect = 0.0;
        for mask in 0..8u32 {
            let k = mask.count_ones() as i32;
            let a = 0.5 * 0.6f64.powi(3 - k) * 0.4f64.powi(k);
            let b = 0.5 * 0.125;
            expect += a.min(b);
        }
        assert!((bayes_error(&inst, 3, DEFAULT_DIM_CAP).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn bayes_error_respects_cap() {
        let mut rng = CounterRng::new(6);
        let rho = state(&mut rng, 4);
        let sigma = state(&mut rng, 4);
        let inst = TestingInstance::new(rho, sigma, 0.5).unwrap();
        assert!(matches!(bayes_error(&inst, 6, DEFAULT_DIM_CAP), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn convergence_rows_respect_bound() {
        let t = tol();
        let mut rng = CounterRng::new(7);
        let inst = TestingInstance::new(state(&mut rng, 2), state(&mut rng, 2), 0.5).unwrap();
        let (res, rows) = exponent_convergence(&inst, 6, DEFAULT_DIM_CAP, &t).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert!(row.holds, "{row:?}");
            assert!(row.p_e >= -1e-15 && row.p_e <= 0.5 + 1e-12);
            let emp = row.empirical.finite().unwrap();
            let bound = row.bound.finite().unwrap();
            assert!(emp >= bound - 1e-9);
            assert!(bound >= res.exponent.finite().unwrap());
        }

        let rho = state(&mut rng, 2);
        let inst = TestingInstance::new(rho.clone(), rho, 0.5).unwrap();
        let (_, rows) = exponent_convergence(&inst, 3, DEFAULT_DIM_CAP, &t).unwrap();
        for row in rows {
            // P_e = 1/2 and the bound is 1/2 too
            assert!((row.empirical.finite().unwrap() - 2f64.ln() / row.n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn instance_validation() {
        assert!(TestingInstance::new(diag(&[0.5, 0.4]), diag(&[0.5, 0.5]), 0.5).is_err());
        assert!(TestingInstance::new(diag(&[0.5, 0.5]), diag(&[0.5, 0.5]), 1.0).is_err());
    }

    #[test]
    fn exponent_serializes_with_tag() {
        let inf = serde_json::to_string(&Exponent::Infinite).unwrap();
        assert_eq!(inf, r#"{"kind":"infinite"}"#);
        let fin = serde_json::to_string(&Exponent::Finite(0.5)).unwrap();
        assert_eq!(fin, r#"{"kind":"finite","value":0.5}"#);
    }
}
