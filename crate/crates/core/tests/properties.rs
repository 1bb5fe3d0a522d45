use proptest::prelude::*;

use modineq::algebra::{Algebra, NormalFunctional};
use modineq::chernoff::{bayes_error, TestingInstance, DEFAULT_DIM_CAP};
use modineq::inequalities::{chain_gaps, verify_corollary, verify_main};
use modineq::numerics::{pseudo_power, HermitianMatrix, TolerancePolicy};
use modineq::oracle::{frac_power_integral, QuadratureConfig};
use modineq::rng::{random_functional, random_psd_with_condition, CounterRng, RankMode};
use modineq::standard_form::{overlap_f, Overlap};

fn blocks() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

fn mode() -> impl Strategy<Value = RankMode> {
    prop_oneof![Just(RankMode::Faithful), Just(RankMode::Deficient)]
}

fn pair(seed: u64, blocks: &[usize], m: RankMode) -> (NormalFunctional, NormalFunctional) {
    let alg = Algebra::new(blocks.to_vec()).unwrap();
    let mut rng = CounterRng::new(seed);
    (random_functional(&mut rng, &alg, m), random_functional(&mut rng, &alg, m))
}

fn scale(a: &NormalFunctional, b: &NormalFunctional) -> f64 {
    a.mass().max(b.mass()).max(1.0)
}

fn diag_state(v: &[f64]) -> NormalFunctional {
    NormalFunctional::from_density(HermitianMatrix::diagonal(v).unwrap(), &TolerancePolicy::default()).unwrap()
}

fn probability(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|v| {
        let t: f64 = v.iter().sum();
        v.into_iter().map(|x| x / t).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn main_and_corollary_hold(seed in any::<u64>(), b in blocks(), m in mode(), s in 0.01f64..0.99) {
        let tol = TolerancePolicy::default();
        let (eta, phi) = pair(seed, &b, m);
        prop_assert!(verify_main(&eta, &phi, s, &tol).unwrap().pass);
        prop_assert!(verify_corollary(&eta, &phi, s, &tol).unwrap().pass);
    }

    #[test]
    fn chain_pieces_sum_to_main_gap(seed in any::<u64>(), b in blocks(), m in mode(), s in 0.05f64..0.95) {
        let tol = TolerancePolicy::default();
        let (eta, phi) = pair(seed, &b, m);
        let c = chain_gaps(&eta, &phi, s, &tol).unwrap();
        let main = verify_main(&eta, &phi, s, &tol).unwrap();
        let sc = scale(&eta, &phi);
        prop_assert!((c.first + c.second + c.third - c.total).abs() <= 1e-10 * sc);
        prop_assert!((c.total - main.gap).abs() <= 1e-10 * sc);
        for piece in [c.first, c.second, c.third] {
            prop_assert!(piece >= -1e-9 * sc);
        }
    }

    #[test]
    fn swapping_arguments_reflects_s(seed in any::<u64>(), b in blocks(), m in mode(), s in 0.0f64..=1.0) {
        let tol = TolerancePolicy::default();
        let (eta, phi) = pair(seed, &b, m);
        let fwd = overlap_f(&eta, &phi, s, &tol).unwrap();
        let bwd = overlap_f(&phi, &eta, 1.0 - s, &tol).unwrap();
        prop_assert!((fwd - bwd).abs() <= 1e-12 * scale(&eta, &phi));
    }

    #[test]
    fn both_routes_agree(seed in any::<u64>(), b in blocks(), m in mode(), s in 0.05f64..0.95) {
        let tol = TolerancePolicy::default();
        let (eta, phi) = pair(seed, &b, m);
        let ov = Overlap::new(&eta, &phi, &tol).unwrap();
        let d = ov.value(s).unwrap() - ov.value_via_delta(s).unwrap();
        prop_assert!(d.abs() <= 1e-10 * scale(&eta, &phi));
    }

    #[test]
    fn overlap_scales_homogeneously(seed in any::<u64>(), b in blocks(), s in 0.05f64..0.95, e in 1e-3f64..1e3) {
        let tol = TolerancePolicy::default();
        let (eta, phi) = pair(seed, &b, RankMode::Faithful);
        let base = overlap_f(&eta, &phi, s, &tol).unwrap();
        let left = overlap_f(&eta.scale(e).unwrap(), &phi, s, &tol).unwrap();
        let right = overlap_f(&eta, &phi.scale(e).unwrap(), s, &tol).unwrap();
        prop_assert!((left - e.powf(s) * base).abs() <= 1e-11 * left.abs().max(1e-300));
        prop_assert!((right - e.powf(1.0 - s) * base).abs() <= 1e-11 * right.abs().max(1e-300));
    }

    #[test]
    fn overlap_is_multiplicative_on_tensors(seed in any::<u64>(), s in 0.05f64..0.95) {
        let tol = TolerancePolicy::default();
        let (e1, p1) = pair(seed, &[2], RankMode::Faithful);
        let (e2, p2) = pair(seed ^ 0x5a5a, &[1, 2], RankMode::Deficient);
        let joint = overlap_f(&e1.tensor(&e2).unwrap(), &p1.tensor(&p2).unwrap(), s, &tol).unwrap();
        let split = overlap_f(&e1, &p1, s, &tol).unwrap() * overlap_f(&e2, &p2, s, &tol).unwrap();
        prop_assert!((joint - split).abs() <= 1e-11 * split.abs().max(1.0));
    }

    #[test]
    fn commuting_overlap_is_a_power_sum(p in probability(4), q in probability(4), s in 0.0f64..=1.0) {
        let tol = TolerancePolicy::default();
        let got = overlap_f(&diag_state(&p), &diag_state(&q), s, &tol).unwrap();
        let want: f64 = p.iter().zip(&q).map(|(a, b)| a.powf(s) * b.powf(1.0 - s)).sum();
        prop_assert!((got - want).abs() <= 1e-13);
    }

    #[test]
    fn classical_bayes_error_matches_outcome_strings(
        p in probability(3), q in probability(3), prior in 0.05f64..0.95, n in 1usize..=4,
    ) {
        let inst = TestingInstance::new(diag_state(&p), diag_state(&q), prior).unwrap();
        let got = bayes_error(&inst, n, DEFAULT_DIM_CAP).unwrap();
        // enumerate all 3^n outcome strings and take the smaller weighted likelihood
        let mut want = 0.0;
        for code in 0..3usize.pow(n as u32) {
            let (mut lp, mut lq, mut c) = (prior, 1.0 - prior, code);
            for _ in 0..n {
                lp *= p[c % 3];
                lq *= q[c % 3];
                c /= 3;
            }
            want += lp.min(lq);
        }
        prop_assert!((got - want).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_matches_spectral_power(seed in any::<u64>(), n in 1usize..=6, log_cond in 0.0f64..5.0, s in 0.05f64..0.95) {
        let mut rng = CounterRng::new(seed);
        let h = random_psd_with_condition(&mut rng, n, 10f64.powf(log_cond));
        let tol = TolerancePolicy::default();
        let quad = frac_power_integral(&h, s, &QuadratureConfig::default()).unwrap();
        let exact = pseudo_power(&h, s.into(), &tol).unwrap();
        let rel = (quad.value.as_matrix() - &exact).norm() / exact.norm();
        prop_assert!(rel <= 1e-8, "relative error {rel}");
    }
}
