use modineq_web::demo::{chernoff_curve, equality_certificate, overlap_sweep, Qubit};

fn q(mass: f64, r: [f64; 3]) -> Qubit {
    Qubit::new(mass, r).unwrap()
}

/// Eigenvalues of `(m/2)(1 + r·σ)`.
fn eig(x: Qubit) -> [f64; 2] {
    let len = x.bloch.iter().map(|c| c * c).sum::<f64>().sqrt();
    [0.5 * x.mass * (1.0 + len), 0.5 * x.mass * (1.0 - len)]
}

#[test]
fn commuting_sweep_matches_power_sums() {
    let (eta, phi) = (q(1.0, [0.0, 0.0, 0.4]), q(1.5, [0.0, 0.0, -0.2]));
    let out = overlap_sweep(eta, phi, 11).unwrap();
    let (a, b) = (eig(eta), eig(phi));
    // z-diagonal: eta = diag(a0, a1), phi = diag(b1, b0) in eigen order
    let (d_eta, d_phi) = ([a[0], a[1]], [b[1], b[0]]);
    for (s, f) in out.s.iter().zip(&out.overlap) {
        let want: f64 = d_eta.iter().zip(&d_phi).map(|(x, y)| x.powf(*s) * y.powf(1.0 - s)).sum();
        assert!((f - want).abs() < 1e-14);
    }
    let min: f64 = d_eta.iter().zip(&d_phi).map(|(x, y)| x.min(*y)).sum();
    assert!((out.main_lower - min).abs() < 1e-14);
    assert!(out.all_pass);
    assert!(out.overlap.iter().all(|f| *f >= out.main_lower - 1e-12));
    assert!(out.main_lower >= out.corollary_lower - 1e-12);
}

#[test]
fn pure_state_sweep_is_flat() {
    // for pure states F_s = |<u, v>|^2 for every s in (0, 1)
    let (eta, phi) = (q(1.0, [0.0, 0.0, 1.0]), q(1.0, [1.0, 0.0, 0.0]));
    let out = overlap_sweep(eta, phi, 5).unwrap();
    for f in &out.overlap[1..4] {
        assert!((f - 0.5).abs() < 1e-12);
    }
}

#[test]
fn chernoff_curve_for_classical_qubits() {
    let (rho, sigma) = (q(1.0, [0.0, 0.0, 0.6]), q(1.0, [0.0, 0.0, -0.4]));
    let out = chernoff_curve(rho, sigma, 0.5, 6, 101).unwrap();
    let (p, r): ([f64; 2], [f64; 2]) = ([0.8, 0.2], [0.3, 0.7]);
    let qf = |s: f64| p.iter().zip(&r).map(|(a, b)| a.powf(s) * b.powf(1.0 - s)).sum::<f64>();
    let brute = (0..=100_000).map(|i| qf(i as f64 * 1e-5)).fold(f64::INFINITY, f64::min);
    assert!((out.q_star - brute).abs() < 1e-12);
    assert!((out.exponent.unwrap() + brute.ln()).abs() < 1e-10);
    for (s, v) in out.s.iter().zip(&out.q) {
        assert!((v - qf(*s)).abs() < 1e-14);
        assert!(*v >= out.q_star - 1e-14);
    }
    assert_eq!(out.n, (1..=6).collect::<Vec<_>>());
    assert!(out.bound_holds);
    assert!((out.p_e[0] - 0.5 * (0.3 + 0.2)).abs() < 1e-14);
}

#[test]
fn orthogonal_states_have_infinite_exponent() {
    let out = chernoff_curve(q(1.0, [0.0, 0.0, 1.0]), q(1.0, [0.0, 0.0, -1.0]), 0.3, 3, 11).unwrap();
    assert!(out.exponent.is_none());
    assert!(out.p_e.iter().all(|p| *p < 1e-15));
}

#[test]
fn chernoff_rejects_bad_arguments() {
    let x = q(1.0, [0.0; 3]);
    assert!(chernoff_curve(x, x, 0.0, 3, 11).is_err());
    assert!(chernoff_curve(x, x, 0.5, 0, 11).is_err());
    assert!(chernoff_curve(x, x, 0.5, 3, 1).is_err());
    assert!(chernoff_curve(q(2.0, [0.0; 3]), x, 0.5, 3, 11).is_err());
}

#[test]
fn certificate_separates_equality_from_generic_pairs() {
    // orthogonal supports: (eta - phi)_+ = eta is orthogonal to phi
    let c = equality_certificate(q(0.7, [0.0, 0.0, 1.0]), q(1.3, [0.0, 0.0, -1.0])).unwrap();
    assert!(c.verdict);
    assert!(c.max_gap <= 1e-12 * c.scale);
    // eta <= phi but not tight: F_{1/2} = 0.5^{1/2} against eta(1) = 0.5
    let c = equality_certificate(q(0.5, [0.0, 0.0, 1.0]), q(2.0, [0.0, 0.0, 0.0])).unwrap();
    assert!(!c.verdict);
    assert!((c.gap_at_half - (0.5f64.sqrt() - 0.5)).abs() < 1e-14);
    let c = equality_certificate(q(1.0, [0.3, 0.1, 0.2]), q(1.0, [-0.2, 0.4, 0.0])).unwrap();
    assert!(!c.verdict);
    assert!(c.gap_at_half > 1e-6);
}
