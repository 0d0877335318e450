use proptest::prelude::*;
use semitrace_core::dynamics::{
    check_nondegeneracy, find_closed_orbit, integrate_flow, orbit_action, Anharmonic2d, HamiltonianSystem, OrbitOptions, Oscillator,
    SectionSpec, Well1d,
};
use semitrace_core::numerics::Polynomial;
use semitrace_core::symplectic::symplectic_residual;
use std::f64::consts::{PI, SQRT_2, TAU};

fn oscillator() -> HamiltonianSystem {
    HamiltonianSystem::new("oscillator", Oscillator { omega: vec![1.0, SQRT_2] }).unwrap()
}

fn x1_mode(sys: &HamiltonianSystem, guess: &[f64]) -> semitrace_core::dynamics::ClosedOrbit {
    let base = vec![SQRT_2, 0.0, 0.0, 0.0];
    let section = SectionSpec::new(sys, base, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    find_closed_orbit(sys, 1.0, guess, &section, &OrbitOptions::default()).unwrap()
}

#[test]
fn oscillator_normal_mode_matches_closed_form() {
    let sys = oscillator();
    let orbit = x1_mode(&sys, &[SQRT_2, 0.0, 0.0, 0.0]);
    assert_eq!(orbit.newton_steps(), 0);
    assert!((orbit.period() - TAU).abs() < 1e-9, "T = {}", orbit.period());
    // ∮ξ dx = 2π z / ω₁
    assert!((orbit.action() - TAU).abs() < 1e-9);
    assert!((orbit_action(&orbit) - orbit.action()).abs() < 1e-14);
    assert!(orbit.residual() <= 1e-9);

    // transverse motion is the x₂ oscillator over one period of x₁
    let theta = TAU * SQRT_2;
    let dc = orbit.reduced_monodromy();
    assert_eq!(dc.dim(), 2);
    assert!((dc.matrix().trace() - 2.0 * theta.cos()).abs() < 1e-8);
    for k in 1..=3 {
        let expected = 4.0 * (k as f64 * theta / 2.0).sin().powi(2);
        assert!((dc.fixed_point_determinant(k) - expected).abs() < 1e-7);
        assert!((dc.fixed_point_determinant(-k) - expected).abs() < 1e-7);
    }
    assert_eq!(orbit.turning_points(), 2);
}

#[test]
fn oscillator_normal_mode_maslov_indices() {
    let sys = oscillator();
    let orbit = x1_mode(&sys, &[SQRT_2, 0.0, 0.0, 0.0]);
    // the x₂ phase winds by 2π√2 per period: crossings of the rotation by −θ
    // through multiples of 2π give 2⌊kθ/2π⌋ + 1 in magnitude
    for k in 1..=3 {
        let winding = (k as f64 * SQRT_2).floor() as i32;
        assert_eq!(orbit.transversal_maslov(k), Some(-(2 * winding + 1)), "k = {k}");
        assert_eq!(orbit.transversal_maslov(-k), Some(2 * winding + 1), "k = {}", -k);
        assert_eq!(orbit.maslov(k), Some(-(2 * winding + 1) - 2 * k));
    }
}

#[test]
fn newton_recovers_mode_from_perturbed_guess() {
    let sys = oscillator();
    let orbit = x1_mode(&sys, &[1.3, 0.05, 0.02, -0.03]);
    assert!(orbit.newton_steps() > 0);
    assert!((orbit.period() - TAU).abs() < 1e-8);
    assert!((orbit.energy() - sys.energy(orbit.point())).abs() < 1e-9);
    assert!(orbit.point()[1].abs() < 1e-8 && orbit.point()[3].abs() < 1e-8);
}

#[test]
fn variational_samples_stay_symplectic() {
    let sys = HamiltonianSystem::new("anharmonic", Anharmonic2d { eps: 0.3 }).unwrap();
    let base = vec![1.0, 0.0, 0.0, 0.0];
    let z = sys.energy(&base);
    let section = SectionSpec::new(&sys, base.clone(), vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let opts = OrbitOptions::default();
    let orbit = find_closed_orbit(&sys, z, &base, &section, &opts).unwrap();
    assert!(orbit.symplectic_defect() <= 100.0 * opts.flow_tol * orbit.period());
    let drift = orbit.samples().iter().map(|s| (sys.energy(&s.point) - z).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-9, "energy drift {drift:e}");
}

#[test]
fn one_degree_of_freedom_orbit_has_empty_transversal_map() {
    let well = Well1d { potential: Polynomial::monomial(2, 1.0) };
    let sys = HamiltonianSystem::new("harmonic well", well).unwrap();
    let base = vec![1.0, 0.0];
    let section = SectionSpec::new(&sys, base.clone(), vec![0.0, 1.0]).unwrap();
    let orbit = find_closed_orbit(&sys, 1.0, &base, &section, &OrbitOptions::default()).unwrap();
    // p = ξ² + x² has period π and action π z
    assert!((orbit.period() - PI).abs() < 1e-9);
    assert!((orbit.action() - PI).abs() < 1e-9);
    assert_eq!(orbit.reduced_monodromy().dim(), 0);
    assert_eq!(orbit.maslov(1), Some(-2));
}

/// `I(z) = ∮ξ dx` of `ξ² + x⁴` in closed form: `I = c z^{3/4}` with
/// `c = 4 ∫₀¹ √(1 − u⁴) du = (8/3)·Γ(1/4)²/(4√(2π))`.
fn quartic_action(z: f64) -> f64 {
    let gamma_quarter = 3.625_609_908_221_908_3_f64;
    let c = 8.0 / 3.0 * gamma_quarter * gamma_quarter / (4.0 * (TAU).sqrt());
    c * z.powf(0.75)
}

#[test]
fn action_derivative_equals_period() {
    let sys = HamiltonianSystem::new("quartic", Well1d { potential: Polynomial::monomial(4, 1.0) }).unwrap();
    let solve = |z: f64| {
        let base = vec![z.powf(0.25), 0.0];
        let section = SectionSpec::new(&sys, base.clone(), vec![0.0, 1.0]).unwrap();
        find_closed_orbit(&sys, z, &base, &section, &OrbitOptions::default()).unwrap()
    };
    let z = 1.0;
    let centre = solve(z);
    assert!((centre.action() - quartic_action(z)).abs() < 1e-9);
    let mut deltas = Vec::new();
    let mut errors = Vec::new();
    for j in 0..3 {
        let d = 0.2 / 2f64.powi(j);
        let didz = (solve(z + d).action() - solve(z - d).action()) / (2.0 * d);
        deltas.push(d.ln());
        errors.push((didz - centre.period()).abs().ln());
    }
    let (slope, _, _) = semitrace_core::numerics::linear_fit(&deltas, &errors);
    assert!((slope - 2.0).abs() < 0.3, "slope {slope}");
}

#[test]
fn flow_composes_and_inverts() {
    let sys = HamiltonianSystem::new("anharmonic", Anharmonic2d { eps: 0.2 }).unwrap();
    let m = [0.4, -0.3, 0.2, 0.5];
    let (a, ma) = integrate_flow(&sys, &m, 0.7, 1e-12).unwrap();
    let (b, mb) = integrate_flow(&sys, &a, 0.9, 1e-12).unwrap();
    let (c, mc) = integrate_flow(&sys, &m, 1.6, 1e-12).unwrap();
    for i in 0..4 {
        assert!((b[i] - c[i]).abs() < 1e-9);
    }
    let chained = mb.matrix() * ma.matrix();
    assert!((chained - mc.matrix()).abs().max() < 1e-8);
    assert!(symplectic_residual(mc.matrix()) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fixed_point_determinants_do_not_depend_on_section(eps in 0.1f64..0.4, tilt in -0.4f64..0.4) {
        let sys = HamiltonianSystem::new("anharmonic", Anharmonic2d { eps }).unwrap();
        let base = vec![1.0, 0.0, 0.0, 0.0];
        let z = sys.energy(&base);
        let opts = OrbitOptions { repetitions: 1, ..OrbitOptions::default() };
        let a = SectionSpec::new(&sys, base.clone(), vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let first = find_closed_orbit(&sys, z, &base, &a, &opts).unwrap();
        // a tilted section through a later point of the same orbit
        let later = first.samples()[first.samples().len() / 3].point.clone();
        let v = sys.hamilton_field(&later);
        let normal: Vec<f64> = v.iter().enumerate().map(|(i, x)| x + if i == 0 { tilt } else { 0.0 }).collect();
        let b = SectionSpec::new(&sys, later.clone(), normal).unwrap();
        let second = find_closed_orbit(&sys, z, &later, &b, &opts).unwrap();
        prop_assert!((first.period() - second.period()).abs() < 1e-8);
        let ca = check_nondegeneracy(first.reduced_monodromy(), 3, 1e-6);
        let cb = check_nondegeneracy(second.reduced_monodromy(), 3, 1e-6);
        for (x, y) in ca.iter().zip(&cb) {
            prop_assert_eq!(x.k, y.k);
            prop_assert!((x.determinant.abs() - y.determinant.abs()).abs() <= 1e-6, "{} vs {}", x.determinant, y.determinant);
        }
    }
}
