use semitrace_core::dynamics::{find_closed_orbit, HamiltonianSystem, OrbitOptions, Oscillator, SectionSpec};
use semitrace_core::numerics::Polynomial;
use semitrace_core::spectra::{
    model_spectrum, spectral_trace, BumpPiece, Domain, EnergyWindow, ModelKind, SpectralModel, TestFunction,
};
use semitrace_core::symplectic::QuadraticPhase;
use semitrace_core::trace::{
    bohr_sommerfeld_eigenvalues, fio_trace_quadrature, fio_trace_sp, gutzwiller_sum, isolate_period, monodromy_trace_integral,
    poisson_both_sides, scalar_monodromy, FioGrid, ScalarMonodromy,
};
use semitrace_core::{Complex, Error};
use std::f64::consts::{PI, SQRT_2, TAU};

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn piece(center: f64, half_width: f64, amplitude: Complex) -> BumpPiece {
    BumpPiece { center, half_width, amplitude }
}

fn poisson_battery() -> Vec<(TestFunction, i32)> {
    vec![
        (TestFunction::bump(TAU, 0.5).unwrap(), 2),
        (TestFunction::new(vec![piece(1.75, 1.25, c(1.0, 0.0))]).unwrap(), 2),
        (TestFunction::symmetric_pair(TAU, 0.8, c(0.7, -0.4)).unwrap(), 2),
        (TestFunction::new(vec![piece(-2.0 * TAU + 0.4, 1.0, c(0.0, 2.0))]).unwrap(), 3),
        (TestFunction::new(vec![piece(TAU + 0.3, 0.6, c(1.0, 1.0)), piece(-3.0 * TAU, 0.5, c(-0.5, 0.0))]).unwrap(), 4),
    ]
}

#[test]
fn poisson_sides_agree_termwise() {
    for (f, n) in poisson_battery() {
        for &h in &[0.1, 0.037] {
            let sides = poisson_both_sides(&f, h, n).unwrap();
            assert!((sides.lhs - sides.rhs).norm() <= 1e-8 * (1.0 + sides.lhs.norm()), "{:?} vs {:?}", sides.lhs, sides.rhs);
            for &(k, term) in &sides.terms {
                let exact = f.fhat(-TAU * (k + 1) as f64);
                assert!((term - exact).norm() <= 1e-8, "k = {k}: {term} vs {exact}");
            }
        }
    }
}

#[test]
fn poisson_examples() {
    let f = TestFunction::bump(TAU, 0.5).unwrap();
    let s = poisson_both_sides(&f, 0.1, 2).unwrap();
    assert!((s.lhs - 1.0).norm() < 1e-8 && (s.rhs - 1.0).norm() < 1e-8);

    let empty = TestFunction::new(vec![piece(1.75, 1.25, c(1.0, 0.0))]).unwrap();
    let s = poisson_both_sides(&empty, 0.1, 2).unwrap();
    assert!(s.lhs.norm() <= 1e-8 && s.rhs.norm() <= 1e-8);

    let real = TestFunction::symmetric_pair(TAU, 0.5, c(0.3, 0.9)).unwrap();
    let s = poisson_both_sides(&real, 0.1, 2).unwrap();
    assert!(s.lhs.im.abs() <= 1e-9 && s.rhs.im.abs() <= 1e-9);

    let wide = TestFunction::bump(3.5 * PI, 0.5).unwrap();
    assert!(matches!(poisson_both_sides(&wide, 0.1, 1), Err(Error::SupportViolation(_))));
}

#[test]
fn circle_monodromy_is_unitary_and_decays_off_axis() {
    let h = 0.05;
    let m = ScalarMonodromy::circle(h).unwrap();
    for &x in &[-0.7, 0.0, 0.31, 2.2] {
        assert!((scalar_monodromy(&m, c(x, 0.0)).unwrap().norm() - 1.0).abs() < 1e-12);
        for &y in &[0.01, 0.05, 0.1, -0.08] {
            let v = scalar_monodromy(&m, c(x, y)).unwrap();
            assert!((v.norm().ln() + TAU * y / h).abs() < 1e-6);
        }
    }
}

#[test]
fn well_monodromy_is_unitary() {
    let m = ScalarMonodromy::well(Polynomial::new(vec![0.0, 0.0, 1.0]), 0.05).unwrap();
    for &z in &[0.1, 0.77, 3.0] {
        assert!((scalar_monodromy(&m, c(z, 0.0)).unwrap().norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn harmonic_bohr_sommerfeld_is_exact() {
    let h = 0.05;
    let m = ScalarMonodromy::well(Polynomial::new(vec![0.0, 0.0, 1.0]), h).unwrap();
    let roots = bohr_sommerfeld_eigenvalues(&m, 0.0, 2.0 * h * 10.0).unwrap();
    assert_eq!(roots.len(), 10);
    for (n, e) in roots.iter().enumerate() {
        assert!((e - 2.0 * h * (n as f64 + 0.5)).abs() < 1e-10, "level {n}: {e}");
    }
    assert!(bohr_sommerfeld_eigenvalues(&m, -1.0, 0.9 * h).unwrap().is_empty());
}

fn quartic_errors(h: f64) -> f64 {
    let v = Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
    let (lo, hi) = (0.5, 2.0);
    let mono = ScalarMonodromy::well(v.clone(), h).unwrap();
    let bs = bohr_sommerfeld_eigenvalues(&mono, lo, hi).unwrap();
    let model = SpectralModel {
        kind: ModelKind::Schrodinger1d { potential: v, domain: Domain::Confining },
        h,
        truncation: 512,
        energy_max: hi + 0.5,
    };
    let exact = model_spectrum(&model).unwrap();
    bs.iter()
        .map(|e| exact.values().iter().map(|x| (x - e).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[test]
fn quartic_bohr_sommerfeld_error_is_second_order() {
    let coarse = quartic_errors(0.05);
    let fine = quartic_errors(0.025);
    let ratio = coarse / fine;
    assert!((ratio - 4.0).abs() <= 1.0, "errors {coarse:e} {fine:e} ratio {ratio}");
}

#[test]
fn bohr_sommerfeld_count_matches_action_growth() {
    let h = 0.03;
    let v = Polynomial::new(vec![0.0, 0.3, 1.0, 0.0, 0.5]);
    let m = ScalarMonodromy::well(v, h).unwrap();
    let (lo, hi) = (0.4, 2.5);
    let roots = bohr_sommerfeld_eigenvalues(&m, lo, hi).unwrap();
    let expected = ((m.action(hi).unwrap() - m.action(lo).unwrap()) / (TAU * h)).floor();
    assert!((roots.len() as f64 - expected).abs() <= 1.0);
    assert!(roots.windows(2).all(|w| w[1] > w[0]));
}

fn oscillator_orbit() -> semitrace_core::dynamics::ClosedOrbit {
    let sys = HamiltonianSystem::new("oscillator", Oscillator { omega: vec![1.0, SQRT_2] }).unwrap();
    let section = SectionSpec::new(&sys, vec![SQRT_2, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    find_closed_orbit(&sys, 1.0, &[1.4, 0.0, 0.02, 0.0], &section, &OrbitOptions::default()).unwrap()
}

#[test]
fn gutzwiller_sum_symmetries() {
    let orbit = oscillator_orbit();
    let chi = EnergyWindow::new(0.5, 1.5, 0.3).unwrap();
    let away = TestFunction::bump(3.0 * PI, 0.5).unwrap();
    assert!(gutzwiller_sum(&orbit, &away, &chi, 0.01, 2).unwrap().value.norm() < 1e-15);

    let real = TestFunction::symmetric_pair(TAU + 0.2, 0.8, c(0.6, 0.3)).unwrap();
    let sum = gutzwiller_sum(&orbit, &real, &chi, 0.01, 2).unwrap();
    assert!(sum.value.im.abs() <= 1e-9 * (1.0 + sum.value.norm()));
    for t in &sum.terms {
        let mirror = sum.terms.iter().find(|u| u.k == -t.k).unwrap();
        assert!((t.value - mirror.value.conj()).norm() <= 1e-12);
    }
}

#[test]
fn gutzwiller_refuses_degenerate_and_colliding_inputs() {
    let sys = HamiltonianSystem::new("isotropic", Oscillator { omega: vec![1.0, 1.0] }).unwrap();
    let section = SectionSpec::new(&sys, vec![SQRT_2, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let orbit = find_closed_orbit(&sys, 1.0, &[SQRT_2, 0.0, 0.0, 0.0], &section, &OrbitOptions::default()).unwrap();
    let f = TestFunction::bump(TAU, 0.5).unwrap();
    let chi = EnergyWindow::new(0.5, 1.5, 0.3).unwrap();
    assert!(matches!(gutzwiller_sum(&orbit, &f, &chi, 0.01, 2), Err(Error::DegenerateOrbit(ks)) if ks.len() == 4));

    let t2 = TAU / SQRT_2;
    let wide = TestFunction::bump(TAU, 2.0).unwrap();
    assert!(matches!(isolate_period(&wide, TAU, &[t2], 3, 0.05), Err(Error::SupportViolation(_))));
    let narrow = TestFunction::bump(TAU, 1.0).unwrap();
    assert_eq!(isolate_period(&narrow, TAU, &[t2], 3, 0.05).unwrap(), vec![-1]);
}

#[test]
fn gutzwiller_matches_exact_oscillator_trace() {
    let orbit = oscillator_orbit();
    let f = TestFunction::bump(TAU + 0.3, 1.0).unwrap();
    let chi = EnergyWindow::new(0.5, 0.9, 0.4).unwrap();
    let h = 0.02;
    let model = SpectralModel { kind: ModelKind::Oscillator2d { omega: [1.0, SQRT_2] }, h, truncation: 120, energy_max: 1.4 };
    let lhs = spectral_trace(&model_spectrum(&model).unwrap(), &f, &chi, h, 1.0).unwrap().value;
    let rhs = gutzwiller_sum(&orbit, &f, &chi, h, 2).unwrap().value;
    let rel = (lhs - rhs).norm() / lhs.norm();
    assert!(rel <= 0.5, "{lhs} vs {rhs}: {rel}");
}

fn sample_phase() -> QuadraticPhase {
    // φ = xη + x² + η²
    QuadraticPhase::scalar(2.0, 1.0, 2.0, 0.0).unwrap()
}

const AMPLITUDE_WIDTH2: f64 = 0.49;

fn amplitude(x: &[f64], eta: &[f64]) -> Complex {
    c((-(x[0] * x[0] + eta[0] * eta[0]) / (2.0 * AMPLITUDE_WIDTH2)).exp(), 0.0)
}

/// Gaussian integral in closed form: with `Φ = ½wᵀAw` the trace is
/// `Π_j (h/s² − i a_j)^{−1/2}` over the eigenvalues `a_j` of `A`.
fn gaussian_trace(alpha: f64, beta: f64, gamma: f64, h: f64) -> Complex {
    let (tr, det) = (alpha + gamma, alpha * gamma - (beta - 1.0) * (beta - 1.0));
    let disc = (tr * tr / 4.0 - det).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
        .iter()
        .fold(c(1.0, 0.0), |acc, &a| acc / c(h / AMPLITUDE_WIDTH2, -a).sqrt())
}

#[test]
fn fio_quadrature_matches_gaussian_closed_form() {
    for &(a, b, g) in &[(2.0, 1.0, 2.0), (-1.5, 0.7, -2.0), (0.5, 0.8, -1.0)] {
        let phi = QuadraticPhase::scalar(a, b, g, 0.0).unwrap();
        let h = 0.2;
        let quad = fio_trace_quadrature(&phi, amplitude, h, &FioGrid::resolving(&phi, h, 5.3)).unwrap();
        let exact = gaussian_trace(a, b, g, h);
        assert!((quad - exact).norm() <= 1e-10, "{quad} vs {exact}");
    }
}

#[test]
fn fio_stationary_phase_is_leading_term() {
    let phi = sample_phase();
    let h = 0.1;
    let grid = FioGrid::resolving(&phi, h, 5.3);
    let quad = fio_trace_quadrature(&phi, amplitude, h, &grid).unwrap();
    let sp = fio_trace_sp(&phi, c(1.0, 0.0), h).unwrap();
    // i^{s/2} with s = 2
    assert!((sp - c(0.0, 0.5)).norm() < 1e-14);
    assert!((quad - sp).norm() / quad.norm() <= 1.5 * h, "{quad} vs {sp}");

    assert_eq!(fio_trace_sp(&phi, c(0.0, 0.0), h).unwrap(), c(0.0, 0.0));
    let shifted = fio_trace_sp(&phi.with_value0(0.37), c(1.0, 0.0), h).unwrap();
    assert!((shifted - sp * Complex::from_polar(1.0, 0.37 / h)).norm() < 1e-14);
    assert!(matches!(
        fio_trace_quadrature(&phi, amplitude, h, &FioGrid { points: grid.points / 2, ..grid }),
        Err(Error::UnresolvedOscillation { .. })
    ));
    let wide = |x: &[f64], eta: &[f64]| c((-(x[0] * x[0] + eta[0] * eta[0]) / 2.0).exp(), 0.0);
    assert!(matches!(fio_trace_quadrature(&phi, wide, h, &grid), Err(Error::SupportViolation(_))));
    assert!(fio_trace_quadrature(&phi, |_, _| c(0.0, 0.0), h, &grid).unwrap().norm() == 0.0);
}

fn circle_integral_error(h: f64, f: &TestFunction, chi: &EnergyWindow, k: i32) -> (Complex, Complex) {
    let m = ScalarMonodromy::circle(h).unwrap();
    let r = monodromy_trace_integral(&m, f, chi, k, 1.0).unwrap();
    (r.lhs, r.rhs)
}

#[test]
fn monodromy_integral_converges_linearly() {
    let f = TestFunction::bump(-TAU - 0.3, 1.0).unwrap();
    let chi = EnergyWindow::new(0.5, 0.9, 0.4).unwrap();
    let errs: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&h| {
            let (l, r) = circle_integral_error(h, &f, &chi, 1);
            (l - r).norm() / l.norm().max(r.norm())
        })
        .collect();
    let ratio = errs[0] / errs[1];
    assert!((ratio - 2.0).abs() <= 0.6, "{errs:?}");
}

#[test]
fn monodromy_integral_phase_and_vanishing_leading_term() {
    let chi = EnergyWindow::new(0.5, 0.9, 0.4).unwrap();
    let h = 0.05;
    let m = ScalarMonodromy::circle(h).unwrap();
    // repetitions k and 2k pick f̂ at −kT: compare the predicted phases
    let f1 = TestFunction::bump(-TAU, 1.0).unwrap();
    let f2 = TestFunction::bump(-2.0 * TAU, 1.0).unwrap();
    let z0 = 0.7;
    let r1 = monodromy_trace_integral(&m, &f1, &chi, 1, z0).unwrap();
    let r2 = monodromy_trace_integral(&m, &f2, &chi, 2, z0).unwrap();
    let predicted = Complex::from_polar(1.0, m.action(z0).unwrap() / h);
    assert!(((r2.lhs / r1.lhs) / predicted - 1.0).norm() < 1e-6);

    // f̂ vanishes at −T: the leading term is zero and the remainder O(h)
    let off = TestFunction::bump(-TAU + 1.5, 1.0).unwrap();
    let r = monodromy_trace_integral(&m, &off, &chi, 1, 1.0).unwrap();
    assert_eq!(r.rhs, c(0.0, 0.0));
    assert!(r.lhs.norm() <= 10.0 * h, "{}", r.lhs);
}
