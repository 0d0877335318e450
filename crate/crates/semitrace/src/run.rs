use crate::config::{Experiment, ExperimentConfig, FlowSpec, KappaSpec, Reference, ScalarKind, ScalarSpec};
use crate::error::{at, HarnessError, Result};
use crate::report::{Row, Slope, SlopeVerdict, TraceReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use semitrace_core::dynamics::{find_closed_orbit, HamiltonianSystem, OrbitOptions, Oscillator, SectionSpec, Well1d};
use semitrace_core::linalg::RMat;
use semitrace_core::numerics::Polynomial;
use semitrace_core::spectra::{
    model_spectrum, spectral_trace, weyl_invariance_residual, BumpPiece, Diffeo1d, Domain, EnergyWindow, Grid1d, ModelKind,
    SpectralModel, Symbol, TestFunction, WeylOptions,
};
use semitrace_core::symplectic::QuadraticPhase;
use semitrace_core::trace::{
    bohr_sommerfeld_eigenvalues, fio_trace_quadrature, fio_trace_sp, gutzwiller_sum, isolate_period, monodromy_trace_integral,
    poisson_both_sides, FioGrid, ScalarMonodromy,
};
use semitrace_core::Complex;
use std::f64::consts::TAU;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Both sides at one `h`; `scale` normalizes the relative error.
struct Sample {
    lhs: Complex,
    rhs: Complex,
    scale: f64,
}

type Evaluator = Box<dyn Fn(f64) -> Result<Sample> + Send + Sync>;

pub fn run_experiment(config: &ExperimentConfig) -> Result<TraceReport> {
    run_experiment_with(config, Execution::Parallel)
}

/// Runs every `h` of the config and assembles the rows in config order.
pub fn run_experiment_with(config: &ExperimentConfig, execution: Execution) -> Result<TraceReport> {
    config.validate()?;
    let eval = prepare(config)?;
    let one = |&h: &f64| -> Result<(Row, f64)> {
        let start = Instant::now();
        let s = eval(h)?;
        let abs_err = (s.lhs - s.rhs).norm();
        let rel_err = if s.scale > 0.0 { abs_err / s.scale } else { abs_err };
        let row = Row {
            h,
            lhs: [s.lhs.re, s.lhs.im],
            rhs: [s.rhs.re, s.rhs.im],
            abs_err,
            rel_err,
            runtime_s: start.elapsed().as_secs_f64(),
        };
        Ok((row, s.scale))
    };
    let results: Vec<(Row, f64)> = match execution {
        Execution::Serial => config.h.iter().map(one).collect::<Result<_>>()?,
        Execution::Parallel => config.h.par_iter().map(one).collect::<Result<_>>()?,
    };
    let tol = &config.tolerance;
    let rows_pass = results.iter().all(|(r, scale)| r.abs_err <= tol.abs + tol.rel * scale);
    let rows: Vec<Row> = results.into_iter().map(|(r, _)| r).collect();
    let slope = if config.experiment.is_exact() {
        None
    } else {
        Slope::fit(&rows.iter().map(|r| r.h).collect::<Vec<_>>(), &rows.iter().map(|r| r.rel_err).collect::<Vec<_>>())
    };
    let pass = rows_pass && Slope::verdict(slope.as_ref(), tol) != SlopeVerdict::Outside;
    Ok(TraceReport { config_hash: config.hash(), seed: config.seed, experiment: config.experiment, rows, slope, pass })
}

/// [`run_experiment`] after checking that the `h` values support a fit.
pub fn convergence_study(config: &ExperimentConfig) -> Result<TraceReport> {
    config.validate_study()?;
    run_experiment(config)
}

/// Rough serial runtime in seconds, for budget warnings.
pub fn estimate_seconds(config: &ExperimentConfig) -> f64 {
    let per_h = |h: f64| -> f64 {
        match config.experiment {
            Experiment::FioTrace => config.fio.as_ref().and_then(|f| phase(f).ok().map(|phi| (f, phi))).map_or(0.0, |(f, phi)| {
                let points = f.points.unwrap_or_else(|| FioGrid::resolving(&phi, h, f.half_width).points) as f64;
                points.powi(2 * phi.n() as i32) * 3e-8
            }),
            Experiment::Gutzwiller => config.gutzwiller.as_ref().map_or(0.0, |g| (g.truncation_scale / h).powi(2) * 5e-8),
            Experiment::Bohr => config.bohr.as_ref().map_or(0.0, |b| (b.truncation as f64).powi(3) * 2e-9),
            Experiment::WeylCheck => config.weyl.as_ref().map_or(0.0, |w| {
                let n = Grid1d::resolving(w.grid[0], w.grid[1], h, w.xi_max * w.grid_xi_factor, w.points_per_wavelength).n as f64;
                n * n * (w.xi_nodes * w.xi_panels) as f64 * 4e-8
            }),
            _ => 0.0,
        }
    };
    config.h.iter().map(|&h| per_h(h)).sum()
}

pub fn budget_warnings(config: &ExperimentConfig) -> Vec<String> {
    let estimate = estimate_seconds(config);
    if estimate > config.tolerance.budget_s {
        vec![format!("estimated runtime {estimate:.0} s exceeds the budget of {} s", config.tolerance.budget_s)]
    } else {
        vec![]
    }
}

fn test_function(config: &ExperimentConfig) -> Result<TestFunction> {
    let pieces = config
        .test_function
        .iter()
        .map(|p| BumpPiece { center: p.center, half_width: p.half_width, amplitude: Complex::new(p.amplitude[0], p.amplitude[1]) })
        .collect();
    TestFunction::new(pieces).map_err(at("test_function"))
}

fn window(config: &ExperimentConfig) -> Result<EnergyWindow> {
    let w = config.window.ok_or_else(|| HarnessError::config("window", "missing".into()))?;
    EnergyWindow::new(w.lo, w.hi, w.rolloff).map_err(at("window"))
}

fn orbit_options(flow: &FlowSpec, repetitions: i32) -> OrbitOptions {
    OrbitOptions {
        flow_tol: flow.flow_tol,
        orbit_tol: flow.orbit_tol,
        max_newton: flow.max_newton,
        samples: flow.samples,
        repetitions,
        ..OrbitOptions::default()
    }
}

fn matrix(rows: &[Vec<f64>], path: &str) -> Result<RMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(HarnessError::config(path, "must be a non-empty square matrix".into()));
    }
    Ok(RMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn phase(f: &crate::config::FioSpec) -> Result<QuadraticPhase> {
    QuadraticPhase::new(matrix(&f.alpha, "fio.alpha")?, matrix(&f.beta, "fio.beta")?, matrix(&f.gamma, "fio.gamma")?, f.value0)
        .map_err(at("fio"))
}

fn scalar_monodromy(s: &ScalarSpec, h: f64) -> Result<ScalarMonodromy> {
    let m = match s.model {
        ScalarKind::Circle => ScalarMonodromy::circle(h),
        ScalarKind::Well => ScalarMonodromy::well(Polynomial::new(s.potential.clone()), h),
    };
    Ok(m.map_err(at("scalar"))?.with_strip_constant(s.strip_constant))
}

fn prepare(config: &ExperimentConfig) -> Result<Evaluator> {
    let c = config.clone();
    match config.experiment {
        Experiment::Poisson => {
            let f = test_function(config)?;
            Ok(Box::new(move |h| {
                let s = poisson_both_sides(&f, h, c.n).map_err(at("test_function"))?;
                Ok(Sample { lhs: s.lhs, rhs: s.rhs, scale: s.lhs.norm() })
            }))
        }
        Experiment::Gutzwiller => prepare_gutzwiller(c),
        Experiment::Bohr => prepare_bohr(c),
        Experiment::MonodromyIntegral => {
            let f = test_function(config)?;
            let chi = window(config)?;
            let scalar = c.scalar.clone().expect("validated");
            let m = c.monodromy.expect("validated");
            Ok(Box::new(move |h| {
                let mono = scalar_monodromy(&scalar, h)?;
                let r = monodromy_trace_integral(&mono, &f, &chi, m.k, m.z0).map_err(at("monodromy"))?;
                Ok(Sample { lhs: r.lhs, rhs: r.rhs, scale: r.lhs.norm() })
            }))
        }
        Experiment::FioTrace => {
            let spec = c.fio.clone().expect("validated");
            let phi = phase(&spec)?;
            let s2 = spec.amplitude_width2;
            Ok(Box::new(move |h| {
                let grid = match spec.points {
                    Some(points) => FioGrid { half_width: spec.half_width, points },
                    None => FioGrid::resolving(&phi, h, spec.half_width),
                };
                let amplitude = |x: &[f64], eta: &[f64]| {
                    let r2: f64 = x.iter().chain(eta).map(|v| v * v).sum();
                    Complex::new((-r2 / (2.0 * s2)).exp(), 0.0)
                };
                let quad = fio_trace_quadrature(&phi, amplitude, h, &grid).map_err(at("fio"))?;
                let sp = fio_trace_sp(&phi, Complex::new(1.0, 0.0), h).map_err(at("fio"))?;
                Ok(Sample { lhs: quad, rhs: sp, scale: quad.norm() })
            }))
        }
        Experiment::WeylCheck => {
            let w = c.weyl.clone().expect("validated");
            let (xw2, xs) = (w.x_width2, w.xi_scale);
            let symbol = Symbol::new(w.xi_max, move |x, xi| (-(x * x) / xw2 - (xi / xs) * (xi / xs)).exp());
            let kappa = match w.kappa {
                KappaSpec::BumpShift { eps, centre, width } => Diffeo1d::bump_shift(eps, centre, width),
                KappaSpec::Affine { scale, shift } => Diffeo1d::affine(scale, shift),
            };
            let opts = WeylOptions {
                points_per_wavelength: w.points_per_wavelength,
                kernel_width: w.kernel_width,
                xi_nodes: w.xi_nodes,
                xi_panels: w.xi_panels,
            };
            Ok(Box::new(move |h| {
                let grid = Grid1d::resolving(w.grid[0], w.grid[1], h, w.xi_max * w.grid_xi_factor, w.points_per_wavelength);
                let r = weyl_invariance_residual(&symbol, &kappa, h, &grid, &opts).map_err(at("weyl"))?;
                // the symbol has sup 1, so the residual is already relative
                Ok(Sample { lhs: Complex::new(r, 0.0), rhs: Complex::new(0.0, 0.0), scale: 1.0 })
            }))
        }
        Experiment::Orbit => prepare_orbit(c),
    }
}

fn prepare_gutzwiller(c: ExperimentConfig) -> Result<Evaluator> {
    let g = c.gutzwiller.clone().expect("validated");
    let flow = c.flow.expect("validated");
    let f = test_function(&c)?;
    let chi = window(&c)?;
    let sys = HamiltonianSystem::new("oscillator", Oscillator { omega: g.omega.to_vec() }).map_err(at("gutzwiller.omega"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let guess: Vec<f64> = g.guess.iter().map(|&v| v + g.jitter * rng.random_range(-1.0..=1.0)).collect();
    let section = SectionSpec::new(&sys, guess.clone(), g.section_normal.clone()).map_err(at("gutzwiller.section_normal"))?;
    let orbit = find_closed_orbit(&sys, g.energy, &guess, &section, &orbit_options(&flow, c.n)).map_err(at("gutzwiller.guess"))?;

    // primitive periods of the other normal modes
    let t = orbit.period();
    let mut periods: Vec<f64> = g.omega.iter().map(|w| TAU / w).collect();
    let own = periods.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map(|(i, _)| i).unwrap_or(0);
    periods.remove(own);
    isolate_period(&f, t, &periods, c.n, g.isolation_margin).map_err(at("test_function"))?;

    Ok(Box::new(move |h| {
        let model = SpectralModel {
            kind: ModelKind::Oscillator2d { omega: g.omega },
            h,
            truncation: (g.truncation_scale / h).ceil() as usize,
            energy_max: g.energy_max,
        };
        let spectrum = model_spectrum(&model).map_err(at("gutzwiller.truncation_scale"))?;
        let lhs = spectral_trace(&spectrum, &f, &chi, h, orbit.energy()).map_err(at("gutzwiller.energy_max"))?.value;
        let rhs = gutzwiller_sum(&orbit, &f, &chi, h, c.n).map_err(at("gutzwiller"))?.value;
        Ok(Sample { lhs, rhs, scale: lhs.norm() })
    }))
}

fn prepare_bohr(c: ExperimentConfig) -> Result<Evaluator> {
    let s = c.scalar.clone().expect("validated");
    let b = c.bohr.clone().expect("validated");
    let potential = Polynomial::new(s.potential.clone());
    Ok(Box::new(move |h| {
        let mono = scalar_monodromy(&s, h)?;
        let roots = bohr_sommerfeld_eigenvalues(&mono, b.lo, b.hi).map_err(at("bohr"))?;
        if roots.is_empty() {
            return Err(HarnessError::config("bohr", format!("no levels in [{}, {}] at h = {h}", b.lo, b.hi)));
        }
        let nearest: Box<dyn Fn(f64) -> f64> = match b.reference {
            Reference::Numerical => {
                let model = SpectralModel {
                    kind: ModelKind::Schrodinger1d { potential: potential.clone(), domain: Domain::Confining },
                    h,
                    truncation: b.truncation,
                    energy_max: b.hi + b.energy_margin,
                };
                let exact = model_spectrum(&model).map_err(at("bohr.truncation"))?.values().to_vec();
                Box::new(move |e| exact.iter().copied().min_by(|x, y| (x - e).abs().total_cmp(&(y - e).abs())).unwrap_or(f64::NAN))
            }
            Reference::Analytic => {
                let coeff = |i: usize| potential.coeffs().get(i).copied().unwrap_or(0.0);
                let (c0, c1, c2) = (coeff(0), coeff(1), coeff(2));
                let (bottom, quantum) = (c0 - c1 * c1 / (4.0 * c2), h * c2.sqrt());
                Box::new(move |e| {
                    let n = ((e - bottom) / (2.0 * quantum) - 0.5).round().max(0.0);
                    bottom + quantum * (2.0 * n + 1.0)
                })
            }
        };
        let (reference, root) = roots
            .iter()
            .map(|&e| (nearest(e), e))
            .max_by(|a, b| (a.0 - a.1).abs().total_cmp(&(b.0 - b.1).abs()))
            .expect("non-empty");
        Ok(Sample { lhs: Complex::new(reference, 0.0), rhs: Complex::new(root, 0.0), scale: reference.abs() })
    }))
}

/// `dI/dz` by central differences of step `h` against the period.
fn prepare_orbit(c: ExperimentConfig) -> Result<Evaluator> {
    let o = c.orbit.clone().expect("validated");
    let flow = c.flow.expect("validated");
    let sys = HamiltonianSystem::new("well", Well1d { potential: Polynomial::new(o.potential.clone()) }).map_err(at("orbit.potential"))?;
    let opts = orbit_options(&flow, 1);
    let solve = move |z: f64| {
        // outer turning point on the positive axis
        let v = Polynomial::new(o.potential.clone());
        let x = semitrace_core::numerics::find_root(|x| v.eval(x) - z, 0.0, 1e3, 1e-14)
            .ok_or_else(|| HarnessError::config("orbit.energy", format!("no turning point for z = {z} on (0, 1000)")))?;
        let base = vec![x, 0.0];
        let section = SectionSpec::new(&sys, base.clone(), vec![0.0, 1.0]).map_err(at("orbit"))?;
        find_closed_orbit(&sys, z, &base, &section, &opts).map_err(at("flow"))
    };
    let centre = solve(o.energy)?;
    Ok(Box::new(move |h| {
        let didz = (solve(o.energy + h)?.action() - solve(o.energy - h)?.action()) / (2.0 * h);
        let t = centre.period();
        Ok(Sample { lhs: Complex::new(didz, 0.0), rhs: Complex::new(t, 0.0), scale: t })
    }))
}
