use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::{SQRT_2, TAU};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Poisson,
    Gutzwiller,
    Bohr,
    FioTrace,
    WeylCheck,
    Orbit,
    MonodromyIntegral,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Poisson,
        Experiment::Gutzwiller,
        Experiment::Bohr,
        Experiment::FioTrace,
        Experiment::WeylCheck,
        Experiment::Orbit,
        Experiment::MonodromyIntegral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Poisson => "poisson",
            Experiment::Gutzwiller => "gutzwiller",
            Experiment::Bohr => "bohr",
            Experiment::FioTrace => "fio-trace",
            Experiment::WeylCheck => "weyl-check",
            Experiment::Orbit => "orbit",
            Experiment::MonodromyIntegral => "monodromy-integral",
        }
    }

    /// Both sides agree to quadrature accuracy, so no convergence rate exists.
    pub fn is_exact(self) -> bool {
        self == Experiment::Poisson
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    PlotData,
}

/// Everything one run depends on. Tables that the chosen experiment does not
/// read are left out of the defaults and ignored when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Semiclassical parameters, strictly decreasing. The orbit experiment
    /// reads them as finite-difference steps in the energy.
    pub h: Vec<f64>,
    /// Repetition bound `N`.
    pub n: i32,
    pub seed: u64,
    pub tolerance: Tolerance,
    pub output: Output,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gutzwiller: Option<GutzwillerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<ScalarSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bohr: Option<BohrSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<MonodromySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fio: Option<FioSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weyl: Option<WeylSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSpec>,
    /// Pieces `a · bump((t − c)/δ)` of `f̂`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_function: Vec<PieceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    /// A row passes when `abs_err ≤ abs + rel · scale`.
    pub abs: f64,
    pub rel: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<SlopeTarget>,
    /// Fits with a lower R² are inconclusive rather than failing.
    pub r2_min: f64,
    /// Estimated runtimes above this many seconds trigger a warning.
    pub budget_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeTarget {
    pub value: f64,
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
    pub plot_data: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub center: f64,
    pub half_width: f64,
    /// Complex amplitude as `[re, im]`.
    pub amplitude: [f64; 2],
}

/// Smooth energy cutoff: 1 on `[lo, hi]`, 0 beyond a rolloff of `rolloff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lo: f64,
    pub hi: f64,
    pub rolloff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GutzwillerSpec {
    /// Frequencies of `p = Σ ωⱼ(ξⱼ² + xⱼ²)/2`.
    pub omega: [f64; 2],
    pub energy: f64,
    /// Newton starting point `(x₁, x₂, ξ₁, ξ₂)`, also the base of the section.
    pub guess: Vec<f64>,
    /// Uniform seeded perturbation added to the guess.
    pub jitter: f64,
    pub section_normal: Vec<f64>,
    /// Quantum numbers per mode run up to `truncation_scale / h`.
    pub truncation_scale: f64,
    pub energy_max: f64,
    /// Other periods must stay this fraction of the orbit period away from `supp f̂`.
    pub isolation_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarKind {
    Circle,
    Well,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarSpec {
    pub model: ScalarKind,
    /// Ascending coefficients of `V` for `p = ξ² + V(x)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub potential: Vec<f64>,
    /// `L` in the strip `|Im z| ≤ L h log(1/h)`.
    pub strip_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Eigenvalues of the discretized Schrödinger operator.
    Numerical,
    /// `V_min + h√c (2n + 1)` for a quadratic `V` with leading coefficient `c`.
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohrSpec {
    pub lo: f64,
    pub hi: f64,
    pub reference: Reference,
    pub truncation: usize,
    /// The reference spectrum is resolved up to `hi + energy_margin`.
    pub energy_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonodromySpec {
    pub k: i32,
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FioSpec {
    /// Blocks of the quadratic phase `½xᵀαx + xᵀβη + ½ηᵀγη + value0`.
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    pub value0: f64,
    /// `s²` in the amplitude `exp(−|(x, η)|²/2s²)`.
    pub amplitude_width2: f64,
    pub half_width: f64,
    /// Grid points per axis; the smallest resolving grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KappaSpec {
    /// `x + eps · bump((x − centre)/width)`.
    BumpShift { eps: f64, centre: f64, width: f64 },
    Affine { scale: f64, shift: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylSpec {
    /// Symbol `exp(−x²/x_width2 − (ξ/xi_scale)²)`, cut off at `|ξ| = xi_max`.
    pub x_width2: f64,
    pub xi_scale: f64,
    pub xi_max: f64,
    pub grid: [f64; 2],
    /// The grid resolves momenta up to `xi_max · grid_xi_factor`.
    pub grid_xi_factor: f64,
    pub points_per_wavelength: f64,
    pub kernel_width: f64,
    pub xi_nodes: usize,
    pub xi_panels: usize,
    pub kappa: KappaSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSpec {
    /// Ascending coefficients of `V` for `p = ξ² + V(x)`.
    pub potential: Vec<f64>,
    pub energy: f64,
}

/// Integrator and Newton settings for closed-orbit searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub flow_tol: f64,
    pub orbit_tol: f64,
    pub max_newton: usize,
    pub samples: usize,
}

impl Default for FlowSpec {
    fn default() -> Self {
        let o = semitrace_core::dynamics::OrbitOptions::default();
        Self { flow_tol: o.flow_tol, orbit_tol: o.orbit_tol, max_newton: o.max_newton, samples: o.samples }
    }
}

fn bump_piece(center: f64, half_width: f64) -> PieceSpec {
    PieceSpec { center, half_width, amplitude: [1.0, 0.0] }
}

fn tolerance(abs: f64, rel: f64, slope: Option<(f64, f64)>) -> Tolerance {
    Tolerance {
        abs,
        rel,
        slope: slope.map(|(value, band)| SlopeTarget { value, band }),
        r2_min: 0.9,
        budget_s: 120.0,
    }
}

impl ExperimentConfig {
    /// Configuration that reproduces the reference run of `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            h: vec![],
            n: 2,
            seed: 0,
            tolerance: tolerance(0.0, 0.0, None),
            output: Output { dir: PathBuf::from("reports"), formats: vec![Format::Json], plot_data: false },
            window: None,
            gutzwiller: None,
            scalar: None,
            bohr: None,
            monodromy: None,
            fio: None,
            weyl: None,
            orbit: None,
            flow: None,
            test_function: vec![],
        };
        let rolloff_window = Some(WindowSpec { lo: 0.5, hi: 0.9, rolloff: 0.4 });
        match experiment {
            Experiment::Poisson => {
                c.h = vec![0.1, 0.037];
                c.tolerance = tolerance(1e-8, 1e-8, None);
                c.test_function = vec![bump_piece(TAU, 0.5)];
            }
            Experiment::Gutzwiller => {
                c.h = vec![0.02, 0.01, 0.005];
                c.tolerance = tolerance(0.0, 0.5, Some((1.0, 0.3)));
                c.window = rolloff_window;
                // −T₁ of the x₁ mode lies in supp f̂, the √2 mode's multiples do not
                c.test_function = vec![bump_piece(TAU + 0.3, 1.0)];
                c.gutzwiller = Some(GutzwillerSpec {
                    omega: [1.0, SQRT_2],
                    energy: 1.0,
                    guess: vec![1.4, 0.0, 0.02, 0.0],
                    jitter: 0.0,
                    section_normal: vec![0.0, 0.0, 1.0, 0.0],
                    truncation_scale: 2.4,
                    energy_max: 1.4,
                    isolation_margin: 0.05,
                });
                c.flow = Some(FlowSpec::default());
            }
            Experiment::Bohr => {
                c.h = vec![0.05, 0.025];
                c.tolerance = tolerance(1e-2, 0.0, Some((2.0, 0.2)));
                c.scalar = Some(ScalarSpec { model: ScalarKind::Well, potential: vec![0.0, 0.0, 0.0, 0.0, 1.0], strip_constant: 1.0 });
                c.bohr = Some(BohrSpec { lo: 0.5, hi: 2.0, reference: Reference::Numerical, truncation: 512, energy_margin: 0.5 });
            }
            Experiment::FioTrace => {
                c.h = vec![0.2, 0.1, 0.05];
                c.tolerance = tolerance(0.0, 0.3, Some((1.0, 0.3)));
                c.fio = Some(FioSpec {
                    alpha: vec![vec![2.0]],
                    beta: vec![vec![1.0]],
                    gamma: vec![vec![2.0]],
                    value0: 0.0,
                    amplitude_width2: 0.49,
                    half_width: 5.3,
                    points: None,
                });
            }
            Experiment::WeylCheck => {
                c.h = vec![0.2, 0.1, 0.05];
                c.tolerance = tolerance(0.1, 0.0, Some((2.0, 0.2)));
                c.weyl = Some(WeylSpec {
                    x_width2: 0.1,
                    xi_scale: 6.0,
                    xi_max: 32.0,
                    grid: [-1.2, 1.2],
                    grid_xi_factor: 1.3,
                    points_per_wavelength: 4.0,
                    kernel_width: 4.0,
                    xi_nodes: 8,
                    xi_panels: 16,
                    kappa: KappaSpec::BumpShift { eps: 0.1, centre: 0.0, width: 1.0 },
                });
            }
            Experiment::Orbit => {
                c.h = vec![0.2, 0.1, 0.05];
                c.tolerance = tolerance(0.0, 0.05, Some((2.0, 0.3)));
                c.orbit = Some(OrbitSpec { potential: vec![0.0, 0.0, 0.0, 0.0, 1.0], energy: 1.0 });
                c.flow = Some(FlowSpec::default());
            }
            Experiment::MonodromyIntegral => {
                c.h = vec![0.1, 0.05];
                c.n = 1;
                c.tolerance = tolerance(0.0, 0.5, Some((1.0, 0.3)));
                c.window = rolloff_window;
                c.test_function = vec![bump_piece(-TAU - 0.3, 1.0)];
                c.scalar = Some(ScalarSpec { model: ScalarKind::Circle, potential: vec![], strip_constant: 1.0 });
                c.monodromy = Some(MonodromySpec { k: 1, z0: 1.0 });
            }
        }
        c
    }

    /// Defaults for `experiment` overlaid with the tables of a TOML file.
    pub fn load(experiment: Experiment, path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            let c = Self::defaults(experiment);
            c.validate()?;
            return Ok(c);
        };
        let text = std::fs::read_to_string(path).map_err(|cause| HarnessError::Io { path: path.to_path_buf(), cause })?;
        Self::from_toml_over_defaults(experiment, &text)
    }

    pub fn from_toml_over_defaults(experiment: Experiment, text: &str) -> Result<Self> {
        let overlay: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        if let Some(named) = overlay.get("experiment") {
            if named.as_str() != Some(experiment.name()) {
                return Err(HarnessError::config("experiment", format!("config names {named}, but {experiment} was requested")));
            }
        }
        let mut base = toml::Table::try_from(Self::defaults(experiment)).map_err(|e| HarnessError::Parse(e.to_string()))?;
        merge(&mut base, overlay);
        let c: Self = base.try_into().map_err(|e: toml::de::Error| HarnessError::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize to TOML")
    }

    /// SHA-256 of the canonical JSON form, output settings excluded.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("configs serialize to JSON");
        if let Some(map) = v.as_object_mut() {
            map.remove("output");
        }
        format!("{:x}", Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let err = HarnessError::config;
        if self.h.is_empty() {
            return Err(err("h", "at least one value is required".into()));
        }
        if let Some(i) = self.h.iter().position(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(err(&format!("h[{i}]"), format!("must be positive, got {}", self.h[i])));
        }
        if let Some(i) = self.h.windows(2).position(|w| w[1] >= w[0]) {
            return Err(err(&format!("h[{}]", i + 1), "values must be strictly decreasing".into()));
        }
        if self.n < 1 {
            return Err(err("n", format!("must be at least 1, got {}", self.n)));
        }
        let t = &self.tolerance;
        if !(t.abs >= 0.0 && t.rel >= 0.0) {
            return Err(err("tolerance", "abs and rel must be non-negative".into()));
        }
        if let Some(s) = t.slope {
            if !(s.band >= 0.0) {
                return Err(err("tolerance.slope.band", "must be non-negative".into()));
            }
        }
        if self.output.formats.is_empty() {
            return Err(err("output.formats", "name at least one format".into()));
        }
        for (i, p) in self.test_function.iter().enumerate() {
            if !(p.half_width > 0.0) {
                return Err(err(&format!("test_function[{i}].half_width"), "must be positive".into()));
            }
        }
        if let Some(w) = &self.window {
            if !(w.lo < w.hi && w.rolloff > 0.0) {
                return Err(err("window", "need lo < hi and rolloff > 0".into()));
            }
        }
        let needs_f = matches!(self.experiment, Experiment::Poisson | Experiment::Gutzwiller | Experiment::MonodromyIntegral);
        if needs_f && self.test_function.is_empty() {
            return Err(err("test_function", format!("{} needs at least one piece", self.experiment)));
        }
        let table = |present: bool, name: &str| if present { Ok(()) } else { Err(err(name, format!("table required by {}", self.experiment))) };
        match self.experiment {
            Experiment::Poisson => Ok(()),
            Experiment::Gutzwiller => {
                table(self.window.is_some(), "window")?;
                table(self.flow.is_some(), "flow")?;
                let g = self.gutzwiller.as_ref().ok_or_else(|| err("gutzwiller", "table required by gutzwiller".into()))?;
                if g.guess.len() != 4 || g.section_normal.len() != 4 {
                    return Err(err("gutzwiller.guess", "guess and section_normal need four entries".into()));
                }
                if !g.omega.iter().all(|&w| w > 0.0) {
                    return Err(err("gutzwiller.omega", "frequencies must be positive".into()));
                }
                Ok(())
            }
            Experiment::Bohr => {
                let s = self.scalar.as_ref().ok_or_else(|| err("scalar", "table required by bohr".into()))?;
                let b = self.bohr.as_ref().ok_or_else(|| err("bohr", "table required by bohr".into()))?;
                if s.model != ScalarKind::Well {
                    return Err(err("scalar.model", "Bohr–Sommerfeld needs a well".into()));
                }
                if !(b.lo < b.hi) {
                    return Err(err("bohr", format!("empty window [{}, {}]", b.lo, b.hi)));
                }
                if b.reference == Reference::Analytic && s.potential.len() > 3 && s.potential[3..].iter().any(|&c| c != 0.0) {
                    return Err(err("bohr.reference", "analytic levels need a quadratic potential".into()));
                }
                Ok(())
            }
            Experiment::MonodromyIntegral => {
                table(self.window.is_some(), "window")?;
                table(self.scalar.is_some(), "scalar")?;
                table(self.monodromy.is_some(), "monodromy")
            }
            Experiment::FioTrace => {
                let f = self.fio.as_ref().ok_or_else(|| err("fio", "table required by fio-trace".into()))?;
                if !(f.half_width > 0.0 && f.amplitude_width2 > 0.0) {
                    return Err(err("fio", "half_width and amplitude_width2 must be positive".into()));
                }
                Ok(())
            }
            Experiment::WeylCheck => table(self.weyl.is_some(), "weyl"),
            Experiment::Orbit => {
                table(self.flow.is_some(), "flow")?;
                table(self.orbit.is_some(), "orbit")
            }
        }
    }

    /// A study needs three parameters spanning a factor of four.
    pub fn validate_study(&self) -> Result<()> {
        if self.h.len() < 3 {
            return Err(HarnessError::config("h", format!("a convergence study needs at least 3 values, got {}", self.h.len())));
        }
        let span = self.h[0] / self.h[self.h.len() - 1];
        if span < 4.0 {
            return Err(HarnessError::config("h", format!("values span a factor {span:.3}, need at least 4")));
        }
        Ok(())
    }
}

/// Recursive table merge; everything but tables is replaced wholesale.
fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
