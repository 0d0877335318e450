use crate::config::{Experiment, Format, SlopeTarget, Tolerance};
use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub h: f64,
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub abs_err: f64,
    pub rel_err: f64,
    pub runtime_s: f64,
}

/// Least-squares slope of `log rel_err` against `log h`, with the 95%
/// confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub value: f64,
    pub half_width: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeVerdict {
    NotRequested,
    Within,
    Outside,
    /// The fit is too noisy to judge.
    Inconclusive,
}

impl Slope {
    /// `None` with fewer than three usable points.
    pub fn fit(hs: &[f64], errors: &[f64]) -> Option<Self> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = hs.iter().zip(errors).filter(|(_, e)| **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).unzip();
        if xs.len() < 3 {
            return None;
        }
        let (value, se, r2) = semitrace_core::numerics::linear_fit(&xs, &ys);
        let t = statrs::distribution::StudentsT::new(0.0, 1.0, (xs.len() - 2) as f64).expect("positive degrees of freedom");
        let quantile = statrs::distribution::ContinuousCDF::inverse_cdf(&t, 0.975);
        Some(Self { value, half_width: quantile * se, r2 })
    }

    pub fn verdict(slope: Option<&Slope>, tol: &Tolerance) -> SlopeVerdict {
        match (slope, tol.slope) {
            (Some(s), Some(SlopeTarget { value, band })) => {
                if s.r2 < tol.r2_min {
                    SlopeVerdict::Inconclusive
                } else if (s.value - value).abs() <= band {
                    SlopeVerdict::Within
                } else {
                    SlopeVerdict::Outside
                }
            }
            _ => SlopeVerdict::NotRequested,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub config_hash: String,
    pub seed: u64,
    pub experiment: Experiment,
    pub rows: Vec<Row>,
    pub slope: Option<Slope>,
    pub pass: bool,
}

impl TraceReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize to JSON");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["h", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err", "rel_err", "runtime_s"]).expect("in-memory write");
        for r in &self.rows {
            let fields = [r.h, r.lhs[0], r.lhs[1], r.rhs[0], r.rhs[1], r.abs_err, r.rel_err, r.runtime_s];
            w.write_record(fields.iter().map(|&x| sig17(x))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    /// Two whitespace-separated columns `h rel_err` under `#` comments.
    pub fn to_plot_data(&self) -> String {
        let mut s = format!(
            "# semitrace {} {} config {}\n# columns: h rel_err (log-log)\n",
            env!("CARGO_PKG_VERSION"),
            self.experiment,
            self.config_hash
        );
        if let Some(fit) = &self.slope {
            s += &format!("# slope {} ± {} (R² {})\n", sig17(fit.value), sig17(fit.half_width), sig17(fit.r2));
        }
        for r in &self.rows {
            s += &format!("{} {}\n", sig17(r.h), sig17(r.rel_err));
        }
        s
    }
}

/// Scientific notation with 17 significant digits.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `<experiment>.<ext>` under `dir` for every format; returns the paths.
pub fn emit_report(report: &TraceReport, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|cause| HarnessError::Io { path: dir.to_path_buf(), cause })?;
    let mut written = Vec::new();
    for &format in formats {
        let (ext, body) = match format {
            Format::Json => ("json", report.to_json()),
            Format::Csv => ("csv", report.to_csv()),
            Format::PlotData => ("dat", report.to_plot_data()),
        };
        let path = dir.join(format!("{}.{ext}", report.experiment));
        std::fs::File::create(&path)
            .and_then(|mut f| f.write_all(body.as_bytes()))
            .map_err(|cause| HarnessError::Io { path: path.clone(), cause })?;
        written.push(path);
    }
    Ok(written)
}
