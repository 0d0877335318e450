use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use semitrace::{budget_warnings, emit_report, run_experiment, Experiment, ExperimentConfig, Format, Slope, SlopeVerdict, TraceReport};
use std::path::PathBuf;
use std::process::ExitCode;

/// Both sides of semiclassical trace formulae, with convergence in h.
///
/// Exit status: 0 when every check passes, 1 when one fails, 2 on invalid
/// input or a refused computation.
#[derive(Parser)]
#[command(name = "semitrace", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Circle spectrum against the monodromy sum
    Poisson(RunArgs),
    /// Exact oscillator trace against the orbit sum
    Gutzwiller(RunArgs),
    /// Bohr–Sommerfeld roots against a reference spectrum
    Bohr(RunArgs),
    /// Stationary-phase trace of a quadratic Fourier integral operator against quadrature
    FioTrace(RunArgs),
    /// Weyl-symbol defect under a change of variables
    WeylCheck(RunArgs),
    /// dI/dz by central differences against the orbit period
    Orbit(RunArgs),
    /// Contour integral of the scalar monodromy against its leading term
    MonodromyIntegral(RunArgs),
    /// Print default configurations as TOML
    Defaults {
        #[arg(value_enum)]
        experiment: Option<Experiment>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file overriding the defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated h values, strictly decreasing
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report formats, comma-separated
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the (h, rel_err) table
    #[arg(long)]
    emit_plot_data: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> anyhow::Result<bool> {
    let (experiment, args) = match command {
        Command::Defaults { experiment } => {
            let list = experiment.map_or(Experiment::ALL.to_vec(), |e| vec![e]);
            let text: Vec<String> = list.iter().map(|&e| format!("# {e}\n{}", ExperimentConfig::defaults(e).to_toml())).collect();
            print!("{}", text.join("\n"));
            return Ok(true);
        }
        Command::Poisson(a) => (Experiment::Poisson, a),
        Command::Gutzwiller(a) => (Experiment::Gutzwiller, a),
        Command::Bohr(a) => (Experiment::Bohr, a),
        Command::FioTrace(a) => (Experiment::FioTrace, a),
        Command::WeylCheck(a) => (Experiment::WeylCheck, a),
        Command::Orbit(a) => (Experiment::Orbit, a),
        Command::MonodromyIntegral(a) => (Experiment::MonodromyIntegral, a),
    };
    let mut config = ExperimentConfig::load(experiment, args.config.as_deref())?;
    if let Some(h) = args.h_list {
        config.h = h;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = args.out {
        config.output.dir = dir;
    }
    if let Some(formats) = args.format {
        config.output.formats = formats;
    }
    config.output.plot_data |= args.emit_plot_data;
    config.validate()?;
    for w in budget_warnings(&config) {
        eprintln!("warning: {w}");
    }

    let report = run_experiment(&config).with_context(|| format!("{experiment} failed"))?;
    let mut formats = config.output.formats.clone();
    if config.output.plot_data && !formats.contains(&Format::PlotData) {
        formats.push(Format::PlotData);
    }
    let written = emit_report(&report, &formats, &config.output.dir)?;
    summarize(&report, &config);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(report.pass)
}

fn summarize(report: &TraceReport, config: &ExperimentConfig) {
    println!("{} (config {}, seed {})", report.experiment, &report.config_hash[..12], report.seed);
    println!("{:>12} {:>12} {:>12} {:>10}", "h", "abs_err", "rel_err", "seconds");
    for r in &report.rows {
        println!("{:>12.4e} {:>12.4e} {:>12.4e} {:>10.3}", r.h, r.abs_err, r.rel_err, r.runtime_s);
    }
    match (&report.slope, config.tolerance.slope) {
        _ if report.experiment.is_exact() => println!("slope: exact identity"),
        (Some(s), target) => {
            let verdict = match Slope::verdict(Some(s), &config.tolerance) {
                SlopeVerdict::Within => "within target",
                SlopeVerdict::Outside => "outside target",
                SlopeVerdict::Inconclusive => "inconclusive (noisy fit)",
                SlopeVerdict::NotRequested => "no target",
            };
            let goal = target.map_or(String::new(), |t| format!(", target {} ± {}", t.value, t.band));
            println!("slope {:.3} ± {:.3} (R² {:.4}{goal}): {verdict}", s.value, s.half_width, s.r2);
        }
        (None, _) => println!("slope: needs at least 3 values of h"),
    }
    println!("{}", if report.pass { "PASS" } else { "FAIL" });
}
