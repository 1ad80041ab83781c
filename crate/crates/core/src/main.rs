use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cqnc::bench::{self, presets, Format};
use cqnc::model::validate;
use cqnc::{Error, Result};

const OUTPUT_ENV: &str = "CQNC_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "cqnc-bench", version, about = "Force-noise spectra sweeps for CQNC force sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Source {
    /// TOML configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Built-in preset; a config file given as well is merged over it.
    #[arg(long, short)]
    preset: Option<String>,
    /// Override a scalar by dotted path, e.g. `cavity.kappa_hz=2e6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV and/or JSON.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory [env: CQNC_OUTPUT_DIR, default: out].
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        format: OutFormat,
        /// File stem; defaults to the configuration name.
        #[arg(long)]
        name: Option<String>,
    },
    /// Compare two result files column by column.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Columns to compare; `total` also matches `<label>.total`.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
    },
    /// Load a configuration and report the model validity checks.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Built-in figure presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print the preset document.
    Show { name: String },
}

fn load_spec(source: &Source) -> Result<bench::SweepSpec> {
    if let (Some(path), None, true) = (&source.config, &source.preset, source.overrides.is_empty()) {
        return bench::load_config(path);
    }
    let (doc, preset) = bench::load_document(source.config.as_deref(), source.preset.as_deref(), &source.overrides)?;
    let fallback = source
        .config
        .as_deref()
        .and_then(Path::file_stem)
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .or(preset)
        .unwrap_or_else(|| "sweep".into());
    bench::spec_from_document(doc, &fallback)
}

fn run(source: &Source, out: Option<PathBuf>, format: OutFormat, name: Option<String>) -> Result<bool> {
    let spec = load_spec(source)?;
    let result = bench::run_sweep(&spec)?;
    let dir = out
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let stem = name.unwrap_or_else(|| spec.name.clone());
    let formats: &[Format] = match format {
        OutFormat::Csv => &[Format::Csv],
        OutFormat::Json => &[Format::Json],
        OutFormat::Both => &[Format::Csv, Format::Json],
    };
    for &f in formats {
        let path = dir.join(format!("{stem}.{}", f.extension()));
        bench::emit(&result, f, &path)?;
        println!("wrote {}", path.display());
    }
    for a in &result.metadata.advisories {
        eprintln!("advisory: {a}");
    }
    Ok(true)
}

fn compare(a: &Path, b: &Path, tolerance: f64, columns: &[String]) -> Result<bool> {
    let ta = bench::load_table(a)?;
    let tb = bench::load_table(b)?;
    let report = bench::compare(&ta, &tb, tolerance, columns)?;
    println!("{:<40} {:>12} {:>12}  status", "column", "max_rel", "mean_rel");
    for c in &report.columns {
        println!(
            "{:<40} {:>12.3e} {:>12.3e}  {}",
            c.name,
            c.max_rel,
            c.mean_rel,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    let ok = report.passed();
    println!(
        "{} (max relative deviation {:.3e}, tolerance {:.3e})",
        if ok { "PASS" } else { "FAIL" },
        report.max_rel(),
        tolerance
    );
    Ok(ok)
}

fn validate_cmd(source: &Source) -> Result<bool> {
    let spec = load_spec(source)?;
    let (params, squeezing) = spec.scenario.resolve()?;
    let report = validate(&params, &squeezing);
    println!("{}: g/2pi = {:.6e} Hz, G/2pi = {:.6e} Hz", spec.name, params.coupling_g / std::f64::consts::TAU, params.atomic.coupling / std::f64::consts::TAU);
    for c in &report.checks {
        println!(
            "{:<28} {:>4}  ratio {:.3e}  threshold {:.3e}  ({})",
            c.name,
            if c.passed { "ok" } else { "FAIL" },
            c.ratio,
            c.threshold,
            c.detail
        );
    }
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            source,
            out,
            format,
            name,
        } => run(source, out.clone(), *format, name.clone()),
        Command::Compare {
            a,
            b,
            tolerance,
            columns,
        } => compare(a, b, *tolerance, columns),
        Command::Validate { source } => validate_cmd(source),
        Command::Presets { action } => match action {
            PresetAction::List => {
                for n in presets::names() {
                    println!("{n:<8} {}", presets::description(n).unwrap_or(""));
                }
                Ok(true)
            }
            PresetAction::Show { name } => match presets::document(name) {
                Some(doc) => {
                    print!("{doc}");
                    Ok(true)
                }
                None => Err(Error::Config(format!("unknown preset `{name}`"))),
            },
        },
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
