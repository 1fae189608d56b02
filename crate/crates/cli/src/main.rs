mod commands;
mod error;
mod output;
mod spec;

use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use commands::{dispatch, RunSettings};
use error::CliError;
use output::write_file;
use spec::ExperimentSpec;

/// Run a coherent-quant experiment described by a JSON spec file.
#[derive(Debug, Parser)]
#[command(name = "coherent-quant", version)]
struct Args {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the spec seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the spec worker count for Monte Carlo runs.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write an SVG plot.
    #[arg(long)]
    svg: bool,
}

fn run(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let start = Instant::now();
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", args.spec.display()))))?;
    let spec = ExperimentSpec::from_json(&text)?;
    let settings =
        RunSettings { seed: args.seed.or(spec.seed).unwrap_or(0), workers: args.workers.or(spec.workers).unwrap_or(1) };
    if settings.workers == 0 {
        return Err(CliError::Spec("workers must be at least 1".into()));
    }
    let table = dispatch(&spec, settings)?;
    std::fs::create_dir_all(&args.out)?;
    let mut written = Vec::new();
    let csv_path = args.out.join(format!("{}.csv", spec.stem()));
    write_file(&csv_path, &table.to_csv()?)?;
    written.push(csv_path);
    if args.svg || spec.svg {
        if let Some(svg) = table.to_svg() {
            let svg_path = args.out.join(format!("{}.svg", spec.stem()));
            write_file(&svg_path, svg.as_bytes())?;
            written.push(svg_path);
        }
    }
    let spec_echo: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Spec(e.to_string()))?;
    let manifest = json!({
        "spec": spec_echo,
        "spec_path": args.spec.display().to_string(),
        "command": spec.command,
        "seed": settings.seed,
        "workers": settings.workers,
        "versions": {
            "coherent-quant-cli": env!("CARGO_PKG_VERSION"),
            "coherent-quant": env!("CARGO_PKG_VERSION"),
        },
        "outputs": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "rows": table.rows.len(),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    let manifest_path = args.out.join("run-manifest.json");
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Spec(e.to_string()))?;
    write_file(&manifest_path, body.as_bytes())?;
    written.push(manifest_path);
    Ok(written)
}

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error[{}]: {msg}", e.kind());
            std::process::exit(e.exit_code());
        }
    }
}
