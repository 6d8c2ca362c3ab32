use std::path::PathBuf;
use std::process::ExitCode;

use bergman_cli::{run, Command, RunConfig, EXIT_NUMERICAL, EXIT_VALIDATION};
use bergman_core::poly::Term;
use clap::{Args, Parser};

/// Numerical experiments on hypersurfaces of the Bergman ball.
#[derive(Parser)]
#[command(name = "bergman", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    /// Defining polynomial as inline JSON records or a path to a JSON file.
    #[arg(long)]
    polynomial: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    separations: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    r_ladder: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    rings: Option<usize>,
    #[arg(long)]
    grid_radius: Option<f64>,
    /// Directory for `<command>.csv` and `<command>.json`.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn resolve(cli: Cli) -> Result<RunConfig, String> {
    let o = cli.overrides;
    let mut config = match &o.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = config.command {
        if c != cli.command {
            return Err(format!(
                "config is for `{}` but `{}` was requested",
                c.name(),
                cli.command.name()
            ));
        }
    }
    config.command = Some(cli.command);
    if let Some(p) = o.polynomial {
        let text = if p.trim_start().starts_with('[') {
            p
        } else {
            std::fs::read_to_string(&p).map_err(|e| format!("{p}: {e}"))?
        };
        let records: Vec<Term> =
            serde_json::from_str(&text).map_err(|e| format!("polynomial: {e}"))?;
        if o.dimension.is_none() {
            if let Some(first) = records.first() {
                config.dimension = first.alpha.len();
            }
        }
        config.polynomial = Some(records);
    }
    if let Some(v) = o.dimension {
        config.dimension = v;
    }
    if let Some(v) = o.beta {
        config.weight.beta = v;
    }
    if let Some(v) = o.degree {
        config.degree = v;
    }
    if let Some(v) = o.separations {
        config.separations = v;
    }
    if let Some(v) = o.seed {
        config.seed = v;
    }
    if let Some(v) = o.r_ladder {
        config.r_ladder = v;
    }
    if let Some(v) = o.eps {
        config.eps = v;
    }
    if let Some(v) = o.rings {
        config.grid.rings = v;
    }
    if let Some(v) = o.grid_radius {
        config.grid.max_pseudoradius = v;
    }
    if let Some(v) = o.output {
        config.output = Some(v);
    }
    Ok(config)
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("BERGMAN_THREADS") else {
        return Ok(());
    };
    let k: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("BERGMAN_THREADS must be a positive integer, got {v:?}"))?;
    if k == 0 {
        return Err("BERGMAN_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_VALIDATION as u8);
    }
    let config = match resolve(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid configuration: {e}");
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &config.output {
        Some(dir) => {
            if let Err(e) = report.write_to(dir) {
                eprintln!("error: {}: {e}", dir.display());
                return ExitCode::from(EXIT_VALIDATION as u8);
            }
        }
        None => {
            print!("{}", report.csv);
            eprintln!(
                "{}",
                serde_json::to_string_pretty(&report.json).expect("report serializes")
            );
        }
    }
    if report.failed {
        ExitCode::from(EXIT_NUMERICAL as u8)
    } else {
        ExitCode::SUCCESS
    }
}
