//! Command-line front end: experiment selection, config handling, CSV
//! output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use a2g::config::{ConfigError, RunConfig};
use a2g::sim::{
    doppler_table, offset_table, pattern_dump, run_point, sweep_array, sweep_distance, write_csv,
    SimError, SweepPoint, SweepResult,
};

#[derive(Parser)]
#[command(
    name = "a2g",
    version,
    about = "Air-to-ground mmWave downlink simulator with position-only beamforming"
)]
struct Cli {
    /// Config file of `key = value` lines; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key (repeatable), e.g. --set rician_k=15dB
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Beamformer design: nsb, nsb-d, or mpdrb
    #[arg(long, global = true)]
    beamformer: Option<String>,

    /// MCI distance from the macro-cell centre, km
    #[arg(long, global = true, value_name = "KM")]
    mci_km: Option<f64>,

    /// Array elements per side
    #[arg(long, global = true, value_name = "M")]
    array_size: Option<usize>,

    /// Rician factor in dB
    #[arg(long, global = true, value_name = "DB")]
    k_db: Option<f64>,

    /// Placement trials
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Also run the sampled-SINR Monte Carlo path
    #[arg(long, global = true)]
    mc: bool,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output directory (default: $A2G_OUTPUT_DIR or the working directory)
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One operating point
    Point,
    /// ASE versus the MCI distance from the macro-cell centre
    SweepDistance {
        /// Comma-separated distances in km
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,2.5,3,4,4.75")]
        distances_km: Vec<f64>,
    },
    /// ASE versus the array dimension
    SweepArray {
        #[arg(long, value_delimiter = ',', default_value = "200,300,400,500")]
        sizes: Vec<usize>,
    },
    /// ASE versus the relative Doppler estimation error
    DopplerTable {
        #[arg(long, value_delimiter = ',', default_value = "-1,-0.5,0,0.5,1", allow_hyphen_values = true)]
        deltas: Vec<f64>,
    },
    /// ASE versus the position measurement offset
    OffsetTable {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,5")]
        deltas_m: Vec<f64>,
    },
    /// Beam pattern of the served beam, users pinned at cell centres
    Pattern {
        #[arg(long, default_value_t = 91)]
        zenith_steps: usize,
        #[arg(long, default_value_t = 73)]
        azimuth_steps: usize,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            RunConfig::parse(&text).map_err(|e| e.to_string())?
        }
        None => RunConfig::default(),
    };
    for pair in &cli.overrides {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{pair}`"))?;
        cfg.set(k.trim(), v.trim()).map_err(|e| e.to_string())?;
    }
    let mut flag = |key: &str, value: Option<String>| -> Result<(), ConfigError> {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
        Ok(())
    };
    flag("beamformer", cli.beamformer.clone()).map_err(|e| e.to_string())?;
    flag("mci_distance", cli.mci_km.map(|d| (d * 1000.0).to_string())).map_err(|e| e.to_string())?;
    flag("array_size", cli.array_size.map(|m| m.to_string())).map_err(|e| e.to_string())?;
    flag("rician_k", cli.k_db.map(|k| k.to_string())).map_err(|e| e.to_string())?;
    flag("trials", cli.trials.map(|t| t.to_string())).map_err(|e| e.to_string())?;
    flag("seed", cli.seed.map(|s| s.to_string())).map_err(|e| e.to_string())?;
    flag("workers", cli.workers.map(|w| w.to_string())).map_err(|e| e.to_string())?;
    if cli.mc {
        cfg.set("with_mc", "true").map_err(|e| e.to_string())?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(cfg.emit().as_bytes());
    let mut hex = String::new();
    for b in digest.iter().take(6) {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

fn output_dir(cli: &Cli) -> PathBuf {
    cli.output
        .clone()
        .or_else(|| std::env::var_os("A2G_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_output(dir: &PathBuf, name: &str, body: &str) -> Result<PathBuf, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn sweep_to_string(result: &SweepResult<f64>, meta: &str) -> String {
    let mut buf = Vec::new();
    write_csv(result, meta, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv is utf-8")
}

fn run(cli: &Cli) -> Result<(), RunFailure> {
    let cfg = build_config(cli).map_err(RunFailure::Config)?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| RunFailure::Config(e.to_string()))?;
    }
    let scenario = cfg.scenario().map_err(|e| RunFailure::Config(e.to_string()))?;
    let meta = format!("seed={} config={}", cfg.seed, config_hash(&cfg));
    let dir = output_dir(cli);

    let (name, body) = match &cli.command {
        Command::Point => {
            let report = run_point(&scenario)?;
            let result = SweepResult {
                points: vec![SweepPoint {
                    axis: scenario.mci_distance,
                    report,
                }],
                seed: cfg.seed,
            };
            println!(
                "{}: SE {:.3} bps/Hz, ASE {:.1} bps/Hz/km2 (stderr {:.1}, {} trials)",
                cfg.beamformer, report.se_approx, report.ase_approx, report.stderr_ase, report.trials
            );
            if let (Some(se), Some(ase)) = (report.se_mc, report.ase_mc) {
                println!("sampled-SINR path: SE {se:.3} bps/Hz, ASE {ase:.1} bps/Hz/km2");
            }
            ("point.csv", sweep_to_string(&result, &meta))
        }
        Command::SweepDistance { distances_km } => {
            let meters: Vec<f64> = distances_km.iter().map(|d| d * 1000.0).collect();
            let result = sweep_distance(&scenario, &meters)?;
            ("sweep_distance.csv", sweep_to_string(&result, &meta))
        }
        Command::SweepArray { sizes } => {
            let result = sweep_array(&scenario, sizes)?;
            ("sweep_array.csv", sweep_to_string(&result, &meta))
        }
        Command::DopplerTable { deltas } => {
            let result = doppler_table(&scenario, deltas)?;
            ("doppler_table.csv", sweep_to_string(&result, &meta))
        }
        Command::OffsetTable { deltas_m } => {
            let result = offset_table(&scenario, deltas_m)?;
            ("offset_table.csv", sweep_to_string(&result, &meta))
        }
        Command::Pattern {
            zenith_steps,
            azimuth_steps,
        } => {
            let rows = pattern_dump(&scenario, *zenith_steps, *azimuth_steps)?;
            let mut body = format!("# {meta}\nzenith_deg,azimuth_deg,power_db\n");
            for (z, a, p) in rows {
                body.push_str(&format!("{z:.4},{a:.4},{p:.4}\n"));
            }
            ("pattern.csv", body)
        }
    };
    let path = write_output(&dir, name, &body).map_err(RunFailure::Io)?;
    println!("wrote {}", path.display());
    Ok(())
}

enum RunFailure {
    Config(String),
    Degenerate(String),
    Io(String),
}

impl From<SimError> for RunFailure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Degenerate { .. } => RunFailure::Degenerate(e.to_string()),
            SimError::Geometry(_) => RunFailure::Config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunFailure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(RunFailure::Degenerate(msg)) => {
            eprintln!("degenerate scenario: {msg}");
            ExitCode::from(3)
        }
        Err(RunFailure::Io(msg)) => {
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
