use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use epochsim::dataset::{
    dataset_file_name, generate_consumption, generate_weather, inject_consumption, inject_weather, parse_consumption,
    parse_weather, write_consumption, write_weather, ConsumptionProfile, DatasetBundle, FaultSpec, SourceRole,
    WeatherProfile,
};
use epochsim::scenario::{self, parse_architecture, DatasetSource, Scenario, ScenarioConfig, SimReport};
use epochsim::tepc::ModelParams;
use epochsim::Error;

#[derive(Parser)]
#[command(name = "epochsim", version, about = "Order-execute vs execute-order-validate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic datasets for a seed.
    Generate {
        #[arg(long, env = "EPOCHSIM_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a fault to one dataset file.
    Inject {
        /// e.g. `single-null:source=client,day=2,hour=2` or `delay:days=3;11,hours=2`
        #[arg(long)]
        fault: FaultSpec,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario under one architecture.
    Run {
        #[arg(long, value_parser = parse_scenario, default_value = "s1")]
        scenario: Scenario,
        #[arg(long, default_value = "oe")]
        arch: String,
        #[arg(long, env = "EPOCHSIM_SEED", default_value_t = 1)]
        seed: u64,
        /// Flat `key = value` overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory holding clean `<source>_seed<K>.csv` files; generated in memory if absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Re-run the configuration embedded in an earlier report.
        #[arg(long, conflicts_with_all = ["config", "data"])]
        replay: Option<PathBuf>,
    },
    /// Every scenario under both architectures for a list of seeds.
    Matrix {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit 2 for I/O and configuration problems, 3 for internal invariant violations.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Invariant(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate { seed, out } => generate(seed, &out),
        Command::Inject { fault, input, out } => inject(&fault, &input, &out),
        Command::Run {
            scenario,
            arch,
            seed,
            config,
            data,
            out,
            replay,
        } => {
            let config = match replay {
                Some(path) => replay_config(&path)?,
                None => build_config(scenario, &arch, seed, config.as_deref(), data.as_deref())?,
            };
            run(&config, &out)
        }
        Command::Matrix { seeds, out } => matrix(&seeds, &out),
    }
}

/// Writes every file to a staging directory first so a failure leaves nothing behind.
fn write_all(out: &Path, files: &[(String, String)]) -> anyhow::Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let staging = out.join(format!(".epochsim-staging-{}", std::process::id()));
    let result = (|| -> Result<(), Error> {
        fs::create_dir_all(&staging).map_err(|e| Error::Io {
            path: staging.clone(),
            source: e,
        })?;
        for (name, body) in files {
            let path = staging.join(name);
            fs::write(&path, body).map_err(|e| Error::Io { path, source: e })?;
        }
        for (name, _) in files {
            let to = out.join(name);
            fs::rename(staging.join(name), &to).map_err(|e| Error::Io { path: to, source: e })?;
        }
        Ok(())
    })();
    let _ = fs::remove_dir_all(&staging);
    Ok(result?)
}

fn generate(seed: u64, out: &Path) -> anyhow::Result<()> {
    let weather = generate_weather(seed, &WeatherProfile::default());
    let consumption = generate_consumption(
        seed,
        &weather.truth,
        &ModelParams::default(),
        &ConsumptionProfile::default(),
    );
    let mut files: Vec<(String, String)> = SourceRole::STAKEHOLDERS
        .iter()
        .zip(&weather.sources)
        .map(|(role, rows)| (dataset_file_name(role.name(), seed, None), write_weather(rows)))
        .collect();
    files.push((dataset_file_name("truth", seed, None), write_weather(&weather.truth)));
    files.push((dataset_file_name("meter", seed, None), write_consumption(&consumption)));
    write_all(out, &files)?;
    for (name, _) in &files {
        println!("{}", out.join(name).display());
    }
    Ok(())
}

fn inject(fault: &FaultSpec, input: &Path, out: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(input).map_err(|e| Error::Io {
        path: input.to_path_buf(),
        source: e,
    })?;
    let origin = input.display().to_string();
    let body = match fault.target() {
        SourceRole::Meter => write_consumption(&inject_consumption(&parse_consumption(text.as_bytes(), &origin)?, fault)?),
        _ => write_weather(&inject_weather(&parse_weather(text.as_bytes(), &origin)?, fault)?),
    };
    fs::write(out, body).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn build_config(
    scenario: Scenario,
    arch: &str,
    seed: u64,
    config_file: Option<&Path>,
    data: Option<&Path>,
) -> anyhow::Result<ScenarioConfig> {
    let mut config = ScenarioConfig::new(scenario, parse_architecture(arch)?, seed);
    if let Some(path) = config_file {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        config.apply_config_text(&text).with_context(|| format!("reading {}", path.display()))?;
        // command-line selections win over the file
        config.scenario = scenario;
        config.architecture.kind = parse_architecture(arch)?;
    }
    if let Some(dir) = data {
        config.dataset = DatasetSource::Paths(DatasetBundle::paths(dir, seed));
    }
    Ok(config)
}

fn replay_config(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let report = SimReport::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(report.config)
}

fn run(config: &ScenarioConfig, out: &Path) -> anyhow::Result<()> {
    let report = scenario::run_scenario(config)?;
    write_all(out, &[("report.json".to_string(), report.to_json())])?;
    print!("{}", report.table());
    Ok(())
}

fn matrix(seeds: &[u64], out: &Path) -> anyhow::Result<()> {
    if seeds.is_empty() {
        return Err(Error::Config("no seeds given".into()).into());
    }
    let template = ScenarioConfig::new(Scenario::S1, epochsim::ArchitectureKind::OrderExecute, seeds[0]);
    let rows = scenario::matrix(seeds, &template)?;
    let csv = scenario::matrix_csv(&rows);
    write_all(out, &[("matrix.csv".to_string(), csv.clone())])?;
    print!("{csv}");
    Ok(())
}
