use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use rebalance::ingest::{
    fetch_block, load_blocks_dir, load_matrix, load_stations, plan_batches, save_block,
    save_matrix, stitch_with_report, ApiConfig, DEFAULT_ENDPOINT, DEFAULT_ROUTING_PROFILE,
};
use rebalance::model::{CostParams, DistanceMatrix, NetworkState, Station, TruckSpec};
use rebalance::report::{route_listing, run_compare, sha256_hex, PlanDocument, RunMetadata};
use rebalance::sim::{
    generate_state, load_state, save_state, SimConfig, UtilizationProfile, DAY_SLOT,
};
use rebalance::solver::{solve, validate, Strategy};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_INVALID: u8 = 3;

/// Plan truck routes that rebalance a bike-share network.
#[derive(Debug, Parser)]
#[command(name = "rebalance", version)]
struct Cli {
    /// Seed for the simulated network state.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Time slot of the utilization profile.
    #[arg(long, global = true, default_value = DAY_SLOT)]
    slot: String,
    /// Station CSV.
    #[arg(long, global = true, default_value = "data/minato/stations.csv")]
    stations: PathBuf,
    /// Distance matrix file.
    #[arg(long, global = true, default_value = "data/minato/matrix.txt")]
    matrix: PathBuf,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// TOML file overriding truck and cost constants.
    #[arg(long, global = true)]
    truck_spec: Option<PathBuf>,
    /// Utilization profile CSV.
    #[arg(long, global = true)]
    profile: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the distance matrix from block files, optionally fetching missing blocks.
    Matrix(MatrixArgs),
    /// Simulate a network state and write it as CSV.
    Simulate {
        /// Output file; defaults to <out-dir>/state.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one strategy and write its plan.
    Solve {
        #[arg(long)]
        strategy: Strategy,
        /// Use this state instead of simulating one.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Solve all strategies on one state and write a comparison.
    Compare {
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Check a plan file against a state.
    Validate {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Directory of block files.
    #[arg(long)]
    blocks_dir: PathBuf,
    /// Where to write the stitched matrix.
    #[arg(long)]
    out: PathBuf,
    /// Fetch the blocks through the routing API (or its cache) first.
    #[arg(long)]
    fetch: bool,
    #[arg(long, default_value_t = 50)]
    batch_size: usize,
    #[arg(long, default_value = DEFAULT_ENDPOINT)]
    endpoint: String,
    #[arg(long, default_value = DEFAULT_ROUTING_PROFILE)]
    routing_profile: String,
    /// Response cache; defaults to <blocks-dir>/cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SpecFile {
    truck: TruckSpec,
    cost: CostParams,
}

struct Dataset {
    stations: Vec<Station>,
    matrix: DistanceMatrix,
    hash: String,
}

fn load_dataset(cli: &Cli) -> Result<Dataset> {
    let station_bytes =
        fs::read(&cli.stations).with_context(|| format!("reading {}", cli.stations.display()))?;
    let matrix_bytes =
        fs::read(&cli.matrix).with_context(|| format!("reading {}", cli.matrix.display()))?;
    let stations = load_stations(&cli.stations)?;
    let matrix = load_matrix(&cli.matrix)?;
    if matrix.n() != stations.len() {
        bail!(
            "matrix has {} rows but {} stations are listed",
            matrix.n(),
            stations.len()
        );
    }
    Ok(Dataset {
        stations,
        matrix,
        hash: sha256_hex(&[&station_bytes, &matrix_bytes]),
    })
}

fn load_spec(cli: &Cli) -> Result<(TruckSpec, CostParams)> {
    let file = match &cli.truck_spec {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<SpecFile>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => SpecFile::default(),
    };
    file.truck.validate()?;
    Ok((file.truck, file.cost))
}

fn sim_config(cli: &Cli) -> Result<SimConfig> {
    let profile = match &cli.profile {
        Some(path) => UtilizationProfile::load(path)?,
        None => UtilizationProfile::default(),
    };
    Ok(SimConfig {
        seed: cli.seed,
        slot: cli.slot.clone(),
        profile,
        ..SimConfig::default()
    })
}

fn state_for(cli: &Cli, data: &Dataset, path: Option<&Path>) -> Result<NetworkState> {
    let state = match path {
        Some(p) => load_state(p).with_context(|| format!("loading {}", p.display()))?,
        None => {
            let config = sim_config(cli)?;
            generate_state(&data.stations, &config, &mut config.rng())?
        }
    };
    state.validate(&data.stations)?;
    Ok(state)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(cli: &Cli) -> Result<&Path> {
    fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating {}", cli.out_dir.display()))?;
    Ok(&cli.out_dir)
}

/// Used when the binary is built without the `http` feature; only cached
/// batches can be served.
#[cfg(not(feature = "http"))]
struct CacheOnly;

#[cfg(not(feature = "http"))]
impl rebalance::ingest::MatrixTransport for CacheOnly {
    fn distances(
        &self,
        _: &[[f64; 2]],
        _: &ApiConfig,
        _: &str,
    ) -> Result<Vec<Vec<f64>>, rebalance::ingest::FetchError> {
        Err(rebalance::ingest::FetchError::Network(
            "built without the http feature".into(),
        ))
    }
}

fn cmd_matrix(cli: &Cli, args: &MatrixArgs) -> Result<bool> {
    let stations = load_stations(&cli.stations)?;
    if args.fetch {
        fs::create_dir_all(&args.blocks_dir)?;
        let cache_dir = args
            .cache_dir
            .clone()
            .unwrap_or_else(|| args.blocks_dir.join("cache"));
        let config = ApiConfig::from_env(&args.endpoint, &args.routing_profile, cache_dir);
        #[cfg(feature = "http")]
        let transport = rebalance::ingest::HttpTransport::new();
        #[cfg(not(feature = "http"))]
        let transport = CacheOnly;
        for (k, batch) in plan_batches(stations.len(), args.batch_size)?
            .iter()
            .enumerate()
        {
            let members: Vec<Station> = batch.iter().map(|&i| stations[i].clone()).collect();
            let block = fetch_block(&members, &config, &transport)
                .with_context(|| format!("fetching block {k}"))?;
            save_block(&block, args.blocks_dir.join(format!("block_{k:02}.json")))?;
        }
    }
    let blocks = load_blocks_dir(&args.blocks_dir)?;
    let (matrix, report) = stitch_with_report(&blocks, stations.len())?;
    save_matrix(&matrix, &args.out)?;
    println!(
        "stitched {} blocks into a {}x{} matrix ({} overlapping writes, {} conflicting)",
        report.blocks,
        matrix.n(),
        matrix.n(),
        report.overlapping_writes,
        report.conflicting_writes
    );
    Ok(true)
}

fn cmd_simulate(cli: &Cli, out: Option<&Path>) -> Result<bool> {
    let stations = load_stations(&cli.stations)?;
    let config = sim_config(cli)?;
    let state = generate_state(&stations, &config, &mut config.rng())?;
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => out_dir(cli)?.join("state.csv"),
    };
    save_state(&state, &path)?;
    println!("wrote {} ({} bikes)", path.display(), state.total_bikes());
    Ok(true)
}

fn write_plan(dir: &Path, doc: &PlanDocument, params: &CostParams) -> Result<()> {
    let name = doc.strategy.name();
    write(&dir.join(format!("plan_{name}.json")), &doc.to_json())?;
    write(
        &dir.join(format!("routes_{name}.txt")),
        &route_listing(&doc.plan, params),
    )
}

fn cmd_solve(cli: &Cli, strategy: Strategy, state_path: Option<&Path>) -> Result<bool> {
    let data = load_dataset(cli)?;
    let (spec, params) = load_spec(cli)?;
    let state = state_for(cli, &data, state_path)?;
    let plan = solve(
        strategy,
        &data.stations,
        &state,
        &data.matrix,
        &spec,
        &params,
    )?;
    let report = validate(&plan, &data.stations, &state, &data.matrix, &spec, &params);
    let dir = out_dir(cli)?;
    let doc = PlanDocument::new(strategy, plan, &state, &params);
    write_plan(dir, &doc, &params)?;
    write(
        &dir.join(format!("validation_{}.txt", strategy.name())),
        &report.summary(),
    )?;
    print!("{}", route_listing(&doc.plan, &params));
    if !report.is_valid() {
        eprint!("{}", report.summary());
    }
    Ok(report.is_valid())
}

fn cmd_compare(cli: &Cli, state_path: Option<&Path>) -> Result<bool> {
    let data = load_dataset(cli)?;
    let (spec, params) = load_spec(cli)?;
    let state = state_for(cli, &data, state_path)?;
    let metadata = RunMetadata {
        seed: state_path.is_none().then_some(cli.seed),
        slot: state_path.is_none().then(|| cli.slot.clone()),
        dataset_hash: Some(data.hash.clone()),
        state_hash: String::new(),
    };
    let comparison = run_compare(
        &data.stations,
        &state,
        &data.matrix,
        &spec,
        &params,
        metadata,
    )?;

    let dir = out_dir(cli)?;
    save_state(&state, dir.join("state.csv"))?;
    for (strategy, plan, report) in &comparison.plans {
        let doc = PlanDocument::new(*strategy, plan.clone(), &state, &params);
        write_plan(dir, &doc, &params)?;
        write(
            &dir.join(format!("validation_{}.txt", strategy.name())),
            &report.summary(),
        )?;
        if !report.is_valid() {
            eprintln!("{strategy}:");
            eprint!("{}", report.summary());
        }
    }
    let table = comparison.report.to_table();
    write(&dir.join("comparison.txt"), &table)?;
    write(&dir.join("comparison.json"), &comparison.report.to_json())?;
    print!("{table}");
    Ok(comparison.all_valid())
}

fn cmd_validate(cli: &Cli, plan_path: &Path, state_path: &Path) -> Result<bool> {
    let data = load_dataset(cli)?;
    let (spec, params) = load_spec(cli)?;
    let state = state_for(cli, &data, Some(state_path))?;
    let text = fs::read_to_string(plan_path)
        .with_context(|| format!("reading {}", plan_path.display()))?;
    let doc = PlanDocument::from_json(&text)
        .with_context(|| format!("parsing {}", plan_path.display()))?;
    let report = validate(
        &doc.plan,
        &data.stations,
        &state,
        &data.matrix,
        &spec,
        &params,
    );
    print!("{}", report.summary());
    Ok(report.is_valid())
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Matrix(args) => cmd_matrix(cli, args),
        Command::Simulate { out } => cmd_simulate(cli, out.as_deref()),
        Command::Solve { strategy, state } => cmd_solve(cli, *strategy, state.as_deref()),
        Command::Compare { state } => cmd_compare(cli, state.as_deref()),
        Command::Validate { plan, state } => cmd_validate(cli, plan, state),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INVALID),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
