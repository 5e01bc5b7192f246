//! Configuration resolution: built-in defaults, then the flat config file,
//! then command-line flags. One `key = value` per line, `#` starts a comment.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use layercode::sim::{IntraLayer, PayloadParams, ServiceModel, SimConfig};

use crate::{Cli, Format, IntraLayerArg};

/// The five-worker reference system.
const DEFAULT_RATES: [f64; 5] = [385.95, 650.92, 373.40, 415.75, 373.98];
const DEFAULT_OMEGA_GRID: [f64; 6] = [1.0, 1.02, 1.04, 1.06, 1.08, 1.1];
const DEFAULT_DEADLINE_GRID: [f64; 7] = [5.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0];

const KNOWN_KEYS: [&str; 20] = [
    "mu",
    "lambda",
    "k",
    "omega",
    "m",
    "c",
    "gamma",
    "jobs",
    "seed",
    "deadline",
    "intra_layer",
    "purge_in_service",
    "service_model",
    "omega_grid",
    "deadline_grid",
    "format",
    "out",
    "payload_blocks_a",
    "payload_blocks_b",
    "payload_dims",
];

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

pub struct Settings {
    pub sim: SimConfig,
    pub omega_grid: Vec<f64>,
    pub deadline_grid: Vec<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let mut sim = SimConfig::new(DEFAULT_RATES.to_vec(), 0.01);
        sim.tasks_needed = 1000;
        sim.omega = 1.018;
        sim.chunks = 2;
        sim.task_complexity = 50.0;
        sim.num_jobs = 1000;
        sim.rng_seed = 1;
        let mut settings = Settings {
            sim,
            omega_grid: DEFAULT_OMEGA_GRID.to_vec(),
            deadline_grid: DEFAULT_DEADLINE_GRID.to_vec(),
            format: Format::Csv,
            out: None,
        };
        let mut seed_set = false;
        // Payload geometry gathered from file keys; assembled only when the
        // --with-payload flag asks for it.
        let mut payload_blocks: Option<(usize, usize)> = None;
        let mut payload_dims: Option<(usize, usize, usize, u64, u32)> = None;

        if let Some(path) = &cli.config {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            let values = parse_flat_config(&text).map_err(CliError::Config)?;
            for (key, value) in &values {
                apply_file_key(
                    &mut settings,
                    &mut seed_set,
                    &mut payload_blocks,
                    &mut payload_dims,
                    key,
                    value,
                )
                .map_err(|msg| CliError::Config(format!("key `{key}`: {msg}")))?;
            }
        }

        // Flags override file values.
        if let Some(seed) = cli.seed {
            settings.sim.rng_seed = seed;
            seed_set = true;
        }
        if !seed_set {
            if let Ok(env_seed) = std::env::var("LAYERCODE_SEED") {
                settings.sim.rng_seed = env_seed.parse().map_err(|_| {
                    CliError::Config(format!("LAYERCODE_SEED `{env_seed}` is not a u64"))
                })?;
            }
        }
        if let Some(jobs) = cli.jobs {
            settings.sim.num_jobs = jobs;
        }
        if let Some(omega) = cli.omega {
            settings.sim.omega = omega;
        }
        if let Some(m) = cli.m {
            settings.sim.chunks = m;
        }
        if let Some(deadline) = cli.deadline {
            settings.sim.deadline = Some(deadline);
        }
        if let Some(format) = cli.format {
            settings.format = format;
        }
        if let Some(mode) = cli.intra_layer {
            settings.sim.intra_layer = match mode {
                IntraLayerArg::Concurrent => IntraLayer::Concurrent,
                IntraLayerArg::Serial => IntraLayer::Serial,
            };
        }
        if let Some(out) = &cli.out {
            settings.out = Some(out.clone());
        }

        if cli.with_payload {
            settings.sim.payload = Some(build_payload(
                &settings.sim,
                payload_blocks,
                payload_dims,
            )?);
        }

        settings
            .sim
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(settings)
    }
}

fn apply_file_key(
    settings: &mut Settings,
    seed_set: &mut bool,
    payload_blocks: &mut Option<(usize, usize)>,
    payload_dims: &mut Option<(usize, usize, usize, u64, u32)>,
    key: &str,
    value: &str,
) -> Result<(), String> {
    match key {
        "mu" => settings.sim.worker_rates = parse_f64_list(value)?,
        "lambda" => settings.sim.arrival_rate = parse_f64(value)?,
        "k" => settings.sim.tasks_needed = parse_u64(value)?,
        "omega" => settings.sim.omega = parse_f64(value)?,
        "m" => settings.sim.chunks = parse_u64(value)? as usize,
        "c" => settings.sim.task_complexity = parse_f64(value)?,
        "gamma" => settings.sim.gamma = parse_f64(value)?,
        "jobs" => settings.sim.num_jobs = parse_u64(value)? as usize,
        "seed" => {
            settings.sim.rng_seed = parse_u64(value)?;
            *seed_set = true;
        }
        "deadline" => settings.sim.deadline = Some(parse_f64(value)?),
        "intra_layer" => {
            settings.sim.intra_layer = match value {
                "concurrent" => IntraLayer::Concurrent,
                "serial" => IntraLayer::Serial,
                other => return Err(format!("expected concurrent|serial, got `{other}`")),
            }
        }
        "purge_in_service" => {
            settings.sim.purge_in_service = value
                .parse::<bool>()
                .map_err(|_| format!("expected true|false, got `{value}`"))?
        }
        "service_model" => {
            settings.sim.service_model = match value {
                "exponential" => ServiceModel::Exponential,
                "deterministic" => ServiceModel::Deterministic,
                other => return Err(format!("expected exponential|deterministic, got `{other}`")),
            }
        }
        "omega_grid" => settings.omega_grid = parse_f64_list(value)?,
        "deadline_grid" => settings.deadline_grid = parse_f64_list(value)?,
        "format" => {
            settings.format = match value {
                "csv" => Format::Csv,
                "json" => Format::Json,
                other => return Err(format!("expected csv|json, got `{other}`")),
            }
        }
        "out" => settings.out = Some(PathBuf::from(value)),
        // payload_blocks_a / payload_blocks_b: coded block counts n1, n2.
        "payload_blocks_a" => {
            let n1 = parse_u64(value)? as usize;
            let n2 = payload_blocks.map(|(_, n2)| n2).unwrap_or(0);
            *payload_blocks = Some((n1, n2));
        }
        "payload_blocks_b" => {
            let n2 = parse_u64(value)? as usize;
            let n1 = payload_blocks.map(|(n1, _)| n1).unwrap_or(0);
            *payload_blocks = Some((n1, n2));
        }
        // payload_dims = inner, a_cols, b_cols, q, d
        "payload_dims" => {
            let parts = parse_f64_list(value)?;
            if parts.len() != 5 {
                return Err("expected 5 values: inner, a_cols, b_cols, q, d".into());
            }
            *payload_dims = Some((
                parts[0] as usize,
                parts[1] as usize,
                parts[2] as usize,
                parts[3] as u64,
                parts[4] as u32,
            ));
        }
        other => return Err(format!("unknown key `{other}` (known: {KNOWN_KEYS:?})")),
    }
    Ok(())
}

fn build_payload(
    sim: &SimConfig,
    blocks: Option<(usize, usize)>,
    dims: Option<(usize, usize, usize, u64, u32)>,
) -> Result<PayloadParams, CliError> {
    let k = sim.tasks_needed as usize;
    let (a_block_count, b_block_count) = match blocks {
        Some((n1, n2)) if n1 > 0 && n2 > 0 => (n1, n2),
        Some(_) => {
            return Err(CliError::Config(
                "both payload_blocks_a and payload_blocks_b must be set".into(),
            ))
        }
        None => {
            if k > 256 {
                return Err(CliError::Config(format!(
                    "payload mode with k = {k} needs explicit payload_blocks_a/b \
                     (and is meant for small k)"
                )));
            }
            // Most balanced factorization n1 * n2 = k.
            let n1 = (1..=k).filter(|d| k % d == 0).take_while(|&d| d * d <= k).last().unwrap_or(1);
            (n1, k / n1)
        }
    };
    let (inner_dim, a_cols, b_cols, alphabet_base, symbols_per_chunk) =
        dims.unwrap_or((4, 4, 4, 2, 4));
    Ok(PayloadParams {
        a_block_count,
        b_block_count,
        alphabet_base,
        symbols_per_chunk,
        inner_dim,
        a_cols,
        b_cols,
    })
}

fn parse_flat_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut seen = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected `key = value`", idx + 1));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some(first) = seen.insert(key.clone(), idx + 1) {
            return Err(format!(
                "line {}: key `{key}` already set on line {first}",
                idx + 1
            ));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn parse_f64(value: &str) -> Result<f64, String> {
    value
        .parse()
        .map_err(|_| format!("`{value}` is not a number"))
}

fn parse_u64(value: &str) -> Result<u64, String> {
    value
        .parse()
        .map_err(|_| format!("`{value}` is not a nonnegative integer"))
}

fn parse_f64_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|part| parse_f64(part.trim()))
        .collect()
}
