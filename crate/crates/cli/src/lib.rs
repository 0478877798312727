//! Command-line front end: synthetic data, critical points, candidates,
//! batch selection and the HTTP server.

mod config;
mod pipeline;

use std::io::Write;
use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use isostream_core::topology::{extract_scalar_extrema, extract_vector_critical_points, CriticalPoint};
use isostream_core::volume::{
    generate_synthetic, load_svf, save_svf, FieldKind, SyntheticKind, SyntheticParams, SyntheticSpec,
};

pub use config::{framing_camera, IsosurfaceSpec, RunConfig};
pub use pipeline::{compute, load_candidates, records, run_select, write_outputs, RunProducts, RunSummary, OUTPUT_FILES};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Output(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<isostream_core::Error> for CliError {
    fn from(e: isostream_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "isostream", version, about = "Isosurfaces, critical points and entropy-selected streamlines")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Input SVF file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file (gen, candidates) or directory (select).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run configuration JSON.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for candidate generation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "ISOSTREAM_PORT", default_value_t = isostream_server::DEFAULT_PORT)]
    pub port: u16,
    /// Only log errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset.
    Gen {
        /// constant, linear, rotation, radial or double-source
        kind: String,
        nx: usize,
        ny: usize,
        nz: usize,
        /// Generator parameters as JSON.
        #[arg(long)]
        params: Option<String>,
        /// `x,y,z`
        #[arg(long, value_parser = parse_triple)]
        origin: Option<[f64; 3]>,
        /// `x,y,z`
        #[arg(long, value_parser = parse_triple)]
        spacing: Option<[f64; 3]>,
    },
    /// Print critical points as JSON lines.
    ExtractCp {
        /// Field to analyse; repeatable. Defaults to every field.
        #[arg(long)]
        field: Vec<String>,
        #[arg(long)]
        include_boundary: bool,
    },
    /// Trace candidate streamlines.
    Candidates,
    /// Run the full pipeline for one camera and write the outputs.
    Select,
    /// Start the HTTP server.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
    },
}

fn print_line<T: Serialize>(value: &T) -> Result<(), CliError> {
    let line = serde_json::to_string(value).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").map_err(|e| CliError::Output(format!("stdout: {e}")))
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|v: Vec<f64>| format!("expected 3 comma-separated numbers, got {}", v.len()))
}

/// Config file if given, else defaults around `--input`; flags override.
fn run_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match (&global.config, &global.input) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(input)) => RunConfig::new(input),
        (None, None) => return Err(CliError::Usage("need --config or --input".into())),
    };
    if let (Some(_), Some(input)) = (&global.config, &global.input) {
        cfg.input = input.clone();
    }
    if let Some(out) = &global.out {
        cfg.outputs = out.clone();
    }
    if let Some(seed) = global.seed {
        cfg.trace.rng_seed = Some(seed);
    }
    Ok(cfg)
}

fn gen(
    global: &GlobalArgs,
    kind: &str,
    dims: [usize; 3],
    params: Option<&str>,
    origin: Option<[f64; 3]>,
    spacing: Option<[f64; 3]>,
) -> Result<(), CliError> {
    let out = global.out.as_ref().ok_or_else(|| CliError::Usage("gen needs --out".into()))?;
    let kind: SyntheticKind = kind.parse().map_err(|e: isostream_core::Error| CliError::Usage(e.to_string()))?;
    let mut spec = SyntheticSpec::new(kind, dims);
    if let Some(p) = params {
        spec.params = serde_json::from_str::<SyntheticParams>(p).map_err(|e| CliError::Usage(format!("--params: {e}")))?;
    }
    if let Some(o) = origin {
        spec.origin = o;
    }
    spec.spacing = spacing.or(spec.spacing);
    let grid = generate_synthetic(&spec)?;
    save_svf(&grid, out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    log::info!("wrote {} ({}x{}x{})", out.display(), dims[0], dims[1], dims[2]);
    Ok(())
}

fn extract_cp(global: &GlobalArgs, fields: &[String], include_boundary: bool) -> Result<(), CliError> {
    let input = global.input.as_ref().ok_or_else(|| CliError::Usage("extract-cp needs --input".into()))?;
    let grid = load_svf(input)?;
    let names: Vec<String> = if fields.is_empty() {
        grid.fields().iter().map(|f| f.name.clone()).collect()
    } else {
        fields.to_vec()
    };
    let mut cps: Vec<CriticalPoint> = Vec::new();
    for name in &names {
        let found = match grid.field(name)?.kind {
            FieldKind::Scalar => extract_scalar_extrema(&grid, name, include_boundary)?,
            FieldKind::Vector3 => extract_vector_critical_points(&grid, name)?,
        };
        cps.extend(found);
    }
    for (id, cp) in cps.iter_mut().enumerate() {
        cp.id = id;
        print_line(cp)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CandidateCounts {
    candidate_count: usize,
    critical_candidate_count: usize,
}

fn candidates(global: &GlobalArgs) -> Result<(), CliError> {
    let cfg = run_config(global)?;
    let (_, _, candidates) = load_candidates(&cfg)?;
    if let Some(out) = &global.out {
        let bytes = serde_json::to_vec(&records(&candidates)).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(out, bytes).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    }
    print_line(&CandidateCounts {
        candidate_count: candidates.len(),
        critical_candidate_count: candidates.iter().filter(|c| c.from_critical.is_some()).count(),
    })
}

fn serve(port: u16, bind: IpAddr) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((bind, port))
            .await
            .map_err(|e| CliError::Output(format!("bind {bind}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| CliError::Internal(e.to_string()))?;
        print_line(&serde_json::json!({ "listening": addr.to_string() }))?;
        isostream_server::serve(listener, shutdown_signal())
            .await
            .map_err(|e| CliError::Internal(e.to_string()))
    })?;
    log::info!("shut down");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        if let Err(e) = tokio::signal::ctrl_c().await {
            log::error!("ctrl-c handler: {e}");
            std::future::pending::<()>().await;
        }
    };
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = ctrl_c => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => ctrl_c.await,
        }
    }
    #[cfg(not(unix))]
    ctrl_c.await;
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen { kind, nx, ny, nz, params, origin, spacing } => {
            gen(g, kind, [*nx, *ny, *nz], params.as_deref(), *origin, *spacing)
        }
        Command::ExtractCp { field, include_boundary } => extract_cp(g, field, *include_boundary),
        Command::Candidates => candidates(g),
        Command::Select => {
            let cfg = run_config(g)?;
            let summary = run_select(&cfg)?;
            log::info!("selected {} of {} candidates", summary.chosen, summary.candidate_count);
            print_line(&summary)
        }
        Command::Serve { bind } => serve(g.port, *bind),
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = if cli.global.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
