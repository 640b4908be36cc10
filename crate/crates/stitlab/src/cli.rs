//! Command-line surface. Exit codes: 0 success, 1 validation error, 2 runtime
//! error, 3 acceptance-suite failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;
use stitlab_core::analytics::{self, DistributionSpec};
use stitlab_core::engine::Simulator;
use stitlab_core::mecke::{uniform_grid, MeckeSetup};
use stitlab_core::stream::stream;

use crate::config::{hash_json, ExperimentConfig, FunctionalSpec, SimulateConfig};
use crate::export::{self, TessDocument};
use crate::stats::MeanCi;
use crate::suite::{self, AcceptanceConfig};
use crate::{batch, verify};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

pub const THREADS_ENV: &str = "STITLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "stitlab", version, about = "STIT tessellation simulation and verification lab")]
pub struct Cli {
    /// Worker threads for replications (falls back to STITLAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one state from the [simulate] section and export it.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides simulate.output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample typical (j = 0) or length-weighted (j = 1) maximal segments as CSV.
    Palm {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Internal-vertex laws by quadrature.
    Analytic {
        #[command(subcommand)]
        which: AnalyticCommand,
    },
    /// Both sides of the Mecke-type identity from the [mecke] section.
    Mecke {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance suite and write JSON and Markdown reports.
    Verify {
        /// TOML with master_seed and an optional [acceptance] section.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Render a planar stit-tess/1 document as SVG.
    ExportSvg {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyticCommand {
    /// P(N = n) with quadrature error, as CSV.
    P1j {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        j: usize,
        /// A single count `n`, a range `a..b` or an inclusive range `a..=b`.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Closed-form mean and the summed series.
    Mean {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        j: usize,
        /// Terms summed explicitly before the closed-form tail.
        #[arg(long, default_value_t = 60)]
        n_max: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
    Acceptance,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            EXIT_VALIDATION
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
        Err(Failure::Acceptance) => EXIT_ACCEPTANCE,
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| invalid(format!("{THREADS_ENV}: not a thread count: {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(invalid("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::Runtime(e.into()))?;
    pool.install(|| match cli.command {
        Command::Simulate { config, seed, output } => simulate(&config, seed, output),
        Command::Palm { d, j, t, samples, seed, output } => palm(d, j, t, samples, seed, output),
        Command::Analytic { which } => analytic(which),
        Command::Mecke { config, seed, output } => mecke(&config, seed, output),
        Command::Verify { config, seed, out_dir } => verify_suite(config.as_deref(), seed, &out_dir),
        Command::ExportSvg { input, output } => export_svg(&input, output),
    })
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Runtime)?;
    let mut cfg = ExperimentConfig::from_toml(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(bytes).context("writing to stdout")?,
    }
    Ok(())
}

fn simulate(path: &Path, seed: Option<u64>, output: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load_config(path, seed)?;
    let sim_cfg = cfg.simulate.clone().ok_or_else(|| invalid(format!("{}: missing [simulate] section", path.display())))?;
    let hash = cfg.hash();
    let doc = simulate_document(&sim_cfg, cfg.master_seed, &hash)?;
    let json = serde_json::to_string_pretty(&doc).context("serializing state")?;
    let out = output.or_else(|| sim_cfg.output.as_ref().map(PathBuf::from));
    write_out(out.as_deref(), format!("{json}\n").as_bytes())?;
    if let Some(svg_path) = &sim_cfg.svg {
        let svg = export::render_svg(&doc).map_err(|e| Failure::Runtime(anyhow::anyhow!(e)))?;
        write_out(Some(Path::new(svg_path)), svg.as_bytes())?;
    }
    eprintln!(
        "simulated {} cells and {} maximal faces up to t = {} (config {hash})",
        doc.cells.len(),
        doc.maximal_faces.len(),
        doc.time
    );
    Ok(())
}

fn simulate_document(c: &SimulateConfig, seed: u64, hash: &str) -> Result<TessDocument, Failure> {
    let mut rng = stream(seed, "simulate", 0);
    Ok(match c.dimension {
        2 => {
            let sim = Simulator::new(c.measure.build::<2>("simulate.measure").map_err(invalid)?);
            export::document(&sim.run(c.window.polygon(), c.t, &mut rng).context("simulation")?, hash)
        }
        _ => {
            let sim = Simulator::new(c.measure.build::<3>("simulate.measure").map_err(invalid)?);
            export::document(&sim.run(c.window.polyhedron(), c.t, &mut rng).context("simulation")?, hash)
        }
    })
}

#[derive(Serialize)]
struct PalmArgs {
    d: usize,
    j: usize,
    t: f64,
    samples: usize,
    seed: u64,
}

fn palm(d: usize, j: usize, t: f64, samples: usize, seed: u64, output: Option<PathBuf>) -> Result<(), Failure> {
    DistributionSpec::new(d, j).map_err(invalid)?.with_t(t).validate().map_err(invalid)?;
    let hash = hash_json(&PalmArgs { d, j, t, samples, seed });
    let mut buf = Vec::new();
    writeln!(buf, "# stitlab palm d={d} j={j} t={t} samples={samples} seed={seed} config={hash}").unwrap();
    batch::write_csv(&mut buf, d, j, t, samples, seed)?;
    write_out(output.as_deref(), &buf)
}

#[derive(Serialize)]
struct AnalyticArgs<'a> {
    what: &'a str,
    d: usize,
    j: usize,
    n: &'a str,
    t: f64,
}

/// `n`, `a..b` or `a..=b`.
fn parse_counts(s: &str) -> Result<std::ops::RangeInclusive<u64>, String> {
    let bad = || format!("--n: expected n, a..b or a..=b, got {s:?}");
    let num = |x: &str| x.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..=") {
        let (a, b) = (num(a)?, num(b)?);
        return if a <= b { Ok(a..=b) } else { Err(bad()) };
    }
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        return if a < b { Ok(a..=b - 1) } else { Err(bad()) };
    }
    let n = num(s)?;
    Ok(n..=n)
}

fn analytic(which: AnalyticCommand) -> Result<(), Failure> {
    let mut out = String::new();
    use std::fmt::Write as _;
    match which {
        AnalyticCommand::P1j { d, j, n, t } => {
            let range = parse_counts(&n).map_err(Failure::Validation)?;
            let spec = DistributionSpec::new(d, j).map_err(invalid)?.with_t(t);
            spec.validate().map_err(invalid)?;
            let hash = hash_json(&AnalyticArgs { what: "p1j", d, j, n: &n, t });
            writeln!(out, "# stitlab analytic p1j d={d} j={j} t={t} config={hash}").unwrap();
            writeln!(out, "n,p,error").unwrap();
            for k in range {
                let e = analytics::p1j(k, &spec).context("quadrature")?;
                writeln!(out, "{k},{},{:e}", e.value, e.error).unwrap();
            }
        }
        AnalyticCommand::Mean { d, j, n_max } => {
            let spec = DistributionSpec::new(d, j).map_err(invalid)?;
            let closed = analytics::mean_internal_vertices(d, j).map_err(invalid)?;
            let summed = analytics::mean_by_summation(&spec, n_max).context("quadrature")?;
            let n_text = n_max.to_string();
            let hash = hash_json(&AnalyticArgs { what: "mean", d, j, n: &n_text, t: 1.0 });
            writeln!(out, "# stitlab analytic mean d={d} j={j} n_max={n_max} config={hash}").unwrap();
            writeln!(out, "closed_form,summed,error").unwrap();
            writeln!(out, "{closed},{},{:e}", summed.value, summed.error).unwrap();
        }
    }
    write_out(None, out.as_bytes())
}

#[derive(Serialize)]
struct MeckeOutput {
    format: &'static str,
    config_hash: String,
    master_seed: u64,
    functional: FunctionalSpec,
    lhs: MeanCi,
    rhs: MeanCi,
    overlap: bool,
}

fn mecke(path: &Path, seed: Option<u64>, output: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load_config(path, seed)?;
    let m = cfg.mecke.clone().ok_or_else(|| invalid(format!("{}: missing [mecke] section", path.display())))?;
    let sim = Simulator::new(m.measure.build::<2>("mecke.measure").map_err(invalid)?);
    let setup = MeckeSetup {
        window: m.window.polygon(),
        localization: m.localization.polygon(),
        region: m.region.as_ref().unwrap_or(&m.localization).polygon(),
        horizon: m.horizon,
    };
    let g = m.functional.functional();
    let grid = uniform_grid(m.horizon, m.grid_intervals);
    let lhs = verify::mecke_lhs(&sim, &setup, &g, m.replications, cfg.master_seed).context("left side")?;
    let rhs =
        verify::mecke_rhs(&sim, &setup, &g, m.replications, &grid, m.inner_mc, cfg.master_seed).context("right side")?;
    let report = MeckeOutput {
        format: "stitlab-mecke/1",
        config_hash: cfg.hash(),
        master_seed: cfg.master_seed,
        functional: m.functional,
        overlap: lhs.overlaps(&rhs),
        lhs,
        rhs,
    };
    let json = serde_json::to_string_pretty(&report).context("serializing report")?;
    let out = output.or_else(|| m.output.as_ref().map(PathBuf::from));
    write_out(out.as_deref(), format!("{json}\n").as_bytes())
}

pub const REPORT_JSON: &str = "acceptance_report.json";
pub const REPORT_MD: &str = "acceptance_report.md";

fn verify_suite(path: Option<&Path>, seed: Option<u64>, out_dir: &Path) -> Result<(), Failure> {
    let cfg = match path {
        Some(p) => load_config(p, seed)?,
        None => ExperimentConfig { master_seed: seed.unwrap_or(1), simulate: None, mecke: None, acceptance: None },
    };
    let acc = cfg.acceptance.clone().unwrap_or_else(AcceptanceConfig::default);
    let hash = cfg.hash();
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let report = suite::run_suite(&acc, cfg.master_seed, &hash).context("acceptance suite")?;
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let json = serde_json::to_string_pretty(&report).context("serializing report")?;
    write_out(Some(&out_dir.join(REPORT_JSON)), format!("{json}\n").as_bytes())?;
    write_out(Some(&out_dir.join(REPORT_MD)), report.markdown().as_bytes())?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn export_svg(input: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let doc: TessDocument = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", input.display())))?;
    let svg = export::render_svg(&doc).map_err(|e| invalid(format!("{}: {e}", input.display())))?;
    write_out(output.as_deref(), svg.as_bytes())
}
