//! `geolink`: linking integrals, oracles, kernel tables and Stokes checks from the command line.

mod scene;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use geolink_core::dinv::{hyperbolic_bump_form, hyperbolic_disk, sphere_cap, sphere_linear_form, Support};
use geolink_core::{
    convergence_run, kernel_for, oracle_linking, stokes_check, Error, LinkingOptions, Resolution, Space, SpacePoint,
    StokesResolution,
};
use scene::{Scene, SceneError};
use serde::Serialize;

const EXIT_NOT_CONVERGED: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "geolink", version, about = "Linking integrals on rank-one symmetric spaces")]
struct Cli {
    /// Worker thread cap.
    #[arg(long, global = true, env = "GEOLINK_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linking integrals for the pairs of a scene, refined until integer.
    Link {
        scene: PathBuf,
        /// Starting per-axis resolution (overrides the scene).
        #[arg(long)]
        resolution: Option<usize>,
        /// Integer-gap tolerance (overrides the scene).
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Integer linking numbers from the topological oracles.
    Oracle {
        scene: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Vertices per curve (surfaces use a square grid of this size).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// CSV table `d,lambda,eT,eiT,erest` of a kernel.
    KernelTable {
        #[arg(long)]
        space: String,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
    /// CSV table `resolution,residual` of the Stokes check on a builtin fixture.
    Stokes {
        #[arg(long, value_enum)]
        fixture: Fixture,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fixture {
    /// `2 <a, y> vol` on a cap of radius 1 in `S^2`.
    S2Cap,
    /// Compactly supported bump on a geodesic disk in `H^2`.
    H2Disk,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INVALID, message: message.into() }
    }
}

impl From<SceneError> for Failure {
    fn from(e: SceneError) -> Self {
        match e {
            SceneError::Parse(m) => Failure { code: EXIT_PARSE, message: format!("parse error: {m}") },
            SceneError::Invalid(m) => Failure::invalid(format!("invalid scene: {m}")),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let outcome = match cli.command {
        Command::Link { scene, resolution, tolerance, seed } => cmd_link(&scene, resolution, tolerance, seed, cli.threads),
        Command::Oracle { scene, seed, samples } => cmd_oracle(&scene, seed, samples),
        Command::KernelTable { space, degree, from, to, steps } => cmd_kernel_table(&space, degree, from, to, steps),
        Command::Stokes { fixture, levels } => cmd_stokes(fixture, levels),
    };
    match outcome {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("geolink: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[derive(Serialize)]
struct LinkDocument {
    run: LinkHeader,
    pair: Vec<PairRecord>,
}

#[derive(Serialize)]
struct LinkHeader {
    geolink_version: &'static str,
    space: String,
    seed: u64,
    threads: String,
    resolution: usize,
    budget: usize,
    tolerance: f64,
}

#[derive(Serialize)]
struct PairRecord {
    k: String,
    l: String,
    value: f64,
    nearest_integer: i64,
    integer_gap: f64,
    error_estimate: f64,
    converged: bool,
    levels: usize,
    nodes_k: usize,
    nodes_l: usize,
    min_distance: f64,
    skipped_pairs: usize,
}

fn render<T: Serialize>(doc: &T) -> Result<String, Failure> {
    toml::to_string(doc).map_err(|e| Failure { code: EXIT_INVALID, message: format!("cannot render document: {e}") })
}

fn pair_failure(a: &str, b: &str, e: Error) -> Failure {
    Failure::invalid(format!("pair ({a}, {b}): {e}"))
}

fn cmd_link(
    path: &std::path::Path,
    resolution: Option<usize>,
    tolerance: Option<f64>,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<(String, u8), Failure> {
    let Scene { space, submanifolds, pairs, mut run } = scene::load(path)?;
    run.resolution = resolution.unwrap_or(run.resolution);
    run.tolerance = tolerance.unwrap_or(run.tolerance);
    run.seed = seed.unwrap_or(run.seed);
    let options = LinkingOptions { tolerance: run.tolerance, ..LinkingOptions::default() };
    let mut records = vec![];
    let mut all_converged = true;
    for (a, b) in &pairs {
        let (k, l) = (&submanifolds[a], &submanifolds[b]);
        let start = Resolution::uniform(run.resolution, k.dim(), l.dim());
        let r = convergence_run(space, k, l, &start, run.budget, &options).map_err(|e| pair_failure(a, b, e))?;
        let last = r.last();
        let wall: f64 = r.results.iter().map(|x| x.wall_time.as_secs_f64()).sum();
        eprintln!("pair ({a}, {b}): {} levels in {wall:.3}s", r.results.len());
        all_converged &= r.converged;
        records.push(PairRecord {
            k: a.clone(),
            l: b.clone(),
            value: last.value,
            nearest_integer: last.nearest_integer,
            integer_gap: last.integer_gap,
            error_estimate: last.error_estimate,
            converged: r.converged,
            levels: r.results.len(),
            nodes_k: last.nodes_k,
            nodes_l: last.nodes_l,
            min_distance: last.min_distance,
            skipped_pairs: last.skipped_pairs,
        });
    }
    let doc = LinkDocument {
        run: LinkHeader {
            geolink_version: env!("CARGO_PKG_VERSION"),
            space: space.to_string(),
            seed: run.seed,
            threads: threads.map_or_else(|| "default".into(), |t| t.to_string()),
            resolution: run.resolution,
            budget: run.budget,
            tolerance: run.tolerance,
        },
        pair: records,
    };
    Ok((render(&doc)?, if all_converged { 0 } else { EXIT_NOT_CONVERGED }))
}

#[derive(Serialize)]
struct OracleDocument {
    run: OracleHeader,
    pair: Vec<OracleRecord>,
}

#[derive(Serialize)]
struct OracleHeader {
    geolink_version: &'static str,
    space: String,
    seed: u64,
    samples: usize,
}

#[derive(Serialize)]
struct OracleRecord {
    k: String,
    l: String,
    linking_number: i64,
    method: &'static str,
}

fn cmd_oracle(path: &std::path::Path, seed: Option<u64>, samples: Option<usize>) -> Result<(String, u8), Failure> {
    let Scene { space, submanifolds, pairs, run } = scene::load(path)?;
    let seed = seed.unwrap_or(run.seed);
    let samples = samples.unwrap_or(run.oracle_samples);
    let mut records = vec![];
    for (a, b) in &pairs {
        let r = oracle_linking(&submanifolds[a], &submanifolds[b], samples, seed).map_err(|e| pair_failure(a, b, e))?;
        records.push(OracleRecord { k: a.clone(), l: b.clone(), linking_number: r.linking_number, method: r.method });
    }
    let doc = OracleDocument {
        run: OracleHeader { geolink_version: env!("CARGO_PKG_VERSION"), space: space.to_string(), seed, samples },
        pair: records,
    };
    Ok((render(&doc)?, 0))
}

fn cmd_kernel_table(space: &str, degree: usize, from: f64, to: f64, steps: usize) -> Result<(String, u8), Failure> {
    let space: Space = space.parse().map_err(|e: Error| Failure::invalid(e.to_string()))?;
    let spec = kernel_for(space, degree).map_err(|e| Failure::invalid(e.to_string()))?;
    if steps == 0 {
        return Err(Failure::invalid("steps must be at least 1"));
    }
    let mut out = String::from("d,lambda,eT,eiT,erest\n");
    for i in 0..steps {
        let d = if steps == 1 { from } else { from + (to - from) * i as f64 / (steps - 1) as f64 };
        let row = spec.table_row(d).map_err(|e| Failure::invalid(format!("d = {d}: {e}")))?;
        let _ = writeln!(out, "{d:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", row[0], row[1], row[2], row[3]);
    }
    Ok((out, 0))
}

fn cmd_stokes(fixture: Fixture, levels: usize) -> Result<(String, u8), Failure> {
    if levels == 0 {
        return Err(Failure::invalid("levels must be at least 1"));
    }
    let invalid = |e: Error| Failure::invalid(e.to_string());
    let mut ladder = StokesResolution::ladder(levels);
    let (spec, omega, chain) = match fixture {
        Fixture::S2Cap => {
            let s2 = Space::sphere(2).map_err(invalid)?;
            (kernel_for(s2, 1).map_err(invalid)?, sphere_linear_form([0.3, 0.7, -0.2]), sphere_cap([0.36, -0.48, 0.8], 1.0).map_err(invalid)?)
        }
        Fixture::H2Disk => {
            let h2 = Space::hyperbolic(2).map_err(invalid)?;
            let center = SpacePoint::new(h2, vec![0.0, 0.0, 1.0]).map_err(invalid)?;
            let off = SpacePoint::new(h2, vec![0.3, -0.2, 1.13f64.sqrt()]).map_err(invalid)?;
            for r in &mut ladder {
                r.dinv.support = Some(Support { center: center.clone(), radius: 0.8 });
            }
            (kernel_for(h2, 1).map_err(invalid)?, hyperbolic_bump_form(0.8), hyperbolic_disk(&off, 0.5).map_err(invalid)?)
        }
    };
    let mut out = String::from("resolution,residual\n");
    for r in &ladder {
        let report = stokes_check(&spec, &omega, &chain, r).map_err(invalid)?;
        let _ = writeln!(out, "{},{:.16e}", r.boundary, report.residual);
    }
    Ok((out, 0))
}
