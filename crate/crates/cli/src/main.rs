use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmonic_stokes::report::{run, Command, MeshSource, RunConfig, DEFAULT_SEED};

/// Stabilized stream function / vorticity solver for 2D Stokes flow.
#[derive(Parser, Debug)]
#[command(name = "hstokes", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Solve the Bercovier-Engelman problem on one mesh.
    Solve(Common),
    /// Error table and fitted orders over a mesh family (at least 3 meshes).
    Convergence(Common),
    /// Lifts of one boundary hat and their non-harmonic parts for k = 0..=kmax.
    Harmonics(Common),
    /// Stability ratio scan and the empirical threshold level.
    Stability(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Mesh file(s), comma separated.
    #[arg(long, value_delimiter = ',', group = "source")]
    mesh: Vec<PathBuf>,
    /// Structured unit-square grid size(s) n, comma separated.
    #[arg(long, value_delimiter = ',', group = "source")]
    structured: Vec<usize>,
    /// Perturbed unit-square grid size(s) n, comma separated.
    #[arg(long, value_delimiter = ',', group = "source")]
    perturbed: Vec<usize>,
    /// Seed of the perturbed-grid generator.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Refinement level(s) of the harmonic space, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    k: Vec<usize>,
    /// Reference level for dual norms.
    #[arg(long)]
    kref: Option<usize>,
    /// Largest level for harmonics and stability.
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "quad-degree", default_value_t = 5)]
    quad_degree: usize,
    /// Coarse boundary vertex index for harmonics.
    #[arg(long)]
    vertex: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use the forcing with the second linear term sign as printed.
    #[arg(long)]
    paper_literal_forcing: bool,
    /// Include wall-clock timings (outputs are then no longer reproducible).
    #[arg(long)]
    record_timings: bool,
}

impl Common {
    fn into_config(self, command: Command) -> RunConfig {
        let seed = self.seed;
        let meshes: Vec<MeshSource> = if !self.mesh.is_empty() {
            self.mesh.into_iter().map(|path| MeshSource::File { path }).collect()
        } else if !self.structured.is_empty() {
            self.structured.into_iter().map(|n| MeshSource::Structured { n }).collect()
        } else {
            self.perturbed.into_iter().map(|n| MeshSource::Perturbed { n, seed }).collect()
        };
        RunConfig {
            command,
            meshes,
            k: self.k,
            kref: self.kref,
            kmax: self.kmax,
            delta: self.delta,
            tol: self.tol,
            quad_degree: self.quad_degree,
            out: self.out,
            paper_literal_forcing: self.paper_literal_forcing,
            vertex: self.vertex,
            seed,
            record_timings: self.record_timings,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match cli.command {
        Cmd::Solve(c) => c.into_config(Command::Solve),
        Cmd::Convergence(c) => c.into_config(Command::Convergence),
        Cmd::Harmonics(c) => c.into_config(Command::Harmonics),
        Cmd::Stability(c) => c.into_config(Command::Stability),
    };
    if cfg.meshes.is_empty() {
        eprintln!("error: one of --mesh, --structured or --perturbed is required");
        return ExitCode::from(1);
    }
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            log::debug!("{e:?}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
