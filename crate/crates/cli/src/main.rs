use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use shishkin_sdfem::harness::{
    discretize, run_decay, run_green, run_green_suite, run_solve, ExperimentConfig, ExperimentReport,
};
use shishkin_sdfem::mesh::{build_mesh, transition_parameters, MeshParams, ProblemSpec, Source};

/// SDFEM with crosswind diffusion on Shishkin meshes: solves, discrete
/// Green functions and weighted-norm experiments.
#[derive(Debug, Parser)]
#[command(name = "shishkin-sdfem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump the Shishkin mesh of the first N and eps as JSON.
    Mesh(Common),
    /// Solve the discrete problem for every (N, eps, source).
    Solve {
        #[command(flatten)]
        common: Common,
        /// Right-hand sides: zero, one, poly.
        #[arg(long, value_delimiter = ',')]
        source: Option<Vec<String>>,
        /// Write the matrix of the first (N, eps) in MatrixMarket format.
        #[arg(long)]
        matrix_market: Option<PathBuf>,
    },
    /// One Green function with its weighted norms and the per-node decay CSV.
    Green(Common),
    /// Green-function suite: norm breakdowns, coercivity and interpolation quantities.
    Verify(Common),
    /// Sup norms of the Green function outside the anchor neighbourhood.
    Decay {
        #[command(flatten)]
        common: Common,
        /// Exclusion exponents K of the neighbourhood {ω >= N^-K}.
        #[arg(long = "K", value_delimiter = ',')]
        big_k: Option<Vec<f64>>,
        /// Decay order v of the N^-v templates.
        #[arg(long)]
        v: Option<u32>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Convection field as `b1,b2`.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<f64>>,
    /// `center-of-s`, `x-node`, `y-node` or `i,j`.
    #[arg(long)]
    xstar: Option<String>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output prefix: writes `<out>.csv` and `<out>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    allow_non_assumption1: bool,
    /// Run sweep rows in parallel (reports keep their order).
    #[arg(long)]
    parallel: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.n {
            cfg.mesh.n = v.clone();
        }
        if let Some(v) = &self.eps {
            cfg.problem.eps = v.clone();
        }
        if let Some(v) = &self.b {
            let [b1, b2] = v[..] else {
                bail!("--b takes exactly two components, got {}", v.len());
            };
            cfg.problem.b = [b1, b2];
        }
        if let Some(v) = &self.k {
            cfg.green.k = v.clone();
        }
        if let Some(v) = &self.xstar {
            cfg.green.xstar = v.clone();
        }
        if let Some(v) = self.quad_order {
            cfg.green.quad_order = v;
        }
        if let Some(v) = self.tol {
            cfg.run.tol = v;
        }
        if let Some(v) = &self.out {
            cfg.run.out = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.run.seed = v;
        }
        cfg.mesh.allow_non_assumption1 |= self.allow_non_assumption1;
        cfg.run.parallel |= self.parallel;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit<R: Serialize, S: Serialize>(report: &ExperimentReport<R, S>, out: Option<&Path>) -> Result<()> {
    match out {
        Some(prefix) => {
            for p in report.write_files(prefix)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            report.write_csv(io::stdout().lock())?;
            eprintln!("{}", report.summary_json()?);
        }
    }
    Ok(())
}

fn mesh(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let spec = ProblemSpec::new(cfg.problem.eps[0], cfg.problem.b, Source::One)?;
    let params = MeshParams::new(cfg.mesh.n[0], spec)?;
    if !transition_parameters(&params).assumption1 && !cfg.mesh.allow_non_assumption1 {
        bail!("mesh parameters are outside the layer-resolving regime; pass --allow-non-assumption1");
    }
    let json = build_mesh(&params).to_json()?;
    match &cfg.run.out {
        Some(p) => std::fs::write(p, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Mesh(common) => mesh(&common)?,
        Command::Solve {
            common,
            source,
            matrix_market,
        } => {
            let mut cfg = common.config()?;
            if let Some(s) = source {
                cfg.problem.sources = s;
                cfg.validate()?;
            }
            if let Some(path) = matrix_market {
                let d = discretize(&cfg, cfg.mesh.n[0], cfg.problem.eps[0], Source::One)?;
                let mut f = io::BufWriter::new(File::create(&path)?);
                d.system.matrix.write_matrix_market(&mut f)?;
                f.flush()?;
                eprintln!("wrote {}", path.display());
            }
            emit(&run_solve(&cfg)?, cfg.run.out.as_deref())?;
        }
        Command::Green(common) => {
            let cfg = common.config()?;
            let run = run_green(&cfg)?;
            let json = serde_json::to_string_pretty(&run.summary)?;
            match &cfg.run.out {
                Some(prefix) => {
                    let mut csv_path = prefix.as_os_str().to_owned();
                    csv_path.push(".csv");
                    let mut json_path = prefix.as_os_str().to_owned();
                    json_path.push(".json");
                    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
                        std::fs::create_dir_all(dir)?;
                    }
                    run.profile.write_csv(File::create(&csv_path)?)?;
                    std::fs::write(&json_path, json)?;
                }
                None => {
                    run.profile.write_csv(io::stdout().lock())?;
                    eprintln!("{json}");
                }
            }
        }
        Command::Verify(common) => {
            let cfg = common.config()?;
            emit(&run_green_suite(&cfg)?, cfg.run.out.as_deref())?;
        }
        Command::Decay { common, big_k, v } => {
            let mut cfg = common.config()?;
            if let Some(k) = big_k {
                cfg.green.exclusion_k = k;
            }
            if let Some(v) = v {
                cfg.green.v = v;
            }
            cfg.validate()?;
            emit(&run_decay(&cfg)?, cfg.run.out.as_deref())?;
        }
    }
    Ok(())
}
