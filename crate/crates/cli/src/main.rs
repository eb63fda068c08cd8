use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use shapeopt::diagnostics::{bump_velocity, fd_derivative_check};
use shapeopt::driver::run;
use shapeopt::io::{parse_config, OutputWriter, RunConfig};
use shapeopt::models::{evaluate, ModelProblem};

const OUTPUT_ENV: &str = "SHAPEOPT_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "shapeopt", version, about = "Level-set shape optimization on 2D P1 finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the optimization and write history.csv and VTK snapshots.
    Run {
        config: PathBuf,
        /// Override the seed of `random_pars`.
        #[arg(long)]
        seed: Option<u64>,
        /// Write 0 in the wall_ms column so histories are reproducible.
        #[arg(long)]
        no_timing: bool,
        /// Output directory; takes precedence over SHAPEOPT_OUTPUT_DIR and the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads for task-parallel state solves.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare a finite-difference quotient with the distributed derivative.
    CheckDerivative {
        config: PathBuf,
        /// Step size; defaults to verify.fd_step.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Time the state and adjoint solves serially and task-parallel.
    Bench {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
    /// Print mesh size, diameter and boundary tags.
    MeshInfo { config: PathBuf },
}

fn init_threads(n: usize) -> Result<()> {
    if n == 0 {
        bail!("--threads must be ≥ 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    Ok(parse_config(path)?)
}

fn cmd_run(config: PathBuf, seed: Option<u64>, no_timing: bool, output: Option<PathBuf>, threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        init_threads(n)?;
    }
    let mut cfg = load(&config)?;
    if let Some(s) = seed {
        cfg.params.random_pars.0 = s;
    }
    if no_timing {
        cfg.output.include_timing = false;
    }
    let dir = output.or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from)).unwrap_or_else(|| cfg.output.dir.clone());
    cfg.output.dir = dir.clone();
    let problem = cfg.build::<f64>()?;
    let model = problem.model.as_ref();
    if cfg.verify.fd_check {
        report_fd(model, &problem.phi0.phi, cfg.verify.fd_step, cfg.verify.fd_tol)?;
    }
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let mut writer = OutputWriter::create(&dir, model.space().mesh(), model.constraint_count(), &cfg.output)?;
    writer.snapshot("phi_initial", &problem.phi0.phi, None)?;
    let start = Instant::now();
    let outcome = run(model, &problem.phi0, &cfg.params, &mut writer).with_context(|| {
        format!("optimization aborted; completed iterations are in {}", dir.join("history.csv").display())
    })?;
    if cfg.output.final_snapshot {
        writer.snapshot("phi_final", &outcome.phi, None)?;
    }
    let last = outcome.history.last();
    println!(
        "{}: {} iterations ({}) in {:.1} s; J = {:.6e}, |C-1| = {:.3e}; output in {}",
        model.name(),
        outcome.history.len(),
        if outcome.stopped { "stopping criterion met" } else { "iteration limit" },
        start.elapsed().as_secs_f64(),
        last.map_or(f64::NAN, |r| r.cost),
        last.map_or(f64::NAN, |r| r.ctrn_err),
        dir.display()
    );
    Ok(())
}

fn report_fd(model: &dyn ModelProblem<f64>, phi: &shapeopt::fem::FemField<f64>, step: f64, tol: f64) -> Result<bool> {
    let theta = bump_velocity(&model.space().sibling(2)?);
    let r = fd_derivative_check(model, phi, &theta, step)?;
    let pass = r.passes(tol);
    println!("model          {}", model.name());
    println!("t              {:e}", r.t);
    println!("distributed    {:.10e}", r.dj);
    println!("fd(t)          {:.10e}  rel error {:.3e}", r.fd, r.rel_error);
    println!("fd(t/2)        {:.10e}  rel error {:.3e}", r.fd_half, r.rel_error_half);
    println!("{} (tolerance {:.0}%, error must shrink with t)", if pass { "PASS" } else { "FAIL" }, 100.0 * tol);
    Ok(pass)
}

fn cmd_check(config: PathBuf, step: Option<f64>) -> Result<()> {
    let cfg = load(&config)?;
    let problem = cfg.build::<f64>()?;
    if !report_fd(problem.model.as_ref(), &problem.phi0.phi, step.unwrap_or(cfg.verify.fd_step), cfg.verify.fd_tol)? {
        bail!("finite-difference check failed");
    }
    Ok(())
}

fn cmd_bench(config: PathBuf, threads: usize, repeats: usize) -> Result<()> {
    init_threads(threads)?;
    let cfg = load(&config)?;
    let problem = cfg.build::<f64>()?;
    let model = problem.model.as_ref();
    let phi = &problem.phi0.phi;
    let time = |parallel: bool| -> Result<(f64, usize)> {
        let mut best = f64::INFINITY;
        let mut systems = 0;
        for _ in 0..repeats.max(1) {
            let t = Instant::now();
            let ev = evaluate(model, phi, true, parallel)?;
            best = best.min(t.elapsed().as_secs_f64() * 1e3);
            systems = ev.states.len() + ev.adjoints.len();
        }
        Ok((best, systems))
    };
    let (serial, systems) = time(false)?;
    let (parallel, _) = time(true)?;
    println!("{:<16} {:>7} {:>7} {:>12} {:>12} {:>8}", "model", "threads", "systems", "serial_ms", "parallel_ms", "ratio");
    println!("{:<16} {:>7} {:>7} {:>12.2} {:>12.2} {:>8.3}", model.name(), threads, systems, serial, parallel, parallel / serial);
    Ok(())
}

fn cmd_mesh_info(config: PathBuf) -> Result<()> {
    let cfg = load(&config)?;
    let mesh = cfg.mesh.build::<f64>()?;
    println!("bounds         {:?}", mesh.bounds());
    println!("cells          {} x {}", mesh.nx(), mesh.ny());
    println!("vertices       {}", mesh.vertex_count());
    println!("triangles      {}", mesh.triangle_count());
    println!("area           {}", mesh.domain_area());
    println!("h              {:.6e}", mesh.mesh_diameter());
    println!("element size   {:.6e}", mesh.element_size());
    let mut tags: Vec<u32> = mesh.boundary_facets().iter().map(|f| f.tag).collect();
    tags.sort_unstable();
    tags.dedup();
    for t in tags {
        println!("tag {:<10} {} facets", t, mesh.facets_with_tag(t).count());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, no_timing, output, threads } => cmd_run(config, seed, no_timing, output, threads),
        Command::CheckDerivative { config, step } => cmd_check(config, step),
        Command::Bench { config, threads, repeats } => cmd_bench(config, threads, repeats),
        Command::MeshInfo { config } => cmd_mesh_info(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
