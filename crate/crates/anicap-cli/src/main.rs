use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anicap_cli::{run_config_file, Overrides, RunSummary, Task};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anicap", version, about = "Anisotropic capillary L_p-Minkowski toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and the artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// `N` for curves, `NxM` (rings x angles) for surfaces.
    #[arg(long)]
    resolution: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the capillary L_p-Minkowski problem.
    Solve(Common),
    /// Quermassintegrals, volumes, area measures and inequality slacks of a body.
    Measures(Common),
    /// Capillary p-sum of two bodies.
    Psum(Common),
    /// Convexity, symmetry and admissible contact angles of a norm.
    CheckNorm(Common),
    /// Anisotropic convexity of the cap boundary.
    CheckCondition(Common),
    /// Invariant suite; exit 1 if any check fails.
    Verify(Common),
    /// Run the task named in the config.
    Run(Common),
    /// Run several configs in a worker pool, each into its own directory.
    Batch {
        configs: Vec<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        /// Parent directory; each run writes to `<out>/<config stem>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn overrides(c: &Common) -> Overrides {
    Overrides { out: c.out.clone(), seed: c.seed, resolution: c.resolution.clone() }
}

fn print_summary(label: &str, s: &RunSummary, secs: f64) {
    match &s.error {
        Some((class, msg)) => {
            let line = serde_json::json!({ "config": label, "error": class, "message": msg, "exit": s.status });
            eprintln!("{line}");
        }
        None => {
            let dir = s.out_dir.as_ref().map(|d| d.display().to_string()).unwrap_or_default();
            eprintln!("{label}: exit {} in {secs:.2} s, report in {dir}/report.json", s.status);
        }
    }
}

fn single(task: Option<Task>, c: &Common) -> i32 {
    let t0 = Instant::now();
    let s = run_config_file(&c.config, task, &overrides(c));
    print_summary(&c.config.display().to_string(), &s, t0.elapsed().as_secs_f64());
    s.status
}

fn batch(configs: &[PathBuf], jobs: Option<usize>, out: Option<PathBuf>, seed: Option<u64>) -> i32 {
    let workers = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers.min(configs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = configs.get(i) else { break };
                let ov = Overrides {
                    out: out.as_ref().map(|o| o.join(path.file_stem().unwrap_or_default())),
                    seed,
                    resolution: None,
                };
                let t0 = Instant::now();
                let s = run_config_file(path, None, &ov);
                print_summary(&path.display().to_string(), &s, t0.elapsed().as_secs_f64());
                let mut w = worst.lock().unwrap();
                *w = (*w).max(s.status);
            });
        }
    });
    worst.into_inner().unwrap()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Solve(c) => single(Some(Task::Solve), c),
        Command::Measures(c) => single(Some(Task::Measures), c),
        Command::Psum(c) => single(Some(Task::Psum), c),
        Command::CheckNorm(c) => single(Some(Task::CheckNorm), c),
        Command::CheckCondition(c) => single(Some(Task::CheckCondition), c),
        Command::Verify(c) => single(Some(Task::Verify), c),
        Command::Run(c) => single(None, c),
        Command::Batch { configs, jobs, out, seed } => batch(configs, *jobs, out.clone(), *seed),
    };
    ExitCode::from(code as u8)
}
