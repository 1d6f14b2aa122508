use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use kts::BasisKind;
use kts_cli::{
    cmd_bench, cmd_fixtures, cmd_intersect, cmd_solve, log_level, FixtureKind, FixtureParams, RunFlags, EXIT_ERROR,
};

/// Certified zeros of bivariate polynomial systems on the unit square.
///
/// Set KTS_LOG=quiet|info|trace to control logging; `trace` prints one line
/// per examined patch.
#[derive(Parser)]
#[command(name = "kts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a system2d problem file.
    Solve {
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        min_width: Option<f64>,
        #[arg(long)]
        max_patches: Option<usize>,
        /// Also estimate a lower bound of the condition number.
        #[arg(long)]
        cond: bool,
    },
    /// Intersect a line with a parametric surface (surface_line problem file).
    Intersect {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep only intersections with t >= 0.
        #[arg(long)]
        ray: bool,
        #[arg(long)]
        min_width: Option<f64>,
        #[arg(long)]
        max_patches: Option<usize>,
    },
    /// Run every problem file in a directory and print a CSV summary.
    Bench {
        dir: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a problem file: illconditioned, nearest_zero or random.
    Fixtures {
        kind: FixtureKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        u0: f64,
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["M", "N"])]
        deg: Option<Vec<usize>>,
        #[arg(long, default_value = "bernstein")]
        basis: BasisKind,
        #[arg(long, default_value_t = 20.0)]
        omega: f64,
        #[arg(long, num_args = 2, value_names = ["U", "V"], allow_negative_numbers = true)]
        x_star: Option<Vec<f64>>,
        /// Jacobian at x_star, row-major.
        #[arg(long, num_args = 4, value_names = ["A1", "A2", "A3", "A4"], allow_negative_numbers = true)]
        alpha: Option<Vec<f64>>,
        /// Random surface and line instead of a 2-system.
        #[arg(long)]
        surface: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve { file, out, min_width, max_patches, cond } => {
            let flags = RunFlags { min_width, max_patches, ray: false, cond };
            cmd_solve(&file, out.as_deref(), &flags)
        }
        Command::Intersect { file, out, ray, min_width, max_patches } => {
            let flags = RunFlags { min_width, max_patches, ray, cond: false };
            cmd_intersect(&file, out.as_deref(), &flags)
        }
        Command::Bench { dir, csv } => cmd_bench(&dir, csv.as_deref()),
        Command::Fixtures { kind, seed, eps, u0, v0, deg, basis, omega, x_star, alpha, surface, out } => {
            let mut params = FixtureParams { seed, eps, u0, v0, basis, omega, surface, ..FixtureParams::default() };
            if let Some(d) = deg {
                params.degrees = [d[0], d[1]];
            }
            if let Some(x) = x_star {
                params.x_star = [x[0], x[1]];
            }
            if let Some(a) = alpha {
                params.alpha = [a[0], a[1], a[2], a[3]];
            }
            cmd_fixtures(kind, &params, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log_level(std::env::var("KTS_LOG").ok().as_deref()))
        .format_timestamp(None)
        .init();
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
