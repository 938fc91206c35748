use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inkshade_cli::commands::{self, Exit, MetricsArgs, RenderArgs};
use inkshade_cli::scene::FixtureKind;

#[derive(Debug, Parser)]
#[command(name = "inkshade", version, about = "Render meshes as ink drawings and check the style metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a mesh to a PNG.
    Render {
        /// Mesh file (.obj or .ply) or builtin:NAME.
        #[arg(long)]
        mesh: String,
        /// Output PNG path.
        #[arg(long)]
        out: PathBuf,
        /// StyleParams JSON file; missing fields take their defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        /// orbit:AZ,EL[,FOV][@WxH], inline camera JSON, or a JSON file.
        #[arg(long)]
        camera: Option<String>,
        /// Directory that receives every intermediate buffer.
        #[arg(long)]
        dump_intermediates: Option<PathBuf>,
    },
    /// Render and write a style report; exits 5 when a gate fails.
    Metrics {
        #[arg(long)]
        mesh: Option<String>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        camera: Option<String>,
        /// Report JSON path.
        #[arg(long)]
        report: PathBuf,
        /// Measure shadow length on the pole-on-plane scene.
        #[arg(long, value_enum, default_value_t = FixtureKind::None)]
        fixture: FixtureKind,
        /// Optional CSV of the line brightness histogram.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Serve the tuning API.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of .obj/.ply meshes exposed by id (file name).
        #[arg(long)]
        mesh_dir: PathBuf,
    },
}

fn report(result: Result<String, commands::Failure>) -> ExitCode {
    match result {
        Ok(msg) => {
            eprintln!("{msg}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.exit.code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Render {
            mesh,
            out,
            params,
            camera,
            dump_intermediates,
        } => report(commands::render(&RenderArgs {
            mesh,
            out,
            params,
            camera,
            dump_intermediates,
        })),
        Command::Metrics {
            mesh,
            params,
            camera,
            report: path,
            fixture,
            histogram,
        } => report(commands::metrics(&MetricsArgs {
            mesh,
            params,
            camera,
            report: path,
            fixture,
            histogram,
        })),
        Command::Serve { port, host, mesh_dir } => {
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: cannot start runtime: {e}");
                    return ExitCode::from(Exit::Render.code());
                }
            };
            match runtime.block_on(inkshade_cli::server::serve(&host, port, mesh_dir)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(Exit::Load.code())
                }
            }
        }
    }
}
