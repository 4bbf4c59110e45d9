use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mfd3d::experiment::{generate_config_nodes, run_config, RunOptions};
use mfd3d::geometry::mesh_quality_stats;
use mfd3d::io::read_tetmesh;

#[derive(Parser)]
#[command(
    name = "mfd3d",
    version,
    about = "Meshless finite differences for the 3D Poisson problem"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a config file.
    Run {
        config: PathBuf,
        /// Overrides the seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Write each assembled matrix in Matrix Market format into DIR.
        #[arg(long, value_name = "DIR")]
        export_matrix: Option<PathBuf>,
        /// Write the stencils and weights of each run into DIR.
        #[arg(long, value_name = "DIR")]
        dump_stencils: Option<PathBuf>,
    },
    /// Generate the node sets of a config without solving.
    Nodes {
        config: PathBuf,
        #[arg(long, default_value = "nodes")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print shape quality statistics of a tetrahedral mesh.
    Quality { mesh: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> mfd3d::Result<()> {
    match command {
        Command::Run {
            config,
            seed,
            export_matrix,
            dump_stencils,
        } => {
            let opts = RunOptions {
                seed,
                export_matrix,
                dump_stencils,
            };
            for (name, rows) in run_config(&config, &opts)? {
                let failed = rows.iter().filter(|r| !r.e_ref.is_finite()).count();
                println!("{name}: {} rows, {failed} failed", rows.len());
            }
        }
        Command::Nodes { config, out, seed } => {
            for path in generate_config_nodes(&config, &out, seed)? {
                println!("{}", path.display());
            }
        }
        Command::Quality { mesh } => {
            let q = mesh_quality_stats(&read_tetmesh(&mesh)?)?;
            println!("tetrahedra {}", q.count);
            println!("gamma min {:.4} mean {:.4}", q.min, q.mean);
            for (label, frac) in ["(0,.25]", "(.25,.5]", "(.5,.75]", "(.75,1]"].iter().zip(q.bins) {
                println!("{label:>10} {:.4}", frac);
            }
        }
    }
    Ok(())
}
