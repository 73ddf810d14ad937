use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;

use duplex_diffusion::dynamics::{MiMode, Population, SimRng};
use duplex_diffusion::engine::{
    self, emit_plot, final_comparison, format_value, read_csv, run_single, write_csv,
    ExperimentSpec,
};
use duplex_diffusion::measures::{optimal_cluster_count, MeasurementRecord};
use duplex_diffusion::network::{
    duplicate, generate_complete, generate_scale_free, generate_small_world,
};

#[derive(Parser)]
#[command(
    name = "duplex-diffusion",
    version,
    about = "Associative diffusion and preference contagion on duplex networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Complete,
    ScaleFree,
    SmallWorld,
}

#[derive(Clone, Copy, ValueEnum)]
enum MiModeArg {
    Sequential,
    AssociationCoupled,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a duplicated duplex network file.
    Generate {
        #[arg(long, value_enum)]
        topology: TopologyArg,
        #[arg(long)]
        n: usize,
        /// Defaults to 6 for scale-free and n / clusters - 1 for small-world.
        #[arg(long)]
        k_out: Option<usize>,
        #[arg(long, default_value_t = 5)]
        clusters: usize,
        #[arg(long, default_value_t = 0.1)]
        p_rewire: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single cell and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the config's model.alpha.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        /// Also save the final population as JSON.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Run every (alpha, replicate) cell and write one CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated, overrides the config.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        replicates: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot one measure from a results CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        measure: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        topology: Option<String>,
    },
    /// Final-time replicate statistics per topology and alpha.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Recompute measures from a saved population snapshot.
    Measure {
        #[arg(long)]
        population: PathBuf,
        #[arg(long, value_enum, default_value = "sequential")]
        mi_mode: MiModeArg,
        /// Also estimate the number of preference clusters.
        #[arg(long)]
        clusters: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Generate {
            topology,
            n,
            k_out,
            clusters,
            p_rewire,
            seed,
            out,
        } => {
            let layer = match topology {
                TopologyArg::Complete => generate_complete(n),
                TopologyArg::ScaleFree => generate_scale_free(n, k_out.unwrap_or(6), seed)?,
                TopologyArg::SmallWorld => {
                    let k_out = k_out.unwrap_or((n / clusters.max(1)).saturating_sub(1));
                    generate_small_world(n, clusters, k_out, p_rewire, seed)?
                }
            };
            duplicate(&layer).save(&out)?;
        }
        Command::Run {
            config,
            out,
            alpha,
            replicate,
            snapshot,
        } => {
            let spec = ExperimentSpec::load(&config)?;
            let alpha = alpha.unwrap_or(spec.model.alpha);
            let spec = ExperimentSpec {
                alphas: vec![alpha],
                ..spec
            };
            spec.validate()?;
            let rows = run_single(&spec, alpha, replicate)?;
            write_csv(&rows, &out)?;
            if let Some(path) = snapshot {
                let pop = engine::final_population(&spec, alpha, replicate)?;
                fs::write(path, serde_json::to_string(&pop)?)?;
            }
        }
        Command::Sweep {
            config,
            alphas,
            replicates,
            out,
        } => {
            let mut spec = ExperimentSpec::load(&config)?;
            if let Some(a) = alphas {
                spec.alphas = a;
            }
            if let Some(r) = replicates {
                spec.replicates = r;
            }
            engine::run_sweep_to_file(&spec, &out)?;
        }
        Command::Plot {
            input,
            measure,
            out,
            topology,
        } => {
            let rows = read_csv(&input)?;
            emit_plot(&rows, &measure, topology.as_deref(), &out)?;
        }
        Command::Summarize { input } => {
            let rows = read_csv(&input)?;
            let mut out = io::stdout().lock();
            writeln!(out, "topology,alpha,t,replicates,measure,mean,std,count")?;
            for s in final_comparison(&rows)? {
                for (name, m) in [
                    ("pref_similarity", s.pref_similarity),
                    ("pref_congruence", s.pref_congruence),
                    ("assoc_similarity", s.assoc_similarity),
                    ("mean_mutual_info", s.mean_mutual_info),
                ] {
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{}",
                        s.topology,
                        format_value(Some(s.alpha)),
                        s.t,
                        s.replicates,
                        name,
                        format_value(m.mean),
                        format_value(Some(m.std)),
                        m.count
                    )?;
                }
            }
        }
        Command::Measure {
            population,
            mi_mode,
            clusters,
            seed,
        } => {
            let pop: Population = serde_json::from_str(&fs::read_to_string(&population)?)?;
            let mode = match mi_mode {
                MiModeArg::Sequential => MiMode::Sequential,
                MiModeArg::AssociationCoupled => MiMode::AssociationCoupled,
            };
            let m = MeasurementRecord::capture(0, &pop, mode);
            println!("agents={}", pop.len());
            println!("pref_similarity={}", format_value(m.pref_similarity));
            println!("pref_congruence={}", format_value(m.pref_congruence));
            println!("assoc_similarity={}", format_value(m.assoc_similarity));
            println!(
                "mean_mutual_info={}",
                format_value(Some(m.mean_mutual_info))
            );
            println!(
                "interpretive_distance={}",
                format_value(m.interpretive_distance)
            );
            println!("excluded_pairs={}", m.excluded_pairs);
            if clusters {
                let mut rng = SimRng::seed_from_u64(seed);
                println!(
                    "cluster_count={}",
                    optimal_cluster_count(&pop, 8, 10, &mut rng)
                );
            }
        }
    }
    Ok(())
}
