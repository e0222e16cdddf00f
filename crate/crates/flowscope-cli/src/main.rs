//! flowscope: flow-based analysis of directed networks.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use flowscope::analysis;
use flowscope::graph;
use flowscope::markov::{self, WalkMode};
use flowscope::roles;
use flowscope::stability;
use flowscope::synth;

use flowscope_cli::config::RunConfig;
use flowscope_cli::pipeline::{self, write_report};

#[derive(Parser)]
#[command(name = "flowscope", version, about = "Flow-based directed-network analysis")]
struct Cli {
    /// Worker threads (default: available parallelism; env FLOWSCOPE_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Edge-list file (`source,target[,weight]` per line).
    #[arg(long)]
    input: PathBuf,
    /// Input rows carry a weight column.
    #[arg(long)]
    weighted: bool,
    /// Treat input edges as undirected (each row added both ways).
    #[arg(long)]
    undirected: bool,
}

impl InputArgs {
    fn load(&self) -> Result<graph::DirectedGraph> {
        Ok(graph::load_edge_list(
            &self.input,
            !self.undirected,
            self.weighted,
        )?)
    }
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[arg(long, default_value_t = markov::DEFAULT_TELEPORT_ALPHA)]
    teleport_alpha: f64,
    /// Walk mode: discrete or continuous.
    #[arg(long, default_value = "continuous")]
    mode: String,
    #[arg(long, default_value_t = 0.01)]
    t_min: f64,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    #[arg(long, default_value_t = 60)]
    t_steps: usize,
    #[arg(long, default_value_t = stability::DEFAULT_N_RUNS)]
    n_runs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl SweepArgs {
    fn mode(&self) -> Result<WalkMode> {
        match self.mode.as_str() {
            "discrete" => Ok(WalkMode::Discrete),
            "continuous" => Ok(WalkMode::Continuous),
            other => bail!("mode must be discrete or continuous, got {other:?}"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Override the configured base seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Load an edge list and report its components.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        output: PathBuf,
        /// Also write the largest weakly connected component's edge list.
        #[arg(long)]
        largest_component: bool,
    },
    /// Markov Stability sweep over a time grid.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// Select robust windows from a sweep directory.
    Communities {
        /// Directory previously written by `sweep`.
        #[arg(long)]
        sweep_dir: PathBuf,
        #[arg(long, default_value_t = stability::DEFAULT_VI_THRESHOLD)]
        vi_threshold: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Role-based similarity, RMST, and role extraction.
    Roles {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = roles::DEFAULT_RBS_ALPHA)]
        rbs_alpha: f64,
        /// Profile depth K_max (default: grown automatically).
        #[arg(long)]
        rbs_k_max: Option<usize>,
        #[arg(long, default_value_t = roles::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long, default_value_t = roles::DEFAULT_K_NEIGHBOR)]
        k_neighbor: usize,
        #[arg(long, default_value_t = stability::DEFAULT_VI_THRESHOLD)]
        vi_threshold: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Bridgeness of one ordered community pair.
    Bridgeness {
        #[command(flatten)]
        input: InputArgs,
        /// Partition file (label,community_index).
        #[arg(long)]
        partition: PathBuf,
        /// Community the information flows from.
        #[arg(long)]
        flow_from: u32,
        /// Community the information flows to.
        #[arg(long)]
        flow_to: u32,
        #[arg(long)]
        output: PathBuf,
    },
    /// Cross-tabulate two partition files with per-row chi-square.
    Crosstab {
        #[arg(long)]
        partition_a: PathBuf,
        #[arg(long)]
        partition_b: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Audience overlap of per-community follower sets.
    Audience {
        /// Follower-set file (community_label,follower_label per line).
        #[arg(long)]
        followers: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate benchmark graphs with planted ground truth.
    Synth {
        #[command(subcommand)]
        generator: SynthCommand,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Directed stochastic block model.
    Sbm {
        /// Comma-separated block sizes, e.g. 50,50,50,50.
        #[arg(long)]
        blocks: String,
        #[arg(long)]
        p_in: f64,
        #[arg(long)]
        p_out: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Layered flow graph (sources -> ... -> sinks).
    Layered {
        /// Comma-separated layer sizes, e.g. 20,20,20.
        #[arg(long)]
        layers: String,
        #[arg(long)]
        p_forward: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn parse_size_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .with_context(|| format!("bad size {p:?}"))
        })
        .collect()
}

fn init_workers(cli_workers: Option<usize>) -> Result<()> {
    let workers = cli_workers.or_else(|| {
        std::env::var("FLOWSCOPE_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = workers {
        if n == 0 {
            bail!("--workers must be >= 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    init_workers(cli.workers)?;
    match cli.command {
        Command::Run {
            config,
            output,
            seed,
        } => {
            let mut run = RunConfig::from_file(&config)?;
            if let Some(out) = output {
                run.output = out;
            }
            if let Some(seed) = seed {
                run.base_seed = seed;
            }
            pipeline::run_pipeline(&run)
        }
        Command::Ingest {
            input,
            output,
            largest_component,
        } => {
            let g = input.load()?;
            std::fs::create_dir_all(&output)?;
            let components = g.weakly_connected_components();
            let mut report = String::new();
            use std::fmt::Write as _;
            let _ = writeln!(report, "n_nodes = {}", g.n_nodes());
            let _ = writeln!(report, "n_edges = {}", g.n_edges());
            let _ = writeln!(report, "total_weight = {}", g.total_weight());
            let _ = writeln!(report, "n_components = {}", components.len());
            let sizes: Vec<String> = components.iter().map(|c| c.len().to_string()).collect();
            let _ = writeln!(report, "component_sizes = {}", sizes.join(","));
            write_report(&output.join("components.txt"), &report)?;
            if largest_component {
                let lcc = g.induced_subgraph_by_index(&components[0])?;
                write_report(&output.join("lcc_edges.csv"), &lcc.to_edge_list_string())?;
            }
            Ok(())
        }
        Command::Sweep {
            input,
            sweep,
            output,
        } => {
            let g = input.load()?;
            let mode = sweep.mode()?;
            std::fs::create_dir_all(&output)?;
            let ts = markov::build_transition(&g, sweep.teleport_alpha)?;
            let pi = ts.stationary_distribution(
                markov::DEFAULT_POWER_TOL,
                markov::DEFAULT_POWER_MAX_ITER,
            )?;
            let times =
                pipeline::time_grid_for_mode(mode, sweep.t_min, sweep.t_max, sweep.t_steps)?;
            let records =
                stability::stability_sweep(&ts, &pi, &times, sweep.n_runs, mode, sweep.seed)?;
            write_report(&output.join("sweep.csv"), &stability::sweep_to_string(&records))?;
            for (i, r) in records.iter().enumerate() {
                write_report(
                    &output.join(format!("partition_t{i}.csv")),
                    &stability::partition_to_string(g.labels(), &r.best_partition),
                )?;
            }
            Ok(())
        }
        Command::Communities {
            sweep_dir,
            vi_threshold,
            output,
        } => {
            let records = pipeline::read_sweep_dir(&sweep_dir)?;
            std::fs::create_dir_all(&output)?;
            let windows = stability::select_robust_partitions(&records, vi_threshold)?;
            write_report(&output.join("windows.csv"), &pipeline::windows_to_string(&windows))?;
            let (labels, _) =
                stability::read_partition_file(sweep_dir.join("partition_t0.csv"))?;
            for (i, w) in windows.iter().enumerate() {
                write_report(
                    &output.join(format!("window_{i}_partition.csv")),
                    &stability::partition_to_string(&labels, &w.partition),
                )?;
            }
            let chosen = pipeline::choose_partition(&windows, &records);
            write_report(
                &output.join("communities.csv"),
                &stability::partition_to_string(&labels, &chosen),
            )?;
            Ok(())
        }
        Command::Roles {
            input,
            sweep,
            rbs_alpha,
            rbs_k_max,
            gamma,
            k_neighbor,
            vi_threshold,
            output,
        } => {
            let g = input.load()?;
            let mode = sweep.mode()?;
            std::fs::create_dir_all(&output)?;
            let depth = match rbs_k_max {
                Some(k) => roles::ProfileDepth::Fixed(k),
                None => roles::ProfileDepth::Auto,
            };
            let profile = roles::profile_matrix(&g, rbs_alpha, depth)?;
            let similarity = roles::rbs_similarity(&profile);
            let rmst_graph = roles::rmst(&similarity, gamma, k_neighbor)?;
            let params = roles::RoleSweepParams {
                times: pipeline::time_grid_for_mode(mode, sweep.t_min, sweep.t_max, sweep.t_steps)?,
                n_runs: sweep.n_runs,
                mode,
                base_seed: sweep.seed,
                vi_threshold,
            };
            let report = roles::extract_roles(&g, &rmst_graph, &params)?;
            write_report(&output.join("roles.csv"), &roles::roles_to_string(g.labels(), &report))?;
            write_report(
                &output.join("role_summary.txt"),
                &roles::role_summary_to_string(&report),
            )?;
            Ok(())
        }
        Command::Bridgeness {
            input,
            partition,
            flow_from,
            flow_to,
            output,
        } => {
            let g = input.load()?;
            std::fs::create_dir_all(&output)?;
            let p = pipeline::partition_for_graph(&g, &partition)?;
            let report = analysis::edge_bridgeness(&g, &p, flow_from, flow_to)?;
            write_report(
                &output.join(format!("bridgeness_{flow_from}_to_{flow_to}.csv")),
                &analysis::bridgeness_to_string(&g, &report),
            )?;
            Ok(())
        }
        Command::Crosstab {
            partition_a,
            partition_b,
            output,
        } => {
            let (labels_a, comms_a) = stability::read_partition_file(&partition_a)?;
            let (labels_b, comms_b) = stability::read_partition_file(&partition_b)?;
            let pa = graph::Partition::from_labels(&comms_a)?;
            let pb = graph::Partition::from_labels(&comms_b)?;
            std::fs::create_dir_all(&output)?;
            let ct = analysis::cross_tabulate(&pa, &labels_a, &pb, &labels_b)?;
            write_report(&output.join("crosstab.csv"), &analysis::crosstab_to_string(&ct))?;
            Ok(())
        }
        Command::Audience { followers, output } => {
            let sets = analysis::load_follower_sets(&followers)?;
            std::fs::create_dir_all(&output)?;
            let report = analysis::audience_overlap(&sets)?;
            write_report(&output.join("audience.csv"), &analysis::overlap_to_string(&report))?;
            Ok(())
        }
        Command::Synth { generator } => {
            let (pg, output) = match generator {
                SynthCommand::Sbm {
                    blocks,
                    p_in,
                    p_out,
                    seed,
                    output,
                } => (
                    synth::directed_sbm(&parse_size_list(&blocks)?, p_in, p_out, seed)?,
                    output,
                ),
                SynthCommand::Layered {
                    layers,
                    p_forward,
                    seed,
                    output,
                } => (
                    synth::layered_flow_graph(&parse_size_list(&layers)?, p_forward, seed)?,
                    output,
                ),
            };
            std::fs::create_dir_all(&output)?;
            write_report(&output.join("edges.csv"), &pg.graph.to_edge_list_string())?;
            write_report(
                &output.join("planted_partition.csv"),
                &synth::planted_partition_file(&pg),
            )?;
            Ok(())
        }
    }
}
