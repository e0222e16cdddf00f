//! End-to-end pipeline: ingest -> dynamics -> sweep -> communities -> roles
//! -> bridgeness (-> cross-tab, audience) -> manifest.
//!
//! Every report is written to `<name>.partial` and renamed into place once
//! complete, so an aborted stage leaves earlier stages' outputs intact and
//! its own leftovers clearly marked.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use flowscope::analysis;
use flowscope::graph::{self, DirectedGraph, Partition};
use flowscope::markov;
use flowscope::roles;
use flowscope::stability::{self, RobustWindow, SweepRecord};

use crate::config::RunConfig;

pub fn write_report(path: &Path, content: &str) -> Result<()> {
    let partial = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.partial", ext.to_string_lossy()),
        None => "partial".to_string(),
    });
    std::fs::write(&partial, content)
        .with_context(|| format!("writing {}", partial.display()))?;
    std::fs::rename(&partial, path)
        .with_context(|| format!("finalizing {}", path.display()))?;
    Ok(())
}

struct Manifest {
    lines: Vec<String>,
    started: Instant,
}

impl Manifest {
    fn new(config: &RunConfig) -> Self {
        let mut lines = vec![
            "# flowscope run manifest".to_string(),
            format!("version = {}", env!("CARGO_PKG_VERSION")),
            format!(
                "started_unix_ms = {}",
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_millis())
                    .unwrap_or(0)
            ),
        ];
        lines.extend(config.to_key_values().lines().map(str::to_owned));
        Self {
            lines,
            started: Instant::now(),
        }
    }

    fn record(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key} = {value}"));
    }

    fn stage_done(&mut self, stage: &str, t0: Instant) {
        self.lines
            .push(format!("stage.{stage}.ms = {}", t0.elapsed().as_millis()));
    }

    fn finish(mut self, output: &Path, status: &str) -> Result<()> {
        self.lines
            .push(format!("total_ms = {}", self.started.elapsed().as_millis()));
        self.lines.push(format!("status = {status}"));
        write_report(&output.join("manifest.txt"), &(self.lines.join("\n") + "\n"))
    }
}

pub fn run_pipeline(config: &RunConfig) -> Result<()> {
    config.validate().context("stage config failed")?;
    std::fs::create_dir_all(&config.output)
        .with_context(|| format!("creating output dir {}", config.output.display()))?;
    let mut manifest = Manifest::new(config);
    match run_stages(config, &mut manifest) {
        Ok(()) => manifest.finish(&config.output, "ok"),
        Err(err) => {
            let _ = manifest.finish(&config.output, &format!("failed: {err:#}"));
            Err(err)
        }
    }
}

fn run_stages(config: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let out = &config.output;

    // Ingest: load, report components, keep the largest weakly connected one.
    let t0 = Instant::now();
    let full = graph::load_edge_list(&config.edge_list, config.directed, config.weighted)
        .context("stage ingest failed")?;
    let components = full.weakly_connected_components();
    let lcc_labels: Vec<String> = components[0]
        .iter()
        .map(|&i| full.label(i).to_owned())
        .collect();
    let g = full
        .induced_subgraph(&lcc_labels)
        .context("stage ingest failed")?;
    let mut report = String::new();
    let _ = writeln!(report, "n_nodes = {}", full.n_nodes());
    let _ = writeln!(report, "n_edges = {}", full.n_edges());
    let _ = writeln!(report, "total_weight = {}", full.total_weight());
    let _ = writeln!(report, "n_components = {}", components.len());
    let sizes: Vec<String> = components.iter().map(|c| c.len().to_string()).collect();
    let _ = writeln!(report, "component_sizes = {}", sizes.join(","));
    let _ = writeln!(report, "lcc_nodes = {}", g.n_nodes());
    let _ = writeln!(report, "lcc_edges = {}", g.n_edges());
    write_report(&out.join("components.txt"), &report)?;
    manifest.record("lcc_nodes", g.n_nodes());
    manifest.stage_done("ingest", t0);

    // Dynamics.
    let t0 = Instant::now();
    let ts = markov::build_transition(&g, config.teleport_alpha).context("stage dynamics failed")?;
    let pi = ts
        .stationary_distribution(markov::DEFAULT_POWER_TOL, markov::DEFAULT_POWER_MAX_ITER)
        .context("stage dynamics failed")?;
    manifest.record("pagerank_iterations", pi.iterations);
    manifest.stage_done("dynamics", t0);

    // Sweep.
    let t0 = Instant::now();
    let times = sweep_times(config).context("stage sweep failed")?;
    let sweep = stability::stability_sweep(&ts, &pi, &times, config.n_runs, config.mode, config.base_seed)
        .context("stage sweep failed")?;
    write_report(&out.join("sweep.csv"), &stability::sweep_to_string(&sweep))?;
    manifest.stage_done("sweep", t0);

    // Robust windows and the chosen community partition.
    let t0 = Instant::now();
    let windows = stability::select_robust_partitions(&sweep, config.vi_threshold)
        .context("stage communities failed")?;
    write_report(&out.join("windows.csv"), &windows_to_string(&windows))?;
    for (i, w) in windows.iter().enumerate() {
        write_report(
            &out.join(format!("window_{i}_partition.csv")),
            &stability::partition_to_string(g.labels(), &w.partition),
        )?;
    }
    let chosen = choose_partition(&windows, &sweep);
    write_report(
        &out.join("communities.csv"),
        &stability::partition_to_string(g.labels(), &chosen),
    )?;
    manifest.record("n_robust_windows", windows.len());
    manifest.record("chosen_n_communities", chosen.n_communities());
    manifest.stage_done("communities", t0);

    // Roles.
    let t0 = Instant::now();
    let depth = match config.rbs_k_max {
        Some(k) => roles::ProfileDepth::Fixed(k),
        None => roles::ProfileDepth::Auto,
    };
    let profile =
        roles::profile_matrix(&g, config.rbs_alpha, depth).context("stage roles failed")?;
    if profile.lambda_fallback {
        manifest.record("rbs_lambda_fallback", true);
    }
    let similarity = roles::rbs_similarity(&profile);
    let rmst_graph =
        roles::rmst(&similarity, config.gamma, config.k_neighbor).context("stage roles failed")?;
    let role_params = roles::RoleSweepParams {
        times: times.clone(),
        n_runs: config.n_runs,
        mode: config.mode,
        base_seed: config.base_seed,
        vi_threshold: config.vi_threshold,
    };
    let mut role_report =
        roles::extract_roles(&g, &rmst_graph, &role_params).context("stage roles failed")?;
    role_report.external_friend = Some(
        analysis::external_friend_proportion(&g, &chosen, &role_report.partition)
            .context("stage roles failed")?,
    );
    write_report(
        &out.join("roles.csv"),
        &roles::roles_to_string(g.labels(), &role_report),
    )?;
    write_report(
        &out.join("role_summary.txt"),
        &roles::role_summary_to_string(&role_report),
    )?;
    manifest.record("n_roles", role_report.roles.len());
    manifest.stage_done("roles", t0);

    // Bridgeness over ordered pairs of the largest communities.
    let t0 = Instant::now();
    let mut by_size: Vec<(usize, u32)> = chosen
        .sizes()
        .into_iter()
        .enumerate()
        .map(|(c, s)| (s, c as u32))
        .collect();
    by_size.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let top: Vec<u32> = by_size
        .iter()
        .take(config.top_communities)
        .map(|&(_, c)| c)
        .collect();
    for &from in &top {
        for &to in &top {
            if from == to {
                continue;
            }
            let report = analysis::edge_bridgeness(&g, &chosen, from, to)
                .context("stage bridgeness failed")?;
            write_report(
                &out.join(format!("bridgeness_{from}_to_{to}.csv")),
                &analysis::bridgeness_to_string(&g, &report),
            )?;
        }
    }
    manifest.stage_done("bridgeness", t0);

    // Cross-tabulation against a supplied partition, when given.
    if let Some(path) = &config.compare_partition {
        let t0 = Instant::now();
        let (labels_b, comms_b) =
            stability::read_partition_file(path).context("stage crosstab failed")?;
        let pb = Partition::from_labels(&comms_b).context("stage crosstab failed")?;
        let ct = analysis::cross_tabulate(&chosen, g.labels(), &pb, &labels_b)
            .context("stage crosstab failed")?;
        write_report(&out.join("crosstab.csv"), &analysis::crosstab_to_string(&ct))?;
        manifest.stage_done("crosstab", t0);
    }

    // Audience overlap, when follower sets are supplied.
    if let Some(path) = &config.follower_sets {
        let t0 = Instant::now();
        let sets = analysis::load_follower_sets(path).context("stage audience failed")?;
        let overlap = analysis::audience_overlap(&sets).context("stage audience failed")?;
        write_report(&out.join("audience.csv"), &analysis::overlap_to_string(&overlap))?;
        manifest.stage_done("audience", t0);
    }

    Ok(())
}

/// Markov-time grid for the configured mode: log-spaced for the continuous
/// walk, the same grid rounded to distinct integer steps for discrete powers.
pub fn sweep_times(config: &RunConfig) -> Result<Vec<f64>> {
    time_grid_for_mode(config.mode, config.t_min, config.t_max, config.t_steps)
}

pub fn time_grid_for_mode(
    mode: flowscope::markov::WalkMode,
    t_min: f64,
    t_max: f64,
    t_steps: usize,
) -> Result<Vec<f64>> {
    let grid = stability::log_time_grid(t_min, t_max, t_steps)?;
    match mode {
        flowscope::markov::WalkMode::Continuous => Ok(grid),
        flowscope::markov::WalkMode::Discrete => {
            let mut times: Vec<f64> = grid.into_iter().map(|t| t.round().max(1.0)).collect();
            times.dedup();
            if times.len() < 2 {
                return Err(anyhow!(
                    "discrete grid over [{t_min}, {t_max}] leaves fewer than 2 integer times"
                ));
            }
            Ok(times)
        }
    }
}

/// Most persistent robust window when one exists, otherwise the sweep point
/// with the quietest ensemble.
pub fn choose_partition(windows: &[RobustWindow], sweep: &[SweepRecord]) -> Partition {
    match windows.first() {
        Some(w) => w.partition.clone(),
        None => {
            sweep
                .iter()
                .min_by(|a, b| {
                    a.mean_pairwise_vi
                        .partial_cmp(&b.mean_pairwise_vi)
                        .unwrap()
                        .then(a.markov_time.partial_cmp(&b.markov_time).unwrap())
                })
                .expect("nonempty sweep")
                .best_partition
                .clone()
        }
    }
}

pub fn windows_to_string(windows: &[RobustWindow]) -> String {
    let mut out = String::from("t_start,t_end,n_communities,persistence,mean_vi\n");
    for w in windows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            w.t_start,
            w.t_end,
            w.partition.n_communities(),
            w.persistence,
            w.mean_vi_in_window
        );
    }
    out
}

/// Reconstructs sweep records from a sweep directory written by the `sweep`
/// subcommand (`sweep.csv` plus `partition_t<i>.csv` files).
pub fn read_sweep_dir(dir: &Path) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(dir.join("sweep.csv"))
        .with_context(|| format!("reading {}/sweep.csv", dir.display()))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().skip(1).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(anyhow!("sweep.csv row {}: expected 4 fields", i + 2));
        }
        let markov_time: f64 = fields[0].parse()?;
        let n_communities: u32 = fields[1].parse()?;
        let best_value: f64 = fields[2].parse()?;
        let mean_pairwise_vi: f64 = fields[3].parse()?;
        let (_, comms) = stability::read_partition_file(dir.join(format!("partition_t{i}.csv")))?;
        let best_partition = Partition::from_labels(&comms)?;
        records.push(SweepRecord {
            markov_time,
            n_communities,
            best_partition,
            best_value,
            mean_pairwise_vi,
            n_runs: 0,
        });
    }
    if records.is_empty() {
        return Err(anyhow!("sweep.csv has no records"));
    }
    Ok(records)
}

/// Aligns a `label,community` file to a graph's node order.
pub fn partition_for_graph(g: &DirectedGraph, path: &Path) -> Result<Partition> {
    let (labels, comms) = stability::read_partition_file(path)?;
    let mut assignment = vec![u32::MAX; g.n_nodes()];
    for (label, comm) in labels.iter().zip(&comms) {
        if let Some(idx) = g.index_of(label) {
            assignment[idx as usize] = *comm;
        }
    }
    if let Some(missing) = assignment.iter().position(|&c| c == u32::MAX) {
        return Err(anyhow!(
            "partition file {} does not cover node {:?}",
            path.display(),
            g.label(missing as u32)
        ));
    }
    Ok(Partition::from_labels(&assignment)?)
}
