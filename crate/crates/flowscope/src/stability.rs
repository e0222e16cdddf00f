//! Markov Stability evaluation and optimisation.
//!
//! The quality of a partition H at Markov time t is the trace of the
//! clustered autocovariance H^T [Pi P(t) - pi^T pi] H. Directed walks make Q
//! asymmetric; optimisation runs on the symmetrised form (Q + Q^T)/2, whose
//! trace against any partition is identical. The optimiser keeps the walk
//! part W = sym(Pi P(t)) and the null term pi^T pi separate, so W can be
//! stored dense at desk scale or as a thresholded sparse matrix while the
//! rank-one null model stays exact.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::dense::{pairwise_sum, DenseMatrix};
use crate::graph::Partition;
use crate::markov::{StationaryDistribution, TransitionSystem, WalkMode};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A partition scored at one Markov time.
#[derive(Debug, Clone)]
pub struct StabilityScore {
    pub markov_time: f64,
    pub value: f64,
    pub partition: Partition,
}

/// Ensemble summary of one sweep point.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub markov_time: f64,
    pub best_partition: Partition,
    pub best_value: f64,
    pub n_communities: u32,
    pub mean_pairwise_vi: f64,
    pub n_runs: usize,
}

/// A contiguous span of Markov times sharing one optimal partition with a
/// quiet ensemble.
#[derive(Debug, Clone)]
pub struct RobustWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub partition: Partition,
    pub persistence: f64,
    pub mean_vi_in_window: f64,
}

/// Knobs that rarely move; defaults match the documented behaviour.
#[derive(Debug, Clone)]
pub struct StabilityOptions {
    /// Above this node count the clustered matrix is built sparse.
    pub dense_cap: usize,
    /// Sparse build drops symmetrised walk entries below this magnitude.
    pub sparse_threshold: f64,
    /// A node move must improve the objective by more than this to count.
    pub move_tolerance: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            dense_cap: 5_000,
            sparse_threshold: 1e-12,
            move_tolerance: 1e-12,
        }
    }
}

pub const DEFAULT_N_RUNS: usize = 100;
pub const DEFAULT_VI_THRESHOLD: f64 = 0.05;
// Ensembles past this size compare a fixed random subsample of pairs.
const VI_PAIR_EXHAUSTIVE_LIMIT: usize = 50;
const VI_PAIR_SAMPLE: usize = 1000;

fn validate_time(t: f64, mode: WalkMode) -> Result<()> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Parameter(format!(
            "markov time must be >= 0, got {t}"
        )));
    }
    if mode == WalkMode::Discrete && t.fract() != 0.0 {
        return Err(Error::Parameter(format!(
            "discrete mode needs integer markov times, got {t}"
        )));
    }
    Ok(())
}

fn validate_partition(partition: &Partition, n: usize) -> Result<()> {
    if partition.n_nodes() != n {
        return Err(Error::Dimension {
            expected: n,
            found: partition.n_nodes(),
        });
    }
    Ok(())
}

/// Markov Stability r(t, H) of a given partition, evaluated through the
/// implicit operator: sum_c (pi o 1_c) P(t) 1_c - sum_c (pi . 1_c)^2.
pub fn stability_score(
    ts: &TransitionSystem,
    pi: &StationaryDistribution,
    partition: &Partition,
    t: f64,
    mode: WalkMode,
) -> Result<StabilityScore> {
    validate_time(t, mode)?;
    validate_partition(partition, ts.n_nodes())?;
    let n = ts.n_nodes();
    let c = partition.n_communities() as usize;
    let terms: Vec<f64> = (0..c)
        .into_par_iter()
        .map(|comm| {
            let mut masked = vec![0.0; n];
            let mut pi_mass = 0.0;
            for i in 0..n {
                if partition.community_of(i as u32) == comm as u32 {
                    masked[i] = pi.pi[i];
                    pi_mass += pi.pi[i];
                }
            }
            let propagated = propagate_left(ts, &masked, t, mode);
            let mut retained = 0.0;
            for i in 0..n {
                if partition.community_of(i as u32) == comm as u32 {
                    retained += propagated[i];
                }
            }
            retained - pi_mass * pi_mass
        })
        .collect();
    Ok(StabilityScore {
        markov_time: t,
        value: pairwise_sum(&terms),
        partition: partition.clone(),
    })
}

fn propagate_left(ts: &TransitionSystem, x: &[f64], t: f64, mode: WalkMode) -> Vec<f64> {
    match mode {
        WalkMode::Discrete => {
            let mut v = x.to_vec();
            for _ in 0..t as u64 {
                v = ts.apply_left(&v);
            }
            v
        }
        WalkMode::Continuous => ts.exp_action_left(x, t),
    }
}

// ---------------------------------------------------------------------------
// Clustered matrix: W = sym(Pi P(t)) stored dense or sparse, null term exact.
// ---------------------------------------------------------------------------

/// Symmetrised walk matrix plus the stationary null vector. The effective
/// objective matrix is B_ij = walk_ij - pi_i pi_j.
pub struct ClusterMatrix {
    walk: WalkStorage,
    pi: Vec<f64>,
    /// Total absolute mass removed by sparse thresholding (0 for dense).
    pub dropped_mass: f64,
}

enum WalkStorage {
    Dense(DenseMatrix),
    Sparse {
        row_offsets: Vec<usize>,
        cols: Vec<u32>,
        vals: Vec<f64>,
    },
}

impl ClusterMatrix {
    fn n(&self) -> usize {
        self.pi.len()
    }

    fn for_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match &self.walk {
            WalkStorage::Dense(m) => {
                for (j, &v) in m.row(i).iter().enumerate() {
                    if v != 0.0 {
                        f(j, v);
                    }
                }
            }
            WalkStorage::Sparse {
                row_offsets,
                cols,
                vals,
            } => {
                for k in row_offsets[i]..row_offsets[i + 1] {
                    f(cols[k] as usize, vals[k]);
                }
            }
        }
    }

    /// r(H) = sum_c [ W(c,c) - pi(c)^2 ] evaluated exactly on this matrix.
    pub fn evaluate(&self, assignment: &[u32]) -> f64 {
        let n_comms = assignment.iter().copied().max().map_or(0, |m| m + 1) as usize;
        let mut walk_cc = vec![0.0; n_comms];
        for i in 0..self.n() {
            let ci = assignment[i] as usize;
            self.for_row(i, |j, v| {
                if assignment[j] as usize == ci {
                    walk_cc[ci] += v;
                }
            });
        }
        let mut pi_c = vec![0.0; n_comms];
        for (i, &c) in assignment.iter().enumerate() {
            pi_c[c as usize] += self.pi[i];
        }
        let terms: Vec<f64> = walk_cc.iter().zip(&pi_c).map(|(w, p)| w - p * p).collect();
        pairwise_sum(&terms)
    }
}

/// Builds the symmetrised clustered matrix for time t. Dense when the system
/// is at most `dense_cap` nodes, otherwise a thresholded sparse approximation
/// assembled from per-column actions of the implicit operator.
pub fn clustered_matrix(
    ts: &TransitionSystem,
    pi: &StationaryDistribution,
    t: f64,
    mode: WalkMode,
    options: &StabilityOptions,
) -> Result<ClusterMatrix> {
    validate_time(t, mode)?;
    let n = ts.n_nodes();
    if n <= options.dense_cap {
        let p = ts.transition_at_time(t, mode)?;
        let mut walk = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = 0.5 * (pi.pi[i] * p.get(i, j) + pi.pi[j] * p.get(j, i));
                walk.set(i, j, v);
                walk.set(j, i, v);
            }
        }
        return Ok(ClusterMatrix {
            walk: WalkStorage::Dense(walk),
            pi: pi.pi.clone(),
            dropped_mass: 0.0,
        });
    }

    let threshold = options.sparse_threshold;
    let columns: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = match mode {
                WalkMode::Discrete => {
                    let mut v = e;
                    for _ in 0..t as u64 {
                        v = ts.apply_right(&v);
                    }
                    v
                }
                WalkMode::Continuous => ts.exp_action_right(&e, t),
            };
            col.into_iter()
                .enumerate()
                .filter(|&(i, v)| pi.pi[i] * v != 0.0)
                .map(|(i, v)| (i as u32, pi.pi[i] * v))
                .collect()
        })
        .collect();
    // Symmetrise: entry (i, j) of Pi P contributes half to W_ij and W_ji.
    let mut rows: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n];
    for (j, col) in columns.iter().enumerate() {
        for &(i, q) in col {
            *rows[i as usize].entry(j as u32).or_insert(0.0) += 0.5 * q;
            *rows[j].entry(i).or_insert(0.0) += 0.5 * q;
        }
    }
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut dropped_mass = 0.0;
    row_offsets.push(0);
    for row in rows {
        let mut entries: Vec<(u32, f64)> = row.into_iter().collect();
        entries.sort_unstable_by_key(|&(c, _)| c);
        for (c, v) in entries {
            if v.abs() < threshold {
                dropped_mass += v.abs();
            } else {
                cols.push(c);
                vals.push(v);
            }
        }
        row_offsets.push(cols.len());
    }
    Ok(ClusterMatrix {
        walk: WalkStorage::Sparse {
            row_offsets,
            cols,
            vals,
        },
        pi: pi.pi.clone(),
        dropped_mass,
    })
}

// ---------------------------------------------------------------------------
// Louvain on the symmetrised matrix.
// ---------------------------------------------------------------------------

/// Greedy Louvain maximisation of the symmetrised stability objective.
/// Deterministic for a fixed seed: node visit order is a seeded shuffle per
/// pass, gain ties break toward the smallest community index.
pub fn louvain_optimize(
    ts: &TransitionSystem,
    pi: &StationaryDistribution,
    t: f64,
    mode: WalkMode,
    seed: u64,
) -> Result<StabilityScore> {
    louvain_optimize_with_options(ts, pi, t, mode, seed, &StabilityOptions::default())
}

pub fn louvain_optimize_with_options(
    ts: &TransitionSystem,
    pi: &StationaryDistribution,
    t: f64,
    mode: WalkMode,
    seed: u64,
    options: &StabilityOptions,
) -> Result<StabilityScore> {
    let matrix = clustered_matrix(ts, pi, t, mode, options)?;
    let (partition, value) = louvain_on_matrix(&matrix, seed, options);
    Ok(StabilityScore {
        markov_time: t,
        value,
        partition,
    })
}

/// Louvain node-move and aggregation loop on a prebuilt clustered matrix.
pub fn louvain_on_matrix(
    matrix: &ClusterMatrix,
    seed: u64,
    options: &StabilityOptions,
) -> (Partition, f64) {
    let n = matrix.n();
    let mut rng = SplitMix64::new(seed);
    let mut assignment: Vec<u32> = (0..n as u32).collect();

    let mut level_walk: Option<DenseMatrix> = None; // aggregated levels are dense
    let mut level_pi = matrix.pi.clone();
    loop {
        let level_n = level_pi.len();
        let mut comm: Vec<u32> = (0..level_n as u32).collect();
        let moved = match &level_walk {
            None => one_level(matrix, &mut comm, &mut rng, options),
            Some(dense) => {
                let as_matrix = ClusterMatrix {
                    walk: WalkStorage::Dense(dense.clone()),
                    pi: level_pi.clone(),
                    dropped_mass: 0.0,
                };
                one_level(&as_matrix, &mut comm, &mut rng, options)
            }
        };
        if !moved {
            break;
        }
        let compact = compact_labels(&comm);
        let n_next = (*compact.iter().max().unwrap() + 1) as usize;
        for a in &mut assignment {
            *a = compact[*a as usize];
        }
        // Aggregate walk and pi onto communities.
        let mut next_walk = DenseMatrix::zeros(n_next, n_next);
        match &level_walk {
            None => {
                for i in 0..level_n {
                    let ci = compact[i] as usize;
                    matrix.for_row(i, |j, v| {
                        next_walk.add_to(ci, compact[j] as usize, v);
                    });
                }
            }
            Some(dense) => {
                for i in 0..level_n {
                    let ci = compact[i] as usize;
                    for (j, &v) in dense.row(i).iter().enumerate() {
                        next_walk.add_to(ci, compact[j] as usize, v);
                    }
                }
            }
        }
        let mut next_pi = vec![0.0; n_next];
        for (i, &c) in compact.iter().enumerate() {
            next_pi[c as usize] += level_pi[i];
        }
        level_walk = Some(next_walk);
        level_pi = next_pi;
        if n_next == level_n {
            break;
        }
    }

    let partition = Partition::from_labels(&assignment).expect("non-empty assignment");
    let value = matrix.evaluate(partition.assignment());
    (partition, value)
}

fn compact_labels(raw: &[u32]) -> Vec<u32> {
    let used: BTreeSet<u32> = raw.iter().copied().collect();
    let remap: HashMap<u32, u32> = used
        .into_iter()
        .enumerate()
        .map(|(new, old)| (old, new as u32))
        .collect();
    raw.iter().map(|r| remap[r]).collect()
}

/// One Louvain level: repeated node-move passes until a full pass moves
/// nothing. `comm` starts as singletons; returns whether any node moved.
fn one_level(
    matrix: &ClusterMatrix,
    comm: &mut [u32],
    rng: &mut SplitMix64,
    options: &StabilityOptions,
) -> bool {
    let n = comm.len();
    let pi = &matrix.pi;
    let mut comm_pi: Vec<f64> = pi.clone();
    let mut comm_size: Vec<usize> = vec![1; n];
    let mut empty: BTreeSet<u32> = BTreeSet::new();

    let mut acc = vec![0.0f64; n];
    let mut is_touched = vec![false; n];
    let mut touched: Vec<u32> = Vec::with_capacity(64);
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut any_move = false;

    loop {
        rng.shuffle(&mut order);
        let mut moves_this_pass = 0usize;
        for &node in &order {
            let i = node as usize;
            let a = comm[i];
            // Walk weight from i into each adjacent community (self excluded).
            for &c in &touched {
                acc[c as usize] = 0.0;
                is_touched[c as usize] = false;
            }
            touched.clear();
            matrix.for_row(i, |j, v| {
                if j != i {
                    let cj = comm[j] as usize;
                    if !is_touched[cj] {
                        is_touched[cj] = true;
                        touched.push(cj as u32);
                    }
                    acc[cj] += v;
                }
            });
            if !is_touched[a as usize] {
                is_touched[a as usize] = true;
                touched.push(a);
            }
            let pi_i = pi[i];
            let w_a = acc[a as usize];
            let pi_a_rest = comm_pi[a as usize] - pi_i;

            // Candidates in ascending index so equal gains pick the smallest.
            touched.sort_unstable();
            let mut best = a;
            let mut best_gain = 0.0;
            for &c in &touched {
                if c == a {
                    continue;
                }
                let gain =
                    2.0 * (acc[c as usize] - w_a) - 2.0 * pi_i * (comm_pi[c as usize] - pi_a_rest);
                if gain > best_gain + options.move_tolerance {
                    best_gain = gain;
                    best = c;
                }
            }
            // Splitting off into an empty community also counts as a move
            // when i's links into its own community are a net cost.
            if comm_size[a as usize] > 1 {
                if let Some(&e) = empty.iter().next() {
                    let gain = -2.0 * w_a + 2.0 * pi_i * pi_a_rest;
                    if gain > best_gain + options.move_tolerance {
                        best = e;
                    }
                }
            }
            if best != a {
                comm[i] = best;
                comm_pi[a as usize] -= pi_i;
                comm_pi[best as usize] += pi_i;
                comm_size[a as usize] -= 1;
                comm_size[best as usize] += 1;
                if comm_size[a as usize] == 0 {
                    empty.insert(a);
                }
                empty.remove(&best);
                moves_this_pass += 1;
                any_move = true;
            }
        }
        if moves_this_pass == 0 {
            break;
        }
    }
    any_move
}

// ---------------------------------------------------------------------------
// Variation of information.
// ---------------------------------------------------------------------------

/// Normalised variation of information between two partitions of the same
/// node set: [H(p1|p2) + H(p2|p1)] / ln N, in [0, 1].
pub fn variation_of_information(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.n_nodes() != p2.n_nodes() {
        return Err(Error::Dimension {
            expected: p1.n_nodes(),
            found: p2.n_nodes(),
        });
    }
    let n = p1.n_nodes();
    if n < 2 {
        return Err(Error::Parameter(
            "variation of information needs at least 2 nodes".into(),
        ));
    }
    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    let mut marg1 = vec![0u64; p1.n_communities() as usize];
    let mut marg2 = vec![0u64; p2.n_communities() as usize];
    for i in 0..n as u32 {
        let (a, b) = (p1.community_of(i), p2.community_of(i));
        *joint.entry((a, b)).or_insert(0) += 1;
        marg1[a as usize] += 1;
        marg2[b as usize] += 1;
    }
    // Entropies are summed over sorted count multisets so the result is
    // bitwise symmetric in the two arguments.
    let entropy = |counts: &mut Vec<u64>| -> f64 {
        counts.sort_unstable();
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                -p * p.ln()
            })
            .sum::<f64>()
    };
    let mut joint_counts: Vec<u64> = joint.into_values().collect();
    let h_joint = entropy(&mut joint_counts);
    let h_marginals = entropy(&mut marg1) + entropy(&mut marg2);
    let vi = 2.0 * h_joint - h_marginals;
    Ok((vi / (n as f64).ln()).max(0.0))
}

// ---------------------------------------------------------------------------
// Sweep and robust-window selection.
// ---------------------------------------------------------------------------

/// Optimises stability over a grid of Markov times with a seeded ensemble per
/// time. Run r at every time uses seed base_seed + r; runs are independent
/// and evaluated concurrently with deterministic reduction.
pub fn stability_sweep(
    ts: &TransitionSystem,
    pi: &StationaryDistribution,
    times: &[f64],
    n_runs: usize,
    mode: WalkMode,
    base_seed: u64,
) -> Result<Vec<SweepRecord>> {
    stability_sweep_with_options(
        ts,
        pi,
        times,
        n_runs,
        mode,
        base_seed,
        &StabilityOptions::default(),
    )
}

pub fn stability_sweep_with_options(
    ts: &TransitionSystem,
    pi: &StationaryDistribution,
    times: &[f64],
    n_runs: usize,
    mode: WalkMode,
    base_seed: u64,
    options: &StabilityOptions,
) -> Result<Vec<SweepRecord>> {
    if times.is_empty() {
        return Err(Error::Parameter("sweep needs at least one time".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(
            "sweep times must be strictly increasing".into(),
        ));
    }
    if n_runs == 0 {
        return Err(Error::Parameter("n_runs must be >= 1".into()));
    }
    for &t in times {
        validate_time(t, mode)?;
    }

    let mut records = Vec::with_capacity(times.len());
    for (time_index, &t) in times.iter().enumerate() {
        let matrix = clustered_matrix(ts, pi, t, mode, options)?;
        let results: Vec<(Partition, f64)> = (0..n_runs)
            .into_par_iter()
            .map(|run| louvain_on_matrix(&matrix, base_seed + run as u64, options))
            .collect();
        let mut best = 0usize;
        for r in 1..n_runs {
            if results[r].1 > results[best].1 {
                best = r;
            }
        }
        let mean_pairwise_vi = ensemble_mean_vi(&results, base_seed, time_index as u64)?;
        let (best_partition, best_value) = results[best].clone();
        records.push(SweepRecord {
            markov_time: t,
            n_communities: best_partition.n_communities(),
            best_partition,
            best_value,
            mean_pairwise_vi,
            n_runs,
        });
    }
    Ok(records)
}

fn ensemble_mean_vi(results: &[(Partition, f64)], base_seed: u64, time_index: u64) -> Result<f64> {
    let n_runs = results.len();
    if n_runs < 2 {
        return Ok(0.0);
    }
    let total_pairs = n_runs * (n_runs - 1) / 2;
    let pairs: Vec<(usize, usize)> = if n_runs <= VI_PAIR_EXHAUSTIVE_LIMIT {
        (0..n_runs)
            .flat_map(|i| (i + 1..n_runs).map(move |j| (i, j)))
            .collect()
    } else {
        // Fixed subsample: deterministic in (base_seed, time_index) only.
        let mut rng = SplitMix64::new(SplitMix64::stream_seed(base_seed, 0x5653 ^ time_index));
        let mut chosen = HashSet::with_capacity(VI_PAIR_SAMPLE);
        let mut pairs = Vec::with_capacity(VI_PAIR_SAMPLE);
        while pairs.len() < VI_PAIR_SAMPLE.min(total_pairs) {
            let i = rng.next_below(n_runs);
            let j = rng.next_below(n_runs);
            if i == j {
                continue;
            }
            let key = (i.min(j), i.max(j));
            if chosen.insert(key) {
                pairs.push(key);
            }
        }
        pairs
    };
    let vis: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| variation_of_information(&results[i].0, &results[j].0))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&vis) / vis.len() as f64)
}

/// Maximal windows of consecutive sweep points whose best partition is
/// literally identical and whose ensemble VI stays at or below the threshold,
/// ranked by log-time persistence.
pub fn select_robust_partitions(
    sweep: &[SweepRecord],
    vi_threshold: f64,
) -> Result<Vec<RobustWindow>> {
    if sweep.is_empty() {
        return Err(Error::Parameter("empty sweep".into()));
    }
    let mut windows = Vec::new();
    let mut start = 0usize;
    while start < sweep.len() {
        if sweep[start].mean_pairwise_vi > vi_threshold {
            start += 1;
            continue;
        }
        let mut end = start;
        while end + 1 < sweep.len()
            && sweep[end + 1].mean_pairwise_vi <= vi_threshold
            && sweep[end + 1]
                .best_partition
                .same_grouping(&sweep[start].best_partition)
        {
            end += 1;
        }
        if end > start {
            let t_start = sweep[start].markov_time;
            let t_end = sweep[end].markov_time;
            let persistence = if t_start > 0.0 {
                (t_end / t_start).ln()
            } else {
                f64::INFINITY
            };
            let vis: Vec<f64> = sweep[start..=end]
                .iter()
                .map(|r| r.mean_pairwise_vi)
                .collect();
            windows.push(RobustWindow {
                t_start,
                t_end,
                partition: sweep[start].best_partition.clone(),
                persistence,
                mean_vi_in_window: pairwise_sum(&vis) / vis.len() as f64,
            });
        }
        start = end + 1;
    }
    windows.sort_by(|a, b| {
        b.persistence
            .partial_cmp(&a.persistence)
            .unwrap()
            .then(a.t_start.partial_cmp(&b.t_start).unwrap())
    });
    Ok(windows)
}

/// Logarithmically spaced time grid, inclusive of both ends.
pub fn log_time_grid(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) || steps < 2 {
        return Err(Error::Parameter(format!(
            "need 0 < t_min < t_max and steps >= 2, got [{t_min}, {t_max}] x {steps}"
        )));
    }
    let (lo, hi) = (t_min.ln(), t_max.ln());
    Ok((0..steps)
        .map(|i| (lo + (hi - lo) * i as f64 / (steps - 1) as f64).exp())
        .collect())
}

// ---------------------------------------------------------------------------
// File formats.
// ---------------------------------------------------------------------------

pub fn sweep_to_string(records: &[SweepRecord]) -> String {
    let mut out = String::from("markov_time,n_communities,best_value,mean_pairwise_vi\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.markov_time, r.n_communities, r.best_value, r.mean_pairwise_vi
        );
    }
    out
}

pub fn write_sweep_file<P: AsRef<Path>>(path: P, records: &[SweepRecord]) -> Result<()> {
    std::fs::write(path, sweep_to_string(records))?;
    Ok(())
}

pub fn partition_to_string(labels: &[String], partition: &Partition) -> String {
    let mut out = String::from("label,community_index\n");
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(out, "{label},{}", partition.community_of(i as u32));
    }
    out
}

pub fn write_partition_file<P: AsRef<Path>>(
    path: P,
    labels: &[String],
    partition: &Partition,
) -> Result<()> {
    std::fs::write(path, partition_to_string(labels, partition))?;
    Ok(())
}

/// Reads `label,community_index` rows; returns labels and raw community ids
/// in file order.
pub fn read_partition_file<P: AsRef<Path>>(path: P) -> Result<(Vec<String>, Vec<u32>)> {
    parse_partition_file(&std::fs::read_to_string(path)?)
}

pub fn parse_partition_file(content: &str) -> Result<(Vec<String>, Vec<u32>)> {
    let mut labels = Vec::new();
    let mut comms = Vec::new();
    for (line_no, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "label,community_index" {
            continue;
        }
        let (label, comm) = line.rsplit_once(',').ok_or(Error::Parse {
            line: line_no + 1,
            message: "expected label,community_index".into(),
        })?;
        let comm: u32 = comm.trim().parse().map_err(|_| Error::Parse {
            line: line_no + 1,
            message: format!("bad community index {comm:?}"),
        })?;
        labels.push(label.trim().to_owned());
        comms.push(comm);
    }
    if labels.is_empty() {
        return Err(Error::EmptyGraph("partition file has no rows".into()));
    }
    Ok((labels, comms))
}
