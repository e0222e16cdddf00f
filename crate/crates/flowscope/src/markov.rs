//! Random-walk operators on directed graphs.
//!
//! The teleportation-augmented transition matrix is never materialised for
//! large graphs. It is kept as a row-scaled sparse part plus a rank-one term,
//!
//!   M(alpha) = alpha * D_out^-1 * A  +  w * (1^T / N),
//!   w_i = (1 - alpha) + alpha * [out_degree_i == 0],
//!
//! so matrix-vector products from either side cost one sparse pass. The
//! continuous-time transition matrix exp(-t (I - M)) is evaluated through its
//! action on vectors by a scaled truncated Taylor series (uniformisation),
//! which preserves nonnegativity term by term.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::dense::DenseMatrix;
use crate::graph::DirectedGraph;
use crate::{Error, Result};

/// Discrete powers of M versus the continuous-time semigroup exp(-t(I - M)).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DynamicsKind {
    /// Directed walk with uniform teleportation at rate 1 - alpha (rate 1
    /// from dangling nodes).
    Teleport { alpha: f64 },
    /// Undirected combinatorial walk `exp(-t L / <d>)`, expressed as a lazy
    /// stochastic matrix I - L / d_max with rescaled time.
    Combinatorial,
}

/// Implicit teleportation-augmented Markov operator.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    n: usize,
    kind: DynamicsKind,
    dangling: Vec<u8>,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<f64>,
    rank_one_weights: Vec<f64>,
    // Continuous time is evaluated at t * time_scale; 1 except for the
    // combinatorial walk, where it absorbs d_max / <d>.
    time_scale: f64,
    dense_cap: usize,
    exp_tolerance: f64,
}

/// PageRank vector with convergence diagnostics.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub const DEFAULT_TELEPORT_ALPHA: f64 = 0.85;
pub const DEFAULT_POWER_TOL: f64 = 1e-12;
pub const DEFAULT_POWER_MAX_ITER: usize = 10_000;
const DEFAULT_DENSE_CAP: usize = 20_000;
const EXP_ACTION_TOL: f64 = 1e-13;
// Uniformisation splits large times so the leading Poisson weight e^-t never
// underflows.
const MAX_TIME_STEP: f64 = 64.0;

/// Builds the teleportation operator of a directed graph.
pub fn build_transition(g: &DirectedGraph, teleport_alpha: f64) -> Result<TransitionSystem> {
    if !(teleport_alpha > 0.0 && teleport_alpha < 1.0) {
        return Err(Error::Parameter(format!(
            "teleport_alpha must lie in (0, 1), got {teleport_alpha}"
        )));
    }
    let n = g.n_nodes();
    if n == 0 {
        return Err(Error::EmptyGraph("transition system needs nodes".into()));
    }
    let degrees = g.degree_vectors();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(g.n_edges());
    let mut values = Vec::with_capacity(g.n_edges());
    let mut dangling = vec![0u8; n];
    let mut rank_one_weights = vec![1.0 - teleport_alpha; n];
    row_offsets.push(0);
    for i in 0..n as u32 {
        let d = degrees.out_degree[i as usize];
        if d == 0.0 {
            dangling[i as usize] = 1;
            rank_one_weights[i as usize] = 1.0;
        } else {
            for (t, w) in g.out_edges(i) {
                col_indices.push(t);
                values.push(teleport_alpha * w / d);
            }
        }
        row_offsets.push(col_indices.len());
    }
    Ok(TransitionSystem {
        n,
        kind: DynamicsKind::Teleport {
            alpha: teleport_alpha,
        },
        dangling,
        row_offsets,
        col_indices,
        values,
        rank_one_weights,
        time_scale: 1.0,
        dense_cap: DEFAULT_DENSE_CAP,
        exp_tolerance: EXP_ACTION_TOL,
    })
}

/// Builds the combinatorial walk of an undirected graph (given with symmetric
/// directed edges): `P(t) = exp(-t (D - A) / <d>)`, encoded as the lazy
/// stochastic matrix `I - (D - A)/d_max` with time rescaled by `d_max / <d>`.
pub fn build_combinatorial(g: &DirectedGraph) -> Result<TransitionSystem> {
    let n = g.n_nodes();
    if n == 0 {
        return Err(Error::EmptyGraph("transition system needs nodes".into()));
    }
    let degrees = g.degree_vectors();
    for i in 0..n {
        if (degrees.in_degree[i] - degrees.out_degree[i]).abs() > 1e-12 {
            return Err(Error::Parameter(
                "combinatorial walk requires a symmetric adjacency".into(),
            ));
        }
    }
    let d_max = degrees
        .out_degree
        .iter()
        .fold(0.0f64, |acc, &d| acc.max(d));
    if d_max == 0.0 {
        return Err(Error::EmptyGraph(
            "combinatorial walk needs at least one edge".into(),
        ));
    }
    let mean_degree = degrees.out_degree.iter().sum::<f64>() / n as f64;
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for i in 0..n as u32 {
        let mut diagonal = 1.0 - degrees.out_degree[i as usize] / d_max;
        let mut row: Vec<(u32, f64)> = Vec::new();
        for (t, w) in g.out_edges(i) {
            if t == i {
                diagonal += w / d_max; // self-loop cancels in D - A
            } else {
                row.push((t, w / d_max));
            }
        }
        if diagonal != 0.0 {
            row.push((i, diagonal));
        }
        row.sort_unstable_by_key(|&(c, _)| c);
        for (c, v) in row {
            col_indices.push(c);
            values.push(v);
        }
        row_offsets.push(col_indices.len());
    }
    Ok(TransitionSystem {
        n,
        kind: DynamicsKind::Combinatorial,
        dangling: vec![0; n],
        row_offsets,
        col_indices,
        values,
        rank_one_weights: vec![0.0; n],
        time_scale: d_max / mean_degree,
        dense_cap: DEFAULT_DENSE_CAP,
        exp_tolerance: EXP_ACTION_TOL,
    })
}

impl TransitionSystem {
    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DynamicsKind {
        self.kind
    }

    pub fn dangling(&self) -> &[u8] {
        &self.dangling
    }

    pub fn rank_one_weights(&self) -> &[f64] {
        &self.rank_one_weights
    }

    pub fn set_dense_cap(&mut self, cap: usize) {
        self.dense_cap = cap;
    }

    /// y = M x.
    pub fn apply_right(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let uniform = x.iter().sum::<f64>() / self.n as f64;
        (0..self.n)
            .map(|i| {
                let mut acc = self.rank_one_weights[i] * uniform;
                for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                    acc += self.values[k] * x[self.col_indices[k] as usize];
                }
                acc
            })
            .collect()
    }

    /// y = x M for a row vector x.
    pub fn apply_left(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let teleport_mass: f64 = x
            .iter()
            .zip(&self.rank_one_weights)
            .map(|(xi, wi)| xi * wi)
            .sum::<f64>()
            / self.n as f64;
        let mut y = vec![teleport_mass; self.n];
        for i in 0..self.n {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                y[self.col_indices[k] as usize] += xi * self.values[k];
            }
        }
        y
    }

    /// Dense M; desk scale only.
    pub fn materialize(&self) -> Result<DenseMatrix> {
        self.check_dense_cap()?;
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let base = self.rank_one_weights[i] / self.n as f64;
            let row = m.row_mut(i);
            row.fill(base);
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                row[self.col_indices[k] as usize] += self.values[k];
            }
        }
        Ok(m)
    }

    fn check_dense_cap(&self) -> Result<()> {
        if self.n > self.dense_cap {
            return Err(Error::Parameter(format!(
                "dense matrix of size {0}x{0} exceeds cap {1}",
                self.n, self.dense_cap
            )));
        }
        Ok(())
    }

    /// Power iteration for pi = pi M from the uniform vector.
    pub fn stationary_distribution(
        &self,
        tol: f64,
        max_iter: usize,
    ) -> Result<StationaryDistribution> {
        if tol <= 0.0 {
            return Err(Error::Parameter(format!("tol must be > 0, got {tol}")));
        }
        let mut pi = vec![1.0 / self.n as f64; self.n];
        let mut residual = f64::INFINITY;
        for iteration in 0..=max_iter {
            let next = self.apply_left(&pi);
            residual = pi
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
            pi = next;
            // Renormalise against drift; row-stochasticity keeps this near 1.
            let sum: f64 = pi.iter().sum();
            for p in &mut pi {
                *p /= sum;
            }
            if residual <= tol {
                return Ok(StationaryDistribution {
                    pi,
                    residual,
                    iterations: iteration + 1,
                });
            }
        }
        Err(Error::Convergence {
            iterations: max_iter,
            residual,
        })
    }

    /// exp(-t (I - M)) applied to a column vector.
    pub fn exp_action_right(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.exp_action(x, t, Side::Right)
    }

    /// Row-vector action x exp(-t (I - M)).
    pub fn exp_action_left(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.exp_action(x, t, Side::Left)
    }

    fn exp_action(&self, x: &[f64], t: f64, side: Side) -> Vec<f64> {
        let tau = t * self.time_scale;
        debug_assert!(tau >= 0.0);
        if tau == 0.0 {
            return x.to_vec();
        }
        let steps = (tau / MAX_TIME_STEP).ceil().max(1.0) as usize;
        let step = tau / steps as f64;
        let tol = self.exp_tolerance / steps as f64;
        let mut v = x.to_vec();
        for _ in 0..steps {
            v = self.exp_action_step(v, step, side, tol);
        }
        v
    }

    fn exp_action_step(&self, x: Vec<f64>, tau: f64, side: Side, tol: f64) -> Vec<f64> {
        // Uniformisation: e^-tau sum_k tau^k/k! M^k x. All terms nonnegative
        // for nonnegative x, and the truncated Poisson tail bounds the error
        // because M is non-expansive in the relevant norm on each side.
        let mut weight = (-tau).exp();
        let mut accumulated = weight;
        let mut term = x;
        let mut result: Vec<f64> = term.iter().map(|&v| v * weight).collect();
        let k_max = (tau + 40.0 * (tau + 1.0).sqrt() + 64.0) as usize;
        for k in 1..=k_max {
            term = match side {
                Side::Right => self.apply_right(&term),
                Side::Left => self.apply_left(&term),
            };
            weight *= tau / k as f64;
            accumulated += weight;
            for (r, &tv) in result.iter_mut().zip(&term) {
                *r += weight * tv;
            }
            if 1.0 - accumulated < tol {
                break;
            }
        }
        result
    }

    /// Dense transition matrix P(t): M^t for integer discrete time, the
    /// matrix exponential action in continuous time. Rows are evaluated
    /// concurrently; entries are clamped to be nonnegative on output.
    pub fn transition_at_time(&self, t: f64, mode: WalkMode) -> Result<DenseMatrix> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Parameter(format!("time must be >= 0, got {t}")));
        }
        self.check_dense_cap()?;
        if mode == WalkMode::Discrete && t.fract() != 0.0 {
            return Err(Error::Parameter(format!(
                "discrete mode needs an integer time, got {t}"
            )));
        }
        let rows: Vec<Vec<f64>> = (0..self.n)
            .into_par_iter()
            .map(|i| {
                let mut e = vec![0.0; self.n];
                e[i] = 1.0;
                let mut row = match mode {
                    WalkMode::Discrete => {
                        let mut v = e;
                        for _ in 0..t as u64 {
                            v = self.apply_left(&v);
                        }
                        v
                    }
                    WalkMode::Continuous => self.exp_action_left(&e, t),
                };
                for v in &mut row {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                row
            })
            .collect();
        Ok(DenseMatrix::from_rows(rows))
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

/// Debug dump: two little-endian u64 (rows, cols) then row-major f64 values.
pub fn write_dense_dump<P: AsRef<Path>>(path: P, m: &DenseMatrix) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&(m.n_rows() as u64).to_le_bytes())?;
    f.write_all(&(m.n_cols() as u64).to_le_bytes())?;
    for &v in m.data() {
        f.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dense_dump<P: AsRef<Path>>(path: P) -> Result<DenseMatrix> {
    let mut f = std::fs::File::open(path)?;
    let mut buf8 = [0u8; 8];
    f.read_exact(&mut buf8)?;
    let rows = u64::from_le_bytes(buf8) as usize;
    f.read_exact(&mut buf8)?;
    let cols = u64::from_le_bytes(buf8) as usize;
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            f.read_exact(&mut buf8)?;
            m.set(i, j, f64::from_le_bytes(buf8));
        }
    }
    Ok(m)
}
