//! Test-only oracles: dense, formula-literal implementations kept separate
//! from the production code paths they check.

use crate::dense::DenseMatrix;
use crate::graph::DirectedGraph;
use crate::rng::SplitMix64;

pub fn random_graph(n: usize, n_edges: usize, seed: u64) -> DirectedGraph {
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::new();
    for _ in 0..n_edges {
        let s = rng.next_below(n) as u32;
        let t = rng.next_below(n) as u32;
        if s != t {
            edges.push((s, t, 1.0 + rng.next_f64()));
        }
    }
    DirectedGraph::from_indexed_edges(n, &edges).unwrap()
}

/// Dense teleportation matrix straight from the defining formula:
/// alpha * Dout^-1 A + [(1-alpha) I + alpha diag(a)] 11^T / N.
pub fn dense_teleport(g: &DirectedGraph, alpha: f64) -> DenseMatrix {
    let n = g.n_nodes();
    let a = g.dense_adjacency();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let d: f64 = (0..n).map(|j| a.get(i, j)).sum();
        let teleport = if d == 0.0 { 1.0 } else { 1.0 - alpha };
        for j in 0..n {
            let walk = if d == 0.0 { 0.0 } else { alpha * a.get(i, j) / d };
            m.set(i, j, walk + teleport / n as f64);
        }
    }
    m
}

/// Dense exp(-t(I - M)) by Taylor with scaling and squaring on full matrices.
pub fn dense_walk_exponential(m: &DenseMatrix, t: f64) -> DenseMatrix {
    let n = m.n_rows();
    let mut b = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let iden = if i == j { 1.0 } else { 0.0 };
            b.set(i, j, -t * (iden - m.get(i, j)));
        }
    }
    let norm: f64 = (0..n)
        .map(|i| b.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = norm.log2().ceil().max(0.0) as u32;
    let scale = 2f64.powi(squarings as i32);
    let mut scaled = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            scaled.set(i, j, b.get(i, j) / scale);
        }
    }
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled);
        for i in 0..n {
            for j in 0..n {
                term.set(i, j, term.get(i, j) / k as f64);
                result.add_to(i, j, term.get(i, j));
            }
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

/// Dense clustered autocovariance Q = Pi P(t) - pi^T pi.
pub fn dense_autocovariance(m: &DenseMatrix, pi: &[f64], t: f64, discrete: bool) -> DenseMatrix {
    let n = m.n_rows();
    let p = if discrete {
        let mut p = DenseMatrix::identity(n);
        for _ in 0..t as u64 {
            p = p.matmul(m);
        }
        p
    } else {
        dense_walk_exponential(m, t)
    };
    let mut q = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            q.set(i, j, pi[i] * p.get(i, j) - pi[i] * pi[j]);
        }
    }
    q
}

/// r(t, H) summed directly over same-community entries of Q.
pub fn stability_from_q(q: &DenseMatrix, assignment: &[u32]) -> f64 {
    let n = q.n_rows();
    let mut r = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                r += q.get(i, j);
            }
        }
    }
    r
}

/// Visits every set partition of n elements as a restricted growth string.
pub fn for_each_set_partition(n: usize, mut f: impl FnMut(&[u32])) {
    assert!(n >= 1);
    let mut a = vec![0u32; n];
    let mut prefix_max = vec![0u32; n];
    loop {
        f(&a);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return;
            }
            if a[i] <= prefix_max[i - 1] {
                break;
            }
            i -= 1;
        }
        a[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(a[i]);
        for j in i + 1..n {
            a[j] = 0;
            prefix_max[j] = prefix_max[j - 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        for (n, bell) in [(1, 1), (3, 5), (5, 52), (7, 877)] {
            let mut count = 0usize;
            for_each_set_partition(n, |_| count += 1);
            assert_eq!(count, bell, "n={n}");
        }
    }
}
