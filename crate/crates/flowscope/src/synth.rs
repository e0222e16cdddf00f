//! Seeded benchmark generators with planted ground truth.
//!
//! Generation is pure integer RNG (SplitMix64 substreams per node), so the
//! same parameters and seed give the same edge list on every platform.

use crate::graph::{DirectedGraph, Partition};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A generated graph together with the partition the generator planted.
#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub graph: DirectedGraph,
    pub planted: Partition,
    pub params: String,
    pub seed: u64,
}

/// Directed stochastic block model: each ordered pair (i, j), i != j, gets an
/// edge with probability `p_in` when the nodes share a block and `p_out`
/// otherwise.
pub fn directed_sbm(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<PlantedGraph> {
    if block_sizes.is_empty() || block_sizes.contains(&0) {
        return Err(Error::Parameter("block sizes must all be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out >= p_in {
        return Err(Error::Parameter(format!(
            "need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    let n: usize = block_sizes.iter().sum();
    let mut block = Vec::with_capacity(n);
    for (b, &size) in block_sizes.iter().enumerate() {
        block.extend(std::iter::repeat_n(b as u32, size));
    }
    let mut edges = Vec::new();
    // One substream per source node: row generation order never matters.
    for i in 0..n {
        let mut rng = SplitMix64::new(SplitMix64::stream_seed(seed, i as u64));
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = if block[i] == block[j] { p_in } else { p_out };
            if rng.next_bernoulli(p) {
                edges.push((i as u32, j as u32, 1.0));
            }
        }
    }
    let graph = DirectedGraph::from_indexed_edges(n, &edges)?;
    let planted = Partition::from_assignment(block)?;
    Ok(PlantedGraph {
        graph,
        planted,
        params: format!("directed_sbm(blocks={block_sizes:?}, p_in={p_in}, p_out={p_out})"),
        seed,
    })
}

/// Layered flow graph: edges run only from layer l to layer l+1, each present
/// with probability `p_forward`. Layer 0 nodes are pure sources, the last
/// layer pure sinks.
pub fn layered_flow_graph(layer_sizes: &[usize], p_forward: f64, seed: u64) -> Result<PlantedGraph> {
    if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
        return Err(Error::Parameter(
            "need at least 2 layers, all of size >= 1".into(),
        ));
    }
    if !(p_forward > 0.0 && p_forward <= 1.0) {
        return Err(Error::Parameter(format!(
            "need 0 < p_forward <= 1, got {p_forward}"
        )));
    }
    let n: usize = layer_sizes.iter().sum();
    let mut layer = Vec::with_capacity(n);
    let mut layer_start = vec![0usize; layer_sizes.len() + 1];
    for (l, &size) in layer_sizes.iter().enumerate() {
        layer.extend(std::iter::repeat_n(l as u32, size));
        layer_start[l + 1] = layer_start[l] + size;
    }
    let mut edges = Vec::new();
    for i in 0..n {
        let l = layer[i] as usize;
        if l + 1 == layer_sizes.len() {
            continue;
        }
        let mut rng = SplitMix64::new(SplitMix64::stream_seed(seed, i as u64));
        for j in layer_start[l + 1]..layer_start[l + 2] {
            if rng.next_bernoulli(p_forward) {
                edges.push((i as u32, j as u32, 1.0));
            }
        }
    }
    let graph = DirectedGraph::from_indexed_edges(n, &edges)?;
    let planted = Partition::from_assignment(layer)?;
    Ok(PlantedGraph {
        graph,
        planted,
        params: format!("layered_flow_graph(layers={layer_sizes:?}, p_forward={p_forward})"),
        seed,
    })
}

/// Sidecar partition file contents (`label,community_index` with header).
pub fn planted_partition_file(pg: &PlantedGraph) -> String {
    let mut out = String::from("label,community_index\n");
    for (i, label) in pg.graph.labels().iter().enumerate() {
        out.push_str(&format!("{label},{}\n", pg.planted.community_of(i as u32)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_probabilities_give_disjoint_complete_digraphs() {
        let pg = directed_sbm(&[4, 4], 1.0, 0.0, 3).unwrap();
        assert_eq!(pg.graph.n_edges(), 2 * 4 * 3);
        let comps = pg.graph.weakly_connected_components();
        assert_eq!(comps.len(), 2);
        for (s, t, _) in pg.graph.edges() {
            assert_eq!(pg.planted.community_of(s), pg.planted.community_of(t));
        }
    }

    #[test]
    fn same_seed_same_edges() {
        let a = directed_sbm(&[10, 10], 0.3, 0.05, 99).unwrap();
        let b = directed_sbm(&[10, 10], 0.3, 0.05, 99).unwrap();
        let ea: Vec<_> = a.graph.edges().collect();
        let eb: Vec<_> = b.graph.edges().collect();
        assert_eq!(ea, eb);
        let c = directed_sbm(&[10, 10], 0.3, 0.05, 100).unwrap();
        assert_ne!(ea, c.graph.edges().collect::<Vec<_>>());
    }

    #[test]
    fn realized_density_near_expectation() {
        // Binomial(9800, 0.2) concentrated within +-0.05 of the mean with
        // probability far above 0.99; a fixed seed keeps this deterministic.
        let pg = directed_sbm(&[50, 50, 50, 50], 0.2, 0.01, 11).unwrap();
        let within_pairs = 4.0 * 50.0 * 49.0;
        let within = pg
            .graph
            .edges()
            .filter(|&(s, t, _)| pg.planted.community_of(s) == pg.planted.community_of(t))
            .count() as f64;
        let density = within / within_pairs;
        assert!((0.15..=0.25).contains(&density), "density {density}");
    }

    #[test]
    fn sbm_rejects_bad_parameters() {
        assert!(directed_sbm(&[], 0.5, 0.1, 0).is_err());
        assert!(directed_sbm(&[3, 0], 0.5, 0.1, 0).is_err());
        assert!(directed_sbm(&[3, 3], 0.1, 0.1, 0).is_err());
        assert!(directed_sbm(&[3, 3], 1.1, 0.1, 0).is_err());
    }

    #[test]
    fn two_layer_complete_bipartite_orientation() {
        let pg = layered_flow_graph(&[3, 3], 1.0, 5).unwrap();
        assert_eq!(pg.graph.n_edges(), 9);
        let d = pg.graph.degree_vectors();
        for i in 0..3 {
            assert_eq!(d.in_degree[i], 0.0);
            assert_eq!(d.out_degree[i], 3.0);
            assert_eq!(d.in_degree[i + 3], 3.0);
            assert_eq!(d.out_degree[i + 3], 0.0);
        }
    }

    #[test]
    fn middle_layer_has_flow_through() {
        let pg = layered_flow_graph(&[20, 20, 20], 0.5, 8).unwrap();
        let d = pg.graph.degree_vectors();
        let mid: Vec<usize> = (20..40).collect();
        assert!(mid.iter().any(|&i| d.in_degree[i] > 0.0));
        assert!(mid.iter().any(|&i| d.out_degree[i] > 0.0));
        for i in 0..20 {
            assert_eq!(d.in_degree[i], 0.0);
            assert_eq!(d.out_degree[i + 40], 0.0);
        }
    }

    #[test]
    fn layered_seeded_run_matches_golden_edge_list() {
        // Frozen from (layers=[2,2], p=0.5, seed=17); audited against the raw
        // substream draws: node 0 drew (0x9dbc.., 0x5507..) -> reject, accept;
        // node 1 drew (0xce91.., 0xd866..) -> reject, reject.
        let pg = layered_flow_graph(&[2, 2], 0.5, 17).unwrap();
        let got: Vec<(u32, u32)> = pg.graph.edges().map(|(s, t, _)| (s, t)).collect();
        assert_eq!(got, vec![(0, 3)]);
    }

    #[test]
    fn layered_rejects_bad_parameters() {
        assert!(layered_flow_graph(&[5], 0.5, 0).is_err());
        assert!(layered_flow_graph(&[5, 0], 0.5, 0).is_err());
        assert!(layered_flow_graph(&[5, 5], 0.0, 0).is_err());
        assert!(layered_flow_graph(&[5, 5], 1.5, 0).is_err());
    }
}
