//! Directed-graph representation and ingestion.
//!
//! Graphs are immutable after construction: node labels are fixed at first
//! appearance, duplicate input edges are aggregated by summing weights, and
//! adjacency is stored compressed in both directions so row (out-edge) and
//! column (in-edge) access are both cheap.

use std::collections::HashMap;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Weighted sparse directed graph with stable string node identities.
#[derive(Debug, Clone)]
pub struct DirectedGraph {
    labels: Vec<String>,
    label_index: HashMap<String, u32>,
    // CSR by row (out-edges) and by column (in-edges).
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    out_weights: Vec<f64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    in_weights: Vec<f64>,
}

impl DirectedGraph {
    /// Builds a graph from labelled edges. Duplicate (source, target) rows are
    /// summed. Node indices follow first appearance across `extra_labels` then
    /// the edge stream.
    pub fn from_labelled_edges<S: AsRef<str>>(
        edges: &[(S, S, f64)],
        extra_labels: &[S],
    ) -> Result<DirectedGraph> {
        let mut labels: Vec<String> = Vec::new();
        let mut label_index: HashMap<String, u32> = HashMap::new();
        let intern = |s: &str, labels: &mut Vec<String>, idx: &mut HashMap<String, u32>| {
            if let Some(&i) = idx.get(s) {
                i
            } else {
                let i = labels.len() as u32;
                labels.push(s.to_owned());
                idx.insert(s.to_owned(), i);
                i
            }
        };
        for l in extra_labels {
            intern(l.as_ref(), &mut labels, &mut label_index);
        }
        let mut weight_map: HashMap<(u32, u32), f64> = HashMap::new();
        for (s, t, w) in edges {
            if *w <= 0.0 || !w.is_finite() {
                return Err(Error::Parameter(format!(
                    "edge weight must be positive and finite, got {w}"
                )));
            }
            let si = intern(s.as_ref(), &mut labels, &mut label_index);
            let ti = intern(t.as_ref(), &mut labels, &mut label_index);
            *weight_map.entry((si, ti)).or_insert(0.0) += w;
        }
        Ok(Self::from_weight_map(labels, label_index, weight_map))
    }

    /// Builds a graph over `n` anonymous nodes (labels "n0".."n{N-1}").
    pub fn from_indexed_edges(n: usize, edges: &[(u32, u32, f64)]) -> Result<DirectedGraph> {
        let labels: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
        let mut weight_map: HashMap<(u32, u32), f64> = HashMap::new();
        for &(s, t, w) in edges {
            if s as usize >= n || t as usize >= n {
                return Err(Error::Parameter(format!(
                    "edge ({s}, {t}) out of range for {n} nodes"
                )));
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::Parameter(format!(
                    "edge weight must be positive and finite, got {w}"
                )));
            }
            *weight_map.entry((s, t)).or_insert(0.0) += w;
        }
        Ok(Self::from_weight_map(labels, label_index, weight_map))
    }

    fn from_weight_map(
        labels: Vec<String>,
        label_index: HashMap<String, u32>,
        weight_map: HashMap<(u32, u32), f64>,
    ) -> DirectedGraph {
        let n = labels.len();
        let mut edges: Vec<(u32, u32, f64)> = weight_map
            .into_iter()
            .map(|((s, t), w)| (s, t, w))
            .collect();
        edges.sort_unstable_by_key(|&(s, t, _)| (s, t));

        let mut out_offsets = vec![0usize; n + 1];
        for &(s, _, _) in &edges {
            out_offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let out_targets: Vec<u32> = edges.iter().map(|&(_, t, _)| t).collect();
        let out_weights: Vec<f64> = edges.iter().map(|&(_, _, w)| w).collect();

        let mut in_counts = vec![0usize; n];
        for &(_, t, _) in &edges {
            in_counts[t as usize] += 1;
        }
        let mut in_offsets = vec![0usize; n + 1];
        for i in 0..n {
            in_offsets[i + 1] = in_offsets[i] + in_counts[i];
        }
        let mut fill = in_offsets.clone();
        let mut in_sources = vec![0u32; edges.len()];
        let mut in_weights = vec![0.0; edges.len()];
        for &(s, t, w) in &edges {
            let pos = fill[t as usize];
            in_sources[pos] = s;
            in_weights[pos] = w;
            fill[t as usize] += 1;
        }

        DirectedGraph {
            labels,
            label_index,
            out_offsets,
            out_targets,
            out_weights,
            in_offsets,
            in_sources,
            in_weights,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.out_targets.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.out_weights.iter().sum()
    }

    pub fn label(&self, i: u32) -> &str {
        &self.labels[i as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<u32> {
        self.label_index.get(label).copied()
    }

    /// Out-edges of `i` as (target, weight), ascending by target.
    pub fn out_edges(&self, i: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let r = self.out_offsets[i as usize]..self.out_offsets[i as usize + 1];
        self.out_targets[r.clone()]
            .iter()
            .copied()
            .zip(self.out_weights[r].iter().copied())
    }

    /// Out-edges of `i` with their stable edge ids (positions in 0..E).
    pub fn out_edges_with_index(&self, i: u32) -> impl Iterator<Item = (usize, u32)> + '_ {
        let r = self.out_offsets[i as usize]..self.out_offsets[i as usize + 1];
        r.clone().zip(self.out_targets[r].iter().copied())
    }

    /// In-edges of `i` as (source, weight), ascending by source.
    pub fn in_edges(&self, i: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let r = self.in_offsets[i as usize]..self.in_offsets[i as usize + 1];
        self.in_sources[r.clone()]
            .iter()
            .copied()
            .zip(self.in_weights[r].iter().copied())
    }

    pub fn out_degree_count(&self, i: u32) -> usize {
        self.out_offsets[i as usize + 1] - self.out_offsets[i as usize]
    }

    /// Edge weight of (s, t), or 0 when absent.
    pub fn weight(&self, s: u32, t: u32) -> f64 {
        let r = self.out_offsets[s as usize]..self.out_offsets[s as usize + 1];
        match self.out_targets[r.clone()].binary_search(&t) {
            Ok(pos) => self.out_weights[r.start + pos],
            Err(_) => 0.0,
        }
    }

    /// All edges as (source, target, weight), sorted by (source, target).
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.n_nodes() as u32).flat_map(move |s| self.out_edges(s).map(move |(t, w)| (s, t, w)))
    }

    /// Dense adjacency; testing and desk-scale oracles only.
    pub fn dense_adjacency(&self) -> crate::dense::DenseMatrix {
        let mut a = crate::dense::DenseMatrix::zeros(self.n_nodes(), self.n_nodes());
        for (s, t, w) in self.edges() {
            a.set(s as usize, t as usize, w);
        }
        a
    }

    /// Weighted in/out degree vectors (column and row sums of the adjacency).
    pub fn degree_vectors(&self) -> DegreeVectors {
        let n = self.n_nodes();
        let mut in_degree = vec![0.0; n];
        let mut out_degree = vec![0.0; n];
        for (s, t, w) in self.edges() {
            out_degree[s as usize] += w;
            in_degree[t as usize] += w;
        }
        DegreeVectors {
            in_degree,
            out_degree,
        }
    }

    /// Weakly connected components, largest first; ties broken by smallest
    /// contained index. Node indices within a component are ascending.
    pub fn weakly_connected_components(&self) -> Vec<Vec<u32>> {
        let n = self.n_nodes();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n as u32 {
            if seen[start as usize] {
                continue;
            }
            let mut members = Vec::new();
            seen[start as usize] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                members.push(v);
                for (t, _) in self.out_edges(v) {
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        stack.push(t);
                    }
                }
                for (s, _) in self.in_edges(v) {
                    if !seen[s as usize] {
                        seen[s as usize] = true;
                        stack.push(s);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        components
    }

    /// Subgraph induced by a set of node labels: keeps exactly the edges with
    /// both endpoints in the set, compacting indices in original order.
    pub fn induced_subgraph<S: AsRef<str>>(&self, node_labels: &[S]) -> Result<DirectedGraph> {
        let mut keep: Vec<u32> = Vec::with_capacity(node_labels.len());
        let mut keep_set = HashSet::with_capacity(node_labels.len());
        for l in node_labels {
            let idx = self
                .index_of(l.as_ref())
                .ok_or_else(|| Error::Lookup(l.as_ref().to_owned()))?;
            if keep_set.insert(idx) {
                keep.push(idx);
            }
        }
        keep.sort_unstable();
        self.induced_subgraph_by_index(&keep)
    }

    /// Subgraph induced by node indices (deduplicated, kept in sorted order).
    pub fn induced_subgraph_by_index(&self, nodes: &[u32]) -> Result<DirectedGraph> {
        let mut keep = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&i| i as usize >= self.n_nodes()) {
            return Err(Error::Lookup(format!("node index {bad} out of range")));
        }
        let mut remap = vec![u32::MAX; self.n_nodes()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let labels: Vec<String> = keep
            .iter()
            .map(|&i| self.labels[i as usize].clone())
            .collect();
        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
        let mut weight_map = HashMap::new();
        for &old in &keep {
            for (t, w) in self.out_edges(old) {
                if remap[t as usize] != u32::MAX {
                    weight_map.insert((remap[old as usize], remap[t as usize]), w);
                }
            }
        }
        Ok(Self::from_weight_map(labels, label_index, weight_map))
    }

    /// Serialises to the weighted edge-list format understood by
    /// [`load_edge_list`]; edges ordered by (source, target) index.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::from("# source,target,weight\n");
        for (s, t, w) in self.edges() {
            let _ = writeln!(out, "{},{},{}", self.label(s), self.label(t), w);
        }
        out
    }

    pub fn write_edge_list<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }
}

/// Weighted degree vectors: row sums (out) and column sums (in) of the
/// adjacency matrix.
#[derive(Debug, Clone)]
pub struct DegreeVectors {
    pub in_degree: Vec<f64>,
    pub out_degree: Vec<f64>,
}

/// Node-to-community assignment with communities indexed 0..c-1, every index
/// used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u32>,
    n_communities: u32,
}

impl Partition {
    pub fn from_assignment(assignment: Vec<u32>) -> Result<Partition> {
        if assignment.is_empty() {
            return Err(Error::Partition("empty assignment".into()));
        }
        let c = *assignment.iter().max().unwrap() + 1;
        let mut used = vec![false; c as usize];
        for &a in &assignment {
            used[a as usize] = true;
        }
        if let Some(missing) = used.iter().position(|&u| !u) {
            return Err(Error::Partition(format!(
                "community index {missing} unused; indices must be compact"
            )));
        }
        Ok(Partition {
            assignment,
            n_communities: c,
        })
    }

    /// Relabels arbitrary community ids to compact 0..c-1 by first appearance.
    pub fn from_labels(raw: &[u32]) -> Result<Partition> {
        if raw.is_empty() {
            return Err(Error::Partition("empty assignment".into()));
        }
        let mut remap: HashMap<u32, u32> = HashMap::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for &r in raw {
            let next = remap.len() as u32;
            let id = *remap.entry(r).or_insert(next);
            assignment.push(id);
        }
        let n_communities = remap.len() as u32;
        Ok(Partition {
            assignment,
            n_communities,
        })
    }

    pub fn singletons(n: usize) -> Partition {
        Partition {
            assignment: (0..n as u32).collect(),
            n_communities: n as u32,
        }
    }

    pub fn all_in_one(n: usize) -> Partition {
        Partition {
            assignment: vec![0; n],
            n_communities: 1,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_communities(&self) -> u32 {
        self.n_communities
    }

    pub fn community_of(&self, node: u32) -> u32 {
        self.assignment[node as usize]
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn members(&self, community: u32) -> Vec<u32> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == community)
            .map(|(i, _)| i as u32)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_communities as usize];
        for &c in &self.assignment {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Canonical form: community ids renumbered by first appearance. Two
    /// partitions are the same grouping iff their canonical forms are equal.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.assignment).expect("non-empty")
    }

    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.n_nodes() == other.n_nodes() && self.canonical() == other.canonical()
    }
}

/// Reads an edge-list file: one edge per line, `source,target[,weight]`,
/// tab or comma delimited (auto-detected from the first data line), lines
/// starting with `#` skipped.
pub fn load_edge_list<P: AsRef<Path>>(
    path: P,
    directed: bool,
    weighted: bool,
) -> Result<DirectedGraph> {
    let content = std::fs::read_to_string(&path)?;
    parse_edge_list(&content, directed, weighted)
}

pub fn parse_edge_list(content: &str, directed: bool, weighted: bool) -> Result<DirectedGraph> {
    let mut delimiter: Option<char> = None;
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for (line_no, raw) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| if line.contains('\t') { '\t' } else { ',' });
        let fields: Vec<&str> = line.split(delim).map(str::trim).collect();
        let expected = if weighted { 3 } else { 2 };
        if fields.len() != expected {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty node label".into(),
            });
        }
        let weight = if weighted {
            let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("non-numeric weight {:?}", fields[2]),
            })?;
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("weight must be positive, got {w}"),
                });
            }
            w
        } else {
            1.0
        };
        edges.push((fields[0].to_owned(), fields[1].to_owned(), weight));
        if !directed && fields[0] != fields[1] {
            edges.push((fields[1].to_owned(), fields[0].to_owned(), weight));
        }
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph("no edges in input".into()));
    }
    DirectedGraph::from_labelled_edges(&edges, &[])
}
