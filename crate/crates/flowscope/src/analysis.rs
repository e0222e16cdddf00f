//! Between-community analysis: bridgeness centrality of boundary edges,
//! cross-tabulation of two partitions with per-row chi-square, external
//! friend proportions per role, and audience-overlap set arithmetic.
//!
//! Bridgeness follows information flow, which runs opposite to follow edges:
//! for flow C1 -> C2 the walks go from consumers i in C2 along directed edges
//! to producers j in C1, and every reachable pair spreads one unit of mass
//! equally over its shortest paths (hop metric, weights ignored).

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;

use crate::graph::{DirectedGraph, Partition};
use crate::{Error, Result};

// Fixed batching keeps parallel accumulation bitwise independent of worker
// count and scheduling.
const SOURCE_CHUNK: usize = 32;

/// One oriented boundary edge with its share of shortest-path mass.
#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub source: u32,
    pub target: u32,
    pub raw_mass: f64,
    pub bridgeness: f64,
    pub bridgeness_ratio: f64,
}

/// Bridgeness of the boundary between an ordered community pair, for
/// information flowing `flow_from` -> `flow_to`.
#[derive(Debug, Clone)]
pub struct BridgenessReport {
    pub flow_from: u32,
    pub flow_to: u32,
    /// Boundary edges sorted by bridgeness ratio, largest first.
    pub edges: Vec<BoundaryEdge>,
    pub boundary_edge_count: usize,
    pub reachable_pairs: usize,
    pub total_crossing_mass: f64,
    pub no_reachable_pairs: bool,
}

/// Brandes-style fractional shortest-path mass per edge, from every source to
/// every flagged target. Each reachable (source, target) pair contributes
/// total mass 1 split equally over its shortest paths. Returns per-edge mass
/// (indexed by the graph's stable edge ids) and the reachable pair count.
pub fn shortest_path_edge_mass(
    g: &DirectedGraph,
    sources: &[u32],
    is_target: &[bool],
) -> (Vec<f64>, usize) {
    let chunks: Vec<&[u32]> = sources.chunks(SOURCE_CHUNK).collect();
    let partials: Vec<(Vec<f64>, usize)> = chunks
        .par_iter()
        .map(|chunk| {
            let mut mass = vec![0.0; g.n_edges()];
            let mut pairs = 0usize;
            for &s in *chunk {
                pairs += accumulate_from_source(g, s, is_target, &mut mass);
            }
            (mass, pairs)
        })
        .collect();
    reduce_pairwise(partials, g.n_edges())
}

fn reduce_pairwise(mut partials: Vec<(Vec<f64>, usize)>, n_edges: usize) -> (Vec<f64>, usize) {
    if partials.is_empty() {
        return (vec![0.0; n_edges], 0);
    }
    while partials.len() > 1 {
        let mut next = Vec::with_capacity(partials.len().div_ceil(2));
        let mut iter = partials.into_iter();
        while let Some((mut a, pa)) = iter.next() {
            if let Some((b, pb)) = iter.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                next.push((a, pa + pb));
            } else {
                next.push((a, pa));
            }
        }
        partials = next;
    }
    partials.pop().unwrap()
}

/// One-source Brandes pass (unit hop lengths) restricted to flagged targets.
fn accumulate_from_source(
    g: &DirectedGraph,
    source: u32,
    is_target: &[bool],
    mass: &mut [f64],
) -> usize {
    let n = g.n_nodes();
    let mut dist: Vec<i64> = vec![-1; n];
    let mut sigma = vec![0.0f64; n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    sigma[source as usize] = 1.0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for (t, _) in g.out_edges(v) {
            let ti = t as usize;
            if dist[ti] < 0 {
                dist[ti] = dist[v as usize] + 1;
                queue.push_back(t);
            }
            if dist[ti] == dist[v as usize] + 1 {
                sigma[ti] += sigma[v as usize];
            }
        }
    }
    let mut reachable = 0usize;
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        let wi = w as usize;
        if is_target[wi] && w != source {
            reachable += 1;
        }
        for (edge_id, t) in g.out_edges_with_index(w) {
            let ti = t as usize;
            if dist[ti] == dist[wi] + 1 {
                let credit = if is_target[ti] { 1.0 } else { 0.0 };
                let share = sigma[wi] / sigma[ti] * (credit + delta[ti]);
                mass[edge_id] += share;
                delta[wi] += share;
            }
        }
    }
    reachable
}

/// Bridgeness of the oriented boundary `flow_from` -> `flow_to`: shortest
/// paths from every node of `flow_to` to every node of `flow_from`, counted
/// per edge. Boundary edges are edges from `flow_to` into `flow_from`
/// (consistent with the traversal direction), whether or not any path uses
/// them.
pub fn edge_bridgeness(
    g: &DirectedGraph,
    partition: &Partition,
    flow_from: u32,
    flow_to: u32,
) -> Result<BridgenessReport> {
    if partition.n_nodes() != g.n_nodes() {
        return Err(Error::Dimension {
            expected: g.n_nodes(),
            found: partition.n_nodes(),
        });
    }
    for c in [flow_from, flow_to] {
        if c >= partition.n_communities() {
            return Err(Error::Parameter(format!(
                "community {c} does not exist (partition has {})",
                partition.n_communities()
            )));
        }
    }
    if flow_from == flow_to {
        return Err(Error::Parameter(
            "bridgeness needs two distinct communities".into(),
        ));
    }
    let sources = partition.members(flow_to);
    let mut is_target = vec![false; g.n_nodes()];
    for i in 0..g.n_nodes() as u32 {
        if partition.community_of(i) == flow_from {
            is_target[i as usize] = true;
        }
    }
    let (mass, reachable_pairs) = shortest_path_edge_mass(g, &sources, &is_target);

    let mut boundary: Vec<(usize, u32, u32)> = Vec::new();
    for u in 0..g.n_nodes() as u32 {
        if partition.community_of(u) != flow_to {
            continue;
        }
        for (edge_id, v) in g.out_edges_with_index(u) {
            if partition.community_of(v) == flow_from {
                boundary.push((edge_id, u, v));
            }
        }
    }
    let boundary_edge_count = boundary.len();
    let total_crossing_mass: f64 = boundary.iter().map(|&(e, _, _)| mass[e]).sum();
    let expected_per_edge = if boundary_edge_count > 0 {
        total_crossing_mass / boundary_edge_count as f64
    } else {
        0.0
    };
    let mut edges: Vec<BoundaryEdge> = boundary
        .into_iter()
        .map(|(e, u, v)| BoundaryEdge {
            source: u,
            target: v,
            raw_mass: mass[e],
            bridgeness: if reachable_pairs > 0 {
                mass[e] / reachable_pairs as f64
            } else {
                0.0
            },
            bridgeness_ratio: if expected_per_edge > 0.0 {
                mass[e] / expected_per_edge
            } else {
                0.0
            },
        })
        .collect();
    edges.sort_by(|a, b| {
        b.bridgeness_ratio
            .partial_cmp(&a.bridgeness_ratio)
            .unwrap()
            .then((a.source, a.target).cmp(&(b.source, b.target)))
    });
    Ok(BridgenessReport {
        flow_from,
        flow_to,
        edges,
        boundary_edge_count,
        reachable_pairs,
        total_crossing_mass,
        no_reachable_pairs: reachable_pairs == 0,
    })
}

/// Report rows `source_label,target_label,raw_mass,bridgeness,bridgeness_ratio`
/// in the report's ranking order.
pub fn bridgeness_to_string(g: &DirectedGraph, report: &BridgenessReport) -> String {
    let mut out = String::from("source_label,target_label,raw_mass,bridgeness,bridgeness_ratio\n");
    for e in &report.edges {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            g.label(e.source),
            g.label(e.target),
            e.raw_mass,
            e.bridgeness,
            e.bridgeness_ratio
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Cross-tabulation.
// ---------------------------------------------------------------------------

/// Contingency table of two partitions over their common labels, with a
/// chi-square statistic per row against the column marginals.
#[derive(Debug, Clone)]
pub struct CrossTab {
    pub counts: Vec<Vec<u64>>,
    pub row_chi2: Vec<f64>,
    pub row_dof: Vec<u32>,
    pub row_p: Vec<f64>,
    /// Rows with any expected cell below 1 (over nonzero-marginal columns).
    pub row_unreliable: Vec<bool>,
    /// +1 above expectation, -1 below, 0 equal.
    pub cell_sign: Vec<Vec<i8>>,
    pub common_nodes: usize,
}

pub fn cross_tabulate(
    pa: &Partition,
    labels_a: &[String],
    pb: &Partition,
    labels_b: &[String],
) -> Result<CrossTab> {
    if pa.n_nodes() != labels_a.len() {
        return Err(Error::Dimension {
            expected: pa.n_nodes(),
            found: labels_a.len(),
        });
    }
    if pb.n_nodes() != labels_b.len() {
        return Err(Error::Dimension {
            expected: pb.n_nodes(),
            found: labels_b.len(),
        });
    }
    let index_b: HashMap<&str, u32> = labels_b
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as u32))
        .collect();
    let (ca, cb) = (pa.n_communities() as usize, pb.n_communities() as usize);
    let mut counts = vec![vec![0u64; cb]; ca];
    let mut common_nodes = 0usize;
    for (i, label) in labels_a.iter().enumerate() {
        if let Some(&j) = index_b.get(label.as_str()) {
            counts[pa.community_of(i as u32) as usize][pb.community_of(j) as usize] += 1;
            common_nodes += 1;
        }
    }
    if common_nodes == 0 {
        return Err(Error::Parameter("partitions share no common labels".into()));
    }
    let col_marginals: Vec<u64> = (0..cb)
        .map(|c| counts.iter().map(|row| row[c]).sum())
        .collect();
    let live_cols: Vec<usize> = (0..cb).filter(|&c| col_marginals[c] > 0).collect();
    let dof = live_cols.len().saturating_sub(1) as u32;

    let mut row_chi2 = Vec::with_capacity(ca);
    let mut row_p = Vec::with_capacity(ca);
    let mut row_unreliable = Vec::with_capacity(ca);
    let mut cell_sign = vec![vec![0i8; cb]; ca];
    for (r, row) in counts.iter().enumerate() {
        let row_total: u64 = row.iter().sum();
        let mut chi2 = 0.0;
        let mut unreliable = false;
        for &c in &live_cols {
            let expected = row_total as f64 * col_marginals[c] as f64 / common_nodes as f64;
            if expected < 1.0 {
                unreliable = true;
            }
            if expected > 0.0 {
                let diff = row[c] as f64 - expected;
                chi2 += diff * diff / expected;
                cell_sign[r][c] = if diff > 0.0 {
                    1
                } else if diff < 0.0 {
                    -1
                } else {
                    0
                };
            }
        }
        row_chi2.push(chi2);
        row_p.push(chi_square_p_value(chi2, dof));
        row_unreliable.push(unreliable);
    }
    Ok(CrossTab {
        counts,
        row_chi2,
        row_dof: vec![dof; ca],
        row_p,
        row_unreliable,
        cell_sign,
        common_nodes,
    })
}

/// Upper-tail chi-square probability via the regularized incomplete gamma.
pub fn chi_square_p_value(statistic: f64, dof: u32) -> f64 {
    if dof == 0 || statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0)
}

/// Matrix block with signed cells, then chi2,dof,p_value,flag per row.
pub fn crosstab_to_string(ct: &CrossTab) -> String {
    let cb = ct.counts.first().map_or(0, Vec::len);
    let mut out = String::from("community_a");
    for c in 0..cb {
        let _ = write!(out, ",b{c}");
    }
    out.push_str(",chi2,dof,p_value,flag\n");
    for (r, row) in ct.counts.iter().enumerate() {
        let _ = write!(out, "{r}");
        for (c, count) in row.iter().enumerate() {
            let sign = match ct.cell_sign[r][c] {
                1 => "+",
                -1 => "-",
                _ => "=",
            };
            let _ = write!(out, ",{count}({sign})");
        }
        let flag = if ct.row_unreliable[r] {
            "low_expected"
        } else if ct.row_p[r] < 0.001 {
            "***"
        } else {
            "ok"
        };
        let _ = writeln!(
            out,
            ",{},{},{},{flag}",
            ct.row_chi2[r], ct.row_dof[r], ct.row_p[r]
        );
    }
    out
}

// ---------------------------------------------------------------------------
// External friends and audience overlap.
// ---------------------------------------------------------------------------

/// Per-role distribution of the proportion of each member's followees (out
/// neighbours) lying outside the member's own interest community.
#[derive(Debug, Clone)]
pub struct FriendStats {
    pub proportions: Vec<f64>,
    pub mean: f64,
    /// Members with no followees, excluded from the proportions.
    pub excluded_no_out_degree: usize,
}

pub fn external_friend_proportion(
    g: &DirectedGraph,
    interest: &Partition,
    roles: &Partition,
) -> Result<Vec<FriendStats>> {
    for p in [interest, roles] {
        if p.n_nodes() != g.n_nodes() {
            return Err(Error::Dimension {
                expected: g.n_nodes(),
                found: p.n_nodes(),
            });
        }
    }
    let n_roles = roles.n_communities() as usize;
    let mut stats: Vec<FriendStats> = (0..n_roles)
        .map(|_| FriendStats {
            proportions: Vec::new(),
            mean: 0.0,
            excluded_no_out_degree: 0,
        })
        .collect();
    for i in 0..g.n_nodes() as u32 {
        let role = roles.community_of(i) as usize;
        let own = interest.community_of(i);
        let mut total = 0usize;
        let mut outside = 0usize;
        for (t, _) in g.out_edges(i) {
            total += 1;
            if interest.community_of(t) != own {
                outside += 1;
            }
        }
        if total == 0 {
            stats[role].excluded_no_out_degree += 1;
        } else {
            stats[role].proportions.push(outside as f64 / total as f64);
        }
    }
    for s in &mut stats {
        if !s.proportions.is_empty() {
            s.mean = s.proportions.iter().sum::<f64>() / s.proportions.len() as f64;
        }
    }
    Ok(stats)
}

/// Audience overlap of per-community external follower sets.
#[derive(Debug, Clone)]
pub struct CommunityAudience {
    pub community: String,
    pub unique_followers: usize,
    /// Percentage of this community's followers following only it.
    pub exclusive_percent: f64,
}

#[derive(Debug, Clone)]
pub struct OverlapReport {
    pub per_community: Vec<CommunityAudience>,
    pub global_unique: usize,
}

pub fn audience_overlap(
    follower_sets: &BTreeMap<String, BTreeSet<String>>,
) -> Result<OverlapReport> {
    if follower_sets.is_empty() {
        return Err(Error::Parameter("no follower sets supplied".into()));
    }
    let mut membership: HashMap<&str, u32> = HashMap::new();
    for set in follower_sets.values() {
        for f in set {
            *membership.entry(f.as_str()).or_insert(0) += 1;
        }
    }
    let per_community = follower_sets
        .iter()
        .map(|(community, set)| {
            let exclusive = set.iter().filter(|f| membership[f.as_str()] == 1).count();
            CommunityAudience {
                community: community.clone(),
                unique_followers: set.len(),
                exclusive_percent: if set.is_empty() {
                    0.0
                } else {
                    100.0 * exclusive as f64 / set.len() as f64
                },
            }
        })
        .collect();
    Ok(OverlapReport {
        per_community,
        global_unique: membership.len(),
    })
}

/// Reads `community_label,follower_label` rows into per-community sets.
pub fn load_follower_sets<P: AsRef<Path>>(path: P) -> Result<BTreeMap<String, BTreeSet<String>>> {
    parse_follower_sets(&std::fs::read_to_string(path)?)
}

pub fn parse_follower_sets(content: &str) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (line_no, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "community_label,follower_label" {
            continue;
        }
        let (community, follower) = line.split_once(',').ok_or(Error::Parse {
            line: line_no + 1,
            message: "expected community_label,follower_label".into(),
        })?;
        sets.entry(community.trim().to_owned())
            .or_default()
            .insert(follower.trim().to_owned());
    }
    if sets.is_empty() {
        return Err(Error::Parameter("no follower sets supplied".into()));
    }
    Ok(sets)
}

pub fn overlap_to_string(report: &OverlapReport) -> String {
    let mut out = String::from("community,unique_followers,exclusive_percent\n");
    for c in &report.per_community {
        let _ = writeln!(
            out,
            "{},{},{}",
            c.community, c.unique_followers, c.exclusive_percent
        );
    }
    let _ = writeln!(out, "global_unique,{},", report.global_unique);
    out
}
