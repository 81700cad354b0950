//! Two-node partitioning of the combined Tanner graph and its Bell-pair cost.

mod fm;
mod tanner;

pub use fm::{bipartition, partition_graph};
pub use tanner::{build_combined_tanner, TannerGraph, VertexKind};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node assignment (0 or 1) for every Tanner-graph vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u8>,
    pub data_counts: (usize, usize),
    pub x_check_counts: (usize, usize),
    pub z_check_counts: (usize, usize),
}

impl Partition {
    pub fn from_assignment(graph: &TannerGraph, assignment: Vec<u8>) -> Result<Partition> {
        if assignment.len() != graph.num_vertices() {
            return Err(Error::InvalidPartition(format!(
                "{} assignments for {} vertices",
                assignment.len(),
                graph.num_vertices()
            )));
        }
        if let Some(v) = assignment.iter().position(|&s| s > 1) {
            return Err(Error::InvalidPartition(format!(
                "vertex {v} on node {}",
                assignment[v]
            )));
        }
        let mut counts = [[0usize; 2]; 3];
        for (v, &s) in assignment.iter().enumerate() {
            let k = match graph.kind(v) {
                VertexKind::Data => 0,
                VertexKind::XCheck => 1,
                VertexKind::ZCheck => 2,
            };
            counts[k][s as usize] += 1;
        }
        Ok(Partition {
            assignment,
            data_counts: (counts[0][0], counts[0][1]),
            x_check_counts: (counts[1][0], counts[1][1]),
            z_check_counts: (counts[2][0], counts[2][1]),
        })
    }

    pub fn node(&self, v: usize) -> u8 {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[u8] {
        &self.assignment
    }

    pub fn num_vertices(&self) -> usize {
        self.assignment.len()
    }

    pub fn data_imbalance(&self) -> usize {
        self.data_counts.0.abs_diff(self.data_counts.1)
    }

    /// Text form: one `kind index node` line per vertex.
    pub fn to_text(&self, graph: &TannerGraph) -> String {
        let mut s = String::new();
        for (v, &node) in self.assignment.iter().enumerate() {
            let _ = writeln!(
                s,
                "{} {} {}",
                graph.kind(v).as_str(),
                graph.local_index(v),
                node
            );
        }
        s
    }

    /// Parses the text form; every vertex must appear exactly once.
    pub fn from_text(graph: &TannerGraph, text: &str) -> Result<Partition> {
        let mut assignment: Vec<Option<u8>> = vec![None; graph.num_vertices()];
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |m: &str| Error::Parse {
                line: i + 1,
                message: format!("{m}: `{line}`"),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(parse_err("expected `kind index node`"));
            }
            let kind =
                VertexKind::parse(parts[0]).ok_or_else(|| parse_err("unknown vertex kind"))?;
            let index: usize = parts[1].parse().map_err(|_| parse_err("bad index"))?;
            let node: u8 = parts[2].parse().map_err(|_| parse_err("bad node"))?;
            if node > 1 {
                return Err(parse_err("node must be 0 or 1"));
            }
            let v = graph
                .vertex(kind, index)
                .ok_or_else(|| parse_err("vertex out of range"))?;
            if assignment[v].replace(node).is_some() {
                return Err(Error::InvalidPartition(format!(
                    "{} {} assigned twice (line {})",
                    kind.as_str(),
                    index,
                    i + 1
                )));
            }
        }
        if let Some(v) = assignment.iter().position(Option::is_none) {
            return Err(Error::InvalidPartition(format!(
                "{} {} is unassigned",
                graph.kind(v).as_str(),
                graph.local_index(v)
            )));
        }
        Partition::from_assignment(graph, assignment.into_iter().map(Option::unwrap).collect())
    }
}

pub fn export_partition(partition: &Partition, graph: &TannerGraph, path: &Path) -> Result<()> {
    std::fs::write(path, partition.to_text(graph))?;
    Ok(())
}

pub fn import_partition(graph: &TannerGraph, path: &Path) -> Result<Partition> {
    Partition::from_text(graph, &std::fs::read_to_string(path)?)
}

/// Cut statistics of a partition, named after the rows of the partition table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub checks_x: usize,
    pub checks_z: usize,
    pub tanner_edges_x: usize,
    pub tanner_edges_z: usize,
    pub tanner_edges_total: usize,
    pub cut_edges_x: usize,
    pub cut_edges_z: usize,
    pub cut_edges_total: usize,
    pub local_edges_x: usize,
    pub local_edges_z: usize,
    pub local_edges: usize,
    pub cross_partition_stabs_x: usize,
    pub cross_partition_stabs_z: usize,
    pub cross_partition_stabs_total: usize,
    pub data_counts: (usize, usize),
    pub x_check_counts: (usize, usize),
    pub z_check_counts: (usize, usize),
}

impl PartitionStats {
    /// Bell pairs consumed by one shot of `n_rep` syndrome cycles.
    pub fn bell_pairs_per_shot(&self, n_rep: usize) -> usize {
        self.cut_edges_total * n_rep
    }
}

pub fn partition_stats(graph: &TannerGraph, partition: &Partition) -> Result<PartitionStats> {
    if partition.num_vertices() != graph.num_vertices() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} of {} vertices",
            partition.num_vertices(),
            graph.num_vertices()
        )));
    }
    let mut edges = [0usize; 2];
    let mut cut = [0usize; 2];
    let mut crossing = vec![false; graph.num_vertices()];
    for &(c, d) in graph.edges() {
        let t = (graph.kind(c) == VertexKind::ZCheck) as usize;
        edges[t] += 1;
        if partition.node(c) != partition.node(d) {
            cut[t] += 1;
            crossing[c] = true;
        }
    }
    let count_crossing = |kind: VertexKind| {
        (0..graph.num_vertices())
            .filter(|&v| graph.kind(v) == kind && crossing[v])
            .count()
    };
    let cross_x = count_crossing(VertexKind::XCheck);
    let cross_z = count_crossing(VertexKind::ZCheck);
    Ok(PartitionStats {
        checks_x: graph.num_x_checks(),
        checks_z: graph.num_z_checks(),
        tanner_edges_x: edges[0],
        tanner_edges_z: edges[1],
        tanner_edges_total: edges[0] + edges[1],
        cut_edges_x: cut[0],
        cut_edges_z: cut[1],
        cut_edges_total: cut[0] + cut[1],
        local_edges_x: edges[0] - cut[0],
        local_edges_z: edges[1] - cut[1],
        local_edges: edges[0] + edges[1] - cut[0] - cut[1],
        cross_partition_stabs_x: cross_x,
        cross_partition_stabs_z: cross_z,
        cross_partition_stabs_total: cross_x + cross_z,
        data_counts: partition.data_counts,
        x_check_counts: partition.x_check_counts,
        z_check_counts: partition.z_check_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_preset;

    fn bb72() -> TannerGraph {
        build_combined_tanner(&build_preset("bb72").unwrap())
    }

    #[test]
    fn single_node_has_no_cut() {
        let g = bb72();
        let p = Partition::from_assignment(&g, vec![0; g.num_vertices()]).unwrap();
        let s = partition_stats(&g, &p).unwrap();
        assert_eq!(s.cut_edges_total, 0);
        assert_eq!(s.local_edges, 432);
        assert_eq!(s.cross_partition_stabs_total, 0);
        assert_eq!(s.bell_pairs_per_shot(6), 0);
    }

    #[test]
    fn bell_budget_is_linear() {
        let g = bb72();
        let p = bipartition(&g, 2, 2, 3).unwrap();
        let s = partition_stats(&g, &p).unwrap();
        for n_rep in 0..8 {
            assert_eq!(s.bell_pairs_per_shot(n_rep), s.cut_edges_total * n_rep);
        }
        assert_eq!(s.cut_edges_total + s.local_edges, s.tanner_edges_total);
        let fake = PartitionStats {
            cut_edges_total: 104,
            ..s
        };
        assert_eq!(fake.bell_pairs_per_shot(6), 624);
    }

    #[test]
    fn cross_partition_definition() {
        let g = bb72();
        let p = bipartition(&g, 2, 2, 9).unwrap();
        let s = partition_stats(&g, &p).unwrap();
        let mut cross = 0;
        for v in g.num_data()..g.num_vertices() {
            if g.neighbors(v).iter().any(|&u| p.node(u) != p.node(v)) {
                cross += 1;
            }
        }
        assert_eq!(s.cross_partition_stabs_total, cross);
    }

    #[test]
    fn text_round_trip() {
        let g = bb72();
        let p = bipartition(&g, 2, 2, 1).unwrap();
        let text = p.to_text(&g);
        assert_eq!(Partition::from_text(&g, &text).unwrap(), p);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.txt");
        export_partition(&p, &g, &path).unwrap();
        assert_eq!(import_partition(&g, &path).unwrap(), p);
    }

    #[test]
    fn text_rejects_missing_and_duplicate() {
        let g = bb72();
        let p = bipartition(&g, 2, 1, 1).unwrap();
        let text = p.to_text(&g);
        let missing: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(Partition::from_text(&g, &missing).is_err());
        let dup = format!("{text}data 0 1\n");
        assert!(Partition::from_text(&g, &dup).is_err());
        assert!(Partition::from_text(&g, "qubit 0 1\n").is_err());
    }
}
