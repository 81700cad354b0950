use serde::{Deserialize, Serialize};

use crate::codes::CssCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Data,
    XCheck,
    ZCheck,
}

impl VertexKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexKind::Data => "data",
            VertexKind::XCheck => "xcheck",
            VertexKind::ZCheck => "zcheck",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "data" => Some(VertexKind::Data),
            "xcheck" => Some(VertexKind::XCheck),
            "zcheck" => Some(VertexKind::ZCheck),
            _ => None,
        }
    }
}

/// Combined X-Z Tanner graph of `[H_X; H_Z]`.
///
/// Vertex ids: data qubits `0..n`, X-checks `n..n+r_x`, Z-checks after that.
/// Each edge is `(check vertex, data vertex)`.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n_data: usize,
    n_x: usize,
    n_z: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn from_parts(n_data: usize, x_checks: &[Vec<usize>], z_checks: &[Vec<usize>]) -> Self {
        let n_x = x_checks.len();
        let n_z = z_checks.len();
        let total = n_data + n_x + n_z;
        let mut edges = Vec::new();
        let mut adjacency = vec![Vec::new(); total];
        for (i, support) in x_checks.iter().chain(z_checks).enumerate() {
            let check = n_data + i;
            for &q in support {
                assert!(q < n_data, "data index out of range");
                edges.push((check, q));
                adjacency[check].push(q);
                adjacency[q].push(check);
            }
        }
        TannerGraph {
            n_data,
            n_x,
            n_z,
            edges,
            adjacency,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_data(&self) -> usize {
        self.n_data
    }

    pub fn num_x_checks(&self) -> usize {
        self.n_x
    }

    pub fn num_z_checks(&self) -> usize {
        self.n_z
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        if v < self.n_data {
            VertexKind::Data
        } else if v < self.n_data + self.n_x {
            VertexKind::XCheck
        } else {
            VertexKind::ZCheck
        }
    }

    /// Index of `v` within its kind.
    pub fn local_index(&self, v: usize) -> usize {
        match self.kind(v) {
            VertexKind::Data => v,
            VertexKind::XCheck => v - self.n_data,
            VertexKind::ZCheck => v - self.n_data - self.n_x,
        }
    }

    pub fn vertex(&self, kind: VertexKind, index: usize) -> Option<usize> {
        let (base, count) = match kind {
            VertexKind::Data => (0, self.n_data),
            VertexKind::XCheck => (self.n_data, self.n_x),
            VertexKind::ZCheck => (self.n_data + self.n_x, self.n_z),
        };
        (index < count).then_some(base + index)
    }

    pub fn x_check_vertex(&self, i: usize) -> usize {
        self.n_data + i
    }

    pub fn z_check_vertex(&self, i: usize) -> usize {
        self.n_data + self.n_x + i
    }
}

/// One data vertex per qubit, one check vertex per row of `H_X` and `H_Z`.
pub fn build_combined_tanner(code: &CssCode) -> TannerGraph {
    let rows = |m: &crate::gf2::BinaryMatrix| -> Vec<Vec<usize>> {
        (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
    };
    TannerGraph::from_parts(code.n, &rows(&code.hx), &rows(&code.hz))
}
