use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{Partition, TannerGraph, VertexKind};
use crate::error::{Error, Result};
use crate::rng::keyed_rng;

/// Balanced two-way min-cut of the Tanner graph.
///
/// Each restart draws a random balanced data assignment, places every check on
/// the majority side of its neighbours, then runs Fiduccia-Mattheyses passes
/// until a pass no longer improves the cut. Within a pass the data imbalance
/// may exceed `balance_tol` by one move, but only prefixes with
/// `|D_0 - D_1| <= balance_tol` are kept; check vertices move freely and their
/// imbalance only breaks ties. The best restart wins (smallest cut, then smaller check
/// imbalance, then lowest restart index).
pub fn bipartition(
    graph: &TannerGraph,
    balance_tol: usize,
    restarts: usize,
    seed: u64,
) -> Result<Partition> {
    partition_graph(graph, 2, balance_tol, restarts, seed)
}

/// k-way entry point; only `parts == 2` is implemented.
pub fn partition_graph(
    graph: &TannerGraph,
    parts: usize,
    balance_tol: usize,
    restarts: usize,
    seed: u64,
) -> Result<Partition> {
    if parts != 2 {
        return Err(Error::InvalidPartition(format!(
            "only two-way partitioning is supported, got {parts} parts"
        )));
    }
    if graph.num_vertices() == 0 {
        return Err(Error::InvalidPartition("empty graph".into()));
    }
    let n = graph.num_data();
    if balance_tol < n % 2 {
        return Err(Error::InfeasibleBalance {
            tol: balance_tol,
            n,
        });
    }
    let restarts = restarts.max(1);
    let results: Vec<(usize, usize, Vec<u8>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut fm = Fm::new(graph, balance_tol, seed, r as u64);
            fm.refine();
            (fm.cut, fm.check_imbalance(), fm.side)
        })
        .collect();
    let (_, _, side) = results
        .into_iter()
        .enumerate()
        .min_by_key(|(i, (cut, imb, _))| (*cut, *imb, *i))
        .map(|(_, r)| r)
        .expect("at least one restart");
    Partition::from_assignment(graph, side)
}

struct Fm<'a> {
    graph: &'a TannerGraph,
    tol: i64,
    side: Vec<u8>,
    gain: Vec<i32>,
    data_diff: i64,
    check_diff: i64,
    cut: usize,
    max_degree: i32,
}

impl<'a> Fm<'a> {
    fn new(graph: &'a TannerGraph, tol: usize, seed: u64, restart: u64) -> Self {
        let mut rng = keyed_rng(seed, &[0x7061_7274, restart]);
        let n = graph.num_data();
        let total = graph.num_vertices();
        let mut side = vec![0u8; total];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for &q in &order[n / 2..] {
            side[q] = 1;
        }
        for v in n..total {
            let ones = graph.neighbors(v).iter().filter(|&&u| side[u] == 1).count();
            let zeros = graph.neighbors(v).len() - ones;
            side[v] = match ones.cmp(&zeros) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => rng.gen_range(0..2),
            };
        }
        let max_degree = (0..total)
            .map(|v| graph.neighbors(v).len())
            .max()
            .unwrap_or(0) as i32;
        let mut fm = Fm {
            graph,
            tol: tol as i64,
            side,
            gain: vec![0; total],
            data_diff: 0,
            check_diff: 0,
            cut: 0,
            max_degree,
        };
        fm.recompute();
        fm
    }

    fn recompute(&mut self) {
        let g = self.graph;
        self.cut = g
            .edges()
            .iter()
            .filter(|&&(c, d)| self.side[c] != self.side[d])
            .count();
        self.data_diff = 0;
        self.check_diff = 0;
        for v in 0..g.num_vertices() {
            let s = if self.side[v] == 0 { 1 } else { -1 };
            if g.kind(v) == VertexKind::Data {
                self.data_diff += s;
            } else {
                self.check_diff += s;
            }
            self.gain[v] = g
                .neighbors(v)
                .iter()
                .map(|&u| if self.side[u] != self.side[v] { 1 } else { -1 })
                .sum();
        }
    }

    fn check_imbalance(&self) -> usize {
        self.check_diff.unsigned_abs() as usize
    }

    fn can_move(&self, v: usize) -> bool {
        if self.graph.kind(v) != VertexKind::Data {
            return true;
        }
        let delta = if self.side[v] == 0 { -2 } else { 2 };
        (self.data_diff + delta).abs() <= self.tol + 2
    }

    fn balanced(&self) -> bool {
        self.data_diff.abs() <= self.tol
    }

    fn apply_move(&mut self, v: usize) {
        let from = self.side[v];
        let delta = if from == 0 { -2 } else { 2 };
        if self.graph.kind(v) == VertexKind::Data {
            self.data_diff += delta;
        } else {
            self.check_diff += delta;
        }
        self.cut = (self.cut as i64 - self.gain[v] as i64) as usize;
        self.gain[v] = -self.gain[v];
        self.side[v] = 1 - from;
        for &u in self.graph.neighbors(v) {
            if self.side[u] == from {
                self.gain[u] += 2;
            } else {
                self.gain[u] -= 2;
            }
        }
    }

    /// One FM pass; returns whether the state improved.
    fn pass(&mut self) -> bool {
        let total = self.graph.num_vertices();
        let offset = self.max_degree;
        let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); (2 * offset + 1) as usize];
        for v in 0..total {
            buckets[(self.gain[v] + offset) as usize].insert(v);
        }
        let mut locked = vec![false; total];
        let start = (self.cut, self.check_imbalance());
        let mut best = start;
        let mut best_len = 0;
        let mut moves = Vec::new();
        loop {
            let pick = buckets
                .iter()
                .rev()
                .find_map(|b| b.iter().copied().find(|&v| self.can_move(v)));
            let Some(v) = pick else { break };
            buckets[(self.gain[v] + offset) as usize].remove(&v);
            locked[v] = true;
            let neighbors = self.graph.neighbors(v);
            for &u in neighbors {
                if !locked[u] {
                    buckets[(self.gain[u] + offset) as usize].remove(&u);
                }
            }
            self.apply_move(v);
            for &u in neighbors {
                if !locked[u] {
                    buckets[(self.gain[u] + offset) as usize].insert(u);
                }
            }
            moves.push(v);
            let state = (self.cut, self.check_imbalance());
            if self.balanced() && state < best {
                best = state;
                best_len = moves.len();
            }
        }
        for &v in moves[best_len..].iter().rev() {
            self.apply_move(v);
        }
        best < start
    }

    fn refine(&mut self) {
        while self.pass() {}
    }
}
