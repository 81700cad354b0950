use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::blossom::max_weight_matching;
use crate::error::{Error, Result};
use crate::sim::{combine, DetectorErrorModel, Fault, FrameSample};

/// Integer edge weights are `ln((1-p)/p)` scaled by this factor.
pub const WEIGHT_SCALE: f64 = 1e6;

const INF: i64 = 1 << 50;

fn observable_mask(obs: &[usize]) -> u64 {
    obs.iter().fold(0, |m, &l| {
        assert!(l < 64, "at most 64 observables");
        m | 1 << l
    })
}

/// Scaled log-likelihood weight of a fault with probability `p`.
pub fn edge_weight(p: f64) -> i64 {
    let p = p.clamp(1e-300, 0.5);
    (((1.0 - p) / p).ln() * WEIGHT_SCALE).round() as i64
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    /// `None` for the boundary.
    pub b: Option<usize>,
    pub weight: i64,
    pub observables: u64,
}

/// Detectors plus one boundary node; one edge per DEM fault.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub num_detectors: usize,
    pub edges: Vec<Edge>,
    /// All-pairs distances over `num_detectors + 1` nodes, boundary last.
    dist: Vec<i64>,
    path_obs: Vec<u64>,
}

impl MatchingGraph {
    /// Fails on any fault touching three or more detectors. Parallel faults
    /// on the same node pair keep the lighter edge.
    pub fn from_dem(dem: &DetectorErrorModel) -> Result<MatchingGraph> {
        let mut by_pair: HashMap<(usize, usize), Edge> = HashMap::new();
        let nd = dem.num_detectors;
        for (i, f) in dem.faults.iter().enumerate() {
            let (a, b) = match f.detectors[..] {
                [] => continue,
                [a] => (a, None),
                [a, b] => (a, Some(b)),
                _ => {
                    return Err(Error::NonMatchable {
                        fault: i,
                        detectors: f.detectors.len(),
                    })
                }
            };
            let e = Edge {
                a,
                b,
                weight: edge_weight(f.p),
                observables: observable_mask(&f.observables),
            };
            let key = (a, b.unwrap_or(nd));
            match by_pair.get(&key) {
                Some(old) if old.weight <= e.weight => {}
                _ => {
                    by_pair.insert(key, e);
                }
            }
        }
        let mut edges: Vec<Edge> = by_pair.into_values().collect();
        edges.sort_by_key(|e| (e.a, e.b.unwrap_or(nd)));
        Ok(Self::with_edges(nd, edges))
    }

    fn with_edges(nd: usize, edges: Vec<Edge>) -> MatchingGraph {
        let nn = nd + 1;
        let mut adj: Vec<Vec<(usize, i64, u64)>> = vec![Vec::new(); nn];
        for e in &edges {
            let b = e.b.unwrap_or(nd);
            adj[e.a].push((b, e.weight, e.observables));
            adj[b].push((e.a, e.weight, e.observables));
        }
        let mut dist = vec![INF; nn * nn];
        let mut path_obs = vec![0u64; nn * nn];
        let mut heap = BinaryHeap::new();
        for s in 0..nn {
            let row = s * nn;
            dist[row + s] = 0;
            heap.push(Reverse((0i64, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[row + u] {
                    continue;
                }
                for &(v, w, o) in &adj[u] {
                    let nd2 = d + w;
                    if nd2 < dist[row + v] {
                        dist[row + v] = nd2;
                        path_obs[row + v] = path_obs[row + u] ^ o;
                        heap.push(Reverse((nd2, v)));
                    }
                }
            }
        }
        MatchingGraph {
            num_detectors: nd,
            edges,
            dist,
            path_obs,
        }
    }

    fn nn(&self) -> usize {
        self.num_detectors + 1
    }

    /// Shortest-path weight between two nodes (`num_detectors` = boundary).
    pub fn distance(&self, a: usize, b: usize) -> i64 {
        self.dist[a * self.nn() + b]
    }

    /// Observable mask and total weight of a minimum-weight edge set whose
    /// odd-degree nodes are exactly `fired`.
    pub fn decode_with_weight(&self, fired: &[u32]) -> (u64, i64) {
        let k = fired.len();
        if k == 0 {
            return (0, 0);
        }
        let nn = self.nn();
        let bnd = self.num_detectors;
        let f: Vec<usize> = fired.iter().map(|&d| d as usize).collect();
        let db: Vec<i64> = f.iter().map(|&d| self.dist[d * nn + bnd]).collect();
        let mut pair_w = Vec::with_capacity(k * (k + 1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                let direct = self.dist[f[i] * nn + f[j]];
                let via = (db[i] + db[j]).min(2 * INF);
                pair_w.push((i, j, direct.min(via)));
            }
        }
        if k % 2 == 1 {
            for i in 0..k {
                pair_w.push((i, k, db[i]));
            }
        }
        let nv = k + k % 2;
        let cap = pair_w.iter().map(|e| e.2).max().unwrap_or(0) + 1;
        let edges: Vec<(usize, usize, i64)> =
            pair_w.iter().map(|&(i, j, w)| (i, j, cap - w)).collect();
        let mate = max_weight_matching(nv, &edges, true);
        let mut obs = 0u64;
        let mut total = 0i64;
        for i in 0..k {
            let Some(j) = mate[i] else { continue };
            if j == k {
                obs ^= self.path_obs[f[i] * nn + bnd];
                total += db[i];
            } else if j > i {
                let direct = self.dist[f[i] * nn + f[j]];
                if direct <= db[i] + db[j] {
                    obs ^= self.path_obs[f[i] * nn + f[j]];
                    total += direct;
                } else {
                    obs ^= self.path_obs[f[i] * nn + bnd] ^ self.path_obs[f[j] * nn + bnd];
                    total += db[i] + db[j];
                }
            }
        }
        (obs, total)
    }

    pub fn decode(&self, fired: &[u32]) -> u64 {
        self.decode_with_weight(fired).0
    }
}

/// Rewrites faults touching three or more detectors as products of existing
/// one- and two-detector faults whose observables XOR to the original. Each
/// component absorbs the fault's probability.
pub fn decompose_dem(dem: &DetectorErrorModel) -> Result<DetectorErrorModel> {
    let nd = dem.num_detectors;
    let mut atoms: HashMap<(usize, usize), (f64, u64)> = HashMap::new();
    for f in &dem.faults {
        let key = match f.detectors[..] {
            [a] => (a, nd),
            [a, b] => (a, b),
            _ => continue,
        };
        let m = observable_mask(&f.observables);
        match atoms.get(&key) {
            Some(&(p, _)) if p >= f.p => {}
            _ => {
                atoms.insert(key, (f.p, m));
            }
        }
    }
    let mut partners: Vec<Vec<usize>> = vec![Vec::new(); nd];
    for &(a, b) in atoms.keys() {
        if b < nd {
            partners[a].push(b);
            partners[b].push(a);
        }
    }
    for p in partners.iter_mut() {
        p.sort_unstable();
    }

    fn search(
        rest: &mut Vec<usize>,
        want: u64,
        acc: u64,
        nd: usize,
        atoms: &HashMap<(usize, usize), (f64, u64)>,
        partners: &[Vec<usize>],
        out: &mut Vec<(usize, usize)>,
        budget: &mut usize,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let Some(&a) = rest.first() else {
            return acc == want;
        };
        rest.remove(0);
        for &b in &partners[a] {
            if let Ok(pos) = rest.binary_search(&b) {
                let key = (a.min(b), a.max(b));
                let m = atoms[&key].1;
                rest.remove(pos);
                out.push(key);
                if search(rest, want, acc ^ m, nd, atoms, partners, out, budget) {
                    return true;
                }
                out.pop();
                rest.insert(pos, b);
            }
        }
        if let Some(&(_, m)) = atoms.get(&(a, nd)) {
            out.push((a, nd));
            if search(rest, want, acc ^ m, nd, atoms, partners, out, budget) {
                return true;
            }
            out.pop();
        }
        rest.insert(0, a);
        false
    }

    let mut merged: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    let mut add = |dets: Vec<usize>, obs: Vec<usize>, p: f64| {
        let e = merged.entry((dets, obs)).or_insert(0.0);
        *e = combine(*e, p);
    };
    for (i, f) in dem.faults.iter().enumerate() {
        if f.detectors.len() <= 2 {
            add(f.detectors.clone(), f.observables.clone(), f.p);
            continue;
        }
        let mut rest = f.detectors.clone();
        let mut parts = Vec::new();
        let mut budget = 100_000;
        let want = observable_mask(&f.observables);
        if !search(
            &mut rest,
            want,
            0,
            nd,
            &atoms,
            &partners,
            &mut parts,
            &mut budget,
        ) {
            return Err(Error::NonMatchable {
                fault: i,
                detectors: f.detectors.len(),
            });
        }
        for (a, b) in parts {
            let dets = if b == nd { vec![a] } else { vec![a, b] };
            let m = atoms[&(a, b)].1;
            let obs = (0..64).filter(|l| m >> l & 1 == 1).collect();
            add(dets, obs, f.p);
        }
    }
    let mut faults: Vec<Fault> = merged
        .into_iter()
        .map(|((detectors, observables), p)| Fault {
            p: p.min(0.5),
            detectors,
            observables,
        })
        .collect();
    faults.sort_by(|x, y| (&x.detectors, &x.observables).cmp(&(&y.detectors, &y.observables)));
    Ok(DetectorErrorModel {
        num_detectors: nd,
        num_observables: dem.num_observables,
        faults,
        detector_coords: dem.detector_coords.clone(),
    })
}

/// Predicted observable masks, one per shot.
pub fn mwpm_decode(dem: &DetectorErrorModel, sample: &FrameSample) -> Result<Vec<u64>> {
    let g = MatchingGraph::from_dem(dem)?;
    Ok(sample.fired_by_shot().iter().map(|f| g.decode(f)).collect())
}
