//! Device connectivity.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected qubit connectivity. CNOTs may run in either direction along an edge.
///
/// Graphs cut out of a square lattice remember the lattice coordinates of
/// their qubits so that distances are measured on the lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct ConnectivityGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    coords: Option<Vec<(i64, i64)>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<(i64, i64)>>,
}

impl TryFrom<GraphRepr> for ConnectivityGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        let g = ConnectivityGraph::new(r.n, r.edges)?;
        match r.coords {
            Some(c) => g.with_coords(c),
            None => Ok(g),
        }
    }
}

impl From<ConnectivityGraph> for GraphRepr {
    fn from(g: ConnectivityGraph) -> Self {
        GraphRepr { n: g.n, edges: g.edges, coords: g.coords }
    }
}

impl ConnectivityGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on qubit {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for {n} qubits")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Ok(ConnectivityGraph { n, edges, adjacency, coords: None })
    }

    fn with_coords(mut self, coords: Vec<(i64, i64)>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(Error::InvalidGraph(format!("{} coordinates for {} qubits", coords.len(), self.n)));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    /// Nearest-neighbour square lattice, qubits numbered row-major.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let idx = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((idx(r, c), idx(r, c + 1)));
                }
                if r + 1 < rows {
                    edges.push((idx(r, c), idx(r + 1, c)));
                }
            }
        }
        let coords = (0..rows * cols).map(|q| ((q / cols) as i64, (q % cols) as i64)).collect();
        ConnectivityGraph::new(rows * cols, edges)
            .and_then(|g| g.with_coords(coords))
            .expect("grid is well formed")
    }

    /// Induced subgraph on `qubits`, relabelled `0..qubits.len()` in the given order.
    pub fn subgraph(&self, qubits: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.n];
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n {
                return Err(Error::InvalidGraph(format!("qubit {q} out of range for {} qubits", self.n)));
            }
            if index[q] != usize::MAX {
                return Err(Error::InvalidGraph(format!("qubit {q} listed twice")));
            }
            index[q] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
            .map(|&(a, b)| (index[a], index[b]));
        let sub = ConnectivityGraph::new(qubits.len(), edges)?;
        match &self.coords {
            Some(c) => sub.with_coords(qubits.iter().map(|&q| c[q]).collect()),
            None => Ok(sub),
        }
    }

    /// The `n` qubits of a `rows x cols` lattice used for an n-qubit benchmark:
    /// the most nearly square rectangle of area `n` that fits, anchored at the
    /// corner, or else the first `n` qubits in row-major order.
    pub fn lattice_block(rows: usize, cols: usize, n: usize) -> Result<Vec<usize>> {
        if n == 0 || n > rows * cols {
            return Err(Error::InvalidGraph(format!("cannot place {n} qubits on a {rows}x{cols} lattice")));
        }
        let best = (1..=n)
            .filter(|h| n % h == 0)
            .map(|h| (h, n / h))
            .filter(|&(h, w)| h <= rows && w <= cols)
            .min_by_key(|&(h, w)| (h.abs_diff(w), h));
        Ok(match best {
            Some((h, w)) => (0..h).flat_map(|r| (0..w).map(move |c| r * cols + c)).collect(),
            None => (0..n).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn coords(&self) -> Option<&[(i64, i64)]> {
        self.coords.as_deref()
    }

    /// Manhattan distance on the lattice when coordinates are known, otherwise
    /// hop distance in the graph (`None` when disconnected).
    pub fn distance(&self, a: usize, b: usize) -> Option<usize> {
        if let Some(c) = &self.coords {
            let (ra, ca) = c[a];
            let (rb, cb) = c[b];
            return Some((ra.abs_diff(rb) + ca.abs_diff(cb)) as usize);
        }
        let mut dist = vec![usize::MAX; self.n];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(q) = queue.pop_front() {
            if q == b {
                return Some(dist[q]);
            }
            for &r in &self.adjacency[q] {
                if dist[r] == usize::MAX {
                    dist[r] = dist[q] + 1;
                    queue.push_back(r);
                }
            }
        }
        None
    }

    /// Largest two-qubit gate density any layer can reach: `2 * floor(n / 2) / n`
    /// when there is at least one edge, else 0.
    pub fn max_density(&self) -> f64 {
        if self.edges.is_empty() {
            0.0
        } else {
            (2 * (self.n / 2)) as f64 / self.n as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_edges() {
        let g = ConnectivityGraph::grid(4, 4);
        assert_eq!(g.edges().len(), 24);
        assert_eq!(g.neighbors(5), &[1, 4, 6, 9]);
        assert_eq!(g.neighbors(0), &[1, 4]);
        assert_eq!(g.distance(0, 15), Some(6));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(ConnectivityGraph::new(2, [(0, 0)]).is_err());
        assert!(ConnectivityGraph::new(2, [(0, 2)]).is_err());
        let g = ConnectivityGraph::new(3, [(1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
        assert!(g.has_edge(1, 0));
    }

    #[test]
    fn blocks() {
        assert_eq!(ConnectivityGraph::lattice_block(4, 4, 1).unwrap(), vec![0]);
        assert_eq!(ConnectivityGraph::lattice_block(4, 4, 2).unwrap(), vec![0, 1]);
        assert_eq!(ConnectivityGraph::lattice_block(4, 4, 4).unwrap(), vec![0, 1, 4, 5]);
        assert_eq!(ConnectivityGraph::lattice_block(4, 4, 8).unwrap(), vec![0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(ConnectivityGraph::lattice_block(4, 4, 16).unwrap().len(), 16);
        assert_eq!(ConnectivityGraph::lattice_block(4, 4, 7).unwrap(), (0..7).collect::<Vec<_>>());
        assert!(ConnectivityGraph::lattice_block(4, 4, 17).is_err());
    }

    #[test]
    fn subgraph_keeps_lattice_distance() {
        let g = ConnectivityGraph::grid(4, 4);
        let sub = g.subgraph(&[0, 1, 4, 5]).unwrap();
        assert_eq!(sub.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(sub.distance(0, 3), Some(2));
        let plain = ConnectivityGraph::new(4, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(plain.distance(0, 2), Some(2));
        assert_eq!(plain.distance(0, 3), None);
    }

    #[test]
    fn serde_round_trip() {
        let g = ConnectivityGraph::grid(2, 3).subgraph(&[1, 2, 4, 5]).unwrap();
        let back: ConnectivityGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
