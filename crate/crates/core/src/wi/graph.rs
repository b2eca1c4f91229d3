use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adjacency bit matrix. Undirected graphs keep it symmetric; no self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    directed: bool,
    rows: Vec<Vec<u64>>,
}

impl Graph {
    pub fn new(n: usize, directed: bool) -> Self {
        Graph {
            n,
            directed,
            rows: vec![vec![0; n.div_ceil(64)]; n],
        }
    }

    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n, directed);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n, false);
        for a in 0..n {
            for b in a + 1..n {
                g.add_edge(a, b).expect("in range");
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new(n, false);
        for a in 0..n {
            g.add_edge(a, (a + 1) % n).expect("in range");
        }
        g
    }

    /// The Petersen graph: 10 vertices, 3-regular, not Hamiltonian.
    pub fn petersen() -> Self {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push((i, (i + 1) % 5));
            e.push((i, i + 5));
            e.push((5 + i, 5 + (i + 2) % 5));
        }
        Graph::from_edges(10, false, &e).expect("in range")
    }

    /// A random undirected graph containing a planted Hamiltonian cycle,
    /// returned with that cycle.
    pub fn random_hamiltonian<R: Rng + ?Sized>(n: usize, extra_p: f64, rng: &mut R) -> (Self, Vec<usize>) {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut g = Graph::new(n, false);
        for i in 0..n {
            let (a, b) = (order[i], order[(i + 1) % n]);
            if a != b {
                g.add_edge(a, b).expect("in range");
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen::<f64>() < extra_p {
                    g.add_edge(a, b).expect("in range");
                }
            }
        }
        (g, order)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    fn set(&mut self, a: usize, b: usize) {
        self.rows[a][b / 64] |= 1 << (b % 64);
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(Error::Dimension(format!(
                "edge ({a},{b}) outside {} vertices",
                self.n
            )));
        }
        if a == b {
            return Err(Error::Format(format!("self-loop at {a}")));
        }
        self.set(a, b);
        if !self.directed {
            self.set(b, a);
        }
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a][b / 64] >> (b % 64) & 1 == 1
    }

    pub fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&b| self.has_edge(a, b))
    }

    pub fn edge_count(&self) -> usize {
        let total: usize = self
            .rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|w| w.count_ones() as usize)
            .sum();
        if self.directed {
            total
        } else {
            total / 2
        }
    }

    /// π(G): vertex v becomes π[v].
    pub fn permute(&self, pi: &[usize]) -> Graph {
        let mut g = Graph::new(self.n, self.directed);
        for a in 0..self.n {
            for b in self.successors(a) {
                g.set(pi[a], pi[b]);
            }
        }
        g
    }

    /// Cycle as a vertex order visiting every vertex once.
    pub fn is_hamiltonian_cycle(&self, cycle: &[usize]) -> bool {
        let n = self.n;
        if cycle.len() != n || n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        for &v in cycle {
            if v >= n || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        if n == 1 {
            return false;
        }
        (0..n).all(|i| self.has_edge(cycle[i], cycle[(i + 1) % n]))
    }

    /// Depth-first search for a Hamiltonian cycle starting at vertex 0.
    pub fn find_hamiltonian_cycle(&self) -> Option<Vec<usize>> {
        let n = self.n;
        if n < 2 {
            return None;
        }
        let preds: Vec<Vec<usize>> = (0..n)
            .map(|b| (0..n).filter(|&a| self.has_edge(a, b)).collect())
            .collect();
        if (0..n).any(|v| preds[v].is_empty() || self.successors(v).next().is_none()) {
            return None;
        }
        let mut path = vec![0];
        let mut visited = vec![false; n];
        visited[0] = true;
        if self.extend(&mut path, &mut visited, &preds) {
            Some(path)
        } else {
            None
        }
    }

    fn extend(&self, path: &mut Vec<usize>, visited: &mut [bool], preds: &[Vec<usize>]) -> bool {
        let n = self.n;
        let cur = *path.last().expect("nonempty");
        if path.len() == n {
            return self.has_edge(cur, path[0]);
        }
        // every unvisited vertex still needs an entry from cur or another
        // unvisited vertex, and an exit to an unvisited vertex or the start;
        // one whose only entry is cur must come next
        let mut forced = None;
        for v in (0..n).filter(|&v| !visited[v]) {
            let mut entries = preds[v].iter().filter(|&&p| p == cur || !visited[p]);
            match (entries.next(), entries.next()) {
                (None, _) => return false,
                (Some(&p), None) if p == cur => {
                    if forced.replace(v).is_some() {
                        return false;
                    }
                }
                _ => {}
            }
            if !self.successors(v).any(|b| b == path[0] || !visited[b]) {
                return false;
            }
        }
        let next: Vec<usize> = match forced {
            Some(v) => vec![v],
            None => self.successors(cur).filter(|&b| !visited[b]).collect(),
        };
        for b in next {
            visited[b] = true;
            path.push(b);
            if self.extend(path, visited, preds) {
                return true;
            }
            path.pop();
            visited[b] = false;
        }
        false
    }

    /// GRA1: magic, u32 LE vertex count, u8 directed flag, then the n×n
    /// adjacency bits row-major, LSB-first within each byte.
    pub fn to_gra1(&self) -> Vec<u8> {
        let mut out = b"GRA1".to_vec();
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.push(self.directed as u8);
        let mut bytes = vec![0u8; (self.n * self.n).div_ceil(8)];
        for a in 0..self.n {
            for b in 0..self.n {
                if self.has_edge(a, b) {
                    let i = a * self.n + b;
                    bytes[i / 8] |= 1 << (i % 8);
                }
            }
        }
        out.extend_from_slice(&bytes);
        out
    }

    pub fn from_gra1(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 || &bytes[..4] != b"GRA1" {
            return Err(Error::Format("missing GRA1 header".into()));
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        if n > 4096 {
            return Err(Error::Format(format!("{n} vertices is too many")));
        }
        let directed = match bytes[8] {
            0 => false,
            1 => true,
            f => return Err(Error::Format(format!("bad directed flag {f}"))),
        };
        let body = &bytes[9..];
        if body.len() != (n * n).div_ceil(8) {
            return Err(Error::Format(format!(
                "{} adjacency bytes for {n} vertices",
                body.len()
            )));
        }
        let mut g = Graph::new(n, directed);
        for a in 0..n {
            for b in 0..n {
                let i = a * n + b;
                if body[i / 8] >> (i % 8) & 1 == 1 {
                    if a == b {
                        return Err(Error::Format(format!("self-loop at {a}")));
                    }
                    g.set(a, b);
                }
            }
        }
        if !directed && (0..n).any(|a| (0..n).any(|b| g.has_edge(a, b) != g.has_edge(b, a))) {
            return Err(Error::Format("undirected adjacency is not symmetric".into()));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn petersen_is_not_hamiltonian_but_k4_is() {
        assert_eq!(Graph::petersen().edge_count(), 15);
        assert!(Graph::petersen().find_hamiltonian_cycle().is_none());
        let c = Graph::complete(4).find_hamiltonian_cycle().unwrap();
        assert!(Graph::complete(4).is_hamiltonian_cycle(&c));
    }

    #[test]
    fn planted_cycles_are_valid_and_permutations_carry_them() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, cyc) = Graph::random_hamiltonian(9, 0.2, &mut rng);
        assert!(g.is_hamiltonian_cycle(&cyc));
        let mut pi: Vec<usize> = (0..9).collect();
        pi.shuffle(&mut rng);
        let moved: Vec<usize> = cyc.iter().map(|&v| pi[v]).collect();
        assert!(g.permute(&pi).is_hamiltonian_cycle(&moved));
    }

    #[test]
    fn gra1_roundtrip_and_rejects() {
        let g = Graph::petersen();
        assert_eq!(Graph::from_gra1(&g.to_gra1()).unwrap(), g);
        let d = Graph::from_edges(3, true, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(Graph::from_gra1(&d.to_gra1()).unwrap(), d);
        let mut bad = g.to_gra1();
        bad.pop();
        assert!(Graph::from_gra1(&bad).is_err());
    }
}
