use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Complete,
    Star,
    Line,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Complete => "complete",
            TopologyKind::Star => "star",
            TopologyKind::Line => "line",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "complete" | "full" | "fully_connected" => Ok(TopologyKind::Complete),
            "star" => Ok(TopologyKind::Star),
            "line" | "path" => Ok(TopologyKind::Line),
            other => Err(Error::Unknown {
                what: "topology",
                name: other.to_string(),
            }),
        }
    }
}

/// An undirected simple graph on nodes `0..n`.
///
/// Edges are stored as ordered pairs `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    kind: Option<TopologyKind>,
}

impl Topology {
    /// Builds one of the named topologies. The star hub is node 0 and the
    /// line visits nodes in index order.
    pub fn build(kind: TopologyKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("node count must be positive"));
        }
        if n == 1 && kind != TopologyKind::Complete {
            return Err(Error::invalid(format!("{kind} topology needs at least 2 nodes")));
        }
        let edges: BTreeSet<(usize, usize)> = match kind {
            TopologyKind::Complete => (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
            TopologyKind::Star => (1..n).map(|j| (0, j)).collect(),
            TopologyKind::Line => (1..n).map(|j| (j - 1, j)).collect(),
        };
        Ok(Topology {
            n,
            edges,
            kind: Some(kind),
        })
    }

    /// Builds an arbitrary graph from an edge list. Self-loops, duplicates and
    /// out-of-range endpoints are rejected; connectivity is not required.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("node count must be positive"));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::invalid(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a},{b}) out of range for {n} nodes")));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a},{b})")));
            }
        }
        Ok(Topology {
            n,
            edges: set,
            kind: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> Option<TopologyKind> {
        self.kind
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(t: &Topology) -> Vec<(usize, usize)> {
        t.edges().collect()
    }

    #[test]
    fn named_topologies() {
        let c = Topology::build(TopologyKind::Complete, 3).unwrap();
        assert_eq!(edges(&c), vec![(0, 1), (0, 2), (1, 2)]);
        let s = Topology::build(TopologyKind::Star, 4).unwrap();
        assert_eq!(edges(&s), vec![(0, 1), (0, 2), (0, 3)]);
        let l = Topology::build(TopologyKind::Line, 4).unwrap();
        assert_eq!(edges(&l), vec![(0, 1), (1, 2), (2, 3)]);
        for t in [c, s, l] {
            assert!(t.is_connected());
        }
    }

    #[test]
    fn single_node_only_for_complete() {
        let c = Topology::build(TopologyKind::Complete, 1).unwrap();
        assert_eq!(c.edge_count(), 0);
        assert!(c.is_connected());
        assert!(Topology::build(TopologyKind::Star, 1).is_err());
        assert!(Topology::build(TopologyKind::Line, 1).is_err());
        assert!(Topology::build(TopologyKind::Line, 0).is_err());
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!("ring".parse::<TopologyKind>().is_err());
        assert_eq!("Star".parse::<TopologyKind>().unwrap(), TopologyKind::Star);
    }

    #[test]
    fn edge_list_validation() {
        assert!(Topology::from_edges(3, [(0, 0)]).is_err());
        assert!(Topology::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Topology::from_edges(3, [(0, 3)]).is_err());
        let t = Topology::from_edges(3, [(0, 1)]).unwrap();
        assert!(!t.is_connected());
    }
}
