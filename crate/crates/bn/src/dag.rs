use serde::{Deserialize, Serialize};

use crate::error::{BnError, Result};

/// A named random variable with a finite value space `0..cardinality`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub cardinality: usize,
}

impl Node {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Self {
        Node {
            name: name.into(),
            cardinality,
        }
    }
}

/// Directed acyclic graph over [`Node`]s.
///
/// Parents of every node are kept sorted by node index so that CPT layouts
/// are independent of the order in which edges were declared.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DagRepr", into = "DagRepr")]
pub struct Dag {
    nodes: Vec<Node>,
    parents: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct DagRepr {
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
}

impl TryFrom<DagRepr> for Dag {
    type Error = BnError;

    fn try_from(repr: DagRepr) -> Result<Self> {
        let edges: Vec<(&str, &str)> = repr
            .edges
            .iter()
            .map(|(p, c)| (p.as_str(), c.as_str()))
            .collect();
        Dag::new(repr.nodes, &edges)
    }
}

impl From<Dag> for DagRepr {
    fn from(dag: Dag) -> Self {
        let edges = dag
            .edges()
            .into_iter()
            .map(|(p, c)| (dag.nodes[p].name.clone(), dag.nodes[c].name.clone()))
            .collect();
        DagRepr {
            nodes: dag.nodes,
            edges,
        }
    }
}

impl Dag {
    pub fn new(nodes: Vec<Node>, edges: &[(&str, &str)]) -> Result<Dag> {
        for (i, node) in nodes.iter().enumerate() {
            if node.cardinality == 0 {
                return Err(BnError::ZeroCardinality(node.name.clone()));
            }
            if nodes[..i].iter().any(|n| n.name == node.name) {
                return Err(BnError::DuplicateNode(node.name.clone()));
            }
        }

        let lookup = |name: &str| {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| BnError::UnknownNode(name.to_string()))
        };

        let mut parents = vec![Vec::new(); nodes.len()];
        for &(p, c) in edges {
            let (pi, ci) = (lookup(p)?, lookup(c)?);
            if pi == ci {
                return Err(BnError::Cycle(p.to_string()));
            }
            if parents[ci].contains(&pi) || parents[pi].contains(&ci) {
                return Err(BnError::DuplicateEdge(p.to_string(), c.to_string()));
            }
            parents[ci].push(pi);
        }
        for ps in &mut parents {
            ps.sort_unstable();
        }

        let dag = Dag { nodes, parents };
        dag.check_acyclic()?;
        Ok(dag)
    }

    fn check_acyclic(&self) -> Result<()> {
        let order = self.topological_order();
        if order.len() == self.nodes.len() {
            return Ok(());
        }
        // Nodes Kahn's algorithm never reached sit on or below a cycle.
        let stuck = (0..self.nodes.len())
            .find(|i| !order.contains(i))
            .expect("incomplete order has a missing node");
        Err(BnError::Cycle(self.nodes[stuck].name.clone()))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.nodes[index].cardinality
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| BnError::UnknownNode(name.to_string()))
    }

    pub fn parents(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    pub fn children(&self, index: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&c| self.parents[c].contains(&index))
            .collect()
    }

    /// All edges as `(parent, child)` pairs, ordered by child then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect()
    }

    /// Kahn's algorithm, always picking the lowest ready index.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while let Some(next) = (0..n).find(|&i| !done[i] && indegree[i] == 0) {
            done[next] = true;
            order.push(next);
            for c in 0..n {
                if self.parents[c].contains(&next) {
                    indegree[c] -= 1;
                }
            }
        }
        order
    }

    /// Marks every node that is in `seeds` or an ancestor of one.
    pub fn ancestral_set(&self, seeds: &[usize]) -> Vec<bool> {
        let mut marked = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            if !marked[v] {
                marked[v] = true;
                stack.extend_from_slice(&self.parents[v]);
            }
        }
        marked
    }

    /// Removes a root node whose children have it as their only parent.
    ///
    /// Under maximum likelihood the children then become roots fitted to their
    /// empirical marginals, which is exactly what summing the root out of the
    /// fitted joint would give.
    pub fn without_root(&self, name: &str) -> Result<Dag> {
        let idx = self.require(name)?;
        let not_droppable = |reason: &str| BnError::NotDroppable {
            node: name.to_string(),
            reason: reason.to_string(),
        };
        if !self.parents[idx].is_empty() {
            return Err(not_droppable("it has parents"));
        }
        if self
            .children(idx)
            .iter()
            .any(|&c| self.parents[c].len() != 1)
        {
            return Err(not_droppable("a child has other parents"));
        }

        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != idx)
            .map(|(_, n)| n.clone())
            .collect();
        let edges: Vec<(&str, &str)> = self
            .edges()
            .into_iter()
            .filter(|&(p, _)| p != idx)
            .map(|(p, c)| (self.nodes[p].name.as_str(), self.nodes[c].name.as_str()))
            .collect();
        Dag::new(nodes, &edges)
    }
}
