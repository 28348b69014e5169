//! Network structure over the bounding-box attributes and the class query.

use gridvad_bn::{BayesNet, Dag, DataTable, Node, Posterior};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::featurize::{ModelKind, ObservationTable};
use crate::vocab::{Aspect, BoxSize, Category, Direction, Intersection, Velocity, NUM_CLASSES};

pub const SPATIAL_EDGES: [(&str, &str); 7] = [
    ("F", "G"),
    ("G", "BS"),
    ("G", "I"),
    ("C", "BS"),
    ("C", "BAR"),
    ("BS", "I"),
    ("BAR", "I"),
];

pub const TEMPORAL_EDGES: [(&str, &str); 3] = [("C", "V"), ("G", "V"), ("C", "D")];

pub fn default_edges(kind: ModelKind) -> Vec<(String, String)> {
    let extra: &[(&str, &str)] = if kind.is_temporal() {
        &TEMPORAL_EDGES
    } else {
        &[]
    };
    SPATIAL_EDGES
        .iter()
        .chain(extra)
        .map(|&(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

fn nodes(kind: ModelKind, g_total: usize, f_total: Option<usize>) -> Vec<Node> {
    let mut nodes = Vec::new();
    if let Some(f) = f_total {
        nodes.push(Node::new("F", f));
    }
    nodes.extend([
        Node::new("G", g_total),
        Node::new("C", NUM_CLASSES),
        Node::new("I", Intersection::ALL.len()),
        Node::new("BS", BoxSize::ALL.len()),
        Node::new("BAR", Aspect::ALL.len()),
    ]);
    if kind.is_temporal() {
        nodes.push(Node::new("V", Velocity::ALL.len()));
        nodes.push(Node::new("D", Direction::ALL.len()));
    }
    nodes
}

/// Full structure including the frame root `F`.
pub fn build_structure(kind: ModelKind, g_total: u32, f_total: u32) -> Result<Dag> {
    build_structure_with(kind, g_total, f_total, &default_edges(kind))
}

/// Like [`build_structure`] with a caller-supplied edge list.
pub fn build_structure_with(
    kind: ModelKind,
    g_total: u32,
    f_total: u32,
    edges: &[(String, String)],
) -> Result<Dag> {
    let edges: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    Ok(Dag::new(
        nodes(kind, g_total as usize, Some(f_total.max(1) as usize)),
        &edges,
    )?)
}

/// The structure that is actually fitted: `F` marginalized out, which leaves
/// `G` as a root with its empirical frequency as prior.
pub fn fitted_structure(kind: ModelKind, g_total: u32, edges: &[(String, String)]) -> Result<Dag> {
    Ok(build_structure_with(kind, g_total, 1, edges)?.without_root("F")?)
}

/// State indices of an observation table in the fitted structure's columns.
pub fn to_data_table(table: &ObservationTable) -> DataTable {
    let mut columns: Vec<String> = ["G", "C", "I", "BS", "BAR"].map(String::from).to_vec();
    if table.kind.is_temporal() {
        columns.extend(["V", "D"].map(String::from));
    }
    let mut data = DataTable::with_capacity(columns, table.len());
    let mut row = Vec::with_capacity(7);
    for r in &table.rows {
        row.clear();
        row.extend([
            r.cell - 1,
            r.class_id as u32 - 1,
            r.intersection.index() as u32,
            r.size.index() as u32,
            r.aspect.index() as u32,
        ]);
        if table.kind.is_temporal() {
            row.push(r.velocity.map_or(0, |v| v.index() as u32));
            row.push(r.direction.map_or(0, |d| d.index() as u32));
        }
        data.push_row(&row).expect("row width matches the columns");
    }
    data
}

/// Hard evidence available for one (object, cell) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellEvidence {
    pub cell: u32,
    pub intersection: Intersection,
    pub size: BoxSize,
    pub aspect: Aspect,
    pub velocity: Option<Velocity>,
    pub direction: Option<Direction>,
}

/// Variable indices of the attribute nodes in a fitted network.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeMap {
    pub g: usize,
    pub c: usize,
    pub i: usize,
    pub bs: usize,
    pub bar: usize,
    pub v: Option<usize>,
    pub d: Option<usize>,
}

impl NodeMap {
    pub fn of(net: &BayesNet) -> Result<NodeMap> {
        let dag = net.dag();
        Ok(NodeMap {
            g: dag.require("G")?,
            c: dag.require("C")?,
            i: dag.require("I")?,
            bs: dag.require("BS")?,
            bar: dag.require("BAR")?,
            v: dag.index_of("V"),
            d: dag.index_of("D"),
        })
    }

    /// `(variable, state)` pairs for every attribute node, `C` included
    /// when a class is given.
    pub fn assignment(&self, e: &CellEvidence, class_id: Option<u16>) -> Vec<(usize, usize)> {
        let mut out = vec![
            (self.g, e.cell as usize - 1),
            (self.i, e.intersection.index()),
            (self.bs, e.size.index()),
            (self.bar, e.aspect.index()),
        ];
        if let (Some(v), Some(value)) = (self.v, e.velocity) {
            out.push((v, value.index()));
        }
        if let (Some(d), Some(value)) = (self.d, e.direction) {
            out.push((d, value.index()));
        }
        if let Some(c) = class_id {
            out.push((self.c, c as usize - 1));
        }
        out
    }
}

/// `P(C | G, I, BS, BAR [, V, D])`; the temporal attributes are used only
/// if the network has them.
pub fn class_cpt_query(net: &BayesNet, nodes: &NodeMap, e: &CellEvidence) -> Result<Posterior> {
    Ok(net.eliminate(nodes.c, &nodes.assignment(e, None))?)
}
