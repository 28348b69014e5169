//! Per-attribute posterior breakdowns behind an object's score.
//!
//! For every cell an object covers, each attribute is queried given the cell
//! and all remaining attributes as hard evidence. Attributes whose observed
//! value ranks low in their own posterior are the ones that make the object
//! look anomalous.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TrackedDetection;
use crate::network::{class_cpt_query, CellEvidence};
use crate::pipeline::{Reason, Scorer};
use crate::vocab::{class_name, Aspect, BoxSize, Category, Direction, Intersection, Velocity};

/// Posterior of one attribute with the observed value's standing in it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeDistribution {
    pub variable: String,
    /// `(label, probability)` in value-space order.
    pub values: Vec<(String, f64)>,
    pub observed: String,
    pub observed_probability: f64,
    /// 1 for the most probable value; ties share the better rank.
    pub rank: usize,
    /// The evidence had probability zero; `values` is uniform.
    pub impossible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellExplanation {
    pub cell_size: u32,
    pub cell: u32,
    pub observed: Vec<(String, String)>,
    pub distributions: Vec<AttributeDistribution>,
}

impl CellExplanation {
    pub fn distribution(&self, variable: &str) -> Option<&AttributeDistribution> {
        self.distributions.iter().find(|d| d.variable == variable)
    }
}

/// How per-cell scores became the object score at one granularity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub cell_size: u32,
    pub cells: Vec<u32>,
    pub cell_scores: Vec<f64>,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectExplanation {
    pub frame: u32,
    pub track_id: u64,
    pub class_id: u16,
    pub class_name: String,
    pub score: f64,
    pub reason: Option<Reason>,
    pub trace: Vec<TraceStep>,
    pub fusion: crate::pipeline::Fusion,
    pub cells: Vec<CellExplanation>,
}

fn class_label(class_id: u16) -> String {
    class_name(class_id).map_or_else(|| class_id.to_string(), str::to_string)
}

fn rank_of(probs: &[f64], observed: usize) -> usize {
    let p = probs[observed];
    1 + probs.iter().filter(|&&q| q > p).count()
}

fn distribution(
    variable: &str,
    labels: Vec<String>,
    probs: &[f64],
    observed: usize,
    impossible: bool,
) -> AttributeDistribution {
    AttributeDistribution {
        variable: variable.to_string(),
        observed: labels[observed].clone(),
        observed_probability: probs[observed],
        rank: rank_of(probs, observed),
        values: labels.into_iter().zip(probs.iter().copied()).collect(),
        impossible,
    }
}

fn labels<C: Category + std::fmt::Display>() -> Vec<String> {
    C::ALL.iter().map(|c| c.to_string()).collect()
}

/// Breakdown for one cell of one granularity. The class posterior is the
/// exact query used for scoring.
pub fn explain_cell(
    scorer: &Scorer<'_>,
    granularity: usize,
    evidence: &CellEvidence,
    class_id: u16,
) -> Result<CellExplanation> {
    let g = &scorer.bundle().granularities[granularity];
    let nodes = scorer.nodes(granularity);
    let net = &g.net;
    let full = nodes.assignment(evidence, Some(class_id));

    let mut out = Vec::new();

    // classes never seen in training have zero prior and are left out
    let class = class_cpt_query(net, nodes, evidence)?;
    let mut support: Vec<u16> = g.discretizer.classes.keys().copied().collect();
    if !support.contains(&class_id) {
        support.push(class_id);
        support.sort_unstable();
    }
    let probs: Vec<f64> = support
        .iter()
        .map(|&c| if class.impossible { 1.0 / support.len() as f64 } else { class.probs[c as usize - 1] })
        .collect();
    let observed = support.iter().position(|&c| c == class_id).expect("class in support");
    out.push(distribution(
        "C",
        support.iter().map(|&c| class_label(c)).collect(),
        &probs,
        observed,
        class.impossible,
    ));

    let mut attribute = |name: &str, var: usize, labels: Vec<String>| -> Result<()> {
        let rest: Vec<(usize, usize)> = full.iter().copied().filter(|&(v, _)| v != var).collect();
        let observed = full.iter().find(|&&(v, _)| v == var).expect("attribute observed").1;
        let post = net.eliminate(var, &rest)?;
        out.push(distribution(name, labels, &post.probs, observed, post.impossible));
        Ok(())
    };
    attribute("I", nodes.i, labels::<Intersection>())?;
    attribute("BS", nodes.bs, labels::<BoxSize>())?;
    attribute("BAR", nodes.bar, labels::<Aspect>())?;
    if let (Some(v), Some(_)) = (nodes.v, evidence.velocity) {
        attribute("V", v, labels::<Velocity>())?;
    }
    if let (Some(d), Some(_)) = (nodes.d, evidence.direction) {
        attribute("D", d, labels::<Direction>())?;
    }

    let mut observed = vec![
        ("G".to_string(), evidence.cell.to_string()),
        ("C".to_string(), class_label(class_id)),
        ("I".to_string(), evidence.intersection.to_string()),
        ("BS".to_string(), evidence.size.to_string()),
        ("BAR".to_string(), evidence.aspect.to_string()),
    ];
    if let Some(v) = evidence.velocity {
        observed.push(("V".to_string(), v.to_string()));
    }
    if let Some(d) = evidence.direction {
        observed.push(("D".to_string(), d.to_string()));
    }
    Ok(CellExplanation {
        cell_size: g.cell_size(),
        cell: evidence.cell,
        observed,
        distributions: out,
    })
}

/// Explanations for every covered cell at the selected granularities (all
/// when `granularities` is `None`), plus the aggregation trace.
pub fn explain_object(
    scorer: &Scorer<'_>,
    det: &TrackedDetection,
    prev: Option<&TrackedDetection>,
    granularities: Option<&[usize]>,
) -> Result<ObjectExplanation> {
    let scored = scorer.score_object(det, prev)?;
    let detailed = scorer.score_detailed(det, prev)?;
    let all: Vec<usize> = (0..scorer.bundle().granularities.len()).collect();
    let selected = granularities.unwrap_or(&all);

    let mut trace = Vec::new();
    let mut cells = Vec::new();
    if let Some(detailed) = &detailed {
        for (k, g) in detailed.iter().enumerate() {
            trace.push(TraceStep {
                cell_size: g.cell_size,
                cells: g.cells.iter().map(|c| c.evidence.cell).collect(),
                cell_scores: g.cells.iter().map(|c| c.probability).collect(),
                mean: g.score,
            });
            if selected.contains(&k) {
                for c in &g.cells {
                    cells.push(explain_cell(scorer, k, &c.evidence, det.class_id)?);
                }
            }
        }
    }
    Ok(ObjectExplanation {
        frame: det.frame,
        track_id: det.track_id,
        class_id: det.class_id,
        class_name: class_label(det.class_id),
        score: scored.score,
        reason: scored.reason,
        trace,
        fusion: scorer.bundle().fusion,
        cells,
    })
}

/// Category/probability series per cell and attribute for external charts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub series: Vec<PlotSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub cell_size: u32,
    pub cell: u32,
    pub variable: String,
    pub categories: Vec<String>,
    pub probabilities: Vec<f64>,
    pub observed: String,
}

impl ObjectExplanation {
    pub fn plot_data(&self) -> PlotData {
        let series = self
            .cells
            .iter()
            .flat_map(|c| {
                c.distributions.iter().map(move |d| PlotSeries {
                    cell_size: c.cell_size,
                    cell: c.cell,
                    variable: d.variable.clone(),
                    categories: d.values.iter().map(|v| v.0.clone()).collect(),
                    probabilities: d.values.iter().map(|v| v.1).collect(),
                    observed: d.observed.clone(),
                })
            })
            .collect();
        PlotData { series }
    }

    /// Writes the explanation to `path` and the plot data next to it with
    /// the extension `.plot.json`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_json(path, self)?;
        write_json(&path.with_extension("plot.json"), &self.plot_data())
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
