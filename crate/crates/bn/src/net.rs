use serde::{Deserialize, Serialize};

use crate::cpt::Cpt;
use crate::dag::Dag;
use crate::error::{BnError, Result};

/// A DAG together with one CPT per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetRepr", into = "NetRepr")]
pub struct BayesNet {
    dag: Dag,
    cpts: Vec<Cpt>,
}

#[derive(Serialize, Deserialize)]
struct NetRepr {
    dag: Dag,
    cpts: Vec<Cpt>,
}

impl TryFrom<NetRepr> for BayesNet {
    type Error = BnError;

    fn try_from(r: NetRepr) -> Result<BayesNet> {
        BayesNet::new(r.dag, r.cpts)
    }
}

impl From<BayesNet> for NetRepr {
    fn from(n: BayesNet) -> NetRepr {
        NetRepr {
            dag: n.dag,
            cpts: n.cpts,
        }
    }
}

impl BayesNet {
    /// Pairs a DAG with its CPTs, given in node order.
    pub fn new(dag: Dag, cpts: Vec<Cpt>) -> Result<BayesNet> {
        if cpts.len() != dag.len() {
            return Err(BnError::InvalidNetwork(format!(
                "{} nodes but {} tables",
                dag.len(),
                cpts.len()
            )));
        }
        for (i, cpt) in cpts.iter().enumerate() {
            let name = &dag.node(i).name;
            let parent_cards: Vec<usize> =
                dag.parents(i).iter().map(|&p| dag.cardinality(p)).collect();
            if cpt.child() != i
                || cpt.parents() != dag.parents(i)
                || cpt.cardinality() != dag.cardinality(i)
                || cpt.parent_cards() != parent_cards.as_slice()
            {
                return Err(BnError::InvalidNetwork(format!(
                    "table for `{name}` does not match its family in the graph"
                )));
            }
        }
        Ok(BayesNet { dag, cpts })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, node: usize) -> &Cpt {
        &self.cpts[node]
    }

    /// Probability of a complete assignment (one value per node).
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        self.cpts
            .iter()
            .map(|cpt| {
                let parent_values: Vec<usize> =
                    cpt.parents().iter().map(|&p| assignment[p]).collect();
                cpt.prob(assignment[cpt.child()], &parent_values)
            })
            .product()
    }

    pub(crate) fn check_assignment(&self, var: usize, value: usize) -> Result<()> {
        if var >= self.dag.len() {
            return Err(BnError::VariableOutOfRange(var));
        }
        let card = self.dag.cardinality(var);
        if value >= card {
            return Err(BnError::ValueOutOfRange {
                node: self.dag.node(var).name.clone(),
                value,
                cardinality: card,
            });
        }
        Ok(())
    }

    /// Validates a query/evidence pair and returns the evidence as a dense
    /// per-variable lookup.
    pub(crate) fn evidence_lookup(
        &self,
        query: usize,
        evidence: &[(usize, usize)],
    ) -> Result<Vec<Option<usize>>> {
        if query >= self.dag.len() {
            return Err(BnError::VariableOutOfRange(query));
        }
        let mut lookup = vec![None; self.dag.len()];
        for &(var, value) in evidence {
            self.check_assignment(var, value)?;
            if var == query {
                return Err(BnError::QueryInEvidence(self.dag.node(var).name.clone()));
            }
            if lookup[var].replace(value).is_some() {
                return Err(BnError::DuplicateEvidence(self.dag.node(var).name.clone()));
            }
        }
        Ok(lookup)
    }
}
