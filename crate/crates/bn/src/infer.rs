use std::collections::BTreeSet;

use crate::error::{BnError, Result};
use crate::factor::Factor;
use crate::net::BayesNet;

/// Normalized posterior over the query variable's values.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub probs: Vec<f64>,
    /// The evidence has probability zero under the network; `probs` then
    /// holds the uniform distribution.
    pub impossible: bool,
}

impl Posterior {
    /// Turns unnormalized weights into a posterior, falling back to uniform
    /// when they carry no mass.
    pub fn from_weights(weights: &[f64]) -> Posterior {
        let total: f64 = weights.iter().sum();
        if total > 0.0 && total.is_finite() {
            Posterior {
                probs: weights.iter().map(|w| w / total).collect(),
                impossible: false,
            }
        } else {
            let u = 1.0 / weights.len() as f64;
            Posterior {
                probs: vec![u; weights.len()],
                impossible: true,
            }
        }
    }
}

/// Greedy min-degree elimination order over the interaction graph of the
/// given factor scopes. Ties go to the lowest variable index.
pub fn min_degree_order(scopes: &[&[usize]], eliminate: &[usize]) -> Vec<usize> {
    let n = scopes
        .iter()
        .flat_map(|s| s.iter())
        .chain(eliminate)
        .max()
        .map_or(0, |m| m + 1);
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for scope in scopes {
        for &a in scope.iter() {
            for &b in scope.iter() {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }

    let mut pending: BTreeSet<usize> = eliminate.iter().copied().collect();
    let mut order = Vec::with_capacity(pending.len());
    while let Some(&next) = pending.iter().min_by_key(|&&v| (adj[v].len(), v)) {
        pending.remove(&next);
        order.push(next);
        let neighbours: Vec<usize> = std::mem::take(&mut adj[next]).into_iter().collect();
        for &a in &neighbours {
            adj[a].remove(&next);
            for &b in &neighbours {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    order
}

impl BayesNet {
    /// Exact `P(query | evidence)` by variable elimination.
    ///
    /// Nodes outside the ancestral set of the query and evidence are pruned
    /// first (they sum to one), CPTs are reduced by the evidence, and the
    /// remaining hidden variables are eliminated in min-degree order.
    pub fn eliminate(&self, query: usize, evidence: &[(usize, usize)]) -> Result<Posterior> {
        let (factors, hidden) = self.reduced_factors(query, evidence)?;
        let scopes: Vec<&[usize]> = factors.iter().map(Factor::scope).collect();
        let order = min_degree_order(&scopes, &hidden);
        Ok(run_elimination(factors, &order))
    }

    /// Same as [`BayesNet::eliminate`] with a caller-chosen order. Variables
    /// in `order` that need no elimination are skipped; every hidden variable
    /// must appear.
    pub fn eliminate_with_order(
        &self,
        query: usize,
        evidence: &[(usize, usize)],
        order: &[usize],
    ) -> Result<Posterior> {
        let (factors, hidden) = self.reduced_factors(query, evidence)?;
        if hidden.iter().any(|v| !order.contains(v)) {
            return Err(BnError::BadOrder);
        }
        let order: Vec<usize> = order
            .iter()
            .copied()
            .filter(|v| hidden.contains(v))
            .collect();
        Ok(run_elimination(factors, &order))
    }

    fn reduced_factors(
        &self,
        query: usize,
        evidence: &[(usize, usize)],
    ) -> Result<(Vec<Factor>, Vec<usize>)> {
        let lookup = self.evidence_lookup(query, evidence)?;
        let mut seeds = vec![query];
        seeds.extend(evidence.iter().map(|&(v, _)| v));
        let relevant = self.dag().ancestral_set(&seeds);

        let factors = (0..self.dag().len())
            .filter(|&i| relevant[i])
            .map(|i| self.cpt(i).reduced_factor(&lookup))
            .collect();
        let hidden = (0..self.dag().len())
            .filter(|&i| relevant[i] && i != query && lookup[i].is_none())
            .collect();
        Ok((factors, hidden))
    }
}

fn run_elimination(mut factors: Vec<Factor>, order: &[usize]) -> Posterior {
    for &var in order {
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(var));
        factors = without;
        let product = with
            .iter()
            .fold(Factor::unit(), |acc, f| acc.product(f));
        factors.push(product.sum_out(var));
    }
    let joint = factors
        .iter()
        .fold(Factor::unit(), |acc, f| acc.product(f));
    debug_assert!(joint.scope().len() <= 1);
    Posterior::from_weights(joint.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Cpt, Dag, Node};

    /// rain -> wet <- sprinkler
    fn sprinkler() -> BayesNet {
        let dag = Dag::new(
            vec![
                Node::new("rain", 2),
                Node::new("sprinkler", 2),
                Node::new("wet", 2),
            ],
            &[("rain", "wet"), ("sprinkler", "wet")],
        )
        .unwrap();
        let cpts = vec![
            Cpt::from_probs(0, 2, vec![], vec![], vec![0.8, 0.2]).unwrap(),
            Cpt::from_probs(1, 2, vec![], vec![], vec![0.6, 0.4]).unwrap(),
            Cpt::from_probs(
                2,
                2,
                vec![0, 1],
                vec![2, 2],
                vec![1.0, 0.0, 0.1, 0.9, 0.2, 0.8, 0.01, 0.99],
            )
            .unwrap(),
        ];
        BayesNet::new(dag, cpts).unwrap()
    }

    #[test]
    fn root_marginal_without_evidence() {
        let net = sprinkler();
        assert_eq!(net.eliminate(0, &[]).unwrap().probs, vec![0.8, 0.2]);
    }

    #[test]
    fn explaining_away() {
        let net = sprinkler();
        let wet = net.eliminate(0, &[(2, 1)]).unwrap();
        let wet_and_sprinkler = net.eliminate(0, &[(2, 1), (1, 1)]).unwrap();
        // P(rain | wet) by hand: numerator 0.2*(0.6*0.8 + 0.4*0.99)
        let num = 0.2 * (0.6 * 0.8 + 0.4 * 0.99);
        let den = num + 0.8 * (0.4 * 0.9);
        assert!((wet.probs[1] - num / den).abs() < 1e-15);
        assert!(wet_and_sprinkler.probs[1] < wet.probs[1]);
    }

    #[test]
    fn impossible_evidence_falls_back_to_uniform() {
        let net = sprinkler();
        // rain=0, sprinkler=0 makes wet=1 impossible
        let post = net.eliminate(2, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(post.probs, vec![1.0, 0.0]);
        let post = net.eliminate(1, &[(0, 0), (2, 1)]).unwrap();
        assert!(!post.impossible);
        assert_eq!(post.probs, vec![0.0, 1.0]);

        let dag = Dag::new(vec![Node::new("a", 2), Node::new("b", 2)], &[("a", "b")]).unwrap();
        let cpts = vec![
            Cpt::from_probs(0, 2, vec![], vec![], vec![1.0, 0.0]).unwrap(),
            Cpt::from_probs(1, 2, vec![0], vec![2], vec![1.0, 0.0, 0.0, 1.0]).unwrap(),
        ];
        let net = BayesNet::new(dag, cpts).unwrap();
        let post = net.eliminate(0, &[(1, 1)]).unwrap();
        assert!(post.impossible);
        assert_eq!(post.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_queries() {
        let net = sprinkler();
        assert!(matches!(
            net.eliminate(0, &[(0, 1)]),
            Err(BnError::QueryInEvidence(_))
        ));
        assert!(matches!(
            net.eliminate(0, &[(2, 2)]),
            Err(BnError::ValueOutOfRange { .. })
        ));
        assert!(matches!(
            net.eliminate(0, &[(2, 1), (2, 0)]),
            Err(BnError::DuplicateEvidence(_))
        ));
        assert_eq!(net.eliminate(0, &[]).unwrap().probs.len(), 2);
        assert_eq!(
            net.eliminate_with_order(2, &[], &[0]),
            Err(BnError::BadOrder)
        );
    }

    #[test]
    fn min_degree_prefers_leaves() {
        // chain 0-1-2-3 plus a triangle 3-4-5
        let scopes: Vec<&[usize]> = vec![&[0, 1], &[1, 2], &[2, 3], &[3, 4, 5]];
        let order = min_degree_order(&scopes, &[0, 1, 2, 4, 5]);
        assert_eq!(order[0], 0);
        assert_eq!(order.len(), 5);
    }
}
