use serde::{Deserialize, Serialize};

use crate::error::{BnError, Result};
use crate::factor::Factor;

/// Conditional probability table `P(child | parents)`.
///
/// Rows are indexed by the mixed-radix parent configuration (first parent most
/// significant). A row whose parent configuration never occurred in the
/// training data is flagged unobserved and holds the uniform distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CptRepr", into = "CptRepr")]
pub struct Cpt {
    child: usize,
    parents: Vec<usize>,
    cardinality: usize,
    parent_cards: Vec<usize>,
    probs: Vec<f64>,
    observed: Vec<bool>,
    counts: Option<Vec<u64>>,
}

/// Fitted tables persist only their observed count rows; probabilities are
/// recomputed on load by the same division, so a round trip is bit-exact.
#[derive(Serialize, Deserialize)]
struct CptRepr {
    child: usize,
    parents: Vec<usize>,
    cardinality: usize,
    parent_cards: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<(usize, Vec<u64>)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
}

impl TryFrom<CptRepr> for Cpt {
    type Error = BnError;

    fn try_from(r: CptRepr) -> Result<Cpt> {
        match (r.counts, r.probs) {
            (Some(rows), None) => {
                let configs: usize = r.parent_cards.iter().product();
                let mut counts = vec![0u64; configs * r.cardinality];
                for (config, row) in rows {
                    if config >= configs || row.len() != r.cardinality {
                        return Err(BnError::InvalidTable {
                            node: format!("#{}", r.child),
                            reason: "count row out of shape".into(),
                        });
                    }
                    counts[config * r.cardinality..(config + 1) * r.cardinality]
                        .copy_from_slice(&row);
                }
                Cpt::from_counts(r.child, r.cardinality, r.parents, r.parent_cards, counts)
            }
            (None, Some(probs)) => {
                Cpt::from_probs(r.child, r.cardinality, r.parents, r.parent_cards, probs)
            }
            _ => Err(BnError::InvalidTable {
                node: format!("#{}", r.child),
                reason: "exactly one of `counts` or `probs` is required".into(),
            }),
        }
    }
}

impl From<Cpt> for CptRepr {
    fn from(cpt: Cpt) -> CptRepr {
        let card = cpt.cardinality;
        let (counts, probs) = match &cpt.counts {
            Some(counts) => {
                let rows = counts
                    .chunks_exact(card)
                    .enumerate()
                    .filter(|(_, row)| row.iter().any(|&c| c > 0))
                    .map(|(config, row)| (config, row.to_vec()))
                    .collect();
                (Some(rows), None)
            }
            None => (None, Some(cpt.probs.clone())),
        };
        CptRepr {
            child: cpt.child,
            parents: cpt.parents,
            cardinality: card,
            parent_cards: cpt.parent_cards,
            counts,
            probs,
        }
    }
}

fn check_shape(
    child: usize,
    cardinality: usize,
    parents: &[usize],
    parent_cards: &[usize],
) -> Result<usize> {
    let bad = |reason: &str| BnError::InvalidTable {
        node: format!("#{child}"),
        reason: reason.to_string(),
    };
    if cardinality == 0 || parent_cards.contains(&0) {
        return Err(bad("zero cardinality"));
    }
    if parents.len() != parent_cards.len() {
        return Err(bad("parent and cardinality lists differ in length"));
    }
    if parents.contains(&child) {
        return Err(bad("node is its own parent"));
    }
    if parents.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("parents must be strictly increasing"));
    }
    Ok(parent_cards.iter().product())
}

impl Cpt {
    /// Maximum-likelihood table from joint counts `N(parents = config, child = x)`
    /// laid out as `config * cardinality + x`.
    pub fn from_counts(
        child: usize,
        cardinality: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        counts: Vec<u64>,
    ) -> Result<Cpt> {
        let configs = check_shape(child, cardinality, &parents, &parent_cards)?;
        if counts.len() != configs * cardinality {
            return Err(BnError::InvalidTable {
                node: format!("#{child}"),
                reason: format!(
                    "expected {} counts, got {}",
                    configs * cardinality,
                    counts.len()
                ),
            });
        }
        let uniform = 1.0 / cardinality as f64;
        let mut probs = Vec::with_capacity(counts.len());
        let mut observed = Vec::with_capacity(configs);
        for row in counts.chunks_exact(cardinality) {
            let total: u64 = row.iter().sum();
            if total == 0 {
                observed.push(false);
                probs.extend(std::iter::repeat_n(uniform, cardinality));
            } else {
                observed.push(true);
                let t = total as f64;
                probs.extend(row.iter().map(|&c| c as f64 / t));
            }
        }
        Ok(Cpt {
            child,
            parents,
            cardinality,
            parent_cards,
            probs,
            observed,
            counts: Some(counts),
        })
    }

    /// Table from explicit row distributions; every row counts as observed.
    pub fn from_probs(
        child: usize,
        cardinality: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        probs: Vec<f64>,
    ) -> Result<Cpt> {
        let configs = check_shape(child, cardinality, &parents, &parent_cards)?;
        let bad = |reason: String| BnError::InvalidTable {
            node: format!("#{child}"),
            reason,
        };
        if probs.len() != configs * cardinality {
            return Err(bad(format!(
                "expected {} probabilities, got {}",
                configs * cardinality,
                probs.len()
            )));
        }
        for (config, row) in probs.chunks_exact(cardinality).enumerate() {
            if row.iter().any(|p| !(*p >= 0.0)) {
                return Err(bad(format!("row {config} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(bad(format!("row {config} sums to {sum}")));
            }
        }
        Ok(Cpt {
            child,
            parents,
            cardinality,
            parent_cards,
            probs,
            observed: vec![true; configs],
            counts: None,
        })
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn num_configs(&self) -> usize {
        self.observed.len()
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mixed-radix index of a parent assignment given in parent order.
    pub fn config_index(&self, parent_values: &[usize]) -> usize {
        debug_assert_eq!(parent_values.len(), self.parents.len());
        parent_values
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&v, &card)| acc * card + v)
    }

    /// Inverse of [`Cpt::config_index`].
    pub fn config_values(&self, mut config: usize) -> Vec<usize> {
        let mut values = vec![0; self.parents.len()];
        for k in (0..values.len()).rev() {
            values[k] = config % self.parent_cards[k];
            config /= self.parent_cards[k];
        }
        values
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.probs[config * self.cardinality..(config + 1) * self.cardinality]
    }

    pub fn is_observed(&self, config: usize) -> bool {
        self.observed[config]
    }

    pub fn prob(&self, child_value: usize, parent_values: &[usize]) -> f64 {
        self.row(self.config_index(parent_values))[child_value]
    }

    /// Factor over the family variables not fixed by `evidence`.
    ///
    /// `evidence` is indexed by variable; `Some(v)` pins that variable. Only
    /// the surviving entries are visited, so a fully observed family costs a
    /// single lookup.
    pub fn reduced_factor(&self, evidence: &[Option<usize>]) -> Factor {
        // family in ascending variable order, with each member's weight in
        // the flat probs index
        let mut family: Vec<(usize, usize, usize)> = Vec::with_capacity(self.parents.len() + 1);
        let mut weight = self.cardinality;
        for k in (0..self.parents.len()).rev() {
            family.push((self.parents[k], self.parent_cards[k], weight));
            weight *= self.parent_cards[k];
        }
        family.push((self.child, self.cardinality, 1));
        family.sort_unstable_by_key(|f| f.0);

        let mut base = 0usize;
        let mut free = Vec::with_capacity(family.len());
        for &(var, card, w) in &family {
            match evidence.get(var).copied().flatten() {
                Some(value) => base += value * w,
                None => free.push((var, card, w)),
            }
        }

        let scope: Vec<usize> = free.iter().map(|f| f.0).collect();
        let cards: Vec<usize> = free.iter().map(|f| f.1).collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assign = vec![0usize; free.len()];
        let mut idx = base;
        for _ in 0..size {
            values.push(self.probs[idx]);
            for l in (0..free.len()).rev() {
                assign[l] += 1;
                if assign[l] < free[l].1 {
                    idx += free[l].2;
                    break;
                }
                assign[l] = 0;
                idx -= (free[l].1 - 1) * free[l].2;
            }
        }
        Factor::new(scope, cards, values).expect("CPT entries are valid probabilities")
    }

    pub fn to_factor(&self) -> Factor {
        self.reduced_factor(&[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_normalize_and_flag_unobserved_rows() {
        // child card 2, one parent of card 3; parent value 1 never seen
        let cpt = Cpt::from_counts(1, 2, vec![0], vec![3], vec![3, 1, 0, 0, 2, 2]).unwrap();
        assert_eq!(cpt.row(0), &[0.75, 0.25]);
        assert!(!cpt.is_observed(1));
        assert_eq!(cpt.row(1), &[0.5, 0.5]);
        assert_eq!(cpt.row(2), &[0.5, 0.5]);
        assert!(cpt.is_observed(2));
    }

    #[test]
    fn mixed_radix_round_trip() {
        let cpt = Cpt::from_counts(0, 2, vec![1, 2, 3], vec![3, 4, 2], vec![1; 48]).unwrap();
        for config in 0..cpt.num_configs() {
            assert_eq!(cpt.config_index(&cpt.config_values(config)), config);
        }
        assert_eq!(cpt.config_index(&[1, 2, 1]), 8 + 4 + 1);
    }

    #[test]
    fn reduced_factor_agrees_with_prob() {
        // child 1 (card 2) with parents 0 (card 3) and 2 (card 2)
        let probs: Vec<f64> = (0..6)
            .flat_map(|c| {
                let p = (c as f64 + 1.0) / 10.0;
                [p, 1.0 - p]
            })
            .collect();
        let cpt = Cpt::from_probs(1, 2, vec![0, 2], vec![3, 2], probs).unwrap();
        let full = cpt.to_factor();
        assert_eq!(full.scope(), &[0, 1, 2]);
        for a in 0..3 {
            for x in 0..2 {
                for b in 0..2 {
                    assert_eq!(full.value(&[a, x, b]), cpt.prob(x, &[a, b]));
                }
            }
        }
        let ev = [Some(2), None, Some(1)];
        let reduced = cpt.reduced_factor(&ev);
        assert_eq!(reduced.scope(), &[1]);
        assert_eq!(reduced.values(), cpt.row(cpt.config_index(&[2, 1])));
    }

    #[test]
    fn serde_is_bit_exact() {
        let cpt = Cpt::from_counts(0, 3, vec![1], vec![2], vec![1, 1, 1, 0, 0, 0]).unwrap();
        let json = serde_json::to_string(&cpt).unwrap();
        let back: Cpt = serde_json::from_str(&json).unwrap();
        assert_eq!(cpt, back);
        assert!(json.contains("counts"));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(Cpt::from_probs(0, 2, vec![], vec![], vec![0.5, 0.6]).is_err());
        assert!(Cpt::from_probs(0, 2, vec![1], vec![2], vec![0.5, 0.5]).is_err());
    }
}
