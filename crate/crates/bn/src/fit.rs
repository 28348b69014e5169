use crate::cpt::Cpt;
use crate::dag::Dag;
use crate::data::DataTable;
use crate::error::{BnError, Result};
use crate::net::BayesNet;

/// Maximum-likelihood CPTs: `P(x | π) = N(x, π) / N(π)`.
///
/// One pass over the rows accumulates the family counts of every node.
/// Parent configurations that never occur keep a uniform row flagged as
/// unobserved; observed rows are left unsmoothed.
pub fn fit_mle(dag: &Dag, data: &DataTable) -> Result<BayesNet> {
    if data.is_empty() {
        return Err(BnError::EmptyTable);
    }
    let columns: Vec<usize> = dag
        .nodes()
        .iter()
        .map(|n| {
            data.column_index(&n.name)
                .ok_or_else(|| BnError::MissingColumn(n.name.clone()))
        })
        .collect::<Result<_>>()?;

    struct Family {
        parent_cols: Vec<usize>,
        parent_cards: Vec<usize>,
        child_col: usize,
        card: usize,
        counts: Vec<u64>,
    }

    let mut families: Vec<Family> = (0..dag.len())
        .map(|i| {
            let parent_cards: Vec<usize> =
                dag.parents(i).iter().map(|&p| dag.cardinality(p)).collect();
            let configs: usize = parent_cards.iter().product();
            Family {
                parent_cols: dag.parents(i).iter().map(|&p| columns[p]).collect(),
                parent_cards,
                child_col: columns[i],
                card: dag.cardinality(i),
                counts: vec![0; configs * dag.cardinality(i)],
            }
        })
        .collect();

    for (r, row) in data.rows().enumerate() {
        for (i, &col) in columns.iter().enumerate() {
            if row[col] as usize >= dag.cardinality(i) {
                return Err(BnError::InvalidTable {
                    node: dag.node(i).name.clone(),
                    reason: format!(
                        "row {r} holds value {} but the cardinality is {}",
                        row[col],
                        dag.cardinality(i)
                    ),
                });
            }
        }
        for fam in &mut families {
            let config = fam
                .parent_cols
                .iter()
                .zip(&fam.parent_cards)
                .fold(0usize, |acc, (&c, &card)| acc * card + row[c] as usize);
            fam.counts[config * fam.card + row[fam.child_col] as usize] += 1;
        }
    }

    let cpts = families
        .into_iter()
        .enumerate()
        .map(|(i, fam)| {
            Cpt::from_counts(
                i,
                fam.card,
                dag.parents(i).to_vec(),
                fam.parent_cards,
                fam.counts,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    BayesNet::new(dag.clone(), cpts)
}

/// Natural-log likelihood of the rows under `net`; `-inf` if any row has
/// probability zero.
pub fn log_likelihood(net: &BayesNet, data: &DataTable) -> Result<f64> {
    let dag = net.dag();
    let columns: Vec<usize> = dag
        .nodes()
        .iter()
        .map(|n| {
            data.column_index(&n.name)
                .ok_or_else(|| BnError::MissingColumn(n.name.clone()))
        })
        .collect::<Result<_>>()?;
    let mut assignment = vec![0usize; dag.len()];
    let mut total = 0.0;
    for row in data.rows() {
        for (i, &c) in columns.iter().enumerate() {
            assignment[i] = row[c] as usize;
            net.check_assignment(i, assignment[i])?;
        }
        for cpt in net.cpts() {
            let parents: Vec<usize> = cpt.parents().iter().map(|&p| assignment[p]).collect();
            total += cpt.prob(assignment[cpt.child()], &parents).ln();
        }
    }
    Ok(total)
}
