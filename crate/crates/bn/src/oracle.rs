use crate::error::{BnError, Result};
use crate::infer::Posterior;
use crate::net::BayesNet;

/// Largest joint (product of all cardinalities) the oracle will enumerate.
pub const BRUTE_FORCE_CAP: u128 = 10_000_000;

/// `P(query | evidence)` by enumerating every complete assignment and
/// multiplying CPT entries directly. Shares no code with elimination and
/// exists to check it.
pub fn joint_brute_force(
    net: &BayesNet,
    query: usize,
    evidence: &[(usize, usize)],
) -> Result<Posterior> {
    let lookup = net.evidence_lookup(query, evidence)?;
    let dag = net.dag();
    let size: u128 = dag.nodes().iter().map(|n| n.cardinality as u128).product();
    if size > BRUTE_FORCE_CAP {
        return Err(BnError::TooLarge {
            size,
            cap: BRUTE_FORCE_CAP,
        });
    }

    let n = dag.len();
    let mut weights = vec![0.0; dag.cardinality(query)];
    let mut assignment = vec![0usize; n];
    'outer: loop {
        let consistent = lookup
            .iter()
            .zip(&assignment)
            .all(|(e, &a)| e.is_none_or(|v| v == a));
        if consistent {
            weights[assignment[query]] += net.joint_probability(&assignment);
        }
        for k in (0..n).rev() {
            assignment[k] += 1;
            if assignment[k] < dag.cardinality(k) {
                continue 'outer;
            }
            assignment[k] = 0;
        }
        break;
    }
    Ok(Posterior::from_weights(&weights))
}
