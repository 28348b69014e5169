//! Discrete Bayesian networks over finite value spaces.
//!
//! The crate covers the pieces needed to learn and query a fixed-structure
//! network from fully observed categorical data:
//!
//! - [`Dag`]: the structure, validated acyclic with at most one edge per node pair.
//! - [`Cpt`]: one conditional probability table per node, stored densely and
//!   indexed by a mixed-radix parent configuration.
//! - [`fit_mle`]: maximum-likelihood CPTs from a [`DataTable`] in one counting pass.
//! - [`BayesNet::eliminate`]: exact posteriors by variable elimination.
//! - [`joint_brute_force`]: a full-joint enumeration used as a test oracle.
//!
//! ```
//! use gridvad_bn::{Dag, DataTable, Node, fit_mle};
//!
//! let dag = Dag::new(
//!     vec![Node::new("rain", 2), Node::new("wet", 2)],
//!     &[("rain", "wet")],
//! ).unwrap();
//! let mut data = DataTable::new(vec!["rain".into(), "wet".into()]);
//! data.push_row(&[1, 1]).unwrap();
//! data.push_row(&[0, 0]).unwrap();
//! data.push_row(&[0, 1]).unwrap();
//! let net = fit_mle(&dag, &data).unwrap();
//! let wet = net.dag().index_of("wet").unwrap();
//! let rain = net.dag().index_of("rain").unwrap();
//! let posterior = net.eliminate(rain, &[(wet, 1)]).unwrap();
//! assert!((posterior.probs[1] - 0.5).abs() < 1e-12);
//! ```

mod cpt;
mod dag;
mod data;
mod error;
mod factor;
mod fit;
mod infer;
mod net;
mod oracle;

pub use cpt::Cpt;
pub use dag::{Dag, Node};
pub use data::DataTable;
pub use error::{BnError, Result};
pub use factor::Factor;
pub use fit::{fit_mle, log_likelihood};
pub use infer::{min_degree_order, Posterior};
pub use net::BayesNet;
pub use oracle::{joint_brute_force, BRUTE_FORCE_CAP};
