//! Exact inference for Bayesian networks with noisy-OR and noisy-MAX
//! relations, by reduction to weighted model counting.
//!
//! The pipeline is: build or parse a [`model::Network`], translate it into a
//! [`wcnf::WeightedCnf`] with [`encode::encode_network`], and count the
//! formula with [`count::count`]. [`infer`] wraps these steps into
//! probability-of-evidence, conditional and marginal queries, and
//! [`model::brute_force_query`] gives an independent reference answer for
//! small networks.
//!
//! ```
//! use noisywmc::prelude::*;
//!
//! let net = noisywmc::model::fixtures::medical_noisy_or();
//! let nausea = net.find("Nausea").unwrap();
//! let evidence = Evidence::new().with(nausea, 1);
//! let policy = Policy::uniform(&net, Encoding::Wmc2).unwrap();
//! let pe = probability_of_evidence(&net, &evidence, &policy, &SolverConfig::default()).unwrap();
//! let oracle = brute_force_query(&net, &Evidence::new(), &evidence, DEFAULT_STATE_CAP).unwrap();
//! assert!((pe - oracle).abs() < 1e-12);
//! ```

pub mod count;
pub mod encode;
pub mod error;
pub mod gen;
pub mod infer;
pub mod model;
pub mod wcnf;

pub use error::{Error, Result};

/// The types most programs need.
pub mod prelude {
    pub use crate::count::{count, Counter, Heuristic, SolverConfig, Stats};
    pub use crate::encode::{encode_network, EncodeOptions, EncodedNetwork, Encoding, Policy};
    pub use crate::error::{Error, Result};
    pub use crate::infer::{conditional_query, marginals, probability_of_evidence, Query, QueryResult};
    pub use crate::model::{
        brute_force_query, parse_evidence, parse_network, Evidence, Network, NodeId,
        DEFAULT_STATE_CAP,
    };
    pub use crate::wcnf::{Clause, Lit, Var, WeightedCnf};
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/weighted-cnf.md")]
    mod weighted_cnf {}
    #[doc = include_str!("../../../book/src/encodings.md")]
    mod encodings {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/queries.md")]
    mod queries {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
}
