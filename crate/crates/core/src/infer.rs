//! Probabilistic queries answered by weighted model counting.
//!
//! `P(Q | E)` is the count of the encoding conjoined with `Q` and `E`,
//! divided by the count conjoined with `E` alone.

use crate::count::{Counter, SolverConfig, Stats};
use crate::encode::{encode_network, EncodeOptions, EncodedNetwork, Policy};
use crate::error::{Error, Result};
use crate::model::{Evidence, Network, NodeId};
use crate::wcnf::{Clause, Lit, WeightedCnf};

/// A propositional formula over node values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    /// `node = value`.
    Is(NodeId, usize),
    And(Vec<Query>),
    Or(Vec<Query>),
    Not(Box<Query>),
}

impl Query {
    pub fn is(node: NodeId, value: usize) -> Self {
        Query::Is(node, value)
    }

    pub fn not(q: Query) -> Self {
        Query::Not(Box::new(q))
    }

    fn check(&self, net: &Network) -> Result<()> {
        match self {
            Query::Is(n, v) => Evidence::new().with(*n, *v).check(net),
            Query::And(qs) | Query::Or(qs) => qs.iter().try_for_each(|q| q.check(net)),
            Query::Not(q) => q.check(net),
        }
    }

    /// The query as a conjunction of value assignments, if it is one.
    pub fn as_evidence(&self) -> Option<Evidence> {
        match self {
            Query::Is(n, v) => Some(Evidence::new().with(*n, *v)),
            Query::And(qs) => qs
                .iter()
                .try_fold(Evidence::new(), |acc, q| acc.merged(&q.as_evidence()?)),
            _ => None,
        }
    }

    /// CNF over indicator literals, by pushing negations inward and
    /// distributing disjunctions over conjunctions.
    pub fn to_clauses(&self, encoded: &EncodedNetwork) -> Vec<Vec<Lit>> {
        self.cnf(encoded, false)
    }

    fn cnf(&self, encoded: &EncodedNetwork, negated: bool) -> Vec<Vec<Lit>> {
        match (self, negated) {
            (Query::Is(n, v), _) => {
                let l = encoded.indicator(*n, *v);
                vec![vec![if negated { !l } else { l }]]
            }
            (Query::Not(q), _) => q.cnf(encoded, !negated),
            (Query::And(qs), false) | (Query::Or(qs), true) => {
                qs.iter().flat_map(|q| q.cnf(encoded, negated)).collect()
            }
            (Query::Or(qs), false) | (Query::And(qs), true) => {
                let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
                for q in qs {
                    let part = q.cnf(encoded, negated);
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for a in &acc {
                        for b in &part {
                            next.push(a.iter().chain(b).copied().collect());
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
}

impl From<&Evidence> for Query {
    fn from(e: &Evidence) -> Self {
        Query::And(e.iter().map(|(n, v)| Query::Is(n, v)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryResult {
    pub probability: f64,
    /// Count of the encoding with query and evidence.
    pub numerator: f64,
    /// Count of the encoding with evidence only.
    pub denominator: f64,
    pub numerator_stats: Stats,
    pub denominator_stats: Stats,
}

fn encode(net: &Network, evidence: &Evidence, policy: &Policy) -> Result<EncodedNetwork> {
    encode_network(net, evidence, policy, &EncodeOptions::default())
}

fn with_clauses(cnf: &WeightedCnf, clauses: Vec<Vec<Lit>>) -> WeightedCnf {
    let mut out = cnf.clone();
    for c in clauses {
        if let Some(c) = Clause::new(c) {
            out.push_clause(c);
        }
    }
    out
}

/// Weighted count of the encoding of `net` under `evidence`.
pub fn probability_of_evidence(
    net: &Network,
    evidence: &Evidence,
    policy: &Policy,
    config: &SolverConfig,
) -> Result<f64> {
    let encoded = encode(net, evidence, policy)?;
    Ok(Counter::new(*config).count(&encoded.cnf).0)
}

/// `P(query | evidence)`. Fails with [`Error::ZeroEvidence`] when the evidence
/// has probability zero.
pub fn conditional_query(
    net: &Network,
    query: &Query,
    evidence: &Evidence,
    policy: &Policy,
    config: &SolverConfig,
) -> Result<QueryResult> {
    conditional_query_with(net, query, evidence, policy, &EncodeOptions::default(), config)
}

/// [`conditional_query`] with explicit encoder options.
pub fn conditional_query_with(
    net: &Network,
    query: &Query,
    evidence: &Evidence,
    policy: &Policy,
    options: &EncodeOptions,
    config: &SolverConfig,
) -> Result<QueryResult> {
    query.check(net)?;
    let encoded = encode_network(net, evidence, policy, options)?;
    let mut counter = Counter::new(*config);
    let (denominator, denominator_stats) = counter.count(&encoded.cnf);
    if denominator == 0.0 {
        return Err(Error::ZeroEvidence);
    }
    let (numerator, numerator_stats) = match query.as_evidence() {
        Some(q) if !q.compatible(evidence) => (0.0, Stats::default()),
        _ => counter.count(&with_clauses(&encoded.cnf, query.to_clauses(&encoded))),
    };
    Ok(QueryResult {
        probability: numerator / denominator,
        numerator,
        denominator,
        numerator_stats,
        denominator_stats,
    })
}

/// `P(node = value | evidence)` for every node and value. Observed nodes get
/// a point mass. The evidence count is shared by all queries.
pub fn marginals(
    net: &Network,
    evidence: &Evidence,
    policy: &Policy,
    config: &SolverConfig,
) -> Result<Vec<Vec<f64>>> {
    let encoded = encode(net, evidence, policy)?;
    let mut counter = Counter::new(*config);
    let (denominator, _) = counter.count(&encoded.cnf);
    if denominator == 0.0 {
        return Err(Error::ZeroEvidence);
    }
    let mut out = Vec::with_capacity(net.len());
    for id in net.ids() {
        let d = net.domain(id);
        let row = match evidence.get(id) {
            Some(v) => (0..d).map(|x| f64::from(u8::from(x == v))).collect(),
            None => (0..d)
                .map(|x| {
                    let cnf = encoded.with_units(&Evidence::new().with(id, x));
                    counter.count(&cnf).0 / denominator
                })
                .collect(),
        };
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::Encoding;
    use crate::model::fixtures::{medical_noisy_max, medical_noisy_or};
    use crate::model::{brute_force_query, DEFAULT_STATE_CAP};

    fn node(net: &Network, name: &str) -> NodeId {
        net.find(name).unwrap()
    }

    #[test]
    fn empty_evidence_has_probability_one() {
        let net = medical_noisy_or();
        for enc in [Encoding::General, Encoding::Wmc1, Encoding::Wmc2] {
            let policy = Policy::uniform(&net, enc).unwrap();
            let pe = probability_of_evidence(&net, &Evidence::new(), &policy, &SolverConfig::default())
                .unwrap();
            assert!((pe - 1.0).abs() < 1e-12, "{enc}: {pe}");
        }
    }

    #[test]
    fn nausea_given_cold_and_flu() {
        let net = medical_noisy_or();
        let e = Evidence::new()
            .with(node(&net, "Cold"), 1)
            .with(node(&net, "Flu"), 1)
            .with(node(&net, "Malaria"), 0);
        let q = Query::is(node(&net, "Nausea"), 1);
        for enc in [Encoding::General, Encoding::Wmc1, Encoding::Wmc2] {
            let policy = Policy::uniform(&net, enc).unwrap();
            let r = conditional_query(&net, &q, &e, &policy, &SolverConfig::default()).unwrap();
            assert!((r.probability - 0.70).abs() < 1e-12, "{enc}: {}", r.probability);
        }
    }

    #[test]
    fn query_equal_to_evidence_is_certain() {
        let net = medical_noisy_max();
        let e = Evidence::new().with(node(&net, "Nausea"), 2);
        let policy = Policy::uniform(&net, Encoding::Max1).unwrap();
        let r = conditional_query(&net, &Query::from(&e), &e, &policy, &SolverConfig::default())
            .unwrap();
        assert!((r.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn impossible_evidence() {
        let mut net = Network::new();
        let a = net.add_node("A", 2).unwrap();
        let b = net.add_node("B", 2).unwrap();
        net.set_prior(a, vec![1.0, 0.0]);
        net.set_noisy_or(b, vec![a], vec![0.5]);
        let e = Evidence::new().with(b, 1);
        let policy = Policy::uniform(&net, Encoding::Wmc2).unwrap();
        let config = SolverConfig::default();
        assert_eq!(probability_of_evidence(&net, &e, &policy, &config).unwrap(), 0.0);
        let q = Query::is(a, 1);
        assert!(matches!(
            conditional_query(&net, &q, &e, &policy, &config),
            Err(Error::ZeroEvidence)
        ));
    }

    #[test]
    fn disjunctive_and_negated_queries() {
        let net = medical_noisy_max();
        let n = node(&net, "Nausea");
        let c = node(&net, "Cold");
        let e = Evidence::new().with(node(&net, "Flu"), 1);
        let policy = Policy::uniform(&net, Encoding::Max2).unwrap();
        let config = SolverConfig::default();
        let p = |q: &Query| {
            conditional_query(&net, q, &e, &policy, &config)
                .unwrap()
                .probability
        };
        let oracle = |q: &Evidence| brute_force_query(&net, q, &e, DEFAULT_STATE_CAP).unwrap();
        let mild = oracle(&Evidence::new().with(n, 1));
        let severe = oracle(&Evidence::new().with(n, 2));
        let either = Query::Or(vec![Query::is(n, 1), Query::is(n, 2)]);
        assert!((p(&either) - (mild + severe)).abs() < 1e-12);
        assert!((p(&Query::not(Query::is(n, 0))) - (mild + severe)).abs() < 1e-12);
        let both = Query::And(vec![Query::is(n, 2), Query::is(c, 1)]);
        let expected = oracle(&Evidence::new().with(n, 2).with(c, 1));
        assert!((p(&both) - expected).abs() < 1e-12);
        let neither = Query::not(Query::Or(vec![Query::is(n, 2), Query::is(c, 1)]));
        let total: f64 = [(0, 0), (1, 0)]
            .iter()
            .map(|&(nv, cv)| oracle(&Evidence::new().with(n, nv).with(c, cv)))
            .sum();
        assert!((p(&neither) - total).abs() < 1e-12);
    }

    #[test]
    fn marginals_match_oracle() {
        let net = medical_noisy_or();
        let e = Evidence::new().with(node(&net, "Headache"), 1);
        let policy = Policy::uniform(&net, Encoding::Wmc1).unwrap();
        let m = marginals(&net, &e, &policy, &SolverConfig::default()).unwrap();
        for id in net.ids() {
            assert!((m[id.index()].iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (v, p) in m[id.index()].iter().enumerate() {
                let o = brute_force_query(&net, &Evidence::new().with(id, v), &e, DEFAULT_STATE_CAP)
                    .unwrap();
                assert!((p - o).abs() < 1e-12);
            }
        }
        assert_eq!(m[node(&net, "Headache").index()], vec![0.0, 1.0]);
    }

    #[test]
    fn root_marginal_is_its_prior() {
        let net = medical_noisy_or();
        let policy = Policy::uniform(&net, Encoding::Wmc2).unwrap();
        let m = marginals(&net, &Evidence::new(), &policy, &SolverConfig::default()).unwrap();
        let c = node(&net, "Cold");
        for v in 0..2 {
            assert!((m[c.index()][v] - net.cpt_entry(c, &[], v)).abs() < 1e-12);
        }
    }
}
