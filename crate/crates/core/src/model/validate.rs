use std::fmt;

use super::{Distribution, Network, NodeId};

const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// The parent graph is not acyclic; lists the nodes left on cycles.
    Cycle { nodes: Vec<String> },
    DomainTooSmall { node: String, domain: usize },
    MissingDistribution { node: String },
    ParentOutOfRange { node: String, parent: usize },
    /// A noisy-OR node or one of its parents is not Boolean.
    NotBoolean { node: String, offender: String },
    /// A table or parameter list has the wrong length.
    Dimension {
        node: String,
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A probability lies outside `[0, 1]` (or is not finite).
    Range { node: String, index: usize, value: f64 },
    /// A CPT row or noisy-MAX column does not sum to 1.
    RowSum { node: String, row: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { nodes } => write!(f, "cycle through {}", nodes.join(", ")),
            Violation::DomainTooSmall { node, domain } => {
                write!(f, "node `{node}` has domain size {domain} < 2")
            }
            Violation::MissingDistribution { node } => {
                write!(f, "node `{node}` has no distribution")
            }
            Violation::ParentOutOfRange { node, parent } => {
                write!(f, "node `{node}` references missing parent #{parent}")
            }
            Violation::NotBoolean { node, offender } => {
                write!(f, "noisy-OR node `{node}`: `{offender}` is not Boolean")
            }
            Violation::Dimension {
                node,
                what,
                expected,
                found,
            } => write!(
                f,
                "node `{node}`: {what} has {found} entries, expected {expected}"
            ),
            Violation::Range { node, index, value } => {
                write!(f, "node `{node}`: entry {index} = {value} is not a probability")
            }
            Violation::RowSum { node, row, sum } => {
                write!(f, "node `{node}`: row {row} sums to {sum}")
            }
        }
    }
}

/// Collects every structural and numeric problem of `net`. An empty result
/// means the network is valid.
pub fn validate(net: &Network) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = net.len();
    for (i, node) in net.nodes().iter().enumerate() {
        let name = &node.name;
        if node.domain < 2 {
            out.push(Violation::DomainTooSmall {
                node: name.clone(),
                domain: node.domain,
            });
        }
        let Some(dist) = &node.distribution else {
            out.push(Violation::MissingDistribution { node: name.clone() });
            continue;
        };
        let mut parents_ok = true;
        for p in dist.parents() {
            if p.0 >= n {
                parents_ok = false;
                out.push(Violation::ParentOutOfRange {
                    node: name.clone(),
                    parent: p.0,
                });
            }
        }
        if !parents_ok {
            continue;
        }
        match dist {
            Distribution::Cpt(cpt) => {
                let rows: usize = cpt.parents.iter().map(|&p| net.domain(p)).product();
                let expected = rows * node.domain;
                if cpt.table.len() != expected {
                    out.push(Violation::Dimension {
                        node: name.clone(),
                        what: "CPT",
                        expected,
                        found: cpt.table.len(),
                    });
                    continue;
                }
                check_range(name, &cpt.table, &mut out);
                if node.domain > 0 {
                    for (row, chunk) in cpt.table.chunks(node.domain).enumerate() {
                        check_sum(name, row, chunk.iter().sum(), &mut out);
                    }
                }
            }
            Distribution::NoisyOr(or) => {
                for &who in std::iter::once(&NodeId(i)).chain(&or.parents) {
                    if net.domain(who) != 2 {
                        out.push(Violation::NotBoolean {
                            node: name.clone(),
                            offender: net.node(who).name.clone(),
                        });
                    }
                }
                if or.q.len() != or.parents.len() {
                    out.push(Violation::Dimension {
                        node: name.clone(),
                        what: "noisy-OR parameters",
                        expected: or.parents.len(),
                        found: or.q.len(),
                    });
                }
                check_range(name, &or.q, &mut out);
            }
            Distribution::NoisyMax(max) => {
                if max.q.len() != max.parents.len() {
                    out.push(Violation::Dimension {
                        node: name.clone(),
                        what: "noisy-MAX parent blocks",
                        expected: max.parents.len(),
                        found: max.q.len(),
                    });
                    continue;
                }
                let mut column = 0;
                for (&p, block) in max.parents.iter().zip(&max.q) {
                    let expected = net.domain(p) - 1;
                    if block.len() != expected {
                        out.push(Violation::Dimension {
                            node: name.clone(),
                            what: "noisy-MAX parent values",
                            expected,
                            found: block.len(),
                        });
                        continue;
                    }
                    for col in block {
                        if col.len() != node.domain {
                            out.push(Violation::Dimension {
                                node: name.clone(),
                                what: "noisy-MAX column",
                                expected: node.domain,
                                found: col.len(),
                            });
                        } else {
                            check_range(name, col, &mut out);
                            check_sum(name, column, col.iter().sum(), &mut out);
                        }
                        column += 1;
                    }
                }
            }
        }
    }
    if net.topological_order().is_none() {
        out.push(Violation::Cycle {
            nodes: cyclic_nodes(net),
        });
    }
    out
}

fn check_range(node: &str, values: &[f64], out: &mut Vec<Violation>) {
    for (index, &value) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::Range {
                node: node.to_string(),
                index,
                value,
            });
        }
    }
}

fn check_sum(node: &str, row: usize, sum: f64, out: &mut Vec<Violation>) {
    if (sum - 1.0).abs() > TOLERANCE {
        out.push(Violation::RowSum {
            node: node.to_string(),
            row,
            sum,
        });
    }
}

/// Nodes that remain after repeatedly peeling off nodes without parents.
fn cyclic_nodes(net: &Network) -> Vec<String> {
    let n = net.len();
    let mut removed = vec![false; n];
    loop {
        let mut progress = false;
        for i in 0..n {
            if !removed[i]
                && net.nodes()[i]
                    .parents()
                    .iter()
                    .all(|p| p.0 >= n || removed[p.0])
            {
                removed[i] = true;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    (0..n)
        .filter(|&i| !removed[i])
        .map(|i| net.nodes()[i].name.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{medical_noisy_max, medical_noisy_or};

    #[test]
    fn reference_networks_are_valid() {
        assert_eq!(validate(&medical_noisy_or()), vec![]);
        assert_eq!(validate(&medical_noisy_max()), vec![]);
    }

    #[test]
    fn two_node_cycle() {
        let mut net = Network::new();
        let a = net.add_node("A", 2).unwrap();
        let b = net.add_node("B", 2).unwrap();
        net.set_cpt(a, vec![b], vec![0.5, 0.5, 0.5, 0.5]);
        net.set_cpt(b, vec![a], vec![0.5, 0.5, 0.5, 0.5]);
        let v = validate(&net);
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::Cycle { nodes } if nodes.len() == 2));
    }

    #[test]
    fn row_sum_violation() {
        let mut net = Network::new();
        let a = net.add_node("A", 2).unwrap();
        net.set_prior(a, vec![0.5, 0.4]);
        let v = validate(&net);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::RowSum { row: 0, .. }));
    }

    #[test]
    fn dimension_and_boolean_checks() {
        let mut net = Network::new();
        let a = net.add_node("A", 3).unwrap();
        let b = net.add_node("B", 2).unwrap();
        let c = net.add_node("C", 3).unwrap();
        net.set_prior(a, vec![0.2, 0.3, 0.5]);
        net.set_noisy_or(b, vec![a], vec![0.5, 0.5]);
        // two nonzero parent values expected for A, only one given
        net.set_noisy_max(c, vec![a], vec![vec![vec![0.2, 0.3, 0.5]]]);
        let v = validate(&net);
        assert!(v.iter().any(|x| matches!(x, Violation::NotBoolean { .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::Dimension { what: "noisy-OR parameters", .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::Dimension { what: "noisy-MAX parent values", .. })));
    }

    #[test]
    fn missing_distribution_and_range() {
        let mut net = Network::new();
        let a = net.add_node("A", 2).unwrap();
        net.add_node("B", 2).unwrap();
        net.set_prior(a, vec![1.5, -0.5]);
        let v = validate(&net);
        assert!(v.iter().any(|x| matches!(x, Violation::MissingDistribution { .. })));
        assert_eq!(
            v.iter().filter(|x| matches!(x, Violation::Range { .. })).count(),
            2
        );
    }
}
