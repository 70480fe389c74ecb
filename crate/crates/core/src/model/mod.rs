//! Bayesian networks whose nodes carry full CPTs, noisy-OR or noisy-MAX
//! relations, together with the brute-force oracle every encoding is checked
//! against.
//!
//! Domain values are integers `0..d`. For noisy relations value `0` means
//! "absent". A leak is just an ordinary parentless Boolean cause.

mod format;
mod noisy;
mod oracle;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub use format::{parse_evidence, parse_network, write_evidence, write_network};
pub use noisy::{
    expand_to_full_cpt, noisy_max_cpt_entry, noisy_max_cumulative, noisy_or_cpt_entry,
    DEFAULT_TABLE_CAP,
};
pub(crate) use noisy::advance;
pub use oracle::{brute_force_query, joint_probability, DEFAULT_STATE_CAP};
pub use validate::{validate, Violation};

/// Dense handle of a node inside its [`Network`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A conditional probability table in full.
///
/// Parent configurations are enumerated lexicographically with the last
/// parent varying fastest; within a configuration the child value varies
/// fastest. A parentless table is a prior.
#[derive(Clone, Debug, PartialEq)]
pub struct FullCpt {
    pub parents: Vec<NodeId>,
    pub table: Vec<f64>,
}

/// Noisy-OR: `q[i]` is the probability that the effect stays absent when only
/// parent `i` is present.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyOr {
    pub parents: Vec<NodeId>,
    pub q: Vec<f64>,
}

/// Noisy-MAX: `q[i][x - 1][y]` is the probability that the effect takes value
/// `y` when parent `i` has the nonzero value `x` and every other parent is
/// absent.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyMax {
    pub parents: Vec<NodeId>,
    pub q: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Cpt(FullCpt),
    NoisyOr(NoisyOr),
    NoisyMax(NoisyMax),
}

impl Distribution {
    pub fn parents(&self) -> &[NodeId] {
        match self {
            Distribution::Cpt(c) => &c.parents,
            Distribution::NoisyOr(n) => &n.parents,
            Distribution::NoisyMax(n) => &n.parents,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Distribution::Cpt(c) if c.parents.is_empty() => "prior",
            Distribution::Cpt(_) => "cpt",
            Distribution::NoisyOr(_) => "noisy-OR",
            Distribution::NoisyMax(_) => "noisy-MAX",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub name: String,
    pub domain: usize,
    pub distribution: Option<Distribution>,
}

impl Node {
    pub fn parents(&self) -> &[NodeId] {
        self.distribution
            .as_ref()
            .map(Distribution::parents)
            .unwrap_or(&[])
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    by_name: HashMap<String, NodeId>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node without a distribution. Names must be unique.
    pub fn add_node(&mut self, name: impl Into<String>, domain: usize) -> Result<NodeId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::SpecInvalid(format!("duplicate node `{name}`")));
        }
        let id = NodeId(self.nodes.len());
        self.by_name.insert(name.clone(), id);
        self.nodes.push(Node {
            name,
            domain,
            distribution: None,
        });
        Ok(id)
    }

    pub fn set_distribution(&mut self, id: NodeId, distribution: Distribution) {
        self.nodes[id.0].distribution = Some(distribution);
    }

    pub fn set_prior(&mut self, id: NodeId, prior: Vec<f64>) {
        self.set_distribution(
            id,
            Distribution::Cpt(FullCpt {
                parents: Vec::new(),
                table: prior,
            }),
        );
    }

    pub fn set_cpt(&mut self, id: NodeId, parents: Vec<NodeId>, table: Vec<f64>) {
        self.set_distribution(id, Distribution::Cpt(FullCpt { parents, table }));
    }

    pub fn set_noisy_or(&mut self, id: NodeId, parents: Vec<NodeId>, q: Vec<f64>) {
        self.set_distribution(id, Distribution::NoisyOr(NoisyOr { parents, q }));
    }

    pub fn set_noisy_max(&mut self, id: NodeId, parents: Vec<NodeId>, q: Vec<Vec<Vec<f64>>>) {
        self.set_distribution(id, Distribution::NoisyMax(NoisyMax { parents, q }));
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<NodeId> {
        self.find(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn domain(&self, id: NodeId) -> usize {
        self.nodes[id.0].domain
    }

    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        self.nodes[id.0].parents()
    }

    /// Probability of `y` at `id` given the values of its parents, read from
    /// whichever representation the node carries. Noisy relations are
    /// evaluated in closed form; nothing is materialized.
    pub fn cpt_entry(&self, id: NodeId, parent_values: &[usize], y: usize) -> f64 {
        let node = &self.nodes[id.0];
        match node.distribution.as_ref().expect("node has no distribution") {
            Distribution::Cpt(cpt) => {
                let row = config_index(self, &cpt.parents, parent_values);
                cpt.table[row * node.domain + y]
            }
            Distribution::NoisyOr(n) => noisy_or_cpt_entry(&n.q, parent_values, y),
            Distribution::NoisyMax(n) => noisy_max_cpt_entry(&n.q, parent_values, y),
        }
    }

    /// Nodes in an order where every parent precedes its children, or `None`
    /// if the parent graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let mut children = vec![Vec::new(); n];
        for (i, node) in self.nodes.iter().enumerate() {
            for p in node.parents() {
                if p.0 < n {
                    indegree[i] += 1;
                    children[p.0].push(i);
                }
            }
        }
        let mut ready: Vec<usize> = (0..n).rev().filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop() {
            order.push(NodeId(i));
            for &c in children[i].iter().rev() {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Row index of a parent configuration (last parent fastest).
pub(crate) fn config_index(net: &Network, parents: &[NodeId], values: &[usize]) -> usize {
    parents
        .iter()
        .zip(values)
        .fold(0, |acc, (&p, &v)| acc * net.domain(p) + v)
}

/// A partial assignment of node values. Also used for conjunctive queries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evidence(BTreeMap<NodeId, usize>);

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, node: NodeId, value: usize) -> Option<usize> {
        self.0.insert(node, value)
    }

    pub fn with(mut self, node: NodeId, value: usize) -> Self {
        self.0.insert(node, value);
        self
    }

    pub fn get(&self, node: NodeId) -> Option<usize> {
        self.0.get(&node).copied()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.0.contains_key(&node)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    /// True when the two partial assignments never disagree on a node.
    pub fn compatible(&self, other: &Evidence) -> bool {
        other.iter().all(|(n, v)| self.get(n).is_none_or(|w| w == v))
    }

    /// Union of both assignments; `None` if they disagree.
    pub fn merged(&self, other: &Evidence) -> Option<Evidence> {
        if !self.compatible(other) {
            return None;
        }
        let mut out = self.clone();
        for (n, v) in other.iter() {
            out.insert(n, v);
        }
        Some(out)
    }

    pub fn check(&self, net: &Network) -> Result<()> {
        for (n, v) in self.iter() {
            if n.0 >= net.len() {
                return Err(Error::UnknownNode(n.to_string()));
            }
            let d = net.domain(n);
            if v >= d {
                return Err(Error::ValueOutOfDomain {
                    node: net.node(n).name.clone(),
                    value: v,
                    domain: d,
                });
            }
        }
        Ok(())
    }
}

impl FromIterator<(NodeId, usize)> for Evidence {
    fn from_iter<T: IntoIterator<Item = (NodeId, usize)>>(iter: T) -> Self {
        Evidence(iter.into_iter().collect())
    }
}

/// Small reference networks built around the Cold/Flu/Malaria example.
pub mod fixtures {
    use super::*;

    /// Cold, Flu, Malaria -> Nausea, Headache with the noisy-OR parameters of
    /// the running medical example. Priors are arbitrary but fixed.
    pub fn medical_noisy_or() -> Network {
        let mut net = Network::new();
        let c = net.add_node("Cold", 2).unwrap();
        let f = net.add_node("Flu", 2).unwrap();
        let m = net.add_node("Malaria", 2).unwrap();
        let n = net.add_node("Nausea", 2).unwrap();
        let h = net.add_node("Headache", 2).unwrap();
        net.set_prior(c, vec![0.6, 0.4]);
        net.set_prior(f, vec![0.9, 0.1]);
        net.set_prior(m, vec![0.99, 0.01]);
        net.set_noisy_or(n, vec![c, f, m], vec![0.6, 0.5, 0.4]);
        net.set_noisy_or(h, vec![c, f, m], vec![0.3, 0.2, 0.1]);
        net
    }

    /// Cold, Flu, Malaria -> Nausea where Nausea is a three-valued noisy-MAX
    /// (absent, mild, severe).
    pub fn medical_noisy_max() -> Network {
        let mut net = Network::new();
        let c = net.add_node("Cold", 2).unwrap();
        let f = net.add_node("Flu", 2).unwrap();
        let m = net.add_node("Malaria", 2).unwrap();
        let n = net.add_node("Nausea", 3).unwrap();
        net.set_prior(c, vec![0.6, 0.4]);
        net.set_prior(f, vec![0.9, 0.1]);
        net.set_prior(m, vec![0.99, 0.01]);
        net.set_noisy_max(
            n,
            vec![c, f, m],
            vec![
                vec![vec![0.7, 0.2, 0.1]],
                vec![vec![0.5, 0.2, 0.3]],
                vec![vec![0.1, 0.4, 0.5]],
            ],
        );
        net
    }
}
