//! Translation of a [`Network`] plus evidence into a weighted CNF.
//!
//! Every node gets indicator variables. Full CPTs use the general
//! one-parameter-per-entry encoding; noisy-OR nodes use WMC1 or WMC2 and
//! noisy-MAX nodes MAX1 or MAX2, as chosen by a [`Policy`]. Variable numbering
//! depends only on the network, the evidence and the policy.

mod encoder;
mod registry;

use std::fmt;
use std::str::FromStr;

pub use encoder::Encoder;
pub use registry::{Role, ValueGroup, VarRegistry};

use crate::error::{Error, Result};
use crate::model::{validate, Distribution, Evidence, Network, NodeId, DEFAULT_TABLE_CAP};
use crate::wcnf::{residual_all, zero_weight_simplify, Clause, Lit, WeightedCnf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    General,
    Wmc1,
    Wmc2,
    Max1,
    Max2,
}

impl Encoding {
    pub const ALL: [Encoding; 5] = [
        Encoding::General,
        Encoding::Wmc1,
        Encoding::Wmc2,
        Encoding::Max1,
        Encoding::Max2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Encoding::General => "general",
            Encoding::Wmc1 => "wmc1",
            Encoding::Wmc2 => "wmc2",
            Encoding::Max1 => "max1",
            Encoding::Max2 => "max2",
        }
    }

    /// Whether this encoding can be applied to a node carrying `dist`.
    pub fn applies_to(self, dist: &Distribution) -> bool {
        match self {
            Encoding::General => true,
            Encoding::Wmc1 | Encoding::Wmc2 => matches!(dist, Distribution::NoisyOr(_)),
            Encoding::Max1 | Encoding::Max2 => matches!(dist, Distribution::NoisyMax(_)),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Encoding::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown encoding `{s}` (expected general, wmc1, wmc2, max1 or max2)"))
    }
}

/// The encoding used for each node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    per_node: Vec<Encoding>,
}

impl Policy {
    /// The general encoding everywhere.
    pub fn general(net: &Network) -> Self {
        Policy {
            per_node: vec![Encoding::General; net.len()],
        }
    }

    /// `encoding` for every noisy node and the general encoding for full
    /// CPTs. Fails when a noisy node cannot take `encoding`.
    pub fn uniform(net: &Network, encoding: Encoding) -> Result<Self> {
        let mut policy = Policy::general(net);
        for id in net.ids() {
            if matches!(
                net.node(id).distribution,
                Some(Distribution::NoisyOr(_) | Distribution::NoisyMax(_))
            ) {
                policy.set(net, id, encoding)?;
            }
        }
        Ok(policy)
    }

    pub fn set(&mut self, net: &Network, node: NodeId, encoding: Encoding) -> Result<()> {
        let n = net.node(node);
        if let Some(dist) = &n.distribution {
            if !encoding.applies_to(dist) {
                return Err(Error::PolicyMismatch {
                    node: n.name.clone(),
                    encoding: encoding.to_string(),
                    kind: dist.kind(),
                });
            }
        }
        self.per_node[node.index()] = encoding;
        Ok(())
    }

    pub fn get(&self, node: NodeId) -> Encoding {
        self.per_node[node.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodeOptions {
    /// Emit the pre-simplified WMC1 clauses for observed effects.
    pub wmc1_condition: bool,
    /// Add the MAX2 redundancy variable and clauses.
    pub max2_redundant: bool,
    /// Turn zero-weight literals into unit clauses.
    pub simplify_zero_weights: bool,
    /// Largest full CPT the general encoding may build.
    pub table_cap: u128,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            wmc1_condition: true,
            max2_redundant: true,
            simplify_zero_weights: true,
            table_cap: DEFAULT_TABLE_CAP,
        }
    }
}

/// A weighted CNF together with the meaning of its variables.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedNetwork {
    pub cnf: WeightedCnf,
    pub registry: VarRegistry,
    /// Evidence asserted by unit clauses.
    pub evidence: Evidence,
    /// WMC1 nodes whose clauses were specialized to their observed value.
    pub conditioned: Vec<NodeId>,
}

impl EncodedNetwork {
    pub fn indicator(&self, node: NodeId, value: usize) -> Lit {
        self.registry.indicators(node).lit(value)
    }

    /// Conditions the formula on every indicator literal implied by
    /// `assignment`.
    pub fn condition(&self, assignment: &Evidence) -> WeightedCnf {
        let lits = assignment
            .iter()
            .flat_map(|(n, v)| self.registry.indicators(n).assignment(v));
        residual_all(&self.cnf, lits)
    }

    /// The formula with a unit clause per assigned node.
    pub fn with_units(&self, assignment: &Evidence) -> WeightedCnf {
        let mut cnf = self.cnf.clone();
        for (n, v) in assignment.iter() {
            cnf.push_clause(Clause::new([self.indicator(n, v)]).unwrap());
        }
        cnf
    }

    pub fn sidecar(&self, net: &Network) -> String {
        self.registry.sidecar(net)
    }
}

/// Encodes `net` node by node according to `policy` and asserts `evidence`
/// with unit clauses on indicator variables.
pub fn encode_network(
    net: &Network,
    evidence: &Evidence,
    policy: &Policy,
    options: &EncodeOptions,
) -> Result<EncodedNetwork> {
    let violations = validate(net);
    if !violations.is_empty() {
        return Err(Error::InvalidNetwork(violations));
    }
    evidence.check(net)?;
    let mut enc = Encoder::new(net).with_table_cap(options.table_cap);
    let mut conditioned = Vec::new();
    for id in net.ids() {
        let encoding = policy.get(id);
        let dist = net.node(id).distribution.as_ref().expect("validated");
        if !encoding.applies_to(dist) {
            return Err(Error::PolicyMismatch {
                node: net.node(id).name.clone(),
                encoding: encoding.to_string(),
                kind: dist.kind(),
            });
        }
        match encoding {
            Encoding::General => enc.encode_full_cpt_sang(id)?,
            Encoding::Wmc1 => {
                let observed = evidence.get(id).filter(|_| options.wmc1_condition);
                if observed.is_some() {
                    conditioned.push(id);
                }
                enc.encode_noisy_or_wmc1(id, observed)?
            }
            Encoding::Wmc2 => enc.encode_noisy_or_wmc2(id)?,
            Encoding::Max1 => enc.encode_noisy_max_max1(id)?,
            Encoding::Max2 => enc.encode_noisy_max_max2(id, options.max2_redundant)?,
        };
    }
    let mut encoded = enc.finish();
    for (n, v) in evidence.iter() {
        encoded
            .cnf
            .push_clause(Clause::new([encoded.indicator(n, v)]).unwrap());
    }
    if options.simplify_zero_weights {
        encoded.cnf = zero_weight_simplify(&encoded.cnf);
    }
    encoded.evidence = evidence.clone();
    encoded.conditioned = conditioned;
    Ok(encoded)
}
