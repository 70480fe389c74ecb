use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::model::{Network, NodeId};
use crate::wcnf::{Lit, Var, WeightedCnf};

/// What a CNF variable stands for.
///
/// `value` is `None` for two-valued groups, which use a single variable whose
/// positive literal means value 1. `parent` is the position of a cause in its
/// child's parent list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Indicator { node: NodeId, value: Option<usize> },
    /// Value indicator of the hidden node `Y'` attached to a noisy node.
    Hidden { node: NodeId, value: Option<usize> },
    /// MAX1: effect of parent `parent` on `node`.
    Effect { node: NodeId, parent: usize, value: Option<usize> },
    /// Parameter of the general encoding for CPT row `row` and child value
    /// `value`.
    SangParam { node: NodeId, row: usize, value: usize },
    /// WMC1 parameter `P_q` of one cause.
    OrParam { node: NodeId, parent: usize },
    /// WMC1 auxiliary `w_i <=> I_X & P_q`.
    OrAux { node: NodeId, parent: usize },
    /// WMC2 parameter `P^0` (absent) or `P^1` (present) of one arc.
    ArcParam { node: NodeId, parent: usize, present: bool },
    GadgetU { node: NodeId },
    GadgetW { node: NodeId },
    /// MAX1/MAX2 parameter for parent value `x >= 1` and child value `y`.
    MaxParam { node: NodeId, parent: usize, x: usize, y: usize },
    /// MAX2 redundancy variable `I_v`.
    Redundant { node: NodeId },
}

impl Role {
    pub fn node(&self) -> NodeId {
        match *self {
            Role::Indicator { node, .. }
            | Role::Hidden { node, .. }
            | Role::Effect { node, .. }
            | Role::SangParam { node, .. }
            | Role::OrParam { node, .. }
            | Role::OrAux { node, .. }
            | Role::ArcParam { node, .. }
            | Role::GadgetU { node }
            | Role::GadgetW { node }
            | Role::MaxParam { node, .. }
            | Role::Redundant { node } => node,
        }
    }

    /// `<role> <node>[:<value>]`, the sidecar description.
    pub fn describe(&self, net: &Network) -> String {
        let name = |n: NodeId| net.node(n).name.as_str();
        let parent = |n: NodeId, i: usize| name(net.parents(n)[i]);
        let with = |n: NodeId, v: Option<usize>| match v {
            Some(v) => format!("{}:{v}", name(n)),
            None => name(n).to_string(),
        };
        match *self {
            Role::Indicator { node, value } => format!("indicator {}", with(node, value)),
            Role::Hidden { node, value } => format!("hidden {}", with(node, value)),
            Role::Effect { node, parent: i, value } => {
                format!("effect({}) {}", parent(node, i), with(node, value))
            }
            Role::SangParam { node, row, value } => {
                format!("param(row={row}) {}", with(node, Some(value)))
            }
            Role::OrParam { node, parent: i } => format!("param({}) {}", parent(node, i), name(node)),
            Role::OrAux { node, parent: i } => format!("aux({}) {}", parent(node, i), name(node)),
            Role::ArcParam { node, parent: i, present } => format!(
                "param{}({}) {}",
                u8::from(present),
                parent(node, i),
                name(node)
            ),
            Role::GadgetU { node } => format!("u {}", name(node)),
            Role::GadgetW { node } => format!("w {}", name(node)),
            Role::MaxParam { node, parent: i, x, y } => {
                format!("param({}={x}) {}", parent(node, i), with(node, Some(y)))
            }
            Role::Redundant { node } => format!("v {}", name(node)),
        }
    }
}

/// Variables standing for the values of one (possibly hidden) node.
///
/// A two-valued group is a single variable; larger groups have one variable
/// per value and exactly-one clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueGroup {
    vars: Vec<Var>,
}

impl ValueGroup {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn domain(&self) -> usize {
        if self.vars.len() == 1 {
            2
        } else {
            self.vars.len()
        }
    }

    /// The literal asserting `value`.
    pub fn lit(&self, value: usize) -> Lit {
        debug_assert!(value < self.domain());
        match self.vars[..] {
            [v] => Lit::new(v, value == 1),
            _ => self.vars[value].pos(),
        }
    }

    /// Every literal implied by `value`: the asserting literal plus, for
    /// multi-valued groups, the negation of all other values.
    pub fn assignment(&self, value: usize) -> Vec<Lit> {
        match self.vars[..] {
            [v] => vec![Lit::new(v, value == 1)],
            _ => self
                .vars
                .iter()
                .enumerate()
                .map(|(i, v)| Lit::new(*v, i == value))
                .collect(),
        }
    }
}

/// Injective map between CNF variables and their roles.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VarRegistry {
    roles: Vec<Role>,
    by_role: HashMap<Role, Var>,
    indicators: Vec<ValueGroup>,
    hidden: BTreeMap<NodeId, ValueGroup>,
}

impl VarRegistry {
    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, var: Var) -> Role {
        self.roles[var.index()]
    }

    pub fn var(&self, role: Role) -> Option<Var> {
        self.by_role.get(&role).copied()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn indicators(&self, node: NodeId) -> &ValueGroup {
        &self.indicators[node.index()]
    }

    pub fn hidden(&self, node: NodeId) -> Option<&ValueGroup> {
        self.hidden.get(&node)
    }

    /// Allocates a fresh variable in `cnf` for `role`. Panics if the role is
    /// already taken.
    pub(crate) fn allocate(&mut self, cnf: &mut WeightedCnf, role: Role, pos: f64, neg: f64) -> Var {
        let var = cnf.new_var(pos, neg);
        debug_assert_eq!(var.index(), self.roles.len());
        let previous = self.by_role.insert(role, var);
        assert!(previous.is_none(), "role {role:?} allocated twice");
        self.roles.push(role);
        var
    }

    /// Allocates a value group of domain `d` with unit weights, building each
    /// role with `role(value)`.
    pub(crate) fn allocate_group(
        &mut self,
        cnf: &mut WeightedCnf,
        d: usize,
        role: impl Fn(Option<usize>) -> Role,
    ) -> ValueGroup {
        let vars = if d == 2 {
            vec![self.allocate(cnf, role(None), 1.0, 1.0)]
        } else {
            (0..d)
                .map(|v| self.allocate(cnf, role(Some(v)), 1.0, 1.0))
                .collect()
        };
        ValueGroup { vars }
    }

    pub(crate) fn push_indicators(&mut self, group: ValueGroup) {
        self.indicators.push(group);
    }

    pub(crate) fn insert_hidden(&mut self, node: NodeId, group: ValueGroup) {
        self.hidden.insert(node, group);
    }

    /// One `<var> <role> <node>[:<value>]` line per variable, 1-based.
    pub fn sidecar(&self, net: &Network) -> String {
        let mut out = String::new();
        for (i, role) in self.roles.iter().enumerate() {
            writeln!(out, "{} {}", i + 1, role.describe(net)).unwrap();
        }
        out
    }
}
