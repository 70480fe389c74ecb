use std::ops::Range;

use super::registry::{Role, ValueGroup, VarRegistry};
use super::EncodedNetwork;
use crate::error::{Error, Result};
use crate::model::{expand_to_full_cpt, Distribution, Evidence, Network, NodeId, DEFAULT_TABLE_CAP};
use crate::wcnf::{exactly_one_clauses, Clause, Lit, Var, WeightedCnf};

/// Builds a weighted CNF node by node.
///
/// [`Encoder::new`] allocates the indicator variables of every node, in node
/// order, together with their exactly-one clauses. Each `encode_*` method then
/// adds the clauses of one node and returns the range of clause indices it
/// appended.
pub struct Encoder<'a> {
    net: &'a Network,
    cnf: WeightedCnf,
    registry: VarRegistry,
    table_cap: u128,
}

impl<'a> Encoder<'a> {
    pub fn new(net: &'a Network) -> Self {
        let mut cnf = WeightedCnf::new(0);
        let mut registry = VarRegistry::default();
        for id in net.ids() {
            let group = registry.allocate_group(&mut cnf, net.domain(id), |value| Role::Indicator {
                node: id,
                value,
            });
            add_exactly_one(&mut cnf, &group);
            registry.push_indicators(group);
        }
        Encoder {
            net,
            cnf,
            registry,
            table_cap: DEFAULT_TABLE_CAP,
        }
    }

    /// Largest full CPT the general encoding may materialize.
    pub fn with_table_cap(mut self, cap: u128) -> Self {
        self.table_cap = cap;
        self
    }

    pub fn cnf(&self) -> &WeightedCnf {
        &self.cnf
    }

    pub fn registry(&self) -> &VarRegistry {
        &self.registry
    }

    pub fn indicator(&self, node: NodeId, value: usize) -> Lit {
        self.registry.indicators(node).lit(value)
    }

    pub fn finish(self) -> EncodedNetwork {
        EncodedNetwork {
            cnf: self.cnf,
            registry: self.registry,
            evidence: Evidence::new(),
            conditioned: Vec::new(),
        }
    }

    /// General encoding of a full CPT, one parameter per entry except the
    /// last child value. Noisy nodes are expanded first.
    ///
    /// Parameter `i` of a row carries `P(y_i | x) / (1 - sum_{j<i} P(y_j | x))`
    /// so that the chain `!P_0 & ... & !P_{i-1} & P_i` weighs exactly
    /// `P(y_i | x)`. For two-valued nodes this is just `P(y_0 | x)`.
    pub fn encode_full_cpt_sang(&mut self, node: NodeId) -> Result<Range<usize>> {
        let start = self.cnf.clauses().len();
        let cpt = expand_to_full_cpt(self.net, node, self.table_cap)?;
        let d = self.net.domain(node);
        let domains: Vec<usize> = cpt.parents.iter().map(|&p| self.net.domain(p)).collect();
        let mut config = vec![0usize; cpt.parents.len()];
        for (row, probs) in cpt.table.chunks(d).enumerate() {
            let context: Vec<Lit> = cpt
                .parents
                .iter()
                .zip(&config)
                .map(|(&p, &x)| !self.indicator(p, x))
                .collect();
            let mut remaining = 1.0;
            let mut params: Vec<Var> = Vec::with_capacity(d - 1);
            for (value, &p) in probs[..d - 1].iter().enumerate() {
                let w = if remaining > 0.0 {
                    (p / remaining).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                remaining -= p;
                let var = self.registry.allocate(
                    &mut self.cnf,
                    Role::SangParam { node, row, value },
                    w,
                    1.0 - w,
                );
                params.push(var);
            }
            for value in 0..d {
                let mut lits = context.clone();
                lits.extend(params[..value.min(d - 1)].iter().map(|v| v.pos()));
                if value < d - 1 {
                    lits.push(params[value].neg());
                }
                lits.push(self.indicator(node, value));
                self.cnf.add_clause(lits);
            }
            crate::model::advance(&mut config, &domains);
        }
        Ok(start..self.cnf.clauses().len())
    }

    /// WMC1: `OR_i (I_Xi & P_qi) <=> I_Y` with auxiliaries `w_i`, whose
    /// definitions are conditional on `I_Y`.
    ///
    /// With `observed = Some(1)` only the clauses for a present effect are
    /// emitted (without `!I_Y`); with `Some(0)` only `(!I_Xi | !P_qi)` and no
    /// auxiliaries. With `None` the clauses `(I_Y | !w_i)` pin each auxiliary
    /// when the effect is absent.
    pub fn encode_noisy_or_wmc1(&mut self, node: NodeId, observed: Option<usize>) -> Result<Range<usize>> {
        let start = self.cnf.clauses().len();
        let (parents, q) = self.noisy_or(node, "wmc1")?;
        let y = self.indicator(node, 1);
        let mut params = Vec::with_capacity(parents.len());
        let mut aux = Vec::with_capacity(parents.len());
        for (i, &qi) in q.iter().enumerate() {
            params.push(self.registry.allocate(
                &mut self.cnf,
                Role::OrParam { node, parent: i },
                1.0 - qi,
                qi,
            ));
            if observed != Some(0) {
                aux.push(self.registry.allocate(
                    &mut self.cnf,
                    Role::OrAux { node, parent: i },
                    1.0,
                    1.0,
                ));
            }
        }
        let xs: Vec<Lit> = parents.iter().map(|&p| self.indicator(p, 1)).collect();
        if observed == Some(0) {
            for (x, p) in xs.iter().zip(&params) {
                self.cnf.add_clause([!*x, p.neg()]);
            }
            return Ok(start..self.cnf.clauses().len());
        }
        // `guard` is !I_Y unless the effect is known to be present.
        let guard: Vec<Lit> = if observed.is_some() { vec![] } else { vec![!y] };
        let clause = |lits: &[Lit]| guard.iter().chain(lits).copied().collect::<Vec<_>>();
        self.cnf.add_clause(clause(&aux.iter().map(|w| w.pos()).collect::<Vec<_>>()));
        for ((&x, p), w) in xs.iter().zip(&params).zip(&aux) {
            self.cnf.add_clause(clause(&[!x, p.neg(), w.pos()]));
            self.cnf.add_clause(clause(&[x, w.neg()]));
            self.cnf.add_clause(clause(&[p.pos(), w.neg()]));
        }
        if observed.is_none() {
            for (&x, p) in xs.iter().zip(&params) {
                self.cnf.add_clause([y, !x, p.neg()]);
            }
            for w in &aux {
                self.cnf.add_clause([y, w.neg()]);
            }
        }
        Ok(start..self.cnf.clauses().len())
    }

    /// WMC2: hidden `Y'`, factorization variables `u`/`w` and two parameters
    /// per arc.
    pub fn encode_noisy_or_wmc2(&mut self, node: NodeId) -> Result<Range<usize>> {
        let start = self.cnf.clauses().len();
        let (parents, q) = self.noisy_or(node, "wmc2")?;
        let hidden = self.allocate_hidden(node);
        let yp = hidden.lit(1);
        let y = self.indicator(node, 1);
        let u = self.registry.allocate(&mut self.cnf, Role::GadgetU { node }, 1.0, 0.0);
        let w = self.registry.allocate(&mut self.cnf, Role::GadgetW { node }, -1.0, 2.0);
        self.cnf.add_clause([!yp, y]);
        self.cnf.add_clause([!yp, !y, u.pos()]);
        self.cnf.add_clause([yp, !y, w.pos()]);
        for (i, (&p, &qi)) in parents.iter().zip(&q).enumerate() {
            let p0 = self.registry.allocate(
                &mut self.cnf,
                Role::ArcParam { node, parent: i, present: false },
                1.0,
                0.0,
            );
            let p1 = self.registry.allocate(
                &mut self.cnf,
                Role::ArcParam { node, parent: i, present: true },
                qi,
                1.0 - qi,
            );
            let x = self.indicator(p, 1);
            self.cnf.add_clause([yp, x, p0.pos()]);
            self.cnf.add_clause([yp, !x, p1.pos()]);
        }
        Ok(start..self.cnf.clauses().len())
    }

    /// Clauses realizing the factorization matrix `M_Y` between `Y` and its
    /// hidden node, one per matrix entry in row order. Allocates the hidden
    /// node if needed.
    pub fn encode_factorization_gadget(&mut self, node: NodeId) -> Range<usize> {
        let start = self.cnf.clauses().len();
        let hidden = match self.registry.hidden(node) {
            Some(h) => h.clone(),
            None => self.allocate_hidden(node),
        };
        let u = self.registry.allocate(&mut self.cnf, Role::GadgetU { node }, 1.0, 0.0);
        let w = self.registry.allocate(&mut self.cnf, Role::GadgetW { node }, -1.0, 2.0);
        let d = self.net.domain(node);
        for y in 0..d {
            for yp in 0..d {
                let last = if yp == y {
                    u.pos()
                } else if yp + 1 == y {
                    w.pos()
                } else {
                    u.neg()
                };
                self.cnf.add_clause([!hidden.lit(yp), !self.indicator(node, y), last]);
            }
        }
        start..self.cnf.clauses().len()
    }

    /// MAX1: additive noisy-MAX encoding with per-parent effect indicators.
    pub fn encode_noisy_max_max1(&mut self, node: NodeId) -> Result<Range<usize>> {
        let start = self.cnf.clauses().len();
        let (parents, q) = self.noisy_max(node, "max1")?;
        let d = self.net.domain(node);
        self.allocate_hidden(node);
        self.encode_factorization_gadget(node);
        let hidden = self.registry.hidden(node).unwrap().clone();
        let mut effects = Vec::with_capacity(parents.len());
        for (i, &p) in parents.iter().enumerate() {
            let effect = self.registry.allocate_group(&mut self.cnf, d, |value| Role::Effect {
                node,
                parent: i,
                value,
            });
            add_exactly_one(&mut self.cnf, &effect);
            for (x0, column) in q[i].iter().enumerate() {
                let x = x0 + 1;
                for (y, &qy) in column.iter().enumerate() {
                    let param = self.registry.allocate(
                        &mut self.cnf,
                        Role::MaxParam { node, parent: i, x, y },
                        qy,
                        1.0,
                    );
                    let a = self.indicator(p, x);
                    add_and_iff(&mut self.cnf, a, effect.lit(y), param.pos());
                }
            }
            effects.push(effect);
        }
        for (&p, effect) in parents.iter().zip(&effects) {
            self.cnf.add_clause([!self.indicator(p, 0), effect.lit(0)]);
        }
        for yp in 0..d {
            for y in yp + 1..d {
                for effect in &effects {
                    self.cnf.add_clause([!hidden.lit(yp), !effect.lit(y)]);
                }
            }
        }
        Ok(start..self.cnf.clauses().len())
    }

    /// MAX2: multiplicative noisy-MAX encoding. Parameter `P^x_{i,y}` carries
    /// the cumulative column sum up to `y` and is tied to the hidden node
    /// taking value `y`. With `redundant` the auxiliary `I_v` and its clauses
    /// are added.
    pub fn encode_noisy_max_max2(&mut self, node: NodeId, redundant: bool) -> Result<Range<usize>> {
        let start = self.cnf.clauses().len();
        let (parents, q) = self.noisy_max(node, "max2")?;
        let d = self.net.domain(node);
        self.allocate_hidden(node);
        self.encode_factorization_gadget(node);
        let hidden = self.registry.hidden(node).unwrap().clone();
        for (i, &p) in parents.iter().enumerate() {
            for (x0, column) in q[i].iter().enumerate() {
                let x = x0 + 1;
                for y in 0..d {
                    let cumulative: f64 = column[..=y].iter().sum();
                    let param = self.registry.allocate(
                        &mut self.cnf,
                        Role::MaxParam { node, parent: i, x, y },
                        cumulative,
                        1.0,
                    );
                    let a = self.indicator(p, x);
                    add_and_iff(&mut self.cnf, a, hidden.lit(y), param.pos());
                }
            }
        }
        if redundant {
            let v = self.registry.allocate(&mut self.cnf, Role::Redundant { node }, 1.0, 0.0);
            let none: Vec<Lit> = parents.iter().map(|&p| !self.indicator(p, 0)).collect();
            for value in 0..d {
                let target = if value == 0 { v.pos() } else { v.neg() };
                for lit in [hidden.lit(value), self.indicator(node, value)] {
                    let mut c = none.clone();
                    c.push(!lit);
                    c.push(target);
                    self.cnf.add_clause(c);
                }
            }
        }
        Ok(start..self.cnf.clauses().len())
    }

    fn allocate_hidden(&mut self, node: NodeId) -> ValueGroup {
        let d = self.net.domain(node);
        let group = self
            .registry
            .allocate_group(&mut self.cnf, d, |value| Role::Hidden { node, value });
        add_exactly_one(&mut self.cnf, &group);
        self.registry.insert_hidden(node, group.clone());
        group
    }

    fn noisy_or(&self, node: NodeId, encoding: &str) -> Result<(Vec<NodeId>, Vec<f64>)> {
        match &self.net.node(node).distribution {
            Some(Distribution::NoisyOr(n)) => Ok((n.parents.clone(), n.q.clone())),
            other => Err(self.mismatch(node, encoding, other.as_ref())),
        }
    }

    #[allow(clippy::type_complexity)]
    fn noisy_max(&self, node: NodeId, encoding: &str) -> Result<(Vec<NodeId>, Vec<Vec<Vec<f64>>>)> {
        match &self.net.node(node).distribution {
            Some(Distribution::NoisyMax(n)) => Ok((n.parents.clone(), n.q.clone())),
            other => Err(self.mismatch(node, encoding, other.as_ref())),
        }
    }

    fn mismatch(&self, node: NodeId, encoding: &str, dist: Option<&Distribution>) -> Error {
        Error::PolicyMismatch {
            node: self.net.node(node).name.clone(),
            encoding: encoding.to_string(),
            kind: dist.map_or("unspecified", Distribution::kind),
        }
    }
}

fn add_exactly_one(cnf: &mut WeightedCnf, group: &ValueGroup) {
    if group.vars().len() > 1 {
        for c in exactly_one_clauses(group.vars()) {
            cnf.push_clause(c);
        }
    }
}

/// `a & b <=> c` as `(!a | !b | c) & (a | !c) & (b | !c)`.
fn add_and_iff(cnf: &mut WeightedCnf, a: Lit, b: Lit, c: Lit) {
    for clause in [vec![!a, !b, c], vec![a, !c], vec![b, !c]] {
        if let Some(c) = Clause::new(clause) {
            cnf.push_clause(c);
        }
    }
}
