//! Seeded random networks and evidence.
//!
//! All randomness comes from [`Source`], a PCG-64 (XSL RR 128/64) stream
//! seeded through `seed_from_u64`. Every derived draw is specified below, so
//! an implementation in another language can reproduce a network bit for bit:
//!
//! * uniform real: `(next_u64 >> 11) * 2^-53`, in `[0, 1)`;
//! * integer below `n`: rejection sampling on `next_u64` against the largest
//!   multiple of `n`;
//! * `k`-subset of `0..n`: the first `k` steps of a Fisher-Yates shuffle,
//!   then sorted ascending;
//! * Dirichlet(1) over `k` values: `-ln(1 - u)` per value, normalized.
//!
//! Two-layer networks name their nodes `D0, D1, ...` (diseases) and
//! `S0, S1, ...` (symptoms); multi-layer networks use `X0, X1, ...`.

use std::collections::BTreeSet;

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::model::{Distribution, Evidence, Network, NodeId};

/// Deterministic random source.
#[derive(Clone, Debug)]
pub struct Source(Pcg64);

impl Source {
    pub fn seeded(seed: u64) -> Self {
        Source(Pcg64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// A uniform `k`-subset of `0..n`, ascending.
    pub fn subset(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.index(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool.sort_unstable();
        pool
    }

    pub fn dirichlet(&mut self, k: usize) -> Vec<f64> {
        let mut xs: Vec<f64> = (0..k).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let total: f64 = xs.iter().sum();
        if total > 0.0 {
            for x in &mut xs {
                *x /= total;
            }
        } else {
            xs = vec![1.0 / k as f64; k];
        }
        xs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    NoisyOr,
    NoisyMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    TwoLayer {
        diseases: usize,
        symptoms: usize,
        parents: usize,
    },
    MultiLayer {
        nodes: usize,
        arcs: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenSpec {
    pub family: Family,
    pub relation: Relation,
    /// Domain size of every node.
    pub domain: usize,
    /// Interval for noisy-OR parameters and Boolean root priors.
    pub param_range: (f64, f64),
    pub seed: u64,
}

impl GenSpec {
    pub fn two_layer(diseases: usize, symptoms: usize, parents: usize, seed: u64) -> Self {
        GenSpec {
            family: Family::TwoLayer {
                diseases,
                symptoms,
                parents,
            },
            relation: Relation::NoisyOr,
            domain: 2,
            param_range: (0.05, 0.95),
            seed,
        }
    }

    pub fn multi_layer(nodes: usize, arcs: usize, seed: u64) -> Self {
        GenSpec {
            family: Family::MultiLayer { nodes, arcs },
            relation: Relation::NoisyOr,
            domain: 2,
            param_range: (0.05, 0.95),
            seed,
        }
    }

    /// Switches to noisy-MAX over `domain` values.
    pub fn noisy_max(mut self, domain: usize) -> Self {
        self.relation = Relation::NoisyMax;
        self.domain = domain;
        self
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if self.domain < 2 {
            return bad(format!("domain size {} is below 2", self.domain));
        }
        if self.relation == Relation::NoisyOr && self.domain != 2 {
            return bad(format!("noisy-OR needs domain 2, got {}", self.domain));
        }
        let (lo, hi) = self.param_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return bad(format!("parameter range [{lo}, {hi}] is not inside [0, 1]"));
        }
        match self.family {
            Family::TwoLayer {
                diseases, parents, ..
            } if parents > diseases => bad(format!(
                "{parents} parents per symptom but only {diseases} diseases"
            )),
            Family::MultiLayer { nodes, arcs } if arcs as u128 > pair_count(nodes) => bad(format!(
                "{arcs} arcs exceed the {} pairs of {nodes} nodes",
                pair_count(nodes)
            )),
            _ => Ok(()),
        }
    }
}

fn pair_count(n: usize) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

fn add_prior(net: &mut Network, id: NodeId, spec: &GenSpec, rng: &mut Source) {
    let prior = if spec.domain == 2 {
        let p = rng.uniform_in(spec.param_range.0, spec.param_range.1);
        vec![1.0 - p, p]
    } else {
        rng.dirichlet(spec.domain)
    };
    net.set_prior(id, prior);
}

fn add_noisy(net: &mut Network, id: NodeId, parents: Vec<NodeId>, spec: &GenSpec, rng: &mut Source) {
    match spec.relation {
        Relation::NoisyOr => {
            let q = parents
                .iter()
                .map(|_| rng.uniform_in(spec.param_range.0, spec.param_range.1))
                .collect();
            net.set_noisy_or(id, parents, q);
        }
        Relation::NoisyMax => {
            let q = parents
                .iter()
                .map(|&p| {
                    (1..net.domain(p))
                        .map(|_| rng.dirichlet(spec.domain))
                        .collect()
                })
                .collect();
            net.set_noisy_max(id, parents, q);
        }
    }
}

/// Diseases with random priors, each symptom a noisy node over a uniform
/// random set of diseases.
pub fn gen_two_layer(spec: &GenSpec) -> Result<Network> {
    spec.check()?;
    let Family::TwoLayer {
        diseases,
        symptoms,
        parents,
    } = spec.family
    else {
        return Err(Error::SpecInvalid("expected a two-layer spec".into()));
    };
    let mut rng = Source::seeded(spec.seed);
    let mut net = Network::new();
    let ds: Vec<NodeId> = (0..diseases)
        .map(|i| net.add_node(format!("D{i}"), spec.domain))
        .collect::<Result<_>>()?;
    for &d in &ds {
        add_prior(&mut net, d, spec, &mut rng);
    }
    for s in 0..symptoms {
        let id = net.add_node(format!("S{s}"), spec.domain)?;
        let ps = rng.subset(diseases, parents).into_iter().map(|i| ds[i]).collect();
        add_noisy(&mut net, id, ps, spec, &mut rng);
    }
    Ok(net)
}

/// `nodes` nodes and `arcs` distinct random pairs, each oriented from the
/// lower to the higher index.
pub fn gen_multi_layer(spec: &GenSpec) -> Result<Network> {
    spec.check()?;
    let Family::MultiLayer { nodes, arcs } = spec.family else {
        return Err(Error::SpecInvalid("expected a multi-layer spec".into()));
    };
    let mut rng = Source::seeded(spec.seed);
    let total = pair_count(nodes) as u64;
    let mut picked = BTreeSet::new();
    for j in total - arcs as u64..total {
        let t = rng.below(j + 1);
        if !picked.insert(t) {
            picked.insert(j);
        }
    }
    let mut parents = vec![Vec::new(); nodes];
    let (mut row, mut row_start) = (0usize, 0u64);
    for k in picked {
        while k >= row_start + (nodes - row - 1) as u64 {
            row_start += (nodes - row - 1) as u64;
            row += 1;
        }
        let col = row + 1 + (k - row_start) as usize;
        parents[col].push(NodeId(row));
    }
    let mut net = Network::new();
    for i in 0..nodes {
        net.add_node(format!("X{i}"), spec.domain)?;
    }
    for (i, ps) in parents.into_iter().enumerate() {
        if ps.is_empty() {
            add_prior(&mut net, NodeId(i), spec, &mut rng);
        } else {
            add_noisy(&mut net, NodeId(i), ps, spec, &mut rng);
        }
    }
    Ok(net)
}

/// Sorts the symptoms (nodes with parents) by ascending parent count, ties by
/// position, and observes the first `positive` at their top value and the
/// rest at 0.
pub fn gen_evidence(net: &Network, positive: usize) -> Result<Evidence> {
    let mut symptoms: Vec<NodeId> = net.ids().filter(|&id| !net.parents(id).is_empty()).collect();
    for &s in &symptoms {
        if net.parents(s).iter().any(|&p| !net.parents(p).is_empty()) {
            return Err(Error::SpecInvalid(format!(
                "{} has a parent that is not a root; evidence needs a two-layer network",
                net.node(s).name
            )));
        }
    }
    if positive > symptoms.len() {
        return Err(Error::SpecInvalid(format!(
            "{positive} positive symptoms requested, network has {}",
            symptoms.len()
        )));
    }
    symptoms.sort_by_key(|&s| net.parents(s).len());
    Ok(symptoms
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, if i < positive { net.domain(s) - 1 } else { 0 }))
        .collect())
}

/// Whether every non-root node of `net` carries a noisy relation.
pub fn is_noisy_network(net: &Network) -> bool {
    net.nodes().iter().all(|n| {
        n.parents().is_empty()
            || matches!(
                n.distribution,
                Some(Distribution::NoisyOr(_) | Distribution::NoisyMax(_))
            )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate, write_network};

    #[test]
    fn same_seed_same_bytes() {
        let spec = GenSpec::two_layer(20, 15, 4, 7);
        let a = write_network(&gen_two_layer(&spec).unwrap());
        let b = write_network(&gen_two_layer(&spec).unwrap());
        assert_eq!(a, b);
        let c = write_network(&gen_two_layer(&GenSpec { seed: 8, ..spec }).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn six_parents_everywhere() {
        let net = gen_two_layer(&GenSpec::two_layer(500, 500, 6, 1)).unwrap();
        assert!(validate(&net).is_empty());
        let symptoms: Vec<_> = net.ids().filter(|&i| !net.parents(i).is_empty()).collect();
        assert_eq!(symptoms.len(), 500);
        assert!(symptoms.iter().all(|&s| net.parents(s).len() == 6));
    }

    #[test]
    fn smallest_two_layer() {
        let net = gen_two_layer(&GenSpec::two_layer(2, 1, 1, 3)).unwrap();
        assert_eq!(net.len(), 3);
        assert!(validate(&net).is_empty());
    }

    #[test]
    fn arcs_point_upward_and_are_distinct() {
        let net = gen_multi_layer(&GenSpec::multi_layer(40, 200, 5)).unwrap();
        assert!(validate(&net).is_empty());
        let mut arcs = 0;
        for id in net.ids() {
            let ps = net.parents(id);
            arcs += ps.len();
            assert!(ps.windows(2).all(|w| w[0] < w[1]));
            assert!(ps.iter().all(|p| p.index() < id.index()));
        }
        assert_eq!(arcs, 200);
    }

    #[test]
    fn complete_dag_when_every_pair_is_taken() {
        let net = gen_multi_layer(&GenSpec::multi_layer(6, 15, 2)).unwrap();
        for id in net.ids() {
            assert_eq!(net.parents(id).len(), id.index());
        }
    }

    #[test]
    fn noisy_max_family_validates() {
        let net = gen_multi_layer(&GenSpec::multi_layer(100, 150, 9).noisy_max(5)).unwrap();
        assert!(validate(&net).is_empty());
        assert!(is_noisy_network(&net));
        assert!(net.ids().all(|i| net.domain(i) == 5));
    }

    #[test]
    fn no_arcs_means_independent_priors() {
        let net = gen_multi_layer(&GenSpec::multi_layer(5, 0, 4)).unwrap();
        let assignment = [1, 0, 1, 1, 0];
        let expected: f64 = net
            .ids()
            .map(|i| net.cpt_entry(i, &[], assignment[i.index()]))
            .product();
        let joint = crate::model::joint_probability(&net, &assignment);
        assert!((joint - expected).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs_are_refused() {
        assert!(matches!(
            gen_two_layer(&GenSpec::two_layer(3, 3, 4, 0)),
            Err(Error::SpecInvalid(_))
        ));
        assert!(gen_multi_layer(&GenSpec::multi_layer(4, 7, 0)).is_err());
        let mut spec = GenSpec::multi_layer(4, 2, 0);
        spec.domain = 3;
        assert!(gen_multi_layer(&spec).is_err());
    }

    #[test]
    fn evidence_follows_parent_count_order() {
        let net = gen_multi_layer(&GenSpec::multi_layer(8, 0, 0)).unwrap();
        assert!(gen_evidence(&net, 0).unwrap().is_empty());
        let net = gen_two_layer(&GenSpec::two_layer(10, 6, 3, 11)).unwrap();
        let all = gen_evidence(&net, 6).unwrap();
        assert!(all.iter().all(|(_, v)| v == 1));
        let none = gen_evidence(&net, 0).unwrap();
        assert_eq!(none.len(), 6);
        assert!(none.iter().all(|(_, v)| v == 0));
        assert!(gen_evidence(&net, 7).is_err());
    }

    #[test]
    fn below_and_subset_stay_in_range() {
        let mut rng = Source::seeded(0);
        for n in 1..50u64 {
            assert!(rng.below(n) < n);
        }
        let s = rng.subset(10, 10);
        assert_eq!(s, (0..10).collect::<Vec<_>>());
        let d = rng.dirichlet(4);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
