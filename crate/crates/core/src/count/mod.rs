//! Exact weighted model counting.
//!
//! The counter is a DPLL search with two-watched-literal unit propagation,
//! dynamic decomposition into connected components and a least-recently-used
//! cache of component counts. Negative literal weights are supported
//! throughout. Top-level units are propagated first, and vars that occur in
//! a single binary clause are summed out into the other literal's weight.
//!
//! ```
//! use noisywmc::count::{count, SolverConfig};
//! use noisywmc::wcnf::{Var, WeightedCnf};
//!
//! let mut f = WeightedCnf::new(2);
//! f.set_weights(Var(0), 0.2, 0.8);
//! f.set_weights(Var(1), 0.5, 0.5);
//! f.add_clause([Var(0).pos(), Var(1).pos()]);
//! let (value, stats) = count(&f, &SolverConfig::default());
//! assert!((value - 0.6).abs() < 1e-15);
//! // Var(1) occurs only in `(a | b)` and is summed out before the search.
//! assert_eq!(stats.decisions, 0);
//! ```

mod heuristic;
mod solver;

use std::collections::HashMap;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;
use std::time::Instant;

use lru::LruCache;

pub use heuristic::{min_fill_order, static_group_order, Vsads};

use crate::wcnf::{Lit, Var, WeightedCnf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Heuristic {
    Vsads,
    /// Min-fill variable groups, VSADS within a group.
    Static,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Vsads => "vsads",
            Heuristic::Static => "static",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vsads" => Ok(Heuristic::Vsads),
            "static" | "static-group" => Ok(Heuristic::Static),
            _ => Err(format!("unknown heuristic `{s}` (expected vsads or static)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub heuristic: Heuristic,
    /// Weight of the occurrence count in the VSADS score.
    pub alpha: f64,
    /// Activity decay per conflict, in `(0, 1]`.
    pub decay: f64,
    /// Activity added to each var of a conflict clause.
    pub bonus: f64,
    /// Maximum cached components; 0 disables caching.
    pub cache_capacity: usize,
    /// Record 1-UIP conflict clauses.
    pub learn: bool,
    /// Vars per group for [`Heuristic::Static`].
    pub group_size: usize,
    /// Stack reserved for the search thread, in bytes.
    pub stack_size: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            heuristic: Heuristic::Vsads,
            alpha: 0.5,
            decay: 0.95,
            bonus: 1.0,
            cache_capacity: 1 << 18,
            learn: false,
            group_size: 16,
            stack_size: 256 << 20,
        }
    }
}

impl SolverConfig {
    pub fn with_heuristic(mut self, heuristic: Heuristic) -> Self {
        self.heuristic = heuristic;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub decisions: u64,
    pub conflicts: u64,
    pub cache_hits: u64,
    pub peak_cache: usize,
    pub learned: u64,
    pub time_ms: u128,
}

impl Stats {
    fn absorb(&mut self, other: &Stats) {
        self.decisions += other.decisions;
        self.conflicts += other.conflicts;
        self.cache_hits += other.cache_hits;
        self.peak_cache = self.peak_cache.max(other.peak_cache);
        self.learned += other.learned;
        self.time_ms += other.time_ms;
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stats decisions={} cachehits={} time_ms={}",
            self.decisions, self.cache_hits, self.time_ms
        )
    }
}

/// Interns weight pairs so that vars with different weights never share a
/// class id.
#[derive(Clone, Debug, Default)]
pub(crate) struct WeightClasses(HashMap<(u64, u64), u32>);

impl WeightClasses {
    pub(crate) fn id(&mut self, (p, n): (f64, f64)) -> u32 {
        let next = self.0.len() as u32;
        *self.0.entry((p.to_bits(), n.to_bits())).or_insert(next)
    }
}

/// A reusable counter. The component cache and weight classes persist
/// between calls, so counting related formulas shares work.
pub struct Counter {
    config: SolverConfig,
    cache: Option<LruCache<Vec<u32>, f64>>,
    classes: WeightClasses,
    total: Stats,
}

impl Counter {
    pub fn new(config: SolverConfig) -> Self {
        Counter {
            cache: NonZeroUsize::new(config.cache_capacity).map(LruCache::new),
            config,
            classes: WeightClasses::default(),
            total: Stats::default(),
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Totals over every call so far.
    pub fn total_stats(&self) -> Stats {
        self.total
    }

    pub fn count(&mut self, f: &WeightedCnf) -> (f64, Stats) {
        let start = Instant::now();
        let stack = self.config.stack_size;
        let (value, mut stats) = std::thread::scope(|s| {
            std::thread::Builder::new()
                .stack_size(stack)
                .spawn_scoped(s, || {
                    solver::Solver::new(f, &self.config, &mut self.cache, &mut self.classes).run()
                })
                .expect("spawn counting thread")
                .join()
                .unwrap_or_else(|e| std::panic::resume_unwind(e))
        });
        stats.time_ms = start.elapsed().as_millis();
        self.total.absorb(&stats);
        (value, stats)
    }
}

/// Weighted model count of the unassigned part of `f`.
pub fn count(f: &WeightedCnf, config: &SolverConfig) -> (f64, Stats) {
    Counter::new(*config).count(f)
}

/// A connected piece of a residual formula.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Component {
    /// Unassigned vars, ascending.
    pub vars: Vec<Var>,
    /// Indices into the formula's clause list.
    pub clauses: Vec<usize>,
}

/// Splits the clauses of `f` into var-disjoint connected components, ordered
/// by their lowest var. Unassigned vars that occur in no clause are returned
/// separately.
pub fn decompose(f: &WeightedCnf) -> (Vec<Component>, Vec<Var>) {
    let n = f.num_vars();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut used = vec![false; n];
    for c in f.clauses() {
        let mut vs = c.lits().iter().map(|l| l.var().index());
        if let Some(first) = vs.next() {
            used[first] = true;
            for v in vs {
                used[v] = true;
                let (a, b) = (find(&mut parent, first), find(&mut parent, v));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut comps: Vec<Component> = Vec::new();
    let mut free = Vec::new();
    for v in f.unassigned_vars() {
        if !used[v.index()] {
            free.push(v);
            continue;
        }
        let r = find(&mut parent, v.index());
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Component::default());
        }
        comps[slot[r]].vars.push(v);
    }
    for (i, c) in f.clauses().iter().enumerate() {
        if let Some(l) = c.lits().first() {
            let r = find(&mut parent, l.var().index());
            comps[slot[r]].clauses.push(i);
        }
    }
    (comps, free)
}

/// Builds cache keys for components of residual formulas.
///
/// A key lists the component size, a weight class per var in ascending var
/// order, then the sorted, deduplicated clauses over dense var numbers. Two
/// components get the same key exactly when they are the same formula up to
/// an order-preserving renaming that keeps every var's weights.
#[derive(Clone, Debug, Default)]
pub struct ComponentKeyer {
    classes: WeightClasses,
}

impl ComponentKeyer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key(&mut self, f: &WeightedCnf, component: &Component) -> Vec<u32> {
        let dense: HashMap<Var, u32> = component
            .vars
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32))
            .collect();
        let clauses = component.clauses.iter().map(|&i| {
            f.clauses()[i]
                .lits()
                .iter()
                .map(|&l| dense_code(dense[&l.var()], l))
                .collect::<Vec<u32>>()
        });
        let classes: Vec<u32> = component
            .vars
            .iter()
            .map(|&v| self.classes.id(f.weights(v)))
            .collect();
        build_key(&classes, clauses.collect())
    }
}

pub(crate) fn dense_code(index: u32, lit: Lit) -> u32 {
    2 * index + u32::from(!lit.is_positive())
}

pub(crate) fn build_key(classes: &[u32], mut clauses: Vec<Vec<u32>>) -> Vec<u32> {
    for c in &mut clauses {
        c.sort_unstable();
    }
    clauses.sort_unstable();
    clauses.dedup();
    let len = 1 + classes.len() + clauses.iter().map(|c| c.len() + 1).sum::<usize>();
    let mut key = Vec::with_capacity(len);
    key.push(classes.len() as u32);
    key.extend_from_slice(classes);
    for c in clauses {
        key.push(c.len() as u32);
        key.extend(c);
    }
    key
}
