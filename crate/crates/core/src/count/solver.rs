use std::collections::BTreeSet;

use lru::LruCache;

use super::heuristic::{add_clique, min_fill, Vsads};
use super::{build_key, dense_code, Heuristic, SolverConfig, Stats, WeightClasses};
use crate::wcnf::{Lit, Var, WeightedCnf};

const NO_REASON: u32 = u32::MAX;

pub(super) struct Solver<'a> {
    config: &'a SolverConfig,
    cache: &'a mut Option<LruCache<Vec<u32>, f64>>,
    stats: Stats,
    weights: Vec<(f64, f64)>,
    class: Vec<u32>,
    clauses: Vec<Vec<Lit>>,
    originals: usize,
    factor: f64,
    unsat: bool,
    top_vars: Vec<u32>,
    watches: Vec<Vec<u32>>,
    value: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    qhead: usize,
    depth: u32,
    vsads: Vsads,
    group: Vec<u32>,
    learned_uses: u64,
    // scratch, indexed by var
    parent: Vec<u32>,
    occ: Vec<u32>,
    slot: Vec<u32>,
    dense: Vec<u32>,
    seen: Vec<bool>,
}

type Residual = (Vec<Vec<Lit>>, Vec<Option<bool>>, f64);

/// Top-level unit propagation. Returns the residual clauses, the values
/// fixed on the way and the product of their weights, or `None` on a
/// conflict.
fn propagate_units(f: &WeightedCnf, weights: &[(f64, f64)]) -> Option<Residual> {
    let mut value: Vec<Option<bool>> = f.vars().map(|v| f.value(v)).collect();
    let clauses: Vec<&[Lit]> = f.clauses().iter().map(|c| c.lits()).collect();
    let mut occurs = vec![Vec::new(); value.len()];
    for (i, c) in clauses.iter().enumerate() {
        for l in c.iter() {
            occurs[l.var().index()].push(i);
        }
    }
    let mut factor = 1.0;
    let mut queue = Vec::new();
    let check = |i: usize, value: &mut Vec<Option<bool>>, queue: &mut Vec<Lit>| -> bool {
        let mut open = None;
        for &l in clauses[i] {
            match value[l.var().index()] {
                Some(b) if b == l.is_positive() => return true,
                Some(_) => {}
                None if open.is_none() => open = Some(l),
                None => return true,
            }
        }
        match open {
            None => false,
            Some(l) => {
                value[l.var().index()] = Some(l.is_positive());
                queue.push(l);
                true
            }
        }
    };
    for i in 0..clauses.len() {
        if !check(i, &mut value, &mut queue) {
            return None;
        }
    }
    while let Some(l) = queue.pop() {
        let (p, n) = weights[l.var().index()];
        factor *= if l.is_positive() { p } else { n };
        for &i in &occurs[l.var().index()] {
            if !check(i, &mut value, &mut queue) {
                return None;
            }
        }
    }
    let residual = clauses
        .iter()
        .filter(|c| !c.iter().any(|l| value[l.var().index()] == Some(l.is_positive())))
        .map(|c| c.iter().copied().filter(|l| value[l.var().index()].is_none()).collect())
        .collect();
    Some((residual, value, factor))
}

/// Sums out every var that occurs in a single binary clause `(l | r)`,
/// moving its weight onto `r`. Repeats until nothing changes and returns the
/// eliminated vars.
fn fold_singletons(clauses: &mut Vec<Vec<Lit>>, weights: &mut [(f64, f64)]) -> Vec<bool> {
    let mut occ = vec![0u32; weights.len()];
    for l in clauses.iter().flatten() {
        occ[l.var().index()] += 1;
    }
    let mut eliminated = vec![false; weights.len()];
    let mut live = vec![true; clauses.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for (c, alive) in clauses.iter().zip(live.iter_mut()) {
            if !*alive || c.len() != 2 || c[0].var() == c[1].var() {
                continue;
            }
            for (l, r) in [(c[0], c[1]), (c[1], c[0])] {
                if occ[l.var().index()] != 1 {
                    continue;
                }
                let (p, n) = weights[l.var().index()];
                let (on, off) = if l.is_positive() { (p, n) } else { (n, p) };
                let w = &mut weights[r.var().index()];
                if r.is_positive() {
                    *w = (w.0 * (on + off), w.1 * on);
                } else {
                    *w = (w.0 * on, w.1 * (on + off));
                }
                eliminated[l.var().index()] = true;
                occ[l.var().index()] = 0;
                occ[r.var().index()] -= 1;
                *alive = false;
                changed = true;
                break;
            }
        }
    }
    let mut keep = live.into_iter();
    clauses.retain(|_| keep.next().unwrap());
    eliminated
}

impl<'a> Solver<'a> {
    pub(super) fn new(
        f: &WeightedCnf,
        config: &'a SolverConfig,
        cache: &'a mut Option<LruCache<Vec<u32>, f64>>,
        classes: &mut WeightClasses,
    ) -> Self {
        let n = f.num_vars();
        let mut weights: Vec<(f64, f64)> = f.vars().map(|v| f.weights(v)).collect();
        let (mut clauses, value, factor) =
            propagate_units(f, &weights).unwrap_or_else(|| (Vec::new(), vec![None; n], 0.0));
        let unsat = factor == 0.0;
        let eliminated = fold_singletons(&mut clauses, &mut weights);
        let class = weights.iter().map(|&w| classes.id(w)).collect();
        let top_vars = f
            .vars()
            .filter(|v| value[v.index()].is_none() && !eliminated[v.index()])
            .map(|v| v.0)
            .collect();
        let originals = clauses.len();
        let mut watches = vec![Vec::new(); 2 * n];
        for (i, c) in clauses.iter().enumerate() {
            watches[c[0].code()].push(i as u32);
            watches[c[1].code()].push(i as u32);
        }
        Solver {
            config,
            cache,
            stats: Stats::default(),
            weights,
            class,
            clauses,
            originals,
            factor,
            unsat,
            top_vars,
            watches,
            value: vec![None; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::new(),
            qhead: 0,
            depth: 0,
            vsads: Vsads::new(n, config.alpha, config.decay, config.bonus),
            group: vec![0; n],
            learned_uses: 0,
            parent: vec![0; n],
            occ: vec![0; n],
            slot: vec![u32::MAX; n],
            dense: vec![0; n],
            seen: vec![false; n],
        }
    }

    pub(super) fn run(mut self) -> (f64, Stats) {
        let value = self.count_top();
        if let Some(c) = self.cache.as_ref() {
            self.stats.peak_cache = self.stats.peak_cache.max(c.len());
        }
        (value, self.stats)
    }

    fn count_top(&mut self) -> f64 {
        if self.unsat {
            return 0.0;
        }
        let product = self.factor;
        if self.config.heuristic == Heuristic::Static {
            self.assign_groups();
        }
        let vars = std::mem::take(&mut self.top_vars);
        let clauses: Vec<u32> = (0..self.originals as u32).collect();
        if product == 0.0 {
            return 0.0;
        }
        product * self.count_children(&vars, &clauses)
    }

    fn assign_groups(&mut self) {
        let n = self.value.len();
        let mut adj = vec![BTreeSet::new(); n];
        for c in &self.clauses[..self.originals] {
            if c.iter().any(|&l| self.lit_value(l) == Some(true)) {
                continue;
            }
            let vs: Vec<u32> = c
                .iter()
                .filter(|l| self.value[l.var().index()].is_none())
                .map(|l| l.var().0)
                .collect();
            add_clique(&mut adj, &vs);
        }
        let include: Vec<bool> = self.value.iter().map(Option::is_none).collect();
        let mut order = min_fill(adj, &include);
        order.reverse();
        let size = self.config.group_size.max(1);
        for (i, v) in order.into_iter().enumerate() {
            self.group[v as usize] = (i / size) as u32;
        }
    }

    fn weight(&self, l: Lit) -> f64 {
        let (p, n) = self.weights[l.var().index()];
        if l.is_positive() {
            p
        } else {
            n
        }
    }

    fn lit_value(&self, l: Lit) -> Option<bool> {
        self.value[l.var().index()].map(|v| v == l.is_positive())
    }

    fn assign(&mut self, l: Lit, reason: u32) {
        let v = l.var().index();
        self.value[v] = Some(l.is_positive());
        self.level[v] = self.depth;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns the index of a falsified clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let falsified = !self.trail[self.qhead];
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[falsified.code()]);
            let mut conflict = None;
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let cid = ws[i];
                i += 1;
                let c = &mut self.clauses[cid as usize];
                if c[0] == falsified {
                    c.swap(0, 1);
                }
                let first = c[0];
                let first_value = self.value[first.var().index()].map(|v| v == first.is_positive());
                if first_value == Some(true) {
                    ws[j] = cid;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    if self.value[l.var().index()] != Some(!l.is_positive()) {
                        c.swap(1, k);
                        self.watches[l.code()].push(cid);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cid;
                j += 1;
                if cid as usize >= self.originals {
                    self.learned_uses += 1;
                }
                if first_value == Some(false) {
                    conflict = Some(cid);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.assign(first, cid);
                }
            }
            ws.truncate(j);
            self.watches[falsified.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn backtrack(&mut self, mark: usize) {
        for l in self.trail.drain(mark..) {
            let v = l.var().index();
            self.value[v] = None;
            self.reason[v] = NO_REASON;
        }
        self.qhead = mark;
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    /// Count of the residual of `clauses` over the unassigned vars among
    /// `vars`, which must be sorted.
    fn count_children(&mut self, vars: &[u32], clauses: &[u32]) -> f64 {
        let mut free = 1.0;
        let open: Vec<u32> = vars
            .iter()
            .copied()
            .filter(|&v| self.value[v as usize].is_none())
            .collect();
        for &v in &open {
            self.parent[v as usize] = v;
            self.occ[v as usize] = 0;
        }
        let mut active = Vec::new();
        for &cid in clauses {
            let c = &self.clauses[cid as usize];
            if c.iter().any(|&l| self.lit_value(l) == Some(true)) {
                continue;
            }
            let mut root = None;
            let lits: Vec<u32> = c
                .iter()
                .filter(|l| self.value[l.var().index()].is_none())
                .map(|l| l.var().0)
                .collect();
            for v in lits {
                self.occ[v as usize] = 1;
                let r = self.find(v);
                match root {
                    None => root = Some(r),
                    Some(r0) if r0 != r => {
                        let (lo, hi) = (r0.min(r), r0.max(r));
                        self.parent[hi as usize] = lo;
                        root = Some(lo);
                    }
                    _ => {}
                }
            }
            active.push(cid);
        }
        let mut comps: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
        for &v in &open {
            if self.occ[v as usize] == 0 {
                let (p, n) = self.weights[v as usize];
                free *= p + n;
                continue;
            }
            let r = self.find(v) as usize;
            if self.slot[r] == u32::MAX {
                self.slot[r] = comps.len() as u32;
                comps.push((Vec::new(), Vec::new()));
            }
            comps[self.slot[r] as usize].0.push(v);
        }
        for cid in active {
            let l = self.clauses[cid as usize]
                .iter()
                .find(|l| self.value[l.var().index()].is_none())
                .copied()
                .expect("active clause has an open literal");
            let r = self.find(l.var().0) as usize;
            comps[self.slot[r] as usize].1.push(cid);
        }
        for &v in &open {
            self.occ[v as usize] = 0;
            self.slot[v as usize] = u32::MAX;
        }
        let mut result = free;
        for (cv, cc) in comps {
            if result == 0.0 {
                break;
            }
            result *= self.count_component(&cv, &cc);
        }
        result
    }

    fn component_key(&mut self, vars: &[u32], clauses: &[u32]) -> Vec<u32> {
        for (i, &v) in vars.iter().enumerate() {
            self.dense[v as usize] = i as u32;
        }
        let classes: Vec<u32> = vars.iter().map(|&v| self.class[v as usize]).collect();
        let residual = clauses
            .iter()
            .map(|&cid| {
                self.clauses[cid as usize]
                    .iter()
                    .filter(|l| self.value[l.var().index()].is_none())
                    .map(|&l| dense_code(self.dense[l.var().index()], l))
                    .collect()
            })
            .collect();
        build_key(&classes, residual)
    }

    fn select(&mut self, vars: &[u32], clauses: &[u32]) -> Var {
        for &cid in clauses {
            for l in &self.clauses[cid as usize] {
                if self.value[l.var().index()].is_none() {
                    self.occ[l.var().index()] += 1;
                }
            }
        }
        let best_group = match self.config.heuristic {
            Heuristic::Static => vars.iter().map(|&v| self.group[v as usize]).min().unwrap_or(0),
            Heuristic::Vsads => 0,
        };
        let pick = self
            .vsads
            .select(
                vars.iter()
                    .filter(|&&v| self.group[v as usize] == best_group)
                    .map(|&v| (Var(v), self.occ[v as usize])),
            )
            .expect("component has a var");
        for &v in vars {
            self.occ[v as usize] = 0;
        }
        pick
    }

    fn count_component(&mut self, vars: &[u32], clauses: &[u32]) -> f64 {
        let key = if self.cache.is_some() {
            let key = self.component_key(vars, clauses);
            if let Some(&hit) = self.cache.as_mut().unwrap().get(&key) {
                self.stats.cache_hits += 1;
                return hit;
            }
            Some(key)
        } else {
            None
        };
        let uses_before = self.learned_uses;
        let var = self.select(vars, clauses);
        let mut total = 0.0;
        for positive in [true, false] {
            let lit = Lit::new(var, positive);
            let w = self.weight(lit);
            if w == 0.0 {
                continue;
            }
            self.stats.decisions += 1;
            let mark = self.trail.len();
            self.depth += 1;
            self.assign(lit, NO_REASON);
            if let Some(conflict) = self.propagate() {
                self.on_conflict(conflict);
            } else {
                let mut product = w;
                for &l in &self.trail[mark + 1..] {
                    if !self.config.learn || vars.binary_search(&l.var().0).is_ok() {
                        product *= self.weight(l);
                    }
                }
                if product != 0.0 {
                    total += product * self.count_children(vars, clauses);
                }
            }
            self.backtrack(mark);
            self.depth -= 1;
        }
        if let Some(key) = key {
            if self.learned_uses == uses_before {
                let cache = self.cache.as_mut().unwrap();
                cache.put(key, total);
                self.stats.peak_cache = self.stats.peak_cache.max(cache.len());
            }
        }
        total
    }

    fn on_conflict(&mut self, conflict: u32) {
        self.stats.conflicts += 1;
        let vars: Vec<Var> = self.clauses[conflict as usize].iter().map(|l| l.var()).collect();
        self.vsads.on_conflict(vars);
        if self.config.learn {
            let learnt = self.analyze(conflict);
            if learnt.len() >= 2 {
                self.add_learned(learnt);
            }
        }
    }

    /// First-UIP clause for a conflict at the current depth. The asserting
    /// literal comes first.
    fn analyze(&mut self, conflict: u32) -> Vec<Lit> {
        let mut learnt = vec![Lit::new(Var(0), true)];
        let mut pending = 0usize;
        let mut index = self.trail.len();
        let mut clause = conflict;
        let mut pivot: Option<Lit> = None;
        loop {
            for k in 0..self.clauses[clause as usize].len() {
                let q = self.clauses[clause as usize][k];
                let v = q.var().index();
                if Some(q.var()) == pivot.map(Lit::var) || self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                if self.level[v] == self.depth {
                    pending += 1;
                } else {
                    learnt.push(q);
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var().index()] = false;
            pending -= 1;
            pivot = Some(p);
            if pending == 0 {
                break;
            }
            clause = self.reason[p.var().index()];
            debug_assert_ne!(clause, NO_REASON);
        }
        learnt[0] = !pivot.expect("conflict at a decision level");
        for l in &learnt[1..] {
            self.seen[l.var().index()] = false;
        }
        learnt
    }

    fn add_learned(&mut self, mut lits: Vec<Lit>) {
        let (mut best, mut best_level) = (1, 0);
        for (k, l) in lits.iter().enumerate().skip(1) {
            let lv = self.level[l.var().index()];
            if lv >= best_level {
                best = k;
                best_level = lv;
            }
        }
        lits.swap(1, best);
        let id = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(id);
        self.watches[lits[1].code()].push(id);
        self.clauses.push(lits);
        self.stats.learned += 1;
    }
}
