use std::collections::BTreeSet;

use crate::wcnf::{Var, WeightedCnf};

/// Decayed conflict activity combined with literal occurrence counts.
///
/// Activities are stored unscaled and multiplied by a shared factor, so a
/// decay step is O(1).
#[derive(Clone, Debug)]
pub struct Vsads {
    raw: Vec<f64>,
    scale: f64,
    alpha: f64,
    decay: f64,
    bonus: f64,
}

impl Vsads {
    pub fn new(num_vars: usize, alpha: f64, decay: f64, bonus: f64) -> Self {
        assert!(decay > 0.0 && decay <= 1.0, "decay must lie in (0, 1]");
        Vsads {
            raw: vec![0.0; num_vars],
            scale: 1.0,
            alpha,
            decay,
            bonus,
        }
    }

    /// Current decayed conflict activity of `var`.
    pub fn activity(&self, var: Var) -> f64 {
        self.raw[var.index()] * self.scale
    }

    pub fn score(&self, var: Var, occurrences: u32) -> f64 {
        self.activity(var) + self.alpha * f64::from(occurrences)
    }

    /// Records a conflict: every activity decays, then each var in `vars`
    /// gains the bonus.
    pub fn on_conflict(&mut self, vars: impl IntoIterator<Item = Var>) {
        self.scale *= self.decay;
        if self.scale < 1e-100 {
            for a in &mut self.raw {
                *a *= self.scale;
            }
            self.scale = 1.0;
        }
        let inc = self.bonus / self.scale;
        for v in vars {
            self.raw[v.index()] += inc;
        }
    }

    /// The candidate with the highest score; ties go to the lowest var.
    pub fn select(&self, candidates: impl IntoIterator<Item = (Var, u32)>) -> Option<Var> {
        let mut best: Option<(Var, f64)> = None;
        for (v, occ) in candidates {
            let s = self.score(v, occ);
            match best {
                Some((bv, bs)) if s < bs || (s == bs && bv < v) => {}
                _ => best = Some((v, s)),
            }
        }
        best.map(|(v, _)| v)
    }
}

/// Min-fill elimination order of the primal graph of the unassigned part of
/// `f`. Ties go to the lowest var.
pub fn min_fill_order(f: &WeightedCnf) -> Vec<Var> {
    let n = f.num_vars();
    let mut adj = vec![BTreeSet::new(); n];
    for c in f.clauses() {
        let vs: Vec<u32> = c.lits().iter().map(|l| l.var().0).collect();
        add_clique(&mut adj, &vs);
    }
    let include: Vec<bool> = f.assignment().iter().map(Option::is_none).collect();
    min_fill(adj, &include).into_iter().map(Var).collect()
}

/// The reversed min-fill order cut into chunks of `group_size` vars.
pub fn static_group_order(f: &WeightedCnf, group_size: usize) -> Vec<Vec<Var>> {
    let mut order = min_fill_order(f);
    order.reverse();
    order.chunks(group_size.max(1)).map(<[Var]>::to_vec).collect()
}

pub(crate) fn add_clique(adj: &mut [BTreeSet<u32>], vars: &[u32]) {
    for (i, &a) in vars.iter().enumerate() {
        for &b in &vars[i + 1..] {
            if a != b {
                adj[a as usize].insert(b);
                adj[b as usize].insert(a);
            }
        }
    }
}

fn fill_in(adj: &[BTreeSet<u32>], v: u32) -> u64 {
    let nb: Vec<u32> = adj[v as usize].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !adj[a as usize].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

pub(crate) fn min_fill(mut adj: Vec<BTreeSet<u32>>, include: &[bool]) -> Vec<u32> {
    let n = adj.len();
    for (v, ok) in include.iter().enumerate() {
        if !ok {
            for u in std::mem::take(&mut adj[v]) {
                adj[u as usize].remove(&(v as u32));
            }
        }
    }
    let mut fill = vec![0u64; n];
    let mut queue = BTreeSet::new();
    for v in (0..n as u32).filter(|&v| include[v as usize]) {
        fill[v as usize] = fill_in(&adj, v);
        queue.insert((fill[v as usize], v));
    }
    let mut order = Vec::with_capacity(queue.len());
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nb: Vec<u32> = std::mem::take(&mut adj[v as usize]).into_iter().collect();
        for &u in &nb {
            adj[u as usize].remove(&v);
        }
        add_clique(&mut adj, &nb);
        let mut touched = BTreeSet::new();
        for &u in &nb {
            touched.insert(u);
            touched.extend(adj[u as usize].iter().copied());
        }
        for u in touched {
            let f = fill_in(&adj, u);
            if f != fill[u as usize] {
                queue.remove(&(fill[u as usize], u));
                fill[u as usize] = f;
                queue.insert((f, u));
            }
        }
    }
    order
}
