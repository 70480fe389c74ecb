//! Weighted CNF: clauses over Boolean variables plus a real weight for each
//! literal. Weights may be negative.
//!
//! The weight of a formula is the sum, over its satisfying assignments of the
//! *unassigned* variables, of the product of the literal weights. Conditioning
//! with [`residual`] marks a variable assigned and removes it from that sum, so
//! `W(F) = w(l) * W(F|l) + w(!l) * W(F|!l)` holds for every variable.

use std::fmt::{self, Write as _};
use std::ops::Not;

use crate::error::{Error, Result};

/// Default cap on the number of unassigned variables [`brute_force_weight`]
/// will enumerate.
pub const DEFAULT_VAR_CAP: usize = 25;

/// A propositional variable. Internally 0-based; DIMACS text is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

/// A variable with a polarity, packed as `2 * var + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    /// Parses a nonzero signed DIMACS literal.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 || value.unsigned_abs() > u64::from(u32::MAX >> 1) {
            return None;
        }
        Some(Lit::new(Var(value.unsigned_abs() as u32 - 1), value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0) + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// Truth value of the literal under a variable assignment.
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, kept sorted and free of repeated variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// Sorts and deduplicates `lits`. Returns `None` for a tautology.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Self> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause(lits))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    pub fn satisfied_by(&self, assignment: &[Option<bool>]) -> bool {
        self.0
            .iter()
            .any(|l| assignment[l.var().index()].is_some_and(|v| l.eval(v)))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

/// A CNF formula with per-literal weights and the partial assignment produced
/// by conditioning.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCnf {
    clauses: Vec<Clause>,
    weights: Vec<(f64, f64)>,
    assigned: Vec<Option<bool>>,
}

impl Default for WeightedCnf {
    fn default() -> Self {
        Self::new(0)
    }
}

impl WeightedCnf {
    /// `num_vars` variables with weights `(1, 1)` and no clauses.
    pub fn new(num_vars: usize) -> Self {
        WeightedCnf {
            clauses: Vec::new(),
            weights: vec![(1.0, 1.0); num_vars],
            assigned: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.weights.len()
    }

    pub fn new_var(&mut self, pos: f64, neg: f64) -> Var {
        self.weights.push((pos, neg));
        self.assigned.push(None);
        Var(self.weights.len() as u32 - 1)
    }

    pub fn set_weights(&mut self, var: Var, pos: f64, neg: f64) {
        self.weights[var.index()] = (pos, neg);
    }

    /// `(weight(v), weight(!v))`.
    pub fn weights(&self, var: Var) -> (f64, f64) {
        self.weights[var.index()]
    }

    pub fn weight(&self, lit: Lit) -> f64 {
        let (p, n) = self.weights[lit.var().index()];
        if lit.is_positive() {
            p
        } else {
            n
        }
    }

    /// Adds a clause. Tautologies are dropped and reported with `false`.
    /// Panics if a literal refers to a variable out of range.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) -> bool {
        match Clause::new(lits) {
            Some(c) => {
                self.push_clause(c);
                true
            }
            None => false,
        }
    }

    pub fn push_clause(&mut self, clause: Clause) {
        assert!(
            clause.lits().iter().all(|l| l.var().index() < self.num_vars()),
            "clause mentions an unknown variable"
        );
        self.clauses.push(clause);
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        self.assigned[var.index()]
    }

    pub fn assignment(&self) -> &[Option<bool>] {
        &self.assigned
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.num_vars() as u32).map(Var)
    }

    pub fn unassigned_vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars().filter(|v| self.assigned[v.index()].is_none())
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// The clauses sorted and deduplicated, for order-insensitive comparison.
    pub fn canonical_clauses(&self) -> Vec<Clause> {
        let mut c = self.clauses.clone();
        c.sort();
        c.dedup();
        c
    }
}

/// Conditions `f` on `lit`: clauses containing `lit` are dropped, `!lit` is
/// deleted from the rest, and the variable is marked assigned. Conditioning
/// against an earlier assignment of the same variable yields an empty clause.
pub fn residual(f: &WeightedCnf, lit: Lit) -> WeightedCnf {
    let var = lit.var().index();
    let mut out = WeightedCnf {
        clauses: Vec::with_capacity(f.clauses.len()),
        weights: f.weights.clone(),
        assigned: f.assigned.clone(),
    };
    match f.assigned[var] {
        Some(v) if v == lit.is_positive() => {
            out.clauses = f.clauses.clone();
            return out;
        }
        Some(_) => {
            out.clauses = f.clauses.clone();
            out.clauses.push(Clause::default());
            return out;
        }
        None => {}
    }
    out.assigned[var] = Some(lit.is_positive());
    for c in &f.clauses {
        if c.contains(lit) {
            continue;
        }
        if c.contains(!lit) {
            out.clauses
                .push(Clause(c.0.iter().copied().filter(|&l| l != !lit).collect()));
        } else {
            out.clauses.push(c.clone());
        }
    }
    out
}

/// Conditions on every literal in turn.
pub fn residual_all(f: &WeightedCnf, lits: impl IntoIterator<Item = Lit>) -> WeightedCnf {
    lits.into_iter().fold(f.clone(), |acc, l| residual(&acc, l))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    pub formula: WeightedCnf,
    /// Literals forced by unit clauses, in the order they were assigned.
    pub forced: Vec<Lit>,
    pub conflict: bool,
}

/// Repeatedly conditions on the first unit clause until none is left or an
/// empty clause appears. Forced literal weights are not multiplied in; the
/// caller owns that product.
pub fn unit_propagate(f: &WeightedCnf) -> Propagation {
    let mut formula = f.clone();
    let mut forced = Vec::new();
    loop {
        if formula.has_empty_clause() {
            return Propagation {
                formula,
                forced,
                conflict: true,
            };
        }
        let Some(unit) = formula.clauses.iter().find(|c| c.len() == 1) else {
            return Propagation {
                formula,
                forced,
                conflict: false,
            };
        };
        let lit = unit.0[0];
        forced.push(lit);
        formula = residual(&formula, lit);
    }
}

/// Sum over all total assignments of the unassigned variables that satisfy
/// `f`, of the product of literal weights.
///
/// Variables are enumerated in index order; a branch is abandoned as soon as
/// a clause whose variables are all assigned is falsified. Errors when more
/// than `cap` variables are unassigned.
pub fn brute_force_weight(f: &WeightedCnf, cap: usize) -> Result<f64> {
    let free: Vec<Var> = f.unassigned_vars().collect();
    if free.len() > cap {
        return Err(Error::CapExceeded {
            what: "unassigned variable count",
            size: free.len() as u128,
            cap: cap as u128,
        });
    }
    if f.has_empty_clause() {
        return Ok(0.0);
    }
    let mut depth_of = vec![usize::MAX; f.num_vars()];
    for (d, v) in free.iter().enumerate() {
        depth_of[v.index()] = d;
    }
    // Clauses checked once their deepest variable is assigned.
    let mut checks: Vec<Vec<&[Lit]>> = vec![Vec::new(); free.len()];
    for c in &f.clauses {
        if c.satisfied_by(&f.assigned) {
            continue;
        }
        let open: Vec<usize> = c
            .lits()
            .iter()
            .filter(|l| f.assigned[l.var().index()].is_none())
            .map(|l| depth_of[l.var().index()])
            .collect();
        match open.iter().max() {
            Some(&d) => checks[d].push(c.lits()),
            None => return Ok(0.0),
        }
    }
    let mut values = f.assigned.clone();
    Ok(enumerate(f, &free, &checks, &mut values, 0))
}

fn enumerate(
    f: &WeightedCnf,
    free: &[Var],
    checks: &[Vec<&[Lit]>],
    values: &mut [Option<bool>],
    depth: usize,
) -> f64 {
    if depth == free.len() {
        return 1.0;
    }
    let var = free[depth];
    let mut total = 0.0;
    for value in [true, false] {
        values[var.index()] = Some(value);
        let ok = checks[depth].iter().all(|lits| {
            lits.iter()
                .any(|l| values[l.var().index()].is_some_and(|v| l.eval(v)))
        });
        if ok {
            total += f.weight(Lit::new(var, value)) * enumerate(f, free, checks, values, depth + 1);
        }
    }
    values[var.index()] = None;
    total
}

/// One at-least-one clause followed by every pairwise at-most-one clause.
pub fn exactly_one_clauses(vars: &[Var]) -> Vec<Clause> {
    let mut out = vec![Clause::new(vars.iter().map(|v| v.pos())).expect("distinct variables")];
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i + 1..] {
            out.push(Clause::new([a.neg(), b.neg()]).expect("distinct variables"));
        }
    }
    out
}

/// Adds the unit clause `!l` for every unassigned literal `l` of weight
/// exactly zero. Models containing such a literal weigh nothing, so the
/// weighted count is unchanged.
pub fn zero_weight_simplify(f: &WeightedCnf) -> WeightedCnf {
    let mut out = f.clone();
    for v in f.unassigned_vars() {
        let (p, n) = f.weights(v);
        if p == 0.0 {
            out.push_clause(Clause(vec![v.neg()]));
        }
        if n == 0.0 {
            out.push_clause(Clause(vec![v.pos()]));
        }
    }
    out
}

/// Parses the weighted DIMACS dialect: a `p wcnf <vars> <clauses>` header,
/// `w <var> <pos> <neg>` weight lines, `c` comments and 0-terminated clauses.
pub fn parse_wdimacs(text: &str) -> Result<WeightedCnf> {
    let mut cnf: Option<WeightedCnf> = None;
    let mut expected = 0usize;
    let mut pending: Vec<Lit> = Vec::new();
    let mut pending_line = 0;
    let mut seen = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let mut words = line.split_whitespace();
        let Some(first) = words.next() else {
            continue;
        };
        match first {
            "c" | "%" => continue,
            "p" => {
                if cnf.is_some() {
                    return Err(Error::syntax(line_no, "duplicate header"));
                }
                let rest: Vec<&str> = words.collect();
                let [kind, vars, clauses] = rest[..] else {
                    return Err(Error::syntax(line_no, "expected `p wcnf <vars> <clauses>`"));
                };
                if kind != "wcnf" {
                    return Err(Error::syntax(line_no, format!("unsupported format `{kind}`")));
                }
                let vars = parse_num::<usize>(vars, line_no)?;
                expected = parse_num(clauses, line_no)?;
                cnf = Some(WeightedCnf::new(vars));
            }
            "w" => {
                let f = cnf
                    .as_mut()
                    .ok_or_else(|| Error::syntax(line_no, "weight line before header"))?;
                let rest: Vec<&str> = words.collect();
                let [v, p, n] = rest[..] else {
                    return Err(Error::syntax(line_no, "expected `w <var> <pos> <neg>`"));
                };
                let v = parse_num::<usize>(v, line_no)?;
                if v == 0 || v > f.num_vars() {
                    return Err(Error::syntax(line_no, format!("variable {v} out of range")));
                }
                let (p, n) = (parse_num::<f64>(p, line_no)?, parse_num::<f64>(n, line_no)?);
                f.set_weights(Var(v as u32 - 1), p, n);
            }
            _ => {
                let f = cnf
                    .as_mut()
                    .ok_or_else(|| Error::syntax(line_no, "clause before header"))?;
                for word in std::iter::once(first).chain(words) {
                    let value = parse_num::<i64>(word, line_no)?;
                    if pending.is_empty() {
                        pending_line = line_no;
                    }
                    if value == 0 {
                        seen += 1;
                        if let Some(c) = Clause::new(std::mem::take(&mut pending)) {
                            f.push_clause(c);
                        }
                        continue;
                    }
                    let lit = Lit::from_dimacs(value)
                        .filter(|l| l.var().index() < f.num_vars())
                        .ok_or_else(|| {
                            Error::syntax(line_no, format!("literal {value} out of range"))
                        })?;
                    pending.push(lit);
                }
            }
        }
    }
    let f = cnf.ok_or_else(|| Error::syntax(1, "missing `p wcnf` header"))?;
    if !pending.is_empty() {
        return Err(Error::syntax(pending_line, "clause not terminated by 0"));
    }
    if seen != expected {
        return Err(Error::syntax(
            text.lines().count().max(1),
            format!("header declares {expected} clauses, found {seen}"),
        ));
    }
    Ok(f)
}

fn parse_num<T: std::str::FromStr>(word: &str, line: usize) -> Result<T> {
    word.parse()
        .map_err(|_| Error::syntax(line, format!("bad number `{word}`")))
}

/// Writes `f` in the dialect read by [`parse_wdimacs`]. Assigned variables
/// become unit clauses; weight lines are emitted only for non-default
/// weights, with 17 significant digits.
pub fn emit_wdimacs(f: &WeightedCnf) -> String {
    let units: Vec<Lit> = f
        .vars()
        .filter_map(|v| f.value(v).map(|b| Lit::new(v, b)))
        .collect();
    let mut out = String::new();
    writeln!(out, "p wcnf {} {}", f.num_vars(), f.clauses.len() + units.len()).unwrap();
    for v in f.vars() {
        let (p, n) = f.weights(v);
        if (p, n) != (1.0, 1.0) {
            writeln!(out, "w {v} {p:.16e} {n:.16e}").unwrap();
        }
    }
    for c in &f.clauses {
        writeln!(out, "{c}").unwrap();
    }
    for l in units {
        writeln!(out, "{l} 0").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lits(dimacs: &[i64]) -> Vec<Lit> {
        dimacs.iter().map(|&d| Lit::from_dimacs(d).unwrap()).collect()
    }

    fn formula(n: usize, clauses: &[&[i64]]) -> WeightedCnf {
        let mut f = WeightedCnf::new(n);
        for c in clauses {
            assert!(f.add_clause(lits(c)));
        }
        f
    }

    fn clause(d: &[i64]) -> Clause {
        Clause::new(lits(d)).unwrap()
    }

    // u=1 v=2 w=3 x=4 y=5 z=6
    fn running_example() -> WeightedCnf {
        formula(
            6,
            &[&[4, -5], &[4, 5, 6], &[5, -6, 3], &[-3, -6, 2], &[-2, 1]],
        )
    }

    #[test]
    fn residual_on_x_false() {
        let r = residual(&running_example(), Lit::from_dimacs(-4).unwrap());
        let expect = [clause(&[-5]), clause(&[5, 6]), clause(&[5, -6, 3]), clause(&[-3, -6, 2]), clause(&[-2, 1])];
        assert_eq!(r.clauses(), &expect);
        assert_eq!(r.value(Var(3)), Some(false));
    }

    #[test]
    fn residual_on_absent_var_keeps_clauses() {
        let f = formula(3, &[&[1, 2]]);
        let r = residual(&f, Var(2).pos());
        assert_eq!(r.clauses(), f.clauses());
    }

    #[test]
    fn conditioning_both_polarities_gives_empty_clause() {
        let f = formula(1, &[&[1]]);
        let r = residual(&f, Var(0).neg());
        assert!(r.has_empty_clause());
        let r = residual(&residual(&f, Var(0).pos()), Var(0).neg());
        assert!(r.has_empty_clause());
    }

    #[test]
    fn propagation_chain() {
        let r = residual(&running_example(), Lit::from_dimacs(-4).unwrap());
        let p = unit_propagate(&r);
        assert!(!p.conflict);
        assert_eq!(p.forced, lits(&[-5, 6, 3, 2, 1]));
        assert!(p.formula.clauses().is_empty());
    }

    #[test]
    fn propagation_edge_cases() {
        let f = formula(2, &[&[1, 2]]);
        let p = unit_propagate(&f);
        assert!(p.forced.is_empty() && !p.conflict);
        assert_eq!(p.formula, f);
        let p = unit_propagate(&formula(1, &[&[1], &[-1]]));
        assert!(p.conflict);
    }

    #[test]
    fn brute_force_small_cases() {
        assert_eq!(brute_force_weight(&WeightedCnf::new(0), DEFAULT_VAR_CAP).unwrap(), 1.0);
        let mut f = formula(1, &[&[1]]);
        f.set_weights(Var(0), 0.2, 0.8);
        assert_eq!(brute_force_weight(&f, DEFAULT_VAR_CAP).unwrap(), 0.2);
        let mut g = WeightedCnf::new(2);
        g.set_weights(Var(1), -1.0, 2.0);
        assert_eq!(brute_force_weight(&g, DEFAULT_VAR_CAP).unwrap(), 2.0);
        assert!(matches!(
            brute_force_weight(&WeightedCnf::new(26), DEFAULT_VAR_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn exactly_one_sizes() {
        assert_eq!(exactly_one_clauses(&[Var(0)]), vec![clause(&[1])]);
        assert_eq!(exactly_one_clauses(&[Var(0), Var(1)]).len(), 2);
        let three = exactly_one_clauses(&[Var(0), Var(1), Var(2)]);
        assert_eq!(three, vec![clause(&[1, 2, 3]), clause(&[-1, -2]), clause(&[-1, -3]), clause(&[-2, -3])]);
    }

    #[test]
    fn zero_weights_become_units() {
        // Y' = 1, Y = 2, u = 3, w = 4
        let mut f = formula(4, &[&[-1, 2], &[-1, -2, 3], &[1, -2, 4]]);
        f.set_weights(Var(2), 1.0, 0.0);
        f.set_weights(Var(3), -1.0, 2.0);
        let g = zero_weight_simplify(&f);
        assert_eq!(g.clauses().last(), Some(&clause(&[3])));
        assert_eq!(g.clauses().len(), 4);
        let a = brute_force_weight(&f, DEFAULT_VAR_CAP).unwrap();
        let b = brute_force_weight(&g, DEFAULT_VAR_CAP).unwrap();
        assert_eq!(a, b);
        let plain = formula(2, &[&[1, 2]]);
        assert_eq!(zero_weight_simplify(&plain), plain);
    }

    #[test]
    fn wdimacs_single_clause() {
        let f = parse_wdimacs("p wcnf 1 1\nw 1 0.2 0.8\n1 0\n").unwrap();
        assert_eq!(f.clauses(), &[clause(&[1])]);
        assert_eq!(f.weights(Var(0)), (0.2, 0.8));
        let g = parse_wdimacs("c defaults\np wcnf 2 1\n1 -2 0\n").unwrap();
        assert_eq!(g.weights(Var(1)), (1.0, 1.0));
    }

    #[test]
    fn wdimacs_errors() {
        for (text, line) in [
            ("p wcnf 2 1\n1 3 0\n", 2),
            ("p cnf 2 1\n1 0\n", 1),
            ("p wcnf 2 1\nw 1 x 1\n1 0\n", 2),
            ("1 0\n", 1),
            ("p wcnf 2 2\n1 0\n", 2),
            ("p wcnf 2 1\n1 2\n", 2),
        ] {
            match parse_wdimacs(text) {
                Err(Error::Syntax { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn wdimacs_round_trip_with_negative_weights() {
        let mut f = formula(4, &[&[-1, 2], &[-1, -2, 3], &[1, -2, 4]]);
        f.set_weights(Var(2), 1.0, 0.0);
        f.set_weights(Var(3), -1.0, 2.0);
        f.set_weights(Var(0), 0.1 + 0.2, 1e-300);
        let text = emit_wdimacs(&f);
        let g = parse_wdimacs(&text).unwrap();
        assert_eq!(g, f);
        assert_eq!(emit_wdimacs(&g), text);
    }

    fn arb_formula() -> impl Strategy<Value = WeightedCnf> {
        (1usize..9).prop_flat_map(|n| {
            let lit = (0..n as u32, any::<bool>()).prop_map(|(v, p)| Lit::new(Var(v), p));
            let clauses = prop::collection::vec(prop::collection::vec(lit, 1..4), 0..10);
            let weights = prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n);
            (clauses, weights).prop_map(move |(cs, ws)| {
                let mut f = WeightedCnf::new(n);
                for c in cs {
                    f.add_clause(c);
                }
                for (i, (p, q)) in ws.into_iter().enumerate() {
                    f.set_weights(Var(i as u32), p, q);
                }
                f
            })
        })
    }

    proptest! {
        #[test]
        fn residuals_commute(f in arb_formula(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>(), pa: bool, pb: bool) {
            let n = f.num_vars();
            let (va, vb) = (a.index(n), b.index(n));
            prop_assume!(va != vb);
            let la = Lit::new(Var(va as u32), pa);
            let lb = Lit::new(Var(vb as u32), pb);
            let x = residual(&residual(&f, la), lb);
            let y = residual(&residual(&f, lb), la);
            prop_assert_eq!(x.canonical_clauses(), y.canonical_clauses());
            prop_assert_eq!(x.assignment(), y.assignment());
        }

        #[test]
        fn shannon_expansion(f in arb_formula(), a in any::<prop::sample::Index>()) {
            let v = Var(a.index(f.num_vars()) as u32);
            let whole = brute_force_weight(&f, DEFAULT_VAR_CAP).unwrap();
            let split = f.weight(v.pos()) * brute_force_weight(&residual(&f, v.pos()), DEFAULT_VAR_CAP).unwrap()
                + f.weight(v.neg()) * brute_force_weight(&residual(&f, v.neg()), DEFAULT_VAR_CAP).unwrap();
            prop_assert!((whole - split).abs() <= 1e-9 * (1.0 + whole.abs()));
        }

        #[test]
        fn zero_weight_simplify_preserves_weight(mut f in arb_formula(), zeros in prop::collection::vec((any::<prop::sample::Index>(), any::<bool>()), 0..3)) {
            for (i, pos) in zeros {
                let v = Var(i.index(f.num_vars()) as u32);
                let (p, n) = f.weights(v);
                if pos { f.set_weights(v, 0.0, n) } else { f.set_weights(v, p, 0.0) }
            }
            let a = brute_force_weight(&f, DEFAULT_VAR_CAP).unwrap();
            let b = brute_force_weight(&zero_weight_simplify(&f), DEFAULT_VAR_CAP).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn propagation_preserves_weight_with_forced_product(f in arb_formula()) {
            let p = unit_propagate(&f);
            let before = brute_force_weight(&f, DEFAULT_VAR_CAP).unwrap();
            let after = if p.conflict {
                0.0
            } else {
                p.forced.iter().map(|&l| f.weight(l)).product::<f64>()
                    * brute_force_weight(&p.formula, DEFAULT_VAR_CAP).unwrap()
            };
            prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before.abs()));
        }
    }
}
