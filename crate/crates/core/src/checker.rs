//! Bounded satisfiability for finite sets of ◇/□ formulas.
//!
//! Models are lassos: a finite prefix of states followed by a non-empty loop
//! repeated forever. A set is satisfied by a lasso when every formula holds
//! at position 0. Both temporal operators are reflexive.
//!
//! The search does not enumerate prefixes. In this fragment the truth of
//! every subformula at position `i` is a function of the state at `i` and
//! the truth of the temporal subformulas at `i + 1`. Call that vector of
//! temporal truth values the context. On the loop the context is constant,
//! and each prefix state maps the context after it to the context at it. So
//! for a fixed loop, the contexts reachable by prepending `j` states form a
//! layer, and prefix search is a walk over layers. Once the union of layers
//! stops growing, longer prefixes add nothing; that is when a loop is fully
//! explored. A loop only matters through its first state and its set of
//! states, so covering every set needs loops up to `2^n` states for `n`
//! atoms.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::formula::Formula;
use crate::generator::Specification;
use crate::library::PatternDefinition;

pub type State = BTreeSet<String>;

/// An ultimately periodic model: `prefix` once, then `cycle` forever.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LassoModel {
    pub prefix: Vec<State>,
    #[serde(rename = "loop")]
    pub cycle: Vec<State>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("position {pos} is outside the lasso (length {len})")]
    OutOfRange { pos: usize, len: usize },
}

impl LassoModel {
    /// Panics if `cycle` is empty.
    pub fn new(prefix: Vec<State>, cycle: Vec<State>) -> Self {
        assert!(!cycle.is_empty(), "lasso loop must be non-empty");
        LassoModel { prefix, cycle }
    }

    /// The model where every atom is false at every instant.
    pub fn all_false() -> Self {
        LassoModel::new(Vec::new(), vec![State::new()])
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn state(&self, i: usize) -> Option<&State> {
        if i < self.prefix.len() {
            self.prefix.get(i)
        } else {
            self.cycle.get(i - self.prefix.len())
        }
    }

    /// Same infinite word with one copy of the loop moved into the prefix.
    pub fn unroll_once(&self) -> Self {
        let mut prefix = self.prefix.clone();
        prefix.extend(self.cycle.iter().cloned());
        LassoModel::new(prefix, self.cycle.clone())
    }

    /// Truth of `f` at every position of the finite quotient.
    fn truth(&self, f: &Formula) -> Vec<bool> {
        let n = self.len();
        let p = self.prefix.len();
        match f {
            Formula::Atom(a) => (0..n).map(|i| self.state(i).unwrap().contains(a)).collect(),
            Formula::Not(g) => self.truth(g).into_iter().map(|v| !v).collect(),
            Formula::And(l, r) => zip_with(self.truth(l), self.truth(r), |a, b| a && b),
            Formula::Or(l, r) => zip_with(self.truth(l), self.truth(r), |a, b| a || b),
            Formula::Implies(l, r) => zip_with(self.truth(l), self.truth(r), |a, b| !a || b),
            Formula::Eventually(g) | Formula::Always(g) => {
                let g = self.truth(g);
                let existential = matches!(f, Formula::Eventually(_));
                let on_loop = if existential {
                    g[p..].iter().any(|&v| v)
                } else {
                    g[p..].iter().all(|&v| v)
                };
                let mut out = vec![on_loop; n];
                let mut acc = on_loop;
                for i in (0..p).rev() {
                    acc = if existential { g[i] || acc } else { g[i] && acc };
                    out[i] = acc;
                }
                out
            }
        }
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

fn write_state(f: &mut fmt::Formatter<'_>, s: &State) -> fmt::Result {
    f.write_str("{")?;
    for (i, a) in s.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        f.write_str(a)?;
    }
    f.write_str("}")
}

impl fmt::Display for LassoModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("prefix:")?;
        for s in &self.prefix {
            f.write_str(" ")?;
            write_state(f, s)?;
        }
        f.write_str(" | loop:")?;
        for s in &self.cycle {
            f.write_str(" ")?;
            write_state(f, s)?;
        }
        Ok(())
    }
}

/// Truth of `f` at position `i` of `m`. Positions past the prefix index
/// into the loop.
pub fn eval_at(f: &Formula, m: &LassoModel, i: usize) -> Result<bool, EvalError> {
    if i >= m.len() {
        return Err(EvalError::OutOfRange { pos: i, len: m.len() });
    }
    Ok(m.truth(f)[i])
}

/// Limits on the lassos searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub max_prefix: usize,
    pub max_loop: usize,
}

impl Bounds {
    pub const fn new(max_prefix: usize, max_loop: usize) -> Self {
        Bounds { max_prefix, max_loop }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::new(8, 4)
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prefix <= {}, loop <= {}", self.max_prefix, self.max_loop)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum CheckResult {
    Satisfiable { witness: LassoModel },
    /// `exhaustive` is always true; a non-exhaustive miss is `Unknown`.
    Unsatisfiable { exhaustive: bool, bounds: Bounds },
    Unknown { bounds: Bounds },
}

impl CheckResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, CheckResult::Satisfiable { .. })
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, CheckResult::Unsatisfiable { .. })
    }

    pub fn witness(&self) -> Option<&LassoModel> {
        match self {
            CheckResult::Satisfiable { witness } => Some(witness),
            _ => None,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckResult::Satisfiable { witness } => write!(f, "satisfiable\n{witness}"),
            CheckResult::Unsatisfiable { bounds, .. } => {
                write!(f, "unsatisfiable (exhaustive; {bounds})")
            }
            CheckResult::Unknown { bounds } => {
                write!(f, "unknown (no model with {bounds}; search not exhaustive)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CheckError {
    #[error("nothing to check: empty formula set")]
    Empty,
    #[error("{0} atoms exceed the supported universe of 63")]
    TooManyAtoms(usize),
    #[error("search space exceeds the configured ceiling of {0} state evaluations")]
    BoundOverflow(u64),
}

/// Bounded lasso search with a ceiling on the work performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checker {
    pub bounds: Bounds,
    /// Maximum number of single-state evaluations before giving up.
    pub work_limit: u64,
}

impl Default for Checker {
    fn default() -> Self {
        Checker {
            bounds: Bounds::default(),
            work_limit: 20_000_000,
        }
    }
}

impl Checker {
    pub fn new(bounds: Bounds) -> Self {
        Checker {
            bounds,
            ..Checker::default()
        }
    }

    /// Searches lassos in a fixed order: loop length, then loop states, then
    /// prefix length, then prefix states. States compare as bit masks over
    /// the sorted atom universe, first atom lowest. The first model found is
    /// returned.
    pub fn check<'a>(&self, fs: impl IntoIterator<Item = &'a Formula>) -> Result<CheckResult, CheckError> {
        let fs: Vec<&Formula> = fs.into_iter().collect();
        if fs.is_empty() {
            return Err(CheckError::Empty);
        }
        let compiled = Compiled::new(&fs);
        let n = compiled.universe.len();
        if n > 63 {
            return Err(CheckError::TooManyAtoms(n));
        }
        let mut search = Search {
            c: &compiled,
            bounds: self.bounds,
            budget: self.work_limit,
            state_count: 1u64 << n,
            memo: HashMap::new(),
        };
        let found = search.run()?;
        Ok(match found {
            Found::Model(prefix, cycle) => {
                let witness = LassoModel::new(
                    prefix.iter().map(|&s| compiled.state_set(s)).collect(),
                    cycle.iter().map(|&s| compiled.state_set(s)).collect(),
                );
                for f in &fs {
                    assert!(
                        eval_at(f, &witness, 0).unwrap(),
                        "witness {witness} fails to re-verify {f}"
                    );
                }
                CheckResult::Satisfiable { witness }
            }
            Found::Exhausted => CheckResult::Unsatisfiable {
                exhaustive: true,
                bounds: self.bounds,
            },
            Found::NotExhausted => CheckResult::Unknown { bounds: self.bounds },
        })
    }
}

pub fn check_sat<'a>(
    fs: impl IntoIterator<Item = &'a Formula>,
    bounds: Bounds,
) -> Result<CheckResult, CheckError> {
    Checker::new(bounds).check(fs)
}

/// Satisfiability of a pattern's basic and transition formulas.
pub fn check_pattern(def: &PatternDefinition, bounds: Bounds) -> Result<CheckResult, CheckError> {
    check_sat(&def.consistency_obligations(), bounds)
}

pub fn check_specification(spec: &Specification, bounds: Bounds) -> Result<CheckResult, CheckError> {
    check_sat(spec.formulas(), bounds)
}

// Compiled, hash-consed formula graph. Children always precede parents.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Atom(u32),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Eventually { child: usize, slot: usize },
    Always { child: usize, slot: usize },
}

struct Compiled {
    nodes: Vec<Node>,
    roots: Vec<usize>,
    slots: usize,
    universe: Vec<String>,
}

type Ctx = Vec<bool>;

impl Compiled {
    fn new(fs: &[&Formula]) -> Self {
        let universe: Vec<String> = fs
            .iter()
            .flat_map(|f| f.atoms())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut c = Compiled {
            nodes: Vec::new(),
            roots: Vec::new(),
            slots: 0,
            universe,
        };
        let mut index = HashMap::new();
        for f in fs {
            let r = c.add(f, &mut index);
            if !c.roots.contains(&r) {
                c.roots.push(r);
            }
        }
        c
    }

    fn add(&mut self, f: &Formula, index: &mut HashMap<Node, usize>) -> usize {
        let node = match f {
            Formula::Atom(a) => Node::Atom(self.universe.binary_search(a).unwrap() as u32),
            Formula::Not(g) => Node::Not(self.add(g, index)),
            Formula::And(l, r) => Node::And(self.add(l, index), self.add(r, index)),
            Formula::Or(l, r) => Node::Or(self.add(l, index), self.add(r, index)),
            Formula::Implies(l, r) => Node::Implies(self.add(l, index), self.add(r, index)),
            Formula::Eventually(g) => Node::Eventually {
                child: self.add(g, index),
                slot: usize::MAX,
            },
            Formula::Always(g) => Node::Always {
                child: self.add(g, index),
                slot: usize::MAX,
            },
        };
        if let Some(&i) = index.get(&node) {
            return i;
        }
        let key = node;
        let node = match node {
            Node::Eventually { child, .. } => {
                self.slots += 1;
                Node::Eventually { child, slot: self.slots - 1 }
            }
            Node::Always { child, .. } => {
                self.slots += 1;
                Node::Always { child, slot: self.slots - 1 }
            }
            other => other,
        };
        self.nodes.push(node);
        index.insert(key, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn state_set(&self, mask: u64) -> State {
        self.universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect()
    }

    /// Values of all nodes at a position with the given state, where `next`
    /// is the context at the following position.
    fn eval(&self, state: u64, next: &Ctx, vals: &mut Vec<bool>) {
        vals.clear();
        for node in &self.nodes {
            let v = match *node {
                Node::Atom(bit) => state >> bit & 1 == 1,
                Node::Not(g) => !vals[g],
                Node::And(l, r) => vals[l] && vals[r],
                Node::Or(l, r) => vals[l] || vals[r],
                Node::Implies(l, r) => !vals[l] || vals[r],
                Node::Eventually { child, slot } => vals[child] || next[slot],
                Node::Always { child, slot } => vals[child] && next[slot],
            };
            vals.push(v);
        }
    }

    fn context(&self, vals: &[bool]) -> Ctx {
        let mut ctx = vec![false; self.slots];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Eventually { slot, .. } | Node::Always { slot, .. } = *node {
                ctx[slot] = vals[i];
            }
        }
        ctx
    }

    fn roots_hold(&self, vals: &[bool]) -> bool {
        self.roots.iter().all(|&r| vals[r])
    }

    /// Constant loop context and the node values at the first loop state.
    fn loop_values(&self, cycle: &[u64]) -> (Ctx, Vec<bool>) {
        let mut per_state: Vec<Vec<bool>> = vec![Vec::with_capacity(self.nodes.len()); cycle.len()];
        let mut ctx = vec![false; self.slots];
        for node in &self.nodes {
            match *node {
                Node::Eventually { child, slot } | Node::Always { child, slot } => {
                    let existential = matches!(node, Node::Eventually { .. });
                    let v = if existential {
                        per_state.iter().any(|vals| vals[child])
                    } else {
                        per_state.iter().all(|vals| vals[child])
                    };
                    ctx[slot] = v;
                    per_state.iter_mut().for_each(|vals| vals.push(v));
                }
                _ => {
                    for (k, vals) in per_state.iter_mut().enumerate() {
                        let v = match *node {
                            Node::Atom(bit) => cycle[k] >> bit & 1 == 1,
                            Node::Not(g) => !vals[g],
                            Node::And(l, r) => vals[l] && vals[r],
                            Node::Or(l, r) => vals[l] || vals[r],
                            Node::Implies(l, r) => !vals[l] || vals[r],
                            _ => unreachable!(),
                        };
                        vals.push(v);
                    }
                }
            }
        }
        (ctx, per_state.swap_remove(0))
    }
}

enum Found {
    Model(Vec<u64>, Vec<u64>),
    Exhausted,
    NotExhausted,
}

/// Per loop context: the shortest prefix length that works, and whether the
/// reachable contexts saturated within the prefix bound.
#[derive(Clone)]
struct PrefixAnalysis {
    shortest: Option<usize>,
    saturated: bool,
}

struct Search<'c> {
    c: &'c Compiled,
    bounds: Bounds,
    budget: u64,
    state_count: u64,
    memo: HashMap<Ctx, PrefixAnalysis>,
}

impl Search<'_> {
    fn spend(&mut self, n: u64) -> Result<(), CheckError> {
        match self.budget.checked_sub(n) {
            Some(rest) => {
                self.budget = rest;
                Ok(())
            }
            // The caller substitutes the configured limit.
            None => Err(CheckError::BoundOverflow(0)),
        }
    }

    fn run(&mut self) -> Result<Found, CheckError> {
        let limit = self.budget;
        self.search().map_err(|e| match e {
            CheckError::BoundOverflow(_) => CheckError::BoundOverflow(limit),
            other => other,
        })
    }

    fn search(&mut self) -> Result<Found, CheckError> {
        let max_k = (self.bounds.max_loop as u64).min(self.state_count) as usize;
        let mut all_saturated = true;
        let mut vals = Vec::new();
        for k in 1..=max_k {
            for first in 0..self.state_count {
                let rest_pool: Vec<u64> = (0..self.state_count).filter(|&s| s != first).collect();
                let mut combo: Vec<usize> = (0..k - 1).collect();
                loop {
                    let mut cycle = Vec::with_capacity(k);
                    cycle.push(first);
                    cycle.extend(combo.iter().map(|&i| rest_pool[i]));
                    self.spend(k as u64)?;
                    let (ctx, first_vals) = self.c.loop_values(&cycle);
                    if self.c.roots_hold(&first_vals) {
                        return Ok(Found::Model(Vec::new(), cycle));
                    }
                    let analysis = match self.memo.get(&ctx) {
                        Some(a) => a.clone(),
                        None => {
                            let a = self.analyse(&ctx, &mut vals)?;
                            self.memo.insert(ctx.clone(), a.clone());
                            a
                        }
                    };
                    if let Some(p) = analysis.shortest {
                        let prefix = self.lex_first_prefix(&ctx, p, &mut vals)?;
                        return Ok(Found::Model(prefix, cycle));
                    }
                    all_saturated &= analysis.saturated;
                    if !next_combination(&mut combo, rest_pool.len()) {
                        break;
                    }
                }
            }
        }
        let covers_all_loops = self.bounds.max_loop as u64 >= self.state_count;
        Ok(if covers_all_loops && all_saturated {
            Found::Exhausted
        } else {
            Found::NotExhausted
        })
    }

    /// `layers[j]` = contexts reachable by prepending `j` states to the loop.
    fn layers(&mut self, loop_ctx: &Ctx, upto: usize, vals: &mut Vec<bool>) -> Result<Vec<Vec<Ctx>>, CheckError> {
        let mut layers: Vec<Vec<Ctx>> = vec![vec![loop_ctx.clone()]];
        for _ in 0..upto {
            let prev = layers.last().unwrap();
            self.spend(prev.len() as u64 * self.state_count)?;
            let mut next: Vec<Ctx> = Vec::new();
            let mut seen: HashSet<Ctx> = HashSet::new();
            for d in prev {
                for s in 0..self.state_count {
                    self.c.eval(s, d, vals);
                    let ctx = self.c.context(vals);
                    if seen.insert(ctx.clone()) {
                        next.push(ctx);
                    }
                }
            }
            layers.push(next);
        }
        Ok(layers)
    }

    fn analyse(&mut self, loop_ctx: &Ctx, vals: &mut Vec<bool>) -> Result<PrefixAnalysis, CheckError> {
        let max_p = self.bounds.max_prefix;
        let layers = self.layers(loop_ctx, max_p, vals)?;
        let mut shortest = None;
        'outer: for p in 1..=max_p {
            for d in &layers[p - 1] {
                self.spend(self.state_count)?;
                for s in 0..self.state_count {
                    self.c.eval(s, d, vals);
                    if self.c.roots_hold(vals) {
                        shortest = Some(p);
                        break 'outer;
                    }
                }
            }
        }
        let saturated = max_p > 0 && {
            let seen: HashSet<&Ctx> = layers[..max_p].iter().flatten().collect();
            layers[max_p].iter().all(|d| seen.contains(d))
        };
        Ok(PrefixAnalysis { shortest, saturated })
    }

    /// Lexicographically least prefix of length `p` satisfying the roots at
    /// position 0, given that one exists.
    fn lex_first_prefix(&mut self, loop_ctx: &Ctx, p: usize, vals: &mut Vec<bool>) -> Result<Vec<u64>, CheckError> {
        let layers = self.layers(loop_ctx, p - 1, vals)?;
        let mut prefix = Vec::with_capacity(p);

        // Position 0: the roots must hold.
        let mut targets: HashSet<Ctx> = HashSet::new();
        for s in 0..self.state_count {
            for d in &layers[p - 1] {
                self.c.eval(s, d, vals);
                if self.c.roots_hold(vals) {
                    targets.insert(d.clone());
                }
            }
            if !targets.is_empty() {
                prefix.push(s);
                break;
            }
        }
        // Each later position must produce one of the contexts the previous
        // choice needs.
        for i in 1..p {
            let layer = &layers[p - 1 - i];
            let mut next_targets: HashSet<Ctx> = HashSet::new();
            for s in 0..self.state_count {
                for d in layer {
                    self.c.eval(s, d, vals);
                    if targets.contains(&self.c.context(vals)) {
                        next_targets.insert(d.clone());
                    }
                }
                if !next_targets.is_empty() {
                    prefix.push(s);
                    break;
                }
            }
            targets = next_targets;
        }
        debug_assert_eq!(prefix.len(), p);
        Ok(prefix)
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
