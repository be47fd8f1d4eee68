//! Shared helpers for the integration tests: seeded random generators and a
//! brute-force lasso oracle that does not share code with the checker.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use patgen::{Formula, LassoModel, PatternLibrary, PropExpr, WorkflowNode};
use rand::seq::SliceRandom;
use rand::Rng;

pub const SAMPLE_P: &str = include_str!("../data/sample_p.txt");

pub fn f(s: &str) -> Formula {
    patgen::parse_formula(s).unwrap()
}

pub fn w(s: &str) -> WorkflowNode {
    patgen::parse_workflow(s).unwrap()
}

pub fn set(fs: impl IntoIterator<Item = Formula>) -> BTreeSet<Formula> {
    fs.into_iter().collect()
}

pub fn random_formula(rng: &mut impl Rng, depth: usize, atoms: &[&str]) -> Formula {
    if depth <= 1 || rng.gen_ratio(1, 4) {
        return Formula::atom(*atoms.choose(rng).unwrap());
    }
    let sub = |rng: &mut _| random_formula(rng, depth - 1, atoms);
    match rng.gen_range(0..6) {
        0 => Formula::not(sub(rng)),
        1 => Formula::eventually(sub(rng)),
        2 => Formula::always(sub(rng)),
        3 => Formula::and(sub(rng), sub(rng)),
        4 => Formula::or(sub(rng), sub(rng)),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

pub fn random_lasso(rng: &mut impl Rng, atoms: &[&str], max_prefix: usize, max_loop: usize) -> LassoModel {
    let state = |rng: &mut _| -> BTreeSet<String> {
        atoms
            .iter()
            .filter(|_| Rng::gen_bool(rng, 0.5))
            .map(|a| a.to_string())
            .collect()
    };
    let p = rng.gen_range(0..=max_prefix);
    let l = rng.gen_range(1..=max_loop);
    let prefix = (0..p).map(|_| state(rng)).collect();
    let cycle = (0..l).map(|_| state(rng)).collect();
    LassoModel::new(prefix, cycle)
}

/// A random expression over `lib` with pairwise distinct activity names,
/// at most `max_depth` levels and at most `max_atoms` activities.
pub fn random_workflow(
    rng: &mut impl Rng,
    lib: &PatternLibrary,
    max_depth: usize,
    max_atoms: usize,
) -> WorkflowNode {
    loop {
        let mut next = 0;
        let node = grow(rng, lib, max_depth, &mut next);
        if next <= max_atoms {
            return node;
        }
    }
}

fn grow(rng: &mut impl Rng, lib: &PatternLibrary, depth: usize, next: &mut usize) -> WorkflowNode {
    let defs: Vec<_> = lib.iter().collect();
    let def = defs.choose(rng).unwrap();
    let args = (0..def.arity())
        .map(|_| {
            if depth > 1 && rng.gen_ratio(1, 3) {
                grow(rng, lib, depth - 1, next)
            } else {
                *next += 1;
                WorkflowNode::atomic(format!("a{}", *next - 1))
            }
        })
        .collect();
    WorkflowNode::app(def.name(), args)
}

// Brute-force oracle over explicit lassos. States are bit masks over
// `atoms`; positions are evaluated on the unrolled infinite word.

pub struct Oracle {
    pub atoms: Vec<String>,
    /// Every lasso with `|prefix| + |loop| <= max_len`.
    pub lassos: Vec<(Vec<u32>, Vec<u32>)>,
}

impl Oracle {
    pub fn new(atoms: &[&str], max_len: usize) -> Self {
        let n = atoms.len() as u32;
        let states = 1u32 << n;
        let mut lassos = Vec::new();
        for total in 1..=max_len {
            for p in 0..total {
                let l = total - p;
                let count = (states as u64).pow(total as u32);
                for code in 0..count {
                    let mut c = code;
                    let mut word = Vec::with_capacity(total);
                    for _ in 0..total {
                        word.push((c % states as u64) as u32);
                        c /= states as u64;
                    }
                    let cycle = word.split_off(p);
                    debug_assert_eq!(cycle.len(), l);
                    lassos.push((word, cycle));
                }
            }
        }
        Oracle {
            atoms: atoms.iter().map(|s| s.to_string()).collect(),
            lassos,
        }
    }

    fn holds(&self, f: &Formula, prefix: &[u32], cycle: &[u32], i: usize) -> bool {
        let state = |j: usize| {
            if j < prefix.len() {
                prefix[j]
            } else {
                cycle[(j - prefix.len()) % cycle.len()]
            }
        };
        // Positions i.. up to one full loop past both i and the prefix.
        let horizon = i.max(prefix.len()) + cycle.len();
        match f {
            Formula::Atom(a) => {
                let bit = self.atoms.iter().position(|x| x == a).expect("atom in universe");
                state(i) >> bit & 1 == 1
            }
            Formula::Not(g) => !self.holds(g, prefix, cycle, i),
            Formula::And(l, r) => self.holds(l, prefix, cycle, i) && self.holds(r, prefix, cycle, i),
            Formula::Or(l, r) => self.holds(l, prefix, cycle, i) || self.holds(r, prefix, cycle, i),
            Formula::Implies(l, r) => !self.holds(l, prefix, cycle, i) || self.holds(r, prefix, cycle, i),
            Formula::Eventually(g) => (i..horizon).any(|j| self.holds(g, prefix, cycle, j)),
            Formula::Always(g) => (i..horizon).all(|j| self.holds(g, prefix, cycle, j)),
        }
    }

    /// One bit per lasso: does `f` hold at position 0?
    pub fn truth_table(&self, f: &Formula) -> Vec<u64> {
        let mut bits = vec![0u64; self.lassos.len().div_ceil(64)];
        for (k, (p, c)) in self.lassos.iter().enumerate() {
            if self.holds(f, p, c, 0) {
                bits[k / 64] |= 1 << (k % 64);
            }
        }
        bits
    }

    pub fn satisfiable(&self, fs: &[&Formula]) -> bool {
        self.lassos
            .iter()
            .any(|(p, c)| fs.iter().all(|f| self.holds(f, p, c, 0)))
    }

    /// Explicit-lasso evaluation through the public model type.
    pub fn holds_on(&self, f: &Formula, m: &LassoModel, i: usize) -> bool {
        let mask = |s: &BTreeSet<String>| {
            s.iter()
                .map(|a| 1u32 << self.atoms.iter().position(|x| x == a).unwrap())
                .sum::<u32>()
        };
        let prefix: Vec<u32> = m.prefix.iter().map(mask).collect();
        let cycle: Vec<u32> = m.cycle.iter().map(mask).collect();
        self.holds(f, &prefix, &cycle, i)
    }
}

/// The template pool for checker/oracle agreement: every pattern of `lib`
/// instantiated with every assignment of `atoms` to its formals, keeping
/// the deduplicated consistency obligations of each instance.
pub fn template_instances(lib: &PatternLibrary, atoms: &[&str]) -> Vec<Vec<Formula>> {
    let mut out = Vec::new();
    for def in lib.iter() {
        let k = def.arity();
        let total = atoms.len().pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let binding: BTreeMap<String, PropExpr> = def
                .formal_args()
                .iter()
                .map(|formal| {
                    let a = atoms[c % atoms.len()];
                    c /= atoms.len();
                    (formal.clone(), PropExpr::atom(a))
                })
                .collect();
            let mut fs: Vec<Formula> = Vec::new();
            for g in def.consistency_obligations() {
                let g = g.substitute(&binding);
                if !fs.contains(&g) {
                    fs.push(g);
                }
            }
            out.push(fs);
        }
    }
    out
}

/// Non-empty subsets of `items` with at most `max` elements.
pub fn subsets<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let n = items.len();
    (1u32..1 << n)
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| items[i].clone()).collect())
        .collect()
}

/// Formula sets over at most two atoms built from the library templates:
/// every non-empty subset (size <= 6) of each instance's obligations, and
/// every pair of distinct formulas from the pooled instances.
pub fn template_family(lib: &PatternLibrary) -> Vec<Vec<Formula>> {
    let instances = template_instances(lib, &["a", "b"]);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |s: Vec<Formula>| {
        let key: BTreeSet<Formula> = s.iter().cloned().collect();
        if seen.insert(key) {
            out.push(s);
        }
    };
    let mut pool: Vec<Formula> = Vec::new();
    for inst in &instances {
        for s in subsets(inst, 6) {
            push(s);
        }
        for g in inst {
            if !pool.contains(g) {
                pool.push(g.clone());
            }
        }
    }
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            push(vec![pool[i].clone(), pool[j].clone()]);
        }
    }
    out
}

pub struct Agreement {
    pub sets: usize,
    pub sat: usize,
    pub disagreements: Vec<String>,
}

/// Runs `check_sat` at the default bounds on every set of
/// [`template_family`] and compares against the length-6 lasso oracle.
/// An `Unknown` verdict counts as a disagreement.
pub fn oracle_agreement(lib: &PatternLibrary) -> Agreement {
    let family = template_family(lib);
    let oracle = Oracle::new(&["a", "b"], 6);
    let mut tables: BTreeMap<Formula, Vec<u64>> = BTreeMap::new();
    for s in &family {
        for g in s {
            if !tables.contains_key(g) {
                tables.insert(g.clone(), oracle.truth_table(g));
            }
        }
    }
    let mut sat = 0;
    let mut disagreements = Vec::new();
    for s in &family {
        let expected = {
            let mut acc = vec![u64::MAX; oracle.lassos.len().div_ceil(64)];
            for g in s {
                for (x, y) in acc.iter_mut().zip(&tables[g]) {
                    *x &= y;
                }
            }
            let spare = acc.len() * 64 - oracle.lassos.len();
            if let Some(last) = acc.last_mut() {
                *last &= u64::MAX >> spare;
            }
            acc.iter().any(|x| *x != 0)
        };
        let got = patgen::check_sat(s, patgen::Bounds::default());
        let agrees = match &got {
            Ok(patgen::CheckResult::Satisfiable { witness }) => {
                expected && s.iter().all(|g| oracle.holds_on(g, witness, 0))
            }
            Ok(patgen::CheckResult::Unsatisfiable { .. }) => !expected,
            _ => false,
        };
        sat += expected as usize;
        if !agrees {
            let text: Vec<String> = s.iter().map(|g| g.to_string()).collect();
            disagreements.push(format!("{{{}}}: oracle {}, checker {:?}", text.join(", "), expected, got));
        }
    }
    Agreement {
        sets: family.len(),
        sat,
        disagreements,
    }
}
