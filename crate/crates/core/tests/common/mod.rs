//! Test-side oracles and generators, written against the definitions
//! directly rather than through the engine.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BTreeSet;

use odengine::{AttrSet, Attribute, ConstraintSet, Dependency, MarkedList, TableInstance};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

pub fn universe(n: usize) -> Vec<Attribute> {
    names(n).into_iter().map(Attribute::new).collect()
}

/// A random list over `attrs` of length `0..=max_len`, repeats allowed.
pub fn list(rng: &mut ChaCha8Rng, attrs: &[Attribute], max_len: usize) -> MarkedList {
    let n = rng.gen_range(0..=max_len);
    MarkedList::new((0..n).map(|_| attrs.choose(rng).unwrap().clone()).collect())
}

pub fn set(rng: &mut ChaCha8Rng, attrs: &[Attribute], max_len: usize) -> AttrSet {
    list(rng, attrs, max_len).to_set()
}

pub fn dependency(rng: &mut ChaCha8Rng, attrs: &[Attribute], max_len: usize) -> Dependency {
    let (x, y) = (list(rng, attrs, max_len), list(rng, attrs, max_len));
    match rng.gen_range(0..10) {
        0..=4 => Dependency::od(x, y),
        5 | 6 => Dependency::compat(x, y),
        7 => Dependency::equiv(x, y),
        8 => Dependency::fd(x.to_set(), y.to_set()),
        _ => Dependency::constant(attrs.choose(rng).unwrap().clone()),
    }
}

pub fn constraint_set(rng: &mut ChaCha8Rng, attrs: &[Attribute], max_deps: usize, max_len: usize) -> ConstraintSet {
    let k = rng.gen_range(0..=max_deps);
    ConstraintSet::new((0..k).map(|_| dependency(rng, attrs, max_len))).with_attributes(attrs.iter().cloned())
}

/// A table as column names plus integer rows.
#[derive(Clone, Debug)]
pub struct Ints {
    pub cols: Vec<Attribute>,
    pub rows: Vec<Vec<i64>>,
}

impl Ints {
    pub fn to_table(&self) -> TableInstance {
        let cols: Vec<&str> = self.cols.iter().map(Attribute::name).collect();
        TableInstance::from_ints(&cols, &self.rows).unwrap()
    }
}

/// Lexicographic comparison of two rows on the given column indices.
pub fn lex(s: &[i64], t: &[i64], idx: &[usize]) -> Ordering {
    for &i in idx {
        match s[i].cmp(&t[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn od_on(s: &[i64], t: &[i64], x: &[usize], y: &[usize]) -> bool {
    // s ≤ t on X must give s ≤ t on Y, in both directions
    let ok = |a: &[i64], b: &[i64]| lex(a, b, x) == Ordering::Greater || lex(a, b, y) != Ordering::Greater;
    ok(s, t) && ok(t, s)
}

/// A dependency resolved to column indices of a table.
pub enum Check {
    Od(Vec<usize>, Vec<usize>),
    Both(Vec<usize>, Vec<usize>),
    Fd(Vec<usize>, Vec<usize>),
}

pub fn compile(cols: &[Attribute], d: &Dependency) -> Check {
    let idx = |l: &MarkedList| -> Vec<usize> {
        l.iter().map(|a| cols.iter().position(|c| c == a).expect("attribute in table")).collect()
    };
    match d {
        Dependency::OrderDep { lhs, rhs } => Check::Od(idx(lhs), idx(rhs)),
        Dependency::OrderEquiv { lhs, rhs } => Check::Both(idx(lhs), idx(rhs)),
        Dependency::OrderCompat { lhs, rhs } => Check::Both(idx(&lhs.concat(rhs)), idx(&rhs.concat(lhs))),
        Dependency::FuncDep { lhs, rhs } => Check::Fd(idx(&lhs.to_list()), idx(&rhs.to_list())),
        Dependency::Constant(a) => Check::Fd(vec![], idx(&MarkedList::single(a.clone()))),
    }
}

impl Check {
    pub fn on_pair(&self, s: &[i64], u: &[i64]) -> bool {
        match self {
            Check::Od(x, y) => od_on(s, u, x, y),
            Check::Both(x, y) => od_on(s, u, x, y) && od_on(s, u, y, x),
            Check::Fd(x, y) => lex(s, u, x) != Ordering::Equal || lex(s, u, y) == Ordering::Equal,
        }
    }

    pub fn on(&self, t: &Ints) -> bool {
        t.rows.iter().enumerate().all(|(i, s)| t.rows[i + 1..].iter().all(|u| self.on_pair(s, u)))
    }
}

pub fn holds(t: &Ints, d: &Dependency) -> bool {
    compile(&t.cols, d).on(t)
}

/// A random table over `cols` satisfying `m`, built by adding random rows
/// that keep every dependency satisfied.
pub fn satisfying_table(rng: &mut ChaCha8Rng, cols: &[Attribute], m: &[Check], max_rows: usize, max_value: i64) -> Ints {
    let mut t = Ints { cols: cols.to_vec(), rows: Vec::new() };
    let target = rng.gen_range(1..=max_rows);
    let mut attempts = 0;
    while t.rows.len() < target && attempts < 4 * max_rows {
        attempts += 1;
        let row: Vec<i64> = (0..cols.len()).map(|_| rng.gen_range(0..=max_value)).collect();
        if m.iter().all(|c| t.rows.iter().all(|s| c.on_pair(s, &row))) {
            t.rows.push(row);
        }
    }
    t
}

/// Attribute-closure oracle for functional dependencies.
pub fn fd_closure(fds: &[(BTreeSet<Attribute>, BTreeSet<Attribute>)], start: &BTreeSet<Attribute>) -> BTreeSet<Attribute> {
    let mut c = start.clone();
    loop {
        let before = c.len();
        for (l, r) in fds {
            if l.is_subset(&c) {
                c.extend(r.iter().cloned());
            }
        }
        if c.len() == before {
            return c;
        }
    }
}

/// Every canonical (duplicate-free) list over `attrs` of length at most `max_len`.
pub fn all_canonical_lists(attrs: &[Attribute], max_len: usize) -> Vec<MarkedList> {
    let mut out = vec![MarkedList::empty()];
    let mut frontier = vec![Vec::<Attribute>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for l in &frontier {
            for a in attrs {
                if !l.contains(a) {
                    let mut m = l.clone();
                    m.push(a.clone());
                    out.push(MarkedList::new(m.clone()));
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    out
}
