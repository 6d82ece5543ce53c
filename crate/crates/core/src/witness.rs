//! Construction of tables that satisfy a constraint set and falsify every
//! order dependency it does not imply.
//!
//! The table is assembled from blocks with [`append`], which keeps blocks
//! from interacting: rows of different blocks compare strictly ascending on
//! every column, so the only statements they can falsify are `[] ↦ X`.
//!
//! - the *split* part has, for every attribute set, two rows that agree
//!   exactly on its functional closure;
//! - the *swap* part has, for every attribute pair and every maximal context
//!   in which the pair must be swapped, either a recursively built table for
//!   the constraints plus that context held constant, or (empty context) a
//!   hand-built two-row swap;
//! - constants are projected out first and put back as a column of zeros;
//! - at most two non-constant attributes are handled by exhaustive search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use crate::decide::{canonical_lists, ModelSet, PairPattern, Rel};
use crate::error::{Error, Result};
use crate::instances::TableInstance;
use crate::model::{AttrSet, Attribute, ConstraintSet, Dependency, MarkedList, Row, Schema, Value};

/// What produced a block of rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockNote {
    pub rows: Range<usize>,
    pub source: String,
}

/// A constructed table with the provenance of its rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTable {
    pub table: TableInstance,
    pub notes: Vec<BlockNote>,
}

impl WitnessTable {
    fn single(table: TableInstance, source: impl Into<String>) -> Self {
        let rows = 0..table.len();
        WitnessTable { table, notes: vec![BlockNote { rows, source: source.into() }] }
    }

    fn empty(columns: &AttrSet) -> Result<Self> {
        Ok(WitnessTable { table: TableInstance::empty(columns.iter().cloned().collect())?, notes: vec![] })
    }

    /// Appends another witness table, renumbering its notes.
    pub fn append(&self, other: &WitnessTable) -> Result<WitnessTable> {
        let table = append(&self.table, &other.table)?;
        let offset = self.table.len();
        let mut notes = self.notes.clone();
        notes.extend(other.notes.iter().map(|n| BlockNote {
            rows: n.rows.start + offset..n.rows.end + offset,
            source: n.source.clone(),
        }));
        Ok(WitnessTable { table, notes })
    }

    /// Prefixes every note with `context`.
    fn annotate(mut self, context: &str) -> Self {
        for n in &mut self.notes {
            n.source = format!("{context}: {}", n.source);
        }
        self
    }
}

impl fmt::Display for WitnessTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.table)
    }
}

/// A set of non-constant attributes on which a swap's two rows agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    pub attrs: AttrSet,
}

/// A maximal context in which `pair` must be swapped, with lists `X`, `Y`
/// (`set(XY)` = the context) such that `XA ∼ Y` and `X ∼ YB` are implied
/// and `XA ∼ YB` is not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximalContext {
    pub pair: (Attribute, Attribute),
    pub context: Context,
    pub lists: (MarkedList, MarkedList),
}

fn int_rows(t: &TableInstance) -> Result<Vec<Vec<i64>>> {
    t.int_rows()
        .ok_or_else(|| Error::Table("append needs integer cells".into()))
}

fn min_max(rows: &[Vec<i64>]) -> Option<(i64, i64)> {
    let mut it = rows.iter().flatten().copied();
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
}

fn from_rows(schema: &Schema, rows: Vec<Vec<i64>>) -> Result<TableInstance> {
    let rows = rows
        .into_iter()
        .map(|r| Row::new(schema.clone(), r.into_iter().map(Value::Int).collect()))
        .collect::<Result<_>>()?;
    TableInstance::new(schema.clone(), rows)
}

/// Shifts each table to minimum 0 and places `t2` above every value of `t1`.
/// Columns of `t2` are matched to `t1` by name.
pub fn append(t1: &TableInstance, t2: &TableInstance) -> Result<TableInstance> {
    let (s1, s2) = (t1.schema(), t2.schema());
    if s1.attr_set() != s2.attr_set() {
        return Err(Error::Schema(format!(
            "cannot append tables over {} and {}",
            s1.attr_set(),
            s2.attr_set()
        )));
    }
    let r1 = int_rows(t1)?;
    let r2 = int_rows(t2)?;
    let order: Vec<usize> = s1.columns().iter().map(|a| s2.index_of(a)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(r1.len() + r2.len());
    let mut base = 0;
    if let Some((lo, hi)) = min_max(&r1) {
        rows.extend(r1.iter().map(|r| r.iter().map(|v| v - lo).collect::<Vec<_>>()));
        base = hi - lo + 1;
    } else {
        rows.extend(r1.iter().cloned());
    }
    let lo2 = min_max(&r2).map_or(0, |(lo, _)| lo);
    rows.extend(r2.iter().map(|r| order.iter().map(|&i| r[i] - lo2 + base).collect::<Vec<_>>()));
    from_rows(s1, rows)
}

/// Functional dependencies (as set pairs) carried by a constraint set.
fn fd_projection(m: &ConstraintSet) -> Vec<(AttrSet, AttrSet)> {
    let mut fds = Vec::new();
    for d in m.deps() {
        match d {
            Dependency::OrderDep { lhs, rhs } => fds.push((lhs.to_set(), rhs.to_set())),
            Dependency::OrderEquiv { lhs, rhs } => {
                fds.push((lhs.to_set(), rhs.to_set()));
                fds.push((rhs.to_set(), lhs.to_set()));
            }
            Dependency::FuncDep { lhs, rhs } => fds.push((lhs.clone(), rhs.clone())),
            Dependency::Constant(a) => fds.push((AttrSet::new(), std::iter::once(a.clone()).collect())),
            Dependency::OrderCompat { .. } => {}
        }
    }
    fds
}

fn fd_closure(fds: &[(AttrSet, AttrSet)], start: &AttrSet) -> AttrSet {
    let mut closure = start.clone();
    loop {
        let before = closure.len();
        for (l, r) in fds {
            if l.is_subset(&closure) {
                closure.extend(r);
            }
        }
        if closure.len() == before {
            return closure;
        }
    }
}

fn subsets(attrs: &[Attribute]) -> impl Iterator<Item = AttrSet> + '_ {
    (0u64..1 << attrs.len()).map(move |mask| {
        attrs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, a)| a.clone())
            .collect()
    })
}

fn constants_of(models: &ModelSet, universe: &AttrSet) -> Result<AttrSet> {
    let mut out = AttrSet::new();
    for a in universe.iter() {
        if models.implies(&Dependency::od(MarkedList::empty(), MarkedList::single(a.clone())))? {
            out.insert(a.clone());
        }
    }
    Ok(out)
}

fn require_no_constants(m: &ConstraintSet, models: &ModelSet) -> Result<()> {
    let k = constants_of(models, m.universe())?;
    if !k.is_empty() {
        return Err(Error::Precondition(format!("constant attributes {k} must be projected out first")));
    }
    Ok(())
}

/// For every attribute set, two rows agreeing exactly on its functional
/// closure (sets whose closure is everything are skipped, as are repeated
/// closures).
pub fn build_split_table(m: &ConstraintSet) -> Result<WitnessTable> {
    let models = ModelSet::new(m)?;
    require_no_constants(m, &models)?;
    let universe = m.universe();
    let schema = Schema::new(universe.iter().cloned().collect())?;
    let attrs: Vec<Attribute> = universe.iter().cloned().collect();
    let fds = fd_projection(m);
    let mut seen = BTreeSet::new();
    let mut out = WitnessTable::empty(universe)?;
    for s in subsets(&attrs) {
        let closure = fd_closure(&fds, &s);
        if closure == *universe || !seen.insert(closure.clone()) {
            continue;
        }
        let zeros = vec![0; attrs.len()];
        let split: Vec<i64> = attrs.iter().map(|a| i64::from(!closure.contains(a))).collect();
        let block = from_rows(&schema, vec![zeros, split])?;
        out = out.append(&WitnessTable::single(block, format!("split for closure {closure}")))?;
    }
    Ok(out)
}

/// Attributes connected to `start` by implied single-attribute `∼`.
fn compat_group(models: &ModelSet, universe: &AttrSet, start: &Attribute) -> Result<AttrSet> {
    let mut group: AttrSet = std::iter::once(start.clone()).collect();
    let mut frontier = vec![start.clone()];
    while let Some(x) = frontier.pop() {
        for y in universe.iter() {
            if group.contains(y) {
                continue;
            }
            let d = Dependency::compat(MarkedList::single(x.clone()), MarkedList::single(y.clone()));
            if models.implies(&d)? {
                group.insert(y.clone());
                frontier.push(y.clone());
            }
        }
    }
    Ok(group)
}

/// Two rows swapping `a` and `b`: attributes `∼`-connected to `b` follow
/// `b`, all others follow `a`.
pub fn build_empty_context_swap(m: &ConstraintSet, a: &Attribute, b: &Attribute) -> Result<TableInstance> {
    let models = ModelSet::new(m)?;
    build_empty_context_swap_with(m, &models, a, b)
}

fn build_empty_context_swap_with(m: &ConstraintSet, models: &ModelSet, a: &Attribute, b: &Attribute) -> Result<TableInstance> {
    let universe = m.universe();
    for x in [a, b] {
        if !universe.contains(x) {
            return Err(Error::UnknownAttribute(x.clone()));
        }
    }
    let ga = compat_group(models, universe, a)?;
    let gb = compat_group(models, universe, b)?;
    let shared: AttrSet = ga.members().intersection(gb.members()).cloned().collect();
    if !shared.is_empty() {
        return Err(Error::Construction(format!(
            "{a} and {b} are connected by a chain of compatible attributes through {shared}"
        )));
    }
    let schema = Schema::new(universe.iter().cloned().collect())?;
    let first: Vec<i64> = universe.iter().map(|x| i64::from(gb.contains(x))).collect();
    let second: Vec<i64> = first.iter().map(|v| 1 - v).collect();
    from_rows(&schema, vec![first, second])
}

/// Maximal contexts in which `a` and `b` must appear swapped.
pub fn maximal_contexts(m: &ConstraintSet, a: &Attribute, b: &Attribute) -> Result<Vec<MaximalContext>> {
    let models = ModelSet::new(m)?;
    maximal_contexts_with(m, &models, a, b)
}

fn maximal_contexts_with(m: &ConstraintSet, models: &ModelSet, a: &Attribute, b: &Attribute) -> Result<Vec<MaximalContext>> {
    let rest = m.universe().difference(&[a.clone(), b.clone()].into_iter().collect());
    let lists = canonical_lists(&rest, rest.len());
    let (la, lb) = (MarkedList::single(a.clone()), MarkedList::single(b.clone()));
    let oc = |x: MarkedList, y: MarkedList| Dependency::compat(x, y);
    let mut found: BTreeMap<AttrSet, (MarkedList, MarkedList)> = BTreeMap::new();
    for x in &lists {
        for y in &lists {
            let set = x.to_set().union(&y.to_set());
            if found.contains_key(&set) {
                continue;
            }
            let (xa, yb) = (x.concat(&la), y.concat(&lb));
            if models.implies(&oc(xa.clone(), y.clone()))?
                && models.implies(&oc(x.clone(), yb.clone()))?
                && !models.implies(&oc(xa, yb))?
            {
                found.insert(set, (x.clone(), y.clone()));
            }
        }
    }
    let sets: Vec<&AttrSet> = found.keys().collect();
    let mut out: Vec<MaximalContext> = found
        .iter()
        .filter(|(s, _)| !sets.iter().any(|t| *t != *s && s.is_subset(t)))
        .map(|(s, (x, y))| MaximalContext {
            pair: (a.clone(), b.clone()),
            context: Context { attrs: s.clone() },
            lists: (x.clone(), y.clone()),
        })
        .collect();
    out.sort_by(|p, q| q.context.attrs.len().cmp(&p.context.attrs.len()).then(p.context.cmp(&q.context)));
    Ok(out)
}

struct Builder {
    /// sub-tables by the constraint set they were built for
    memo: BTreeMap<Vec<Dependency>, WitnessTable>,
    limit: usize,
}

/// For every pair and maximal context, a block holding the context constant
/// and swapping the pair.
pub fn build_swap_table(m: &ConstraintSet) -> Result<WitnessTable> {
    let mut b = Builder { memo: BTreeMap::new(), limit: m.universe().len() };
    b.swap(m, 0)
}

/// A table that satisfies `m` and falsifies every order dependency over its
/// universe that `m` does not imply.
pub fn build_armstrong_table(m: &ConstraintSet) -> Result<WitnessTable> {
    let mut b = Builder { memo: BTreeMap::new(), limit: m.universe().len() };
    b.armstrong(m, 0)
}

impl Builder {
    fn swap(&mut self, m: &ConstraintSet, depth: usize) -> Result<WitnessTable> {
        let models = ModelSet::new(m)?;
        require_no_constants(m, &models)?;
        let attrs: Vec<Attribute> = m.universe().iter().cloned().collect();
        let mut out = WitnessTable::empty(m.universe())?;
        for (i, a) in attrs.iter().enumerate() {
            for b in &attrs[i + 1..] {
                for ctx in maximal_contexts_with(m, &models, a, b)? {
                    let block = if ctx.context.attrs.is_empty() {
                        let t = build_empty_context_swap_with(m, &models, a, b)?;
                        WitnessTable::single(t, format!("swap {a}/{b} in the empty context"))
                    } else {
                        let mut sub = m.clone();
                        for v in ctx.context.attrs.iter() {
                            sub.insert(Dependency::constant(v.clone()));
                        }
                        self.armstrong(&sub, depth + 1)?
                            .annotate(&format!("swap {a}/{b} in context {}", ctx.context.attrs))
                    };
                    out = out.append(&block)?;
                }
            }
        }
        Ok(out)
    }

    fn armstrong(&mut self, m: &ConstraintSet, depth: usize) -> Result<WitnessTable> {
        if depth > self.limit {
            return Err(Error::Internal(format!("witness recursion deeper than {}", self.limit)));
        }
        let key: Vec<Dependency> = {
            let mut k: Vec<Dependency> = m.deps().to_vec();
            k.sort();
            k.extend(m.universe().iter().map(|a| Dependency::constant(a.clone())));
            k
        };
        if let Some(t) = self.memo.get(&key) {
            return Ok(t.clone());
        }
        let models = ModelSet::new(m)?;
        let constants = constants_of(&models, m.universe())?;
        let reduced = m.project_out(&constants);
        let core = if reduced.universe().len() <= 2 {
            base_case(&reduced)?
        } else {
            let split = build_split_table(&reduced)?;
            let swap = self.swap(&reduced, depth)?;
            split.append(&swap)?
        };
        let table = attach_constants(&core, m.universe(), &constants)?;
        self.memo.insert(key, table.clone());
        Ok(table)
    }
}

/// Puts the projected-out constants back as zero columns, in universe order.
fn attach_constants(core: &WitnessTable, universe: &AttrSet, constants: &AttrSet) -> Result<WitnessTable> {
    let schema = Schema::new(universe.iter().cloned().collect())?;
    let rows = core.table.int_rows().ok_or_else(|| Error::Internal("non-integer witness".into()))?;
    let src = core.table.schema();
    let rows = rows
        .iter()
        .map(|r| {
            universe
                .iter()
                .map(|a| if constants.contains(a) { Ok(0) } else { src.index_of(a).map(|i| r[i]) })
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = core.notes.clone();
    if !constants.is_empty() {
        for n in &mut notes {
            n.source = format!("{} (constants {constants} = 0)", n.source);
        }
    }
    Ok(WitnessTable { table: from_rows(&schema, rows)?, notes })
}

/// Exhaustive search for universes of at most two (non-constant)
/// attributes: the first table of two or four rows with values in `0..4`
/// that satisfies `m` and falsifies every non-implied order dependency.
fn base_case(m: &ConstraintSet) -> Result<WitnessTable> {
    let universe = m.universe();
    let attrs: Vec<Attribute> = universe.iter().cloned().collect();
    let n = attrs.len();
    let schema = Schema::new(attrs.clone())?;
    if n == 0 {
        // a single row falsifies nothing and satisfies everything
        let t = from_rows(&schema, vec![vec![]])?;
        return Ok(WitnessTable::single(t, "base case (no attributes)"));
    }
    let models = ModelSet::new(m)?;
    // patterns over n attributes, indexed in base 3
    let pattern_count = 3usize.pow(n as u32);
    let pattern_of = |idx: usize| -> Vec<Rel> {
        let mut rels = Vec::with_capacity(n);
        let mut k = idx;
        for _ in 0..n {
            rels.push(Rel::ALL[k % 3]);
            k /= 3;
        }
        rels
    };
    let as_pattern = |rels: &[Rel]| PairPattern::new(universe, |a| rels[attrs.iter().position(|x| x == a).unwrap()]);
    let mut allowed = 0u32;
    for idx in 0..pattern_count {
        let p = as_pattern(&pattern_of(idx));
        if m.deps().iter().map(|d| crate::decide::eval_on_pattern(d, &p)).collect::<Result<Vec<_>>>()?.iter().all(|&b| b) {
            allowed |= 1 << idx;
        }
    }
    let lists = canonical_lists(universe, n);
    let mut needed: Vec<u32> = Vec::new();
    for x in &lists {
        for y in &lists {
            let d = Dependency::od(x.clone(), y.clone());
            if !models.implies(&d)? {
                let mut falsifiers = 0u32;
                for idx in 0..pattern_count {
                    if !crate::decide::eval_on_pattern(&d, &as_pattern(&pattern_of(idx)))? {
                        falsifiers |= 1 << idx;
                    }
                }
                needed.push(falsifiers);
            }
        }
    }
    let values = 4i64.pow(n as u32) as usize;
    let row_of = |v: usize| -> Vec<i64> { (0..n).map(|i| ((v >> (2 * i)) & 3) as i64).collect() };
    let pair_index = |r: &[i64], s: &[i64]| -> usize {
        r.iter().zip(s).rev().fold(0, |acc, (a, b)| {
            acc * 3
                + match a.cmp(b) {
                    std::cmp::Ordering::Less => 0,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Greater => 2,
                }
        })
    };
    let check = |rows: &[usize]| -> bool {
        let data: Vec<Vec<i64>> = rows.iter().map(|&v| row_of(v)).collect();
        let mut mask = 0u32;
        for i in 0..data.len() {
            for j in i + 1..data.len() {
                mask |= 1 << pair_index(&data[i], &data[j]);
            }
        }
        mask & !allowed == 0 && needed.iter().all(|f| mask & f != 0)
    };
    let mut found: Option<Vec<usize>> = None;
    'two: for a in 0..values {
        for b in a..values {
            if check(&[a, b]) {
                found = Some(vec![a, b]);
                break 'two;
            }
        }
    }
    if found.is_none() {
        'four: for a in 0..values {
            for b in a..values {
                for c in b..values {
                    for d in c..values {
                        if check(&[a, b, c, d]) {
                            found = Some(vec![a, b, c, d]);
                            break 'four;
                        }
                    }
                }
            }
        }
    }
    let rows = found.ok_or_else(|| Error::Construction(format!("no base-case table for {universe}")))?;
    let t = from_rows(&schema, rows.iter().map(|&v| row_of(v)).collect())?;
    Ok(WitnessTable::single(t, format!("base case over {universe}")))
}
