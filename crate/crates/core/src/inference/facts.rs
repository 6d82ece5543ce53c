//! Statements reduced to the order dependencies they assert.
//!
//! Every supported statement is equivalent to a finite set of order
//! dependencies between canonical lists, its *facts*. Comparing statements
//! through their facts is what makes proof checking insensitive to duplicate
//! attributes and to which of `↔`/`∼`/`↦` a step happens to be written as.

use crate::model::{Dependency, MarkedList};

/// An order dependency between canonical lists.
pub(crate) type Fact = (MarkedList, MarkedList);

fn canon2(a: &MarkedList, b: &MarkedList) -> MarkedList {
    a.concat(b).canonicalize()
}

/// Facts asserted by a statement.
pub(crate) fn facts(d: &Dependency) -> Vec<Fact> {
    match d {
        Dependency::OrderDep { lhs, rhs } => vec![(lhs.canonicalize(), rhs.canonicalize())],
        Dependency::OrderEquiv { lhs, rhs } => {
            let (l, r) = (lhs.canonicalize(), rhs.canonicalize());
            vec![(l.clone(), r.clone()), (r, l)]
        }
        Dependency::OrderCompat { lhs, rhs } => {
            let (l, r) = (canon2(lhs, rhs), canon2(rhs, lhs));
            vec![(l.clone(), r.clone()), (r, l)]
        }
        Dependency::FuncDep { lhs, rhs } => {
            let extra = rhs.difference(lhs);
            let mut out = Vec::new();
            for x in permutations(&lhs.to_list()) {
                for y in permutations(&extra.to_list()) {
                    out.push((x.clone(), x.concat(&y)));
                }
            }
            out
        }
        Dependency::Constant(a) => vec![(MarkedList::empty(), MarkedList::single(a.clone()))],
    }
}

/// Does `provider` assert `fact`?
pub(crate) fn provides(provider: &Dependency, fact: &Fact) -> bool {
    match provider {
        Dependency::FuncDep { lhs, rhs } => {
            let (x, y) = fact;
            x.is_canonical()
                && y.is_canonical()
                && x.to_set() == *lhs
                && y.starts_with(x)
                && y.to_set() == lhs.union(rhs)
        }
        other => facts(other).iter().any(|f| f == fact),
    }
}

/// Is every fact of `stmt` asserted by `provider`?
pub(crate) fn covers(provider: &Dependency, stmt: &Dependency) -> bool {
    if provider == stmt {
        return true;
    }
    if let (Dependency::FuncDep { lhs: pl, rhs: pr }, Dependency::FuncDep { lhs, rhs }) = (provider, stmt) {
        // avoids enumerating permutations for the common case
        if pl == lhs && pl.union(pr) == lhs.union(rhs) {
            return true;
        }
    }
    facts(stmt).iter().all(|f| provides(provider, f))
}

/// Is every fact of `stmt` asserted by at least one of `providers`?
pub(crate) fn covered_by_union<'a>(providers: impl IntoIterator<Item = &'a Dependency> + Clone, stmt: &Dependency) -> bool {
    facts(stmt)
        .iter()
        .all(|f| providers.clone().into_iter().any(|p| provides(p, f)))
}

/// Do the two statements assert exactly the same facts?
pub(crate) fn same_facts(a: &Dependency, b: &Dependency) -> bool {
    covers(a, b) && covers(b, a)
}

pub(crate) fn permutations(list: &MarkedList) -> Vec<MarkedList> {
    let items = list.items();
    if items.len() <= 1 {
        return vec![list.clone()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for tail in permutations(&MarkedList::new(rest)) {
            let mut l = MarkedList::single(head.clone());
            l = l.concat(&tail);
            out.push(l);
        }
    }
    out
}
