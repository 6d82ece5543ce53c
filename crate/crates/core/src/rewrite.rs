//! Order-by and group-by rewrites justified by the dependencies in a store.
//!
//! Every reported rewrite is re-checked with [`implies`] before it is
//! returned.

use std::fmt;

use crate::decide::implies;
use crate::error::{Error, Result};
use crate::inference::RuleId;
use crate::model::{AttrSet, Attribute, ConstraintSet, Dependency, MarkedList};

/// An ascending order-by list; duplicates are dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderSpec {
    attrs: MarkedList,
}

impl OrderSpec {
    pub fn new(attrs: MarkedList) -> Self {
        OrderSpec { attrs: attrs.canonicalize() }
    }

    pub fn of(names: &[&str]) -> Self {
        OrderSpec::new(MarkedList::of(names))
    }

    pub fn attrs(&self) -> &MarkedList {
        &self.attrs
    }
}

impl fmt::Display for OrderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.attrs.iter())
    }
}

/// A group-by attribute set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    attrs: AttrSet,
}

impl GroupSpec {
    pub fn new(attrs: AttrSet) -> Self {
        GroupSpec { attrs }
    }

    pub fn of(names: &[&str]) -> Self {
        GroupSpec::new(AttrSet::of(names))
    }

    pub fn attrs(&self) -> &AttrSet {
        &self.attrs
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.attrs.iter())
    }
}

fn write_joined<'a>(f: &mut fmt::Formatter<'_>, attrs: impl Iterator<Item = &'a Attribute>) -> fmt::Result {
    for (i, a) in attrs.enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// One dropped attribute and the dependency that allowed dropping it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub attr: Attribute,
    pub rule: RuleId,
    pub because: Dependency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteKind {
    Order,
    Group,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteReport {
    pub kind: RewriteKind,
    pub input: MarkedList,
    pub output: MarkedList,
    pub removed: Vec<Removal>,
}

impl RewriteReport {
    pub fn changed(&self) -> bool {
        self.input != self.output
    }
}

impl fmt::Display for RewriteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, self.output.iter())?;
        writeln!(f)?;
        for r in &self.removed {
            writeln!(f, "drop {} by {} using {}", r.attr, r.rule.short_name(), r.because)?;
        }
        Ok(())
    }
}

fn check_universe<'a>(store: &ConstraintSet, attrs: impl IntoIterator<Item = &'a Attribute>) -> Result<()> {
    for a in attrs {
        if !store.universe().contains(a) {
            return Err(Error::UnknownAttribute(a.clone()));
        }
    }
    Ok(())
}

fn determined(store: &ConstraintSet, by: AttrSet, attr: &Attribute) -> Result<Option<Dependency>> {
    let fd = Dependency::fd(by, std::iter::once(attr.clone()).collect());
    Ok(implies(store, &fd)?.then_some(fd))
}

fn certify(store: &ConstraintSet, input: &MarkedList, output: &MarkedList) -> Result<bool> {
    implies(store, &Dependency::equiv(input.clone(), output.clone()))
}

/// Right-to-left sweep dropping attributes that their prefix functionally
/// determines, repeated until nothing changes.
pub fn reduce_order(o: &OrderSpec, store: &ConstraintSet) -> Result<RewriteReport> {
    reduce(o, store, false)
}

/// [`reduce_order`] plus dropping a block starting at the current attribute
/// when the list directly after it orders the block.
pub fn reduce_order_star(o: &OrderSpec, store: &ConstraintSet) -> Result<RewriteReport> {
    reduce(o, store, true)
}

fn reduce(o: &OrderSpec, store: &ConstraintSet, with_ods: bool) -> Result<RewriteReport> {
    check_universe(store, o.attrs().iter())?;
    let input = o.attrs().clone();
    let mut current = input.clone();
    let mut removed = Vec::new();
    loop {
        let before = current.len();
        let mut i = current.len();
        while i > 0 {
            i -= 1;
            if i >= current.len() {
                continue;
            }
            let attr = current.items()[i].clone();
            if let Some(fd) = determined(store, current.slice(0..i).to_set(), &attr)? {
                let next = current.without(&std::iter::once(attr.clone()).collect());
                if certify(store, &current, &next)? {
                    removed.push(Removal { attr, rule: RuleId::Eliminate, because: fd });
                    current = next;
                    continue;
                }
            }
            if with_ods {
                if let Some((next, drops)) = left_eliminate(store, &current, i)? {
                    removed.extend(drops);
                    current = next;
                }
            }
        }
        if current.len() == before {
            break;
        }
    }
    if !certify(store, &input, &current)? {
        return Err(Error::Internal(format!("rewrite of {input} to {current} failed certification")));
    }
    Ok(RewriteReport { kind: RewriteKind::Order, input, output: current, removed })
}

/// Tries blocks `Y = list[i..k]` (shortest first) against the lists
/// `X = list[k..j]` directly after them (longest first).
fn left_eliminate(store: &ConstraintSet, list: &MarkedList, i: usize) -> Result<Option<(MarkedList, Vec<Removal>)>> {
    let n = list.len();
    for k in i + 1..n {
        let y = list.slice(i..k);
        for j in (k + 1..=n).rev() {
            let x = list.slice(k..j);
            let od = Dependency::od(x, y.clone());
            if !implies(store, &od)? {
                continue;
            }
            let next = list.without(&y.to_set());
            if certify(store, list, &next)? {
                let drops = y
                    .iter()
                    .map(|a| Removal { attr: a.clone(), rule: RuleId::LeftEliminate, because: od.clone() })
                    .collect();
                return Ok(Some((next, drops)));
            }
        }
    }
    Ok(None)
}

/// Greedy group-by reduction with name order as the tie-break.
pub fn reduce_group_by(g: &GroupSpec, store: &ConstraintSet) -> Result<RewriteReport> {
    reduce_group_by_with(g, store, &[])
}

/// Greedy group-by reduction. Attributes listed in `prefer` are kept over
/// others (earlier wins); the rest are kept in name order.
pub fn reduce_group_by_with(g: &GroupSpec, store: &ConstraintSet, prefer: &[Attribute]) -> Result<RewriteReport> {
    check_universe(store, g.attrs().iter())?;
    let rank = |a: &Attribute| prefer.iter().position(|p| p == a).unwrap_or(prefer.len());
    let mut by_keep: Vec<Attribute> = g.attrs().iter().cloned().collect();
    by_keep.sort_by(|a, b| rank(a).cmp(&rank(b)).then(a.cmp(b)));
    let mut current = g.attrs().clone();
    let mut removed = Vec::new();
    for attr in by_keep.iter().rev() {
        let mut rest = current.clone();
        rest.remove(attr);
        if let Some(fd) = determined(store, rest.clone(), attr)? {
            removed.push(Removal { attr: attr.clone(), rule: RuleId::Eliminate, because: fd });
            current = rest;
        }
    }
    let back = Dependency::fd(current.clone(), g.attrs().clone());
    if !implies(store, &back)? {
        return Err(Error::Internal(format!("group-by {current} does not determine {}", g.attrs())));
    }
    Ok(RewriteReport { kind: RewriteKind::Group, input: g.attrs().to_list(), output: current.to_list(), removed })
}

/// Whether a stream sorted by `plan` also satisfies `order by query`.
pub fn can_substitute_order(plan: &OrderSpec, query: &OrderSpec, store: &ConstraintSet) -> Result<bool> {
    check_universe(store, plan.attrs().iter().chain(query.attrs().iter()))?;
    implies(store, &Dependency::od(plan.attrs().clone(), query.attrs().clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: &[&str]) -> MarkedList {
        MarkedList::of(n)
    }

    fn store(deps: impl IntoIterator<Item = Dependency>, attrs: &[&str]) -> ConstraintSet {
        ConstraintSet::new(deps).with_attributes(attrs.iter().map(|a| Attribute::new(*a)))
    }

    fn fd(x: &[&str], y: &[&str]) -> Dependency {
        Dependency::fd(AttrSet::of(x), AttrSet::of(y))
    }

    #[test]
    fn reduce_order_by_fds() {
        let m = store([fd(&["month"], &["quarter"])], &["year"]);
        let r = reduce_order(&OrderSpec::of(&["year", "month", "quarter"]), &m).unwrap();
        assert_eq!(r.output, l(&["year", "month"]));
        assert_eq!(r.removed[0].attr, Attribute::new("quarter"));
        let r = reduce_order(&OrderSpec::of(&["year", "quarter", "month"]), &m).unwrap();
        assert!(!r.changed());
        let r = reduce_order(&OrderSpec::of(&[]), &m).unwrap();
        assert!(r.output.is_empty());
    }

    #[test]
    fn reduce_order_star_examples() {
        let m = store([Dependency::od(l(&["month"]), l(&["quarter"]))], &["year"]);
        let r = reduce_order_star(&OrderSpec::of(&["year", "quarter", "month"]), &m).unwrap();
        assert_eq!(r.output, l(&["year", "month"]));

        let m = store([Dependency::od(l(&["D"]), l(&["B"]))], &["A", "C"]);
        assert_eq!(reduce_order_star(&OrderSpec::of(&["A", "B", "D"]), &m).unwrap().output, l(&["A", "D"]));
        assert!(!reduce_order_star(&OrderSpec::of(&["A", "B", "C", "D"]), &m).unwrap().changed());

        let m = store([Dependency::od(l(&["D"]), l(&["B", "C"]))], &["A"]);
        let r = reduce_order_star(&OrderSpec::of(&["A", "B", "C", "D"]), &m).unwrap();
        assert_eq!(r.output, l(&["A", "D"]));
        assert!(r.removed.iter().all(|x| x.rule == RuleId::LeftEliminate));
    }

    #[test]
    fn unknown_attribute_is_rejected() {
        let m = store([], &["A"]);
        assert!(matches!(reduce_order(&OrderSpec::of(&["A", "Z"]), &m), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn group_by_examples() {
        let m = store([fd(&["month"], &["quarter"])], &["year"]);
        let r = reduce_group_by(&GroupSpec::of(&["year", "quarter", "month"]), &m).unwrap();
        assert_eq!(r.output, l(&["month", "year"]));
        assert_eq!(reduce_group_by(&GroupSpec::of(&["A"]), &store([], &["A"])).unwrap().output, l(&["A"]));

        let m = store([fd(&["A"], &["B"]), fd(&["B"], &["A"])], &[]);
        assert_eq!(reduce_group_by(&GroupSpec::of(&["A", "B"]), &m).unwrap().output, l(&["A"]));
        let r = reduce_group_by_with(&GroupSpec::of(&["A", "B"]), &m, &[Attribute::new("B")]).unwrap();
        assert_eq!(r.output, l(&["B"]));
    }

    #[test]
    fn substitution_direction() {
        let m = store([Dependency::od(l(&["month"]), l(&["quarter"]))], &["year", "day"]);
        let yq = OrderSpec::of(&["year", "quarter", "month"]);
        assert!(can_substitute_order(&OrderSpec::of(&["year", "month", "day"]), &yq, &m).unwrap());
        assert!(!can_substitute_order(&OrderSpec::of(&["year", "month"]), &OrderSpec::of(&["year", "month", "day"]), &m).unwrap());
        assert!(can_substitute_order(&yq, &yq, &m).unwrap());
    }
}
