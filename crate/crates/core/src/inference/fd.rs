//! Translation between functional dependencies and order dependencies.

use crate::error::{Error, Result};
use crate::model::{AttrSet, Dependency, MarkedList};

fn check_order(what: &str, set: &AttrSet, order: &MarkedList) -> Result<()> {
    if !order.is_canonical() || order.to_set() != *set {
        return Err(Error::Precondition(format!(
            "{what} order {order} must list each attribute of {set} exactly once"
        )));
    }
    Ok(())
}

/// `{X} → {Y}` becomes `X ↦ XY` for the chosen orders of the two sets.
pub fn fd_to_od(fd: &Dependency, lhs_order: &MarkedList, rhs_order: &MarkedList) -> Result<Dependency> {
    let Dependency::FuncDep { lhs, rhs } = fd else {
        return Err(Error::Shape(format!("{fd} is not a functional dependency")));
    };
    check_order("left-hand", lhs, lhs_order)?;
    check_order("right-hand", rhs, rhs_order)?;
    Ok(Dependency::od(lhs_order.clone(), lhs_order.concat(rhs_order)))
}

/// The functional dependency behind an order dependency of shape `X ↦ XY`.
pub fn od_to_fd(od: &Dependency) -> Result<Dependency> {
    let Dependency::OrderDep { lhs, rhs } = od else {
        return Err(Error::Shape(format!("{od} is not an order dependency")));
    };
    let (x, xy) = (lhs.canonicalize(), rhs.canonicalize());
    if !xy.starts_with(&x) {
        return Err(Error::Shape(format!("{od} is not of the form X ↦ XY")));
    }
    Ok(Dependency::fd(x.to_set(), xy.slice(x.len()..xy.len()).to_set()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(n: &[&str]) -> MarkedList {
        MarkedList::of(n)
    }

    #[test]
    fn translations() {
        let fd = Dependency::fd(AttrSet::of(&["month"]), AttrSet::of(&["quarter"]));
        assert_eq!(
            fd_to_od(&fd, &l(&["month"]), &l(&["quarter"])).unwrap(),
            Dependency::od(l(&["month"]), l(&["month", "quarter"]))
        );
        let fd = Dependency::fd(AttrSet::of(&["A", "B"]), AttrSet::of(&["C"]));
        assert_eq!(
            fd_to_od(&fd, &l(&["B", "A"]), &l(&["C"])).unwrap(),
            Dependency::od(l(&["B", "A"]), l(&["B", "A", "C"]))
        );
        assert!(matches!(fd_to_od(&fd, &l(&["A"]), &l(&["C"])), Err(Error::Precondition(_))));
        assert!(matches!(od_to_fd(&Dependency::od(l(&["A"]), l(&["C"]))), Err(Error::Shape(_))));
        assert_eq!(
            od_to_fd(&Dependency::od(l(&["B", "A"]), l(&["B", "A", "C"]))).unwrap(),
            Dependency::fd(AttrSet::of(&["A", "B"]), AttrSet::of(&["C"]))
        );
    }
}
