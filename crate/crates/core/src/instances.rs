//! Concrete tables and dependency validation.
//!
//! Checks are pairwise scans over the rows and cost `O(n² · |list|)`; this is
//! a semantics checker for desk-sized tables, not a profiler. Witness search
//! is deterministic: pairs are visited in row-index order and the first
//! violating pair is returned.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    lex_compare_columns, AttrSet, Attribute, Dependency, LexOrder, MarkedList, Row, Schema, Value,
};

/// Soft cap on rows accepted by the validators.
pub const ROW_SOFT_CAP: usize = 100_000;

/// A multiset of rows over a fixed schema. Every column holds values of a
/// single tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableInstance {
    schema: Schema,
    rows: Vec<Row>,
}

impl TableInstance {
    pub fn new(schema: Schema, rows: Vec<Row>) -> Result<Self> {
        let mut tags: Vec<Option<&'static str>> = vec![None; schema.len()];
        for (r, row) in rows.iter().enumerate() {
            if !row.schema().same_layout(&schema) {
                return Err(Error::Table(format!("row {r} does not follow the table schema")));
            }
            for (c, v) in row.values().iter().enumerate() {
                match tags[c] {
                    None => tags[c] = Some(v.tag()),
                    Some(tag) if tag != v.tag() => {
                        return Err(Error::Table(format!(
                            "column `{}` mixes {} and {} values",
                            schema.columns()[c],
                            tag,
                            v.tag()
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(TableInstance { schema, rows })
    }

    pub fn empty(columns: Vec<Attribute>) -> Result<Self> {
        TableInstance::new(Schema::new(columns)?, Vec::new())
    }

    /// Builds an integer table from column names and row values.
    pub fn from_ints(columns: &[&str], rows: &[Vec<i64>]) -> Result<Self> {
        let schema = Schema::new(columns.iter().map(Attribute::new).collect())?;
        let rows = rows
            .iter()
            .map(|r| Row::new(schema.clone(), r.iter().map(|v| Value::Int(*v)).collect()))
            .collect::<Result<Vec<_>>>()?;
        TableInstance::new(schema, rows)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn attr_set(&self) -> AttrSet {
        self.schema.attr_set()
    }

    /// Cells as integers, if every cell is an integer.
    pub fn int_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.rows
            .iter()
            .map(|r| r.values().iter().map(Value::as_int).collect())
            .collect()
    }

    fn check_size(&self) -> Result<()> {
        if self.rows.len() > ROW_SOFT_CAP {
            return Err(Error::Table(format!(
                "{} rows exceeds the validator cap of {ROW_SOFT_CAP}",
                self.rows.len()
            )));
        }
        Ok(())
    }

    fn compare(&self, columns: &[usize], i: usize, j: usize) -> LexOrder {
        lex_compare_columns(columns, self.rows[i].values(), self.rows[j].values())
    }

    /// Unordered pairs `(i, j)` with `i < j`, in row-index order.
    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.rows.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    /// All ordered pairs `(i, j)` with `i != j`, in row-index order.
    fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.rows.len();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
    }

    fn witness(&self, kind: ViolationKind, i: usize, j: usize) -> ViolationWitness {
        ViolationWitness {
            kind,
            first_index: i,
            second_index: j,
            first: self.rows[i].clone(),
            second: self.rows[j].clone(),
        }
    }
}

impl fmt::Display for TableInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<&str> = self.schema.columns().iter().map(Attribute::name).collect();
        writeln!(f, "{}", header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.values().iter().map(Value::to_string).collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// Equal on the left list, not equal on the right.
    Split,
    /// Ascending on the left list, descending on the right.
    Swap,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Split => "split",
            ViolationKind::Swap => "swap",
        })
    }
}

/// A pair of rows that falsifies a dependency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationWitness {
    pub kind: ViolationKind,
    pub first_index: usize,
    pub second_index: usize,
    pub first: Row,
    pub second: Row,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Holds,
    Violated(ViolationWitness),
}

/// Does the table satisfy the dependency?
pub fn holds(t: &TableInstance, d: &Dependency) -> Result<bool> {
    t.check_size()?;
    let s = &t.schema;
    Ok(match d {
        Dependency::OrderDep { lhs, rhs } => {
            let (x, y) = (s.resolve(lhs)?, s.resolve(rhs)?);
            t.pairs().all(|(i, j)| od_pair_ok(t.compare(&x, i, j), t.compare(&y, i, j)))
        }
        Dependency::OrderEquiv { lhs, rhs } => {
            let (x, y) = (s.resolve(lhs)?, s.resolve(rhs)?);
            t.pairs().all(|(i, j)| t.compare(&x, i, j) == t.compare(&y, i, j))
        }
        Dependency::OrderCompat { lhs, rhs } => {
            let (x, y) = (s.resolve(lhs)?, s.resolve(rhs)?);
            t.pairs().all(|(i, j)| !opposite(t.compare(&x, i, j), t.compare(&y, i, j)))
        }
        Dependency::FuncDep { lhs, rhs } => {
            let (x, y) = (s.resolve(&lhs.to_list())?, s.resolve(&rhs.to_list())?);
            t.pairs().all(|(i, j)| {
                t.compare(&x, i, j) != LexOrder::Equal || t.compare(&y, i, j) == LexOrder::Equal
            })
        }
        Dependency::Constant(a) => {
            let c = [s.index_of(a)?];
            t.pairs().all(|(i, j)| t.compare(&c, i, j) == LexOrder::Equal)
        }
    })
}

/// Both orders of an unordered pair satisfy `X ↦ Y`.
fn od_pair_ok(cx: LexOrder, cy: LexOrder) -> bool {
    (!cx.is_le() || cy.is_le()) && (!cx.reverse().is_le() || cy.reverse().is_le())
}

fn opposite(a: LexOrder, b: LexOrder) -> bool {
    matches!(
        (a, b),
        (LexOrder::Precedes, LexOrder::Follows) | (LexOrder::Follows, LexOrder::Precedes)
    )
}

/// First pair equal on `x` but not on `y`; `None` iff `set(x) → set(y)`
/// holds on the table.
pub fn find_split(t: &TableInstance, x: &MarkedList, y: &MarkedList) -> Result<Option<ViolationWitness>> {
    t.check_size()?;
    let (xc, yc) = (t.schema.resolve(x)?, t.schema.resolve(y)?);
    Ok(t
        .pairs()
        .find(|&(i, j)| t.compare(&xc, i, j) == LexOrder::Equal && t.compare(&yc, i, j) != LexOrder::Equal)
        .map(|(i, j)| t.witness(ViolationKind::Split, i, j)))
}

/// First ordered pair preceding on `x` and following on `y`; `None` iff
/// `x ∼ y` holds on the table.
pub fn find_swap(t: &TableInstance, x: &MarkedList, y: &MarkedList) -> Result<Option<ViolationWitness>> {
    t.check_size()?;
    let (xc, yc) = (t.schema.resolve(x)?, t.schema.resolve(y)?);
    Ok(t
        .ordered_pairs()
        .find(|&(i, j)| t.compare(&xc, i, j) == LexOrder::Precedes && t.compare(&yc, i, j) == LexOrder::Follows)
        .map(|(i, j)| t.witness(ViolationKind::Swap, i, j)))
}

/// Explains why a dependency fails: a split falsifies its functional part,
/// a swap its compatibility part. Splits are reported first.
pub fn classify_violation(t: &TableInstance, d: &Dependency) -> Result<Classification> {
    let found = match d {
        Dependency::OrderDep { lhs, rhs } => classify_od(t, lhs, rhs)?,
        Dependency::OrderEquiv { lhs, rhs } => match classify_od(t, lhs, rhs)? {
            Some(w) => Some(w),
            None => classify_od(t, rhs, lhs)?,
        },
        Dependency::OrderCompat { lhs, rhs } => find_swap(t, lhs, rhs)?,
        Dependency::FuncDep { lhs, rhs } => find_split(t, &lhs.to_list(), &rhs.to_list())?,
        Dependency::Constant(a) => find_split(t, &MarkedList::empty(), &MarkedList::single(a.clone()))?,
    };
    Ok(match found {
        Some(w) => Classification::Violated(w),
        None => Classification::Holds,
    })
}

fn classify_od(t: &TableInstance, x: &MarkedList, y: &MarkedList) -> Result<Option<ViolationWitness>> {
    if let Some(w) = find_split(t, x, y)? {
        return Ok(Some(w));
    }
    find_swap(t, x, y)
}
