//! Attribute lists, typed values, rows and dependency statements.
//!
//! A [`MarkedList`] is an ordered attribute sequence; it is the unit every
//! order dependency is stated over. Lists may repeat attributes; the
//! canonical form keeps only the leftmost occurrence of each one, which is
//! order-equivalent to the original list.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A named column. Equality and order are by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute(Arc<str>);

impl Attribute {
    pub fn new(name: impl AsRef<str>) -> Self {
        Attribute(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Attribute {
    fn from(name: &str) -> Self {
        Attribute::new(name)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered list of attributes. Duplicates are permitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkedList(Vec<Attribute>);

impl MarkedList {
    pub fn new(items: Vec<Attribute>) -> Self {
        MarkedList(items)
    }

    pub fn empty() -> Self {
        MarkedList(Vec::new())
    }

    /// Convenience constructor from attribute names.
    pub fn of(names: &[&str]) -> Self {
        MarkedList(names.iter().map(Attribute::new).collect())
    }

    pub fn single(attr: Attribute) -> Self {
        MarkedList(vec![attr])
    }

    pub fn items(&self) -> &[Attribute] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Attribute> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, attr: &Attribute) -> bool {
        self.0.contains(attr)
    }

    /// Removes every non-leftmost occurrence of an attribute.
    pub fn canonicalize(&self) -> MarkedList {
        let mut seen = BTreeSet::new();
        MarkedList(
            self.0
                .iter()
                .filter(|a| seen.insert((*a).clone()))
                .cloned()
                .collect(),
        )
    }

    pub fn is_canonical(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().all(|a| seen.insert(a))
    }

    /// List concatenation (`XY` in the usual notation).
    pub fn concat(&self, other: &MarkedList) -> MarkedList {
        let mut items = self.0.clone();
        items.extend(other.0.iter().cloned());
        MarkedList(items)
    }

    /// Concatenation of several lists.
    pub fn join<'a>(parts: impl IntoIterator<Item = &'a MarkedList>) -> MarkedList {
        MarkedList(parts.into_iter().flat_map(|p| p.0.iter().cloned()).collect())
    }

    pub fn to_set(&self) -> AttrSet {
        AttrSet(self.0.iter().cloned().collect())
    }

    pub fn starts_with(&self, prefix: &MarkedList) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> MarkedList {
        MarkedList(self.0[range].to_vec())
    }

    /// The list with every attribute of `removed` dropped.
    pub fn without(&self, removed: &AttrSet) -> MarkedList {
        MarkedList(
            self.0
                .iter()
                .filter(|a| !removed.contains(a))
                .cloned()
                .collect(),
        )
    }

    pub fn push(&mut self, attr: Attribute) {
        self.0.push(attr);
    }
}

impl FromIterator<Attribute> for MarkedList {
    fn from_iter<T: IntoIterator<Item = Attribute>>(iter: T) -> Self {
        MarkedList(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a MarkedList {
    type Item = &'a Attribute;
    type IntoIter = std::slice::Iter<'a, Attribute>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for MarkedList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}

/// An unordered set of attributes.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrSet(BTreeSet<Attribute>);

impl AttrSet {
    pub fn new() -> Self {
        AttrSet(BTreeSet::new())
    }

    pub fn of(names: &[&str]) -> Self {
        AttrSet(names.iter().map(Attribute::new).collect())
    }

    pub fn members(&self) -> &BTreeSet<Attribute> {
        &self.0
    }

    pub fn iter(&self) -> std::collections::btree_set::Iter<'_, Attribute> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, attr: &Attribute) -> bool {
        self.0.contains(attr)
    }

    pub fn insert(&mut self, attr: Attribute) -> bool {
        self.0.insert(attr)
    }

    pub fn remove(&mut self, attr: &Attribute) -> bool {
        self.0.remove(attr)
    }

    pub fn extend(&mut self, other: &AttrSet) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn union(&self, other: &AttrSet) -> AttrSet {
        AttrSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &AttrSet) -> AttrSet {
        AttrSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &AttrSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// The members in name order, as a list.
    pub fn to_list(&self) -> MarkedList {
        self.0.iter().cloned().collect()
    }
}

impl FromIterator<Attribute> for AttrSet {
    fn from_iter<T: IntoIterator<Item = Attribute>>(iter: T) -> Self {
        AttrSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a AttrSet {
    type Item = &'a Attribute;
    type IntoIter = std::collections::btree_set::Iter<'a, Attribute>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// A cell value. Values of different tags are never compared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Text(String),
}

impl Value {
    pub fn tag(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Text(_) => "text",
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Text(_) => None,
        }
    }

    /// Same-tag comparison; `None` across tags.
    pub fn try_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug)]
struct SchemaInner {
    columns: Vec<Attribute>,
    index: HashMap<Attribute, usize>,
}

/// Column layout shared by the rows of a table.
#[derive(Debug, Clone)]
pub struct Schema(Arc<SchemaInner>);

impl Schema {
    pub fn new(columns: Vec<Attribute>) -> Result<Self> {
        let mut index = HashMap::with_capacity(columns.len());
        for (i, c) in columns.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate column `{c}`")));
            }
        }
        Ok(Schema(Arc::new(SchemaInner { columns, index })))
    }

    pub fn columns(&self) -> &[Attribute] {
        &self.0.columns
    }

    pub fn len(&self) -> usize {
        self.0.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.columns.is_empty()
    }

    pub fn index_of(&self, attr: &Attribute) -> Result<usize> {
        self.0
            .index
            .get(attr)
            .copied()
            .ok_or_else(|| Error::UnknownAttribute(attr.clone()))
    }

    pub fn contains(&self, attr: &Attribute) -> bool {
        self.0.index.contains_key(attr)
    }

    pub fn attr_set(&self) -> AttrSet {
        self.0.columns.iter().cloned().collect()
    }

    /// Column positions for a list; errors on attributes outside the schema.
    pub fn resolve(&self, list: &MarkedList) -> Result<Vec<usize>> {
        list.iter().map(|a| self.index_of(a)).collect()
    }

    pub fn same_layout(&self, other: &Schema) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.columns == other.0.columns
    }
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.same_layout(other)
    }
}

impl Eq for Schema {}

/// One tuple: a value per schema column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    schema: Schema,
    values: Vec<Value>,
}

impl Row {
    pub fn new(schema: Schema, values: Vec<Value>) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::Table(format!(
                "row has {} cells but the schema has {} columns",
                values.len(),
                schema.len()
            )));
        }
        Ok(Row { schema, values })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn get(&self, attr: &Attribute) -> Result<&Value> {
        Ok(&self.values[self.schema.index_of(attr)?])
    }
}

/// Outcome of comparing two rows lexicographically on a list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LexOrder {
    Precedes,
    Equal,
    Follows,
}

impl LexOrder {
    pub fn reverse(self) -> LexOrder {
        match self {
            LexOrder::Precedes => LexOrder::Follows,
            LexOrder::Equal => LexOrder::Equal,
            LexOrder::Follows => LexOrder::Precedes,
        }
    }

    /// `s ⪯ t` on the list.
    pub fn is_le(self) -> bool {
        self != LexOrder::Follows
    }
}

/// Lexicographic comparison of `s` and `t` projected on `list`.
///
/// The first attribute on which the rows differ decides. The empty list
/// compares `Equal` on every pair.
pub fn lex_compare(list: &MarkedList, s: &Row, t: &Row) -> Result<LexOrder> {
    for attr in list {
        let (a, b) = (s.get(attr)?, t.get(attr)?);
        match a.try_cmp(b) {
            Some(Ordering::Less) => return Ok(LexOrder::Precedes),
            Some(Ordering::Greater) => return Ok(LexOrder::Follows),
            Some(Ordering::Equal) => {}
            None => {
                return Err(Error::TypeMismatch {
                    attr: attr.clone(),
                    left: a.tag(),
                    right: b.tag(),
                })
            }
        }
    }
    Ok(LexOrder::Equal)
}

/// Lexicographic comparison over pre-resolved column positions. Callers
/// guarantee per-column tag consistency.
pub(crate) fn lex_compare_columns(columns: &[usize], s: &[Value], t: &[Value]) -> LexOrder {
    for &c in columns {
        match s[c].try_cmp(&t[c]) {
            Some(Ordering::Less) => return LexOrder::Precedes,
            Some(Ordering::Greater) => return LexOrder::Follows,
            _ => {}
        }
    }
    LexOrder::Equal
}

/// A single dependency statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dependency {
    /// `lhs ↦ rhs`: sorted by `lhs` implies sorted by `rhs`.
    OrderDep { lhs: MarkedList, rhs: MarkedList },
    /// `lhs ↔ rhs`: order dependencies in both directions.
    OrderEquiv { lhs: MarkedList, rhs: MarkedList },
    /// `lhs ∼ rhs`: `lhs rhs ↔ rhs lhs`.
    OrderCompat { lhs: MarkedList, rhs: MarkedList },
    /// Functional dependency between attribute sets.
    FuncDep { lhs: AttrSet, rhs: AttrSet },
    /// The attribute takes a single value; same as `[] ↦ [attr]`.
    Constant(Attribute),
}

impl Dependency {
    pub fn od(lhs: MarkedList, rhs: MarkedList) -> Self {
        Dependency::OrderDep { lhs, rhs }
    }

    pub fn equiv(lhs: MarkedList, rhs: MarkedList) -> Self {
        Dependency::OrderEquiv { lhs, rhs }
    }

    pub fn compat(lhs: MarkedList, rhs: MarkedList) -> Self {
        Dependency::OrderCompat { lhs, rhs }
    }

    pub fn fd(lhs: AttrSet, rhs: AttrSet) -> Self {
        Dependency::FuncDep { lhs, rhs }
    }

    pub fn constant(attr: Attribute) -> Self {
        Dependency::Constant(attr)
    }

    /// Every attribute the statement mentions.
    pub fn attributes(&self) -> AttrSet {
        match self {
            Dependency::OrderDep { lhs, rhs }
            | Dependency::OrderEquiv { lhs, rhs }
            | Dependency::OrderCompat { lhs, rhs } => lhs.to_set().union(&rhs.to_set()),
            Dependency::FuncDep { lhs, rhs } => lhs.union(rhs),
            Dependency::Constant(a) => std::iter::once(a.clone()).collect(),
        }
    }

    /// The same statement with both lists in canonical form.
    pub fn canonical(&self) -> Dependency {
        match self {
            Dependency::OrderDep { lhs, rhs } => Dependency::od(lhs.canonicalize(), rhs.canonicalize()),
            Dependency::OrderEquiv { lhs, rhs } => {
                Dependency::equiv(lhs.canonicalize(), rhs.canonicalize())
            }
            Dependency::OrderCompat { lhs, rhs } => {
                Dependency::compat(lhs.canonicalize(), rhs.canonicalize())
            }
            other => other.clone(),
        }
    }

    /// The statement with the given attributes removed from every list/set.
    /// A constant over a removed attribute becomes the trivial `[] ↦ []`.
    pub fn project_out(&self, removed: &AttrSet) -> Dependency {
        match self {
            Dependency::OrderDep { lhs, rhs } => Dependency::od(lhs.without(removed), rhs.without(removed)),
            Dependency::OrderEquiv { lhs, rhs } => {
                Dependency::equiv(lhs.without(removed), rhs.without(removed))
            }
            Dependency::OrderCompat { lhs, rhs } => {
                Dependency::compat(lhs.without(removed), rhs.without(removed))
            }
            Dependency::FuncDep { lhs, rhs } => {
                Dependency::fd(lhs.difference(removed), rhs.difference(removed))
            }
            Dependency::Constant(a) if removed.contains(a) => {
                Dependency::od(MarkedList::empty(), MarkedList::empty())
            }
            Dependency::Constant(a) => Dependency::Constant(a.clone()),
        }
    }
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dependency::OrderDep { lhs, rhs } => write!(f, "od {lhs} -> {rhs}"),
            Dependency::OrderEquiv { lhs, rhs } => write!(f, "oeq {lhs} <-> {rhs}"),
            Dependency::OrderCompat { lhs, rhs } => write!(f, "oc {lhs} ~ {rhs}"),
            Dependency::FuncDep { lhs, rhs } => write!(f, "fd {lhs} => {rhs}"),
            Dependency::Constant(a) => write!(f, "const {a}"),
        }
    }
}

/// A finite set of dependencies together with the attribute universe they
/// range over.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    deps: Vec<Dependency>,
    universe: AttrSet,
}

impl ConstraintSet {
    pub fn new(deps: impl IntoIterator<Item = Dependency>) -> Self {
        let mut set = ConstraintSet::default();
        for d in deps {
            set.insert(d);
        }
        set
    }

    /// Adds extra attributes to the universe without constraining them.
    pub fn with_attributes(mut self, extra: impl IntoIterator<Item = Attribute>) -> Self {
        for a in extra {
            self.universe.insert(a);
        }
        self
    }

    pub fn insert(&mut self, dep: Dependency) {
        self.universe.extend(&dep.attributes());
        if !self.deps.contains(&dep) {
            self.deps.push(dep);
        }
    }

    pub fn deps(&self) -> &[Dependency] {
        &self.deps
    }

    pub fn universe(&self) -> &AttrSet {
        &self.universe
    }

    pub fn contains(&self, dep: &Dependency) -> bool {
        self.deps.contains(dep)
    }

    pub fn len(&self) -> usize {
        self.deps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deps.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Dependency> {
        self.deps.iter()
    }

    /// Removes the attributes from every dependency and from the universe.
    pub fn project_out(&self, removed: &AttrSet) -> ConstraintSet {
        let deps = self.deps.iter().map(|d| d.project_out(removed));
        ConstraintSet::new(deps).with_attributes(self.universe.difference(removed).iter().cloned())
    }

    /// Checks that every attribute of `dep` is in the universe.
    pub fn check_covers(&self, dep: &Dependency) -> Result<()> {
        match dep.attributes().iter().find(|a| !self.universe.contains(a)) {
            Some(a) => Err(Error::UnknownAttribute(a.clone())),
            None => Ok(()),
        }
    }
}

impl FromIterator<Dependency> for ConstraintSet {
    fn from_iter<T: IntoIterator<Item = Dependency>>(iter: T) -> Self {
        ConstraintSet::new(iter)
    }
}
