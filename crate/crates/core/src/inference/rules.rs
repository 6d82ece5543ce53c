//! Rule identifiers, variable bindings and rule schemas.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Dependency, MarkedList};

/// Inference rules. The first six are the axioms; `Premise` cites the
/// constraint set and `Combine` restates facts already established by the
/// cited steps (splitting or assembling `↔`/`∼` statements).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Premise,
    Reflexivity,
    Prefix,
    Normalization,
    Transitivity,
    Suffix,
    Chain,
    Combine,
    Union,
    Augmentation,
    Shift,
    Decomposition,
    Replace,
    Eliminate,
    LeftEliminate,
    Drop,
    Path,
    Partition,
    DownwardClosure,
    Permutation,
    OdCompose,
    OdDecompose,
}

impl RuleId {
    pub const ALL: [RuleId; 22] = [
        RuleId::Premise,
        RuleId::Reflexivity,
        RuleId::Prefix,
        RuleId::Normalization,
        RuleId::Transitivity,
        RuleId::Suffix,
        RuleId::Chain,
        RuleId::Combine,
        RuleId::Union,
        RuleId::Augmentation,
        RuleId::Shift,
        RuleId::Decomposition,
        RuleId::Replace,
        RuleId::Eliminate,
        RuleId::LeftEliminate,
        RuleId::Drop,
        RuleId::Path,
        RuleId::Partition,
        RuleId::DownwardClosure,
        RuleId::Permutation,
        RuleId::OdCompose,
        RuleId::OdDecompose,
    ];

    pub const AXIOMS: [RuleId; 6] = [
        RuleId::Reflexivity,
        RuleId::Prefix,
        RuleId::Normalization,
        RuleId::Transitivity,
        RuleId::Suffix,
        RuleId::Chain,
    ];

    /// One of the six axioms.
    pub fn is_axiom(self) -> bool {
        Self::AXIOMS.contains(&self)
    }

    /// Rules a primitive-only proof may use.
    pub fn is_primitive(self) -> bool {
        self.is_axiom() || matches!(self, RuleId::Premise | RuleId::Combine)
    }

    pub fn is_derived(self) -> bool {
        !self.is_primitive()
    }

    /// Name used in proof traces.
    pub fn short_name(self) -> &'static str {
        match self {
            RuleId::Premise => "Premise",
            RuleId::Reflexivity => "Ref",
            RuleId::Prefix => "Pref",
            RuleId::Normalization => "Norm",
            RuleId::Transitivity => "Tran",
            RuleId::Suffix => "Suf",
            RuleId::Chain => "Chain",
            RuleId::Combine => "Comb",
            RuleId::Union => "Union",
            RuleId::Augmentation => "Aug",
            RuleId::Shift => "Shift",
            RuleId::Decomposition => "Dec",
            RuleId::Replace => "Rep",
            RuleId::Eliminate => "Elim",
            RuleId::LeftEliminate => "LElim",
            RuleId::Drop => "Drop",
            RuleId::Path => "Path",
            RuleId::Partition => "Part",
            RuleId::DownwardClosure => "Down",
            RuleId::Permutation => "Perm",
            RuleId::OdCompose => "OdComp",
            RuleId::OdDecompose => "OdDec",
        }
    }

    pub fn full_name(self) -> &'static str {
        match self {
            RuleId::Premise => "Premise",
            RuleId::Reflexivity => "Reflexivity",
            RuleId::Prefix => "Prefix",
            RuleId::Normalization => "Normalization",
            RuleId::Transitivity => "Transitivity",
            RuleId::Suffix => "Suffix",
            RuleId::Chain => "Chain",
            RuleId::Combine => "Combine",
            RuleId::Union => "Union",
            RuleId::Augmentation => "Augmentation",
            RuleId::Shift => "Shift",
            RuleId::Decomposition => "Decomposition",
            RuleId::Replace => "Replace",
            RuleId::Eliminate => "Eliminate",
            RuleId::LeftEliminate => "LeftEliminate",
            RuleId::Drop => "Drop",
            RuleId::Path => "Path",
            RuleId::Partition => "Partition",
            RuleId::DownwardClosure => "DownwardClosure",
            RuleId::Permutation => "Permutation",
            RuleId::OdCompose => "OdCompose",
            RuleId::OdDecompose => "OdDecompose",
        }
    }

    /// Fixed variable names of the schema; `Chain` additionally takes
    /// `Y1`‥`Yn`.
    pub fn variables(self) -> &'static [&'static str] {
        match self {
            RuleId::Premise | RuleId::Combine => &[],
            RuleId::Reflexivity => &["X", "Y"],
            RuleId::Prefix => &["X", "Y", "Z"],
            RuleId::Normalization => &["W", "X", "Y", "V"],
            RuleId::Transitivity => &["X", "Y", "Z"],
            RuleId::Suffix => &["X", "Y"],
            RuleId::Chain => &["X", "Z"],
            RuleId::Union => &["X", "Y", "Z"],
            RuleId::Augmentation => &["X", "Y", "Z"],
            RuleId::Shift => &["W", "V", "X", "Y"],
            RuleId::Decomposition => &["X", "Y", "Z"],
            RuleId::Replace => &["M", "N", "X", "Z"],
            RuleId::Eliminate => &["M", "X", "N", "Y", "W"],
            RuleId::LeftEliminate => &["V", "X", "Y", "Z"],
            RuleId::Drop => &["X", "V", "Y", "Z", "W"],
            RuleId::Path => &["X", "Y", "W", "V", "M", "N"],
            RuleId::Partition => &["X", "Y", "Z"],
            RuleId::DownwardClosure => &["X", "Y", "Z", "V"],
            RuleId::Permutation => &["X", "Y", "X'", "Y'"],
            RuleId::OdCompose | RuleId::OdDecompose => &["X", "Y"],
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if matches!(s, "Tr" | "Tra" | "Trans") {
            return Ok(RuleId::Transitivity);
        }
        RuleId::ALL
            .into_iter()
            .find(|r| r.short_name() == s || r.full_name() == s)
            .ok_or_else(|| Error::Shape(format!("unknown rule `{s}`")))
    }
}

/// Substitution of marked lists for rule variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Binding(BTreeMap<String, MarkedList>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn with(mut self, var: &str, list: MarkedList) -> Self {
        self.0.insert(var.to_string(), list);
        self
    }

    pub fn insert(&mut self, var: impl Into<String>, list: MarkedList) {
        self.0.insert(var.into(), list);
    }

    pub fn get(&self, var: &str) -> Option<&MarkedList> {
        self.0.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &MarkedList)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn require(&self, rule: RuleId, var: &str) -> Result<&MarkedList> {
        self.0
            .get(var)
            .ok_or_else(|| Error::rule(rule, format!("variable {var} is not bound")))
    }

    /// Number of `Yi` chain variables, checking they are `Y1`‥`Yn`.
    fn chain_length(&self) -> Result<usize> {
        let mut n = 0;
        while self.0.contains_key(&format!("Y{}", n + 1)) {
            n += 1;
        }
        if n == 0 {
            return Err(Error::rule(RuleId::Chain, "variable Y1 is not bound (n ≥ 1)"));
        }
        Ok(n)
    }

    fn check_vars(&self, rule: RuleId) -> Result<()> {
        let chain = if rule == RuleId::Chain { self.chain_length()? } else { 0 };
        for key in self.0.keys() {
            let known = rule.variables().contains(&key.as_str())
                || (1..=chain).any(|i| *key == format!("Y{i}"));
            if !known {
                return Err(Error::rule(rule, format!("unexpected variable {key}")));
            }
        }
        Ok(())
    }
}

impl FromIterator<(String, MarkedList)> for Binding {
    fn from_iter<T: IntoIterator<Item = (String, MarkedList)>>(iter: T) -> Self {
        Binding(iter.into_iter().collect())
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str("}")
    }
}

/// A rule schema instantiated under a binding.
#[derive(Debug, Clone)]
pub(crate) struct Instance {
    /// (slot name, required statement)
    pub hypotheses: Vec<(String, Dependency)>,
    pub conclusions: Vec<Dependency>,
}

fn cat(parts: &[&MarkedList]) -> MarkedList {
    MarkedList::join(parts.iter().copied())
}

fn od(x: MarkedList, y: MarkedList) -> Dependency {
    Dependency::od(x, y)
}

fn eq(x: MarkedList, y: MarkedList) -> Dependency {
    Dependency::equiv(x, y)
}

fn oc(x: MarkedList, y: MarkedList) -> Dependency {
    Dependency::compat(x, y)
}

/// Instantiates a schema, checking that exactly its variables are bound and
/// that side conditions hold. `Premise` and `Combine` have no schema.
pub(crate) fn instantiate(rule: RuleId, b: &Binding) -> Result<Instance> {
    if matches!(rule, RuleId::Premise | RuleId::Combine) {
        return Err(Error::Internal(format!("{rule} has no schema")));
    }
    b.check_vars(rule)?;
    let v = |name: &str| b.require(rule, name).cloned();
    let h = |slot: &str, d: Dependency| (slot.to_string(), d);
    let (hypotheses, conclusions) = match rule {
        RuleId::Reflexivity => {
            let (x, y) = (v("X")?, v("Y")?);
            (vec![], vec![od(cat(&[&x, &y]), x)])
        }
        RuleId::Prefix => {
            let (x, y, z) = (v("X")?, v("Y")?, v("Z")?);
            (
                vec![h("X ↦ Y", od(x.clone(), y.clone()))],
                vec![od(cat(&[&z, &x]), cat(&[&z, &y]))],
            )
        }
        RuleId::Normalization => {
            let (w, x, y, vv) = (v("W")?, v("X")?, v("Y")?, v("V")?);
            (vec![], vec![eq(cat(&[&w, &x, &y, &x, &vv]), cat(&[&w, &x, &y, &vv]))])
        }
        RuleId::Transitivity => {
            let (x, y, z) = (v("X")?, v("Y")?, v("Z")?);
            (
                vec![h("X ↦ Y", od(x.clone(), y.clone())), h("Y ↦ Z", od(y, z.clone()))],
                vec![od(x, z)],
            )
        }
        RuleId::Suffix => {
            let (x, y) = (v("X")?, v("Y")?);
            (vec![h("X ↦ Y", od(x.clone(), y.clone()))], vec![eq(x.clone(), cat(&[&y, &x]))])
        }
        RuleId::Chain => {
            let (x, z) = (v("X")?, v("Z")?);
            let n = b.chain_length()?;
            let ys: Vec<MarkedList> = (1..=n).map(|i| v(&format!("Y{i}"))).collect::<Result<_>>()?;
            let mut hyps = vec![h("X ∼ Y1", oc(x.clone(), ys[0].clone()))];
            for i in 0..n - 1 {
                hyps.push(h(&format!("Y{} ∼ Y{}", i + 1, i + 2), oc(ys[i].clone(), ys[i + 1].clone())));
            }
            hyps.push(h(&format!("Y{n} ∼ Z"), oc(ys[n - 1].clone(), z.clone())));
            for (i, y) in ys.iter().enumerate() {
                hyps.push(h(&format!("Y{0}X ∼ Y{0}Z", i + 1), oc(cat(&[y, &x]), cat(&[y, &z]))));
            }
            (hyps, vec![oc(x, z)])
        }
        RuleId::Union => {
            let (x, y, z) = (v("X")?, v("Y")?, v("Z")?);
            (
                vec![h("X ↦ Y", od(x.clone(), y.clone())), h("X ↦ Z", od(x.clone(), z.clone()))],
                vec![od(x, cat(&[&y, &z]))],
            )
        }
        RuleId::Augmentation => {
            let (x, y, z) = (v("X")?, v("Y")?, v("Z")?);
            (vec![h("X ↦ Y", od(x.clone(), y.clone()))], vec![od(cat(&[&x, &z]), y)])
        }
        RuleId::Shift => {
            let (w, vv, x, y) = (v("W")?, v("V")?, v("X")?, v("Y")?);
            (
                vec![h("W ↔ V", eq(w.clone(), vv.clone())), h("X ↦ Y", od(x.clone(), y.clone()))],
                vec![od(cat(&[&w, &x]), cat(&[&vv, &y]))],
            )
        }
        RuleId::Decomposition => {
            let (x, y, z) = (v("X")?, v("Y")?, v("Z")?);
            (vec![h("X ↦ ZY", od(x.clone(), cat(&[&z, &y])))], vec![od(x, z)])
        }
        RuleId::Replace => {
            let (m, n, x, z) = (v("M")?, v("N")?, v("X")?, v("Z")?);
            (
                vec![h("M ↔ N", eq(m.clone(), n.clone()))],
                vec![eq(cat(&[&x, &m, &z]), cat(&[&x, &n, &z]))],
            )
        }
        RuleId::Eliminate => {
            let (m, x, n, y, w) = (v("M")?, v("X")?, v("N")?, v("Y")?, v("W")?);
            (
                vec![h("X ↦ Y", od(x.clone(), y.clone()))],
                vec![eq(cat(&[&m, &x, &n, &y, &w]), cat(&[&m, &x, &n, &w]))],
            )
        }
        RuleId::LeftEliminate => {
            let (vv, x, y, z) = (v("V")?, v("X")?, v("Y")?, v("Z")?);
            (
                vec![h("X ↦ Y", od(x.clone(), y.clone()))],
                vec![eq(cat(&[&vv, &y, &x, &z]), cat(&[&vv, &x, &z]))],
            )
        }
        RuleId::Drop => {
            let (x, vv, y, z, w) = (v("X")?, v("V")?, v("Y")?, v("Z")?, v("W")?);
            (
                vec![
                    h("X ↦ VYZW", od(x.clone(), cat(&[&vv, &y, &z, &w]))),
                    h("X ↔ V", eq(x.clone(), vv.clone())),
                ],
                vec![od(x, cat(&[&vv, &z]))],
            )
        }
        RuleId::Path => {
            let (x, y, w, vv, m, n) = (v("X")?, v("Y")?, v("W")?, v("V")?, v("M")?, v("N")?);
            (
                vec![
                    h("X ↦ YW", od(x.clone(), cat(&[&y, &w]))),
                    h("Y ↦ VMN", od(y.clone(), cat(&[&vv, &m, &n]))),
                ],
                vec![od(x, cat(&[&y, &m, &w]))],
            )
        }
        RuleId::Partition => {
            let (x, y, z) = (v("X")?, v("Y")?, v("Z")?);
            if y.to_set() != z.to_set() {
                return Err(Error::rule(rule, format!("side condition set(Y) = set(Z) fails: {y} vs {z}")));
            }
            (
                vec![h("X ↦ Y", od(x.clone(), y.clone())), h("X ↦ Z", od(x, z.clone()))],
                vec![eq(y, z)],
            )
        }
        RuleId::DownwardClosure => {
            let (x, y, z, vv) = (v("X")?, v("Y")?, v("Z")?, v("V")?);
            (vec![h("XY ∼ ZV", oc(cat(&[&x, &y]), cat(&[&z, &vv])))], vec![oc(x, z)])
        }
        RuleId::Permutation => {
            let (x, y, xp, yp) = (v("X")?, v("Y")?, v("X'")?, v("Y'")?);
            if xp.to_set() != x.to_set() {
                return Err(Error::rule(rule, format!("side condition set(X') = set(X) fails: {xp} vs {x}")));
            }
            if cat(&[&xp, &yp]).to_set() != cat(&[&x, &y]).to_set() {
                return Err(Error::rule(rule, format!("side condition set(X'Y') = set(XY) fails: {xp}{yp} vs {x}{y}")));
            }
            (vec![h("X ↦ XY", od(x.clone(), cat(&[&x, &y])))], vec![od(xp.clone(), cat(&[&xp, &yp]))])
        }
        RuleId::OdCompose => {
            let (x, y) = (v("X")?, v("Y")?);
            (
                vec![h("X ↦ XY", od(x.clone(), cat(&[&x, &y]))), h("X ∼ Y", oc(x.clone(), y.clone()))],
                vec![od(x, y)],
            )
        }
        RuleId::OdDecompose => {
            let (x, y) = (v("X")?, v("Y")?);
            (
                vec![h("X ↦ Y", od(x.clone(), y.clone()))],
                vec![od(x.clone(), cat(&[&x, &y])), oc(x, y)],
            )
        }
        RuleId::Premise | RuleId::Combine => unreachable!(),
    };
    Ok(Instance { hypotheses, conclusions })
}
