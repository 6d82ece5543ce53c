//! Expansions of the derived rules into axiom steps.
//!
//! Each derived rule carries a template: a short proof whose steps cite the
//! rule's hypotheses (`Ref::Hyp`) or earlier template steps. A template is
//! validated the first time its rule is used, by checking it with every
//! variable bound to a distinct single attribute; validity there carries
//! over to every substitution because canonicalizing a substituted list
//! equals substituting into the canonical list. Rules whose template
//! relies on a side condition are also checked on bindings satisfying it.
//!
//! The templates follow the textbook derivations, with these repairs where a
//! published step does not go through as written:
//!
//! - Union: the prefix step prefixes `X ↦ Z` by `Y`, and transitivity runs
//!   from the suffix step into it.
//! - Shift: the step that assembles `VWX ↦ VX` chains the second
//!   normalization into the first suffix result (only that direction is
//!   needed).
//! - Replace: the final `↔` is assembled from its two directions.
//! - Eliminate: `X ↔ XY` is derived in four steps (two transitivity steps,
//!   one reflexivity step, one combination); the two replace steps insert
//!   and remove `Y` after `X`, around a normalization dropping the second
//!   `Y`; the result is chained in both directions.
//! - Left Eliminate: a single replace step on the suffix result.
//! - Drop: transitivity for `XYZW ↦ XZW` runs from the normalization into
//!   the suffix result.
//! - Path: `X ↦ YM` is obtained by decomposing the second hypothesis to
//!   `Y ↦ V`, eliminating `V` from `YVMN`, and truncating by reflexivity;
//!   the final transitivity cites the union step. The second hypothesis
//!   only needs to be an order dependency.
//! - Partition: `X ↔ XY` is combined from the union step and reflexivity
//!   instead of normalization; `XY ∼ XZ` is derived from `XY ↔ XZ`; chain
//!   runs through `X`; the conclusion `Y ↔ Z` is the chain result restated
//!   under the side condition.
//! - Permutation: one drop per attribute of `Y'` not already in `X'`, then
//!   a union accumulating them in `Y'` order.

use std::sync::OnceLock;

use super::rules::{instantiate, Binding, RuleId};
use super::{check_step, ProofStep};
use crate::error::{Error, Result};
use crate::model::{ConstraintSet, Dependency, MarkedList};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Ref {
    /// The i-th hypothesis of the rule being expanded.
    Hyp(usize),
    /// An earlier step of the template.
    Step(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct TemplateStep {
    pub statement: Dependency,
    pub rule: RuleId,
    pub refs: Vec<Ref>,
    pub binding: Binding,
}

#[derive(Debug, Clone)]
pub(crate) struct Template {
    pub steps: Vec<TemplateStep>,
    /// Steps establishing the rule's conclusions.
    pub conclusions: Vec<usize>,
}

#[derive(Default)]
struct Builder {
    steps: Vec<TemplateStep>,
}

impl Builder {
    fn step(&mut self, statement: Dependency, rule: RuleId, refs: &[Ref], binding: &[(&str, &MarkedList)]) -> Ref {
        let binding = binding.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect();
        self.steps.push(TemplateStep { statement, rule, refs: refs.to_vec(), binding });
        Ref::Step(self.steps.len() - 1)
    }

    fn finish(self, conclusions: &[Ref]) -> Template {
        let conclusions = conclusions
            .iter()
            .map(|r| match r {
                Ref::Step(i) => *i,
                Ref::Hyp(_) => unreachable!("conclusions are template steps"),
            })
            .collect();
        Template { steps: self.steps, conclusions }
    }
}

fn c(parts: &[&MarkedList]) -> MarkedList {
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

use Ref::Hyp;
use RuleId::*;

/// `A ∼ B` from a step establishing `A ↔ B`.
fn compat_from_equiv(t: &mut Builder, a: &MarkedList, b: &MarkedList, ab: Ref) -> Ref {
    let s1 = t.step(od(c(&[a, b]), a.clone()), Reflexivity, &[], &[("X", a), ("Y", b)]);
    let s2 = t.step(eq(a.clone(), c(&[b, a])), Suffix, &[ab], &[("X", a), ("Y", b)]);
    let s3 = t.step(od(c(&[a, b]), c(&[b, a])), Transitivity, &[s1, s2], &[("X", &c(&[a, b])), ("Y", a), ("Z", &c(&[b, a]))]);
    let s4 = t.step(od(c(&[b, a]), b.clone()), Reflexivity, &[], &[("X", b), ("Y", a)]);
    let s5 = t.step(eq(b.clone(), c(&[a, b])), Suffix, &[ab], &[("X", b), ("Y", a)]);
    let s6 = t.step(od(c(&[b, a]), c(&[a, b])), Transitivity, &[s4, s5], &[("X", &c(&[b, a])), ("Y", b), ("Z", &c(&[a, b]))]);
    t.step(oc(a.clone(), b.clone()), Combine, &[s3, s6], &[])
}

/// `X ↔ XY` (and the union step `X ↦ XY`) from `X ↦ Y`, via reflexivity.
fn equiv_with_extension(t: &mut Builder, x: &MarkedList, y: &MarkedList, xy_hyp: Ref) -> (Ref, Ref) {
    let e = MarkedList::empty();
    let refl = t.step(od(x.clone(), x.clone()), Reflexivity, &[], &[("X", x), ("Y", &e)]);
    let union = t.step(od(x.clone(), c(&[x, y])), Union, &[refl, xy_hyp], &[("X", x), ("Y", x), ("Z", y)]);
    let back = t.step(od(c(&[x, y]), x.clone()), Reflexivity, &[], &[("X", x), ("Y", y)]);
    let both = t.step(eq(x.clone(), c(&[x, y])), Combine, &[union, back], &[]);
    (union, both)
}

/// The expansion of a derived rule under a binding.
pub(crate) fn template(rule: RuleId, b: &Binding) -> Result<Template> {
    if !rule.is_derived() {
        return Err(Error::Internal(format!("{rule} is not a derived rule")));
    }
    instantiate(rule, b)?;
    let v = |k: &str| b.get(k).cloned().expect("checked by instantiate");
    let e = MarkedList::empty();
    let mut t = Builder::default();
    let tpl = match rule {
        Union => {
            let (x, y, z) = (v("X"), v("Y"), v("Z"));
            let s3 = t.step(od(c(&[&y, &x]), c(&[&y, &z])), Prefix, &[Hyp(1)], &[("X", &x), ("Y", &z), ("Z", &y)]);
            let s4 = t.step(od(x.clone(), c(&[&y, &x])), Suffix, &[Hyp(0)], &[("X", &x), ("Y", &y)]);
            let s5 = t.step(od(x.clone(), c(&[&y, &z])), Transitivity, &[s4, s3], &[("X", &x), ("Y", &c(&[&y, &x])), ("Z", &c(&[&y, &z]))]);
            t.finish(&[s5])
        }
        Augmentation => {
            let (x, y, z) = (v("X"), v("Y"), v("Z"));
            let s2 = t.step(od(c(&[&x, &z]), x.clone()), Reflexivity, &[], &[("X", &x), ("Y", &z)]);
            let s3 = t.step(od(c(&[&x, &z]), y.clone()), Transitivity, &[s2, Hyp(0)], &[("X", &c(&[&x, &z])), ("Y", &x), ("Z", &y)]);
            t.finish(&[s3])
        }
        Decomposition => {
            let (x, y, z) = (v("X"), v("Y"), v("Z"));
            let s2 = t.step(od(c(&[&z, &y]), z.clone()), Reflexivity, &[], &[("X", &z), ("Y", &y)]);
            let s3 = t.step(od(x.clone(), z.clone()), Transitivity, &[Hyp(0), s2], &[("X", &x), ("Y", &c(&[&z, &y])), ("Z", &z)]);
            t.finish(&[s3])
        }
        Shift => {
            let (w, vv, x, y) = (v("W"), v("V"), v("X"), v("Y"));
            let vx = c(&[&vv, &x]);
            let vw = c(&[&vv, &w]);
            let vvx = c(&[&vv, &vv, &x]);
            let vwvx = c(&[&vv, &w, &vv, &x]);
            let vwx = c(&[&vv, &w, &x]);
            let wx = c(&[&w, &x]);
            let s3 = t.step(od(vx.clone(), w.clone()), Augmentation, &[Hyp(0)], &[("X", &vv), ("Y", &w), ("Z", &x)]);
            let s4 = t.step(od(vvx.clone(), vw.clone()), Prefix, &[s3], &[("X", &vx), ("Y", &w), ("Z", &vv)]);
            let s5 = t.step(eq(vvx.clone(), vx.clone()), Normalization, &[], &[("W", &e), ("X", &vv), ("Y", &e), ("V", &x)]);
            let s6 = t.step(od(vx.clone(), vw.clone()), Transitivity, &[s5, s4], &[("X", &vx), ("Y", &vvx), ("Z", &vw)]);
            let s7 = t.step(eq(vx.clone(), vwvx.clone()), Suffix, &[s6], &[("X", &vx), ("Y", &vw)]);
            let s8 = t.step(eq(vwx.clone(), vwvx.clone()), Normalization, &[], &[("W", &e), ("X", &vv), ("Y", &w), ("V", &x)]);
            let s9 = t.step(od(vwx.clone(), vx.clone()), Transitivity, &[s8, s7], &[("X", &vwx), ("Y", &vwvx), ("Z", &vx)]);
            let s10 = t.step(od(wx.clone(), vv.clone()), Augmentation, &[Hyp(0)], &[("X", &w), ("Y", &vv), ("Z", &x)]);
            let s11 = t.step(od(wx.clone(), vwx.clone()), Suffix, &[s10], &[("X", &wx), ("Y", &vv)]);
            let s12 = t.step(od(wx.clone(), vx.clone()), Transitivity, &[s11, s9], &[("X", &wx), ("Y", &vwx), ("Z", &vx)]);
            let vy = c(&[&vv, &y]);
            let s13 = t.step(od(vx.clone(), vy.clone()), Prefix, &[Hyp(1)], &[("X", &x), ("Y", &y), ("Z", &vv)]);
            let s14 = t.step(od(wx.clone(), vy.clone()), Transitivity, &[s12, s13], &[("X", &wx), ("Y", &vx), ("Z", &vy)]);
            t.finish(&[s14])
        }
        Replace => {
            let (m, n, x, z) = (v("M"), v("N"), v("X"), v("Z"));
            let (mz, nz) = (c(&[&m, &z]), c(&[&n, &z]));
            let (xmz, xnz) = (c(&[&x, &m, &z]), c(&[&x, &n, &z]));
            let s2 = t.step(od(z.clone(), z.clone()), Reflexivity, &[], &[("X", &z), ("Y", &e)]);
            let s3 = t.step(od(mz.clone(), nz.clone()), Shift, &[Hyp(0), s2], &[("W", &m), ("V", &n), ("X", &z), ("Y", &z)]);
            let s4 = t.step(od(nz.clone(), mz.clone()), Shift, &[Hyp(0), s2], &[("W", &n), ("V", &m), ("X", &z), ("Y", &z)]);
            let s5 = t.step(od(xmz.clone(), xnz.clone()), Prefix, &[s3], &[("X", &mz), ("Y", &nz), ("Z", &x)]);
            let s6 = t.step(od(xnz.clone(), xmz.clone()), Prefix, &[s4], &[("X", &nz), ("Y", &mz), ("Z", &x)]);
            let s7 = t.step(eq(xmz, xnz), Combine, &[s5, s6], &[]);
            t.finish(&[s7])
        }
        Eliminate => {
            let (m, x, n, y, w) = (v("M"), v("X"), v("N"), v("Y"), v("W"));
            let xy = c(&[&x, &y]);
            let xx = c(&[&x, &x]);
            let xyx = c(&[&x, &y, &x]);
            let s2 = t.step(eq(x.clone(), c(&[&y, &x])), Suffix, &[Hyp(0)], &[("X", &x), ("Y", &y)]);
            let s3 = t.step(od(xx.clone(), xyx.clone()), Prefix, &[s2], &[("X", &x), ("Y", &c(&[&y, &x])), ("Z", &x)]);
            let s4 = t.step(eq(x.clone(), xx.clone()), Normalization, &[], &[("W", &e), ("X", &x), ("Y", &e), ("V", &e)]);
            let s5 = t.step(eq(xy.clone(), xyx.clone()), Normalization, &[], &[("W", &e), ("X", &x), ("Y", &y), ("V", &e)]);
            let s6a = t.step(od(x.clone(), xyx.clone()), Transitivity, &[s4, s3], &[("X", &x), ("Y", &xx), ("Z", &xyx)]);
            let s6b = t.step(od(x.clone(), xy.clone()), Transitivity, &[s6a, s5], &[("X", &x), ("Y", &xyx), ("Z", &xy)]);
            let s6c = t.step(od(xy.clone(), x.clone()), Reflexivity, &[], &[("X", &x), ("Y", &y)]);
            let s6 = t.step(eq(x.clone(), xy.clone()), Combine, &[s6b, s6c], &[]);
            let lhs = c(&[&m, &x, &n, &y, &w]);
            let mid1 = c(&[&m, &x, &y, &n, &y, &w]);
            let mid2 = c(&[&m, &x, &y, &n, &w]);
            let rhs = c(&[&m, &x, &n, &w]);
            let nyw = c(&[&n, &y, &w]);
            let nw = c(&[&n, &w]);
            let mx = c(&[&m, &x]);
            let s7 = t.step(eq(lhs.clone(), mid1.clone()), Replace, &[s6], &[("M", &x), ("N", &xy), ("X", &m), ("Z", &nyw)]);
            let s8 = t.step(eq(mid1.clone(), mid2.clone()), Normalization, &[], &[("W", &mx), ("X", &y), ("Y", &n), ("V", &w)]);
            let s9 = t.step(eq(mid2.clone(), rhs.clone()), Replace, &[s6], &[("M", &xy), ("N", &x), ("X", &m), ("Z", &nw)]);
            let s10 = t.step(od(lhs.clone(), mid2.clone()), Transitivity, &[s7, s8], &[("X", &lhs), ("Y", &mid1), ("Z", &mid2)]);
            let s11 = t.step(od(lhs.clone(), rhs.clone()), Transitivity, &[s10, s9], &[("X", &lhs), ("Y", &mid2), ("Z", &rhs)]);
            let s12 = t.step(od(rhs.clone(), mid1.clone()), Transitivity, &[s9, s8], &[("X", &rhs), ("Y", &mid2), ("Z", &mid1)]);
            let s13 = t.step(od(rhs.clone(), lhs.clone()), Transitivity, &[s12, s7], &[("X", &rhs), ("Y", &mid1), ("Z", &lhs)]);
            let s14 = t.step(eq(lhs, rhs), Combine, &[s11, s13], &[]);
            t.finish(&[s14])
        }
        LeftEliminate => {
            let (vv, x, y, z) = (v("V"), v("X"), v("Y"), v("Z"));
            let yx = c(&[&y, &x]);
            let s2 = t.step(eq(x.clone(), yx.clone()), Suffix, &[Hyp(0)], &[("X", &x), ("Y", &y)]);
            let s3 = t.step(eq(c(&[&vv, &y, &x, &z]), c(&[&vv, &x, &z])), Replace, &[s2], &[("M", &yx), ("N", &x), ("X", &vv), ("Z", &z)]);
            t.finish(&[s3])
        }
        Drop => {
            let (x, vv, y, z, w) = (v("X"), v("V"), v("Y"), v("Z"), v("W"));
            let yzw = c(&[&y, &z, &w]);
            let zw = c(&[&z, &w]);
            let xyzw = c(&[&x, &y, &z, &w]);
            let xy = c(&[&x, &y]);
            let xzw = c(&[&x, &z, &w]);
            let xyxzw = c(&[&x, &y, &x, &z, &w]);
            let vzw = c(&[&vv, &z, &w]);
            let vyzw = c(&[&vv, &y, &z, &w]);
            let s3 = t.step(eq(vyzw.clone(), xyzw.clone()), Replace, &[Hyp(1)], &[("M", &vv), ("N", &x), ("X", &e), ("Z", &yzw)]);
            let s4 = t.step(od(x.clone(), xyzw.clone()), Transitivity, &[Hyp(0), s3], &[("X", &x), ("Y", &vyzw), ("Z", &xyzw)]);
            let s5 = t.step(od(x.clone(), xy.clone()), Decomposition, &[s4], &[("X", &x), ("Z", &xy), ("Y", &zw)]);
            let s6 = t.step(od(xzw.clone(), xy.clone()), Augmentation, &[s5], &[("X", &x), ("Y", &xy), ("Z", &zw)]);
            let s7 = t.step(eq(xzw.clone(), xyxzw.clone()), Suffix, &[s6], &[("X", &xzw), ("Y", &xy)]);
            let s8 = t.step(eq(xyxzw.clone(), xyzw.clone()), Normalization, &[], &[("W", &e), ("X", &x), ("Y", &y), ("V", &zw)]);
            let s9 = t.step(od(xyzw.clone(), xzw.clone()), Transitivity, &[s8, s7], &[("X", &xyzw), ("Y", &xyxzw), ("Z", &xzw)]);
            let s10 = t.step(od(x.clone(), xzw.clone()), Transitivity, &[s4, s9], &[("X", &x), ("Y", &xyzw), ("Z", &xzw)]);
            let s11 = t.step(eq(xzw.clone(), vzw.clone()), Replace, &[Hyp(1)], &[("M", &x), ("N", &vv), ("X", &e), ("Z", &zw)]);
            let s12 = t.step(od(x.clone(), vzw.clone()), Transitivity, &[s10, s11], &[("X", &x), ("Y", &xzw), ("Z", &vzw)]);
            let s13 = t.step(od(x.clone(), c(&[&vv, &z])), Decomposition, &[s12], &[("X", &x), ("Z", &c(&[&vv, &z])), ("Y", &w)]);
            t.finish(&[s13])
        }
        Path => {
            let (x, y, w, vv, m, n) = (v("X"), v("Y"), v("W"), v("V"), v("M"), v("N"));
            let vmn = c(&[&vv, &m, &n]);
            let yvmn = c(&[&y, &vv, &m, &n]);
            let yvmnm = c(&[&y, &vv, &m, &n, &m]);
            let yv = c(&[&y, &vv]);
            let ymn = c(&[&y, &m, &n]);
            let ym = c(&[&y, &m]);
            let mn = c(&[&m, &n]);
            let yw = c(&[&y, &w]);
            let ymyw = c(&[&y, &m, &y, &w]);
            let ymw = c(&[&y, &m, &w]);
            let s3 = t.step(od(x.clone(), y.clone()), Decomposition, &[Hyp(0)], &[("X", &x), ("Z", &y), ("Y", &w)]);
            let s4 = t.step(od(x.clone(), vmn.clone()), Transitivity, &[s3, Hyp(1)], &[("X", &x), ("Y", &y), ("Z", &vmn)]);
            let s5 = t.step(od(x.clone(), yvmn.clone()), Union, &[s3, s4], &[("X", &x), ("Y", &y), ("Z", &vmn)]);
            let s6 = t.step(eq(yvmnm.clone(), yvmn.clone()), Normalization, &[], &[("W", &yv), ("X", &m), ("Y", &n), ("V", &e)]);
            let s7 = t.step(od(x.clone(), yvmnm.clone()), Transitivity, &[s5, s6], &[("X", &x), ("Y", &yvmn), ("Z", &yvmnm)]);
            let s8a = t.step(od(y.clone(), vv.clone()), Decomposition, &[Hyp(1)], &[("X", &y), ("Z", &vv), ("Y", &mn)]);
            let s8b = t.step(eq(yvmn.clone(), ymn.clone()), Eliminate, &[s8a], &[("M", &e), ("X", &y), ("N", &e), ("Y", &vv), ("W", &mn)]);
            let s8c = t.step(od(ymn.clone(), ym.clone()), Reflexivity, &[], &[("X", &ym), ("Y", &n)]);
            let s8d = t.step(od(x.clone(), ymn.clone()), Transitivity, &[s7, s8b], &[("X", &x), ("Y", &yvmnm), ("Z", &ymn)]);
            let s8 = t.step(od(x.clone(), ym.clone()), Transitivity, &[s8d, s8c], &[("X", &x), ("Y", &ymn), ("Z", &ym)]);
            let s9 = t.step(od(x.clone(), ymyw.clone()), Union, &[s8, Hyp(0)], &[("X", &x), ("Y", &ym), ("Z", &yw)]);
            let s10 = t.step(eq(ymyw.clone(), ymw.clone()), Normalization, &[], &[("W", &e), ("X", &y), ("Y", &m), ("V", &w)]);
            let s11 = t.step(od(x.clone(), ymw.clone()), Transitivity, &[s9, s10], &[("X", &x), ("Y", &ymyw), ("Z", &ymw)]);
            t.finish(&[s11])
        }
        Partition => {
            let (x, y, z) = (v("X"), v("Y"), v("Z"));
            let (xy, xz) = (c(&[&x, &y]), c(&[&x, &z]));
            // XY ↔ YX, and its counterpart for Z
            let swap_free = |t: &mut Builder, other: &MarkedList, hyp: Ref| {
                let (xo, ox) = (c(&[&x, other]), c(&[other, &x]));
                let suf = t.step(eq(x.clone(), ox.clone()), Suffix, &[hyp], &[("X", &x), ("Y", other)]);
                let (_, ext) = equiv_with_extension(t, &x, other, hyp);
                let a = t.step(od(xo.clone(), ox.clone()), Transitivity, &[ext, suf], &[("X", &xo), ("Y", &x), ("Z", &ox)]);
                let b2 = t.step(od(ox.clone(), xo.clone()), Transitivity, &[suf, ext], &[("X", &ox), ("Y", &x), ("Z", &xo)]);
                let both = t.step(eq(xo, ox), Combine, &[a, b2], &[]);
                (ext, both)
            };
            let (ext_y, s9) = swap_free(&mut t, &y, Hyp(0));
            let (ext_z, s10) = swap_free(&mut t, &z, Hyp(1));
            let s11 = t.step(oc(x.clone(), y.clone()), Combine, &[s9], &[]);
            let s12 = t.step(oc(x.clone(), z.clone()), Combine, &[s10], &[]);
            let a = t.step(od(xy.clone(), xz.clone()), Transitivity, &[ext_y, ext_z], &[("X", &xy), ("Y", &x), ("Z", &xz)]);
            let b2 = t.step(od(xz.clone(), xy.clone()), Transitivity, &[ext_z, ext_y], &[("X", &xz), ("Y", &x), ("Z", &xy)]);
            let s14 = t.step(eq(xy.clone(), xz.clone()), Combine, &[a, b2], &[]);
            let s14c = compat_from_equiv(&mut t, &xy, &xz, s14);
            let s15 = t.step(oc(y.clone(), z.clone()), Chain, &[s11, s12, s14c], &[("X", &y), ("Y1", &x), ("Z", &z)]);
            let s16 = t.step(eq(y, z), Combine, &[s15], &[]);
            t.finish(&[s16])
        }
        DownwardClosure => {
            let (x, y, z, vv) = (v("X"), v("Y"), v("Z"), v("V"));
            let xyzv = c(&[&x, &y, &z, &vv]);
            let zvxy = c(&[&z, &vv, &x, &y]);
            let (xz, zx) = (c(&[&x, &z]), c(&[&z, &x]));
            let s2 = t.step(od(zvxy.clone(), z.clone()), Reflexivity, &[], &[("X", &z), ("Y", &c(&[&vv, &x, &y]))]);
            let s3 = t.step(od(xyzv.clone(), z.clone()), Transitivity, &[Hyp(0), s2], &[("X", &xyzv), ("Y", &zvxy), ("Z", &z)]);
            let s4 = t.step(od(xyzv.clone(), x.clone()), Reflexivity, &[], &[("X", &x), ("Y", &c(&[&y, &z, &vv]))]);
            let s5 = t.step(od(xyzv.clone(), xz.clone()), Union, &[s4, s3], &[("X", &xyzv), ("Y", &x), ("Z", &z)]);
            let s6 = t.step(od(xyzv.clone(), zx.clone()), Union, &[s3, s4], &[("X", &xyzv), ("Y", &z), ("Z", &x)]);
            let s7 = t.step(oc(x, z), Partition, &[s5, s6], &[("X", &xyzv), ("Y", &xz), ("Z", &zx)]);
            t.finish(&[s7])
        }
        Permutation => {
            let (x, y, xp, yp) = (v("X"), v("Y"), v("X'"), v("Y'"));
            let xc = x.canonicalize();
            let xpc = xp.canonicalize();
            let yeff = c(&[&x, &y]).canonicalize().slice(xc.len()..c(&[&x, &y]).canonicalize().len());
            let targets = c(&[&xp, &yp]).canonicalize();
            let targets = targets.slice(xpc.len()..targets.len());
            let mut acc: Option<(Ref, MarkedList)> = None;
            for b_attr in targets.iter() {
                let k = yeff.iter().position(|a| a == b_attr).expect("side condition") + 1;
                let head = yeff.slice(0..k);
                let before = yeff.slice(0..k - 1);
                let tail = yeff.slice(k..yeff.len());
                let last = MarkedList::single(b_attr.clone());
                let x_head = c(&[&x, &head]);
                let xpx = c(&[&xp, &x]);
                let xpx_head = c(&[&xp, &x, &head]);
                let xp_head = c(&[&xp, &head]);
                let s2 = t.step(od(x.clone(), x_head.clone()), Decomposition, &[Hyp(0)], &[("X", &x), ("Z", &x_head), ("Y", &tail)]);
                let s3 = t.step(od(xpx.clone(), xpx_head.clone()), Prefix, &[s2], &[("X", &x), ("Y", &x_head), ("Z", &xp)]);
                let s4 = t.step(eq(xpx.clone(), xp.clone()), Normalization, &[], &[("W", &xp), ("X", &x), ("Y", &e), ("V", &e)]);
                let s5 = t.step(eq(xpx_head.clone(), xp_head.clone()), Normalization, &[], &[("W", &xp), ("X", &x), ("Y", &e), ("V", &head)]);
                let s6a = t.step(od(xp.clone(), xpx_head.clone()), Transitivity, &[s4, s3], &[("X", &xp), ("Y", &xpx), ("Z", &xpx_head)]);
                let s6 = t.step(od(xp.clone(), xp_head.clone()), Transitivity, &[s6a, s5], &[("X", &xp), ("Y", &xpx_head), ("Z", &xp_head)]);
                let s7 = t.step(eq(xp.clone(), xp.clone()), Reflexivity, &[], &[("X", &xp), ("Y", &e)]);
                let s8 = t.step(od(xp.clone(), c(&[&xp, &last])), Drop, &[s6, s7], &[("X", &xp), ("V", &xp), ("Y", &before), ("Z", &last), ("W", &e)]);
                acc = Some(match acc {
                    None => (s8, last),
                    Some((prev, got)) => {
                        let xp_got = c(&[&xp, &got]);
                        let xp_last = c(&[&xp, &last]);
                        let u = t.step(od(xp.clone(), c(&[&xp, &got, &last])), Union, &[prev, s8], &[("X", &xp), ("Y", &xp_got), ("Z", &xp_last)]);
                        (u, c(&[&got, &last]))
                    }
                });
            }
            let fin = match acc {
                Some((r, _)) => t.step(od(xp.clone(), c(&[&xp, &yp])), Combine, &[r], &[]),
                None => t.step(od(xp.clone(), c(&[&xp, &yp])), Reflexivity, &[], &[("X", &xp), ("Y", &e)]),
            };
            t.finish(&[fin])
        }
        OdCompose => {
            let (x, y) = (v("X"), v("Y"));
            let (xy, yx) = (c(&[&x, &y]), c(&[&y, &x]));
            let s3 = t.step(od(x.clone(), yx.clone()), Transitivity, &[Hyp(0), Hyp(1)], &[("X", &x), ("Y", &xy), ("Z", &yx)]);
            let s4 = t.step(od(yx.clone(), y.clone()), Reflexivity, &[], &[("X", &y), ("Y", &x)]);
            let s5 = t.step(od(x.clone(), y.clone()), Transitivity, &[s3, s4], &[("X", &x), ("Y", &yx), ("Z", &y)]);
            t.finish(&[s5])
        }
        OdDecompose => {
            let (x, y) = (v("X"), v("Y"));
            let (xy, yx) = (c(&[&x, &y]), c(&[&y, &x]));
            let s2 = t.step(eq(x.clone(), yx.clone()), Suffix, &[Hyp(0)], &[("X", &x), ("Y", &y)]);
            let (s4, _) = equiv_with_extension(&mut t, &x, &y, Hyp(0));
            let s5 = t.step(od(xy.clone(), x.clone()), Reflexivity, &[], &[("X", &x), ("Y", &y)]);
            let s6 = t.step(od(xy.clone(), yx.clone()), Transitivity, &[s5, s2], &[("X", &xy), ("Y", &x), ("Z", &yx)]);
            let s7 = t.step(od(yx.clone(), xy.clone()), Transitivity, &[s2, s4], &[("X", &yx), ("Y", &x), ("Z", &xy)]);
            let s8 = t.step(oc(x, y), Combine, &[s6, s7], &[]);
            t.finish(&[s4, s8])
        }
        _ => unreachable!("primitive rules have no template"),
    };
    Ok(tpl)
}

fn generic(vars: &[&str]) -> Binding {
    vars.iter()
        .map(|v| (v.to_string(), MarkedList::of(&[v])))
        .collect()
}

/// Bindings a rule's template is validated on.
fn validation_bindings(rule: RuleId) -> Vec<Binding> {
    let l = MarkedList::of;
    match rule {
        Partition => vec![
            Binding::new().with("X", l(&["X"])).with("Y", l(&["A", "B"])).with("Z", l(&["B", "A"])),
            Binding::new().with("X", l(&["X"])).with("Y", l(&["A"])).with("Z", l(&["A"])),
        ],
        Permutation => vec![
            generic(&["X", "Y"]).with("X'", l(&["X"])).with("Y'", l(&["Y"])),
            Binding::new()
                .with("X", l(&["A", "B"]))
                .with("Y", l(&["C", "A", "D"]))
                .with("X'", l(&["B", "A"]))
                .with("Y'", l(&["D", "B", "C"])),
            Binding::new()
                .with("X", l(&["A"]))
                .with("Y", l(&["A"]))
                .with("X'", l(&["A"]))
                .with("Y'", l(&[])),
        ],
        _ => vec![generic(rule.variables())],
    }
}

/// Checks a template as a stand-alone proof from the rule's hypotheses.
pub(crate) fn check_template(rule: RuleId, b: &Binding) -> std::result::Result<(), String> {
    let inst = instantiate(rule, b).map_err(|e| e.to_string())?;
    let tpl = template(rule, b).map_err(|e| e.to_string())?;
    let hyps: Vec<Dependency> = inst.hypotheses.iter().map(|(_, d)| d.clone()).collect();
    let m = ConstraintSet::new(hyps.clone());
    let mut steps: Vec<ProofStep> = hyps
        .iter()
        .map(|d| ProofStep::new(d.clone(), RuleId::Premise, vec![], Binding::new()))
        .collect();
    let nh = steps.len();
    for (i, ts) in tpl.steps.iter().enumerate() {
        let premises = ts
            .refs
            .iter()
            .map(|r| match r {
                Ref::Hyp(h) => *h,
                Ref::Step(j) => nh + j,
            })
            .collect();
        let step = ProofStep::new(ts.statement.clone(), ts.rule, premises, ts.binding.clone());
        check_step(&m, &steps, &step).map_err(|e| format!("template step {}: {e}", i + 1))?;
        steps.push(step);
    }
    let established: Vec<&Dependency> = tpl.conclusions.iter().map(|&i| &steps[nh + i].statement).collect();
    for concl in &inst.conclusions {
        if !super::facts::covered_by_union(established.iter().copied(), concl) {
            return Err(format!("template does not establish {concl}"));
        }
    }
    Ok(())
}

static VALIDATION: [OnceLock<std::result::Result<(), String>>; RuleId::ALL.len()] =
    [const { OnceLock::new() }; RuleId::ALL.len()];

/// Validates the rule's template on first use.
pub(crate) fn validated(rule: RuleId) -> Result<()> {
    if !rule.is_derived() {
        return Ok(());
    }
    let idx = RuleId::ALL.iter().position(|r| *r == rule).expect("listed");
    VALIDATION[idx]
        .get_or_init(|| {
            for b in validation_bindings(rule) {
                check_template(rule, &b)?;
            }
            Ok(())
        })
        .clone()
        .map_err(|reason| Error::rule(rule, format!("derived rule failed self-validation: {reason}")))
}
