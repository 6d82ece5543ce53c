//! The axioms, derived rules, proofs, proof checking and proof search.
//!
//! Statements in a proof are compared modulo canonical lists: a step is a
//! valid application of a rule when every order dependency it asserts is
//! asserted by the rule's conclusion, and every hypothesis of the rule is
//! asserted by one of the cited steps.

mod facts;
mod fd;
mod rules;
mod search;
mod traces;

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{ConstraintSet, Dependency};

pub use fd::{fd_to_od, od_to_fd};
pub use rules::{Binding, RuleId};
pub use search::{search_proof, Budget, SearchOutcome, SearchStats};

use facts::{covered_by_union, covers, same_facts};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofStep {
    pub statement: Dependency,
    pub rule: RuleId,
    /// Indices (0-based) of earlier steps.
    pub premises: Vec<usize>,
    pub binding: Binding,
}

impl ProofStep {
    pub fn new(statement: Dependency, rule: RuleId, premises: Vec<usize>, binding: Binding) -> Self {
        ProofStep { statement, rule, premises, binding }
    }

    pub fn premise(statement: Dependency) -> Self {
        ProofStep::new(statement, RuleId::Premise, vec![], Binding::new())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    steps: Vec<ProofStep>,
    goal: Dependency,
}

impl Proof {
    pub fn new(steps: Vec<ProofStep>, goal: Dependency) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Shape("a proof needs at least one step".into()));
        }
        Ok(Proof { steps, goal })
    }

    /// A proof whose goal is its last statement.
    pub fn from_steps(steps: Vec<ProofStep>) -> Result<Self> {
        let goal = steps
            .last()
            .ok_or_else(|| Error::Shape("a proof needs at least one step".into()))?
            .statement
            .clone();
        Proof::new(steps, goal)
    }

    pub fn steps(&self) -> &[ProofStep] {
        &self.steps
    }

    pub fn goal(&self) -> &Dependency {
        &self.goal
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Uses only axioms, premises and combinations.
    pub fn is_primitive(&self) -> bool {
        self.steps.iter().all(|s| s.rule.is_primitive())
    }
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}", self.statement, self.rule)?;
        if !self.premises.is_empty() {
            let refs: Vec<String> = self.premises.iter().map(|p| (p + 1).to_string()).collect();
            write!(f, "({})", refs.join(","))?;
        }
        if !self.binding.is_empty() {
            write!(f, " {}", self.binding)?;
        }
        f.write_str("]")
    }
}

/// Trace format: a `goal` line, then one numbered line per step. Step
/// numbers and cited premises count from 1.
impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "goal {}", self.goal)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{}: {}", i + 1, s)?;
        }
        Ok(())
    }
}

/// Why a proof was rejected. `step` is 0-based; `None` means the proof as a
/// whole (its goal) is at fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofError {
    pub step: Option<usize>,
    pub reason: String,
}

impl fmt::Display for ProofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {}: {}", i + 1, self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

impl std::error::Error for ProofError {}

/// Checks one step against the steps before it.
pub(crate) fn check_step(m: &ConstraintSet, before: &[ProofStep], step: &ProofStep) -> std::result::Result<(), String> {
    for &p in &step.premises {
        if p >= before.len() {
            return Err(format!("cites step {}, which is not earlier", p + 1));
        }
    }
    let cited: Vec<&Dependency> = step.premises.iter().map(|&p| &before[p].statement).collect();
    match step.rule {
        RuleId::Premise => {
            if !step.premises.is_empty() || !step.binding.is_empty() {
                return Err("a premise step takes no citations or binding".into());
            }
            if m.iter().any(|d| covers(d, &step.statement)) {
                Ok(())
            } else {
                Err(format!("{} is not in the constraint set", step.statement))
            }
        }
        RuleId::Combine => {
            if cited.is_empty() {
                return Err("Comb needs at least one cited step".into());
            }
            if !step.binding.is_empty() {
                return Err("Comb takes no binding".into());
            }
            if covered_by_union(cited.iter().copied(), &step.statement) {
                Ok(())
            } else {
                Err(format!("{} does not follow from the cited steps", step.statement))
            }
        }
        rule => {
            if rule.is_derived() {
                traces::validated(rule).map_err(|e| e.to_string())?;
            }
            let inst = rules::instantiate(rule, &step.binding).map_err(|e| e.to_string())?;
            if !covered_by_union(inst.conclusions.iter(), &step.statement) {
                let concl: Vec<String> = inst.conclusions.iter().map(|d| d.to_string()).collect();
                return Err(format!(
                    "{} is not the conclusion {} under {}",
                    step.statement,
                    concl.join(", "),
                    step.binding
                ));
            }
            let mut used = vec![false; cited.len()];
            for (slot, hyp) in &inst.hypotheses {
                // a citation may serve several hypotheses and vice versa
                let mut matched = false;
                for (j, c) in cited.iter().enumerate() {
                    if covers(c, hyp) {
                        used[j] = true;
                        matched = true;
                    }
                }
                if !matched {
                    return Err(format!("hypothesis {slot} ({hyp}) is not among the cited steps"));
                }
            }
            if let Some(j) = used.iter().position(|u| !u) {
                return Err(format!(
                    "cited step {} matches no hypothesis of {rule}",
                    step.premises[j] + 1
                ));
            }
            Ok(())
        }
    }
}

/// Checks a proof, reporting the first bad step.
pub fn verify_proof(m: &ConstraintSet, p: &Proof) -> std::result::Result<(), ProofError> {
    for (i, step) in p.steps.iter().enumerate() {
        check_step(m, &p.steps[..i], step).map_err(|reason| ProofError { step: Some(i), reason })?;
    }
    let last = &p.steps.last().expect("non-empty").statement;
    if !same_facts(last, &p.goal) {
        return Err(ProofError {
            step: None,
            reason: format!("last statement {last} is not the goal {}", p.goal),
        });
    }
    Ok(())
}

pub fn check_proof(m: &ConstraintSet, p: &Proof) -> bool {
    verify_proof(m, p).is_ok()
}

fn apply(rule: RuleId, binding: &Binding, premises: &[Dependency]) -> Result<Vec<Dependency>> {
    let inst = rules::instantiate(rule, binding)?;
    if premises.len() != inst.hypotheses.len() {
        return Err(Error::rule(
            rule,
            format!("expected {} premises, got {}", inst.hypotheses.len(), premises.len()),
        ));
    }
    for (i, ((slot, hyp), given)) in inst.hypotheses.iter().zip(premises).enumerate() {
        if !covers(given, hyp) {
            return Err(Error::rule(
                rule,
                format!("premise {} does not match slot {slot}: expected {hyp}, got {given}", i + 1),
            ));
        }
    }
    Ok(inst.conclusions)
}

/// Applies one of the six axioms. Premises are matched positionally against
/// the schema's hypotheses.
pub fn apply_axiom(rule: RuleId, binding: &Binding, premises: &[Dependency]) -> Result<Dependency> {
    if !rule.is_axiom() {
        return Err(Error::rule(rule, "not an axiom"));
    }
    Ok(apply(rule, binding, premises)?.remove(0))
}

/// Applies a derived rule. Every rule has a single conclusion except
/// `OdDecompose`, which yields `X ↦ XY` and `X ∼ Y`.
pub fn apply_derived(rule: RuleId, binding: &Binding, premises: &[Dependency]) -> Result<Vec<Dependency>> {
    if !rule.is_derived() {
        return Err(Error::rule(rule, "not a derived rule"));
    }
    traces::validated(rule)?;
    apply(rule, binding, premises)
}

/// The axiom-level proof of a derived rule instance: its hypotheses as
/// premise steps followed by the expansion.
pub fn derived_rule_proof(rule: RuleId, binding: &Binding) -> Result<(ConstraintSet, Proof)> {
    let inst = rules::instantiate(rule, binding)?;
    let hyps: Vec<Dependency> = inst.hypotheses.into_iter().map(|(_, d)| d).collect();
    let m = ConstraintSet::new(hyps.clone());
    let mut steps: Vec<ProofStep> = hyps.iter().cloned().map(ProofStep::premise).collect();
    let premises: Vec<usize> = (0..steps.len()).collect();
    let goal = inst.conclusions[0].clone();
    let last = expand_step(&mut steps, &ProofStep::new(goal.clone(), rule, premises, binding.clone()))?;
    debug_assert_eq!(last + 1, steps.len());
    Ok((m, Proof::new(steps, goal)?))
}

/// Rewrites a valid proof so it uses only axioms, premises and
/// combinations.
pub fn expand(m: &ConstraintSet, p: &Proof) -> Result<Proof> {
    verify_proof(m, p).map_err(|e| Error::Precondition(format!("cannot expand an invalid proof: {e}")))?;
    let mut out = Vec::new();
    let mut index = Vec::with_capacity(p.steps.len());
    for step in &p.steps {
        let premises = step.premises.iter().map(|&i| index[i]).collect();
        let remapped = ProofStep::new(step.statement.clone(), step.rule, premises, step.binding.clone());
        index.push(expand_step(&mut out, &remapped)?);
    }
    Proof::new(out, p.goal.clone())
}

/// Appends `step` (whose premises index into `out`) in primitive form and
/// returns the index of the step establishing its statement.
fn expand_step(out: &mut Vec<ProofStep>, step: &ProofStep) -> Result<usize> {
    if step.rule.is_primitive() {
        out.push(step.clone());
        return Ok(out.len() - 1);
    }
    let inst = rules::instantiate(step.rule, &step.binding)?;
    let hyp_at: Vec<usize> = inst
        .hypotheses
        .iter()
        .map(|(slot, hyp)| {
            step.premises
                .iter()
                .copied()
                .find(|&i| covers(&out[i].statement, hyp))
                .ok_or_else(|| Error::rule(step.rule, format!("no cited step matches {slot}")))
        })
        .collect::<Result<_>>()?;
    let tpl = traces::template(step.rule, &step.binding)?;
    let mut local = Vec::with_capacity(tpl.steps.len());
    for ts in &tpl.steps {
        let premises = ts
            .refs
            .iter()
            .map(|r| match r {
                traces::Ref::Hyp(h) => hyp_at[*h],
                traces::Ref::Step(j) => local[*j],
            })
            .collect();
        let sub = ProofStep::new(ts.statement.clone(), ts.rule, premises, ts.binding.clone());
        local.push(expand_step(out, &sub)?);
    }
    let established: Vec<usize> = tpl.conclusions.iter().map(|&j| local[j]).collect();
    if let [only] = established[..] {
        if out[only].statement == step.statement {
            return Ok(only);
        }
    }
    out.push(ProofStep::new(step.statement.clone(), RuleId::Combine, established, Binding::new()));
    Ok(out.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decide::implies;
    use crate::model::MarkedList;

    fn l(n: &[&str]) -> MarkedList {
        MarkedList::of(n)
    }

    fn od(x: &[&str], y: &[&str]) -> Dependency {
        Dependency::od(l(x), l(y))
    }

    #[test]
    fn axiom_examples() {
        let b = Binding::new().with("X", l(&["A"])).with("Y", l(&["B"]));
        assert_eq!(apply_axiom(RuleId::Reflexivity, &b, &[]).unwrap(), od(&["A", "B"], &["A"]));

        let b = Binding::new().with("X", l(&["month"])).with("Y", l(&["quarter"])).with("Z", l(&["year"]));
        let got = apply_axiom(RuleId::Prefix, &b, &[od(&["month"], &["quarter"])]).unwrap();
        assert_eq!(got, od(&["year", "month"], &["year", "quarter"]));

        let b = Binding::new().with("X", l(&["income"])).with("Y", l(&["bracket"]));
        let got = apply_axiom(RuleId::Suffix, &b, &[od(&["income"], &["bracket"])]).unwrap();
        assert_eq!(got, Dependency::equiv(l(&["income"]), l(&["bracket", "income"])));

        let b = Binding::new().with("X", l(&["A"])).with("Y1", l(&["B1"])).with("Z", l(&["C"]));
        let prem = [
            Dependency::compat(l(&["A"]), l(&["B1"])),
            Dependency::compat(l(&["B1"]), l(&["C"])),
            Dependency::compat(l(&["B1", "A"]), l(&["B1", "C"])),
        ];
        assert_eq!(apply_axiom(RuleId::Chain, &b, &prem).unwrap(), Dependency::compat(l(&["A"]), l(&["C"])));
    }

    #[test]
    fn axiom_mismatch_names_the_slot() {
        let b = Binding::new().with("X", l(&["A"])).with("Y", l(&["B"])).with("Z", l(&["C"]));
        let err = apply_axiom(RuleId::Transitivity, &b, &[od(&["A"], &["B"]), od(&["C"], &["B"])]).unwrap_err();
        assert!(matches!(&err, Error::RuleApplication { reason, .. } if reason.contains("Y ↦ Z")), "{err}");
        let b = Binding::new().with("X", l(&["A"]));
        assert!(matches!(apply_axiom(RuleId::Reflexivity, &b, &[]), Err(Error::RuleApplication { .. })));
        assert!(apply_axiom(RuleId::Union, &Binding::new(), &[]).is_err());
    }

    #[test]
    fn derived_examples() {
        let b = Binding::new().with("X", l(&["income"])).with("Y", l(&["bracket"])).with("Z", l(&["taxes"]));
        let got = apply_derived(RuleId::Union, &b, &[od(&["income"], &["bracket"]), od(&["income"], &["taxes"])]).unwrap();
        assert_eq!(got, vec![od(&["income"], &["bracket", "taxes"])]);

        let b = Binding::new()
            .with("X", l(&["time"]))
            .with("Y", l(&["date"]))
            .with("W", l(&["hour"]))
            .with("V", l(&["year"]))
            .with("M", l(&["month"]))
            .with("N", l(&["day"]));
        let prem = [
            od(&["time"], &["date", "hour"]),
            Dependency::equiv(l(&["date"]), l(&["year", "month", "day"])),
        ];
        assert_eq!(apply_derived(RuleId::Path, &b, &prem).unwrap(), vec![od(&["time"], &["date", "month", "hour"])]);

        let b = Binding::new()
            .with("V", l(&["year"]))
            .with("X", l(&["month"]))
            .with("Y", l(&["quarter"]))
            .with("Z", l(&[]));
        let got = apply_derived(RuleId::LeftEliminate, &b, &[od(&["month"], &["quarter"])]).unwrap();
        assert_eq!(got, vec![Dependency::equiv(l(&["year", "quarter", "month"]), l(&["year", "month"]))]);

        let b = Binding::new().with("X", l(&["A"])).with("Y", l(&["B"])).with("Z", l(&["C"]));
        assert!(apply_derived(RuleId::Partition, &b, &[od(&["A"], &["B"]), od(&["A"], &["C"])]).is_err());
    }

    #[test]
    fn every_derived_rule_validates() {
        for rule in RuleId::ALL.into_iter().filter(|r| r.is_derived()) {
            traces::validated(rule).unwrap();
        }
    }

    #[test]
    fn premise_and_invalid_proofs() {
        let m = ConstraintSet::new([od(&["A"], &["B"])]);
        let p = Proof::from_steps(vec![ProofStep::premise(od(&["A"], &["B"]))]).unwrap();
        assert!(check_proof(&m, &p));
        let p = Proof::from_steps(vec![ProofStep::premise(od(&["B"], &["A"]))]).unwrap();
        assert_eq!(verify_proof(&m, &p).unwrap_err().step, Some(0));
        let p = Proof::new(vec![ProofStep::premise(od(&["A"], &["B"]))], od(&["A"], &["C"])).unwrap();
        assert_eq!(verify_proof(&m, &p).unwrap_err().step, None);
        assert!(Proof::from_steps(vec![]).is_err());
    }

    #[test]
    fn expansion_is_primitive_and_valid() {
        for rule in RuleId::ALL.into_iter().filter(|r| r.is_derived()) {
            for b in traces_bindings(rule) {
                let (m, p) = derived_rule_proof(rule, &b).unwrap();
                assert!(p.is_primitive());
                verify_proof(&m, &p).unwrap_or_else(|e| panic!("{rule}: {e}\n{p}"));
                assert!(implies(&m, p.goal()).unwrap(), "{rule}");
            }
        }
    }

    fn traces_bindings(rule: RuleId) -> Vec<Binding> {
        let vars = rule.variables();
        let generic: Binding = vars.iter().map(|v| (v.to_string(), l(&[v]))).collect();
        match rule {
            RuleId::Partition => vec![Binding::new().with("X", l(&["C"])).with("Y", l(&["A", "B"])).with("Z", l(&["B", "A"]))],
            RuleId::Permutation => vec![Binding::new()
                .with("X", l(&["A", "B"]))
                .with("Y", l(&["C", "D"]))
                .with("X'", l(&["B", "A"]))
                .with("Y'", l(&["D", "C"]))],
            _ => vec![generic],
        }
    }
}
