//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{compile, constraint_set, dependency, fd_closure, lex, list, rng, set, satisfying_table, universe, Check};
use odengine::inference::fd_to_od;
use odengine::{
    append, apply_axiom, apply_derived, build_armstrong_table, canonical_lists, check_proof, classify_violation, decide,
    format_table, holds, parse_proof, parse_table, reduce_group_by, reduce_order_star, verify_proof, AttrSet, Attribute,
    Binding, Classification, ConstraintSet, Dependency, GroupSpec, MarkedList, ModelSet, OrderSpec, Proof, RuleId,
    Verdict, ViolationKind,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn l(n: &[&str]) -> MarkedList {
    MarkedList::of(n)
}

fn od(x: &[&str], y: &[&str]) -> Dependency {
    Dependency::od(l(x), l(y))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn two_row_instance() -> Outcome {
    let t = parse_table(&fixture("two_rows.csv")).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let cases = [
        (od(&["A", "B", "C"], &["F", "E", "D"]), true),
        (od(&["A", "B", "C"], &["F", "D", "E"]), false),
        (Dependency::compat(l(&["A", "B"]), l(&["F", "C"])), true),
        (Dependency::compat(l(&["A", "C"]), l(&["F", "D"])), false),
    ];
    let mut results = Vec::new();
    for (d, expect) in &cases {
        let got = holds(&t, d).map_err(|e| e.to_string())?;
        let class = classify_violation(&t, d).map_err(|e| e.to_string())?;
        results.push((d.clone(), *expect, got, class));
    }
    let elapsed = start.elapsed();
    for (d, expect, got, class) in results {
        ensure(got == expect, || format!("{d}: expected holds={expect}, got {got}"))?;
        if !expect {
            match class {
                Classification::Violated(w) if w.kind == ViolationKind::Swap => {}
                other => return Err(format!("{d}: expected a swap, got {other:?}")),
            }
        }
    }
    ensure(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{elapsed:?} for four verdicts"))
}

fn append_fixture() -> Outcome {
    let left = parse_table(&fixture("append_left.csv")).map_err(|e| e.to_string())?;
    let right = parse_table(&fixture("append_right.csv")).map_err(|e| e.to_string())?;
    let want = parse_table(&fixture("append_expected.csv")).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let got = append(&left, &right).map_err(|e| e.to_string())?;
    ensure(got == want, || format!("append gave\n{got}"))?;
    ensure(format_table(&got) == fixture("append_expected.csv"), || "text differs".into())?;
    // rows from different parts never swap, and split only on [] ↦ X
    let rows = got.int_rows().unwrap();
    let attrs = universe(4);
    let lists: Vec<MarkedList> = {
        let mut v = vec![MarkedList::empty()];
        for a in &attrs {
            v.push(MarkedList::single(a.clone()));
            for b in &attrs {
                v.push(MarkedList::new(vec![a.clone(), b.clone()]));
            }
        }
        v
    };
    let mut checked = 0;
    for x in &lists {
        for y in &lists {
            let d = Dependency::od(x.clone(), y.clone());
            let c = compile(&attrs, &d);
            for s in &rows[..left.len()] {
                for u in &rows[left.len()..] {
                    checked += 1;
                    if !c.on_pair(s, u) {
                        let split = lex(s, u, &idx(&attrs, x)) == std::cmp::Ordering::Equal;
                        ensure(split && x.is_empty(), || format!("cross-part violation of {d} between {s:?} and {u:?}"))?;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_millis(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{elapsed:?}, {checked} cross-part checks"))
}

fn idx(cols: &[Attribute], l: &MarkedList) -> Vec<usize> {
    l.iter().map(|a| cols.iter().position(|c| c == a).unwrap()).collect()
}

const TRACES: [&str; 12] = [
    "union", "augmentation", "shift", "decomposition", "replace", "eliminate", "left_eliminate", "drop", "path",
    "partition", "downward_closure", "permutation",
];

fn premises_of(p: &Proof) -> ConstraintSet {
    let mut m = ConstraintSet::new(p.steps().iter().filter(|s| s.rule == RuleId::Premise).map(|s| s.statement.clone()));
    for s in p.steps() {
        m = m.with_attributes(s.statement.attributes().iter().cloned());
    }
    m
}

fn proof_traces() -> Outcome {
    let texts: Vec<(&str, String)> = TRACES.iter().map(|n| (*n, fixture(&format!("proofs/{n}.odp")))).collect();
    let start = Instant::now();
    let mut steps = 0;
    for (name, text) in &texts {
        let p = parse_proof(text).map_err(|e| format!("{name}: {e}"))?;
        let m = premises_of(&p);
        verify_proof(&m, &p).map_err(|e| format!("{name}: {e}"))?;
        ensure(check_proof(&m, &p), || format!("{name}: check_proof rejected"))?;
        let v = decide(&m, p.goal()).map_err(|e| format!("{name}: {e}"))?;
        ensure(v.is_implied(), || format!("{name}: conclusion {} not implied", p.goal()))?;
        steps += p.len();
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} traces, {steps} steps, {elapsed:?}", texts.len()))
}

fn rewrite_fixtures() -> Outcome {
    let store = |deps: Vec<Dependency>, attrs: &[&str]| {
        ConstraintSet::new(deps).with_attributes(attrs.iter().map(|a| Attribute::new(*a)))
    };
    let start = Instant::now();
    let cases = [
        (store(vec![od(&["month"], &["quarter"])], &["year"]), vec!["year", "quarter", "month"], vec!["year", "month"]),
        (store(vec![od(&["D"], &["B"])], &["A"]), vec!["A", "B", "D"], vec!["A", "D"]),
        (store(vec![od(&["D"], &["B"])], &["A", "C"]), vec!["A", "B", "C", "D"], vec!["A", "B", "C", "D"]),
        (store(vec![od(&["D"], &["B", "C"])], &["A"]), vec!["A", "B", "C", "D"], vec!["A", "D"]),
    ];
    for (m, input, want) in &cases {
        let r = reduce_order_star(&OrderSpec::of(input), m).map_err(|e| e.to_string())?;
        ensure(r.output == l(want), || format!("{input:?} reduced to {}", r.output))?;
    }
    let m = store(vec![Dependency::fd(AttrSet::of(&["month"]), AttrSet::of(&["quarter"]))], &["year"]);
    let r = reduce_group_by(&GroupSpec::of(&["year", "quarter", "month"]), &m).map_err(|e| e.to_string())?;
    ensure(r.output.to_set() == AttrSet::of(&["year", "month"]), || format!("group-by reduced to {}", r.output))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_millis(10), || format!("took {elapsed:?}"))?;
    Ok(format!("five rewrites, {elapsed:?}"))
}

/// A random axiom instance: rule, binding, premises and the conclusion the
/// schema prescribes.
fn axiom_instance(rng: &mut rand_chacha::ChaCha8Rng, attrs: &[Attribute]) -> (RuleId, Binding, Vec<Dependency>, Dependency) {
    let r = |rng: &mut rand_chacha::ChaCha8Rng| list(rng, attrs, 2);
    let cat = |ls: &[&MarkedList]| MarkedList::join(ls.iter().copied());
    match rng.gen_range(0..6) {
        0 => {
            let (x, y) = (r(rng), r(rng));
            let b = Binding::new().with("X", x.clone()).with("Y", y.clone());
            (RuleId::Reflexivity, b, vec![], Dependency::od(cat(&[&x, &y]), x))
        }
        1 => {
            let (x, y, z) = (r(rng), r(rng), r(rng));
            let b = Binding::new().with("X", x.clone()).with("Y", y.clone()).with("Z", z.clone());
            (RuleId::Prefix, b, vec![Dependency::od(x.clone(), y.clone())], Dependency::od(cat(&[&z, &x]), cat(&[&z, &y])))
        }
        2 => {
            let (w, x, y, v) = (r(rng), r(rng), r(rng), r(rng));
            let b = Binding::new().with("W", w.clone()).with("X", x.clone()).with("Y", y.clone()).with("V", v.clone());
            (RuleId::Normalization, b, vec![], Dependency::equiv(cat(&[&w, &x, &y, &x, &v]), cat(&[&w, &x, &y, &v])))
        }
        3 => {
            let (x, y, z) = (r(rng), r(rng), r(rng));
            let b = Binding::new().with("X", x.clone()).with("Y", y.clone()).with("Z", z.clone());
            let prem = vec![Dependency::od(x.clone(), y.clone()), Dependency::od(y, z.clone())];
            (RuleId::Transitivity, b, prem, Dependency::od(x, z))
        }
        4 => {
            let (x, y) = (r(rng), r(rng));
            let b = Binding::new().with("X", x.clone()).with("Y", y.clone());
            (RuleId::Suffix, b, vec![Dependency::od(x.clone(), y.clone())], Dependency::equiv(x.clone(), cat(&[&y, &x])))
        }
        _ => {
            let (x, z) = (r(rng), r(rng));
            let n = rng.gen_range(1..=2);
            let ys: Vec<MarkedList> = (0..n).map(|_| r(rng)).collect();
            let mut b = Binding::new().with("X", x.clone()).with("Z", z.clone());
            for (i, y) in ys.iter().enumerate() {
                b.insert(format!("Y{}", i + 1), y.clone());
            }
            let mut prem = vec![Dependency::compat(x.clone(), ys[0].clone())];
            for w in ys.windows(2) {
                prem.push(Dependency::compat(w[0].clone(), w[1].clone()));
            }
            prem.push(Dependency::compat(ys[n - 1].clone(), z.clone()));
            for y in &ys {
                prem.push(Dependency::compat(cat(&[y, &x]), cat(&[y, &z])));
            }
            (RuleId::Chain, b, prem, Dependency::compat(x, z))
        }
    }
}

fn soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0x5eed_0005);
    let mut tables = 0usize;
    for i in 0..10_000 {
        let n = rng.gen_range(1..=5);
        let attrs = universe(n);
        let (rule, b, prem, want) = axiom_instance(&mut rng, &attrs);
        let got = apply_axiom(rule, &b, &prem).map_err(|e| format!("instance {i} ({rule} {b}): {e}"))?;
        ensure(got == want, || format!("instance {i}: {rule} {b} gave {got}, schema says {want}"))?;
        let m = ConstraintSet::new(prem.clone()).with_attributes(attrs.iter().cloned());
        let v = decide(&m, &got).map_err(|e| e.to_string())?;
        ensure(v.is_implied(), || format!("instance {i}: {got} not implied by {prem:?}"))?;
        let checks: Vec<Check> = prem.iter().map(|d| compile(&attrs, d)).collect();
        let goal = compile(&attrs, &got);
        for _ in 0..100 {
            let t = satisfying_table(&mut rng, &attrs, &checks, 4, 2);
            tables += 1;
            ensure(goal.on(&t), || format!("instance {i}: {got} fails on {:?}", t.rows))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("10000 instances, {tables} tables, {elapsed:?}"))
}

fn completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0x5eed_0006);
    let mut falsified = 0usize;
    for i in 0..200 {
        let n = rng.gen_range(1..=4);
        let attrs = universe(n);
        let m = constraint_set(&mut rng, &attrs, 4, 2);
        let w = build_armstrong_table(&m).map_err(|e| format!("set {i} {:?}: {e}", m.deps()))?;
        for d in m.deps() {
            ensure(holds(&w.table, d).unwrap(), || format!("set {i}: witness violates {d}"))?;
        }
        let models = ModelSet::new(&m).map_err(|e| e.to_string())?;
        let lists = canonical_lists(m.universe(), 3);
        for x in &lists {
            for y in &lists {
                let d = Dependency::od(x.clone(), y.clone());
                if !models.implies(&d).map_err(|e| e.to_string())? {
                    ensure(!holds(&w.table, &d).unwrap(), || {
                        format!("set {i} {:?}: witness satisfies non-implied {d}\n{}", m.deps(), w.table)
                    })?;
                    falsified += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("200 sets, {falsified} non-implied statements falsified, {elapsed:?}"))
}

fn fd_subsumption() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0x5eed_0007);
    let (mut yes, mut no) = (0, 0);
    for i in 0..500 {
        let n = rng.gen_range(1..=5);
        let attrs = universe(n);
        let k = rng.gen_range(0..=4);
        let fds: Vec<(AttrSet, AttrSet)> = (0..k).map(|_| (set(&mut rng, &attrs, 2), set(&mut rng, &attrs, 2))).collect();
        let as_od = |(x, y): &(AttrSet, AttrSet)| {
            fd_to_od(&Dependency::fd(x.clone(), y.clone()), &x.to_list(), &y.to_list()).unwrap()
        };
        let m = ConstraintSet::new(fds.iter().map(as_od)).with_attributes(attrs.iter().cloned());
        let oracle_fds: Vec<(BTreeSet<Attribute>, BTreeSet<Attribute>)> =
            fds.iter().map(|(x, y)| (x.iter().cloned().collect(), y.iter().cloned().collect())).collect();
        for _ in 0..4 {
            let q = (set(&mut rng, &attrs, 3), set(&mut rng, &attrs, 2));
            let closure = fd_closure(&oracle_fds, &q.0.iter().cloned().collect());
            let expect = q.1.iter().all(|a| closure.contains(a));
            let got = decide(&m, &as_od(&q)).map_err(|e| e.to_string())?.is_implied();
            ensure(got == expect, || format!("set {i}: {:?} ⊢ {} => {}: decide {got}, closure {expect}", fds, q.0, q.1))?;
            if expect {
                yes += 1
            } else {
                no += 1
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(yes > 0 && no > 0, || "samples cover only one verdict".into())?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("2000 queries ({yes} implied, {no} not), {elapsed:?}"))
}

fn oracle_self_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(0x5eed_0008);
    let (mut implied, mut refuted) = (0, 0);
    for i in 0..1000 {
        let n = rng.gen_range(1..=4);
        let attrs = universe(n);
        let m = constraint_set(&mut rng, &attrs, 3, 2);
        let theta = dependency(&mut rng, &attrs, 3);
        match decide(&m, &theta).map_err(|e| e.to_string())? {
            Verdict::NotImplied(t) => {
                refuted += 1;
                for d in m.deps() {
                    ensure(holds(&t, d).unwrap(), || format!("pair {i}: counterexample violates {d}"))?;
                }
                ensure(!holds(&t, &theta).unwrap(), || format!("pair {i}: counterexample satisfies {theta}"))?;
            }
            Verdict::Implied => {
                implied += 1;
                let checks: Vec<Check> = m.deps().iter().map(|d| compile(&attrs, d)).collect();
                let goal = compile(&attrs, &theta);
                for _ in 0..1000 {
                    let t = satisfying_table(&mut rng, &attrs, &checks, 5, 3);
                    ensure(goal.on(&t), || format!("pair {i}: {theta} falsified by {:?}", t.rows))?;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("{implied} implied, {refuted} refuted, {elapsed:?}"))
}

fn examples_end_to_end() -> Outcome {
    let start = Instant::now();
    let b = Binding::new()
        .with("X", l(&["time"]))
        .with("Y", l(&["date"]))
        .with("W", l(&["hour"]))
        .with("V", l(&["year"]))
        .with("M", l(&["month"]))
        .with("N", l(&["day"]));
    let path_prem = vec![od(&["time"], &["date", "hour"]), od(&["date"], &["year", "month", "day"])];
    let got = apply_derived(RuleId::Path, &b, &path_prem).map_err(|e| e.to_string())?;
    ensure(got == vec![od(&["time"], &["date", "month", "hour"])], || format!("Path gave {got:?}"))?;
    let b = Binding::new().with("X", l(&["income"])).with("Y", l(&["bracket"])).with("Z", l(&["taxes"]));
    let union_prem = vec![od(&["income"], &["bracket"]), od(&["income"], &["taxes"])];
    let got2 = apply_derived(RuleId::Union, &b, &union_prem).map_err(|e| e.to_string())?;
    ensure(got2 == vec![od(&["income"], &["bracket", "taxes"])], || format!("Union gave {got2:?}"))?;
    for (prem, goal) in [(path_prem, &got[0]), (union_prem, &got2[0])] {
        let m = ConstraintSet::new(prem);
        ensure(decide(&m, goal).unwrap().is_implied(), || format!("{goal} not implied"))?;
        // and through a checked step citing the derived rule
        let rule = if goal.attributes().contains(&Attribute::new("time")) { RuleId::Path } else { RuleId::Union };
        let text = fixture(&format!("proofs/{}.odp", if rule == RuleId::Path { "path" } else { "union" }));
        let p = parse_proof(&text).map_err(|e| e.to_string())?;
        ensure(p.goal() == goal, || format!("trace proves {}", p.goal()))?;
        ensure(check_proof(&m, &p), || format!("{rule} trace rejected"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{elapsed:?}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("relation instance verdicts and swap classification", two_row_instance),
        ("append fixture and cross-part behavior", append_fixture),
        ("derived-rule proof traces", proof_traces),
        ("order-by and group-by rewrites", rewrite_fixtures),
        ("axiom soundness on random instances", soundness),
        ("witness completeness on random sets", completeness),
        ("functional dependency subsumption", fd_subsumption),
        ("two-row oracle self-consistency", oracle_self_consistency),
        ("path and union examples end to end", examples_end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
