//! Text formats: constraint documents (`.odc`), tables (`.csv`) and proof
//! traces (`.odp`).
//!
//! Constraint documents hold one declaration per line:
//!
//! ```text
//! attrs year,quarter,month     # optional, at most once
//! od [month] -> [quarter]
//! oeq [A,B] <-> [B,A]
//! oc [A] ~ [B]
//! fd {A,B} => {C}
//! const A
//! ```
//!
//! Proof traces are what [`Proof`]'s `Display` prints: a `goal` line and
//! numbered steps `k: <dependency> [Rule(i,j) {X=[A], Y=[]}]`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inference::{Binding, Proof, ProofStep, RuleId};
use crate::instances::TableInstance;
use crate::model::{AttrSet, Attribute, ConstraintSet, Dependency, MarkedList, Row, Schema, Value};
use crate::rewrite::RewriteReport;
use crate::witness::WitnessTable;

/// A parsed constraint document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintDoc {
    /// (1-based line, declaration)
    pub declarations: Vec<(usize, Dependency)>,
    pub universe: Option<AttrSet>,
}

impl ConstraintDoc {
    pub fn to_constraint_set(&self) -> ConstraintSet {
        let set = ConstraintSet::new(self.declarations.iter().map(|(_, d)| d.clone()));
        match &self.universe {
            Some(u) => set.with_attributes(u.iter().cloned()),
            None => set,
        }
    }
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Scanner {
    fn new(text: &str, line: usize) -> Self {
        Scanner { chars: text.chars().collect(), pos: 0, line }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, column: pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn describe_here(&mut self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(c) => format!("`{c}`"),
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        let end = self.pos + token.chars().count();
        if end <= self.chars.len() && self.chars[self.pos..end].iter().copied().eq(token.chars()) {
            self.pos = end;
            Ok(())
        } else {
            let found = self.describe_here();
            Err(self.error(format!("expected `{token}`, found {found}")))
        }
    }

    fn eat(&mut self, token: char) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Letters, digits and `_`, starting with a letter; `extra` admits more
    /// continuation characters.
    fn ident_with(&mut self, what: &str, extra: &[char]) -> Result<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        match self.chars.get(self.pos) {
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => {
                let found = self.describe_here();
                return Err(self.error(format!("expected {what}, found {found}")));
            }
        }
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_ascii_alphanumeric() || c == '_' || extra.contains(&c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((start, self.chars[start..self.pos].iter().collect()))
    }

    fn attribute(&mut self) -> Result<Attribute> {
        self.ident_with("an attribute name", &[]).map(|(_, s)| Attribute::new(s))
    }

    fn items(&mut self, open: char, close: char) -> Result<Vec<Attribute>> {
        self.expect(&open.to_string())?;
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.attribute()?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(",")
                .map_err(|_| {
                    let found = self.describe_here();
                    self.error(format!("expected `,` or `{close}`, found {found}"))
                })?;
        }
    }

    fn list(&mut self) -> Result<MarkedList> {
        self.items('[', ']').map(MarkedList::new)
    }

    fn set(&mut self) -> Result<AttrSet> {
        self.items('{', '}').map(|v| v.into_iter().collect())
    }

    fn dependency(&mut self) -> Result<Dependency> {
        let (start, kw) = self.ident_with("a dependency keyword", &[])?;
        Ok(match kw.as_str() {
            "od" => {
                let l = self.list()?;
                self.expect("->")?;
                Dependency::od(l, self.list()?)
            }
            "oeq" => {
                let l = self.list()?;
                self.expect("<->")?;
                Dependency::equiv(l, self.list()?)
            }
            "oc" => {
                let l = self.list()?;
                self.expect("~")?;
                Dependency::compat(l, self.list()?)
            }
            "fd" => {
                let l = self.set()?;
                self.expect("=>")?;
                Dependency::fd(l, self.set()?)
            }
            "const" => Dependency::constant(self.attribute()?),
            other => return Err(self.error_at(start, format!("unknown keyword `{other}`"))),
        })
    }

    fn finish(&mut self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            let found = self.describe_here();
            Err(self.error(format!("unexpected {found} after declaration")))
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(char::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            let found = self.describe_here();
            return Err(self.error(format!("expected a number, found {found}")));
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().map_err(|_| self.error_at(start, "number out of range"))
    }
}

/// Text before any `#`.
fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(head, _)| head)
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, strip_comment(l.strip_suffix('\r').unwrap_or(l))))
}

pub fn parse_constraints(text: &str) -> Result<ConstraintDoc> {
    let mut doc = ConstraintDoc::default();
    for (line, content) in lines(text) {
        let mut s = Scanner::new(content, line);
        if s.at_end() {
            continue;
        }
        let save = s.pos;
        let (start, word) = s.ident_with("a declaration", &[])?;
        if word == "attrs" {
            if doc.universe.is_some() {
                return Err(s.error_at(start, "duplicate `attrs` declaration"));
            }
            let mut u = AttrSet::new();
            if !s.at_end() {
                loop {
                    u.insert(s.attribute()?);
                    if s.at_end() {
                        break;
                    }
                    s.expect(",")?;
                }
            }
            doc.universe = Some(u);
        } else {
            s.pos = save;
            let d = s.dependency()?;
            s.finish()?;
            doc.declarations.push((line, d));
        }
    }
    Ok(doc)
}

/// One dependency on a single line, e.g. a command-line argument.
pub fn parse_dependency(text: &str) -> Result<Dependency> {
    let mut s = Scanner::new(text, 1);
    let d = s.dependency()?;
    s.finish()?;
    Ok(d)
}

/// Canonical document text: an `attrs` line for the universe, then the
/// dependencies in order.
pub fn format_constraints(m: &ConstraintSet) -> String {
    let mut out = String::new();
    if !m.universe().is_empty() {
        let names: Vec<&str> = m.universe().iter().map(Attribute::name).collect();
        let _ = writeln!(out, "attrs {}", names.join(","));
    }
    for d in m.deps() {
        let _ = writeln!(out, "{d}");
    }
    out
}

/// Comma-separated table with a header line. Cells that parse as integers
/// are integers, everything else text; `#` lines are comments.
pub fn parse_table(text: &str) -> Result<TableInstance> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?.clone();
    let mut columns = Vec::with_capacity(header.len());
    for (i, h) in header.iter().enumerate() {
        if h.is_empty() {
            return Err(Error::Table(format!("header column {} has no name", i + 1)));
        }
        columns.push(Attribute::new(h));
    }
    let schema = Schema::new(columns)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let values = record
            .iter()
            .map(|c| c.parse::<i64>().map_or_else(|_| Value::Text(c.to_string()), Value::Int))
            .collect();
        rows.push(Row::new(schema.clone(), values)?);
    }
    TableInstance::new(schema, rows)
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, expected_len, len } => Error::Table(format!(
            "line {}: expected {expected_len} cells, found {len}",
            pos.as_ref().map_or(0, |p| p.line())
        )),
        _ => Error::Table(e.to_string()),
    }
}

pub fn format_table(t: &TableInstance) -> String {
    t.to_string()
}

/// The witness table with its block notes as leading comments;
/// [`parse_table`] reads it back.
pub fn format_witness(w: &WitnessTable) -> String {
    let mut out = String::new();
    for n in &w.notes {
        let _ = writeln!(out, "# rows {}..{}: {}", n.rows.start, n.rows.end, n.source);
    }
    out.push_str(&w.table.to_string());
    out
}

pub fn format_report(r: &RewriteReport) -> String {
    r.to_string()
}

pub fn format_proof(p: &Proof) -> String {
    p.to_string()
}

/// Reads the trace format printed by [`Proof`]. Step numbers must run
/// 1, 2, 3, …; cited steps count from 1.
pub fn parse_proof(text: &str) -> Result<Proof> {
    let mut goal = None;
    let mut steps = Vec::new();
    let mut last_line = 1;
    for (line, content) in lines(text) {
        last_line = line;
        let mut s = Scanner::new(content, line);
        if s.at_end() {
            continue;
        }
        if goal.is_none() {
            s.expect("goal")?;
            goal = Some(s.dependency()?);
            s.finish()?;
            continue;
        }
        let at = s.pos;
        let n = s.number()?;
        if n != steps.len() + 1 {
            return Err(s.error_at(at, format!("expected step {}, found {n}", steps.len() + 1)));
        }
        s.expect(":")?;
        let statement = s.dependency()?;
        s.expect("[")?;
        let (rstart, name) = s.ident_with("a rule name", &[])?;
        let rule: RuleId = name.parse().map_err(|_| s.error_at(rstart, format!("unknown rule `{name}`")))?;
        let mut premises = Vec::new();
        if s.eat('(') {
            loop {
                let at = s.pos;
                let k = s.number()?;
                if k == 0 {
                    return Err(s.error_at(at, "steps are numbered from 1"));
                }
                premises.push(k - 1);
                if s.eat(')') {
                    break;
                }
                s.expect(",")?;
            }
        }
        let mut binding = Binding::new();
        if s.eat('{') && !s.eat('}') {
            loop {
                let (_, var) = s.ident_with("a variable name", &['\''])?;
                s.expect("=")?;
                binding.insert(&var, s.list()?);
                if s.eat('}') {
                    break;
                }
                s.expect(",")?;
            }
        }
        s.expect("]")?;
        s.finish()?;
        steps.push(ProofStep::new(statement, rule, premises, binding));
    }
    let goal = goal.ok_or_else(|| Error::Syntax { line: last_line, column: 1, message: "missing `goal` line".into() })?;
    if steps.is_empty() {
        return Err(Error::Syntax { line: last_line, column: 1, message: "a proof needs at least one step".into() });
    }
    Proof::new(steps, goal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syntax(r: Result<impl std::fmt::Debug>) -> (usize, usize) {
        match r {
            Err(Error::Syntax { line, column, .. }) => (line, column),
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn declarations() {
        let doc = parse_constraints("# calendar\nattrs year\nod [month] -> [quarter]\n\nconst A # trailing\n").unwrap();
        assert_eq!(doc.universe, Some(AttrSet::of(&["year"])));
        assert_eq!(doc.declarations[0], (3, Dependency::od(MarkedList::of(&["month"]), MarkedList::of(&["quarter"]))));
        assert_eq!(doc.declarations[1].1, Dependency::constant(Attribute::new("A")));
        let od = parse_dependency("od [] -> [A]").unwrap();
        let c = parse_dependency("const A").unwrap();
        assert!(crate::decide::implies(&ConstraintSet::new([od.clone()]), &c).unwrap());
        assert!(crate::decide::implies(&ConstraintSet::new([c]), &od).unwrap());
        assert_eq!(
            parse_dependency("fd {A,B}=>{}").unwrap(),
            Dependency::fd(AttrSet::of(&["A", "B"]), AttrSet::new())
        );
        assert!(parse_dependency("oc [date_id] ~ [Y2]").is_ok());
    }

    #[test]
    fn error_positions() {
        assert_eq!(syntax(parse_dependency("od [A,] -> [B]")), (1, 7));
        assert_eq!(syntax(parse_dependency("od [A,,B] -> [C]")), (1, 7));
        assert_eq!(syntax(parse_dependency("od [A] => [B]")), (1, 8));
        assert_eq!(syntax(parse_dependency("xx [A]")), (1, 1));
        assert_eq!(syntax(parse_dependency("od [A] -> [B] junk")), (1, 15));
        assert_eq!(syntax(parse_dependency("od [1A] -> [B]")), (1, 5));
        assert_eq!(syntax(parse_constraints("attrs A\n\n  attrs B")), (3, 3));
        assert_eq!(syntax(parse_constraints("od [A] -> [B]\noc [A] ~ [B")), (2, 12));
    }

    #[test]
    fn constraint_round_trip() {
        let text = "attrs A,B,C,D\nod [A,B] -> [C]\noeq [A] <-> [B,A]\noc [] ~ [D]\nfd {A} => {B,C}\nconst D\n";
        let doc = parse_constraints(text).unwrap();
        assert_eq!(format_constraints(&doc.to_constraint_set()), text);
    }

    #[test]
    fn tables() {
        let t = parse_table("A,B,C,D,E,F\n3,2,0,4,7,9\n3,2,1,3,8,9\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.to_string(), "A,B,C,D,E,F\n3,2,0,4,7,9\n3,2,1,3,8,9\n");
        assert!(parse_table("A,B\n").unwrap().is_empty());
        let err = parse_table("A,B,C,D,E,F\n3,2,0,4,7,9\n3,2,x,4,7,9\n").unwrap_err();
        assert!(err.to_string().contains("`C`"), "{err}");
        let err = parse_table("A,B\n1,2\n1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let t = parse_table("name,n\nann, 3\n").unwrap();
        assert_eq!(t.rows()[0].values()[0], Value::Text("ann".into()));
    }

    #[test]
    fn proof_round_trip() {
        let text = "goal od [A] -> [C]\n1: od [A] -> [B] [Premise]\n2: od [B] -> [C] [Premise]\n3: od [A] -> [C] [Tran(1,2) {X=[A], Y=[B], Z=[C]}]\n";
        let p = parse_proof(text).unwrap();
        assert_eq!(p.steps()[2].premises, vec![0, 1]);
        assert_eq!(format_proof(&p), text);
        assert_eq!(syntax(parse_proof("goal od [A] -> [B]\n2: od [A] -> [B] [Premise]")), (2, 1));
        assert_eq!(syntax(parse_proof("goal od [A] -> [B]\n1: od [A] -> [B] [Nope]")), (2, 19));
        assert_eq!(syntax(parse_proof("goal od [A] -> [B]\n")), (1, 1));
        assert_eq!(syntax(parse_proof("goal od [A] -> [B]\n1: od [A] -> [B] [Tran(0)]")), (2, 24));
    }
}
