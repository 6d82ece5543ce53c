//! `odengine` — command-line front end.
//!
//! Exit status: 0 for a positive answer, 1 for a negative one, 2 for usage
//! or input errors. Wherever a file is expected, an inline literal wrapped
//! in braces is accepted instead, with `;` separating lines:
//! `-m "{od [month]->[quarter]; attrs year}"`.

use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use odengine::{
    build_armstrong_table, can_substitute_order, classify_violation, closure, decide, format_proof, format_witness,
    parse_constraints, parse_dependency, parse_proof, parse_table, reduce_group_by_with, reduce_order, reduce_order_star,
    search_proof, verify_proof, AttrSet, Attribute, Budget, Classification, ConstraintSet, Dependency, GroupSpec,
    MarkedList, OrderSpec, RewriteReport, SearchOutcome, TableInstance, Verdict,
};

#[derive(Parser)]
#[command(name = "odengine", version, about = "Reasoning about lexicographic order dependencies")]
struct Cli {
    /// Output style.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    /// One `key=value` record per line.
    Records,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dependency against a table.
    Holds {
        #[arg(short, long)]
        table: String,
        #[arg(short, long)]
        dep: String,
    },
    /// Decide whether constraints imply a dependency.
    Imply {
        #[arg(short = 'm', long)]
        constraints: String,
        #[arg(short, long)]
        dep: String,
    },
    /// List the implied canonical order dependencies.
    Closure {
        #[arg(short = 'm', long)]
        constraints: String,
        /// Longest list considered.
        #[arg(long, default_value_t = 2)]
        max_len: usize,
    },
    /// Search for an axiom-level proof.
    Prove {
        #[arg(short = 'm', long)]
        constraints: String,
        #[arg(short, long)]
        dep: String,
        #[arg(long, default_value_t = Budget::default().max_depth)]
        depth: usize,
    },
    /// Check a proof trace.
    Verify {
        #[arg(short = 'm', long)]
        constraints: String,
        #[arg(short, long)]
        proof: String,
    },
    /// Reduce an order-by list.
    Reduce {
        #[arg(short = 'm', long)]
        constraints: String,
        /// Comma-separated attribute list.
        #[arg(short, long)]
        order: String,
        /// Only use functional dependencies of the prefix.
        #[arg(long)]
        fd_only: bool,
    },
    /// Reduce a group-by set.
    ReduceGroup {
        #[arg(short = 'm', long)]
        constraints: String,
        #[arg(short, long)]
        group: String,
        /// Attributes to keep in preference to others.
        #[arg(long, default_value = "")]
        prefer: String,
    },
    /// Can a stream sorted by the plan order answer the query order?
    Substitute {
        #[arg(short = 'm', long)]
        constraints: String,
        #[arg(long)]
        plan: String,
        #[arg(long)]
        query: String,
    },
    /// Build a table satisfying the constraints and falsifying everything
    /// else.
    Witness {
        #[arg(short = 'm', long)]
        constraints: String,
    },
}

struct Outcome {
    positive: bool,
    text: String,
}

fn load(arg: &str) -> Result<String, String> {
    let t = arg.trim();
    if t.starts_with('{') && t.ends_with('}') {
        Ok(t[1..t.len() - 1].replace(';', "\n"))
    } else {
        fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))
    }
}

fn constraints(arg: &str) -> Result<ConstraintSet, String> {
    parse_constraints(&load(arg)?).map(|d| d.to_constraint_set()).map_err(|e| format!("{arg}: {e}"))
}

fn dependency(arg: &str) -> Result<Dependency, String> {
    parse_dependency(arg).map_err(|e| format!("dependency: {e}"))
}

fn names(arg: &str) -> Result<Vec<Attribute>, String> {
    arg.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            if s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                Ok(Attribute::new(s))
            } else {
                Err(format!("`{s}` is not an attribute name"))
            }
        })
        .collect()
}

fn joined(list: &MarkedList) -> String {
    list.iter().map(Attribute::name).collect::<Vec<_>>().join(",")
}

fn table_records(t: &TableInstance, out: &mut String) {
    let cols = t.schema().columns();
    for (i, row) in t.rows().iter().enumerate() {
        let cells: Vec<String> = cols.iter().zip(row.values()).map(|(c, v)| format!("{c}:{v}")).collect();
        let _ = writeln!(out, "row index={i} values={}", cells.join(","));
    }
}

fn report(r: &RewriteReport, format: Format) -> String {
    match format {
        Format::Text => r.to_string(),
        Format::Records => {
            let mut out = format!("result={}\n", joined(&r.output));
            for d in &r.removed {
                let _ = writeln!(out, "drop attr={} rule={} dep={}", d.attr, d.rule.short_name(), d.because);
            }
            out
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, String> {
    let f = cli.format;
    let err = |e: odengine::Error| e.to_string();
    Ok(match cli.command {
        Command::Holds { table, dep } => {
            let t = parse_table(&load(&table)?).map_err(|e| format!("{table}: {e}"))?;
            let d = dependency(&dep)?;
            match classify_violation(&t, &d).map_err(err)? {
                Classification::Holds => Outcome {
                    positive: true,
                    text: if f == Format::Text { "SATISFIED\n".into() } else { "result=SATISFIED\n".into() },
                },
                Classification::Violated(w) => Outcome {
                    positive: false,
                    text: match f {
                        Format::Text => {
                            format!("VIOLATED(kind={}, rows={},{})\n", w.kind, w.first_index, w.second_index)
                        }
                        Format::Records => format!(
                            "result=VIOLATED kind={} rows={},{}\n",
                            w.kind, w.first_index, w.second_index
                        ),
                    },
                },
            }
        }
        Command::Imply { constraints: c, dep } => {
            let m = constraints(&c)?;
            let d = dependency(&dep)?;
            match decide(&m, &d).map_err(err)? {
                Verdict::Implied => Outcome {
                    positive: true,
                    text: if f == Format::Text { "IMPLIED\n".into() } else { "result=IMPLIED\n".into() },
                },
                Verdict::NotImplied(t) => {
                    let mut text = String::new();
                    match f {
                        Format::Text => {
                            text.push_str("NOT-IMPLIED\n");
                            text.push_str(&t.to_string());
                        }
                        Format::Records => {
                            text.push_str("result=NOT-IMPLIED\n");
                            table_records(&t, &mut text);
                        }
                    }
                    Outcome { positive: false, text }
                }
            }
        }
        Command::Closure { constraints: c, max_len } => {
            let m = constraints(&c)?;
            let mut text = String::new();
            for d in closure(&m, max_len).map_err(err)? {
                match f {
                    Format::Text => {
                        let _ = writeln!(text, "{d}");
                    }
                    Format::Records => {
                        let _ = writeln!(text, "implied dep={d}");
                    }
                }
            }
            Outcome { positive: true, text }
        }
        Command::Prove { constraints: c, dep, depth } => {
            let d = dependency(&dep)?;
            let m = constraints(&c)?.with_attributes(d.attributes().iter().cloned());
            let budget = Budget { max_depth: depth, ..Budget::default() };
            match search_proof(&m, &d, budget).map_err(err)? {
                SearchOutcome::Found(p) => Outcome {
                    positive: true,
                    text: match f {
                        Format::Text => format_proof(&p),
                        Format::Records => {
                            let mut text = "result=FOUND\n".to_string();
                            for (i, s) in p.steps().iter().enumerate() {
                                let _ = writeln!(text, "step {}: {s}", i + 1);
                            }
                            text
                        }
                    },
                },
                SearchOutcome::NotFound(_) => Outcome {
                    positive: false,
                    text: if f == Format::Text { "NOT-FOUND\n".into() } else { "result=NOT-FOUND\n".into() },
                },
            }
        }
        Command::Verify { constraints: c, proof } => {
            let m = constraints(&c)?;
            let p = parse_proof(&load(&proof)?).map_err(|e| format!("{proof}: {e}"))?;
            let m = m.with_attributes(p.steps().iter().flat_map(|s| s.statement.attributes().iter().cloned().collect::<Vec<_>>()));
            match verify_proof(&m, &p) {
                Ok(()) => Outcome {
                    positive: true,
                    text: if f == Format::Text { "VALID\n".into() } else { "result=VALID\n".into() },
                },
                Err(e) => {
                    let step = e.step.map_or("goal".to_string(), |s| (s + 1).to_string());
                    Outcome {
                        positive: false,
                        text: match f {
                            Format::Text => format!("INVALID(step {step}, {})\n", e.reason),
                            Format::Records => format!("result=INVALID step={step} reason={}\n", e.reason),
                        },
                    }
                }
            }
        }
        Command::Reduce { constraints: c, order, fd_only } => {
            let o = OrderSpec::new(MarkedList::new(names(&order)?));
            let m = constraints(&c)?.with_attributes(o.attrs().iter().cloned());
            let r = if fd_only { reduce_order(&o, &m) } else { reduce_order_star(&o, &m) }.map_err(err)?;
            Outcome { positive: true, text: report(&r, f) }
        }
        Command::ReduceGroup { constraints: c, group, prefer } => {
            let g = GroupSpec::new(names(&group)?.into_iter().collect::<AttrSet>());
            let m = constraints(&c)?.with_attributes(g.attrs().iter().cloned());
            let r = reduce_group_by_with(&g, &m, &names(&prefer)?).map_err(err)?;
            Outcome { positive: true, text: report(&r, f) }
        }
        Command::Substitute { constraints: c, plan, query } => {
            let plan = OrderSpec::new(MarkedList::new(names(&plan)?));
            let query = OrderSpec::new(MarkedList::new(names(&query)?));
            let m = constraints(&c)?.with_attributes(plan.attrs().iter().chain(query.attrs().iter()).cloned());
            let yes = can_substitute_order(&plan, &query, &m).map_err(err)?;
            let word = if yes { "SUBSTITUTABLE" } else { "NOT-SUBSTITUTABLE" };
            Outcome {
                positive: yes,
                text: if f == Format::Text { format!("{word}\n") } else { format!("result={word}\n") },
            }
        }
        Command::Witness { constraints: c } => {
            let m = constraints(&c)?;
            let w = build_armstrong_table(&m).map_err(err)?;
            let text = match f {
                Format::Text => format_witness(&w),
                Format::Records => {
                    let mut text = String::new();
                    for n in &w.notes {
                        let _ = writeln!(text, "block rows={}..{} source={}", n.rows.start, n.rows.end, n.source);
                    }
                    table_records(&w.table, &mut text);
                    text
                }
            };
            Outcome { positive: true, text }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => {
            print!("{}", o.text);
            ExitCode::from(if o.positive { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
