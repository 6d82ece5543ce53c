//! Reasoning about order dependencies: checking them against tables,
//! deciding implication, building and checking proofs, constructing
//! counterexample tables, and simplifying `ORDER BY` / `GROUP BY` clauses.

pub mod decide;
pub mod dsl;
pub mod error;
pub mod inference;
pub mod instances;
pub mod model;
pub mod rewrite;
pub mod witness;

pub use decide::{
    canonical_lists, closure, decide, decide_with, equivalent_sets, implies, is_constant, DecideConfig, ModelSet, PairPattern, Rel,
    Verdict,
};
pub use inference::{
    apply_axiom, apply_derived, check_proof, derived_rule_proof, expand, search_proof, verify_proof, Binding, Budget, Proof, ProofError,
    ProofStep, RuleId, SearchOutcome,
};
pub use error::{Error, Result};
pub use instances::{classify_violation, holds, Classification, TableInstance, ViolationKind, ViolationWitness};
pub use model::{lex_compare, AttrSet, Attribute, ConstraintSet, Dependency, LexOrder, MarkedList, Row, Schema, Value};
pub use rewrite::{
    can_substitute_order, reduce_group_by, reduce_group_by_with, reduce_order, reduce_order_star, GroupSpec, OrderSpec, Removal,
    RewriteKind, RewriteReport,
};
pub use witness::{
    append, build_armstrong_table, build_empty_context_swap, build_split_table, build_swap_table, maximal_contexts, BlockNote,
    Context, MaximalContext, WitnessTable,
};
pub use dsl::{
    format_constraints, format_proof, format_report, format_table, format_witness, parse_constraints, parse_dependency,
    parse_proof, parse_table, ConstraintDoc,
};
