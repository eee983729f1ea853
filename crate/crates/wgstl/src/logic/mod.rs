//! Formula templates, the structure grammar, crisp semantics, and printing.

pub mod ast;
pub mod crisp;
pub mod parse;
pub mod print;

pub use ast::{
    Expr, FormulaTemplate, GraphKind, OperatorAssignment, Predicate, TemporalKind,
};
pub use crisp::{boolean_sat, crisp_robustness, HardExpr};
pub use parse::parse_structure;
pub use print::{print_formula, print_hardened, print_structure};
