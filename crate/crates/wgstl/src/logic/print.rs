//! Deterministic renderings of templates and learned formulas.
//!
//! Three levels of detail:
//! - [`print_structure`]: the canonical one-line structure text, with
//!   `tempX`/`graphX` for flexible slots (exact parse/print round-trip);
//! - [`print_hardened`]: the same with operator slots resolved through an
//!   assignment;
//! - [`print_formula`]: a multi-line rendering annotated with normalized
//!   importance weights and predicate inequalities. Annotations live in `;`
//!   comments, so the output parses back to the hardened template unchanged.

use std::fmt::Write as _;

use crate::diff::params::{ParamStore, SlotKey};
use crate::error::{Error, Result};
use crate::logic::ast::{
    FormulaTemplate, GraphKind, Node, NodeKind, OperatorAssignment, TemporalKind,
};

/// Canonical structure text; `parse_structure(print_structure(t))` equals `t`.
pub fn print_structure(template: &FormulaTemplate) -> String {
    let mut out = String::new();
    write_compact(&mut out, template.arena(), 0, &|kind, _| match kind {
        NodeKind::Temporal { kind: None, .. } => "tempX".to_string(),
        NodeKind::Graph { kind: None } => "graphX".to_string(),
        other => fixed_keyword(other),
    });
    out
}

/// Structure text with every flexible slot resolved through `assignment`.
pub fn print_hardened(
    template: &FormulaTemplate,
    assignment: &OperatorAssignment,
) -> Result<String> {
    template.check_assignment(assignment)?;
    let mut out = String::new();
    write_compact(&mut out, template.arena(), 0, &|kind, id| {
        resolved_keyword(kind, id, assignment)
    });
    Ok(out)
}

/// Human-readable rendering of a hardened formula with its learned
/// parameters: normalized importance weights and predicate inequalities as
/// `;` comments on the operator lines.
///
/// A rendered predicate `name := a1*x1 + … <= c` names the learned decision
/// boundary `a · x = c`; quantitative satisfaction of the predicate is
/// `r = a · x − c` with `r > 0` counted as satisfied.
pub fn print_formula(
    template: &FormulaTemplate,
    assignment: &OperatorAssignment,
    params: &ParamStore,
) -> Result<String> {
    template.check_assignment(assignment)?;
    let mut out = String::new();
    write_annotated(&mut out, template.arena(), 0, 0, assignment, params)?;
    Ok(out)
}

fn fixed_keyword(kind: &NodeKind) -> String {
    match kind {
        NodeKind::Pred(name) => format!("pred {name}"),
        NodeKind::Not => "not".into(),
        NodeKind::And => "and".into(),
        NodeKind::Or => "or".into(),
        NodeKind::Temporal {
            kind: Some(TemporalKind::Always),
            ..
        } => "always".into(),
        NodeKind::Temporal {
            kind: Some(TemporalKind::Eventually),
            ..
        } => "eventually".into(),
        NodeKind::Temporal { kind: None, .. } => "tempX".into(),
        NodeKind::Graph {
            kind: Some(GraphKind::Forall),
        } => "forall".into(),
        NodeKind::Graph {
            kind: Some(GraphKind::Exists),
        } => "exists".into(),
        NodeKind::Graph { kind: None } => "graphX".into(),
    }
}

fn resolved_keyword(kind: &NodeKind, id: usize, assignment: &OperatorAssignment) -> String {
    match kind {
        NodeKind::Temporal { kind: None, .. } => match assignment.temporal[&id] {
            TemporalKind::Always => "always".into(),
            TemporalKind::Eventually => "eventually".into(),
        },
        NodeKind::Graph { kind: None } => match assignment.graph[&id] {
            GraphKind::Forall => "forall".into(),
            GraphKind::Exists => "exists".into(),
        },
        other => fixed_keyword(other),
    }
}

fn write_compact(
    out: &mut String,
    arena: &[Node],
    id: usize,
    keyword: &dyn Fn(&NodeKind, usize) -> String,
) {
    let node = &arena[id];
    out.push('(');
    out.push_str(&keyword(&node.kind, id));
    if let NodeKind::Temporal { k1, k2, .. } = &node.kind {
        let _ = write!(out, " [{k1} {k2}]");
    }
    for &child in &node.children {
        out.push(' ');
        write_compact(out, arena, child, keyword);
    }
    out.push(')');
}

fn write_annotated(
    out: &mut String,
    arena: &[Node],
    id: usize,
    depth: usize,
    assignment: &OperatorAssignment,
    params: &ParamStore,
) -> Result<()> {
    let pad = "  ".repeat(depth);
    let node = &arena[id];
    match &node.kind {
        NodeKind::Pred(name) => {
            let a = params.slot(&SlotKey::PredCoeff(name.clone()))?;
            let c = params.slot(&SlotKey::PredOffset(name.clone()))?[0];
            let _ = writeln!(out, "{pad}(pred {name}) ; {}", fmt_predicate(name, a, c));
        }
        NodeKind::Not => {
            let _ = writeln!(out, "{pad}(not");
            write_annotated(out, arena, node.children[0], depth + 1, assignment, params)?;
            let _ = writeln!(out, "{pad})");
        }
        NodeKind::And | NodeKind::Or => {
            let weights = params.normalized(&SlotKey::ConnWeights(id))?;
            let annot = weights
                .iter()
                .enumerate()
                .map(|(i, w)| format!("w{}={:.4}", i + 1, w))
                .collect::<Vec<_>>()
                .join(", ");
            let kw = if matches!(node.kind, NodeKind::And) {
                "and"
            } else {
                "or"
            };
            let _ = writeln!(out, "{pad}({kw} ; {annot}");
            for &child in &node.children {
                write_annotated(out, arena, child, depth + 1, assignment, params)?;
            }
            let _ = writeln!(out, "{pad})");
        }
        NodeKind::Temporal { k1, k2, .. } => {
            let kw = resolved_keyword(&node.kind, id, assignment);
            let omega = params.normalized(&SlotKey::TemporalWeights(id))?;
            let _ = writeln!(out, "{pad}({kw} [{k1} {k2}] ; omega={}", fmt_vec(&omega));
            write_annotated(out, arena, node.children[0], depth + 1, assignment, params)?;
            let _ = writeln!(out, "{pad})");
        }
        NodeKind::Graph { .. } => {
            let kw = resolved_keyword(&node.kind, id, assignment);
            let mut annots = Vec::new();
            for entry in params.layout().entries() {
                if let SlotKey::NeighborWeights(slot, at) = &entry.key {
                    if *slot == id {
                        let w = params.normalized(&entry.key)?;
                        annots.push(format!("W@{at}={}", fmt_vec(&w)));
                    }
                }
            }
            if annots.is_empty() {
                return Err(Error::UnknownSlot(format!("n{id}.W")));
            }
            let _ = writeln!(out, "{pad}({kw} ; {}", annots[0]);
            for annot in &annots[1..] {
                let _ = writeln!(out, "{pad}  ; {annot}");
            }
            write_annotated(out, arena, node.children[0], depth + 1, assignment, params)?;
            let _ = writeln!(out, "{pad})");
        }
    }
    Ok(())
}

/// `[0.1087, 0.2210, …]` with four decimals.
pub(crate) fn fmt_vec(values: &[f64]) -> String {
    let items = values
        .iter()
        .map(|v| format!("{v:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    format!("[{items}]")
}

/// `name := a1*x1 + a2*x2 − … <= c` with four decimals.
pub(crate) fn fmt_predicate(name: &str, a: &[f64], c: f64) -> String {
    let mut terms = String::new();
    for (j, &aj) in a.iter().enumerate() {
        if j == 0 {
            let _ = write!(terms, "{:.4}*x{}", aj, j + 1);
        } else if aj.is_sign_negative() {
            let _ = write!(terms, " - {:.4}*x{}", -aj, j + 1);
        } else {
            let _ = write!(terms, " + {:.4}*x{}", aj, j + 1);
        }
    }
    format!("{name} := {terms} <= {c:.4}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_structure;

    #[test]
    fn structure_round_trip() {
        let text =
            "(or (tempX [0 6] (graphX (pred p1))) (not (tempX [7 14] (graphX (pred p2)))))";
        let t = parse_structure(text).unwrap();
        assert_eq!(print_structure(&t), text);
        assert_eq!(parse_structure(&print_structure(&t)).unwrap(), t);
    }

    #[test]
    fn hardened_resolves_slots() {
        let t = parse_structure("(tempX [0 2] (graphX (pred p)))").unwrap();
        let mut a = OperatorAssignment::empty();
        a.temporal.insert(0, TemporalKind::Eventually);
        a.graph.insert(1, GraphKind::Forall);
        assert_eq!(
            print_hardened(&t, &a).unwrap(),
            "(eventually [0 2] (forall (pred p)))"
        );
        // Fixed kinds never consult the assignment.
        let t = parse_structure("(always [0 1] (exists (pred p)))").unwrap();
        assert_eq!(
            print_hardened(&t, &OperatorAssignment::empty()).unwrap(),
            "(always [0 1] (exists (pred p)))"
        );
    }

    #[test]
    fn predicate_formatting_matches_reporting_style() {
        let s = fmt_predicate("pi", &[-0.0298, 0.0226, 0.0222, -0.0309], 0.6593);
        assert_eq!(
            s,
            "pi := -0.0298*x1 + 0.0226*x2 + 0.0222*x3 - 0.0309*x4 <= 0.6593"
        );
    }

    #[test]
    fn vector_formatting() {
        assert_eq!(fmt_vec(&[0.0002, 0.0001, 0.9997]), "[0.0002, 0.0001, 0.9997]");
    }
}
