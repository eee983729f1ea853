//! Standalone formula files: a structure text plus concrete operator
//! choices and predicate values, enough to evaluate or synthesize data
//! without a trained model.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use wgstl::{parse_structure, Error, HardExpr, OperatorAssignment, Predicate, Result};

/// Concrete values of one predicate `a · x > c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateSpec {
    pub a: Vec<f64>,
    pub c: f64,
}

/// A fully determined formula stored on disk.
///
/// `structure_text` may still contain `tempX`/`graphX` slots as long as
/// `operator_assignment` resolves every one of them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaFile {
    pub structure_text: String,
    #[serde(default)]
    pub operator_assignment: OperatorAssignment,
    pub predicates: IndexMap<String, PredicateSpec>,
    /// Graph node at which the formula is evaluated.
    pub root: String,
}

impl FormulaFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::InvalidData(format!("cannot read formula file `{}`: {e}", path.display()))
        })?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: format!("{}: {}", path.display(), e.path()),
            message: e.inner().to_string(),
        })
    }

    /// Resolve into a crisp formula, validating structure, assignment, and
    /// predicate dimensions along the way.
    pub fn hardened(&self) -> Result<HardExpr> {
        let template = parse_structure(&self.structure_text)?;
        let predicates = self
            .predicates
            .iter()
            .map(|(name, spec)| {
                Predicate::new(name.clone(), spec.a.clone(), spec.c)
                    .map(|pred| (name.clone(), pred))
            })
            .collect::<Result<IndexMap<_, _>>>()?;
        template.harden(&self.operator_assignment, &predicates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_hardens() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("formula.json");
        fs::write(
            &path,
            r#"{
                "structure_text": "(tempX [0 1] (exists (pred hot)))",
                "operator_assignment": { "temporal": { "0": "always" }, "graph": {} },
                "predicates": { "hot": { "a": [1.0], "c": 2.0 } },
                "root": "v1"
            }"#,
        )
        .unwrap();
        let file = FormulaFile::load(&path).expect("load");
        let hard = file.hardened().expect("harden");
        assert_eq!(hard.required_horizon(), 1);
        assert_eq!(hard.dim(), 1);
    }

    #[test]
    fn unresolved_slot_is_rejected() {
        let file = FormulaFile {
            structure_text: "(tempX [0 1] (exists (pred hot)))".into(),
            operator_assignment: OperatorAssignment::empty(),
            predicates: IndexMap::from([("hot".to_string(), PredicateSpec { a: vec![1.0], c: 0.0 })]),
            root: "v1".into(),
        };
        assert!(matches!(
            file.hardened(),
            Err(Error::AssignmentMismatch(_))
        ));
    }

    #[test]
    fn schema_error_names_the_field() {
        let dir = tempfile::tempdir().expect("tempdir");
        let path = dir.path().join("bad.json");
        fs::write(&path, r#"{ "structure_text": 3 }"#).unwrap();
        let err = FormulaFile::load(&path).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "got {err:?}");
    }
}
