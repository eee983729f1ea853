//! Learned models and their on-disk format.
//!
//! A [`TrainedModel`] bundles everything needed to classify new
//! trajectories: the structure, the operator assignment for its flexible
//! slots, the parameter store, the graph and root node it was trained
//! against, the dimension names, the config snapshot, and the training log.
//!
//! The file format is a single JSON object. Parameters are stored as
//! `{label, raw, normalized}` entries in layout order — `raw` is the
//! trainable value, `normalized` (present on importance-weight slots) is the
//! human-readable per-group distribution. Loading rebuilds the layout from
//! the structure text and refuses files whose label set does not match
//! exactly, so a model file can never silently drop or invent parameters.
//! Serialization is deterministic: save → load → save reproduces the file
//! byte for byte.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Trajectory};
use crate::diff::forward::{forward, EvalMode};
use crate::diff::params::ParamStore;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::logic::ast::{FormulaTemplate, OperatorAssignment, Predicate};
use crate::logic::crisp::HardExpr;
use crate::logic::parse::parse_structure;
use crate::logic::print::{print_formula, print_structure};

use super::steps::{TrainConfig, TrainingLog};

/// Current model file format version.
pub const FORMAT_VERSION: u32 = 1;

/// A fully trained, evaluable w-GSTL classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    template: FormulaTemplate,
    assignment: OperatorAssignment,
    params: ParamStore,
    graph: Graph,
    root: String,
    dim_names: Vec<String>,
    config: TrainConfig,
    log: TrainingLog,
}

impl TrainedModel {
    /// Assemble and validate a model from its parts.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        template: FormulaTemplate,
        assignment: OperatorAssignment,
        params: ParamStore,
        graph: Graph,
        root: String,
        dim_names: Vec<String>,
        config: TrainConfig,
        log: TrainingLog,
    ) -> Result<Self> {
        config.validate()?;
        template.check_assignment(&assignment)?;
        graph.node_index(&root)?;
        if dim_names.is_empty() {
            return Err(Error::InvalidData("a model needs at least one dimension".into()));
        }
        // The layout must agree with a fresh one built for this combination;
        // this catches a params store initialized against a different graph
        // or root.
        let reference = ParamStore::init(&template, &graph, &root, dim_names.len(), params.sigma())?;
        if reference.layout() != params.layout() {
            return Err(Error::Incompatible(
                "parameter layout does not match the template/graph/root combination".into(),
            ));
        }
        if params.sigma() != config.sigma {
            return Err(Error::BadConfig(format!(
                "parameter store σ = {} disagrees with config σ = {}",
                params.sigma(),
                config.sigma
            )));
        }
        Ok(TrainedModel {
            template,
            assignment,
            params,
            graph,
            root,
            dim_names,
            config,
            log,
        })
    }

    pub fn template(&self) -> &FormulaTemplate {
        &self.template
    }

    pub fn assignment(&self) -> &OperatorAssignment {
        &self.assignment
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn dim_names(&self) -> &[String] {
        &self.dim_names
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    /// The canonical structure text (flexible slots still as `tempX`/`graphX`).
    pub fn structure_text(&self) -> String {
        print_structure(&self.template)
    }

    /// Multi-line rendering with operators resolved and learned parameters
    /// annotated.
    pub fn formula_text(&self) -> Result<String> {
        print_formula(&self.template, &self.assignment, &self.params)
    }

    /// The learned predicates, keyed by name in first-occurrence order.
    pub fn predicates(&self) -> Result<IndexMap<String, Predicate>> {
        let mut out = IndexMap::new();
        for name in self.template.pred_names() {
            let a = self
                .params
                .slot(&crate::diff::params::SlotKey::PredCoeff(name.clone()))?;
            let c = self
                .params
                .slot(&crate::diff::params::SlotKey::PredOffset(name.clone()))?[0];
            out.insert(name.clone(), Predicate::new(name.clone(), a.to_vec(), c)?);
        }
        Ok(out)
    }

    /// The crisp (non-smooth, unweighted) formula defined by the learned
    /// operators and predicates, for exact monitoring.
    pub fn hardened(&self) -> Result<HardExpr> {
        self.template.harden(&self.assignment, &self.predicates()?)
    }

    /// Weighted robustness of one trajectory at the model's root, step 0.
    pub fn robustness(&self, trajectory: &Trajectory) -> Result<f64> {
        let (value, _) = forward(
            &self.template,
            EvalMode::Hardened(&self.assignment),
            &self.params,
            trajectory,
            &self.graph,
            &self.root,
        )?;
        Ok(value)
    }

    /// `+1` when the weighted robustness is nonnegative, else `−1`.
    pub fn classify(&self, trajectory: &Trajectory) -> Result<i32> {
        Ok(if self.robustness(trajectory)? >= 0.0 { 1 } else { -1 })
    }

    /// Percentage of `dataset` samples classified to match their labels.
    pub fn evaluate(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        self.check_compatible(dataset)?;
        let mut correct = 0usize;
        for sample in dataset.samples() {
            correct += usize::from(self.classify(&sample.trajectory)? == sample.label());
        }
        Ok(100.0 * correct as f64 / dataset.len() as f64)
    }

    /// Require the dataset to live on the model's graph with its dimensions.
    pub fn check_compatible(&self, dataset: &Dataset) -> Result<()> {
        if dataset.graph.nodes() != self.graph.nodes()
            || dataset.graph.edges().ne(self.graph.edges())
        {
            return Err(Error::Incompatible(
                "dataset graph differs from the graph the model was trained on".into(),
            ));
        }
        if dataset.dim() != self.dim_names.len() {
            return Err(Error::DimMismatch {
                expected: self.dim_names.len(),
                got: dataset.dim(),
            });
        }
        Ok(())
    }

    /// Serialize to the canonical JSON document (pretty-printed, trailing
    /// newline).
    pub fn to_json_string(&self) -> String {
        let parameters = self
            .params
            .layout()
            .entries()
            .iter()
            .map(|entry| ParamEntryDto {
                label: entry.label.clone(),
                raw: self.params.slot(&entry.key).expect("layout entry").to_vec(),
                normalized: entry
                    .key
                    .is_weight()
                    .then(|| self.params.normalized(&entry.key).expect("weight slot")),
            })
            .collect();
        let dto = ModelFileDto {
            format_version: FORMAT_VERSION,
            structure_text: self.structure_text(),
            root: self.root.clone(),
            dimensions: self.dim_names.clone(),
            operator_assignment: self.assignment.clone(),
            graph: self.graph.clone(),
            parameters,
            config: self.config.clone(),
            training_log: self.log.clone(),
        };
        let mut text = serde_json::to_string_pretty(&dto).expect("model serialization");
        text.push('\n');
        text
    }

    /// Write the model file.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json_string())?;
        Ok(())
    }

    /// Parse a model from its JSON document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let dto: ModelFileDto = serde_path_to_error::deserialize(&mut de).map_err(Error::schema)?;
        if dto.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: dto.format_version,
                expected: FORMAT_VERSION,
            });
        }
        if dto.dimensions.is_empty() {
            return Err(Error::InvalidData("a model needs at least one dimension".into()));
        }
        let template = parse_structure(&dto.structure_text)?;
        let mut params = ParamStore::init(
            &template,
            &dto.graph,
            &dto.root,
            dto.dimensions.len(),
            dto.config.sigma,
        )?;
        let mut filled: BTreeSet<String> = BTreeSet::new();
        for entry in &dto.parameters {
            if !filled.insert(entry.label.clone()) {
                return Err(Error::Incompatible(format!(
                    "model file repeats parameter {}",
                    entry.label
                )));
            }
            params.set_slot_by_label(&entry.label, &entry.raw)?;
        }
        if filled.len() != params.layout().entries().len() {
            let missing = params
                .layout()
                .entries()
                .iter()
                .find(|e| !filled.contains(&e.label))
                .expect("some label is missing");
            return Err(Error::Incompatible(format!(
                "model file is missing parameter {}",
                missing.label
            )));
        }
        TrainedModel::assemble(
            template,
            dto.operator_assignment,
            params,
            dto.graph,
            dto.root,
            dto.dimensions,
            dto.config,
            dto.training_log,
        )
    }

    /// Read a model file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFileDto {
    format_version: u32,
    structure_text: String,
    root: String,
    dimensions: Vec<String>,
    operator_assignment: OperatorAssignment,
    graph: Graph,
    parameters: Vec<ParamEntryDto>,
    config: TrainConfig,
    training_log: TrainingLog,
}

#[derive(Serialize, Deserialize)]
struct ParamEntryDto {
    label: String,
    raw: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalized: Option<Vec<f64>>,
}
