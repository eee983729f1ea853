//! Trainable-parameter storage with stable addressing.
//!
//! Every trainable scalar of a template lives in one flat [`ParamStore`]
//! vector, addressed through a [`ParamLayout`] built deterministically from
//! `(template, graph, root)`: slots appear in template pre-order, and a graph
//! operator gets one neighbor-weight vector per node it can be evaluated at
//! (the root for the outermost quantifier, then neighbors of neighbors for
//! nested ones). Flat storage keeps the optimizer trivial; labels such as
//! `n2.W@Albury` make model files self-describing.
//!
//! Importance weights are stored unconstrained and mapped to strictly
//! positive values as `|raw| + EPS_W`, which keeps gradients defined almost
//! everywhere and cannot collapse a weight to exactly zero. Reported
//! (normalized) weights are `u_m / Σ u` over each aggregation group.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::logic::ast::{FormulaTemplate, NodeKind};

/// Offset added to `|raw|` so effective importance weights stay positive.
pub const EPS_W: f64 = 1e-6;

/// Initial raw value of every importance weight.
pub const INIT_WEIGHT: f64 = 0.5;

/// Address of one parameter group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlotKey {
    /// Predicate coefficient vector `a` (length `d`).
    PredCoeff(String),
    /// Predicate offset `c` (length 1).
    PredOffset(String),
    /// Connective importance weights, one per `and`/`or` child.
    ConnWeights(usize),
    /// Temporal importance weights Ω, one per step of the interval.
    TemporalWeights(usize),
    /// Neighbor importance weights 𝒲 of a graph operator when evaluated at
    /// the named node, one per neighbor in declaration order.
    NeighborWeights(usize, String),
    /// Operator-selection coefficient `b` of a flexible temporal slot.
    TemporalSelect(usize),
    /// Operator-selection coefficient `b` of a flexible graph slot.
    GraphSelect(usize),
}

impl SlotKey {
    /// Canonical label used in model files and diagnostics.
    pub fn label(&self) -> String {
        match self {
            SlotKey::PredCoeff(name) => format!("pred:{name}.a"),
            SlotKey::PredOffset(name) => format!("pred:{name}.c"),
            SlotKey::ConnWeights(id) => format!("n{id}.w"),
            SlotKey::TemporalWeights(id) => format!("n{id}.omega"),
            SlotKey::NeighborWeights(id, node) => format!("n{id}.W@{node}"),
            SlotKey::TemporalSelect(id) | SlotKey::GraphSelect(id) => format!("n{id}.b"),
        }
    }

    /// Whether the slot holds importance weights (positivity-mapped and
    /// normalized for reporting).
    pub fn is_weight(&self) -> bool {
        matches!(
            self,
            SlotKey::ConnWeights(_)
                | SlotKey::TemporalWeights(_)
                | SlotKey::NeighborWeights(_, _)
        )
    }
}

/// One contiguous region of the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutEntry {
    pub key: SlotKey,
    pub label: String,
    pub offset: usize,
    pub len: usize,
}

/// Deterministic slot table for one `(template, graph, root)` combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamLayout {
    entries: Vec<LayoutEntry>,
    by_label: BTreeMap<String, usize>,
    total: usize,
}

impl ParamLayout {
    fn push(&mut self, key: SlotKey, len: usize) {
        let label = key.label();
        let entry = LayoutEntry {
            key,
            label: label.clone(),
            offset: self.total,
            len,
        };
        self.total += len;
        self.by_label.insert(label, self.entries.len());
        self.entries.push(entry);
    }

    /// All entries in layout order.
    pub fn entries(&self) -> &[LayoutEntry] {
        &self.entries
    }

    /// Total number of scalar parameters.
    pub fn total_len(&self) -> usize {
        self.total
    }

    /// Look up an entry by key.
    pub fn entry(&self, key: &SlotKey) -> Result<&LayoutEntry> {
        self.entry_by_label(&key.label())
    }

    /// Look up an entry by its canonical label.
    pub fn entry_by_label(&self, label: &str) -> Result<&LayoutEntry> {
        self.by_label
            .get(label)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| Error::UnknownSlot(label.to_string()))
    }
}

/// Flat storage for every trainable scalar plus the fixed smoothness σ.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore {
    layout: ParamLayout,
    values: Vec<f64>,
    sigma: f64,
}

impl ParamStore {
    /// Build the layout for `template` evaluated at `root` on `graph` with
    /// `dim`-dimensional node values, and initialize every parameter:
    /// predicate coefficients and offsets at 0 (no initial bias), importance
    /// weights at [`INIT_WEIGHT`], operator-selection coefficients at 0 (the
    /// decision threshold of the relaxation).
    ///
    /// Fails if a graph operator can be reached at a node without neighbors,
    /// since its aggregation group would be empty.
    pub fn init(
        template: &FormulaTemplate,
        graph: &Graph,
        root: &str,
        dim: usize,
        sigma: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimMismatch {
                expected: 1,
                got: 0,
            });
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::BadSigma(sigma));
        }
        let root_idx = graph.node_index(root)?;

        let mut layout = ParamLayout {
            entries: Vec::new(),
            by_label: BTreeMap::new(),
            total: 0,
        };
        build_layout(template, graph, 0, &[root_idx], dim, &mut layout)?;

        let mut values = vec![0.0; layout.total_len()];
        for entry in layout.entries() {
            if entry.key.is_weight() {
                values[entry.offset..entry.offset + entry.len].fill(INIT_WEIGHT);
            }
        }
        Ok(ParamStore {
            layout,
            values,
            sigma,
        })
    }

    /// The slot table.
    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    /// The flat raw parameter vector.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access for the optimizer.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Replace the whole parameter vector (for checkpoint restore).
    pub fn set_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                left: self.values.len(),
                right: values.len(),
            });
        }
        self.values.copy_from_slice(values);
        Ok(())
    }

    /// Smoothness parameter σ (fixed, not trained).
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Raw values of one slot.
    pub fn slot(&self, key: &SlotKey) -> Result<&[f64]> {
        let entry = self.layout.entry(key)?;
        Ok(&self.values[entry.offset..entry.offset + entry.len])
    }

    /// Overwrite one slot.
    pub fn set_slot(&mut self, key: &SlotKey, values: &[f64]) -> Result<()> {
        let entry = self.layout.entry(key)?.clone();
        if values.len() != entry.len {
            return Err(Error::LengthMismatch {
                left: entry.len,
                right: values.len(),
            });
        }
        self.values[entry.offset..entry.offset + entry.len].copy_from_slice(values);
        Ok(())
    }

    /// Overwrite one slot addressed by its canonical label.
    pub fn set_slot_by_label(&mut self, label: &str, values: &[f64]) -> Result<()> {
        let key = self.layout.entry_by_label(label)?.key.clone();
        self.set_slot(&key, values)
    }

    /// Strictly positive effective weights `|raw| + EPS_W` of a weight slot.
    pub fn effective_weights(&self, key: &SlotKey) -> Result<Vec<f64>> {
        if !key.is_weight() {
            return Err(Error::UnknownSlot(format!(
                "{} is not an importance-weight slot",
                key.label()
            )));
        }
        Ok(self.slot(key)?.iter().map(|r| r.abs() + EPS_W).collect())
    }

    /// Normalized weights `u_m / Σ u` of a weight slot (the reporting form).
    pub fn normalized(&self, key: &SlotKey) -> Result<Vec<f64>> {
        let u = self.effective_weights(key)?;
        let total: f64 = u.iter().sum();
        Ok(u.into_iter().map(|x| x / total).collect())
    }
}

/// Pre-order layout construction. `eval_nodes` is the sorted set of node
/// indices the subtree rooted at `id` can be evaluated at; graph operators
/// expand it to the union of the nodes' neighbors.
fn build_layout(
    template: &FormulaTemplate,
    graph: &Graph,
    id: usize,
    eval_nodes: &[usize],
    dim: usize,
    layout: &mut ParamLayout,
) -> Result<()> {
    let node = &template.arena()[id];
    match &node.kind {
        NodeKind::Pred(name) => {
            // A predicate name shared across the template shares one
            // parameter slot, so only its first occurrence is registered.
            let key = SlotKey::PredCoeff(name.clone());
            if !layout.by_label.contains_key(&key.label()) {
                layout.push(key, dim);
                layout.push(SlotKey::PredOffset(name.clone()), 1);
            }
        }
        NodeKind::Not => {
            build_layout(template, graph, node.children[0], eval_nodes, dim, layout)?;
        }
        NodeKind::And | NodeKind::Or => {
            layout.push(SlotKey::ConnWeights(id), node.children.len());
            for &child in &node.children {
                build_layout(template, graph, child, eval_nodes, dim, layout)?;
            }
        }
        NodeKind::Temporal { kind, k1, k2 } => {
            layout.push(SlotKey::TemporalWeights(id), k2 - k1 + 1);
            if kind.is_none() {
                layout.push(SlotKey::TemporalSelect(id), 1);
            }
            build_layout(template, graph, node.children[0], eval_nodes, dim, layout)?;
        }
        NodeKind::Graph { kind } => {
            let mut next: Vec<usize> = Vec::new();
            for &v in eval_nodes {
                let neighbors = graph.neighbor_indices(v);
                if neighbors.is_empty() {
                    return Err(Error::NoNeighbors(graph.node_name(v).to_string()));
                }
                layout.push(
                    SlotKey::NeighborWeights(id, graph.node_name(v).to_string()),
                    neighbors.len(),
                );
                next.extend_from_slice(neighbors);
            }
            if kind.is_none() {
                layout.push(SlotKey::GraphSelect(id), 1);
            }
            next.sort_unstable();
            next.dedup();
            build_layout(template, graph, node.children[0], &next, dim, layout)?;
        }
    }
    Ok(())
}
