//! Graph-based trajectories, labeled samples, datasets, file ingestion, and
//! the preprocessing passes (zero imputation, windowing, train/test split).
//!
//! A [`Trajectory`] assigns a `d`-dimensional real vector to every
//! `(node, time-step)` pair over a finite horizon `h` (time steps `0..=h`).
//! Missing entries are represented as `NaN` in memory (`null` in the
//! structured file format, an empty field in the tabular format) and must be
//! removed by an explicit [`impute_zeros`] pass before evaluation; formula
//! evaluation fails loudly on non-finite values rather than guessing.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Per-node, per-time-step `d`-dimensional values over a finite horizon.
///
/// Values are stored as `values[node][k][dim]` with `node` indexing the
/// owning dataset's graph in declaration order and `k` in `0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    values: Vec<Vec<Vec<f64>>>,
    horizon: usize,
    dim: usize,
}

impl Trajectory {
    /// Build a trajectory from `values[node][k][dim]`.
    ///
    /// All nodes must have the same number of time steps (at least one) and
    /// every row must have the same dimension `d >= 1`. Entries may be `NaN`
    /// (the in-memory missing-value marker) but not infinite.
    pub fn new(values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidData("trajectory has no nodes".into()));
        }
        let steps = values[0].len();
        if steps == 0 {
            return Err(Error::InvalidData("trajectory has no time steps".into()));
        }
        let dim = values[0][0].len();
        if dim == 0 {
            return Err(Error::InvalidData("trajectory dimension is zero".into()));
        }
        for node in &values {
            if node.len() != steps {
                return Err(Error::HorizonMismatch {
                    expected: steps,
                    got: node.len(),
                });
            }
            for row in node {
                if row.len() != dim {
                    return Err(Error::DimMismatch {
                        expected: dim,
                        got: row.len(),
                    });
                }
                if row.iter().any(|x| x.is_infinite()) {
                    return Err(Error::InvalidData(
                        "trajectory contains an infinite value".into(),
                    ));
                }
            }
        }
        Ok(Trajectory {
            values,
            horizon: steps - 1,
            dim,
        })
    }

    /// Largest time index `h`; the trajectory covers steps `0..=h`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Dimension `d` of the per-step value vectors.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nodes covered.
    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    /// The `d`-vector at `(node index, time step)`.
    pub fn values_at(&self, node: usize, k: usize) -> &[f64] {
        &self.values[node][k]
    }

    /// Whether any entry is the `NaN` missing marker.
    pub fn has_missing(&self) -> bool {
        self.values
            .iter()
            .flatten()
            .flatten()
            .any(|x| x.is_nan())
    }

    /// Raw `values[node][k][dim]` storage.
    pub fn raw(&self) -> &Vec<Vec<Vec<f64>>> {
        &self.values
    }
}

/// A trajectory together with its class label (`-1` or `+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub trajectory: Trajectory,
    label: i32,
}

impl Sample {
    /// Pair a trajectory with a label in `{-1, +1}`.
    pub fn new(trajectory: Trajectory, label: i32) -> Result<Self> {
        if label != 1 && label != -1 {
            return Err(Error::BadLabel(label as i64));
        }
        Ok(Sample { trajectory, label })
    }

    /// The class label, `-1` or `+1`.
    pub fn label(&self) -> i32 {
        self.label
    }
}

/// A graph plus labeled samples that all share it (same horizon, same `d`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    dim_names: Vec<String>,
    samples: Vec<Sample>,
}

impl Dataset {
    /// Assemble a dataset, enforcing that every sample matches the graph's
    /// node count and shares one horizon and one dimension `d`.
    pub fn new(graph: Graph, dim_names: Vec<String>, samples: Vec<Sample>) -> Result<Self> {
        if dim_names.is_empty() {
            return Err(Error::InvalidData("dataset needs at least one dimension".into()));
        }
        let d = dim_names.len();
        let mut horizon = None;
        for sample in &samples {
            let t = &sample.trajectory;
            if t.node_count() != graph.node_count() {
                return Err(Error::InvalidData(format!(
                    "sample covers {} nodes but the graph has {}",
                    t.node_count(),
                    graph.node_count()
                )));
            }
            if t.dim() != d {
                return Err(Error::DimMismatch {
                    expected: d,
                    got: t.dim(),
                });
            }
            match horizon {
                None => horizon = Some(t.horizon()),
                Some(h) if h != t.horizon() => {
                    return Err(Error::HorizonMismatch {
                        expected: h,
                        got: t.horizon(),
                    })
                }
                _ => {}
            }
        }
        Ok(Dataset {
            graph,
            dim_names,
            samples,
        })
    }

    /// Names of the `d` value dimensions.
    pub fn dim_names(&self) -> &[String] {
        &self.dim_names
    }

    /// Dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim_names.len()
    }

    /// Shared horizon of all samples; `None` when the dataset is empty.
    pub fn horizon(&self) -> Option<usize> {
        self.samples.first().map(|s| s.trajectory.horizon())
    }

    /// The labeled samples.
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Whether the dataset has no samples.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(positive, negative)` sample counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.samples.iter().filter(|s| s.label() == 1).count();
        (pos, self.samples.len() - pos)
    }

    /// Whether any sample contains the `NaN` missing marker.
    pub fn has_missing(&self) -> bool {
        self.samples.iter().any(|s| s.trajectory.has_missing())
    }

    /// Parse a dataset from the structured text format (see the crate-level
    /// documentation for the schema). Missing values are `null`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let dto: DatasetDto = serde_path_to_error::deserialize(&mut de).map_err(Error::schema)?;
        dto.try_into()
    }

    /// Load the structured format from a file.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    /// Serialize to the structured text format (pretty-printed,
    /// deterministic field and key order).
    pub fn to_json_string(&self) -> String {
        let dto = DatasetDto::from(self);
        let mut out = serde_json::to_string_pretty(&dto).expect("dataset serialization");
        out.push('\n');
        out
    }

    /// Write the structured format to a file.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.to_json_string())?)
    }

    /// Load a dataset from a tabular manifest: one CSV per node with columns
    /// `time,dim_1,…,dim_d` (empty field = missing), plus the manifest
    /// listing node files, edges (or coordinates and a radius), dimensions,
    /// and the label of the assembled sample.
    ///
    /// The result holds a single long sample, typically passed through
    /// [`window`] next.
    pub fn from_tabular_manifest(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let manifest: TabularManifest =
            serde_path_to_error::deserialize(&mut de).map_err(Error::schema)?;

        let graph = match (&manifest.edges, &manifest.coords, manifest.radius_km) {
            (Some(edges), _, None) => Graph::new(
                manifest.nodes.keys().map(String::as_str),
                edges.iter().map(|e| (e.0.as_str(), e.1.as_str())),
            )?,
            (None, Some(coords), Some(radius)) => {
                let mut ordered = IndexMap::new();
                for id in manifest.nodes.keys() {
                    let c = coords.get(id).ok_or_else(|| {
                        Error::InvalidData(format!("no coordinates for node `{id}`"))
                    })?;
                    ordered.insert(id.clone(), *c);
                }
                crate::graph::radius_graph(&ordered, radius)?
            }
            _ => {
                return Err(Error::InvalidData(
                    "manifest must provide either `edges` or both `coords` and `radius_km`"
                        .into(),
                ))
            }
        };

        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let d = manifest.dimensions.len();
        let mut values = Vec::with_capacity(manifest.nodes.len());
        let mut steps = None;
        for (id, file) in &manifest.nodes {
            let rows = read_node_csv(&base.join(file), d)
                .map_err(|e| Error::InvalidData(format!("node `{id}` ({file}): {e}")))?;
            match steps {
                None => steps = Some(rows.len()),
                Some(n) if n != rows.len() => {
                    return Err(Error::HorizonMismatch {
                        expected: n,
                        got: rows.len(),
                    })
                }
                _ => {}
            }
            values.push(rows);
        }
        let sample = Sample::new(Trajectory::new(values)?, manifest.label)?;
        Dataset::new(graph, manifest.dimensions, vec![sample])
    }
}

fn read_node_csv(path: &Path, d: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != d + 1 {
            return Err(Error::InvalidData(format!(
                "expected {} columns (time plus {d} dimensions), got {}",
                d + 1,
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(d);
        for field in record.iter().skip(1) {
            let field = field.trim();
            if field.is_empty() {
                row.push(f64::NAN);
            } else {
                row.push(field.parse::<f64>().map_err(|e| {
                    Error::InvalidData(format!("bad numeric field `{field}`: {e}"))
                })?);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("node file has no data rows".into()));
    }
    Ok(rows)
}

/// How [`window`] labels each extracted window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum LabelRule {
    /// Copy the label of the source sample onto every window.
    FromSample,
    /// Label by thresholding one dimension at one node at the time step
    /// immediately after the window: `+1` if the value exceeds `threshold`,
    /// else `-1`. Windows with no following step are dropped.
    NextStepDim {
        node: String,
        dim: usize,
        threshold: f64,
    },
}

/// Replace every `NaN` missing marker by `0.0`, leaving other values intact.
pub fn impute_zeros(dataset: &Dataset) -> Dataset {
    let samples = dataset
        .samples
        .iter()
        .map(|s| {
            let values = s
                .trajectory
                .raw()
                .iter()
                .map(|node| {
                    node.iter()
                        .map(|row| {
                            row.iter()
                                .map(|&x| if x.is_nan() { 0.0 } else { x })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            Sample {
                trajectory: Trajectory::new(values).expect("imputation preserves shape"),
                label: s.label,
            }
        })
        .collect();
    Dataset {
        graph: dataset.graph.clone(),
        dim_names: dataset.dim_names.clone(),
        samples,
    }
}

/// Slice every sample into contiguous windows of `window_len` steps taken
/// every `stride` steps, labeling each window with `rule`.
///
/// The window starting at step `t` covers `t..t + window_len` and the output
/// horizon is `window_len - 1`. With [`LabelRule::NextStepDim`] the step
/// `t + window_len` must also exist, so the final window of each sample is
/// dropped when it has no following step.
pub fn window(
    dataset: &Dataset,
    window_len: usize,
    stride: usize,
    rule: &LabelRule,
) -> Result<Dataset> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if stride == 0 {
        return Err(Error::InvalidData("stride must be at least 1".into()));
    }
    let len = dataset.horizon().expect("nonempty") + 1;
    if window_len == 0 || window_len > len {
        return Err(Error::WindowTooLong {
            window: window_len,
            available: len,
        });
    }
    if let LabelRule::NextStepDim { node, dim, .. } = rule {
        dataset.graph.node_index(node)?;
        if *dim >= dataset.dim() {
            return Err(Error::DimMismatch {
                expected: dataset.dim(),
                got: *dim,
            });
        }
    }

    let mut out = Vec::new();
    for sample in &dataset.samples {
        let mut start = 0;
        while start + window_len <= len {
            let label = match rule {
                LabelRule::FromSample => Some(sample.label),
                LabelRule::NextStepDim {
                    node,
                    dim,
                    threshold,
                } => {
                    let next = start + window_len;
                    if next >= len {
                        None
                    } else {
                        let idx = dataset.graph.node_index(node)?;
                        let value = sample.trajectory.values_at(idx, next)[*dim];
                        Some(if value > *threshold { 1 } else { -1 })
                    }
                }
            };
            if let Some(label) = label {
                let values = sample
                    .trajectory
                    .raw()
                    .iter()
                    .map(|node| node[start..start + window_len].to_vec())
                    .collect();
                out.push(Sample {
                    trajectory: Trajectory::new(values)?,
                    label,
                });
            }
            start += stride;
        }
    }
    Dataset::new(dataset.graph.clone(), dataset.dim_names.clone(), out)
}

/// Deterministically shuffle and split into `(train, test)` with
/// `|train| = round(train_fraction * N)`.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::BadFraction(train_fraction));
    }
    let n = dataset.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_train = ((train_fraction * n as f64).round() as usize).min(n);
    let pick = |ids: &[usize]| -> Result<Dataset> {
        Dataset::new(
            dataset.graph.clone(),
            dataset.dim_names.clone(),
            ids.iter().map(|&i| dataset.samples[i].clone()).collect(),
        )
    };
    Ok((pick(&indices[..n_train])?, pick(&indices[n_train..])?))
}

// ---- structured file format -------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DatasetDto {
    graph: Graph,
    dimensions: Vec<String>,
    samples: Vec<SampleDto>,
}

#[derive(Serialize, Deserialize)]
struct SampleDto {
    label: i32,
    /// node id -> (horizon+1) rows of d entries; `null` marks missing.
    trajectory: IndexMap<String, Vec<Vec<Option<f64>>>>,
}

impl TryFrom<DatasetDto> for Dataset {
    type Error = Error;

    fn try_from(dto: DatasetDto) -> Result<Self> {
        let mut samples = Vec::with_capacity(dto.samples.len());
        for s in dto.samples {
            for id in s.trajectory.keys() {
                if !dto.graph.contains(id) {
                    return Err(Error::UnknownNode(id.clone()));
                }
            }
            let mut values = Vec::with_capacity(dto.graph.node_count());
            for id in dto.graph.nodes() {
                let rows = s.trajectory.get(id).ok_or_else(|| {
                    Error::InvalidData(format!("sample is missing node `{id}`"))
                })?;
                values.push(
                    rows.iter()
                        .map(|row| {
                            row.iter().map(|x| x.unwrap_or(f64::NAN)).collect::<Vec<_>>()
                        })
                        .collect(),
                );
            }
            samples.push(Sample::new(Trajectory::new(values)?, s.label)?);
        }
        Dataset::new(dto.graph, dto.dimensions, samples)
    }
}

impl From<&Dataset> for DatasetDto {
    fn from(ds: &Dataset) -> Self {
        let samples = ds
            .samples
            .iter()
            .map(|s| {
                let mut trajectory = IndexMap::new();
                for (i, id) in ds.graph.nodes().iter().enumerate() {
                    let rows = s.trajectory.raw()[i]
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|&x| if x.is_nan() { None } else { Some(x) })
                                .collect()
                        })
                        .collect();
                    trajectory.insert(id.clone(), rows);
                }
                SampleDto {
                    label: s.label,
                    trajectory,
                }
            })
            .collect();
        DatasetDto {
            graph: ds.graph.clone(),
            dimensions: ds.dim_names.clone(),
            samples,
        }
    }
}

#[derive(Deserialize)]
struct TabularManifest {
    /// node id -> CSV path relative to the manifest.
    nodes: IndexMap<String, String>,
    #[serde(default)]
    edges: Option<Vec<(String, String)>>,
    #[serde(default)]
    coords: Option<IndexMap<String, [f64; 2]>>,
    #[serde(default)]
    radius_km: Option<f64>,
    dimensions: Vec<String>,
    #[serde(default = "default_label")]
    label: i32,
}

fn default_label() -> i32 {
    1
}
