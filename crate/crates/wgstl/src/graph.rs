//! Undirected graphs over named nodes.
//!
//! A [`Graph`] is the spatial substrate every formula is evaluated against:
//! graph quantifiers range over the neighbors of the node under evaluation.
//! Node order is the declaration order and is load-bearing — neighbor lists,
//! neighbor importance-weight vectors, and serialized parameter layouts all
//! index neighbors in that order, so two graphs with the same edges but
//! different node order are deliberately *not* interchangeable.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in kilometres used by [`haversine_km`].
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// An undirected graph over string-named nodes.
///
/// Invariants enforced at construction:
/// - node identifiers are unique,
/// - every edge endpoint is a declared node,
/// - no self-loops,
/// - duplicate edges (in either orientation) are collapsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDto", into = "GraphDto")]
pub struct Graph {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Canonical `(lo, hi)` index pairs, sorted.
    edges: Vec<(usize, usize)>,
    /// Per-node neighbor indices in ascending (declaration) order.
    adjacency: Vec<Vec<usize>>,
    /// Optional `[lat_deg, lon_deg]` per node, kept for provenance when the
    /// graph was built from coordinates.
    coords: Option<IndexMap<String, [f64; 2]>>,
}

impl Graph {
    /// Build a graph from node declarations and undirected edges.
    ///
    /// ```
    /// # use wgstl::Graph;
    /// let g = Graph::new(
    ///     ["v1", "v2", "v3", "v4", "v5", "v6"],
    ///     [
    ///         ("v1", "v2"), ("v1", "v4"), ("v2", "v3"), ("v3", "v4"),
    ///         ("v4", "v5"), ("v4", "v6"), ("v5", "v6"),
    ///     ],
    /// )
    /// .unwrap();
    /// assert_eq!(g.neighbors("v4").unwrap(), ["v1", "v3", "v5", "v6"]);
    /// ```
    pub fn new(
        nodes: impl IntoIterator<Item = impl Into<String>>,
        edges: impl IntoIterator<Item = (impl AsRef<str>, impl AsRef<str>)>,
    ) -> Result<Self> {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = BTreeMap::new();
        for (i, id) in nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(id.clone()));
            }
        }

        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index
                .get(a)
                .ok_or_else(|| Error::UnknownEndpoint(a.to_string()))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| Error::UnknownEndpoint(b.to_string()))?;
            if ia == ib {
                return Err(Error::SelfLoop(a.to_string()));
            }
            set.insert((ia.min(ib), ia.max(ib)));
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Ok(Graph {
            nodes,
            index,
            edges: set.into_iter().collect(),
            adjacency,
            coords: None,
        })
    }

    /// Node identifiers in declaration order.
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Whether `id` is a declared node.
    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Declaration-order index of a node.
    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Name of the node at a declaration-order index.
    pub fn node_name(&self, idx: usize) -> &str {
        &self.nodes[idx]
    }

    /// Neighbors of `id` in declaration order.
    pub fn neighbors(&self, id: &str) -> Result<Vec<&str>> {
        let idx = self.node_index(id)?;
        Ok(self.adjacency[idx]
            .iter()
            .map(|&i| self.nodes[i].as_str())
            .collect())
    }

    /// Neighbor indices of the node at `idx`, ascending.
    pub fn neighbor_indices(&self, idx: usize) -> &[usize] {
        &self.adjacency[idx]
    }

    /// Whether an undirected edge `{a, b}` exists.
    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&ia), Some(&ib)) => self
                .edges
                .binary_search(&(ia.min(ib), ia.max(ib)))
                .is_ok(),
            _ => false,
        }
    }

    /// Edges as name pairs in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    /// Per-node coordinates, if the graph was built from them.
    pub fn coords(&self) -> Option<&IndexMap<String, [f64; 2]>> {
        self.coords.as_ref()
    }
}

/// Great-circle distance in kilometres between two `[lat_deg, lon_deg]` points
/// (haversine formula on a sphere of radius [`EARTH_RADIUS_KM`]).
pub fn haversine_km(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (lat1, lon1) = (a[0].to_radians(), a[1].to_radians());
    let (lat2, lon2) = (b[0].to_radians(), b[1].to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Build a graph whose edges connect every pair of nodes within
/// `radius_km` great-circle kilometres of each other.
///
/// Node order is the iteration order of `coords`.
pub fn radius_graph(coords: &IndexMap<String, [f64; 2]>, radius_km: f64) -> Result<Graph> {
    if !(radius_km.is_finite() && radius_km > 0.0) {
        return Err(Error::BadRadius(radius_km));
    }
    for (id, c) in coords {
        if !(c[0].is_finite() && c[1].is_finite()) {
            return Err(Error::NonFiniteCoordinate(id.clone()));
        }
    }
    let ids: Vec<&String> = coords.keys().collect();
    let mut edges = Vec::new();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            if haversine_km(coords[ids[i]], coords[ids[j]]) <= radius_km {
                edges.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    let mut graph = Graph::new(ids.iter().map(|s| s.as_str()), edges)?;
    graph.coords = Some(coords.clone());
    Ok(graph)
}

/// Serialized shape of a [`Graph`]: `{nodes, edges, coords?}`.
#[derive(Serialize, Deserialize)]
struct GraphDto {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<IndexMap<String, [f64; 2]>>,
}

impl TryFrom<GraphDto> for Graph {
    type Error = Error;

    fn try_from(dto: GraphDto) -> Result<Self> {
        let mut graph = Graph::new(dto.nodes, dto.edges)?;
        if let Some(coords) = dto.coords {
            for id in coords.keys() {
                if !graph.contains(id) {
                    return Err(Error::UnknownNode(id.clone()));
                }
            }
            graph.coords = Some(coords);
        }
        Ok(graph)
    }
}

impl From<Graph> for GraphDto {
    fn from(graph: Graph) -> Self {
        GraphDto {
            nodes: graph.nodes.clone(),
            edges: graph
                .edges
                .iter()
                .map(|&(a, b)| (graph.nodes[a].clone(), graph.nodes[b].clone()))
                .collect(),
            coords: graph.coords,
        }
    }
}
