//! Compact metric graphs with a Dirichlet vertex set.
//!
//! A [`MetricGraph`] is a finite multigraph (loops and parallel edges are
//! allowed) whose edges are intervals of positive length. Every vertex carries
//! a boundary condition: Dirichlet (functions vanish there) or natural
//! (continuity plus Kirchhoff). A validated graph is connected and has at
//! least one Dirichlet vertex; it is immutable afterwards.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph is disconnected: vertex `{0}` is unreachable from `{1}`")]
    DisconnectedGraph(String, String),
    #[error("edge `{id}` has non-positive or non-finite length {length}")]
    NonPositiveLength { id: String, length: f64 },
    #[error("no Dirichlet vertex")]
    EmptyDirichletSet,
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("malformed graph file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Natural,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub bc: BoundaryCondition,
}

impl Vertex {
    pub fn is_dirichlet(&self) -> bool {
        self.bc == BoundaryCondition::Dirichlet
    }
}

/// An edge identified with `[0, length]`; `x = 0` sits at `tail`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    /// The endpoint opposite to `v` (for a loop, `v` itself).
    pub fn other(&self, v: usize) -> usize {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }
}

/// Interchange representation, one-to-one with the JSON graph file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub bc: BoundaryCondition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incident: Vec<Vec<usize>>,
    vertex_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

/// Checks a raw description against the graph invariants.
pub fn validate(raw: &GraphFile) -> Result<MetricGraph, GraphError> {
    let mut vertex_index = HashMap::with_capacity(raw.vertices.len());
    let mut vertices = Vec::with_capacity(raw.vertices.len());
    for rec in &raw.vertices {
        if vertex_index.insert(rec.id.clone(), vertices.len()).is_some() {
            return Err(GraphError::DuplicateId { kind: "vertex", id: rec.id.clone() });
        }
        vertices.push(Vertex { id: rec.id.clone(), bc: rec.bc });
    }

    let mut edge_index = HashMap::with_capacity(raw.edges.len());
    let mut edges = Vec::with_capacity(raw.edges.len());
    for rec in &raw.edges {
        if edge_index.insert(rec.id.clone(), edges.len()).is_some() {
            return Err(GraphError::DuplicateId { kind: "edge", id: rec.id.clone() });
        }
        if !(rec.length.is_finite() && rec.length > 0.0) {
            return Err(GraphError::NonPositiveLength { id: rec.id.clone(), length: rec.length });
        }
        let lookup = |name: &str| {
            vertex_index.get(name).copied().ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
        };
        edges.push(Edge {
            id: rec.id.clone(),
            tail: lookup(&rec.from)?,
            head: lookup(&rec.to)?,
            length: rec.length,
        });
    }

    if !vertices.iter().any(Vertex::is_dirichlet) {
        return Err(GraphError::EmptyDirichletSet);
    }

    let mut incident = vec![Vec::new(); vertices.len()];
    for (i, e) in edges.iter().enumerate() {
        incident[e.tail].push(i);
        if !e.is_loop() {
            incident[e.head].push(i);
        }
    }

    // connectivity by DFS from vertex 0
    let mut seen = vec![false; vertices.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &ei in &incident[v] {
            let w = edges[ei].other(v);
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    if let Some(lost) = seen.iter().position(|s| !s) {
        return Err(GraphError::DisconnectedGraph(vertices[lost].id.clone(), vertices[0].id.clone()));
    }

    Ok(MetricGraph { vertices, edges, incident, vertex_index, edge_index })
}

impl TryFrom<GraphFile> for MetricGraph {
    type Error = GraphError;

    fn try_from(raw: GraphFile) -> Result<Self, Self::Error> {
        validate(&raw)
    }
}

impl From<MetricGraph> for GraphFile {
    fn from(g: MetricGraph) -> Self {
        g.to_file()
    }
}

impl MetricGraph {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let raw: GraphFile = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        validate(&raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("graph serialization is infallible")
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexRecord { id: v.id.clone(), bc: v.bc })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id.clone(),
                    from: self.vertices[e.tail].id.clone(),
                    to: self.vertices[e.head].id.clone(),
                    length: e.length,
                })
                .collect(),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge indices incident to `v`; a loop is listed once.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn vertex_by_id(&self, id: &str) -> Result<usize, GraphError> {
        self.vertex_index.get(id).copied().ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn edge_by_id(&self, id: &str) -> Result<usize, GraphError> {
        self.edge_index.get(id).copied().ok_or_else(|| GraphError::UnknownEdge(id.to_string()))
    }

    pub fn is_dirichlet(&self, v: usize) -> bool {
        self.vertices[v].is_dirichlet()
    }

    pub fn dirichlet_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.is_dirichlet(v))
    }

    pub fn natural_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| !self.is_dirichlet(v))
    }

    pub fn num_natural(&self) -> usize {
        self.natural_vertices().count()
    }

    pub fn num_dirichlet(&self) -> usize {
        self.dirichlet_vertices().count()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// Combinatorial degree, loops counted twice.
    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].iter().map(|&e| if self.edges[e].is_loop() { 2 } else { 1 }).sum()
    }

    /// Sum of incident edge lengths, loops counted twice.
    pub fn metric_degree(&self, v: usize) -> f64 {
        self.incident[v]
            .iter()
            .map(|&e| {
                let edge = &self.edges[e];
                if edge.is_loop() {
                    2.0 * edge.length
                } else {
                    edge.length
                }
            })
            .sum()
    }

    pub fn metric_degree_of(&self, id: &str) -> Result<f64, GraphError> {
        Ok(self.metric_degree(self.vertex_by_id(id)?))
    }

    /// `#Dir`: total degree of the Dirichlet set, invariant under gluing it.
    pub fn dirichlet_degree(&self) -> usize {
        self.dirichlet_vertices().map(|v| self.degree(v)).sum()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertices.len()
    }

    pub fn is_equilateral(&self, rel_tol: f64) -> bool {
        let (lo, hi) = (self.min_length(), self.max_length());
        hi - lo <= rel_tol * hi
    }

    /// A copy with the same topology and new edge lengths (same order as `edges()`).
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<MetricGraph, GraphError> {
        assert_eq!(lengths.len(), self.edges.len(), "one length per edge");
        let mut raw = self.to_file();
        for (rec, &l) in raw.edges.iter_mut().zip(lengths) {
            rec.length = l;
        }
        validate(&raw)
    }

    /// Exact multi-source shortest-path distances from the Dirichlet set.
    pub fn dirichlet_distances(&self) -> DistanceField {
        let sources: Vec<usize> = self.dirichlet_vertices().collect();
        DistanceField { dist: self.shortest_paths(&sources) }
    }

    /// Path-metric distance between two vertices.
    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.shortest_paths(&[a])[b]
    }

    fn shortest_paths(&self, sources: &[usize]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(HeapItem(0.0, s));
        }
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &ei in &self.incident[v] {
                let e = &self.edges[ei];
                let w = e.other(v);
                let nd = d + e.length;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
        dist
    }

    /// Supremum of `dist(x; V_D)` over the whole metric graph, with a witness point.
    pub fn inradius(&self) -> Inradius {
        let field = self.dirichlet_distances();
        let mut best = Inradius { value: 0.0, edge: 0, offset: 0.0 };
        for (i, e) in self.edges.iter().enumerate() {
            let (du, dw) = (field.dist[e.tail], field.dist[e.head]);
            let value = 0.5 * (du + dw + e.length);
            if value > best.value {
                let offset = (0.5 * (dw + e.length - du)).clamp(0.0, e.length);
                best = Inradius { value, edge: i, offset };
            }
        }
        best
    }

    /// Whether the graph becomes bridgeless once all Dirichlet vertices are
    /// identified to a single point. Loops are never bridges.
    pub fn is_doubly_connected_after_glue(&self) -> bool {
        let glued = |v: usize| if self.is_dirichlet(v) { usize::MAX } else { v };
        let mut relabel = HashMap::new();
        for v in 0..self.vertices.len() {
            let n = relabel.len();
            relabel.entry(glued(v)).or_insert(n);
        }
        let n = relabel.len();
        let endpoints: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| (relabel[&glued(e.tail)], relabel[&glued(e.head)]))
            .collect();
        find_bridges(n, &endpoints).is_empty()
    }
}

impl fmt::Display for MetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "metric graph: {} vertices ({} Dirichlet), {} edges, total length {}",
            self.num_vertices(),
            self.num_dirichlet(),
            self.num_edges(),
            self.total_length()
        )
    }
}

/// Bridges of an undirected multigraph given by edge endpoint pairs.
///
/// Parallel edges are distinguished by index, so a doubled edge is never a
/// bridge; loops are skipped.
pub fn find_bridges(num_vertices: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); num_vertices];
    for (i, &(a, b)) in edges.iter().enumerate() {
        if a != b {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
    }
    let mut order = vec![usize::MAX; num_vertices];
    let mut low = vec![0usize; num_vertices];
    let mut bridges = Vec::new();
    let mut counter = 0;
    for root in 0..num_vertices {
        if order[root] != usize::MAX {
            continue;
        }
        // (vertex, edge used to enter, next adjacency position)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        order[root] = counter;
        low[root] = counter;
        counter += 1;
        while let Some(&mut (v, via, ref mut pos)) = stack.last_mut() {
            if *pos < adj[v].len() {
                let (w, ei) = adj[v][*pos];
                *pos += 1;
                if ei == via {
                    continue;
                }
                if order[w] == usize::MAX {
                    order[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push((w, ei, 0));
                } else {
                    low[v] = low[v].min(order[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > order[parent] {
                        bridges.push(via);
                    }
                }
            }
        }
    }
    bridges.sort_unstable();
    bridges
}

/// Distance of every vertex to the Dirichlet set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceField {
    pub dist: Vec<f64>,
}

impl DistanceField {
    pub fn max(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// `dist(x; V_D)` at offset `x` along edge `e`.
    pub fn at(&self, g: &MetricGraph, e: usize, x: f64) -> f64 {
        let edge = g.edge(e);
        (self.dist[edge.tail] + x).min(self.dist[edge.head] + edge.length - x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inradius {
    pub value: f64,
    pub edge: usize,
    pub offset: f64,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // min-heap on distance
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Incremental construction with validation at the end.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    raw: GraphFile,
    seen: HashSet<String>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: impl Into<String>, bc: BoundaryCondition) -> Self {
        let id = id.into();
        self.seen.insert(id.clone());
        self.raw.vertices.push(VertexRecord { id, bc });
        self
    }

    pub fn dirichlet(self, id: impl Into<String>) -> Self {
        self.vertex(id, BoundaryCondition::Dirichlet)
    }

    pub fn natural(self, id: impl Into<String>) -> Self {
        self.vertex(id, BoundaryCondition::Natural)
    }

    pub fn edge(mut self, id: impl Into<String>, from: &str, to: &str, length: f64) -> Self {
        self.raw.edges.push(EdgeRecord { id: id.into(), from: from.into(), to: to.into(), length });
        self
    }

    pub fn has_vertex(&self, id: &str) -> bool {
        self.seen.contains(id)
    }

    pub fn build(self) -> Result<MetricGraph, GraphError> {
        validate(&self.raw)
    }
}
