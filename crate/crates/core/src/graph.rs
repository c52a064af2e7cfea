//! Graphs, problem instances and solutions shared by every problem variant.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `0..vertex_count`.
///
/// Edges are stored normalized (`u < v`) and sorted, so edge indices are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, normalizing and sorting the edge list. Loops, repeated
    /// edges and out-of-range endpoints are rejected.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{u},{v}}} out of range for {vertex_count} vertices"
                )));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("repeated edge {{{},{}}}", w[0].0, w[0].1)));
        }
        Ok(Graph {
            vertex_count,
            edges: normalized,
        })
    }

    pub fn empty(vertex_count: usize) -> Self {
        Graph {
            vertex_count,
            edges: Vec::new(),
        }
    }

    pub fn complete(vertex_count: usize) -> Self {
        let edges = (0..vertex_count)
            .flat_map(|u| (u + 1..vertex_count).map(move |v| (u, v)))
            .collect();
        Graph { vertex_count, edges }
    }

    /// Edges of `K_n` that are not edges of `self`.
    pub fn complement(&self) -> Self {
        let present: BTreeSet<_> = self.edges.iter().copied().collect();
        let edges = Graph::complete(self.vertex_count)
            .edges
            .into_iter()
            .filter(|e| !present.contains(e))
            .collect();
        Graph {
            vertex_count: self.vertex_count,
            edges,
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_index(u, v).is_some()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Adjacency lists of `(neighbor, edge index)`, neighbors ascending.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Disjoint edge classes `0..k`; an edge is in at most one class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeClassAssignment {
    class_of: Vec<Option<usize>>,
    class_count: usize,
}

impl EdgeClassAssignment {
    pub fn unclassified(edge_count: usize) -> Self {
        EdgeClassAssignment {
            class_of: vec![None; edge_count],
            class_count: 0,
        }
    }

    pub fn new(class_of: Vec<Option<usize>>, class_count: usize) -> Result<Self> {
        if let Some(c) = class_of.iter().flatten().find(|&&c| c >= class_count) {
            return Err(Error::InvalidInstance(format!(
                "class id {c} out of range for {class_count} classes"
            )));
        }
        Ok(EdgeClassAssignment { class_of, class_count })
    }

    /// Builds the assignment from per-class lists of edge indices.
    pub fn from_class_lists(edge_count: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let mut class_of = vec![None; edge_count];
        for (c, list) in lists.iter().enumerate() {
            for &e in list {
                let slot = class_of
                    .get_mut(e)
                    .ok_or_else(|| Error::InvalidInstance(format!("edge index {e} out of range")))?;
                if let Some(prev) = *slot {
                    return Err(Error::InvalidInstance(format!(
                        "edge {e} assigned to classes {prev} and {c}"
                    )));
                }
                *slot = Some(c);
            }
        }
        Ok(EdgeClassAssignment {
            class_of,
            class_count: lists.len(),
        })
    }

    #[inline]
    pub fn class_of(&self, edge: usize) -> Option<usize> {
        self.class_of[edge]
    }

    #[inline]
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn edge_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for c in self.class_of.iter().flatten() {
            sizes[*c] += 1;
        }
        sizes
    }

    pub fn members(&self, class: usize) -> Vec<usize> {
        (0..self.class_of.len())
            .filter(|&e| self.class_of[e] == Some(class))
            .collect()
    }

    /// Counts edges of each class among `edges`.
    pub fn count_in(&self, edges: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &e in edges {
            if let Some(c) = self.class_of[e] {
                counts[c] += 1;
            }
        }
        counts
    }
}

/// Perfect matching with at least `thresholds[l]` edges from class `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DominatingMatchingInstance {
    pub graph: Graph,
    pub classes: EdgeClassAssignment,
    pub thresholds: Vec<usize>,
}

/// A condition that makes a dominating matching instance trivially infeasible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchingObstruction {
    OddVertexCount(usize),
    ThresholdExceedsClass {
        class: usize,
        threshold: usize,
        class_size: usize,
    },
}

impl fmt::Display for MatchingObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingObstruction::OddVertexCount(n) => write!(f, "odd vertex count {n}"),
            MatchingObstruction::ThresholdExceedsClass {
                class,
                threshold,
                class_size,
            } => write!(f, "class {class} requires {threshold} edges but has only {class_size}"),
        }
    }
}

impl DominatingMatchingInstance {
    pub fn new(graph: Graph, classes: EdgeClassAssignment, thresholds: Vec<usize>) -> Result<Self> {
        if classes.edge_count() != graph.edge_count() {
            return Err(Error::InvalidInstance(format!(
                "class assignment covers {} edges, graph has {}",
                classes.edge_count(),
                graph.edge_count()
            )));
        }
        if thresholds.len() != classes.class_count() {
            return Err(Error::InvalidInstance(format!(
                "{} thresholds for {} classes",
                thresholds.len(),
                classes.class_count()
            )));
        }
        Ok(DominatingMatchingInstance {
            graph,
            classes,
            thresholds,
        })
    }

    /// Plain perfect-matching instance with no classes.
    pub fn perfect_matching(graph: Graph) -> Self {
        let classes = EdgeClassAssignment::unclassified(graph.edge_count());
        DominatingMatchingInstance {
            graph,
            classes,
            thresholds: Vec::new(),
        }
    }

    /// Trivial infeasibility certificates.
    pub fn obstructions(&self) -> Vec<MatchingObstruction> {
        let mut out = Vec::new();
        if !self.graph.vertex_count().is_multiple_of(2) {
            out.push(MatchingObstruction::OddVertexCount(self.graph.vertex_count()));
        }
        for (class, (&threshold, class_size)) in self.thresholds.iter().zip(self.classes.class_sizes()).enumerate() {
            if threshold > class_size {
                out.push(MatchingObstruction::ThresholdExceedsClass {
                    class,
                    threshold,
                    class_size,
                });
            }
        }
        out
    }

    /// Number of Pfaffian evaluations per trial, `prod (m_l + 1)`.
    pub fn grid_size(&self) -> u128 {
        self.thresholds
            .iter()
            .fold(1u128, |acc, &m| acc.saturating_mul(m as u128 + 1))
    }
}

/// Subgraph with prescribed degrees and at least `thresholds[l]` class-`l` edges,
/// using host edges only and avoiding the blue edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FFactorInstance {
    pub host: Graph,
    pub degrees: Vec<usize>,
    pub classes: EdgeClassAssignment,
    pub thresholds: Vec<usize>,
    pub blue: Graph,
}

impl FFactorInstance {
    pub fn new(
        host: Graph,
        degrees: Vec<usize>,
        classes: EdgeClassAssignment,
        thresholds: Vec<usize>,
        blue: Graph,
    ) -> Result<Self> {
        let n = host.vertex_count();
        if degrees.len() != n {
            return Err(Error::InvalidInstance(format!(
                "{} degrees for {n} vertices",
                degrees.len()
            )));
        }
        if blue.vertex_count() != n {
            return Err(Error::InvalidInstance("blue graph on a different vertex set".into()));
        }
        if classes.edge_count() != host.edge_count() || thresholds.len() != classes.class_count() {
            return Err(Error::InvalidInstance(
                "class assignment does not match the host graph".into(),
            ));
        }
        Ok(FFactorInstance {
            host,
            degrees,
            classes,
            thresholds,
            blue,
        })
    }

    /// Host edge indices that are not blue.
    pub fn allowed_edges(&self) -> Vec<usize> {
        (0..self.host.edge_count())
            .filter(|&e| {
                let (u, v) = self.host.edge(e);
                !self.blue.has_edge(u, v)
            })
            .collect()
    }

    /// Checks a candidate subgraph: exact degrees, host edges only, no blue edge,
    /// thresholds met.
    pub fn accepts(&self, sub: &FactorSubgraph) -> bool {
        let mut deg = vec![0; self.host.vertex_count()];
        let mut indices = Vec::with_capacity(sub.edges.len());
        for &(u, v) in &sub.edges {
            let Some(e) = self.host.edge_index(u, v) else {
                return false;
            };
            if self.blue.has_edge(u, v) {
                return false;
            }
            deg[u] += 1;
            deg[v] += 1;
            indices.push(e);
        }
        let unique: BTreeSet<_> = indices.iter().collect();
        unique.len() == indices.len()
            && deg == self.degrees
            && self
                .classes
                .count_in(&indices)
                .iter()
                .zip(&self.thresholds)
                .all(|(have, need)| have >= need)
    }
}

/// Partition adjacency matrix realization instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PamInstance {
    pub vertex_count: usize,
    pub degrees: Vec<usize>,
    pub partition: Vec<Vec<usize>>,
    /// Symmetric; `pam[i][i]` counts edges inside class `i` once.
    pub pam: Vec<Vec<usize>>,
    pub blue: Graph,
}

impl PamInstance {
    /// Class index of every vertex, if the partition is well formed.
    pub fn class_index(&self) -> Option<Vec<usize>> {
        let mut class = vec![usize::MAX; self.vertex_count];
        for (i, members) in self.partition.iter().enumerate() {
            for &v in members {
                if v >= self.vertex_count || class[v] != usize::MAX {
                    return None;
                }
                class[v] = i;
            }
        }
        class.iter().all(|&c| c != usize::MAX).then_some(class)
    }

    /// Measures the PAM and degrees of `g` under `partition`.
    pub fn measure(g: &Graph, partition: Vec<Vec<usize>>, blue: Graph) -> Self {
        let k = partition.len();
        let mut class = vec![0; g.vertex_count()];
        for (i, members) in partition.iter().enumerate() {
            for &v in members {
                class[v] = i;
            }
        }
        let mut pam = vec![vec![0; k]; k];
        for &(u, v) in g.edges() {
            let (a, b) = (class[u], class[v]);
            pam[a][b] += 1;
            if a != b {
                pam[b][a] += 1;
            }
        }
        PamInstance {
            vertex_count: g.vertex_count(),
            degrees: g.degrees(),
            partition,
            pam,
            blue,
        }
    }

    /// Whether `edges` realizes the instance exactly: simple, degrees equal `d`,
    /// class counts equal `c`, no blue edge.
    pub fn is_realized_by(&self, edges: &[(usize, usize)]) -> bool {
        if self.class_index().is_none() {
            return false;
        }
        let Ok(g) = Graph::new(self.vertex_count, edges.iter().copied()) else {
            return false;
        };
        if g.edges().iter().any(|&(u, v)| self.blue.has_edge(u, v)) {
            return false;
        }
        let measured = PamInstance::measure(&g, self.partition.clone(), self.blue.clone());
        measured.degrees == self.degrees && measured.pam == self.pam
    }
}

/// A violated necessary condition of a PAM instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PamViolation {
    /// Partition does not cover `0..n` with disjoint nonempty classes.
    MalformedPartition(String),
    /// Matrix has the wrong shape or is not symmetric.
    MalformedMatrix(String),
    /// Degree list or blue graph does not match the vertex set.
    MalformedVertexData(String),
    DegreeOutOfRange {
        vertex: usize,
        degree: usize,
        max: usize,
    },
    ClassSum {
        class: usize,
        degree_sum: usize,
        expected: usize,
    },
    GlobalSum {
        degree_sum: usize,
        expected: usize,
    },
    Capacity {
        i: usize,
        j: usize,
        requested: usize,
        capacity: usize,
    },
}

impl PamViolation {
    /// Structural violations mean the input is malformed; the others prove that
    /// no realization exists.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            PamViolation::MalformedPartition(_)
                | PamViolation::MalformedMatrix(_)
                | PamViolation::MalformedVertexData(_)
        )
    }
}

impl fmt::Display for PamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PamViolation::MalformedPartition(s) => write!(f, "malformed partition: {s}"),
            PamViolation::MalformedMatrix(s) => write!(f, "malformed matrix: {s}"),
            PamViolation::MalformedVertexData(s) => write!(f, "malformed vertex data: {s}"),
            PamViolation::DegreeOutOfRange { vertex, degree, max } => {
                write!(f, "degree {degree} of vertex {vertex} exceeds {max}")
            }
            PamViolation::ClassSum {
                class,
                degree_sum,
                expected,
            } => write!(
                f,
                "class {class}: degree sum {degree_sum} but the matrix implies {expected}"
            ),
            PamViolation::GlobalSum { degree_sum, expected } => {
                write!(f, "degree sum {degree_sum} but the matrix implies {expected}")
            }
            PamViolation::Capacity {
                i,
                j,
                requested,
                capacity,
            } => write!(
                f,
                "entry ({i},{j}) requests {requested} edges but only {capacity} pairs are available"
            ),
        }
    }
}

/// Reports every violated necessary condition of a PAM instance.
///
/// Within-class edges contribute twice to a class degree sum, so the class
/// identity checked is `sum_{v in W_i} d(v) = 2 c(i,i) + sum_{j != i} c(i,j)`.
pub fn validate_pam(inst: &PamInstance) -> Vec<PamViolation> {
    let n = inst.vertex_count;
    let k = inst.partition.len();
    let mut out = Vec::new();

    if inst.degrees.len() != n {
        out.push(PamViolation::MalformedVertexData(format!(
            "{} degrees for {n} vertices",
            inst.degrees.len()
        )));
    }
    if inst.blue.vertex_count() != n {
        out.push(PamViolation::MalformedVertexData(format!(
            "blue graph has {} vertices, expected {n}",
            inst.blue.vertex_count()
        )));
    }
    if let Some(i) = inst.partition.iter().position(|c| c.is_empty()) {
        out.push(PamViolation::MalformedPartition(format!("class {i} is empty")));
    }
    if inst.class_index().is_none() {
        out.push(PamViolation::MalformedPartition(
            "classes must be disjoint and cover every vertex".into(),
        ));
    }
    if inst.pam.len() != k || inst.pam.iter().any(|row| row.len() != k) {
        out.push(PamViolation::MalformedMatrix(format!("expected a {k}x{k} matrix")));
    } else {
        for i in 0..k {
            for j in i + 1..k {
                if inst.pam[i][j] != inst.pam[j][i] {
                    out.push(PamViolation::MalformedMatrix(format!(
                        "entry ({i},{j}) is not symmetric"
                    )));
                }
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    let class = inst.class_index().expect("checked above");

    for (v, &d) in inst.degrees.iter().enumerate() {
        if d + 1 > n {
            out.push(PamViolation::DegreeOutOfRange {
                vertex: v,
                degree: d,
                max: n.saturating_sub(1),
            });
        }
    }
    for (i, members) in inst.partition.iter().enumerate() {
        let degree_sum: usize = members.iter().map(|&v| inst.degrees[v]).sum();
        let expected = 2 * inst.pam[i][i] + (0..k).filter(|&j| j != i).map(|j| inst.pam[i][j]).sum::<usize>();
        if degree_sum != expected {
            out.push(PamViolation::ClassSum {
                class: i,
                degree_sum,
                expected,
            });
        }
    }
    let degree_sum: usize = inst.degrees.iter().sum();
    let expected: usize = (0..k).map(|i| inst.pam[i][i]).sum::<usize>()
        + (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| inst.pam[i][j])
            .sum::<usize>();
    if degree_sum != expected {
        out.push(PamViolation::GlobalSum { degree_sum, expected });
    }

    let mut blue_between = vec![vec![0usize; k]; k];
    for &(u, v) in inst.blue.edges() {
        let (a, b) = (class[u].min(class[v]), class[u].max(class[v]));
        blue_between[a][b] += 1;
    }
    for i in 0..k {
        for j in i..k {
            let size_i = inst.partition[i].len();
            let pairs = if i == j {
                size_i * size_i.saturating_sub(1) / 2
            } else {
                size_i * inst.partition[j].len()
            };
            let capacity = pairs - blue_between[i][j];
            if inst.pam[i][j] > capacity {
                out.push(PamViolation::Capacity {
                    i,
                    j,
                    requested: inst.pam[i][j],
                    capacity,
                });
            }
        }
    }
    out
}

/// Set of edge indices into some graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    pub edges: Vec<usize>,
}

impl Matching {
    pub fn new(mut edges: Vec<usize>) -> Self {
        edges.sort_unstable();
        Matching { edges }
    }

    /// Whether the edges are pairwise disjoint and cover every vertex.
    pub fn is_perfect_in(&self, g: &Graph) -> bool {
        let mut covered = vec![false; g.vertex_count()];
        for &e in &self.edges {
            if e >= g.edge_count() {
                return false;
            }
            let (u, v) = g.edge(e);
            if covered[u] || covered[v] {
                return false;
            }
            covered[u] = true;
            covered[v] = true;
        }
        covered.iter().all(|&c| c)
    }
}

/// Subgraph given by its vertex pairs, normalized and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorSubgraph {
    pub edges: Vec<(usize, usize)>,
}

impl FactorSubgraph {
    pub fn new(edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<_> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        edges.sort_unstable();
        FactorSubgraph { edges }
    }

    pub fn degrees(&self, vertex_count: usize) -> Vec<usize> {
        let mut deg = vec![0; vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }
}

/// True iff `m` is a perfect matching of the instance graph meeting every threshold.
pub fn validate_solution_matching(inst: &DominatingMatchingInstance, m: &Matching) -> bool {
    m.is_perfect_in(&inst.graph)
        && inst
            .classes
            .count_in(&m.edges)
            .iter()
            .zip(&inst.thresholds)
            .all(|(have, need)| have >= need)
}
