//! Undirected attributed graphs and graph collections.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph has {} invariant violation(s): {}", .0.len(), join(.0))]
    Invalid(Vec<Violation>),
    #[error("collection mixes attribute dimensions {0} and {1}")]
    MixedDimensions(usize, usize),
    #[error("graph label {label} outside [0, {class_count})")]
    LabelOutOfRange { label: usize, class_count: usize },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// One broken invariant reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SelfLoop(usize),
    DanglingEndpoint { edge: (usize, usize), node_count: usize },
    RaggedAttributes { node: usize, expected: usize, found: usize },
    MissingAttributes { expected: usize, found: usize },
    EmptyAttributes,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop(u) => write!(f, "self-loop at node {u}"),
            Violation::DanglingEndpoint { edge, node_count } => write!(
                f,
                "edge ({}, {}) has an endpoint outside 0..{node_count}",
                edge.0, edge.1
            ),
            Violation::RaggedAttributes { node, expected, found } => write!(
                f,
                "node {node} has attribute dimension {found}, expected {expected}"
            ),
            Violation::MissingAttributes { expected, found } => {
                write!(f, "{found} attribute rows for {expected} nodes")
            }
            Violation::EmptyAttributes => write!(f, "attribute dimension is zero"),
        }
    }
}

/// An undirected simple graph with one real attribute vector per node.
///
/// Edges are stored once as `(u, v)` with `u < v`; `neighbors(u)` is sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    attributes: Vec<Vec<f64>>,
    label: Option<usize>,
}

impl Graph {
    /// Builds a validated graph. Duplicate and reversed edges collapse into one.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        attributes: Vec<Vec<f64>>,
        label: Option<usize>,
    ) -> Result<Self, GraphError> {
        let g = Self::new_unchecked(node_count, edges, attributes, label);
        validate(&g).map_err(GraphError::Invalid)?;
        Ok(g)
    }

    /// Graph with every node carrying the scalar attribute `1.0`.
    pub fn unattributed(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        Self::new(node_count, edges, vec![vec![1.0]; node_count], None)
    }

    /// Builds a graph without checking invariants. Use [`validate`] to inspect it.
    /// Edges with an endpoint outside `0..node_count` are kept in the edge list
    /// but not in the adjacency.
    pub fn new_unchecked(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        attributes: Vec<Vec<f64>>,
        label: Option<usize>,
    ) -> Self {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &edges {
            if u < node_count && v < node_count && u != v {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            node_count,
            edges,
            adjacency,
            attributes,
            label,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn attribute(&self, u: usize) -> &[f64] {
        &self.attributes[u]
    }

    pub fn attributes(&self) -> &[Vec<f64>] {
        &self.attributes
    }

    /// Attribute dimension d₀ (taken from the first node; 0 for an empty graph).
    pub fn attribute_dim(&self) -> usize {
        self.attributes.first().map_or(0, Vec::len)
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn with_label(mut self, label: Option<usize>) -> Self {
        self.label = label;
        self
    }

    /// Same topology and label, new attributes.
    pub fn with_attributes(&self, attributes: Vec<Vec<f64>>) -> Self {
        Graph {
            attributes,
            ..self.clone()
        }
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.node_count];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Relabels node `u` as `perm[u]`. `perm` must be a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.node_count, "permutation length");
        let mut attributes = vec![Vec::new(); self.node_count];
        for (u, attr) in self.attributes.iter().enumerate() {
            attributes[perm[u]] = attr.clone();
        }
        Graph::new_unchecked(
            self.node_count,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
            attributes,
            self.label,
        )
    }

    /// Disjoint union; nodes of `other` are shifted by `self.node_count()`.
    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let shift = self.node_count;
        let mut attributes = self.attributes.clone();
        attributes.extend(other.attributes.iter().cloned());
        Graph::new_unchecked(
            self.node_count + other.node_count,
            self.edges
                .iter()
                .copied()
                .chain(other.edges.iter().map(|&(u, v)| (u + shift, v + shift))),
            attributes,
            self.label,
        )
    }
}

/// Reports every invariant violation of `g`.
pub fn validate(g: &Graph) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    for &(u, v) in &g.edges {
        if u == v {
            out.push(Violation::SelfLoop(u));
        }
        if u >= g.node_count || v >= g.node_count {
            out.push(Violation::DanglingEndpoint {
                edge: (u, v),
                node_count: g.node_count,
            });
        }
    }
    if g.attributes.len() != g.node_count {
        out.push(Violation::MissingAttributes {
            expected: g.node_count,
            found: g.attributes.len(),
        });
    }
    if let Some(first) = g.attributes.first() {
        if first.is_empty() {
            out.push(Violation::EmptyAttributes);
        }
        for (node, attr) in g.attributes.iter().enumerate().skip(1) {
            if attr.len() != first.len() {
                out.push(Violation::RaggedAttributes {
                    node,
                    expected: first.len(),
                    found: attr.len(),
                });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// One-hot degree encoding of width `max_degree + 1`; larger degrees land in the last bucket.
pub fn degree_attributes(g: &Graph, max_degree: usize) -> Graph {
    let attributes = (0..g.node_count())
        .map(|u| one_hot(g.degree(u).min(max_degree), max_degree + 1))
        .collect();
    g.with_attributes(attributes)
}

pub(crate) fn one_hot(index: usize, width: usize) -> Vec<f64> {
    let mut v = vec![0.0; width];
    v[index] = 1.0;
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    /// One-hot expansion of integer node labels.
    Categorical,
    Continuous,
    /// No native attributes; nodes carry one-hot degrees.
    None,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Categorical => "categorical",
            AttributeKind::Continuous => "continuous",
            AttributeKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphCollection {
    pub graphs: Vec<Graph>,
    pub class_count: usize,
    pub attribute_kind: AttributeKind,
}

impl GraphCollection {
    pub fn new(
        graphs: Vec<Graph>,
        class_count: usize,
        attribute_kind: AttributeKind,
    ) -> Result<Self, GraphError> {
        let mut dim = None;
        for g in &graphs {
            if g.node_count() == 0 {
                continue;
            }
            match dim {
                None => dim = Some(g.attribute_dim()),
                Some(d) if d != g.attribute_dim() => {
                    return Err(GraphError::MixedDimensions(d, g.attribute_dim()))
                }
                _ => {}
            }
            if let Some(label) = g.label() {
                if label >= class_count {
                    return Err(GraphError::LabelOutOfRange { label, class_count });
                }
            }
        }
        Ok(GraphCollection {
            graphs,
            class_count,
            attribute_kind,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Vec<Option<usize>> {
        self.graphs.iter().map(Graph::label).collect()
    }

    pub fn attribute_dim(&self) -> usize {
        self.graphs.iter().map(Graph::attribute_dim).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.graphs.iter().map(Graph::max_degree).max().unwrap_or(0)
    }

    /// Replaces every graph's attributes with one-hot degrees capped at the
    /// collection's observed maximum degree.
    pub fn with_degree_attributes(&self) -> Self {
        let cap = self.max_degree();
        GraphCollection {
            graphs: self.graphs.iter().map(|g| degree_attributes(g, cap)).collect(),
            class_count: self.class_count,
            attribute_kind: self.attribute_kind,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        Graph::unattributed(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn duplicate_directions_collapse() {
        let g = Graph::unattributed(3, [(0, 1), (1, 0), (1, 2), (2, 1), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn validate_reports_self_loop() {
        let g = Graph::new_unchecked(4, [(3, 3), (0, 1)], vec![vec![1.0]; 4], None);
        assert_eq!(validate(&g), Err(vec![Violation::SelfLoop(3)]));
    }

    #[test]
    fn validate_reports_dangling_endpoint() {
        let g = Graph::new_unchecked(5, [(1, 10)], vec![vec![1.0]; 5], None);
        let errs = validate(&g).unwrap_err();
        assert!(matches!(
            errs[0],
            Violation::DanglingEndpoint { edge: (1, 10), node_count: 5 }
        ));
    }

    #[test]
    fn validate_reports_ragged_attributes() {
        let g = Graph::new_unchecked(2, [(0, 1)], vec![vec![1.0, 0.0], vec![1.0]], None);
        assert!(matches!(
            validate(&g).unwrap_err()[0],
            Violation::RaggedAttributes { node: 1, expected: 2, found: 1 }
        ));
        assert!(Graph::new(2, [(0, 1)], vec![vec![1.0, 0.0], vec![1.0]], None).is_err());
    }

    #[test]
    fn cycle_degrees_one_hot() {
        let g = degree_attributes(&cycle(5), 4);
        for u in 0..5 {
            assert_eq!(g.attribute(u), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn degrees_clamp_and_isolated() {
        // star with hub degree 4, one isolated node
        let g = Graph::unattributed(6, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let d = degree_attributes(&g, 2);
        assert_eq!(d.attribute(0), &[0.0, 0.0, 1.0]);
        assert_eq!(d.attribute(1), &[0.0, 1.0, 0.0]);
        assert_eq!(d.attribute(5), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn permutation_and_components() {
        let g = cycle(4).disjoint_union(&cycle(3));
        assert_eq!(g.component_count(), 2);
        let p = g.permuted(&[6, 5, 4, 3, 2, 1, 0]);
        assert_eq!(p.edge_count(), 7);
        assert!(p.has_edge(6, 5));
        assert!(p.has_edge(2, 0));
        assert_eq!(validate(&p), Ok(()));
    }

    #[test]
    fn collection_rejects_mixed_dims() {
        let a = cycle(3);
        let b = degree_attributes(&cycle(3), 2);
        assert!(matches!(
            GraphCollection::new(vec![a, b], 1, AttributeKind::None),
            Err(GraphError::MixedDimensions(1, 3))
        ));
    }
}
