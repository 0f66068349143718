//! Class-level summary of a knowledge graph and its connectivity metrics.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::materializer::{RdfGraph, Term};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Classes with at least one instance, linked by (class, predicate, class)
/// edges summarizing instance-level triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassGraph {
    vertices: BTreeSet<String>,
    edges: BTreeSet<(String, String, String)>,
}

impl ClassGraph {
    /// Panics if an edge endpoint is not a vertex.
    pub fn new(vertices: BTreeSet<String>, edges: BTreeSet<(String, String, String)>) -> ClassGraph {
        for (q, _, k) in &edges {
            assert!(vertices.contains(q) && vertices.contains(k), "edge endpoint outside vertex set");
        }
        ClassGraph { vertices, edges }
    }

    pub fn vertices(&self) -> &BTreeSet<String> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(String, String, String)> {
        &self.edges
    }
}

pub fn build_class_graph(graph: &RdfGraph, type_predicate: &str) -> ClassGraph {
    let mut types: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for t in graph.iter().filter(|t| t.predicate == type_predicate) {
        if let Term::Iri(class) = &t.object {
            types.entry(t.subject.as_str()).or_default().insert(class);
        }
    }
    let vertices: BTreeSet<String> = types.values().flatten().map(|c| c.to_string()).collect();
    let mut edges = BTreeSet::new();
    for t in graph.iter().filter(|t| t.predicate != type_predicate) {
        let (Some(qs), Some(ks)) = (types.get(t.subject.as_str()), t.object.as_iri().and_then(|o| types.get(o))) else {
            continue;
        };
        for q in qs {
            for k in ks {
                edges.insert((q.to_string(), t.predicate.clone(), k.to_string()));
            }
        }
    }
    ClassGraph { vertices, edges }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_neighbors: f64,
    pub diameter: usize,
    pub clustering_coefficient: f64,
    pub density: f64,
    pub connected_components: usize,
}

/// Metrics on the simple undirected projection of the class graph (edge
/// labels and directions collapsed, self-loops dropped). `node_count` and
/// `edge_count` describe the labeled graph itself.
pub fn compute_metrics(cg: &ClassGraph) -> GraphMetrics {
    let index: BTreeMap<&str, usize> = cg.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let n = index.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (q, _, k) in &cg.edges {
        let (a, b) = (index[q.as_str()], index[k.as_str()]);
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    let undirected: usize = adj.iter().map(BTreeSet::len).sum::<usize>() / 2;

    let mut diameter = 0;
    let mut component = vec![usize::MAX; n];
    let mut components = 0;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if component[s] == usize::MAX {
            for (v, d) in dist.iter().enumerate() {
                if *d != usize::MAX {
                    component[v] = components;
                }
            }
            components += 1;
        }
        diameter = diameter.max(dist.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0));
    }

    let mut local = Vec::new();
    for nbrs in &adj {
        let d = nbrs.len();
        if d < 2 {
            continue;
        }
        let nv: Vec<usize> = nbrs.iter().copied().collect();
        let mut links = 0;
        for (i, &a) in nv.iter().enumerate() {
            links += nv[i + 1..].iter().filter(|&&b| adj[a].contains(&b)).count();
        }
        local.push(2.0 * links as f64 / (d * (d - 1)) as f64);
    }
    let clustering = if local.is_empty() { 0.0 } else { local.iter().sum::<f64>() / local.len() as f64 };

    GraphMetrics {
        node_count: n,
        edge_count: cg.edges.len(),
        avg_neighbors: if n == 0 { 0.0 } else { 2.0 * undirected as f64 / n as f64 },
        diameter,
        clustering_coefficient: clustering,
        density: if n < 2 { 0.0 } else { undirected as f64 / (n * (n - 1) / 2) as f64 },
        connected_components: components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materializer::Triple;

    fn cg(n: usize, edges: &[(usize, usize)]) -> ClassGraph {
        let name = |i: usize| format!("http://c/{i}");
        ClassGraph::new(
            (0..n).map(name).collect(),
            edges.iter().map(|&(a, b)| (name(a), "http://p".to_string(), name(b))).collect(),
        )
    }

    #[test]
    fn triangle() {
        let m = compute_metrics(&cg(3, &[(0, 1), (1, 2), (2, 0)]));
        assert_eq!(m.avg_neighbors, 2.0);
        assert_eq!(m.diameter, 1);
        assert_eq!(m.clustering_coefficient, 1.0);
        assert_eq!(m.density, 1.0);
        assert_eq!(m.connected_components, 1);
    }

    #[test]
    fn path() {
        let m = compute_metrics(&cg(3, &[(0, 1), (1, 2)]));
        assert_eq!(m.diameter, 2);
        assert_eq!(m.clustering_coefficient, 0.0);
        assert!((m.density - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.connected_components, 1);
    }

    #[test]
    fn disjoint_edges() {
        let m = compute_metrics(&cg(4, &[(0, 1), (2, 3)]));
        assert_eq!(m.connected_components, 2);
        assert_eq!(m.diameter, 1);
    }

    #[test]
    fn empty_and_single() {
        let m = compute_metrics(&ClassGraph::default());
        assert_eq!((m.node_count, m.connected_components, m.diameter), (0, 0, 0));
        assert_eq!(m.density, 0.0);
        let m = compute_metrics(&cg(1, &[(0, 0)]));
        assert_eq!((m.node_count, m.edge_count, m.diameter), (1, 1, 0));
        assert_eq!(m.avg_neighbors, 0.0);
    }

    #[test]
    fn labels_and_direction_collapse() {
        let mut g = cg(2, &[(0, 1), (1, 0)]);
        g.edges.insert(("http://c/0".into(), "http://q".into(), "http://c/1".into()));
        let m = compute_metrics(&g);
        assert_eq!(m.edge_count, 3);
        assert_eq!(m.avg_neighbors, 1.0);
        assert_eq!(m.density, 1.0);
    }

    #[test]
    fn class_graph_from_triples() {
        let iri = |s: &str| Term::Iri(s.to_string());
        let g: RdfGraph = [
            Triple::new("http://i/p1", RDF_TYPE, iri("http://C/Patient")),
            Triple::new("http://i/d1", RDF_TYPE, iri("http://C/Disease")),
            Triple::new("http://i/d1", RDF_TYPE, iri("http://C/Concept")),
            Triple::new("http://i/p1", "http://p/has", iri("http://i/d1")),
            Triple::new(
                "http://i/p1",
                "http://p/name",
                Term::Literal { value: "x".into(), datatype: None, language: None },
            ),
            Triple::new("http://i/p1", "http://p/untyped", iri("http://i/zzz")),
        ]
        .into_iter()
        .collect();
        let c = build_class_graph(&g, RDF_TYPE);
        assert_eq!(c.vertices().len(), 3);
        assert_eq!(c.edges().len(), 2);
        assert!(build_class_graph(&RdfGraph::default(), RDF_TYPE).vertices().is_empty());
    }

    #[test]
    fn pure() {
        let g = cg(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]);
        assert_eq!(compute_metrics(&g), compute_metrics(&g));
    }
}
