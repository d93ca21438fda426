//! The quantifier-alternation graph: sorts as vertices, edges for explicit
//! forall/exists alternations and for function symbols.

use std::collections::BTreeSet;

use super::{nnf, Formula, Signature};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeProvenance {
    /// An exists of the target sort nested under a forall of the source sort.
    Alternation,
    /// A declared function with an argument of the source sort and result of
    /// the target sort.
    Function(String),
}

#[derive(Debug, Clone)]
pub struct QaGraph {
    pub vertices: BTreeSet<String>,
    pub edges: Vec<(String, String, EdgeProvenance)>,
}

impl QaGraph {
    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|(f, t, _)| f == from && t == to)
    }

    /// Edges excluding self-loops at `skip`, used for the OSC check.
    pub fn edges_excluding_self_loop(&self, skip: &str) -> Vec<&(String, String, EdgeProvenance)> {
        self.edges
            .iter()
            .filter(|(f, t, _)| !(f == skip && t == skip))
            .collect()
    }

    pub fn is_acyclic(&self) -> bool {
        // DFS with colors over the vertex set
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let verts: Vec<&String> = self.vertices.iter().collect();
        let mut color = vec![Color::White; verts.len()];
        fn visit(
            v: usize,
            verts: &[&String],
            edges: &[(String, String, EdgeProvenance)],
            color: &mut [Color],
        ) -> bool {
            color[v] = Color::Gray;
            for (f, t, _) in edges {
                if f == verts[v] {
                    let u = verts.iter().position(|w| *w == t).unwrap();
                    match color[u] {
                        Color::Gray => return false,
                        Color::White => {
                            if !visit(u, verts, edges, color) {
                                return false;
                            }
                        }
                        Color::Black => {}
                    }
                }
            }
            color[v] = Color::Black;
            true
        }
        for v in 0..verts.len() {
            if color[v] == Color::White && !visit(v, &verts, &self.edges, &mut color) {
                return false;
            }
        }
        true
    }
}

/// Builds the quantifier-alternation graph of `f` over `sig`. Explicit
/// alternation edges are read off the NNF of `f`; function edges come from
/// every declared function of the signature.
pub fn qa_graph(f: &Formula, sig: &Signature) -> QaGraph {
    let mut vertices: BTreeSet<String> = sig.sorts.iter().map(|s| s.name.clone()).collect();
    let mut edges = Vec::new();

    for (name, (args, result)) in &sig.functions {
        for a in args {
            vertices.insert(a.clone());
            vertices.insert(result.clone());
            let e = (a.clone(), result.clone(), EdgeProvenance::Function(name.clone()));
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }

    fn walk(
        f: &Formula,
        universals: &mut Vec<String>,
        vertices: &mut BTreeSet<String>,
        edges: &mut Vec<(String, String, EdgeProvenance)>,
    ) {
        match f {
            Formula::Forall(_, s, body) => {
                vertices.insert(s.clone());
                universals.push(s.clone());
                walk(body, universals, vertices, edges);
                universals.pop();
            }
            Formula::Exists(_, s, body) => {
                vertices.insert(s.clone());
                for u in universals.iter() {
                    let e = (u.clone(), s.clone(), EdgeProvenance::Alternation);
                    if !edges.contains(&e) {
                        edges.push(e);
                    }
                }
                walk(body, universals, vertices, edges);
            }
            Formula::Not(g) => walk(g, universals, vertices, edges),
            Formula::And(gs) | Formula::Or(gs) => {
                for g in gs {
                    walk(g, universals, vertices, edges);
                }
            }
            Formula::Implies(a, b) => {
                walk(a, universals, vertices, edges);
                walk(b, universals, vertices, edges);
            }
            _ => {}
        }
    }
    walk(&nnf(f), &mut Vec::new(), &mut vertices, &mut edges);

    QaGraph { vertices, edges }
}
