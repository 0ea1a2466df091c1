//! The world-itinerary product automaton.
//!
//! A partial DFA over pairs (itinerary state, vertex): a transition on edge
//! `e` exists only where `src(e)` matches the vertex component, so the
//! trackable words are exactly the walks of the world graph and the accepting
//! runs are exactly the in-itinerary walks. Only states reachable from the
//! initial pair are materialized; unreachable pairs can never enter the pair
//! relation or the ILP's propagation, and the pair grid is quadratic in this
//! state count.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::itinerary::{ItineraryDfa, ItineraryError};
use crate::world::{EdgeIdx, VertexIdx, WorldGraph};

/// Reachable product of a world graph and an itinerary DFA. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct ProductAutomaton {
    /// (itinerary state, vertex) provenance per product state.
    states: Vec<(u32, VertexIdx)>,
    accepting: Vec<bool>,
    /// Out-transitions per state, sorted by edge index.
    out: Vec<Vec<(EdgeIdx, u32)>>,
    num_edges: usize,
}

impl ProductAutomaton {
    /// Build the reachable product. The itinerary's alphabet must be the
    /// edge set of `g`.
    pub fn build(g: &WorldGraph, i: &ItineraryDfa) -> Result<ProductAutomaton, ItineraryError> {
        if i.alphabet().len() != g.num_edges()
            || i.alphabet()
                .iter()
                .enumerate()
                .any(|(idx, name)| g.edge_name(EdgeIdx(idx as u32)) != name)
        {
            return Err(ItineraryError::AlphabetMismatch);
        }

        let mut index: HashMap<(u32, VertexIdx), u32> = HashMap::new();
        let initial = (i.initial(), g.initial());
        let mut states = vec![initial];
        index.insert(initial, 0);
        let mut out = Vec::new();
        let mut accepting = Vec::new();
        let mut at = 0usize;
        while at < states.len() {
            let (q, v) = states[at];
            accepting.push(i.is_accepting(q));
            let mut row = Vec::new();
            for &e in g.out_edges(v) {
                let succ = (i.step(q, e), g.edge(e).tgt());
                let id = *index.entry(succ).or_insert_with(|| {
                    states.push(succ);
                    (states.len() - 1) as u32
                });
                row.push((e, id));
            }
            row.sort_by_key(|&(e, _)| e);
            out.push(row);
            at += 1;
        }
        Ok(ProductAutomaton {
            states,
            accepting,
            out,
            num_edges: g.num_edges(),
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> u32 {
        0
    }

    pub fn is_accepting(&self, s: u32) -> bool {
        self.accepting[s as usize]
    }

    pub fn num_accepting(&self) -> usize {
        self.accepting.iter().filter(|&&a| a).count()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// The (itinerary state, vertex) pair a product state came from.
    pub fn provenance(&self, s: u32) -> (u32, VertexIdx) {
        self.states[s as usize]
    }

    pub fn out(&self, s: u32) -> &[(EdgeIdx, u32)] {
        &self.out[s as usize]
    }

    /// δ_P(s, e), or None where undefined.
    pub fn successor(&self, s: u32, e: EdgeIdx) -> Option<u32> {
        self.out[s as usize]
            .binary_search_by_key(&e, |&(edge, _)| edge)
            .ok()
            .map(|i| self.out[s as usize][i].1)
    }

    /// δ*_P from the initial state; None means the run crashes.
    pub fn delta_star(&self, word: &[EdgeIdx]) -> Option<u32> {
        let mut s = self.initial();
        for &e in word {
            s = self.successor(s, e)?;
        }
        Some(s)
    }

    /// Human-readable state name `q@v` for diagnostics and exports.
    pub fn state_name(&self, g: &WorldGraph, s: u32) -> String {
        let (q, v) = self.states[s as usize];
        format!("q{}@{}", q, g.vertex_name(v))
    }

    /// Export as a DOT graph for visualization tools.
    pub fn to_dot(&self, g: &WorldGraph) -> String {
        let mut s = String::from("digraph product {\n  rankdir=LR;\n");
        for id in 0..self.num_states() as u32 {
            let shape = if self.is_accepting(id) {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(
                s,
                "  n{} [label=\"{}\", shape={}];",
                id,
                self.state_name(g, id),
                shape
            );
        }
        let _ = writeln!(s, "  init [shape=point];\n  init -> n0;");
        for id in 0..self.num_states() {
            for &(e, t) in &self.out[id] {
                let _ = writeln!(s, "  n{} -> n{} [label=\"{}\"];", id, t, g.edge_name(e));
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itinerary::{compile, parse_itinerary, walks_dfa};

    fn two_room_world() -> WorldGraph {
        WorldGraph::from_str(
            r#"{
            "vertices": ["L", "R"],
            "initial": "L",
            "sensors": {"s": ["hit"]},
            "edges": [
                {"id": "go", "src": "L", "tgt": "R", "label": ["hit"]},
                {"id": "back", "src": "R", "tgt": "L", "label": []}
            ]
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn product_of_walks_tracks_exactly_the_walks() {
        let g = two_room_world();
        let walks = walks_dfa(&g).minimized();
        let p = ProductAutomaton::build(&g, &walks).unwrap();
        assert!(p.num_states() <= walks.num_states() * g.num_vertices());
        let go = g.edge_index("go").unwrap();
        let back = g.edge_index("back").unwrap();
        assert_eq!(p.delta_star(&[]), Some(0));
        assert!(p.delta_star(&[go, back, go]).is_some());
        assert!(p.delta_star(&[back]).is_none());
        assert!(p.delta_star(&[go, go]).is_none());
    }

    #[test]
    fn acceptance_matches_itinerary_on_walks() {
        let g = two_room_world();
        let expr = parse_itinerary("go back go").unwrap();
        let dfa = compile(&expr, &g).unwrap();
        let p = ProductAutomaton::build(&g, &dfa).unwrap();
        let go = g.edge_index("go").unwrap();
        let back = g.edge_index("back").unwrap();
        let s = p.delta_star(&[go, back, go]).unwrap();
        assert!(p.is_accepting(s));
        let s = p.delta_star(&[go, back]).unwrap();
        assert!(!p.is_accepting(s));
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let g = two_room_world();
        let other = WorldGraph::from_str(
            r#"{
            "vertices": ["X"],
            "initial": "X",
            "sensors": {"s": ["hit"]},
            "edges": [{"id": "loop", "src": "X", "tgt": "X", "label": []}]
        }"#,
        )
        .unwrap();
        let dfa = walks_dfa(&other);
        assert!(matches!(
            ProductAutomaton::build(&g, &dfa),
            Err(ItineraryError::AlphabetMismatch)
        ));
    }
}
