//! Shared fixture loading and independent oracles for integration tests.
//!
//! The enumeration oracle here deliberately avoids the fixed-point code
//! path: it walks the world graph directly and groups walks by their
//! observation sequences.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use itival_core::itinerary::{compile, parse_itinerary, ItineraryDfa};
use itival_core::product::ProductAutomaton;
use itival_core::world::{EdgeIdx, SensorSelection, WorldGraph};
use itival_core::ObservationSequence;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn department() -> WorldGraph {
    let text = std::fs::read_to_string(fixtures_dir().join("department.world.json"))
        .expect("department fixture");
    WorldGraph::from_str(&text).expect("department fixture validates")
}

/// Compile the row-N itinerary of the department study (1-based).
pub fn department_itinerary(g: &WorldGraph, row: usize) -> ItineraryDfa {
    let path = fixtures_dir().join(format!("itineraries/row{row}.itin"));
    let text = std::fs::read_to_string(&path).expect("itinerary fixture");
    let expr = parse_itinerary(text.trim()).expect("itinerary parses");
    compile(&expr, g).expect("itinerary compiles")
}

/// Enumerate every walk of length ≤ `max_len` with its product end state
/// and observation sequence, and return all ordered end-state pairs whose
/// walks produce equal sequences.
pub fn equal_observation_pairs(
    g: &WorldGraph,
    p: &ProductAutomaton,
    m: &SensorSelection,
    max_len: usize,
) -> HashSet<(u32, u32)> {
    let mut by_obs: HashMap<ObservationSequence, HashSet<u32>> = HashMap::new();
    // frontier of (walk end vertex implied by product state, product state, obs so far)
    let mut frontier: Vec<(u32, ObservationSequence)> =
        vec![(p.initial(), ObservationSequence::default())];
    by_obs
        .entry(ObservationSequence::default())
        .or_default()
        .insert(p.initial());
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (state, obs) in &frontier {
            for &(e, succ) in p.out(*state) {
                let mut symbols: Vec<Vec<_>> = obs.symbols().to_vec();
                symbols.push(g.edge_observation(e, m));
                let extended = ObservationSequence::from_symbols(symbols);
                by_obs.entry(extended.clone()).or_default().insert(succ);
                next.push((succ, extended));
            }
        }
        frontier = next;
    }
    let mut pairs = HashSet::new();
    for states in by_obs.values() {
        for &x in states {
            for &y in states {
                pairs.insert((x, y));
            }
        }
    }
    pairs
}

/// All walks of length ≤ `max_len`, as edge-index sequences.
pub fn walks_up_to(g: &WorldGraph, max_len: usize) -> Vec<Vec<EdgeIdx>> {
    let mut all = vec![vec![]];
    let mut frontier: Vec<(u32, Vec<EdgeIdx>)> = vec![(g.initial().0, Vec::new())];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (v, walk) in &frontier {
            for &e in g.out_edges(itival_core::world::VertexIdx(*v)) {
                let mut w = walk.clone();
                w.push(e);
                all.push(w.clone());
                next.push((g.edge(e).tgt().0, w));
            }
        }
        frontier = next;
    }
    all
}
