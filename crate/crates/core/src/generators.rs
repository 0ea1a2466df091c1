//! Instance generators: the set-cover hardness gadget and seeded random
//! instances for cross-validation.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::itinerary::{ItineraryDfa, ItineraryError, ItineraryExpr};
use crate::world::{EdgeRecord, WorldError, WorldFile, WorldGraph};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("set-cover universe is empty")]
    EmptyUniverse,
    #[error("duplicate universe element `{0}`")]
    DuplicateElement(String),
    #[error("subset `{subset}` contains `{element}`, which is not in the universe")]
    BadSubset { subset: String, element: String },
    #[error("universe element `{0}` is not covered by any subset")]
    UncoveredElement(String),
    #[error("name `{0}` collides with a generated gadget name")]
    NameClash(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Itinerary(#[from] ItineraryError),
}

/// A set-cover instance: universe U, named subsets covering U, and the
/// decision bound k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetCoverInstance {
    pub universe: Vec<String>,
    pub subsets: BTreeMap<String, Vec<String>>,
    pub k: usize,
}

impl SetCoverInstance {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.universe.is_empty() {
            return Err(GenError::EmptyUniverse);
        }
        let mut seen = std::collections::HashSet::new();
        for u in &self.universe {
            if !seen.insert(u) {
                return Err(GenError::DuplicateElement(u.clone()));
            }
        }
        let mut covered = std::collections::HashSet::new();
        for (name, members) in &self.subsets {
            for el in members {
                if !seen.contains(el) {
                    return Err(GenError::BadSubset {
                        subset: name.clone(),
                        element: el.clone(),
                    });
                }
                covered.insert(el);
            }
        }
        for u in &self.universe {
            if !covered.contains(u) {
                return Err(GenError::UncoveredElement(u.clone()));
            }
        }
        Ok(())
    }
}

/// The hardness-reduction gadget: rooms for universe elements off a corridor
/// of cells, beam sensors between consecutive cells, one occupancy sensor
/// per subset placed in every room whose element it covers, and an itinerary
/// that walks the corridor visiting each room once in order. A certifying
/// selection needs every beam plus a set cover of occupancy sensors, so the
/// minimum certifying size is (minimum cover) + n + 1 and the returned bound
/// is k' = k + n + 1.
pub fn reduce_setcover(
    sc: &SetCoverInstance,
) -> Result<(WorldGraph, ItineraryDfa, usize), GenError> {
    sc.validate()?;
    let n = sc.universe.len();

    let cell = |i: usize| format!("C{i}");
    let beam = |j: usize| format!("b{j}");
    let mut vertices: Vec<String> = (0..=n + 1).map(cell).collect();
    for u in &sc.universe {
        if vertices.contains(u) {
            return Err(GenError::NameClash(u.clone()));
        }
        vertices.push(u.clone());
    }

    let mut sensors: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for j in 1..=n + 1 {
        sensors.insert(beam(j), vec![beam(j)]);
    }
    for name in sc.subsets.keys() {
        if sensors.contains_key(name) {
            return Err(GenError::NameClash(name.clone()));
        }
        sensors.insert(name.clone(), vec![format!("{name}+"), format!("{name}-")]);
    }

    let mut edges = Vec::new();
    for i in 0..=n {
        edges.push(EdgeRecord {
            id: format!("e{i}"),
            src: cell(i),
            tgt: cell(i + 1),
            label: vec![beam(i + 1)],
        });
        edges.push(EdgeRecord {
            id: format!("e{i}'"),
            src: cell(i + 1),
            tgt: cell(i),
            label: vec![beam(i + 1)],
        });
    }
    for (i, u) in sc.universe.iter().enumerate() {
        let i = i + 1;
        let covering = |suffix: &str| -> Vec<String> {
            sc.subsets
                .iter()
                .filter(|(_, members)| members.contains(u))
                .map(|(name, _)| format!("{name}{suffix}"))
                .collect()
        };
        edges.push(EdgeRecord {
            id: format!("d{i}"),
            src: cell(i),
            tgt: u.clone(),
            label: covering("+"),
        });
        edges.push(EdgeRecord {
            id: format!("d{i}'"),
            src: u.clone(),
            tgt: cell(i),
            label: covering("-"),
        });
    }

    let file = WorldFile {
        vertices,
        initial: cell(0),
        sensors,
        edges,
    };
    let g = WorldGraph::validate(&file)?;

    // itinerary: the single corridor word e0 d1 d1' e1 d2 d2' e2 ... dn dn' en
    let mut word = vec!["e0".to_string()];
    for i in 1..=n {
        word.push(format!("d{i}"));
        word.push(format!("d{i}'"));
        word.push(format!("e{i}"));
    }
    let itinerary = single_word_dfa(&g, &word)?;

    Ok((g, itinerary, sc.k + n + 1))
}

/// A total DFA accepting exactly one word, as a linear chain plus sink.
fn single_word_dfa(g: &WorldGraph, word: &[String]) -> Result<ItineraryDfa, GenError> {
    let alphabet: std::sync::Arc<[String]> = g.edge_names().into();
    let k = alphabet.len();
    let len = word.len();
    let sink = (len + 1) as u32;
    let mut delta = vec![sink; (len + 2) * k];
    for (i, name) in word.iter().enumerate() {
        let e = g.edge_index(name)?;
        delta[i * k + e.idx()] = (i + 1) as u32;
    }
    let mut accepting = vec![false; len + 2];
    accepting[len] = true;
    Ok(ItineraryDfa::new(alphabet, 0, accepting, delta).minimized())
}

/// Parameters for [`random_instance`].
#[derive(Debug, Clone)]
pub struct RandomParams {
    pub vertices: usize,
    pub edges: usize,
    pub sensors: usize,
    pub events_per_sensor: usize,
    /// Probability that a given event appears in a given edge label.
    pub label_density: f64,
    /// Maximum length of the random walks seeding the itinerary.
    pub itinerary_depth: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            vertices: 4,
            edges: 8,
            sensors: 3,
            events_per_sensor: 1,
            label_density: 0.4,
            itinerary_depth: 4,
        }
    }
}

/// Deterministic random instance: a valid world graph and a well-formed
/// itinerary expression over its edges. The itinerary mixes random walks
/// with boolean combinations, so L(I) ∩ Walks(G) is usually non-trivial.
pub fn random_instance(
    seed: u64,
    params: &RandomParams,
) -> Result<(WorldGraph, ItineraryExpr), GenError> {
    if params.vertices == 0 {
        return Err(GenError::InvalidParams("vertices must be positive".into()));
    }
    if params.sensors == 0 || params.events_per_sensor == 0 {
        return Err(GenError::InvalidParams(
            "sensors and events_per_sensor must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&params.label_density) {
        return Err(GenError::InvalidParams(
            "label_density must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let vertices: Vec<String> = (0..params.vertices).map(|i| format!("v{i}")).collect();
    let mut sensors = BTreeMap::new();
    let mut all_events = Vec::new();
    for s in 0..params.sensors {
        let events: Vec<String> = (0..params.events_per_sensor)
            .map(|j| format!("s{s}e{j}"))
            .collect();
        all_events.extend(events.clone());
        sensors.insert(format!("s{s}"), events);
    }

    let mut edges = Vec::new();
    for e in 0..params.edges {
        let src = vertices[rng.gen_range(0..params.vertices)].clone();
        let tgt = vertices[rng.gen_range(0..params.vertices)].clone();
        let label: Vec<String> = all_events
            .iter()
            .filter(|_| rng.gen_bool(params.label_density))
            .cloned()
            .collect();
        edges.push(EdgeRecord {
            id: format!("e{e}"),
            src,
            tgt,
            label,
        });
    }

    let file = WorldFile {
        vertices,
        initial: "v0".into(),
        sensors,
        edges,
    };
    let g = WorldGraph::validate(&file)?;
    let expr = random_itinerary(&mut rng, &g, params.itinerary_depth);
    Ok((g, expr))
}

fn random_walk(rng: &mut ChaCha8Rng, g: &WorldGraph, max_len: usize) -> Vec<String> {
    let mut at = g.initial();
    let mut walk = Vec::new();
    let len = if max_len == 0 { 0 } else { rng.gen_range(0..=max_len) };
    for _ in 0..len {
        let out = g.out_edges(at);
        if out.is_empty() {
            break;
        }
        let e = out[rng.gen_range(0..out.len())];
        walk.push(g.edge_name(e).to_string());
        at = g.edge(e).tgt();
    }
    walk
}

fn walk_expr(walk: &[String]) -> ItineraryExpr {
    ItineraryExpr::concat(walk.iter().cloned().map(ItineraryExpr::Edge).collect())
}

fn random_itinerary(rng: &mut ChaCha8Rng, g: &WorldGraph, depth: usize) -> ItineraryExpr {
    if g.num_edges() == 0 {
        return if rng.gen_bool(0.5) {
            ItineraryExpr::Epsilon
        } else {
            ItineraryExpr::EmptySet
        };
    }
    let random_edge = |rng: &mut ChaCha8Rng| {
        g.edge_name(crate::world::EdgeIdx(rng.gen_range(0..g.num_edges()) as u32))
            .to_string()
    };
    let mut base = walk_expr(&random_walk(rng, g, depth));
    if rng.gen_bool(0.5) {
        base = ItineraryExpr::Union(
            Box::new(base),
            Box::new(walk_expr(&random_walk(rng, g, depth))),
        );
    }
    match rng.gen_range(0..5) {
        0 => base,
        1 => ItineraryExpr::Union(
            Box::new(base),
            Box::new(ItineraryExpr::Difference(
                Box::new(ItineraryExpr::Walks),
                Box::new(ItineraryExpr::all_containing(random_edge(rng))),
            )),
        ),
        2 => {
            // pump a short loop segment
            let segment = walk_expr(&random_walk(rng, g, depth.min(2)));
            ItineraryExpr::Intersection(
                Box::new(ItineraryExpr::Walks),
                Box::new(ItineraryExpr::concat(vec![
                    ItineraryExpr::Star(Box::new(segment)),
                    base,
                ])),
            )
        }
        3 => ItineraryExpr::Difference(
            Box::new(ItineraryExpr::Walks),
            Box::new(ItineraryExpr::all_containing(random_edge(rng))),
        ),
        _ => ItineraryExpr::Union(Box::new(base), Box::new(ItineraryExpr::Epsilon)),
    }
}
