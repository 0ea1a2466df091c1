//! World graphs: edge-labeled directed multigraphs with sensors.
//!
//! A world graph models an environment as regions (vertices) and feasible
//! transitions (edges). Each edge carries a *world-observation*: the set of
//! sensor events that fire simultaneously when an agent crosses it. Sensors
//! own pairwise-disjoint event sets, so every event has a unique owner.
//!
//! Identifiers are strings so instances read like their source descriptions
//! (`e12`, `o1+`, `b3`); internally everything is interned to dense indices.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! index_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            pub fn idx(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

index_newtype!(
    /// Dense index of a vertex within one [`WorldGraph`].
    VertexIdx
);
index_newtype!(
    /// Dense index of an edge within one [`WorldGraph`]. Edges keep their
    /// file order, so parallel edges are distinguishable by index.
    EdgeIdx
);
index_newtype!(
    /// Dense index of a sensor within one [`WorldGraph`].
    SensorIdx
);
index_newtype!(
    /// Dense index of an event within one [`WorldGraph`].
    EventIdx
);

/// Errors raised while validating or querying a world graph.
#[derive(Debug, Error)]
pub enum WorldError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("initial vertex `{0}` is not in the vertex set")]
    MissingInitialVertex(String),
    #[error("world graph has no vertices")]
    EmptyVertexSet,
    #[error("world graph has no sensors")]
    EmptySensorSet,
    #[error("event `{event}` is owned by both sensor `{first}` and sensor `{second}`")]
    OverlappingEventSets {
        event: String,
        first: String,
        second: String,
    },
    #[error("event `{event}` has no owning sensor")]
    OrphanEvent { event: String },
    #[error("sensor `{0}` has an empty event set")]
    EmptySensorEventSet(String),
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("unknown sensor id `{0}`")]
    UnknownSensor(String),
    #[error("edge sequence is not a walk (chain broken before position {0})")]
    NotAWalk(usize),
    #[error("malformed world file: {0}")]
    Format(#[from] serde_json::Error),
}

/// On-disk description of a world graph.
///
/// The schema is JSON with top-level keys `vertices`, `initial`, `sensors`
/// and `edges`. Edge order is preserved; the canonical form (as produced by
/// [`WorldGraph::to_canonical_string`]) sorts sensor ids, sensor event lists
/// and edge labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldFile {
    pub vertices: Vec<String>,
    pub initial: String,
    pub sensors: BTreeMap<String, Vec<String>>,
    pub edges: Vec<EdgeRecord>,
}

/// One edge record of a [`WorldFile`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: String,
    pub src: String,
    pub tgt: String,
    pub label: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Edge {
    name: String,
    src: VertexIdx,
    tgt: VertexIdx,
    /// Sorted event indices of the edge label λ(e).
    label: Vec<EventIdx>,
}

impl Edge {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn src(&self) -> VertexIdx {
        self.src
    }
    pub fn tgt(&self) -> VertexIdx {
        self.tgt
    }
    pub fn label(&self) -> &[EventIdx] {
        &self.label
    }
}

#[derive(Debug, Clone)]
struct Sensor {
    name: String,
    /// Sorted event indices of Y_s.
    events: Vec<EventIdx>,
}

/// A validated world graph. Immutable after construction; concurrent reads
/// are safe.
#[derive(Debug, Clone)]
pub struct WorldGraph {
    vertices: Vec<String>,
    initial: VertexIdx,
    edges: Vec<Edge>,
    sensors: Vec<Sensor>,
    /// Event names, with `event_owner[i]` the owning sensor of event `i`.
    events: Vec<String>,
    event_owner: Vec<SensorIdx>,
    vertex_by_name: HashMap<String, VertexIdx>,
    edge_by_name: HashMap<String, EdgeIdx>,
    sensor_by_name: HashMap<String, SensorIdx>,
    event_by_name: HashMap<String, EventIdx>,
    out_edges: Vec<Vec<EdgeIdx>>,
}

impl WorldGraph {
    /// Validate a raw world description against the Definition-1 invariants.
    ///
    /// Sensors are interned in sorted-name order and events in sorted order
    /// within each sensor, so indices are stable for a given file regardless
    /// of map iteration order.
    pub fn validate(raw: &WorldFile) -> Result<Self, WorldError> {
        if raw.vertices.is_empty() {
            return Err(WorldError::EmptyVertexSet);
        }
        if raw.sensors.is_empty() {
            return Err(WorldError::EmptySensorSet);
        }

        let mut vertex_by_name = HashMap::new();
        for v in &raw.vertices {
            if vertex_by_name
                .insert(v.clone(), VertexIdx(vertex_by_name.len() as u32))
                .is_some()
            {
                return Err(WorldError::DuplicateId {
                    kind: "vertex",
                    id: v.clone(),
                });
            }
        }
        let initial = *vertex_by_name
            .get(&raw.initial)
            .ok_or_else(|| WorldError::MissingInitialVertex(raw.initial.clone()))?;

        let mut sensors = Vec::new();
        let mut sensor_by_name = HashMap::new();
        let mut events: Vec<String> = Vec::new();
        let mut event_owner = Vec::new();
        let mut event_by_name: HashMap<String, EventIdx> = HashMap::new();
        for (name, event_names) in &raw.sensors {
            // BTreeMap keys are unique, so no duplicate-sensor check needed.
            let sensor_idx = SensorIdx(sensors.len() as u32);
            if event_names.is_empty() {
                return Err(WorldError::EmptySensorEventSet(name.clone()));
            }
            let mut sorted = event_names.clone();
            sorted.sort();
            let mut owned = Vec::with_capacity(sorted.len());
            for ev in &sorted {
                if let Some(&prev) = event_by_name.get(ev) {
                    let owner: SensorIdx = event_owner[prev.idx()];
                    let first: &Sensor = &sensors[owner.idx()];
                    return Err(WorldError::OverlappingEventSets {
                        event: ev.clone(),
                        first: first.name.clone(),
                        second: name.clone(),
                    });
                }
                let idx = EventIdx(events.len() as u32);
                event_by_name.insert(ev.clone(), idx);
                events.push(ev.clone());
                event_owner.push(sensor_idx);
                owned.push(idx);
            }
            sensor_by_name.insert(name.clone(), sensor_idx);
            sensors.push(Sensor {
                name: name.clone(),
                events: owned,
            });
        }

        let mut edges = Vec::new();
        let mut edge_by_name = HashMap::new();
        let mut out_edges = vec![Vec::new(); raw.vertices.len()];
        for rec in &raw.edges {
            if edge_by_name.contains_key(&rec.id) {
                return Err(WorldError::DuplicateId {
                    kind: "edge",
                    id: rec.id.clone(),
                });
            }
            let look = |v: &String| {
                vertex_by_name
                    .get(v)
                    .copied()
                    .ok_or_else(|| WorldError::UnknownVertex {
                        edge: rec.id.clone(),
                        vertex: v.clone(),
                    })
            };
            let src = look(&rec.src)?;
            let tgt = look(&rec.tgt)?;
            let mut label = Vec::with_capacity(rec.label.len());
            for ev in &rec.label {
                let idx = event_by_name
                    .get(ev)
                    .copied()
                    .ok_or_else(|| WorldError::OrphanEvent { event: ev.clone() })?;
                label.push(idx);
            }
            label.sort();
            label.dedup();
            let idx = EdgeIdx(edges.len() as u32);
            edge_by_name.insert(rec.id.clone(), idx);
            out_edges[src.idx()].push(idx);
            edges.push(Edge {
                name: rec.id.clone(),
                src,
                tgt,
                label,
            });
        }

        Ok(WorldGraph {
            vertices: raw.vertices.clone(),
            initial,
            edges,
            sensors,
            events,
            event_owner,
            vertex_by_name,
            edge_by_name,
            sensor_by_name,
            event_by_name,
            out_edges,
        })
    }

    /// Parse and validate a world graph from its JSON text form.
    pub fn from_str(text: &str) -> Result<Self, WorldError> {
        let raw: WorldFile = serde_json::from_str(text)?;
        Self::validate(&raw)
    }

    /// The canonical file form: sorted sensor map, sorted labels, edges in
    /// stored order. `serialize → parse → serialize` is byte-identical.
    pub fn to_canonical_string(&self) -> String {
        let file = WorldFile {
            vertices: self.vertices.clone(),
            initial: self.vertices[self.initial.idx()].clone(),
            sensors: self
                .sensors
                .iter()
                .map(|s| {
                    (
                        s.name.clone(),
                        s.events.iter().map(|&e| self.events[e.idx()].clone()).collect(),
                    )
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.name.clone(),
                    src: self.vertices[e.src.idx()].clone(),
                    tgt: self.vertices[e.tgt.idx()].clone(),
                    label: e.label.iter().map(|&y| self.events[y.idx()].clone()).collect(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("world serialization");
        s.push('\n');
        s
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_sensors(&self) -> usize {
        self.sensors.len()
    }
    pub fn num_events(&self) -> usize {
        self.events.len()
    }
    pub fn initial(&self) -> VertexIdx {
        self.initial
    }

    pub fn vertex_name(&self, v: VertexIdx) -> &str {
        &self.vertices[v.idx()]
    }
    pub fn edge(&self, e: EdgeIdx) -> &Edge {
        &self.edges[e.idx()]
    }
    pub fn edge_name(&self, e: EdgeIdx) -> &str {
        &self.edges[e.idx()].name
    }
    pub fn sensor_name(&self, s: SensorIdx) -> &str {
        &self.sensors[s.idx()].name
    }
    pub fn event_name(&self, y: EventIdx) -> &str {
        &self.events[y.idx()]
    }
    pub fn sensor_events(&self, s: SensorIdx) -> &[EventIdx] {
        &self.sensors[s.idx()].events
    }

    /// Edge names in index order; this is the itinerary alphabet E.
    pub fn edge_names(&self) -> Vec<String> {
        self.edges.iter().map(|e| e.name.clone()).collect()
    }

    pub fn vertex_index(&self, name: &str) -> Option<VertexIdx> {
        self.vertex_by_name.get(name).copied()
    }
    pub fn edge_index(&self, name: &str) -> Result<EdgeIdx, WorldError> {
        self.edge_by_name
            .get(name)
            .copied()
            .ok_or_else(|| WorldError::UnknownEdge(name.to_string()))
    }
    pub fn sensor_index(&self, name: &str) -> Result<SensorIdx, WorldError> {
        self.sensor_by_name
            .get(name)
            .copied()
            .ok_or_else(|| WorldError::UnknownSensor(name.to_string()))
    }
    pub fn event_index(&self, name: &str) -> Result<EventIdx, WorldError> {
        self.event_by_name
            .get(name)
            .copied()
            .ok_or_else(|| WorldError::OrphanEvent {
                event: name.to_string(),
            })
    }

    pub fn out_edges(&self, v: VertexIdx) -> &[EdgeIdx] {
        &self.out_edges[v.idx()]
    }

    /// η(y): the unique sensor owning event `y`.
    pub fn event_owner(&self, y: EventIdx) -> SensorIdx {
        self.event_owner[y.idx()]
    }

    /// Name-level η: resolves the event, then its owner.
    pub fn event_owner_by_name(&self, event: &str) -> Result<SensorIdx, WorldError> {
        Ok(self.event_owner(self.event_index(event)?))
    }

    /// Resolve a whitespace-separated edge-id sequence.
    pub fn resolve_walk(&self, names: &[&str]) -> Result<Vec<EdgeIdx>, WorldError> {
        names.iter().map(|n| self.edge_index(n)).collect()
    }

    /// λ(e) ∩ Y_M: the world-observation the system receives on `e` under
    /// selection `m`. May be empty.
    pub fn edge_observation(&self, e: EdgeIdx, m: &SensorSelection) -> Vec<EventIdx> {
        self.edges[e.idx()]
            .label
            .iter()
            .copied()
            .filter(|&y| m.contains(self.event_owner(y)))
            .collect()
    }

    /// True iff `r` chains from the initial vertex. The empty sequence is a
    /// walk.
    pub fn is_walk(&self, r: &[EdgeIdx]) -> bool {
        let mut at = self.initial;
        for &e in r {
            let edge = &self.edges[e.idx()];
            if edge.src != at {
                return false;
            }
            at = edge.tgt;
        }
        true
    }

    /// β(r, M): the observation sequence a walk produces under selection `m`,
    /// with empty symbols dropped.
    pub fn beta(&self, r: &[EdgeIdx], m: &SensorSelection) -> Result<ObservationSequence, WorldError> {
        let mut at = self.initial;
        for (i, &e) in r.iter().enumerate() {
            let edge = &self.edges[e.idx()];
            if edge.src != at {
                return Err(WorldError::NotAWalk(i));
            }
            at = edge.tgt;
        }
        Ok(ObservationSequence::from_symbols(
            r.iter().map(|&e| self.edge_observation(e, m)),
        ))
    }

    /// Format a walk as whitespace-separated edge ids.
    pub fn walk_to_string(&self, r: &[EdgeIdx]) -> String {
        r.iter()
            .map(|&e| self.edge_name(e))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A subset M ⊆ S of sensors to turn on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorSelection {
    bits: Vec<bool>,
}

impl SensorSelection {
    pub fn empty(num_sensors: usize) -> Self {
        SensorSelection {
            bits: vec![false; num_sensors],
        }
    }

    pub fn full(num_sensors: usize) -> Self {
        SensorSelection {
            bits: vec![true; num_sensors],
        }
    }

    pub fn from_indices(num_sensors: usize, indices: impl IntoIterator<Item = SensorIdx>) -> Self {
        let mut sel = Self::empty(num_sensors);
        for s in indices {
            sel.bits[s.idx()] = true;
        }
        sel
    }

    pub fn from_names<'a>(
        g: &WorldGraph,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, WorldError> {
        let mut sel = Self::empty(g.num_sensors());
        for n in names {
            sel.bits[g.sensor_index(n)?.idx()] = true;
        }
        Ok(sel)
    }

    pub fn contains(&self, s: SensorIdx) -> bool {
        self.bits[s.idx()]
    }

    pub fn insert(&mut self, s: SensorIdx) {
        self.bits[s.idx()] = true;
    }

    pub fn remove(&mut self, s: SensorIdx) {
        self.bits[s.idx()] = false;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn num_sensors(&self) -> usize {
        self.bits.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = SensorIdx> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| SensorIdx(i as u32))
    }

    pub fn is_subset_of(&self, other: &SensorSelection) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(&a, &b)| !a || b)
    }

    /// Sensor names in sorted order, for reporting.
    pub fn names(&self, g: &WorldGraph) -> Vec<String> {
        let mut v: Vec<String> = self.iter().map(|s| g.sensor_name(s).to_string()).collect();
        v.sort();
        v
    }

    /// Per-event enabled flags: true iff the owning sensor is selected.
    pub fn enabled_events(&self, g: &WorldGraph) -> Vec<bool> {
        (0..g.num_events())
            .map(|y| self.contains(g.event_owner(EventIdx(y as u32))))
            .collect()
    }
}

/// A canonical observation sequence: empty symbols are dropped at
/// construction, so equality is plain list equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ObservationSequence {
    symbols: Vec<Vec<EventIdx>>,
}

impl ObservationSequence {
    /// Build from per-edge symbols, dropping empty ones and sorting each.
    pub fn from_symbols(symbols: impl IntoIterator<Item = Vec<EventIdx>>) -> Self {
        let mut out = Vec::new();
        for mut sym in symbols {
            if sym.is_empty() {
                continue;
            }
            sym.sort();
            sym.dedup();
            out.push(sym);
        }
        ObservationSequence { symbols: out }
    }

    pub fn symbols(&self) -> &[Vec<EventIdx>] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Re-mask every symbol by a (typically smaller) selection and re-drop
    /// emptied symbols. This is the projection that underlies monotonicity.
    pub fn project(&self, g: &WorldGraph, m: &SensorSelection) -> ObservationSequence {
        let enabled = m.enabled_events(g);
        ObservationSequence::from_symbols(self.symbols.iter().map(|sym| {
            sym.iter()
                .copied()
                .filter(|y| enabled[y.idx()])
                .collect::<Vec<_>>()
        }))
    }

    pub fn to_display(&self, g: &WorldGraph) -> String {
        self.symbols
            .iter()
            .map(|sym| {
                let names: Vec<&str> = sym.iter().map(|&y| g.event_name(y)).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parse the observation-stream file format: one symbol per line as a
    /// comma-separated event list; blank lines and `#` comments ignored.
    pub fn parse(g: &WorldGraph, text: &str) -> Result<Self, WorldError> {
        let mut symbols = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut sym = Vec::new();
            for part in line.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                sym.push(g.event_index(part)?);
            }
            symbols.push(sym);
        }
        Ok(Self::from_symbols(symbols))
    }
}
