//! The polynomial certification decision.
//!
//! A selection M certifies an itinerary iff no in-itinerary walk and no
//! out-of-itinerary walk produce the same observation sequence. The decision
//! computes the least fixed point R of a pair relation over product states:
//! seed with the initial pair, then
//!
//! * advance both sides along edges whose masked labels agree, and
//! * advance either side alone along an edge whose masked label is empty.
//!
//! M certifies iff R relates no accepting state to a non-accepting one.
//! Every relation entry keeps one back-pointer, so a refuting pair unwinds
//! to a concrete witness pair of walks with equal observation sequences.

use std::collections::HashMap;

use thiserror::Error;

use crate::itinerary::{ItineraryDfa, ItineraryError};
use crate::product::ProductAutomaton;
use crate::world::{EdgeIdx, EventIdx, SensorSelection, WorldGraph};

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("selection does not certify the itinerary; stream classification would be ambiguous")]
    NotCertifying,
    #[error(transparent)]
    Itinerary(#[from] ItineraryError),
}

/// Per-edge masked labels λ(e) ∩ Y_M, interned into equality classes.
#[derive(Debug)]
pub struct MaskedLabels {
    /// Class id of each edge's masked label.
    class: Vec<u32>,
    /// Class id of the empty observation, if some edge is unobservable.
    empty_class: Option<u32>,
    /// Interner from sorted masked event lists to class ids.
    by_symbol: HashMap<Vec<EventIdx>, u32>,
}

impl MaskedLabels {
    pub fn build(g: &WorldGraph, m: &SensorSelection) -> MaskedLabels {
        let enabled = m.enabled_events(g);
        let mut by_symbol: HashMap<Vec<EventIdx>, u32> = HashMap::new();
        let mut class = Vec::with_capacity(g.num_edges());
        let mut empty_class = None;
        for e in 0..g.num_edges() {
            let masked: Vec<EventIdx> = g
                .edge(EdgeIdx(e as u32))
                .label()
                .iter()
                .copied()
                .filter(|y| enabled[y.idx()])
                .collect();
            let next = by_symbol.len() as u32;
            let id = *by_symbol.entry(masked.clone()).or_insert(next);
            if masked.is_empty() {
                empty_class = Some(id);
            }
            class.push(id);
        }
        MaskedLabels {
            class,
            empty_class,
            by_symbol,
        }
    }

    pub fn class_of_edge(&self, e: EdgeIdx) -> u32 {
        self.class[e.idx()]
    }

    pub fn is_silent(&self, e: EdgeIdx) -> bool {
        Some(self.class[e.idx()]) == self.empty_class
    }

    /// Class of an arbitrary (sorted, non-empty) observation symbol, if any
    /// edge can produce it.
    pub fn class_of_symbol(&self, symbol: &[EventIdx]) -> Option<u32> {
        self.by_symbol.get(symbol).copied()
    }
}

/// How a pair entered the relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Seed,
    /// Both sides advanced on edges with equal masked labels.
    Both(EdgeIdx, EdgeIdx),
    /// Left side advanced alone on a silent edge.
    Left(EdgeIdx),
    /// Right side advanced alone on a silent edge.
    Right(EdgeIdx),
}

/// The fixed-point relation R over ordered product-state pairs.
#[derive(Debug)]
pub struct PairRelation {
    n: usize,
    /// Insertion index per pair code `x·n + y`, `u32::MAX` if absent.
    slot: Vec<u32>,
    pairs: Vec<(u32, u32)>,
    /// Back-pointers aligned with `pairs` (empty when tracking is off).
    parent: Vec<(u32, Step)>,
    tracked: bool,
}

impl PairRelation {
    fn new(n: usize, tracked: bool) -> PairRelation {
        PairRelation {
            n,
            slot: vec![u32::MAX; n * n],
            pairs: Vec::new(),
            parent: Vec::new(),
            tracked,
        }
    }

    fn insert(&mut self, x: u32, y: u32, from: u32, step: Step) -> bool {
        let code = x as usize * self.n + y as usize;
        if self.slot[code] != u32::MAX {
            return false;
        }
        self.slot[code] = self.pairs.len() as u32;
        self.pairs.push((x, y));
        if self.tracked {
            self.parent.push((from, step));
        }
        true
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.slot[x as usize * self.n + y as usize] != u32::MAX
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.pairs.iter().copied()
    }

    /// Rebuild a witness walk pair for a related pair by backward chaining.
    /// The left walk reaches `x`, the right walk reaches `y`, and both yield
    /// the same observation sequence. First-found parents are kept, so the
    /// witness is not necessarily shortest.
    pub fn witness(&self, x: u32, y: u32) -> Option<(Vec<EdgeIdx>, Vec<EdgeIdx>)> {
        if !self.tracked {
            return None;
        }
        let code = x as usize * self.n + y as usize;
        let mut at = self.slot[code];
        if at == u32::MAX {
            return None;
        }
        let mut left = Vec::new();
        let mut right = Vec::new();
        loop {
            let (from, step) = self.parent[at as usize];
            match step {
                Step::Seed => break,
                Step::Both(e, d) => {
                    left.push(e);
                    right.push(d);
                }
                Step::Left(e) => left.push(e),
                Step::Right(d) => right.push(d),
            }
            at = from;
        }
        left.reverse();
        right.reverse();
        Some((left, right))
    }
}

/// Fixed-point computation. With `find_conflict`, stops as soon as a pair
/// mixing accepting and non-accepting states appears (the relation is then
/// truncated but the certification answer is already decided).
fn fixed_point(
    p: &ProductAutomaton,
    labels: &MaskedLabels,
    tracked: bool,
    stop_at_conflict: bool,
) -> (PairRelation, Option<(u32, u32)>) {
    let n = p.num_states();
    let mut rel = PairRelation::new(n, tracked);
    let init = p.initial();
    rel.insert(init, init, 0, Step::Seed);
    let mut conflict = None;
    let mut head = 0usize;
    'outer: while head < rel.pairs.len() {
        let (q, r) = rel.pairs[head];
        let from = head as u32;
        head += 1;
        for &(e, q2) in p.out(q) {
            let ce = labels.class_of_edge(e);
            if labels.is_silent(e) && rel.insert(q2, r, from, Step::Left(e)) {
                if stop_at_conflict && p.is_accepting(q2) != p.is_accepting(r) {
                    conflict = Some((q2, r));
                    break 'outer;
                }
            }
            for &(d, r2) in p.out(r) {
                if labels.class_of_edge(d) == ce && rel.insert(q2, r2, from, Step::Both(e, d)) {
                    if stop_at_conflict && p.is_accepting(q2) != p.is_accepting(r2) {
                        conflict = Some((q2, r2));
                        break 'outer;
                    }
                }
            }
        }
        for &(d, r2) in p.out(r) {
            if labels.is_silent(d) && rel.insert(q, r2, from, Step::Right(d)) {
                if stop_at_conflict && p.is_accepting(q) != p.is_accepting(r2) {
                    conflict = Some((q, r2));
                    break 'outer;
                }
            }
        }
    }
    (rel, conflict)
}

/// Compute the full fixed-point relation for selection `m`, with witness
/// back-pointers.
pub fn compute_relation(p: &ProductAutomaton, g: &WorldGraph, m: &SensorSelection) -> PairRelation {
    let labels = MaskedLabels::build(g, m);
    fixed_point(p, &labels, true, false).0
}

/// Outcome of a certification check.
#[derive(Debug, Clone)]
pub struct CertificationResult {
    pub certifying: bool,
    /// A related (accepting, non-accepting) pair refuting certification.
    pub conflict: Option<(u32, u32)>,
    /// Walks (r, r') with equal observation sequences, r in-itinerary and
    /// r' an out-of-itinerary walk.
    pub witness: Option<(Vec<EdgeIdx>, Vec<EdgeIdx>)>,
    /// True when the itinerary admits no conforming walk at all
    /// (L(I) ∩ Walks = ∅): every selection then certifies vacuously.
    pub vacuous: bool,
}

/// Reusable certification oracle for one (world, itinerary) instance.
/// Pure per call, so independent selections can be checked concurrently.
pub struct Certifier<'a> {
    g: &'a WorldGraph,
    product: ProductAutomaton,
}

impl<'a> Certifier<'a> {
    pub fn new(g: &'a WorldGraph, i: &ItineraryDfa) -> Result<Certifier<'a>, ItineraryError> {
        let product = ProductAutomaton::build(g, i)?;
        Ok(Certifier { g, product })
    }

    pub fn product(&self) -> &ProductAutomaton {
        &self.product
    }

    pub fn world(&self) -> &WorldGraph {
        self.g
    }

    /// Fast boolean check with early exit and no witness tracking.
    pub fn certifies(&self, m: &SensorSelection) -> bool {
        let labels = MaskedLabels::build(self.g, m);
        fixed_point(&self.product, &labels, false, true).1.is_none()
    }

    pub fn relation(&self, m: &SensorSelection) -> PairRelation {
        let labels = MaskedLabels::build(self.g, m);
        fixed_point(&self.product, &labels, true, false).0
    }

    /// Full check with witness extraction on failure.
    pub fn check(&self, m: &SensorSelection) -> CertificationResult {
        let labels = MaskedLabels::build(self.g, m);
        let (rel, _) = fixed_point(&self.product, &labels, true, false);
        let mut conflict = None;
        for (x, y) in rel.iter() {
            if self.product.is_accepting(x) != self.product.is_accepting(y) {
                conflict = Some((x, y));
                break;
            }
        }
        let vacuous = self.product.num_accepting() == 0;
        match conflict {
            None => CertificationResult {
                certifying: true,
                conflict: None,
                witness: None,
                vacuous,
            },
            Some((x, y)) => {
                let (wx, wy) = rel.witness(x, y).expect("tracked relation");
                // orient so the first component is the in-itinerary walk
                let ((acc, rej), (walk_in, walk_out)) = if self.product.is_accepting(x) {
                    ((x, y), (wx, wy))
                } else {
                    ((y, x), (wy, wx))
                };
                CertificationResult {
                    certifying: false,
                    conflict: Some((acc, rej)),
                    witness: Some((walk_in, walk_out)),
                    vacuous,
                }
            }
        }
    }
}

/// Decide whether `m` certifies itinerary `i` on `g`, with a witness walk
/// pair on failure.
pub fn is_certifying(
    g: &WorldGraph,
    i: &ItineraryDfa,
    m: &SensorSelection,
) -> Result<CertificationResult, ItineraryError> {
    Ok(Certifier::new(g, i)?.check(m))
}

/// Verdict for a recorded observation stream under a certifying selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamVerdict {
    /// Every walk consistent with the stream conforms to the itinerary.
    Conform,
    /// No walk consistent with the stream conforms to the itinerary.
    Deviate,
    /// The stream matches no walk of the world graph at all.
    NoConsistentWalk,
}

/// Classify a recorded observation stream. Requires `m` to certify `i` on
/// `g`; otherwise conforming and deviating walks could share a stream and
/// the verdict would be ambiguous.
pub fn classify_stream(
    g: &WorldGraph,
    i: &ItineraryDfa,
    m: &SensorSelection,
    obs: &crate::world::ObservationSequence,
) -> Result<StreamVerdict, CertifyError> {
    let certifier = Certifier::new(g, i)?;
    if !certifier.certifies(m) {
        return Err(CertifyError::NotCertifying);
    }
    let p = certifier.product();
    let labels = MaskedLabels::build(g, m);

    // nondeterministic forward simulation closed under silent edges
    let closure = |set: &mut Vec<bool>| {
        let mut stack: Vec<u32> = (0..p.num_states() as u32)
            .filter(|&s| set[s as usize])
            .collect();
        while let Some(s) = stack.pop() {
            for &(e, t) in p.out(s) {
                if labels.is_silent(e) && !set[t as usize] {
                    set[t as usize] = true;
                    stack.push(t);
                }
            }
        }
    };

    let mut current = vec![false; p.num_states()];
    current[p.initial() as usize] = true;
    closure(&mut current);
    for symbol in obs.symbols() {
        let class = labels.class_of_symbol(symbol);
        let mut next = vec![false; p.num_states()];
        if let Some(class) = class {
            for s in 0..p.num_states() as u32 {
                if !current[s as usize] {
                    continue;
                }
                for &(e, t) in p.out(s) {
                    if labels.class_of_edge(e) == class && !labels.is_silent(e) {
                        next[t as usize] = true;
                    }
                }
            }
            closure(&mut next);
        }
        current = next;
    }

    let mut any = false;
    let mut all_accepting = true;
    let mut none_accepting = true;
    for s in 0..p.num_states() {
        if current[s] {
            any = true;
            if p.is_accepting(s as u32) {
                none_accepting = false;
            } else {
                all_accepting = false;
            }
        }
    }
    if !any {
        return Ok(StreamVerdict::NoConsistentWalk);
    }
    if all_accepting {
        Ok(StreamVerdict::Conform)
    } else if none_accepting {
        Ok(StreamVerdict::Deviate)
    } else {
        // ruled out by the certifying precondition: a mixed end-set would
        // exhibit an in/out walk pair sharing this very stream
        unreachable!("certifying selection produced an ambiguous stream");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itinerary::{compile, parse_itinerary};

    fn world(text: &str) -> WorldGraph {
        WorldGraph::from_str(text).unwrap()
    }

    fn chain_world() -> WorldGraph {
        world(
            r#"{
            "vertices": ["a", "b", "c"],
            "initial": "a",
            "sensors": {"s1": ["x"], "s2": ["y"]},
            "edges": [
                {"id": "ab", "src": "a", "tgt": "b", "label": ["x"]},
                {"id": "ba", "src": "b", "tgt": "a", "label": ["x"]},
                {"id": "bc", "src": "b", "tgt": "c", "label": ["y"]},
                {"id": "cb", "src": "c", "tgt": "b", "label": ["y"]}
            ]
        }"#,
        )
    }

    #[test]
    fn full_selection_distinct_labels_gives_diagonal() {
        // all labels distinct and non-empty => only same-word pairs arise
        let g = world(
            r#"{
            "vertices": ["a", "b"],
            "initial": "a",
            "sensors": {"s1": ["x"], "s2": ["y"]},
            "edges": [
                {"id": "ab", "src": "a", "tgt": "b", "label": ["x"]},
                {"id": "ba", "src": "b", "tgt": "a", "label": ["y"]}
            ]
        }"#,
        );
        let i = compile(&parse_itinerary("ab").unwrap(), &g).unwrap();
        let p = ProductAutomaton::build(&g, &i).unwrap();
        let m = SensorSelection::full(g.num_sensors());
        let rel = compute_relation(&p, &g, &m);
        for (x, y) in rel.iter() {
            assert_eq!(x, y, "off-diagonal pair under fully distinct labels");
        }
    }

    #[test]
    fn empty_selection_saturates_reachable_pairs() {
        let g = chain_world();
        let i = compile(&parse_itinerary("ab bc").unwrap(), &g).unwrap();
        let p = ProductAutomaton::build(&g, &i).unwrap();
        let m = SensorSelection::empty(g.num_sensors());
        let rel = compute_relation(&p, &g, &m);
        assert_eq!(rel.len(), p.num_states() * p.num_states());
    }

    #[test]
    fn relation_is_symmetric() {
        let g = chain_world();
        let i = compile(&parse_itinerary("ab (ba ab)* bc").unwrap(), &g).unwrap();
        let p = ProductAutomaton::build(&g, &i).unwrap();
        for m in [
            SensorSelection::empty(g.num_sensors()),
            SensorSelection::from_names(&g, ["s1"]).unwrap(),
            SensorSelection::full(g.num_sensors()),
        ] {
            let rel = compute_relation(&p, &g, &m);
            for (x, y) in rel.iter() {
                assert!(rel.contains(y, x), "missing mirror of ({x},{y})");
            }
        }
    }

    #[test]
    fn witnesses_reach_their_pairs_with_equal_observations() {
        let g = chain_world();
        let i = compile(&parse_itinerary("ab bc").unwrap(), &g).unwrap();
        let p = ProductAutomaton::build(&g, &i).unwrap();
        let m = SensorSelection::from_names(&g, ["s1"]).unwrap();
        let rel = compute_relation(&p, &g, &m);
        for (x, y) in rel.iter() {
            let (wl, wr) = rel.witness(x, y).unwrap();
            assert_eq!(p.delta_star(&wl), Some(x));
            assert_eq!(p.delta_star(&wr), Some(y));
            assert_eq!(g.beta(&wl, &m).unwrap(), g.beta(&wr, &m).unwrap());
        }
    }

    #[test]
    fn witness_on_failure_separates_membership() {
        let g = chain_world();
        // claims the walk ab bc; with only s1 the bc hop is invisible
        let i = compile(&parse_itinerary("ab bc").unwrap(), &g).unwrap();
        let m = SensorSelection::from_names(&g, ["s1"]).unwrap();
        let res = is_certifying(&g, &i, &m).unwrap();
        assert!(!res.certifying);
        let (walk_in, walk_out) = res.witness.unwrap();
        assert!(i.accepts(&walk_in).unwrap());
        assert!(!i.accepts(&walk_out).unwrap());
        assert!(g.is_walk(&walk_out));
        assert_eq!(
            g.beta(&walk_in, &m).unwrap(),
            g.beta(&walk_out, &m).unwrap()
        );
    }

    #[test]
    fn vacuous_itinerary_certifies_with_empty_selection() {
        let g = chain_world();
        // bc is not enabled from the initial vertex: no conforming walk
        let i = compile(&parse_itinerary("bc").unwrap(), &g).unwrap();
        let m = SensorSelection::empty(g.num_sensors());
        let res = is_certifying(&g, &i, &m).unwrap();
        assert!(res.certifying);
        assert!(res.vacuous);
    }

    #[test]
    fn classify_requires_certifying_selection() {
        let g = chain_world();
        let i = compile(&parse_itinerary("ab bc").unwrap(), &g).unwrap();
        let m = SensorSelection::from_names(&g, ["s1"]).unwrap();
        let obs = crate::world::ObservationSequence::default();
        assert!(matches!(
            classify_stream(&g, &i, &m, &obs),
            Err(CertifyError::NotCertifying)
        ));
    }

    #[test]
    fn classify_stream_verdicts() {
        let g = chain_world();
        let i = compile(&parse_itinerary("ab bc").unwrap(), &g).unwrap();
        let m = SensorSelection::full(g.num_sensors());
        assert!(Certifier::new(&g, &i).unwrap().certifies(&m));

        let ab = g.edge_index("ab").unwrap();
        let bc = g.edge_index("bc").unwrap();
        let conforming = g.beta(&[ab, bc], &m).unwrap();
        assert_eq!(
            classify_stream(&g, &i, &m, &conforming).unwrap(),
            StreamVerdict::Conform
        );

        let deviating = g.beta(&[ab], &m).unwrap();
        assert_eq!(
            classify_stream(&g, &i, &m, &deviating).unwrap(),
            StreamVerdict::Deviate
        );

        // no walk can produce y before crossing ab, which is visible
        let y = g.event_index("y").unwrap();
        let impossible = crate::world::ObservationSequence::from_symbols(vec![vec![y]]);
        assert_eq!(
            classify_stream(&g, &i, &m, &impossible).unwrap(),
            StreamVerdict::NoConsistentWalk
        );
    }
}
