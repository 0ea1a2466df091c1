use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ItineraryError;
use crate::world::{EdgeIdx, WorldGraph};

/// A total DFA over the edge alphabet of a world graph.
///
/// Every state has a transition for every edge; partial inputs are completed
/// with an explicit sink. States are dense `u32` indices.
#[derive(Debug, Clone)]
pub struct ItineraryDfa {
    alphabet: Arc<[String]>,
    initial: u32,
    accepting: Vec<bool>,
    /// Row-major transition table: `delta[state * |E| + edge]`.
    delta: Vec<u32>,
}

impl ItineraryDfa {
    pub(crate) fn new(
        alphabet: Arc<[String]>,
        initial: u32,
        accepting: Vec<bool>,
        delta: Vec<u32>,
    ) -> Self {
        debug_assert_eq!(delta.len(), accepting.len() * alphabet.len());
        ItineraryDfa {
            alphabet,
            initial,
            accepting,
            delta,
        }
    }

    pub fn alphabet(&self) -> &Arc<[String]> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    pub fn step(&self, state: u32, edge: EdgeIdx) -> u32 {
        self.delta[state as usize * self.alphabet.len() + edge.idx()]
    }

    /// Standard DFA acceptance over edge indices.
    pub fn accepts(&self, word: &[EdgeIdx]) -> Result<bool, ItineraryError> {
        let mut state = self.initial;
        for &e in word {
            if e.idx() >= self.alphabet.len() {
                return Err(ItineraryError::UnknownEdgeId(format!("#{}", e.0)));
            }
            state = self.step(state, e);
        }
        Ok(self.accepting[state as usize])
    }

    /// Acceptance over whitespace-level edge names.
    pub fn accepts_names(&self, word: &[&str]) -> Result<bool, ItineraryError> {
        let index: HashMap<&str, u32> = self
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();
        let mut resolved = Vec::with_capacity(word.len());
        for name in word {
            let e = index
                .get(name)
                .ok_or_else(|| ItineraryError::UnknownEdgeId(name.to_string()))?;
            resolved.push(EdgeIdx(*e));
        }
        self.accepts(&resolved)
    }

    fn check_same_alphabet(&self, other: &ItineraryDfa) -> Result<(), ItineraryError> {
        if Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(ItineraryError::AlphabetMismatch)
        }
    }

    /// Complement: flip acceptance on the (total) automaton.
    pub fn complement(&self) -> ItineraryDfa {
        ItineraryDfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            accepting: self.accepting.iter().map(|&a| !a).collect(),
            delta: self.delta.clone(),
        }
        .minimized()
    }

    fn product(
        &self,
        other: &ItineraryDfa,
        accept: impl Fn(bool, bool) -> bool,
    ) -> Result<ItineraryDfa, ItineraryError> {
        self.check_same_alphabet(other)?;
        let k = self.alphabet.len();
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut states = vec![(self.initial, other.initial)];
        index.insert((self.initial, other.initial), 0);
        let mut accepting = Vec::new();
        let mut delta = Vec::new();
        let mut at = 0usize;
        while at < states.len() {
            let (a, b) = states[at];
            accepting.push(accept(
                self.accepting[a as usize],
                other.accepting[b as usize],
            ));
            for c in 0..k {
                let succ = (
                    self.delta[a as usize * k + c],
                    other.delta[b as usize * k + c],
                );
                let id = *index.entry(succ).or_insert_with(|| {
                    states.push(succ);
                    (states.len() - 1) as u32
                });
                delta.push(id);
            }
            at += 1;
        }
        Ok(ItineraryDfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting,
            delta,
        }
        .minimized())
    }

    pub fn intersect(&self, other: &ItineraryDfa) -> Result<ItineraryDfa, ItineraryError> {
        self.product(other, |a, b| a && b)
    }

    pub fn union(&self, other: &ItineraryDfa) -> Result<ItineraryDfa, ItineraryError> {
        self.product(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &ItineraryDfa) -> Result<ItineraryDfa, ItineraryError> {
        self.product(other, |a, b| a && !b)
    }

    /// True iff the two automata accept the same language, decided by
    /// searching the product for a state with differing acceptance.
    pub fn equivalent(&self, other: &ItineraryDfa) -> Result<bool, ItineraryError> {
        self.check_same_alphabet(other)?;
        let k = self.alphabet.len();
        let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back((self.initial, other.initial));
        seen.insert((self.initial, other.initial), ());
        while let Some((a, b)) = queue.pop_front() {
            if self.accepting[a as usize] != other.accepting[b as usize] {
                return Ok(false);
            }
            for c in 0..k {
                let succ = (
                    self.delta[a as usize * k + c],
                    other.delta[b as usize * k + c],
                );
                if seen.insert(succ, ()).is_none() {
                    queue.push_back(succ);
                }
            }
        }
        Ok(true)
    }

    pub fn language_is_empty(&self) -> bool {
        let k = self.alphabet.len();
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::new();
        seen[self.initial as usize] = true;
        queue.push_back(self.initial);
        while let Some(s) = queue.pop_front() {
            if self.accepting[s as usize] {
                return false;
            }
            for c in 0..k {
                let t = self.delta[s as usize * k + c];
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        true
    }

    /// Restrict to reachable states, keeping BFS discovery order.
    fn reachable(&self) -> ItineraryDfa {
        let k = self.alphabet.len();
        let mut remap = vec![u32::MAX; self.num_states()];
        let mut order = Vec::new();
        remap[self.initial as usize] = 0;
        order.push(self.initial);
        let mut at = 0;
        while at < order.len() {
            let s = order[at];
            for c in 0..k {
                let t = self.delta[s as usize * k + c];
                if remap[t as usize] == u32::MAX {
                    remap[t as usize] = order.len() as u32;
                    order.push(t);
                }
            }
            at += 1;
        }
        let mut accepting = Vec::with_capacity(order.len());
        let mut delta = Vec::with_capacity(order.len() * k);
        for &s in &order {
            accepting.push(self.accepting[s as usize]);
            for c in 0..k {
                delta.push(remap[self.delta[s as usize * k + c] as usize]);
            }
        }
        ItineraryDfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting,
            delta,
        }
    }

    /// The minimal equivalent DFA, canonically numbered by BFS discovery
    /// order (transitions explored in edge order), so equal languages yield
    /// byte-identical automata.
    pub fn minimized(&self) -> ItineraryDfa {
        let reach = self.reachable();
        let block_of = hopcroft(&reach);
        let num_blocks = block_of.iter().map(|&b| b + 1).max().unwrap_or(1) as usize;
        let k = reach.alphabet.len();

        // representative per block
        let mut rep = vec![u32::MAX; num_blocks];
        for (s, &b) in block_of.iter().enumerate() {
            if rep[b as usize] == u32::MAX {
                rep[b as usize] = s as u32;
            }
        }
        let mut accepting = Vec::with_capacity(num_blocks);
        let mut delta = Vec::with_capacity(num_blocks * k);
        for b in 0..num_blocks {
            let s = rep[b] as usize;
            accepting.push(reach.accepting[s]);
            for c in 0..k {
                delta.push(block_of[reach.delta[s * k + c] as usize]);
            }
        }
        let quotient = ItineraryDfa {
            alphabet: reach.alphabet.clone(),
            initial: block_of[reach.initial as usize],
            accepting,
            delta,
        };
        // Renumber blocks canonically.
        quotient.reachable()
    }

    /// Read an explicit DFA description, completing a partial transition
    /// table with a fresh sink state.
    pub fn from_file(file: &DfaFile, g: &WorldGraph) -> Result<ItineraryDfa, ItineraryError> {
        let alphabet: Arc<[String]> = g.edge_names().into();
        let k = alphabet.len();
        let mut state_index: HashMap<&str, u32> = HashMap::new();
        for (i, s) in file.states.iter().enumerate() {
            if state_index.insert(s.as_str(), i as u32).is_some() {
                return Err(ItineraryError::ConflictingTransition {
                    from: s.clone(),
                    edge: "<duplicate state>".into(),
                });
            }
        }
        let edge_index: HashMap<&str, usize> = alphabet
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let initial = *state_index
            .get(file.initial.as_str())
            .ok_or_else(|| ItineraryError::UnknownState(file.initial.clone()))?;
        let n = file.states.len();
        // state n is the implicit sink
        let sink = n as u32;
        let mut delta = vec![u32::MAX; (n + 1) * k];
        for rec in &file.transitions {
            let from = *state_index
                .get(rec.from.as_str())
                .ok_or_else(|| ItineraryError::UnknownState(rec.from.clone()))?;
            let to = *state_index
                .get(rec.to.as_str())
                .ok_or_else(|| ItineraryError::UnknownState(rec.to.clone()))?;
            let edge = *edge_index
                .get(rec.edge.as_str())
                .ok_or_else(|| ItineraryError::UnknownEdgeId(rec.edge.clone()))?;
            let slot = &mut delta[from as usize * k + edge];
            if *slot != u32::MAX {
                return Err(ItineraryError::ConflictingTransition {
                    from: rec.from.clone(),
                    edge: rec.edge.clone(),
                });
            }
            *slot = to;
        }
        for slot in delta.iter_mut() {
            if *slot == u32::MAX {
                *slot = sink;
            }
        }
        let mut accepting = vec![false; n + 1];
        for s in &file.accepting {
            let i = *state_index
                .get(s.as_str())
                .ok_or_else(|| ItineraryError::UnknownState(s.clone()))?;
            accepting[i as usize] = true;
        }
        Ok(ItineraryDfa {
            alphabet,
            initial,
            accepting,
            delta,
        }
        .minimized())
    }

    /// Dump as an explicit DFA description with states named `q0..qN`.
    /// Transitions into a non-accepting all-sink state are omitted, so the
    /// output is the partial form completed by [`ItineraryDfa::from_file`].
    pub fn to_file(&self) -> DfaFile {
        let k = self.alphabet.len();
        let name = |s: u32| format!("q{s}");
        // detect a sink: non-accepting state with all self-loops
        let sink = (0..self.num_states() as u32).find(|&s| {
            !self.accepting[s as usize]
                && (0..k).all(|c| self.delta[s as usize * k + c] == s)
        });
        let keep: Vec<u32> = (0..self.num_states() as u32)
            .filter(|&s| Some(s) != sink || s == self.initial)
            .collect();
        let mut transitions = Vec::new();
        for &s in &keep {
            for c in 0..k {
                let t = self.delta[s as usize * k + c];
                if Some(t) == sink {
                    continue;
                }
                transitions.push(TransitionRecord {
                    from: name(s),
                    edge: self.alphabet[c].clone(),
                    to: name(t),
                });
            }
        }
        DfaFile {
            states: keep.iter().map(|&s| name(s)).collect(),
            initial: name(self.initial),
            accepting: keep
                .iter()
                .filter(|&&s| self.accepting[s as usize])
                .map(|&s| name(s))
                .collect(),
            transitions,
        }
    }
}

/// Hopcroft partition refinement; returns the block id of each state.
/// Expects a trim automaton (all states reachable).
fn hopcroft(d: &ItineraryDfa) -> Vec<u32> {
    let n = d.num_states();
    let k = d.alphabet.len();
    if n == 0 {
        return Vec::new();
    }

    // inverse transitions per symbol
    let mut inv_off = vec![vec![0usize; n + 1]; k];
    for s in 0..n {
        for c in 0..k {
            inv_off[c][d.delta[s * k + c] as usize + 1] += 1;
        }
    }
    let mut inv = vec![vec![0u32; n]; k];
    for c in 0..k {
        for t in 0..n {
            inv_off[c][t + 1] += inv_off[c][t];
        }
        let mut fill = inv_off[c].clone();
        for s in 0..n {
            let t = d.delta[s * k + c] as usize;
            inv[c][fill[t]] = s as u32;
            fill[t] += 1;
        }
    }

    // partition structure: elems grouped by block, marks at block fronts
    let mut elems: Vec<u32> = (0..n as u32).collect();
    elems.sort_by_key(|&s| !d.accepting[s as usize]);
    let mut loc = vec![0usize; n];
    let mut block_of = vec![0u32; n];
    let num_accepting = d.accepting.iter().filter(|&&a| a).count();
    let mut start: Vec<usize> = Vec::new();
    let mut len: Vec<usize> = Vec::new();
    if num_accepting > 0 {
        start.push(0);
        len.push(num_accepting);
    }
    if num_accepting < n {
        start.push(num_accepting);
        len.push(n - num_accepting);
    }
    for (b, (&s0, &l)) in start.iter().zip(len.iter()).enumerate() {
        for i in s0..s0 + l {
            loc[elems[i] as usize] = i;
            block_of[elems[i] as usize] = b as u32;
        }
    }
    let mut marked = vec![0usize; start.len()];

    let mut worklist: VecDeque<(u32, usize)> = VecDeque::new();
    let mut in_worklist: std::collections::HashSet<(u32, usize)> = Default::default();
    for b in 0..start.len() as u32 {
        for c in 0..k {
            worklist.push_back((b, c));
            in_worklist.insert((b, c));
        }
    }

    let mut touched: Vec<u32> = Vec::new();
    while let Some((a, c)) = worklist.pop_front() {
        in_worklist.remove(&(a, c));
        // gather predecessors of block a's current members under symbol c
        let members: Vec<u32> =
            elems[start[a as usize]..start[a as usize] + len[a as usize]].to_vec();
        touched.clear();
        for &t in &members {
            let lo = inv_off[c][t as usize];
            let hi = inv_off[c][t as usize + 1];
            for i in lo..hi {
                let p = inv[c][i] as usize;
                let b = block_of[p] as usize;
                if marked[b] == 0 {
                    touched.push(b as u32);
                }
                // swap p to the marked prefix of its block
                let pos = loc[p];
                let dst = start[b] + marked[b];
                if pos != dst {
                    let other = elems[dst] as usize;
                    elems.swap(pos, dst);
                    loc[p] = dst;
                    loc[other] = pos;
                }
                marked[b] += 1;
            }
        }
        for &bt in &touched {
            let b = bt as usize;
            let m = marked[b];
            marked[b] = 0;
            if m == 0 || m == len[b] {
                continue;
            }
            // split: marked prefix becomes a new block
            let nb = start.len();
            start.push(start[b]);
            len.push(m);
            marked.push(0);
            start[b] += m;
            len[b] -= m;
            for i in start[nb]..start[nb] + len[nb] {
                block_of[elems[i] as usize] = nb as u32;
            }
            let small = if len[nb] <= len[b] { nb as u32 } else { bt };
            for sym in 0..k {
                if in_worklist.contains(&(bt, sym)) {
                    // pending splitter: both halves must be processed
                    worklist.push_back((nb as u32, sym));
                    in_worklist.insert((nb as u32, sym));
                } else {
                    worklist.push_back((small, sym));
                    in_worklist.insert((small, sym));
                }
            }
        }
    }
    block_of
}

/// On-disk DFA description: `{states, initial, accepting, transitions}`.
/// A partial transition table is completed with a sink on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaFile {
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from: String,
    pub edge: String,
    pub to: String,
}
