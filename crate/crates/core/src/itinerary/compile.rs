//! Expression-to-DFA compilation.
//!
//! Regular operators go through a small Thompson-style NFA and subset
//! construction; boolean operators work on determinized operands. Every
//! intermediate result is minimized, which keeps the subset constructions
//! tiny at this problem's scale.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use super::{ItineraryDfa, ItineraryError, ItineraryExpr};
use crate::world::{EdgeIdx, WorldGraph};

struct Nfa {
    num_states: usize,
    /// per state: (symbol, target) pairs
    trans: Vec<Vec<(u32, u32)>>,
    /// per state: ε-targets
    eps: Vec<Vec<u32>>,
    initial: u32,
    accepting: Vec<bool>,
}

impl Nfa {
    fn from_dfa(d: &ItineraryDfa) -> Nfa {
        let k = d.alphabet().len();
        let n = d.num_states();
        let mut trans = vec![Vec::with_capacity(k); n];
        for s in 0..n {
            for c in 0..k {
                trans[s].push((c as u32, d.step(s as u32, EdgeIdx(c as u32))));
            }
        }
        Nfa {
            num_states: n,
            trans,
            eps: vec![Vec::new(); n],
            initial: d.initial(),
            accepting: (0..n as u32).map(|s| d.is_accepting(s)).collect(),
        }
    }

    /// Append `other`'s states after our own, returning the index offset.
    fn absorb(&mut self, other: Nfa) -> u32 {
        let off = self.num_states as u32;
        self.num_states += other.num_states;
        self.trans.extend(
            other
                .trans
                .into_iter()
                .map(|v| v.into_iter().map(|(c, t)| (c, t + off)).collect()),
        );
        self.eps.extend(
            other
                .eps
                .into_iter()
                .map(|v| v.into_iter().map(|t| t + off).collect()),
        );
        self.accepting.extend(other.accepting);
        off
    }

    fn fresh_state(&mut self) -> u32 {
        self.num_states += 1;
        self.trans.push(Vec::new());
        self.eps.push(Vec::new());
        self.accepting.push(false);
        (self.num_states - 1) as u32
    }

    fn eps_closure(&self, set: &mut Vec<u64>) {
        let words = set.len();
        let mut queue: VecDeque<u32> = (0..self.num_states as u32)
            .filter(|&s| set[(s as usize) / 64] >> (s % 64) & 1 == 1)
            .collect();
        while let Some(s) = queue.pop_front() {
            for &t in &self.eps[s as usize] {
                let (w, b) = ((t as usize) / 64, t % 64);
                debug_assert!(w < words);
                if set[w] >> b & 1 == 0 {
                    set[w] |= 1 << b;
                    queue.push_back(t);
                }
            }
        }
    }

    /// Subset construction to a total DFA (the empty subset is the sink).
    fn determinize(&self, alphabet: Arc<[String]>) -> ItineraryDfa {
        let k = alphabet.len();
        let words = self.num_states.div_ceil(64).max(1);
        let mut start = vec![0u64; words];
        start[self.initial as usize / 64] |= 1 << (self.initial % 64);
        self.eps_closure(&mut start);

        let mut index: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut subsets = vec![start.clone()];
        index.insert(start, 0);
        let mut delta: Vec<u32> = Vec::new();
        let mut accepting = Vec::new();
        let mut at = 0usize;
        while at < subsets.len() {
            let subset = subsets[at].clone();
            let mut acc = false;
            for s in 0..self.num_states {
                if subset[s / 64] >> (s % 64) & 1 == 1 && self.accepting[s] {
                    acc = true;
                    break;
                }
            }
            accepting.push(acc);
            for c in 0..k as u32 {
                let mut next = vec![0u64; words];
                for s in 0..self.num_states {
                    if subset[s / 64] >> (s % 64) & 1 == 1 {
                        for &(sym, t) in &self.trans[s] {
                            if sym == c {
                                next[t as usize / 64] |= 1 << (t % 64);
                            }
                        }
                    }
                }
                self.eps_closure(&mut next);
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = subsets.len() as u32;
                        subsets.push(next.clone());
                        index.insert(next, id);
                        id
                    }
                };
                delta.push(id);
            }
            at += 1;
        }
        ItineraryDfa::new(alphabet, 0, accepting, delta)
    }
}

/// The DFA of Walks(G): one state per vertex (tracking the agent's position)
/// plus a rejecting sink; every vertex state is accepting since every prefix
/// of a walk is a walk.
pub fn walks_dfa(g: &WorldGraph) -> ItineraryDfa {
    let alphabet: Arc<[String]> = g.edge_names().into();
    let k = alphabet.len();
    let nv = g.num_vertices();
    let sink = nv as u32;
    let mut delta = Vec::with_capacity((nv + 1) * k);
    for v in 0..nv {
        for e in 0..k {
            let edge = g.edge(EdgeIdx(e as u32));
            delta.push(if edge.src().idx() == v {
                edge.tgt().0
            } else {
                sink
            });
        }
    }
    delta.extend(std::iter::repeat(sink).take(k));
    let mut accepting = vec![true; nv];
    accepting.push(false);
    ItineraryDfa::new(alphabet, g.initial().0, accepting, delta)
}

fn empty_set_dfa(alphabet: Arc<[String]>) -> ItineraryDfa {
    let k = alphabet.len();
    ItineraryDfa::new(alphabet, 0, vec![false], vec![0; k])
}

fn epsilon_dfa(alphabet: Arc<[String]>) -> ItineraryDfa {
    let k = alphabet.len();
    let mut delta = vec![1u32; k];
    delta.extend(std::iter::repeat(1).take(k));
    ItineraryDfa::new(alphabet, 0, vec![true, false], delta)
}

fn edge_dfa(alphabet: Arc<[String]>, e: u32) -> ItineraryDfa {
    let k = alphabet.len();
    // 0 --e--> 1 (accepting), everything else to sink 2
    let mut delta = vec![2u32; 3 * k];
    delta[e as usize] = 1;
    ItineraryDfa::new(alphabet, 0, vec![false, true, false], delta)
}

fn concat2(mut left: Nfa, right: Nfa) -> Nfa {
    let right_initial = right.initial;
    let right_accepting_len = right.accepting.len();
    let off = left.absorb(right);
    let entry = off + right_initial;
    for s in 0..off as usize {
        if left.accepting[s] {
            left.accepting[s] = false;
            left.eps[s].push(entry);
        }
    }
    // restore acceptance flags of the absorbed right side
    debug_assert_eq!(left.accepting.len(), off as usize + right_accepting_len);
    left
}

fn star_nfa(mut inner: Nfa) -> Nfa {
    let entry = inner.initial;
    let s0 = inner.fresh_state();
    inner.accepting[s0 as usize] = true;
    inner.eps[s0 as usize].push(entry);
    for s in 0..s0 as usize {
        if inner.accepting[s] {
            inner.eps[s].push(entry);
        }
    }
    inner.initial = s0;
    inner
}

/// Compile an itinerary expression to a total, minimized DFA over the edge
/// alphabet of `g`.
pub fn compile(expr: &ItineraryExpr, g: &WorldGraph) -> Result<ItineraryDfa, ItineraryError> {
    let alphabet: Arc<[String]> = g.edge_names().into();
    let mut edge_index = HashMap::new();
    for (i, name) in alphabet.iter().enumerate() {
        edge_index.insert(name.as_str(), i as u32);
    }
    compile_rec(expr, g, &alphabet, &edge_index).map(|d| d.minimized())
}

fn compile_rec(
    expr: &ItineraryExpr,
    g: &WorldGraph,
    alphabet: &Arc<[String]>,
    edge_index: &HashMap<&str, u32>,
) -> Result<ItineraryDfa, ItineraryError> {
    match expr {
        ItineraryExpr::EmptySet => Ok(empty_set_dfa(alphabet.clone())),
        ItineraryExpr::Epsilon => Ok(epsilon_dfa(alphabet.clone())),
        ItineraryExpr::Walks => Ok(walks_dfa(g)),
        ItineraryExpr::Edge(name) => {
            let e = edge_index
                .get(name.as_str())
                .ok_or_else(|| ItineraryError::UnknownEdgeId(name.clone()))?;
            Ok(edge_dfa(alphabet.clone(), *e))
        }
        ItineraryExpr::Complement(inner) => {
            Ok(compile_rec(inner, g, alphabet, edge_index)?.complement())
        }
        ItineraryExpr::Union(a, b) => {
            let da = compile_rec(a, g, alphabet, edge_index)?;
            let db = compile_rec(b, g, alphabet, edge_index)?;
            da.union(&db)
        }
        ItineraryExpr::Intersection(a, b) => {
            let da = compile_rec(a, g, alphabet, edge_index)?;
            let db = compile_rec(b, g, alphabet, edge_index)?;
            da.intersect(&db)
        }
        ItineraryExpr::Difference(a, b) => {
            let da = compile_rec(a, g, alphabet, edge_index)?;
            let db = compile_rec(b, g, alphabet, edge_index)?;
            da.difference(&db)
        }
        ItineraryExpr::Concat(parts) => {
            debug_assert!(!parts.is_empty());
            let mut nfa: Option<Nfa> = None;
            for part in parts {
                let d = compile_rec(part, g, alphabet, edge_index)?;
                let n = Nfa::from_dfa(&d);
                nfa = Some(match nfa {
                    None => n,
                    Some(acc) => concat2(acc, n),
                });
            }
            Ok(nfa
                .expect("nonempty concat")
                .determinize(alphabet.clone())
                .minimized())
        }
        ItineraryExpr::Star(inner) => {
            let d = compile_rec(inner, g, alphabet, edge_index)?;
            Ok(star_nfa(Nfa::from_dfa(&d))
                .determinize(alphabet.clone())
                .minimized())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itinerary::parse_itinerary;

    fn g() -> WorldGraph {
        WorldGraph::from_str(
            r#"{
            "vertices": ["u", "v"],
            "initial": "u",
            "sensors": {"s": ["x"]},
            "edges": [
                {"id": "f", "src": "u", "tgt": "v", "label": ["x"]},
                {"id": "r", "src": "v", "tgt": "u", "label": []}
            ]
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn empty_set_compiles_to_one_rejecting_state() {
        let g = g();
        let d = compile(&ItineraryExpr::EmptySet, &g).unwrap();
        assert_eq!(d.num_states(), 1);
        assert!(!d.accepts(&[]).unwrap());
        assert!(d.language_is_empty());
    }

    #[test]
    fn empty_word_acceptance_is_initial_acceptance() {
        let g = g();
        let eps = compile(&ItineraryExpr::Epsilon, &g).unwrap();
        assert!(eps.accepts(&[]).unwrap());
        let single = compile(&parse_itinerary("f").unwrap(), &g).unwrap();
        assert!(!single.accepts(&[]).unwrap());
    }

    #[test]
    fn star_and_concat_language() {
        let g = g();
        let d = compile(&parse_itinerary("(f r)* f").unwrap(), &g).unwrap();
        let f = g.edge_index("f").unwrap();
        let r = g.edge_index("r").unwrap();
        assert!(d.accepts(&[f]).unwrap());
        assert!(d.accepts(&[f, r, f]).unwrap());
        assert!(!d.accepts(&[]).unwrap());
        assert!(!d.accepts(&[f, r]).unwrap());
        assert!(!d.accepts(&[f, f]).unwrap());
    }

    #[test]
    fn unknown_edge_is_reported_at_compile_time() {
        let g = g();
        let expr = parse_itinerary("f ghost").unwrap();
        assert!(matches!(
            compile(&expr, &g),
            Err(ItineraryError::UnknownEdgeId(e)) if e == "ghost"
        ));
    }

    #[test]
    fn compiled_dfas_are_total() {
        let g = g();
        for src in ["f", "(f r)*", "!f", "WALKS & f r", "EPS + f"] {
            let d = compile(&parse_itinerary(src).unwrap(), &g).unwrap();
            for s in 0..d.num_states() as u32 {
                for e in 0..g.num_edges() as u32 {
                    let t = d.step(s, crate::world::EdgeIdx(e));
                    assert!((t as usize) < d.num_states());
                }
            }
        }
    }
}
