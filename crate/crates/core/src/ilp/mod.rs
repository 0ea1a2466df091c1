//! The 0-1 integer linear program for minimum certifying sensor selection.
//!
//! Variables: `u_s` (sensor s on), `a_{q,p}` (product states q and p are
//! reachable by observationally equal walks), `b_{e,y}` (event y is both on
//! edge e's label and enabled), and `j_{e,d,y}` (b differs between edges e
//! and d for event y). Constraints seed `a` at the initial pair, fix mixed
//! accepting/non-accepting pairs to 0, tie `b` to `u`, define `j` as the
//! XOR of two `b`s, and propagate `a` along edge pairs with equal masked
//! labels and along silent single edges. Minimizing Σ u_s over this system
//! is exactly the sensor-selection problem.
//!
//! The model is solver-agnostic: emit it in LP text format and run any
//! external 0-1 solver, or use the built-in propagation-based search.

mod emit;
mod external;
mod propagate;
mod solve;

pub use emit::{emit_lp, format_solution};
pub use external::{extract_selection, parse_solution, SolverCommand};
pub use propagate::{propagate_fixed_u, FixedPropagation};
pub use solve::{solve_model, IlpSolveOutcome};

use std::collections::HashMap;
use std::time::Duration;

use thiserror::Error;

use crate::product::ProductAutomaton;
use crate::world::{EdgeIdx, EventIdx, SensorIdx, WorldGraph};

#[derive(Debug, Error)]
pub enum IlpError {
    #[error("solution references unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("malformed solution line {line_no}: `{content}`")]
    MalformedLine { line_no: usize, content: String },
    #[error("solution file has no status line")]
    MissingStatus,
    #[error("solver returned a selection that does not certify; model or solver bug")]
    SolutionNotCertifying,
    #[error("solution status is not optimal")]
    NotOptimal,
    #[error("external solver failed: {0}")]
    SolverFailed(String),
    #[error("ILP solve timed out after {0:?}")]
    Timeout(Duration),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Itinerary(#[from] crate::itinerary::ItineraryError),
}

/// What a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Sensor on/off choice.
    U(SensorIdx),
    /// Ordered reachable product-state pair (q, p).
    A(u32, u32),
    /// (edge, event) incidence under the chosen sensors.
    B(EdgeIdx, EventIdx),
    /// XOR of `b` over two edges for one event.
    J(EdgeIdx, EdgeIdx, EventIdx),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Eq,
    Ge,
    Le,
}

/// Which constraint family a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowRule {
    /// The initial pair is related (the empty observation reaches it twice).
    InitPair,
    /// Mixed accepting/non-accepting pairs must stay unrelated.
    MixedPair,
    /// b is 0 where the event is not on the edge's label.
    BZero,
    /// b equals u of the owning sensor where the event is on the label.
    BLink,
    /// j bounds making j the XOR of its two b's (four row shapes).
    JXor,
    /// Pair propagation along an edge pair (both transitions defined).
    Advance,
    /// Pair propagation along a silent left edge.
    EpsLeft,
    /// Pair propagation along a silent right edge.
    EpsRight,
    /// a symmetry (only with deduplicated symmetric rows).
    Symmetry,
}

/// Build-time switches.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Emit only one of each symmetric (q,p,e,d)/(p,q,d,e) propagation row
    /// and tie mirrored `a` variables together instead. Off by default: the
    /// duplicated form matches the written constraint system.
    pub dedup_symmetric: bool,
}

/// A solver-agnostic 0-1 linear model with named binary variables.
#[derive(Debug)]
pub struct IlpModel {
    vars: Vec<Var>,
    by_name: HashMap<String, u32>,
    /// Flattened rows: `terms[row_start[r]..row_start[r+1]]`.
    terms: Vec<(u32, i32)>,
    row_start: Vec<u32>,
    row_op: Vec<RowOp>,
    row_rhs: Vec<i32>,
    row_rule: Vec<RowRule>,
    /// u variable ids in lexicographic sensor-name order.
    u_vars: Vec<u32>,
    /// Number of reachable product states; `a(q,p)` ids are contiguous.
    num_states: u32,
    a_base: u32,
}

#[derive(Debug, Clone)]
struct Var {
    name: String,
    kind: VarKind,
}

impl IlpModel {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_op.len()
    }

    pub fn var_name(&self, v: u32) -> &str {
        &self.vars[v as usize].name
    }

    pub fn var_kind(&self, v: u32) -> VarKind {
        self.vars[v as usize].kind
    }

    pub fn var_by_name(&self, name: &str) -> Option<u32> {
        self.by_name.get(name).copied()
    }

    pub fn u_vars(&self) -> &[u32] {
        &self.u_vars
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    /// Variable id of `a_{q,p}`.
    pub fn a_var(&self, q: u32, p: u32) -> u32 {
        self.a_base + q * self.num_states + p
    }

    pub fn row(&self, r: usize) -> (&[(u32, i32)], RowOp, i32, RowRule) {
        let lo = self.row_start[r] as usize;
        let hi = self.row_start[r + 1] as usize;
        (&self.terms[lo..hi], self.row_op[r], self.row_rhs[r], self.row_rule[r])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[(u32, i32)], RowOp, i32, RowRule)> + '_ {
        (0..self.num_rows()).map(move |r| self.row(r))
    }

    pub fn count_rows(&self, rule: RowRule) -> usize {
        self.row_rule.iter().filter(|&&r| r == rule).count()
    }

    pub fn count_vars(&self, pred: impl Fn(&VarKind) -> bool) -> usize {
        self.vars.iter().filter(|v| pred(&v.kind)).count()
    }

    /// Objective value Σ u_s under an assignment.
    pub fn objective_of(&self, assignment: &[bool]) -> i64 {
        self.u_vars
            .iter()
            .filter(|&&v| assignment[v as usize])
            .count() as i64
    }
}

/// Sanitize an identifier for LP output: non-alphanumerics become `_`.
fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

struct ModelBuilder {
    vars: Vec<Var>,
    by_name: HashMap<String, u32>,
    terms: Vec<(u32, i32)>,
    row_start: Vec<u32>,
    row_op: Vec<RowOp>,
    row_rhs: Vec<i32>,
    row_rule: Vec<RowRule>,
}

impl ModelBuilder {
    fn new() -> Self {
        ModelBuilder {
            vars: Vec::new(),
            by_name: HashMap::new(),
            terms: Vec::new(),
            row_start: vec![0],
            row_op: Vec::new(),
            row_rhs: Vec::new(),
            row_rule: Vec::new(),
        }
    }

    /// Intern a variable, disambiguating sanitization collisions with a
    /// deterministic numeric suffix.
    fn add_var(&mut self, base_name: String, kind: VarKind) -> u32 {
        let mut name = base_name;
        if self.by_name.contains_key(&name) {
            let mut n = 2usize;
            loop {
                let candidate = format!("{name}__{n}");
                if !self.by_name.contains_key(&candidate) {
                    name = candidate;
                    break;
                }
                n += 1;
            }
        }
        let id = self.vars.len() as u32;
        self.by_name.insert(name.clone(), id);
        self.vars.push(Var { name, kind });
        id
    }

    /// Add a row, merging duplicate variables and dropping zero coefficients.
    fn add_row(&mut self, terms: &mut Vec<(u32, i32)>, op: RowOp, rhs: i32, rule: RowRule) {
        terms.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(u32, i32)> = Vec::with_capacity(terms.len());
        for &(v, c) in terms.iter() {
            match merged.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        if merged.is_empty() {
            // fully cancelled row (e.g. a silent self-loop advancing a pair
            // onto itself); it must be a tautology, drop it
            let sat = match op {
                RowOp::Eq => rhs == 0,
                RowOp::Ge => rhs <= 0,
                RowOp::Le => rhs >= 0,
            };
            debug_assert!(sat, "cancelled row is unsatisfiable");
            terms.clear();
            return;
        }
        self.terms.extend_from_slice(&merged);
        self.row_start.push(self.terms.len() as u32);
        self.row_op.push(op);
        self.row_rhs.push(rhs);
        self.row_rule.push(rule);
        terms.clear();
    }
}

/// Build the 0-1 model for one (product, world) instance.
///
/// `a` variables exist only for reachable product-state pairs; `j`
/// variables only for edge pairs that occur in some propagation row and for
/// events on either edge's label (all other `j` are identically zero and
/// their terms are dropped).
pub fn build_model(p: &ProductAutomaton, g: &WorldGraph, opts: &BuildOptions) -> IlpModel {
    let mut b = ModelBuilder::new();
    let n = p.num_states() as u32;

    // u variables, sorted by sensor name
    let mut sensor_order: Vec<SensorIdx> = (0..g.num_sensors() as u32).map(SensorIdx).collect();
    sensor_order.sort_by_key(|&s| g.sensor_name(s).to_string());
    let mut u_of_sensor = vec![u32::MAX; g.num_sensors()];
    let mut u_vars = Vec::with_capacity(sensor_order.len());
    for &s in &sensor_order {
        let id = b.add_var(format!("u_{}", sanitize(g.sensor_name(s))), VarKind::U(s));
        u_of_sensor[s.idx()] = id;
        u_vars.push(id);
    }

    // a variables for every ordered reachable pair, row-major
    let a_base = b.vars.len() as u32;
    for q in 0..n {
        for pp in 0..n {
            b.add_var(format!("a_{q}_{pp}"), VarKind::A(q, pp));
        }
    }
    let a_var = |q: u32, pp: u32| a_base + q * n + pp;

    // b variables for every (edge, event)
    let num_events = g.num_events();
    let b_base = b.vars.len() as u32;
    for e in 0..g.num_edges() {
        for y in 0..num_events {
            b.add_var(
                format!(
                    "b_{}_{}",
                    sanitize(g.edge_name(EdgeIdx(e as u32))),
                    sanitize(g.event_name(EventIdx(y as u32)))
                ),
                VarKind::B(EdgeIdx(e as u32), EventIdx(y as u32)),
            );
        }
    }
    let b_var = |e: EdgeIdx, y: EventIdx| b_base + (e.idx() * num_events + y.idx()) as u32;

    // edges with at least one defined product transition
    let mut edge_used = vec![false; g.num_edges()];
    for s in 0..n {
        for &(e, _) in p.out(s) {
            edge_used[e.idx()] = true;
        }
    }
    let used: Vec<EdgeIdx> = (0..g.num_edges() as u32)
        .map(EdgeIdx)
        .filter(|e| edge_used[e.idx()])
        .collect();

    // j variables, lazily for used edge pairs and events on either label;
    // diagonal pairs are skipped since b XOR b is identically zero
    let mut j_index: HashMap<(u32, u32, u32), u32> = HashMap::new();
    for &e in &used {
        for &d in &used {
            if e == d {
                continue;
            }
            let mut events: Vec<EventIdx> = g
                .edge(e)
                .label()
                .iter()
                .chain(g.edge(d).label().iter())
                .copied()
                .collect();
            events.sort();
            events.dedup();
            for y in events {
                let id = b.add_var(
                    format!(
                        "j_{}_{}_{}",
                        sanitize(g.edge_name(e)),
                        sanitize(g.edge_name(d)),
                        sanitize(g.event_name(y))
                    ),
                    VarKind::J(e, d, y),
                );
                j_index.insert((e.0, d.0, y.0), id);
            }
        }
    }

    let mut row: Vec<(u32, i32)> = Vec::new();

    // initial pair is related
    row.push((a_var(p.initial(), p.initial()), 1));
    b.add_row(&mut row, RowOp::Eq, 1, RowRule::InitPair);

    // mixed accepting/non-accepting pairs are unrelated
    for q in 0..n {
        for pp in 0..n {
            if p.is_accepting(q) != p.is_accepting(pp) {
                row.push((a_var(q, pp), 1));
                b.add_row(&mut row, RowOp::Eq, 0, RowRule::MixedPair);
            }
        }
    }

    // b is 0 off-label and tracks u on-label
    for e in 0..g.num_edges() {
        let e = EdgeIdx(e as u32);
        let label = g.edge(e).label();
        for y in 0..num_events as u32 {
            let y = EventIdx(y);
            if label.contains(&y) {
                row.push((b_var(e, y), 1));
                row.push((u_of_sensor[g.event_owner(y).idx()], -1));
                b.add_row(&mut row, RowOp::Eq, 0, RowRule::BLink);
            } else {
                row.push((b_var(e, y), 1));
                b.add_row(&mut row, RowOp::Eq, 0, RowRule::BZero);
            }
        }
    }

    // j = b XOR b, as four inequalities per materialized j
    let mut j_sorted: Vec<(&(u32, u32, u32), &u32)> = j_index.iter().collect();
    j_sorted.sort();
    for (&(e, d, y), &j) in j_sorted {
        let be = b_var(EdgeIdx(e), EventIdx(y));
        let bd = b_var(EdgeIdx(d), EventIdx(y));
        row.extend([(be, 1), (bd, -1), (j, -1)]);
        b.add_row(&mut row, RowOp::Le, 0, RowRule::JXor);
        row.extend([(bd, 1), (be, -1), (j, -1)]);
        b.add_row(&mut row, RowOp::Le, 0, RowRule::JXor);
        row.extend([(j, 1), (be, -1), (bd, -1)]);
        b.add_row(&mut row, RowOp::Le, 0, RowRule::JXor);
        row.extend([(j, 1), (be, 1), (bd, 1)]);
        b.add_row(&mut row, RowOp::Le, 2, RowRule::JXor);
    }

    // pair propagation rows
    for q in 0..n {
        for pp in 0..n {
            let aqp = a_var(q, pp);
            for &(e, q2) in p.out(q) {
                for &(d, p2) in p.out(pp) {
                    if opts.dedup_symmetric {
                        // keep one representative of {(q,p,e,d), (p,q,d,e)}
                        if (pp, q, d.0, e.0) < (q, pp, e.0, d.0) {
                            continue;
                        }
                    }
                    row.push((aqp, -1));
                    if e != d {
                        let mut events: Vec<EventIdx> = g
                            .edge(e)
                            .label()
                            .iter()
                            .chain(g.edge(d).label().iter())
                            .copied()
                            .collect();
                        events.sort();
                        events.dedup();
                        for y in events {
                            row.push((j_index[&(e.0, d.0, y.0)], 1));
                        }
                    }
                    row.push((a_var(q2, p2), 1));
                    b.add_row(&mut row, RowOp::Ge, 0, RowRule::Advance);
                }
                // silent left advance: (1 - a_{q,p}) + Σ b_{e,y} + a_{q2,p} ≥ 1
                row.push((aqp, -1));
                for &y in g.edge(e).label() {
                    row.push((b_var(e, y), 1));
                }
                row.push((a_var(q2, pp), 1));
                b.add_row(&mut row, RowOp::Ge, 0, RowRule::EpsLeft);
            }
            // silent right advance
            for &(e, p2) in p.out(pp) {
                row.push((aqp, -1));
                for &y in g.edge(e).label() {
                    row.push((b_var(e, y), 1));
                }
                row.push((a_var(q, p2), 1));
                b.add_row(&mut row, RowOp::Ge, 0, RowRule::EpsRight);
            }
        }
    }

    if opts.dedup_symmetric {
        for q in 0..n {
            for pp in q + 1..n {
                row.push((a_var(q, pp), 1));
                row.push((a_var(pp, q), -1));
                b.add_row(&mut row, RowOp::Eq, 0, RowRule::Symmetry);
            }
        }
    }

    IlpModel {
        vars: b.vars,
        by_name: b.by_name,
        terms: b.terms,
        row_start: b.row_start,
        row_op: b.row_op,
        row_rhs: b.row_rhs,
        row_rule: b.row_rule,
        u_vars,
        num_states: n,
        a_base,
    }
}

/// Solution status as reported by a solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionStatus {
    Optimal,
    Infeasible,
    Unknown,
}

/// A (claimed) solution to an [`IlpModel`].
#[derive(Debug, Clone)]
pub struct IlpSolution {
    pub status: SolutionStatus,
    /// Values for every model variable (false where a solver omitted one).
    pub assignment: Vec<bool>,
    pub objective: Option<i64>,
}
