//! Unit propagation over the 0-1 model with `u` fixed.
//!
//! Every coefficient in the model is ±1, so bound propagation is sharp: a
//! `≥` row forces all its unassigned variables the moment its maximum
//! achievable left side equals the bound (and dually for `≤`). With the
//! sensor choice fixed this pins every `b` and `j`, then cascades `a`
//! variables from the seeded initial pair: the set of `a` variables forced
//! to 1 is exactly the certification fixed-point relation for that
//! selection. Mixed-pair zero rows are checked after the cascade, so the
//! full closure is available even when the selection does not certify.

use std::collections::VecDeque;

use super::{IlpModel, RowOp, RowRule};

/// Result of fixing `u` and propagating.
#[derive(Debug)]
pub struct FixedPropagation {
    /// Forced values; `None` means unconstrained (0 in the least model).
    pub assignment: Vec<Option<bool>>,
    /// Index of a violated row, if the fixed selection is infeasible.
    pub conflict: Option<usize>,
}

impl FixedPropagation {
    /// The least model: unforced variables at 0.
    pub fn least_assignment(&self) -> Vec<bool> {
        self.assignment.iter().map(|v| v.unwrap_or(false)).collect()
    }
}

struct Engine<'m> {
    model: &'m IlpModel,
    assignment: Vec<Option<bool>>,
    /// Current achievable [lo, hi] of each row's left side.
    lo: Vec<i32>,
    hi: Vec<i32>,
    /// Rows indexed by member variable (CSR), with the member's coefficient.
    occ_start: Vec<u32>,
    occ_row: Vec<u32>,
    occ_coef: Vec<i8>,
    queue: VecDeque<u32>,
    queued: Vec<bool>,
    conflict: Option<usize>,
}

impl<'m> Engine<'m> {
    fn new(model: &'m IlpModel) -> Engine<'m> {
        let nv = model.num_vars();
        let nr = model.num_rows();
        let mut occ_count = vec![0u32; nv + 1];
        for (terms, _, _, _) in model.rows() {
            for &(v, _) in terms {
                occ_count[v as usize + 1] += 1;
            }
        }
        for i in 0..nv {
            occ_count[i + 1] += occ_count[i];
        }
        let total = *occ_count.last().unwrap() as usize;
        let mut occ_row = vec![0u32; total];
        let mut occ_coef = vec![0i8; total];
        let mut fill = occ_count.clone();
        for (r, (terms, _, _, _)) in model.rows().enumerate() {
            for &(v, c) in terms {
                occ_row[fill[v as usize] as usize] = r as u32;
                occ_coef[fill[v as usize] as usize] = c as i8;
                fill[v as usize] += 1;
            }
        }

        let mut lo = vec![0i32; nr];
        let mut hi = vec![0i32; nr];
        for (r, (terms, _, _, _)) in model.rows().enumerate() {
            for &(_, c) in terms {
                debug_assert!(c == 1 || c == -1, "model coefficients are ±1");
                if c > 0 {
                    hi[r] += c;
                } else {
                    lo[r] += c;
                }
            }
        }
        Engine {
            model,
            assignment: vec![None; nv],
            lo,
            hi,
            occ_start: occ_count,
            occ_row,
            occ_coef,
            queue: VecDeque::new(),
            queued: vec![false; nr],
            conflict: None,
        }
    }

    fn enqueue(&mut self, r: u32) {
        if !self.queued[r as usize] {
            self.queued[r as usize] = true;
            self.queue.push_back(r);
        }
    }

    fn assign(&mut self, v: u32, value: bool) {
        match self.assignment[v as usize] {
            Some(cur) => {
                if cur != value {
                    // direct contradiction; report via the first row touched
                    self.conflict.get_or_insert(usize::MAX);
                }
            }
            None => {
                self.assignment[v as usize] = Some(value);
                let lo_at = self.occ_start[v as usize] as usize;
                let hi_at = self.occ_start[v as usize + 1] as usize;
                for i in lo_at..hi_at {
                    let r = self.occ_row[i];
                    let c = self.occ_coef[i] as i32;
                    let contribution = if value { c } else { 0 };
                    if c > 0 {
                        // previously contributed [0, c] to the range
                        self.hi[r as usize] += contribution - c;
                        self.lo[r as usize] += contribution;
                    } else {
                        self.hi[r as usize] += contribution;
                        self.lo[r as usize] += contribution - c;
                    }
                    self.enqueue(r);
                }
            }
        }
    }

    /// Re-examine a row; force variables when the bound is tight.
    fn process(&mut self, r: u32, skip_mixed: bool) {
        let (terms, op, rhs, rule) = self.model.row(r as usize);
        if skip_mixed && rule == RowRule::MixedPair {
            return;
        }
        let (lo, hi) = (self.lo[r as usize], self.hi[r as usize]);
        let need_ge = matches!(op, RowOp::Ge | RowOp::Eq);
        let need_le = matches!(op, RowOp::Le | RowOp::Eq);
        if (need_ge && hi < rhs) || (need_le && lo > rhs) {
            self.conflict.get_or_insert(r as usize);
            return;
        }
        let force_max = need_ge && hi == rhs;
        let force_min = need_le && lo == rhs;
        if !(force_max || force_min) {
            return;
        }
        let forced: Vec<(u32, bool)> = terms
            .iter()
            .filter(|&&(v, _)| self.assignment[v as usize].is_none())
            .map(|&(v, c)| {
                // maximizing value of a +1 term is true, of a -1 term false
                if force_max {
                    (v, c > 0)
                } else {
                    (v, c < 0)
                }
            })
            .collect();
        debug_assert!(!(force_max && force_min) || forced.is_empty());
        for (v, value) in forced {
            self.assign(v, value);
            if self.conflict.is_some() {
                return;
            }
        }
    }

    fn run(&mut self, skip_mixed: bool) {
        while let Some(r) = self.queue.pop_front() {
            self.queued[r as usize] = false;
            self.process(r, skip_mixed);
            if self.conflict.is_some() {
                return;
            }
        }
    }
}

/// Fix the sensor variables to `u` (indexed like [`IlpModel::u_vars`]) and
/// propagate to the least fixed point. The forced-true `a` variables equal
/// the certification relation of the corresponding selection; `conflict`
/// reports infeasibility (the selection does not certify).
pub fn propagate_fixed_u(model: &IlpModel, u: &[bool]) -> FixedPropagation {
    assert_eq!(u.len(), model.u_vars().len());
    let mut engine = Engine::new(model);
    // seed every row once, then fix the sensor choice
    for r in 0..model.num_rows() as u32 {
        engine.enqueue(r);
    }
    for (&var, &value) in model.u_vars().iter().zip(u) {
        engine.assign(var, value);
    }
    // phase 1: cascade everything except the mixed-pair zero rows
    engine.run(true);
    // phase 2: mixed-pair rows against the closure
    if engine.conflict.is_none() {
        for (r, (terms, _, _, rule)) in model.rows().enumerate() {
            if rule != RowRule::MixedPair {
                continue;
            }
            debug_assert_eq!(terms.len(), 1);
            let (v, _) = terms[0];
            if engine.assignment[v as usize] == Some(true) {
                engine.conflict = Some(r);
                break;
            }
        }
    }
    FixedPropagation {
        assignment: engine.assignment,
        conflict: engine.conflict,
    }
}
