//! Built-in 0-1 solve of the sensor-selection model by branch and bound
//! over the `u` variables, with constraint propagation as the feasibility
//! oracle. Used when no external solver is configured; the search never
//! consults the combinatorial certification path, so it cross-checks it.

use std::time::{Duration, Instant};

use super::propagate::propagate_fixed_u;
use super::{IlpError, IlpModel, IlpSolution, SolutionStatus};

#[derive(Debug, Clone)]
pub struct IlpSolveOutcome {
    pub solution: IlpSolution,
    /// Search nodes expanded.
    pub nodes: u64,
    /// Propagation (feasibility) passes.
    pub propagations: u64,
    pub wall: Duration,
}

struct Search<'m> {
    model: &'m IlpModel,
    deadline: Option<Instant>,
    nodes: u64,
    propagations: u64,
    best_u: Option<Vec<bool>>,
    best_size: usize,
}

impl<'m> Search<'m> {
    fn feasible(&mut self, u: &[bool]) -> bool {
        self.propagations += 1;
        propagate_fixed_u(self.model, u).conflict.is_none()
    }

    fn descend(&mut self, u: &mut Vec<bool>, at: usize) -> Result<(), IlpError> {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return Err(IlpError::Timeout(Duration::default()));
            }
        }
        self.nodes += 1;
        let committed: usize = u[..at].iter().filter(|&&b| b).count();
        if committed >= self.best_size {
            return Ok(());
        }
        // cheapest completion: all remaining off
        for i in at..u.len() {
            u[i] = false;
        }
        if self.feasible(u) {
            self.best_size = committed;
            self.best_u = Some(u.clone());
            return Ok(());
        }
        if at == u.len() {
            return Ok(());
        }
        // most permissive completion: all remaining on; if even that fails,
        // no assignment below this node is feasible (more sensors can only
        // silence fewer propagation rows)
        for i in at..u.len() {
            u[i] = true;
        }
        if !self.feasible(u) {
            return Ok(());
        }
        u[at] = true;
        self.descend(u, at + 1)?;
        u[at] = false;
        self.descend(u, at + 1)
    }
}

/// Minimize Σ u over the model. Returns `Infeasible` when even the full
/// sensor set violates the mixed-pair constraints.
pub fn solve_model(model: &IlpModel, timeout: Option<Duration>) -> Result<IlpSolveOutcome, IlpError> {
    let start = Instant::now();
    let mut search = Search {
        model,
        deadline: timeout.map(|t| start + t),
        nodes: 0,
        propagations: 0,
        best_u: None,
        best_size: usize::MAX,
    };
    let n = model.u_vars().len();
    let mut u = vec![true; n];
    if !search.feasible(&u) {
        return Ok(IlpSolveOutcome {
            solution: IlpSolution {
                status: SolutionStatus::Infeasible,
                assignment: vec![false; model.num_vars()],
                objective: None,
            },
            nodes: 0,
            propagations: search.propagations,
            wall: start.elapsed(),
        });
    }
    match search.descend(&mut u, 0) {
        Ok(()) => {}
        Err(IlpError::Timeout(_)) => return Err(IlpError::Timeout(start.elapsed())),
        Err(e) => return Err(e),
    }

    let best_u = search.best_u.expect("feasible model yields an incumbent");
    // rebuild the full assignment: propagation fixes b and j, and its
    // forced-true set is the least consistent a-assignment
    let propagation = propagate_fixed_u(model, &best_u);
    debug_assert!(propagation.conflict.is_none());
    let assignment = propagation.least_assignment();
    let objective = model.objective_of(&assignment);
    Ok(IlpSolveOutcome {
        solution: IlpSolution {
            status: SolutionStatus::Optimal,
            assignment,
            objective: Some(objective),
        },
        nodes: search.nodes,
        propagations: search.propagations,
        wall: start.elapsed(),
    })
}
