//! LP-format text emission and the solution text format.

use std::fmt::Write as _;

use super::{IlpModel, IlpSolution, RowOp, SolutionStatus};

/// Render the model in LP format (`Minimize` / `Subject To` / `Binary`).
/// Variable and row order are fixed by construction, so the output is
/// byte-stable across runs.
pub fn emit_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ 0-1 sensor selection model\n");
    out.push_str("Minimize\n obj:");
    debug_assert!(!model.u_vars().is_empty(), "worlds have at least one sensor");
    for (i, &u) in model.u_vars().iter().enumerate() {
        if i == 0 {
            let _ = write!(out, " {}", model.var_name(u));
        } else {
            let _ = write!(out, " + {}", model.var_name(u));
        }
    }
    out.push_str("\nSubject To\n");
    for (r, (terms, op, rhs, _)) in model.rows().enumerate() {
        let _ = write!(out, " c{r}:");
        for (i, &(v, c)) in terms.iter().enumerate() {
            let name = model.var_name(v);
            match (i, c) {
                (0, 1) => {
                    let _ = write!(out, " {name}");
                }
                (0, -1) => {
                    let _ = write!(out, " - {name}");
                }
                (0, c) => {
                    let _ = write!(out, " {c} {name}");
                }
                (_, 1) => {
                    let _ = write!(out, " + {name}");
                }
                (_, -1) => {
                    let _ = write!(out, " - {name}");
                }
                (_, c) if c > 0 => {
                    let _ = write!(out, " + {c} {name}");
                }
                (_, c) => {
                    let _ = write!(out, " - {} {name}", -c);
                }
            }
        }
        let op = match op {
            RowOp::Eq => "=",
            RowOp::Ge => ">=",
            RowOp::Le => "<=",
        };
        let _ = writeln!(out, " {op} {rhs}");
    }
    out.push_str("Binary\n");
    for v in 0..model.num_vars() as u32 {
        let _ = writeln!(out, " {}", model.var_name(v));
    }
    out.push_str("End\n");
    out
}

/// Render a solution in the documented solution format: a `status` line,
/// an `objective` line, then one `name value` line per nonzero variable.
pub fn format_solution(model: &IlpModel, sol: &IlpSolution) -> String {
    let mut out = String::new();
    let status = match sol.status {
        SolutionStatus::Optimal => "optimal",
        SolutionStatus::Infeasible => "infeasible",
        SolutionStatus::Unknown => "unknown",
    };
    let _ = writeln!(out, "status {status}");
    if let Some(obj) = sol.objective {
        let _ = writeln!(out, "objective {obj}");
    }
    if sol.status == SolutionStatus::Optimal {
        for v in 0..model.num_vars() as u32 {
            if sol.assignment[v as usize] {
                let _ = writeln!(out, "{} 1", model.var_name(v));
            }
        }
    }
    out
}
