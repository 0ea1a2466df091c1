//! External solver adapter and solution-file handling.
//!
//! The adapter is process-based: write the model in LP format, run a
//! user-configured command, read back a solution file in the documented
//! grammar. The command template substitutes `{model}` and `{solution}`
//! with file paths; wrap solvers whose native output differs in a small
//! script that converts to this grammar:
//!
//! ```text
//! # comment and blank lines are ignored
//! status optimal|infeasible|unknown
//! objective <integer>          (optional)
//! <variable> <0|1>             (variables omitted default to 0)
//! ```

use std::path::Path;
use std::process::Command;

use super::{emit_lp, IlpError, IlpModel, IlpSolution, SolutionStatus, VarKind};
use crate::certify::Certifier;
use crate::itinerary::ItineraryDfa;
use crate::world::{SensorSelection, WorldGraph};

/// Environment variable holding the default solver command template.
pub const SOLVER_ENV: &str = "ITIVAL_ILP_SOLVER";

/// A configured external solver command.
#[derive(Debug, Clone)]
pub struct SolverCommand {
    pub template: String,
}

impl SolverCommand {
    pub fn new(template: impl Into<String>) -> SolverCommand {
        SolverCommand {
            template: template.into(),
        }
    }

    /// Read the command template from `ITIVAL_ILP_SOLVER`, if set.
    pub fn from_env() -> Option<SolverCommand> {
        std::env::var(SOLVER_ENV).ok().map(SolverCommand::new)
    }

    /// Run the solver with explicit file locations.
    pub fn run_with_paths(
        &self,
        model: &IlpModel,
        model_path: &Path,
        solution_path: &Path,
    ) -> Result<IlpSolution, IlpError> {
        std::fs::write(model_path, emit_lp(model))?;
        let command = self
            .template
            .replace("{model}", &model_path.display().to_string())
            .replace("{solution}", &solution_path.display().to_string());
        let output = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .output()
            .map_err(|e| IlpError::SolverFailed(format!("spawning `{command}`: {e}")))?;
        if !output.status.success() {
            return Err(IlpError::SolverFailed(format!(
                "`{command}` exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text = std::fs::read_to_string(solution_path).map_err(|e| {
            IlpError::SolverFailed(format!(
                "reading solution file {}: {e}",
                solution_path.display()
            ))
        })?;
        parse_solution(&text, model)
    }

    /// Run the solver through unique files in the system temp directory.
    pub fn run(&self, model: &IlpModel) -> Result<IlpSolution, IlpError> {
        let dir = std::env::temp_dir();
        let unique = format!(
            "itival-{}-{:x}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or(0)
        );
        let model_path = dir.join(format!("{unique}.lp"));
        let solution_path = dir.join(format!("{unique}.sol"));
        let result = self.run_with_paths(model, &model_path, &solution_path);
        let _ = std::fs::remove_file(&model_path);
        let _ = std::fs::remove_file(&solution_path);
        result
    }
}

/// Parse solver output in the documented solution grammar and bind it to
/// the model's variables.
pub fn parse_solution(text: &str, model: &IlpModel) -> Result<IlpSolution, IlpError> {
    let mut status = None;
    let mut objective = None;
    let mut assignment = vec![false; model.num_vars()];
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().expect("nonempty line");
        let rest = parts.next();
        let malformed = || IlpError::MalformedLine {
            line_no: no + 1,
            content: raw.to_string(),
        };
        if parts.next().is_some() {
            return Err(malformed());
        }
        match head {
            "status" => {
                status = Some(match rest.ok_or_else(malformed)? {
                    "optimal" => SolutionStatus::Optimal,
                    "infeasible" => SolutionStatus::Infeasible,
                    "unknown" => SolutionStatus::Unknown,
                    _ => return Err(malformed()),
                });
            }
            "objective" => {
                let value: f64 = rest.ok_or_else(malformed)?.parse().map_err(|_| malformed())?;
                objective = Some(value.round() as i64);
            }
            name => {
                if status.is_none() {
                    return Err(IlpError::MissingStatus);
                }
                let var = model
                    .var_by_name(name)
                    .ok_or_else(|| IlpError::UnknownVariable(name.to_string()))?;
                let value: f64 = rest.ok_or_else(malformed)?.parse().map_err(|_| malformed())?;
                let rounded = value.round();
                if (value - rounded).abs() > 0.3 || !(rounded == 0.0 || rounded == 1.0) {
                    return Err(malformed());
                }
                assignment[var as usize] = rounded == 1.0;
            }
        }
    }
    let status = status.ok_or(IlpError::MissingStatus)?;
    if objective.is_none() && status == SolutionStatus::Optimal {
        objective = Some(model.objective_of(&assignment));
    }
    Ok(IlpSolution {
        status,
        assignment,
        objective,
    })
}

/// Read the chosen sensors out of an optimal solution and verify they
/// certify; a non-certifying "optimal" selection signals a model or solver
/// bug (for example, LP tolerances rounding the wrong way).
pub fn extract_selection(
    sol: &IlpSolution,
    model: &IlpModel,
    g: &WorldGraph,
    i: &ItineraryDfa,
) -> Result<SensorSelection, IlpError> {
    if sol.status != SolutionStatus::Optimal {
        return Err(IlpError::NotOptimal);
    }
    let mut selection = SensorSelection::empty(g.num_sensors());
    for &uv in model.u_vars() {
        if sol.assignment[uv as usize] {
            match model.var_kind(uv) {
                VarKind::U(s) => selection.insert(s),
                _ => unreachable!("u_vars hold U variables"),
            }
        }
    }
    let certifier = Certifier::new(g, i)?;
    if !certifier.certifies(&selection) {
        return Err(IlpError::SolutionNotCertifying);
    }
    Ok(selection)
}
