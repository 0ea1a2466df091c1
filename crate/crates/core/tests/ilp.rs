//! Model-level checks for the 0-1 program: variable/row accounting, XOR
//! linearization, closure equivalence against the certification fixed
//! point, emission stability, and the solution-file plumbing.

mod common;

use common::{department, department_itinerary, fixtures_dir};
use itival_core::certify::compute_relation;
use itival_core::ilp::{
    self, build_model, emit_lp, extract_selection, format_solution, parse_solution,
    propagate_fixed_u, BuildOptions, IlpError, SolutionStatus, SolverCommand, VarKind,
};
use itival_core::itinerary::{compile, parse_itinerary};
use itival_core::product::ProductAutomaton;
use itival_core::world::{SensorSelection, WorldGraph};

fn tiny_world() -> WorldGraph {
    WorldGraph::from_str(
        r#"{
        "vertices": ["p", "q"],
        "initial": "p",
        "sensors": {"s": ["x"], "t": ["y"]},
        "edges": [
            {"id": "a", "src": "p", "tgt": "q", "label": ["x"]},
            {"id": "b", "src": "p", "tgt": "q", "label": ["y"]},
            {"id": "c", "src": "q", "tgt": "p", "label": ["x", "y"]}
        ]
    }"#,
    )
    .unwrap()
}

/// Fix the sensor choice by names and propagate.
fn propagate_selection(
    model: &itival_core::ilp::IlpModel,
    g: &WorldGraph,
    names: &[&str],
) -> ilp::FixedPropagation {
    let sel = SensorSelection::from_names(g, names.iter().copied()).unwrap();
    let u: Vec<bool> = model
        .u_vars()
        .iter()
        .map(|&v| match model.var_kind(v) {
            VarKind::U(s) => sel.contains(s),
            _ => unreachable!(),
        })
        .collect();
    propagate_fixed_u(model, &u)
}

#[test]
fn variable_counts_follow_construction() {
    let g = department();
    let i = department_itinerary(&g, 6);
    let p = ProductAutomaton::build(&g, &i).unwrap();
    let model = build_model(&p, &g, &BuildOptions::default());
    let n = p.num_states();
    assert_eq!(model.count_vars(|k| matches!(k, VarKind::U(_))), 7);
    assert_eq!(model.count_vars(|k| matches!(k, VarKind::A(..))), n * n);
    assert_eq!(
        model.count_vars(|k| matches!(k, VarKind::B(..))),
        g.num_edges() * g.num_events()
    );
}

#[test]
fn advance_rows_cover_every_transition_pair() {
    let g = tiny_world();
    let i = compile(&parse_itinerary("a c b").unwrap(), &g).unwrap();
    let p = ProductAutomaton::build(&g, &i).unwrap();
    let model = build_model(&p, &g, &BuildOptions::default());
    let transitions: usize = (0..p.num_states() as u32).map(|s| p.out(s).len()).sum();
    // one Advance row per ordered pair of defined transitions, minus rows
    // that fully cancel (none here: no silent self-loops)
    assert_eq!(
        model.count_rows(itival_core::ilp::RowRule::Advance),
        transitions * transitions
    );
}

#[test]
fn j_is_exactly_xor_of_its_b_variables() {
    let g = tiny_world();
    let i = compile(&parse_itinerary("a c").unwrap(), &g).unwrap();
    let p = ProductAutomaton::build(&g, &i).unwrap();
    let model = build_model(&p, &g, &BuildOptions::default());
    for names in [&[][..], &["s"][..], &["t"][..], &["s", "t"][..]] {
        // b and j are pinned by propagation regardless of feasibility
        let assignment = propagate_selection(&model, &g, names).assignment;
        for v in 0..model.num_vars() as u32 {
            if let VarKind::J(e, d, y) = model.var_kind(v) {
                let be = (0..model.num_vars() as u32)
                    .find(|&w| model.var_kind(w) == VarKind::B(e, y))
                    .unwrap();
                let bd = (0..model.num_vars() as u32)
                    .find(|&w| model.var_kind(w) == VarKind::B(d, y))
                    .unwrap();
                let (be, bd, j) = (
                    assignment[be as usize].unwrap_or(false),
                    assignment[bd as usize].unwrap_or(false),
                    assignment[v as usize].unwrap_or(false),
                );
                assert_eq!(j, be ^ bd, "j must equal b XOR b for every fixed u");
            }
        }
    }
}

#[test]
fn propagated_closure_equals_fixed_point_relation() {
    let g = tiny_world();
    for src in ["a c", "a c b", "(a c)* ", "a c a + b c b"] {
        let i = compile(&parse_itinerary(src).unwrap(), &g).unwrap();
        let p = ProductAutomaton::build(&g, &i).unwrap();
        let model = build_model(&p, &g, &BuildOptions::default());
        for names in [&[][..], &["s"][..], &["t"][..], &["s", "t"][..]] {
            let sel = SensorSelection::from_names(&g, names.iter().copied()).unwrap();
            let rel = compute_relation(&p, &g, &sel);
            let prop = propagate_selection(&model, &g, names);
            let n = p.num_states() as u32;
            for q in 0..n {
                for pp in 0..n {
                    let forced = prop.assignment[model.a_var(q, pp) as usize] == Some(true);
                    assert_eq!(
                        forced,
                        rel.contains(q, pp),
                        "closure mismatch at ({q},{pp}) for {src} with {names:?}"
                    );
                }
            }
            // conflict iff the relation mixes acceptance
            let mixes = rel
                .iter()
                .any(|(x, y)| p.is_accepting(x) != p.is_accepting(y));
            assert_eq!(prop.conflict.is_some(), mixes);
        }
    }
}

#[test]
fn dedup_flag_preserves_the_optimum() {
    let g = department();
    for row in [1, 3, 5, 6] {
        let i = department_itinerary(&g, row);
        let p = ProductAutomaton::build(&g, &i).unwrap();
        let plain = build_model(&p, &g, &BuildOptions::default());
        let dedup = build_model(
            &p,
            &g,
            &BuildOptions {
                dedup_symmetric: true,
            },
        );
        assert!(
            dedup.count_rows(itival_core::ilp::RowRule::Advance)
                < plain.count_rows(itival_core::ilp::RowRule::Advance)
        );
        let a = ilp::solve_model(&plain, None).unwrap().solution;
        let b = ilp::solve_model(&dedup, None).unwrap().solution;
        assert_eq!(a.status, b.status, "row {row}");
        assert_eq!(a.objective, b.objective, "row {row}");
    }
}

#[test]
fn emission_is_deterministic_and_matches_golden() {
    let g = department();
    let i = department_itinerary(&g, 1);
    let p = ProductAutomaton::build(&g, &i).unwrap();
    let model = build_model(&p, &g, &BuildOptions::default());
    let lp = emit_lp(&model);
    let again = emit_lp(&build_model(&p, &g, &BuildOptions::default()));
    assert_eq!(lp, again, "emission must be byte-stable across rebuilds");

    let path = fixtures_dir().join("department_row1.lp");
    if std::env::var_os("ITIVAL_REGEN_FIXTURES").is_some() {
        std::fs::write(&path, &lp).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden LP fixture");
    assert_eq!(lp, golden, "emitted LP diverged from the committed golden file");
}

#[test]
fn solution_parsing_round_trips_and_rejects_junk() {
    let g = tiny_world();
    let i = compile(&parse_itinerary("a c").unwrap(), &g).unwrap();
    let p = ProductAutomaton::build(&g, &i).unwrap();
    let model = build_model(&p, &g, &BuildOptions::default());
    let outcome = ilp::solve_model(&model, None).unwrap();
    let text = format_solution(&model, &outcome.solution);
    let parsed = parse_solution(&text, &model).unwrap();
    assert_eq!(parsed.status, SolutionStatus::Optimal);
    assert_eq!(parsed.objective, outcome.solution.objective);
    assert_eq!(parsed.assignment, outcome.solution.assignment);

    assert!(matches!(
        parse_solution("status optimal\nu_bogus 1\n", &model),
        Err(IlpError::UnknownVariable(_))
    ));
    assert!(matches!(
        parse_solution("u_s 1\n", &model),
        Err(IlpError::MissingStatus)
    ));
    assert!(matches!(
        parse_solution("status optimal\nu_s one\n", &model),
        Err(IlpError::MalformedLine { .. })
    ));
    assert!(matches!(
        parse_solution("status optimal\nu_s 1 2\n", &model),
        Err(IlpError::MalformedLine { .. })
    ));
    assert!(matches!(
        parse_solution("", &model),
        Err(IlpError::MissingStatus)
    ));
}

#[test]
fn extraction_verifies_certification() {
    let g = department();
    let i = department_itinerary(&g, 5);
    let p = ProductAutomaton::build(&g, &i).unwrap();
    let model = build_model(&p, &g, &BuildOptions::default());

    // the paper's row-5 selection, handed back as solver output
    let mut text = String::from("status optimal\nobjective 5\n");
    for name in ["o1", "b1", "b2", "o2", "b3"] {
        text.push_str(&format!("u_{name} 1\n"));
    }
    let sol = parse_solution(&text, &model).unwrap();
    let sel = extract_selection(&sol, &model, &g, &i).unwrap();
    assert_eq!(sel.len(), 5);
    assert_eq!(sel.names(&g), vec!["b1", "b2", "b3", "o1", "o2"]);

    // a non-certifying "optimal" claim must be rejected
    let bogus = parse_solution("status optimal\nu_o1 1\n", &model).unwrap();
    assert!(matches!(
        extract_selection(&bogus, &model, &g, &i),
        Err(IlpError::SolutionNotCertifying)
    ));

    // non-optimal statuses carry no selection
    let infeasible = parse_solution("status infeasible\n", &model).unwrap();
    assert!(matches!(
        extract_selection(&infeasible, &model, &g, &i),
        Err(IlpError::NotOptimal)
    ));
}

#[test]
fn external_solver_adapter_runs_a_command() {
    use std::io::Write as _;
    let g = tiny_world();
    let i = compile(&parse_itinerary("a c").unwrap(), &g).unwrap();
    let p = ProductAutomaton::build(&g, &i).unwrap();
    let model = build_model(&p, &g, &BuildOptions::default());

    // stand-in solver: solves nothing, copies a canned solution into place
    let outcome = ilp::solve_model(&model, None).unwrap();
    let canned = format_solution(&model, &outcome.solution);
    let dir = tempfile::tempdir().unwrap();
    let canned_path = dir.path().join("canned.sol");
    std::fs::write(&canned_path, &canned).unwrap();
    let script_path = dir.path().join("fake-solver.sh");
    {
        let mut f = std::fs::File::create(&script_path).unwrap();
        writeln!(f, "#!/bin/sh").unwrap();
        writeln!(f, "grep -q '^Minimize$' \"$1\" || exit 3").unwrap();
        writeln!(f, "cp {} \"$2\"", canned_path.display()).unwrap();
    }
    let cmd = SolverCommand::new(format!("sh {} {{model}} {{solution}}", script_path.display()));
    let sol = cmd.run(&model).unwrap();
    assert_eq!(sol.status, SolutionStatus::Optimal);
    assert_eq!(sol.objective, outcome.solution.objective);

    let failing = SolverCommand::new("exit 7");
    assert!(matches!(
        failing.run(&model),
        Err(IlpError::SolverFailed(_))
    ));
}
