//! Command-line front end: solve, check, classify, emit the ILP, dump
//! compiled DFAs, and generate instances.
//!
//! Exit codes: 0 success (or CERTIFYING for `check`), 1 NOT CERTIFYING,
//! 2 invalid input, 3 engine disagreement, 4 timeout.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use itival_core::certify::{classify_stream, Certifier, StreamVerdict};
use itival_core::generators::{random_instance, reduce_setcover, RandomParams, SetCoverInstance};
use itival_core::ilp::{
    self, build_model, emit_lp, extract_selection, BuildOptions, SolutionStatus, SolverCommand,
};
use itival_core::itinerary::{compile, parse_itinerary, DfaFile, ItineraryDfa};
use itival_core::product::ProductAutomaton;
use itival_core::search::{solve_exact_with, SolveError, SolveOptions, SolveStatus};
use itival_core::world::{ObservationSequence, SensorSelection, WorldGraph};

const EXIT_OK: i32 = 0;
const EXIT_NOT_CERTIFYING: i32 = 1;
const EXIT_INPUT: i32 = 2;
const EXIT_DISAGREEMENT: i32 = 3;
const EXIT_TIMEOUT: i32 = 4;

#[derive(Parser)]
#[command(
    name = "itival",
    about = "Exact sensor selection for validating movement itineraries",
    version
)]
struct Cli {
    /// Output format for results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized generation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Solve timeout in seconds.
    #[arg(long, global = true)]
    timeout: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Bnb,
    Ilp,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a minimum-size certifying sensor selection.
    Solve(SolveArgs),
    /// Decide whether a given sensor set certifies the itinerary.
    Check(CheckArgs),
    /// Emit the 0-1 program in LP format.
    EmitIlp(EmitArgs),
    /// Classify a recorded observation stream under a certifying selection.
    Classify(ClassifyArgs),
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compile an itinerary and dump the resulting DFA.
    CompileItinerary(CompileArgs),
}

#[derive(Args)]
struct SolveArgs {
    world: PathBuf,
    /// Itinerary: a file (expression or DFA JSON) or an inline expression.
    itinerary: String,
    #[arg(long, value_enum, default_value_t = Engine::Bnb)]
    engine: Engine,
    /// Worker threads for the branch-and-bound engine.
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    /// External ILP solver command template with {model} and {solution}
    /// placeholders; defaults to $ITIVAL_ILP_SOLVER, else the built-in
    /// propagation search.
    #[arg(long)]
    solver_cmd: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    world: PathBuf,
    itinerary: String,
    /// Sensor ids to turn on.
    sensors: Vec<String>,
}

#[derive(Args)]
struct EmitArgs {
    world: PathBuf,
    itinerary: String,
    /// Output path for the LP file (stdout if omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    world: PathBuf,
    itinerary: String,
    /// Comma-separated certifying sensor selection.
    #[arg(long)]
    sensors: String,
    /// Observation stream: one symbol per line as comma-separated events.
    obs: PathBuf,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Reduce a set-cover instance file to a world/itinerary pair.
    Setcover {
        /// JSON file with {universe, subsets, k}.
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Generate a seeded random world and itinerary.
    Random {
        #[arg(long, default_value_t = 4)]
        vertices: usize,
        #[arg(long, default_value_t = 8)]
        edges: usize,
        #[arg(long, default_value_t = 3)]
        sensors: usize,
        #[arg(long, default_value_t = 1)]
        events_per_sensor: usize,
        #[arg(long, default_value_t = 0.4)]
        label_density: f64,
        #[arg(long, default_value_t = 4)]
        itinerary_depth: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct CompileArgs {
    world: PathBuf,
    itinerary: String,
    /// Output path for the DFA JSON (stdout if omitted).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let timeout = cli.timeout.map(Duration::from_secs_f64);
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args, cli.format, timeout),
        Command::Check(args) => cmd_check(args, cli.format),
        Command::EmitIlp(args) => cmd_emit_ilp(args),
        Command::Classify(args) => cmd_classify(args, cli.format),
        Command::Gen(args) => cmd_gen(args, cli.seed),
        Command::CompileItinerary(args) => cmd_compile(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            err.exit_code()
        }
    }
}

#[derive(Debug)]
struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: EXIT_INPUT,
        }
    }

    fn timeout(message: impl Into<String>) -> CliError {
        CliError {
            message: message.into(),
            code: EXIT_TIMEOUT,
        }
    }

    fn exit_code(&self) -> i32 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::input(e.to_string())
}

fn load_world(path: &Path) -> Result<WorldGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("reading {}: {e}", path.display())))?;
    WorldGraph::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Load an itinerary from a file path or inline expression. JSON content is
/// an explicit DFA description; anything else is an expression.
fn load_itinerary(spec: &str, g: &WorldGraph) -> Result<ItineraryDfa, CliError> {
    let path = Path::new(spec);
    let (text, origin) = if path.exists() {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("reading {}: {e}", path.display())))?;
        (content, path.display().to_string())
    } else {
        (spec.to_string(), "inline itinerary".to_string())
    };
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let file: DfaFile = serde_json::from_str(trimmed)
            .map_err(|e| CliError::input(format!("{origin}: {e}")))?;
        ItineraryDfa::from_file(&file, g).map_err(|e| CliError::input(format!("{origin}: {e}")))
    } else {
        let expr =
            parse_itinerary(trimmed).map_err(|e| CliError::input(format!("{origin}: {e}")))?;
        compile(&expr, g).map_err(|e| CliError::input(format!("{origin}: {e}")))
    }
}

fn selection_from_names<'a>(
    g: &WorldGraph,
    names: impl IntoIterator<Item = &'a str>,
) -> Result<SensorSelection, CliError> {
    SensorSelection::from_names(g, names).map_err(input_err)
}

struct EngineRun {
    engine: &'static str,
    status: SolveStatus,
    size: Option<usize>,
    selection: Option<SensorSelection>,
    build_ms: f64,
    solve_ms: f64,
    detail: String,
}

fn run_bnb_engine(
    g: &WorldGraph,
    i: &ItineraryDfa,
    timeout: Option<Duration>,
    parallel: usize,
) -> Result<EngineRun, CliError> {
    let t0 = Instant::now();
    let certifier = Certifier::new(g, i).map_err(input_err)?;
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;
    let opts = SolveOptions { timeout, parallel };
    let t1 = Instant::now();
    let res = solve_exact_with(&certifier, &opts).map_err(|e| match e {
        SolveError::Timeout { .. } => CliError::timeout(e.to_string()),
        other => input_err(other),
    })?;
    Ok(EngineRun {
        engine: "bnb",
        status: res.status,
        size: res.size,
        selection: res.selection,
        build_ms,
        solve_ms: t1.elapsed().as_secs_f64() * 1e3,
        detail: format!(
            "nodes={} certification_calls={}",
            res.stats.nodes, res.stats.certification_calls
        ),
    })
}

fn run_ilp_engine(
    g: &WorldGraph,
    i: &ItineraryDfa,
    timeout: Option<Duration>,
    solver_cmd: &Option<String>,
) -> Result<EngineRun, CliError> {
    let p = ProductAutomaton::build(g, i).map_err(input_err)?;
    let t0 = Instant::now();
    let model = build_model(&p, g, &BuildOptions::default());
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;

    let command = solver_cmd
        .clone()
        .map(SolverCommand::new)
        .or_else(SolverCommand::from_env);
    let t1 = Instant::now();
    let (solution, detail) = match command {
        Some(cmd) => {
            let sol = cmd.run(&model).map_err(input_err)?;
            (sol, format!("external solver: {}", cmd.template))
        }
        None => {
            let outcome = ilp::solve_model(&model, timeout).map_err(|e| match e {
                ilp::IlpError::Timeout(_) => CliError::timeout(e.to_string()),
                other => input_err(other),
            })?;
            let detail = format!(
                "internal propagation search: nodes={} propagations={}",
                outcome.nodes, outcome.propagations
            );
            (outcome.solution, detail)
        }
    };
    let solve_ms = t1.elapsed().as_secs_f64() * 1e3;
    let (status, size, selection) = match solution.status {
        SolutionStatus::Optimal => {
            let sel = extract_selection(&solution, &model, g, i).map_err(input_err)?;
            (SolveStatus::Optimal, Some(sel.len()), Some(sel))
        }
        SolutionStatus::Infeasible => (SolveStatus::Infeasible, None, None),
        SolutionStatus::Unknown => {
            return Err(input_err("solver returned status unknown"));
        }
    };
    Ok(EngineRun {
        engine: "ilp",
        status,
        size,
        selection,
        build_ms,
        solve_ms,
        detail,
    })
}

fn report_run(g: &WorldGraph, i: &ItineraryDfa, run: &EngineRun, format: Format) {
    let p_states = ProductAutomaton::build(g, i).map(|p| p.num_states()).unwrap_or(0);
    match format {
        Format::Machine => {
            let report = serde_json::json!({
                "instance": {
                    "vertices": g.num_vertices(),
                    "edges": g.num_edges(),
                    "sensors": g.num_sensors(),
                    "itinerary_states": i.num_states(),
                    "product_states": p_states,
                },
                "engine": run.engine,
                "status": match run.status {
                    SolveStatus::Optimal => "optimal",
                    SolveStatus::Infeasible => "infeasible",
                },
                "size": run.size,
                "selection": run.selection.as_ref().map(|s| s.names(g)),
                "timings_ms": { "build": run.build_ms, "solve": run.solve_ms },
                "detail": run.detail,
            });
            println!("{report}");
        }
        Format::Text => {
            println!(
                "instance: |V|={} |E|={} |S|={} |Q|={} |QP|={}",
                g.num_vertices(),
                g.num_edges(),
                g.num_sensors(),
                i.num_states(),
                p_states
            );
            match run.status {
                SolveStatus::Optimal => {
                    let names = run.selection.as_ref().map(|s| s.names(g)).unwrap_or_default();
                    println!(
                        "{}: optimal size {} selection {{{}}}",
                        run.engine,
                        run.size.unwrap_or(0),
                        names.join(", ")
                    );
                }
                SolveStatus::Infeasible => {
                    println!("{}: infeasible (even the full sensor set cannot certify)", run.engine);
                }
            }
            println!(
                "timings: build {:.1} ms, solve {:.1} ms ({})",
                run.build_ms, run.solve_ms, run.detail
            );
        }
    }
}

fn cmd_solve(args: &SolveArgs, format: Format, timeout: Option<Duration>) -> Result<i32, CliError> {
    let g = load_world(&args.world)?;
    let i = load_itinerary(&args.itinerary, &g)?;
    let runs = match args.engine {
        Engine::Bnb => vec![run_bnb_engine(&g, &i, timeout, args.parallel)?],
        Engine::Ilp => vec![run_ilp_engine(&g, &i, timeout, &args.solver_cmd)?],
        Engine::Both => vec![
            run_bnb_engine(&g, &i, timeout, args.parallel)?,
            run_ilp_engine(&g, &i, timeout, &args.solver_cmd)?,
        ],
    };
    for run in &runs {
        report_run(&g, &i, run, format);
    }
    if runs.len() == 2 && (runs[0].status != runs[1].status || runs[0].size != runs[1].size) {
        eprintln!(
            "error: engine disagreement: bnb={:?}/{:?} ilp={:?}/{:?}",
            runs[0].status, runs[0].size, runs[1].status, runs[1].size
        );
        return Ok(EXIT_DISAGREEMENT);
    }
    Ok(EXIT_OK)
}

fn cmd_check(args: &CheckArgs, format: Format) -> Result<i32, CliError> {
    let g = load_world(&args.world)?;
    let i = load_itinerary(&args.itinerary, &g)?;
    let m = selection_from_names(&g, args.sensors.iter().map(|s| s.as_str()))?;
    let result = itival_core::is_certifying(&g, &i, &m).map_err(input_err)?;
    if result.vacuous {
        eprintln!(
            "warning: the itinerary admits no conforming walk; every selection certifies vacuously"
        );
    }
    match format {
        Format::Machine => {
            let witness = result.witness.as_ref().map(|(win, wout)| {
                serde_json::json!({
                    "conforming": g.walk_to_string(win),
                    "deviating": g.walk_to_string(wout),
                })
            });
            println!(
                "{}",
                serde_json::json!({
                    "certifying": result.certifying,
                    "vacuous": result.vacuous,
                    "witness": witness,
                })
            );
        }
        Format::Text => {
            if result.certifying {
                println!("CERTIFYING");
            } else {
                println!("NOT CERTIFYING");
                if let Some((win, wout)) = &result.witness {
                    println!("in-itinerary walk:  {}", g.walk_to_string(win));
                    println!("indistinguishable:  {}", g.walk_to_string(wout));
                }
            }
        }
    }
    Ok(if result.certifying {
        EXIT_OK
    } else {
        EXIT_NOT_CERTIFYING
    })
}

fn cmd_emit_ilp(args: &EmitArgs) -> Result<i32, CliError> {
    let g = load_world(&args.world)?;
    let i = load_itinerary(&args.itinerary, &g)?;
    let p = ProductAutomaton::build(&g, &i).map_err(input_err)?;
    let model = build_model(&p, &g, &BuildOptions::default());
    let lp = emit_lp(&model);
    match &args.out {
        Some(path) => std::fs::write(path, lp)
            .map_err(|e| CliError::input(format!("writing {}: {e}", path.display())))?,
        None => print!("{lp}"),
    }
    Ok(EXIT_OK)
}

fn cmd_classify(args: &ClassifyArgs, format: Format) -> Result<i32, CliError> {
    let g = load_world(&args.world)?;
    let i = load_itinerary(&args.itinerary, &g)?;
    let m = selection_from_names(&g, args.sensors.split(',').map(str::trim))?;
    let text = std::fs::read_to_string(&args.obs)
        .map_err(|e| CliError::input(format!("reading {}: {e}", args.obs.display())))?;
    let obs = ObservationSequence::parse(&g, &text).map_err(input_err)?;
    let verdict = classify_stream(&g, &i, &m, &obs).map_err(input_err)?;
    let name = match verdict {
        StreamVerdict::Conform => "CONFORM",
        StreamVerdict::Deviate => "DEVIATE",
        StreamVerdict::NoConsistentWalk => "NO CONSISTENT WALK",
    };
    match format {
        Format::Machine => println!("{}", serde_json::json!({ "verdict": name })),
        Format::Text => println!("{name}"),
    }
    Ok(EXIT_OK)
}

fn cmd_gen(args: &GenCommand, seed: u64) -> Result<i32, CliError> {
    match args {
        GenCommand::Setcover { input, out_dir } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| CliError::input(format!("reading {}: {e}", input.display())))?;
            let sc: SetCoverInstance = serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("{}: {e}", input.display())))?;
            let (g, i, k_prime) = reduce_setcover(&sc).map_err(input_err)?;
            std::fs::create_dir_all(out_dir).map_err(input_err)?;
            let world_path = out_dir.join("setcover.world.json");
            let dfa_path = out_dir.join("setcover.itinerary.json");
            std::fs::write(&world_path, g.to_canonical_string()).map_err(input_err)?;
            let dfa_json = serde_json::to_string_pretty(&i.to_file()).map_err(input_err)?;
            std::fs::write(&dfa_path, dfa_json + "\n").map_err(input_err)?;
            println!(
                "wrote {} and {}; decision bound k' = {}",
                world_path.display(),
                dfa_path.display(),
                k_prime
            );
            Ok(EXIT_OK)
        }
        GenCommand::Random {
            vertices,
            edges,
            sensors,
            events_per_sensor,
            label_density,
            itinerary_depth,
            out_dir,
        } => {
            let params = RandomParams {
                vertices: *vertices,
                edges: *edges,
                sensors: *sensors,
                events_per_sensor: *events_per_sensor,
                label_density: *label_density,
                itinerary_depth: *itinerary_depth,
            };
            let (g, expr) = random_instance(seed, &params).map_err(input_err)?;
            std::fs::create_dir_all(out_dir).map_err(input_err)?;
            let world_path = out_dir.join("random.world.json");
            let itin_path = out_dir.join("random.itin");
            std::fs::write(&world_path, g.to_canonical_string()).map_err(input_err)?;
            std::fs::write(&itin_path, format!("{expr}\n")).map_err(input_err)?;
            println!("wrote {} and {}", world_path.display(), itin_path.display());
            Ok(EXIT_OK)
        }
    }
}

fn cmd_compile(args: &CompileArgs) -> Result<i32, CliError> {
    let g = load_world(&args.world)?;
    let i = load_itinerary(&args.itinerary, &g)?;
    let json = serde_json::to_string_pretty(&i.to_file()).map_err(input_err)? + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, json)
            .map_err(|e| CliError::input(format!("writing {}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    Ok(EXIT_OK)
}
