use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cogeo::analysis::{self, Analysis, Coherence, Counterfactual, Leadership};
use cogeo::network::run_influence_process;
use cogeo::output::{self, build_report, emit_table, emit_trace, scenario_hash, OutputDir, RunReport, TraceFormat};
use cogeo::scenario::{parse_scenario, AnalysisSpec, Scenario, ScenarioError};

#[derive(Parser)]
#[command(name = "cogeo", version, about = "Run value-space belief scenarios")]
struct Cli {
    /// Output directory (default: $COGEO_OUT_DIR or ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario.
    Validate { scenario: PathBuf },
    /// Run the influence process and export traces.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<u32>,
    },
    /// Leadership component of a leader's belief.
    Leadership {
        scenario: PathBuf,
        #[arg(long)]
        leader: String,
        #[arg(long)]
        being: String,
    },
    /// Round-trip distortion bound between two agents.
    Coherence {
        scenario: PathBuf,
        #[arg(long, value_parser = parse_pair, value_name = "A,B")]
        pair: (String, String),
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Being to transmit (default: the first one held by A).
        #[arg(long)]
        being: Option<String>,
    },
    /// Displacements, costs and preference reversal between two agents.
    Counterfactual {
        scenario: PathBuf,
        #[arg(long, value_parser = parse_pair, value_name = "I,J")]
        agents: (String, String),
    },
    /// Run a named analysis from the scenario (`all` runs every one).
    Report {
        scenario: PathBuf,
        #[arg(long)]
        analysis: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(',') => Ok((a.to_string(), b.to_string())),
        _ => Err(format!("expected two comma-separated ids, got `{s}`")),
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Simulate { .. } => "simulate",
            Command::Leadership { .. } => "leadership",
            Command::Coherence { .. } => "coherence",
            Command::Counterfactual { .. } => "counterfactual",
            Command::Report { .. } => "report",
        }
    }

    fn scenario(&self) -> &Path {
        match self {
            Command::Validate { scenario }
            | Command::Simulate { scenario, .. }
            | Command::Leadership { scenario, .. }
            | Command::Coherence { scenario, .. }
            | Command::Counterfactual { scenario, .. }
            | Command::Report { scenario, .. } => scenario,
        }
    }
}

enum Failure {
    Validation,
    Runtime(String),
}

impl From<cogeo::Error> for Failure {
    fn from(e: cogeo::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<output::OutputError> for Failure {
    fn from(e: output::OutputError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

struct Run {
    out: OutputDir,
    hash: Option<String>,
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = OutputDir::resolve(cli.out.as_deref());
    let out = match OutputDir::create(root) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut run = Run {
        out,
        hash: None,
        seed: None,
    };
    let result = execute(&cli.command, &mut run);
    let (status, code) = match &result {
        Ok(()) => ("ok", 0),
        Err(Failure::Validation) => ("invalid", 1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ("error", 2)
        }
    };
    if let Err(e) = run.out.finish(cli.command.name(), run.hash, run.seed, status) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

fn load(path: &Path, run: &mut Run) -> Result<Scenario, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
    run.hash = Some(scenario_hash(&bytes));
    let shown = path.display();
    let Ok(text) = String::from_utf8(bytes) else {
        eprintln!("{shown}: scenario is not valid UTF-8");
        return Err(Failure::Validation);
    };
    match parse_scenario(&text) {
        Ok(s) => {
            run.seed = Some(s.sim_config(None).seed);
            Ok(s)
        }
        Err(ScenarioError::Parse { line, col, message }) => {
            eprintln!("{shown}:{line}:{col}: parse error: {message}");
            Err(Failure::Validation)
        }
        Err(ScenarioError::Invalid(errors)) => {
            for e in &errors {
                match (e.line, e.col) {
                    (Some(l), Some(c)) => eprintln!("{shown}:{l}:{c}: {}: {}", e.path, e.message),
                    _ => eprintln!("{shown}: {}: {}", e.path, e.message),
                }
            }
            eprintln!("{shown}: {} validation error(s)", errors.len());
            Err(Failure::Validation)
        }
    }
}

fn write_report(run: &mut Run, file: &str, report: &RunReport) -> Result<(), Failure> {
    run.out.write(file, &output::to_json_bytes(report)?)?;
    Ok(())
}

fn adhoc(name: &str, analysis: Analysis) -> AnalysisSpec {
    AnalysisSpec {
        name: name.to_string(),
        analysis,
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn execute(cmd: &Command, run: &mut Run) -> Result<(), Failure> {
    let sc = load(cmd.scenario(), run)?;
    let hash = run.hash.clone().unwrap_or_default();
    match cmd {
        Command::Validate { scenario } => {
            println!(
                "{}: ok ({} agents, {} beings, {} maps, {} analyses)",
                scenario.display(),
                sc.agents.len(),
                sc.beings.len(),
                sc.maps.len(),
                sc.analyses.len()
            );
        }
        Command::Simulate { seed, replicates, .. } => {
            let graph = sc.graph()?;
            let sim = sc
                .simulation
                .as_ref()
                .ok_or_else(|| Failure::Runtime("scenario declares no [simulation]".into()))?;
            let (Some(being), Some(origin)) = (&sim.being, &sim.origin) else {
                return Err(Failure::Runtime("[simulation] needs `being` and `origin`".into()));
            };
            let mut cfg = sc.sim_config(*seed);
            if let Some(r) = replicates {
                cfg.replicates = *r;
            }
            run.seed = Some(cfg.seed);
            let traces = run_influence_process(graph, sc.being(being)?, origin, &cfg)?;
            run.out.write("traces.csv", &emit_trace(&traces, TraceFormat::Csv)?)?;
            run.out.write("traces.json", &emit_trace(&traces, TraceFormat::Json)?)?;
            let summary = analysis::propagation_summary(&traces, graph.nodes(), &cfg);
            let report = RunReport {
                engine: output::ENGINE.into(),
                engine_version: output::ENGINE_VERSION.into(),
                scenario_hash: hash,
                seed: cfg.seed,
                analyses: vec![output::AnalysisBlock {
                    name: "simulation".into(),
                    kind: "propagation".into(),
                    result: summary.clone(),
                }],
                warnings: Vec::new(),
            };
            write_report(run, "report.json", &report)?;
            println!("seed {} replicates {} being {being} origin {origin}", cfg.seed, cfg.replicates);
            let first = &traces[0];
            for n in graph.nodes() {
                let freq = summary["adoption_frequency"][n].as_f64().unwrap_or(0.0);
                match first.final_representations.get(n) {
                    Some(x) => println!("{n}: {:?} (adoption frequency {freq})", x.as_slice()),
                    None => println!("{n}: not reached (adoption frequency {freq})"),
                }
            }
            println!("wrote traces to {}", run.out.root().display());
        }
        Command::Leadership { leader, being, .. } => {
            let spec = adhoc(
                "leadership",
                Analysis::Leadership(Leadership {
                    leader: leader.clone(),
                    being: being.clone(),
                    path: None,
                    verify: false,
                }),
            );
            let (report, _) = build_report(&sc, &hash, &[&spec], None)?;
            let result = &report.analyses[0].result;
            println!("leader {leader}, being {being}");
            if let Some(m) = result["membership"].as_object() {
                for (agent, verdict) in m {
                    let text = if verdict == "IN_COMPONENT" { "in component" } else { "not in component" };
                    println!("{agent}: {text}");
                }
            }
            write_report(run, "leadership.json", &report)?;
        }
        Command::Coherence {
            pair, eps, k, being, ..
        } => {
            let (a, b) = (&pair.0, &pair.1);
            let being = match being {
                Some(id) => id.clone(),
                None => sc
                    .beings
                    .iter()
                    .find(|x| x.held_by(a, &sc.tolerance).is_some())
                    .map(|x| x.id.clone())
                    .ok_or_else(|| Failure::Runtime(format!("no being is held by `{a}`; pass --being")))?,
            };
            let spec = adhoc(
                "coherence",
                Analysis::Coherence(Coherence {
                    being,
                    source: a.clone(),
                    target: b.clone(),
                    eps: *eps,
                    k: *k,
                }),
            );
            let (report, _) = build_report(&sc, &hash, &[&spec], None)?;
            print_json(&report.analyses[0].result);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            write_report(run, "coherence.json", &report)?;
        }
        Command::Counterfactual { agents, .. } => {
            let spec = adhoc(
                "counterfactual",
                Analysis::Counterfactual(Counterfactual {
                    agent_i: agents.0.clone(),
                    agent_j: agents.1.clone(),
                    hypothetical: None,
                    tol: 1e-9,
                }),
            );
            let (report, _) = build_report(&sc, &hash, &[&spec], None)?;
            print_json(&report.analyses[0].result);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            write_report(run, "counterfactual.json", &report)?;
        }
        Command::Report { analysis, seed, .. } => {
            let specs: Vec<&AnalysisSpec> = if analysis == "all" {
                sc.analyses.iter().collect()
            } else {
                match sc.analysis(analysis) {
                    Some(s) => vec![s],
                    None => {
                        let names: Vec<&str> = sc.analyses.iter().map(|a| a.name.as_str()).collect();
                        return Err(Failure::Runtime(format!(
                            "no analysis named `{analysis}` (available: {})",
                            names.join(", ")
                        )));
                    }
                }
            };
            run.seed = Some(sc.sim_config(*seed).seed);
            let (report, tables) = build_report(&sc, &hash, &specs, *seed)?;
            write_report(run, "report.json", &report)?;
            for (name, table) in &tables {
                run.out.write(&format!("{name}.csv"), &emit_table(table)?)?;
            }
            println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}
