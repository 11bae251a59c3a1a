mod dot;
mod fail;
mod json;
mod model;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::exit;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::json;

use epimu::formulas::{
    agreement, agreement_fixpoint, decisions_are_known, decisions_from_inputs,
    inputs_are_functions, outputs_are_functions,
};
use epimu::logic::parse::parse_formula;
use epimu::models::{k_concurrency_model, protocol_model_iis, task_model_sak, TaskLabeling};
use epimu::solvability::fd::{
    family_model, witness_path, BowtieGraph, CornerFamilies, LabelingSpace, PathOutcome,
};
use epimu::solvability::search::{search_morphism, SearchConfig};
use epimu::solvability::sperner::{rainbow_count, random_coloring, SpernerInstance};
use epimu::solvability::{
    knowledge_gain_check, morphism_images, pull_back, verify_morphism, Morphism,
};
use epimu::subdivision::SubdividedFacet;
use epimu::{Formula, Value};

use fail::Failure;
use model::{resolve, ModelArgs};

#[derive(Parser)]
#[command(name = "epimu", version, about = "Epistemic model checking on simplicial task models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a model and report its size
    Build(BuildCmd),
    /// Evaluate a formula over a model
    Check(CheckCmd),
    /// Decide k-set agreement solvability by exhaustive search
    Solve(SolveCmd),
    /// Walk the contradiction path under a sampled decision labeling
    Witness(WitnessCmd),
    /// Sample legal colorings and count rainbow facets
    Sperner(SpernerCmd),
    /// Export a model as a graph
    Export(ExportCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct BuildCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// ifun | ofun | valid | agree | know | phi | @file | formula text
    #[arg(long)]
    formula: String,
    /// agreement width for the agree and phi families (defaults to --k)
    #[arg(long)]
    k_param: Option<usize>,
    /// counterexample states listed before truncating
    #[arg(long, default_value_t = 5)]
    max_counterexamples: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveCmd {
    /// iis | rk
    #[arg(long, default_value = "iis")]
    protocol: String,
    #[arg(long)]
    n: usize,
    /// agreement width of the target task
    #[arg(long)]
    k: usize,
    /// rounds of the iis protocol
    #[arg(long)]
    m: Option<usize>,
    /// concurrency bound for the rk protocol
    #[arg(long)]
    k_conc: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    limit: usize,
    /// assignments explored before giving up
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessCmd {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// walk at most this many facets (default: one past the graph size)
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpernerCmd {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            exit(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Build(args) => cmd_model(args.model, args.format, args.out, "build"),
        Cmd::Export(args) => cmd_model(args.model, args.format, args.out, "export"),
        Cmd::Check(args) => cmd_check(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Witness(args) => cmd_witness(args),
        Cmd::Sperner(args) => cmd_sperner(args),
    };
    if let Err(f) = result {
        eprintln!("error: {}", f.message());
        exit(f.exit_code());
    }
}

fn header(config: &str) -> String {
    format!("epimu {}\nconfig: {config}\n", env!("CARGO_PKG_VERSION"))
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn cmd_model(args: ModelArgs, format: Format, out: Option<PathBuf>, verb: &str) -> Result<(), Failure> {
    let built = resolve(&args)?;
    let text = match format {
        Format::Text => {
            let mut s = header(&format!("{verb} {}", args.describe()));
            s.push_str(&format!("states: {}\n", built.model.state_count()));
            s.push_str("relations:");
            for (a, pairs) in json::relation_pairs(&built.model)? {
                s.push_str(&format!(" {a}={}", pairs.len()));
            }
            s.push('\n');
            s
        }
        Format::Json => pretty(&json::export(&built)?)?,
        Format::Dot => dot::to_dot(&built.model)?,
    };
    emit(text, &out)
}

fn resolve_formula(spec: &str, n: usize, width: Option<usize>) -> Result<Formula, Failure> {
    let need_width = |name: &str| {
        width.ok_or_else(|| {
            Failure::input(format!("formula {name} needs an agreement width: pass --k-param or --k"))
        })
    };
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {path}: {e}")))?;
        return Ok(parse_formula(text.trim())?);
    }
    match spec {
        "ifun" => Ok(inputs_are_functions(n)),
        "ofun" => Ok(outputs_are_functions(n)),
        "valid" => Ok(decisions_from_inputs(n)),
        "know" => Ok(decisions_are_known(n)),
        "agree" => Ok(agreement(n, need_width("agree")?)),
        "phi" => Ok(agreement_fixpoint(n, need_width("phi")?)),
        text => Ok(parse_formula(text)?),
    }
}

fn cmd_check(args: CheckCmd) -> Result<(), Failure> {
    let built = resolve(&args.model)?;
    let width = args.k_param.or(args.model.k);
    let formula = resolve_formula(&args.formula, built.n(), width)?;
    let sat = built.model.eval(&formula)?;
    let all = built.model.all_states();
    let valid = sat == all;
    let counterexamples: Vec<usize> = all.difference(&sat).copied().collect();

    let mut config = format!("check {} formula={}", args.model.describe(), args.formula);
    if let Some(kp) = args.k_param {
        config.push_str(&format!(" k-param={kp}"));
    }
    let text = match args.format {
        Format::Text => {
            let mut s = header(&config);
            let printed = formula.to_string();
            if printed.len() > 200 {
                let cut = printed
                    .char_indices()
                    .take_while(|(i, _)| *i < 200)
                    .last()
                    .map(|(i, c)| i + c.len_utf8())
                    .unwrap_or(0);
                s.push_str(&format!(
                    "formula: {} ... ({} chars)\n",
                    &printed[..cut],
                    printed.len()
                ));
            } else {
                s.push_str(&format!("formula: {printed}\n"));
            }
            s.push_str(&format!("verdict: {}\n", if valid { "valid" } else { "invalid" }));
            if !valid {
                let shown = counterexamples.len().min(args.max_counterexamples);
                s.push_str(&format!(
                    "counterexamples: {shown} shown of {}\n",
                    counterexamples.len()
                ));
                for id in counterexamples.iter().take(shown) {
                    let st = built.model.state(*id)?;
                    s.push_str(&format!("  {}: {}\n", st.name, st.facet));
                }
            }
            s
        }
        Format::Json => {
            let mut listed = Vec::new();
            for id in &counterexamples {
                listed.push(json!({ "id": id, "name": built.model.state(*id)?.name }));
            }
            pretty(&json!({
                "meta": built.meta,
                "config": config,
                "formula": formula.to_string(),
                "valid": valid,
                "counterexamples": listed,
            }))?
        }
        Format::Dot => return Err(Failure::input("dot output applies to build and export only")),
    };
    emit(text, &args.out)
}

/// Every process/view pair a protocol can reach, with its decision.
fn decision_table(
    facets: &[SubdividedFacet],
    delta: &Morphism,
) -> Result<Vec<(u32, Value, u32)>, Failure> {
    let mut keys = BTreeSet::new();
    for sf in facets {
        for v in sf.realized().iter() {
            keys.insert((v.color, v.value.clone()));
        }
    }
    keys.into_iter()
        .map(|(a, view)| {
            let d = delta.decision(a, &view)?;
            Ok((a.0, view, d))
        })
        .collect()
}

fn cmd_solve(args: SolveCmd) -> Result<(), Failure> {
    let (protocol, config) = match args.protocol.as_str() {
        "iis" => {
            let m = args.m.unwrap_or(1);
            let p = protocol_model_iis(args.n, m, args.limit)?;
            let c = format!(
                "solve protocol=iis n={} k={} m={m} budget={} limit={}",
                args.n, args.k, args.budget, args.limit
            );
            (p, c)
        }
        "rk" => {
            let k_conc = args
                .k_conc
                .ok_or_else(|| Failure::input("protocol rk requires --k-conc"))?;
            let p = k_concurrency_model(args.n, k_conc, args.limit)?;
            let c = format!(
                "solve protocol=rk n={} k={} k-conc={k_conc} budget={} limit={}",
                args.n, args.k, args.budget, args.limit
            );
            (p, c)
        }
        other => return Err(Failure::input(format!("unknown protocol {other}"))),
    };

    let search = SearchConfig { node_budget: args.budget, presweep: true };
    let outcome = search_morphism(&protocol, args.k, &search)?;

    let text = match outcome.morphism {
        None => match args.format {
            Format::Text => {
                let mut s = header(&config);
                s.push_str("verdict: UNSOLVABLE\n");
                s.push_str(&format!("explored: {} assignments\n", outcome.explored));
                if let Some(base) = &outcome.refuted_base {
                    s.push_str(&format!("refuted-base: {base}\n"));
                }
                s
            }
            Format::Json => pretty(&json!({
                "meta": { "config": config, "version": env!("CARGO_PKG_VERSION") },
                "verdict": "UNSOLVABLE",
                "explored": outcome.explored,
                "refuted_base": outcome.refuted_base,
            }))?,
            Format::Dot => return Err(Failure::input("dot output applies to build and export only")),
        },
        Some(delta) => {
            let task = task_model_sak(args.n, args.k, TaskLabeling::InputsAndDecisions)?;
            let verified = verify_morphism(&protocol, &task, &delta)?;
            let images = morphism_images(&protocol, &task, &delta)?;
            let pulled = pull_back(&protocol, &task, &images)?;
            let all: Vec<usize> = (0..pulled.state_count()).collect();
            let battery = [
                ("ifun", inputs_are_functions(args.n)),
                ("ofun", outputs_are_functions(args.n)),
                ("valid", decisions_from_inputs(args.n)),
                ("agree", agreement(args.n, args.k)),
                ("know", decisions_are_known(args.n)),
                ("phi", agreement_fixpoint(args.n, args.k)),
            ];
            let mut gains = Vec::new();
            for (name, phi) in &battery {
                let gained = knowledge_gain_check(&protocol, &task, &delta, phi, &all)?;
                gains.push((*name, gained.len()));
            }
            let gained_total: usize = gains.iter().map(|(_, c)| c).sum();
            let pb_valid = pulled.valid(&agreement_fixpoint(args.n, args.k))?;
            let table = decision_table(protocol.facets(), &delta)?;
            match args.format {
                Format::Text => {
                    let mut s = header(&config);
                    s.push_str("verdict: SOLVABLE\n");
                    s.push_str(&format!("explored: {} assignments\n", outcome.explored));
                    s.push_str(&format!("verified: {verified}\n"));
                    if gained_total == 0 {
                        s.push_str(&format!("knowledge-gain: none across {} formulas\n", gains.len()));
                    } else {
                        s.push_str(&format!(
                            "knowledge-gain: {gained_total} states across {} formulas\n",
                            gains.len()
                        ));
                    }
                    s.push_str(&format!(
                        "pull-back phi: {}\n",
                        if pb_valid { "valid" } else { "invalid" }
                    ));
                    s.push_str(&format!(
                        "decisions: {} view assignments (use --format json for the table)\n",
                        table.len()
                    ));
                    s
                }
                Format::Json => pretty(&json!({
                    "meta": { "config": config, "version": env!("CARGO_PKG_VERSION") },
                    "verdict": "SOLVABLE",
                    "explored": outcome.explored,
                    "verified": verified,
                    "knowledge_gain": gains
                        .iter()
                        .map(|(name, c)| json!({ "formula": name, "states": c }))
                        .collect::<Vec<_>>(),
                    "pull_back_phi": pb_valid,
                    "decisions": table
                        .iter()
                        .map(|(a, view, d)| json!({
                            "process": a,
                            "view": json::value_to_json(view),
                            "decide": d,
                        }))
                        .collect::<Vec<_>>(),
                }))?,
                Format::Dot => {
                    return Err(Failure::input("dot output applies to build and export only"))
                }
            }
        }
    };
    emit(text, &args.out)
}

fn cmd_witness(args: WitnessCmd) -> Result<(), Failure> {
    let fams = CornerFamilies::new(args.n, args.m)?;
    let graph = BowtieGraph::new(&fams, args.k)?;
    let space = LabelingSpace::over(graph.facets().iter());
    let mut rng = StdRng::seed_from_u64(args.seed);
    let delta = space.sample(&mut rng);
    let model = family_model(&graph, &delta)?;
    let max_len = args.max_len.unwrap_or(graph.facets().len() + 1);
    let report = witness_path(&graph, &model, max_len)?;
    let table = decision_table(graph.facets(), &delta)?;

    let config = format!(
        "witness n={} m={} k={} seed={} max-len={max_len}",
        args.n, args.m, args.k, args.seed
    );
    let outcome_text = match &report.outcome {
        PathOutcome::FormulaFailure { step, facet, formula } => {
            format!("formula failure at step {step}: {formula} fails at {facet}")
        }
        PathOutcome::ConsistentEnd => "consistent end: no live edge extends the path".into(),
        PathOutcome::LengthContradiction => {
            "length contradiction: the walk exceeded every admissible length".into()
        }
        PathOutcome::Truncated => format!("truncated at max-len {max_len}"),
    };
    let text = match args.format {
        Format::Text => {
            let mut s = header(&config);
            s.push_str("labeling:\n");
            for (a, view, d) in &table {
                s.push_str(&format!("  {a} @ {view} -> {d}\n"));
            }
            s.push_str("path:\n");
            for (i, facet) in report.facets.iter().enumerate() {
                s.push_str(&format!("  {i}: {facet}\n"));
            }
            s.push_str(&format!("outcome: {outcome_text}\n"));
            s
        }
        Format::Json => {
            let outcome = match &report.outcome {
                PathOutcome::FormulaFailure { step, facet, formula } => json!({
                    "kind": "formula-failure",
                    "step": step,
                    "facet": facet,
                    "formula": formula,
                }),
                PathOutcome::ConsistentEnd => json!({ "kind": "consistent-end" }),
                PathOutcome::LengthContradiction => json!({ "kind": "length-contradiction" }),
                PathOutcome::Truncated => json!({ "kind": "truncated", "max_len": max_len }),
            };
            pretty(&json!({
                "meta": { "config": config, "seed": args.seed, "version": env!("CARGO_PKG_VERSION") },
                "labeling": table
                    .iter()
                    .map(|(a, view, d)| json!({
                        "process": a,
                        "view": json::value_to_json(view),
                        "decide": d,
                    }))
                    .collect::<Vec<_>>(),
                "path": report.facets,
                "outcome": outcome,
            }))?
        }
        Format::Dot => return Err(Failure::input("dot output applies to build and export only")),
    };
    emit(text, &args.out)
}

fn cmd_sperner(args: SpernerCmd) -> Result<(), Failure> {
    let inst = SpernerInstance::new(args.n, args.m)?;
    let mut rng = StdRng::seed_from_u64(args.seed);
    let mut counts = Vec::with_capacity(args.samples);
    for _ in 0..args.samples {
        let coloring = random_coloring(&inst, &mut rng);
        counts.push(rainbow_count(&inst, &coloring)?);
    }
    let all_odd = counts.iter().all(|c| c % 2 == 1);
    let config = format!(
        "sperner n={} m={} samples={} seed={}",
        args.n, args.m, args.samples, args.seed
    );
    let text = match args.format {
        Format::Text => {
            let mut s = header(&config);
            for (i, c) in counts.iter().enumerate() {
                s.push_str(&format!(
                    "sample {i}: rainbow={c} {}\n",
                    if c % 2 == 1 { "odd" } else { "even" }
                ));
            }
            s.push_str(&format!("all-odd: {all_odd}\n"));
            s
        }
        Format::Json => pretty(&json!({
            "meta": { "config": config, "seed": args.seed, "version": env!("CARGO_PKG_VERSION") },
            "samples": counts,
            "all_odd": all_odd,
        }))?,
        Format::Dot => return Err(Failure::input("dot output applies to build and export only")),
    };
    emit(text, &args.out)
}
