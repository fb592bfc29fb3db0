//! `destack`: command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or failed verification, 3 step
//! budget exhausted, 1 anything else. Structured output goes to stdout,
//! human-readable diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use destack_core::destackify::{destackify_all, Config, DestackError, DEFAULT_BUDGET};
use destack_core::grouprep::{self, decompose_dim_one, Block, GroupError, LineCount, StratumKind};
use destack_core::invariants::all_invariants;
use destack_core::io::{self, GroupSpec};
use destack_core::stackyfan::{fan_hash, replay, validate, StackyFan, StepTrace};

#[derive(Parser)]
#[command(name = "destack", version, about = "Toric destackification and monomial group tools")]
struct Cli {
    /// Step budget for destackification.
    #[arg(long, global = true, env = "DESTACK_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Treat divisors of multiplicity one as validation failures.
    #[arg(long, global = true)]
    strict_divisors: bool,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the fan axioms and mark conventions.
    Validate { fan: PathBuf },
    /// Per-cone invariants.
    Invariants { fan: PathBuf },
    /// Destackify a fan and print the final fan file.
    Destackify {
        fan: PathBuf,
        /// Write the step trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write a DOT picture of the final coarse fan here.
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        /// Write the final fan here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace against its input fan and check every hash.
    Replay { fan: PathBuf, trace: PathBuf },
    /// ord^na of a block of a monomial representation.
    Ordna {
        group: PathBuf,
        #[arg(long, default_value = "all")]
        block: String,
    },
    /// Iterated local abelianization steps until ord^na vanishes.
    AbelianizeDemo {
        group: PathBuf,
        #[arg(long, default_value = "all")]
        block: String,
        #[arg(long, default_value_t = 16)]
        max_levels: usize,
    },
    /// Dimension of equivariant polynomial maps V → W of degree at most d.
    Polydim {
        group: PathBuf,
        #[arg(long)]
        v: String,
        #[arg(long)]
        w: String,
        #[arg(long)]
        degree: usize,
    },
    /// Least degree d ≥ 1 with W inside Sym^d(V).
    FoDegree {
        group: PathBuf,
        #[arg(long)]
        v: String,
        #[arg(long)]
        w: String,
    },
}

/// A failure with a chosen exit code.
struct Exit(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Exit {
    fn from(e: E) -> Self {
        Exit(1, e.into())
    }
}

fn invalid(e: impl Into<anyhow::Error>) -> Exit {
    Exit(2, e.into())
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(invalid)
}

fn load_fan(path: &Path) -> Result<StackyFan, Exit> {
    io::parse_fan(&read(path)?).with_context(|| format!("in {}", path.display())).map_err(invalid)
}

fn load_group(path: &Path) -> Result<GroupSpec, Exit> {
    io::parse_group_spec(&read(path)?).with_context(|| format!("in {}", path.display())).map_err(invalid)
}

fn block(spec: &GroupSpec, name: &str) -> Result<Block, Exit> {
    spec.block(name).ok_or_else(|| invalid(anyhow::anyhow!("no block named {name:?}")))
}

fn group_err(e: GroupError) -> Exit {
    match e {
        GroupError::BudgetExceeded(_) => Exit(3, e.into()),
        _ => invalid(e),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Exit> {
    match &cli.command {
        Command::Validate { fan } => cmd_validate(cli, fan),
        Command::Invariants { fan } => cmd_invariants(cli, fan),
        Command::Destackify { fan, trace, emit_dot, out } => cmd_destackify(cli, fan, trace.as_deref(), emit_dot.as_deref(), out.as_deref()),
        Command::Replay { fan, trace } => cmd_replay(cli, fan, trace),
        Command::Ordna { group, block } => cmd_ordna(cli, group, block),
        Command::AbelianizeDemo { group, block, max_levels } => cmd_abelianize(cli, group, block, *max_levels),
        Command::Polydim { group, v, w, degree } => {
            let spec = load_group(group)?;
            let g = spec.build().map_err(invalid)?;
            let n = grouprep::poly_dim(&g, &block(&spec, v)?, &block(&spec, w)?, *degree).map_err(group_err)?;
            emit_value(cli, "polyDim", json!(n));
            Ok(())
        }
        Command::FoDegree { group, v, w } => {
            let spec = load_group(group)?;
            let g = spec.build().map_err(invalid)?;
            let d = grouprep::fo_degree(&g, &block(&spec, v)?, &block(&spec, w)?).map_err(group_err)?;
            emit_value(cli, "foDegree", json!(d));
            Ok(())
        }
    }
}

fn emit_value(cli: &Cli, key: &str, v: Value) {
    if cli.json {
        print_json(&json!({ key: v }));
    } else {
        println!("{v}");
    }
}

fn cmd_validate(cli: &Cli, path: &Path) -> Result<(), Exit> {
    let f = load_fan(path)?;
    let rep = validate(&f, cli.strict_divisors);
    if cli.json {
        print_json(&json!({ "valid": rep.is_valid(), "violations": rep.violations, "warnings": rep.warnings }));
    } else {
        println!("{}", if rep.is_valid() { "valid" } else { "invalid" });
        for v in &rep.violations {
            println!("violation: {v}");
        }
    }
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    if rep.is_valid() {
        Ok(())
    } else {
        Err(invalid(anyhow::anyhow!("{} violation(s)", rep.violations.len())))
    }
}

fn validated(cli: &Cli, path: &Path) -> Result<StackyFan, Exit> {
    let f = load_fan(path)?;
    let rep = validate(&f, cli.strict_divisors);
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    if !rep.is_valid() {
        return Err(invalid(anyhow::anyhow!("invalid fan: {}", rep.violations.join("; "))));
    }
    Ok(f)
}

fn cmd_invariants(cli: &Cli, path: &Path) -> Result<(), Exit> {
    let f = validated(cli, path)?;
    let invs = all_invariants(&f)?;
    if cli.json {
        for c in &invs {
            let rec = json!({
                "cone": c.cone,
                "groupOrder": c.local.group.order().to_string(),
                "independenceViolations": c.independence_violations(),
                "toroidalIndex": c.toroidal_index(),
                "divisorialIndex": c.divisorial_index(),
                "lex": c.lex().to_string(),
            });
            println!("{rec}");
        }
    } else {
        println!("{:<16} {:>8} {:>6} {:>6} {:>6}  lex", "cone", "|G|", "viol", "tor", "div");
        for c in &invs {
            println!(
                "{:<16} {:>8} {:>6} {:>6} {:>6}  {}",
                format!("{:?}", c.cone),
                c.local.group.order().to_string(),
                c.independence_violations(),
                c.toroidal_index(),
                c.divisorial_index(),
                c.lex()
            );
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_destackify(cli: &Cli, path: &Path, trace: Option<&Path>, dot: Option<&Path>, out: Option<&Path>) -> Result<(), Exit> {
    let f = validated(cli, path)?;
    let config = Config { budget: cli.budget, check: false };
    match destackify_all(&f, config) {
        Ok(o) => {
            if let Some(t) = trace {
                write_file(t, &io::trace_to_string(&o.trace))?;
            }
            if let Some(d) = dot {
                write_file(d, &dot_picture(&o.fan))?;
            }
            let text = io::fan_to_string(&o.fan);
            match out {
                Some(p) => write_file(p, &text)?,
                None => print!("{text}"),
            }
            eprintln!("{} steps, final hash {}", o.trace.steps.len(), fan_hash(&o.fan));
            Ok(())
        }
        Err(DestackError::BudgetExceeded { budget, trace: partial, .. }) => {
            if let Some(t) = trace {
                write_file(t, &io::trace_to_string(&partial))?;
            }
            Err(Exit(3, anyhow::anyhow!("step budget of {budget} exhausted after {} steps", partial.steps.len())))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_replay(cli: &Cli, fan: &Path, trace: &Path) -> Result<(), Exit> {
    let f = load_fan(fan)?;
    let t: StepTrace = io::parse_trace(&read(trace)?).with_context(|| format!("in {}", trace.display())).map_err(invalid)?;
    match replay(&f, &t) {
        Ok(g) => {
            let h = fan_hash(&g);
            if cli.json {
                print_json(&json!({ "verified": true, "steps": t.steps.len(), "finalHash": h }));
            } else {
                println!("verified {h}");
            }
            Ok(())
        }
        Err((i, msg)) => {
            if cli.json {
                print_json(&json!({ "verified": false, "step": i, "reason": msg }));
            } else {
                println!("mismatch at step {i}: {msg}");
            }
            Err(invalid(anyhow::anyhow!("replay failed at step {i}: {msg}")))
        }
    }
}

fn cmd_ordna(cli: &Cli, path: &Path, name: &str) -> Result<(), Exit> {
    let spec = load_group(path)?;
    let g = spec.build().map_err(invalid)?;
    let chi = g.character(&block(&spec, name)?).map_err(invalid)?;
    let d = decompose_dim_one(&g.whole(), &chi);
    if cli.json {
        let cons: Vec<Value> = d.constituents.iter().map(|(l, m)| json!({ "character": l.values().collect::<Vec<_>>(), "multiplicity": m })).collect();
        print_json(&json!({ "groupOrder": g.order(), "dim": chi.dim(), "ordNa": d.ord_na, "constituents": cons }));
    } else {
        println!("{}", d.ord_na);
    }
    Ok(())
}

fn cmd_abelianize(cli: &Cli, path: &Path, name: &str, max_levels: usize) -> Result<(), Exit> {
    let spec = load_group(path)?;
    let g = spec.build().map_err(invalid)?;
    let chi = g.character(&block(&spec, name)?).map_err(invalid)?;
    let h = g.whole();
    let start = decompose_dim_one(&h, &chi).ord_na;
    let levels = grouprep::abelianize_iterated(&h, &chi, max_levels).map_err(group_err)?;
    let mut out = Vec::new();
    for (k, level) in levels.iter().enumerate() {
        let mut strata = Vec::new();
        for step in level {
            for s in &step.strata {
                let (lines, family) = match s.lines {
                    LineCount::Finite(n) => (Some(n), None),
                    LineCount::Family(d) => (None, Some(d)),
                };
                strata.push(json!({
                    "kind": match s.kind { StratumKind::Exceptional => "exceptional", StratumKind::OffCenter => "offCenter" },
                    "gammaBarOrder": step.gamma_bar.order(),
                    "stabilizerOrder": s.stabilizer.order(),
                    "lines": lines,
                    "familyDim": family,
                    "ordNa": s.ord_na,
                    "record": s.record,
                }));
            }
        }
        let max = level.iter().map(|s| s.max_ord_na()).max().unwrap_or(0);
        out.push(json!({ "level": k + 1, "maxOrdNa": max, "strata": strata }));
    }
    if cli.json {
        print_json(&json!({ "ordNa": start, "levels": out }));
    } else {
        println!("level 0: ord^na {start}");
        for l in &out {
            println!("level {}: max ord^na {} over {} strata", l["level"], l["maxOrdNa"], l["strata"].as_array().map_or(0, |a| a.len()));
            for s in l["strata"].as_array().into_iter().flatten() {
                let count = match (&s["lines"], &s["familyDim"], s["kind"].as_str()) {
                    (Value::Number(n), _, _) => format!("{n} lines"),
                    (_, d, Some("offCenter")) => format!("fixed subspace of dim {d}"),
                    (_, d, _) => format!("family of dim {d}"),
                };
                println!("  {} |H|={} {} ord^na {}", s["kind"].as_str().unwrap_or(""), s["stabilizerOrder"], count, s["ordNa"]);
            }
        }
    }
    Ok(())
}

/// DOT picture of the coarse fan: rays as nodes, 2-cones as edges. Above
/// rank 3 a one-node summary is written instead.
fn dot_picture(f: &StackyFan) -> String {
    let mut s = String::from("graph fan {\n");
    if f.rank() > 3 {
        s.push_str(&format!(
            "  summary [shape=box, label=\"rank {}, {} rays, {} maximal cones\"];\n}}\n",
            f.rank(),
            f.rays().len(),
            f.maximal_cones().len()
        ));
        return s;
    }
    for i in f.used_rays() {
        let u = f.ray(i).primitive();
        let v: Vec<String> = u.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("  r{i} [label=\"({})\"];\n", v.join(",")));
    }
    for c in f.cones().iter().filter(|c| c.len() == 2) {
        s.push_str(&format!("  r{} -- r{};\n", c[0], c[1]));
    }
    s.push_str("}\n");
    s
}
