use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use iterlogic::automata::Dfa;
use iterlogic::bounds::bound_set;
use iterlogic::demos::{demo_binary_tree, demo_free_product, Monoid};
use iterlogic::ef::{demo_trees, ef_equiv, EfError};
use iterlogic::evaluator::{eval, expand_with_sets, EvalError};
use iterlogic::formulas::{parse_sentence, Regime};
use iterlogic::oracle::{oracle_eval_with, OracleConfig};
use iterlogic::structures::{FiniteStructure, Signature};
use iterlogic::translator::{translate, AutomatonContext, BoundPolicy, OverrideBounds, TranslateError};

#[derive(Parser)]
#[command(name = "iterlogic", version, about = "Reduce logics on tree-like iterations to their finite base")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a sentence and print its canonical form.
    Check {
        formula: PathBuf,
    },
    /// Compile an iteration sentence into a weak-MSO base formula.
    Translate {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        ctx: Option<PathBuf>,
        #[arg(long = "override-bounds")]
        override_bounds: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a base-side sentence on a finite structure.
    EvalBase {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: PathBuf,
        /// JSON object from set names to element lists.
        #[arg(long)]
        sets: Option<PathBuf>,
    },
    /// Bounded evaluation of an iteration sentence.
    Oracle {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        b: usize,
        #[arg(long, default_value_t = 1)]
        c: usize,
        /// Free set variable given by an automaton, as NAME=automaton.json.
        #[arg(long = "automaton", value_parser = parse_binding)]
        automata: Vec<(String, PathBuf)>,
    },
    /// Rank-m equivalence of two structures.
    Ef(EfCommand),
    /// The bound numbers for one set quantifier.
    Bounds {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
        /// Ambient state counts.
        #[arg(long, value_delimiter = ',')]
        states: Vec<usize>,
        /// Base structure supplying the signature (default: no relations).
        #[arg(long)]
        structure: Option<PathBuf>,
    },
    /// Binary-tree corpus through translation and the oracle.
    DemoTree,
    /// Cayley graph of a free product, checked against normal forms.
    DemoFreeProduct {
        /// Monoid JSON files; defaults to Z/2 * Z/2.
        monoids: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        member_len: usize,
        #[arg(long, default_value_t = 4)]
        edge_len: usize,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct EfCommand {
    #[command(subcommand)]
    demo: Option<EfDemo>,
    #[arg(long)]
    a: Option<PathBuf>,
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value = "fo")]
    regime: Regime,
}

#[derive(Subcommand)]
enum EfDemo {
    /// Truncated T_ω against truncated a^{≤1}T_ω under weak MSO.
    DemoTrees {
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
}

fn parse_binding(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected NAME=FILE")?;
    Ok((name.to_string(), PathBuf::from(path)))
}

/// A failure with its exit code.
struct Failure(u8, String);

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure(2, e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn verdict(b: bool) -> u8 {
    if b {
        0
    } else {
        1
    }
}

fn eval_failure(e: EvalError) -> Failure {
    match e {
        EvalError::Resource(_) => Failure(3, e.to_string()),
        _ => usage(e),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check { formula } => {
            let s = parse_sentence(&read(&formula)?).map_err(usage)?;
            println!("{s}");
            Ok(0)
        }
        Command::Translate {
            structure,
            formula,
            ctx,
            override_bounds,
            out,
        } => {
            let base = FiniteStructure::base_from_json(&read(&structure)?).map_err(usage)?;
            let s = parse_sentence(&read(&formula)?).map_err(usage)?;
            let ctx = match ctx {
                Some(p) => AutomatonContext::from_json(&read(&p)?).map_err(usage)?,
                None => AutomatonContext::new(),
            };
            let policy = match override_bounds {
                Some(p) => BoundPolicy::Override(OverrideBounds::from_json(&read(&p)?).map_err(usage)?),
                None => BoundPolicy::paper(),
            };
            let t = match translate(&s, &ctx, &policy, base.signature()) {
                Ok(t) => t,
                Err(TranslateError::TooLarge { reason, bounds }) => {
                    let mut msg = format!("refusing to emit: {reason}");
                    if let Some(b) = bounds {
                        msg.push('\n');
                        msg.push_str(&serde_json::to_string_pretty(&b).expect("bounds serialize"));
                    }
                    return Err(Failure(3, msg));
                }
                Err(e) => return Err(usage(e)),
            };
            let text = t.render();
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| Failure(4, e.to_string()))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::EvalBase { structure, formula, sets } => {
            let base = FiniteStructure::base_from_json(&read(&structure)?).map_err(usage)?;
            let s = parse_sentence(&read(&formula)?).map_err(usage)?;
            let expanded = match sets {
                Some(p) => {
                    let named: BTreeMap<String, BTreeSet<usize>> =
                        serde_json::from_str(&read(&p)?).map_err(|e| usage(format!("sets: {e}")))?;
                    expand_with_sets(&base, &named).map_err(usage)?
                }
                None => base,
            };
            let v = eval(&expanded, &s.formula, s.regime).map_err(eval_failure)?;
            println!("{v}");
            Ok(verdict(v))
        }
        Command::Oracle {
            structure,
            formula,
            d,
            b,
            c,
            automata,
        } => {
            let base = FiniteStructure::base_from_json(&read(&structure)?).map_err(usage)?;
            let s = parse_sentence(&read(&formula)?).map_err(usage)?;
            let mut loaded = Vec::new();
            for (name, path) in &automata {
                loaded.push((name.as_str(), Dfa::from_json(&read(path)?).map_err(usage)?));
            }
            let given: Vec<(&str, &Dfa)> = loaded.iter().map(|(n, d)| (*n, d)).collect();
            let out = oracle_eval_with(&base, &s.formula, &OracleConfig::new(s.regime, d, b, c), &given).map_err(usage)?;
            println!("{}", serde_json::to_string_pretty(&out.to_json()).expect("json"));
            Ok(verdict(out.verdict))
        }
        Command::Ef(EfCommand { demo, a, b, m, regime }) => {
            let ef_failure = |e: EfError| match e {
                EfError::TooLarge(_) | EfError::TooExpensive { .. } => Failure(3, e.to_string()),
                _ => usage(e),
            };
            if let Some(EfDemo::DemoTrees { depth, width, m }) = demo {
                if depth == 0 || width == 0 {
                    return Err(usage("depth and width must be at least 1"));
                }
                let r = demo_trees(depth, width, m).map_err(ef_failure)?;
                println!("{}", serde_json::to_string_pretty(&r).expect("json"));
                return Ok(0);
            }
            let (Some(a), Some(b)) = (a, b) else {
                return Err(usage("ef needs --a and --b"));
            };
            let a = FiniteStructure::from_json(&read(&a)?).map_err(usage)?;
            let b = FiniteStructure::from_json(&read(&b)?).map_err(usage)?;
            let v = ef_equiv(&a, &b, m, regime).map_err(ef_failure)?;
            println!("{v}");
            Ok(verdict(v))
        }
        Command::Bounds { l, m, states, structure } => {
            let sig = match structure {
                Some(p) => FiniteStructure::base_from_json(&read(&p)?).map_err(usage)?.signature().clone(),
                None => Signature::base(Vec::<(String, usize)>::new()).map_err(usage)?,
            };
            let b = bound_set(&sig, &states, l, m);
            println!("{}", serde_json::to_string_pretty(&b).expect("json"));
            Ok(0)
        }
        Command::DemoTree => {
            let rows = demo_binary_tree().map_err(|e| Failure(4, e.to_string()))?;
            println!("{:<8} {:<8} {:<8} {:<9} sentence", "expect", "transl", "oracle", "bound_hit");
            for r in &rows {
                println!("{:<8} {:<8} {:<8} {:<9} {}", r.expected, r.translated, r.oracle, r.bound_hit, r.sentence);
            }
            let ok = rows.iter().all(|r| r.agrees());
            println!("{}", if ok { "all agree" } else { "DISAGREEMENT" });
            Ok(verdict(ok))
        }
        Command::DemoFreeProduct {
            monoids,
            member_len,
            edge_len,
        } => {
            let ms = if monoids.is_empty() {
                vec![Monoid::cyclic(2, "a"), Monoid::cyclic(2, "b")]
            } else {
                monoids
                    .iter()
                    .map(|p| Monoid::from_json(&read(p)?).map_err(usage))
                    .collect::<Result<_, _>>()?
            };
            let r = demo_free_product(&ms, member_len, edge_len).map_err(|e| Failure(4, e.to_string()))?;
            println!("{}", serde_json::to_string_pretty(&json!(r)).expect("json"));
            Ok(verdict(r.ok()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
