//! The `varkit` command line.
//!
//! Every command prints one JSON report on standard output,
//! `{"command": ..., "inputs_digest": ..., "result": ...}`, with keys in a
//! fixed order and no timing, so equal inputs give byte-identical output.
//! A short human summary and the elapsed time go to standard error.
//!
//! Exit codes: 0 for a positive answer (SAT, decomposition found, report
//! produced), 1 for a negative one (UNSAT, no decomposition), 2 for errors.

mod expr;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{
    congruence_lattice_with_cap, lattice_properties, section4_pipeline_with_cap, FiniteAlgebra, DEFAULT_CAP,
    DEFAULT_LATTICE_CAP,
};
use crate::conditions::{builtin, check_identities, IdentitySystem, PolymorphismSearch};
use crate::decomposition::{is_nth_power, nu_equivalences_with};
use crate::error::{Error, Result};
use crate::structures::Digraph;

pub use expr::{build, Built};

#[derive(Parser, Debug)]
#[command(name = "varkit", version, about = "Polymorphisms, decompositions and congruences of finite structures")]
struct Cli {
    /// Print only the JSON report (no summary on standard error).
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a digraph expression such as `pow(C,2)` or `union(loop,C)`.
    Build {
        expression: String,
        /// Write the digraph JSON here instead of embedding it in the report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "VARKIT_MAX_ELEMENTS", default_value_t = DEFAULT_CAP)]
        max_elements: usize,
    },
    /// Search for polymorphisms satisfying a condition.
    Check {
        /// Digraph JSON file, or a build expression.
        #[arg(long)]
        structure: String,
        /// Built-in condition name (olsak, majority, power_decomposition(2), ...) or a DSL file.
        #[arg(long)]
        condition: String,
        #[arg(long, env = "VARKIT_MAX_NODES")]
        max_nodes: Option<u64>,
        #[arg(long, env = "VARKIT_MAX_ELEMENTS", default_value_t = DEFAULT_CAP)]
        max_elements: usize,
        /// Re-check a witness against the identities and edge preservation.
        #[arg(long)]
        verify: bool,
    },
    /// Decide whether a digraph is an n-th power.
    Decompose {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        n: usize,
        #[arg(long, env = "VARKIT_MAX_ELEMENTS", default_value_t = DEFAULT_CAP)]
        max_elements: usize,
        /// Compare the fast equivalences with their existential definition.
        #[arg(long)]
        verify: bool,
    },
    /// Run the free-algebra construction on an algebra JSON file.
    Free {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, env = "VARKIT_MAX_ELEMENTS", default_value_t = DEFAULT_CAP)]
        max_elements: usize,
    },
    /// Compute the congruence lattice of an algebra JSON file.
    Con {
        #[arg(long)]
        algebra: PathBuf,
        /// Largest number of congruences collected.
        #[arg(long, default_value_t = DEFAULT_LATTICE_CAP)]
        limit: usize,
    },
}

struct Outcome {
    command: Value,
    digest: String,
    result: Value,
    summary: String,
    code: i32,
}

/// Length-prefixed parts fed to SHA-256.
#[derive(Default)]
struct InputDigest(Sha256);

impl InputDigest {
    fn part(mut self, label: &str, bytes: &[u8]) -> Self {
        for piece in [label.as_bytes(), bytes] {
            self.0.update((piece.len() as u64).to_le_bytes());
            self.0.update(piece);
        }
        self
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let started = Instant::now();
    match execute(cli.command) {
        Ok(outcome) => {
            let report = json!({
                "command": outcome.command,
                "inputs_digest": outcome.digest,
                "result": outcome.result,
            });
            let mut stdout = std::io::stdout().lock();
            if writeln!(stdout, "{report}").and_then(|()| stdout.flush()).is_err() {
                return 2;
            }
            if !cli.json {
                eprintln!("{}", outcome.summary);
                eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load_structure(arg: &str, cap: usize) -> Result<Digraph> {
    let path = Path::new(arg);
    if path.is_file() {
        return Digraph::from_json(&std::fs::read_to_string(path)?);
    }
    Ok(build(arg, Path::new("."), cap)?.digraph)
}

fn load_condition(arg: &str) -> Result<IdentitySystem> {
    let path = Path::new(arg);
    if path.is_file() {
        return IdentitySystem::parse(&std::fs::read_to_string(path)?);
    }
    builtin(arg)
}

fn load_algebra(path: &Path) -> Result<FiniteAlgebra> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read `{}`: {e}", path.display())))?;
    FiniteAlgebra::from_json(&text)
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("results serialize")
}

fn digraph_value(g: &Digraph) -> Value {
    serde_json::from_str(&g.to_json()).expect("digraph JSON parses")
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::Build { expression, out, max_elements } => cmd_build(&expression, out.as_deref(), max_elements),
        Command::Check { structure, condition, max_nodes, max_elements, verify } => {
            cmd_check(&structure, &condition, max_nodes, max_elements, verify)
        }
        Command::Decompose { structure, n, max_elements, verify } => cmd_decompose(&structure, n, max_elements, verify),
        Command::Free { algebra, max_elements } => cmd_free(&algebra, max_elements),
        Command::Con { algebra, limit } => cmd_con(&algebra, limit),
    }
}

fn cmd_build(expression: &str, out: Option<&Path>, cap: usize) -> Result<Outcome> {
    let built = build(expression, Path::new("."), cap)?;
    let g = &built.digraph;
    let mut digest = InputDigest::default().part("build", expression.as_bytes());
    for (path, file) in &built.files {
        digest = digest.part(path, file.to_json().as_bytes());
    }
    let components = g.components().len();
    let mut result = json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "components": components,
    });
    match out {
        Some(path) => {
            std::fs::write(path, g.to_json() + "\n")?;
            result["out"] = json!(path.display().to_string());
        }
        None => result["digraph"] = digraph_value(g),
    }
    Ok(Outcome {
        command: json!({"name": "build", "expression": expression}),
        digest: digest.finish(),
        result,
        summary: format!("vertices: {}, edges: {}, components: {components}", g.vertex_count(), g.edge_count()),
        code: 0,
    })
}

fn cmd_check(
    structure: &str,
    condition: &str,
    max_nodes: Option<u64>,
    cap: usize,
    verify: bool,
) -> Result<Outcome> {
    let g = load_structure(structure, cap)?;
    let system = load_condition(condition)?;
    let mut search = PolymorphismSearch::new(&g, &system);
    if let Some(limit) = max_nodes {
        search = search.node_limit(limit);
    }
    let outcome = search.run()?;
    let digest = InputDigest::default()
        .part("check", b"")
        .part("structure", g.to_json().as_bytes())
        .part("condition", system.to_string().as_bytes())
        .finish();
    let command = json!({"name": "check", "structure": structure, "condition": condition});
    match outcome.tables {
        Some(tables) => {
            let mut verified = Value::Null;
            if verify {
                let identities = check_identities(&tables, &system, g.vertex_count())?;
                let preserved = tables.values().map(|t| t.is_polymorphism(&g)).collect::<Result<Vec<_>>>()?;
                if !identities.holds() || preserved.contains(&false) {
                    return Err(Error::Invariant("the witness failed re-verification".into()));
                }
                verified = json!(true);
            }
            let witness: serde_json::Map<String, Value> = tables
                .iter()
                .map(|(name, t)| (name.clone(), json!({"arity": t.arity(), "table": t.values()})))
                .collect();
            let mut summary = format!("SAT after {} nodes", outcome.nodes);
            for (name, t) in &tables {
                if t.values().len() <= 32 {
                    summary.push_str(&format!("\n  {name}/{}: {:?}", t.arity(), t.values()));
                } else {
                    summary.push_str(&format!("\n  {name}/{}: {} entries", t.arity(), t.values().len()));
                }
            }
            Ok(Outcome {
                command,
                digest,
                result: json!({"status": "sat", "nodes": outcome.nodes, "witness": witness, "verified": verified}),
                summary,
                code: 0,
            })
        }
        None => Ok(Outcome {
            command,
            digest,
            result: json!({"status": "unsat", "nodes": outcome.nodes, "witness": "none"}),
            summary: format!("UNSAT: none (explored {} nodes)", outcome.nodes),
            code: 1,
        }),
    }
}

fn cmd_decompose(structure: &str, n: usize, cap: usize, verify: bool) -> Result<Outcome> {
    let g = load_structure(structure, cap)?;
    let digest = InputDigest::default()
        .part("decompose", n.to_string().as_bytes())
        .part("structure", g.to_json().as_bytes())
        .finish();
    let command = json!({"name": "decompose", "structure": structure, "n": n});
    let Some(witness) = is_nth_power(&g, n)? else {
        return Ok(Outcome {
            command,
            digest,
            result: json!({"status": "none", "n": n}),
            summary: format!("not a power with exponent {n}"),
            code: 1,
        });
    };
    if verify {
        nu_equivalences_with(&g, &witness.f, true)?;
    }
    let base = witness.base().expect("power witnesses carry a base");
    let blocks: Vec<Vec<Vec<usize>>> = witness.nus.iter().map(|p| p.blocks()).collect();
    Ok(Outcome {
        command,
        digest,
        result: json!({
            "status": "power",
            "n": n,
            "base": digraph_value(base),
            "isomorphism": witness.iso.image(),
            "equivalences": blocks,
        }),
        summary: format!(
            "power with exponent {n}: base has {} vertices and {} edges",
            base.vertex_count(),
            base.edge_count()
        ),
        code: 0,
    })
}

fn cmd_free(path: &Path, cap: usize) -> Result<Outcome> {
    let a = load_algebra(path)?;
    let r = section4_pipeline_with_cap(&a, cap)?;
    let digest = InputDigest::default().part("free", a.to_json().as_bytes()).finish();
    let components: Vec<Value> = r
        .components
        .iter()
        .map(|c| json!({"t": c.label_term, "size": c.vertices.len(), "homs": c.homs.len()}))
        .collect();
    let mut exponents = r.g_exponents.clone();
    exponents.sort_unstable();
    let mut summary = format!("free algebra on x, y, z: {} elements\n  t | |F_t| | |H_t|", r.free.len());
    for c in &r.components {
        summary.push_str(&format!("\n  {} | {} | {}", c.label_term, c.vertices.len(), c.homs.len()));
    }
    summary.push_str(&format!(
        "\n  kernel is a congruence: {}\n  unary separation per component: {}\n  [x], [y], [z] distinct: {}\n  exponents of G: {:?}",
        r.claims.kernel_is_congruence,
        r.claims.unary_separation.iter().all(|&b| b),
        r.claims.generators_separated,
        exponents
    ));
    Ok(Outcome {
        command: json!({"name": "free", "algebra": path.display().to_string()}),
        digest,
        result: json!({
            "free_size": r.free.len(),
            "components": components,
            "claims": to_value(&r.claims),
            "k_vertices": r.k.vertex_count(),
            "g_vertices": r.g.vertex_count(),
            "g_exponents": exponents,
        }),
        summary,
        code: 0,
    })
}

fn cmd_con(path: &Path, limit: usize) -> Result<Outcome> {
    let a = load_algebra(path)?;
    let lattice = congruence_lattice_with_cap(&a, limit)?;
    let props = lattice_properties(&lattice);
    let digest = InputDigest::default().part("con", a.to_json().as_bytes()).finish();
    let congruences: Vec<Vec<Vec<usize>>> = lattice.congruences().iter().map(|p| p.blocks()).collect();
    let shape = props.m_n.map_or("none".to_string(), |k| format!("M_{k}"));
    Ok(Outcome {
        command: json!({"name": "con", "algebra": path.display().to_string()}),
        digest,
        result: json!({
            "size": lattice.len(),
            "congruences": congruences,
            "hasse": lattice.hasse_edges(),
            "properties": to_value(&props),
        }),
        summary: format!(
            "|Con| = {}, shape {shape}, meet_sd = {}, join_sd = {}, distributive = {}",
            lattice.len(),
            props.meet_sd,
            props.join_sd,
            props.distributive
        ),
        code: 0,
    })
}
