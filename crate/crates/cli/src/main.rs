mod manifest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use stq_lru::appendix::appendix_consistency;
use stq_lru::error::Error;
use stq_lru::exec::Execution;
use stq_lru::gates::{format_sequence, parse_sequence};
use stq_lru::lattice::{build_lattice, run, LatticeParams};
use stq_lru::lru::{assemble, verify, LruKind, DEFAULT_TOL};
use stq_lru::search::{search, SearchOptions, DEFAULT_SEARCH_TOL};
use stq_lru::templates::{library, template};

use manifest::{Output, RunManifest};
use report::{Section, VerifyResult};

#[derive(Parser)]
#[command(name = "stq-lru", version, about = "Leakage-reduction units for singlet-triplet qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a gate sequence file against an LRU truth table.
    Verify {
        file: PathBuf,
        #[arg(long)]
        target: LruKind,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search a template for LRU parameter sets.
    Search {
        #[arg(long)]
        template: String,
        /// Defaults to the template id prefix.
        #[arg(long)]
        target: Option<LruKind>,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SEARCH_TOL)]
        tol: f64,
        /// Run restarts on one thread.
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the surface-code leakage simulation from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render Markdown tables from earlier outputs.
    Report {
        inputs: Vec<PathBuf>,
        /// Include the parameter-set sum checks.
        #[arg(long)]
        appendix: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the template library.
    Templates,
}

/// Exit status classes.
#[derive(Debug)]
enum Failure {
    /// No solution or failed verdict.
    Domain,
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotUnitary(_) | Error::NotHermitian(_) | Error::NotNormalized(_) => Failure::Internal(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("tolerance must be positive, got {tol}")))
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Prints the document and mirrors it into `out`.
fn emit<T: Serialize>(doc: &Output<T>, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).map_err(|e| Failure::Internal(e.to_string()))? + "\n";
    print!("{text}");
    if let Some(dir) = out {
        write_file(dir, &format!("{}.json", doc.manifest.subcommand), &text)?;
    }
    Ok(())
}

fn infer_target(id: &str) -> Option<LruKind> {
    id.split('-').next()?.parse().ok()
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Verify { file, target, tol, out } => {
            check_tol(tol)?;
            let bytes = read_input(&file)?;
            let text = String::from_utf8(bytes.clone()).map_err(|e| Failure::Input(e.to_string()))?;
            let gates = parse_sequence(&text)?;
            let verdict = verify(&assemble(&gates), target, tol)?;
            let pass = verdict.pass;
            let manifest =
                RunManifest::new("verify", json!({ "target": target, "tol": tol }), None).with_input(&file, &bytes);
            let result = VerifyResult { file: file.display().to_string(), target, tol, n_gates: gates.len(), verdict };
            emit(&Output { manifest, result }, out.as_deref())?;
            if pass { Ok(()) } else { Err(Failure::Domain) }
        }
        Command::Search { template: id, target, restarts, seed, tol, sequential, out } => {
            check_tol(tol)?;
            let t = template(&id)?;
            let target = target
                .or_else(|| infer_target(&id))
                .ok_or_else(|| Failure::Input(format!("cannot infer target from {id:?}; pass --target")))?;
            let execution = if sequential { Execution::Sequential } else { Execution::Parallel };
            let opts = SearchOptions { restarts, seed, tol, execution, ..Default::default() };
            let result = search(&t, target, &opts)?;
            let config = json!({ "template": id, "target": target, "restarts": restarts, "tol": tol });
            let manifest = RunManifest::new("search", config, Some(seed));
            if let Some(dir) = out.as_deref() {
                for (i, sol) in result.solutions.iter().enumerate() {
                    let body = format_sequence(&sol.sequence(&t)?);
                    let header = format!("# {} -> {}, solution {}, cost {:e}\n", t.id, target, i + 1, sol.cost);
                    write_file(dir, &format!("solution-{}.seq", i + 1), &(header + &body))?;
                }
            }
            let found = !result.solutions.is_empty();
            emit(&Output { manifest, result }, out.as_deref())?;
            if found { Ok(()) } else { Err(Failure::Domain) }
        }
        Command::Simulate { config, out } => {
            let bytes = read_input(&config)?;
            let params: LatticeParams =
                serde_json::from_slice(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", config.display())))?;
            let cfg = build_lattice(params.clone())?;
            let result = run(&cfg);
            let manifest = RunManifest::new(
                "simulate",
                serde_json::to_value(&params).map_err(|e| Failure::Internal(e.to_string()))?,
                Some(params.seed),
            )
            .with_input(&config, &bytes);
            if let Some(dir) = out.as_deref() {
                write_file(dir, "series.csv", &result.to_csv())?;
            }
            emit(&Output { manifest, result }, out.as_deref())
        }
        Command::Report { inputs, appendix, out } => {
            if inputs.is_empty() && !appendix {
                return Err(Failure::Input("report needs at least one input or --appendix".into()));
            }
            let mut manifest = RunManifest::new("report", json!({ "appendix": appendix }), None);
            let mut sections = Vec::new();
            for path in &inputs {
                let bytes = read_input(path)?;
                let text = String::from_utf8_lossy(&bytes);
                sections.push(Section::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?);
                manifest = manifest.with_input(path, &bytes);
            }
            let consistency = appendix.then(appendix_consistency);
            let markdown = report::render(&sections, consistency.as_ref());
            if let Some(dir) = out.as_deref() {
                write_file(dir, "report.md", &markdown)?;
            }
            emit(&Output { manifest, result: json!({ "markdown": markdown }) }, out.as_deref())
        }
        Command::Templates => {
            let rows: Vec<_> = library()
                .iter()
                .map(|t| {
                    json!({
                        "id": t.id,
                        "description": t.description,
                        "gates": t.n_gates(),
                        "steps": t.n_steps(),
                        "entangling": t.n_entangling(),
                        "free_params": t.n_free(),
                        "gradient_allowed": t.gradient_allowed,
                    })
                })
                .collect();
            emit(&Output { manifest: RunManifest::new("templates", json!({}), None), result: rows }, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Domain => {}
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Internal(m) => eprintln!("internal error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_inferred_from_prefix() {
        assert_eq!(infer_target("sil-5"), Some(LruKind::Sil));
        assert_eq!(infer_target("sinl-9"), Some(LruKind::Sinl));
        assert_eq!(infer_target("custom"), None);
    }

    #[test]
    fn unitarity_errors_are_internal() {
        assert_eq!(Failure::from(Error::NotUnitary(1.0)).code(), 3);
        assert_eq!(Failure::from(Error::InvalidTemplate("x".into())).code(), 2);
    }
}
