use std::fmt::Write;

use serde::{Deserialize, Serialize};
use stq_lru::appendix::ConsistencyReport;
use stq_lru::lattice::SimReport;
use stq_lru::lru::{LruKind, LruVerdict};
use stq_lru::search::SearchReport;

/// Result body of `verify`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyResult {
    pub file: String,
    pub target: LruKind,
    pub tol: f64,
    pub n_gates: usize,
    pub verdict: LruVerdict,
}

/// Any output document that `report` can render.
#[derive(Clone, Debug)]
pub enum Section {
    Verify(VerifyResult),
    Search(SearchReport),
    Simulate(SimReport),
}

impl Section {
    /// Decodes an output document by its manifest subcommand.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let sub = doc
            .pointer("/manifest/subcommand")
            .and_then(|s| s.as_str())
            .ok_or("missing manifest.subcommand")?
            .to_owned();
        let result = doc.get("result").cloned().ok_or("missing result")?;
        let err = |e: serde_json::Error| format!("{sub} result: {e}");
        match sub.as_str() {
            "verify" => serde_json::from_value(result).map(Section::Verify).map_err(err),
            "search" => serde_json::from_value(result).map(Section::Search).map_err(err),
            "simulate" => serde_json::from_value(result).map(Section::Simulate).map_err(err),
            other => Err(format!("cannot report on {other:?} output")),
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn render(sections: &[Section], appendix: Option<&ConsistencyReport>) -> String {
    let mut out = String::from("# LRU report\n");
    let verdicts: Vec<_> = sections.iter().filter_map(|s| match s { Section::Verify(v) => Some(v), _ => None }).collect();
    let searches: Vec<_> = sections.iter().filter_map(|s| match s { Section::Search(v) => Some(v), _ => None }).collect();
    let sims: Vec<_> = sections.iter().filter_map(|s| match s { Section::Simulate(v) => Some(v), _ => None }).collect();

    if !verdicts.is_empty() {
        out.push_str("\n## Verdicts\n\n| file | target | gates | pass | max residual | \\|α₁\\| | \\|β₁\\| | \\|α₂\\| | \\|β₂\\| |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for v in verdicts {
            let m = v.verdict.moduli();
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {:.6} | {:.6} | {:.6} | {:.6} |",
                v.file,
                v.target,
                v.n_gates,
                if v.verdict.pass { "yes" } else { "no" },
                sci(v.verdict.max_residual()),
                m[0],
                m[1],
                m[2],
                m[3]
            );
        }
    }

    if !searches.is_empty() {
        out.push_str("\n## Solutions\n");
        for s in searches {
            let _ = writeln!(
                out,
                "\n### {} → {} ({} steps, {} entangling, {} restarts, seed {})\n",
                s.template, s.target, s.n_steps, s.n_entangling, s.restarts, s.seed
            );
            if s.solutions.is_empty() {
                out.push_str("No solution below tolerance.\n");
                continue;
            }
            out.push_str("| # | cost | parameters |\n|---|---|---|\n");
            for (i, sol) in s.solutions.iter().enumerate() {
                let params: Vec<String> = sol.params.iter().map(|x| format!("{x:.15}")).collect();
                let _ = writeln!(out, "| {} | {} | {} |", i + 1, sci(sol.cost), params.join(", "));
            }
        }
    }

    if !sims.is_empty() {
        out.push_str("\n## Lattice\n\n| n | LRU | p | f | rounds | mean pre-LRU | std. error | analytic | z |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for r in sims {
            let z = r.z_score.map_or_else(|| "—".to_owned(), |z| format!("{z:.2}"));
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                r.params.n,
                r.params.lru_mode,
                r.params.p_leak,
                r.params.lru_failure,
                r.rounds,
                sci(r.pre_lru.mean),
                sci(r.pre_lru.std_error),
                sci(r.analytic),
                z
            );
        }
    }

    if let Some(a) = appendix {
        out.push_str("\n## Parameter-set sums\n\n| sets | component | sum | expected | residual |\n|---|---|---|---|---|\n");
        for c in &a.checks {
            let _ = writeln!(
                out,
                "| {}+{} | {} | {:.15} | {} | {} |",
                c.sets.0, c.sets.1, c.component, c.sum, c.expected, sci(c.residual)
            );
        }
        let _ = writeln!(out, "\n{} checks, max residual {}.", a.checks.len(), sci(a.max_residual));
    }
    out
}
