//! `orc solve`: one JSON record and one SVG per viewport.
use std::path::{Path, PathBuf};
use std::time::Duration;

use orc_core::lang::{self, Diagnostic, Document};
use orc_core::{solve, SolutionView, SolveError, Viewport};
use serde::{Deserialize, Serialize};

use crate::svg::{render_svg, RenderTheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_TRUNCATED: i32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub viewport: Viewport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionView>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conflicts: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct SolveArgs {
    pub spec: PathBuf,
    pub viewports: Vec<Viewport>,
    pub json: Option<PathBuf>,
    pub svg_dir: Option<PathBuf>,
    pub timeout_ms: Option<u64>,
}

pub fn parse_viewport(s: &str) -> Result<Viewport, String> {
    let bad = || format!("expected WxH with positive sizes, got `{s}`");
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: f64 = w.trim().parse().map_err(|_| bad())?;
    let h: f64 = h.trim().parse().map_err(|_| bad())?;
    if w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0 {
        Ok(Viewport::new(w, h))
    } else {
        Err(bad())
    }
}

/// `path:line:col: message`, the offending line and a caret run.
pub fn render_diagnostic(path: &Path, src: &str, d: &Diagnostic) -> String {
    let mut out = format!("{}:{}:{}: {}", path.display(), d.span.line, d.span.column, d.message);
    if let Some(line) = src.lines().nth((d.span.line as usize).saturating_sub(1)) {
        let pad = " ".repeat((d.span.column as usize).saturating_sub(1));
        out.push_str(&format!("\n  {line}\n  {pad}{}", "^".repeat(d.span.len.max(1) as usize)));
    }
    out
}

/// Solves `doc` at one viewport; `None` keeps the document's window.
/// Lowering failures come back as diagnostics, infeasibility as conflicts.
pub fn solve_document(doc: &Document, viewport: Option<Viewport>, budget: Option<Duration>) -> Result<(Record, String), Diagnostic> {
    let lowered = lang::lower(doc, viewport).map_err(|e| e.diagnostic())?;
    let problem = &lowered.problem;
    match solve(problem, budget) {
        Ok(s) => {
            log::info!("{}x{}: weight {} in {:?}", problem.viewport.width, problem.viewport.height, s.satisfied_weight, s.solve_time);
            // The record omits timing so repeated runs are byte-identical.
            let view = SolutionView::new(problem, &s).untimed();
            let svg = render_svg(&view, problem, &RenderTheme::default());
            Ok((Record { viewport: problem.viewport, solution: Some(view), conflicts: Vec::new() }, svg))
        }
        Err(SolveError::HardInfeasible(labels)) => {
            Ok((Record { viewport: problem.viewport, solution: None, conflicts: labels }, String::new()))
        }
        Err(e) => Err(Diagnostic::new(e.to_string(), Default::default())),
    }
}

fn svg_name(spec: &Path, v: Viewport) -> String {
    let stem = spec.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "layout".into());
    format!("{stem}-{}x{}.svg", v.width, v.height)
}

pub fn cmd_solve(args: &SolveArgs) -> i32 {
    let path = &args.spec;
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_ERROR;
        }
    };
    let doc = match lang::parse(&src) {
        Ok(d) => d,
        Err(diags) => {
            for d in &diags {
                eprintln!("{}", render_diagnostic(path, &src, d));
            }
            return EXIT_ERROR;
        }
    };
    let budget = args.timeout_ms.map(Duration::from_millis);
    let targets: Vec<Option<Viewport>> =
        if args.viewports.is_empty() { vec![None] } else { args.viewports.iter().copied().map(Some).collect() };
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = targets.iter().map(|v| s.spawn(|| solve_document(&doc, *v, budget))).collect();
        handles.into_iter().map(|h| h.join().expect("solver thread")).collect()
    });

    let mut code = EXIT_OK;
    let mut records = Vec::new();
    for r in results {
        match r {
            Err(d) => {
                eprintln!("{}", render_diagnostic(path, &src, &d));
                return EXIT_ERROR;
            }
            Ok((rec, svg)) => {
                let v = rec.viewport;
                match &rec.solution {
                    None => {
                        eprintln!(
                            "{}: hard constraints conflict at {}x{}: {}",
                            path.display(),
                            v.width,
                            v.height,
                            rec.conflicts.join(", ")
                        );
                        code = EXIT_ERROR;
                    }
                    Some(sol) if !sol.optimal && code == EXIT_OK => code = EXIT_TRUNCATED,
                    Some(_) => {}
                }
                if let (Some(dir), Some(_)) = (&args.svg_dir, &rec.solution) {
                    let target = dir.join(svg_name(path, v));
                    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&target, svg)) {
                        eprintln!("error: cannot write {}: {e}", target.display());
                        return EXIT_ERROR;
                    }
                }
                records.push(rec);
            }
        }
    }
    let json = serde_json::to_string_pretty(&records).expect("records serialize") + "\n";
    match &args.json {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_ERROR;
            }
        }
        None => print!("{json}"),
    }
    code
}
