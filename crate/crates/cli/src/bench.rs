//! Editing benchmark on horizontal flows: fresh rebuild versus warm re-solve.
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use orc_core::lang::{self, Document};
use orc_core::{apply_edits, diff_batch, resolve_warm, solve, solve_with, EditBatch, LayoutProblem, Solution, SolveOptions, WarmStart};
use orc_service::Edit;

pub const HEADER: &str = "op,widgets,constraints,mean_ms_fresh,mean_ms_incremental,savings_pct";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Insert,
    Delete,
    Move,
    ResizeWidget,
    ResizeWindow,
}

impl Op {
    pub fn name(self) -> &'static str {
        match self {
            Op::Insert => "insert",
            Op::Delete => "delete",
            Op::Move => "move",
            Op::ResizeWidget => "resize_widget",
            Op::ResizeWindow => "resize_window",
        }
    }

    /// Rows whose incremental column is a full rebuild.
    pub fn rebuilds(self) -> bool {
        self == Op::ResizeWindow
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = String;

    /// `resize` alone means resizing a widget.
    fn from_str(s: &str) -> Result<Op, String> {
        Ok(match s.trim() {
            "insert" => Op::Insert,
            "delete" => Op::Delete,
            "move" => Op::Move,
            "resize" | "resize_widget" => Op::ResizeWidget,
            "resize_window" => Op::ResizeWindow,
            other => return Err(format!("unknown op `{other}`")),
        })
    }
}

/// Flow of `n` widgets sized by min/pref/max in a window about four widgets wide.
pub fn flow_document(n: usize) -> Document {
    let ids: Vec<String> = (1..=n).map(|i| format!("w{i}")).collect();
    let mut src = String::from("layout \"bench\" {\n  window { width: 200; height: 2000; }\n");
    for id in &ids {
        src += &format!("  widget {id} {{ min: 30x20; pref: 45x20; max: 60x20; }}\n");
    }
    src += &format!("  pattern hflow(items: [{}]);\n}}\n", ids.join(", "));
    lang::parse(&src).expect("bench spec parses")
}

pub fn edit_for(op: Op, n: usize) -> Edit {
    match op {
        Op::Insert => Edit::InsertWidget {
            id: format!("w{}", n + 1),
            min: Some([30.0, 20.0]),
            pref: Some([45.0, 20.0]),
            max: Some([60.0, 20.0]),
            priority: None,
            pattern: Some("pattern1.hflow".into()),
        },
        Op::Delete => Edit::DeleteWidget { id: format!("w{}", n.div_ceil(2)) },
        Op::Move => Edit::MoveWidget { id: "w2".into(), left: 0.0, top: 20.0 },
        Op::ResizeWidget => Edit::ResizeWidget { id: "w1".into(), width: 60.0, height: 20.0 },
        Op::ResizeWindow => Edit::SetViewport { width: 150.0, height: 2000.0 },
    }
}

/// A solved starting point and one edit, ready to time.
pub struct Workload {
    pub before: LayoutProblem,
    /// The previous solution and the conflicts its solve learned.
    pub warm: WarmStart,
    pub after: Document,
    pub batch: Option<EditBatch>,
}

impl Workload {
    pub fn new(op: Op, n: usize) -> Workload {
        let doc = flow_document(n);
        let before = lang::lower(&doc, None).expect("bench spec lowers").problem;
        let (solution, stats) = solve_with(&before, &SolveOptions::default()).expect("bench flow is feasible");
        let after = edit_for(op, n).apply(&doc).expect("bench edit applies");
        let target = lang::lower(&after, None).expect("edited spec lowers").problem;
        let batch = diff_batch(&before, &target);
        let exact = apply_edits(&before, &batch).is_ok_and(|p| p == target);
        let warm = WarmStart::from_solve(&solution, &stats);
        Workload { before, warm, after, batch: (exact && !op.rebuilds()).then_some(batch) }
    }

    /// Rebuilds the edited problem from the document and solves it cold.
    pub fn fresh(&self) -> Solution {
        let p = lang::lower(&self.after, None).expect("edited spec lowers").problem;
        solve(&p, None).expect("edited flow is feasible")
    }

    /// Applies the edit batch to the previous problem and re-solves warm.
    pub fn incremental(&self) -> Option<Solution> {
        self.incremental_on(self.before.clone(), self.warm.clone())
    }

    /// [`Workload::incremental`] on state the caller already owns, as an
    /// editor keeping its constraint system between edits would.
    pub fn incremental_on(&self, base: LayoutProblem, warm: WarmStart) -> Option<Solution> {
        let batch = self.batch.as_ref()?;
        Some(resolve_warm(base, warm, batch, None).expect("edited flow is feasible").1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub op: Op,
    pub widgets: usize,
    pub constraints: usize,
    pub mean_ms_fresh: f64,
    pub mean_ms_incremental: f64,
    pub savings_pct: f64,
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.4},{:.4},{:.2}",
            self.op, self.widgets, self.constraints, self.mean_ms_fresh, self.mean_ms_incremental, self.savings_pct
        )
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Mean times over `repeats` interleaved runs after one untimed warm-up.
/// `constraints` counts the labelled clauses of the edited problem.
pub fn measure(op: Op, n: usize, repeats: usize) -> Row {
    let w = Workload::new(op, n);
    let fresh = w.fresh();
    let constraints = lang::lower(&w.after, None).expect("edited spec lowers").problem.clauses.len();
    if let Some(inc) = w.incremental() {
        debug_assert_eq!(inc.satisfied_weight, fresh.satisfied_weight);
    }
    let (mut tf, mut ti) = (Duration::ZERO, Duration::ZERO);
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        w.fresh();
        let f = t.elapsed();
        tf += f;
        let (base, warm) = (w.before.clone(), w.warm.clone());
        let t = Instant::now();
        ti += if w.incremental_on(base, warm).is_some() { t.elapsed() } else { f };
    }
    let k = repeats.max(1) as f64;
    let (mean_ms_fresh, mean_ms_incremental) = (ms(tf) / k, ms(ti) / k);
    let savings_pct = if mean_ms_fresh > 0.0 { 100.0 * (mean_ms_fresh - mean_ms_incremental) / mean_ms_fresh } else { 0.0 };
    Row { op, widgets: n, constraints, mean_ms_fresh, mean_ms_incremental, savings_pct }
}

pub fn write_csv(rows: &[Row], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv())?;
    }
    Ok(())
}

pub fn cmd_bench(widgets: &[usize], ops: &[Op], repeats: usize, out: &std::path::Path) -> i32 {
    let mut rows = Vec::new();
    for &op in ops {
        for &n in widgets {
            let row = measure(op, n, repeats);
            if op.rebuilds() {
                eprintln!("note: {op} at {n} widgets is a full rebuild; incremental equals fresh");
            }
            log::info!("{}", row.csv());
            rows.push(row);
        }
    }
    let written = std::fs::File::create(out).and_then(|f| write_csv(&rows, std::io::BufWriter::new(f)));
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write {}: {e}", out.display());
            1
        }
    }
}
