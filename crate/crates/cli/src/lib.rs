//! Library side of the `orc` binary.
pub mod bench;
pub mod solve;
pub mod svg;

pub use bench::{cmd_bench, measure, Op, Row, Workload};
pub use solve::{cmd_solve, parse_viewport, solve_document, Record, SolveArgs};
pub use svg::{render_svg, RenderTheme};

/// `orc fmt`: print the canonical form, or rewrite the file with `write`.
pub fn cmd_fmt(path: &std::path::Path, write: bool) -> i32 {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return 1;
        }
    };
    let text = match orc_core::lang::format(&src) {
        Ok(t) => t,
        Err(diags) => {
            for d in &diags {
                eprintln!("{}", solve::render_diagnostic(path, &src, d));
            }
            return 1;
        }
    };
    if !write {
        print!("{text}");
    } else if text != src {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    0
}
