use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orc_cli::{cmd_bench, cmd_fmt, cmd_solve, parse_viewport, Op, SolveArgs};
use orc_core::Viewport;

#[derive(Parser)]
#[command(name = "orc", version, about = "Constraint layouts with OR-constraints")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a layout at one or more viewport sizes.
    Solve {
        spec: PathBuf,
        /// Viewport as WxH; repeatable. Defaults to the spec's window.
        #[arg(long = "viewport", value_parser = parse_viewport)]
        viewports: Vec<Viewport>,
        /// JSON output file; stdout when absent.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long = "svg-dir")]
        svg_dir: Option<PathBuf>,
        #[arg(long = "timeout-ms")]
        timeout_ms: Option<u64>,
    },
    /// Time fresh and incremental solves of flow edits.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,30")]
        widgets: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "insert,delete,move,resize")]
        ops: Vec<Op>,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        repeats: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long)]
        port: u16,
        /// Sessions are restored from and snapshotted to this directory.
        #[arg(long = "snapshot-dir")]
        snapshot_dir: Option<PathBuf>,
    },
    /// Print a spec in canonical form.
    Fmt {
        spec: PathBuf,
        #[arg(long)]
        write: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ORC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Exit 2 is reserved for truncated solves.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = match cli.cmd {
        Cmd::Solve { spec, viewports, json, svg_dir, timeout_ms } => {
            cmd_solve(&SolveArgs { spec, viewports, json, svg_dir, timeout_ms })
        }
        Cmd::Bench { widgets, ops, repeats, out } => cmd_bench(&widgets, &ops, repeats as usize, &out),
        Cmd::Serve { port, snapshot_dir } => serve(port, snapshot_dir),
        Cmd::Fmt { spec, write } => cmd_fmt(&spec, write),
    };
    ExitCode::from(code as u8)
}

fn serve(port: u16, snapshot_dir: Option<PathBuf>) -> i32 {
    let config = orc_service::Config { snapshot_dir, ..Default::default() };
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return 1;
        }
    };
    match rt.block_on(orc_service::serve(port, config)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: serve on port {port}: {e}");
            1
        }
    }
}
