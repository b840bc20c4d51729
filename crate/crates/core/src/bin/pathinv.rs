//! Command-line front end for the path-structure invariant library.
//!
//! All computation lives in the library; this binary only parses arguments,
//! merges them over an optional TOML config file, and prints the report.

use clap::{Args, Parser, Subcommand};
use pathinv::app::{self, AppError, CmdOutput};
use pathinv::config::{ConfigBuilder, ReportFormat, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pathinv", version, about = "Cartan-connection curvature invariants for path structures on 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct StructureArgs {
    /// TOML config file with a [structure] table; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Structure kind: ode-torus | tight-torus | su2 | heisenberg | p-chart
    #[arg(long)]
    kind: Option<String>,
    /// Structure function F(x, y, alpha) as an expression
    #[arg(long)]
    expr: Option<String>,
    /// Structure function as a CSV sample grid (x,y,alpha,value)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Grid as NXxNYxNA (default from PATHINV_GRID or 64x64x128)
    #[arg(long)]
    grid: Option<String>,
    /// Tight-torus winding number
    #[arg(long)]
    n: Option<i32>,
    /// Tight-torus matrix entries (a f - b c = 1)
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long, value_name = "C")]
    c_entry: Option<f64>,
    #[arg(long)]
    f: Option<f64>,
    /// SU(2) frame parameters (r1 s2 - r2 s1 = 1)
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r2: Option<f64>,
    #[arg(long)]
    s1: Option<f64>,
    #[arg(long)]
    s2: Option<f64>,
    /// Flatness tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Treat a failed wrap-around periodicity check as an error
    #[arg(long)]
    strict_periodic: bool,
    /// Report output path (stdout otherwise)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Report format: json | csv
    #[arg(long)]
    format: Option<String>,
    /// p-chart box bounds
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Global invariant mu (closed-form route; --cross-check adds the
    /// transgression route)
    Mu {
        #[command(flatten)]
        structure: StructureArgs,
        /// Also compute mu by the transgression of the assembled connection
        #[arg(long)]
        cross_check: bool,
    },
    /// Curvature field dumps (Q1, Q2, S, C, D, tau21) and a norm summary
    Curvature {
        #[command(flatten)]
        structure: StructureArgs,
        /// Directory for the CSV dumps
        #[arg(long, default_value = "curvature-fields")]
        out_dir: PathBuf,
    },
    /// Flatness verdict; exit 0 flat, 1 non-flat
    FlatCheck {
        #[command(flatten)]
        structure: StructureArgs,
    },
    /// Closed-form family report (tight-torus | su2 | heisenberg)
    Family {
        #[command(flatten)]
        structure: StructureArgs,
    },
    /// Convert a torus structure to the slope chart and report Q1/Q2 there
    ConvertChart {
        #[command(flatten)]
        structure: StructureArgs,
        /// Write sampled G(x, y, p) as CSV
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Run the oracle and dual-route self-test suite
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        size: usize,
    },
}

fn build_config(args: &StructureArgs, cross_check: bool) -> Result<RunConfig, AppError> {
    let mut builder = match &args.config {
        Some(path) => ConfigBuilder::from_file(path)?,
        None => ConfigBuilder::default(),
    };
    // flags win over the file
    if args.kind.is_some() {
        builder.kind = args.kind.clone();
    }
    if args.expr.is_some() {
        builder.expr = args.expr.clone();
    }
    if args.csv.is_some() {
        builder.csv_input = args.csv.clone();
    }
    if args.grid.is_some() {
        builder.grid = args.grid.clone();
    }
    if args.n.is_some() {
        builder.tight.n = args.n;
    }
    if args.a.is_some() {
        builder.tight.a = args.a;
    }
    if args.b.is_some() {
        builder.tight.b = args.b;
    }
    if args.c_entry.is_some() {
        builder.tight.c = args.c_entry;
    }
    if args.f.is_some() {
        builder.tight.f = args.f;
    }
    if args.r1.is_some() {
        builder.su2.r1 = args.r1;
    }
    if args.r2.is_some() {
        builder.su2.r2 = args.r2;
    }
    if args.s1.is_some() {
        builder.su2.s1 = args.s1;
    }
    if args.s2.is_some() {
        builder.su2.s2 = args.s2;
    }
    if args.tolerance.is_some() {
        builder.flat_tolerance = args.tolerance;
    }
    if args.strict_periodic {
        builder.strict_periodic = Some(true);
    }
    if cross_check {
        builder.cross_check = Some(true);
    }
    if args.output.is_some() {
        builder.output = args.output.clone();
    }
    if args.format.is_some() {
        builder.format = args.format.clone();
    }
    if args.p_min.is_some() {
        builder.p_min = args.p_min;
    }
    if args.p_max.is_some() {
        builder.p_max = args.p_max;
    }
    Ok(builder.build()?)
}

fn emit_and_exit(cfg: Option<&RunConfig>, out: CmdOutput) -> ExitCode {
    let (path, format) = match cfg {
        Some(c) => (c.output.clone(), c.format),
        None => (None, ReportFormat::Json),
    };
    match app::emit(path.as_deref(), format, &out) {
        Ok(text) => {
            print!("{text}");
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<(Option<RunConfig>, CmdOutput), AppError> {
        match &cli.command {
            Command::Mu { structure, cross_check } => {
                let cfg = build_config(structure, *cross_check)?;
                let out = app::cmd_mu(&cfg)?;
                Ok((Some(cfg), out))
            }
            Command::Curvature { structure, out_dir } => {
                let cfg = build_config(structure, false)?;
                let out = app::cmd_curvature(&cfg, out_dir)?;
                Ok((Some(cfg), out))
            }
            Command::FlatCheck { structure } => {
                let cfg = build_config(structure, false)?;
                let out = app::cmd_flat_check(&cfg)?;
                Ok((Some(cfg), out))
            }
            Command::Family { structure } => {
                let cfg = build_config(structure, false)?;
                let out = app::cmd_family(&cfg)?;
                Ok((Some(cfg), out))
            }
            Command::ConvertChart { structure, csv_out } => {
                let cfg = build_config(structure, false)?;
                let out = app::cmd_convert_chart(&cfg, csv_out.as_deref())?;
                Ok((Some(cfg), out))
            }
            Command::Selftest { seed, size } => Ok((None, app::cmd_selftest(*seed, *size))),
        }
    };
    match run() {
        Ok((cfg, out)) => emit_and_exit(cfg.as_ref(), out),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
