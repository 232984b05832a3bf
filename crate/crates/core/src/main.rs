use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use charsum::experiment::verify::{CALIBRATED_CAPS, ORTHOGONALITY_TOL, RATIO_CAP};
use charsum::experiment::{emit, run, verify, ExperimentConfig, Format, ReportRow, RunOptions};

#[derive(Parser)]
#[command(name = "charsum", version, about = "Exact multilinear character sums over small prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Record wall time per row (makes output non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the built-in corpus and report every exact check.
    Verify,
    /// Evaluate the single instance described by a config file.
    Run { config: PathBuf },
    /// Evaluate the config's sweep grid.
    Sweep { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn write_out(path: Option<&PathBuf>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn report_failures(rows: &[ReportRow]) -> bool {
    let mut any = false;
    for r in rows {
        for c in r.failed_checks() {
            any = true;
            eprintln!(
                "violation: p={} k={} seed={} {} nu={} A={} B={} C={} D={}: {} ({})",
                r.p, r.k, r.seed, r.variant, r.nu, r.A, r.B, r.C, r.D, c.name, c.detail
            );
        }
    }
    any
}

fn run_config(cli: &Cli, path: &PathBuf, sweeping: bool, opts: RunOptions) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    let cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    if sweeping && cfg.sweep.is_none() {
        return fail(format!("{}: no \"sweep\" section", path.display()));
    }
    let rows = match run(&cfg, sweeping, opts) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let format = cli.format.map(Format::from).or(cfg.format).unwrap_or_default();
    let Some(bytes) = emit(&rows, format) else {
        return fail("no rows produced");
    };
    if let Err(e) = write_out(cli.output.as_ref(), &bytes) {
        return fail(e);
    }
    if report_failures(&rows) {
        ExitCode::from(EXIT_VIOLATION)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_verify(cli: &Cli, opts: RunOptions) -> ExitCode {
    let rep = match verify(opts) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Some(path) = &cli.output {
        let format = cli.format.map(Format::from).unwrap_or_default();
        if let Some(bytes) = emit(&rep.rows, format) {
            if let Err(e) = fs::write(path, bytes) {
                return fail(e);
            }
        }
    }
    report_failures(&rep.rows);
    let failed = rep.failed_rows().count();
    let r = rep.ratios;
    let c = rep.counting;
    println!("rows: {} ({failed} with violations)", rep.rows.len());
    println!(
        "profile totals: {} systems, {} mismatches; incidence oracle: {} checked, {} mismatches",
        c.systems, c.total_mismatches, c.oracle_checked, c.oracle_mismatches
    );
    println!(
        "orthogonality: max error {:.3e} (tolerance {ORTHOGONALITY_TOL:e})",
        rep.orthogonality_error
    );
    println!(
        "ratio maxima: |S|/thm11 {:.4}, I/incidence {:.4}, J/incidence {:.4}, moment(nu=2)/bound {:.4} (cap {RATIO_CAP})",
        r.sum_over_thm11, r.i_over_incidence, r.j_over_incidence, r.moment_nu2
    );
    println!("within calibrated caps: {}", r.within_caps(&CALIBRATED_CAPS));
    if rep.exact_ok() {
        println!("verdict: all exact checks passed");
        ExitCode::SUCCESS
    } else {
        println!("verdict: exact check violations");
        ExitCode::from(EXIT_VIOLATION)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        threads: cli.threads,
        timings: cli.timings,
    };
    match &cli.command {
        Command::Verify => run_verify(&cli, opts),
        Command::Run { config } => run_config(&cli, config, false, opts),
        Command::Sweep { config } => run_config(&cli, config, true, opts),
    }
}
