use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtm_core::measure::{improvement_summary, SweepTable, Variant};
use mtm_sim::error::{Result, SimError};
use mtm_sim::harness::ConnectivityRow;
use mtm_sim::{run_connectivity, run_single, run_sweep, table, trace, Config};

/// Cross-layer channel and power scheduling simulator.
///
/// Results go to stdout or files; diagnostics go to stderr, with verbosity
/// taken from RUST_LOG (default `warn`).
#[derive(Debug, Parser)]
#[command(name = "mtm-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (load, variant, seed) of the config, write the CSV and print the gain summary.
    Sweep(Common),
    /// Schedule one seed and print total MTM, rounds and the termination rule.
    Run {
        #[command(flatten)]
        common: Common,
        /// Variant to schedule.
        #[arg(long, default_value = "with_mtm", value_parser = parse_variant)]
        variant: Variant,
        /// Write the round-by-round trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Boolean-disc connectivity over the configured radius sweep.
    Connectivity(Common),
    /// Gain summary of an existing sweep CSV.
    Summarize {
        #[command(flatten)]
        common: Common,
        /// CSV to summarize; defaults to --output, then to the config's sweep output.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_parser = existing_file)]
    config: PathBuf,
    /// Replace the configured seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn existing_file(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("expected with_mtm or without_mtm, got {s:?}"))
}

fn load_config(common: &Common) -> Result<Config> {
    let mut config = Config::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.sweep.seeds = vec![seed];
    }
    Ok(config)
}

fn print_summary(table: &SweepTable) -> Result<()> {
    let s = improvement_summary(table)?;
    let mut out = std::io::stdout().lock();
    let w = |out: &mut std::io::StdoutLock, line: String| {
        writeln!(out, "{line}").map_err(|e| SimError::io("<stdout>", e))
    };
    for c in &s.per_load {
        w(
            &mut out,
            format!(
                "load={:.6} traffic_with={:.6} traffic_without={:.6} traffic_gain={:.2}% \
                 hops_with={:.6} hops_without={:.6} hops_gain={:.2}%",
                c.load,
                c.with_mtm.traffic,
                c.without_mtm.traffic,
                c.traffic_gain,
                c.with_mtm.hops,
                c.without_mtm.hops,
                c.hops_gain
            ),
        )?;
    }
    w(&mut out, format!("max_traffic_gain_percent={:.2}%", s.max_traffic_gain_percent))?;
    w(&mut out, format!("max_hops_gain_percent={:.2}%", s.max_hops_gain_percent))?;
    w(&mut out, format!("argmax_load={:.6}", s.argmax_load))
}

fn sweep(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let output = common.output.clone().unwrap_or_else(|| config.sweep.output.clone());
    let result = run_sweep(&config)?;
    table::emit_csv(&result.table, &output)?;
    log::info!("wrote {} rows to {}", result.table.rows.len(), output.display());
    if let Some(dir) = &config.sweep.trace_dir {
        for t in &result.traces {
            trace::emit_trace(
                &trace::trace_path(dir, t.variant, t.seed),
                t.variant,
                t.seed,
                &t.trace,
                t.outcome,
            )?;
        }
    }
    if config.variants()?.len() == Variant::ALL.len() {
        print_summary(&result.table)?;
    }
    Ok(())
}

fn run(common: &Common, variant: Variant, trace_file: Option<&Path>) -> Result<()> {
    let config = load_config(common)?;
    let seed = config.sweep.seeds[0];
    let out = run_single(&config, seed, variant)?;
    if let Some(path) = trace_file {
        trace::emit_trace(path, variant, seed, &out.evaluation.trace, out.outcome)?;
    }
    if let Some(path) = &common.output {
        table::emit_csv(&SweepTable { rows: out.evaluation.rows.clone() }, path)?;
    }
    println!(
        "variant={} seed={} termination={} rounds={} total_mtm={:.6}",
        variant.as_str(),
        seed,
        out.outcome.as_str(),
        out.rounds,
        out.total_mtm
    );
    if out.outcome == mtm_core::measure::Outcome::Diverged {
        return Err(SimError::Core(mtm_core::Error::Protocol(format!(
            "schedule did not terminate within {} rounds",
            config.scheduler.max_rounds
        ))));
    }
    Ok(())
}

fn write_connectivity<W: Write>(rows: &[ConnectivityRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["radius", "seed", "component_count", "connected", "giant_fraction"])?;
    for r in rows {
        w.write_record([
            format!("{:.6}", r.radius),
            r.seed.to_string(),
            r.component_count.to_string(),
            r.connected.to_string(),
            format!("{:.6}", r.giant_fraction),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn connectivity(common: &Common) -> Result<()> {
    let config = load_config(common)?;
    let rows = run_connectivity(&config)?;
    let (result, name) = match &common.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
            (write_connectivity(&rows, std::io::BufWriter::new(file)), path.clone())
        }
        None => (write_connectivity(&rows, std::io::stdout().lock()), "<stdout>".into()),
    };
    result.map_err(|e| SimError::Parse {
        path: name,
        message: e.to_string(),
    })
}

fn summarize(common: &Common, input: Option<&Path>) -> Result<()> {
    let config = load_config(common)?;
    let path = input
        .map(Path::to_path_buf)
        .or_else(|| common.output.clone())
        .unwrap_or_else(|| config.sweep.output.clone());
    print_summary(&table::load_csv(&path)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(common) => sweep(common),
        Command::Run {
            common,
            variant,
            trace,
        } => run(common, *variant, trace.as_deref()),
        Command::Connectivity(common) => connectivity(common),
        Command::Summarize { common, input } => summarize(common, input.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
