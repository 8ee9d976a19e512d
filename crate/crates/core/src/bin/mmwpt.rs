use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use mmwpt::analytic::{energy_report, rate_upper_with_power};
use mmwpt::harness::selftest::DEFAULT_SELFTEST_TRIALS;
use mmwpt::harness::sweep::{default_antennas, default_densities, with_thread_cap};
use mmwpt::harness::{load_config, run_fig1, run_fig2, selftest, write_csv, write_json, SweepOptions};
use mmwpt::montecarlo::{mc_harvest, mc_rate, TrialBatchSpec};
use mmwpt::{Error, SystemParams};

#[derive(Parser)]
#[command(name = "mmwpt", version, about = "Harvested power and uplink rate of mmWave power-transfer networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat TOML parameter file; absent keys take the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo trials per point.
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Comma-separated BS densities, per m².
    #[arg(long, global = true, value_delimiter = ',')]
    densities: Option<Vec<f64>>,
    /// Comma-separated BS antenna counts M.
    #[arg(long, global = true, value_delimiter = ',')]
    antennas: Option<Vec<u32>>,
    /// Skip the simulation columns.
    #[arg(long, global = true)]
    no_mc: bool,
    /// Emit JSON instead of CSV or text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Harvested power and stable transmit power versus density.
    Fig1,
    /// Uplink rates versus density.
    Fig2,
    /// Reduced-size invariant suite; JSON verdict.
    Selftest,
    /// All quantities at a single parameter point.
    Eval,
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn params(cli: &Cli) -> Result<SystemParams, Error> {
    match &cli.config {
        Some(p) => load_config(p),
        None => Ok(SystemParams::default()),
    }
}

fn sweep(cli: &Cli, fig2: bool) -> Result<ExitCode, Error> {
    let p = params(cli)?;
    let opts = SweepOptions {
        densities: cli.densities.clone().unwrap_or_else(default_densities),
        m_values: cli.antennas.clone().unwrap_or_else(default_antennas),
        trials: cli.trials.unwrap_or(100_000),
        seed: cli.seed,
        run_mc: !cli.no_mc,
    };
    let result = if fig2 { run_fig2(&p, &opts)? } else { run_fig1(&p, &opts)? };
    let mut out = output(&cli.out)?;
    if cli.json {
        write_json(&result, &mut out)?;
        writeln!(out)?;
    } else {
        write_csv(&result, &mut out)?;
    }
    out.flush()?;
    if result.is_complete() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("sweep incomplete; output is partial");
        Ok(ExitCode::FAILURE)
    }
}

fn eval(cli: &Cli) -> Result<ExitCode, Error> {
    let mut p = params(cli)?;
    if let Some(d) = cli.densities.as_ref().and_then(|d| d.first()) {
        p.bs_density = *d;
    }
    if let Some(m) = cli.antennas.as_ref().and_then(|m| m.first()) {
        p.m_bs = *m;
    }
    p.validate()?;
    let energy = energy_report(&p)?;
    let rate = rate_upper_with_power(&p, energy.pu_stable_w)?;
    let (mc_energy, mc_rates) = if cli.no_mc {
        (None, None)
    } else {
        let batch = TrialBatchSpec::new(&p, cli.trials.unwrap_or(100_000), cli.seed);
        with_thread_cap(|| -> Result<_, Error> { Ok((Some(mc_harvest(&p, &batch)?), Some(mc_rate(&p, &batch)?))) })??
    };
    let mut out = output(&cli.out)?;
    if cli.json {
        let doc = json!({
            "params": p,
            "seed": cli.seed,
            "analytic": { "energy": energy, "rate": rate },
            "montecarlo": { "energy": mc_energy, "rate": mc_rates },
        });
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
    } else {
        writeln!(out, "density            {:e} /m² ({} /km²)", p.bs_density, p.bs_density * 1e6)?;
        writeln!(out, "antennas           M = {}, N = {}", p.m_bs, p.n_ue)?;
        writeln!(out, "E[En1]             {:e} W", energy.en1_mean_w)?;
        writeln!(out, "E[En2]             {:e} W", energy.en2_mean_w)?;
        writeln!(out, "E[P_ro]            {:e} W", energy.total_w)?;
        writeln!(out, "P_u (stable)       {:e} W", energy.pu_stable_w)?;
        writeln!(out, "rate upper bound   {:.6} bit/s/Hz", rate.rate_upper_bps)?;
        if let (Some(e), Some(r)) = (mc_energy, mc_rates) {
            writeln!(out, "MC E[P_ro]         {:e} ± {:e} W", e.total_w, e.ci_halfwidth_w)?;
            writeln!(
                out,
                "MC SNR rate        {:.6} ± {:.6} bit/s/Hz",
                r.rate_upper_bps,
                r.rate_upper_ci.unwrap_or(0.0)
            )?;
            if let Some(x) = r.rate_exact_bps {
                writeln!(out, "MC SINR rate       {:.6} ± {:.6} bit/s/Hz", x, r.rate_exact_ci.unwrap_or(0.0))?;
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run_selftest(cli: &Cli) -> Result<ExitCode, Error> {
    let trials = cli.trials.unwrap_or(DEFAULT_SELFTEST_TRIALS);
    let report = match params(cli) {
        Ok(p) => with_thread_cap(|| selftest(&p, trials, cli.seed))?,
        Err(e) => mmwpt::harness::SelftestReport::config_failure(&e, cli.seed, trials),
    };
    let mut out = output(&cli.out)?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    out.flush()?;
    if report.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in report.failures() {
            eprintln!("FAILED {}: {}", f.name, f.detail);
        }
        Ok(ExitCode::FAILURE)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Fig1 => sweep(&cli, false),
        Command::Fig2 => sweep(&cli, true),
        Command::Selftest => run_selftest(&cli),
        Command::Eval => eval(&cli),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParam { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
