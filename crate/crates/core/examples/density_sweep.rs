//! Rate-versus-density sweep written as CSV. Pass a top density above
//! 10⁻² /m² to see where the SINR rate turns over.
//!
//!     cargo run --release --example density_sweep -- 1e-1 5000 > rates.csv

use mmwpt::harness::sweep::{log_grid, run_fig2, SweepOptions};
use mmwpt::harness::write_csv;
use mmwpt::SystemParams;

fn main() -> mmwpt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let top: f64 = args.first().and_then(|a| a.parse().ok()).unwrap_or(1e-2);
    let trials: u64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(5_000);
    let decades = (top.log10() + 6.0).round() as usize;
    let opts = SweepOptions {
        densities: log_grid(1e-6, top, 3 * decades + 1),
        m_values: vec![16, 64],
        trials,
        seed: 5,
        run_mc: true,
    };
    let result = run_fig2(&SystemParams::default(), &opts)?;
    for m in &opts.m_values {
        let rows: Vec<_> = result.rows.iter().filter(|r| r.m_bs == *m).collect();
        if let Some(peak) = rows
            .iter()
            .max_by(|a, b| a.rate_exact.unwrap_or(0.0).total_cmp(&b.rate_exact.unwrap_or(0.0)))
        {
            eprintln!("M = {m}: SINR rate peaks at {:e} /m² ({:.4} bit/s/Hz)", peak.bs_density, peak.rate_exact.unwrap_or(f64::NAN));
        }
    }
    write_csv(&result, std::io::stdout().lock())
}
