//! Uplink SNR distribution: analytic CDF against the empirical one.
//!
//!     cargo run --release --example snr_cdf -- 1e-4

use mmwpt::analytic::{avg_power_exact, stable_transmit_power, SnrDistribution};
use mmwpt::montecarlo::{mc_uplink, TrialBatchSpec};
use mmwpt::SystemParams;

fn main() -> mmwpt::Result<()> {
    let rho: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1e-4);
    let p = SystemParams::default().with_density(rho);
    let pu = stable_transmit_power(&p, avg_power_exact(&p)?)?;
    let dist = SnrDistribution::new(&p, pu)?;
    let mut batch = TrialBatchSpec::new(&p, 50_000, 3);
    batch.record_sinr = false;
    let (_, snr) = mc_uplink(&p, pu, &batch)?;

    println!("P_u = {pu:.4e} W; SNR ceilings (link inside D): {:?}", dist.peak_snr());
    println!("{:>12} {:>10} {:>10} {:>10} {:>10}", "SNR [dB]", "analytic", "empirical", "Δ₁ [m]", "Δ₂ [m]");
    for k in 0..=12 {
        let db = -40.0 + 5.0 * f64::from(k);
        let x = 10f64.powf(db / 10.0);
        let geo = dist.threshold_geometry(x);
        println!(
            "{db:>12.1} {:>10.5} {:>10.5} {:>10.2} {:>10.2}",
            dist.cdf(x)?,
            snr.eval(x),
            geo.delta1_m,
            geo.delta2_m
        );
    }
    Ok(())
}
