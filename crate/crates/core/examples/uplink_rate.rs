//! Uplink rate: analytic SNR bound (two quadrature routes) and simulated
//! SNR/SINR rates for both interferer placements.
//!
//!     cargo run --release --example uplink_rate -- 1e-3 64

use mmwpt::analytic::{avg_power_exact, stable_transmit_power, SnrDistribution};
use mmwpt::montecarlo::{mc_rate, TrialBatchSpec};
use mmwpt::params::InterfererModel;
use mmwpt::SystemParams;

fn main() -> mmwpt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rho: f64 = args.first().and_then(|a| a.parse().ok()).unwrap_or(1e-3);
    let m: u32 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(32);
    let mut p = SystemParams::default().with_density(rho).with_bs_antennas(m);

    let pu = stable_transmit_power(&p, avg_power_exact(&p)?)?;
    let dist = SnrDistribution::new(&p, pu)?;
    println!("ρ = {rho:e} /m², M = {m}, P_u = {pu:.4e} W");
    println!("analytic bound, threshold domain: {:.6} bit/s/Hz", dist.rate(p.phi_split)?);
    println!("analytic bound, distance domain:  {:.6} bit/s/Hz", dist.rate_by_distance(p.phi_split)?);

    for model in [InterfererModel::IndependentPpp, InterfererModel::PerCell] {
        p.interferer_model = model;
        let r = mc_rate(&p, &TrialBatchSpec::new(&p, 20_000, 11))?;
        println!(
            "{model:?}: SNR rate {:.4} ± {:.4}, SINR rate {:.4} ± {:.4} bit/s/Hz",
            r.rate_upper_bps,
            r.rate_upper_ci.unwrap_or(0.0),
            r.rate_exact_bps.unwrap_or(f64::NAN),
            r.rate_exact_ci.unwrap_or(0.0)
        );
    }
    Ok(())
}
