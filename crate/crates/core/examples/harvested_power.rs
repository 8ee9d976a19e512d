//! Average harvested power: analytic terms against simulation.
//!
//!     cargo run --release --example harvested_power -- 1e-4 32 100000

use mmwpt::analytic::{avg_power_lower, energy_report};
use mmwpt::montecarlo::{mc_harvest, TrialBatchSpec};
use mmwpt::params::watts_to_dbm;
use mmwpt::SystemParams;

fn main() -> mmwpt::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rho: f64 = args.first().and_then(|a| a.parse().ok()).unwrap_or(1e-4);
    let m: u32 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(32);
    let trials: u64 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let p = SystemParams::default().with_density(rho).with_bs_antennas(m);

    let a = energy_report(&p)?;
    let mc = mc_harvest(&p, &TrialBatchSpec::new(&p, trials, 7))?;
    println!("ρ = {rho:e} /m², M = {m}, N = {}", p.n_ue);
    println!("               analytic          simulated ({trials} trials)");
    println!("E[En1]   {:>14.6e} W   {:>14.6e} W", a.en1_mean_w, mc.en1_mean_w);
    println!("E[En2]   {:>14.6e} W   {:>14.6e} W", a.en2_mean_w, mc.en2_mean_w);
    println!("total    {:>14.6e} W   {:>14.6e} ± {:.2e} W", a.total_w, mc.total_w, mc.ci_halfwidth_w);
    println!("lower bound (serving link only): {:.6e} W", avg_power_lower(&p)?);
    println!("stable uplink power: {:.6e} W ({:.2} dBm)", a.pu_stable_w, watts_to_dbm(a.pu_stable_w));
    Ok(())
}
