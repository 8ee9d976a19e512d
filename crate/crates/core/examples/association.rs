//! LoS/NLoS association probabilities versus density, and one sampled
//! deployment.
//!
//!     cargo run --release --example association

use mmwpt::netgeometry::{
    boundary_los_to_nlos, boundary_nlos_to_los, los_assoc_probability, nlos_assoc_probability,
    sample_realization, default_sim_radius, LinkClass,
};
use mmwpt::SystemParams;

fn main() -> mmwpt::Result<()> {
    let base = SystemParams::default();
    println!("{:>12} {:>10} {:>10} {:>12}", "BS/km²", "Λ_LoS", "Λ_NLoS", "sum − 1");
    for k in 0..9 {
        let rho = 10f64.powf(-7.0 + 0.5 * f64::from(k));
        let p = base.with_density(rho);
        let (l, n) = (los_assoc_probability(&p)?, nlos_assoc_probability(&p)?);
        println!("{:>12.3} {l:>10.6} {n:>10.6} {:>12.2e}", rho * 1e6, l + n - 1.0);
    }

    println!("\nequal-path-loss distances");
    for x in [10.0, 50.0, 200.0] {
        println!(
            "  LoS at {x:>5} m ~ NLoS at {:>8.2} m;  NLoS at {x:>5} m ~ LoS at {:>10.2} m",
            boundary_los_to_nlos(x, &base)?,
            boundary_nlos_to_los(x, &base)?
        );
    }

    let p = base.with_density(1e-5);
    let net = sample_realization(&p, default_sim_radius(&p), 2024)?;
    let los = net.bss.iter().filter(|b| b.link == LinkClass::Los).count();
    let s = net.serving();
    println!(
        "\nsampled {} BSs ({los} LoS) within {:.0} m; serving BS at {:.1} m, {:?}",
        net.bss.len(),
        net.sim_radius_m,
        s.radius_m,
        s.link
    );
    Ok(())
}
