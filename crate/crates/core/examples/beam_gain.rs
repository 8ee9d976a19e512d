//! Fejér kernel of a misaligned ULA link and the mean interference gain.
//!
//!     cargo run --release --example beam_gain -- 16 32

use mmwpt::beamforming::{
    fejer_gain, mean_interference_gain, mean_kernel_gain, AnglePair, GainKernelParams,
    DEFAULT_GAIN_TOL,
};
use mmwpt::harness::selftest::kernel_mean_series;

fn main() -> mmwpt::Result<()> {
    let args: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_ue = args.first().copied().unwrap_or(16);
    let m_bs = args.get(1).copied().unwrap_or(32);
    let spacing = 0.5;

    println!("kernel for n = {n_ue}, steered to 0 rad");
    for deg in [0.0, 1.0, 2.0, 5.0, 7.2, 10.0, 30.0, 90.0] {
        let pair = AnglePair::new(f64::to_radians(deg), 0.0);
        let g = fejer_gain(n_ue, pair.phase_step(spacing));
        println!("  {deg:>5.1}°  {g:>10.4}  ({:>7.2} dB below peak)", 10.0 * (f64::from(n_ue * n_ue) / g).log10());
    }

    for n in [n_ue, m_bs] {
        let q = mean_kernel_gain(n, spacing, DEFAULT_GAIN_TOL)?;
        println!("mean kernel n = {n:>3}: quadrature {q:.12}, Bessel series {:.12}", kernel_mean_series(n, spacing));
    }
    let kp = GainKernelParams { m_bs, n_ue, spacing_ratio: spacing };
    println!("mean interference gain (N = {n_ue}, M = {m_bs}): {:.6}", mean_interference_gain(&kp, DEFAULT_GAIN_TOL)?);
    Ok(())
}
