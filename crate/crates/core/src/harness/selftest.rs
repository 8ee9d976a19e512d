//! Reduced-size invariant suite with a machine-readable verdict.
//!
//! Tolerances on simulated quantities are wide enough (about four
//! standard errors, or a DKW band at level 10⁻⁴) that changing the seed
//! does not flip verdicts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    avg_power_exact, avg_power_lower, rate_from_ccdf, stable_transmit_power, SnrDistribution,
};
use crate::beamforming::{fejer_gain, mean_kernel_gain, DEFAULT_GAIN_TOL};
use crate::error::{Error, Result};
use crate::montecarlo::{mc_harvest, mc_uplink, TrialBatchSpec};
use crate::netgeometry::{los_assoc_probability, nlos_assoc_probability};
use crate::params::SystemParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub passed: bool,
    pub seed: u64,
    pub trials: u64,
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    fn from_checks(seed: u64, trials: u64, checks: Vec<CheckResult>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            seed,
            trials,
            checks,
        }
    }

    /// Report for a configuration that could not be loaded.
    pub fn config_failure(err: &Error, seed: u64, trials: u64) -> Self {
        Self::from_checks(
            seed,
            trials,
            vec![CheckResult {
                name: "config".into(),
                passed: false,
                value: f64::NAN,
                tolerance: 0.0,
                detail: err.to_string(),
            }],
        )
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub const DEFAULT_SELFTEST_TRIALS: u64 = 20_000;

/// Half-width of the DKW band holding with probability `1 − alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// `J₀(x)` by the trapezoid rule on `(1/π)∫₀^π cos(x sin t) dt`; the
/// integrand is smooth and periodic so the rule converges geometrically.
fn bessel_j0(x: f64) -> f64 {
    let n = 64 + 4 * x.abs().ceil() as usize;
    let h = PI / n as f64;
    (0..n).map(|k| (x * (k as f64 * h).sin()).cos()).sum::<f64>() / n as f64
}

/// Mean Fejér kernel by its Bessel series `Σ_{i,k} J₀(2πs(i−k))²`.
pub fn kernel_mean_series(n: u32, spacing_ratio: f64) -> f64 {
    let n = i64::from(n);
    let mut sum = n as f64;
    for d in 1..n {
        let j = bessel_j0(2.0 * PI * spacing_ratio * d as f64);
        sum += 2.0 * (n - d) as f64 * j * j;
    }
    sum
}

/// `|Σ_{i<n} e^{−jiω}|²` summed term by term. Each phase `iω` carries its
/// rounding error to first order and the sum is compensated, so the
/// result is accurate to a few ulps of `n²`.
pub fn direct_kernel(n: u32, omega: f64) -> f64 {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    let (mut cre, mut cim) = (0.0f64, 0.0f64);
    let add = |sum: &mut f64, comp: &mut f64, x: f64| {
        let t = *sum + x;
        *comp += if sum.abs() >= x.abs() { (*sum - t) + x } else { (x - t) + *sum };
        *sum = t;
    };
    for i in 0..n {
        let i = f64::from(i);
        let ph = i * omega;
        let err = i.mul_add(omega, -ph);
        let (sn, cs) = ph.sin_cos();
        let term = Complex64::new(cs - sn * err, -(sn + cs * err));
        add(&mut re, &mut cre, term.re);
        add(&mut im, &mut cim, term.im);
    }
    let z = Complex64::new(re + cre, im + cim);
    z.norm_sqr()
}

fn check(name: &str, value: f64, tolerance: f64, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: passed && !value.is_nan(),
        value,
        tolerance,
        detail,
    }
}

fn errored(name: &str, e: &Error) -> CheckResult {
    check(name, f64::NAN, 0.0, false, format!("error: {e}"))
}

fn run<F: FnOnce() -> Result<CheckResult>>(name: &str, f: F) -> CheckResult {
    f().unwrap_or_else(|e| errored(name, &e))
}

/// Runs every check. Simulation-based checks use `trials` trials.
pub fn selftest(params: &SystemParams, trials: u64, seed: u64) -> SelftestReport {
    if let Err(e) = params.validate() {
        return SelftestReport::config_failure(&e, seed, trials);
    }
    let p = *params;
    let mut checks = Vec::new();

    checks.push(run("kernel_oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for k in 0..20_000 {
            let n = rng.random_range(1..=256u32);
            let w = if k % 100 == 0 {
                rng.random_range(-1e-6..1e-6)
            } else {
                rng.random_range(-4.0 * PI..4.0 * PI)
            };
            worst = worst.max((fejer_gain(n, w) - direct_kernel(n, w)).abs());
        }
        Ok(check("kernel_oracle", worst, 1e-9, worst <= 1e-9, "max |Fejér − direct sum| over 20000 pairs".into()))
    }));

    checks.push(run("kernel_mean", || {
        let mut worst = 0.0f64;
        for n in [p.n_ue, p.m_bs] {
            let q = mean_kernel_gain(n, p.spacing_ratio, DEFAULT_GAIN_TOL)?;
            let s = kernel_mean_series(n, p.spacing_ratio);
            worst = worst.max((q / s - 1.0).abs());
        }
        Ok(check("kernel_mean", worst, 1e-6, worst <= 1e-6, "quadrature vs Bessel series, relative".into()))
    }));

    checks.push(run("association_normalization", || {
        let mut worst = 0.0f64;
        for rho in [1e-6, 1e-4, 1e-2] {
            let q = p.with_density(rho);
            let s = los_assoc_probability(&q)? + nlos_assoc_probability(&q)?;
            worst = worst.max((s - 1.0).abs());
        }
        Ok(check("association_normalization", worst, 1e-6, worst <= 1e-6, "|Λ_LoS + Λ_NLoS − 1|".into()))
    }));

    checks.push(run("lower_bound", || {
        let mut worst = f64::INFINITY;
        for rho in [1e-6, 1e-4, 1e-2] {
            let q = p.with_density(rho);
            worst = worst.min(avg_power_exact(&q)? - avg_power_lower(&q)?);
        }
        Ok(check("lower_bound", worst, 0.0, worst >= 0.0, "min(exact − lower) over densities".into()))
    }));

    checks.push(run("linearity", || {
        let mut q = p;
        q.pmm_watts *= 10.0;
        let a = avg_power_exact(&p)?;
        let b = avg_power_exact(&q)?;
        let pa = stable_transmit_power(&p, a)?;
        let pb = stable_transmit_power(&q, b)?;
        let dev = (b / (10.0 * a) - 1.0).abs().max((pb / (10.0 * pa) - 1.0).abs());
        Ok(check("linearity", dev, 1e-10, dev <= 1e-10, "P_mm ×10 scaling, relative".into()))
    }));

    checks.push(run("rate_oracle", || {
        // Exponential SINR with mean 1: e·E₁(1)/ln 2.
        let want = 0.860_347_382_270_885_9 * (1.0 - p.phi_split);
        let got = rate_from_ccdf(|x: f64| (-x).exp(), p.phi_split)?;
        let dev = (got / want - 1.0).abs();
        Ok(check("rate_oracle", dev, 1e-4, dev <= 1e-4, "exponential SINR closed form, relative".into()))
    }));

    let sim = p.with_density(1e-3);
    checks.push(run("energy_agreement", || {
        let a = avg_power_exact(&sim)?;
        let mc = mc_harvest(&sim, &TrialBatchSpec::new(&sim, trials, seed))?;
        let dev = (mc.total_w - a).abs();
        let tol = (0.02 * a).max(2.0 * mc.ci_halfwidth_w);
        Ok(check(
            "energy_agreement",
            dev / a,
            tol / a,
            dev <= tol,
            format!("ρ = 1e-3: analytic {a:e} W, simulated {:e} ± {:e} W", mc.total_w, mc.ci_halfwidth_w),
        ))
    }));

    let pu = avg_power_exact(&p).and_then(|e| stable_transmit_power(&p, e));
    let uplink = pu.and_then(|pu| {
        let (sinr, snr) = mc_uplink(&p, pu, &TrialBatchSpec::new(&p, trials, seed ^ 0x5eed))?;
        Ok((pu, sinr, snr))
    });
    match uplink {
        Err(e) => {
            for name in ["snr_ks", "rate_agreement", "rate_ordering"] {
                checks.push(errored(name, &e));
            }
        }
        Ok((pu, sinr, snr)) => {
            checks.push(run("snr_ks", || {
                let dist = SnrDistribution::new(&p, pu)?;
                let qs: Vec<f64> = (0..20).map(|i| snr.quantile(0.01 + 0.98 * i as f64 / 19.0)).collect();
                let mut err = None;
                let ks = snr.ks_distance(&qs, |x| {
                    dist.cdf(x).unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        f64::NAN
                    })
                });
                if let Some(e) = err {
                    return Err(e);
                }
                let tol = dkw_epsilon(snr.n(), 1e-4);
                Ok(check("snr_ks", ks, tol, ks <= tol, format!("{} samples, 20 thresholds", snr.n())))
            }));
            checks.push(run("rate_agreement", || {
                let up = SnrDistribution::new(&p, pu)?.rate(p.phi_split)?;
                let (mc, ci) = snr.rate(p.phi_split)?;
                let dev = (mc - up).abs();
                let tol = (0.03 * up).max(2.0 * ci);
                Ok(check(
                    "rate_agreement",
                    dev / up,
                    tol / up,
                    dev <= tol,
                    format!("analytic {up} vs simulated {mc} ± {ci} bit/s/Hz"),
                ))
            }));
            checks.push(run("rate_ordering", || {
                let (exact, _) = sinr.rate(p.phi_split)?;
                let (upper, _) = snr.rate(p.phi_split)?;
                Ok(check(
                    "rate_ordering",
                    exact - upper,
                    0.0,
                    exact <= upper,
                    format!("SINR rate {exact} vs SNR rate {upper}"),
                ))
            }));
        }
    }

    SelftestReport::from_checks(seed, trials, checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j0(2.404_825_557_695_773).abs()) < 1e-13);
        assert!((bessel_j0(50.0) - 0.055_812_327_669_251_86).abs() < 1e-13);
    }

    #[test]
    fn series_of_single_element_is_one() {
        assert_eq!(kernel_mean_series(1, 0.5), 1.0);
    }

    #[test]
    fn default_selftest_passes() {
        let r = selftest(&SystemParams::default(), 4_000, 1);
        assert!(r.passed, "{:#?}", r.failures());
    }

    #[test]
    fn bad_params_fail_the_config_check() {
        let mut p = SystemParams::default();
        p.beta_los = -1.0;
        let r = selftest(&p, 100, 1);
        assert!(!r.passed);
        assert_eq!(r.checks[0].name, "config");
        assert!(r.checks[0].detail.contains("beta_los"));
    }
}
