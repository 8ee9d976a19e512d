//! Density × antenna-count sweeps for the harvested-power and rate curves.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    avg_power_exact_with_gain, avg_power_lower, rate_upper_with_power, stable_transmit_power,
};
use crate::beamforming::{mean_interference_gain, GainKernelParams, DEFAULT_GAIN_TOL};
use crate::error::{Error, Result};
use crate::montecarlo::{mc_harvest, mc_uplink, TrialBatchSpec};
use crate::params::SystemParams;

pub const THREADS_ENV: &str = "MMWPT_THREADS";

/// 1 to 10⁴ BS/km², three points per decade.
pub fn default_densities() -> Vec<f64> {
    log_grid(1e-6, 1e-2, 13)
}

pub fn default_antennas() -> Vec<u32> {
    vec![16, 32, 64]
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// Harvested power and stable transmit power.
    Fig1,
    /// Uplink rates.
    Fig2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub densities: Vec<f64>,
    pub m_values: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    pub run_mc: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            densities: default_densities(),
            m_values: default_antennas(),
            trials: 100_000,
            seed: 1,
            run_mc: true,
        }
    }
}

/// One `(ρ, M)` point. Columns that a run does not produce are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// BS per m².
    pub bs_density: f64,
    pub m_bs: u32,
    pub point_seed: u64,
    pub analytic_total_w: f64,
    pub analytic_lower_w: f64,
    pub mc_total_w: Option<f64>,
    pub mc_ci_w: Option<f64>,
    pub pu_stable_w: f64,
    /// Analytic SNR rate bound, bit/s/Hz.
    pub rate_upper: Option<f64>,
    /// Simulated SINR rate, bit/s/Hz.
    pub rate_exact: Option<f64>,
    pub rate_exact_ci: Option<f64>,
    /// Simulated SNR rate, bit/s/Hz.
    pub rate_mc_upper: Option<f64>,
    pub rate_mc_upper_ci: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum RunStatus {
    Complete,
    /// Some points failed; their rows are missing.
    Partial { failures: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub tool: String,
    pub version: String,
    pub figure: Figure,
    pub params: SystemParams,
    pub options: SweepOptions,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn is_complete(&self) -> bool {
        self.metadata.status == RunStatus::Complete
    }
}

/// Seed of one sweep point, mixed from the global seed, `ρ` and `M` with
/// SplitMix64 finalisers.
pub fn point_seed(seed: u64, bs_density: f64, m_bs: u32) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ bs_density.to_bits()) ^ u64::from(m_bs))
}

/// Runs `f` on a pool capped by `MMWPT_THREADS` when set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

fn check_options(opts: &SweepOptions) -> Result<()> {
    if opts.densities.is_empty() || opts.m_values.is_empty() {
        return Err(Error::Config("empty density or antenna list".into()));
    }
    if let Some(d) = opts.densities.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::param("densities", format!("must be finite and > 0, got {d}")));
    }
    if opts.m_values.contains(&0) {
        return Err(Error::param("antennas", "must be >= 1"));
    }
    if opts.run_mc && opts.trials == 0 {
        return Err(Error::param("trials", "must be >= 1"));
    }
    Ok(())
}

fn point(
    figure: Figure,
    base: &SystemParams,
    opts: &SweepOptions,
    hbar: f64,
    bs_density: f64,
    m_bs: u32,
) -> Result<SweepRow> {
    let p = base.with_density(bs_density).with_bs_antennas(m_bs);
    let seed = point_seed(opts.seed, bs_density, m_bs);
    let exact = avg_power_exact_with_gain(&p, hbar)?;
    let lower = avg_power_lower(&p)?;
    let pu = stable_transmit_power(&p, exact)?;
    let mut row = SweepRow {
        bs_density,
        m_bs,
        point_seed: seed,
        analytic_total_w: exact,
        analytic_lower_w: lower,
        mc_total_w: None,
        mc_ci_w: None,
        pu_stable_w: pu,
        rate_upper: None,
        rate_exact: None,
        rate_exact_ci: None,
        rate_mc_upper: None,
        rate_mc_upper_ci: None,
    };
    let batch = TrialBatchSpec::new(&p, opts.trials, seed);
    match figure {
        Figure::Fig1 => {
            if opts.run_mc {
                let mc = mc_harvest(&p, &batch)?;
                row.mc_total_w = Some(mc.total_w);
                row.mc_ci_w = Some(mc.ci_halfwidth_w);
            }
        }
        Figure::Fig2 => {
            row.rate_upper = Some(rate_upper_with_power(&p, pu)?.rate_upper_bps);
            if opts.run_mc {
                let (sinr, snr) = mc_uplink(&p, pu, &batch)?;
                let (exact, exact_ci) = sinr.rate(p.phi_split)?;
                let (upper, upper_ci) = snr.rate(p.phi_split)?;
                row.rate_exact = Some(exact);
                row.rate_exact_ci = Some(exact_ci);
                row.rate_mc_upper = Some(upper);
                row.rate_mc_upper_ci = Some(upper_ci);
            }
        }
    }
    Ok(row)
}

/// Evaluates every `(ρ, M)` point. Failed points are reported in the
/// metadata status and left out of the rows; option or parameter errors
/// abort the whole run.
pub fn run_sweep(figure: Figure, params: &SystemParams, opts: &SweepOptions) -> Result<SweepResult> {
    params.validate()?;
    check_options(opts)?;

    let mut hbar = BTreeMap::new();
    for &m in &opts.m_values {
        let kp = GainKernelParams::from_params(&params.with_bs_antennas(m));
        hbar.insert(m, mean_interference_gain(&kp, DEFAULT_GAIN_TOL)?);
    }

    let jobs: Vec<(u32, f64)> = opts
        .m_values
        .iter()
        .flat_map(|&m| opts.densities.iter().map(move |&d| (m, d)))
        .collect();
    let outcomes: Vec<Result<SweepRow>> = with_thread_cap(|| {
        jobs.par_iter()
            .map(|&(m, d)| {
                point(figure, params, opts, hbar[&m], d, m).map_err(|e| Error::Sweep {
                    bs_density: d,
                    m_bs: m,
                    source: Box::new(e),
                })
            })
            .collect()
    })?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.push(r),
            Err(e) => {
                log::error!("{e}");
                failures.push(e.to_string());
            }
        }
    }
    rows.sort_by(|a, b| a.m_bs.cmp(&b.m_bs).then(a.bs_density.total_cmp(&b.bs_density)));
    Ok(SweepResult {
        metadata: SweepMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            figure,
            params: *params,
            options: opts.clone(),
            status: if failures.is_empty() {
                RunStatus::Complete
            } else {
                RunStatus::Partial { failures }
            },
        },
        rows,
    })
}

/// Harvested power versus density for each `M`.
pub fn run_fig1(params: &SystemParams, opts: &SweepOptions) -> Result<SweepResult> {
    run_sweep(Figure::Fig1, params, opts)
}

/// Uplink rates versus density for each `M`.
pub fn run_fig2(params: &SystemParams, opts: &SweepOptions) -> Result<SweepResult> {
    run_sweep(Figure::Fig2, params, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(run_mc: bool) -> SweepOptions {
        SweepOptions {
            densities: vec![1e-3, 1e-5],
            m_values: vec![32, 16],
            trials: 300,
            seed: 9,
            run_mc,
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-6, 1e-2, 13);
        assert_eq!(g.len(), 13);
        assert!((g[0] - 1e-6).abs() < 1e-20 && (g[12] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn analytic_only_fig1() {
        let r = run_fig1(&SystemParams::default(), &opts(false)).unwrap();
        assert!(r.is_complete());
        let keys: Vec<(u32, f64)> = r.rows.iter().map(|r| (r.m_bs, r.bs_density)).collect();
        assert_eq!(keys, vec![(16, 1e-5), (16, 1e-3), (32, 1e-5), (32, 1e-3)]);
        for row in &r.rows {
            assert!(row.analytic_lower_w <= row.analytic_total_w);
            assert!(row.mc_total_w.is_none() && row.mc_ci_w.is_none());
            assert!(row.rate_upper.is_none());
        }
    }

    #[test]
    fn fig2_rows_are_ordered() {
        let r = run_fig2(&SystemParams::default(), &opts(true)).unwrap();
        for row in &r.rows {
            assert!(row.rate_exact.unwrap() <= row.rate_mc_upper.unwrap());
        }
        let a = r.rows.iter().find(|r| r.m_bs == 16 && r.bs_density == 1e-3).unwrap();
        let b = r.rows.iter().find(|r| r.m_bs == 32 && r.bs_density == 1e-3).unwrap();
        assert!(b.rate_upper.unwrap() > a.rate_upper.unwrap());
    }

    #[test]
    fn sweep_is_reproducible() {
        let a = run_fig1(&SystemParams::default(), &opts(true)).unwrap();
        let b = run_fig1(&SystemParams::default(), &opts(true)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_differ_per_point() {
        let s = [point_seed(1, 1e-4, 16), point_seed(1, 1e-4, 64), point_seed(1, 1e-3, 16), point_seed(2, 1e-4, 16)];
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
    }

    #[test]
    fn failing_points_mark_the_run_partial() {
        let mut p = SystemParams::default();
        // alpha_nlos <= 2 makes the interference integral diverge.
        p.alpha_los = 2.0;
        p.alpha_nlos = 2.0;
        let r = run_fig1(&p, &opts(false)).unwrap();
        assert!(!r.is_complete());
        assert!(r.rows.is_empty());
    }

    #[test]
    fn bad_options_are_rejected() {
        let mut o = opts(false);
        o.densities.push(-1.0);
        assert!(run_fig1(&SystemParams::default(), &o).is_err());
    }
}
