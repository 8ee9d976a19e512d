//! Monte Carlo engine: network realizations, random beam angles, harvested
//! power and uplink SNR/SINR samples.
//!
//! Every trial draws from its own ChaCha8 stream (`seed`, stream = trial
//! index), trials run on the rayon pool, and per-trial results are summed
//! in index order with compensated summation. Reports are therefore
//! bit-identical for any thread count.

use std::f64::consts::{LN_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{avg_power_exact, stable_transmit_power, EnergyReport, Method, RateReport};
use crate::beamforming::{fejer_gain, AnglePair};
use crate::error::{Error, Result};
use crate::netgeometry::{BlockageGeometry, BsPoint, LinkClass, SamplingRadii};
use crate::params::{InterfererModel, SystemParams};
use crate::quadrature::neumaier_sum;

/// Value reported for an SNR or SINR whose denominator is zero.
pub const SNR_CAP: f64 = 1e30;

/// Two-sided 95 % normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Sorted samples of a scalar; `eval(x)` is the fraction strictly below `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted_samples: Vec<f64>,
}

impl EmpiricalCdf {
    /// Panics if any sample is NaN.
    pub fn from_samples(mut samples: Vec<f64>) -> Self {
        assert!(samples.iter().all(|s| !s.is_nan()), "NaN sample");
        samples.sort_by(f64::total_cmp);
        Self {
            sorted_samples: samples,
        }
    }

    pub fn n(&self) -> usize {
        self.sorted_samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted_samples
    }

    /// `#{s < x}/n`; NaN when empty.
    pub fn eval(&self, x: f64) -> f64 {
        let rank = self.sorted_samples.partition_point(|&s| s < x);
        rank as f64 / self.n() as f64
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        1.0 - self.eval(x)
    }

    /// Empirical quantile (nearest rank) for `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.n();
        let i = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted_samples[i]
    }

    /// `sup_x |F(x) − other(x)|` over the given thresholds.
    pub fn ks_distance<F: FnMut(f64) -> f64>(&self, thresholds: &[f64], mut other: F) -> f64 {
        thresholds
            .iter()
            .map(|&x| (self.eval(x) - other(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Rate `(1−φ)/ln2 · ∫ ccdf(x)/(1+x) dx` of this step distribution,
    /// which integrates exactly to `(1−φ)·mean(log₂(1+x))`. Capped samples
    /// are left out. Returns `(rate, 95 % half-width)`.
    pub fn rate(&self, phi_split: f64) -> Result<(f64, f64)> {
        let logs: Vec<f64> = self
            .sorted_samples
            .iter()
            .filter(|&&s| s < SNR_CAP)
            .map(|&s| s.max(0.0).ln_1p() / LN_2)
            .collect();
        if logs.is_empty() {
            return Err(Error::Degenerate(
                "no finite SNR/SINR samples to integrate".into(),
            ));
        }
        let (mean, half) = mean_and_ci(&logs);
        Ok(((1.0 - phi_split) * mean, (1.0 - phi_split) * half))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialBatchSpec {
    pub n_trials: u64,
    pub seed: u64,
    /// Outer truncation radius of the deployment, m.
    pub sim_radius_m: f64,
    /// Generate interfering users and SINR samples in uplink runs.
    pub record_sinr: bool,
}

impl TrialBatchSpec {
    /// Batch with the default truncation radius for `params`.
    pub fn new(params: &SystemParams, n_trials: u64, seed: u64) -> Self {
        Self {
            n_trials,
            seed,
            sim_radius_m: SamplingRadii::for_params(params).max(),
            record_sinr: true,
        }
    }

    /// LoS and NLoS disk radii, capped by `sim_radius_m`. The NLoS disk
    /// must fit: a smaller radius leaves a non-negligible chance of an
    /// empty deployment and is rejected.
    pub fn radii(&self, params: &SystemParams) -> Result<SamplingRadii> {
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be >= 1".into()));
        }
        if !(self.sim_radius_m > 0.0 && self.sim_radius_m.is_finite()) {
            return Err(Error::Config(format!(
                "sim_radius_m must be finite and > 0, got {}",
                self.sim_radius_m
            )));
        }
        let need = SamplingRadii::for_params(params);
        if self.sim_radius_m < need.nlos_m {
            return Err(Error::Config(format!(
                "sim_radius_m = {} m is below the {} m needed at density {}",
                self.sim_radius_m, need.nlos_m, params.bs_density
            )));
        }
        Ok(SamplingRadii {
            los_m: need.los_m.min(self.sim_radius_m),
            nlos_m: need.nlos_m,
        })
    }
}

/// Per-trial harvested power and the serving link it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvestSample {
    pub en1_w: f64,
    pub en2_w: f64,
    pub serving: BsPoint,
}

/// Per-trial uplink samples; `sinr` is `None` when not recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkSample {
    pub snr: f64,
    pub sinr: Option<f64>,
    pub interference_w: f64,
}

/// Where `P_u` for [`mc_rate_with`] comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSource {
    /// Stable power from the analytic total harvested power.
    Analytic,
    /// Stable power from a simulated harvest with the same batch.
    MonteCarlo,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn mean_and_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = neumaier_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = neumaier_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    let sd = (ss / (n - 1.0)).sqrt();
    (mean, Z95 * sd / n.sqrt())
}

/// Runs `f` on every trial index in parallel and returns results in index
/// order, or the error of the lowest failing trial.
fn run_trials<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

struct Sampler<'a> {
    params: &'a SystemParams,
    g: BlockageGeometry,
    radii: SamplingRadii,
}

impl<'a> Sampler<'a> {
    fn new(params: &'a SystemParams, batch: &TrialBatchSpec) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            g: BlockageGeometry::new(params),
            radii: batch.radii(params)?,
        })
    }

    /// Sorted BS list and serving index for one trial.
    fn deployment(&self, trial: u64, rng: &mut ChaCha8Rng) -> Result<(Vec<BsPoint>, usize)> {
        let bss = self
            .g
            .sample_split(&self.radii, rng)
            .ok_or(Error::EmptyDeployment { trial })?;
        let idx = self.g.associate(&bss);
        Ok((bss, idx))
    }
}

/// Harvested power of one realization. The serving link is beam-aligned;
/// each other BS gets fresh uniform `ϑ_r`, `ϑ_t`, `θ_t`, and the user's
/// receive beam `θ_ro` is shared across them.
pub fn harvest_realization<R: Rng + ?Sized>(
    params: &SystemParams,
    bss: &[BsPoint],
    serving_idx: usize,
    rng: &mut R,
) -> HarvestSample {
    let g = BlockageGeometry::new(params);
    harvest_with(&g, params, bss, serving_idx, rng)
}

fn harvest_with<R: Rng + ?Sized>(
    g: &BlockageGeometry,
    params: &SystemParams,
    bss: &[BsPoint],
    serving_idx: usize,
    rng: &mut R,
) -> HarvestSample {
    let nm = params.array_product();
    let s = params.spacing_ratio;
    let serving = bss[serving_idx];
    let en1 = nm * params.pmm_watts * g.path_gain(serving.link, serving.radius_m);
    let theta_ro: f64 = TAU * rng.random::<f64>();
    let mut acc = Vec::with_capacity(bss.len().saturating_sub(1));
    for (k, b) in bss.iter().enumerate() {
        if k == serving_idx {
            continue;
        }
        let rx = AnglePair::new(TAU * rng.random::<f64>(), theta_ro);
        let tx = AnglePair::new(TAU * rng.random::<f64>(), TAU * rng.random::<f64>());
        let hk = fejer_gain(params.n_ue, rx.phase_step(s)) * fejer_gain(params.m_bs, tx.phase_step(s));
        acc.push(hk * g.path_gain(b.link, b.radius_m));
    }
    let en2 = params.pmm_watts / nm * neumaier_sum(acc);
    HarvestSample {
        en1_w: en1,
        en2_w: en2,
        serving,
    }
}

/// Per-trial harvested power samples.
pub fn mc_harvest_samples(params: &SystemParams, batch: &TrialBatchSpec) -> Result<Vec<HarvestSample>> {
    let sampler = Sampler::new(params, batch)?;
    run_trials(batch.n_trials, |t| {
        let mut rng = trial_rng(batch.seed, t);
        let (bss, idx) = sampler.deployment(t, &mut rng)?;
        Ok(harvest_with(&sampler.g, params, &bss, idx, &mut rng))
    })
}

/// Sample means of `En₁`, `En₂` and their sum, with a 95 % half-width on
/// the sum.
pub fn mc_harvest(params: &SystemParams, batch: &TrialBatchSpec) -> Result<EnergyReport> {
    let samples = mc_harvest_samples(params, batch)?;
    energy_from_samples(params, &samples)
}

pub fn energy_from_samples(params: &SystemParams, samples: &[HarvestSample]) -> Result<EnergyReport> {
    if samples.is_empty() {
        return Err(Error::Config("no trials".into()));
    }
    let n = samples.len() as f64;
    let en1 = neumaier_sum(samples.iter().map(|s| s.en1_w)) / n;
    let en2 = neumaier_sum(samples.iter().map(|s| s.en2_w)) / n;
    let totals: Vec<f64> = samples.iter().map(|s| s.en1_w + s.en2_w).collect();
    let (_, ci) = mean_and_ci(&totals);
    let total = en1 + en2;
    Ok(EnergyReport {
        en1_mean_w: en1,
        en2_mean_w: en2,
        total_w: total,
        pu_stable_w: stable_transmit_power(params, total)?,
        method: Method::MonteCarlo,
        ci_halfwidth_w: ci,
    })
}

/// Interfering users as seen from the serving BS: distance and link class.
fn interferers<R: Rng + ?Sized>(
    sampler: &Sampler<'_>,
    bss: &[BsPoint],
    serving_idx: usize,
    rng: &mut R,
) -> Vec<BsPoint> {
    let g = &sampler.g;
    match sampler.params.interferer_model {
        InterfererModel::IndependentPpp => g.sample_split(&sampler.radii, rng).unwrap_or_default(),
        InterfererModel::PerCell => {
            let (x0, y0) = bss[serving_idx].position();
            let mut out = Vec::with_capacity(bss.len().saturating_sub(1));
            for (k, b) in bss.iter().enumerate() {
                if k == serving_idx {
                    continue;
                }
                // Distance to the user's own BS: nearest-point law of a
                // PPP of density ρ.
                let e = -(1.0 - rng.random::<f64>()).ln();
                let d = (e / (std::f64::consts::PI * g.rho)).sqrt();
                let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
                let (bx, by) = b.position();
                let (dx, dy) = (bx + d * c - x0, by + d * s - y0);
                let r = dx.hypot(dy);
                let link = if rng.random::<f64>() < g.los_prob(r) {
                    LinkClass::Los
                } else {
                    LinkClass::Nlos
                };
                out.push(BsPoint {
                    radius_m: r,
                    azimuth_rad: dy.atan2(dx),
                    link,
                });
            }
            out
        }
    }
}

/// Uplink SNR and SINR of one serving link against a set of interfering
/// users (distances measured at the serving BS). Each interferer gets
/// independent uniform angles on both arrays.
pub fn uplink_realization<R: Rng + ?Sized>(
    params: &SystemParams,
    pu_w: f64,
    serving: &BsPoint,
    interferers: &[BsPoint],
    rng: &mut R,
) -> UplinkSample {
    let g = BlockageGeometry::new(params);
    uplink_with(&g, params, pu_w, serving, Some(interferers), rng)
}

fn uplink_with<R: Rng + ?Sized>(
    g: &BlockageGeometry,
    params: &SystemParams,
    pu_w: f64,
    serving: &BsPoint,
    interferers: Option<&[BsPoint]>,
    rng: &mut R,
) -> UplinkSample {
    let nm = params.array_product();
    let s = params.spacing_ratio;
    let signal = nm * pu_w * g.path_gain(serving.link, serving.radius_m);
    let noise = params.noise_watts;
    let ratio = |den: f64| if den > 0.0 { signal / den } else { SNR_CAP };
    let snr = ratio(noise);
    let Some(users) = interferers else {
        return UplinkSample {
            snr,
            sinr: None,
            interference_w: 0.0,
        };
    };
    let beam_to_user: f64 = TAU * rng.random::<f64>();
    let mut acc = Vec::with_capacity(users.len());
    for u in users {
        let at_bs = AnglePair::new(TAU * rng.random::<f64>(), beam_to_user);
        let at_user = AnglePair::new(TAU * rng.random::<f64>(), TAU * rng.random::<f64>());
        let h = fejer_gain(params.m_bs, at_bs.phase_step(s)) * fejer_gain(params.n_ue, at_user.phase_step(s));
        acc.push(h * g.path_gain(u.link, u.radius_m));
    }
    let interference = pu_w / nm * neumaier_sum(acc);
    UplinkSample {
        snr,
        sinr: Some(ratio(interference + noise).min(snr)),
        interference_w: interference,
    }
}

/// Per-trial uplink samples at transmit power `pu_w`.
pub fn mc_uplink_samples(
    params: &SystemParams,
    pu_w: f64,
    batch: &TrialBatchSpec,
) -> Result<Vec<UplinkSample>> {
    if !(pu_w > 0.0 && pu_w.is_finite()) {
        return Err(Error::domain("mc_uplink", format!("pu_w must be > 0, got {pu_w}")));
    }
    let sampler = Sampler::new(params, batch)?;
    if params.noise_watts == 0.0 {
        log::warn!("noise power is zero; SNR samples are capped at {SNR_CAP:e}");
    }
    run_trials(batch.n_trials, |t| {
        let mut rng = trial_rng(batch.seed, t);
        let (bss, idx) = sampler.deployment(t, &mut rng)?;
        let users = batch
            .record_sinr
            .then(|| interferers(&sampler, &bss, idx, &mut rng));
        Ok(uplink_with(&sampler.g, params, pu_w, &bss[idx], users.as_deref(), &mut rng))
    })
}

/// Empirical SINR and SNR distributions. The SINR distribution is empty
/// when `batch.record_sinr` is off.
pub fn mc_uplink(
    params: &SystemParams,
    pu_w: f64,
    batch: &TrialBatchSpec,
) -> Result<(EmpiricalCdf, EmpiricalCdf)> {
    let samples = mc_uplink_samples(params, pu_w, batch)?;
    let sinr = samples.iter().filter_map(|s| s.sinr).collect();
    let snr = samples.iter().map(|s| s.snr).collect();
    Ok((EmpiricalCdf::from_samples(sinr), EmpiricalCdf::from_samples(snr)))
}

/// Simulated rates with `P_u` from the analytic harvested power.
pub fn mc_rate(params: &SystemParams, batch: &TrialBatchSpec) -> Result<RateReport> {
    mc_rate_with(params, batch, PowerSource::Analytic)
}

/// Simulated SINR (exact) and SNR (upper) rates.
pub fn mc_rate_with(
    params: &SystemParams,
    batch: &TrialBatchSpec,
    source: PowerSource,
) -> Result<RateReport> {
    let pbar = match source {
        PowerSource::Analytic => avg_power_exact(params)?,
        PowerSource::MonteCarlo => mc_harvest(params, batch)?.total_w,
    };
    let pu = stable_transmit_power(params, pbar)?;
    let (sinr, snr) = mc_uplink(params, pu, batch)?;
    let (upper, upper_ci) = snr.rate(params.phi_split)?;
    let exact = if sinr.n() > 0 {
        Some(sinr.rate(params.phi_split)?)
    } else {
        None
    };
    Ok(RateReport {
        rate_upper_bps: upper,
        rate_exact_bps: exact.map(|e| e.0),
        method: Method::MonteCarlo,
        rate_upper_ci: Some(upper_ci),
        rate_exact_ci: exact.map(|e| e.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgeometry::poisson;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    fn batch(p: &SystemParams, n: u64, seed: u64) -> TrialBatchSpec {
        TrialBatchSpec::new(p, n, seed)
    }

    #[test]
    fn ecdf_basics() {
        let e = EmpiricalCdf::from_samples(vec![3.0, 1.0, 2.0, 2.0]);
        assert_eq!(e.samples(), &[1.0, 2.0, 2.0, 3.0]);
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.25);
        assert_eq!(e.eval(2.5), 0.75);
        assert_eq!(e.eval(10.0), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
        assert!(EmpiricalCdf::from_samples(vec![]).eval(1.0).is_nan());
    }

    #[test]
    fn ecdf_rate_matches_quadrature_of_step_ccdf() {
        let e = EmpiricalCdf::from_samples(vec![0.5, 3.0, 40.0]);
        let (exact, _) = e.rate(0.5).unwrap();
        let breaks = e.samples().to_vec();
        let quad =
            crate::analytic::rate_from_ccdf_with_breaks(|x| e.ccdf(x), 0.5, &breaks).unwrap();
        assert!((exact / quad - 1.0).abs() < 1e-9, "{exact} vs {quad}");
    }

    #[test]
    fn capped_samples_are_left_out_of_rates() {
        let e = EmpiricalCdf::from_samples(vec![1.0, SNR_CAP]);
        assert_eq!(e.rate(0.0).unwrap().0, 1.0);
        assert!(EmpiricalCdf::from_samples(vec![SNR_CAP]).rate(0.5).is_err());
    }

    #[test]
    fn poisson_counts() {
        // ρ = 1e-4 over a 2 km disk: mean 1256.6.
        let mean = 1e-4 * std::f64::consts::PI * 2000.0 * 2000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..20_000).map(|_| poisson(mean, &mut rng) as f64).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m / 1256.637 - 1.0).abs() < 0.01, "{m}");
        assert!((0.95..=1.05).contains(&(v / m)), "{}", v / m);
    }

    #[test]
    fn harvest_is_deterministic() {
        let p = params().with_density(1e-3);
        let b = batch(&p, 500, 11);
        let a = mc_harvest(&p, &b).unwrap();
        let c = mc_harvest(&p, &b).unwrap();
        assert_eq!(a, c);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let d = pool.install(|| mc_harvest(&p, &b)).unwrap();
        assert_eq!(a, d);
    }

    #[test]
    fn aligned_link_is_exact() {
        let p = params().with_density(1e-4);
        let g = BlockageGeometry::new(&p);
        for s in mc_harvest_samples(&p, &batch(&p, 300, 3)).unwrap() {
            let (beta, alpha) = match s.serving.link {
                LinkClass::Los => (g.beta_los, g.alpha_los),
                LinkClass::Nlos => (g.beta_nlos, g.alpha_nlos),
            };
            let want = p.array_product()
                * p.pmm_watts
                * (beta * s.serving.radius_m.max(p.ref_dist_m).powf(-alpha));
            assert_eq!(s.en1_w, want);
        }
    }

    #[test]
    fn single_bs_has_no_interference() {
        let p = params();
        let bs = BsPoint {
            radius_m: 25.0,
            azimuth_rad: 0.3,
            link: LinkClass::Los,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = harvest_realization(&p, &[bs], 0, &mut rng);
        assert_eq!(s.en2_w, 0.0);
        let want = p.array_product() * p.pmm_watts * p.beta_los * 25f64.powf(-2.0);
        assert!((s.en1_w / want - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interference_is_small_at_defaults() {
        let p = params();
        let r = mc_harvest(&p, &batch(&p, 20_000, 5)).unwrap();
        assert!(r.en2_mean_w / r.en1_mean_w < 0.1, "{}", r.en2_mean_w / r.en1_mean_w);
        assert!(r.ci_halfwidth_w > 0.0);
        assert_eq!(r.total_w, r.en1_mean_w + r.en2_mean_w);
    }

    #[test]
    fn ci_shrinks_with_root_n() {
        let p = params().with_density(1e-3);
        let mut ratios: Vec<f64> = (0..5)
            .map(|k| {
                let a = mc_harvest(&p, &batch(&p, 2_000, 100 + k)).unwrap();
                let b = mc_harvest(&p, &batch(&p, 8_000, 200 + k)).unwrap();
                b.ci_halfwidth_w / a.ci_halfwidth_w
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        assert!((0.4..=0.6).contains(&ratios[2]), "{ratios:?}");
    }

    #[test]
    fn sinr_never_exceeds_snr() {
        let p = params().with_density(1e-3);
        let samples = mc_uplink_samples(&p, 1e-5, &batch(&p, 2_000, 9)).unwrap();
        assert!(samples.iter().all(|s| s.sinr.unwrap() <= s.snr));
        let (sinr, snr) = mc_uplink(&p, 1e-5, &batch(&p, 2_000, 9)).unwrap();
        for q in [1e-3, 1e-1, 1.0, 10.0, 1e3] {
            assert!(sinr.eval(q) >= snr.eval(q));
        }
    }

    #[test]
    fn per_cell_interferers_run() {
        let mut p = params().with_density(1e-3);
        p.interferer_model = InterfererModel::PerCell;
        let r = mc_rate(&p, &batch(&p, 1_000, 4)).unwrap();
        assert!(r.rate_exact_bps.unwrap() <= r.rate_upper_bps);
        assert!(r.rate_exact_bps.unwrap() > 0.0);
    }

    #[test]
    fn zero_interferers_give_equal_sinr() {
        let p = params();
        let bs = BsPoint {
            radius_m: 40.0,
            azimuth_rad: 0.0,
            link: LinkClass::Nlos,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = uplink_realization(&p, 1e-5, &bs, &[], &mut rng);
        assert_eq!(s.sinr, Some(s.snr));
    }

    #[test]
    fn zero_noise_caps_snr_only() {
        let mut p = params();
        p.noise_watts = 0.0;
        let bs = BsPoint {
            radius_m: 40.0,
            azimuth_rad: 0.0,
            link: LinkClass::Los,
        };
        let other = BsPoint {
            radius_m: 90.0,
            azimuth_rad: 1.0,
            link: LinkClass::Los,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = uplink_realization(&p, 1e-5, &bs, &[other], &mut rng);
        assert_eq!(s.snr, SNR_CAP);
        let sinr = s.sinr.unwrap();
        assert!(sinr.is_finite() && sinr < SNR_CAP);
    }

    #[test]
    fn rates_vanish_as_phi_approaches_one() {
        let mut p = params().with_density(1e-3);
        p.phi_split = 1.0 - 1e-9;
        let r = mc_rate(&p, &batch(&p, 500, 8)).unwrap();
        assert!(r.rate_upper_bps < 1e-6, "{}", r.rate_upper_bps);
    }

    #[test]
    fn undersized_radius_is_rejected() {
        let p = params();
        let mut b = batch(&p, 10, 1);
        b.sim_radius_m = 10.0;
        assert!(matches!(mc_harvest(&p, &b), Err(Error::Config(_))));
        b.sim_radius_m = 1e5;
        b.n_trials = 0;
        assert!(matches!(mc_harvest(&p, &b), Err(Error::Config(_))));
    }

    #[test]
    fn empty_trial_aborts_batch() {
        let r: Result<Vec<u64>> = run_trials(50, |t| {
            if t == 17 || t == 31 {
                Err(Error::EmptyDeployment { trial: t })
            } else {
                Ok(t)
            }
        });
        assert!(matches!(r, Err(Error::EmptyDeployment { .. })));
    }
}
