//! Blockage geometry and PPP deployment sampling.
//!
//! A link of length `r` is line-of-sight with probability
//! `f(r) = exp(-r/ϱ)`. Thinning the homogeneous BS process by `f` gives
//! two independent non-homogeneous PPPs (LoS and NLoS) whose mean measures
//! in a disk of radius `x` are `2πρ·Θ(x)` and `2πρ·Ξ(x)`.
//!
//! The typical user at the origin associates with the BS of smallest path
//! loss `β⁻¹·max{r, D}^α`. The association-distance densities returned by
//! [`assoc_pdf_los`] / [`assoc_pdf_nlos`] are unnormalised: each already
//! carries its class probability, so the pair integrates to one.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::quadrature::{integrate_semi_inf_with_breaks, QuadSpec, TailPolicy};

/// Expected number of LoS points allowed outside the LoS sampling disk.
pub const LOS_TAIL_MASS: f64 = 1e-6;

/// Expected NLoS points inside the NLoS sampling disk; the chance that the
/// disk is empty is `exp(-NLOS_MIN_MEAN)`.
pub const NLOS_MIN_MEAN: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkClass {
    Los,
    Nlos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsPoint {
    pub radius_m: f64,
    pub azimuth_rad: f64,
    pub link: LinkClass,
}

impl BsPoint {
    pub fn position(&self) -> (f64, f64) {
        let (s, c) = self.azimuth_rad.sin_cos();
        (self.radius_m * c, self.radius_m * s)
    }
}

/// One sampled deployment around the typical user. Base stations are
/// ordered by distance, so the smallest-index tie-break is also the
/// nearest one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub bss: Vec<BsPoint>,
    pub serving_idx: usize,
    pub sim_radius_m: f64,
}

impl NetworkRealization {
    pub fn serving(&self) -> &BsPoint {
        &self.bss[self.serving_idx]
    }

    /// Builds a realization from explicit points; the serving BS is chosen
    /// by the association rule.
    pub fn from_points(
        params: &SystemParams,
        mut bss: Vec<BsPoint>,
        sim_radius_m: f64,
    ) -> Result<Self> {
        if bss.is_empty() {
            return Err(Error::EmptyDeployment { trial: 0 });
        }
        bss.sort_by(|a, b| a.radius_m.total_cmp(&b.radius_m));
        let g = BlockageGeometry::new(params);
        let serving_idx = g.associate(&bss);
        Ok(Self {
            bss,
            serving_idx,
            sim_radius_m,
        })
    }
}

/// Disk radii used when the LoS and NLoS processes are sampled
/// separately. The LoS process has finite total mass `2πρϱ²`, so its disk
/// is sized by the tail mass it leaves out; the NLoS process is sampled
/// only as far as needed to make an empty disk practically impossible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingRadii {
    pub los_m: f64,
    pub nlos_m: f64,
}

impl SamplingRadii {
    pub fn for_params(params: &SystemParams) -> Self {
        let g = BlockageGeometry::new(params);
        let total_los = g.two_pi_rho * g.decay * g.decay;
        // Solve total·e^{-u}(1+u) = LOS_TAIL_MASS for u.
        let mut u = 1.0f64;
        if total_los > LOS_TAIL_MASS {
            let target = LOS_TAIL_MASS / total_los;
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            while (-hi).exp() * (1.0 + hi) > target {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (-mid).exp() * (1.0 + mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            u = hi.max(1.0);
        }
        let los_m = g.decay * u;

        let target = NLOS_MIN_MEAN / g.two_pi_rho;
        let (mut lo, mut hi) = (0.0f64, g.decay.max(1.0));
        while g.xi(hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g.xi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let nlos_m = hi.max(10.0 * params.ref_dist_m);
        Self { los_m, nlos_m }
    }

    pub fn max(&self) -> f64 {
        self.los_m.max(self.nlos_m)
    }
}

/// A single-disk radius for [`sample_realization`] large enough that both
/// split radii fit inside it.
pub fn default_sim_radius(params: &SystemParams) -> f64 {
    SamplingRadii::for_params(params).max()
}

/// Derived constants of the blockage and path-loss model, precomputed for
/// use inside integrands and sampling loops. Methods here skip argument
/// validation; the free functions of this module validate and delegate.
#[derive(Debug, Clone, Copy)]
pub struct BlockageGeometry {
    pub decay: f64,
    pub two_pi_rho: f64,
    pub rho: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta_los: f64,
    pub beta_nlos: f64,
    pub ref_dist: f64,
    los_to_nlos_coef: f64,
    nlos_to_los_coef: f64,
}

impl BlockageGeometry {
    pub fn new(p: &SystemParams) -> Self {
        Self {
            decay: p.los_decay_length(),
            two_pi_rho: TAU * p.bs_density,
            rho: p.bs_density,
            alpha_los: p.alpha_los,
            alpha_nlos: p.alpha_nlos,
            beta_los: p.beta_los,
            beta_nlos: p.beta_nlos,
            ref_dist: p.ref_dist_m,
            los_to_nlos_coef: (p.beta_nlos / p.beta_los).powf(1.0 / p.alpha_nlos),
            nlos_to_los_coef: (p.beta_los / p.beta_nlos).powf(1.0 / p.alpha_los),
        }
    }

    #[inline]
    pub fn los_prob(&self, r: f64) -> f64 {
        (-r / self.decay).exp()
    }

    /// `Θ(x) = ∫₀ˣ t·f(t) dt`.
    pub fn theta(&self, x: f64) -> f64 {
        let u = x / self.decay;
        if u < 0.5 {
            0.5 * x * x - self.xi(x)
        } else {
            let s2 = self.decay * self.decay;
            s2 * (1.0 - (-u).exp() * (1.0 + u))
        }
    }

    /// `Ξ(x) = ∫₀ˣ t·(1 − f(t)) dt`.
    pub fn xi(&self, x: f64) -> f64 {
        let u = x / self.decay;
        if u < 0.5 {
            // ϱ² Σ_{k≥3} (−1)^{k+1} (k−1) u^k / k!
            let mut term = u * u / 2.0; // u^k / k! at k = 2
            let mut sum = 0.0;
            for k in 3..40 {
                term *= u / k as f64;
                let t = (k - 1) as f64 * term;
                if k % 2 == 1 {
                    sum += t;
                } else {
                    sum -= t;
                }
                if t < 1e-18 * sum.abs() {
                    break;
                }
            }
            self.decay * self.decay * sum
        } else {
            0.5 * x * x - self.theta(x)
        }
    }

    /// Distance at which an NLoS BS matches the path loss of a LoS BS at `x`.
    #[inline]
    pub fn los_to_nlos(&self, x: f64) -> f64 {
        self.los_to_nlos_coef * x.powf(self.alpha_los / self.alpha_nlos)
    }

    /// Distance at which a LoS BS matches the path loss of an NLoS BS at `x`.
    #[inline]
    pub fn nlos_to_los(&self, x: f64) -> f64 {
        self.nlos_to_los_coef * x.powf(self.alpha_nlos / self.alpha_los)
    }

    pub fn assoc_pdf_los(&self, x: f64) -> f64 {
        let e = self.theta(x) + self.xi(self.los_to_nlos(x));
        self.two_pi_rho * x * self.los_prob(x) * (-self.two_pi_rho * e).exp()
    }

    pub fn assoc_pdf_nlos(&self, x: f64) -> f64 {
        let e = self.theta(self.nlos_to_los(x)) + self.xi(x);
        self.two_pi_rho * x * (-(-x / self.decay).exp_m1()) * (-self.two_pi_rho * e).exp()
    }

    pub fn assoc_pdf(&self, link: LinkClass, x: f64) -> f64 {
        match link {
            LinkClass::Los => self.assoc_pdf_los(x),
            LinkClass::Nlos => self.assoc_pdf_nlos(x),
        }
    }

    /// `β·max{r, D}^{−α}` for the given link class.
    #[inline]
    pub fn path_gain(&self, link: LinkClass, r: f64) -> f64 {
        let r = r.max(self.ref_dist);
        match link {
            LinkClass::Los => self.beta_los * r.powf(-self.alpha_los),
            LinkClass::Nlos => self.beta_nlos * r.powf(-self.alpha_nlos),
        }
    }

    /// Index of the serving BS: maximum path gain, first index on ties.
    pub fn associate(&self, bss: &[BsPoint]) -> usize {
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for (i, b) in bss.iter().enumerate() {
            let g = self.path_gain(b.link, b.radius_m);
            if g > best_gain {
                best_gain = g;
                best = i;
            }
        }
        best
    }

    /// Quadrature settings sized to the length scales of this geometry.
    pub fn quad_spec(&self, rel_tol: f64) -> QuadSpec {
        let scale = self.decay.min(1.0 / self.rho.sqrt());
        QuadSpec::default()
            .with_rel_tol(rel_tol)
            .with_abs_tol(1e-300)
            .with_tail(TailPolicy::Truncate {
                initial_width: self.ref_dist.min(scale / 64.0).max(1e-6 * scale),
            })
    }

    /// Samples radii of the LoS process restricted to `[0, radius]`.
    fn sample_los_radius<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> f64 {
        if self.theta(radius) > 0.5 * self.decay * self.decay {
            // Gamma(2, ϱ) truncated to the disk.
            loop {
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = 1.0 - rng.random::<f64>();
                let r = -self.decay * (u1 * u2).ln();
                if r <= radius {
                    return r;
                }
            }
        } else {
            loop {
                let r = radius * rng.random::<f64>().sqrt();
                if rng.random::<f64>() < self.los_prob(r) {
                    return r;
                }
            }
        }
    }

    /// Samples radii of the NLoS process restricted to `[0, radius]`.
    fn sample_nlos_radius<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> f64 {
        if radius >= self.decay {
            loop {
                let r = radius * rng.random::<f64>().sqrt();
                if rng.random::<f64>() < -(-r / self.decay).exp_m1() {
                    return r;
                }
            }
        } else {
            // Proposal ∝ t², which dominates t·(1 − e^{−t/ϱ}).
            loop {
                let r = radius * rng.random::<f64>().cbrt();
                let u = r / self.decay;
                let accept = if u > 0.0 { -(-u).exp_m1() / u } else { 1.0 };
                if rng.random::<f64>() < accept {
                    return r;
                }
            }
        }
    }

    /// Draws the LoS and NLoS processes independently, each in its own
    /// disk. Equivalent in law to thinning one homogeneous process.
    pub fn sample_split<R: Rng + ?Sized>(
        &self,
        radii: &SamplingRadii,
        rng: &mut R,
    ) -> Option<Vec<BsPoint>> {
        let n_los = poisson(self.two_pi_rho * self.theta(radii.los_m), rng);
        let n_nlos = poisson(self.two_pi_rho * self.xi(radii.nlos_m), rng);
        if n_los + n_nlos == 0 {
            return None;
        }
        let mut bss = Vec::with_capacity((n_los + n_nlos) as usize);
        for _ in 0..n_los {
            let r = self.sample_los_radius(radii.los_m, rng);
            let az = TAU * rng.random::<f64>();
            bss.push(BsPoint {
                radius_m: r,
                azimuth_rad: az,
                link: LinkClass::Los,
            });
        }
        for _ in 0..n_nlos {
            let r = self.sample_nlos_radius(radii.nlos_m, rng);
            let az = TAU * rng.random::<f64>();
            bss.push(BsPoint {
                radius_m: r,
                azimuth_rad: az,
                link: LinkClass::Nlos,
            });
        }
        bss.sort_by(|a, b| a.radius_m.total_cmp(&b.radius_m));
        Some(bss)
    }

    /// Homogeneous PPP in a disk, each point tagged LoS with probability
    /// `f(r)`.
    pub fn sample_thinned<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> Vec<BsPoint> {
        let n = poisson(self.rho * PI * radius * radius, rng);
        let mut bss = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let r = radius * rng.random::<f64>().sqrt();
            let az = TAU * rng.random::<f64>();
            let link = if rng.random::<f64>() < self.los_prob(r) {
                LinkClass::Los
            } else {
                LinkClass::Nlos
            };
            bss.push(BsPoint {
                radius_m: r,
                azimuth_rad: az,
                link,
            });
        }
        bss.sort_by(|a, b| a.radius_m.total_cmp(&b.radius_m));
        bss
    }
}

pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite mean");
    d.sample(rng) as u64
}

fn check_distance(func: &'static str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(Error::domain(func, format!("distance must be >= 0, got {x}")))
    } else {
        Ok(())
    }
}

/// LoS probability of a link of length `r`.
pub fn los_probability(r: f64, params: &SystemParams) -> Result<f64> {
    check_distance("los_probability", r)?;
    Ok(BlockageGeometry::new(params).los_prob(r))
}

pub fn theta_fn(x: f64, params: &SystemParams) -> Result<f64> {
    check_distance("theta_fn", x)?;
    Ok(BlockageGeometry::new(params).theta(x))
}

pub fn xi_fn(x: f64, params: &SystemParams) -> Result<f64> {
    check_distance("xi_fn", x)?;
    Ok(BlockageGeometry::new(params).xi(x))
}

pub fn boundary_los_to_nlos(x: f64, params: &SystemParams) -> Result<f64> {
    check_distance("boundary_los_to_nlos", x)?;
    Ok(BlockageGeometry::new(params).los_to_nlos(x))
}

pub fn boundary_nlos_to_los(x: f64, params: &SystemParams) -> Result<f64> {
    check_distance("boundary_nlos_to_los", x)?;
    Ok(BlockageGeometry::new(params).nlos_to_los(x))
}

pub fn assoc_pdf_los(x: f64, params: &SystemParams) -> Result<f64> {
    check_distance("assoc_pdf_los", x)?;
    Ok(BlockageGeometry::new(params).assoc_pdf_los(x))
}

pub fn assoc_pdf_nlos(x: f64, params: &SystemParams) -> Result<f64> {
    check_distance("assoc_pdf_nlos", x)?;
    Ok(BlockageGeometry::new(params).assoc_pdf_nlos(x))
}

fn assoc_probability(params: &SystemParams, link: LinkClass) -> Result<f64> {
    params.validate()?;
    let g = BlockageGeometry::new(params);
    let spec = g.quad_spec(1e-11);
    integrate_semi_inf_with_breaks(|x| g.assoc_pdf(link, x), 0.0, &[g.ref_dist], &spec)
        .require("association probability")
}

/// Probability that the typical user is served by a LoS BS.
pub fn los_assoc_probability(params: &SystemParams) -> Result<f64> {
    assoc_probability(params, LinkClass::Los)
}

/// Probability that the typical user is served by an NLoS BS, integrated
/// separately (not as `1 − Λ_LoS`) so the pair can be checked.
pub fn nlos_assoc_probability(params: &SystemParams) -> Result<f64> {
    assoc_probability(params, LinkClass::Nlos)
}

/// Samples a homogeneous PPP of density ρ in a disk of radius
/// `sim_radius_m`, tags each point LoS with probability `f(r)` and
/// associates the typical user. Deterministic in `rng_seed`.
pub fn sample_realization(
    params: &SystemParams,
    sim_radius_m: f64,
    rng_seed: u64,
) -> Result<NetworkRealization> {
    params.validate()?;
    if !(sim_radius_m > 0.0 && sim_radius_m.is_finite()) {
        return Err(Error::param(
            "sim_radius_m",
            format!("must be finite and > 0, got {sim_radius_m}"),
        ));
    }
    let g = BlockageGeometry::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let bss = g.sample_thinned(sim_radius_m, &mut rng);
    if bss.is_empty() {
        return Err(Error::EmptyDeployment { trial: rng_seed });
    }
    let serving_idx = g.associate(&bss);
    Ok(NetworkRealization {
        bss,
        serving_idx,
        sim_radius_m,
    })
}

/// Same law as [`sample_realization`], drawn as two independent thinned
/// processes in the disks given by `radii`.
pub fn sample_realization_split<R: Rng + ?Sized>(
    params: &SystemParams,
    radii: &SamplingRadii,
    rng: &mut R,
) -> Result<NetworkRealization> {
    let g = BlockageGeometry::new(params);
    let bss = g
        .sample_split(radii, rng)
        .ok_or(Error::EmptyDeployment { trial: 0 })?;
    let serving_idx = g.associate(&bss);
    Ok(NetworkRealization {
        bss,
        serving_idx,
        sim_radius_m: radii.max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_semi_inf};

    fn params() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn los_probability_values() {
        let p = params();
        assert_eq!(los_probability(0.0, &p).unwrap(), 1.0);
        assert!((los_probability(141.4, &p).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((los_probability(282.8, &p).unwrap() - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert!(los_probability(-1.0, &p).is_err());
    }

    #[test]
    fn theta_xi_against_quadrature() {
        let p = params();
        let s = QuadSpec::default().with_rel_tol(1e-13).with_abs_tol(1e-300);
        for &x in &[0.0, 1e-6, 0.3, 10.0, 70.0, 141.4, 500.0, 5000.0] {
            let th = integrate(|t: f64| t * (-t / 141.4).exp(), 0.0, x, &s).value;
            let xi = integrate(|t: f64| t * -(-t / 141.4f64).exp_m1(), 0.0, x, &s).value;
            let g = theta_fn(x, &p).unwrap();
            let h = xi_fn(x, &p).unwrap();
            assert!((g - th).abs() <= 1e-12 * th.abs().max(1e-300), "theta {x}: {g} vs {th}");
            assert!((h - xi).abs() <= 1e-11 * xi.abs().max(1e-300), "xi {x}: {h} vs {xi}");
        }
        assert_eq!(theta_fn(0.0, &p).unwrap(), 0.0);
        assert_eq!(xi_fn(0.0, &p).unwrap(), 0.0);
        assert!(theta_fn(-1.0, &p).is_err());
    }

    #[test]
    fn theta_limit_is_decay_squared() {
        let p = params();
        // Closed form ϱ²(1 − e^{−x/ϱ}(1 + x/ϱ)) → ϱ² = 19993.96.
        let t = theta_fn(1e5, &p).unwrap();
        assert!((t - 19_993.96).abs() < 1e-6, "{t}");
    }

    #[test]
    fn theta_plus_xi_is_half_square() {
        let p = params();
        let mut last = (0.0, 0.0);
        for i in 0..=2000 {
            let x = 10f64.powf(-4.0 + 8.0 * i as f64 / 2000.0);
            let (t, xi) = (theta_fn(x, &p).unwrap(), xi_fn(x, &p).unwrap());
            assert!(((t + xi) / (0.5 * x * x) - 1.0).abs() <= 1e-12, "{x}");
            assert!(t >= last.0 && xi >= last.1, "monotone at {x}");
            last = (t, xi);
        }
    }

    #[test]
    fn boundaries() {
        let mut p = params();
        p.beta_nlos = p.beta_los;
        p.alpha_nlos = p.alpha_los;
        assert!((boundary_los_to_nlos(37.0, &p).unwrap() - 37.0).abs() < 1e-12);

        let mut p = params();
        p.beta_nlos = p.beta_los * 1e-3;
        let y = boundary_los_to_nlos(100.0, &p).unwrap();
        assert!((y - 1.778_279_410_038_923).abs() < 1e-12, "{y}");
        // Equal path loss: β_L x^{-2} = β_N y^{-4}.
        let lhs = p.beta_los * 100f64.powi(-2);
        let rhs = p.beta_nlos * y.powi(-4);
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
        for x in [1.0, 50.0, 500.0] {
            let back = boundary_nlos_to_los(boundary_los_to_nlos(x, &p).unwrap(), &p).unwrap();
            assert!((back / x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn densities_vanish_at_origin_and_normalise() {
        let p = params();
        assert_eq!(assoc_pdf_los(0.0, &p).unwrap(), 0.0);
        assert_eq!(assoc_pdf_nlos(0.0, &p).unwrap(), 0.0);
        for rho in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
            let q = p.with_density(rho);
            let l = los_assoc_probability(&q).unwrap();
            let n = nlos_assoc_probability(&q).unwrap();
            assert!((l + n - 1.0).abs() < 1e-8, "{rho}: {l} + {n}");
            assert!((0.0..=1.0).contains(&l));
        }
    }

    #[test]
    fn los_association_limits() {
        let mut p = params();
        p.blockage_decay_m = 1e-3; // almost every link blocked
        assert!(los_assoc_probability(&p).unwrap() < 1e-6);
        let mut p = params();
        p.blockage_decay_m = 1e9; // essentially no blockage
        assert!(los_assoc_probability(&p).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn densities_nonnegative() {
        let p = params();
        for i in 0..500 {
            let x = i as f64 * 7.3;
            assert!(assoc_pdf_los(x, &p).unwrap() >= 0.0);
            assert!(assoc_pdf_nlos(x, &p).unwrap() >= 0.0);
        }
    }

    #[test]
    fn sampling_radii_leave_negligible_mass() {
        for rho in [1e-6, 1e-4, 1e-2] {
            let p = params().with_density(rho);
            let g = BlockageGeometry::new(&p);
            let r = SamplingRadii::for_params(&p);
            let outside = g.two_pi_rho * (g.decay * g.decay - g.theta(r.los_m));
            assert!(outside <= 1.01 * LOS_TAIL_MASS, "{rho}: {outside}");
            assert!(g.two_pi_rho * g.xi(r.nlos_m) >= NLOS_MIN_MEAN * 0.999);
        }
    }

    #[test]
    fn split_los_mass_matches_tail_integral() {
        let p = params();
        let g = BlockageGeometry::new(&p);
        let s = QuadSpec::default().with_rel_tol(1e-12);
        let tail = integrate_semi_inf(|t: f64| t * g.los_prob(t), 0.0, &s).value;
        assert!((tail / (g.decay * g.decay) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = params();
        let a = sample_realization(&p, 800.0, 7).unwrap();
        let b = sample_realization(&p, 800.0, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_realization(&p, 800.0, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_bs_is_served() {
        let p = params();
        let r = NetworkRealization::from_points(
            &p,
            vec![BsPoint {
                radius_m: 10.0,
                azimuth_rad: 0.3,
                link: LinkClass::Los,
            }],
            100.0,
        )
        .unwrap();
        assert_eq!(r.serving_idx, 0);
    }

    #[test]
    fn ties_go_to_smallest_index() {
        let p = params();
        let pts = vec![
            BsPoint { radius_m: 0.2, azimuth_rad: 0.0, link: LinkClass::Los },
            BsPoint { radius_m: 0.7, azimuth_rad: 1.0, link: LinkClass::Los },
        ];
        let r = NetworkRealization::from_points(&p, pts, 10.0).unwrap();
        // Both inside D = 1 m share the same path loss.
        assert_eq!(r.serving_idx, 0);
        assert_eq!(r.serving().radius_m, 0.2);
    }

    #[test]
    fn serving_has_minimum_path_loss() {
        let p = params().with_density(1e-3);
        let g = BlockageGeometry::new(&p);
        for seed in 0..50 {
            let r = sample_realization(&p, 400.0, seed).unwrap();
            let best = g.path_gain(r.serving().link, r.serving().radius_m);
            for b in &r.bss {
                assert!(g.path_gain(b.link, b.radius_m) <= best);
            }
        }
    }

    #[test]
    fn empty_deployment_reported() {
        let p = params().with_density(1e-12);
        let e = sample_realization(&p, 10.0, 1).unwrap_err();
        assert!(matches!(e, Error::EmptyDeployment { .. }));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn geometry(log_rho: f64, decay: f64) -> BlockageGeometry {
        let mut p = SystemParams::default().with_density(10f64.powf(log_rho));
        p.blockage_decay_m = decay;
        BlockageGeometry::new(&p)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn theta_xi_split_half_square(x in 0.0f64..1e4, decay in 20.0f64..500.0) {
            let g = geometry(-4.0, decay);
            let s = g.theta(x) + g.xi(x);
            prop_assert!((s - 0.5 * x * x).abs() <= 1e-12 * (0.5 * x * x).max(1e-300));
        }

        #[test]
        fn theta_xi_nondecreasing(x in 0.0f64..5e3, dx in 0.0f64..100.0, decay in 20.0f64..500.0) {
            let g = geometry(-4.0, decay);
            prop_assert!(g.theta(x + dx) >= g.theta(x));
            prop_assert!(g.xi(x + dx) >= g.xi(x));
        }

        #[test]
        fn densities_nonnegative_anywhere(x in 0.0f64..1e4, log_rho in -7.0f64..-1.5, decay in 20.0f64..500.0) {
            let g = geometry(log_rho, decay);
            prop_assert!(g.assoc_pdf_los(x) >= 0.0);
            prop_assert!(g.assoc_pdf_nlos(x) >= 0.0);
        }

        #[test]
        fn boundaries_are_inverse(x in 1.0f64..300.0) {
            let g = geometry(-4.0, 141.4);
            let back = g.nlos_to_los(g.los_to_nlos(x));
            prop_assert!((back / x - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn association_normalises(log_rho in -7.0f64..-2.0, decay in 30.0f64..400.0) {
            let mut p = SystemParams::default().with_density(10f64.powf(log_rho));
            p.blockage_decay_m = decay;
            let s = los_assoc_probability(&p).unwrap() + nlos_assoc_probability(&p).unwrap();
            prop_assert!((s - 1.0).abs() <= 1e-6, "sum {}", s);
        }
    }
}
