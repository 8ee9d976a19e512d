//! Closed-form-by-quadrature evaluation of the harvested power, the SNR
//! distribution and the uplink rate bound.
//!
//! The association densities are used unnormalised throughout (see
//! [`crate::netgeometry`]), so the class probabilities never appear as
//! divisors.
//!
//! Harvested power splits into the serving-link term `En₁` and the
//! interference term `En₂`:
//!
//! ```text
//! E{En₁} = NM·P·Σ_c β_c ∫ max{x, D}^{−α_c} g_c(x) dx
//! E{En₂} = (P/NM)·ℏ̄·2πρ·Σ_c Σ_k β_k ∫ g_c(x)·J_k(b_{c,k}(x)) dx
//! J_k(y) = ∫_y^∞ max{t, D}^{−α_k} p_k(t) t dt
//! ```
//!
//! where `p_k` is the LoS or NLoS probability and `b_{c,k}` the exclusion
//! radius of class-`k` interferers when the serving BS is class `c` at `x`.

use serde::{Deserialize, Serialize};

use crate::beamforming::{mean_interference_gain, GainKernelParams, DEFAULT_GAIN_TOL};
use crate::error::{Error, Result};
use crate::netgeometry::{BlockageGeometry, LinkClass};
use crate::params::SystemParams;
use crate::quadrature::{
    integrate, integrate_geometric, integrate_pieces, integrate_semi_inf,
    integrate_semi_inf_with_breaks, QuadSpec, TailPolicy,
};

/// Relative tolerance of the outer integrals.
pub const OUTER_REL_TOL: f64 = 1e-9;
/// Inner (interferer-distance) integrals run ten times looser.
pub const INNER_REL_TOL: f64 = 1e-8;

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub en1_mean_w: f64,
    pub en2_mean_w: f64,
    pub total_w: f64,
    pub pu_stable_w: f64,
    pub method: Method,
    /// 95 % half-width on `total_w`; zero for analytic reports.
    pub ci_halfwidth_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Interference-free (SNR) rate, normalised to bit/s/Hz.
    pub rate_upper_bps: f64,
    /// Interference-inclusive (SINR) rate, bit/s/Hz; simulation only.
    pub rate_exact_bps: Option<f64>,
    pub method: Method,
    pub rate_upper_ci: Option<f64>,
    pub rate_exact_ci: Option<f64>,
}

/// Distances beyond which the uplink SNR falls below a threshold, per
/// serving-link class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrThresholdGeometry {
    pub delta1_m: f64,
    pub delta2_m: f64,
}

fn outer_spec(g: &BlockageGeometry) -> QuadSpec {
    g.quad_spec(OUTER_REL_TOL)
}

fn inner_spec(g: &BlockageGeometry) -> QuadSpec {
    g.quad_spec(INNER_REL_TOL)
}

/// `E{max{R, D}^{−α_c}; class c}`.
fn path_gain_moment(g: &BlockageGeometry, link: LinkClass) -> Result<f64> {
    let alpha = match link {
        LinkClass::Los => g.alpha_los,
        LinkClass::Nlos => g.alpha_nlos,
    };
    let d = g.ref_dist;
    let spec = outer_spec(g);
    let disk = integrate(|x| g.assoc_pdf(link, x), 0.0, d, &spec).require("serving-link disk term")?;
    let tail = integrate_semi_inf(|x| x.powf(-alpha) * g.assoc_pdf(link, x), d, &spec)
        .require("serving-link tail term")?;
    Ok(d.powf(-alpha) * disk + tail)
}

/// Average receive power from the serving BS, `E{En₁}`; a lower bound on
/// the total harvested power.
pub fn avg_power_lower(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    let g = BlockageGeometry::new(params);
    let los = path_gain_moment(&g, LinkClass::Los)?;
    let nlos = path_gain_moment(&g, LinkClass::Nlos)?;
    Ok(params.array_product() * params.pmm_watts * (g.beta_los * los + g.beta_nlos * nlos))
}

/// Interferer-side integrals `J_LoS`, `J_NLoS`.
struct InterfererField<'a> {
    g: &'a BlockageGeometry,
    spec: QuadSpec,
    theta_d: f64,
    xi_d: f64,
}

impl<'a> InterfererField<'a> {
    fn new(g: &'a BlockageGeometry) -> Self {
        Self {
            g,
            spec: inner_spec(g),
            theta_d: g.theta(g.ref_dist),
            xi_d: g.xi(g.ref_dist),
        }
    }

    /// `∫_y^∞ max{t, D}^{−α} p(t) t dt`; the part inside `D` is closed form.
    fn j(&self, link: LinkClass, y: f64) -> f64 {
        let g = self.g;
        let d = g.ref_dist;
        let (alpha, inside) = match link {
            LinkClass::Los => (g.alpha_los, self.theta_d - g.theta(y.min(d))),
            LinkClass::Nlos => (g.alpha_nlos, self.xi_d - g.xi(y.min(d))),
        };
        let head = if y < d { d.powf(-alpha) * inside } else { 0.0 };
        let start = y.max(d);
        let tail = match link {
            LinkClass::Los => integrate_semi_inf(
                |t| t.powf(1.0 - alpha) * g.los_prob(t),
                start,
                &self.spec,
            ),
            LinkClass::Nlos => integrate_semi_inf(
                |t| t.powf(1.0 - alpha) * -(-t / g.decay).exp_m1(),
                start,
                &self.spec,
            ),
        };
        head + tail.value
    }
}

/// `E{En₂}` for a given mean interference gain `ℏ̄`.
pub fn avg_interference_power(params: &SystemParams, mean_gain: f64) -> Result<f64> {
    params.validate()?;
    if !(params.alpha_nlos > 2.0) {
        return Err(Error::param(
            "alpha_nlos",
            format!(
                "mean NLoS interference diverges unless alpha_nlos > 2, got {}",
                params.alpha_nlos
            ),
        ));
    }
    if !(mean_gain >= 0.0) {
        return Err(Error::domain("avg_interference_power", "mean gain must be >= 0"));
    }
    if mean_gain == 0.0 {
        return Ok(0.0);
    }
    let g = BlockageGeometry::new(params);
    let field = InterfererField::new(&g);
    let spec = outer_spec(&g);
    let d = g.ref_dist;

    let term = |serving: LinkClass, interferer: LinkClass| -> Result<f64> {
        // Exclusion radius of class `interferer` points for a class
        // `serving` BS at distance x, and the kink where it crosses D.
        let (excl, kink): (Box<dyn Fn(f64) -> f64>, Option<f64>) = match (serving, interferer) {
            (LinkClass::Los, LinkClass::Los) | (LinkClass::Nlos, LinkClass::Nlos) => {
                (Box::new(|x| x), None)
            }
            (LinkClass::Los, LinkClass::Nlos) => {
                (Box::new(|x| g.los_to_nlos(x)), Some(g.nlos_to_los(d)))
            }
            (LinkClass::Nlos, LinkClass::Los) => {
                (Box::new(|x| g.nlos_to_los(x)), Some(g.los_to_nlos(d)))
            }
        };
        let mut breaks = vec![d];
        breaks.extend(kink);
        integrate_semi_inf_with_breaks(
            |x| {
                let w = g.assoc_pdf(serving, x);
                if w == 0.0 {
                    0.0
                } else {
                    w * field.j(interferer, excl(x))
                }
            },
            0.0,
            &breaks,
            &spec,
        )
        .require("interference term")
    };

    let ll = term(LinkClass::Los, LinkClass::Los)?;
    let ln = term(LinkClass::Los, LinkClass::Nlos)?;
    let nl = term(LinkClass::Nlos, LinkClass::Los)?;
    let nn = term(LinkClass::Nlos, LinkClass::Nlos)?;
    let scale = params.pmm_watts / params.array_product() * mean_gain * g.two_pi_rho;
    Ok(scale * (g.beta_los * (ll + nl) + g.beta_nlos * (ln + nn)))
}

/// Total average receive power with an explicit `ℏ̄`.
pub fn avg_power_exact_with_gain(params: &SystemParams, mean_gain: f64) -> Result<f64> {
    Ok(avg_power_lower(params)? + avg_interference_power(params, mean_gain)?)
}

/// Total average receive power `E{En₁ + En₂}`.
pub fn avg_power_exact(params: &SystemParams) -> Result<f64> {
    let hbar = mean_interference_gain(&GainKernelParams::from_params(params), DEFAULT_GAIN_TOL)?;
    avg_power_exact_with_gain(params, hbar)
}

/// Sustainable uplink transmit power `η·φ/(1−φ)·P̄`.
pub fn stable_transmit_power(params: &SystemParams, pbar_w: f64) -> Result<f64> {
    let phi = params.phi_split;
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::domain(
            "stable_transmit_power",
            format!("phi_split must lie strictly inside (0, 1), got {phi}"),
        ));
    }
    if !(pbar_w >= 0.0) {
        return Err(Error::domain(
            "stable_transmit_power",
            format!("average power must be >= 0, got {pbar_w}"),
        ));
    }
    if !(params.eta_rfdc >= 0.0) {
        return Err(Error::domain("stable_transmit_power", "eta_rfdc must be >= 0"));
    }
    Ok(params.eta_rfdc * phi / (1.0 - phi) * pbar_w)
}

/// Analytic energy report: both terms, their sum and the stable power.
pub fn energy_report(params: &SystemParams) -> Result<EnergyReport> {
    let en1 = avg_power_lower(params)?;
    let hbar = mean_interference_gain(&GainKernelParams::from_params(params), DEFAULT_GAIN_TOL)?;
    let en2 = avg_interference_power(params, hbar)?;
    let total = en1 + en2;
    Ok(EnergyReport {
        en1_mean_w: en1,
        en2_mean_w: en2,
        total_w: total,
        pu_stable_w: stable_transmit_power(params, total)?,
        method: Method::Analytic,
        ci_halfwidth_w: 0.0,
    })
}

/// Distribution of the interference-free uplink SNR for a given user
/// transmit power. SNR on a class-`c` link at distance `r` is
/// `K_c·max{r, D}^{−α_c}` with `K_c = MN·P_u·β_c/δ²`.
pub struct SnrDistribution {
    g: BlockageGeometry,
    k_los: f64,
    k_nlos: f64,
    spec: QuadSpec,
    disk_los: f64,
    disk_nlos: f64,
}

impl SnrDistribution {
    pub fn new(params: &SystemParams, pu_w: f64) -> Result<Self> {
        params.validate()?;
        if !(pu_w > 0.0 && pu_w.is_finite()) {
            return Err(Error::domain("snr_cdf", format!("pu_w must be > 0, got {pu_w}")));
        }
        if !(params.noise_watts > 0.0) {
            return Err(Error::domain("snr_cdf", "SNR is unbounded with zero noise power"));
        }
        let g = BlockageGeometry::new(params);
        let c = params.array_product() * pu_w / params.noise_watts;
        let spec = outer_spec(&g);
        let d = g.ref_dist;
        let disk_los = integrate(|t| g.assoc_pdf_los(t), 0.0, d, &spec).require("SNR disk term")?;
        let disk_nlos =
            integrate(|t| g.assoc_pdf_nlos(t), 0.0, d, &spec).require("SNR disk term")?;
        Ok(Self {
            g,
            k_los: c * params.beta_los,
            k_nlos: c * params.beta_nlos,
            spec,
            disk_los,
            disk_nlos,
        })
    }

    pub fn threshold_geometry(&self, x: f64) -> SnrThresholdGeometry {
        SnrThresholdGeometry {
            delta1_m: (self.k_los / x).powf(1.0 / self.g.alpha_los),
            delta2_m: (self.k_nlos / x).powf(1.0 / self.g.alpha_nlos),
        }
    }

    /// Largest SNR each class can reach (link at or inside `D`); the CDF
    /// jumps at these values.
    pub fn peak_snr(&self) -> [f64; 2] {
        let d = self.g.ref_dist;
        [
            self.k_los * d.powf(-self.g.alpha_los),
            self.k_nlos * d.powf(-self.g.alpha_nlos),
        ]
    }

    /// `Pr(SNR < x)`: indicator-gated disk terms plus tails beyond
    /// `max{D, Δ}` for each class.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("snr_cdf", format!("threshold must be > 0, got {x}")));
        }
        let geo = self.threshold_geometry(x);
        let d = self.g.ref_dist;
        let mut total = 0.0;
        for (link, delta, disk) in [
            (LinkClass::Los, geo.delta1_m, self.disk_los),
            (LinkClass::Nlos, geo.delta2_m, self.disk_nlos),
        ] {
            if d > delta {
                total += disk;
            }
            let g = &self.g;
            total += integrate_semi_inf(|t| g.assoc_pdf(link, t), d.max(delta), &self.spec)
                .require("SNR CDF tail")?;
        }
        Ok(total)
    }

    /// `Pr(SNR ≥ x)` from the complementary event: a class-`c` link
    /// clears the threshold iff `D ≤ Δ_c` and `R ≤ Δ_c`.
    pub fn ccdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain("snr_ccdf", format!("threshold must be > 0, got {x}")));
        }
        let geo = self.threshold_geometry(x);
        let d = self.g.ref_dist;
        let mut total = 0.0;
        for (link, delta, disk) in [
            (LinkClass::Los, geo.delta1_m, self.disk_los),
            (LinkClass::Nlos, geo.delta2_m, self.disk_nlos),
        ] {
            if d <= delta {
                let g = &self.g;
                let width = match self.spec.tail {
                    TailPolicy::Truncate { initial_width } => initial_width,
                    TailPolicy::Transform { scale } => scale,
                };
                total += disk
                    + integrate_geometric(|t| g.assoc_pdf(link, t), d, delta, width, &self.spec)
                        .require("SNR CCDF")?;
            }
        }
        Ok(total)
    }

    /// Interference-free rate `(1−φ)/ln2 · ∫ Pr(SNR ≥ x)/(1+x) dx`.
    pub fn rate(&self, phi_split: f64) -> Result<f64> {
        let peaks = self.peak_snr();
        let mut err = None;
        let r = rate_from_ccdf_with_breaks(
            |x| match self.ccdf(x) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            phi_split,
            &peaks,
        );
        match err {
            Some(e) => Err(e),
            None => r,
        }
    }

    /// Same rate computed in the distance domain,
    /// `(1−φ)/ln2 · Σ_c ∫ ln(1 + K_c·max{r, D}^{−α_c}) g_c(r) dr`.
    pub fn rate_by_distance(&self, phi_split: f64) -> Result<f64> {
        let g = &self.g;
        let d = g.ref_dist;
        let mut total = 0.0;
        for (link, k, alpha, disk) in [
            (LinkClass::Los, self.k_los, g.alpha_los, self.disk_los),
            (LinkClass::Nlos, self.k_nlos, g.alpha_nlos, self.disk_nlos),
        ] {
            total += disk * (k * d.powf(-alpha)).ln_1p();
            total += integrate_semi_inf(
                |r| (k * r.powf(-alpha)).ln_1p() * g.assoc_pdf(link, r),
                d,
                &self.spec,
            )
            .require("distance-domain rate")?;
        }
        Ok((1.0 - phi_split) / LN_2 * total)
    }
}

/// Thresholds `Δ₁`, `Δ₂` for SNR threshold `x` at transmit power `pu_w`.
pub fn snr_threshold_geometry(
    x: f64,
    params: &SystemParams,
    pu_w: f64,
) -> Result<SnrThresholdGeometry> {
    if !(x > 0.0) {
        return Err(Error::domain("snr_threshold_geometry", "threshold must be > 0"));
    }
    Ok(SnrDistribution::new(params, pu_w)?.threshold_geometry(x))
}

/// `F_SNR(x)` at user transmit power `pu_w`.
pub fn snr_cdf(x: f64, params: &SystemParams, pu_w: f64) -> Result<f64> {
    SnrDistribution::new(params, pu_w)?.cdf(x)
}

/// `(1−φ)/ln2 · ∫₀^∞ ccdf(x)/(1+x) dx` for a nonincreasing `ccdf`.
pub fn rate_from_ccdf<F: FnMut(f64) -> f64>(ccdf: F, phi_split: f64) -> Result<f64> {
    rate_from_ccdf_with_breaks(ccdf, phi_split, &[])
}

/// Below and above these thresholds the rate integrand is handled by a
/// direct rule and a tail rule respectively; between them the integral
/// runs in `ln x`.
const RATE_GRID_LO: f64 = 1e-6;
const RATE_GRID_HI: f64 = 1e6;

/// As [`rate_from_ccdf`], with thresholds where `ccdf` jumps.
pub fn rate_from_ccdf_with_breaks<F: FnMut(f64) -> f64>(
    mut ccdf: F,
    phi_split: f64,
    breaks: &[f64],
) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi_split) {
        return Err(Error::domain("rate_from_ccdf", format!("phi_split must lie in [0, 1], got {phi_split}")));
    }
    let spec = QuadSpec::default()
        .with_rel_tol(1e-10)
        .with_abs_tol(1e-13)
        .with_initial_pieces(4)
        .with_tail(TailPolicy::Truncate { initial_width: 1.0 });

    let head = integrate(|x| ccdf(x) / (1.0 + x), 0.0, RATE_GRID_LO, &spec);

    let (lo, hi) = (RATE_GRID_LO.ln(), RATE_GRID_HI.ln());
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = breaks
        .iter()
        .filter(|&&b| b > RATE_GRID_LO && b < RATE_GRID_HI)
        .map(|b| b.ln())
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(hi);
    let log_part = |u: f64, c: &mut F| {
        let x = u.exp();
        c(x) * x / (1.0 + x)
    };
    let body = integrate_pieces(|u| log_part(u, &mut ccdf), &pts, &spec);

    let tail = if ccdf(RATE_GRID_HI) == 0.0 && breaks.iter().all(|&b| b <= RATE_GRID_HI) {
        None
    } else {
        let mut tail_breaks: Vec<f64> = breaks
            .iter()
            .filter(|&&b| b > RATE_GRID_HI)
            .map(|b| b.ln())
            .collect();
        tail_breaks.sort_by(f64::total_cmp);
        Some(integrate_semi_inf_with_breaks(
            |u| log_part(u, &mut ccdf),
            hi,
            &tail_breaks,
            &spec,
        ))
    };

    let mut value = head.value + body.value;
    let mut converged = head.converged && body.converged;
    let mut err = head.err_estimate + body.err_estimate;
    let mut evals = head.evaluations + body.evaluations;
    if let Some(t) = tail {
        value += t.value;
        converged &= t.converged;
        err += t.err_estimate;
        evals += t.evaluations;
    }
    if !converged || !value.is_finite() {
        return Err(Error::Quadrature {
            what: "rate integral",
            value,
            err_estimate: err,
            evaluations: evals,
        });
    }
    Ok((1.0 - phi_split) / LN_2 * value)
}

/// Upper bound on the average uplink rate with the stable transmit power
/// derived from the total harvested power.
pub fn rate_upper(params: &SystemParams) -> Result<RateReport> {
    let pu = stable_transmit_power(params, avg_power_exact(params)?)?;
    rate_upper_with_power(params, pu)
}

pub fn rate_upper_with_power(params: &SystemParams, pu_w: f64) -> Result<RateReport> {
    let dist = SnrDistribution::new(params, pu_w)?;
    Ok(RateReport {
        rate_upper_bps: dist.rate(params.phi_split)?,
        rate_exact_bps: None,
        method: Method::Analytic,
        rate_upper_ci: None,
        rate_exact_ci: None,
    })
}
