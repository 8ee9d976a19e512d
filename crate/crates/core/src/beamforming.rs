//! ULA responses and analog-beamforming gain kernels.
//!
//! With matched-filter beams on both ends, a link whose actual direction
//! differs from the steered one sees the Fejér kernel
//! `|Σ_{i<n} e^{−jiω}|² = (1 − cos nω)/(1 − cos ω)` with
//! `ω = 2π(d/λ)(sin actual − sin steered)`. The aligned serving link gets
//! `n²` on each side; an interferer gets the product of two misaligned
//! kernels, whose mean over uniform angles is `ℏ̄`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::quadrature::{integrate_2d, QuadSpec};

/// An actual propagation direction and the direction a beam is steered to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    pub actual_rad: f64,
    pub beam_rad: f64,
}

impl AnglePair {
    pub fn new(actual_rad: f64, beam_rad: f64) -> Self {
        Self {
            actual_rad: wrap_angle(actual_rad),
            beam_rad: wrap_angle(beam_rad),
        }
    }

    /// Phase progression `ω` across the array for this pair.
    pub fn phase_step(&self, spacing_ratio: f64) -> f64 {
        TAU * spacing_ratio * (self.actual_rad.sin() - self.beam_rad.sin())
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainKernelParams {
    pub m_bs: u32,
    pub n_ue: u32,
    pub spacing_ratio: f64,
}

impl GainKernelParams {
    pub fn from_params(p: &SystemParams) -> Self {
        Self {
            m_bs: p.m_bs,
            n_ue: p.n_ue,
            spacing_ratio: p.spacing_ratio,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m_bs == 0 || self.n_ue == 0 {
            return Err(Error::param("antenna count", "must be >= 1"));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio.is_finite()) {
            return Err(Error::param("spacing_ratio", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Array response `[1, e^{−j2π(d/λ)sin θ}, …]` of an `n_elems` ULA.
pub fn ula_response(n_elems: usize, spacing_ratio: f64, theta_rad: f64) -> Vec<Complex64> {
    let step = -TAU * spacing_ratio * theta_rad.sin();
    (0..n_elems)
        .map(|i| Complex64::from_polar(1.0, step * i as f64))
        .collect()
}

/// Below this `|sin(ω/2)|` the kernel is evaluated by its Taylor
/// expansion about the peak; it corresponds to `|1 − cos ω| < 2·10⁻²⁴`.
const PEAK_SIN_HALF: f64 = 1e-12;

/// `2π − TAU`.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// Fejér kernel `(1 − cos nω)/(1 − cos ω)`, evaluated as
/// `sin²(nω/2)/sin²(ω/2)` with the removable singularities at
/// `ω ≡ 0 (mod 2π)` filled in with `n²`.
#[inline]
pub fn fejer_gain(n_elems: u32, omega: f64) -> f64 {
    if n_elems <= 1 {
        return if n_elems == 1 { 1.0 } else { 0.0 };
    }
    let n = f64::from(n_elems);
    let w = if omega.abs() > PI {
        // Two-part 2π keeps the reduced phase accurate near the lobes,
        // where the kernel is steepest.
        let k = (omega / TAU).round();
        k.mul_add(-TAU, omega) - k * TAU_LO
    } else {
        omega
    };
    let s = (0.5 * w).sin();
    if s.abs() < PEAK_SIN_HALF {
        return n * n * (1.0 - (n * n - 1.0) * w * w / 12.0);
    }
    // n·w split into its rounded value and the exact rounding error.
    let nw = n * w;
    let nw_err = n.mul_add(w, -nw);
    let (sh, ch) = (0.5 * nw).sin_cos();
    let t = ch.mul_add(0.5 * nw_err, sh);
    (t * t) / (s * s)
}

/// `ℏ` for one interfering BS: receive kernel on the user's `N`-element
/// array times transmit kernel on the BS's `M`-element array.
pub fn interference_gain(angles_rx: AnglePair, angles_tx: AnglePair, kp: &GainKernelParams) -> f64 {
    fejer_gain(kp.n_ue, angles_rx.phase_step(kp.spacing_ratio))
        * fejer_gain(kp.m_bs, angles_tx.phase_step(kp.spacing_ratio))
}

type CacheKey = (u32, u64, u64);

fn kernel_cache() -> &'static RwLock<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Mean of one Fejér kernel over two independent uniform angles on
/// `[0, 2π)²` (density `1/4π²`). Memoised per `(n, d/λ, tol)`.
pub fn mean_kernel_gain(n_elems: u32, spacing_ratio: f64, tol: f64) -> Result<f64> {
    if n_elems == 0 {
        return Err(Error::param("antenna count", "must be >= 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("mean_kernel_gain", format!("tol must be > 0, got {tol}")));
    }
    if n_elems == 1 {
        return Ok(1.0);
    }
    let key = (n_elems, spacing_ratio.to_bits(), tol.to_bits());
    if let Some(v) = kernel_cache().read().expect("cache lock").get(&key) {
        return Ok(*v);
    }
    // Main lobes are ~2/(n·d/λ) wide in sin-space; start from a partition
    // fine enough that no lobe falls between Kronrod nodes.
    let pieces = (4.0 * f64::from(n_elems) * spacing_ratio.max(0.5)).ceil() as usize + 8;
    let spec = QuadSpec::default()
        .with_rel_tol(tol)
        .with_abs_tol(1e-300)
        .with_initial_pieces(pieces);
    let k = TAU * spacing_ratio;
    let r = integrate_2d(
        |a, b| fejer_gain(n_elems, k * (a.sin() - b.sin())),
        (0.0, TAU),
        (0.0, TAU),
        &spec,
    );
    let v = r.require("mean kernel gain")? / (TAU * TAU);
    kernel_cache().write().expect("cache lock").insert(key, v);
    Ok(v)
}

/// `ℏ̄ = E{ℏ}`: product of the receive- and transmit-side kernel means.
pub fn mean_interference_gain(kp: &GainKernelParams, tol: f64) -> Result<f64> {
    kp.validate()?;
    Ok(mean_kernel_gain(kp.n_ue, kp.spacing_ratio, tol)?
        * mean_kernel_gain(kp.m_bs, kp.spacing_ratio, tol)?)
}

/// Tolerance used for `ℏ̄` inside the analytic formulas.
pub const DEFAULT_GAIN_TOL: f64 = 1e-8;
