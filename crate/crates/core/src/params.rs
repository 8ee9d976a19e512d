//! Physical and model constants shared by every engine.
//!
//! All fields are stored in linear SI units (W, m, Hz, BS/m²). Decibel
//! inputs are resolved by the configuration loader before a
//! [`SystemParams`] is built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise spectral density at room temperature, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

pub const DEFAULT_CARRIER_HZ: f64 = 38e9;

/// Gap between the LoS and NLoS path-loss intercepts used by the defaults, dB.
pub const DEFAULT_NLOS_INTERCEPT_GAP_DB: f64 = 27.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Receiver noise power in dBm for a bandwidth and noise figure.
pub fn noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Free-space intercept `(λ/4π)²` at 1 m.
pub fn free_space_intercept(carrier_hz: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    (lambda / (4.0 * std::f64::consts::PI)).powi(2)
}

/// How the configured blockage parameter enters the LoS probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockageReading {
    /// `f(r) = exp(-r / value)`; the value is a length in metres.
    DecayLength,
    /// `f(r) = exp(-value * r)`; the value is a rate in 1/m.
    Rate,
}

/// Where the uplink interfering users are placed in the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfererModel {
    /// Independent PPP of density `bs_density` around the serving BS.
    IndependentPpp,
    /// One user per non-serving BS, at a Rayleigh-distributed distance
    /// from its own BS in a uniform direction.
    PerCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub pmm_watts: f64,
    pub m_bs: u32,
    pub n_ue: u32,
    /// Antenna spacing over wavelength.
    pub spacing_ratio: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub beta_los: f64,
    pub beta_nlos: f64,
    pub blockage_decay_m: f64,
    pub blockage_reading: BlockageReading,
    /// BS per m².
    pub bs_density: f64,
    pub ref_dist_m: f64,
    pub phi_split: f64,
    pub eta_rfdc: f64,
    pub noise_watts: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub interferer_model: InterfererModel,
}

impl Default for SystemParams {
    fn default() -> Self {
        let beta_los = free_space_intercept(DEFAULT_CARRIER_HZ);
        let bandwidth_hz = 2e9;
        let noise_figure_db = 10.0;
        Self {
            pmm_watts: dbm_to_watts(43.0),
            m_bs: 32,
            n_ue: 16,
            spacing_ratio: 0.5,
            alpha_los: 2.0,
            alpha_nlos: 4.0,
            beta_los,
            beta_nlos: beta_los * db_to_linear(-DEFAULT_NLOS_INTERCEPT_GAP_DB),
            blockage_decay_m: 141.4,
            blockage_reading: BlockageReading::DecayLength,
            bs_density: 1e-4,
            ref_dist_m: 1.0,
            phi_split: 0.5,
            eta_rfdc: 0.5,
            noise_watts: dbm_to_watts(noise_dbm(bandwidth_hz, noise_figure_db)),
            bandwidth_hz,
            noise_figure_db,
            interferer_model: InterfererModel::IndependentPpp,
        }
    }
}

impl SystemParams {
    /// LoS decay length in metres, whichever way the blockage value was given.
    pub fn los_decay_length(&self) -> f64 {
        match self.blockage_reading {
            BlockageReading::DecayLength => self.blockage_decay_m,
            BlockageReading::Rate => 1.0 / self.blockage_decay_m,
        }
    }

    /// Product `N·M` of the two array sizes.
    pub fn array_product(&self) -> f64 {
        f64::from(self.m_bs) * f64::from(self.n_ue)
    }

    pub fn with_density(mut self, bs_density: f64) -> Self {
        self.bs_density = bs_density;
        self
    }

    pub fn with_bs_antennas(mut self, m_bs: u32) -> Self {
        self.m_bs = m_bs;
        self
    }

    /// Checks the invariants. Noise may be zero (the simulator caps the
    /// resulting SNR) and the conversion efficiency may be zero.
    pub fn validate(&self) -> Result<()> {
        fn positive(key: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(key, format!("must be finite and > 0, got {v}")))
            }
        }
        positive("pmm_watts", self.pmm_watts)?;
        if self.m_bs == 0 {
            return Err(Error::param("m_bs", "must be >= 1"));
        }
        if self.n_ue == 0 {
            return Err(Error::param("n_ue", "must be >= 1"));
        }
        positive("spacing_ratio", self.spacing_ratio)?;
        positive("alpha_los", self.alpha_los)?;
        positive("alpha_nlos", self.alpha_nlos)?;
        if self.alpha_nlos < self.alpha_los {
            return Err(Error::param(
                "alpha_nlos",
                format!(
                    "must be >= alpha_los ({}), got {}",
                    self.alpha_los, self.alpha_nlos
                ),
            ));
        }
        positive("beta_los", self.beta_los)?;
        positive("beta_nlos", self.beta_nlos)?;
        positive("blockage_decay_m", self.blockage_decay_m)?;
        positive("bs_density", self.bs_density)?;
        positive("ref_dist_m", self.ref_dist_m)?;
        if !(self.phi_split > 0.0 && self.phi_split < 1.0) {
            return Err(Error::param(
                "phi_split",
                format!("must lie strictly inside (0, 1), got {}", self.phi_split),
            ));
        }
        if !(self.eta_rfdc >= 0.0 && self.eta_rfdc <= 1.0) {
            return Err(Error::param(
                "eta_rfdc",
                format!("must lie in [0, 1], got {}", self.eta_rfdc),
            ));
        }
        if !(self.noise_watts.is_finite() && self.noise_watts >= 0.0) {
            return Err(Error::param(
                "noise_watts",
                format!("must be finite and >= 0, got {}", self.noise_watts),
            ));
        }
        positive("bandwidth_hz", self.bandwidth_hz)?;
        if !self.noise_figure_db.is_finite() {
            return Err(Error::param("noise_figure_db", "must be finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_power_at_two_ghz() {
        let dbm = noise_dbm(2e9, 10.0);
        // -174 + 93.0103 + 10
        assert!((dbm - (-70.9897)).abs() < 1e-4, "{dbm}");
        assert!((dbm - (-71.0)).abs() < 0.02);
        let w = dbm_to_watts(dbm);
        assert!((w / 7.962e-11 - 1.0).abs() < 1e-3, "{w}");
    }

    #[test]
    fn transmit_power_43_dbm() {
        assert!((dbm_to_watts(43.0) - 19.9526).abs() < 1e-4);
        assert!((watts_to_dbm(dbm_to_watts(43.0)) - 43.0).abs() < 1e-12);
    }

    #[test]
    fn defaults_are_valid() {
        let p = SystemParams::default();
        p.validate().unwrap();
        assert!((p.beta_nlos / p.beta_los - 10f64.powf(-2.7)).abs() < 1e-15);
        // (λ/4π)² at 38 GHz
        assert!((p.beta_los / 3.942e-7 - 1.0).abs() < 1e-3, "{}", p.beta_los);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = SystemParams::default();
        p.beta_los = -1.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParam { key, .. }) if key == "beta_los"));
        let mut p = SystemParams::default();
        p.phi_split = 1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::default();
        p.alpha_nlos = 1.5;
        assert!(p.validate().is_err());
        let mut p = SystemParams::default();
        p.m_bs = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rate_reading_inverts_length() {
        let mut p = SystemParams::default();
        p.blockage_reading = BlockageReading::Rate;
        p.blockage_decay_m = 0.01;
        assert!((p.los_decay_length() - 100.0).abs() < 1e-12);
    }
}
