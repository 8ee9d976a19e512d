//! Flat TOML configuration.
//!
//! One key per [`SystemParams`] field, in linear units, plus decibel
//! variants. A field may be given in at most one form. Absent keys take
//! the defaults; the LoS intercept defaults to free space at
//! `carrier_ghz`, the NLoS intercept sits 27 dB below it, and the noise
//! power follows from `bandwidth_hz` and `noise_figure_db`.
//!
//! ```toml
//! pmm_dbm = 43
//! m_bs = 64
//! bs_density_km2 = 100
//! noise_dbm = -71
//! interferer_model = "per_cell"
//! ```

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::params::{
    db_to_linear, dbm_to_watts, free_space_intercept, noise_dbm, BlockageReading,
    InterfererModel, SystemParams, DEFAULT_CARRIER_HZ, DEFAULT_NLOS_INTERCEPT_GAP_DB,
};

/// Every key the loader accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "pmm_watts",
    "pmm_dbm",
    "m_bs",
    "n_ue",
    "spacing_ratio",
    "alpha_los",
    "alpha_nlos",
    "beta_los",
    "beta_los_db",
    "beta_nlos",
    "beta_nlos_db",
    "carrier_ghz",
    "blockage_decay_m",
    "blockage_reading",
    "bs_density",
    "bs_density_km2",
    "ref_dist_m",
    "phi_split",
    "eta_rfdc",
    "noise_watts",
    "noise_dbm",
    "bandwidth_hz",
    "noise_figure_db",
    "interferer_model",
];

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SystemParams> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(format!("malformed config: {}", e.message())))?;
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
    }
    let t = Reader { table: &table };
    let d = SystemParams::default();

    let carrier_hz = match t.float("carrier_ghz")? {
        Some(ghz) if ghz > 0.0 => ghz * 1e9,
        Some(ghz) => return Err(Error::param("carrier_ghz", format!("must be > 0, got {ghz}"))),
        None => DEFAULT_CARRIER_HZ,
    };
    let beta_los = t
        .either("beta_los", "beta_los_db", db_to_linear)?
        .unwrap_or_else(|| free_space_intercept(carrier_hz));
    let beta_nlos = t
        .either("beta_nlos", "beta_nlos_db", db_to_linear)?
        .unwrap_or(beta_los * db_to_linear(-DEFAULT_NLOS_INTERCEPT_GAP_DB));
    let bandwidth_hz = t.float("bandwidth_hz")?.unwrap_or(d.bandwidth_hz);
    let noise_figure_db = t.float("noise_figure_db")?.unwrap_or(d.noise_figure_db);
    let noise_watts = t
        .either("noise_watts", "noise_dbm", dbm_to_watts)?
        .unwrap_or_else(|| dbm_to_watts(noise_dbm(bandwidth_hz, noise_figure_db)));

    let params = SystemParams {
        pmm_watts: t.either("pmm_watts", "pmm_dbm", dbm_to_watts)?.unwrap_or(d.pmm_watts),
        m_bs: t.count("m_bs")?.unwrap_or(d.m_bs),
        n_ue: t.count("n_ue")?.unwrap_or(d.n_ue),
        spacing_ratio: t.float("spacing_ratio")?.unwrap_or(d.spacing_ratio),
        alpha_los: t.float("alpha_los")?.unwrap_or(d.alpha_los),
        alpha_nlos: t.float("alpha_nlos")?.unwrap_or(d.alpha_nlos),
        beta_los,
        beta_nlos,
        blockage_decay_m: t.float("blockage_decay_m")?.unwrap_or(d.blockage_decay_m),
        blockage_reading: t
            .choice("blockage_reading", &[
                ("decay_length", BlockageReading::DecayLength),
                ("rate", BlockageReading::Rate),
            ])?
            .unwrap_or(d.blockage_reading),
        bs_density: t
            .either("bs_density", "bs_density_km2", |v| v * 1e-6)?
            .unwrap_or(d.bs_density),
        ref_dist_m: t.float("ref_dist_m")?.unwrap_or(d.ref_dist_m),
        phi_split: t.float("phi_split")?.unwrap_or(d.phi_split),
        eta_rfdc: t.float("eta_rfdc")?.unwrap_or(d.eta_rfdc),
        noise_watts,
        bandwidth_hz,
        noise_figure_db,
        interferer_model: t
            .choice("interferer_model", &[
                ("independent_ppp", InterfererModel::IndependentPpp),
                ("per_cell", InterfererModel::PerCell),
            ])?
            .unwrap_or(d.interferer_model),
    };
    params.validate()?;
    Ok(params)
}

struct Reader<'a> {
    table: &'a Table,
}

impl Reader<'_> {
    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(Error::Config(format!(
                "key `{key}` must be a number, got {}",
                other.type_str()
            ))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<u32>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(v)) => u32::try_from(*v)
                .map(Some)
                .map_err(|_| Error::param(key, format!("must be a non-negative integer, got {v}"))),
            Some(other) => Err(Error::Config(format!(
                "key `{key}` must be an integer, got {}",
                other.type_str()
            ))),
        }
    }

    /// A value given either in linear form under `linear` or under `alt`,
    /// converted by `conv`.
    fn either(&self, linear: &str, alt: &str, conv: impl Fn(f64) -> f64) -> Result<Option<f64>> {
        match (self.float(linear)?, self.float(alt)?) {
            (Some(_), Some(_)) => Err(Error::Config(format!(
                "keys `{linear}` and `{alt}` set the same quantity; give only one"
            ))),
            (Some(v), None) => Ok(Some(v)),
            (None, Some(v)) => Ok(Some(conv(v))),
            (None, None) => Ok(None),
        }
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>> {
        let Some(v) = self.table.get(key) else {
            return Ok(None);
        };
        let s = v
            .as_str()
            .ok_or_else(|| Error::Config(format!("key `{key}` must be a string")))?;
        options
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, t)| Some(*t))
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                Error::Config(format!("key `{key}`: unknown value `{s}`, expected one of {names:?}"))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), SystemParams::default());
    }

    #[test]
    fn decibel_forms() {
        let p = parse_config("pmm_dbm = 43\nnoise_dbm = -71.0\nbs_density_km2 = 100").unwrap();
        assert!((p.pmm_watts - 19.953).abs() < 1e-3);
        assert!((p.noise_watts / 7.943e-11 - 1.0).abs() < 1e-3);
        assert!((p.bs_density - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn noise_follows_bandwidth() {
        let p = parse_config("bandwidth_hz = 1e9").unwrap();
        let q = SystemParams::default();
        assert!((q.noise_watts / p.noise_watts - 2.0).abs() < 1e-12);
    }

    #[test]
    fn carrier_sets_intercepts() {
        let p = parse_config("carrier_ghz = 28").unwrap();
        assert!((p.beta_los - free_space_intercept(28e9)).abs() < 1e-20);
        assert!((p.beta_nlos / p.beta_los - 10f64.powf(-2.7)).abs() < 1e-15);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_config("pmm_watts = 1\npmm_dbm = 30").unwrap_err().to_string();
        assert!(e.contains("pmm_watts") && e.contains("pmm_dbm"), "{e}");
        let e = parse_config("beta_los = -1").unwrap_err().to_string();
        assert!(e.contains("beta_los"), "{e}");
        let e = parse_config("m_bs = \"many\"").unwrap_err().to_string();
        assert!(e.contains("m_bs"), "{e}");
        let e = parse_config("bogus = 1").unwrap_err().to_string();
        assert!(e.contains("bogus"), "{e}");
        let e = parse_config("interferer_model = \"ring\"").unwrap_err().to_string();
        assert!(e.contains("interferer_model"), "{e}");
        assert!(parse_config("m_bs = [").is_err());
    }

    #[test]
    fn enums_parse() {
        let p = parse_config("interferer_model = \"per_cell\"\nblockage_reading = \"rate\"\nblockage_decay_m = 0.01")
            .unwrap();
        assert_eq!(p.interferer_model, InterfererModel::PerCell);
        assert!((p.los_decay_length() - 100.0).abs() < 1e-9);
    }
}
