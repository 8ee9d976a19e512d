//! Harvested power and uplink rate in millimeter-wave networks where base
//! stations charge users by beamforming and users spend the energy on the
//! uplink.
//!
//! Base stations form a Poisson field; each link is LoS with probability
//! `exp(-r/ϱ)`, and users associate with the smallest path loss. Two
//! engines compute the same quantities:
//!
//! - [`analytic`] evaluates the mean harvested power, the stable uplink
//!   power and the SNR distribution by adaptive quadrature
//!   ([`quadrature`]) over closed-form association laws ([`netgeometry`])
//!   and the mean array gain ([`beamforming`]).
//! - [`montecarlo`] samples deployments and reports means with 95%
//!   intervals, plus the SINR rate, which has no closed form here.
//!
//! [`harness`] holds the TOML config loader, density sweeps and their
//! CSV/JSON output, and the self-test used by the `mmwpt` binary.
//!
//! ```
//! use mmwpt::{analytic, SystemParams};
//!
//! let p = SystemParams::default().with_density(1e-4);
//! let e = analytic::energy_report(&p).unwrap();
//! assert!(e.en2_mean_w < 0.1 * e.total_w);
//! ```

pub mod analytic;
pub mod beamforming;
pub mod error;
pub mod harness;
pub mod netgeometry;
pub mod montecarlo;
pub mod params;
pub mod quadrature;

pub use error::{Error, Result};
pub use params::SystemParams;
