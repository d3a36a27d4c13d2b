//! Energy-efficiency resource management for small-cell C-RAN deployments
//! with split MAC and capacity-limited fronthaul.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] and [`deployment`] build a scenario and a frozen drop
//!   (geometry, pathloss and Rayleigh gains, max-RSRP association).
//! * [`model`] evaluates rates, power, EE and constraints of an
//!   [`Allocation`].
//! * [`tura`] solves one group's joint association, subchannel and power
//!   problem with quantum-behaved PSO.
//! * [`crc`] runs regret-matching learning among groups.
//! * [`harm`] alternates the two and hosts the RSRP baseline.
//! * [`oracle`] enumerates tiny instances exactly and checks correlated
//!   equilibria.
//! * [`experiment`] and [`emit`] run Monte Carlo sweeps and write CSV/JSON.

pub mod allocation;
pub mod crc;
pub mod deployment;
pub mod emit;
pub mod error;
pub mod experiment;
pub mod harm;
pub mod model;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod tura;

pub use allocation::Allocation;
pub use deployment::{generate_deployment, Deployment};
pub use error::{Error, Result};
pub use params::{Dims, ScenarioConfig, ScenarioParams};
