//! Simulation library for secure multi-hop routing in an OFDM-based
//! underwater acoustic sensor network.
//!
//! Sensor nodes deployed in a vertical plane report data to a sink on the
//! water surface while a passive eavesdropper listens in. At every hop the
//! sender jointly picks the next relay and the per-subcarrier transmit
//! powers so that the hop's secrecy capacity (legitimate-channel capacity
//! minus the eavesdropper's capacity, floored at zero) is maximized, under
//! a total power budget. The per-hop problem is solved by dual
//! decomposition: a closed-form inner power allocation, Lagrangian-based
//! relay selection, and a projected subgradient loop on the budget
//! multiplier. Classical depth-based routing serves as the baseline.
//!
//! Module map:
//! - [`acoustics`]: absorption, path loss, ambient-noise PSD, band integrals
//! - [`topology`]: seeded node deployment and distance/depth queries
//! - [`secrecy`]: per-subcarrier SNR, link noise profiles, secrecy capacity
//! - [`optimizer`]: the per-hop dual-decomposition solver and a grid oracle
//! - [`routing`]: multi-hop route construction for all four schemes
//! - [`experiment`]: Monte Carlo sweep driver, CSV output, aggregation
//! - [`validate`]: self-check suite exposed through the CLI

pub mod acoustics;
pub mod error;
pub mod experiment;
pub mod optimizer;
pub mod routing;
pub mod secrecy;
pub mod topology;
pub mod validate;

pub use acoustics::{db_to_linear, BandProfile, PropagationParams};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, TrialRecord};
pub use optimizer::{AllocationResult, SolveStatus, SolverConfig};
pub use routing::{DbrRule, PowerMode, RouteOptions, RouteResult, RouteStatus, Scheme};
pub use secrecy::LinkNoiseProfile;
pub use topology::{NetworkTopology, Node, NodeId, NodeKind, Region};
