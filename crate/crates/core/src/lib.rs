//! Deterministic round-based simulator and algorithm library for
//! energy-efficient data aggregation in wireless sensor networks.
//!
//! The crate models a field of battery-powered sensors that periodically
//! push data toward a sink. Routing is done by an ant-colony family
//! (Basic/ES/MM/ACS pheromone strategies) next to reconstructed comparison
//! baselines (ACA, PEDAP, PEDAP-PA, LMST, L-PEDAP). Runs are fully
//! deterministic given a seed, and every joule spent is accounted for in a
//! conservation ledger.

pub mod baselines;
pub mod energy;
pub mod metrics;
pub mod net;
pub mod rng;
pub mod routing;
pub mod sim;

pub use energy::EnergyModel;
pub use net::{NetworkGraph, NodeId, NodeState, Position, SinkPlacement};
pub use rng::RngStream;
pub use routing::{AlgorithmConfig, Variant};
