//! Simulation core for multi-channel hybrid cognitive ad-hoc networks.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithmic piece:
//!
//! * [`topology`]: cross and seven-cell terrain scenarios, hard-handoff association.
//! * [`radio`]: disc propagation, links, interference views, link quality,
//!   channel reuse and Poisson Boolean connectivity.
//! * [`metric`]: the machine check time metric (MTM) per node and network wide.
//! * [`scheduler`]: distributed channel assignment with clusterhead recovery,
//!   exclusive negotiation and tax-priced power control.
//! * [`routing`]: location-aided multi-route discovery, fractional flow
//!   splitting and the maximal permitted hop count.
//! * [`measure`]: sweep rows, the traffic requirement proxy and gain summaries.
//!
//! IO, configuration files and the command line live in the `mtm-sim` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assignment;
pub mod error;
pub mod geom;
pub mod measure;
pub mod metric;
pub mod radio;
pub mod routing;
pub mod scheduler;
pub mod topology;
pub mod world;

mod rng;

pub use assignment::{ChannelAssignment, ChannelId, PowerLevel};
pub use error::{Error, Result};
pub use geom::Point;
pub use metric::{mtm, total_mtm, MtmReport};
pub use radio::{InterferenceView, Link, LinkSet, RadioParams};
pub use scheduler::{run_schedule, Limits, ScheduleTrace, Termination};
pub use topology::{CellId, NodeId, TerrainConfig, Topology};
pub use world::World;
