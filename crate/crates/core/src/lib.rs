//! Weighted length-minimizing networks and geodesics in finite-dimensional
//! `l_p` spaces, with numerical checks of their quantitative regularity.

pub mod error;
pub mod gauge;
pub mod network;
pub mod norm;
pub mod numeric;
pub mod quasihyp;
pub mod solver;
pub mod svg;
pub mod verify;
pub mod weight;

pub use error::{Error, Result};
pub use gauge::{DiniVerdict, Gauge, GaugeKind};
pub use network::{Ball, Network, Polyline, SegmentSet};
pub use norm::{ModulusCurve, NormSpec, SearchParams};
pub use quasihyp::{quasihyp_distance, quasihyp_regularity_report, QuasihypResult, RegularityReport};
pub use solver::{geodesic_solve, grid_oracle, steiner_solve, GridOracleParams, SolveParams};
pub use weight::{Domain, DomainKind, WeightField, WeightKind};
