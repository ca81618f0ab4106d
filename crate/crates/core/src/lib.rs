//! Isometry invariants of finite and l-periodic point sets, exact Earth
//! Mover's Distance metrics between them, and a hierarchical near-duplicate
//! pipeline for collections of crystal structures.
//!
//! The main entry points:
//!
//! - [`geometry::PeriodicSet`] represents a finite or l-periodic point set.
//! - [`invariants`] computes PDD, higher-order PDD, AMD/ADA, PDA and the
//!   1-dimensional PSD with exact reconstruction.
//! - [`metrics`] compares distributions with exact Earth Mover's Distance
//!   under Minkowski or RMS ground metrics.
//! - [`dedup`] runs the staged ADA -> ADA2 -> PDA -> PDA2 near-duplicate
//!   filter over one or two datasets.
//! - [`cif`] and [`native`] ingest CIF files and the native JSON format.

pub mod cif;
pub mod dedup;
pub mod geometry;
pub mod invariants;
pub mod kdtree;
mod linalg;
pub mod metrics;
pub mod native;
pub mod psd;
#[cfg(test)]
pub(crate) mod testutil;
pub mod transport;

pub use geometry::{Ball, GeometryError, PeriodicSet};
pub use invariants::{InvariantError, MomentsMatrix, WeightedRowDistribution};
pub use metrics::{GroundMetric, MetricError, TransportPlan};
