//! Harnesses that tie modulus estimates to the ring and general
//! `Q`-inequalities, plus the boundary probes.

mod cluster;
mod general;
mod recenter;
mod report;
mod ring;
mod weakflat;

pub use cluster::{cluster_probe, geometric_radii, ClusterConfig, ClusterProbe, ProbeLevel};
pub use general::verify_general_inequality;
pub use recenter::{check_minorization, recenter_annulus, MinorizationCheck, RecenterReport};
pub use report::{satisfied_with_slack, GridSpec, RadialWeight, ReportMetadata, VerificationReport};
pub use ring::{verify_ring_inequality, RingCheckConfig};
pub use weakflat::{weak_flatness_at, weak_flatness_probe, WeakFlatConfig, WeakFlatReport};
