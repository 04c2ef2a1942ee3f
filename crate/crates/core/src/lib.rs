//! Accelerated sticky particles on the line.
//!
//! Particles carry a mass, a velocity and a constant acceleration; they move
//! freely until adjacent ones meet, then stick together conserving mass,
//! momentum and force. This crate simulates the dynamics exactly
//! ([`simulate`]), rebuilds the cluster partition at any time from a
//! variational characterization ([`clusters_from_gvp`]), and checks the
//! resulting measure fields against the weak forms of the pressureless gas
//! equations in position and velocity space ([`gas`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod dynamics;
pub mod error;
pub mod flow;
pub mod fuzz;
pub mod gas;
pub mod gvp;
pub mod measure;
pub mod quadratic;
pub mod tolerance;

pub use data::{
    cluster_aggregates, cluster_aggregates_with, cluster_path, format_ranges, Aggregates, Cluster, InitialData,
    Particle, Partition, Summation,
};
pub use dynamics::{
    brute_force_partition, brute_force_partitions, next_collision, simulate, Collision, Merge, Segment, ShockEvent,
    ShockTimeline,
};
pub use error::{Error, Result};
pub use flow::{dermoune_identity_residuals, right_derivative_check, DermouneResiduals, FlowField};
pub use gas::TestFunction;
pub use gvp::{classical_partition, clusters_from_gvp, gvp_equivalence_check, GvpFunctional, GvpReport};
pub use measure::DiscreteMeasure;
pub use quadratic::{lemma_quadratic_dominance, quadratic_meet_times, Meet, QuadraticPath};
pub use tolerance::Tolerances;
