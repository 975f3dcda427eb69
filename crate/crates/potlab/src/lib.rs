//! # potlab
//!
//! A numerical laboratory for two extremal problems of potential theory on
//! compact sets `A ⊂ R^t`, posed for radial kernels `K(x,y) = f(|x−y|)`:
//!
//! * the **maximin polarization problem**: maximize, over N-point
//!   configurations, the minimum over `A` of the averaged potential
//!   `(1/N) Σ K(x, a_i)`;
//! * the **minimum energy problem**: minimize the pairwise energy
//!   `Σ_{i≠j} K(a_i, a_j)` and follow `E/N²` toward the continuous
//!   equilibrium energy.
//!
//! Both problems share one limit object, the equilibrium measure `μ_eq`
//! with constant potential `W_K`. The crate computes equilibrium measures
//! (closed forms where available, a simplex-constrained quadratic program
//! otherwise), evaluates and optimizes polarization, builds greedy energy
//! sequences, and measures weak-star convergence of counting measures
//! through a bounded-Lipschitz distance estimate. The `experiment` module
//! wires everything into seeded, byte-reproducible experiment runs behind
//! the `potlab` command line tool.
//!
//! Supported sets: intervals, circles, 2-spheres, solid balls, and unions
//! of disjoint closed parametric curves in the plane. Supported kernels:
//! Riesz `f(r) = r^{−s}` and shifted logarithmic `f(r) = −log(c·r)`.

pub mod energy;
pub mod experiment;
pub mod geometry;
pub mod kernels;
pub mod measures;
pub mod numerics;
pub mod polarization;

pub use energy::{
    discrete_energy, energy_asymptote_probe, energy_gradient, greedy_points, minimize_energy,
    EnergyOutcome, EnergyProbeRow, GreedySequence,
};
pub use geometry::{CompactSet, Ellipse, Mesh, Point};
pub use kernels::{Kernel, MinorantKernel, PairKernel};
pub use measures::{
    bl_distance, counting_measure, equilibrium_measure, equilibrium_measure_with, flatness_l1,
    interior_mass, AssumptionReport, AssumptionStatus, EquilibriumMeasure, EquilibriumOptions,
    Provenance, QuadratureMeasure,
};
pub use polarization::{
    maximin_solve, polarization, polarization_limit_probe, polarization_with, Configuration,
    LevelTrace, MaximinOutcome, PolarizationReport, PolarizeOptions, ProbeRow, SolveBudget,
};

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("mesh at resolution {resolution} needs more than {cap} nodes")]
    MeshCapacity { resolution: f64, cap: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("assumptions violated: {0}")]
    AssumptionsViolated(String),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
