//! Two-scale slab decomposition of a large cylinder, the glue edge sets, and
//! the tail-bound calculators used for upper large deviations of `τ`.

mod decomposition;
mod paths;
mod rate;

use core::fmt;

use crate::capacities::DistributionError;
use crate::lattice::GeometryError;
use crate::maxflow::FlowError;

pub use decomposition::{
    cardinality_bounds, cardinality_ladder, slab_decomposition, verify_cut_gluing, BoxPlacement,
    CardinalityLadder, CardinalityReport, DecompositionPlan, GluingReport, Slab, SlabGluing,
    SlabRule,
};
pub use paths::{disjoint_crossing_paths, pinned_boundary_witness, witness_size_bound, Witness};
pub use rate::{chebyshev_tail_bound, cramer_rate, RateFunction, TailBound, THETA_GRID_POINTS};

#[derive(Debug, Clone, PartialEq)]
pub enum DeviationError {
    Geometry(GeometryError),
    Flow(FlowError),
    Distribution(DistributionError),
    /// `ζ` below the minimal value `2d`.
    ZetaTooSmall { zeta: f64, minimum: f64 },
    /// Scales must satisfy `N ≥ n ≥ 1`.
    ScaleOrder { small: u32, big: u32 },
    Infeasible(&'static str),
    /// Capacities or graphs do not belong to the plan.
    Mismatch { expected: usize, found: usize },
    /// Some side length of the cylinder is below `ζ`.
    CylinderTooSmall { side: f64, zeta: f64 },
    NotOnBoundary,
    NoWitnessPath,
    EmptySample,
}

impl fmt::Display for DeviationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviationError::Geometry(e) => write!(f, "{e}"),
            DeviationError::Flow(e) => write!(f, "{e}"),
            DeviationError::Distribution(e) => write!(f, "{e}"),
            DeviationError::ZetaTooSmall { zeta, minimum } => {
                write!(f, "zeta = {zeta} is below the minimum {minimum}")
            }
            DeviationError::ScaleOrder { small, big } => {
                write!(f, "scales must satisfy N >= n >= 1, got n = {small}, N = {big}")
            }
            DeviationError::Infeasible(why) => write!(f, "decomposition infeasible: {why}"),
            DeviationError::Mismatch { expected, found } => {
                write!(f, "plan expects {expected} capacities, got {found}")
            }
            DeviationError::CylinderTooSmall { side, zeta } => {
                write!(f, "cylinder too small: side {side} is shorter than zeta = {zeta}")
            }
            DeviationError::NotOnBoundary => f.write_str("point is not on the boundary of the base"),
            DeviationError::NoWitnessPath => {
                f.write_str("no path between the half boundaries inside the neighbourhood")
            }
            DeviationError::EmptySample => f.write_str("empty sample"),
        }
    }
}

impl core::error::Error for DeviationError {}

impl From<GeometryError> for DeviationError {
    fn from(e: GeometryError) -> Self {
        DeviationError::Geometry(e)
    }
}

impl From<FlowError> for DeviationError {
    fn from(e: FlowError) -> Self {
        DeviationError::Flow(e)
    }
}

impl From<DistributionError> for DeviationError {
    fn from(e: DistributionError) -> Self {
        DeviationError::Distribution(e)
    }
}
