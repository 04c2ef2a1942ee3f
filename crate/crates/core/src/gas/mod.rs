//! Weak-solution checks for the pressureless gas systems driven by the
//! sticky dynamics, in position space and in velocity space.

mod fields;
mod limits;
pub mod quadrature;
mod residuals;
mod test_function;

pub use fields::{
    congestion_delay, velocity_coincidence_times, velocity_space_fields, Coincidence, VelocityAtom, VelocityFields,
    VelocityMeasureField,
};
pub use limits::{
    corollary_conditions_check, initial_limits_check, CongestionPoint, CorollaryReport, InitialLimitsReport, LimitRow,
    LIMIT_TIMES,
};
pub use residuals::{
    jump_measures, merge_jump_integrals, position_space_residuals, position_space_residuals_with,
    threshold_crossing_measure, velocity_space_residuals, velocity_space_residuals_with, ResidualReport, ResidualRow,
    Space, QUAD_TOL, RESIDUAL_FLOOR,
};
pub use test_function::TestFunction;
