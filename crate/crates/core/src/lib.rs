//! Hausdorff-codimension bounds for points whose orbits escape an open set
//! on average, with exact and empirical checks on two model systems.
//!
//! - [`bound`]: closed-form bound chain, threshold `δ_O` and the `(z, T)`
//!   optimisation.
//! - [`combinatorics`]: block-decomposition lemma, Stirling binomial bound,
//!   limsup dimension lemma and its box-counting counterpart.
//! - [`shift`]: exhaustive verification on the full binary shift.
//! - [`torus`]: hyperbolic toral automorphisms, metric cores, tessellations
//!   and escape-set sampling.

// `!(x > 0.0)` guards reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod combinatorics;
pub mod error;
pub mod numeric;
pub mod shift;
pub mod torus;

pub use bound::{
    b_of_z, c_of_t, codim_lower, delta_threshold, dim_upper, dim_upper_entropy_form,
    epsilon_from_z, phi, reference_bounds, schedule, z_from_epsilon, z_star, BoundReport,
    DeltaThreshold, EscapeParameters, ReferenceBounds, SystemConstants, TimeSchedule, ZStar,
};
pub use combinatorics::{
    binomial_vs_stirling, box_count_dimension, check_block_decomposition, discretization_gap,
    find_n0, limsup_dim_bound, min_high_blocks, BlockAverageVector, CoverLevel, CoverSchedule,
    IndexSet, StepFunction,
};
pub use error::{Error, Result};
pub use shift::{
    block_average, enumerate_a, enumerate_a_j, verify_bowen_ball, verify_markov, verify_uppcov,
    CylinderTarget, ShiftCoverReport, SymbolWord,
};
pub use torus::{
    equidistribution_decay, lemma_covering_count, sample_escape_set, sigma_core, tessellate,
    EmpiricalDimReport, EquidistributionConfig, EquidistributionReport, EscapeSampling,
    HyperbolicMap, Rect, RectUnion,
};
