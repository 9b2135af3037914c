//! Hyperbolic automorphisms of the 2-torus.
//!
//! A matrix `M ∈ SL(2, ℤ)` with `|tr M| > 2` has eigenvalues `λ_u > 1 > λ_u^-1`.
//! With the sup metric, `L = 1`, `λ_min = λ_max = η = ln λ_u`, and the
//! unstable line through `x` is `{x + h·u}`. Targets `O` are finite unions of
//! axis-aligned rectangles, so `μ(σ_r O)` is computed exactly.

pub mod equidistribution;
pub mod escape;
pub mod map;
pub mod region;
pub mod segment;
pub mod tessellation;

pub use equidistribution::{
    equidistribution_decay, equidistribution_estimate, EquidistributionConfig,
    EquidistributionPoint, EquidistributionReport,
};
pub use escape::{sample_escape_set, EmpiricalDimReport, EscapeSampling};
pub use map::{eigen_data, torus_distance, wrap, wrap_point, HyperbolicMap, Point};
pub use region::{
    grid_dilate, grid_erode, metric_duality_holds, neighborhood, random_duality_suite, random_rect,
    sigma_core, GridMask, Rect, RectUnion, Region,
};
pub use segment::fraction_in;
pub use tessellation::{
    bowen_inclusion, check_tiling, coveringballs_check, lemma_covering_count, tessellate,
    BallCover, BowenInclusion, OverlapCount, TilingCheck, UnstableSegment,
};
