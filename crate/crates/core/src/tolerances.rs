//! Numeric tolerances and defaults, in one place so tests and reports can cite them.

/// Root finder stopping tolerance (relative step size).
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: usize = 200;

/// Relative modulus below which float coefficients are treated as zero.
pub const FLOAT_PRUNE: f64 = 1e-12;

/// Trigonometric fit: residual at sample points, validation grid and the
/// minimum strand distance on it.
pub const FIT_RESIDUAL: f64 = 1e-9;
pub const VALIDATION_GRID: usize = 1024;
pub const STRAND_SEPARATION: f64 = 0.05;
pub const FIT_MAX_UPSAMPLING: usize = 8;
pub const DEFAULT_CROSSING_OFFSET: f64 = 0.5;
/// Shapes scanned by the realization pipeline: crossing offsets and
/// (minority, majority) sign dwell pairs.
pub const FIT_OFFSETS: &[f64] = &[0.4, 0.45, 0.5];
pub const FIT_DWELLS: &[(usize, usize)] = &[(1, 1), (2, 6), (3, 12)];

/// Origin-avoidance margin in curve units and the candidate scan.
pub const ORIGIN_MARGIN: f64 = 1e-2;
pub const SHIFT_RADIUS0: f64 = 0.05;
pub const SHIFT_RINGS: usize = 7;
pub const SHIFT_DIRECTIONS: usize = 16;

/// Argument profiles.
pub const DEFAULT_GRID: usize = 4096;
pub const CERT_MARGIN: f64 = 1e-3;
/// Relative magnitude floor below which a branch counts as vanishing.
pub const MAGNITUDE_FLOOR: f64 = 1e-9;
pub const PROFILE_STABLE_REL: f64 = 1e-6;
pub const PROFILE_MAX_REFINEMENTS: usize = 2;
/// Two critical values closer than this (relative to the column scale) collide.
pub const BRANCH_COLLISION: f64 = 1e-9;

/// Link sampling.
pub const SAMPLE_RESIDUAL: f64 = 1e-9;
pub const SAMPLE_MIN_REL_SEPARATION: f64 = 1e-3;
/// Inclusion radius of a computed root over its nearest-neighbour distance.
pub const SAMPLE_MAX_INCLUSION_RATIO: f64 = 0.25;
pub const SAMPLE_R0_EXPONENTS: std::ops::RangeInclusive<i32> = 3..=16;
pub const SAMPLE_MAX_REFINEMENTS: usize = 3;
pub const CROSSING_TIME_TOL: f64 = 1e-12;

/// Default seed for any randomized probe.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;
