//! Numerical tolerances used across the crate and by the certification suite.
//!
//! Every threshold that decides a pass or a fail lives here so that it can be
//! audited in one place.

/// Relative slack for metric axiom checks, applied after normalising by the
/// largest entry.
pub const METRIC_AXIOM: f64 = 1e-12;

/// Absolute slack for the four-point bound of `h`.
pub const DELTA_BOUND: f64 = 1e-9;

/// Absolute slack for the `2 j~ <= h <= 2 j~ + 2 log 2` sandwich.
pub const SANDWICH: f64 = 1e-12;

/// Agreement between the closed-form Gromov product of `h` and the generic one.
pub const CLOSED_FORM: f64 = 1e-9;

/// Agreement of the unit-square four-point constant with `sqrt(2) - 1`.
pub const UNIT_SQUARE: f64 = 1e-12;

/// Absolute slack of the graph value `k((0,1),(0,e)) = 1` in the half-plane.
pub const QH_HALF_PLANE_UNIT: f64 = 0.02;

/// Multiple of the admission ratio allowed below the lower bound `k >= j`.
pub const QH_LOWER_SIGMA_FACTOR: f64 = 3.0;

/// Multiple of the admission ratio allowed above `k <= 4 A^2 j`.
pub const QH_UPPER_SIGMA_FACTOR: f64 = 3.0;

/// Relative tolerance on sequence-based boundary quantities.
pub const SEQUENCE: f64 = 0.05;

/// Absolute slack added to `10 delta` in the Busemann identity check.
pub const BUSEMANN_IDENTITY: f64 = 0.05;

/// Absolute slack of the half-plane Busemann values `b((0,s)) = -log s`.
pub const BUSEMANN_HALF_PLANE: f64 = 0.02;

/// Default stabilisation tolerance for Busemann values along an anchor sequence.
pub const BUSEMANN_STABILIZATION: f64 = 1e-3;

/// Relative tolerance on fitted distortion exponents.
pub const EXPONENT: f64 = 0.25;

/// Tighter exponent tolerance used when the expected exponent is exactly one.
pub const EXPONENT_UNIT: f64 = 0.10;

/// Slack factor on the large-ratio branch bound in the uniform case.
pub const LARGE_BRANCH: f64 = 1.25;

/// Largest accepted ratio of envelope residual rms to the spread of the data.
pub const FIT_QUALITY: f64 = 0.5;

/// Quantile used for envelope fits.
pub const ENVELOPE_QUANTILE: f64 = 0.99;

/// Ratio of refined to coarse uniformity constants above which the estimate
/// is reported as diverging.
pub const UNIFORMITY_DIVERGENCE: f64 = 1.5;

/// Smallest per-step increment of a tail of Gromov products that is read as
/// divergence to infinity.
pub const DIVERGENCE_STEP: f64 = 0.1;

/// Minimum number of products in a tail used for the divergence test.
pub const DIVERGENCE_MIN_TAIL: usize = 3;

/// Points closer than this multiple of their boundary distance are merged.
pub const DEDUP_RELATIVE: f64 = 1e-9;
