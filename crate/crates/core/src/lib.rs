//! Hyperbolic-type metrics on sampled noncomplete metric spaces.
//!
//! The crate works with finite samples of a space `X` whose metric boundary
//! is sampled as well. From the boundary distance `d(x)` it builds the
//! metrics `h`, `j~`, `j` and a graph approximation of the quasihyperbolic
//! metric `k`, measures their Gromov hyperbolicity, represents boundary
//! points by anchor sequences, and constructs visual and Hamenstädt metrics
//! on the boundary at infinity. Distortion fits then compare these boundary
//! metrics with the ambient metric `d`.
//!
//! ```
//! use hyperbolization::prelude::*;
//!
//! let spec = SamplerSpec::new(Family::HalfPlane, 40, 6, 7);
//! let space = sample(&spec).unwrap();
//! let h = h_metric(&space);
//! let delta = delta_hyperbolicity(&h, DeltaMode::Exhaustive).unwrap();
//! assert!(delta.delta <= 4f64.ln() + 1e-9);
//! ```

pub mod boundary;
pub mod certify;
pub mod distortion;
pub mod domain;
pub mod error;
pub mod gromov;
pub mod hyper;
pub mod io;
pub mod metric;
pub mod numeric;
pub mod sampler;
pub mod space;
pub mod tolerance;

pub use error::{Error, Result};

/// Seeded generator used for every random choice in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Common imports.
pub mod prelude {
    pub use crate::boundary::{
        attach_anchors, boundary_gromov_product, busemann, chain_metrize, frink_bound_check, AnchorSchedule,
        AnchorSequence, AnchoredSpace, Base, BoundaryMetric, BusemannFunction, Endpoint,
    };
    pub use crate::distortion::{qm_distortion, qs_distortion, DistortionReport};
    pub use crate::domain::Domain;
    pub use crate::error::{Error, Result};
    pub use crate::gromov::{delta_hyperbolicity, gromov_product, rough_similarity_check, DeltaMode};
    pub use crate::hyper::{h_metric, j_metric, jtilde_metric, uniformity_estimate, QhGraph};
    pub use crate::metric::{cross_ratio, validate_metric, CrossPoint, MetricKind, MetricMatrix};
    pub use crate::sampler::{sample, Family, Grading, SamplerSpec};
    pub use crate::space::{SampledSpace, Site};
}
