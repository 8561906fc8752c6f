//! Unit n-sphere fibrations of open regions of R^(2n+1) for n in {1, 3, 7},
//! and numerical certification of their defining properties: pairwise
//! disjointness, pairwise linkedness, and the induced skew fibration by
//! affine n-planes.
//!
//! The crate has two fibration constructions:
//!
//! * the hypercomplex construction, whose fiber S_y through a center
//!   parameter y (|y| < 1) is the unit n-sphere centered at (y, 0) in the
//!   plane orthogonal to the span of (e_1 y, delta_1), ..., (e_n y, delta_n),
//!   with e_m the imaginary units of the complex numbers, quaternions or
//!   octonions; and
//! * the Villarceau fibration of the bialy, the open solid torus with major
//!   and minor radii 1, filled by right-handed Villarceau unit circles.
//!
//! On top of that sit the pair geometry (the three disjointness
//! inequalities), the plane-crossing linkedness predicate, the fiber-to-skew
//! plane correspondence, the Hurwitz-Radon admissibility criteria, and a
//! seeded verification harness with a CLI.

pub mod fibration;
pub mod geometry;
pub mod harness;
pub mod hypercomplex;
pub mod linalg;
pub mod sampling;
pub mod skew;

pub use fibration::{
    bialy_locate, locate_fiber, stack, standard_fiber, villarceau_fiber, Fiber, FiberRecord,
    FibrationSpec, Handedness,
};
pub use geometry::{
    disjointness_certificate, linked, min_distance_sampled, pair_geometry, Certificate,
    IntersectionGeometry, SphereSection, Verdict,
};
pub use harness::{
    export_fibers, grid_fibers, linking_matrix, verify_construction, ExportFormat, LinkVerdict,
    SampleGrid, VerificationReport,
};
pub use linalg::AffineSubspace;
pub use skew::{
    fiber_to_skew_plane, hurwitz_radon, skew, skew_fibration_exists,
    unit_fibration_dimension_admissible,
};
