//! Pair geometry of the hypercomplex construction (the intersection line of
//! two fiber planes and the three disjointness inequalities), sphere/plane
//! sections, the linkedness predicate, and sampling-based distance oracles.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fibration::Fiber;
use crate::hypercomplex::imaginary_left_multiply;
use crate::linalg::{affine_intersect, AffineSubspace};
use crate::sampling::fiber_samples;

/// Crossing points within the tolerance band around distance 1 from a sphere
/// flip a topological verdict; the predicate errors instead of guessing.
pub const CROSSING_BAND: f64 = 1e-10;

/// Margins below this do not count as a strict inequality.
pub const CERTIFICATE_MARGIN: f64 = 1e-12;

/// Sampled minimum distance below this fails the disjointness precondition of
/// the linkedness predicate.
pub const DISJOINTNESS_FLOOR: f64 = 1e-8;

const LINKED_PRECHECK_SAMPLES: usize = 128;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate pair: centers coincide (|v|^2 = {0:.3e})")]
    DegeneratePair(f64),
    #[error("fiber dimension mismatch: {0} vs {1}")]
    FiberMismatch(usize, usize),
    #[error("linkedness undefined: fibers intersect or touch (sampled distance {0:.3e})")]
    UndefinedLinkedness(f64),
    #[error("degenerate configuration: crossing point within {CROSSING_BAND:.0e} of the sphere")]
    DegenerateConfiguration,
    #[error("linkedness requires ambient dimension 2n+1, got {0} for n = {1}")]
    WrongAmbientDim(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// The full ledger for a fiber pair of the construction: the intersection
/// line of the two containing planes, the section circles' centers and radii
/// on it, and the margins of the three disjointness inequalities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntersectionGeometry {
    pub n: usize,
    /// Direction of the intersection line l of the two containing planes.
    pub v: Vec<f64>,
    pub v_norm_sq: f64,
    /// Nearest point on l to the first center.
    pub c_y: Vec<f64>,
    /// Nearest point on l to the second center.
    pub c_z: Vec<f64>,
    pub d_y_sq: f64,
    pub d_z_sq: f64,
    /// Section radius sqrt(1 - d_y^2); NaN when the sphere misses the line.
    pub r_y: f64,
    pub r_z: f64,
    /// Distance between the two nearest points.
    pub d: f64,
    /// Margin of d < r_y + r_z.
    pub ineq_a: f64,
    /// Margin of r_z < r_y + d.
    pub ineq_b: f64,
    /// Margin of r_y < r_z + d.
    pub ineq_c: f64,
}

impl IntersectionGeometry {
    /// The intersection line as an affine subspace (it passes through the
    /// origin in the construction's coordinates).
    pub fn line(&self) -> AffineSubspace {
        let v = DVector::from_column_slice(&self.v);
        let n = v.norm();
        AffineSubspace::from_orthonormal(DVector::zeros(self.v.len()), vec![v / n])
            .expect("normalized direction")
    }
}

/// Computes the pair ledger for centers y, z of the hypercomplex
/// construction: v = (y - z, <e_1 y, z>, ..., <e_n y, z>) and everything
/// derived from it.
pub fn pair_geometry(
    n: usize,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<IntersectionGeometry, GeometryError> {
    if y.len() != n + 1 || z.len() != n + 1 {
        return Err(GeometryError::InvalidInput(format!(
            "centers must lie in R^{}",
            n + 1
        )));
    }
    let ambient = 2 * n + 1;
    let y_s: Vec<f64> = y.iter().cloned().collect();
    let mut v = vec![0.0; ambient];
    for i in 0..n + 1 {
        v[i] = y[i] - z[i];
    }
    for m in 1..=n {
        let ey = imaginary_left_multiply(m, &y_s)
            .map_err(|e| GeometryError::InvalidInput(e.to_string()))?;
        v[n + m] = ey.iter().zip(z.iter()).map(|(a, b)| a * b).sum::<f64>();
    }
    let vv = DVector::from_column_slice(&v);
    let v_norm_sq = vv.norm_squared();
    if v_norm_sq < 1e-20 {
        return Err(GeometryError::DegeneratePair(v_norm_sq));
    }

    // embed the centers as (y, 0), (z, 0)
    let mut yc = DVector::zeros(ambient);
    let mut zc = DVector::zeros(ambient);
    for i in 0..n + 1 {
        yc[i] = y[i];
        zc[i] = z[i];
    }
    let c_y = &vv * (yc.dot(&vv) / v_norm_sq);
    let c_z = &vv * (zc.dot(&vv) / v_norm_sq);
    let d_y_sq = yc.norm_squared() - yc.dot(&vv).powi(2) / v_norm_sq;
    let d_z_sq = zc.norm_squared() - zc.dot(&vv).powi(2) / v_norm_sq;
    let r_y = (1.0 - d_y_sq).sqrt();
    let r_z = (1.0 - d_z_sq).sqrt();
    let d = (&c_y - &c_z).norm();

    Ok(IntersectionGeometry {
        n,
        v,
        v_norm_sq,
        c_y: c_y.iter().cloned().collect(),
        c_z: c_z.iter().cloned().collect(),
        d_y_sq,
        d_z_sq,
        r_y,
        r_z,
        d,
        ineq_a: r_y + r_z - d,
        ineq_b: r_y + d - r_z,
        ineq_c: r_z + d - r_y,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedDisjoint,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub margins: [f64; 3],
}

/// Certifies disjointness of the pair when all three inequality margins are
/// strictly positive; NaN margins (sphere missing the line) are inconclusive.
pub fn disjointness_certificate(g: &IntersectionGeometry) -> Certificate {
    let margins = [g.ineq_a, g.ineq_b, g.ineq_c];
    let ok = margins.iter().all(|&m| m > CERTIFICATE_MARGIN);
    Certificate {
        verdict: if ok {
            Verdict::CertifiedDisjoint
        } else {
            Verdict::Inconclusive
        },
        margins,
    }
}

/// Intersection of a unit fiber with an affine subspace.
#[derive(Debug, Clone)]
pub enum SphereSection {
    Empty,
    Point(DVector<f64>),
    /// A sphere of the stated radius inside the subspace spanned by `frame`
    /// around `center`; a one-vector frame means a point pair.
    Sphere {
        center: DVector<f64>,
        radius: f64,
        frame: Vec<DVector<f64>>,
    },
}

/// Intersects the fiber's sphere with an affine subspace: first cut the
/// subspace down to the fiber's containing plane, then classify by the
/// distance from the fiber center to that cut.
pub fn sphere_section(fiber: &Fiber, a: &AffineSubspace) -> Result<SphereSection, GeometryError> {
    if a.ambient_dim() != fiber.ambient_dim() {
        return Err(GeometryError::InvalidInput(format!(
            "ambient dimension mismatch: {} vs {}",
            a.ambient_dim(),
            fiber.ambient_dim()
        )));
    }
    let p = fiber.containing_plane();
    let cut = affine_intersect(a, &p).map_err(|e| GeometryError::InvalidInput(e.to_string()))?;
    let Some(m) = cut.subspace else {
        return Ok(SphereSection::Empty);
    };
    let proj = m.project(fiber.center());
    let dist_sq = (fiber.center() - &proj).norm_squared();
    let delta = 1.0 - dist_sq;
    let tol = 1e-10;
    if m.dim() == 0 {
        return Ok(if delta.abs() <= tol {
            SphereSection::Point(proj)
        } else {
            SphereSection::Empty
        });
    }
    if delta < -tol {
        Ok(SphereSection::Empty)
    } else if delta.abs() <= tol {
        Ok(SphereSection::Point(proj))
    } else {
        Ok(SphereSection::Sphere {
            center: proj,
            radius: delta.sqrt(),
            frame: m.frame().to_vec(),
        })
    }
}

/// Lemma-style linkedness: the second fiber crosses the first fiber's
/// containing plane exactly once inside and once outside the first sphere.
///
/// Requires disjoint fibers (sampled distance check) in R^(2n+1). Crossing
/// points within the tolerance band of the sphere error out rather than
/// silently flipping the verdict.
pub fn linked(f1: &Fiber, f2: &Fiber) -> Result<bool, GeometryError> {
    if f1.n() != f2.n() {
        return Err(GeometryError::FiberMismatch(f1.n(), f2.n()));
    }
    if f1.ambient_dim() != f2.ambient_dim() {
        return Err(GeometryError::FiberMismatch(f1.ambient_dim(), f2.ambient_dim()));
    }
    let n = f1.n();
    if f1.ambient_dim() != 2 * n + 1 {
        return Err(GeometryError::WrongAmbientDim(f1.ambient_dim(), n));
    }
    let sep = sampled_separation(f1, f2, LINKED_PRECHECK_SAMPLES);
    if sep <= DISJOINTNESS_FLOOR {
        return Err(GeometryError::UndefinedLinkedness(sep));
    }

    let section = sphere_section(f2, &f1.containing_plane())?;
    let classify = |x: &DVector<f64>| -> Result<std::cmp::Ordering, GeometryError> {
        let dist = (x - f1.center()).norm();
        if (dist - 1.0).abs() <= CROSSING_BAND {
            Err(GeometryError::DegenerateConfiguration)
        } else if dist < 1.0 {
            Ok(std::cmp::Ordering::Less)
        } else {
            Ok(std::cmp::Ordering::Greater)
        }
    };
    match section {
        SphereSection::Empty => Ok(false),
        SphereSection::Point(x) => {
            classify(&x)?;
            // a single tangential crossing is never once-per-component
            Ok(false)
        }
        SphereSection::Sphere {
            center,
            radius,
            frame,
        } => {
            if frame.len() != 1 {
                // a positive-dimensional section (e.g. coplanar circles)
                // cannot cross exactly once per component
                return Ok(false);
            }
            let p_plus = &center + &frame[0] * radius;
            let p_minus = &center - &frame[0] * radius;
            let a = classify(&p_plus)?;
            let b = classify(&p_minus)?;
            Ok(a != b)
        }
    }
}

/// Minimum of exact point-to-sphere distances over sampled points of each
/// fiber; cheap O(m) separation estimate used as the linkedness precondition.
pub fn sampled_separation(f1: &Fiber, f2: &Fiber, m: usize) -> f64 {
    let mut best = f64::INFINITY;
    for p in fiber_samples(f2, m) {
        best = best.min(f1.distance_to(&p));
    }
    for p in fiber_samples(f1, m) {
        best = best.min(f2.distance_to(&p));
    }
    best
}

/// Minimum pairwise Euclidean distance over `m` deterministic samples on each
/// sphere; the independent disjointness oracle.
pub fn min_distance_sampled(f1: &Fiber, f2: &Fiber, m: usize) -> Result<f64, GeometryError> {
    if m < 2 {
        return Err(GeometryError::InvalidInput(format!(
            "need at least 2 samples per fiber, got {m}"
        )));
    }
    let s1 = fiber_samples(f1, m);
    let s2 = fiber_samples(f2, m);
    let mut best = f64::INFINITY;
    for p in &s1 {
        for q in &s2 {
            let d = (p - q).norm();
            if d < best {
                best = d;
            }
        }
    }
    Ok(best)
}
