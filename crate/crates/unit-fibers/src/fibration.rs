//! Construction of the unit-sphere fibrations: the hypercomplex fibration of
//! a region of R^(2n+1) for n in {1, 3, 7}, the Villarceau-circle fibration of
//! the bialy (the open solid torus with major and minor radii 1), stacking,
//! and the numerical inverse maps from points back to containing fibers.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypercomplex::{imaginary_left_multiply, left_multiplication_matrix};
use crate::linalg::{complement, orthonormalize, vec_from, AffineSubspace};

/// Admissible fiber dimensions of the hypercomplex construction.
pub const STANDARD_NS: [usize; 3] = [1, 3, 7];

/// JSON schema version for Fiber and FibrationSpec records.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum FibrationError {
    #[error("fiber dimension {0} is not one of 1, 3, 7")]
    UnsupportedFiberDim(usize),
    #[error("expected a point of dimension {expected}, got {got}")]
    PointDimension { expected: usize, got: usize },
    #[error("point outside the fibration region: {0}")]
    OutOfRegion(String),
    #[error("no containing fiber found: {0}")]
    NotInRegion(String),
    #[error("invalid fibration spec: {0}")]
    InvalidSpec(String),
    #[error("malformed fiber record: {0}")]
    BadRecord(String),
}

/// A unit n-sphere in R^(2n+1): center, the orthonormal frame of its
/// containing (n+1)-plane, and the orthonormal frame of the orthogonal
/// n-dimensional normal space. The radius is 1 by definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    n: usize,
    center: DVector<f64>,
    containing_frame: Vec<DVector<f64>>,
    normal_frame: Vec<DVector<f64>>,
}

impl Fiber {
    pub fn new(
        n: usize,
        center: DVector<f64>,
        containing_frame: Vec<DVector<f64>>,
        normal_frame: Vec<DVector<f64>>,
    ) -> Result<Self, FibrationError> {
        let ambient = center.len();
        if containing_frame.len() != n + 1 || normal_frame.len() != ambient - (n + 1) {
            return Err(FibrationError::BadRecord(format!(
                "frame sizes {}+{} do not split R^{ambient} around an {n}-sphere",
                containing_frame.len(),
                normal_frame.len()
            )));
        }
        let all: Vec<DVector<f64>> = containing_frame
            .iter()
            .chain(normal_frame.iter())
            .cloned()
            .collect();
        let mut worst: f64 = 0.0;
        for (i, u) in all.iter().enumerate() {
            if u.len() != ambient {
                return Err(FibrationError::BadRecord("frame/center dimension mismatch".into()));
            }
            for (j, v) in all.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((u.dot(v) - target).abs());
            }
        }
        if worst > 1e-10 {
            return Err(FibrationError::BadRecord(format!(
                "combined frame not orthonormal (deviation {worst:.3e})"
            )));
        }
        Ok(Self {
            n,
            center,
            containing_frame,
            normal_frame,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn containing_frame(&self) -> &[DVector<f64>] {
        &self.containing_frame
    }

    pub fn normal_frame(&self) -> &[DVector<f64>] {
        &self.normal_frame
    }

    /// The affine (n+1)-plane containing the sphere.
    pub fn containing_plane(&self) -> AffineSubspace {
        AffineSubspace::from_orthonormal(self.center.clone(), self.containing_frame.clone())
            .expect("fiber frames are orthonormal by construction")
    }

    /// Point on the fiber at unit coordinates `u` (|u| = 1) in the containing
    /// frame.
    pub fn point_at(&self, u: &[f64]) -> DVector<f64> {
        let mut p = self.center.clone();
        for (c, f) in u.iter().zip(&self.containing_frame) {
            p += f * *c;
        }
        p
    }

    /// Exact Euclidean distance from `x` to the fiber (nearest point on the
    /// sphere, not on its plane).
    pub fn distance_to(&self, x: &DVector<f64>) -> f64 {
        let rel = x - &self.center;
        // subtract the in-plane part explicitly; the difference of squared
        // norms cancels catastrophically for points near the fiber
        let mut out = rel.clone();
        let mut in_plane_sq = 0.0;
        for f in &self.containing_frame {
            let c = f.dot(&rel);
            in_plane_sq += c * c;
            out -= f * c;
        }
        let a = in_plane_sq.sqrt();
        (a - 1.0).hypot(out.norm())
    }

    pub fn to_record(&self) -> FiberRecord {
        FiberRecord {
            schema: SCHEMA_VERSION,
            n: self.n,
            center: self.center.iter().cloned().collect(),
            containing_frame: self
                .containing_frame
                .iter()
                .map(|f| f.iter().cloned().collect())
                .collect(),
            normal_frame: self
                .normal_frame
                .iter()
                .map(|f| f.iter().cloned().collect())
                .collect(),
        }
    }

    pub fn from_record(r: &FiberRecord) -> Result<Self, FibrationError> {
        Self::new(
            r.n,
            vec_from(&r.center),
            r.containing_frame.iter().map(|f| vec_from(f)).collect(),
            r.normal_frame.iter().map(|f| vec_from(f)).collect(),
        )
    }
}

/// Stable JSON form of a fiber.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FiberRecord {
    pub schema: u32,
    pub n: usize,
    pub center: Vec<f64>,
    pub containing_frame: Vec<Vec<f64>>,
    pub normal_frame: Vec<Vec<f64>>,
}

/// Which of the two mirror-image Villarceau families to use. The right-handed
/// family is the one with base parametrization
/// `t -> (r + cos t, +sqrt(1-r^2) sin t, r sin t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

/// Description of a fibration; `stacked` nests another spec one dimension down.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FibrationSpec {
    Standard { n: usize },
    Bialy,
    Stacked {
        base: Box<FibrationSpec>,
        interval: (f64, f64),
    },
}

impl FibrationSpec {
    pub fn standard(n: usize) -> Result<Self, FibrationError> {
        if !STANDARD_NS.contains(&n) {
            return Err(FibrationError::UnsupportedFiberDim(n));
        }
        Ok(Self::Standard { n })
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Standard { n } => 2 * n + 1,
            Self::Bialy => 3,
            Self::Stacked { base, .. } => base.ambient_dim() + 1,
        }
    }

    pub fn fiber_dim(&self) -> usize {
        match self {
            Self::Standard { n } => *n,
            Self::Bialy => 1,
            Self::Stacked { base, .. } => base.fiber_dim(),
        }
    }

    pub fn validate(&self) -> Result<(), FibrationError> {
        match self {
            Self::Standard { n } => {
                if !STANDARD_NS.contains(n) {
                    return Err(FibrationError::UnsupportedFiberDim(*n));
                }
            }
            Self::Bialy => {}
            Self::Stacked { base, interval } => {
                base.validate()?;
                if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite()
                {
                    return Err(FibrationError::InvalidSpec(format!(
                        "stack interval ({}, {}) is not a proper interval",
                        interval.0, interval.1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Containing fiber of `p`, by the kind-appropriate inverse map.
    pub fn locate(&self, p: &DVector<f64>) -> Result<Fiber, FibrationError> {
        self.validate()?;
        match self {
            Self::Standard { n } => {
                let y = locate_fiber(*n, p)?;
                standard_fiber(*n, &y, false)
            }
            Self::Bialy => Ok(bialy_locate(p)?.fiber),
            Self::Stacked { base, interval } => {
                let d = base.ambient_dim();
                if p.len() != d + 1 {
                    return Err(FibrationError::PointDimension {
                        expected: d + 1,
                        got: p.len(),
                    });
                }
                let t = p[d];
                if t <= interval.0 || t >= interval.1 {
                    return Err(FibrationError::OutOfRegion(format!(
                        "height {t} outside stack interval ({}, {})",
                        interval.0, interval.1
                    )));
                }
                let inner = base.locate(&p.rows(0, d).into_owned())?;
                Ok(embed_at_height(&inner, t))
            }
        }
    }
}

/// Stacks a fibration of a region of R^d into R^(d+1) over an open height
/// interval; the fiber through (p, t) is the base fiber through p at height t.
pub fn stack(base: FibrationSpec, interval: (f64, f64)) -> Result<FibrationSpec, FibrationError> {
    let spec = FibrationSpec::Stacked {
        base: Box::new(base),
        interval,
    };
    spec.validate()?;
    Ok(spec)
}

/// Embeds a fiber of R^d into the hyperplane of R^(d+1) at height `t`:
/// the center gains coordinate t, every frame vector gains a zero.
pub fn embed_at_height(fiber: &Fiber, t: f64) -> Fiber {
    let extend = |v: &DVector<f64>, last: f64| {
        let mut out: Vec<f64> = v.iter().cloned().collect();
        out.push(last);
        vec_from(&out)
    };
    let containing = fiber
        .containing_frame
        .iter()
        .map(|f| extend(f, 0.0))
        .collect();
    let mut normal: Vec<DVector<f64>> =
        fiber.normal_frame.iter().map(|f| extend(f, 0.0)).collect();
    // the new height direction is orthogonal to the stacked fiber's plane
    let d = fiber.ambient_dim();
    let mut e = DVector::zeros(d + 1);
    e[d] = 1.0;
    normal.push(e);
    Fiber::new(fiber.n, extend(&fiber.center, t), containing, normal)
        .expect("embedding preserves orthonormality")
}

/// The fiber S_y of the hypercomplex construction: the unit n-sphere centered
/// at (y, 0) in the (n+1)-plane orthogonal to the span of
/// `{(e_m y, delta_m)}_{m=1..n}`.
///
/// Requires |y| < 1, the region where disjointness is certified; `force`
/// constructs outside that ball without the guarantee.
pub fn standard_fiber(n: usize, y: &DVector<f64>, force: bool) -> Result<Fiber, FibrationError> {
    if !STANDARD_NS.contains(&n) {
        return Err(FibrationError::UnsupportedFiberDim(n));
    }
    if y.len() != n + 1 {
        return Err(FibrationError::PointDimension {
            expected: n + 1,
            got: y.len(),
        });
    }
    if !force && y.norm() >= 1.0 {
        return Err(FibrationError::OutOfRegion(format!(
            "|y| = {} >= 1",
            y.norm()
        )));
    }
    let ambient = 2 * n + 1;
    let y_slice: Vec<f64> = y.iter().cloned().collect();
    let mut generators = Vec::with_capacity(n);
    for m in 1..=n {
        let ey = imaginary_left_multiply(m, &y_slice)
            .map_err(|e| FibrationError::InvalidSpec(e.to_string()))?;
        let mut g = vec![0.0; ambient];
        g[..n + 1].copy_from_slice(&ey);
        g[n + m] = 1.0;
        generators.push(vec_from(&g));
    }
    let normal_frame =
        orthonormalize(&generators).map_err(|e| FibrationError::InvalidSpec(e.to_string()))?;
    let containing_frame = complement(&normal_frame, ambient);
    let mut center = vec![0.0; ambient];
    center[..n + 1].copy_from_slice(&y_slice);
    Fiber::new(n, vec_from(&center), containing_frame, normal_frame)
}

/// A Villarceau circle of the torus T_r (major radius 1, minor radius r),
/// rotated about the central axis by `phi`. Always a unit circle.
pub fn villarceau_fiber(r: f64, phi: f64, handedness: Handedness) -> Result<Fiber, FibrationError> {
    if !(0.0..1.0).contains(&r) || !r.is_finite() || !phi.is_finite() {
        return Err(FibrationError::OutOfRegion(format!(
            "minor radius {r} outside [0, 1)"
        )));
    }
    let s = (1.0 - r * r).sqrt();
    let sign = match handedness {
        Handedness::Right => 1.0,
        Handedness::Left => -1.0,
    };
    // base circle: center (r,0,0), plane frame {(1,0,0), (0, sign*s, r)}
    let rot = |v: [f64; 3]| {
        vec_from(&[
            phi.cos() * v[0] - phi.sin() * v[1],
            phi.sin() * v[0] + phi.cos() * v[1],
            v[2],
        ])
    };
    let center = rot([r, 0.0, 0.0]);
    let u = rot([1.0, 0.0, 0.0]);
    let w = rot([0.0, sign * s, r]);
    let normal = vec_from(&[
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ]);
    let nn = normal.norm();
    Fiber::new(1, center, vec![u, w], vec![normal / nn])
}

/// Result of locating a point inside the bialy.
#[derive(Debug, Clone)]
pub struct BialyLocation {
    pub r: f64,
    pub phi: f64,
    pub fiber: Fiber,
}

/// Minor-radius/rotation coordinates of `p` strictly inside the bialy, and
/// the right-handed Villarceau fiber through `p`.
pub fn bialy_locate(p: &DVector<f64>) -> Result<BialyLocation, FibrationError> {
    if p.len() != 3 {
        return Err(FibrationError::PointDimension {
            expected: 3,
            got: p.len(),
        });
    }
    let s = p[0].hypot(p[1]);
    let r = (s - 1.0).hypot(p[2]);
    if r >= 1.0 {
        return Err(FibrationError::OutOfRegion(format!(
            "(sqrt(x^2+y^2)-1)^2 + z^2 = {} >= 1",
            r * r
        )));
    }
    if r < 1e-14 {
        // on the core circle; phi = 0 by convention
        return Ok(BialyLocation {
            r: 0.0,
            phi: 0.0,
            fiber: villarceau_fiber(0.0, 0.0, Handedness::Right)?,
        });
    }
    // On the phi = 0 fiber the point at angle t sits at distance 1 + r cos t
    // from the axis and height r sin t, so t is recovered exactly.
    let t = p[2].atan2(s - 1.0);
    let sh = (1.0 - r * r).sqrt();
    // base-circle point at parameter t, before rotation
    let bx = r + t.cos();
    let by = sh * t.sin();
    let phi = p[1].atan2(p[0]) - by.atan2(bx);
    let fiber = villarceau_fiber(r, phi, Handedness::Right)?;
    if fiber.distance_to(p) > 1e-10 {
        return Err(FibrationError::NotInRegion(format!(
            "recovered fiber misses the point by {:.3e}",
            fiber.distance_to(p)
        )));
    }
    Ok(BialyLocation { r, phi, fiber })
}

const NEWTON_MAX_ITERS: usize = 50;
const NEWTON_CONVERGED: f64 = 1e-12;
const NEWTON_ACCEPT: f64 = 1e-10;
const NEWTON_RETRIES: usize = 16;

/// Numerical inverse of the hypercomplex construction: the center parameter y
/// with p on S_y, found by damped Newton iteration on the n+1 residual
/// equations (n normal-plane inner products plus the unit-distance equation).
pub fn locate_fiber(n: usize, p: &DVector<f64>) -> Result<DVector<f64>, FibrationError> {
    if !STANDARD_NS.contains(&n) {
        return Err(FibrationError::UnsupportedFiberDim(n));
    }
    let ambient = 2 * n + 1;
    if p.len() != ambient {
        return Err(FibrationError::PointDimension {
            expected: ambient,
            got: p.len(),
        });
    }
    let k = n + 1;
    let p1 = p.rows(0, k).into_owned();
    let p2 = p.rows(k, n).into_owned();
    let p2_norm_sq = p2.norm_squared();

    // The m-th residual <p - (y,0), (e_m y, delta_m)> reduces to
    // <p1, e_m y> + p2[m-1], which is linear in y with constant row p1^T L_m.
    let mut linear_rows = DMatrix::zeros(n, k);
    for m in 1..=n {
        let lm = left_multiplication_matrix(k, m)
            .map_err(|e| FibrationError::InvalidSpec(e.to_string()))?;
        for j in 0..k {
            let mut acc = 0.0;
            for i in 0..k {
                acc += p1[i] * lm[i][j];
            }
            linear_rows[(m - 1, j)] = acc;
        }
    }

    let residual = |y: &DVector<f64>| -> DVector<f64> {
        let mut f = DVector::zeros(k);
        let lin = &linear_rows * y;
        for m in 0..n {
            f[m] = lin[m] + p2[m];
        }
        f[n] = (&p1 - y).norm_squared() + p2_norm_sq - 1.0;
        f
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0xF1B3_5EED);
    let mut out_of_ball: Option<f64> = None;
    for attempt in 0..NEWTON_RETRIES {
        let mut y = p1.clone();
        if attempt > 0 {
            for v in y.iter_mut() {
                *v += rng.random_range(-0.2..0.2);
            }
        }
        let mut f = residual(&y);
        let mut fnorm = f.norm();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            if fnorm < NEWTON_CONVERGED {
                converged = true;
                break;
            }
            let mut jac = DMatrix::zeros(k, k);
            for m in 0..n {
                for j in 0..k {
                    jac[(m, j)] = linear_rows[(m, j)];
                }
            }
            let grad = (&p1 - &y) * -2.0;
            for j in 0..k {
                jac[(n, j)] = grad[j];
            }
            let lu = jac.lu();
            let Some(step) = lu.solve(&(-&f)) else { break };
            // damped step: halve until the residual stops increasing
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let trial = &y + &step * alpha;
                let ft = residual(&trial);
                if ft.norm() <= fnorm {
                    y = trial;
                    f = ft;
                    fnorm = f.norm();
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if (converged || fnorm < NEWTON_ACCEPT) && fnorm < NEWTON_ACCEPT {
            if y.norm() >= 1.0 {
                // a spurious root outside the parameter ball; keep trying
                // other seeds before concluding the point is unreachable
                out_of_ball = Some(y.norm());
                continue;
            }
            return Ok(y);
        }
    }
    if let Some(norm) = out_of_ball {
        return Err(FibrationError::OutOfRegion(format!(
            "every converged center parameter has |y| = {norm} >= 1"
        )));
    }
    Err(FibrationError::NotInRegion(
        "no containing fiber: residual equations have no solution near p".into(),
    ))
}
