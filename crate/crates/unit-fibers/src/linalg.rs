//! Small dense affine linear algebra in R^d (d <= 15): orthonormal frames,
//! affine subspace intersection, projections and rank, with one global
//! rank/dependence threshold shared by all geometric predicates.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative singular-value threshold below which directions count as
/// dependent. Shared by every rank decision in the crate.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Singular values in `[ILL_CONDITIONED_FLOOR, rank_tol] * sigma_max` flag the
/// result as ill-conditioned rather than silently rounding the rank.
pub const ILL_CONDITIONED_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct LinalgConfig {
    pub rank_tol: f64,
}

impl Default for LinalgConfig {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("vector entries must be finite")]
    NonFinite,
    #[error("frame vectors are not orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),
}

/// An affine subspace: base point plus an orthonormal direction frame.
/// `k = 0` directions means a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    base: DVector<f64>,
    frame: Vec<DVector<f64>>,
}

impl AffineSubspace {
    /// Builds a subspace through `base` spanned by `directions`; the
    /// directions are orthonormalized and dependent ones dropped.
    pub fn new(base: DVector<f64>, directions: &[DVector<f64>]) -> Result<Self, LinalgError> {
        if base.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        for d in directions {
            if d.len() != base.len() {
                return Err(LinalgError::AmbientMismatch(base.len(), d.len()));
            }
        }
        let frame = orthonormalize(directions)?;
        Ok(Self { base, frame })
    }

    /// Builds from a frame that is already orthonormal; verified to 1e-10.
    pub fn from_orthonormal(
        base: DVector<f64>,
        frame: Vec<DVector<f64>>,
    ) -> Result<Self, LinalgError> {
        let mut worst: f64 = 0.0;
        for (i, u) in frame.iter().enumerate() {
            if u.len() != base.len() {
                return Err(LinalgError::AmbientMismatch(base.len(), u.len()));
            }
            for (j, v) in frame.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((u.dot(v) - target).abs());
            }
        }
        if worst > 1e-10 {
            return Err(LinalgError::NotOrthonormal(worst));
        }
        Ok(Self { base, frame })
    }

    pub fn point(base: DVector<f64>) -> Self {
        Self {
            base,
            frame: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    pub fn base(&self) -> &DVector<f64> {
        &self.base
    }

    pub fn frame(&self) -> &[DVector<f64>] {
        &self.frame
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let rel = x - &self.base;
        let mut out = self.base.clone();
        for u in &self.frame {
            out += u * u.dot(&rel);
        }
        out
    }

    /// Distance from `x` to the subspace.
    pub fn residual(&self, x: &DVector<f64>) -> f64 {
        (x - self.project(x)).norm()
    }
}

/// Modified Gram-Schmidt; dependent inputs (residual below threshold after
/// projection) are dropped.
pub fn orthonormalize(vectors: &[DVector<f64>]) -> Result<Vec<DVector<f64>>, LinalgError> {
    orthonormalize_with(vectors, &LinalgConfig::default())
}

pub fn orthonormalize_with(
    vectors: &[DVector<f64>],
    cfg: &LinalgConfig,
) -> Result<Vec<DVector<f64>>, LinalgError> {
    let mut frame: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        if let Some(first) = frame.first() {
            if v.len() != first.len() {
                return Err(LinalgError::AmbientMismatch(first.len(), v.len()));
            }
        }
        let mut r = v.clone();
        for u in &frame {
            let c = u.dot(&r);
            r -= u * c;
        }
        // second pass for numerical orthogonality
        for u in &frame {
            let c = u.dot(&r);
            r -= u * c;
        }
        let scale = v.norm().max(1.0);
        if r.norm() > cfg.rank_tol * scale {
            let n = r.norm();
            frame.push(r / n);
        }
    }
    Ok(frame)
}

/// Orthonormal basis of the orthogonal complement of `frame` in R^d.
pub fn complement(frame: &[DVector<f64>], ambient_dim: usize) -> Vec<DVector<f64>> {
    if frame.is_empty() {
        return (0..ambient_dim)
            .map(|i| {
                let mut e = DVector::zeros(ambient_dim);
                e[i] = 1.0;
                e
            })
            .collect();
    }
    let rows = DMatrix::from_fn(frame.len(), ambient_dim, |i, j| frame[i][j]);
    null_space(&rows, DEFAULT_RANK_TOL)
}

fn null_space(m: &DMatrix<f64>, rank_tol: f64) -> Vec<DVector<f64>> {
    let d = m.ncols();
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > rank_tol * sigma_max.max(1e-300))
        .count();
    let v_t = svd.v_t.expect("svd computed with V^T");
    // rows of V^T beyond the rank span the null space; V^T may have fewer
    // than d rows when nrows < ncols, so extend with a complement pass.
    let mut basis: Vec<DVector<f64>> = (rank..v_t.nrows())
        .map(|i| v_t.row(i).transpose())
        .collect();
    if basis.len() < d - rank {
        // nalgebra's thin SVD: recover missing null directions by projecting
        // out the row space and the found null vectors from the identity.
        let mut candidates: Vec<DVector<f64>> = (0..rank)
            .map(|i| v_t.row(i).transpose())
            .chain(basis.iter().cloned())
            .collect();
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            candidates.push(e);
        }
        let full = orthonormalize(&candidates).expect("finite candidates");
        basis = full.into_iter().skip(rank).collect();
        basis.truncate(d - rank);
    }
    basis
}

/// Result of intersecting two affine subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionResult {
    pub subspace: Option<AffineSubspace>,
    /// Set when a singular value fell in the ambiguous band
    /// `[ILL_CONDITIONED_FLOOR, rank_tol] * sigma_max`.
    pub ill_conditioned: bool,
}

impl IntersectionResult {
    pub fn is_empty(&self) -> bool {
        self.subspace.is_none()
    }
}

/// Affine intersection of `a` and `b` (point, line or higher subspace), or an
/// explicit empty marker for non-intersecting subspaces.
pub fn affine_intersect(a: &AffineSubspace, b: &AffineSubspace) -> Result<IntersectionResult, LinalgError> {
    affine_intersect_with(a, b, &LinalgConfig::default())
}

pub fn affine_intersect_with(
    a: &AffineSubspace,
    b: &AffineSubspace,
    cfg: &LinalgConfig,
) -> Result<IntersectionResult, LinalgError> {
    let d = a.ambient_dim();
    if b.ambient_dim() != d {
        return Err(LinalgError::AmbientMismatch(d, b.ambient_dim()));
    }
    // x is in the intersection iff N_a (x - base_a) = 0 and N_b (x - base_b) = 0,
    // where N_* are orthonormal bases of the direction complements.
    let na = complement(a.frame(), d);
    let nb = complement(b.frame(), d);
    let m = na.len() + nb.len();
    if m == 0 {
        // both subspaces are the whole space
        let frame = complement(&[], d);
        return Ok(IntersectionResult {
            subspace: Some(AffineSubspace::from_orthonormal(a.base.clone(), frame)?),
            ill_conditioned: false,
        });
    }
    let mut mat = DMatrix::zeros(m, d);
    let mut rhs = DVector::zeros(m);
    for (i, row) in na.iter().chain(nb.iter()).enumerate() {
        for j in 0..d {
            mat[(i, j)] = row[j];
        }
        let base = if i < na.len() { &a.base } else { &b.base };
        rhs[i] = row.dot(base);
    }

    let svd = mat.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > cfg.rank_tol * sigma_max.max(1e-300))
        .count();
    let ill_conditioned = svd.singular_values.iter().any(|&s| {
        s > ILL_CONDITIONED_FLOOR * sigma_max && s <= cfg.rank_tol * sigma_max
    });

    let u = svd.u.as_ref().expect("svd computed with U");
    let v_t = svd.v_t.as_ref().expect("svd computed with V^T");
    // minimum-norm least-squares solution
    let mut x = DVector::zeros(d);
    for i in 0..rank {
        let coeff = u.column(i).dot(&rhs) / svd.singular_values[i];
        x += v_t.row(i).transpose() * coeff;
    }
    let residual = (&mat * &x - &rhs).norm();
    let scale = rhs.norm().max(1.0);
    if residual > cfg.rank_tol * scale {
        return Ok(IntersectionResult {
            subspace: None,
            ill_conditioned,
        });
    }
    let frame = null_space(&mat, cfg.rank_tol);
    Ok(IntersectionResult {
        subspace: Some(AffineSubspace::from_orthonormal(x, frame)?),
        ill_conditioned,
    })
}

/// Rank of the stacked set of frame directions plus optional extra vectors.
pub fn span_dim(frames: &[&[DVector<f64>]], extra: &[DVector<f64>]) -> usize {
    span_dim_with(frames, extra, &LinalgConfig::default())
}

pub fn span_dim_with(frames: &[&[DVector<f64>]], extra: &[DVector<f64>], cfg: &LinalgConfig) -> usize {
    let vectors: Vec<&DVector<f64>> = frames
        .iter()
        .flat_map(|f| f.iter())
        .chain(extra.iter())
        .collect();
    if vectors.is_empty() {
        return 0;
    }
    let d = vectors[0].len();
    let mat = DMatrix::from_fn(vectors.len(), d, |i, j| vectors[i][j]);
    let svd = mat.svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > cfg.rank_tol * sigma_max)
        .count()
}

pub fn vec_from(slice: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(slice)
}
