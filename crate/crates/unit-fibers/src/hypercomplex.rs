//! Real composition algebras of dimension 2 (complex numbers), 4 (quaternions)
//! and 8 (octonions), built by iterated Cayley-Dickson doubling from the reals.
//!
//! The doubling convention is `(a,b)(c,d) = (ac - conj(d) b, da + b conj(c))`,
//! which fixes the basis order and all signs of the multiplication table.
//! Coordinate 0 is the real part; coordinates `1..dim-1` are the imaginary
//! units `e_1, ..., e_{dim-1}`. With this convention the quaternion units are
//! `i = e_1`, `j = e_2`, `k = e_3` and `ij = k`. The table is dumpable via the
//! CLI (`algebra-table`) as the single source of truth.

use once_cell::sync::Lazy;
use thiserror::Error;

/// Supported algebra dimensions.
pub const ALGEBRA_DIMS: [usize; 3] = [2, 4, 8];

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unsupported algebra dimension {0} (must be 2, 4 or 8)")]
    UnsupportedDimension(usize),
    #[error("imaginary unit index {index} out of range 1..{dim}")]
    UnitIndexOutOfRange { index: usize, dim: usize },
    #[error("coordinates must be finite")]
    NonFinite,
}

/// A point of the dimension-2/4/8 composition algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercomplexElement {
    dim: usize,
    coords: Vec<f64>,
}

impl HypercomplexElement {
    pub fn new(coords: Vec<f64>) -> Result<Self, AlgebraError> {
        let dim = coords.len();
        if !ALGEBRA_DIMS.contains(&dim) {
            return Err(AlgebraError::UnsupportedDimension(dim));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        Ok(Self { dim, coords })
    }

    /// The multiplicative unit `(1, 0, ..., 0)`.
    pub fn one(dim: usize) -> Result<Self, AlgebraError> {
        let mut coords = vec![0.0; dim];
        if coords.is_empty() {
            return Err(AlgebraError::UnsupportedDimension(dim));
        }
        coords[0] = 1.0;
        Self::new(coords)
    }

    /// The basis element `e_m` (`e_0` is the unit).
    pub fn basis(dim: usize, m: usize) -> Result<Self, AlgebraError> {
        if !ALGEBRA_DIMS.contains(&dim) {
            return Err(AlgebraError::UnsupportedDimension(dim));
        }
        if m >= dim {
            return Err(AlgebraError::UnitIndexOutOfRange { index: m, dim });
        }
        let mut coords = vec![0.0; dim];
        coords[m] = 1.0;
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn conjugate(&self) -> Self {
        let mut coords = self.coords.clone();
        for c in coords.iter_mut().skip(1) {
            *c = -*c;
        }
        Self {
            dim: self.dim,
            coords,
        }
    }
}

/// Cayley-Dickson product of the two elements.
///
/// Norm-multiplicative up to roundoff: `|ab| = |a||b|`.
pub fn multiply(
    a: &HypercomplexElement,
    b: &HypercomplexElement,
) -> Result<HypercomplexElement, AlgebraError> {
    if a.dim != b.dim {
        return Err(AlgebraError::DimensionMismatch(a.dim, b.dim));
    }
    let table = table_for(a.dim)?;
    let mut out = vec![0.0; a.dim];
    for (i, &ai) in a.coords.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.coords.iter().enumerate() {
            let (k, sign) = table.entry(i, j);
            out[k] += sign * ai * bj;
        }
    }
    HypercomplexElement::new(out)
}

/// Left multiplication `e_m * y` of a raw coordinate vector by the m-th
/// imaginary unit, `1 <= m <= dim-1`. The result is orthogonal to `y` and has
/// the same norm.
pub fn imaginary_left_multiply(m: usize, y: &[f64]) -> Result<Vec<f64>, AlgebraError> {
    let dim = y.len();
    let table = table_for(dim)?;
    if m == 0 || m >= dim {
        return Err(AlgebraError::UnitIndexOutOfRange { index: m, dim });
    }
    if y.iter().any(|c| !c.is_finite()) {
        return Err(AlgebraError::NonFinite);
    }
    let mut out = vec![0.0; dim];
    for (j, &yj) in y.iter().enumerate() {
        let (k, sign) = table.entry(m, j);
        out[k] += sign * yj;
    }
    Ok(out)
}

/// The matrix of `y -> e_m * y` in the standard basis, row-major `dim x dim`.
pub fn left_multiplication_matrix(dim: usize, m: usize) -> Result<Vec<Vec<f64>>, AlgebraError> {
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        cols.push(imaginary_left_multiply(m, &e)?);
    }
    // transpose columns into rows
    let mut rows = vec![vec![0.0; dim]; dim];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            rows[i][j] = v;
        }
    }
    Ok(rows)
}

/// One row of the multiplication table: `e_a * e_b = sign * e_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub sign: f64,
}

/// Full multiplication table of the dimension-`dim` algebra, in row-major
/// `(a, b)` order. Every product of basis elements is `+/-` another basis
/// element, so the table determines the algebra.
pub fn multiplication_table(dim: usize) -> Result<Vec<TableEntry>, AlgebraError> {
    let table = table_for(dim)?;
    let mut entries = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let (c, sign) = table.entry(a, b);
            entries.push(TableEntry { a, b, c, sign });
        }
    }
    Ok(entries)
}

struct BasisTable {
    dim: usize,
    // target index and sign for each (i, j)
    index: Vec<usize>,
    sign: Vec<f64>,
}

impl BasisTable {
    fn entry(&self, i: usize, j: usize) -> (usize, f64) {
        let p = i * self.dim + j;
        (self.index[p], self.sign[p])
    }
}

fn table_for(dim: usize) -> Result<&'static BasisTable, AlgebraError> {
    static TABLES: Lazy<[BasisTable; 3]> =
        Lazy::new(|| [build_table(2), build_table(4), build_table(8)]);
    match dim {
        2 => Ok(&TABLES[0]),
        4 => Ok(&TABLES[1]),
        8 => Ok(&TABLES[2]),
        _ => Err(AlgebraError::UnsupportedDimension(dim)),
    }
}

fn build_table(dim: usize) -> BasisTable {
    let mut index = vec![0usize; dim * dim];
    let mut sign = vec![0.0f64; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut a = vec![0.0; dim];
            let mut b = vec![0.0; dim];
            a[i] = 1.0;
            b[j] = 1.0;
            let prod = cd_multiply(&a, &b);
            let k = prod
                .iter()
                .position(|&v| v != 0.0)
                .expect("basis product is a signed basis element");
            index[i * dim + j] = k;
            sign[i * dim + j] = prod[k];
        }
    }
    BasisTable { dim, index, sign }
}

// Recursive Cayley-Dickson product; only used to seed the cached tables.
fn cd_multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![a[0] * b[0]];
    }
    let h = n / 2;
    let (p, q) = (&a[..h], &a[h..]);
    let (r, s) = (&b[..h], &b[h..]);
    // (p,q)(r,s) = (pr - conj(s) q, sp + q conj(r))
    let first = sub(&cd_multiply(p, r), &cd_multiply(&cd_conj(s), q));
    let second = add(&cd_multiply(s, p), &cd_multiply(q, &cd_conj(r)));
    let mut out = first;
    out.extend(second);
    out
}

fn cd_conj(a: &[f64]) -> Vec<f64> {
    let mut out = a.to_vec();
    for v in out.iter_mut().skip(1) {
        *v = -*v;
    }
    out
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
