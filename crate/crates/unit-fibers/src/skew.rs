//! The correspondence from unit-sphere fibers to skew affine n-planes, the
//! pairwise-skewness predicate, the Hurwitz-Radon function, and the two
//! existence criteria built on it.

use thiserror::Error;

use crate::fibration::Fiber;
use crate::linalg::{span_dim, AffineSubspace};

#[derive(Debug, Error, PartialEq)]
pub enum SkewError {
    #[error("argument must be a positive integer, got {0}")]
    NonPositive(u64),
    #[error("require d > n, got n = {n}, d = {d}")]
    BadDimensions { n: u64, d: u64 },
}

/// The affine n-plane through the fiber's center with the fiber's normal
/// space as direction: the plane orthogonal to the containing plane.
pub fn fiber_to_skew_plane(fiber: &Fiber) -> AffineSubspace {
    AffineSubspace::from_orthonormal(fiber.center().clone(), fiber.normal_frame().to_vec())
        .expect("fiber normal frame is orthonormal")
}

/// Two affine planes are skew when their directions together with the
/// connecting vector span the whole ambient space: independent directions and
/// no affine intersection.
pub fn skew(a: &AffineSubspace, b: &AffineSubspace) -> bool {
    let connect = b.base() - a.base();
    span_dim(&[a.frame(), b.frame()], &[connect]) == a.ambient_dim()
}

/// Hurwitz-Radon function: for q = odd * 2^(4a+b) with 0 <= b <= 3,
/// rho(q) = 2^b + 8a. Exact integer arithmetic.
pub fn hurwitz_radon(q: u64) -> Result<u64, SkewError> {
    if q == 0 {
        return Err(SkewError::NonPositive(q));
    }
    let e = q.trailing_zeros() as u64;
    let a = e / 4;
    let b = e % 4;
    Ok((1u64 << b) + 8 * a)
}

/// Ovsienko-Tabachnikov criterion: a skew fibration of R^d by n-planes exists
/// iff n <= rho(d - n) - 1.
pub fn skew_fibration_exists(n: u64, d: u64) -> Result<bool, SkewError> {
    if d <= n {
        return Err(SkewError::BadDimensions { n, d });
    }
    Ok(n + 1 <= hurwitz_radon(d - n)?)
}

/// Whether n can be the fiber dimension of a unit-sphere fibration of
/// R^(2n+1): exactly when n + 1 = rho(n + 1), i.e. n in {0, 1, 3, 7}.
pub fn unit_fibration_dimension_admissible(n: u64) -> bool {
    hurwitz_radon(n + 1).expect("n + 1 >= 1") == n + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::standard_fiber;
    use crate::geometry::linked;
    use crate::linalg::vec_from;
    use nalgebra::DVector;

    fn v(s: &[f64]) -> DVector<f64> {
        vec_from(s)
    }

    fn line(base: &[f64], dir: &[f64]) -> AffineSubspace {
        AffineSubspace::new(v(base), &[v(dir)]).unwrap()
    }

    #[test]
    fn fiber_to_skew_plane_examples() {
        // S_0 maps to the z-axis
        let f0 = standard_fiber(1, &v(&[0.0, 0.0]), false).unwrap();
        let q0 = fiber_to_skew_plane(&f0);
        assert!(q0.base().norm() < 1e-15);
        assert!((q0.frame()[0].abs() - v(&[0.0, 0.0, 1.0])).norm() < 1e-12);

        // S_{(0.5,0)} maps to the line through (0.5,0,0) with direction
        // proportional to (0, 0.5, 1)
        let f = standard_fiber(1, &v(&[0.5, 0.0]), false).unwrap();
        let q = fiber_to_skew_plane(&f);
        assert!((q.base() - v(&[0.5, 0.0, 0.0])).norm() < 1e-12);
        let e = v(&[0.0, 0.5, 1.0]);
        let e = &e / e.norm();
        assert!((q.frame()[0].abs() - e.abs()).norm() < 1e-12);
    }

    #[test]
    fn skew_examples() {
        let z_axis = line(&[0.0; 3], &[0.0, 0.0, 1.0]);
        let tilted = line(&[0.5, 0.0, 0.0], &[0.0, 0.5, 1.0]);
        assert!(skew(&z_axis, &tilted));

        let parallel = line(&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]);
        assert!(!skew(&z_axis, &parallel));

        let x_axis = line(&[0.0; 3], &[1.0, 0.0, 0.0]);
        assert!(!skew(&z_axis, &x_axis));
    }

    #[test]
    fn induced_skewness_for_construction_pairs() {
        use crate::sampling::{random_in_ball, rng_from_seed};
        let mut rng = rng_from_seed(41);
        for &n in &[1usize, 3, 7] {
            for _ in 0..200 {
                let y = random_in_ball(&mut rng, n + 1, 0.95);
                let z = random_in_ball(&mut rng, n + 1, 0.95);
                if (&y - &z).norm() < 1e-6 {
                    continue;
                }
                let fy = standard_fiber(n, &y, false).unwrap();
                let fz = standard_fiber(n, &z, false).unwrap();
                assert!(
                    skew(&fiber_to_skew_plane(&fy), &fiber_to_skew_plane(&fz)),
                    "non-skew images at n={n}"
                );
            }
        }
    }

    #[test]
    fn non_skew_implies_unlinked() {
        // curated non-skew configurations; every one must be unlinked
        let circle = |center: &[f64], u: &[f64], w: &[f64]| {
            let uu = v(u);
            let ww = v(w);
            let normal = v(&[
                uu[1] * ww[2] - uu[2] * ww[1],
                uu[2] * ww[0] - uu[0] * ww[2],
                uu[0] * ww[1] - uu[1] * ww[0],
            ]);
            let nn = normal.norm();
            Fiber::new(1, v(center), vec![uu, ww], vec![normal / nn]).unwrap()
        };
        let cases = [
            // shared normal direction: horizontal circles at different heights
            (
                circle(&[0.0; 3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
                circle(&[0.3, 0.1, 2.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
            ),
            // intersecting normal lines: z-axis and a line through (0,0,3)
            (
                circle(&[0.0; 3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
                circle(&[0.0, 0.0, 3.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]),
            ),
            // coplanar pair
            (
                circle(&[0.0; 3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
                circle(&[5.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
            ),
        ];
        for (f1, f2) in &cases {
            assert!(!skew(&fiber_to_skew_plane(f1), &fiber_to_skew_plane(f2)));
            assert!(!linked(f1, f2).unwrap());
        }
    }

    #[test]
    fn hurwitz_radon_values() {
        assert_eq!(hurwitz_radon(1).unwrap(), 1);
        assert_eq!(hurwitz_radon(2).unwrap(), 2);
        assert_eq!(hurwitz_radon(4).unwrap(), 4);
        assert_eq!(hurwitz_radon(8).unwrap(), 8);
        assert_eq!(hurwitz_radon(16).unwrap(), 9);
        assert_eq!(hurwitz_radon(12).unwrap(), 4);
        assert_eq!(hurwitz_radon(0).unwrap_err(), SkewError::NonPositive(0));
    }

    /// Independent route: factor out twos with a division loop instead of
    /// bit tricks.
    fn hurwitz_radon_oracle(mut q: u64) -> u64 {
        let mut e = 0u64;
        while q % 2 == 0 {
            q /= 2;
            e += 1;
        }
        let (a, b) = (e / 4, e % 4);
        let mut pow = 1u64;
        for _ in 0..b {
            pow *= 2;
        }
        pow + 8 * a
    }

    #[test]
    fn hurwitz_radon_matches_oracle() {
        for q in 1..=1_000_000u64 {
            assert_eq!(hurwitz_radon(q).unwrap(), hurwitz_radon_oracle(q));
        }
    }

    #[test]
    fn skew_fibration_exists_examples() {
        assert!(skew_fibration_exists(1, 3).unwrap());
        assert!(!skew_fibration_exists(2, 5).unwrap());
        assert!(skew_fibration_exists(0, 1).unwrap());
        assert!(skew_fibration_exists(3, 7).unwrap());
        assert!(skew_fibration_exists(7, 15).unwrap());
        assert_eq!(
            skew_fibration_exists(3, 3).unwrap_err(),
            SkewError::BadDimensions { n: 3, d: 3 }
        );
    }

    #[test]
    fn admissible_dimensions() {
        assert!(unit_fibration_dimension_admissible(3));
        assert!(!unit_fibration_dimension_admissible(15));
        let admissible: Vec<u64> = (0..=10_000)
            .filter(|&n| unit_fibration_dimension_admissible(n))
            .collect();
        assert_eq!(admissible, vec![0, 1, 3, 7]);
    }
}
