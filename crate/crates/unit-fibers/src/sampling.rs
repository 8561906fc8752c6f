//! Deterministic seeded sampling: points in balls, directions on spheres, and
//! the per-fiber sample sets used by the distance and export oracles.
//!
//! All randomness goes through ChaCha8, a published portable stream cipher
//! generator, so identical seeds reproduce identical campaigns on every
//! platform.

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fibration::Fiber;

/// Fixed seed for the per-fiber sample point sets, so two calls on the same
/// fiber always use the same points.
const FIBER_SAMPLE_SEED: u64 = 0x5EED_F1BE;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the open ball of the given radius.
pub fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> DVector<f64> {
    let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let gv = DVector::from_vec(g);
    let u: f64 = rng.random_range(0.0..1.0f64);
    let r = radius * u.powf(1.0 / dim as f64);
    let n = gv.norm().max(1e-300);
    gv * (r / n)
}

/// Uniform direction on the unit sphere S^(dim-1).
pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    g.into_iter().map(|x| x / n).collect()
}

/// Deterministic unit coordinates for `m` samples of an n-sphere sitting in an
/// (n+1)-dimensional frame. Circles get uniform angles; higher spheres get a
/// seeded normalized-Gaussian point set, identical across calls.
pub fn sphere_coordinates(n: usize, m: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        (0..m)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        let mut rng = rng_from_seed(FIBER_SAMPLE_SEED ^ (n as u64));
        (0..m).map(|_| random_unit(&mut rng, n + 1)).collect()
    }
}

/// `m` deterministic sample points on the fiber itself.
pub fn fiber_samples(fiber: &Fiber, m: usize) -> Vec<DVector<f64>> {
    sphere_coordinates(fiber.n(), m)
        .iter()
        .map(|u| fiber.point_at(u))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::standard_fiber;
    use nalgebra::DVector;

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            let p = random_in_ball(&mut rng, 8, 0.95);
            assert!(p.norm() <= 0.95);
        }
    }

    #[test]
    fn fiber_samples_lie_on_fiber() {
        let y = DVector::from_column_slice(&[0.2, -0.3, 0.1, 0.4]);
        let f = standard_fiber(3, &y, false).unwrap();
        for p in fiber_samples(&f, 64) {
            assert!(((&p - f.center()).norm() - 1.0).abs() < 1e-12);
            assert!(f.distance_to(&p) < 1e-12);
        }
    }

    #[test]
    fn sphere_coordinates_deterministic() {
        assert_eq!(sphere_coordinates(3, 32), sphere_coordinates(3, 32));
    }
}
