//! Seeded random test surfaces.
//!
//! Convex samples are spheroids shifted along the axis and modulated by low
//! Legendre modes, kept only if every principal curvature is positive.
//! Star-shaped samples are `exp` of a random quadratic form in the
//! direction, which need not be convex or even mean convex.

use super::{curvature, SphereGrid, StarShapedSurface};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const MAX_ATTEMPTS: usize = 200;

/// Distance from the origin to a spheroid with semi-axes `(c, a, ..., a)`
/// centred at `shift` on the axis, along the unit direction with axial
/// component `x`.
fn shifted_spheroid_radius(x: f64, equatorial: f64, polar: f64, shift: f64) -> f64 {
    let a = x * x / (polar * polar) + (1.0 - x * x) / (equatorial * equatorial);
    let b = x * shift / (polar * polar);
    let c = shift * shift / (polar * polar) - 1.0;
    (b + (b * b - a * c).sqrt()) / a
}

/// A convex axisymmetric surface drawn from `seed`.
pub fn random_convex_axisymmetric(grid: Arc<SphereGrid>, seed: u64) -> Result<StarShapedSurface> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let equatorial: f64 = rng.gen_range(0.6..1.6);
        let polar: f64 = rng.gen_range(0.6..1.6);
        let shift = rng.gen_range(-0.4..0.4) * equatorial.min(polar);
        let e2 = rng.gen_range(-0.06..0.06);
        let e3 = rng.gen_range(-0.03..0.03);
        let label = format!("convex(seed={seed},a={equatorial:.4},c={polar:.4},z={shift:.4})");
        let surface = StarShapedSurface::from_fn(grid.clone(), label, |p| {
            let x = p[0];
            let p2 = 0.5 * (3.0 * x * x - 1.0);
            let p3 = 0.5 * (5.0 * x * x * x - 3.0 * x);
            shifted_spheroid_radius(x, equatorial, polar, shift) * (1.0 + e2 * p2 + e3 * p3)
        })?;
        if curvature(&surface)?.is_convex() {
            return Ok(surface);
        }
    }
    Err(Error::param(format!("no convex sample found for seed {seed}")))
}

/// A star-shaped surface `rho = exp(sum_ij c_ij p_i p_j + sum_i b_i p_i)`
/// with small random coefficients.
pub fn random_star_shaped(grid: Arc<SphereGrid>, seed: u64, amplitude: f64) -> Result<StarShapedSurface> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let linear: Vec<f64> = (0..n).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
    let quad: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
    let scale = rng.gen_range(0.5..2.0);
    let axisymmetric = grid.mode() == super::GridMode::Axisymmetric;
    let label = format!("star(seed={seed},amp={amplitude})");
    StarShapedSurface::from_fn(grid, label, |p| {
        // axisymmetric grids only see the axial component
        let (lin, q): (f64, f64) = if axisymmetric {
            (linear[0] * p[0], quad[0] * p[0] * p[0])
        } else {
            let lin = p.iter().zip(&linear).map(|(a, b)| a * b).sum();
            let q = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| quad[i * n + j] * p[i] * p[j]).sum();
            (lin, q)
        };
        scale * (lin + q).exp()
    })
}
