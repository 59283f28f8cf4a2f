//! Star-shaped hypersurfaces `Sigma = { rho(p) p : p in S^(n-1) }` of `R^n`.
//!
//! Writing `w = log rho`, the induced metric and second fundamental form
//! with respect to the outward normal are
//!
//! ```text
//! g_ij = rho^2 (s_ij + w_i w_j)
//! h_ij = rho / W (s_ij + w_i w_j - Hess(w)_ij),   W = sqrt(1 + |grad w|^2)
//! ```
//!
//! with `s` the round metric. Everything in [`CurvatureData`] is derived from
//! these and the grid's derivative operators.

mod curvature;
mod grid;
pub mod corpus;
pub mod io;

pub use curvature::{curvature, CurvatureData};
pub use grid::{GridMode, SphereGrid, DEFAULT_AXISYMMETRIC_NODES, DEFAULT_FULL_RESOLUTION};

use crate::error::{Error, Result};
use crate::exact_rnt::unit_sphere_area;
use std::sync::Arc;

/// Positive radial function sampled on a sphere grid.
#[derive(Debug, Clone)]
pub struct StarShapedSurface {
    grid: Arc<SphereGrid>,
    rho: Vec<f64>,
    pub label: String,
}

impl StarShapedSurface {
    pub fn new(grid: Arc<SphereGrid>, rho: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if rho.len() != grid.len() {
            return Err(Error::param(format!(
                "radial function has {} values for a grid of {} nodes",
                rho.len(),
                grid.len()
            )));
        }
        if let Some(i) = rho.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::param(format!(
                "radial function must be positive and finite (node {i}: rho = {})",
                rho[i]
            )));
        }
        Ok(Self { grid, rho, label: label.into() })
    }

    /// Samples `rho(direction)` at every node.
    pub fn from_fn(
        grid: Arc<SphereGrid>,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let rho = (0..grid.len()).map(|i| f(&grid.direction(i))).collect();
        Self::new(grid, rho, label)
    }

    /// Ellipsoid with semi-axis `polar` along `x_0` and `equatorial` in every
    /// other direction.
    pub fn spheroid(grid: Arc<SphereGrid>, equatorial: f64, polar: f64) -> Result<Self> {
        if !(equatorial > 0.0 && polar > 0.0) {
            return Err(Error::param("spheroid semi-axes must be positive"));
        }
        let label = format!("spheroid(a={equatorial},c={polar})");
        Self::from_fn(grid, label, |p| {
            let axial = p[0] * p[0];
            let rest = 1.0 - axial;
            1.0 / (axial / (polar * polar) + rest / (equatorial * equatorial)).sqrt()
        })
    }

    /// Ellipsoid with one semi-axis per ambient coordinate.
    pub fn ellipsoid(grid: Arc<SphereGrid>, axes: &[f64]) -> Result<Self> {
        if axes.len() != grid.dim() || axes.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::param("ellipsoid needs one positive semi-axis per dimension"));
        }
        Self::from_fn(grid, format!("ellipsoid{axes:?}"), |p| {
            let s: f64 = p.iter().zip(axes).map(|(x, a)| x * x / (a * a)).sum();
            1.0 / s.sqrt()
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Replaces the radial values, keeping grid and label.
    pub fn with_rho(&self, rho: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), rho, self.label.clone())
    }

    /// Ambient position of node `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut p = self.grid.direction(i);
        p.iter_mut().for_each(|x| *x *= self.rho[i]);
        p
    }
}

/// Round sphere of the given radius centred at the origin.
pub fn make_sphere(grid: Arc<SphereGrid>, radius: f64) -> Result<StarShapedSurface> {
    if !(radius > 0.0) {
        return Err(Error::param(format!("sphere radius {radius} must be positive")));
    }
    let n = grid.len();
    StarShapedSurface::new(grid, vec![radius; n], format!("sphere(r={radius})"))
}

/// Ambient vector field sampled at surface points.
pub trait VectorField: Sync {
    fn eval(&self, x: &[f64]) -> Vec<f64>;
}

/// `E(x) = Q x / |x|^n`: the divergence-free radial field of charge `Q`
/// in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombField {
    pub n: usize,
    pub charge: f64,
}

impl VectorField for CoulombField {
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let scale = self.charge / r2.sqrt().powi(self.n as i32);
        x.iter().map(|v| v * scale).collect()
    }
}

pub fn area(data: &CurvatureData) -> f64 {
    data.area_weight.iter().sum()
}

pub fn total_mean_curvature(data: &CurvatureData) -> f64 {
    data.mean.iter().zip(&data.area_weight).map(|(h, a)| h * a).sum()
}

pub fn total_intrinsic_curvature(data: &CurvatureData) -> f64 {
    data.scalar_intrinsic.iter().zip(&data.area_weight).map(|(r, a)| r * a).sum()
}

/// Yamabe quotient `Y = int R_k / |Sigma|^((n-3)/(n-1))` and the same
/// quotient relative to the unit round sphere on the same grid.
pub fn yamabe_quotients(surface: &StarShapedSurface) -> Result<(f64, f64)> {
    let y = yamabe_of(&curvature(surface)?, surface.dim());
    let sphere = make_sphere(surface.grid().clone(), 1.0)?;
    let y_round = yamabe_of(&curvature(&sphere)?, surface.dim());
    Ok((y, y / y_round))
}

fn yamabe_of(data: &CurvatureData, n: usize) -> f64 {
    let nf = n as f64;
    total_intrinsic_curvature(data) / area(data).powf((nf - 3.0) / (nf - 1.0))
}

/// Normalised flux `(1/omega_{n-1}) int <E, nu> dA` of per-node field
/// values.
pub fn charge_flux(data: &CurvatureData, field: &[Vec<f64>]) -> f64 {
    let n = data.dim;
    let flux: f64 = field
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let nu = data.normal(i);
            let dot: f64 = e.iter().zip(nu).map(|(a, b)| a * b).sum();
            dot * data.area_weight[i]
        })
        .sum();
    flux / unit_sphere_area(n - 1)
}

/// Samples a field at every surface point.
pub fn sample_field(surface: &StarShapedSurface, field: &dyn VectorField) -> Vec<Vec<f64>> {
    (0..surface.grid().len()).map(|i| field.eval(&surface.point(i))).collect()
}
