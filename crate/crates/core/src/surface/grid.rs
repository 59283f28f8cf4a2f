use crate::error::{Error, Result};
use crate::exact_rnt::unit_sphere_area;
use crate::quadrature::{fejer_first, gauss_jacobi_symmetric, Differentiator};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Default polar resolution of axisymmetric grids.
pub const DEFAULT_AXISYMMETRIC_NODES: usize = 128;
/// Default `(n_theta, n_phi)` of full latitude–longitude grids.
pub const DEFAULT_FULL_RESOLUTION: (usize, usize) = (128, 256);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Surfaces of revolution about the `x_0` axis, any `n >= 3`.
    Axisymmetric,
    /// Latitude–longitude tensor grid, `n = 3` only.
    Full,
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridMode::Axisymmetric => f.write_str("axisymmetric"),
            GridMode::Full => f.write_str("full"),
        }
    }
}

/// A quadrature grid on the round sphere `S^(n-1)`.
///
/// Polar angle `theta` is measured from the `x_0` axis. Axisymmetric grids
/// carry one node per polar angle, weighted by the volume of the whole
/// symmetry orbit; full grids are row-major in `(theta, phi)`.
pub struct SphereGrid {
    n: usize,
    mode: GridMode,
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    weights: Vec<f64>,
    /// Axisymmetric: collocation derivative in `x = cos(theta)`.
    collocation: Option<Differentiator>,
    /// Full grid: per-row longitude wavenumber cutoff of the polar filter.
    filter_cutoff: Vec<usize>,
    fft: Option<FftPair>,
}

/// Forward and inverse longitude transforms.
type FftPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereGrid")
            .field("n", &self.n)
            .field("mode", &self.mode)
            .field("n_theta", &self.n_theta)
            .field("n_phi", &self.n_phi)
            .finish()
    }
}

impl SphereGrid {
    pub fn axisymmetric(n: usize, nodes: usize) -> Result<Arc<Self>> {
        if n < 3 {
            return Err(Error::param(format!("ambient dimension n = {n} must be at least 3")));
        }
        if nodes < 4 {
            return Err(Error::param(format!("need at least 4 polar nodes, got {nodes}")));
        }
        let a = 0.5 * (n as f64 - 3.0);
        let rule = gauss_jacobi_symmetric(nodes, a);
        // unit_sphere_area(n-1) = orbit volume * int (1-x^2)^a dx
        let orbit = unit_sphere_area(n - 2);
        // increasing theta = decreasing x
        let xs: Vec<f64> = rule.nodes.iter().rev().copied().collect();
        let weights: Vec<f64> = rule.weights.iter().rev().map(|w| w * orbit).collect();
        let theta = xs.iter().map(|x| x.acos()).collect();
        Ok(Arc::new(Self {
            n,
            mode: GridMode::Axisymmetric,
            n_theta: nodes,
            n_phi: 1,
            theta,
            phi: vec![0.0; nodes],
            weights,
            collocation: Some(Differentiator::new(&xs)),
            filter_cutoff: Vec::new(),
            fft: None,
        }))
    }

    pub fn full(n_theta: usize, n_phi: usize) -> Result<Arc<Self>> {
        if n_theta < 4 || n_phi < 8 || !n_phi.is_multiple_of(2) {
            return Err(Error::param(format!(
                "full grid needs n_theta >= 4 and even n_phi >= 8, got {n_theta} x {n_phi}"
            )));
        }
        let (thetas, fejer) = fejer_first(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut theta = Vec::with_capacity(n_theta * n_phi);
        let mut phi = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (t, w) in thetas.iter().zip(&fejer) {
            for k in 0..n_phi {
                theta.push(*t);
                phi.push(k as f64 * dphi);
                weights.push(w * dphi);
            }
        }
        // Keep longitude wavenumbers whose physical wavelength on the row is
        // not shorter than the polar spacing.
        let half = n_phi / 2;
        let filter_cutoff = thetas
            .iter()
            .map(|t| ((0.7 * half as f64 * t.sin()).floor() as usize).clamp(1, half))
            .collect();
        let mut planner = FftPlanner::new();
        let fft = Some((planner.plan_fft_forward(n_phi), planner.plan_fft_inverse(n_phi)));
        Ok(Arc::new(Self {
            n: 3,
            mode: GridMode::Full,
            n_theta,
            n_phi,
            theta,
            phi,
            weights,
            collocation: None,
            filter_cutoff,
            fft,
        }))
    }

    /// Grid for dimension `n` at the given resolution: full grids only for
    /// `n = 3`.
    pub fn with_mode(n: usize, mode: GridMode, n_theta: usize, n_phi: usize) -> Result<Arc<Self>> {
        match mode {
            GridMode::Axisymmetric => Self::axisymmetric(n, n_theta),
            GridMode::Full if n == 3 => Self::full(n_theta, n_phi),
            GridMode::Full => Err(Error::param(format!(
                "full latitude-longitude grids exist only for n = 3, got n = {n}"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Quadrature weights of the round measure; they sum to `omega_{n-1}`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smallest polar spacing between neighbouring nodes.
    pub fn min_polar_spacing(&self) -> f64 {
        match self.mode {
            GridMode::Full => PI / self.n_theta as f64,
            GridMode::Axisymmetric => {
                let mut best = self.theta[0].min(PI - self.theta[self.n_theta - 1]);
                for w in self.theta.windows(2) {
                    best = best.min(w[1] - w[0]);
                }
                best
            }
        }
    }

    /// Unit direction of node `i` in `R^n`. Axisymmetric nodes report the
    /// representative `(cos theta, sin theta, 0, ...)` of their orbit.
    pub fn direction(&self, i: usize) -> Vec<f64> {
        let (st, ct) = self.theta[i].sin_cos();
        let mut p = vec![0.0; self.n];
        p[0] = ct;
        match self.mode {
            GridMode::Axisymmetric => p[1] = st,
            GridMode::Full => {
                let (sp, cp) = self.phi[i].sin_cos();
                p[1] = st * cp;
                p[2] = st * sp;
            }
        }
        p
    }

    pub(crate) fn collocation(&self) -> Option<&Differentiator> {
        self.collocation.as_ref()
    }

    /// Value of a full-grid field at row `j` (possibly reflected through a
    /// pole) and column `k` (periodic).
    fn reflected(&self, field: &[f64], j: isize, k: isize) -> f64 {
        let nt = self.n_theta as isize;
        let np = self.n_phi as isize;
        let (row, shift) = if j < 0 {
            (-1 - j, np / 2)
        } else if j >= nt {
            (2 * nt - 1 - j, np / 2)
        } else {
            (j, 0)
        };
        let mut col = k + shift;
        if col >= np {
            col -= np;
        }
        field[(row * np + col) as usize]
    }

    /// Fourth-order first and second polar derivatives on a full grid. The
    /// stencil crosses each pole onto the antipodal meridian, so the field
    /// must be a scalar (even under the reflection).
    pub(crate) fn polar_derivatives(&self, field: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h = PI / self.n_theta as f64;
        let mut d1 = vec![0.0; field.len()];
        let mut d2 = vec![0.0; field.len()];
        for j in 0..self.n_theta as isize {
            for k in 0..self.n_phi as isize {
                let i = (j as usize) * self.n_phi + k as usize;
                let f0 = field[i];
                let fm2 = self.reflected(field, j - 2, k) - f0;
                let fm1 = self.reflected(field, j - 1, k) - f0;
                let fp1 = self.reflected(field, j + 1, k) - f0;
                let fp2 = self.reflected(field, j + 2, k) - f0;
                d1[i] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
                d2[i] = (-fm2 + 16.0 * fm1 + 16.0 * fp1 - fp2) / (12.0 * h * h);
            }
        }
        (d1, d2)
    }

    /// Fourth-order first and second longitude derivatives on a full grid.
    pub(crate) fn azimuthal_derivatives(&self, field: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h = 2.0 * PI / self.n_phi as f64;
        let np = self.n_phi;
        let mut d1 = vec![0.0; field.len()];
        let mut d2 = vec![0.0; field.len()];
        for j in 0..self.n_theta {
            let row = &field[j * np..(j + 1) * np];
            for k in 0..np {
                let at = |o: isize| {
                    let mut c = k as isize + o;
                    if c < 0 {
                        c += np as isize;
                    } else if c >= np as isize {
                        c -= np as isize;
                    }
                    row[c as usize] - row[k]
                };
                let (fm2, fm1, fp1, fp2) = (at(-2), at(-1), at(1), at(2));
                d1[j * np + k] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
                d2[j * np + k] = (-fm2 + 16.0 * fm1 + 16.0 * fp1 - fp2) / (12.0 * h * h);
            }
        }
        (d1, d2)
    }

    /// Removes longitude wavenumbers that the polar rows cannot resolve at
    /// the polar spacing. Row means are left untouched, so axisymmetric
    /// content passes through exactly. No-op on axisymmetric grids.
    pub fn filter_polar(&self, field: &mut [f64]) {
        let Some((fwd, inv)) = &self.fft else { return };
        let np = self.n_phi;
        let half = np / 2;
        let mut buf = vec![Complex::new(0.0, 0.0); np];
        for j in 0..self.n_theta {
            let cut = self.filter_cutoff[j];
            if cut >= half {
                continue;
            }
            let row = &mut field[j * np..(j + 1) * np];
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex::new(*v, 0.0);
            }
            fwd.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                let wave = k.min(np - k);
                if wave > cut {
                    *b = Complex::new(0.0, 0.0);
                }
            }
            inv.process(&mut buf);
            for (v, b) in row.iter_mut().zip(&buf) {
                *v = b.re / np as f64;
            }
        }
    }
}
