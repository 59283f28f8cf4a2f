use super::grid::GridMode;
use super::StarShapedSurface;
use crate::error::{Error, Result};

/// Pointwise curvature of a star-shaped surface, one entry per grid node.
///
/// `mean` is the sum of principal curvatures with respect to the outward
/// normal, so convex surfaces have `H > 0`.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub dim: usize,
    pub mean: Vec<f64>,
    /// `|A|^2`, the sum of squared principal curvatures.
    pub norm_sq_a: Vec<f64>,
    /// Extrinsic scalar curvature `K = (H^2 - |A|^2) / 2`.
    pub k_ext: Vec<f64>,
    /// Intrinsic scalar curvature of the induced metric.
    pub scalar_intrinsic: Vec<f64>,
    /// Quadrature weight times area element.
    pub area_weight: Vec<f64>,
    pub min_principal: Vec<f64>,
    pub max_principal: Vec<f64>,
    /// `W = sqrt(1 + |grad log rho|^2)`; the radial speed that realises unit
    /// normal speed.
    pub graph_factor: Vec<f64>,
    /// Outward unit normals, `dim` components per node.
    normals: Vec<f64>,
}

impl CurvatureData {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.dim..(i + 1) * self.dim]
    }

    pub fn min_mean(&self) -> f64 {
        self.mean.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_mean(&self) -> f64 {
        self.mean.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest violation of `2K <= (n-2)/(n-1) H^2` over the nodes; negative
    /// when the inequality holds strictly everywhere.
    pub fn newton_maclaurin_excess(&self) -> f64 {
        let nf = self.dim as f64;
        let c = (nf - 2.0) / (nf - 1.0);
        self.mean
            .iter()
            .zip(&self.k_ext)
            .map(|(h, k)| 2.0 * k - c * h * h)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_convex(&self) -> bool {
        self.min_principal.iter().all(|&k| k > 0.0)
    }

    pub fn is_two_convex(&self) -> bool {
        self.mean.iter().all(|&h| h >= 0.0) && self.scalar_intrinsic.iter().all(|&r| r >= 0.0)
    }
}

/// Computes all curvature quantities of `surface`.
///
/// Axisymmetric grids differentiate `w = log rho` by polynomial collocation
/// in `cos(theta)` and obtain `R_k` intrinsically from the warped-product
/// form of the induced metric. Full grids use fourth-order differences and
/// the Gauss equation `R_k = H^2 - |A|^2`.
pub fn curvature(surface: &StarShapedSurface) -> Result<CurvatureData> {
    match surface.grid().mode() {
        GridMode::Axisymmetric => axisymmetric(surface),
        GridMode::Full => full(surface),
    }
}

struct Builder {
    dim: usize,
    out: CurvatureData,
}

impl Builder {
    fn new(dim: usize, len: usize) -> Self {
        Self {
            dim,
            out: CurvatureData {
                dim,
                mean: Vec::with_capacity(len),
                norm_sq_a: Vec::with_capacity(len),
                k_ext: Vec::with_capacity(len),
                scalar_intrinsic: Vec::with_capacity(len),
                area_weight: Vec::with_capacity(len),
                min_principal: Vec::with_capacity(len),
                max_principal: Vec::with_capacity(len),
                graph_factor: Vec::with_capacity(len),
                normals: Vec::with_capacity(len * dim),
            },
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        node: usize,
        h: f64,
        a2: f64,
        r_k: f64,
        da: f64,
        kmin: f64,
        kmax: f64,
        bw: f64,
        normal: &[f64],
    ) -> Result<()> {
        if !(da.is_finite() && da > 1e-300) || !h.is_finite() {
            return Err(Error::DegenerateMetric { node });
        }
        debug_assert_eq!(normal.len(), self.dim);
        let o = &mut self.out;
        o.mean.push(h);
        o.norm_sq_a.push(a2);
        o.k_ext.push(0.5 * (h * h - a2));
        o.scalar_intrinsic.push(r_k);
        o.area_weight.push(da);
        o.min_principal.push(kmin);
        o.max_principal.push(kmax);
        o.graph_factor.push(bw);
        o.normals.extend_from_slice(normal);
        Ok(())
    }
}

fn axisymmetric(surface: &StarShapedSurface) -> Result<CurvatureData> {
    let grid = surface.grid();
    let n = grid.dim();
    let nf = n as f64;
    let diff = grid.collocation().expect("axisymmetric grid carries a collocation matrix");
    let w: Vec<f64> = surface.rho().iter().map(|r| r.ln()).collect();
    let w_x = diff.apply(&w);
    let w_xx = diff.apply(&w_x);
    let xs: Vec<f64> = grid.theta().iter().map(|t| t.cos()).collect();

    // f'(s) of the warped form ds^2 + (rho sin theta)^2 dS^(n-2), as a
    // function of x; its x-derivative gives the intrinsic curvature.
    let big_w: Vec<f64> = xs
        .iter()
        .zip(&w_x)
        .map(|(x, wx)| (1.0 + (1.0 - x * x) * wx * wx).sqrt())
        .collect();
    let f_prime: Vec<f64> = xs
        .iter()
        .zip(&w_x)
        .zip(&big_w)
        .map(|((x, wx), bw)| (x - (1.0 - x * x) * wx) / bw)
        .collect();
    let f_prime_x = diff.apply(&f_prime);

    let mut b = Builder::new(n, grid.len());
    let mut normal = vec![0.0; n];
    for i in 0..grid.len() {
        let x = xs[i];
        let st = (1.0 - x * x).sqrt();
        let rho = surface.rho()[i];
        let dw = -st * w_x[i];
        let ddw = (1.0 - x * x) * w_xx[i] - x * w_x[i];
        let bw = big_w[i];
        let k1 = (1.0 + dw * dw - ddw) / (rho * bw * bw * bw);
        let k2 = (1.0 + x * w_x[i]) / (rho * bw);
        let h = k1 + (nf - 2.0) * k2;
        let a2 = k1 * k1 + (nf - 2.0) * k2 * k2;
        let r_k = 2.0 * (nf - 2.0) * f_prime_x[i] / (rho * rho * bw)
            + (nf - 2.0) * (nf - 3.0) * k2 * k2;
        let da = grid.weights()[i] * rho.powi(n as i32 - 1) * bw;
        // p = (x, st, 0, ...), e_theta = (-st, x, 0, ...)
        normal[0] = (x + dw * st) / bw;
        normal[1] = (st - dw * x) / bw;
        b.push(i, h, a2, r_k, da, k1.min(k2), k1.max(k2), bw, &normal)?;
    }
    Ok(b.out)
}

fn full(surface: &StarShapedSurface) -> Result<CurvatureData> {
    let grid = surface.grid();
    let w: Vec<f64> = surface.rho().iter().map(|r| r.ln()).collect();
    let (w_t, w_tt) = grid.polar_derivatives(&w);
    let (w_p, w_pp) = grid.azimuthal_derivatives(&w);
    let (w_tp, _) = grid.polar_derivatives(&w_p);

    let mut b = Builder::new(3, grid.len());
    for i in 0..grid.len() {
        let (st, ct) = grid.theta()[i].sin_cos();
        let cot = ct / st;
        let rho = surface.rho()[i];
        // gradient and Hessian of w in the orthonormal frame (e_theta, e_phi)
        let g1 = w_t[i];
        let g2 = w_p[i] / st;
        let h11 = w_tt[i];
        let h12 = (w_tp[i] - cot * w_p[i]) / st;
        let h22 = w_pp[i] / (st * st) + cot * w_t[i];
        let bw2 = 1.0 + g1 * g1 + g2 * g2;
        let bw = bw2.sqrt();
        let m11 = 1.0 + g1 * g1 - h11;
        let m12 = g1 * g2 - h12;
        let m22 = 1.0 + g2 * g2 - h22;
        // shape operator (I - g g^T / W^2) M / (rho W)
        let c = 1.0 / (rho * bw);
        let p11 = 1.0 - g1 * g1 / bw2;
        let p12 = -g1 * g2 / bw2;
        let p22 = 1.0 - g2 * g2 / bw2;
        let s11 = c * (p11 * m11 + p12 * m12);
        let s12 = c * (p11 * m12 + p12 * m22);
        let s21 = c * (p12 * m11 + p22 * m12);
        let s22 = c * (p12 * m12 + p22 * m22);
        let h = s11 + s22;
        let det = s11 * s22 - s12 * s21;
        let a2 = s11 * s11 + 2.0 * s12 * s21 + s22 * s22;
        let disc = (0.25 * h * h - det).max(0.0).sqrt();
        let da = grid.weights()[i] * rho * rho * bw;
        let (sp, cp) = grid.phi()[i].sin_cos();
        let p = [ct, st * cp, st * sp];
        let et = [-st, ct * cp, ct * sp];
        let ep = [0.0, -sp, cp];
        let normal: [f64; 3] = std::array::from_fn(|k| (p[k] - g1 * et[k] - g2 * ep[k]) / bw);
        b.push(i, h, a2, 2.0 * det, da, 0.5 * h - disc, 0.5 * h + disc, bw, &normal)?;
    }
    Ok(b.out)
}
