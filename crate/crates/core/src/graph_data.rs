//! Rotationally symmetric graphical initial data.
//!
//! A radial graph `t = u(|x|)` over `{ |x| >= r_0 }` in `R^(n+1)` carries the
//! induced metric `g = f(r) dr^2 + r^2 h` with `f = 1 + u'^2`. Profiles are
//! described through `psi2 = 1 / f` and its radial derivative, which stay
//! bounded at a horizon where the graph turns vertical. In those terms
//!
//! ```text
//! R_g = -(n-1) psi2' / r + (n-1)(n-2) (1 - psi2) / r^2
//! ```
//!
//! The electric field is radial and divergence free, so its `g`-norm is
//! `|Q| / r^(n-1)`.

use crate::error::{Error, Result};
use crate::exact_rnt::{mass_constant, unit_sphere_area, RntParams};
use crate::quadrature::gauss_legendre;
use crate::surface::SphereGrid;
use serde::{Deserialize, Serialize};

/// Value of `psi2 = 1/f` at the inner boundary below which the graph counts
/// as meeting the horizon slice orthogonally.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-8;

/// Default outer radius of the bulk quadrature, in units of `r_start`.
pub const DEFAULT_OUTER_FACTOR: f64 = 1e4;

/// Pointwise profile data at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    /// `(du/dr)^2`.
    pub slope_sq: f64,
    /// `psi2 = 1 / (1 + (du/dr)^2)`.
    pub inv_factor: f64,
    /// `d psi2 / dr`.
    pub inv_factor_dr: f64,
}

/// Natural cubic spline through `(r, psi2)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TableProfile {
    r: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
    tail_mass: f64,
    tail_charge: f64,
    n: usize,
}

impl TableProfile {
    /// Beyond the last sample the profile continues as the charged
    /// Schwarzschild-type tail `1 - 2M/r^(n-2) + Q^2/r^(2n-4)` matching the
    /// last value, with `Q` the data's charge.
    pub fn new(n: usize, points: &[(f64, f64)], charge: f64) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidData("a profile table needs at least 4 rows".into()));
        }
        let (r, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        if r.windows(2).any(|w| !(w[1] > w[0])) || !(r[0] > 0.0) {
            return Err(Error::InvalidData("table radii must be positive and strictly increasing".into()));
        }
        if let Some(i) = y.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidData(format!(
                "psi2 = {} at r = {} lies outside [0, 1]",
                y[i], r[i]
            )));
        }
        if let Some(i) = y.iter().skip(1).position(|&v| v <= 0.0) {
            return Err(Error::InvalidData(format!(
                "psi2 vanishes at r = {} inside the data region",
                r[i + 1]
            )));
        }
        let second = natural_spline_second_derivatives(&r, &y);
        let last_r = *r.last().unwrap();
        let x = last_r.powi(n as i32 - 2);
        let tail_mass = 0.5 * (1.0 - y.last().unwrap()) * x + 0.5 * charge * charge / x;
        Ok(Self { r, y, second, tail_mass, tail_charge: charge, n })
    }

    /// `1 - psi2` and `d psi2 / dr`.
    fn deficit(&self, r: f64) -> (f64, f64) {
        let last = *self.r.last().unwrap();
        if r >= last {
            let p = self.n as i32 - 2;
            let x = r.powi(p);
            let q2 = self.tail_charge * self.tail_charge;
            let deficit = 2.0 * self.tail_mass / x - q2 / (x * x);
            let dx = p as f64 * x / r;
            let d = dx * (2.0 * self.tail_mass / (x * x) - 2.0 * q2 / (x * x * x));
            return (deficit, d);
        }
        let k = match self.r.partition_point(|&v| v <= r) {
            0 => 0,
            i => i - 1,
        };
        let (r0, r1) = (self.r[k], self.r[k + 1]);
        let h = r1 - r0;
        let a = (r1 - r) / h;
        let b = (r - r0) / h;
        let (m0, m1) = (self.second[k], self.second[k + 1]);
        let y = a * self.y[k] + b * self.y[k + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dy = (self.y[k + 1] - self.y[k]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0
            + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        (1.0 - y, dy)
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

/// Radial profile of a graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// The exact embedding of the time-symmetric RNT slice.
    Rnt(RntParams),
    /// `du/dr = u_rnt' + amplitude * exp(-rate r)`.
    Exponential { base: RntParams, amplitude: f64, rate: f64 },
    /// Mass function `m - q^2/(2 r^(n-2)) + amplitude * beta(r)`, with `beta`
    /// a quintic smoothstep rising from 0 at `inner` to 1 at `outer`. The
    /// bump adds `2(n-1) amplitude beta'(r) / r^(n-1)` to `R_g`.
    MassBump { base: RntParams, amplitude: f64, inner: f64, outer: f64 },
    Table(TableProfile),
    /// `u = 0`: a flat hyperplane.
    Flat,
}

fn smoothstep(r: f64, inner: f64, outer: f64) -> (f64, f64) {
    let w = outer - inner;
    let t = ((r - inner) / w).clamp(0.0, 1.0);
    let v = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let dv = 30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
    (v, dv)
}

/// `1 - psi2` and `d psi2 / dr` of the RNT slice.
fn rnt_deficit(p: &RntParams, r: f64) -> (f64, f64) {
    let pw = p.n as i32 - 2;
    let x = r.powi(pw);
    let dx = pw as f64 * x / r;
    let q2 = p.q * p.q;
    (2.0 * p.m / x - q2 / (x * x), dx * (2.0 * p.m / (x * x) - 2.0 * q2 / (x * x * x)))
}

impl Profile {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Profile::Rnt(p) | Profile::Exponential { base: p, .. } | Profile::MassBump { base: p, .. } => Some(p.n),
            Profile::Table(t) => Some(t.n),
            Profile::Flat => None,
        }
    }

    /// `psi2` and its derivative, finite up to and including the horizon.
    pub fn inv_factor(&self, r: f64) -> Result<(f64, f64)> {
        let (deficit, d) = self.deficit(r)?;
        Ok((1.0 - deficit, d))
    }

    /// `1 - psi2`, evaluated without cancellation far out, and `d psi2 / dr`.
    pub fn deficit(&self, r: f64) -> Result<(f64, f64)> {
        Ok(match self {
            Profile::Rnt(p) => rnt_deficit(p, r),
            Profile::Exponential { base, amplitude, rate } => {
                let (s0, _) = base.embedding_slope_sq(r)?;
                let e = amplitude * (-rate * r).exp();
                let a2 = base.lapse_squared(r);
                let (d0, _) = rnt_deficit(base, r);
                let extra = a2 * e * (2.0 * s0.sqrt() + e);
                ((d0 + extra) / (1.0 + extra), self.point(r)?.inv_factor_dr)
            }
            Profile::MassBump { base, amplitude, inner, outer } => {
                let (d0, d) = rnt_deficit(base, r);
                let x = r.powi(base.n as i32 - 2);
                let (b, db) = smoothstep(r, *inner, *outer);
                let bump = 2.0 * amplitude / x;
                let dbump = 2.0 * amplitude * (db / x - b * (base.n as f64 - 2.0) / (x * r));
                (d0 + bump * b, d - dbump)
            }
            Profile::Table(t) => t.deficit(r),
            Profile::Flat => (0.0, 0.0),
        })
    }

    /// Full pointwise data at `r`; the slope is infinite on the horizon, so
    /// this requires `r` strictly outside it.
    pub fn point(&self, r: f64) -> Result<ProfilePoint> {
        match self {
            Profile::Rnt(p) => {
                let (s, _) = p.embedding_slope_sq(r)?;
                let (deficit, dinv) = rnt_deficit(p, r);
                Ok(ProfilePoint { slope_sq: s, inv_factor: 1.0 - deficit, inv_factor_dr: dinv })
            }
            Profile::Exponential { base, amplitude, rate } => {
                let (s0, ds0) = base.embedding_slope_sq(r)?;
                let u0 = s0.sqrt();
                let e = amplitude * (-rate * r).exp();
                let slope = u0 + e;
                let dslope = 0.5 * ds0 / u0 - rate * e;
                // psi2 = a^2 / (1 + a^2 (2 u0 e + e^2)) with a^2 = 1 / (1 + s0)
                let a2 = base.lapse_squared(r);
                let inv = a2 / (1.0 + a2 * e * (2.0 * u0 + e));
                let s = slope * slope;
                let ds = 2.0 * slope * dslope;
                Ok(ProfilePoint { slope_sq: s, inv_factor: inv, inv_factor_dr: -ds * inv * inv })
            }
            _ => {
                let (inv, dinv) = self.inv_factor(r)?;
                if !(inv > 0.0) {
                    return Err(Error::Domain(format!("psi2 = {inv} at r = {r}: graph is vertical")));
                }
                Ok(ProfilePoint { slope_sq: (1.0 - inv) / inv, inv_factor: inv, inv_factor_dr: dinv })
            }
        }
    }
}

/// Radial graph over `{ |x| >= r_start }` with a radial Coulomb field of
/// charge `charge`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraphData {
    pub n: usize,
    pub r_start: f64,
    pub profile: Profile,
    pub charge: f64,
    pub label: String,
}

/// Mass integral split into its horizon and bulk contributions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassBreakdown {
    /// `c_n int_{Sigma_0} H`, with the round horizon's `H = (n-1)/r_start`.
    pub boundary_term: f64,
    /// `c_n int Theta R_g dM`: quadrature up to `r_max` plus tail.
    pub bulk_term: f64,
    pub bulk_quadrature: f64,
    pub tail_estimate: f64,
    /// Spread between two independent tail estimates.
    pub tail_uncertainty: f64,
    pub total: f64,
    /// `min (R_g - (n-1)(n-2)|E|_g^2)` over a radial sample grid.
    pub dec_residual_min: f64,
    pub r_max: f64,
    pub warnings: Vec<String>,
}

impl RadialGraphData {
    pub fn new(n: usize, r_start: f64, profile: Profile, charge: f64, label: impl Into<String>) -> Result<Self> {
        if n < 3 {
            return Err(Error::param(format!("dimension n = {n} must be at least 3")));
        }
        if !(r_start > 0.0 && r_start.is_finite()) {
            return Err(Error::param(format!("r_start = {r_start} must be positive")));
        }
        if !charge.is_finite() {
            return Err(Error::param("charge must be finite"));
        }
        if let Some(d) = profile.dim() {
            if d != n {
                return Err(Error::param(format!("profile dimension {d} differs from n = {n}")));
            }
        }
        match &profile {
            Profile::Rnt(p) | Profile::Exponential { base: p, .. } | Profile::MassBump { base: p, .. } => {
                if !(p.m > p.q.abs()) {
                    return Err(Error::param("graph profiles need m > |q| (the extremal slice has no graph)"));
                }
                let r_plus = p.horizon_radii()?.r_plus;
                if (r_plus - r_start).abs() > 1e-12 * r_plus {
                    return Err(Error::param(format!(
                        "r_start = {r_start} must equal the horizon radius {r_plus}"
                    )));
                }
            }
            Profile::Table(t) => {
                if (t.r[0] - r_start).abs() > 1e-12 * r_start {
                    return Err(Error::param("r_start must equal the first table radius"));
                }
            }
            Profile::Flat => {}
        }
        if let Profile::MassBump { inner, outer, amplitude, .. } = &profile {
            if !(*inner > r_start && outer > inner) || !amplitude.is_finite() {
                return Err(Error::param("mass bump needs r_start < inner < outer"));
            }
        }
        if let Profile::Exponential { amplitude, rate, .. } = &profile {
            if !(*rate > 0.0) || !amplitude.is_finite() {
                return Err(Error::param("exponential perturbation needs rate > 0"));
            }
        }
        let data = Self { n, r_start, profile, charge, label: label.into() };
        // the metric must stay non-degenerate away from the horizon
        for k in 1..=200 {
            let r = r_start * (DEFAULT_OUTER_FACTOR).powf(k as f64 / 200.0);
            let (inv, _) = data.profile.inv_factor(r)?;
            if !(inv > 0.0 && inv <= 1.0 + 1e-12) {
                return Err(Error::InvalidData(format!("psi2 = {inv} at r = {r} is outside (0, 1]")));
            }
        }
        Ok(data)
    }

    /// The exact RNT slice with its own field.
    pub fn rnt(params: RntParams) -> Result<Self> {
        let r_plus = params.horizon_radii()?.r_plus;
        let label = format!("rnt(n={},m={},q={})", params.n, params.m, params.q);
        Self::new(params.n, r_plus, Profile::Rnt(params), params.q, label)
    }

    /// Same data with the field charge multiplied by `factor`.
    pub fn with_charge_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.charge *= factor;
        out.label = format!("{} x{factor} charge", self.label);
        out
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > self.r_start) {
            return Err(Error::Domain(format!("r = {r} must exceed r_start = {}", self.r_start)));
        }
        Ok(())
    }

    /// `f(r) = 1 + (du/dr)^2`.
    pub fn induced_metric_factor(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(1.0 + self.profile.point(r)?.slope_sq)
    }

    /// Scalar curvature of `f dr^2 + r^2 h` at `r`.
    pub fn graph_scalar_curvature(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let (deficit, dinv) = self.profile.deficit(r)?;
        let nf = self.n as f64;
        Ok(-(nf - 1.0) * dinv / r + (nf - 1.0) * (nf - 2.0) * deficit / (r * r))
    }

    /// `g`-norm of the field, `|Q| / r^(n-1)`.
    pub fn electric_field_norm(&self, r: f64) -> f64 {
        self.charge.abs() / r.powi(self.n as i32 - 1)
    }

    /// `(1/omega) int_{S_r} <E, nu> dA` for the radial field.
    pub fn charge_at(&self, r: f64) -> f64 {
        let e = self.charge / r.powi(self.n as i32 - 1);
        let area = unit_sphere_area(self.n - 1) * r.powi(self.n as i32 - 1);
        e * area / unit_sphere_area(self.n - 1)
    }

    /// `R_g - (n-1)(n-2)|E|_g^2` at each radius; non-negative exactly when
    /// the dominant energy condition holds.
    pub fn energy_condition_residual(&self, radii: &[f64]) -> Result<Vec<f64>> {
        let nf = self.n as f64;
        radii
            .iter()
            .map(|&r| {
                let e = self.electric_field_norm(r);
                Ok(self.graph_scalar_curvature(r)? - (nf - 1.0) * (nf - 2.0) * e * e)
            })
            .collect()
    }

    /// Fails unless the graph turns vertical at `r_start`.
    pub fn check_orthogonality(&self) -> Result<()> {
        let (inv, _) = self.profile.inv_factor(self.r_start)?;
        if inv.abs() > ORTHOGONALITY_TOLERANCE {
            return Err(Error::InvalidData(format!(
                "graph does not meet the horizon orthogonally (1/W^2 = {inv:e} at r_start)"
            )));
        }
        Ok(())
    }

    /// Measured exponent `sigma` in `(du/dr)^2 = O(r^-sigma)` between
    /// `10^3` and `10^4` times `r_start`; `None` when the slope vanishes.
    pub fn decay_exponent(&self) -> Result<Option<f64>> {
        let (ra, rb) = (1e3 * self.r_start, 1e4 * self.r_start);
        let sa = self.profile.point(ra)?.slope_sq;
        let sb = self.profile.point(rb)?.slope_sq;
        if sb == 0.0 && sa == 0.0 {
            return Ok(None);
        }
        Ok(Some(-(sb / sa).ln() / (rb / ra).ln()))
    }

    /// Rejects data whose slope decays no faster than `r^-((n-2)/2)`.
    pub fn check_decay(&self) -> Result<()> {
        if let Some(sigma) = self.decay_exponent()? {
            let need = (self.n as f64 - 2.0) / 2.0;
            if !(sigma > need) {
                return Err(Error::InvalidData(format!(
                    "slope decays like r^-{sigma:.4}; asymptotic flatness needs an exponent above {need}"
                )));
            }
        }
        Ok(())
    }

    /// `omega c_n R_g r^(n-1)`: the bulk integrand per unit radius, together
    /// with the magnitude of the terms that cancel inside it.
    fn bulk_density(&self, r: f64) -> Result<(f64, f64)> {
        self.check_radius(r)?;
        let n = self.n;
        let nf = n as f64;
        let (deficit, dinv) = self.profile.deficit(r)?;
        let a = -(nf - 1.0) * dinv / r;
        let b = (nf - 1.0) * (nf - 2.0) * deficit / (r * r);
        let k = unit_sphere_area(n - 1) * mass_constant(n) * r.powi(n as i32 - 1);
        Ok((k * (a + b), k * (a.abs() + b.abs())))
    }

    /// Interval ends for the bulk quadrature: geometric panels plus any kinks
    /// of the profile.
    fn quadrature_breaks(&self, r_max: f64) -> Vec<f64> {
        let r0 = self.r_start;
        let mut breaks = vec![r0];
        let mut r = 2.0 * r0;
        while r < r_max {
            breaks.push(r);
            r *= 1.25;
        }
        breaks.push(r_max);
        match &self.profile {
            Profile::Table(t) => breaks.extend(t.r.iter().copied()),
            Profile::MassBump { inner, outer, .. } => breaks.extend([*inner, *outer]),
            _ => {}
        }
        breaks.retain(|&b| b >= r0 && b <= r_max);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);
        breaks
    }

    /// Mass from the horizon mean curvature and the bulk scalar curvature.
    /// `tolerance` bounds the acceptable uncertainty of the tail beyond
    /// `r_max`; exceeding it adds a warning.
    pub fn mass_via_formula(&self, r_max: f64, tolerance: f64) -> Result<MassBreakdown> {
        self.check_orthogonality()?;
        self.check_decay()?;
        let r0 = self.r_start;
        if !(r_max > 2.0 * r0) {
            return Err(Error::param(format!("r_max = {r_max} must exceed 2 r_start")));
        }
        let n = self.n;
        let boundary_term = mass_constant(n) * (n as f64 - 1.0) * unit_sphere_area(n - 1) * r0.powi(n as i32 - 2);

        let rule = gauss_legendre(16);
        let mut failure = None;
        let mut density = |r: f64| match self.bulk_density(r) {
            Ok(v) => v.0,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let breaks = self.quadrature_breaks(r_max);
        // r = r0 + sigma^2 on the first interval
        let top = (breaks[1] - r0).sqrt();
        let mut quad = 0.0;
        for k in 0..8 {
            let a = top * k as f64 / 8.0;
            let b = top * (k + 1) as f64 / 8.0;
            quad += rule.mapped(a, b).integrate(|s| 2.0 * s * density(r0 + s * s));
        }
        for w in breaks[1..].windows(2) {
            quad += rule.mapped(w[0], w[1]).integrate(&mut density);
        }
        if let Some(e) = failure {
            return Err(e);
        }

        let g_max = self.bulk_density(r_max)?;
        let g_10 = self.bulk_density(r_max / 10.0)?;
        let g_100 = self.bulk_density(r_max / 100.0)?;
        // values at roundoff level carry no decay information
        let negligible = |g: (f64, f64)| g.0.abs() <= 1e3 * f64::EPSILON * g.1;
        let tail_from = |near: (f64, f64), far: (f64, f64)| -> Result<f64> {
            if negligible(far) || negligible(near) || negligible(g_max) {
                return Ok(0.0);
            }
            let p = -(far.0 / near.0).abs().log10();
            if !(p > 1.0) {
                return Err(Error::InvalidData(format!(
                    "scalar curvature density decays like r^-{p:.3}; the mass integral diverges"
                )));
            }
            Ok(g_max.0 * r_max / (p - 1.0))
        };
        let tail = tail_from(g_10, g_max)?;
        let tail_alt = tail_from(g_100, g_10)?;
        let tail_uncertainty = (tail - tail_alt).abs();
        let mut warnings = Vec::new();
        if tail_uncertainty > tolerance {
            warnings.push(format!(
                "tail beyond r_max = {r_max} uncertain by {tail_uncertainty:e} (tolerance {tolerance:e})"
            ));
        }

        let samples: Vec<f64> = std::iter::once(r0 * (1.0 + 1e-6))
            .chain((1..=256).map(|k| r0 * (r_max / r0).powf(k as f64 / 256.0)))
            .collect();
        let dec_residual_min = self
            .energy_condition_residual(&samples)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);

        let bulk_term = quad + tail;
        Ok(MassBreakdown {
            boundary_term,
            bulk_term,
            bulk_quadrature: quad,
            tail_estimate: tail,
            tail_uncertainty,
            total: boundary_term + bulk_term,
            dec_residual_min,
            r_max,
            warnings,
        })
    }

    /// ADM flux `c_n int_{S_r} (d_j e_ij - d_i e_jj) nu^i dA` for
    /// `e_ij = (f - 1) x_i x_j / |x|^2`, with derivatives taken by fourth-order
    /// central differences and the sphere integral by the grid rule.
    pub fn adm_flux(&self, r: f64) -> Result<f64> {
        let n = self.n;
        let h = 1e-2 * r;
        if !(r - 2.0 * h > self.r_start) {
            return Err(Error::Domain(format!("r = {r} is too close to the horizon for the flux stencil")));
        }
        let grid = SphereGrid::axisymmetric(n, 16)?;
        let metric = |x: &[f64]| -> Result<Vec<f64>> {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let s = self.profile.point(r2.sqrt())?.slope_sq;
            let mut e = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    e[i * n + j] = s * x[i] * x[j] / r2;
                }
            }
            Ok(e)
        };
        let mut total = 0.0;
        for node in 0..grid.len() {
            let nu = grid.direction(node);
            let x: Vec<f64> = nu.iter().map(|v| v * r).collect();
            // de[k][i*n+j] = d_k e_ij
            let mut de = Vec::with_capacity(n);
            for k in 0..n {
                let shifted = |t: f64| {
                    let mut y = x.clone();
                    y[k] += t;
                    metric(&y)
                };
                let (p1, m1, p2, m2) = (shifted(h)?, shifted(-h)?, shifted(2.0 * h)?, shifted(-2.0 * h)?);
                let d: Vec<f64> = (0..n * n)
                    .map(|a| (8.0 * (p1[a] - m1[a]) - (p2[a] - m2[a])) / (12.0 * h))
                    .collect();
                de.push(d);
            }
            let mut dot = 0.0;
            for i in 0..n {
                let div: f64 = (0..n).map(|j| de[j][i * n + j]).sum();
                let grad_tr: f64 = (0..n).map(|j| de[i][j * n + j]).sum();
                dot += (div - grad_tr) * nu[i];
            }
            total += dot * grid.weights()[node];
        }
        Ok(mass_constant(n) * total * r.powi(n as i32 - 1))
    }

    /// Richardson-extrapolated ADM mass from fluxes at increasing radii. The
    /// decay exponent of the error is measured from the last three radii.
    pub fn adm_mass_limit(&self, radii: &[f64]) -> Result<f64> {
        self.check_decay()?;
        if radii.len() < 3 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("need at least three strictly increasing radii"));
        }
        let tail = &radii[radii.len() - 3..];
        let f: Vec<f64> = tail.iter().map(|&r| self.adm_flux(r)).collect::<Result<_>>()?;
        richardson_limit(tail, &f)
    }
}

/// Limit of `F(r) = L + C r^-p` from three samples, solving for `p`.
pub fn richardson_limit(r: &[f64], f: &[f64]) -> Result<f64> {
    let d1 = f[0] - f[1];
    let d2 = f[1] - f[2];
    let scale = f.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    if d2.abs() <= 1e-13 * scale {
        return Ok(f[2]);
    }
    let ratio = d1 / d2;
    if !(ratio > 1.0) {
        return Err(Error::ExtrapolationUnstable(format!(
            "successive flux differences {d1:e}, {d2:e} do not shrink"
        )));
    }
    let model = |p: f64| (r[0].powf(-p) - r[1].powf(-p)) / (r[1].powf(-p) - r[2].powf(-p));
    let (mut lo, mut hi) = (1e-6_f64, 50.0_f64);
    if !(model(lo) < ratio && ratio < model(hi)) {
        return Err(Error::ExtrapolationUnstable(format!("difference ratio {ratio} has no decay exponent")));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if model(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = (lo * hi).sqrt();
    let c = d2 / (r[1].powf(-p) - r[2].powf(-p));
    Ok(f[2] - c * r[2].powf(-p))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataFile {
    n: usize,
    label: Option<String>,
    r_start: Option<f64>,
    profile: ProfileSpec,
    field: Option<FieldSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum ProfileSpec {
    Rnt { m: f64, q: f64 },
    RntPerturbed { m: f64, q: f64, perturbation: PerturbationSpec },
    Table { points: Vec<[f64; 2]> },
    Flat,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum PerturbationSpec {
    Exponential { amplitude: f64, rate: f64 },
    MassBump { amplitude: f64, inner: f64, outer: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum FieldSpec {
    Coulomb { charge: Option<f64>, scale: Option<f64> },
    None,
}

impl RadialGraphData {
    /// Parses a TOML data definition:
    ///
    /// ```toml
    /// n = 4
    /// label = "charged slice"
    /// [profile]
    /// kind = "rnt"            # rnt | rnt-perturbed | table | flat
    /// m = 2.0
    /// q = 1.0
    /// [field]
    /// kind = "coulomb"        # coulomb | none
    /// scale = 0.9             # multiplies the profile charge
    /// ```
    ///
    /// `rnt-perturbed` adds a `[profile.perturbation]` table with
    /// `type = "exponential"` (`amplitude`, `rate`) or `type = "mass-bump"`
    /// (`amplitude`, `inner`, `outer`). `table` takes `points = [[r, psi2], ...]`
    /// starting at the horizon. `flat` requires `r_start`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: DataFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = spec.n;
        if n < 3 {
            return Err(Error::param(format!("dimension n = {n} must be at least 3")));
        }
        let profile_charge = match &spec.profile {
            ProfileSpec::Rnt { q, .. } | ProfileSpec::RntPerturbed { q, .. } => *q,
            _ => 0.0,
        };
        let charge = match spec.field {
            None => profile_charge,
            Some(FieldSpec::None) => 0.0,
            Some(FieldSpec::Coulomb { charge, scale }) => charge.unwrap_or(profile_charge) * scale.unwrap_or(1.0),
        };
        let (profile, r_start) = match spec.profile {
            ProfileSpec::Rnt { m, q } => {
                let p = RntParams::new(n, m, q)?;
                (Profile::Rnt(p), p.horizon_radii()?.r_plus)
            }
            ProfileSpec::RntPerturbed { m, q, perturbation } => {
                let base = RntParams::new(n, m, q)?;
                let r_plus = base.horizon_radii()?.r_plus;
                let profile = match perturbation {
                    PerturbationSpec::Exponential { amplitude, rate } => Profile::Exponential { base, amplitude, rate },
                    PerturbationSpec::MassBump { amplitude, inner, outer } => {
                        Profile::MassBump { base, amplitude, inner, outer }
                    }
                };
                (profile, r_plus)
            }
            ProfileSpec::Table { points } => {
                let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                let table = TableProfile::new(n, &pts, charge)?;
                let r0 = table.r[0];
                (Profile::Table(table), r0)
            }
            ProfileSpec::Flat => {
                let r0 = spec
                    .r_start
                    .ok_or_else(|| Error::Parse("flat data needs an explicit r_start".into()))?;
                (Profile::Flat, r0)
            }
        };
        let r_start = match spec.r_start {
            Some(given) if (given - r_start).abs() > 1e-12 * r_start => {
                return Err(Error::param(format!(
                    "r_start = {given} disagrees with the profile's inner radius {r_start}"
                )))
            }
            _ => r_start,
        };
        let label = spec.label.unwrap_or_else(|| "graph data".to_string());
        Self::new(n, r_start, profile, charge, label)
    }
}
