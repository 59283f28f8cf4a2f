//! Closed-form Reissner–Nordström–Tangherlini (RNT) initial data.
//!
//! The time-symmetric slice of the RNT solution in spatial dimension `n` is
//! `g = psi^{-2} dr^2 + r^2 h` with
//! `psi^2 = 1 - 2m / r^(n-2) + q^2 / r^(2n-4)`. Everything here is a pure
//! function of `(n, m, q)` and is used as the oracle for the numerical
//! modules.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, Rule};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

const MAX_SPHERE_DIM: usize = 64;

/// Area of the unit round sphere `S^k` in `R^(k+1)`.
///
/// This is `2 pi^((k+1)/2) / Gamma((k+1)/2)` unrolled through
/// `omega_k = 2 pi omega_{k-2} / (k - 1)`, cached per dimension.
pub fn unit_sphere_area(k: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_SPHERE_DIM + 1];
        t[0] = 2.0;
        t[1] = 2.0 * PI;
        for j in 2..=MAX_SPHERE_DIM {
            t[j] = 2.0 * PI * t[j - 2] / (j as f64 - 1.0);
        }
        t
    });
    assert!(k <= MAX_SPHERE_DIM, "sphere dimension {k} out of range");
    table[k]
}

/// The normalising constant `c_n = 1 / (2 (n-1) omega_{n-1})` of the ADM mass.
pub fn mass_constant(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64 - 1.0) * unit_sphere_area(n - 1))
}

/// Parameters `(n, m, q)` of one member of the RNT family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RntParams {
    pub n: usize,
    pub m: f64,
    pub q: f64,
}

/// Inner and outer horizon radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonRadii {
    pub r_minus: f64,
    pub r_plus: f64,
    /// `m == |q|`: the two horizons coincide.
    pub extremal: bool,
}

impl RntParams {
    pub fn new(n: usize, m: f64, q: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::param(format!("dimension n = {n} must be at least 3")));
        }
        if n > MAX_SPHERE_DIM {
            return Err(Error::param(format!("dimension n = {n} is too large")));
        }
        if !m.is_finite() || !q.is_finite() {
            return Err(Error::param("mass and charge must be finite"));
        }
        Ok(Self { n, m, q })
    }

    /// `omega_{n-1}`, the area of the unit sphere in the slice.
    pub fn omega(&self) -> f64 {
        unit_sphere_area(self.n - 1)
    }

    pub fn is_extremal(&self) -> bool {
        self.m == self.q.abs()
    }

    fn check_horizon_regime(&self) -> Result<f64> {
        if self.m < self.q.abs() {
            return Err(Error::param(format!(
                "m = {} < |q| = {}: naked singularity regime, no horizon",
                self.m,
                self.q.abs()
            )));
        }
        Ok((self.m * self.m - self.q * self.q).max(0.0).sqrt())
    }

    fn power(&self) -> i32 {
        self.n as i32 - 2
    }

    /// `psi^2(r)`. Uses the factorised form around the horizons whenever they
    /// exist, which keeps relative accuracy close to `r_+`.
    pub fn lapse_squared(&self, r: f64) -> f64 {
        let x = r.powi(self.power());
        if self.m >= self.q.abs() {
            let s = (self.m * self.m - self.q * self.q).max(0.0).sqrt();
            (x - (self.m + s)) * (x - (self.m - s)) / (x * x)
        } else {
            1.0 - 2.0 * self.m / x + self.q * self.q / (x * x)
        }
    }

    /// `psi(r) = sqrt(1 - 2m/r^(n-2) + q^2/r^(2n-4))`.
    pub fn lapse(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius r = {r} must be positive")));
        }
        if r.is_infinite() {
            return Ok(1.0);
        }
        let rad = self.lapse_squared(r);
        let x = r.powi(self.power());
        let scale = 1.0 + 2.0 * self.m.abs() / x + self.q * self.q / (x * x);
        if rad >= 0.0 {
            Ok(rad.sqrt())
        } else if rad > -16.0 * f64::EPSILON * scale {
            Ok(0.0)
        } else {
            Err(Error::Domain(format!(
                "r = {r} lies strictly between the horizons (psi^2 = {rad})"
            )))
        }
    }

    /// `r_pm = (m pm sqrt(m^2 - q^2))^(1/(n-2))`.
    pub fn horizon_radii(&self) -> Result<HorizonRadii> {
        let s = self.check_horizon_regime()?;
        let e = 1.0 / (self.n as f64 - 2.0);
        Ok(HorizonRadii {
            r_minus: (self.m - s).max(0.0).powf(e),
            r_plus: (self.m + s).powf(e),
            extremal: self.is_extremal(),
        })
    }

    /// `R = r_+^(n-2) = m + sqrt(m^2 - q^2)`, the area radius of the horizon.
    pub fn area_radius(&self) -> Result<f64> {
        let s = self.check_horizon_regime()?;
        Ok(self.m + s)
    }

    /// Area of the outer horizon `omega_{n-1} r_+^(n-1)`.
    pub fn horizon_area(&self) -> Result<f64> {
        let r = self.horizon_radii()?.r_plus;
        Ok(self.omega() * r.powi(self.n as i32 - 1))
    }

    /// Scalar curvature of the slice, `(n-1)(n-2) q^2 / r^(2n-2)`.
    pub fn scalar_curvature(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        (nf - 1.0) * (nf - 2.0) * self.q * self.q / r.powi(2 * self.n as i32 - 2)
    }

    /// Radial component `q / r^(n-1)` of the electric field in the unit
    /// radial frame; it equals the `g`-norm of the field up to sign.
    pub fn electric_field_radial(&self, r: f64) -> f64 {
        self.q / r.powi(self.n as i32 - 1)
    }

    fn require_subextremal(&self) -> Result<f64> {
        let s = self.check_horizon_regime()?;
        if !(s > 0.0) {
            return Err(Error::param(
                "embedding requires m > |q|; the extremal horizon is degenerate",
            ));
        }
        Ok(s)
    }

    /// Squared slope of the embedding profile,
    /// `(du/dr)^2 = (2m r^(n-2) - q^2) / (r^(2n-4) - 2m r^(n-2) + q^2)`,
    /// together with its radial derivative. Requires `m > |q|`, `r > r_+`.
    pub fn embedding_slope_sq(&self, r: f64) -> Result<(f64, f64)> {
        let s = self.require_subextremal()?;
        let p = self.power();
        let nf = self.n as f64;
        let x = r.powi(p);
        let upper = self.m + s;
        if !(x > upper) {
            return Err(Error::Domain(format!("r = {r} is not outside the horizon")));
        }
        let num = 2.0 * self.m * x - self.q * self.q;
        let den = (x - upper) * (x - (self.m - s));
        let dx = (nf - 2.0) * r.powi(p - 1);
        let dnum = 2.0 * self.m * dx;
        let dden = dx * (2.0 * x - 2.0 * self.m);
        let slope_sq = num / den;
        let deriv = (dnum * den - num * dden) / (den * den);
        Ok((slope_sq, deriv))
    }

    /// The integrand of the embedding ODE after the substitution
    /// `r = r_+ + sigma^2`, i.e. `2 sigma du/dr`, which stays bounded at the
    /// horizon.
    fn embedding_integrand(&self, sigma: f64, r_plus: f64, s: f64) -> f64 {
        let r = r_plus + sigma * sigma;
        let p = self.power();
        let x = r.powi(p);
        let num = 2.0 * self.m * x - self.q * self.q;
        // (r^(n-2) - r_+^(n-2)) / (r - r_+) as a geometric sum
        let geo: f64 = (0..p).map(|k| r.powi(k) * r_plus.powi(p - 1 - k)).sum();
        let inner = x - (self.m - s);
        2.0 * (num / (geo * inner)).sqrt()
    }

    /// Height `u(r)` of the isometric embedding of the slice as a radial graph
    /// in `R^(n+1)`, normalised by `u(r_+) = 0`.
    ///
    /// `r_values` must be non-decreasing and start at or above `r_+`.
    pub fn embed_profile(&self, r_values: &[f64]) -> Result<Vec<f64>> {
        let s = self.require_subextremal()?;
        let r_plus = self.horizon_radii()?.r_plus;
        let base = gauss_legendre(16);
        let scale = r_plus.sqrt();
        let mut out = Vec::with_capacity(r_values.len());
        let mut sigma_prev = 0.0;
        let mut u = 0.0;
        let mut r_prev = r_plus;
        for &r in r_values {
            if !(r >= r_plus * (1.0 - 4.0 * f64::EPSILON)) {
                return Err(Error::Domain(format!("r = {r} lies inside r_+ = {r_plus}")));
            }
            if r < r_prev {
                return Err(Error::Domain("radii must be non-decreasing".into()));
            }
            let sigma = (r - r_plus).max(0.0).sqrt();
            u += integrate_panels(&base, sigma_prev, sigma, scale, |t| {
                self.embedding_integrand(t, r_plus, s)
            });
            out.push(u);
            sigma_prev = sigma;
            r_prev = r;
        }
        Ok(out)
    }
}

/// Composite Gauss rule on `[a, b]` with panels no wider than a fifth of
/// `(t + scale)`, so slowly varying tails take few panels.
pub(crate) fn integrate_panels(
    base: &Rule,
    a: f64,
    b: f64,
    scale: f64,
    f: impl Fn(f64) -> f64,
) -> f64 {
    let mut total = 0.0;
    let mut left = a;
    while left < b {
        let width = 0.2 * (left.abs() + scale);
        let right = (left + width).min(b);
        total += base.mapped(left, right).integrate(&f);
        left = right;
    }
    total
}

/// Mass of the RNT solution whose outer horizon has the given area and whose
/// charge is `q`:
/// `m = ((A/omega)^((n-2)/(n-1)) + q^2 (omega/A)^((n-2)/(n-1))) / 2`.
pub fn mass_from_horizon(area: f64, q: f64, n: usize) -> Result<f64> {
    if !(area > 0.0) {
        return Err(Error::param(format!("horizon area {area} must be positive")));
    }
    if n < 3 {
        return Err(Error::param(format!("dimension n = {n} must be at least 3")));
    }
    let radius = area_radius(area, n);
    Ok(0.5 * (radius + q * q / radius))
}

/// `(A / omega_{n-1})^((n-2)/(n-1))`.
pub fn area_radius(area: f64, n: usize) -> f64 {
    let nf = n as f64;
    (area / unit_sphere_area(n - 1)).powf((nf - 2.0) / (nf - 1.0))
}
