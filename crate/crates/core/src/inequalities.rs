//! Named inequality certificates with signed slack.
//!
//! Every report is oriented so that `slack = lhs - rhs >= 0` means the
//! inequality holds. A report passes when `slack >= -tolerance` and is
//! flagged as saturated when `|slack| < tolerance`. Certificates whose
//! hypotheses exclude the input are emitted as `not-applicable` markers.

use crate::error::{Error, Result};
use crate::exact_rnt::{area_radius, mass_constant, unit_sphere_area};
use crate::graph_data::{RadialGraphData, DEFAULT_OUTER_FACTOR};
use crate::surface::{
    area, charge_flux, curvature, sample_field, total_intrinsic_curvature, total_mean_curvature, yamabe_quotients,
    GridMode, StarShapedSurface, VectorField,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;

/// Tolerance for inputs evaluated in closed form.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-10;
/// Tolerance for inputs produced by radial quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
/// Tolerance for surface integrals on an axisymmetric (spectral) grid.
pub const AXISYMMETRIC_SURFACE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityName {
    /// `m >= (R + Q^2/R) / 2`.
    Penrose,
    /// `R >= m - sqrt(m^2 - Q^2)`.
    PenroseLower,
    /// `R <= m + sqrt(m^2 - Q^2)`.
    PenroseUpper,
    /// `m >= |Q|`.
    PositiveMass,
    /// `m >= (2 c_n int H + Q^2 (2 c_n int H)^-1) / 2`.
    MassMeancurv,
    /// `2 c_n int H >= R`.
    AfMeancurv,
    /// `int R_k >= d_n (int H)^((n-3)/(n-2))`.
    AfScalar,
    /// `Q^2 <= Y_rel R^2`.
    Gibbons,
    /// `Y_rel <= 1`.
    YamabeGate,
    /// `m >= (R + Y_rel^(-(n-2)/(n-3)) Q^2 / R) / 2`, for `n >= 4`.
    PenroseYamabe,
}

impl InequalityName {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityName::Penrose => "penrose",
            InequalityName::PenroseLower => "penrose-lower",
            InequalityName::PenroseUpper => "penrose-upper",
            InequalityName::PositiveMass => "positive-mass",
            InequalityName::MassMeancurv => "mass-meancurv",
            InequalityName::AfMeancurv => "af-meancurv",
            InequalityName::AfScalar => "af-scalar",
            InequalityName::Gibbons => "gibbons",
            InequalityName::YamabeGate => "yamabe-gate",
            InequalityName::PenroseYamabe => "penrose-yamabe",
        }
    }
}

impl fmt::Display for InequalityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

/// Where a certificate's tolerance comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ToleranceSource {
    ClosedForm,
    Quadrature,
    Surface { mode: GridMode, n_theta: usize },
}

impl ToleranceSource {
    /// Base (unscaled) tolerance.
    pub fn base(self) -> f64 {
        match self {
            ToleranceSource::ClosedForm => CLOSED_FORM_TOLERANCE,
            ToleranceSource::Quadrature => QUADRATURE_TOLERANCE,
            ToleranceSource::Surface { mode: GridMode::Axisymmetric, .. } => AXISYMMETRIC_SURFACE_TOLERANCE,
            ToleranceSource::Surface { mode: GridMode::Full, n_theta } => {
                10.0 * (std::f64::consts::PI / n_theta as f64).powi(4)
            }
        }
    }

    /// The looser of two sources.
    pub fn combine(self, other: ToleranceSource) -> ToleranceSource {
        if other.base() > self.base() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: InequalityName,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub slack: Option<f64>,
    /// Absolute tolerance: the source's base value times
    /// `max(1, |lhs|, |rhs|)`.
    pub tolerance: f64,
    pub tolerance_source: ToleranceSource,
    pub verdict: Verdict,
    pub saturated: bool,
    pub inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityReport {
    fn new(name: InequalityName, lhs: f64, rhs: f64, source: ToleranceSource, digest: &str) -> Self {
        let slack = lhs - rhs;
        let tolerance = source.base() * 1f64.max(lhs.abs()).max(rhs.abs());
        let verdict = if slack >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        Self {
            name,
            lhs: Some(lhs),
            rhs: Some(rhs),
            slack: Some(slack),
            tolerance,
            tolerance_source: source,
            verdict,
            saturated: slack.abs() < tolerance,
            inputs_digest: digest.to_string(),
            note: None,
        }
    }

    fn not_applicable(name: InequalityName, source: ToleranceSource, digest: &str, note: impl Into<String>) -> Self {
        Self {
            name,
            lhs: None,
            rhs: None,
            slack: None,
            tolerance: source.base(),
            tolerance_source: source,
            verdict: Verdict::NotApplicable,
            saturated: false,
            inputs_digest: digest.to_string(),
            note: Some(note.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Hex SHA-256 of a canonical input description.
pub fn inputs_digest(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// `d_n = (n-1)(n-2) omega / ((n-1) omega)^((n-3)/(n-2))`, with
/// `omega = omega_{n-1}`.
pub fn af_scalar_constant(n: usize) -> f64 {
    let nf = n as f64;
    let w = unit_sphere_area(n - 1);
    (nf - 1.0) * (nf - 2.0) * w / ((nf - 1.0) * w).powf((nf - 3.0) / (nf - 2.0))
}

/// Penrose-type reports from mass, horizon area and charge.
///
/// The two-sided form is only emitted when `mass >= |Q|`, where it is
/// equivalent to the Penrose inequality.
pub fn penrose_report(mass: f64, horizon_area: f64, charge: f64, n: usize) -> Result<Vec<InequalityReport>> {
    penrose_report_with(mass, horizon_area, charge, n, ToleranceSource::ClosedForm)
}

fn penrose_report_with(
    mass: f64,
    horizon_area: f64,
    charge: f64,
    n: usize,
    source: ToleranceSource,
) -> Result<Vec<InequalityReport>> {
    if !(horizon_area > 0.0) {
        return Err(Error::param(format!("horizon area {horizon_area} must be positive")));
    }
    if n < 3 {
        return Err(Error::param(format!("dimension n = {n} must be at least 3")));
    }
    let digest = inputs_digest(&format!(
        "penrose|n={n}|mass={mass:.17e}|area={horizon_area:.17e}|charge={charge:.17e}|source={source:?}"
    ));
    let radius = area_radius(horizon_area, n);
    let q2 = charge * charge;
    let mut out = vec![
        InequalityReport::new(InequalityName::Penrose, mass, 0.5 * (radius + q2 / radius), source, &digest),
        InequalityReport::new(InequalityName::PositiveMass, mass, charge.abs(), source, &digest),
    ];
    if mass >= charge.abs() {
        let root = (mass * mass - q2).sqrt();
        out.insert(1, InequalityReport::new(InequalityName::PenroseLower, radius, mass - root, source, &digest));
        out.insert(2, InequalityReport::new(InequalityName::PenroseUpper, mass + root, radius, source, &digest));
    }
    Ok(out)
}

/// Geometric measures of a horizon viewed as a hypersurface of `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonMeasures {
    pub n: usize,
    pub area: f64,
    pub int_mean: f64,
    pub int_scalar: f64,
    pub yamabe_rel: f64,
    pub two_convex: bool,
    pub source: ToleranceSource,
}

impl HorizonMeasures {
    /// Exact values for the round sphere of radius `radius`.
    pub fn round(n: usize, radius: f64) -> Self {
        let nf = n as f64;
        let w = unit_sphere_area(n - 1);
        let area = w * radius.powi(n as i32 - 1);
        Self {
            n,
            area,
            int_mean: (nf - 1.0) / radius * area,
            int_scalar: (nf - 1.0) * (nf - 2.0) / (radius * radius) * area,
            yamabe_rel: 1.0,
            two_convex: true,
            source: ToleranceSource::ClosedForm,
        }
    }

    pub fn from_surface(surface: &StarShapedSurface) -> Result<Self> {
        let c = curvature(surface)?;
        let grid = surface.grid();
        let (_, yamabe_rel) = yamabe_quotients(surface)?;
        Ok(Self {
            n: surface.dim(),
            area: area(&c),
            int_mean: total_mean_curvature(&c),
            int_scalar: total_intrinsic_curvature(&c),
            yamabe_rel,
            two_convex: c.is_two_convex(),
            source: ToleranceSource::Surface { mode: grid.mode(), n_theta: grid.n_theta() },
        })
    }
}

/// Mass, charge and horizon data feeding the theorem certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateInputs {
    pub mass: f64,
    pub mass_source: ToleranceSource,
    pub charge: f64,
    pub horizon: HorizonMeasures,
}

/// All certificates for the given inputs, in a fixed order.
pub fn certificates(inputs: &CertificateInputs) -> Result<Vec<InequalityReport>> {
    let h = &inputs.horizon;
    let n = h.n;
    let nf = n as f64;
    let mass = inputs.mass;
    let q2 = inputs.charge * inputs.charge;
    let both = inputs.mass_source.combine(h.source);
    let digest = inputs_digest(&format!(
        "certificates|n={n}|mass={mass:.17e}|charge={:.17e}|area={:.17e}|int_mean={:.17e}|int_scalar={:.17e}|yamabe_rel={:.17e}|two_convex={}|sources={:?},{:?}",
        inputs.charge, h.area, h.int_mean, h.int_scalar, h.yamabe_rel, h.two_convex, inputs.mass_source, h.source
    ));
    let radius = area_radius(h.area, n);
    let mean_radius = 2.0 * mass_constant(n) * h.int_mean;

    let mut out = penrose_report_with(mass, h.area, inputs.charge, n, both)?;
    out.iter_mut().for_each(|r| r.inputs_digest = digest.clone());

    out.push(if mean_radius > 0.0 {
        InequalityReport::new(
            InequalityName::MassMeancurv,
            mass,
            0.5 * (mean_radius + q2 / mean_radius),
            both,
            &digest,
        )
    } else {
        InequalityReport::not_applicable(InequalityName::MassMeancurv, both, &digest, "horizon is not mean convex")
    });
    out.push(InequalityReport::new(InequalityName::AfMeancurv, mean_radius, radius, h.source, &digest));

    if n == 3 {
        out.push(InequalityReport::not_applicable(
            InequalityName::AfScalar,
            h.source,
            &digest,
            "requires n >= 4",
        ));
    } else if !h.two_convex {
        out.push(InequalityReport::not_applicable(
            InequalityName::AfScalar,
            h.source,
            &digest,
            "horizon is not 2-convex",
        ));
    } else {
        let rhs = af_scalar_constant(n) * h.int_mean.powf((nf - 3.0) / (nf - 2.0));
        out.push(InequalityReport::new(InequalityName::AfScalar, h.int_scalar, rhs, h.source, &digest));
    }

    out.push(InequalityReport::new(
        InequalityName::Gibbons,
        h.yamabe_rel * radius * radius,
        q2,
        h.source,
        &digest,
    ));

    let gate = InequalityReport::new(InequalityName::YamabeGate, 1.0, h.yamabe_rel, h.source, &digest);
    out.push(if gate.slack.unwrap_or(0.0) < -gate.tolerance {
        InequalityReport {
            verdict: Verdict::NotApplicable,
            note: Some("relative Yamabe quotient exceeds 1; the optimal-Penrose route is closed".into()),
            ..gate
        }
    } else {
        gate
    });

    if n == 3 {
        out.push(InequalityReport::not_applicable(
            InequalityName::PenroseYamabe,
            both,
            &digest,
            "requires n >= 4",
        ));
    } else if !h.two_convex {
        out.push(InequalityReport::not_applicable(
            InequalityName::PenroseYamabe,
            both,
            &digest,
            "horizon is not 2-convex",
        ));
    } else {
        let factor = h.yamabe_rel.powf(-(nf - 2.0) / (nf - 3.0));
        out.push(InequalityReport::new(
            InequalityName::PenroseYamabe,
            mass,
            0.5 * (radius + factor * q2 / radius),
            both,
            &digest,
        ));
    }
    Ok(out)
}

/// Certificates for a horizon surface, graph data (whose mass is computed
/// from the integral formula) and an ambient field whose flux through the
/// horizon defines the charge.
pub fn theorem_certificates(
    horizon: &StarShapedSurface,
    data: &RadialGraphData,
    field: &dyn VectorField,
) -> Result<Vec<InequalityReport>> {
    if horizon.dim() != data.n {
        return Err(Error::param("horizon and graph data dimensions differ"));
    }
    let mass = data.mass_via_formula(DEFAULT_OUTER_FACTOR * data.r_start, QUADRATURE_TOLERANCE)?.total;
    let measures = HorizonMeasures::from_surface(horizon)?;
    let c = curvature(horizon)?;
    let charge = charge_flux(&c, &sample_field(horizon, field));
    certificates(&CertificateInputs { mass, mass_source: ToleranceSource::Quadrature, charge, horizon: measures })
}
