//! Inverse mean curvature flow of star-shaped surfaces.
//!
//! A surface `rho(p) p` moving with outward normal speed `1/H` has radial
//! speed `d rho / dt = W / H`, where `W = sqrt(1 + |grad log rho|^2)` is the
//! ratio between radial and normal displacement. The radial function is
//! advanced with classical RK4; each requested step is split into as many
//! substeps as the explicit stability bound demands.
//!
//! Along the flow the monitors track `int H dA`, the decay functional
//! `M(t) = exp(-(n-2)/(n-1) t) int H dA` (non-increasing for every
//! mean-convex star-shaped start) and the flux chain used to bound the
//! electromagnetic bulk energy from below.

use crate::error::{Error, Result};
use crate::exact_rnt::{mass_constant, unit_sphere_area};
use crate::surface::{
    area, curvature, sample_field, total_mean_curvature, CurvatureData, GridMode,
    StarShapedSurface, VectorField,
};
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

/// Fraction of the explicit stability limit `(H ds)^2` used per substep.
pub const STABILITY_FACTOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monitors {
    pub area: f64,
    pub int_mean: f64,
    /// `max H / min H - 1`; zero exactly on round spheres.
    pub roundness: f64,
    /// `exp(-(n-2)/(n-1) t) int H dA`.
    pub decay: f64,
}

/// A snapshot of the flow at time `t`.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub surface: StarShapedSurface,
    pub curvature: CurvatureData,
    pub monitors: Monitors,
}

fn decay_rate(n: usize) -> f64 {
    (n as f64 - 2.0) / (n as f64 - 1.0)
}

impl FlowState {
    /// Builds the initial state; the surface must be strictly mean convex.
    pub fn new(surface: StarShapedSurface, t: f64) -> Result<Self> {
        let curv = curvature(&surface)?;
        let min_h = curv.min_mean();
        if !(min_h > 0.0) {
            return Err(Error::param(format!(
                "surface is not strictly mean convex (min H = {min_h})"
            )));
        }
        Ok(Self::assemble(surface, curv, t))
    }

    fn assemble(surface: StarShapedSurface, curv: CurvatureData, t: f64) -> Self {
        let int_mean = total_mean_curvature(&curv);
        let monitors = Monitors {
            area: area(&curv),
            int_mean,
            roundness: curv.max_mean() / curv.min_mean() - 1.0,
            decay: (-decay_rate(surface.dim()) * t).exp() * int_mean,
        };
        Self { t, surface, curvature: curv, monitors }
    }

    /// Largest step the explicit scheme tolerates from this state.
    pub fn stable_step(&self) -> f64 {
        let grid = self.surface.grid();
        let spacing = match grid.mode() {
            GridMode::Axisymmetric => grid.min_polar_spacing(),
            // two coupled directions after polar filtering
            GridMode::Full => grid.min_polar_spacing() * FRAC_1_SQRT_2,
        };
        let worst = self
            .curvature
            .mean
            .iter()
            .zip(self.surface.rho())
            .map(|(h, r)| h * r * spacing)
            .fold(f64::INFINITY, f64::min);
        STABILITY_FACTOR * worst * worst
    }
}

/// Radial velocity `W / H` at every node.
fn radial_speed(surface: &StarShapedSurface, t: f64) -> Result<Vec<f64>> {
    let curv = curvature(surface).map_err(|e| Error::FlowBreakdown { t, reason: e.to_string() })?;
    speed_from(surface, &curv, t)
}

fn speed_from(surface: &StarShapedSurface, curv: &CurvatureData, t: f64) -> Result<Vec<f64>> {
    let min_h = curv.min_mean();
    if !(min_h > 0.0) || !min_h.is_finite() {
        return Err(Error::FlowBreakdown {
            t,
            reason: format!("mean curvature lost positivity (min H = {min_h})"),
        });
    }
    let mut speed: Vec<f64> = curv.graph_factor.iter().zip(&curv.mean).map(|(w, h)| w / h).collect();
    surface.grid().filter_polar(&mut speed);
    Ok(speed)
}

fn shifted(surface: &StarShapedSurface, base: &[f64], dir: &[f64], h: f64, t: f64) -> Result<StarShapedSurface> {
    let rho: Vec<f64> = base.iter().zip(dir).map(|(r, d)| r + h * d).collect();
    surface
        .with_rho(rho)
        .map_err(|e| Error::FlowBreakdown { t, reason: e.to_string() })
}

fn rk4_substep(state: &FlowState, h: f64) -> Result<FlowState> {
    let t = state.t;
    let s0 = &state.surface;
    let rho = s0.rho();
    let k1 = speed_from(s0, &state.curvature, t)?;
    let s1 = shifted(s0, rho, &k1, 0.5 * h, t)?;
    let k2 = radial_speed(&s1, t + 0.5 * h)?;
    let s2 = shifted(s0, rho, &k2, 0.5 * h, t)?;
    let k3 = radial_speed(&s2, t + 0.5 * h)?;
    let s3 = shifted(s0, rho, &k3, h, t)?;
    let k4 = radial_speed(&s3, t + h)?;
    let next: Vec<f64> = (0..rho.len())
        .map(|i| rho[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    let surface = s0
        .with_rho(next)
        .map_err(|e| Error::FlowBreakdown { t: t + h, reason: e.to_string() })?;
    let curv = curvature(&surface).map_err(|e| Error::FlowBreakdown { t: t + h, reason: e.to_string() })?;
    if !(curv.min_mean() > 0.0) {
        return Err(Error::FlowBreakdown {
            t: t + h,
            reason: format!("mean curvature lost positivity (min H = {})", curv.min_mean()),
        });
    }
    Ok(FlowState::assemble(surface, curv, t + h))
}

/// Advances the state by `dt`, subdividing whenever `dt` exceeds the
/// stability bound. A rejected step reports the time at which it failed.
pub fn imcf_step(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt > 0.0) {
        return Err(Error::param(format!("time step {dt} must be positive")));
    }
    let target = state.t + dt;
    let mut current = state.clone();
    let mut remaining = dt;
    while remaining > 0.0 {
        let limit = current.stable_step();
        let pieces = (remaining / limit).ceil().max(1.0);
        let h = remaining / pieces;
        current = rk4_substep(&current, h)?;
        remaining -= h;
        if remaining < 1e-14 * dt {
            break;
        }
    }
    current.t = target;
    current.monitors.decay = (-decay_rate(current.surface.dim()) * target).exp() * current.monitors.int_mean;
    Ok(current)
}

/// Per-step record kept for every step of a run, sampled or not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub int_mean: f64,
    pub decay: f64,
    pub roundness: f64,
    pub min_mean: f64,
    /// `max(2K - (n-2)/(n-1) H^2)` over the nodes.
    pub newton_maclaurin_excess: f64,
}

impl StepRecord {
    fn of(state: &FlowState) -> Self {
        Self {
            t: state.t,
            int_mean: state.monitors.int_mean,
            decay: state.monitors.decay,
            roundness: state.monitors.roundness,
            min_mean: state.curvature.min_mean(),
            newton_maclaurin_excess: state.curvature.newton_maclaurin_excess(),
        }
    }
}

/// Result of [`run_flow`]: sampled states, a record of every step, and the
/// breakdown (if any) that ended the run early.
#[derive(Debug, Clone)]
pub struct FlowRun {
    pub samples: Vec<FlowState>,
    pub steps: Vec<StepRecord>,
    pub breakdown: Option<Error>,
}

impl FlowRun {
    /// Largest increase of `M(t)` between consecutive steps (negative if
    /// strictly decreasing throughout).
    pub fn max_decay_increase(&self) -> f64 {
        self.steps
            .windows(2)
            .map(|w| w[1].decay - w[0].decay)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn final_state(&self) -> &FlowState {
        self.samples.last().expect("a run always holds its initial state")
    }
}

/// Flows `initial` up to `t_end` with step `dt`, keeping every
/// `sample_every`-th state (the initial and last states are always kept).
pub fn run_flow(initial: StarShapedSurface, t_end: f64, dt: f64, sample_every: usize) -> Result<FlowRun> {
    if !(dt > 0.0) || !(t_end >= 0.0) || sample_every == 0 {
        return Err(Error::param("need dt > 0, t_end >= 0 and sample_every >= 1"));
    }
    let mut state = FlowState::new(initial, 0.0)?;
    let total_steps = (t_end / dt).round() as usize;
    let mut run = FlowRun {
        samples: vec![state.clone()],
        steps: vec![StepRecord::of(&state)],
        breakdown: None,
    };
    for step in 1..=total_steps {
        let t_next = step as f64 * dt;
        match imcf_step(&state, t_next - state.t) {
            Ok(next) => state = next,
            Err(e) => {
                run.breakdown = Some(e);
                break;
            }
        }
        run.steps.push(StepRecord::of(&state));
        if step % sample_every == 0 || step == total_steps {
            run.samples.push(state.clone());
        }
    }
    if run.breakdown.is_some() && run.samples.last().map(|s| s.t) != Some(state.t) {
        run.samples.push(state);
    }
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxChainSample {
    pub t: f64,
    /// `int |E|^2 / H dA`.
    pub energy: f64,
    /// `int <E, nu>^2 / H dA`.
    pub i0: f64,
    /// `(int <E, nu> dA)^2 / int H dA`.
    pub i1: f64,
    /// `(omega Q)^2 exp(-(n-2)/(n-1) t) / int_{Sigma_0} H dA`.
    pub i2: f64,
    /// `int <E, nu> dA` on this leaf.
    pub flux: f64,
}

/// Flux-chain samples along a run together with the time integrals.
#[derive(Debug, Clone, Serialize)]
pub struct FluxChain {
    pub samples: Vec<FluxChainSample>,
    /// Charge measured on the initial surface.
    pub charge: f64,
    /// `int_0^infty I0 dt`: exponential interpolation between samples plus
    /// the exponential tail.
    pub integral_i0: f64,
    pub integral_i1: f64,
    /// `(n-2)/(2 omega) int I0 dt`, the resulting lower bound on
    /// `(n-1)(n-2) c_n int |E|^2`.
    pub bulk_lower_bound: f64,
    /// `Q^2 / (4 c_n) (int_{Sigma_0} H)^{-1}`.
    pub closed_form_limit: f64,
    /// `int I1 dt * int_{Sigma_0} H / (omega Q)^2`; equals `(n-1)/(n-2)` when
    /// every leaf is round. `None` for vanishing charge.
    pub tail_factor: Option<f64>,
}

impl FluxChain {
    /// Smallest margins `min(I0 - I1)` and `min(I1 - I2)` over the samples.
    pub fn chain_margins(&self) -> (f64, f64) {
        self.samples.iter().fold((f64::INFINITY, f64::INFINITY), |(a, b), s| {
            (a.min(s.i0 - s.i1), b.min(s.i1 - s.i2))
        })
    }
}

/// Integral over one step, exact when `v` is exponential in `t`; falls
/// back to the trapezoid when the values change sign or barely change.
fn step_integral(dt: f64, v0: f64, v1: f64) -> f64 {
    let ratio = v1 / v0;
    if ratio > 0.0 && (ratio - 1.0).abs() > 1e-6 {
        dt * (v1 - v0) / ratio.ln()
    } else {
        0.5 * dt * (v0 + v1)
    }
}

fn time_integral(times: &[f64], values: &[f64], rate: f64) -> f64 {
    let body: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| step_integral(t[1] - t[0], v[0], v[1]))
        .sum();
    body + values.last().copied().unwrap_or(0.0) / rate
}

/// Evaluates the Cauchy–Schwarz / decay chain `I0 >= I1 >= I2` on every
/// state of a flow for a divergence-free ambient field.
pub fn flux_chain(states: &[FlowState], field: &dyn VectorField) -> FluxChain {
    let Some(first) = states.first() else {
        return FluxChain {
            samples: Vec::new(),
            charge: 0.0,
            integral_i0: 0.0,
            integral_i1: 0.0,
            bulk_lower_bound: 0.0,
            closed_form_limit: 0.0,
            tail_factor: None,
        };
    };
    let n = first.surface.dim();
    let omega = unit_sphere_area(n - 1);
    let rate = decay_rate(n);
    let leaf = |s: &FlowState| {
        let values = sample_field(&s.surface, field);
        let c = &s.curvature;
        let (mut energy, mut i0, mut flux) = (0.0, 0.0, 0.0);
        for (i, e) in values.iter().enumerate() {
            let en: f64 = e.iter().zip(c.normal(i)).map(|(a, b)| a * b).sum();
            let e2: f64 = e.iter().map(|v| v * v).sum();
            let da = c.area_weight[i];
            energy += e2 / c.mean[i] * da;
            i0 += en * en / c.mean[i] * da;
            flux += en * da;
        }
        (energy, i0, flux)
    };
    let (_, _, flux0) = leaf(first);
    let charge = flux0 / omega;
    let int_h0 = first.monitors.int_mean;
    let samples: Vec<FluxChainSample> = states
        .iter()
        .map(|s| {
            let (energy, i0, flux) = leaf(s);
            FluxChainSample {
                t: s.t,
                energy,
                i0,
                i1: flux * flux / s.monitors.int_mean,
                i2: (omega * charge).powi(2) * (-rate * s.t).exp() / int_h0,
                flux,
            }
        })
        .collect();
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let i0s: Vec<f64> = samples.iter().map(|s| s.i0).collect();
    let i1s: Vec<f64> = samples.iter().map(|s| s.i1).collect();
    let integral_i0 = time_integral(&times, &i0s, rate);
    let integral_i1 = time_integral(&times, &i1s, rate);
    let nf = n as f64;
    let scale = (omega * charge).powi(2);
    FluxChain {
        samples,
        charge,
        integral_i0,
        integral_i1,
        bulk_lower_bound: (nf - 2.0) / (2.0 * omega) * integral_i0,
        closed_form_limit: charge * charge / (4.0 * mass_constant(n)) / int_h0,
        tail_factor: (scale > 0.0).then(|| integral_i1 * int_h0 / scale),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_sphere, CoulombField, SphereGrid};

    #[test]
    fn sphere_expands_exponentially() {
        for n in [3usize, 4] {
            let g = SphereGrid::axisymmetric(n, 32).unwrap();
            let run = run_flow(make_sphere(g, 1.5).unwrap(), 0.5, 1e-2, 10).unwrap();
            assert!(run.breakdown.is_none());
            let last = run.final_state();
            let expect = 1.5 * (0.5 / (n as f64 - 1.0)).exp();
            assert!(last.surface.rho().iter().all(|r| (r - expect).abs() < 1e-10));
            let m0 = run.steps[0].decay;
            assert!(run.steps.iter().all(|s| (s.decay - m0).abs() < 1e-10 * m0));
        }
    }

    #[test]
    fn rejects_non_mean_convex_start() {
        let g = SphereGrid::axisymmetric(3, 48).unwrap();
        // deep dimple at the pole
        let s = StarShapedSurface::from_fn(g, "dimple", |p| 1.0 - 0.6 * p[0].powi(40)).unwrap();
        assert!(run_flow(s, 1.0, 1e-3, 1).is_err());
    }

    #[test]
    fn stable_step_shrinks_with_resolution() {
        let s16 = FlowState::new(make_sphere(SphereGrid::axisymmetric(3, 16).unwrap(), 1.0).unwrap(), 0.0).unwrap();
        let s64 = FlowState::new(make_sphere(SphereGrid::axisymmetric(3, 64).unwrap(), 1.0).unwrap(), 0.0).unwrap();
        assert!(s64.stable_step() < s16.stable_step() / 8.0);
    }

    #[test]
    fn zero_charge_chain_vanishes() {
        let g = SphereGrid::axisymmetric(3, 24).unwrap();
        let run = run_flow(make_sphere(g, 1.0).unwrap(), 0.1, 0.05, 1).unwrap();
        let chain = flux_chain(&run.samples, &CoulombField { n: 3, charge: 0.0 });
        assert!(chain.samples.iter().all(|s| s.i0 == 0.0 && s.i1 == 0.0 && s.i2 == 0.0));
        assert!(chain.tail_factor.is_none());
    }

    #[test]
    fn sphere_chain_is_cauchy_schwarz_equality() {
        let g = SphereGrid::axisymmetric(4, 24).unwrap();
        let run = run_flow(make_sphere(g, 1.2).unwrap(), 0.2, 0.02, 1).unwrap();
        let chain = flux_chain(&run.samples, &CoulombField { n: 4, charge: 0.8 });
        for s in &chain.samples {
            assert!((s.i0 - s.i1).abs() < 1e-12 * s.i0);
            assert!((s.i1 - s.i2).abs() < 1e-10 * s.i1);
            assert!((s.energy - s.i0).abs() < 1e-12 * s.i0);
        }
    }
}
