use crate::{emit, fmt_num, resolution, CliError, CliResult, ExitStatus, ImcfRunArgs, RntReportArgs, Shape, SweepArgs, VerifyArgs};
use cpl_core::exact_rnt::{mass_constant, RntParams};
use cpl_core::graph_data::{MassBreakdown, Profile, RadialGraphData, DEFAULT_OUTER_FACTOR};
use cpl_core::imcf::{flux_chain, run_flow, FluxChain};
use cpl_core::inequalities::{
    certificates, penrose_report, theorem_certificates, CertificateInputs, HorizonMeasures, InequalityName,
    InequalityReport, ToleranceSource, Verdict, QUADRATURE_TOLERANCE,
};
use cpl_core::surface::corpus::{random_convex_axisymmetric, random_star_shaped};
use cpl_core::surface::io::read_table;
use cpl_core::surface::{
    charge_flux, curvature, make_sphere, sample_field, CoulombField, GridMode, SphereGrid, StarShapedSurface,
    DEFAULT_AXISYMMETRIC_NODES, DEFAULT_FULL_RESOLUTION,
};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;
use std::sync::Arc;

/// Largest allowed per-step increase of `M(t)`.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-8;
/// Pointwise slack allowed in `2K <= (n-2)/(n-1) H^2`.
pub const NEWTON_MACLAURIN_TOLERANCE: f64 = 1e-10;
/// Allowed violation of `I0 >= I1 >= I2`, relative to `max(1, I0)`.
pub const CHAIN_TOLERANCE: f64 = 1e-8;
/// Most negative energy-condition residual still accepted.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Serialize)]
struct RadialSample {
    r: f64,
    value: f64,
}

#[derive(Serialize)]
struct RntReport {
    command: &'static str,
    n: usize,
    m: f64,
    q: f64,
    extremal: bool,
    omega: f64,
    mass_constant: f64,
    r_minus: f64,
    r_plus: f64,
    area_radius: f64,
    horizon_area: f64,
    lapse: Vec<RadialSample>,
    scalar_curvature: Vec<RadialSample>,
    /// `None` for extremal data, where the graph degenerates.
    embedding: Option<Vec<RadialSample>>,
    penrose: InequalityReport,
    reports: Vec<InequalityReport>,
}

pub fn rnt_report(args: &RntReportArgs) -> CliResult {
    if args.samples < 2 {
        return Err(CliError::input("--samples must be at least 2"));
    }
    let p = RntParams::new(args.n, args.m, args.q)?;
    let radii = p.horizon_radii()?;
    let rp = radii.r_plus;
    let rs: Vec<f64> = (0..args.samples)
        .map(|k| rp * 10f64.powf(k as f64 / (args.samples - 1) as f64))
        .collect();
    let lapse = rs
        .iter()
        .map(|&r| Ok(RadialSample { r, value: p.lapse(r)? }))
        .collect::<cpl_core::Result<Vec<_>>>()?;
    let scalar_curvature = rs.iter().map(|&r| RadialSample { r, value: p.scalar_curvature(r) }).collect();
    let embedding = if p.is_extremal() {
        None
    } else {
        let u = p.embed_profile(&rs)?;
        Some(rs.iter().zip(u).map(|(&r, value)| RadialSample { r, value }).collect())
    };
    let reports = penrose_report(p.m, p.horizon_area()?, p.q, p.n)?;
    let report = RntReport {
        command: "rnt-report",
        n: p.n,
        m: p.m,
        q: p.q,
        extremal: radii.extremal,
        omega: p.omega(),
        mass_constant: mass_constant(p.n),
        r_minus: radii.r_minus,
        r_plus: rp,
        area_radius: p.area_radius()?,
        horizon_area: p.horizon_area()?,
        lapse,
        scalar_curvature,
        embedding,
        penrose: reports[0].clone(),
        reports,
    };
    emit(args.out.as_deref(), &to_json(&report)?)
}

fn build_grid(n: usize, mode: GridMode, res: Option<usize>) -> CliResult<Arc<SphereGrid>> {
    Ok(match mode {
        GridMode::Axisymmetric => SphereGrid::axisymmetric(n, res.unwrap_or(DEFAULT_AXISYMMETRIC_NODES))?,
        GridMode::Full => {
            if n != 3 {
                return Err(CliError::input("the full grid is only available for n = 3"));
            }
            let rows = res.unwrap_or(DEFAULT_FULL_RESOLUTION.0);
            SphereGrid::full(rows, 2 * rows)?
        }
    })
}

fn read_surface(path: &Path) -> CliResult<StarShapedSurface> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(read_table(&text)?.0)
}

fn initial_surface(args: &ImcfRunArgs) -> CliResult<StarShapedSurface> {
    if args.shape == Shape::File {
        let path = args.surface.as_deref().ok_or_else(|| CliError::input("--shape file needs --surface"))?;
        let s = read_surface(path)?;
        if s.dim() != args.n {
            return Err(CliError::input(format!("surface file has n = {}, expected {}", s.dim(), args.n)));
        }
        return Ok(s);
    }
    let grid = build_grid(args.n, args.grid.into(), resolution(args.res)?)?;
    Ok(match args.shape {
        Shape::Sphere => make_sphere(grid, args.radius)?,
        Shape::Spheroid => StarShapedSurface::spheroid(grid, args.equatorial, args.polar)?,
        Shape::Ellipsoid => StarShapedSurface::ellipsoid(grid, &args.axes)?,
        Shape::RandomConvex => random_convex_axisymmetric(grid, args.seed)?,
        Shape::RandomStar => random_star_shaped(grid, args.seed, 0.15)?,
        Shape::File => unreachable!(),
    })
}

#[derive(Serialize)]
struct Check {
    verdict: Verdict,
    value: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct FinalState {
    t: f64,
    area: f64,
    int_mean: f64,
    roundness: f64,
    decay: f64,
}

#[derive(Serialize)]
struct FluxSummary {
    charge: f64,
    min_i0_minus_i1: f64,
    min_i1_minus_i2: f64,
    chain: Verdict,
    integral_i0: f64,
    integral_i1: f64,
    bulk_lower_bound: f64,
    closed_form_limit: f64,
    tail_factor: Option<f64>,
    expected_tail_factor: f64,
}

#[derive(Serialize)]
struct GridSummary {
    mode: GridMode,
    n_theta: usize,
    n_phi: usize,
}

#[derive(Serialize)]
struct ImcfSummary {
    command: &'static str,
    n: usize,
    surface: String,
    grid: GridSummary,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    steps: usize,
    samples: usize,
    completed: bool,
    breakdown: Option<String>,
    monotone_decay: Check,
    newton_maclaurin: Check,
    flux: FluxSummary,
    final_state: FinalState,
}

fn flux_summary(chain: &FluxChain, n: usize) -> FluxSummary {
    let (a, b) = chain.chain_margins();
    let scale = chain.samples.iter().fold(1.0_f64, |m, s| m.max(s.i0.abs()));
    let ok = chain.samples.is_empty() || (a >= -CHAIN_TOLERANCE * scale && b >= -CHAIN_TOLERANCE * scale);
    FluxSummary {
        charge: chain.charge,
        min_i0_minus_i1: a,
        min_i1_minus_i2: b,
        chain: verdict(ok),
        integral_i0: chain.integral_i0,
        integral_i1: chain.integral_i1,
        bulk_lower_bound: chain.bulk_lower_bound,
        closed_form_limit: chain.closed_form_limit,
        tail_factor: chain.tail_factor,
        expected_tail_factor: (n as f64 - 1.0) / (n as f64 - 2.0),
    }
}

pub fn imcf_run(args: &ImcfRunArgs) -> CliResult {
    if !(args.dt > 0.0 && args.t_end >= 0.0 && args.sample_every > 0) {
        return Err(CliError::input("need --dt > 0, --t-end >= 0 and --sample-every >= 1"));
    }
    let surface = initial_surface(args)?;
    let n = surface.dim();
    let grid = surface.grid().clone();
    let label = surface.label.clone();
    let run = run_flow(surface, args.t_end, args.dt, args.sample_every)?;
    let chain = flux_chain(&run.samples, &CoulombField { n, charge: args.charge });

    let mut csv = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::input(e.to_string());
    csv.write_record(["t", "area", "intH", "roundness", "M", "I0", "I1", "I2"]).map_err(csv_err)?;
    for (state, fc) in run.samples.iter().zip(&chain.samples) {
        let m = &state.monitors;
        let row = [state.t, m.area, m.int_mean, m.roundness, m.decay, fc.i0, fc.i1, fc.i2];
        csv.write_record(row.iter().map(|v| fmt_num(*v))).map_err(csv_err)?;
    }
    let csv = String::from_utf8(csv.into_inner().map_err(|e| CliError::input(e.to_string()))?)
        .expect("CSV output is ASCII");
    emit(args.csv.as_deref(), &csv)?;

    let last = run.final_state();
    let nm = run.steps.iter().map(|s| s.newton_maclaurin_excess).fold(f64::NEG_INFINITY, f64::max);
    let increase = if run.steps.len() > 1 { run.max_decay_increase() } else { 0.0 };
    let summary = ImcfSummary {
        command: "imcf-run",
        n,
        surface: label,
        grid: GridSummary { mode: grid.mode(), n_theta: grid.n_theta(), n_phi: grid.n_phi() },
        t_end: args.t_end,
        dt: args.dt,
        sample_every: args.sample_every,
        steps: run.steps.len() - 1,
        samples: run.samples.len(),
        completed: run.breakdown.is_none(),
        breakdown: run.breakdown.as_ref().map(|e| e.to_string()),
        monotone_decay: Check {
            verdict: verdict(increase <= MONOTONICITY_TOLERANCE),
            value: increase,
            tolerance: MONOTONICITY_TOLERANCE,
        },
        newton_maclaurin: Check {
            verdict: verdict(nm <= NEWTON_MACLAURIN_TOLERANCE),
            value: nm,
            tolerance: NEWTON_MACLAURIN_TOLERANCE,
        },
        flux: flux_summary(&chain, n),
        final_state: FinalState {
            t: last.t,
            area: last.monitors.area,
            int_mean: last.monitors.int_mean,
            roundness: last.monitors.roundness,
            decay: last.monitors.decay,
        },
    };
    let json = to_json(&summary)?;
    match &args.summary {
        Some(p) => emit(Some(p), &json)?,
        None => eprint!("{json}"),
    }
    match run.breakdown {
        Some(e) => Err(CliError { status: ExitStatus::Breakdown, message: e.to_string() }),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct DataSummary {
    label: String,
    n: usize,
    r_start: f64,
    charge: f64,
    profile: &'static str,
}

#[derive(Serialize)]
struct EnergyCheck {
    verdict: Verdict,
    min_residual: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct AdmEstimate {
    radii: Vec<f64>,
    value: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    data: DataSummary,
    mass: MassBreakdown,
    adm_mass: AdmEstimate,
    energy_condition: EnergyCheck,
    horizon: HorizonMeasures,
    horizon_charge: f64,
    certificates: Vec<InequalityReport>,
    all_pass: bool,
}

#[derive(Serialize)]
struct VerifyRejection {
    command: &'static str,
    data: DataSummary,
    rejected: String,
    energy_condition: EnergyCheck,
    residual_profile: Vec<RadialSample>,
}

fn profile_kind(p: &Profile) -> &'static str {
    match p {
        Profile::Rnt(_) => "rnt",
        Profile::Exponential { .. } => "rnt-perturbed/exponential",
        Profile::MassBump { .. } => "rnt-perturbed/mass-bump",
        Profile::Table(_) => "table",
        Profile::Flat => "flat",
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult {
    let text = std::fs::read_to_string(&args.data)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", args.data.display())))?;
    let data = RadialGraphData::from_toml(&text)?;
    let n = data.n;
    let summary = DataSummary {
        label: data.label.clone(),
        n,
        r_start: data.r_start,
        charge: data.charge,
        profile: profile_kind(&data.profile),
    };
    let r_max = DEFAULT_OUTER_FACTOR * data.r_start;

    let radii: Vec<f64> = std::iter::once(data.r_start * (1.0 + 1e-6))
        .chain((1..=128).map(|k| data.r_start * (r_max / data.r_start).powf(k as f64 / 128.0)))
        .collect();
    let residual = data.energy_condition_residual(&radii)?;
    let min_residual = residual.iter().copied().fold(f64::INFINITY, f64::min);
    let energy = EnergyCheck {
        verdict: verdict(min_residual >= -ENERGY_TOLERANCE),
        min_residual,
        tolerance: ENERGY_TOLERANCE,
    };
    if energy.verdict == Verdict::Fail {
        let rejection = VerifyRejection {
            command: "verify",
            data: summary,
            rejected: "dominant energy condition violated".into(),
            energy_condition: energy,
            residual_profile: radii.iter().zip(residual).map(|(&r, value)| RadialSample { r, value }).collect(),
        };
        emit(args.out.as_deref(), &to_json(&rejection)?)?;
        return Err(CliError {
            status: ExitStatus::EnergyGate,
            message: format!("energy condition violated (min residual {min_residual:e})"),
        });
    }

    let mass = data.mass_via_formula(r_max, QUADRATURE_TOLERANCE)?;
    let adm_radii: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|r| r * data.r_start.max(1.0)).collect();
    let adm_mass = match data.adm_mass_limit(&adm_radii) {
        Ok(v) => AdmEstimate { radii: adm_radii, value: Some(v), error: None },
        Err(e) => AdmEstimate { radii: adm_radii, value: None, error: Some(e.to_string()) },
    };
    let horizon = match &args.horizon {
        Some(p) => {
            let s = read_surface(p)?;
            if s.dim() != n {
                return Err(CliError::input("horizon surface dimension differs from the data"));
            }
            s
        }
        None => make_sphere(build_grid(n, GridMode::Axisymmetric, resolution(args.res)?)?, data.r_start)?,
    };
    let field = CoulombField { n, charge: data.charge };
    let certs = theorem_certificates(&horizon, &data, &field)?;
    let horizon_charge = charge_flux(&curvature(&horizon)?, &sample_field(&horizon, &field));
    let all_pass = certs.iter().all(|c| c.verdict != Verdict::Fail);
    let report = VerifyReport {
        command: "verify",
        data: summary,
        mass,
        adm_mass,
        energy_condition: energy,
        horizon: HorizonMeasures::from_surface(&horizon)?,
        horizon_charge,
        certificates: certs,
        all_pass,
    };
    emit(args.out.as_deref(), &to_json(&report)?)
}

const SWEEP_CERTIFICATES: [InequalityName; 10] = [
    InequalityName::Penrose,
    InequalityName::PenroseLower,
    InequalityName::PenroseUpper,
    InequalityName::PositiveMass,
    InequalityName::MassMeancurv,
    InequalityName::AfMeancurv,
    InequalityName::AfScalar,
    InequalityName::Gibbons,
    InequalityName::YamabeGate,
    InequalityName::PenroseYamabe,
];

fn sweep_row(n: usize, m: f64, q: f64) -> Vec<String> {
    let mut row = vec![n.to_string(), fmt_num(m), fmt_num(q)];
    let result = (|| -> cpl_core::Result<Vec<String>> {
        let p = RntParams::new(n, m, q)?;
        let radii = p.horizon_radii()?;
        let rp = radii.r_plus;
        let inputs = CertificateInputs {
            mass: m,
            mass_source: ToleranceSource::ClosedForm,
            charge: q,
            horizon: HorizonMeasures::round(n, rp),
        };
        let certs = certificates(&inputs)?;
        let mut out = vec![
            "ok".to_string(),
            radii.extremal.to_string(),
            fmt_num(radii.r_minus),
            fmt_num(rp),
            fmt_num(p.area_radius()?),
        ];
        for name in SWEEP_CERTIFICATES {
            let slack = certs.iter().find(|c| c.name == name).and_then(|c| c.slack);
            out.push(slack.map_or_else(|| "n/a".to_string(), fmt_num));
        }
        out.push(if radii.extremal {
            "n/a".to_string()
        } else {
            fmt_num(p.embed_profile(&[2.0 * rp])?[0])
        });
        out.push(String::new());
        Ok(out)
    })();
    match result {
        Ok(cols) => row.extend(cols),
        Err(e) => {
            row.push("error".into());
            row.extend(std::iter::repeat_n(String::new(), 5 + SWEEP_CERTIFICATES.len()));
            row.push(e.to_string());
        }
    }
    row
}

pub fn sweep(args: &SweepArgs) -> CliResult {
    let points: Vec<(usize, f64, f64)> = args
        .n
        .iter()
        .flat_map(|&n| args.m.iter().flat_map(move |&m| args.q.iter().map(move |&q| (n, m, q))))
        .collect();
    if points.is_empty() {
        return Err(CliError::input("parameter grid is empty: give at least one value for each of --n, --m, --q"));
    }
    if args.jobs == 0 {
        return Err(CliError::input("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::input(e.to_string()))?;
    let rows: Vec<Vec<String>> = pool.install(|| points.par_iter().map(|&(n, m, q)| sweep_row(n, m, q)).collect());

    let mut header: Vec<String> = ["n", "m", "q", "status", "extremal", "r_minus", "r_plus", "area_radius"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(SWEEP_CERTIFICATES.iter().map(|c| format!("{c}_slack")));
    header.push("embedding_u_at_2r_plus".into());
    header.push("error".into());
    let mut csv = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::input(e.to_string());
    csv.write_record(&header).map_err(csv_err)?;
    for row in rows {
        csv.write_record(&row).map_err(csv_err)?;
    }
    let text = String::from_utf8(csv.into_inner().map_err(|e| CliError::input(e.to_string()))?)
        .expect("CSV output is ASCII");
    emit(args.out.as_deref(), &text)
}
