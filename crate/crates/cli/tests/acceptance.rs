//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output; exits non-zero if any fail.

use cpl_core::exact_rnt::{mass_from_horizon, RntParams};
use cpl_core::graph_data::{RadialGraphData, DEFAULT_OUTER_FACTOR};
use cpl_core::imcf::{flux_chain, run_flow, FlowRun};
use cpl_core::inequalities::{
    certificates, penrose_report, CertificateInputs, HorizonMeasures, InequalityName, InequalityReport,
    ToleranceSource, Verdict,
};
use cpl_core::surface::corpus::{random_convex_axisymmetric, random_star_shaped};
use cpl_core::surface::{curvature, make_sphere, yamabe_quotients, CoulombField, SphereGrid, StarShapedSurface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, title, pass, detail }
}

fn find(reports: &[InequalityReport], name: InequalityName) -> &InequalityReport {
    reports.iter().find(|r| r.name == name).expect("certificate present")
}

fn rnt_sweep() -> Vec<RntParams> {
    let mut out = Vec::new();
    for n in [3usize, 4, 5, 7] {
        for m in [0.5, 1.0, 2.0] {
            for q in [0.0, 0.3 * m, 0.9 * m] {
                out.push(RntParams::new(n, m, q).unwrap());
            }
        }
    }
    out
}

fn c1_closed_form() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for p in rnt_sweep() {
        let h = p.horizon_radii().unwrap();
        let s = (p.m * p.m - p.q * p.q).sqrt();
        let e = (p.n - 2) as f64;
        worst = worst.max((h.r_plus - (p.m + s).powf(1.0 / e)).abs() / h.r_plus);
        if h.r_minus > 0.0 {
            worst = worst.max((h.r_minus - (p.m - s).powf(1.0 / e)).abs() / h.r_minus);
            worst = worst.max(p.lapse_squared(h.r_minus).abs());
        }
        worst = worst.max(p.lapse_squared(h.r_plus).abs());
        let area = p.horizon_area().unwrap();
        worst = worst.max((mass_from_horizon(area, p.q, p.n).unwrap() - p.m).abs() / p.m);
        let r = p.area_radius().unwrap();
        worst = worst.max((0.5 * (r + p.q * p.q / r) - p.m).abs() / p.m);
        let penrose = &penrose_report(p.m, area, p.q, p.n).unwrap()[0];
        worst = worst.max(penrose.slack.unwrap().abs() / p.m);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        1,
        "RNT closed forms over 36 points",
        worst < 1e-10 && secs < 1.0,
        format!("max rel error {worst:.2e} (tol 1e-10), {secs:.3} s (limit 1 s)"),
    )
}

fn c2_graph_mass() -> Outcome {
    let start = Instant::now();
    let (mut formula, mut adm) = (0.0_f64, 0.0_f64);
    for n in [3usize, 4] {
        for (m, q) in [(1.0, 0.0), (1.0, 0.5), (2.0, 1.0)] {
            let d = RadialGraphData::rnt(RntParams::new(n, m, q).unwrap()).unwrap();
            let mb = d.mass_via_formula(DEFAULT_OUTER_FACTOR * d.r_start, 1e-6).unwrap();
            formula = formula.max((mb.total - m).abs());
            let radii: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|r| r * d.r_start).collect();
            adm = adm.max((d.adm_mass_limit(&radii).unwrap() - m).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        2,
        "graph mass closure",
        formula < 1e-6 && adm < 1e-4 && secs < 10.0,
        format!("formula err {formula:.2e} (tol 1e-6), ADM limit err {adm:.2e} (tol 1e-4), {secs:.3} s (limit 10 s)"),
    )
}

fn c3_scalar_curvature() -> Outcome {
    let mut worst = 0.0_f64;
    for n in [3usize, 4, 5] {
        for (m, q) in [(1.0, 0.0), (1.0, 0.5), (2.0, 1.0), (1.0, 0.9)] {
            let p = RntParams::new(n, m, q).unwrap();
            let d = RadialGraphData::rnt(p).unwrap();
            let nf = n as f64;
            for k in 0..1000 {
                let r = d.r_start * (1.0 + 1e-3) * 1e3f64.powf(k as f64 / 999.0);
                let exact = (nf - 1.0) * (nf - 2.0) * q * q / r.powf(2.0 * nf - 2.0);
                worst = worst.max((d.graph_scalar_curvature(r).unwrap() - exact).abs());
            }
        }
    }
    outcome(3, "graph scalar curvature oracle", worst < 1e-9, format!("max abs error {worst:.2e} (tol 1e-9)"))
}

fn c4_sphere_exactness() -> Outcome {
    let errors: Vec<(usize, f64)> = [3usize, 4]
        .par_iter()
        .map(|&n| {
            let r0 = 1.25;
            let g = SphereGrid::axisymmetric(n, 128).unwrap();
            let run = run_flow(make_sphere(g, r0).unwrap(), 1.0, 1e-3, 1000).unwrap();
            assert!(run.breakdown.is_none());
            let exact = r0 * (1.0 / (n as f64 - 1.0)).exp();
            let err = run.final_state().surface.rho().iter().fold(0.0_f64, |e, r| e.max((r - exact).abs()));
            (n, err)
        })
        .collect();
    let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let detail = errors.iter().map(|(n, e)| format!("n={n}: {e:.2e}")).collect::<Vec<_>>().join(", ");
    outcome(4, "IMCF sphere radius at t=1", worst < 1e-8, format!("{detail} (tol 1e-8)"))
}

struct SpheroidRun {
    label: String,
    run: FlowRun,
}

/// The four long spheroid flows, shared by several criteria.
fn spheroid_runs() -> &'static [SpheroidRun] {
    static RUNS: OnceLock<Vec<SpheroidRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let cases = [(3usize, 2.0), (3, 0.5), (4, 2.0), (4, 0.5)];
        cases
            .par_iter()
            .map(|&(n, polar)| {
                let grid = if n == 3 { SphereGrid::full(48, 96) } else { SphereGrid::axisymmetric(n, 48) }.unwrap();
                let s = StarShapedSurface::spheroid(grid, 1.0, polar).unwrap();
                let run = run_flow(s, 5.0, 1e-2, 5).unwrap();
                SpheroidRun { label: format!("n={n} a/c={}", 1.0 / polar), run }
            })
            .collect()
    })
}

fn c5_monotonicity() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in spheroid_runs() {
        let inc = s.run.max_decay_increase();
        let round = s.run.final_state().monitors.roundness;
        let ok = s.run.breakdown.is_none() && inc <= 1e-8 && round < 1e-3;
        pass &= ok;
        parts.push(format!("{} max dM {inc:.1e} roundness(5) {round:.2e}", s.label));
    }
    outcome(5, "M(t) monotone and roundness < 1e-3 at t=5", pass, format!("{} (tol 1e-8, 1e-3)", parts.join("; ")))
}

fn c6_flux_chain() -> Outcome {
    let mut chain_worst = f64::INFINITY;
    for s in spheroid_runs() {
        let n = s.run.final_state().surface.dim();
        let fc = flux_chain(&s.run.samples, &CoulombField { n, charge: 0.7 });
        let (a, b) = fc.chain_margins();
        chain_worst = chain_worst.min(a.min(b));
    }
    let mut tail_worst = 0.0_f64;
    for n in [3usize, 4] {
        for (m, q) in [(1.0, 0.5), (2.0, 1.0)] {
            let p = RntParams::new(n, m, q).unwrap();
            let g = SphereGrid::axisymmetric(n, 64).unwrap();
            let run = run_flow(make_sphere(g, p.horizon_radii().unwrap().r_plus).unwrap(), 2.0, 1e-2, 10).unwrap();
            let fc = flux_chain(&run.samples, &CoulombField { n, charge: q });
            let (a, b) = fc.chain_margins();
            chain_worst = chain_worst.min(a.min(b));
            let expected = (n as f64 - 1.0) / (n as f64 - 2.0);
            tail_worst = tail_worst.max((fc.tail_factor.unwrap() - expected).abs());
        }
    }
    outcome(
        6,
        "flux chain I0 >= I1 >= I2 and tail factor",
        chain_worst >= -1e-8 && tail_worst < 1e-4,
        format!("min chain margin {chain_worst:.2e} (tol -1e-8), tail factor err {tail_worst:.2e} (tol 1e-4)"),
    )
}

fn convex_corpus() -> &'static [StarShapedSurface] {
    static CORPUS: OnceLock<Vec<StarShapedSurface>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let jobs: Vec<(usize, u64)> = [3usize, 4, 5].iter().flat_map(|&n| (0..100).map(move |s| (n, s))).collect();
        jobs.par_iter()
            .map(|&(n, seed)| random_convex_axisymmetric(SphereGrid::axisymmetric(n, 64).unwrap(), seed).unwrap())
            .collect()
    })
}

fn star_corpus() -> &'static [StarShapedSurface] {
    static CORPUS: OnceLock<Vec<StarShapedSurface>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut out = Vec::new();
        for seed in 0..20 {
            out.push(random_star_shaped(SphereGrid::full(48, 96).unwrap(), seed, 0.2).unwrap());
            for n in [3usize, 4, 5] {
                out.push(random_star_shaped(SphereGrid::axisymmetric(n, 64).unwrap(), seed, 0.2).unwrap());
            }
        }
        out
    })
}

fn c7_alexandrov_fenchel() -> Outcome {
    let (mut mean_fail, mut scalar_fail, mut scalar_checked) = (0, 0, 0);
    for s in convex_corpus() {
        let h = HorizonMeasures::from_surface(s).unwrap();
        let reports = certificates(&CertificateInputs {
            mass: 1.0,
            mass_source: ToleranceSource::ClosedForm,
            charge: 0.0,
            horizon: h,
        })
        .unwrap();
        mean_fail += usize::from(find(&reports, InequalityName::AfMeancurv).verdict != Verdict::Pass);
        if s.dim() >= 4 {
            let r = find(&reports, InequalityName::AfScalar);
            scalar_checked += 1;
            scalar_fail += usize::from(r.verdict != Verdict::Pass);
        }
    }
    let mut sphere = 0.0_f64;
    for n in [3usize, 4, 5] {
        let s = make_sphere(SphereGrid::axisymmetric(n, 64).unwrap(), 1.3).unwrap();
        let h = HorizonMeasures::from_surface(&s).unwrap();
        let reports = certificates(&CertificateInputs {
            mass: 1.0,
            mass_source: ToleranceSource::ClosedForm,
            charge: 0.0,
            horizon: h,
        })
        .unwrap();
        for r in &reports {
            if matches!(r.name, InequalityName::AfMeancurv | InequalityName::AfScalar) {
                if let Some(slack) = r.slack {
                    sphere = sphere.max(slack.abs() / r.lhs.unwrap().abs().max(1.0));
                }
            }
        }
    }
    let total = convex_corpus().len();
    outcome(
        7,
        "Alexandrov-Fenchel on random convex surfaces",
        mean_fail == 0 && scalar_fail == 0 && scalar_checked == 200 && sphere < 1e-8,
        format!(
            "mean-curvature form {}/{total} pass, scalar form {}/{scalar_checked} pass, sphere slack {sphere:.2e} (tol 1e-8)",
            total - mean_fail,
            scalar_checked - scalar_fail
        ),
    )
}

fn c8_newton_maclaurin() -> Outcome {
    let surfaces = convex_corpus().iter().chain(star_corpus());
    let mut worst = surfaces
        .map(|s| curvature(s).unwrap().newton_maclaurin_excess())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut count = convex_corpus().len() + star_corpus().len();
    for s in spheroid_runs() {
        for step in &s.run.steps {
            worst = worst.max(step.newton_maclaurin_excess);
            count += 1;
        }
    }
    outcome(
        8,
        "Newton-MacLaurin pointwise",
        worst <= 1e-10,
        format!("max 2K - (n-2)/(n-1) H^2 = {worst:.2e} over {count} surfaces (tol 1e-10)"),
    )
}

fn c9_certificate_logic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut implication_broken, mut checked, mut mm_pass) = (0, 0, 0);
    for s in convex_corpus().iter().chain(star_corpus()) {
        let h = HorizonMeasures::from_surface(s).unwrap();
        if curvature(s).unwrap().min_mean() <= 0.0 {
            continue;
        }
        let charge: f64 = rng.gen_range(-1.5..1.5);
        let mean_radius = 2.0 * cpl_core::exact_rnt::mass_constant(s.dim()) * h.int_mean;
        let mass = 0.5 * (mean_radius + charge * charge / mean_radius) * rng.gen_range(0.9..1.1);
        let reports = certificates(&CertificateInputs {
            mass,
            mass_source: ToleranceSource::Quadrature,
            charge,
            horizon: h,
        })
        .unwrap();
        checked += 1;
        if find(&reports, InequalityName::MassMeancurv).passed() {
            mm_pass += 1;
            implication_broken += usize::from(!find(&reports, InequalityName::PositiveMass).passed());
        }
    }
    let mut gibbons_fail = 0;
    let mut horizons = 0;
    for p in rnt_sweep() {
        let rp = p.horizon_radii().unwrap().r_plus;
        let mut measures = vec![HorizonMeasures::round(p.n, rp)];
        if p.n <= 5 {
            let s = make_sphere(SphereGrid::axisymmetric(p.n, 64).unwrap(), rp).unwrap();
            measures.push(HorizonMeasures::from_surface(&s).unwrap());
        }
        for h in measures {
            let reports = certificates(&CertificateInputs {
                mass: p.m,
                mass_source: ToleranceSource::ClosedForm,
                charge: p.q,
                horizon: h,
            })
            .unwrap();
            horizons += 1;
            gibbons_fail += usize::from(!find(&reports, InequalityName::Gibbons).passed());
        }
    }
    let mut yamabe = 0.0_f64;
    let mut n3 = 0;
    for s in star_corpus().iter().filter(|s| s.dim() == 3) {
        let (_, rel) = yamabe_quotients(s).unwrap();
        yamabe = yamabe.max((rel - 1.0).abs());
        n3 += 1;
    }
    outcome(
        9,
        "certificate logic",
        implication_broken == 0 && gibbons_fail == 0 && yamabe < 5e-3,
        format!(
            "mass-meancurv => positive-mass broken {implication_broken}/{mm_pass} (of {checked}), \
             gibbons fails {gibbons_fail}/{horizons}, max |Y_rel - 1| {yamabe:.2e} over {n3} n=3 surfaces (tol 5e-3)"
        ),
    )
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cpl(args: &[&str], out: &Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_cpl"))
        .args(args)
        .current_dir(workspace_root())
        .stdout(std::fs::File::create(out).unwrap())
        .stderr(std::process::Stdio::null())
        .status()
        .unwrap();
    status.code().unwrap_or(-1)
}

fn schema_errors(schema: &str, document: &Path) -> Vec<String> {
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(workspace_root().join("schemas").join(schema)).unwrap()).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(document).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    validator.iter_errors(&doc).map(|e| e.to_string()).collect()
}

fn c10_determinism_and_schema() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<(&str, Vec<&str>, Option<&str>, i32)> = vec![
        ("rnt", vec!["rnt-report", "--n", "4", "--m", "2", "--q", "1"], Some("rnt-report.schema.json"), 0),
        ("rnt-extremal", vec!["rnt-report", "--n", "3", "--m", "1", "--q", "1"], Some("rnt-report.schema.json"), 0),
        ("sweep", vec!["sweep", "--n", "3,4,5", "--m", "1", "--q", "0,0.5,0.99,1,2", "--jobs", "4"], None, 0),
        ("verify", vec!["verify", "--data", "data/rnt_n4_m2_q1.toml"], Some("verify.schema.json"), 0),
        ("verify-09", vec!["verify", "--data", "data/rnt_n4_m2_q1_charge09.toml"], Some("verify.schema.json"), 0),
        ("verify-bump", vec!["verify", "--data", "data/bump_n3.toml"], Some("verify.schema.json"), 0),
        (
            "verify-11",
            vec!["verify", "--data", "data/rnt_n4_m2_q1_charge11.toml"],
            Some("verify-rejected.schema.json"),
            4,
        ),
        (
            "imcf",
            vec!["imcf-run", "--n", "3", "--shape", "random-convex", "--seed", "5", "--res", "24", "--t-end", "0.3"],
            None,
            0,
        ),
    ];
    let mut problems = Vec::new();
    let mut documents = 0;
    for (tag, args, schema, code) in &cases {
        let a = dir.path().join(format!("{tag}-a"));
        let b = dir.path().join(format!("{tag}-b"));
        let (ca, cb) = (cpl(args, &a), cpl(args, &b));
        if ca != *code || cb != *code {
            problems.push(format!("{tag}: exit {ca}/{cb}, expected {code}"));
        }
        if std::fs::read(&a).unwrap() != std::fs::read(&b).unwrap() {
            problems.push(format!("{tag}: outputs differ"));
        }
        if let Some(schema) = schema {
            documents += 1;
            problems.extend(schema_errors(schema, &a).into_iter().map(|e| format!("{tag}: {e}")));
        }
    }
    let summaries: Vec<PathBuf> = (0..2).map(|k| dir.path().join(format!("summary-{k}.json"))).collect();
    for s in &summaries {
        let code = cpl(
            &["imcf-run", "--n", "4", "--shape", "spheroid", "--polar", "0.5", "--res", "24", "--t-end", "0.5", "--summary", s.to_str().unwrap()],
            &dir.path().join("series.csv"),
        );
        if code != 0 {
            problems.push(format!("imcf summary: exit {code}"));
        }
    }
    documents += 1;
    if std::fs::read(&summaries[0]).unwrap() != std::fs::read(&summaries[1]).unwrap() {
        problems.push("imcf summary: outputs differ".into());
    }
    problems.extend(schema_errors("imcf-summary.schema.json", &summaries[0]));
    outcome(
        10,
        "determinism and schema validity",
        problems.is_empty(),
        if problems.is_empty() {
            format!("{} commands byte-identical across two runs, {documents} JSON documents valid", cases.len() + 1)
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let criteria: [fn() -> Outcome; 10] = [
        c1_closed_form,
        c2_graph_mass,
        c3_scalar_curvature,
        c4_sphere_exactness,
        c5_monotonicity,
        c6_flux_chain,
        c7_alexandrov_fenchel,
        c8_newton_maclaurin,
        c9_certificate_logic,
        c10_determinism_and_schema,
    ];
    let mut failed = 0;
    for criterion in criteria {
        let o = criterion();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}  {}: {}", o.id, o.title, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
