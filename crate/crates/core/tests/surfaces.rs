use cpl_core::exact_rnt::mass_constant;
use cpl_core::inequalities::{certificates, CertificateInputs, HorizonMeasures, InequalityName, ToleranceSource};
use cpl_core::surface::corpus::{random_convex_axisymmetric, random_star_shaped};
use cpl_core::surface::io::{read_table, write_table};
use cpl_core::surface::{
    area, charge_flux, curvature, make_sphere, sample_field, total_intrinsic_curvature, yamabe_quotients,
    CoulombField, SphereGrid, StarShapedSurface,
};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Mean curvature (sum of principal curvatures) and Gauss curvature of the
/// ellipsoid `x^2/a^2 + y^2/b^2 + z^2/c^2 = 1` at a point on it.
fn ellipsoid_curvatures(p: [f64; 3], axes: [f64; 3]) -> (f64, f64) {
    let [a, b, c] = axes;
    let s: f64 = (0..3).map(|i| p[i] * p[i] / axes[i].powi(4)).sum();
    let r2: f64 = p.iter().map(|x| x * x).sum();
    let h = (a * a + b * b + c * c - r2) / (a * a * b * b * c * c * s.powf(1.5));
    let k = 1.0 / (a * a * b * b * c * c * s * s);
    (h, k)
}

/// Largest curvature error relative to `max(1, |exact|)` over the nodes.
fn ellipsoid_error(surface: &StarShapedSurface, axes: [f64; 3]) -> f64 {
    let c = curvature(surface).unwrap();
    let mut worst = 0.0_f64;
    for i in 0..c.len() {
        let p = surface.point(i);
        let (h, k) = ellipsoid_curvatures([p[0], p[1], p.get(2).copied().unwrap_or(0.0)], axes);
        worst = worst
            .max((c.mean[i] - h).abs() / h.abs().max(1.0))
            .max((c.scalar_intrinsic[i] - 2.0 * k).abs() / (2.0 * k).max(1.0));
    }
    worst
}

#[test]
fn triaxial_ellipsoid_converges_at_fourth_order() {
    let axes = [1.0, 1.4, 0.8];
    let err = |rows: usize| {
        let s = StarShapedSurface::ellipsoid(SphereGrid::full(rows, 2 * rows).unwrap(), &axes).unwrap();
        ellipsoid_error(&s, axes)
    };
    let (coarse, fine) = (err(48), err(96));
    assert!(coarse < 10.0 * (PI / 48.0).powi(4), "{coarse:e}");
    assert!(fine < 10.0 * (PI / 96.0).powi(4), "{fine:e}");
    assert!(coarse / fine > 12.0, "order check: {coarse:e} -> {fine:e}");
}

#[test]
fn prolate_spheroid_matches_closed_form() {
    // polar axis along x_0
    let axes = [2.0, 1.0, 1.0];
    let axi = StarShapedSurface::spheroid(SphereGrid::axisymmetric(3, 128).unwrap(), 1.0, 2.0).unwrap();
    assert!(ellipsoid_error(&axi, axes) < 1e-9);
    // pointwise errors peak on the row next to each pole
    let err = |rows: usize| {
        let full = StarShapedSurface::spheroid(SphereGrid::full(rows, 2 * rows).unwrap(), 1.0, 2.0).unwrap();
        ellipsoid_error(&full, axes)
    };
    let (coarse, fine) = (err(48), err(96));
    assert!(coarse < 50.0 * (PI / 48.0).powi(4), "{coarse:e}");
    assert!(coarse / fine > 12.0, "order check: {coarse:e} -> {fine:e}");
}

#[test]
fn ellipsoid_area_matches_spheroid_formula() {
    // prolate spheroid, semi-axes (a, a, c) with c > a
    let (a, c) = (1.0_f64, 2.0_f64);
    let e = (1.0 - a * a / (c * c)).sqrt();
    let exact = 2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin());
    let s = StarShapedSurface::spheroid(SphereGrid::axisymmetric(3, 64).unwrap(), a, c).unwrap();
    assert!((area(&curvature(&s).unwrap()) - exact).abs() < 1e-10);
}

#[test]
fn round_sphere_yamabe_in_four_dimensions() {
    let s = make_sphere(SphereGrid::axisymmetric(4, 64).unwrap(), 1.0).unwrap();
    let (y, rel) = yamabe_quotients(&s).unwrap();
    let exact = 6.0 * (2.0 * PI * PI).powf(2.0 / 3.0);
    assert!((y - exact).abs() < 1e-10 * exact);
    assert!((rel - 1.0).abs() < 1e-12);
    let big = make_sphere(SphereGrid::axisymmetric(4, 64).unwrap(), 3.0).unwrap();
    assert!((yamabe_quotients(&big).unwrap().0 - exact).abs() < 1e-9 * exact);
}

#[test]
fn gauss_bonnet_on_star_shaped_surfaces() {
    for seed in 0..5 {
        let s = random_star_shaped(SphereGrid::full(48, 96).unwrap(), seed, 0.25).unwrap();
        let total = total_intrinsic_curvature(&curvature(&s).unwrap());
        assert!((total - 8.0 * PI).abs() < 1e-4, "seed {seed}: {total}");
    }
}

#[test]
fn coulomb_flux_is_topological() {
    for (n, seed) in [(3usize, 1u64), (4, 2), (5, 3)] {
        let s = random_star_shaped(SphereGrid::axisymmetric(n, 64).unwrap(), seed, 0.2).unwrap();
        let c = curvature(&s).unwrap();
        let q = charge_flux(&c, &sample_field(&s, &CoulombField { n, charge: 0.7 }));
        assert!((q - 0.7).abs() < 1e-8, "n={n}: {q}");
    }
    let s = random_star_shaped(SphereGrid::full(48, 96).unwrap(), 4, 0.2).unwrap();
    let q = charge_flux(&curvature(&s).unwrap(), &sample_field(&s, &CoulombField { n: 3, charge: -1.3 }));
    assert!((q + 1.3).abs() < 1e-6, "{q}");
}

#[test]
fn table_round_trip() {
    let s = random_star_shaped(SphereGrid::full(12, 24).unwrap(), 9, 0.2).unwrap();
    let text = write_table(&s, None);
    let (back, field) = read_table(&text).unwrap();
    assert_eq!(back.rho(), s.rho());
    assert!(field.is_none());
    let bad: String = text
        .lines()
        .enumerate()
        .map(|(k, line)| {
            let first_row = !line.starts_with('#') && text.lines().take(k).all(|l| l.starts_with('#'));
            if first_row {
                let mut cols: Vec<&str> = line.split_whitespace().collect();
                *cols.last_mut().unwrap() = "-1.0";
                cols.join(" ") + "\n"
            } else {
                format!("{line}\n")
            }
        })
        .collect();
    assert!(read_table(&bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn newton_maclaurin_on_corpus(seed in 0u64..10_000, n in 3usize..=5, amp in 0.05f64..0.4) {
        let g = SphereGrid::axisymmetric(n, 32).unwrap();
        let convex = random_convex_axisymmetric(g.clone(), seed).unwrap();
        let star = random_star_shaped(g, seed, amp).unwrap();
        for s in [&convex, &star] {
            prop_assert!(curvature(s).unwrap().newton_maclaurin_excess() <= 1e-10);
        }
    }

    #[test]
    fn mass_meancurv_implies_positive_mass(seed in 0u64..10_000, n in 3usize..=5, q in -2.0f64..2.0, f in 0.8f64..1.2) {
        let s = random_convex_axisymmetric(SphereGrid::axisymmetric(n, 32).unwrap(), seed).unwrap();
        let h = HorizonMeasures::from_surface(&s).unwrap();
        let x = 2.0 * mass_constant(n) * h.int_mean;
        let mass = 0.5 * (x + q * q / x) * f;
        let reports = certificates(&CertificateInputs { mass, mass_source: ToleranceSource::Quadrature, charge: q, horizon: h }).unwrap();
        let get = |name| reports.iter().find(|r| r.name == name).unwrap();
        if get(InequalityName::MassMeancurv).passed() {
            prop_assert!(get(InequalityName::PositiveMass).passed());
        }
        prop_assert!(get(InequalityName::AfMeancurv).passed());
    }

    #[test]
    fn n3_never_emits_scalar_certificates(seed in 0u64..1000) {
        let s = random_convex_axisymmetric(SphereGrid::axisymmetric(3, 32).unwrap(), seed).unwrap();
        let reports = certificates(&CertificateInputs {
            mass: 1.0,
            mass_source: ToleranceSource::ClosedForm,
            charge: 0.1,
            horizon: HorizonMeasures::from_surface(&s).unwrap(),
        }).unwrap();
        for r in reports.iter().filter(|r| matches!(r.name, InequalityName::AfScalar | InequalityName::PenroseYamabe)) {
            prop_assert!(r.slack.is_none());
        }
    }
}
