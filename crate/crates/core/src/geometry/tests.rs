use super::*;
use crate::config::SlitFamily;
use crate::flow::{FlowEvaluator, TailOptions, TimeGrid};
use crate::koenigs::DEFAULT_Z0;
use crate::pfunc::AuxiliaryFunction;

fn map(pairs: &[(f64, f64)]) -> KoenigsMap {
    let fam = SlitFamily::finite(pairs).unwrap();
    KoenigsMap::from_aux(&AuxiliaryFunction::with_default_truncation(&fam), DEFAULT_Z0).unwrap()
}

fn reports(m: &KoenigsMap) -> Vec<ApproachReport> {
    let ev = FlowEvaluator::new(m.clone());
    (0..m.aux().slits().len())
        .map(|n| {
            let tr = ev.trace_to_limit(n, &TimeGrid::default(), &TailOptions::default()).unwrap();
            assert!(tr.is_complete());
            approach_angle(&tr, m.limit_point(), &ApproachOptions::default()).unwrap()
        })
        .collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const TRIPLE: f64 = 2.0 * std::f64::consts::SQRT_2;

#[test]
fn halfplane_measure_values() {
    assert!((harmonic_measure_halfplane(c(0.0, 1.0), -1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    let far = harmonic_measure_halfplane(c(0.0, 10.0), -1.0, 1.0).unwrap();
    assert!((far - 0.063451).abs() < 1e-6);
    let ys = [1.0, 10.0, 100.0].map(|y| harmonic_measure_halfplane(c(0.0, y), -1.0, 1.0).unwrap());
    assert!(ys[0] > ys[1] && ys[1] > ys[2] && ys[2] > 0.0);
    assert!(harmonic_measure_halfplane(c(0.0, 1.0), 1.0, -1.0).is_err());
}

#[test]
fn sector_measure_values() {
    let q = PI / 4.0;
    let z = Complex64::from_polar(1.0, q);
    assert!((harmonic_measure_sector(z, 0.0, 2.0 * q).unwrap() - 0.5).abs() < 1e-15);
    let z = Complex64::from_polar(1.0, PI / 3.0);
    let w = harmonic_measure_sector(z, 0.0, PI / 2.0).unwrap();
    assert!((w - 1.0 / 3.0).abs() < 1e-15);
    let other = (z.arg() - 0.0) / (PI / 2.0);
    assert_eq!(w + other, 1.0);
    assert!(harmonic_measure_sector(c(-1.0, 0.1), 0.0, PI / 2.0).is_err());
}

#[test]
fn spirallike_margins_positive() {
    let m = map(&[(0.0, 1.0)]);
    assert!(spirallike_check(&m, &[c(0.0, 1.0), c(1.0, 1.0), c(-2.0, 3.0)]).unwrap() > 0.0);
    let m = map(&[(0.0, 1.0), (1.0, 1.0)]);
    assert_eq!(m.case(), CaseKind::ComplexPair);
    assert!(spirallike_check(&m, &random_points(&m, 100, 7)).unwrap() > 0.0);
    assert!(spirallike_check(&map(&[(4.0, 1.0)]), &[c(0.0, 1.0)]).is_err());
}

#[test]
fn univalence_sampling() {
    for pairs in [&[(0.0, 1.0)][..], &[(-3.0, 1.0), (3.0, 1.0)], &[(4.0, 1.0)], &[(-TRIPLE, 1.0), (TRIPLE, 1.0)]] {
        let r = univalence_check(&map(pairs), 1000, 11);
        assert_eq!(r.collisions, 0, "{pairs:?} {r:?}");
    }
}

#[test]
fn sector_amplitudes() {
    let r = sector_report(&map(&[(-3.0, 1.0), (3.0, 1.0)]));
    assert!((r.amplitude() - PI / 9.0).abs() < 1e-12);
    assert!(r.discrepancy() < 1e-6, "{r:?}");
    let SectorReport::Sector { tip_amplitude, .. } = r else { panic!() };
    assert!((tip_amplitude - PI / 9.0).abs() < 1e-6);
    let r = sector_report(&map(&[(-3.0, 1.0), (3.5, 1.2)]));
    assert!(matches!(r, SectorReport::Sector { .. }) && r.discrepancy() < 1e-6, "{r:?}");
    let r = sector_report(&map(&[(-1.0, 1.0), (1.0, 1.0)]));
    assert!((r.amplitude() - PI / 4.0).abs() < 1e-12);
    assert!(r.discrepancy() < 1e-6, "{r:?}");
    let r = sector_report(&map(&[(-4.7, 0.39), (6.0, 2.45)]));
    assert!(r.discrepancy() < 1e-6, "{r:?}");
}

#[test]
fn strip_levels() {
    let m = map(&[(4.0, 1.0)]);
    let scan = image_boundary_scan(&m, &scan_grid(&m, 512));
    let SectorReport::Strip { lower, upper, width_scan, tip_bound, strip_clear, .. } = scan.report else { panic!() };
    assert!(lower.abs() < 1e-12 && (upper - PI).abs() < 1e-12);
    assert!((width_scan - PI).abs() < 1e-12 && (tip_bound - PI).abs() < 1e-12 && strip_clear);
    for s in &scan.samples {
        let level = if s.x < 2.0 { PI } else { 0.0 };
        assert!((s.phi.im - level).abs() < 1e-12, "{s:?}");
    }
    let r = sector_report(&map(&[(-TRIPLE, 1.0), (TRIPLE, 1.0)]));
    assert!(r.discrepancy() < 1e-12, "{r:?}");
}

#[test]
fn distinct_real_angles_match_tips() {
    let m = map(&[(-3.0, 1.0), (3.0, 1.0)]);
    let rot = m.half_plane_rotation().unwrap();
    for r in reports(&m) {
        assert_eq!(r.verdict, Verdict::NonTangential);
        let tip = m.tip_points()[r.slit].arg() + rot;
        assert!((r.angle + wrap_pi(tip) - PI).abs() < 0.02, "{r:?} {tip}");
    }
}

#[test]
fn triple_root_is_orthogonal() {
    for r in reports(&map(&[(-TRIPLE, 1.0), (TRIPLE, 1.0)])) {
        assert_eq!(r.verdict, Verdict::Orthogonal, "{r:?}");
        assert!((r.angle - PI / 2.0).abs() < 0.02);
    }
}

#[test]
fn double_root_is_tangential() {
    for pairs in [&[(4.0, 1.0)][..], &[(-4.0, 1.0)]] {
        let rs = reports(&map(pairs));
        for r in &rs {
            assert_eq!(r.verdict, Verdict::Tangential, "{r:?}");
        }
    }
}

#[test]
fn single_slit_is_radial() {
    let rs = reports(&map(&[(0.0, 1.0)]));
    assert_eq!(rs[0].verdict, Verdict::Radial);
    assert!((rs[0].angle + PI / 2.0).abs() < 1e-6);
}

#[test]
fn large_psi_spirals() {
    for r in reports(&map(&[(-4.7, 0.39), (6.0, 2.45)])) {
        assert_eq!(r.verdict, Verdict::Spiral, "{r:?}");
    }
}
