mod common;

use loewner_core::config::{Lattice, Sides, WeightLaw};
use loewner_core::flow::FlowEvaluator;
use loewner_core::koenigs::{KoenigsMap, DEFAULT_Z0};
use loewner_core::roots::{classify, CaseKind};
use loewner_core::{AuxiliaryFunction, SlitFamily};
use num_complex::Complex64;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.5f64..4.0, 0.05f64..3.0), 1..=6).prop_flat_map(|gaps| {
        (-8.0f64..0.0).prop_map(move |start| {
            let mut k = start;
            gaps.iter()
                .map(|&(g, b)| {
                    k += g;
                    (k, b)
                })
                .collect()
        })
    })
}

fn upper() -> impl Strategy<Value = Complex64> {
    (-6.0f64..6.0, 0.1f64..4.0).prop_map(|(x, y)| Complex64::new(x, y))
}

fn map(pairs: &[(f64, f64)], z0: Complex64) -> Option<KoenigsMap> {
    let aux = AuxiliaryFunction::with_default_truncation(&SlitFamily::finite(pairs).ok()?);
    let cls = classify(&aux, Default::default()).ok()?;
    if !cls.is_resolved() {
        return None;
    }
    KoenigsMap::new(&aux, &cls, z0).ok()
}

fn near_pole(pairs: &[(f64, f64)], z: Complex64) -> bool {
    pairs.iter().any(|&(k, _)| (z - k).norm() < 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn scaling_covariance(pairs in family(), c in 0.3f64..3.0) {
        let fam = SlitFamily::finite(&pairs).unwrap();
        let scaled = fam.scaled(c).unwrap();
        let a = AuxiliaryFunction::with_default_truncation(&fam);
        let b = AuxiliaryFunction::with_default_truncation(&scaled);
        let z = Complex64::new(0.3, 1.1);
        prop_assert!((b.value(z * c) - a.value(z) * c).norm() <= 1e-12 * (1.0 + (a.value(z) * c).norm()) * 10.0);
        let ca = classify(&a, Default::default()).unwrap();
        let cb = classify(&b, Default::default()).unwrap();
        if ca.is_resolved() && cb.is_resolved() {
            prop_assert_eq!(ca.kind(), cb.kind());
            prop_assert_eq!(ca.standard_roots.len(), cb.standard_roots.len());
            for (x, y) in ca.standard_roots.iter().zip(&cb.standard_roots) {
                prop_assert!((y.value - c * x.value).abs() <= 1e-9 * (1.0 + y.value.abs()));
            }
        }
    }

    #[test]
    fn flow_scaling(pairs in family(), c in 0.5f64..2.0, z in upper(), t in 0.05f64..0.9) {
        let (Some(m1), Some(m2)) = (map(&pairs, DEFAULT_Z0), map(&SlitFamily::finite(&pairs).unwrap().scaled(c).unwrap().materialize(64).iter().map(|s| (s.k, s.b)).collect::<Vec<_>>(), DEFAULT_Z0)) else {
            return Ok(());
        };
        let f1 = FlowEvaluator::new(m1).eval_f(z, t).unwrap();
        let f2 = FlowEvaluator::new(m2).eval_f(z * c, t).unwrap();
        prop_assert!((f2 - f1 * c).norm() <= 1e-8 * (1.0 + f2.norm()), "{} {}", f1 * c, f2);
    }

    #[test]
    fn decompositions_agree(pairs in family(), z in upper(), w in upper(), l in -6.0f64..6.0) {
        let aux = AuxiliaryFunction::with_default_truncation(&SlitFamily::finite(&pairs).unwrap());
        prop_assume!(!near_pole(&pairs, z) && !pairs.iter().any(|p| (p.0 - l).abs() < 0.05));
        prop_assume!((z - w).norm() > 0.05 && (z - w.conj()).norm() > 0.05);
        let l1 = Complex64::new(l, 0.0);
        let l2 = w;
        let tol = |v: Complex64| 1e-10 * (1.0 + v.norm());
        let f = aux.f_direct(z, w).unwrap();
        prop_assert!((f - aux.f_decomposed(z, w).unwrap()).norm() <= tol(f) * 100.0);
        prop_assume!((z - l1).norm() > 0.05);
        let h = aux.h_direct(z, l1, l2).unwrap();
        prop_assert!((h - aux.h_decomposed(z, l1, l2).unwrap()).norm() <= tol(h) * 100.0);
        let g = aux.g_direct(z, l1).unwrap();
        prop_assert!((g - aux.g_decomposed(z, l1).unwrap()).norm() <= tol(g) * 100.0);
    }

    #[test]
    fn koenigs_differential_identity(pairs in family(), z in upper()) {
        prop_assume!(!near_pole(&pairs, z));
        let Some(m) = map(&pairs, DEFAULT_Z0) else { return Ok(()) };
        let lhs = m.derivative(z) * m.aux().value(z);
        let rhs = if m.is_multiplicative() { m.rate() * m.eval_unchecked(z) } else { Complex64::new(1.0, 0.0) };
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
        let h = 1e-6 * (1.0 + z.norm());
        let fd = (m.phi(z + h) - m.phi(z - h)) / (2.0 * h);
        let exact = if m.is_multiplicative() { m.rate() / m.aux().value(z) } else { 1.0 / m.aux().value(z) };
        prop_assert!((fd - exact).norm() <= 1e-5 * (1.0 + exact.norm()));
    }

    #[test]
    fn base_point_changes_h_by_a_constant(pairs in family(), z0 in upper(), zs in prop::collection::vec(upper(), 10)) {
        prop_assume!(!near_pole(&pairs, z0));
        let (Some(a), Some(b)) = (map(&pairs, DEFAULT_Z0), map(&pairs, z0)) else { return Ok(()) };
        let consts: Vec<Complex64> = zs
            .iter()
            .filter(|z| !near_pole(&pairs, **z))
            .map(|&z| if a.is_multiplicative() { b.phi(z) - a.phi(z) } else { b.eval_unchecked(z) - a.eval_unchecked(z) })
            .collect();
        let two_pi = 2.0 * std::f64::consts::PI;
        for c in &consts {
            let mut d = *c - consts[0];
            if a.is_multiplicative() {
                d.im -= two_pi * (d.im / two_pi).round();
            }
            prop_assert!(d.norm() <= 1e-9 * (1.0 + consts[0].norm()));
        }
    }

    #[test]
    fn config_round_trip(pairs in family()) {
        let fam = SlitFamily::finite(&pairs).unwrap();
        prop_assert_eq!(SlitFamily::from_json(&fam.to_json()).unwrap(), fam);
    }

    #[test]
    fn lattice_round_trip_and_prefix(spacing in 0.5f64..3.0, b0 in 0.01f64..1.0, ratio in 0.1f64..0.9, n in 1usize..40) {
        let lat = Lattice {
            spacing,
            offset: 0.0,
            sides: Sides::Both,
            law: WeightLaw::Geometric { b0, ratio },
            truncation: 64,
            tail: None,
        };
        let fam = SlitFamily::lattice(lat).unwrap();
        prop_assert_eq!(SlitFamily::from_json(&fam.to_json()).unwrap(), fam.clone());
        let small = fam.materialize(n);
        let big = fam.materialize(n + 1);
        prop_assert!(small.iter().all(|s| big.contains(s)));
        prop_assert_eq!(big.len() - small.len(), 2);
        prop_assert!(fam.tail_weight(n + 1) < fam.tail_weight(n));
    }

    #[test]
    fn root_counts(pairs in family()) {
        let aux = AuxiliaryFunction::with_default_truncation(&SlitFamily::finite(&pairs).unwrap());
        let cls = classify(&aux, Default::default()).unwrap();
        let extra = if cls.kind() == CaseKind::TripleRoot { 3 } else { 2 };
        prop_assert_eq!(cls.standard_roots.len() + extra, pairs.len() + 1);
        prop_assert_eq!(cls.standard_roots.len(), cls.intervals.bounded_count() - usize::from(cls.kind() == CaseKind::TripleRoot));
    }
}
