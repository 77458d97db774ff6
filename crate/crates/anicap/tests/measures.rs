mod common;

use anicap::body::{self, CapBody};
use anicap::measures::*;
use anicap::verify::random_body;
use anicap::*;
use common::*;
use std::f64::consts::PI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn curvature_of_cap_and_of_scaled_cap() {
    for (norm, w, res) in [(ell_curve(false), -0.3, Resolution::curve(60)), (ell_surface(), -0.3, Resolution::polar(10, 20))] {
        let d = Domain::new(&cap(norm, w), Scheme::FiniteDifference, res).unwrap();
        let n = d.n();
        for k in 0..=n {
            let h = hk_curvature(&CapBody::cap(&d), k).unwrap();
            assert!(h.iter().all(|v| (v - 1.0).abs() < 1e-9), "k = {k}");
            let c = 2.5;
            let h = hk_curvature(&CapBody::cap(&d).scaled(c), k).unwrap();
            let want = c.powi(-(k as i32));
            assert!(h.iter().all(|v| (v - want).abs() < 1e-9 * want));
        }
        assert!(matches!(hk_curvature(&CapBody::cap(&d), n + 1), Err(Error::InvalidSpec(_))));
    }
}

#[test]
fn newton_maclaurin_on_random_bodies() {
    let d = Domain::new(&cap(pert_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(12, 24)).unwrap();
    let mut r = rng(17);
    for _ in 0..5 {
        let b = random_body(&d, &mut r, 1.0, 0.3, false).unwrap();
        let h1 = hk_curvature(&b, 1).unwrap();
        let h2 = hk_curvature(&b, 2).unwrap();
        for (a, g) in h1.iter().zip(&h2) {
            assert!(a * a >= g * (1.0 - 1e-12), "{a} {g}");
        }
    }
}

#[test]
fn quermassintegrals_of_the_cap_coincide() {
    // τ = I on the cap, so every 𝒱_j reduces to ∫ℓ/(n+1)
    for (norm, w, res) in [(ell_curve(false), -0.3, Resolution::curve(64)), (ell_surface(), -0.3, Resolution::polar(16, 32))] {
        let d = Domain::new(&cap(norm, w), Scheme::Spectral, res).unwrap();
        let b = CapBody::cap(&d);
        let base = d.integrate(&d.ell()) / (d.n() + 1) as f64;
        for j in 0..=d.n() + 1 {
            assert!(rel(quermass_index(&b, j).unwrap(), base) < 1e-6, "j = {j}");
        }
        assert!(matches!(quermassintegral(&b, -2), Err(Error::InvalidSpec(_))));
    }
}

#[test]
fn hemisphere_and_half_disk() {
    let d = Domain::new(&cap(iso(3), 0.0), Scheme::Spectral, Resolution::polar(16, 32)).unwrap();
    let b = CapBody::cap(&d);
    assert!(rel(volume(&b).unwrap(), 2.0 * PI / 3.0) < 1e-8);
    assert!(rel(anisotropic_area(&b).unwrap(), 2.0 * PI) < 1e-8);
    assert!(rel(bottom_face_area(&b).unwrap(), PI) < 1e-8);
    let d = Domain::new(&cap(iso(2), 0.0), Scheme::FiniteDifference, Resolution::curve(200)).unwrap();
    let b = CapBody::cap(&d);
    assert!(rel(volume(&b).unwrap(), PI / 2.0) < 1e-6);
    assert!(rel(bottom_face_area(&b).unwrap(), 2.0) < 1e-12);
}

#[test]
fn quermassintegral_scaling() {
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(12, 24)).unwrap();
    let mut r = rng(21);
    let b = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let c = 1.8;
    let s = b.scaled(c);
    for k in -1..=2 {
        let want = quermassintegral(&b, k).unwrap() * c.powi(2 - k);
        assert!(rel(quermassintegral(&s, k).unwrap(), want) < 1e-12, "k = {k}");
    }
}

#[test]
fn area_measure_density_of_cap_and_normalization() {
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(24, 48)).unwrap();
    let a = area_measure_density(&CapBody::cap(&d), 1.0, 0).unwrap();
    assert!(a.density.iter().all(|v| (v - 1.0).abs() < 1e-9));
    assert!(a.normalization_defect.unwrap() < 1e-2, "{:?}", a.normalization_defect);
    // one-sided derivatives of the reconstruction near the rim make the
    // defect first order; it must shrink under refinement
    let defect = |rings: usize| {
        let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(rings, 2 * rings)).unwrap();
        let b = random_body(&d, &mut rng(9), 1.0, 0.2, false).unwrap();
        area_measure_density(&b, 1.0, 0).unwrap().normalization_defect.unwrap()
    };
    let (coarse, fine) = (defect(12), defect(24));
    assert!(fine < 5e-2 && fine < 0.7 * coarse, "{coarse} {fine}");
    let mut r = rng(9);
    let b = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    // p ≠ 1 weights by ŝ^{1−p}
    let a2 = area_measure_density(&b, 3.0, 1).unwrap();
    for i in 0..d.len() {
        let want = b.values()[i].powf(-2.0) * b.sigma(1, i);
        assert!(rel(a2.density[i], want) < 1e-12);
    }
    assert!(a2.m_omega.is_none());
}

#[test]
fn area_measure_density_is_orthogonal_to_translations() {
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::Spectral, Resolution::polar(16, 32)).unwrap();
    let mut r = rng(12);
    let b = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let a = area_measure_density(&b, 1.0, 0).unwrap();
    let total = d.integrate(&a.density);
    for k in 0..2 {
        assert!(integral_of_product(&d, &a.density, &d.kernel(k)).abs() < 1e-8 * total);
    }
}

#[test]
fn mixed_quermassintegral_identities() {
    let d = Domain::new(&cap(pert_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(12, 24)).unwrap();
    let mut r = rng(30);
    let k = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let l = random_body(&d, &mut r, 0.8, 0.2, false).unwrap();
    let vol = volume(&k).unwrap();
    for p in [1.0, 2.0, 3.5] {
        let w = mixed_quermassintegral(&k, &k, p, 0).unwrap();
        assert!(rel(w, 3.0 * vol / p) < 1e-12);
        assert!(minkowski_slack(&k, &k, p).unwrap().abs() < 1e-12);
    }
    // W_{1,k}(K, C) matches 𝒱_{k+1}(K) up to the (n−k+1) factor
    let c = CapBody::cap(&d);
    for kk in 0..=2 {
        let w = mixed_quermassintegral(&k, &c, 1.0, kk).unwrap();
        let v = quermassintegral(&k, kk as i32).unwrap();
        assert!(rel(w, (3 - kk) as f64 * v) < 1e-12, "k = {kk}");
    }
    assert!(minkowski_slack(&k, &l, 1.0).unwrap() > -1e-6);
}

#[test]
fn inradius_of_scaled_and_translated_cap() {
    for (norm, res) in [(ell_curve(false), Resolution::curve(80)), (ell_surface(), Resolution::polar(12, 24))] {
        let d = Domain::new(&cap(norm, -0.3), Scheme::FiniteDifference, res).unwrap();
        for c in [0.5, 1.0, 2.3] {
            let b = CapBody::cap(&d).scaled(c);
            assert!((inradius(&b) - c).abs() < 1e-4, "{}", inradius(&b));
            let shift = vec![0.07; d.n()];
            assert!((inradius(&b.translated(&shift)) - c).abs() < 1e-4);
        }
    }
}

#[test]
fn stated_inradius_bound_fails_where_derived_bound_holds() {
    // A wide flat body: its largest inscribed cap does not touch every
    // support plane, and Vol/𝒱₁ exceeds r while staying below (n+1)r.
    let d = Domain::new(&cap(iso(2), -0.3), Scheme::FiniteDifference, Resolution::curve(200)).unwrap();
    let cap_slack = inequality_slacks(&CapBody::cap(&d)).unwrap();
    assert!(cap_slack.inradius_bound.abs() < 1e-4);
    let ell = d.ell();
    let k = d.kernel(0);
    let widened: Vec<f64> = ell.iter().zip(&k).map(|(l, kv)| l + 0.8 * kv.abs()).collect();
    let b = CapBody::new(&d, widened);
    let s = inequality_slacks(&b).unwrap();
    assert!(s.inradius_bound < -1e-2, "{s:?}");
    assert!(s.inradius_bound_derived > 0.0, "{s:?}");
}

#[test]
fn variation_of_volume_and_translation_invariance() {
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::Spectral, Resolution::polar(16, 32)).unwrap();
    let mut r = rng(40);
    let b = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    // speed ℓ keeps the Robin condition: d/dt Vol = (n+1)𝒱_1-type integral
    let v = variational_check(&b, &d.ell(), -1, 1e-3).unwrap();
    assert!(v.relerr < 1e-6, "{v:?}");
    // with a free boundary of contact angle π/2 constants are admissible
    // speeds and the derivative of the volume is the area
    let d0 = Domain::new(&cap(ell_surface(), 0.0), Scheme::Spectral, Resolution::polar(16, 32)).unwrap();
    let b0 = random_body(&d0, &mut rng(41), 1.0, 0.2, false).unwrap();
    let one = vec![1.0; d0.len()];
    let v = variational_check(&b0, &one, -1, 1e-3).unwrap();
    assert!(rel(v.rhs, anisotropic_area(&b0).unwrap()) < 1e-12);
    assert!(v.relerr < 1e-6, "{v:?}");
    for k in -1..=1 {
        let v = variational_check(&b, &d.kernel(0), k, 1e-3).unwrap();
        assert!(v.lhs.abs() < 1e-6 && v.rhs.abs() < 1e-6, "{v:?}");
    }
    assert!(matches!(variational_check(&b, &one, 2, 1e-3), Err(Error::InvalidSpec(_))));
}

#[test]
fn monte_carlo_volume() {
    let d = Domain::new(&cap(iso(3), 0.0), Scheme::FiniteDifference, Resolution::polar(48, 96)).unwrap();
    let b = CapBody::cap(&d);
    let mc = mc_volume(&b, 200_000, 3).unwrap();
    assert_eq!(mc.samples, 200_000);
    assert!((mc.volume - 2.0 * PI / 3.0).abs() < 3.0 * mc.std_error, "{mc:?}");
    let s = mc_volume(&b.scaled(1.5), 200_000, 3).unwrap();
    assert!(rel(s.volume, mc.volume * 1.5f64.powi(3)) < 1e-12);
    let again = mc_volume(&b, 200_000, 3).unwrap();
    assert_eq!(again.volume, mc.volume);
}

#[test]
fn isoperimetric_slack_and_area_forms() {
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::Spectral, Resolution::polar(16, 32)).unwrap();
    let c = inequality_slacks(&CapBody::cap(&d)).unwrap();
    assert!(c.isoperimetric.abs() < 1e-8);
    assert!(c.area_consistency.abs() < 1e-8);
    let mut r = rng(50);
    for _ in 0..4 {
        let b = random_body(&d, &mut r, 1.0, 0.3, false).unwrap();
        let s = inequality_slacks(&b).unwrap();
        assert!(s.isoperimetric > -1e-8, "{s:?}");
        let v1 = quermass_index(&b, 1).unwrap();
        assert!(s.area_consistency.abs() < 1e-5 * v1, "{s:?}");
        assert!(s.quermass_inradius > -1e-6, "{s:?}");
        assert!(s.inradius_bound_derived > 0.0);
    }
}

#[test]
fn brunn_minkowski_for_p_sums() {
    let d = Domain::new(&cap(sym_surface(), -0.3), Scheme::Spectral, Resolution::polar(16, 32)).unwrap();
    let mut r = rng(60);
    let k = random_body(&d, &mut r, 1.0, 0.2, true).unwrap();
    let l = random_body(&d, &mut r, 0.7, 0.2, true).unwrap();
    for p in [1.0, 2.0] {
        for t in [0.25, 0.5, 0.75] {
            assert!(brunn_minkowski_slack(&k, &l, p, t).unwrap() > -1e-8);
        }
        assert!(brunn_minkowski_slack(&k, &k, p, 0.5).unwrap().abs() < 1e-12);
    }
    let _ = body::psum(0.5, &k, 0.5, &l, 2.0).unwrap();
}

#[test]
fn linearized_operator_is_self_adjoint_on_spectral_grids() {
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::Spectral, Resolution::polar(16, 32)).unwrap();
    let mut r = rng(70);
    let s = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let v = random_body(&d, &mut r, 0.5, 0.3, false).unwrap();
    let w = random_body(&d, &mut r, 0.8, 0.3, false).unwrap();
    assert!(self_adjointness_defect(&d, s.values(), v.values(), w.values()) < 1e-6);
    // on the cap the operator is the trace: L(ℓ) = n
    let l = linearized_apply(&d, &d.ell(), &d.ell());
    assert!(l.iter().all(|x| (x - 2.0).abs() < 1e-6));
}

#[test]
fn measure_report_is_consistent() {
    let d = Domain::new(&cap(ell_curve(false), -0.3), Scheme::FiniteDifference, Resolution::curve(100)).unwrap();
    let b = CapBody::cap(&d).scaled(1.3);
    let rep = measure_report(&b, Some((20_000, 1))).unwrap();
    assert_eq!(rep.quermass.len(), 3);
    assert_eq!(rep.volume, rep.quermass[0]);
    assert!((rep.inradius - 1.3).abs() < 1e-4);
    assert!(rel(rep.volume_mc.unwrap().volume, rep.volume) < 5e-2);
}
