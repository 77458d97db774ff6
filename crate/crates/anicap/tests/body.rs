mod common;

use anicap::body::{self, CapBody, RobinTestFunction};
use anicap::verify::random_body;
use anicap::*;
use common::*;

fn interior(d: &Domain) -> impl Iterator<Item = usize> + '_ {
    (0..d.len()).filter(move |&i| !d.is_boundary(i))
}

#[test]
fn tau_of_cap_is_identity_and_of_kernel_vanishes() {
    let c = cap(ell_surface(), -0.3);
    for scheme in [Scheme::FiniteDifference, Scheme::Spectral] {
        // collocation is exact only up to the spectral truncation of ℓ and k
        let (res, tol) = if scheme == Scheme::Spectral { (Resolution::polar(20, 40), 1e-6) } else { (Resolution::polar(12, 24), 1e-9) };
        let d = Domain::new(&c, scheme, res).unwrap();
        let b = CapBody::cap(&d);
        for i in 0..d.len() {
            let t = b.tau().hat[i];
            assert!((t[0][0] - 1.0).abs() < tol && (t[1][1] - 1.0).abs() < tol, "{scheme:?} {t:?}");
            assert!(t[0][1].abs() < tol && t[1][0].abs() < tol, "{scheme:?} {t:?}");
        }
        for a in 0..2 {
            let k = CapBody::new(&d, d.kernel(a));
            for i in 0..d.len() {
                for row in k.tau().hat[i] {
                    assert!(row.iter().all(|v| v.abs() < tol), "{scheme:?} {row:?}");
                }
            }
        }
    }
    // plain differences: identity only up to truncation
    let d = Domain::new(&cap(ell_curve(false), -0.3), Scheme::PlainFiniteDifference, Resolution::curve(200)).unwrap();
    let b = CapBody::cap(&d);
    for i in interior(&d) {
        assert!((b.tau().hat[i][0][0] - 1.0).abs() < 1e-3);
    }
}

#[test]
fn tau_is_linear() {
    let d = Domain::new(&cap(pert_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(10, 20)).unwrap();
    let mut r = rng(3);
    let a = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let b = random_body(&d, &mut r, 0.6, 0.2, false).unwrap();
    let (x, y) = (0.7, -1.3);
    let comb: Vec<f64> = a.values().iter().zip(b.values()).map(|(u, v)| x * u + y * v).collect();
    let c = CapBody::new(&d, comb);
    let scale = a.tau().max_eigenvalue.abs() + b.tau().max_eigenvalue.abs();
    for i in 0..d.len() {
        for p in 0..2 {
            for q in 0..2 {
                let lin = x * a.tau().hat[i][p][q] + y * b.tau().hat[i][p][q];
                assert!((c.tau().hat[i][p][q] - lin).abs() < 1e-12 * scale.max(1.0) * 1e2);
            }
        }
    }
}

#[test]
fn reconstruction_of_cap_scaled_and_translated_bodies() {
    for (norm, w, res) in [
        (ell_curve(false), -0.4, Resolution::curve(60)),
        (ell_surface(), -0.3, Resolution::polar(10, 20)),
        (pert_surface(), 0.2, Resolution::polar(10, 20)),
    ] {
        let c = cap(norm, w);
        let d = Domain::new(&c, Scheme::FiniteDifference, res).unwrap();
        let nodes: Vec<[f64; 3]> = d.grid().nodes.iter().map(|n| n.point).collect();
        let x = CapBody::cap(&d).reconstruct().unwrap();
        assert!(max_dist(&x, &nodes) < 1e-9);

        let s = 1.7;
        let xs = CapBody::cap(&d).scaled(s).reconstruct().unwrap();
        let e = c.e_f();
        for p in &xs {
            let mut y = *p;
            for k in 0..3 {
                y[k] -= s * w * e[k];
            }
            let f0 = c.norm().dual_norm(&y);
            assert!((f0 - s).abs() < 1e-9, "{f0}");
        }

        let eps = 0.05;
        let mut shift = vec![0.0; d.n()];
        shift[0] = eps;
        let xt = CapBody::cap(&d).translated(&shift).reconstruct().unwrap();
        for (p, q) in xt.iter().zip(&nodes) {
            let mut moved = *q;
            moved[0] += eps;
            assert!(dist(p, &moved) < 1e-9);
        }
    }
}

#[test]
fn reconstruct_refuses_non_admissible() {
    let d = Domain::new(&cap(iso(2), -0.2), Scheme::FiniteDifference, Resolution::curve(40)).unwrap();
    let bad = CapBody::new(&d, d.ell().iter().map(|l| -l).collect());
    assert!(matches!(bad.reconstruct(), Err(Error::NotAdmissible { .. })));
}

#[test]
fn psum_examples() {
    let d = Domain::new(&cap(ell_curve(false), -0.3), Scheme::FiniteDifference, Resolution::curve(80)).unwrap();
    let mut r = rng(5);
    let k = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let l = random_body(&d, &mut r, 0.8, 0.2, false).unwrap();
    for p in [1.0, 1.5, 2.0, 5.0] {
        let s = body::psum(0.5, &k, 0.5, &k, p).unwrap();
        assert!(sup(s.values(), k.values()) < 1e-14 * k.max_abs() * 10.0);
    }
    let s = body::psum(0.3, &k, 1.2, &l, 1.0).unwrap();
    for ((v, a), b) in s.values().iter().zip(k.values()).zip(l.values()) {
        assert_eq!(*v, 0.3 * a + 1.2 * b);
    }
    let s = body::psum(1.0, &k, 1.0, &l, 2.0).unwrap();
    for ((v, a), b) in s.values().iter().zip(k.values()).zip(l.values()) {
        assert!((v - (a * a + b * b).sqrt()).abs() < 1e-14);
    }
    let neg = CapBody::new(&d, k.values().iter().map(|v| v - 2.0).collect());
    assert!(matches!(body::psum(0.5, &neg, 0.5, &k, 2.0), Err(Error::NotPositive { .. })));
    assert!(body::psum(0.5, &neg, 0.5, &k, 1.0).is_ok());
    assert!(matches!(body::psum(-0.5, &k, 0.5, &l, 1.0), Err(Error::InvalidSpec(_))));
    assert!(matches!(body::psum(0.5, &k, 0.5, &l, 0.5), Err(Error::InvalidSpec(_))));
}

#[test]
fn pointcloud_oracle_direct_sums_and_upper_half_space() {
    let xk = [[0.0, 1.0, 0.5], [1.0, 0.0, 0.2]];
    let xl = [[2.0, 0.0, 1.0]];
    let s = body::pointcloud_psum_oracle(0.5, &xk, 2.0, &xl, 1.0, &[0.3]);
    assert_eq!(s, vec![[4.0, 0.5, 2.25], [4.5, 0.0, 2.1]]);
    let s = body::pointcloud_psum_oracle(0.5, &xk, 2.0, &xl, 3.0, &[0.0, 0.5, 1.0]);
    assert_eq!(s.len(), 6);
    assert!(s.iter().all(|p| p[2] >= 0.0));
}

#[test]
fn psum_matches_pointcloud_support() {
    // p = 1: the support of the sampled Minkowski sum is the sum of supports
    let d = Domain::new(&cap(ell_curve(false), -0.3), Scheme::FiniteDifference, Resolution::curve(64)).unwrap();
    let mut r = rng(8);
    let k = random_body(&d, &mut r, 1.0, 0.15, false).unwrap();
    let l = random_body(&d, &mut r, 0.7, 0.15, false).unwrap();
    let s = body::psum(1.0, &k, 1.0, &l, 1.0).unwrap();
    let cloud = body::pointcloud_psum_oracle(1.0, &k.surface_samples(4).unwrap(), 1.0, &l.surface_samples(4).unwrap(), 1.0, &[]);
    let h = body::support_of_points(&d, &cloud);
    let scale = s.max_abs();
    for (a, b) in h.iter().zip(s.values()) {
        assert!((a - b).abs() < 5e-3 * scale, "{a} {b}");
        assert!(*a <= b + 1e-9 * scale);
    }
}

#[test]
fn translated_form_of_cap_is_one() {
    for (norm, w, res) in [(ell_curve(false), -0.3, Resolution::curve(80)), (ell_surface(), -0.3, Resolution::polar(16, 32))] {
        let c = cap(norm, w);
        let d = Domain::new(&c, Scheme::FiniteDifference, res).unwrap();
        let t = d.tilde().unwrap();
        let tb = body::to_tilde(&CapBody::cap(&d), &t);
        assert!(tb.values.iter().all(|v| (v - 1.0).abs() < 1e-13));
        assert!(tb.neumann_residual < 1e-9);
        assert!(tb.mixed_boundary < 1e-9);
        assert!(tb.positivity_agrees);

        let mut r = rng(2);
        let b = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
        let tb = body::to_tilde(&b, &t);
        assert!(tb.neumann_residual < 0.2, "{}", tb.neumann_residual);
        assert!(tb.positivity_agrees);
    }
}

#[test]
fn kernel_projection_removes_translation() {
    let d = Domain::new(&cap(sym_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(12, 24)).unwrap();
    let ell = d.ell();
    let k0 = d.kernel(0);
    let v: Vec<f64> = ell.iter().zip(&k0).map(|(l, k)| l + 0.1 * k).collect();
    let b = CapBody::new(&d, v);
    let (p, c) = body::kernel_project(&b);
    assert!(sup(p.values(), &ell) < 1e-10);
    assert!((c[0] - 0.1).abs() < 1e-10 && c[1].abs() < 1e-10);
    let det_a = b.det_tau();
    let det_b = p.det_tau();
    assert!(sup(&det_a, &det_b) < 1e-9);
    // the projected field is orthogonal to both kernels
    let mut r = rng(4);
    let q = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let (qp, _) = body::kernel_project(&q);
    for a in 0..2 {
        assert!(integral_of_product(&d, qp.values(), &d.kernel(a)).abs() < 1e-12);
    }
}

#[test]
fn even_symmetrization() {
    let d = Domain::new(&cap(sym_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(8, 16)).unwrap();
    let even = RobinTestFunction { coefficients: vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.2], even: true }.robin_field(&d);
    let out = body::even_symmetrize(&d, &even).unwrap();
    assert!(sup(&out, &even) < 1e-14);
    assert!(body::odd_defect(&d, &even).unwrap() < 1e-14);
    for a in 0..2 {
        let odd = d.kernel(a);
        assert!(max_abs(&body::even_symmetrize(&d, &odd).unwrap()) < 1e-14);
        assert!(body::odd_defect(&d, &odd).unwrap() > 0.1);
    }
    let m = d.mirror().unwrap();
    let mut r = rng(6);
    let x = random_body(&d, &mut r, 1.0, 0.2, false).unwrap();
    let s = body::even_symmetrize(&d, x.values()).unwrap();
    for i in 0..d.len() {
        assert_eq!(s[i], s[m[i]]);
    }

    let nd = Domain::new(&cap(ell_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(8, 16)).unwrap();
    assert!(matches!(body::even_symmetrize(&nd, &nd.ell()), Err(Error::NotSymmetricNorm)));
}

#[test]
fn scaling_and_surface_spacing() {
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(10, 20)).unwrap();
    let b = CapBody::cap(&d);
    let s = b.scaled(2.0);
    for i in 0..d.len() {
        assert!((s.det_tau()[i] - 4.0 * b.det_tau()[i]).abs() < 1e-10);
    }
    let h1 = body::surface_spacing(&d, &b.reconstruct().unwrap());
    let h2 = body::surface_spacing(&d, &s.reconstruct().unwrap());
    assert!((h2 - 2.0 * h1).abs() < 1e-12);
    let pts = b.surface_samples(5).unwrap();
    assert!(pts.len() > d.len());
    assert!(pts[d.len()..].iter().all(|p| p[2] == 0.0));
}
