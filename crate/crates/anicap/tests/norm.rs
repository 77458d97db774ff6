mod common;

use anicap::oracle::{brute_force_dual_norm, fd_oracle_jet, jet_deviation};
use anicap::*;
use common::*;
use rand::Rng;

fn random_dir<R: Rng>(r: &mut R, d: usize) -> [f64; 3] {
    let mut y = [0.0; 3];
    loop {
        for v in y.iter_mut().take(d) {
            *v = r.gen_range(-1.0..1.0);
        }
        let s = y.iter().map(|v| v * v).sum::<f64>();
        if s > 1e-2 && s <= 1.0 {
            let s = s.sqrt();
            return [y[0] / s, y[1] / s, y[2] / s];
        }
    }
}

#[test]
fn evaluates_closed_forms() {
    assert!((iso(2).eval(&[3.0, 4.0, 0.0]) - 5.0).abs() < 1e-14);
    let e = MinkowskiNorm::ellipsoidal(2, [[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]], Symmetry::both()).unwrap();
    assert!((e.eval(&[1.0, 0.0, 0.0]) - 2.0).abs() < 1e-14);
}

#[test]
fn homogeneity_and_euler_identity() {
    let mut r = rng(1);
    for norm in [ell_surface(), pert_surface(), pert_curve()] {
        for _ in 0..100 {
            let x = random_dir(&mut r, norm.dim());
            let y = [2.0 * x[0], 2.0 * x[1], 2.0 * x[2]];
            assert!((norm.eval(&y) - 2.0 * norm.eval(&x)).abs() < 1e-12);
            let psi = norm.cahn_hoffman(&x);
            let euler = psi[0] * x[0] + psi[1] * x[1] + psi[2] * x[2] - norm.eval(&x);
            assert!(euler.abs() < 1e-12, "{euler}");
        }
    }
}

#[test]
fn cahn_hoffman_matches_difference_quotient() {
    let e = MinkowskiNorm::ellipsoidal(2, [[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]], Symmetry::both()).unwrap();
    let psi = e.cahn_hoffman(&[1.0, 0.0, 0.0]);
    let h = 1e-6;
    for i in 0..2 {
        let mut p = [1.0, 0.0, 0.0];
        let mut m = p;
        p[i] += h;
        m[i] -= h;
        let fd = (e.eval(&p) - e.eval(&m)) / (2.0 * h);
        assert!((psi[i] - fd).abs() < 1e-8);
    }
    assert!((psi[0] - 2.0).abs() < 1e-12 && psi[1].abs() < 1e-12);
    let x = [0.6, 0.8, 0.0];
    let p = iso(2).cahn_hoffman(&x);
    assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
}

#[test]
fn a_f_is_identity_for_isotropic() {
    let mut r = rng(2);
    let n = iso(3);
    for _ in 0..50 {
        let a = n.a_f(&random_dir(&mut r, 3)).unwrap();
        for p in 0..2 {
            for q in 0..2 {
                assert!((a[p][q] - if p == q { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn a_f_gives_ellipse_curvature_radii() {
    // Wulff shape of √(xᵀMx) is the ellipse with semi-axes 2 and 1
    let (a, b) = (2.0f64, 1.0f64);
    let e = MinkowskiNorm::ellipsoidal(2, [[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]], Symmetry::both()).unwrap();
    for k in 0..24 {
        let t = k as f64 * 0.26 + 0.1;
        let nrm = [b * t.cos(), a * t.sin()];
        let l = (nrm[0] * nrm[0] + nrm[1] * nrm[1]).sqrt();
        let x = [nrm[0] / l, nrm[1] / l, 0.0];
        // ψ(x) is the ellipse point with that outer normal
        let psi = e.cahn_hoffman(&x);
        assert!((psi[0] - a * t.cos()).abs() < 1e-12 && (psi[1] - b * t.sin()).abs() < 1e-12);
        let radius = (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5) / (a * b);
        let af = e.a_f(&x).unwrap()[0][0];
        assert!((af - radius).abs() < 1e-10 * radius, "t={t}: {af} vs {radius}");
    }
}

/// min over the circle of h + h'' for h(θ) = F(cos θ, sin θ), by differences.
fn min_radius(eps: f64) -> f64 {
    let f = |t: f64| {
        let (c, s) = (t.cos(), t.sin());
        let q = (c * c + 1.3 * s * s).sqrt();
        q * (1.0 + eps * c * c * s * s)
    };
    let h = 1e-4;
    (0..2000)
        .map(|k| {
            let t = k as f64 * std::f64::consts::PI / 1000.0;
            f(t) + (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn perturbation_threshold_matches_bisection_oracle() {
    let build = |eps: f64| {
        MinkowskiNorm::perturbed(2, [[1.0, 0.0, 0.0], [0.0, 1.3, 0.0], [0.0; 3]], eps, vec![Monomial { coef: 1.0, exps: [2, 2, 0] }], Symmetry::both())
    };
    let bisect = |ok: &dyn Fn(f64) -> bool| {
        let (mut lo, mut hi) = (0.0, 50.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let lib = bisect(&|e| build(e).is_ok());
    let oracle = bisect(&|e| min_radius(e) > 0.0);
    assert!(lib.is_finite() && lib < 49.0);
    assert!((lib - oracle).abs() < 1e-3 * oracle, "{lib} vs {oracle}");
    match build(lib * 1.05) {
        Err(Error::NonConvexNorm { min_eigenvalue }) => assert!(min_eigenvalue <= 0.0),
        other => panic!("expected NonConvexNorm, got {other:?}"),
    }
}

#[test]
fn dual_norm_examples() {
    let e = MinkowskiNorm::ellipsoidal(2, [[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]], Symmetry::both()).unwrap();
    assert!((e.dual_norm(&[1.0, 0.0, 0.0]) - 0.5).abs() < 1e-14);
    // sampled supremum over 10⁵ directions
    let mut best: f64 = 0.0;
    for k in 0..100_000 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 100_000.0;
        let y = [t.cos(), t.sin(), 0.0];
        best = best.max(y[0] / e.eval(&y));
    }
    assert!((best - 0.5).abs() < 1e-8);
    let mut r = rng(3);
    for norm in [iso(3), ell_surface(), pert_surface(), pert_curve()] {
        for _ in 0..50 {
            let x = random_dir(&mut r, norm.dim());
            let w = norm.dual_norm(&norm.cahn_hoffman(&x));
            assert!((w - 1.0).abs() < 1e-10, "{w}");
        }
        let z = random_dir(&mut r, norm.dim());
        let bf = brute_force_dual_norm(&norm, &z);
        assert!((norm.dual_norm(&z) - bf).abs() < 1e-8);
    }
    let z = [0.3, -1.2, 0.7];
    assert!((iso(3).dual_norm(&z) - (0.09f64 + 1.44 + 0.49).sqrt()).abs() < 1e-15);
}

#[test]
fn dual_jet_examples() {
    let m = [[1.0, 0.1, 0.0], [0.1, 1.5, 0.0], [0.0, 0.0, 2.0]];
    // M⁻¹ by cofactors
    let det = 1.0 * 1.5 * 2.0 - 0.1 * 0.1 * 2.0;
    let inv = [[1.5 * 2.0 / det, -0.1 * 2.0 / det, 0.0], [-0.1 * 2.0 / det, 2.0 / det, 0.0], [0.0, 0.0, (1.5 - 0.01) / det]];
    let e = MinkowskiNorm::ellipsoidal(3, m, Symmetry::none()).unwrap();
    let mut r = rng(4);
    for _ in 0..20 {
        let y = random_dir(&mut r, 3);
        let j = e.dual_jet(&y).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!((j.g[a][b] - inv[a][b]).abs() < 1e-12);
                for c in 0..3 {
                    assert!(j.q[a][b][c].abs() < 1e-12);
                }
            }
        }
        let fd = fd_oracle_jet(&e, &y).unwrap();
        let (dg, _) = jet_deviation(&j, &fd);
        assert!(dg < 1e-6);
    }
}

#[test]
fn perturbed_jet_properties() {
    let mut r = rng(5);
    for norm in [pert_surface(), pert_curve()] {
        let d = norm.dim();
        for _ in 0..12 {
            let x = random_dir(&mut r, d);
            let z = norm.cahn_hoffman(&x);
            let j = norm.dual_jet(&z).unwrap();
            let (v, w) = (random_dir(&mut r, d), random_dir(&mut r, d));
            assert!(j.q_form(&z, &v, &w).abs() < 1e-10);
            for a in 0..d {
                for b in 0..d {
                    assert!((j.g[a][b] - j.g[b][a]).abs() < 1e-12);
                    for c in 0..d {
                        let q = j.q[a][b][c];
                        assert!((q - j.q[b][a][c]).abs() < 1e-6 && (q - j.q[a][c][b]).abs() < 1e-6);
                    }
                }
            }
            // G is 0-homogeneous, Q is (−1)-homogeneous
            let j2 = norm.dual_jet(&[2.0 * z[0], 2.0 * z[1], 2.0 * z[2]]).unwrap();
            for a in 0..d {
                for b in 0..d {
                    assert!((j2.g[a][b] - j.g[a][b]).abs() < 1e-10);
                    for c in 0..d {
                        assert!((2.0 * j2.q[a][b][c] - j.q[a][b][c]).abs() < 1e-9);
                    }
                }
            }
            let fd = fd_oracle_jet(&norm, &z).unwrap();
            let (dg, dq) = jet_deviation(&j, &fd);
            assert!(dg < 1e-6 && dq < 1e-4, "{dg} {dq}");
        }
    }
}

#[test]
fn isotropic_jet_collapses() {
    let mut r = rng(6);
    let n = iso(3);
    for _ in 0..100 {
        let y = random_dir(&mut r, 3);
        let j = n.dual_jet(&y).unwrap();
        let fd = fd_oracle_jet(&n, &y).unwrap();
        let (dg, dq) = jet_deviation(&j, &fd);
        assert!(dg < 1e-6 && dq < 1e-4);
        for a in 0..3 {
            for b in 0..3 {
                assert!((j.g[a][b] - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(MinkowskiNorm::isotropic(4), Err(Error::InvalidNorm(_))));
    let bad = MinkowskiNorm::ellipsoidal(2, [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0; 3]], Symmetry::none());
    assert!(bad.is_err());
    let odd = MinkowskiNorm::perturbed(2, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]], 0.1, vec![Monomial { coef: 1.0, exps: [1, 0, 0] }], Symmetry::none());
    assert!(matches!(odd, Err(Error::InvalidNorm(_))));
    let lie = MinkowskiNorm::ellipsoidal(2, [[1.0, 0.3, 0.0], [0.3, 1.0, 0.0], [0.0; 3]], Symmetry::both());
    assert!(matches!(lie, Err(Error::SymmetryViolated(_))));
}
