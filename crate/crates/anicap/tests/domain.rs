mod common;

use anicap::domain::build_grid;
use anicap::*;
use common::*;
use std::f64::consts::PI;

#[test]
fn quarter_arc_nodes() {
    let c = cap(iso(2), 0.0);
    let g = build_grid(&c, Scheme::FiniteDifference, Resolution::curve(4)).unwrap();
    assert_eq!(g.len(), 5);
    let mut angles: Vec<f64> = g.nodes.iter().map(|n| n.point[1].atan2(n.point[0])).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (k, a) in angles.iter().enumerate() {
        assert!((a - k as f64 * PI / 4.0).abs() < 1e-12, "{a}");
    }
    for n in &g.nodes {
        assert!((n.point[0].hypot(n.point[1]) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn boundary_nodes_lie_on_the_plane() {
    for (norm, w, res) in [
        (ell_surface(), -0.3, Resolution::polar(12, 24)),
        (pert_surface(), -0.4, Resolution::polar(12, 24)),
        (pert_curve(), 0.3, Resolution::curve(40)),
    ] {
        let c = cap(norm, w);
        for scheme in [Scheme::FiniteDifference, Scheme::Spectral] {
            let g = build_grid(&c, scheme, res).unwrap();
            let v = c.dim() - 1;
            let mut count = 0;
            for i in g.boundary_nodes() {
                assert!(g.nodes[i].point[v].abs() < 1e-10);
                count += 1;
            }
            assert!(count > 0);
            for n in g.nodes.iter().filter(|n| !n.boundary) {
                assert!(n.point[v] > 0.0);
            }
            // injective chart
            for i in 0..g.len() {
                for j in i + 1..g.len() {
                    assert!(dist(&g.nodes[i].point, &g.nodes[j].point) > 1e-9);
                }
            }
        }
    }
}

#[test]
fn hemisphere_area_and_half_circle_length() {
    let d = Domain::new(&cap(iso(3), 0.0), Scheme::FiniteDifference, Resolution::polar(128, 128)).unwrap();
    let area = d.integrate(&vec![1.0; d.len()]);
    assert!((area - 2.0 * PI).abs() < 1e-3, "{area}");
    let d = Domain::new(&cap(iso(2), 0.0), Scheme::FiniteDifference, Resolution::curve(200)).unwrap();
    let len = d.integrate(&vec![1.0; d.len()]);
    assert!((len - PI).abs() < 1e-6, "{len}");
    let f = d.field(|x| x[0] * x[0] + x[1]);
    let g: Vec<f64> = f.iter().map(|v| 4.0 * v).collect();
    assert_eq!(d.integrate(&g), 4.0 * d.integrate(&f));
}

#[test]
fn ellipsoidal_metric_is_pullback_of_inverse() {
    let det = 1.0 * 1.5 * 2.0 - 0.1 * 0.1 * 2.0;
    let inv = [[3.0 / det, -0.2 / det, 0.0], [-0.2 / det, 2.0 / det, 0.0], [0.0, 0.0, 1.49 / det]];
    let d = Domain::new(&cap(ell_surface(), -0.3), Scheme::FiniteDifference, Resolution::polar(10, 20)).unwrap();
    for nm in &d.metric().nodes {
        for a in 0..2 {
            for b in 0..2 {
                let pull: f64 = (0..3).map(|i| (0..3).map(|j| inv[i][j] * nm.z[a][i] * nm.z[b][j]).sum::<f64>()).sum();
                assert!((nm.g[a][b] - pull).abs() < 1e-10 * (1.0 + pull.abs()));
                for c in 0..2 {
                    assert!(nm.q[a][b][c].abs() < 1e-10);
                }
            }
        }
        assert!(nm.g[0][0] > 0.0 && nm.g[0][0] * nm.g[1][1] - nm.g[0][1] * nm.g[1][0] > 0.0);
    }
    assert!(d.weights().iter().all(|w| *w > 0.0));
}

#[test]
fn q_tensor_is_totally_symmetric() {
    let d = Domain::new(&cap(pert_surface(), -0.4), Scheme::FiniteDifference, Resolution::polar(8, 16)).unwrap();
    let mut largest: f64 = 0.0;
    for nm in &d.metric().nodes {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let q = nm.q[a][b][c];
                    largest = largest.max(q.abs());
                    assert!((q - nm.q[b][a][c]).abs() < 1e-10 && (q - nm.q[a][c][b]).abs() < 1e-10);
                }
            }
        }
    }
    assert!(largest > 1e-3, "perturbed norm should have Q ≠ 0");
}

#[test]
fn hessian_of_constants_and_circle_functions() {
    for (c, res) in [(cap(ell_surface(), -0.3), Resolution::polar(12, 24)), (cap(pert_curve(), -0.2), Resolution::curve(50))] {
        for scheme in [Scheme::FiniteDifference, Scheme::PlainFiniteDifference, Scheme::Spectral] {
            let d = Domain::new(&c, scheme, res).unwrap();
            for h in d.covariant_hessian(&vec![2.5; d.len()]) {
                assert!(h[0][0].abs() < 1e-7 && h[0][1].abs() < 1e-7 && h[1][1].abs() < 1e-7, "{scheme:?} {h:?}");
            }
        }
    }
    // on the unit half circle, the height ξ₂ = sin(arc) has Hessian −sin
    let c = cap(iso(2), 0.0);
    let (mut hs, mut es) = (vec![], vec![]);
    for n in [50, 100, 200] {
        let d = Domain::new(&c, Scheme::PlainFiniteDifference, Resolution::curve(n)).unwrap();
        let f = d.field(|x| x[1]);
        let h = d.covariant_hessian(&f);
        let e = (0..d.len()).filter(|&i| !d.is_boundary(i)).map(|i| (h[i][0][0] + f[i]).abs()).fold(0.0, f64::max);
        hs.push(d.grid().spacing());
        es.push(e);
    }
    let o = order(&hs, &es);
    assert!((o - 2.0).abs() <= 0.3, "order {o} errors {es:?}");
}

#[test]
fn kernel_functions_solve_the_homogeneous_tau_equation() {
    let c = cap(pert_surface(), -0.4);
    let (mut hs, mut es) = (vec![], vec![]);
    for r in [16, 32, 64] {
        let d = Domain::new(&c, Scheme::PlainFiniteDifference, Resolution::polar(r, 2 * r)).unwrap();
        let k = d.kernel(1);
        let sq: Vec<f64> = (0..d.len())
            .map(|i| {
                let t = d.tau_hat(&k, i);
                t[0][0] * t[0][0] + 2.0 * t[0][1] * t[0][1] + t[1][1] * t[1][1]
            })
            .collect();
        hs.push(d.grid().spacing());
        es.push(d.integrate(&sq).sqrt());
    }
    let o = order(&hs, &es);
    assert!((o - 2.0).abs() <= 0.3, "order {o}");
    // the default stencils are exact on kernel functions
    let d = Domain::new(&c, Scheme::FiniteDifference, Resolution::polar(16, 32)).unwrap();
    for a in 0..2 {
        let k = d.kernel(a);
        for i in 0..d.len() {
            let t = d.tau_hat(&k, i);
            assert!(t[0][0].abs().max(t[0][1].abs()).max(t[1][1].abs()) < 1e-9);
        }
    }
}

#[test]
fn robin_residual_of_ell_and_kernel() {
    let c = cap(ell_curve(false), -0.3);
    for field in 0..2 {
        let (mut hs, mut es) = (vec![], vec![]);
        for n in [50, 100, 200] {
            let d = Domain::new(&c, Scheme::PlainFiniteDifference, Resolution::curve(n)).unwrap();
            let f = if field == 0 { d.ell() } else { d.kernel(0) };
            let r = d.robin_residual(&f);
            assert_eq!(r.len(), 2);
            hs.push(d.grid().spacing());
            es.push(r.iter().map(|x| x.ambient.abs()).fold(0.0, f64::max));
        }
        let o = order(&hs, &es);
        assert!((o - 2.0).abs() <= 0.3, "order {o} {es:?}");
    }
    // all three forms agree
    let c = cap(pert_surface(), -0.4);
    let d = Domain::new(&c, Scheme::FiniteDifference, Resolution::polar(16, 32)).unwrap();
    let f = d.field(|x| 1.0 + 0.2 * x[0] + x[1] * x[2]);
    for r in d.robin_residual(&f) {
        assert!(r.deviation < 1e-10 * (1.0 + r.ambient.abs()), "{r:?}");
    }
    for r in d.robin_residual(&d.ell()) {
        assert!(r.ambient.abs() < 1e-10 && r.conormal.abs() < 1e-10 && r.conormal_f.abs() < 1e-10);
    }
}

#[test]
fn neumann_case_at_zero_contact_constant() {
    let c = cap(ell_surface(), 0.0);
    let d = Domain::new(&c, Scheme::FiniteDifference, Resolution::polar(16, 32)).unwrap();
    // even in the height: zero conormal derivative
    let even = d.field(|x| 1.0 + x[2] * x[2] + 0.1 * x[0]);
    let odd = d.field(|x| 1.0 + x[2]);
    let re = d.robin_residual(&even).iter().map(|r| r.ambient.abs()).fold(0.0, f64::max);
    let ro = d.robin_residual(&odd).iter().map(|r| r.ambient.abs()).fold(f64::INFINITY, f64::min);
    assert!(re < 1e-2, "{re}");
    assert!(ro > 0.1, "{ro}");
}

#[test]
fn isotropic_metric_matches_round_sphere() {
    for (c, res, tol) in [(cap(iso(2), -0.4), Resolution::curve(100), 1e-8), (cap(iso(3), -0.4), Resolution::polar(16, 32), 1e-4)] {
        let d = Domain::new(&c, Scheme::FiniteDifference, res).unwrap();
        for (nd, nm) in d.grid().nodes.iter().zip(&d.metric().nodes) {
            // ẑ is the unit normal itself
            assert!(dist(&nm.zhat, &nd.normal) < tol);
            for a in 0..d.n() {
                for b in 0..d.n() {
                    let e: f64 = (0..3).map(|i| nm.z[a][i] * nm.z[b][i]).sum();
                    assert!((nm.g[a][b] - e).abs() < tol);
                    for k in 0..d.n() {
                        assert!(nm.q[a][b][k].abs() < tol);
                    }
                }
            }
        }
    }
}
