//! Independent reference computations used by the test suites and by
//! `check-norm`: a brute-force dual norm and finite-difference jets of
//! `½F⁰²`. Nothing here shares code with the forward-mode jets.

use crate::error::{Error, Result};
use crate::norm::{sphere_sample, tangent_frame, DualJet, MinkowskiNorm, NormFamily};
use crate::linalg;
use crate::norm::bilinear;
use crate::num;

/// `sup_{y ∈ 𝕊ⁿ} ⟨y, ζ⟩/F(y)` by sampling followed by a compass search in
/// the tangent plane of the best sample.
pub fn brute_force_dual_norm(norm: &MinkowskiNorm, zeta: &[f64; 3]) -> f64 {
    let d = norm.dim();
    let mut z = *zeta;
    if d == 2 {
        z[2] = 0.0;
    }
    if num::norm(&z) == 0.0 {
        return 0.0;
    }
    let ratio = |y: &[f64; 3]| num::dot(y, &z) / norm.eval(y);
    let mut best = num::scale3(1.0 / num::norm(&z), &z);
    let mut fb = ratio(&best);
    for y in sphere_sample(d, 400) {
        let v = ratio(&y);
        if v > fb {
            fb = v;
            best = y;
        }
    }
    let frame = tangent_frame(d, &best);
    let dirs = d - 1;
    let mut c = [0.0; 2];
    let point = |c: &[f64; 2]| {
        let mut y = best;
        for k in 0..dirs {
            y = num::axpy(c[k], &frame[k], &y);
        }
        num::scale3(1.0 / num::norm(&y), &y)
    };
    let mut step = 0.1;
    while step > 1e-13 {
        let mut moved = false;
        for k in 0..dirs {
            for sgn in [1.0, -1.0] {
                let mut t = c;
                t[k] += sgn * step;
                let v = ratio(&point(&t));
                if v > fb {
                    fb = v;
                    c = t;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    fb
}

/// `F⁰` from the closed forms where they exist, else by brute force.
pub fn oracle_dual_norm(norm: &MinkowskiNorm, zeta: &[f64; 3]) -> f64 {
    let mut z = *zeta;
    if norm.dim() == 2 {
        z[2] = 0.0;
    }
    match norm.family() {
        NormFamily::Isotropic => num::norm(&z),
        NormFamily::Ellipsoidal { m } => match linalg::inv_small(m, norm.dim()) {
            Some(inv) => num::sqrt(bilinear(&inv, &z, &z)),
            None => f64::NAN,
        },
        _ => brute_force_dual_norm(norm, &z),
    }
}

/// Value, gradient, `G` and `Q` of `½F⁰²` at `y` by central differences of
/// [`oracle_dual_norm`].
pub fn fd_oracle_jet(norm: &MinkowskiNorm, y: &[f64; 3]) -> Result<DualJet> {
    let d = norm.dim();
    let scale = num::norm(y);
    if !(scale > 1e3 * f64::MIN_POSITIVE) {
        return Err(Error::DegeneratePoint);
    }
    let phi = |dy: [f64; 3]| {
        let p = num::add3(y, &dy);
        let v = oracle_dual_norm(norm, &p);
        0.5 * v * v
    };
    let e = |i: usize, h: f64| num::scale3(h, &num::axis(i));
    let h1 = num::powf(f64::EPSILON, 0.2) * scale;
    let h2 = num::powf(f64::EPSILON, 1.0 / 7.0) * scale;
    let h3 = num::powf(f64::EPSILON, 0.2) * scale;
    let mut grad = [0.0; 3];
    for i in 0..d {
        grad[i] = (-phi(e(i, 2.0 * h1)) + 8.0 * phi(e(i, h1)) - 8.0 * phi(e(i, -h1)) + phi(e(i, -2.0 * h1)))
            / (12.0 * h1);
    }
    // fourth-order stencils: the larger step keeps rounding below 1e-10
    let c1 = [(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)];
    let mut g = [[0.0; 3]; 3];
    for i in 0..d {
        g[i][i] = (-phi(e(i, 2.0 * h2)) + 16.0 * phi(e(i, h2)) - 30.0 * phi([0.0; 3]) + 16.0 * phi(e(i, -h2))
            - phi(e(i, -2.0 * h2)))
            / (12.0 * h2 * h2);
        for j in i + 1..d {
            let mut s = 0.0;
            for (a, wa) in c1 {
                for (b, wb) in c1 {
                    s += wa * wb * phi(num::add3(&e(i, a * h2), &e(j, b * h2)));
                }
            }
            g[i][j] = s / (144.0 * h2 * h2);
            g[j][i] = g[i][j];
        }
    }
    let mut q = [[[0.0; 3]; 3]; 3];
    for i in 0..d {
        for j in i..d {
            for k in j..d {
                let mut s = 0.0;
                for a in [1.0, -1.0] {
                    for b in [1.0, -1.0] {
                        for c in [1.0, -1.0] {
                            let dy = num::add3(&num::add3(&e(i, a * h3), &e(j, b * h3)), &e(k, c * h3));
                            s += a * b * c * phi(dy);
                        }
                    }
                }
                let v = s / (8.0 * h3 * h3 * h3);
                for (p, r, t) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    q[p][r][t] = v;
                }
            }
        }
    }
    Ok(DualJet { point: *y, value: oracle_dual_norm(norm, y), grad, g, q })
}

/// Largest componentwise differences `(|ΔG|, |ΔQ|)` between two jets.
pub fn jet_deviation(a: &DualJet, b: &DualJet) -> (f64, f64) {
    let mut dg: f64 = 0.0;
    let mut dq: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            dg = num::max(dg, num::abs(a.g[i][j] - b.g[i][j]));
            for k in 0..3 {
                dq = num::max(dq, num::abs(a.q[i][j][k] - b.q[i][j][k]));
            }
        }
    }
    (dg, dq)
}
