#![allow(dead_code)]

use anicap::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn iso(dim: usize) -> MinkowskiNorm {
    MinkowskiNorm::isotropic(dim).unwrap()
}

/// Tilted ellipse in the plane.
pub fn ell_curve(sym: bool) -> MinkowskiNorm {
    let m = if sym { [[1.0, 0.0, 0.0], [0.0, 1.6, 0.0], [0.0; 3]] } else { [[1.0, 0.2, 0.0], [0.2, 1.6, 0.0], [0.0; 3]] };
    MinkowskiNorm::ellipsoidal(2, m, if sym { Symmetry::both() } else { Symmetry::none() }).unwrap()
}

pub fn ell_surface() -> MinkowskiNorm {
    MinkowskiNorm::ellipsoidal(3, [[1.0, 0.1, 0.0], [0.1, 1.5, 0.0], [0.0, 0.0, 2.0]], Symmetry::none()).unwrap()
}

pub fn sym_surface() -> MinkowskiNorm {
    MinkowskiNorm::ellipsoidal(3, [[1.0, 0.0, 0.0], [0.0, 1.5, 0.0], [0.0, 0.0, 2.0]], Symmetry::both()).unwrap()
}

pub fn pert_curve() -> MinkowskiNorm {
    MinkowskiNorm::perturbed(2, [[1.0, 0.0, 0.0], [0.0, 1.3, 0.0], [0.0; 3]], 0.05, vec![Monomial { coef: 1.0, exps: [2, 2, 0] }], Symmetry::both())
        .unwrap()
}

pub fn pert_surface() -> MinkowskiNorm {
    MinkowskiNorm::perturbed(
        3,
        [[1.0, 0.0, 0.0], [0.0, 1.3, 0.0], [0.0, 0.0, 0.8]],
        0.05,
        vec![Monomial { coef: 1.0, exps: [2, 0, 2] }, Monomial { coef: -0.5, exps: [0, 4, 0] }],
        Symmetry::both(),
    )
    .unwrap()
}

pub fn cap(norm: MinkowskiNorm, w: f64) -> CapillaryCap {
    CapillaryCap::build(norm, w).unwrap()
}

pub fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn dist(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
}

pub fn max_dist(a: &[[f64; 3]], b: &[[f64; 3]]) -> f64 {
    a.iter().zip(b).map(|(p, q)| dist(p, q)).fold(0.0, f64::max)
}

pub fn integral_of_product(d: &Domain, a: &[f64], b: &[f64]) -> f64 {
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    d.integrate(&prod)
}

/// Removes the L²(μ_F) component of `v` along the kernel functions by
/// Cramer's rule on the (at most 2×2) Gram system.
pub fn remove_kernel(d: &Domain, v: &[f64]) -> Vec<f64> {
    let ks: Vec<Vec<f64>> = (0..d.n()).map(|a| d.kernel(a)).collect();
    let b: Vec<f64> = ks.iter().map(|k| integral_of_product(d, k, v)).collect();
    let g = |i: usize, j: usize| integral_of_product(d, &ks[i], &ks[j]);
    let c = if d.n() == 1 {
        vec![b[0] / g(0, 0)]
    } else {
        let (a11, a12, a22) = (g(0, 0), g(0, 1), g(1, 1));
        let det = a11 * a22 - a12 * a12;
        vec![(b[0] * a22 - b[1] * a12) / det, (a11 * b[1] - a12 * b[0]) / det]
    };
    let mut out = v.to_vec();
    for (ca, k) in c.iter().zip(&ks) {
        for (o, kv) in out.iter_mut().zip(k) {
            *o -= ca * kv;
        }
    }
    out
}

/// Least-squares slope of `log e` against `log h`.
pub fn order(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
