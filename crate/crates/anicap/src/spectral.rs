//! Chebyshev and Fourier collocation helpers.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::DenseLu;
use crate::num;

/// Chebyshev points `cos(πk/m)`, `k = 0..=m`, in descending order.
pub fn cheb_points(m: usize) -> Vec<f64> {
    (0..=m).map(|k| num::cos(num::PI * k as f64 / m as f64)).collect()
}

/// Differentiation matrix on `cheb_points(m)`, row major.
pub fn cheb_diff(m: usize) -> Vec<Vec<f64>> {
    let x = cheb_points(m);
    let c = |k: usize| {
        let e = if k == 0 || k == m { 2.0 } else { 1.0 };
        if k % 2 == 0 {
            e
        } else {
            -e
        }
    };
    let mut d = vec![vec![0.0; m + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=m {
            if i != j {
                d[i][j] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
        // negative sum trick keeps constants in the null space
        let s: f64 = d[i].iter().sum();
        d[i][i] = -s;
    }
    d
}

/// Clenshaw–Curtis weights on `cheb_points(m)` for `∫_{-1}^{1}`.
pub fn clenshaw_curtis(m: usize) -> Vec<f64> {
    let theta: Vec<f64> = (0..=m).map(|k| num::PI * k as f64 / m as f64).collect();
    let mut w = vec![0.0; m + 1];
    let interior = 1..m;
    let mut v = vec![1.0; m - 1];
    if m % 2 == 0 {
        w[0] = 1.0 / (m * m - 1) as f64;
        w[m] = w[0];
        for k in 1..m / 2 {
            for (i, vi) in interior.clone().zip(v.iter_mut()) {
                *vi -= 2.0 * num::cos(2.0 * k as f64 * theta[i]) / (4 * k * k - 1) as f64;
            }
        }
        for (i, vi) in interior.clone().zip(v.iter_mut()) {
            *vi -= num::cos(m as f64 * theta[i]) / (m * m - 1) as f64;
        }
    } else {
        w[0] = 1.0 / (m * m) as f64;
        w[m] = w[0];
        for k in 1..=(m - 1) / 2 {
            for (i, vi) in interior.clone().zip(v.iter_mut()) {
                *vi -= 2.0 * num::cos(2.0 * k as f64 * theta[i]) / (4 * k * k - 1) as f64;
            }
        }
    }
    for (i, vi) in interior.zip(v) {
        w[i] = 2.0 * vi / m as f64;
    }
    w
}

/// First derivative matrix for `n` equispaced periodic points (`n` even).
pub fn fourier_d1(n: usize) -> Vec<Vec<f64>> {
    let h = 2.0 * num::PI / n as f64;
    let mut d = vec![vec![0.0; n]; n];
    for (j, row) in d.iter_mut().enumerate() {
        for (l, e) in row.iter_mut().enumerate() {
            if j != l {
                let k = j as isize - l as isize;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                *e = 0.5 * sign / num::tan(k as f64 * h / 2.0);
            }
        }
    }
    d
}

/// Second derivative matrix for `n` equispaced periodic points (`n` even).
pub fn fourier_d2(n: usize) -> Vec<Vec<f64>> {
    let h = 2.0 * num::PI / n as f64;
    let mut d = vec![vec![0.0; n]; n];
    for (j, row) in d.iter_mut().enumerate() {
        for (l, e) in row.iter_mut().enumerate() {
            if j == l {
                *e = -num::PI * num::PI / (3.0 * h * h) - 1.0 / 6.0;
            } else {
                let k = j as isize - l as isize;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let s = num::sin(k as f64 * h / 2.0);
                *e = -sign / (2.0 * s * s);
            }
        }
    }
    d
}

/// Chebyshev polynomial `T_k(x)`.
pub fn cheb_t(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Weights `c_i` with `Σ c_i ρ_i g(ρ_i) = ∫_0^1 ρ g(ρ) dρ` exactly for even
/// polynomials `g` of degree below `2·rho.len()`.
pub fn radial_weights(rho: &[f64]) -> Vec<f64> {
    let k = rho.len();
    // Vᵀ w = μ with V[i][m] = T_{2m}(ρ_i)
    let mut a = vec![0.0; k * k];
    for m in 0..k {
        for (i, &r) in rho.iter().enumerate() {
            a[m * k + i] = cheb_t(2 * m, r);
        }
    }
    let mut mu: Vec<f64> = (0..k)
        .map(|m| {
            if m == 1 {
                0.0
            } else {
                let s = if m % 2 == 0 { 2.0 } else { 0.0 };
                s / (4.0 * (1.0 - (m * m) as f64))
            }
        })
        .collect();
    let lu = DenseLu::factor(k, a).expect("radial Vandermonde is nonsingular");
    lu.solve(&mut mu);
    mu.iter().zip(rho).map(|(w, r)| w / r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheb_derivative_of_cubic() {
        let m = 8;
        let x = cheb_points(m);
        let d = cheb_diff(m);
        for i in 0..=m {
            let s: f64 = (0..=m).map(|j| d[i][j] * x[j] * x[j] * x[j]).sum();
            assert!((s - 3.0 * x[i] * x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_polynomials() {
        for m in [6, 7] {
            let x = cheb_points(m);
            let w = clenshaw_curtis(m);
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
            assert!((s - 0.4).abs() < 1e-13, "{m}: {s}");
        }
    }

    #[test]
    fn fourier_derivatives_of_trig() {
        let n = 12;
        let d1 = fourier_d1(n);
        let d2 = fourier_d2(n);
        let h = 2.0 * num::PI / n as f64;
        for j in 0..n {
            let a: f64 = (0..n).map(|l| d1[j][l] * (3.0 * l as f64 * h).sin()).sum();
            let b: f64 = (0..n).map(|l| d2[j][l] * (2.0 * l as f64 * h).cos()).sum();
            assert!((a - 3.0 * (3.0 * j as f64 * h).cos()).abs() < 1e-11);
            assert!((b + 4.0 * (2.0 * j as f64 * h).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn radial_rule_is_exact_on_even_polynomials() {
        let x = cheb_points(9);
        let rho: Vec<f64> = (0..5).map(|i| x[4 - i]).collect();
        let c = radial_weights(&rho);
        let s: f64 = c.iter().zip(&rho).map(|(c, r)| c * r * r.powi(6)).sum();
        assert!((s - 1.0 / 8.0).abs() < 1e-12);
    }
}
