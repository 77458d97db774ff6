//! Dense and banded LU factorizations plus the small fixed-size helpers used
//! for metric tensors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num;

/// Row-major dense LU with partial pivoting.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(n: usize, mut a: Vec<f64>) -> Result<DenseLu> {
        assert_eq!(a.len(), n * n);
        let mut piv = vec![0; n];
        let scale = a.iter().fold(0.0f64, |m, v| num::max(m, num::abs(*v)));
        for k in 0..n {
            let mut p = k;
            let mut best = num::abs(a[k * n + k]);
            for r in k + 1..n {
                let v = num::abs(a[r * n + k]);
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= 1e-300 || best <= scale * 1e-15 * f64::EPSILON {
                return Err(Error::SingularSystem);
            }
            piv[k] = p;
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let d = a[k * n + k];
            for r in k + 1..n {
                let l = a[r * n + k] / d;
                a[r * n + k] = l;
                if l != 0.0 {
                    for c in k + 1..n {
                        a[r * n + c] -= l * a[k * n + c];
                    }
                }
            }
        }
        Ok(DenseLu { n, a, piv })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for r in 0..n {
            let mut s = b[r];
            for c in 0..r {
                s -= self.a[r * n + c] * b[c];
            }
            b[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in r + 1..n {
                s -= self.a[r * n + c] * b[c];
            }
            b[r] = s / self.a[r * n + r];
        }
    }
}

/// Banded LU with partial pivoting. Row `i` keeps columns `i-kl ..= i+kl+ku`,
/// which is wide enough for the fill produced by row interchanges.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    rows: Vec<f64>,
    lmul: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn factor(n: usize, kl: usize, ku: usize, triplets: &[(usize, usize, f64)]) -> Result<BandLu> {
        let w = 2 * kl + ku + 1;
        let mut rows = vec![0.0; n * w];
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        for &(i, j, v) in triplets {
            debug_assert!(j + kl >= i && j <= i + ku);
            rows[idx(i, j)] += v;
        }
        let mut lmul = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];
        let scale = rows.iter().fold(0.0f64, |m, v| num::max(m, num::abs(*v)));
        for i in 0..n {
            let last = (i + kl).min(n - 1);
            let mut p = i;
            let mut best = num::abs(rows[idx(i, i)]);
            for r in i + 1..=last {
                let v = num::abs(rows[idx(r, i)]);
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= 1e-300 || best <= scale * 1e-15 * f64::EPSILON {
                return Err(Error::SingularSystem);
            }
            piv[i] = p;
            let cmax = (i + kl + ku).min(n - 1);
            if p != i {
                for c in i..=cmax {
                    let a = idx(i, c);
                    let b = if c <= p + kl + ku { Some(idx(p, c)) } else { None };
                    match b {
                        Some(b) => rows.swap(a, b),
                        None => {
                            rows[a] = 0.0;
                        }
                    }
                }
            }
            let d = rows[idx(i, i)];
            for r in i + 1..=last {
                let l = rows[idx(r, i)] / d;
                lmul[i * kl + (r - i - 1)] = l;
                rows[idx(r, i)] = 0.0;
                if l != 0.0 {
                    for c in i + 1..=cmax {
                        let v = rows[idx(i, c)];
                        if v != 0.0 {
                            rows[idx(r, c)] -= l * v;
                        }
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, w, rows, lmul, piv })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.w);
        for i in 0..n {
            b.swap(i, self.piv[i]);
            let bi = b[i];
            if bi != 0.0 {
                let last = (i + kl).min(n - 1);
                for r in i + 1..=last {
                    b[r] -= self.lmul[i * kl + (r - i - 1)] * bi;
                }
            }
        }
        for i in (0..n).rev() {
            let cmax = (i + kl + ku).min(n - 1);
            let row = &self.rows[i * w..(i + 1) * w];
            let mut s = b[i];
            for c in i + 1..=cmax {
                s -= row[c + kl - i] * b[c];
            }
            b[i] = s / row[kl];
        }
    }
}

/// Sparse square matrix assembled from rows, factorized by the banded solver
/// when the bandwidth is small and by the dense solver otherwise.
#[derive(Clone, Debug)]
pub enum Factor {
    Band(BandLu),
    Dense(DenseLu),
}

impl Factor {
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Factor> {
        let mut kl = 0;
        let mut ku = 0;
        for &(i, j, _) in triplets {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        if 2 * kl + ku + 1 < n {
            Ok(Factor::Band(BandLu::factor(n, kl, ku, triplets)?))
        } else {
            let mut a = vec![0.0; n * n];
            for &(i, j, v) in triplets {
                a[i * n + j] += v;
            }
            Ok(Factor::Dense(DenseLu::factor(n, a)?))
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        match self {
            Factor::Band(f) => f.solve(b),
            Factor::Dense(f) => f.solve(b),
        }
    }
}

/// Solves the bordered system
///
/// ```text
/// [ A   B ] [x]   [r]
/// [ Cᵀ  D ] [y] = [g]
/// ```
///
/// where `A` may be singular along a few directions. `A` is shifted by
/// `sigma` on the diagonal entries listed in `reg`; the shift is undone exactly
/// through auxiliary unknowns `μ = x[reg]`, so the solution is that of the
/// unmodified system.
pub struct Bordered {
    k: usize,
    reg: Vec<usize>,
    factor: Factor,
    /// Columns of `A_reg⁻¹ U`, with `U = [-σE, B]`.
    x_cols: Vec<Vec<f64>>,
    /// `Vᵀ = [Eᵀ; Cᵀ]` rows.
    c: Vec<Vec<f64>>,
    schur: DenseLu,
}

impl Bordered {
    pub fn new(
        n: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        d: Vec<f64>,
        reg: Vec<usize>,
        sigma: f64,
    ) -> Result<Bordered> {
        let k = b.len();
        assert_eq!(c.len(), k);
        assert_eq!(d.len(), k * k);
        for &a in &reg {
            triplets.push((a, a, sigma));
        }
        let factor = Factor::from_triplets(n, &triplets)?;
        let s = reg.len();
        let m = s + k;
        let mut x_cols = Vec::with_capacity(m);
        for &a in &reg {
            let mut col = vec![0.0; n];
            col[a] = -sigma;
            factor.solve(&mut col);
            x_cols.push(col);
        }
        for col in &b {
            let mut col = col.clone();
            factor.solve(&mut col);
            x_cols.push(col);
        }
        // D' - Vᵀ X
        let mut sm = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let vx = if i < s {
                    x_cols[j][reg[i]]
                } else {
                    dotv(&c[i - s], &x_cols[j])
                };
                let dprime = if i < s && j < s {
                    if i == j {
                        -1.0
                    } else {
                        0.0
                    }
                } else if i >= s && j >= s {
                    d[(i - s) * k + (j - s)]
                } else {
                    0.0
                };
                sm[i * m + j] = dprime - vx;
            }
        }
        let schur = DenseLu::factor(m, sm)?;
        Ok(Bordered { k, reg, factor, x_cols, c, schur })
    }

    /// Returns `(x, y)`.
    pub fn solve(&self, r: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let s = self.reg.len();
        let m = s + self.k;
        let mut z = r.to_vec();
        self.factor.solve(&mut z);
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let vz = if i < s { z[self.reg[i]] } else { dotv(&self.c[i - s], &z) };
            let top = if i < s { 0.0 } else { g[i - s] };
            rhs[i] = top - vz;
        }
        self.schur.solve(&mut rhs);
        for j in 0..m {
            let wj = rhs[j];
            if wj != 0.0 {
                for (zi, xi) in z.iter_mut().zip(&self.x_cols[j]) {
                    *zi -= wj * xi;
                }
            }
        }
        (z, rhs[s..].to_vec())
    }
}

pub fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inverse of a small dense matrix given as `d×d` leading block of a 3×3 array.
pub fn inv_small(a: &[[f64; 3]; 3], d: usize) -> Option<[[f64; 3]; 3]> {
    let mut m = *a;
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate().take(d) {
        row[i] = 1.0;
    }
    for k in 0..d {
        let mut p = k;
        for r in k + 1..d {
            if num::abs(m[r][k]) > num::abs(m[p][k]) {
                p = r;
            }
        }
        if num::abs(m[p][k]) < 1e-300 {
            return None;
        }
        m.swap(k, p);
        inv.swap(k, p);
        let dk = m[k][k];
        for c in 0..d {
            m[k][c] /= dk;
            inv[k][c] /= dk;
        }
        for r in 0..d {
            if r != k {
                let l = m[r][k];
                if l != 0.0 {
                    for c in 0..d {
                        m[r][c] -= l * m[k][c];
                        inv[r][c] -= l * inv[k][c];
                    }
                }
            }
        }
    }
    Some(inv)
}

pub fn det_small(a: &[[f64; 3]; 3], d: usize) -> f64 {
    match d {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        }
    }
}

/// Eigenvalues (ascending) of the leading `d×d` block of a symmetric matrix,
/// by cyclic Jacobi rotations.
pub fn sym_eigenvalues(a: &[[f64; 3]; 3], d: usize) -> [f64; 3] {
    let mut m = *a;
    for _ in 0..50 {
        let mut off = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                off += m[i][j] * m[i][j];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if num::abs(m[p][q]) < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + num::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + num::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..d {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev = [0.0; 3];
    for i in 0..d {
        ev[i] = m[i][i];
    }
    let e = &mut ev[..d];
    e.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

/// Symmetric 2×2 eigenvalues (ascending), closed form.
pub fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let m = 0.5 * (a + c);
    let r = num::hypot(0.5 * (a - c), b);
    (m - r, m + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 0.1 + i as f64 * 0.01));
            if i > 0 {
                t.push((i, i - 1, 1.0 + (i % 3) as f64));
            }
            if i + 2 < n {
                t.push((i, i + 2, -0.7));
            }
        }
        t
    }

    #[test]
    fn band_matches_dense() {
        let n = 40;
        let t = tridiag(n);
        let band = BandLu::factor(n, 1, 2, &t).unwrap();
        let mut a = vec![0.0; n * n];
        for &(i, j, v) in &t {
            a[i * n + j] += v;
        }
        let dense = DenseLu::factor(n, a.clone()).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x1 = rhs.clone();
        let mut x2 = rhs.clone();
        band.solve(&mut x1);
        dense.solve(&mut x2);
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-10, "{i}: {} {}", x1[i], x2[i]);
        }
        let mut res = 0.0f64;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += a[i * n + j] * x1[j];
            }
            res = res.max((s - rhs[i]).abs());
        }
        assert!(res < 1e-10);
    }

    #[test]
    fn bordered_handles_singular_block() {
        // A = discrete Neumann Laplacian (kernel = constants), bordered by a
        // mean-zero constraint and a multiplier column of ones.
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            let mut diag = 0.0;
            if i > 0 {
                t.push((i, i - 1, -1.0));
                diag += 1.0;
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                diag += 1.0;
            }
            t.push((i, i, diag));
        }
        let ones = vec![1.0; n];
        let bs = Bordered::new(n, t.clone(), vec![ones.clone()], vec![ones.clone()], vec![0.0], vec![n / 2], 2.0)
            .unwrap();
        let r: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let (x, y) = bs.solve(&r, &[0.0]);
        let mean: f64 = x.iter().sum::<f64>();
        assert!(mean.abs() < 1e-10);
        let avg = r.iter().sum::<f64>() / n as f64;
        assert!((y[0] - avg).abs() < 1e-10);
        for i in 0..n {
            let mut s = y[0];
            for &(a, b, v) in &t {
                if a == i {
                    s += v * x[b];
                }
            }
            assert!((s - r[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn jacobi_eigenvalues() {
        let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let e = sym_eigenvalues(&a, 3);
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12 && (e[2] - 5.0).abs() < 1e-12);
    }
}
