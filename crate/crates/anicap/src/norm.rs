//! Minkowski norms `F`, the Cahn–Hoffman map, `A_F`, the dual norm `F⁰` and
//! the tensors `G = D²(½F⁰²)` and `Q = D³(½F⁰²)`.
//!
//! Vectors are stored as `[f64; 3]`; in dimension `d = 2` the third slot is
//! ignored and the vertical axis is index `d - 1`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::linalg;
use crate::num;

/// One term `coef · Π y_i^{e_i} / |y|^{Σe}` of an even perturbation polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub exps: [u32; 3],
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormFamily {
    Isotropic,
    Ellipsoidal { m: [[f64; 3]; 3] },
    /// `√(yᵀMy) · (1 + ε P(y/|y|))`.
    Perturbed { m: [[f64; 3]; 3], eps: f64, terms: Vec<Monomial> },
    /// `F(y) + ⟨a, y⟩`, the support function of the Wulff shape moved by `a`.
    Translated { base: Box<NormFamily>, shift: [f64; 3] },
}

/// Declared reflection symmetries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Symmetry {
    /// `F(-y_1, …, -y_n, y_{n+1}) = F(y)`.
    pub horizontal: bool,
    /// `F(y_1, …, y_n, -y_{n+1}) = F(y)`.
    pub vertical: bool,
}

impl Symmetry {
    pub fn both() -> Symmetry {
        Symmetry { horizontal: true, vertical: true }
    }
    pub fn none() -> Symmetry {
        Symmetry::default()
    }
    /// Symmetric under both reflections, which is what even mode needs.
    pub fn is_symmetric(&self) -> bool {
        self.horizontal && self.vertical
    }
}

#[derive(Clone, Debug)]
pub struct MinkowskiNorm {
    dim: usize,
    family: NormFamily,
    symmetry: Symmetry,
    min_af: f64,
}

/// Value and first three derivatives of `F` at a point.
#[derive(Clone, Copy, Debug)]
pub struct NormJet {
    pub f: f64,
    pub df: [f64; 3],
    pub d2f: [[f64; 3]; 3],
    pub d3f: [[[f64; 3]; 3]; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualJet {
    pub point: [f64; 3],
    pub value: f64,
    pub grad: [f64; 3],
    /// `G(y)`, Hessian of `½F⁰²`.
    pub g: [[f64; 3]; 3],
    /// `Q(y)`, third derivative of `½F⁰²`.
    pub q: [[[f64; 3]; 3]; 3],
}

impl DualJet {
    pub fn g_form(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        bilinear(&self.g, a, b)
    }
    pub fn q_form(&self, a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
        trilinear(&self.q, a, b, c)
    }
}

pub fn bilinear(m: &[[f64; 3]; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += m[i][j] * a[i] * b[j];
        }
    }
    s
}

pub fn trilinear(t: &[[[f64; 3]; 3]; 3], a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                s += t[i][j][k] * a[i] * b[j] * c[k];
            }
        }
    }
    s
}

pub fn matvec(m: &[[f64; 3]; 3], a: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * a[j];
        }
    }
    out
}

const VALIDATION_SAMPLES: usize = 10_000;

impl MinkowskiNorm {
    pub fn isotropic(dim: usize) -> Result<MinkowskiNorm> {
        MinkowskiNorm::new(dim, NormFamily::Isotropic, Symmetry::both())
    }

    pub fn ellipsoidal(dim: usize, m: [[f64; 3]; 3], symmetry: Symmetry) -> Result<MinkowskiNorm> {
        MinkowskiNorm::new(dim, NormFamily::Ellipsoidal { m }, symmetry)
    }

    pub fn perturbed(
        dim: usize,
        m: [[f64; 3]; 3],
        eps: f64,
        terms: Vec<Monomial>,
        symmetry: Symmetry,
    ) -> Result<MinkowskiNorm> {
        MinkowskiNorm::new(dim, NormFamily::Perturbed { m, eps, terms }, symmetry)
    }

    /// Builds and validates a norm: positive definite `M`, even perturbation
    /// polynomial, `A_F > 0` on a sphere sample, declared symmetries.
    pub fn new(dim: usize, family: NormFamily, symmetry: Symmetry) -> Result<MinkowskiNorm> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidNorm(format!("dimension n+1 = {dim} not in {{2, 3}}")));
        }
        check_family(dim, &family)?;
        let mut norm = MinkowskiNorm { dim, family, symmetry, min_af: f64::INFINITY };
        let mut min_af = f64::INFINITY;
        let mut min_f = f64::INFINITY;
        for x in sphere_sample(dim, VALIDATION_SAMPLES) {
            min_f = num::min(min_f, norm.eval(&x));
            let ev = norm.a_f_eigenvalues(&x);
            min_af = num::min(min_af, ev[0]);
        }
        if !(min_f > 0.0) {
            return Err(Error::InvalidNorm(format!("F is not positive (min {min_f:e})")));
        }
        if !(min_af > 0.0) {
            return Err(Error::NonConvexNorm { min_eigenvalue: min_af });
        }
        norm.min_af = min_af;
        norm.verify_symmetry()?;
        Ok(norm)
    }

    /// `F̃(y) = F(y) + ⟨a, y⟩`. The shift must keep the origin inside the
    /// moved Wulff shape; symmetry flags are recomputed by sampling.
    pub fn translated(&self, shift: [f64; 3]) -> Result<MinkowskiNorm> {
        let family = NormFamily::Translated { base: Box::new(self.family.clone()), shift };
        let mut probe = MinkowskiNorm { dim: self.dim, family, symmetry: Symmetry::none(), min_af: 0.0 };
        probe.symmetry = probe.detect_symmetry();
        MinkowskiNorm::new(self.dim, probe.family, probe.symmetry)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn family(&self) -> &NormFamily {
        &self.family
    }
    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
    /// Smallest eigenvalue of `A_F` seen on the validation sample.
    pub fn min_af(&self) -> f64 {
        self.min_af
    }
    pub fn vertical(&self) -> usize {
        self.dim - 1
    }
    pub fn family_name(&self) -> &'static str {
        match self.family {
            NormFamily::Isotropic => "isotropic",
            NormFamily::Ellipsoidal { .. } => "ellipsoidal",
            NormFamily::Perturbed { .. } => "perturbed",
            NormFamily::Translated { .. } => "translated",
        }
    }

    /// Evaluates `F` on any scalar type; the homogeneous extension is built in.
    pub fn eval_generic<S: Scalar>(&self, y: &[S; 3]) -> S {
        eval_family(&self.family, self.dim, y)
    }

    pub fn eval(&self, y: &[f64; 3]) -> f64 {
        if y[..self.dim].iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        self.eval_generic(y)
    }

    pub fn jet(&self, y: &[f64; 3]) -> NormJet {
        let j = self.eval_generic(&Jet::seed(&self.clip(y)));
        NormJet { f: j.v, df: j.g, d2f: j.h, d3f: j.t }
    }

    /// Jet of `½F²`: value, gradient, Hessian `H` and third derivative `T`.
    pub fn half_square_jet(&self, y: &[f64; 3]) -> Jet {
        let f = self.eval_generic(&Jet::seed(&self.clip(y)));
        (f * f).scale(0.5)
    }

    fn clip(&self, y: &[f64; 3]) -> [f64; 3] {
        let mut c = *y;
        if self.dim == 2 {
            c[2] = 0.0;
        }
        c
    }

    /// The Cahn–Hoffman map `Ψ(x) = DF(x)`.
    pub fn cahn_hoffman(&self, x: &[f64; 3]) -> [f64; 3] {
        self.jet(x).df
    }

    /// `A_F(x)` in an orthonormal frame of `T_x𝕊ⁿ` (leading `n×n` block).
    pub fn a_f(&self, x: &[f64; 3]) -> Result<[[f64; 3]; 3]> {
        let a = self.a_f_raw(x);
        let ev = linalg::sym_eigenvalues(&a, self.dim - 1);
        if !(ev[0] > 0.0) {
            return Err(Error::NonConvexNorm { min_eigenvalue: ev[0] });
        }
        Ok(a)
    }

    fn a_f_raw(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let nrm = num::norm(x);
        let u = num::scale3(1.0 / nrm, x);
        let j = self.jet(&u);
        let frame = tangent_frame(self.dim, &u);
        let mut a = [[0.0; 3]; 3];
        for p in 0..self.dim - 1 {
            for q in 0..self.dim - 1 {
                a[p][q] = bilinear(&j.d2f, &frame[p], &frame[q]);
            }
        }
        a
    }

    fn a_f_eigenvalues(&self, x: &[f64; 3]) -> [f64; 3] {
        linalg::sym_eigenvalues(&self.a_f_raw(x), self.dim - 1)
    }

    /// `F⁰(ζ) = sup ⟨y, ζ⟩ / F(y)`.
    pub fn dual_norm(&self, zeta: &[f64; 3]) -> f64 {
        let z = self.clip(zeta);
        if num::norm(&z) == 0.0 {
            return 0.0;
        }
        match &self.family {
            NormFamily::Isotropic => num::norm(&z),
            NormFamily::Ellipsoidal { m } => {
                let inv = linalg::inv_small(m, self.dim).unwrap_or([[0.0; 3]; 3]);
                num::sqrt(bilinear(&inv, &z, &z))
            }
            // solved on the unit sphere so that homogeneity holds to rounding
            _ => {
                let r = num::norm(&z);
                match self.legendre_point(&num::scale3(1.0 / r, &z)) {
                    Some(w) => r * self.eval(&w),
                    None => f64::NAN,
                }
            }
        }
    }

    /// Solves `∇(½F²)(w) = ζ` by damped Newton on the strictly convex
    /// `Φ(w) = ½F(w)² − ⟨ζ, w⟩`; then `F⁰(ζ) = F(w)` and `∇(½F⁰²)(ζ) = w`.
    pub fn legendre_point(&self, zeta: &[f64; 3]) -> Option<[f64; 3]> {
        let d = self.dim;
        let z = self.clip(zeta);
        let fz = self.eval(&z);
        let zz = num::dot(&z, &z);
        if zz == 0.0 {
            return None;
        }
        let mut w = num::scale3(zz / (fz * fz), &z);
        let phi = |w: &[f64; 3]| {
            let f = self.eval(w);
            0.5 * f * f - num::dot(&z, w)
        };
        let scale = num::sqrt(zz);
        for _ in 0..100 {
            let j = self.half_square_jet(&w);
            let mut grad = [0.0; 3];
            for i in 0..d {
                grad[i] = j.g[i] - z[i];
            }
            let gn = num::norm(&grad);
            if gn <= 1e-15 * scale {
                return Some(w);
            }
            let hinv = linalg::inv_small(&j.h, d)?;
            let step = matvec(&hinv, &grad);
            let mut lam = 1.0;
            let p0 = phi(&w);
            let slope = num::dot(&grad, &step);
            loop {
                let trial = num::axpy(-lam, &step, &w);
                if phi(&trial) <= p0 - 1e-4 * lam * slope || lam < 1e-10 {
                    let moved = num::norm(&num::sub3(&trial, &w));
                    w = trial;
                    if moved <= 1e-16 * num::norm(&w) {
                        return Some(w);
                    }
                    break;
                }
                lam *= 0.5;
            }
        }
        Some(w)
    }

    /// `F⁰`, `DF⁰`, `G` and `Q` at `y`.
    pub fn dual_jet(&self, y: &[f64; 3]) -> Result<DualJet> {
        let y = self.clip(y);
        let ny = num::norm(&y);
        if !(ny > 1e-150) {
            return Err(Error::DegeneratePoint);
        }
        let d = self.dim;
        match &self.family {
            NormFamily::Isotropic => {
                let mut g = [[0.0; 3]; 3];
                for (i, row) in g.iter_mut().enumerate().take(d) {
                    row[i] = 1.0;
                }
                Ok(DualJet {
                    point: y,
                    value: ny,
                    grad: num::scale3(1.0 / ny, &y),
                    g,
                    q: [[[0.0; 3]; 3]; 3],
                })
            }
            NormFamily::Ellipsoidal { m } => {
                let g = linalg::inv_small(m, d).ok_or(Error::DegeneratePoint)?;
                let gy = matvec(&g, &y);
                let v = num::sqrt(num::dot(&gy, &y));
                Ok(DualJet { point: y, value: v, grad: num::scale3(1.0 / v, &gy), g, q: [[[0.0; 3]; 3]; 3] })
            }
            _ => {
                let w = self.legendre_point(&y).ok_or(Error::DegeneratePoint)?;
                let j = self.half_square_jet(&w);
                let g = linalg::inv_small(&j.h, d).ok_or(Error::DegeneratePoint)?;
                let q = pushforward_third(&j.t, &g, d);
                let value = num::sqrt(2.0 * j.v);
                Ok(DualJet { point: y, value, grad: num::scale3(1.0 / value, &w), g, q })
            }
        }
    }

    /// `G` and `Q` at `z = DF(x)` for a unit normal `x`, without any Newton
    /// solve: `G(DF(x)) = H(x)⁻¹` and `Q(DF(x)) = -F(x) T[G·, G·, G·]`.
    pub fn dual_jet_at_normal(&self, x: &[f64; 3]) -> DualJet {
        let d = self.dim;
        let j = self.half_square_jet(x);
        let f = num::sqrt(2.0 * j.v);
        let g = linalg::inv_small(&j.h, d).unwrap_or([[0.0; 3]; 3]);
        let mut q = pushforward_third(&j.t, &g, d);
        for a in q.iter_mut() {
            for b in a.iter_mut() {
                for c in b.iter_mut() {
                    *c *= f;
                }
            }
        }
        let z = num::scale3(1.0 / f, &j.g);
        DualJet { point: z, value: 1.0, grad: num::scale3(1.0 / f, x), g, q }
    }

    fn verify_symmetry(&self) -> Result<()> {
        let v = self.vertical();
        for y in sphere_sample(self.dim, 500) {
            let f = self.eval(&y);
            if self.symmetry.horizontal {
                let mut r = y;
                for c in r.iter_mut().take(v) {
                    *c = -*c;
                }
                if num::abs(self.eval(&r) - f) > 1e-12 * f {
                    return Err(Error::SymmetryViolated(format!("horizontal reflection at {y:?}")));
                }
            }
            if self.symmetry.vertical {
                let mut r = y;
                r[v] = -r[v];
                if num::abs(self.eval(&r) - f) > 1e-12 * f {
                    return Err(Error::SymmetryViolated(format!("vertical reflection at {y:?}")));
                }
            }
        }
        Ok(())
    }

    /// Symmetry flags that hold on a sphere sample.
    pub fn detect_symmetry(&self) -> Symmetry {
        let v = self.vertical();
        let mut s = Symmetry::both();
        for y in sphere_sample(self.dim, 500) {
            let f = self.eval(&y);
            let mut h = y;
            for c in h.iter_mut().take(v) {
                *c = -*c;
            }
            if num::abs(self.eval(&h) - f) > 1e-12 * f {
                s.horizontal = false;
            }
            let mut r = y;
            r[v] = -r[v];
            if num::abs(self.eval(&r) - f) > 1e-12 * f {
                s.vertical = false;
            }
        }
        s
    }
}

/// `Q_abc = -T(G e_a, G e_b, G e_c)`: third derivative of the inverse gradient map.
fn pushforward_third(t: &[[[f64; 3]; 3]; 3], g: &[[f64; 3]; 3], d: usize) -> [[[f64; 3]; 3]; 3] {
    let mut tmp1 = [[[0.0; 3]; 3]; 3];
    for a in 0..d {
        for m in 0..d {
            for n in 0..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += t[l][m][n] * g[l][a];
                }
                tmp1[a][m][n] = s;
            }
        }
    }
    let mut tmp2 = [[[0.0; 3]; 3]; 3];
    for a in 0..d {
        for b in 0..d {
            for n in 0..d {
                let mut s = 0.0;
                for m in 0..d {
                    s += tmp1[a][m][n] * g[m][b];
                }
                tmp2[a][b][n] = s;
            }
        }
    }
    let mut q = [[[0.0; 3]; 3]; 3];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut s = 0.0;
                for n in 0..d {
                    s += tmp2[a][b][n] * g[n][c];
                }
                q[a][b][c] = -s;
            }
        }
    }
    q
}

fn check_family(dim: usize, family: &NormFamily) -> Result<()> {
    match family {
        NormFamily::Isotropic => Ok(()),
        NormFamily::Ellipsoidal { m } => check_spd(dim, m),
        NormFamily::Perturbed { m, eps, terms } => {
            check_spd(dim, m)?;
            if !eps.is_finite() {
                return Err(Error::InvalidNorm("perturbation amplitude is not finite".into()));
            }
            for t in terms {
                if t.degree() % 2 != 0 {
                    return Err(Error::InvalidNorm(format!("monomial {:?} has odd degree", t.exps)));
                }
                if dim == 2 && t.exps[2] != 0 {
                    return Err(Error::InvalidNorm("third exponent used in dimension 2".into()));
                }
            }
            Ok(())
        }
        NormFamily::Translated { base, shift } => {
            if shift.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidNorm("shift is not finite".into()));
            }
            check_family(dim, base)
        }
    }
}

fn check_spd(dim: usize, m: &[[f64; 3]; 3]) -> Result<()> {
    for i in 0..dim {
        for j in 0..dim {
            if num::abs(m[i][j] - m[j][i]) > 1e-14 * (1.0 + num::abs(m[i][j])) {
                return Err(Error::InvalidNorm("matrix is not symmetric".into()));
            }
        }
    }
    let ev = linalg::sym_eigenvalues(m, dim);
    if !(ev[0] > 0.0) {
        return Err(Error::InvalidNorm(format!("matrix is not positive definite (min eigenvalue {})", ev[0])));
    }
    Ok(())
}

fn eval_family<S: Scalar>(family: &NormFamily, d: usize, y: &[S; 3]) -> S {
    match family {
        NormFamily::Isotropic => {
            let mut s = S::cst(0.0);
            for v in y.iter().take(d) {
                s = s + *v * *v;
            }
            s.sqrt()
        }
        NormFamily::Ellipsoidal { m } => quad(m, d, y).sqrt(),
        NormFamily::Perturbed { m, eps, terms } => {
            let base = quad(m, d, y).sqrt();
            let mut r2 = S::cst(0.0);
            for v in y.iter().take(d) {
                r2 = r2 + *v * *v;
            }
            let mut p = S::cst(0.0);
            for t in terms {
                let mut mono = S::cst(t.coef);
                for i in 0..d {
                    if t.exps[i] > 0 {
                        mono = mono * y[i].powi(t.exps[i] as i32);
                    }
                }
                let deg = t.degree() as i32;
                if deg > 0 {
                    mono = mono / r2.powi(deg / 2);
                }
                p = p + mono;
            }
            base * (S::cst(1.0) + p.scale(*eps))
        }
        NormFamily::Translated { base, shift } => {
            let mut s = eval_family(base, d, y);
            for i in 0..d {
                s = s + y[i].scale(shift[i]);
            }
            s
        }
    }
}

fn quad<S: Scalar>(m: &[[f64; 3]; 3], d: usize, y: &[S; 3]) -> S {
    let mut s = S::cst(0.0);
    for i in 0..d {
        for j in 0..d {
            if m[i][j] != 0.0 {
                s = s + (y[i] * y[j]).scale(m[i][j]);
            }
        }
    }
    s
}

/// Orthonormal basis of `x^⊥` (first `d-1` entries used).
pub fn tangent_frame(d: usize, x: &[f64; 3]) -> [[f64; 3]; 2] {
    if d == 2 {
        return [[-x[1], x[0], 0.0], [0.0; 3]];
    }
    let a = if num::abs(x[0]) < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let t1 = num::cross(x, &a);
    let t1 = num::scale3(1.0 / num::norm(&t1), &t1);
    let t2 = num::cross(x, &t1);
    [t1, t2]
}

/// Deterministic quasi-uniform sample of the unit sphere in `ℝ^d`.
pub fn sphere_sample(d: usize, count: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(count);
    if d == 2 {
        for i in 0..count {
            let t = 2.0 * num::PI * (i as f64 + 0.5) / count as f64;
            out.push([num::cos(t), num::sin(t), 0.0]);
        }
    } else {
        let golden = num::PI * (3.0 - num::sqrt(5.0));
        for i in 0..count {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = num::sqrt(1.0 - z * z);
            let t = golden * i as f64;
            out.push([r * num::cos(t), r * num::sin(t), z]);
        }
    }
    out
}
