//! Wulff shapes, the capillary Wulff cap `𝒞_{ω₀}`, the translated norm `F̃`,
//! the function `ℓ`, boundary frames and the boundary convexity condition.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::norm::{bilinear, matvec, trilinear, MinkowskiNorm};
use crate::num;

/// `𝒲_{r₀}(y₀) = {y : F⁰(y − y₀) = r₀}`.
#[derive(Clone, Debug)]
pub struct WulffShape {
    pub norm: MinkowskiNorm,
    pub center: [f64; 3],
    pub radius: f64,
}

impl WulffShape {
    pub fn new(norm: MinkowskiNorm, center: [f64; 3], radius: f64) -> WulffShape {
        WulffShape { norm, center, radius }
    }

    /// The point with outer normal `x`: `y₀ + r₀ Ψ(x)`.
    pub fn point(&self, x: &[f64; 3]) -> [f64; 3] {
        num::axpy(self.radius, &self.norm.cahn_hoffman(x), &self.center)
    }

    /// `F⁰(y − y₀) − r₀`.
    pub fn membership(&self, y: &[f64; 3]) -> f64 {
        self.norm.dual_norm(&num::sub3(y, &self.center)) - self.radius
    }
}

/// `(−F(E_{n+1}), F(−E_{n+1}))`.
pub fn admissible_interval(norm: &MinkowskiNorm) -> (f64, f64) {
    let v = norm.vertical();
    let e = num::axis(v);
    (-norm.eval(&e), norm.eval(&num::scale3(-1.0, &e)))
}

/// The translation direction `E^F_{n+1}`.
pub fn e_f_vector(norm: &MinkowskiNorm, omega0: f64) -> Result<[f64; 3]> {
    let (lower, upper) = admissible_interval(norm);
    if !(omega0 > lower && omega0 < upper) {
        return Err(Error::InvalidContactAngle { omega0, lower, upper });
    }
    let e = num::axis(norm.vertical());
    let v = if omega0 < 0.0 {
        num::scale3(1.0 / norm.eval(&e), &norm.cahn_hoffman(&e))
    } else if omega0 == 0.0 {
        e
    } else {
        let m = num::scale3(-1.0, &e);
        num::scale3(-1.0 / norm.eval(&m), &norm.cahn_hoffman(&m))
    };
    Ok(v)
}

/// `𝒞_{ω₀}` together with `E^F_{n+1}` and the translated norm `F̃`.
#[derive(Clone, Debug)]
pub struct CapillaryCap {
    norm: MinkowskiNorm,
    omega0: f64,
    e_f: [f64; 3],
    tilde: MinkowskiNorm,
}

/// Orthonormal data attached to a point of `∂𝒞_{ω₀}`.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryFrame {
    /// Outer unit normal of the cap.
    pub nu: [f64; 3],
    /// Euclidean unit outward conormal, tangent to the cap.
    pub mu: [f64; 3],
    /// `A_F(ν)μ`, the anisotropic conormal.
    pub mu_f: [f64; 3],
    /// `μ_F` normalised in `g̊`.
    pub e_n: [f64; 3],
    /// Unit tangent of the boundary (zero when `n = 1`).
    pub tangent: [f64; 3],
}

/// Outcome of the boundary convexity check.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub holds: bool,
    /// Worst slack `rhs − ω₀` of the inequality form; `None` when `n = 1`.
    pub margin: Option<f64>,
    /// Largest `Q̃_{ααn}` from the translated-norm formula.
    pub max_q_tilde: Option<f64>,
    /// Largest `|formula − direct|` for `Q̃_{ααn}`. The transcribed formula
    /// agrees with the direct value in sign, not in magnitude.
    pub formula_deviation: f64,
    /// Largest `|ĥ + ½Q̃_{ααn}|` over the samples.
    pub curvature_deviation: f64,
    /// Smallest `ĥ_{αα}` of the boundary in the translated geometry.
    pub min_boundary_curvature: Option<f64>,
    pub samples: usize,
}

/// A boundary sample of the condition check.
#[derive(Clone, Copy, Debug)]
pub struct ConditionSample {
    pub phi: f64,
    pub inequality_margin: f64,
    pub q_tilde_formula: f64,
    pub q_tilde_direct: f64,
    pub boundary_curvature: f64,
}

/// Radial root data for the boundary of the normal domain `𝒜` along one meridian.
#[derive(Clone, Copy, Debug)]
pub struct MeridianRoot {
    pub r: f64,
    pub dr: f64,
    pub d2r: f64,
}

const CONDITION_SAMPLES: usize = 720;

impl CapillaryCap {
    pub fn build(norm: MinkowskiNorm, omega0: f64) -> Result<CapillaryCap> {
        let e_f = e_f_vector(&norm, omega0)?;
        let mut shift = num::scale3(omega0, &e_f);
        if norm.dim() == 2 {
            shift[2] = 0.0;
        }
        let tilde = norm.translated(shift)?;
        let cap = CapillaryCap { norm, omega0, e_f, tilde };
        cap.validate()?;
        Ok(cap)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        let v = d - 1;
        for x in crate::norm::sphere_sample(d, 2000) {
            let z = self.norm.cahn_hoffman(&x);
            if z[v] < -self.omega0 {
                continue;
            }
            let xi = num::axpy(self.omega0, &self.e_f, &z);
            if xi[v] < -1e-12 {
                return Err(Error::ChartFailure(format!("cap point below the plane: {xi:?}")));
            }
            if self.ell_at_normal(&x) <= 0.0 {
                return Err(Error::ChartFailure("ell is not positive on the cap".into()));
            }
            let j = self.norm.jet(&x);
            let jt = self.tilde.jet(&x);
            for a in 0..d {
                for b in 0..d {
                    if num::abs(j.d2f[a][b] - jt.d2f[a][b]) > 1e-10 * (1.0 + num::abs(j.d2f[a][b])) {
                        return Err(Error::InvalidNorm("translated norm changes D²F".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn norm(&self) -> &MinkowskiNorm {
        &self.norm
    }
    /// `F̃ = F + ω₀⟨E^F_{n+1}, ·⟩`.
    pub fn tilde_norm(&self) -> &MinkowskiNorm {
        &self.tilde
    }
    pub fn omega0(&self) -> f64 {
        self.omega0
    }
    pub fn e_f(&self) -> [f64; 3] {
        self.e_f
    }
    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.norm.dim()
    }
    pub fn n(&self) -> usize {
        self.norm.dim() - 1
    }

    /// The cap viewed as the `ω₀ = 0` cap of the translated norm.
    pub fn tilde(&self) -> Result<CapillaryCap> {
        CapillaryCap::build(self.tilde.clone(), 0.0)
    }

    /// Cap point `ξ = DF(x) + ω₀E^F_{n+1}` with outer normal `x`.
    pub fn point(&self, x: &[f64; 3]) -> [f64; 3] {
        num::axpy(self.omega0, &self.e_f, &self.norm.cahn_hoffman(x))
    }

    /// `ℓ` at the cap point with normal `x`: `1 + ω₀⟨E^F_{n+1}, x⟩/F(x)`.
    pub fn ell_at_normal(&self, x: &[f64; 3]) -> f64 {
        1.0 + self.omega0 * num::dot(&self.e_f, x) / self.norm.eval(x)
    }

    /// Kernel functions `G(ξ̂)(ξ̂, E_a) = x_a/F(x)`, all `n+1` components.
    pub fn kernel_at_normal(&self, x: &[f64; 3]) -> [f64; 3] {
        num::scale3(1.0 / self.norm.eval(x), x)
    }

    /// Boundary level function `⟨DF(x), E_{n+1}⟩ + ω₀`; positive inside `𝒜`.
    pub fn level(&self, x: &[f64; 3]) -> f64 {
        self.norm.cahn_hoffman(x)[self.dim() - 1] + self.omega0
    }

    /// `ℓ(ξ) = 1 + ω₀G(ξ̂)(E^F_{n+1}, ξ̂)` with `ξ̂ = ξ − ω₀E^F_{n+1}`.
    pub fn ell(&self, xi: &[f64; 3]) -> Result<f64> {
        let zhat = num::axpy(-self.omega0, &self.e_f, xi);
        let dev = self.norm.dual_norm(&zhat) - 1.0;
        if num::abs(dev) > 1e-8 * (1.0 + num::norm(xi)) {
            return Err(Error::PointOffCap { deviation: dev });
        }
        let dj = self.norm.dual_jet(&zhat)?;
        Ok(1.0 + self.omega0 * dj.g_form(&self.e_f, &zhat))
    }

    /// Outer unit normal at a cap point.
    pub fn normal_of(&self, xi: &[f64; 3]) -> Result<[f64; 3]> {
        let zhat = num::axpy(-self.omega0, &self.e_f, xi);
        let dev = self.norm.dual_norm(&zhat) - 1.0;
        if num::abs(dev) > 1e-8 * (1.0 + num::norm(xi)) {
            return Err(Error::PointOffCap { deviation: dev });
        }
        let dj = self.norm.dual_jet(&zhat)?;
        let n = num::norm(&dj.grad);
        Ok(num::scale3(1.0 / n, &dj.grad))
    }

    /// Meridian through the pole `E_{n+1}` in horizontal direction `φ`.
    /// For `n = 1` only `φ ∈ {0, π}` are meaningful.
    pub fn meridian(&self, r: f64, phi: f64) -> Meridian {
        let d = self.dim();
        let (c, cp) = if d == 2 {
            let s = if num::cos(phi) >= 0.0 { 1.0 } else { -1.0 };
            ([s, 0.0, 0.0], [0.0; 3])
        } else {
            ([num::cos(phi), num::sin(phi), 0.0], [-num::sin(phi), num::cos(phi), 0.0])
        };
        let e = num::axis(d - 1);
        let (sr, cr) = (num::sin(r), num::cos(r));
        let x = num::axpy(sr, &c, &num::scale3(cr, &e));
        let x_r = num::axpy(cr, &c, &num::scale3(-sr, &e));
        let x_phi = num::scale3(sr, &cp);
        let x_rphi = num::scale3(cr, &cp);
        let x_phiphi = num::scale3(-sr, &c);
        Meridian { x, x_r, x_phi, x_rr: num::scale3(-1.0, &x), x_rphi, x_phiphi }
    }

    /// Solves `⟨DF(x(r, φ)), E_{n+1}⟩ = −ω₀` for `r`, with first and second
    /// derivatives in `φ` by implicit differentiation. Fails if the level
    /// function is not monotone along the meridian.
    pub fn meridian_root(&self, phi: f64) -> Result<MeridianRoot> {
        let steps = 256;
        let dr = num::PI / steps as f64;
        let mut prev = self.level(&self.meridian(0.0, phi).x);
        if prev <= 0.0 {
            return Err(Error::ChartFailure("pole lies outside the cap".into()));
        }
        let mut bracket = None;
        for k in 1..=steps {
            let r = k as f64 * dr;
            let h = self.level(&self.meridian(r, phi).x);
            if bracket.is_none() {
                if h >= prev {
                    return Err(Error::ChartFailure(format!(
                        "level function not decreasing along meridian phi = {phi}"
                    )));
                }
                if h <= 0.0 {
                    bracket = Some((r - dr, r));
                }
            } else if h > 0.0 {
                return Err(Error::ChartFailure(format!("normal domain not star-shaped at phi = {phi}")));
            }
            prev = h;
        }
        let (mut lo, mut hi) = bracket.ok_or_else(|| Error::ChartFailure("no boundary on meridian".into()))?;
        let mut r = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (h, hr) = self.level_dr(r, phi);
            if h > 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let mut next = r - h / hr;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if num::abs(next - r) < 1e-16 || hi - lo < 1e-16 {
                r = next;
                break;
            }
            r = next;
        }
        let m = self.meridian(r, phi);
        let j = self.norm.jet(&m.x);
        let e = num::axis(self.dim() - 1);
        let d2 = |a: &[f64; 3], b: &[f64; 3]| bilinear(&j.d2f, a, b);
        let d3 = |a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]| trilinear(&j.d3f, a, b, c);
        let h_r = d2(&m.x_r, &e);
        if self.dim() == 2 {
            return Ok(MeridianRoot { r, dr: 0.0, d2r: 0.0 });
        }
        let h_p = d2(&m.x_phi, &e);
        let h_rr = d3(&m.x_r, &m.x_r, &e) + d2(&m.x_rr, &e);
        let h_rp = d3(&m.x_r, &m.x_phi, &e) + d2(&m.x_rphi, &e);
        let h_pp = d3(&m.x_phi, &m.x_phi, &e) + d2(&m.x_phiphi, &e);
        let r1 = -h_p / h_r;
        let r2 = -(h_rr * r1 * r1 + 2.0 * h_rp * r1 + h_pp) / h_r;
        Ok(MeridianRoot { r, dr: r1, d2r: r2 })
    }

    fn level_dr(&self, r: f64, phi: f64) -> (f64, f64) {
        let m = self.meridian(r, phi);
        let j = self.norm.jet(&m.x);
        let e = num::axis(self.dim() - 1);
        (j.df[self.dim() - 1] + self.omega0, bilinear(&j.d2f, &m.x_r, &e))
    }

    /// Boundary normal at angle `φ` together with `dν/dφ`.
    pub fn boundary_normal(&self, phi: f64) -> Result<([f64; 3], [f64; 3])> {
        let root = self.meridian_root(phi)?;
        let m = self.meridian(root.r, phi);
        Ok((m.x, num::axpy(root.dr, &m.x_r, &m.x_phi)))
    }

    /// Frame at the boundary point with normal `x`.
    pub fn boundary_frame_at_normal(&self, x: &[f64; 3]) -> BoundaryFrame {
        let d = self.dim();
        let j = self.norm.jet(x);
        let e = num::axis(d - 1);
        let (mu, tangent) = if d == 2 {
            let t = [-x[1], x[0], 0.0];
            let s = if t[1] < 0.0 { 1.0 } else { -1.0 };
            (num::scale3(s, &t), [0.0; 3])
        } else {
            // boundary tangent on the sphere: orthogonal to x and to ∇h = D²F·E
            let grad_h = matvec(&j.d2f, &e);
            let t = num::cross(x, &grad_h);
            let t = num::scale3(1.0 / num::norm(&t), &t);
            let y = matvec(&j.d2f, &t);
            let y = num::scale3(1.0 / num::norm(&y), &y);
            let m = num::cross(x, &y);
            let m = num::scale3(1.0 / num::norm(&m), &m);
            let m = if m[2] > 0.0 { num::scale3(-1.0, &m) } else { m };
            (m, y)
        };
        let mu_f = matvec(&j.d2f, &mu);
        let q = num::dot(&mu_f, &mu);
        let e_n = num::scale3(num::sqrt(j.f / q), &mu_f);
        BoundaryFrame { nu: *x, mu, mu_f, e_n, tangent }
    }

    /// Frame at a boundary point `ξ` of the cap.
    pub fn boundary_frame(&self, xi: &[f64; 3]) -> Result<BoundaryFrame> {
        let d = self.dim();
        if num::abs(xi[d - 1]) > 1e-8 * (1.0 + num::norm(xi)) {
            return Err(Error::NotBoundaryPoint);
        }
        let x = self.normal_of(xi)?;
        if num::abs(self.level(&x)) > 1e-7 {
            return Err(Error::NotBoundaryPoint);
        }
        Ok(self.boundary_frame_at_normal(&x))
    }

    /// Samples of the boundary convexity condition in all its forms.
    pub fn condition_samples(&self, count: usize) -> Result<Vec<ConditionSample>> {
        let mut out = Vec::with_capacity(count);
        if self.n() == 1 {
            return Ok(out);
        }
        let w0 = self.omega0;
        let e = num::axis(2);
        for k in 0..count {
            let phi = 2.0 * num::PI * k as f64 / count as f64;
            let (x, _) = self.boundary_normal(phi)?;
            let fr = self.boundary_frame_at_normal(&x);
            let dj = self.norm.dual_jet_at_normal(&x);
            let djt = self.tilde.dual_jet_at_normal(&x);
            let f = self.norm.eval(&x);
            let ft = self.tilde.eval(&x);
            let mu_e = num::dot(&fr.mu, &e);
            let y = fr.tangent;
            let rhs = dj.q_form(&y, &y, &fr.e_n) * mu_e * f / dj.g_form(&y, &y);
            // frame of the translated Wulff shape
            let ea = num::scale3(1.0 / num::sqrt(djt.g_form(&y, &y)), &y);
            let en_t = num::scale3(num::sqrt(ft / f), &fr.e_n);
            let ell = self.ell_at_normal(&x);
            let q_formula = (dj.q_form(&ea, &ea, &en_t) - w0 * dj.g_form(&ea, &ea) / (f * mu_e)) / ell;
            let q_direct = djt.q_form(&ea, &ea, &en_t);
            let h_hat = self.boundary_curvature(phi, &ea, &djt)?;
            out.push(ConditionSample {
                phi,
                inequality_margin: rhs - w0,
                q_tilde_formula: q_formula,
                q_tilde_direct: q_direct,
                boundary_curvature: h_hat,
            });
        }
        Ok(out)
    }

    /// `ĥ_{αα} = g̃(ẽ_α, ∇̃_{ẽ_α} ẽ_n)`, from the Gauss formula on `𝒲̃` with a
    /// central difference of `ẽ_n` along the boundary.
    fn boundary_curvature(&self, phi: f64, ea: &[f64; 3], djt: &crate::norm::DualJet) -> Result<f64> {
        let h = 1e-4;
        let en_at = |p: f64| -> Result<([f64; 3], [f64; 3])> {
            let (x, _) = self.boundary_normal(p)?;
            let fr = self.boundary_frame_at_normal(&x);
            let s = num::sqrt(self.tilde.eval(&x) / self.norm.eval(&x));
            Ok((num::scale3(s, &fr.e_n), self.tilde.cahn_hoffman(&x)))
        };
        let (ep, zp) = en_at(phi + h)?;
        let (em, zm) = en_at(phi - h)?;
        let (e0, _) = en_at(phi)?;
        let dz = num::scale3(0.5 / h, &num::sub3(&zp, &zm));
        let de = num::scale3(0.5 / h, &num::sub3(&ep, &em));
        // d/dφ runs along Y = dz̃/dφ; rescale to the unit vector ẽ_α
        let ylen = num::sqrt(djt.g_form(&dz, &dz));
        let sign = if num::dot(&dz, ea) >= 0.0 { 1.0 } else { -1.0 };
        let d_e = num::scale3(sign / ylen, &de);
        Ok(djt.g_form(ea, &d_e) + 0.5 * djt.q_form(ea, ea, &e0))
    }

    /// Evaluates the boundary convexity condition. Both the inequality form
    /// and the sign of `Q̃_{ααn}` are computed; they must agree.
    pub fn condition_check(&self) -> Result<ConditionReport> {
        if self.n() == 1 {
            return Ok(ConditionReport {
                holds: true,
                margin: None,
                max_q_tilde: None,
                formula_deviation: 0.0,
                curvature_deviation: 0.0,
                min_boundary_curvature: None,
                samples: 2,
            });
        }
        let samples = self.condition_samples(CONDITION_SAMPLES)?;
        let mut margin = f64::INFINITY;
        let mut max_q = f64::NEG_INFINITY;
        let mut dev: f64 = 0.0;
        let mut cdev: f64 = 0.0;
        let mut min_h = f64::INFINITY;
        for s in &samples {
            margin = num::min(margin, s.inequality_margin);
            max_q = num::max(max_q, s.q_tilde_formula);
            dev = num::max(dev, num::abs(s.q_tilde_formula - s.q_tilde_direct));
            cdev = num::max(cdev, num::abs(s.boundary_curvature + 0.5 * s.q_tilde_direct));
            min_h = num::min(min_h, s.boundary_curvature);
            let a = s.inequality_margin > 0.0;
            let b = s.q_tilde_formula < 0.0;
            let c = s.q_tilde_direct < 0.0;
            let clear = |v: f64| num::abs(v) > 1e-9;
            if (a != b && clear(s.inequality_margin) && clear(s.q_tilde_formula))
                || (b != c && clear(s.q_tilde_formula) && clear(s.q_tilde_direct))
            {
                return Err(Error::FormMismatch { deviation: s.inequality_margin });
            }
        }
        Ok(ConditionReport {
            holds: margin > 0.0 && max_q < 0.0,
            margin: Some(margin),
            max_q_tilde: Some(max_q),
            formula_deviation: dev,
            curvature_deviation: cdev,
            min_boundary_curvature: Some(min_h),
            samples: samples.len(),
        })
    }
}

/// Point and partial derivatives of `x(r, φ) = cos r E_{n+1} + sin r c(φ)`.
#[derive(Clone, Copy, Debug)]
pub struct Meridian {
    pub x: [f64; 3],
    pub x_r: [f64; 3],
    pub x_phi: [f64; 3],
    pub x_rr: [f64; 3],
    pub x_rphi: [f64; 3],
    pub x_phiphi: [f64; 3],
}
