//! Quermassintegrals, area measures, mixed quermassintegrals, volumes,
//! inradius and the geometric inequalities.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::body::CapBody;
use crate::domain::{Domain, Layout, D1, D2};
use crate::error::{Error, Result};
use crate::num;

/// `H_k^F = σ_{n−k}(τ)/(C(n,k)·σ_n(τ))` at every node.
pub fn hk_curvature(body: &CapBody<'_>, k: usize) -> Result<Vec<f64>> {
    let n = body.n();
    if k > n {
        return Err(Error::InvalidSpec("curvature index exceeds n".into()));
    }
    body.require_admissible()?;
    let c = num::binom(n, k);
    Ok((0..body.values().len()).map(|i| body.sigma(n - k, i) / (c * body.sigma(n, i))).collect())
}

/// `𝒱_{k+1}` by the bulk integral; `k = −1` gives the enclosed volume
/// `1/(n+1)∫ŝσ_n dμ_F`.
pub fn quermassintegral(body: &CapBody<'_>, k: i32) -> Result<f64> {
    let n = body.n() as i32;
    if k < -1 || k > n {
        return Err(Error::InvalidSpec("quermassintegral index out of range".into()));
    }
    body.require_admissible()?;
    Ok(quermass_unchecked(body, k))
}

fn quermass_unchecked(body: &CapBody<'_>, k: i32) -> f64 {
    let d = body.domain();
    let n = body.n();
    let len = body.values().len();
    if k < 0 {
        let f: Vec<f64> = (0..len).map(|i| body.values()[i] * body.sigma(n, i)).collect();
        return d.integrate(&f) / (n + 1) as f64;
    }
    let k = k as usize;
    let ell = d.ell();
    let f: Vec<f64> = (0..len).map(|i| body.sigma(n - k, i) * ell[i]).collect();
    d.integrate(&f) / ((n + 1) as f64 * num::binom(n, k))
}

/// `𝒱_j` for `j = 0..=n+1`.
pub fn quermass_index(body: &CapBody<'_>, j: usize) -> Result<f64> {
    quermassintegral(body, j as i32 - 1)
}

/// `Vol(Σ̂)` by the divergence form.
pub fn volume(body: &CapBody<'_>) -> Result<f64> {
    quermassintegral(body, -1)
}

/// Density of `dS_{p,k}` with respect to `dμ_F(𝒞_{ω₀})`.
#[derive(Clone, Debug)]
pub struct AreaDensity {
    pub density: Vec<f64>,
    /// For `p = 1`, `k = 0`: the `m_{ω₀}` density computed from the
    /// reconstructed surface's Gauss curvature, per unit `dμ_F`.
    pub m_omega: Option<Vec<f64>>,
    /// Largest `|m_{ω₀}/(ℓ·dS_{1,0}) − 1|` over interior nodes.
    pub normalization_defect: Option<f64>,
}

pub fn area_measure_density(body: &CapBody<'_>, p: f64, k: usize) -> Result<AreaDensity> {
    let n = body.n();
    if k > n {
        return Err(Error::InvalidSpec("area measure index exceeds n".into()));
    }
    if p != 1.0 {
        body.require_positive()?;
    }
    body.require_admissible()?;
    let len = body.values().len();
    let density: Vec<f64> = (0..len)
        .map(|i| {
            let s = body.values()[i];
            let w = if p == 1.0 { 1.0 } else { num::powf(s, 1.0 - p) };
            w * body.sigma(n - k, i)
        })
        .collect();
    let (m_omega, defect) = if p == 1.0 && k == 0 {
        let (m, d) = m_omega_density(body, &density)?;
        (Some(m), Some(d))
    } else {
        (None, None)
    };
    Ok(AreaDensity { density, m_omega, normalization_defect: defect })
}

/// `(F(ν) + ω₀⟨ν, E^F⟩)/K_Σ` per unit sphere area, converted to `dμ_F`.
fn m_omega_density(body: &CapBody<'_>, s1: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = body.domain();
    let n = body.n();
    let cap = d.cap();
    let x = body.reconstruct()?;
    let comps: Vec<Vec<f64>> = (0..=n).map(|c| x.iter().map(|p| p[c]).collect()).collect();
    let mut out = Vec::with_capacity(x.len());
    let mut defect: f64 = 0.0;
    for i in 0..x.len() {
        let node = &d.grid().nodes[i];
        let m = d.node(i);
        let mut xt = [[0.0; 3]; 2];
        for (c, comp) in comps.iter().enumerate() {
            let dv = d.derivatives(comp, i);
            xt[0][c] = dv[D1];
            xt[1][c] = dv[D2];
        }
        // Gauss map of Σ at this node is the node normal; its chart
        // derivatives are the chart jet of x.
        let (sphere, surf) = if n == 1 {
            (num::norm(&node.jet.d1[0]), num::norm(&xt[0]))
        } else {
            (
                num::norm(&num::cross(&node.jet.d1[0], &node.jet.d1[1])),
                num::norm(&num::cross(&xt[0], &xt[1])),
            )
        };
        let gauss = sphere / surf;
        let nu = node.normal;
        let numer = m.f + cap.omega0() * num::dot(&nu, &cap.e_f());
        let per_sphere = numer / gauss;
        let v = per_sphere * sphere / m.density;
        if !node.boundary {
            defect = num::max(defect, num::abs(v / (m.ell * s1[i]) - 1.0));
        }
        out.push(v);
    }
    Ok((out, defect))
}

/// `W_{p,k}(K, L) = (n−k+1)/(p(n+1)C(n,k))∫ŝ_L^p ŝ_K^{1−p}σ_{n−k}(τ[ŝ_K]) dμ_F`.
pub fn mixed_quermassintegral(k_body: &CapBody<'_>, l_body: &CapBody<'_>, p: f64, k: usize) -> Result<f64> {
    let n = k_body.n();
    if k > n {
        return Err(Error::InvalidSpec("mixed quermassintegral index exceeds n".into()));
    }
    if p != 1.0 {
        k_body.require_positive()?;
        l_body.require_positive()?;
    }
    k_body.require_admissible()?;
    let len = k_body.values().len();
    let f: Vec<f64> = (0..len)
        .map(|i| {
            let (sk, sl) = (k_body.values()[i], l_body.values()[i]);
            let w = if p == 1.0 { sl } else { num::powf(sl, p) * num::powf(sk, 1.0 - p) };
            w * k_body.sigma(n - k, i)
        })
        .collect();
    let c = (n - k + 1) as f64 / (p * (n + 1) as f64 * num::binom(n, k));
    Ok(c * k_body.domain().integrate(&f))
}

/// Anisotropic inradius relative to the cap, over horizontal translations.
pub fn inradius(body: &CapBody<'_>) -> f64 {
    let d = body.domain();
    let n = body.n();
    let ell = d.ell();
    let k: Vec<Vec<f64>> = (0..n).map(|a| d.kernel(a)).collect();
    let s = body.values();
    let phi = |y: &[f64; 2]| -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..s.len() {
            let mut v = s[i];
            for a in 0..n {
                v -= y[a] * k[a][i];
            }
            m = num::min(m, v / ell[i]);
        }
        m
    };
    let bound = 2.0 * body.max_abs() + 1.0;
    let golden = |f: &dyn Fn(f64) -> f64| -> (f64, f64) {
        let (mut lo, mut hi) = (-bound, bound);
        let r = 0.5 * (num::sqrt(5.0) - 1.0);
        let mut a = hi - r * (hi - lo);
        let mut b = lo + r * (hi - lo);
        let (mut fa, mut fb) = (f(a), f(b));
        for _ in 0..90 {
            if fa < fb {
                lo = a;
                a = b;
                fa = fb;
                b = lo + r * (hi - lo);
                fb = f(b);
            } else {
                hi = b;
                b = a;
                fb = fa;
                a = hi - r * (hi - lo);
                fa = f(a);
            }
        }
        let m = 0.5 * (lo + hi);
        (m, f(m))
    };
    if n == 1 {
        golden(&|y| phi(&[y, 0.0])).1
    } else {
        let inner = |y0: f64| golden(&|y1| phi(&[y0, y1])).1;
        golden(&inner).1
    }
}

/// Monte-Carlo volume estimate.
#[derive(Clone, Copy, Debug)]
pub struct McVolume {
    pub volume: f64,
    pub std_error: f64,
    pub samples: usize,
}

struct Block {
    start: usize,
    end: usize,
    center: [f64; 3],
    spread: f64,
    f_min: f64,
    f_max: f64,
    s_min: f64,
}

/// Volume of `{y : y_{n+1} ≥ 0, ⟨x_j, y⟩/F(x_j) ≤ ŝ_j for all nodes}` by
/// uniform sampling of a bounding box.
pub fn mc_volume(body: &CapBody<'_>, samples: usize, seed: u64) -> Result<McVolume> {
    let d = body.domain();
    let n = body.n();
    let dim = n + 1;
    let pts = body.reconstruct()?;
    let normals: Vec<[f64; 3]> = d.grid().nodes.iter().map(|nd| nd.normal).collect();
    let fs: Vec<f64> = d.metric().nodes.iter().map(|m| m.f).collect();
    let s = body.values();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &pts {
        for c in 0..dim {
            lo[c] = num::min(lo[c], p[c]);
            hi[c] = num::max(hi[c], p[c]);
        }
    }
    lo[n] = 0.0;
    for c in 0..dim {
        let pad = 0.02 * (hi[c] - lo[c]);
        hi[c] += pad;
        if c != n {
            lo[c] -= pad;
        }
    }
    let block = match d.grid().layout {
        Layout::Polar { angles, .. } => angles.min(16),
        Layout::Curve { .. } => 8,
    };
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < normals.len() {
        let end = (start + block).min(normals.len());
        let mut c = [0.0; 3];
        for x in &normals[start..end] {
            c = num::add3(&c, x);
        }
        let c = num::scale3(1.0 / num::norm(&c), &c);
        let spread = normals[start..end].iter().fold(0.0, |m, x| num::max(m, num::norm(&num::sub3(x, &c))));
        let f_min = fs[start..end].iter().fold(f64::INFINITY, |m, v| num::min(m, *v));
        let f_max = fs[start..end].iter().fold(0.0, |m, v| num::max(m, *v));
        let s_min = s[start..end].iter().fold(f64::INFINITY, |m, v| num::min(m, *v));
        blocks.push(Block { start, end, center: c, spread, f_min, f_max, s_min });
        start = end;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut y = [0.0; 3];
        for c in 0..dim {
            y[c] = lo[c] + (hi[c] - lo[c]) * rng.gen::<f64>();
        }
        let ylen = num::norm(&y);
        let mut inside = true;
        'blocks: for b in &blocks {
            let top = num::dot(&b.center, &y) + ylen * b.spread;
            let ub = if top >= 0.0 { top / b.f_min } else { top / b.f_max } - b.s_min;
            if ub <= 0.0 {
                continue;
            }
            for j in b.start..b.end {
                if num::dot(&normals[j], &y) > s[j] * fs[j] {
                    inside = false;
                    break 'blocks;
                }
            }
        }
        if inside {
            hits += 1;
        }
    }
    let box_vol: f64 = (0..dim).map(|c| hi[c] - lo[c]).product();
    let frac = hits as f64 / samples as f64;
    Ok(McVolume {
        volume: box_vol * frac,
        std_error: box_vol * num::sqrt(frac * (1.0 - frac) / samples as f64),
        samples,
    })
}

/// Both sides of the first-variation formula.
#[derive(Clone, Copy, Debug)]
pub struct VariationalCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relerr: f64,
}

/// Compares the centred difference of `𝒱_{k+1}` along `ŝ + t·f` with
/// `(n−k)/((n+1)C(n,k+1))∫fσ_{n−k−1}dμ_F`. `k ∈ {−1, …, n−1}`.
pub fn variational_check(body: &CapBody<'_>, speed: &[f64], k: i32, step: f64) -> Result<VariationalCheck> {
    let n = body.n() as i32;
    if k < -1 || k > n - 1 {
        return Err(Error::InvalidSpec("variation index out of range".into()));
    }
    body.require_admissible()?;
    let d = body.domain();
    let plus: Vec<f64> = body.values().iter().zip(speed).map(|(s, f)| s + step * f).collect();
    let minus: Vec<f64> = body.values().iter().zip(speed).map(|(s, f)| s - step * f).collect();
    let bp = CapBody::new(d, plus);
    let bm = CapBody::new(d, minus);
    bp.require_admissible()?;
    bm.require_admissible()?;
    let lhs = (quermass_unchecked(&bp, k) - quermass_unchecked(&bm, k)) / (2.0 * step);
    let nu = n as usize;
    let j = (k + 1) as usize;
    let f: Vec<f64> = (0..speed.len()).map(|i| speed[i] * body.sigma(nu - j, i)).collect();
    let rhs = (n - k) as f64 / ((nu + 1) as f64 * num::binom(nu, j)) * d.integrate(&f);
    let scale = num::max(num::abs(rhs), num::abs(lhs));
    let relerr = if scale > 0.0 { num::abs(lhs - rhs) / scale } else { 0.0 };
    Ok(VariationalCheck { lhs, rhs, relerr })
}

/// Area of the flat bottom face: `½∮(x y' − y x') dφ` over the
/// reconstructed boundary, with `φ`-derivatives from the grid stencils and
/// the periodic trapezoid rule.
pub fn bottom_face_area(body: &CapBody<'_>) -> Result<f64> {
    let pts = body.reconstruct()?;
    let d = body.domain();
    let bnd: Vec<usize> = d.grid().boundary_nodes().collect();
    if body.n() == 1 {
        return Ok(num::abs(pts[bnd[1]][0] - pts[bnd[0]][0]));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
    let mut a = 0.0;
    for &i in &bnd {
        let dx = d.derivatives(&xs, i)[D2];
        let dy = d.derivatives(&ys, i)[D2];
        a += xs[i] * dy - ys[i] * dx;
    }
    Ok(0.5 * num::abs(a) * 2.0 * num::PI / bnd.len() as f64)
}

/// `|Σ|_F = ∫σ_n(τ) dμ_F`.
pub fn anisotropic_area(body: &CapBody<'_>) -> Result<f64> {
    body.require_admissible()?;
    let n = body.n();
    let f: Vec<f64> = (0..body.values().len()).map(|i| body.sigma(n, i)).collect();
    Ok(body.domain().integrate(&f))
}

/// Inequality slacks for one body; nonnegative up to discretization error
/// when the inequalities hold.
#[derive(Clone, Copy, Debug)]
pub struct InequalitySlacks {
    /// `r(Σ) − Vol/𝒱_1`. Equality for the cap; negative for bodies whose
    /// support planes do not all touch a largest inscribed cap.
    pub inradius_bound: f64,
    /// `(n+1)r(Σ) − Vol/𝒱_1`, the bound that follows from the
    /// quermassintegral–inradius inequality.
    pub inradius_bound_derived: f64,
    /// `𝒱_1^{(n+1)/n} − Vol·Vol(𝒞)^{1/n} − [𝒱_1^{1/n} − r·Vol(𝒞)^{1/n}]^{n+1}`.
    pub quermass_inradius: f64,
    /// `|Σ|_F + ω₀|∂Σ̂| − |Σ̂|^{n/(n+1)}·A₂`.
    pub isoperimetric: f64,
    /// `(n+1)𝒱_1 − (|Σ|_F + ω₀|∂Σ̂|)`: consistency of the two area forms.
    pub area_consistency: f64,
}

pub fn inequality_slacks(body: &CapBody<'_>) -> Result<InequalitySlacks> {
    let d = body.domain();
    let n = body.n();
    let nf = n as f64;
    let w0 = d.cap().omega0();
    let cap = CapBody::cap(d);
    let vol = volume(body)?;
    let v1 = quermass_index(body, 1)?;
    let vol_c = volume(&cap)?;
    let r = inradius(body);
    let inradius_bound = r - vol / v1;
    let inradius_bound_derived = (nf + 1.0) * r - vol / v1;
    let lhs = num::powf(v1, (nf + 1.0) / nf) - vol * num::powf(vol_c, 1.0 / nf);
    let br = num::powf(v1, 1.0 / nf) - r * num::powf(vol_c, 1.0 / nf);
    let rhs = num::powi(br, n as i32 + 1);
    let area = anisotropic_area(body)? + w0 * bottom_face_area(body)?;
    let area_c = anisotropic_area(&cap)? + w0 * bottom_face_area(&cap)?;
    let a2 = area_c / num::powf(vol_c, nf / (nf + 1.0));
    Ok(InequalitySlacks {
        inradius_bound,
        inradius_bound_derived,
        quermass_inradius: lhs - rhs,
        isoperimetric: area - num::powf(vol, nf / (nf + 1.0)) * a2,
        area_consistency: (nf + 1.0) * v1 - area,
    })
}

/// `Vol((1−t)K +_p tL)^{p/(n+1)} − (1−t)Vol(K)^{p/(n+1)} − tVol(L)^{p/(n+1)}`.
pub fn brunn_minkowski_slack(k: &CapBody<'_>, l: &CapBody<'_>, p: f64, t: f64) -> Result<f64> {
    let e = p / (k.n() + 1) as f64;
    let m = crate::body::psum(1.0 - t, k, t, l, p)?;
    Ok(num::powf(volume(&m)?, e) - (1.0 - t) * num::powf(volume(k)?, e) - t * num::powf(volume(l)?, e))
}

/// `(1/(n+1))∫ŝ_L^pŝ_K^{1−p}σ_n dμ_F − Vol(K)^{(n+1−p)/(n+1)}Vol(L)^{p/(n+1)}`.
pub fn minkowski_slack(k: &CapBody<'_>, l: &CapBody<'_>, p: f64) -> Result<f64> {
    let n1 = (k.n() + 1) as f64;
    let w = mixed_quermassintegral(k, l, p, 0)? * p / n1;
    Ok(w - num::powf(volume(k)?, (n1 - p) / n1) * num::powf(volume(l)?, p / n1))
}

/// Measures of one body.
#[derive(Clone, Debug)]
pub struct MeasureReport {
    /// `𝒱_0, …, 𝒱_{n+1}`.
    pub quermass: Vec<f64>,
    pub volume: f64,
    pub volume_mc: Option<McVolume>,
    pub inradius: f64,
    pub anisotropic_area: f64,
    pub bottom_face_area: f64,
    pub slacks: InequalitySlacks,
}

pub fn measure_report(body: &CapBody<'_>, mc: Option<(usize, u64)>) -> Result<MeasureReport> {
    let n = body.n();
    let quermass = (0..=n + 1).map(|j| quermass_index(body, j)).collect::<Result<Vec<_>>>()?;
    let volume_mc = match mc {
        Some((samples, seed)) => Some(mc_volume(body, samples, seed)?),
        None => None,
    };
    Ok(MeasureReport {
        volume: quermass[0],
        quermass,
        volume_mc,
        inradius: inradius(body),
        anisotropic_area: anisotropic_area(body)?,
        bottom_face_area: bottom_face_area(body)?,
        slacks: inequality_slacks(body)?,
    })
}

/// `p=1` part of the linearized operator, `𝒢^{ij}τ_{ij}[v]` with `𝒢` the
/// cofactor matrix of `τ̂[ŝ]`, evaluated at every node.
pub fn linearized_apply(domain: &Domain, s: &[f64], v: &[f64]) -> Vec<f64> {
    let n = domain.n();
    (0..domain.len())
        .map(|i| {
            let t = domain.tau_hat(s, i);
            let tv = domain.tau_hat(v, i);
            if n == 1 {
                tv[0][0]
            } else {
                t[1][1] * tv[0][0] + t[0][0] * tv[1][1] - t[0][1] * tv[1][0] - t[1][0] * tv[0][1]
            }
        })
        .collect()
}

/// `|∫wLv − ∫vLw| / (‖v‖‖w‖)` with `L²(dμ_F)` norms.
pub fn self_adjointness_defect(domain: &Domain, s: &[f64], v: &[f64], w: &[f64]) -> f64 {
    let lv = linearized_apply(domain, s, v);
    let lw = linearized_apply(domain, s, w);
    let a: Vec<f64> = w.iter().zip(&lv).map(|(x, y)| x * y).collect();
    let b: Vec<f64> = v.iter().zip(&lw).map(|(x, y)| x * y).collect();
    let nv = num::sqrt(domain.integrate(&v.iter().map(|x| x * x).collect::<Vec<_>>()));
    let nw = num::sqrt(domain.integrate(&w.iter().map(|x| x * x).collect::<Vec<_>>()));
    num::abs(domain.integrate(&a) - domain.integrate(&b)) / (nv * nw)
}

