//! Damped Newton with continuation for `det τ[ŝ] = f·ŝ^{p−1}` under the
//! Robin condition `⟨∇̊ŝ, E_{n+1}⟩ = ω₀ŝ`.
//!
//! The path is `f_t = ((1−t) + t·f·ℓ^{p−1})·ℓ^{1−p}`, solved by `ŝ = ℓ` at
//! `t = 0` for every `p`; for `p = 1` it is `(1−t) + t·f`.

use alloc::vec;
use alloc::vec::Vec;

use crate::body::{self, CapBody};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::{Bordered, Factor};
use crate::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// `ŝ` on the cap.
    Original,
    /// `s̃ = ŝ/ℓ` on the translated cap with `f̃ = f·ℓ^{p−1}`.
    Translated,
}

#[derive(Clone, Copy, Debug)]
pub struct HomotopyParams {
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for HomotopyParams {
    fn default() -> Self {
        HomotopyParams { initial_step: 0.1, min_step: 1e-4 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveSpec<'d> {
    pub domain: &'d Domain,
    /// `domain.tilde()`, needed by [`Formulation::Translated`].
    pub tilde: Option<&'d Domain>,
    pub p: f64,
    /// Nodal data on `domain`.
    pub f: Vec<f64>,
    pub homotopy: HomotopyParams,
    /// Sup-norm residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Restrict iterates to even functions (required for `1 < p < n+1`).
    pub even: bool,
    pub formulation: Formulation,
    /// Start Newton at `t = 1` from this body instead of continuing from `ℓ`.
    pub initial: Option<Vec<f64>>,
    /// `τ`-positivity floor relative to the largest trace.
    pub tau_floor: f64,
}

impl<'d> SolveSpec<'d> {
    pub fn new(domain: &'d Domain, p: f64, f: Vec<f64>) -> SolveSpec<'d> {
        let n = domain.n() as f64;
        SolveSpec {
            domain,
            tilde: None,
            p,
            f,
            homotopy: HomotopyParams::default(),
            tol: 1e-10,
            max_iter: 30,
            even: p > 1.0 && p < n + 1.0,
            formulation: Formulation::Original,
            initial: None,
            tau_floor: 1e-8,
        }
    }

    pub fn translated(mut self, tilde: &'d Domain) -> Self {
        self.tilde = Some(tilde);
        self.formulation = Formulation::Translated;
        self
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Self {
        self.initial = Some(initial);
        self
    }
}

/// One corrector run of the continuation.
#[derive(Clone, Debug)]
pub struct HomotopyStep {
    pub t: f64,
    pub accepted: bool,
    /// Sup-norm residual before each Newton update and at the end.
    pub residuals: Vec<f64>,
    pub min_eigenvalue: f64,
}

impl HomotopyStep {
    pub fn iterations(&self) -> usize {
        self.residuals.len().saturating_sub(1)
    }
}

/// Two-sided `C⁰` envelope for `p > n+1`.
#[derive(Clone, Copy, Debug)]
pub struct C0Report {
    pub lower: f64,
    pub upper: f64,
    /// `min ŝ^{p−n−1} − lower`.
    pub lower_slack: f64,
    /// `upper − max ŝ^{p−n−1}`.
    pub upper_slack: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub min_eigenvalue_history: Vec<f64>,
    /// `∫G(ξ̂)(ξ̂, E_α)f dμ_F` before projection (`p = 1`).
    pub compat_defect: Vec<f64>,
    /// Kernel coefficients removed from `f` (`p = 1`).
    pub compat_removed: Vec<f64>,
    /// Kernel coefficients removed from the final body.
    pub kernel_removed: Vec<f64>,
    /// Lagrange multipliers of the kernel constraints (`p = 1`).
    pub multipliers: Vec<f64>,
    pub final_residual: f64,
    /// Effective Newton tolerance: `tol` raised to the rounding level of
    /// the discrete operator when that is larger.
    pub tolerance: f64,
    pub robin_residual: f64,
    /// Largest `|∫G(ξ̂)(ξ̂, E_α)ŝ dμ_F|` of the returned body (`p = 1`).
    pub gauge_defect: f64,
    pub c0: Option<C0Report>,
}

#[derive(Clone, Debug)]
pub struct SolveResult<'d> {
    pub body: CapBody<'d>,
    /// Eigenvalue for `p = n+1`.
    pub eta: Option<f64>,
    pub trace: Vec<HomotopyStep>,
    pub diagnostics: Diagnostics,
    /// `s̃` for the translated formulation.
    pub tilde_values: Option<Vec<f64>>,
}

/// `f_t` at every node.
pub fn homotopy_data(ell: &[f64], f: &[f64], p: f64, t: f64) -> Vec<f64> {
    ell.iter()
        .zip(f)
        .map(|(&l, &fi)| {
            if p == 1.0 {
                (1.0 - t) + t * fi
            } else {
                ((1.0 - t) + t * fi * num::powf(l, p - 1.0)) * num::powf(l, 1.0 - p)
            }
        })
        .collect()
}

fn det_tau(domain: &Domain, values: &[f64], i: usize) -> f64 {
    let t = domain.tau_chart(values, i);
    let m = domain.node(i);
    if domain.n() == 1 {
        t[0][0] / m.g[0][0]
    } else {
        (t[0][0] * t[1][1] - t[0][1] * t[1][0]) / m.det_g(2)
    }
}

/// Interior rows `det τ[ŝ] − f_t·ŝ^{p−1}` and Robin rows on the boundary.
pub fn residual(domain: &Domain, p: f64, f: &[f64], values: &[f64], t: f64) -> Vec<f64> {
    let ft = homotopy_data(&domain.ell(), f, p, t);
    (0..domain.len())
        .map(|i| {
            if domain.is_boundary(i) {
                domain.robin_at(values, i)
            } else {
                det_tau(domain, values, i) - ft[i] * pow_p1(values[i], p)
            }
        })
        .collect()
}

fn pow_p1(s: f64, p: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else {
        num::powf(s, p - 1.0)
    }
}

/// Jacobian of [`residual`] as `(row, column, value)` triplets:
/// `𝒢^{ij}τ_{ij}[v] − (p−1)f_tŝ^{p−2}v` inside, the Robin functional on the
/// boundary.
pub fn linearize(domain: &Domain, p: f64, f: &[f64], values: &[f64], t: f64) -> Result<Vec<(usize, usize, f64)>> {
    CapBody::new(domain, values.to_vec()).require_admissible()?;
    let ft = homotopy_data(&domain.ell(), f, p, t);
    Ok(jacobian(domain, values, |i| {
        if p == 1.0 {
            0.0
        } else {
            -(p - 1.0) * ft[i] * num::powf(values[i], p - 2.0)
        }
    }))
}

fn jacobian<D: Fn(usize) -> f64>(domain: &Domain, values: &[f64], diag: D) -> Vec<(usize, usize, f64)> {
    let n = domain.n();
    let mut trip = Vec::with_capacity(domain.len() * 9);
    for i in 0..domain.len() {
        let st = domain.stencil(i);
        if domain.is_boundary(i) {
            for (k, c) in domain.robin_coefficients(i).iter().enumerate() {
                trip.push((i, st.idx[k], *c));
            }
            continue;
        }
        let t = domain.tau_chart(values, i);
        let m = domain.node(i);
        let (cof, dg) = if n == 1 {
            ([[1.0, 0.0], [0.0, 0.0]], m.g[0][0])
        } else {
            ([[t[1][1], -t[1][0]], [-t[0][1], t[0][0]]], m.det_g(2))
        };
        for (k, c) in domain.tau_coefficients(i).iter().enumerate() {
            let mut v = 0.0;
            for a in 0..n {
                for b in 0..n {
                    v += cof[a][b] * c[a][b];
                }
            }
            trip.push((i, st.idx[k], v / dg));
        }
        trip.push((i, i, diag(i)));
    }
    trip
}

/// Kernel integrals `∫G(ξ̂)(ξ̂, E_α)f dμ_F`.
pub fn compat_defect(domain: &Domain, f: &[f64]) -> Vec<f64> {
    (0..domain.n())
        .map(|a| {
            let k = domain.kernel(a);
            domain.integrate(&k.iter().zip(f).map(|(x, y)| x * y).collect::<Vec<_>>())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CompatProjection {
    pub f: Vec<f64>,
    /// Removed kernel coefficients.
    pub defect: Vec<f64>,
}

/// Removes the `L²(dμ_F)` component of `f` along the kernel functions.
pub fn compat_project(domain: &Domain, f: &[f64]) -> Result<CompatProjection> {
    let m = f.iter().fold(f64::INFINITY, |a, v| num::min(a, *v));
    if m <= 0.0 {
        return Err(Error::NotPositive { min_value: m });
    }
    let c = body::kernel_coefficients(domain, f);
    let mut out = f.to_vec();
    for (a, ca) in c.iter().enumerate() {
        for (o, k) in out.iter_mut().zip(domain.kernel(a)) {
            *o -= ca * k;
        }
    }
    let m = out.iter().fold(f64::INFINITY, |a, v| num::min(a, *v));
    if m <= 0.0 {
        return Err(Error::ProjectionBreaksPositivity { min_value: m });
    }
    Ok(CompatProjection { f: out, defect: c })
}

/// Checks `(minℓ)^{p−n−1}/(max f·(maxℓ)^{p−1}) ≤ ŝ^{p−n−1} ≤
/// (maxℓ)^{p−n−1}/(min f·(minℓ)^{p−1})` for `p > n+1`.
pub fn c0_diagnostics(domain: &Domain, p: f64, f: &[f64], values: &[f64]) -> Option<C0Report> {
    let n = domain.n() as f64;
    if p <= n + 1.0 {
        return None;
    }
    let ell = domain.ell();
    let lo = |v: &[f64]| v.iter().fold(f64::INFINITY, |a, x| num::min(a, *x));
    let hi = |v: &[f64]| v.iter().fold(f64::NEG_INFINITY, |a, x| num::max(a, *x));
    let e = p - n - 1.0;
    let lower = num::powf(lo(&ell), e) / (hi(f) * num::powf(hi(&ell), p - 1.0));
    let upper = num::powf(hi(&ell), e) / (lo(f) * num::powf(lo(&ell), p - 1.0));
    let pv: Vec<f64> = values.iter().map(|s| num::powf(num::max(*s, 0.0), e)).collect();
    let lower_slack = lo(&pv) - lower;
    let upper_slack = upper - hi(&pv);
    let tol = 1e-9 * upper;
    Some(C0Report { lower, upper, lower_slack, upper_slack, holds: lower_slack >= -tol && upper_slack >= -tol })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// `p = 1`: kernel multipliers and gauge constraints.
    Kernel,
    /// `p = n+1`: eigenvalue unknown and normalization.
    Eigen,
    Plain,
}

enum Failure {
    Admissibility,
    Stalled(f64),
}

struct Problem<'a> {
    d: &'a Domain,
    p: f64,
    f: Vec<f64>,
    ell: Vec<f64>,
    kind: Kind,
    even: bool,
    kernels: Vec<Vec<f64>>,
    /// `∫ℓ dμ_F` on the working domain, the eigen normalization.
    mass: f64,
    tol: f64,
    max_iter: usize,
    floor: f64,
}

#[derive(Clone)]
struct State {
    s: Vec<f64>,
    extra: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn sup(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| num::max(m, num::abs(*x)))
    }

    fn ft(&self, t: f64) -> Vec<f64> {
        homotopy_data(&self.ell, &self.f, self.p, t)
    }

    fn residual(&self, st: &State, t: f64) -> (Vec<f64>, Vec<f64>) {
        let ft = self.ft(t);
        let n = self.d.n();
        let mut r = Vec::with_capacity(st.s.len());
        for i in 0..st.s.len() {
            if self.d.is_boundary(i) {
                r.push(self.d.robin_at(&st.s, i));
                continue;
            }
            let det = det_tau(self.d, &st.s, i);
            let v = match self.kind {
                Kind::Kernel => {
                    det - ft[i] + (0..n).map(|a| st.extra[a] * self.kernels[a][i]).sum::<f64>()
                }
                Kind::Eigen => det - st.extra[0] * ft[i] * num::powi(st.s[i], n as i32),
                Kind::Plain => det - ft[i] * pow_p1(st.s[i], self.p),
            };
            r.push(v);
        }
        let g = match self.kind {
            Kind::Kernel => (0..n)
                .map(|a| self.d.integrate(&mul(&self.kernels[a], &st.s)))
                .collect(),
            Kind::Eigen => vec![self.d.integrate(&st.s) - self.mass],
            Kind::Plain => Vec::new(),
        };
        (r, g)
    }

    fn admissible(&self, s: &[f64]) -> Option<f64> {
        if self.p > 1.0 && s.iter().any(|v| *v <= 0.0) {
            return None;
        }
        let tau = body::TauField::compute(self.d, s);
        let scale = tau
            .hat
            .iter()
            .fold(0.0, |m, t| num::max(m, num::abs(t[0][0] + if self.d.n() == 2 { t[1][1] } else { 0.0 })));
        if tau.min_eigenvalue > self.floor * scale {
            Some(tau.min_eigenvalue)
        } else {
            None
        }
    }

    fn step(&self, st: &State, t: f64, r: &[f64], g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ft = self.ft(t);
        let n = self.d.n();
        let len = st.s.len();
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let grhs: Vec<f64> = g.iter().map(|v| -v).collect();
        match self.kind {
            Kind::Plain => {
                let trip = jacobian(self.d, &st.s, |i| {
                    if self.p == 1.0 {
                        0.0
                    } else {
                        -(self.p - 1.0) * ft[i] * num::powf(st.s[i], self.p - 2.0)
                    }
                });
                let lu = Factor::from_triplets(len, &trip)?;
                let mut x = rhs;
                lu.solve(&mut x);
                Ok((x, Vec::new()))
            }
            Kind::Kernel => {
                let trip = jacobian(self.d, &st.s, |_| 0.0);
                let sigma = diag_scale(&trip);
                let w = self.d.weights();
                let b: Vec<Vec<f64>> = self
                    .kernels
                    .iter()
                    .map(|k| (0..len).map(|i| if self.d.is_boundary(i) { 0.0 } else { k[i] }).collect())
                    .collect();
                let c: Vec<Vec<f64>> = self.kernels.iter().map(|k| mul(k, w)).collect();
                let reg: Vec<usize> = self.kernels.iter().map(|k| argmax_abs(k)).collect();
                let sys = Bordered::new(len, trip, b, c, vec![0.0; n * n], reg, sigma)?;
                Ok(sys.solve(&rhs, &grhs))
            }
            Kind::Eigen => {
                let eta = st.extra[0];
                let trip = jacobian(self.d, &st.s, |i| {
                    -eta * ft[i] * n as f64 * num::powi(st.s[i], n as i32 - 1)
                });
                let sigma = diag_scale(&trip);
                let b = vec![(0..len)
                    .map(|i| if self.d.is_boundary(i) { 0.0 } else { -ft[i] * num::powi(st.s[i], n as i32) })
                    .collect::<Vec<_>>()];
                let c = vec![self.d.weights().to_vec()];
                let reg = vec![argmax_abs(&st.s)];
                let sys = Bordered::new(len, trip, b, c, vec![0.0], reg, sigma)?;
                Ok(sys.solve(&rhs, &grhs))
            }
        }
    }

    fn full_sup(r: &[f64], g: &[f64]) -> f64 {
        num::max(Self::sup(r), Self::sup(g))
    }

    fn newton(&self, start: &State, t: f64) -> core::result::Result<(State, HomotopyStep), (Failure, HomotopyStep)> {
        let mut st = start.clone();
        let mut hist = HomotopyStep { t, accepted: false, residuals: Vec::new(), min_eigenvalue: f64::NAN };
        let (mut r, mut g) = self.residual(&st, t);
        let mut rn = Self::full_sup(&r, &g);
        for _ in 0..=self.max_iter {
            hist.residuals.push(rn);
            if rn < self.tol {
                hist.accepted = true;
                hist.min_eigenvalue = self.admissible(&st.s).unwrap_or(f64::NAN);
                return Ok((st, hist));
            }
            if hist.residuals.len() > self.max_iter {
                break;
            }
            let (mut dx, dy) = match self.step(&st, t, &r, &g) {
                Ok(v) => v,
                Err(_) => return Err((Failure::Stalled(rn), hist)),
            };
            if self.even {
                if let Ok(v) = body::even_symmetrize(self.d, &dx) {
                    dx = v;
                }
            }
            let mut alpha = 1.0;
            let mut accepted = None;
            let mut saw_admissible = false;
            while alpha >= 1.0 / 1024.0 {
                let cand = State {
                    s: st.s.iter().zip(&dx).map(|(s, d)| s + alpha * d).collect(),
                    extra: st.extra.iter().zip(&dy).map(|(s, d)| s + alpha * d).collect(),
                };
                if self.admissible(&cand.s).is_some() {
                    saw_admissible = true;
                    let (r2, g2) = self.residual(&cand, t);
                    let rn2 = Self::full_sup(&r2, &g2);
                    if rn2 <= (1.0 - 1e-4 * alpha) * rn {
                        accepted = Some((cand, r2, g2, rn2));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((c, r2, g2, rn2)) => {
                    st = c;
                    r = r2;
                    g = g2;
                    rn = rn2;
                }
                None => {
                    let why = if saw_admissible { Failure::Stalled(rn) } else { Failure::Admissibility };
                    return Err((why, hist));
                }
            }
        }
        Err((Failure::Stalled(rn), hist))
    }
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if num::abs(*x) > num::abs(v[best]) {
            best = i;
        }
    }
    best
}

fn diag_scale(trip: &[(usize, usize, f64)]) -> f64 {
    let s = trip.iter().filter(|(i, j, _)| i == j).fold(0.0, |m, (_, _, v)| num::max(m, num::abs(*v)));
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// `½ε·max_i Σ_j |J_ij|·‖ℓ‖_∞`: the residual rounding level.
fn rounding_floor(domain: &Domain, ell: &[f64]) -> f64 {
    let mut rows = vec![0.0; domain.len()];
    for (i, _, v) in jacobian(domain, ell, |_| 0.0) {
        rows[i] += num::abs(v);
    }
    let m = rows.iter().fold(0.0, |a, v| num::max(a, *v));
    0.5 * f64::EPSILON * m * Problem::sup(ell)
}

fn validate(spec: &SolveSpec<'_>) -> Result<()> {
    let d = spec.domain;
    let n = d.n() as f64;
    if !(spec.p >= 1.0) || !spec.p.is_finite() {
        return Err(Error::InvalidSpec("p must be a finite number >= 1".into()));
    }
    if spec.f.len() != d.len() {
        return Err(Error::InvalidSpec("data length does not match the grid".into()));
    }
    let fmin = spec.f.iter().fold(f64::INFINITY, |m, v| num::min(m, *v));
    if !(fmin > 0.0) {
        return Err(Error::NotPositive { min_value: fmin });
    }
    if let Some(init) = &spec.initial {
        if init.len() != d.len() {
            return Err(Error::InvalidSpec("initial guess length does not match the grid".into()));
        }
    }
    let report = d.cap().condition_check()?;
    if !report.holds {
        return Err(Error::ConditionFailed { margin: report.margin.unwrap_or(0.0) });
    }
    let middle = spec.p > 1.0 && spec.p < n + 1.0;
    if middle && !spec.even {
        return Err(Error::InvalidSpec("1 < p < n+1 is only solved in the even class".into()));
    }
    if spec.even {
        if d.mirror().is_none() || !d.cap().norm().symmetry().horizontal {
            return Err(Error::NotSymmetricNorm);
        }
        if middle && d.cap().omega0() > 0.0 {
            return Err(Error::InvalidSpec("the even class needs omega0 <= 0".into()));
        }
        let defect = body::odd_defect(d, &spec.f)?;
        let scale = spec.f.iter().fold(0.0, |m, v| num::max(m, num::abs(*v)));
        if defect > 1e-12 * scale {
            return Err(Error::NotEven { defect });
        }
    }
    if spec.formulation == Formulation::Translated && spec.tilde.is_none() {
        return Err(Error::InvalidSpec("translated formulation needs the translated domain".into()));
    }
    Ok(())
}

/// Continuation from `t = 0` (or Newton at `t = 1` from `spec.initial`).
pub fn solve_homotopy<'d>(spec: &SolveSpec<'d>) -> Result<SolveResult<'d>> {
    validate(spec)?;
    let d = spec.domain;
    let n = d.n();
    let p = spec.p;
    let kind = if p == 1.0 {
        Kind::Kernel
    } else if p == (n + 1) as f64 {
        Kind::Eigen
    } else {
        Kind::Plain
    };
    let mut diag = Diagnostics::default();
    let ell = d.ell();
    let mut f = spec.f.clone();
    if kind == Kind::Kernel {
        diag.compat_defect = compat_defect(d, &f);
        let pr = compat_project(d, &f)?;
        f = pr.f;
        diag.compat_removed = pr.defect;
    }
    let (work, f_work, start): (&Domain, Vec<f64>, Option<Vec<f64>>) = match spec.formulation {
        Formulation::Original => (d, f.clone(), spec.initial.clone()),
        Formulation::Translated => {
            let td = spec.tilde.expect("validated");
            if td.len() != d.len() {
                return Err(Error::InvalidSpec("translated domain does not match the grid".into()));
            }
            let ft: Vec<f64> = f.iter().zip(&ell).map(|(fi, l)| fi * pow_p1(*l, p)).collect();
            let init = spec
                .initial
                .as_ref()
                .map(|v| v.iter().zip(&ell).map(|(s, l)| s / l).collect());
            (td, ft, init)
        }
    };
    let work_ell = work.ell();
    let prob = Problem {
        d: work,
        p,
        f: f_work.clone(),
        ell: work_ell.clone(),
        kind,
        even: spec.even,
        kernels: (0..n).map(|a| work.kernel(a)).collect(),
        mass: work.integrate(&work_ell),
        tol: num::max(spec.tol, rounding_floor(work, &work_ell)),
        max_iter: spec.max_iter,
        floor: spec.tau_floor,
    };
    let prepare = |s: Vec<f64>, t: f64| -> Result<State> {
        let mut s = s;
        if spec.even {
            s = body::even_symmetrize(work, &s)?;
        }
        let extra = match kind {
            Kind::Kernel => {
                let (b, _) = body::kernel_project(&CapBody::new(work, s));
                s = b.into_values();
                vec![0.0; n]
            }
            Kind::Eigen => {
                let ft = prob.ft(t);
                let det: Vec<f64> = (0..s.len()).map(|i| det_tau(work, &s, i)).collect();
                let den: Vec<f64> = (0..s.len()).map(|i| ft[i] * num::powi(s[i], n as i32)).collect();
                vec![work.integrate(&det) / work.integrate(&den)]
            }
            Kind::Plain => Vec::new(),
        };
        Ok(State { s, extra })
    };
    diag.tolerance = prob.tol;
    let mut trace = Vec::new();
    let state = match start {
        Some(init) => {
            let st = prepare(init, 1.0)?;
            if prob.admissible(&st.s).is_none() {
                let b = CapBody::new(work, st.s.clone());
                b.require_positive()?;
                b.require_admissible()?;
                return Err(Error::AdmissibilityLost { t: 1.0 });
            }
            match prob.newton(&st, 1.0) {
                Ok((s, h)) => {
                    diag.min_eigenvalue_history.push(h.min_eigenvalue);
                    trace.push(h);
                    s
                }
                Err((why, h)) => {
                    trace.push(h);
                    return Err(failure_error(why, 1.0));
                }
            }
        }
        None => continuation(&prob, prepare(work_ell.clone(), 0.0)?, spec.homotopy, &mut trace, &mut diag)?,
    };
    let (final_r, final_g) = prob.residual(&state, 1.0);
    diag.final_residual = Problem::full_sup(&final_r, &final_g);
    let eta = if kind == Kind::Eigen { Some(state.extra[0]) } else { None };
    if kind == Kind::Kernel {
        diag.multipliers = state.extra.clone();
    }
    let (values, tilde_values) = match spec.formulation {
        Formulation::Original => (state.s, None),
        Formulation::Translated => (state.s.iter().zip(&ell).map(|(s, l)| s * l).collect(), Some(state.s)),
    };
    let mut result_body = CapBody::new(d, values);
    if kind == Kind::Kernel {
        let (b, c) = body::kernel_project(&result_body);
        result_body = b;
        diag.kernel_removed = c;
        diag.gauge_defect = compat_defect(d, result_body.values()).iter().fold(0.0, |m, v| num::max(m, num::abs(*v)));
    }
    diag.robin_residual = result_body.admissibility().robin_residual;
    diag.c0 = c0_diagnostics(d, p, &spec.f, result_body.values());
    Ok(SolveResult { body: result_body, eta, trace, diagnostics: diag, tilde_values })
}

fn failure_error(why: Failure, t: f64) -> Error {
    match why {
        Failure::Admissibility => Error::AdmissibilityLost { t },
        Failure::Stalled(residual) => Error::NoConvergence { t, residual },
    }
}

fn continuation(
    prob: &Problem<'_>,
    start: State,
    params: HomotopyParams,
    trace: &mut Vec<HomotopyStep>,
    diag: &mut Diagnostics,
) -> Result<State> {
    let mut state = match prob.newton(&start, 0.0) {
        Ok((s, h)) => {
            diag.min_eigenvalue_history.push(h.min_eigenvalue);
            trace.push(h);
            s
        }
        Err((why, h)) => {
            trace.push(h);
            return Err(failure_error(why, 0.0));
        }
    };
    let mut t = 0.0;
    let mut dt = params.initial_step;
    while t < 1.0 {
        let target = num::min(1.0, t + dt);
        match prob.newton(&state, target) {
            Ok((s, h)) => {
                diag.min_eigenvalue_history.push(h.min_eigenvalue);
                trace.push(h);
                state = s;
                t = target;
                dt = num::min(params.initial_step, 2.0 * dt);
            }
            Err((why, h)) => {
                trace.push(h);
                dt *= 0.5;
                if dt < params.min_step {
                    return Err(failure_error(why, target));
                }
            }
        }
    }
    Ok(state)
}

/// The `p = n+1` eigenvalue problem; `η` is returned in the result.
pub fn solve_eigen<'d>(spec: &SolveSpec<'d>) -> Result<SolveResult<'d>> {
    let n = spec.domain.n();
    if spec.p != (n + 1) as f64 {
        return Err(Error::InvalidSpec("the eigenvalue problem needs p = n+1".into()));
    }
    solve_homotopy(spec)
}

/// Dispatches on `p`.
pub fn solve<'d>(spec: &SolveSpec<'d>) -> Result<SolveResult<'d>> {
    solve_homotopy(spec)
}

/// Sup-norm of `det τ − f·ŝ^{p−1}` over interior nodes.
pub fn equation_defect(domain: &Domain, p: f64, f: &[f64], values: &[f64]) -> f64 {
    residual(domain, p, f, values, 1.0)
        .iter()
        .enumerate()
        .filter(|(i, _)| !domain.is_boundary(*i))
        .fold(0.0, |m, (_, v)| num::max(m, num::abs(*v)))
}
