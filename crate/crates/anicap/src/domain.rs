//! Discretization of the cap: chart, grid, intrinsic metric, quadrature and
//! covariant differential operators.
//!
//! Nodes are parametrized by their outer unit normal `x ∈ 𝒜 ⊂ 𝕊ⁿ`; the cap
//! point is `ξ = DF(x) + ω₀E^F_{n+1}` and `ẑ = 𝒯⁻¹ξ = DF(x)`.
//!
//! For `n = 1` the chart is an angle `θ = θ_c + θ_h·u`, `u ∈ [−1, 1]`.
//! For `n = 2` it is polar about `E_{n+1}`: the meridian angle is the blended
//! radius `r = ρA(φ) + ρ²B(φ)` with `A`, `B` the even and odd parts of the
//! boundary radius `R(φ)`, so that `(−ρ, φ) ≡ (ρ, φ + π)` and the chart is
//! smooth through the pole. No node sits on the pole.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::norm::{bilinear, matvec, NormJet};
use crate::num;
use crate::spectral;
use crate::wulff::{BoundaryFrame, CapillaryCap};

/// Slot indices of the derivative weights stored per stencil point.
pub const D1: usize = 0;
pub const D2: usize = 1;
pub const D11: usize = 2;
pub const D12: usize = 3;
pub const D22: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Second-order differences corrected to differentiate `1` and the
    /// kernel functions `x_a/F` exactly.
    FiniteDifference,
    /// Uncorrected second-order differences.
    PlainFiniteDifference,
    /// Chebyshev (radial) and Fourier (angular) collocation.
    Spectral,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::FiniteDifference => "fd",
            Scheme::PlainFiniteDifference => "plain-fd",
            Scheme::Spectral => "spectral",
        }
    }
}

/// Grid size. For `n = 1`, `primary` is the number of intervals. For
/// `n = 2`, `primary` counts rings and `secondary` angles (even).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub primary: usize,
    pub secondary: usize,
}

impl Resolution {
    pub fn curve(intervals: usize) -> Resolution {
        Resolution { primary: intervals, secondary: 1 }
    }

    pub fn polar(rings: usize, angles: usize) -> Resolution {
        Resolution { primary: rings, secondary: angles }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Curve { nodes: usize },
    /// Node index `i·angles + j` for ring `i` and angle `j`.
    Polar { rings: usize, angles: usize },
}

/// Normal `x` and its chart derivatives at a node.
#[derive(Clone, Copy, Debug)]
pub struct ChartJet {
    pub x: [f64; 3],
    pub d1: [[f64; 3]; 2],
    pub d2: [[[f64; 3]; 2]; 2],
}

#[derive(Clone, Debug)]
pub struct GridNode {
    pub coords: [f64; 2],
    pub normal: [f64; 3],
    pub point: [f64; 3],
    pub boundary: bool,
    pub jet: ChartJet,
}

#[derive(Clone, Debug)]
pub struct CapGrid {
    pub n: usize,
    pub scheme: Scheme,
    pub resolution: Resolution,
    pub layout: Layout,
    pub nodes: Vec<GridNode>,
    /// `u` values (`n = 1`) or ring radii `ρ_i` (`n = 2`).
    pub radial: Vec<f64>,
    /// Angles `φ_j` (`n = 2`).
    pub angles: Vec<f64>,
}

impl CapGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.boundary).map(|(i, _)| i)
    }

    /// Chart spacing: `Δu` (n=1) or `Δρ` (n=2); for spectral grids the
    /// largest gap.
    pub fn spacing(&self) -> f64 {
        self.radial.windows(2).map(|w| num::abs(w[1] - w[0])).fold(0.0, num::max)
    }
}

/// Intrinsic geometry at one node.
#[derive(Clone, Debug)]
pub struct NodeMetric {
    /// `F(x)`.
    pub f: f64,
    pub ell: f64,
    /// `x/F(x)`; the first `n` entries are the kernel functions.
    pub kernel: [f64; 3],
    /// `ẑ = DF(x)`.
    pub zhat: [f64; 3],
    /// `∂_iẑ`.
    pub z: [[f64; 3]; 2],
    /// `∂_i∂_jẑ` from the analytic chart.
    pub zz: [[[f64; 3]; 2]; 2],
    pub g: [[f64; 2]; 2],
    pub ginv: [[f64; 2]; 2],
    /// Lower Cholesky factor of `g`.
    pub chol: [[f64; 2]; 2],
    /// Levi-Civita symbols, `gamma[k][i][j] = Γ^k_{ij}`.
    pub gamma: [[[f64; 2]; 2]; 2],
    /// `Γ^k_{ij} + ½Q_{ij}^k`: the first-order coefficients of `τ`.
    pub gamma_tau: [[[f64; 2]; 2]; 2],
    pub q: [[[f64; 2]; 2]; 2],
    /// Coefficients `c_j` of `⟨∇̊s, E_{n+1}⟩ = Σ c_j ∂_js`.
    pub robin: [f64; 2],
    /// `dμ_F` per unit chart volume.
    pub density: f64,
    pub frame: Option<BoundaryFrame>,
}

impl NodeMetric {
    /// `det g̊`.
    pub fn det_g(&self, n: usize) -> f64 {
        if n == 1 {
            self.g[0][0]
        } else {
            self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
        }
    }

    /// `A_{ijk} = −½Q_{ijk}`.
    pub fn a_tensor(&self) -> [[[f64; 2]; 2]; 2] {
        let mut a = self.q;
        for b in a.iter_mut() {
            for c in b.iter_mut() {
                for e in c.iter_mut() {
                    *e *= -0.5;
                }
            }
        }
        a
    }

    /// `L⁻¹ M L⁻ᵀ`: chart components of a 2-tensor in the g̊-orthonormal frame.
    pub fn to_frame(&self, m: &[[f64; 2]; 2], n: usize) -> [[f64; 2]; 2] {
        if n == 1 {
            return [[m[0][0] / self.g[0][0], 0.0], [0.0, 0.0]];
        }
        let l = &self.chol;
        let a = 1.0 / l[0][0];
        let c = 1.0 / l[1][1];
        let b = -l[1][0] * a * c;
        // L⁻¹ = [[a,0],[b,c]]
        let li = [[a, 0.0], [b, c]];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    for l2 in 0..2 {
                        s += li[i][k] * m[k][l2] * li[j][l2];
                    }
                }
                out[i][j] = s;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct MetricData {
    pub nodes: Vec<NodeMetric>,
    /// Quadrature weights for `dμ_F`.
    pub weights: Vec<f64>,
}

impl MetricData {
    /// Test hook: adds `eps` to every component of `Q`, leaving the
    /// Christoffel symbols untouched.
    pub fn corrupt_q(&mut self, eps: f64) {
        for m in &mut self.nodes {
            for a in m.q.iter_mut() {
                for b in a.iter_mut() {
                    for c in b.iter_mut() {
                        *c += eps;
                    }
                }
            }
        }
    }
}

/// Stencil of one node: neighbour indices with per-slot weights.
#[derive(Clone, Debug, Default)]
pub struct Stencil {
    pub idx: Vec<usize>,
    pub w: Vec<[f64; 5]>,
    /// Position of the node itself within `idx`.
    pub center: usize,
}

impl Stencil {
    /// Every slot is a derivative, so the weights annihilate constants and
    /// differences against the centre value give the same sum with far less
    /// cancellation next to the pole.
    fn apply(&self, field: &[f64]) -> [f64; 5] {
        let mut out = [0.0; 5];
        let c = field[self.idx[self.center]];
        for (k, &p) in self.idx.iter().enumerate() {
            let v = field[p] - c;
            for s in 0..5 {
                out[s] += self.w[k][s] * v;
            }
        }
        out
    }
}

/// The three forms of the Robin condition at a boundary node.
#[derive(Clone, Copy, Debug)]
pub struct RobinResidual {
    pub node: usize,
    /// `⟨∇̊s, E_{n+1}⟩ − ω₀s`.
    pub ambient: f64,
    /// `∇̊_{μ_F}s − ω₀s/(F(ν)⟨μ, E_{n+1}⟩)`.
    pub conormal_f: f64,
    /// `⟨∇̊s, μ⟩ − ω₀s/⟨μ, E_{n+1}⟩`.
    pub conormal: f64,
    /// Largest mutual deviation after rescaling all three to the ambient form.
    pub deviation: f64,
}

/// Builds the chart grid of the cap.
pub fn build_grid(cap: &CapillaryCap, scheme: Scheme, res: Resolution) -> Result<CapGrid> {
    match cap.n() {
        1 => build_curve(cap, scheme, res),
        _ => build_polar(cap, scheme, res),
    }
}

fn build_curve(cap: &CapillaryCap, scheme: Scheme, res: Resolution) -> Result<CapGrid> {
    let m = res.primary;
    if m < 4 {
        return Err(Error::InvalidResolution(format!("need at least 4 intervals, got {m}")));
    }
    let tp = cap.meridian_root(0.0)?.r;
    let tm = -cap.meridian_root(num::PI)?.r;
    let (tc, th) = (0.5 * (tp + tm), 0.5 * (tp - tm));
    let radial: Vec<f64> = match scheme {
        Scheme::Spectral => spectral::cheb_points(m).into_iter().rev().collect(),
        _ => (0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect(),
    };
    let mut nodes = Vec::with_capacity(m + 1);
    for (i, &u) in radial.iter().enumerate() {
        let t = tc + th * u;
        let (s, c) = (num::sin(t), num::cos(t));
        let x = [s, c, 0.0];
        let x_u = [th * c, -th * s, 0.0];
        let x_uu = num::scale3(-th * th, &x);
        let jet = ChartJet { x, d1: [x_u, [0.0; 3]], d2: [[x_uu, [0.0; 3]], [[0.0; 3]; 2]] };
        let point = cap.point(&x);
        nodes.push(GridNode { coords: [u, 0.0], normal: x, point, boundary: i == 0 || i == m, jet });
    }
    Ok(CapGrid {
        n: 1,
        scheme,
        resolution: res,
        layout: Layout::Curve { nodes: m + 1 },
        nodes,
        radial,
        angles: Vec::new(),
    })
}

fn build_polar(cap: &CapillaryCap, scheme: Scheme, res: Resolution) -> Result<CapGrid> {
    let (nr, na) = (res.primary, res.secondary);
    if nr < 4 || na < 6 || na % 2 != 0 {
        return Err(Error::InvalidResolution(format!(
            "need at least 4 rings and an even number (at least 6) of angles, got {nr}x{na}"
        )));
    }
    let half = na / 2;
    let angles: Vec<f64> = (0..na).map(|j| 2.0 * num::PI * j as f64 / na as f64).collect();
    let roots = angles.iter().map(|&p| cap.meridian_root(p)).collect::<Result<Vec<_>>>()?;
    let radial: Vec<f64> = match scheme {
        Scheme::Spectral => {
            let t = spectral::cheb_points(2 * nr - 1);
            (0..nr).map(|i| t[nr - 1 - i]).collect()
        }
        _ => {
            let h = 1.0 / (nr as f64 - 0.5);
            let mut r: Vec<f64> = (0..nr).map(|i| (i as f64 + 0.5) * h).collect();
            r[nr - 1] = 1.0;
            r
        }
    };
    let mut nodes = Vec::with_capacity(nr * na);
    for (i, &rho) in radial.iter().enumerate() {
        for (j, &phi) in angles.iter().enumerate() {
            let (p, q) = (roots[j], roots[(j + half) % na]);
            let a = [0.5 * (p.r + q.r), 0.5 * (p.dr + q.dr), 0.5 * (p.d2r + q.d2r)];
            let b = [0.5 * (p.r - q.r), 0.5 * (p.dr - q.dr), 0.5 * (p.d2r - q.d2r)];
            let r = rho * a[0] + rho * rho * b[0];
            let r_p = a[0] + 2.0 * rho * b[0];
            let r_f = rho * a[1] + rho * rho * b[1];
            let r_pp = 2.0 * b[0];
            let r_pf = a[1] + 2.0 * rho * b[1];
            let r_ff = rho * a[2] + rho * rho * b[2];
            let m = cap.meridian(r, phi);
            let x_p = num::scale3(r_p, &m.x_r);
            let x_f = num::axpy(r_f, &m.x_r, &m.x_phi);
            let x_pp = num::axpy(r_pp, &m.x_r, &num::scale3(r_p * r_p, &m.x_rr));
            let x_pf = num::add3(
                &num::add3(&num::scale3(r_p * r_f, &m.x_rr), &num::scale3(r_p, &m.x_rphi)),
                &num::scale3(r_pf, &m.x_r),
            );
            let x_ff = num::add3(
                &num::add3(&num::scale3(r_f * r_f, &m.x_rr), &num::scale3(2.0 * r_f, &m.x_rphi)),
                &num::add3(&m.x_phiphi, &num::scale3(r_ff, &m.x_r)),
            );
            let jet = ChartJet { x: m.x, d1: [x_p, x_f], d2: [[x_pp, x_pf], [x_pf, x_ff]] };
            let mut point = cap.point(&m.x);
            let boundary = i == nr - 1;
            if boundary {
                point[2] = 0.0;
            }
            nodes.push(GridNode { coords: [rho, phi], normal: m.x, point, boundary, jet });
        }
    }
    Ok(CapGrid {
        n: 2,
        scheme,
        resolution: res,
        layout: Layout::Polar { rings: nr, angles: na },
        nodes,
        radial,
        angles,
    })
}

fn d3_vec(t: &[[[f64; 3]; 3]; 3], a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += t[i][j][k] * a[i] * b[j];
            }
        }
        *o = s;
    }
    out
}

/// Assembles `g̊`, Christoffel symbols, `Q` and quadrature weights.
pub fn assemble_metric(cap: &CapillaryCap, grid: &CapGrid) -> Result<MetricData> {
    let n = grid.n;
    let d = n + 1;
    let norm = cap.norm();
    let base = base_weights(grid);
    let mut nodes = Vec::with_capacity(grid.len());
    let mut weights = Vec::with_capacity(grid.len());
    for (idx, node) in grid.nodes.iter().enumerate() {
        let cj = &node.jet;
        let nj = norm.jet(&cj.x);
        let dj = norm.dual_jet_at_normal(&cj.x);
        let mut z = [[0.0; 3]; 2];
        let mut zz = [[[0.0; 3]; 2]; 2];
        for i in 0..n {
            z[i] = matvec(&nj.d2f, &cj.d1[i]);
            for j in 0..n {
                zz[i][j] = num::add3(&d3_vec(&nj.d3f, &cj.d1[i], &cj.d1[j]), &matvec(&nj.d2f, &cj.d2[i][j]));
            }
        }
        let mut g = [[0.0; 2]; 2];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = dj.g_form(&z[i], &z[j]);
            }
        }
        let det = if n == 1 { g[0][0] } else { g[0][0] * g[1][1] - g[0][1] * g[1][0] };
        if !(det > 0.0) || !(g[0][0] > 0.0) {
            return Err(Error::SingularMetric { node: idx });
        }
        let ginv = if n == 1 {
            [[1.0 / g[0][0], 0.0], [0.0, 0.0]]
        } else {
            [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
        };
        let chol = if n == 1 {
            [[num::sqrt(g[0][0]), 0.0], [0.0, 0.0]]
        } else {
            let l00 = num::sqrt(g[0][0]);
            let l10 = g[1][0] / l00;
            [[l00, 0.0], [l10, num::sqrt(g[1][1] - l10 * l10)]]
        };
        let mut q = [[[0.0; 2]; 2]; 2];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    q[i][j][k] = dj.q_form(&z[i], &z[j], &z[k]);
                }
            }
        }
        let mut gamma = [[[0.0; 2]; 2]; 2];
        let mut gamma_tau = [[[0.0; 2]; 2]; 2];
        for i in 0..n {
            for j in 0..n {
                let mut low = [0.0; 2];
                for (m, l) in low.iter_mut().enumerate().take(n) {
                    *l = dj.g_form(&zz[i][j], &z[m]);
                }
                for k in 0..n {
                    let mut a = 0.0;
                    let mut b = 0.0;
                    for m in 0..n {
                        a += ginv[k][m] * (low[m] + 0.5 * q[i][j][m]);
                        b += ginv[k][m] * (low[m] + q[i][j][m]);
                    }
                    gamma[k][i][j] = a;
                    gamma_tau[k][i][j] = b;
                }
            }
        }
        let mut robin = [0.0; 2];
        for (j, r) in robin.iter_mut().enumerate().take(n) {
            *r = (0..n).map(|i| ginv[i][j] * z[i][d - 1]).sum();
        }
        let area = if n == 1 { num::norm(&z[0]) } else { num::norm(&num::cross(&z[0], &z[1])) };
        let density = nj.f * area;
        let frame = if node.boundary { Some(cap.boundary_frame_at_normal(&cj.x)) } else { None };
        nodes.push(NodeMetric {
            f: nj.f,
            ell: cap.ell_at_normal(&cj.x),
            kernel: num::scale3(1.0 / nj.f, &cj.x),
            zhat: nj.df,
            z,
            zz,
            g,
            ginv,
            chol,
            gamma,
            gamma_tau,
            q,
            robin,
            density,
            frame,
        });
        weights.push(base[idx] * density);
    }
    kernel_exact_weights(&nodes, &mut weights, n)?;
    Ok(MetricData { nodes, weights })
}

/// Rescales the weights by `1 + Σc_βk_β` so that `∫k_α dμ_F = 0` holds
/// exactly, as it does for the continuous measure. Without this the
/// compatibility projection of `f ≡ 1` moves the datum by the quadrature
/// error and the trivial solution `ℓ` is lost on asymmetric caps.
fn kernel_exact_weights(nodes: &[NodeMetric], weights: &mut [f64], n: usize) -> Result<()> {
    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    for (m, w) in nodes.iter().zip(weights.iter()) {
        for a in 0..n {
            rhs[a] -= w * m.kernel[a];
            for b in 0..n {
                gram[a * n + b] += w * m.kernel[a] * m.kernel[b];
            }
        }
    }
    let lu = linalg::DenseLu::factor(n, gram).map_err(|_| Error::ChartFailure("degenerate kernel quadrature".into()))?;
    lu.solve(&mut rhs);
    for (m, w) in nodes.iter().zip(weights.iter_mut()) {
        let mut s = 1.0;
        for a in 0..n {
            s += rhs[a] * m.kernel[a];
        }
        *w *= s;
    }
    Ok(())
}

/// Chart quadrature weights before multiplication by the density.
fn base_weights(grid: &CapGrid) -> Vec<f64> {
    match grid.layout {
        Layout::Curve { nodes } => match grid.scheme {
            Scheme::Spectral => spectral::clenshaw_curtis(nodes - 1),
            _ => {
                let h = 2.0 / (nodes - 1) as f64;
                (0..nodes).map(|i| if i == 0 || i == nodes - 1 { 0.5 * h } else { h }).collect()
            }
        },
        Layout::Polar { rings, angles } => {
            let hf = 2.0 * num::PI / angles as f64;
            let radial: Vec<f64> = match grid.scheme {
                Scheme::Spectral => spectral::radial_weights(&grid.radial),
                _ => {
                    let h = 1.0 / (rings as f64 - 0.5);
                    (0..rings)
                        .map(|i| if i == 0 { 0.75 * h } else if i == rings - 1 { 0.5 * h } else { h })
                        .collect()
                }
            };
            let mut w = Vec::with_capacity(rings * angles);
            for r in radial {
                for _ in 0..angles {
                    w.push(r * hf);
                }
            }
            w
        }
    }
}

/// Exact chart derivatives `[∂1, ∂2, ∂11, ∂12, ∂22]` of `x_a/F(x)`.
fn kernel_derivatives(cj: &ChartJet, nj: &NormJet, a: usize, n: usize) -> [f64; 5] {
    let f = nj.f;
    let mut fi = [0.0; 2];
    let mut fij = [[0.0; 2]; 2];
    for i in 0..n {
        fi[i] = num::dot(&nj.df, &cj.d1[i]);
        for j in 0..n {
            fij[i][j] = bilinear(&nj.d2f, &cj.d1[i], &cj.d1[j]) + num::dot(&nj.df, &cj.d2[i][j]);
        }
    }
    let w = 1.0 / f;
    let wi = [-fi[0] / (f * f), -fi[1] / (f * f)];
    let mut wij = [[0.0; 2]; 2];
    for i in 0..n {
        for j in 0..n {
            wij[i][j] = -fij[i][j] / (f * f) + 2.0 * fi[i] * fi[j] / (f * f * f);
        }
    }
    let x = cj.x[a];
    let xi = |i: usize| cj.d1[i][a];
    let xij = |i: usize, j: usize| cj.d2[i][j][a];
    let first = |i: usize| xi(i) * w + x * wi[i];
    let second =
        |i: usize, j: usize| xij(i, j) * w + xi(i) * wi[j] + xi(j) * wi[i] + x * wij[i][j];
    if n == 1 {
        [first(0), 0.0, second(0, 0), 0.0, 0.0]
    } else {
        [first(0), first(1), second(0, 0), second(0, 1), second(1, 1)]
    }
}

/// A discretized cap: grid, metric and differential operators.
#[derive(Clone, Debug)]
pub struct Domain {
    cap: CapillaryCap,
    grid: CapGrid,
    metric: MetricData,
    stencils: Vec<Stencil>,
    mirror: Option<Vec<usize>>,
}

impl Domain {
    pub fn new(cap: &CapillaryCap, scheme: Scheme, res: Resolution) -> Result<Domain> {
        let grid = build_grid(cap, scheme, res)?;
        let metric = assemble_metric(cap, &grid)?;
        let mut stencils = match (grid.layout, scheme) {
            (Layout::Curve { nodes }, Scheme::Spectral) => curve_spectral(nodes),
            (Layout::Curve { nodes }, _) => curve_fd(nodes),
            (Layout::Polar { rings, angles }, Scheme::Spectral) => polar_spectral(rings, angles),
            (Layout::Polar { rings, angles }, _) => polar_fd(rings, angles, &grid.radial),
        };
        if scheme == Scheme::FiniteDifference {
            correct_stencils(cap, &grid, &mut stencils)?;
        }
        let mirror = find_mirror(cap, &grid);
        Ok(Domain { cap: cap.clone(), grid, metric, stencils, mirror })
    }

    /// The same grid over the translated cap (`F̃`, `ω₀ = 0`).
    pub fn tilde(&self) -> Result<Domain> {
        Domain::new(&self.cap.tilde()?, self.grid.scheme, self.grid.resolution)
    }

    pub fn cap(&self) -> &CapillaryCap {
        &self.cap
    }

    pub fn grid(&self) -> &CapGrid {
        &self.grid
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn metric_mut(&mut self) -> &mut MetricData {
        &mut self.metric
    }

    pub fn node(&self, i: usize) -> &NodeMetric {
        &self.metric.nodes[i]
    }

    pub fn stencil(&self, i: usize) -> &Stencil {
        &self.stencils[i]
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn scheme(&self) -> Scheme {
        self.grid.scheme
    }

    pub fn weights(&self) -> &[f64] {
        &self.metric.weights
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.grid.nodes[i].boundary
    }

    /// Node permutation realizing `ξ ↦ ξ̄` when the grid is reflection
    /// symmetric.
    pub fn mirror(&self) -> Option<&[usize]> {
        self.mirror.as_deref()
    }

    /// Nodal values of a function of the node normal.
    pub fn field<Fn_: Fn(&[f64; 3]) -> f64>(&self, f: Fn_) -> Vec<f64> {
        self.grid.nodes.iter().map(|n| f(&n.normal)).collect()
    }

    pub fn ell(&self) -> Vec<f64> {
        self.metric.nodes.iter().map(|m| m.ell).collect()
    }

    /// Kernel function `G(ξ̂)(ξ̂, E_α) = x_α/F(x)` for `α < n`.
    pub fn kernel(&self, alpha: usize) -> Vec<f64> {
        self.metric.nodes.iter().map(|m| m.kernel[alpha]).collect()
    }

    pub fn integrate(&self, field: &[f64]) -> f64 {
        field.iter().zip(&self.metric.weights).map(|(f, w)| f * w).sum()
    }

    /// Chart derivatives `[∂1, ∂2, ∂11, ∂12, ∂22]` at node `i`.
    pub fn derivatives(&self, field: &[f64], i: usize) -> [f64; 5] {
        self.stencils[i].apply(field)
    }

    /// Chart components of `∇̊²s` (Levi-Civita).
    pub fn hessian_chart(&self, field: &[f64], i: usize) -> [[f64; 2]; 2] {
        let d = self.derivatives(field, i);
        self.second_form(&d, field[i], i, false)
    }

    fn second_form(&self, d: &[f64; 5], s: f64, i: usize, tau: bool) -> [[f64; 2]; 2] {
        let m = &self.metric.nodes[i];
        let n = self.n();
        let dd = [[d[D11], d[D12]], [d[D12], d[D22]]];
        let gam = if tau { &m.gamma_tau } else { &m.gamma };
        let mut out = [[0.0; 2]; 2];
        for a in 0..n {
            for b in 0..n {
                let mut v = dd[a][b];
                for k in 0..n {
                    v -= gam[k][a][b] * d[k];
                }
                if tau {
                    v += s * m.g[a][b];
                }
                out[a][b] = v;
            }
        }
        out
    }

    /// `∇̊²s` in the g̊-orthonormal frame at every node.
    pub fn covariant_hessian(&self, field: &[f64]) -> Vec<[[f64; 2]; 2]> {
        (0..self.len())
            .map(|i| self.metric.nodes[i].to_frame(&self.hessian_chart(field, i), self.n()))
            .collect()
    }

    /// Chart components of `τ[s] = ∇̊²s − ½Q(∇̊s) + s g̊`.
    pub fn tau_chart(&self, field: &[f64], i: usize) -> [[f64; 2]; 2] {
        let d = self.derivatives(field, i);
        self.second_form(&d, field[i], i, true)
    }

    /// `τ[s]` in the g̊-orthonormal frame.
    pub fn tau_hat(&self, field: &[f64], i: usize) -> [[f64; 2]; 2] {
        self.metric.nodes[i].to_frame(&self.tau_chart(field, i), self.n())
    }

    /// Coefficients of the chart components of `τ` with respect to the
    /// values at the stencil points of node `i`.
    pub fn tau_coefficients(&self, i: usize) -> Vec<[[f64; 2]; 2]> {
        let st = &self.stencils[i];
        let g = self.metric.nodes[i].g;
        st.w
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let mut c = self.second_form(w, 0.0, i, true);
                if k == st.center {
                    for a in 0..self.n() {
                        for b in 0..self.n() {
                            c[a][b] += g[a][b];
                        }
                    }
                }
                c
            })
            .collect()
    }

    /// Coefficients of `⟨∇̊s, E_{n+1}⟩ − ω₀s` over the stencil of node `i`.
    pub fn robin_coefficients(&self, i: usize) -> Vec<f64> {
        let st = &self.stencils[i];
        let c = self.metric.nodes[i].robin;
        let w0 = self.cap.omega0();
        st.w
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let mut v = c[0] * w[D1] + c[1] * w[D2];
                if k == st.center {
                    v -= w0;
                }
                v
            })
            .collect()
    }

    /// `⟨∇̊s, E_{n+1}⟩ − ω₀s` at node `i`.
    pub fn robin_at(&self, field: &[f64], i: usize) -> f64 {
        let d = self.derivatives(field, i);
        let c = self.metric.nodes[i].robin;
        c[0] * d[D1] + c[1] * d[D2] - self.cap.omega0() * field[i]
    }

    /// Ambient gradient `∇̊s = g̊^{ij}∂_js ∂_iẑ`.
    pub fn gradient(&self, field: &[f64], i: usize) -> [f64; 3] {
        let d = self.derivatives(field, i);
        let m = &self.metric.nodes[i];
        let mut out = [0.0; 3];
        for a in 0..self.n() {
            for b in 0..self.n() {
                out = num::axpy(m.ginv[a][b] * d[b], &m.z[a], &out);
            }
        }
        out
    }

    /// Robin residuals in all three forms at every boundary node.
    pub fn robin_residual(&self, field: &[f64]) -> Vec<RobinResidual> {
        let w0 = self.cap.omega0();
        let d = self.n() + 1;
        let norm = self.cap.norm();
        self.grid
            .boundary_nodes()
            .map(|i| {
                let m = &self.metric.nodes[i];
                let fr = m.frame.expect("boundary node carries a frame");
                let s = field[i];
                let grad = self.gradient(field, i);
                let ambient = self.robin_at(field, i);
                let mu_e = fr.mu[d - 1];
                let dj = norm.dual_jet_at_normal(&self.grid.nodes[i].normal);
                let conormal_f = dj.g_form(&grad, &fr.mu_f) - w0 * s / (m.f * mu_e);
                let conormal = num::dot(&grad, &fr.mu) - w0 * s / mu_e;
                let b = conormal_f * m.f * mu_e;
                let c = conormal * mu_e;
                let deviation =
                    num::max(num::abs(ambient - b), num::max(num::abs(ambient - c), num::abs(b - c)));
                RobinResidual { node: i, ambient, conormal_f, conormal, deviation }
            })
            .collect()
    }

    /// `X = ∇̊s + s·ẑ` at every node.
    pub fn reconstruct(&self, field: &[f64]) -> Vec<[f64; 3]> {
        (0..self.len())
            .map(|i| num::axpy(field[i], &self.metric.nodes[i].zhat, &self.gradient(field, i)))
            .collect()
    }

    /// Discrete residual of the Gauss formula at node `i`, using stencil
    /// second derivatives of `ẑ`.
    pub fn gauss_residual(&self, i: usize) -> f64 {
        let n = self.n();
        let comps: Vec<Vec<f64>> =
            (0..n + 1).map(|c| self.metric.nodes.iter().map(|m| m.zhat[c]).collect()).collect();
        let mut worst: f64 = 0.0;
        let m = &self.metric.nodes[i];
        let mut dd = [[[0.0; 3]; 2]; 2];
        for (c, comp) in comps.iter().enumerate() {
            let d = self.stencils[i].apply(comp);
            dd[0][0][c] = d[D11];
            dd[0][1][c] = d[D12];
            dd[1][0][c] = d[D12];
            dd[1][1][c] = d[D22];
        }
        for a in 0..n {
            for b in 0..n {
                let mut r = num::axpy(m.g[a][b], &m.zhat, &dd[a][b]);
                for k in 0..n {
                    let mut qk = 0.0;
                    for l in 0..n {
                        qk += m.ginv[k][l] * m.q[a][b][l];
                    }
                    r = num::axpy(-m.gamma[k][a][b] + 0.5 * qk, &m.z[k], &r);
                }
                worst = num::max(worst, num::norm(&r));
            }
        }
        worst
    }
}

fn curve_fd(nodes: usize) -> Vec<Stencil> {
    let m = nodes - 1;
    let h = 2.0 / m as f64;
    let mut out = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let mut st = Stencil::default();
        if i == 0 || i == m {
            let s = if i == 0 { 1.0 } else { -1.0 };
            let one = [-3.0, 4.0, -1.0, 0.0];
            let two = [2.0, -5.0, 4.0, -1.0];
            for k in 0..4 {
                st.idx.push(if i == 0 { k } else { m - k });
                st.w.push([s * one[k] / (2.0 * h), 0.0, two[k] / (h * h), 0.0, 0.0]);
            }
            st.center = 0;
        } else {
            for (k, o) in [-1isize, 0, 1].into_iter().enumerate() {
                st.idx.push((i as isize + o) as usize);
                let d2 = if o == 0 { -2.0 } else { 1.0 };
                st.w.push([o as f64 / (2.0 * h), 0.0, d2 / (h * h), 0.0, 0.0]);
                if o == 0 {
                    st.center = k;
                }
            }
        }
        out.push(st);
    }
    out
}

fn polar_index(rings: usize, angles: usize, i: isize, j: isize) -> usize {
    let half = (angles / 2) as isize;
    let (i, j) = if i < 0 { (-1 - i, j + half) } else { (i, j) };
    debug_assert!((i as usize) < rings);
    i as usize * angles + j.rem_euclid(angles as isize) as usize
}

fn polar_fd(rings: usize, angles: usize, radial: &[f64]) -> Vec<Stencil> {
    let hr = radial[1] - radial[0];
    let hf = 2.0 * num::PI / angles as f64;
    // fourth order in φ: on the rings next to the pole the 1/ρ² factor
    // would otherwise turn the O(Δφ²) error into O(h)
    let c1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
    let c2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
    let mut out = Vec::with_capacity(rings * angles);
    for i in 0..rings {
        for j in 0..angles {
            let mut st = Stencil::default();
            let (ii, jj) = (i as isize, j as isize);
            // radial offsets with first and second derivative weights
            let radial_w: Vec<(isize, f64, f64)> = if i + 1 < rings {
                vec![(-1, -0.5, 1.0), (0, 0.0, -2.0), (1, 0.5, 1.0)]
            } else {
                vec![(0, 1.5, 2.0), (-1, -2.0, -5.0), (-2, 0.5, 4.0), (-3, 0.0, -1.0)]
            };
            for &(a, r1, r2) in &radial_w {
                for b in -2isize..=2 {
                    let k = (b + 2) as usize;
                    let mut w = [0.0; 5];
                    if b == 0 {
                        w[D1] = r1 / hr;
                        w[D11] = r2 / (hr * hr);
                    }
                    if a == 0 {
                        w[D2] = c1[k] / hf;
                        w[D22] = c2[k] / (hf * hf);
                    }
                    w[D12] = r1 / hr * c1[k] / hf;
                    if a == 0 && b == 0 {
                        st.center = st.idx.len();
                    } else if w.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    st.idx.push(polar_index(rings, angles, ii + a, jj + b));
                    st.w.push(w);
                }
            }
            out.push(st);
        }
    }
    out
}

fn curve_spectral(nodes: usize) -> Vec<Stencil> {
    let m = nodes - 1;
    let d = spectral::cheb_diff(m);
    // ascending order: u_i = t_{m-i}
    let da: Vec<Vec<f64>> = (0..=m).map(|i| (0..=m).map(|j| d[m - i][m - j]).collect()).collect();
    let d2: Vec<Vec<f64>> = (0..=m)
        .map(|i| (0..=m).map(|j| (0..=m).map(|k| da[i][k] * da[k][j]).sum()).collect())
        .collect();
    (0..=m)
        .map(|i| Stencil {
            idx: (0..=m).collect(),
            w: (0..=m).map(|j| [da[i][j], 0.0, d2[i][j], 0.0, 0.0]).collect(),
            center: i,
        })
        .collect()
}

fn polar_spectral(rings: usize, angles: usize) -> Vec<Stencil> {
    let mc = 2 * rings - 1;
    let half = angles / 2;
    let d = spectral::cheb_diff(mc);
    let d2: Vec<Vec<f64>> = (0..=mc)
        .map(|i| (0..=mc).map(|j| (0..=mc).map(|k| d[i][k] * d[k][j]).sum()).collect())
        .collect();
    let f1 = spectral::fourier_d1(angles);
    let f2 = spectral::fourier_d2(angles);
    // Chebyshev index k -> (ring, angular shift)
    let fold = |k: usize| if k < rings { (rings - 1 - k, 0) } else { (k - rings, half) };
    let total = rings * angles;
    let mut out = Vec::with_capacity(total);
    for i in 0..rings {
        let ki = rings - 1 - i;
        for j in 0..angles {
            let mut dense = vec![[0.0; 5]; total];
            for k in 0..=mc {
                let (ik, sh) = fold(k);
                let jk = (j + sh) % angles;
                dense[ik * angles + jk][D1] += d[ki][k];
                dense[ik * angles + jk][D11] += d2[ki][k];
                if d[ki][k] != 0.0 {
                    for l in 0..angles {
                        dense[ik * angles + l][D12] += d[ki][k] * f1[jk][l];
                    }
                }
            }
            for l in 0..angles {
                dense[i * angles + l][D2] += f1[j][l];
                dense[i * angles + l][D22] += f2[j][l];
            }
            let me = i * angles + j;
            let mut st = Stencil::default();
            for (p, w) in dense.into_iter().enumerate() {
                if p == me {
                    st.center = st.idx.len();
                } else if w.iter().all(|v| *v == 0.0) {
                    continue;
                }
                st.idx.push(p);
                st.w.push(w);
            }
            out.push(st);
        }
    }
    out
}

/// Minimal-norm correction of every stencil so that it differentiates the
/// constants and the functions `x_a/F(x)` exactly.
fn correct_stencils(cap: &CapillaryCap, grid: &CapGrid, stencils: &mut [Stencil]) -> Result<()> {
    let n = grid.n;
    let d = n + 1;
    let nb = d + 1;
    let norm = cap.norm();
    let basis: Vec<[f64; 4]> = grid
        .nodes
        .iter()
        .map(|node| {
            let f = norm.eval(&node.normal);
            let mut b = [1.0, 0.0, 0.0, 0.0];
            for a in 0..d {
                b[a + 1] = node.normal[a] / f;
            }
            b
        })
        .collect();
    let slots: &[usize] = if n == 1 { &[D1, D11] } else { &[D1, D2, D11, D12, D22] };
    for (i, st) in stencils.iter_mut().enumerate() {
        let node = &grid.nodes[i];
        let nj = norm.jet(&node.normal);
        let mut exact = vec![[0.0; 5]; nb];
        for a in 0..d {
            exact[a + 1] = kernel_derivatives(&node.jet, &nj, a, n);
        }
        let m = st.idx.len();
        // B (nb × m), Gram BBᵀ
        let b: Vec<Vec<f64>> = (0..nb).map(|v| st.idx.iter().map(|&p| basis[p][v]).collect()).collect();
        let mut gram = vec![0.0; nb * nb];
        for u in 0..nb {
            for v in 0..nb {
                gram[u * nb + v] = linalg::dotv(&b[u], &b[v]);
            }
        }
        let lu = linalg::DenseLu::factor(nb, gram).map_err(|_| {
            Error::ChartFailure(format!("stencil correction is singular at node {i}"))
        })?;
        for &s in slots {
            let mut r: Vec<f64> = (0..nb)
                .map(|v| exact[v][s] - (0..m).map(|k| st.w[k][s] * b[v][k]).sum::<f64>())
                .collect();
            lu.solve(&mut r);
            for k in 0..m {
                st.w[k][s] += (0..nb).map(|v| b[v][k] * r[v]).sum::<f64>();
            }
        }
    }
    Ok(())
}

fn find_mirror(cap: &CapillaryCap, grid: &CapGrid) -> Option<Vec<usize>> {
    if !cap.norm().symmetry().horizontal {
        return None;
    }
    let map: Vec<usize> = match grid.layout {
        Layout::Curve { nodes } => (0..nodes).map(|i| nodes - 1 - i).collect(),
        Layout::Polar { rings, angles } => (0..rings * angles)
            .map(|p| {
                let (i, j) = (p / angles, p % angles);
                i * angles + (j + angles / 2) % angles
            })
            .collect(),
    };
    let v = grid.n;
    for (p, &q) in map.iter().enumerate() {
        let a = grid.nodes[p].normal;
        let b = grid.nodes[q].normal;
        for c in 0..=v {
            let expect = if c < v { -a[c] } else { a[c] };
            if num::abs(b[c] - expect) > 1e-9 {
                return None;
            }
        }
    }
    Some(map)
}
