//! Capillary convex bodies represented by nodal capillary support functions.

use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{Domain, Layout};
use crate::error::{Error, Result};
use crate::linalg;
use crate::num;

/// `τ[ŝ]` in the g̊-orthonormal frame at every node.
#[derive(Clone, Debug)]
pub struct TauField {
    pub hat: Vec<[[f64; 2]; 2]>,
    /// Eigenvalues, ascending (`n = 1`: only the first entry is used).
    pub eigen: Vec<[f64; 2]>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub positive: bool,
}

impl TauField {
    pub fn compute(domain: &Domain, values: &[f64]) -> TauField {
        let n = domain.n();
        let mut hat = Vec::with_capacity(domain.len());
        let mut eigen = Vec::with_capacity(domain.len());
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..domain.len() {
            let t = domain.tau_hat(values, i);
            let e = if n == 1 {
                [t[0][0], t[0][0]]
            } else {
                let (a, b) = linalg::eig2(t[0][0], 0.5 * (t[0][1] + t[1][0]), t[1][1]);
                [num::min(a, b), num::max(a, b)]
            };
            lo = num::min(lo, e[0]);
            hi = num::max(hi, e[1]);
            hat.push(t);
            eigen.push(e);
        }
        TauField { hat, eigen, min_eigenvalue: lo, max_eigenvalue: hi, positive: lo > 0.0 }
    }

    /// `σ_k` of the eigenvalues at node `i`.
    pub fn sigma(&self, k: usize, i: usize, n: usize) -> f64 {
        let t = &self.hat[i];
        match (n, k) {
            (_, 0) => 1.0,
            (1, 1) => t[0][0],
            (2, 1) => t[0][0] + t[1][1],
            (2, 2) => t[0][0] * t[1][1] - t[0][1] * t[1][0],
            _ => 0.0,
        }
    }

    pub fn det(&self, i: usize, n: usize) -> f64 {
        self.sigma(n, i, n)
    }
}

/// Admissibility of a body: Robin condition and positivity of `τ`.
#[derive(Clone, Copy, Debug)]
pub struct Admissibility {
    pub robin_residual: f64,
    pub robin_tolerance: f64,
    pub min_eigenvalue: f64,
    pub min_value: f64,
    pub admissible: bool,
}

#[derive(Clone, Debug)]
pub struct CapBody<'d> {
    domain: &'d Domain,
    values: Vec<f64>,
    tau: TauField,
}

impl<'d> CapBody<'d> {
    pub fn new(domain: &'d Domain, values: Vec<f64>) -> CapBody<'d> {
        assert_eq!(values.len(), domain.len());
        let tau = TauField::compute(domain, &values);
        CapBody { domain, values, tau }
    }

    /// The cap itself, `ŝ = ℓ`.
    pub fn cap(domain: &'d Domain) -> CapBody<'d> {
        CapBody::new(domain, domain.ell())
    }

    pub fn domain(&self) -> &'d Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tau(&self) -> &TauField {
        &self.tau
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn sigma(&self, k: usize, i: usize) -> f64 {
        self.tau.sigma(k, i, self.n())
    }

    pub fn det_tau(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.tau.det(i, self.n())).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| num::max(m, num::abs(*v)))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| num::min(m, *v))
    }

    /// Default Robin tolerance: discretization-sized for difference
    /// schemes, tight for collocation.
    pub fn robin_tolerance(&self) -> f64 {
        let h = self.domain.grid().spacing();
        let rel = match self.domain.scheme() {
            crate::domain::Scheme::Spectral => 1e-6,
            _ => num::max(1e-9, 4.0 * h * h),
        };
        rel * num::max(1.0, self.max_abs())
    }

    pub fn admissibility(&self) -> Admissibility {
        let robin = self
            .domain
            .robin_residual(&self.values)
            .iter()
            .fold(0.0, |m, r| num::max(m, num::abs(r.ambient)));
        let tol = self.robin_tolerance();
        Admissibility {
            robin_residual: robin,
            robin_tolerance: tol,
            min_eigenvalue: self.tau.min_eigenvalue,
            min_value: self.min_value(),
            admissible: robin <= tol && self.tau.positive,
        }
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.tau.positive {
            return Ok(());
        }
        let (node, e) = self
            .tau
            .eigen
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, be), (i, e)| if e[0] < be { (i, e[0]) } else { (bi, be) });
        Err(Error::NotAdmissible { node, min_eigenvalue: e })
    }

    pub fn require_positive(&self) -> Result<()> {
        let m = self.min_value();
        if m > 0.0 {
            Ok(())
        } else {
            Err(Error::NotPositive { min_value: m })
        }
    }

    /// `c·K`.
    pub fn scaled(&self, c: f64) -> CapBody<'d> {
        CapBody::new(self.domain, self.values.iter().map(|v| c * v).collect())
    }

    /// `K + y` for a horizontal translation `y`.
    pub fn translated(&self, y: &[f64]) -> CapBody<'d> {
        let mut v = self.values.clone();
        for (a, ya) in y.iter().enumerate().take(self.n()) {
            for (vi, k) in v.iter_mut().zip(self.domain.kernel(a)) {
                *vi += ya * k;
            }
        }
        CapBody::new(self.domain, v)
    }

    /// Hypersurface `X = ∇̊ŝ + ŝ𝒯⁻¹ξ` at every node.
    pub fn reconstruct(&self) -> Result<Vec<[f64; 3]>> {
        self.require_admissible()?;
        Ok(self.domain.reconstruct(&self.values))
    }

    /// Reconstructed surface together with points of the flat bottom face.
    pub fn surface_samples(&self, bottom_rings: usize) -> Result<Vec<[f64; 3]>> {
        let mut pts = self.reconstruct()?;
        let bnd: Vec<[f64; 3]> = self.domain.grid().boundary_nodes().map(|i| pts[i]).collect();
        let mut c = [0.0; 3];
        for b in &bnd {
            c = num::add3(&c, b);
        }
        c = num::scale3(1.0 / bnd.len() as f64, &c);
        for k in 1..bottom_rings {
            let s = k as f64 / bottom_rings as f64;
            for b in &bnd {
                let mut p = num::axpy(s, &num::sub3(b, &c), &c);
                p[self.n()] = 0.0;
                pts.push(p);
            }
        }
        Ok(pts)
    }
}

/// `a·K +_p b·L`, nodally `(a·ŝ_K^p + b·ŝ_L^p)^{1/p}`.
pub fn psum<'d>(a: f64, k: &CapBody<'d>, b: f64, l: &CapBody<'d>, p: f64) -> Result<CapBody<'d>> {
    if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) || p < 1.0 {
        return Err(Error::InvalidSpec("p-sum needs a, b >= 0 (not both zero) and p >= 1".into()));
    }
    if p > 1.0 {
        k.require_positive()?;
        l.require_positive()?;
    }
    let v = k
        .values()
        .iter()
        .zip(l.values())
        .map(|(x, y)| {
            if p == 1.0 {
                a * x + b * y
            } else {
                num::powf(a * num::powf(*x, p) + b * num::powf(*y, p), 1.0 / p)
            }
        })
        .collect();
    Ok(CapBody::new(k.domain(), v))
}

/// Sampled set `{a^{1/p}(1−t)^{1/q}X₁ + b^{1/p}t^{1/q}X₂}` over all sample
/// pairs and the given `t` values. For `p = 1` the `t` values are ignored and
/// the scaled direct sums `aX₁ + bX₂` are returned.
pub fn pointcloud_psum_oracle(
    a: f64,
    xk: &[[f64; 3]],
    b: f64,
    xl: &[[f64; 3]],
    p: f64,
    t_grid: &[f64],
) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    if p == 1.0 {
        for x in xk {
            for y in xl {
                out.push(num::axpy(a, x, &num::scale3(b, y)));
            }
        }
        return out;
    }
    let q = p / (p - 1.0);
    for &t in t_grid {
        let ca = num::powf(a, 1.0 / p) * num::powf(1.0 - t, 1.0 / q);
        let cb = num::powf(b, 1.0 / p) * num::powf(t, 1.0 / q);
        for x in xk {
            for y in xl {
                out.push(num::axpy(ca, x, &num::scale3(cb, y)));
            }
        }
    }
    out
}

/// Capillary support function of a point set at every node:
/// `max_y ⟨x, y⟩/F(x)`.
pub fn support_of_points(domain: &Domain, pts: &[[f64; 3]]) -> Vec<f64> {
    domain
        .grid()
        .nodes
        .iter()
        .zip(&domain.metric().nodes)
        .map(|(node, m)| {
            pts.iter().fold(f64::NEG_INFINITY, |acc, y| num::max(acc, num::dot(&node.normal, y))) / m.f
        })
        .collect()
}

/// The body in the translated formulation.
#[derive(Clone, Debug)]
pub struct TildeBody {
    /// `s̃ = ŝ/ℓ`.
    pub values: Vec<f64>,
    pub tau: TauField,
    /// Largest `|∇̃_{ẽ_n}s̃|` over boundary nodes.
    pub neumann_residual: f64,
    /// Largest `|τ̃_{αn}|` over boundary nodes (`n = 2`).
    pub mixed_boundary: f64,
    /// Whether positivity of `τ̃` and `τ` agree at every node.
    pub positivity_agrees: bool,
}

/// `s̃ = ŝ/ℓ` on the translated cap with its `τ̃` field. `tilde` must be
/// `body.domain().tilde()`.
pub fn to_tilde(body: &CapBody<'_>, tilde: &Domain) -> TildeBody {
    let d = body.domain();
    let values: Vec<f64> = body.values().iter().zip(d.ell()).map(|(s, l)| s / l).collect();
    let tau = TauField::compute(tilde, &values);
    let mut neumann: f64 = 0.0;
    let mut mixed: f64 = 0.0;
    let n = d.n();
    for i in tilde.grid().boundary_nodes() {
        let m = tilde.node(i);
        let grad = tilde.gradient(&values, i);
        let fr = m.frame.expect("boundary frame");
        let dj = tilde.cap().norm().dual_jet_at_normal(&tilde.grid().nodes[i].normal);
        neumann = num::max(neumann, num::abs(dj.g_form(&grad, &fr.e_n)));
        if n == 2 {
            // unit tangent ∂_φ and the g̃-orthogonal unit direction
            let t = tilde.tau_chart(&values, i);
            let v = [0.0, 1.0 / num::sqrt(m.g[1][1])];
            let w0 = [m.ginv[0][0], m.ginv[1][0]];
            let wn = num::sqrt(m.ginv[0][0]);
            let w = [w0[0] / wn, w0[1] / wn];
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    s += t[a][b] * v[a] * w[b];
                }
            }
            mixed = num::max(mixed, num::abs(s));
        }
    }
    let agree = tau.eigen.iter().zip(&body.tau().eigen).all(|(a, b)| (a[0] > 0.0) == (b[0] > 0.0));
    TildeBody { values, tau, neumann_residual: neumann, mixed_boundary: mixed, positivity_agrees: agree }
}

/// Solves the `n×n` Gram system of the kernel functions against `rhs`.
pub fn kernel_coefficients(domain: &Domain, field: &[f64]) -> Vec<f64> {
    let n = domain.n();
    let k: Vec<Vec<f64>> = (0..n).map(|a| domain.kernel(a)).collect();
    let w = domain.weights();
    let mut gram = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            gram[a * n + b] = (0..w.len()).map(|i| w[i] * k[a][i] * k[b][i]).sum();
        }
        rhs[a] = (0..w.len()).map(|i| w[i] * k[a][i] * field[i]).sum();
    }
    let lu = linalg::DenseLu::factor(n, gram).expect("kernel Gram matrix is positive definite");
    lu.solve(&mut rhs);
    rhs
}

/// Removes the kernel components (a horizontal translation) so that
/// `∫ G(ξ̂)(ξ̂, E_α) ŝ dμ_F = 0`. Returns the body and the removed
/// coefficients.
pub fn kernel_project<'d>(body: &CapBody<'d>) -> (CapBody<'d>, Vec<f64>) {
    let d = body.domain();
    let c = kernel_coefficients(d, body.values());
    let mut v = body.values().to_vec();
    for (a, ca) in c.iter().enumerate() {
        for (vi, k) in v.iter_mut().zip(d.kernel(a)) {
            *vi -= ca * k;
        }
    }
    (CapBody::new(d, v), c)
}

/// Average of a nodal field with its reflection `ξ̄`.
pub fn even_symmetrize(domain: &Domain, field: &[f64]) -> Result<Vec<f64>> {
    let m = domain.mirror().ok_or(Error::NotSymmetricNorm)?;
    Ok((0..field.len()).map(|i| 0.5 * (field[i] + field[m[i]])).collect())
}

/// Largest `|f(ξ) − f(ξ̄)|`.
pub fn odd_defect(domain: &Domain, field: &[f64]) -> Result<f64> {
    let m = domain.mirror().ok_or(Error::NotSymmetricNorm)?;
    Ok((0..field.len()).fold(0.0, |acc, i| num::max(acc, num::abs(field[i] - field[m[i]]))))
}

/// Test-function family `Φ` whose product with `ℓ` satisfies the Robin
/// condition: `Φ` has vanishing gradient on the boundary.
///
/// `n = 1`: `Φ(u) = Σ_k c_k cos(kπu)` style terms with zero slope at `u = ±1`.
/// `n = 2`: `Φ = a(ρ²) + (1−ρ²)²b(X, Y)` with `a'(1) = 0`, `X = ρcosφ`,
/// `Y = ρsinφ`.
#[derive(Clone, Debug)]
pub struct RobinTestFunction {
    pub coefficients: Vec<f64>,
    pub even: bool,
}

impl RobinTestFunction {
    /// Number of coefficients used by [`Self::eval`].
    pub const TERMS: usize = 6;

    pub fn eval(&self, n: usize, coords: &[f64; 2]) -> f64 {
        let c = &self.coefficients;
        if n == 1 {
            let u = coords[0];
            let mut s = 0.0;
            for (k, ck) in c.iter().enumerate() {
                let m = if self.even { 2 * k + 2 } else { k + 1 };
                s += ck * num::cos(m as f64 * num::PI * (u + 1.0) / 2.0) / m as f64;
            }
            s
        } else {
            let (rho, phi) = (coords[0], coords[1]);
            let r2 = rho * rho;
            let (x, y) = (rho * num::cos(phi), rho * num::sin(phi));
            let w = (1.0 - r2) * (1.0 - r2);
            let a = c[0] * (r2 * r2 / 2.0 - r2 * r2 * r2 / 3.0) * 4.0 + c[1] * (r2 * r2 * r2 - 0.75 * r2 * r2 * r2 * r2);
            let b = if self.even {
                c[2] * x * x + c[3] * x * y + c[4] * y * y + c[5] * (x * x - y * y) * x * y
            } else {
                c[2] * x + c[3] * y + c[4] * x * y + c[5] * x * x * y
            };
            a + w * b
        }
    }

    pub fn field(&self, domain: &Domain) -> Vec<f64> {
        domain.grid().nodes.iter().map(|nd| self.eval(domain.n(), &nd.coords)).collect()
    }

    /// `ℓ·(1 + Φ)`-type perturbation field `ℓΦ`.
    pub fn robin_field(&self, domain: &Domain) -> Vec<f64> {
        self.field(domain).iter().zip(domain.ell()).map(|(p, l)| p * l).collect()
    }
}

/// Grid spacing in length units: the longest edge between chart neighbours
/// of the reconstructed surface.
pub fn surface_spacing(domain: &Domain, pts: &[[f64; 3]]) -> f64 {
    let mut h: f64 = 0.0;
    match domain.grid().layout {
        Layout::Curve { nodes } => {
            for i in 1..nodes {
                h = num::max(h, num::norm(&num::sub3(&pts[i], &pts[i - 1])));
            }
        }
        Layout::Polar { rings, angles } => {
            for i in 0..rings {
                for j in 0..angles {
                    let p = i * angles + j;
                    let q = i * angles + (j + 1) % angles;
                    h = num::max(h, num::norm(&num::sub3(&pts[p], &pts[q])));
                    if i + 1 < rings {
                        h = num::max(h, num::norm(&num::sub3(&pts[p], &pts[p + angles])));
                    }
                }
            }
        }
    }
    h
}
