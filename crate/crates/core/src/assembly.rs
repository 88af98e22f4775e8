//! Bilinear finite elements and the stabilized form
//!
//! ```text
//! B(w, v) = (eps + b^2 δ)(w_β, v_β) + ε̂ (w_η, v_η) - b (1 - δ)(w, v_β) + (w, v)
//! ```
//!
//! with load `(f, v + δ b v_β)`. Both `δ` and `ε̂` are constant on every
//! element because the region interfaces are mesh lines.
//!
//! Inside an element the four local basis functions are numbered
//! SW, SE, NE, NW.

use serde::Serialize;

use crate::mesh::{Element, ProblemSpec, Region, ShishkinMesh};
use crate::quadrature::TensorRule;
use crate::sparse::CsrMatrix;

pub const DEFAULT_ORDER: usize = 3;

/// Element-constant stabilization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilizationProfile {
    /// Streamline parameter on the coarse region (`1/N`); zero elsewhere.
    pub delta_smooth: f64,
    pub epsilon: f64,
    /// `max(eps, N^{-3/2})`.
    pub eps_tilde: f64,
    /// Use `eps_tilde` as crosswind diffusion on the coarse region. When
    /// false the scheme is plain streamline diffusion (`ε̂ = eps`).
    pub crosswind: bool,
}

impl StabilizationProfile {
    pub fn new(n: usize, epsilon: f64) -> Self {
        let nf = n as f64;
        StabilizationProfile {
            delta_smooth: 1.0 / nf,
            epsilon,
            eps_tilde: epsilon.max(nf.powf(-1.5)),
            crosswind: true,
        }
    }

    pub fn without_crosswind(n: usize, epsilon: f64) -> Self {
        StabilizationProfile {
            crosswind: false,
            ..Self::new(n, epsilon)
        }
    }

    pub fn delta(&self, region: Region) -> f64 {
        match region {
            Region::Smooth => self.delta_smooth,
            _ => 0.0,
        }
    }

    pub fn eps_hat(&self, region: Region) -> f64 {
        match region {
            Region::Smooth if self.crosswind => self.eps_tilde,
            _ => self.epsilon,
        }
    }
}

/// Coefficients of the four terms of `B` on one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormCoefficients {
    /// `eps + b^2 δ`
    pub streamline: f64,
    /// `ε̂`
    pub crosswind: f64,
    /// `b (1 - δ)`
    pub convection: f64,
    pub reaction: f64,
    /// `δ b`, weight of `v_β` in the load.
    pub load_streamline: f64,
}

impl FormCoefficients {
    pub fn new(spec: &ProblemSpec, profile: &StabilizationProfile, region: Region) -> Self {
        let b = spec.b_norm();
        let delta = profile.delta(region);
        FormCoefficients {
            streamline: spec.epsilon + b * b * delta,
            crosswind: profile.eps_hat(region),
            convection: b * (1.0 - delta),
            reaction: 1.0,
            load_streamline: delta * b,
        }
    }

    /// Integrand of `B(w, v)` at one point.
    #[inline]
    pub fn density(&self, w: &Directional, v: &Directional) -> f64 {
        self.streamline * w.d_beta * v.d_beta + self.crosswind * w.d_eta * v.d_eta
            - self.convection * w.value * v.d_beta
            + self.reaction * w.value * v.value
    }
}

/// Value and Cartesian gradient of a field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldValue {
    pub value: f64,
    pub grad: [f64; 2],
}

/// Value with streamline and crosswind derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Directional {
    pub value: f64,
    pub d_beta: f64,
    pub d_eta: f64,
}

impl FieldValue {
    pub fn directional(&self, beta: [f64; 2], eta: [f64; 2]) -> Directional {
        Directional {
            value: self.value,
            d_beta: beta[0] * self.grad[0] + beta[1] * self.grad[1],
            d_eta: eta[0] * self.grad[0] + eta[1] * self.grad[1],
        }
    }
}

/// Anything that can be evaluated (with first derivatives) at a point of an element.
pub trait ElementField {
    fn eval(&self, element: &Element, local: [f64; 2]) -> FieldValue;
}

/// Field given directly as a function of the physical point.
pub struct PointField<F>(pub F);

impl<F: Fn([f64; 2]) -> FieldValue> ElementField for PointField<F> {
    fn eval(&self, element: &Element, local: [f64; 2]) -> FieldValue {
        (self.0)(element.map(local))
    }
}

impl<T: ElementField + ?Sized> ElementField for &T {
    fn eval(&self, element: &Element, local: [f64; 2]) -> FieldValue {
        (**self).eval(element, local)
    }
}

/// Local bilinear basis values and gradients, in SW, SE, NE, NW order.
#[inline]
pub fn local_basis(element: &Element, local: [f64; 2]) -> [FieldValue; 4] {
    let [s, t] = local;
    let (hx, hy) = (element.hx, element.hy);
    [
        FieldValue {
            value: (1.0 - s) * (1.0 - t),
            grad: [-(1.0 - t) / hx, -(1.0 - s) / hy],
        },
        FieldValue {
            value: s * (1.0 - t),
            grad: [(1.0 - t) / hx, -s / hy],
        },
        FieldValue {
            value: s * t,
            grad: [t / hx, s / hy],
        },
        FieldValue {
            value: (1.0 - s) * t,
            grad: [-t / hx, (1.0 - s) / hy],
        },
    ]
}

/// Values of a bilinear finite element function at all `(N+1)^2` nodes,
/// stored row by row (`index = j (N+1) + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub n: usize,
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(n: usize) -> Self {
        NodalField {
            n,
            values: vec![0.0; (n + 1) * (n + 1)],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize, [f64; 2]) -> f64>(mesh: &ShishkinMesh, mut f: F) -> Self {
        let n = mesh.n;
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                values.push(f(i, j, mesh.node(i, j)));
            }
        }
        NodalField { n, values }
    }

    /// Member of the discrete space with the given interior values.
    pub fn from_interior(dofs: &DofMap, interior: &[f64]) -> Self {
        let mut f = Self::zeros(dofs.n);
        for (k, &v) in interior.iter().enumerate() {
            let (i, j) = dofs.node(k);
            *f.at_mut(i, j) = v;
        }
        f
    }

    pub fn interior(&self, dofs: &DofMap) -> Vec<f64> {
        (0..dofs.len())
            .map(|k| {
                let (i, j) = dofs.node(k);
                self.at(i, j)
            })
            .collect()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.n + 1) + i]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.values[j * (self.n + 1) + i]
    }

    pub fn scaled(&self, c: f64) -> Self {
        NodalField {
            n: self.n,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// True when every boundary value vanishes.
    pub fn is_in_discrete_space(&self) -> bool {
        let n = self.n;
        (0..=n).all(|k| self.at(k, 0) == 0.0 && self.at(k, n) == 0.0 && self.at(0, k) == 0.0 && self.at(n, k) == 0.0)
    }

    /// Value at an arbitrary point of the square.
    pub fn eval_point(&self, mesh: &ShishkinMesh, p: [f64; 2]) -> crate::Result<f64> {
        let (i, j) = mesh.locate(p)?;
        let e = mesh.element(i, j);
        let local = [(p[0] - e.origin[0]) / e.hx, (p[1] - e.origin[1]) / e.hy];
        Ok(self.eval(&e, local).value)
    }
}

impl ElementField for NodalField {
    #[inline]
    fn eval(&self, element: &Element, local: [f64; 2]) -> FieldValue {
        let basis = local_basis(element, local);
        let mut out = FieldValue::default();
        for (phi, (i, j)) in basis.iter().zip(element.corners()) {
            let c = self.at(i, j);
            out.value += c * phi.value;
            out.grad[0] += c * phi.grad[0];
            out.grad[1] += c * phi.grad[1];
        }
        out
    }
}

/// Derivatives of a bilinear function at a point of an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub dx: f64,
    pub dy: f64,
    pub d_beta: f64,
    pub d_eta: f64,
}

pub fn directional_derivatives(v: &NodalField, element: &Element, local: [f64; 2], spec: &ProblemSpec) -> Derivatives {
    let fv = v.eval(element, local);
    let d = fv.directional(spec.beta(), spec.eta());
    Derivatives {
        dx: fv.grad[0],
        dy: fv.grad[1],
        d_beta: d.d_beta,
        d_eta: d.d_eta,
    }
}

/// Inverse rotation: Cartesian derivatives from the streamline/crosswind pair.
pub fn cartesian_from_directional(d_beta: f64, d_eta: f64, spec: &ProblemSpec) -> [f64; 2] {
    let beta = spec.beta();
    let eta = spec.eta();
    [beta[0] * d_beta + eta[0] * d_eta, beta[1] * d_beta + eta[1] * d_eta]
}

/// Interior node numbering: node `(i, j)`, `1 <= i, j <= N-1`, has index
/// `(j-1)(N-1) + (i-1)`. Boundary nodes carry no unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    pub n: usize,
}

impl DofMap {
    pub fn new(n: usize) -> Self {
        DofMap { n }
    }

    pub fn len(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        if i == 0 || j == 0 || i >= self.n || j >= self.n {
            None
        } else {
            Some((j - 1) * (self.n - 1) + (i - 1))
        }
    }

    #[inline]
    pub fn node(&self, k: usize) -> (usize, usize) {
        let m = self.n - 1;
        (k % m + 1, k / m + 1)
    }

    /// Nine-point stencil pattern, columns sorted.
    pub fn pattern(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.node(k);
                let mut cols = Vec::with_capacity(9);
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 {
                            continue;
                        }
                        if let Some(c) = self.index(ii as usize, jj as usize) {
                            cols.push(c);
                        }
                    }
                }
                cols
            })
            .collect()
    }
}

/// Assembled `A u = rhs`, with `A[p][q] = B(φ_q, φ_p)` over interior nodes.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
}

/// Local `4 x 4` matrix `K[a][c] = ∫_τ density(φ_c, φ_a)` (row = test function).
pub fn local_matrix_with(
    element: &Element,
    coeffs: &FormCoefficients,
    beta: [f64; 2],
    eta: [f64; 2],
    rule: &TensorRule,
) -> [[f64; 4]; 4] {
    let mut k = [[0.0; 4]; 4];
    let area = element.area();
    for &(local, w) in &rule.nodes {
        let basis = local_basis(element, local).map(|b| b.directional(beta, eta));
        let wa = w * area;
        for (a, test) in basis.iter().enumerate() {
            for (c, trial) in basis.iter().enumerate() {
                k[a][c] += wa * coeffs.density(trial, test);
            }
        }
    }
    k
}

pub fn local_matrix(
    element: &Element,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    order: usize,
) -> [[f64; 4]; 4] {
    let coeffs = FormCoefficients::new(spec, profile, element.region);
    local_matrix_with(element, &coeffs, spec.beta(), spec.eta(), &TensorRule::new(order))
}

/// Sums local matrices into the interior-node system, dropping boundary rows and columns.
pub fn assemble_matrix<F>(mesh: &ShishkinMesh, mut local: F) -> CsrMatrix
where
    F: FnMut(&Element) -> [[f64; 4]; 4],
{
    let dofs = DofMap::new(mesh.n);
    let mut a = CsrMatrix::from_pattern(dofs.len(), &dofs.pattern());
    for e in mesh.elements() {
        let k = local(&e);
        let idx = e.corners().map(|(i, j)| dofs.index(i, j));
        for (ka, ra) in idx.iter().enumerate() {
            let Some(p) = *ra else { continue };
            for (kc, rc) in idx.iter().enumerate() {
                if let Some(q) = *rc {
                    a.add(p, q, k[ka][kc]);
                }
            }
        }
    }
    a
}

pub fn assemble(mesh: &ShishkinMesh, spec: &ProblemSpec, profile: &StabilizationProfile) -> SparseSystem {
    assemble_with_order(mesh, spec, profile, DEFAULT_ORDER)
}

pub fn assemble_with_order(
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    order: usize,
) -> SparseSystem {
    let rule = TensorRule::new(order);
    let (beta, eta) = (spec.beta(), spec.eta());
    let matrix = assemble_matrix(mesh, |e| {
        let c = FormCoefficients::new(spec, profile, e.region);
        local_matrix_with(e, &c, beta, eta, &rule)
    });
    let dofs = DofMap::new(mesh.n);
    let rhs = assemble_load(mesh, spec, profile, &rule);
    SparseSystem { matrix, rhs, dofs }
}

/// `r_p = (f, φ_p + δ b (φ_p)_β)`.
pub fn assemble_load(
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    rule: &TensorRule,
) -> Vec<f64> {
    let dofs = DofMap::new(mesh.n);
    let mut rhs = vec![0.0; dofs.len()];
    if matches!(spec.source, crate::mesh::Source::Zero) {
        return rhs;
    }
    let (beta, eta) = (spec.beta(), spec.eta());
    for e in mesh.elements() {
        let c = FormCoefficients::new(spec, profile, e.region);
        let idx = e.corners().map(|(i, j)| dofs.index(i, j));
        let area = e.area();
        for &(local, w) in &rule.nodes {
            let p = e.map(local);
            let fw = spec.source.eval(p[0], p[1]) * w * area;
            for (phi, r) in local_basis(&e, local).iter().zip(&idx) {
                if let Some(k) = r {
                    let d = phi.directional(beta, eta);
                    rhs[*k] += fw * (d.value + c.load_streamline * d.d_beta);
                }
            }
        }
    }
    rhs
}

/// `B(w, v)` by elementwise tensor Gauss quadrature.
pub fn apply_form<W: ElementField, V: ElementField>(
    w: &W,
    v: &V,
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    order: usize,
) -> f64 {
    let rule = TensorRule::new(order);
    let (beta, eta) = (spec.beta(), spec.eta());
    let mut total = 0.0;
    for e in mesh.elements() {
        let c = FormCoefficients::new(spec, profile, e.region);
        let mut part = 0.0;
        for &(local, wq) in &rule.nodes {
            let wd = w.eval(&e, local).directional(beta, eta);
            let vd = v.eval(&e, local).directional(beta, eta);
            part += wq * c.density(&wd, &vd);
        }
        total += part * e.area();
    }
    total
}

/// `(f, v + δ b v_β)` by elementwise quadrature.
pub fn load_functional<V: ElementField>(
    v: &V,
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    order: usize,
) -> f64 {
    let rule = TensorRule::new(order);
    let (beta, eta) = (spec.beta(), spec.eta());
    let mut total = 0.0;
    for e in mesh.elements() {
        let c = FormCoefficients::new(spec, profile, e.region);
        let mut part = 0.0;
        for &(local, wq) in &rule.nodes {
            let p = e.map(local);
            let vd = v.eval(&e, local).directional(beta, eta);
            part += wq * spec.source.eval(p[0], p[1]) * (vd.value + c.load_streamline * vd.d_beta);
        }
        total += part * e.area();
    }
    total
}

/// `B(φ_p, v)` for every interior node `p` (basis function as trial).
pub fn form_basis_trial<V: ElementField>(
    v: &V,
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    order: usize,
) -> Vec<f64> {
    form_against_basis(v, mesh, spec, profile, order, true)
}

/// `B(w, φ_p)` for every interior node `p` (basis function as test).
pub fn form_basis_test<W: ElementField>(
    w: &W,
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    order: usize,
) -> Vec<f64> {
    form_against_basis(w, mesh, spec, profile, order, false)
}

fn form_against_basis<F: ElementField>(
    field: &F,
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    order: usize,
    basis_is_trial: bool,
) -> Vec<f64> {
    let rule = TensorRule::new(order);
    let dofs = DofMap::new(mesh.n);
    let (beta, eta) = (spec.beta(), spec.eta());
    let mut out = vec![0.0; dofs.len()];
    for e in mesh.elements() {
        let c = FormCoefficients::new(spec, profile, e.region);
        let idx = e.corners().map(|(i, j)| dofs.index(i, j));
        let area = e.area();
        for &(local, wq) in &rule.nodes {
            let fd = field.eval(&e, local).directional(beta, eta);
            for (phi, r) in local_basis(&e, local).iter().zip(&idx) {
                if let Some(p) = r {
                    let pd = phi.directional(beta, eta);
                    let d = if basis_is_trial {
                        c.density(&pd, &fd)
                    } else {
                        c.density(&fd, &pd)
                    };
                    out[*p] += wq * area * d;
                }
            }
        }
    }
    out
}

/// `(∇w, ∇v)` in Cartesian form.
pub fn stiffness_cartesian(mesh: &ShishkinMesh, order: usize) -> CsrMatrix {
    let rule = TensorRule::new(order);
    assemble_matrix(mesh, |e| {
        let mut k = [[0.0; 4]; 4];
        for &(local, w) in &rule.nodes {
            let basis = local_basis(e, local);
            for a in 0..4 {
                for c in 0..4 {
                    k[a][c] +=
                        w * e.area() * (basis[c].grad[0] * basis[a].grad[0] + basis[c].grad[1] * basis[a].grad[1]);
                }
            }
        }
        k
    })
}

/// `(w_β, v_β) + (w_η, v_η)` for the directions of `spec`.
pub fn stiffness_directional(mesh: &ShishkinMesh, spec: &ProblemSpec, order: usize) -> CsrMatrix {
    let rule = TensorRule::new(order);
    let coeffs = FormCoefficients {
        streamline: 1.0,
        crosswind: 1.0,
        convection: 0.0,
        reaction: 0.0,
        load_streamline: 0.0,
    };
    let (beta, eta) = (spec.beta(), spec.eta());
    assemble_matrix(mesh, |e| local_matrix_with(e, &coeffs, beta, eta, &rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, MeshParams, Source};

    fn setup(n: usize, eps: f64, b: [f64; 2]) -> (ShishkinMesh, ProblemSpec, StabilizationProfile) {
        let spec = ProblemSpec::new(eps, b, Source::One).unwrap();
        let mesh = build_mesh(&MeshParams::new(n, spec.clone()).unwrap());
        let profile = StabilizationProfile::new(n, eps);
        (mesh, spec, profile)
    }

    #[test]
    fn profile_values() {
        let p = StabilizationProfile::new(16, 1e-4);
        assert_eq!(p.delta(Region::Smooth), 1.0 / 16.0);
        assert_eq!(p.delta(Region::LayerX), 0.0);
        assert!((p.eps_hat(Region::Smooth) - 16f64.powf(-1.5)).abs() < 1e-18);
        assert_eq!(p.eps_hat(Region::Corner), 1e-4);
        let q = StabilizationProfile::without_crosswind(16, 1e-4);
        assert_eq!(q.eps_hat(Region::Smooth), 1e-4);
        // large eps: eps_tilde = eps
        assert_eq!(StabilizationProfile::new(16, 0.1).eps_tilde, 0.1);
    }

    #[test]
    fn mass_block() {
        let (mesh, spec, _) = setup(8, 1e-3, [1.0, 1.0]);
        let e = mesh.element(5, 2);
        let mass = FormCoefficients {
            streamline: 0.0,
            crosswind: 0.0,
            convection: 0.0,
            reaction: 1.0,
            load_streamline: 0.0,
        };
        let k = local_matrix_with(&e, &mass, spec.beta(), spec.eta(), &TensorRule::new(3));
        let pattern = [[4., 2., 1., 2.], [2., 4., 2., 1.], [1., 2., 4., 2.], [2., 1., 2., 4.]];
        for a in 0..4 {
            for c in 0..4 {
                let want = e.area() / 36.0 * pattern[a][c];
                assert!((k[a][c] - want).abs() < 1e-15 * e.area().max(1.0));
            }
        }
    }

    #[test]
    fn axis_aligned_flow_gives_laplacian() {
        // b2 must be positive; a negligible b2 gives beta = (1, 0) to rounding
        let (mesh, _, _) = setup(8, 1e-3, [1.0, 1.0]);
        let spec = ProblemSpec::new(1e-3, [1.0, 1e-300], Source::One).unwrap();
        let d = stiffness_directional(&mesh, &spec, 3);
        let c = stiffness_cartesian(&mesh, 3);
        for (x, y) in d.values.iter().zip(&c.values) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn directional_derivatives_of_linear_field() {
        let (mesh, spec, _) = setup(8, 1e-3, [1.0, 2.0]);
        let v = NodalField::from_fn(&mesh, |_, _, p| p[0]);
        let e = mesh.element(3, 6);
        let d = directional_derivatives(&v, &e, [0.3, 0.7], &spec);
        let b = spec.b_norm();
        assert!((d.dx - 1.0).abs() < 1e-12 && d.dy.abs() < 1e-12);
        assert!((d.d_beta - 1.0 / b).abs() < 1e-12);
        assert!((d.d_eta + 2.0 / b).abs() < 1e-12);
        let back = cartesian_from_directional(d.d_beta, d.d_eta, &spec);
        assert!((back[0] - d.dx).abs() < 1e-14 && (back[1] - d.dy).abs() < 1e-14);
    }

    #[test]
    fn system_shape_and_asymmetry() {
        let (mesh, spec, profile) = setup(8, 1e-3, [1.0, 1.0]);
        let sys = assemble(&mesh, &spec, &profile);
        assert_eq!(sys.matrix.nrows, 49);
        assert!(sys.matrix.max_row_nnz() <= 9);
        assert!(sys.matrix.asymmetry() > 0.0);
    }

    #[test]
    fn zero_source_gives_zero_load() {
        let (mesh, mut spec, profile) = setup(8, 1e-3, [1.0, 1.0]);
        spec.source = Source::Zero;
        let sys = assemble(&mesh, &spec, &profile);
        assert!(sys.rhs.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn form_on_basis_matches_matrix() {
        let (mesh, spec, profile) = setup(8, 1e-2, [1.0, 0.5]);
        let sys = assemble(&mesh, &spec, &profile);
        let dofs = sys.dofs;
        for (p, q) in [(0, 0), (10, 11), (24, 16), (30, 38)] {
            let mut up = vec![0.0; dofs.len()];
            let mut uq = vec![0.0; dofs.len()];
            up[p] = 1.0;
            uq[q] = 1.0;
            let fp = NodalField::from_interior(&dofs, &up);
            let fq = NodalField::from_interior(&dofs, &uq);
            let b = apply_form(&fq, &fp, &mesh, &spec, &profile, 3);
            assert!((b - sys.matrix.get(p, q)).abs() < 1e-14, "{p} {q}");
        }
        let zero = NodalField::zeros(8);
        let any = NodalField::from_fn(&mesh, |i, j, _| (i * j) as f64);
        assert_eq!(apply_form(&any, &zero, &mesh, &spec, &profile, 3), 0.0);
    }

    #[test]
    fn constant_interpolant_action() {
        // A applied to the interior part of 1^I equals B(1^I, φ_p) computed
        // directly, where 1^I is one on interior nodes and zero on the boundary
        let (mesh, spec, profile) = setup(8, 1e-2, [2.0, 1.0]);
        let sys = assemble(&mesh, &spec, &profile);
        let ones = vec![1.0; sys.dofs.len()];
        let av = sys.matrix.matvec(&ones);
        let w = NodalField::from_interior(&sys.dofs, &ones);
        for p in [0, 7, 20, 48] {
            let mut e = vec![0.0; sys.dofs.len()];
            e[p] = 1.0;
            let v = NodalField::from_interior(&sys.dofs, &e);
            let direct = apply_form(&w, &v, &mesh, &spec, &profile, 4);
            assert!((direct - av[p]).abs() < 1e-13, "p={p}");
        }
    }

    #[test]
    fn quadrature_order_does_not_change_matrix() {
        let (mesh, spec, profile) = setup(16, 1e-3, [1.0, 0.7]);
        let a3 = assemble_with_order(&mesh, &spec, &profile, 3);
        let a5 = assemble_with_order(&mesh, &spec, &profile, 5);
        for (x, y) in a3.matrix.values.iter().zip(&a5.matrix.values) {
            assert!((x - y).abs() <= 1e-13);
        }
    }

    #[test]
    fn dof_map_roundtrip() {
        let d = DofMap::new(6);
        for k in 0..d.len() {
            let (i, j) = d.node(k);
            assert_eq!(d.index(i, j), Some(k));
        }
        assert_eq!(d.index(0, 3), None);
        assert_eq!(d.index(6, 3), None);
    }
}
