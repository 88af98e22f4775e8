//! The anisotropic weight `ω`, the weighted norm `‖·‖_ω` and the
//! interpolation-error diagnostics built on them.
//!
//! With `s_β = (x - x*)·β` and `s_η = (x - x*)·η`,
//!
//! ```text
//! ω(x) = g(s_β / σ_β) g(s_η / σ_η) g(-s_η / σ_η),   g(r) = 2 / (1 + e^r)
//! σ_β = k N^{-1} ln N,   σ_η = k ε̃^{1/2} ln N
//! ```
//!
//! Downstream of `x*` and away from the streamline through it the weight is
//! exponentially small, so `ω⁻¹` penalizes any mass of `G` there.
//!
//! All derivatives are evaluated through logarithmic derivatives, e.g.
//! `(ω⁻¹)_β = ω⁻¹ · logistic(s_β/σ_β) / σ_β`, which is positive everywhere.

use serde::Serialize;

use crate::assembly::{
    apply_form, local_basis, ElementField, FieldValue, FormCoefficients, NodalField, StabilizationProfile,
};
use crate::error::{Error, Result};
use crate::mesh::{Element, ProblemSpec, Region, ShishkinMesh};
use crate::quadrature::TensorRule;

pub const DEFAULT_WEIGHT_ORDER: usize = 5;

/// `g(r) = 2 / (1 + e^r)`, evaluated without overflow for any `r`.
pub fn g_eval(r: f64) -> f64 {
    if r >= 0.0 {
        let e = (-r).exp();
        2.0 * e / (1.0 + e)
    } else {
        2.0 / (1.0 + r.exp())
    }
}

/// `g'(r) = -2 e^r / (1 + e^r)^2 = -2 e^{-|r|} / (1 + e^{-|r|})^2`.
pub fn g_prime(r: f64) -> f64 {
    let e = (-r.abs()).exp();
    -2.0 * e / ((1.0 + e) * (1.0 + e))
}

/// `e^r / (1 + e^r)`, i.e. `-g'(r) / g(r)`.
fn logistic(r: f64) -> f64 {
    if r >= 0.0 {
        1.0 / (1.0 + (-r).exp())
    } else {
        let e = r.exp();
        e / (1.0 + e)
    }
}

/// `1 / g(r) = (1 + e^r) / 2`.
fn inv_g(r: f64) -> f64 {
    0.5 * (1.0 + r.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightParams {
    pub k: f64,
    pub x_star: [f64; 2],
    pub sigma_beta: f64,
    pub sigma_eta: f64,
    pub eps_tilde: f64,
    pub n: usize,
    #[serde(skip)]
    pub beta: [f64; 2],
    #[serde(skip)]
    pub eta: [f64; 2],
}

impl WeightParams {
    pub fn new(k: f64, x_star: [f64; 2], n: usize, spec: &ProblemSpec) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!("N must be at least 2, got {n}")));
        }
        let nf = n as f64;
        let ln_n = nf.ln();
        let eps_tilde = spec.epsilon.max(nf.powf(-1.5));
        Ok(WeightParams {
            k,
            x_star,
            sigma_beta: k * ln_n / nf,
            sigma_eta: k * eps_tilde.sqrt() * ln_n,
            eps_tilde,
            n,
            beta: spec.beta(),
            eta: spec.eta(),
        })
    }

    /// Offsets `((x - x*)·β, (x - x*)·η)`.
    pub fn offsets(&self, x: [f64; 2]) -> (f64, f64) {
        let d = [x[0] - self.x_star[0], x[1] - self.x_star[1]];
        (
            d[0] * self.beta[0] + d[1] * self.beta[1],
            d[0] * self.eta[0] + d[1] * self.eta[1],
        )
    }

    pub fn omega(&self, x: [f64; 2]) -> f64 {
        let (sb, se) = self.offsets(x);
        let (rb, re) = (sb / self.sigma_beta, se / self.sigma_eta);
        g_eval(rb) * g_eval(re) * g_eval(-re)
    }

    pub fn omega_eval(&self, x: [f64; 2]) -> WeightEval {
        let (sb, se) = self.offsets(x);
        let (rb, re) = (sb / self.sigma_beta, se / self.sigma_eta);
        let omega = g_eval(rb) * g_eval(re) * g_eval(-re);
        let inv = inv_g(rb) * inv_g(re) * inv_g(-re);
        // derivatives of ln(1/ω) along β and η
        let lb = logistic(rb) / self.sigma_beta;
        let le = (logistic(re) - logistic(-re)) / self.sigma_eta;
        let (d_beta, d_eta) = (-omega * lb, -omega * le);
        let (inv_beta, inv_eta) = (inv * lb, inv * le);
        let rot = |db: f64, de: f64| {
            [
                self.beta[0] * db + self.eta[0] * de,
                self.beta[1] * db + self.eta[1] * de,
            ]
        };
        WeightEval {
            omega,
            grad: rot(d_beta, d_eta),
            d_beta,
            d_eta,
            inv,
            inv_grad: rot(inv_beta, inv_eta),
            inv_beta,
            inv_eta,
        }
    }
}

/// `ω` and `ω⁻¹` with their gradients and directional derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEval {
    pub omega: f64,
    pub grad: [f64; 2],
    pub d_beta: f64,
    pub d_eta: f64,
    pub inv: f64,
    pub inv_grad: [f64; 2],
    pub inv_beta: f64,
    pub inv_eta: f64,
}

/// `ω⁻¹ G` as a field.
pub struct WeightedField<'a> {
    pub g: &'a NodalField,
    pub weights: &'a WeightParams,
}

impl ElementField for WeightedField<'_> {
    fn eval(&self, element: &Element, local: [f64; 2]) -> FieldValue {
        let gv = self.g.eval(element, local);
        let w = self.weights.omega_eval(element.map(local));
        FieldValue {
            value: w.inv * gv.value,
            grad: [
                w.inv_grad[0] * gv.value + w.inv * gv.grad[0],
                w.inv_grad[1] * gv.value + w.inv * gv.grad[1],
            ],
        }
    }
}

/// Nodal interpolant of a field given by its node values.
pub fn bilinear_interpolant<F>(mesh: &ShishkinMesh, mut f: F) -> NodalField
where
    F: FnMut(usize, usize, [f64; 2]) -> f64,
{
    NodalField::from_fn(mesh, |i, j, p| {
        let v = f(i, j, p);
        assert!(v.is_finite(), "interpolated field is not finite at node ({i}, {j})");
        v
    })
}

/// `(ω⁻¹ G)^I`.
pub fn weighted_interpolant(g: &NodalField, mesh: &ShishkinMesh, weights: &WeightParams) -> NodalField {
    bilinear_interpolant(mesh, |i, j, p| g.at(i, j) * weights.omega_eval(p).inv)
}

/// `E = ω⁻¹ G - (ω⁻¹ G)^I`.
pub struct InterpolationError<'a> {
    pub weighted: WeightedField<'a>,
    pub interpolant: NodalField,
}

impl<'a> InterpolationError<'a> {
    pub fn new(g: &'a NodalField, mesh: &ShishkinMesh, weights: &'a WeightParams) -> Self {
        InterpolationError {
            weighted: WeightedField { g, weights },
            interpolant: weighted_interpolant(g, mesh, weights),
        }
    }
}

impl ElementField for InterpolationError<'_> {
    fn eval(&self, element: &Element, local: [f64; 2]) -> FieldValue {
        let a = self.weighted.eval(element, local);
        let b = self.interpolant.eval(element, local);
        FieldValue {
            value: a.value - b.value,
            grad: [a.grad[0] - b.grad[0], a.grad[1] - b.grad[1]],
        }
    }
}

/// The four squared terms of `‖G‖_ω²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NormBreakdown {
    /// `(eps + b² δ) ‖ω^{-1/2} G_β‖²`
    pub t1: f64,
    /// `ε̂ ‖ω^{-1/2} G_η‖²`
    pub t2: f64,
    /// `(b/2) ‖((ω⁻¹)_β)^{1/2} G‖²`
    pub t3: f64,
    /// `‖ω^{-1/2} G‖²`
    pub t4: f64,
    /// Smallest sampled `(ω⁻¹)_β`; negative values would make `t3` meaningless.
    pub min_inv_beta: f64,
}

impl NormBreakdown {
    pub fn total(&self) -> f64 {
        self.t1 + self.t2 + self.t3 + self.t4
    }
}

/// Loops over quadrature points of every element with the point data needed
/// by the weighted integrals.
fn for_each_point<F>(mesh: &ShishkinMesh, order: usize, mut f: F)
where
    F: FnMut(&Element, [f64; 2], f64),
{
    let rule = TensorRule::new(order);
    for e in mesh.elements() {
        let area = e.area();
        for &(local, w) in &rule.nodes {
            f(&e, local, w * area);
        }
    }
}

pub fn weighted_norm(
    g: &NodalField,
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    weights: &WeightParams,
    order: usize,
) -> Result<NormBreakdown> {
    if order < 3 {
        return Err(Error::InvalidParameter(format!(
            "weighted integrals need quadrature order >= 3, got {order}"
        )));
    }
    let (beta, eta) = (spec.beta(), spec.eta());
    let b = spec.b_norm();
    let mut out = NormBreakdown {
        min_inv_beta: f64::INFINITY,
        ..Default::default()
    };
    for_each_point(mesh, order, |e, local, w| {
        let c = FormCoefficients::new(spec, profile, e.region);
        let gd = g.eval(e, local).directional(beta, eta);
        let we = weights.omega_eval(e.map(local));
        out.t1 += w * c.streamline * we.inv * gd.d_beta * gd.d_beta;
        out.t2 += w * c.crosswind * we.inv * gd.d_eta * gd.d_eta;
        out.t3 += w * 0.5 * b * we.inv_beta * gd.value * gd.value;
        out.t4 += w * we.inv * gd.value * gd.value;
        out.min_inv_beta = out.min_inv_beta.min(we.inv_beta);
    });
    Ok(out)
}

/// Both sides of the identity
/// `‖G‖_ω² = B(ω⁻¹G, G) - (eps + b²δ)((ω⁻¹)_β G, G_β) - ε̂((ω⁻¹)_η G, G_η) - bδ(ω⁻¹G, G_β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityQuantities {
    /// `B(ω⁻¹G, G)`
    pub form_value: f64,
    pub norm: NormBreakdown,
    pub norm_sq: f64,
    pub correction_streamline: f64,
    pub correction_crosswind: f64,
    pub correction_delta: f64,
}

impl CoercivityQuantities {
    pub fn corrections(&self) -> f64 {
        self.correction_streamline + self.correction_crosswind + self.correction_delta
    }

    /// `‖G‖_ω² - (B(ω⁻¹G, G) - corrections)`.
    pub fn identity_residual(&self) -> f64 {
        self.norm_sq - (self.form_value - self.corrections())
    }

    /// `B(ω⁻¹G, G) / ‖G‖_ω²`; zero for `G = 0`.
    pub fn ratio(&self) -> f64 {
        if self.norm_sq == 0.0 {
            0.0
        } else {
            self.form_value / self.norm_sq
        }
    }
}

pub fn coercivity_quantities(
    g: &NodalField,
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    weights: &WeightParams,
    order: usize,
) -> Result<CoercivityQuantities> {
    let norm = weighted_norm(g, mesh, spec, profile, weights, order)?;
    let field = WeightedField { g, weights };
    let form_value = apply_form(&field, g, mesh, spec, profile, order);
    let (beta, eta) = (spec.beta(), spec.eta());
    let (mut cs, mut cc, mut cd) = (0.0, 0.0, 0.0);
    for_each_point(mesh, order, |e, local, w| {
        let c = FormCoefficients::new(spec, profile, e.region);
        let gd = g.eval(e, local).directional(beta, eta);
        let we = weights.omega_eval(e.map(local));
        cs += w * c.streamline * we.inv_beta * gd.value * gd.d_beta;
        cc += w * c.crosswind * we.inv_eta * gd.value * gd.d_eta;
        cd += w * c.load_streamline * we.inv * gd.value * gd.d_beta;
    });
    Ok(CoercivityQuantities {
        form_value,
        norm,
        norm_sq: norm.total(),
        correction_streamline: cs,
        correction_crosswind: cc,
        correction_delta: cd,
    })
}

/// `∫_0^H |f0 (1 - t/H) + f1 t/H| dt` in closed form.
pub fn abs_linear_integral(f0: f64, f1: f64, h: f64) -> f64 {
    assert!(h > 0.0, "interval length must be positive");
    if f0 * f1 >= 0.0 {
        0.5 * (f0.abs() + f1.abs()) * h
    } else {
        0.5 * (f0 * f0 + f1 * f1) / (f1 - f0).abs() * h
    }
}

/// Weighted interpolation-error norms and the other per-lemma quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaQuantities {
    pub n: usize,
    pub epsilon: f64,
    pub k: f64,
    pub norm_sq: f64,
    /// `|(ω⁻¹ G)(x*)|`
    pub weighted_value_at_anchor: f64,
    /// `(|(ω⁻¹G)(x*)| - ‖G‖_ω²/16) / (N ln N)`
    pub anchor_constant: f64,
    /// `‖ω^{1/2} E_β‖` on the coarse region and on the layers.
    pub e_beta_smooth: f64,
    pub e_beta_layers: f64,
    pub e_eta_smooth: f64,
    pub e_eta_layers: f64,
    /// `‖ω^{1/2} E‖` on the coarse region and on the layers.
    pub e_smooth: f64,
    pub e_layers: f64,
    /// `B(E, G)`
    pub form_error: f64,
    /// `max (ω⁻¹)_β⁻¹ / σ_β` over the element south-west of `x*`.
    pub anchor_element_constant: Option<f64>,
}

impl LemmaQuantities {
    fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    fn ratio(value: f64, scale: f64) -> f64 {
        if scale == 0.0 {
            0.0
        } else {
            value / scale
        }
    }

    /// `e_*_smooth / (k^{-1/2} N^{1/2} ‖G‖_ω)`
    pub fn derivative_constant_smooth(&self) -> f64 {
        let s = (self.n as f64).sqrt() / self.k.sqrt() * self.norm();
        Self::ratio(self.e_beta_smooth.max(self.e_eta_smooth), s)
    }

    /// `e_*_layers / (k^{-1} eps^{-1/2} ln^{-1} N ‖G‖_ω)`
    pub fn derivative_constant_layers(&self) -> f64 {
        let n = self.n as f64;
        let s = self.norm() / (self.k * self.epsilon.sqrt() * n.ln());
        Self::ratio(self.e_beta_layers.max(self.e_eta_layers), s)
    }

    /// `e_smooth / (k^{-1} N^{-1/2} ‖G‖_ω)`
    pub fn interpolation_constant_smooth(&self) -> f64 {
        let s = self.norm() / (self.k * (self.n as f64).sqrt());
        Self::ratio(self.e_smooth, s)
    }

    /// `e_layers / (k^{-1} eps^{1/2} ‖G‖_ω)`
    pub fn interpolation_constant_layers(&self) -> f64 {
        let s = self.norm() * self.epsilon.sqrt() / self.k;
        Self::ratio(self.e_layers, s)
    }

    /// `|B(E, G)| / ‖G‖_ω²`, to be compared with `1/16`.
    pub fn form_error_ratio(&self) -> f64 {
        Self::ratio(self.form_error.abs(), self.norm_sq)
    }

    /// `‖ω^{1/2} E‖_{coarse} / ‖G‖_ω`
    pub fn interpolation_ratio_smooth(&self) -> f64 {
        Self::ratio(self.e_smooth, self.norm())
    }

    /// Flat `(name, value, implied constant)` records.
    pub fn records(&self) -> Vec<(&'static str, f64, Option<f64>)> {
        vec![
            ("norm_sq", self.norm_sq, None),
            (
                "weighted_value_at_anchor",
                self.weighted_value_at_anchor,
                Some(self.anchor_constant),
            ),
            (
                "e_beta_smooth",
                self.e_beta_smooth,
                Some(self.derivative_constant_smooth()),
            ),
            (
                "e_eta_smooth",
                self.e_eta_smooth,
                Some(self.derivative_constant_smooth()),
            ),
            (
                "e_beta_layers",
                self.e_beta_layers,
                Some(self.derivative_constant_layers()),
            ),
            (
                "e_eta_layers",
                self.e_eta_layers,
                Some(self.derivative_constant_layers()),
            ),
            ("e_smooth", self.e_smooth, Some(self.interpolation_constant_smooth())),
            ("e_layers", self.e_layers, Some(self.interpolation_constant_layers())),
            ("form_error", self.form_error, Some(self.form_error_ratio())),
            (
                "anchor_element",
                self.anchor_element_constant.unwrap_or(f64::NAN),
                self.anchor_element_constant,
            ),
        ]
    }
}

#[allow(clippy::too_many_arguments)]
pub fn lemma_quantities(
    g: &NodalField,
    anchor: (usize, usize),
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    weights: &WeightParams,
    norm_sq: f64,
    order: usize,
) -> LemmaQuantities {
    let (beta, eta) = (spec.beta(), spec.eta());
    let err = InterpolationError::new(g, mesh, weights);
    let mut acc = [0.0f64; 6];
    for_each_point(mesh, order, |e, local, w| {
        let ed = err.eval(e, local).directional(beta, eta);
        let om = weights.omega(e.map(local));
        let base = if e.region == Region::Smooth { 0 } else { 1 };
        acc[base] += w * om * ed.d_beta * ed.d_beta;
        acc[2 + base] += w * om * ed.d_eta * ed.d_eta;
        acc[4 + base] += w * om * ed.value * ed.value;
    });
    let form_error = apply_form(&err, g, mesh, spec, profile, order);

    let x_star = mesh.node(anchor.0, anchor.1);
    let at_anchor = (g.at(anchor.0, anchor.1) * weights.omega_eval(x_star).inv).abs();
    let nf = mesh.n as f64;
    let anchor_element_constant = (anchor.0 > 0 && anchor.1 > 0).then(|| {
        let e = mesh.element(anchor.0 - 1, anchor.1 - 1);
        let mut worst = 0.0f64;
        for a in 0..=4 {
            for b in 0..=4 {
                let p = e.map([a as f64 / 4.0, b as f64 / 4.0]);
                worst = worst.max(1.0 / weights.omega_eval(p).inv_beta);
            }
        }
        worst / weights.sigma_beta
    });
    LemmaQuantities {
        n: mesh.n,
        epsilon: spec.epsilon,
        k: weights.k,
        norm_sq,
        weighted_value_at_anchor: at_anchor,
        anchor_constant: (at_anchor - norm_sq / 16.0) / (nf * nf.ln()),
        e_beta_smooth: acc[0].sqrt(),
        e_beta_layers: acc[1].sqrt(),
        e_eta_smooth: acc[2].sqrt(),
        e_eta_layers: acc[3].sqrt(),
        e_smooth: acc[4].sqrt(),
        e_layers: acc[5].sqrt(),
        form_error,
        anchor_element_constant,
    }
}

/// Sanity helper for tests and reports: the interpolant of a field at a
/// point of an element, evaluated from the node values.
pub fn interpolant_at(field: &NodalField, element: &Element, local: [f64; 2]) -> f64 {
    local_basis(element, local)
        .iter()
        .zip(element.corners())
        .map(|(phi, (i, j))| phi.value * field.at(i, j))
        .sum()
}
