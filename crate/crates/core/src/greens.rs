//! Discrete Green functions: `G` in the discrete space with
//! `B(v, G) = v(x*)` for every discrete `v`, i.e. `A^T g = e_{x*}`.

use serde::Serialize;

use crate::assembly::{form_basis_trial, NodalField, StabilizationProfile, DEFAULT_ORDER};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::mesh::{ProblemSpec, Region, ShishkinMesh};
use crate::solver::SolveReport;
use crate::weights::WeightParams;

#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub anchor: (usize, usize),
    pub point: [f64; 2],
    pub field: NodalField,
    pub report: SolveReport,
}

impl GreenFunction {
    pub fn compute(disc: &Discretization, anchor: (usize, usize), tol: f64) -> Result<Self> {
        let (i, j) = anchor;
        let dofs = disc.system.dofs;
        let Some(p) = dofs.index(i, j).filter(|_| i <= disc.mesh.n && j <= disc.mesh.n) else {
            return Err(Error::NotInterior(i, j));
        };
        let mut e = vec![0.0; dofs.len()];
        e[p] = 1.0;
        let report = disc.solver().solve(&e, tol, true)?;
        Ok(GreenFunction {
            anchor,
            point: disc.mesh.node(i, j),
            field: NodalField::from_interior(&dofs, &report.solution),
            report,
        })
    }

    pub fn value_at_anchor(&self) -> f64 {
        self.field.at(self.anchor.0, self.anchor.1)
    }

    /// `max_p |B(φ_p, G) - φ_p(x*)|`, with `B` evaluated by quadrature
    /// independently of the assembled matrix.
    pub fn definition_residual(&self, mesh: &ShishkinMesh, spec: &ProblemSpec, profile: &StabilizationProfile) -> f64 {
        let dofs = crate::assembly::DofMap::new(mesh.n);
        let anchor = dofs.index(self.anchor.0, self.anchor.1);
        form_basis_trial(&self.field, mesh, spec, profile, DEFAULT_ORDER)
            .iter()
            .enumerate()
            .map(|(p, v)| (v - if Some(p) == anchor { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }
}

/// Convenience wrapper that assembles and factors a fresh system.
pub fn discrete_green(
    mesh: &ShishkinMesh,
    spec: &ProblemSpec,
    profile: &StabilizationProfile,
    anchor: (usize, usize),
    tol: f64,
) -> Result<GreenFunction> {
    let disc = Discretization::with_profile(mesh.clone(), spec.clone(), *profile)?;
    GreenFunction::compute(&disc, anchor, tol)
}

/// One row of the decay table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    /// `(x - x*)·β / σ_β`
    pub s_beta: f64,
    /// `(x - x*)·η / σ_η`
    pub s_eta: f64,
    pub region: Region,
    pub abs_g: f64,
}

/// Maximum of `|G|` over nodes in ring `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingMax {
    pub m: usize,
    pub nodes: usize,
    /// `None` when no node falls into the ring.
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub rows: Vec<DecayRow>,
    pub rings: Vec<RingMax>,
}

impl DecayProfile {
    pub fn ring(&self, m: usize) -> Option<f64> {
        self.rings.get(m).and_then(|r| r.max)
    }

    /// `M_m` is nonincreasing for `m >= from` over the nonempty rings.
    pub fn rings_nonincreasing_from(&self, from: usize) -> bool {
        let vals: Vec<f64> = self.rings.iter().skip(from).filter_map(|r| r.max).collect();
        vals.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i", "j", "x", "y", "s_beta", "s_eta", "region", "absG"])?;
        for r in &self.rows {
            out.write_record([
                r.i.to_string(),
                r.j.to_string(),
                format!("{:.17e}", r.x),
                format!("{:.17e}", r.y),
                format!("{:.17e}", r.s_beta),
                format!("{:.17e}", r.s_eta),
                r.region.label().to_string(),
                format!("{:.17e}", r.abs_g),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Per-node magnitudes with scaled streamline/crosswind offsets, and ring
/// maxima over `m <= max(|s_β|, |s_η|) / ln N < m + 1`.
pub fn green_decay_profile(g: &NodalField, mesh: &ShishkinMesh, weights: &WeightParams) -> DecayProfile {
    let ln_n = (mesh.n as f64).ln();
    let mut rows = Vec::with_capacity(g.values.len());
    let mut rings: Vec<RingMax> = Vec::new();
    for j in 0..=mesh.n {
        for i in 0..=mesh.n {
            let p = mesh.node(i, j);
            let (sb, se) = weights.offsets(p);
            let row = DecayRow {
                i,
                j,
                x: p[0],
                y: p[1],
                s_beta: sb / weights.sigma_beta,
                s_eta: se / weights.sigma_eta,
                region: mesh.node_region(i, j),
                abs_g: g.at(i, j).abs(),
            };
            let m = (row.s_beta.abs().max(row.s_eta.abs()) / ln_n).floor() as usize;
            while rings.len() <= m {
                rings.push(RingMax {
                    m: rings.len(),
                    nodes: 0,
                    max: None,
                });
            }
            let ring = &mut rings[m];
            ring.nodes += 1;
            ring.max = Some(ring.max.map_or(row.abs_g, |v| v.max(row.abs_g)));
            rows.push(row);
        }
    }
    DecayProfile { rows, rings }
}

/// Elements treated as a neighbourhood of the anchor and left out of sup norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    n: usize,
    excluded: Vec<bool>,
}

impl Exclusion {
    pub fn none(n: usize) -> Self {
        Exclusion {
            n,
            excluded: vec![false; n * n],
        }
    }

    pub fn all(n: usize) -> Self {
        Exclusion {
            n,
            excluded: vec![true; n * n],
        }
    }

    /// Union of elements containing a point with `ω >= N^{-K}`. Each element
    /// is probed on a 5x5 grid plus the point nearest to `x*`.
    pub fn from_weight(mesh: &ShishkinMesh, weights: &WeightParams, big_k: f64) -> Self {
        let threshold = (mesh.n as f64).powf(-big_k);
        let mut ex = Self::none(mesh.n);
        for e in mesh.elements() {
            let xs = weights.x_star;
            let nearest = [
                xs[0].clamp(e.origin[0], e.origin[0] + e.hx),
                xs[1].clamp(e.origin[1], e.origin[1] + e.hy),
            ];
            let mut hit = weights.omega(nearest) >= threshold;
            'probe: for a in 0..=4 {
                for b in 0..=4 {
                    if hit {
                        break 'probe;
                    }
                    hit = weights.omega(e.map([a as f64 / 4.0, b as f64 / 4.0])) >= threshold;
                }
            }
            ex.excluded[e.j * mesh.n + e.i] = hit;
        }
        ex
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.excluded[j * self.n + i]
    }

    pub fn count(&self) -> usize {
        self.excluded.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W1InfNorms {
    pub sup_value: f64,
    pub sup_grad: f64,
    pub elements: usize,
}

/// Sup of `|G|` over nodes and of `|∇G|` over element centres and corners,
/// restricted to elements in `regions` outside `excluded`.
pub fn w1inf_norms(
    g: &NodalField,
    mesh: &ShishkinMesh,
    regions: &[Region],
    excluded: &Exclusion,
) -> Result<W1InfNorms> {
    use crate::assembly::ElementField;
    let mut out = W1InfNorms {
        sup_value: 0.0,
        sup_grad: 0.0,
        elements: 0,
    };
    const PROBES: [[f64; 2]; 5] = [[0.5, 0.5], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    for e in mesh.elements() {
        if !regions.contains(&e.region) || excluded.contains(e.i, e.j) {
            continue;
        }
        out.elements += 1;
        for (i, j) in e.corners() {
            out.sup_value = out.sup_value.max(g.at(i, j).abs());
        }
        for local in PROBES {
            let fv = g.eval(&e, local);
            out.sup_grad = out.sup_grad.max(fv.grad[0].hypot(fv.grad[1]));
        }
    }
    if out.elements == 0 {
        return Err(Error::EmptySet);
    }
    Ok(out)
}
