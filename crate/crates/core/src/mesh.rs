//! Model problem data and the piecewise-uniform Shishkin mesh.
//!
//! The mesh has `N` intervals per axis. The first `N/2` intervals of each
//! axis are coarse (width `H`), the last `N/2` are fine (width `h`) and
//! resolve the exponential layers at `x = 1` and `y = 1`.
//!
//! Element indices are zero based: element `(i, j)` is
//! `[x_i, x_{i+1}] x [y_j, y_{j+1}]`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-hand side `f` of the model problem.
#[derive(Clone, Default)]
pub enum Source {
    Zero,
    #[default]
    One,
    /// `f(x, y) = 1 + x y + x^2`.
    Polynomial,
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Source {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::One => 1.0,
            Source::Polynomial => 1.0 + x * y + x * x,
            Source::Custom(f) => f(x, y),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Source::Zero => "zero",
            Source::One => "one",
            Source::Polynomial => "poly",
            Source::Custom(_) => "custom",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "zero" | "0" => Ok(Source::Zero),
            "one" | "1" => Ok(Source::One),
            "poly" | "polynomial" => Ok(Source::Polynomial),
            other => Err(Error::InvalidParameter(format!("unknown source '{other}'"))),
        }
    }
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `-eps Δu + b·∇u + u = f` on the unit square with `u = 0` on the boundary.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub epsilon: f64,
    pub b: [f64; 2],
    pub source: Source,
}

impl ProblemSpec {
    pub fn new(epsilon: f64, b: [f64; 2], source: Source) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(b[0] > 0.0 && b[1] > 0.0 && b[0].is_finite() && b[1].is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "convection must be componentwise positive, got ({}, {})",
                b[0], b[1]
            )));
        }
        Ok(ProblemSpec { epsilon, b, source })
    }

    /// Euclidean length of `b`.
    pub fn b_norm(&self) -> f64 {
        self.b[0].hypot(self.b[1])
    }

    /// Unit streamline direction.
    pub fn beta(&self) -> [f64; 2] {
        let n = self.b_norm();
        [self.b[0] / n, self.b[1] / n]
    }

    /// Unit crosswind direction, `beta` rotated by +90 degrees.
    pub fn eta(&self) -> [f64; 2] {
        let n = self.b_norm();
        [-self.b[1] / n, self.b[0] / n]
    }
}

/// One of the four mesh subdomains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Coarse part `[0, 1-λx] x [0, 1-λy]`.
    Smooth,
    /// Layer along `x = 1`.
    LayerX,
    /// Layer along `y = 1`.
    LayerY,
    /// Corner layer.
    Corner,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Smooth, Region::LayerX, Region::LayerY, Region::Corner];

    fn from_sides(fine_x: bool, fine_y: bool) -> Self {
        match (fine_x, fine_y) {
            (false, false) => Region::Smooth,
            (true, false) => Region::LayerX,
            (false, true) => Region::LayerY,
            (true, true) => Region::Corner,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Region::Smooth => "s",
            Region::LayerX => "x",
            Region::LayerY => "y",
            Region::Corner => "xy",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone)]
pub struct MeshParams {
    pub n: usize,
    pub spec: ProblemSpec,
}

impl MeshParams {
    /// `n` must be even. Four intervals is the smallest mesh accepted, it
    /// keeps the 9-unknown system available for brute-force comparisons.
    pub fn new(n: usize, spec: ProblemSpec) -> Result<Self> {
        validate_n(n)?;
        Ok(MeshParams { n, spec })
    }
}

fn validate_n(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "N must be an even integer >= 4, got {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionParameters {
    pub lambda_x: f64,
    pub lambda_y: f64,
    /// λx came from the `2 (eps/b1) ln N` branch rather than the cap `1/2`.
    pub x_layer_branch: bool,
    pub y_layer_branch: bool,
    /// `eps <= 1/N` and both parameters on their layer branch.
    pub assumption1: bool,
}

/// `λ = min{1/2, 2 (eps / b_i) ln N}` per axis.
pub fn transition_parameters(params: &MeshParams) -> TransitionParameters {
    let n = params.n as f64;
    let eps = params.spec.epsilon;
    let [b1, b2] = params.spec.b;
    let tx = 2.0 * eps / b1 * n.ln();
    let ty = 2.0 * eps / b2 * n.ln();
    let x_layer_branch = tx < 0.5;
    let y_layer_branch = ty < 0.5;
    TransitionParameters {
        lambda_x: tx.min(0.5),
        lambda_y: ty.min(0.5),
        x_layer_branch,
        y_layer_branch,
        assumption1: eps <= 1.0 / n && x_layer_branch && y_layer_branch,
    }
}

/// A rectangle of the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub i: usize,
    pub j: usize,
    /// South-west corner.
    pub origin: [f64; 2],
    pub hx: f64,
    pub hy: f64,
    pub region: Region,
}

impl Element {
    /// Physical point of the local coordinates `(s, t)` in `[0, 1]^2`.
    pub fn map(&self, local: [f64; 2]) -> [f64; 2] {
        [self.origin[0] + self.hx * local[0], self.origin[1] + self.hy * local[1]]
    }

    pub fn area(&self) -> f64 {
        self.hx * self.hy
    }

    /// Node indices in the fixed corner order SW, SE, NE, NW.
    pub fn corners(&self) -> [(usize, usize); 4] {
        let (i, j) = (self.i, self.j);
        [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
    }
}

/// Tensor-product Shishkin mesh. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ShishkinMesh {
    pub n: usize,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub coarse_hx: f64,
    pub fine_hx: f64,
    pub coarse_hy: f64,
    pub fine_hy: f64,
    /// Problem data echoed for dumps; `None` when built from explicit λ.
    pub epsilon: Option<f64>,
    pub b: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDump {
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: Option<f64>,
    pub b: Option<[f64; 2]>,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub x_coords: Vec<f64>,
    pub y_coords: Vec<f64>,
}

/// Node coordinates of one axis, each evaluated directly from its branch formula.
fn axis_coordinates(n: usize, lambda: f64) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|i| {
            if i <= n / 2 {
                (2.0 * i as f64 / nf) * (1.0 - lambda)
            } else {
                1.0 - (2.0 * (n - i) as f64 / nf) * lambda
            }
        })
        .collect()
}

pub fn build_mesh(params: &MeshParams) -> ShishkinMesh {
    let t = transition_parameters(params);
    let mut mesh = ShishkinMesh::from_transition(params.n, t.lambda_x, t.lambda_y)
        .expect("validated parameters give a valid mesh");
    mesh.epsilon = Some(params.spec.epsilon);
    mesh.b = Some(params.spec.b);
    mesh
}

impl ShishkinMesh {
    pub fn new(params: &MeshParams) -> Self {
        build_mesh(params)
    }

    /// Mesh with prescribed transition points, `0 < λ <= 1/2`.
    pub fn from_transition(n: usize, lambda_x: f64, lambda_y: f64) -> Result<Self> {
        validate_n(n)?;
        for l in [lambda_x, lambda_y] {
            if !(l > 0.0 && l <= 0.5) {
                return Err(Error::InvalidParameter(format!(
                    "transition parameter must lie in (0, 1/2], got {l}"
                )));
            }
        }
        let half = (n / 2) as f64;
        Ok(ShishkinMesh {
            n,
            lambda_x,
            lambda_y,
            x: axis_coordinates(n, lambda_x),
            y: axis_coordinates(n, lambda_y),
            coarse_hx: (1.0 - lambda_x) / half,
            fine_hx: lambda_x / half,
            coarse_hy: (1.0 - lambda_y) / half,
            fine_hy: lambda_y / half,
            epsilon: None,
            b: None,
        })
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x[i], self.y[j]]
    }

    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        i > 0 && j > 0 && i < self.n && j < self.n
    }

    pub fn element_region(&self, i: usize, j: usize) -> Region {
        let half = self.n / 2;
        Region::from_sides(i >= half, j >= half)
    }

    pub fn element(&self, i: usize, j: usize) -> Element {
        Element {
            i,
            j,
            origin: [self.x[i], self.y[j]],
            hx: self.x[i + 1] - self.x[i],
            hy: self.y[j + 1] - self.y[j],
            region: self.element_region(i, j),
        }
    }

    /// All `N^2` elements, row by row from the south.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.n).flat_map(move |j| (0..self.n).map(move |i| self.element(i, j)))
    }

    /// Region of a point. Points on the transition lines belong to the fine side.
    pub fn region_of_point(&self, p: [f64; 2]) -> Result<Region> {
        let inside = |v: f64| (0.0..=1.0).contains(&v);
        if !(inside(p[0]) && inside(p[1])) {
            return Err(Error::OutOfDomain(p[0], p[1]));
        }
        let half = self.n / 2;
        Ok(Region::from_sides(p[0] >= self.x[half], p[1] >= self.y[half]))
    }

    /// Region of node `(i, j)`, using the same interface convention.
    pub fn node_region(&self, i: usize, j: usize) -> Region {
        let half = self.n / 2;
        Region::from_sides(i >= half, j >= half)
    }

    /// Element containing `p` (the one to the north-east on shared edges,
    /// clamped at the outer boundary).
    pub fn locate(&self, p: [f64; 2]) -> Result<(usize, usize)> {
        self.region_of_point(p)?;
        let find = |coords: &[f64], v: f64| {
            let k = coords.partition_point(|&c| c <= v);
            k.saturating_sub(1).min(self.n - 1)
        };
        Ok((find(&self.x, p[0]), find(&self.y, p[1])))
    }

    pub fn dump(&self) -> MeshDump {
        MeshDump {
            n: self.n,
            epsilon: self.epsilon,
            b: self.b,
            lambda_x: self.lambda_x,
            lambda_y: self.lambda_y,
            x_coords: self.x.clone(),
            y_coords: self.y.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.dump())?)
    }
}
