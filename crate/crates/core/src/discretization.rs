//! A mesh, its problem data and the factored system, kept together so the
//! primal solve and any number of Green functions share one factorization.

use crate::assembly::{assemble, NodalField, SparseSystem, StabilizationProfile};
use crate::error::Result;
use crate::greens::GreenFunction;
use crate::mesh::{build_mesh, MeshParams, ProblemSpec, ShishkinMesh};
use crate::solver::{Method, SolveReport, Solver};

pub struct Discretization {
    pub mesh: ShishkinMesh,
    pub spec: ProblemSpec,
    pub profile: StabilizationProfile,
    pub system: SparseSystem,
    solver: Solver,
}

impl Discretization {
    /// Shishkin mesh with `n` intervals per axis and the crosswind-augmented scheme.
    pub fn new(n: usize, spec: ProblemSpec) -> Result<Self> {
        let mesh = build_mesh(&MeshParams::new(n, spec.clone())?);
        let profile = StabilizationProfile::new(n, spec.epsilon);
        Self::with_profile(mesh, spec, profile)
    }

    pub fn with_profile(mesh: ShishkinMesh, spec: ProblemSpec, profile: StabilizationProfile) -> Result<Self> {
        let system = assemble(&mesh, &spec, &profile);
        let solver = Solver::new(system.matrix.clone(), Method::Auto)?;
        Ok(Discretization {
            mesh,
            spec,
            profile,
            system,
            solver,
        })
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    /// Discrete solution `U`.
    pub fn solve(&self, tol: f64) -> Result<(NodalField, SolveReport)> {
        let report = self.solver.solve(&self.system.rhs, tol, false)?;
        let u = NodalField::from_interior(&self.system.dofs, &report.solution);
        Ok((u, report))
    }

    /// Green function anchored at interior node `anchor`.
    pub fn green(&self, anchor: (usize, usize), tol: f64) -> Result<GreenFunction> {
        GreenFunction::compute(self, anchor, tol)
    }
}
