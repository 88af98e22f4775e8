//! Linear solves for the assembled nonsymmetric systems.
//!
//! The default path is a band LU factorization followed by a few steps of
//! iterative refinement. A factorization can be reused for the primal
//! (`A u = r`) and the adjoint (`A^T g = e`) problem.

mod banded;
mod krylov;

use std::time::{Duration, Instant};

use serde::Serialize;

pub use banded::BandedLu;
pub use krylov::bicgstab;

use crate::assembly::SparseSystem;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Band storage above this size switches the automatic method to BiCGStab.
const MAX_BAND_BYTES: usize = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Auto,
    BandedLu,
    BiCgStab,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: Vec<f64>,
    pub relative_residual: f64,
    pub iterations: usize,
    pub method: String,
    #[serde(skip)]
    pub wall_time: Duration,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &CsrMatrix, x: &[f64], rhs: &[f64], transpose: bool) -> (f64, Vec<f64>) {
    let ax = if transpose { a.matvec_transpose(x) } else { a.matvec(x) };
    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
    let bn = norm(rhs);
    let rel = if bn == 0.0 { norm(&r) } else { norm(&r) / bn };
    (rel, r)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::InvalidParameter(format!(
            "solver tolerance must lie in (0, 1e-4], got {tol}"
        )));
    }
    Ok(())
}

/// A matrix together with whatever factorization the chosen method needs.
pub struct Solver {
    matrix: CsrMatrix,
    lu: Option<BandedLu>,
    method: Method,
    factor_time: Duration,
}

impl Solver {
    pub fn new(matrix: CsrMatrix, method: Method) -> Result<Self> {
        if matrix.nrows != matrix.ncols || matrix.nrows == 0 {
            return Err(Error::InvalidParameter(format!(
                "expected a nonempty square matrix, got {} x {}",
                matrix.nrows, matrix.ncols
            )));
        }
        let (kl, ku) = matrix.bandwidth();
        let use_lu = match method {
            Method::BandedLu => true,
            Method::BiCgStab => false,
            Method::Auto => BandedLu::storage_bytes(matrix.nrows, kl, ku) <= MAX_BAND_BYTES,
        };
        let start = Instant::now();
        let lu = if use_lu { Some(BandedLu::factor(&matrix)?) } else { None };
        Ok(Solver {
            matrix,
            lu,
            method,
            factor_time: start.elapsed(),
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Solves `A x = rhs` (or `A^T x = rhs`) to relative residual `tol`.
    pub fn solve(&self, rhs: &[f64], tol: f64, transpose: bool) -> Result<SolveReport> {
        check_tol(tol)?;
        let n = self.matrix.nrows;
        if rhs.len() != n {
            return Err(Error::InvalidParameter(format!(
                "right-hand side has length {}, expected {n}",
                rhs.len()
            )));
        }
        let start = Instant::now();
        if rhs.iter().all(|&v| v == 0.0) {
            return Ok(SolveReport {
                solution: vec![0.0; n],
                relative_residual: 0.0,
                iterations: 0,
                method: "trivial".into(),
                wall_time: start.elapsed(),
            });
        }

        let mut x = vec![0.0; n];
        let mut iterations = 0;
        let mut method = String::new();
        let mut rel = f64::INFINITY;

        if let Some(lu) = &self.lu {
            x.copy_from_slice(rhs);
            if transpose {
                lu.solve_transpose_in_place(&mut x);
            } else {
                lu.solve_in_place(&mut x);
            }
            let (mut r_rel, mut res) = relative_residual(&self.matrix, &x, rhs, transpose);
            // iterative refinement
            while r_rel > tol && iterations < 5 {
                if transpose {
                    lu.solve_transpose_in_place(&mut res);
                } else {
                    lu.solve_in_place(&mut res);
                }
                x.iter_mut().zip(&res).for_each(|(a, d)| *a += d);
                iterations += 1;
                (r_rel, res) = relative_residual(&self.matrix, &x, rhs, transpose);
            }
            rel = r_rel;
            method = format!("banded-lu+{iterations}-refinement");
        }

        if rel > tol && self.method != Method::BandedLu {
            let guess = if self.lu.is_some() { Some(x.as_slice()) } else { None };
            let out = bicgstab(&self.matrix, rhs, guess, transpose, tol, 20 * n.max(100));
            iterations += out.iterations;
            if out.relative_residual < rel {
                x = out.x;
                rel = out.relative_residual;
            }
            method = if method.is_empty() {
                "bicgstab".into()
            } else {
                format!("{method}+bicgstab")
            };
        }

        if rel.is_nan() || rel > tol {
            return Err(Error::NotConverged {
                residual: rel,
                iterations,
                best: x,
            });
        }
        Ok(SolveReport {
            solution: x,
            relative_residual: rel,
            iterations,
            method,
            wall_time: start.elapsed() + self.factor_time,
        })
    }
}

/// One-shot solve of an assembled system.
pub fn solve(system: &SparseSystem, tol: f64, transpose: bool) -> Result<SolveReport> {
    solve_matrix(&system.matrix, &system.rhs, tol, transpose)
}

pub fn solve_matrix(a: &CsrMatrix, rhs: &[f64], tol: f64, transpose: bool) -> Result<SolveReport> {
    check_tol(tol)?;
    Solver::new(a.clone(), Method::Auto)?.solve(rhs, tol, transpose)
}
