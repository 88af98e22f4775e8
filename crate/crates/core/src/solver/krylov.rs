//! Jacobi-preconditioned BiCGStab, used when the band factorization is too
//! large or fails to reach the requested residual.

use crate::sparse::CsrMatrix;

pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub relative_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn bicgstab(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    transpose: bool,
    tol: f64,
    max_iter: usize,
) -> KrylovOutcome {
    let n = rhs.len();
    let apply = |v: &[f64]| if transpose { a.matvec_transpose(v) } else { a.matvec(v) };
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.get(i, i);
            if d != 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let precond = |v: &[f64]| v.iter().zip(&inv_diag).map(|(a, d)| a * d).collect::<Vec<_>>();

    let bnorm = norm(rhs);
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    if bnorm == 0.0 {
        return KrylovOutcome {
            x: vec![0.0; n],
            relative_residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let ax = apply(&x);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
    let r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut best = (norm(&r) / bnorm, x.clone());

    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat = precond(&p);
        v = apply(&p_hat);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 {
            break;
        }
        alpha = rho / denom;
        let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        let s_hat = precond(&s);
        let t = apply(&s_hat);
        let tt = dot(&t, &t);
        omega = if tt == 0.0 { 0.0 } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm(&r) / bnorm;
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if rel <= tol {
            // recompute the true residual, the recursive one drifts
            let ax = apply(&x);
            let true_rel = norm(&rhs.iter().zip(&ax).map(|(b, v)| b - v).collect::<Vec<_>>()) / bnorm;
            if true_rel <= tol {
                return KrylovOutcome {
                    x,
                    relative_residual: true_rel,
                    iterations: it,
                    converged: true,
                };
            }
            r = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
        }
        if omega == 0.0 {
            break;
        }
    }
    KrylovOutcome {
        x: best.1,
        relative_residual: best.0,
        iterations: max_iter,
        converged: false,
    }
}
