//! Band LU factorization with partial (row) pivoting.
//!
//! Row `i` of the working array stores columns `i - kl ..= i + kl + ku`:
//! row interchanges can push the upper bandwidth of `U` from `ku` to
//! `kl + ku`. Multipliers stay in the row where they were computed and the
//! interchanges are replayed during the solves, so one factorization
//! serves both `A x = b` and `A^T x = b`.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Bytes needed for the working array of an `n x n` matrix with the given bands.
    pub fn storage_bytes(n: usize, kl: usize, ku: usize) -> usize {
        n * (2 * kl + ku + 1) * std::mem::size_of::<f64>()
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows, a.ncols, "matrix must be square");
        let n = a.nrows;
        let (kl, ku) = a.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            piv: vec![0; n],
        };
        for i in 0..n {
            for (j, v) in a.row(i) {
                *lu.at_mut(i, j) = v;
            }
        }
        lu.eliminate()?;
        Ok(lu)
    }

    #[inline]
    fn pos(&self, i: usize, col: usize) -> usize {
        debug_assert!(col + self.kl >= i && col <= i + self.kl + self.ku);
        i * self.width + (col + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, col: usize) -> f64 {
        self.data[self.pos(i, col)]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, col: usize) -> &mut f64 {
        let p = self.pos(i, col);
        &mut self.data[p]
    }

    fn eliminate(&mut self) -> Result<()> {
        let n = self.n;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.at(k, k).abs();
            for i in k + 1..=last {
                let v = self.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { column: k });
            }
            self.piv[k] = p;
            let cmax = (k + self.kl + self.ku).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let (a, b) = (self.pos(k, c), self.pos(p, c));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.at(k, k);
            let krow = self.pos(k, k);
            for i in k + 1..=last {
                let l = self.at(i, k) / pivot;
                *self.at_mut(i, k) = l;
                if l == 0.0 {
                    continue;
                }
                let irow = self.pos(i, k);
                for off in 1..=(cmax - k) {
                    self.data[irow + off] -= l * self.data[krow + off];
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    b[i] -= self.at(i, k) * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let row = self.pos(i, i);
            let cmax = (i + self.kl + self.ku).min(n - 1);
            let mut s = b[i];
            for (off, c) in (i + 1..=cmax).enumerate() {
                s -= self.data[row + off + 1] * b[c];
            }
            b[i] = s / self.data[row];
        }
    }

    /// Overwrites `b` with the solution of `A^T x = b`.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let reach = self.kl + self.ku;
        for j in 0..n {
            let mut s = b[j];
            for k in j.saturating_sub(reach)..j {
                s -= self.at(k, j) * b[k];
            }
            b[j] = s / self.at(j, j);
        }
        for k in (0..n).rev() {
            let mut s = 0.0;
            for i in k + 1..=(k + self.kl).min(n - 1) {
                s += self.at(i, k) * b[i];
            }
            b[k] -= s;
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
        }
    }
}
