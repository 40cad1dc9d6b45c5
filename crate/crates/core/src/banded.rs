//! Banded direct solvers: Cholesky for the symmetric positive definite
//! Neumann operator and LU with partial pivoting for indefinite Jacobians.
// index loops read closer to the triangular-solve recurrences
#![allow(clippy::needless_range_loop)]

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when a dependency links std
use num_traits::Float;

use crate::error::{Error, Result};

/// Symmetric matrix with half-bandwidth `w`, lower triangle stored by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    pub n: usize,
    pub w: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn new(n: usize, w: usize) -> Self {
        SymBand { n, w, data: vec![0.0; n * (w + 1)] }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.w);
        i * (self.w + 1) + (j + self.w - i)
    }

    /// Adds `v` to entry (i, j) and, implicitly, (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.w { 0.0 } else { self.data[self.slot(i, j)] }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.w);
            for j in lo..=i {
                let a = self.data[self.slot(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    w: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &SymBand) -> Result<Self> {
        let (n, w) = (a.n, a.w);
        let mut l = a.data.clone();
        let at = |i: usize, j: usize| i * (w + 1) + (j + w - i);
        for j in 0..n {
            let lo = j.saturating_sub(w);
            let mut d = l[at(j, j)];
            for k in lo..j {
                let v = l[at(j, k)];
                d -= v * v;
            }
            if !(d > 0.0) {
                return Err(Error::SingularMatrix { row: j });
            }
            let d = d.sqrt();
            l[at(j, j)] = d;
            for i in j + 1..(j + w + 1).min(n) {
                let lo_i = i.saturating_sub(w);
                let mut s = l[at(i, j)];
                for k in lo_i.max(lo)..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                l[at(i, j)] = s / d;
            }
        }
        Ok(BandCholesky { n, w, l })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, w) = (self.n, self.w);
        let at = |i: usize, j: usize| i * (w + 1) + (j + w - i);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(w)..i {
                s -= self.l[at(i, k)] * b[k];
            }
            b[i] = s / self.l[at(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + w + 1).min(n) {
                s -= self.l[at(k, i)] * b[k];
            }
            b[i] = s / self.l[at(i, i)];
        }
    }
}

/// LU factorization with partial pivoting in LAPACK band layout.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &SymBand) -> Result<Self> {
        let (n, w) = (a.n, a.w);
        let (kl, ku) = (w, w);
        let kv = kl + ku;
        let ld = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ld * n];
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[kv + i - j + j * ld] = a.get(i, j);
            }
        }
        let mut ipiv = vec![0; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ld + kv;
            let mut jp = 0;
            let mut best = ab[col].abs();
            for r in 1..=km {
                let v = ab[col + r].abs();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix { row: j });
            }
            ipiv[j] = j + jp;
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let base = c * ld + kv;
                    ab.swap(base + j - c, base + j + jp - c);
                }
            }
            let piv = ab[col];
            for r in 1..=km {
                ab[col + r] /= piv;
            }
            for c in j + 1..=ju {
                let base = c * ld + kv;
                let ujc = ab[base + j - c];
                if ujc != 0.0 {
                    for r in 1..=km {
                        ab[base + j + r - c] -= ab[col + r] * ujc;
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, ld, ab, ipiv })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ld) = (self.n, self.kl, self.ld);
        let kv = kl + self.ku;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            if bj != 0.0 {
                for r in 1..=km {
                    b[j + r] -= self.ab[kv + r + j * ld] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[kv + j * ld];
            let bj = b[j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                b[i] -= self.ab[kv + i - j + j * ld] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> SymBand {
        let mut a = SymBand::new(n, 2);
        for i in 0..n {
            a.add(i, i, 2.0 + shift);
            if i + 2 < n {
                a.add(i + 2, i, -1.0);
            }
        }
        a
    }

    #[test]
    fn cholesky_solves_spd() {
        let a = laplacian_1d(40, 0.1);
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul(&x);
        BandCholesky::factor(&a).unwrap().solve(&mut b);
        assert!(b.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn lu_solves_indefinite() {
        let a = laplacian_1d(40, -2.7);
        assert!(BandCholesky::factor(&a).is_err());
        let x: Vec<f64> = (0..40).map(|i| 1.0 + (i as f64 * 0.11).cos()).collect();
        let mut b = a.mul(&x);
        BandLu::factor(&a).unwrap().solve(&mut b);
        assert!(b.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-10), "{b:?}");
    }

    #[test]
    fn lu_pivots_on_zero_diagonal() {
        let mut a = SymBand::new(3, 1);
        a.add(1, 0, 1.0);
        a.add(2, 1, 1.0);
        a.add(2, 2, 1.0);
        let x = [1.0, 2.0, 3.0];
        let mut b = a.mul(&x);
        BandLu::factor(&a).unwrap().solve(&mut b);
        assert!(b.iter().zip(&x).all(|(u, v)| (u - v).abs() < 1e-14));
    }

    #[test]
    fn singular_reported() {
        let a = SymBand::new(3, 1);
        assert!(matches!(BandLu::factor(&a), Err(Error::SingularMatrix { row: 0 })));
    }
}
