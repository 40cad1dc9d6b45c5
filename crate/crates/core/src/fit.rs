//! Ordinary least squares for log–log rate fits and small linear models.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when a dependency links std
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance (0 for two points).
    pub slope_stderr: f64,
}

impl LineFit {
    /// Two-sided interval of `k` standard errors around the slope.
    pub fn slope_interval(&self, k: f64) -> (f64, f64) {
        (self.slope - k * self.slope_stderr, self.slope + k * self.slope_stderr)
    }
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let m = xs.len();
    if m < 2 || ys.len() != m {
        return Err(Error::FitConditioning);
    }
    let mf = m as f64;
    let xbar = xs.iter().sum::<f64>() / mf;
    let ybar = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::FitConditioning);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_stderr = if m > 2 {
        let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ss / (mf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit { slope, intercept, slope_stderr })
}

/// Slope of log|y| against log x.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    linear_fit(&lx, &ly)
}

/// Least-squares coefficients c minimizing Σ_i (y_i − Σ_k c_k basis_k(x_i))²,
/// through the normal equations (the models here have at most four terms).
pub fn least_squares(rows: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    if m == 0 || ys.len() != m {
        return Err(Error::FitConditioning);
    }
    let k = rows[0].len();
    if m < k {
        return Err(Error::FitConditioning);
    }
    let mut a = vec![0.0; k * k];
    let mut b = vec![0.0; k];
    for (row, &y) in rows.iter().zip(ys) {
        for i in 0..k {
            b[i] += row[i] * y;
            for j in 0..k {
                a[i * k + j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if a[r * k + col].abs() > a[piv * k + col].abs() {
                piv = r;
            }
        }
        if a[piv * k + col].abs() < 1e-300 {
            return Err(Error::FitConditioning);
        }
        if piv != col {
            for j in 0..k {
                a.swap(piv * k + j, col * k + j);
            }
            b.swap(piv, col);
        }
        for r in col + 1..k {
            let f = a[r * k + col] / a[col * k + col];
            for j in col..k {
                a[r * k + j] -= f * a[col * k + j];
            }
            b[r] -= f * b[col];
        }
    }
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in i + 1..k {
            s -= a[i * k + j] * c[j];
        }
        c[i] = s / a[i * k + i];
    }
    Ok(c)
}

/// Maximizer of a unimodal `f` on [lo, hi] by golden-section search, to
/// absolute width `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-13);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn power_law_slope() {
        let xs = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_fit(&xs, &ys).unwrap().slope - 1.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn quadratic_model_recovered() {
        let xs = [0.0, 0.5, 1.0, 1.5, 2.0];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x * x]).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 1.0 - 2.0 * x + 0.5 * x * x).collect();
        let c = least_squares(&rows, &ys).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-12 && (c[2] - 0.5).abs() < 1e-12);
    }
}
