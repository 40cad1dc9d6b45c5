//! The half-space corrector φ₀: harmonic in ℝⁿ₊ with Neumann datum
//! ∂_{x_n}φ₀ = α_n (n-2)/2 |x'|²/(1+|x'|²)^{n/2}, evaluated from its
//! single-layer representation
//! φ₀(x) = −(α_n/|S^{n-1}|) ∫_{ℝ^{n-1}} |y|²(1+|y|²)^{-n/2} |x−y|^{2-n} dy.
//!
//! The (n-1)-dimensional integral is reduced to a radial integral over |y|
//! whose angular factor is summed in closed form (series for small
//! anisotropy, logarithms / complete elliptic integrals otherwise).

use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when a dependency links std
use num_traits::Float;

use crate::bubble::Dimension;
use crate::error::{invalid, Error, Result};
use crate::fit::linear_fit;
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::special::{beta, elliptic_ke, sphere_area};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorPoint {
    /// |x'|
    pub r: f64,
    /// x_n ≥ 0
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub value: f64,
    pub err: f64,
}

/// Angular factor ∫_{S^{n-2}} |x − sω|^{2-n} dω written through
/// A = r²+s²+h², B = 2rs and the separately supplied A−B = (r−s)²+h².
#[derive(Debug, Clone, Copy)]
pub struct AngularKernel {
    n: u32,
    slice_area: f64,
    t0: f64,
}

const SERIES_LIMIT: f64 = 0.6;

impl AngularKernel {
    pub fn new(dim: Dimension) -> Self {
        let n = dim.n();
        AngularKernel { n, slice_area: sphere_area(n - 2), t0: beta(0.5 * (n as f64 - 2.0), 0.5) }
    }

    pub fn eval(&self, a: f64, b: f64, amb: f64) -> f64 {
        let q = b / a;
        if q <= SERIES_LIMIT {
            self.series(a, q)
        } else {
            self.closed(a, b, amb)
        }
    }

    pub fn series(&self, a: f64, q: f64) -> f64 {
        let m = 0.5 * (self.n as f64 - 2.0);
        let q2 = q * q;
        let mut term = self.t0;
        let mut sum = term;
        let mut k = 0.0;
        while k < 200.0 {
            term *= q2 * (m + 2.0 * k) * (m + 2.0 * k + 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 2.0)) * (k + 0.5)
                / (m + k + 0.5);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        self.slice_area * sum * Dimension::half_pow(a, -(self.n as i32 - 2))
    }

    pub fn closed(&self, a: f64, b: f64, amb: f64) -> f64 {
        let apb = a + b;
        match self.n {
            4 => self.slice_area * (apb / amb).ln() / b,
            5 => {
                let (k, e) = elliptic_ke((amb / apb).sqrt());
                self.slice_area * 4.0 * (a * k - apb * e) / (b * b * apb.sqrt())
            }
            _ => self.slice_area * (2.0 * a * (apb / amb).ln() - 4.0 * b) / (b * b * b),
        }
    }
}

fn integral_scale(dim: Dimension) -> f64 {
    dim.alpha() / dim.ball_sphere_area()
}

/// φ₀ at `point` with absolute error at most `tol`.
pub fn phi0(dim: Dimension, point: CorrectorPoint, tol: f64) -> Result<PhiValue> {
    let kernel = AngularKernel::new(dim);
    phi0_with(dim, &kernel, point, tol)
}

pub(crate) fn phi0_with(dim: Dimension, kernel: &AngularKernel, point: CorrectorPoint, tol: f64) -> Result<PhiValue> {
    let CorrectorPoint { r, h } = point;
    if !(h >= 0.0) || !(r >= 0.0) || !(tol > 0.0) {
        return Err(invalid("corrector point needs r, h >= 0 and tol > 0"));
    }
    let n = dim.n() as i32;
    let scale = integral_scale(dim);
    let integrand = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let a = r * r + s * s + h * h;
        let b = 2.0 * r * s;
        let amb = (r - s) * (r - s) + h * h;
        let weight = s.powi(n) / Dimension::half_pow(1.0 + s * s, n);
        weight * kernel.eval(a, b, amb)
    };
    let mut pts: Vec<f64> = alloc::vec![0.0];
    if r > 0.0 {
        if h < r {
            pts.push(r - h);
        }
        pts.push(r);
        pts.push(r + h.max(0.5 * r));
    }
    let tail = 2.0 * (r + h) + 2.0;
    pts.retain(|&x| x < tail);
    pts.push(tail);
    let mut tolerance = Tolerance::new(tol / scale, 1e-14);
    tolerance.max_intervals = 6000;
    let q = integrate_to_infinity(integrand, &pts, tolerance).map_err(|e| match e {
        Error::Quadrature { achieved, requested } => {
            Error::Quadrature { achieved: achieved * scale, requested: requested * scale }
        }
        other => other,
    })?;
    Ok(PhiValue { value: -scale * q.value, err: scale * q.err })
}

/// The prescribed boundary flux α_n (n-2)/2 · r²/(1+r²)^{n/2}.
pub fn neumann_datum(dim: Dimension, r: f64) -> f64 {
    dim.alpha() * dim.half() * r * r / Dimension::half_pow(1.0 + r * r, dim.n() as i32)
}

/// One-sided difference (φ₀(r, step) − φ₀(r, 0))/step against the datum,
/// relative to the datum (absolute when the datum vanishes).
pub fn phi0_normal_derivative_residual(dim: Dimension, r: f64, step: f64, tol: f64) -> Result<f64> {
    if !(r >= 0.0) || !(step > 0.0) {
        return Err(invalid("need r >= 0 and step > 0"));
    }
    let kernel = AngularKernel::new(dim);
    let f0 = phi0_with(dim, &kernel, CorrectorPoint { r, h: 0.0 }, tol)?.value;
    let f1 = phi0_with(dim, &kernel, CorrectorPoint { r, h: step }, tol)?.value;
    let fd = (f1 - f0) / step;
    let datum = neumann_datum(dim, r);
    if datum == 0.0 {
        Ok(fd.abs())
    } else {
        Ok((fd - datum).abs() / datum)
    }
}

/// Gradient (∂_r φ₀, ∂_h φ₀) by central differences (one-sided in h at h < step).
pub fn phi0_gradient(dim: Dimension, point: CorrectorPoint, step: f64, tol: f64) -> Result<(f64, f64)> {
    let kernel = AngularKernel::new(dim);
    let at = |r: f64, h: f64| phi0_with(dim, &kernel, CorrectorPoint { r, h }, tol).map(|v| v.value);
    let CorrectorPoint { r, h } = point;
    let dr = if r >= step {
        (at(r + step, h)? - at(r - step, h)?) / (2.0 * step)
    } else {
        (at(r + step, h)? - at(r, h)?) / step
    };
    let dh = if h >= step {
        (at(r, h + step)? - at(r, h - step)?) / (2.0 * step)
    } else {
        (at(r, h + step)? - at(r, h)?) / step
    };
    Ok((dr, dh))
}

/// Which quantity a decay fit follows along a ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayQuantity {
    Value,
    Gradient,
}

/// Least-squares slope of log|φ₀| (or log|∇φ₀|) against log|x| along the ray
/// making `ray_angle` with the vertical axis.
pub fn phi0_decay_slope(dim: Dimension, ray_angle: f64, radii: &[f64], what: DecayQuantity, tol: f64) -> Result<f64> {
    if radii.len() < 2 || radii.iter().any(|&x| x < 5.0) {
        return Err(invalid("decay fit needs at least two radii, all >= 5"));
    }
    let mut xs = Vec::with_capacity(radii.len());
    let mut ys = Vec::with_capacity(radii.len());
    for &rad in radii {
        let p = CorrectorPoint { r: rad * ray_angle.sin(), h: rad * ray_angle.cos() };
        let y = match what {
            DecayQuantity::Value => phi0(dim, p, tol)?.value.abs(),
            DecayQuantity::Gradient => {
                let (a, b) = phi0_gradient(dim, p, 1e-3 * rad, tol)?;
                (a * a + b * b).sqrt()
            }
        };
        xs.push(rad.ln());
        ys.push(y.ln());
    }
    Ok(linear_fit(&xs, &ys)?.slope)
}

/// Meridian Laplacian ∂_rr + ((n-2)/r)∂_r + ∂_hh of φ₀ by the 5-point stencil.
pub fn harmonic_stencil_residual(dim: Dimension, point: CorrectorPoint, step: f64, tol: f64) -> Result<f64> {
    let kernel = AngularKernel::new(dim);
    let at = |r: f64, h: f64| phi0_with(dim, &kernel, CorrectorPoint { r, h }, tol).map(|v| v.value);
    let CorrectorPoint { r, h } = point;
    if r <= step || h <= step {
        return Err(invalid("stencil needs r, h > step"));
    }
    let c = at(r, h)?;
    let (e, w) = (at(r + step, h)?, at(r - step, h)?);
    let (nn, s) = (at(r, h + step)?, at(r, h - step)?);
    let h2 = step * step;
    Ok((e - 2.0 * c + w) / h2 + (dim.nf() - 2.0) / r * (e - w) / (2.0 * step) + (nn - 2.0 * c + s) / h2)
}

/// Tensor table of φ₀ on a uniform (r, h) grid over [0, r_max]².
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorTable {
    pub dim: Dimension,
    pub r_max: f64,
    pub steps: usize,
    pub tol: f64,
    /// values[i * (steps+1) + j] = φ₀(r_i, h_j)
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

pub const TABLE_FORMAT_VERSION: u32 = 1;

impl CorrectorTable {
    pub fn build(dim: Dimension, r_max: f64, steps: usize, tol: f64) -> Result<Self> {
        if steps < 2 || !(r_max > 0.0) {
            return Err(invalid("table needs steps >= 2 and r_max > 0"));
        }
        let kernel = AngularKernel::new(dim);
        let m = steps + 1;
        let mut values = Vec::with_capacity(m * m);
        let mut errors = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let p = CorrectorPoint { r: r_max * i as f64 / steps as f64, h: r_max * j as f64 / steps as f64 };
                let v = phi0_with(dim, &kernel, p, tol)?;
                values.push(v.value);
                errors.push(v.err);
            }
        }
        Ok(CorrectorTable { dim, r_max, steps, tol, values, errors })
    }

    pub fn step(&self) -> f64 {
        self.r_max / self.steps as f64
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.steps + 1) + j]
    }

    /// Bilinear interpolation; `None` outside [0, r_max]².
    pub fn interpolate(&self, r: f64, h: f64) -> Option<f64> {
        if !(r >= 0.0 && h >= 0.0 && r <= self.r_max && h <= self.r_max) {
            return None;
        }
        let hs = self.step();
        let fi = (r / hs).min(self.steps as f64 - 1e-9);
        let fj = (h / hs).min(self.steps as f64 - 1e-9);
        let (i, j) = (fi.floor() as usize, fj.floor() as usize);
        let (x, y) = (fi - i as f64, fj - j as f64);
        let v00 = self.node(i, j);
        let v10 = self.node(i + 1, j);
        let v01 = self.node(i, j + 1);
        let v11 = self.node(i + 1, j + 1);
        Some((1.0 - x) * ((1.0 - y) * v00 + y * v01) + x * ((1.0 - y) * v10 + y * v11))
    }

    /// Largest |stencil Laplacian| over interior nodes with r, h ≥ `from`.
    pub fn max_stencil_residual(&self, from: f64) -> f64 {
        let hs = self.step();
        let nf = self.dim.nf();
        let mut worst: f64 = 0.0;
        for i in 1..self.steps {
            for j in 1..self.steps {
                let (r, h) = (i as f64 * hs, j as f64 * hs);
                if r < from || h < from {
                    continue;
                }
                let c = self.node(i, j);
                let lap = (self.node(i + 1, j) - 2.0 * c + self.node(i - 1, j)) / (hs * hs)
                    + (nf - 2.0) / r * (self.node(i + 1, j) - self.node(i - 1, j)) / (2.0 * hs)
                    + (self.node(i, j + 1) - 2.0 * c + self.node(i, j - 1)) / (hs * hs);
                worst = worst.max(lap.abs());
            }
        }
        worst
    }

    /// Largest `|φ₀|(1+|x|)^{n-3}` over the table: the fitted decay constant.
    pub fn decay_constant(&self) -> f64 {
        let hs = self.step();
        let k = self.dim.n() as i32 - 3;
        let mut c: f64 = 0.0;
        for i in 0..=self.steps {
            for j in 0..=self.steps {
                let rad = ((i * i + j * j) as f64).sqrt() * hs;
                c = c.max(self.node(i, j).abs() * (1.0 + rad).powi(k));
            }
        }
        c
    }

    /// Little-endian serialization: header (version, n, steps, r_max, tol) then values and errors.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 16 * self.values.len());
        out.extend_from_slice(b"PHI0");
        out.extend_from_slice(&TABLE_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.dim.n().to_le_bytes());
        out.extend_from_slice(&(self.steps as u64).to_le_bytes());
        out.extend_from_slice(&self.r_max.to_bits().to_le_bytes());
        out.extend_from_slice(&self.tol.to_bits().to_le_bytes());
        for v in self.values.iter().chain(self.errors.iter()) {
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || invalid("corrupt corrector table");
        let take = |at: usize, len: usize| bytes.get(at..at + len).ok_or_else(bad);
        if take(0, 4)? != b"PHI0" {
            return Err(bad());
        }
        let word = |at: usize| -> Result<u32> { Ok(u32::from_le_bytes(take(at, 4)?.try_into().map_err(|_| bad())?)) };
        let quad = |at: usize| -> Result<u64> { Ok(u64::from_le_bytes(take(at, 8)?.try_into().map_err(|_| bad())?)) };
        if word(4)? != TABLE_FORMAT_VERSION {
            return Err(invalid("corrector table version mismatch"));
        }
        let dim = Dimension::new(word(8)?)?;
        let steps = quad(12)? as usize;
        let r_max = f64::from_bits(quad(20)?);
        let tol = f64::from_bits(quad(28)?);
        let m = (steps + 1) * (steps + 1);
        let mut vals = Vec::with_capacity(2 * m);
        for k in 0..2 * m {
            vals.push(f64::from_bits(quad(36 + 8 * k)?));
        }
        if bytes.len() != 36 + 16 * m {
            return Err(bad());
        }
        let errors = vals.split_off(m);
        Ok(CorrectorTable { dim, r_max, steps, tol, values: vals, errors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn kernel_series_and_closed_forms_agree() {
        for n in 4..=6 {
            let k = AngularKernel::new(dim(n));
            for &(r, s, h) in &[(1.0, 0.5, 0.1), (1.0, 1.3, 0.4), (2.0, 0.9, 0.2)] {
                let a: f64 = r * r + s * s + h * h;
                let b = 2.0 * r * s;
                let amb = (r - s) * (r - s) + h * h;
                if b / a > 0.3 {
                    let x = k.series(a, b / a);
                    let y = k.closed(a, b, amb);
                    assert!((x - y).abs() < 1e-11 * x, "n={n} series {x} closed {y}");
                }
            }
        }
    }

    #[test]
    fn kernel_matches_direct_angular_quadrature() {
        for n in 4..=6 {
            let k = AngularKernel::new(dim(n));
            let (a, b): (f64, f64) = (2.0, 1.7);
            let m = 0.5 * (n as f64 - 2.0);
            let direct = integrate(
                |psi: f64| psi.sin().powi(n as i32 - 3) * (a - b * psi.cos()).powf(-m),
                0.0,
                core::f64::consts::PI,
                Tolerance::new(1e-14, 1e-14),
            )
            .unwrap()
            .value
                * sphere_area(n - 2);
            let v = k.eval(a, b, a - b);
            assert!((v - direct).abs() < 1e-12 * direct, "n={n}: {v} vs {direct}");
        }
    }

    #[test]
    fn origin_value_closed_form_n4() {
        // φ₀(0) = −(α/ω₄)·4π·∫ s²/(1+s²)² ds = −α/2
        let v = phi0(dim(4), CorrectorPoint { r: 0.0, h: 0.0 }, 1e-12).unwrap();
        assert!((v.value + 8f64.sqrt() / 2.0).abs() < 1e-11, "{}", v.value);
    }

    #[test]
    fn negative_and_decaying() {
        for n in 4..=6 {
            let a = phi0(dim(n), CorrectorPoint { r: 0.3, h: 0.7 }, 1e-10).unwrap().value;
            let b = phi0(dim(n), CorrectorPoint { r: 3.0, h: 7.0 }, 1e-10).unwrap().value;
            assert!(a < 0.0 && b < 0.0 && b.abs() < a.abs());
        }
    }

    #[test]
    fn table_roundtrip_is_bit_identical() {
        let t = CorrectorTable::build(dim(5), 2.0, 4, 1e-8).unwrap();
        let back = CorrectorTable::from_bytes(&t.to_bytes()).unwrap();
        assert_eq!(t, back);
        assert_eq!(t.interpolate(1.0, 0.5).unwrap(), t.node(2, 1));
        assert!(t.interpolate(3.0, 0.0).is_none());
        let mut bytes = t.to_bytes();
        bytes.pop();
        assert!(CorrectorTable::from_bytes(&bytes).is_err());
    }
}
