//! Symmetry-reduced meridian grids on the quarter disc / quarter annulus
//! `(ρ, θ) ∈ [a, b] × [0, π/2]`, θ measured from the positive x_n axis, with
//! the finite-volume geometry of the axisymmetric Laplacian.
//!
//! Nodes cluster at the corner `(bubble_radius, 0)` through a smooth
//! stretching map whose spacing grows geometrically away from the corner and
//! saturates far from it. Refining a [`GridSpec`] by one level bisects every
//! interval, so the coarse nodes are a subset of the fine ones.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)] // redundant when a dependency links std
use num_traits::Float;

use crate::bubble::Dimension;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{GL4_NODES, GL4_WEIGHTS};
use crate::special::{power_integral, sin_power_integral};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Ball,
    Annulus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub dim: Dimension,
    pub bubble_radius: f64,
}

impl DomainSpec {
    pub fn ball(dim: Dimension) -> Self {
        DomainSpec { kind: DomainKind::Ball, inner_radius: 0.0, outer_radius: 1.0, dim, bubble_radius: 1.0 }
    }

    pub fn annulus(dim: Dimension, a: f64, b: f64, bubble_radius: f64) -> Result<Self> {
        let d = DomainSpec { kind: DomainKind::Annulus, inner_radius: a, outer_radius: b, dim, bubble_radius };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DomainKind::Ball => {
                if self.inner_radius != 0.0 || self.outer_radius != 1.0 || self.bubble_radius != 1.0 {
                    return Err(invalid("the ball is the unit ball with bubbles at radius 1"));
                }
            }
            DomainKind::Annulus => {
                if !(self.inner_radius > 0.0 && self.inner_radius < self.outer_radius) {
                    return Err(invalid("annulus needs 0 < a < b"));
                }
                if self.bubble_radius != self.inner_radius && self.bubble_radius != self.outer_radius {
                    return Err(invalid("annulus bubbles sit on one of the two boundary spheres"));
                }
            }
        }
        Ok(())
    }

    /// Volume of the full n-dimensional domain.
    pub fn volume(&self) -> f64 {
        let n = self.dim.n() as i32;
        self.dim.ball_sphere_area() * power_integral(n - 1, self.inner_radius, self.outer_radius)
    }

    pub fn peak_on_outer(&self) -> bool {
        self.bubble_radius == self.outer_radius
    }
}

/// Base resolution and stretching of a meridian grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_rho: usize,
    pub n_theta: usize,
    /// Ratio of consecutive spacings approaching the corner, in (0, 1].
    pub grading: f64,
    /// Physical spacing at the corner at the base resolution.
    pub h_min: f64,
    /// Width of the uniformly spaced region at the corner before grading starts.
    pub core_width: f64,
    /// Number of bisection levels applied on top of the base resolution.
    pub refine: u32,
}

impl GridSpec {
    /// Base grid whose spacing is δ/`per_delta` out to 5δ from the corner, with
    /// interval counts chosen automatically (zero counts mean automatic).
    pub fn for_delta(delta: f64, per_delta: f64) -> Self {
        GridSpec { n_rho: 0, n_theta: 0, grading: 0.85, h_min: delta / per_delta, core_width: 5.0 * delta, refine: 0 }
    }

    pub fn refined(&self) -> Self {
        GridSpec { refine: self.refine + 1, ..*self }
    }
}

/// Stretching map on [0, L]: spacing h₀ up to the core width x₀, then growing
/// like h₀ + κ(x − x₀), plus a uniform part x/H that makes ξ(L) equal the
/// base interval count.
#[derive(Debug, Clone, Copy)]
struct Stretch {
    length: f64,
    h0: f64,
    core: f64,
    kappa: f64,
    far: f64,
    intervals: usize,
}

impl Stretch {
    fn graded(length: f64, h0: f64, core: f64, kappa: f64) -> f64 {
        let core = core.min(length);
        let tail = if kappa == 0.0 { (length - core) / h0 } else { (1.0 + kappa * (length - core) / h0).ln() / kappa };
        core / h0 + tail
    }

    /// `intervals == 0` picks a count with 25% of ξ left to the uniform part.
    fn new(length: f64, intervals: usize, h0: f64, core: f64, grading: f64) -> Result<Self> {
        if !(grading > 0.0 && grading <= 1.0) || !(h0 > 0.0) || !(core >= 0.0) {
            return Err(invalid("grid needs grading in (0,1], h_min > 0 and a non-negative core width"));
        }
        let kappa = 1.0 / grading - 1.0;
        let graded = Self::graded(length, h0, core, kappa);
        let intervals = if intervals == 0 { ((graded / 0.75).ceil() as usize).max(16) } else { intervals };
        if intervals < 16 {
            return Err(invalid("grid needs at least 16 intervals"));
        }
        let nf = intervals as f64;
        if graded >= nf {
            return Err(invalid("too few intervals for this grading and corner spacing"));
        }
        Ok(Stretch { length, h0, core: core.min(length), kappa, far: length / (nf - graded), intervals })
    }

    fn xi(&self, x: f64) -> f64 {
        let inner = x.min(self.core) / self.h0;
        let over = (x - self.core).max(0.0);
        let tail = if self.kappa == 0.0 { over / self.h0 } else { (1.0 + self.kappa * over / self.h0).ln() / self.kappa };
        inner + tail + x / self.far
    }

    fn dxi(&self, x: f64) -> f64 {
        let over = (x - self.core).max(0.0);
        1.0 / (self.h0 + self.kappa * over) + 1.0 / self.far
    }

    /// Positions with ξ = k / 2^refine, k = 0..=N·2^refine.
    fn nodes(&self, intervals: usize, refine: u32) -> Vec<f64> {
        let m = intervals << refine;
        let scale = (1u64 << refine) as f64;
        let mut out = Vec::with_capacity(m + 1);
        out.push(0.0);
        let mut x = 0.0;
        for k in 1..m {
            let target = k as f64 / scale;
            // Newton from the previous node; ξ is increasing and concave
            let mut lo = x;
            let mut hi = self.length;
            for _ in 0..100 {
                let step = (self.xi(x) - target) / self.dxi(x);
                let mut nx = x - step;
                if !(nx > lo && nx < hi) {
                    nx = 0.5 * (lo + hi);
                }
                if self.xi(nx) > target {
                    hi = nx;
                } else {
                    lo = nx;
                }
                if (nx - x).abs() <= 1e-15 * self.length {
                    x = nx;
                    break;
                }
                x = nx;
            }
            out.push(x);
        }
        out.push(self.length);
        out
    }
}

/// Parity tag of a field across the equator θ = π/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
}

/// Nodal values on a [`MeridianGrid`], stored row-major (ρ index major).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub n_rho: usize,
    pub n_theta: usize,
    pub values: Vec<f64>,
    pub parity: Parity,
}

impl GridField {
    pub fn zeros(grid: &MeridianGrid) -> Self {
        GridField { n_rho: grid.rho.len(), n_theta: grid.theta.len(), values: alloc::vec![0.0; grid.len()], parity: Parity::Odd }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Node index `(i, j)` of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        (best / self.n_theta, best % self.n_theta)
    }

    pub fn axpy(&mut self, a: f64, other: &GridField) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeridianGrid {
    pub domain: DomainSpec,
    pub spec: GridSpec,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    /// Control volume of each node in the full odd-extended domain.
    pub volumes: Vec<f64>,
    /// Coupling between (i, j) and (i+1, j), index i·n_θ + j.
    pub rho_coupling: Vec<f64>,
    /// Coupling between (i, j) and (i, j+1), index i·n_θ + j.
    pub theta_coupling: Vec<f64>,
    /// ∫ sin^{n-2} over each θ control interval.
    pub theta_measure: Vec<f64>,
    /// Free-node numbering, `usize::MAX` for Dirichlet nodes.
    pub free_index: Vec<usize>,
    pub n_free: usize,
}

impl MeridianGrid {
    pub fn build(domain: DomainSpec, spec: GridSpec) -> Result<Self> {
        domain.validate()?;
        let (a, b) = (domain.inner_radius, domain.outer_radius);
        let len = b - a;
        let rs = Stretch::new(len, spec.n_rho, spec.h_min, spec.core_width, spec.grading)?;
        let r = domain.bubble_radius;
        let ts = Stretch::new(FRAC_PI_2, spec.n_theta, spec.h_min / r, spec.core_width / r, spec.grading)?;
        let xr = rs.nodes(rs.intervals, spec.refine);
        let rho: Vec<f64> = if domain.peak_on_outer() {
            let mut v: Vec<f64> = xr.iter().rev().map(|x| b - x).collect();
            v[0] = a;
            v
        } else {
            let mut v: Vec<f64> = xr.iter().map(|x| a + x).collect();
            *v.last_mut().unwrap() = b;
            v
        };
        let mut theta = ts.nodes(ts.intervals, spec.refine);
        *theta.last_mut().unwrap() = FRAC_PI_2;
        Ok(Self::from_nodes(domain, spec, rho, theta))
    }

    fn from_nodes(domain: DomainSpec, spec: GridSpec, rho: Vec<f64>, theta: Vec<f64>) -> Self {
        let n = domain.dim.n() as i32;
        let two_s = 2.0 * domain.dim.sphere_area();
        let (nr, nt) = (rho.len(), theta.len());
        let cell = |v: &[f64], k: usize| -> (f64, f64) {
            let lo = if k == 0 { v[0] } else { 0.5 * (v[k - 1] + v[k]) };
            let hi = if k + 1 == v.len() { v[k] } else { 0.5 * (v[k] + v[k + 1]) };
            (lo, hi)
        };
        let sin_m = (n - 2) as u32;
        let theta_measure: Vec<f64> = (0..nt)
            .map(|j| {
                let (lo, hi) = cell(&theta, j);
                sin_power_integral(sin_m, hi) - sin_power_integral(sin_m, lo)
            })
            .collect();
        let rho_vol: Vec<f64> = (0..nr)
            .map(|i| {
                let (lo, hi) = cell(&rho, i);
                power_integral(n - 1, lo, hi)
            })
            .collect();
        // Angular coupling per row, (F(hi) - F(lo)) / ((n-1)ρ_i) with F = ρ^{n-1} the
        // radial face weight. It equals ∫ρ^{n-3} over the cell up to O(h²), and
        // keeps the discrete operator exact on ρ cos θ next to the ball's centre,
        // where the plain integral loses an order.
        let rho_arc: Vec<f64> = (0..nr)
            .map(|i| {
                if rho[i] == 0.0 {
                    return 0.0;
                }
                let (lo, hi) = cell(&rho, i);
                (hi.powi(n - 1) - lo.powi(n - 1)) / ((n - 1) as f64 * rho[i])
            })
            .collect();
        let mut volumes = alloc::vec![0.0; nr * nt];
        for i in 0..nr {
            for j in 0..nt {
                volumes[i * nt + j] = two_s * rho_vol[i] * theta_measure[j];
            }
        }
        let mut rho_coupling = alloc::vec![0.0; nr * nt];
        for i in 0..nr - 1 {
            let mid = 0.5 * (rho[i] + rho[i + 1]);
            let w = two_s * mid.powi(n - 1) / (rho[i + 1] - rho[i]);
            for j in 0..nt {
                rho_coupling[i * nt + j] = w * theta_measure[j];
            }
        }
        let mut theta_coupling = alloc::vec![0.0; nr * nt];
        for j in 0..nt - 1 {
            let mid = 0.5 * (theta[j] + theta[j + 1]);
            let w = two_s * mid.sin().powi(n - 2) / (theta[j + 1] - theta[j]);
            for i in 0..nr {
                theta_coupling[i * nt + j] = w * rho_arc[i];
            }
        }
        let ball = domain.kind == DomainKind::Ball;
        let mut free_index = alloc::vec![usize::MAX; nr * nt];
        let mut n_free = 0;
        for i in 0..nr {
            for j in 0..nt {
                if j + 1 == nt || (ball && i == 0) {
                    continue;
                }
                free_index[i * nt + j] = n_free;
                n_free += 1;
            }
        }
        MeridianGrid { domain, spec, rho, theta, volumes, rho_coupling, theta_coupling, theta_measure, free_index, n_free }
    }

    pub fn len(&self) -> usize {
        self.rho.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> Dimension {
        self.domain.dim
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.theta.len() + j
    }

    /// Meridian coordinates (s, t) = (ρ sin θ, ρ cos θ) of node (i, j).
    pub fn node_st(&self, i: usize, j: usize) -> (f64, f64) {
        let (r, t) = (self.rho[i], self.theta[j]);
        (r * t.sin(), r * t.cos())
    }

    /// Row index of the arc carrying the bubbles.
    pub fn peak_row(&self) -> usize {
        if self.domain.peak_on_outer() { self.rho.len() - 1 } else { 0 }
    }

    /// Sample a function of (s, t) at every node; Dirichlet nodes are set to 0.
    pub fn sample<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> GridField {
        let mut field = GridField::zeros(self);
        for i in 0..self.rho.len() {
            for j in 0..self.theta.len() {
                let k = self.index(i, j);
                if self.free_index[k] != usize::MAX {
                    let (s, t) = self.node_st(i, j);
                    field.values[k] = f(s, t);
                }
            }
        }
        field
    }

    /// Largest local spacing max(Δρ, ρΔθ) among nodes within `radius` of the peak corner.
    pub fn spacing_near_peak(&self, radius: f64) -> f64 {
        let pr = self.domain.bubble_radius;
        let mut worst: f64 = 0.0;
        let nr = self.rho.len();
        let nt = self.theta.len();
        for i in 0..nr {
            for j in 0..nt {
                let (s, t) = self.node_st(i, j);
                if (s * s + (t - pr) * (t - pr)).sqrt() > radius {
                    continue;
                }
                let dr = if i + 1 < nr { self.rho[i + 1] - self.rho[i] } else { 0.0 };
                let dl = if i > 0 { self.rho[i] - self.rho[i - 1] } else { 0.0 };
                let tr = if j + 1 < nt { self.theta[j + 1] - self.theta[j] } else { 0.0 };
                let tl = if j > 0 { self.theta[j] - self.theta[j - 1] } else { 0.0 };
                worst = worst.max(dr.max(dl)).max(self.rho[i] * tr.max(tl));
            }
        }
        worst
    }

    /// The δ/8 rule: spacing within 4δ of the peak at most δ/8.
    pub fn check_resolution(&self, delta: f64) -> Result<()> {
        let h = self.spacing_near_peak(4.0 * delta);
        if h > delta / 8.0 * (1.0 + 1e-12) {
            return Err(Error::UnderResolved { spacing: h, required: delta / 8.0 });
        }
        Ok(())
    }

    /// (A u)_k = Σ_faces c (u_k − u_neighbour): the finite-volume form of −Δ
    /// integrated over each control volume (natural zero flux on the arcs and axis).
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let (nr, nt) = (self.rho.len(), self.theta.len());
        let mut out = alloc::vec![0.0; nr * nt];
        for i in 0..nr {
            for j in 0..nt {
                let k = i * nt + j;
                if i + 1 < nr {
                    let f = self.rho_coupling[k] * (u[k] - u[k + nt]);
                    out[k] += f;
                    out[k + nt] -= f;
                }
                if j + 1 < nt {
                    let f = self.theta_coupling[k] * (u[k] - u[k + 1]);
                    out[k] += f;
                    out[k + 1] -= f;
                }
            }
        }
        for (k, v) in out.iter_mut().enumerate() {
            if self.free_index[k] == usize::MAX {
                *v = 0.0;
            }
        }
        out
    }

    /// Discrete Laplacian L_h u = −A u / V at free nodes.
    pub fn laplacian(&self, u: &GridField) -> GridField {
        let au = self.apply_stiffness(&u.values);
        let mut out = GridField::zeros(self);
        for (k, a) in au.iter().enumerate() {
            if self.free_index[k] != usize::MAX {
                out.values[k] = -a / self.volumes[k];
            }
        }
        out
    }

    /// uᵀ A v: the discrete Dirichlet form ∫∇u·∇v over the full domain.
    pub fn energy_product(&self, u: &GridField, v: &GridField) -> f64 {
        let av = self.apply_stiffness(&v.values);
        u.values.iter().zip(&av).map(|(a, b)| a * b).sum()
    }

    /// Σ V f(u): lumped-mass integral over the full odd-extended domain of an
    /// even function of the field (the caller supplies the even function).
    pub fn lumped_integral<F: FnMut(f64) -> f64>(&self, u: &GridField, mut f: F) -> f64 {
        u.values.iter().zip(&self.volumes).map(|(x, v)| v * f(*x)).sum()
    }

    /// Locate the cell containing (ρ, θ): returns (i, j, x, y) with local
    /// coordinates in [0, 1].
    pub fn locate(&self, rho: f64, theta: f64) -> Result<(usize, usize, f64, f64)> {
        let find = |v: &[f64], x: f64| -> Option<(usize, f64)> {
            let lo = v[0];
            let hi = *v.last().unwrap();
            let tol = 1e-13 * (hi - lo).abs().max(1.0);
            if !(x >= lo - tol && x <= hi + tol) {
                return None;
            }
            let x = x.clamp(lo, hi);
            let k = match v.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
                Ok(k) => k.min(v.len() - 2),
                Err(k) => k.saturating_sub(1).min(v.len() - 2),
            };
            Some((k, (x - v[k]) / (v[k + 1] - v[k])))
        };
        match (find(&self.rho, rho), find(&self.theta, theta)) {
            (Some((i, x)), Some((j, y))) => Ok((i, j, x, y)),
            _ => Err(Error::OutOfHull { rho, theta }),
        }
    }

    /// Tensor piecewise-linear interpolation of a nodal field.
    pub fn interpolate(&self, field: &GridField, rho: f64, theta: f64) -> Result<f64> {
        let (i, j, x, y) = self.locate(rho, theta)?;
        let nt = self.theta.len();
        let v = &field.values;
        let k = i * nt + j;
        Ok((1.0 - x) * ((1.0 - y) * v[k] + y * v[k + 1]) + x * ((1.0 - y) * v[k + nt] + y * v[k + nt + 1]))
    }

    /// ∫ over the full odd-extended domain of an integrand that is even across
    /// the equator, given in terms of (i_cell, j_cell, ρ, θ, local x, local y).
    /// Four-by-four Gauss–Legendre points per tensor cell, with the meridian
    /// measure 2|S^{n-2}| ρ^{n-1} sin^{n-2}θ.
    pub fn integrate_cells<F: FnMut(usize, usize, f64, f64, f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let n = self.dim().n() as i32;
        let two_s = 2.0 * self.dim().sphere_area();
        let mut total = 0.0;
        for i in 0..self.rho.len() - 1 {
            let (r0, r1) = (self.rho[i], self.rho[i + 1]);
            let hr = 0.5 * (r1 - r0);
            for j in 0..self.theta.len() - 1 {
                let (t0, t1) = (self.theta[j], self.theta[j + 1]);
                let ht = 0.5 * (t1 - t0);
                let mut cell = 0.0;
                for a in 0..4 {
                    let x = 0.5 * (1.0 + GL4_NODES[a]);
                    let rho = r0 + (r1 - r0) * x;
                    let wr = GL4_WEIGHTS[a] * rho.powi(n - 1);
                    for b in 0..4 {
                        let y = 0.5 * (1.0 + GL4_NODES[b]);
                        let th = t0 + (t1 - t0) * y;
                        cell += wr * GL4_WEIGHTS[b] * th.sin().powi(n - 2) * f(i, j, rho, th, x, y);
                    }
                }
                total += cell * hr * ht;
            }
        }
        two_s * total
    }
}
