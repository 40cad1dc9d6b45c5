//! The Neumann solution operator K on odd fields, the projected ansatz
//! PW_δ = K(U₊^p − U₋^p), the projected kernel direction PZ_δ, and discrete norms.
//!
//! Two representations of a projection are provided. [`project_pw`] solves the
//! discrete problem with the sampled right-hand side, which is what the Newton
//! solver and its diagnostics need. [`SplitField`] writes the projection as the
//! closed-form profile plus a discrete harmonic correction that cancels its
//! boundary flux; the correction is smooth on the scale δ, so integrals of
//! the projection can be computed far more accurately than with the sampled
//! right-hand side.

use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when a dependency links std
use num_traits::Float;

use crate::banded::{BandCholesky, SymBand};
use crate::bubble::{BubbleParams, Dimension};
use crate::error::{Error, Result};
use crate::grid::{DomainKind, GridField, MeridianGrid};
use crate::quadrature::gauss4;

/// Stiffness matrix on free nodes plus an optional diagonal term per node.
pub fn assemble(grid: &MeridianGrid, diagonal: Option<&[f64]>) -> SymBand {
    let nt = grid.n_theta();
    let nr = grid.rho.len();
    let w = nt - 1;
    let mut a = SymBand::new(grid.n_free, w);
    let mut couple = |k: usize, l: usize, c: f64| {
        let (fk, fl) = (grid.free_index[k], grid.free_index[l]);
        if fk != usize::MAX {
            a.add(fk, fk, c);
        }
        if fl != usize::MAX {
            a.add(fl, fl, c);
        }
        if fk != usize::MAX && fl != usize::MAX {
            a.add(fk, fl, -c);
        }
    };
    for i in 0..nr {
        for j in 0..nt {
            let k = i * nt + j;
            if i + 1 < nr {
                couple(k, k + nt, grid.rho_coupling[k]);
            }
            if j + 1 < nt {
                couple(k, k + 1, grid.theta_coupling[k]);
            }
        }
    }
    if let Some(d) = diagonal {
        for (k, &fk) in grid.free_index.iter().enumerate() {
            if fk != usize::MAX {
                a.add(fk, fk, d[k]);
            }
        }
    }
    a
}

/// Factored K: solves −L_h u = h with Neumann arcs and a Dirichlet equator.
#[derive(Debug, Clone)]
pub struct NeumannSolver {
    chol: BandCholesky,
}

impl NeumannSolver {
    pub fn new(grid: &MeridianGrid) -> Result<Self> {
        Ok(NeumannSolver { chol: BandCholesky::factor(&assemble(grid, None))? })
    }

    /// u with A u = load at free nodes (load already integrated over control volumes).
    pub fn solve_load(&self, grid: &MeridianGrid, load: &[f64]) -> GridField {
        let mut b = alloc::vec![0.0; grid.n_free];
        for (k, &fk) in grid.free_index.iter().enumerate() {
            if fk != usize::MAX {
                b[fk] = load[k];
            }
        }
        self.chol.solve(&mut b);
        let mut out = GridField::zeros(grid);
        for (k, &fk) in grid.free_index.iter().enumerate() {
            if fk != usize::MAX {
                out.values[k] = b[fk];
            }
        }
        out
    }

    /// K h for an odd nodal field h.
    pub fn solve_k(&self, grid: &MeridianGrid, h: &GridField) -> Result<GridField> {
        check_odd(grid, h)?;
        let load: Vec<f64> = h.values.iter().zip(&grid.volumes).map(|(x, v)| x * v).collect();
        Ok(self.solve_load(grid, &load))
    }
}

/// An odd field vanishes on the equator row (and at the ball's centre).
pub fn check_odd(grid: &MeridianGrid, h: &GridField) -> Result<()> {
    let scale = h.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (k, &fk) in grid.free_index.iter().enumerate() {
        if fk == usize::MAX && h.values[k].abs() > 1e-12 * scale.max(1e-300) {
            return Err(Error::NotOdd);
        }
    }
    Ok(())
}

/// ‖L_h u + h‖_∞ / ‖h‖_∞ over free nodes.
pub fn k_residual(grid: &MeridianGrid, u: &GridField, h: &GridField) -> f64 {
    let lap = grid.laplacian(u);
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (k, &fk) in grid.free_index.iter().enumerate() {
        if fk != usize::MAX {
            num = num.max((lap.values[k] + h.values[k]).abs());
            den = den.max(h.values[k].abs());
        }
    }
    if den == 0.0 { num } else { num / den }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    H1Grad,
    Lq(f64),
    Sup,
}

/// Weighted discrete norms over the full odd-extended domain.
pub fn norm(grid: &MeridianGrid, field: &GridField, kind: NormKind) -> f64 {
    match kind {
        NormKind::H1Grad => grid.energy_product(field, field).max(0.0).sqrt(),
        NormKind::Lq(q) => grid.lumped_integral(field, |x| x.abs().powf(q)).powf(1.0 / q),
        NormKind::Sup => field.values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    }
}

/// Which antipodal closed-form profile is being projected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// W_δ = U₊ − U₋
    W,
    /// Z_δ = δ∂_δ W_δ
    Z,
}

/// The antipodal pair at ±radius·e_n with the pieces the projections need.
#[derive(Debug, Clone, Copy)]
pub struct Antipodal {
    pub dim: Dimension,
    pub delta: f64,
    pub radius: f64,
}

impl Antipodal {
    pub fn new(dim: Dimension, delta: f64, radius: f64) -> Self {
        Antipodal { dim, delta, radius }
    }

    fn bubble(&self, center: f64) -> BubbleParams {
        BubbleParams { dim: self.dim, delta: self.delta, center, sign: 1.0 }
    }

    fn d2(rho: f64, theta: f64, c: f64) -> f64 {
        // |x − c e_n|² written to stay accurate near the centre
        let (s, t) = (rho * theta.sin(), rho * theta.cos());
        s * s + (t - c) * (t - c)
    }

    /// Profile value and its d²-derivative for one bubble.
    fn radial_pair(&self, kind: Profile, d2: f64) -> (f64, f64) {
        let b = self.bubble(0.0);
        let u = b.radial(d2);
        let m = self.dim.half();
        let dd = self.delta * self.delta;
        let q = dd + d2;
        match kind {
            Profile::W => (u, -m * u / q),
            Profile::Z => (m * u * (d2 - dd) / q, m * u * (2.0 * dd - m * (d2 - dd)) / (q * q)),
        }
    }

    pub fn value(&self, kind: Profile, rho: f64, theta: f64) -> f64 {
        let r = self.radius;
        self.radial_pair(kind, Self::d2(rho, theta, r)).0 - self.radial_pair(kind, Self::d2(rho, theta, -r)).0
    }

    pub fn value_st(&self, kind: Profile, s: f64, t: f64) -> f64 {
        let r = self.radius;
        let up = s * s + (t - r) * (t - r);
        let dn = s * s + (t + r) * (t + r);
        self.radial_pair(kind, up).0 - self.radial_pair(kind, dn).0
    }

    /// ∂_ρ of the profile.
    pub fn drho(&self, kind: Profile, rho: f64, theta: f64) -> f64 {
        let mut total = 0.0;
        for (c, sgn) in [(self.radius, 1.0), (-self.radius, -1.0)] {
            let d2 = Self::d2(rho, theta, c);
            let dd2 = 2.0 * rho - 2.0 * c * theta.cos();
            total += sgn * self.radial_pair(kind, d2).1 * dd2;
        }
        total
    }

    /// −Δ of the profile: U₊^p − U₋^p, or pU^{p−1}δ∂_δU differences.
    pub fn source_st(&self, kind: Profile, s: f64, t: f64) -> f64 {
        let r = self.radius;
        let p = self.dim.p();
        let mut total = 0.0;
        for (c, sgn) in [(r, 1.0), (-r, -1.0)] {
            let d2 = s * s + (t - c) * (t - c);
            let b = self.bubble(c);
            let up = b.radial_p(d2);
            total += sgn
                * match kind {
                    Profile::W => up,
                    Profile::Z => {
                        let u = b.radial(d2);
                        let dd = self.delta * self.delta;
                        p * up / u * self.dim.half() * u * (d2 - dd) / (dd + d2)
                    }
                };
        }
        total
    }
}

/// project_PW: K applied to the sampled U₊^p − U₋^p.
pub fn project_pw(grid: &MeridianGrid, solver: &NeumannSolver, delta: f64) -> Result<GridField> {
    project(grid, solver, delta, Profile::W)
}

/// project_PZ: K applied to the sampled pδ(U₊^{p−1}∂_δU₊ − U₋^{p−1}∂_δU₋).
pub fn project_pz(grid: &MeridianGrid, solver: &NeumannSolver, delta: f64) -> Result<GridField> {
    project(grid, solver, delta, Profile::Z)
}

fn project(grid: &MeridianGrid, solver: &NeumannSolver, delta: f64, kind: Profile) -> Result<GridField> {
    grid.check_resolution(delta)?;
    let pair = Antipodal::new(grid.dim(), delta, grid.domain.bubble_radius);
    let h = grid.sample(|s, t| pair.source_st(kind, s, t));
    solver.solve_k(grid, &h)
}

/// A projection written as closed-form profile + discrete harmonic correction.
#[derive(Debug, Clone)]
pub struct SplitField {
    pub pair: Antipodal,
    pub kind: Profile,
    pub correction: GridField,
}

impl SplitField {
    /// Solves for the correction c: harmonic, odd, ∂_ν c = −∂_ν(profile) on the arcs.
    pub fn build(grid: &MeridianGrid, solver: &NeumannSolver, delta: f64, kind: Profile) -> Result<Self> {
        grid.check_resolution(delta)?;
        let pair = Antipodal::new(grid.dim(), delta, grid.domain.bubble_radius);
        let n = grid.dim().n() as i32;
        let two_s = 2.0 * grid.dim().sphere_area();
        let nt = grid.n_theta();
        let mut load = alloc::vec![0.0; grid.len()];
        let mut arcs: Vec<(usize, f64)> = alloc::vec![(grid.rho.len() - 1, 1.0)];
        if grid.domain.kind == DomainKind::Annulus {
            arcs.push((0, -1.0));
        }
        for (row, normal) in arcs {
            let rho = grid.rho[row];
            for j in 0..nt {
                let lo = if j == 0 { 0.0 } else { 0.5 * (grid.theta[j - 1] + grid.theta[j]) };
                let hi = if j + 1 == nt { grid.theta[j] } else { 0.5 * (grid.theta[j] + grid.theta[j + 1]) };
                let flux = gauss4(|th| normal * pair.drho(kind, rho, th) * th.sin().powi(n - 2), lo, hi);
                load[row * nt + j] -= two_s * rho.powi(n - 1) * flux;
            }
        }
        let correction = solver.solve_load(grid, &load);
        Ok(SplitField { pair, kind, correction })
    }

    /// Value inside cell (i, j) at local coordinates (x, y).
    #[allow(clippy::too_many_arguments)]
    pub fn eval_cell(&self, grid: &MeridianGrid, i: usize, j: usize, rho: f64, theta: f64, x: f64, y: f64) -> f64 {
        let nt = grid.n_theta();
        let v = &self.correction.values;
        let k = i * nt + j;
        let c = (1.0 - x) * ((1.0 - y) * v[k] + y * v[k + 1]) + x * ((1.0 - y) * v[k + nt] + y * v[k + nt + 1]);
        self.pair.value(self.kind, rho, theta) + c
    }

    pub fn eval(&self, grid: &MeridianGrid, rho: f64, theta: f64) -> Result<f64> {
        let (i, j, x, y) = grid.locate(rho, theta)?;
        let (r, t) = (
            grid.rho[i] + x * (grid.rho[i + 1] - grid.rho[i]),
            grid.theta[j] + y * (grid.theta[j + 1] - grid.theta[j]),
        );
        Ok(self.eval_cell(grid, i, j, r, t, x, y))
    }

    /// ∫ F(value, source) over the full domain by cell Gauss quadrature.
    pub fn integrate<F: FnMut(f64, f64, f64, f64) -> f64>(&self, grid: &MeridianGrid, mut f: F) -> f64 {
        grid.integrate_cells(|i, j, rho, theta, x, y| {
            let v = self.eval_cell(grid, i, j, rho, theta, x, y);
            f(v, rho, theta, 0.0)
        })
    }

    /// ‖∇(profile + c)‖² = ∫ (profile + c)(−Δ profile).
    pub fn energy(&self, grid: &MeridianGrid) -> f64 {
        let pair = self.pair;
        let kind = self.kind;
        self.integrate(grid, |v, rho, theta, _| v * pair.source_st(kind, rho * theta.sin(), rho * theta.cos()))
    }
}
