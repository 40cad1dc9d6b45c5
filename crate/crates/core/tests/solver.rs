use nbubble_core::bubble::f_eps;
use nbubble_core::solver::{newton_solve, SolveConfig};
use nbubble_core::{Dimension, DomainSpec, Exponent, GridField, MeridianGrid, ReducedConstants, ReducedProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn d_star(n: u32) -> f64 {
    ReducedProfile::new(ReducedConstants::compute(Dimension::new(n).unwrap(), 1e-10).unwrap()).d_star
}

fn random_odd(grid: &MeridianGrid, rng: &mut ChaCha8Rng) -> GridField {
    let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let phase: f64 = rng.random_range(0.0..6.0);
    grid.sample(|s, t| {
        let rho = (s * s + t * t).sqrt();
        let theta = s.atan2(t);
        (0..4).map(|m| c[m] * ((2 * m + 1) as f64 * theta).cos() * (phase + 3.0 * rho * m as f64).sin() * rho).sum()
    })
}

#[test]
fn estimate_does_not_depend_on_the_initial_scale() {
    let eps = 0.05;
    let ds = d_star(4);
    let estimates: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|f| {
            let mut cfg = SolveConfig::new(DomainSpec::ball(Dimension::new(4).unwrap()), eps);
            cfg.delta_init = Some(f * ds * eps);
            let (_, rep) = newton_solve(&cfg, ds).unwrap();
            assert!(rep.converged, "delta_init factor {f}");
            rep.delta.from_height
        })
        .collect();
    for e in &estimates {
        assert!((e / estimates[1] - 1.0).abs() < 0.01, "{estimates:?}");
    }
}

#[test]
fn converged_solutions_satisfy_the_discrete_weak_form() {
    for (n, domain, eps) in [
        (4, DomainSpec::ball(Dimension::new(4).unwrap()), 0.07),
        (5, DomainSpec::ball(Dimension::new(5).unwrap()), 0.07),
        (4, DomainSpec::annulus(Dimension::new(4).unwrap(), 0.5, 1.0, 1.0).unwrap(), 0.07),
    ] {
        let dim = Dimension::new(n).unwrap();
        let cfg = SolveConfig::new(domain, eps);
        let (grid, rep) = newton_solve(&cfg, d_star(n)).unwrap();
        assert!(rep.converged);
        assert!(rep.sign_changing);
        let exp = Exponent::new(eps, dim).unwrap();
        let force: Vec<f64> = rep.u.values.iter().map(|&x| f_eps(x, exp, dim)).collect();
        let residual_bound = cfg.newton.tol * rep.residual_scale;

        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..20 {
            let v = random_odd(&grid, &mut rng);
            let lhs = grid.energy_product(&v, &rep.u);
            let rhs: f64 = (0..grid.len()).map(|k| v.values[k] * grid.volumes[k] * force[k]).sum();
            let budget: f64 = (0..grid.len()).map(|k| v.values[k].abs() * grid.volumes[k]).sum::<f64>() * residual_bound;
            assert!((lhs - rhs).abs() <= budget, "n={n}: {lhs} vs {rhs}, budget {budget}");
        }

        // arc nodes carry the Neumann condition; their residual is held to the same tolerance
        let au = grid.apply_stiffness(&rep.u.values);
        let last = grid.rho.len() - 1;
        let arc = (0..grid.n_theta())
            .map(|j| grid.index(last, j))
            .filter(|&k| grid.free_index[k] != usize::MAX)
            .map(|k| (au[k] / grid.volumes[k] - force[k]).abs())
            .fold(0.0f64, f64::max);
        assert!(arc <= 10.0 * residual_bound, "n={n}: arc residual {arc}");

        // ∫ f_ε(u) = 0 over the odd-extended domain, by symmetry and to quadrature level
        assert!(rep.mean_defect.abs() < 1e-8, "n={n}: mean defect {}", rep.mean_defect);
    }
}

#[test]
fn newton_tail_is_quadratic() {
    let ds = d_star(4);
    let constants: Vec<Vec<f64>> = [0.1, 0.05]
        .iter()
        .map(|&eps| {
            let cfg = SolveConfig::new(DomainSpec::ball(Dimension::new(4).unwrap()), eps);
            let (_, rep) = newton_solve(&cfg, ds).unwrap();
            assert!(rep.converged);
            rep.quadratic_constants()
        })
        .collect();
    for c in &constants {
        assert!(!c.is_empty(), "no steps in the quadratic regime");
        assert!(c.iter().all(|x| x.is_finite() && *x < 10.0), "{constants:?}");
    }
    // the observed constant is a property of the problem, not of the run
    let all: Vec<f64> = constants.concat();
    let (lo, hi) = all.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 10.0, "{constants:?}");
}
