//! One function per subcommand. Each collects its files in [`Outputs`] and
//! reports whether every verdict passed; `main` turns that into the exit code.

use std::path::PathBuf;

use nbubble_core::corrector::{phi0_decay_slope, phi0_normal_derivative_residual, DecayQuantity};
use nbubble_core::experiments::{run_expansion_experiment, ExpansionReport, ExperimentId};
use nbubble_core::fit::loglog_fit;
use nbubble_core::neumann::{norm, project_pw, project_pz, NeumannSolver, NormKind};
use nbubble_core::solver::{
    extract_delta, newton_solve, phi_diagnostics, projection_integrals, SolutionReport, SolveConfig,
};
use nbubble_core::{DomainKind, GridField, GridSpec, MeridianGrid, ReducedProfile};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cache;
use crate::config::Config;
use crate::output::{Outputs, Schema};
use crate::svg::{heat_map, line_plot, Series};
use crate::CliError;

pub struct Outcome {
    pub pass: bool,
    pub outputs: Outputs,
    pub details: Value,
}

fn num(e: nbubble_core::Error) -> CliError {
    CliError::Numeric(e)
}

fn stem(prefix: &str, config: &Config) -> String {
    format!("{prefix}-n{}", config.dim)
}

pub fn constants_schema() -> Schema {
    let value = || {
        Schema::obj(vec![
            ("value", Schema::Number),
            ("quadrature", Schema::Number),
            ("err", Schema::Number),
            ("provenance", Schema::Str),
        ])
    };
    Schema::obj(vec![
        ("n", Schema::Integer),
        ("tol", Schema::Number),
        (
            "constants",
            Schema::obj(vec![("A", value()), ("B", value()), ("C", value()), ("D", value()), ("E", value())]),
        ),
        ("flux", Schema::Number),
        ("pz_norm_limit", Schema::Number),
        ("d_star", Schema::Number),
        ("d_star_golden", Schema::Number),
        ("psi_at_d_star", Schema::Number),
        ("d_star_bare_constant", Schema::Number),
        ("cross_checks_pass", Schema::Bool),
    ])
}

pub fn constants(config: &Config, out: Option<PathBuf>) -> Result<Outcome, CliError> {
    let dim = config.dimension()?;
    let (k, status) = cache::constants(dim, config.constants.tol)?;
    let prof = ReducedProfile::new(k);
    let golden = prof.golden_section_argmax(prof.d_star / 10.0, 10.0 * prof.d_star);
    let root_ok = (golden - prof.d_star).abs() <= 1e-10;
    let doc = json!({
        "n": dim.n(),
        "tol": config.constants.tol,
        "constants": cache::constants_json(&k),
        "flux": k.flux(),
        "pz_norm_limit": k.pz_norm_limit(),
        "d_star": prof.d_star,
        "d_star_golden": golden,
        "psi_at_d_star": prof.psi_at_dstar,
        "d_star_bare_constant": ReducedProfile::as_printed(k).d_star,
        "cross_checks_pass": root_ok,
    });
    let path = out.unwrap_or_else(|| config.output_dir.join(format!("{}.json", stem("constants", config))));
    let dir = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    let name = path.file_name().ok_or_else(|| CliError::Usage("--out needs a file name".into()))?.to_string_lossy().into_owned();
    let mut outputs = Outputs::new(&dir);
    outputs.json(&name, &doc, &constants_schema())?;
    Ok(Outcome { pass: root_ok, outputs, details: json!({"cache": status.as_str()}) })
}

pub fn corrector_table(config: &Config) -> Result<Outcome, CliError> {
    let dim = config.dimension()?;
    let c = &config.corrector;
    let (table, status, cache_path) = cache::corrector_table(dim, c.r_max, c.steps, c.tol)?;
    let hs = table.step();
    let mut rows = Vec::new();
    for i in 0..=table.steps {
        for j in 0..=table.steps {
            let k = i * (table.steps + 1) + j;
            rows.push(vec![i as f64 * hs, j as f64 * hs, table.values[k], table.errors[k]]);
        }
    }
    let largest = table.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut datum = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        datum.push(phi0_normal_derivative_residual(dim, r, 1e-4, c.tol.min(1e-12)).map_err(num)?);
    }
    let far = [40.0, 80.0, 160.0, 320.0, 640.0];
    let value_slope = phi0_decay_slope(dim, 0.0, &far, DecayQuantity::Value, 1e-15).map_err(num)?;
    let gradient_slope = phi0_decay_slope(dim, 0.0, &far, DecayQuantity::Gradient, 1e-15).map_err(num)?;
    let n = dim.nf();
    let slopes_ok = (value_slope + n - 3.0).abs() <= 0.15 && (gradient_slope + n - 2.0).abs() <= 0.15;
    let pass = largest < 0.0 && datum.iter().all(|d| *d < 0.05) && slopes_ok;
    let doc = json!({
        "n": dim.n(),
        "r_max": table.r_max,
        "steps": table.steps,
        "tol": table.tol,
        "max_value": largest,
        "all_negative": largest < 0.0,
        "decay_constant": table.decay_constant(),
        "max_stencil_residual_beyond_1": table.max_stencil_residual(1.0),
        "neumann_datum_residual": {"r": [0.5, 1.0, 2.0], "relative": datum},
        "decay_slope_value": value_slope,
        "decay_slope_gradient": gradient_slope,
        "pass": pass,
    });
    let schema = Schema::obj(vec![
        ("n", Schema::Integer),
        ("steps", Schema::Integer),
        ("max_value", Schema::Number),
        ("all_negative", Schema::Bool),
        ("decay_slope_value", Schema::Number),
        ("decay_slope_gradient", Schema::Number),
        ("pass", Schema::Bool),
    ]);
    let s = stem("phi0", config);
    let mut outputs = Outputs::new(&config.output_dir);
    outputs.json(&format!("{s}.json"), &doc, &schema)?;
    outputs.csv(&format!("{s}.csv"), &["r", "h", "phi0", "err"], &rows)?;
    let along = |f: &dyn Fn(usize) -> (f64, f64)| (0..=table.steps).map(f).collect::<Vec<_>>();
    let plot = line_plot(
        &format!("corrector, n = {}", dim.n()),
        "distance",
        "phi0",
        &[
            Series::line("boundary, h = 0", along(&|i| (i as f64 * hs, table.node(i, 0)))),
            Series::line("axis, r = 0", along(&|j| (j as f64 * hs, table.node(0, j)))),
        ],
        false,
        false,
    );
    outputs.svg(&format!("{s}.svg"), plot)?;
    Ok(Outcome { pass, outputs, details: json!({"cache": status.as_str(), "cache_file": cache_path.display().to_string()}) })
}

fn field_rows(grid: &MeridianGrid, fields: &[&GridField]) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..grid.rho.len() {
        for j in 0..grid.n_theta() {
            let (s, t) = grid.node_st(i, j);
            let mut row = vec![grid.rho[i], grid.theta[j], s, t];
            row.extend(fields.iter().map(|f| f.at(i, j)));
            rows.push(row);
        }
    }
    rows
}

fn field_map(title: &str, grid: &MeridianGrid, u: &GridField) -> String {
    let (a, b) = (grid.domain.inner_radius, grid.domain.outer_radius);
    heat_map(title, b, 90, |s, t| {
        let rho = (s * s + t * t).sqrt();
        if rho > b || rho < a {
            return None;
        }
        let theta = s.atan2(t.abs());
        let v = grid.interpolate(u, rho, theta).ok()?;
        Some(if t < 0.0 { -v } else { v })
    })
}

fn grid_json(grid: &MeridianGrid, delta: f64) -> Value {
    json!({
        "n_rho": grid.rho.len(),
        "n_theta": grid.n_theta(),
        "nodes": grid.len(),
        "free_nodes": grid.n_free,
        "min_spacing": grid.spacing_near_peak(0.0),
        "spacing_within_4_delta": grid.spacing_near_peak(4.0 * delta),
        "required_spacing": delta / 8.0,
    })
}

pub fn project(config: &Config) -> Result<Outcome, CliError> {
    let dim = config.dimension()?;
    let delta = config.project.delta;
    let spec = GridSpec::for_delta(delta, config.project.per_delta);
    let domain = nbubble_core::DomainSpec::ball(dim);
    let grid = MeridianGrid::build(domain, spec).map_err(num)?;
    let k = NeumannSolver::new(&grid).map_err(num)?;
    let pw = project_pw(&grid, &k, delta).map_err(num)?;
    let pz = project_pz(&grid, &k, delta).map_err(num)?;
    let est = extract_delta(&grid, &pw).map_err(num)?;
    let integrals = projection_integrals(domain, delta, 0.0, spec).map_err(num)?;
    let (kc, _) = cache::constants(dim, config.constants.tol)?;
    let ex = |e: nbubble_core::solver::Extrapolated| json!({"coarse": e.coarse, "fine": e.fine, "value": e.value});
    let doc = json!({
        "n": dim.n(),
        "delta": delta,
        "grid": grid_json(&grid, delta),
        "delta_from_height": est.from_height,
        "delta_from_half_width": est.from_half_width,
        "pw": {
            "sup": norm(&grid, &pw, NormKind::Sup),
            "h1_nodal": norm(&grid, &pw, NormKind::H1Grad),
            "gradient_squared": ex(integrals.gradient),
            "predicted_gradient_squared": kc.predicted_gradient_term(delta),
            "lp1_integral": ex(integrals.j1),
        },
        "pz": {
            "h1_nodal": norm(&grid, &pz, NormKind::H1Grad),
            "gradient_squared": ex(integrals.pz_gradient),
            "limit": kc.pz_norm_limit(),
        },
    });
    let schema = Schema::obj(vec![
        ("n", Schema::Integer),
        ("delta", Schema::Number),
        ("grid", Schema::obj(vec![("nodes", Schema::Integer)])),
        ("delta_from_height", Schema::Number),
        ("pw", Schema::obj(vec![("sup", Schema::Number), ("gradient_squared", Schema::obj(vec![("value", Schema::Number)]))])),
        ("pz", Schema::obj(vec![("gradient_squared", Schema::obj(vec![("value", Schema::Number)]))])),
    ]);
    let s = stem("project", config);
    let mut outputs = Outputs::new(&config.output_dir);
    outputs.json(&format!("{s}.json"), &doc, &schema)?;
    outputs.csv(&format!("{s}.csv"), &["rho", "theta", "s", "t", "pw", "pz"], &field_rows(&grid, &[&pw, &pz]))?;
    outputs.svg(&format!("{s}.svg"), field_map(&format!("PW, n = {}, delta = {delta}", dim.n()), &grid, &pw))?;
    Ok(Outcome { pass: true, outputs, details: json!({}) })
}

fn solution_json(cfg: &SolveConfig, grid: &MeridianGrid, rep: &SolutionReport, d_star: f64) -> Value {
    let phi = rep.phi.map(|p| {
        json!({"phi_norm_h1": p.phi_norm_h1, "orth_defect": p.orth_defect, "best_d": p.best_d, "at_boundary": p.at_boundary})
    });
    json!({
        "domain": match cfg.domain.kind { DomainKind::Ball => "ball", DomainKind::Annulus => "annulus" },
        "n": cfg.domain.dim.n(),
        "eps": cfg.eps,
        "inner_radius": cfg.domain.inner_radius,
        "outer_radius": cfg.domain.outer_radius,
        "bubble_radius": cfg.domain.bubble_radius,
        "d_star": d_star,
        "grid": grid_json(grid, rep.delta_init),
        "converged": rep.converged,
        "iterations": rep.iterations,
        "residual": rep.residual,
        "residual_scale": rep.residual_scale,
        "tolerance": cfg.newton.tol,
        "history": rep.history,
        "step_lengths": rep.step_lengths,
        "quadratic_constants": rep.quadratic_constants(),
        "delta_init": rep.delta_init,
        "delta_est": rep.delta.from_height,
        "delta_half_width": rep.delta.from_half_width,
        "delta_ratio": rep.delta.from_height / cfg.eps.abs(),
        "peak": {"rho": rep.delta.peak.0, "theta": rep.delta.peak.1, "value": rep.delta.peak_value},
        "peak_on_target": rep.peak_on_target,
        "sign_changing": rep.sign_changing,
        "mean_defect": rep.mean_defect,
        "energy": rep.energy,
        "phi": phi,
    })
}

fn solution_schema() -> Schema {
    Schema::obj(vec![
        ("domain", Schema::Str),
        ("n", Schema::Integer),
        ("eps", Schema::Number),
        ("converged", Schema::Bool),
        ("iterations", Schema::Integer),
        ("residual", Schema::Number),
        ("history", Schema::array(Schema::Number)),
        ("delta_est", Schema::Number),
        ("peak_on_target", Schema::Bool),
        ("sign_changing", Schema::Bool),
        ("mean_defect", Schema::Number),
        ("energy", Schema::Number),
        ("phi", Schema::Any),
    ])
}

/// Grid statistics for the resolved configuration, without solving.
pub fn dry_run(config: &Config) -> Result<Value, CliError> {
    let cfg = config.solve_config()?;
    let (k, _) = cache::constants(cfg.domain.dim, config.constants.tol)?;
    let d_star = ReducedProfile::new(k).d_star;
    let delta = cfg.reference_delta(d_star);
    let grid = MeridianGrid::build(cfg.domain, cfg.grid_spec(d_star)).map_err(num)?;
    let resolved = grid.check_resolution(delta).is_ok();
    Ok(json!({"d_star": d_star, "delta_init": delta, "resolved": resolved, "grid": grid_json(&grid, delta)}))
}

pub fn solve(config: &Config) -> Result<Outcome, CliError> {
    let cfg = config.solve_config()?;
    let (k, _) = cache::constants(cfg.domain.dim, config.constants.tol)?;
    let d_star = ReducedProfile::new(k).d_star;
    let (grid, mut rep) = newton_solve(&cfg, d_star).map_err(num)?;
    let mut pass = rep.converged;
    if cfg.domain.kind == DomainKind::Annulus {
        pass &= rep.peak_on_target;
    }
    if rep.converged && config.solve.diagnostics {
        let solver = NeumannSolver::new(&grid).map_err(num)?;
        let centre = rep.delta.from_height / cfg.eps.abs();
        rep.phi = Some(phi_diagnostics(&grid, &solver, &rep.u, cfg.eps, centre / 4.0, centre * 4.0).map_err(num)?);
    }
    let kind = match cfg.domain.kind {
        DomainKind::Ball => "ball",
        DomainKind::Annulus => "annulus",
    };
    let s = format!("solve-{kind}-n{}", config.dim);
    let mut outputs = Outputs::new(&config.output_dir);
    outputs.json(&format!("{s}.json"), &solution_json(&cfg, &grid, &rep, d_star), &solution_schema())?;
    outputs.csv(&format!("{s}.csv"), &["rho", "theta", "s", "t", "u"], &field_rows(&grid, &[&rep.u]))?;
    outputs.svg(&format!("{s}-field.svg"), field_map(&format!("u, {kind}, n = {}, eps = {}", config.dim, cfg.eps), &grid, &rep.u))?;
    let profile: Vec<(f64, f64)> = (0..grid.rho.len()).map(|i| (grid.rho[i], rep.u.at(i, 0))).collect();
    outputs.svg(
        &format!("{s}-profile.svg"),
        line_plot("u along theta = 0", "rho", "u", &[Series::line("u(rho, 0)", profile)], false, false),
    )?;
    let details = json!({"converged": rep.converged, "peak_on_target": rep.peak_on_target});
    if !rep.converged {
        log::error!("Newton stopped after {} iterations at relative residual {:e}", rep.iterations, rep.residual / rep.residual_scale);
    } else if cfg.domain.kind == DomainKind::Annulus && !rep.peak_on_target {
        log::error!("peak drifted off the configured sphere to {:?}", rep.delta.peak);
    }
    Ok(Outcome { pass, outputs, details })
}

fn report_json(rep: &ExpansionReport) -> Value {
    let checks: Vec<Value> = rep
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "measured": c.measured,
                "predicted": c.predicted,
                "tolerance": c.tolerance,
                "relative": c.relative,
                "binding": c.binding,
                "pass": c.pass,
            })
        })
        .collect();
    json!({
        "id": rep.id.as_str(),
        "n": rep.n,
        "sweep": rep.sweep,
        "measured": rep.measured,
        "predicted": rep.predicted,
        "fitted_slope": rep.fitted_slope,
        "slope_ci": rep.slope_ci.map(|(a, b)| vec![a, b]),
        "checks": checks,
        "verdict": rep.verdict,
    })
}

fn report_schema() -> Schema {
    Schema::obj(vec![
        ("id", Schema::Str),
        ("n", Schema::Integer),
        ("sweep", Schema::array(Schema::Number)),
        ("measured", Schema::array(Schema::MaybeNumber)),
        ("predicted", Schema::array(Schema::MaybeNumber)),
        (
            "checks",
            Schema::array(Schema::obj(vec![
                ("name", Schema::Str),
                ("measured", Schema::MaybeNumber),
                ("predicted", Schema::MaybeNumber),
                ("binding", Schema::Bool),
                ("pass", Schema::Bool),
            ])),
        ),
        ("verdict", Schema::Bool),
    ])
}

pub fn verify(config: &Config, which: &str) -> Result<Outcome, CliError> {
    let ids: Vec<ExperimentId> = if which.eq_ignore_ascii_case("all") {
        ExperimentId::ALL.to_vec()
    } else {
        vec![ExperimentId::parse(which).map_err(|_| CliError::Usage(format!("unknown experiment id {which:?}")))?]
    };
    let configs = ids.iter().map(|id| config.experiment_config(*id)).collect::<Result<Vec<_>, _>>()?;
    let (k, _) = cache::constants(config.dimension()?, config.constants.tol)?;
    let reports: Vec<Result<ExpansionReport, CliError>> = ids
        .par_iter()
        .zip(configs.par_iter())
        .map(|(id, cfg)| {
            log::info!("running {}", id.as_str());
            run_expansion_experiment(*id, cfg, &k).map_err(num)
        })
        .collect();
    let mut outputs = Outputs::new(&config.output_dir);
    let mut summary = Vec::new();
    let mut pass = true;
    for rep in reports {
        let rep = rep?;
        let s = format!("verify-{}-n{}", rep.id.as_str(), rep.n);
        let mut header: Vec<&str> = vec!["sweep", "measured", "predicted"];
        header.extend(rep.columns.iter().map(|(name, _)| name.as_str()));
        let rows: Vec<Vec<f64>> = (0..rep.sweep.len())
            .map(|i| {
                let mut row = vec![rep.sweep[i], rep.measured[i], rep.predicted.get(i).copied().unwrap_or(f64::NAN)];
                row.extend(rep.columns.iter().map(|(_, col)| col[i]));
                row
            })
            .collect();
        outputs.csv(&format!("{s}.csv"), &header, &rows)?;
        outputs.json(&format!("{s}.json"), &report_json(&rep), &report_schema())?;
        let abs = |v: &[f64]| rep.sweep.iter().zip(v).map(|(x, y)| (*x, y.abs())).collect::<Vec<_>>();
        let plot = line_plot(
            &format!("{}, n = {}", rep.id.as_str(), rep.n),
            "delta",
            "|value|",
            &[Series::markers("measured", abs(&rep.measured)), Series::line("predicted", abs(&rep.predicted))],
            true,
            true,
        );
        outputs.svg(&format!("{s}.svg"), plot)?;
        pass &= rep.verdict;
        summary.push(json!({"id": rep.id.as_str(), "verdict": rep.verdict}));
    }
    Ok(Outcome { pass, outputs, details: json!({"experiments": summary}) })
}

pub fn sweep(config: &Config) -> Result<Outcome, CliError> {
    let base = config.solve_config()?;
    if base.domain.kind != DomainKind::Ball {
        return Err(CliError::Usage("sweep runs the ball problem; set solve.domain = \"ball\"".into()));
    }
    let (k, _) = cache::constants(base.domain.dim, config.constants.tol)?;
    let d_star = ReducedProfile::new(k).d_star;
    let runs: Vec<Result<(f64, SolutionReport), CliError>> = config
        .sweep
        .eps
        .par_iter()
        .map(|&eps| {
            let mut cfg = base;
            cfg.eps = eps;
            cfg.delta_init = None;
            let (grid, mut rep) = newton_solve(&cfg, d_star).map_err(num)?;
            if rep.converged {
                let solver = NeumannSolver::new(&grid).map_err(num)?;
                let c = rep.delta.from_height / eps;
                rep.phi = Some(phi_diagnostics(&grid, &solver, &rep.u, eps, c / 4.0, c * 4.0).map_err(num)?);
            }
            Ok((eps, rep))
        })
        .collect();
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut pass = true;
    for run in runs {
        let (eps, rep) = run?;
        pass &= rep.converged;
        let (phi, best, orth) = rep.phi.map(|p| (p.phi_norm_h1, p.best_d, p.orth_defect)).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        rows.push(vec![
            eps,
            if rep.converged { 1.0 } else { 0.0 },
            rep.iterations as f64,
            rep.residual / rep.residual_scale,
            rep.delta.from_height,
            rep.delta.from_height / eps,
            phi,
            best,
            orth,
            rep.energy,
        ]);
        table.push(json!({
            "eps": eps,
            "converged": rep.converged,
            "iterations": rep.iterations,
            "delta_est": rep.delta.from_height,
            "delta_ratio": rep.delta.from_height / eps,
            "phi_norm_h1": phi,
            "best_d": best,
            "energy": rep.energy,
        }));
    }
    let good: Vec<&Vec<f64>> = rows.iter().filter(|r| r[1] == 1.0 && r[6].is_finite()).collect();
    let slope = if good.len() >= 2 {
        let xs: Vec<f64> = good.iter().map(|r| r[0]).collect();
        let ys: Vec<f64> = good.iter().map(|r| r[6]).collect();
        loglog_fit(&xs, &ys).ok().map(|f| f.slope)
    } else {
        None
    };
    let doc = json!({"n": config.dim, "d_star": d_star, "runs": table, "phi_norm_slope": slope});
    let schema = Schema::obj(vec![
        ("n", Schema::Integer),
        ("d_star", Schema::Number),
        (
            "runs",
            Schema::array(Schema::obj(vec![
                ("eps", Schema::Number),
                ("converged", Schema::Bool),
                ("delta_est", Schema::Number),
                ("phi_norm_h1", Schema::MaybeNumber),
            ])),
        ),
        ("phi_norm_slope", Schema::Any),
    ]);
    let s = stem("sweep", config);
    let mut outputs = Outputs::new(&config.output_dir);
    outputs.json(&format!("{s}.json"), &doc, &schema)?;
    outputs.csv(
        &format!("{s}.csv"),
        &["eps", "converged", "iterations", "relative_residual", "delta_est", "delta_ratio", "phi_norm_h1", "best_d", "orth_defect", "energy"],
        &rows,
    )?;
    let pts = |col: usize| rows.iter().map(|r| (r[0], r[col])).collect::<Vec<_>>();
    outputs.svg(
        &format!("{s}-phi.svg"),
        line_plot("phi norm against eps", "eps", "phi_norm_h1", &[Series::markers("phi_norm_h1", pts(6))], true, true),
    )?;
    let dstar_line = rows.iter().map(|r| (r[0], d_star)).collect();
    outputs.svg(
        &format!("{s}-delta.svg"),
        line_plot(
            "concentration scale against eps",
            "eps",
            "delta_est / eps",
            &[Series::markers("delta_est / eps", pts(5)), Series::line("d*", dstar_line)],
            true,
            false,
        ),
    )?;
    Ok(Outcome { pass, outputs, details: json!({"phi_norm_slope": slope}) })
}
