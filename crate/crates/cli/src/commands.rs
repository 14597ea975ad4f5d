//! One function per subcommand; each returns a table in input order.

use anyhow::Context;
use mfbose::focked::{EdSystem, FockBasis};
use mfbose::lattice::{LatticeSpec, Mode, ModeShells, DEFAULT_TAIL_TOL};
use mfbose::potentials::{perturbed_bounds, TermKind};
use mfbose::selfconsistent::condensate_fraction_limit;
use mfbose::suite::{run_suite, CheckReport};
use mfbose::variational::{analytic_lower_bound, case_lower_bound, classify, minimize_surface, SurfaceGrid};
use mfbose::{MeanField, ModelParams, SolverOptions, SurfaceParams};
use rayon::prelude::*;

use crate::config::Resolved;
use crate::output::{Cell, Table};

/// Maps `f` over `items` on `jobs` threads, keeping input order and
/// surfacing the first error in that order.
fn parallel_rows<T: Sync>(
    jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> anyhow::Result<Vec<Cell>> + Sync,
) -> anyhow::Result<Vec<Vec<Cell>>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| items.par_iter().map(&f).collect::<Vec<_>>())
        .into_iter()
        .collect()
}

fn solver_options(cfg: &Resolved) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol,
        ..SolverOptions::default()
    }
}

fn mean_field(cfg: &Resolved, params: &ModelParams) -> anyhow::Result<MeanField> {
    let spec = match cfg.lattice_spec()? {
        Some(s) => s,
        None => LatticeSpec::certified(params.beta, DEFAULT_TAIL_TOL * 1e-2, true)?,
    };
    MeanField::solve(params.clone(), ModeShells::from_spec(&spec), &solver_options(cfg))
        .with_context(|| format!("solving at β = {}, μ = {}, η = {}", params.beta, params.mu, params.eta))
}

pub fn mu_solve(cfg: &Resolved) -> anyhow::Result<Table> {
    let mut table = Table::new(vec![
        "beta", "mu", "eta", "mu_tilde", "gap", "n0", "n_plus", "residual", "kappa",
    ]);
    let tuples = cfg.tuples()?;
    table.rows = parallel_rows(cfg.jobs, &tuples, |p| {
        let s = mean_field(cfg, p)?.solution;
        Ok(vec![
            p.beta.into(),
            p.mu.into(),
            p.eta.into(),
            s.mu_tilde.into(),
            s.gap.into(),
            s.n0.into(),
            s.n_plus.into(),
            s.residual.into(),
            p.kappa().into(),
        ])
    })?;
    Ok(table)
}

pub fn phase(cfg: &Resolved) -> anyhow::Result<Table> {
    let mut table = Table::new(vec![
        "eta",
        "kappa",
        "frac_finite",
        "frac_limit",
        "abs_err",
        "mu",
        "beta",
    ]);
    let tuples = cfg.tuples()?;
    table.rows = parallel_rows(cfg.jobs, &tuples, |p| {
        let mf = mean_field(cfg, p)?;
        let kappa = p.kappa();
        let finite = mf.solution.n0 / mf.particles();
        let limit = condensate_fraction_limit(kappa);
        Ok(vec![
            p.eta.into(),
            kappa.into(),
            finite.into(),
            limit.into(),
            (finite - limit).abs().into(),
            p.mu.into(),
            p.beta.into(),
        ])
    })?;
    Ok(table)
}

pub fn bounds(cfg: &Resolved) -> anyhow::Result<Table> {
    let mut table = Table::new(vec![
        "beta",
        "mu",
        "eta",
        "lambda",
        "delta",
        "k",
        "center",
        "radius",
        "lower",
        "upper",
        "ideal",
        "quadratic_gap",
        "delta_term",
        "lambda_term",
    ]);
    let fields = cfg
        .tuples()?
        .iter()
        .map(|p| mean_field(cfg, p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let items: Vec<(&MeanField, (f64, f64))> = fields
        .iter()
        .flat_map(|mf| cfg.perturbations().into_iter().map(move |lp| (mf, lp)))
        .collect();
    table.rows = parallel_rows(cfg.jobs, &items, |&(mf, (lambda, delta))| {
        let env = perturbed_bounds(mf, lambda, delta, cfg.k);
        let p = &mf.params;
        Ok(vec![
            p.beta.into(),
            p.mu.into(),
            p.eta.into(),
            lambda.into(),
            delta.into(),
            cfg.k.into(),
            env.center.into(),
            env.radius.into(),
            env.lower().into(),
            env.upper().into(),
            env.term(TermKind::Ideal).into(),
            env.term(TermKind::QuadraticGap).into(),
            env.term(TermKind::Delta).into(),
            env.term(TermKind::Lambda).into(),
        ])
    })?;
    Ok(table)
}

pub fn surface(cfg: &Resolved) -> anyhow::Result<Table> {
    let mut table = Table::new(vec![
        "beta",
        "mu",
        "eta",
        "lambda",
        "delta",
        "x",
        "y",
        "value",
        "gradient_norm",
        "analytic_bound",
        "case",
        "case_bound",
    ]);
    let bases = cfg
        .tuples()?
        .iter()
        .map(|p| {
            Ok((
                p.clone(),
                SurfaceParams::from_mean_field(&mean_field(cfg, p)?, 0.0, 0.0),
            ))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let items: Vec<_> = bases
        .iter()
        .flat_map(|b| cfg.perturbations().into_iter().map(move |lp| (b, lp)))
        .collect();
    let n = cfg.surface_resolution;
    table.rows = parallel_rows(cfg.jobs, &items, |&((p, base), (lambda, delta))| {
        let sp = base.with_perturbation(lambda, delta);
        let min = minimize_surface(&sp, &SurfaceGrid::default_for(&sp).with_resolution(n, n))?;
        let case = classify(min.point, &sp);
        Ok(vec![
            p.beta.into(),
            p.mu.into(),
            p.eta.into(),
            lambda.into(),
            delta.into(),
            min.point.x.into(),
            min.point.y.into(),
            min.value.into(),
            min.gradient_norm.into(),
            analytic_lower_bound(&sp, cfg.k).into(),
            case.index().into(),
            case_lower_bound(case, &sp, cfg.k).into(),
        ])
    })?;
    Ok(table)
}

pub fn ed(cfg: &Resolved) -> anyhow::Result<Table> {
    let mut table = Table::new(vec![
        "beta",
        "mu",
        "eta",
        "n_ref",
        "lambda",
        "delta",
        "grand_potential",
        "N_exp",
        "n0_exp",
        "Re_a0",
        "Im_a0",
        "abs_a0",
        "entropy",
        "griffith_lo",
        "griffith_hi",
        "field_exp",
    ]);
    let e = &cfg.ed;
    let modes: Vec<Mode> = e.modes.iter().map(|&m| Mode(m)).collect();
    let basis = FockBasis::with_cap(modes.clone(), e.n_max, e.total_max, e.dimension_cap)?;
    let systems = cfg
        .tuples()?
        .into_iter()
        .map(|p| {
            let n_ref = match e.n_ref {
                Some(n) => n,
                None => MeanField::solve(p.clone(), ModeShells::from_modes(&modes), &solver_options(cfg))?.particles(),
            };
            Ok(EdSystem::new(p, basis.clone(), n_ref)?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let items: Vec<(&EdSystem, (f64, f64))> = systems
        .iter()
        .flat_map(|s| cfg.perturbations().into_iter().map(move |lp| (s, lp)))
        .collect();
    table.rows = parallel_rows(cfg.jobs, &items, |&(sys, (lambda, delta))| {
        let pt = sys.point(lambda, delta, e.step)?;
        let p = &sys.params;
        Ok(vec![
            p.beta.into(),
            p.mu.into(),
            p.eta.into(),
            sys.n_ref.into(),
            lambda.into(),
            delta.into(),
            pt.grand_potential.into(),
            pt.n_exp.into(),
            pt.n0_exp.into(),
            pt.re_a0.into(),
            pt.im_a0.into(),
            pt.abs_a0.into(),
            pt.entropy.into(),
            pt.griffith_lo.into(),
            pt.griffith_hi.into(),
            pt.field_exp.into(),
        ])
    })?;
    Ok(table)
}

pub fn verify(cfg: &Resolved) -> anyhow::Result<(Table, Vec<CheckReport>)> {
    let reports = run_suite(&cfg.suite)?;
    let mut table = Table::new(vec!["name", "passed", "margin", "samples"]);
    for r in &reports {
        table.push(vec![
            r.name.as_str().into(),
            r.passed.into(),
            r.margin.into(),
            r.samples.into(),
        ]);
    }
    Ok((table, reports))
}
