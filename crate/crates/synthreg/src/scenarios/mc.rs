//! Coverage and radius experiments over the `(n, M, procedure, target)` grid.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use synthreg_core::stats::{mean_se, proportion_se};
use synthreg_core::{
    combine, cutoff, fit, par, radius as radius_of, simulate_original, simulate_release, test, CombinedEstimates,
    CutoffTable, Method, NullParams, PivotSpec, Procedure, RngStream, SpdMatrix, SynthesisConfig,
};

use super::{Ctx, Target};
use crate::config::ProcedureName;
use crate::error::{HarnessError, Result, ResultExt};
use crate::io::{procedure_label, write_rows};

struct Cell {
    n: usize,
    m_releases: usize,
    procedure: Procedure,
    target: &'static str,
    spec: PivotSpec,
    truth: DMatrix<f64>,
    ct: CutoffTable,
}

struct Group {
    n: usize,
    m_releases: usize,
    procedures: Vec<Procedure>,
}

/// Runs every cell for `mc.iterations` replicates and returns the values of
/// `eval` per cell. Replicates of one `(n, M)` group share their releases
/// across procedures and targets.
fn simulate<F>(ctx: &Ctx, eval: F) -> Result<Vec<(Cell, Vec<f64>)>>
where
    F: Fn(&CombinedEstimates, &Cell, &SpdMatrix) -> synthreg_core::Result<f64> + Sync,
{
    let cfg = ctx.cfg;
    let (b, sigma) = ctx.model()?;
    let targets = Target::all(cfg)?;
    let (synthetic, original) = ctx.procedures();
    let mut groups = Vec::new();
    for &n in &cfg.model.n {
        if original {
            groups.push(Group { n, m_releases: 0, procedures: vec![Procedure::Original] });
        }
        if !synthetic.is_empty() {
            for &m_rel in &cfg.synthesis.m_releases {
                groups.push(Group { n, m_releases: m_rel, procedures: synthetic.clone() });
            }
        }
    }
    let method = Method::from(cfg.synthesis.method);
    let iterations = cfg.mc.iterations;
    let mut out = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let label = || format!("n = {}, M = {}", g.n, g.m_releases);
        let stream = ctx.work_stream(gi as u64);
        let x = ctx.design_x(b.nrows(), g.n)?;
        let mut cells = Vec::new();
        for &procedure in &g.procedures {
            for t in &targets {
                let spec = t.spec(procedure)?;
                let alpha = (procedure != Procedure::Original).then_some(cfg.synthesis.alpha);
                let params = NullParams {
                    m_releases: g.m_releases,
                    n: g.n,
                    m: sigma.dim(),
                    p: b.nrows(),
                    k: spec.k(b.nrows()),
                    alpha,
                };
                let ct = cutoff(
                    &params,
                    &spec,
                    cfg.inference.gamma,
                    cfg.inference.n_draws,
                    stream.substream(0).substream(cells.len() as u64),
                )
                .context(|| format!("{}, {:?}, target {}", label(), procedure, t.label))?;
                cells.push(Cell {
                    n: g.n,
                    m_releases: g.m_releases,
                    procedure,
                    target: t.label,
                    spec,
                    truth: t.truth(&b),
                    ct,
                });
            }
        }
        let reps = par::try_map_indices(iterations, |r| {
            let rs = stream.substream(1).substream(r as u64);
            let ests = replicate(&b, &sigma, &x, g, method, cfg, rs)?;
            cells
                .iter()
                .map(|c| {
                    let pos = g.procedures.iter().position(|p| *p == c.procedure).unwrap_or(0);
                    eval(&ests[pos], c, &sigma)
                })
                .collect::<synthreg_core::Result<Vec<f64>>>()
        })
        .context(label)?;
        for (ci, cell) in cells.into_iter().enumerate() {
            let values = reps.iter().map(|r| r[ci]).collect();
            out.push((cell, values));
        }
    }
    Ok(out)
}

fn replicate(
    b: &DMatrix<f64>,
    sigma: &SpdMatrix,
    x: &DMatrix<f64>,
    g: &Group,
    method: Method,
    cfg: &crate::config::ExperimentConfig,
    rs: RngStream,
) -> synthreg_core::Result<Vec<CombinedEstimates>> {
    if g.m_releases == 0 {
        let data = simulate_original(b, sigma, x, &mut rs.substream(2).rng())?;
        return Ok(vec![CombinedEstimates::original(&fit(&data)?)]);
    }
    let mut sc = SynthesisConfig::new(method, g.m_releases, cfg.synthesis.alpha, rs);
    sc.plug_in_variance = cfg.synthesis.plug_in_variance.into();
    let (_, release) = simulate_release(b, sigma, x, &sc)?;
    g.procedures.iter().map(|&p| combine(&release, p)).collect()
}

#[derive(Debug, Serialize)]
struct CoverageRow {
    n: usize,
    m_releases: usize,
    procedure: &'static str,
    target: &'static str,
    delta: f64,
    coverage: f64,
    se: f64,
    replicates: usize,
}

pub(super) fn coverage(ctx: &Ctx) -> Result<Value> {
    let results = simulate(ctx, |est, c, _| {
        Ok(if test(est, &c.truth, &c.spec, &c.ct)?.in_confidence_set() { 1.0 } else { 0.0 })
    })?;
    let rows: Vec<CoverageRow> = results
        .iter()
        .map(|(c, v)| {
            let cov = v.iter().sum::<f64>() / v.len() as f64;
            CoverageRow {
                n: c.n,
                m_releases: c.m_releases,
                procedure: procedure_label(ProcedureName::from(c.procedure)),
                target: c.target,
                delta: c.ct.delta,
                coverage: cov,
                se: proportion_se(cov, v.len()),
                replicates: v.len(),
            }
        })
        .collect();
    write_rows(&ctx.out.path("coverage.csv"), &rows)?;
    Ok(json!({ "tables": ["coverage.csv"], "coverage": rows }))
}

#[derive(Debug, Serialize)]
struct RadiusRow {
    n: usize,
    m_releases: usize,
    procedure: &'static str,
    target: &'static str,
    delta: f64,
    mean_upsilon: f64,
    se: f64,
    expected: f64,
    relative_difference: f64,
    replicates: usize,
}

pub(super) fn radius(ctx: &Ctx) -> Result<Value> {
    let results = simulate(ctx, |est, c, sigma| Ok(radius_of(est, &c.ct, sigma)?.upsilon))?;
    let sigma = ctx.cfg.model_sigma()?;
    let rows = results
        .iter()
        .map(|(c, v)| {
            let (mean, se) = mean_se(v);
            let expected = synthreg_core::expected_radius(c.ct.params(), c.procedure, c.ct.delta, &sigma)
                .map_err(HarnessError::from)?;
            Ok(RadiusRow {
                n: c.n,
                m_releases: c.m_releases,
                procedure: procedure_label(ProcedureName::from(c.procedure)),
                target: c.target,
                delta: c.ct.delta,
                mean_upsilon: mean,
                se,
                expected,
                relative_difference: mean / expected - 1.0,
                replicates: v.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(&ctx.out.path("radius.csv"), &rows)?;
    Ok(json!({ "tables": ["radius.csv"], "radius": rows }))
}
