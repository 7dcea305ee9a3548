//! Scenarios driven by a data file: fitting, releasing and testing.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use synthreg_core::{
    combine, cutoff, fit as fit_model, generate, test as run_test, CombinedEstimates, Decision, FitResult, Method,
    ModelData, NullParams, PivotSpec, SynthesisConfig, SyntheticRelease,
};

use super::Ctx;
use crate::config::{Hypothesis, ProcedureName};
use crate::design::{build_design_matrix, DesignSpec, Table};
use crate::error::{HarnessError, Result, ResultExt};
use crate::io::{fmt_f64, matrix_json, procedure_label, write_json, write_release, write_rows, CsvTable};

struct Loaded {
    regressors: Vec<String>,
    responses: Vec<String>,
    data: ModelData,
    fit: FitResult,
}

fn load(ctx: &Ctx) -> Result<Loaded> {
    let section = ctx.cfg.data.as_ref().ok_or_else(|| HarnessError::Config("missing [data] section".into()))?;
    let table = Table::read_csv(&section.path)?;
    let spec = DesignSpec::resolve(section, &table)?;
    let (x, regressors) = build_design_matrix(&table, &spec).context(|| section.path.display().to_string())?;
    let y = table.responses(&section.responses)?;
    let data = ModelData::new(x, y)?;
    let fit = fit_model(&data)?;
    Ok(Loaded { regressors, responses: section.responses.clone(), data, fit })
}

fn coefficient_table(l: &Loaded) -> CsvTable {
    let mut t = CsvTable::new(std::iter::once("regressor".to_owned()).chain(l.responses.iter().cloned()));
    for (i, name) in l.regressors.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend(l.fit.b_hat.row(i).iter().map(|v| fmt_f64(*v)));
        t.push(row);
    }
    t
}

pub(super) fn fit(ctx: &Ctx) -> Result<Value> {
    let l = load(ctx)?;
    coefficient_table(&l).write(&ctx.out.path("coefficients.csv"))?;
    let summary = json!({
        "tables": ["coefficients.csv", "fit.json"],
        "n": l.fit.n,
        "m": l.fit.m,
        "p": l.fit.p,
        "regressors": l.regressors,
        "responses": l.responses,
        "b_hat": matrix_json(&l.fit.b_hat),
        "s": matrix_json(&l.fit.s),
        "gram_condition_number": l.fit.gram.condition_number(),
    });
    write_json(&ctx.out.path("fit.json"), &summary)?;
    Ok(summary)
}

fn release(ctx: &Ctx, l: &Loaded, index: usize, m_rel: usize) -> Result<SyntheticRelease> {
    let cfg = ctx.cfg;
    let mut sc = SynthesisConfig::new(
        Method::from(cfg.synthesis.method),
        m_rel,
        cfg.synthesis.alpha,
        ctx.work_stream(index as u64),
    );
    sc.plug_in_variance = cfg.synthesis.plug_in_variance.into();
    generate(&l.fit, l.data.x(), &sc).context(|| format!("synthesizing M = {m_rel}"))
}

pub(super) fn synthesize(ctx: &Ctx) -> Result<Value> {
    let l = load(ctx)?;
    let mut dirs = Vec::new();
    for (i, &m_rel) in ctx.cfg.synthesis.m_releases.iter().enumerate() {
        let r = release(ctx, &l, i, m_rel)?;
        let dir = format!("release_m{m_rel}");
        write_release(&ctx.out.path(&dir), &r, &l.responses, &l.regressors)?;
        dirs.push(dir);
    }
    Ok(json!({ "releases": dirs, "n": l.fit.n, "m": l.fit.m, "p": l.fit.p }))
}

/// `k × p` selector of the named regressors, or `None` for all of them.
fn selector(h: &Hypothesis, regressors: &[String]) -> Result<Option<DMatrix<f64>>> {
    let Some(names) = &h.regressors else { return Ok(None) };
    if names.is_empty() {
        return Err(HarnessError::Config(format!("hypothesis {:?} names no regressors", h.name)));
    }
    let mut a = DMatrix::zeros(names.len(), regressors.len());
    for (r, name) in names.iter().enumerate() {
        let c = regressors.iter().position(|x| x == name).ok_or_else(|| {
            HarnessError::Config(format!(
                "hypothesis {:?}: unknown regressor {name:?}; design has {regressors:?}",
                h.name
            ))
        })?;
        a[(r, c)] = 1.0;
    }
    Ok(Some(a))
}

#[derive(Debug, Serialize)]
struct TestRow {
    hypothesis: String,
    m_releases: usize,
    procedure: &'static str,
    k: usize,
    statistic: f64,
    cutoff: f64,
    p_value: f64,
    reject: bool,
}

pub(super) fn test(ctx: &Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    let l = load(ctx)?;
    let (synthetic, original) = ctx.procedures();
    let mut sets: Vec<(usize, Vec<CombinedEstimates>)> = Vec::new();
    if original {
        sets.push((0, vec![CombinedEstimates::original(&l.fit)]));
    }
    if !synthetic.is_empty() {
        for (i, &m_rel) in cfg.synthesis.m_releases.iter().enumerate() {
            let r = release(ctx, &l, i, m_rel)?;
            let ests = synthetic.iter().map(|&p| combine(&r, p)).collect::<synthreg_core::Result<Vec<_>>>()?;
            sets.push((m_rel, ests));
        }
    }
    let selectors = cfg.test.hypotheses.iter().map(|h| selector(h, &l.regressors)).collect::<Result<Vec<_>>>()?;
    let cut_stream = ctx.work_stream(u64::MAX);
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for (m_rel, ests) in &sets {
        for est in ests {
            for (h, a) in cfg.test.hypotheses.iter().zip(&selectors) {
                let label = || format!("hypothesis {:?}, M = {m_rel}, {:?}", h.name, est.procedure);
                let spec = match a {
                    Some(a) => PivotSpec::new(est.procedure).with_contrast(a.clone()).context(label)?,
                    None => PivotSpec::new(est.procedure),
                };
                let k = spec.k(l.fit.p);
                let params = NullParams::from_estimates(est, &spec);
                let ct = cutoff(&params, &spec, cfg.inference.gamma, cfg.inference.n_draws, cut_stream.substream(cell))
                    .context(label)?;
                cell += 1;
                let report = run_test(est, &DMatrix::zeros(k, l.fit.m), &spec, &ct).context(label)?;
                rows.push(TestRow {
                    hypothesis: h.name.clone(),
                    m_releases: *m_rel,
                    procedure: procedure_label(ProcedureName::from(est.procedure)),
                    k,
                    statistic: report.statistic,
                    cutoff: report.cutoff,
                    p_value: report.p_value,
                    reject: report.decision == Decision::Reject,
                });
            }
        }
    }
    write_rows(&ctx.out.path("tests.csv"), &rows)?;
    coefficient_table(&l).write(&ctx.out.path("coefficients.csv"))?;
    Ok(json!({ "tables": ["tests.csv", "coefficients.csv"], "tests": rows }))
}
