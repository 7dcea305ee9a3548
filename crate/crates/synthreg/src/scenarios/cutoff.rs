use serde::Serialize;
use serde_json::{json, Value};
use synthreg_core::{cutoff, NullParams, PivotSpec, Procedure};

use super::Ctx;
use crate::config::ProcedureName;
use crate::error::{Result, ResultExt};
use crate::io::{procedure_label, write_distribution, write_rows};

#[derive(Debug, Serialize)]
struct Row {
    cell: usize,
    n: usize,
    p: usize,
    m: usize,
    k: usize,
    alpha: Option<f64>,
    m_releases: usize,
    procedure: &'static str,
    scaled: bool,
    gamma: f64,
    delta: f64,
    n_draws: usize,
    distribution: String,
}

pub(super) fn run(ctx: &Ctx) -> Result<Value> {
    let gamma = ctx.cfg.inference.gamma;
    let n_draws = ctx.cfg.inference.n_draws;
    let mut rows = Vec::new();
    for (i, cell) in ctx.cfg.cutoff.cells.iter().enumerate() {
        let original = cell.procedure == ProcedureName::Original;
        let procedure = Procedure::from(cell.procedure);
        let params = NullParams {
            m_releases: if original { 0 } else { cell.m_releases },
            n: cell.n,
            m: cell.m,
            p: cell.p,
            k: cell.k.unwrap_or(cell.p),
            alpha: if original { None } else { Some(cell.alpha) },
        };
        let spec = PivotSpec::new(procedure).with_scaled(cell.scaled);
        let ct = cutoff(&params, &spec, gamma, n_draws, ctx.work_stream(i as u64))
            .context(|| format!("cut-off cell {i} ({cell:?})"))?;
        let file = format!("null_{i}.txt");
        write_distribution(&ctx.out.path(&file), ct.distribution())?;
        rows.push(Row {
            cell: i,
            n: params.n,
            p: params.p,
            m: params.m,
            k: params.k,
            alpha: params.alpha,
            m_releases: params.m_releases,
            procedure: procedure_label(cell.procedure),
            scaled: cell.scaled,
            gamma,
            delta: ct.delta,
            n_draws,
            distribution: file,
        });
    }
    write_rows(&ctx.out.path("cutoffs.csv"), &rows)?;
    Ok(json!({ "tables": ["cutoffs.csv"], "cutoffs": rows }))
}
