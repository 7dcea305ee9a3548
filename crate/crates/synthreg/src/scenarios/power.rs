//! Size and power along `B + t·direction`, testing `B`.

use serde::Serialize;
use serde_json::{json, Value};
use synthreg_core::{power_with_cutoff, Method, PivotSpec, PowerStudy, Procedure};

use super::Ctx;
use crate::config::{matrix_from_rows, ProcedureName};
use crate::error::{Result, ResultExt};
use crate::io::{procedure_label, write_rows};

#[derive(Debug, Serialize)]
struct Row {
    n: usize,
    m_releases: usize,
    procedure: &'static str,
    step: f64,
    delta: f64,
    power: f64,
    se: f64,
    replicates: usize,
}

pub(super) fn run(ctx: &Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    let (b, sigma) = ctx.model()?;
    let direction = matrix_from_rows(&cfg.power.direction, "power.direction")?;
    let (synthetic, mut original) = ctx.procedures();
    original |= cfg.power.include_original;
    let mut studies = Vec::new();
    for &n in &cfg.model.n {
        if original {
            studies.push((n, 0, Procedure::Original));
        }
        for &m_rel in &cfg.synthesis.m_releases {
            for &p in &synthetic {
                studies.push((n, m_rel, p));
            }
        }
    }
    let mut rows = Vec::new();
    for (si, &(n, m_rel, procedure)) in studies.iter().enumerate() {
        let label = || format!("n = {n}, M = {m_rel}, {procedure:?}");
        let study = PowerStudy {
            x: ctx.design_x(b.nrows(), n)?,
            sigma: sigma.clone(),
            hypothesis: b.clone(),
            spec: PivotSpec::new(procedure),
            method: Method::from(cfg.synthesis.method),
            m_releases: m_rel,
            alpha: cfg.synthesis.alpha,
            gamma: cfg.inference.gamma,
            n_null_draws: cfg.inference.n_draws,
        };
        let stream = ctx.work_stream(si as u64);
        let ct = study.cutoff(stream.substream(0)).context(label)?;
        for &t in &cfg.power.steps {
            let b_alt = &b + &direction * t;
            // The same replicate streams are reused for every step.
            let est = power_with_cutoff(&study, &ct, &b_alt, cfg.mc.iterations, stream.substream(1)).context(label)?;
            rows.push(Row {
                n,
                m_releases: m_rel,
                procedure: procedure_label(ProcedureName::from(procedure)),
                step: t,
                delta: ct.delta,
                power: est.power,
                se: est.se,
                replicates: est.n_replicates,
            });
        }
    }
    write_rows(&ctx.out.path("power.csv"), &rows)?;
    Ok(json!({ "tables": ["power.csv"], "power": rows }))
}
