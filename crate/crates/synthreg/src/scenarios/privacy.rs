//! Disclosure-risk measures on a simulated original sample.

use serde::Serialize;
use serde_json::{json, Value};
use synthreg_core::{fit, generate, privacy_sweep, simulate_original, FiveNumberSummary, Method, SynthesisConfig};

use super::Ctx;
use crate::config::MethodName;
use crate::error::{Result, ResultExt};
use crate::io::{method_label, write_rows};

#[derive(Debug, Serialize)]
struct Row {
    n: usize,
    method: &'static str,
    m_releases: usize,
    epsilon: f64,
    gamma1: f64,
    gamma1_se: f64,
    gamma2: f64,
    gamma2_se: f64,
    gamma3: f64,
    gamma3_se: f64,
    d1_min: f64,
    d1_q1: f64,
    d1_median: f64,
    d1_q3: f64,
    d1_max: f64,
    d3_min: f64,
    d3_q1: f64,
    d3_median: f64,
    d3_q3: f64,
    d3_max: f64,
    iterations: usize,
}

pub(super) fn run(ctx: &Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    let (b, sigma) = ctx.model()?;
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &n in &cfg.model.n {
        let x = ctx.design_x(b.nrows(), n)?;
        let data = simulate_original(&b, &sigma, &x, &mut ctx.design_stream(n).substream(0).rng())?;
        let fitted = fit(&data)?;
        for &m_rel in &cfg.synthesis.m_releases {
            let stream = ctx.work_stream(cell);
            cell += 1;
            for &method in &cfg.privacy.methods {
                let sampler = |s| {
                    let mut sc = SynthesisConfig::new(Method::from(method), m_rel, cfg.synthesis.alpha, s);
                    sc.plug_in_variance = cfg.synthesis.plug_in_variance.into();
                    generate(&fitted, &x, &sc)
                };
                let reports = privacy_sweep(&data, sampler, &cfg.privacy.epsilons, cfg.mc.iterations, stream)
                    .context(|| format!("n = {n}, M = {m_rel}, {}", method_label(method)))?;
                rows.extend(reports.into_iter().map(|r| row(n, method, m_rel, &r)));
            }
        }
    }
    write_rows(&ctx.out.path("privacy.csv"), &rows)?;
    Ok(json!({ "tables": ["privacy.csv"], "privacy": rows }))
}

fn row(n: usize, method: MethodName, m_rel: usize, r: &synthreg_core::PrivacyReport) -> Row {
    let FiveNumberSummary { min: d1_min, q1: d1_q1, median: d1_median, q3: d1_q3, max: d1_max } = r.d1_summary;
    let FiveNumberSummary { min: d3_min, q1: d3_q1, median: d3_median, q3: d3_q3, max: d3_max } = r.d3_summary;
    Row {
        n,
        method: method_label(method),
        m_releases: m_rel,
        epsilon: r.epsilon,
        gamma1: r.gamma1,
        gamma1_se: r.gamma1_se,
        gamma2: r.gamma2,
        gamma2_se: r.gamma2_se,
        gamma3: r.gamma3,
        gamma3_se: r.gamma3_se,
        d1_min,
        d1_q1,
        d1_median,
        d1_q3,
        d1_max,
        d3_min,
        d3_q1,
        d3_median,
        d3_q3,
        d3_max,
        iterations: r.n_mc,
    }
}
