//! Distribution of the classical criteria and of the pivot across the
//! correlation of `Σ`.

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};
use synthreg_core::stats::sorted;
use synthreg_core::{
    classical_criteria, combine, par, pivot_value, simulate_release, Method, PivotSpec, Procedure, SpdMatrix,
    SynthesisConfig,
};

use super::Ctx;
use crate::error::{HarnessError, Result, ResultExt};
use crate::io::{fmt_f64, CsvTable};

pub const STATISTICS: [&str; 5] = ["wilks", "pillai", "hotelling_lawley", "roy", "pivot"];

#[derive(Debug, Clone, Serialize)]
pub struct QuantileRow {
    pub rho: f64,
    pub statistic: &'static str,
    pub level: f64,
    pub quantile: f64,
    pub se: f64,
}

#[derive(Debug, Serialize)]
struct Shift {
    statistic: &'static str,
    level: f64,
    /// Largest pairwise quantile difference across `ρ`, in standard errors.
    max_shift_se: f64,
}

/// Order statistic `⌈qN⌉` of sorted draws.
pub fn order_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let idx = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[idx - 1]
}

/// Distribution-free standard error of the `q` quantile: half the distance
/// between the order statistics at `q ± sqrt(q(1−q)/N)`.
pub fn quantile_se(sorted: &[f64], q: f64) -> f64 {
    let s = (q * (1.0 - q) / sorted.len() as f64).sqrt();
    0.5 * (order_quantile(sorted, (q + s).min(1.0)) - order_quantile(sorted, (q - s).max(0.0)))
}

pub(super) fn run(ctx: &Ctx) -> Result<Value> {
    let cfg = ctx.cfg;
    let np = &cfg.nonpivotal;
    let b = cfg.model_b()?;
    let procedure = Procedure::from(np.procedure);
    let spec = PivotSpec::new(procedure);
    let x = ctx.design_x(b.nrows(), np.n)?;
    let mut rows = Vec::new();
    for (i, &rho) in np.rho.iter().enumerate() {
        let label = || format!("rho = {rho}");
        let sigma = SpdMatrix::labeled(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]), "sigma(rho)")
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let stream = ctx.work_stream(i as u64);
        let draws = par::try_map_indices(cfg.mc.iterations, |r| {
            let mut sc = SynthesisConfig::new(
                Method::from(cfg.synthesis.method),
                np.m_releases,
                np.alpha,
                stream.substream(r as u64),
            );
            sc.plug_in_variance = cfg.synthesis.plug_in_variance.into();
            let (_, release) = simulate_release(&b, &sigma, &x, &sc)?;
            let est = combine(&release, procedure)?;
            let c = classical_criteria(&est, &b)?;
            Ok::<_, synthreg_core::Error>([c.wilks, c.pillai, c.hotelling_lawley, c.roy, pivot_value(&est, &b, &spec)?])
        })
        .context(label)?;
        let mut table = CsvTable::new(STATISTICS);
        for d in &draws {
            table.push(d.iter().map(|v| fmt_f64(*v)).collect());
        }
        table.write(&ctx.out.path(&format!("draws_{i}.csv")))?;
        for (s, name) in STATISTICS.iter().enumerate() {
            let v = sorted(&draws.iter().map(|d| d[s]).collect::<Vec<_>>());
            for &level in &np.levels {
                rows.push(QuantileRow {
                    rho,
                    statistic: name,
                    level,
                    quantile: order_quantile(&v, level),
                    se: quantile_se(&v, level),
                });
            }
        }
    }
    let mut shifts = Vec::new();
    for name in STATISTICS {
        for &level in &np.levels {
            let cells: Vec<&QuantileRow> = rows.iter().filter(|r| r.statistic == name && r.level == level).collect();
            let mut max_shift_se: f64 = 0.0;
            for a in &cells {
                for c in &cells {
                    let se = (a.se * a.se + c.se * c.se).sqrt();
                    if se > 0.0 {
                        max_shift_se = max_shift_se.max((a.quantile - c.quantile).abs() / se);
                    }
                }
            }
            shifts.push(Shift { statistic: name, level, max_shift_se });
        }
    }
    crate::io::write_rows(&ctx.out.path("nonpivotal.csv"), &rows)?;
    Ok(json!({
        "tables": ["nonpivotal.csv"],
        "draws": (0..np.rho.len()).map(|i| format!("draws_{i}.csv")).collect::<Vec<_>>(),
        "quantiles": rows,
        "shifts": shifts,
    }))
}
