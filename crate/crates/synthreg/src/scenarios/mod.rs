//! Scenario drivers. Each writes its tables into the staging directory and
//! returns the JSON summary.

mod cutoff;
mod data;
mod mc;
pub(crate) mod nonpivotal;
mod power;
mod privacy;

use nalgebra::DMatrix;
use rand_distr::{Distribution, Normal};
use serde_json::Value;
use synthreg_core::{PivotSpec, Procedure, RngStream, SpdMatrix};

use crate::config::{ExperimentConfig, ProcedureName, Scenario};
use crate::error::{HarnessError, Result};
use crate::io::Staging;

pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub out: &'a Staging,
    pub root: RngStream,
}

impl Ctx<'_> {
    /// Stream reserved for the simulated design of size `n`.
    pub fn design_stream(&self, n: usize) -> RngStream {
        self.root.substream(0).substream(n as u64)
    }

    /// Stream for the `index`-th unit of scenario work.
    pub fn work_stream(&self, index: u64) -> RngStream {
        self.root.substream(1).substream(index)
    }

    /// `p × n` regressors with iid `N(x_mean, x_sd²)` entries; the first row
    /// is all ones when the model has an intercept.
    pub fn design_x(&self, p: usize, n: usize) -> Result<DMatrix<f64>> {
        let model = &self.cfg.model;
        let dist = Normal::new(model.x_mean, model.x_sd).map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut rng = self.design_stream(n).rng();
        let mut x = DMatrix::from_fn(p, n, |_, _| dist.sample(&mut rng));
        if model.intercept {
            x.row_mut(0).fill(1.0);
        }
        Ok(x)
    }

    pub fn model(&self) -> Result<(DMatrix<f64>, SpdMatrix)> {
        Ok((self.cfg.model_b()?, self.cfg.model_sigma()?))
    }

    /// Configured synthetic procedures (in order) and whether the original
    /// data should be analysed too.
    pub fn procedures(&self) -> (Vec<Procedure>, bool) {
        let mut synthetic = Vec::new();
        let mut original = false;
        for p in &self.cfg.inference.procedures {
            match p {
                ProcedureName::Original => original = true,
                other => {
                    let p = Procedure::from(*other);
                    if !synthetic.contains(&p) {
                        synthetic.push(p);
                    }
                }
            }
        }
        (synthetic, original)
    }
}

/// A confidence set target: `B` itself, or `AB` for a contrast `A`.
#[derive(Debug, Clone)]
pub(crate) struct Target {
    pub label: &'static str,
    pub contrast: Option<DMatrix<f64>>,
}

impl Target {
    pub fn all(cfg: &ExperimentConfig) -> Result<Vec<Target>> {
        let mut v = vec![Target { label: "B", contrast: None }];
        if let Some(a) = cfg.model_contrast()? {
            v.push(Target { label: "AB", contrast: Some(a) });
        }
        Ok(v)
    }

    pub fn spec(&self, procedure: Procedure) -> Result<PivotSpec> {
        let spec = PivotSpec::new(procedure);
        Ok(match &self.contrast {
            Some(a) => spec.with_contrast(a.clone())?,
            None => spec,
        })
    }

    /// Hypothesized value when the truth is `b`.
    pub fn truth(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.contrast {
            Some(a) => a * b,
            None => b.clone(),
        }
    }
}

pub(crate) fn execute(cfg: &ExperimentConfig, out: &Staging) -> Result<Value> {
    let ctx = Ctx { cfg, out, root: RngStream::from_seed(cfg.mc.seed) };
    match cfg.scenario {
        Scenario::Fit => data::fit(&ctx),
        Scenario::Synthesize => data::synthesize(&ctx),
        Scenario::Test => data::test(&ctx),
        Scenario::CutoffTable => cutoff::run(&ctx),
        Scenario::Coverage => mc::coverage(&ctx),
        Scenario::Radius => mc::radius(&ctx),
        Scenario::Power => power::run(&ctx),
        Scenario::Privacy => privacy::run(&ctx),
        Scenario::NonPivotalDemo => nonpivotal::run(&ctx),
    }
}
