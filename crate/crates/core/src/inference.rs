//! Cut-off points, tests, p-values and power built on the pivots.

use alloc::format;
use nalgebra::DMatrix;

use crate::combine::{combine, CombinedEstimates, Procedure};
use crate::error::{Error, Result};
use crate::matdist::SpdMatrix;
use crate::model::{fit, simulate_original};
use crate::par;
use crate::pivotal::{pivot_value, sample_pivot_null, EmpiricalDistribution, NullParams, PivotSpec};
use crate::rng::RngStream;
use crate::stats::proportion_se;
use crate::synth::{simulate_release, Method, SynthesisConfig};

/// Simulated `(1−γ)` cut-off `δ` together with the null draws it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffTable {
    pub gamma: f64,
    pub delta: f64,
    distribution: EmpiricalDistribution,
}

impl CutoffTable {
    pub fn from_distribution(distribution: EmpiricalDistribution, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let delta = distribution.quantile(1.0 - gamma);
        Ok(CutoffTable { gamma, delta, distribution })
    }

    pub fn distribution(&self) -> &EmpiricalDistribution {
        &self.distribution
    }

    pub fn params(&self) -> &NullParams {
        self.distribution.params()
    }

    pub fn procedure(&self) -> Procedure {
        self.distribution.procedure()
    }

    pub fn n_draws(&self) -> usize {
        self.distribution.n_draws()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok(())
}

pub fn cutoff(
    params: &NullParams,
    spec: &PivotSpec,
    gamma: f64,
    n_draws: usize,
    rng: RngStream,
) -> Result<CutoffTable> {
    check_gamma(gamma)?;
    if n_draws < 1000 {
        return Err(Error::Config(format!("cut-offs need at least 1000 null draws, got {n_draws}")));
    }
    CutoffTable::from_distribution(sample_pivot_null(params, spec, n_draws, rng)?, gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Reject,
    FailToReject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestReport {
    pub statistic: f64,
    pub cutoff: f64,
    pub p_value: f64,
    pub decision: Decision,
}

impl TestReport {
    /// Whether the hypothesized value lies in the `(1−γ)` confidence set.
    pub fn in_confidence_set(&self) -> bool {
        self.decision == Decision::FailToReject
    }
}

/// Tests `B = hyp` (or `AB = hyp` under a contrast) against the cut-off.
pub fn test(est: &CombinedEstimates, hyp: &DMatrix<f64>, spec: &PivotSpec, ct: &CutoffTable) -> Result<TestReport> {
    let expected = NullParams::from_estimates(est, spec);
    if *ct.params() != expected || ct.procedure() != spec.procedure || ct.distribution().scaled() != spec.scaled {
        return Err(Error::Config(format!(
            "cut-off table was built for {:?} ({:?}, scaled = {}) but the estimates need {:?} ({:?}, scaled = {})",
            ct.params(),
            ct.procedure(),
            ct.distribution().scaled(),
            expected,
            spec.procedure,
            spec.scaled
        )));
    }
    let statistic = pivot_value(est, hyp, spec)?;
    let decision = if statistic > ct.delta { Decision::Reject } else { Decision::FailToReject };
    Ok(TestReport { statistic, cutoff: ct.delta, p_value: ct.distribution().p_value(statistic), decision })
}

/// Fixed design of a power (or size) study. With `Procedure::Original` in
/// `spec` the test is run on the simulated original data and the synthesis
/// fields are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudy {
    pub x: DMatrix<f64>,
    pub sigma: SpdMatrix,
    /// `B₀` (`p × m`), or `C₀` (`k × m`) under a contrast.
    pub hypothesis: DMatrix<f64>,
    pub spec: PivotSpec,
    pub method: Method,
    pub m_releases: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub n_null_draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub power: f64,
    pub se: f64,
    pub n_replicates: usize,
}

impl PowerStudy {
    pub fn null_params(&self) -> NullParams {
        let (p, n) = self.x.shape();
        let original = self.spec.procedure == Procedure::Original;
        NullParams {
            m_releases: if original { 0 } else { self.m_releases },
            n,
            m: self.sigma.dim(),
            p,
            k: self.spec.k(p),
            alpha: if original { None } else { Some(self.alpha) },
        }
    }

    /// Estimates for one replicate with true coefficients `b_true`.
    pub fn replicate_estimates(&self, b_true: &DMatrix<f64>, stream: RngStream) -> Result<CombinedEstimates> {
        if self.spec.procedure == Procedure::Original {
            let data = simulate_original(b_true, &self.sigma, &self.x, &mut stream.substream(2).rng())?;
            return Ok(CombinedEstimates::original(&fit(&data)?));
        }
        let cfg = SynthesisConfig::new(self.method, self.m_releases, self.alpha, stream);
        let (_, release) = simulate_release(b_true, &self.sigma, &self.x, &cfg)?;
        combine(&release, self.spec.procedure)
    }

    pub fn cutoff(&self, rng: RngStream) -> Result<CutoffTable> {
        cutoff(&self.null_params(), &self.spec, self.gamma, self.n_null_draws, rng)
    }
}

/// Rejection rate of the study's null hypothesis when data are generated
/// with `b_alt`; the cut-off is simulated from `rng` as well.
pub fn power(study: &PowerStudy, b_alt: &DMatrix<f64>, n_replicates: usize, rng: RngStream) -> Result<PowerEstimate> {
    let ct = study.cutoff(rng.substream(0))?;
    power_with_cutoff(study, &ct, b_alt, n_replicates, rng.substream(1))
}

/// [`power`] against a precomputed cut-off; replicate `r` uses
/// `rng.substream(r)`.
pub fn power_with_cutoff(
    study: &PowerStudy,
    ct: &CutoffTable,
    b_alt: &DMatrix<f64>,
    n_replicates: usize,
    rng: RngStream,
) -> Result<PowerEstimate> {
    if n_replicates == 0 {
        return Err(Error::Config("n_replicates must be positive".into()));
    }
    let rejected = par::try_map_indices(n_replicates, |r| {
        let est = study.replicate_estimates(b_alt, rng.substream(r as u64))?;
        Ok::<_, Error>(test(&est, &study.hypothesis, &study.spec, ct)?.decision == Decision::Reject)
    })?;
    let power = rejected.iter().filter(|&&r| r).count() as f64 / n_replicates as f64;
    Ok(PowerEstimate { power, se: proportion_se(power, n_replicates), n_replicates })
}
