//! Combining a release into `(B̄, S)` estimates.
//!
//! Procedure 1 averages the per-dataset OLS fits. Procedure 2 fits the
//! averaged dataset and pools the within-release scatter, which equals OLS on
//! the `nM` stacked observations. `Original` wraps a fit of the confidential
//! data so the same pivots and radius apply to it with `M = 0`.

use alloc::format;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matdist::SpdMatrix;
use crate::model::{FitResult, Gram};
use crate::synth::SyntheticRelease;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Procedure {
    Proc1,
    Proc2,
    Original,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedEstimates {
    pub b_bar: DMatrix<f64>,
    /// `S̄•_M` (procedure 1), `S•_comb` (procedure 2) or `S` (original).
    pub s_scale: DMatrix<f64>,
    pub procedure: Procedure,
    /// `M(n−p)`, `Mn−p` or `n−p`.
    pub denom_dof: usize,
    pub m_releases: usize,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    /// Prior exponent of the synthesizer; `None` for original data.
    pub alpha: Option<f64>,
    pub gram: Gram,
}

impl CombinedEstimates {
    pub fn original(fit: &FitResult) -> Self {
        CombinedEstimates {
            b_bar: fit.b_hat.clone(),
            s_scale: fit.s.clone(),
            procedure: Procedure::Original,
            denom_dof: fit.n - fit.p,
            m_releases: 0,
            n: fit.n,
            m: fit.m,
            p: fit.p,
            alpha: None,
            gram: fit.gram.clone(),
        }
    }

    /// `S̃ = denom_dof · s_scale`.
    pub fn s_tilde(&self) -> DMatrix<f64> {
        &self.s_scale * self.denom_dof as f64
    }
}

fn check_denominator(est: &CombinedEstimates) -> Result<()> {
    if est.denom_dof < est.m {
        return Err(Error::Degenerate(format!("denominator dof {} is below m = {}", est.denom_dof, est.m)));
    }
    Ok(())
}

pub fn combine_proc1(release: &SyntheticRelease) -> Result<CombinedEstimates> {
    let gram = Gram::new(release.x())?;
    let (n, p, m, m_rel) = (release.n(), release.p(), release.m(), release.m_releases());
    let mut b_sum = DMatrix::zeros(p, m);
    let mut s_sum = DMatrix::zeros(m, m);
    for w in release.datasets() {
        let (b, cross) = gram.ols(release.x(), w);
        b_sum += b;
        s_sum += cross / (n - p) as f64;
    }
    let est = CombinedEstimates {
        b_bar: b_sum / m_rel as f64,
        s_scale: s_sum / m_rel as f64,
        procedure: Procedure::Proc1,
        denom_dof: m_rel * (n - p),
        m_releases: m_rel,
        n,
        m,
        p,
        alpha: Some(release.alpha()),
        gram,
    };
    check_denominator(&est)?;
    Ok(est)
}

pub fn combine_proc2(release: &SyntheticRelease) -> Result<CombinedEstimates> {
    let gram = Gram::new(release.x())?;
    let (n, p, m, m_rel) = (release.n(), release.p(), release.m(), release.m_releases());
    let w_bar = release.mean_dataset();
    let (b_bar, s_mean) = gram.ols(release.x(), &w_bar);
    let mut s_w = DMatrix::zeros(m, m);
    for w in release.datasets() {
        let d = w - &w_bar;
        s_w += &d * d.transpose();
    }
    let s_w = (&s_w + s_w.transpose()) * 0.5;
    let denom = m_rel * n - p;
    let est = CombinedEstimates {
        b_bar,
        s_scale: (s_w + s_mean * m_rel as f64) / denom as f64,
        procedure: Procedure::Proc2,
        denom_dof: denom,
        m_releases: m_rel,
        n,
        m,
        p,
        alpha: Some(release.alpha()),
        gram,
    };
    check_denominator(&est)?;
    Ok(est)
}

/// Dispatches on `procedure`; original-data estimates come from
/// [`CombinedEstimates::original`] instead.
pub fn combine(release: &SyntheticRelease, procedure: Procedure) -> Result<CombinedEstimates> {
    match procedure {
        Procedure::Proc1 => combine_proc1(release),
        Procedure::Proc2 => combine_proc2(release),
        Procedure::Original => Err(Error::Config("a synthetic release cannot be combined as original data".into())),
    }
}

/// `Ŝ = ((n+α−p−2m−2)/(n−p)) · s_scale`, unbiased for `Σ`.
pub fn unbiased_sigma(est: &CombinedEstimates) -> Result<SpdMatrix> {
    let factor = match est.alpha {
        None => 1.0,
        Some(alpha) => {
            let num = est.n as f64 + alpha - est.p as f64 - 2.0 * est.m as f64 - 2.0;
            if !(num > 0.0) {
                return Err(Error::domain(format!(
                    "unbiased estimator requires n + alpha > p + 2m + 2, got n = {}, alpha = {alpha}, p = {}, m = {}",
                    est.n, est.p, est.m
                )));
            }
            num / (est.n - est.p) as f64
        }
    };
    SpdMatrix::labeled(&est.s_scale * factor, "combined covariance")
}
