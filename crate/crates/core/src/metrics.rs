//! Utility (confidence-set radius) and disclosure-risk measures.

use alloc::format;
use alloc::vec::Vec;

use crate::combine::{CombinedEstimates, Procedure};
use crate::error::{Error, Result};
use crate::inference::CutoffTable;
use crate::matdist::{falling_factorial_ratio, SpdMatrix};
use crate::math;
use crate::model::ModelData;
use crate::par;
use crate::pivotal::{NullParams, PivotSpec};
use crate::rng::RngStream;
use crate::stats::proportion_se;
use crate::synth::SyntheticRelease;

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusReport {
    /// `Υ_M = δ·|S̃|`.
    pub upsilon: f64,
    /// Closed-form `E(Υ_M)`.
    pub expected: f64,
    pub delta: f64,
    pub m_releases: usize,
    pub procedure: Procedure,
    pub params: NullParams,
}

/// `E(Υ_M) = δ · (n−p)!/(n−p−m)! · K · |Σ|`.
pub fn expected_radius(params: &NullParams, procedure: Procedure, delta: f64, sigma: &SpdMatrix) -> Result<f64> {
    let NullParams { n, m, p, alpha, .. } = *params;
    if sigma.dim() != m {
        return Err(Error::dim(format!("sigma has dim {}, expected m = {m}", sigma.dim())));
    }
    let base = falling_factorial_ratio((n - p) as f64, m)?;
    let k_factor = match procedure {
        Procedure::Original => 1.0,
        Procedure::Proc1 | Procedure::Proc2 => {
            let alpha = alpha.ok_or_else(|| Error::Config("synthetic radius needs alpha".into()))?;
            let kappa = n as f64 + alpha - p as f64 - m as f64 - 1.0;
            let denom = params.denom_dof(procedure) as f64;
            falling_factorial_ratio(denom, m)? / falling_factorial_ratio(kappa - 2.0, m)?
        }
    };
    Ok(delta * base * k_factor * sigma.det())
}

/// Radius of the `B` (or, for a contrast cut-off, `AB`) confidence set for
/// `est`, with its expected value under the true covariance `sigma`.
pub fn radius(est: &CombinedEstimates, ct: &CutoffTable, sigma: &SpdMatrix) -> Result<RadiusReport> {
    let spec = PivotSpec::new(est.procedure);
    let params = NullParams { k: ct.params().k, ..NullParams::from_estimates(est, &spec) };
    if *ct.params() != params || ct.procedure() != est.procedure || ct.distribution().scaled() {
        return Err(Error::Config(format!(
            "cut-off table for {:?} ({:?}) does not match estimates {:?} ({:?})",
            ct.params(),
            ct.procedure(),
            params,
            est.procedure
        )));
    }
    let upsilon = (ct.delta * est.s_tilde().determinant()).max(0.0);
    let expected = expected_radius(&params, est.procedure, ct.delta, sigma)?;
    Ok(RadiusReport {
        upsilon,
        expected,
        delta: ct.delta,
        m_releases: est.m_releases,
        procedure: est.procedure,
        params,
    })
}

/// Minimum, quartiles and maximum; quartiles are medians of the lower and
/// upper halves, each half including the median when the count is odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl FiveNumberSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Data("five-number summary of an empty sample".into()));
        }
        let v = crate::stats::sorted(values);
        let n = v.len();
        let half = n.div_ceil(2);
        Ok(FiveNumberSummary {
            min: v[0],
            q1: median_sorted(&v[..half]),
            median: median_sorted(&v),
            q3: median_sorted(&v[n - half..]),
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyReport {
    pub epsilon: f64,
    pub n_mc: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma1_se: f64,
    pub gamma2_se: f64,
    pub gamma3_se: f64,
    /// Summary of the per-cell probabilities `D₁`.
    pub d1_summary: FiveNumberSummary,
    /// Summary of the per-release mean relative error `D₃`.
    pub d3_summary: FiveNumberSummary,
}

struct ReleaseErrors {
    cells: Vec<f64>,
    rms: Vec<f64>,
    grand: f64,
}

fn release_errors(y: &nalgebra::DMatrix<f64>, release: &SyntheticRelease) -> Result<ReleaseErrors> {
    if release.datasets()[0].shape() != y.shape() {
        return Err(Error::dim(format!(
            "release datasets are {:?}, original responses {:?}",
            release.datasets()[0].shape(),
            y.shape()
        )));
    }
    let y_hat = release.mean_dataset();
    let (m, n) = y.shape();
    let mut cells = Vec::with_capacity(m * n);
    let mut rms = Vec::with_capacity(n);
    for i in 0..n {
        let mut sq = 0.0;
        for j in 0..m {
            let e = ((y_hat[(j, i)] - y[(j, i)]) / y[(j, i)]).abs();
            sq += e * e;
            cells.push(e);
        }
        rms.push(math::sqrt(sq / m as f64));
    }
    let grand = cells.iter().sum::<f64>() / (m * n) as f64;
    Ok(ReleaseErrors { cells, rms, grand })
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    if values.len() < 2 {
        return (values.iter().sum::<f64>() / values.len() as f64, 0.0);
    }
    crate::stats::mean_se(values)
}

/// Disclosure-risk measures at several thresholds, evaluated on the same
/// `n_mc` releases so they are exactly monotone in `ε`. Release `l` is
/// produced by `sampler(rng.substream(l))`.
pub fn privacy_sweep<F>(
    original: &ModelData,
    sampler: F,
    epsilons: &[f64],
    n_mc: usize,
    rng: RngStream,
) -> Result<Vec<PrivacyReport>>
where
    F: Fn(RngStream) -> Result<SyntheticRelease> + Sync + Send,
{
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::Config(format!("epsilon must be positive, got {e}")));
    }
    if n_mc == 0 {
        return Err(Error::Config("n_mc must be positive".into()));
    }
    let y = original.y();
    let (m, n) = y.shape();
    for i in 0..n {
        for j in 0..m {
            if y[(j, i)] == 0.0 {
                return Err(Error::Data(format!("response {j} of observation {i} is zero")));
            }
        }
    }
    let errors = par::try_map_indices(n_mc, |l| release_errors(y, &sampler(rng.substream(l as u64))?))?;
    let cells = m * n;
    let d3: Vec<f64> = errors.iter().map(|e| e.grand).collect();
    let d3_summary = FiveNumberSummary::from_values(&d3)?;
    epsilons
        .iter()
        .map(|&eps| {
            let mut cell_hits = alloc::vec![0usize; cells];
            let mut frac1 = Vec::with_capacity(n_mc);
            let mut frac2 = Vec::with_capacity(n_mc);
            let mut hits3 = 0usize;
            for e in &errors {
                let mut c1 = 0usize;
                for (slot, &v) in cell_hits.iter_mut().zip(&e.cells) {
                    if v < eps {
                        *slot += 1;
                        c1 += 1;
                    }
                }
                frac1.push(c1 as f64 / cells as f64);
                frac2.push(e.rms.iter().filter(|&&r| r < eps).count() as f64 / n as f64);
                if e.grand < eps {
                    hits3 += 1;
                }
            }
            let d1: Vec<f64> = cell_hits.iter().map(|&h| h as f64 / n_mc as f64).collect();
            let (gamma1, gamma1_se) = mean_and_se(&frac1);
            let (gamma2, gamma2_se) = mean_and_se(&frac2);
            let gamma3 = hits3 as f64 / n_mc as f64;
            Ok(PrivacyReport {
                epsilon: eps,
                n_mc,
                gamma1,
                gamma2,
                gamma3,
                gamma1_se,
                gamma2_se,
                gamma3_se: proportion_se(gamma3, n_mc),
                d1_summary: FiveNumberSummary::from_values(&d1)?,
                d3_summary,
            })
        })
        .collect()
}

/// [`privacy_sweep`] at a single threshold.
pub fn privacy<F>(original: &ModelData, sampler: F, epsilon: f64, n_mc: usize, rng: RngStream) -> Result<PrivacyReport>
where
    F: Fn(RngStream) -> Result<SyntheticRelease> + Sync + Send,
{
    Ok(privacy_sweep(original, sampler, &[epsilon], n_mc, rng)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::combine;
    use crate::inference::cutoff;
    use crate::model::{fit, simulate_original};
    use crate::synth::{generate, Method, SynthesisConfig};
    use nalgebra::DMatrix;
    use rand_distr::{Distribution, Normal};

    fn design_x(n: usize) -> DMatrix<f64> {
        let mut rng = RngStream::new(200, 0).rng();
        let d = Normal::new(1.0, 1.0).unwrap();
        DMatrix::from_fn(3, n, |_, _| d.sample(&mut rng))
    }

    fn design_sigma() -> SpdMatrix {
        SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap()
    }

    #[test]
    fn five_number_summary_conventions() {
        let s = FiveNumberSummary::from_values(&[7.0, 1.0, 3.0, 5.0, 9.0]).unwrap();
        assert_eq!(s, FiveNumberSummary { min: 1.0, q1: 3.0, median: 5.0, q3: 7.0, max: 9.0 });
        let s = FiveNumberSummary::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s, FiveNumberSummary { min: 1.0, q1: 1.5, median: 2.5, q3: 3.5, max: 4.0 });
        let s = FiveNumberSummary::from_values(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        assert_eq!((s.q1, s.q3), (2.5, 5.5));
    }

    #[test]
    fn expected_radius_original_has_unit_k() {
        let params = NullParams { m_releases: 0, n: 10, m: 2, p: 3, k: 3, alpha: None };
        let e = expected_radius(&params, Procedure::Original, 2.0, &design_sigma()).unwrap();
        assert!((e - 2.0 * 7.0 * 6.0 * 0.75).abs() < 1e-12);
    }

    #[test]
    fn expected_radius_single_release() {
        // κ = 10, K = 7·6/(8·7) = 0.75, E = δ · 42 · 0.75 · 0.75.
        let params = NullParams { m_releases: 1, n: 10, m: 2, p: 3, k: 3, alpha: Some(6.0) };
        let e = expected_radius(&params, Procedure::Proc1, 1.0, &design_sigma()).unwrap();
        assert!((e - 23.625).abs() < 1e-12);
    }

    #[test]
    fn radius_matches_expectation() {
        let n = 10;
        let x = design_x(n);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 1.0, 1.0]);
        let params = NullParams { m_releases: 2, n, m: 2, p: 3, k: 3, alpha: Some(6.0) };
        let spec = PivotSpec::new(Procedure::Proc2);
        let ct = cutoff(&params, &spec, 0.05, 20_000, RngStream::new(1, 0)).unwrap();
        let reps = 20_000;
        let root = RngStream::new(1, 1);
        let mut total = 0.0;
        let mut expected = 0.0;
        for r in 0..reps {
            let s = root.substream(r);
            let f = fit(&simulate_original(&b, &design_sigma(), &x, &mut s.substream(2).rng()).unwrap()).unwrap();
            let rel = generate(&f, &x, &SynthesisConfig::new(Method::Fpps, 2, 6.0, s)).unwrap();
            let rep = radius(&combine(&rel, Procedure::Proc2).unwrap(), &ct, &design_sigma()).unwrap();
            total += rep.upsilon;
            expected = rep.expected;
        }
        let avg = total / reps as f64;
        assert!((avg / expected - 1.0).abs() < 0.05, "{avg} vs {expected}");
    }

    fn positive_design() -> (ModelData, crate::model::FitResult) {
        let n = 30;
        let x = design_x(n);
        let b = DMatrix::from_row_slice(3, 2, &[20.0, 25.0, 3.0, 2.0, 1.0, 1.0]);
        let data = simulate_original(&b, &design_sigma(), &x, &mut RngStream::new(3, 0).rng()).unwrap();
        let f = fit(&data).unwrap();
        (data, f)
    }

    #[test]
    fn identity_synthesizer_discloses_everything() {
        let (data, _) = positive_design();
        let y = data.y().clone();
        let x = data.x().clone();
        let r = privacy(
            &data,
            |_| SyntheticRelease::from_parts(alloc::vec![y.clone()], x.clone(), Method::PlugIn, 0.0),
            0.01,
            10,
            RngStream::new(4, 0),
        )
        .unwrap();
        assert_eq!((r.gamma1, r.gamma2, r.gamma3), (1.0, 1.0, 1.0));
        assert_eq!(r.d3_summary.max, 0.0);
    }

    #[test]
    fn huge_epsilon_gives_full_risk_and_sweep_is_monotone() {
        let (data, f) = positive_design();
        let x = data.x().clone();
        let sampler = |s: RngStream| generate(&f, &x, &SynthesisConfig::new(Method::Fpps, 2, 6.0, s));
        let reps = privacy_sweep(&data, sampler, &[0.01, 0.05, 0.1, 1e9], 200, RngStream::new(5, 0)).unwrap();
        let last = reps.last().unwrap();
        assert_eq!((last.gamma1, last.gamma2, last.gamma3), (1.0, 1.0, 1.0));
        for w in reps.windows(2) {
            assert!(w[0].gamma1 <= w[1].gamma1 && w[0].gamma2 <= w[1].gamma2 && w[0].gamma3 <= w[1].gamma3);
        }
        for r in &reps {
            for g in [r.gamma1, r.gamma2, r.gamma3] {
                assert!((0.0..=1.0).contains(&g));
            }
            let s = r.d1_summary;
            assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
            assert!(r.d3_summary.min >= 0.0);
        }
    }

    #[test]
    fn zero_response_is_data_error() {
        let (data, _) = positive_design();
        let mut y = data.y().clone();
        y[(1, 4)] = 0.0;
        let bad = ModelData::new(data.x().clone(), y).unwrap();
        let x = data.x().clone();
        let r = privacy(
            &bad,
            |_| SyntheticRelease::from_parts(alloc::vec![DMatrix::zeros(2, 30)], x.clone(), Method::PlugIn, 0.0),
            0.1,
            5,
            RngStream::new(6, 0),
        );
        assert!(matches!(r, Err(Error::Data(msg)) if msg.contains("observation 4")));
    }
}
