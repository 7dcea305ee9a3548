//! Pivotal statistics for `B` (or `AB`) on synthetic releases, their null
//! distributions by stochastic representation, and the classical criteria
//! that fail to be pivotal in this setting.
//!
//! Under the null the pivot is distributed as
//! `∏_{i=1}^{m} χ²_{k−i+1} / χ²_{D−i+1} · |((M+1)/M)·I + Ω|` with
//! `Ω = A₁^{1/2} A₂⁻¹ A₁^{1/2}`, `A₁ ~ W_m(I, n+α−p−m−1)`, `A₂ ~ W_m(I, n−p)`,
//! `D = M(n−p)` (procedure 1) or `Mn−p` (procedure 2). For original data
//! `D = n−p` and the determinant factor is absent.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::combine::{CombinedEstimates, Procedure};
use crate::error::{Error, Result};
use crate::matdist::{chi_squared, sample_wishart, spd_sqrt, SpdMatrix};
use crate::math;
use crate::par;
use crate::rng::RngStream;

const BLOCK: usize = 1024;

/// Which pivot to evaluate: procedure, optional `k × p` contrast `A`, and
/// whether the statistic is scaled by `D^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotSpec {
    pub procedure: Procedure,
    contrast: Option<DMatrix<f64>>,
    pub scaled: bool,
}

impl PivotSpec {
    pub fn new(procedure: Procedure) -> Self {
        PivotSpec { procedure, contrast: None, scaled: false }
    }

    /// Tests `AB = C` instead of `B = B₀`. `A` must have full row rank.
    pub fn with_contrast(mut self, a: DMatrix<f64>) -> Result<Self> {
        let (k, p) = a.shape();
        if k == 0 || k > p {
            return Err(Error::Config(format!("contrast is {k}x{p}; need 1 <= k <= p")));
        }
        let sv = a.singular_values();
        let max = sv.max();
        let min = sv.min();
        if !(min > 1e-10 * max) {
            return Err(Error::RankDeficient(format!(
                "contrast has rank below k = {k} (singular values {min:.3e} .. {max:.3e})"
            )));
        }
        self.contrast = Some(a);
        Ok(self)
    }

    pub fn with_scaled(mut self, scaled: bool) -> Self {
        self.scaled = scaled;
        self
    }

    pub fn contrast(&self) -> Option<&DMatrix<f64>> {
        self.contrast.as_ref()
    }

    /// Rows of the contrast, or `p` without one.
    pub fn k(&self, p: usize) -> usize {
        self.contrast.as_ref().map_or(p, |a| a.nrows())
    }
}

/// Dimensions indexing a pivot's null distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullParams {
    /// `M`; zero for original data.
    pub m_releases: usize,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub k: usize,
    pub alpha: Option<f64>,
}

impl NullParams {
    pub fn from_estimates(est: &CombinedEstimates, spec: &PivotSpec) -> Self {
        NullParams { m_releases: est.m_releases, n: est.n, m: est.m, p: est.p, k: spec.k(est.p), alpha: est.alpha }
    }

    /// Denominator dof `D` under `procedure`.
    pub fn denom_dof(&self, procedure: Procedure) -> usize {
        match procedure {
            Procedure::Proc1 => self.m_releases * (self.n - self.p),
            Procedure::Proc2 => self.m_releases * self.n - self.p,
            Procedure::Original => self.n - self.p,
        }
    }

    pub fn validate(&self, procedure: Procedure) -> Result<()> {
        let NullParams { m_releases, n, m, p, k, alpha } = *self;
        if m == 0 || p == 0 || k == 0 {
            return Err(Error::Config("m, p and k must be positive".into()));
        }
        if p < m || k < m {
            return Err(Error::domain(format!("pivot needs p >= m and k >= m, got p = {p}, k = {k}, m = {m}")));
        }
        if k > p {
            return Err(Error::Config(format!("contrast rows k = {k} exceed p = {p}")));
        }
        if n < p + m {
            return Err(Error::domain(format!("need n >= p + m, got n = {n}, p = {p}, m = {m}")));
        }
        match procedure {
            Procedure::Original => Ok(()),
            Procedure::Proc1 | Procedure::Proc2 => {
                if m_releases == 0 {
                    return Err(Error::Config("synthetic procedures need M >= 1".into()));
                }
                let alpha = alpha.ok_or_else(|| Error::Config("synthetic procedures need alpha".into()))?;
                if !(n as f64 + alpha > (p + 2 * m + 2) as f64) {
                    return Err(Error::domain(format!(
                        "n + alpha > p + 2m + 2 required, got n = {n}, alpha = {alpha}, p = {p}, m = {m}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Sorted Monte Carlo draws of a pivot's null distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    draws: Vec<f64>,
    params: NullParams,
    procedure: Procedure,
    scaled: bool,
    seed: Option<RngStream>,
}

impl EmpiricalDistribution {
    pub fn from_draws(
        mut draws: Vec<f64>,
        params: NullParams,
        procedure: Procedure,
        scaled: bool,
        seed: Option<RngStream>,
    ) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::Data("empirical distribution has no draws".into()));
        }
        if let Some(i) = draws.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Data(format!("draw {i} is {}, expected a finite nonnegative value", draws[i])));
        }
        draws.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution { draws, params, procedure, scaled, seed })
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn n_draws(&self) -> usize {
        self.draws.len()
    }

    pub fn params(&self) -> &NullParams {
        &self.params
    }

    pub fn procedure(&self) -> Procedure {
        self.procedure
    }

    pub fn scaled(&self) -> bool {
        self.scaled
    }

    pub fn seed(&self) -> Option<RngStream> {
        self.seed
    }

    /// Upper empirical quantile: the order statistic `⌈q·N⌉` (1-based).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.draws.len();
        let idx = math::ceil(q * n as f64) as usize;
        self.draws[idx.clamp(1, n) - 1]
    }

    /// Fraction of draws `≥ statistic`.
    pub fn p_value(&self, statistic: f64) -> f64 {
        let below = self.draws.partition_point(|&d| d < statistic);
        (self.draws.len() - below) as f64 / self.draws.len() as f64
    }
}

/// SPD factorization that also rejects numerically singular input.
fn well_conditioned(a: DMatrix<f64>, what: &str) -> Result<SpdMatrix> {
    let eig = SymmetricEigen::new(a.clone()).eigenvalues;
    let (min, max) = (eig.min(), eig.max());
    if !(max > 0.0 && min > 1e-12 * max) {
        return Err(Error::Degenerate(format!("{what} is singular (eigenvalues {min:.3e} .. {max:.3e})")));
    }
    SpdMatrix::new(a).map_err(|_| Error::Degenerate(format!("{what} is not positive definite")))
}

fn log_det_psd(a: &DMatrix<f64>) -> f64 {
    match SpdMatrix::new(a.clone()) {
        Ok(s) => s.log_det(),
        Err(_) => {
            let d = a.determinant();
            if d > 0.0 {
                math::ln(d)
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

/// The pivot evaluated at hypothesis `hyp` (`B₀`, `p × m`, or `C₀`, `k × m`
/// with a contrast).
pub fn pivot_value(est: &CombinedEstimates, hyp: &DMatrix<f64>, spec: &PivotSpec) -> Result<f64> {
    if est.procedure != spec.procedure {
        return Err(Error::Config(format!(
            "estimates come from {:?} but the pivot is for {:?}",
            est.procedure, spec.procedure
        )));
    }
    let numerator = match spec.contrast() {
        None => {
            if hyp.shape() != est.b_bar.shape() {
                return Err(Error::dim(format!("hypothesis is {:?}, B is {:?}", hyp.shape(), est.b_bar.shape())));
            }
            let diff = &est.b_bar - hyp;
            diff.transpose() * est.gram.xxt().matrix() * diff
        }
        Some(a) => {
            if a.ncols() != est.p || hyp.shape() != (a.nrows(), est.m) {
                return Err(Error::dim(format!(
                    "contrast is {:?} and hypothesis {:?} for p = {}, m = {}",
                    a.shape(),
                    hyp.shape(),
                    est.p,
                    est.m
                )));
            }
            if a.nrows() < est.m {
                return Err(Error::domain(format!("contrast rows k = {} below m = {}", a.nrows(), est.m)));
            }
            let diff = a * &est.b_bar - hyp;
            let middle = SpdMatrix::labeled(a * est.gram.inverse().matrix() * a.transpose(), "A(XX')^-1A'")?;
            diff.transpose() * middle.solve(&diff)
        }
    };
    let numerator = (&numerator + numerator.transpose()) * 0.5;
    let d = est.denom_dof as f64;
    let denom = well_conditioned(est.s_tilde(), "denominator covariance matrix")?;
    let mut log_t = log_det_psd(&numerator) - denom.log_det();
    if spec.scaled {
        log_t += est.m as f64 * math::ln(d);
    }
    Ok(math::exp(log_t))
}

fn draw_null<R: Rng + ?Sized>(
    rng: &mut R,
    params: &NullParams,
    procedure: Procedure,
    scaled: bool,
    identity: &SpdMatrix,
) -> Result<f64> {
    let m = params.m;
    let k = params.k as f64;
    let d = params.denom_dof(procedure) as f64;
    let mut log_t = 0.0;
    for i in 0..m {
        let num = chi_squared(k - i as f64, rng)?;
        let den = chi_squared(d - i as f64, rng)?;
        log_t += math::ln(num) - math::ln(den);
    }
    if procedure != Procedure::Original {
        let alpha = params.alpha.unwrap_or_default();
        let nmp = (params.n - params.p) as f64;
        let a1 = sample_wishart(identity, nmp + alpha - m as f64 - 1.0, rng)?;
        let a2 = sample_wishart(identity, nmp, rng)?;
        let r = spd_sqrt(&a1);
        let omega = &r * a2.solve(&r);
        let c = (params.m_releases as f64 + 1.0) / params.m_releases as f64;
        let shifted = DMatrix::identity(m, m) * c + (&omega + omega.transpose()) * 0.5;
        log_t += log_det_psd(&shifted);
    }
    if scaled {
        log_t += m as f64 * math::ln(d);
    }
    Ok(math::exp(log_t))
}

/// `n_draws` draws from the null distribution, generated in fixed blocks of
/// substreams of `rng` so the result does not depend on the thread count.
pub fn sample_pivot_null(
    params: &NullParams,
    spec: &PivotSpec,
    n_draws: usize,
    rng: RngStream,
) -> Result<EmpiricalDistribution> {
    params.validate(spec.procedure)?;
    if let Some(a) = spec.contrast() {
        if a.nrows() != params.k || a.ncols() != params.p {
            return Err(Error::Config(format!(
                "contrast {:?} does not match k = {}, p = {}",
                a.shape(),
                params.k,
                params.p
            )));
        }
    }
    if n_draws == 0 {
        return Err(Error::Config("n_draws must be positive".into()));
    }
    let identity = SpdMatrix::identity(params.m);
    let blocks = par::blocks(n_draws, BLOCK);
    let chunks = par::try_map_indices(blocks.len(), |b| {
        let mut r = rng.substream(b as u64).rng();
        (0..blocks[b].1)
            .map(|_| draw_null(&mut r, params, spec.procedure, spec.scaled, &identity))
            .collect::<Result<Vec<f64>>>()
    })?;
    let draws = chunks.into_iter().flatten().collect();
    EmpiricalDistribution::from_draws(draws, *params, spec.procedure, spec.scaled, Some(rng))
}

/// The four classical MANOVA-type criteria with
/// `Q = (B̄−B)ᵀXXᵀ(B̄−B)` and `S̄ = s_scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalCriteria {
    /// `|S̄| / |S̄ + Q|`.
    pub wilks: f64,
    /// `tr(Q S̄⁻¹)`.
    pub pillai: f64,
    /// `tr(Q (Q + S̄)⁻¹)`.
    pub hotelling_lawley: f64,
    /// Largest eigenvalue of `Q S̄⁻¹`.
    pub roy: f64,
}

pub fn classical_criteria(est: &CombinedEstimates, b_hyp: &DMatrix<f64>) -> Result<ClassicalCriteria> {
    if b_hyp.shape() != est.b_bar.shape() {
        return Err(Error::dim(format!("hypothesis is {:?}, B is {:?}", b_hyp.shape(), est.b_bar.shape())));
    }
    let diff = &est.b_bar - b_hyp;
    let q = diff.transpose() * est.gram.xxt().matrix() * &diff;
    let q = (&q + q.transpose()) * 0.5;
    let s = well_conditioned(est.s_scale.clone(), "combined covariance matrix")?;
    let sq = SpdMatrix::new(&est.s_scale + &q).map_err(|_| Error::Degenerate("S + Q is singular".into()))?;
    let wilks = math::exp(s.log_det() - sq.log_det());
    let pillai = s.solve(&q).trace();
    let hotelling_lawley = sq.solve(&q).trace();
    // Eigenvalues of Q S̄⁻¹ equal those of L⁻¹ Q L⁻ᵀ with S̄ = L Lᵀ.
    let l = s.cholesky_lower();
    let mut t = q.clone();
    l.solve_lower_triangular_mut(&mut t);
    let mut sym = t.transpose();
    l.solve_lower_triangular_mut(&mut sym);
    let sym = (&sym + sym.transpose()) * 0.5;
    let roy = SymmetricEigen::new(sym).eigenvalues.max().max(0.0);
    Ok(ClassicalCriteria { wilks, pillai, hotelling_lawley, roy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::{combine, combine_proc1};
    use crate::model::{fit, simulate_original};
    use crate::stats::ks_two_sample;
    use crate::synth::{generate, Method, SynthesisConfig, SyntheticRelease};
    use rand_distr::{Distribution, FisherF, Normal};

    fn design_x(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = RngStream::new(seed, 0).rng();
        let d = Normal::new(1.0, 1.0).unwrap();
        DMatrix::from_fn(3, n, |_, _| d.sample(&mut rng))
    }

    fn design_b() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 1.0, 1.0])
    }

    fn design_sigma() -> SpdMatrix {
        SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap()
    }

    fn estimates(n: usize, m_rel: usize, procedure: Procedure, seed: u64) -> CombinedEstimates {
        let x = design_x(n, 1);
        let mut rng = RngStream::new(seed, 1).rng();
        let f = fit(&simulate_original(&design_b(), &design_sigma(), &x, &mut rng).unwrap()).unwrap();
        let rel = generate(&f, &x, &SynthesisConfig::new(Method::Fpps, m_rel, 6.0, RngStream::new(seed, 2))).unwrap();
        combine(&rel, procedure).unwrap()
    }

    #[test]
    fn pivot_is_zero_at_estimate() {
        for proc in [Procedure::Proc1, Procedure::Proc2] {
            let est = estimates(20, 3, proc, 1);
            assert_eq!(pivot_value(&est, &est.b_bar, &PivotSpec::new(proc)).unwrap(), 0.0);
        }
    }

    #[test]
    fn pivot_rejects_mismatched_procedure() {
        let est = estimates(20, 2, Procedure::Proc1, 2);
        let r = pivot_value(&est, &design_b(), &PivotSpec::new(Procedure::Proc2));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn scalar_pivot_matches_hotelling_form() {
        let n = 15;
        let x = design_x(n, 3);
        let mut rng = RngStream::new(3, 0).rng();
        let b = DMatrix::from_row_slice(3, 1, &[1.0, 3.0, 1.0]);
        let f = fit(&simulate_original(&b, &SpdMatrix::identity(1), &x, &mut rng).unwrap()).unwrap();
        let rel = generate(&f, &x, &SynthesisConfig::new(Method::Fpps, 1, 2.0, RngStream::new(3, 1))).unwrap();
        let est = combine_proc1(&rel).unwrap();
        let t = pivot_value(&est, &b, &PivotSpec::new(Procedure::Proc1)).unwrap();
        // Scalar path: quadratic form by explicit sums.
        let xxt = &x * x.transpose();
        let d: Vec<f64> = (0..3).map(|i| est.b_bar[(i, 0)] - b[(i, 0)]).collect();
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += d[i] * xxt[(i, j)] * d[j];
            }
        }
        let oracle = quad / ((n - 3) as f64 * est.s_scale[(0, 0)]);
        assert!((t - oracle).abs() < 1e-10 * oracle);
    }

    #[test]
    fn identity_contrast_reproduces_plain_pivot() {
        let est = estimates(25, 2, Procedure::Proc2, 4);
        let plain = pivot_value(&est, &design_b(), &PivotSpec::new(Procedure::Proc2)).unwrap();
        let spec = PivotSpec::new(Procedure::Proc2).with_contrast(DMatrix::identity(3, 3)).unwrap();
        let with = pivot_value(&est, &design_b(), &spec).unwrap();
        assert!((plain - with).abs() < 1e-10 * plain);
    }

    #[test]
    fn scaled_variant_differs_by_power_of_denominator() {
        let est = estimates(25, 5, Procedure::Proc1, 5);
        let plain = pivot_value(&est, &design_b(), &PivotSpec::new(Procedure::Proc1)).unwrap();
        let scaled = pivot_value(&est, &design_b(), &PivotSpec::new(Procedure::Proc1).with_scaled(true)).unwrap();
        let d = est.denom_dof as f64;
        assert!((scaled / (plain * d * d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_contrast_rejected() {
        let a = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 2.0, 0.0]);
        assert!(matches!(PivotSpec::new(Procedure::Proc1).with_contrast(a), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn null_sampling_rejects_bad_dof() {
        let params = NullParams { m_releases: 1, n: 6, m: 2, p: 3, k: 3, alpha: Some(2.0) };
        let r = sample_pivot_null(&params, &PivotSpec::new(Procedure::Proc1), 100, RngStream::new(0, 0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn scalar_null_matches_density_sampler() {
        // m = 1: (p/D)·F_{p,D}·((M+1)/M + ω) with ω = χ²_{n+α−p−2}/χ²_{n−p}.
        let (n, p, alpha, m_rel) = (10usize, 3usize, 2.0, 2usize);
        let d = m_rel * (n - p);
        let params = NullParams { m_releases: m_rel, n, m: 1, p, k: p, alpha: Some(alpha) };
        let draws =
            sample_pivot_null(&params, &PivotSpec::new(Procedure::Proc1), 100_000, RngStream::new(6, 0)).unwrap();
        let mut rng = RngStream::new(6, 1).rng();
        let f = FisherF::new(p as f64, d as f64).unwrap();
        let a1 = (n - p) as f64 + alpha - 2.0;
        let a2 = (n - p) as f64;
        let w = FisherF::new(a1, a2).unwrap();
        let c = (m_rel as f64 + 1.0) / m_rel as f64;
        let oracle: Vec<f64> = (0..100_000)
            .map(|_| (p as f64 / d as f64) * f.sample(&mut rng) * (c + a1 / a2 * w.sample(&mut rng)))
            .collect();
        let ks = ks_two_sample(draws.draws(), &oracle);
        assert!(ks < 0.01, "ks = {ks}");
    }

    #[test]
    fn scaled_null_approaches_limit_for_large_m() {
        let (n, p, m, alpha, m_rel) = (20usize, 3usize, 2usize, 6.0, 10_000usize);
        let params = NullParams { m_releases: m_rel, n, m, p, k: p, alpha: Some(alpha) };
        let spec = PivotSpec::new(Procedure::Proc1).with_scaled(true);
        let draws = sample_pivot_null(&params, &spec, 50_000, RngStream::new(7, 0)).unwrap();
        let mut rng = RngStream::new(7, 1).rng();
        let id = SpdMatrix::identity(m);
        let limit: Vec<f64> = (0..50_000)
            .map(|_| {
                let chi: f64 = (0..m).map(|i| chi_squared((p - i) as f64, &mut rng).unwrap()).product();
                let a1 = sample_wishart(&id, (n - p) as f64 + alpha - m as f64 - 1.0, &mut rng).unwrap();
                let a2 = sample_wishart(&id, (n - p) as f64, &mut rng).unwrap();
                let omega = a2.solve(a1.matrix());
                chi * (DMatrix::identity(m, m) + omega).determinant()
            })
            .collect();
        let ks = ks_two_sample(draws.draws(), &limit);
        assert!(ks < 0.02, "ks = {ks}");
    }

    #[test]
    fn null_sampling_is_reproducible_and_sorted() {
        let params = NullParams { m_releases: 2, n: 20, m: 2, p: 3, k: 3, alpha: Some(6.0) };
        let spec = PivotSpec::new(Procedure::Proc2);
        let a = sample_pivot_null(&params, &spec, 3000, RngStream::new(8, 0)).unwrap();
        let b = sample_pivot_null(&params, &spec, 3000, RngStream::new(8, 0)).unwrap();
        assert_eq!(a, b);
        assert!(a.draws().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn quantile_and_p_value_conventions() {
        let params = NullParams { m_releases: 1, n: 10, m: 1, p: 3, k: 3, alpha: Some(2.0) };
        let dist = EmpiricalDistribution::from_draws(
            (1..=100).rev().map(|i| i as f64).collect(),
            params,
            Procedure::Proc1,
            false,
            None,
        )
        .unwrap();
        assert_eq!(dist.quantile(0.95), 95.0);
        assert_eq!(dist.quantile(0.951), 96.0);
        assert_eq!(dist.p_value(95.0), 0.06);
        assert_eq!(dist.p_value(0.0), 1.0);
        assert_eq!(dist.p_value(101.0), 0.0);
    }

    #[test]
    fn classical_criteria_null_displacement() {
        let est = estimates(30, 2, Procedure::Proc1, 9);
        let c = classical_criteria(&est, &est.b_bar).unwrap();
        assert_eq!(c, ClassicalCriteria { wilks: 1.0, pillai: 0.0, hotelling_lawley: 0.0, roy: 0.0 });
    }

    #[test]
    fn classical_criteria_scalar_case() {
        let n = 15;
        let x = design_x(n, 10);
        let b = DMatrix::from_row_slice(3, 1, &[1.0, 3.0, 1.0]);
        let mut rng = RngStream::new(10, 0).rng();
        let f = fit(&simulate_original(&b, &SpdMatrix::identity(1), &x, &mut rng).unwrap()).unwrap();
        let rel = generate(&f, &x, &SynthesisConfig::new(Method::Fpps, 2, 4.0, RngStream::new(10, 1))).unwrap();
        let est = combine_proc1(&rel).unwrap();
        let c = classical_criteria(&est, &b).unwrap();
        let diff = &est.b_bar - &b;
        let q = (diff.transpose() * &x * x.transpose() * &diff)[(0, 0)];
        let s = est.s_scale[(0, 0)];
        let ratio = q / s;
        assert!((c.roy - ratio).abs() < 1e-10 * ratio);
        assert!((c.pillai - ratio).abs() < 1e-10 * ratio);
        assert!((c.wilks - 1.0 / (1.0 + ratio)).abs() < 1e-12);
        assert!((c.hotelling_lawley - ratio / (1.0 + ratio)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        let x = design_x(10, 11);
        let mut rng = RngStream::new(11, 0).rng();
        let noise = Normal::new(0.0, 1.0).unwrap();
        let row = nalgebra::RowDVector::from_fn(10, |_, _| noise.sample(&mut rng));
        let mut w = DMatrix::zeros(2, 10);
        w.set_row(0, &row);
        w.set_row(1, &row);
        let rel = SyntheticRelease::from_parts(alloc::vec![w], x, Method::Fpps, 6.0).unwrap();
        let est = combine_proc1(&rel).unwrap();
        let r = pivot_value(&est, &DMatrix::zeros(3, 2), &PivotSpec::new(Procedure::Proc1));
        assert!(matches!(r, Err(Error::Degenerate(_))));
        assert!(matches!(classical_criteria(&est, &DMatrix::zeros(3, 2)), Err(Error::Degenerate(_))));
    }
}
