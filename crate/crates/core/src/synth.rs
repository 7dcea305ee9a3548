//! Synthetic-data generators: plug-in sampling, posterior predictive
//! sampling (PPS) and fixed-posterior predictive sampling (FPPS).
//!
//! Under the prior `π(B, Σ) ∝ |Σ|^{−α/2}` the posterior is
//! `Σ̃ ~ W⁻¹_m((n−p)S, n+α−p)` and `B̃ | Σ̃ ~ N(B̂, Σ̃ ⊗ (XXᵀ)⁻¹)`.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matdist::{matrix_normal_from_factors, sample_inverse_wishart, SpdMatrix};
use crate::model::{simulate_responses, FitResult};
use crate::par;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    PlugIn,
    Pps,
    Fpps,
}

/// Covariance plugged into [`Method::PlugIn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PlugInVariance {
    /// The unbiased estimator `S`.
    #[default]
    Unbiased,
    /// The MLE `Σ̂ = (n−p)S/n`.
    Mle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub method: Method,
    pub m_releases: usize,
    pub alpha: f64,
    pub rng: RngStream,
    pub plug_in_variance: PlugInVariance,
}

impl SynthesisConfig {
    pub fn new(method: Method, m_releases: usize, alpha: f64, rng: RngStream) -> Self {
        SynthesisConfig { method, m_releases, alpha, rng, plug_in_variance: PlugInVariance::default() }
    }

    /// Stream feeding the `j`-th posterior draw. FPPS only uses `j = 0`.
    pub fn posterior_stream(&self, j: usize) -> RngStream {
        self.rng.substream(0).substream(j as u64)
    }

    /// Stream feeding the noise of dataset `j`.
    pub fn data_stream(&self, j: usize) -> RngStream {
        self.rng.substream(1).substream(j as u64)
    }
}

/// One `(B̃, Σ̃)` posterior draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraw {
    pub b_tilde: DMatrix<f64>,
    pub sigma_tilde: SpdMatrix,
}

/// `M` released response matrices sharing the regressors `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRelease {
    w: Vec<DMatrix<f64>>,
    x: DMatrix<f64>,
    method: Method,
    alpha: f64,
    posterior_draws_used: usize,
}

impl SyntheticRelease {
    /// Reassembles a release, e.g. one read back from disk.
    pub fn from_parts(w: Vec<DMatrix<f64>>, x: DMatrix<f64>, method: Method, alpha: f64) -> Result<Self> {
        let Some(first) = w.first() else {
            return Err(Error::Data("release has no datasets".into()));
        };
        let (m, n) = first.shape();
        if x.ncols() != n {
            return Err(Error::dim(format!("x has {} columns, datasets have {n}", x.ncols())));
        }
        if let Some(j) = w.iter().position(|wj| wj.shape() != (m, n)) {
            return Err(Error::dim(format!("dataset {j} is {:?}, expected ({m}, {n})", w[j].shape())));
        }
        let posterior_draws_used = match method {
            Method::PlugIn => 0,
            Method::Fpps => 1,
            Method::Pps => w.len(),
        };
        Ok(SyntheticRelease { w, x, method, alpha, posterior_draws_used })
    }

    pub fn datasets(&self) -> &[DMatrix<f64>] {
        &self.w
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn posterior_draws_used(&self) -> usize {
        self.posterior_draws_used
    }

    pub fn m_releases(&self) -> usize {
        self.w.len()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn p(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.w[0].nrows()
    }

    /// `W̄ = (1/M) Σ_j W_j`, summed in ascending `j`.
    pub fn mean_dataset(&self) -> DMatrix<f64> {
        let mut acc = self.w[0].clone();
        for wj in &self.w[1..] {
            acc += wj;
        }
        acc / self.w.len() as f64
    }
}

fn check_propriety(n: usize, p: usize, m: usize, alpha: f64) -> Result<()> {
    if !(n as f64 + alpha > (p + m + 1) as f64) {
        return Err(Error::domain(format!(
            "posterior requires n + alpha > p + m + 1, got n = {n}, alpha = {alpha}, p = {p}, m = {m}"
        )));
    }
    Ok(())
}

pub fn draw_posterior<R: Rng + ?Sized>(fit: &FitResult, alpha: f64, rng: &mut R) -> Result<PosteriorDraw> {
    check_propriety(fit.n, fit.p, fit.m, alpha)?;
    let scale = SpdMatrix::labeled(&fit.s * (fit.n - fit.p) as f64, "(n-p)S")?;
    let dof = (fit.n - fit.p) as f64 + alpha;
    let sigma_tilde = sample_inverse_wishart(&scale, dof, rng)?;
    let b_tilde =
        matrix_normal_from_factors(&fit.b_hat, fit.gram.inverse().cholesky_lower(), sigma_tilde.cholesky_lower(), rng);
    Ok(PosteriorDraw { b_tilde, sigma_tilde })
}

/// One dataset `W ~ N(bᵀx, I_n ⊗ sigma)`.
pub fn sample_dataset<R: Rng + ?Sized>(
    b: &DMatrix<f64>,
    sigma: &SpdMatrix,
    x: &DMatrix<f64>,
    rng: &mut R,
) -> DMatrix<f64> {
    simulate_responses(&(b.transpose() * x), sigma, rng)
}

pub fn generate(fit: &FitResult, x: &DMatrix<f64>, cfg: &SynthesisConfig) -> Result<SyntheticRelease> {
    if x.nrows() != fit.p || x.ncols() != fit.n {
        return Err(Error::dim(format!(
            "x is {}x{} but the fit has p = {}, n = {}",
            x.nrows(),
            x.ncols(),
            fit.p,
            fit.n
        )));
    }
    if cfg.m_releases == 0 {
        return Err(Error::Config("m_releases must be at least 1".into()));
    }
    let m_rel = cfg.m_releases;
    let w = match cfg.method {
        Method::PlugIn => {
            let sigma = match cfg.plug_in_variance {
                PlugInVariance::Unbiased => fit.s.clone(),
                PlugInVariance::Mle => fit.sigma_mle(),
            };
            let sigma = SpdMatrix::labeled(sigma, "plug-in covariance")?;
            let mean = fit.b_hat.transpose() * x;
            par::map_indices(m_rel, |j| simulate_responses(&mean, &sigma, &mut cfg.data_stream(j).rng()))
        }
        Method::Fpps => {
            let draw = draw_posterior(fit, cfg.alpha, &mut cfg.posterior_stream(0).rng())?;
            let mean = draw.b_tilde.transpose() * x;
            par::map_indices(m_rel, |j| simulate_responses(&mean, &draw.sigma_tilde, &mut cfg.data_stream(j).rng()))
        }
        Method::Pps => par::try_map_indices(m_rel, |j| {
            let draw = draw_posterior(fit, cfg.alpha, &mut cfg.posterior_stream(j).rng())?;
            Ok::<_, Error>(sample_dataset(&draw.b_tilde, &draw.sigma_tilde, x, &mut cfg.data_stream(j).rng()))
        })?,
    };
    SyntheticRelease::from_parts(w, x.clone(), cfg.method, cfg.alpha)
}

/// Simulates an original sample `Y = bᵀx + E` and releases it under `cfg`.
/// The original noise comes from a substream of `cfg.rng` disjoint from the
/// ones [`generate`] uses.
pub fn simulate_release(
    b: &DMatrix<f64>,
    sigma: &SpdMatrix,
    x: &DMatrix<f64>,
    cfg: &SynthesisConfig,
) -> Result<(FitResult, SyntheticRelease)> {
    let data = crate::model::simulate_original(b, sigma, x, &mut cfg.rng.substream(2).rng())?;
    let fit = crate::model::fit(&data)?;
    let release = generate(&fit, x, cfg)?;
    Ok((fit, release))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fit as fit_model, simulate_original, Gram};
    use rand_distr::{Distribution, Normal};

    fn design(n: usize, seed: u64) -> (FitResult, DMatrix<f64>) {
        let mut rng = RngStream::new(seed, 0).rng();
        let d = Normal::new(1.0, 1.0).unwrap();
        let x = DMatrix::from_fn(3, n, |_, _| d.sample(&mut rng));
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 1.0, 1.0]);
        let sigma = SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        let data = simulate_original(&b, &sigma, &x, &mut rng).unwrap();
        (fit_model(&data).unwrap(), x)
    }

    #[test]
    fn posterior_sigma_mean() {
        let (f, _) = design(20, 1);
        let alpha = 6.0;
        let mut rng = RngStream::new(1, 1).rng();
        let reps = 100_000;
        let mut acc = DMatrix::<f64>::zeros(2, 2);
        let mut acc_b = DMatrix::<f64>::zeros(3, 2);
        for _ in 0..reps {
            let d = draw_posterior(&f, alpha, &mut rng).unwrap();
            acc += d.sigma_tilde.matrix();
            acc_b += &d.b_tilde;
        }
        let mean = acc / reps as f64;
        let truth = &f.s * (17.0 / (20.0 + 6.0 - 3.0 - 4.0 - 2.0));
        assert!((&mean - &truth).norm() / truth.norm() < 0.02, "{mean} vs {truth}");
        let mean_b = acc_b / reps as f64;
        assert!((&mean_b - &f.b_hat).amax() < 0.05, "{mean_b} vs {}", f.b_hat);
    }

    #[test]
    fn propriety_violation_is_domain_error() {
        let (f, _) = design(6, 2);
        let mut rng = RngStream::new(2, 0).rng();
        assert!(matches!(draw_posterior(&f, 0.0, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn fpps_and_pps_coincide_for_one_release() {
        let (f, x) = design(15, 3);
        let stream = RngStream::new(3, 9);
        let a = generate(&f, &x, &SynthesisConfig::new(Method::Fpps, 1, 6.0, stream)).unwrap();
        let b = generate(&f, &x, &SynthesisConfig::new(Method::Pps, 1, 6.0, stream)).unwrap();
        assert_eq!(a.datasets(), b.datasets());
        assert_eq!(a.posterior_draws_used(), 1);
        assert_eq!(b.posterior_draws_used(), 1);
    }

    #[test]
    fn provenance_counts_posterior_draws() {
        let (f, x) = design(15, 4);
        let s = RngStream::new(4, 0);
        assert_eq!(generate(&f, &x, &SynthesisConfig::new(Method::Pps, 4, 6.0, s)).unwrap().posterior_draws_used(), 4);
        assert_eq!(generate(&f, &x, &SynthesisConfig::new(Method::Fpps, 4, 6.0, s)).unwrap().posterior_draws_used(), 1);
        assert_eq!(
            generate(&f, &x, &SynthesisConfig::new(Method::PlugIn, 4, 6.0, s)).unwrap().posterior_draws_used(),
            0
        );
    }

    #[test]
    fn fpps_datasets_share_one_posterior_mean() {
        // Conditional on the single draw, B•_j − B̃ ~ N(0, Σ̃ ⊗ (XXᵀ)⁻¹) for every j.
        let (f, x) = design(40, 5);
        let gram = Gram::new(&x).unwrap();
        let reps = 4000;
        let m_rel = 5;
        let mut z_sq = 0.0;
        let mut count = 0usize;
        for r in 0..reps {
            let cfg = SynthesisConfig::new(Method::Fpps, m_rel, 6.0, RngStream::new(5, r));
            let draw = draw_posterior(&f, 6.0, &mut cfg.posterior_stream(0).rng()).unwrap();
            let rel = generate(&f, &x, &cfg).unwrap();
            for w in rel.datasets() {
                let b_j = gram.solve(&(&x * w.transpose()));
                let d = b_j - &draw.b_tilde;
                for i in 0..3 {
                    for c in 0..2 {
                        let var = gram.inverse().matrix()[(i, i)] * draw.sigma_tilde.matrix()[(c, c)];
                        z_sq += d[(i, c)].powi(2) / var;
                        count += 1;
                    }
                }
            }
        }
        let mean_sq = z_sq / count as f64;
        assert!((mean_sq - 1.0).abs() < 0.03, "{mean_sq}");
    }

    #[test]
    fn plug_in_is_centered_on_fit() {
        let (f, x) = design(12, 6);
        let reps = 20_000;
        let cfg = SynthesisConfig::new(Method::PlugIn, reps, 6.0, RngStream::new(6, 0));
        let rel = generate(&f, &x, &cfg).unwrap();
        let mean = rel.mean_dataset();
        let target = f.b_hat.transpose() * &x;
        let bound = 4.0 * (f.s.diagonal().max() / reps as f64).sqrt();
        assert!((&mean - &target).amax() < bound);
    }

    #[test]
    fn generation_is_deterministic() {
        let (f, x) = design(15, 7);
        for method in [Method::PlugIn, Method::Pps, Method::Fpps] {
            let cfg = SynthesisConfig::new(method, 3, 6.0, RngStream::new(7, 1));
            assert_eq!(generate(&f, &x, &cfg).unwrap(), generate(&f, &x, &cfg).unwrap());
        }
    }

    #[test]
    fn mismatched_x_is_rejected() {
        let (f, x) = design(15, 8);
        let cfg = SynthesisConfig::new(Method::Fpps, 2, 6.0, RngStream::new(8, 0));
        let short = x.columns(0, 10).into_owned();
        assert!(matches!(generate(&f, &short, &cfg), Err(Error::Dimension(_))));
    }
}
