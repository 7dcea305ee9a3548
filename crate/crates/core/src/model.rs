//! The multivariate linear regression model `Y = BᵀX + E` and its
//! original-data estimators.

use alloc::format;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matdist::{matrix_normal_from_factors, SpdMatrix};

const MAX_CONDITION: f64 = 1e12;

/// `XXᵀ` for a fixed regressor matrix, with its Cholesky factor and inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    xxt: SpdMatrix,
    inv: SpdMatrix,
    condition: f64,
}

impl Gram {
    pub fn new(x: &DMatrix<f64>) -> Result<Self> {
        let p = x.nrows();
        if p == 0 || x.ncols() == 0 {
            return Err(Error::dim("regressor matrix is empty"));
        }
        let xxt = x * x.transpose();
        let eig = SymmetricEigen::new(xxt.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::RankDeficient(format!(
                "XX' has condition number {condition:.3e} (largest/smallest eigenvalue {max:.3e}/{min:.3e}), limit {MAX_CONDITION:.0e}"
            )));
        }
        let xxt = SpdMatrix::labeled(xxt, "XX'")?;
        let inv = xxt.inverse()?;
        Ok(Gram { xxt, inv, condition })
    }

    pub fn p(&self) -> usize {
        self.xxt.dim()
    }

    pub fn xxt(&self) -> &SpdMatrix {
        &self.xxt
    }

    /// `(XXᵀ)⁻¹`.
    pub fn inverse(&self) -> &SpdMatrix {
        &self.inv
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// `(XXᵀ)⁻¹·rhs` via the Cholesky factor.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.xxt.solve(rhs)
    }

    /// OLS coefficients `(XXᵀ)⁻¹XYᵀ` and the residual cross-product of `y`
    /// on `x`.
    pub(crate) fn ols(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let b = self.solve(&(x * y.transpose()));
        let resid = y - b.transpose() * x;
        let cross = &resid * resid.transpose();
        let cross = (&cross + cross.transpose()) * 0.5;
        (b, cross)
    }
}

/// Confidential sample: `x` is `p × n`, `y` is `m × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelData {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

impl ModelData {
    /// Checks `rank(x) = p` (through the conditioning of `XXᵀ`) and
    /// `n ≥ m + p`.
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::dim(format!("x has {} observations, y has {}", x.ncols(), y.ncols())));
        }
        let (p, m, n) = (x.nrows(), y.nrows(), x.ncols());
        if m == 0 {
            return Err(Error::dim("no response rows"));
        }
        if n < m + p {
            return Err(Error::dim(format!("need n >= m + p, got n = {n}, m = {m}, p = {p}")));
        }
        Gram::new(&x)?;
        Ok(ModelData { x, y })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn m(&self) -> usize {
        self.y.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.nrows()
    }
}

/// `B̂` (`p × m`) and the unbiased residual covariance `S` (`m × m`).
///
/// `s` is kept as a plain matrix: it is singular for noiseless data.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub b_hat: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub gram: Gram,
}

impl FitResult {
    /// `S` as an SPD matrix, failing for degenerate fits.
    pub fn s_spd(&self) -> Result<SpdMatrix> {
        SpdMatrix::labeled(self.s.clone(), "S")
    }

    /// The MLE `Σ̂ = (n − p)S / n`.
    pub fn sigma_mle(&self) -> DMatrix<f64> {
        &self.s * ((self.n - self.p) as f64 / self.n as f64)
    }
}

pub fn fit(data: &ModelData) -> Result<FitResult> {
    let gram = Gram::new(data.x())?;
    Ok(fit_with_gram(data, gram))
}

/// [`fit`] reusing a precomputed `XXᵀ` for the same `x`.
pub fn fit_with_gram(data: &ModelData, gram: Gram) -> FitResult {
    let (b_hat, cross) = gram.ols(data.x(), data.y());
    let (n, m, p) = (data.n(), data.m(), data.p());
    FitResult { b_hat, s: cross / (n - p) as f64, n, m, p, gram }
}

/// Draws `Y = BᵀX + E` with the columns of `E` iid `N_m(0, Σ)`.
pub fn simulate_original<R: Rng + ?Sized>(
    b: &DMatrix<f64>,
    sigma: &SpdMatrix,
    x: &DMatrix<f64>,
    rng: &mut R,
) -> Result<ModelData> {
    if b.nrows() != x.nrows() || b.ncols() != sigma.dim() {
        return Err(Error::dim(format!(
            "b is {}x{}, x has {} rows, sigma has dim {}",
            b.nrows(),
            b.ncols(),
            x.nrows(),
            sigma.dim()
        )));
    }
    let y = simulate_responses(&(b.transpose() * x), sigma, rng);
    ModelData::new(x.clone(), y)
}

/// `mean + L·Z` with `L·Lᵀ = sigma`: every column is `N_m(mean_col, sigma)`.
pub(crate) fn simulate_responses<R: Rng + ?Sized>(mean: &DMatrix<f64>, sigma: &SpdMatrix, rng: &mut R) -> DMatrix<f64> {
    let n = mean.ncols();
    matrix_normal_from_factors(mean, sigma.cholesky_lower(), &DMatrix::identity(n, n), rng)
}
