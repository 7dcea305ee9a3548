//! Random-matrix distributions and the dense linear-algebra helpers the rest
//! of the crate is built on.
//!
//! Conventions: a matrix-normal draw `X ~ N(mean, col_cov ⊗ row_cov)` has
//! `vec(X)` (columns stacked) with covariance `col_cov ⊗ row_cov`, i.e.
//! `X = mean + Lr·Z·Lcᵀ`. The inverse Wishart `W⁻¹_m(Ψ, ν)` is parameterized
//! so that its inverse is `W_m(Ψ⁻¹, ν − m − 1)` and its mean is
//! `Ψ / (ν − 2m − 2)`.

use alloc::format;
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math;

const SYMMETRY_TOL: f64 = 1e-10;

/// A symmetric positive-definite matrix stored with its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    lower: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::labeled(matrix, "matrix")
    }

    /// Like [`SpdMatrix::new`], reporting failures against `what`.
    pub fn labeled(matrix: DMatrix<f64>, what: &'static str) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dim(format!("{what} is {}x{}, expected square", matrix.nrows(), matrix.ncols())));
        }
        if matrix.nrows() == 0 {
            return Err(Error::dim(format!("{what} is empty")));
        }
        let scale = matrix.amax();
        if !scale.is_finite() {
            return Err(Error::NotPositiveDefinite { what });
        }
        let m = matrix.nrows();
        for i in 0..m {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { what });
                }
            }
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let chol = Cholesky::new(sym.clone()).ok_or(Error::NotPositiveDefinite { what })?;
        let lower = chol.l();
        if (0..m).any(|i| lower[(i, i)] <= 0.0 || !lower[(i, i)].is_finite()) {
            return Err(Error::NotPositiveDefinite { what });
        }
        Ok(SpdMatrix { matrix: sym, lower })
    }

    pub fn identity(m: usize) -> Self {
        SpdMatrix { matrix: DMatrix::identity(m, m), lower: DMatrix::identity(m, m) }
    }

    /// Diagonal matrix from strictly positive entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::NotPositiveDefinite { what: "diagonal" });
        }
        let m = diag.len();
        let matrix = DMatrix::from_fn(m, m, |i, j| if i == j { diag[i] } else { 0.0 });
        let lower = DMatrix::from_fn(m, m, |i, j| if i == j { math::sqrt(diag[i]) } else { 0.0 });
        Ok(SpdMatrix { matrix, lower })
    }

    /// Builds `F·Fᵀ` from a lower-triangular factor with positive diagonal.
    pub(crate) fn from_lower_factor(lower: DMatrix<f64>) -> Self {
        let prod = &lower * lower.transpose();
        let matrix = (&prod + prod.transpose()) * 0.5;
        SpdMatrix { matrix, lower }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Lower Cholesky factor `L` with `L·Lᵀ = self`.
    pub fn cholesky_lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| math::ln(self.lower[(i, i)])).sum::<f64>()
    }

    pub fn det(&self) -> f64 {
        math::exp(self.log_det())
    }

    pub fn inverse(&self) -> Result<SpdMatrix> {
        let m = self.dim();
        let inv = self.solve(&DMatrix::identity(m, m));
        SpdMatrix::labeled((&inv + inv.transpose()) * 0.5, "inverse")
    }

    /// `self⁻¹·rhs` by two triangular solves.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = rhs.clone();
        self.lower.solve_lower_triangular_mut(&mut out);
        self.lower.tr_solve_lower_triangular_mut(&mut out);
        out
    }

    /// `c · self` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<SpdMatrix> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(SpdMatrix { matrix: &self.matrix * c, lower: &self.lower * math::sqrt(c) })
    }
}

fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub(crate) fn chi_squared<R: Rng + ?Sized>(dof: f64, rng: &mut R) -> Result<f64> {
    let dist =
        ChiSquared::new(dof).map_err(|_| Error::domain(format!("chi-squared dof must be positive, got {dof}")))?;
    Ok(dist.sample(rng))
}

/// `mean + La·Z·Lbᵀ` for lower factors `La`, `Lb`.
pub(crate) fn matrix_normal_from_factors<R: Rng + ?Sized>(
    mean: &DMatrix<f64>,
    row_lower: &DMatrix<f64>,
    col_lower: &DMatrix<f64>,
    rng: &mut R,
) -> DMatrix<f64> {
    let z = standard_normal_matrix(mean.nrows(), mean.ncols(), rng);
    mean + row_lower * z * col_lower.transpose()
}

/// Matrix-normal distribution `N(mean, col_cov ⊗ row_cov)` with both
/// covariance factors prepared up front.
#[derive(Debug, Clone)]
pub struct MatrixNormal {
    mean: DMatrix<f64>,
    row_cov: SpdMatrix,
    col_cov: SpdMatrix,
}

impl MatrixNormal {
    /// Factorization failures name the offending argument (`row_cov` or
    /// `col_cov`).
    pub fn new(mean: DMatrix<f64>, row_cov: DMatrix<f64>, col_cov: DMatrix<f64>) -> Result<Self> {
        let row_cov = SpdMatrix::labeled(row_cov, "row_cov")?;
        let col_cov = SpdMatrix::labeled(col_cov, "col_cov")?;
        check_matrix_normal_dims(&mean, &row_cov, &col_cov)?;
        Ok(MatrixNormal { mean, row_cov, col_cov })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        matrix_normal_from_factors(&self.mean, self.row_cov.cholesky_lower(), self.col_cov.cholesky_lower(), rng)
    }
}

fn check_matrix_normal_dims(mean: &DMatrix<f64>, row_cov: &SpdMatrix, col_cov: &SpdMatrix) -> Result<()> {
    if row_cov.dim() != mean.nrows() || col_cov.dim() != mean.ncols() {
        return Err(Error::dim(format!(
            "mean is {}x{} but row_cov has dim {} and col_cov has dim {}",
            mean.nrows(),
            mean.ncols(),
            row_cov.dim(),
            col_cov.dim()
        )));
    }
    Ok(())
}

/// One draw from `N(mean, col_cov ⊗ row_cov)`.
pub fn sample_matrix_normal<R: Rng + ?Sized>(
    mean: &DMatrix<f64>,
    row_cov: &SpdMatrix,
    col_cov: &SpdMatrix,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    check_matrix_normal_dims(mean, row_cov, col_cov)?;
    Ok(matrix_normal_from_factors(mean, row_cov.cholesky_lower(), col_cov.cholesky_lower(), rng))
}

/// Lower-triangular Bartlett factor `A` with `A·Aᵀ ~ W_m(I, dof)`.
fn bartlett_factor<R: Rng + ?Sized>(m: usize, dof: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = math::sqrt(chi_squared(dof - i as f64, rng)?);
        for j in 0..i {
            a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(a)
}

/// `W_m(scale, dof)` via the Bartlett decomposition.
pub fn sample_wishart<R: Rng + ?Sized>(scale: &SpdMatrix, dof: f64, rng: &mut R) -> Result<SpdMatrix> {
    let m = scale.dim();
    if !(dof > m as f64 - 1.0) {
        return Err(Error::domain(format!("Wishart dof must exceed m - 1 = {}, got {dof}", m as f64 - 1.0)));
    }
    let a = bartlett_factor(m, dof, rng)?;
    Ok(SpdMatrix::from_lower_factor(scale.cholesky_lower() * a))
}

/// `W⁻¹_m(scale, dof)`: the inverse of a `W_m(scale⁻¹, dof − m − 1)` draw.
pub fn sample_inverse_wishart<R: Rng + ?Sized>(scale: &SpdMatrix, dof: f64, rng: &mut R) -> Result<SpdMatrix> {
    let m = scale.dim() as f64;
    let wishart_dof = dof - m - 1.0;
    if !(wishart_dof > m - 1.0) {
        return Err(Error::domain(format!("inverse-Wishart dof must exceed 2m = {}, got {dof}", 2.0 * m)));
    }
    let inner = sample_wishart(&scale.inverse()?, wishart_dof, rng)?;
    inner.inverse()
}

/// Symmetric square root via the eigendecomposition.
pub fn spd_sqrt(a: &SpdMatrix) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.matrix().clone());
    let roots = eig.eigenvalues.map(|l| math::sqrt(l.max(0.0)));
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&roots) * v.transpose();
    (&root + root.transpose()) * 0.5
}

/// `∏_{i=1}^{m} (x − i + 1)`, i.e. `x!/(x−m)!` extended to real `x`.
pub fn falling_factorial_ratio(x: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("falling factorial needs m >= 1"));
    }
    let last = x - m as f64 + 1.0;
    if !(last > 0.0) {
        return Err(Error::domain(format!(
            "falling factorial of {x} over {m} terms reaches nonpositive factor {last}"
        )));
    }
    Ok((0..m).map(|i| x - i as f64).product())
}
