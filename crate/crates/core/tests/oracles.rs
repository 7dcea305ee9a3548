use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, InverseGamma};
use synthreg_core::stats::ks_one_sample;
use synthreg_core::{
    classical_criteria, combine, draw_posterior, fit, pivot_value, sample_inverse_wishart, Method, ModelData,
    PivotSpec, Procedure, RngStream, SpdMatrix, SyntheticRelease,
};

#[test]
fn scalar_inverse_wishart_is_inverse_gamma() {
    let (s, dof) = (2.5, 9.0);
    let scale = SpdMatrix::from_diagonal(&[s]).unwrap();
    let mut rng = RngStream::new(31, 0).rng();
    let draws: Vec<f64> =
        (0..100_000).map(|_| sample_inverse_wishart(&scale, dof, &mut rng).unwrap().matrix()[(0, 0)]).collect();
    let oracle = InverseGamma::new((dof - 2.0) / 2.0, s / 2.0).unwrap();
    let ks = ks_one_sample(&draws, |x| oracle.cdf(x));
    assert!(ks < 0.01, "KS {ks}");
}

#[test]
fn scalar_posterior_variance_is_inverse_gamma() {
    let (n, p, alpha) = (25, 2, 3.0);
    let mut rng = RngStream::new(32, 0).rng();
    let x = DMatrix::from_fn(p, n, |i, _| if i == 0 { 1.0 } else { rng.sample::<f64, _>(StandardNormal) });
    let y = DMatrix::from_fn(1, n, |_, j| 2.0 * x[(1, j)] + rng.sample::<f64, _>(StandardNormal));
    let fitted = fit(&ModelData::new(x, y).unwrap()).unwrap();
    let draws: Vec<f64> =
        (0..100_000).map(|_| draw_posterior(&fitted, alpha, &mut rng).unwrap().sigma_tilde.matrix()[(0, 0)]).collect();
    let shape = ((n - p) as f64 + alpha - 2.0) / 2.0;
    let oracle = InverseGamma::new(shape, (n - p) as f64 * fitted.s[(0, 0)] / 2.0).unwrap();
    let ks = ks_one_sample(&draws, |v| oracle.cdf(v));
    assert!(ks < 0.01, "KS {ks}");
}

fn random_release(seed: u64, n: usize, p: usize, m: usize, m_rel: usize) -> (SyntheticRelease, DMatrix<f64>) {
    let mut rng = RngStream::new(seed, 0).rng();
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    let x = DMatrix::from_fn(p, n, |_, _| 1.0 + normal());
    let b = DMatrix::from_fn(p, m, |_, _| normal());
    let w = (0..m_rel).map(|_| b.transpose() * &x + DMatrix::from_fn(m, n, |_, _| normal())).collect();
    (SyntheticRelease::from_parts(w, x, Method::Fpps, 6.0).unwrap(), b)
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-7 * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Mapping every dataset to `L·W` and the hypothesis to `B·Lᵀ` leaves the
    /// pivot and all four classical criteria unchanged.
    #[test]
    fn statistics_are_invariant_under_response_transforms(
        seed in any::<u64>(),
        n in 12usize..30,
        m_rel in 1usize..4,
        entries in prop::collection::vec(-2.0..2.0f64, 4),
    ) {
        let (p, m) = (3, 2);
        let l = DMatrix::from_row_slice(2, 2, &entries) + DMatrix::identity(2, 2) * 3.0;
        prop_assume!(l.determinant().abs() > 0.5);
        let (release, b) = random_release(seed, n, p, m, m_rel);
        let moved = SyntheticRelease::from_parts(
            release.datasets().iter().map(|w| &l * w).collect(),
            release.x().clone(),
            Method::Fpps,
            6.0,
        )
        .unwrap();
        let b_moved = &b * l.transpose();
        for procedure in [Procedure::Proc1, Procedure::Proc2] {
            let (e0, e1) = (combine(&release, procedure).unwrap(), combine(&moved, procedure).unwrap());
            let spec = PivotSpec::new(procedure);
            let (t0, t1) = (pivot_value(&e0, &b, &spec).unwrap(), pivot_value(&e1, &b_moved, &spec).unwrap());
            prop_assert!(rel_close(t0, t1), "pivot {t0} vs {t1}");
            let (c0, c1) = (classical_criteria(&e0, &b).unwrap(), classical_criteria(&e1, &b_moved).unwrap());
            prop_assert!(rel_close(c0.wilks, c1.wilks));
            prop_assert!(rel_close(c0.pillai, c1.pillai));
            prop_assert!(rel_close(c0.hotelling_lawley, c1.hotelling_lawley));
            prop_assert!(rel_close(c0.roy, c1.roy));
        }
    }
}
