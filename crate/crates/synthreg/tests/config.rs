use proptest::prelude::*;
use synthreg::config::{CutoffCell, ExperimentConfig, Hypothesis, MethodName, ProcedureName, Scenario};

fn scenario() -> impl Strategy<Value = Scenario> {
    prop_oneof![
        Just(Scenario::Coverage),
        Just(Scenario::Radius),
        Just(Scenario::Power),
        Just(Scenario::Privacy),
        Just(Scenario::NonPivotalDemo),
        Just(Scenario::CutoffTable),
    ]
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |v| v.is_finite())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn config_round_trips_through_toml(
        sc in scenario(),
        seed in any::<u64>(),
        b in prop::collection::vec(prop::collection::vec(finite(), 2), 1..5),
        alpha in finite(),
        gamma in 0.0..1.0f64,
        m_rel in prop::collection::vec(1usize..50, 1..4),
        eps in prop::collection::vec(1e-6..1.0f64, 0..4),
        cells in prop::collection::vec((5usize..500, 1usize..5, any::<bool>(), prop::option::of(1usize..5)), 0..3),
        names in prop::collection::vec("[a-zA-Z_=() ]{1,8}", 0..3),
    ) {
        let mut cfg = ExperimentConfig::new(sc, format!("out/{seed}"));
        cfg.mc.seed = seed;
        cfg.model.b = b;
        cfg.synthesis.alpha = alpha;
        cfg.synthesis.method = MethodName::Pps;
        cfg.inference.gamma = gamma;
        cfg.synthesis.m_releases = m_rel;
        cfg.privacy.epsilons = eps;
        for (n, m, scaled, k) in cells {
            cfg.cutoff.cells.push(CutoffCell {
                n, p: 3, m, alpha, m_releases: 2, procedure: ProcedureName::Proc2, k, scaled,
            });
        }
        for name in names {
            cfg.test.hypotheses.push(Hypothesis { name: name.clone(), regressors: Some(vec![name]) });
        }
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml_string().unwrap(), text);
    }
}

#[test]
fn relative_data_paths_resolve_against_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(
        &path,
        "scenario = \"fit\"\noutput = \"o\"\n[data]\npath = \"d.csv\"\nresponses = [\"y\"]\nnumeric = [\"x\"]\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    let data = cfg.data.unwrap();
    assert!(data.path.is_absolute());
    assert!(data.path.ends_with("d.csv"));
    assert!(data.intercept);
}
