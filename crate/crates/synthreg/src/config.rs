//! Experiment configuration, read from and written to TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synthreg_core::{DMatrix, Method, PlugInVariance, Procedure, SpdMatrix};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Fit,
    Synthesize,
    Test,
    CutoffTable,
    Coverage,
    Radius,
    Power,
    Privacy,
    NonPivotalDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    PlugIn,
    Pps,
    Fpps,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::PlugIn => Method::PlugIn,
            MethodName::Pps => Method::Pps,
            MethodName::Fpps => Method::Fpps,
        }
    }
}

impl From<Method> for MethodName {
    fn from(m: Method) -> Self {
        match m {
            Method::PlugIn => MethodName::PlugIn,
            Method::Pps => MethodName::Pps,
            Method::Fpps => MethodName::Fpps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureName {
    Proc1,
    Proc2,
    Original,
}

impl From<ProcedureName> for Procedure {
    fn from(p: ProcedureName) -> Self {
        match p {
            ProcedureName::Proc1 => Procedure::Proc1,
            ProcedureName::Proc2 => Procedure::Proc2,
            ProcedureName::Original => Procedure::Original,
        }
    }
}

impl From<Procedure> for ProcedureName {
    fn from(p: Procedure) -> Self {
        match p {
            Procedure::Proc1 => ProcedureName::Proc1,
            Procedure::Proc2 => ProcedureName::Proc2,
            Procedure::Original => ProcedureName::Original,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PlugInVarianceName {
    #[default]
    Unbiased,
    Mle,
}

impl From<PlugInVarianceName> for PlugInVariance {
    fn from(v: PlugInVarianceName) -> Self {
        match v {
            PlugInVarianceName::Unbiased => PlugInVariance::Unbiased,
            PlugInVarianceName::Mle => PlugInVariance::Mle,
        }
    }
}

/// Simulated population: `Y = BᵀX + E`, `E ~ N(0, I ⊗ Σ)`, with the rows of
/// `X` iid `N(x_mean, x_sd²)` (plus a leading row of ones with `intercept`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// `p × m`, one inner list per regressor.
    pub b: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub n: Vec<usize>,
    pub x_mean: f64,
    pub x_sd: f64,
    pub intercept: bool,
    /// Optional `k × p` contrast `A` for the `AB` confidence sets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast: Option<Vec<Vec<f64>>>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            b: vec![vec![1.0, 2.0], vec![3.0, 2.0], vec![1.0, 1.0]],
            sigma: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            n: vec![10, 50, 100, 200],
            x_mean: 1.0,
            x_sd: 1.0,
            intercept: false,
            contrast: Some(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoricalColumn {
    pub name: String,
    /// Explicit level order; the first is the dropped reference level. When
    /// absent the sorted observed levels are used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
}

/// Original microdata read from CSV (one row per observation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    pub responses: Vec<String>,
    #[serde(default)]
    pub numeric: Vec<String>,
    #[serde(default)]
    pub categorical: Vec<CategoricalColumn>,
    #[serde(default = "yes")]
    pub intercept: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthesisSection {
    pub method: MethodName,
    pub m_releases: Vec<usize>,
    pub alpha: f64,
    pub plug_in_variance: PlugInVarianceName,
}

impl Default for SynthesisSection {
    fn default() -> Self {
        SynthesisSection {
            method: MethodName::Fpps,
            m_releases: vec![1, 2, 5],
            alpha: 6.0,
            plug_in_variance: PlugInVarianceName::Unbiased,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InferenceSection {
    pub gamma: f64,
    pub n_draws: usize,
    pub procedures: Vec<ProcedureName>,
}

impl Default for InferenceSection {
    fn default() -> Self {
        InferenceSection {
            gamma: 0.05,
            n_draws: 100_000,
            procedures: vec![ProcedureName::Proc1, ProcedureName::Proc2, ProcedureName::Original],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection { iterations: 10_000, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffCell {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub alpha: f64,
    pub m_releases: usize,
    pub procedure: ProcedureName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default)]
    pub scaled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffSection {
    pub cells: Vec<CutoffCell>,
}

/// Alternatives `B + t·direction` for each `t` in `steps`, tested at `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerSection {
    pub direction: Vec<Vec<f64>>,
    pub steps: Vec<f64>,
    pub include_original: bool,
}

impl Default for PowerSection {
    fn default() -> Self {
        PowerSection {
            direction: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]],
            steps: vec![0.0, 0.25, 0.5, 1.0],
            include_original: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrivacySection {
    pub epsilons: Vec<f64>,
    pub methods: Vec<MethodName>,
}

impl Default for PrivacySection {
    fn default() -> Self {
        PrivacySection { epsilons: vec![0.01, 0.05, 0.1], methods: vec![MethodName::Fpps, MethodName::PlugIn] }
    }
}

/// Classical criteria under `Σ = [[1, ρ], [ρ, 1]]` with `B = model.b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonPivotalSection {
    pub rho: Vec<f64>,
    pub levels: Vec<f64>,
    pub n: usize,
    pub alpha: f64,
    pub m_releases: usize,
    pub procedure: ProcedureName,
}

impl Default for NonPivotalSection {
    fn default() -> Self {
        NonPivotalSection {
            rho: vec![0.2, 0.4, 0.6, 0.8],
            levels: vec![0.05, 0.5, 0.95],
            n: 100,
            alpha: 4.0,
            m_releases: 1,
            procedure: ProcedureName::Proc1,
        }
    }
}

/// A hypothesis on the data-file model: the coefficients of `regressors`
/// (all of them when absent) are zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypothesis {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regressors: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TestSection {
    pub hypotheses: Vec<Hypothesis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub output: PathBuf,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(default)]
    pub synthesis: SynthesisSection,
    #[serde(default)]
    pub inference: InferenceSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub cutoff: CutoffSection,
    #[serde(default)]
    pub power: PowerSection,
    #[serde(default)]
    pub privacy: PrivacySection,
    #[serde(default)]
    pub nonpivotal: NonPivotalSection,
    #[serde(default)]
    pub test: TestSection,
}

impl ExperimentConfig {
    /// A configuration with every section at its default.
    pub fn new(scenario: Scenario, output: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            scenario,
            output: output.into(),
            model: ModelSection::default(),
            data: None,
            synthesis: SynthesisSection::default(),
            inference: InferenceSection::default(),
            mc: McSection::default(),
            cutoff: CutoffSection::default(),
            power: PowerSection::default(),
            privacy: PrivacySection::default(),
            nonpivotal: NonPivotalSection::default(),
            test: TestSection::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| e.context(path.display().to_string()))?;
        if let Some(data) = cfg.data.as_mut() {
            if data.path.is_relative() {
                let joined = path.parent().map_or_else(|| data.path.clone(), |dir| dir.join(&data.path));
                data.path = std::path::absolute(&joined).map_err(|e| HarnessError::io(&joined, e))?;
            }
        }
        Ok(cfg)
    }

    /// Checks everything that can be checked without running the scenario.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |msg: String| Err(HarnessError::Config(msg));
        if !(self.inference.gamma > 0.0 && self.inference.gamma < 1.0) {
            return cfg_err(format!("inference.gamma must be in (0, 1), got {}", self.inference.gamma));
        }
        if self.inference.n_draws < 1000 {
            return cfg_err(format!("inference.n_draws must be at least 1000, got {}", self.inference.n_draws));
        }
        if self.mc.iterations == 0 {
            return cfg_err("mc.iterations must be positive".into());
        }
        if self.synthesis.m_releases.is_empty() || self.synthesis.m_releases.contains(&0) {
            return cfg_err("synthesis.m_releases must be a nonempty list of positive counts".into());
        }
        if !self.synthesis.alpha.is_finite() {
            return cfg_err("synthesis.alpha must be finite".into());
        }
        let uses_data = matches!(self.scenario, Scenario::Fit | Scenario::Synthesize | Scenario::Test);
        if uses_data && self.data.is_none() {
            return cfg_err(format!("scenario {:?} needs a [data] section", self.scenario));
        }
        if !uses_data && self.scenario != Scenario::CutoffTable {
            let b = self.model_b()?;
            let sigma = self.model_sigma()?;
            if b.ncols() != sigma.dim() {
                return cfg_err(format!(
                    "model.b has {} columns but sigma is {}x{}",
                    b.ncols(),
                    sigma.dim(),
                    sigma.dim()
                ));
            }
            if let Some(a) = self.model_contrast()? {
                if a.ncols() != b.nrows() {
                    return cfg_err(format!("model.contrast has {} columns, expected p = {}", a.ncols(), b.nrows()));
                }
            }
            if self.model.n.is_empty() {
                return cfg_err("model.n must list at least one sample size".into());
            }
            if !(self.model.x_sd > 0.0) {
                return cfg_err("model.x_sd must be positive".into());
            }
        }
        match self.scenario {
            Scenario::CutoffTable if self.cutoff.cells.is_empty() => cfg_err("cutoff.cells is empty".into()),
            Scenario::Power => {
                let b = self.model_b()?;
                let d = matrix_from_rows(&self.power.direction, "power.direction")?;
                if d.shape() != b.shape() {
                    return cfg_err(format!("power.direction is {:?}, model.b is {:?}", d.shape(), b.shape()));
                }
                if self.power.steps.is_empty() {
                    return cfg_err("power.steps is empty".into());
                }
                Ok(())
            }
            Scenario::Privacy => {
                if self.privacy.epsilons.iter().any(|e| !(*e > 0.0)) || self.privacy.epsilons.is_empty() {
                    return cfg_err("privacy.epsilons must be a nonempty list of positive values".into());
                }
                Ok(())
            }
            Scenario::NonPivotalDemo => {
                if self.nonpivotal.rho.iter().any(|r| !(r.abs() < 1.0)) {
                    return cfg_err("nonpivotal.rho values must lie in (-1, 1)".into());
                }
                if self.model_b()?.ncols() != 2 {
                    return cfg_err("nonpivotal-demo needs m = 2 columns in model.b".into());
                }
                if self.nonpivotal.procedure == ProcedureName::Original || self.nonpivotal.m_releases == 0 {
                    return cfg_err("nonpivotal-demo needs a synthetic procedure and M >= 1".into());
                }
                if self.nonpivotal.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
                    return cfg_err("nonpivotal.levels must lie in (0, 1)".into());
                }
                Ok(())
            }
            Scenario::Test if self.test.hypotheses.is_empty() => cfg_err("test.hypotheses is empty".into()),
            _ => Ok(()),
        }
    }

    pub fn model_b(&self) -> Result<DMatrix<f64>> {
        matrix_from_rows(&self.model.b, "model.b")
    }

    pub fn model_sigma(&self) -> Result<SpdMatrix> {
        let m = matrix_from_rows(&self.model.sigma, "model.sigma")?;
        SpdMatrix::labeled(m, "model.sigma").map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn model_contrast(&self) -> Result<Option<DMatrix<f64>>> {
        self.model.contrast.as_ref().map(|a| matrix_from_rows(a, "model.contrast")).transpose()
    }
}

pub fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(HarnessError::Config(format!("{what} is empty")));
    }
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(HarnessError::Config(format!("{what} row {i} has {} entries, expected {c}", rows[i].len())));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
