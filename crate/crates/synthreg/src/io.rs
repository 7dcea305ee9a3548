//! Result persistence: CSV tables, matrices, releases and distributions.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;
use synthreg_core::{EmpiricalDistribution, SyntheticRelease};

use crate::config::{MethodName, ProcedureName};
use crate::error::{HarnessError, Result};

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        CsvTable { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
        w.write_record(&self.headers).map_err(|e| csv_io(path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| csv_io(path, e))?;
        }
        w.flush().map_err(|e| HarnessError::io(path, e))
    }
}

fn csv_io(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e.to_string()))
}

/// Writes serializable records, one CSV row each, with a header taken from
/// the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn procedure_label(p: ProcedureName) -> &'static str {
    match p {
        ProcedureName::Proc1 => "proc1",
        ProcedureName::Proc2 => "proc2",
        ProcedureName::Original => "original",
    }
}

pub fn method_label(m: MethodName) -> &'static str {
    match m {
        MethodName::PlugIn => "plug-in",
        MethodName::Pps => "pps",
        MethodName::Fpps => "fpps",
    }
}

/// Writes a `variables × n` matrix with one row per observation.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>, names: &[String]) -> Result<()> {
    if names.len() != m.nrows() {
        return Err(HarnessError::Config(format!("{} names for {} variables", names.len(), m.nrows())));
    }
    let mut t = CsvTable::new(names.iter().cloned());
    for i in 0..m.ncols() {
        t.push(m.column(i).iter().map(|&v| fmt_f64(v)).collect());
    }
    t.write(path)
}

/// Reads a file written by [`write_matrix_csv`] back as `variables × n`.
pub fn read_matrix_csv(path: &Path) -> Result<(DMatrix<f64>, Vec<String>)> {
    let table = crate::design::Table::read_csv(path)?;
    let names = table.headers.clone();
    let m = table.responses(&names).map_err(|e| e.context(path.display().to_string()))?;
    Ok((m, names))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Data(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn matrix_json(m: &DMatrix<f64>) -> serde_json::Value {
    serde_json::Value::from(crate::config::matrix_to_rows(m))
}

#[derive(Debug, Serialize)]
struct ReleaseMeta<'a> {
    method: &'static str,
    alpha: f64,
    m_releases: usize,
    posterior_draws_used: usize,
    n: usize,
    m: usize,
    p: usize,
    responses: &'a [String],
    regressors: &'a [String],
    files: Vec<String>,
}

/// Writes `w_1.csv … w_M.csv`, `x.csv` and `release.json` into `dir`.
pub fn write_release(
    dir: &Path,
    release: &SyntheticRelease,
    responses: &[String],
    regressors: &[String],
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut files = Vec::new();
    for (j, w) in release.datasets().iter().enumerate() {
        let name = format!("w_{}.csv", j + 1);
        write_matrix_csv(&dir.join(&name), w, responses)?;
        files.push(name);
    }
    write_matrix_csv(&dir.join("x.csv"), release.x(), regressors)?;
    let meta = ReleaseMeta {
        method: method_label(release.method().into()),
        alpha: release.alpha(),
        m_releases: release.m_releases(),
        posterior_draws_used: release.posterior_draws_used(),
        n: release.n(),
        m: release.m(),
        p: release.p(),
        responses,
        regressors,
        files,
    };
    write_json(&dir.join("release.json"), &meta)
}

/// Writes the sorted draws one per line to `path` and the parameters and
/// seed to `path` with a `.json` extension.
pub fn write_distribution(path: &Path, dist: &EmpiricalDistribution) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for d in dist.draws() {
        writeln!(w, "{}", fmt_f64(*d)).map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    let params = dist.params();
    let seed = dist.seed();
    let meta = serde_json::json!({
        "procedure": procedure_label(dist.procedure().into()),
        "scaled": dist.scaled(),
        "n_draws": dist.n_draws(),
        "m_releases": params.m_releases,
        "n": params.n,
        "m": params.m,
        "p": params.p,
        "k": params.k,
        "alpha": params.alpha,
        "seed": seed.map(|s| s.seed),
        "stream_id": seed.map(|s| s.stream_id),
    });
    write_json(&path.with_extension("json"), &meta)
}

/// Output directory staged as `<out>.partial` and moved into place by
/// [`Staging::commit`]; dropped without committing, it is removed.
#[derive(Debug)]
pub struct Staging {
    target: PathBuf,
    partial: PathBuf,
    committed: bool,
}

impl Staging {
    pub fn create(target: &Path) -> Result<Self> {
        if target.exists() && !target.join("summary.json").is_file() {
            let empty = fs::read_dir(target).map_err(|e| HarnessError::io(target, e))?.next().is_none();
            if !empty {
                return Err(HarnessError::Config(format!(
                    "output {} exists and is not a previous run; refusing to replace it",
                    target.display()
                )));
            }
        }
        let mut partial = target.as_os_str().to_owned();
        partial.push(".partial");
        let partial = PathBuf::from(partial);
        if partial.exists() {
            fs::remove_dir_all(&partial).map_err(|e| HarnessError::io(&partial, e))?;
        }
        fs::create_dir_all(&partial).map_err(|e| HarnessError::io(&partial, e))?;
        Ok(Staging { target: target.to_owned(), partial, committed: false })
    }

    pub fn dir(&self) -> &Path {
        &self.partial
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.partial.join(name)
    }

    pub fn commit(mut self) -> Result<PathBuf> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(|e| HarnessError::io(&self.target, e))?;
        }
        fs::rename(&self.partial, &self.target).map_err(|e| HarnessError::io(&self.target, e))?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.partial);
        }
    }
}
