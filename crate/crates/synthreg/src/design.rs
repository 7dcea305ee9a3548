//! Tabular input and model-matrix construction.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::config::{CategoricalColumn, DataSection};
use crate::error::{HarnessError, Result};

/// A header row plus string records, as read from a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if let Some(i) = rows.iter().position(|r| r.len() != headers.len()) {
            return Err(HarnessError::Data(format!(
                "record {} has {} fields, header has {}",
                i + 1,
                rows[i].len(),
                headers.len()
            )));
        }
        Ok(Table { headers, rows })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_reader(file).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_owned).collect()).map_err(csv_err))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Table::new(headers, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Data(format!("column {name:?} not found; available: {:?}", self.headers)))
    }

    fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[c].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    HarnessError::Data(format!(
                        "row {}: column {name:?} value {:?} is not a finite number",
                        i + 1,
                        r[c]
                    ))
                })
            })
            .collect()
    }

    /// The named columns as an `m × n` response matrix.
    pub fn responses(&self, names: &[String]) -> Result<DMatrix<f64>> {
        if names.is_empty() {
            return Err(HarnessError::Config("no response columns given".into()));
        }
        let cols = names.iter().map(|n| self.numeric_column(n)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_fn(names.len(), self.n_rows(), |j, i| cols[j][i]))
    }
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Data(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalSpec {
    pub name: String,
    /// Level set; the first entry is the reference and gets no indicator.
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpec {
    pub numeric: Vec<String>,
    pub categorical: Vec<CategoricalSpec>,
    pub intercept: bool,
}

impl DesignSpec {
    /// Resolves the level sets of `data` against `table`: explicit lists are
    /// kept as given, otherwise the observed levels are sorted (numerically
    /// when every level parses as a number).
    pub fn resolve(data: &DataSection, table: &Table) -> Result<Self> {
        let categorical = data
            .categorical
            .iter()
            .map(|CategoricalColumn { name, levels }| {
                let levels = match levels {
                    Some(l) => l.clone(),
                    None => observed_levels(table, name)?,
                };
                Ok(CategoricalSpec { name: name.clone(), levels })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DesignSpec { numeric: data.numeric.clone(), categorical, intercept: data.intercept })
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.intercept {
            names.push("(Intercept)".to_owned());
        }
        names.extend(self.numeric.iter().cloned());
        for c in &self.categorical {
            names.extend(c.levels.iter().skip(1).map(|l| format!("I({}={})", c.name, l)));
        }
        names
    }
}

pub fn observed_levels(table: &Table, name: &str) -> Result<Vec<String>> {
    let c = table.column_index(name)?;
    let set: BTreeSet<&str> = table.rows.iter().map(|r| r[c].as_str()).collect();
    let mut levels: Vec<String> = set.into_iter().map(str::to_owned).collect();
    let parsed: Option<Vec<f64>> = levels.iter().map(|l| l.parse::<f64>().ok()).collect();
    if let Some(values) = parsed {
        let mut pairs: Vec<(f64, String)> = values.into_iter().zip(levels).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        levels = pairs.into_iter().map(|(_, l)| l).collect();
    }
    Ok(levels)
}

/// Builds the `p × n` model matrix (one column per observation) and its row
/// names: intercept, numeric columns, then one indicator per non-reference
/// level of each categorical column.
pub fn build_design_matrix(table: &Table, spec: &DesignSpec) -> Result<(DMatrix<f64>, Vec<String>)> {
    let n = table.n_rows();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    if spec.intercept {
        rows.push(vec![1.0; n]);
    }
    for name in &spec.numeric {
        rows.push(table.numeric_column(name)?);
    }
    for cat in &spec.categorical {
        if cat.levels.is_empty() {
            return Err(HarnessError::Config(format!("categorical column {:?} has no levels", cat.name)));
        }
        let c = table.column_index(&cat.name)?;
        let codes = table
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                cat.levels.iter().position(|l| *l == r[c]).ok_or_else(|| {
                    HarnessError::Data(format!(
                        "row {}: level {:?} of {:?} is not in the level set {:?}",
                        i + 1,
                        r[c],
                        cat.name,
                        cat.levels
                    ))
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        for level in 1..cat.levels.len() {
            rows.push(codes.iter().map(|&k| if k == level { 1.0 } else { 0.0 }).collect());
        }
    }
    let names = spec.column_names();
    let p = rows.len();
    if p == 0 {
        return Err(HarnessError::Config("design has no columns".into()));
    }
    if n <= p {
        return Err(HarnessError::Data(format!("need more observations than regressors, got n = {n}, p = {p}")));
    }
    let x = DMatrix::from_fn(p, n, |r, i| rows[r][i]);
    check_rank(&x, &names)?;
    Ok((x, names))
}

/// Fails with the first row of `x` that is (numerically) a combination of
/// earlier rows, naming the rows involved.
fn check_rank(x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    for r in 0..x.nrows() {
        let target: DVector<f64> = x.row(r).transpose();
        let norm = target.norm();
        if norm == 0.0 {
            return Err(HarnessError::Data(format!("design column {:?} is identically zero", names[r])));
        }
        if r == 0 {
            continue;
        }
        let basis = x.rows(0, r).transpose();
        let svd = basis.clone().svd(true, true);
        let coef = svd.solve(&target, 1e-12).map_err(|e| HarnessError::Numeric(e.to_owned()))?;
        let resid = &target - &basis * &coef;
        if resid.norm() <= 1e-9 * norm {
            let scale = coef.amax();
            let involved: Vec<&str> =
                (0..r).filter(|&i| coef[i].abs() > 1e-8 * scale).map(|i| names[i].as_str()).collect();
            return Err(HarnessError::Data(format!(
                "design is rank deficient: {:?} is collinear with {:?}",
                names[r], involved
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(headers: &[&str], rows: &[&[&str]]) -> Table {
        Table::new(
            headers.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn simple_regression_design() {
        let t = table(&["x", "y"], &[&["1", "2"], &["2", "3"], &["4", "1"]]);
        let spec = DesignSpec { numeric: vec!["x".into()], categorical: vec![], intercept: true };
        let (x, names) = build_design_matrix(&t, &spec).unwrap();
        assert_eq!(names, ["(Intercept)", "x"]);
        assert_eq!(x, DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 1.0, 2.0, 4.0]));
    }

    #[test]
    fn three_level_categorical_coding() {
        let t = table(&["g"], &[&["b"], &["a"], &["c"], &["a"], &["b"]]);
        let data = DataSection {
            path: "unused".into(),
            responses: vec![],
            numeric: vec![],
            categorical: vec![CategoricalColumn { name: "g".into(), levels: None }],
            intercept: true,
        };
        let spec = DesignSpec::resolve(&data, &t).unwrap();
        let (x, names) = build_design_matrix(&t, &spec).unwrap();
        assert_eq!(names, ["(Intercept)", "I(g=b)", "I(g=c)"]);
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 5, &[
            1.0, 1.0, 1.0, 1.0, 1.0,
            1.0, 0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0, 0.0,
        ]);
        assert_eq!(x, expected);
    }

    #[test]
    fn numeric_levels_sort_numerically() {
        let t = table(&["e"], &[&["10"], &["9"], &["31"], &["9"]]);
        assert_eq!(observed_levels(&t, "e").unwrap(), ["9", "10", "31"]);
    }

    #[test]
    fn unseen_level_is_a_data_error() {
        let t = table(&["g"], &[&["a"], &["b"], &["z"], &["a"]]);
        let spec = DesignSpec {
            numeric: vec![],
            categorical: vec![CategoricalSpec { name: "g".into(), levels: vec!["a".into(), "b".into()] }],
            intercept: true,
        };
        let err = build_design_matrix(&t, &spec).unwrap_err();
        assert!(matches!(err, HarnessError::Data(ref m) if m.contains("\"z\"")), "{err}");
    }

    #[test]
    fn collinear_columns_are_named() {
        let t = table(&["u", "v"], &[&["1", "2"], &["2", "4"], &["3", "6"], &["5", "10"]]);
        let spec = DesignSpec { numeric: vec!["u".into(), "v".into()], categorical: vec![], intercept: true };
        let err = build_design_matrix(&t, &spec).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, HarnessError::Data(_)));
        assert!(msg.contains("\"v\"") && msg.contains("\"u\"") && !msg.contains("Intercept"), "{msg}");
    }

    #[test]
    fn too_few_rows_is_rejected() {
        let t = table(&["x"], &[&["1"], &["2"]]);
        let spec = DesignSpec { numeric: vec!["x".into()], categorical: vec![], intercept: true };
        assert!(matches!(build_design_matrix(&t, &spec), Err(HarnessError::Data(_))));
    }
}
