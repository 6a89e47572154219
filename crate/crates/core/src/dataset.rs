//! Data containers and preparation: CSV loading with one-hot expansion,
//! standardization to centered unit-norm columns, two-way interaction
//! expansion, synthetic logistic draws, and deterministic splits.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};

/// How a dataset was mapped from raw to model scale. Composes across
/// repeated standardization, so it always maps raw coordinates to the
/// current stored values.
#[derive(Debug, Clone, Serialize)]
pub struct Standardization {
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
    pub y_mean: f64,
}

impl Standardization {
    fn identity(p: usize) -> Self {
        Standardization {
            column_means: vec![0.0; p],
            column_scales: vec![1.0; p],
            y_mean: 0.0,
        }
    }
}

/// A regression dataset with a continuous response.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    names: Vec<String>,
    transform: Standardization,
    standardized: bool,
}

/// A classification dataset with a 0/1 response. Columns carry the same
/// provenance as [`Dataset`]; the response is never centered.
#[derive(Debug, Clone)]
pub struct BinaryDataset {
    x: Array2<f64>,
    y: Array1<f64>,
    names: Vec<String>,
    transform: Standardization,
    standardized: bool,
}

/// Result of [`load_csv`]: the response decides which container applies.
#[derive(Debug, Clone)]
pub enum LoadedDataset {
    Continuous(Dataset),
    Binary(BinaryDataset),
}

/// One-line description of a dataset, used by the CLI dump format.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub columns: Vec<String>,
    pub n: usize,
    pub p: usize,
    pub standardized: bool,
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
}

/// Train/test row split. Indices are sorted and disjoint.
#[derive(Debug, Clone, Serialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub fraction: f64,
}

/// Assignment of each row to one of `k` cross-validation folds.
#[derive(Debug, Clone, Serialize)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

/// Parameters for a synthetic logistic draw.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub beta_sd: f64,
    pub seed: u64,
}

fn validate_matrix(x: &Array2<f64>, y: &Array1<f64>, names: &[String], min_cols: usize) -> Result<()> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 rows, got {n}"
        )));
    }
    if p < min_cols {
        return Err(Error::InvalidArgument("need at least 1 column".into()));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: n,
            got: y.len(),
        });
    }
    if names.len() != p {
        return Err(Error::DimensionMismatch {
            what: "column names",
            expected: p,
            got: names.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "design matrix" });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "response" });
    }
    Ok(())
}

fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("x{j}")).collect()
}

/// FNV-1a over the little-endian bytes of the data. Cheap, stable across
/// runs, and good enough to tell two datasets apart in consistency checks.
fn fingerprint_bytes(x: &Array2<f64>, y: &Array1<f64>, standardized: bool) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |b: u8| {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x1000_0000_01b3);
    };
    for b in (x.nrows() as u64).to_le_bytes() {
        eat(b);
    }
    for b in (x.ncols() as u64).to_le_bytes() {
        eat(b);
    }
    for v in x.iter().chain(y.iter()) {
        for b in v.to_le_bytes() {
            eat(b);
        }
    }
    eat(u8::from(standardized));
    h
}

macro_rules! shared_accessors {
    () => {
        pub fn x(&self) -> ArrayView2<'_, f64> {
            self.x.view()
        }

        pub fn y(&self) -> ArrayView1<'_, f64> {
            self.y.view()
        }

        pub fn n(&self) -> usize {
            self.x.nrows()
        }

        pub fn p(&self) -> usize {
            self.x.ncols()
        }

        pub fn names(&self) -> &[String] {
            &self.names
        }

        pub fn is_standardized(&self) -> bool {
            self.standardized
        }

        pub fn standardization(&self) -> &Standardization {
            &self.transform
        }

        /// Stable hash of the stored values; two calls agree iff the data do.
        pub fn fingerprint(&self) -> u64 {
            fingerprint_bytes(&self.x, &self.y, self.standardized)
        }

        pub fn summary(&self) -> DatasetSummary {
            DatasetSummary {
                columns: self.names.clone(),
                n: self.n(),
                p: self.p(),
                standardized: self.standardized,
                column_means: self.transform.column_means.clone(),
                column_scales: self.transform.column_scales.clone(),
            }
        }

        /// Copies the given rows into a new dataset. Values are taken as
        /// stored; the result is flagged unstandardized because a row
        /// subset of centered unit-norm columns is neither.
        pub fn subset(&self, rows: &[usize]) -> Result<Self> {
            for &r in rows {
                if r >= self.n() {
                    return Err(Error::InvalidArgument(format!(
                        "row index {r} out of range for {} rows",
                        self.n()
                    )));
                }
            }
            let p = self.p();
            let mut x = Array2::zeros((rows.len(), p));
            let mut y = Array1::zeros(rows.len());
            for (i, &r) in rows.iter().enumerate() {
                x.row_mut(i).assign(&self.x.row(r));
                y[i] = self.y[r];
            }
            // Column count was validated at construction; rows are what change.
            validate_matrix(&x, &y, &self.names, 0)?;
            Ok(Self {
                x,
                y,
                names: self.names.clone(),
                transform: self.transform.clone(),
                standardized: false,
            })
        }
    };
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>, names: Option<Vec<String>>) -> Result<Self> {
        let names = names.unwrap_or_else(|| default_names(x.ncols()));
        validate_matrix(&x, &y, &names, 1)?;
        let p = x.ncols();
        Ok(Dataset {
            x,
            y,
            names,
            transform: Standardization::identity(p),
            standardized: false,
        })
    }

    shared_accessors!();
}

impl BinaryDataset {
    pub fn new(x: Array2<f64>, y: Array1<f64>, names: Option<Vec<String>>) -> Result<Self> {
        let names = names.unwrap_or_else(|| default_names(x.ncols()));
        // An empty design is allowed here: the intercept-only logistic model
        // is a legitimate fit target.
        validate_matrix(&x, &y, &names, 0)?;
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::ResponseNotBinary);
        }
        let p = x.ncols();
        Ok(BinaryDataset {
            x,
            y,
            names,
            transform: Standardization::identity(p),
            standardized: false,
        })
    }

    pub fn mean_response(&self) -> f64 {
        self.y.mean().unwrap()
    }

    /// Reinterprets the 0/1 response as continuous.
    pub fn into_continuous(self) -> Dataset {
        Dataset {
            x: self.x,
            y: self.y,
            names: self.names,
            transform: self.transform,
            standardized: false,
        }
    }

    shared_accessors!();
}

fn standardize_columns(
    x: &Array2<f64>,
    names: &[String],
    transform: &Standardization,
) -> Result<(Array2<f64>, Vec<f64>, Vec<f64>)> {
    let (n, p) = x.dim();
    let mut out = x.clone();
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for j in 0..p {
        let mut col = out.column_mut(j);
        let m = col.sum() / n as f64;
        col.mapv_inplace(|v| v - m);
        let s = col.dot(&col).sqrt();
        if s <= 0.0 {
            return Err(Error::ConstantColumn {
                name: names[j].clone(),
            });
        }
        col.mapv_inplace(|v| v / s);
        // Compose with whatever mapping produced the current values, so
        // the provenance always goes raw -> stored.
        means.push(transform.column_means[j] + transform.column_scales[j] * m);
        scales.push(transform.column_scales[j] * s);
    }
    Ok((out, means, scales))
}

/// Centers each column, scales it to unit Euclidean norm, and centers the
/// response. Provenance composes, so standardizing twice is a no-op up to
/// rounding.
pub fn standardize(d: &Dataset) -> Result<Dataset> {
    let (x, means, scales) = standardize_columns(&d.x, &d.names, &d.transform)?;
    let ym = d.y.mean().unwrap();
    let y = &d.y - ym;
    if y.dot(&y) <= 0.0 {
        return Err(Error::ConstantResponse);
    }
    Ok(Dataset {
        x,
        y,
        names: d.names.clone(),
        transform: Standardization {
            column_means: means,
            column_scales: scales,
            y_mean: d.transform.y_mean + ym,
        },
        standardized: true,
    })
}

/// Column standardization for a binary response: the design matrix is
/// treated exactly as in [`standardize`], the 0/1 response is left alone.
pub fn standardize_binary(d: &BinaryDataset) -> Result<BinaryDataset> {
    let (x, means, scales) = standardize_columns(&d.x, &d.names, &d.transform)?;
    Ok(BinaryDataset {
        x,
        y: d.y.clone(),
        names: d.names.clone(),
        transform: Standardization {
            column_means: means,
            column_scales: scales,
            y_mean: 0.0,
        },
        standardized: true,
    })
}

/// Appends pairwise interaction columns, formed on the raw scale. With
/// `include_squares` the diagonal terms come too. Column order: all
/// originals, then products `(i, j)` with `i <= j` (or `i < j`) ascending.
pub fn expand_two_way(d: &Dataset, include_squares: bool) -> Result<Dataset> {
    let (n, p) = d.x.dim();
    // Work on raw values so interactions mean the same thing no matter
    // how the inputs were scaled.
    let mut raw = d.x.clone();
    for j in 0..p {
        let m = d.transform.column_means[j];
        let s = d.transform.column_scales[j];
        raw.column_mut(j).mapv_inplace(|v| v * s + m);
    }
    let y_raw = &d.y + d.transform.y_mean;

    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| {
            let start = if include_squares { i } else { i + 1 };
            (start..p).map(move |j| (i, j))
        })
        .collect();
    let mut out = Array2::zeros((n, p + pairs.len()));
    let mut names = d.names.clone();
    for j in 0..p {
        out.column_mut(j).assign(&raw.column(j));
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let prod = &raw.column(i) * &raw.column(j);
        out.column_mut(p + k).assign(&prod);
        names.push(format!("{}:{}", d.names[i], d.names[j]));
    }
    Dataset::new(out, y_raw, Some(names))
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Draws a synthetic logistic dataset: standard normal covariates, normal
/// coefficients with standard deviation `beta_sd`, Bernoulli responses.
/// Returns the data together with the true coefficient vector.
pub fn simulate_logistic(spec: &SyntheticSpec) -> Result<(BinaryDataset, Array1<f64>)> {
    if spec.n < 2 || spec.p < 1 {
        return Err(Error::InvalidArgument(format!(
            "simulation needs n >= 2 and p >= 1, got n={}, p={}",
            spec.n, spec.p
        )));
    }
    if !(spec.beta_sd.is_finite() && spec.beta_sd >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta_sd must be finite and nonnegative, got {}",
            spec.beta_sd
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    // Draw order is part of the reproducibility contract: X row-major,
    // then beta, then the response uniforms.
    let mut x = Array2::zeros((spec.n, spec.p));
    for i in 0..spec.n {
        for j in 0..spec.p {
            x[[i, j]] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let mut beta = Array1::zeros(spec.p);
    for j in 0..spec.p {
        beta[j] = spec.beta_sd * rng.sample::<f64, _>(StandardNormal);
    }
    let lin = x.dot(&beta);
    let mut y = Array1::zeros(spec.n);
    for i in 0..spec.n {
        let u: f64 = rng.random();
        y[i] = f64::from(u < sigmoid(lin[i]));
    }
    let d = BinaryDataset::new(x, y, None)?;
    Ok((d, beta))
}

/// Splits `n` rows into train and test, reserving `round(fraction * n)`
/// rows for test with ties broken upward.
pub fn holdout_split(n: usize, fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "holdout fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n_test = (fraction * n as f64 + 0.5).floor() as usize;
    if n_test < 1 {
        return Err(Error::DegenerateSplit(format!(
            "fraction {fraction} of {n} rows leaves an empty test set"
        )));
    }
    if n - n_test < 2 {
        return Err(Error::DegenerateSplit(format!(
            "fraction {fraction} of {n} rows leaves fewer than 2 training rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok(SplitPlan {
        train_indices: train,
        test_indices: test,
        seed,
        fraction,
    })
}

/// Assigns each of `n` rows to one of `k` folds whose sizes differ by at
/// most one.
pub fn kfold_assign(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut fold_of = vec![0usize; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[pos..pos + size] {
            fold_of[row] = fold;
        }
        pos += size;
    }
    Ok(FoldAssignment { fold_of, k, seed })
}

impl FoldAssignment {
    /// Row indices inside fold `fold`, ascending.
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Row indices outside fold `fold`, ascending.
    pub fn complement_rows(&self, fold: usize) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        eat(self.k as u64);
        for &f in &self.fold_of {
            eat(f as u64);
        }
        h
    }
}

impl SplitPlan {
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        eat(self.train_indices.len() as u64);
        for &i in self.train_indices.iter().chain(self.test_indices.iter()) {
            eat(i as u64);
        }
        h
    }
}

/// Loads a CSV with a header row. The `response` column must be numeric;
/// a column none of whose cells parse as finite numbers is treated as
/// categorical and one-hot expanded (first level dropped, levels sorted).
/// A column with both numeric and non-numeric cells is an error naming
/// the first offending cell. The response decides the container: all 0/1
/// yields [`LoadedDataset::Binary`].
pub fn load_csv(path: impl AsRef<Path>, response: &str) -> Result<LoadedDataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingDataset {
            path: path.to_path_buf(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let mut cells: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::InvalidArgument(format!(
                "row {} has {} fields, header has {}",
                cells.len() + 1,
                record.len(),
                headers.len()
            )));
        }
        cells.push(record.iter().map(str::to_owned).collect());
    }
    let n = cells.len();
    let resp_idx = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::InvalidArgument(format!("response column {response:?} not found")))?;

    let parse = |s: &str| -> Option<f64> { s.parse::<f64>().ok().filter(|v| v.is_finite()) };

    let mut y = Array1::zeros(n);
    for (i, row) in cells.iter().enumerate() {
        y[i] = parse(&row[resp_idx]).ok_or_else(|| Error::ParseCell {
            row: i + 1,
            column: headers[resp_idx].clone(),
            value: row[resp_idx].clone(),
        })?;
    }

    enum Column {
        Numeric(Vec<f64>),
        Categorical(Vec<String>),
    }
    let mut columns: Vec<(String, Column)> = Vec::new();
    for (c, name) in headers.iter().enumerate() {
        if c == resp_idx {
            continue;
        }
        let numeric: Vec<Option<f64>> = cells.iter().map(|row| parse(&row[c])).collect();
        let hits = numeric.iter().filter(|v| v.is_some()).count();
        if hits == n {
            columns.push((
                name.clone(),
                Column::Numeric(numeric.into_iter().map(Option::unwrap).collect()),
            ));
        } else if hits == 0 {
            columns.push((
                name.clone(),
                Column::Categorical(cells.iter().map(|row| row[c].clone()).collect()),
            ));
        } else {
            let bad = numeric.iter().position(Option::is_none).unwrap();
            return Err(Error::ParseCell {
                row: bad + 1,
                column: name.clone(),
                value: cells[bad][c].clone(),
            });
        }
    }

    let mut names: Vec<String> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (name, col) in columns {
        match col {
            Column::Numeric(values) => {
                names.push(name);
                cols.push(values);
            }
            Column::Categorical(values) => {
                let levels: BTreeSet<&String> = values.iter().collect();
                // One indicator per level beyond the first; a single-level
                // column carries no information and expands to nothing.
                for level in levels.iter().skip(1) {
                    names.push(format!("{name}={level}"));
                    cols.push(
                        values
                            .iter()
                            .map(|v| f64::from(v == *level))
                            .collect(),
                    );
                }
            }
        }
    }
    if cols.is_empty() {
        return Err(Error::InvalidArgument(
            "no usable covariate columns after expansion".into(),
        ));
    }
    let mut x = Array2::zeros((n, cols.len()));
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            x[[i, j]] = v;
        }
    }

    let binary = y.iter().all(|&v| v == 0.0 || v == 1.0);
    if binary {
        Ok(LoadedDataset::Binary(BinaryDataset::new(x, y, Some(names))?))
    } else {
        Ok(LoadedDataset::Continuous(Dataset::new(x, y, Some(names))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use std::io::Write;

    fn toy() -> Dataset {
        let x = array![
            [1.0, 10.0],
            [2.0, 12.0],
            [3.0, 9.0],
            [4.0, 14.0],
            [5.0, 11.0],
        ];
        let y = array![2.0, 4.0, 5.0, 8.0, 9.0];
        Dataset::new(x, y, None).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        let x = array![[1.0], [2.0]];
        assert!(Dataset::new(x.clone(), array![1.0], None).is_err());
        assert!(Dataset::new(x.clone(), array![1.0, f64::NAN], None).is_err());
        assert!(Dataset::new(array![[1.0]], array![1.0], None).is_err());
        assert!(BinaryDataset::new(x, array![0.0, 0.5], None).is_err());
    }

    #[test]
    fn standardize_centers_and_normalizes() {
        let d = standardize(&toy()).unwrap();
        assert!(d.is_standardized());
        for j in 0..d.p() {
            let col = d.x().column(j).to_owned();
            assert_abs_diff_eq!(col.sum(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(col.dot(&col), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d.y().sum(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.standardization().y_mean, 5.6, epsilon = 1e-12);
    }

    #[test]
    fn standardize_twice_composes_to_the_same_transform() {
        let once = standardize(&toy()).unwrap();
        let twice = standardize(&once).unwrap();
        for j in 0..once.p() {
            assert_abs_diff_eq!(
                once.standardization().column_means[j],
                twice.standardization().column_means[j],
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                once.standardization().column_scales[j],
                twice.standardization().column_scales[j],
                epsilon = 1e-10
            );
        }
        assert_abs_diff_eq!(
            once.standardization().y_mean,
            twice.standardization().y_mean,
            epsilon = 1e-12
        );
        for (a, b) in once.x().iter().zip(twice.x().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn standardize_names_the_constant_column() {
        let x = array![[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]];
        let d = Dataset::new(x, array![1.0, 2.0, 3.0], Some(vec!["a".into(), "b".into()]))
            .unwrap();
        match standardize(&d) {
            Err(Error::ConstantColumn { name }) => assert_eq!(name, "b"),
            other => panic!("expected constant column error, got {other:?}"),
        }
    }

    #[test]
    fn standardize_rejects_constant_response() {
        let x = array![[1.0], [2.0], [3.0]];
        let d = Dataset::new(x, array![5.0, 5.0, 5.0], None).unwrap();
        assert!(matches!(standardize(&d), Err(Error::ConstantResponse)));
    }

    #[test]
    fn expansion_uses_raw_scale_products() {
        let d = standardize(&toy()).unwrap();
        let e = expand_two_way(&d, false).unwrap();
        assert_eq!(e.p(), 3);
        assert_eq!(e.names()[2], "x1:x2");
        // Products must match the raw data even though the input was
        // standardized.
        let raw = toy();
        for i in 0..raw.n() {
            assert_abs_diff_eq!(
                e.x()[[i, 2]],
                raw.x()[[i, 0]] * raw.x()[[i, 1]],
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(e.y()[i], raw.y()[i], epsilon = 1e-10);
        }
        let sq = expand_two_way(&raw, true).unwrap();
        assert_eq!(sq.p(), 5);
        assert_eq!(sq.names()[2], "x1:x1");
        assert_eq!(sq.names()[3], "x1:x2");
        assert_eq!(sq.names()[4], "x2:x2");
    }

    #[test]
    fn simulation_is_reproducible_and_seed_sensitive() {
        let spec = SyntheticSpec {
            n: 50,
            p: 4,
            beta_sd: 1.0,
            seed: 9,
        };
        let (d1, b1) = simulate_logistic(&spec).unwrap();
        let (d2, b2) = simulate_logistic(&spec).unwrap();
        assert_eq!(d1.fingerprint(), d2.fingerprint());
        assert_eq!(b1, b2);
        let (d3, _) = simulate_logistic(&SyntheticSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(d1.fingerprint(), d3.fingerprint());
        assert!(d1.y().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn holdout_rounds_half_up_and_partitions() {
        // 0.10 of 45 rows is 4.5, which rounds up to 5.
        let plan = holdout_split(45, 0.10, 3).unwrap();
        assert_eq!(plan.test_indices.len(), 5);
        assert_eq!(plan.train_indices.len(), 40);
        let mut all: Vec<usize> = plan
            .train_indices
            .iter()
            .chain(plan.test_indices.iter())
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..45).collect::<Vec<_>>());
        // Same seed, same plan; different seed, different plan.
        assert_eq!(
            holdout_split(45, 0.10, 3).unwrap().fingerprint(),
            plan.fingerprint()
        );
        assert_ne!(
            holdout_split(45, 0.10, 4).unwrap().fingerprint(),
            plan.fingerprint()
        );
    }

    #[test]
    fn holdout_rejects_degenerate_fractions() {
        assert!(holdout_split(10, 0.0, 0).is_err());
        assert!(holdout_split(10, 1.0, 0).is_err());
        assert!(holdout_split(10, 0.01, 0).is_err());
        assert!(holdout_split(3, 0.5, 0).is_err());
    }

    #[test]
    fn kfold_balances_folds() {
        let a = kfold_assign(47, 9, 11).unwrap();
        let mut sizes = vec![0usize; 9];
        for &f in &a.fold_of {
            sizes[f] += 1;
        }
        assert_eq!(sizes.iter().sum::<usize>(), 47);
        assert_eq!(*sizes.iter().max().unwrap() - *sizes.iter().min().unwrap(), 1);
        assert_eq!(a.fold_rows(0).len(), sizes[0]);
        assert_eq!(a.complement_rows(0).len(), 47 - sizes[0]);
        assert!(kfold_assign(5, 1, 0).is_err());
        assert!(kfold_assign(5, 6, 0).is_err());
    }

    #[test]
    fn subset_copies_rows_and_drops_the_flag() {
        let d = standardize(&toy()).unwrap();
        let s = d.subset(&[0, 2, 4]).unwrap();
        assert_eq!(s.n(), 3);
        assert!(!s.is_standardized());
        assert_abs_diff_eq!(s.x()[[1, 0]], d.x()[[2, 0]], epsilon = 0.0);
        assert!(d.subset(&[0, 9]).is_err());
    }

    #[test]
    fn load_csv_expands_categoricals_and_detects_binary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "num,grade,y").unwrap();
        writeln!(f, "1.5,b,0").unwrap();
        writeln!(f, "2.5,a,1").unwrap();
        writeln!(f, "3.5,c,0").unwrap();
        writeln!(f, "4.5,a,1").unwrap();
        drop(f);
        match load_csv(&path, "y").unwrap() {
            LoadedDataset::Binary(d) => {
                assert_eq!(d.names(), &["num", "grade=b", "grade=c"]);
                assert_eq!(d.x().column(1).to_vec(), vec![1.0, 0.0, 0.0, 0.0]);
                assert_eq!(d.x().column(2).to_vec(), vec![0.0, 0.0, 1.0, 0.0]);
            }
            LoadedDataset::Continuous(_) => panic!("expected binary"),
        }
    }

    #[test]
    fn load_csv_reports_the_first_mixed_cell() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "a,y").unwrap();
        writeln!(f, "1.0,0.5").unwrap();
        writeln!(f, "oops,1.5").unwrap();
        writeln!(f, "3.0,2.5").unwrap();
        drop(f);
        match load_csv(&path, "y") {
            Err(Error::ParseCell { row, column, value }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "a");
                assert_eq!(value, "oops");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_requires_the_response_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "a,b\n1,2\n3,4\n").unwrap();
        assert!(matches!(
            load_csv(&path, "y"),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            load_csv(dir.path().join("missing.csv"), "y"),
            Err(Error::MissingDataset { .. })
        ));
    }
}
