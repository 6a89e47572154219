//! Benchmark drivers behind the CLI: holdout comparisons of the path
//! methods under Cp and cross-validated shrinkage selection, the
//! five-method prediction table (least squares, CV-selected least angle,
//! two-way Cp least angle, and both boosting depths), and the logistic
//! coefficient-trajectory export. A single holdout split and fold
//! assignment is built per seed and shared by every method, asserted by
//! fingerprint.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::boost::{cv_select_trees, l2boost_fit, l2boost_predict, BoostConfig, TreeDepth};
use crate::dataset::{
    expand_two_way, holdout_split, kfold_assign, load_csv, simulate_logistic, standardize,
    standardize_binary, Dataset, FoldAssignment, LoadedDataset, SplitPlan, SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::lalr::{lalr_path, mle_logistic, stagewise_logistic, LalrConfig, LogisticPath};
use crate::lars::{coefficients_at, lars_path, predict, SolutionPath};
use crate::selection::{cp_curve, cv_select_assigned, evaluate_holdout, shrinkage_grid, PathEngine};

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    /// Dataset stems resolved as `<data_dir>/<name>.csv`.
    pub datasets: Vec<String>,
    pub seeds: Vec<u64>,
    pub holdout_fraction: f64,
    pub cv_folds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            datasets: vec!["diabetes".into()],
            seeds: (0..20).collect(),
            holdout_fraction: 0.10,
            cv_folds: 9,
        }
    }
}

/// Mean and sample standard deviation over seeds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub sd: f64,
}

fn aggregate(xs: &[f64]) -> Aggregate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Aggregate { mean, sd }
}

/// The three path engines compared under both selection rules. The
/// stagewise step is set small enough to track the least angle paths
/// while finishing each fit in a few thousand passes.
pub fn standard_engines() -> Vec<(String, PathEngine)> {
    vec![
        (
            "Stagewise".into(),
            PathEngine::Stagewise {
                epsilon_rel: 1e-3,
                max_steps: 500_000,
            },
        ),
        ("LARS".into(), PathEngine::Lars),
        ("Lasso".into(), PathEngine::Lasso),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub dataset: String,
    pub method: String,
    pub cv_mse: Aggregate,
    pub cp_mse: Aggregate,
    pub per_seed_cv: Vec<f64>,
    pub per_seed_cp: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub seeds: Vec<u64>,
    pub holdout_fraction: f64,
    pub cv_folds: usize,
}

/// Holdout comparison of shrinkage selection rules on one dataset: for
/// every seed, fit each engine's path on the training split, pick the
/// shrinkage by shared-fold CV and by Cp, and score both picks on the
/// held-out rows.
pub fn table1_for_dataset(
    dataset: &str,
    d: &Dataset,
    cfg: &ExperimentConfig,
    engines: &[(String, PathEngine)],
) -> Result<Vec<Table1Row>> {
    let grid = shrinkage_grid(51);
    let mut cv_scores: Vec<Vec<f64>> = vec![Vec::new(); engines.len()];
    let mut cp_scores: Vec<Vec<f64>> = vec![Vec::new(); engines.len()];
    for &seed in &cfg.seeds {
        let plan = holdout_split(d.n(), cfg.holdout_fraction, seed)?;
        let train = d.subset(&plan.train_indices)?;
        let test = d.subset(&plan.test_indices)?;
        let assignment = kfold_assign(train.n(), cfg.cv_folds, seed)?;
        let ds = standardize(&train)?;
        for (m, (_, engine)) in engines.iter().enumerate() {
            let path = lars_path(&ds, &engine.mode_for(&ds))?;
            let cv = cv_select_assigned(&train, &assignment, engine, &grid)?;
            let beta_cv = coefficients_at(&path, cv.selected_t)?;
            let pred_cv = predict(&test.x(), &beta_cv.view(), ds.standardization())?;
            cv_scores[m].push(evaluate_holdout(&pred_cv.view(), &test.y())?.mse);
            let cp = cp_curve(&path, &ds)?;
            let beta_cp = &path.segments[cp.selected_step].beta;
            let pred_cp = predict(&test.x(), &beta_cp.view(), ds.standardization())?;
            cp_scores[m].push(evaluate_holdout(&pred_cp.view(), &test.y())?.mse);
        }
    }
    Ok(engines
        .iter()
        .enumerate()
        .map(|(m, (name, _))| Table1Row {
            dataset: dataset.into(),
            method: name.clone(),
            cv_mse: aggregate(&cv_scores[m]),
            cp_mse: aggregate(&cp_scores[m]),
            per_seed_cv: cv_scores[m].clone(),
            per_seed_cp: cp_scores[m].clone(),
        })
        .collect())
}

pub fn run_table1(cfg: &ExperimentConfig) -> Result<Table1> {
    let mut rows = Vec::new();
    let engines = standard_engines();
    for name in &cfg.datasets {
        let d = load_continuous(&cfg.data_dir, name)?;
        rows.extend(table1_for_dataset(name, &d, cfg, &engines)?);
    }
    Ok(Table1 {
        rows,
        seeds: cfg.seeds.clone(),
        holdout_fraction: cfg.holdout_fraction,
        cv_folds: cfg.cv_folds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Row {
    pub dataset: String,
    pub method: String,
    pub mse: Aggregate,
    pub mad: Aggregate,
    pub per_seed_mse: Vec<f64>,
    pub per_seed_mad: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2 {
    pub rows: Vec<Table2Row>,
    pub seeds: Vec<u64>,
    pub holdout_fraction: f64,
    pub cv_folds: usize,
}

/// Per-seed split shared by all five methods; the fingerprint witnesses
/// that no method re-derived its own folds.
struct SharedSplit {
    plan: SplitPlan,
    assignment: FoldAssignment,
}

impl SharedSplit {
    fn fingerprint(&self) -> (u64, u64) {
        (self.plan.fingerprint(), self.assignment.fingerprint())
    }
}

/// Keeps only columns that vary on the training rows, applying the same
/// selection to the test rows. Two-way expansions of encoded categories
/// can produce identically-zero products that would break
/// standardization.
fn drop_constant_columns(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset)> {
    let keep: Vec<usize> = (0..train.p())
        .filter(|&j| {
            let col = train.x().column(j).to_owned();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in col.iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            hi > lo
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "every expanded column is constant on the training rows".into(),
        ));
    }
    let pick = |d: &Dataset| -> Result<Dataset> {
        let mut x = Array2::zeros((d.n(), keep.len()));
        for (c, &j) in keep.iter().enumerate() {
            x.column_mut(c).assign(&d.x().column(j));
        }
        let names = keep.iter().map(|&j| d.names()[j].clone()).collect();
        Dataset::new(x, d.y().to_owned(), Some(names))
    };
    Ok((pick(train)?, pick(test)?))
}

fn boost_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xB005)
}

/// The five-method holdout comparison on one dataset: ordinary least
/// squares on main effects, the CV-selected least angle fit, the Cp
/// pick from the two-way-interaction least angle path, and boosting at
/// both tree depths with CV-chosen round counts — every method scored
/// on the identical per-seed split and folds.
pub fn table2_for_dataset(
    dataset: &str,
    d: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<Vec<Table2Row>> {
    const METHODS: [&str; 5] = ["LM", "LARS", "LARS two-way Cp", "GBM additive", "GBM two-way"];
    let grid = shrinkage_grid(51);
    let expanded = expand_two_way(d, false)?;
    let mut mse: BTreeMap<&str, Vec<f64>> = METHODS.iter().map(|&m| (m, Vec::new())).collect();
    let mut mad: BTreeMap<&str, Vec<f64>> = METHODS.iter().map(|&m| (m, Vec::new())).collect();
    for &seed in &cfg.seeds {
        let plan = holdout_split(d.n(), cfg.holdout_fraction, seed)?;
        let assignment = kfold_assign(plan.train_indices.len(), cfg.cv_folds, seed)?;
        let shared = SharedSplit { plan, assignment };
        let train = d.subset(&shared.plan.train_indices)?;
        let test = d.subset(&shared.plan.test_indices)?;
        let mut fingerprints: Vec<(u64, u64)> = Vec::with_capacity(5);
        let mut record = |name: &str, report: crate::selection::EvalReport, fp: (u64, u64)| {
            mse.get_mut(name).unwrap().push(report.mse);
            mad.get_mut(name).unwrap().push(report.mad);
            fingerprints.push(fp);
        };

        // Least squares on raw main effects with an intercept column.
        {
            let mut xa = Array2::ones((train.n(), train.p() + 1));
            for i in 0..train.n() {
                for j in 0..train.p() {
                    xa[[i, j + 1]] = train.x()[[i, j]];
                }
            }
            let coef = crate::linalg::least_squares(&xa.view(), &train.y())?;
            let mut pred = Array1::from_elem(test.n(), coef[0]);
            for i in 0..test.n() {
                for j in 0..test.p() {
                    pred[i] += coef[j + 1] * test.x()[[i, j]];
                }
            }
            record(
                "LM",
                evaluate_holdout(&pred.view(), &test.y())?,
                shared.fingerprint(),
            );
        }

        // CV-selected least angle fit on main effects.
        {
            let ds = standardize(&train)?;
            let path = lars_path(&ds, &PathEngine::Lars.mode_for(&ds))?;
            let cv = cv_select_assigned(&train, &shared.assignment, &PathEngine::Lars, &grid)?;
            let beta = coefficients_at(&path, cv.selected_t)?;
            let pred = predict(&test.x(), &beta.view(), ds.standardization())?;
            record(
                "LARS",
                evaluate_holdout(&pred.view(), &test.y())?,
                shared.fingerprint(),
            );
        }

        // Cp pick from the least angle path over main effects plus all
        // pairwise products.
        {
            let train2 = expanded.subset(&shared.plan.train_indices)?;
            let test2 = expanded.subset(&shared.plan.test_indices)?;
            let (train2, test2) = drop_constant_columns(&train2, &test2)?;
            let ds = standardize(&train2)?;
            let path = lars_path(&ds, &PathEngine::Lars.mode_for(&ds))?;
            let cp = cp_curve(&path, &ds)?;
            let beta = &path.segments[cp.selected_step].beta;
            let pred = predict(&test2.x(), &beta.view(), ds.standardization())?;
            record(
                "LARS two-way Cp",
                evaluate_holdout(&pred.view(), &test2.y())?,
                shared.fingerprint(),
            );
        }

        // Boosting at both depths, round count chosen on the shared folds.
        for (name, depth) in [("GBM additive", TreeDepth::Stump), ("GBM two-way", TreeDepth::TwoWay)] {
            let base = BoostConfig {
                depth,
                ..BoostConfig::default()
            };
            let report = cv_select_trees(&train, &shared.assignment, &base, boost_seed(seed))?;
            let final_config = BoostConfig {
                n_trees: report.selected_trees,
                ..base
            };
            let model = l2boost_fit(&train, &final_config, boost_seed(seed).wrapping_add(1))?;
            let pred = l2boost_predict(&model, &test.x())?;
            record(
                name,
                evaluate_holdout(&pred.view(), &test.y())?,
                shared.fingerprint(),
            );
        }

        assert!(
            fingerprints.windows(2).all(|w| w[0] == w[1]),
            "methods diverged from the shared split within seed {seed}"
        );
    }
    Ok(METHODS
        .iter()
        .map(|&name| Table2Row {
            dataset: dataset.into(),
            method: name.into(),
            mse: aggregate(&mse[name]),
            mad: aggregate(&mad[name]),
            per_seed_mse: mse[name].clone(),
            per_seed_mad: mad[name].clone(),
        })
        .collect())
}

pub fn run_table2(cfg: &ExperimentConfig) -> Result<Table2> {
    let mut rows = Vec::new();
    for name in &cfg.datasets {
        let d = load_continuous(&cfg.data_dir, name)?;
        rows.extend(table2_for_dataset(name, &d, cfg)?);
    }
    Ok(Table2 {
        rows,
        seeds: cfg.seeds.clone(),
        holdout_fraction: cfg.holdout_fraction,
        cv_folds: cfg.cv_folds,
    })
}

/// Trajectory export of the two logistic path algorithms against the
/// Newton endpoint on one simulated draw.
#[derive(Debug, Clone, Serialize)]
pub struct Figure1Report {
    pub seed: u64,
    pub files: Vec<PathBuf>,
    /// ∞-norm gap between each terminal state and the MLE, intercept
    /// included.
    pub lalr_gap: f64,
    pub stagewise_gap: f64,
    pub lalr_converged: bool,
    pub stagewise_converged: bool,
}

const FIGURE1_N: usize = 1000;
const FIGURE1_P: usize = 10;
const FIGURE1_EPSILON: f64 = 1e-3;
const FIGURE1_MAX_ITERS: usize = 1_500_000;
const FIGURE1_RECORD_EVERY: usize = 100;

/// Simulates the standard-normal logistic draw (n = 1000, p = 10,
/// coefficient sd 1), runs both path algorithms on the standardized
/// data, and writes three CSVs into `out_dir`: one trajectory per
/// algorithm (rows carry both the step index and the L1 norm) plus the
/// MLE endpoint. Reruns with the same seed are byte-identical.
pub fn run_figure1(seed: u64, out_dir: &Path) -> Result<Figure1Report> {
    run_figure1_capped(seed, out_dir, FIGURE1_MAX_ITERS)
}

/// [`run_figure1`] with an explicit stagewise iteration cap, for runs
/// that trade the terminal's accuracy for speed.
pub fn run_figure1_capped(seed: u64, out_dir: &Path, max_iters: usize) -> Result<Figure1Report> {
    let spec = SyntheticSpec {
        n: FIGURE1_N,
        p: FIGURE1_P,
        beta_sd: 1.0,
        seed,
    };
    let (raw, _truth) = simulate_logistic(&spec)?;
    let d = standardize_binary(&raw)?;
    let lalr = lalr_path(&d, &LalrConfig::default())?;
    let stage = stagewise_logistic(&d, FIGURE1_EPSILON, max_iters, FIGURE1_RECORD_EVERY)?;
    let (mle_beta, mle_intercept) = mle_logistic(&d)?;

    std::fs::create_dir_all(out_dir).map_err(|e| {
        Error::InvalidArgument(format!("cannot create {}: {e}", out_dir.display()))
    })?;
    let names = d.names();
    let write_path = |file: &Path, path: &LogisticPath| -> Result<()> {
        let mut out = String::new();
        out.push_str("step,l1_norm,intercept");
        for name in names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for state in &path.states {
            let l1: f64 = state.beta.iter().map(|b| b.abs()).sum();
            out.push_str(&format!("{},{:?},{:?}", state.step, l1, state.intercept));
            for b in state.beta.iter() {
                out.push_str(&format!(",{b:?}"));
            }
            out.push('\n');
        }
        write_file(file, &out)
    };
    let lalr_file = out_dir.join(format!("figure1_seed{seed}_lalr.csv"));
    let stage_file = out_dir.join(format!("figure1_seed{seed}_stagewise.csv"));
    let mle_file = out_dir.join(format!("figure1_seed{seed}_mle.csv"));
    write_path(&lalr_file, &lalr)?;
    write_path(&stage_file, &stage)?;
    {
        let mut out = String::from("intercept");
        for name in names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        out.push_str(&format!("{mle_intercept:?}"));
        for b in mle_beta.iter() {
            out.push_str(&format!(",{b:?}"));
        }
        out.push('\n');
        write_file(&mle_file, &out)?;
    }

    let gap = |path: &LogisticPath| -> f64 {
        let t = path.terminal();
        let mut g = (t.intercept - mle_intercept).abs();
        for (a, b) in t.beta.iter().zip(mle_beta.iter()) {
            g = g.max((a - b).abs());
        }
        g
    };
    Ok(Figure1Report {
        seed,
        files: vec![lalr_file, stage_file, mle_file],
        lalr_gap: gap(&lalr),
        stagewise_gap: gap(&stage),
        lalr_converged: lalr.converged_to_mle,
        stagewise_converged: stage.converged_to_mle,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

/// Loads `<dir>/<name>.csv` with the documented response column for the
/// benchmark datasets (`y` otherwise); a 0/1 response is treated as
/// continuous for the squared-error experiments.
pub fn load_continuous(dir: &Path, name: &str) -> Result<Dataset> {
    let path = dir.join(format!("{name}.csv"));
    if !path.exists() {
        return Err(Error::InvalidArgument(format!(
            "dataset file {} not found; place {name}.csv under the data directory",
            path.display()
        )));
    }
    match load_csv(&path, response_column(name))? {
        LoadedDataset::Continuous(d) => Ok(d),
        LoadedDataset::Binary(b) => Ok(b.into_continuous()),
    }
}

/// Response column per benchmark dataset stem.
pub fn response_column(name: &str) -> &'static str {
    match name {
        "boston" => "medv",
        "servo" => "class",
        _ => "y",
    }
}

/// Full solution path of one engine on a standardized copy of the data,
/// for the solver subcommands.
pub fn solve_path(d: &Dataset, engine: &PathEngine) -> Result<SolutionPath> {
    let ds = standardize(d)?;
    lars_path(&ds, &engine.mode_for(&ds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;
    use tempfile::tempdir;

    fn linear_dataset(seed: u64, n: usize, p: usize, noise: f64) -> Dataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
        let beta = Array1::from_shape_fn(p, |j| 0.5 - 0.2 * j as f64);
        let mut y = x.dot(&beta);
        if noise > 0.0 {
            for v in y.iter_mut() {
                *v += noise * rng.sample::<f64, _>(StandardNormal);
            }
        }
        Dataset::new(x, y, None).unwrap()
    }

    fn small_config(seeds: u64, folds: usize) -> ExperimentConfig {
        ExperimentConfig {
            seeds: (0..seeds).collect(),
            cv_folds: folds,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn noiseless_linear_data_scores_near_zero_everywhere() {
        let d = linear_dataset(1, 45, 3, 0.0);
        // The stagewise terminal wanders a step-quantization floor around
        // the least squares fit, so hitting 1e-10 needs a smaller step
        // than the benchmark default.
        let engines = vec![
            (
                "Stagewise".to_string(),
                PathEngine::Stagewise {
                    epsilon_rel: 3e-6,
                    max_steps: 3_000_000,
                },
            ),
            ("LARS".to_string(), PathEngine::Lars),
            ("Lasso".to_string(), PathEngine::Lasso),
        ];
        let rows = table1_for_dataset("synthetic", &d, &small_config(2, 3), &engines).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert!(
                row.cv_mse.mean < 1e-10,
                "{} CV MSE {}",
                row.method,
                row.cv_mse.mean
            );
            assert!(
                row.cp_mse.mean < 1e-10,
                "{} Cp MSE {}",
                row.method,
                row.cp_mse.mean
            );
        }
    }

    #[test]
    fn table1_is_deterministic_given_seeds() {
        let d = linear_dataset(2, 60, 4, 0.5);
        let engines = standard_engines();
        let cfg = small_config(3, 4);
        let a = table1_for_dataset("synthetic", &d, &cfg, &engines).unwrap();
        let b = table1_for_dataset("synthetic", &d, &cfg, &engines).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn table2_reports_five_methods_with_sane_cells() {
        let d = linear_dataset(3, 80, 3, 0.4);
        let rows = table2_for_dataset("synthetic", &d, &small_config(2, 4)).unwrap();
        let methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(
            methods,
            ["LM", "LARS", "LARS two-way Cp", "GBM additive", "GBM two-way"]
        );
        for row in &rows {
            assert!(row.mse.mean.is_finite() && row.mse.mean >= 0.0);
            // MAD cannot exceed the root mean square error on any seed.
            for (mse, mad) in row.per_seed_mse.iter().zip(&row.per_seed_mad) {
                assert!(mad * mad <= mse * (1.0 + 1e-12), "MAD {mad} vs MSE {mse}");
            }
        }
    }

    #[test]
    fn interaction_data_favors_the_interaction_methods() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 160;
        let x = Array2::from_shape_fn((n, 4), |_| rng.sample::<f64, _>(StandardNormal));
        let y = Array1::from_shape_fn(n, |i| {
            3.0 * x[[i, 0]] * x[[i, 1]] + 0.3 * rng.sample::<f64, _>(StandardNormal)
        });
        let d = Dataset::new(x, y, None).unwrap();
        let rows = table2_for_dataset("interaction", &d, &small_config(3, 4)).unwrap();
        let mean = |name: &str| {
            rows.iter()
                .find(|r| r.method == name)
                .map(|r| r.mse.mean)
                .unwrap()
        };
        let main_best = mean("LM").min(mean("LARS"));
        for name in ["LARS two-way Cp", "GBM two-way"] {
            assert!(
                mean(name) < main_best,
                "{name} MSE {} vs best main-effects {main_best}",
                mean(name)
            );
        }
    }

    #[test]
    fn figure1_files_are_byte_identical_across_reruns() {
        let dir = tempdir().unwrap();
        let first = run_figure1(11, dir.path()).unwrap();
        let bytes: Vec<Vec<u8>> = first
            .files
            .iter()
            .map(|f| std::fs::read(f).unwrap())
            .collect();
        let second = run_figure1(11, dir.path()).unwrap();
        for (file, old) in second.files.iter().zip(&bytes) {
            assert_eq!(&std::fs::read(file).unwrap(), old, "{}", file.display());
        }
        assert!(first.lalr_gap < 1e-3);
        assert!(first.stagewise_gap < 1e-3);
        assert!(first.lalr_converged);
    }

    #[test]
    fn figure1_paths_start_with_the_same_variable() {
        let dir = tempdir().unwrap();
        let report = run_figure1(12, dir.path()).unwrap();
        let first_active = |file: &std::path::Path| -> usize {
            let text = std::fs::read_to_string(file).unwrap();
            for line in text.lines().skip(1) {
                let fields: Vec<&str> = line.split(',').collect();
                for (j, f) in fields[3..].iter().enumerate() {
                    if f.parse::<f64>().unwrap() != 0.0 {
                        return j;
                    }
                }
            }
            panic!("no nonzero coefficient in {}", file.display());
        };
        assert_eq!(first_active(&report.files[0]), first_active(&report.files[1]));
    }

    #[test]
    fn missing_dataset_file_is_a_usage_error() {
        let dir = tempdir().unwrap();
        let err = load_continuous(dir.path(), "nonexistent").unwrap_err();
        assert!(err.is_usage());
    }

    #[test]
    fn constant_expanded_columns_are_dropped_consistently() {
        // Disjoint indicators: their product is identically zero.
        let mut x = Array2::zeros((12, 2));
        for i in 0..12 {
            x[[i, 0]] = f64::from(i % 3 == 0);
            x[[i, 1]] = f64::from(i % 3 == 1);
        }
        let y = Array1::from_shape_fn(12, |i| i as f64);
        let d = Dataset::new(x, y, None).unwrap();
        let expanded = expand_two_way(&d, false).unwrap();
        assert_eq!(expanded.p(), 3);
        let train = expanded.subset(&(0..9).collect::<Vec<_>>()).unwrap();
        let test = expanded.subset(&(9..12).collect::<Vec<_>>()).unwrap();
        let (train, test) = drop_constant_columns(&train, &test).unwrap();
        assert_eq!(train.p(), 2);
        assert_eq!(test.p(), 2);
        assert_eq!(train.names(), test.names());
    }
}
