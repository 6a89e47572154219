//! Model selection along a path: Mallows' Cp at each breakpoint,
//! k-fold cross-validation over a shrinkage grid, and holdout scoring.

use ndarray::ArrayView1;
use serde::Serialize;

use crate::dataset::{kfold_assign, standardize, Dataset, FoldAssignment};
use crate::error::{Error, Result};
use crate::lars::{coefficients_at, lars_path, predict, PathMode, SolutionPath};
use crate::linalg::least_squares;

/// Which path algorithm cross-validation refits on each fold. The
/// stagewise step is specified relative to the fold's starting
/// correlation so one setting works across folds of different sizes.
#[derive(Debug, Clone, Serialize)]
pub enum PathEngine {
    Lars,
    Lasso,
    Stagewise { epsilon_rel: f64, max_steps: usize },
}

impl PathEngine {
    /// Concrete path mode for a standardized training set.
    pub fn mode_for(&self, d: &Dataset) -> PathMode {
        match *self {
            PathEngine::Lars => PathMode::Lars,
            PathEngine::Lasso => PathMode::Lasso,
            PathEngine::Stagewise {
                epsilon_rel,
                max_steps,
            } => {
                let c0 = d.x().t().dot(&d.y());
                let cmax = c0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                PathMode::Stagewise {
                    epsilon: epsilon_rel * cmax,
                    max_steps,
                }
            }
        }
    }
}

/// Cp value at one path segment.
#[derive(Debug, Clone, Serialize)]
pub struct CpStep {
    pub step: usize,
    pub rss: f64,
    pub df: usize,
    pub cp: f64,
}

/// Cp evaluated along a whole path. `selected_step` indexes the segment
/// minimizing Cp, earliest on ties.
#[derive(Debug, Clone, Serialize)]
pub struct CpReport {
    pub per_step: Vec<CpStep>,
    pub sigma2_hat: f64,
    pub selected_step: usize,
}

/// Mallows' Cp at each breakpoint: `rss/σ̂² − n + 2(df+1)`, charging one
/// degree of freedom per variable in the fit plus one for the intercept,
/// with σ̂² the residual variance of the full least squares fit. At the
/// terminal segment of a complete path this evaluates to exactly p+1.
pub fn cp_curve(path: &SolutionPath, d: &Dataset) -> Result<CpReport> {
    if !d.is_standardized() {
        return Err(Error::NotStandardized);
    }
    if path.fingerprint != d.fingerprint() {
        return Err(Error::FingerprintMismatch);
    }
    let (n, p) = (d.n(), d.p());
    if n <= p + 1 {
        return Err(Error::InvalidArgument(format!(
            "Cp needs n > p + 1 to estimate the residual variance (n={n}, p={p}); \
             use cross-validation instead"
        )));
    }
    let full = least_squares(&d.x(), &d.y())?;
    let full_res = &d.y() - &d.x().dot(&full);
    let rss_full = full_res.dot(&full_res);
    let sigma2 = rss_full / (n - p - 1) as f64;
    if sigma2 <= 0.0 {
        return Err(Error::InvalidArgument(
            "the full model interpolates; Cp is undefined".into(),
        ));
    }

    let mut per_step = Vec::with_capacity(path.segments.len());
    let mut best = (0usize, f64::INFINITY);
    for (k, seg) in path.segments.iter().enumerate() {
        let res = &d.y() - &d.x().dot(&seg.beta);
        let rss = res.dot(&res);
        let cp = rss / sigma2 - n as f64 + 2.0 * (seg.df + 1) as f64;
        if cp < best.1 {
            best = (k, cp);
        }
        per_step.push(CpStep {
            step: seg.step,
            rss,
            df: seg.df,
            cp,
        });
    }
    Ok(CpReport {
        per_step,
        sigma2_hat: sigma2,
        selected_step: best.0,
    })
}

/// Cross-validation curve over a shrinkage grid.
#[derive(Debug, Clone, Serialize)]
pub struct CVReport {
    pub grid: Vec<f64>,
    /// Mean squared error per fold per grid point.
    pub fold_losses: Vec<Vec<f64>>,
    pub mean_loss: Vec<f64>,
    pub se_loss: Vec<f64>,
    pub selected_t: f64,
    pub assignment: FoldAssignment,
}

/// Evenly spaced shrinkage fractions in [0, 1].
pub fn shrinkage_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2);
    (0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty shrinkage grid".into()));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "shrinkage grid must be strictly increasing".into(),
            ));
        }
    }
    if grid[0] < 0.0 || *grid.last().unwrap() > 1.0 {
        return Err(Error::InvalidArgument(
            "shrinkage grid must lie within [0, 1]".into(),
        ));
    }
    Ok(())
}

/// K-fold cross-validation of a path algorithm over a shrinkage grid.
/// Each fold's training rows are standardized from scratch, a path is
/// fit, and every grid point is scored on the held-out rows. Equal to
/// [`cv_select_assigned`] with a fresh seeded assignment.
pub fn cv_select(
    d: &Dataset,
    k: usize,
    engine: &PathEngine,
    grid: &[f64],
    seed: u64,
) -> Result<CVReport> {
    let assignment = kfold_assign(d.n(), k, seed)?;
    cv_select_assigned(d, &assignment, engine, grid)
}

/// Cross-validation with a caller-provided fold assignment, so several
/// methods can share identical folds.
pub fn cv_select_assigned(
    d: &Dataset,
    assignment: &FoldAssignment,
    engine: &PathEngine,
    grid: &[f64],
) -> Result<CVReport> {
    validate_grid(grid)?;
    if assignment.fold_of.len() != d.n() {
        return Err(Error::DimensionMismatch {
            what: "fold assignment",
            expected: d.n(),
            got: assignment.fold_of.len(),
        });
    }
    let mut fold_losses = Vec::with_capacity(assignment.k);
    for fold in 0..assignment.k {
        let run = || -> Result<Vec<f64>> {
            let train = d.subset(&assignment.complement_rows(fold))?;
            let test_rows = assignment.fold_rows(fold);
            let ds = standardize(&train)?;
            let path = lars_path(&ds, &engine.mode_for(&ds))?;
            let mut losses = Vec::with_capacity(grid.len());
            for &t in grid {
                let beta = coefficients_at(&path, t)?;
                let mut sum = 0.0;
                for &row in &test_rows {
                    let pred = predict(
                        &d.x().slice(ndarray::s![row..row + 1, ..]),
                        &beta.view(),
                        ds.standardization(),
                    )?[0];
                    let e = pred - d.y()[row];
                    sum += e * e;
                }
                losses.push(sum / test_rows.len() as f64);
            }
            Ok(losses)
        };
        fold_losses.push(run().map_err(|e| Error::FoldFailure {
            fold,
            source: Box::new(e),
        })?);
    }

    let k = assignment.k as f64;
    let mut mean_loss = vec![0.0; grid.len()];
    let mut se_loss = vec![0.0; grid.len()];
    for (g, m) in mean_loss.iter_mut().enumerate() {
        *m = fold_losses.iter().map(|f| f[g]).sum::<f64>() / k;
    }
    for (g, s) in se_loss.iter_mut().enumerate() {
        let var = fold_losses
            .iter()
            .map(|f| (f[g] - mean_loss[g]).powi(2))
            .sum::<f64>()
            / (k - 1.0);
        *s = (var / k).sqrt();
    }
    let selected = argmin_first(&mean_loss);
    Ok(CVReport {
        grid: grid.to_vec(),
        fold_losses,
        mean_loss,
        se_loss,
        selected_t: grid[selected],
        assignment: assignment.clone(),
    })
}

/// Index of the smallest value, earliest on ties, so equal losses fall
/// back to the least shrinkage.
fn argmin_first(xs: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, v) in xs.iter().enumerate().skip(1) {
        if *v < xs[best] {
            best = i;
        }
    }
    best
}

/// Holdout scores for a prediction vector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalReport {
    pub mse: f64,
    pub mad: f64,
    pub n_test: usize,
}

/// Mean squared error and mean absolute deviation on held-out rows.
pub fn evaluate_holdout(
    predictions: &ArrayView1<f64>,
    y_test: &ArrayView1<f64>,
) -> Result<EvalReport> {
    if predictions.len() != y_test.len() {
        return Err(Error::DimensionMismatch {
            what: "holdout predictions",
            expected: y_test.len(),
            got: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("empty holdout set".into()));
    }
    let n = predictions.len() as f64;
    let mut mse = 0.0;
    let mut mad = 0.0;
    for (p, y) in predictions.iter().zip(y_test.iter()) {
        let e = p - y;
        mse += e * e;
        mad += e.abs();
    }
    Ok(EvalReport {
        mse: mse / n,
        mad: mad / n,
        n_test: predictions.len(),
    })
}
