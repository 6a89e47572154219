//! Least angle regression and friends.
//!
//! Three path algorithms over standardized data, all producing the same
//! [`SolutionPath`] shape:
//!
//! * LARS: move the coefficients of the active set along the equiangular
//!   direction until an inactive variable ties the active correlation,
//!   then admit it.
//! * LASSO: LARS plus the drop modification, so a coefficient whose sign
//!   would flip leaves the active set at its zero crossing. The result
//!   traces the full lasso regularization path.
//! * Incremental forward stagewise: repeatedly nudge the coefficient of
//!   the most correlated variable by `epsilon` toward its correlation.
//!
//! Breakpoints are recorded as segments; between consecutive segments the
//! coefficient vector moves linearly, so anything on the path can be
//! reconstructed by interpolation.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::dataset::{Dataset, Standardization};
use crate::error::{Error, Result};
use crate::linalg::UpdatableCholesky;

/// Which path algorithm to run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    Lars,
    Lasso,
    Stagewise { epsilon: f64, max_steps: usize },
}

/// What happened at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEvent {
    VariableAdded(usize),
    VariableDropped(usize),
    Terminal,
}

/// Path state at one breakpoint. `active_set` lists the variables in
/// play immediately after the event; `signs` is parallel to it and holds
/// the sign of each active variable's correlation with the residual.
/// `df` counts the variables actually contributing to `beta` (an entrant
/// still sits at zero), which is what Cp charges for the fit.
#[derive(Debug, Clone, Serialize)]
pub struct PathSegment {
    pub step: usize,
    pub event: PathEvent,
    pub beta: Array1<f64>,
    pub active_set: Vec<usize>,
    pub signs: Vec<f64>,
    pub max_correlation: f64,
    pub df: usize,
}

/// A full coefficient path, linear between consecutive segments.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionPath {
    pub mode: PathMode,
    pub n: usize,
    pub p: usize,
    pub segments: Vec<PathSegment>,
    /// Fingerprint of the training data, checked by consumers that must
    /// see the same dataset again (Cp, for one).
    pub fingerprint: u64,
}

/// Relative tolerance for deciding that two correlations are tied.
const TIE_REL_TOL: f64 = 1e-10;

fn max_abs(v: &ArrayView1<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl SolutionPath {
    pub fn terminal(&self) -> &PathSegment {
        self.segments.last().expect("paths have a terminal segment")
    }

    /// L1 norm of the coefficients at each segment.
    pub fn l1_norms(&self) -> Vec<f64> {
        self.segments
            .iter()
            .map(|s| s.beta.iter().map(|b| b.abs()).sum())
            .collect()
    }
}

/// Runs the selected path algorithm. The dataset must be standardized.
pub fn lars_path(d: &Dataset, mode: &PathMode) -> Result<SolutionPath> {
    if !d.is_standardized() {
        return Err(Error::NotStandardized);
    }
    match *mode {
        PathMode::Stagewise { epsilon, max_steps } => stagewise_path(d, epsilon, max_steps),
        PathMode::Lars => least_angle(d, false),
        PathMode::Lasso => least_angle(d, true),
    }
}

fn least_angle(d: &Dataset, lasso: bool) -> Result<SolutionPath> {
    let x = d.x();
    let y = d.y();
    let (n, p) = (d.n(), d.p());
    let mode = if lasso { PathMode::Lasso } else { PathMode::Lars };
    let max_active = (n - 1).min(p);

    let mut beta: Array1<f64> = Array1::zeros(p);
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut in_active = vec![false; p];
    let mut chol = UpdatableCholesky::new();
    let mut segments: Vec<PathSegment> = Vec::new();
    // A variable that just left the active set sits exactly at the tie
    // boundary; it must not re-enter or bound the step until the path has
    // moved on.
    let mut just_dropped: Option<usize> = None;

    let c0 = x.t().dot(&y);
    let corr_floor = 1e-12 * max_abs(&c0.view()).max(1.0);

    let push = |segments: &mut Vec<PathSegment>,
                beta: &Array1<f64>,
                active: &[usize],
                signs: &[f64],
                cmax: f64,
                event: PathEvent| {
        let df = match event {
            PathEvent::VariableAdded(_) => active.len() - 1,
            _ => active.len(),
        };
        segments.push(PathSegment {
            step: segments.len(),
            event,
            beta: beta.clone(),
            active_set: active.to_vec(),
            signs: signs.to_vec(),
            max_correlation: cmax,
            df,
        });
    };

    let max_iter = 50 * p + 200;
    for _ in 0..max_iter {
        let residual = &y - &x.dot(&beta);
        let c = x.t().dot(&residual);
        let cmax = max_abs(&c.view());

        if cmax <= corr_floor {
            push(&mut segments, &beta, &active, &signs, cmax, PathEvent::Terminal);
            return Ok(finish(mode, n, p, segments, d));
        }

        if active.len() < max_active {
            let entrant = (0..p).find(|&j| {
                !in_active[j] && just_dropped != Some(j) && c[j].abs() >= cmax * (1.0 - TIE_REL_TOL)
            });
            if let Some(j) = entrant {
                let cross: Vec<f64> =
                    active.iter().map(|&i| x.column(i).dot(&x.column(j))).collect();
                chol.push(&cross, x.column(j).dot(&x.column(j)), j)?;
                active.push(j);
                in_active[j] = true;
                signs.push(sign(c[j]));
                push(
                    &mut segments,
                    &beta,
                    &active,
                    &signs,
                    cmax,
                    PathEvent::VariableAdded(j),
                );
            }
        }

        // Equiangular direction: with q = G_A⁻¹ s, the coefficient move
        // d = q / sqrt(sᵀq) shrinks every active correlation at unit rate.
        let q = chol.solve(&signs);
        let sq: f64 = signs.iter().zip(&q).map(|(s, v)| s * v).sum();
        if sq <= 0.0 {
            return Err(Error::RankDeficient {
                column: *active.last().unwrap(),
            });
        }
        let aa = 1.0 / sq.sqrt();
        let dir: Vec<f64> = q.iter().map(|v| aa * v).collect();

        let mut u: Array1<f64> = Array1::zeros(n);
        for (k, &j) in active.iter().enumerate() {
            u.scaled_add(dir[k], &x.column(j));
        }
        let a = x.t().dot(&u);

        // Step to the point where active correlations reach zero, unless
        // an inactive variable ties first.
        let gamma_full = cmax / aa;
        let mut gamma = gamma_full;
        if active.len() < max_active {
            for j in 0..p {
                if in_active[j] {
                    continue;
                }
                // A just-dropped variable sits exactly at the tie, which
                // makes one of its two crossings spuriously zero; only
                // its genuine future crossing may bound the step.
                let min_t = if just_dropped == Some(j) {
                    1e-10 * gamma_full
                } else {
                    -1e-12 * gamma_full
                };
                for t in [
                    (cmax - c[j]) / (aa - a[j]),
                    (cmax + c[j]) / (aa + a[j]),
                ] {
                    if t.is_finite() && t > min_t && t < gamma {
                        gamma = t.max(0.0);
                    }
                }
            }
        }

        // Lasso modification: a coefficient reaching zero leaves the
        // active set before its sign can flip.
        let mut drop_at: Option<usize> = None;
        if lasso {
            for (k, &j) in active.iter().enumerate() {
                if beta[j] != 0.0 && dir[k] != 0.0 {
                    let t = -beta[j] / dir[k];
                    if t > 0.0 && t < gamma {
                        gamma = t;
                        drop_at = Some(k);
                    }
                }
            }
        }

        if gamma > 0.0 {
            for (k, &j) in active.iter().enumerate() {
                beta[j] += gamma * dir[k];
            }
            just_dropped = None;
        }

        if let Some(k) = drop_at {
            let j = active[k];
            beta[j] = 0.0;
            chol.remove(k);
            active.remove(k);
            signs.remove(k);
            in_active[j] = false;
            just_dropped = Some(j);
            let residual = &y - &x.dot(&beta);
            let cmax = max_abs(&x.t().dot(&residual).view());
            push(
                &mut segments,
                &beta,
                &active,
                &signs,
                cmax,
                PathEvent::VariableDropped(j),
            );
            continue;
        }

        if active.len() == max_active && gamma >= gamma_full * (1.0 - 1e-12) {
            // Capacity reached and the full step taken: active
            // correlations are exhausted even if inactive ones remain.
            let residual = &y - &x.dot(&beta);
            let cmax = max_abs(&x.t().dot(&residual).view());
            push(&mut segments, &beta, &active, &signs, cmax, PathEvent::Terminal);
            return Ok(finish(mode, n, p, segments, d));
        }
    }
    Err(Error::NonConvergence {
        what: "least angle path",
        limit: max_iter,
    })
}

fn stagewise_path(d: &Dataset, epsilon: f64, max_steps: usize) -> Result<SolutionPath> {
    let x = d.x();
    let y = d.y();
    let (n, p) = (d.n(), d.p());

    let c0 = x.t().dot(&y);
    let cmax0 = max_abs(&c0.view());
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "stagewise step must be positive and finite, got {epsilon}"
        )));
    }
    // A step larger than a tenth of the starting correlation overshoots
    // immediately and traces noise instead of a path.
    if epsilon > 0.1 * cmax0 {
        return Err(Error::InvalidArgument(format!(
            "stagewise step {epsilon} exceeds 0.1 * max correlation ({cmax0:.6e})"
        )));
    }
    let corr_floor = 1e-12 * cmax0.max(1.0);

    let mut beta: Array1<f64> = Array1::zeros(p);
    let mut nonzero = vec![false; p];
    let mut residual = y.to_owned();
    let mut c = c0;
    let mut segments: Vec<PathSegment> = Vec::new();

    let active_list = |nz: &[bool]| -> Vec<usize> {
        (0..p).filter(|&j| nz[j]).collect()
    };
    let signs_for = |list: &[usize], c: &Array1<f64>, beta: &Array1<f64>| -> Vec<f64> {
        list.iter()
            .map(|&j| {
                if c[j].abs() > corr_floor {
                    sign(c[j])
                } else {
                    sign(beta[j])
                }
            })
            .collect()
    };

    // The path has converged for this step size once the peak correlation
    // stops reaching new lows; from there it only oscillates.
    let stall_window = 4 * p + 200;
    let mut best_cmax = f64::INFINITY;
    let mut since_best = 0usize;

    let mut iter = 0usize;
    loop {
        let (jstar, cval) = c
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |(bj, bv), (j, &v)| {
                if v.abs() > bv.abs() {
                    (j, v)
                } else {
                    (bj, bv)
                }
            });
        let cmax = cval.abs();
        if cmax <= corr_floor || iter >= max_steps {
            break;
        }
        if cmax < best_cmax {
            best_cmax = cmax;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= stall_window {
                break;
            }
        }

        let s = sign(cval);
        if !nonzero[jstar] {
            // Record the entry before the move, with the entrant at zero,
            // mirroring how the least angle modes mark breakpoints.
            let mut list = active_list(&nonzero);
            list.push(jstar);
            list.sort_unstable();
            let sg = signs_for(&list, &c, &beta);
            let df = list.len() - 1;
            segments.push(PathSegment {
                step: iter,
                event: PathEvent::VariableAdded(jstar),
                beta: beta.clone(),
                active_set: list,
                signs: sg,
                max_correlation: cmax,
                df,
            });
        }

        let was_nonzero = nonzero[jstar];
        beta[jstar] += epsilon * s;
        if beta[jstar].abs() < epsilon * 1e-9 {
            beta[jstar] = 0.0;
        }
        residual.scaled_add(-epsilon * s, &x.column(jstar));
        iter += 1;
        if iter % 512 == 0 {
            residual = &y - &x.dot(&beta);
        }
        c = x.t().dot(&residual);

        if was_nonzero && beta[jstar] == 0.0 {
            nonzero[jstar] = false;
            let list = active_list(&nonzero);
            let sg = signs_for(&list, &c, &beta);
            let df = list.len();
            segments.push(PathSegment {
                step: iter,
                event: PathEvent::VariableDropped(jstar),
                beta: beta.clone(),
                active_set: list,
                signs: sg,
                max_correlation: max_abs(&c.view()),
                df,
            });
        } else if !was_nonzero {
            nonzero[jstar] = true;
        }
    }

    let list = active_list(&nonzero);
    let sg = signs_for(&list, &c, &beta);
    let df = list.len();
    segments.push(PathSegment {
        step: iter,
        event: PathEvent::Terminal,
        beta,
        active_set: list,
        signs: sg,
        max_correlation: max_abs(&c.view()),
        df,
    });
    Ok(SolutionPath {
        mode: PathMode::Stagewise {
            epsilon,
            max_steps,
        },
        n,
        p,
        segments,
        fingerprint: d.fingerprint(),
    })
}

fn finish(
    mode: PathMode,
    n: usize,
    p: usize,
    segments: Vec<PathSegment>,
    d: &Dataset,
) -> SolutionPath {
    SolutionPath {
        mode,
        n,
        p,
        segments,
        fingerprint: d.fingerprint(),
    }
}

/// Coefficients at the point where the path's L1 norm equals `t` times
/// the terminal L1 norm. Walks the piecewise-linear path, honoring kinks
/// where a coordinate crosses zero inside a segment, and returns the
/// first point achieving the target norm.
pub fn coefficients_at(path: &SolutionPath, t: f64) -> Result<Array1<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "shrinkage fraction must lie in [0, 1], got {t}"
        )));
    }
    let segs = &path.segments;
    let l1: Vec<f64> = path.l1_norms();
    let target = t * l1.last().unwrap();
    if segs.len() == 1 || target <= 0.0 {
        return Ok(segs[0].beta.clone());
    }
    for k in 0..segs.len() - 1 {
        let (a, b) = (l1[k], l1[k + 1]);
        if target >= a.min(b) && target <= a.max(b) {
            if (a - b).abs() == 0.0 {
                return Ok(segs[k].beta.clone());
            }
            return Ok(walk_segment(&segs[k].beta, &segs[k + 1].beta, target));
        }
    }
    Ok(segs.last().unwrap().beta.clone())
}

/// Interpolates within one linear segment to the requested L1 norm,
/// splitting at coordinate zero crossings where the norm's slope changes.
fn walk_segment(b0: &Array1<f64>, b1: &Array1<f64>, target: f64) -> Array1<f64> {
    let delta = b1 - b0;
    let mut knots: Vec<f64> = vec![0.0, 1.0];
    for j in 0..b0.len() {
        if delta[j] != 0.0 {
            let th = -b0[j] / delta[j];
            if th > 0.0 && th < 1.0 {
                knots.push(th);
            }
        }
    }
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let norm_at = |th: f64| -> f64 {
        b0.iter()
            .zip(delta.iter())
            .map(|(v, d)| (v + th * d).abs())
            .sum()
    };
    for w in knots.windows(2) {
        let (la, lb) = (norm_at(w[0]), norm_at(w[1]));
        if target >= la.min(lb) && target <= la.max(lb) {
            let th = if (lb - la).abs() == 0.0 {
                w[0]
            } else {
                w[0] + (target - la) / (lb - la) * (w[1] - w[0])
            };
            return b0 + &(delta.mapv(|d| d * th));
        }
    }
    b1.clone()
}

/// Coefficients at a given value of the penalty parameter, read off the
/// path by interpolating in the max correlation, which plays the role of
/// the lasso penalty along the path. Least angle and lasso modes only.
pub fn coefficients_at_penalty(path: &SolutionPath, lambda: f64) -> Result<Array1<f64>> {
    if matches!(path.mode, PathMode::Stagewise { .. }) {
        return Err(Error::InvalidArgument(
            "penalty indexing requires a least angle or lasso path".into(),
        ));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "penalty must be finite and nonnegative, got {lambda}"
        )));
    }
    let segs = &path.segments;
    if lambda >= segs[0].max_correlation {
        return Ok(segs[0].beta.clone());
    }
    for k in 0..segs.len() - 1 {
        let (ca, cb) = (segs[k].max_correlation, segs[k + 1].max_correlation);
        if lambda <= ca && lambda >= cb {
            let th = if (ca - cb).abs() == 0.0 {
                0.0
            } else {
                (ca - lambda) / (ca - cb)
            };
            return Ok(&segs[k].beta + &((&segs[k + 1].beta - &segs[k].beta).mapv(|d| d * th)));
        }
    }
    Ok(segs.last().unwrap().beta.clone())
}

/// Applies standardized-scale coefficients to raw inputs.
pub fn predict(
    x_raw: &ArrayView2<f64>,
    beta: &ArrayView1<f64>,
    transform: &Standardization,
) -> Result<Array1<f64>> {
    let p = beta.len();
    if x_raw.ncols() != p {
        return Err(Error::DimensionMismatch {
            what: "prediction columns",
            expected: p,
            got: x_raw.ncols(),
        });
    }
    if transform.column_means.len() != p {
        return Err(Error::DimensionMismatch {
            what: "standardization length",
            expected: p,
            got: transform.column_means.len(),
        });
    }
    let mut out = Array1::from_elem(x_raw.nrows(), transform.y_mean);
    for i in 0..x_raw.nrows() {
        for j in 0..p {
            out[i] += beta[j] * (x_raw[[i, j]] - transform.column_means[j])
                / transform.column_scales[j];
        }
    }
    Ok(out)
}
