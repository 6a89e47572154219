//! Least-angle logistic regression with stagewise and Newton comparators.
//!
//! The path mirrors the squared-error least-angle construction with the score
//! x_jᵗ(y − p) playing the role of correlation: the covariate whose score
//! magnitude leads enters the active set, coefficients move along the weighted
//! equiangular direction (X_AᵗWX_A)⁻¹s_A with W = diag(p(1−p)), and each step
//! runs exactly to the point where the strongest outside score ties the common
//! active level. Run to completion on non-separable data, the path ends at the
//! logistic MLE.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde_json::json;

use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};
use crate::linalg::{solve_general, solve_spd};

/// Termination threshold per observation: a path is complete once every score
/// magnitude falls below `SCORE_TOL_PER_N * n`.
pub const SCORE_TOL_PER_N: f64 = 1e-8;

/// Fitted values beyond this magnitude pin probabilities to 0/1 at double
/// precision; reaching them while scores stay large is the separation
/// signature the path guards against.
const SATURATION_DEFAULT: f64 = 30.0;

#[derive(Clone, Debug)]
pub struct LalrConfig {
    /// Cap on recorded states before the path gives up unconverged.
    pub max_steps: usize,
    /// Separation guard: the path stops, marked non-convergent, once any
    /// |f_i| exceeds this bound while scores remain far from zero. Stated on
    /// the fitted-value scale so it is invariant to column scaling.
    pub saturation_bound: f64,
}

impl Default for LalrConfig {
    fn default() -> Self {
        LalrConfig {
            max_steps: 500,
            saturation_bound: SATURATION_DEFAULT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogisticPathEvent {
    /// Intercept-only starting state.
    Initial,
    /// Recorded after the step that brought the variable in.
    VariableAdded(usize),
    /// A stagewise coefficient returned exactly to zero.
    VariableDropped(usize),
    /// Periodic stagewise record between active-set changes.
    Checkpoint,
    /// Final state; `converged_to_mle` says whether scores vanished.
    Terminal,
}

#[derive(Clone, Debug)]
pub struct LogisticPathState {
    /// Event ordinal for the least-angle path; iteration index for stagewise.
    pub step: usize,
    pub event: LogisticPathEvent,
    pub intercept: f64,
    pub beta: Array1<f64>,
    /// Fitted values intercept + Xβ at this state.
    pub f: Array1<f64>,
    pub active_set: Vec<usize>,
    /// Entry score signs for the least-angle path; coefficient signs for
    /// stagewise.
    pub signs: Vec<f64>,
    pub log_lik: f64,
}

#[derive(Clone, Debug)]
pub struct LogisticPath {
    pub states: Vec<LogisticPathState>,
    pub converged_to_mle: bool,
    pub fingerprint: u64,
}

impl LogisticPath {
    pub fn terminal(&self) -> &LogisticPathState {
        self.states.last().expect("a path has at least one state")
    }

    /// Compact serialization: fitted values are recomputable from beta and the
    /// training data, so states carry coefficients, likelihood, and events.
    pub fn dump_json(&self) -> serde_json::Value {
        let states: Vec<_> = self
            .states
            .iter()
            .map(|s| {
                json!({
                    "step": s.step,
                    "event": event_json(&s.event),
                    "beta": s.beta.to_vec(),
                    "intercept": s.intercept,
                    "log_lik": s.log_lik,
                    "active": s.active_set,
                })
            })
            .collect();
        json!({ "states": states, "converged_to_mle": self.converged_to_mle })
    }
}

fn event_json(event: &LogisticPathEvent) -> serde_json::Value {
    match event {
        LogisticPathEvent::Initial => json!("initial"),
        LogisticPathEvent::VariableAdded(j) => json!({ "added": j }),
        LogisticPathEvent::VariableDropped(j) => json!({ "dropped": j }),
        LogisticPathEvent::Checkpoint => json!("checkpoint"),
        LogisticPathEvent::Terminal => json!("terminal"),
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log(1 + eᵗ) without overflow for any representable t.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn log_lik_from_f(y: &ArrayView1<f64>, f: &ArrayView1<f64>) -> f64 {
    y.iter()
        .zip(f.iter())
        .map(|(&yi, &fi)| yi * fi - softplus(fi))
        .sum()
}

fn check_response(x: &ArrayView2<f64>, y: &ArrayView1<f64>) -> Result<()> {
    if y.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: x.nrows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Bernoulli log-likelihood Σ yᵢfᵢ − log(1 + exp fᵢ) at f = intercept + Xβ.
pub fn log_likelihood(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    beta: &ArrayView1<f64>,
    intercept: f64,
) -> Result<f64> {
    check_response(x, y)?;
    if beta.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            what: "coefficient length",
            expected: x.ncols(),
            got: beta.len(),
        });
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::ResponseNotBinary);
    }
    let f = x.dot(beta) + intercept;
    Ok(log_lik_from_f(y, &f.view()))
}

/// The intercept-only maximizer log(ȳ/(1−ȳ)).
pub fn init_intercept(y: &ArrayView1<f64>) -> Result<f64> {
    let mean = y.mean().unwrap_or(f64::NAN);
    if !(mean > 0.0 && mean < 1.0) {
        return Err(Error::DegenerateResponse { mean });
    }
    Ok((mean / (1.0 - mean)).ln())
}

/// Score vector g with g_j = x_jᵗ(y − p(f)): the gradient of the
/// log-likelihood in β, and the directional derivative of adding x_j to f.
pub fn score(x: &ArrayView2<f64>, y: &ArrayView1<f64>, f: &ArrayView1<f64>) -> Result<Array1<f64>> {
    check_response(x, y)?;
    if f.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            what: "fitted values",
            expected: x.nrows(),
            got: f.len(),
        });
    }
    let mut r = Array1::zeros(y.len());
    for (i, ri) in r.iter_mut().enumerate() {
        *ri = y[i] - sigmoid(f[i]);
    }
    Ok(x.t().dot(&r))
}

/// Strongest score among covariates outside `excluded`, with its sign.
/// Exact ties go to the lower index; below `tol` the search reports None.
pub fn select_covariate(g: &ArrayView1<f64>, excluded: &[usize], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &gj) in g.iter().enumerate() {
        if excluded.contains(&j) {
            continue;
        }
        let magnitude = gj.abs();
        if best.map_or(true, |(_, b)| magnitude > b) {
            best = Some((j, magnitude));
        }
    }
    match best {
        Some((j, magnitude)) if magnitude >= tol => {
            Some((j, if g[j] >= 0.0 { 1.0 } else { -1.0 }))
        }
        _ => None,
    }
}

/// First-order step length at which the runner-up's score ties the leader's:
/// the ratio [(s*x_{j*} − s₂x_{j₂})ᵗ(y − p)] / [(s*x_{j*} − s₂x_{j₂})ᵗ(w∘x_{j*})]
/// with w = p(1−p). The update is β_{j*} += α̂, so α̂ carries the leader's sign.
pub fn linearized_step(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &ArrayView1<f64>,
    j_star: usize,
    s_star: f64,
    j_two: usize,
    s_two: f64,
) -> Result<f64> {
    check_response(x, y)?;
    if j_star == j_two {
        return Err(Error::InvalidArgument(
            "leader and runner-up must differ".into(),
        ));
    }
    let p = x.ncols();
    if j_star >= p || j_two >= p {
        return Err(Error::DimensionMismatch {
            what: "column index",
            expected: p,
            got: j_star.max(j_two),
        });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x.nrows() {
        let pi = sigmoid(f[i]);
        let vi = s_star * x[[i, j_star]] - s_two * x[[i, j_two]];
        num += vi * (y[i] - pi);
        den += vi * pi * (1.0 - pi) * x[[i, j_star]];
    }
    if num == 0.0 {
        return Ok(0.0);
    }
    if den.abs() <= 1e-12 * num.abs() {
        return Err(Error::StepDegenerate);
    }
    Ok(num / den)
}

/// Exact tie step: iterates the linearization with a bisection safeguard until
/// the runner-up's score magnitude matches the leader's to within 1e-10, never
/// stepping past the leader's one-dimensional likelihood optimum. Without a
/// competitor — or when none catches up — the step runs to that optimum.
/// The returned α updates β_{j*} directly, so its sign is the leader's.
pub fn refine_step(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &ArrayView1<f64>,
    j_star: usize,
    s_star: f64,
    competitor: Option<(usize, f64)>,
    alpha0: f64,
) -> Result<f64> {
    check_response(x, y)?;
    if j_star >= x.ncols() {
        return Err(Error::DimensionMismatch {
            what: "column index",
            expected: x.ncols(),
            got: j_star,
        });
    }
    let v = x.column(j_star).mapv(|t| t * s_star);
    let lead = [(j_star, s_star)];
    let seed = if alpha0.is_finite() { alpha0 * s_star } else { 0.0 };
    let (tau, _) = advance_to_tie(x, y, f, &v, &lead, competitor, seed)?;
    Ok(s_star * tau)
}

/// Directional likelihood optimum: the τ ≥ 0 zeroing φ(τ) = vᵗ(y − p(f + τv)),
/// found by Newton with a bisection bracket. φ decreases strictly, so the root
/// is unique when it exists; if φ stays positive up to `cap` (flat, saturated
/// likelihood — the separable case) the cap is returned.
fn directional_optimum(
    y: &ArrayView1<f64>,
    f: &ArrayView1<f64>,
    v: &Array1<f64>,
    cap: f64,
    tol: f64,
) -> f64 {
    let phi = |tau: f64| -> (f64, f64) {
        let mut val = 0.0;
        let mut slope = 0.0;
        for i in 0..y.len() {
            let pi = sigmoid(f[i] + tau * v[i]);
            val += v[i] * (y[i] - pi);
            slope -= v[i] * v[i] * pi * (1.0 - pi);
        }
        (val, slope)
    };
    let (phi0, slope0) = phi(0.0);
    if phi0 <= tol {
        return 0.0;
    }
    // Bracket the root by doubling past the first Newton guess.
    let mut lo = 0.0;
    let mut hi = (-phi0 / slope0).min(cap).max(1e-12);
    for _ in 0..200 {
        if phi(hi).0 <= 0.0 {
            break;
        }
        lo = hi;
        if hi >= cap {
            return cap;
        }
        hi = (hi * 2.0).min(cap);
    }
    if phi(hi).0 > 0.0 {
        return cap;
    }
    let mut tau = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (val, slope) = phi(tau);
        if val.abs() <= tol {
            return tau;
        }
        if val > 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let newton = tau - val / slope;
        tau = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            return tau;
        }
    }
    tau
}

/// Moves along the ascent direction v from f, returning the τ ≥ 0 where the
/// competitor's score ties the common level of the `lead` set (mean of
/// s_j·g_j), or the directional optimum if no tie occurs before it. Each
/// Newton iterate is exactly the relinearized step at the current point, with
/// bisection keeping the bracket honest. The flag says whether the returned
/// step ends at a competitor tie rather than at the optimum.
fn advance_to_tie(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &ArrayView1<f64>,
    v: &Array1<f64>,
    lead: &[(usize, f64)],
    competitor: Option<(usize, f64)>,
    seed: f64,
) -> Result<(f64, bool)> {
    let n = y.len();
    let vmax = v.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
    if vmax == 0.0 {
        return Err(Error::StepDegenerate);
    }
    // Beyond this every fitted value has shifted by up to 80: probabilities
    // are pinned and the likelihood is flat, so there is nothing to find.
    let cap = 80.0 / vmax;
    let phi_tol = 1e-12 * (n as f64).max(1.0);
    let Some((j_two, s_two)) = competitor else {
        return Ok((directional_optimum(y, f, v, cap, phi_tol), false));
    };
    let k = lead.len() as f64;
    // Common level, competitor score, and their τ-derivatives along the ray:
    // c(τ) = mean s_j g_j and g₂(τ), scores taken at f + τv.
    let parts = |tau: f64| -> (f64, f64, f64, f64) {
        let mut lead_val = 0.0;
        let mut lead_slope = 0.0;
        let mut comp_val = 0.0;
        let mut comp_slope = 0.0;
        for i in 0..n {
            let pi = sigmoid(f[i] + tau * v[i]);
            let ri = y[i] - pi;
            let wi = pi * (1.0 - pi) * v[i];
            for &(j, s) in lead {
                lead_val += s * x[[i, j]] * ri;
                lead_slope -= s * x[[i, j]] * wi;
            }
            comp_val += x[[i, j_two]] * ri;
            comp_slope -= x[[i, j_two]] * wi;
        }
        (lead_val / k, lead_slope / k, comp_val, comp_slope)
    };
    // Tie residual h(τ) = c(τ) − s₂ g₂(τ) and its derivative.
    let h = |tau: f64| -> (f64, f64) {
        let (c, dc, g2, dg2) = parts(tau);
        (c - s_two * g2, dc - s_two * dg2)
    };
    // A seed that already satisfies the tie is a fixed point of the
    // relinearization: return it untouched.
    let seed = if seed.is_finite() { seed.max(0.0) } else { 0.0 };
    if h(seed).0.abs() < 1e-10 {
        return Ok((seed, true));
    }
    if h(0.0).0 <= 0.0 {
        // The competitor already matches (or leads by rounding); no move.
        return Ok((0.0, true));
    }
    let tau_max = directional_optimum(y, f, v, cap, phi_tol);
    // The move may not run past the zero of the common level: beyond it the
    // active scores have flipped through the optimum and a "tie" there is the
    // mirrored, spurious branch. When the competitor and the level vanish
    // together, the level's zero is the honest stopping point.
    let c0 = parts(0.0).0;
    let cm = parts(tau_max).0;
    let tau_stop = if c0 > 0.0 && cm < 0.0 {
        let c_only = |tau: f64| -> (f64, f64) {
            let (c, dc, _, _) = parts(tau);
            (c, dc)
        };
        bracketed_root(&c_only, 0.0, tau_max, 0.0, "active-level vanishing point")?
    } else {
        tau_max
    };
    if h(tau_stop).0 >= 0.0 {
        // No tie before the optimum: step all the way to it.
        return Ok((tau_stop, false));
    }
    let tau = bracketed_root(&h, 0.0, tau_stop, seed.min(tau_stop), "tie-step refinement")?;
    Ok((tau, true))
}

/// Safeguarded Newton on a residual bracketed as r(lo) > 0 > r(hi): iterates
/// that leave the bracket fall back to bisection. Stops at |r| < 1e-10 or when
/// the bracket collapses to machine precision (r's floating-point noise floor
/// may sit above the nominal tolerance).
fn bracketed_root(
    r: &dyn Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    seed: f64,
    what: &'static str,
) -> Result<f64> {
    let mut tau = if seed > lo && seed < hi {
        seed
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..200 {
        let (val, slope) = r(tau);
        if val.abs() < 1e-10 {
            return Ok(tau);
        }
        if val > 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let newton = tau - val / slope;
        tau = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            return Ok(tau);
        }
    }
    Err(Error::NonConvergence { what, limit: 200 })
}

/// Newton polish of an exact breakpoint: intercept score zero, every active
/// score equal to a common level c, and the entering competitor's score equal
/// to s₂·c, with c itself an unknown of the square system. Seeded by the ray
/// landing, this converges in a couple of iterations. Returns the final level;
/// the caller decides whether the solved breakpoint is on the legitimate
/// (positive-level) branch.
#[allow(clippy::too_many_arguments)]
fn breakpoint_polish(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &mut Array1<f64>,
    intercept: &mut f64,
    beta: &mut Array1<f64>,
    active: &[usize],
    signs: &[f64],
    j_two: usize,
    s_two: f64,
) -> Result<f64> {
    let k = active.len();
    let n = y.len();
    let mut cols = active.to_vec();
    cols.push(j_two);
    let mut s_ext = vec![0.0; k + 2];
    for (a, &s) in signs.iter().enumerate() {
        s_ext[a + 1] = s;
    }
    s_ext[k + 1] = s_two;
    let g = score(x, y, &f.view())?;
    let mut level = active
        .iter()
        .zip(signs)
        .map(|(&j, &s)| s * g[j])
        .sum::<f64>()
        / k as f64;
    for _ in 0..40 {
        let mut w = vec![0.0; n];
        let mut resid: Array1<f64> = Array1::zeros(k + 2);
        for i in 0..n {
            let pi = sigmoid(f[i]);
            w[i] = pi * (1.0 - pi);
            resid[0] += y[i] - pi;
        }
        for (r, &j) in cols.iter().enumerate() {
            let mut gj = 0.0;
            for i in 0..n {
                gj += x[[i, j]] * (y[i] - sigmoid(f[i]));
            }
            resid[r + 1] = gj - level * s_ext[r + 1];
        }
        // Ties are checked relative to the level, so the residual target
        // shrinks with it, floored at the score's accumulation noise.
        let tol = (1e-10 * (1.0 + level.abs())).min((1e-8 * level.abs()).max(1e-13));
        if resid.iter().all(|v| v.abs() <= tol) {
            return Ok(level);
        }
        // Linearized conditions: [M[:, intercept+active] | s_ext]·(δθ, δc) = resid,
        // where M is the weighted Gram over [1, X_A, x_{j₂}].
        let m = weighted_gram(x, &cols, &w);
        let mut bordered = Array2::zeros((k + 2, k + 2));
        for r in 0..k + 2 {
            for q in 0..=k {
                bordered[[r, q]] = m[[r, q]];
            }
            bordered[[r, k + 1]] = s_ext[r];
        }
        let delta = solve_general(&bordered.view(), &resid.view())?;
        *intercept += delta[0];
        for (a, &j) in active.iter().enumerate() {
            beta[j] += delta[a + 1];
        }
        level += delta[k + 1];
        for i in 0..n {
            let mut shift = delta[0];
            for (a, &j) in active.iter().enumerate() {
                shift += delta[a + 1] * x[[i, j]];
            }
            f[i] += shift;
        }
        if f.iter().any(|t| !t.is_finite() || t.abs() > 300.0) {
            // The iteration ran into saturated territory; weights there carry
            // no information and the system below would be numerically void.
            return Err(Error::Separation);
        }
    }
    Err(Error::NonConvergence {
        what: "breakpoint polish",
        limit: 40,
    })
}

/// Newton steps on the intercept alone, keeping it optimal given β. The
/// one-dimensional problem is concave; near-stationary starts converge in a
/// couple of iterations.
fn intercept_polish(y: &ArrayView1<f64>, f: &mut Array1<f64>, intercept: &mut f64) {
    let tol = 1e-12 * y.len() as f64;
    for _ in 0..50 {
        let mut residual = 0.0;
        let mut curvature = 0.0;
        for i in 0..y.len() {
            let pi = sigmoid(f[i]);
            residual += y[i] - pi;
            curvature += pi * (1.0 - pi);
        }
        if residual.abs() <= tol || curvature <= 1e-300 {
            return;
        }
        let delta = (residual / curvature).clamp(-1.0, 1.0);
        *intercept += delta;
        f.mapv_inplace(|t| t + delta);
    }
}

/// (k+1)×(k+1) weighted Gram [1 X_cols]ᵗ diag(w) [1 X_cols].
fn weighted_gram(x: &ArrayView2<f64>, cols: &[usize], w: &[f64]) -> Array2<f64> {
    let k = cols.len();
    let mut m = Array2::zeros((k + 1, k + 1));
    for (i, &wi) in w.iter().enumerate() {
        m[[0, 0]] += wi;
        for (a, &ja) in cols.iter().enumerate() {
            let xa = x[[i, ja]] * wi;
            m[[0, a + 1]] += xa;
            for (b, &jb) in cols.iter().enumerate().skip(a) {
                m[[a + 1, b + 1]] += xa * x[[i, jb]];
            }
        }
    }
    for a in 0..=k {
        for b in 0..a {
            m[[a, b]] = m[[b, a]];
        }
    }
    m
}

/// Newton projection onto the manifold where every active score equals the
/// current common level and the intercept score is zero. The correction is
/// second-order in the preceding step length, so the likelihood gained along
/// the step dominates whatever this adjustment costs.
fn retie(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &mut Array1<f64>,
    intercept: &mut f64,
    beta: &mut Array1<f64>,
    active: &[usize],
    signs: &[f64],
) -> Result<()> {
    if active.is_empty() {
        return Ok(());
    }
    let k = active.len();
    let n = y.len();
    let level = {
        let g = score(x, y, &f.view())?;
        active
            .iter()
            .zip(signs)
            .map(|(&j, &s)| s * g[j])
            .sum::<f64>()
            / k as f64
    };
    // Matches the breakpoint target: tie precision scales with the level,
    // floored at the score's accumulation noise.
    let tol = (1e-9 * (1.0 + level.abs())).min((1e-8 * level.abs()).max(1e-13));
    for _ in 0..40 {
        let mut w = vec![0.0; n];
        let mut resid = Array1::zeros(k + 1);
        for i in 0..n {
            let pi = sigmoid(f[i]);
            w[i] = pi * (1.0 - pi);
            resid[0] += y[i] - pi;
        }
        for (a, (&j, &s)) in active.iter().zip(signs).enumerate() {
            let mut gj = 0.0;
            for i in 0..n {
                gj += x[[i, j]] * (y[i] - sigmoid(f[i]));
            }
            resid[a + 1] = gj - level * s;
        }
        if resid.iter().all(|r| r.abs() <= tol) {
            break;
        }
        let m = weighted_gram(x, active, &w);
        let delta = solve_spd(&m.view(), &resid.view())?;
        *intercept += delta[0];
        for (a, &j) in active.iter().enumerate() {
            beta[j] += delta[a + 1];
        }
        for i in 0..n {
            let mut shift = delta[0];
            for (a, &j) in active.iter().enumerate() {
                shift += delta[a + 1] * x[[i, j]];
            }
            f[i] += shift;
        }
        if f.iter().any(|t| !t.is_finite() || t.abs() > 300.0) {
            // The iteration ran into saturated territory; weights there carry
            // no information and the system below would be numerically void.
            return Err(Error::Separation);
        }
    }
    Ok(())
}

fn best_inactive(g: &Array1<f64>, active: &[usize]) -> Option<(usize, f64, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, &gj) in g.iter().enumerate() {
        if active.contains(&j) {
            continue;
        }
        let magnitude = gj.abs();
        if best.map_or(true, |(_, _, b)| magnitude > b) {
            best = Some((j, if gj >= 0.0 { 1.0 } else { -1.0 }, magnitude));
        }
    }
    best
}

/// One least-angle move: from the current tied state, advance along the
/// weighted equiangular direction until the strongest outside score catches
/// the active level, then pin that breakpoint exactly. With no competitor the
/// segment has nothing to stop it: it ends at the active-set optimum. If a
/// third variable crosses the tie mid-move, the move is redone from the same
/// start against that earlier-binding competitor (its tie point is strictly
/// shorter, so the rounds terminate). On a separation signal the entry state
/// is restored so the caller keeps the last honest breakpoint.
#[allow(clippy::too_many_arguments)]
fn take_tie_step(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &mut Array1<f64>,
    intercept: &mut f64,
    beta: &mut Array1<f64>,
    active: &[usize],
    signs: &[f64],
    tol: f64,
) -> Result<()> {
    let snap_f = f.clone();
    let snap_intercept = *intercept;
    let snap_beta: Vec<f64> = active.iter().map(|&j| beta[j]).collect();
    let out = tie_step_rounds(x, y, f, intercept, beta, active, signs, tol);
    if matches!(out, Err(Error::Separation)) {
        f.assign(&snap_f);
        *intercept = snap_intercept;
        for (a, &j) in active.iter().enumerate() {
            beta[j] = snap_beta[a];
        }
    }
    out
}

/// Fitted values may shift by at most this much per frozen-weight ray; longer
/// segments are walked in sub-steps with the direction re-derived at each
/// landing, so a genuine tie always eventually falls inside a trusted ray.
const TRUST_SHIFT: f64 = 2.0;

/// Advance one segment against a fixed competitor: walk along re-derived
/// equiangular rays until the competitor's tie lands inside the trust radius,
/// then pin that breakpoint exactly. Ends early at the active-set optimum when
/// the common level vanishes before any tie.
#[allow(clippy::too_many_arguments)]
fn walk_to_tie(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &mut Array1<f64>,
    intercept: &mut f64,
    beta: &mut Array1<f64>,
    active: &[usize],
    signs: &[f64],
    jc: usize,
    sc: f64,
    c_start: f64,
    tol: f64,
) -> Result<()> {
    let k = active.len();
    let n = y.len();
    let lead: Vec<(usize, f64)> = active.iter().copied().zip(signs.iter().copied()).collect();
    let s_vec = Array1::from(signs.to_vec());
    for _ in 0..200 {
        // Equiangular direction for the weights at the current point.
        let mut w = vec![0.0; n];
        for (i, wi) in w.iter_mut().enumerate() {
            let pi = sigmoid(f[i]);
            *wi = pi * (1.0 - pi);
        }
        let gram = {
            let mut m = Array2::zeros((k, k));
            for i in 0..n {
                for (a, &ja) in active.iter().enumerate() {
                    let xa = x[[i, ja]] * w[i];
                    for (b, &jb) in active.iter().enumerate().skip(a) {
                        m[[a, b]] += xa * x[[i, jb]];
                    }
                }
            }
            for a in 0..k {
                for b in 0..a {
                    m[[a, b]] = m[[b, a]];
                }
            }
            m
        };
        let dir = match solve_spd(&gram.view(), &s_vec.view()) {
            Ok(d) => d,
            // A weighted Gram that loses rank under saturated weights is the
            // walk running off toward separation, not a collinear design.
            Err(Error::RankDeficient { .. }) if f.iter().any(|t| t.abs() > 12.0) => {
                return Err(Error::Separation)
            }
            Err(e) => return Err(e),
        };
        let mut u = Array1::zeros(n);
        for i in 0..n {
            let mut ui = 0.0;
            for (a, &j) in active.iter().enumerate() {
                ui += dir[a] * x[[i, j]];
            }
            u[i] = ui;
        }
        // A competitor can tie on either side: its score may shrink toward
        // the falling common level, or cross zero and catch it from below
        // with the opposite sign. Both branches are solved and the earlier
        // tie binds.
        let (tp, tiedp) = advance_to_tie(x, y, &f.view(), &u, &lead, Some((jc, sc)), 0.0)?;
        let (tm, tiedm) = advance_to_tie(x, y, &f.view(), &u, &lead, Some((jc, -sc)), 0.0)?;
        let (tau, s_land, tied) = match (tiedp, tiedm) {
            (true, true) if tm < tp => (tm, -sc, true),
            (true, _) => (tp, sc, true),
            (false, true) => (tm, -sc, true),
            (false, false) => (tp, sc, false),
        };
        let vmax = u.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
        let tau_trust = TRUST_SHIFT / vmax;
        if tied && tau <= tau_trust {
            for i in 0..n {
                f[i] += tau * u[i];
            }
            for (a, &j) in active.iter().enumerate() {
                beta[j] += tau * dir[a];
            }
            // Pin the breakpoint exactly so the entering score sits on the
            // common level, not merely near the frozen-ray estimate of it.
            // The ray can misjudge which side the competitor catches the
            // level from when both are near zero, so a polish landing on the
            // mirrored negative-level branch is rejected and the opposite
            // competitor sign tried instead. The accepted level must also sit
            // below the level the segment started from: no new breakpoint
            // lies above the previous one.
            for s_try in [s_land, -s_land] {
                let mut try_f = f.clone();
                let mut try_intercept = *intercept;
                let mut try_beta = beta.clone();
                if let Ok(level) = breakpoint_polish(
                    x,
                    y,
                    &mut try_f,
                    &mut try_intercept,
                    &mut try_beta,
                    active,
                    signs,
                    jc,
                    s_try,
                ) {
                    if level > 0.0 && level <= c_start * (1.0 + 1e-6) {
                        f.assign(&try_f);
                        *intercept = try_intercept;
                        beta.assign(&try_beta);
                        return Ok(());
                    }
                }
            }
            intercept_polish(y, f, intercept);
            retie(x, y, f, intercept, beta, active, signs)?;
            return Ok(());
        }
        // No trustworthy tie yet: advance by the trusted amount, restore the
        // tie structure there, and re-derive the ray.
        let step_tau = tau.min(tau_trust);
        if step_tau <= 1e-14 {
            return Ok(());
        }
        for i in 0..n {
            f[i] += step_tau * u[i];
        }
        for (a, &j) in active.iter().enumerate() {
            beta[j] += step_tau * dir[a];
        }
        intercept_polish(y, f, intercept);
        retie(x, y, f, intercept, beta, active, signs)?;
        let g = score(x, y, &f.view())?;
        let common = active
            .iter()
            .zip(signs)
            .map(|(&j, &s)| s * g[j])
            .sum::<f64>()
            / k as f64;
        if common < tol {
            // The level ran out before the competitor caught it: the segment
            // ends at the active-set optimum.
            return Ok(());
        }
    }
    Err(Error::NonConvergence {
        what: "tie walk",
        limit: 200,
    })
}

#[allow(clippy::too_many_arguments)]
fn tie_step_rounds(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    f: &mut Array1<f64>,
    intercept: &mut f64,
    beta: &mut Array1<f64>,
    active: &[usize],
    signs: &[f64],
    tol: f64,
) -> Result<()> {
    let k = active.len();
    let snap_f = f.clone();
    let snap_intercept = *intercept;
    let snap_beta: Vec<f64> = active.iter().map(|&j| beta[j]).collect();
    let g0 = score(x, y, &f.view())?;
    // Common level at the move's start; no legitimate new breakpoint can sit
    // above it.
    let c_start = active
        .iter()
        .zip(signs)
        .map(|(&j, &s)| s * g0[j])
        .sum::<f64>()
        / k as f64;
    let mut competitor = best_inactive(&g0, active).filter(|&(_, _, m)| m >= tol);
    for _ in 0..40 {
        f.assign(&snap_f);
        *intercept = snap_intercept;
        for (a, &j) in active.iter().enumerate() {
            beta[j] = snap_beta[a];
        }
        if let Some((jc, sc, _)) = competitor {
            walk_to_tie(
                x, y, f, intercept, beta, active, signs, jc, sc, c_start, tol,
            )?;
        } else {
            // Nothing can catch up: the segment runs to the active-set
            // optimum. Damped Newton is far sturdier here than following the
            // frozen-weight ray, whose optimum can sit deep in saturated
            // territory.
            newton_logistic(x, y, active, f, intercept, beta, 1e-10, 200)?;
        }
        let g = score(x, y, &f.view())?;
        let common = active
            .iter()
            .zip(signs)
            .map(|(&j, &s)| s * g[j])
            .sum::<f64>()
            / k as f64;
        match best_inactive(&g, active) {
            // A different variable crossed the tie during the move: it binds
            // earlier, so redo the move against it.
            Some((jv, sv, magnitude)) if magnitude > common + 5e-7 => {
                if competitor.map_or(false, |(jc, _, _)| jc == jv) {
                    // A successful polish leaves the competitor exactly on
                    // the level, so the competitor showing up as the violator
                    // means its tie could not be pinned; redoing the move
                    // would reproduce this landing.
                    return Err(Error::NonConvergence {
                        what: "tie step",
                        limit: 40,
                    });
                }
                competitor = Some((jv, sv, magnitude));
            }
            _ => return Ok(()),
        }
    }
    Err(Error::NonConvergence {
        what: "tie step",
        limit: 40,
    })
}

/// Damped Newton on (intercept, β over `cols`), run until the restricted
/// gradient's ∞-norm falls below `tol`. Detects separation by saturated
/// weights or runaway coefficients.
fn newton_logistic(
    x: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    cols: &[usize],
    f: &mut Array1<f64>,
    intercept: &mut f64,
    beta: &mut Array1<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<()> {
    let n = y.len();
    let k = cols.len();
    for _ in 0..max_iter {
        let mut w = vec![0.0; n];
        let mut grad: Array1<f64> = Array1::zeros(k + 1);
        let mut wmax = 0.0f64;
        for i in 0..n {
            let pi = sigmoid(f[i]);
            w[i] = pi * (1.0 - pi);
            wmax = wmax.max(w[i]);
            let ri = y[i] - pi;
            grad[0] += ri;
            for (a, &j) in cols.iter().enumerate() {
                grad[a + 1] += x[[i, j]] * ri;
            }
        }
        if grad.iter().all(|g| g.abs() <= tol) {
            return Ok(());
        }
        let fmax = f.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
        let bmax = cols.iter().fold(0.0f64, |m, &j| m.max(beta[j].abs()));
        if wmax < 1e-12 || fmax > 300.0 || bmax > 1e6 {
            return Err(Error::Separation);
        }
        let h = weighted_gram(x, cols, &w);
        let delta = solve_spd(&h.view(), &grad.view())?;
        let lik = log_lik_from_f(y, &f.view());
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = f.clone();
            for i in 0..n {
                let mut shift = scale * delta[0];
                for (a, &j) in cols.iter().enumerate() {
                    shift += scale * delta[a + 1] * x[[i, j]];
                }
                trial[i] += shift;
            }
            if log_lik_from_f(y, &trial.view()) >= lik - 1e-12 * (1.0 + lik.abs()) {
                *f = trial;
                *intercept += scale * delta[0];
                for (a, &j) in cols.iter().enumerate() {
                    beta[j] += scale * delta[a + 1];
                }
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                what: "logistic newton step",
                limit: 60,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "logistic newton",
        limit: max_iter,
    })
}

fn push_state(
    states: &mut Vec<LogisticPathState>,
    event: LogisticPathEvent,
    step: usize,
    intercept: f64,
    beta: &Array1<f64>,
    f: &Array1<f64>,
    active: &[usize],
    signs: &[f64],
    y: &ArrayView1<f64>,
) {
    states.push(LogisticPathState {
        step,
        event,
        intercept,
        beta: beta.clone(),
        f: f.clone(),
        active_set: active.to_vec(),
        signs: signs.to_vec(),
        log_lik: log_lik_from_f(y, &f.view()),
    });
}

/// Full least-angle logistic path: covariates enter one at a time at score
/// ties, coefficients advance along weighted equiangular directions, and the
/// path ends at the MLE (all scores below tolerance), at the configured state
/// cap, or at the separation guard — the latter two marked non-convergent.
pub fn lalr_path(d: &BinaryDataset, config: &LalrConfig) -> Result<LogisticPath> {
    if !d.is_standardized() {
        return Err(Error::NotStandardized);
    }
    let x = d.x();
    let y = d.y();
    let n = d.n();
    let p = d.p();
    let tol = SCORE_TOL_PER_N * n as f64;
    let mut intercept = init_intercept(&y)?;
    let mut beta = Array1::zeros(p);
    let mut f = Array1::from_elem(n, intercept);
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut states = Vec::new();
    push_state(
        &mut states,
        LogisticPathEvent::Initial,
        0,
        intercept,
        &beta,
        &f,
        &active,
        &signs,
        &y,
    );
    let mut converged = false;
    loop {
        let g = score(&x, &y, &f.view())?;
        let gmax = g.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
        if gmax < tol {
            converged = true;
            break;
        }
        let fmax = f.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
        if fmax > config.saturation_bound && gmax > 100.0 * tol {
            break;
        }
        if states.len() > config.max_steps {
            break;
        }
        match select_covariate(&g.view(), &active, tol) {
            None => {
                // Nothing left worth adding: finish the active fit jointly.
                match newton_logistic(
                    &x, &y, &active, &mut f, &mut intercept, &mut beta, 1e-10, 200,
                ) {
                    Ok(()) => {}
                    Err(Error::Separation) => break,
                    Err(e) => return Err(e),
                }
            }
            Some((j, s)) => {
                active.push(j);
                signs.push(s);
                match take_tie_step(
                    &x,
                    &y,
                    &mut f,
                    &mut intercept,
                    &mut beta,
                    &active,
                    &signs,
                    tol,
                ) {
                    Ok(()) => {}
                    Err(Error::Separation) => {
                        // The segment ran into saturation; keep the last
                        // honest breakpoint and stop unconverged.
                        active.pop();
                        signs.pop();
                        break;
                    }
                    Err(e) => return Err(e),
                }
                let step = states.len();
                push_state(
                    &mut states,
                    LogisticPathEvent::VariableAdded(j),
                    step,
                    intercept,
                    &beta,
                    &f,
                    &active,
                    &signs,
                    &y,
                );
            }
        }
    }
    let step = states.len();
    push_state(
        &mut states,
        LogisticPathEvent::Terminal,
        step,
        intercept,
        &beta,
        &f,
        &active,
        &signs,
        &y,
    );
    Ok(LogisticPath {
        states,
        converged_to_mle: converged,
        fingerprint: d.fingerprint(),
    })
}

/// Incremental comparator: every iteration moves the strongest-score
/// coefficient by ±ε and re-optimizes the intercept. States are recorded when
/// the active set changes and every `record_every` iterations (0 disables the
/// periodic records). Stops at score tolerance, at `max_iters`, or when the
/// best score magnitude has not improved for a long stretch — the ±ε orbit
/// around the optimum.
pub fn stagewise_logistic(
    d: &BinaryDataset,
    epsilon: f64,
    max_iters: usize,
    record_every: usize,
) -> Result<LogisticPath> {
    if !d.is_standardized() {
        return Err(Error::NotStandardized);
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive and finite, got {epsilon}"
        )));
    }
    let x = d.x();
    let y = d.y();
    let n = d.n();
    let p = d.p();
    let tol = SCORE_TOL_PER_N * n as f64;
    let mut intercept = init_intercept(&y)?;
    let mut beta: Array1<f64> = Array1::zeros(p);
    let mut f = Array1::from_elem(n, intercept);
    let mut states = Vec::new();
    let snapshot_active = |beta: &Array1<f64>| -> (Vec<usize>, Vec<f64>) {
        let mut idx = Vec::new();
        let mut sgn = Vec::new();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                idx.push(j);
                sgn.push(if b > 0.0 { 1.0 } else { -1.0 });
            }
        }
        (idx, sgn)
    };
    push_state(
        &mut states,
        LogisticPathEvent::Initial,
        0,
        intercept,
        &beta,
        &f,
        &[],
        &[],
        &y,
    );
    let stall_window = 4 * p + 200;
    let mut best_gmax = f64::INFINITY;
    let mut best_iter = 0usize;
    // Closest approach to stationarity. Once the step size stops paying for
    // itself the iterates dither around the optimum at amplitude ~epsilon;
    // the smallest-score state visited beats whichever iterate the stall
    // exit happens to land on.
    let mut best_state = (intercept, beta.clone(), f.clone());
    // Tail averaging: after the stall fires, one more window of updates is
    // averaged. The dithering orbit encircles the optimum, so its time
    // average cancels the O(epsilon) oscillation in every coordinate at
    // once — something no single iterate achieves. The orbit is only
    // quasi-periodic; a window several times the stall span is needed for
    // the residual to drop well below the step size.
    let avg_window = 8 * stall_window;
    let mut tail: Option<(usize, f64, Array1<f64>)> = None;
    let mut stalled = false;
    let mut steps_done = 0usize;
    for iter in 1..=max_iters {
        let g = score(&x, &y, &f.view())?;
        let mut j_star = 0;
        let mut gmax = 0.0;
        for (j, &gj) in g.iter().enumerate() {
            if gj.abs() > gmax {
                gmax = gj.abs();
                j_star = j;
            }
        }
        if gmax < tol {
            stalled = false;
            break;
        }
        if gmax < best_gmax {
            best_gmax = gmax;
            best_iter = iter;
            best_state = (intercept, beta.clone(), f.clone());
        }
        match &tail {
            Some((0, _, _)) => break,
            Some(_) => {}
            None if iter - best_iter > stall_window => {
                stalled = true;
                tail = Some((avg_window, 0.0, Array1::zeros(p)));
            }
            None => {}
        }
        let sign = if g[j_star] >= 0.0 { 1.0 } else { -1.0 };
        let was_zero = beta[j_star] == 0.0;
        beta[j_star] += epsilon * sign;
        // ±ε increments cancel exactly up to accumulated rounding; snap it.
        if beta[j_star].abs() < epsilon * 1e-9 {
            beta[j_star] = 0.0;
        }
        for i in 0..n {
            f[i] += epsilon * sign * x[[i, j_star]];
        }
        intercept_polish(&y, &mut f, &mut intercept);
        let now_zero = beta[j_star] == 0.0;
        let event = if was_zero && !now_zero {
            Some(LogisticPathEvent::VariableAdded(j_star))
        } else if !was_zero && now_zero {
            Some(LogisticPathEvent::VariableDropped(j_star))
        } else if record_every > 0 && iter % record_every == 0 {
            Some(LogisticPathEvent::Checkpoint)
        } else {
            None
        };
        if let Some(event) = event {
            let (idx, sgn) = snapshot_active(&beta);
            push_state(
                &mut states, event, iter, intercept, &beta, &f, &idx, &sgn, &y,
            );
        }
        if let Some((left, sum_int, sum_beta)) = &mut tail {
            *left -= 1;
            *sum_int += intercept;
            *sum_beta += &beta;
        }
        steps_done = iter;
    }
    if stalled {
        let (left, sum_int, sum_beta) = tail.expect("stall implies an averaging tail");
        // The iteration cap can cut the window short; average what ran.
        let w = (avg_window - left) as f64;
        let avg_int = sum_int / w;
        let avg_beta = sum_beta / w;
        let avg_f = x.dot(&avg_beta) + avg_int;
        let g_avg = score(&x, &y, &avg_f.view())?;
        let gmax_avg = g_avg.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
        if gmax_avg < best_gmax {
            (intercept, beta, f) = (avg_int, avg_beta, avg_f);
        } else {
            // Averaging lost to the closest single approach; recorded states
            // past it are dithering noise. Its snapshot was taken entering
            // iteration best_iter, i.e. after best_iter - 1 updates.
            (intercept, beta, f) = best_state;
            steps_done = best_iter.saturating_sub(1);
            states.retain(|s| s.step <= steps_done);
        }
    }
    let g = score(&x, &y, &f.view())?;
    let converged = g.iter().all(|t| t.abs() < tol);
    let (idx, sgn) = snapshot_active(&beta);
    push_state(
        &mut states,
        LogisticPathEvent::Terminal,
        steps_done,
        intercept,
        &beta,
        &f,
        &idx,
        &sgn,
        &y,
    );
    Ok(LogisticPath {
        states,
        converged_to_mle: converged,
        fingerprint: d.fingerprint(),
    })
}

/// Newton–Raphson logistic MLE with step halving. Requires non-separable
/// data; the returned gradient ∞-norm (intercept included) is below 1e-10.
pub fn mle_logistic(d: &BinaryDataset) -> Result<(Array1<f64>, f64)> {
    let x = d.x();
    let y = d.y();
    let mut intercept = init_intercept(&y)?;
    let mut beta = Array1::zeros(d.p());
    let mut f = Array1::from_elem(d.n(), intercept);
    let cols: Vec<usize> = (0..d.p()).collect();
    newton_logistic(&x, &y, &cols, &mut f, &mut intercept, &mut beta, 1e-10, 200)?;
    Ok((beta, intercept))
}
