//! Shared oracles for the integration suites: slow, independent
//! implementations used to pin down expected values. Nothing here calls
//! the code paths under test.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Coordinate descent for `min 0.5‖y − Xβ‖² + λ‖β‖₁`, written for unit
/// Euclidean norm columns. Plain soft thresholding sweeps, run to a very
/// tight fixed point so it can serve as a reference.
pub fn cd_lasso(x: &Array2<f64>, y: &Array1<f64>, lambda: f64) -> Array1<f64> {
    let (_, p) = x.dim();
    let mut beta = Array1::<f64>::zeros(p);
    let mut residual = y.clone();
    for _ in 0..200_000 {
        let mut max_delta = 0.0f64;
        for j in 0..p {
            let old = beta[j];
            let rho = x.column(j).dot(&residual) + old;
            let new = rho.signum() * (rho.abs() - lambda).max(0.0);
            if new != old {
                residual.scaled_add(old - new, &x.column(j));
                beta[j] = new;
                max_delta = max_delta.max((new - old).abs());
            }
        }
        if max_delta < 1e-14 {
            break;
        }
    }
    beta
}

/// Standard normal matrix with the given shape.
pub fn randn_matrix(rng: &mut ChaCha12Rng, n: usize, p: usize) -> Array2<f64> {
    let mut x = Array2::zeros((n, p));
    for v in x.iter_mut() {
        *v = rng.sample::<f64, _>(StandardNormal);
    }
    x
}

pub fn randn_vector(rng: &mut ChaCha12Rng, n: usize) -> Array1<f64> {
    Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// A small random regression instance with correlated columns and sparse
/// truth, the shape used across the linear-path suites.
pub fn random_regression(seed: u64, n: usize, p: usize) -> (Array2<f64>, Array1<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut x = randn_matrix(&mut rng, n, p);
    for j in 1..p {
        let prev = x.column(j - 1).to_owned();
        let mut col = x.column_mut(j);
        col.zip_mut_with(&prev, |a, &b| *a = 0.7 * *a + 0.3 * b);
    }
    let mut beta = Array1::zeros(p);
    for j in 0..p.min(3) {
        beta[j] = if j % 2 == 0 { 2.0 } else { -1.5 };
    }
    let noise = randn_vector(&mut rng, n);
    let y = x.dot(&beta) + 0.5 * &noise;
    (x, y)
}

/// Random binary classification instance: standard normal covariates,
/// known coefficients, Bernoulli draws. Retries until both classes are
/// present.
pub fn random_logistic(seed: u64, n: usize, p: usize, scale: f64) -> (Array2<f64>, Array1<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    loop {
        let x = randn_matrix(&mut rng, n, p);
        let beta = randn_vector(&mut rng, p) * scale;
        let lin = x.dot(&beta);
        let mut y = Array1::zeros(n);
        for i in 0..n {
            let pr = 1.0 / (1.0 + (-lin[i]).exp());
            let u: f64 = rng.random();
            y[i] = f64::from(u < pr);
        }
        let mean = y.mean().unwrap();
        if mean > 0.0 && mean < 1.0 {
            return (x, y);
        }
    }
}

/// Bisection to |f| tolerance `tol` on a bracketing interval.
/// Panics if the interval does not bracket a sign change.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo == 0.0 || fhi == 0.0 || (flo > 0.0) != (fhi > 0.0),
        "bisection interval does not bracket a root"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < tol || (hi - lo).abs() < 1e-300 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
