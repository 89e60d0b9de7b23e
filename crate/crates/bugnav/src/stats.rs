//! Statistics for batch results: a pooled bootstrap test for differences
//! of means, ordinary least squares with R², and logistic regression fit
//! by iteratively reweighted least squares with McFadden's pseudo-R².
//!
//! Everything here is closed-form or seeded-iterative on small tables,
//! so results are deterministic given the inputs (and the RNG for the
//! bootstrap).

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("input lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("x is constant; the slope is undefined")]
    ConstantX,
    #[error("pooled sample has zero variance but the means differ")]
    DegeneratePool,
    #[error("outcomes are all the same class; nothing to separate")]
    OneClass,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Two-sided bootstrap test for a difference of means under the null
/// that both samples share one distribution: resample both groups from
/// the pooled data and count resampled differences at least as large as
/// the observed one. The returned p-value uses the (count+1)/(n+1)
/// convention so it is never exactly zero.
pub fn bootstrap_test<R: Rng>(
    a: &[f64],
    b: &[f64],
    n_resamples: usize,
    rng: &mut R,
) -> Result<f64, StatsError> {
    if a.len() < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: a.len() });
    }
    if b.len() < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: b.len() });
    }
    let observed = (mean(a) - mean(b)).abs();
    let pool: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    if pool.iter().all(|&v| v == pool[0]) {
        return if observed == 0.0 {
            Ok(1.0)
        } else {
            Err(StatsError::DegeneratePool)
        };
    }
    let resample_mean = |rng: &mut R, n: usize| -> f64 {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += pool[rng.gen_range(0..pool.len())];
        }
        sum / n as f64
    };
    let mut at_least = 0usize;
    for _ in 0..n_resamples {
        let d = (resample_mean(rng, a.len()) - resample_mean(rng, b.len())).abs();
        if d >= observed {
            at_least += 1;
        }
    }
    Ok((at_least + 1) as f64 / (n_resamples + 1) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of y on x. A constant y gives slope 0 and
/// R² = 0 (there is no variance to explain).
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<LinearFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples { need: 3, got: x.len() });
    }
    let xm = mean(x);
    let ym = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - xm;
        let dy = yi - ym;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ConstantX);
    }
    if syy == 0.0 {
        return Ok(LinearFit {
            slope: 0.0,
            intercept: ym,
            r_squared: 0.0,
        });
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let mut ss_res = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let e = yi - (intercept + slope * xi);
        ss_res += e * e;
    }
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: 1.0 - ss_res / syy,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct LogisticFit {
    pub coefficient: f64,
    pub intercept: f64,
    pub pseudo_r_squared: f64,
    /// Standard error of the coefficient from the Fisher information at
    /// the fitted point. Meaningless when `separated` is set.
    pub coef_se: f64,
    /// The classes are perfectly separable along x; the maximum
    /// likelihood estimate diverges and the reported coefficient is just
    /// where the iteration stopped.
    pub separated: bool,
    pub iterations: usize,
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

fn log_likelihood(x: &[f64], y: &[f64], b0: f64, b1: f64) -> f64 {
    let mut ll = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let mu = sigmoid(b0 + b1 * xi).clamp(1e-12, 1.0 - 1e-12);
        ll += yi * mu.ln() + (1.0 - yi) * (1.0 - mu).ln();
    }
    ll
}

/// Logistic regression of a binary outcome on one predictor, fit by
/// iteratively reweighted least squares. Stops when the log-likelihood
/// changes by less than 1e-8 or after 100 iterations.
pub fn logistic_regression(x: &[f64], success: &[bool]) -> Result<LogisticFit, StatsError> {
    if x.len() != success.len() {
        return Err(StatsError::LengthMismatch {
            a: x.len(),
            b: success.len(),
        });
    }
    if x.len() < 10 {
        return Err(StatsError::TooFewSamples { need: 10, got: x.len() });
    }
    let y: Vec<f64> = success.iter().map(|&s| if s { 1.0 } else { 0.0 }).collect();
    let p_hat = mean(&y);
    if p_hat == 0.0 || p_hat == 1.0 {
        return Err(StatsError::OneClass);
    }
    let n = x.len() as f64;
    let ll_null = n * (p_hat * p_hat.ln() + (1.0 - p_hat) * (1.0 - p_hat).ln());

    let mut b0 = (p_hat / (1.0 - p_hat)).ln();
    let mut b1 = 0.0;
    let mut ll = log_likelihood(x, &y, b0, b1);
    let mut iterations = 0;
    let mut separated = false;
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swxx = 0.0;
    for _ in 0..100 {
        iterations += 1;
        sw = 0.0;
        swx = 0.0;
        swxx = 0.0;
        let mut swz = 0.0;
        let mut swxz = 0.0;
        for (&xi, &yi) in x.iter().zip(&y) {
            let eta = b0 + b1 * xi;
            let mu = sigmoid(eta).clamp(1e-12, 1.0 - 1e-12);
            let w = mu * (1.0 - mu);
            let z = eta + (yi - mu) / w;
            sw += w;
            swx += w * xi;
            swxx += w * xi * xi;
            swz += w * z;
            swxz += w * xi * z;
        }
        let det = sw * swxx - swx * swx;
        if !det.is_finite() || det.abs() < 1e-300 {
            separated = true;
            break;
        }
        let nb0 = (swxx * swz - swx * swxz) / det;
        let nb1 = (sw * swxz - swx * swz) / det;
        if !nb0.is_finite() || !nb1.is_finite() {
            separated = true;
            break;
        }
        b0 = nb0;
        b1 = nb1;
        let next_ll = log_likelihood(x, &y, b0, b1);
        let delta = (next_ll - ll).abs();
        ll = next_ll;
        if delta < 1e-8 {
            break;
        }
    }
    // A (numerically) perfect fit means the classes were separable: the
    // true maximum does not exist and the coefficient runs away.
    if ll > -1e-3 || b1.abs() > 1e8 {
        separated = true;
    }
    let det = sw * swxx - swx * swx;
    let coef_se = if det > 0.0 { (sw / det).sqrt() } else { f64::NAN };
    Ok(LogisticFit {
        coefficient: b1,
        intercept: b0,
        pseudo_r_squared: 1.0 - ll / ll_null,
        coef_se,
        separated,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn identical_samples_do_not_reject() {
        let a = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = bootstrap_test(&a, &a.clone(), 10_000, &mut rng).unwrap();
        assert!(p > 0.9, "p = {p}");
    }

    #[test]
    fn disjoint_samples_reject_hard() {
        let a = vec![0.0; 50];
        let b = vec![1.0; 50];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = bootstrap_test(&a, &b, 10_000, &mut rng).unwrap();
        assert!(p < 0.001, "p = {p}");
    }

    #[test]
    fn constant_equal_pools_give_p_one() {
        let a = vec![3.0, 3.0, 3.0];
        let b = vec![3.0, 3.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(bootstrap_test(&a, &b, 100, &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn tiny_samples_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let err = bootstrap_test(&[1.0], &[1.0, 2.0], 10, &mut rng).unwrap_err();
        assert_eq!(err, StatsError::TooFewSamples { need: 2, got: 1 });
    }

    #[test]
    fn null_rejection_rate_is_calibrated() {
        // Both samples from the same normal: the test should reject at
        // roughly its nominal level.
        let mut rejections = 0;
        let trials = 300;
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + t);
            let normal = Normal::new(0.0, 1.0).unwrap();
            let a: Vec<f64> = (0..30).map(|_| normal.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..30).map(|_| normal.sample(&mut rng)).collect();
            let p = bootstrap_test(&a, &b, 999, &mut rng).unwrap();
            if p < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / trials as f64;
        assert!((0.01..=0.10).contains(&rate), "rate = {rate}");
    }

    #[test]
    fn exact_line_is_recovered_exactly() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = linear_regression(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_y_explains_nothing() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [5.0, 5.0, 5.0, 5.0];
        let fit = linear_regression(&x, &y).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.intercept, 5.0);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn constant_x_is_an_error() {
        let x = [2.0, 2.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        assert_eq!(linear_regression(&x, &y).unwrap_err(), StatsError::ConstantX);
    }

    #[test]
    fn ols_matches_raw_normal_equations() {
        // Independent check: solve the un-centered normal equations by
        // Cramer's rule and compare.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.3).unwrap();
        for _ in 0..100 {
            let n = rng.gen_range(3..40);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            if x.iter().all(|&v| v == x[0]) {
                continue;
            }
            let y: Vec<f64> = x
                .iter()
                .map(|&v| 1.7 * v - 0.4 + noise.sample(&mut rng))
                .collect();
            let fit = linear_regression(&x, &y).unwrap();

            let nf = n as f64;
            let sx: f64 = x.iter().sum();
            let sy: f64 = y.iter().sum();
            let sxx: f64 = x.iter().map(|v| v * v).sum();
            let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let det = nf * sxx - sx * sx;
            let intercept = (sxx * sy - sx * sxy) / det;
            let slope = (nf * sxy - sx * sy) / det;
            assert!((fit.slope - slope).abs() < 1e-10, "slope");
            assert!((fit.intercept - intercept).abs() < 1e-10, "intercept");
        }
    }

    #[test]
    fn unrelated_outcome_has_flat_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..400).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s: Vec<bool> = (0..400).map(|_| rng.gen_bool(0.5)).collect();
        let fit = logistic_regression(&x, &s).unwrap();
        assert!(!fit.separated);
        assert!(fit.coefficient.abs() < 1.0, "coef = {}", fit.coefficient);
        assert!(fit.pseudo_r_squared < 0.02, "r2 = {}", fit.pseudo_r_squared);
    }

    #[test]
    fn threshold_outcome_flags_separation() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let s: Vec<bool> = x.iter().map(|&v| v > 19.5).collect();
        let fit = logistic_regression(&x, &s).unwrap();
        assert!(fit.separated);
    }

    #[test]
    fn known_model_is_recovered_within_three_se() {
        let beta = -2.0;
        let intercept = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x: Vec<f64> = (0..1000).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s: Vec<bool> = x
            .iter()
            .map(|&v| rng.gen_bool(sigmoid(intercept + beta * v)))
            .collect();
        let fit = logistic_regression(&x, &s).unwrap();
        assert!(!fit.separated);
        assert!(
            (fit.coefficient - beta).abs() < 3.0 * fit.coef_se,
            "coef {} se {}",
            fit.coefficient,
            fit.coef_se
        );
    }

    #[test]
    fn one_class_outcomes_are_rejected() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let s = vec![true; 20];
        assert_eq!(logistic_regression(&x, &s).unwrap_err(), StatsError::OneClass);
    }

    #[test]
    fn short_logistic_inputs_are_rejected() {
        let x = [0.0, 1.0, 2.0];
        let s = [true, false, true];
        assert_eq!(
            logistic_regression(&x, &s).unwrap_err(),
            StatsError::TooFewSamples { need: 10, got: 3 }
        );
    }
}
