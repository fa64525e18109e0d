//! Regression helpers used to read rates and line shapes out of simulated
//! series: log-linear decay-rate extraction, a three-parameter Lorentzian
//! least-squares fit, Pearson correlation, linear interpolation.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Least-squares slope of -ln P_e versus t over the samples inside
/// `window = [t_lo, t_hi]`. For exponential decay this is the decay rate.
///
/// All populations inside the window must be strictly positive and the
/// window must select at least two distinct times.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, p) in series {
        if t < lo || t > hi {
            continue;
        }
        if p.is_nan() || p <= 0.0 {
            return Err(Error::NonPositivePopulation { time: t, value: p });
        }
        xs.push(t);
        ys.push(-p.ln());
    }
    if xs.len() < 2 || xs.iter().all(|&t| t == xs[0]) {
        return Err(Error::DegenerateWindow { lo, hi });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    Ok(sxy / sxx)
}

/// A Lorentzian line in the peak-amplitude parametrization
/// `f(x) = amplitude / (1 + ((x - center) / (fwhm/2))^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub center: f64,
    /// Full width at half maximum.
    pub fwhm: f64,
    pub amplitude: f64,
}

impl Lorentzian {
    pub fn evaluate(&self, x: f64) -> f64 {
        let u = (x - self.center) / (0.5 * self.fwhm);
        self.amplitude / (1.0 + u * u)
    }
}

const LM_MAX_ITERATIONS: usize = 200;

/// Levenberg-Marquardt least squares over {center, width, amplitude}, with
/// the center seeded at `center_seed` and the width and amplitude seeded
/// from the data.
pub fn fit_lorentzian(xs: &[f64], ys: &[f64], center_seed: f64) -> Result<Lorentzian> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateData("lorentzian fit needs >= 3 samples"));
    }
    let peak = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::DegenerateData(
            "lorentzian fit needs a positive peak",
        ));
    }

    let mut center = center_seed;
    let mut hwhm = seed_half_width(xs, ys, peak);
    let mut amplitude = peak;

    let cost = |center: f64, hwhm: f64, amplitude: f64| -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let u = (x - center) / hwhm;
                let r = amplitude / (1.0 + u * u) - y;
                r * r
            })
            .sum()
    };

    let mut lambda = 1e-3;
    let mut current = cost(center, hwhm, amplitude);
    for iteration in 0..LM_MAX_ITERATIONS {
        // Accumulate J^T J and J^T r for the three parameters.
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (&x, &y) in xs.iter().zip(ys) {
            let u = (x - center) / hwhm;
            let denom = 1.0 + u * u;
            let model = amplitude / denom;
            let r = model - y;
            let d_center = 2.0 * amplitude * u / (hwhm * denom * denom);
            let d_hwhm = 2.0 * amplitude * u * u / (hwhm * denom * denom);
            let d_amp = 1.0 / denom;
            let grad = Vector3::new(d_center, d_hwhm, d_amp);
            jtj += grad * grad.transpose();
            jtr += grad * r;
        }
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            continue;
        };
        let trial_center = center + step[0];
        let trial_hwhm = (hwhm + step[1]).abs().max(f64::MIN_POSITIVE);
        let trial_amp = amplitude + step[2];
        let trial = cost(trial_center, trial_hwhm, trial_amp);
        if trial < current {
            let improvement = (current - trial) / current.max(f64::MIN_POSITIVE);
            center = trial_center;
            hwhm = trial_hwhm;
            amplitude = trial_amp;
            current = trial;
            lambda = (lambda * 0.3).max(1e-12);
            if improvement < 1e-14 || step.norm() < 1e-12 {
                return Ok(Lorentzian {
                    center,
                    fwhm: 2.0 * hwhm,
                    amplitude,
                });
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                // Stationary: no damping level improves the fit further.
                let _ = iteration;
                return Ok(Lorentzian {
                    center,
                    fwhm: 2.0 * hwhm,
                    amplitude,
                });
            }
        }
    }
    Err(Error::FitDiverged {
        iterations: LM_MAX_ITERATIONS,
    })
}

/// Half width at half maximum estimated by walking outward from the peak.
fn seed_half_width(xs: &[f64], ys: &[f64], peak: f64) -> f64 {
    let peak_idx = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let half = 0.5 * peak;
    let mut right = None;
    for i in peak_idx..xs.len() {
        if ys[i] <= half {
            right = Some(xs[i]);
            break;
        }
    }
    let mut left = None;
    for i in (0..=peak_idx).rev() {
        if ys[i] <= half {
            left = Some(xs[i]);
            break;
        }
    }
    let span = xs.last().unwrap() - xs.first().unwrap();
    match (left, right) {
        (Some(l), Some(r)) if r > l => 0.5 * (r - l),
        _ => 0.25 * span.max(f64::MIN_POSITIVE),
    }
}

/// Pearson correlation coefficient between two equally long series.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::DegenerateData("correlation needs >= 2 samples"));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        saa += (x - mean_a) * (x - mean_a);
        sbb += (y - mean_b) * (y - mean_b);
        sab += (x - mean_a) * (y - mean_b);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateData("correlation of a constant series"));
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Piecewise-linear interpolation of samples (xs ascending, ys) onto
/// `queries`; queries beyond the sampled range clamp to the end values.
pub fn interp_linear(xs: &[f64], ys: &[f64], queries: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::DegenerateData("interpolation of an empty series"));
    }
    Ok(queries
        .iter()
        .map(|&q| {
            if q <= xs[0] {
                return ys[0];
            }
            if q >= *xs.last().unwrap() {
                return *ys.last().unwrap();
            }
            let i = xs.partition_point(|&x| x < q).max(1);
            let (x0, x1) = (xs[i - 1], xs[i]);
            let (y0, y1) = (ys[i - 1], ys[i]);
            if x1 == x0 {
                y0
            } else {
                y0 + (y1 - y0) * (q - x0) / (x1 - x0)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn decay_rate_of_exact_exponential() {
        let series: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.01;
                (t, (-PI * t).exp())
            })
            .collect();
        let rate = fit_decay_rate(&series, (0.0, 2.0)).unwrap();
        assert!((rate - PI).abs() < 1e-8);
    }

    #[test]
    fn decay_rate_of_constant_series_is_zero() {
        let series: Vec<(f64, f64)> = (0..50).map(|i| (i as f64 * 0.1, 1.0)).collect();
        let rate = fit_decay_rate(&series, (0.0, 5.0)).unwrap();
        assert!(rate.abs() < 1e-12);
    }

    #[test]
    fn decay_rate_rejects_bad_windows() {
        let series = vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)];
        assert!(matches!(
            fit_decay_rate(&series, (0.0, 2.0)),
            Err(Error::NonPositivePopulation { .. })
        ));
        assert!(matches!(
            fit_decay_rate(&series, (5.0, 6.0)),
            Err(Error::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn lorentzian_fit_recovers_exact_parameters() {
        let truth = Lorentzian {
            center: 100.0,
            fwhm: PI,
            amplitude: 0.02,
        };
        let xs: Vec<f64> = (0..200).map(|i| 90.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| truth.evaluate(x)).collect();
        let fit = fit_lorentzian(&xs, &ys, 99.0).unwrap();
        assert!((fit.center - truth.center).abs() < 1e-8);
        assert!((fit.fwhm - truth.fwhm).abs() < 1e-8);
        assert!((fit.amplitude - truth.amplitude).abs() < 1e-10);
    }

    #[test]
    fn lorentzian_fit_tolerates_perturbation() {
        let truth = Lorentzian {
            center: 50.0,
            fwhm: 4.0,
            amplitude: 1.0,
        };
        let xs: Vec<f64> = (0..400).map(|i| 30.0 + 0.1 * i as f64).collect();
        // Deterministic ripple standing in for sampling noise.
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| truth.evaluate(x) * (1.0 + 0.02 * (5.0 * x).sin()))
            .collect();
        let fit = fit_lorentzian(&xs, &ys, 49.0).unwrap();
        assert!((fit.center - truth.center).abs() < 0.1);
        assert!((fit.fwhm - truth.fwhm).abs() / truth.fwhm < 0.05);
    }

    #[test]
    fn lorentzian_fit_rejects_flat_data() {
        let xs = vec![0.0, 1.0, 2.0];
        let ys = vec![0.0, 0.0, 0.0];
        assert!(matches!(
            fit_lorentzian(&xs, &ys, 1.0),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn pearson_limits() {
        let a = vec![1.0, 2.0, 3.0, 4.0];
        let b: Vec<f64> = a.iter().map(|x| 3.0 * x - 1.0).collect();
        let c: Vec<f64> = a.iter().map(|x| -2.0 * x).collect();
        assert!((pearson_correlation(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_correlation(&a, &c).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson_correlation(&a, &[1.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn interp_clamps_and_interpolates() {
        let xs = vec![0.0, 1.0, 2.0];
        let ys = vec![0.0, 10.0, 0.0];
        let out = interp_linear(&xs, &ys, &[-1.0, 0.5, 1.5, 3.0]).unwrap();
        assert_eq!(out, vec![0.0, 5.0, 5.0, 0.0]);
    }
}
