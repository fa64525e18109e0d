//! Small numerical helpers: exact-node sine, grids, compensated sums,
//! cumulative quadrature.

use std::f64::consts::PI;

/// sin(pi * u), exact at integer and half-integer arguments.
///
/// Mode functions are always evaluated as sin(k_n r) = sin(pi * n r / L);
/// reducing the argument in units of pi makes couplings vanish identically
/// when n r / L is an integer (an atom at the cavity center decouples from
/// every even mode) instead of leaving ~1e-13 residues from rounding n*pi.
pub fn sinpi(u: f64) -> f64 {
    let m = u.round();
    let f = u - m;
    let s = (PI * f).sin();
    if (m as i64) & 1 == 0 {
        s
    } else {
        -s
    }
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        end
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Kahan compensated accumulator. Used wherever a sum must not depend on
/// how the work that produced its terms was scheduled.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Cumulative integral of sampled data: result[i] = integral from t[0] to
/// t[i]. Each subinterval is integrated with the quadratics through the two
/// three-point stencils that contain it and their mean is taken, which
/// cancels the leading error term; interior convergence is O(h^4), matching
/// composite Simpson.
pub(crate) fn cumulative_integral(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    assert_eq!(n, values.len(), "cumulative_integral: ragged input");
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (values[0] + values[1]) * (times[1] - times[0]);
        return out;
    }
    let segment = |a: usize, b: usize, c: usize, i: usize| {
        quadratic_segment(
            (times[a], values[a]),
            (times[b], values[b]),
            (times[c], values[c]),
            times[i],
            times[i + 1],
        )
    };
    let mut acc = KahanSum::default();
    for i in 0..n - 1 {
        let centered = (i >= 1).then(|| segment(i - 1, i, i + 1, i));
        let forward = (i + 2 < n).then(|| segment(i, i + 1, i + 2, i));
        let piece = match (centered, forward) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("n >= 3 guarantees a stencil"),
        };
        acc.add(piece);
        out[i + 1] = acc.value();
    }
    out
}

/// Integral over [x0, x1] of the Lagrange quadratic through three points.
/// Worked in coordinates local to x0; differencing the antiderivative at the
/// absolute coordinates would cancel catastrophically for narrow intervals.
fn quadratic_segment(
    (xa, ya): (f64, f64),
    (xb, yb): (f64, f64),
    (xc, yc): (f64, f64),
    x0: f64,
    x1: f64,
) -> f64 {
    let w = x1 - x0;
    let basis = |xj: f64, xk: f64, denom: f64| -> f64 {
        // integral of (x - xj)(x - xk) / denom over [x0, x0 + w]
        let (aj, ak) = (xj - x0, xk - x0);
        (w * w * w / 3.0 - (aj + ak) * w * w / 2.0 + aj * ak * w) / denom
    };
    ya * basis(xb, xc, (xa - xb) * (xa - xc))
        + yb * basis(xa, xc, (xb - xa) * (xb - xc))
        + yc * basis(xa, xb, (xc - xa) * (xc - xb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinpi_exact_nodes() {
        for n in -6_i32..=6 {
            assert_eq!(sinpi(n as f64), 0.0, "sinpi({n}) must be exactly zero");
        }
        assert_eq!(sinpi(0.5), 1.0);
        assert_eq!(sinpi(1.5), -1.0);
        assert_eq!(sinpi(2.5), 1.0);
        assert_eq!(sinpi(-0.5), -1.0);
    }

    #[test]
    fn sinpi_matches_sin() {
        // The reduced form differs from naive sin(pi*u) only by the argument
        // rounding of the naive route, a few ulp.
        for i in 0..1000 {
            let u = -3.0 + 6.0 * i as f64 / 999.0;
            let expected = (PI * u).sin();
            assert!((sinpi(u) - expected).abs() < 5e-15);
        }
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 2.0, 5);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn cumulative_integral_cubic_is_near_exact() {
        // Stencil averaging cancels the cubic's error term everywhere except
        // the two one-sided end intervals.
        let times: Vec<f64> = (0..201).map(|i| i as f64 * 0.005).collect();
        let values: Vec<f64> = times.iter().map(|&t| 3.0 * t * t).collect();
        let integral = cumulative_integral(&times, &values);
        for (i, &t) in times.iter().enumerate() {
            assert!((integral[i] - t * t * t).abs() < 1e-9);
        }
    }

    #[test]
    fn cumulative_integral_oscillatory() {
        let times: Vec<f64> = (0..2001).map(|i| i as f64 * 0.0005).collect();
        let values: Vec<f64> = times.iter().map(|&t| (10.0 * t).cos()).collect();
        let integral = cumulative_integral(&times, &values);
        let mut worst = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            let exact = (10.0 * t).sin() / 10.0;
            worst = worst.max((integral[i] - exact).abs());
        }
        println!("oscillatory quadrature worst error {worst:e}");
        assert!(worst < 1e-10, "worst error {worst:e}");
    }
}
