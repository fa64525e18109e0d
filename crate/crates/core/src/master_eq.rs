//! Reconstruction of the convolutionless master equation governing the
//! initially excited atom: the time-dependent decay rate Gamma(t) and level
//! shift delta(t) obtained from the complex generator
//!
//! ```text
//! eta(t) = -2 (dc_1/dt) / c_1(t),    Gamma = Re eta,    delta = Im eta.
//! ```
//!
//! The derivative is taken from the equation of motion, dc_1/dt = -i (H x)_1
//! evaluated on the stored state vector, so no finite-difference tolerance
//! enters. Near zeros of c_1 the quotient is ill-conditioned; such samples
//! are masked rather than extrapolated.

use num_complex::Complex64;

use crate::dynamics::ExcitationState;
use crate::error::{Error, Result};
use crate::model::RestrictedHamiltonian;
use crate::numeric::cumulative_integral;

/// Samples with |c_1| below this are flagged invalid.
pub const DEFAULT_C1_THRESHOLD: f64 = 1e-6;

/// Time series of the reconstructed generator. Where `valid` is false the
/// stored rate and shift are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterEqTrace {
    times: Vec<f64>,
    eta: Vec<Complex64>,
    gamma: Vec<f64>,
    delta: Vec<f64>,
    valid: Vec<bool>,
}

impl MasterEqTrace {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn eta(&self) -> &[Complex64] {
        &self.eta
    }

    /// Decay rate Gamma(t) = Re eta. May legitimately go negative when the
    /// atom reabsorbs energy from the field.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Level shift delta(t) = Im eta.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Build a trace directly from an amplitude series and its derivative.
///
/// This is the computational core of [`reconstruct_eta`], exposed so that
/// synthetic amplitude models (with analytically known derivatives) can be
/// pushed through the identical code path.
pub fn eta_from_amplitudes(
    times: &[f64],
    c1: &[Complex64],
    dc1: &[Complex64],
    threshold: f64,
) -> Result<MasterEqTrace> {
    if times.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if c1.len() != times.len() || dc1.len() != times.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: c1.len().min(dc1.len()),
        });
    }
    let mut eta = Vec::with_capacity(times.len());
    let mut gamma = Vec::with_capacity(times.len());
    let mut delta = Vec::with_capacity(times.len());
    let mut valid = Vec::with_capacity(times.len());
    for (&c, &dc) in c1.iter().zip(dc1) {
        if c.norm() >= threshold {
            let e = -2.0 * dc / c;
            eta.push(e);
            gamma.push(e.re);
            delta.push(e.im);
            valid.push(true);
        } else {
            eta.push(Complex64::new(f64::NAN, f64::NAN));
            gamma.push(f64::NAN);
            delta.push(f64::NAN);
            valid.push(false);
        }
    }
    Ok(MasterEqTrace {
        times: times.to_vec(),
        eta,
        gamma,
        delta,
        valid,
    })
}

/// Reconstruct eta(t) along a stored trajectory, with dc_1/dt evaluated
/// exactly from the equation of motion.
pub fn reconstruct_eta(
    h: &RestrictedHamiltonian,
    trajectory: &[ExcitationState],
    emitter: usize,
) -> Result<MasterEqTrace> {
    reconstruct_eta_with_threshold(h, trajectory, emitter, DEFAULT_C1_THRESHOLD)
}

/// [`reconstruct_eta`] with an explicit validity threshold on |c_1|.
pub fn reconstruct_eta_with_threshold(
    h: &RestrictedHamiltonian,
    trajectory: &[ExcitationState],
    emitter: usize,
    threshold: f64,
) -> Result<MasterEqTrace> {
    if trajectory.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if emitter >= h.atom_count() {
        return Err(Error::AtomIndexOutOfRange {
            index: emitter,
            count: h.atom_count(),
        });
    }
    let dim = h.dimension();
    let mut times = Vec::with_capacity(trajectory.len());
    let mut c1 = Vec::with_capacity(trajectory.len());
    let mut dc1 = Vec::with_capacity(trajectory.len());
    let mut hx = vec![Complex64::ZERO; dim];
    for state in trajectory {
        if state.dimension() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: state.dimension(),
            });
        }
        let flat = state.flat();
        h.apply(&flat, &mut hx);
        times.push(state.time());
        c1.push(flat[emitter]);
        // dc/dt = -i (H x)_1
        let hx1 = hx[emitter];
        dc1.push(Complex64::new(hx1.im, -hx1.re));
    }
    eta_from_amplitudes(&times, &c1, &dc1, threshold)
}

/// Remove the free atomic rotation exp(-i omega_a t) from the generator, so
/// the shift reports only the interaction-induced part. Equivalent to
/// computing eta from the rotated amplitude c_1 exp(+i omega_a t):
/// eta -> eta - 2 i omega_a. The rate is untouched.
pub fn free_atom_interaction_frame(trace: &MasterEqTrace, omega_a: f64) -> MasterEqTrace {
    let shift = Complex64::new(0.0, 2.0 * omega_a);
    let mut out = trace.clone();
    for (i, ok) in trace.valid.iter().enumerate() {
        if *ok {
            out.eta[i] = trace.eta[i] - shift;
            out.delta[i] = trace.delta[i] - 2.0 * omega_a;
        }
    }
    out
}

/// Re-integrate dP/dt = -Gamma(t) P(t) across the trace and return the
/// largest absolute deviation from the supplied population series. This is
/// the definitional consistency check of the reconstruction: the identity is
/// exact in the continuum, so the residual measures only sampling density.
///
/// Every sample in the trace must be valid.
pub fn population_residual(trace: &MasterEqTrace, populations: &[f64]) -> Result<f64> {
    if populations.len() != trace.len() {
        return Err(Error::DimensionMismatch {
            expected: trace.len(),
            got: populations.len(),
        });
    }
    if trace.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if trace.valid.iter().any(|ok| !ok) {
        return Err(Error::MaskedTraceWindow);
    }
    let integral = cumulative_integral(&trace.times, &trace.gamma);
    let p0 = populations[0];
    let mut worst = 0.0f64;
    for (i, &p) in populations.iter().enumerate() {
        let reconstructed = p0 * (-integral[i]).exp();
        worst = worst.max((reconstructed - p).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_state, Propagator};
    use crate::model::{AtomSpec, CouplingModel, ModeBasis, SystemConfig};
    use crate::numeric::linspace;
    use std::f64::consts::PI;

    #[test]
    fn pure_exponential_gives_constant_rate() {
        // c_1 = exp(-pi t / 2) with its analytic derivative: Gamma = pi,
        // delta = 0, no masking.
        let times = linspace(0.0, 2.0, 101);
        let c1: Vec<Complex64> = times
            .iter()
            .map(|&t| Complex64::new((-PI * t / 2.0).exp(), 0.0))
            .collect();
        let dc1: Vec<Complex64> = c1.iter().map(|c| -PI / 2.0 * c).collect();
        let trace = eta_from_amplitudes(&times, &c1, &dc1, DEFAULT_C1_THRESHOLD).unwrap();
        assert!(trace.valid().iter().all(|&ok| ok));
        for (&g, &d) in trace.gamma().iter().zip(trace.delta()) {
            assert!((g - PI).abs() < 1e-12);
            assert!(d.abs() < 1e-12);
        }
        let populations: Vec<f64> = c1.iter().map(|c| c.norm_sqr()).collect();
        let residual = population_residual(&trace, &populations).unwrap();
        assert!(residual < 1e-9);
    }

    #[test]
    fn free_rotation_frames_away() {
        let omega = 100.0;
        let times = linspace(0.0, 1.0, 50);
        let c1: Vec<Complex64> = times
            .iter()
            .map(|&t| Complex64::from_polar(1.0, -omega * t))
            .collect();
        let dc1: Vec<Complex64> = c1.iter().map(|c| Complex64::new(0.0, -omega) * c).collect();
        let lab = eta_from_amplitudes(&times, &c1, &dc1, DEFAULT_C1_THRESHOLD).unwrap();
        for (&g, &d) in lab.gamma().iter().zip(lab.delta()) {
            assert!(g.abs() < 1e-12);
            assert!((d - 2.0 * omega).abs() < 1e-9);
        }
        let framed = free_atom_interaction_frame(&lab, omega);
        for ((&g, &d), (&gl, _)) in framed
            .gamma()
            .iter()
            .zip(framed.delta())
            .zip(lab.gamma().iter().zip(lab.delta()))
        {
            assert_eq!(g, gl, "rate must be frame-invariant bitwise");
            assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn threshold_masks_small_amplitudes() {
        let times = vec![0.0, 1.0, 2.0];
        let c1 = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1e-9, 0.0),
            Complex64::new(0.5, 0.0),
        ];
        let dc1 = vec![Complex64::ZERO; 3];
        let trace = eta_from_amplitudes(&times, &c1, &dc1, 1e-6).unwrap();
        assert_eq!(trace.valid(), &[true, false, true]);
        assert!(trace.gamma()[1].is_nan());
        assert!(trace.delta()[1].is_nan());
        let populations = vec![1.0, 1e-18, 0.25];
        assert!(matches!(
            population_residual(&trace, &populations),
            Err(Error::MaskedTraceWindow)
        ));
    }

    #[test]
    fn equation_of_motion_derivative_on_rabi_solution() {
        // Resonant one-mode model: c_1 = exp(-i w t) cos(g t), so
        // Gamma(t) = 2 g tan(g t) and the lab-frame shift is 2 w.
        let g = 0.2;
        let omega = 1.0;
        let modes = ModeBasis::new(PI, 1.5).unwrap();
        let atom = AtomSpec::emitter(PI / 2.0, omega, g);
        let config = SystemConfig::new(modes, vec![atom], CouplingModel::Broadband).unwrap();
        let h = config.hamiltonian();
        let p = Propagator::diagonalize(&h).unwrap();
        let s0 = initial_state(&config).unwrap();
        let times = linspace(0.0, 6.0, 1201);
        let states = p.evolve(&s0, &times).unwrap();
        let trace = reconstruct_eta(&h, &states, 0).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let expect = 2.0 * g * (g * t).tan();
            assert!(
                (trace.gamma()[i] - expect).abs() < 1e-8,
                "t = {t}: {} vs {expect}",
                trace.gamma()[i]
            );
            assert!((trace.delta()[i] - 2.0 * omega).abs() < 1e-8);
        }
        let framed = free_atom_interaction_frame(&trace, omega);
        assert!(framed.delta().iter().all(|d| d.abs() < 1e-8));

        // Definitional consistency on the same window.
        let populations: Vec<f64> = states
            .iter()
            .map(|s| s.atom_amplitudes()[0].norm_sqr())
            .collect();
        let residual = population_residual(&trace, &populations).unwrap();
        assert!(residual < 1e-7, "residual {residual:e}");
    }

    #[test]
    fn reconstruct_validates_inputs() {
        let modes = ModeBasis::new(PI, 1.5).unwrap();
        let atom = AtomSpec::emitter(PI / 2.0, 1.0, 0.2);
        let config = SystemConfig::new(modes, vec![atom], CouplingModel::Broadband).unwrap();
        let h = config.hamiltonian();
        assert!(matches!(
            reconstruct_eta(&h, &[], 0),
            Err(Error::EmptyTrajectory)
        ));
        let s0 = initial_state(&config).unwrap();
        assert!(matches!(
            reconstruct_eta(&h, &[s0], 5),
            Err(Error::AtomIndexOutOfRange { .. })
        ));
    }
}
