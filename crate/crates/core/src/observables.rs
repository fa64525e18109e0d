//! Measured quantities of a single-excitation state: level populations,
//! the mode-occupation spectrum, field amplitude and energy density on a
//! spatial grid, and overlaps with the Hamiltonian eigenstates.

use num_complex::Complex64;

use crate::dynamics::{ExcitationState, Propagator};
use crate::error::{Error, Result};
use crate::model::{ModeBasis, SystemConfig};
use crate::numeric::sinpi;

/// Uniform default: resolves the reference resonant wavelength with tens of
/// points per period.
pub const DEFAULT_GRID_RESOLUTION: usize = 2048;

/// Sample positions inside the cavity for field profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    points: Vec<f64>,
}

impl SpatialGrid {
    /// `resolution` evenly spaced points covering [0, L].
    pub fn uniform(modes: &ModeBasis, resolution: usize) -> Self {
        Self {
            points: crate::numeric::linspace(0.0, modes.length(), resolution.max(2)),
        }
    }

    /// Explicit sample points; they must lie inside [0, L].
    pub fn from_points(modes: &ModeBasis, points: Vec<f64>) -> Result<Self> {
        for (index, &r) in points.iter().enumerate() {
            if !(0.0..=modes.length()).contains(&r) {
                return Err(Error::AtomOutsideCavity {
                    index,
                    position: r,
                    length: modes.length(),
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Occupation of one cavity mode at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRecord {
    /// 1-based mode index n.
    pub mode_number: usize,
    pub frequency: f64,
    /// |d_n|^2.
    pub occupation: f64,
    pub time: f64,
}

/// Occupation |c_j|^2 of the upper level of atom `j` (0-based).
pub fn atomic_population(state: &ExcitationState, j: usize) -> Result<f64> {
    state
        .atom_amplitudes()
        .get(j)
        .map(|c| c.norm_sqr())
        .ok_or(Error::AtomIndexOutOfRange {
            index: j,
            count: state.atom_count(),
        })
}

/// P_e(t) of atom `j` along a trajectory.
pub fn population_series(states: &[ExcitationState], j: usize) -> Result<Vec<f64>> {
    states.iter().map(|s| atomic_population(s, j)).collect()
}

/// Total excitation held by the atoms: sum_j |c_j|^2.
pub fn total_atomic_excitation(state: &ExcitationState) -> f64 {
    state.atom_amplitudes().iter().map(|c| c.norm_sqr()).sum()
}

/// Mode occupations S(n) = |d_n|^2 for every mode.
pub fn field_spectrum(modes: &ModeBasis, state: &ExcitationState) -> Result<Vec<SpectrumRecord>> {
    if modes.len() != state.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: modes.len(),
            got: state.mode_count(),
        });
    }
    Ok(state
        .mode_amplitudes()
        .iter()
        .zip(modes.frequencies())
        .enumerate()
        .map(|(i, (d, &frequency))| SpectrumRecord {
            mode_number: i + 1,
            frequency,
            occupation: d.norm_sqr(),
            time: state.time(),
        })
        .collect())
}

/// The spectrum restricted to the modes that actually couple to the emitter
/// (for a central atom: the odd modes). This is the "envelope" the late-time
/// line shape is read off from; the decoupled modes stay empty and would only
/// contribute a comb of zeros.
pub fn spectrum_envelope(
    config: &SystemConfig,
    state: &ExcitationState,
) -> Result<Vec<SpectrumRecord>> {
    let emitter = config.emitter_index()?;
    let couplings = config.coupling_matrix();
    let full = field_spectrum(&config.modes, state)?;
    Ok(full
        .into_iter()
        .enumerate()
        .filter(|(i, _)| couplings[(emitter, *i)] != 0.0)
        .map(|(_, rec)| rec)
        .collect())
}

/// Mean electric field amplitude <E(r)> on the grid.
///
/// The field operator connects sectors that differ by one excitation. A pure
/// single-excitation state has no ground-sector component, so every <a_n>
/// vanishes and the profile is identically zero; the operation exists for
/// states later extended with a ground-state amplitude, and as the sanity
/// check that it *is* the zero function here.
pub fn electric_field_amplitude(
    modes: &ModeBasis,
    state: &ExcitationState,
    grid: &SpatialGrid,
) -> Result<Vec<f64>> {
    if modes.len() != state.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: modes.len(),
            got: state.mode_count(),
        });
    }
    // <a_n> = 0 in this sector, term by term.
    Ok(vec![0.0; grid.len()])
}

/// Normally ordered energy density I(r) = <: epsilon_0 E^2(r) :> evaluated
/// on the grid:
///
/// ```text
/// I(r) = (2 / L) | sum_n sqrt(omega_n) sin(k_n r) d_n |^2
/// ```
///
/// Normal ordering removes the vacuum contribution, so the vacuum gives zero
/// everywhere, and the prefactor makes the spatial integral equal the field
/// energy sum_n omega_n |d_n|^2 (one photon's worth, omega_a, once the atom
/// has fully decayed).
pub fn energy_density(
    modes: &ModeBasis,
    state: &ExcitationState,
    grid: &SpatialGrid,
) -> Result<Vec<f64>> {
    if modes.len() != state.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: modes.len(),
            got: state.mode_count(),
        });
    }
    let length = modes.length();
    let weights: Vec<Complex64> = state
        .mode_amplitudes()
        .iter()
        .zip(modes.frequencies())
        .map(|(d, &omega)| d * omega.sqrt())
        .collect();
    Ok(grid
        .points()
        .iter()
        .map(|&r| {
            let u = r / length;
            let mut field = Complex64::ZERO;
            for (i, w) in weights.iter().enumerate() {
                field += w * sinpi((i + 1) as f64 * u);
            }
            2.0 / length * field.norm_sqr()
        })
        .collect())
}

/// Overlap spectrum S_e(k) = |<psi_0|Phi_k>|^2 against the eigenstates of
/// the total Hamiltonian, returned as (E_k, S_e(k)) pairs in eigenvalue
/// order. A time-independent fingerprint of the initial state; the sum over
/// k is 1 by completeness.
pub fn overlap_spectrum(propagator: &Propagator, s0: &ExcitationState) -> Result<Vec<(f64, f64)>> {
    let dim = propagator.dimension();
    if s0.dimension() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: s0.dimension(),
        });
    }
    let flat = s0.flat();
    Ok(propagator
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(k, &energy)| {
            let col = propagator.eigenvectors().column(k);
            let overlap: Complex64 = col.iter().zip(&flat).map(|(&phi, &x)| phi * x).sum();
            (energy, overlap.norm_sqr())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_state;
    use crate::model::{AtomSpec, CouplingModel, ModeBasis};
    use std::f64::consts::PI;

    const TAU: f64 = 2.0 * PI;

    fn small_central_config() -> SystemConfig {
        let modes = ModeBasis::new(TAU, 40.0).unwrap();
        let atom = AtomSpec::emitter(PI, 20.0, (0.5_f64).sqrt());
        SystemConfig::new(modes, vec![atom], CouplingModel::Broadband).unwrap()
    }

    #[test]
    fn populations_at_t0() {
        let config = small_central_config();
        let s = initial_state(&config).unwrap();
        assert_eq!(atomic_population(&s, 0).unwrap(), 1.0);
        assert_eq!(total_atomic_excitation(&s), 1.0);
        assert!(matches!(
            atomic_population(&s, 1),
            Err(Error::AtomIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn vacuum_spectrum_is_empty() {
        let config = small_central_config();
        let s = initial_state(&config).unwrap();
        let spec = field_spectrum(&config.modes, &s).unwrap();
        assert_eq!(spec.len(), config.mode_count());
        assert!(spec.iter().all(|r| r.occupation == 0.0));
    }

    #[test]
    fn atomless_state_has_zero_atomic_excitation() {
        let modes = ModeBasis::new(TAU, 5.0).unwrap();
        let mut d = vec![Complex64::ZERO; modes.len()];
        d[0] = Complex64::ONE;
        let s = ExcitationState::new(Vec::new(), d, 0.0);
        assert_eq!(total_atomic_excitation(&s), 0.0);
    }

    #[test]
    fn sum_rule_and_even_mode_zeros() {
        let config = small_central_config();
        let h = config.hamiltonian();
        let p = crate::dynamics::Propagator::diagonalize(&h).unwrap();
        let s0 = initial_state(&config).unwrap();
        for &t in &[0.3, 1.0, 2.5] {
            let s = p.state_at(&s0, t).unwrap();
            let spec = field_spectrum(&config.modes, &s).unwrap();
            let total: f64 = spec.iter().map(|r| r.occupation).sum();
            let atoms = total_atomic_excitation(&s);
            assert!(
                (total + atoms - 1.0).abs() < 1e-10,
                "sum rule broken at t={t}"
            );
            for rec in &spec {
                if rec.mode_number % 2 == 0 {
                    assert_eq!(
                        rec.occupation, 0.0,
                        "even mode {} at t={t}",
                        rec.mode_number
                    );
                }
            }
        }
    }

    #[test]
    fn envelope_keeps_only_coupled_modes() {
        let config = small_central_config();
        let s = initial_state(&config).unwrap();
        let env = spectrum_envelope(&config, &s).unwrap();
        assert_eq!(env.len(), config.mode_count() / 2);
        assert!(env.iter().all(|r| r.mode_number % 2 == 1));
    }

    #[test]
    fn field_amplitude_is_the_zero_function() {
        let config = small_central_config();
        let h = config.hamiltonian();
        let p = crate::dynamics::Propagator::diagonalize(&h).unwrap();
        let s = p.state_at(&initial_state(&config).unwrap(), 1.0).unwrap();
        let grid = SpatialGrid::uniform(&config.modes, 64);
        let field = electric_field_amplitude(&config.modes, &s, &grid).unwrap();
        assert!(field.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_density_single_photon() {
        // One photon in mode m: I(r) = (2/L) omega_m sin^2(k_m r), whose
        // integral over the cavity is omega_m.
        let modes = ModeBasis::new(TAU, 5.0).unwrap();
        let n_modes = modes.len();
        let m = 3usize; // 1-based mode number
        let mut d = vec![Complex64::ZERO; n_modes];
        d[m - 1] = Complex64::ONE;
        let s = ExcitationState::new(Vec::new(), d, 0.0);
        let grid = SpatialGrid::uniform(&modes, 4096);
        let density = energy_density(&modes, &s, &grid).unwrap();
        assert_eq!(density[0], 0.0);
        assert_eq!(*density.last().unwrap(), 0.0);
        let omega_m = modes.frequencies()[m - 1];
        for (&r, &i) in grid.points().iter().zip(&density) {
            let expect = 2.0 / TAU * omega_m * (omega_m * r).sin().powi(2);
            assert!((i - expect).abs() < 1e-10);
        }
        let dr = grid.points()[1] - grid.points()[0];
        let integral: f64 = density.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dr).sum();
        assert!((integral - omega_m).abs() / omega_m < 1e-3);
    }

    #[test]
    fn energy_density_vacuum_is_zero() {
        let modes = ModeBasis::new(TAU, 5.0).unwrap();
        let s = ExcitationState::new(Vec::new(), vec![Complex64::ZERO; modes.len()], 0.0);
        let grid = SpatialGrid::uniform(&modes, 128);
        let density = energy_density(&modes, &s, &grid).unwrap();
        assert!(density.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn overlap_spectrum_free_field_is_a_delta() {
        let modes = ModeBasis::new(PI, 6.0).unwrap();
        let config = SystemConfig::new(modes, Vec::new(), CouplingModel::Broadband).unwrap();
        let p = crate::dynamics::Propagator::diagonalize(&config.hamiltonian()).unwrap();
        let mut d = vec![Complex64::ZERO; config.mode_count()];
        d[2] = Complex64::ONE;
        let s0 = ExcitationState::new(Vec::new(), d, 0.0);
        let overlaps = overlap_spectrum(&p, &s0).unwrap();
        for (k, &(energy, s)) in overlaps.iter().enumerate() {
            if k == 2 {
                assert!((s - 1.0).abs() < 1e-12);
                assert!((energy - 3.0).abs() < 1e-12);
            } else {
                assert!(s < 1e-12);
            }
        }
    }

    #[test]
    fn overlap_completeness() {
        let config = small_central_config();
        let p = crate::dynamics::Propagator::diagonalize(&config.hamiltonian()).unwrap();
        let s0 = initial_state(&config).unwrap();
        let total: f64 = overlap_spectrum(&p, &s0)
            .unwrap()
            .iter()
            .map(|&(_, s)| s)
            .sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grid_validation() {
        let modes = ModeBasis::new(TAU, 5.0).unwrap();
        assert!(SpatialGrid::from_points(&modes, vec![0.0, 1.0, TAU]).is_ok());
        assert!(SpatialGrid::from_points(&modes, vec![-0.1]).is_err());
        assert!(SpatialGrid::from_points(&modes, vec![TAU + 0.1]).is_err());
    }
}
