//! The experimental configurations built on top of the model and the
//! propagators: emitter position sweeps, regular and random atomic
//! "crystals", seeded ensembles of random crystals, and analyzer-atom
//! spectrometers.
//!
//! Randomness is deterministic end to end: every random crystal draws its
//! positions from a ChaCha8 stream, and an ensemble derives member streams
//! from one master seed by the rule `seed_from_u64(master) + set_stream(i)`
//! for member i. Member 0 therefore reproduces a single crystal built with
//! `seed = master`, and the whole ensemble reproduces bitwise on any
//! platform and any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{initial_state, Backend, ExcitationState};
use crate::error::{Error, Result};
use crate::model::{
    coupling_for_rate, golden_rule_rate, AtomRole, AtomSpec, CouplingModel, ModeBasis, SystemConfig,
};
use crate::numeric::{linspace, KahanSum};
use crate::observables::{atomic_population, population_series};

/// How crystal atoms are laid out over the lattice cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Atom j exactly on its lattice site.
    Regular,
    /// One atom drawn uniformly inside each length-a cell around its site.
    RandomPerCell,
    /// All atoms stacked on the central position (the a = 0 case).
    Stacked,
}

/// A linear crystal of identical two-level atoms with the emitter in the
/// central slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalSpec {
    /// Number of atoms, emitter included. Must be odd so a central slot
    /// exists.
    pub atom_count: usize,
    /// Lattice constant a.
    pub lattice_constant: f64,
    pub placement: Placement,
    /// Position of the central slot; must coincide with the emitter.
    pub center: f64,
    /// RNG seed for [`Placement::RandomPerCell`].
    pub seed: u64,
    /// Keep the emitter exactly at `center` even under random placement
    /// (its cell then draws nothing). Set false to randomize the emitter's
    /// own cell like any other.
    pub pin_emitter: bool,
}

impl CrystalSpec {
    pub fn regular(atom_count: usize, lattice_constant: f64, center: f64) -> Self {
        Self {
            atom_count,
            lattice_constant,
            placement: Placement::Regular,
            center,
            seed: 0,
            pin_emitter: true,
        }
    }

    pub fn random_per_cell(
        atom_count: usize,
        lattice_constant: f64,
        center: f64,
        seed: u64,
    ) -> Self {
        Self {
            atom_count,
            lattice_constant,
            placement: Placement::RandomPerCell,
            center,
            seed,
            pin_emitter: true,
        }
    }

    pub fn stacked(atom_count: usize, center: f64) -> Self {
        Self {
            atom_count,
            lattice_constant: 0.0,
            placement: Placement::Stacked,
            center,
            seed: 0,
            pin_emitter: true,
        }
    }

    /// 0-based index of the central slot.
    pub fn center_slot(&self) -> usize {
        (self.atom_count - 1) / 2
    }
}

/// Build the crystal configuration: `atom_count` identical atoms sharing the
/// emitter's frequency and coupling, the central one initially excited.
pub fn build_crystal(
    spec: &CrystalSpec,
    emitter: &AtomSpec,
    modes: &ModeBasis,
    coupling_model: CouplingModel,
) -> Result<SystemConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    build_crystal_with_rng(spec, emitter, modes, coupling_model, &mut rng)
}

fn build_crystal_with_rng(
    spec: &CrystalSpec,
    emitter: &AtomSpec,
    modes: &ModeBasis,
    coupling_model: CouplingModel,
    rng: &mut ChaCha8Rng,
) -> Result<SystemConfig> {
    if spec.atom_count == 0 || spec.atom_count.is_multiple_of(2) {
        return Err(Error::EvenCrystal(spec.atom_count));
    }
    if spec.center != emitter.position {
        return Err(Error::CenterMismatch {
            center: spec.center,
            emitter: emitter.position,
        });
    }
    let m = spec.atom_count;
    let half = spec.center_slot() as f64;
    let a = spec.lattice_constant;
    let length = modes.length();

    let mut atoms = Vec::with_capacity(m);
    for j in 0..m {
        let site = match spec.placement {
            Placement::Stacked => spec.center,
            _ => spec.center + (j as f64 - half) * a,
        };
        let position = match spec.placement {
            Placement::RandomPerCell if !(spec.pin_emitter && j == spec.center_slot()) => {
                // Uniform inside the cell [site - a/2, site + a/2).
                site + (rng.random::<f64>() - 0.5) * a
            }
            _ => site,
        };
        let inside = position > 0.0 && position < length;
        if !inside {
            return Err(Error::CrystalOverflow {
                count: m,
                spacing: a,
                length,
            });
        }
        let is_emitter = j == spec.center_slot();
        atoms.push(AtomSpec {
            position,
            transition_frequency: emitter.transition_frequency,
            reduced_coupling: emitter.reduced_coupling,
            role: if is_emitter {
                AtomRole::Emitter
            } else {
                AtomRole::Crystal
            },
            initial_excited: is_emitter,
        });
    }
    SystemConfig::new(modes.clone(), atoms, coupling_model)
}

/// The emitter's population history for one offset of a position sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSweepPoint {
    pub offset: f64,
    pub population: Vec<f64>,
}

/// Run one independent simulation per emitter offset. The base
/// configuration is cloned, the emitter shifted by each offset in turn, and
/// the emitter's P_e(t) collected on the shared time grid. Offsets keep
/// their input order.
pub fn run_position_sweep(
    base: &SystemConfig,
    offsets: &[f64],
    times: &[f64],
    backend: Backend,
) -> Result<Vec<PositionSweepPoint>> {
    let emitter = base.emitter_index()?;
    offsets
        .par_iter()
        .map(|&offset| {
            let mut config = base.clone();
            config.atoms[emitter].position += offset;
            let config = SystemConfig::new(config.modes, config.atoms, config.coupling_model)?;
            let s0 = initial_state(&config)?;
            let states = backend.evolve(&config.hamiltonian(), &s0, times)?;
            Ok(PositionSweepPoint {
                offset,
                population: population_series(&states, emitter)?,
            })
        })
        .collect()
}

/// Mean of equally long series, accumulated in member order with
/// compensated summation, so the result does not depend on how the members
/// were scheduled.
pub fn mean_series(members: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = members.first().ok_or(Error::EmptyEnsemble)?;
    let len = first.len();
    for m in members {
        if m.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: m.len(),
            });
        }
    }
    let inv = 1.0 / members.len() as f64;
    Ok((0..len)
        .map(|i| {
            let mut acc = KahanSum::default();
            for m in members {
                acc.add(m[i]);
            }
            acc.value() * inv
        })
        .collect())
}

/// Ensemble of random-crystal runs: the per-member central-atom populations
/// and their mean, with the seed ledger needed to reproduce every member.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub n_configs: usize,
    pub times: Vec<f64>,
    pub mean_population: Vec<f64>,
    /// Per-member series, retained on request.
    pub member_population: Option<Vec<Vec<f64>>>,
    pub master_seed: u64,
    /// ChaCha8 stream id of each member, in member order.
    pub member_streams: Vec<u64>,
}

/// Run `n_configs` independent random-crystal simulations and average the
/// central atom's P_e(t). Member i draws its positions from the ChaCha8
/// stream i of `master_seed`; members run in parallel but are reduced in
/// member order, so the mean is identical for any thread count.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    spec: &CrystalSpec,
    emitter: &AtomSpec,
    modes: &ModeBasis,
    coupling_model: CouplingModel,
    n_configs: usize,
    times: &[f64],
    master_seed: u64,
    backend: Backend,
    keep_members: bool,
) -> Result<EnsembleResult> {
    if n_configs == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let member_streams: Vec<u64> = (0..n_configs as u64).collect();
    let members: Vec<Vec<f64>> = member_streams
        .par_iter()
        .map(|&stream| {
            let run = || -> Result<Vec<f64>> {
                let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
                rng.set_stream(stream);
                let config =
                    build_crystal_with_rng(spec, emitter, modes, coupling_model, &mut rng)?;
                let s0 = initial_state(&config)?;
                let states = backend.evolve(&config.hamiltonian(), &s0, times)?;
                population_series(&states, spec.center_slot())
            };
            run().map_err(|source| Error::EnsembleMember {
                stream,
                source: Box::new(source),
            })
        })
        .collect::<Result<_>>()?;
    let mean_population = mean_series(&members)?;
    Ok(EnsembleResult {
        n_configs,
        times: times.to_vec(),
        mean_population,
        member_population: keep_members.then_some(members),
        master_seed,
        member_streams,
    })
}

/// A bunch of co-located narrow-line analyzer atoms acting as frequency
/// filters: their transition frequencies fan out around the emitter's, all
/// with the same linewidth `gamma_ratio * Gamma_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzerBank {
    pub count: usize,
    /// Position offset from the emitter; the time of flight to the bank is
    /// |offset| / c.
    pub offset: f64,
    /// Analyzer linewidth as a fraction of the emitter's decay rate; must be
    /// positive and should be << 1 for a weak measurement.
    pub gamma_ratio: f64,
    /// Half-span of the frequency grid around the emitter frequency.
    pub span: f64,
}

impl AnalyzerBank {
    /// The analyzer frequency grid around `omega_a`: `count` equally spaced
    /// frequencies covering omega_a +- span (a single analyzer sits exactly
    /// on resonance).
    pub fn frequencies(&self, omega_a: f64) -> Vec<f64> {
        if self.count == 1 {
            vec![omega_a]
        } else {
            linspace(omega_a - self.span, omega_a + self.span, self.count)
        }
    }
}

/// Extend an emitter configuration with the analyzer bank. Analyzer
/// couplings are all equal, scaled from `gamma_ratio` through the same
/// golden-rule relation that fixes the emitter's rate, so each analyzer has
/// linewidth `gamma_ratio * Gamma_a`.
pub fn build_analyzer_bank(
    bank: &AnalyzerBank,
    emitter_config: &SystemConfig,
) -> Result<SystemConfig> {
    if bank.count == 0 {
        return Err(Error::EmptyAnalyzerBank);
    }
    if bank.gamma_ratio.is_nan() || bank.gamma_ratio <= 0.0 {
        return Err(Error::DarkAnalyzers(bank.gamma_ratio));
    }
    let emitter_idx = emitter_config.emitter_index()?;
    let emitter = emitter_config.atoms[emitter_idx];
    let modes = &emitter_config.modes;
    let position = emitter.position + bank.offset;
    if !(position > 0.0 && position < modes.length()) {
        return Err(Error::AtomOutsideCavity {
            index: emitter_config.atom_count(),
            position,
            length: modes.length(),
        });
    }
    let emitter_rate = golden_rule_rate(modes, emitter.reduced_coupling);
    let coupling = coupling_for_rate(modes, bank.gamma_ratio * emitter_rate);
    let mut atoms = emitter_config.atoms.clone();
    for frequency in bank.frequencies(emitter.transition_frequency) {
        atoms.push(AtomSpec::analyzer(position, frequency, coupling));
    }
    SystemConfig::new(modes.clone(), atoms, emitter_config.coupling_model)
}

/// Analyzer populations normalized to unit peak, indexed by analyzer
/// frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerReadout {
    pub frequencies: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Readout time.
    pub time: f64,
    /// Light travel time from the emitter to the bank.
    pub time_of_flight: f64,
}

/// Read the absorption spectrum off the analyzer atoms at the state's time.
/// Before the time of flight has elapsed there is nothing to read and the
/// call fails with a "no signal yet" error.
pub fn analyzer_spectrum(
    config: &SystemConfig,
    state: &ExcitationState,
) -> Result<AnalyzerReadout> {
    let emitter_idx = config.emitter_index()?;
    let emitter = config.atoms[emitter_idx];
    let analyzers: Vec<(usize, &AtomSpec)> = config
        .atoms
        .iter()
        .enumerate()
        .filter(|(_, a)| a.role == AtomRole::Analyzer)
        .collect();
    if analyzers.is_empty() {
        return Err(Error::NoAnalyzers);
    }
    let time_of_flight = (analyzers[0].1.position - emitter.position).abs();
    if state.time() < time_of_flight {
        return Err(Error::NoAnalyzerSignal {
            time: state.time(),
            time_of_flight,
        });
    }
    let mut frequencies = Vec::with_capacity(analyzers.len());
    let mut populations = Vec::with_capacity(analyzers.len());
    for (idx, atom) in &analyzers {
        frequencies.push(atom.transition_frequency);
        populations.push(atomic_population(state, *idx)?);
    }
    let peak = populations.iter().cloned().fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Err(Error::NoAnalyzerSignal {
            time: state.time(),
            time_of_flight,
        });
    }
    Ok(AnalyzerReadout {
        normalized: populations.iter().map(|p| p / peak).collect(),
        frequencies,
        time: state.time(),
        time_of_flight,
    })
}

/// Total excitation carried by the analyzer atoms; the weak-measurement
/// regime requires this to stay far below the field excitation.
pub fn analyzer_back_action(config: &SystemConfig, state: &ExcitationState) -> Result<f64> {
    let mut total = 0.0;
    let mut seen = false;
    for (idx, atom) in config.atoms.iter().enumerate() {
        if atom.role == AtomRole::Analyzer {
            total += atomic_population(state, idx)?;
            seen = true;
        }
    }
    if seen {
        Ok(total)
    } else {
        Err(Error::NoAnalyzers)
    }
}
