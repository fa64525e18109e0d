//! Discrete mode basis, atoms, position-dependent couplings, and the total
//! Hamiltonian restricted to the single-excitation sector.
//!
//! Units are hbar = c = epsilon_0 = 1 throughout. The physical prefactor of
//! the dipole coupling is folded into a single per-atom parameter, the
//! *reduced coupling* g_a: the coupling of atom j to mode n is
//!
//! ```text
//! g_n^(j) = g_a * f(omega_n) * sin(k_n r_j)
//! ```
//!
//! where f = 1 in the broadband approximation (the default), and the
//! single-excitation Hamiltonian carries the matrix element -g_n^(j) between
//! the "atom j excited" and "one photon in mode n" basis states.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::sinpi;

/// Wavelength of a resonant travelling wave at angular frequency `omega`
/// (c = 1): lambda = 2 pi / omega.
pub fn resonant_wavelength(omega: f64) -> f64 {
    2.0 * PI / omega
}

/// The discrete standing-wave modes of an ideal cavity of length `L`:
/// omega_n = k_n = n pi / L for n = 1..=N, where N is the largest index with
/// omega_N <= cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    length: f64,
    cutoff: f64,
    frequencies: Vec<f64>,
}

impl ModeBasis {
    /// Build the mode basis for a cavity of the given length and frequency
    /// cutoff. Fails if the length is not positive or if not even the first
    /// mode fits under the cutoff.
    pub fn new(length: f64, cutoff: f64) -> Result<Self> {
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::NonPositiveLength(length));
        }
        let spacing = PI / length;
        if cutoff.is_nan() || cutoff < spacing {
            return Err(Error::CutoffBelowFirstMode {
                cutoff,
                first_mode: spacing,
            });
        }
        let mut n = (cutoff / spacing).floor() as usize;
        // Guard the floor against rounding on either side of the boundary.
        while n > 1 && n as f64 * spacing > cutoff {
            n -= 1;
        }
        while (n + 1) as f64 * spacing <= cutoff {
            n += 1;
        }
        let frequencies = (1..=n).map(|i| i as f64 * spacing).collect();
        Ok(Self {
            length,
            cutoff,
            frequencies,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Number of modes N.
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Mode frequencies omega_n, ascending, index 0 holding n = 1.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Mode wavenumbers k_n = omega_n / c. With c = 1 these coincide with
    /// the frequencies.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.frequencies
    }

    /// Frequency spacing pi c / L between consecutive modes.
    pub fn spacing(&self) -> f64 {
        PI / self.length
    }

    /// sin(k_n r) for the mode with 1-based index `n`, exact at the nodes.
    pub fn mode_function(&self, n: usize, position: f64) -> f64 {
        sinpi(n as f64 * (position / self.length))
    }
}

/// Free-space spontaneous decay rate of an atom with reduced coupling `g`
/// in this cavity, by the golden rule: 2 pi g^2 times the density of
/// interacting modes L / (2 pi c), i.e. g^2 L / c.
pub fn golden_rule_rate(modes: &ModeBasis, reduced_coupling: f64) -> f64 {
    reduced_coupling * reduced_coupling * modes.length()
}

/// Inverse of [`golden_rule_rate`]: the reduced coupling that yields the
/// requested free-space decay rate.
pub fn coupling_for_rate(modes: &ModeBasis, rate: f64) -> f64 {
    (rate / modes.length()).sqrt()
}

/// What an atom is for in a scenario. The dynamics never looks at this;
/// scenario builders and readouts do.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomRole {
    Emitter,
    Crystal,
    Analyzer,
}

/// A two-level atom pinned at a position inside the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpec {
    /// Position r in (0, L). An atom exactly at a mirror is rejected: the
    /// coupling would vanish identically, which is almost certainly a
    /// configuration mistake.
    pub position: f64,
    /// Transition frequency omega_a > 0.
    pub transition_frequency: f64,
    /// Coupling magnitude g_a >= 0 with the space-mode function set to unity.
    pub reduced_coupling: f64,
    pub role: AtomRole,
    pub initial_excited: bool,
}

impl AtomSpec {
    /// An initially excited emitter.
    pub fn emitter(position: f64, transition_frequency: f64, reduced_coupling: f64) -> Self {
        Self {
            position,
            transition_frequency,
            reduced_coupling,
            role: AtomRole::Emitter,
            initial_excited: true,
        }
    }

    /// A ground-state crystal atom.
    pub fn crystal_site(position: f64, transition_frequency: f64, reduced_coupling: f64) -> Self {
        Self {
            position,
            transition_frequency,
            reduced_coupling,
            role: AtomRole::Crystal,
            initial_excited: false,
        }
    }

    /// A ground-state analyzer atom.
    pub fn analyzer(position: f64, transition_frequency: f64, reduced_coupling: f64) -> Self {
        Self {
            position,
            transition_frequency,
            reduced_coupling,
            role: AtomRole::Analyzer,
            initial_excited: false,
        }
    }
}

/// Frequency dependence of the atom-field coupling.
///
/// The broadband form evaluates the coupling magnitude at the atomic
/// resonance for every mode; the other two variants restore the mode
/// frequency dependence of the d.E and p.A interaction Hamiltonians. All
/// three coincide on resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingModel {
    /// Frequency-independent magnitude (the default used throughout).
    #[default]
    Broadband,
    /// d.E coupling: magnitude scales as sqrt(omega_n / omega_a).
    DipoleDE,
    /// p.A coupling: magnitude scales as sqrt(omega_a / omega_n).
    MomentumPA,
}

impl CouplingModel {
    /// Multiplicative factor relative to the broadband magnitude.
    pub fn frequency_factor(self, mode_frequency: f64, transition_frequency: f64) -> f64 {
        match self {
            CouplingModel::Broadband => 1.0,
            CouplingModel::DipoleDE => (mode_frequency / transition_frequency).sqrt(),
            CouplingModel::MomentumPA => (transition_frequency / mode_frequency).sqrt(),
        }
    }
}

/// Full closed-system description: mode basis, ordered atoms, coupling model.
///
/// Atom positions need not be distinct; stacking every atom at one point is
/// a legitimate configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub modes: ModeBasis,
    pub atoms: Vec<AtomSpec>,
    pub coupling_model: CouplingModel,
}

impl SystemConfig {
    /// Validate and assemble a configuration. Checks each atom's position,
    /// frequency, and coupling; the count of initially excited atoms is
    /// checked later, when an initial state is built.
    pub fn new(
        modes: ModeBasis,
        atoms: Vec<AtomSpec>,
        coupling_model: CouplingModel,
    ) -> Result<Self> {
        let length = modes.length();
        for (index, atom) in atoms.iter().enumerate() {
            let inside = atom.position > 0.0 && atom.position < length;
            if !inside {
                return Err(Error::AtomOutsideCavity {
                    index,
                    position: atom.position,
                    length,
                });
            }
            if atom.transition_frequency.is_nan() || atom.transition_frequency <= 0.0 {
                return Err(Error::NonPositiveFrequency {
                    index,
                    frequency: atom.transition_frequency,
                });
            }
            if atom.reduced_coupling.is_nan() || atom.reduced_coupling < 0.0 {
                return Err(Error::NegativeCoupling {
                    index,
                    coupling: atom.reduced_coupling,
                });
            }
        }
        Ok(Self {
            modes,
            atoms,
            coupling_model,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Dimension M + N of the single-excitation sector.
    pub fn dimension(&self) -> usize {
        self.atom_count() + self.mode_count()
    }

    /// Index of the unique initially excited atom.
    pub fn emitter_index(&self) -> Result<usize> {
        let excited: Vec<usize> = self
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.initial_excited)
            .map(|(i, _)| i)
            .collect();
        match excited.len() {
            0 => Err(Error::NoExcitedAtom),
            1 => Ok(excited[0]),
            n => Err(Error::MultipleExcitedAtoms(n)),
        }
    }

    /// The M x N coupling matrix g[j][n] = g_a^(j) f(omega_n) sin(k_n r_j).
    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let m = self.atom_count();
        let n = self.mode_count();
        let mut g = DMatrix::zeros(m, n);
        for (j, atom) in self.atoms.iter().enumerate() {
            let u = atom.position / self.modes.length();
            for (i, &omega) in self.modes.frequencies().iter().enumerate() {
                let factor = self
                    .coupling_model
                    .frequency_factor(omega, atom.transition_frequency);
                g[(j, i)] = atom.reduced_coupling * factor * sinpi((i + 1) as f64 * u);
            }
        }
        g
    }

    /// Build the single-excitation Hamiltonian for this configuration.
    pub fn hamiltonian(&self) -> RestrictedHamiltonian {
        RestrictedHamiltonian::new(self)
    }
}

/// The total Hamiltonian projected onto the single-excitation sector: a real
/// symmetric (M+N) x (M+N) matrix. Slot ordering is fixed (atoms first, in
/// input order, then modes by ascending n) so amplitude indices are stable
/// across propagation backends.
///
/// Stored in block form (atom diagonal, mode diagonal, atom-mode couplings):
/// the only nonzero off-diagonal elements sit between atom and mode slots,
/// and applying the operator through the blocks costs O(M N) instead of
/// O((M+N)^2).
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedHamiltonian {
    atom_frequencies: Vec<f64>,
    mode_frequencies: Vec<f64>,
    /// couplings[(j, i)] = g of atom j to mode i; the matrix element is -g.
    couplings: DMatrix<f64>,
}

impl RestrictedHamiltonian {
    pub fn new(config: &SystemConfig) -> Self {
        Self {
            atom_frequencies: config
                .atoms
                .iter()
                .map(|a| a.transition_frequency)
                .collect(),
            mode_frequencies: config.modes.frequencies().to_vec(),
            couplings: config.coupling_matrix(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atom_frequencies.len()
    }

    pub fn mode_count(&self) -> usize {
        self.mode_frequencies.len()
    }

    pub fn dimension(&self) -> usize {
        self.atom_count() + self.mode_count()
    }

    pub fn atom_frequencies(&self) -> &[f64] {
        &self.atom_frequencies
    }

    pub fn mode_frequencies(&self) -> &[f64] {
        &self.mode_frequencies
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    /// Single matrix element in the fixed slot ordering (atoms 0..M, then
    /// modes M..M+N).
    pub fn matrix_element(&self, row: usize, col: usize) -> f64 {
        let m = self.atom_count();
        if row == col {
            if row < m {
                self.atom_frequencies[row]
            } else {
                self.mode_frequencies[row - m]
            }
        } else if row < m && col >= m {
            -self.couplings[(row, col - m)]
        } else if col < m && row >= m {
            -self.couplings[(col, row - m)]
        } else {
            0.0
        }
    }

    /// Materialize the dense symmetric matrix.
    pub fn dense(&self) -> DMatrix<f64> {
        let m = self.atom_count();
        let n = self.mode_count();
        let dim = m + n;
        let mut h = DMatrix::zeros(dim, dim);
        for (j, &omega) in self.atom_frequencies.iter().enumerate() {
            h[(j, j)] = omega;
        }
        for (i, &omega) in self.mode_frequencies.iter().enumerate() {
            h[(m + i, m + i)] = omega;
        }
        for j in 0..m {
            for i in 0..n {
                let g = self.couplings[(j, i)];
                h[(j, m + i)] = -g;
                h[(m + i, j)] = -g;
            }
        }
        h
    }

    /// out = H x through the block structure.
    ///
    /// Panics if the slice lengths do not match the dimension; callers in
    /// this crate validate dimensions before entering propagation loops.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let m = self.atom_count();
        let n = self.mode_count();
        assert_eq!(x.len(), m + n);
        assert_eq!(out.len(), m + n);
        let (atoms_in, modes_in) = x.split_at(m);
        for (j, &omega) in self.atom_frequencies.iter().enumerate() {
            let mut acc = omega * atoms_in[j];
            for (i, d) in modes_in.iter().enumerate() {
                acc -= self.couplings[(j, i)] * d;
            }
            out[j] = acc;
        }
        for (i, &omega) in self.mode_frequencies.iter().enumerate() {
            let mut acc = omega * modes_in[i];
            for (j, c) in atoms_in.iter().enumerate() {
                acc -= self.couplings[(j, i)] * c;
            }
            out[m + i] = acc;
        }
    }

    /// Energy expectation <x|H|x> (real for Hermitian H).
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let mut hx = vec![Complex64::ZERO; x.len()];
        self.apply(x, &mut hx);
        x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum()
    }
}
