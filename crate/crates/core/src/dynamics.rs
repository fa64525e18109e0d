//! Time evolution of the single-excitation amplitude vector by two
//! independent backends: exact eigendecomposition and classic fourth-order
//! Runge-Kutta. The two serve as mutual oracles; eigendecomposition is the
//! default because recurrence-time measurements need phases free of
//! step-size error accumulation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{RestrictedHamiltonian, SystemConfig};

/// Default Runge-Kutta step in simulation units; dt * omega_cut = 0.02 for
/// the reference cavity scale.
pub const DEFAULT_RK_STEP: f64 = 1e-4;

/// Abort threshold on the norm drift of the Runge-Kutta integrator.
pub const RK_NORM_GUARD: f64 = 1e-4;

const MAX_EIGEN_ITERATIONS: usize = 100_000;

/// Amplitudes (c_1..c_M, d_1..d_N) of the single-excitation ansatz at one
/// instant: c_j for "atom j excited, field vacuum", d_n for "all atoms
/// ground, one photon in mode n".
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationState {
    atom_amplitudes: Vec<Complex64>,
    mode_amplitudes: Vec<Complex64>,
    time: f64,
}

impl ExcitationState {
    pub fn new(
        atom_amplitudes: Vec<Complex64>,
        mode_amplitudes: Vec<Complex64>,
        time: f64,
    ) -> Self {
        Self {
            atom_amplitudes,
            mode_amplitudes,
            time,
        }
    }

    pub fn atom_amplitudes(&self) -> &[Complex64] {
        &self.atom_amplitudes
    }

    pub fn mode_amplitudes(&self) -> &[Complex64] {
        &self.mode_amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn atom_count(&self) -> usize {
        self.atom_amplitudes.len()
    }

    pub fn mode_count(&self) -> usize {
        self.mode_amplitudes.len()
    }

    pub fn dimension(&self) -> usize {
        self.atom_amplitudes.len() + self.mode_amplitudes.len()
    }

    /// Total excitation number: sum |c_j|^2 + sum |d_n|^2. This is both the
    /// squared norm and the expectation of the excitation-number operator in
    /// this sector, so it must stay at 1 along any trajectory.
    pub fn excitation_number(&self) -> f64 {
        self.atom_amplitudes
            .iter()
            .chain(&self.mode_amplitudes)
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.excitation_number().sqrt()
    }

    /// Concatenated amplitude vector in the fixed slot order (atoms first,
    /// then modes).
    pub fn flat(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.dimension());
        v.extend_from_slice(&self.atom_amplitudes);
        v.extend_from_slice(&self.mode_amplitudes);
        v
    }

    pub fn from_flat(atom_count: usize, flat: &[Complex64], time: f64) -> Self {
        Self {
            atom_amplitudes: flat[..atom_count].to_vec(),
            mode_amplitudes: flat[atom_count..].to_vec(),
            time,
        }
    }
}

/// The initial state: the unique excited atom carries amplitude 1, the field
/// is in the vacuum, and t = 0.
pub fn initial_state(config: &SystemConfig) -> Result<ExcitationState> {
    let emitter = config.emitter_index()?;
    let mut atoms = vec![Complex64::ZERO; config.atom_count()];
    atoms[emitter] = Complex64::ONE;
    Ok(ExcitationState::new(
        atoms,
        vec![Complex64::ZERO; config.mode_count()],
        0.0,
    ))
}

/// Eigendecomposition of the restricted Hamiltonian, for exact evolution at
/// arbitrary times: state(t) = Phi exp(-i E t) Phi^T state(0).
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column k belonging to eigenvalues[k].
    eigenvectors: DMatrix<f64>,
    hamiltonian: RestrictedHamiltonian,
}

impl Propagator {
    /// Diagonalize the Hamiltonian. Eigenvalues come back ascending.
    ///
    /// The coupling graph is split into connected components first and each
    /// component is diagonalized on its own. Exactly decoupled slots (an
    /// even mode against a central atom, say) then stay *exactly* dark under
    /// evolution instead of picking up rounding-level amplitudes from the
    /// eigensolver, and the dense solve shrinks to the interacting block.
    pub fn diagonalize(hamiltonian: &RestrictedHamiltonian) -> Result<Self> {
        let dim = hamiltonian.dimension();
        for r in 0..dim {
            for c in r..dim {
                if !hamiltonian.matrix_element(r, c).is_finite() {
                    return Err(Error::NonFiniteMatrix { row: r, col: c });
                }
            }
        }

        let mut pairs: Vec<(f64, Vec<(usize, f64)>)> = Vec::with_capacity(dim);
        for slots in coupling_components(hamiltonian) {
            if slots.len() == 1 {
                let slot = slots[0];
                pairs.push((hamiltonian.matrix_element(slot, slot), vec![(slot, 1.0)]));
                continue;
            }
            let k = slots.len();
            let sub = DMatrix::from_fn(k, k, |r, c| hamiltonian.matrix_element(slots[r], slots[c]));
            let eig = sub
                .try_symmetric_eigen(f64::EPSILON, MAX_EIGEN_ITERATIONS)
                .ok_or(Error::Eigensolver { dim: k })?;
            for i in 0..k {
                let column = eig.eigenvectors.column(i);
                pairs.push((
                    eig.eigenvalues[i],
                    slots.iter().copied().zip(column.iter().copied()).collect(),
                ));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let eigenvalues: Vec<f64> = pairs.iter().map(|(e, _)| *e).collect();
        let mut eigenvectors = DMatrix::zeros(dim, dim);
        for (k, (_, entries)) in pairs.iter().enumerate() {
            for &(slot, value) in entries {
                eigenvectors[(slot, k)] = value;
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            hamiltonian: hamiltonian.clone(),
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn hamiltonian(&self) -> &RestrictedHamiltonian {
        &self.hamiltonian
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Evolve `s0` to each requested time. Times are evaluated
    /// independently through the eigenphases, so they may lie before the
    /// state time as well as after it; there is no step-size error to
    /// accumulate. Requesting the state's own time returns it unchanged.
    pub fn evolve(&self, s0: &ExcitationState, times: &[f64]) -> Result<Vec<ExcitationState>> {
        let dim = self.dimension();
        if s0.dimension() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s0.dimension(),
            });
        }
        let m = self.hamiltonian.atom_count();
        let flat0 = s0.flat();
        // Coefficients in the eigenbasis: w_k = Phi_k . x0.
        let mut coeffs = vec![Complex64::ZERO; dim];
        for (k, w) in coeffs.iter_mut().enumerate() {
            let col = self.eigenvectors.column(k);
            *w = col
                .iter()
                .zip(&flat0)
                .map(|(&phi, &x)| phi * x)
                .sum::<Complex64>();
        }
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let dt = t - s0.time();
            if dt == 0.0 {
                let mut s = s0.clone();
                s.time = t;
                out.push(s);
                continue;
            }
            let mut flat = vec![Complex64::ZERO; dim];
            for (k, &w) in coeffs.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -self.eigenvalues[k] * dt);
                let y = w * phase;
                let col = self.eigenvectors.column(k);
                for (x, &phi) in flat.iter_mut().zip(col.iter()) {
                    *x += phi * y;
                }
            }
            out.push(ExcitationState::from_flat(m, &flat, t));
        }
        Ok(out)
    }

    /// Convenience single-time evolution.
    pub fn state_at(&self, s0: &ExcitationState, time: f64) -> Result<ExcitationState> {
        Ok(self
            .evolve(s0, &[time])?
            .pop()
            .expect("one state requested"))
    }
}

/// Connected components of the coupling graph, each as an ascending slot
/// list; components ordered by their smallest slot. Atoms only ever connect
/// to modes, so every component is either a lone dark slot or a set of atoms
/// with the modes they talk to.
fn coupling_components(h: &RestrictedHamiltonian) -> Vec<Vec<usize>> {
    let m = h.atom_count();
    let dim = h.dimension();
    let mut parent: Vec<usize> = (0..dim).collect();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for j in 0..m {
        for i in 0..h.mode_count() {
            if h.couplings()[(j, i)] != 0.0 {
                let a = find(&mut parent, j);
                let b = find(&mut parent, m + i);
                if a != b {
                    let (lo, hi) = (a.min(b), a.max(b));
                    parent[hi] = lo;
                }
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for slot in 0..dim {
        let root = find(&mut parent, slot);
        groups.entry(root).or_default().push(slot);
    }
    groups.into_values().collect()
}

/// Integrate i dx/dt = H x with classic fourth-order Runge-Kutta steps of
/// size `dt`, splitting the final step of each span so every requested time
/// is hit exactly. Requested times must be ascending and must not precede
/// the initial state time. Aborts if the norm drifts by more than
/// [`RK_NORM_GUARD`].
pub fn evolve_rk(
    h: &RestrictedHamiltonian,
    s0: &ExcitationState,
    times: &[f64],
    dt: f64,
) -> Result<Vec<ExcitationState>> {
    let dim = h.dimension();
    if s0.dimension() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: s0.dimension(),
        });
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::NonPositiveStep(dt));
    }
    let mut previous = s0.time();
    for &t in times {
        if t < previous {
            return Err(Error::NonAscendingTimes);
        }
        previous = t;
    }

    let m = h.atom_count();
    let norm0 = s0.norm();
    let mut x = s0.flat();
    let mut work = RkWork::new(dim);
    let mut t = s0.time();
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let full_steps = (span / dt).floor() as u64;
        for _ in 0..full_steps {
            rk4_step(h, &mut x, dt, &mut work);
        }
        let tail = span - full_steps as f64 * dt;
        if tail > 0.0 {
            rk4_step(h, &mut x, tail, &mut work);
        }
        t = target;
        let norm = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - norm0).abs();
        if drift > RK_NORM_GUARD {
            return Err(Error::RkUnstable {
                time: t,
                drift,
                bound: RK_NORM_GUARD,
            });
        }
        out.push(ExcitationState::from_flat(m, &x, t));
    }
    Ok(out)
}

struct RkWork {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
}

impl RkWork {
    fn new(dim: usize) -> Self {
        Self {
            k1: vec![Complex64::ZERO; dim],
            k2: vec![Complex64::ZERO; dim],
            k3: vec![Complex64::ZERO; dim],
            k4: vec![Complex64::ZERO; dim],
            stage: vec![Complex64::ZERO; dim],
        }
    }
}

/// dx/dt = -i H x; out receives the right-hand side.
fn schrodinger_rhs(h: &RestrictedHamiltonian, x: &[Complex64], out: &mut [Complex64]) {
    h.apply(x, out);
    for v in out.iter_mut() {
        // multiply by -i
        *v = Complex64::new(v.im, -v.re);
    }
}

fn rk4_step(h: &RestrictedHamiltonian, x: &mut [Complex64], dt: f64, w: &mut RkWork) {
    let half = 0.5 * dt;
    schrodinger_rhs(h, x, &mut w.k1);
    for (stage, (&xi, &k)) in w.stage.iter_mut().zip(x.iter().zip(&w.k1)) {
        *stage = xi + half * k;
    }
    schrodinger_rhs(h, &w.stage, &mut w.k2);
    for (stage, (&xi, &k)) in w.stage.iter_mut().zip(x.iter().zip(&w.k2)) {
        *stage = xi + half * k;
    }
    schrodinger_rhs(h, &w.stage, &mut w.k3);
    for (stage, (&xi, &k)) in w.stage.iter_mut().zip(x.iter().zip(&w.k3)) {
        *stage = xi + dt * k;
    }
    schrodinger_rhs(h, &w.stage, &mut w.k4);
    let sixth = dt / 6.0;
    for (i, xi) in x.iter_mut().enumerate() {
        *xi += sixth * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    }
}

/// Which propagation backend to use.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Backend {
    #[default]
    Eigen,
    RungeKutta {
        dt: f64,
    },
}

impl Backend {
    pub fn evolve(
        &self,
        h: &RestrictedHamiltonian,
        s0: &ExcitationState,
        times: &[f64],
    ) -> Result<Vec<ExcitationState>> {
        match *self {
            Backend::Eigen => Propagator::diagonalize(h)?.evolve(s0, times),
            Backend::RungeKutta { dt } => evolve_rk(h, s0, times, dt),
        }
    }
}
