//! Assemble core objects from an [`ExperimentConfig`], run the experiment,
//! and write one delimited table per observable family plus a manifest that
//! regenerates the run.

use std::path::{Path, PathBuf};

use cavity1d::dynamics::{initial_state, ExcitationState, Propagator};
use cavity1d::master_eq::{free_atom_interaction_frame, reconstruct_eta_with_threshold};
use cavity1d::model::{resonant_wavelength, AtomSpec, ModeBasis, SystemConfig};
use cavity1d::numeric::linspace;
use cavity1d::observables::{
    atomic_population, field_spectrum, overlap_spectrum, population_series, total_atomic_excitation,
};
use cavity1d::scenarios::{
    analyzer_spectrum, build_analyzer_bank, build_crystal, run_ensemble, run_position_sweep,
    AnalyzerBank, CrystalSpec,
};

use crate::config::{ExperimentConfig, ExperimentKind, FrameChoice};
use crate::output::{fmt_float, write_table};
use crate::CliError;

/// Where a finished run left its data.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub files: Vec<String>,
}

pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let files = match config.kind {
        ExperimentKind::Decay => run_decay(config, out_dir)?,
        ExperimentKind::Sweep => run_sweep(config, out_dir)?,
        ExperimentKind::Crystal => run_crystal(config, out_dir)?,
        ExperimentKind::Ensemble => run_ensemble_kind(config, out_dir)?,
        ExperimentKind::Spectrum => run_spectrum(config, out_dir)?,
        ExperimentKind::Analyzer => run_analyzer(config, out_dir)?,
        ExperimentKind::MasterEq => run_master_eq(config, out_dir)?,
    };
    write_manifest(config, out_dir, &files)?;
    let mut files = files;
    files.push(MANIFEST_NAME.to_string());
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
    })
}

pub const MANIFEST_NAME: &str = "manifest.txt";

/// The manifest is the resolved config document itself (plus comment
/// lines), so rerunning the matching subcommand with `--config manifest.txt`
/// regenerates every output byte for byte.
fn write_manifest(
    config: &ExperimentConfig,
    out_dir: &Path,
    files: &[String],
) -> Result<(), CliError> {
    let mut content = format!("# cavity1d {}\n", env!("CARGO_PKG_VERSION"));
    for file in files {
        content.push_str(&format!("# output: {file}\n"));
    }
    content.push_str(&config.to_document());
    crate::output::atomic_write(&out_dir.join(MANIFEST_NAME), &content)
}

fn metadata(config: &ExperimentConfig) -> Vec<String> {
    let mut lines = vec![format!("# cavity1d {}", env!("CARGO_PKG_VERSION"))];
    for line in config.to_document().lines() {
        lines.push(format!("# {line}"));
    }
    lines
}

pub fn modes_for(config: &ExperimentConfig) -> Result<ModeBasis, CliError> {
    Ok(ModeBasis::new(config.cavity_length, config.omega_cut)?)
}

pub fn emitter_for(config: &ExperimentConfig) -> AtomSpec {
    AtomSpec::emitter(config.atom_position, config.omega_a, config.g_a_sq.sqrt())
}

pub fn single_atom_system(config: &ExperimentConfig) -> Result<SystemConfig, CliError> {
    Ok(SystemConfig::new(
        modes_for(config)?,
        vec![emitter_for(config)],
        config.coupling.to_model(),
    )?)
}

pub fn time_grid(config: &ExperimentConfig) -> Vec<f64> {
    linspace(0.0, config.t_max, config.n_samples)
}

fn crystal_spec(config: &ExperimentConfig) -> CrystalSpec {
    CrystalSpec {
        atom_count: config.atom_count,
        lattice_constant: config.lattice_constant,
        placement: config.placement.to_placement(),
        center: config.atom_position,
        seed: config.seed,
        pin_emitter: config.pin_emitter,
    }
}

fn run_decay(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    let system = single_atom_system(config)?;
    let s0 = initial_state(&system)?;
    let times = time_grid(config);
    let states = config
        .backend_for_run()
        .evolve(&system.hamiltonian(), &s0, &times)?;
    let populations = population_series(&states, 0)?;
    let rows: Vec<Vec<String>> = times
        .iter()
        .zip(&populations)
        .map(|(&t, &p)| vec![fmt_float(t), fmt_float(p)])
        .collect();
    write_table(
        &out_dir.join("population.tsv"),
        &metadata(config),
        &["t".to_string(), "P_e".to_string()],
        &rows,
    )?;
    Ok(vec!["population.tsv".to_string()])
}

fn run_sweep(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    let system = single_atom_system(config)?;
    let times = time_grid(config);
    let sweep = run_position_sweep(&system, &config.offsets, &times, config.backend_for_run())?;
    let mut header = vec!["t".to_string()];
    for point in &sweep {
        header.push(format!("P_e[dr={}]", fmt_float(point.offset)));
    }
    let rows: Vec<Vec<String>> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![fmt_float(t)];
            for point in &sweep {
                row.push(fmt_float(point.population[i]));
            }
            row
        })
        .collect();
    write_table(
        &out_dir.join("sweep.tsv"),
        &metadata(config),
        &header,
        &rows,
    )?;
    Ok(vec!["sweep.tsv".to_string()])
}

fn run_crystal(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    let modes = modes_for(config)?;
    let spec = crystal_spec(config);
    let system = build_crystal(
        &spec,
        &emitter_for(config),
        &modes,
        config.coupling.to_model(),
    )?;
    let s0 = initial_state(&system)?;
    let times = time_grid(config);
    let states = config
        .backend_for_run()
        .evolve(&system.hamiltonian(), &s0, &times)?;
    let center = spec.center_slot();
    let population = population_series(&states, center)?;
    let r_atoms: Vec<f64> = states.iter().map(total_atomic_excitation).collect();

    let rows: Vec<Vec<String>> = times
        .iter()
        .zip(&population)
        .map(|(&t, &p)| vec![fmt_float(t), fmt_float(p)])
        .collect();
    write_table(
        &out_dir.join("population.tsv"),
        &metadata(config),
        &["t".to_string(), "P_e".to_string()],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = times
        .iter()
        .zip(&r_atoms)
        .map(|(&t, &r)| vec![fmt_float(t), fmt_float(r)])
        .collect();
    write_table(
        &out_dir.join("r_atoms.tsv"),
        &metadata(config),
        &["t".to_string(), "R_atoms".to_string()],
        &rows,
    )?;
    Ok(vec![
        "population.tsv".to_string(),
        "r_atoms.tsv".to_string(),
    ])
}

fn run_ensemble_kind(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    let modes = modes_for(config)?;
    let mut spec = crystal_spec(config);
    spec.placement = cavity1d::scenarios::Placement::RandomPerCell;
    let times = time_grid(config);
    let result = run_ensemble(
        &spec,
        &emitter_for(config),
        &modes,
        config.coupling.to_model(),
        config.n_configs,
        &times,
        config.seed,
        config.backend_for_run(),
        config.keep_members,
    )?;

    let mut meta = metadata(config);
    meta.push(format!(
        "# member_streams = {}",
        result
            .member_streams
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    ));
    let rows: Vec<Vec<String>> = times
        .iter()
        .zip(&result.mean_population)
        .map(|(&t, &p)| vec![fmt_float(t), fmt_float(p)])
        .collect();
    write_table(
        &out_dir.join("ensemble_mean.tsv"),
        &meta,
        &["t".to_string(), "mean_P_e".to_string()],
        &rows,
    )?;
    let mut files = vec!["ensemble_mean.tsv".to_string()];

    if let Some(members) = &result.member_population {
        let mut header = vec!["t".to_string()];
        for stream in &result.member_streams {
            header.push(format!("P_e[stream={stream}]"));
        }
        let rows: Vec<Vec<String>> = times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut row = vec![fmt_float(t)];
                for member in members {
                    row.push(fmt_float(member[i]));
                }
                row
            })
            .collect();
        write_table(&out_dir.join("members.tsv"), &meta, &header, &rows)?;
        files.push("members.tsv".to_string());
    }
    Ok(files)
}

fn run_spectrum(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    write_spectrum_tables(config, out_dir, "", &metadata(config))
}

/// Spectrum + overlap tables, shared between the `spectrum` experiment and
/// figure 7 (which prefixes the file names).
pub fn write_spectrum_tables(
    config: &ExperimentConfig,
    out_dir: &Path,
    prefix: &str,
    meta: &[String],
) -> Result<Vec<String>, CliError> {
    let system = single_atom_system(config)?;
    let h = system.hamiltonian();
    let propagator = Propagator::diagonalize(&h)?;
    let s0 = initial_state(&system)?;
    let states = propagator.evolve(&s0, &config.sample_times)?;

    let mut header = vec!["n".to_string(), "omega".to_string()];
    for state in &states {
        header.push(format!("S[t={}]", fmt_float(state.time())));
    }
    let spectra: Vec<_> = states
        .iter()
        .map(|s| field_spectrum(&system.modes, s))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = (0..system.mode_count())
        .map(|i| {
            let mut row = vec![
                (i + 1).to_string(),
                fmt_float(system.modes.frequencies()[i]),
            ];
            for spectrum in &spectra {
                row.push(fmt_float(spectrum[i].occupation));
            }
            row
        })
        .collect();
    let spectrum_name = format!("{prefix}spectrum.tsv");
    write_table(&out_dir.join(&spectrum_name), meta, &header, &rows)?;

    let overlaps = overlap_spectrum(&propagator, &s0)?;
    let rows: Vec<Vec<String>> = overlaps
        .iter()
        .enumerate()
        .map(|(k, &(energy, weight))| vec![k.to_string(), fmt_float(energy), fmt_float(weight)])
        .collect();
    let overlap_name = format!("{prefix}overlap.tsv");
    write_table(
        &out_dir.join(&overlap_name),
        meta,
        &["k".to_string(), "E_k".to_string(), "S_e".to_string()],
        &rows,
    )?;
    Ok(vec![spectrum_name, overlap_name])
}

fn run_analyzer(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    write_analyzer_tables(config, out_dir, "", &metadata(config))
}

/// Mode-envelope + analyzer-readout tables, shared between the `analyzer`
/// experiment and figure 7b.
pub fn write_analyzer_tables(
    config: &ExperimentConfig,
    out_dir: &Path,
    prefix: &str,
    meta: &[String],
) -> Result<Vec<String>, CliError> {
    let base = single_atom_system(config)?;
    let gamma_a = cavity1d::model::golden_rule_rate(&base.modes, config.g_a_sq.sqrt());
    let bank = AnalyzerBank {
        count: config.analyzer_count,
        offset: config.analyzer_offset,
        gamma_ratio: config.gamma_ratio,
        span: config.span_gammas * gamma_a,
    };
    let system = build_analyzer_bank(&bank, &base)?;
    let h = system.hamiltonian();
    let propagator = Propagator::diagonalize(&h)?;
    let s0 = initial_state(&system)?;
    let time_of_flight = config.analyzer_offset.abs();

    // Mode-spectrum envelope (normalized to unit peak) at each read time.
    let mode_states = propagator.evolve(&s0, &config.read_times)?;
    let envelopes: Vec<Vec<f64>> = mode_states
        .iter()
        .map(|state| normalized_envelope(&system, state))
        .collect::<Result<Vec<_>, _>>()?;
    let envelope_modes: Vec<usize> = coupled_mode_indices(&system)?;
    let mut header = vec!["omega".to_string()];
    for state in &mode_states {
        header.push(format!("S_norm[t={}]", fmt_float(state.time())));
    }
    let rows: Vec<Vec<String>> = envelope_modes
        .iter()
        .enumerate()
        .map(|(row_idx, &mode_idx)| {
            let mut row = vec![fmt_float(system.modes.frequencies()[mode_idx])];
            for envelope in &envelopes {
                row.push(fmt_float(envelope[row_idx]));
            }
            row
        })
        .collect();
    let mode_name = format!("{prefix}mode_spectrum.tsv");
    write_table(&out_dir.join(&mode_name), meta, &header, &rows)?;

    // Analyzer readout at each read time + time of flight.
    let readout_times: Vec<f64> = config
        .read_times
        .iter()
        .map(|&t| t + time_of_flight)
        .collect();
    let readout_states = propagator.evolve(&s0, &readout_times)?;
    let readouts: Vec<_> = readout_states
        .iter()
        .map(|state| analyzer_spectrum(&system, state))
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["omega".to_string()];
    for readout in &readouts {
        header.push(format!("A_norm[t={}]", fmt_float(readout.time)));
    }
    let rows: Vec<Vec<String>> = (0..config.analyzer_count)
        .map(|i| {
            let mut row = vec![fmt_float(readouts[0].frequencies[i])];
            for readout in &readouts {
                row.push(fmt_float(readout.normalized[i]));
            }
            row
        })
        .collect();
    let analyzer_name = format!("{prefix}analyzer_spectrum.tsv");
    write_table(&out_dir.join(&analyzer_name), meta, &header, &rows)?;
    Ok(vec![mode_name, analyzer_name])
}

/// 0-based indices of the modes coupled to the emitter.
fn coupled_mode_indices(system: &SystemConfig) -> Result<Vec<usize>, CliError> {
    let emitter = system.emitter_index()?;
    let couplings = system.coupling_matrix();
    Ok((0..system.mode_count())
        .filter(|&i| couplings[(emitter, i)] != 0.0)
        .collect())
}

/// Envelope occupations (coupled modes only), normalized to unit peak.
fn normalized_envelope(
    system: &SystemConfig,
    state: &ExcitationState,
) -> Result<Vec<f64>, CliError> {
    let envelope = cavity1d::observables::spectrum_envelope(system, state)?;
    let peak = envelope.iter().map(|r| r.occupation).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Ok(envelope.iter().map(|_| 0.0).collect());
    }
    Ok(envelope.iter().map(|r| r.occupation / peak).collect())
}

fn run_master_eq(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<String>, CliError> {
    let system = single_atom_system(config)?;
    let h = system.hamiltonian();
    let s0 = initial_state(&system)?;
    let times = time_grid(config);
    let states = config.backend_for_run().evolve(&h, &s0, &times)?;
    let mut trace = reconstruct_eta_with_threshold(&h, &states, 0, config.c1_threshold)?;
    if config.frame == FrameChoice::Interaction {
        trace = free_atom_interaction_frame(&trace, config.omega_a);
    }
    let rows: Vec<Vec<String>> = (0..trace.len())
        .map(|i| {
            vec![
                fmt_float(trace.times()[i]),
                fmt_float(trace.gamma()[i]),
                fmt_float(trace.delta()[i]),
                if trace.valid()[i] { "1" } else { "0" }.to_string(),
            ]
        })
        .collect();
    write_table(
        &out_dir.join("master_eq.tsv"),
        &metadata(config),
        &[
            "t".to_string(),
            "Gamma".to_string(),
            "delta".to_string(),
            "valid".to_string(),
        ],
        &rows,
    )?;
    Ok(vec!["master_eq.tsv".to_string()])
}

/// Shared helper for figure reproduction: emitter population under a plain
/// decay at an arbitrary emitter position.
pub fn decay_population(
    config: &ExperimentConfig,
    position: f64,
    times: &[f64],
) -> Result<Vec<f64>, CliError> {
    let modes = modes_for(config)?;
    let atom = AtomSpec::emitter(position, config.omega_a, config.g_a_sq.sqrt());
    let system = SystemConfig::new(modes, vec![atom], config.coupling.to_model())?;
    let s0 = initial_state(&system)?;
    let states = config
        .backend_for_run()
        .evolve(&system.hamiltonian(), &s0, times)?;
    Ok(population_series(&states, 0)?)
}

/// Shared helper for figure reproduction: central population and total
/// atomic excitation of a regular crystal.
pub fn crystal_history(
    config: &ExperimentConfig,
    atom_count: usize,
    lattice_constant: f64,
    stacked: bool,
    times: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let modes = modes_for(config)?;
    let spec = if stacked {
        CrystalSpec::stacked(atom_count, config.atom_position)
    } else {
        CrystalSpec::regular(atom_count, lattice_constant, config.atom_position)
    };
    let system = build_crystal(
        &spec,
        &emitter_for(config),
        &modes,
        config.coupling.to_model(),
    )?;
    let s0 = initial_state(&system)?;
    let states = config
        .backend_for_run()
        .evolve(&system.hamiltonian(), &s0, times)?;
    let population = population_series(&states, spec.center_slot())?;
    let r_atoms = states.iter().map(total_atomic_excitation).collect();
    Ok((population, r_atoms))
}

/// Lambda of the configured emitter, the length unit of most scenarios.
pub fn lambda_a(config: &ExperimentConfig) -> f64 {
    resonant_wavelength(config.omega_a)
}

/// Population of atom `j` for an explicit system, on a shared grid.
pub fn population_for(
    system: &SystemConfig,
    config: &ExperimentConfig,
    j: usize,
    times: &[f64],
) -> Result<Vec<f64>, CliError> {
    let s0 = initial_state(system)?;
    let states = config
        .backend_for_run()
        .evolve(&system.hamiltonian(), &s0, times)?;
    Ok(population_series(&states, j)?)
}

/// One emitter population value at one instant, eig backend.
pub fn population_at(system: &SystemConfig, j: usize, time: f64) -> Result<f64, CliError> {
    let s0 = initial_state(system)?;
    let p = Propagator::diagonalize(&system.hamiltonian())?;
    let state = p.state_at(&s0, time)?;
    Ok(atomic_population(&state, j)?)
}
