//! Reproduction of the reference figure set: each command bakes in the
//! parameters for one figure and emits its plottable table(s). All figures
//! share the reference cavity (L = 2 pi, omega_a = 100, omega_cut = 200,
//! g_a^2 = 1/2, Gamma_a = pi, t_R = 2 pi).

use std::f64::consts::PI;
use std::path::Path;

use cavity1d::dynamics::{initial_state, Propagator};
use cavity1d::master_eq::{free_atom_interaction_frame, reconstruct_eta};
use cavity1d::numeric::linspace;
use cavity1d::observables::{energy_density, SpatialGrid};
use cavity1d::scenarios::{build_crystal, run_ensemble, CrystalSpec, Placement};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::{fmt_float, write_table};
use crate::runner::{
    self, crystal_history, decay_population, emitter_for, lambda_a, modes_for, RunArtifacts,
};
use crate::CliError;

const TAU: f64 = 2.0 * PI;

pub const FIGURE_IDS: [&str; 9] = ["1", "2", "3", "4", "5", "6", "7", "7b", "8"];

/// Reproduce one figure into `out_dir`. `seed` feeds the random ensembles
/// of figure 5; the other figures are deterministic.
pub fn reproduce_figure(id: &str, out_dir: &Path, seed: u64) -> Result<RunArtifacts, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let files = match id {
        "1" => figure1(out_dir)?,
        "2" => figure2(out_dir)?,
        "3" => figure3(out_dir)?,
        "4" => figure4(out_dir)?,
        "5" => figure5(out_dir, seed)?,
        "6" => figure6(out_dir)?,
        "7" => figure7(out_dir)?,
        "7b" => figure7b(out_dir)?,
        "8" => figure8(out_dir)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown figure id `{other}` (expected one of {})",
                FIGURE_IDS.join(", ")
            )))
        }
    };
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
    })
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig::defaults(ExperimentKind::Decay)
}

fn figure_meta(figure: &str, description: &str) -> Vec<String> {
    vec![
        format!("# cavity1d {}", env!("CARGO_PKG_VERSION")),
        format!("# figure {figure}: {description}"),
        "# cavity: L = 2pi, omega_a = 100, omega_cut = 200, g_a_sq = 0.5".to_string(),
    ]
}

fn series_table(
    path: &Path,
    meta: &[String],
    axis: (&str, &[f64]),
    columns: &[(String, Vec<f64>)],
) -> Result<(), CliError> {
    let (axis_name, axis_values) = axis;
    let mut header = vec![axis_name.to_string()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    let rows: Vec<Vec<String>> = axis_values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut row = vec![fmt_float(x)];
            for (_, values) in columns {
                row.push(fmt_float(values[i]));
            }
            row
        })
        .collect();
    write_table(path, meta, &header, &rows)
}

/// Decay and first recurrences for emitter shifts 0, lambda/16, lambda/8,
/// lambda/4 off the cavity center.
fn figure1(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let config = base_config();
    let lambda = lambda_a(&config);
    let times = linspace(0.0, 2.0 * TAU, 1258);
    let center = config.atom_position;
    let mut columns = Vec::new();
    for (label, fraction) in [
        ("dr=0", 0.0),
        ("dr=lambda/16", 1.0 / 16.0),
        ("dr=lambda/8", 1.0 / 8.0),
        ("dr=lambda/4", 1.0 / 4.0),
    ] {
        let population = decay_population(&config, center + fraction * lambda, &times)?;
        columns.push((format!("P_e[{label}]"), population));
    }
    series_table(
        &out_dir.join("fig1_population.tsv"),
        &figure_meta(
            "1",
            "central-atom decay and Poincare recurrences vs emitter shift",
        ),
        ("t", &times),
        &columns,
    )?;
    Ok(vec!["fig1_population.tsv".to_string()])
}

/// Stroboscopic energy-density profiles for the central-atom decay.
fn figure2(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let config = base_config();
    let system = runner::single_atom_system(&config)?;
    let h = system.hamiltonian();
    let propagator = Propagator::diagonalize(&h)?;
    let s0 = initial_state(&system)?;
    let grid = SpatialGrid::uniform(&system.modes, config.grid_points);
    let strobe = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, TAU];
    let mut columns = Vec::new();
    for &t in &strobe {
        let state = propagator.state_at(&s0, t)?;
        let density = energy_density(&system.modes, &state, &grid)?;
        columns.push((format!("I[t={}]", fmt_float(t)), density));
    }
    series_table(
        &out_dir.join("fig2_energy_density.tsv"),
        &figure_meta("2", "space-time propagation of the field energy density"),
        ("r", grid.points()),
        &columns,
    )?;
    Ok(vec!["fig2_energy_density.tsv".to_string()])
}

/// Decay for emitters about one wavelength from a mirror, against the
/// central reference.
fn figure3(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let config = base_config();
    let lambda = lambda_a(&config);
    let times = linspace(0.0, 2.0, 501);
    let mut columns = Vec::new();
    for (label, position) in [
        ("r=center".to_string(), config.atom_position),
        ("r=lambda".to_string(), lambda),
        ("r=lambda+lambda/8".to_string(), lambda * (1.0 + 1.0 / 8.0)),
        ("r=lambda+lambda/4".to_string(), lambda * (1.0 + 1.0 / 4.0)),
    ] {
        let population = decay_population(&config, position, &times)?;
        columns.push((format!("P_e[{label}]"), population));
    }
    series_table(
        &out_dir.join("fig3_population.tsv"),
        &figure_meta(
            "3",
            "suppression and stimulation by a wave packet reflected nearby",
        ),
        ("t", &times),
        &columns,
    )?;
    Ok(vec!["fig3_population.tsv".to_string()])
}

/// Central-atom decay inside regular crystals of 101 atoms.
fn figure4(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let config = base_config();
    let lambda = lambda_a(&config);
    let times = linspace(0.0, 2.0 * TAU, 629);
    let mut columns = Vec::new();
    for (label, fraction) in [
        ("a=lambda/2", 0.5),
        ("a=lambda/4", 0.25),
        ("a=lambda/8", 0.125),
        ("a=lambda/16", 0.0625),
    ] {
        let (population, _) = crystal_history(&config, 101, fraction * lambda, false, &times)?;
        columns.push((format!("P_e[{label}]"), population));
    }
    let (stacked, _) = crystal_history(&config, 101, 0.0, true, &times)?;
    columns.push(("P_e[a=0]".to_string(), stacked));
    let single = decay_population(&config, config.atom_position, &times)?;
    columns.push(("P_e[M=1]".to_string(), single));
    series_table(
        &out_dir.join("fig4_population.tsv"),
        &figure_meta(
            "4",
            "decay of the central atom in a regular linear crystal, M = 101",
        ),
        ("t", &times),
        &columns,
    )?;
    Ok(vec!["fig4_population.tsv".to_string()])
}

/// Random crystals averaged over 100 configurations against the regular
/// references. The heavy figure: ~300 diagonalizations at dimension 501.
fn figure5(out_dir: &Path, seed: u64) -> Result<Vec<String>, CliError> {
    let config = base_config();
    let lambda = lambda_a(&config);
    let modes = modes_for(&config)?;
    let emitter = emitter_for(&config);
    let times = linspace(0.0, 2.0 * TAU, 315);
    let mut columns = Vec::new();
    for (label, fraction) in [("lambda/8", 0.125), ("lambda/4", 0.25), ("lambda/2", 0.5)] {
        let spec = CrystalSpec {
            atom_count: 101,
            lattice_constant: fraction * lambda,
            placement: Placement::RandomPerCell,
            center: config.atom_position,
            seed,
            pin_emitter: true,
        };
        let ensemble = run_ensemble(
            &spec,
            &emitter,
            &modes,
            config.coupling.to_model(),
            100,
            &times,
            seed,
            config.backend_for_run(),
            false,
        )?;
        columns.push((format!("mean_P_e[<a>={label}]"), ensemble.mean_population));
        let (regular, _) = crystal_history(&config, 101, fraction * lambda, false, &times)?;
        columns.push((format!("P_e[a={label}]"), regular));
    }
    let single = decay_population(&config, config.atom_position, &times)?;
    columns.push(("P_e[M=1]".to_string(), single));
    series_table(
        &out_dir.join("fig5_population.tsv"),
        &figure_meta(
            "5",
            "random crystals averaged over 100 seeded configurations",
        ),
        ("t", &times),
        &columns,
    )?;
    Ok(vec!["fig5_population.tsv".to_string()])
}

/// Total atomic excitation R_atoms for crystals of 11, 21, 101 atoms at
/// a = lambda/4.
fn figure6(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let config = base_config();
    let lambda = lambda_a(&config);
    let times = linspace(0.0, 2.0 * TAU, 629);
    let mut columns = Vec::new();
    for m in [11usize, 21, 101] {
        let (_, r_atoms) = crystal_history(&config, m, lambda / 4.0, false, &times)?;
        columns.push((format!("R_atoms[M={m}]"), r_atoms));
    }
    series_table(
        &out_dir.join("fig6_r_atoms.tsv"),
        &figure_meta(
            "6",
            "excitation retained by the crystal atoms, a = lambda/4",
        ),
        ("t", &times),
        &columns,
    )?;
    Ok(vec!["fig6_r_atoms.tsv".to_string()])
}

/// Transient mode spectra and the eigenstate overlap spectrum.
fn figure7(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let mut config = base_config();
    config.kind = ExperimentKind::Spectrum;
    config.sample_times = vec![0.3, 0.7, 1.0, 3.0];
    let meta = figure_meta("7", "transient mode spectra and eigenstate overlaps");
    runner::write_spectrum_tables(&config, out_dir, "fig7_", &meta)
}

/// Analyzer-atom absorption spectra against the mode-spectrum envelopes.
fn figure7b(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let mut config = base_config();
    config.kind = ExperimentKind::Analyzer;
    config.read_times = vec![0.3, 2.0];
    let meta = figure_meta("7b", "analyzer-atom readout vs the mode-spectrum envelope");
    runner::write_analyzer_tables(&config, out_dir, "fig7b_", &meta)
}

/// Reconstructed time-dependent decay rate for the lone atom and for the
/// atom inside the a = lambda/8 crystal.
fn figure8(out_dir: &Path) -> Result<Vec<String>, CliError> {
    let config = base_config();
    let lambda = lambda_a(&config);
    let times = linspace(0.0, 2.0 * TAU, 2515);
    let omega_a = config.omega_a;

    let single_system = runner::single_atom_system(&config)?;
    let h = single_system.hamiltonian();
    let s0 = initial_state(&single_system)?;
    let states = Propagator::diagonalize(&h)?.evolve(&s0, &times)?;
    let single_trace = free_atom_interaction_frame(&reconstruct_eta(&h, &states, 0)?, omega_a);

    let modes = modes_for(&config)?;
    let spec = CrystalSpec::regular(101, lambda / 8.0, config.atom_position);
    let crystal = build_crystal(
        &spec,
        &emitter_for(&config),
        &modes,
        config.coupling.to_model(),
    )?;
    let h = crystal.hamiltonian();
    let s0 = initial_state(&crystal)?;
    let states = Propagator::diagonalize(&h)?.evolve(&s0, &times)?;
    let crystal_trace =
        free_atom_interaction_frame(&reconstruct_eta(&h, &states, spec.center_slot())?, omega_a);

    let header = vec![
        "t".to_string(),
        "Gamma_single".to_string(),
        "delta_single".to_string(),
        "valid_single".to_string(),
        "Gamma_crystal".to_string(),
        "delta_crystal".to_string(),
        "valid_crystal".to_string(),
    ];
    let rows: Vec<Vec<String>> = (0..times.len())
        .map(|i| {
            vec![
                fmt_float(times[i]),
                fmt_float(single_trace.gamma()[i]),
                fmt_float(single_trace.delta()[i]),
                if single_trace.valid()[i] { "1" } else { "0" }.to_string(),
                fmt_float(crystal_trace.gamma()[i]),
                fmt_float(crystal_trace.delta()[i]),
                if crystal_trace.valid()[i] { "1" } else { "0" }.to_string(),
            ]
        })
        .collect();
    write_table(
        &out_dir.join("fig8_gamma.tsv"),
        &figure_meta(
            "8",
            "time-dependent decay rate, single atom and a = lambda/8 crystal",
        ),
        &header,
        &rows,
    )?;
    Ok(vec!["fig8_gamma.tsv".to_string()])
}
