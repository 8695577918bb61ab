//! Experiment pipelines behind the subcommands.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use pathint_core::action::{
    abbreviated_action, classical_energy, classical_path, euler_lagrange_residual, path_action,
    stationarity_exponent,
};
use pathint_core::doubleslit::{fringe_visibility, screen_pattern, PatternMode};
use pathint_core::io as core_io;
use pathint_core::kernel::{build_propagator, classical_phase_check, kernel_evolve};
use pathint_core::schrodinger::{evolve, evolve_recorded};
use pathint_core::validation::{self, ConvergenceRow};
use pathint_core::{Error as CoreError, Hole, WaveFunction};

use crate::config::{
    fingerprint, ExperimentConfig, ExperimentKind, Method, ModeConfig, OutputFormat, StateConfig,
};
use crate::manifest::Manifest;
use crate::CliError;

pub struct RunOutcome {
    pub manifest: Manifest,
    /// Set when the validation suite ran and failed; maps to exit code 4.
    pub suite_failed: bool,
}

/// Dispatch one experiment into `out_dir`.
pub fn run(
    config: &ExperimentConfig,
    out_dir: &Path,
    format_override: Option<OutputFormat>,
    seed: Option<u64>,
) -> Result<RunOutcome, CliError> {
    std::fs::create_dir_all(out_dir)?;
    let format = format_override.unwrap_or(config.output.format);
    let mut manifest = Manifest::new(
        config.experiment.to_string(),
        fingerprint(config.canonical_json().as_bytes()),
        seed,
        match format {
            OutputFormat::Csv => "csv".into(),
            OutputFormat::Json => "json".into(),
        },
    );
    if seed.is_some() {
        manifest.note("seed is reserved; no stochastic component uses it yet");
    }

    let mut suite_failed = false;
    match config.experiment {
        ExperimentKind::Propagate => run_propagate(config, out_dir, format, &mut manifest)?,
        ExperimentKind::Doubleslit => run_doubleslit(config, out_dir, format, &mut manifest)?,
        ExperimentKind::ClassicalLimit => run_classical_limit(config, &mut manifest)?,
        ExperimentKind::ActionCheck => run_action_check(config, out_dir, &mut manifest)?,
        ExperimentKind::Validate => {
            suite_failed = !run_validate(config, out_dir, format, &mut manifest)?
        }
    }

    manifest.write(out_dir)?;
    Ok(RunOutcome {
        manifest,
        suite_failed,
    })
}

fn writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_state(
    out_dir: &Path,
    stem: &str,
    format: OutputFormat,
    psi: &WaveFunction,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let name = match format {
        OutputFormat::Csv => format!("{stem}.csv"),
        OutputFormat::Json => format!("{stem}.json"),
    };
    let mut w = writer(&out_dir.join(&name))?;
    match format {
        OutputFormat::Csv => {
            core_io::write_wavefunction_csv(&mut w, psi).map_err(CliError::guard)?
        }
        OutputFormat::Json => {
            core_io::write_wavefunction_json(&mut w, psi).map_err(CliError::guard)?
        }
    }
    manifest.artifact(&name);
    Ok(())
}

fn run_propagate(
    config: &ExperimentConfig,
    out_dir: &Path,
    format: OutputFormat,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let section = config.propagate.clone().unwrap_or_default();
    let constants = config.constants()?;
    let grid = section.grid.build()?;
    let slicing = section.slicing.build()?;
    let potential = section.potential.build()?;

    let run_kernel = matches!(section.method, Method::Kernel | Method::Both);
    if run_kernel || section.emit_propagator {
        // fail before writing anything if the lattice cannot resolve the
        // kernel oscillation
        let coupling =
            pathint_core::kernel::stability_coupling(&grid, slicing.epsilon(), &constants);
        if coupling >= std::f64::consts::PI {
            return Err(CliError::Guard(
                pathint_core::Error::StabilityGuard {
                    coupling,
                    dx: grid.spacing(),
                    epsilon: slicing.epsilon(),
                }
                .to_string(),
            ));
        }
    }

    let psi0 = match section.initial_state {
        StateConfig::Gaussian {
            center,
            width,
            momentum,
        } => WaveFunction::gaussian(grid, center, width, momentum).map_err(CliError::guard)?,
        StateConfig::Delta { node } => WaveFunction::delta(grid, node).map_err(CliError::guard)?,
    };
    write_state(out_dir, "initial", format, &psi0, manifest)?;
    manifest.metric("initial_norm", psi0.norm());

    let run_cn = matches!(section.method, Method::Cn | Method::Both);

    let mut kernel_final = None;
    if run_kernel {
        let state =
            kernel_evolve(&psi0, &potential, slicing, &constants).map_err(CliError::guard)?;
        manifest.metric("kernel_final_norm", state.norm());
        manifest.metric("kernel_final_width", state.position_spread());
        write_state(out_dir, "final_kernel", format, &state, manifest)?;
        kernel_final = Some(state);
    }
    if run_cn {
        let state = if section.record_every > 0 {
            let traj = evolve_recorded(
                &psi0,
                &potential,
                slicing.t_a(),
                slicing.t_b(),
                section.cn_steps,
                &constants,
                section.record_every,
            )
            .map_err(CliError::guard)?;
            let mut w = writer(&out_dir.join("trajectory_cn.csv"))?;
            core_io::write_trajectory_csv(&mut w, &traj).map_err(CliError::guard)?;
            manifest.artifact("trajectory_cn.csv");
            traj.states.last().expect("trajectory has states").clone()
        } else {
            evolve(
                &psi0,
                &potential,
                slicing.t_a(),
                slicing.t_b(),
                section.cn_steps,
                &constants,
            )
            .map_err(CliError::guard)?
        };
        manifest.metric("cn_final_norm", state.norm());
        manifest.metric("cn_final_width", state.position_spread());
        write_state(out_dir, "final_cn", format, &state, manifest)?;

        if let Some(kernel_state) = &kernel_final {
            let discrepancy = kernel_state
                .difference_norm(&state)
                .map_err(CliError::guard)?
                / psi0.norm();
            manifest.metric("kernel_vs_cn_discrepancy", discrepancy);
        }
    }

    if section.emit_propagator {
        let k = build_propagator(
            grid,
            slicing.t_a(),
            slicing.epsilon(),
            &potential,
            &constants,
        )
        .map_err(CliError::guard)?;
        let mut w = writer(&out_dir.join("propagator.json"))?;
        core_io::write_propagator_json(&mut w, &k).map_err(CliError::guard)?;
        manifest.artifact("propagator.json");
        manifest.note("propagator.json holds the one-slice kernel of the configured slicing");
    }
    Ok(())
}

fn run_doubleslit(
    config: &ExperimentConfig,
    out_dir: &Path,
    format: OutputFormat,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let section = config.doubleslit.clone().unwrap_or_default();
    let constants = config.constants()?;
    let geometry = section.geometry()?;
    let mode = match section.mode {
        ModeConfig::Coherent => PatternMode::Coherent,
        ModeConfig::Measured => PatternMode::Measured,
        ModeConfig::Hole1 => PatternMode::SingleHole(Hole::One),
        ModeConfig::Hole2 => PatternMode::SingleHole(Hole::Two),
        ModeConfig::Mixed(f) => PatternMode::Mixed(f),
    };
    let pattern = screen_pattern(&geometry, mode, &constants).map_err(CliError::guard)?;

    let name = match format {
        OutputFormat::Csv => "pattern.csv",
        OutputFormat::Json => "pattern.json",
    };
    let mut w = writer(&out_dir.join(name))?;
    match format {
        OutputFormat::Csv => {
            core_io::write_pattern_csv(&mut w, &pattern).map_err(CliError::guard)?
        }
        OutputFormat::Json => {
            core_io::write_pattern_json(&mut w, &pattern).map_err(CliError::guard)?
        }
    }
    manifest.artifact(name);

    let dx = pattern.grid().spacing();
    let total: f64 = pattern.values().iter().sum::<f64>() * dx;
    manifest.metric("total_probability", total);
    manifest.metric("rows", pattern.values().len() as f64);
    match fringe_visibility(&pattern, section.window) {
        Ok(vis) => manifest.metric("window_visibility", vis),
        Err(CoreError::DegenerateWindow { reason }) => {
            manifest.note(format!("visibility skipped: {reason}"));
        }
        Err(other) => return Err(CliError::guard(other)),
    }
    Ok(())
}

fn run_classical_limit(config: &ExperimentConfig, manifest: &mut Manifest) -> Result<(), CliError> {
    let section = config.classical_limit.clone().unwrap_or_default();
    let constants = config.constants()?;
    let potential = section.potential.build()?;
    let slicing = section.slicing.build()?;

    let exponent = stationarity_exponent(
        &potential,
        section.x_a,
        section.x_b,
        slicing,
        &constants,
        |tau| (std::f64::consts::PI * tau).sin(),
        &section.amplitudes,
    )
    .map_err(CliError::guard)?;
    manifest.metric("stationarity_exponent", exponent);
    manifest.check(
        "exponent_is_quadratic",
        (exponent - 2.0).abs() < validation::EXPONENT_CLASSICAL_TOL,
    );

    let phase_grid = section.phase_grid.build()?;
    let phase_slicing = pathint_core::TimeSlicing::new(
        section.slicing.t_a,
        section.slicing.t_b,
        section.phase_slices,
    )
    .map_err(CliError::guard)?;
    let check = classical_phase_check(
        &potential,
        section.x_a,
        section.x_b,
        phase_slicing,
        phase_grid,
        &constants,
    )
    .map_err(CliError::guard)?;
    manifest.metric("lattice_phase", check.lattice_phase);
    manifest.metric("action_over_hbar", check.action_over_hbar);
    manifest.metric("phase_difference_rad", check.wrapped_difference);
    manifest.check(
        "phase_matches_action",
        check.wrapped_difference.abs() < validation::PHASE_TOL_RAD,
    );
    Ok(())
}

fn run_action_check(
    config: &ExperimentConfig,
    out_dir: &Path,
    manifest: &mut Manifest,
) -> Result<(), CliError> {
    let section = config.action_check.clone().unwrap_or_default();
    let constants = config.constants()?;
    let potential = section.potential.build()?;
    let slicing = section.slicing.build()?;

    let path = classical_path(&potential, section.x_a, section.x_b, slicing, &constants)
        .map_err(CliError::guard)?;
    {
        let mut w = writer(&out_dir.join("classical_path.csv"))?;
        core_io::write_path_csv(&mut w, &path).map_err(CliError::guard)?;
        manifest.artifact("classical_path.csv");
    }
    let s = path_action(&path, &potential, &constants)
        .map_err(CliError::guard)?
        .value();
    let s0 = abbreviated_action(&path, &constants).value();
    let energy = classical_energy(&potential, section.x_a, section.x_b, slicing, &constants)
        .map_err(CliError::guard)?;
    let defect = (s - (s0 - energy * slicing.duration())).abs();
    manifest.metric("action", s);
    manifest.metric("abbreviated_action", s0);
    manifest.metric("energy", energy);
    manifest.metric("maupertuis_defect", defect);
    manifest.check("maupertuis_identity", defect < validation::MAUPERTUIS_ABS);

    let mut rows = Vec::new();
    for &n in &section.residual_levels {
        let level_slicing =
            pathint_core::TimeSlicing::new(section.slicing.t_a, section.slicing.t_b, n)
                .map_err(CliError::guard)?;
        let level_path = classical_path(
            &potential,
            section.x_a,
            section.x_b,
            level_slicing,
            &constants,
        )
        .map_err(CliError::guard)?;
        let residuals = euler_lagrange_residual(&level_path, &potential, &constants)
            .map_err(CliError::guard)?;
        let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        manifest.metric(&format!("max_residual_n{n}"), max);
        rows.push((n, level_slicing.epsilon(), max));
    }
    let decreasing = rows.windows(2).all(|p| p[1].2 < p[0].2);
    manifest.check("residual_decreases_under_refinement", decreasing);

    use std::io::Write;
    let mut w = writer(&out_dir.join("residuals.csv"))?;
    writeln!(w, "n_slices,epsilon,max_residual")?;
    for (n, eps, max) in rows {
        writeln!(w, "{n},{},{}", core_io::fmt_f64(eps), core_io::fmt_f64(max))?;
    }
    manifest.artifact("residuals.csv");
    Ok(())
}

fn write_convergence_csv(out_dir: &Path, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    use std::io::Write;
    let mut w = writer(&out_dir.join("convergence.csv"))?;
    writeln!(w, "n_points,n_slices,dx,epsilon,max_rel_err")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.n_points,
            row.n_slices,
            core_io::fmt_f64(row.dx),
            core_io::fmt_f64(row.epsilon),
            core_io::fmt_f64(row.max_rel_err)
        )?;
    }
    Ok(())
}

/// Runs the full validation suite; returns whether every criterion passed.
fn run_validate(
    config: &ExperimentConfig,
    out_dir: &Path,
    format: OutputFormat,
    manifest: &mut Manifest,
) -> Result<bool, CliError> {
    let constants = config.constants()?;
    let output = validation::run_suite(&constants).map_err(CliError::guard)?;

    for criterion in &output.report.criteria {
        manifest.check(criterion.name, criterion.passed);
        for (metric, value) in &criterion.metrics {
            manifest.metric(&format!("{}.{metric}", criterion.name), *value);
        }
    }
    manifest.all_passed = Some(output.report.all_passed);

    write_convergence_csv(out_dir, &output.report.convergence)?;
    manifest.artifact("convergence.csv");

    write_state(
        out_dir,
        "free_gaussian_kernel_t1",
        format,
        &output.free_kernel_final,
        manifest,
    )?;
    write_state(
        out_dir,
        "free_gaussian_cn_t1",
        format,
        &output.free_cn_final,
        manifest,
    )?;

    let geometry = pathint_core::SlitGeometry::reference();
    let coherent =
        screen_pattern(&geometry, PatternMode::Coherent, &constants).map_err(CliError::guard)?;
    let mut w = writer(&out_dir.join("doubleslit_coherent.csv"))?;
    core_io::write_pattern_csv(&mut w, &coherent).map_err(CliError::guard)?;
    manifest.artifact("doubleslit_coherent.csv");

    for line in suite_summary_lines(&output.report) {
        println!("{line}");
    }
    Ok(output.report.all_passed)
}

/// One pass/fail line per criterion, printed by `validate` and by the
/// acceptance tests.
pub fn suite_summary_lines(report: &validation::SuiteReport) -> Vec<String> {
    report
        .criteria
        .iter()
        .map(|criterion| {
            format!(
                "{} {}",
                if criterion.passed { "PASS" } else { "FAIL" },
                criterion.name
            )
        })
        .collect()
}
