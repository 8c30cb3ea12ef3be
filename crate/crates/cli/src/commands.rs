//! Subcommand implementations. Each returns the paths it wrote.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ionkin_core::ensemble::run_decorrelated;
use ionkin_core::kinetics::{ChannelMode, IntegrationOutcome, Kinetics, PopulationVector};
use ionkin_core::model::{check_lopt_validity, NUM_SPECIES};
use ionkin_core::pulse::{
    correlation_diagnostic, field_correlation_profile, gaussian_envelope, intensity_to_flux,
    ChaoticPulseGenerator, PulseRecord,
};
use ionkin_core::rng::stream_rng;
use ionkin_core::volume::{
    beam_average_3d, log_grid, radial_average_2d, volume_average, VolumeKind, YieldCurve,
};
use rayon::prelude::*;

use crate::config::{Config, PulseKind, StochasticMethod};
use crate::error::{CliError, Context, Result};
use crate::histogram::{compare_experiment, emit_histogram};
use crate::io::{self, fmt_f64};
use crate::scan::{run_scan, ScanOutput, ScanSpec};

const FS: f64 = 1e-15;

fn e3(x: f64) -> String {
    format!("{x:.3e}")
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let p = dir.join(name);
    io::write_text(&p, text)?;
    written.push(p);
    Ok(())
}

fn output_dir(cfg: &Config) -> PathBuf {
    cfg.resolve(&cfg.output.dir)
}

/// Output name for a per-mode file when both modes run.
fn mode_file(stem: &str, mode: ChannelMode) -> String {
    format!("{stem}_{}.csv", mode.name())
}

fn describe(cfg: &Config) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "photon energy: {} eV", cfg.atom.photon_energy_ev);
    let _ = write!(
        s,
        "pulse: {}, fwhm {} fs",
        cfg.pulse.kind.name(),
        cfg.pulse.fwhm_fs
    );
    if let Some(tc) = cfg.pulse.coherence_time_fs {
        let _ = write!(s, ", coherence time {tc} fs");
    }
    s.push('\n');
    match cfg.method() {
        None => s.push_str("method: deterministic envelope\n"),
        Some(StochasticMethod::Ensemble) => {
            let _ = writeln!(
                s,
                "method: ensemble, {} realizations, master seed {}",
                cfg.ensemble.n_realizations, cfg.ensemble.master_seed
            );
        }
        Some(StochasticMethod::Decorrelated) => s.push_str("method: decorrelated envelope\n"),
    }
    let _ = writeln!(s, "volume: {}, fmin {}", cfg.volume.kind, cfg.volume.fmin);
    let _ = writeln!(
        s,
        "tolerances: rel {}, abs {}",
        cfg.scan.rel_tol, cfg.scan.abs_tol
    );
    s
}

fn validity_lines(cfg: &Config, peak: f64) -> String {
    let v = check_lopt_validity(cfg.atom.photon_energy_ev, peak, cfg.pulse.fwhm_fs * FS);
    format!(
        "validity at {}: Up = {} eV (Up/hw = {}), {} field cycles per fwhm: {}\n",
        e3(peak),
        e3(v.ponderomotive_ev),
        e3(v.ponderomotive_ratio),
        e3(v.field_cycles),
        if v.ok() {
            "ok"
        } else {
            "WARNING outside the perturbative regime"
        }
    )
}

fn scan_report(out: &ScanOutput) -> String {
    let d = &out.diagnostics;
    let mut s = String::new();
    let _ = writeln!(s, "[{}]", out.spec.channel_mode.name());
    let _ = writeln!(s, "points integrated: {}", d.points);
    if d.stats.accepted > 0 {
        let _ = writeln!(
            s,
            "steps: {} accepted, {} rejected, {} implicit, {} rhs evaluations",
            d.stats.accepted, d.stats.rejected, d.stats.implicit_steps, d.stats.rhs_evals
        );
        let _ = writeln!(
            s,
            "max conservation error {}, min population {}",
            e3(d.stats.max_conservation_error),
            e3(d.stats.min_population)
        );
    }
    let _ = writeln!(
        s,
        "max |sum - 1| of point yields: {}",
        e3(d.max_point_sum_error)
    );
    if out.spec.volume.kind != VolumeKind::None {
        let _ = writeln!(
            s,
            "max |sum - 1| after volume averaging: {}",
            e3(d.max_volume_sum_error)
        );
        let _ = writeln!(
            s,
            "volume refinement estimate: {}",
            e3(d.max_volume_error_estimate)
        );
    }
    if d.failures.is_empty() {
        s.push_str("failed realizations: none\n");
    } else {
        for (k, i, f) in &d.failures {
            let _ = writeln!(
                s,
                "failed realizations at point {k} ({}): {} {:?}",
                e3(*i),
                f.len(),
                f
            );
        }
    }
    s
}

/// `scan`: one curve per channel mode, histograms and a report.
pub fn scan(cfg: &Config) -> Result<Vec<PathBuf>> {
    let dir = output_dir(cfg);
    let modes = cfg.channels.mode.modes();
    let mut outputs = Vec::with_capacity(modes.len());
    for &m in &modes {
        let spec = ScanSpec::from_config(cfg, m)?;
        outputs.push(run_scan(&spec, cfg)?);
    }
    prepare_dir(&dir)?;
    let mut written = Vec::new();
    let primary = outputs.last().expect("at least one mode");
    write(
        &dir,
        "yields.csv",
        &io::format_yields(&primary.curve),
        &mut written,
    )?;
    if outputs.len() > 1 {
        for o in &outputs {
            write(
                &dir,
                &mode_file("yields", o.spec.channel_mode),
                &io::format_yields(&o.curve),
                &mut written,
            )?;
        }
    }
    let curves: Vec<_> = outputs
        .iter()
        .map(|o| (o.spec.channel_mode, &o.curve))
        .collect();
    let mut report = describe(cfg);
    report.push_str(&validity_lines(
        cfg,
        *primary.curve.intensities.last().expect("non-empty"),
    ));
    for (n, &i) in cfg.scan.histogram_intensities.iter().enumerate() {
        let h = emit_histogram(&curves, i, cfg.normalization())?;
        let name = if n == 0 {
            "histogram.csv".to_string()
        } else {
            format!("histogram_{}.csv", n + 1)
        };
        let _ = writeln!(report, "histogram at {} W/cm2: {name}", e3(i));
        write(&dir, &name, &io::format_histogram(&h), &mut written)?;
    }
    for o in &outputs {
        report.push_str(&scan_report(o));
    }
    write(&dir, "report.txt", &report, &mut written)?;
    Ok(written)
}

fn single_run(
    cfg: &Config,
    mode: ChannelMode,
    intensity: f64,
    realization: u64,
) -> Result<IntegrationOutcome> {
    let table = cfg.channel_table()?;
    let mut opts = cfg.kinetics_options(mode);
    opts.record_trajectory = true;
    let env = cfg.envelope(intensity_to_flux(intensity, cfg.atom.photon_energy_ev));
    let ctx = || format!("single run at {intensity:e} W/cm2");
    match cfg.method() {
        None => {
            let rec = gaussian_envelope(&env).context(ctx)?;
            Kinetics::new(&table, &opts)
                .and_then(|k| k.integrate(&PopulationVector::neutral(), &rec))
                .context(ctx)
        }
        Some(StochasticMethod::Decorrelated) => run_decorrelated(&env, &table, &opts).context(ctx),
        Some(StochasticMethod::Ensemble) => {
            let spec = cfg.chaotic(env.peak_flux).expect("chaotic config");
            let g = ChaoticPulseGenerator::new(&spec).context(ctx)?;
            let rec = g.generate(&mut stream_rng(cfg.ensemble.master_seed, 0, realization));
            Kinetics::new(&table, &opts)
                .and_then(|k| k.integrate(&PopulationVector::neutral(), &rec))
                .context(ctx)
        }
    }
}

/// `single`: full trajectories at one intensity. For ensemble configs the
/// pulse is realization `realization` of the first scan point's stream.
pub fn single(cfg: &Config, intensity: f64, realization: u64) -> Result<Vec<PathBuf>> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(CliError::Config(format!(
            "intensity must be positive, got {intensity}"
        )));
    }
    let dir = output_dir(cfg);
    let modes = cfg.channels.mode.modes();
    let runs = modes
        .iter()
        .map(|&m| single_run(cfg, m, intensity, realization).map(|o| (m, o)))
        .collect::<Result<Vec<_>>>()?;
    prepare_dir(&dir)?;
    let mut written = Vec::new();
    let mut finals = String::from("mode");
    for j in 0..NUM_SPECIES {
        let _ = write!(finals, ",N{j}");
    }
    finals.push('\n');
    let mut report = describe(cfg);
    report.push_str(&validity_lines(cfg, intensity));
    for (m, o) in &runs {
        let traj = io::format_trajectory(o.trajectory.as_deref().unwrap_or_default());
        if runs.len() > 1 {
            write(&dir, &mode_file("trajectory", *m), &traj, &mut written)?;
        }
        if *m == runs.last().expect("non-empty").0 {
            write(&dir, "trajectory.csv", &traj, &mut written)?;
        }
        finals.push_str(m.name());
        for v in o.populations.as_array() {
            finals.push(',');
            finals.push_str(&fmt_f64(*v));
        }
        finals.push('\n');
        let s = &o.stats;
        let _ = writeln!(
            report,
            "[{}] steps: {} accepted, {} rejected, {} implicit; max conservation error {}, min population {}",
            m.name(),
            s.accepted,
            s.rejected,
            s.implicit_steps,
            e3(s.max_conservation_error),
            e3(s.min_population)
        );
    }
    write(&dir, "single.csv", &finals, &mut written)?;
    write(&dir, "report.txt", &report, &mut written)?;
    Ok(written)
}

/// `pulse-diag`: intensity correlations of `n` chaotic realizations.
pub fn pulse_diag(cfg: &Config, n: usize, intensity: f64) -> Result<Vec<PathBuf>> {
    if cfg.pulse.kind != PulseKind::Chaotic {
        return Err(CliError::Config(
            "pulse-diag needs pulse.kind = chaotic".into(),
        ));
    }
    if n < 100 {
        return Err(CliError::Config(format!(
            "pulse-diag needs at least 100 realizations, got {n}"
        )));
    }
    let spec = cfg
        .chaotic(intensity_to_flux(intensity, cfg.atom.photon_energy_ev))
        .expect("chaotic config");
    let g = ChaoticPulseGenerator::new(&spec).context(|| "pulse generator".into())?;
    let seed = cfg.ensemble.master_seed;
    let records: Vec<PulseRecord> = (0..n as u64)
        .into_par_iter()
        .map(|i| g.generate(&mut stream_rng(seed, 0, i)))
        .collect();
    let mut csv = String::from("order,estimate,stderr,expected\n");
    let mut report = describe(cfg);
    let _ = writeln!(report, "realizations: {n}");
    let mut factorial = 1.0;
    for order in 1..=4u32 {
        factorial *= order as f64;
        let c = correlation_diagnostic(&records, order)
            .context(|| format!("order {order} correlation"))?;
        let _ = writeln!(
            csv,
            "{order},{},{},{}",
            fmt_f64(c.value),
            fmt_f64(c.stderr),
            fmt_f64(factorial)
        );
        let _ = writeln!(
            report,
            "g{order}(0) = {:.4} +- {:.4} (chaotic light: {factorial})",
            c.value, c.stderr
        );
    }
    let tc = spec.coherence_time;
    let max_lag = ((3.0 * tc / spec.dt()).ceil() as usize).max(1);
    let prof =
        field_correlation_profile(&records, max_lag).context(|| "field correlation".into())?;
    let mut g2 = String::from("lag_s,g2,g1_abs\n");
    for k in 0..prof.lags.len() {
        let _ = writeln!(
            g2,
            "{},{},{}",
            fmt_f64(prof.lags[k]),
            fmt_f64(prof.g2[k]),
            fmt_f64(prof.g1_abs[k])
        );
    }
    let _ = writeln!(
        report,
        "|g1| 1/e half width: {} s (sqrt(2) x coherence time = {} s)",
        e3(prof.half_width_1e),
        e3(std::f64::consts::SQRT_2 * tc)
    );
    let envelope = g.envelope_record();
    let mut sample = String::from("t_s,flux,envelope\n");
    for (k, f) in records[0].flux().iter().enumerate() {
        let _ = writeln!(
            sample,
            "{},{},{}",
            fmt_f64(records[0].time(k)),
            fmt_f64(*f),
            fmt_f64(envelope.flux()[k])
        );
    }
    let dir = output_dir(cfg);
    prepare_dir(&dir)?;
    let mut written = Vec::new();
    write(&dir, "pulse_diag.csv", &csv, &mut written)?;
    write(&dir, "g2_profile.csv", &g2, &mut written)?;
    write(&dir, "pulse_sample.csv", &sample, &mut written)?;
    write(&dir, "report.txt", &report, &mut written)?;
    Ok(written)
}

/// Smooth saturating test family: Poisson ladder in `I / i_sat`, with the
/// top species absorbing the tail.
pub fn poisson_ladder(i: f64, i_sat: f64) -> [f64; NUM_SPECIES] {
    let lambda = i / i_sat;
    let mut y = [0.0; NUM_SPECIES];
    let mut term = (-lambda).exp();
    let mut acc = 0.0;
    for (j, v) in y.iter_mut().enumerate().take(NUM_SPECIES - 1) {
        if j > 0 {
            term *= lambda / j as f64;
        }
        *v = term;
        acc += term;
    }
    y[NUM_SPECIES - 1] = (1.0 - acc).max(0.0);
    y
}

/// Relative tolerance of the quadrature against the brute-force oracle.
pub const VOLUME_CHECK_REL_TOL: f64 = 1e-4;
/// Yields below this are compared in absolute terms.
pub const VOLUME_CHECK_FLOOR: f64 = 1e-8;

/// `volume-check`: the interpolated-curve average against an independent
/// brute-force average of the closed-form test family.
pub fn volume_check(cfg: &Config, i_sat: f64) -> Result<(Vec<PathBuf>, bool)> {
    if !(i_sat > 0.0 && i_sat.is_finite()) {
        return Err(CliError::Config(format!(
            "saturation intensity must be positive, got {i_sat}"
        )));
    }
    let model = cfg.volume_model()?;
    let grid = log_grid(cfg.scan.i_min, cfg.scan.i_max, cfg.scan.points_per_decade)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let f = |i: f64| poisson_ladder(i, i_sat);
    let curve = YieldCurve::sample(
        grid[0] * model.fmin,
        *grid.last().expect("non-empty"),
        cfg.volume.points_per_decade,
        |i| Ok(f(i)),
    )?;
    let rows: Vec<_> = grid
        .par_iter()
        .map(|&i0| {
            let a = volume_average(&curve, &model, i0)?;
            let b = match model.kind {
                VolumeKind::None => f(i0),
                VolumeKind::GaussianTransverse2d => {
                    radial_average_2d(f, i0, model.w0_cm, model.fmin, 4000)
                }
                VolumeKind::GaussianBeam3d => beam_average_3d(f, i0, model.fmin, 200),
            };
            let mut worst: f64 = 0.0;
            for j in 0..NUM_SPECIES {
                let d = (a.yields[j] - b[j]).abs() / b[j].abs().max(VOLUME_CHECK_FLOOR);
                worst = worst.max(d);
            }
            Ok((i0, worst, a.error_estimate))
        })
        .collect::<std::result::Result<Vec<_>, ionkin_core::Error>>()
        .context(|| "volume check".into())?;
    let mut csv = String::from("i0_W_cm2,max_rel_diff,error_estimate\n");
    let mut ok = true;
    for (i0, d, e) in &rows {
        ok &= *d <= VOLUME_CHECK_REL_TOL;
        let _ = writeln!(csv, "{},{},{}", fmt_f64(*i0), fmt_f64(*d), fmt_f64(*e));
    }
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let report = format!(
        "volume: {}, fmin {}\ntest family: Poisson ladder, saturation {} W/cm2\nworst relative difference: {} (limit {})\n{}\n",
        model.kind,
        model.fmin,
        e3(i_sat),
        e3(worst),
        e3(VOLUME_CHECK_REL_TOL),
        if ok { "PASS" } else { "FAIL" }
    );
    let dir = output_dir(cfg);
    prepare_dir(&dir)?;
    let mut written = Vec::new();
    write(&dir, "volume_check.csv", &csv, &mut written)?;
    write(&dir, "report.txt", &report, &mut written)?;
    Ok((written, ok))
}

/// `compare`: model histogram against measured heights.
pub fn compare(histogram: &Path, experiment: &Path, out_dir: &Path) -> Result<(Vec<PathBuf>, f64)> {
    let h = io::parse_histogram(&io::read_text(histogram)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", histogram.display())))?;
    let x = io::parse_experiment(&io::read_text(experiment)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", experiment.display())))?;
    let c = compare_experiment(&h, &x)?;
    prepare_dir(out_dir)?;
    let mut written = Vec::new();
    write(out_dir, "comparison.csv", &c.to_csv(), &mut written)?;
    let mut report = format!(
        "reference species: {}\nspecies compared: {}\nrms of ln(model/experiment): {}\n",
        c.reference.label(),
        c.rows.len(),
        e3(c.log_rms)
    );
    if !c.skipped.is_empty() {
        let names: Vec<String> = c.skipped.iter().map(|s| s.label()).collect();
        let _ = writeln!(
            report,
            "zero measured height, not compared: {}",
            names.join(" ")
        );
    }
    write(out_dir, "comparison_report.txt", &report, &mut written)?;
    Ok((written, c.log_rms))
}
