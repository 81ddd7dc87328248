use std::path::{Path, PathBuf};

use focklab::coulomb_mc::{rescaled_histogram, run_mcmc, EnsembleConfig, HistogramSpec, McmcRun};
use focklab::equilibrium::{droplet_radius, microscale_asymptotic_check, microscopic_scale, MicroscaleReport};
use focklab::finite_kernel::{convergence_report, ConvergenceReport};
use focklab::general_bergman::{bergman_density, moment_matrix_with, truncated_kernel, DEFAULT_ANGULAR_POINTS};
use focklab::potentials::MicroscopicPotential;
use focklab::radial_bergman::{bergman_function_r0, laplacian_q0, thm1_decay_report, DecayReport};
use focklab::Complex64;
use serde_json::{json, Value};

use crate::svg::{Plot, Series};
use crate::table::{self, Table};
use crate::{
    CliError, EquilibriumArgs, Fig1Args, GramArgs, GridSpec, OutArgs, PotentialArgs, R0Args, RescaleArgs, SampleArgs,
    Thm1Args,
};

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::config(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// CSV to `--out` (JSON sidecar beside it) or to stdout.
fn emit(table: &Table, summary: Option<&Value>, out: &OutArgs) -> Result<(), CliError> {
    match &out.out {
        Some(path) => {
            table.write_path(path)?;
            if let Some(v) = summary {
                write_json(&sidecar(path), v)?;
            }
        }
        None => table.write_to(std::io::stdout().lock())?,
    }
    Ok(())
}

fn angles(count: usize) -> Vec<f64> {
    (0..count).map(|i| std::f64::consts::TAU * i as f64 / count as f64).collect()
}

/// `r, R0, deltaQ0, rel_err` for radial `Q_0`; non-radial `Q_0` adds a
/// `theta` column and uses the truncated kernel.
pub fn r0_table(p: &MicroscopicPotential, grid: &GridSpec, n_angles: usize, truncation: usize) -> Result<Table, CliError> {
    if let Some(a) = p.radial_amplitude() {
        let mut t = Table::new(["r", "R0", "deltaQ0", "rel_err"]);
        for r in grid.values() {
            let r0 = match bergman_function_r0(p.k(), p.c(), a, r) {
                Ok(v) => v,
                Err(focklab::Error::Divergent(_)) => f64::INFINITY,
                Err(e) => return Err(e.into()),
            };
            let dq = laplacian_q0(p.k(), a, r);
            t.push(vec![r, r0, dq, r0 / dq - 1.0]);
        }
        return Ok(t);
    }
    if n_angles == 0 {
        return Err(CliError::config("--angles must be positive"));
    }
    let tk = truncated_kernel(&moment_matrix_with(p, truncation, DEFAULT_ANGULAR_POINTS)?)?;
    let mut t = Table::new(["r", "theta", "R0", "deltaQ0", "rel_err"]);
    for r in grid.values() {
        for th in angles(n_angles) {
            let z = Complex64::from_polar(r, th);
            let r0 = match bergman_density(&tk, p, z) {
                Ok(v) => v,
                Err(focklab::Error::Divergent(_)) => f64::INFINITY,
                Err(e) => return Err(e.into()),
            };
            let dq = p.laplacian_q0(z);
            t.push(vec![r, th, r0, dq, r0 / dq - 1.0]);
        }
    }
    Ok(t)
}

pub fn cmd_r0(args: &R0Args) -> Result<Table, CliError> {
    let p = args.potential.microscopic()?;
    let t = r0_table(&p, &args.grid, args.angles, args.truncation)?;
    emit(&t, None, &args.out)?;
    Ok(t)
}

/// Bands for the decay verification.
pub const THM1_SLOPE_BAND: (f64, f64) = (-1.05, -0.95);

#[derive(Debug, Clone)]
pub struct Thm1Outcome {
    pub report: DecayReport,
    pub summary: Value,
    pub pass: bool,
}

pub fn decay_grid(k: u32, a: f64) -> Vec<f64> {
    (0..=60).map(|i| ((1.0 + 0.25 * i as f64) / a).powf(0.5 / k as f64)).collect()
}

pub fn cmd_verify_thm1(args: &Thm1Args) -> Result<Thm1Outcome, CliError> {
    let p = args.potential.microscopic()?;
    let a = p
        .radial_amplitude()
        .ok_or_else(|| CliError::config("verify-thm1 needs a radial Q0"))?;
    let grid = match &args.grid {
        Some(g) => g.values(),
        None => decay_grid(p.k(), a),
    };
    let report = thm1_decay_report(p.k(), p.c(), a, &grid)?;
    let magnitudes_ok = report.points.iter().filter(|q| q.used).all(|q| q.rel_err.abs() < 1.0);
    let slope_ok = report
        .slope
        .is_some_and(|s| (THM1_SLOPE_BAND.0..=THM1_SLOPE_BAND.1).contains(&s));
    let pass = report.identically_zero || (slope_ok && report.sign_consistent && magnitudes_ok);
    let points: Vec<Value> = report
        .points
        .iter()
        .map(|q| json!({"r": q.r, "u": q.u, "R0": q.r0, "deltaQ0": q.delta_q0, "rel_err": q.rel_err, "used": q.used}))
        .collect();
    let summary = json!({
        "k": report.k,
        "c": report.c,
        "amplitude": report.amplitude,
        "identically_zero": report.identically_zero,
        "slope": report.slope,
        "plain_slope": report.plain_slope,
        "prefactor_exponent": report.prefactor_exponent,
        "alpha": report.alpha,
        "sign_consistent": report.sign_consistent,
        "slope_band": [THM1_SLOPE_BAND.0, THM1_SLOPE_BAND.1],
        "pass": pass,
        "points": points,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::config(e.to_string()))?;
    match &args.out.out {
        Some(path) => write_json(path, &summary)?,
        None => println!("{text}"),
    }
    Ok(Thm1Outcome { report, summary, pass })
}

#[derive(Debug, Clone)]
pub struct RescaleOutcome {
    pub table: Table,
    pub report: ConvergenceReport,
    pub summary: Value,
}

pub fn cmd_rescale(args: &RescaleArgs) -> Result<RescaleOutcome, CliError> {
    let q = args.potential.macroscopic()?;
    if !q.is_radial() {
        return Err(CliError::config("rescale needs a radial potential"));
    }
    let grid = args.grid.values();
    let report = convergence_report(&q, &args.n_list, &grid)?;
    let mut headers = vec!["z".to_string(), "R0".to_string()];
    headers.extend(report.entries.iter().map(|e| format!("R_{}", e.n)));
    let mut table = Table::new(headers);
    for (i, &z) in grid.iter().enumerate() {
        let mut row = vec![z, report.r0[i]];
        row.extend(report.entries.iter().map(|e| e.values[i]));
        table.push(row);
    }
    let summary = json!({
        "k": report.limit.k,
        "c": report.limit.c,
        "limit_amplitude": report.limit.amplitude,
        "n": report.entries.iter().map(|e| e.n).collect::<Vec<_>>(),
        "rn": report.entries.iter().map(|e| e.rn).collect::<Vec<_>>(),
        "sup_error": report.entries.iter().map(|e| e.sup_error).collect::<Vec<_>>(),
        "decreasing_from": report.decreasing_from,
        "truncated_series_identity": report.truncated_series_identity,
    });
    emit(&table, Some(&summary), &args.out)?;
    Ok(RescaleOutcome { table, report, summary })
}

#[derive(Debug, Clone)]
pub struct EquilibriumOutcome {
    pub droplet_radius: f64,
    pub report: MicroscaleReport,
    pub table: Table,
}

pub fn cmd_equilibrium(args: &EquilibriumArgs) -> Result<EquilibriumOutcome, CliError> {
    let q = args.potential.macroscopic()?;
    let n_list = match (args.n, args.n_list.is_empty()) {
        (Some(n), _) => vec![n],
        (None, false) => args.n_list.clone(),
        (None, true) => vec![100, 1_000, 10_000],
    };
    let report = microscale_asymptotic_check(&q, &n_list)?;
    let rq = droplet_radius(&q)?;
    let mut table = Table::new(["n", "rn", "asymptotic", "rel_dev"]);
    for e in &report.entries {
        table.push(vec![e.n as f64, e.rn, e.rn / (1.0 + e.rel_dev), e.rel_dev]);
    }
    let summary = json!({
        "droplet_radius": rq,
        "tau0": report.tau0,
        "k": report.k,
        "fitted_C": report.fitted_c,
        "decay_exponent": report.decay_exponent,
        "exact": report.exact,
        "rate_satisfied": report.rate_satisfied(),
    });
    match &args.out.out {
        Some(_) => emit(&table, Some(&summary), &args.out)?,
        None => {
            println!("R_Q = {}", table::format_value(rq));
            println!("tau0 = {}", table::format_value(report.tau0));
            emit(&table, None, &args.out)?;
        }
    }
    Ok(EquilibriumOutcome {
        droplet_radius: rq,
        report,
        table,
    })
}

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub run: McmcRun,
    pub rn: Option<f64>,
    pub table: Table,
    pub summary: Value,
}

pub fn cmd_sample(args: &SampleArgs) -> Result<SampleOutcome, CliError> {
    let q = args.potential.macroscopic()?;
    let rq = if q.is_radial() { droplet_radius(&q).ok() } else { None };
    let r_max = args.r_max.unwrap_or(1.5 * rq.unwrap_or(1.0));
    let cfg = EnsembleConfig {
        step: args.step,
        sweeps: args.sweeps,
        burn_in: args.burn_in,
        seed: args.seed,
        batch_size: args.batch_size,
        chains: args.chains,
        ..EnsembleConfig::new(args.n, q.clone(), HistogramSpec::Radial { r_max, bins: args.bins })
    };
    cfg.validate().map_err(CliError::from_setup)?;
    let run = run_mcmc(&cfg)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    let rn = if q.is_radial() && q.spectators().is_empty() {
        microscopic_scale(&q, args.n).ok()
    } else {
        None
    };
    let h = &run.histogram;
    let est = h.intensities();
    let se = h.std_errors();
    let rescaled = rn.map(|r| rescaled_histogram(h, r)).transpose()?;
    let mut table = Table::new([
        "r_lo",
        "r_hi",
        "count",
        "intensity",
        "std_error",
        "z_lo",
        "z_hi",
        "rescaled",
        "rescaled_se",
    ]);
    let edges = h.spec.radial_edges().expect("radial bins");
    for (b, &(lo, hi)) in edges.iter().enumerate() {
        let (zl, zh, rv, rs) = match (&rescaled, rn) {
            (Some(t), Some(r)) => (lo / r, hi / r, t.values[b], t.std_errors[b]),
            _ => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        table.push(vec![lo, hi, h.counts[b] as f64, est[b], se[b], zl, zh, rv, rs]);
    }
    let summary = json!({
        "config": {
            "n": args.n,
            "c": q.c(),
            "radial_coeffs": q.radial_coeffs(),
            "spectators": q.spectators().iter().map(|s| [s.position.re, s.position.im, s.charge]).collect::<Vec<_>>(),
            "seed": args.seed,
            "sweeps": args.sweeps,
            "burn_in": args.burn_in,
            "initial_step": args.step,
            "chains": args.chains,
            "batch_size": args.batch_size,
            "bins": args.bins,
            "r_max": r_max,
        },
        "acceptance": run.acceptance,
        "tuned_steps": run.steps,
        "warnings": run.warnings,
        "rn": rn,
        "recorded_sweeps": h.sweeps,
    });
    emit(&table, Some(&summary), &args.out)?;
    Ok(SampleOutcome {
        run,
        rn,
        table,
        summary,
    })
}

/// `(label, a, k, c)` of the three reference curves.
pub const FIG1_CURVES: [(&str, f64, u32, f64); 3] = [
    ("V0 = 2|z|^2 - 2 log|z|", 2.0, 1, 1.0),
    ("V0 = |z|^2/2 + log|z|", 0.5, 1, -0.5),
    ("V0 = |z|^4/2", 0.5, 2, 0.0),
];

/// The singular curve is tabulated from this radius on.
pub const FIG1_SINGULAR_START: f64 = 0.05;

pub fn fig1_table(points: usize) -> Result<Table, CliError> {
    if points < 2 {
        return Err(CliError::config("fig1 needs at least 2 points"));
    }
    let mut t = Table::new(["r", "R0_a2_k1_c1", "R0_a0.5_k1_c-0.5", "R0_a0.5_k2_c0"]);
    for r in GridSpec::linear(0.0, 3.0, points).values() {
        let mut row = vec![r];
        for &(_, a, k, c) in &FIG1_CURVES {
            row.push(if c < 0.0 && r < FIG1_SINGULAR_START {
                f64::NAN
            } else {
                bergman_function_r0(k, c, a, r)?
            });
        }
        t.push(row);
    }
    Ok(t)
}

pub fn fig1_plot(t: &Table) -> Plot {
    let r = t.column("r").expect("r column");
    let series = FIG1_CURVES
        .iter()
        .enumerate()
        .map(|(i, &(label, ..))| Series {
            label: label.to_string(),
            points: r.iter().zip(t.rows.iter().map(|row| row[i + 1])).map(|(&x, y)| (x, y)).collect(),
        })
        .collect();
    Plot {
        title: "Bergman function R0(r)".into(),
        x_label: "r".into(),
        y_label: "R0".into(),
        x_range: (0.0, 3.0),
        y_range: (0.0, 20.0),
        log_y: false,
        series,
    }
}

pub fn cmd_fig1(args: &Fig1Args) -> Result<Table, CliError> {
    let t = fig1_table(args.points)?;
    std::fs::write(&args.out, fig1_plot(&t).render())
        .map_err(|e| CliError::config(format!("{}: {e}", args.out.display())))?;
    t.write_path(&args.out.with_extension("csv"))?;
    Ok(t)
}

#[derive(Debug, Clone)]
pub struct GramOutcome {
    pub table: Table,
    pub condition: f64,
}

pub fn cmd_gram(args: &GramArgs) -> Result<GramOutcome, CliError> {
    let p = gram_potential(&args.potential)?;
    if args.angles == 0 || args.truncation == 0 {
        return Err(CliError::config("--angles and --truncation must be positive"));
    }
    let tk = truncated_kernel(&moment_matrix_with(&p, args.truncation, args.angular_points)?)?;
    let mut table = Table::new(["r", "theta", "R0N", "tail"]);
    for r in args.grid.values() {
        for th in angles(args.angles) {
            let z = Complex64::from_polar(r, th);
            table.push(vec![r, th, bergman_density(&tk, &p, z)?, tk.tail_indicator(&p, z)?]);
        }
    }
    let summary = json!({
        "k": p.k(),
        "c": p.c(),
        "kappa": [p.kappa().re, p.kappa().im],
        "truncation": args.truncation,
        "angular_points": args.angular_points,
        "condition": tk.condition(),
    });
    emit(&table, Some(&summary), &args.out)?;
    Ok(GramOutcome {
        table,
        condition: tk.condition(),
    })
}

fn gram_potential(p: &PotentialArgs) -> Result<MicroscopicPotential, CliError> {
    p.microscopic()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ginibre_r0_column_is_one() {
        let p = PotentialArgs::inline(1, 0.0, 1.0).microscopic().unwrap();
        let t = r0_table(&p, &GridSpec::linear(0.0, 5.0, 11), 1, 1).unwrap();
        for v in t.column("R0").unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decay_grid_spans_window() {
        let g = decay_grid(2, 0.5);
        assert!((0.5 * g[0].powi(4) - 1.0).abs() < 1e-12);
        assert!((0.5 * g.last().unwrap().powi(4) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn fig1_singular_curve_starts_late() {
        let t = fig1_table(61).unwrap();
        let col = t.column("R0_a0.5_k1_c-0.5").unwrap();
        assert!(col[0].is_nan());
        assert!(col[1].is_finite());
    }
}
