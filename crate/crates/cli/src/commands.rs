use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use qfric_core::classical::{evolve_ensemble, initial_band_ensemble, momentum_bound, momentum_histogram};
use qfric_core::measures::{dispersion, dispersion_complement, overlap, overlap_literal, participation_ratio};
use qfric_core::quantum::{evolve_periods, initial_band_state, wigner_function, HilbertSpec, LeakageGuard};
use qfric_core::snapshot::write_density;
use qfric_core::verify::{run_verification, VerifyOptions};
use qfric_sweep::cell::{cell_marginals, momentum_cutoff};
use qfric_sweep::emit::{read_json, write_pgm, Heatmap};
use qfric_sweep::run::Progress;
use qfric_sweep::{emit, run_sweep, RunOptions, SweepResult};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, print_summary, write_csv, write_json};

pub fn cmd_classical(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.model_params()?;
    let tau = params.tau();
    let b = &cfg.budgets;
    let init = initial_band_ensemble(b.ensemble_size, cfg.seed, tau)?;
    let fin = evolve_ensemble(init.clone(), &params, b.classical_steps, cfg.classical.noisy);
    let extent = init.max_abs_p(tau).max(fin.max_abs_p(tau));
    let n_max = HilbertSpec::covering(momentum_cutoff(extent), tau)?.n_max().max(b.n_max);
    let grid = HilbertSpec::new(n_max, tau)?.bin_grid();
    let before = momentum_histogram(&init, grid, tau)?;
    let after = momentum_histogram(&fin, grid, tau)?;
    let p = &after.distribution;

    let dir = cfg.out_dir();
    ensure_dir(dir)?;
    let rows = p.bin_centers().into_iter().zip(p.probabilities()).map(|(c, w)| vec![c, *w]);
    let csv = write_csv(&dir.join("classical_marginal.csv"), cfg, &["p", "probability"], rows)?;
    let summary = json!({
        "noisy": cfg.classical.noisy,
        "steps": b.classical_steps,
        "trajectories": b.ensemble_size,
        "sigma": dispersion(p),
        "sigma_initial": dispersion(&before.distribution),
        "mean_p": p.mean(),
        "eta": participation_ratio(p),
        "leakage": after.out_of_range,
        "bins": p.len(),
    });
    let js = write_json(&dir.join("classical_summary.json"), "classical", cfg, &summary)?;
    if !cfg.quiet() {
        print_summary("classical", &summary);
    }
    Ok(vec![csv, js])
}

pub fn cmd_quantum(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.model_params()?;
    let tau = params.tau();
    let b = &cfg.budgets;
    let reach = momentum_bound(&params, PI, b.quantum_periods as u64);
    let band = HilbertSpec::covering(momentum_cutoff(reach), tau)?.n_max();
    let hilbert = HilbertSpec::covering_smooth(band.max(b.n_max) as f64 * tau, tau)?;
    if hilbert.n_max() > b.n_max_limit {
        return Err(CliError::config(
            "budgets.n_max_limit",
            format!(
                "basis needs n_max = {} to cover |p| <= {reach:.1} at hbar_eff = {tau}",
                hilbert.n_max()
            ),
        ));
    }
    let ev = evolve_periods(initial_band_state(hilbert)?, &params, b.quantum_periods, LeakageGuard::default())?;
    let p = ev.state.momentum_marginal()?;

    let dir = cfg.out_dir();
    ensure_dir(dir)?;
    let rows = p.bin_centers().into_iter().zip(p.probabilities()).map(|(c, w)| vec![c, *w]);
    let mut files = vec![write_csv(&dir.join("quantum_marginal.csv"), cfg, &["p", "probability"], rows)?];
    let summary = json!({
        "periods": b.quantum_periods,
        "n_max": hilbert.n_max(),
        "trace_drift": ev.trace_drift,
        "max_leakage": ev.max_leakage,
        "purity": ev.state.purity(),
        "convergence": ev.convergence,
        "sigma": dispersion(&p),
        "mean_p": p.mean(),
        "eta": participation_ratio(&p),
    });
    files.push(write_json(&dir.join("quantum_summary.json"), "quantum", cfg, &summary)?);
    if cfg.output.wigner {
        files.extend(write_wigner(cfg, dir, &ev.state)?);
    }
    if cfg.output.snapshot {
        let path = dir.join("density.qfdm");
        let mut buf = Vec::new();
        write_density(&mut buf, &ev.state)?;
        fs::write(&path, buf).map_err(CliError::io(&path))?;
        files.push(path);
    }
    if !cfg.quiet() {
        print_summary("quantum", &summary);
    }
    Ok(files)
}

fn write_wigner(
    cfg: &RunConfig,
    dir: &Path,
    rho: &qfric_core::quantum::DensityMatrix,
) -> Result<Vec<PathBuf>, CliError> {
    let w = wigner_function(rho)?;
    let (qa, pa) = (*w.q_axis(), *w.p_axis());
    let rows = (0..pa.len).flat_map(|ip| {
        let w = &w;
        (0..qa.len).map(move |iq| vec![qa.node(iq), pa.node(ip), w.get(iq, ip).re])
    });
    let csv = write_csv(&dir.join("wigner.csv"), cfg, &["q", "p", "W"], rows)?;
    let values: Vec<f64> = w.values().iter().map(|v| v.re).collect();
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = max - min;
    let map = Heatmap {
        measure: "wigner".into(),
        hbar_eff: rho.hilbert().tau(),
        width: qa.len,
        height: pa.len,
        pixels: values
            .iter()
            .map(|v| if span > 0.0 { ((v - min) / span * 65535.0).round() as u16 } else { 0 })
            .collect(),
        min,
        max,
        missing: 0,
    };
    let pgm = dir.join("wigner.pgm");
    let mut buf = Vec::new();
    write_pgm(&mut buf, &map).map_err(CliError::io(&pgm))?;
    fs::write(&pgm, buf).map_err(CliError::io(&pgm))?;
    let txt = dir.join("wigner.txt");
    let sidecar = format!(
        "rows = p ascending from {} step {}\ncolumns = q from 0 step {}\nmin = {min}\nmax = {max}\npixel = round((W - min) / (max - min) * 65535)\nconfig = {}\n",
        pa.start,
        pa.step,
        qa.step,
        cfg.to_json()
    );
    fs::write(&txt, sidecar).map_err(CliError::io(&txt))?;
    Ok(vec![csv, pgm, txt])
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.model_params()?;
    let m = cell_marginals(&params, &cfg.budgets, cfg.seed)?;
    let summary = json!({
        "overlap": overlap(&m.quantum, &m.noisy)?,
        "sigma_prime": dispersion_complement(&m.quantum, &m.noisy)?,
        "eta_cl": participation_ratio(&m.noiseless),
        "eta_cl_noisy": participation_ratio(&m.noisy),
        "eta_q": participation_ratio(&m.quantum),
        "overlap_literal": overlap_literal(&m.quantum, &m.noisy)?,
        "leakage": m.leakage,
        "convergence": m.convergence,
        "n_max": m.n_max,
    });
    let dir = cfg.out_dir();
    ensure_dir(dir)?;
    let rows = (0..m.quantum.len()).map(|i| {
        vec![
            m.quantum.grid().center(i),
            m.quantum.probabilities()[i],
            m.noisy.probabilities()[i],
            m.noiseless.probabilities()[i],
        ]
    });
    let csv = write_csv(
        &dir.join("compare_marginals.csv"),
        cfg,
        &["p", "quantum", "classical_noisy", "classical_noiseless"],
        rows,
    )?;
    let js = write_json(&dir.join("compare_summary.json"), "compare", cfg, &summary)?;
    if !cfg.quiet() {
        print_summary("compare", &summary);
    }
    Ok(vec![csv, js])
}

/// Runs (or resumes) the configured sweep, or with `from_json` re-renders
/// a previous result without computing anything.
pub fn cmd_sweep(cfg: &RunConfig, from_json: Option<&Path>, max_cells: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let dir = cfg.out_dir();
    ensure_dir(dir)?;
    let result: SweepResult = match from_json {
        Some(path) => {
            let f = fs::File::open(path).map_err(CliError::io(path))?;
            read_json(std::io::BufReader::new(f)).map_err(|message| CliError::ConfigFile {
                path: path.to_path_buf(),
                message,
            })?
        }
        None => {
            let plan = cfg.sweep_plan()?;
            let quiet = cfg.quiet();
            let observer = move |p: Progress<'_>| {
                if quiet {
                    return;
                }
                match p.outcome {
                    Ok(r) => println!(
                        "[{}/{}] k = {:.4} gamma = {:.4} hbar = {}: O = {:.4} sigma' = {:.4} eta_cl = {:.4} eta_q = {:.4} ({:.1} s)",
                        p.finished, p.total, r.k, r.gamma, r.hbar_eff, r.overlap, r.sigma_prime, r.eta_cl, r.eta_q, r.seconds
                    ),
                    Err(e) => eprintln!("[{}/{}] cell {} failed: {e}", p.finished, p.total, p.cell.index),
                }
            };
            let opts = RunOptions {
                workers: cfg.sweep.workers,
                checkpoint: Some(cfg.sweep.checkpoint.clone().unwrap_or_else(|| dir.join("sweep.ckpt"))),
                max_new_cells: max_cells,
                observer: Some(&observer),
            };
            run_sweep(&plan, &opts)?
        }
    };
    let mut files = Vec::new();
    for format in &cfg.sweep.formats {
        files.extend(emit(&result, *format, dir)?);
    }
    if from_json.is_none() {
        let path = dir.join("sweep_config.json");
        fs::write(&path, cfg.to_json()).map_err(CliError::io(&path))?;
        files.push(path);
    }
    if !cfg.quiet() {
        println!("{} of {} cells done", result.records.len(), result.plan.len());
    }
    if !result.failures.is_empty() {
        for f in &result.failures {
            eprintln!("cell {} (k = {}, gamma = {}, hbar_eff = {}): {}", f.cell_index, f.k, f.gamma, f.hbar_eff, f.error);
        }
        return Err(CliError::IncompleteSweep(result.failures.len()));
    }
    Ok(files)
}

pub fn cmd_verify(cfg: &RunConfig, negative_control: bool) -> Result<Vec<PathBuf>, CliError> {
    let symbol = cfg.symbol.as_ref().map(|s| s.spec()).transpose()?;
    let report = run_verification(VerifyOptions {
        seed: cfg.seed,
        corrupt_gamma_nu: negative_control,
        symbol,
    })?;
    let checks: Vec<_> = report
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "deviation": c.deviation,
                "tolerance": c.tolerance,
                "passed": c.passed,
                "detail": c.detail,
            })
        })
        .collect();
    let dir = cfg.out_dir();
    ensure_dir(dir)?;
    let path = write_json(
        &dir.join("verify.json"),
        "verify",
        cfg,
        json!({ "checks": checks, "notes": report.notes, "negative_control": negative_control }),
    )?;
    if !cfg.quiet() {
        for c in &report.checks {
            println!(
                "{:<4} {:<46} {:>11.3e}  tol {:.1e}  {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.deviation,
                c.tolerance,
                c.detail
            );
        }
        for n in &report.notes {
            println!("note: {n}");
        }
    }
    if !report.all_passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(CliError::VerificationFailed(failed.join("; ")));
    }
    Ok(vec![path])
}
