use std::f64::consts::TAU;
use std::time::Instant;

use qfric_core::classical::{evolve_ensemble, initial_band_ensemble, momentum_histogram, Ensemble};
use qfric_core::measures::{
    dispersion_complement, overlap, overlap_literal, participation_ratio, BinGrid, MomentumDistribution,
};
use qfric_core::quantum::{evolve_periods, initial_band_state, HilbertSpec, LeakageGuard, QuantumEvolution};
use qfric_core::{Error, ModelParams};

use crate::error::{Result, SweepError};
use crate::plan::{Budgets, Cell};
use crate::record::MeasureRecord;

/// Momentum cutoff for a classical extent: at least `4 pi`, else 10% and
/// two units of headroom over the farthest trajectory.
pub fn momentum_cutoff(extent: f64) -> f64 {
    (2.0 * TAU).max(1.1 * extent + 2.0)
}

/// Noiseless and noisy classical ensembles after the step budget.
#[derive(Debug, Clone)]
pub struct ClassicalPair {
    pub noiseless: Ensemble,
    pub noisy: Ensemble,
}

impl ClassicalPair {
    pub fn run(params: &ModelParams, budgets: &Budgets, seed: u64) -> Result<Self> {
        let init = initial_band_ensemble(budgets.ensemble_size, seed, params.tau())?;
        let noiseless = evolve_ensemble(init.clone(), params, budgets.classical_steps, false);
        let noisy = evolve_ensemble(init, params, budgets.classical_steps, true);
        Ok(Self { noiseless, noisy })
    }

    pub fn extent(&self, tau: f64) -> f64 {
        self.noiseless.max_abs_p(tau).max(self.noisy.max_abs_p(tau))
    }
}

/// Evolves the band state in the smallest smooth basis of half-width at
/// least `n_max`, growing it on leakage up to `n_max_limit`.
pub fn evolve_quantum_sized(
    params: &ModelParams,
    n_max: usize,
    budgets: &Budgets,
) -> qfric_core::Result<QuantumEvolution> {
    let tau = params.tau();
    let mut hilbert = HilbertSpec::covering_smooth(n_max as f64 * tau, tau)?;
    loop {
        match evolve_periods(initial_band_state(hilbert)?, params, budgets.quantum_periods, LeakageGuard::default()) {
            Err(Error::Leakage { suggested_n_max, .. }) if suggested_n_max <= budgets.n_max_limit => {
                hilbert = HilbertSpec::covering_smooth(suggested_n_max as f64 * tau, tau)?;
            }
            other => return other,
        }
    }
}

/// Marginals of one cell on the shared bin grid.
#[derive(Debug, Clone)]
pub struct CellMarginals {
    pub quantum: MomentumDistribution,
    pub noisy: MomentumDistribution,
    pub noiseless: MomentumDistribution,
    pub leakage: f64,
    pub convergence: f64,
    pub n_max: usize,
}

pub fn cell_marginals(params: &ModelParams, budgets: &Budgets, seed: u64) -> Result<CellMarginals> {
    let tau = params.tau();
    let classical = ClassicalPair::run(params, budgets, seed)?;
    let wanted = HilbertSpec::covering(momentum_cutoff(classical.extent(tau)), tau)?.n_max();
    if wanted > budgets.n_max_limit {
        return Err(Error::Config(format!(
            "classical momentum extent needs n_max = {wanted}, above the limit {}",
            budgets.n_max_limit
        ))
        .into());
    }
    let ev = evolve_quantum_sized(params, wanted.max(budgets.n_max), budgets)?;
    let hilbert = *ev.state.hilbert();
    let grid: BinGrid = hilbert.bin_grid();
    let noisy = momentum_histogram(&classical.noisy, grid, tau)?;
    let noiseless = momentum_histogram(&classical.noiseless, grid, tau)?;
    Ok(CellMarginals {
        quantum: ev.state.momentum_marginal()?,
        noisy: noisy.distribution,
        noiseless: noiseless.distribution,
        leakage: ev.max_leakage.max(noisy.out_of_range).max(noiseless.out_of_range),
        convergence: ev.convergence.unwrap_or(f64::NAN),
        n_max: hilbert.n_max(),
    })
}

/// Runs the classical and quantum pipelines for one cell and computes the
/// measures. Deterministic in `seed`, apart from `seconds`.
pub fn run_cell(cell: &Cell, budgets: &Budgets, seed: u64) -> Result<MeasureRecord> {
    let start = Instant::now();
    let attach = |source: qfric_core::Error| SweepError::Cell {
        k: cell.k,
        gamma: cell.gamma,
        hbar: cell.hbar,
        source,
    };
    let params = ModelParams::from_scaled_kick(cell.k, cell.gamma, cell.hbar).map_err(attach)?;
    let m = cell_marginals(&params, budgets, seed).map_err(|e| match e {
        SweepError::Core(source) => attach(source),
        other => other,
    })?;
    let measures = (|| -> qfric_core::Result<_> {
        Ok((
            overlap(&m.quantum, &m.noisy)?,
            dispersion_complement(&m.quantum, &m.noisy)?,
            overlap_literal(&m.quantum, &m.noisy)?,
        ))
    })()
    .map_err(attach)?;
    Ok(MeasureRecord {
        cell_index: cell.index,
        k: cell.k,
        gamma: cell.gamma,
        hbar_eff: cell.hbar,
        overlap: measures.0,
        sigma_prime: measures.1,
        eta_cl: participation_ratio(&m.noiseless),
        eta_q: participation_ratio(&m.quantum),
        overlap_literal: measures.2,
        leakage: m.leakage,
        seconds: start.elapsed().as_secs_f64(),
        eta_cl_noisy: participation_ratio(&m.noisy),
        convergence: m.convergence,
        n_max: m.n_max,
    })
}
