//! Kick, free rotation and the composed period map.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::channel::DampingChannel;
use super::density::DensityMatrix;
use super::hilbert::HilbertSpec;
use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::measures::overlap;
use crate::params::ModelParams;

/// The kick `U = exp(-i k [cos q + (a/2) cos(2q + phi)])`.
///
/// With position points `q_j = 2 pi j / N` and basis index `b = n + n_max`,
/// `U v = FFT(D * IFFT(v)) / N` where `D_j` is the kick phase at `q_j`; the
/// phase factors from the index shift cancel between the two transforms.
pub struct KickOperator {
    dim: usize,
    phases: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl KickOperator {
    pub fn new(hilbert: HilbertSpec, params: &ModelParams) -> Self {
        let dim = hilbert.dim();
        let mut planner = FftPlanner::new();
        let phases = (0..dim)
            .map(|j| {
                let q = std::f64::consts::TAU * j as f64 / dim as f64;
                let v = q.cos() + 0.5 * params.a() * (2.0 * q + params.phi()).cos();
                C64::from_polar(1.0, -params.k() * v)
            })
            .collect();
        Self {
            dim,
            phases,
            forward: planner.plan_fft_forward(dim),
            inverse: planner.plan_fft_inverse(dim),
        }
    }

    /// `v <- U v`.
    pub fn apply_vector(&self, v: &mut [C64], scratch: &mut [C64]) {
        self.inverse.process_with_scratch(v, scratch);
        let s = 1.0 / self.dim as f64;
        for (x, d) in v.iter_mut().zip(&self.phases) {
            *x *= d * s;
        }
        self.forward.process_with_scratch(v, scratch);
    }

    /// `v <- conj(U conj(v))`, i.e. row vector times `U^+`.
    fn apply_adjoint_right(&self, v: &mut [C64], scratch: &mut [C64]) {
        self.forward.process_with_scratch(v, scratch);
        let s = 1.0 / self.dim as f64;
        for (x, d) in v.iter_mut().zip(&self.phases) {
            *x *= d.conj() * s;
        }
        self.inverse.process_with_scratch(v, scratch);
    }

    fn scratch(&self) -> Vec<C64> {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![C64::new(0.0, 0.0); len]
    }

    /// `rho <- U rho U^+`.
    pub fn apply_matrix(&self, rho: &mut CMatrix) {
        if rho.dim() != self.dim {
            panic!("kick operator of dimension {} applied to {}", self.dim, rho.dim());
        }
        let mut scratch = self.scratch();
        rho.transpose_in_place();
        for row in rho.rows_mut() {
            self.apply_vector(row, &mut scratch);
        }
        rho.transpose_in_place();
        for row in rho.rows_mut() {
            self.apply_adjoint_right(row, &mut scratch);
        }
        rho.hermitize();
    }

    /// Dense matrix of `U`, for tests and small-basis diagnostics.
    pub fn to_matrix(&self) -> CMatrix {
        let mut scratch = self.scratch();
        let mut m = CMatrix::zeros(self.dim);
        for c in 0..self.dim {
            let mut e = vec![C64::new(0.0, 0.0); self.dim];
            e[c] = C64::new(1.0, 0.0);
            self.apply_vector(&mut e, &mut scratch);
            for (r, v) in e.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Phases `exp(-i tau n^2 / 2)`.
fn rotation_phases(hilbert: HilbertSpec, tau: f64) -> Vec<C64> {
    hilbert
        .levels()
        .map(|n| C64::from_polar(1.0, -0.5 * tau * (n * n) as f64))
        .collect()
}

fn rotate(rho: &mut CMatrix, phases: &[C64]) {
    let d = rho.dim();
    for (i, row) in rho.rows_mut().enumerate() {
        for j in (0..d).filter(|&j| j != i) {
            row[j] *= phases[i] * phases[j].conj();
        }
    }
}

pub fn apply_kick(rho: &DensityMatrix, params: &ModelParams) -> DensityMatrix {
    let mut out = rho.clone();
    KickOperator::new(*rho.hilbert(), params).apply_matrix(out.matrix_mut());
    out
}

/// `rho_nm <- exp(-i tau (n^2 - m^2) / 2) rho_nm`.
pub fn apply_free_rotation(rho: &DensityMatrix, tau: f64) -> DensityMatrix {
    let mut out = rho.clone();
    rotate(out.matrix_mut(), &rotation_phases(*rho.hilbert(), tau));
    out
}

/// Precomputed period map: friction channel, then kick, then free rotation.
pub struct PeriodMap {
    hilbert: HilbertSpec,
    channel: DampingChannel,
    kick: KickOperator,
    phases: Vec<C64>,
}

impl PeriodMap {
    pub fn new(hilbert: HilbertSpec, params: &ModelParams) -> Result<Self> {
        Ok(Self {
            hilbert,
            channel: DampingChannel::new(hilbert, params)?,
            kick: KickOperator::new(hilbert, params),
            phases: rotation_phases(hilbert, params.tau()),
        })
    }

    pub fn hilbert(&self) -> &HilbertSpec {
        &self.hilbert
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let mut m = self.channel.apply(rho)?.into_matrix();
        self.kick.apply_matrix(&mut m);
        rotate(&mut m, &self.phases);
        DensityMatrix::from_matrix_unchecked(self.hilbert, m)
    }
}

pub fn period_map(rho: &DensityMatrix, params: &ModelParams) -> Result<DensityMatrix> {
    PeriodMap::new(*rho.hilbert(), params)?.apply(rho)
}

/// Population threshold on the outer levels that aborts an evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageGuard {
    pub threshold: f64,
    pub edge_levels: usize,
}

impl Default for LeakageGuard {
    fn default() -> Self {
        Self {
            threshold: 1e-6,
            edge_levels: 5,
        }
    }
}

/// Final state and diagnostics of [`evolve_periods`].
#[derive(Debug, Clone)]
pub struct QuantumEvolution {
    pub state: DensityMatrix,
    /// Largest edge population seen over all periods.
    pub max_leakage: f64,
    /// `overlap(P_T, P_{T-1})` of the last two momentum marginals.
    pub convergence: Option<f64>,
    pub trace_drift: f64,
}

pub fn evolve_periods(
    rho: DensityMatrix,
    params: &ModelParams,
    periods: usize,
    guard: LeakageGuard,
) -> Result<QuantumEvolution> {
    let map = PeriodMap::new(*rho.hilbert(), params)?;
    evolve_with(&map, rho, periods, guard)
}

pub fn evolve_with(
    map: &PeriodMap,
    mut rho: DensityMatrix,
    periods: usize,
    guard: LeakageGuard,
) -> Result<QuantumEvolution> {
    let mut max_leakage: f64 = rho.edge_population(guard.edge_levels);
    let mut convergence = None;
    for period in 1..=periods {
        let next = map.apply(&rho)?;
        let leak = next.edge_population(guard.edge_levels);
        max_leakage = max_leakage.max(leak);
        if leak > guard.threshold {
            let n_max = rho.hilbert().n_max();
            return Err(Error::Leakage {
                period,
                population: leak,
                n_max,
                suggested_n_max: n_max + n_max / 2 + guard.edge_levels,
            });
        }
        if period == periods {
            convergence = Some(overlap(&next.momentum_marginal()?, &rho.momentum_marginal()?)?);
        }
        rho = next;
    }
    let trace_drift = (rho.trace() - 1.0).norm();
    Ok(QuantumEvolution {
        state: rho,
        max_leakage,
        convergence,
        trace_drift,
    })
}
