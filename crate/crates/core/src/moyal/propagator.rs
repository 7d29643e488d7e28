//! Semiclassical period map for a phase-space density: exact back-traced
//! transport along the noiseless map followed by the `hbar nu` diffusion of
//! the friction term, integrated over one period with explicit substeps.
//!
//! Coordinates are map units, `q` in `[0, 2 pi)` and `p = tau n`, where the
//! friction symbol has `l = 1` and `hbar = tau`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use super::field::{Axis, AxisKind, PhaseSpaceField};
use crate::classical::{inverse_map_step, PhaseState};
use crate::error::{Error, Result};
use crate::measures::{normalize_distribution, BinGrid, MomentumDistribution};
use crate::params::ModelParams;
use crate::quantum::matrix::C64;

/// Grid for [`semiclassical_period_map`]: periodic `q`, cell-centered `p`
/// split at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalGrid {
    pub nq: usize,
    pub np: usize,
    pub p_max: f64,
}

impl SemiclassicalGrid {
    pub fn new(nq: usize, np: usize, p_max: f64) -> Result<Self> {
        if nq < 8 || np < 12 || np % 2 != 0 {
            return Err(Error::Config(format!("grid {nq}x{np} too small or odd in p")));
        }
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(Error::Config(format!("p_max must be positive, got {p_max}")));
        }
        Ok(Self { nq, np, p_max })
    }

    pub fn axes(&self) -> (Axis, Axis) {
        (Axis::periodic(0.0, TAU, self.nq), Axis::split_cells(self.p_max, self.np))
    }

    /// Uniform density on `|p| <= pi`, normalized on the grid.
    pub fn initial_band(&self) -> PhaseSpaceField {
        let (q, p) = self.axes();
        let w = PhaseSpaceField::from_real_fn(q, p, |_, p| if p.abs() <= std::f64::consts::PI { 1.0 } else { 0.0 });
        let mass = w.integral().re;
        w.scale_real(1.0 / mass)
    }
}

/// Result of one semiclassical period.
#[derive(Debug, Clone)]
pub struct PeriodMapReport {
    pub field: PhaseSpaceField,
    /// Diffusion substeps used.
    pub substeps: usize,
    /// Relative mass change from interpolation and from densities mapped
    /// outside the `p` range, removed by rescaling.
    pub mass_correction: f64,
}

/// One period with automatically chosen diffusion substeps.
pub fn semiclassical_period_map(w: &PhaseSpaceField, params: &ModelParams) -> Result<PhaseSpaceField> {
    Ok(semiclassical_period_map_with(w, params, None)?.field)
}

/// One period; `substeps = Some(n)` forces `n` diffusion substeps and fails
/// if that violates the explicit stability bound.
pub fn semiclassical_period_map_with(
    w: &PhaseSpaceField,
    params: &ModelParams,
    substeps: Option<usize>,
) -> Result<PeriodMapReport> {
    let (qa, pa) = (*w.q_axis(), *w.p_axis());
    if qa.kind != AxisKind::Periodic || (qa.step * qa.len as f64 - TAU).abs() > 1e-9 {
        return Err(Error::Config("q axis must be periodic on [0, 2 pi)".into()));
    }
    if pa.kind == AxisKind::Periodic {
        return Err(Error::Config("p axis must be open".into()));
    }
    let mass = w.integral().re;
    let mut out = transport(w, params)?;
    let moved = out.integral().re;
    let mass_correction = if moved != 0.0 { mass / moved - 1.0 } else { 0.0 };
    if moved != 0.0 {
        out = out.scale_real(mass / moved);
    }
    let hbar_nu = params.hbar_eff() * params.nu();
    let substeps = diffuse(&mut out, hbar_nu, params.diffusion_d(), 1.0, substeps)?;
    Ok(PeriodMapReport {
        field: out,
        substeps,
        mass_correction,
    })
}

/// `W_new(x) = W_old(M^{-1} x) / gamma` with bilinear interpolation; zero
/// where the preimage leaves the `p` range.
fn transport(w: &PhaseSpaceField, params: &ModelParams) -> Result<PhaseSpaceField> {
    let (qa, pa) = (*w.q_axis(), *w.p_axis());
    let tau = params.tau();
    let jac = 1.0 / params.gamma();
    let nq = qa.len;
    let src = w.values();
    let mut out = vec![C64::new(0.0, 0.0); nq * pa.len];
    out.par_chunks_mut(nq).enumerate().try_for_each(|(ip, row)| -> Result<()> {
        let pbar = pa.node(ip);
        for (iq, v) in row.iter_mut().enumerate() {
            let pre = inverse_map_step(PhaseState::new(qa.node(iq), pbar / tau), params)?;
            *v = interpolate(src, &qa, &pa, pre.q, pre.p(tau)) * jac;
        }
        Ok(())
    })?;
    PhaseSpaceField::from_values(qa, pa, out)
}

fn interpolate(values: &[C64], qa: &Axis, pa: &Axis, q: f64, p: f64) -> C64 {
    let x = (p - pa.start) / pa.step;
    if x < 0.0 || x > (pa.len - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let i0 = (x.floor() as usize).min(pa.len - 2);
    let fx = x - i0 as f64;
    let y = (q - qa.start).rem_euclid(TAU) / qa.step;
    let j0 = (y.floor() as usize) % qa.len;
    let j1 = (j0 + 1) % qa.len;
    let fy = y - y.floor();
    let nq = qa.len;
    let at = |i: usize, j: usize| values[i * nq + j];
    (at(i0, j0) * (1.0 - fy) + at(i0, j1) * fy) * (1.0 - fx) + (at(i0 + 1, j0) * (1.0 - fy) + at(i0 + 1, j1) * fy) * fx
}

/// Integrates `W_t = c [W_qq / (4|p|) + d_p(|p| W_p)] + d W_pp` over `time`
/// with forward Euler substeps, where `c = hbar nu`. The `p` part is in flux
/// form with zero flux through the outer edges, so the integral of `W` is
/// conserved to rounding. `|p|` in the denominator is floored at two cells.
/// Returns the number of substeps.
pub fn diffuse(
    w: &mut PhaseSpaceField,
    hbar_nu: f64,
    thermal: f64,
    time: f64,
    substeps: Option<usize>,
) -> Result<usize> {
    if hbar_nu == 0.0 && thermal == 0.0 {
        return Ok(0);
    }
    let (qa, pa) = (*w.q_axis(), *w.p_axis());
    let (nq, np) = (qa.len, pa.len);
    let (dq2, dp2) = (qa.step * qa.step, pa.step * pa.step);
    let dqq: Vec<f64> = (0..np)
        .map(|i| hbar_nu / (4.0 * pa.node(i).abs().max(2.0 * pa.step)))
        .collect();
    // p-flux coefficient at the interface between rows i and i + 1
    let face: Vec<f64> = (0..np - 1)
        .map(|i| hbar_nu * (pa.node(i) + 0.5 * pa.step).abs() + thermal)
        .collect();
    let rate = (0..np)
        .map(|i| {
            let up = if i + 1 < np { face[i] } else { 0.0 };
            let down = if i > 0 { face[i - 1] } else { 0.0 };
            2.0 * dqq[i] / dq2 + (up + down) / dp2
        })
        .fold(0.0, f64::max);
    let dt_max = 1.0 / rate;
    let n = match substeps {
        Some(n) => {
            if n == 0 || time / n as f64 > dt_max {
                return Err(Error::Stability(format!(
                    "{n} diffusion substeps give dt = {:.3e}, above the limit {dt_max:.3e}",
                    time / n.max(1) as f64
                )));
            }
            n
        }
        None => ((time / dt_max) * 1.05).ceil().max(1.0) as usize,
    };
    let dt = time / n as f64;
    let mut cur: Vec<C64> = w.values().to_vec();
    let mut next = cur.clone();
    for _ in 0..n {
        next.par_chunks_mut(nq).enumerate().for_each(|(ip, row)| {
            let base = ip * nq;
            for (iq, v) in row.iter_mut().enumerate() {
                let c = cur[base + iq];
                let left = cur[base + (iq + nq - 1) % nq];
                let right = cur[base + (iq + 1) % nq];
                let mut d = dqq[ip] * (left - 2.0 * c + right) / dq2;
                if ip + 1 < np {
                    d += face[ip] * (cur[base + nq + iq] - c) / dp2;
                }
                if ip > 0 {
                    d -= face[ip - 1] * (c - cur[base - nq + iq]) / dp2;
                }
                *v = c + dt * d;
            }
        });
        std::mem::swap(&mut cur, &mut next);
    }
    w.values_mut().copy_from_slice(&cur);
    Ok(n)
}

/// Momentum marginal of a map-unit field, rebinned onto `grid`. Each `p` row
/// is assigned to the bin containing it.
pub fn rebinned_marginal(w: &PhaseSpaceField, grid: BinGrid) -> Result<MomentumDistribution> {
    let marg = w.p_marginal();
    let pa = *w.p_axis();
    let mut weights = vec![0.0; grid.count];
    for (i, m) in marg.iter().enumerate() {
        let (b, _) = grid.locate_clamped(pa.node(i));
        weights[b] += m.max(0.0);
    }
    normalize_distribution(&weights, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(w: &PhaseSpaceField) -> (f64, f64, f64) {
        let marg = w.p_marginal();
        let pa = w.p_axis();
        let m0: f64 = marg.iter().sum::<f64>() * pa.step;
        let m1: f64 = marg.iter().enumerate().map(|(i, m)| m * pa.node(i)).sum::<f64>() * pa.step / m0;
        let m2: f64 = marg.iter().enumerate().map(|(i, m)| m * pa.node(i).powi(2)).sum::<f64>() * pa.step / m0;
        (m0, m1, m2 - m1 * m1)
    }

    #[test]
    fn free_transport_translates_blob() {
        let grid = SemiclassicalGrid::new(256, 128, 4.0).unwrap();
        let (q, p) = grid.axes();
        let p0 = 1.0;
        let blob = |q: f64, p: f64, c: f64| {
            let dq = (q - c + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
            (-(dq * dq) / 0.1 - (p - p0).powi(2) / 0.1).exp()
        };
        let w = PhaseSpaceField::from_real_fn(q, p, |q, p| blob(q, p, 2.0));
        let params = ModelParams::from_scaled_kick(0.0, 1.0, 0.137).unwrap();
        let out = semiclassical_period_map_with(&w, &params, None).unwrap();
        assert_eq!(out.substeps, 0);
        // each row shifts by its own p; compare against the exact sheared field
        let exact = PhaseSpaceField::from_real_fn(q, p, |q, p| blob(q - p, p, 2.0));
        let err = out.field.max_abs_diff_where(&exact, |_, _| true).unwrap();
        assert!(err < 0.01, "interpolation error {err}");
        assert!((out.field.integral() - w.integral()).norm() < 1e-10);
    }

    #[test]
    fn diffusion_conserves_mass_and_grows_variance() {
        let grid = SemiclassicalGrid::new(64, 400, 4.0).unwrap();
        let (q, p) = grid.axes();
        let p0 = 2.0;
        let mut w = PhaseSpaceField::from_real_fn(q, p, |q, p| (1.0 + 0.3 * q.cos()) * (-(p - p0).powi(2) / 0.02).exp());
        let (m0, _, v0) = moments(&w);
        let hbar_nu = 0.137 * 0.3;
        diffuse(&mut w, hbar_nu, 0.0, 1.0, None).unwrap();
        let (m1, _, v1) = moments(&w);
        assert!((m1 - m0).abs() < 1e-12 * m0);
        let expected = 2.0 * hbar_nu * p0;
        assert!(((v1 - v0) - expected).abs() < 0.03 * expected, "{} vs {expected}", v1 - v0);
    }

    #[test]
    fn forced_substeps_are_checked() {
        let grid = SemiclassicalGrid::new(64, 64, 4.0).unwrap();
        let mut w = grid.initial_band();
        assert!(matches!(diffuse(&mut w, 0.05, 0.0, 1.0, Some(1)), Err(Error::Stability(_))));
        let params = ModelParams::from_scaled_kick(4.56, 0.56, 0.137).unwrap();
        assert!(matches!(
            semiclassical_period_map_with(&grid.initial_band(), &params, Some(1)),
            Err(Error::Stability(_))
        ));
    }

    #[test]
    fn period_preserves_mass() {
        let grid = SemiclassicalGrid::new(128, 128, 12.0).unwrap();
        let params = ModelParams::from_scaled_kick(4.56, 0.56, 0.137).unwrap();
        let mut w = grid.initial_band();
        for _ in 0..3 {
            let r = semiclassical_period_map_with(&w, &params, None).unwrap();
            assert!((r.field.integral().re - 1.0).abs() < 1e-6);
            w = r.field;
        }
    }
}
