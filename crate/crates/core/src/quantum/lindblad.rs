//! Friction Lindblad operators and a direct integrator of the dissipative
//! master equation. The integrator is slow and generic; it serves as the
//! reference for the closed-form channel.

use super::hilbert::HilbertSpec;
use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};

/// `L1 = g sum_{n>=0} sqrt(n+1) |n><n+1|` and its mirror
/// `L2 = g sum_{n>=0} sqrt(n+1) |-n><-n-1|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladPair {
    pub l1: CMatrix,
    pub l2: CMatrix,
    pub g: f64,
}

pub fn build_lindblad(hilbert: HilbertSpec, g: f64) -> Result<LindbladPair> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::Domain(format!("coupling g must be finite and nonnegative, got {g}")));
    }
    let d = hilbert.dim();
    let mut l1 = CMatrix::zeros(d);
    let mut l2 = CMatrix::zeros(d);
    for n in 0..hilbert.n_max() as i64 {
        let v = C64::new(g * ((n + 1) as f64).sqrt(), 0.0);
        let (Some(a), Some(b)) = (hilbert.index(n), hilbert.index(n + 1)) else { continue };
        l1[(a, b)] = v;
        let (Some(a), Some(b)) = (hilbert.index(-n), hilbert.index(-n - 1)) else { continue };
        l2[(a, b)] = v;
    }
    Ok(LindbladPair { l1, l2, g })
}

/// Rescaled pair used for the Weyl symbol check: the coupling `g` is
/// replaced by `sqrt(hbar_T)` with `hbar_T = 1 / (2 pi N)`.
pub fn rescaled_lindblad(hilbert: HilbertSpec) -> LindbladPair {
    let hbar_t = 1.0 / (2.0 * std::f64::consts::PI * hilbert.dim() as f64);
    build_lindblad(hilbert, hbar_t.sqrt()).expect("positive coupling")
}

/// `sum_mu (L rho L^+ - {L^+ L, rho} / 2)`.
pub fn dissipator(ops: &[&CMatrix], rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.dim());
    for l in ops {
        let l_adj = l.adjoint();
        let lrl = l.matmul(rho).matmul(&l_adj);
        let ll = l_adj.matmul(l);
        let left = ll.matmul(rho);
        let right = rho.matmul(&ll);
        out.add_scaled(&lrl, C64::new(1.0, 0.0));
        out.add_scaled(&left, C64::new(-0.5, 0.0));
        out.add_scaled(&right, C64::new(-0.5, 0.0));
    }
    out
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Statistics of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates the autonomous system `dy/dt = f(y)` from 0 to `t_end` with
/// the Dormand-Prince pair, mixed absolute/relative tolerance `tol`.
pub fn integrate_dp45(
    y0: &CMatrix,
    t_end: f64,
    tol: f64,
    f: impl Fn(&CMatrix) -> CMatrix,
) -> Result<(CMatrix, IntegrationStats)> {
    if !(tol > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Integrator(format!("invalid tolerance {tol} or end time {t_end}")));
    }
    let mut y = y0.clone();
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).max(1e-6).min(t_end);
    let mut stats = IntegrationStats { accepted: 0, rejected: 0 };
    let mut k: Vec<CMatrix> = Vec::with_capacity(7);
    let mut first = f(&y);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        k.clear();
        k.push(first.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys.add_scaled(kj, C64::new(h * A[s][j], 0.0));
                }
            }
            k.push(f(&ys));
        }
        // The seventh stage is evaluated at the fifth-order solution (FSAL).
        let mut y_new = y.clone();
        for (j, kj) in k.iter().take(6).enumerate() {
            if A[6][j] != 0.0 {
                y_new.add_scaled(kj, C64::new(h * A[6][j], 0.0));
            }
        }
        let mut err: f64 = 0.0;
        for idx in 0..y.as_slice().len() {
            let e: C64 = (0..7).map(|j| k[j].as_slice()[idx] * (h * E[j])).sum();
            let scale = tol * (1.0 + y.as_slice()[idx].norm().max(y_new.as_slice()[idx].norm()));
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Integrator("non-finite error estimate".into()));
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            first = k[6].clone();
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t_end.max(1.0) {
            return Err(Error::Integrator(format!("step size underflow at t = {t}")));
        }
        if stats.accepted + stats.rejected > 10_000_000 {
            return Err(Error::Integrator("step budget exhausted".into()));
        }
    }
    Ok((y, stats))
}

/// Evolves `rho` under the friction dissipator for time `t`.
pub fn integrate_master_equation(rho: &CMatrix, pair: &LindbladPair, t: f64, tol: f64) -> Result<CMatrix> {
    let ops = [&pair.l1, &pair.l2];
    integrate_dp45(rho, t, tol, |r| dissipator(&ops, r)).map(|(y, _)| y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_entries() {
        let h = HilbertSpec::new(3, 0.2).unwrap();
        let zero = build_lindblad(h, 0.0).unwrap();
        assert_eq!(zero.l1.max_abs(), 0.0);
        assert_eq!(zero.l2.max_abs(), 0.0);
        let g = 0.7;
        let p = build_lindblad(h, g).unwrap();
        let i = |n: i64| h.index(n).unwrap();
        assert_eq!(p.l1[(i(0), i(1))].re, g);
        assert!((p.l1[(i(1), i(2))].re - g * 2f64.sqrt()).abs() < 1e-15);
        assert!((p.l2[(i(-2), i(-3))].re - g * 3f64.sqrt()).abs() < 1e-15);
        let count = |m: &CMatrix| m.as_slice().iter().filter(|x| x.norm() > 0.0).count();
        assert_eq!(count(&p.l1), 3);
        assert_eq!(count(&p.l2), 3);
        assert!(build_lindblad(h, -1.0).is_err());
    }

    #[test]
    fn number_operator_identity() {
        let h = HilbertSpec::new(5, 0.2).unwrap();
        let g = 0.9;
        let p = build_lindblad(h, g).unwrap();
        let mut m = p.l1.adjoint().matmul(&p.l1);
        m.add_scaled(&p.l2.adjoint().matmul(&p.l2), C64::new(1.0, 0.0));
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                let expected = if i == j { g * g * h.level(i).abs() as f64 } else { 0.0 };
                assert!((m[(i, j)] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn integrator_solves_exponential_decay() {
        let y0 = CMatrix::identity(1);
        let (y, _) = integrate_dp45(&y0, 2.0, 1e-12, |y| {
            let mut d = y.clone();
            d.scale(C64::new(-1.3, 0.4));
            d
        })
        .unwrap();
        let exact = (C64::new(-1.3, 0.4) * 2.0).exp();
        assert!((y[(0, 0)] - exact).norm() < 1e-11);
    }
}
