//! Discrete Weyl symbols and Wigner functions on the doubled `2N x 2N` grid.
//!
//! Grid rows are labelled by half-integers `a = -n_max - 1/2 + i/2` and
//! columns by `b = j/2`, `j < 2N`. The symbol of `A` is
//! `A(a, b) = sum_k <2a - k|A|k> exp(i 2 pi 2 (a - k) b / N)`, so matrix
//! elements with an even index sum `n + m` land on integer rows and those
//! with an odd sum on half-integer rows.

use std::f64::consts::PI;

use super::density::DensityMatrix;
use super::hilbert::HilbertSpec;
use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::moyal::field::{Axis, AxisKind, PhaseSpaceField};

/// `S[i][j]` for row `a = -n_max - 1/2 + i/2` and column `b = j/2`.
fn symbol_values(a: &CMatrix, hilbert: HilbertSpec) -> Vec<C64> {
    let n = hilbert.dim();
    let n_max = hilbert.n_max() as i64;
    let size = 2 * n;
    // exp(i pi t / N) for t mod 2N
    let table: Vec<C64> = (0..size).map(|t| C64::from_polar(1.0, PI * t as f64 / n as f64)).collect();
    let mut out = vec![C64::new(0.0, 0.0); size * size];
    for i in 0..size {
        // 2a = m with a = -n_max - 1/2 + i/2
        let m = i as i64 - 2 * n_max - 1;
        let k_lo = (-n_max).max(m - n_max);
        let k_hi = n_max.min(m + n_max);
        let row = &mut out[i * size..(i + 1) * size];
        for k in k_lo..=k_hi {
            let elem = a[(hilbert.index(m - k).unwrap(), hilbert.index(k).unwrap())];
            if elem == C64::new(0.0, 0.0) {
                continue;
            }
            let shift = (m - 2 * k).rem_euclid(size as i64) as usize;
            for (j, v) in row.iter_mut().enumerate() {
                *v += elem * table[(shift * j) % size];
            }
        }
    }
    out
}

/// Discrete Weyl symbol in torus coordinates `(q, p) = (b/N, a/N)`, with
/// `q` periodic on `[0, 1)`.
pub fn discrete_weyl_symbol(a: &CMatrix, hilbert: HilbertSpec) -> Result<PhaseSpaceField> {
    let n = hilbert.dim();
    if a.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            found: a.dim(),
        });
    }
    let nf = n as f64;
    let q = Axis::periodic(0.0, 1.0, 2 * n);
    let p = Axis {
        start: (-(hilbert.n_max() as f64) - 0.5) / nf,
        step: 0.5 / nf,
        len: 2 * n,
        kind: AxisKind::Open,
    };
    PhaseSpaceField::from_values(q, p, symbol_values(a, hilbert))
}

/// Wigner function in physical coordinates `q = 2 pi b / N`, `p = tau a`,
/// normalized so that `sum W dq dp = 1` and the sum over `q` of an integer
/// row reproduces the population of that momentum level.
pub fn wigner_function(rho: &DensityMatrix) -> Result<PhaseSpaceField> {
    let hilbert = *rho.hilbert();
    let n = hilbert.dim();
    let tau = hilbert.tau();
    let q = Axis::periodic(0.0, 2.0 * PI, 2 * n);
    let p = Axis {
        start: tau * (-(hilbert.n_max() as f64) - 0.5),
        step: 0.5 * tau,
        len: 2 * n,
        kind: AxisKind::Open,
    };
    let norm = 1.0 / (2.0 * n as f64 * q.step * p.step);
    let values = symbol_values(rho.matrix(), hilbert)
        .into_iter()
        .map(|v| C64::new(v.re * norm, 0.0))
        .collect();
    PhaseSpaceField::from_values(q, p, values)
}

/// Closed-form symbol `sqrt(l (|p| + hbar/2l)) exp(-i sign(p) q / l)` of the
/// rescaled friction operator, `l = 1/(2 pi)`, `hbar = 1/(2 pi N)`.
pub fn lindblad_symbol_closed_form(q: f64, p: f64, n: usize) -> C64 {
    let l = 1.0 / (2.0 * PI);
    let hbar = 1.0 / (2.0 * PI * n as f64);
    let s = if p > 0.0 {
        1.0
    } else if p < 0.0 {
        -1.0
    } else {
        0.0
    };
    C64::from_polar((l * (p.abs() + hbar / (2.0 * l))).sqrt(), -s * q / l)
}

/// Maximum deviation between the discrete symbol of `L1 + L2` (rescaled) and
/// the closed form, over the half-integer rows with `|p| > 1/N`. Integer rows
/// carry no weight of `L` at all, and the first row `a = -n_max - 1/2` would
/// pair with the level `-n_max - 1` outside the basis, so both are excluded.
pub fn lindblad_symbol_deviation(hilbert: HilbertSpec) -> Result<f64> {
    let pair = super::lindblad::rescaled_lindblad(hilbert);
    let mut l = pair.l1.clone();
    l.add_scaled(&pair.l2, C64::new(1.0, 0.0));
    let field = discrete_weyl_symbol(&l, hilbert)?;
    let n = hilbert.dim();
    let (qa, pa) = (*field.q_axis(), *field.p_axis());
    let mut worst: f64 = 0.0;
    for ip in (2..pa.len).filter(|i| i % 2 == 0) {
        let p = pa.node(ip);
        if p.abs() <= 1.0 / n as f64 {
            continue;
        }
        for iq in 0..qa.len {
            let expected = lindblad_symbol_closed_form(qa.node(iq), p, n);
            worst = worst.max((field.get(iq, ip) - expected).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::density::random_density_matrix;
    use crate::rng::stream_rng;

    /// Direct transcription of the defining sum, one grid point at a time.
    fn direct(a: &CMatrix, h: HilbertSpec, i: usize, j: usize) -> C64 {
        let n = h.dim() as f64;
        let av = -(h.n_max() as f64) - 0.5 + i as f64 / 2.0;
        let bv = j as f64 / 2.0;
        let mut s = C64::new(0.0, 0.0);
        for k in h.levels() {
            let left = 2.0 * av - k as f64;
            if let Some(r) = h.index(left.round() as i64) {
                s += a[(r, h.index(k).unwrap())]
                    * C64::from_polar(1.0, 2.0 * PI * 2.0 * (av - k as f64) * bv / n);
            }
        }
        s
    }

    #[test]
    fn matches_direct_sum() {
        let h = HilbertSpec::new(3, 0.5).unwrap();
        let mut rng = stream_rng(5, 0);
        let rho = random_density_matrix(h, -3, 3, 7, &mut rng).unwrap();
        let f = discrete_weyl_symbol(rho.matrix(), h).unwrap();
        for i in 0..2 * h.dim() {
            for j in 0..2 * h.dim() {
                assert!((f.get(j, i) - direct(rho.matrix(), h, i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_symbol() {
        let h = HilbertSpec::new(4, 0.5).unwrap();
        let f = discrete_weyl_symbol(&CMatrix::identity(h.dim()), h).unwrap();
        for i in 0..2 * h.dim() {
            let expected = if i % 2 == 1 { 1.0 } else { 0.0 };
            for j in 0..2 * h.dim() {
                assert!((f.get(j, i) - C64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn number_state_symbol_sits_on_its_row() {
        let h = HilbertSpec::new(5, 0.5).unwrap();
        let n = 2;
        let rho = DensityMatrix::basis_state(h, n).unwrap();
        let f = discrete_weyl_symbol(rho.matrix(), h).unwrap();
        for i in 0..2 * h.dim() {
            let p = f.p_axis().node(i);
            let on_line = (p - n as f64 / h.dim() as f64).abs() < 1e-12;
            for j in 0..2 * h.dim() {
                let expected = if on_line { 1.0 } else { 0.0 };
                assert!((f.get(j, i).re - expected).abs() < 1e-12 && f.get(j, i).im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lindblad_symbol_matches_closed_form() {
        for n_max in [16, 32] {
            let h = HilbertSpec::new(n_max, 0.1).unwrap();
            let dev = lindblad_symbol_deviation(h).unwrap();
            assert!(dev < 1e-8, "N = {}: deviation {dev}", h.dim());
        }
    }

    #[test]
    fn wigner_marginal_and_normalization() {
        let h = HilbertSpec::new(6, 0.3).unwrap();
        let mut rng = stream_rng(9, 1);
        let rho = random_density_matrix(h, -6, 6, 4, &mut rng).unwrap();
        let w = wigner_function(&rho).unwrap();
        assert!((w.integral() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let marg = w.p_marginal();
        let dp = w.p_axis().step;
        for (i, m) in marg.iter().enumerate() {
            let expected = if i % 2 == 1 { rho.matrix()[(i / 2, i / 2)].re } else { 0.0 };
            assert!((m * dp - expected).abs() < 1e-10, "row {i}");
        }
    }

    #[test]
    fn maximally_mixed_is_flat_and_cat_state_is_negative() {
        let h = HilbertSpec::new(6, 0.3).unwrap();
        let w = wigner_function(&DensityMatrix::maximally_mixed(h)).unwrap();
        let first = w.get(0, 1).re;
        for i in (1..2 * h.dim()).step_by(2) {
            for j in 0..2 * h.dim() {
                assert!((w.get(j, i).re - first).abs() < 1e-12);
            }
        }
        let mut amp = vec![C64::new(0.0, 0.0); h.dim()];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        amp[h.index(3).unwrap()] = C64::new(s, 0.0);
        amp[h.index(-3).unwrap()] = C64::new(s, 0.0);
        let cat = DensityMatrix::pure(h, &amp).unwrap();
        let w = wigner_function(&cat).unwrap();
        let min = w.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        assert!(min < -0.1 * w.max_abs(), "fringes should go negative, min {min}");
    }
}
