//! Closed-form solution of the friction master equation over one period.
//!
//! Each momentum half-axis is a damped ladder: `L1` lowers `n > 0` towards
//! 0, `L2` raises `n < 0` towards 0, and `L1^+ L1 + L2^+ L2 = g^2 |n|`.
//! Over unit time the populations follow a binomial cascade with survival
//! probability `eta = exp(-g^2) = gamma`, so the channel acting inside one
//! half-axis is
//!
//! ```text
//! rho'(A, B) = sum_k u_k(A) u_k(B) rho(A + k, B + k),
//! u_k(A)     = sqrt(C(A + k, k)) eta^(A/2) (1 - eta)^(k/2)
//! ```
//!
//! with `A, B = |n|`. Elements coupling opposite half-axes only decay, by
//! `eta^((|n| + |m|)/2)`, and `|0><0|` collects feeding from both sides.
//! Truncating the basis leaves the cascade closed, so this is exact on the
//! truncated space.

use super::density::DensityMatrix;
use super::hilbert::HilbertSpec;
use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Cascade weights below this are dropped. Their squares are populations,
/// so the trace error per dropped term is below 1e-32.
const WEIGHT_CUTOFF: f64 = 1e-16;

/// Nonnegligible cascade weights `u_k(A)` for `k` in `first..first + len`.
#[derive(Debug, Clone)]
struct WeightRow {
    first: usize,
    values: Vec<f64>,
}

/// Precomputed channel for a fixed basis and `eta`.
#[derive(Debug, Clone)]
pub struct DampingChannel {
    hilbert: HilbertSpec,
    eta: f64,
    rows: Vec<WeightRow>,
    /// `eta^(A/2)` for `A = 0..=n_max`.
    decay: Vec<f64>,
}

impl DampingChannel {
    /// Channel with survival probability `eta` per unit time.
    pub fn with_eta(hilbert: HilbertSpec, eta: f64) -> Result<Self> {
        if eta == 0.0 {
            return Err(Error::DegenerateChannel);
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("survival probability {eta} outside (0, 1]")));
        }
        let m = hilbert.n_max() + 1;
        let ln_eta = eta.ln();
        let ln_rest = (1.0 - eta).ln();
        let mut ln_fact = vec![0.0; 2 * m + 1];
        for i in 1..ln_fact.len() {
            ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
        }
        let ln_cut = WEIGHT_CUTOFF.ln();
        let rows = (0..m)
            .map(|a| {
                let mut first = None;
                let mut values = Vec::new();
                for k in 0..m - a {
                    let ln_u = if k == 0 {
                        0.5 * a as f64 * ln_eta
                    } else {
                        0.5 * (ln_fact[a + k] - ln_fact[a] - ln_fact[k] + a as f64 * ln_eta + k as f64 * ln_rest)
                    };
                    if ln_u >= ln_cut {
                        first.get_or_insert(k);
                        values.push(ln_u.exp());
                    } else if first.is_some() {
                        break;
                    }
                }
                WeightRow {
                    first: first.unwrap_or(0),
                    values,
                }
            })
            .collect();
        let decay = (0..m).map(|a| (0.5 * a as f64 * ln_eta).exp()).collect();
        Ok(Self {
            hilbert,
            eta,
            rows,
            decay,
        })
    }

    /// The friction channel over one period, `eta = gamma`.
    pub fn new(hilbert: HilbertSpec, params: &ModelParams) -> Result<Self> {
        Self::with_eta(hilbert, params.gamma())
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.hilbert().dim() != self.hilbert.dim() {
            return Err(Error::Dimension {
                expected: self.hilbert.dim(),
                found: rho.dim(),
            });
        }
        let out = self.apply_matrix(rho.matrix());
        DensityMatrix::from_matrix_unchecked(self.hilbert, out)
    }

    /// Applies the channel to any Hermitian matrix of the right size.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        if self.eta == 1.0 {
            return rho.clone();
        }
        let d = self.hilbert.dim();
        let c = self.hilbert.n_max();
        let mut out = CMatrix::zeros(d);
        // Opposite half-axes: pure decay.
        for i in 0..c {
            for j in c + 1..d {
                let v = rho[(i, j)] * (self.decay[c - i] * self.decay[j - c]);
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        let r00 = rho[(c, c)];
        let plus = |a: usize| c + a;
        let minus = |a: usize| c - a;
        let p00 = self.cascade_block(rho, &mut out, plus);
        let m00 = self.cascade_block(rho, &mut out, minus);
        out[(c, c)] = C64::new((p00 + m00 - r00).re, 0.0);
        out
    }

    /// Writes the cascade of one half-axis into `out` and returns the value
    /// it assigns to the `(0, 0)` element.
    fn cascade_block(&self, rho: &CMatrix, out: &mut CMatrix, index: impl Fn(usize) -> usize) -> C64 {
        let m = self.rows.len();
        let mut origin = C64::new(0.0, 0.0);
        for a in 0..m {
            let ra = &self.rows[a];
            if ra.values.is_empty() {
                continue;
            }
            for b in a..m {
                let rb = &self.rows[b];
                let lo = ra.first.max(rb.first);
                let hi = (ra.first + ra.values.len())
                    .min(rb.first + rb.values.len())
                    .min(m - b);
                let mut s = C64::new(0.0, 0.0);
                for k in lo..hi {
                    let w = ra.values[k - ra.first] * rb.values[k - rb.first];
                    s += rho[(index(a + k), index(b + k))] * w;
                }
                if a == 0 && b == 0 {
                    origin = s;
                    continue;
                }
                let (i, j) = (index(a), index(b));
                out[(i, j)] = s;
                out[(j, i)] = s.conj();
            }
        }
        origin
    }
}

/// One period of friction: `exp(Lambda)` with `g^2 = 2 nu`, so that the
/// momentum contracts by `gamma` per period.
pub fn dissipative_channel(rho: &DensityMatrix, params: &ModelParams) -> Result<DensityMatrix> {
    DampingChannel::new(*rho.hilbert(), params)?.apply(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::density::random_density_matrix;
    use crate::quantum::lindblad::{build_lindblad, integrate_master_equation};
    use crate::rng::stream_rng;

    fn params(gamma: f64) -> ModelParams {
        ModelParams::new(1.0, gamma, 0.2).unwrap()
    }

    #[test]
    fn dark_state_is_fixed() {
        let h = HilbertSpec::new(4, 0.2).unwrap();
        let rho = DensityMatrix::basis_state(h, 0).unwrap();
        assert_eq!(dissipative_channel(&rho, &params(0.3)).unwrap(), rho);
    }

    #[test]
    fn two_level_cascade() {
        let h = HilbertSpec::new(3, 0.2).unwrap();
        for &gamma in &[0.9, 0.56, 0.34, 0.1] {
            for n in [1i64, -1] {
                let rho = DensityMatrix::basis_state(h, n).unwrap();
                let out = dissipative_channel(&rho, &params(gamma)).unwrap();
                let i1 = h.index(n).unwrap();
                let i0 = h.index(0).unwrap();
                assert!((out.matrix()[(i1, i1)].re - gamma).abs() < 1e-15);
                assert!((out.matrix()[(i0, i0)].re - (1.0 - gamma)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_at_zero_gamma() {
        let h = HilbertSpec::new(2, 0.2).unwrap();
        let rho = DensityMatrix::basis_state(h, 1).unwrap();
        assert_eq!(dissipative_channel(&rho, &params(0.0)), Err(Error::DegenerateChannel));
    }

    #[test]
    fn matches_master_equation() {
        let h = HilbertSpec::new(6, 0.2).unwrap();
        let mut rng = stream_rng(5, 1);
        for &gamma in &[0.8, 0.3] {
            let p = params(gamma);
            let rho = random_density_matrix(h, -6, 6, 4, &mut rng).unwrap();
            let exact = dissipative_channel(&rho, &p).unwrap();
            let pair = build_lindblad(h, p.g()).unwrap();
            let reference = integrate_master_equation(rho.matrix(), &pair, 1.0, 1e-12).unwrap();
            assert!(exact.matrix().max_abs_diff(&reference) < 1e-9);
        }
    }
}
