use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::hilbert::HilbertSpec;
use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::measures::{normalize_distribution, MomentumDistribution};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive semidefinite matrix on a truncated
/// momentum basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    hilbert: HilbertSpec,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity. Positivity needs a full
    /// eigendecomposition, so large evolved states skip this constructor.
    pub fn new(hilbert: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(hilbert, matrix)?;
        rho.validate(true)?;
        Ok(rho)
    }

    /// Checks only the dimension.
    pub fn from_matrix_unchecked(hilbert: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        if matrix.dim() != hilbert.dim() {
            return Err(Error::Dimension {
                expected: hilbert.dim(),
                found: matrix.dim(),
            });
        }
        Ok(Self { hilbert, matrix })
    }

    pub fn validate(&self, positivity: bool) -> Result<()> {
        let herm = self.matrix.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian: max |rho - rho^+| = {herm:.3e}")));
        }
        let tr = self.matrix.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if positivity {
            let lambda = self.min_eigenvalue();
            if lambda < -POSITIVITY_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {lambda:.3e}")));
            }
        }
        Ok(())
    }

    pub fn pure(hilbert: HilbertSpec, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != hilbert.dim() {
            return Err(Error::Dimension {
                expected: hilbert.dim(),
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi: Vec<C64> = amplitudes.iter().map(|a| a / norm).collect();
        let m = CMatrix::from_fn(hilbert.dim(), |i, j| psi[i] * psi[j].conj());
        Self::from_matrix_unchecked(hilbert, m)
    }

    /// The projector `|n><n|`.
    pub fn basis_state(hilbert: HilbertSpec, n: i64) -> Result<Self> {
        let i = hilbert
            .index(n)
            .ok_or_else(|| Error::Config(format!("level {n} outside the basis")))?;
        let mut m = CMatrix::zeros(hilbert.dim());
        m[(i, i)] = C64::new(1.0, 0.0);
        Self::from_matrix_unchecked(hilbert, m)
    }

    pub fn maximally_mixed(hilbert: HilbertSpec) -> Self {
        let d = hilbert.dim();
        let mut m = CMatrix::identity(d);
        m.scale(C64::new(1.0 / d as f64, 0.0));
        Self { hilbert, matrix: m }
    }

    pub fn hilbert(&self) -> &HilbertSpec {
        &self.hilbert
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.matrix.to_nalgebra();
        let eig = nalgebra::SymmetricEigen::new(m);
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Tr(f(n) rho)` for a function of the momentum quantum number.
    pub fn expectation_diagonal(&self, f: impl Fn(i64) -> f64) -> f64 {
        (0..self.dim())
            .map(|i| f(self.hilbert.level(i)) * self.matrix[(i, i)].re)
            .sum()
    }

    /// Population of the `width` outermost levels on each side.
    pub fn edge_population(&self, width: usize) -> f64 {
        let d = self.dim();
        let w = width.min(d / 2);
        (0..w).chain(d - w..d).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// Momentum marginal, `P_i = rho_ii`, on bins centered at `p = tau n`.
    pub fn momentum_marginal(&self) -> Result<MomentumDistribution> {
        let mut weights = Vec::with_capacity(self.dim());
        for (i, d) in self.matrix.diag().into_iter().enumerate() {
            if d.re < -POSITIVITY_TOL {
                return Err(Error::InvalidState(format!(
                    "negative population {:.3e} at n = {}",
                    d.re,
                    self.hilbert.level(i)
                )));
            }
            weights.push(d.re.max(0.0));
        }
        normalize_distribution(&weights, self.hilbert.bin_grid())
    }
}

/// Uniform mixture of the momentum states with `|tau n| <= pi`.
pub fn initial_band_state(hilbert: HilbertSpec) -> Result<DensityMatrix> {
    let tau = hilbert.tau();
    if tau * hilbert.n_max() as f64 + 1e-12 < PI {
        return Err(Error::Config(format!(
            "the band |p| <= pi needs tau * n_max >= pi (tau = {tau}, n_max = {})",
            hilbert.n_max()
        )));
    }
    let band = (PI / tau + 1e-12).floor() as i64;
    let count = (2 * band + 1) as f64;
    let weights: Vec<C64> = hilbert
        .levels()
        .map(|n| C64::new(if n.abs() <= band { 1.0 / count } else { 0.0 }, 0.0))
        .collect();
    DensityMatrix::from_matrix_unchecked(hilbert, CMatrix::diagonal(&weights))
}

/// Random mixed state supported on the levels `lo ..= hi`: a Gaussian
/// (Ginibre) matrix `G` of the given rank, normalized `G G^+ / Tr`.
pub fn random_density_matrix<R: Rng + ?Sized>(
    hilbert: HilbertSpec,
    lo: i64,
    hi: i64,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let (a, b) = match (hilbert.index(lo), hilbert.index(hi)) {
        (Some(a), Some(b)) if a <= b => (a, b),
        _ => return Err(Error::Config(format!("support {lo}..={hi} outside the basis"))),
    };
    let d = hilbert.dim();
    let rank = rank.max(1);
    let mut g = vec![C64::new(0.0, 0.0); d * rank];
    for i in a..=b {
        for r in 0..rank {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            g[i * rank + r] = C64::new(re, im);
        }
    }
    let mut m = CMatrix::from_fn(d, |i, j| {
        (0..rank).map(|r| g[i * rank + r] * g[j * rank + r].conj()).sum()
    });
    let tr = m.trace().re;
    m.scale(C64::new(1.0 / tr, 0.0));
    m.hermitize();
    DensityMatrix::from_matrix_unchecked(hilbert, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn band_state_examples() {
        let h = HilbertSpec::covering(PI, 0.412).unwrap();
        let rho = initial_band_state(h).unwrap();
        let p = rho.momentum_marginal().unwrap();
        let populated: Vec<i64> = h
            .levels()
            .zip(p.probabilities())
            .filter(|(_, w)| **w > 0.0)
            .map(|(n, _)| n)
            .collect();
        assert_eq!(populated, (-7..=7).collect::<Vec<_>>());
        assert!(p.probabilities().iter().filter(|w| **w > 0.0).all(|w| (w - 1.0 / 15.0).abs() < 1e-15));
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert_eq!(rho.expectation_diagonal(|n| n as f64), 0.0);
        assert!(initial_band_state(HilbertSpec::new(3, 0.412).unwrap()).is_err());
    }

    #[test]
    fn validation() {
        let h = HilbertSpec::new(2, 0.3).unwrap();
        let mut rng = stream_rng(11, 0);
        let rho = random_density_matrix(h, -1, 2, 3, &mut rng).unwrap();
        assert!(DensityMatrix::new(h, rho.matrix().clone()).is_ok());
        let mut bad = rho.matrix().clone();
        bad[(0, 1)] += C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(h, bad).is_err());
        let mut neg = CMatrix::zeros(5);
        neg[(0, 0)] = C64::new(1.5, 0.0);
        neg[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(matches!(DensityMatrix::new(h, neg), Err(Error::InvalidState(_))));
    }

    #[test]
    fn marginal_of_basis_state() {
        let h = HilbertSpec::new(4, 0.2).unwrap();
        let rho = DensityMatrix::basis_state(h, -2).unwrap();
        let p = rho.momentum_marginal().unwrap();
        assert_eq!(p.probabilities()[2], 1.0);
        assert!((p.bin_centers()[2] + 0.4).abs() < 1e-15);
    }
}
