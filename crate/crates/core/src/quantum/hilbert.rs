use crate::error::{Error, Result};
use crate::measures::BinGrid;

/// Truncated momentum basis `|n>`, `n = -n_max ..= n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilbertSpec {
    n_max: usize,
    tau: f64,
}

impl HilbertSpec {
    pub fn new(n_max: usize, tau: f64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { n_max, tau })
    }

    /// Smallest basis with `tau * n_max >= p_extent`.
    pub fn covering(p_extent: f64, tau: f64) -> Result<Self> {
        let n_max = (p_extent / tau - 1e-9).ceil().max(1.0) as usize;
        Self::new(n_max, tau)
    }

    /// Like [`HilbertSpec::covering`], but enlarges `n_max` until the
    /// dimension `2 n_max + 1` factors into primes up to 7, which keeps
    /// the Fourier transforms of the kick fast.
    pub fn covering_smooth(p_extent: f64, tau: f64) -> Result<Self> {
        let mut n_max = Self::covering(p_extent, tau)?.n_max;
        while !is_smooth(2 * n_max + 1) {
            n_max += 1;
        }
        Self::new(n_max, tau)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        2 * self.n_max + 1
    }

    /// Basis index of level `n`.
    pub fn index(&self, n: i64) -> Option<usize> {
        let i = n + self.n_max as i64;
        (0..self.dim() as i64).contains(&i).then_some(i as usize)
    }

    /// Momentum quantum number of basis index `i`.
    pub fn level(&self, i: usize) -> i64 {
        i as i64 - self.n_max as i64
    }

    pub fn levels(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.dim()).map(|i| self.level(i))
    }

    pub fn p_max(&self) -> f64 {
        self.tau * self.n_max as f64
    }

    /// Bins centered on `p = tau * n`, shared by classical and quantum marginals.
    pub fn bin_grid(&self) -> BinGrid {
        BinGrid {
            first_center: -(self.n_max as f64) * self.tau,
            width: self.tau,
            count: self.dim(),
        }
    }
}

fn is_smooth(mut d: usize) -> bool {
    for p in [3, 5, 7] {
        while d % p == 0 {
            d /= p;
        }
    }
    d == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing() {
        let h = HilbertSpec::new(3, 0.5).unwrap();
        assert_eq!(h.dim(), 7);
        assert_eq!(h.index(-3), Some(0));
        assert_eq!(h.index(0), Some(3));
        assert_eq!(h.index(4), None);
        assert_eq!(h.level(6), 3);
        assert!(HilbertSpec::new(0, 0.5).is_err());
        assert_eq!(HilbertSpec::covering(std::f64::consts::PI * 4.0, 0.137).unwrap().n_max(), 92);
        // 185 = 5 * 37 is not smooth; 189 = 3^3 * 7 is.
        assert_eq!(HilbertSpec::covering_smooth(std::f64::consts::PI * 4.0, 0.137).unwrap().dim(), 189);
    }
}
