//! Binned momentum distributions and the scalar measures used to compare
//! classical and quantum marginals: overlap, dispersion complement and
//! participation ratio.

use crate::error::{Error, Result};

const GEOMETRY_TOL: f64 = 1e-12;

/// Uniform bin layout over momentum. Centers are `first_center + i * width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinGrid {
    pub first_center: f64,
    pub width: f64,
    pub count: usize,
}

impl BinGrid {
    pub fn new(first_center: f64, width: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Geometry("bin grid needs at least one bin".into()));
        }
        if !(width > 0.0) || !width.is_finite() || !first_center.is_finite() {
            return Err(Error::Geometry(format!(
                "invalid bin grid: first center {first_center}, width {width}"
            )));
        }
        Ok(Self {
            first_center,
            width,
            count,
        })
    }

    /// Bins centered on the momentum eigenvalues `p = tau * n`,
    /// `n = -n_max ..= n_max`.
    pub fn momentum_levels(n_max: usize, tau: f64) -> Result<Self> {
        Self::new(-(n_max as f64) * tau, tau, 2 * n_max + 1)
    }

    pub fn center(&self, i: usize) -> f64 {
        self.first_center + i as f64 * self.width
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.center(i)).collect()
    }

    /// Index of the bin containing `p`, or `None` when `p` lies outside.
    pub fn locate(&self, p: f64) -> Option<usize> {
        let x = ((p - self.first_center) / self.width).round();
        if x >= 0.0 && x < self.count as f64 {
            Some(x as usize)
        } else {
            None
        }
    }

    /// Nearest bin, clamping out-of-range momenta into the edge bins.
    pub fn locate_clamped(&self, p: f64) -> (usize, bool) {
        let x = ((p - self.first_center) / self.width).round();
        if x < 0.0 {
            (0, true)
        } else if x >= self.count as f64 {
            (self.count - 1, true)
        } else {
            (x as usize, false)
        }
    }

    pub fn matches(&self, other: &BinGrid) -> bool {
        let scale = self.width.abs().max(1.0);
        self.count == other.count
            && (self.width - other.width).abs() <= GEOMETRY_TOL * scale
            && (self.first_center - other.first_center).abs()
                <= GEOMETRY_TOL * scale.max(self.first_center.abs())
    }
}

/// Normalized probability vector over a [`BinGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    grid: BinGrid,
    probabilities: Vec<f64>,
}

impl MomentumDistribution {
    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.grid.width
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.grid.centers()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, &w)| w * self.grid.center(i))
            .sum()
    }
}

/// Builds a distribution proportional to `weights`.
pub fn normalize_distribution(weights: &[f64], grid: BinGrid) -> Result<MomentumDistribution> {
    if weights.len() != grid.count {
        return Err(Error::Geometry(format!(
            "{} weights for {} bins",
            weights.len(),
            grid.count
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::Domain(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(MomentumDistribution {
        grid,
        probabilities: weights.iter().map(|w| w / total).collect(),
    })
}

fn check_geometry(p: &MomentumDistribution, q: &MomentumDistribution) -> Result<()> {
    if p.grid.matches(&q.grid) {
        Ok(())
    } else {
        Err(Error::Geometry(format!(
            "bins differ: {:?} vs {:?}",
            p.grid, q.grid
        )))
    }
}

/// Cosine overlap `sum P_i Q_i / sqrt(sum P_i^2 * sum Q_i^2)`, in `[0, 1]`.
pub fn overlap(p: &MomentumDistribution, q: &MomentumDistribution) -> Result<f64> {
    check_geometry(p, q)?;
    let cross = overlap_sum(&p.probabilities, &q.probabilities);
    let pp = overlap_sum(&p.probabilities, &p.probabilities);
    let qq = overlap_sum(&q.probabilities, &q.probabilities);
    // Multiplication commutes exactly, so overlap(P, Q) == overlap(Q, P).
    let norm = if pp <= qq { (pp * qq).sqrt() } else { (qq * pp).sqrt() };
    Ok((cross / norm).clamp(0.0, 1.0))
}

/// The unnormalized sum `sum P_i Q_i`.
pub fn overlap_literal(p: &MomentumDistribution, q: &MomentumDistribution) -> Result<f64> {
    check_geometry(p, q)?;
    Ok(overlap_sum(&p.probabilities, &q.probabilities))
}

fn overlap_sum(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard deviation of the bin centers weighted by the probabilities.
pub fn dispersion(p: &MomentumDistribution) -> f64 {
    let mean = p.mean();
    let var: f64 = p
        .probabilities
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let d = p.grid.center(i) - mean;
            w * d * d
        })
        .sum();
    var.max(0.0).sqrt()
}

/// `1 - |sigma_P - sigma_Q| / (sigma_P + sigma_Q)`.
pub fn dispersion_complement(p: &MomentumDistribution, q: &MomentumDistribution) -> Result<f64> {
    let sp = dispersion(p);
    let sq = dispersion(q);
    complement_of_dispersions(sp, sq)
}

/// The dispersion complement evaluated on precomputed dispersions.
pub fn complement_of_dispersions(sp: f64, sq: f64) -> Result<f64> {
    let total = sp + sq;
    if total <= 0.0 {
        return Err(Error::UndefinedMeasure(
            "both dispersions are zero; sigma' is 0/0".into(),
        ));
    }
    Ok((1.0 - (sp - sq).abs() / total).clamp(0.0, 1.0))
}

/// `(sum P_i^2)^-1 / N`, between `1/N` (one bin) and `1` (uniform).
pub fn participation_ratio(p: &MomentumDistribution) -> f64 {
    let s: f64 = p.probabilities.iter().map(|w| w * w).sum();
    (1.0 / s / p.len() as f64).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> BinGrid {
        BinGrid::new(-(n as f64 - 1.0) / 2.0, 1.0, n).unwrap()
    }

    fn dist(w: &[f64]) -> MomentumDistribution {
        normalize_distribution(w, grid(w.len())).unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(dist(&[2.0, 2.0]).probabilities(), &[0.5, 0.5]);
        assert_eq!(dist(&[1.0, 0.0, 0.0]).probabilities(), &[1.0, 0.0, 0.0]);
        assert_eq!(dist(&[1.0, 3.0]).probabilities(), &[0.25, 0.75]);
    }

    #[test]
    fn normalization_errors() {
        assert_eq!(
            normalize_distribution(&[0.0, 0.0], grid(2)),
            Err(Error::EmptyDistribution)
        );
        assert!(matches!(
            normalize_distribution(&[1.0, -0.1], grid(2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            normalize_distribution(&[1.0], grid(2)),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn overlap_examples() {
        let p = dist(&[0.1, 0.5, 0.4]);
        assert!((overlap(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        let a = dist(&[1.0, 1.0, 0.0, 0.0]);
        let b = dist(&[0.0, 0.0, 2.0, 1.0]);
        assert_eq!(overlap(&a, &b).unwrap(), 0.0);
        assert_eq!(overlap_literal(&a, &b).unwrap(), 0.0);
        let c = normalize_distribution(&[1.0, 1.0, 1.0], BinGrid::new(0.0, 0.5, 3).unwrap())
            .unwrap();
        assert!(matches!(overlap(&p, &c), Err(Error::Geometry(_))));
    }

    #[test]
    fn dispersion_examples() {
        let delta = dist(&[0.0, 1.0, 0.0]);
        assert_eq!(dispersion(&delta), 0.0);
        let two = dist(&[1.0, 0.0, 1.0]);
        assert!((dispersion(&two) - 1.0).abs() < 1e-15);
        let uniform = dist(&[1.0, 1.0, 1.0]);
        assert!((dispersion(&uniform) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dispersion_complement_examples() {
        let two = dist(&[1.0, 0.0, 1.0]);
        assert!((dispersion_complement(&two, &two).unwrap() - 1.0).abs() < 1e-15);
        // sigma 3 vs sigma 1 on a seven-bin grid.
        let wide = dist(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let narrow = dist(&[0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((dispersion(&wide) - 3.0).abs() < 1e-15);
        assert!((dispersion_complement(&wide, &narrow).unwrap() - 0.5).abs() < 1e-15);
        let delta = dist(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(dispersion_complement(&wide, &delta).unwrap(), 0.0);
        assert!(matches!(
            dispersion_complement(&delta, &delta),
            Err(Error::UndefinedMeasure(_))
        ));
    }

    #[test]
    fn participation_ratio_examples() {
        let n = 8;
        assert!((participation_ratio(&dist(&vec![1.0; n])) - 1.0).abs() < 1e-15);
        let mut w = vec![0.0; n];
        w[3] = 1.0;
        assert!((participation_ratio(&dist(&w)) - 1.0 / n as f64).abs() < 1e-15);
        w[5] = 1.0;
        assert!((participation_ratio(&dist(&w)) - 2.0 / n as f64).abs() < 1e-15);
    }

    fn weights() -> impl Strategy<Value = Vec<f64>> {
        (2usize..40).prop_flat_map(|n| {
            prop::collection::vec(0.0f64..10.0, n)
                .prop_filter("needs positive mass", |w| w.iter().any(|x| *x > 1e-3))
        })
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric_and_bounded(w in weights(), seed in 0u64..1000) {
            let n = w.len();
            let v: Vec<f64> = (0..n).map(|i| ((i as u64 * 7 + seed) % 11) as f64).collect();
            prop_assume!(v.iter().any(|x| *x > 0.0));
            let p = dist(&w);
            let q = dist(&v);
            let pq = overlap(&p, &q).unwrap();
            prop_assert_eq!(pq, overlap(&q, &p).unwrap());
            prop_assert!((0.0..=1.0).contains(&pq));
            prop_assert!((overlap(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn normalized_and_ratio_bounded(w in weights()) {
            let p = dist(&w);
            let total: f64 = p.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let eta = participation_ratio(&p);
            let n = p.len() as f64;
            prop_assert!(eta >= 1.0 / n - 1e-12 && eta <= 1.0 + 1e-12);
        }

        #[test]
        fn relabeling_invariance(w in weights(), shift in 0usize..40) {
            let n = w.len();
            let v: Vec<f64> = w.iter().rev().map(|x| x + 0.5).collect();
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let wp: Vec<f64> = perm.iter().map(|&i| w[i]).collect();
            let vp: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
            let (p, q) = (dist(&w), dist(&v));
            let (pp, qp) = (dist(&wp), dist(&vp));
            prop_assert!((overlap(&p, &q).unwrap() - overlap(&pp, &qp).unwrap()).abs() < 1e-12);
            prop_assert!((participation_ratio(&p) - participation_ratio(&pp)).abs() < 1e-12);
        }

        #[test]
        fn complement_bounded(w in weights(), v in weights()) {
            let p = dist(&w);
            let q = dist(&v);
            if let Ok(s) = complement_of_dispersions(dispersion(&p), dispersion(&q)) {
                prop_assert!((0.0..=1.0).contains(&s));
            }
            prop_assert_eq!(complement_of_dispersions(0.7, 0.7).unwrap(), 1.0);
        }
    }
}
