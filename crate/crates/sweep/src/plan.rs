use serde::{Deserialize, Serialize};

use qfric_core::rng::derive_seed;

use crate::error::{Result, SweepError};

pub const GAMMA_MIN: f64 = 0.01;
pub const GAMMA_MAX: f64 = 0.99;

/// Per-cell work limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub ensemble_size: usize,
    pub classical_steps: u64,
    pub quantum_periods: usize,
    /// Smallest basis half-width; cells enlarge it to cover the classical
    /// momentum extent.
    pub n_max: usize,
    /// Largest basis half-width a cell may use. At the default a dense
    /// density matrix takes about 1 GB.
    pub n_max_limit: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            ensemble_size: 100_000,
            classical_steps: 2000,
            quantum_periods: 50,
            n_max: 1,
            n_max_limit: 4096,
        }
    }
}

/// A rectangular `(k, gamma)` grid repeated for every `hbar_eff`. Here `k`
/// is the scaled kick strength `K = k_n * hbar_eff`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub k_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub hbar_list: Vec<f64>,
    pub budgets: Budgets,
    pub master_seed: u64,
}

/// One point of the plan. `index` runs over `hbar`, then `gamma`, then `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub k: f64,
    pub gamma: f64,
    pub hbar: f64,
}

impl Cell {
    pub fn k_index(&self, plan: &SweepPlan) -> usize {
        self.index % plan.k_values.len()
    }

    pub fn gamma_index(&self, plan: &SweepPlan) -> usize {
        (self.index / plan.k_values.len()) % plan.gamma_values.len()
    }
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| match i {
                _ if i == count - 1 => hi,
                _ => lo + (hi - lo) * i as f64 / (count - 1) as f64,
            })
            .collect(),
    }
}

impl SweepPlan {
    pub fn grid(
        k_range: (f64, f64),
        k_count: usize,
        gamma_range: (f64, f64),
        gamma_count: usize,
        hbar_list: Vec<f64>,
        budgets: Budgets,
        master_seed: u64,
    ) -> Result<Self> {
        let plan = Self {
            k_values: linspace(k_range.0, k_range.1, k_count),
            gamma_values: linspace(gamma_range.0, gamma_range.1, gamma_count),
            hbar_list,
            budgets,
            master_seed,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SweepError::Plan(msg));
        for (name, values) in [("k_values", &self.k_values), ("gamma_values", &self.gamma_values)] {
            if values.is_empty() {
                return bad(format!("{name} is empty"));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return bad(format!("{name} contains a non-finite value"));
            }
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} must be strictly ascending"));
            }
        }
        if let Some(g) = self.gamma_values.iter().find(|g| !(GAMMA_MIN..=GAMMA_MAX).contains(*g)) {
            return bad(format!("gamma {g} outside [{GAMMA_MIN}, {GAMMA_MAX}]"));
        }
        if self.hbar_list.is_empty() || self.hbar_list.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return bad("hbar_list must be non-empty and positive".into());
        }
        let b = &self.budgets;
        if b.ensemble_size == 0 || b.classical_steps == 0 || b.quantum_periods == 0 || b.n_max == 0 {
            return bad("all budgets must be at least 1".into());
        }
        if b.n_max_limit < b.n_max {
            return bad(format!("n_max_limit {} below n_max {}", b.n_max_limit, b.n_max));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.k_values.len() * self.gamma_values.len() * self.hbar_list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, index: usize) -> Option<Cell> {
        if index >= self.len() {
            return None;
        }
        let nk = self.k_values.len();
        let ng = self.gamma_values.len();
        Some(Cell {
            index,
            k: self.k_values[index % nk],
            gamma: self.gamma_values[(index / nk) % ng],
            hbar: self.hbar_list[index / (nk * ng)],
        })
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).filter_map(|i| self.cell(i))
    }

    pub fn cell_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }

    /// Canonical JSON used to match checkpoints against plans.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan() -> SweepPlan {
        SweepPlan::grid((0.5, 10.0), 3, (0.01, 0.99), 2, vec![0.137, 0.046], Budgets::default(), 1).unwrap()
    }

    #[test]
    fn cell_order_and_indices() {
        let p = plan();
        assert_eq!(p.len(), 12);
        let c = p.cell(7).unwrap();
        assert_eq!((c.k, c.gamma, c.hbar), (p.k_values[1], 0.01, 0.046));
        assert_eq!((c.k_index(&p), c.gamma_index(&p)), (1, 0));
        assert_eq!(p.cell(12), None);
        assert_eq!(p.cells().count(), 12);
        let c = p.cell(11).unwrap();
        assert_eq!((c.k_index(&p), c.gamma_index(&p)), (2, 1));
    }

    #[test]
    fn rejects_bad_plans() {
        let mut p = plan();
        p.gamma_values = vec![0.0, 0.5];
        assert!(p.validate().is_err());
        let mut p = plan();
        p.k_values = vec![2.0, 1.0];
        assert!(p.validate().is_err());
        let mut p = plan();
        p.budgets.classical_steps = 0;
        assert!(p.validate().is_err());
        let mut p = plan();
        p.hbar_list.clear();
        assert!(p.validate().is_err());
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.01, 0.99, 20).last(), Some(&0.99));
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert!(linspace(1.0, 2.0, 0).is_empty());
    }
}
