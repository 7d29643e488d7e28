use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::cell::run_cell;
use crate::checkpoint::Checkpoint;
use crate::error::Result;
use crate::plan::{Cell, SweepPlan};
use crate::record::MeasureRecord;

/// A cell whose computation failed; it stays pending for the next run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell_index: usize,
    pub k: f64,
    pub gamma: f64,
    pub hbar_eff: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub plan: SweepPlan,
    /// Sorted by cell index.
    pub records: Vec<MeasureRecord>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    pub fn empty(plan: SweepPlan) -> Self {
        Self {
            plan,
            records: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.records.len() == self.plan.len()
    }

    pub fn pending(&self) -> Vec<usize> {
        let mut done = vec![false; self.plan.len()];
        for r in &self.records {
            done[r.cell_index] = true;
        }
        (0..done.len()).filter(|&i| !done[i]).collect()
    }

    pub fn by_index(&self, cell_index: usize) -> Option<&MeasureRecord> {
        self.records
            .binary_search_by_key(&cell_index, |r| r.cell_index)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Record of the grid point closest to `(k, gamma)` at the `hbar_eff`
    /// in the plan closest to `hbar`, measured in grid steps.
    pub fn nearest(&self, k: f64, gamma: f64, hbar: f64) -> Option<&MeasureRecord> {
        let closest = |values: &[f64], x: f64| {
            (0..values.len()).min_by(|&a, &b| (values[a] - x).abs().total_cmp(&(values[b] - x).abs()))
        };
        let p = &self.plan;
        let (ik, ig, ih) = (
            closest(&p.k_values, k)?,
            closest(&p.gamma_values, gamma)?,
            closest(&p.hbar_list, hbar)?,
        );
        self.by_index((ih * p.gamma_values.len() + ig) * p.k_values.len() + ik)
    }
}

/// Progress report handed to the observer after every finished cell.
#[derive(Debug, Clone, Copy)]
pub struct Progress<'a> {
    pub finished: usize,
    pub total: usize,
    pub cell: Cell,
    pub outcome: std::result::Result<&'a MeasureRecord, &'a str>,
}

pub struct RunOptions<'a> {
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many newly started cells; the rest stays pending.
    pub max_new_cells: Option<usize>,
    pub observer: Option<&'a (dyn Fn(Progress<'_>) + Sync)>,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        Self {
            workers: 1,
            checkpoint: None,
            max_new_cells: None,
            observer: None,
        }
    }
}

/// Computes every pending cell of `plan` on `workers` threads. Finished
/// records go through a single writer that commits the checkpoint after
/// each cell. Failed cells are reported and left pending.
pub fn run_sweep(plan: &SweepPlan, opts: &RunOptions<'_>) -> Result<SweepResult> {
    plan.validate()?;
    let mut checkpoint = opts
        .checkpoint
        .as_ref()
        .map(|p| Checkpoint::open(p, plan))
        .transpose()?;
    let mut records: Vec<MeasureRecord> = checkpoint.as_ref().map(|c| c.records().to_vec()).unwrap_or_default();
    let pending: Vec<Cell> = plan
        .cells()
        .filter(|c| !checkpoint.as_ref().is_some_and(|cp| cp.contains(c.index)))
        .collect();
    let todo = opts.max_new_cells.map_or(pending.len(), |m| m.min(pending.len()));
    let mut failures = Vec::new();
    let total = plan.len();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();

    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..opts.workers.max(1).min(todo.max(1)) {
            let tx = tx.clone();
            let (next, pending) = (&next, &pending);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= todo {
                    break;
                }
                let cell = pending[i];
                let outcome = catch_unwind(AssertUnwindSafe(|| run_cell(&cell, &plan.budgets, plan.cell_seed(cell.index))))
                    .map_err(|panic| {
                        panic
                            .downcast_ref::<&str>()
                            .map(|s| s.to_string())
                            .or_else(|| panic.downcast_ref::<String>().cloned())
                            .unwrap_or_else(|| "worker panicked".into())
                    })
                    .and_then(|r| r.map_err(|e| e.to_string()));
                if tx.send((cell, outcome)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (cell, outcome) in rx {
            match outcome {
                Ok(record) => {
                    if let Some(cp) = checkpoint.as_mut() {
                        cp.push(record.clone())?;
                        cp.commit()?;
                    }
                    records.push(record);
                    if let Some(obs) = opts.observer {
                        obs(Progress {
                            finished: records.len(),
                            total,
                            cell,
                            outcome: Ok(records.last().unwrap()),
                        });
                    }
                }
                Err(error) => {
                    if let Some(obs) = opts.observer {
                        obs(Progress {
                            finished: records.len(),
                            total,
                            cell,
                            outcome: Err(&error),
                        });
                    }
                    failures.push(CellFailure {
                        cell_index: cell.index,
                        k: cell.k,
                        gamma: cell.gamma,
                        hbar_eff: cell.hbar,
                        error,
                    });
                }
            }
        }
        Ok(())
    })?;

    records.sort_by_key(|r| r.cell_index);
    failures.sort_by_key(|f| f.cell_index);
    Ok(SweepResult {
        plan: plan.clone(),
        records,
        failures,
    })
}
