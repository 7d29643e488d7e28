use serde::{Deserialize, Serialize};

/// Measures and diagnostics of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub cell_index: usize,
    pub k: f64,
    pub gamma: f64,
    pub hbar_eff: f64,
    /// Quantum vs noisy classical marginal.
    pub overlap: f64,
    pub sigma_prime: f64,
    /// Participation ratio of the noiseless classical marginal.
    pub eta_cl: f64,
    pub eta_q: f64,
    pub overlap_literal: f64,
    /// Largest of the quantum edge population and the classical fraction
    /// outside the bin grid.
    pub leakage: f64,
    pub seconds: f64,
    pub eta_cl_noisy: f64,
    /// Overlap of the last two quantum marginals.
    pub convergence: f64,
    pub n_max: usize,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "k",
    "gamma",
    "hbar_eff",
    "overlap",
    "sigma_prime",
    "eta_cl",
    "eta_q",
    "overlap_literal",
    "leakage",
    "seconds",
];

const FLOATS: usize = 12;
pub(crate) const ENCODED_LEN: usize = 8 * (2 + FLOATS);

impl MeasureRecord {
    pub fn csv_row(&self) -> String {
        [
            self.k,
            self.gamma,
            self.hbar_eff,
            self.overlap,
            self.sigma_prime,
            self.eta_cl,
            self.eta_q,
            self.overlap_literal,
            self.leakage,
            self.seconds,
        ]
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
    }

    /// Everything but the wall time, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { seconds: 0.0, ..self.clone() }
    }

    fn floats(&self) -> [f64; FLOATS] {
        [
            self.k,
            self.gamma,
            self.hbar_eff,
            self.overlap,
            self.sigma_prime,
            self.eta_cl,
            self.eta_q,
            self.overlap_literal,
            self.leakage,
            self.seconds,
            self.eta_cl_noisy,
            self.convergence,
        ]
    }

    /// Fixed-width little-endian encoding, bit exact.
    pub(crate) fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(ENCODED_LEN);
        out.extend_from_slice(&(self.cell_index as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_max as u64).to_le_bytes());
        for v in self.floats() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub(crate) fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != ENCODED_LEN {
            return None;
        }
        let word = |i: usize| <[u8; 8]>::try_from(&bytes[8 * i..8 * i + 8]).unwrap();
        let f: Vec<f64> = (2..2 + FLOATS).map(|i| f64::from_le_bytes(word(i))).collect();
        Some(Self {
            cell_index: u64::from_le_bytes(word(0)) as usize,
            n_max: u64::from_le_bytes(word(1)) as usize,
            k: f[0],
            gamma: f[1],
            hbar_eff: f[2],
            overlap: f[3],
            sigma_prime: f[4],
            eta_cl: f[5],
            eta_q: f[6],
            overlap_literal: f[7],
            leakage: f[8],
            seconds: f[9],
            eta_cl_noisy: f[10],
            convergence: f[11],
        })
    }
}
