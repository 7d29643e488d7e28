//! Lindblad evolution of the quantum rotator on a truncated momentum basis.

pub mod channel;
pub mod density;
pub mod floquet;
pub mod hilbert;
pub mod lindblad;
pub mod matrix;
pub mod weyl;

pub use channel::{dissipative_channel, DampingChannel};
pub use density::{initial_band_state, random_density_matrix, DensityMatrix};
pub use floquet::{
    apply_free_rotation, apply_kick, evolve_periods, evolve_with, period_map, KickOperator, LeakageGuard,
    PeriodMap, QuantumEvolution,
};
pub use hilbert::HilbertSpec;
pub use lindblad::{build_lindblad, integrate_master_equation, rescaled_lindblad, LindbladPair};
pub use matrix::{CMatrix, C64};
pub use weyl::{discrete_weyl_symbol, lindblad_symbol_deviation, wigner_function};
