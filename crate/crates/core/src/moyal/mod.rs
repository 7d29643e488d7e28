//! Phase-space calculus of the friction dissipator: symplectic derivatives,
//! truncated star products, the first- and second-order dissipator pieces and
//! a semiclassical period propagator.

pub mod calculus;
pub mod dissipator;
pub mod field;
pub mod propagator;

pub use calculus::{
    double_symplectic_derivative, moyal_bracket_truncated, star_product_truncated, symplectic_derivative,
    MoyalBracket,
};
pub use dissipator::{
    dissipator_from_symbols, dissipator_linear, dissipator_semiclassical, fokker_planck_drift, lindblad_symbol,
    s1_closed, s1_general, s2_closed, s2_expanded, s2_general, Profile, SymbolSpec,
};
pub use field::{Axis, AxisKind, PhaseSpaceField};
pub use propagator::{
    diffuse, rebinned_marginal, semiclassical_period_map, semiclassical_period_map_with, PeriodMapReport,
    SemiclassicalGrid,
};
