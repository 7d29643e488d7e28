use qfric_core::classical::{evolve_ensemble, initial_band_ensemble, momentum_histogram};
use qfric_core::measures::{overlap, BinGrid};
use qfric_core::moyal::{rebinned_marginal, semiclassical_period_map, SemiclassicalGrid};
use qfric_core::ModelParams;

#[test]
fn semiclassical_field_tracks_noisy_ensemble() {
    let tau = 0.137;
    let params = ModelParams::from_scaled_kick(6.0, 0.5, tau).unwrap();
    let n_max = 150;
    let grid = SemiclassicalGrid::new(256, 4 * n_max + 2, tau * (n_max as f64 + 0.5)).unwrap();
    let bins = BinGrid::momentum_levels(n_max, tau).unwrap();
    let mut w = grid.initial_band();
    let t = std::time::Instant::now();
    for _ in 0..40 {
        w = semiclassical_period_map(&w, &params).unwrap();
    }
    eprintln!("pde {:?}", t.elapsed());
    let ens = evolve_ensemble(initial_band_ensemble(100_000, 5, tau).unwrap(), &params, 40, true);
    let cl = momentum_histogram(&ens, bins, tau).unwrap().distribution;
    let pde = rebinned_marginal(&w, bins).unwrap();
    let o = overlap(&cl, &pde).unwrap();
    eprintln!("overlap {o}");
    assert!(o >= 0.95);
}
