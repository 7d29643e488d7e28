use qfric_core::classical::*;
use qfric_core::measures::{dispersion, BinGrid};
use qfric_core::snapshot::{read_ensemble, write_ensemble};
use qfric_core::ModelParams;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn evolution_is_independent_of_thread_count() {
    let params = ModelParams::from_scaled_kick(4.56, 0.56, 0.137).unwrap();
    let run = || evolve_ensemble(initial_band_ensemble(5000, 42, 0.137).unwrap(), &params, 200, true);
    assert_eq!(in_pool(1, run), in_pool(8, run));
}

#[test]
fn free_rotation_keeps_momentum_spread() {
    let tau = 0.137;
    let params = ModelParams::from_scaled_kick(0.0, 1.0, tau).unwrap();
    let ens = initial_band_ensemble(100_000, 1, tau).unwrap();
    let grid = BinGrid::momentum_levels(40, tau).unwrap();
    let before = dispersion(&momentum_histogram(&ens, grid, tau).unwrap().distribution);
    let ens = evolve_ensemble(ens, &params, 500, false);
    let after = dispersion(&momentum_histogram(&ens, grid, tau).unwrap().distribution);
    assert_eq!(before, after);
}

#[test]
fn ensemble_snapshot_resumes_identically() {
    let params = ModelParams::from_scaled_kick(7.12, 0.34, 0.137).unwrap();
    let ens = evolve_ensemble(initial_band_ensemble(1000, 9, 0.137).unwrap(), &params, 50, true);
    let mut buf = Vec::new();
    write_ensemble(&mut buf, &ens, &params).unwrap();
    let (back, p) = read_ensemble(&buf[..]).unwrap();
    assert_eq!(
        evolve_ensemble(back, &p, 50, true),
        evolve_ensemble(ens, &params, 50, true)
    );
}
