//! The dissipative modified kicked rotator as an iterated map, and large
//! ensembles of its trajectories.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{normalize_distribution, BinGrid, MomentumDistribution};
use crate::params::ModelParams;
use crate::rng::{derive_seed, stream_rng};

/// A point of phase space: angle `q` in `[0, 2pi)` and integer-scaled
/// momentum `n`. The rescaled momentum is `p = tau * n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: f64,
    pub n: f64,
}

impl PhaseState {
    pub fn new(q: f64, n: f64) -> Self {
        Self { q: wrap_angle(q), n }
    }

    pub fn p(&self, tau: f64) -> f64 {
        tau * self.n
    }
}

pub fn wrap_angle(q: f64) -> f64 {
    let r = q - TAU * (q * (1.0 / TAU)).floor();
    if r >= TAU {
        r - TAU
    } else if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Precomputed kick coefficients so the hot loop needs one `sin_cos`.
#[derive(Debug, Clone, Copy)]
struct Kick {
    k: f64,
    a_cos_phi: f64,
    a_sin_phi: f64,
}

impl Kick {
    fn new(params: &ModelParams) -> Self {
        let (s, c) = params.phi().sin_cos();
        Self {
            k: params.k(),
            a_cos_phi: params.a() * c,
            a_sin_phi: params.a() * s,
        }
    }

    #[inline]
    fn force(&self, q: f64) -> f64 {
        let (s, c) = q.sin_cos();
        // sin(2q + phi) = sin 2q cos phi + cos 2q sin phi
        let s2 = 2.0 * s * c;
        let c2 = 1.0 - 2.0 * s * s;
        self.k * (s + self.a_cos_phi * s2 + self.a_sin_phi * c2)
    }
}

/// `k (sin q + a sin(2q + phi))`.
pub fn kick_force(q: f64, params: &ModelParams) -> f64 {
    params.k() * (q.sin() + params.a() * (2.0 * q + params.phi()).sin())
}

/// Upper bound on `|p|` after `steps` noiseless periods from `|p| <= p0`:
/// `gamma^t p0 + K (1 + |a|) (1 + gamma + ... + gamma^(t-1))`.
pub fn momentum_bound(params: &ModelParams, p0: f64, steps: u64) -> f64 {
    let g = params.gamma();
    let kick = params.scaled_kick() * (1.0 + params.a().abs());
    let t = steps.min(i32::MAX as u64) as i32;
    let sum = if g == 1.0 { steps as f64 } else { (1.0 - g.powi(t)) / (1.0 - g) };
    g.powi(t) * p0 + kick * sum
}

/// One period of the map. `xi` is the noise sample in units of the rescaled
/// momentum `p`, so the integer momentum receives `xi / tau`.
pub fn map_step(state: PhaseState, params: &ModelParams, xi: f64) -> PhaseState {
    let n = params.gamma() * state.n + kick_force(state.q, params) + xi / params.tau();
    PhaseState {
        q: wrap_angle(state.q + params.tau() * n),
        n,
    }
}

/// Inverse of the noiseless map. Undefined at `gamma = 0`.
pub fn inverse_map_step(state: PhaseState, params: &ModelParams) -> Result<PhaseState> {
    if params.gamma() == 0.0 {
        return Err(Error::Domain("the map is not invertible at gamma = 0".into()));
    }
    let q = wrap_angle(state.q - params.tau() * state.n);
    let n = (state.n - kick_force(q, params)) / params.gamma();
    Ok(PhaseState { q, n })
}

/// Gaussian sample with mean 0 and the given variance.
pub fn sample_noise<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Result<f64> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::Domain(format!("noise variance {variance} is negative")));
    }
    if variance == 0.0 {
        return Ok(0.0);
    }
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(normal.sample(rng))
}

/// A trajectory ensemble together with the seed that drives its noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub states: Vec<PhaseState>,
    pub rng_seed: u64,
    pub step_count: u64,
}

impl Ensemble {
    pub fn new(states: Vec<PhaseState>, rng_seed: u64) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Self {
            states,
            rng_seed,
            step_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn max_abs_p(&self, tau: f64) -> f64 {
        self.states.iter().map(|s| (tau * s.n).abs()).fold(0.0, f64::max)
    }
}

const LANES: usize = 8;
const INIT_STREAM_TAG: u64 = 0x696e_6974;

/// `count` trajectories with `q` uniform on `[0, 2pi)` and `p` uniform on
/// `[-pi, pi]`.
pub fn initial_band_ensemble(count: usize, rng_seed: u64, tau: f64) -> Result<Ensemble> {
    if count == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("tau must be positive, got {tau}")));
    }
    let mut rng = stream_rng(derive_seed(rng_seed, INIT_STREAM_TAG), 0);
    let q_dist = Uniform::new(0.0, TAU).map_err(|e| Error::Domain(e.to_string()))?;
    let p_dist = Uniform::new_inclusive(-PI, PI).map_err(|e| Error::Domain(e.to_string()))?;
    let states = (0..count)
        .map(|_| {
            let q = q_dist.sample(&mut rng);
            let p = p_dist.sample(&mut rng);
            PhaseState { q, n: p / tau }
        })
        .collect();
    Ensemble::new(states, rng_seed)
}

/// Advances every trajectory `steps` periods.
///
/// With `noisy` set, each step adds Gaussian noise of variance `tau` in `p`.
/// Trajectory `i` draws from ChaCha stream `i` of a key derived from the
/// ensemble seed and its current step count, so the result does not depend
/// on thread scheduling. Splitting an evolution into segments changes the
/// noise realization but stays deterministic.
pub fn evolve_ensemble(mut ensemble: Ensemble, params: &ModelParams, steps: u64, noisy: bool) -> Ensemble {
    if steps == 0 {
        return ensemble;
    }
    let kick = Kick::new(params);
    let gamma = params.gamma();
    let tau = params.tau();
    let sd_n = tau.sqrt() / tau;
    let key = derive_seed(ensemble.rng_seed, ensemble.step_count);
    // Trajectories advance in small interleaved groups; the map is
    // latency-bound, so independent chains keep the pipeline busy.
    ensemble
        .states
        .par_chunks_mut(LANES)
        .with_min_len(64)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut q = [0.0; LANES];
            let mut n = [0.0; LANES];
            for (j, s) in chunk.iter().enumerate() {
                q[j] = s.q;
                n[j] = s.n;
            }
            let lanes = chunk.len();
            if noisy {
                let mut rngs: Vec<_> = (0..lanes).map(|j| stream_rng(key, (c * LANES + j) as u64)).collect();
                for _ in 0..steps {
                    for j in 0..lanes {
                        let z: f64 = StandardNormal.sample(&mut rngs[j]);
                        n[j] = gamma * n[j] + kick.force(q[j]) + sd_n * z;
                        q[j] = wrap_angle(q[j] + tau * n[j]);
                    }
                }
            } else {
                for _ in 0..steps {
                    for j in 0..lanes {
                        n[j] = gamma * n[j] + kick.force(q[j]);
                        q[j] = wrap_angle(q[j] + tau * n[j]);
                    }
                }
            }
            for (j, s) in chunk.iter_mut().enumerate() {
                *s = PhaseState { q: q[j], n: n[j] };
            }
        });
    ensemble.step_count += steps;
    ensemble
}

/// Momentum histogram together with the fraction of trajectories that fell
/// outside the grid and were counted in the edge bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub distribution: MomentumDistribution,
    pub out_of_range: f64,
}

pub fn momentum_histogram(ensemble: &Ensemble, grid: BinGrid, tau: f64) -> Result<Histogram> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut counts = vec![0.0; grid.count];
    let mut outside = 0usize;
    for s in &ensemble.states {
        let (i, clipped) = grid.locate_clamped(tau * s.n);
        counts[i] += 1.0;
        outside += clipped as usize;
    }
    Ok(Histogram {
        distribution: normalize_distribution(&counts, grid)?,
        out_of_range: outside as f64 / ensemble.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(k: f64, gamma: f64, tau: f64) -> ModelParams {
        ModelParams::new(k, gamma, tau).unwrap()
    }

    #[test]
    fn kick_force_examples() {
        let p = params(5.0, 0.5, 1.0);
        assert!((kick_force(0.0, &p) - 2.5).abs() < 1e-15);
        let p = params(3.0, 0.5, 1.0);
        assert!((kick_force(PI, &p) - 1.5).abs() < 1e-14);
        let p = params(2.0, 0.5, 1.0).with_harmonic(0.0, 1.0).unwrap();
        assert!((kick_force(0.7, &p) - 2.0 * 0.7f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn fast_kick_matches_reference() {
        let p = params(3.3, 0.5, 0.2).with_harmonic(0.7, 0.3).unwrap();
        let kick = Kick::new(&p);
        for i in 0..100 {
            let q = i as f64 * 0.0631;
            assert!((kick.force(q) - kick_force(q, &p)).abs() < 1e-13);
        }
    }

    #[test]
    fn wrap_angle_range() {
        for &q in &[0.0, -1e-18, TAU, -TAU, 1e6 + 0.3, -7.5, TAU - 1e-16, 3.0] {
            let r = wrap_angle(q);
            assert!((0.0..TAU).contains(&r), "{q} -> {r}");
        }
        assert!((wrap_angle(-7.5) - (-7.5f64).rem_euclid(TAU)).abs() < 1e-14);
    }

    #[test]
    fn map_step_examples() {
        let p = params(0.0, 1.0, 0.3);
        let s = map_step(PhaseState::new(1.0, 2.0), &p, 0.0);
        assert_eq!(s.n, 2.0);
        assert!((s.q - 1.6).abs() < 1e-15);

        let tau = 0.137;
        let p = params(5.0, 0.3, tau);
        let s = map_step(PhaseState::new(0.0, 0.0), &p, 0.0);
        assert!((s.n - 2.5).abs() < 1e-15);
        assert!((s.q - 2.5 * tau).abs() < 1e-15);
    }

    #[test]
    fn inverse_reverses_bounded_orbit() {
        let p = params(0.3, 1.0, 1.0);
        let start = PhaseState::new(0.4, 0.2);
        let mut s = start;
        for _ in 0..100 {
            s = map_step(s, &p, 0.0);
        }
        for _ in 0..100 {
            s = inverse_map_step(s, &p).unwrap();
        }
        assert!((s.q - start.q).abs() < 1e-10);
        assert!((s.n - start.n).abs() < 1e-10);
        assert!(inverse_map_step(s, &params(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn noise_examples() {
        let mut rng = stream_rng(1, 0);
        assert_eq!(sample_noise(0.0, &mut rng).unwrap(), 0.0);
        assert!(matches!(sample_noise(-1.0, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn evolve_examples() {
        let e = initial_band_ensemble(100, 4, 0.2).unwrap();
        let same = evolve_ensemble(e.clone(), &params(3.0, 0.5, 0.2), 0, true);
        assert_eq!(same, e);
        let frozen = evolve_ensemble(e, &params(0.0, 0.0, 0.2), 1, false);
        assert!(frozen.states.iter().all(|s| s.n == 0.0));
        assert_eq!(frozen.step_count, 1);
    }

    #[test]
    fn fast_loop_matches_map_step() {
        let p = params(2.1, 0.7, 0.3);
        let e = initial_band_ensemble(50, 9, 0.3).unwrap();
        let fast = evolve_ensemble(e.clone(), &p, 20, false);
        for (start, end) in e.states.iter().zip(&fast.states) {
            let mut s = *start;
            for _ in 0..20 {
                s = map_step(s, &p, 0.0);
            }
            assert!((s.n - end.n).abs() < 1e-9 && (s.q - end.q).abs() < 1e-9);
        }
    }

    #[test]
    fn histogram_examples() {
        let tau = 0.5;
        let grid = BinGrid::momentum_levels(4, tau).unwrap();
        let one = Ensemble::new(vec![PhaseState::new(0.0, 2.0)], 0).unwrap();
        let h = momentum_histogram(&one, grid, tau).unwrap();
        assert_eq!(h.distribution.probabilities()[6], 1.0);
        assert_eq!(h.out_of_range, 0.0);

        let two = Ensemble::new(vec![PhaseState::new(0.0, 1.1), PhaseState::new(1.0, 0.9)], 0).unwrap();
        let h = momentum_histogram(&two, grid, tau).unwrap();
        assert_eq!(h.distribution.probabilities()[5], 1.0);

        let states = vec![
            PhaseState::new(0.0, 0.0),
            PhaseState::new(0.0, 30.0),
            PhaseState::new(0.0, -7.0),
            PhaseState::new(0.0, 1.0),
        ];
        let h = momentum_histogram(&Ensemble::new(states, 0).unwrap(), grid, tau).unwrap();
        assert_eq!(h.out_of_range, 0.5);
        assert_eq!(h.distribution.probabilities()[8], 0.25);
        assert_eq!(h.distribution.probabilities()[0], 0.25);
    }

    proptest! {
        #[test]
        fn noiseless_orbits_respect_momentum_bound(
            q in 0.0..TAU, p0 in -PI..PI, gamma in 0.0f64..=1.0, k in 0.0f64..10.0, steps in 0u64..200
        ) {
            let params = ModelParams::from_scaled_kick(k, gamma, 0.137).unwrap();
            let mut s = PhaseState::new(q, p0 / 0.137);
            for _ in 0..steps {
                s = map_step(s, &params, 0.0);
            }
            prop_assert!(s.p(0.137).abs() <= momentum_bound(&params, PI, steps) * (1.0 + 1e-12));
        }

        #[test]
        fn jacobian_determinant_is_gamma(
            q in 0.0..TAU, n in -20.0f64..20.0, gamma in 0.0f64..=1.0, k in 0.0f64..10.0
        ) {
            let p = params(k, gamma, 0.137);
            let h = 1e-6;
            let f = |q: f64, n: f64| {
                // Unwrapped image so the finite difference does not straddle 2pi.
                let nb = p.gamma() * n + kick_force(q, &p);
                (q + p.tau() * nb, nb)
            };
            let (a1, b1) = f(q + h, n);
            let (a0, b0) = f(q - h, n);
            let (c1, d1) = f(q, n + h);
            let (c0, d0) = f(q, n - h);
            let det = ((a1 - a0) * (d1 - d0) - (c1 - c0) * (b1 - b0)) / (4.0 * h * h);
            prop_assert!((det - gamma).abs() < 1e-6);
        }

        #[test]
        fn histogram_is_normalized(seed in 0u64..1000, count in 1usize..200) {
            let tau = 0.3;
            let e = initial_band_ensemble(count, seed, tau).unwrap();
            let e = evolve_ensemble(e, &params(2.0, 0.8, tau), 3, true);
            let h = momentum_histogram(&e, BinGrid::momentum_levels(20, tau).unwrap(), tau).unwrap();
            let total: f64 = h.distribution.probabilities().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
