//! Numerical self-checks of the friction model: channel against direct
//! integration, momentum contraction, the Weyl symbol of the friction
//! operator, phase-space identities and dissipator equivalences, and the
//! phase-space contraction of the classical map.
//!
//! Each check returns its worst deviation next to the tolerance it is held
//! to, so callers can both assert and report.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::classical::{map_step, PhaseState};
use crate::error::Result;
use crate::moyal::{
    dissipator_from_symbols, dissipator_linear, dissipator_semiclassical, double_symplectic_derivative,
    fokker_planck_drift, lindblad_symbol, moyal_bracket_truncated, s1_closed, s1_general, s2_closed, s2_general,
    star_product_truncated, symplectic_derivative, Axis, PhaseSpaceField, SymbolSpec,
};
use crate::params::ModelParams;
use crate::quantum::{
    build_lindblad, integrate_master_equation, lindblad_symbol_deviation, random_density_matrix, CMatrix,
    DampingChannel, DensityMatrix, HilbertSpec, C64,
};
use crate::rng::stream_rng;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `deviation <= tolerance` (NaN fails).
    pub fn at_most(name: impl Into<String>, deviation: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            deviation,
            tolerance,
            passed: deviation <= tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `value >= threshold`; `deviation` holds the value.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            deviation: value,
            tolerance: threshold,
            passed: value >= threshold,
            detail: detail.into(),
        }
    }
}

/// Note printed with every report.
pub const SIGN_CONVENTION_NOTE: &str =
    "sign(0) = 0; |p| is floored at 2 dp in denominators and points with |p| < 3 dp are excluded from comparisons";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Negative control: build the channel from `gamma = exp(-nu)` while the
    /// contraction check still expects `exp(-2 nu)`.
    pub corrupt_gamma_nu: bool,
    /// Extra symbol whose general and closed `S1`, `S2` are compared on the
    /// dissipator fixture.
    pub symbol: Option<SymbolSpec>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            corrupt_gamma_nu: false,
            symbol: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every check.
pub fn run_verification(opts: VerifyOptions) -> Result<VerificationReport> {
    let mut checks = vec![check_channel_analytics()?];
    checks.push(check_ehrenfest_contraction(opts.seed, opts.corrupt_gamma_nu)?);
    for n_max in [16, 32] {
        checks.push(check_weyl_symbol(n_max)?);
    }
    checks.extend(check_moyal_identities(opts.seed)?);
    checks.extend(check_dissipator_equivalences()?);
    checks.extend(check_dissipator_moments()?);
    checks.push(check_map_jacobian(opts.seed)?);
    if let Some(spec) = opts.symbol {
        checks.extend(check_configured_symbol(spec)?);
    }
    Ok(VerificationReport {
        checks,
        notes: vec![SIGN_CONVENTION_NOTE.to_string()],
    })
}

pub const CHANNEL_GAMMAS: [f64; 4] = [0.9, 0.56, 0.34, 0.1];

/// Two-level analytics of the channel at `n = +-1`, each compared with the
/// closed form and with direct integration of the master equation.
pub fn check_channel_analytics() -> Result<Check> {
    let h = HilbertSpec::new(3, 0.137)?;
    let (i0, ip, im) = (h.index(0).unwrap(), h.index(1).unwrap(), h.index(-1).unwrap());
    let mut worst: f64 = 0.0;
    for gamma in CHANNEL_GAMMAS {
        let channel = DampingChannel::with_eta(h, gamma)?;
        let pair = build_lindblad(h, (-gamma.ln()).sqrt())?;
        for excited in [ip, im] {
            let mut rho = CMatrix::zeros(h.dim());
            rho[(excited, excited)] = C64::new(0.6, 0.0);
            rho[(i0, i0)] = C64::new(0.4, 0.0);
            rho[(i0, excited)] = C64::new(0.2, 0.15);
            rho[(excited, i0)] = C64::new(0.2, -0.15);
            let mut analytic = CMatrix::zeros(h.dim());
            analytic[(excited, excited)] = C64::new(0.6 * gamma, 0.0);
            analytic[(i0, i0)] = C64::new(0.4 + 0.6 * (1.0 - gamma), 0.0);
            analytic[(i0, excited)] = rho[(i0, excited)] * gamma.sqrt();
            analytic[(excited, i0)] = rho[(excited, i0)] * gamma.sqrt();
            let state = DensityMatrix::new(h, rho.clone())?;
            let out = channel.apply(&state)?;
            let oracle = integrate_master_equation(&rho, &pair, 1.0, 1e-10)?;
            worst = worst
                .max(out.matrix().max_abs_diff(&analytic))
                .max(out.matrix().max_abs_diff(&oracle));
        }
    }
    Ok(Check::at_most(
        "channel two-level analytics",
        worst,
        1e-8,
        "|1><1| -> gamma|1><1| + (1-gamma)|0><0|, rho01 -> sqrt(gamma) rho01, vs closed form and master equation",
    ))
}

/// `Tr(|n| channel(rho)) = gamma Tr(|n| rho)` for random states on
/// `|n| <= 20` in a basis with `N = 65`.
pub fn check_ehrenfest_contraction(seed: u64, corrupt_gamma_nu: bool) -> Result<Check> {
    let h = HilbertSpec::new(32, 0.137)?;
    let mut rng = stream_rng(seed, 7);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let nu: f64 = rng.random_range(0.05..2.0);
        let expected_gamma = (-2.0 * nu).exp();
        let used = if corrupt_gamma_nu { (-nu).exp() } else { expected_gamma };
        let rank = 1 + i % 5;
        let rho = random_density_matrix(h, -20, 20, rank, &mut rng)?;
        let out = DampingChannel::with_eta(h, used)?.apply(&rho)?;
        let before = rho.expectation_diagonal(|n| n.abs() as f64);
        let after = out.expectation_diagonal(|n| n.abs() as f64);
        worst = worst.max((after - expected_gamma * before).abs());
    }
    let name = if corrupt_gamma_nu {
        "Ehrenfest contraction (corrupted gamma-nu)"
    } else {
        "Ehrenfest contraction"
    };
    Ok(Check::at_most(name, worst, 1e-6, "20 random states, N = 65, gamma = exp(-2 nu)"))
}

pub fn check_weyl_symbol(n_max: usize) -> Result<Check> {
    let h = HilbertSpec::new(n_max, 0.137)?;
    let dev = lindblad_symbol_deviation(h)?;
    Ok(Check::at_most(
        format!("Weyl symbol of L, N = {}", h.dim()),
        dev,
        1e-8,
        "discrete symbol vs sqrt(l(|p| + hbar/2l)) exp(-i sign(p) q/l), |p| > 1/N",
    ))
}

/// Random trigonometric polynomial with wave numbers up to 3 in each
/// direction.
pub fn band_limited_field(q: Axis, p: Axis, seed: u64, stream: u64) -> PhaseSpaceField {
    let mut rng = stream_rng(seed, stream);
    let mut modes = Vec::new();
    for kq in -3i32..=3 {
        for kp in 0i32..=3 {
            let damp = 1.0 / (1.0 + (kq * kq + kp * kp) as f64);
            let a = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp;
            modes.push((kq as f64, kp as f64, a));
        }
    }
    PhaseSpaceField::from_fn(q, p, |x, y| {
        modes
            .iter()
            .map(|&(kq, kp, a)| a * C64::from_polar(1.0, kq * x + kp * y))
            .sum()
    })
}

/// Antisymmetry, symmetry, the canonical commutator and the bracket
/// cancellation on a 128 x 128 grid.
pub fn check_moyal_identities(seed: u64) -> Result<Vec<Check>> {
    let q = Axis::open(-PI, PI, 128);
    let p = Axis::open(-PI, PI, 128);
    let hbar = 0.3;
    let a = band_limited_field(q, p, seed, 100);
    let b = band_limited_field(q, p, seed, 101);
    let all = |_: f64, _: f64| true;

    let ab = symplectic_derivative(&a, &b)?;
    let ba = symplectic_derivative(&b, &a)?;
    let anti = ab.add(&ba)?.max_abs();

    let sym = double_symplectic_derivative(&a, &b)?
        .max_abs_diff_where(&double_symplectic_derivative(&b, &a)?, all)?;

    let fq = PhaseSpaceField::from_real_fn(q, p, |x, _| x);
    let fp = PhaseSpaceField::from_real_fn(q, p, |_, y| y);
    let ihbar = PhaseSpaceField::from_fn(q, p, |_, _| C64::new(0.0, hbar));
    let mut comm: f64 = 0.0;
    for order in [1, 2] {
        let c = star_product_truncated(&fq, &fp, hbar, order)?.sub(&star_product_truncated(&fp, &fq, hbar, order)?)?;
        comm = comm.max(c.max_abs_diff_where(&ihbar, all)?);
    }

    let bracket = moyal_bracket_truncated(&a, &b, hbar)?.bracket.max_abs_diff_where(&ab, all)?;

    Ok(vec![
        Check::at_most("A<>B antisymmetry", anti, 1e-10, "random band-limited fields, 128x128"),
        Check::at_most("A<>^2B symmetry", sym, 1e-10, "random band-limited fields, 128x128"),
        Check::at_most("q*p - p*q = i hbar", comm, 1e-10, "orders 1 and 2"),
        Check::at_most("truncated Moyal bracket = Poisson bracket", bracket, 1e-10, "hbar = 0.3"),
    ])
}

/// Grid, state and symbol used by the dissipator comparisons: `q` on the
/// unit torus, cell-centered `p` on `[-1/2, 1/2]`.
pub struct DissipatorFixture {
    pub w: PhaseSpaceField,
    pub spec: SymbolSpec,
}

impl DissipatorFixture {
    pub fn new(n: usize, hbar: f64) -> Result<Self> {
        let q = Axis::periodic(0.0, 1.0, n);
        let p = Axis::split_cells(0.5, n);
        let w = PhaseSpaceField::from_real_fn(q, p, |q, p| {
            (1.0 + 0.5 * (TAU * q).cos()) * (-(p - 0.2f64).powi(2) / (2.0 * 0.08f64.powi(2))).exp()
        });
        Ok(Self {
            w,
            spec: SymbolSpec::new(hbar, 0.3)?,
        })
    }

    /// Interior points with `|p| >= 3 dp`, two rows clear of the `p` edges.
    pub fn mask(&self) -> impl Fn(f64, f64) -> bool {
        let pa = *self.w.p_axis();
        let edge = pa.node(pa.len - 1).abs() - 1.5 * pa.step;
        move |_, p| p.abs() >= 3.0 * pa.step && p.abs() < edge
    }

    /// `sup |a - b| / sup |b|` over the mask.
    pub fn relative_error(&self, a: &PhaseSpaceField, b: &PhaseSpaceField) -> Result<f64> {
        let m = self.mask();
        Ok(a.max_abs_diff_where(b, &m)? / b.max_abs_where(&m))
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<SymbolSpec> {
        self.spec.with_hbar(hbar)
    }
}

/// `i nu S1 - (nu hbar/2) S2` evaluated from the sampled symbol with the
/// general expressions.
pub fn dissipator_from_general(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let l = lindblad_symbol(spec, w);
    let s1 = s1_general(&l, w)?.scale(C64::new(0.0, spec.nu));
    let s2 = s2_general(&l, w)?.scale_real(-0.5 * spec.nu * spec.hbar);
    s1.add(&s2)
}

/// General vs closed forms on a 256 x 256 grid, and the order of the
/// `hbar -> 0` residual.
pub fn check_dissipator_equivalences() -> Result<Vec<Check>> {
    let fx = DissipatorFixture::new(256, 0.01)?;
    let l = lindblad_symbol(&fx.spec, &fx.w);
    let e1 = fx.relative_error(&s1_general(&l, &fx.w)?, &s1_closed(&fx.spec, &fx.w)?)?;
    let e2 = fx.relative_error(&s2_general(&l, &fx.w)?, &s2_closed(&fx.spec, &fx.w)?)?;
    let e3 = fx.relative_error(
        &dissipator_semiclassical(&fx.spec, &fx.w)?,
        &dissipator_linear(&fx.spec, &fx.w)?,
    )?;
    let order = hbar_residual_order(&fx, 2e-3, 1e-3)?;
    Ok(vec![
        Check::at_most("S1 general = closed", e1, 1e-5, "relative, 256x256, |p| >= 3 dp"),
        Check::at_most("S2 general = closed", e2, 1e-5, "relative, 256x256, |p| >= 3 dp"),
        Check::at_most("expanded D = linear-profile D", e3, 1e-5, "relative, 256x256, |p| >= 3 dp"),
        Check::at_least("hbar -> 0 residual order", order, 0.9, "two-point fit at hbar = 2e-3, 1e-3"),
    ])
}

/// General vs closed `S1`, `S2` for an arbitrary symbol on the 256 x 256
/// fixture.
pub fn check_configured_symbol(spec: SymbolSpec) -> Result<Vec<Check>> {
    let mut fx = DissipatorFixture::new(256, spec.hbar)?;
    fx.spec = spec.validated()?;
    let l = lindblad_symbol(&fx.spec, &fx.w);
    let e1 = fx.relative_error(&s1_general(&l, &fx.w)?, &s1_closed(&fx.spec, &fx.w)?)?;
    let e2 = fx.relative_error(&s2_general(&l, &fx.w)?, &s2_closed(&fx.spec, &fx.w)?)?;
    let detail = format!("{:?}, l = {}, hbar = {}", spec.profile, spec.l, spec.hbar);
    Ok(vec![
        Check::at_most("configured symbol: S1 general = closed", e1, 1e-5, detail.clone()),
        Check::at_most("configured symbol: S2 general = closed", e2, 1e-5, detail),
    ])
}

/// Fitted exponent of `||D(hbar) - D_FP|| ~ hbar^order`, with `D(hbar)` built
/// from the general expressions.
pub fn hbar_residual_order(fx: &DissipatorFixture, h1: f64, h2: f64) -> Result<f64> {
    let m = fx.mask();
    let fp = fokker_planck_drift(&fx.spec, &fx.w)?;
    let residual = |h: f64| -> Result<f64> {
        let d = dissipator_from_general(&fx.with_hbar(h)?, &fx.w)?;
        Ok(d.max_abs_diff_where(&fp, &m)?)
    };
    let (r1, r2) = (residual(h1)?, residual(h2)?);
    Ok((r1 / r2).ln() / (h1 / h2).ln())
}

/// Mean-momentum decay and probability balance of the expanded dissipator.
pub fn check_dissipator_moments() -> Result<Vec<Check>> {
    let (q, p) = (Axis::periodic(0.0, 1.0, 64), Axis::split_cells(0.5, 512));
    let nu = 0.3;
    let p0 = 0.3;
    let narrow = PhaseSpaceField::from_real_fn(q, p, |q, p| {
        (1.0 + 0.2 * (TAU * q).sin()) * (-(p - p0).powi(2) / (2.0 * 0.02f64.powi(2))).exp()
    });
    let narrow = narrow.scale_real(1.0 / narrow.integral().re);
    let spec = SymbolSpec::new(1e-4, nu)?;
    let d = dissipator_semiclassical(&spec, &narrow)?;
    let mean_rate = d.map(|_, p, v| v * p).integral().re;
    let ehrenfest = (mean_rate / (-2.0 * nu * p0) - 1.0).abs();

    let spec = SymbolSpec::new(0.01, nu)?;
    let wide = PhaseSpaceField::from_real_fn(q, p, |q, p| {
        (1.0 + 0.5 * (TAU * q).cos()) * (-(p - 0.25f64).powi(2) / (2.0 * 0.04f64.powi(2))).exp()
    });
    let wide = wide.scale_real(1.0 / wide.integral().re);
    let balance = dissipator_semiclassical(&spec, &wide)?.integral().norm();
    let symbols = dissipator_from_symbols(&spec, &wide)?.integral().norm();
    Ok(vec![
        Check::at_most("friction Ehrenfest d<p>/dt = -2 nu p0", ehrenfest, 0.01, "relative, narrow Gaussian at p0 = 0.3"),
        Check::at_most("probability balance of D", balance.max(symbols), 1e-6, "W vanishing at the p edges and near p = 0"),
    ])
}

/// Finite-difference Jacobian determinant of the noiseless map at 1000
/// random states for each `gamma`.
pub fn check_map_jacobian(seed: u64) -> Result<Check> {
    let mut rng = stream_rng(seed, 11);
    let tau = 0.137;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for gamma in [1.0, 0.56, 0.1] {
        let params = ModelParams::from_scaled_kick(4.56, gamma, tau)?;
        for _ in 0..1000 {
            let q = rng.random_range(0.0..TAU);
            let p = rng.random_range(-10.0..10.0);
            let det = map_jacobian_det(&params, q, p, h);
            worst = worst.max((det - gamma).abs());
        }
    }
    Ok(Check::at_most("map Jacobian determinant = gamma", worst, 1e-6, "1000 states each for gamma = 1, 0.56, 0.1"))
}

/// Central-difference Jacobian determinant in `(q, p)`; `q` differences are
/// taken modulo `2 pi`.
pub fn map_jacobian_det(params: &ModelParams, q: f64, p: f64, h: f64) -> f64 {
    let tau = params.tau();
    let image = |q: f64, p: f64| {
        let s = map_step(PhaseState::new(q, p / tau), params, 0.0);
        (s.q, s.p(tau))
    };
    let dq = |a: f64, b: f64| (a - b + PI).rem_euclid(TAU) - PI;
    let (qp, pp) = image(q + h, p);
    let (qm, pm) = image(q - h, p);
    let (qp2, pp2) = image(q, p + h);
    let (qm2, pm2) = image(q, p - h);
    let j11 = dq(qp, qm) / (2.0 * h);
    let j21 = (pp - pm) / (2.0 * h);
    let j12 = dq(qp2, qm2) / (2.0 * h);
    let j22 = (pp2 - pm2) / (2.0 * h);
    j11 * j22 - j12 * j21
}
