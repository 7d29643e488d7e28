//! The friction dissipator in phase space: its first- and second-order
//! pieces `S1`, `S2` computed from a Lindblad symbol, their closed forms for
//! symbols `sqrt(l f(|p| + hbar/2l)) exp(-i sign(p) q / l)`, and the
//! resulting `D[W]` through first order in `hbar`.
//!
//! The closed forms follow from substituting the symbol into the general
//! expressions; note the overall factor 2 in `S1` and the `2 f'/l`
//! coefficient of the `W_p` term in `S2`. Tests compare both directions.

use super::calculus::{double_symplectic_derivative, symplectic_derivative};
use super::field::PhaseSpaceField;
use crate::error::{Error, Result};
use crate::quantum::matrix::C64;

/// Velocity dependence `f(s)`, `s = |p|`, of the friction force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Linear,
    PowerLaw { exponent: f64 },
}

impl Profile {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Profile::Linear => s,
            Profile::PowerLaw { exponent } => s.powf(exponent),
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        match *self {
            Profile::Linear => 1.0,
            Profile::PowerLaw { exponent } => exponent * s.powf(exponent - 1.0),
        }
    }

    pub fn d2(&self, s: f64) -> f64 {
        match *self {
            Profile::Linear => 0.0,
            Profile::PowerLaw { exponent } => exponent * (exponent - 1.0) * s.powf(exponent - 2.0),
        }
    }
}

/// Parameters of the friction symbol and of the dissipator built from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSpec {
    pub l: f64,
    pub profile: Profile,
    pub hbar: f64,
    pub nu: f64,
    /// Coefficient of the optional thermal term `D W_pp`.
    pub diffusion_d: f64,
}

impl SymbolSpec {
    /// Linear profile with `l = 1/(2 pi)` and no thermal term.
    pub fn new(hbar: f64, nu: f64) -> Result<Self> {
        Self {
            l: 1.0 / (2.0 * std::f64::consts::PI),
            profile: Profile::Linear,
            hbar,
            nu,
            diffusion_d: 0.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::Config(format!("length scale l must be positive, got {}", self.l)));
        }
        if !(self.hbar >= 0.0) || !(self.nu >= 0.0) || !(self.diffusion_d >= 0.0) {
            return Err(Error::Config("hbar, nu and the thermal coefficient must be nonnegative".into()));
        }
        if let Profile::PowerLaw { exponent } = self.profile {
            if !(exponent >= 0.0) || !exponent.is_finite() {
                return Err(Error::Config(format!("power-law exponent must be nonnegative, got {exponent}")));
            }
        }
        Ok(self)
    }

    pub fn with_profile(mut self, profile: Profile) -> Result<Self> {
        self.profile = profile;
        self.validated()
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        self.hbar = hbar;
        self.validated()
    }

    pub fn with_diffusion(mut self, d: f64) -> Result<Self> {
        self.diffusion_d = d;
        self.validated()
    }

    fn shift(&self) -> f64 {
        self.hbar / (2.0 * self.l)
    }
}

pub(crate) fn sign(p: f64) -> f64 {
    if p > 0.0 {
        1.0
    } else if p < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|p|` floored at two momentum cells, used wherever `|p|` or `f(|p|)`
/// appears in a denominator.
fn regularized_abs(p: f64, dp: f64) -> f64 {
    p.abs().max(2.0 * dp)
}

/// Multiplies `w` pointwise by `c(p)`.
fn times_p(w: &PhaseSpaceField, c: impl Fn(f64) -> f64) -> PhaseSpaceField {
    w.map(|_, p, v| v * c(p))
}

/// `sqrt(l f(|p| + hbar/2l)) exp(-i sign(p) q / l)` sampled on the grid of
/// `like`.
pub fn lindblad_symbol(spec: &SymbolSpec, like: &PhaseSpaceField) -> PhaseSpaceField {
    let shift = spec.shift();
    like.map(|q, p, _| {
        let amp = (spec.l * spec.profile.value(p.abs() + shift)).sqrt();
        C64::from_polar(amp, -sign(p) * q / spec.l)
    })
}

/// `L*(L<>W) + L(W<>L*) + 2W(L<>L*)`.
pub fn s1_general(l: &PhaseSpaceField, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let lc = l.conj();
    let a = lc.mul(&symplectic_derivative(l, w)?)?;
    let b = l.mul(&symplectic_derivative(w, &lc)?)?;
    let c = w.mul(&symplectic_derivative(l, &lc)?)?.scale_real(2.0);
    a.add(&b)?.add(&c)
}

/// `-2i d/dp[sign(p) f(|p| + hbar/2l) W]`.
pub fn s1_closed(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let shift = spec.shift();
    let flux = times_p(w, |p| sign(p) * spec.profile.value(p.abs() + shift));
    Ok(flux.d_p(1)?.scale(C64::new(0.0, -2.0)))
}

/// The nine-term second-order piece, evaluated literally: every `<>` and
/// `<>^2` acts on the full fields on either side, products in parentheses
/// are pointwise.
pub fn s2_general(l: &PhaseSpaceField, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let lc = l.conj();
    let nab = symplectic_derivative;
    let nab2 = double_symplectic_derivative;
    let terms = [
        (1.0, nab(l, &nab(w, &lc)?)?),
        (0.5, nab2(l, &w.mul(&lc)?)?),
        (0.5, l.mul(&nab2(w, &lc)?)?),
        (-0.5, nab(w, &nab(&lc, l)?)?),
        (-0.25, nab2(w, &lc.mul(l)?)?),
        (-0.25, w.mul(&nab2(&lc, l)?)?),
        (-0.5, nab(&lc, &nab(l, w)?)?),
        (-0.25, nab2(&lc, &l.mul(w)?)?),
        (-0.25, lc.mul(&nab2(l, w)?)?),
    ];
    let mut out = PhaseSpaceField::zeros(*w.q_axis(), *w.p_axis());
    for (c, t) in terms {
        for (o, v) in out.values_mut().iter_mut().zip(t.values()) {
            *o += v * c;
        }
    }
    Ok(out)
}

/// The same piece written out in first and second derivatives of `L`, `L*`
/// and `W` (twelve products). Independent of [`s2_general`]; the two agree
/// identically for smooth fields.
pub fn s2_expanded(l: &PhaseSpaceField, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    l.check_grid(w)?;
    let dl = l.derivatives()?;
    let dc = l.conj().derivatives()?;
    let dw = w.derivatives()?;
    let mut out = PhaseSpaceField::zeros(*w.q_axis(), *w.p_axis());
    for (i, o) in out.values_mut().iter_mut().enumerate() {
        let (lq, lp, lqq, lpp, lqp) = (dl.q.values()[i], dl.p.values()[i], dl.qq.values()[i], dl.pp.values()[i], dl.qp.values()[i]);
        let (cq, cp, cqq, cpp, cqp) = (dc.q.values()[i], dc.p.values()[i], dc.qq.values()[i], dc.pp.values()[i], dc.qp.values()[i]);
        let (wq, wp, wqq, wpp, wqp) = (dw.q.values()[i], dw.p.values()[i], dw.qq.values()[i], dw.pp.values()[i], dw.qp.values()[i]);
        *o = -2.0 * wqq * lp * cp - 2.0 * wpp * lq * cq
            + 2.0 * wqp * (lp * cq + lq * cp)
            + cqq * lp * wp
            + cpp * lq * wq
            - cqp * (lp * wq + lq * wp)
            + lqq * cp * wp
            + lpp * cq * wq
            - lqp * (cp * wq + cq * wp);
    }
    Ok(out)
}

/// `-1/2 F_p^2 (l/F) W_qq - 2 (F/l) W_pp - 2 (F_p/l) W_p` with
/// `F = f(|p| + hbar/2l)` and `F_p = sign(p) f'(|p| + hbar/2l)`.
pub fn s2_closed(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let shift = spec.shift();
    let pa = *w.p_axis();
    let f_vals: Vec<f64> = (0..pa.len).map(|i| spec.profile.value(pa.node(i).abs() + shift)).collect();
    if let Some(i) = f_vals.iter().position(|&f| !(f > 0.0)) {
        return Err(Error::Singular(format!("f vanishes at p = {}", pa.node(i))));
    }
    let d = w.derivatives()?;
    let nq = w.q_axis().len;
    let mut out = PhaseSpaceField::zeros(*w.q_axis(), pa);
    let l = spec.l;
    for ip in 0..pa.len {
        let p = pa.node(ip);
        let f = f_vals[ip];
        let fp = sign(p) * spec.profile.d1(p.abs() + shift);
        for iq in 0..nq {
            let k = ip * nq + iq;
            out.values_mut()[k] = -0.5 * fp * fp * (l / f) * d.qq.values()[k]
                - 2.0 * (f / l) * d.pp.values()[k]
                - 2.0 * (fp / l) * d.p.values()[k];
        }
    }
    Ok(out)
}

/// `2 nu d/dp[sign(p) f(|p|) W]`, the classical friction drift.
pub fn fokker_planck_drift(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let flux = times_p(w, |p| sign(p) * spec.profile.value(p.abs()));
    Ok(flux.d_p(1)?.scale_real(2.0 * spec.nu))
}

/// `i nu S1 - (nu hbar / 2) S2` from the closed forms, without expanding
/// the shifted profile in `hbar`.
pub fn dissipator_from_symbols(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let s1 = s1_closed(spec, w)?.scale(C64::new(0.0, spec.nu));
    let s2 = s2_closed(spec, w)?.scale_real(-0.5 * spec.nu * spec.hbar);
    s1.add(&s2)?.add(&thermal(spec, w)?)
}

fn thermal(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    if spec.diffusion_d == 0.0 {
        return Ok(PhaseSpaceField::zeros(*w.q_axis(), *w.p_axis()));
    }
    Ok(w.d_p(2)?.scale_real(spec.diffusion_d))
}

/// `D[W]` through first order in `hbar`:
///
/// `2 nu d_p[sign(p) f W] + (hbar nu / l)[2 d_p(f_p W) - f_pp W]`
/// `+ hbar nu [1/4 f_p^2 (l/f) W_qq + (f/l) W_pp] + D W_pp`,
///
/// with `f = f(|p|)`, `f_p = sign(p) f'(|p|)`, `f_pp = f''(|p|)`. Where `f`
/// divides, `|p|` is floored at two grid cells.
pub fn dissipator_semiclassical(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    let (l, nu, hbar) = (spec.l, spec.nu, spec.hbar);
    let dp = w.p_axis().step;
    let prof = spec.profile;
    let mut out = fokker_planck_drift(spec, w)?;
    if hbar > 0.0 {
        let fpw = times_p(w, |p| sign(p) * prof.d1(p.abs())).d_p(1)?;
        let d = w.derivatives()?;
        let nq = w.q_axis().len;
        let pa = *w.p_axis();
        for ip in 0..pa.len {
            let p = pa.node(ip);
            let (f, fp, fpp) = (prof.value(p.abs()), sign(p) * prof.d1(p.abs()), prof.d2(p.abs()));
            let f_reg = prof.value(regularized_abs(p, dp));
            for iq in 0..nq {
                let k = ip * nq + iq;
                let wv = w.values()[k];
                let corr = (hbar * nu / l) * (2.0 * fpw.values()[k] - fpp * wv)
                    + hbar * nu * (0.25 * fp * fp * (l / f_reg) * d.qq.values()[k] + (f / l) * d.pp.values()[k]);
                out.values_mut()[k] += corr;
            }
        }
    }
    out.add(&thermal(spec, w)?)
}

/// Linear-profile specialization
/// `g^2 d_p[sign(p)(|p| + hbar/l) W] + g^2 (hbar/2)[(l/4|p|) W_qq + (|p|/l) W_pp]`
/// with `g^2 = 2 nu`.
pub fn dissipator_linear(spec: &SymbolSpec, w: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    if spec.profile != Profile::Linear {
        return Err(Error::Config("dissipator_linear needs the linear profile".into()));
    }
    let (l, hbar) = (spec.l, spec.hbar);
    let g2 = 2.0 * spec.nu;
    let dp = w.p_axis().step;
    let drift = times_p(w, |p| sign(p) * (p.abs() + hbar / l)).d_p(1)?.scale_real(g2);
    let d = w.derivatives()?;
    let diff = d
        .qq
        .map(|_, p, v| v * (0.25 * l / regularized_abs(p, dp)))
        .add(&times_p(&d.pp, |p| p.abs() / l))?
        .scale_real(0.5 * g2 * hbar);
    drift.add(&diff)?.add(&thermal(spec, w)?)
}
