//! Symplectic derivative operators and the truncated star product.

use super::field::PhaseSpaceField;
use crate::error::{Error, Result};
use crate::quantum::matrix::C64;

/// `A<>B = dA/dq dB/dp - dA/dp dB/dq`.
pub fn symplectic_derivative(a: &PhaseSpaceField, b: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    a.check_grid(b)?;
    let (aq, ap) = (a.d_q(1)?, a.d_p(1)?);
    let (bq, bp) = (b.d_q(1)?, b.d_p(1)?);
    aq.mul(&bp)?.sub(&ap.mul(&bq)?)
}

/// `d2A/dx_i dx_k J_ij J_kl d2B/dx_j dx_l`
/// `= A_qq B_pp - 2 A_qp B_qp + A_pp B_qq`.
pub fn double_symplectic_derivative(a: &PhaseSpaceField, b: &PhaseSpaceField) -> Result<PhaseSpaceField> {
    a.check_grid(b)?;
    let da = a.derivatives()?;
    let db = b.derivatives()?;
    let mut out = da.qq.mul(&db.pp)?;
    let mixed = da.qp.mul(&db.qp)?;
    let last = da.pp.mul(&db.qq)?;
    for ((o, m), l) in out.values_mut().iter_mut().zip(mixed.values()).zip(last.values()) {
        *o += l - 2.0 * m;
    }
    Ok(out)
}

/// `AB + (i hbar/2) A<>B - (hbar^2/8) A<>^2 B`, truncated after `order`
/// powers of `hbar`.
pub fn star_product_truncated(
    a: &PhaseSpaceField,
    b: &PhaseSpaceField,
    hbar: f64,
    order: usize,
) -> Result<PhaseSpaceField> {
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut out = a.mul(b)?;
    if order >= 1 {
        let first = symplectic_derivative(a, b)?.scale(C64::new(0.0, 0.5 * hbar));
        out = out.add(&first)?;
    }
    if order >= 2 {
        let second = double_symplectic_derivative(a, b)?.scale_real(-hbar * hbar / 8.0);
        out = out.add(&second)?;
    }
    Ok(out)
}

/// Truncated Moyal bracket together with the literal second-order term.
#[derive(Debug, Clone)]
pub struct MoyalBracket {
    /// `-(i/hbar)(H*W - W*H)` through order `hbar^2`. The `hbar^2` parts of
    /// the two products are equal, so this reduces to the Poisson bracket.
    pub bracket: PhaseSpaceField,
    /// `-(i hbar/4)[H_qq W_pp + H_pp W_qq - 2 H_qp W_qp]`, the next term as
    /// printed when the two second-order contributions are added instead of
    /// cancelled. Kept only for inspection.
    pub literal_correction: PhaseSpaceField,
}

pub fn moyal_bracket_truncated(h: &PhaseSpaceField, w: &PhaseSpaceField, hbar: f64) -> Result<MoyalBracket> {
    let literal_correction = double_symplectic_derivative(h, w)?.scale(C64::new(0.0, -hbar / 4.0));
    let bracket = if hbar == 0.0 {
        symplectic_derivative(h, w)?
    } else {
        let hw = star_product_truncated(h, w, hbar, 2)?;
        let wh = star_product_truncated(w, h, hbar, 2)?;
        hw.sub(&wh)?.scale(C64::new(0.0, -1.0 / hbar))
    };
    Ok(MoyalBracket {
        bracket,
        literal_correction,
    })
}
