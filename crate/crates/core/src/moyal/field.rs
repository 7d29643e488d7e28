//! Sampled phase-space functions and their finite-difference derivatives.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::quantum::matrix::C64;

/// Boundary treatment of a grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Wraps around; `len * step` is the period.
    Periodic,
    /// One-sided closures at both ends.
    Open,
    /// Open, and additionally no stencil straddles the origin. Used for the
    /// momentum axis, where `sign(p)` jumps.
    SplitAtZero,
}

/// Uniform grid `start + i * step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
    pub kind: AxisKind,
}

impl Axis {
    /// `len` points covering one period starting at `start`.
    pub fn periodic(start: f64, period: f64, len: usize) -> Self {
        Self {
            start,
            step: period / len as f64,
            len,
            kind: AxisKind::Periodic,
        }
    }

    /// `len` points from `min` to `max` inclusive.
    pub fn open(min: f64, max: f64, len: usize) -> Self {
        Self {
            start: min,
            step: (max - min) / (len.max(2) - 1) as f64,
            len,
            kind: AxisKind::Open,
        }
    }

    /// `len` cell centers on `[-max, max]`; with even `len` no node sits at 0.
    pub fn split_cells(max: f64, len: usize) -> Self {
        let step = 2.0 * max / len as f64;
        Self {
            start: -max + 0.5 * step,
            step,
            len,
            kind: AxisKind::SplitAtZero,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.node(i)).collect()
    }

    /// Index range of the smooth segment containing node `i`.
    fn segment(&self, i: usize) -> (usize, usize) {
        match self.kind {
            AxisKind::SplitAtZero => {
                let first_nonneg = (0..self.len).find(|&j| self.node(j) >= 0.0).unwrap_or(self.len);
                if i < first_nonneg {
                    (0, first_nonneg)
                } else {
                    (first_nonneg, self.len)
                }
            }
            _ => (0, self.len),
        }
    }

    fn matches(&self, other: &Axis) -> bool {
        let tol = 1e-12 * self.step.abs().max(self.start.abs()).max(1.0);
        self.len == other.len
            && self.kind == other.kind
            && (self.start - other.start).abs() <= tol
            && (self.step - other.step).abs() <= tol
    }

    /// Fourth-order finite-difference stencils for derivative `order`
    /// (1 or 2) at every node.
    fn stencils(&self, order: usize) -> Result<Vec<Stencil>> {
        if self.kind == AxisKind::Periodic {
            if self.len < 5 {
                return Err(Error::Config("periodic axis needs at least 5 points".into()));
            }
            let w = match order {
                1 => [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
                _ => [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            };
            let scale = self.step.powi(order as i32);
            return Ok((0..self.len)
                .map(|i| Stencil {
                    indices: (0..5).map(|j| (i + self.len + j - 2) % self.len).collect(),
                    weights: w.iter().map(|x| x / scale).collect(),
                })
                .collect());
        }
        let mut out = Vec::with_capacity(self.len);
        for i in 0..self.len {
            let (lo, hi) = self.segment(i);
            let seg = hi - lo;
            let central = i >= lo + 2 && i + 2 < hi;
            let size = if order == 2 && !central { 6 } else { 5 };
            if seg < size {
                return Err(Error::Config(format!(
                    "axis segment of {seg} points is too short for a {size}-point stencil"
                )));
            }
            let first = i.saturating_sub(2).clamp(lo, hi - size);
            let offsets: Vec<f64> = (first..first + size).map(|j| j as f64 - i as f64).collect();
            let weights = fornberg(0.0, &offsets, order)[order]
                .iter()
                .map(|w| w / self.step.powi(order as i32))
                .collect();
            out.push(Stencil {
                indices: (first..first + size).collect(),
                weights,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
struct Stencil {
    indices: Vec<usize>,
    weights: Vec<f64>,
}

/// Finite-difference weights (Fornberg 1988) for derivatives `0..=m` at
/// `x0` from samples at `xs`. Row `k` holds the weights of derivative `k`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Complex samples on a `(q, p)` grid, stored with `q` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceField {
    q: Axis,
    p: Axis,
    values: Vec<C64>,
}

impl PhaseSpaceField {
    pub fn zeros(q: Axis, p: Axis) -> Self {
        Self {
            q,
            p,
            values: vec![C64::new(0.0, 0.0); q.len * p.len],
        }
    }

    pub fn from_fn(q: Axis, p: Axis, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut values = Vec::with_capacity(q.len * p.len);
        for ip in 0..p.len {
            let pv = p.node(ip);
            for iq in 0..q.len {
                values.push(f(q.node(iq), pv));
            }
        }
        Self { q, p, values }
    }

    pub fn from_real_fn(q: Axis, p: Axis, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_fn(q, p, |a, b| C64::new(f(a, b), 0.0))
    }

    pub fn from_values(q: Axis, p: Axis, values: Vec<C64>) -> Result<Self> {
        if values.len() != q.len * p.len {
            return Err(Error::Dimension {
                expected: q.len * p.len,
                found: values.len(),
            });
        }
        Ok(Self { q, p, values })
    }

    pub fn q_axis(&self) -> &Axis {
        &self.q
    }

    pub fn p_axis(&self) -> &Axis {
        &self.p
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn get(&self, iq: usize, ip: usize) -> C64 {
        self.values[ip * self.q.len + iq]
    }

    pub fn set(&mut self, iq: usize, ip: usize, v: C64) {
        self.values[ip * self.q.len + iq] = v;
    }

    pub fn cell_area(&self) -> f64 {
        self.q.step * self.p.step
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.q.matches(&other.q) && self.p.matches(&other.p)
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Applies `f(q, p, value)` pointwise.
    pub fn map(&self, f: impl Fn(f64, f64, C64) -> C64) -> Self {
        let mut out = self.clone();
        for ip in 0..self.p.len {
            let pv = self.p.node(ip);
            for iq in 0..self.q.len {
                let k = ip * self.q.len + iq;
                out.values[k] = f(self.q.node(iq), pv, self.values[k]);
            }
        }
        out
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self {
            q: self.q,
            p: self.p,
            values,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|_, _, v| v * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|_, _, v| v * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|_, _, v| v.conj())
    }

    pub fn real_part(&self) -> Self {
        self.map(|_, _, v| C64::new(v.re, 0.0))
    }

    /// `sum values * dq * dp`.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` over the points where `mask(q, p)` holds.
    pub fn max_abs_diff_where(&self, other: &Self, mask: impl Fn(f64, f64) -> bool) -> Result<f64> {
        self.check_grid(other)?;
        let mut m: f64 = 0.0;
        for ip in 0..self.p.len {
            let pv = self.p.node(ip);
            for iq in 0..self.q.len {
                if mask(self.q.node(iq), pv) {
                    let k = ip * self.q.len + iq;
                    m = m.max((self.values[k] - other.values[k]).norm());
                }
            }
        }
        Ok(m)
    }

    /// `max |value|` over the masked points.
    pub fn max_abs_where(&self, mask: impl Fn(f64, f64) -> bool) -> f64 {
        let mut m: f64 = 0.0;
        for ip in 0..self.p.len {
            let pv = self.p.node(ip);
            for iq in 0..self.q.len {
                if mask(self.q.node(iq), pv) {
                    m = m.max(self.values[ip * self.q.len + iq].norm());
                }
            }
        }
        m
    }

    /// `integral over q` for every `p` row.
    pub fn p_marginal(&self) -> Vec<f64> {
        (0..self.p.len)
            .map(|ip| {
                self.values[ip * self.q.len..(ip + 1) * self.q.len]
                    .iter()
                    .map(|v| v.re)
                    .sum::<f64>()
                    * self.q.step
            })
            .collect()
    }

    /// Derivative along `q` of order 1 or 2.
    pub fn d_q(&self, order: usize) -> Result<Self> {
        let st = self.q.stencils(order)?;
        let nq = self.q.len;
        let mut out = Self::zeros(self.q, self.p);
        for ip in 0..self.p.len {
            let row = &self.values[ip * nq..(ip + 1) * nq];
            for (iq, s) in st.iter().enumerate() {
                out.values[ip * nq + iq] = s.indices.iter().zip(&s.weights).map(|(&j, w)| row[j] * w).sum();
            }
        }
        Ok(out)
    }

    /// Derivative along `p` of order 1 or 2.
    pub fn d_p(&self, order: usize) -> Result<Self> {
        let st = self.p.stencils(order)?;
        let nq = self.q.len;
        let mut out = Self::zeros(self.q, self.p);
        for (ip, s) in st.iter().enumerate() {
            for iq in 0..nq {
                out.values[ip * nq + iq] = s
                    .indices
                    .iter()
                    .zip(&s.weights)
                    .map(|(&j, w)| self.values[j * nq + iq] * w)
                    .sum();
            }
        }
        Ok(out)
    }

    /// All first and second derivatives.
    pub fn derivatives(&self) -> Result<Derivatives> {
        let q = self.d_q(1)?;
        let p = self.d_p(1)?;
        let qp = q.d_p(1)?;
        Ok(Derivatives {
            qq: self.d_q(2)?,
            pp: self.d_p(2)?,
            q,
            p,
            qp,
        })
    }

    /// CSV with columns `q,p,re,im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "q,p,re,im")?;
        for ip in 0..self.p.len {
            for iq in 0..self.q.len {
                let v = self.get(iq, ip);
                writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e}", self.q.node(iq), self.p.node(ip), v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Reads values written by [`PhaseSpaceField::write_csv`] onto the given
    /// axes, checking that the coordinates agree.
    pub fn read_csv<R: Read>(q: Axis, p: Axis, mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text).map_err(|e| Error::Format(e.to_string()))?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("q,p,re,im") {
            return Err(Error::Format("missing q,p,re,im header".into()));
        }
        let mut field = Self::zeros(q, p);
        let mut count = 0;
        for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", k + 2)))?;
            if cols.len() != 4 || k >= q.len * p.len {
                return Err(Error::Format(format!("line {}: unexpected row", k + 2)));
            }
            let (iq, ip) = (k % q.len, k / q.len);
            let tol = 1e-9 * (1.0 + q.node(iq).abs() + p.node(ip).abs());
            if (cols[0] - q.node(iq)).abs() > tol || (cols[1] - p.node(ip)).abs() > tol {
                return Err(Error::GridMismatch);
            }
            field.values[k] = C64::new(cols[2], cols[3]);
            count += 1;
        }
        if count != q.len * p.len {
            return Err(Error::Dimension {
                expected: q.len * p.len,
                found: count,
            });
        }
        Ok(field)
    }

    /// Versioned little-endian binary grid.
    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&FIELD_VERSION.to_le_bytes())?;
        for axis in [&self.q, &self.p] {
            w.write_all(&(axis.len as u64).to_le_bytes())?;
            w.write_all(&axis.start.to_le_bytes())?;
            w.write_all(&axis.step.to_le_bytes())?;
            w.write_all(&[axis_kind_code(axis.kind)])?;
        }
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != FIELD_MAGIC {
            return Err(Error::Format("not a phase-space field file".into()));
        }
        let version = u32::from_le_bytes(read_array(&mut r)?);
        if version != FIELD_VERSION {
            return Err(Error::Format(format!("unsupported field version {version}")));
        }
        let mut axes = Vec::with_capacity(2);
        for _ in 0..2 {
            let len = u64::from_le_bytes(read_array(&mut r)?) as usize;
            let start = f64::from_le_bytes(read_array(&mut r)?);
            let step = f64::from_le_bytes(read_array(&mut r)?);
            let [code] = read_array::<1>(&mut r)?;
            axes.push(Axis {
                start,
                step,
                len,
                kind: axis_kind_from_code(code)?,
            });
        }
        let (q, p) = (axes[0], axes[1]);
        let count = q
            .len
            .checked_mul(p.len)
            .filter(|c| *c <= 1 << 28)
            .ok_or_else(|| Error::Format("implausible grid size".into()))?;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let re = f64::from_le_bytes(read_array(&mut r)?);
            let im = f64::from_le_bytes(read_array(&mut r)?);
            values.push(C64::new(re, im));
        }
        Self::from_values(q, p, values)
    }
}

const FIELD_MAGIC: &[u8; 4] = b"QFPF";
const FIELD_VERSION: u32 = 1;

fn axis_kind_code(kind: AxisKind) -> u8 {
    match kind {
        AxisKind::Periodic => 0,
        AxisKind::Open => 1,
        AxisKind::SplitAtZero => 2,
    }
}

fn axis_kind_from_code(code: u8) -> Result<AxisKind> {
    match code {
        0 => Ok(AxisKind::Periodic),
        1 => Ok(AxisKind::Open),
        2 => Ok(AxisKind::SplitAtZero),
        c => Err(Error::Format(format!("unknown axis kind {c}"))),
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::Format(e.to_string()))
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    read_exact(r, &mut b)?;
    Ok(b)
}

/// First and second partial derivatives of a field.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub q: PhaseSpaceField,
    pub p: PhaseSpaceField,
    pub qq: PhaseSpaceField,
    pub pp: PhaseSpaceField,
    pub qp: PhaseSpaceField,
}
