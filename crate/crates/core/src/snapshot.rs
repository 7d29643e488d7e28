//! Versioned little-endian snapshots of classical ensembles and density
//! matrices.

use std::io::{Read, Write};

use crate::classical::{Ensemble, PhaseState};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quantum::{CMatrix, DensityMatrix, HilbertSpec, C64};

const ENSEMBLE_MAGIC: &[u8; 4] = b"QFEN";
const DENSITY_MAGIC: &[u8; 4] = b"QFDM";
const VERSION: u32 = 1;
/// Refuse headers that would allocate more than this many entries.
const MAX_ENTRIES: u64 = 1 << 30;

fn io(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(io)?;
    Ok(b)
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(get(r)?))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(get(r)?))
}

fn header(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    if &get::<4>(r)? != magic {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(get(r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    Ok(())
}

/// Header: magic, version, count, seed, step count, then
/// `k, gamma, a, phi, tau, D`; body: `(q, n)` per trajectory.
pub fn write_ensemble<W: Write>(mut w: W, ensemble: &Ensemble, params: &ModelParams) -> Result<()> {
    let mut buf = Vec::with_capacity(96 + 16 * ensemble.len());
    buf.extend_from_slice(ENSEMBLE_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(ensemble.len() as u64).to_le_bytes());
    buf.extend_from_slice(&ensemble.rng_seed.to_le_bytes());
    buf.extend_from_slice(&ensemble.step_count.to_le_bytes());
    for v in [params.k(), params.gamma(), params.a(), params.phi(), params.tau(), params.diffusion_d()] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for s in &ensemble.states {
        buf.extend_from_slice(&s.q.to_le_bytes());
        buf.extend_from_slice(&s.n.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)
}

pub fn read_ensemble<R: Read>(mut r: R) -> Result<(Ensemble, ModelParams)> {
    header(&mut r, ENSEMBLE_MAGIC)?;
    let count = get_u64(&mut r)?;
    if count == 0 || count > MAX_ENTRIES {
        return Err(Error::Format(format!("implausible trajectory count {count}")));
    }
    let seed = get_u64(&mut r)?;
    let step_count = get_u64(&mut r)?;
    let mut p = [0.0; 6];
    for v in &mut p {
        *v = get_f64(&mut r)?;
    }
    let params = ModelParams::with_all(p[0], p[1], p[2], p[3], p[4], p[5])?;
    let states = (0..count)
        .map(|_| Ok(PhaseState { q: get_f64(&mut r)?, n: get_f64(&mut r)? }))
        .collect::<Result<Vec<_>>>()?;
    let mut ensemble = Ensemble::new(states, seed)?;
    ensemble.step_count = step_count;
    Ok((ensemble, params))
}

/// Header: magic, version, dimension, tau; body: complex entries row-major
/// as `(re, im)` pairs.
pub fn write_density<W: Write>(mut w: W, rho: &DensityMatrix) -> Result<()> {
    let d = rho.dim();
    let mut buf = Vec::with_capacity(24 + 16 * d * d);
    buf.extend_from_slice(DENSITY_MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(d as u64).to_le_bytes());
    buf.extend_from_slice(&rho.hilbert().tau().to_le_bytes());
    for v in rho.matrix().as_slice() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)
}

/// Reads a density snapshot; trace and Hermiticity are validated, positivity
/// is not re-checked.
pub fn read_density<R: Read>(mut r: R) -> Result<DensityMatrix> {
    header(&mut r, DENSITY_MAGIC)?;
    let d = get_u64(&mut r)?;
    if d < 3 || d % 2 == 0 || d * d > MAX_ENTRIES {
        return Err(Error::Format(format!("invalid dimension {d}")));
    }
    let tau = get_f64(&mut r)?;
    let hilbert = HilbertSpec::new(((d - 1) / 2) as usize, tau)?;
    let data = (0..d * d)
        .map(|_| Ok(C64::new(get_f64(&mut r)?, get_f64(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    let rho = DensityMatrix::from_matrix_unchecked(hilbert, CMatrix::from_vec(d as usize, data)?)?;
    rho.validate(false)?;
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::initial_band_ensemble;
    use crate::quantum::initial_band_state;

    #[test]
    fn ensemble_round_trip() {
        let params = ModelParams::from_scaled_kick(4.56, 0.56, 0.137).unwrap();
        let mut ens = initial_band_ensemble(10, 3, 0.137).unwrap();
        ens.step_count = 7;
        let mut buf = Vec::new();
        write_ensemble(&mut buf, &ens, &params).unwrap();
        let (back, p) = read_ensemble(&buf[..]).unwrap();
        assert_eq!(back, ens);
        assert_eq!(p, params);
        assert!(read_ensemble(&buf[..buf.len() - 1]).is_err());
        buf[0] = b'X';
        assert!(read_ensemble(&buf[..]).is_err());
    }

    #[test]
    fn density_round_trip() {
        let rho = initial_band_state(HilbertSpec::new(24, 0.137).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_density(&mut buf, &rho).unwrap();
        assert_eq!(read_density(&buf[..]).unwrap(), rho);
        buf[4] = 9;
        assert!(read_density(&buf[..]).is_err());
    }
}
