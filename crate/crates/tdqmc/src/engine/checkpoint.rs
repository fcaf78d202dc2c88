//! Versioned binary snapshots of a full ensemble state. The format is
//! self-describing enough to reject truncated or mismatched files instead of
//! silently misreading them.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField1D, Grid1D};
use crate::kde::{Alpha, BandwidthRule};
use crate::potentials::SoftCoreParams;

use super::{state_from_parts, EnsembleState, WalkerEnsemble};

const MAGIC: &[u8; 8] = b"TDQMCKP1";
const VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|_| bad("truncated checkpoint"))?;
    Ok(buf)
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact::<8>(r)?))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact::<8>(r)?))
}

/// Write the complete state (walkers, escape flags, every guide wave, clock,
/// seed) so that a run can resume bit-identically.
pub fn save_checkpoint(state: &EnsembleState, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;

    let grid = state.grid();
    write_f64(&mut w, grid.x_min())?;
    write_f64(&mut w, grid.x_max())?;
    write_u64(&mut w, grid.n_points() as u64)?;

    let p = state.params();
    write_f64(&mut w, p.a)?;
    write_f64(&mut w, p.b)?;
    write_f64(&mut w, p.nuclear_charge)?;

    match state.alpha() {
        Alpha::Scale(a) => {
            w.write_all(&[0])?;
            write_f64(&mut w, a)?;
        }
        Alpha::MeanField => {
            w.write_all(&[1])?;
            write_f64(&mut w, 0.0)?;
        }
    }
    w.write_all(&[match state.rule {
        BandwidthRule::RobustMin => 0,
        BandwidthRule::PlainStd => 1,
    }])?;

    write_f64(&mut w, state.t())?;
    write_u64(&mut w, state.step_count())?;
    write_u64(&mut w, state.master_seed())?;

    let n_el = state.n_electrons();
    let m = state.n_walkers();
    write_u64(&mut w, n_el as u64)?;
    write_u64(&mut w, m as u64)?;
    for i in 0..n_el {
        for k in 0..m {
            write_f64(&mut w, state.walkers().positions()[i][k])?;
        }
    }
    for i in 0..n_el {
        for k in 0..m {
            w.write_all(&[state.walkers().is_escaped(i, k) as u8])?;
        }
    }
    for wave in &state.waves {
        for v in wave.values() {
            write_f64(&mut w, v.re)?;
            write_f64(&mut w, v.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a checkpoint back into a ready-to-propagate state.
pub fn load_checkpoint(path: &Path) -> Result<EnsembleState> {
    let mut r = BufReader::new(File::open(path)?);
    let magic = read_exact::<8>(&mut r)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = u32::from_le_bytes(read_exact::<4>(&mut r)?);
    if version != VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }

    let x_min = read_f64(&mut r)?;
    let x_max = read_f64(&mut r)?;
    let n_points = read_u64(&mut r)? as usize;
    let grid = Grid1D::new(x_min, x_max, n_points).map_err(|_| bad("invalid grid"))?;

    let params = SoftCoreParams {
        a: read_f64(&mut r)?,
        b: read_f64(&mut r)?,
        nuclear_charge: read_f64(&mut r)?,
    };

    let alpha = match read_exact::<1>(&mut r)?[0] {
        0 => Alpha::Scale(read_f64(&mut r)?),
        1 => {
            read_f64(&mut r)?;
            Alpha::MeanField
        }
        tag => return Err(bad(format!("unknown alpha tag {tag}"))),
    };
    let rule = match read_exact::<1>(&mut r)?[0] {
        0 => BandwidthRule::RobustMin,
        1 => BandwidthRule::PlainStd,
        tag => return Err(bad(format!("unknown bandwidth rule tag {tag}"))),
    };

    let t = read_f64(&mut r)?;
    let step = read_u64(&mut r)?;
    let master_seed = read_u64(&mut r)?;

    let n_el = read_u64(&mut r)? as usize;
    let m = read_u64(&mut r)? as usize;
    if n_el == 0 || m == 0 || n_el > 16 {
        return Err(bad("implausible ensemble shape"));
    }

    let mut positions = vec![vec![0.0f64; m]; n_el];
    for row in positions.iter_mut() {
        for x in row.iter_mut() {
            *x = read_f64(&mut r)?;
        }
    }
    let mut escaped = vec![vec![false; m]; n_el];
    for row in escaped.iter_mut() {
        for e in row.iter_mut() {
            *e = match read_exact::<1>(&mut r)?[0] {
                0 => false,
                1 => true,
                b => return Err(bad(format!("bad escape flag {b}"))),
            };
        }
    }

    let mut waves = Vec::with_capacity(n_el * m);
    for _ in 0..n_el * m {
        let mut values = Vec::with_capacity(n_points);
        for _ in 0..n_points {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            values.push(Complex64::new(re, im));
        }
        waves.push(ComplexField1D::new(grid, values));
    }

    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|_| bad("read error"))? != 0 {
        return Err(bad("trailing bytes after checkpoint payload"));
    }

    let walkers = WalkerEnsemble { positions, escaped };
    Ok(state_from_parts(grid, params, alpha, rule, walkers, waves, t, step, master_seed))
}
