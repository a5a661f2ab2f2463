use std::io::{self, Read, Write};

use num_complex::Complex64;

use crate::spaces::{SpectralField, WaveGrid};

use super::path::{Snapshot, Trajectory};

const MAGIC: &[u8; 8] = b"SPDKSNP1";

/// `time,h_norm,v_integral` per recorded time, with ledger columns when present.
pub fn write_norms_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    let ledger = !traj.ledger.is_empty();
    write!(w, "time,h_norm,v_integral")?;
    if ledger {
        write!(w, ",delta_energy,dissipation,martingale,residual")?;
    }
    writeln!(w)?;
    for i in 0..traj.times.len() {
        write!(w, "{:e},{:e},{:e}", traj.times[i], traj.h_norm_series[i], traj.v_energy_running[i])?;
        if ledger {
            match i.checked_sub(1).and_then(|j| traj.ledger.get(j)) {
                Some(r) => write!(w, ",{:e},{:e},{:e},{:e}", r.delta_energy, r.dissipation, r.martingale, r.residual)?,
                None => write!(w, ",,,,")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Little-endian dump: magic, snapshot count, then per snapshot the step,
/// the time, the coefficient count and `(re, im)` pairs.
pub fn write_snapshots<W: Write>(snaps: &[Snapshot], mut w: W) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(snaps.len() as u64).to_le_bytes())?;
    for s in snaps {
        w.write_all(&(s.step as u64).to_le_bytes())?;
        w.write_all(&s.time.to_le_bytes())?;
        let c = s.field.coeffs();
        w.write_all(&(c.len() as u64).to_le_bytes())?;
        for z in c {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_snapshots<R: Read>(mut r: R, grid: &WaveGrid) -> io::Result<Vec<Snapshot>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a snapshot file".into()));
    }
    let n = read_u64(&mut r)?;
    let mut out = Vec::new();
    for _ in 0..n {
        let step = read_u64(&mut r)? as usize;
        let time = read_f64(&mut r)?;
        let len = read_u64(&mut r)? as usize;
        if len != grid.dof() {
            return Err(bad(format!("snapshot has {len} coefficients, grid needs {}", grid.dof())));
        }
        let mut coeffs = Vec::with_capacity(len);
        for _ in 0..len {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            coeffs.push(Complex64::new(re, im));
        }
        let field = SpectralField::from_coeffs(grid, coeffs).map_err(|e| bad(e.to_string()))?;
        out.push(Snapshot { step, time, field });
    }
    Ok(out)
}
