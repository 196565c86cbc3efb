//! Flat binary container for grid fields: a small header followed by
//! little-endian `f64` samples in `[comp, x, y, z]` order.

use crate::field::{ncomp, TorusField};
use crate::grid::TorusGrid;
use crate::{JetkitError, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"JKF1";

/// Serialize a field to `path`.
pub fn write_field<P: AsRef<Path>>(path: P, f: &TorusField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(f.rank as u32).to_le_bytes())?;
    w.write_all(&(f.grid.n as u32).to_le_bytes())?;
    for v in f.data.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Deserialize a field written by [`write_field`].
pub fn read_field<P: AsRef<Path>>(path: P) -> Result<TorusField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(JetkitError::Shape("bad field container magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let rank = u32::from_le_bytes(b4) as usize;
    if rank > 2 {
        return Err(JetkitError::Shape(format!("bad rank {rank} in container")));
    }
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let grid = TorusGrid::new(n)?;
    let mut out = TorusField::zeros(&grid, rank);
    let mut b8 = [0u8; 8];
    let expect = ncomp(rank) * n * n * n;
    let mut count = 0usize;
    for v in out.data.iter_mut() {
        r.read_exact(&mut b8)?;
        *v = f64::from_le_bytes(b8);
        count += 1;
    }
    if count != expect {
        return Err(JetkitError::Shape("container length mismatch".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let g = TorusGrid::new(8).unwrap();
        let f = TorusField::vector_from_fn(&g, |x, y, z| [x.sin(), (y * 2.0).cos(), x + z * 0.5]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.jkf");
        write_field(&path, &f).unwrap();
        let g2 = read_field(&path).unwrap();
        assert_eq!(g2.rank, 1);
        assert_eq!(g2.grid.n, 8);
        assert!(f
            .data
            .iter()
            .zip(g2.data.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
