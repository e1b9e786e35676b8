//! `LGF1` binary table format and CSV export.
//!
//! Layout, little-endian: magic `LGF1`, `u32` version, `u32` d, `f64` mass,
//! `u32` radius, `u64` orbit count, then per orbit `d × i32` canonical
//! coordinates followed by the `f64` value.

use std::io::{Read, Write};

use super::{GreenError, GreenTable, DEFAULT_PRECISION};
use crate::lattice::{orbit_count, Site, MAX_DIM};

pub const LGF_MAGIC: [u8; 4] = *b"LGF1";
pub const LGF_VERSION: u32 = 1;

pub fn write_table<W: Write>(table: &GreenTable, mut w: W) -> Result<(), GreenError> {
    w.write_all(&LGF_MAGIC)?;
    w.write_all(&LGF_VERSION.to_le_bytes())?;
    w.write_all(&(table.dim() as u32).to_le_bytes())?;
    w.write_all(&table.mass().to_le_bytes())?;
    w.write_all(&table.radius().to_le_bytes())?;
    w.write_all(&(table.orbit_len() as u64).to_le_bytes())?;
    for (site, value) in table.orbits() {
        for &c in site.coords() {
            w.write_all(&c.to_le_bytes())?;
        }
        w.write_all(&value.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_array<R: Read, const K: usize>(r: &mut R) -> Result<[u8; K], GreenError> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => GreenError::Format("truncated file".into()),
        _ => GreenError::Io(e),
    })?;
    Ok(buf)
}

/// Read a table written by [`write_table`]. The file carries no precision
/// target; the default one is attached.
pub fn read_table<R: Read>(mut r: R) -> Result<GreenTable, GreenError> {
    let magic: [u8; 4] = read_array(&mut r)?;
    if magic != LGF_MAGIC {
        return Err(GreenError::Format(format!("bad magic {magic:?}")));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != LGF_VERSION {
        return Err(GreenError::Format(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if dim == 0 || dim > MAX_DIM {
        return Err(GreenError::Format(format!("dimension {dim} out of range")));
    }
    let mass = f64::from_le_bytes(read_array(&mut r)?);
    let radius = u32::from_le_bytes(read_array(&mut r)?);
    let count = u64::from_le_bytes(read_array(&mut r)?);
    if count != orbit_count(dim, radius) {
        return Err(GreenError::Format(format!(
            "orbit count {count} inconsistent with d={dim}, R={radius}"
        )));
    }
    let mut orbits = Vec::with_capacity(count as usize);
    let mut coords = vec![0i32; dim];
    for _ in 0..count {
        for c in coords.iter_mut() {
            *c = i32::from_le_bytes(read_array(&mut r)?);
        }
        let v = f64::from_le_bytes(read_array(&mut r)?);
        orbits.push((Site::new(&coords), v));
    }
    GreenTable::from_orbits(dim, mass, radius, DEFAULT_PRECISION, orbits)
}

/// Full-box CSV dump `x1,...,xd,value`, sites ordered by sup norm.
pub fn write_csv<W: Write>(table: &GreenTable, mut w: W) -> Result<(), GreenError> {
    let header: Vec<String> = (1..=table.dim()).map(|k| format!("x{k}")).collect();
    writeln!(w, "{},value", header.join(","))?;
    for x in Site::box_sites(table.dim(), table.radius() as i32) {
        let coords: Vec<String> = x.coords().iter().map(|c| c.to_string()).collect();
        writeln!(w, "{},{:.17e}", coords.join(","), table.get(&x)?)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::build_table;

    #[test]
    fn binary_round_trip_is_exact() {
        let t = build_table(3, 0.5, 3, 1e-9).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"LGF1");
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 + 4 + 8 + t.orbit_len() * (3 * 4 + 8));
        let back = read_table(buf.as_slice()).unwrap();
        assert_eq!(back.mass(), 0.5);
        for (a, b) in t.orbits().zip(back.orbits()) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let t = build_table(3, 0.0, 1, 1e-9).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert!(read_table(&buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_table(bad.as_slice()).is_err());
    }

    #[test]
    fn csv_covers_full_box() {
        let t = build_table(3, 0.0, 1, 1e-9).unwrap();
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 27);
        assert!(text.starts_with("x1,x2,x3,value\n0,0,0,"));
    }
}
