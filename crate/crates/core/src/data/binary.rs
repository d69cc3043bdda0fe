//! Binary dataset layout, all integers and floats little-endian:
//!
//! | offset | size  | field                          |
//! |--------|-------|--------------------------------|
//! | 0      | 4     | magic `BSQD`                   |
//! | 4      | 4     | version, `u32` = 1             |
//! | 8      | 8     | n, `u64`                       |
//! | 16     | 8     | d, `u64`                       |
//! | 24     | 8·n·d | values, `f64`, row-major       |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::points::Points;
use crate::scalar::Scalar;

pub const BINARY_MAGIC: [u8; 4] = *b"BSQD";
pub const BINARY_VERSION: u32 = 1;

pub fn write_binary<T: Scalar, W: Write>(points: &Points<T>, mut out: W) -> Result<()> {
    out.write_all(&BINARY_MAGIC)?;
    out.write_all(&BINARY_VERSION.to_le_bytes())?;
    out.write_all(&(points.len() as u64).to_le_bytes())?;
    out.write_all(&(points.dim() as u64).to_le_bytes())?;
    for v in points.as_slice() {
        out.write_all(&v.to_f64_lossy().to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<T: Scalar, R: Read>(mut input: R) -> Result<Points<T>> {
    let mut header = [0u8; 24];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if header[0..4] != BINARY_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let len = n
        .checked_mul(d)
        .ok_or_else(|| Error::Format("n * d overflows".into()))?;
    let mut data = Vec::with_capacity(len);
    let mut buf = [0u8; 8];
    for _ in 0..len {
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::Format(format!("expected {len} values, file is short")))?;
        data.push(T::of(f64::from_le_bytes(buf)));
    }
    if input.read(&mut buf)? != 0 {
        return Err(Error::Format("trailing bytes after values".into()));
    }
    Points::new(data, n, d)
}

pub fn save_binary<T: Scalar>(points: &Points<T>, path: &Path) -> Result<()> {
    write_binary(points, BufWriter::new(File::create(path)?))
}

pub fn load_binary<T: Scalar>(path: &Path) -> Result<Points<T>> {
    read_binary(BufReader::new(File::open(path)?))
}
