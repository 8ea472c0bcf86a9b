//! T3B tensor files.
//!
//! Layout: the magic `T3B1`, then `n1`, `n2`, `n3` as little-endian `u64`,
//! then `n1 n2 n3` little-endian binary64 values in frontal-slice-major,
//! row-major-within-slice order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

pub const MAGIC: &[u8; 4] = b"T3B1";

pub fn write_t3b<W: Write>(mut w: W, t: &Tensor3) -> Result<()> {
    w.write_all(MAGIC)?;
    let (n1, n2, n3) = t.shape();
    for d in [n1, n2, n3] {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in t.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_t3b<R: Read>(mut r: R) -> Result<Tensor3> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| Error::Format("missing magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).map_err(|_| Error::Format("truncated header".into()))?;
        *d = usize::try_from(u64::from_le_bytes(b)).map_err(|_| Error::Format("dimension overflow".into()))?;
    }
    let [n1, n2, n3] = dims;
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(Error::Format(format!("zero dimension {n1}x{n2}x{n3}")));
    }
    let count = n1
        .checked_mul(n2)
        .and_then(|x| x.checked_mul(n3))
        .ok_or_else(|| Error::Format("dimension overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < count * 8 {
        return Err(Error::Format(format!(
            "short payload: {} bytes for {count} values",
            bytes.len()
        )));
    }
    let data = bytes[..count * 8]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Tensor3::from_vec(n1, n2, n3, data)
}

pub fn save(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    write_t3b(BufWriter::new(File::create(path)?), t)
}

pub fn load(path: impl AsRef<Path>) -> Result<Tensor3> {
    read_t3b(BufReader::new(File::open(path)?))
}
