//! Binary complex-array files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "QSAR"            4 bytes magic
//! version           u8  (1)
//! dtype             u8  (1 = complex, interleaved f64 re/im)
//! rank              u8
//! dims              rank x u64
//! payload           prod(dims) x (f64 re, f64 im), column-major
//! ```

use std::fs;
use std::path::Path;

use quadcs_core::{Complex64, ComplexGrid};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"QSAR";
pub const VERSION: u8 = 1;
pub const DTYPE_COMPLEX_F64: u8 = 1;

#[derive(Debug, Error)]
pub enum ArrayFileError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("unsupported dtype code {0}")]
    Dtype(u8),
    #[error("truncated header")]
    Truncated,
    #[error("payload is {got} bytes, dims need {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("expected rank {expected}, found {got}")]
    Rank { expected: usize, got: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayData {
    pub dims: Vec<usize>,
    pub data: Vec<Complex64>,
}

pub fn encode(dims: &[usize], data: &[Complex64]) -> Vec<u8> {
    assert_eq!(dims.iter().product::<usize>(), data.len(), "dims do not match data");
    let mut out = Vec::with_capacity(7 + 8 * dims.len() + 16 * data.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(DTYPE_COMPLEX_F64);
    out.push(u8::try_from(dims.len()).expect("rank fits in a byte"));
    for d in dims {
        out.extend_from_slice(&(*d as u64).to_le_bytes());
    }
    for v in data {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<ArrayData, ArrayFileError> {
    if bytes.len() < 7 {
        return Err(ArrayFileError::Truncated);
    }
    if &bytes[..4] != MAGIC {
        return Err(ArrayFileError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(ArrayFileError::Version(bytes[4]));
    }
    if bytes[5] != DTYPE_COMPLEX_F64 {
        return Err(ArrayFileError::Dtype(bytes[5]));
    }
    let rank = bytes[6] as usize;
    let header = 7 + 8 * rank;
    if bytes.len() < header {
        return Err(ArrayFileError::Truncated);
    }
    let dims: Vec<usize> = bytes[7..header]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let expected = dims
        .iter()
        .try_fold(16usize, |acc, d| acc.checked_mul(*d))
        .ok_or(ArrayFileError::PayloadLength {
            expected: usize::MAX,
            got: bytes.len() - header,
        })?;
    let payload = &bytes[header..];
    if payload.len() != expected {
        return Err(ArrayFileError::PayloadLength {
            expected,
            got: payload.len(),
        });
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().unwrap());
    let data = payload
        .chunks_exact(16)
        .map(|c| Complex64::new(f(&c[..8]), f(&c[8..])))
        .collect();
    Ok(ArrayData { dims, data })
}

pub fn write_array(path: &Path, dims: &[usize], data: &[Complex64]) -> Result<(), ArrayFileError> {
    fs::write(path, encode(dims, data))?;
    Ok(())
}

pub fn read_array(path: &Path) -> Result<ArrayData, ArrayFileError> {
    decode(&fs::read(path)?)
}

pub fn write_grid(path: &Path, grid: &ComplexGrid) -> Result<(), ArrayFileError> {
    write_array(path, &[grid.rows(), grid.cols()], grid.as_slice())
}

pub fn read_grid(path: &Path) -> Result<ComplexGrid, ArrayFileError> {
    let a = read_array(path)?;
    if a.dims.len() != 2 {
        return Err(ArrayFileError::Rank {
            expected: 2,
            got: a.dims.len(),
        });
    }
    let (r, c) = (a.dims[0], a.dims[1]);
    ComplexGrid::from_vec(r, c, a.data).map_err(|_| ArrayFileError::PayloadLength {
        expected: 16 * r * c,
        got: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let bytes = encode(&[2, 1], &[Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)]);
        assert_eq!(&bytes[..7], b"QSAR\x01\x01\x02");
        assert_eq!(&bytes[7..15], &2u64.to_le_bytes());
        assert_eq!(&bytes[15..23], &1u64.to_le_bytes());
        assert_eq!(&bytes[23..31], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[31..39], &(-2.0f64).to_le_bytes());
        assert_eq!(bytes.len(), 23 + 32);
    }

    #[test]
    fn rejects_corrupt_files() {
        let good = encode(&[3], &[Complex64::new(1.0, 1.0); 3]);
        assert!(matches!(decode(&good[..good.len() - 1]), Err(ArrayFileError::PayloadLength { .. })));
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(ArrayFileError::BadMagic)));
        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(decode(&bad), Err(ArrayFileError::Version(9))));
        let mut bad = good.clone();
        bad[5] = 2;
        assert!(matches!(decode(&bad), Err(ArrayFileError::Dtype(2))));
        assert!(matches!(decode(&good[..5]), Err(ArrayFileError::Truncated)));
        let mut long = good;
        long.push(0);
        assert!(decode(&long).is_err());
    }
}
