//! Self-describing binary container for tensors in any storage format.
//!
//! Layout: magic `HTN1`, a format tag byte, the order `d`, the mode sizes,
//! format-specific rank metadata, then the payload as little-endian f64
//! pairs (re, im).

use std::path::Path;

use ndarray::{Array2, Array3, ArrayD, IxDyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensors::{CpTensor, FullTensor, Tensor, TtTensor, TuckerTensor};

const MAGIC: &[u8; 4] = b"HTN1";

pub fn save(tensor: &Tensor, path: &Path) -> Result<()> {
    let bytes = to_bytes(tensor);
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: &Path) -> Result<Tensor> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_bytes(&bytes)
}

pub fn to_bytes(tensor: &Tensor) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let shape = tensor.shape();
    match tensor {
        Tensor::Full(t) => {
            out.push(0u8);
            write_usizes(&mut out, &shape);
            write_complex(&mut out, t.data.iter());
        }
        Tensor::Cp(t) => {
            out.push(1u8);
            write_usizes(&mut out, &shape);
            write_u64(&mut out, t.rank() as u64);
            for w in &t.weights {
                out.extend_from_slice(&w.to_le_bytes());
            }
            for f in &t.factors {
                write_complex(&mut out, f.iter());
            }
        }
        Tensor::Tucker(t) => {
            out.push(2u8);
            write_usizes(&mut out, &shape);
            write_usizes(&mut out, &t.ranks());
            for &b in &t.orthonormal {
                out.push(b as u8);
            }
            write_complex(&mut out, t.core.iter());
            for f in &t.factors {
                write_complex(&mut out, f.iter());
            }
        }
        Tensor::Tt(t) => {
            out.push(3u8);
            write_usizes(&mut out, &shape);
            let bonds: Vec<usize> = t.carriages.iter().map(|c| c.shape()[2]).collect();
            write_usizes(&mut out, &bonds[..bonds.len() - 1]);
            for c in &t.carriages {
                write_complex(&mut out, c.iter());
            }
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Tensor> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4)?;
    if magic != MAGIC {
        return Err(Error::BadContainer("bad magic".into()));
    }
    let tag = cur.take(1)?[0];
    let d = cur.read_u64()? as usize;
    let mut shape = Vec::with_capacity(d);
    for _ in 0..d {
        shape.push(cur.read_u64()? as usize);
    }
    let total: usize = shape.iter().product();
    match tag {
        0 => {
            let data = cur.read_complex(total)?;
            let data = ArrayD::from_shape_vec(IxDyn(&shape), data)
                .map_err(|e| Error::BadContainer(e.to_string()))?;
            Ok(Tensor::Full(FullTensor { data }))
        }
        1 => {
            let r = cur.read_u64()? as usize;
            let mut weights = Vec::with_capacity(r);
            for _ in 0..r {
                weights.push(cur.read_f64()?);
            }
            let mut factors = Vec::with_capacity(d);
            for &n in &shape {
                let v = cur.read_complex(n * r)?;
                factors.push(
                    Array2::from_shape_vec((n, r), v)
                        .map_err(|e| Error::BadContainer(e.to_string()))?,
                );
            }
            Ok(Tensor::Cp(CpTensor::new(weights, factors)?))
        }
        2 => {
            let dr = cur.read_u64()? as usize;
            if dr != d {
                return Err(Error::BadContainer("rank count != order".into()));
            }
            let mut ranks = Vec::with_capacity(d);
            for _ in 0..d {
                ranks.push(cur.read_u64()? as usize);
            }
            let mut orthonormal = Vec::with_capacity(d);
            for _ in 0..d {
                orthonormal.push(cur.take(1)?[0] != 0);
            }
            let core_len: usize = ranks.iter().product();
            let core = ArrayD::from_shape_vec(IxDyn(&ranks), cur.read_complex(core_len)?)
                .map_err(|e| Error::BadContainer(e.to_string()))?;
            let mut factors = Vec::with_capacity(d);
            for j in 0..d {
                let v = cur.read_complex(shape[j] * ranks[j])?;
                factors.push(
                    Array2::from_shape_vec((shape[j], ranks[j]), v)
                        .map_err(|e| Error::BadContainer(e.to_string()))?,
                );
            }
            let mut t = TuckerTensor::new(core, factors)?;
            t.orthonormal = orthonormal;
            Ok(Tensor::Tucker(t))
        }
        3 => {
            let nb = cur.read_u64()? as usize;
            if nb != d - 1 {
                return Err(Error::BadContainer("bond count != order - 1".into()));
            }
            let mut bonds = vec![1usize];
            for _ in 0..nb {
                bonds.push(cur.read_u64()? as usize);
            }
            bonds.push(1);
            let mut carriages = Vec::with_capacity(d);
            for j in 0..d {
                let (rl, n, rr) = (bonds[j], shape[j], bonds[j + 1]);
                let v = cur.read_complex(rl * n * rr)?;
                carriages.push(
                    Array3::from_shape_vec((rl, n, rr), v)
                        .map_err(|e| Error::BadContainer(e.to_string()))?,
                );
            }
            Ok(Tensor::Tt(TtTensor::new(carriages)?))
        }
        other => Err(Error::BadContainer(format!("unknown format tag {other}"))),
    }
}

fn write_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn write_usizes(out: &mut Vec<u8>, vs: &[usize]) {
    write_u64(out, vs.len() as u64);
    for &v in vs {
        write_u64(out, v as u64);
    }
}

fn write_complex<'a, I: Iterator<Item = &'a Complex64>>(out: &mut Vec<u8>, it: I) {
    for z in it {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::BadContainer("unexpected end of data".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn read_u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn read_f64(&mut self) -> Result<f64> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }

    fn read_complex(&mut self, n: usize) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let re = self.read_f64()?;
            let im = self.read_f64()?;
            out.push(Complex64::new(re, im));
        }
        Ok(out)
    }
}
