//! Versioned binary container for named tensors.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic       8 bytes   b"SEQDQNCK"
//! version     u32       currently 1
//! kind_len    u32
//! kind        kind_len bytes of UTF-8 (e.g. "stategf", "qnet")
//! count       u32       number of tensors
//! repeated `count` times:
//!   name_len  u32
//!   name      name_len bytes of UTF-8
//!   ndim      u32
//!   dims      ndim × u64
//!   data      product(dims) × f64 (IEEE-754 binary64, little-endian)
//! ```
//!
//! Tensors appear in the canonical [`Parameters`] order. Nothing follows the
//! last tensor.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{Parameters, Tensor};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SEQDQNCK";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn from_params<P: Parameters + ?Sized>(kind: &str, params: &P) -> Self {
        Checkpoint {
            kind: kind.to_string(),
            tensors: params.tensors().into_iter().map(|(n, t)| (n, t.clone())).collect(),
        }
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::Format(format!("checkpoint has no tensor named {name}")))
    }

    /// Copies every tensor into `params`, requiring identical names, order
    /// and shapes.
    pub fn restore_into<P: Parameters + ?Sized>(&self, params: &mut P) -> Result<()> {
        let expected: Vec<(String, Vec<usize>)> = params
            .tensors()
            .into_iter()
            .map(|(n, t)| (n, t.shape().to_vec()))
            .collect();
        if expected.len() != self.tensors.len() {
            return Err(Error::Format(format!(
                "checkpoint holds {} tensors, model expects {}",
                self.tensors.len(),
                expected.len()
            )));
        }
        for ((name, shape), (cn, ct)) in expected.iter().zip(&self.tensors) {
            if name != cn || shape.as_slice() != ct.shape() {
                return Err(Error::Format(format!(
                    "tensor mismatch: model {name} {shape:?}, checkpoint {cn} {:?}",
                    ct.shape()
                )));
            }
        }
        for (dst, (_, src)) in params.tensors_mut()?.into_iter().zip(&self.tensors) {
            dst.data_mut().copy_from_slice(src.data());
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        write_str(&mut out, &self.kind);
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            write_str(&mut out, name);
            out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let r = &mut bytes;
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a checkpoint file (bad magic)".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let kind = read_str(r)?;
        let count = read_u32(r)? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let name = read_str(r)?;
            let ndim = read_u32(r)? as usize;
            let mut shape = Vec::with_capacity(ndim.min(8));
            for _ in 0..ndim {
                shape.push(read_u64(r)? as usize);
            }
            let n: usize = shape.iter().product();
            if n.checked_mul(8).is_none_or(|b| b > r.len()) {
                return Err(Error::Format(format!("tensor {name} is truncated")));
            }
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                let mut b = [0u8; 8];
                read_exact(r, &mut b)?;
                data.push(f64::from_le_bytes(b));
            }
            tensors.push((name, Tensor::from_vec(&shape, data)?));
        }
        if !r.is_empty() {
            return Err(Error::Format("trailing bytes after last tensor".into()));
        }
        Ok(Checkpoint { kind, tensors })
    }

    /// Writes to a sibling temporary file and renames it into place, so a
    /// failed write never leaves a partial checkpoint at `path`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Checkpoint::from_bytes(&bytes)
    }
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format("unexpected end of checkpoint".into()))
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut &[u8]) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str(r: &mut &[u8]) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > r.len() {
        return Err(Error::Format("string length exceeds file".into()));
    }
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::Format("name is not UTF-8".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::LstmParams;
    use crate::rng::{stream, Phase};

    #[test]
    fn byte_layout_of_a_tiny_checkpoint() {
        let ck = Checkpoint {
            kind: "k".into(),
            tensors: vec![("a".into(), Tensor::from_vec(&[1], vec![1.5]).unwrap())],
        };
        let b = ck.to_bytes();
        let mut want = b"SEQDQNCK".to_vec();
        want.extend([1, 0, 0, 0]);
        want.extend([1, 0, 0, 0, b'k']);
        want.extend([1, 0, 0, 0]);
        want.extend([1, 0, 0, 0, b'a']);
        want.extend([1, 0, 0, 0]);
        want.extend([1, 0, 0, 0, 0, 0, 0, 0]);
        want.extend(1.5f64.to_le_bytes());
        assert_eq!(b, want);
    }

    #[test]
    fn round_trip_and_restore() {
        let p = LstmParams::uniform(3, 2, 0.15, &mut stream(1, Phase::Pretrain)).unwrap();
        let ck = Checkpoint::from_params("lstm", &p);
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(back, ck);
        let mut q = LstmParams::zeros(3, 2);
        back.restore_into(&mut q).unwrap();
        assert_eq!(p, q);
        let mut wrong = LstmParams::zeros(4, 2);
        assert!(back.restore_into(&mut wrong).is_err());
    }

    #[test]
    fn corrupt_input_rejected() {
        assert!(Checkpoint::from_bytes(b"nope").is_err());
        let p = LstmParams::zeros(1, 1);
        let mut b = Checkpoint::from_params("x", &p).to_bytes();
        b.truncate(b.len() - 3);
        assert!(Checkpoint::from_bytes(&b).is_err());
        let mut b = Checkpoint::from_params("x", &p).to_bytes();
        b[8] = 9;
        assert!(Checkpoint::from_bytes(&b).is_err());
    }
}
