//! Versioned binary tensor container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! b"CGAN"  u32 version
//! repeated until EOF:
//!   u32 name_len, name (UTF-8), u32 rank, rank × u64 dims, product(dims) × f64
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{Activation, DenseLayer, Matrix, Mlp, NnError};

pub const MAGIC: &[u8; 4] = b"CGAN";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: bad magic bytes")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("missing tensor {0}")]
    MissingTensor(String),
    #[error(transparent)]
    Shape(#[from] NnError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub dims: Vec<usize>,
    /// Row-major.
    pub data: Vec<f64>,
}

pub fn write_tensors<W: Write>(mut out: W, tensors: &[NamedTensor]) -> Result<(), CheckpointError> {
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for t in tensors {
        let expected: usize = t.dims.iter().product();
        if expected != t.data.len() {
            return Err(CheckpointError::Corrupt(format!(
                "tensor {} has {} values for dims {:?}",
                t.name,
                t.data.len(),
                t.dims
            )));
        }
        let name = t.name.as_bytes();
        out.write_all(&(name.len() as u32).to_le_bytes())?;
        out.write_all(name)?;
        out.write_all(&(t.dims.len() as u32).to_le_bytes())?;
        for &d in &t.dims {
            out.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in &t.data {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_exact_or_eof<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<bool, CheckpointError> {
    let mut filled = 0;
    while filled < buf.len() {
        match input.read(&mut buf[filled..])? {
            0 if filled == 0 => return Ok(false),
            0 => return Err(CheckpointError::Corrupt("truncated record".into())),
            n => filled += n,
        }
    }
    Ok(true)
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    input
        .read_exact(&mut b)
        .map_err(|_| CheckpointError::Corrupt("truncated record".into()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_tensors<R: Read>(mut input: R) -> Result<Vec<NamedTensor>, CheckpointError> {
    let mut magic = [0u8; 4];
    if input.read_exact(&mut magic).is_err() || &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut input)?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let mut tensors = Vec::new();
    loop {
        let mut len = [0u8; 4];
        if !read_exact_or_eof(&mut input, &mut len)? {
            break;
        }
        let mut name = vec![0u8; u32::from_le_bytes(len) as usize];
        input
            .read_exact(&mut name)
            .map_err(|_| CheckpointError::Corrupt("truncated name".into()))?;
        let name = String::from_utf8(name).map_err(|_| CheckpointError::Corrupt("name is not UTF-8".into()))?;
        let rank = read_u32(&mut input)? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            let mut b = [0u8; 8];
            input
                .read_exact(&mut b)
                .map_err(|_| CheckpointError::Corrupt("truncated dims".into()))?;
            dims.push(u64::from_le_bytes(b) as usize);
        }
        let count: usize = dims.iter().product();
        let mut raw = vec![0u8; count * 8];
        input
            .read_exact(&mut raw)
            .map_err(|_| CheckpointError::Corrupt(format!("truncated payload for {name}")))?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        tensors.push(NamedTensor { name, dims, data });
    }
    Ok(tensors)
}

/// `{prefix}.layers.{i}.weight` (rank 2) and `{prefix}.layers.{i}.bias`
/// (rank 1) for every layer.
pub fn mlp_tensors(prefix: &str, net: &Mlp) -> Vec<NamedTensor> {
    net.layers
        .iter()
        .enumerate()
        .flat_map(|(i, l)| {
            [
                NamedTensor {
                    name: format!("{prefix}.layers.{i}.weight"),
                    dims: vec![l.weights.rows(), l.weights.cols()],
                    data: l.weights.data().to_vec(),
                },
                NamedTensor {
                    name: format!("{prefix}.layers.{i}.bias"),
                    dims: vec![l.bias.len()],
                    data: l.bias.clone(),
                },
            ]
        })
        .collect()
}

/// Rebuilds a network written by [`mlp_tensors`]; activations are not stored
/// in the binary and come from the caller.
pub fn mlp_from_tensors(
    prefix: &str,
    tensors: &[NamedTensor],
    activations: &[Activation],
) -> Result<Mlp, CheckpointError> {
    let find = |name: String| {
        tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or(CheckpointError::MissingTensor(name))
    };
    let mut layers = Vec::with_capacity(activations.len());
    for (i, &act) in activations.iter().enumerate() {
        let w = find(format!("{prefix}.layers.{i}.weight"))?;
        let b = find(format!("{prefix}.layers.{i}.bias"))?;
        let [rows, cols] = w.dims[..] else {
            return Err(CheckpointError::Corrupt(format!("{} is not rank 2", w.name)));
        };
        let weights = Matrix::from_vec(rows, cols, w.data.clone())?;
        layers.push(DenseLayer::new(weights, b.data.clone(), act)?);
    }
    Ok(Mlp::new(layers)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_bit_exact() {
        let t = NamedTensor {
            name: "w".into(),
            dims: vec![1, 2],
            data: vec![1.0, -0.5],
        };
        let mut buf = Vec::new();
        write_tensors(&mut buf, std::slice::from_ref(&t)).unwrap();
        let mut expected = b"CGAN".to_vec();
        expected.extend(1u32.to_le_bytes());
        expected.extend(1u32.to_le_bytes());
        expected.push(b'w');
        expected.extend(2u32.to_le_bytes());
        expected.extend(1u64.to_le_bytes());
        expected.extend(2u64.to_le_bytes());
        expected.extend(1.0f64.to_le_bytes());
        expected.extend((-0.5f64).to_le_bytes());
        assert_eq!(buf, expected);
        assert_eq!(read_tensors(buf.as_slice()).unwrap(), vec![t]);
    }

    #[test]
    fn mlp_round_trip() {
        let mut rng = crate::seed::rng(12);
        let acts = [Activation::Relu, Activation::Identity];
        let net = Mlp::glorot(&[5, 3, 5], &acts, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_tensors(&mut buf, &mlp_tensors("generator", &net)).unwrap();
        let back = mlp_from_tensors("generator", &read_tensors(buf.as_slice()).unwrap(), &acts).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_tensors(&b"NOPE"[..]), Err(CheckpointError::BadMagic)));
        let mut buf = b"CGAN".to_vec();
        buf.extend(9u32.to_le_bytes());
        assert!(matches!(
            read_tensors(buf.as_slice()),
            Err(CheckpointError::UnsupportedVersion(9))
        ));
        let mut buf = Vec::new();
        write_tensors(
            &mut buf,
            &[NamedTensor {
                name: "x".into(),
                dims: vec![3],
                data: vec![1.0, 2.0, 3.0],
            }],
        )
        .unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_tensors(buf.as_slice()), Err(CheckpointError::Corrupt(_))));
    }
}
