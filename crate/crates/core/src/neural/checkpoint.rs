//! "RFNN" model checkpoints.
//!
//! Little-endian: magic `RFNN`, u16 version (1), u32 input rank and u32
//! dims, u32 layer count followed by the layer-spec table, u64 parameter
//! count, then every parameter as f32 in declaration order.
//!
//! Layer table entries are a u8 tag followed by tag-specific fields:
//! Dense `1 u32:units f64:l2`, Conv1d `2 u32:filters u32:kernel u32:stride
//! f64:l2`, GatedRecurrentCell `3 u32:hidden`, Relu `4`, Sigmoid `5`,
//! Tanh `6`, Softmax `7`, Flatten `8`, GlobalAvgPool `9`, ChannelAffine `12`, Residual
//! `10 u32:n <n entries>`, Parallel `11 u32:b (u32:n <n entries>)×b`.

use std::path::Path;

use super::layers::LayerSpec;
use super::network::Network;
use crate::error::{Error, Result};
use crate::rng::Rng;

const MAGIC: &[u8; 4] = b"RFNN";
const VERSION: u16 = 1;

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_specs(out: &mut Vec<u8>, specs: &[LayerSpec]) {
    put_u32(out, specs.len());
    for s in specs {
        match s {
            LayerSpec::Dense { units, l2 } => {
                out.push(1);
                put_u32(out, *units);
                out.extend_from_slice(&l2.to_le_bytes());
            }
            LayerSpec::Conv1d {
                filters,
                kernel,
                stride,
                l2,
            } => {
                out.push(2);
                put_u32(out, *filters);
                put_u32(out, *kernel);
                put_u32(out, *stride);
                out.extend_from_slice(&l2.to_le_bytes());
            }
            LayerSpec::GatedRecurrentCell { hidden } => {
                out.push(3);
                put_u32(out, *hidden);
            }
            LayerSpec::Relu => out.push(4),
            LayerSpec::Sigmoid => out.push(5),
            LayerSpec::Tanh => out.push(6),
            LayerSpec::Softmax => out.push(7),
            LayerSpec::Flatten => out.push(8),
            LayerSpec::GlobalAvgPool => out.push(9),
            LayerSpec::ChannelAffine => out.push(12),
            LayerSpec::Residual(block) => {
                out.push(10);
                put_specs(out, block);
            }
            LayerSpec::Parallel(branches) => {
                out.push(11);
                put_u32(out, branches.len());
                for b in branches {
                    put_specs(out, b);
                }
            }
        }
    }
}

pub fn encode_network(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put_u32(&mut out, net.input_shape().len());
    for &d in net.input_shape() {
        put_u32(&mut out, d);
    }
    put_specs(&mut out, &net.rebuild_specs());
    let params = net.flat_params();
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format("truncated RFNN checkpoint".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn specs(&mut self, depth: usize) -> Result<Vec<LayerSpec>> {
        if depth > 32 {
            return Err(Error::Format("layer table nested too deeply".into()));
        }
        let n = self.u32()?;
        let mut out = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            out.push(match self.u8()? {
                1 => LayerSpec::Dense {
                    units: self.u32()?,
                    l2: self.f64()?,
                },
                2 => LayerSpec::Conv1d {
                    filters: self.u32()?,
                    kernel: self.u32()?,
                    stride: self.u32()?,
                    l2: self.f64()?,
                },
                3 => LayerSpec::GatedRecurrentCell { hidden: self.u32()? },
                4 => LayerSpec::Relu,
                5 => LayerSpec::Sigmoid,
                6 => LayerSpec::Tanh,
                7 => LayerSpec::Softmax,
                8 => LayerSpec::Flatten,
                9 => LayerSpec::GlobalAvgPool,
                12 => LayerSpec::ChannelAffine,
                10 => LayerSpec::Residual(self.specs(depth + 1)?),
                11 => {
                    let b = self.u32()?;
                    let mut branches = Vec::with_capacity(b.min(1024));
                    for _ in 0..b {
                        branches.push(self.specs(depth + 1)?);
                    }
                    LayerSpec::Parallel(branches)
                }
                t => return Err(Error::Format(format!("unknown layer tag {t}"))),
            });
        }
        Ok(out)
    }
}

pub fn decode_network(bytes: &[u8]) -> Result<Network> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("missing RFNN magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported RFNN version {version}")));
    }
    let rank = r.u32()?;
    if rank == 0 || rank > 8 {
        return Err(Error::Format(format!("bad input rank {rank}")));
    }
    let shape = (0..rank).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let specs = r.specs(0)?;
    let count = u64::from_le_bytes(r.take(8)?.try_into().unwrap()) as usize;
    let mut net = Network::new(specs, &shape, &mut Rng::new(0))?;
    if count != net.param_count() {
        return Err(Error::Format(format!(
            "checkpoint holds {count} parameters, architecture needs {}",
            net.param_count()
        )));
    }
    let raw = r.take(count * 4)?;
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after RFNN parameters".into()));
    }
    let values: Vec<f64> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    net.set_flat_params(&values)?;
    Ok(net)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    std::fs::write(path, encode_network(net)).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: &Path) -> Result<Network> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_network(&bytes)
}
