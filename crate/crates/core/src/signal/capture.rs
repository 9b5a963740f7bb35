//! "RFSG v1" capture files.
//!
//! Little-endian: magic `RFSG`, u16 version (1), u32 record count,
//! u32 samples per record, then interleaved f32 I,Q for every sample of
//! every record. The sample rate is not stored; readers supply it.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::IqSignal;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RFSG";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 4;

/// Equal-length records as stored in one capture file.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureSet {
    pub samples_per_record: usize,
    pub records: Vec<Vec<Complex64>>,
}

impl CaptureSet {
    pub fn from_signals(signals: &[IqSignal]) -> Result<Self> {
        let samples_per_record = signals
            .first()
            .map(|s| s.len())
            .ok_or_else(|| Error::invalid("capture set needs at least one record"))?;
        if signals.iter().any(|s| s.len() != samples_per_record) {
            return Err(Error::invalid("all capture records must have the same length"));
        }
        Ok(CaptureSet {
            samples_per_record,
            records: signals.iter().map(|s| s.samples().to_vec()).collect(),
        })
    }

    pub fn to_signals(&self, sample_rate_hz: f64) -> Result<Vec<IqSignal>> {
        self.records
            .iter()
            .map(|r| IqSignal::new(r.clone(), sample_rate_hz))
            .collect()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(HEADER_LEN + self.records.len() * self.samples_per_record * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.samples_per_record as u32).to_le_bytes());
        for z in self.records.iter().flatten() {
            out.extend_from_slice(&(z.re as f32).to_le_bytes());
            out.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(Error::Format("missing RFSG magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported RFSG version {version}")));
        }
        let count = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let per = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
        let expected = count
            .checked_mul(per)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format("RFSG header overflows".into()))?;
        let body = &bytes[HEADER_LEN..];
        if body.len() != expected {
            return Err(Error::Format(format!(
                "RFSG body is {} bytes, header implies {expected}",
                body.len()
            )));
        }
        let values: Vec<f32> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let records = values
            .chunks_exact(2 * per.max(1))
            .take(count)
            .map(|rec| {
                rec.chunks_exact(2)
                    .map(|p| Complex64::new(p[0] as f64, p[1] as f64))
                    .collect()
            })
            .collect();
        Ok(CaptureSet {
            samples_per_record: per,
            records,
        })
    }
}

pub fn write_rfsg(path: &Path, set: &CaptureSet) -> Result<()> {
    fs::write(path, set.encode()).map_err(|e| Error::io(path, e))
}

pub fn read_rfsg(path: &Path) -> Result<CaptureSet> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    CaptureSet::decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let set = CaptureSet {
            samples_per_record: 2,
            records: vec![vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)]],
        };
        let b = set.encode();
        assert_eq!(&b[..4], b"RFSG");
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(&b[6..10], &[1, 0, 0, 0]);
        assert_eq!(&b[10..14], &[2, 0, 0, 0]);
        assert_eq!(&b[14..18], &1.0f32.to_le_bytes());
        assert_eq!(&b[18..22], &(-2.0f32).to_le_bytes());
        assert_eq!(b.len(), 14 + 16);
    }

    #[test]
    fn corrupt_inputs_rejected() {
        assert!(CaptureSet::decode(b"NOPE").is_err());
        let mut b = CaptureSet {
            samples_per_record: 1,
            records: vec![vec![Complex64::new(0.0, 0.0)]],
        }
        .encode();
        b.pop();
        assert!(CaptureSet::decode(&b).is_err());
        b.push(0);
        b[4] = 2;
        assert!(CaptureSet::decode(&b).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_f32_exact(vals in prop::collection::vec((-10f32..10f32, -10f32..10f32), 1..64), n_rec in 1usize..4) {
            let rec: Vec<Complex64> = vals.iter().map(|&(a, b)| Complex64::new(a as f64, b as f64)).collect();
            let set = CaptureSet { samples_per_record: rec.len(), records: vec![rec; n_rec] };
            let back = CaptureSet::decode(&set.encode()).unwrap();
            prop_assert_eq!(back, set);
        }
    }
}
