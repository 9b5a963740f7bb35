use crate::error::{Error, Result};
use crate::impairments::{Link, TransmitterProfile};
use crate::rng::Rng;
use crate::signal::{CaptureSet, IqSignal};

/// One received packet with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthRecord {
    pub signal: IqSignal,
    pub tx_id: u32,
    /// Index into the authorized list, `None` for outliers.
    pub class: Option<usize>,
}

impl AuthRecord {
    pub fn authorized(&self) -> bool {
        self.class.is_some()
    }
}

/// Labelled receptions from authorized transmitters and outliers.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthDataset {
    pub n_authorized: usize,
    pub records: Vec<AuthRecord>,
}

impl AuthDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_positive(&self) -> usize {
        self.records.iter().filter(|r| r.authorized()).count()
    }

    /// Shuffled split into `(train, held_out)` with `held_out_frac` of the records held out.
    pub fn split(&self, held_out_frac: f64, rng: &mut Rng) -> Result<(AuthDataset, AuthDataset)> {
        if !(0.0..1.0).contains(&held_out_frac) {
            return Err(Error::invalid("held_out_frac must lie in [0, 1)"));
        }
        let mut idx: Vec<usize> = (0..self.records.len()).collect();
        rng.shuffle(&mut idx);
        let n_held = (self.records.len() as f64 * held_out_frac).round() as usize;
        let pick = |ids: &[usize]| AuthDataset {
            n_authorized: self.n_authorized,
            records: ids.iter().map(|&i| self.records[i].clone()).collect(),
        };
        Ok((pick(&idx[n_held..]), pick(&idx[..n_held])))
    }

    /// Records as an RFSG capture set plus `(tx_id, class)` labels, with
    /// class `-1` for outliers.
    pub fn to_capture(&self) -> Result<(CaptureSet, Vec<(u32, i64)>)> {
        let signals: Vec<IqSignal> = self.records.iter().map(|r| r.signal.clone()).collect();
        let labels = self
            .records
            .iter()
            .map(|r| (r.tx_id, r.class.map_or(-1, |c| c as i64)))
            .collect();
        Ok((CaptureSet::from_signals(&signals)?, labels))
    }
}

/// Packets per outlier profile so that negatives match positives in total.
fn per_outlier_counts(n_pos_total: usize, n_outliers: usize) -> Vec<usize> {
    (0..n_outliers)
        .map(|i| n_pos_total / n_outliers + usize::from(i < n_pos_total % n_outliers))
        .collect()
}

/// Receptions of random packets sent by every profile through `link`.
///
/// Each authorized profile sends `n_per_tx` packets; the same total is
/// spread evenly across the outliers so the two labels stay balanced when
/// the set sizes differ.
pub fn build_training_set(
    authorized: &[TransmitterProfile],
    outliers: &[TransmitterProfile],
    link: &Link,
    n_per_tx: usize,
    rng: &mut Rng,
) -> Result<AuthDataset> {
    if authorized.is_empty() || outliers.is_empty() {
        return Err(Error::invalid("need at least one authorized and one outlier profile"));
    }
    if n_per_tx == 0 {
        return Err(Error::invalid("n_per_tx must be positive"));
    }
    for o in outliers {
        if authorized.iter().any(|a| a.same_fingerprint(o)) {
            return Err(Error::invalid(format!(
                "outlier profile {} duplicates an authorized fingerprint",
                o.id
            )));
        }
    }
    link.validate()?;
    let mut records = Vec::new();
    let mut send = |profile: &TransmitterProfile, count: usize, class: Option<usize>, rng: &mut Rng| {
        for _ in 0..count {
            let packet = link.random_packet(rng)?;
            let signal = link.transmit(&packet, profile, rng)?;
            records.push(AuthRecord {
                signal,
                tx_id: profile.id,
                class,
            });
        }
        Ok::<(), Error>(())
    };
    for (i, p) in authorized.iter().enumerate() {
        send(p, n_per_tx, Some(i), rng)?;
    }
    let counts = per_outlier_counts(n_per_tx * authorized.len(), outliers.len());
    for (p, &c) in outliers.iter().zip(&counts) {
        send(p, c, None, rng)?;
    }
    Ok(AuthDataset {
        n_authorized: authorized.len(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impairments::{sample_transmitter_profiles, ChannelModel};

    fn profiles(n: usize, seed: u64) -> Vec<TransmitterProfile> {
        sample_transmitter_profiles(n, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn sizes_and_balance() {
        let all = profiles(20, 3);
        let link = Link::new(ChannelModel::awgn(20.0));
        let ds = build_training_set(&all[..10], &all[10..], &link, 3, &mut Rng::new(1)).unwrap();
        assert_eq!(ds.len(), 60);
        assert_eq!(ds.n_positive(), 30);
        assert!(ds.records.iter().all(|r| r.signal.len() == 256));

        let ds = build_training_set(&all[..6], &all[6..16], &link, 5, &mut Rng::new(1)).unwrap();
        assert_eq!(ds.n_positive(), 30);
        assert_eq!(ds.len(), 60);
    }

    #[test]
    fn fixed_seed_identical_bytes() {
        let all = profiles(4, 5);
        let link = Link::new(ChannelModel::awgn(10.0));
        let a = build_training_set(&all[..2], &all[2..], &link, 2, &mut Rng::new(8)).unwrap();
        let b = build_training_set(&all[..2], &all[2..], &link, 2, &mut Rng::new(8)).unwrap();
        assert_eq!(a.to_capture().unwrap().0.encode(), b.to_capture().unwrap().0.encode());
    }

    #[test]
    fn overlap_and_empty_rejected() {
        let all = profiles(3, 5);
        let link = Link::new(ChannelModel::awgn(10.0));
        let mut rng = Rng::new(1);
        assert!(build_training_set(&all[..2], &all[1..], &link, 1, &mut rng).is_err());
        assert!(build_training_set(&all[..2], &[], &link, 1, &mut rng).is_err());
        assert!(build_training_set(&all[..2], &all[2..], &link, 0, &mut rng).is_err());
    }

    #[test]
    fn split_partitions() {
        let all = profiles(2, 5);
        let link = Link::new(ChannelModel::awgn(10.0));
        let ds = build_training_set(&all[..1], &all[1..], &link, 10, &mut Rng::new(2)).unwrap();
        let (tr, te) = ds.split(0.25, &mut Rng::new(3)).unwrap();
        assert_eq!(tr.len() + te.len(), 20);
        assert_eq!(te.len(), 5);
    }
}
