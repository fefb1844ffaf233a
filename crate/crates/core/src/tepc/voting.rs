//! Weighted voting over the three weather sources for one hour.
//!
//! Present sources are split into at most two groups whose members pairwise
//! agree within per-channel tolerances. The heaviest group wins; equal weights
//! go to the group whose sorted member indices compare lowest. The qualified
//! value is the plain per-channel average of the winners and the reliability
//! is their summed weight. When no split into two agreeing groups exists
//! (every pair disagrees) each source stands alone.

use serde::{Deserialize, Serialize};

use super::Weights;
use crate::fixed::Fixed;
use crate::ledger::{SampleTriple, Value};

/// Maximum absolute per-channel difference for two samples to agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tolerances {
    pub temperature: Fixed,
    pub pressure: Fixed,
    pub humidity: Fixed,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            temperature: Fixed::from_int(1),
            pressure: Fixed::from_int(5),
            humidity: Fixed::from_int(5),
        }
    }
}

impl Tolerances {
    pub fn channels(&self) -> [Fixed; 3] {
        [self.temperature, self.pressure, self.humidity]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualifiedSample {
    pub sample: SampleTriple,
    pub reliability: Fixed,
}

impl QualifiedSample {
    pub const EMPTY: QualifiedSample = QualifiedSample {
        sample: SampleTriple::NULL,
        reliability: Fixed::ZERO,
    };

    pub fn to_value(&self) -> Value {
        Value::List(vec![Value::Sample(self.sample), Value::Number(self.reliability)])
    }

    pub fn from_value(value: &Value) -> Option<QualifiedSample> {
        match value {
            Value::List(items) => match items.as_slice() {
                [Value::Sample(sample), Value::Number(reliability)] => Some(QualifiedSample {
                    sample: *sample,
                    reliability: *reliability,
                }),
                _ => None,
            },
            _ => None,
        }
    }
}

/// True when every channel present in both samples differs by at most its tolerance.
pub fn agrees(a: &SampleTriple, b: &SampleTriple, tolerances: &Tolerances) -> bool {
    a.channels()
        .into_iter()
        .zip(b.channels())
        .zip(tolerances.channels())
        .all(|((x, y), tol)| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() <= tol,
            _ => true,
        })
}

pub fn qualify_by_voting(
    sources: &[Option<SampleTriple>; 3],
    weights: &Weights,
    tolerances: &Tolerances,
) -> QualifiedSample {
    let present: Vec<usize> = (0..3).filter(|&i| sources[i].is_some()).collect();
    if present.is_empty() {
        return QualifiedSample::EMPTY;
    }
    let sample = |i: usize| sources[i].as_ref().unwrap();
    let n = present.len();
    // agreement graph over positions in `present`
    let mut adjacent = [[true; 3]; 3];
    for a in 0..n {
        for b in 0..n {
            adjacent[a][b] = a == b || agrees(sample(present[a]), sample(present[b]), tolerances);
        }
    }
    let is_clique = |mask: u32| {
        (0..n).all(|a| (0..n).all(|b| mask & (1 << a) == 0 || mask & (1 << b) == 0 || adjacent[a][b]))
    };
    let members = |mask: u32| -> Vec<usize> { (0..n).filter(|&a| mask & (1 << a) != 0).map(|a| present[a]).collect() };

    let full = (1u32 << n) - 1;
    let mut candidates: Vec<Vec<usize>> = (1..=full)
        .filter(|&mask| is_clique(mask) && is_clique(full ^ mask))
        .map(members)
        .collect();
    if candidates.is_empty() {
        candidates = present.iter().map(|&i| vec![i]).collect();
    }

    let weight_of = |group: &[usize]| -> Fixed { group.iter().map(|&i| weights.0[i]).sum() };
    let winner = candidates
        .into_iter()
        .reduce(|best, next| {
            let (wb, wn) = (weight_of(&best), weight_of(&next));
            if wn > wb || (wn == wb && next < best) {
                next
            } else {
                best
            }
        })
        .expect("at least one candidate group");

    let mut channels = [None; 3];
    for (c, slot) in channels.iter_mut().enumerate() {
        let values: Vec<Fixed> = winner.iter().filter_map(|&i| sample(i).channels()[c]).collect();
        *slot = Fixed::mean(&values);
    }
    QualifiedSample {
        sample: SampleTriple::from_channels(channels),
        reliability: weight_of(&winner),
    }
}
