//! Concept signals and lag-0 normalized cross-correlation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ingest::BucketedCorpus;

/// Per-interval occurrence counts of one concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSignal {
    pub concept_id: String,
    pub values: Vec<u64>,
}

impl ConceptSignal {
    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }
}

/// Elementwise sum of every concept signal, taken before any filtering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllTweetsSignal {
    pub values: Vec<u64>,
}

/// One signal per observed concept, keyed by concept id.
pub fn build_concept_signals(corpus: &BucketedCorpus) -> BTreeMap<String, ConceptSignal> {
    let len = corpus.grid().len;
    corpus
        .concepts()
        .iter()
        .enumerate()
        .map(|(idx, concept)| {
            let mut values = vec![0u64; len];
            for &(t, n) in corpus.concept_entries(idx) {
                values[t] = n;
            }
            (concept.clone(), ConceptSignal { concept_id: concept.clone(), values })
        })
        .collect()
}

pub fn build_alltweets<'a, I>(signals: I) -> Result<AllTweetsSignal>
where
    I: IntoIterator<Item = &'a ConceptSignal>,
{
    let mut iter = signals.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput("no concept signals"))?;
    let mut values = first.values.clone();
    for signal in iter {
        if signal.values.len() != values.len() {
            return Err(Error::Dimension { left: values.len(), right: signal.values.len() });
        }
        for (acc, &v) in values.iter_mut().zip(&signal.values) {
            *acc += v;
        }
    }
    Ok(AllTweetsSignal { values })
}

/// A real-valued series element. Counts are promoted to `f64` for correlation.
pub trait Sample: Copy {
    fn to_f64(self) -> f64;
}

impl Sample for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

impl Sample for u64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Sample for u32 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

#[inline]
pub(crate) fn dot<A: Sample, B: Sample>(a: &[A], b: &[B]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x.to_f64() * y.to_f64()).sum()
}

#[inline]
pub(crate) fn sum_sq<A: Sample>(a: &[A]) -> f64 {
    dot(a, a)
}

/// Normalizes a lag-0 inner product by the two sums of squares.
///
/// Zero norm yields 0. The result is clamped to `[0, 1]` so rounding can never
/// push a self-correlation above an edge threshold of 1.
#[inline]
pub(crate) fn normalize(inner: f64, sum_sq_a: f64, sum_sq_b: f64) -> f64 {
    if sum_sq_a == 0.0 || sum_sq_b == 0.0 {
        return 0.0;
    }
    (inner / libm::sqrt(sum_sq_a * sum_sq_b)).clamp(0.0, 1.0)
}

/// Lag-0 cross-correlation: `sum_m a[m] * b[m]`.
pub fn xcorr0<A: Sample, B: Sample>(a: &[A], b: &[B]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension { left: a.len(), right: b.len() });
    }
    Ok(dot(a, b))
}

/// Lag-0 correlation together with whether either series was all-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

/// Concept correlation measure: lag-0 cross-correlation divided by the
/// product of Euclidean norms. In `[0, 1]` for nonnegative series; 0 when
/// either series is all-zero.
pub fn ccm<A: Sample, B: Sample>(a: &[A], b: &[B]) -> Result<f64> {
    ccm_detailed(a, b).map(|c| c.value)
}

pub fn ccm_detailed<A: Sample, B: Sample>(a: &[A], b: &[B]) -> Result<Correlation> {
    let inner = xcorr0(a, b)?;
    let (na, nb) = (sum_sq(a), sum_sq(b));
    Ok(Correlation { value: normalize(inner, na, nb), degenerate: na == 0.0 || nb == 0.0 })
}

/// Series with their sums of squares cached, for all-pairs correlation.
///
/// [`CorrelationSet::ccm`] performs the same floating-point operations in the
/// same order as [`ccm`], so both return bit-identical values.
#[derive(Debug, Clone)]
pub struct CorrelationSet {
    rows: Vec<Vec<f64>>,
    sum_sq: Vec<f64>,
}

impl CorrelationSet {
    pub fn new<S: Sample, R: AsRef<[S]>>(rows: &[R]) -> Result<Self> {
        let len = rows.first().map_or(0, |r| r.as_ref().len());
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != len {
                return Err(Error::Dimension { left: len, right: row.len() });
            }
            out.push(row.iter().map(|v| v.to_f64()).collect::<Vec<f64>>());
        }
        let sum_sq = out.iter().map(|r| sum_sq(r)).collect();
        Ok(CorrelationSet { rows: out, sum_sq })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_zero(&self, i: usize) -> bool {
        self.sum_sq[i] == 0.0
    }

    #[inline]
    pub fn ccm(&self, i: usize, j: usize) -> f64 {
        normalize(dot(&self.rows[i], &self.rows[j]), self.sum_sq[i], self.sum_sq[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{bucketize, Interval, PostRecord, TimeGrid};

    #[test]
    fn signal_from_counts() {
        let records = [
            PostRecord::new("1", "u", 0, ["A"]),
            PostRecord::new("2", "u", 3 * 3600, ["A"]),
            PostRecord::new("3", "v", 3 * 3600, ["A"]),
        ];
        let grid = TimeGrid::new(0, Interval::Hourly, 4).unwrap();
        let signals = build_concept_signals(&bucketize(&records, grid).unwrap());
        assert_eq!(signals["A"].values, vec![1, 0, 0, 2]);
        assert!(!signals.contains_key("B"));
    }

    #[test]
    fn disjoint_support() {
        let records = [PostRecord::new("1", "u", 0, ["A"]), PostRecord::new("2", "u", 3600, ["B"])];
        let grid = TimeGrid::new(0, Interval::Hourly, 2).unwrap();
        let signals = build_concept_signals(&bucketize(&records, grid).unwrap());
        assert_eq!(signals["A"].values, vec![1, 0]);
        assert_eq!(signals["B"].values, vec![0, 1]);
    }

    #[test]
    fn alltweets_sums() {
        let a = ConceptSignal { concept_id: "a".into(), values: vec![1, 0] };
        let b = ConceptSignal { concept_id: "b".into(), values: vec![0, 2] };
        assert_eq!(build_alltweets([&a, &b]).unwrap().values, vec![1, 2]);
        assert_eq!(build_alltweets([&a]).unwrap().values, a.values);
        assert_eq!(build_alltweets(core::iter::empty()), Err(Error::EmptyInput("no concept signals")));
    }

    #[test]
    fn xcorr0_examples() {
        assert_eq!(xcorr0(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 14.0);
        assert_eq!(xcorr0(&[1u64, 0], &[0u64, 1]).unwrap(), 0.0);
        assert!(matches!(xcorr0(&[1.0], &[1.0, 2.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn ccm_examples() {
        assert_eq!(ccm(&[3u64, 1, 4, 1, 5], &[3u64, 1, 4, 1, 5]).unwrap(), 1.0);
        assert_eq!(ccm(&[1u64, 0, 0], &[0u64, 1, 0]).unwrap(), 0.0);
        assert_eq!(ccm(&[2u64, 4], &[1u64, 2]).unwrap(), 1.0);
        let d = ccm_detailed(&[0u64, 0], &[1u64, 2]).unwrap();
        assert_eq!(d, Correlation { value: 0.0, degenerate: true });
    }

    #[test]
    fn correlation_set_matches_ccm_bitwise() {
        let rows = vec![vec![1u64, 5, 2, 0], vec![0, 3, 3, 1], vec![0, 0, 0, 0]];
        let set = CorrelationSet::new(&rows).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(set.ccm(i, j).to_bits(), ccm(&rows[i], &rows[j]).unwrap().to_bits());
            }
        }
        assert!(set.is_zero(2));
    }
}
