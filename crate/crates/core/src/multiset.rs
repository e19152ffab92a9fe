//! Finite real multisets with tolerance clustering and matching.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::Bound;

use serde::{Deserialize, Serialize};

/// A finite multiset of reals, stored as sorted `(value, multiplicity)` pairs.
///
/// Values closer than the clustering tolerance used at construction are merged
/// into the first value seen in ascending order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<MultisetEntry>", from = "Vec<MultisetEntry>")]
pub struct RealMultiset {
    entries: Vec<(f64, u32)>,
}

/// Serialized form of one multiset entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultisetEntry {
    pub value: f64,
    pub multiplicity: u32,
}

impl From<RealMultiset> for Vec<MultisetEntry> {
    fn from(ms: RealMultiset) -> Self {
        ms.entries.into_iter().map(|(value, multiplicity)| MultisetEntry { value, multiplicity }).collect()
    }
}

impl From<Vec<MultisetEntry>> for RealMultiset {
    fn from(entries: Vec<MultisetEntry>) -> Self {
        RealMultiset::from_weighted(entries.into_iter().map(|e| (e.value, e.multiplicity)), 0.0)
    }
}

impl RealMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I, tol: f64) -> Self {
        Self::from_weighted(values.into_iter().map(|v| (v, 1)), tol)
    }

    /// Builds from `(value, multiplicity)` pairs; zero multiplicities are dropped.
    pub fn from_weighted<I: IntoIterator<Item = (f64, u32)>>(items: I, tol: f64) -> Self {
        let mut items: Vec<(f64, u32)> = items.into_iter().filter(|&(_, m)| m > 0).collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut entries: Vec<(f64, u32)> = Vec::with_capacity(items.len());
        for (v, m) in items {
            match entries.last_mut() {
                Some((rep, count)) if (v - *rep).abs() <= tol => *count += m,
                _ => entries.push((v, m)),
            }
        }
        RealMultiset { entries }
    }

    pub fn entries(&self) -> &[(f64, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct values.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// Total count with multiplicity.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, m)| u64::from(m)).sum()
    }

    /// Values repeated by multiplicity, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m as usize))
            .collect()
    }

    /// Total multiplicity of values within `tol` of `value`.
    pub fn count_near(&self, value: f64, tol: f64) -> u32 {
        self.entries
            .iter()
            .filter(|(v, _)| (v - value).abs() <= tol)
            .map(|&(_, m)| m)
            .sum()
    }

    /// Entries satisfying `pred`, keeping multiplicities.
    pub fn filter<F: Fn(f64) -> bool>(&self, pred: F) -> Self {
        RealMultiset {
            entries: self.entries.iter().copied().filter(|&(v, _)| pred(v)).collect(),
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> Self {
        Self::from_weighted(self.entries.iter().map(|&(v, m)| (f(v), m)), tol)
    }

    /// Multiset sum.
    pub fn union(&self, other: &RealMultiset, tol: f64) -> Self {
        Self::from_weighted(self.entries.iter().chain(other.entries.iter()).copied(), tol)
    }
}

/// Which side of a comparison a witness element came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// An element of one multiset with no partner in the other.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub value: f64,
    pub side: Side,
}

/// Result of [`multiset_equal`].
#[derive(Clone, Debug, PartialEq)]
pub struct MultisetMatch {
    pub equal: bool,
    /// Largest distance between paired elements (over the pairs formed).
    pub max_distance: f64,
    pub witness: Option<Witness>,
}

/// Decides whether a multiplicity-respecting bijection pairs every element of
/// `a` with an element of `b` within `tol`.
///
/// Both sides are walked in ascending order and the two smallest unpaired
/// elements are paired whenever they are within `tol`; otherwise the smaller
/// one can have no partner and is returned as the witness. For 1-D data this
/// greedy walk finds a matching whenever one exists.
pub fn multiset_equal(a: &RealMultiset, b: &RealMultiset, tol: f64) -> MultisetMatch {
    let left = a.expanded();
    let right = b.expanded();
    let (mut i, mut j) = (0, 0);
    let mut max_distance = 0.0_f64;
    while i < left.len() && j < right.len() {
        let d = (left[i] - right[j]).abs();
        if d <= tol {
            max_distance = max_distance.max(d);
            i += 1;
            j += 1;
        } else {
            let witness = if left[i] < right[j] {
                Witness { value: left[i], side: Side::Left }
            } else {
                Witness { value: right[j], side: Side::Right }
            };
            return MultisetMatch { equal: false, max_distance, witness: Some(witness) };
        }
    }
    let witness = if i < left.len() {
        Some(Witness { value: left[i], side: Side::Left })
    } else if j < right.len() {
        Some(Witness { value: right[j], side: Side::Right })
    } else {
        None
    };
    MultisetMatch { equal: witness.is_none(), max_distance, witness }
}

#[derive(Clone, Copy, Debug)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Mutable multiset used by the peeling loops: tolerance lookups plus an undo
/// log so a failed trace subtraction leaves the state untouched.
#[derive(Clone, Debug)]
pub(crate) struct PeelSet {
    counts: BTreeMap<Key, u32>,
    total: u64,
}

/// A point of a trace to subtract. Optional points sit within tolerance of the
/// window edge; whatever copies are present (up to the multiplicity) are
/// removed.
#[derive(Clone, Copy, Debug)]
pub(crate) struct TracePoint {
    pub value: f64,
    pub required: bool,
}

#[derive(Debug)]
pub(crate) struct Removal {
    log: Vec<(f64, u32)>,
    pub removed: u32,
    /// Trace points that found a partner.
    pub matched: u32,
    pub max_distance: f64,
}

impl PeelSet {
    pub fn new(ms: &RealMultiset) -> Self {
        let counts: BTreeMap<Key, u32> = ms.entries().iter().map(|&(v, m)| (Key(v), m)).collect();
        let total = ms.total();
        PeelSet { counts, total }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Total multiplicity of entries strictly greater than `threshold`.
    pub fn total_above(&self, threshold: f64) -> u64 {
        self.counts
            .range((Bound::Excluded(Key(threshold)), Bound::Unbounded))
            .map(|(_, &m)| u64::from(m))
            .sum()
    }

    /// Smallest entry strictly greater than `threshold`.
    pub fn first_above(&self, threshold: f64) -> Option<(f64, u32)> {
        self.counts
            .range((Bound::Excluded(Key(threshold)), Bound::Unbounded))
            .next()
            .map(|(k, &m)| (k.0, m))
    }

    /// Smallest entry of any sign.
    pub fn first(&self) -> Option<(f64, u32)> {
        self.counts.iter().next().map(|(k, &m)| (k.0, m))
    }

    pub fn to_multiset(&self) -> RealMultiset {
        RealMultiset { entries: self.counts.iter().map(|(k, &m)| (k.0, m)).collect() }
    }

    /// Closest stored value to `value` within `tol`.
    fn nearest(&self, value: f64, tol: f64) -> Option<f64> {
        self.counts
            .range(Key(value - tol)..=Key(value + tol))
            .map(|(k, _)| k.0)
            .min_by(|a, b| (a - value).abs().total_cmp(&(b - value).abs()))
    }

    fn take(&mut self, key: f64, count: u32) {
        let entry = self.counts.get_mut(&Key(key)).expect("key present");
        *entry -= count;
        if *entry == 0 {
            self.counts.remove(&Key(key));
        }
        self.total -= u64::from(count);
    }

    fn give(&mut self, key: f64, count: u32) {
        *self.counts.entry(Key(key)).or_insert(0) += count;
        self.total += u64::from(count);
    }

    /// Removes `mult` copies of every trace point. On failure the state is
    /// restored and the offending point is returned.
    pub fn remove_trace(
        &mut self,
        points: &[TracePoint],
        mult: u32,
        tol: f64,
    ) -> Result<Removal, f64> {
        let mut removal = Removal { log: Vec::with_capacity(points.len()), removed: 0, matched: 0, max_distance: 0.0 };
        for p in points {
            let hit = self.nearest(p.value, tol).map(|k| (k, self.counts[&Key(k)]));
            let take = match hit {
                Some((k, count)) if count >= mult => Some((k, mult)),
                Some((k, count)) if !p.required => Some((k, count)),
                _ if p.required => {
                    self.undo(removal);
                    return Err(p.value);
                }
                _ => None,
            };
            if let Some((k, count)) = take {
                self.take(k, count);
                removal.log.push((k, count));
                removal.removed += count;
                removal.matched += 1;
                removal.max_distance = removal.max_distance.max((k - p.value).abs());
            }
        }
        Ok(removal)
    }

    pub fn undo(&mut self, removal: Removal) {
        for (k, m) in removal.log.into_iter().rev() {
            self.give(k, m);
        }
    }
}
