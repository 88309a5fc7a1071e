//! Joint support sets, their projections and k-fold extensions.
//!
//! A [`SupportSet`] stores, per informant, an ordered alphabet of value labels
//! and a sorted list of distinct tuples expressed as ranks into those
//! alphabets. The rank order fixes the binary codec (see [`crate::bits`]).
//! Sets built from entries keep only labels that actually occur, so for them
//! the alphabet is exactly the marginal support. Sets obtained by bit
//! conditioning keep the parent alphabet so that they share its codec.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use crate::bits::{ceil_log2, BitLayout, MAX_WIDTH};
use crate::error::{Error, Result};
use crate::Limits;

/// An opaque value label. Block labels are the k-tuples produced by
/// [`k_extension`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Atom(String),
    Block(Vec<Label>),
}

impl Label {
    pub fn atom(s: impl Into<String>) -> Self {
        Label::Atom(s.into())
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Atom(s.to_string())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label::Atom(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Atom(s) => f.write_str(s),
            Label::Block(parts) => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Integers compare numerically, everything else lexicographically; integers
/// sort before other atoms and atoms before blocks.
fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<i128>(), b.parse::<i128>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Label::Atom(a), Label::Atom(b)) => natural_cmp(a, b),
            (Label::Block(a), Label::Block(b)) => a.cmp(b),
            (Label::Atom(_), Label::Block(_)) => Ordering::Less,
            (Label::Block(_), Label::Atom(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One value per informant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DataVector(pub Vec<Label>);

impl DataVector {
    pub fn new<L: Into<Label>>(values: impl IntoIterator<Item = L>) -> Self {
        DataVector(values.into_iter().map(Into::into).collect())
    }

    pub fn values(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Regroups `k` consecutive samples into the per-informant blocks used by
    /// the k-extension: informant `i` holds `(x_i^1, ..., x_i^k)`.
    /// A single sample is returned unchanged, matching `k_extension(s, 1) == s`.
    pub fn block(samples: &[DataVector]) -> Result<DataVector> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidArgument("a block needs at least one sample".into()))?;
        if samples.len() == 1 {
            return Ok(first.clone());
        }
        let n = first.len();
        if let Some(bad) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::Arity {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(DataVector(
            (0..n)
                .map(|i| Label::Block(samples.iter().map(|s| s.0[i].clone()).collect()))
                .collect(),
        ))
    }
}

impl fmt::Display for DataVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportSet {
    alphabets: Vec<Vec<Label>>,
    tuples: Vec<Vec<u32>>,
}

impl SupportSet {
    /// Assembles a set from already-ranked tuples, sorting and deduplicating.
    pub(crate) fn from_ranks(alphabets: Vec<Vec<Label>>, mut tuples: Vec<Vec<u32>>) -> Result<Self> {
        let width: usize = alphabets.iter().map(|a| ceil_log2(a.len() as u64) as usize).sum();
        if width > MAX_WIDTH {
            return Err(Error::Resource(format!(
                "codeword width {width} exceeds {MAX_WIDTH} bits"
            )));
        }
        tuples.sort_unstable();
        tuples.dedup();
        Ok(SupportSet { alphabets, tuples })
    }

    pub(crate) fn with_tuples(&self, tuples: Vec<Vec<u32>>) -> SupportSet {
        SupportSet {
            alphabets: self.alphabets.clone(),
            tuples,
        }
    }

    pub fn n_informants(&self) -> usize {
        self.alphabets.len()
    }

    pub fn alphabets(&self) -> &[Vec<Label>] {
        &self.alphabets
    }

    pub fn alphabet(&self, informant: usize) -> &[Label] {
        &self.alphabets[informant]
    }

    /// Tuples as rank vectors, in canonical (lexicographic rank) order.
    pub fn rank_tuples(&self) -> &[Vec<u32>] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.tuples.len() == 1
    }

    pub fn layout(&self) -> BitLayout {
        BitLayout::from_sizes(self.alphabets.iter().map(|a| a.len() as u64))
    }

    pub fn vector(&self, index: usize) -> DataVector {
        self.vector_of_ranks(&self.tuples[index])
    }

    pub fn vector_of_ranks(&self, ranks: &[u32]) -> DataVector {
        DataVector(
            ranks
                .iter()
                .zip(&self.alphabets)
                .map(|(&r, a)| a[r as usize].clone())
                .collect(),
        )
    }

    pub fn vectors(&self) -> impl Iterator<Item = DataVector> + '_ {
        self.tuples.iter().map(|t| self.vector_of_ranks(t))
    }

    pub fn rank_of(&self, informant: usize, label: &Label) -> Option<u32> {
        self.alphabets
            .get(informant)?
            .iter()
            .position(|l| l == label)
            .map(|p| p as u32)
    }

    pub fn ranks_of(&self, x: &DataVector) -> Option<Vec<u32>> {
        if x.len() != self.n_informants() {
            return None;
        }
        x.0.iter().enumerate().map(|(i, l)| self.rank_of(i, l)).collect()
    }

    pub fn index_of(&self, x: &DataVector) -> Option<usize> {
        let ranks = self.ranks_of(x)?;
        self.tuples.binary_search(&ranks).ok()
    }

    pub fn contains(&self, x: &DataVector) -> bool {
        self.index_of(x).is_some()
    }

    /// Membership check with the error the protocol layers report.
    pub fn require_member(&self, x: &DataVector) -> Result<usize> {
        self.index_of(x).ok_or_else(|| Error::NotMember(x.to_string()))
    }

    /// Ordered marginal support of one informant (labels that occur).
    pub fn marginal(&self, informant: usize) -> Vec<Label> {
        let mut used = vec![false; self.alphabets[informant].len()];
        for t in &self.tuples {
            used[t[informant] as usize] = true;
        }
        self.alphabets[informant]
            .iter()
            .zip(used)
            .filter_map(|(l, u)| u.then_some(l.clone()))
            .collect()
    }

    /// True when every tuple's ranks are a subset of `other`'s under the same alphabets.
    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.alphabets == other.alphabets && self.tuples.iter().all(|t| other.tuples.binary_search(t).is_ok())
    }

    /// Reorders informants: informant `i` of the result is informant `order[i]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<SupportSet> {
        check_index_set(order, self.n_informants())?;
        if order.len() != self.n_informants() {
            return Err(Error::InvalidArgument(
                "permutation must cover every informant".into(),
            ));
        }
        let alphabets = order.iter().map(|&i| self.alphabets[i].clone()).collect();
        let tuples = self
            .tuples
            .iter()
            .map(|t| order.iter().map(|&i| t[i]).collect())
            .collect();
        SupportSet::from_ranks(alphabets, tuples)
    }
}

fn check_index_set(indices: &[usize], n: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("informant subset must be nonempty".into()));
    }
    let mut seen = HashSet::new();
    for &i in indices {
        if i >= n {
            return Err(Error::InvalidArgument(format!(
                "informant index {} out of range 1..={n}",
                i + 1
            )));
        }
        if !seen.insert(i) {
            return Err(Error::InvalidArgument(format!("informant {} repeated", i + 1)));
        }
    }
    Ok(())
}

/// Outcome of [`SupportBuilder::build`] with bookkeeping about dropped input.
#[derive(Clone, Debug)]
pub struct Built {
    pub support: SupportSet,
    pub duplicates: usize,
    pub dropped_zero_weight: usize,
}

/// Collects weighted entries and optional alphabet declarations.
#[derive(Clone, Debug)]
pub struct SupportBuilder {
    n: usize,
    declared: Vec<Option<Vec<Label>>>,
    entries: Vec<(Vec<Label>, Option<f64>)>,
}

impl SupportBuilder {
    pub fn new(n_informants: usize) -> Result<Self> {
        if n_informants == 0 {
            return Err(Error::InvalidArgument("need at least one informant".into()));
        }
        Ok(SupportBuilder {
            n: n_informants,
            declared: vec![None; n_informants],
            entries: Vec::new(),
        })
    }

    pub fn n_informants(&self) -> usize {
        self.n
    }

    /// Declares the value order of informant `informant` (0-based).
    pub fn declare_alphabet(&mut self, informant: usize, labels: Vec<Label>) -> Result<()> {
        if informant >= self.n {
            return Err(Error::InvalidArgument(format!(
                "alphabet for informant {} but only {} informants",
                informant + 1,
                self.n
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidArgument(format!(
                    "label {l} repeated in alphabet of informant {}",
                    informant + 1
                )));
            }
        }
        self.declared[informant] = Some(labels);
        Ok(())
    }

    pub fn push(&mut self, values: Vec<Label>, weight: Option<f64>) -> Result<()> {
        if values.len() != self.n {
            return Err(Error::Arity {
                expected: self.n,
                found: values.len(),
            });
        }
        if let Some(w) = weight {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!("invalid weight {w}")));
            }
        }
        self.entries.push((values, weight));
        Ok(())
    }

    pub fn build(self) -> Result<Built> {
        let mut dropped = 0;
        let kept: Vec<Vec<Label>> = self
            .entries
            .into_iter()
            .filter_map(|(v, w)| match w {
                Some(0.0) => {
                    dropped += 1;
                    None
                }
                _ => Some(v),
            })
            .collect();
        if kept.is_empty() {
            return Err(Error::Degenerate);
        }

        let mut alphabets = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let used: HashSet<&Label> = kept.iter().map(|v| &v[i]).collect();
            let alphabet = match &self.declared[i] {
                Some(decl) => {
                    if let Some(stray) = kept.iter().map(|v| &v[i]).find(|l| !decl.contains(l)) {
                        return Err(Error::Domain(format!(
                            "label {stray} of informant {} is not in its declared alphabet",
                            i + 1
                        )));
                    }
                    decl.iter().filter(|l| used.contains(l)).cloned().collect()
                }
                None => {
                    let mut labels: Vec<Label> = used.into_iter().cloned().collect();
                    labels.sort();
                    labels
                }
            };
            alphabets.push(alphabet);
        }

        let total = kept.len();
        let tuples: Vec<Vec<u32>> = kept
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(i, l)| alphabets[i].iter().position(|a| a == l).unwrap() as u32)
                    .collect()
            })
            .collect();
        let support = SupportSet::from_ranks(alphabets, tuples)?;
        let duplicates = total - support.len();
        Ok(Built {
            support,
            duplicates,
            dropped_zero_weight: dropped,
        })
    }
}

/// Builds a support set from `(tuple, weight)` entries with inferred alphabets.
/// A weight of `None` means "positive"; zero-weight entries are dropped.
pub fn build_support_set(entries: Vec<(DataVector, Option<f64>)>) -> Result<SupportSet> {
    let n = entries.first().map(|(v, _)| v.len()).ok_or(Error::Degenerate)?;
    let mut builder = SupportBuilder::new(n)?;
    for (v, w) in entries {
        builder.push(v.0, w)?;
    }
    Ok(builder.build()?.support)
}

/// Marginal support of the informants in `subset` (0-based indices).
pub fn project(s: &SupportSet, subset: &[usize]) -> Result<SupportSet> {
    check_index_set(subset, s.n_informants())?;
    let mut subset = subset.to_vec();
    subset.sort_unstable();

    // Re-rank over the labels that survive, preserving alphabet order.
    let mut alphabets = Vec::with_capacity(subset.len());
    let mut remap = Vec::with_capacity(subset.len());
    for &i in &subset {
        let mut used = vec![false; s.alphabet(i).len()];
        for t in s.rank_tuples() {
            used[t[i] as usize] = true;
        }
        let mut map = vec![u32::MAX; used.len()];
        let mut labels = Vec::new();
        for (r, u) in used.iter().enumerate() {
            if *u {
                map[r] = labels.len() as u32;
                labels.push(s.alphabet(i)[r].clone());
            }
        }
        alphabets.push(labels);
        remap.push(map);
    }
    let tuples = s
        .rank_tuples()
        .iter()
        .map(|t| {
            subset
                .iter()
                .zip(&remap)
                .map(|(&i, map)| map[t[i] as usize])
                .collect()
        })
        .collect();
    SupportSet::from_ranks(alphabets, tuples)
}

/// The k-fold extension `S^k = S^{k-1} x S`, regrouped per informant so that
/// informant `i` holds a block of `k` values.
pub fn k_extension(s: &SupportSet, k: usize, limits: &Limits) -> Result<SupportSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    if k == 1 {
        return Ok(s.clone());
    }
    let too_big = || {
        Error::Resource(format!(
            "{k}-extension exceeds the cap of {} tuples",
            limits.max_tuples
        ))
    };
    let k32 = u32::try_from(k).map_err(|_| too_big())?;
    let count = s.len().checked_pow(k32).ok_or_else(too_big)?;
    if count > limits.max_tuples {
        return Err(too_big());
    }
    let mut alphabets = Vec::with_capacity(s.n_informants());
    for a in s.alphabets() {
        let size = a.len().checked_pow(k32).ok_or_else(too_big)?;
        if size > limits.max_tuples.max(count) {
            return Err(too_big());
        }
        let blocks = (0..size)
            .map(|mut code| {
                let mut parts = vec![Label::atom(""); k];
                for slot in parts.iter_mut().rev() {
                    *slot = a[code % a.len()].clone();
                    code /= a.len();
                }
                Label::Block(parts)
            })
            .collect();
        alphabets.push(blocks);
    }

    let n = s.n_informants();
    let base = s.rank_tuples();
    let mut tuples = Vec::with_capacity(count);
    let mut digits = vec![0usize; k];
    for _ in 0..count {
        let ranks = (0..n)
            .map(|i| {
                let size = s.alphabet(i).len() as u32;
                digits.iter().fold(0u32, |acc, &d| acc * size + base[d][i])
            })
            .collect();
        tuples.push(ranks);
        // odometer increment, last sample fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < base.len() {
                break;
            }
            *d = 0;
        }
    }
    SupportSet::from_ranks(alphabets, tuples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixture_a_projections() {
        let a = fixtures::fixture_a();
        assert_eq!(a.len(), 8);
        let p1 = project(&a, &[0]).unwrap();
        assert_eq!(p1.len(), 5);
        assert_eq!(
            p1.vectors().map(|v| v.to_string()).collect::<Vec<_>>(),
            ["(1)", "(2)", "(3)", "(4)", "(5)"]
        );
        assert_eq!(project(&a, &[1]).unwrap().len(), 4);
        assert_eq!(project(&a, &[0, 1]).unwrap(), a);
        assert_eq!(project(&a, &[1, 0]).unwrap(), a);
    }

    #[test]
    fn project_rejects_bad_subsets() {
        let a = fixtures::fixture_a();
        assert!(project(&a, &[]).is_err());
        assert!(project(&a, &[2]).is_err());
        assert!(project(&a, &[0, 0]).is_err());
    }

    #[test]
    fn zero_weight_entry_is_dropped() {
        let mut entries: Vec<_> = fixtures::FIXTURE_B
            .iter()
            .map(|&(a, b)| (DataVector::new([a, b]), Some(0.1)))
            .collect();
        let base = build_support_set(entries.clone()).unwrap();
        entries.push((DataVector::new(["9", "9"]), Some(0.0)));
        assert_eq!(build_support_set(entries).unwrap(), base);
    }

    #[test]
    fn singleton_and_degenerate() {
        let s = build_support_set(vec![(DataVector::new(["a"]), Some(1.0))]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.layout().total_width(), 0);
        let err = build_support_set(vec![(DataVector::new(["a"]), Some(0.0))]).unwrap_err();
        assert!(matches!(err, Error::Degenerate));
        assert!(matches!(build_support_set(vec![]), Err(Error::Degenerate)));
    }

    #[test]
    fn arity_and_alphabet_errors() {
        let mut b = SupportBuilder::new(2).unwrap();
        assert!(matches!(
            b.push(vec!["1".into()], None),
            Err(Error::Arity {
                expected: 2,
                found: 1
            })
        ));
        b.declare_alphabet(0, vec!["x".into()]).unwrap();
        b.push(vec!["y".into(), "1".into()], None).unwrap();
        assert!(matches!(b.build(), Err(Error::Domain(_))));
        let mut b = SupportBuilder::new(1).unwrap();
        assert!(b.declare_alphabet(0, vec!["x".into(), "x".into()]).is_err());
        assert!(b.push(vec!["x".into()], Some(-1.0)).is_err());
    }

    #[test]
    fn duplicates_are_collapsed_and_counted() {
        let mut b = SupportBuilder::new(2).unwrap();
        for _ in 0..3 {
            b.push(vec!["1".into(), "2".into()], None).unwrap();
        }
        b.push(vec!["2".into(), "2".into()], Some(0.5)).unwrap();
        let built = b.build().unwrap();
        assert_eq!(built.support.len(), 2);
        assert_eq!(built.duplicates, 2);
    }

    #[test]
    fn declared_alphabet_order_sets_ranks() {
        let mut b = SupportBuilder::new(1).unwrap();
        b.declare_alphabet(0, vec!["z".into(), "unused".into(), "a".into()])
            .unwrap();
        b.push(vec!["a".into()], None).unwrap();
        b.push(vec!["z".into()], None).unwrap();
        let s = b.build().unwrap().support;
        assert_eq!(s.alphabet(0), &[Label::atom("z"), Label::atom("a")]);
    }

    #[test]
    fn natural_order_for_inferred_alphabets() {
        let s = build_support_set(
            ["10", "9", "b", "a", "2"]
                .iter()
                .map(|v| (DataVector::new([*v]), None))
                .collect(),
        )
        .unwrap();
        let order: Vec<String> = s.alphabet(0).iter().map(|l| l.to_string()).collect();
        assert_eq!(order, ["2", "9", "10", "a", "b"]);
    }

    #[test]
    fn k_extension_sizes() {
        let limits = Limits::default();
        let b = fixtures::fixture_b();
        let b2 = k_extension(&b, 2, &limits).unwrap();
        assert_eq!(b2.len(), 100);
        assert_eq!(b2.alphabet(0).len(), 25);
        assert_eq!(k_extension(&b, 1, &limits).unwrap(), b);
        let a2 = k_extension(&fixtures::fixture_a(), 2, &limits).unwrap();
        assert_eq!(a2.len(), 64);
        assert!(k_extension(&b, 0, &limits).is_err());
        let tight = Limits {
            max_tuples: 99,
            ..Limits::default()
        };
        assert!(matches!(k_extension(&b, 2, &tight), Err(Error::Resource(_))));
    }

    #[test]
    fn k_extension_marginals_are_products() {
        let limits = Limits::default();
        let a = fixtures::fixture_a();
        let a2 = k_extension(&a, 2, &limits).unwrap();
        for i in 0..2 {
            let m = project(&a, &[i]).unwrap().len();
            assert_eq!(project(&a2, &[i]).unwrap().len(), m * m);
        }
    }

    #[test]
    fn block_regrouping() {
        let x = DataVector::block(&[DataVector::new(["1", "1"]), DataVector::new(["2", "2"])]).unwrap();
        assert_eq!(x.to_string(), "((1,2),(1,2))");
        let one = DataVector::new(["1", "3"]);
        assert_eq!(DataVector::block(std::slice::from_ref(&one)).unwrap(), one);
    }

    #[test]
    fn permute_round_trip() {
        let a = fixtures::fixture_a();
        let p = a.permute(&[1, 0]).unwrap();
        assert_eq!(p.len(), a.len());
        assert_eq!(p.permute(&[1, 0]).unwrap(), a);
    }
}
