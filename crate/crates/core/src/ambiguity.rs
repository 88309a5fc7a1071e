//! Information ambiguity: `mu` counts the possibilities in a (conditional)
//! support set and `I = ceil(log2 mu)` is the worst-case number of bits
//! needed to name one of them.
//!
//! Informant indices are 0-based throughout the library.

use std::collections::{BTreeSet, HashMap, HashSet};

use itertools::Itertools;

use crate::bits::{ceil_log2, condition, BitAssignment};
use crate::error::{Error, Result};
use crate::support::{project, DataVector, Label, SupportBuilder, SupportSet};
use crate::Limits;

pub fn ambiguity(s: &SupportSet) -> usize {
    s.len()
}

pub fn information_ambiguity(s: &SupportSet) -> u32 {
    ceil_log2(s.len() as u64)
}

/// Number of distinct values of informant `i` that occur in `s`.
pub fn marginal_ambiguity(s: &SupportSet, i: usize) -> usize {
    s.rank_tuples().iter().map(|t| t[i]).collect::<HashSet<_>>().len()
}

fn validate_disjoint(s: &SupportSet, target: &[usize], given: &[usize]) -> Result<()> {
    if target.is_empty() {
        return Err(Error::InvalidArgument("target informant set is empty".into()));
    }
    let n = s.n_informants();
    let mut seen = HashSet::new();
    for &i in target.iter().chain(given) {
        if i >= n {
            return Err(Error::InvalidArgument(format!(
                "informant {} out of range",
                i + 1
            )));
        }
        if !seen.insert(i) {
            return Err(Error::InvalidArgument(format!(
                "informant {} appears twice or in both target and given sets",
                i + 1
            )));
        }
    }
    Ok(())
}

fn pick(t: &[u32], idx: &[usize]) -> Vec<u32> {
    idx.iter().map(|&i| t[i]).collect()
}

/// `S_{X_A | X_B}(x_B)` as rank vectors over `target`, with `given_ranks`
/// aligned to `given`. Empty when `x_B` does not occur.
fn conditional_ranks(
    s: &SupportSet,
    target: &[usize],
    given: &[usize],
    given_ranks: &[u32],
) -> BTreeSet<Vec<u32>> {
    s.rank_tuples()
        .iter()
        .filter(|t| given.iter().zip(given_ranks).all(|(&j, &r)| t[j] == r))
        .map(|t| pick(t, target))
        .collect()
}

/// Groups tuples by their values on `given` and counts distinct `target` values per group.
fn conditional_counts(s: &SupportSet, target: &[usize], given: &[usize]) -> HashMap<Vec<u32>, usize> {
    let mut groups: HashMap<Vec<u32>, HashSet<Vec<u32>>> = HashMap::new();
    for t in s.rank_tuples() {
        groups.entry(pick(t, given)).or_default().insert(pick(t, target));
    }
    groups.into_iter().map(|(k, v)| (k, v.len())).collect()
}

/// `mu_{X_A | X_B}(x_B)`: how many values of the target informants remain
/// once the given informants are known to hold `given`.
pub fn conditional_ambiguity(s: &SupportSet, target: &[usize], given: &[(usize, Label)]) -> Result<usize> {
    let given_idx: Vec<usize> = given.iter().map(|(i, _)| *i).collect();
    validate_disjoint(s, target, &given_idx)?;
    if given.is_empty() {
        return Err(Error::InvalidArgument("given informant set is empty".into()));
    }
    let ranks: Vec<u32> = given
        .iter()
        .map(|(i, l)| {
            s.rank_of(*i, l)
                .ok_or_else(|| Error::Domain(format!("value {l} not in support of informant {}", i + 1)))
        })
        .collect::<Result<_>>()?;
    let set = conditional_ranks(s, target, &given_idx, &ranks);
    if set.is_empty() {
        let shown = given.iter().map(|(_, l)| l.to_string()).join(",");
        return Err(Error::Domain(format!("({shown}) is not in the marginal support")));
    }
    Ok(set.len())
}

/// `mu-hat_{X_A | X_B}`: the largest conditional ambiguity over every value
/// the given informants can take. An empty `given` yields `mu_{X_A}`.
pub fn max_conditional_ambiguity(s: &SupportSet, target: &[usize], given: &[usize]) -> Result<usize> {
    validate_disjoint(s, target, given)?;
    Ok(conditional_counts(s, target, given)
        .into_values()
        .max()
        .unwrap_or(0))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainBound {
    pub bits: u32,
    /// Conditioning order achieving `bits` (0-based informant indices).
    pub order: Vec<usize>,
}

/// `sum_i ceil(log2 mu-hat_{X_order(i) | X_order(1..i-1)})` for one order.
pub fn chain_cost(s: &SupportSet, order: &[usize]) -> Result<u32> {
    (0..order.len())
        .map(|i| max_conditional_ambiguity(s, &order[i..=i], &order[..i]).map(|m| ceil_log2(m as u64)))
        .sum()
}

/// Minimum chain cost over every informant order.
pub fn chain_bound(s: &SupportSet, limits: &Limits) -> Result<ChainBound> {
    let n = s.n_informants();
    if n > limits.max_permutation_informants {
        return Err(Error::Resource(format!(
            "{n} informants exceed the permutation cap of {}",
            limits.max_permutation_informants
        )));
    }
    let mut best: Option<ChainBound> = None;
    for order in (0..n).permutations(n) {
        let bits = chain_cost(s, &order)?;
        if best.as_ref().is_none_or(|b| bits < b.bits) {
            best = Some(ChainBound { bits, order });
        }
    }
    Ok(best.expect("at least one permutation"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalTable {
    pub target: usize,
    pub given: usize,
    /// `(x_given, mu_{target | given}(x_given))` over the given marginal, in rank order.
    pub entries: Vec<(Label, usize)>,
    pub max: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub n_informants: usize,
    pub joint_ambiguity: usize,
    pub information_ambiguity: u32,
    /// `(mu_{X_i}, I_{X_i})` per informant.
    pub per_informant: Vec<(usize, u32)>,
    /// One table per ordered pair of distinct informants.
    pub conditionals: Vec<ConditionalTable>,
    /// `None` when `N` exceeds the permutation cap.
    pub chain: Option<ChainBound>,
}

pub fn report(s: &SupportSet, limits: &Limits) -> AmbiguityReport {
    let n = s.n_informants();
    let per_informant = (0..n)
        .map(|i| {
            let m = marginal_ambiguity(s, i);
            (m, ceil_log2(m as u64))
        })
        .collect();
    let mut conditionals = Vec::new();
    for (target, given) in (0..n).cartesian_product(0..n).filter(|(a, b)| a != b) {
        let counts = conditional_counts(s, &[target], &[given]);
        let mut entries: Vec<(u32, usize)> = counts.into_iter().map(|(k, v)| (k[0], v)).collect();
        entries.sort_unstable();
        let max = entries.iter().map(|e| e.1).max().unwrap_or(0);
        conditionals.push(ConditionalTable {
            target,
            given,
            entries: entries
                .into_iter()
                .map(|(r, c)| (s.alphabet(given)[r as usize].clone(), c))
                .collect(),
            max,
        });
    }
    AmbiguityReport {
        n_informants: n,
        joint_ambiguity: ambiguity(s),
        information_ambiguity: information_ambiguity(s),
        per_informant,
        conditionals,
        chain: chain_bound(s, limits).ok(),
    }
}

/// True when the tuples are exactly the product of the marginal supports.
pub fn is_non_interacting(s: &SupportSet) -> bool {
    let product: usize = (0..s.n_informants()).map(|i| marginal_ambiguity(s, i)).product();
    product == s.len()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyCheck {
    pub name: &'static str,
    /// Number of individual inequalities or set identities evaluated.
    pub evaluated: usize,
    /// Human-readable description of each violated instance.
    pub failures: Vec<String>,
}

impl PropertyCheck {
    fn new(name: &'static str) -> Self {
        PropertyCheck {
            name,
            evaluated: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.evaluated += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(PropertyCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Informant subsets quantified over by the conditional lemmas.
fn lemma_subsets(n: usize, limits: &Limits) -> Vec<Vec<usize>> {
    let max_size = if n <= limits.all_subsets_max_informants {
        n
    } else {
        2.min(n)
    };
    (1..=max_size).flat_map(|k| (0..n).combinations(k)).collect()
}

fn show(set: &[usize]) -> String {
    format!("{{{}}}", set.iter().map(|i| i + 1).join(","))
}

/// Evaluates every measure axiom and set lemma exhaustively on `s`.
pub fn property_suite(s: &SupportSet, limits: &Limits) -> PropertyReport {
    let n = s.n_informants();
    let info = information_ambiguity(s);
    let subsets = lemma_subsets(n, limits);
    let marg: Vec<usize> = (0..n).map(|i| marginal_ambiguity(s, i)).collect();
    let info_i: Vec<u32> = marg.iter().map(|&m| ceil_log2(m as u64)).collect();
    let info_sum: u32 = info_i.iter().sum();

    let mut conditioning = PropertyCheck::new("conditioning-reduces");
    for a in &subsets {
        let mu_a = max_conditional_ambiguity(s, a, &[]).unwrap();
        for b in subsets.iter().filter(|b| a.iter().all(|i| !b.contains(i))) {
            for (xb, count) in conditional_counts(s, a, b) {
                conditioning.check(
                    count <= mu_a && ceil_log2(count as u64) <= ceil_log2(mu_a as u64),
                    || format!("mu_{}|{}({xb:?}) = {count} > mu = {mu_a}", show(a), show(b)),
                );
            }
        }
    }

    let mut subadditivity = PropertyCheck::new("subadditivity");
    subadditivity.check(info <= info_sum, || format!("I = {info} > sum I_i = {info_sum}"));
    for a in &subsets {
        for b in subsets
            .iter()
            .filter(|b| b[0] > a[0] && a.iter().all(|i| !b.contains(i)))
        {
            let pa = project(s, a).unwrap();
            let pb = project(s, b).unwrap();
            let union: Vec<usize> = a.iter().chain(b).copied().sorted().collect();
            let pab = project(s, &union).unwrap();
            let ia = information_ambiguity(&pa);
            let ib = information_ambiguity(&pb);
            let iab = information_ambiguity(&pab);
            subadditivity.check(pab.len() <= pa.len() * pb.len() && iab <= ia + ib, || {
                format!(
                    "I_{} = {iab} > I_{} + I_{} = {}",
                    show(&union),
                    show(a),
                    show(b),
                    ia + ib
                )
            });
        }
    }

    let mut additivity = PropertyCheck::new("additivity");
    if is_non_interacting(s) {
        additivity.check(info.abs_diff(info_sum) as usize <= n, || {
            format!("product set with I = {info} but sum I_i = {info_sum}")
        });
    }

    let mut expansibility = PropertyCheck::new("expansibility");
    {
        let mut builder = SupportBuilder::new(n).unwrap();
        for (i, a) in s.alphabets().iter().enumerate() {
            let mut labels = a.clone();
            labels.push(Label::atom("__zero_weight__"));
            builder.declare_alphabet(i, labels).unwrap();
        }
        for v in s.vectors() {
            builder.push(v.0, Some(1.0)).unwrap();
        }
        builder
            .push(vec![Label::atom("__zero_weight__"); n], Some(0.0))
            .unwrap();
        if let Some(absent) = absent_combination(s) {
            builder.push(absent.0, Some(0.0)).unwrap();
        }
        let rebuilt = builder.build().unwrap().support;
        expansibility.check(information_ambiguity(&rebuilt) == info, || {
            "zero-weight entries changed I".to_string()
        });
        let is_root = (0..n).all(|i| marg[i] == s.alphabet(i).len());
        if is_root {
            expansibility.check(rebuilt == *s, || "zero-weight entries changed the set".into());
        }
    }

    let mut monotonicity = PropertyCheck::new("monotonicity");
    for drop in 0..s.len() {
        let mut tuples = s.rank_tuples().to_vec();
        tuples.remove(drop);
        let sub = s.with_tuples(tuples);
        monotonicity.check(sub.is_subset_of(s) && information_ambiguity(&sub) <= info, || {
            format!("removing tuple {drop} increased I")
        });
    }
    let width = s.layout().total_width();
    for j in 0..width {
        for b in 0..2u8 {
            let mut a = BitAssignment::new();
            a.set(j, b);
            let sub = condition(s, &a);
            monotonicity.check(sub.is_subset_of(s) && information_ambiguity(&sub) <= info, || {
                format!("conditioning bit {j} = {b} increased I")
            });
        }
    }

    let mut symmetry = PropertyCheck::new("symmetry");
    let orders: Vec<Vec<usize>> = if n <= limits.max_permutation_informants {
        (0..n).permutations(n).collect()
    } else {
        (0..n).map(|r| (0..n).map(|i| (i + r) % n).collect()).collect()
    };
    for order in &orders {
        let p = s.permute(order).unwrap();
        symmetry.check(p.len() == s.len() && information_ambiguity(&p) == info, || {
            format!("permutation {order:?} changed I")
        });
    }

    let mut chain = PropertyCheck::new("chain-rule");
    if n <= limits.max_permutation_informants {
        for order in (0..n).permutations(n) {
            let cost = chain_cost(s, &order).unwrap();
            chain.check(info <= cost, || {
                format!("I = {info} > chain cost {cost} for order {order:?}")
            });
        }
        let bound = chain_bound(s, limits).unwrap();
        chain.check(bound.bits >= info, || {
            format!("chain bound {} < I = {info}", bound.bits)
        });
    }
    for (i, j) in (0..n).tuple_combinations() {
        let pij = project(s, &[i, j]).unwrap();
        let iij = information_ambiguity(&pij);
        for (first, second) in [(i, j), (j, i)] {
            let hat = max_conditional_ambiguity(s, &[second], &[first]).unwrap();
            let bound = info_i[first] + ceil_log2(hat as u64);
            chain.check(iij <= bound, || {
                format!(
                    "I_{{{},{}}} = {iij} > I_{} + I-hat = {bound}",
                    i + 1,
                    j + 1,
                    first + 1
                )
            });
        }
    }

    // Set identity, its inclusion direction, and the two counting consequences.
    let mut intersection = PropertyCheck::new("intersection-identity");
    let mut inclusion = PropertyCheck::new("intersection-inclusion");
    let mut mu_min = PropertyCheck::new("mu-min");
    let mut mu_hat_min = PropertyCheck::new("mu-hat-min");
    for target in 0..n {
        for a in subsets.iter().filter(|a| !a.contains(&target)) {
            let joint_hat = max_conditional_ambiguity(s, &[target], a).unwrap();
            let single_hats: Vec<usize> = a
                .iter()
                .map(|&j| max_conditional_ambiguity(s, &[target], &[j]).unwrap())
                .collect();
            let min_hat = *single_hats.iter().min().unwrap();
            mu_hat_min.check(joint_hat <= min_hat, || {
                format!("mu-hat_{}|{} = {joint_hat} > min {min_hat}", target + 1, show(a))
            });

            let xa_values: BTreeSet<Vec<u32>> = s.rank_tuples().iter().map(|t| pick(t, a)).collect();
            for xa in xa_values {
                let joint = conditional_ranks(s, &[target], a, &xa);
                let singles: Vec<BTreeSet<Vec<u32>>> = a
                    .iter()
                    .zip(&xa)
                    .map(|(&j, &r)| conditional_ranks(s, &[target], &[j], &[r]))
                    .collect();
                let meet = singles.iter().skip(1).fold(singles[0].clone(), |acc, x| {
                    acc.intersection(x).cloned().collect()
                });
                let describe = || {
                    format!(
                        "S_{}|{}({}) has {} values, intersection has {}",
                        target + 1,
                        show(a),
                        s.vector_of_ranks(&expand(n, a, &xa)),
                        joint.len(),
                        meet.len()
                    )
                };
                inclusion.check(joint.is_subset(&meet), describe);
                intersection.check(joint == meet, describe);
                let min_single = singles.iter().map(BTreeSet::len).min().unwrap();
                mu_min.check(joint.len() <= min_single, || {
                    format!(
                        "mu_{}|{} = {} > min {min_single}",
                        target + 1,
                        show(a),
                        joint.len()
                    )
                });
            }
        }
    }

    PropertyReport {
        checks: vec![
            conditioning,
            subadditivity,
            additivity,
            expansibility,
            monotonicity,
            symmetry,
            chain,
            intersection,
            inclusion,
            mu_min,
            mu_hat_min,
        ],
    }
}

/// Places partial ranks back into an `n`-vector (zeros elsewhere) for display.
fn expand(n: usize, idx: &[usize], ranks: &[u32]) -> Vec<u32> {
    let mut v = vec![0; n];
    for (&i, &r) in idx.iter().zip(ranks) {
        v[i] = r;
    }
    v
}

/// Some product-of-alphabets combination that is not in `s`, if one exists.
fn absent_combination(s: &SupportSet) -> Option<DataVector> {
    let n = s.n_informants();
    let total: usize = s.alphabets().iter().map(Vec::len).product();
    if total == s.len() || total > 1 << 16 {
        return None;
    }
    (0..n)
        .map(|i| 0..s.alphabet(i).len() as u32)
        .multi_cartesian_product()
        .find(|t| s.rank_tuples().binary_search(t).is_err())
        .map(|t| s.vector_of_ranks(&t))
}
