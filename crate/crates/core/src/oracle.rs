//! Brute-force ground truth for small instances: minimum certificates and
//! an unmemoized search over every adaptive query strategy.

use itertools::Itertools;

use crate::bits::{closure, Codebook};
use crate::error::{Error, Result};
use crate::support::{DataVector, SupportSet};
use crate::Limits;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub x: DataVector,
    /// Global bit indices, ascending.
    pub bits: Vec<usize>,
    pub size: usize,
}

fn check_certificate_caps(s: &SupportSet, limits: &Limits) -> Result<usize> {
    let w = s.layout().total_width();
    if w > limits.certificate_max_width {
        return Err(Error::Resource(format!(
            "width {w} exceeds the certificate cap of {}",
            limits.certificate_max_width
        )));
    }
    Ok(w)
}

/// Smallest set of bit positions whose values in `x`'s codeword single out
/// `x`; among equal sizes, the first in lexicographic order.
pub fn min_certificate(s: &SupportSet, x: &DataVector, limits: &Limits) -> Result<Certificate> {
    let w = check_certificate_caps(s, limits)?;
    let index = s.require_member(x)?;
    let book = Codebook::new(s);
    let own = book.codes[index];
    let diffs: Vec<u64> = book
        .codes
        .iter()
        .filter(|&&c| c != own)
        .map(|&c| c ^ own)
        .collect();
    let mut work = 0u64;
    for size in 0..=w {
        for subset in (0..w).combinations(size) {
            work += diffs.len() as u64 + 1;
            if work > limits.certificate_budget {
                return Err(Error::Resource("certificate enumeration budget exhausted".into()));
            }
            let mask = subset.iter().fold(0u64, |m, &j| m | 1 << j);
            if diffs.iter().all(|d| d & mask != 0) {
                return Ok(Certificate {
                    x: x.clone(),
                    size,
                    bits: subset,
                });
            }
        }
    }
    unreachable!("the full codeword always singles out x")
}

/// Worst case over the set of the minimum certificate size.
pub fn certificate_c_b(s: &SupportSet, limits: &Limits) -> Result<u32> {
    let mut worst = 0;
    for x in s.vectors() {
        worst = worst.max(min_certificate(s, &x, limits)?.size as u32);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSearchResult {
    pub optimum: u32,
    /// For every nonempty informant subset (ascending by size, then
    /// lexicographically), the fewest worst-case bits taken from it by any
    /// optimal strategy.
    pub subset_min_bits: Vec<(Vec<usize>, u32)>,
    /// Number of distinct optimal strategies (saturating).
    pub optimal_strategies: u128,
}

impl TreeSearchResult {
    pub fn min_bits(&self, subset: &[usize]) -> Option<u32> {
        self.subset_min_bits
            .iter()
            .find(|(s, _)| s == subset)
            .map(|e| e.1)
    }
}

struct Search<'a> {
    book: &'a Codebook,
    /// Informant of each global bit.
    owner: Vec<usize>,
    n_subsets: usize,
}

fn pareto(mut profiles: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    profiles.sort();
    profiles.dedup();
    let dominated = |a: &Vec<u32>, b: &Vec<u32>| a != b && a.iter().zip(b).all(|(x, y)| y <= x);
    let keep: Vec<bool> = profiles
        .iter()
        .map(|p| !profiles.iter().any(|q| dominated(p, q)))
        .collect();
    profiles
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

impl Search<'_> {
    fn undefined(&self, codes: &[u64]) -> Vec<usize> {
        let (mask, _) = closure(codes, self.book.full_mask());
        (0..self.book.layout.total_width())
            .filter(|j| mask >> j & 1 == 0)
            .collect()
    }

    /// Nondominated worst-case bit profiles, one entry per subset mask `1..2^N`.
    fn profiles(&self, codes: &[u64]) -> Vec<Vec<u32>> {
        if codes.len() <= 1 {
            return vec![vec![0; self.n_subsets]];
        }
        let mut out = Vec::new();
        for j in self.undefined(codes) {
            let (one, zero): (Vec<u64>, Vec<u64>) = codes.iter().partition(|&&c| c >> j & 1 == 1);
            let p0 = self.profiles(&zero);
            let p1 = self.profiles(&one);
            let owner = self.owner[j];
            for a in &p0 {
                for b in &p1 {
                    out.push(
                        (0..self.n_subsets)
                            .map(|t| {
                                let hit = u32::from((t + 1) >> owner & 1 == 1);
                                a[t].max(b[t]) + hit
                            })
                            .collect(),
                    );
                }
            }
        }
        pareto(out)
    }

    /// Strategies whose worst case is at most `budget` bits.
    fn count(&self, codes: &[u64], budget: u32) -> u128 {
        if codes.len() <= 1 {
            return 1;
        }
        if budget == 0 {
            return 0;
        }
        self.undefined(codes)
            .into_iter()
            .map(|j| {
                let (one, zero): (Vec<u64>, Vec<u64>) = codes.iter().partition(|&&c| c >> j & 1 == 1);
                self.count(&zero, budget - 1)
                    .saturating_mul(self.count(&one, budget - 1))
            })
            .fold(0u128, u128::saturating_add)
    }
}

/// Exact optimum and per-subset minima over every adaptive strategy, with
/// no memoization.
pub fn exhaustive_tree_search(s: &SupportSet, limits: &Limits) -> Result<TreeSearchResult> {
    let w = s.layout().total_width();
    if s.len() > limits.tree_search_max_tuples || w > limits.tree_search_max_width {
        return Err(Error::Resource(format!(
            "tree search needs mu <= {} and W <= {} (got {} and {w})",
            limits.tree_search_max_tuples,
            limits.tree_search_max_width,
            s.len()
        )));
    }
    let book = Codebook::new(s);
    let n = s.n_informants();
    let search = Search {
        owner: (0..w).map(|j| book.layout.locate(j).0).collect(),
        book: &book,
        n_subsets: (1usize << n) - 1,
    };
    let profiles = search.profiles(&book.codes);
    let full = search.n_subsets - 1;
    let optimum = profiles.iter().map(|p| p[full]).min().expect("nonempty");
    let optimal: Vec<&Vec<u32>> = profiles.iter().filter(|p| p[full] == optimum).collect();
    let subset_min_bits = (1..=n)
        .flat_map(|k| (0..n).combinations(k))
        .map(|subset| {
            let mask = subset.iter().fold(0usize, |m, &i| m | 1 << i);
            let best = optimal.iter().map(|p| p[mask - 1]).min().unwrap();
            (subset, best)
        })
        .collect();
    Ok(TreeSearchResult {
        optimum,
        subset_min_bits,
        optimal_strategies: search.count(&book.codes, optimum),
    })
}
