//! Exact worst-case bit-compressibility and rate regions.
//!
//! Every solver here works on codeword sets reachable by bit conditioning.
//! Such a set is identified by its closure (defined mask and forced values),
//! which is what the memo tables are keyed by.

use std::collections::HashMap;

use itertools::Itertools;

use crate::bits::{ceil_log2, closure, Codebook};
use crate::error::{Error, Result};
use crate::oracle;
use crate::protocol::{greedy_worst_case, TieRule};
use crate::rational::{asymptotic_bound, block_bound, Rational};
use crate::support::{k_extension, DataVector, SupportSet};
use crate::Limits;

/// Largest `N` for which every informant subset gets its own region bound.
pub const MAX_REGION_INFORMANTS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leaf(DataVector),
    Query {
        bit: usize,
        informant: usize,
        local_bit: usize,
        zero: Box<Strategy>,
        one: Box<Strategy>,
    },
}

impl Strategy {
    pub fn depth(&self) -> u32 {
        match self {
            Strategy::Leaf(_) => 0,
            Strategy::Query { zero, one, .. } => 1 + zero.depth().max(one.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Strategy::Leaf(_) => 1,
            Strategy::Query { zero, one, .. } => zero.leaves() + one.leaves(),
        }
    }

    /// Indented rendering, one node per line.
    pub fn render(&self) -> String {
        fn walk(node: &Strategy, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match node {
                Strategy::Leaf(x) => out.push_str(&format!("{pad}leaf {x}\n")),
                Strategy::Query {
                    informant,
                    local_bit,
                    zero,
                    one,
                    ..
                } => {
                    out.push_str(&format!("{pad}query {}.{}\n", informant + 1, local_bit + 1));
                    walk(zero, depth + 1, out);
                    walk(one, depth + 1, out);
                }
            }
        }
        let mut out = String::new();
        walk(self, 0, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressibilityResult {
    pub c_b: u32,
    /// Adversarial Bit-Serial total under the lowest-index tie rule.
    pub greedy_bits: u32,
    /// `None` when the codeword is too wide for certificate enumeration.
    pub certificate_bound: Option<u32>,
    pub information_ambiguity: u32,
    pub width: u32,
    pub strategy: Strategy,
}

fn split_codes(codes: &[u64], j: usize) -> (Vec<u64>, Vec<u64>) {
    let (one, zero): (Vec<u64>, Vec<u64>) = codes.iter().partition(|&&c| c >> j & 1 == 1);
    (zero, one)
}

fn undefined_bits(codes: &[u64], full: u64, width: usize) -> impl Iterator<Item = usize> {
    let (mask, _) = closure(codes, full);
    (0..width).filter(move |j| mask >> j & 1 == 0)
}

/// Memoized minimax over query strategies.
struct Minimax {
    full: u64,
    width: usize,
    max_states: usize,
    memo: HashMap<(u64, u64), u32>,
}

impl Minimax {
    fn new(book: &Codebook, limits: &Limits) -> Self {
        Minimax {
            full: book.full_mask(),
            width: book.layout.total_width(),
            max_states: limits.max_dp_states,
            memo: HashMap::new(),
        }
    }

    fn value(&mut self, codes: &[u64]) -> Result<u32> {
        if codes.len() <= 1 {
            return Ok(0);
        }
        let key = closure(codes, self.full);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let lower = ceil_log2(codes.len() as u64);
        let mut best = u32::MAX;
        for j in undefined_bits(codes, self.full, self.width).collect::<Vec<_>>() {
            let (zero, one) = split_codes(codes, j);
            let (big, small) = if zero.len() >= one.len() {
                (zero, one)
            } else {
                (one, zero)
            };
            if 1 + ceil_log2(big.len() as u64) >= best {
                continue;
            }
            let vb = self.value(&big)?;
            if 1 + vb >= best {
                continue;
            }
            let vs = self.value(&small)?;
            best = best.min(1 + vb.max(vs));
            if best == lower {
                break;
            }
        }
        if self.memo.len() >= self.max_states {
            return Err(Error::Resource(format!(
                "compressibility search exceeded {} states",
                self.max_states
            )));
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    fn strategy(&mut self, s: &SupportSet, book: &Codebook, codes: &[u64]) -> Result<Strategy> {
        if codes.len() == 1 {
            let i = book.index_of(codes[0]).expect("codeword of the set");
            return Ok(Strategy::Leaf(s.vector(i)));
        }
        let target = self.value(codes)?;
        for j in undefined_bits(codes, self.full, self.width).collect::<Vec<_>>() {
            let (zero, one) = split_codes(codes, j);
            if 1 + self.value(&zero)?.max(self.value(&one)?) == target {
                let (informant, local_bit) = book.layout.locate(j);
                return Ok(Strategy::Query {
                    bit: j,
                    informant,
                    local_bit,
                    zero: Box::new(self.strategy(s, book, &zero)?),
                    one: Box::new(self.strategy(s, book, &one)?),
                });
            }
        }
        unreachable!("an optimal query exists at every non-singleton state")
    }
}

fn check_size(s: &SupportSet, limits: &Limits) -> Result<()> {
    if s.len() > limits.max_tuples {
        return Err(Error::Resource(format!(
            "{} tuples exceed the cap of {}",
            s.len(),
            limits.max_tuples
        )));
    }
    Ok(())
}

/// Optimal worst-case number of transmitted bits and an optimal strategy.
pub fn optimal_strategy(s: &SupportSet, limits: &Limits) -> Result<(u32, Strategy)> {
    check_size(s, limits)?;
    let book = Codebook::new(s);
    let mut dp = Minimax::new(&book, limits);
    let c_b = dp.value(&book.codes)?;
    let strategy = dp.strategy(s, &book, &book.codes)?;
    Ok((c_b, strategy))
}

pub fn solve_c_b(s: &SupportSet, limits: &Limits) -> Result<CompressibilityResult> {
    let (c_b, strategy) = optimal_strategy(s, limits)?;
    let certificate_bound = match oracle::certificate_c_b(s, limits) {
        Ok(v) => Some(v),
        Err(Error::Resource(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(CompressibilityResult {
        c_b,
        greedy_bits: greedy_worst_case(s, TieRule::LowestIndex) as u32,
        certificate_bound,
        information_ambiguity: ceil_log2(s.len() as u64),
        width: s.layout().total_width() as u32,
        strategy,
    })
}

/// Minimax over strategies with worst total at most `cap`, tracking the
/// nondominated pairs (worst total, worst bits from the bits in `tracked`).
struct Frontier {
    full: u64,
    width: usize,
    tracked: u64,
    cap: u32,
    max_states: usize,
    memo: HashMap<(u64, u64), Vec<(u32, u32)>>,
}

impl Frontier {
    fn frontier(&mut self, codes: &[u64]) -> Result<Vec<(u32, u32)>> {
        if codes.len() <= 1 {
            return Ok(vec![(0, 0)]);
        }
        let key = closure(codes, self.full);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        if ceil_log2(codes.len() as u64) <= self.cap {
            for j in undefined_bits(codes, self.full, self.width).collect::<Vec<_>>() {
                let (zero, one) = split_codes(codes, j);
                let f0 = self.frontier(&zero)?;
                if f0.is_empty() {
                    continue;
                }
                let f1 = self.frontier(&one)?;
                let hit = (self.tracked >> j & 1) as u32;
                for &(t0, a0) in &f0 {
                    for &(t1, a1) in &f1 {
                        let t = 1 + t0.max(t1);
                        if t <= self.cap {
                            out.push((t, a0.max(a1) + hit));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        let mut kept: Vec<(u32, u32)> = Vec::new();
        for p in out {
            if kept.last().is_none_or(|k| p.1 < k.1) {
                kept.push(p);
            }
        }
        if self.memo.len() >= self.max_states {
            return Err(Error::Resource(format!(
                "frontier search exceeded {} states",
                self.max_states
            )));
        }
        self.memo.insert(key, kept.clone());
        Ok(kept)
    }
}

/// Fewest worst-case bits any optimal strategy takes from the informants in
/// `subset`, given the optimum `c_b`.
fn subset_min_bits(book: &Codebook, subset: &[usize], c_b: u32, limits: &Limits) -> Result<u32> {
    let mut f = Frontier {
        full: book.full_mask(),
        width: book.layout.total_width(),
        tracked: book.layout.informant_mask(subset),
        cap: c_b,
        max_states: limits.max_dp_states,
        memo: HashMap::new(),
    };
    let root = f.frontier(&book.codes)?;
    Ok(root
        .iter()
        .filter(|p| p.0 == c_b)
        .map(|p| p.1)
        .min()
        .expect("an optimal strategy exists"))
}

/// `b_i` for every informant.
pub fn per_informant_min_bits(s: &SupportSet, limits: &Limits) -> Result<Vec<u32>> {
    check_size(s, limits)?;
    let book = Codebook::new(s);
    let c_b = Minimax::new(&book, limits).value(&book.codes)?;
    (0..s.n_informants())
        .map(|i| subset_min_bits(&book, &[i], c_b, limits))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetBound {
    /// 0-based informants, ascending.
    pub informants: Vec<usize>,
    pub min_bits: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateRegion {
    pub n_informants: usize,
    /// Every nonempty subset, ascending by size then lexicographically.
    pub subset_bounds: Vec<SubsetBound>,
    pub c_b: Rational,
    /// For two informants, `(b_1, c_b - b_1)` and `(c_b - b_2, b_2)`.
    pub corners: Vec<(Rational, Rational)>,
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=n).flat_map(move |k| (0..n).combinations(k))
}

fn corners(n: usize, bounds: &[SubsetBound], c_b: Rational) -> Vec<(Rational, Rational)> {
    if n != 2 {
        return Vec::new();
    }
    let (b1, b2) = (bounds[0].min_bits, bounds[1].min_bits);
    vec![(b1, c_b - b1), (c_b - b2, b2)]
}

impl RateRegion {
    fn assemble(n: usize, subset_bounds: Vec<SubsetBound>) -> Self {
        let c_b = subset_bounds.last().expect("nonempty").min_bits;
        RateRegion {
            n_informants: n,
            corners: corners(n, &subset_bounds, c_b),
            subset_bounds,
            c_b,
        }
    }

    pub fn bound(&self, informants: &[usize]) -> Option<Rational> {
        self.subset_bounds
            .iter()
            .find(|b| b.informants == informants)
            .map(|b| b.min_bits)
    }

    /// `b_i` in informant order.
    pub fn singles(&self) -> Vec<Rational> {
        self.subset_bounds[..self.n_informants]
            .iter()
            .map(|b| b.min_bits)
            .collect()
    }

    /// Same bounds divided by `k`, used for regions of a `k`-extension.
    pub fn scaled(&self, k: usize) -> RateRegion {
        let f = Rational::new(1, k as i64);
        RateRegion::assemble(
            self.n_informants,
            self.subset_bounds
                .iter()
                .map(|b| SubsetBound {
                    informants: b.informants.clone(),
                    min_bits: b.min_bits * f,
                })
                .collect(),
        )
    }
}

/// `M_{R(S)}` for every nonempty informant subset `S`.
pub fn rate_region(s: &SupportSet, limits: &Limits) -> Result<RateRegion> {
    check_size(s, limits)?;
    let n = s.n_informants();
    if n > MAX_REGION_INFORMANTS {
        return Err(Error::Resource(format!(
            "{n} informants exceed the region cap of {MAX_REGION_INFORMANTS}"
        )));
    }
    let book = Codebook::new(s);
    let c_b = Minimax::new(&book, limits).value(&book.codes)?;
    let bounds = subsets(n)
        .map(|informants| {
            let v = if informants.len() == n {
                c_b
            } else {
                subset_min_bits(&book, &informants, c_b, limits)?
            };
            Ok(SubsetBound {
                informants,
                min_bits: Rational::from_integer(v as i64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateRegion::assemble(n, bounds))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockResult {
    pub k: usize,
    pub result: CompressibilityResult,
    pub per_block: Rational,
    /// `c_b - c_b^k / k` against the one-shot optimum.
    pub gap: Rational,
}

/// Compressibility of the `k`-extension, compared per block with one-shot coding.
pub fn k_block_solve(s: &SupportSet, k: usize, limits: &Limits) -> Result<BlockResult> {
    let one_shot = optimal_strategy(s, limits)?.0;
    let ext = k_extension(s, k, limits)?;
    let result = solve_c_b(&ext, limits)?;
    let per_block = Rational::new(result.c_b as i64, k as i64);
    Ok(BlockResult {
        k,
        gap: Rational::from_integer(one_shot as i64) - per_block,
        per_block,
        result,
    })
}

/// Closed-form block-length-`k` bound applied to each one-shot subset bound.
pub fn k_block_rate_region(base: &RateRegion, k: usize) -> Result<RateRegion> {
    if k == 0 {
        return Err(Error::InvalidArgument("block length must be positive".into()));
    }
    let bounds = base
        .subset_bounds
        .iter()
        .map(|b| {
            if !b.min_bits.is_integer() {
                return Err(Error::InvalidArgument(
                    "base region bounds must be integral".into(),
                ));
            }
            Ok(SubsetBound {
                informants: b.informants.clone(),
                min_bits: block_bound(b.min_bits.to_integer() as u32, k as u32),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateRegion::assemble(base.n_informants, bounds))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticRegion {
    pub n_informants: usize,
    pub subset_bounds: Vec<(Vec<usize>, f64)>,
    pub c_b: f64,
    pub corners: Vec<(f64, f64)>,
}

/// Limit of [`k_block_rate_region`] as the block length grows.
pub fn asymptotic_rate_region(base: &RateRegion) -> Result<AsymptoticRegion> {
    let subset_bounds = base
        .subset_bounds
        .iter()
        .map(|b| {
            if !b.min_bits.is_integer() {
                return Err(Error::InvalidArgument(
                    "base region bounds must be integral".into(),
                ));
            }
            Ok((
                b.informants.clone(),
                asymptotic_bound(b.min_bits.to_integer() as u32),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let c_b = subset_bounds.last().expect("nonempty").1;
    let corners = if base.n_informants == 2 {
        let (b1, b2) = (subset_bounds[0].1, subset_bounds[1].1);
        vec![(b1, c_b - b1), (c_b - b2, b2)]
    } else {
        Vec::new()
    };
    Ok(AsymptoticRegion {
        n_informants: base.n_informants,
        subset_bounds,
        c_b,
        corners,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRow {
    pub k: usize,
    pub c_b_k: u32,
    pub per_block: Rational,
    pub gap: Rational,
    /// Region of the `k`-extension, scaled to bits per block.
    pub region: RateRegion,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockGainReport {
    pub rows: Vec<BlockRow>,
    pub asymptotic: AsymptoticRegion,
    /// Why the table stops before the requested block length, if it does.
    pub truncated: Option<String>,
    /// `c_b - c_b^k / k <= 1` on every computed row.
    pub gap_within_one_bit: bool,
}

/// Block-length sweep `k = 1..=k_max` plus the asymptotic row.
pub fn block_gain_report(s: &SupportSet, k_max: usize, limits: &Limits) -> Result<BlockGainReport> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("block length must be positive".into()));
    }
    let base = rate_region(s, limits)?;
    let c_b = base.c_b;
    let mut rows = Vec::new();
    let mut truncated = None;
    for k in 1..=k_max {
        let attempt = k_extension(s, k, limits).and_then(|ext| {
            let region = rate_region(&ext, limits)?;
            Ok((region.c_b.to_integer() as u32, region.scaled(k)))
        });
        match attempt {
            Ok((c_b_k, region)) => {
                let per_block = Rational::new(c_b_k as i64, k as i64);
                rows.push(BlockRow {
                    k,
                    c_b_k,
                    per_block,
                    gap: c_b - per_block,
                    region,
                });
            }
            Err(Error::Resource(msg)) => {
                truncated = Some(format!("stopped at k = {k}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let one = Rational::from_integer(1);
    Ok(BlockGainReport {
        gap_within_one_bit: rows.iter().all(|r| r.gap <= one),
        asymptotic: asymptotic_rate_region(&base)?,
        rows,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn trivial_values() {
        let lim = Limits::default();
        let s = solve_c_b(&fixtures::singleton(2), &lim).unwrap();
        assert_eq!((s.c_b, s.greedy_bits, s.certificate_bound), (0, 0, Some(0)));
        let p = solve_c_b(&fixtures::binary_product(), &lim).unwrap();
        assert_eq!(p.c_b, 2);
        assert_eq!(
            per_informant_min_bits(&fixtures::binary_product(), &lim).unwrap(),
            vec![1, 1]
        );
        assert_eq!(
            per_informant_min_bits(&fixtures::singleton(3), &lim).unwrap(),
            vec![0, 0, 0]
        );
    }

    #[test]
    fn strategy_matches_value() {
        let lim = Limits::default();
        for s in [fixtures::fixture_a(), fixtures::fixture_b()] {
            let res = solve_c_b(&s, &lim).unwrap();
            assert_eq!(res.strategy.depth(), res.c_b);
            assert_eq!(res.strategy.leaves(), s.len());
            assert!(res.information_ambiguity <= res.c_b && res.c_b <= res.greedy_bits);
        }
    }

    #[test]
    fn product_region_is_a_point() {
        let reg = rate_region(&fixtures::binary_product(), &Limits::default()).unwrap();
        assert_eq!(reg.singles(), vec![r(1), r(1)]);
        assert_eq!(reg.c_b, r(2));
        assert_eq!(reg.corners, vec![(r(1), r(1)), (r(1), r(1))]);
    }

    #[test]
    fn region_top_is_c_b() {
        let lim = Limits::default();
        let s = fixtures::fixture_a();
        let reg = rate_region(&s, &lim).unwrap();
        assert_eq!(
            reg.bound(&[0, 1]),
            Some(r(solve_c_b(&s, &lim).unwrap().c_b as i64))
        );
    }

    #[test]
    fn block_region_identity_and_formula() {
        let reg = rate_region(&fixtures::fixture_b(), &Limits::default()).unwrap();
        assert_eq!(k_block_rate_region(&reg, 1).unwrap(), reg);
        let base = RateRegion::assemble(
            2,
            vec![
                SubsetBound {
                    informants: vec![0],
                    min_bits: r(1),
                },
                SubsetBound {
                    informants: vec![1],
                    min_bits: r(3),
                },
                SubsetBound {
                    informants: vec![0, 1],
                    min_bits: r(4),
                },
            ],
        );
        let k2 = k_block_rate_region(&base, 2).unwrap();
        assert_eq!(k2.singles(), vec![r(1), Rational::new(5, 2)]);
    }

    #[test]
    fn one_shot_block_is_identity() {
        let lim = Limits::default();
        let s = fixtures::fixture_b();
        let b = k_block_solve(&s, 1, &lim).unwrap();
        assert_eq!(b.result, solve_c_b(&s, &lim).unwrap());
        assert_eq!(b.gap, r(0));
    }

    #[test]
    fn incompressible_product_blocks() {
        let rep = block_gain_report(&fixtures::binary_product(), 2, &Limits::default()).unwrap();
        assert!(rep.rows.iter().all(|row| row.per_block == r(2)));
        let rep = block_gain_report(&fixtures::singleton(2), 2, &Limits::default()).unwrap();
        assert!(rep.rows.iter().all(|row| row.c_b_k == 0));
        assert_eq!(rep.asymptotic.c_b, 0.0);
    }

    #[test]
    fn state_cap_is_an_error() {
        let lim = Limits {
            max_dp_states: 2,
            ..Limits::default()
        };
        assert!(matches!(
            solve_c_b(&fixtures::fixture_b(), &lim),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn greedy_can_exceed_the_optimum() {
        let s = fixtures::from_rows(&["0,0,1", "1,0,2", "2,0,0", "2,0,1", "2,0,2", "3,0,0"]);
        let r = solve_c_b(&s, &Limits::default()).unwrap();
        assert_eq!((r.c_b, r.greedy_bits), (3, 4));
    }

    #[test]
    fn two_blocks_can_cost_more_per_block() {
        let s = fixtures::from_rows(&["0,0", "1,0", "1,3", "2,0"]);
        let lim = Limits::default();
        assert_eq!(solve_c_b(&s, &lim).unwrap().c_b, 2);
        let b = k_block_solve(&s, 2, &lim).unwrap();
        assert_eq!(b.result.c_b, 5);
        assert_eq!(b.per_block, Rational::new(5, 2));
        assert_eq!(b.gap, Rational::new(-1, 2));
    }

    #[test]
    fn singles_need_not_fit_under_the_joint_bound() {
        let s = fixtures::from_rows(&["0,0", "0,1", "0,3", "2,3"]);
        let reg = rate_region(&s, &Limits::default()).unwrap();
        assert_eq!(reg.singles(), vec![r(1), r(2)]);
        assert_eq!(reg.c_b, r(2));
        assert_eq!(reg.corners, vec![(r(1), r(1)), (r(0), r(2))]);
    }
}
