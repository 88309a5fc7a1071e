//! Fixed-width binary codec for data vectors, bit facts and bit conditioning.
//!
//! Global bit index 0 is the most significant bit of informant 1's codeword;
//! indices then run through each informant's bits in order. Internally a
//! codeword is a `u64` whose bit `j` holds global bit `j`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::support::{DataVector, SupportSet};

pub const MAX_WIDTH: usize = 64;

/// `ceil(log2 n)` on integers, 0 for `n <= 1`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitLayout {
    widths: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl BitLayout {
    pub fn from_sizes(sizes: impl IntoIterator<Item = u64>) -> Self {
        let widths: Vec<usize> = sizes.into_iter().map(|m| ceil_log2(m) as usize).collect();
        let mut offsets = Vec::with_capacity(widths.len());
        let mut total = 0;
        for w in &widths {
            offsets.push(total);
            total += w;
        }
        BitLayout {
            widths,
            offsets,
            total,
        }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn total_width(&self) -> usize {
        self.total
    }

    pub fn n_informants(&self) -> usize {
        self.widths.len()
    }

    /// Mask with every valid global bit set.
    pub fn full_mask(&self) -> u64 {
        if self.total == 64 {
            u64::MAX
        } else {
            (1u64 << self.total) - 1
        }
    }

    /// Mask of the global bits owned by the informants in `informants`.
    pub fn informant_mask(&self, informants: &[usize]) -> u64 {
        informants.iter().fold(0, |m, &i| {
            (self.offsets[i]..self.offsets[i] + self.widths[i]).fold(m, |m, j| m | 1 << j)
        })
    }

    /// Maps a global bit index to `(informant, local bit)`; local bit 0 is the MSB.
    pub fn locate(&self, global: usize) -> (usize, usize) {
        assert!(
            global < self.total,
            "bit {global} outside layout of width {}",
            self.total
        );
        let i = self.offsets.partition_point(|&o| o <= global) - 1;
        // skip zero-width informants sharing the same offset
        let i = (i..self.widths.len())
            .find(|&i| global < self.offsets[i] + self.widths[i])
            .unwrap();
        (i, global - self.offsets[i])
    }

    pub fn global(&self, informant: usize, local: usize) -> usize {
        assert!(local < self.widths[informant]);
        self.offsets[informant] + local
    }

    pub fn codeword_of_ranks(&self, ranks: &[u32]) -> u64 {
        let mut code = 0u64;
        for (i, &r) in ranks.iter().enumerate() {
            let w = self.widths[i];
            for b in 0..w {
                if (r >> (w - 1 - b)) & 1 == 1 {
                    code |= 1 << (self.offsets[i] + b);
                }
            }
        }
        code
    }

    pub fn ranks_of_codeword(&self, code: u64) -> Vec<u32> {
        (0..self.widths.len())
            .map(|i| {
                let w = self.widths[i];
                (0..w).fold(0u32, |r, b| {
                    (r << 1) | ((code >> (self.offsets[i] + b)) & 1) as u32
                })
            })
            .collect()
    }
}

/// A concatenated codeword of a given width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Codeword {
    pub bits: u64,
    pub width: usize,
}

impl Codeword {
    pub fn bit(&self, j: usize) -> u8 {
        ((self.bits >> j) & 1) as u8
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.width {
            f.write_str(if self.bit(j) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > MAX_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "codeword longer than {MAX_WIDTH} bits"
            )));
        }
        let mut bits = 0u64;
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << j,
                _ => return Err(Error::InvalidArgument(format!("bad bit character {c:?}"))),
            }
        }
        Ok(Codeword { bits, width: s.len() })
    }
}

pub fn encode(s: &SupportSet, x: &DataVector) -> Result<Codeword> {
    let idx = s.require_member(x)?;
    let layout = s.layout();
    Ok(Codeword {
        bits: layout.codeword_of_ranks(&s.rank_tuples()[idx]),
        width: layout.total_width(),
    })
}

/// Inverse of [`encode`]; `None` for strings that are not the codeword of a member.
pub fn decode(s: &SupportSet, code: &Codeword) -> Option<DataVector> {
    let layout = s.layout();
    if code.width != layout.total_width() || code.bits & !layout.full_mask() != 0 {
        return None;
    }
    let ranks = layout.ranks_of_codeword(code.bits);
    s.rank_tuples().binary_search(&ranks).ok().map(|i| s.vector(i))
}

/// Known bit values at the sink: at most one fact per global bit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitAssignment {
    mask: u64,
    values: u64,
}

impl BitAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from `(global bit, value)` facts; rejects out-of-range indices,
    /// non-binary values and contradictory repeats.
    pub fn from_facts(facts: &[(usize, u8)], layout: &BitLayout) -> Result<Self> {
        let mut a = BitAssignment::new();
        for &(j, b) in facts {
            if j >= layout.total_width() {
                return Err(Error::InvalidArgument(format!(
                    "bit index {j} outside layout of width {}",
                    layout.total_width()
                )));
            }
            if b > 1 {
                return Err(Error::InvalidArgument(format!("bit value {b} is not 0 or 1")));
            }
            if let Some(prev) = a.get(j) {
                if prev != b {
                    return Err(Error::InvalidArgument(format!("conflicting facts for bit {j}")));
                }
            }
            a.set(j, b);
        }
        Ok(a)
    }

    pub(crate) fn from_raw(mask: u64, values: u64) -> Self {
        BitAssignment {
            mask,
            values: values & mask,
        }
    }

    pub fn set(&mut self, j: usize, b: u8) {
        self.mask |= 1 << j;
        if b == 1 {
            self.values |= 1 << j;
        } else {
            self.values &= !(1 << j);
        }
    }

    pub fn get(&self, j: usize) -> Option<u8> {
        (self.mask >> j & 1 == 1).then(|| ((self.values >> j) & 1) as u8)
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn values(&self) -> u64 {
        self.values
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn facts(&self) -> BTreeMap<usize, u8> {
        (0..64).filter_map(|j| self.get(j).map(|b| (j, b))).collect()
    }

    pub fn matches(&self, code: u64) -> bool {
        code & self.mask == self.values
    }
}

/// Tuples of `s` whose codewords agree with every fact of `a`. The result
/// shares `s`'s alphabets (and hence its codec) and may be empty.
pub fn condition(s: &SupportSet, a: &BitAssignment) -> SupportSet {
    let layout = s.layout();
    let tuples = s
        .rank_tuples()
        .iter()
        .filter(|t| a.matches(layout.codeword_of_ranks(t)))
        .cloned()
        .collect();
    s.with_tuples(tuples)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinedBits {
    /// Bits on which every tuple agrees, with their forced values.
    pub defined: BitAssignment,
    pub undefined: Vec<usize>,
}

/// Splits the layout into bits forced by `s` and bits that still vary.
/// An empty set defines nothing.
pub fn defined_bits(s: &SupportSet) -> DefinedBits {
    let layout = s.layout();
    let codes: Vec<u64> = s
        .rank_tuples()
        .iter()
        .map(|t| layout.codeword_of_ranks(t))
        .collect();
    let (mask, values) = if codes.is_empty() {
        (0, 0)
    } else {
        closure(&codes, layout.full_mask())
    };
    DefinedBits {
        defined: BitAssignment::from_raw(mask, values),
        undefined: (0..layout.total_width()).filter(|j| mask >> j & 1 == 0).collect(),
    }
}

/// `(defined mask, forced values)` of a nonempty codeword set.
///
/// For any set reached by conditioning a codebook on bit facts, this pair
/// determines the set uniquely, so it doubles as a memo key.
pub(crate) fn closure(codes: &[u64], full: u64) -> (u64, u64) {
    let (and, or) = codes.iter().fold((u64::MAX, 0u64), |(a, o), &c| (a & c, o | c));
    let mask = !(and ^ or) & full;
    (mask, and & mask)
}

/// Codewords of every tuple of a support set, in tuple order.
#[derive(Clone, Debug)]
pub struct Codebook {
    pub layout: BitLayout,
    pub codes: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl Codebook {
    pub fn new(s: &SupportSet) -> Self {
        let layout = s.layout();
        let codes = s
            .rank_tuples()
            .iter()
            .map(|t| layout.codeword_of_ranks(t))
            .collect();
        let codes: Vec<u64> = codes;
        let index = codes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Codebook { layout, codes, index }
    }

    pub fn full_mask(&self) -> u64 {
        self.layout.full_mask()
    }

    /// Position of a codeword in tuple order.
    pub fn index_of(&self, code: u64) -> Option<usize> {
        self.index.get(&code).copied()
    }
}
