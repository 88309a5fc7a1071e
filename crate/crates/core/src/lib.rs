//! Worst-case asymmetric distributed source coding.
//!
//! A sink knows the joint support of `N` informants' values and gathers one
//! data vector by querying individual bits of the informants' fixed-width
//! codewords. This crate provides:
//!
//! * [`support`] and [`bits`]: support sets, projections, k-extensions and the
//!   concatenated binary codec with bit conditioning;
//! * [`ambiguity`]: the information-ambiguity measure, its conditional forms
//!   and an exhaustive checker for its axioms;
//! * [`protocol`]: Bit-Serial, Round-Parallel and k-extended Bit-Serial
//!   gathering protocols with exact bit accounting;
//! * [`compress`]: exact worst-case bit-compressibility, per-informant minimum
//!   bits, rate regions and block-coding comparisons;
//! * [`oracle`]: brute-force certificates and unmemoized tree search used to
//!   cross-check the solvers on small instances;
//! * [`io`]: the support-set text format and report writers.

pub mod ambiguity;
pub mod bits;
pub mod compress;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod oracle;
pub mod protocol;
pub mod random;
pub mod rational;
pub mod support;

pub use bits::{condition, decode, defined_bits, encode, BitAssignment, BitLayout, Codeword};
pub use error::{Error, Result};
pub use support::{build_support_set, k_extension, project, DataVector, Label, SupportSet};

/// Resource caps shared by the solvers. Exceeding one is always an error,
/// never a silent truncation.
#[derive(Clone, Debug)]
pub struct Limits {
    /// Largest support (and k-extension) size accepted.
    pub max_tuples: usize,
    /// Largest `N` for which permutation chains are enumerated.
    pub max_permutation_informants: usize,
    /// Largest number of memoized states a compressibility solve may create.
    pub max_dp_states: usize,
    /// Largest codeword width for certificate enumeration.
    pub certificate_max_width: usize,
    /// Work budget (`|S| * 2^W`) for certificate enumeration.
    pub certificate_budget: u64,
    /// Hard caps for the unmemoized tree search.
    pub tree_search_max_tuples: usize,
    pub tree_search_max_width: usize,
    /// Subset-quantified lemmas use every subset up to this many informants,
    /// and only singletons and pairs above it.
    pub all_subsets_max_informants: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tuples: 1 << 16,
            max_permutation_informants: 8,
            max_dp_states: 4_000_000,
            certificate_max_width: 20,
            certificate_budget: 1 << 28,
            tree_search_max_tuples: 12,
            tree_search_max_width: 8,
            all_subsets_max_informants: 4,
        }
    }
}
