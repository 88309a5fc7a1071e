//! Reference support sets used throughout the tests and the acceptance suite.

use crate::support::{build_support_set, DataVector, SupportSet};

/// `(x1, x2)` pairs of the eight-element example: `X1` ranges over 1..=5,
/// `X2` over 1..=4, and `X2 = 1` leaves all five `X1` values possible.
pub const FIXTURE_A: [(&str, &str); 8] = [
    ("1", "1"),
    ("2", "1"),
    ("3", "1"),
    ("4", "1"),
    ("5", "1"),
    ("1", "2"),
    ("2", "3"),
    ("3", "4"),
];

/// `(x1, x2)` pairs of the ten-element example over `{1..5}^2`.
pub const FIXTURE_B: [(&str, &str); 10] = [
    ("1", "1"),
    ("1", "3"),
    ("2", "2"),
    ("2", "4"),
    ("3", "1"),
    ("3", "3"),
    ("3", "5"),
    ("4", "2"),
    ("4", "4"),
    ("5", "3"),
];

fn from_pairs(pairs: &[(&str, &str)]) -> SupportSet {
    build_support_set(
        pairs
            .iter()
            .map(|&(a, b)| (DataVector::new([a, b]), None))
            .collect(),
    )
    .expect("fixture is a valid support set")
}

pub fn fixture_a() -> SupportSet {
    from_pairs(&FIXTURE_A)
}

pub fn fixture_b() -> SupportSet {
    from_pairs(&FIXTURE_B)
}

/// All four pairs over `{0,1}^2`.
pub fn binary_product() -> SupportSet {
    from_pairs(&[("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")])
}

pub fn singleton(n: usize) -> SupportSet {
    build_support_set(vec![(DataVector::new(vec!["a"; n]), None)]).expect("singleton")
}

/// Builds a set from comma-separated rows such as `"0,1,1"`.
pub fn from_rows(rows: &[&str]) -> SupportSet {
    build_support_set(
        rows.iter()
            .map(|r| (DataVector::new(r.split(',')), None))
            .collect(),
    )
    .expect("rows form a valid support set")
}
