//! Seeded random support sets for test batteries.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::support::{build_support_set, DataVector, SupportSet};

#[derive(Clone, Debug)]
pub struct RandomShape {
    /// Candidate informant counts, drawn uniformly.
    pub informants: Vec<usize>,
    /// Each alphabet size is drawn from `1..=max_alphabet`.
    pub max_alphabet: usize,
    /// `mu` is drawn from `1..=min(max_tuples, product of alphabet sizes)`.
    pub max_tuples: usize,
}

pub fn random_support_set<R: Rng>(rng: &mut R, shape: &RandomShape) -> SupportSet {
    let n = shape.informants[rng.gen_range(0..shape.informants.len())];
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=shape.max_alphabet)).collect();
    let total: usize = sizes.iter().product();
    let mu = rng.gen_range(1..=shape.max_tuples.min(total));
    let entries = index::sample(rng, total, mu)
        .into_iter()
        .map(|mut flat| {
            let values: Vec<String> = sizes
                .iter()
                .rev()
                .map(|&a| {
                    let v = flat % a;
                    flat /= a;
                    v.to_string()
                })
                .collect::<Vec<_>>()
                .into_iter()
                .rev()
                .collect();
            (DataVector::new(values), None)
        })
        .collect();
    build_support_set(entries).expect("sampled tuples form a valid set")
}

/// `count` sets drawn from one seeded stream.
pub fn battery(seed: u64, count: usize, shape: &RandomShape) -> Vec<SupportSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_support_set(&mut rng, shape)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_reproducible_and_in_shape() {
        let shape = RandomShape {
            informants: vec![2, 3],
            max_alphabet: 4,
            max_tuples: 20,
        };
        let a = battery(11, 50, &shape);
        assert_eq!(a, battery(11, 50, &shape));
        for s in &a {
            assert!((2..=3).contains(&s.n_informants()));
            assert!((1..=20).contains(&s.len()));
            assert!(s.alphabets().iter().all(|al| al.len() <= 4));
        }
    }
}
