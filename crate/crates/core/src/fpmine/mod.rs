//! Mining of frequent facility/location patterns from elite permutations.

mod encoding;
mod fpmax;
mod fptree;
mod mfitree;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use encoding::{
    parse_transactions, permutation_to_transaction, write_transactions, Item, ItemEncoding, Transaction,
};
pub use fpmax::{fpmax, maximal_itemsets, maximal_itemsets_with};
pub use fptree::{build_fp_tree, build_fp_tree_with, FpTree};
pub use mfitree::MfiTree;

use crate::error::{Error, Result};
use crate::qap::Assignment;

/// A partial assignment shared by at least `support` elite solutions.
/// Pairs are 0-indexed `(facility, location)`, sorted by facility.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pairs: Vec<(usize, usize)>,
    support: u32,
}

impl Pattern {
    pub fn new(mut pairs: Vec<(usize, usize)>, support: u32) -> Self {
        pairs.sort_unstable();
        Self { pairs, support }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn support(&self) -> u32 {
        self.support
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Ordering used for "larger is better": more pairs, then higher support,
    /// then lexicographically smaller pair list. `Less` means `self` ranks first.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .pairs
            .len()
            .cmp(&self.pairs.len())
            .then(other.support.cmp(&self.support))
            .then_with(|| self.pairs.cmp(&other.pairs))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MineOptions {
    /// Use pair-support arrays instead of walking conditional pattern bases.
    pub use_array: bool,
}

impl Default for MineOptions {
    fn default() -> Self {
        Self { use_array: true }
    }
}

pub fn elite_transactions(elite: &[Assignment]) -> Vec<Transaction> {
    let Some(first) = elite.first() else {
        return Vec::new();
    };
    let enc = ItemEncoding::new(first.n());
    elite
        .iter()
        .map(|a| permutation_to_transaction(a.pi(), enc))
        .collect()
}

/// The `m` largest maximal frequent patterns of the elite set at support `theta`.
///
/// When no single pair reaches `theta`, the only maximal frequent itemset is
/// the empty one and a single empty pattern is returned.
pub fn mine_patterns(elite: &[Assignment], theta: u32, m: usize) -> Result<Vec<Pattern>> {
    mine_patterns_with(elite, theta, m, MineOptions::default())
}

pub fn mine_patterns_with(elite: &[Assignment], theta: u32, m: usize, opts: MineOptions) -> Result<Vec<Pattern>> {
    if theta < 1 {
        return Err(Error::InvalidParameter("minimum support must be >= 1".into()));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("pattern count m must be >= 1".into()));
    }
    if elite.len() < theta as usize {
        return Err(Error::EliteTooSmall {
            have: elite.len(),
            theta,
        });
    }
    let enc = ItemEncoding::new(elite[0].n());
    let db = elite_transactions(elite);
    let mfis = maximal_itemsets_with(&db, theta, opts.use_array);
    if mfis.is_empty() {
        return Ok(vec![Pattern::new(Vec::new(), elite.len() as u32)]);
    }
    let mut patterns: Vec<Pattern> = mfis
        .into_iter()
        .map(|items| {
            let support = db.iter().filter(|t| t.contains_all(&items)).count() as u32;
            Pattern::new(items.iter().map(|&z| enc.decode_pair(z)).collect(), support)
        })
        .collect();
    patterns.sort_by(Pattern::rank_cmp);
    patterns.truncate(m);
    Ok(patterns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qaplib::QapInstance;

    fn inst(n: usize) -> QapInstance {
        QapInstance::new("t", n, vec![1; n * n], vec![1; n * n]).unwrap()
    }

    #[test]
    fn identical_elite_gives_full_pattern() {
        let q = inst(6);
        let a = Assignment::new(&q, vec![3, 1, 0, 5, 4, 2]).unwrap();
        let elite = vec![a.clone(); 5];
        let pats = mine_patterns(&elite, 2, 11).unwrap();
        assert_eq!(pats.len(), 1);
        assert_eq!(pats[0].len(), 6);
        assert_eq!(pats[0].support(), 5);
    }

    #[test]
    fn two_solutions_share_two_positions() {
        let q = inst(5);
        // Agree at facilities 0 and 3 (1-indexed 1 and 4).
        let a = Assignment::new(&q, vec![0, 1, 2, 3, 4]).unwrap();
        let b = Assignment::new(&q, vec![0, 2, 4, 3, 1]).unwrap();
        let pats = mine_patterns(&[a, b], 2, 11).unwrap();
        assert_eq!(pats, vec![Pattern::new(vec![(0, 0), (3, 3)], 2)]);
    }

    #[test]
    fn too_small_elite_is_rejected() {
        let q = inst(4);
        let a = Assignment::identity(&q);
        assert!(matches!(mine_patterns(&[a], 2, 3), Err(Error::EliteTooSmall { have: 1, theta: 2 })));
    }

    #[test]
    fn disjoint_elite_gives_empty_pattern() {
        let q = inst(3);
        let a = Assignment::new(&q, vec![0, 1, 2]).unwrap();
        let b = Assignment::new(&q, vec![1, 2, 0]).unwrap();
        let pats = mine_patterns(&[a, b], 2, 4).unwrap();
        assert_eq!(pats, vec![Pattern::new(vec![], 2)]);
    }

    #[test]
    fn largest_first_and_truncated() {
        let q = inst(6);
        let rows = [
            vec![0, 1, 2, 3, 4, 5],
            vec![0, 1, 2, 3, 5, 4],
            vec![0, 1, 3, 2, 4, 5],
            vec![1, 0, 2, 3, 4, 5],
        ];
        let elite: Vec<Assignment> = rows.iter().map(|r| Assignment::new(&q, r.clone()).unwrap()).collect();
        let all = mine_patterns(&elite, 2, 100).unwrap();
        assert!(all.windows(2).all(|w| w[0].rank_cmp(&w[1]) != Ordering::Greater));
        let top = mine_patterns(&elite, 2, 2).unwrap();
        assert_eq!(top, all[..2].to_vec());
        assert_eq!(mine_patterns_with(&elite, 2, 100, MineOptions { use_array: false }).unwrap(), all);
    }
}
