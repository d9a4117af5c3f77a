//! The elite pool: `k` distinct high-quality assignments.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bls::{bls_run, BlsParams};
use crate::error::{Error, Result};
use crate::fpmine::Pattern;
use crate::qap::Assignment;
use crate::qaplib::QapInstance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElitePool {
    capacity: usize,
    /// Oldest first.
    members: Vec<Assignment>,
    /// Consecutive failed insertions, maintained by the driver.
    pub no_update: u32,
}

impl ElitePool {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity,
            members: Vec::with_capacity(capacity),
            no_update: 0,
        }
    }

    /// Fills a pool of `k` distinct solutions, each the result of breakout
    /// local search from a fresh random permutation. Gives up after `50 k`
    /// consecutive duplicate outcomes.
    pub fn initialize(
        inst: &QapInstance,
        k: usize,
        bls: &BlsParams,
        init_rng: &mut impl Rng,
        bls_rng: &mut impl Rng,
    ) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("elite size k must be >= 1".into()));
        }
        let mut pool = Self::with_capacity(k);
        let limit = 50 * k;
        let mut duplicates = 0;
        while pool.len() < k {
            let mut pi: Vec<usize> = (0..inst.n()).collect();
            pi.shuffle(init_rng);
            let improved = bls_run(inst, Assignment::new(inst, pi)?, bls, bls_rng)?;
            if pool.contains(improved.pi()) {
                duplicates += 1;
                if duplicates >= limit {
                    return Err(Error::DuplicateSaturation {
                        wanted: k,
                        have: pool.len(),
                        duplicates,
                    });
                }
            } else {
                duplicates = 0;
                pool.members.push(improved);
            }
        }
        Ok(pool)
    }

    /// Builds a pool directly from members (distinctness is enforced).
    pub fn from_members(capacity: usize, members: Vec<Assignment>) -> Result<Self> {
        let mut pool = Self::with_capacity(capacity.max(members.len()));
        for m in members {
            if pool.contains(m.pi()) {
                return Err(Error::InvalidParameter("elite members must be distinct".into()));
            }
            pool.members.push(m);
        }
        Ok(pool)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Assignment] {
        &self.members
    }

    pub fn contains(&self, pi: &[usize]) -> bool {
        self.members.iter().any(|m| m.pi() == pi)
    }

    fn worst_index(&self) -> Option<usize> {
        let mut idx: Option<usize> = None;
        for (i, m) in self.members.iter().enumerate() {
            if idx.is_none_or(|w| m.value() > self.members[w].value()) {
                idx = Some(i);
            }
        }
        idx
    }

    /// Highest objective value; the oldest such member on ties.
    pub fn worst(&self) -> Option<&Assignment> {
        self.worst_index().map(|i| &self.members[i])
    }

    /// Lowest objective value; the oldest such member on ties.
    pub fn best(&self) -> Option<&Assignment> {
        let mut best: Option<&Assignment> = None;
        for m in &self.members {
            if best.is_none_or(|b| m.value() < b.value()) {
                best = Some(m);
            }
        }
        best
    }

    /// Replaces the worst member with `candidate` if it differs from every
    /// member and is no worse than the worst one.
    pub fn try_insert(&mut self, candidate: &Assignment) -> bool {
        if self.contains(candidate.pi()) {
            return false;
        }
        if self.members.len() < self.capacity {
            self.members.push(candidate.clone());
            return true;
        }
        match self.worst_index() {
            Some(w) if candidate.value() <= self.members[w].value() => {
                self.members.remove(w);
                self.members.push(candidate.clone());
                true
            }
            _ => false,
        }
    }
}

/// Fraction of facilities assigned the same location in both permutations.
pub fn similarity(a: &[usize], b: &[usize]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    same as f64 / a.len() as f64
}

pub fn pattern_length(p: &Pattern, n: usize) -> f64 {
    p.len() as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn inst() -> QapInstance {
        let n = 4;
        QapInstance::new("t", n, (0..16).collect(), (0..16).rev().collect()).unwrap()
    }

    fn with_value(pi: Vec<usize>, value: i64) -> Assignment {
        Assignment::with_value(pi, value).unwrap()
    }

    #[test]
    fn worst_and_best() {
        let pool = ElitePool::from_members(
            3,
            vec![with_value(vec![0, 1, 2], 10), with_value(vec![1, 0, 2], 7), with_value(vec![2, 1, 0], 12)],
        )
        .unwrap();
        assert_eq!(pool.worst().unwrap().value(), 12);
        assert_eq!(pool.best().unwrap().value(), 7);

        let single = ElitePool::from_members(1, vec![with_value(vec![0, 1], 3)]).unwrap();
        assert_eq!(single.worst(), single.best());

        let tied = ElitePool::from_members(2, vec![with_value(vec![0, 1], 5), with_value(vec![1, 0], 5)]).unwrap();
        assert_eq!(tied.worst().unwrap().pi(), &[0, 1]);
        assert_eq!(tied.best().unwrap().pi(), &[0, 1]);
    }

    #[test]
    fn insertion_rules() {
        let mut pool = ElitePool::from_members(
            3,
            vec![with_value(vec![0, 1, 2], 10), with_value(vec![1, 0, 2], 7), with_value(vec![2, 1, 0], 12)],
        )
        .unwrap();
        assert!(!pool.try_insert(&with_value(vec![1, 0, 2], 7)));
        assert!(!pool.try_insert(&with_value(vec![0, 2, 1], 13)));
        assert!(pool.try_insert(&with_value(vec![0, 2, 1], 11)));
        assert!(!pool.contains(&[2, 1, 0]));
        assert_eq!(pool.worst().unwrap().value(), 11);
        // Equal to the worst and distinct: accepted.
        assert!(pool.try_insert(&with_value(vec![1, 2, 0], 11)));
        assert_eq!(pool.len(), 3);
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(similarity(&[0, 1, 2], &[0, 1, 2]), 1.0);
        assert!((similarity(&[0, 1, 2], &[1, 0, 2]) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(similarity(&[0, 1, 2, 3], &[3, 2, 1, 0]), 0.0);
    }

    #[test]
    fn pattern_lengths() {
        assert_eq!(pattern_length(&Pattern::new(vec![(0, 0), (1, 1)], 2), 2), 1.0);
        assert_eq!(pattern_length(&Pattern::new(vec![], 2), 5), 0.0);
    }

    #[test]
    fn initialize_distinct_members() {
        // Zero flow: every permutation is a local optimum, so shuffles stay distinct.
        let q = QapInstance::new("z", 6, vec![0; 36], (0..36).collect()).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        let bls = BlsParams::for_size(6).with_max_iter(5);
        let pool = ElitePool::initialize(&inst(), 1, &BlsParams::for_size(4), &mut r1, &mut r2).unwrap();
        assert_eq!(pool.len(), 1);
        let pool = ElitePool::initialize(&q, 5, &bls, &mut r1, &mut r2).unwrap();
        assert_eq!(pool.len(), 5);
        for (i, a) in pool.members().iter().enumerate() {
            for b in &pool.members()[i + 1..] {
                assert_ne!(a.pi(), b.pi());
            }
        }
    }

    #[test]
    fn pigeonhole_saturates() {
        let q = QapInstance::new("t", 3, (0..9).collect(), (0..9).collect()).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        let bls = BlsParams::for_size(3).with_max_iter(2);
        let err = ElitePool::initialize(&q, 7, &bls, &mut r1, &mut r2).unwrap_err();
        assert!(matches!(err, Error::DuplicateSaturation { wanted: 7, duplicates: 350, .. }), "{err}");
    }
}
