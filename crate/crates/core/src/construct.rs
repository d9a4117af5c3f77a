//! Building new starting permutations from mined patterns.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::elite::ElitePool;
use crate::error::{Error, Result};
use crate::fpmine::Pattern;
use crate::qap::Assignment;
use crate::qaplib::QapInstance;

/// Facility slots, some of which hold a location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialAssignment {
    slots: Vec<Option<usize>>,
    used: Vec<bool>,
    assigned: usize,
}

impl PartialAssignment {
    pub fn empty(n: usize) -> Self {
        Self {
            slots: vec![None; n],
            used: vec![false; n],
            assigned: 0,
        }
    }

    pub fn slots(&self) -> &[Option<usize>] {
        &self.slots
    }

    pub fn assigned_count(&self) -> usize {
        self.assigned
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn is_complete(&self) -> bool {
        self.assigned == self.slots.len()
    }

    pub fn is_used(&self, location: usize) -> bool {
        self.used[location]
    }

    /// Assigns `location` to an empty `facility` slot if the location is free.
    pub fn try_assign(&mut self, facility: usize, location: usize) -> bool {
        if self.slots[facility].is_some() || self.used[location] {
            return false;
        }
        self.slots[facility] = Some(location);
        self.used[location] = true;
        self.assigned += 1;
        true
    }
}

/// Draws `lambda` patterns with replacement and returns the index of the best
/// draw (largest, then highest support, then lexicographically first).
pub fn tournament_select(patterns: &[Pattern], lambda: usize, rng: &mut impl Rng) -> Result<usize> {
    if patterns.is_empty() {
        return Err(Error::EmptyPatterns);
    }
    if lambda < 1 {
        return Err(Error::InvalidParameter("tournament size must be >= 1".into()));
    }
    let mut winner = rng.gen_range(0..patterns.len());
    for _ in 1..lambda {
        let challenger = rng.gen_range(0..patterns.len());
        if patterns[challenger].rank_cmp(&patterns[winner]).is_lt() {
            winner = challenger;
        }
    }
    Ok(winner)
}

pub fn remap(pattern: &Pattern, n: usize) -> Result<PartialAssignment> {
    let mut partial = PartialAssignment::empty(n);
    for &(facility, location) in pattern.pairs() {
        if facility >= n || location >= n || !partial.try_assign(facility, location) {
            return Err(Error::ConflictingPattern(format!("{:?}", pattern.pairs())));
        }
    }
    Ok(partial)
}

/// Copies the guide's location into every empty slot whose location is still free.
pub fn guided_complete(partial: &mut PartialAssignment, guide: &[usize]) {
    for (facility, &location) in guide.iter().enumerate() {
        partial.try_assign(facility, location);
    }
}

/// Fills the empty slots with a uniformly random arrangement of the unused locations.
pub fn random_complete(mut partial: PartialAssignment, rng: &mut impl Rng) -> Vec<usize> {
    let mut free: Vec<usize> = (0..partial.n()).filter(|&l| !partial.used[l]).collect();
    free.shuffle(rng);
    let mut free = free.into_iter();
    for slot in partial.slots.iter_mut().filter(|s| s.is_none()) {
        *slot = free.next();
    }
    partial.slots.into_iter().map(|s| s.expect("one free location per empty slot")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructParams {
    /// Tournament pool size.
    pub lambda: usize,
    /// Patterns covering fewer than `beta * n` facilities are first extended
    /// from a guiding elite solution.
    pub beta: f64,
}

impl Default for ConstructParams {
    fn default() -> Self {
        Self { lambda: 3, beta: 0.75 }
    }
}

/// What happened during one construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildTrace {
    pub pattern: usize,
    pub pattern_len: usize,
    /// Index into the elite pool of the guiding solution, if one was used.
    pub guide: Option<usize>,
    /// Slots filled by the guide.
    pub guided: usize,
    /// Slots filled at random.
    pub random: usize,
}

/// Tournament selection, re-mapping, optional guided completion and random completion.
pub fn build_solution(
    inst: &QapInstance,
    patterns: &[Pattern],
    pool: &ElitePool,
    params: &ConstructParams,
    select_rng: &mut impl Rng,
    complete_rng: &mut impl Rng,
) -> Result<(Assignment, BuildTrace)> {
    if pool.is_empty() {
        return Err(Error::InvalidParameter("elite pool is empty".into()));
    }
    let n = inst.n();
    let chosen = tournament_select(patterns, params.lambda, select_rng)?;
    let mut partial = remap(&patterns[chosen], n)?;
    let pattern_len = partial.assigned_count();
    let mut trace = BuildTrace {
        pattern: chosen,
        pattern_len,
        guide: None,
        guided: 0,
        random: 0,
    };
    if (pattern_len as f64) < params.beta * n as f64 {
        let g = complete_rng.gen_range(0..pool.len());
        guided_complete(&mut partial, pool.members()[g].pi());
        trace.guide = Some(g);
        trace.guided = partial.assigned_count() - pattern_len;
    }
    trace.random = n - partial.assigned_count();
    let pi = random_complete(partial, complete_rng);
    Ok((Assignment::new(inst, pi)?, trace))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn pat(pairs: &[(usize, usize)], support: u32) -> Pattern {
        Pattern::new(pairs.to_vec(), support)
    }

    #[test]
    fn tournament_on_single_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ps = vec![pat(&[(0, 1)], 2)];
        for lambda in 1..5 {
            assert_eq!(tournament_select(&ps, lambda, &mut rng).unwrap(), 0);
        }
        assert!(matches!(tournament_select(&[], 3, &mut rng), Err(Error::EmptyPatterns)));
    }

    #[test]
    fn lambda_one_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ps: Vec<Pattern> = (0..5).map(|k| pat(&[(k, k)], 2)).collect();
        let mut hits = [0usize; 5];
        let draws = 100_000;
        for _ in 0..draws {
            hits[tournament_select(&ps, 1, &mut rng).unwrap()] += 1;
        }
        for h in hits {
            assert!((h as f64 / draws as f64 - 0.2).abs() < 0.02);
        }
    }

    #[test]
    fn remap_examples() {
        let p = remap(&pat(&[(0, 4), (2, 6)], 2), 7).unwrap();
        assert_eq!(p.slots(), &[Some(4), None, Some(6), None, None, None, None]);
        assert_eq!(p.assigned_count(), 2);
        assert_eq!(remap(&pat(&[], 2), 3).unwrap(), PartialAssignment::empty(3));
        let full = remap(&pat(&[(0, 2), (1, 0), (2, 1)], 2), 3).unwrap();
        assert!(full.is_complete());
        assert!(remap(&pat(&[(0, 1), (2, 1)], 2), 3).is_err());
    }

    #[test]
    fn guided_completion_rules() {
        let mut p = PartialAssignment::empty(3);
        guided_complete(&mut p, &[2, 0, 1]);
        assert_eq!(p.slots(), &[Some(2), Some(0), Some(1)]);

        let mut p = PartialAssignment::empty(3);
        p.try_assign(0, 1);
        guided_complete(&mut p, &[0, 1, 2]);
        assert_eq!(p.slots(), &[Some(1), None, Some(2)]);
    }

    #[test]
    fn random_completion_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = std::collections::HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(random_complete(PartialAssignment::empty(3), &mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        for c in counts.values() {
            assert!((*c as f64 / draws as f64 - 1.0 / 6.0).abs() < 0.01);
        }
    }

    #[test]
    fn forced_and_complete_partials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = PartialAssignment::empty(3);
        p.try_assign(0, 2);
        p.try_assign(2, 1);
        assert_eq!(random_complete(p.clone(), &mut rng), vec![2, 0, 1]);
        p.try_assign(1, 0);
        assert_eq!(random_complete(p, &mut rng), vec![2, 0, 1]);
    }
}
