//! Breakout local search: steepest-descent over the swap neighborhood,
//! alternated with an adaptive perturbation that is either tabu-directed or
//! random, with a reactive perturbation strength.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qap::{apply_swap, Assignment, DeltaTable, SwapMove};
use crate::qaplib::QapInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlsParams {
    /// Number of perturbation-plus-descent episodes per call.
    pub max_iter: u64,
    /// Inclusive range the tabu tenure of each move is drawn from.
    pub tenure: (u64, u64),
    /// Lower bound on the probability of a directed perturbation.
    pub q_floor: f64,
    /// Initial perturbation strength.
    pub l0: usize,
    /// Cap on the perturbation strength.
    pub l_max: usize,
    /// Decay constant of the directed-perturbation schedule `exp(-omega / T)`.
    pub temperature: f64,
}

impl BlsParams {
    /// Default settings for an instance of size `n`.
    pub fn for_size(n: usize) -> Self {
        let lo = (0.9 * n as f64).ceil() as u64;
        let hi = ((1.1 * n as f64).floor() as u64).max(lo);
        let l0 = ((0.1 * n as f64).ceil() as usize).max(1);
        Self {
            max_iter: 10_000,
            tenure: (lo.max(1), hi.max(1)),
            q_floor: 0.75,
            l0,
            l_max: (n / 2).max(l0),
            temperature: 1.0,
        }
    }

    pub fn with_max_iter(mut self, max_iter: u64) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.max_iter < 1 {
            return bad("BLS max_iter must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.q_floor) {
            return bad(format!("q_floor {} outside [0, 1]", self.q_floor));
        }
        if !(1 <= self.l0 && self.l0 <= self.l_max && self.l_max <= n) {
            return bad(format!(
                "need 1 <= l0 ({}) <= l_max ({}) <= n ({n})",
                self.l0, self.l_max
            ));
        }
        if self.tenure.0 > self.tenure.1 {
            return bad(format!("empty tenure range {:?}", self.tenure));
        }
        if self.temperature.is_nan() || self.temperature <= 0.0 {
            return bad(format!("temperature must be positive, got {}", self.temperature));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbationKind {
    Directed,
    Random,
}

pub struct BlsState<'a> {
    inst: &'a QapInstance,
    params: BlsParams,
    current: Assignment,
    best: Assignment,
    delta: DeltaTable,
    /// Row-major `n x n`; move (u, v) is tabu while `tabu_until[u][v] > step`.
    tabu_until: Vec<u64>,
    /// Number of moves applied so far; the clock for tabu tenures.
    step: u64,
    strength: usize,
    omega: u64,
    last_local_optimum: Option<Vec<usize>>,
}

impl<'a> BlsState<'a> {
    pub fn new(inst: &'a QapInstance, start: Assignment, params: BlsParams) -> Result<Self> {
        params.validate(inst.n())?;
        if start.n() != inst.n() {
            return Err(Error::InvalidPermutation("start size does not match instance".into()));
        }
        let n = inst.n();
        let delta = DeltaTable::build(inst, start.pi());
        Ok(Self {
            inst,
            strength: params.l0,
            params,
            best: start.clone(),
            current: start,
            delta,
            tabu_until: vec![0; n * n],
            step: 0,
            omega: 0,
            last_local_optimum: None,
        })
    }

    pub fn current(&self) -> &Assignment {
        &self.current
    }

    pub fn best(&self) -> &Assignment {
        &self.best
    }

    pub fn into_best(self) -> Assignment {
        self.best
    }

    pub fn delta(&self) -> &DeltaTable {
        &self.delta
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    pub fn omega(&self) -> u64 {
        self.omega
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn tabu_until(&self, mv: SwapMove) -> u64 {
        self.tabu_until[mv.u() * self.inst.n() + mv.v()]
    }

    fn is_tabu(&self, u: usize, v: usize) -> bool {
        self.tabu_until[u * self.inst.n() + v] > self.step
    }

    fn apply(&mut self, mv: SwapMove, tenure: u64) {
        apply_swap(self.inst, &mut self.current, &mut self.delta, mv);
        let n = self.inst.n();
        self.tabu_until[mv.u() * n + mv.v()] = self.step + tenure;
        self.step += 1;
        if self.current.value() < self.best.value() {
            self.best = self.current.clone();
        }
    }

    fn draw_tenure(&self, rng: &mut impl Rng) -> u64 {
        let (lo, hi) = self.params.tenure;
        rng.gen_range(lo..=hi)
    }

    /// Most improving swap, lowest `(u, v)` on ties; `None` at a local optimum.
    pub fn best_improving_move(&self) -> Option<SwapMove> {
        let n = self.inst.n();
        let mut best: Option<(i64, usize, usize)> = None;
        for u in 0..n {
            for v in u + 1..n {
                let d = self.delta.get(u, v);
                if d < 0 && best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, u, v));
                }
            }
        }
        best.map(|(_, u, v)| SwapMove::new(u, v).expect("u < v"))
    }

    /// Best-improvement descent to a local optimum. Returns the number of moves made.
    ///
    /// Descent moves do not touch the tabu list; only perturbation moves do.
    pub fn descend(&mut self) -> usize {
        let mut moves = 0;
        while let Some(mv) = self.best_improving_move() {
            apply_swap(self.inst, &mut self.current, &mut self.delta, mv);
            self.step += 1;
            moves += 1;
        }
        if self.current.value() < self.best.value() {
            self.best = self.current.clone();
        }
        moves
    }

    /// `max(q_floor, exp(-omega / T))`.
    pub fn directed_probability(&self) -> f64 {
        let p = (-(self.omega as f64) / self.params.temperature).exp();
        p.max(self.params.q_floor)
    }

    pub fn choose_perturbation(&self, rng: &mut impl Rng) -> PerturbationKind {
        if rng.gen::<f64>() < self.directed_probability() {
            PerturbationKind::Directed
        } else {
            PerturbationKind::Random
        }
    }

    /// Reactive strength update at a local optimum: one step stronger when the
    /// search fell back into the previous local optimum, reset otherwise.
    /// The current permutation becomes the new reference optimum.
    pub fn update_strength(&mut self) -> usize {
        let returned = self
            .last_local_optimum
            .as_deref()
            .is_some_and(|prev| prev == self.current.pi());
        self.strength = if returned {
            (self.strength + 1).min(self.params.l_max)
        } else {
            self.params.l0
        };
        match &mut self.last_local_optimum {
            Some(prev) => prev.copy_from_slice(self.current.pi()),
            None => self.last_local_optimum = Some(self.current.pi().to_vec()),
        }
        self.strength
    }

    /// The move a directed perturbation would take next: the least degrading
    /// admissible swap, ties broken uniformly at random. A tabu move is
    /// admissible only if it leads below the best value seen. When nothing is
    /// admissible (tiny instances) the move whose tabu status expires first is used.
    pub fn directed_move(&self, rng: &mut impl Rng) -> SwapMove {
        let n = self.inst.n();
        let cur = self.current.value();
        let best = self.best.value();
        let mut chosen: Option<(i64, usize, usize)> = None;
        let mut ties = 0u32;
        for u in 0..n {
            for v in u + 1..n {
                let d = self.delta.get(u, v);
                if self.is_tabu(u, v) && cur + d >= best {
                    continue;
                }
                match chosen {
                    Some((cd, _, _)) if d > cd => {}
                    Some((cd, _, _)) if d == cd => {
                        ties += 1;
                        if rng.gen_range(0..ties) == 0 {
                            chosen = Some((d, u, v));
                        }
                    }
                    _ => {
                        chosen = Some((d, u, v));
                        ties = 1;
                    }
                }
            }
        }
        let (u, v) = match chosen {
            Some((_, u, v)) => (u, v),
            None => {
                let mut pick = (u64::MAX, 0, 1);
                for u in 0..n {
                    for v in u + 1..n {
                        let t = self.tabu_until[u * n + v];
                        if t < pick.0 {
                            pick = (t, u, v);
                        }
                    }
                }
                (pick.1, pick.2)
            }
        };
        SwapMove::new(u, v).expect("u < v")
    }

    fn random_move(&self, rng: &mut impl Rng) -> SwapMove {
        let n = self.inst.n();
        let u = rng.gen_range(0..n);
        let v = (u + rng.gen_range(1..n)) % n;
        SwapMove::new(u, v).expect("u != v")
    }

    /// Applies exactly `strength` swap moves of the given kind.
    pub fn perturb(&mut self, kind: PerturbationKind, strength: usize, rng: &mut impl Rng) {
        for _ in 0..strength {
            let mv = match kind {
                PerturbationKind::Directed => self.directed_move(rng),
                PerturbationKind::Random => self.random_move(rng),
            };
            let tenure = self.draw_tenure(rng);
            self.apply(mv, tenure);
        }
    }

    /// One episode: perturb the current local optimum and descend again.
    /// Returns `true` if the best value improved.
    pub fn episode(&mut self, rng: &mut impl Rng) -> bool {
        let before = self.best.value();
        let kind = self.choose_perturbation(rng);
        self.perturb(kind, self.strength, rng);
        self.descend();
        let improved = self.best.value() < before;
        if improved {
            self.omega = 0;
        } else {
            self.omega += 1;
        }
        self.update_strength();
        improved
    }
}

/// Runs breakout local search from `start` for `params.max_iter` episodes and
/// returns the best assignment observed.
pub fn bls_run(inst: &QapInstance, start: Assignment, params: &BlsParams, rng: &mut impl Rng) -> Result<Assignment> {
    let mut state = BlsState::new(inst, start, params.clone())?;
    state.descend();
    state.update_strength();
    for _ in 0..params.max_iter {
        state.episode(rng);
    }
    Ok(state.into_best())
}

#[cfg(test)]
mod tests {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::qap::full_evaluate;

    fn random_instance(n: usize, rng: &mut impl Rng) -> QapInstance {
        let flow = (0..n * n).map(|_| rng.gen_range(0..10)).collect();
        let dist = (0..n * n).map(|_| rng.gen_range(0..10)).collect();
        QapInstance::new("r", n, flow, dist).unwrap()
    }

    fn random_start(inst: &QapInstance, rng: &mut impl Rng) -> Assignment {
        let mut pi: Vec<usize> = (0..inst.n()).collect();
        pi.shuffle(rng);
        Assignment::new(inst, pi).unwrap()
    }

    #[test]
    fn default_params() {
        let p = BlsParams::for_size(40);
        assert_eq!(p.tenure, (36, 44));
        assert_eq!(p.l0, 4);
        assert_eq!(p.l_max, 20);
        assert_eq!(p.q_floor, 0.75);
        p.validate(40).unwrap();
        BlsParams::for_size(2).validate(2).unwrap();
        BlsParams::for_size(3).validate(3).unwrap();
        let mut bad = p.clone();
        bad.l0 = 0;
        assert!(bad.validate(40).is_err());
        bad = p.clone();
        bad.q_floor = 1.5;
        assert!(bad.validate(40).is_err());
    }

    #[test]
    fn descent_reaches_local_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let inst = random_instance(8, &mut rng);
            let start = random_start(&inst, &mut rng);
            let start_value = start.value();
            let mut s = BlsState::new(&inst, start, BlsParams::for_size(8)).unwrap();
            s.descend();
            let cur = s.current().clone();
            assert!(cur.value() <= start_value);
            assert_eq!(cur.value(), full_evaluate(&inst, cur.pi()));
            for u in 0..8 {
                for v in u + 1..8 {
                    let mut q = cur.pi().to_vec();
                    q.swap(u, v);
                    assert!(full_evaluate(&inst, &q) >= cur.value());
                }
            }
            assert!(s.best().value() <= s.current().value());
            // fixpoint
            let before = s.current().clone();
            assert_eq!(s.descend(), 0);
            assert_eq!(s.current(), &before);
        }
    }

    #[test]
    fn zero_flow_descent_takes_no_steps() {
        let inst = QapInstance::new("z", 5, vec![0; 25], (0..25).collect()).unwrap();
        let mut s = BlsState::new(&inst, Assignment::identity(&inst), BlsParams::for_size(5)).unwrap();
        assert_eq!(s.descend(), 0);
    }

    #[test]
    fn q_floor_one_is_always_directed() {
        let inst = QapInstance::new("z", 5, vec![1; 25], vec![1; 25]).unwrap();
        let mut p = BlsParams::for_size(5);
        p.q_floor = 1.0;
        let mut s = BlsState::new(&inst, Assignment::identity(&inst), p).unwrap();
        s.omega = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| s.choose_perturbation(&mut rng) == PerturbationKind::Directed));
    }

    #[test]
    fn directed_fraction_follows_schedule() {
        // With q_floor = 0 and omega = 1 the schedule gives exp(-1).
        let inst = QapInstance::new("z", 5, vec![1; 25], vec![1; 25]).unwrap();
        let mut p = BlsParams::for_size(5);
        p.q_floor = 0.0;
        let mut s = BlsState::new(&inst, Assignment::identity(&inst), p).unwrap();
        assert_eq!(s.directed_probability(), 1.0);
        s.omega = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let directed = (0..draws)
            .filter(|_| s.choose_perturbation(&mut rng) == PerturbationKind::Directed)
            .count();
        let frac = directed as f64 / draws as f64;
        assert!((frac - (-1.0f64).exp()).abs() < 0.01, "{frac}");
    }

    #[test]
    fn choice_sequence_is_reproducible() {
        let inst = QapInstance::new("z", 5, vec![1; 25], vec![1; 25]).unwrap();
        let mut s = BlsState::new(&inst, Assignment::identity(&inst), BlsParams::for_size(5)).unwrap();
        s.omega = 3;
        let seq = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64).map(|_| s.choose_perturbation(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
    }

    #[test]
    fn strength_reacts_to_returning() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = random_instance(20, &mut rng);
        let p = BlsParams::for_size(20);
        let (l0, l_max) = (p.l0, p.l_max);
        let mut s = BlsState::new(&inst, random_start(&inst, &mut rng), p).unwrap();
        s.descend();
        assert_eq!(s.update_strength(), l0);
        // Same optimum again.
        assert_eq!(s.update_strength(), l0 + 1);
        for _ in 0..3 * l_max {
            s.update_strength();
        }
        assert_eq!(s.strength(), l_max);
        // A different local optimum resets the strength.
        s.perturb(PerturbationKind::Random, 6, &mut rng);
        s.descend();
        if s.last_local_optimum.as_deref() != Some(s.current().pi()) {
            assert_eq!(s.update_strength(), l0);
        }
    }

    #[test]
    fn perturbation_moves_and_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inst = random_instance(12, &mut rng);
        let mut s = BlsState::new(&inst, random_start(&inst, &mut rng), BlsParams::for_size(12)).unwrap();
        s.descend();
        for (l, kind) in [(1, PerturbationKind::Random), (3, PerturbationKind::Random), (3, PerturbationKind::Directed)] {
            let before = s.current().pi().to_vec();
            s.perturb(kind, l, &mut rng);
            let changed = before.iter().zip(s.current().pi()).filter(|(a, b)| a != b).count();
            if l == 1 {
                assert_eq!(changed, 2);
            }
            assert!(changed <= 2 * l);
            assert_eq!(s.current().value(), full_evaluate(&inst, s.current().pi()));
            assert_eq!(s.delta(), &DeltaTable::build(&inst, s.current().pi()));
            s.descend();
        }
    }

    #[test]
    fn directed_moves_respect_tabu_or_aspiration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let inst = random_instance(9, &mut rng);
            let mut s = BlsState::new(&inst, random_start(&inst, &mut rng), BlsParams::for_size(9)).unwrap();
            s.descend();
            for _ in 0..300 {
                let mv = s.directed_move(&mut rng);
                let ok = s.tabu_until(mv) <= s.step()
                    || s.current().value() + s.delta().of(mv) < s.best().value();
                assert!(ok, "tabu move {mv:?} selected without aspiration");
                let t = s.draw_tenure(&mut rng);
                s.apply(mv, t);
                if rng.gen_bool(0.2) {
                    s.descend();
                }
            }
        }
    }

    #[test]
    fn best_never_increases_and_start_optimum_kept() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inst = random_instance(10, &mut rng);
        let start = random_start(&inst, &mut rng);
        let mut s = BlsState::new(&inst, start.clone(), BlsParams::for_size(10)).unwrap();
        s.descend();
        s.update_strength();
        let mut last = s.best().value();
        for _ in 0..500 {
            s.episode(&mut rng);
            assert!(s.best().value() <= last);
            last = s.best().value();
        }
        assert!(last <= start.value());

        let best = bls_run(&inst, start, &BlsParams::for_size(10).with_max_iter(200), &mut rng).unwrap();
        let again = bls_run(&inst, best.clone(), &BlsParams::for_size(10).with_max_iter(50), &mut rng).unwrap();
        assert!(again.value() <= best.value());
    }

    #[test]
    fn runs_are_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let inst = random_instance(15, &mut rng);
        let start = random_start(&inst, &mut rng);
        let p = BlsParams::for_size(15).with_max_iter(300);
        let a = bls_run(&inst, start.clone(), &p, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = bls_run(&inst, start, &p, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tiny_instances_do_not_stall() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 2..=4 {
            let inst = random_instance(n, &mut rng);
            let start = random_start(&inst, &mut rng);
            let best = bls_run(&inst, start, &BlsParams::for_size(n).with_max_iter(100), &mut rng).unwrap();
            assert_eq!(best.value(), full_evaluate(&inst, best.pi()));
        }
    }
}
