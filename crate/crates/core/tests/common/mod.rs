//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fpbs::fpmine::{Item, Transaction};
use fpbs::QapInstance;
use rand::Rng;

pub fn random_instance(n: usize, max: i64, rng: &mut impl Rng) -> QapInstance {
    let flow = (0..n * n).map(|_| rng.gen_range(0..=max)).collect();
    let dist = (0..n * n).map(|_| rng.gen_range(0..=max)).collect();
    QapInstance::new(format!("rand{n}"), n, flow, dist).unwrap()
}

pub fn random_symmetric_instance(n: usize, max: i64, rng: &mut impl Rng) -> QapInstance {
    let mut flow = vec![0; n * n];
    let mut dist = vec![0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let f = rng.gen_range(0..=max);
            let d = rng.gen_range(1..=max);
            flow[i * n + j] = f;
            flow[j * n + i] = f;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    QapInstance::new(format!("sym{n}"), n, flow, dist).unwrap()
}

/// Objective straight from the definition, without any library code.
pub fn objective(inst: &QapInstance, pi: &[usize]) -> i64 {
    let n = inst.n();
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            s += inst.flow()[i * n + j] * inst.dist()[pi[i] * n + pi[j]];
        }
    }
    s
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_force_optimum(inst: &QapInstance) -> i64 {
    let mut best = i64::MAX;
    for_each_permutation(inst.n(), |p| best = best.min(objective(inst, p)));
    best
}

/// Non-empty maximal frequent itemsets by enumerating every subset of the
/// items that occur in `db`.
pub fn brute_force_mfis(db: &[Transaction], min_support: u32) -> BTreeSet<Vec<Item>> {
    let universe: BTreeSet<Item> = db.iter().flat_map(|t| t.items().iter().copied()).collect();
    let universe: Vec<Item> = universe.into_iter().collect();
    let u = universe.len();
    assert!(u <= 20);
    let tx_masks: Vec<u32> = db
        .iter()
        .map(|t| {
            t.items()
                .iter()
                .map(|it| 1u32 << universe.binary_search(it).unwrap())
                .fold(0, |a, b| a | b)
        })
        .collect();
    let frequent: Vec<bool> = (0u32..1 << u)
        .map(|m| tx_masks.iter().filter(|&&t| t & m == m).count() as u32 >= min_support)
        .collect();
    (1u32..1 << u)
        .filter(|&m| frequent[m as usize])
        .filter(|&m| (0..u).all(|b| m >> b & 1 == 1 || !frequent[(m | 1 << b) as usize]))
        .map(|m| (0..u).filter(|b| m >> b & 1 == 1).map(|b| universe[b]).collect())
        .collect()
}

pub fn random_database(rng: &mut impl Rng, max_tx: usize, max_items: u32) -> Vec<Transaction> {
    let tx = rng.gen_range(1..=max_tx);
    let items = rng.gen_range(1..=max_items);
    let density = rng.gen_range(0.2..0.9);
    (0..tx)
        .map(|_| Transaction::new((1..=items).filter(|_| rng.gen_bool(density)).collect()))
        .collect()
}
