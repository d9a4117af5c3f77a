//! Objective evaluation, the swap neighborhood and the incremental delta table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qaplib::QapInstance;

/// `sum_i sum_j a[i][j] * b[pi[i]][pi[j]]`.
pub fn full_evaluate(inst: &QapInstance, pi: &[usize]) -> i64 {
    let n = inst.n();
    let mut total = 0i64;
    for i in 0..n {
        let pi_i = pi[i];
        for j in 0..n {
            total += inst.a(i, j) * inst.b(pi_i, pi[j]);
        }
    }
    total
}

pub fn neighborhood_size(n: usize) -> usize {
    n * (n - 1) / 2
}

pub fn check_permutation(pi: &[usize]) -> Result<()> {
    let mut seen = vec![false; pi.len()];
    for &p in pi {
        if p >= pi.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!("{pi:?}")));
        }
    }
    Ok(())
}

/// A permutation together with its objective value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pi: Vec<usize>,
    value: i64,
}

impl Assignment {
    pub fn new(inst: &QapInstance, pi: Vec<usize>) -> Result<Self> {
        if pi.len() != inst.n() {
            return Err(Error::InvalidPermutation(format!(
                "length {} does not match instance size {}",
                pi.len(),
                inst.n()
            )));
        }
        check_permutation(&pi)?;
        let value = full_evaluate(inst, &pi);
        Ok(Self { pi, value })
    }

    /// Pairs a permutation with an already known objective value, e.g. one
    /// read back from a snapshot. The value is not re-evaluated.
    pub fn with_value(pi: Vec<usize>, value: i64) -> Result<Self> {
        check_permutation(&pi)?;
        Ok(Self { pi, value })
    }

    pub fn identity(inst: &QapInstance) -> Self {
        Self::new(inst, (0..inst.n()).collect()).expect("identity is a permutation")
    }

    #[inline]
    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    #[inline]
    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn into_pi(self) -> Vec<usize> {
        self.pi
    }

    /// Permutation as 1-indexed locations, the external convention.
    pub fn one_indexed(&self) -> Vec<usize> {
        self.pi.iter().map(|&p| p + 1).collect()
    }
}

/// Exchange of the locations of two facilities, `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SwapMove {
    u: usize,
    v: usize,
}

impl SwapMove {
    /// Returns `None` when `u == v`.
    pub fn new(u: usize, v: usize) -> Option<Self> {
        match u.cmp(&v) {
            std::cmp::Ordering::Less => Some(Self { u, v }),
            std::cmp::Ordering::Greater => Some(Self { u: v, v: u }),
            std::cmp::Ordering::Equal => None,
        }
    }

    #[inline]
    pub fn u(self) -> usize {
        self.u
    }

    #[inline]
    pub fn v(self) -> usize {
        self.v
    }
}

/// Objective change of every swap move relative to the current permutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaTable {
    n: usize,
    delta: Vec<i64>,
}

/// O(n) cost change of swapping facilities `r` and `s` (Taillard, asymmetric form).
pub fn swap_delta(inst: &QapInstance, pi: &[usize], r: usize, s: usize) -> i64 {
    let (pr, ps) = (pi[r], pi[s]);
    let mut d = (inst.a(r, r) - inst.a(s, s)) * (inst.b(ps, ps) - inst.b(pr, pr))
        + (inst.a(r, s) - inst.a(s, r)) * (inst.b(ps, pr) - inst.b(pr, ps));
    for k in 0..inst.n() {
        if k == r || k == s {
            continue;
        }
        let pk = pi[k];
        d += (inst.a(k, r) - inst.a(k, s)) * (inst.b(pk, ps) - inst.b(pk, pr))
            + (inst.a(r, k) - inst.a(s, k)) * (inst.b(ps, pk) - inst.b(pr, pk));
    }
    d
}

impl DeltaTable {
    pub fn build(inst: &QapInstance, pi: &[usize]) -> Self {
        let n = inst.n();
        let mut delta = vec![0; n * n];
        for u in 0..n {
            for v in u + 1..n {
                let d = swap_delta(inst, pi, u, v);
                delta[u * n + v] = d;
                delta[v * n + u] = d;
            }
        }
        Self { n, delta }
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> i64 {
        self.delta[u * self.n + v]
    }

    #[inline]
    pub fn of(&self, mv: SwapMove) -> i64 {
        self.get(mv.u, mv.v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn set(&mut self, u: usize, v: usize, d: i64) {
        self.delta[u * self.n + v] = d;
        self.delta[v * self.n + u] = d;
    }
}

pub fn build_delta_table(inst: &QapInstance, pi: &[usize]) -> DeltaTable {
    DeltaTable::build(inst, pi)
}

/// Applies `mv` to `assignment` and brings `table` up to date.
///
/// Entries that share no facility with the move get the O(1) second-order
/// correction; rows and columns `u`, `v` are recomputed in O(n).
pub fn apply_swap(inst: &QapInstance, assignment: &mut Assignment, table: &mut DeltaTable, mv: SwapMove) {
    let (r, s) = (mv.u, mv.v);
    assignment.value += table.get(r, s);
    assignment.pi.swap(r, s);
    let p = &assignment.pi;
    let n = inst.n();
    let (pr, ps) = (p[r], p[s]);

    // The correction for (i, j) factors as
    // (x_i - x_j)(u_i - u_j) + (y_i - y_j)(w_i - w_j).
    let (flow, dist) = (inst.flow(), inst.dist());
    let (fr, fs) = (&flow[r * n..(r + 1) * n], &flow[s * n..(s + 1) * n]);
    let (dr, ds) = (&dist[pr * n..(pr + 1) * n], &dist[ps * n..(ps + 1) * n]);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let q = p[i];
        x.push(fr[i] - fs[i]);
        y.push(inst.a(i, r) - inst.a(i, s));
        u.push(ds[q] - dr[q]);
        w.push(inst.b(q, ps) - inst.b(q, pr));
    }
    for i in 0..n {
        if i == r || i == s {
            continue;
        }
        let row = &mut table.delta[i * n..(i + 1) * n];
        let (xi, yi, ui, wi) = (x[i], y[i], u[i], w[i]);
        for j in 0..n {
            row[j] += (xi - x[j]) * (ui - u[j]) + (yi - y[j]) * (wi - w[j]);
        }
    }
    for k in 0..n {
        if k != r {
            let d = swap_delta(inst, p, r, k);
            table.set(r, k, d);
        }
        if k != s && k != r {
            let d = swap_delta(inst, p, s, k);
            table.set(s, k, d);
        }
    }
}
