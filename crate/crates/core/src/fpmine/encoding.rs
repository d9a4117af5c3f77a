use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Item = u32;

/// Item id `z = x * n + y` for the 1-indexed facility/location pair `(x, y)`.
/// Ids fall in `[n + 1, n^2 + n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ItemEncoding {
    n: usize,
}

impl ItemEncoding {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "permutation length must be positive");
        Self { n }
    }

    pub fn n(self) -> usize {
        self.n
    }

    #[inline]
    pub fn encode(self, x: usize, y: usize) -> Item {
        debug_assert!((1..=self.n).contains(&x) && (1..=self.n).contains(&y));
        (x * self.n + y) as Item
    }

    #[inline]
    pub fn decode(self, z: Item) -> (usize, usize) {
        let z = z as usize - 1;
        (z / self.n, z % self.n + 1)
    }

    /// Item for the 0-indexed pair (facility, location).
    #[inline]
    pub fn encode_pair(self, facility: usize, location: usize) -> Item {
        self.encode(facility + 1, location + 1)
    }

    /// 0-indexed (facility, location) of an item.
    #[inline]
    pub fn decode_pair(self, z: Item) -> (usize, usize) {
        let (x, y) = self.decode(z);
        (x - 1, y - 1)
    }
}

/// A set of distinct items, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transaction {
    items: Vec<Item>,
}

impl Transaction {
    pub fn new(mut items: Vec<Item>) -> Self {
        items.sort_unstable();
        items.dedup();
        Self { items }
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `set` must be sorted.
    pub fn contains_all(&self, set: &[Item]) -> bool {
        let mut it = self.items.iter();
        set.iter().all(|x| it.any(|y| y == x))
    }
}

/// `{(i, pi[i])}` as items; `pi` is 0-indexed.
pub fn permutation_to_transaction(pi: &[usize], enc: ItemEncoding) -> Transaction {
    debug_assert_eq!(pi.len(), enc.n());
    Transaction::new(
        pi.iter()
            .enumerate()
            .map(|(i, &p)| enc.encode_pair(i, p))
            .collect(),
    )
}

/// One transaction per line, space-separated item ids.
pub fn write_transactions(db: &[Transaction]) -> String {
    let mut out = String::new();
    for t in db {
        let line: Vec<String> = t.items.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn parse_transactions(text: &str) -> Result<Vec<Transaction>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| t.parse::<Item>().map_err(|_| Error::Format(format!("bad item {t:?}"))))
                .collect::<Result<Vec<_>>>()
                .map(Transaction::new)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_pairs() {
        let enc = ItemEncoding::new(7);
        // 5 4 7 2 1 6 3, 1-indexed
        let pi = [4, 3, 6, 1, 0, 5, 2];
        let t = permutation_to_transaction(&pi, enc);
        let mut pairs: Vec<_> = t.items().iter().map(|&z| enc.decode(z)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(1, 5), (2, 4), (3, 7), (4, 2), (5, 1), (6, 6), (7, 3)]);
        assert_eq!(enc.encode(1, 5), 12);
    }

    #[test]
    fn identity_items() {
        let t = permutation_to_transaction(&[0, 1, 2], ItemEncoding::new(3));
        assert_eq!(t.items(), &[4, 8, 12]);
    }

    #[test]
    fn encoding_is_bijective() {
        for n in 1..=20 {
            let enc = ItemEncoding::new(n);
            let mut seen = std::collections::HashSet::new();
            for x in 1..=n {
                for y in 1..=n {
                    let z = enc.encode(x, y);
                    assert!(z as usize > n && z as usize <= n * n + n);
                    assert!(seen.insert(z));
                    assert_eq!(enc.decode(z), (x, y));
                }
            }
        }
    }

    #[test]
    fn dump_round_trip() {
        let db = vec![Transaction::new(vec![3, 1, 2]), Transaction::new(vec![5])];
        let text = write_transactions(&db);
        assert_eq!(text, "1 2 3\n5\n");
        assert_eq!(parse_transactions(&text).unwrap(), db);
        assert!(parse_transactions("1 x\n").is_err());
    }

    #[test]
    fn contains_all() {
        let t = Transaction::new(vec![1, 3, 5, 7]);
        assert!(t.contains_all(&[3, 7]));
        assert!(t.contains_all(&[]));
        assert!(!t.contains_all(&[3, 4]));
    }
}
