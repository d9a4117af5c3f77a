//! Frequency-ordered prefix tree (FP-tree) over a weighted transaction set.
//!
//! Items are addressed by their local rank: rank 0 is the most frequent item
//! of this tree, ties broken by ascending item id. Every root-to-node path
//! lists ranks in increasing order.

use std::collections::HashMap;

use super::encoding::{Item, Transaction};

const ROOT: usize = 0;
const NO_PARENT: usize = usize::MAX;

#[derive(Clone, Debug)]
pub(crate) struct FpNode {
    pub(crate) rank: usize,
    pub(crate) count: u32,
    pub(crate) parent: usize,
    pub(crate) children: Vec<usize>,
}

/// Lower-triangular support counts of item pairs (the "array technique").
#[derive(Clone, Debug)]
pub(crate) struct PairCounts {
    counts: Vec<u32>,
}

impl PairCounts {
    fn new(len: usize) -> Self {
        Self {
            counts: vec![0; len * len.saturating_sub(1) / 2],
        }
    }

    #[inline]
    fn index(hi: usize, lo: usize) -> usize {
        debug_assert!(lo < hi);
        hi * (hi - 1) / 2 + lo
    }

    /// Support of `{hi, lo}` for ranks `lo < hi`.
    #[inline]
    pub(crate) fn get(&self, hi: usize, lo: usize) -> u32 {
        self.counts[Self::index(hi, lo)]
    }

    fn add_path(&mut self, ranks: &[usize], weight: u32) {
        for (k, &hi) in ranks.iter().enumerate() {
            for &lo in &ranks[..k] {
                self.counts[Self::index(hi, lo)] += weight;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FpTree {
    pub(crate) nodes: Vec<FpNode>,
    /// rank -> item id
    pub(crate) items: Vec<Item>,
    /// rank -> support within the tree
    pub(crate) supports: Vec<u32>,
    /// rank -> every node holding that rank
    pub(crate) header: Vec<Vec<usize>>,
    pub(crate) rank_of: HashMap<Item, usize>,
    pub(crate) base: Vec<Item>,
    pub(crate) array: Option<PairCounts>,
    pub(crate) min_support: u32,
}

impl FpTree {
    /// Builds a tree from weighted item lists, keeping only items whose total
    /// weight reaches `min_support`.
    pub(crate) fn from_weighted<'p>(
        paths: impl Iterator<Item = (&'p [Item], u32)> + Clone,
        base: Vec<Item>,
        min_support: u32,
        with_array: bool,
    ) -> Self {
        let mut freq: HashMap<Item, u32> = HashMap::new();
        for (items, w) in paths.clone() {
            for &it in items {
                *freq.entry(it).or_default() += w;
            }
        }
        let mut frequent: Vec<(Item, u32)> = freq.into_iter().filter(|&(_, c)| c >= min_support).collect();
        frequent.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

        let items: Vec<Item> = frequent.iter().map(|&(i, _)| i).collect();
        let supports: Vec<u32> = frequent.iter().map(|&(_, c)| c).collect();
        let rank_of: HashMap<Item, usize> = items.iter().enumerate().map(|(r, &i)| (i, r)).collect();

        let mut tree = Self {
            nodes: vec![FpNode {
                rank: usize::MAX,
                count: 0,
                parent: NO_PARENT,
                children: Vec::new(),
            }],
            header: vec![Vec::new(); items.len()],
            array: with_array.then(|| PairCounts::new(items.len())),
            items,
            supports,
            rank_of,
            base,
            min_support,
        };
        let mut ranks = Vec::new();
        for (path, w) in paths {
            ranks.clear();
            ranks.extend(path.iter().filter_map(|i| tree.rank_of.get(i).copied()));
            if ranks.is_empty() {
                continue;
            }
            ranks.sort_unstable();
            tree.insert(&ranks, w);
            if let Some(arr) = &mut tree.array {
                arr.add_path(&ranks, w);
            }
        }
        tree
    }

    fn insert(&mut self, ranks: &[usize], weight: u32) {
        let mut at = ROOT;
        self.nodes[ROOT].count += weight;
        for &r in ranks {
            let existing = self.nodes[at].children.iter().copied().find(|&c| self.nodes[c].rank == r);
            at = match existing {
                Some(c) => {
                    self.nodes[c].count += weight;
                    c
                }
                None => {
                    let idx = self.nodes.len();
                    self.nodes.push(FpNode {
                        rank: r,
                        count: weight,
                        parent: at,
                        children: Vec::new(),
                    });
                    self.nodes[at].children.push(idx);
                    self.header[r].push(idx);
                    idx
                }
            };
        }
    }

    /// Items of the tree, most frequent first.
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    /// Supports aligned with [`FpTree::items`].
    pub fn supports(&self) -> &[u32] {
        &self.supports
    }

    pub fn base(&self) -> &[Item] {
        &self.base
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn has_array(&self) -> bool {
        self.array.is_some()
    }

    /// The ranks along the unique path if the tree has no branching.
    pub(crate) fn single_path(&self) -> Option<Vec<usize>> {
        let mut path = Vec::new();
        let mut at = ROOT;
        loop {
            match self.nodes[at].children.as_slice() {
                [] => return Some(path),
                [only] => {
                    at = *only;
                    path.push(self.nodes[at].rank);
                }
                _ => return None,
            }
        }
    }

    /// Every root-to-leaf path as `(items, count of the leaf-most node)`,
    /// useful for inspecting small trees.
    pub fn paths(&self) -> Vec<(Vec<Item>, Vec<u32>)> {
        let mut out = Vec::new();
        for (idx, node) in self.nodes.iter().enumerate().skip(1) {
            if node.children.is_empty() {
                let mut items = Vec::new();
                let mut counts = Vec::new();
                let mut at = idx;
                while at != ROOT {
                    items.push(self.items[self.nodes[at].rank]);
                    counts.push(self.nodes[at].count);
                    at = self.nodes[at].parent;
                }
                items.reverse();
                counts.reverse();
                out.push((items, counts));
            }
        }
        out
    }

    /// Ancestor ranks (nearest first) of node `idx`, excluding the root.
    pub(crate) fn ancestors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let mut at = self.nodes[idx].parent;
        std::iter::from_fn(move || {
            if at == ROOT || at == NO_PARENT {
                return None;
            }
            let r = self.nodes[at].rank;
            at = self.nodes[at].parent;
            Some(r)
        })
    }

    /// Ranks that are frequent together with `rank`, in `rank`'s conditional
    /// pattern base, with their conditional supports.
    pub(crate) fn tail(&self, rank: usize) -> Vec<(usize, u32)> {
        match &self.array {
            Some(arr) => (0..rank)
                .map(|lo| (lo, arr.get(rank, lo)))
                .filter(|&(_, c)| c >= self.min_support)
                .collect(),
            None => {
                let mut counts = vec![0u32; rank];
                for &node in &self.header[rank] {
                    let w = self.nodes[node].count;
                    for anc in self.ancestors(node) {
                        counts[anc] += w;
                    }
                }
                counts
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, c)| c >= self.min_support)
                    .collect()
            }
        }
    }

    /// Conditional FP-tree of `rank`: the prefix paths of every node holding
    /// `rank`, weighted by that node's count, restricted to frequent items.
    pub(crate) fn conditional(&self, rank: usize) -> FpTree {
        let paths: Vec<(Vec<Item>, u32)> = self.header[rank]
            .iter()
            .map(|&node| {
                let items = self.ancestors(node).map(|r| self.items[r]).collect();
                (items, self.nodes[node].count)
            })
            .collect();
        let mut base = self.base.clone();
        base.push(self.items[rank]);
        FpTree::from_weighted(
            paths.iter().map(|(p, w)| (p.as_slice(), *w)),
            base,
            self.min_support,
            self.array.is_some(),
        )
    }
}

/// Builds the initial FP-tree of a transaction database.
pub fn build_fp_tree(db: &[Transaction], min_support: u32) -> FpTree {
    build_fp_tree_with(db, min_support, true)
}

/// As [`build_fp_tree`], choosing whether pair-support arrays are maintained.
pub fn build_fp_tree_with(db: &[Transaction], min_support: u32, with_array: bool) -> FpTree {
    assert!(min_support >= 1, "minimum support must be at least 1");
    FpTree::from_weighted(db.iter().map(|t| (t.items(), 1)), Vec::new(), min_support, with_array)
}
