//! FPmax*: maximal frequent itemset mining by pattern growth with superset
//! pruning against conditional MFI-trees.

use super::encoding::{Item, Transaction};
use super::fptree::{build_fp_tree_with, FpTree};
use super::mfitree::MfiTree;

/// Mines `tree` into `mfi`, whose rank space must be `tree`'s.
///
/// Header items are processed from least to most frequent, so every maximal
/// set is found before any of its subsets could be inserted.
pub fn fpmax(tree: &FpTree, mfi: &mut MfiTree) {
    if let Some(path) = tree.single_path() {
        mfi.insert(&path);
        return;
    }
    let mut candidate = Vec::new();
    for rank in (0..tree.items.len()).rev() {
        let tail = tree.tail(rank);
        candidate.clear();
        candidate.extend(tail.iter().map(|&(r, _)| r));
        candidate.push(rank);
        if mfi.subset_checking(&candidate) {
            continue;
        }

        let cond = tree.conditional(rank);
        debug_assert_eq!(cond.items.len(), tail.len());

        let mut cond_mfi = MfiTree::new(cond.items.len());
        for prefix in mfi.prefixes_of(rank) {
            let mut projected: Vec<usize> = prefix
                .iter()
                .filter_map(|&r| cond.rank_of.get(&tree.items[r]).copied())
                .collect();
            projected.sort_unstable();
            cond_mfi.insert_seed(&projected);
        }

        fpmax(&cond, &mut cond_mfi);

        for set in cond_mfi.found() {
            let mut lifted: Vec<usize> = set.iter().map(|&r| tree.rank_of[&cond.items[r]]).collect();
            lifted.push(rank);
            lifted.sort_unstable();
            mfi.insert(&lifted);
        }
    }
}

/// All non-empty maximal frequent itemsets of `db` at absolute support
/// `min_support`, each sorted by item id, in discovery order.
pub fn maximal_itemsets(db: &[Transaction], min_support: u32) -> Vec<Vec<Item>> {
    maximal_itemsets_with(db, min_support, true)
}

/// As [`maximal_itemsets`], choosing whether the pair-count array fast path is used.
pub fn maximal_itemsets_with(db: &[Transaction], min_support: u32, with_array: bool) -> Vec<Vec<Item>> {
    let tree = build_fp_tree_with(db, min_support, with_array);
    let mut mfi = MfiTree::new(tree.items.len());
    fpmax(&tree, &mut mfi);
    mfi.found()
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let mut items: Vec<Item> = s.iter().map(|&r| tree.items[r]).collect();
            items.sort_unstable();
            items
        })
        .collect()
}
