//! Prefix tree of maximal frequent itemsets, used for superset pruning.
//!
//! Itemsets are stored as increasing rank sequences in the rank space of the
//! FP-tree they belong to, so every item of a stored set that ranks before a
//! node sits on that node's root path.

const ROOT: usize = 0;

#[derive(Clone, Debug)]
struct MfiNode {
    rank: usize,
    parent: usize,
    children: Vec<usize>,
    /// Depth below the root; the root has level 0.
    level: usize,
}

#[derive(Clone, Debug)]
pub struct MfiTree {
    nodes: Vec<MfiNode>,
    header: Vec<Vec<usize>>,
    /// Sets inserted as results, in insertion order (seeds excluded).
    found: Vec<Vec<usize>>,
    found_empty: bool,
}

impl MfiTree {
    pub fn new(ranks: usize) -> Self {
        Self {
            nodes: vec![MfiNode {
                rank: usize::MAX,
                parent: usize::MAX,
                children: Vec::new(),
                level: 0,
            }],
            header: vec![Vec::new(); ranks],
            found: Vec::new(),
            found_empty: false,
        }
    }

    fn add_path(&mut self, ranks: &[usize]) {
        debug_assert!(ranks.windows(2).all(|w| w[0] < w[1]));
        let mut at = ROOT;
        for &r in ranks {
            let existing = self.nodes[at].children.iter().copied().find(|&c| self.nodes[c].rank == r);
            at = match existing {
                Some(c) => c,
                None => {
                    let idx = self.nodes.len();
                    let level = self.nodes[at].level + 1;
                    self.nodes.push(MfiNode {
                        rank: r,
                        parent: at,
                        children: Vec::new(),
                        level,
                    });
                    self.nodes[at].children.push(idx);
                    self.header[r].push(idx);
                    idx
                }
            };
        }
    }

    /// Records a newly discovered maximal itemset (sorted ranks).
    pub fn insert(&mut self, ranks: &[usize]) {
        if ranks.is_empty() {
            self.found_empty = true;
        } else {
            self.add_path(ranks);
        }
        self.found.push(ranks.to_vec());
    }

    /// Adds a projection of an itemset discovered elsewhere; it takes part in
    /// subset checks but is not reported by [`MfiTree::found`].
    pub(crate) fn insert_seed(&mut self, ranks: &[usize]) {
        if !ranks.is_empty() {
            self.add_path(ranks);
        }
    }

    /// Whether `ranks` (sorted, non-empty) is contained in a stored set.
    pub fn subset_checking(&self, ranks: &[usize]) -> bool {
        let Some((&last, rest)) = ranks.split_last() else {
            return !self.found.is_empty() || self.nodes.len() > 1;
        };
        'nodes: for &node in &self.header[last] {
            if self.nodes[node].level < ranks.len() {
                continue;
            }
            // Walk up the path; ancestor ranks decrease, so match `rest` from the back.
            let mut want = rest.iter().rev().peekable();
            let mut at = self.nodes[node].parent;
            while let Some(&&w) = want.peek() {
                if at == ROOT {
                    continue 'nodes;
                }
                let r = self.nodes[at].rank;
                if r == w {
                    want.next();
                } else if r < w {
                    continue 'nodes;
                }
                at = self.nodes[at].parent;
            }
            return true;
        }
        false
    }

    /// Root-path ranks (excluding `rank` itself) of every stored set containing `rank`.
    pub(crate) fn prefixes_of(&self, rank: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.header[rank].iter().map(move |&node| {
            let mut out = Vec::with_capacity(self.nodes[node].level);
            let mut at = self.nodes[node].parent;
            while at != ROOT {
                out.push(self.nodes[at].rank);
                at = self.nodes[at].parent;
            }
            out
        })
    }

    pub fn found(&self) -> &[Vec<usize>] {
        &self.found
    }

    pub fn found_empty(&self) -> bool {
        self.found_empty
    }
}
