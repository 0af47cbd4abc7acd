//! Search-tree counters shared by the branching solvers.

use std::ops::AddAssign;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Nodes at which the search split into two arms.
    pub branch_nodes: u64,
    /// Terminal evaluations.
    pub leaves: u64,
    pub max_depth: u64,
    /// Backdoor size of the input.
    pub initial_k: u64,
}

impl SolveStats {
    pub fn with_k(k: usize) -> SolveStats {
        SolveStats {
            initial_k: k as u64,
            ..SolveStats::default()
        }
    }

    /// Whether the leaf count respects the `2^k` budget.
    pub fn within_budget(&self) -> bool {
        self.initial_k >= 64 || self.leaves <= 1u64 << self.initial_k
    }

    pub(crate) fn leaf(&mut self, depth: u64) {
        self.leaves += 1;
        self.max_depth = self.max_depth.max(depth);
    }
}

/// Merges counters from independently solved subtrees.
impl AddAssign for SolveStats {
    fn add_assign(&mut self, rhs: SolveStats) {
        self.branch_nodes += rhs.branch_nodes;
        self.leaves += rhs.leaves;
        self.max_depth = self.max_depth.max(rhs.max_depth);
        self.initial_k = self.initial_k.max(rhs.initial_k);
    }
}
