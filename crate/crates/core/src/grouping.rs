//! Grouping of interaction patterns into superpatterns.
//!
//! A sequence interaction pattern fixes a suffix of the history and wildcards
//! the rest. Patterns expressed by exactly the same training cases appear
//! only through the sum of their coefficients in the likelihood, so they are
//! collected into a single "superpattern" carrying one compressed parameter.
//!
//! The construction walks a tree: starting from the all-wildcard pattern and
//! the full case set, each level partitions the current case set by the
//! observed state one position further back. A node with a single non-empty
//! child extends the current superpattern (same expression); a node with
//! several children emits the superpattern built so far and starts a fresh
//! one per child. Patterns expressed by no training case are dropped.

use crate::dataset::SequenceDataset;
use crate::error::{Result, SeqError};
use crate::stabledist::{sum_width, Law};
use std::collections::BTreeMap;
use std::fmt;

/// An interaction pattern over `O` history positions. Cell value 0 is a
/// wildcard; all wildcards precede the fixed suffix for sequence patterns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub cells: Vec<u32>,
}

impl Pattern {
    /// Number of fixed (nonzero) cells.
    pub fn order(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    /// Whether the pattern occurs in the given history.
    pub fn expressed_by(&self, history: &[u32]) -> bool {
        self.cells
            .iter()
            .zip(history)
            .all(|(&c, &h)| c == 0 || c == h)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "[")?;
        for c in &self.cells {
            write!(fm, "{c}")?;
        }
        write!(fm, "]")
    }
}

/// A maximal chain of nested patterns sharing one expression.
///
/// Members are the patterns `[0..0 A_t..A_O]` for `t` in `b..=f`, where the
/// stored suffix holds the values `A_b..A_O`. Position `O+1` denotes the
/// all-wildcard pattern, so `f = O+1` admits the order-0 member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperPattern {
    /// First fixed position of the longest member (1-based).
    pub b: usize,
    /// First fixed position of the shortest member; `O+1` for the
    /// all-wildcard member.
    pub f: usize,
    /// Fixed values at positions `b..=O`.
    pub suffix: Vec<u32>,
}

impl SuperPattern {
    /// Number of member patterns.
    pub fn n_members(&self) -> usize {
        self.f - self.b + 1
    }

    /// Interaction order of the member starting at `position`.
    pub fn member_order(&self, position: usize, order: usize) -> usize {
        order + 1 - position
    }

    /// Inclusive range of member orders, lowest first.
    pub fn order_range(&self, order: usize) -> (usize, usize) {
        (order + 1 - self.f, order + 1 - self.b)
    }

    /// The member pattern starting at `position` as an explicit [`Pattern`].
    pub fn member(&self, position: usize, order: usize) -> Pattern {
        let mut cells = vec![0u32; order];
        for p in position..=order {
            cells[p - 1] = self.suffix[p - self.b];
        }
        Pattern { cells }
    }
}

/// Result of matching a superpattern against a test history: how many
/// members (the shortest ones) the history expresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    /// Number of matched members, 0 if the mandatory suffix mismatches.
    pub t_g: usize,
    /// First fixed position of the longest matched member; only meaningful
    /// when `t_g > 0` (matched members are positions `b_prime..=f`).
    pub b_prime: usize,
}

/// The full compression structure for one training set.
#[derive(Debug, Clone)]
pub struct Grouping {
    super_patterns: Vec<SuperPattern>,
    /// Per group: sorted 0-based indices of the expressing training cases.
    expressions: Vec<Vec<u32>>,
    /// Per training case: the groups whose expression contains it.
    incidence: Vec<Vec<u32>>,
    order: usize,
    n_cases: usize,
}

impl Grouping {
    /// Assembles a grouping from raw parts without validation. Test support
    /// for constructing degenerate structures; real groupings come from
    /// [`build_grouping`].
    #[doc(hidden)]
    pub fn from_parts(
        super_patterns: Vec<SuperPattern>,
        expressions: Vec<Vec<u32>>,
        incidence: Vec<Vec<u32>>,
        order: usize,
    ) -> Self {
        let n_cases = incidence.len();
        Grouping {
            super_patterns,
            expressions,
            incidence,
            order,
            n_cases,
        }
    }

    pub fn n_groups(&self) -> usize {
        self.super_patterns.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_cases(&self) -> usize {
        self.n_cases
    }

    pub fn super_pattern(&self, g: usize) -> &SuperPattern {
        &self.super_patterns[g]
    }

    pub fn super_patterns(&self) -> &[SuperPattern] {
        &self.super_patterns
    }

    pub fn expression(&self, g: usize) -> &[u32] {
        &self.expressions[g]
    }

    /// Groups expressed by training case `i`.
    pub fn incident_groups(&self, i: usize) -> &[u32] {
        &self.incidence[i]
    }

    /// Total number of member patterns, i.e. the count of original
    /// (uncompressed) parameters per response class.
    pub fn count_original_parameters(&self) -> usize {
        self.super_patterns.iter().map(|sp| sp.n_members()).sum()
    }

    /// Compressed-to-original parameter count ratio.
    pub fn compression_ratio(&self) -> f64 {
        self.n_groups() as f64 / self.count_original_parameters() as f64
    }

    /// Groups that contain a member of the given interaction order.
    pub fn groups_with_order(&self, o: usize) -> impl Iterator<Item = usize> + '_ {
        self.super_patterns
            .iter()
            .enumerate()
            .filter_map(move |(g, sp)| {
                let (lo, hi) = sp.order_range(self.order);
                (lo <= o && o <= hi).then_some(g)
            })
    }
}

/// Builds the grouping for a training set.
///
/// Deterministic: children are visited in ascending state-value order, and a
/// parent superpattern is emitted before its descendants.
pub fn build_grouping(data: &SequenceDataset) -> Grouping {
    let order = data.order();
    let n = data.n_cases();
    let mut groups = Vec::new();
    let mut expressions: Vec<Vec<u32>> = Vec::new();

    // Work stack of (expression, suffix values for positions t+1..=O, f, t).
    // A stack entry with position t means: the chain so far has b = t + 1.
    struct Node {
        cases: Vec<u32>,
        suffix: Vec<u32>,
        f: usize,
        t: usize,
    }
    let mut stack = vec![Node {
        cases: (0..n as u32).collect(),
        suffix: Vec::new(),
        f: order + 1,
        t: order,
    }];

    while let Some(mut node) = stack.pop() {
        loop {
            if node.t == 0 {
                groups.push(SuperPattern {
                    b: 1,
                    f: node.f,
                    suffix: node.suffix,
                });
                expressions.push(node.cases);
                break;
            }
            let mut buckets: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for &i in &node.cases {
                let v = data.history(i as usize)[node.t - 1];
                buckets.entry(v).or_default().push(i);
            }
            if buckets.len() == 1 {
                // Single non-empty child: extend the chain one position back.
                let (v, _) = buckets.into_iter().next().unwrap();
                node.suffix.insert(0, v);
                node.t -= 1;
            } else {
                // Split: emit the chain so far, then descend into each child.
                groups.push(SuperPattern {
                    b: node.t + 1,
                    f: node.f,
                    suffix: node.suffix.clone(),
                });
                expressions.push(node.cases.clone());
                // Reverse order on the stack so children pop in ascending
                // value order.
                for (v, cases) in buckets.into_iter().rev() {
                    let mut suffix = Vec::with_capacity(node.suffix.len() + 1);
                    suffix.push(v);
                    suffix.extend_from_slice(&node.suffix);
                    stack.push(Node {
                        cases,
                        suffix,
                        f: node.t,
                        t: node.t - 1,
                    });
                }
                break;
            }
        }
    }

    let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (g, expr) in expressions.iter().enumerate() {
        for &i in expr {
            incidence[i as usize].push(g as u32);
        }
    }
    Grouping {
        super_patterns: groups,
        expressions,
        incidence,
        order,
        n_cases: n,
    }
}

/// Matches a superpattern against a test history.
///
/// If the history disagrees with the suffix anywhere in positions `f..=O`
/// nothing matches; otherwise the matched members are those whose fixed part
/// the history reproduces entirely, i.e. positions `b_prime..=f` where
/// `b_prime` is the lowest position from which history and suffix agree.
pub fn match_super_pattern(
    sp: &SuperPattern,
    history: &[u32],
    order: usize,
) -> Result<MatchResult> {
    if history.len() != order {
        return Err(SeqError::InvalidArgument(format!(
            "history length {} does not match order {order}",
            history.len()
        )));
    }
    let mut p = order + 1;
    while p > sp.b && history[p - 2] == sp.suffix[p - 1 - sp.b] {
        p -= 1;
    }
    if p > sp.f {
        Ok(MatchResult { t_g: 0, b_prime: 0 })
    } else {
        Ok(MatchResult {
            t_g: sp.f - p + 1,
            b_prime: p,
        })
    }
}

/// Prior width of a group sum: member at position `t` has order `O - t + 1`
/// and width `sigma[O - t + 1]`; widths aggregate by the stable law.
pub fn group_width(sp: &SuperPattern, sigma: &[f64], law: Law, order: usize) -> f64 {
    match law {
        Law::Gaussian => {
            let mut acc = 0.0;
            for t in sp.b..=sp.f {
                let w = sigma[order + 1 - t];
                acc += w * w;
            }
            acc.sqrt()
        }
        Law::Cauchy => (sp.b..=sp.f).map(|t| sigma[order + 1 - t]).sum(),
    }
}

/// Widths of the matched and unmatched member sub-sums for a split.
pub fn split_widths(
    sp: &SuperPattern,
    b_prime: usize,
    sigma: &[f64],
    law: Law,
    order: usize,
) -> (f64, f64) {
    let matched: Vec<f64> = (b_prime..=sp.f).map(|t| sigma[order + 1 - t]).collect();
    let unmatched: Vec<f64> = (sp.b..b_prime).map(|t| sigma[order + 1 - t]).collect();
    (sum_width(&matched, law), sum_width(&unmatched, law))
}
