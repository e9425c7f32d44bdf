//! Full quadtrees over the complete tree of depth `d_max`, their prior,
//! sampling and exhaustive enumeration.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::node::{all_nodes, check_depth, node_count, NodeId};

/// Largest `d_max` accepted by [`enumerate_models`]; the model count grows
/// as `T(d) = 1 + T(d-1)^4`.
pub const ENUMERATION_MAX_DEPTH: u32 = 3;

/// A full quadtree rooted at the root node: every node has four children or
/// none. Each leaf selects one packet subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadTreeModel {
    d_max: u32,
    inner: BTreeSet<NodeId>,
    leaves: BTreeSet<NodeId>,
}

impl QuadTreeModel {
    pub fn root_only(d_max: u32) -> Self {
        QuadTreeModel {
            d_max,
            inner: BTreeSet::new(),
            leaves: [NodeId::ROOT].into_iter().collect(),
        }
    }

    /// The complete tree with every leaf at `depth`.
    pub fn perfect(d_max: u32, depth: u32) -> Result<Self> {
        check_depth(d_max)?;
        if depth > d_max {
            return Err(Error::domain(format!(
                "perfect tree depth {depth} exceeds d_max = {d_max}"
            )));
        }
        let inner = all_nodes(d_max).take_while(|s| s.depth < depth);
        Self::from_inner_nodes(d_max, inner)
    }

    /// Builds the tree whose inner nodes are exactly `inner`. The set must be
    /// closed under taking parents and stay above depth `d_max`.
    pub fn from_inner_nodes(d_max: u32, inner: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        check_depth(d_max)?;
        let inner: BTreeSet<NodeId> = inner.into_iter().collect();
        for s in &inner {
            if s.depth >= d_max {
                return Err(Error::domain(format!(
                    "node {s} cannot be expanded: depth must be below d_max = {d_max}"
                )));
            }
            if let Some(p) = s.parent() {
                if !inner.contains(&p) {
                    return Err(Error::domain(format!(
                        "inner node {s} has a parent {p} that is not expanded"
                    )));
                }
            }
        }
        let leaves = if inner.is_empty() {
            [NodeId::ROOT].into_iter().collect()
        } else {
            inner
                .iter()
                .flat_map(|s| s.children())
                .filter(|c| !inner.contains(c))
                .collect()
        };
        Ok(QuadTreeModel {
            d_max,
            inner,
            leaves,
        })
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn leaves(&self) -> &BTreeSet<NodeId> {
        &self.leaves
    }

    pub fn inner(&self) -> &BTreeSet<NodeId> {
        &self.inner
    }

    pub fn is_leaf(&self, s: NodeId) -> bool {
        self.leaves.contains(&s)
    }

    pub fn is_inner(&self, s: NodeId) -> bool {
        self.inner.contains(&s)
    }

    pub fn contains(&self, s: NodeId) -> bool {
        self.is_leaf(s) || self.is_inner(s)
    }

    /// Depth of the deepest leaf.
    pub fn depth(&self) -> u32 {
        self.leaves.iter().map(|s| s.depth).max().unwrap_or(0)
    }

    /// Nodes in preorder (parent before its children, children in canonical order).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.inner.len() + self.leaves.len());
        let mut stack = vec![NodeId::ROOT];
        while let Some(s) = stack.pop() {
            out.push(s);
            if self.is_inner(s) {
                stack.extend(s.children().into_iter().rev());
            }
        }
        out
    }

    /// Leaves in depth-first order; this is the row order of the basis matrix.
    pub fn leaves_dfs(&self) -> Vec<NodeId> {
        self.preorder().into_iter().filter(|s| self.is_leaf(*s)).collect()
    }

    /// Preorder bit-string, `1` for an inner node and `0` for a leaf.
    pub fn to_bitstring(&self) -> String {
        self.preorder()
            .into_iter()
            .map(|s| if self.is_inner(s) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(d_max: u32, bits: &str) -> Result<Self> {
        check_depth(d_max)?;
        let chars: Vec<char> = bits.trim().chars().collect();
        let err = |pos: usize, msg: &str| Error::Parse {
            path: "<model>".into(),
            line: 1,
            column: pos + 1,
            message: msg.to_string(),
        };
        let mut inner = Vec::new();
        let mut stack = vec![NodeId::ROOT];
        let mut pos = 0;
        while let Some(s) = stack.pop() {
            match chars.get(pos) {
                Some('0') => {}
                Some('1') => {
                    if s.depth >= d_max {
                        return Err(err(pos, &format!("node {s} at depth d_max = {d_max} cannot be expanded")));
                    }
                    inner.push(s);
                    stack.extend(s.children().into_iter().rev());
                }
                Some(c) => return Err(err(pos, &format!("unexpected character {c:?}, expected '0' or '1'"))),
                None => return Err(err(pos, "bit-string ends before the tree is complete")),
            }
            pos += 1;
        }
        if pos != chars.len() {
            return Err(err(pos, "trailing characters after a complete tree"));
        }
        Self::from_inner_nodes(d_max, inner)
    }
}

impl fmt::Display for QuadTreeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Per-node branch probabilities `g_s`, the chance that node `s` expands.
/// Nodes at depth `d_max` always carry 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchProbabilities {
    d_max: u32,
    values: Vec<f64>,
}

impl BranchProbabilities {
    /// Broadcasts one value to every node above depth `d_max`.
    pub fn uniform(d_max: u32, g: f64) -> Result<Self> {
        Self::from_fn(d_max, |_| g)
    }

    /// Evaluates `f` on every node above depth `d_max`.
    pub fn from_fn(d_max: u32, mut f: impl FnMut(NodeId) -> f64) -> Result<Self> {
        check_depth(d_max)?;
        let mut values = vec![0.0; node_count(d_max)];
        for s in all_nodes(d_max).take_while(|s| s.depth < d_max) {
            let g = f(s);
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::domain(format!(
                    "branch probability for node {s} must lie in [0, 1], got {g}"
                )));
            }
            values[s.flat_index()] = g;
        }
        Ok(BranchProbabilities { d_max, values })
    }

    /// Per-node values indexed by [`NodeId::flat_index`]. Entries at depth
    /// `d_max` must be zero.
    pub fn from_values(d_max: u32, values: Vec<f64>) -> Result<Self> {
        check_depth(d_max)?;
        if values.len() != node_count(d_max) {
            return Err(Error::domain(format!(
                "expected {} branch probabilities, got {}",
                node_count(d_max),
                values.len()
            )));
        }
        for (k, &g) in values.iter().enumerate() {
            let s = NodeId::from_flat_index(k);
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::domain(format!(
                    "branch probability for node {s} must lie in [0, 1], got {g}"
                )));
            }
            if s.depth == d_max && g != 0.0 {
                return Err(Error::domain(format!(
                    "node {s} is at depth d_max and must have branch probability 0, got {g}"
                )));
            }
        }
        Ok(BranchProbabilities { d_max, values })
    }

    /// Degenerate probabilities under which `m` is the only tree with
    /// non-zero prior mass.
    pub fn forcing(m: &QuadTreeModel) -> Self {
        let mut values = vec![0.0; node_count(m.d_max())];
        for s in m.inner() {
            values[s.flat_index()] = 1.0;
        }
        BranchProbabilities {
            d_max: m.d_max(),
            values,
        }
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn get(&self, s: NodeId) -> f64 {
        self.values[s.flat_index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_same_depth(m: &QuadTreeModel, d_max: u32) {
    assert_eq!(
        m.d_max(),
        d_max,
        "tree and per-node parameters disagree on d_max"
    );
}

/// `ln p(m) = sum over leaves ln(1 - g_s) + sum over inner nodes ln g_s`.
pub fn ln_prior_probability(m: &QuadTreeModel, g: &BranchProbabilities) -> f64 {
    check_same_depth(m, g.d_max());
    let leaves: f64 = m.leaves().iter().map(|&s| (1.0 - g.get(s)).ln()).sum();
    let inner: f64 = m.inner().iter().map(|&s| g.get(s).ln()).sum();
    leaves + inner
}

pub fn prior_probability(m: &QuadTreeModel, g: &BranchProbabilities) -> f64 {
    ln_prior_probability(m, g).exp()
}

/// Draws a tree top-down: each node above depth `d_max` expands with
/// probability `g_s`, visited in preorder.
pub fn sample_model<R: Rng + ?Sized>(g: &BranchProbabilities, rng: &mut R) -> QuadTreeModel {
    let mut inner = Vec::new();
    let mut stack = vec![NodeId::ROOT];
    while let Some(s) = stack.pop() {
        if s.depth < g.d_max() && rng.gen_bool(g.get(s)) {
            inner.push(s);
            stack.extend(s.children().into_iter().rev());
        }
    }
    QuadTreeModel::from_inner_nodes(g.d_max(), inner).expect("sampled tree is a full quadtree")
}

/// Every full quadtree of depth at most `d_max`, ordered by preorder bit-string.
pub fn enumerate_models(d_max: u32) -> Result<Vec<QuadTreeModel>> {
    if d_max > ENUMERATION_MAX_DEPTH {
        return Err(Error::domain(format!(
            "refusing to enumerate trees for d_max = {d_max}: only d_max <= {ENUMERATION_MAX_DEPTH} is supported"
        )));
    }
    Ok(subtrees(NodeId::ROOT, d_max)
        .into_iter()
        .map(|inner| QuadTreeModel::from_inner_nodes(d_max, inner).expect("enumerated tree is valid"))
        .collect())
}

/// Inner-node lists of every full subtree rooted at `s`; the leaf-only
/// option comes first, then expansions with the first child varying slowest.
fn subtrees(s: NodeId, d_max: u32) -> Vec<Vec<NodeId>> {
    let mut out = vec![Vec::new()];
    if s.depth >= d_max {
        return out;
    }
    let mut combos: Vec<Vec<NodeId>> = vec![vec![s]];
    for c in s.children() {
        let options = subtrees(c, d_max);
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |opt| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(opt);
                    v
                })
            })
            .collect();
    }
    out.extend(combos);
    out
}

/// Mean depth of the leaves.
pub fn average_depth(m: &QuadTreeModel) -> f64 {
    let total: u32 = m.leaves().iter().map(|s| s.depth).sum();
    total as f64 / m.leaves().len() as f64
}

/// The complete tree expanded to `depth`.
pub fn perfect_tree(d_max: u32, depth: u32) -> Result<QuadTreeModel> {
    QuadTreeModel::perfect(d_max, depth)
}
