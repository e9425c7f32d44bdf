//! Nodes of the complete quadtree of depth `d_max`.
//!
//! Every node `(i, j0, j1)` owns one packet subspace. Nodes are also given a
//! dense index (breadth-first, row-major within a depth) so that per-node
//! quantities can live in flat vectors.

use std::fmt;

use crate::error::{Error, Result};

/// Deepest tree this crate accepts. The complete tree at this depth has
/// about 4^13 / 3 nodes and a 4096x4096 signal.
pub const MAX_DEPTH: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub depth: u32,
    pub j0: u32,
    pub j1: u32,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId {
        depth: 0,
        j0: 0,
        j1: 0,
    };

    pub fn new(depth: u32, j0: u32, j1: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::domain(format!(
                "node depth {depth} exceeds the supported maximum {MAX_DEPTH}"
            )));
        }
        let width = 1u32 << depth;
        if j0 >= width || j1 >= width {
            return Err(Error::domain(format!(
                "node ({depth},{j0},{j1}): frequency indices must be below 2^{depth} = {width}"
            )));
        }
        Ok(NodeId { depth, j0, j1 })
    }

    pub fn is_root(&self) -> bool {
        self.depth == 0
    }

    /// The four children in canonical order (0,0), (0,1), (1,0), (1,1).
    pub fn children(&self) -> [NodeId; 4] {
        let d = self.depth + 1;
        let (a, b) = (2 * self.j0, 2 * self.j1);
        [
            NodeId { depth: d, j0: a, j1: b },
            NodeId { depth: d, j0: a, j1: b + 1 },
            NodeId { depth: d, j0: a + 1, j1: b },
            NodeId { depth: d, j0: a + 1, j1: b + 1 },
        ]
    }

    pub fn parent(&self) -> Option<NodeId> {
        if self.depth == 0 {
            None
        } else {
            Some(NodeId {
                depth: self.depth - 1,
                j0: self.j0 / 2,
                j1: self.j1 / 2,
            })
        }
    }

    /// Ancestors from the parent up to the root.
    pub fn ancestors(&self) -> impl Iterator<Item = NodeId> {
        std::iter::successors(self.parent(), |n| n.parent())
    }

    /// Position within its depth, row-major over `(j0, j1)`.
    pub fn index_in_depth(&self) -> usize {
        ((self.j0 as usize) << self.depth) + self.j1 as usize
    }

    /// Dense breadth-first index over the complete tree.
    pub fn flat_index(&self) -> usize {
        depth_offset(self.depth) + self.index_in_depth()
    }

    pub fn from_flat_index(index: usize) -> NodeId {
        let mut depth = 0u32;
        while depth_offset(depth + 1) <= index {
            depth += 1;
        }
        let local = index - depth_offset(depth);
        NodeId {
            depth,
            j0: (local >> depth) as u32,
            j1: (local & ((1usize << depth) - 1)) as u32,
        }
    }

    /// Key used in hyperparameter files: `"i/j0/j1"`.
    pub fn key(&self) -> String {
        format!("{}/{}/{}", self.depth, self.j0, self.j1)
    }

    pub fn parse_key(key: &str) -> Result<NodeId> {
        let parts: Vec<&str> = key.split('/').collect();
        let bad = || Error::domain(format!("node key {key:?} is not of the form \"i/j0/j1\""));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<u32> = parts
            .iter()
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        NodeId::new(nums[0], nums[1], nums[2])
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.depth, self.j0, self.j1)
    }
}

/// Number of nodes above `depth`, i.e. (4^depth - 1) / 3.
pub fn depth_offset(depth: u32) -> usize {
    ((1usize << (2 * depth)) - 1) / 3
}

/// Number of nodes in the complete quadtree of depth `d_max`.
pub fn node_count(d_max: u32) -> usize {
    depth_offset(d_max + 1)
}

/// All nodes of the complete tree, breadth-first (flat-index order).
pub fn all_nodes(d_max: u32) -> impl Iterator<Item = NodeId> {
    (0..node_count(d_max)).map(NodeId::from_flat_index)
}

pub(crate) fn check_depth(d_max: u32) -> Result<()> {
    if d_max > MAX_DEPTH {
        Err(Error::domain(format!(
            "d_max = {d_max} exceeds the supported maximum {MAX_DEPTH}"
        )))
    } else {
        Ok(())
    }
}
