//! Binary regression trees with axis-aligned split rules and scalar leaves.
//!
//! Trees are stored as a flat arena for cheap mutation during sampling and
//! serialized as nested node records for the model artifact.

use serde::{Deserialize, Serialize};

/// One node of a tree: either a terminal leaf carrying a value or an interior
/// branch carrying a split rule. Rows with `x[var] < cut` route left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf { value: f64, depth: u16 },
    Branch { var: u32, cut: f64, left: u32, right: u32, depth: u16 },
}

/// A decision tree. The root is node 0; every interior node has exactly two
/// children, so any input routes to exactly one leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "NestedNode", into = "NestedNode")]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// A single-leaf tree with the given value.
    pub fn root_leaf(value: f64) -> Self {
        Tree { nodes: vec![Node::Leaf { value, depth: 0 }] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn is_root_only(&self) -> bool {
        self.nodes.len() == 1
    }

    /// Index of the leaf whose region contains `x`.
    #[inline]
    pub fn route(&self, x: &[f64]) -> u32 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { .. } => return idx as u32,
                Node::Branch { var, cut, left, right, .. } => {
                    idx = if x[*var as usize] < *cut { *left as usize } else { *right as usize };
                }
            }
        }
    }

    /// Value of the leaf whose region contains `x`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.nodes[self.route(x) as usize] {
            Node::Leaf { value, .. } => *value,
            Node::Branch { .. } => unreachable!("route returns a leaf"),
        }
    }

    #[inline]
    pub fn leaf_value(&self, idx: u32) -> f64 {
        match &self.nodes[idx as usize] {
            Node::Leaf { value, .. } => *value,
            Node::Branch { .. } => panic!("node {idx} is not a leaf"),
        }
    }

    pub fn set_leaf_value(&mut self, idx: u32, value: f64) {
        match &mut self.nodes[idx as usize] {
            Node::Leaf { value: v, .. } => *v = value,
            Node::Branch { .. } => panic!("node {idx} is not a leaf"),
        }
    }

    pub fn depth_of(&self, idx: u32) -> u16 {
        match &self.nodes[idx as usize] {
            Node::Leaf { depth, .. } | Node::Branch { depth, .. } => *depth,
        }
    }

    pub fn leaves(&self) -> Vec<u32> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, Node::Leaf { .. }))
            .map(|(i, _)| i as u32)
            .collect()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn n_branches(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    /// Branches whose children are both leaves; the only nodes a prune move
    /// can collapse.
    pub fn nog_nodes(&self) -> Vec<u32> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| match n {
                Node::Branch { left, right, .. } => {
                    matches!(self.nodes[*left as usize], Node::Leaf { .. })
                        && matches!(self.nodes[*right as usize], Node::Leaf { .. })
                }
                Node::Leaf { .. } => false,
            })
            .map(|(i, _)| i as u32)
            .collect()
    }

    pub fn parent_of(&self, idx: u32) -> Option<u32> {
        self.nodes
            .iter()
            .position(|n| match n {
                Node::Branch { left, right, .. } => *left == idx || *right == idx,
                Node::Leaf { .. } => false,
            })
            .map(|i| i as u32)
    }

    pub fn max_depth(&self) -> u16 {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Leaf { depth, .. } | Node::Branch { depth, .. } => *depth,
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest variable index used by any split rule.
    pub fn max_var_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Branch { var, .. } => Some(*var as usize),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    /// Add the tree's split-rule usage to per-variable counts.
    pub fn accumulate_split_counts(&self, counts: &mut [u32]) {
        for n in &self.nodes {
            if let Node::Branch { var, .. } = n {
                counts[*var as usize] += 1;
            }
        }
    }

    /// Replace leaf `leaf` by a branch with the given rule and two fresh
    /// zero-valued leaves.
    pub fn grow(&mut self, leaf: u32, var: u32, cut: f64) {
        let depth = self.depth_of(leaf);
        debug_assert!(matches!(self.nodes[leaf as usize], Node::Leaf { .. }));
        let left = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { value: 0.0, depth: depth + 1 });
        let right = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf { value: 0.0, depth: depth + 1 });
        self.nodes[leaf as usize] = Node::Branch { var, cut, left, right, depth };
    }

    /// Collapse nog node `nog` back to a leaf with the given value and drop
    /// the orphaned children from the arena.
    pub fn prune(&mut self, nog: u32, value: f64) {
        let depth = self.depth_of(nog);
        debug_assert!(matches!(self.nodes[nog as usize], Node::Branch { .. }));
        self.nodes[nog as usize] = Node::Leaf { value, depth };
        self.compact();
    }

    /// Rebuild the arena in preorder, dropping unreachable nodes. Keeps the
    /// serialized form canonical.
    pub fn compact(&mut self) {
        fn rec(old: &[Node], idx: usize, depth: u16, out: &mut Vec<Node>) -> u32 {
            let slot = out.len();
            out.push(Node::Leaf { value: 0.0, depth });
            match old[idx] {
                Node::Leaf { value, .. } => out[slot] = Node::Leaf { value, depth },
                Node::Branch { var, cut, left, right, .. } => {
                    let l = rec(old, left as usize, depth + 1, out);
                    let r = rec(old, right as usize, depth + 1, out);
                    out[slot] = Node::Branch { var, cut, left: l, right: r, depth };
                }
            }
            slot as u32
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        rec(&self.nodes, 0, 0, &mut nodes);
        self.nodes = nodes;
    }

    /// Leaf index per row of `x`, written into `out`.
    pub fn assign_rows(&self, x: &crate::data::Matrix, out: &mut Vec<u32>) {
        out.clear();
        out.extend((0..x.n_rows()).map(|i| self.route(x.row(i))));
    }
}

/// Nested (recursive) node record used for serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NestedNode {
    Branch { var: u32, cut: f64, left: Box<NestedNode>, right: Box<NestedNode> },
    Leaf { value: f64 },
}

impl From<Tree> for NestedNode {
    fn from(tree: Tree) -> Self {
        fn rec(nodes: &[Node], idx: usize) -> NestedNode {
            match &nodes[idx] {
                Node::Leaf { value, .. } => NestedNode::Leaf { value: *value },
                Node::Branch { var, cut, left, right, .. } => NestedNode::Branch {
                    var: *var,
                    cut: *cut,
                    left: Box::new(rec(nodes, *left as usize)),
                    right: Box::new(rec(nodes, *right as usize)),
                },
            }
        }
        rec(&tree.nodes, 0)
    }
}

impl From<NestedNode> for Tree {
    fn from(root: NestedNode) -> Self {
        fn rec(node: &NestedNode, depth: u16, out: &mut Vec<Node>) -> u32 {
            let slot = out.len();
            out.push(Node::Leaf { value: 0.0, depth });
            match node {
                NestedNode::Leaf { value } => out[slot] = Node::Leaf { value: *value, depth },
                NestedNode::Branch { var, cut, left, right } => {
                    let l = rec(left, depth + 1, out);
                    let r = rec(right, depth + 1, out);
                    out[slot] = Node::Branch { var: *var, cut: *cut, left: l, right: r, depth };
                }
            }
            slot as u32
        }
        let mut nodes = Vec::new();
        rec(&root, 0, &mut nodes);
        Tree { nodes }
    }
}
