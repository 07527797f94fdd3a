//! Planted plane trees: rooted planar trees whose root has exactly one child.
//!
//! A tree is stored as the preorder sequence of child counts of its non-root
//! vertices. The first entry belongs to the root's unique child, so a tree
//! with `N` edges has a code of length `N` whose entries sum to `N - 1`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;

/// Largest size accepted by [`enumerate_trees`] unless a cap is passed explicitly.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

/// An immutable planted plane tree.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct Tree {
    code: Vec<u32>,
    height: u32,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    code: Vec<u32>,
}

impl TryFrom<TreeRepr> for Tree {
    type Error = TreeError;

    fn try_from(repr: TreeRepr) -> Result<Self, TreeError> {
        Tree::decode(&repr.code)
    }
}

impl From<Tree> for TreeRepr {
    fn from(tree: Tree) -> Self {
        TreeRepr { code: tree.code }
    }
}

/// Walks a code in preorder, calling `visit(index, depth)` for every vertex.
///
/// Returns the index after which the tree closed, or `None` if it never did.
fn replay(code: &[u32], mut visit: impl FnMut(usize, u32)) -> Option<usize> {
    let mut open: Vec<u32> = Vec::new();
    for (i, &children) in code.iter().enumerate() {
        visit(i, open.len() as u32 + 1);
        if children > 0 {
            open.push(children);
            continue;
        }
        loop {
            match open.last_mut() {
                None => return Some(i),
                Some(top) => {
                    *top -= 1;
                    if *top == 0 {
                        open.pop();
                    } else {
                        break;
                    }
                }
            }
        }
    }
    None
}

impl Tree {
    /// Validates a preorder child-count sequence.
    pub fn decode(code: &[u32]) -> Result<Self, TreeError> {
        if code.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut height = 0;
        let closed = replay(code, |_, depth| height = height.max(depth));
        match closed {
            Some(i) if i + 1 == code.len() => Ok(Tree {
                code: code.to_vec(),
                height,
            }),
            Some(i) => Err(TreeError::MalformedCode { position: i + 1 }),
            None => Err(TreeError::MalformedCode {
                position: code.len(),
            }),
        }
    }

    pub(crate) fn from_parts(code: Vec<u32>, height: u32) -> Self {
        debug_assert_eq!(Tree::decode(&code).map(|t| t.height), Ok(height));
        Tree { code, height }
    }

    /// The tree with a single edge.
    pub fn single_edge() -> Self {
        Tree {
            code: vec![0],
            height: 1,
        }
    }

    /// The path with `n` edges.
    pub fn path(n: usize) -> Self {
        assert!(n >= 1, "a path needs at least one edge");
        let mut code = vec![1; n];
        code[n - 1] = 0;
        Tree {
            code,
            height: n as u32,
        }
    }

    /// The height-2 tree whose root child has `children` leaf children.
    pub fn star(children: u32) -> Self {
        assert!(children >= 1, "a star needs at least one leaf");
        let mut code = vec![0; children as usize + 1];
        code[0] = children;
        Tree { code, height: 2 }
    }

    pub fn code(&self) -> &[u32] {
        &self.code
    }

    /// Number of edges.
    pub fn size(&self) -> usize {
        self.code.len()
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Depth of every non-root vertex, in preorder.
    pub fn depths(&self) -> Vec<u32> {
        let mut depths = vec![0; self.code.len()];
        replay(&self.code, |i, d| depths[i] = d);
        depths
    }

    /// Number of vertices at distance exactly `depth` from the root.
    pub fn vertices_at_depth(&self, depth: u32) -> usize {
        let mut count = 0;
        replay(&self.code, |_, d| count += usize::from(d == depth));
        count
    }

    /// The subtree spanned by vertices within distance `r` of the root.
    pub fn ball(&self, r: u32) -> Tree {
        assert!(r >= 1, "ball radius must be at least 1");
        if r >= self.height {
            return self.clone();
        }
        let mut code = Vec::new();
        replay(&self.code, |i, d| match d.cmp(&r) {
            Ordering::Less => code.push(self.code[i]),
            Ordering::Equal => code.push(0),
            Ordering::Greater => {}
        });
        Tree { code, height: r }
    }

    /// The subtrees hanging below each depth-`r` vertex, left to right.
    ///
    /// Each branch is planted: its root edge is the edge entering the
    /// depth-`r` vertex. Requires `r <= height`.
    pub fn branches_at(&self, r: u32) -> Vec<Tree> {
        assert!(r >= 1 && r <= self.height, "branch depth out of range");
        let depths = self.depths();
        let mut branches = Vec::new();
        let mut i = 0;
        while i < self.code.len() {
            if depths[i] == r {
                let mut j = i + 1;
                while j < self.code.len() && depths[j] > r {
                    j += 1;
                }
                let height = depths[i..j].iter().max().copied().unwrap_or(r) - r + 1;
                branches.push(Tree::from_parts(self.code[i..j].to_vec(), height));
                i = j;
            } else {
                i += 1;
            }
        }
        branches
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree{:?}", self.code)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.code.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Trees order lexicographically by code.
impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.code.cmp(&other.code)
    }
}

/// Value of the ball ultrametric: either `0` or `1/r` for a positive integer `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distance {
    Zero,
    Reciprocal(u32),
}

impl Distance {
    pub fn value(self) -> f64 {
        match self {
            Distance::Zero => 0.0,
            Distance::Reciprocal(r) => 1.0 / f64::from(r),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Distance::Zero, Distance::Zero) => Ordering::Equal,
            (Distance::Zero, _) => Ordering::Less,
            (_, Distance::Zero) => Ordering::Greater,
            (Distance::Reciprocal(a), Distance::Reciprocal(b)) => b.cmp(a),
        }
    }
}

/// `inf { 1/r : B_r(a) = B_r(b) }`.
pub fn dist(a: &Tree, b: &Tree) -> Distance {
    if a == b {
        return Distance::Zero;
    }
    // Every planted tree has the same radius-1 ball.
    let top = a.height().max(b.height());
    let mut agree = 1;
    for r in 2..=top {
        if a.ball(r) != b.ball(r) {
            break;
        }
        agree = r;
    }
    Distance::Reciprocal(agree)
}

/// All trees with `n` edges in lexicographic code order, refusing `n > DEFAULT_ENUMERATION_CAP`.
pub fn enumerate_trees(n: usize) -> Result<Vec<Tree>, TreeError> {
    enumerate_trees_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_trees_capped(n: usize, cap: usize) -> Result<Vec<Tree>, TreeError> {
    if n == 0 {
        return Err(TreeError::Empty);
    }
    if n > cap {
        return Err(TreeError::CapExceeded { requested: n, cap });
    }
    let mut out = Vec::new();
    let mut code = Vec::with_capacity(n);
    extend_codes(n, 1, &mut code, &mut out);
    Ok(out)
}

fn extend_codes(n: usize, open: usize, code: &mut Vec<u32>, out: &mut Vec<Tree>) {
    let i = code.len();
    if i + 1 == n {
        // The last vertex must close the final open slot.
        if open == 1 {
            code.push(0);
            out.push(Tree::decode(code).expect("enumerated code is valid"));
            code.pop();
        }
        return;
    }
    let remaining_after = n - i - 1;
    // After this vertex: open - 1 + c slots, each needing at least one of the remaining vertices.
    let lo = if open == 1 { 1 } else { 0 };
    let hi = remaining_after + 1 - open;
    for c in lo..=hi {
        code.push(c as u32);
        extend_codes(n, open - 1 + c, code, out);
        code.pop();
    }
}

/// A finite tree `T0` of height `r` viewed as the centre of the metric ball
/// `{ T : B_r(T) = T0 }`, together with its depth-`r` grafting vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallSpec {
    base: Tree,
    graft_vertices: Vec<usize>,
}

impl BallSpec {
    pub fn new(base: Tree) -> Self {
        let r = base.height();
        let graft_vertices = base
            .depths()
            .into_iter()
            .enumerate()
            .filter_map(|(i, d)| (d == r).then_some(i))
            .collect();
        BallSpec {
            base,
            graft_vertices,
        }
    }

    pub fn base(&self) -> &Tree {
        &self.base
    }

    pub fn radius(&self) -> u32 {
        self.base.height()
    }

    /// Preorder indices of the depth-`r` vertices, left to right.
    pub fn graft_vertices(&self) -> &[usize] {
        &self.graft_vertices
    }

    /// Number of grafting vertices (`R`).
    pub fn arity(&self) -> usize {
        self.graft_vertices.len()
    }

    /// Identifies the root edge of the i-th branch with the edge entering the
    /// i-th grafting vertex.
    pub fn graft(&self, branches: &[Tree]) -> Result<Tree, TreeError> {
        if branches.len() != self.arity() {
            return Err(TreeError::ArityMismatch {
                expected: self.arity(),
                got: branches.len(),
            });
        }
        let extra: usize = branches.iter().map(|b| b.size() - 1).sum();
        let mut code = Vec::with_capacity(self.base.size() + extra);
        let mut next = branches.iter();
        let mut graft_at = self.graft_vertices.iter().peekable();
        for (i, &c) in self.base.code.iter().enumerate() {
            if graft_at.peek() == Some(&&i) {
                graft_at.next();
                let branch = next.next().expect("arity checked above");
                code.extend_from_slice(&branch.code);
            } else {
                code.push(c);
            }
        }
        let tallest = branches.iter().map(Tree::height).max().unwrap_or(1);
        Ok(Tree::from_parts(code, self.radius() - 1 + tallest))
    }
}

/// Free-function form of [`BallSpec::graft`].
pub fn graft(spec: &BallSpec, branches: &[Tree]) -> Result<Tree, TreeError> {
    spec.graft(branches)
}
