//! Exact sampling from the height-weighted measure, and direct samplers for
//! critical geometric Galton–Watson branches and balls of the uniform infinite
//! planar tree.
//!
//! A tree of size `N` with height `h` is drawn in two steps: the height from
//! `h^α E(N,h) / Z_N`, then a uniform tree of that exact height by a top-down
//! construction driven by exact counts. Trees with a given height all have the
//! same weight, so the composition has the exact law.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counting::{CountTable, CountValue, TableData, Triangle};
use crate::error::SampleError;
use crate::tree::Tree;

/// Default edge cap for a single Galton–Watson branch.
pub const DEFAULT_BGW_CAP: usize = 1_000_000;

/// Integer exponents up to this size use exact big-integer height weights.
const EXACT_EXPONENT_LIMIT: f64 = 64.0;

/// A reproducible random stream: `(seed, stream)` always yields the same draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn integer_exponent(alpha: f64) -> Option<i32> {
    (alpha.fract() == 0.0 && alpha.abs() <= EXACT_EXPONENT_LIMIT).then_some(alpha as i32)
}

/// Draws `h` with probability `h^α E(N,h) / Z_N(α)`.
///
/// Exact tables with an integer `α` draw from exact integer weights; everything
/// else uses a double-precision inverse CDF over the scaled row.
pub fn sample_height<R: Rng + ?Sized>(n: usize, alpha: f64, table: &CountTable, rng: &mut R) -> Result<usize, SampleError> {
    table.check_covers(n)?;
    if let (Some(tri), Some(a)) = (table.as_exact(), integer_exponent(alpha)) {
        let weights = exact_height_weights(tri, n, a);
        return Ok(pick_index(&weights, rng) + 1);
    }
    let weights: Vec<f64> = (1..=n).map(|h| (h as f64).powf(alpha) * table.e_scaled(n, h)).collect();
    Ok(pick_index(&weights, rng) + 1)
}

/// `h^α E(N,h)` over a common denominator, for `h = 1..=N`.
fn exact_height_weights(tri: &Triangle<BigUint>, n: usize, alpha: i32) -> Vec<BigUint> {
    let k = alpha.unsigned_abs();
    if alpha >= 0 {
        return (1..=n).map(|h| tri.e(n, h) * BigUint::from(h).pow(k)).collect();
    }
    let mut denom: BigUint = One::one();
    for h in 1..=n {
        if !Zero::is_zero(tri.e(n, h)) {
            denom = denom.lcm(&BigUint::from(h).pow(k));
        }
    }
    (1..=n)
        .map(|h| tri.e(n, h) * (&denom / BigUint::from(h).pow(k)))
        .collect()
}

/// Inverse-CDF draw over non-negative weights.
fn pick_index<T: CountValue, R: Rng + ?Sized>(weights: &[T], rng: &mut R) -> usize {
    let mut total = T::zero();
    for w in weights {
        total.add_assign_ref(w);
    }
    assert!(!total.is_zero(), "all weights are zero");
    let u = T::draw_below(&total, rng);
    let mut acc = T::zero();
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        acc.add_assign_ref(w);
        last = i;
        if u < acc {
            return i;
        }
    }
    // Only reachable through float rounding at the top end.
    last
}

/// One planted tree still to be built: `size` edges and height at most
/// `bound`, or exactly `bound` when `exact` is set.
#[derive(Clone, Copy, Debug)]
struct Pending {
    size: usize,
    bound: usize,
    exact: bool,
}

/// Count access shared by the exact and scaled tables. In scaled units every
/// product compared within one decision carries the same power of 4.
struct Counts<'a, T> {
    tri: &'a Triangle<T>,
}

impl<T: CountValue> Counts<'_, T> {
    /// Planted trees with `t` edges and height at most `k`.
    fn trees_le(&self, t: usize, k: usize) -> &T {
        self.tri.l(t, k)
    }

    fn trees_eq(&self, t: usize, k: usize) -> &T {
        self.tri.e(t, k)
    }

    /// Forests of total size `s` whose trees have height at most `k`.
    fn forests_le(&self, s: usize, k: usize) -> &T {
        self.tri.l(s + 1, k + 1)
    }

    /// Forests of total size `s` whose tallest tree has height exactly `k`.
    fn forests_eq(&self, s: usize, k: usize) -> &T {
        self.tri.e(s + 1, k + 1)
    }

    /// Splits a forest of size `s` into its trees, first to last.
    fn split_forest<R: Rng + ?Sized>(&self, mut s: usize, k: usize, mut exact: bool, rng: &mut R) -> Vec<Pending> {
        let mut trees = Vec::new();
        let mut weights: Vec<T> = Vec::with_capacity(2 * s);
        while s > 0 {
            weights.clear();
            // Options 0..s: first tree has t = i+1 edges. With `exact`, options
            // s..2s put a strictly shorter first tree before an exact-height rest.
            for t in 1..=s {
                let mut w = T::zero();
                if exact {
                    w.add_mul(self.trees_eq(t, k), self.forests_le(s - t, k));
                } else {
                    w.add_mul(self.trees_le(t, k), self.forests_le(s - t, k));
                }
                weights.push(w);
            }
            if exact {
                for t in 1..=s {
                    let mut w = T::zero();
                    if k >= 1 {
                        w.add_mul(self.trees_le(t, k - 1), self.forests_eq(s - t, k));
                    }
                    weights.push(w);
                }
            }
            let choice = pick_index(&weights, rng);
            if choice < s {
                let t = choice + 1;
                trees.push(Pending {
                    size: t,
                    bound: k,
                    exact,
                });
                exact = false;
                s -= t;
            } else {
                let t = choice - s + 1;
                trees.push(Pending {
                    size: t,
                    bound: k - 1,
                    exact: false,
                });
                s -= t;
            }
        }
        trees
    }

    fn build<R: Rng + ?Sized>(&self, root: Pending, rng: &mut R) -> Tree {
        let mut code = Vec::with_capacity(root.size);
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            let children = self.split_forest(node.size - 1, node.bound.saturating_sub(1), node.exact, rng);
            code.push(children.len() as u32);
            stack.extend(children.into_iter().rev());
        }
        Tree::decode(&code).expect("construction yields a valid code")
    }
}

fn check_class<T: CountValue>(tri: &Triangle<T>, n: usize, h: usize) -> Result<(), SampleError> {
    if h == 0 || h > n || tri.e(n, h).is_zero() {
        return Err(SampleError::EmptyClass { n, h });
    }
    Ok(())
}

/// A uniform tree among those with `n` edges and height exactly `h`.
pub fn sample_uniform_given_height<R: Rng + ?Sized>(
    n: usize,
    h: usize,
    table: &CountTable,
    rng: &mut R,
) -> Result<Tree, SampleError> {
    table.check_covers(n)?;
    let root = Pending {
        size: n,
        bound: h,
        exact: true,
    };
    match table.data() {
        TableData::Exact(tri) => {
            check_class(tri, n, h)?;
            Ok(Counts { tri }.build(root, rng))
        }
        TableData::Scaled(tri) => {
            check_class(tri, n, h)?;
            Ok(Counts { tri }.build(root, rng))
        }
    }
}

/// Rejection oracle: uniform over height at most `h`, retried until the height is exactly `h`.
pub fn sample_given_height_by_rejection<R: Rng + ?Sized>(
    n: usize,
    h: usize,
    table: &CountTable,
    rng: &mut R,
) -> Result<Tree, SampleError> {
    table.check_covers(n)?;
    let root = Pending {
        size: n,
        bound: h,
        exact: false,
    };
    if table.e_scaled(n, h.min(n)) == 0.0 || h == 0 || h > n {
        return Err(SampleError::EmptyClass { n, h });
    }
    loop {
        let tree = match table.data() {
            TableData::Exact(tri) => Counts { tri }.build(root, rng),
            TableData::Scaled(tri) => Counts { tri }.build(root, rng),
        };
        if tree.height() as usize == h {
            return Ok(tree);
        }
    }
}

/// A tree with `n` edges drawn with probability `h(T)^α / Z_N(α)`.
pub fn sample_mu<R: Rng + ?Sized>(n: usize, alpha: f64, table: &CountTable, rng: &mut R) -> Result<Tree, SampleError> {
    let h = sample_height(n, alpha, table, rng)?;
    sample_uniform_given_height(n, h, table, rng)
}

/// `P(n) = 2^{-n-1}` for `n >= 0`: the number of fair-coin failures before the first success.
pub fn sample_geometric<R: RngCore + ?Sized>(rng: &mut R) -> u32 {
    let mut total = 0;
    loop {
        let bits = rng.next_u64();
        if bits != 0 {
            return total + bits.trailing_zeros();
        }
        total += 64;
    }
}

/// Spine degree `k >= 2` with `P(k) = (k-1) 2^{-k}`, i.e. `2 + G_1 + G_2`.
pub fn sample_spine_degree<R: RngCore + ?Sized>(rng: &mut R) -> u32 {
    2 + sample_geometric(rng) + sample_geometric(rng)
}

/// Preorder code of a Galton–Watson branch, cut below relative depth `depth_limit`.
fn bgw_code<R: RngCore + ?Sized>(
    rng: &mut R,
    depth_limit: Option<u32>,
    cap: usize,
    code: &mut Vec<u32>,
) -> Result<(), SampleError> {
    // Depths of vertices whose offspring are not drawn yet, innermost last.
    let mut stack: Vec<u32> = vec![1];
    let start = code.len();
    while let Some(depth) = stack.pop() {
        if code.len() - start >= cap {
            return Err(SampleError::Truncated {
                partial_size: code.len() - start,
            });
        }
        if depth_limit.is_some_and(|d| depth >= d) {
            code.push(0);
            continue;
        }
        let k = sample_geometric(rng);
        code.push(k);
        stack.extend(std::iter::repeat_n(depth + 1, k as usize));
    }
    Ok(())
}

/// A planted critical Galton–Watson tree with offspring law `2^{-n-1}`.
pub fn sample_bgw_branch<R: RngCore + ?Sized>(rng: &mut R, size_cap: usize) -> Result<Tree, SampleError> {
    let mut code = Vec::new();
    bgw_code(rng, None, size_cap.max(1), &mut code)?;
    Ok(Tree::decode(&code).expect("valid preorder code"))
}

/// The ball `B_r` of the uniform infinite planar tree.
///
/// The spine starts at the root's only child. Each spine vertex above depth
/// `r` has `k - 1` children, `k ~ (k-1)2^{-k}`; the spine continues through
/// a uniformly chosen child and the others carry independent Galton–Watson
/// branches, generated only down to depth `r`.
pub fn sample_uipt_ball<R: RngCore + ?Sized>(r: u32, rng: &mut R) -> Result<Tree, SampleError> {
    sample_uipt_ball_capped(r, rng, DEFAULT_BGW_CAP)
}

pub fn sample_uipt_ball_capped<R: RngCore + ?Sized>(r: u32, rng: &mut R, size_cap: usize) -> Result<Tree, SampleError> {
    assert!(r >= 1, "ball radius must be at least 1");
    // Per spine level: child count and the codes of the branches left and right of the spine.
    let mut levels: Vec<(u32, Vec<u32>, Vec<u32>)> = Vec::new();
    let mut total = 1usize;
    for depth in 1..r {
        let children = sample_spine_degree(rng) - 1;
        let spine_slot = rng.random_range(0..children);
        let mut left = Vec::new();
        let mut right = Vec::new();
        for slot in 0..children {
            if slot == spine_slot {
                continue;
            }
            let target = if slot < spine_slot { &mut left } else { &mut right };
            let before = target.len();
            bgw_code(rng, Some(r - depth), size_cap.saturating_sub(total), target).map_err(|_| {
                SampleError::Truncated {
                    partial_size: total + target.len() - before,
                }
            })?;
            total += target.len() - before;
        }
        total += 1;
        levels.push((children, left, right));
    }
    let mut code = vec![0u32];
    for (children, left, right) in levels.into_iter().rev() {
        let mut next = Vec::with_capacity(1 + left.len() + code.len() + right.len());
        next.push(children);
        next.extend(left);
        next.extend(code);
        next.extend(right);
        code = next;
    }
    Ok(Tree::decode(&code).expect("valid preorder code"))
}
