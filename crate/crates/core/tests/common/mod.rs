#![allow(dead_code)]

use std::collections::HashMap;

use arborlab::{enumerate_trees, Tree};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson goodness-of-fit p-value. Cells with expected count below 5 are
/// pooled into one cell.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e < 5.0 {
            pooled_obs += o as f64;
            pooled_exp += e;
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    } else if pooled_obs > 0.0 {
        return 0.0;
    }
    if cells < 2 {
        return 1.0;
    }
    let dist = ChiSquared::new((cells - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

/// Exact probabilities `h(T)^α / Z_N` for every tree of size `n`, in enumeration order.
pub fn mu_probabilities(n: usize, alpha: f64) -> (Vec<Tree>, Vec<f64>) {
    let trees = enumerate_trees(n).unwrap();
    let weights: Vec<f64> = trees.iter().map(|t| (t.height() as f64).powf(alpha)).collect();
    let z: f64 = weights.iter().sum();
    (trees, weights.into_iter().map(|w| w / z).collect())
}

/// Tallies draws against a fixed list of trees.
pub fn tally(trees: &[Tree], draws: impl IntoIterator<Item = Tree>) -> Vec<u64> {
    let index: HashMap<&Tree, usize> = trees.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut counts = vec![0u64; trees.len()];
    for t in draws {
        counts[*index.get(&t).expect("draw outside the support")] += 1;
    }
    counts
}

/// `|observed - p| <= 3 sqrt(p(1-p)/n)`.
pub fn within_three_sigma(hits: u64, draws: u64, p: f64) -> bool {
    let freq = hits as f64 / draws as f64;
    (freq - p).abs() <= 3.0 * (p * (1.0 - p) / draws as f64).sqrt()
}
