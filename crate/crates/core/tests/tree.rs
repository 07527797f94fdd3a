use std::sync::OnceLock;

use arborlab::sampler::sample_mu;
use arborlab::{dist, enumerate_trees, BallSpec, CountTable, Distance, Mode, RngStream, Tree};
use proptest::prelude::*;

const MAX_N: usize = 40;

fn table() -> &'static CountTable {
    static TABLE: OnceLock<CountTable> = OnceLock::new();
    TABLE.get_or_init(|| CountTable::build(MAX_N, Mode::Exact).unwrap())
}

fn any_tree() -> impl Strategy<Value = Tree> {
    (1..=MAX_N, any::<u64>(), prop::sample::select(vec![-1.0, 0.0, 2.0])).prop_map(|(n, seed, alpha)| {
        let mut rng = RngStream::new(seed, 0).rng();
        sample_mu(n, alpha, table(), &mut rng).unwrap()
    })
}

#[test]
fn enumeration_counts_are_catalan() {
    let catalan = [1usize, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
    for n in 1..=10 {
        let trees = enumerate_trees(n).unwrap();
        assert_eq!(trees.len(), catalan[n - 1]);
        assert!(trees.windows(2).all(|w| w[0] < w[1]));
    }
    assert!(enumerate_trees(13).is_err());
}

#[test]
fn invalid_codes_are_rejected() {
    assert!(Tree::decode(&[]).is_err());
    assert!(Tree::decode(&[0, 0]).is_err());
    assert!(Tree::decode(&[2, 0]).is_err());
    assert!(Tree::decode(&[1, 0, 1]).is_err());
}

#[test]
fn serde_uses_the_code() {
    let t = Tree::decode(&[2, 1, 0, 0]).unwrap();
    let json = serde_json::to_string(&t).unwrap();
    assert_eq!(json, r#"{"code":[2,1,0,0]}"#);
    assert_eq!(serde_json::from_str::<Tree>(&json).unwrap(), t);
    assert!(serde_json::from_str::<Tree>(r#"{"code":[3,0]}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn code_round_trips(t in any_tree()) {
        let again = Tree::decode(t.code()).unwrap();
        prop_assert_eq!(again.height(), t.height());
        prop_assert_eq!(t.code().iter().map(|&c| c as usize).sum::<usize>(), t.size() - 1);
        prop_assert_eq!(t.depths().into_iter().max().unwrap(), t.height());
    }

    #[test]
    fn balls_nest(t in any_tree(), r in 1u32..12, s in 1u32..12) {
        let b = t.ball(r);
        prop_assert_eq!(b.height(), r.min(t.height()));
        prop_assert_eq!(b.ball(s), t.ball(r.min(s)));
        prop_assert_eq!(b.ball(r), b.clone());
        prop_assert!(b.size() <= t.size());
    }

    #[test]
    fn grafting_undoes_branching(t in any_tree(), r in 1u32..8) {
        let r = r.min(t.height());
        let spec = BallSpec::new(t.ball(r));
        let branches = t.branches_at(r);
        prop_assert_eq!(branches.len(), spec.arity());
        let rebuilt = spec.graft(&branches).unwrap();
        prop_assert_eq!(rebuilt.height(), t.height());
        prop_assert_eq!(&rebuilt, &t);
        let extra: usize = branches.iter().map(|b| b.size() - 1).sum();
        prop_assert_eq!(spec.base().size() + extra, t.size());
    }

    #[test]
    fn dist_is_an_ultrametric(a in any_tree(), b in any_tree(), c in any_tree()) {
        prop_assert_eq!(dist(&a, &a), Distance::Zero);
        prop_assert_eq!(dist(&a, &b), dist(&b, &a));
        prop_assert_eq!(dist(&a, &b) == Distance::Zero, a == b);
        prop_assert!(dist(&a, &c) <= dist(&a, &b).max(dist(&b, &c)));
        if let Distance::Reciprocal(r) = dist(&a, &b) {
            prop_assert_eq!(a.ball(r), b.ball(r));
            prop_assert!(a.ball(r + 1) != b.ball(r + 1));
        }
    }
}
