use arborlab::local_limit::{
    ball_profile, brute_force_ball_mass, empirical_ball_mass, exact_ball_mass, exact_ball_mass_rational, lambda,
    lambda_partial_sum, uipt_ball_frequency,
};
use arborlab::{enumerate_trees, CountTable, Mode, RngStream, Tree};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn bases(max_size: usize, max_height: u32) -> Vec<Tree> {
    (1..=max_size)
        .flat_map(|n| enumerate_trees(n).unwrap())
        .filter(|t| t.height() <= max_height)
        .collect()
}

#[test]
fn cherry_at_six_matches_enumeration() {
    let table = CountTable::build(6, Mode::Exact).unwrap();
    let cherry = Tree::star(2);
    for alpha in [-1, 0, 2] {
        let dp = exact_ball_mass_rational(&cherry, 6, alpha, &table).unwrap();
        assert_eq!(dp, brute_force_ball_mass(&cherry, 6, alpha).unwrap());
    }
}

#[test]
fn every_small_base_matches_enumeration() {
    let table = CountTable::build(10, Mode::Exact).unwrap();
    let bases = bases(6, 3);
    for n in 1..=10 {
        for alpha in [-1, 0, 2] {
            for t0 in bases.iter().filter(|t| t.size() <= n) {
                let dp = exact_ball_mass_rational(t0, n, alpha, &table).unwrap();
                let bf = brute_force_ball_mass(t0, n, alpha).unwrap();
                assert_eq!(dp, bf, "T0 {:?}, N {n}, alpha {alpha}", t0.code());
            }
        }
    }
}

#[test]
fn scaled_masses_track_exact_ones() {
    let exact = CountTable::build(60, Mode::Exact).unwrap();
    let scaled = CountTable::build(60, Mode::Scaled).unwrap();
    for t0 in bases(5, 3) {
        for alpha in [-1.0, 0.0, 2.0] {
            let a = exact_ball_mass(&t0, 60, alpha, &exact).unwrap().exact_mass;
            let b = exact_ball_mass(&t0, 60, alpha, &scaled).unwrap().exact_mass;
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{:?}: {a} vs {b}", t0.code());
        }
    }
}

#[test]
fn masses_and_short_trees_sum_to_one() {
    // Every tree of height >= r has exactly one r-ball.
    let table = CountTable::build(11, Mode::Exact).unwrap();
    let n = 11;
    for r in 1..=3u32 {
        for alpha in [-1, 0, 2] {
            let mut total = BigRational::zero();
            for t0 in (1..=n).flat_map(|s| enumerate_trees(s).unwrap()).filter(|t| t.height() == r) {
                total += exact_ball_mass_rational(&t0, n, alpha, &table).unwrap();
            }
            let short = enumerate_trees(n).unwrap().iter().filter(|t| t.height() < r).count();
            let trees = enumerate_trees(n).unwrap();
            let z: BigRational = trees
                .iter()
                .map(|t| BigRational::from_integer(BigInt::from(t.height())).pow(alpha))
                .sum();
            let short_mass: BigRational = trees
                .iter()
                .filter(|t| t.height() < r)
                .map(|t| BigRational::from_integer(BigInt::from(t.height())).pow(alpha))
                .sum::<BigRational>()
                / z;
            assert!(short <= 1);
            assert_eq!(total + short_mass, BigRational::one(), "r {r}, alpha {alpha}");
        }
    }
}

#[test]
fn profiles_are_reusable_across_exponents() {
    let table = CountTable::build(300, Mode::Scaled).unwrap();
    let t0 = Tree::star(3);
    let profile = ball_profile(&t0, 300, &table).unwrap();
    for alpha in [-1.0, 0.0, 0.5, 2.0] {
        let direct = exact_ball_mass(&t0, 300, alpha, &table).unwrap().exact_mass;
        assert_eq!(profile.mass(alpha, &table).unwrap(), direct);
    }
}

#[test]
fn masses_approach_lambda_independently_of_alpha() {
    let table = CountTable::build(1000, Mode::Scaled).unwrap();
    for c in 1..=3u32 {
        let t0 = Tree::star(c);
        let limit = f64::from(c) * 0.5f64.powi(c as i32 + 1);
        let profile = ball_profile(&t0, 1000, &table).unwrap();
        let masses: Vec<f64> = [-1.0, 0.0, 2.0].iter().map(|&a| profile.mass(a, &table).unwrap()).collect();
        for m in &masses {
            assert!((m - limit).abs() < 0.01, "c {c}: {m} vs {limit}");
        }
        assert!((masses[0] - masses[2]).abs() < 0.02);
    }
}

#[test]
fn lambda_partial_sums() {
    assert_eq!(lambda_partial_sum(1, 1).partial_exact, "1");
    assert_eq!(lambda_partial_sum(2, 5).partial_exact, "13/16");
    // Direct sum over enumerated bases.
    for (r, cap) in [(2u32, 8usize), (3, 9)] {
        let direct: BigRational = bases(cap, r).iter().filter(|t| t.height() == r).map(lambda).sum();
        assert_eq!(lambda_partial_sum(r, cap).partial_exact, direct.to_string());
    }
    let mut last = 0.0;
    for cap in 2..=30 {
        let s = lambda_partial_sum(2, cap).partial;
        assert!(s >= last && s <= 1.0);
        last = s;
    }
    let s = lambda_partial_sum(3, 40);
    assert!(s.partial >= 0.999 && s.partial <= 1.0);
    assert!((s.partial + s.tail_estimate - 1.0).abs() < 1e-5);
}

#[test]
fn lambda_of_cherry_is_a_quarter() {
    assert_eq!(lambda(&Tree::star(2)), q(1, 4));
    assert_eq!(lambda(&Tree::path(5)), q(4, 1024));
}

#[test]
fn empirical_masses_cover_the_exact_value() {
    let table = CountTable::build(100, Mode::Exact).unwrap();
    let mut rng = RngStream::new(31, 0).rng();
    for t0 in [Tree::star(2), Tree::decode(&[2, 1, 0, 1, 0]).unwrap()] {
        let exact = exact_ball_mass(&t0, 100, 0.0, &table).unwrap();
        let emp = empirical_ball_mass(&t0, 100, 0.0, 20_000, &table, &mut rng).unwrap();
        let half = emp.ci_halfwidth.unwrap();
        assert!((emp.exact_mass - exact.exact_mass).abs() < half, "{} vs {}", emp.exact_mass, exact.exact_mass);
    }
}

#[test]
fn uipt_frequencies_cover_lambda() {
    let mut rng = RngStream::new(32, 0).rng();
    let t0 = Tree::decode(&[2, 1, 0, 1, 0]).unwrap();
    let rep = uipt_ball_frequency(&t0, 200_000, &mut rng).unwrap();
    assert!((rep.exact_mass - rep.lambda_value).abs() < rep.ci_halfwidth.unwrap());
}
