use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use uflow_oracles::{
    brute_force_rank1, compass_search, hopm, kron, permutation_sums, sorted_spectrum_bound,
    su2_zyz, CMat, HopmInit,
};

fn random_entries(len: usize, rng: &mut StdRng) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn random_hermitian(n: usize, rng: &mut StdRng) -> CMat {
    let m = DMatrix::from_vec(n, n, random_entries(n * n, rng));
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

#[test]
fn power_method_agrees_with_exhaustive_search() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..5 {
        let data = random_entries(8, &mut rng);
        let brute = brute_force_rank1(&[2, 2, 2], &data, 48).unwrap();
        let best = std::iter::once(HopmInit::Svd)
            .chain((0..8).map(HopmInit::Random))
            .map(|init| hopm(&[2, 2, 2], &data, 500, init).unwrap().overlap)
            .fold(f64::NEG_INFINITY, f64::max);
        // The grid search is a lower bound up to its spacing.
        assert!(brute.overlap <= best + 1e-9, "{} > {best}", brute.overlap);
        assert!(best - brute.overlap <= 1e-2 * best, "{best} vs {}", brute.overlap);
    }
}

#[test]
fn spectrum_bound_is_the_largest_permutation_sum() {
    let mut rng = StdRng::seed_from_u64(2);
    for n in 2..=5 {
        let a = random_hermitian(n, &mut rng);
        let c = random_hermitian(n, &mut rng);
        let eig = |m: &CMat| {
            let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(|x, y| y.total_cmp(x));
            v
        };
        let sums = permutation_sums(&eig(&a), &eig(&c));
        let bound = sorted_spectrum_bound(&a, &c).unwrap();
        assert!((sums[0] - bound).abs() <= 1e-12 * bound.abs().max(1.0));
        assert_eq!(sums.len(), (1..=n).product::<usize>());
    }
}

#[test]
fn compass_search_reaches_a_quadratic_minimum() {
    let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 1.2).powi(2) + 0.5;
    let (x, fx) = compass_search(f, &[0.0, 0.0], 0.5, 1e-9, 100_000);
    assert!((x[0] - 0.3).abs() < 1e-8 && (x[1] + 1.2).abs() < 1e-8);
    assert!((fx - 0.5).abs() < 1e-15);
}

#[test]
fn zyz_factors_compose_into_local_unitaries() {
    let u = kron(&su2_zyz(0.4, 1.1, -0.7), &su2_zyz(2.0, 0.3, 0.9));
    assert_eq!(u.shape(), (4, 4));
    let defect = (&u * u.adjoint() - CMat::identity(4, 4)).norm();
    assert!(defect < 1e-14);
    assert!((u.determinant() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
}
