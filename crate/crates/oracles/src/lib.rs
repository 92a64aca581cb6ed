//! Reference computations for checking `uflow`.
//!
//! Nothing here calls into `uflow`; every routine is a separate, usually
//! slower, route to the same numbers. Matrices are plain
//! `DMatrix<Complex64>` so results compare directly with the main crate.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleError(pub String);

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for OracleError {}

fn err<T>(msg: impl Into<String>) -> Result<T, OracleError> {
    Err(OracleError(msg.into()))
}

/// Rank-one approximation `X ≈ C·x¹⊗…⊗x^r`.
#[derive(Debug, Clone)]
pub struct Rank1 {
    pub coefficient: Complex64,
    pub factors: Vec<CVec>,
    /// `|⟨x¹⊗…⊗x^r, X⟩|²`.
    pub overlap: f64,
    /// `‖X − C·x¹⊗…⊗x^r‖²`.
    pub residual_sq: f64,
    /// Overlap after each full sweep (HOPM only).
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub enum HopmInit {
    /// Dominant left singular vector of each mode unfolding.
    Svd,
    Random(u64),
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_tensor(dims: &[usize], data: &[Complex64]) -> Result<(), OracleError> {
    if dims.len() < 2 || dims.iter().any(|&d| d < 2) {
        return err("tensor needs order ≥ 2 and every dimension ≥ 2");
    }
    if dims.iter().product::<usize>() != data.len() {
        return err("tensor data length does not match dims");
    }
    Ok(())
}

/// `Σ X_{i₁…i_r} Π_j conj(x^j_{i_j})` over all indices except mode `skip`,
/// returned as a vector over mode `skip`. With `skip = None` the full
/// contraction is returned as a length-one vector.
fn contract(dims: &[usize], data: &[Complex64], factors: &[CVec], skip: Option<usize>) -> CVec {
    let st = strides(dims);
    let len = skip.map_or(1, |k| dims[k]);
    let mut out = CVec::zeros(len);
    for (flat, &val) in data.iter().enumerate() {
        if val == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut w = val;
        let mut slot = 0;
        for (k, (&s, &d)) in st.iter().zip(dims).enumerate() {
            let i = (flat / s) % d;
            if Some(k) == skip {
                slot = i;
            } else {
                w *= factors[k][i].conj();
            }
        }
        out[slot] += w;
    }
    out
}

fn unfolding(dims: &[usize], data: &[Complex64], mode: usize) -> CMat {
    let st = strides(dims);
    let cols = data.len() / dims[mode];
    let mut m = CMat::zeros(dims[mode], cols);
    let mut next_col = vec![0usize; dims[mode]];
    for (flat, &val) in data.iter().enumerate() {
        let i = (flat / st[mode]) % dims[mode];
        m[(i, next_col[i])] = val;
        next_col[i] += 1;
    }
    m
}

fn dominant_left_vector(m: &CMat) -> CVec {
    let g = m * m.adjoint();
    let eig = SymmetricEigen::new(g);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    eig.eigenvectors.column(idx).into_owned()
}

fn gaussian(rng: &mut StdRng) -> f64 {
    // Box–Muller.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn finish(dims: &[usize], data: &[Complex64], factors: Vec<CVec>, history: Vec<f64>) -> Rank1 {
    let z = contract(dims, data, &factors, None)[0];
    let norm_sq: f64 = data.iter().map(|v| v.norm_sqr()).sum();
    let overlap = z.norm_sqr();
    Rank1 {
        coefficient: z,
        factors,
        overlap,
        residual_sq: norm_sq - overlap,
        history,
    }
}

/// Higher-order power method: cyclic updates
/// `x^k ← normalize(X ×_{j≠k} conj(x^j))`.
pub fn hopm(dims: &[usize], data: &[Complex64], iters: usize, init: HopmInit) -> Result<Rank1, OracleError> {
    check_tensor(dims, data)?;
    if data.iter().all(|v| v.norm() == 0.0) {
        return err("zero tensor");
    }
    let mut factors: Vec<CVec> = match init {
        HopmInit::Svd => (0..dims.len())
            .map(|k| dominant_left_vector(&unfolding(dims, data, k)))
            .collect(),
        HopmInit::Random(seed) => {
            let mut rng = StdRng::seed_from_u64(seed);
            dims.iter()
                .map(|&d| {
                    let v = CVec::from_fn(d, |_, _| Complex64::new(gaussian(&mut rng), gaussian(&mut rng)));
                    let n = v.norm();
                    v.unscale(n)
                })
                .collect()
        }
    };
    let mut history = Vec::with_capacity(iters);
    for _ in 0..iters {
        for k in 0..dims.len() {
            let v = contract(dims, data, &factors, Some(k));
            let n = v.norm();
            if n > 0.0 {
                factors[k] = v.unscale(n);
            }
        }
        history.push(contract(dims, data, &factors, None)[0].norm_sqr());
    }
    Ok(finish(dims, data, factors, history))
}

fn hermitian_eigs_desc(m: &CMat) -> Result<Vec<f64>, OracleError> {
    if !m.is_square() {
        return err("matrix is not square");
    }
    let asym = (m - m.adjoint()).norm();
    if asym > 1e-10 * m.norm().max(1.0) {
        return err("matrix is not Hermitian");
    }
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// `Σ_i λ_i↓(A)·λ_i↓(C)`, the maximum of `Re tr(C UAU†)` for Hermitian
/// `A`, `C`.
pub fn sorted_spectrum_bound(a: &CMat, c: &CMat) -> Result<f64, OracleError> {
    if a.shape() != c.shape() {
        return err("shape mismatch");
    }
    let la = hermitian_eigs_desc(a)?;
    let lc = hermitian_eigs_desc(c)?;
    Ok(la.iter().zip(&lc).map(|(x, y)| x * y).sum())
}

/// `Σ_i λ_{π(i)} μ_i` for every permutation `π`, sorted descending with
/// duplicates kept.
pub fn permutation_sums(lambda: &[f64], mu: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    permute(&mut idx, 0, &mut |p| {
        out.push(p.iter().zip(mu).map(|(&i, m)| lambda[i] * m).sum());
    });
    out.sort_by(|a: &f64, b| b.total_cmp(a));
    out
}

fn permute(idx: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        f(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, f);
        idx.swap(k, i);
    }
}

/// `(f(e^{hΩ}U) − f(e^{−hΩ}U)) / 2h`, with nalgebra's general `exp`.
pub fn fd_directional(f: impl Fn(&CMat) -> f64, u: &CMat, omega: &CMat, h: f64) -> f64 {
    let plus = (omega * Complex64::from(h)).exp() * u;
    let minus = (omega * Complex64::from(-h)).exp() * u;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// `(f(e^{hΩ}U) − 2f(U) + f(e^{−hΩ}U)) / h²`.
pub fn fd_second(f: impl Fn(&CMat) -> f64, u: &CMat, omega: &CMat, h: f64) -> f64 {
    let plus = (omega * Complex64::from(h)).exp() * u;
    let minus = (omega * Complex64::from(-h)).exp() * u;
    (f(&plus) - 2.0 * f(u) + f(&minus)) / (h * h)
}

/// Unit vector `(cos θ, e^{iφ} sin θ)`.
fn qubit(theta: f64, phi: f64) -> CVec {
    CVec::from_vec(vec![
        Complex64::new(theta.cos(), 0.0),
        Complex64::from_polar(theta.sin(), phi),
    ])
}

/// Exhaustive rank-one search for an order-`r` tensor with all dimensions 2.
///
/// The first `r − 2` factors run over a `grid × grid` lattice of
/// `(θ, φ) ∈ [0, π/2] × [0, 2π)`. For each choice the remaining 2×2 matrix
/// is maximized exactly by its top singular pair, so the only error is the
/// lattice spacing of the outer factors.
pub fn brute_force_rank1(dims: &[usize], data: &[Complex64], grid: usize) -> Result<Rank1, OracleError> {
    check_tensor(dims, data)?;
    if dims.iter().any(|&d| d != 2) {
        return err("brute force search needs every dimension equal to 2");
    }
    if grid < 24 {
        return err("grid resolution must be at least 24");
    }
    let r = dims.len();
    let outer = r - 2;
    let angles: Vec<(f64, f64)> = (0..grid)
        .flat_map(|i| {
            let theta = 0.5 * PI * i as f64 / (grid - 1) as f64;
            (0..grid).map(move |j| (theta, 2.0 * PI * j as f64 / grid as f64))
        })
        .collect();
    let candidates: Vec<CVec> = angles.iter().map(|&(t, p)| qubit(t, p)).collect();
    let total = candidates.len().pow(outer as u32);
    let mut best: Option<(f64, Vec<CVec>)> = None;
    let mut choice = vec![0usize; outer];
    for _ in 0..total {
        // M_{ab} = Σ X_{i…ab} Π conj(x^j_{i_j})
        let mut m = CMat::zeros(2, 2);
        for (flat, &val) in data.iter().enumerate() {
            let a = (flat >> 1) & 1;
            let b = flat & 1;
            let mut w = val;
            for (k, &c) in choice.iter().enumerate() {
                let bit = (flat >> (r - 1 - k)) & 1;
                w *= candidates[c][bit].conj();
            }
            m[(a, b)] += w;
        }
        let svd = m.clone().svd(true, true);
        let (idx, smax) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
        if best.as_ref().is_none_or(|b| smax * smax > b.0) {
            // u†Mv = σ, so x = u and y = conj(v) = (row of V†)ᵀ.
            let uvec = svd.u.as_ref().unwrap().column(idx).into_owned();
            let vvec = svd.v_t.as_ref().unwrap().row(idx).transpose().into_owned();
            let mut factors: Vec<CVec> = choice.iter().map(|&c| candidates[c].clone()).collect();
            factors.push(uvec);
            factors.push(vvec);
            best = Some((smax * smax, factors));
        }
        for slot in choice.iter_mut().rev() {
            *slot += 1;
            if *slot < candidates.len() {
                break;
            }
            *slot = 0;
        }
    }
    let (_, factors) = best.expect("grid is nonempty");
    Ok(finish(dims, data, factors, Vec::new()))
}

/// Derivative-free compass search minimizing `f` from `x0`.
///
/// Polls `x ± step·e_i`, moves to the first improvement, and halves `step`
/// when a full poll fails. Stops when `step < tol` or after `max_evals`.
pub fn compass_search(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step0: f64,
    tol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = step0;
    let mut evals = 1;
    while step >= tol && evals < max_evals {
        let mut improved = false;
        'poll: for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * step;
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// `exp(−iaZ/2)·exp(−ibY/2)·exp(−icZ/2)`, a ZYZ parametrization of `SU(2)`.
pub fn su2_zyz(a: f64, b: f64, c: f64) -> CMat {
    let rz = |t: f64| {
        CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, -t / 2.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::from_polar(1.0, t / 2.0),
            ],
        )
    };
    let (s, co) = (b / 2.0).sin_cos();
    let ry = CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(co, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(co, 0.0),
        ],
    );
    rz(a) * ry * rz(c)
}

/// Kronecker product, first factor slowest.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn w_tensor() -> Vec<Complex64> {
        let a = 1.0 / 3f64.sqrt();
        let mut d = vec![c(0.0); 8];
        d[1] = c(a);
        d[2] = c(a);
        d[4] = c(a);
        d
    }

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| c(x))))
    }

    fn random_unitary(rng: &mut StdRng, n: usize) -> CMat {
        let g = CMat::from_fn(n, n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
        g.qr().q()
    }

    #[test]
    fn hopm_recovers_rank_one() {
        let x = [c(0.6), Complex64::new(0.0, 0.8)];
        let y = [c(1.0 / 2f64.sqrt()), c(-1.0 / 2f64.sqrt())];
        let data: Vec<Complex64> = x.iter().flat_map(|a| y.iter().map(move |b| a * b * 3.0)).collect();
        let r = hopm(&[2, 2], &data, 5, HopmInit::Svd).unwrap();
        assert!((r.overlap - 9.0).abs() < 1e-12);
        assert!(r.residual_sq.abs() < 1e-12);
    }

    #[test]
    fn hopm_on_w_state() {
        let data = w_tensor();
        let poor = hopm(&[2, 2, 2], &data, 60, HopmInit::Svd).unwrap();
        assert!((poor.overlap - 1.0 / 3.0).abs() < 1e-9, "{}", poor.overlap);
        let best = (0..20)
            .map(|s| hopm(&[2, 2, 2], &data, 200, HopmInit::Random(s)).unwrap().overlap)
            .fold(0.0, f64::max);
        assert!((best - 4.0 / 9.0).abs() < 1e-6, "{best}");
    }

    #[test]
    fn hopm_history_is_monotone() {
        let mut rng = StdRng::seed_from_u64(3);
        let data: Vec<Complex64> = (0..24).map(|_| Complex64::new(gaussian(&mut rng), gaussian(&mut rng))).collect();
        for seed in 0..10 {
            let r = hopm(&[2, 3, 4], &data, 50, HopmInit::Random(seed)).unwrap();
            for w in r.history.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
        assert!(hopm(&[2, 2], &[c(0.0); 4], 3, HopmInit::Svd).is_err());
    }

    #[test]
    fn spectrum_bound_examples() {
        assert!((sorted_spectrum_bound(&diag(&[1.0, 2.0]), &diag(&[1.0, 2.0])).unwrap() - 5.0).abs() < 1e-12);
        assert!((sorted_spectrum_bound(&diag(&[2.0, 1.0]), &diag(&[3.0, 1.0])).unwrap() - 7.0).abs() < 1e-12);
        let nonherm = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(sorted_spectrum_bound(&nonherm, &diag(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn spectrum_bound_dominates_random_orbit() {
        let mut rng = StdRng::seed_from_u64(4);
        let n = 4;
        let herm = |rng: &mut StdRng| {
            let g = CMat::from_fn(n, n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
            (&g + g.adjoint()) * c(0.5)
        };
        let a = herm(&mut rng);
        let cm = herm(&mut rng);
        let bound = sorted_spectrum_bound(&a, &cm).unwrap();
        for _ in 0..1000 {
            let u = random_unitary(&mut rng, n);
            let v = (cm.adjoint() * &u * &a * u.adjoint()).trace().re;
            assert!(v <= bound + 1e-10);
        }
    }

    #[test]
    fn permutation_sums_enumerate_all() {
        let s = permutation_sums(&[3.0, 2.0, 1.0], &[1.0, 0.5, 0.0]);
        assert_eq!(s.len(), 6);
        assert!((s[0] - 4.0).abs() < 1e-15);
        assert!((s[5] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn finite_differences() {
        let u = CMat::identity(2, 2);
        let omega = CMat::from_row_slice(2, 2, &[Complex64::new(0.0, 1.0), c(0.0), c(0.0), Complex64::new(0.0, -1.0)]);
        assert_eq!(fd_directional(|_| 3.0, &u, &omega, 1e-3), 0.0);
        // f(e^{tΩ}) = Re of (1,1) entry = cos t: slope 0, curvature −1.
        let f = |m: &CMat| m[(0, 0)].re;
        assert!(fd_directional(f, &u, &omega, 1e-4).abs() < 1e-12);
        assert!((fd_second(f, &u, &omega, 1e-4) + 1.0).abs() < 1e-6);
        // g = Im of (1,1) entry = sin t: slope 1, error ~ h²/6.
        let g = |m: &CMat| m[(0, 0)].im;
        let e1 = (fd_directional(g, &u, &omega, 1e-2) - 1.0).abs();
        let e2 = (fd_directional(g, &u, &omega, 5e-3) - 1.0).abs();
        let slope = (e1 / e2).log2();
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn brute_force_known_values() {
        let w = brute_force_rank1(&[2, 2, 2], &w_tensor(), 96).unwrap();
        assert!((w.overlap - 4.0 / 9.0).abs() < 1e-3, "{}", w.overlap);
        assert!(w.overlap <= 4.0 / 9.0 + 1e-12);
        let mut ghz = vec![c(0.0); 8];
        ghz[0] = c(1.0 / 2f64.sqrt());
        ghz[7] = c(1.0 / 2f64.sqrt());
        let g = brute_force_rank1(&[2, 2, 2], &ghz, 48).unwrap();
        assert!((g.overlap - 0.5).abs() < 1e-3);
        let prod: Vec<Complex64> = (0..8).map(|i| if i == 5 { c(1.0) } else { c(0.0) }).collect();
        let p = brute_force_rank1(&[2, 2, 2], &prod, 24).unwrap();
        assert!((p.overlap - 1.0).abs() < 1e-12);
        assert!(brute_force_rank1(&[2, 3], &[c(0.0); 6], 24).is_err());
        assert!(brute_force_rank1(&[2, 2, 2], &prod, 10).is_err());
    }

    #[test]
    fn compass_search_finds_quadratic_minimum() {
        let (x, fx) = compass_search(|v| (v[0] - 1.0).powi(2) + 2.0 * (v[1] + 0.5).powi(2), &[0.0, 0.0], 1.0, 1e-9, 100_000);
        assert!((x[0] - 1.0).abs() < 1e-8 && (x[1] + 0.5).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    #[test]
    fn zyz_is_special_unitary() {
        let u = su2_zyz(0.3, 1.1, -2.0);
        assert!((&u * u.adjoint() - CMat::identity(2, 2)).norm() < 1e-14);
        assert!((u.determinant() - c(1.0)).norm() < 1e-14);
    }
}
