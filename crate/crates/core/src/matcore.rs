//! Dense complex linear algebra kernel.
//!
//! Everything in the crate is expressed in terms of `DMatrix<Complex64>`
//! plus three checked wrappers:
//!
//! * [`UnitaryMatrix`]: a group element, `‖UU† − 1‖_F ≤ 1e-10·N`.
//! * [`AlgebraElement`]: a skew-Hermitian matrix, i.e. an element of `𝔲(N)`.
//!   Riemannian gradients are always handled through their right-translated
//!   pullback `Ω = grad f(U)·U†`, which lives here.
//! * [`PureStateVector`]: a unit vector in `ℂᴺ`.
//!
//! The geometry on the group is the bi-invariant metric
//! `⟨ΩU, ΞU⟩ = Re tr(Ω†Ξ)`, so the only inner product needed is the
//! Hilbert–Schmidt one, see [`hs_inner`] and [`re_inner`].
//!
//! The `vec` operator stacks columns, which gives the identity
//! `vec(V·Y·Wᵀ) = (W ⊗ V)·vec(Y)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_err, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance used when accepting a matrix as skew-Hermitian.
pub const SKEW_TOL: f64 = 1e-12;
/// Per-dimension tolerance used when accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// The deterministic generator used for every seeded operation.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(dim_err(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

fn ensure_same_shape(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(dim_err(format!(
            "operands have shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Checks that every entry is finite.
pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("matrix has non-finite entries".into()))
    }
}

/// `(M + M†)/2`.
pub fn herm_part(m: &CMatrix) -> Result<CMatrix> {
    ensure_square(m, "herm_part input")?;
    Ok((m + m.adjoint()).scale(0.5))
}

/// `(M − M†)/2`, the `[·]_S` operation.
///
/// The result is skew-Hermitian bit for bit: entry `(j,i)` is computed as the
/// negated conjugate of entry `(i,j)`.
pub fn skew_part(m: &CMatrix) -> Result<AlgebraElement> {
    let n = ensure_square(m, "skew_part input")?;
    Ok(AlgebraElement(skew_raw(m, n)))
}

fn skew_raw(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = Complex64::new(0.0, m[(i, i)].im);
        for j in (i + 1)..n {
            let z = (m[(i, j)] - m[(j, i)].conj()) * 0.5;
            out[(i, j)] = z;
            out[(j, i)] = -z.conj();
        }
    }
    out
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_square(a, "commutator operand")?;
    ensure_same_shape(a, b)?;
    Ok(a * b - b * a)
}

/// Hilbert–Schmidt inner product `tr(A†B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    ensure_same_shape(a, b)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `Re tr(A†B)`, the real scalar product on `gl(N, ℂ)` viewed as a real space.
///
/// Shapes are only checked in debug builds; this sits in every inner loop.
pub fn re_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// Frobenius norm `sqrt(Re tr(A†A))`.
pub fn fro_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product; `A` indexes the slow (outer) block.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of column vectors, first factor slowest.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Column-stacking `vec`.
pub fn vec(m: &CMatrix) -> CVector {
    // nalgebra stores column-major, so the storage order is already vec(M).
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if rows * cols != v.len() {
        return Err(dim_err(format!(
            "cannot reshape a vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

/// `‖MM† − 1‖_F`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut p = m * m.adjoint();
    for i in 0..n {
        p[(i, i)] -= ONE;
    }
    fro_norm(&p)
}

/// A skew-Hermitian matrix `Ω† = −Ω`, element of the Lie algebra `𝔲(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement(CMatrix);

impl AlgebraElement {
    /// Wraps `m` after checking `‖Ω + Ω†‖_F ≤ 1e-12·‖Ω‖_F`.
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m, "algebra element")?;
        ensure_finite(&m)?;
        let scale = fro_norm(&m);
        let asym = fro_norm(&(&m + m.adjoint()));
        if asym > SKEW_TOL * scale.max(f64::MIN_POSITIVE) && asym > 0.0 {
            return Err(Error::Contract(format!(
                "matrix is not skew-Hermitian: ‖Ω+Ω†‖ = {asym:.3e}, ‖Ω‖ = {scale:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix the caller has built to be skew-Hermitian.
    pub(crate) fn from_raw(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    /// `i·H` for a Hermitian `H`.
    pub fn from_hermitian(h: &CMatrix) -> Result<Self> {
        let n = ensure_square(h, "hermitian input")?;
        let hm = herm_part(h)?;
        if fro_norm(&(h - &hm)) > SKEW_TOL * fro_norm(h).max(f64::MIN_POSITIVE) {
            return Err(Error::Contract("matrix is not Hermitian".into()));
        }
        Ok(Self(skew_raw(&hm.map(|z| z * I), n)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn norm(&self) -> f64 {
        fro_norm(&self.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `|tr Ω| ≤ 1e-12·‖Ω‖`.
    pub fn is_traceless(&self) -> bool {
        self.trace().norm() <= SKEW_TOL * self.norm().max(f64::MIN_POSITIVE)
    }

    /// Re tr(Ω†Ξ).
    pub fn inner(&self, other: &AlgebraElement) -> f64 {
        re_inner(&self.0, &other.0)
    }

    /// `[Ω, Ξ]`, which stays in the algebra.
    pub fn bracket(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        let c = commutator(&self.0, &other.0)?;
        let n = c.nrows();
        Ok(Self(skew_raw(&c, n)))
    }
}

impl std::ops::Add<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(&self.0 - &rhs.0)
    }
}

/// An element of `U(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    /// Wraps `m` after checking `‖MM† − 1‖_F ≤ 1e-10·N`.
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = ensure_square(&m, "unitary matrix")?;
        ensure_finite(&m)?;
        let d = unitarity_defect(&m);
        if d > UNITARY_TOL * n as f64 {
            return Err(Error::Contract(format!(
                "matrix is not unitary: ‖UU†−1‖ = {d:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Unchecked wrap, for finite-difference probes in tests.
    #[cfg(test)]
    pub(crate) fn from_raw(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(dim_err("unitary factors differ in size"));
        }
        Ok(Self(&self.0 * &other.0))
    }

    /// `U A U†`.
    pub fn conjugate(&self, a: &CMatrix) -> Result<CMatrix> {
        if a.shape() != self.0.shape() {
            return Err(dim_err("conjugated matrix differs in size"));
        }
        Ok(&self.0 * a * self.0.adjoint())
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }

    /// Kronecker product of group elements.
    pub fn kron(&self, other: &UnitaryMatrix) -> Self {
        Self(kron(&self.0, &other.0))
    }
}

/// A unit vector in `ℂᴺ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector(CVector);

impl PureStateVector {
    /// Wraps `v` after checking `|‖v‖ − 1| ≤ 1e-12`.
    pub fn new(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!(
                "state vector is not normalized: ‖x‖ = {norm}"
            )));
        }
        Ok(Self(v))
    }

    /// Divides `v` by its norm.
    pub fn normalized(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(Self(v.unscale(norm)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn into_vector(self) -> CVector {
        self.0
    }

    /// The rank-one projector `x x†`.
    pub fn density(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

/// `exp(Ω)` for skew-Hermitian `Ω`.
///
/// Diagonalizes the Hermitian matrix `iΩ = V Λ V†` and returns
/// `V e^{−iΛ} V†`, which is unitary to working precision whatever the norm
/// of `Ω`. If the eigensolver fails to converge the Taylor
/// scaling-and-squaring path is used instead.
pub fn expm_skew(omega: &AlgebraElement) -> UnitaryMatrix {
    let n = omega.dim();
    if omega.norm() == 0.0 {
        return UnitaryMatrix::identity(n);
    }
    let h = omega.matrix().map(|z| z * I);
    let h = (&h + h.adjoint()).scale(0.5);
    match SymmetricEigen::try_new(h, f64::EPSILON, 0) {
        Some(eig) => {
            let v = eig.eigenvectors;
            let mut scaled = v.clone();
            for (j, lam) in eig.eigenvalues.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -lam);
                for z in scaled.column_mut(j).iter_mut() {
                    *z *= phase;
                }
            }
            UnitaryMatrix(scaled * v.adjoint())
        }
        None => UnitaryMatrix(expm_taylor(omega.matrix())),
    }
}

/// Scaling-and-squaring with a degree-18 Taylor polynomial.
pub(crate) fn expm_taylor(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = fro_norm(m);
    let mut squarings = 0u32;
    let mut s = 1.0;
    while norm * s > 0.5 {
        s *= 0.5;
        squarings += 1;
    }
    let a = m.scale(s);
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..=18 {
        term = (&term * &a).unscale(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Haar-distributed element of `U(N)`.
///
/// QR of a complex Ginibre matrix with the phases of `diag(R)` moved into
/// `Q`, which makes the distribution exactly Haar.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("unitary dimension must be positive".into()));
    }
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    Ok(UnitaryMatrix(q))
}

/// [`haar_unitary`] driven by a fresh generator seeded with `seed`.
pub fn haar_unitary_seeded(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    haar_unitary(n, &mut rng_from_seed(seed))
}

/// A matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// A random Hermitian matrix (GUE-like, unnormalized).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_complex(n, n, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// A random skew-Hermitian matrix.
pub fn random_skew<R: Rng + ?Sized>(n: usize, rng: &mut R) -> AlgebraElement {
    let g = random_complex(n, n, rng);
    AlgebraElement(skew_raw(&g, n))
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues_desc(h: &CMatrix) -> Result<Vec<f64>> {
    ensure_square(h, "hermitian matrix")?;
    let h = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("hermitian eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = ensure_square(m, "eigenvalue input")?;
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}
