//! Dense complex tensors stored lexicographically (first index slowest).
//!
//! With this ordering, `tensor_vec` sends `x¹ ⊗ₐ … ⊗ₐ xʳ` to the Kronecker
//! product `x¹ ⊗ … ⊗ xʳ`. For order two it is the row-major flattening,
//! i.e. `vec(Xᵀ)` in column-stacking terms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{kron_vec, CMatrix, CVector, UnitaryMatrix, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    entries: Vec<Complex64>,
}

/// On-disk form: `{"dims":[…],"re":[…],"im":[…]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, entries: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(dim_err("tensor dimensions must be nonempty and positive"));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| dim_err("tensor too large"))?;
        if entries.len() != len {
            return Err(dim_err(format!(
                "tensor with dims {dims:?} needs {len} entries, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("tensor has non-finite entries".into()));
        }
        Ok(Self { dims, entries })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, vec![ZERO; len])
    }

    /// Inverse of [`tensor_vec`].
    pub fn from_vector(dims: Vec<usize>, v: &CVector) -> Result<Self> {
        Self::new(dims, v.iter().copied().collect())
    }

    /// `x¹ ⊗ₐ … ⊗ₐ xʳ`.
    pub fn outer(factors: &[CVector]) -> Result<Self> {
        let dims = factors.iter().map(|f| f.len()).collect();
        Self::from_vector(dims, &kron_all(factors)?)
    }

    pub fn from_file(f: &TensorFile) -> Result<Self> {
        if f.re.len() != f.im.len() {
            return Err(dim_err("tensor file: re and im differ in length"));
        }
        let entries = f.re.iter().zip(&f.im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        Self::new(f.dims.clone(), entries)
    }

    pub fn to_file(&self) -> TensorFile {
        TensorFile {
            dims: self.dims.clone(),
            re: self.entries.iter().map(|z| z.re).collect(),
            im: self.entries.iter().map(|z| z.im).collect(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entry at a multi-index.
    pub fn get(&self, idx: &[usize]) -> Result<Complex64> {
        if idx.len() != self.dims.len() || idx.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return Err(dim_err(format!("index {idx:?} out of range for {:?}", self.dims)));
        }
        let flat = idx.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i);
        Ok(self.entries[flat])
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Applies `U_k` to leg `k` for every `k`.
    pub fn rotate_legs(&self, us: &[UnitaryMatrix]) -> Result<Self> {
        if us.len() != self.order() || us.iter().zip(&self.dims).any(|(u, &d)| u.dim() != d) {
            return Err(dim_err("one unitary per leg, matching the leg dimension"));
        }
        let mut full = us[0].matrix().clone();
        for u in &us[1..] {
            full = crate::matcore::kron(&full, u.matrix());
        }
        Self::from_vector(self.dims.clone(), &(full * tensor_vec(self)))
    }

    /// Mode-`k` unfolding, `N_k × Π_{j≠k} N_j`.
    pub fn unfold(&self, k: usize) -> Result<CMatrix> {
        if k >= self.order() {
            return Err(dim_err(format!("mode {k} out of range")));
        }
        let nk = self.dims[k];
        let inner: usize = self.dims[k + 1..].iter().product();
        let cols = self.entries.len() / nk;
        let mut m = CMatrix::zeros(nk, cols);
        for (flat, z) in self.entries.iter().enumerate() {
            let i = (flat / inner) % nk;
            let outer = flat / (inner * nk);
            m[(i, outer * inner + flat % inner)] = *z;
        }
        Ok(m)
    }
}

/// `⟨Y, X⟩ = Σ conj(Y)·X` over all multi-indices.
pub fn tensor_inner(y: &Tensor, x: &Tensor) -> Result<Complex64> {
    if y.dims != x.dims {
        return Err(dim_err(format!("tensor dims {:?} vs {:?}", y.dims, x.dims)));
    }
    Ok(y.entries.iter().zip(&x.entries).map(|(a, b)| a.conj() * b).sum())
}

pub fn tensor_vec(x: &Tensor) -> CVector {
    CVector::from_column_slice(&x.entries)
}

pub(crate) fn kron_all(factors: &[CVector]) -> Result<CVector> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| dim_err("at least one factor is required"))?;
    Ok(rest.iter().fold(first.clone(), |acc, f| kron_vec(&acc, f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{haar_unitary, random_complex, rng_from_seed, vec, ONE};

    fn random_tensor(dims: Vec<usize>, seed: u64) -> Tensor {
        let n = dims.iter().product();
        let v = random_complex(n, 1, &mut rng_from_seed(seed)).column(0).into_owned();
        Tensor::from_vector(dims, &v).unwrap()
    }

    fn e(n: usize, i: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[i] = ONE;
        v
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Tensor::new(vec![2, 2], vec![ZERO; 3]).is_err());
        assert!(Tensor::new(vec![], vec![]).is_err());
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
        let t = random_tensor(vec![2, 2], 1);
        assert!(tensor_inner(&t, &random_tensor(vec![4], 1)).is_err());
        assert!(Tensor::from_vector(vec![2, 3], &CVector::zeros(5)).is_err());
    }

    #[test]
    fn inner_products() {
        let t = random_tensor(vec![2, 3, 2], 2);
        let s = random_tensor(vec![2, 3, 2], 3);
        let self_inner = tensor_inner(&t, &t).unwrap();
        assert!(self_inner.im == 0.0 && (self_inner.re - t.norm_sq()).abs() < 1e-12);
        let via_vec = tensor_vec(&s).dotc(&tensor_vec(&t));
        assert!((tensor_inner(&s, &t).unwrap() - via_vec).norm() < 1e-12);
        let e11 = Tensor::outer(&[e(2, 0), e(2, 0)]).unwrap();
        let e12 = Tensor::outer(&[e(2, 0), e(2, 1)]).unwrap();
        assert_eq!(tensor_inner(&e11, &e12).unwrap(), ZERO);
    }

    #[test]
    fn vec_maps_outer_to_kron() {
        let mut rng = rng_from_seed(4);
        let a = random_complex(2, 1, &mut rng).column(0).into_owned();
        let b = random_complex(3, 1, &mut rng).column(0).into_owned();
        let t = Tensor::outer(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(tensor_vec(&t), kron_vec(&a, &b));
        assert_eq!(t.get(&[1, 2]).unwrap(), a[1] * b[2]);
    }

    #[test]
    fn order_two_vec_is_vec_of_transpose() {
        let m = random_complex(2, 3, &mut rng_from_seed(5));
        let t = Tensor::new(vec![2, 3], m.transpose().iter().copied().collect()).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t.get(&[i, j]).unwrap(), m[(i, j)]);
            }
        }
        assert_eq!(tensor_vec(&t), vec(&m.transpose()));
    }

    #[test]
    fn round_trips() {
        let t = random_tensor(vec![2, 2, 2], 6);
        assert_eq!(Tensor::from_vector(vec![2, 2, 2], &tensor_vec(&t)).unwrap(), t);
        assert_eq!(Tensor::from_file(&t.to_file()).unwrap(), t);
    }

    #[test]
    fn unfolding_layout() {
        let t = random_tensor(vec![2, 3, 2], 7);
        let m = t.unfold(1).unwrap();
        assert_eq!(m.shape(), (3, 4));
        assert_eq!(m[(2, 2 + 1)], t.get(&[1, 2, 1]).unwrap());
        assert_eq!(t.unfold(0).unwrap()[(1, 5)], t.get(&[1, 2, 1]).unwrap());
    }

    #[test]
    fn leg_rotation_preserves_norm() {
        let mut rng = rng_from_seed(8);
        let t = random_tensor(vec![2, 3], 9);
        let us = vec![haar_unitary(2, &mut rng).unwrap(), haar_unitary(3, &mut rng).unwrap()];
        let r = t.rotate_legs(&us).unwrap();
        assert!((r.norm_sq() - t.norm_sq()).abs() < 1e-12);
        let m = CMatrix::from_row_slice(2, 3, t.entries());
        let expect = us[0].matrix() * m * us[1].matrix().transpose();
        assert!((r.get(&[1, 0]).unwrap() - expect[(1, 0)]).norm() < 1e-12);
    }
}
