//! Local time reversal of interaction Hamiltonians.
//!
//! Joint: `min_K f(K)` with `f(K) = Re tr(H K H K†)/‖H‖²` over local
//! unitaries `K`; the evolution `e^{−itH}` is locally reversible for all `t`
//! iff the minimum is `−1`.
//!
//! Pointwise at time `τ`: `min_{K₁,K₂} −Re tr(C† K₁ A K₂)/2ⁿ` with
//! `A = e^{−iτH}`, `C = e^{iτH}`; the value `−1` means
//! `K₁ e^{−iτH} K₂ = e^{iτH}`.

use crate::error::{Error, Result};
use crate::flows::{
    random_start, run_restarts, run_restarts_with, FlowOptions, FlowPoint, QualityFunction,
    QualityKind,
};
use crate::liealg::local_subalgebra_basis;
use crate::matcore::{expm_skew, fro_norm, AlgebraElement, CMatrix, UnitaryMatrix};

#[derive(Clone, Debug)]
pub struct ReversibilityOptions {
    pub flow: FlowOptions,
    pub restarts: usize,
    pub seed: u64,
    /// Reversible iff the minimum is at most `−1 + tol`.
    pub tol: f64,
}

impl Default for ReversibilityOptions {
    fn default() -> Self {
        Self {
            flow: FlowOptions {
                record_trace: false,
                ..FlowOptions::default()
            },
            restarts: 20,
            seed: 0,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct JointReversibility {
    pub min_value: f64,
    pub k: UnitaryMatrix,
    pub reversible: bool,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct PointwiseReversibility {
    pub min_value: f64,
    pub k1: UnitaryMatrix,
    pub k2: UnitaryMatrix,
    pub reversible: bool,
    pub converged: bool,
}

fn qubits_of(h: &CMatrix) -> Result<usize> {
    let n = h.nrows();
    if !h.is_square() || n < 2 || !n.is_power_of_two() {
        return Err(crate::error::dim_err(format!(
            "Hamiltonian must be 2ⁿ×2ⁿ with n ≥ 1, got {:?}",
            h.shape()
        )));
    }
    crate::matcore::ensure_finite(h)?;
    if (h - h.adjoint()).norm() > 1e-10 * h.norm().max(1.0) {
        return Err(Error::Contract("Hamiltonian is not Hermitian".into()));
    }
    Ok(n.trailing_zeros() as usize)
}

/// `Re tr(H K H K†)/‖H‖²`.
pub fn joint_objective(h: &CMatrix, k: &UnitaryMatrix) -> Result<f64> {
    let norm_sq = fro_norm(h).powi(2);
    if norm_sq == 0.0 {
        return Err(Error::InvalidArgument("zero Hamiltonian".into()));
    }
    Ok(crate::flows::trace_product(h, &k.conjugate(h)?).re / norm_sq)
}

/// `−Re tr(C† K₁ A K₂)/2ⁿ` with `A = e^{−iτH}`, `C = e^{iτH}`.
pub fn pointwise_objective(h: &CMatrix, tau: f64, k1: &UnitaryMatrix, k2: &UnitaryMatrix) -> Result<f64> {
    let (a, c) = propagators(h, tau)?;
    let m = k1.matrix() * a * k2.matrix();
    Ok(-crate::flows::trace_product(&c.adjoint(), &m).re / h.nrows() as f64)
}

fn propagators(h: &CMatrix, tau: f64) -> Result<(CMatrix, CMatrix)> {
    let ih = AlgebraElement::from_hermitian(h)?;
    Ok((
        expm_skew(&ih.scaled(-tau)).into_matrix(),
        expm_skew(&ih.scaled(tau)).into_matrix(),
    ))
}

pub fn joint_reversibility(h: &CMatrix, opts: &ReversibilityOptions) -> Result<JointReversibility> {
    let n = qubits_of(h)?;
    let norm = fro_norm(h);
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero Hamiltonian".into()));
    }
    let a = h.unscale(norm);
    let c = -&a;
    let p = local_subalgebra_basis(n)?.projector();
    // Maximizing Re tr(−H K H K†) minimizes the normalized objective.
    let qf = QualityFunction::new(QualityKind::U1, a, c)?.with_restriction(p)?;
    let runs = run_restarts(&qf, &opts.flow, opts.restarts, opts.seed)?;
    let best = runs.best();
    let min_value = -best.value;
    Ok(JointReversibility {
        min_value,
        k: best.point.u.clone(),
        reversible: min_value <= -1.0 + opts.tol,
        converged: best.converged,
    })
}

/// Restart 0 starts from `K₁ = K₂ = 1`; the rest from random local pairs.
pub fn pointwise_reversibility(h: &CMatrix, tau: f64, opts: &ReversibilityOptions) -> Result<PointwiseReversibility> {
    let n = qubits_of(h)?;
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be finite, got {tau}")));
    }
    let (a, c) = propagators(h, tau)?;
    let dim = h.nrows();
    let p = local_subalgebra_basis(n)?.projector();
    let qf = QualityFunction::new(QualityKind::U3, a.unscale(dim as f64), c)?.with_restriction(p)?;
    let runs = run_restarts_with(&qf, &opts.flow, opts.restarts, opts.seed, |i, rng| {
        if i == 0 {
            Ok(FlowPoint::pair(UnitaryMatrix::identity(dim), UnitaryMatrix::identity(dim)))
        } else {
            random_start(&qf, rng)
        }
    })?;
    let best = runs.best();
    let min_value = -best.value;
    let k2 = best
        .point
        .v
        .clone()
        .ok_or_else(|| Error::Integrity("two-sided run lost its second unitary".into()))?;
    Ok(PointwiseReversibility {
        min_value,
        k1: best.point.u.clone(),
        k2,
        reversible: min_value <= -1.0 + opts.tol,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::super::hamiltonian::{build_hamiltonian, Coupling, HamiltonianSpec};
    use super::*;
    use crate::liealg::PauliAxis;
    use crate::matcore::{haar_unitary, rng_from_seed};
    use uflow_oracles::{compass_search, kron, su2_zyz, CMat};

    fn ham(spec: HamiltonianSpec) -> CMatrix {
        build_hamiltonian(&spec).unwrap()
    }

    #[test]
    fn identity_gives_plus_one() {
        let h = ham(HamiltonianSpec::cycle(3, Coupling::ZZ, 1.0));
        assert!((joint_objective(&h, &UnitaryMatrix::identity(8)).unwrap() - 1.0).abs() < 1e-14);
        assert!(joint_objective(&CMatrix::zeros(4, 4), &UnitaryMatrix::identity(4)).is_err());
    }

    #[test]
    fn objective_stays_in_range() {
        let h = ham(HamiltonianSpec::chain(2, Coupling::XXX, 1.0));
        let mut rng = rng_from_seed(1);
        for _ in 0..20 {
            let v = joint_objective(&h, &haar_unitary(4, &mut rng).unwrap()).unwrap();
            assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn zz_pair_and_square_are_reversible() {
        let opts = ReversibilityOptions { restarts: 4, ..Default::default() };
        let r = joint_reversibility(&ham(HamiltonianSpec::chain(2, Coupling::ZZ, 1.0)), &opts).unwrap();
        assert!(r.reversible, "{}", r.min_value);
        let h4 = ham(HamiltonianSpec::cycle(4, Coupling::ZZ, 1.0));
        let r = joint_reversibility(&h4, &opts).unwrap();
        assert!((r.min_value + 1.0).abs() < 1e-6, "{}", r.min_value);
        assert!((joint_objective(&h4, &r.k).unwrap() - r.min_value).abs() < 1e-9);
    }

    #[test]
    fn triangle_and_heisenberg_pair_are_not() {
        let opts = ReversibilityOptions { restarts: 6, ..Default::default() };
        for spec in [HamiltonianSpec::cycle(3, Coupling::ZZ, 1.0), HamiltonianSpec::chain(2, Coupling::XXX, 1.0)] {
            let r = joint_reversibility(&ham(spec), &opts).unwrap();
            assert!(!r.reversible && r.min_value > -1.0 + 1e-3, "{}", r.min_value);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = ham(HamiltonianSpec::chain(2, Coupling::ZZ, 1.0));
        h[(0, 1)].re = 1.0;
        assert!(matches!(joint_reversibility(&h, &ReversibilityOptions::default()), Err(Error::Contract(_))));
        assert!(joint_reversibility(&CMatrix::zeros(3, 3), &ReversibilityOptions::default()).is_err());
    }

    #[test]
    fn pointwise_at_zero_time() {
        let h = ham(HamiltonianSpec::chain(2, Coupling::XXX, 1.0));
        let opts = ReversibilityOptions { restarts: 2, ..Default::default() };
        let r = pointwise_reversibility(&h, 0.0, &opts).unwrap();
        assert!(r.reversible && (r.min_value + 1.0).abs() < 1e-12);
        assert!((r.k1.matrix() - CMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn joint_witness_reverses_pointwise() {
        let h = ham(HamiltonianSpec::cycle(4, Coupling::ZZ, 1.0));
        let opts = ReversibilityOptions { restarts: 2, ..Default::default() };
        let k = joint_reversibility(&h, &opts).unwrap().k;
        for tau in [0.3, 1.1] {
            let v = pointwise_objective(&h, tau, &k, &k.adjoint()).unwrap();
            assert!((v + 1.0).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn pointwise_matches_compass_search() {
        let tau = std::f64::consts::FRAC_PI_4;
        let spec = HamiltonianSpec {
            n: 2,
            terms: vec![super::super::hamiltonian::Term { coupling: Coupling::ZZ, sites: (1, 2), weight: 0.5 }],
            fields: Vec::new(),
        }
        .with_field(PauliAxis::Z, 1, 0.5)
        .with_field(PauliAxis::Z, 2, 0.5);
        let h = ham(spec);
        let opts = ReversibilityOptions { restarts: 20, seed: 5, ..Default::default() };
        let flow = pointwise_reversibility(&h, tau, &opts).unwrap();

        let (a, c) = propagators(&h, tau).unwrap();
        let (a, c_adj) = (CMat::from(a), CMat::from(c.adjoint()));
        let local = |t: &[f64]| kron(&su2_zyz(t[0], t[1], t[2]), &su2_zyz(t[3], t[4], t[5]));
        let f = |t: &[f64]| -((local(&t[..6]) * &a * local(&t[6..]) * &c_adj).trace().re) / 4.0;
        let mut rng = rng_from_seed(6);
        let oracle = (0..12)
            .map(|_| {
                use rand::Rng;
                let x0: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                compass_search(f, &x0, 0.5, 1e-7, 200_000).1
            })
            .fold(f64::INFINITY, f64::min);
        assert!((flow.min_value - oracle).abs() < 1e-3, "flow {} oracle {oracle}", flow.min_value);
    }
}
