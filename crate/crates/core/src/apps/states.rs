//! Named pure states, the two entanglement families, and the distance sweep.
//!
//! Qubit 1 is the leftmost Kronecker factor, so `|001⟩` is basis index 1.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::rank1::{best_rank1, Rank1Options};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::matcore::{kron_vec, CVector, PureStateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateName {
    /// `(|001⟩ + |010⟩ + |100⟩)/√3`.
    W,
    /// `(|110⟩ + |101⟩ + |011⟩)/√3`.
    Vbar,
    /// `(|000⟩ + |111⟩)/√2`.
    Ghz3,
    /// `(|0011⟩ + |1100⟩)/√2`.
    GhzPrime4,
    /// `(|10⟩ + |01⟩)/√2`.
    XPlus,
}

impl FromStr for StateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "W" => Ok(Self::W),
            "Vbar" => Ok(Self::Vbar),
            "GHZ3" => Ok(Self::Ghz3),
            "GHZp4" => Ok(Self::GhzPrime4),
            "Xplus" => Ok(Self::XPlus),
            _ => Err(Error::InvalidArgument(format!(
                "unknown state {s:?} (expected W, Vbar, GHZ3, GHZp4 or Xplus)"
            ))),
        }
    }
}

fn basis_sum(qubits: u32, indices: &[usize]) -> CVector {
    let amp = 1.0 / (indices.len() as f64).sqrt();
    let mut v = CVector::zeros(1 << qubits);
    for &i in indices {
        v[i].re = amp;
    }
    v
}

pub fn build_state(name: StateName) -> PureStateVector {
    let v = match name {
        StateName::W => basis_sum(3, &[0b001, 0b010, 0b100]),
        StateName::Vbar => basis_sum(3, &[0b110, 0b101, 0b011]),
        StateName::Ghz3 => basis_sum(3, &[0b000, 0b111]),
        StateName::GhzPrime4 => basis_sum(4, &[0b0011, 0b1100]),
        StateName::XPlus => basis_sum(2, &[0b10, 0b01]),
    };
    PureStateVector::normalized(v).expect("basis sums are nonzero")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `√s|W⟩ + √(1−s)|V̄⟩`.
    ThreeQubit,
    /// `√s|GHZ′⟩ − √(1−s)|X⁺⟩⊗|X⁺⟩`.
    FourQubit,
}

impl Family {
    pub fn qubits(self) -> usize {
        match self {
            Self::ThreeQubit => 3,
            Self::FourQubit => 4,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3q" => Ok(Self::ThreeQubit),
            "4q" => Ok(Self::FourQubit),
            _ => Err(Error::InvalidArgument(format!("unknown family {s:?} (expected 3q or 4q)"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ThreeQubit => "3q",
            Self::FourQubit => "4q",
        })
    }
}

pub fn family_state(family: Family, s: f64) -> Result<PureStateVector> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("s must lie in [0, 1], got {s}")));
    }
    let (p, q) = (s.sqrt(), (1.0 - s).sqrt());
    let v = match family {
        Family::ThreeQubit => {
            build_state(StateName::W).vector().scale(p) + build_state(StateName::Vbar).vector().scale(q)
        }
        Family::FourQubit => {
            let xp = build_state(StateName::XPlus);
            build_state(StateName::GhzPrime4).vector().scale(p) - kron_vec(xp.vector(), xp.vector()).scale(q)
        }
    };
    PureStateVector::normalized(v)
}

/// Evenly spaced grid of `steps` points from `s_min` to `s_max`.
pub fn s_grid(s_min: f64, s_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(0.0 <= s_min && s_min <= s_max && s_max <= 1.0) || steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 ≤ s_min ≤ s_max ≤ 1 and steps ≥ 1, got {s_min}, {s_max}, {steps}"
        )));
    }
    if steps == 1 {
        return Ok(vec![s_min]);
    }
    let h = (s_max - s_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { s_max } else { s_min + h * i as f64 })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub s: f64,
    pub overlap: f64,
    /// `1 − overlap`.
    pub delta: f64,
    /// `‖ρ − σ‖²_F = 2 − 2·overlap` for the closest product state `σ`.
    pub measure_i: f64,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Distance to the product states along a family. Grid point `i` uses the
/// seed `seed ⊕ (i << 32)` for its restarts.
pub fn entanglement_sweep(family: Family, grid: &[f64], opts: &Rank1Options) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let state = family_state(family, s)?;
            let t = Tensor::from_vector(vec![2; family.qubits()], state.vector())?;
            let point_opts = Rank1Options {
                seed: opts.seed ^ ((i as u64) << 32),
                ..opts.clone()
            };
            let r = best_rank1(&t, &point_opts)?;
            let overlap = r.overlap.clamp(0.0, 1.0);
            Ok(SweepRow {
                s,
                overlap,
                delta: 1.0 - overlap,
                measure_i: 2.0 - 2.0 * overlap,
                restarts_used: r.restarts_used,
                converged: r.converged,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Sweep CSV with a header row; floats in `{:.16e}`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("s,overlap,delta,measureI_value,restarts_used,converged\n");
    for r in rows {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
            r.s, r.overlap, r.delta, r.measure_i, r.restarts_used, r.converged
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_states() {
        let w = build_state(StateName::W);
        assert!((w.vector().norm() - 1.0).abs() < 1e-15);
        let nz: Vec<usize> = (0..8).filter(|&i| w.vector()[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![1, 2, 4]);
        assert!((w.vector()[1].re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // First slice W(1,:,:) = [[0,1],[1,0]]/√3.
        let t = Tensor::from_vector(vec![2, 2, 2], w.vector()).unwrap();
        assert_eq!(t.get(&[0, 0, 1]).unwrap(), t.get(&[0, 1, 0]).unwrap());
        assert_eq!(t.get(&[0, 0, 0]).unwrap().norm(), 0.0);
        assert_eq!(t.get(&[1, 0, 0]).unwrap(), w.vector()[4]);
        assert_eq!(t.get(&[1, 1, 1]).unwrap().norm(), 0.0);
        assert_eq!(build_state(StateName::GhzPrime4).dim(), 16);
        assert!("Z".parse::<StateName>().is_err());
        assert_eq!("GHZp4".parse::<StateName>().unwrap(), StateName::GhzPrime4);
    }

    #[test]
    fn family_endpoints() {
        let w = family_state(Family::ThreeQubit, 1.0).unwrap();
        assert!((w.vector() - build_state(StateName::W).vector()).norm() < 1e-15);
        let x = family_state(Family::FourQubit, 0.0).unwrap();
        assert!((x.vector()[0b1010].re + 0.5).abs() < 1e-15);
        assert!(family_state(Family::ThreeQubit, 1.5).is_err());
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(s_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(s_grid(0.2, 0.2, 1).unwrap(), vec![0.2]);
        assert!(s_grid(0.5, 0.2, 3).is_err());
        assert!(s_grid(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn sweep_endpoints_and_product_limit() {
        let opts = Rank1Options { restarts: 10, seed: 3, ..Rank1Options::default() };
        let rows = entanglement_sweep(Family::ThreeQubit, &[0.0, 1.0], &opts).unwrap();
        for r in &rows {
            assert!((r.delta - 5.0 / 9.0).abs() < 1e-3, "{}", r.delta);
            assert!((r.measure_i - 2.0 * r.delta).abs() < 1e-12);
        }
        let rows = entanglement_sweep(Family::FourQubit, &[0.0, 1.0], &opts).unwrap();
        assert!((rows[0].delta - 0.75).abs() < 1e-4);
        assert!((rows[1].delta - 0.5).abs() < 1e-4);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("s,overlap,delta,measureI_value,restarts_used,converged\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn product_state_has_zero_distance() {
        let opts = Rank1Options { restarts: 3, ..Rank1Options::default() };
        let v = kron_vec(
            &kron_vec(&basis_sum(1, &[0, 1]), &basis_sum(1, &[1])),
            &basis_sum(1, &[0]),
        );
        let t = Tensor::from_vector(vec![2, 2, 2], &v).unwrap();
        let r = best_rank1(&t, &opts).unwrap();
        assert!((1.0 - r.overlap).abs() < 1e-6);
    }
}
