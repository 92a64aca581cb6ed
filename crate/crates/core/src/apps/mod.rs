//! Applications: entanglement distance of pure states, best rank-1 tensor
//! approximation, the bipartite closed form, and local reversibility of
//! spin Hamiltonians.

pub mod bipartite;
pub mod hamiltonian;
pub mod rank1;
pub mod reversibility;
pub mod states;
pub mod tensor;

pub use bipartite::{bipartite_optimal, bipartite_quality, bipartite_transfer, full_svd, BipartiteOptimum};
pub use hamiltonian::{build_hamiltonian, Coupling, Field, HamiltonianSpec, Term};
pub use rank1::{best_rank1, rank1_from_factors, Rank1Options, Rank1Result};
pub use reversibility::{
    joint_objective, joint_reversibility, pointwise_objective, pointwise_reversibility,
    JointReversibility, PointwiseReversibility, ReversibilityOptions,
};
pub use states::{
    build_state, entanglement_sweep, family_state, s_grid, sweep_csv, Family, StateName, SweepRow,
};
pub use tensor::{tensor_inner, tensor_vec, Tensor, TensorFile};
