//! Riemannian gradient flows on the unitary group, its subgroups and adjoint
//! orbits, with applications to entanglement, tensor approximation and
//! reversibility of spin Hamiltonians.
//!
//! See the guide in `book/` for a walkthrough.

pub mod apps;
pub mod error;
pub mod flows;
pub mod io;
pub mod liealg;
pub mod matcore;
pub mod orbits;

pub use error::{Error, Result};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/orbits.md")]
    mod orbits {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/bipartite.md")]
    mod bipartite {}
    #[doc = include_str!("../../../book/src/reversibility.md")]
    mod reversibility {}
    #[doc = include_str!("../../../book/src/controllability.md")]
    mod controllability {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
