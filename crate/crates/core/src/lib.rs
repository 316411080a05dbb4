//! Exact quantum dynamics of two coupled spin-1 systems (qutrits).
//!
//! The Hamiltonian is the generalized anisotropic Heisenberg model with
//! inhomogeneous longitudinal fields and Dzyaloshinskii-Moriya-type cross
//! couplings. A π-rotation parity splits the 9-dimensional space into an odd
//! 4-dimensional and an even 5-dimensional invariant subspace; the odd block is
//! exactly two uncoupled effective qubits.
//!
//! Module map:
//!
//! * [`model`]: parameters, spin-1 operators, the 9×9 Hamiltonian, states.
//! * [`symmetry`]: parity operator, basis permutation, block extraction.
//! * [`effective`]: the two-qubit factorization of the odd block.
//! * [`spectra`]: closed-form spectra and the Jacobi eigensolver oracle.
//! * [`dynamics`]: propagation, structure-preserving amplitudes, magnetization.
//! * [`entanglement`]: partial transpose, negativity, Schmidt analysis.
//! * [`cli`]: command implementations behind the `qutrits` binary.

pub mod cli;
pub mod dynamics;
pub mod effective;
pub mod entanglement;
mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod spectra;
pub mod symmetry;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use model::{
    build_hamiltonian, derived_couplings, spin1_pauli, Axis, BasisLabel, DensityMatrix9,
    DerivedCouplings, ModelParams, PairOperator, PureState9, Qubit,
};
