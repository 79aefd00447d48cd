//! Compile Kraus-operator channels into unitary dilations and execute them
//! exactly on density matrices.
//!
//! A channel `ε(ρ) = Σ_k E_k ρ E_k†` is expanded in an orthogonal unitary
//! basis `E_k = Σ_i c_ki U_i`. The compiler turns the coefficients into an
//! ancilla preparation `V`, a recombination `W` and a select-controlled
//! `Σ_i U_i ⊗ |i><i|`, so that the ancilla outcome `k` carries the branch
//! operator `B_k = Σ_i W_ki V_i0 U_i`. [`sim`] executes such plans and
//! checks them against direct Kraus application.

pub mod basis;
pub mod channel;
pub mod compiler;
pub mod error;
pub mod gates;
pub mod matrix;
pub mod nmr;
pub mod pauli;
pub mod random;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
pub use matrix::{tensor_product, ComplexMatrix};
pub use state::{BlochVector, DensityMatrix};
