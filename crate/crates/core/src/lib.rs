//! Teleportation of quantum Fisher information through an amplitude-damped
//! resource, with weak-measurement protection.
//!
//! The crate has two independent routes to every number: closed forms in
//! [`formulas`] and a brute-force density-matrix simulation in [`teleport`]
//! with QFI estimators from [`qfi`]. [`audit`] compares them and produces the
//! figure grids; [`cli`] is the command-line front end.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common cases.

pub mod audit;
pub mod cli;
pub mod complexalg;
pub mod error;
pub mod formulas;
pub mod qfi;
pub mod quantum;
pub mod scalar;
pub mod teleport;

pub use complexalg::{hermitian_eig, partial_trace, sqrt_psd, tensor, EigenDecomposition, Matrix};
pub use error::{Error, Result};
pub use qfi::{qfi_bloch, qfi_sld, qfi_spectral, Method, QfiEstimate, StateFamily};
pub use quantum::{concurrence, BellState, BlochVector, DensityMatrix, Pauli};
pub use scalar::Real;
pub use teleport::{run_scheme, simulate, Placement, PrPolicy, Scheme, SchemeConfig, SchemeResult};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type BlochVector64 = BlochVector<f64>;
pub type BlochVector32 = BlochVector<f32>;
pub type SchemeConfig64 = SchemeConfig<f64>;
pub type SchemeConfig32 = SchemeConfig<f32>;
pub type SchemeResult64 = SchemeResult<f64>;
pub type SchemeResult32 = SchemeResult<f32>;
