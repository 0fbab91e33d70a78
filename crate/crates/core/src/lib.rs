//! Hilbert-Schmidt geometric discord of reduced multiqubit Schrödinger cat
//! states.
//!
//! The discord between qubit 1 and the remaining `k - 1` qubits of a `k`-qubit
//! reduction is computed along three independent routes:
//!
//! * the Fano-Bloch correlation tensor built recursively from block
//!   decompositions, fed into the 3×3 matrix `K = x xᵗ + T Tᵗ`
//!   ([`discord`]);
//! * an encoding of the `k - 1` qubit party onto one logical qubit, which turns
//!   the problem into a 4×4 X state ([`encoding`]);
//! * a derivative-free minimization of the Hilbert-Schmidt distance over
//!   measurement axes on the sphere ([`discord::brute_force_discord`]).

pub mod cat;
pub mod discord;
pub mod eigen3;
pub mod encoding;
pub mod error;
pub mod fano_bloch;
pub mod sphere;
pub mod sweep;
pub mod validate;

pub use cat::{CatSpec, DensityMatrix, Parity, PureStateVector};
pub use discord::{ClassicalStateSpec, DiscordMethod, DiscordReport, KMatrix};
pub use encoding::{EncodedState, RTensor};
pub use error::{Error, Result};
pub use fano_bloch::{BlockFamily, CorrelationTensor, MultiIndex, PauliIndex};
