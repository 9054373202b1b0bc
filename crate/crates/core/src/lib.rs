//! Vector orthogonal chirp division multiplexing (VOCDM) over doubly
//! selective channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense complex matrices, Kronecker products, SVD rank,
//!   Hermitian eigenvalues and PSD factorisation.
//! * [`fresnel`]: the discrete Fresnel transform and the diagonal / cyclic
//!   shift matrices of the CE-BEM model.
//! * [`modem`]: constellations and the `(Φ_Nᴴ ⊗ I_M)` modulator with its
//!   single-carrier, OCDM and Fourier (OTFS-like) special cases.
//! * [`channel`]: CE-BEM channel sampling, the time-domain channel matrix and
//!   the closed-form effective channel.
//! * [`detect`]: exhaustive ML and MMSE block detection.
//! * [`diversity`]: sub-diagonal order sets, error matrices, PEP bounds and
//!   data-dependent diversity.
//! * [`papr`]: instantaneous, CCDF and overall PAPR.
//! * [`harness`]: configuration, seeded Monte Carlo drivers, the verification
//!   suite and CSV/JSON emission used by the `vocdm` binary.

pub mod channel;
pub mod detect;
pub mod diversity;
mod error;
pub mod fresnel;
mod gray;
pub mod harness;
pub mod modem;
pub mod numerics;
pub mod papr;
pub mod seed;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::{ComplexMatrix, ComplexVector};
