//! Discrete Fresnel transform and the structured matrices of the CE-BEM model.
//!
//! All phases are computed from reduced integer numerators (see
//! [`phasor`]) so that entries stay accurate for large sizes and powers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::{phasor, ComplexMatrix, ComplexVector};

/// `[Φ_N]_{m,k}` for a given row-minus-column difference `d = m − k`.
fn dfnt_entry(d: i64, n: usize) -> Complex64 {
    let scale = 1.0 / (n as f64).sqrt();
    let skew = Complex64::from_polar(scale, -PI / 4.0);
    if n.is_multiple_of(2) {
        // (π/n)·d² = 2π·d²/(2n)
        skew * phasor(d * d, 2 * n)
    } else {
        // (d + 1/2)² = d(d+1) + 1/4
        skew * phasor(d * (d + 1), 2 * n) * Complex64::from_polar(1.0, PI / (4.0 * n as f64))
    }
}

/// The unitary, circulant `n × n` DFnT matrix `Φ_N`.
pub fn dfnt_matrix(n: usize) -> ComplexMatrix {
    assert!(n >= 1, "DFnT size must be at least one");
    ComplexMatrix::from_fn(n, n, |m, k| dfnt_entry(m as i64 - k as i64, n))
}

/// The inverse transform `Φ_Nᴴ`.
pub fn idfnt_matrix(n: usize) -> ComplexMatrix {
    assert!(n >= 1, "DFnT size must be at least one");
    ComplexMatrix::from_fn(n, n, |m, k| dfnt_entry(k as i64 - m as i64, n).conj())
}

/// First column `φ₀` of `Φ_Nᴴ`; every other column is a cyclic shift of it.
pub fn idfnt_first_column(n: usize) -> ComplexVector {
    (0..n).map(|m| dfnt_entry(-(m as i64), n).conj()).collect()
}

/// `Π_K^power` where `Π_K = circ([0, 1, 0, …, 0]ᵀ)` moves entry `i` to `i+1`.
pub fn cyclic_shift_matrix(k: usize, power: i64) -> ComplexMatrix {
    assert!(k >= 1, "shift size must be at least one");
    let p = power.rem_euclid(k as i64) as usize;
    let mut m = ComplexMatrix::zeros(k, k);
    for col in 0..k {
        m[((col + p) % k, col)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// `D_K^power = diag(e^{j2π·power·i/K})`.
pub fn phase_diag_matrix(k: usize, power: i64) -> ComplexMatrix {
    assert!(k >= 1, "phase ramp size must be at least one");
    let p = power.rem_euclid(k as i64);
    let diag: Vec<_> = (0..k as i64).map(|i| phasor(p * i, k)).collect();
    ComplexMatrix::from_diag(&diag)
}

/// `Λ_M`: the leading `M × M` block of `D_K`, so that `D_K = D_N ⊗ Λ_M`.
pub fn leading_phase_block(m: usize, k: usize) -> ComplexMatrix {
    assert!(m >= 1 && k >= 1, "sizes must be at least one");
    let diag: Vec<_> = (0..m as i64).map(|i| phasor(i, k)).collect();
    ComplexMatrix::from_diag(&diag)
}

/// Unit-modulus weight `α_q = e^{j(π/N)·q·(mod(N,2) − q)}` of the Doppler
/// index `q` in the effective channel.
pub fn alpha(q: i64, n: usize) -> Complex64 {
    assert!(n >= 1, "DFnT size must be at least one");
    phasor(q * ((n % 2) as i64 - q), 2 * n)
}

/// Named structured matrices, materialised on demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructuredMatrix {
    Dfnt(usize),
    Idfnt(usize),
    PhaseDiag { k: usize, power: i64 },
    CyclicShift { k: usize, power: i64 },
    LeadingPhaseBlock { m: usize, k: usize },
}

impl StructuredMatrix {
    pub fn to_dense(self) -> ComplexMatrix {
        match self {
            Self::Dfnt(n) => dfnt_matrix(n),
            Self::Idfnt(n) => idfnt_matrix(n),
            Self::PhaseDiag { k, power } => phase_diag_matrix(k, power),
            Self::CyclicShift { k, power } => cyclic_shift_matrix(k, power),
            Self::LeadingPhaseBlock { m, k } => leading_phase_block(m, k),
        }
    }
}

/// `‖Φ_N D_N^q Φ_Nᴴ − α_q D_N^q Π_N^q‖_F` with a caller-supplied weight
/// function, so a deliberately wrong weight can be shown to fail.
pub fn commutation_residual_with(n: usize, q: i64, weight: impl Fn(i64, usize) -> Complex64) -> f64 {
    use crate::numerics::matmul;
    let lhs = matmul(
        &matmul(&dfnt_matrix(n), &phase_diag_matrix(n, q)).expect("square"),
        &idfnt_matrix(n),
    )
    .expect("square");
    let rhs = matmul(&phase_diag_matrix(n, q), &cyclic_shift_matrix(n, q))
        .expect("square")
        .scale(weight(q, n));
    lhs.sub(&rhs).expect("same shape").frobenius_norm()
}

/// Commutation residual with the true weight [`alpha`].
pub fn commutation_residual(n: usize, q: i64) -> f64 {
    commutation_residual_with(n, q, alpha)
}
