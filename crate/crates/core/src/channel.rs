//! CE-BEM doubly selective channel.
//!
//! Each delay tap `l ∈ 0..=L` is a sum of `2Q+1` complex exponentials,
//! `h(l, i) = Σ_q h_{l,q}·e^{j2πqi/K}`, so the block channel matrix is
//! `H = Σ_l Σ_q h_{l,q}·D_K^q·Π_K^l`. Coefficients are stored delay-major
//! inside Doppler-ascending blocks: `[h_{0,−Q}, …, h_{L,−Q}, …, h_{L,Q}]`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fresnel::alpha;
use crate::modem::{demodulation_matrix, modulation_matrix, ModulationParams, TransformKind};
use crate::numerics::{eigvals_hermitian, matmul, phasor, psd_factor, ComplexMatrix, ComplexVector};
use crate::seed;
use crate::{Error, Result};

/// Physical description used to derive the CE-BEM grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMapping {
    /// Maximum delay spread in seconds.
    pub tau_max: f64,
    /// Maximum Doppler spread in hertz.
    pub f_max: f64,
    /// Sampling period in seconds.
    pub t_s: f64,
    /// Block size.
    pub k: usize,
}

/// `(L, Q) = (⌊τ_max/T_s⌋, ⌈f_max·K·T_s⌉)`.
pub fn grid_from_physical(g: &GridMapping) -> Result<(usize, usize)> {
    if !(g.t_s > 0.0) || !g.t_s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sampling period must be positive, got {}",
            g.t_s
        )));
    }
    if g.k == 0 {
        return Err(Error::InvalidParameter("block size must be positive".into()));
    }
    if !(g.tau_max >= 0.0) || !(g.f_max >= 0.0) {
        return Err(Error::InvalidParameter("spreads must be non-negative".into()));
    }
    let l = (g.tau_max / g.t_s).floor() as usize;
    let q = (g.f_max * g.k as f64 * g.t_s).ceil() as usize;
    Ok((l, q))
}

/// Grid sizes plus the coefficient covariance `R_h` (`ρ × ρ`).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    l: usize,
    q: usize,
    k: usize,
    r_h: ComplexMatrix,
}

impl ChannelSpec {
    /// Validates that `R_h` is `ρ × ρ`, Hermitian and positive definite.
    pub fn new(l: usize, q: usize, k: usize, r_h: ComplexMatrix) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("block size must be positive".into()));
        }
        let rho = (l + 1) * (2 * q + 1);
        if r_h.shape() != (rho, rho) {
            return Err(Error::DimensionMismatch {
                op: "ChannelSpec::new",
                left_rows: rho,
                left_cols: rho,
                right_rows: r_h.rows(),
                right_cols: r_h.cols(),
            });
        }
        let ev = eigvals_hermitian(&r_h)?;
        let max = ev[0];
        let min = *ev.last().expect("rho >= 1");
        if min < -1e-10 * max.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Indefinite { min_eigenvalue: min });
        }
        if min <= 1e-12 * max {
            return Err(Error::RankDeficientCovariance { min_eigenvalue: min });
        }
        Ok(Self { l, q, k, r_h })
    }

    /// I.i.d. coefficients with total expected energy one: `R_h = I_ρ/ρ`.
    pub fn iid(l: usize, q: usize, k: usize) -> Result<Self> {
        let rho = (l + 1) * (2 * q + 1);
        Self::with_variance(l, q, k, 1.0 / rho as f64)
    }

    /// I.i.d. coefficients of the given per-coefficient variance.
    pub fn with_variance(l: usize, q: usize, k: usize, variance: f64) -> Result<Self> {
        let rho = (l + 1) * (2 * q + 1);
        Self::new(
            l,
            q,
            k,
            ComplexMatrix::identity(rho).scale(Complex64::new(variance, 0.0)),
        )
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r_h(&self) -> &ComplexMatrix {
        &self.r_h
    }

    /// Number of coefficients `ρ = (L+1)(2Q+1)`.
    pub fn rho(&self) -> usize {
        (self.l + 1) * (2 * self.q + 1)
    }

    /// Position of `h_{l,q}` in the coefficient vector.
    pub fn coeff_index(&self, l: usize, q: i64) -> usize {
        debug_assert!(l <= self.l && q.unsigned_abs() as usize <= self.q);
        (q + self.q as i64) as usize * (self.l + 1) + l
    }

    /// `(l, q)` pairs in coefficient order.
    pub fn taps(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        let q = self.q as i64;
        (-q..=q).flat_map(move |qq| (0..=self.l).map(move |l| (l, qq)))
    }

    /// A copy with a different block size and the same covariance.
    pub fn with_block_size(&self, k: usize) -> Result<Self> {
        Self::new(self.l, self.q, k, self.r_h.clone())
    }
}

/// Sampled coefficient vector `h` of length `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub h: ComplexVector,
}

impl ChannelRealization {
    pub fn new(spec: &ChannelSpec, h: ComplexVector) -> Result<Self> {
        if h.len() != spec.rho() {
            return Err(Error::LengthMismatch {
                op: "ChannelRealization::new",
                expected: spec.rho(),
                actual: h.len(),
            });
        }
        Ok(Self { h })
    }

    pub fn coeff(&self, spec: &ChannelSpec, l: usize, q: i64) -> Complex64 {
        self.h[spec.coeff_index(l, q)]
    }
}

/// Draws `h = B·h̄` with `B·Bᴴ = R_h` from a reusable factor.
#[derive(Clone, Debug)]
pub struct ChannelSampler {
    factor: ComplexMatrix,
}

impl ChannelSampler {
    pub fn new(spec: &ChannelSpec) -> Result<Self> {
        Ok(Self {
            factor: psd_factor(spec.r_h())?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let white: Vec<_> = (0..self.factor.cols())
            .map(|_| seed::complex_normal(rng))
            .collect();
        ChannelRealization {
            h: self.factor.mul_vec(&white).expect("square factor"),
        }
    }
}

/// One seeded draw of `h ~ 𝒞𝒩(0, R_h)`.
pub fn sample_channel(spec: &ChannelSpec, rng_seed: u64) -> Result<ChannelRealization> {
    let sampler = ChannelSampler::new(spec)?;
    Ok(sampler.sample(&mut seed::rng(rng_seed)))
}

fn check_realization(h: &ChannelRealization, spec: &ChannelSpec) -> Result<()> {
    if h.h.len() != spec.rho() {
        return Err(Error::LengthMismatch {
            op: "channel realization",
            expected: spec.rho(),
            actual: h.h.len(),
        });
    }
    Ok(())
}

/// Tap value `h(l, i) = Σ_q h_{l,q}·e^{j2πqi/K}`.
pub fn tap_gain(h: &ChannelRealization, spec: &ChannelSpec, l: usize, i: i64) -> Result<Complex64> {
    check_realization(h, spec)?;
    if l > spec.l {
        return Err(Error::IndexOutOfRange {
            what: "delay tap",
            index: l as i64,
            bound: spec.l + 1,
        });
    }
    let q = spec.q as i64;
    Ok((-q..=q)
        .map(|qq| h.coeff(spec, l, qq) * phasor(qq * i, spec.k))
        .sum())
}

/// Time-domain channel matrix `H = Σ_l Σ_q h_{l,q}·D_K^q·Π_K^l`.
pub fn channel_matrix(h: &ChannelRealization, spec: &ChannelSpec) -> Result<ComplexMatrix> {
    check_realization(h, spec)?;
    let k = spec.k;
    let mut out = ComplexMatrix::zeros(k, k);
    for (l, q) in spec.taps() {
        let c = h.coeff(spec, l, q);
        for col in 0..k {
            let row = (col + l) % k;
            out[(row, col)] += c * phasor(q * row as i64, k);
        }
    }
    Ok(out)
}

/// `r = H·u + v`, `v ~ 𝒞𝒩(0, σ²I)`; the noise stream is seeded by `rng_seed`.
pub fn apply_channel(
    u: &[Complex64],
    h: &ChannelRealization,
    spec: &ChannelSpec,
    sigma2: f64,
    rng_seed: u64,
) -> Result<ComplexVector> {
    let mut rng = seed::rng(rng_seed);
    apply_channel_with(u, h, spec, sigma2, &mut rng)
}

/// [`apply_channel`] drawing noise from a caller-owned generator.
pub fn apply_channel_with<R: Rng + ?Sized>(
    u: &[Complex64],
    h: &ChannelRealization,
    spec: &ChannelSpec,
    sigma2: f64,
    rng: &mut R,
) -> Result<ComplexVector> {
    check_realization(h, spec)?;
    let k = spec.k;
    if u.len() != k {
        return Err(Error::LengthMismatch {
            op: "apply_channel",
            expected: k,
            actual: u.len(),
        });
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be non-negative, got {sigma2}"
        )));
    }
    let taps: Vec<Vec<Complex64>> = (0..=spec.l)
        .map(|l| {
            (0..k as i64)
                .map(|i| tap_gain(h, spec, l, i).expect("validated"))
                .collect()
        })
        .collect();
    let sigma = sigma2.sqrt();
    Ok((0..k)
        .map(|i| {
            let clean: Complex64 = taps
                .iter()
                .enumerate()
                .map(|(l, tap)| tap[i] * u[(i + k - l % k) % k])
                .sum();
            if sigma2 > 0.0 {
                clean + seed::complex_normal(rng) * sigma
            } else {
                clean
            }
        })
        .collect())
}

/// Closed-form VOCDM effective channel
/// `H_eff = Σ_l Σ_q α_q·h_{l,q}·D_K^q·Π_K^{l+qM}`.
///
/// Coefficient `h_{l,q}` lands on sub-diagonal `mod(l + qM, K)`; no
/// transform matrices are formed.
pub fn effective_channel(
    h: &ChannelRealization,
    spec: &ChannelSpec,
    p: &ModulationParams,
) -> Result<ComplexMatrix> {
    check_realization(h, spec)?;
    if p.kind != TransformKind::Fresnel {
        return Err(Error::UnsupportedKind {
            op: "effective_channel",
            kind: p.kind.to_string(),
        });
    }
    if p.k() != spec.k {
        return Err(Error::LengthMismatch {
            op: "effective_channel",
            expected: spec.k,
            actual: p.k(),
        });
    }
    let k = spec.k;
    let mut out = ComplexMatrix::zeros(k, k);
    for (l, q) in spec.taps() {
        let weight = alpha(q, p.n) * h.coeff(spec, l, q);
        let shift = (l as i64 + q * p.m as i64).rem_euclid(k as i64) as usize;
        for col in 0..k {
            let row = (col + shift) % k;
            out[(row, col)] += weight * phasor(q * row as i64, k);
        }
    }
    Ok(out)
}

/// `(T_N ⊗ I_M)·H·(T_Nᴴ ⊗ I_M)` by explicit products; valid for every kind.
pub fn effective_channel_dense(
    h: &ChannelRealization,
    spec: &ChannelSpec,
    p: &ModulationParams,
) -> Result<ComplexMatrix> {
    if p.k() != spec.k {
        return Err(Error::LengthMismatch {
            op: "effective_channel_dense",
            expected: spec.k,
            actual: p.k(),
        });
    }
    let hm = channel_matrix(h, spec)?;
    matmul(&matmul(&demodulation_matrix(p), &hm)?, &modulation_matrix(p))
}

/// Closed form for the Fresnel kind, dense products otherwise.
pub fn effective_channel_any(
    h: &ChannelRealization,
    spec: &ChannelSpec,
    p: &ModulationParams,
) -> Result<ComplexMatrix> {
    match p.kind {
        TransformKind::Fresnel => effective_channel(h, spec, p),
        _ => effective_channel_dense(h, spec, p),
    }
}
