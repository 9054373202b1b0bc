//! Diversity analysis of VOCDM over CE-BEM channels.
//!
//! The effective channel places coefficient `h_{l,q}` on sub-diagonal
//! `o_{l,q} = mod(l + qM, K)`. The set of occupied sub-diagonals bounds the
//! data-dependent diversity `G_d(s) = min_{e≠0} rank C(s, e)`, where
//! `H_eff·e = C(s, e)·h`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::ChannelSpec;
use crate::fresnel::alpha;
use crate::modem::{Constellation, ModulationParams, TransformKind};
use crate::numerics::{matmul, numerical_rank, phasor, psd_factor, singular_values, ComplexMatrix, ComplexVector, DEFAULT_RANK_TOL};
use crate::seed;
use crate::{Error, Result};

/// An error vector `e = s − s′`.
pub type ErrorVector = ComplexVector;

/// `mod(l + q·M, K)`.
pub fn subdiagonal_index(l: usize, q: i64, m: usize, k: usize) -> usize {
    assert!(k >= 1, "block size must be positive");
    (l as i64 + q * m as i64).rem_euclid(k as i64) as usize
}

/// Occupied sub-diagonals `𝕆(L, Q, M, N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderSet {
    pub members: BTreeSet<usize>,
    pub l: usize,
    pub q: usize,
    pub m: usize,
    pub n: usize,
}

impl OrderSet {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn rho(&self) -> usize {
        (self.l + 1) * (2 * self.q + 1)
    }

    pub fn contains(&self, o: usize) -> bool {
        self.members.contains(&o)
    }
}

pub fn order_set(l: usize, q: usize, m: usize, n: usize) -> OrderSet {
    let k = m * n;
    assert!(k >= 1, "block size must be positive");
    let qi = q as i64;
    let members = (-qi..=qi)
        .flat_map(|qq| (0..=l).map(move |ll| subdiagonal_index(ll, qq, m, k)))
        .collect();
    OrderSet { members, l, q, m, n }
}

/// Outcome of testing `M ≥ L+1` and `N ≥ 2Q+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderCondition {
    pub m_sufficient: bool,
    pub n_sufficient: bool,
    pub order_size: usize,
    pub rho: usize,
}

impl OrderCondition {
    pub fn holds(&self) -> bool {
        self.m_sufficient && self.n_sufficient
    }

    /// Whether every coefficient has its own sub-diagonal.
    pub fn max_order(&self) -> bool {
        self.order_size == self.rho
    }
}

pub fn check_max_order_condition(l: usize, q: usize, m: usize, n: usize) -> OrderCondition {
    let set = order_set(l, q, m, n);
    OrderCondition {
        m_sufficient: m > l,
        n_sufficient: n > 2 * q,
        order_size: set.size(),
        rho: set.rho(),
    }
}

fn check_error_inputs(
    s: &[Complex64],
    e: &[Complex64],
    spec: &ChannelSpec,
    p: &ModulationParams,
) -> Result<()> {
    if p.kind != TransformKind::Fresnel {
        return Err(Error::UnsupportedKind {
            op: "error_matrix",
            kind: p.kind.to_string(),
        });
    }
    let k = spec.k();
    if p.k() != k {
        return Err(Error::LengthMismatch {
            op: "error_matrix",
            expected: k,
            actual: p.k(),
        });
    }
    for v in [s, e] {
        if v.len() != k {
            return Err(Error::LengthMismatch {
                op: "error_matrix",
                expected: k,
                actual: v.len(),
            });
        }
    }
    if spec.rho() > k {
        return Err(Error::TooManyCoefficients { rho: spec.rho(), k });
    }
    if e.iter().all(|x| x.norm() == 0.0) {
        return Err(Error::ZeroError);
    }
    Ok(())
}

/// `C(s, e)`: `K × ρ`, column `(l, q)` is `α_q·D_K^q·Π_K^{l+qM}·e`, in the
/// channel coefficient order.
///
/// The columns depend on `s` only through the admissible error `e`.
pub fn error_matrix(
    s: &[Complex64],
    e: &[Complex64],
    spec: &ChannelSpec,
    p: &ModulationParams,
) -> Result<ComplexMatrix> {
    check_error_inputs(s, e, spec, p)?;
    Ok(error_matrix_unchecked(e, spec, p))
}

fn error_matrix_unchecked(e: &[Complex64], spec: &ChannelSpec, p: &ModulationParams) -> ComplexMatrix {
    let k = spec.k();
    let mut out = ComplexMatrix::zeros(k, spec.rho());
    for (col, (l, q)) in spec.taps().enumerate() {
        let a = alpha(q, p.n);
        let shift = subdiagonal_index(l, q, p.m, k);
        for (i, ei) in e.iter().enumerate() {
            if ei.norm_sqr() == 0.0 {
                continue;
            }
            let row = (i + shift) % k;
            out[(row, col)] = a * phasor(q * row as i64, k) * ei;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `e₀ = ε·1_K`
    E0,
    /// `e₁ = [ε, 0, …, 0]ᵀ`
    E1,
}

/// Witness error built from the smallest nonzero constellation difference.
pub fn witness_error_constant(c: &Constellation, k: usize, which: Witness) -> ErrorVector {
    let eps = c.difference_alphabet()[0];
    witness_with(eps, k, which)
}

fn witness_with(eps: Complex64, k: usize, which: Witness) -> ErrorVector {
    let zero = Complex64::new(0.0, 0.0);
    match which {
        Witness::E0 => vec![eps; k],
        Witness::E1 => (0..k).map(|i| if i == 0 { eps } else { zero }).collect(),
    }
}

/// A witness that is a valid pairwise error for the data `s`
/// (`s − e ∈ 𝕊^K`), if one exists. `E1` always exists.
pub fn realizable_witness(s: &[Complex64], c: &Constellation, which: Witness) -> Option<ErrorVector> {
    let k = s.len();
    if k == 0 {
        return None;
    }
    let valid = |eps: &Complex64| match which {
        Witness::E0 => s.iter().all(|x| c.index_of(x - eps).is_some()),
        Witness::E1 => c.index_of(s[0] - eps).is_some(),
    };
    c.difference_alphabet()
        .into_iter()
        .find(valid)
        .map(|eps| witness_with(eps, k, which))
}

/// Ergodic PEP bound `Π_i (1 + λ_i/(4σ²))⁻¹` over the nonzero eigenvalues
/// of `BᴴCᴴCB`, with `R_h = B·Bᴴ`.
pub fn pep_upper_bound(c: &ComplexMatrix, r_h: &ComplexMatrix, sigma2: f64) -> Result<f64> {
    let lambdas = pep_eigenvalues(c, r_h, sigma2)?;
    let log: f64 = lambdas.iter().map(|l| -(l / (4.0 * sigma2)).ln_1p()).sum();
    Ok(log.exp())
}

/// The looser high-SNR form `(4σ²)^r / Π λ_i`.
pub fn pep_high_snr_bound(c: &ComplexMatrix, r_h: &ComplexMatrix, sigma2: f64) -> Result<f64> {
    let lambdas = pep_eigenvalues(c, r_h, sigma2)?;
    let log: f64 = lambdas.iter().map(|l| (4.0 * sigma2).ln() - l.ln()).sum();
    Ok(log.exp())
}

/// Nonzero eigenvalues of `BᴴCᴴCB`, as squared singular values of `C·B`.
fn pep_eigenvalues(c: &ComplexMatrix, r_h: &ComplexMatrix, sigma2: f64) -> Result<Vec<f64>> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    let b = psd_factor(r_h)?;
    let sv = singular_values(&matmul(c, &b)?);
    let max = sv.first().copied().unwrap_or(0.0);
    Ok(sv
        .into_iter()
        .filter(|s| max > 0.0 && *s > DEFAULT_RANK_TOL * max)
        .map(|s| s * s)
        .collect())
}

/// Which error vectors the minimisation ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorDomain {
    /// `e = s − s′` with `s′ ∈ 𝕊^K`.
    Realizable,
    /// Every entry from `{0} ∪ {a − b : a, b ∈ 𝕊}`, independent of `s`.
    FullDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiversityMode {
    Exhaustive,
    /// Random errors plus the deterministic witnesses; an upper estimate.
    Sampled { n_samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiversityOptions {
    pub mode: DiversityMode,
    pub domain: ErrorDomain,
    /// Maximum number of error patterns in exhaustive mode.
    pub budget: u64,
    pub rank_tol: f64,
}

pub const DEFAULT_DIVERSITY_BUDGET: u64 = 1 << 20;
pub const DEFAULT_DIVERSITY_SAMPLES: usize = 10_000;

impl DiversityOptions {
    /// Exact minimum over the full per-entry difference alphabet.
    pub fn exhaustive() -> Self {
        Self {
            mode: DiversityMode::Exhaustive,
            domain: ErrorDomain::FullDifference,
            budget: DEFAULT_DIVERSITY_BUDGET,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }

    /// Sampled upper estimate over realizable errors.
    pub fn sampled(n_samples: usize, seed: u64) -> Self {
        Self {
            mode: DiversityMode::Sampled { n_samples, seed },
            domain: ErrorDomain::Realizable,
            budget: DEFAULT_DIVERSITY_BUDGET,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }

    pub fn with_domain(mut self, domain: ErrorDomain) -> Self {
        self.domain = domain;
        self
    }
}

impl Default for DiversityOptions {
    fn default() -> Self {
        Self::sampled(DEFAULT_DIVERSITY_SAMPLES, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiversityEstimate {
    /// Smallest rank found.
    pub value: usize,
    /// An error attaining `value` (the first one in enumeration order).
    pub argmin_error: ErrorVector,
    /// `true` only for exhaustive mode; sampled values are upper estimates.
    pub exact: bool,
    pub errors_evaluated: u64,
}

/// Per-entry admissible error values, zero first.
fn entry_alphabets(s: &[Complex64], c: &Constellation, domain: ErrorDomain) -> Vec<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    match domain {
        ErrorDomain::FullDifference => {
            let mut alpha = vec![zero];
            alpha.extend(c.difference_alphabet());
            vec![alpha; s.len()]
        }
        ErrorDomain::Realizable => s
            .iter()
            .map(|x| {
                let mut alpha = vec![zero];
                alpha.extend(
                    c.points()
                        .iter()
                        .map(|p| x - p)
                        .filter(|d| d.norm() > 1e-12),
                );
                alpha
            })
            .collect(),
    }
}

/// `min_{e≠0} rank C(s, e)` by exhaustive enumeration or sampling.
pub fn data_dependent_diversity(
    s: &[Complex64],
    c: &Constellation,
    spec: &ChannelSpec,
    p: &ModulationParams,
    opts: &DiversityOptions,
) -> Result<DiversityEstimate> {
    let k = spec.k();
    let probe = witness_with(Complex64::new(1.0, 0.0), k, Witness::E1);
    check_error_inputs(s, &probe, spec, p)?;
    let alphabets = entry_alphabets(s, c, opts.domain);
    let rank_of = |e: &[Complex64]| numerical_rank(&error_matrix_unchecked(e, spec, p), opts.rank_tol);

    match opts.mode {
        DiversityMode::Exhaustive => {
            let total = alphabets
                .iter()
                .try_fold(1u128, |acc, a| acc.checked_mul(a.len() as u128))
                .unwrap_or(u128::MAX);
            if total > opts.budget as u128 {
                return Err(Error::BudgetExceeded {
                    what: "exhaustive diversity search",
                    candidates: total,
                    budget: opts.budget,
                });
            }
            let total = total as u64;
            // Index 0 is the all-zero error and is skipped.
            let decode = |mut idx: u64| -> ErrorVector {
                let mut e = vec![Complex64::new(0.0, 0.0); k];
                for pos in (0..k).rev() {
                    let radix = alphabets[pos].len() as u64;
                    e[pos] = alphabets[pos][(idx % radix) as usize];
                    idx /= radix;
                }
                e
            };
            let (rank, idx) = (1..total)
                .into_par_iter()
                .map(|idx| (rank_of(&decode(idx)), idx))
                .min()
                .ok_or(Error::ZeroError)?;
            Ok(DiversityEstimate {
                value: rank,
                argmin_error: decode(idx),
                exact: true,
                errors_evaluated: total - 1,
            })
        }
        DiversityMode::Sampled { n_samples, seed: base } => {
            let mut fixed: Vec<ErrorVector> = Vec::new();
            for which in [Witness::E1, Witness::E0] {
                let w = match opts.domain {
                    ErrorDomain::Realizable => realizable_witness(s, c, which),
                    ErrorDomain::FullDifference => Some(witness_error_constant(c, k, which)),
                };
                fixed.extend(w);
            }
            let n_fixed = fixed.len();
            let draw = |i: usize| -> ErrorVector {
                if i < n_fixed {
                    return fixed[i].clone();
                }
                sample_error(&alphabets, seed::derive(base, &[i as u64]))
            };
            let (rank, idx) = (0..n_fixed + n_samples)
                .into_par_iter()
                .map(|i| (rank_of(&draw(i)), i))
                .min()
                .expect("at least the e1 witness");
            Ok(DiversityEstimate {
                value: rank,
                argmin_error: draw(idx),
                exact: false,
                errors_evaluated: (n_fixed + n_samples) as u64,
            })
        }
    }
}

/// Random nonzero error: a uniformly sized random support, each supported
/// entry drawn uniformly from its nonzero admissible values.
fn sample_error(alphabets: &[Vec<Complex64>], seed_value: u64) -> ErrorVector {
    let k = alphabets.len();
    let mut rng = seed::rng(seed_value);
    let weight = rng.random_range(1..=k);
    let mut positions: Vec<usize> = (0..k).collect();
    for i in 0..weight {
        let j = rng.random_range(i..k);
        positions.swap(i, j);
    }
    let mut e = vec![Complex64::new(0.0, 0.0); k];
    for &pos in &positions[..weight] {
        let choices = &alphabets[pos][1..];
        e[pos] = choices[rng.random_range(0..choices.len())];
    }
    e
}
