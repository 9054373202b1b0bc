//! Block detection over the effective channel `y = H_eff·s + v̄`.

use num_complex::Complex64;

use crate::gray::ReflectedGray;
use crate::modem::Constellation;
use crate::numerics::{matmul, norm_sqr, solve, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Default cap on `|𝕊|^K` for exhaustive ML detection (2²⁶).
pub const DEFAULT_ML_BUDGET: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub s_hat: ComplexVector,
    /// Constellation indices of `s_hat`.
    pub indices: Vec<usize>,
    /// `‖y − H_eff·ŝ‖²`, recomputed from scratch for the returned decision.
    pub metric: f64,
    pub candidates_evaluated: u64,
}

fn check_dims(y: &[Complex64], h_eff: &ComplexMatrix) -> Result<()> {
    if h_eff.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            op: "detect",
            left_rows: h_eff.rows(),
            left_cols: h_eff.cols(),
            right_rows: y.len(),
            right_cols: 1,
        });
    }
    Ok(())
}

fn residual_metric(y: &[Complex64], h_eff: &ComplexMatrix, s: &[Complex64]) -> f64 {
    let hs = h_eff.mul_vec(s).expect("checked dimensions");
    y.iter().zip(&hs).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// Number of candidates `|𝕊|^K`, saturating.
pub fn candidate_count(constellation_size: usize, k: usize) -> u128 {
    (constellation_size as u128)
        .checked_pow(k as u32)
        .unwrap_or(u128::MAX)
}

/// Visits every `s ∈ 𝕊^K` in reflected Gray order with its metric
/// `‖y − H·s‖²`, maintained by single-column residual updates.
pub(crate) fn for_each_candidate(
    y: &[Complex64],
    h_eff: &ComplexMatrix,
    c: &Constellation,
    mut visit: impl FnMut(&[usize], f64),
) {
    let (rows, k) = h_eff.shape();
    let q = c.len();
    let pts = c.points();
    // delta[(col, from, to)] = H[:, col]·(s_to − s_from), stored contiguously.
    let mut delta = vec![Complex64::new(0.0, 0.0); k * q * q * rows];
    for col in 0..k {
        let column = h_eff.column(col);
        for from in 0..q {
            for to in 0..q {
                let d = pts[to] - pts[from];
                let base = ((col * q + from) * q + to) * rows;
                for (slot, h) in delta[base..base + rows].iter_mut().zip(&column) {
                    *slot = h * d;
                }
            }
        }
    }
    let start = vec![pts[0]; k];
    let hs = h_eff.mul_vec(&start).expect("square");
    let mut residual: Vec<Complex64> = y.iter().zip(&hs).map(|(a, b)| a - b).collect();

    let mut gray = ReflectedGray::new(k, q);
    visit(gray.digits(), norm_sqr(&residual));
    while let Some((col, from, to)) = gray.step() {
        let base = ((col * q + from) * q + to) * rows;
        let mut metric = 0.0;
        for (r, d) in residual.iter_mut().zip(&delta[base..base + rows]) {
            *r -= d;
            metric += r.norm_sqr();
        }
        visit(gray.digits(), metric);
    }
}

/// Exhaustive maximum-likelihood detector with a candidate budget.
#[derive(Clone, Copy, Debug)]
pub struct MlDetector {
    pub budget: u64,
}

impl Default for MlDetector {
    fn default() -> Self {
        Self {
            budget: DEFAULT_ML_BUDGET,
        }
    }
}

impl MlDetector {
    pub fn new(budget: u64) -> Self {
        Self { budget }
    }

    pub fn check_budget(&self, constellation_size: usize, k: usize) -> Result<u64> {
        let n = candidate_count(constellation_size, k);
        if n > self.budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "ML detection",
                candidates: n,
                budget: self.budget,
            });
        }
        Ok(n as u64)
    }

    /// `argmin_{s∈𝕊^K} ‖y − H_eff·s‖²`; exact ties go to the
    /// lexicographically smallest index vector.
    pub fn detect(&self, y: &[Complex64], h_eff: &ComplexMatrix, c: &Constellation) -> Result<DetectionResult> {
        check_dims(y, h_eff)?;
        let candidates = self.check_budget(c.len(), h_eff.cols())?;
        let mut best = vec![0usize; h_eff.cols()];
        let mut best_metric = f64::INFINITY;
        for_each_candidate(y, h_eff, c, |digits, metric| {
            if metric < best_metric || (metric == best_metric && digits < best.as_slice()) {
                best_metric = metric;
                best.copy_from_slice(digits);
            }
        });
        let s_hat = c.symbols(&best);
        Ok(DetectionResult {
            metric: residual_metric(y, h_eff, &s_hat),
            s_hat,
            indices: best,
            candidates_evaluated: candidates,
        })
    }
}

/// [`MlDetector::detect`] with the default budget.
pub fn ml_detect(y: &[Complex64], h_eff: &ComplexMatrix, c: &Constellation) -> Result<DetectionResult> {
    MlDetector::default().detect(y, h_eff, c)
}

/// Linear MMSE equalisation `(HᴴH + σ²I)⁻¹Hᴴy` followed by per-symbol
/// nearest-point decisions.
pub fn mmse_detect(
    y: &[Complex64],
    h_eff: &ComplexMatrix,
    c: &Constellation,
    sigma2: f64,
) -> Result<DetectionResult> {
    check_dims(y, h_eff)?;
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "MMSE needs a positive noise variance, got {sigma2}"
        )));
    }
    let soft = mmse_equalize(y, h_eff, sigma2)?;
    let indices: Vec<usize> = soft.iter().map(|z| c.nearest(*z)).collect();
    let s_hat = c.symbols(&indices);
    Ok(DetectionResult {
        metric: residual_metric(y, h_eff, &s_hat),
        s_hat,
        indices,
        candidates_evaluated: (h_eff.cols() * c.len()) as u64,
    })
}

/// Soft MMSE estimate before slicing.
pub fn mmse_equalize(y: &[Complex64], h_eff: &ComplexMatrix, sigma2: f64) -> Result<ComplexVector> {
    check_dims(y, h_eff)?;
    let hh = h_eff.adjoint();
    let mut gram = matmul(&hh, h_eff)?;
    for i in 0..gram.rows() {
        gram[(i, i)] += sigma2;
    }
    solve(&gram, &hh.mul_vec(y)?)
}
