//! Peak-to-average power ratio: per realization, its CCDF, and the overall
//! maximum over every data realization.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::gray::ReflectedGray;
use crate::modem::{subblock_transform, Constellation, ModulationParams, Modulator, TransformKind};
use crate::numerics::ComplexVector;
use crate::seed;
use crate::{Error, Result};

pub const DEFAULT_PAPR_BUDGET: u64 = 1 << 26;

/// `‖u‖_∞²`; the modulations used here have unit average power.
pub fn instantaneous_papr(u: &[Complex64]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidParameter("PAPR of an empty vector".into()));
    }
    Ok(u.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max))
}

/// Approximate `ℙ(PAPR > γ) ≈ 1 − (1 − e^{−γ})^K`, `γ` in linear scale.
pub fn theoretical_ccdf(gamma: f64, k: usize) -> f64 {
    assert!(k >= 1, "block size must be positive");
    if gamma <= 0.0 {
        return 1.0;
    }
    // 1 − (1 − x)^K, stable for tiny x
    let x = (-gamma).exp();
    (-(k as f64 * (-x).ln_1p()).exp_m1()).clamp(0.0, 1.0)
}

/// Threshold at which [`theoretical_ccdf`] equals `prob`.
pub fn theoretical_threshold(prob: f64, k: usize) -> f64 {
    assert!(prob > 0.0 && prob < 1.0, "probability must be in (0, 1)");
    // (1 − e^{−γ})^K = 1 − p
    let root = ((1.0 - prob).ln() / k as f64).exp();
    -(-root).ln_1p()
}

/// Empirical threshold: the smallest `γ` among the samples with
/// `fraction(samples > γ) ≤ prob`.
pub fn empirical_threshold(samples: &[f64], prob: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let idx = ((prob * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
    Some(sorted[idx])
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CcdfCurve {
    /// Linear-scale thresholds.
    pub gamma_grid: Vec<f64>,
    pub empirical: Vec<f64>,
    pub theoretical: Vec<f64>,
    pub trials: usize,
}

/// Instantaneous PAPR of `trials` modulated blocks of i.i.d. uniform data.
/// Trial `i` draws from `seed::derive(base_seed, [i])`.
pub fn papr_samples(p: &ModulationParams, c: &Constellation, trials: usize, base_seed: u64) -> Vec<f64> {
    let modulator = Modulator::new(*p);
    let k = p.k();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed::derive(base_seed, &[i as u64]));
            let s = c.symbols(&c.random_indices(&mut rng, k));
            let u = modulator.modulate(&s).expect("block length matches");
            instantaneous_papr(&u).expect("nonempty block")
        })
        .collect()
}

/// Fraction of `samples` strictly above each threshold.
pub fn empirical_ccdf(samples: &[f64], gamma_grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    gamma_grid
        .iter()
        .map(|g| {
            let at_most = sorted.partition_point(|x| x <= g);
            (sorted.len() - at_most) as f64 / n
        })
        .collect()
}

pub fn papr_ccdf_monte_carlo(
    p: &ModulationParams,
    c: &Constellation,
    trials: usize,
    gamma_grid: &[f64],
    base_seed: u64,
) -> Result<CcdfCurve> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let samples = papr_samples(p, c, trials, base_seed);
    Ok(CcdfCurve {
        gamma_grid: gamma_grid.to_vec(),
        empirical: empirical_ccdf(&samples, gamma_grid),
        theoretical: gamma_grid.iter().map(|g| theoretical_ccdf(*g, p.k())).collect(),
        trials,
    })
}

/// `a·N` with `a` the constellation's peak energy.
pub fn papr_upper_bound(c: &Constellation, n: usize) -> f64 {
    c.peak_energy() * n as f64
}

/// Closed-form overall PAPR of the Fourier-kernel scheme, attained by a
/// constant sub-block of peak-energy symbols.
pub fn otfs_overall_papr(c: &Constellation, n: usize) -> f64 {
    papr_upper_bound(c, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverallPapr {
    pub value: f64,
    /// A maximising size-`N` sub-block.
    pub argmax_subblock: ComplexVector,
    /// Candidates visited after phase pruning.
    pub candidates_evaluated: u64,
}

/// Exact `max_{s̄ ∈ 𝕊^N} ‖T_Nᴴ s̄‖_∞²`, independent of `M`.
///
/// The first symbol is fixed to one representative per orbit of the
/// constellation's phase symmetries; the rest is walked in reflected Gray
/// order, updating `T_Nᴴ s̄` one column at a time.
pub fn overall_papr_exhaustive(p: &ModulationParams, c: &Constellation, budget: u64) -> Result<OverallPapr> {
    let n = p.n;
    let size = c.len();
    let total = (size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "overall PAPR search",
            candidates: total,
            budget,
        });
    }
    let t_inv = match p.kind {
        TransformKind::Identity => {
            return Ok(OverallPapr {
                value: c.peak_energy(),
                argmax_subblock: vec![peak_point(c); n],
                candidates_evaluated: 0,
            })
        }
        kind => subblock_transform(n, kind),
    };
    let points = c.points();
    let reps = orbit_representatives(c);

    // Split the walk on the first two symbols so chunks can run in parallel;
    // results are reduced in chunk order.
    let head = n.min(2);
    let prefixes: Vec<Vec<usize>> = reps
        .iter()
        .flat_map(|&r| {
            if head == 2 {
                (0..size).map(|j| vec![r, j]).collect::<Vec<_>>()
            } else {
                vec![vec![r]]
            }
        })
        .collect();
    let tail = n - head;

    let best = prefixes
        .par_iter()
        .map(|prefix| {
            let mut digits: Vec<usize> = prefix.clone();
            digits.resize(n, 0);
            let mut u = vec![Complex64::new(0.0, 0.0); n];
            for (col, &d) in digits.iter().enumerate() {
                for (row, acc) in u.iter_mut().enumerate() {
                    *acc += t_inv[(row, col)] * points[d];
                }
            }
            let peak = |u: &[Complex64]| u.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
            let mut best_val = peak(&u);
            let mut best_digits = digits.clone();
            let mut count = 1u64;
            let mut walk = ReflectedGray::new(tail, size);
            while let Some((pos, old, new)) = walk.step() {
                let col = head + pos;
                let delta = points[new] - points[old];
                for (row, acc) in u.iter_mut().enumerate() {
                    *acc += t_inv[(row, col)] * delta;
                }
                digits[col] = new;
                count += 1;
                let v = peak(&u);
                if v > best_val {
                    best_val = v;
                    best_digits.copy_from_slice(&digits);
                }
            }
            (best_val, best_digits, count)
        })
        .collect::<Vec<_>>();

    let evaluated = best.iter().map(|b| b.2).sum();
    let (_, digits, _) = best
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one orbit");
    let argmax: ComplexVector = digits.iter().map(|&d| points[d]).collect();
    let value = instantaneous_papr(&t_inv.mul_vec(&argmax)?)?;
    Ok(OverallPapr {
        value,
        argmax_subblock: argmax,
        candidates_evaluated: evaluated,
    })
}

fn peak_point(c: &Constellation) -> Complex64 {
    let a = c.peak_energy();
    *c.points()
        .iter()
        .find(|p| (p.norm_sqr() - a).abs() < 1e-12)
        .expect("peak energy is attained")
}

/// One index per orbit of the points under the phase symmetries.
fn orbit_representatives(c: &Constellation) -> Vec<usize> {
    let syms = c.phase_symmetries();
    let mut covered = vec![false; c.len()];
    let mut reps = Vec::new();
    for i in 0..c.len() {
        if covered[i] {
            continue;
        }
        reps.push(i);
        for g in &syms {
            if let Some(j) = c.index_of(c.points()[i] * g) {
                covered[j] = true;
            }
        }
    }
    reps
}
