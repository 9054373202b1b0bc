//! Self-check suite behind `vocdm verify`.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::channel::{effective_channel, effective_channel_dense, sample_channel, ChannelSpec};
use crate::diversity::{error_matrix, order_set, witness_error_constant, Witness};
use crate::fresnel::{alpha, commutation_residual_with, dfnt_matrix};
use crate::modem::{Constellation, ModulationParams, Modulator};
use crate::numerics::{norm, numerical_rank, DEFAULT_RANK_TOL};
use crate::{seed, Complex64, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst residual, or the violation count for combinatorial checks.
    pub residual: f64,
    pub tolerance: f64,
    pub cases: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| Error::Io(e.to_string()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.checks {
            w.serialize(c).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Weight used in the commutation check; replaceable to confirm the check
/// catches a wrong weight.
pub type WeightFn = fn(i64, usize) -> Complex64;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub weight: WeightFn,
}

impl VerifyOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, weight: alpha }
    }
}

fn result(name: &str, residual: f64, tolerance: f64, cases: u64) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: residual <= tolerance,
        residual,
        tolerance,
        cases,
    }
}

fn check_rng(opts: &VerifyOptions, name: &str) -> rand_chacha::ChaCha8Rng {
    seed::rng(seed::derive(opts.seed, &[seed::label_hash(name)]))
}

fn dfnt_unitarity() -> CheckResult {
    let worst = (1..=16).map(|n| dfnt_matrix(n).unitarity_residual()).fold(0.0, f64::max);
    result("dfnt_unitarity", worst, 1e-12, 16)
}

fn commutation(opts: &VerifyOptions) -> CheckResult {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 2..=12usize {
        for q in -(n as i64)..=(n as i64) {
            worst = worst.max(commutation_residual_with(n, q, opts.weight));
            cases += 1;
        }
    }
    result("commutation_identity", worst, 1e-10, cases)
}

fn order_set_grid() -> CheckResult {
    let mut violations = 0u64;
    let mut cases = 0;
    for l in 0..=3 {
        for q in 0..=2 {
            for m in 1..=8 {
                for n in 1..=8 {
                    cases += 1;
                    let size = order_set(l, q, m, n).size();
                    let rho = (l + 1) * (2 * q + 1);
                    if m > l && n > 2 * q && size != rho {
                        violations += 1;
                    }
                    if n == 1 && m > l && size != l + 1 {
                        violations += 1;
                    }
                    if m == 1 && n > l + 2 * q && size != l + 2 * q + 1 {
                        violations += 1;
                    }
                }
            }
        }
    }
    result("order_set_grid", violations as f64, 0.0, cases)
}

fn random_tuple<R: Rng>(rng: &mut R) -> (usize, usize, usize, usize) {
    (
        rng.random_range(1..=8),
        rng.random_range(1..=8),
        rng.random_range(0..=3),
        rng.random_range(0..=2),
    )
}

fn effective_channel_check(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut rng = check_rng(opts, "effective_channel");
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let (m, n, l, q) = random_tuple(&mut rng);
        let p = ModulationParams::fresnel(m, n);
        let spec = ChannelSpec::iid(l, q, m * n)?;
        let h = sample_channel(&spec, seed::derive(opts.seed, &[i]))?;
        let fast = effective_channel(&h, &spec, &p)?;
        let dense = effective_channel_dense(&h, &spec, &p)?;
        worst = worst.max(fast.sub(&dense)?.frobenius_norm() / dense.frobenius_norm());
    }
    Ok(result("effective_channel_closed_form", worst, 1e-9, 200))
}

fn factorisation_check(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut rng = check_rng(opts, "factorisation");
    let cons = Constellation::qpsk();
    let mut worst = 0.0f64;
    let mut done = 0u64;
    while done < 100 {
        let (m, n, l, q) = random_tuple(&mut rng);
        let k = m * n;
        if (l + 1) * (2 * q + 1) > k {
            continue;
        }
        let p = ModulationParams::fresnel(m, n);
        let spec = ChannelSpec::iid(l, q, k)?;
        let h = sample_channel(&spec, rng.random())?;
        let s = cons.symbols(&cons.random_indices(&mut rng, k));
        let s2 = cons.symbols(&cons.random_indices(&mut rng, k));
        let e: Vec<_> = s.iter().zip(&s2).map(|(a, b)| a - b).collect();
        if e.iter().all(|x| x.norm() == 0.0) {
            continue;
        }
        let lhs = effective_channel(&h, &spec, &p)?.mul_vec(&e)?;
        let rhs = error_matrix(&s, &e, &spec, &p)?.mul_vec(&h.h)?;
        let diff: Vec<_> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&diff) / (norm(&h.h) * norm(&e)));
        done += 1;
    }
    Ok(result("error_matrix_factorisation", worst, 1e-9, done))
}

fn witness_check() -> Result<CheckResult> {
    let cons = Constellation::bpsk();
    let mut violations = 0u64;
    let mut cases = 0;
    for l in 0..=2 {
        for q in 0..=1 {
            for m in 1..=6 {
                for n in 1..=6 {
                    let k = m * n;
                    if (l + 1) * (2 * q + 1) > k {
                        continue;
                    }
                    cases += 1;
                    let p = ModulationParams::fresnel(m, n);
                    let spec = ChannelSpec::iid(l, q, k)?;
                    let s = cons.symbols(&vec![0; k]);
                    let e0 = witness_error_constant(&cons, k, Witness::E0);
                    let e1 = witness_error_constant(&cons, k, Witness::E1);
                    let r0 = numerical_rank(&error_matrix(&s, &e0, &spec, &p)?, DEFAULT_RANK_TOL);
                    let r1 = numerical_rank(&error_matrix(&s, &e1, &spec, &p)?, DEFAULT_RANK_TOL);
                    if r0 > 2 * q + 1 || r1 != order_set(l, q, m, n).size() {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok(result("diversity_witnesses", violations as f64, 0.0, cases))
}

fn modem_round_trip(opts: &VerifyOptions) -> Result<CheckResult> {
    let mut rng = check_rng(opts, "modem");
    let cons = Constellation::qpsk();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (m, n) in [(1, 1), (2, 4), (1, 8), (8, 1), (3, 5), (4, 64), (1, 400)] {
        for p in [ModulationParams::fresnel(m, n), ModulationParams::fourier(m, n)] {
            let modem = Modulator::new(p);
            let s = cons.symbols(&cons.random_indices(&mut rng, p.k()));
            let back = modem.demodulate(&modem.modulate(&s)?)?;
            let diff: Vec<_> = back.iter().zip(&s).map(|(a, b)| a - b).collect();
            worst = worst.max(norm(&diff) / norm(&s));
            cases += 1;
        }
    }
    Ok(result("modem_round_trip", worst, 1e-12, cases))
}

pub fn run_verify_with(opts: &VerifyOptions) -> Result<VerifyReport> {
    Ok(VerifyReport {
        seed: opts.seed,
        checks: vec![
            dfnt_unitarity(),
            commutation(opts),
            order_set_grid(),
            effective_channel_check(opts)?,
            factorisation_check(opts)?,
            witness_check()?,
            modem_round_trip(opts)?,
        ],
    })
}

pub fn run_verify(seed_value: u64) -> Result<VerifyReport> {
    run_verify_with(&VerifyOptions::new(seed_value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let report = run_verify(1).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
            assert!(c.cases > 0);
        }
        assert!(report.passed());
        assert_eq!(report.checks.len(), 7);
    }

    #[test]
    fn flipped_weight_fails_commutation_only() {
        let mut opts = VerifyOptions::new(1);
        opts.weight = |q, n| alpha(q, n).conj();
        let report = run_verify_with(&opts).unwrap();
        assert!(!report.passed());
        let c = report.check("commutation_identity").unwrap();
        assert!(!c.passed && c.residual > 1e-3);
        assert!(report.checks.iter().filter(|c| !c.passed).count() == 1);
    }

    #[test]
    fn report_serialises() {
        let report = run_verify(2).unwrap();
        let mut buf = Vec::new();
        report.write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 7);
        assert!(v["checks"][1]["residual"].as_f64().unwrap() <= 1e-10);
        let mut csv_buf = Vec::new();
        report.write_csv(&mut csv_buf).unwrap();
        assert!(String::from_utf8(csv_buf).unwrap().starts_with("name,passed,residual,tolerance,cases\n"));
    }
}
