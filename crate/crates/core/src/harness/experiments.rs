//! Seeded Monte Carlo drivers.
//!
//! Block `b` of scheme `i` draws its randomness from
//! `seed::derive(base, [label_hash(id), i, b])`, so results do not depend on
//! how blocks are spread over workers. The same block stream is reused at
//! every SNR point of a scheme.

use rayon::prelude::*;

use super::config::{Detector, DiversitySearch, ExperimentConfig, ExperimentKind};
use super::record::ResultRecord;
use crate::channel::{apply_channel_with, effective_channel_any, ChannelSampler};
use crate::detect::{DetectionResult, MlDetector};
use crate::diversity::{data_dependent_diversity, order_set, DiversityMode, DiversityOptions};
use crate::modem::{Constellation, ModulationParams, Modulator, TransformKind};
use crate::numerics::{solve, ComplexMatrix, DEFAULT_RANK_TOL};
use crate::papr::{overall_papr_exhaustive, papr_samples, theoretical_ccdf};
use crate::{seed, Complex64, Error, Result};

fn in_scheme(p: &ModulationParams) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::InScheme {
        scheme: p.scheme_label(),
        source: Box::new(e),
    }
}

fn scheme_seed(cfg: &ExperimentConfig, scheme: usize) -> u64 {
    seed::derive(cfg.seed, &[seed::label_hash(&cfg.id), scheme as u64])
}

fn block_seed(cfg: &ExperimentConfig, scheme: usize, block: usize) -> u64 {
    seed::derive(cfg.seed, &[seed::label_hash(&cfg.id), scheme as u64, block as u64])
}

/// `σ² = 10^{−SNR/10}`; `+inf` dB gives a noiseless channel.
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

fn detect(
    detector: Detector,
    ml: &MlDetector,
    y: &[Complex64],
    h_eff: &ComplexMatrix,
    c: &Constellation,
    sigma2: f64,
) -> Result<DetectionResult> {
    match detector {
        Detector::Ml => ml.detect(y, h_eff, c),
        Detector::Mmse if sigma2 > 0.0 => crate::detect::mmse_detect(y, h_eff, c, sigma2),
        // Noiseless MMSE is zero forcing.
        Detector::Mmse => {
            let z = solve(h_eff, y)?;
            let indices: Vec<usize> = z.iter().map(|v| c.nearest(*v)).collect();
            let s_hat = c.symbols(&indices);
            let hs = h_eff.mul_vec(&s_hat)?;
            let metric = y.iter().zip(&hs).map(|(a, b)| (a - b).norm_sqr()).sum();
            Ok(DetectionResult {
                s_hat,
                indices,
                metric,
                candidates_evaluated: 0,
            })
        }
    }
}

/// Bit errors of one block at noise variance `sigma2`.
#[allow(clippy::too_many_arguments)]
fn ber_block(
    cfg: &ExperimentConfig,
    scheme: usize,
    block: usize,
    p: &ModulationParams,
    modulator: &Modulator,
    sampler: &ChannelSampler,
    spec: &crate::channel::ChannelSpec,
    c: &Constellation,
    ml: &MlDetector,
    sigma2: f64,
) -> Result<u64> {
    let mut rng = seed::rng(block_seed(cfg, scheme, block));
    let tx = c.random_indices(&mut rng, p.k());
    let u = modulator.modulate(&c.symbols(&tx))?;
    let h = sampler.sample(&mut rng);
    let r = apply_channel_with(&u, &h, spec, sigma2, &mut rng)?;
    let y = modulator.demodulate(&r)?;
    let h_eff = effective_channel_any(&h, spec, p)?;
    let out = detect(cfg.ber.detector, ml, &y, &h_eff, c, sigma2)?;
    Ok(tx
        .iter()
        .zip(&out.indices)
        .map(|(a, b)| u64::from(c.bit_errors(*a, *b)))
        .sum())
}

/// BER per scheme per SNR point. `trials` counts blocks; the interval is
/// computed over `blocks·K·log2|𝕊|` bits.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let c = cfg.constellation()?;
    let ml = MlDetector::new(cfg.ber.budget);
    let mods = cfg.modulations()?;
    if cfg.ber.detector == Detector::Ml {
        for p in &mods {
            ml.check_budget(c.len(), p.k()).map_err(in_scheme(p))?;
        }
    }
    let mut records = Vec::new();
    for (si, p) in mods.iter().enumerate() {
        let spec = cfg.channel.spec(p.k()).map_err(in_scheme(p))?;
        let sampler = ChannelSampler::new(&spec)?;
        let modulator = Modulator::new(*p);
        let bits_per_block = (p.k() as u64) * u64::from(c.bits_per_symbol());
        for &snr_db in &cfg.ber.snr_db {
            let sigma2 = noise_variance(snr_db);
            let errors = (0..cfg.ber.blocks)
                .into_par_iter()
                .map(|b| ber_block(cfg, si, b, p, &modulator, &sampler, &spec, &c, &ml, sigma2))
                .collect::<Result<Vec<u64>>>()
                .map_err(in_scheme(p))?
                .into_iter()
                .sum::<u64>();
            let blocks = cfg.ber.blocks as u64;
            let mut rec = ResultRecord::for_scheme(&cfg.id, p, c.label(), cfg.seed)
                .x("snr_db", snr_db)
                .proportion("ber", errors, blocks * bits_per_block);
            rec.trials = blocks;
            records.push(rec);
        }
    }
    Ok(records)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Empirical CCDF per scheme plus a `THEORY(K)` curve for the common `K`.
pub fn run_papr_ccdf(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let c = cfg.constellation()?;
    let mods = cfg.modulations()?;
    let trials = cfg.papr.trials as u64;
    let mut records = Vec::new();
    for (si, p) in mods.iter().enumerate() {
        let mut samples = papr_samples(p, &c, cfg.papr.trials, scheme_seed(cfg, si));
        samples.sort_by(f64::total_cmp);
        for &g_db in &cfg.papr.gamma_db {
            let g = db_to_linear(g_db);
            let above = (samples.len() - samples.partition_point(|x| *x <= g)) as u64;
            records.push(
                ResultRecord::for_scheme(&cfg.id, p, c.label(), cfg.seed)
                    .x("gamma_db", g_db)
                    .proportion("ccdf", above, trials),
            );
        }
    }
    if let Some(p) = mods.first() {
        let k = p.k();
        for &g_db in &cfg.papr.gamma_db {
            let mut rec = ResultRecord::for_scheme(&cfg.id, &ModulationParams::fresnel(1, k), c.label(), cfg.seed)
                .x("gamma_db", g_db)
                .y("ccdf", Some(theoretical_ccdf(db_to_linear(g_db), k)));
            rec.scheme = format!("THEORY({k})");
            records.push(rec);
        }
    }
    Ok(records)
}

/// Overall PAPR for each constellation, sub-block size and kernel.
/// Rows whose search exceeds the budget are kept with an empty value and
/// `y_name = "skipped"`. The value does not depend on `M`; records use `M = 1`.
pub fn run_papr_table(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let mut records = Vec::new();
    for name in &cfg.papr.constellations {
        let c = Constellation::by_name(name)?;
        for &n in &cfg.papr.n_values {
            for kind in [TransformKind::Fresnel, TransformKind::Fourier] {
                let p = ModulationParams::new(1, n, kind)?;
                let mut rec = ResultRecord::for_scheme(&cfg.id, &p, c.label(), cfg.seed).x("N", n as f64);
                rec.scheme = match kind {
                    TransformKind::Fourier => "OTFS".into(),
                    _ => "VOCDM".into(),
                };
                match overall_papr_exhaustive(&p, &c, cfg.papr.budget) {
                    Ok(v) => {
                        rec = rec.y("overall_papr", Some(v.value));
                        rec.trials = v.candidates_evaluated;
                    }
                    Err(Error::BudgetExceeded { .. }) => rec = rec.y("skipped", None),
                    Err(e) => return Err(e),
                }
                records.push(rec);
            }
        }
    }
    Ok(records)
}

/// Data-dependent diversity of random data blocks, plus the order-set size
/// and `ρ` per scheme.
pub fn run_diversity_scan(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let c = cfg.constellation()?;
    let mods = cfg.modulations()?;
    let mut records = Vec::new();
    for (si, p) in mods.iter().enumerate() {
        let spec = cfg.channel.spec(p.k()).map_err(in_scheme(p))?;
        let bound = order_set(spec.l(), spec.q(), p.m, p.n).size();
        let base = ResultRecord::for_scheme(&cfg.id, p, c.label(), cfg.seed);
        records.push(base.clone().x("bound", 0.0).y("order_set_size", Some(bound as f64)));
        records.push(base.clone().x("bound", 0.0).y("rho", Some(spec.rho() as f64)));
        let estimates = (0..cfg.diversity.blocks)
            .into_par_iter()
            .map(|b| {
                let block = block_seed(cfg, si, b);
                let mut rng = seed::rng(block);
                let s = c.symbols(&c.random_indices(&mut rng, p.k()));
                let opts = DiversityOptions {
                    mode: match cfg.diversity.search {
                        DiversitySearch::Exhaustive => DiversityMode::Exhaustive,
                        DiversitySearch::Sampled => DiversityMode::Sampled {
                            n_samples: cfg.diversity.samples,
                            seed: seed::derive(block, &[1]),
                        },
                    },
                    domain: cfg.diversity.domain.into(),
                    budget: cfg.diversity.budget,
                    rank_tol: DEFAULT_RANK_TOL,
                };
                data_dependent_diversity(&s, &c, &spec, p, &opts)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(in_scheme(p))?;
        for (b, est) in estimates.into_iter().enumerate() {
            let mut rec = base.clone().x("block", b as f64).y("diversity", Some(est.value as f64));
            rec.trials = est.errors_evaluated;
            records.push(rec);
        }
    }
    Ok(records)
}

/// Runs the configured experiment on a pool of `cfg.workers` threads.
/// `verify` produces no records; use [`super::verify::run_verify`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    with_workers(cfg.workers, || match cfg.experiment {
        ExperimentKind::Ber => run_ber_sweep(cfg),
        ExperimentKind::PaprCcdf => run_papr_ccdf(cfg),
        ExperimentKind::PaprTable => run_papr_table(cfg),
        ExperimentKind::DiversityScan => run_diversity_scan(cfg),
        ExperimentKind::Verify => Err(Error::Config("verify has no result records".into())),
    })
}

/// Runs `f` inside a dedicated pool; `0` means one thread per core.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SchemeConfig;

    fn small_ber(detector: Detector, snr_db: Vec<f64>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::Ber);
        cfg.constellation = "bpsk".into();
        cfg.schemes = vec![
            SchemeConfig { m: 2, n: 2, kind: TransformKind::Fresnel },
            SchemeConfig { m: 1, n: 4, kind: TransformKind::Fourier },
        ];
        cfg.ber.snr_db = snr_db;
        cfg.ber.blocks = 60;
        cfg.ber.detector = detector;
        cfg
    }

    #[test]
    fn noiseless_ber_is_zero() {
        for det in [Detector::Ml, Detector::Mmse] {
            let recs = run_ber_sweep(&small_ber(det, vec![f64::INFINITY])).unwrap();
            assert_eq!(recs.len(), 2);
            for r in recs {
                assert_eq!(r.errors, 0, "{det:?} {}", r.scheme);
                assert_eq!(r.y_value, Some(0.0));
                assert_eq!(r.trials, 60);
            }
        }
    }

    #[test]
    fn ber_decreases_with_snr() {
        let recs = run_ber_sweep(&small_ber(Detector::Ml, vec![0.0, 20.0])).unwrap();
        assert!(recs[0].y_value.unwrap() > recs[1].y_value.unwrap());
        assert!(recs.iter().all(|r| (0.0..=1.0).contains(&r.y_value.unwrap())));
    }

    #[test]
    fn budget_error_names_scheme() {
        let mut cfg = small_ber(Detector::Ml, vec![10.0]);
        cfg.ber.budget = 8;
        let err = run_ber_sweep(&cfg).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("VOCDM(2,2)") && text.contains("budget"), "{text}");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small_ber(Detector::Ml, vec![5.0]);
        let one = with_workers(1, || run_ber_sweep(&cfg)).unwrap();
        let three = with_workers(3, || run_ber_sweep(&cfg)).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn papr_ccdf_records_are_monotone() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::PaprCcdf);
        cfg.schemes = vec![
            SchemeConfig { m: 1, n: 64, kind: TransformKind::Fresnel },
            SchemeConfig { m: 16, n: 4, kind: TransformKind::Fresnel },
        ];
        cfg.papr.trials = 500;
        let recs = run_papr_ccdf(&cfg).unwrap();
        let grid = cfg.papr.gamma_db.len();
        assert_eq!(recs.len(), 3 * grid);
        for curve in recs.chunks(grid) {
            for w in curve.windows(2) {
                assert!(w[1].y_value.unwrap() <= w[0].y_value.unwrap());
            }
        }
        assert_eq!(recs[2 * grid].scheme, "THEORY(64)");
        // VOCDM(16,4) never exceeds 4 = 6.02 dB
        for r in &recs[grid..2 * grid] {
            if r.x_value > 6.03 {
                assert_eq!(r.errors, 0);
            }
        }
    }

    #[test]
    fn papr_table_marks_skipped_rows() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::PaprTable);
        cfg.papr.constellations = vec!["bpsk".into()];
        cfg.papr.n_values = vec![3, 12];
        cfg.papr.budget = 1 << 10;
        let recs = run_papr_table(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        assert!((recs[0].y_value.unwrap() - 2.333).abs() < 0.01);
        assert!((recs[1].y_value.unwrap() - 3.0).abs() < 1e-9);
        assert_eq!((recs[0].scheme.as_str(), recs[1].scheme.as_str()), ("VOCDM", "OTFS"));
        assert!(recs[2].is_skipped() && recs[3].is_skipped());
        assert_eq!(recs[2].y_name, "skipped");
    }

    #[test]
    fn diversity_scan_respects_bound() {
        let mut cfg = ExperimentConfig::preset(ExperimentKind::DiversityScan);
        cfg.diversity.blocks = 3;
        cfg.diversity.samples = 50;
        let recs = run_diversity_scan(&cfg).unwrap();
        assert_eq!(recs.len(), 3 * 5);
        for chunk in recs.chunks(5) {
            let bound = chunk[0].y_value.unwrap();
            assert_eq!(chunk[1].y_value, Some(6.0));
            assert!(chunk[2..].iter().all(|r| r.y_value.unwrap() <= bound));
        }
        assert_eq!(recs[0].y_value, Some(6.0));
        assert_eq!(recs[5].y_value, Some(4.0));
        assert_eq!(recs[10].y_value, Some(2.0));
    }

    #[test]
    fn noise_variance_conversion() {
        assert_eq!(noise_variance(0.0), 1.0);
        assert!((noise_variance(10.0) - 0.1).abs() < 1e-15);
        assert_eq!(noise_variance(f64::INFINITY), 0.0);
    }
}
