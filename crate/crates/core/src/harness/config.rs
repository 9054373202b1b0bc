//! TOML experiment configuration.
//!
//! Every key is optional; missing keys fall back to the preset of the chosen
//! experiment (see [`ExperimentConfig::preset`]). The schema is documented in
//! `configs/README.md` at the repository root.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{grid_from_physical, ChannelSpec, GridMapping};
use crate::diversity::ErrorDomain;
use crate::detect::DEFAULT_ML_BUDGET;
use crate::modem::{Constellation, ModulationParams, TransformKind};
use crate::numerics::ComplexMatrix;
use crate::papr::DEFAULT_PAPR_BUDGET;
use crate::{Complex64, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Verify,
    Ber,
    PaprCcdf,
    PaprTable,
    DiversityScan,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Verify => "verify",
            Self::Ber => "ber",
            Self::PaprCcdf => "papr-ccdf",
            Self::PaprTable => "papr-table",
            Self::DiversityScan => "diversity-scan",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Verify, Self::Ber, Self::PaprCcdf, Self::PaprTable, Self::DiversityScan]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Ml,
    Mmse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown output format `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub m: usize,
    pub n: usize,
    #[serde(default = "fresnel")]
    pub kind: TransformKind,
}

fn fresnel() -> TransformKind {
    TransformKind::Fresnel
}

impl SchemeConfig {
    pub fn params(&self) -> Result<ModulationParams> {
        ModulationParams::new(self.m, self.n, self.kind)
    }
}

/// Coefficient covariance choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Covariance {
    /// `R_h = I/ρ`: unit total channel energy.
    Iid,
    /// `R_h = I`.
    Unit,
    /// `R_h = diag(v)`, in coefficient order.
    Diagonal(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Delay taps minus one. Ignored when `physical` is set.
    #[serde(default)]
    pub l: usize,
    /// Doppler half-width. Ignored when `physical` is set.
    #[serde(default)]
    pub q: usize,
    #[serde(default)]
    pub physical: Option<PhysicalChannel>,
    #[serde(default = "iid")]
    pub covariance: Covariance,
}

fn iid() -> Covariance {
    Covariance::Iid
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalChannel {
    pub tau_max: f64,
    pub f_max: f64,
    pub t_s: f64,
}

impl ChannelConfig {
    pub fn new(l: usize, q: usize) -> Self {
        Self {
            l,
            q,
            physical: None,
            covariance: Covariance::Iid,
        }
    }

    pub fn grid(&self, k: usize) -> Result<(usize, usize)> {
        match self.physical {
            Some(ph) => grid_from_physical(&GridMapping {
                tau_max: ph.tau_max,
                f_max: ph.f_max,
                t_s: ph.t_s,
                k,
            }),
            None => Ok((self.l, self.q)),
        }
    }

    pub fn spec(&self, k: usize) -> Result<ChannelSpec> {
        let (l, q) = self.grid(k)?;
        match &self.covariance {
            Covariance::Iid => ChannelSpec::iid(l, q, k),
            Covariance::Unit => ChannelSpec::with_variance(l, q, k, 1.0),
            Covariance::Diagonal(v) => {
                let rho = (l + 1) * (2 * q + 1);
                if v.len() != rho {
                    return Err(Error::Config(format!(
                        "channel.covariance.diagonal needs {rho} entries, got {}",
                        v.len()
                    )));
                }
                let d: Vec<_> = v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
                ChannelSpec::new(l, q, k, ComplexMatrix::from_diag(&d))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerConfig {
    pub snr_db: Vec<f64>,
    /// Blocks per SNR point.
    pub blocks: usize,
    pub detector: Detector,
    /// Cap on `|𝕊|^K` for the ML detector.
    #[serde(default = "ml_budget")]
    pub budget: u64,
}

fn ml_budget() -> u64 {
    DEFAULT_ML_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaprConfig {
    /// CCDF thresholds in dB.
    #[serde(default)]
    pub gamma_db: Vec<f64>,
    #[serde(default = "papr_trials")]
    pub trials: usize,
    /// Sub-block sizes for the overall PAPR table.
    #[serde(default)]
    pub n_values: Vec<usize>,
    /// Constellations for the overall PAPR table.
    #[serde(default)]
    pub constellations: Vec<String>,
    #[serde(default = "papr_budget")]
    pub budget: u64,
}

fn papr_trials() -> usize {
    100_000
}

fn papr_budget() -> u64 {
    DEFAULT_PAPR_BUDGET
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiversitySearch {
    Sampled,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainConfig {
    Realizable,
    FullDifference,
}

impl From<DomainConfig> for ErrorDomain {
    fn from(d: DomainConfig) -> Self {
        match d {
            DomainConfig::Realizable => ErrorDomain::Realizable,
            DomainConfig::FullDifference => ErrorDomain::FullDifference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiversityConfig {
    /// Data blocks to analyse per scheme.
    pub blocks: usize,
    pub search: DiversitySearch,
    pub domain: DomainConfig,
    /// Random error vectors per block in sampled mode.
    pub samples: usize,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Experiment id written to every record and mixed into the seeds.
    pub id: String,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub constellation: String,
    pub schemes: Vec<SchemeConfig>,
    pub channel: ChannelConfig,
    pub ber: BerConfig,
    pub papr: PaprConfig,
    pub diversity: DiversityConfig,
}

/// Mirror of [`ExperimentConfig`] with every field optional, as read from
/// disk before presets are applied.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<ExperimentKind>,
    id: Option<String>,
    seed: Option<u64>,
    workers: Option<usize>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
    constellation: Option<String>,
    schemes: Option<Vec<SchemeConfig>>,
    channel: Option<ChannelConfig>,
    ber: Option<RawBer>,
    papr: Option<RawPapr>,
    diversity: Option<RawDiversity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBer {
    snr_db: Option<Vec<f64>>,
    blocks: Option<usize>,
    detector: Option<Detector>,
    budget: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPapr {
    gamma_db: Option<Vec<f64>>,
    trials: Option<usize>,
    n_values: Option<Vec<usize>>,
    constellations: Option<Vec<String>>,
    budget: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiversity {
    blocks: Option<usize>,
    search: Option<DiversitySearch>,
    domain: Option<DomainConfig>,
    samples: Option<usize>,
    budget: Option<u64>,
}

fn schemes(list: &[(usize, usize, TransformKind)]) -> Vec<SchemeConfig> {
    list.iter().map(|&(m, n, kind)| SchemeConfig { m, n, kind }).collect()
}

impl ExperimentConfig {
    /// Defaults for each experiment: the K = 8 BER comparison, the K = 400
    /// PAPR CCDF, the full overall-PAPR table and a K = 12 diversity scan.
    pub fn preset(kind: ExperimentKind) -> Self {
        use TransformKind::*;
        let ber = BerConfig {
            snr_db: vec![10.0, 12.0, 14.0, 16.0],
            blocks: 20_000,
            detector: Detector::Ml,
            budget: DEFAULT_ML_BUDGET,
        };
        let papr = PaprConfig {
            gamma_db: (0..=24).map(|i| 4.0 + 0.5 * i as f64).collect(),
            trials: papr_trials(),
            n_values: vec![3, 5, 9, 12],
            constellations: vec!["bpsk".into(), "qpsk".into(), "4pam".into()],
            budget: DEFAULT_PAPR_BUDGET,
        };
        let diversity = DiversityConfig {
            blocks: 20,
            search: DiversitySearch::Sampled,
            domain: DomainConfig::Realizable,
            samples: 1000,
            budget: crate::diversity::DEFAULT_DIVERSITY_BUDGET,
        };
        let (constellation, scheme_list, channel) = match kind {
            ExperimentKind::Ber => (
                "qpsk",
                schemes(&[(2, 4, Fresnel), (1, 8, Fresnel), (8, 1, Fresnel)]),
                ChannelConfig::new(1, 1),
            ),
            ExperimentKind::PaprCcdf => (
                "bpsk",
                schemes(&[(1, 400, Fresnel), (100, 4, Fresnel), (400, 1, Fresnel), (100, 4, Fourier)]),
                ChannelConfig::new(0, 0),
            ),
            ExperimentKind::PaprTable => ("bpsk", Vec::new(), ChannelConfig::new(0, 0)),
            ExperimentKind::DiversityScan => (
                "qpsk",
                schemes(&[(2, 6, Fresnel), (1, 12, Fresnel), (12, 1, Fresnel)]),
                ChannelConfig::new(1, 1),
            ),
            ExperimentKind::Verify => ("bpsk", Vec::new(), ChannelConfig::new(0, 0)),
        };
        Self {
            experiment: kind,
            id: kind.name().to_string(),
            seed: 1,
            workers: 0,
            output: None,
            format: OutputFormat::Csv,
            constellation: constellation.into(),
            schemes: scheme_list,
            channel,
            ber,
            papr,
            diversity,
        }
    }

    /// Parses TOML text. `fallback` selects the preset when the text has no
    /// `experiment` key.
    pub fn from_toml_str(text: &str, fallback: Option<ExperimentKind>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let kind = raw
            .experiment
            .or(fallback)
            .ok_or_else(|| Error::Config("missing `experiment` key".into()))?;
        if let (Some(a), Some(b)) = (raw.experiment, fallback) {
            if a != b {
                return Err(Error::Config(format!(
                    "config is for `{a}` but `{b}` was requested"
                )));
            }
        }
        let mut cfg = Self::preset(kind);
        macro_rules! take {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        take!(cfg.id, raw.id);
        take!(cfg.seed, raw.seed);
        take!(cfg.workers, raw.workers);
        cfg.output = raw.output.or(cfg.output);
        take!(cfg.format, raw.format);
        take!(cfg.constellation, raw.constellation);
        take!(cfg.schemes, raw.schemes);
        take!(cfg.channel, raw.channel);
        if let Some(b) = raw.ber {
            take!(cfg.ber.snr_db, b.snr_db);
            take!(cfg.ber.blocks, b.blocks);
            take!(cfg.ber.detector, b.detector);
            take!(cfg.ber.budget, b.budget);
        }
        if let Some(p) = raw.papr {
            take!(cfg.papr.gamma_db, p.gamma_db);
            take!(cfg.papr.trials, p.trials);
            take!(cfg.papr.n_values, p.n_values);
            take!(cfg.papr.constellations, p.constellations);
            take!(cfg.papr.budget, p.budget);
        }
        if let Some(d) = raw.diversity {
            take!(cfg.diversity.blocks, d.blocks);
            take!(cfg.diversity.search, d.search);
            take!(cfg.diversity.domain, d.domain);
            take!(cfg.diversity.samples, d.samples);
            take!(cfg.diversity.budget, d.budget);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, fallback: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, fallback)
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::by_name(&self.constellation)
    }

    pub fn modulations(&self) -> Result<Vec<ModulationParams>> {
        self.schemes.iter().map(SchemeConfig::params).collect()
    }

    /// Checks the cross-field invariants of the chosen experiment.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.id.is_empty() {
            return bad("`id` must not be empty".into());
        }
        self.constellation()?;
        let mods = self.modulations()?;
        let needs_schemes = matches!(
            self.experiment,
            ExperimentKind::Ber | ExperimentKind::PaprCcdf | ExperimentKind::DiversityScan
        );
        if needs_schemes && mods.is_empty() {
            return bad("at least one [[schemes]] entry is required".into());
        }
        if matches!(self.experiment, ExperimentKind::Ber | ExperimentKind::PaprCcdf | ExperimentKind::DiversityScan) {
            if let Some(first) = mods.first() {
                if let Some(other) = mods.iter().find(|p| p.k() != first.k()) {
                    return bad(format!(
                        "all schemes must share the block size: {} has K={}, {} has K={}",
                        first.scheme_label(),
                        first.k(),
                        other.scheme_label(),
                        other.k()
                    ));
                }
            }
        }
        match self.experiment {
            ExperimentKind::Ber => {
                if self.ber.snr_db.is_empty() {
                    return bad("ber.snr_db must not be empty".into());
                }
                if self.ber.snr_db.iter().any(|x| x.is_nan()) {
                    return bad("ber.snr_db contains NaN".into());
                }
                if self.ber.blocks == 0 {
                    return bad("ber.blocks must be at least 1".into());
                }
                self.channel.spec(mods[0].k())?;
            }
            ExperimentKind::PaprCcdf => {
                if self.papr.trials == 0 {
                    return bad("papr.trials must be at least 1".into());
                }
                if self.papr.gamma_db.is_empty() {
                    return bad("papr.gamma_db must not be empty".into());
                }
            }
            ExperimentKind::PaprTable => {
                if self.papr.n_values.is_empty() || self.papr.constellations.is_empty() {
                    return bad("papr.n_values and papr.constellations must not be empty".into());
                }
                if self.papr.n_values.contains(&0) {
                    return bad("papr.n_values entries must be positive".into());
                }
                for name in &self.papr.constellations {
                    Constellation::by_name(name)?;
                }
            }
            ExperimentKind::DiversityScan => {
                if self.diversity.blocks == 0 {
                    return bad("diversity.blocks must be at least 1".into());
                }
                if let Some(p) = mods.iter().find(|p| p.kind != TransformKind::Fresnel) {
                    return bad(format!(
                        "diversity scans need the fresnel kind, {} uses {}",
                        p.scheme_label(),
                        p.kind
                    ));
                }
                self.channel.spec(mods[0].k())?;
            }
            ExperimentKind::Verify => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in [
            ExperimentKind::Verify,
            ExperimentKind::Ber,
            ExperimentKind::PaprCcdf,
            ExperimentKind::PaprTable,
            ExperimentKind::DiversityScan,
        ] {
            ExperimentConfig::preset(kind).validate().unwrap();
            assert_eq!(kind.name().parse::<ExperimentKind>().unwrap(), kind);
        }
    }

    #[test]
    fn overrides_apply_on_top_of_preset() {
        let text = r#"
            experiment = "ber"
            seed = 9
            [[schemes]]
            m = 2
            n = 2
            [ber]
            blocks = 10
            detector = "mmse"
        "#;
        let cfg = ExperimentConfig::from_toml_str(text, None).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.schemes.len(), 1);
        assert_eq!(cfg.schemes[0].kind, TransformKind::Fresnel);
        assert_eq!(cfg.ber.blocks, 10);
        assert_eq!(cfg.ber.detector, Detector::Mmse);
        assert_eq!(cfg.ber.snr_db, vec![10.0, 12.0, 14.0, 16.0]);
    }

    #[test]
    fn mismatched_block_sizes_rejected() {
        let text = r#"
            experiment = "ber"
            [[schemes]]
            m = 2
            n = 4
            [[schemes]]
            m = 1
            n = 12
        "#;
        let err = ExperimentConfig::from_toml_str(text, None).unwrap_err();
        assert!(err.to_string().contains("block size"), "{err}");
    }

    #[test]
    fn invalid_configs_rejected() {
        let cases = [
            "experiment = \"ber\"\n[ber]\nsnr_db = []",
            "experiment = \"ber\"\n[ber]\nblocks = 0",
            "experiment = \"papr-ccdf\"\n[papr]\ntrials = 0",
            "experiment = \"ber\"\nconstellation = \"8psk\"",
            "experiment = \"ber\"\nunknown_key = 1",
            "experiment = \"nope\"",
            "seed = 3",
        ];
        for text in cases {
            assert!(ExperimentConfig::from_toml_str(text, None).is_err(), "{text}");
        }
        assert!(ExperimentConfig::from_toml_str("experiment = \"ber\"", Some(ExperimentKind::Verify)).is_err());
    }

    #[test]
    fn physical_channel_and_covariances() {
        let text = r#"
            experiment = "diversity-scan"
            [channel]
            physical = { tau_max = 1.0e-6, f_max = 100.0, t_s = 1.0e-6 }
            covariance = { diagonal = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0] }
        "#;
        let cfg = ExperimentConfig::from_toml_str(text, None).unwrap();
        assert_eq!(cfg.channel.grid(12).unwrap(), (1, 1));
        let spec = cfg.channel.spec(12).unwrap();
        assert_eq!(spec.rho(), 6);
        let unit = ChannelConfig {
            covariance: Covariance::Unit,
            ..ChannelConfig::new(1, 0)
        };
        assert_eq!(unit.spec(4).unwrap().r_h()[(0, 0)], Complex64::new(1.0, 0.0));
        let short = ChannelConfig {
            covariance: Covariance::Diagonal(vec![1.0]),
            ..ChannelConfig::new(1, 0)
        };
        assert!(short.spec(4).is_err());
    }

    #[test]
    fn fallback_selects_preset() {
        let cfg = ExperimentConfig::from_toml_str("seed = 4", Some(ExperimentKind::PaprTable)).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::PaprTable);
        assert_eq!(cfg.seed, 4);
    }
}
