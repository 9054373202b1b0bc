//! Constellations and the block modulator `u = (T_Nᴴ ⊗ I_M)·s`.
//!
//! With the Fresnel kernel `T_N = Φ_N` this is VOCDM; `N = 1` collapses to
//! single carrier and `M = 1` to OCDM. The Fourier kernel (unitary DFT) gives
//! the OTFS-equivalent baseline.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::fresnel::{idfnt_first_column, idfnt_matrix};
use crate::numerics::{kron, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

const ENERGY_TOL: f64 = 1e-9;

/// Finite symbol alphabet with unit average energy.
///
/// Point `i` carries the bit label `i` (on `bits_per_symbol` bits); the
/// built-in constellations order their points so that this labelling is a
/// Gray mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    label: String,
    points: Vec<Complex64>,
    peak_energy: f64,
}

impl Constellation {
    pub fn new(label: impl Into<String>, points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConstellation("no points".into()));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidConstellation("non-finite point".into()));
        }
        let avg = points.iter().map(Complex64::norm_sqr).sum::<f64>() / points.len() as f64;
        if (avg - 1.0).abs() > ENERGY_TOL {
            return Err(Error::InvalidConstellation(format!(
                "average energy is {avg}, expected 1"
            )));
        }
        for (i, a) in points.iter().enumerate() {
            if points[..i].iter().any(|b| (a - b).norm() < 1e-12) {
                return Err(Error::InvalidConstellation(format!("duplicate point {a}")));
            }
        }
        let peak_energy = points.iter().map(Complex64::norm_sqr).fold(0.0, f64::max);
        Ok(Self {
            label: label.into(),
            points,
            peak_energy,
        })
    }

    /// `{+1, −1}`, natural labelling.
    pub fn bpsk() -> Self {
        Self::new("bpsk", vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
            .expect("valid constellation")
    }

    /// `(±1 ± j)/√2`; bit 0 selects the in-phase sign and bit 1 the quadrature sign.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(
            "qpsk",
            vec![
                Complex64::new(a, a),
                Complex64::new(-a, a),
                Complex64::new(a, -a),
                Complex64::new(-a, -a),
            ],
        )
        .expect("valid constellation")
    }

    /// `{±1, ±3}/√5` with Gray labels 00→−3, 01→−1, 11→+1, 10→+3.
    pub fn pam4() -> Self {
        let s = 1.0 / 5f64.sqrt();
        Self::new(
            "4pam",
            [-3.0, -1.0, 3.0, 1.0]
                .iter()
                .map(|&x| Complex64::new(x * s, 0.0))
                .collect(),
        )
        .expect("valid constellation")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::bpsk()),
            "qpsk" | "4qam" => Ok(Self::qpsk()),
            "4pam" | "4-pam" | "pam4" => Ok(Self::pam4()),
            other => Err(Error::InvalidConstellation(format!("unknown constellation {other:?}"))),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `a = max_{s∈𝕊} |s|²`.
    pub fn peak_energy(&self) -> f64 {
        self.peak_energy
    }

    /// Bits carried per symbol, `⌊log2 |𝕊|⌋`.
    pub fn bits_per_symbol(&self) -> u32 {
        usize::BITS - 1 - self.points.len().leading_zeros()
    }

    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// Distinct nonzero pairwise differences `s − s′`, sorted by magnitude,
    /// then by decreasing real part, then by decreasing imaginary part.
    pub fn difference_alphabet(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for a in &self.points {
            for b in &self.points {
                let d = a - b;
                if d.norm() > 1e-12 && !out.iter().any(|x| (x - d).norm() < 1e-12) {
                    out.push(d);
                }
            }
        }
        out.sort_by(|x, y| {
            x.norm()
                .total_cmp(&y.norm())
                .then(y.re.total_cmp(&x.re))
                .then(y.im.total_cmp(&x.im))
        });
        out
    }

    /// Index of `z` in the alphabet, if it is (numerically) a point.
    pub fn index_of(&self, z: Complex64) -> Option<usize> {
        let i = self.nearest(z);
        ((self.points[i] - z).norm() < 1e-9).then_some(i)
    }

    /// Unit-modulus rotations `g` with `g·𝕊 = 𝕊`, identity first.
    pub fn phase_symmetries(&self) -> Vec<Complex64> {
        let p0 = self.points[0];
        let mut out = Vec::new();
        for p in &self.points {
            if (p.norm() - p0.norm()).abs() > 1e-12 || p0.norm() == 0.0 {
                continue;
            }
            let g = p / p0;
            if self.points.iter().all(|x| self.index_of(x * g).is_some())
                && !out.iter().any(|h: &Complex64| (h - g).norm() < 1e-9)
            {
                out.push(g);
            }
        }
        out
    }

    pub fn random_indices<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> Vec<usize> {
        (0..k).map(|_| rng.random_range(0..self.points.len())).collect()
    }

    pub fn symbols(&self, indices: &[usize]) -> ComplexVector {
        indices.iter().map(|&i| self.points[i]).collect()
    }

    /// Hamming distance between the bit labels of two points.
    pub fn bit_errors(&self, a: usize, b: usize) -> u32 {
        ((a ^ b) as u32).count_ones()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Fresnel,
    Fourier,
    Identity,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fresnel => "fresnel",
            Self::Fourier => "fourier",
            Self::Identity => "identity",
        })
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fresnel" | "vocdm" => Ok(Self::Fresnel),
            "fourier" | "otfs" => Ok(Self::Fourier),
            "identity" => Ok(Self::Identity),
            other => Err(Error::InvalidParameter(format!("unknown transform kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModulationParams {
    pub m: usize,
    pub n: usize,
    pub kind: TransformKind,
}

impl ModulationParams {
    pub fn new(m: usize, n: usize, kind: TransformKind) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "M and N must be positive, got ({m}, {n})"
            )));
        }
        Ok(Self { m, n, kind })
    }

    pub fn fresnel(m: usize, n: usize) -> Self {
        Self::new(m, n, TransformKind::Fresnel).expect("positive sizes")
    }

    pub fn fourier(m: usize, n: usize) -> Self {
        Self::new(m, n, TransformKind::Fourier).expect("positive sizes")
    }

    pub fn k(&self) -> usize {
        self.m * self.n
    }

    /// Human-readable scheme name, e.g. `VOCDM(2,6)`, `SC(12,1)`, `OTFS(2,6)`.
    pub fn scheme_label(&self) -> String {
        let name = match self.kind {
            TransformKind::Fresnel if self.n == 1 => "SC",
            TransformKind::Fresnel if self.m == 1 => "OCDM",
            TransformKind::Fresnel => "VOCDM",
            TransformKind::Fourier => "OTFS",
            TransformKind::Identity => "IDENTITY",
        };
        format!("{name}({},{})", self.m, self.n)
    }
}

/// `N × N` per-sub-block transform applied at the transmitter (`Φ_Nᴴ`,
/// `F_Nᴴ` or `I_N`).
pub fn subblock_transform(n: usize, kind: TransformKind) -> ComplexMatrix {
    match kind {
        TransformKind::Fresnel => idfnt_matrix(n),
        TransformKind::Fourier => {
            let s = 1.0 / (n as f64).sqrt();
            ComplexMatrix::from_fn(n, n, |r, c| {
                crate::numerics::phasor((r * c) as i64, n) * s
            })
        }
        TransformKind::Identity => ComplexMatrix::identity(n),
    }
}

/// Dense `K × K` modulation matrix. Identity kind always gives `I_K`.
pub fn modulation_matrix(p: &ModulationParams) -> ComplexMatrix {
    match p.kind {
        TransformKind::Identity => ComplexMatrix::identity(p.k()),
        kind => kron(&subblock_transform(p.n, kind), &ComplexMatrix::identity(p.m)),
    }
}

/// Dense receiver-side matrix `T_N ⊗ I_M`.
pub fn demodulation_matrix(p: &ModulationParams) -> ComplexMatrix {
    modulation_matrix(p).adjoint()
}

/// Sub-block sizes above this use FFTs instead of a dense `N × N` product.
const DENSE_LIMIT: usize = 32;

#[derive(Clone)]
enum Engine {
    Identity,
    Dense {
        tx: ComplexMatrix,
        rx: ComplexMatrix,
    },
    Fft {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        /// Fresnel: DFT of `φ₀`, pre-divided by `N`. Fourier: `None`.
        kernel: Option<Vec<Complex64>>,
    },
}

/// Reusable modulator for one parameter set. Cheap to share across threads.
#[derive(Clone)]
pub struct Modulator {
    params: ModulationParams,
    engine: Engine,
}

impl fmt::Debug for Modulator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let engine = match self.engine {
            Engine::Identity => "identity",
            Engine::Dense { .. } => "dense",
            Engine::Fft { .. } => "fft",
        };
        f.debug_struct("Modulator")
            .field("params", &self.params)
            .field("engine", &engine)
            .finish()
    }
}

impl Modulator {
    pub fn new(params: ModulationParams) -> Self {
        Self::with_dense_limit(params, DENSE_LIMIT)
    }

    /// Like [`Modulator::new`] but with an explicit cut-over between the
    /// dense and FFT paths (mainly for testing both).
    pub fn with_dense_limit(params: ModulationParams, dense_limit: usize) -> Self {
        let n = params.n;
        let engine = match params.kind {
            TransformKind::Identity => Engine::Identity,
            _ if n == 1 => Engine::Identity,
            kind if n <= dense_limit => {
                let tx = subblock_transform(n, kind);
                Engine::Dense {
                    rx: tx.adjoint(),
                    tx,
                }
            }
            kind => {
                let mut planner = FftPlanner::new();
                let forward = planner.plan_fft_forward(n);
                let inverse = planner.plan_fft_inverse(n);
                let kernel = (kind == TransformKind::Fresnel).then(|| {
                    let mut spec = idfnt_first_column(n);
                    forward.process(&mut spec);
                    let inv_n = 1.0 / n as f64;
                    spec.iter().map(|x| x * inv_n).collect()
                });
                Engine::Fft {
                    forward,
                    inverse,
                    kernel,
                }
            }
        };
        Self { params, engine }
    }

    pub fn params(&self) -> &ModulationParams {
        &self.params
    }

    fn check_len(&self, op: &'static str, x: &[Complex64]) -> Result<()> {
        if x.len() != self.params.k() {
            return Err(Error::LengthMismatch {
                op,
                expected: self.params.k(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn modulate(&self, s: &[Complex64]) -> Result<ComplexVector> {
        self.check_len("modulate", s)?;
        Ok(self.apply(s, true))
    }

    pub fn demodulate(&self, r: &[Complex64]) -> Result<ComplexVector> {
        self.check_len("demodulate", r)?;
        Ok(self.apply(r, false))
    }

    fn apply(&self, x: &[Complex64], transmit: bool) -> ComplexVector {
        let (m, n) = (self.params.m, self.params.n);
        let mut out = x.to_vec();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        match &self.engine {
            Engine::Identity => {}
            Engine::Dense { tx, rx } => {
                let t = if transmit { tx } else { rx };
                for sub in 0..m {
                    for (row, b) in buf.iter_mut().enumerate() {
                        *b = t
                            .row(row)
                            .iter()
                            .enumerate()
                            .map(|(col, a)| a * x[col * m + sub])
                            .sum();
                    }
                    for (i, b) in buf.iter().enumerate() {
                        out[i * m + sub] = *b;
                    }
                }
            }
            Engine::Fft {
                forward,
                inverse,
                kernel,
            } => {
                let mut scratch =
                    vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
                let unitary = 1.0 / (n as f64).sqrt();
                for sub in 0..m {
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = x[i * m + sub];
                    }
                    match kernel {
                        Some(spec) => {
                            // Φᴴ is circulant with eigenvalues DFT(φ₀); Φ uses the conjugates.
                            forward.process_with_scratch(&mut buf, &mut scratch);
                            for (b, s) in buf.iter_mut().zip(spec) {
                                *b *= if transmit { *s } else { s.conj() };
                            }
                            inverse.process_with_scratch(&mut buf, &mut scratch);
                        }
                        None => {
                            let plan = if transmit { inverse } else { forward };
                            plan.process_with_scratch(&mut buf, &mut scratch);
                            for b in buf.iter_mut() {
                                *b *= unitary;
                            }
                        }
                    }
                    for (i, b) in buf.iter().enumerate() {
                        out[i * m + sub] = *b;
                    }
                }
            }
        }
        out
    }
}

/// `u = modulation_matrix(p)·s`.
pub fn modulate(s: &[Complex64], p: &ModulationParams) -> Result<ComplexVector> {
    Modulator::new(*p).modulate(s)
}

/// `y = (T_N ⊗ I_M)·r`, the inverse of [`modulate`].
pub fn demodulate(r: &[Complex64], p: &ModulationParams) -> Result<ComplexVector> {
    Modulator::new(*p).demodulate(r)
}

/// The interleaved sub-vector `[ū_m]_n = [u]_{nM+m}`.
pub fn subvector(u: &[Complex64], p: &ModulationParams, m: usize) -> Result<ComplexVector> {
    if u.len() != p.k() {
        return Err(Error::LengthMismatch {
            op: "subvector",
            expected: p.k(),
            actual: u.len(),
        });
    }
    if m >= p.m {
        return Err(Error::IndexOutOfRange {
            what: "sub-vector index",
            index: m as i64,
            bound: p.m,
        });
    }
    Ok((0..p.n).map(|i| u[i * p.m + m]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fresnel::dfnt_matrix;
    use crate::numerics::{matmul, norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vec(seed: u64, k: usize) -> ComplexVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn builtin_constellations_are_normalised() {
        for (c, a) in [
            (Constellation::bpsk(), 1.0),
            (Constellation::qpsk(), 1.0),
            (Constellation::pam4(), 1.8),
        ] {
            let avg = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.len() as f64;
            assert!((avg - 1.0).abs() < 1e-12);
            assert!((c.peak_energy() - a).abs() < 1e-12, "{}", c.label());
        }
    }

    #[test]
    fn builtin_labelling_is_gray() {
        for c in [Constellation::qpsk(), Constellation::pam4()] {
            let d = c.min_distance();
            for i in 0..c.len() {
                for j in 0..c.len() {
                    if i != j && ((c.points()[i] - c.points()[j]).norm() - d).abs() < 1e-9 {
                        assert_eq!(c.bit_errors(i, j), 1, "{} {i} {j}", c.label());
                    }
                }
            }
        }
        assert_eq!(Constellation::qpsk().bits_per_symbol(), 2);
        assert_eq!(Constellation::bpsk().bits_per_symbol(), 1);
    }

    #[test]
    fn constellation_validation() {
        assert!(Constellation::new("x", vec![]).is_err());
        assert!(Constellation::new("x", vec![Complex64::new(2.0, 0.0)]).is_err());
        assert!(Constellation::new("x", vec![Complex64::new(1.0, 0.0); 2]).is_err());
        assert!(Constellation::by_name("8psk").is_err());
        assert_eq!(Constellation::by_name("QPSK").unwrap(), Constellation::qpsk());
    }

    #[test]
    fn phase_symmetries() {
        assert_eq!(Constellation::bpsk().phase_symmetries().len(), 2);
        assert_eq!(Constellation::qpsk().phase_symmetries().len(), 4);
        assert_eq!(Constellation::pam4().phase_symmetries().len(), 2);
    }

    #[test]
    fn difference_alphabet_bpsk() {
        let d = Constellation::bpsk().difference_alphabet();
        assert_eq!(d, vec![Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.0)]);
    }

    #[test]
    fn single_carrier_case_is_identity() {
        let p = ModulationParams::fresnel(6, 1);
        assert_eq!(modulation_matrix(&p), ComplexMatrix::identity(6));
        let s = random_vec(1, 6);
        assert_eq!(modulate(&s, &p).unwrap(), s);
        let id = ModulationParams::new(2, 3, TransformKind::Identity).unwrap();
        assert_eq!(modulation_matrix(&id), ComplexMatrix::identity(6));
        assert_eq!(modulate(&s, &id).unwrap(), s);
    }

    #[test]
    fn ocdm_case_is_single_idfnt() {
        let p = ModulationParams::fresnel(1, 7);
        assert_eq!(modulation_matrix(&p), idfnt_matrix(7));
    }

    #[test]
    fn modulation_matrices_are_unitary() {
        for kind in [TransformKind::Fresnel, TransformKind::Fourier, TransformKind::Identity] {
            for (m, n) in [(1, 1), (2, 6), (4, 3), (1, 12), (12, 1), (3, 5)] {
                let p = ModulationParams::new(m, n, kind).unwrap();
                assert!(modulation_matrix(&p).unitarity_residual() < 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn modulate_matches_dense_oracle() {
        let s = random_vec(2, 12);
        for kind in [TransformKind::Fresnel, TransformKind::Fourier] {
            let p = ModulationParams::new(2, 6, kind).unwrap();
            let dense = kron(
                &match kind {
                    TransformKind::Fresnel => dfnt_matrix(6).adjoint(),
                    _ => subblock_transform(6, kind),
                },
                &ComplexMatrix::identity(2),
            );
            let want = dense.mul_vec(&s).unwrap();
            assert!(max_diff(&modulate(&s, &p).unwrap(), &want) < 1e-12);
        }
    }

    #[test]
    fn fft_path_matches_dense_path() {
        for kind in [TransformKind::Fresnel, TransformKind::Fourier] {
            for (m, n) in [(1, 5), (2, 8), (3, 7), (1, 40)] {
                let p = ModulationParams::new(m, n, kind).unwrap();
                let fft = Modulator::with_dense_limit(p, 0);
                let dense = Modulator::with_dense_limit(p, usize::MAX);
                let s = random_vec(n as u64, p.k());
                let (a, b) = (fft.modulate(&s).unwrap(), dense.modulate(&s).unwrap());
                assert!(max_diff(&a, &b) < 1e-12, "{p:?}");
                let (a, b) = (fft.demodulate(&s).unwrap(), dense.demodulate(&s).unwrap());
                assert!(max_diff(&a, &b) < 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn demodulate_round_trip_and_zero() {
        let p = ModulationParams::fresnel(4, 3);
        let s = random_vec(3, 12);
        let back = demodulate(&modulate(&s, &p).unwrap(), &p).unwrap();
        assert!(max_diff(&back, &s) < 1e-10);
        let zero = vec![Complex64::new(0.0, 0.0); 12];
        assert_eq!(demodulate(&zero, &p).unwrap(), zero);
        assert_eq!(modulate(&zero, &p).unwrap(), zero);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let p = ModulationParams::fresnel(2, 3);
        assert!(matches!(
            modulate(&[Complex64::new(1.0, 0.0)], &p),
            Err(Error::LengthMismatch { expected: 6, actual: 1, .. })
        ));
        assert!(demodulate(&[], &p).is_err());
    }

    #[test]
    fn subvector_examples() {
        let u: Vec<_> = (0..4).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let p = ModulationParams::fresnel(2, 2);
        assert_eq!(subvector(&u, &p, 0).unwrap(), vec![u[0], u[2]]);
        assert_eq!(subvector(&u, &p, 1).unwrap(), vec![u[1], u[3]]);
        assert!(subvector(&u, &p, 2).is_err());
        let whole = ModulationParams::fresnel(1, 4);
        assert_eq!(subvector(&u, &whole, 0).unwrap(), u);
    }

    #[test]
    fn subvector_factorisation() {
        let p = ModulationParams::fresnel(3, 5);
        let s = random_vec(4, 15);
        let u = modulate(&s, &p).unwrap();
        let phi_h = idfnt_matrix(5);
        for m in 0..3 {
            let want = phi_h.mul_vec(&subvector(&s, &p, m).unwrap()).unwrap();
            assert!(max_diff(&subvector(&u, &p, m).unwrap(), &want) < 1e-12);
        }
    }

    #[test]
    fn scheme_labels() {
        assert_eq!(ModulationParams::fresnel(12, 1).scheme_label(), "SC(12,1)");
        assert_eq!(ModulationParams::fresnel(1, 12).scheme_label(), "OCDM(1,12)");
        assert_eq!(ModulationParams::fresnel(2, 6).scheme_label(), "VOCDM(2,6)");
        assert_eq!(ModulationParams::fourier(2, 6).scheme_label(), "OTFS(2,6)");
    }

    #[test]
    fn dense_demod_matrix_is_kernel_kron() {
        let p = ModulationParams::fresnel(2, 3);
        let want = kron(&dfnt_matrix(3), &ComplexMatrix::identity(2));
        assert!(demodulation_matrix(&p).sub(&want).unwrap().frobenius_norm() < 1e-14);
        let prod = matmul(&demodulation_matrix(&p), &modulation_matrix(&p)).unwrap();
        assert!(prod.sub(&ComplexMatrix::identity(6)).unwrap().frobenius_norm() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn energy_is_preserved(seed in any::<u64>(), m in 1usize..6, n in 1usize..40, k in 0usize..3) {
                let kind = [TransformKind::Fresnel, TransformKind::Fourier, TransformKind::Identity][k];
                let p = ModulationParams::new(m, n, kind).unwrap();
                let s = random_vec(seed, p.k());
                let u = Modulator::new(p).modulate(&s).unwrap();
                prop_assert!((norm(&u) - norm(&s)).abs() <= 1e-10 * norm(&s).max(1.0));
            }

            #[test]
            fn fresnel_n1_equals_identity(seed in any::<u64>(), m in 1usize..20) {
                let s = random_vec(seed, m);
                let a = modulate(&s, &ModulationParams::fresnel(m, 1)).unwrap();
                let b = modulate(&s, &ModulationParams::new(m, 1, TransformKind::Identity).unwrap()).unwrap();
                prop_assert!(max_diff(&a, &b) <= 1e-12);
            }
        }
    }
}
