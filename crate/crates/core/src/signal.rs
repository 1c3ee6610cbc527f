//! Seeded synthesis of multi-sensor observation matrices.
//!
//! Under H0 every entry is noise, `Y[i][k] = nᵢ(k)`. Under H1 a single
//! primary signal reaches all sensors through a channel that stays fixed for
//! the whole block, `Y[i][k] = hᵢ·s(k) + nᵢ(k)`, so `Y = T·[s; z]` with
//! `T = [h | σI]`.
//!
//! Everything is a pure function of the [`ScenarioConfig`], including the seed.
//! Draw order within one matrix is channel, then the `N` signal samples, then
//! the noise in row-major order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Generator used for all synthesis.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `index` within stream `stream` of `master`. Depends only
/// on its arguments, so trials can be generated in any order or in parallel.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H0" | "h0" => Ok(Hypothesis::H0),
            "H1" | "h1" => Ok(Hypothesis::H1),
            other => Err(Error::config(format!(
                "unknown hypothesis `{other}` (expected H0 or H1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Uniform,
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    /// Unit-variance circular Gaussian.
    #[default]
    Gaussian,
    /// Unit-modulus QPSK (BPSK for real samples).
    Qpsk,
}

/// Whether samples are complex baseband or real-valued.
///
/// Variances are total variances in both cases; complex entries split `σ²`
/// evenly between the real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleField {
    #[default]
    Complex,
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fading {
    /// Independent Rayleigh gains with `E|hᵢ|² = 1/K`.
    Rayleigh,
    /// Deterministic gains, one per sensor.
    Fixed(Vec<Complex64>),
}

impl Fading {
    /// Equal real gains `1/√K`, so that `Σ|hᵢ|² = 1`.
    pub fn unit_energy(k: usize) -> Self {
        Fading::Fixed(vec![Complex64::new(1.0 / (k as f64).sqrt(), 0.0); k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of sensors.
    pub k: usize,
    /// Samples per sensor.
    pub n: usize,
    /// Noise variance.
    pub sigma2: f64,
    pub hypothesis: Hypothesis,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub signal: SignalKind,
    pub fading: Fading,
    #[serde(default)]
    pub field: SampleField,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::config("k and n must be at least 1"));
        }
        if self.k > self.n {
            return Err(Error::UnsupportedRegime(format!(
                "k = {} exceeds n = {}; alpha = k/n must not exceed 1",
                self.k, self.n
            )));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::config("sigma2 must be positive and finite"));
        }
        if let Fading::Fixed(h) = &self.fading {
            if h.len() != self.k {
                return Err(Error::config(format!(
                    "fixed channel has {} gains but k = {}",
                    h.len(),
                    self.k
                )));
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// FNV-1a hash of the canonical JSON form.
    pub fn digest(&self) -> u64 {
        let json = serde_json::to_string(self).expect("scenario config serializes");
        json.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    h: Vec<Complex64>,
    channel_energy: f64,
}

impl ChannelRealization {
    pub fn new(h: Vec<Complex64>) -> Self {
        let channel_energy = h.iter().map(|z| z.norm_sqr()).sum();
        Self { h, channel_energy }
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.h
    }

    /// `Σ|hᵢ|²`.
    pub fn channel_energy(&self) -> f64 {
        self.channel_energy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    pub y: ComplexMatrix,
    pub truth: Hypothesis,
    pub channel: Option<ChannelRealization>,
    pub config_digest: u64,
}

impl ObservationMatrix {
    pub fn alpha(&self) -> f64 {
        self.y.rows() as f64 / self.y.cols() as f64
    }
}

/// Two independent standard normal draws.
pub fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    (rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform on `[−√3, √3]`: zero mean, unit variance.
pub fn uniform_sym<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    3f64.sqrt() * (2.0 * u - 1.0)
}

/// Laplace with scale `1/√2`: zero mean, unit variance.
pub fn laplace_sym<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
    -std::f64::consts::FRAC_1_SQRT_2 * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn unit_draw<R: Rng + ?Sized>(kind: NoiseKind, rng: &mut R) -> f64 {
    match kind {
        NoiseKind::Gaussian => rng.sample(StandardNormal),
        NoiseKind::Uniform => uniform_sym(rng),
        NoiseKind::Laplace => laplace_sym(rng),
    }
}

/// One zero-mean noise sample of total variance `sigma2`.
pub fn noise_sample<R: Rng + ?Sized>(
    kind: NoiseKind,
    sigma2: f64,
    field: SampleField,
    rng: &mut R,
) -> Complex64 {
    match field {
        SampleField::Complex => {
            let scale = (0.5 * sigma2).sqrt();
            let re = unit_draw(kind, rng);
            let im = unit_draw(kind, rng);
            Complex64::new(scale * re, scale * im)
        }
        SampleField::Real => Complex64::new(sigma2.sqrt() * unit_draw(kind, rng), 0.0),
    }
}

/// One unit-power signal sample.
pub fn signal_sample<R: Rng + ?Sized>(
    kind: SignalKind,
    field: SampleField,
    rng: &mut R,
) -> Complex64 {
    match (kind, field) {
        (SignalKind::Gaussian, SampleField::Complex) => {
            let (re, im) = gaussian_pair(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
        (SignalKind::Gaussian, SampleField::Real) => {
            Complex64::new(rng.sample(StandardNormal), 0.0)
        }
        (SignalKind::Qpsk, SampleField::Complex) => {
            let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
        (SignalKind::Qpsk, SampleField::Real) => {
            Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
        }
    }
}

pub fn draw_channel<R: Rng + ?Sized>(
    k: usize,
    fading: &Fading,
    field: SampleField,
    rng: &mut R,
) -> ChannelRealization {
    match fading {
        Fading::Fixed(h) => ChannelRealization::new(h.clone()),
        Fading::Rayleigh => {
            let var = 1.0 / k as f64;
            let h = (0..k)
                .map(|_| noise_sample(NoiseKind::Gaussian, var, field, rng))
                .collect();
            ChannelRealization::new(h)
        }
    }
}

pub fn synthesize(config: &ScenarioConfig) -> Result<ObservationMatrix> {
    config.validate()?;
    let mut rng = rng_from_seed(config.seed);
    let (k, n) = (config.k, config.n);

    let (channel, signal) = match config.hypothesis {
        Hypothesis::H0 => (None, Vec::new()),
        Hypothesis::H1 => {
            let channel = draw_channel(k, &config.fading, config.field, &mut rng);
            let s: Vec<Complex64> = (0..n)
                .map(|_| signal_sample(config.signal, config.field, &mut rng))
                .collect();
            (Some(channel), s)
        }
    };

    let mut data = Vec::with_capacity(k * n);
    for i in 0..k {
        let hi = channel.as_ref().map(|c| c.gains()[i]);
        // `signal` is empty under H0, so index only when a channel exists.
        #[allow(clippy::needless_range_loop)]
        for t in 0..n {
            let noise = noise_sample(config.noise, config.sigma2, config.field, &mut rng);
            data.push(match hi {
                Some(h) => h * signal[t] + noise,
                None => noise,
            });
        }
    }

    Ok(ObservationMatrix {
        y: ComplexMatrix::new(k, n, data)?,
        truth: config.hypothesis,
        channel,
        config_digest: config.digest(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn config(h: Hypothesis) -> ScenarioConfig {
        ScenarioConfig {
            k: 4,
            n: 16,
            sigma2: 1.0,
            hypothesis: h,
            noise: NoiseKind::Gaussian,
            signal: SignalKind::Gaussian,
            fading: Fading::Rayleigh,
            field: SampleField::Complex,
            seed: 42,
        }
    }

    #[test]
    fn fixed_channel_is_verbatim() {
        let h = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let c = draw_channel(
            3,
            &Fading::Fixed(h.clone()),
            SampleField::Complex,
            &mut rng_from_seed(0),
        );
        assert_eq!(c.gains(), &h[..]);
        assert_eq!(c.channel_energy(), 1.0);
    }

    #[test]
    fn same_seed_same_channel() {
        let a = draw_channel(
            10,
            &Fading::Rayleigh,
            SampleField::Complex,
            &mut rng_from_seed(9),
        );
        let b = draw_channel(
            10,
            &Fading::Rayleigh,
            SampleField::Complex,
            &mut rng_from_seed(9),
        );
        assert_eq!(a, b);
        let recomputed: f64 = a.gains().iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(a.channel_energy(), recomputed, max_relative = 1e-12);
    }

    #[test]
    fn synthesize_is_deterministic() {
        let a = synthesize(&config(Hypothesis::H1)).unwrap();
        let b = synthesize(&config(Hypothesis::H1)).unwrap();
        assert_eq!(a, b);
        let mut other = config(Hypothesis::H1);
        other.seed = 43;
        assert_ne!(synthesize(&other).unwrap().y, a.y);
        assert_ne!(other.digest(), config(Hypothesis::H1).digest());
    }

    #[test]
    fn h0_has_no_channel() {
        let obs = synthesize(&config(Hypothesis::H0)).unwrap();
        assert_eq!(obs.truth, Hypothesis::H0);
        assert!(obs.channel.is_none());
        assert_eq!((obs.y.rows(), obs.y.cols()), (4, 16));
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = config(Hypothesis::H0);
        c.k = 20;
        assert!(matches!(synthesize(&c), Err(Error::UnsupportedRegime(_))));
        let mut c = config(Hypothesis::H0);
        c.sigma2 = 0.0;
        assert!(synthesize(&c).is_err());
        let mut c = config(Hypothesis::H1);
        c.fading = Fading::Fixed(vec![Complex64::new(1.0, 0.0)]);
        assert!(synthesize(&c).is_err());
        let mut c = config(Hypothesis::H0);
        c.n = 0;
        assert!(synthesize(&c).is_err());
    }

    #[test]
    fn noiseless_h1_is_rank_one() {
        let mut h = vec![Complex64::new(0.0, 0.0); 4];
        h[0] = Complex64::new(1.0, 0.0);
        let mut c = config(Hypothesis::H1);
        c.fading = Fading::Fixed(h);
        c.sigma2 = 1e-12;
        let obs = synthesize(&c).unwrap();
        for t in 0..c.n {
            for i in 1..4 {
                assert!(obs.y.get(i, t).norm() < 1e-4);
            }
        }
        let row0_power: f64 = obs.y.row(0).iter().map(|z| z.norm_sqr()).sum::<f64>() / c.n as f64;
        assert!(row0_power > 0.2);
    }

    #[test]
    fn channel_constant_across_columns() {
        // With negligible noise each column is h·s(k), so Y[i][k]/Y[0][k] = hᵢ/h₀.
        let h: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(1.0 + i as f64, 0.5 * i as f64))
            .collect();
        let mut c = config(Hypothesis::H1);
        c.fading = Fading::Fixed(h.clone());
        c.sigma2 = 1e-24;
        let obs = synthesize(&c).unwrap();
        for t in 0..c.n {
            for i in 1..4 {
                let ratio = obs.y.get(i, t) / obs.y.get(0, t);
                assert!((ratio - h[i] / h[0]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn real_field_has_zero_imaginary_part() {
        let mut c = config(Hypothesis::H1);
        c.field = SampleField::Real;
        let obs = synthesize(&c).unwrap();
        assert!(obs.y.as_slice().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn qpsk_has_unit_modulus() {
        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            assert_relative_eq!(
                signal_sample(SignalKind::Qpsk, SampleField::Complex, &mut rng).norm(),
                1.0
            );
            assert_relative_eq!(
                signal_sample(SignalKind::Qpsk, SampleField::Real, &mut rng).norm(),
                1.0
            );
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, 0, 0);
        assert_ne!(a, derive_seed(1, 0, 1));
        assert_ne!(a, derive_seed(1, 1, 0));
        assert_ne!(a, derive_seed(2, 0, 0));
        assert_eq!(a, derive_seed(1, 0, 0));
    }

    #[test]
    fn hypothesis_parsing() {
        assert_eq!("H1".parse::<Hypothesis>().unwrap(), Hypothesis::H1);
        assert_eq!("h0".parse::<Hypothesis>().unwrap(), Hypothesis::H0);
        assert!("H2".parse::<Hypothesis>().is_err());
    }
}
