//! Closed-form random-matrix quantities.
//!
//! For a `K×N` noise matrix with i.i.d. entries of variance `σ²` and
//! `α = K/N < 1`, the eigenvalues of `(1/N)·Y·Yᴴ` follow the Marchenko–Pastur
//! law with density
//!
//! ```text
//! f(x) = (1 − 1/α)⁺ δ(x) + √((x − a)⁺ (b − x)⁺) / (2π α σ² x)
//! a = σ²(1 − √α)²,   b = σ²(1 + √α)²
//! ```
//!
//! The atom at zero vanishes for `α < 1`, the only regime supported here.
//!
//! With one primary signal the population covariance is `σ²I` plus a rank-one
//! spike of size `Σ|hᵢ|²`. When `ρ = Σ|hᵢ|²/σ² > √α` the largest sample
//! eigenvalue separates from the bulk and converges to
//! `b' = (Σ|hᵢ|² + σ²)(1 + α/ρ)`.
//!
//! Dividing `b'` by the lower edge `a` eliminates `σ²`:
//!
//! ```text
//! r = b'/a = (ρ + 1)(1 + α/ρ) / (1 − √α)²
//! ```
//!
//! Writing `c = r(1 − √α)²` and clearing the denominator gives the quadratic
//! `ρ² + (1 + α − c)ρ + α = 0`. Its roots multiply to `α`, so exactly one
//! exceeds `√α` whenever `r` is above the noise-only ratio; that larger root is
//! the SNR estimate returned by [`snr_from_ratio`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::domain("alpha must be in (0,1)"));
    }
    if alpha >= 1.0 {
        return Err(Error::UnsupportedRegime("alpha must be in (0,1)".into()));
    }
    Ok(())
}

/// Marchenko–Pastur support for noise variance `σ²` and aspect ratio `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpSupport {
    sigma2: f64,
    alpha: f64,
    a: f64,
    b: f64,
}

impl MpSupport {
    pub fn new(sigma2: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::domain("sigma2 must be positive"));
        }
        let (a, b) = Self::edges(sigma2, alpha);
        Ok(Self {
            sigma2,
            alpha,
            a,
            b,
        })
    }

    fn edges(sigma2: f64, alpha: f64) -> (f64, f64) {
        let r = alpha.sqrt();
        (sigma2 * (1.0 - r).powi(2), sigma2 * (1.0 + r).powi(2))
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Lower edge `σ²(1−√α)²`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Upper edge `σ²(1+√α)²`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(a, b)` recomputed from `(σ², α)`.
    pub fn recompute_edges(&self) -> (f64, f64) {
        Self::edges(self.sigma2, self.alpha)
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.a..=self.b).contains(&x)
    }

    /// `b/a`, the noise-only limit of `λ_max/λ_min`.
    pub fn ratio_threshold(&self) -> f64 {
        self.b / self.a
    }
}

/// Shorthand for [`MpSupport::new`].
pub fn mp_support(sigma2: f64, alpha: f64) -> Result<MpSupport> {
    MpSupport::new(sigma2, alpha)
}

/// Continuous part of the Marchenko–Pastur density at `x > 0`.
pub fn mp_density(x: f64, support: &MpSupport) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("mp_density requires x > 0"));
    }
    let inside = (x - support.a).max(0.0) * (support.b - x).max(0.0);
    if inside == 0.0 {
        return Ok(0.0);
    }
    Ok(inside.sqrt() / (2.0 * std::f64::consts::PI * support.alpha * support.sigma2 * x))
}

/// `(1+√α)²/(1−√α)²`.
pub fn ratio_threshold(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::domain("alpha must be in (0,1)"));
    }
    let r = alpha.sqrt();
    Ok(((1.0 + r) / (1.0 - r)).powi(2))
}

/// Whether the spike separates from the bulk: `α < 1` and `ρ > √α`.
pub fn baik_detectable(alpha: f64, rho: f64) -> bool {
    alpha < 1.0 && rho > alpha.sqrt()
}

/// Rank-one spiked model quantities for a given channel energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikedModel {
    pub channel_energy: f64,
    pub sigma2: f64,
    pub alpha: f64,
    /// `channel_energy / sigma2`.
    pub rho: f64,
    /// Limit of the largest sample eigenvalue.
    pub b_prime: f64,
    /// Whether `ρ > √α`; outside that region `b'` is not the limit.
    pub detectable: bool,
}

impl SpikedModel {
    /// `b'/a`, the limit of `λ_max/λ_min` under the spike.
    pub fn ratio(&self) -> f64 {
        let a = self.sigma2 * (1.0 - self.alpha.sqrt()).powi(2);
        self.b_prime / a
    }
}

pub fn spiked_top_eigenvalue(channel_energy: f64, sigma2: f64, alpha: f64) -> Result<SpikedModel> {
    check_alpha(alpha)?;
    if !(sigma2 > 0.0) {
        return Err(Error::domain("sigma2 must be positive"));
    }
    if channel_energy == 0.0 {
        return Err(Error::DegenerateSpike);
    }
    if !(channel_energy > 0.0) {
        return Err(Error::domain("channel energy must be positive"));
    }
    let rho = channel_energy / sigma2;
    Ok(SpikedModel {
        channel_energy,
        sigma2,
        alpha,
        rho,
        b_prime: (channel_energy + sigma2) * (1.0 + alpha / rho),
        detectable: baik_detectable(alpha, rho),
    })
}

/// Forward map `ρ ↦ b'/a = (ρ+1)(1+α/ρ)/(1−√α)²`.
pub fn spiked_ratio(rho: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(rho > 0.0) {
        return Err(Error::domain("rho must be positive"));
    }
    Ok((rho + 1.0) * (1.0 + alpha / rho) / (1.0 - alpha.sqrt()).powi(2))
}

/// Inverts [`spiked_ratio`]: the SNR `ρ > √α` whose limiting ratio is `r`.
pub fn snr_from_ratio(r: f64, alpha: f64) -> Result<f64> {
    let threshold = ratio_threshold(alpha)?;
    if !(r > threshold) {
        return Err(Error::NotDetectable {
            ratio: r,
            threshold,
        });
    }
    let c = r * (1.0 - alpha.sqrt()).powi(2);
    // ρ² − bρ + α = 0 with b = c − 1 − α > 2√α > 0 here.
    let b = c - 1.0 - alpha;
    let discriminant = b * b - 4.0 * alpha;
    if discriminant < 0.0 {
        return Err(Error::InfeasibleRatio { discriminant });
    }
    Ok(0.5 * (b + discriminant.sqrt()))
}

/// `10·log₁₀(x)`.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Inverse of [`to_db`].
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
