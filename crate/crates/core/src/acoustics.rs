//! Underwater acoustic propagation and ambient-noise model.
//!
//! Implements the empirical mid-frequency channel model that is standard in
//! underwater network studies (Stojanovic, 2006): a Thorp-style absorption
//! coefficient, spreading-plus-absorption path loss, and a single-slope
//! ambient-noise power spectral density, together with the per-subcarrier
//! band integrals the link budget needs.
//!
//! Conventions used throughout the crate:
//! - frequency in kHz, distance in meters (1 m reference for the spreading
//!   term), absorption in dB/km,
//! - "dB" quantities are `10*log10` of the linear quantity; all SNR and
//!   power arithmetic happens on the linear scale, dB only appears at the
//!   API boundary,
//! - band integrals are computed on the linear scale with the integration
//!   variable in kHz, by a fixed midpoint rule (subcarrier bands are a few
//!   Hz wide, so the integrands are nearly constant per band).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower edge of the ambient-noise model validity range.
pub const NOISE_MODEL_F_MIN_KHZ: f64 = 1.0;
/// Upper edge of the ambient-noise model validity range.
pub const NOISE_MODEL_F_MAX_KHZ: f64 = 100.0;
/// Midpoint-rule panels per band used when no explicit count is given.
pub const DEFAULT_QUADRATURE_PANELS: usize = 4;

/// Environment parameters of the propagation and noise model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    /// Spreading factor of the path-loss law (1 cylindrical, 2 spherical;
    /// 1.5 is the usual "practical spreading" value).
    pub spreading_factor: f64,
    /// Noise level at 1 kHz, in dB.
    pub noise_level_db: f64,
    /// Noise decay constant: the PSD falls by `10 * noise_decay` dB per
    /// decade of frequency.
    pub noise_decay: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self {
            spreading_factor: 1.5,
            noise_level_db: 50.0,
            noise_decay: 18.0,
        }
    }
}

/// Convert a dB value to the linear scale: `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Absorption coefficient in dB/km at frequency `f_khz`.
///
/// `a(f) = 0.11 f^2/(1+f^2) + 44 f^2/(4100+f^2) + 2.75e-4 f^2 + 0.003`
pub fn absorption_db_per_km(f_khz: f64) -> Result<f64> {
    if !(f_khz > 0.0) || !f_khz.is_finite() {
        return Err(Error::NonPositiveFrequency(f_khz));
    }
    Ok(absorption_raw(f_khz))
}

fn absorption_raw(f: f64) -> f64 {
    let f2 = f * f;
    0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003
}

/// Path loss in dB over `distance_m` meters at frequency `f_khz`.
///
/// `PL(d, f) = nu * 10 * log10(d) + (d / 1000) * a(f)`
///
/// The spreading term is referenced to 1 m; the absorption term converts
/// the distance to km to match the dB/km absorption coefficient.
pub fn path_loss_db(distance_m: f64, f_khz: f64, params: &PropagationParams) -> Result<f64> {
    if !(distance_m >= 1.0) || !distance_m.is_finite() {
        return Err(Error::DistanceBelowReference(distance_m));
    }
    if !(f_khz > 0.0) || !f_khz.is_finite() {
        return Err(Error::NonPositiveFrequency(f_khz));
    }
    Ok(path_loss_raw(distance_m, f_khz, params))
}

fn path_loss_raw(d: f64, f: f64, params: &PropagationParams) -> f64 {
    params.spreading_factor * 10.0 * d.log10() + (d / 1000.0) * absorption_raw(f)
}

/// Ambient-noise power spectral density in dB at frequency `f_khz`.
///
/// `N(f) = N1 - tau * 10 * log10(f)`
///
/// Only valid on 1..=100 kHz. Note that `tau` multiplies the full
/// `10*log10(f)` term, so the default `tau = 18` decays 180 dB per decade.
pub fn noise_psd_db(f_khz: f64, params: &PropagationParams) -> Result<f64> {
    if !(NOISE_MODEL_F_MIN_KHZ..=NOISE_MODEL_F_MAX_KHZ).contains(&f_khz) {
        return Err(Error::FrequencyOutOfRange(f_khz));
    }
    Ok(noise_psd_raw(f_khz, params))
}

fn noise_psd_raw(f: f64, params: &PropagationParams) -> f64 {
    params.noise_level_db - params.noise_decay * 10.0 * f.log10()
}

fn midpoint_integral(f_lo: f64, f_hi: f64, panels: usize, integrand: impl Fn(f64) -> f64) -> f64 {
    let w = (f_hi - f_lo) / panels as f64;
    let sum: f64 = (0..panels)
        .map(|i| integrand(f_lo + (i as f64 + 0.5) * w))
        .sum();
    sum * w
}

fn check_band(f_lo: f64, f_hi: f64) -> Result<()> {
    if !f_lo.is_finite() || !f_hi.is_finite() || !(f_lo < f_hi) {
        return Err(Error::InvalidBand { lo: f_lo, hi: f_hi });
    }
    Ok(())
}

fn check_panels(panels: usize) -> Result<()> {
    if panels == 0 {
        return Err(Error::NoQuadraturePanels);
    }
    Ok(())
}

/// Linear-scale path-loss integral `int 10^(PL(d,f)/10) df` over the band
/// `[f_lo_khz, f_hi_khz]`, midpoint rule with `panels` panels.
pub fn pathloss_band_integral(
    distance_m: f64,
    f_lo_khz: f64,
    f_hi_khz: f64,
    params: &PropagationParams,
    panels: usize,
) -> Result<f64> {
    if !(distance_m >= 1.0) || !distance_m.is_finite() {
        return Err(Error::DistanceBelowReference(distance_m));
    }
    check_band(f_lo_khz, f_hi_khz)?;
    if !(f_lo_khz > 0.0) {
        return Err(Error::NonPositiveFrequency(f_lo_khz));
    }
    check_panels(panels)?;
    Ok(midpoint_integral(f_lo_khz, f_hi_khz, panels, |f| {
        db_to_linear(path_loss_raw(distance_m, f, params))
    }))
}

/// Linear-scale noise integral `int 10^(N(f)/10) df` over the band
/// `[f_lo_khz, f_hi_khz]`, midpoint rule with `panels` panels.
pub fn noise_band_integral(
    f_lo_khz: f64,
    f_hi_khz: f64,
    params: &PropagationParams,
    panels: usize,
) -> Result<f64> {
    check_band(f_lo_khz, f_hi_khz)?;
    if f_lo_khz < NOISE_MODEL_F_MIN_KHZ || f_hi_khz > NOISE_MODEL_F_MAX_KHZ {
        let bad = if f_lo_khz < NOISE_MODEL_F_MIN_KHZ {
            f_lo_khz
        } else {
            f_hi_khz
        };
        return Err(Error::FrequencyOutOfRange(bad));
    }
    check_panels(panels)?;
    Ok(midpoint_integral(f_lo_khz, f_hi_khz, panels, |f| {
        db_to_linear(noise_psd_raw(f, params))
    }))
}

/// An OFDM band plan: `n` equal-width subcarrier bands spanning
/// `[f_low_khz, f_high_khz]`, with the per-band noise integrals
/// precomputed. Immutable after construction and shareable across threads.
#[derive(Debug, Clone)]
pub struct BandProfile {
    n: usize,
    f_low_khz: f64,
    f_high_khz: f64,
    panels: usize,
    edges_khz: Vec<f64>,
    noise_integrals: Vec<f64>,
}

impl BandProfile {
    /// Build a band plan of `n` subcarriers over `[f_low_khz, f_high_khz]`.
    ///
    /// The whole band must sit inside the noise-model validity range
    /// because the per-band noise integrals are evaluated here.
    pub fn new(
        n: usize,
        f_low_khz: f64,
        f_high_khz: f64,
        params: &PropagationParams,
        panels: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::NoSubcarriers);
        }
        check_band(f_low_khz, f_high_khz)?;
        if f_low_khz < NOISE_MODEL_F_MIN_KHZ || f_high_khz > NOISE_MODEL_F_MAX_KHZ {
            let bad = if f_low_khz < NOISE_MODEL_F_MIN_KHZ {
                f_low_khz
            } else {
                f_high_khz
            };
            return Err(Error::FrequencyOutOfRange(bad));
        }
        check_panels(panels)?;

        let width = f_high_khz - f_low_khz;
        let mut edges_khz = Vec::with_capacity(n + 1);
        for j in 0..n {
            edges_khz.push(f_low_khz + width * j as f64 / n as f64);
        }
        edges_khz.push(f_high_khz);

        let noise_integrals = (0..n)
            .map(|j| {
                midpoint_integral(edges_khz[j], edges_khz[j + 1], panels, |f| {
                    db_to_linear(noise_psd_raw(f, params))
                })
            })
            .collect();

        Ok(Self {
            n,
            f_low_khz,
            f_high_khz,
            panels,
            edges_khz,
            noise_integrals,
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n
    }

    pub fn f_low_khz(&self) -> f64 {
        self.f_low_khz
    }

    pub fn f_high_khz(&self) -> f64 {
        self.f_high_khz
    }

    pub fn subcarrier_width_khz(&self) -> f64 {
        (self.f_high_khz - self.f_low_khz) / self.n as f64
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Band edges, `n + 1` strictly increasing values.
    pub fn edges_khz(&self) -> &[f64] {
        &self.edges_khz
    }

    /// The `j`-th subcarrier band `[lo, hi]` in kHz.
    pub fn band(&self, j: usize) -> (f64, f64) {
        (self.edges_khz[j], self.edges_khz[j + 1])
    }

    /// Center frequency of the `j`-th subcarrier band.
    pub fn center_khz(&self, j: usize) -> f64 {
        0.5 * (self.edges_khz[j] + self.edges_khz[j + 1])
    }

    /// Precomputed linear noise integral of the `j`-th band.
    pub fn noise_integral(&self, j: usize) -> f64 {
        self.noise_integrals[j]
    }

    pub fn noise_integrals(&self) -> &[f64] {
        &self.noise_integrals
    }

    /// Per-subcarrier linear path-loss integrals for a link of length
    /// `distance_m`, using the same midpoint rule as the noise integrals.
    pub fn pathloss_integrals(
        &self,
        distance_m: f64,
        params: &PropagationParams,
    ) -> Result<Vec<f64>> {
        if !(distance_m >= 1.0) || !distance_m.is_finite() {
            return Err(Error::DistanceBelowReference(distance_m));
        }
        Ok((0..self.n)
            .map(|j| {
                midpoint_integral(self.edges_khz[j], self.edges_khz[j + 1], self.panels, |f| {
                    db_to_linear(path_loss_raw(distance_m, f, params))
                })
            })
            .collect())
    }
}
