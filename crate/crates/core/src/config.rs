//! Static scenario parameters.

use serde::Deserialize;

use crate::{Error, Result};

/// All static parameters of a single-user RIS-aided downlink scenario.
///
/// Gains are linear-scale power ratios; angles are radians; powers are watts.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// BS antenna count M.
    pub num_antennas: usize,
    /// Number of surfaces N.
    pub num_ris: usize,
    /// Elements per URA side L (must be even).
    pub ura_side: usize,
    /// Element spacing in wavelengths (the scale factor of the spacing Δλ).
    pub spacing: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Maximum transmit power p in watts.
    pub tx_power: f64,
    /// Noise power σ² in watts.
    pub noise_power: f64,
    /// BS-to-RIS distance per surface, meters.
    pub bs_ris_dist: Vec<f64>,
    /// RIS-to-user distance per surface, meters.
    pub ris_user_dist: Vec<f64>,
    /// BS antenna gain, linear.
    pub bs_gain: f64,
    /// RIS element gain, linear (shared by all surfaces).
    pub ris_gain: f64,
    /// User antenna gain, linear.
    pub user_gain: f64,
    /// Resolvable paths per individual link (same for both hops).
    pub paths: usize,
    /// Angular spread of per-path angle offsets, radians (std deviation).
    pub angular_spread: f64,
    /// Iteration cap for the SCA phase updates.
    pub max_sca_iters: usize,
    /// Relative-change stopping threshold for the SCA phase updates.
    pub sca_tol: f64,
}

/// Converts an antenna gain in dBi to a linear power ratio.
pub fn dbi_to_linear(dbi: f64) -> f64 {
    10f64.powf(dbi / 10.0)
}

impl SystemConfig {
    /// Baseline single-cell scenario: M = 8, λ = 0.1 m, Δ = 1/2, p = 10 mW,
    /// σ² = −100 dBm, 50 m hops, gains 5/5/0 dBi, 10° angular spread.
    pub fn baseline(num_ris: usize, ura_side: usize, paths: usize) -> Self {
        Self {
            num_antennas: 8,
            num_ris,
            ura_side,
            spacing: 0.5,
            wavelength: 0.1,
            tx_power: 0.01,
            noise_power: 1e-13,
            bs_ris_dist: vec![50.0; num_ris],
            ris_user_dist: vec![50.0; num_ris],
            bs_gain: dbi_to_linear(5.0),
            ris_gain: dbi_to_linear(5.0),
            user_gain: dbi_to_linear(0.0),
            paths,
            angular_spread: 10f64.to_radians(),
            max_sca_iters: 1000,
            sca_tol: 1e-6,
        }
    }

    /// Total reflecting elements per surface, L².
    pub fn num_elements(&self) -> usize {
        self.ura_side * self.ura_side
    }

    /// Largest useful phase-gradient magnitude, q̄ = min{2, 1/(2Δ)}.
    ///
    /// Direction sums never exceed 2 in magnitude, and gradients differing by
    /// the period 1/Δ produce the same surface response.
    pub fn q_bar(&self) -> f64 {
        2f64.min(1.0 / (2.0 * self.spacing))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_antennas < 1 {
            return err("antenna count must be >= 1".into());
        }
        if self.num_ris < 1 {
            return err("RIS count must be >= 1".into());
        }
        if self.ura_side < 2 || self.ura_side % 2 != 0 {
            return err(format!("URA side must be even and >= 2, got {}", self.ura_side));
        }
        if self.paths < 1 {
            return err("paths per link must be >= 1".into());
        }
        for (name, value) in [
            ("spacing", self.spacing),
            ("wavelength", self.wavelength),
            ("tx_power", self.tx_power),
            ("noise_power", self.noise_power),
            ("bs_gain", self.bs_gain),
            ("ris_gain", self.ris_gain),
            ("user_gain", self.user_gain),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return err(format!("{name} must be strictly positive, got {value}"));
            }
        }
        if self.angular_spread < 0.0 || !self.angular_spread.is_finite() {
            return err("angular spread must be >= 0".into());
        }
        if self.bs_ris_dist.len() != self.num_ris || self.ris_user_dist.len() != self.num_ris {
            return err(format!(
                "distance lists must have one entry per RIS ({})",
                self.num_ris
            ));
        }
        if self
            .bs_ris_dist
            .iter()
            .chain(self.ris_user_dist.iter())
            .any(|d| !(*d > 0.0) || !d.is_finite())
        {
            return err("distances must be strictly positive".into());
        }
        if self.max_sca_iters < 1 {
            return err("SCA iteration cap must be >= 1".into());
        }
        if !(self.sca_tol > 0.0) {
            return err("SCA tolerance must be strictly positive".into());
        }
        Ok(())
    }

    /// Resizes the per-RIS distance lists to `num_ris` surfaces, repeating the
    /// last entry when growing. Used by sweeps over the surface count.
    pub fn with_num_ris(mut self, num_ris: usize) -> Self {
        let grow = |v: &mut Vec<f64>| {
            let last = v.last().copied().unwrap_or(50.0);
            v.resize(num_ris, last);
        };
        grow(&mut self.bs_ris_dist);
        grow(&mut self.ris_user_dist);
        self.num_ris = num_ris;
        self
    }

    /// Parses a flat TOML-style config file.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = raw.n;
        let expand = |d: DistanceSpec| -> Vec<f64> {
            match d {
                DistanceSpec::Shared(x) => vec![x; n],
                DistanceSpec::PerRis(v) => v,
            }
        };
        let cfg = SystemConfig {
            num_antennas: raw.m,
            num_ris: raw.n,
            ura_side: raw.l,
            spacing: raw.delta,
            wavelength: raw.lambda,
            tx_power: raw.p,
            noise_power: raw.sigma2,
            bs_ris_dist: expand(raw.d1),
            ris_user_dist: expand(raw.d2),
            bs_gain: dbi_to_linear(raw.g_bs_dbi),
            ris_gain: dbi_to_linear(raw.g_ris_dbi),
            user_gain: dbi_to_linear(raw.g_user_dbi),
            paths: raw.paths,
            angular_spread: raw.sigma_as_deg.to_radians(),
            max_sca_iters: raw.i_sca,
            sca_tol: raw.eps_sca,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// On-disk config schema. Gains are in dBi and the angular spread in degrees;
/// both are converted on load.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    m: usize,
    n: usize,
    l: usize,
    delta: f64,
    lambda: f64,
    p: f64,
    sigma2: f64,
    d1: DistanceSpec,
    d2: DistanceSpec,
    g_bs_dbi: f64,
    g_ris_dbi: f64,
    g_user_dbi: f64,
    paths: usize,
    sigma_as_deg: f64,
    i_sca: usize,
    eps_sca: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DistanceSpec {
    Shared(f64),
    PerRis(Vec<f64>),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_valid() {
        let cfg = SystemConfig::baseline(3, 30, 8);
        cfg.validate().unwrap();
        assert_eq!(cfg.num_elements(), 900);
        assert_eq!(cfg.q_bar(), 1.0);
    }

    #[test]
    fn q_bar_caps_at_two_for_sparse_arrays() {
        let mut cfg = SystemConfig::baseline(1, 4, 1);
        cfg.spacing = 0.125;
        assert_eq!(cfg.q_bar(), 2.0);
        cfg.spacing = 0.25;
        assert_eq!(cfg.q_bar(), 2.0);
    }

    #[test]
    fn rejects_odd_side() {
        let mut cfg = SystemConfig::baseline(1, 4, 1);
        cfg.ura_side = 5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_zero_paths() {
        let mut cfg = SystemConfig::baseline(1, 4, 1);
        cfg.paths = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_flat_config() {
        let text = r#"
            m = 8
            n = 2
            l = 30
            delta = 0.5
            lambda = 0.1
            p = 0.01
            sigma2 = 1e-13
            d1 = 50.0
            d2 = [50.0, 60.0]
            g_bs_dbi = 5.0
            g_ris_dbi = 5.0
            g_user_dbi = 0.0
            paths = 8
            sigma_as_deg = 10.0
            i_sca = 1000
            eps_sca = 1e-6
        "#;
        let cfg = SystemConfig::from_config_str(text).unwrap();
        assert_eq!(cfg.bs_ris_dist, vec![50.0, 50.0]);
        assert_eq!(cfg.ris_user_dist, vec![50.0, 60.0]);
        assert!((cfg.bs_gain - 10f64.powf(0.5)).abs() < 1e-12);
        assert!((cfg.angular_spread - 10f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn resize_ris_count_repeats_last_distance() {
        let cfg = SystemConfig::baseline(2, 4, 2).with_num_ris(4);
        assert_eq!(cfg.bs_ris_dist.len(), 4);
        cfg.validate().unwrap();
    }
}
