//! Geometric multipath channel model.
//!
//! Each BS-RIS link is a sum of a few resolvable paths, each with a complex
//! gain, an elevation/azimuth angle of arrival at the surface and an angle of
//! departure at the BS ULA; each RIS-user link likewise has per-path gains and
//! departure angles at the surface. Channel matrices are sums of rank-one
//! steering-vector outer products, and the cascaded link carries the
//! product-distance path loss of [`path_loss`].

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::config::SystemConfig;
use crate::{C64, Error, Result};

/// One resolvable path of a BS-to-RIS link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsRisPath {
    /// Complex path gain α.
    pub gain: C64,
    /// Elevation angle of arrival at the surface, radians in [0, π/2).
    pub elev_aoa: f64,
    /// Azimuth angle of arrival at the surface, radians in [0, 2π).
    pub azim_aoa: f64,
    /// Angle of departure at the BS ULA, radians in (−π/2, π/2).
    pub aod_bs: f64,
}

/// One resolvable path of a RIS-to-user link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisUserPath {
    /// Complex path gain β.
    pub gain: C64,
    /// Elevation angle of departure at the surface, radians in [0, π/2).
    pub elev_aod: f64,
    /// Azimuth angle of departure at the surface, radians in [0, 2π).
    pub azim_aod: f64,
}

/// Multipath parameters of both hops of one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct RisLink {
    pub bs_ris: Vec<BsRisPath>,
    pub ris_user: Vec<RisUserPath>,
}

/// One random draw of all per-surface multipath parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub links: Vec<RisLink>,
}

impl ChannelRealization {
    pub fn num_ris(&self) -> usize {
        self.links.len()
    }

    pub fn link(&self, n: usize) -> Result<&RisLink> {
        self.links
            .get(n)
            .ok_or_else(|| Error::IndexOutOfRange(format!("RIS index {n} of {}", self.links.len())))
    }
}

/// ULA steering vector: entry m (1-based) is e^{−jπ(m−1) sin angle}/√M.
pub fn ula_steering(angle: f64, m: usize) -> DVector<C64> {
    let norm = 1.0 / (m as f64).sqrt();
    let s = angle.sin();
    DVector::from_fn(m, |i, _| {
        C64::from_polar(norm, -std::f64::consts::PI * i as f64 * s)
    })
}

/// One axis factor of the URA steering vector: entries
/// e^{−j2πΔ(ℓ−1/2)·c}/√L over ℓ ∈ [1−L/2, L/2], where `c` is the direction
/// cosine sum of that axis.
pub fn ura_axis_factor(c: f64, l: usize, delta: f64) -> DVector<C64> {
    let norm = 1.0 / (l as f64).sqrt();
    let half = l as f64 / 2.0;
    DVector::from_fn(l, |idx, _| {
        // ℓ − 1/2 for ℓ = idx + 1 − L/2
        let coord = idx as f64 + 0.5 - half;
        C64::from_polar(norm, -2.0 * std::f64::consts::PI * delta * coord * c)
    })
}

/// URA steering vector, the Kronecker product of the x- and y-axis factors.
/// Element order matches the surface's (i, j) lexicographic element order.
pub fn ura_steering(elev: f64, azim: f64, l: usize, delta: f64) -> DVector<C64> {
    let ax = ura_axis_factor(elev.sin() * azim.cos(), l, delta);
    let ay = ura_axis_factor(elev.sin() * azim.sin(), l, delta);
    ax.kronecker(&ay)
}

/// BS-to-RIS channel of surface `n`: G = Σ_d α_d a(ϑ_d, ψ_d) b^H(φ_d),
/// an L²×M matrix.
pub fn assemble_bs_ris_channel(
    realization: &ChannelRealization,
    n: usize,
    config: &SystemConfig,
) -> Result<DMatrix<C64>> {
    let link = realization.link(n)?;
    let (l, m, delta) = (config.ura_side, config.num_antennas, config.spacing);
    let mut g = DMatrix::zeros(l * l, m);
    for path in &link.bs_ris {
        let a = ura_steering(path.elev_aoa, path.azim_aoa, l, delta);
        let b = ula_steering(path.aod_bs, m);
        g += a * b.adjoint() * path.gain;
    }
    Ok(g)
}

/// RIS-to-user channel of surface `n` as a 1×L² row: f^H = Σ_k β_k u_k^T.
///
/// Departure-side phasors carry the opposite sign of the arrival side, so a
/// single phase gradient cancels the arrival and departure ramps of a steered
/// path pair.
pub fn assemble_ris_user_channel(
    realization: &ChannelRealization,
    n: usize,
    config: &SystemConfig,
) -> Result<RowDVector<C64>> {
    let link = realization.link(n)?;
    let (l, delta) = (config.ura_side, config.spacing);
    let mut f = RowDVector::zeros(l * l);
    for path in &link.ris_user {
        let u = ura_steering(path.elev_aod, path.azim_aod, l, delta);
        f += u.transpose() * path.gain;
    }
    Ok(f)
}

/// Linear power gain of the cascaded link through surface `n`:
/// G_BS · G_RIS · G_User · Δ²L⁴λ⁴ / (64π³ d₁² d₂²).
pub fn path_loss(config: &SystemConfig, n: usize) -> Result<f64> {
    if n >= config.num_ris {
        return Err(Error::IndexOutOfRange(format!(
            "RIS index {n} of {}",
            config.num_ris
        )));
    }
    let l = config.ura_side as f64;
    let d1 = config.bs_ris_dist[n];
    let d2 = config.ris_user_dist[n];
    let num = config.bs_gain
        * config.ris_gain
        * config.user_gain
        * config.spacing.powi(2)
        * l.powi(4)
        * config.wavelength.powi(4);
    let den = 64.0 * std::f64::consts::PI.powi(3) * d1 * d1 * d2 * d2;
    Ok(num / den)
}

/// Zero-mean Laplacian draw with standard deviation `std` (scale = std/√2).
pub(crate) fn laplace_offset<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    let scale = std / std::f64::consts::SQRT_2;
    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let t = 1.0 - 2.0 * u.abs();
        if t > 0.0 {
            return -scale * u.signum() * t.ln();
        }
    }
}

/// I.i.d. exponential variances normalized to sum to one, then CSCG gains
/// with those variances.
fn draw_gains<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<C64> {
    let mut vars: Vec<f64> = (0..count).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = vars.iter().sum();
    vars.iter_mut().for_each(|v| *v /= total);
    vars.iter()
        .map(|v| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im) * (v / 2.0).sqrt()
        })
        .collect()
}

const ELEV_MARGIN: f64 = 1e-9;

/// Draws one channel realization.
///
/// For each link a cluster mean is drawn uniformly (surface elevations over
/// [0°, 80°], surface azimuths over [0, 2π), BS departure over (−80°, 80°));
/// each path adds an independent Laplacian offset of standard deviation
/// `angular_spread` per angle. Elevations and the BS departure angle are
/// clipped into their open ranges, azimuths wrap modulo 2π. Path-gain
/// variances are exponential draws normalized to sum to one per link.
pub fn sample_realization<R: Rng + ?Sized>(
    config: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    config.validate()?;
    let spread = config.angular_spread;
    let two_pi = 2.0 * std::f64::consts::PI;
    let elev_max = std::f64::consts::FRAC_PI_2 - ELEV_MARGIN;
    let aod_max = std::f64::consts::FRAC_PI_2 - ELEV_MARGIN;
    let p = config.paths;

    let mut links = Vec::with_capacity(config.num_ris);
    for _ in 0..config.num_ris {
        // BS-RIS hop.
        let mean_elev = rng.gen_range(0.0..80f64.to_radians());
        let mean_azim = rng.gen_range(0.0..two_pi);
        let mean_aod = rng.gen_range(-80f64.to_radians()..80f64.to_radians());
        let angles: Vec<(f64, f64, f64)> = (0..p)
            .map(|_| {
                let elev = (mean_elev + laplace_offset(rng, spread)).clamp(0.0, elev_max);
                let azim = (mean_azim + laplace_offset(rng, spread)).rem_euclid(two_pi);
                let aod = (mean_aod + laplace_offset(rng, spread)).clamp(-aod_max, aod_max);
                (elev, azim, aod)
            })
            .collect();
        let gains = draw_gains(rng, p);
        let bs_ris = angles
            .into_iter()
            .zip(gains)
            .map(|((elev_aoa, azim_aoa, aod_bs), gain)| BsRisPath {
                gain,
                elev_aoa,
                azim_aoa,
                aod_bs,
            })
            .collect();

        // RIS-user hop.
        let mean_elev = rng.gen_range(0.0..80f64.to_radians());
        let mean_azim = rng.gen_range(0.0..two_pi);
        let angles: Vec<(f64, f64)> = (0..p)
            .map(|_| {
                let elev = (mean_elev + laplace_offset(rng, spread)).clamp(0.0, elev_max);
                let azim = (mean_azim + laplace_offset(rng, spread)).rem_euclid(two_pi);
                (elev, azim)
            })
            .collect();
        let gains = draw_gains(rng, p);
        let ris_user = angles
            .into_iter()
            .zip(gains)
            .map(|((elev_aod, azim_aod), gain)| RisUserPath {
                gain,
                elev_aod,
                azim_aod,
            })
            .collect();

        links.push(RisLink { bs_ris, ris_user });
    }
    Ok(ChannelRealization { links })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ula_at_broadside_is_uniform() {
        let b = ula_steering(0.0, 8);
        let expect = 1.0 / 8f64.sqrt();
        for entry in b.iter() {
            assert!((entry - C64::new(expect, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn ula_quarter_turn_steps() {
        // sin(π/6) = 1/2 gives a −π/2 step per antenna.
        let b = ula_steering(std::f64::consts::FRAC_PI_6, 4);
        for (i, entry) in b.iter().enumerate() {
            let expect = C64::from_polar(0.5, -std::f64::consts::FRAC_PI_2 * i as f64);
            assert!((entry - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn steering_vectors_have_unit_norm() {
        for angle in [-1.2, 0.0, 0.4, 1.5] {
            assert!((ula_steering(angle, 8).norm() - 1.0).abs() < 1e-12);
        }
        for (elev, azim) in [(0.0, 1.0), (0.7, 2.0), (1.4, 5.9)] {
            assert!((ura_steering(elev, azim, 6, 0.5).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ura_at_zenith_is_uniform() {
        let a = ura_steering(0.0, 2.37, 4, 0.5);
        for entry in a.iter() {
            assert!((entry - C64::new(0.25, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn ura_axis_factors_at_grazing() {
        // elev = π/2, azim = 0, Δ = 1/2, L = 2: x-exponents ∓π(ℓ−1/2) with
        // ℓ ∈ {0, 1} → phases {+π/2, −π/2}; y-factor is flat.
        let ax = ura_axis_factor(1.0, 2, 0.5);
        let s = 1.0 / 2f64.sqrt();
        assert!((ax[0] - C64::from_polar(s, std::f64::consts::FRAC_PI_2)).norm() < 1e-12);
        assert!((ax[1] - C64::from_polar(s, -std::f64::consts::FRAC_PI_2)).norm() < 1e-12);
        let ay = ura_axis_factor(0.0, 2, 0.5);
        assert!((ay[0] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((ay[1] - C64::new(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_path_channel_is_rank_one_unit_frobenius() {
        let real = ChannelRealization {
            links: vec![RisLink {
                bs_ris: vec![BsRisPath {
                    gain: C64::new(1.0, 0.0),
                    elev_aoa: 0.5,
                    azim_aoa: 1.0,
                    aod_bs: 0.3,
                }],
                ris_user: vec![RisUserPath {
                    gain: C64::new(1.0, 0.0),
                    elev_aod: 0.4,
                    azim_aod: 2.0,
                }],
            }],
        };
        let cfg = SystemConfig::baseline(1, 4, 1);
        let g = assemble_bs_ris_channel(&real, 0, &cfg).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-12);
        let svd = g.clone().svd(false, false);
        let significant = svd.singular_values.iter().filter(|s| **s > 1e-9).count();
        assert_eq!(significant, 1);
        let f = assemble_ris_user_channel(&real, 0, &cfg).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_assembly_is_linear_in_gains() {
        let cfg = SystemConfig::baseline(1, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let real = sample_realization(&cfg, &mut rng).unwrap();
        let mut scaled = real.clone();
        let c = C64::new(2.0, -1.0);
        for p in &mut scaled.links[0].bs_ris {
            p.gain *= c;
        }
        let g1 = assemble_bs_ris_channel(&real, 0, &cfg).unwrap();
        let g2 = assemble_bs_ris_channel(&scaled, 0, &cfg).unwrap();
        assert!((g2 - g1 * c).norm() < 1e-12);

        let mut scaled = real.clone();
        for p in &mut scaled.links[0].ris_user {
            p.gain *= c;
        }
        let f1 = assemble_ris_user_channel(&real, 0, &cfg).unwrap();
        let f2 = assemble_ris_user_channel(&scaled, 0, &cfg).unwrap();
        assert!((f2 - f1 * c).norm() < 1e-12);
    }

    #[test]
    fn index_out_of_range_is_rejected() {
        let cfg = SystemConfig::baseline(1, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let real = sample_realization(&cfg, &mut rng).unwrap();
        assert!(assemble_bs_ris_channel(&real, 1, &cfg).is_err());
        assert!(assemble_ris_user_channel(&real, 3, &cfg).is_err());
        assert!(path_loss(&cfg, 1).is_err());
    }

    #[test]
    fn path_loss_scalings() {
        let cfg = SystemConfig::baseline(1, 10, 1);
        let pl = path_loss(&cfg, 0).unwrap();
        let double_l = SystemConfig {
            ura_side: 20,
            ..cfg.clone()
        };
        assert!((path_loss(&double_l, 0).unwrap() / pl - 16.0).abs() < 1e-9);
        let mut double_d = cfg.clone();
        double_d.bs_ris_dist[0] *= 2.0;
        assert!((path_loss(&double_d, 0).unwrap() / pl - 0.25).abs() < 1e-9);
    }

    #[test]
    fn path_loss_baseline_value() {
        // Independent evaluation: 10^(0.5)·10^(0.5)·1 · 0.25·30⁴·0.1⁴
        // / (64π³·50²·50²) ≈ 1.633e−8 for L² = 900.
        let cfg = SystemConfig::baseline(1, 30, 1);
        let pl = path_loss(&cfg, 0).unwrap();
        let expect = 10.0 * 0.25 * 30f64.powi(4) * 1e-4
            / (64.0 * std::f64::consts::PI.powi(3) * 6.25e6);
        assert!((pl / expect - 1.0).abs() < 1e-12);
        assert!((pl / 1.63e-8 - 1.0).abs() < 0.01);
    }

    #[test]
    fn single_path_variance_is_one() {
        let cfg = SystemConfig::baseline(1, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..32 {
            let real = sample_realization(&cfg, &mut rng).unwrap();
            // With one path the normalized variance is exactly 1; the drawn
            // gain is CSCG with unit variance but any single draw is finite.
            assert_eq!(real.links[0].bs_ris.len(), 1);
            assert!(real.links[0].bs_ris[0].gain.norm().is_finite());
        }
    }

    #[test]
    fn mean_total_gain_power_is_near_one() {
        let cfg = SystemConfig::baseline(1, 4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 10_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let real = sample_realization(&cfg, &mut rng).unwrap();
            acc += real.links[0].bs_ris.iter().map(|p| p.gain.norm_sqr()).sum::<f64>();
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean total power {mean}");
    }

    #[test]
    fn laplacian_offsets_match_angular_spread() {
        let std_target = 10f64.to_radians();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = laplace_offset(&mut rng, std_target);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let std = (sum_sq / n as f64 - mean * mean).sqrt();
        assert!((std / std_target - 1.0).abs() < 0.05, "empirical std {std}");
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let cfg = SystemConfig::baseline(2, 6, 3);
        let a = sample_realization(&cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = sample_realization(&cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_angles_stay_in_range() {
        let cfg = SystemConfig::baseline(2, 4, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let real = sample_realization(&cfg, &mut rng).unwrap();
            for link in &real.links {
                for p in &link.bs_ris {
                    assert!(p.elev_aoa >= 0.0 && p.elev_aoa < std::f64::consts::FRAC_PI_2);
                    assert!(p.azim_aoa >= 0.0 && p.azim_aoa < 2.0 * std::f64::consts::PI);
                    assert!(p.aod_bs.abs() < std::f64::consts::FRAC_PI_2);
                }
                for p in &link.ris_user {
                    assert!(p.elev_aod >= 0.0 && p.elev_aod < std::f64::consts::FRAC_PI_2);
                    assert!(p.azim_aod >= 0.0 && p.azim_aod < 2.0 * std::f64::consts::PI);
                }
            }
        }
    }
}
