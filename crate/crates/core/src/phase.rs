//! Structured phase profiles and the compact cascaded channel.
//!
//! A surface's element phases form an arithmetic sequence along each axis
//! (generalized Snell's law): two gradient components steer the reflected
//! beam, one reference phase shifts the whole wavefront. Under that structure
//! the per-element cascaded channel collapses to an N×M matrix whose rows are
//! weighted combinations of BS steering rows, with real Dirichlet-kernel
//! reflection gains capturing the finite-aperture beam pattern.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::channel::{self, ChannelRealization};
use crate::config::SystemConfig;
use crate::{C64, Error, Result};

/// Structured phase variables of all surfaces: per-RIS gradient pair
/// `[q_x, q_y]` plus a reference phase φ.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub gradients: Vec<[f64; 2]>,
    pub ref_phases: Vec<f64>,
}

impl PhaseProfile {
    /// All-zero profile (flat surfaces) for `n` RISs.
    pub fn flat(num_ris: usize) -> Self {
        Self {
            gradients: vec![[0.0, 0.0]; num_ris],
            ref_phases: vec![0.0; num_ris],
        }
    }

    pub fn num_ris(&self) -> usize {
        self.gradients.len()
    }

    /// The wavefront phasor column v with v_n = e^{−jφ_n}, defined so that
    /// the effective row channel is v^H H.
    pub fn wavefront(&self) -> DVector<C64> {
        DVector::from_iterator(
            self.ref_phases.len(),
            self.ref_phases.iter().map(|phi| C64::from_polar(1.0, -phi)),
        )
    }

    /// Overwrites the reference phases from a wavefront phasor vector.
    pub fn set_wavefront(&mut self, v: &DVector<C64>) {
        self.ref_phases = v.iter().map(|z| -z.arg()).collect();
    }

    pub fn validate(&self, config: &SystemConfig) -> Result<()> {
        if self.gradients.len() != config.num_ris || self.ref_phases.len() != config.num_ris {
            return Err(Error::DimensionMismatch(format!(
                "profile covers {} surfaces, config has {}",
                self.gradients.len(),
                config.num_ris
            )));
        }
        let q_bar = config.q_bar();
        for g in &self.gradients {
            if g[0].abs() > q_bar + 1e-12 || g[1].abs() > q_bar + 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "gradient {g:?} outside [-{q_bar}, {q_bar}]"
                )));
            }
        }
        Ok(())
    }
}

/// Free per-element phases, one L×L matrix per surface. Row index maps to the
/// x coordinate i, column index to the y coordinate j, both offset so the
/// first row/column is element 1 − L/2.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementPhases {
    pub per_ris: Vec<DMatrix<f64>>,
}

impl ElementPhases {
    pub fn num_ris(&self) -> usize {
        self.per_ris.len()
    }
}

/// Gradient pair steering an incident direction into a reflected direction:
/// q = [sin ϑ_r cos ψ_r + sin ϑ_i cos ψ_i, sin ϑ_r sin ψ_r + sin ϑ_i sin ψ_i].
///
/// Angles are (elevation, azimuth) pairs in radians. Each component lies in
/// [−2, 2].
pub fn q_from_angles(incident: (f64, f64), reflected: (f64, f64)) -> [f64; 2] {
    let (ti, pi) = incident;
    let (tr, pr) = reflected;
    [
        tr.sin() * pr.cos() + ti.sin() * pi.cos(),
        tr.sin() * pr.sin() + ti.sin() * pi.sin(),
    ]
}

/// Shifts a gradient component by an integer multiple of the period 1/Δ into
/// [−q̄, q̄].
///
/// The element phases generated from `q` and from the wrapped value agree
/// modulo 2π up to one global multiple of π (the half-integer element
/// coordinates turn an odd shift multiple into a surface-wide sign), which
/// the reference phase absorbs; received power is unchanged.
pub fn wrap_q(q: f64, delta: f64) -> f64 {
    let period = 1.0 / delta;
    q - (q * delta).round_ties_even() * period
}

/// Element phases of one surface under the arithmetic-sequence structure:
/// θ_{i,j} = 2πΔ(i−1/2)q_x + 2πΔ(j−1/2)q_y + φ.
pub fn snell_element_phases(q: [f64; 2], phi: f64, l: usize, delta: f64) -> DMatrix<f64> {
    let half = l as f64 / 2.0;
    let two_pi_delta = 2.0 * std::f64::consts::PI * delta;
    DMatrix::from_fn(l, l, |i_idx, j_idx| {
        let ci = i_idx as f64 + 0.5 - half;
        let cj = j_idx as f64 + 0.5 - half;
        two_pi_delta * (ci * q[0] + cj * q[1]) + phi
    })
}

/// Expands a structured profile into free per-element phases.
pub fn expand_profile(profile: &PhaseProfile, l: usize, delta: f64) -> ElementPhases {
    ElementPhases {
        per_ris: profile
            .gradients
            .iter()
            .zip(&profile.ref_phases)
            .map(|(q, phi)| snell_element_phases(*q, *phi, l, delta))
            .collect(),
    }
}

// Below this, sin(πΔs) is treated as a removable singularity and the factor
// is evaluated by the explicit length-L geometric sum.
const SINGULARITY_GUARD: f64 = 1e-9;

/// Per-axis reflection gain of an L-element aperture at direction offset `s`:
/// sinc(ΔLs)/sinc(Δs) = sin(πΔLs) / (L sin(πΔs)), real and in [−1, 1].
pub fn dirichlet_gain(s: f64, l: usize, delta: f64) -> f64 {
    // Reduce Δs to its nearest integer so both sines see a small argument;
    // evaluating sin(πΔLs) directly loses ~8 digits right next to a grating
    // lobe. Each integer step of Δs flips sin(πΔs) once and sin(πΔLs) L
    // times.
    let shift = (delta * s).round();
    let x = std::f64::consts::PI * (delta * s - shift);
    let parity = |m: i64| if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let den_sign = parity(shift as i64);
    let num_sign = parity(l as i64 * shift as i64);
    let den = x.sin();
    if den.abs() < SINGULARITY_GUARD {
        // Explicit sum over the symmetric half-integer offsets; the imaginary
        // parts cancel pairwise.
        let half = l / 2;
        let mut acc = 0.0;
        for k in 1..=half {
            acc += ((2 * k - 1) as f64 * x).cos();
        }
        return den_sign * 2.0 * acc / l as f64;
    }
    num_sign * den_sign * (l as f64 * x).sin() / (l as f64 * den)
}

/// Direction offsets (s_x, s_y) of the (k, d) path pair of surface `n` under
/// gradient `q`: the departure and arrival direction sums minus the gradient.
pub fn direction_offsets(
    realization: &ChannelRealization,
    n: usize,
    k: usize,
    d: usize,
    q: [f64; 2],
) -> Result<(f64, f64)> {
    let link = realization.link(n)?;
    let out = link.ris_user.get(k).ok_or_else(|| {
        Error::IndexOutOfRange(format!("RIS-user path {k} of {}", link.ris_user.len()))
    })?;
    let inc = link.bs_ris.get(d).ok_or_else(|| {
        Error::IndexOutOfRange(format!("BS-RIS path {d} of {}", link.bs_ris.len()))
    })?;
    let sx = out.elev_aod.sin() * out.azim_aod.cos() + inc.elev_aoa.sin() * inc.azim_aoa.cos()
        - q[0];
    let sy = out.elev_aod.sin() * out.azim_aod.sin() + inc.elev_aoa.sin() * inc.azim_aoa.sin()
        - q[1];
    Ok((sx, sy))
}

/// Reflection gain of one path pair: the complex factor p = e^{jφ}·p̃ and the
/// reference-phase-stripped real factor p̃, the product of the two per-axis
/// Dirichlet gains at the pair's direction offsets.
pub fn gain_factor(
    realization: &ChannelRealization,
    n: usize,
    k: usize,
    d: usize,
    profile: &PhaseProfile,
    config: &SystemConfig,
) -> Result<(C64, f64)> {
    let q = *profile
        .gradients
        .get(n)
        .ok_or_else(|| Error::IndexOutOfRange(format!("profile RIS index {n}")))?;
    let (sx, sy) = direction_offsets(realization, n, k, d, q)?;
    let l = config.ura_side;
    let p_stripped = dirichlet_gain(sx, l, config.spacing) * dirichlet_gain(sy, l, config.spacing);
    let p = C64::from_polar(1.0, profile.ref_phases[n]) * p_stripped;
    Ok((p, p_stripped))
}

/// Gains of one path pair inside [`CascadedChannel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGain {
    pub offset_x: f64,
    pub offset_y: f64,
    /// Reference-phase-stripped real reflection gain p̃.
    pub gain: f64,
}

/// The compact cascaded channel H (N×M) plus the factors it was built from.
///
/// Row n is √PL_n · Σ_d r_{n,d} b_{n,d}^H with
/// r_{n,d} = α_{n,d} Σ_k β_{n,k} p̃_{n,k,d}; the effective row channel seen
/// by the user is v^H H for the wavefront phasor v of the same profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel {
    pub h: DMatrix<C64>,
    /// Combined per-path factors r_{n,d}, indexed `[n][d]`.
    pub r: Vec<Vec<C64>>,
    /// Per-pair offsets and stripped gains, indexed `[n][k][d]`.
    pub pair_gains: Vec<Vec<Vec<PairGain>>>,
}

/// Builds the compact cascaded channel for a structured profile.
///
/// The reference phases do not enter H; they live entirely in the wavefront
/// phasor that multiplies it.
pub fn compact_channel(
    realization: &ChannelRealization,
    profile: &PhaseProfile,
    config: &SystemConfig,
) -> Result<CascadedChannel> {
    if realization.num_ris() != config.num_ris {
        return Err(Error::DimensionMismatch(format!(
            "realization has {} surfaces, config {}",
            realization.num_ris(),
            config.num_ris
        )));
    }
    profile.validate(config)?;
    let (m, l, delta) = (config.num_antennas, config.ura_side, config.spacing);
    let mut h = DMatrix::zeros(config.num_ris, m);
    let mut r_all = Vec::with_capacity(config.num_ris);
    let mut pair_all = Vec::with_capacity(config.num_ris);
    for n in 0..config.num_ris {
        let link = realization.link(n)?;
        let q = profile.gradients[n];
        let pl_amp = channel::path_loss(config, n)?.sqrt();

        let mut pairs: Vec<Vec<PairGain>> = Vec::with_capacity(link.ris_user.len());
        for k in 0..link.ris_user.len() {
            let mut row = Vec::with_capacity(link.bs_ris.len());
            for d in 0..link.bs_ris.len() {
                let (sx, sy) = direction_offsets(realization, n, k, d, q)?;
                let gain = dirichlet_gain(sx, l, delta) * dirichlet_gain(sy, l, delta);
                row.push(PairGain {
                    offset_x: sx,
                    offset_y: sy,
                    gain,
                });
            }
            pairs.push(row);
        }

        let mut r_n = Vec::with_capacity(link.bs_ris.len());
        let mut row = RowDVector::<C64>::zeros(m);
        for (d, inc) in link.bs_ris.iter().enumerate() {
            let combined: C64 = link
                .ris_user
                .iter()
                .enumerate()
                .map(|(k, out)| out.gain * pairs[k][d].gain)
                .sum();
            let r_nd = inc.gain * combined;
            let b = channel::ula_steering(inc.aod_bs, m);
            row += b.adjoint() * r_nd;
            r_n.push(r_nd);
        }
        h.set_row(n, &(row * C64::new(pl_amp, 0.0)));
        r_all.push(r_n);
        pair_all.push(pairs);
    }
    Ok(CascadedChannel {
        h,
        r: r_all,
        pair_gains: pair_all,
    })
}

/// Per-element cascaded channel: h^H = Σ_n √PL_n · f_n^H Θ_n G_n with
/// Θ_n = diag(e^{jθ}). Reference evaluation for free-phase baselines; the
/// compact form above must reproduce it exactly for structured phases.
pub fn direct_cascaded_channel(
    realization: &ChannelRealization,
    phases: &ElementPhases,
    config: &SystemConfig,
) -> Result<RowDVector<C64>> {
    if phases.num_ris() != config.num_ris || realization.num_ris() != config.num_ris {
        return Err(Error::DimensionMismatch(format!(
            "phases cover {} surfaces, realization {}, config {}",
            phases.num_ris(),
            realization.num_ris(),
            config.num_ris
        )));
    }
    let l = config.ura_side;
    let mut h = RowDVector::zeros(config.num_antennas);
    for n in 0..config.num_ris {
        let theta = &phases.per_ris[n];
        if theta.nrows() != l || theta.ncols() != l {
            return Err(Error::DimensionMismatch(format!(
                "phase matrix of surface {n} is {}x{}, expected {l}x{l}",
                theta.nrows(),
                theta.ncols()
            )));
        }
        let mut f = channel::assemble_ris_user_channel(realization, n, config)?;
        // Element e = i_idx·L + j_idx matches the Kronecker order of the
        // steering vectors.
        for i_idx in 0..l {
            for j_idx in 0..l {
                f[i_idx * l + j_idx] *= C64::from_polar(1.0, theta[(i_idx, j_idx)]);
            }
        }
        let g = channel::assemble_bs_ris_channel(realization, n, config)?;
        let pl_amp = channel::path_loss(config, n)?.sqrt();
        h += f * g * C64::new(pl_amp, 0.0);
    }
    Ok(h)
}
