//! Transmit and passive beamforming algorithms.
//!
//! - [`mrt`]: power-constrained matched transmit beamformer
//! - [`sca_ascent`]: closed-form unit-modulus phase ascent (monotone
//!   minorize-maximize iteration)
//! - [`hpb_spp`]: two-stage structured design; strongest-path pairing for the
//!   gradients, then phase ascent over the reference phases
//! - [`hpb_ao`]: simulated annealing over the gradients alternated with the
//!   phase ascent, warm-started from [`hpb_spp`]
//! - [`hpb_es`]: exhaustive gradient grid search for the single-surface case
//! - [`pb_sca`]: free per-element phase ascent (the traditional baseline)
//! - [`random_phases`]: averaged uniform-random per-element phases

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{self, ChannelRealization};
use crate::config::SystemConfig;
use crate::harness::rate_from_objective;
use crate::phase::{
    self, ElementPhases, PhaseProfile, dirichlet_gain, expand_profile, q_from_angles, wrap_q,
};
use crate::{C64, Error, Result};

/// Knobs of the randomized/grid optimizers. The SCA iteration cap and
/// tolerance come from [`SystemConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerParams {
    /// Annealing proposals per alternating round.
    pub sa_iters: usize,
    /// Initial temperature as a multiple of the warm-start objective.
    pub sa_t0_scale: f64,
    /// Geometric cooling factor applied after each sweep over the gradient
    /// coordinates.
    pub sa_cooling: f64,
    /// Proposal standard deviation as a fraction of q̄.
    pub sa_step_frac: f64,
    /// Alternating (annealing + phase ascent) rounds.
    pub ao_outer_iters: usize,
    /// Grid points per gradient axis for the exhaustive search.
    pub es_grid: usize,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            sa_iters: 500,
            sa_t0_scale: 1.0,
            sa_cooling: 0.95,
            sa_step_frac: 0.1,
            ao_outer_iters: 5,
            es_grid: 400,
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sa_cooling > 0.0 && self.sa_cooling < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "SA cooling factor must be in (0,1), got {}",
                self.sa_cooling
            )));
        }
        if !(self.sa_t0_scale > 0.0) || !(self.sa_step_frac > 0.0) {
            return Err(Error::InvalidConfig(
                "SA temperature scale and step fraction must be positive".into(),
            ));
        }
        if self.es_grid < 2 {
            return Err(Error::InvalidConfig(format!(
                "ES grid must have at least 2 points per axis, got {}",
                self.es_grid
            )));
        }
        Ok(())
    }
}

/// Surface configuration produced by an optimizer.
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionProfile {
    Structured(PhaseProfile),
    PerElement(ElementPhases),
}

/// Output of one optimizer invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub profile: SolutionProfile,
    /// Transmit beamformer, ‖w‖² = p.
    pub w: DVector<C64>,
    /// ‖v^H H‖² (structured) or ‖h‖² (per-element), path loss included.
    pub objective: f64,
    /// Achievable rate in bits/s/Hz.
    pub rate: f64,
    /// Optimizer wall time in seconds; filled in by the harness.
    pub wall_time: f64,
    pub iterations: usize,
}

/// ‖v^H H‖², the received-power objective up to the transmit power factor.
pub fn objective(h: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    (v.adjoint() * h).norm_squared()
}

/// Matched transmit beamformer w = √p · H^H v / ‖v^H H‖.
///
/// Satisfies ‖w‖² = p and |v^H H w|² = p‖v^H H‖².
pub fn mrt(h: &DMatrix<C64>, v: &DVector<C64>, p: f64) -> Result<DVector<C64>> {
    let row = v.adjoint() * h;
    let norm = row.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateChannel);
    }
    Ok(h.adjoint() * v * C64::new(p.sqrt() / norm, 0.0))
}

/// One closed-form phase update: v ← e^{j arg(H H^H v)}.
///
/// Never decreases ‖v^H H‖². Components where H H^H v vanishes keep their
/// previous phase.
pub fn sca_v_step(h: &DMatrix<C64>, v: &DVector<C64>) -> DVector<C64> {
    let z = h * (h.adjoint() * v);
    DVector::from_iterator(
        v.len(),
        z.iter().zip(v.iter()).map(|(zi, vi)| {
            let n = zi.norm();
            if n == 0.0 { *vi } else { zi / n }
        }),
    )
}

/// Result of iterating [`sca_v_step`] to convergence.
#[derive(Debug, Clone)]
pub struct ScaOutcome {
    pub v: DVector<C64>,
    pub iterations: usize,
    /// Objective after each iteration, starting with the initial point.
    pub trace: Vec<f64>,
}

/// Iterates the phase update until the relative objective change drops below
/// `tol` or `max_iters` is reached.
pub fn sca_ascent(h: &DMatrix<C64>, v0: DVector<C64>, max_iters: usize, tol: f64) -> ScaOutcome {
    let mut v = v0;
    let mut f_prev = objective(h, &v);
    let mut trace = vec![f_prev];
    let mut iterations = 0;
    for _ in 0..max_iters {
        let v_next = sca_v_step(h, &v);
        let f_next = objective(h, &v_next);
        v = v_next;
        iterations += 1;
        trace.push(f_next);
        let converged = (f_next - f_prev).abs() / f_prev.max(f64::MIN_POSITIVE) < tol;
        f_prev = f_next;
        if converged {
            break;
        }
    }
    ScaOutcome {
        v,
        iterations,
        trace,
    }
}

/// Strongest path pair (user-side index k*, BS-side index d*) of surface `n`;
/// lowest index wins ties.
pub fn strongest_pair(realization: &ChannelRealization, n: usize) -> Result<(usize, usize)> {
    let link = realization.link(n)?;
    let argmax = |norms: Vec<f64>| {
        norms
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv { (i, v) } else { (bi, bv) }
            })
            .0
    };
    let k = argmax(link.ris_user.iter().map(|p| p.gain.norm()).collect());
    let d = argmax(link.bs_ris.iter().map(|p| p.gain.norm()).collect());
    Ok((k, d))
}

/// Stage-I gradients: steer the strongest incoming path of each surface into
/// its strongest outgoing path, wrapped into [−q̄, q̄].
pub fn spp_gradients(realization: &ChannelRealization, config: &SystemConfig) -> Result<Vec<[f64; 2]>> {
    let mut gradients = Vec::with_capacity(realization.num_ris());
    for n in 0..realization.num_ris() {
        let link = realization.link(n)?;
        let (k, d) = strongest_pair(realization, n)?;
        let inc = &link.bs_ris[d];
        let out = &link.ris_user[k];
        let q = q_from_angles(
            (inc.elev_aoa, inc.azim_aoa),
            (out.elev_aod, out.azim_aod),
        );
        gradients.push([
            wrap_q(q[0], config.spacing),
            wrap_q(q[1], config.spacing),
        ]);
    }
    Ok(gradients)
}

fn finish_structured(
    profile: PhaseProfile,
    h: &DMatrix<C64>,
    config: &SystemConfig,
    iterations: usize,
) -> Result<RunResult> {
    let v = profile.wavefront();
    let obj = objective(h, &v);
    let w = mrt(h, &v, config.tx_power)?;
    let rate = rate_from_objective(config.tx_power, obj, config.noise_power);
    Ok(RunResult {
        profile: SolutionProfile::Structured(profile),
        w,
        objective: obj,
        rate,
        wall_time: 0.0,
        iterations,
    })
}

/// Two-stage structured design: strongest-path-pairing gradients, then the
/// phase ascent over the reference phases from an all-ones start.
pub fn hpb_spp(realization: &ChannelRealization, config: &SystemConfig) -> Result<RunResult> {
    config.validate()?;
    let mut profile = PhaseProfile {
        gradients: spp_gradients(realization, config)?,
        ref_phases: vec![0.0; config.num_ris],
    };
    let cascaded = phase::compact_channel(realization, &profile, config)?;
    let v0 = profile.wavefront();
    let sca = sca_ascent(&cascaded.h, v0, config.max_sca_iters, config.sca_tol);
    profile.set_wavefront(&sca.v);
    finish_structured(profile, &cascaded.h, config, sca.iterations)
}

/// Per-surface precomputation that makes gradient-only objective updates
/// cheap: direction sums and BS steering rows are fixed; only the Dirichlet
/// factors depend on the gradient.
struct GradientEvaluator {
    /// Per surface: α gains, β gains, direction sums per (k, d) pair, BS
    /// steering rows b_d^H scaled by √PL.
    alpha: Vec<Vec<C64>>,
    beta: Vec<Vec<C64>>,
    dir_x: Vec<DMatrix<f64>>,
    dir_y: Vec<DMatrix<f64>>,
    b_rows: Vec<DMatrix<C64>>,
    l: usize,
    delta: f64,
}

impl GradientEvaluator {
    fn new(realization: &ChannelRealization, config: &SystemConfig) -> Result<Self> {
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut dir_x = Vec::new();
        let mut dir_y = Vec::new();
        let mut b_rows = Vec::new();
        for n in 0..realization.num_ris() {
            let link = realization.link(n)?;
            let pl_amp = channel::path_loss(config, n)?.sqrt();
            alpha.push(link.bs_ris.iter().map(|p| p.gain).collect());
            beta.push(link.ris_user.iter().map(|p| p.gain).collect());
            let (kn, dn) = (link.ris_user.len(), link.bs_ris.len());
            dir_x.push(DMatrix::from_fn(kn, dn, |k, d| {
                let out = &link.ris_user[k];
                let inc = &link.bs_ris[d];
                out.elev_aod.sin() * out.azim_aod.cos() + inc.elev_aoa.sin() * inc.azim_aoa.cos()
            }));
            dir_y.push(DMatrix::from_fn(kn, dn, |k, d| {
                let out = &link.ris_user[k];
                let inc = &link.bs_ris[d];
                out.elev_aod.sin() * out.azim_aod.sin() + inc.elev_aoa.sin() * inc.azim_aoa.sin()
            }));
            let mut rows = DMatrix::zeros(dn, config.num_antennas);
            for (d, inc) in link.bs_ris.iter().enumerate() {
                let b = channel::ula_steering(inc.aod_bs, config.num_antennas);
                rows.set_row(d, &(b.adjoint() * C64::new(pl_amp, 0.0)));
            }
            b_rows.push(rows);
        }
        Ok(Self {
            alpha,
            beta,
            dir_x,
            dir_y,
            b_rows,
            l: config.ura_side,
            delta: config.spacing,
        })
    }

    /// Row n of the compact channel for gradient `q` (path loss included).
    fn row(&self, n: usize, q: [f64; 2]) -> RowDVector<C64> {
        let (kn, dn) = self.dir_x[n].shape();
        let mut row = RowDVector::zeros(self.b_rows[n].ncols());
        for d in 0..dn {
            let mut combined = C64::new(0.0, 0.0);
            for k in 0..kn {
                let gx = dirichlet_gain(self.dir_x[n][(k, d)] - q[0], self.l, self.delta);
                let gy = dirichlet_gain(self.dir_y[n][(k, d)] - q[1], self.l, self.delta);
                combined += self.beta[n][k] * (gx * gy);
            }
            row += self.b_rows[n].row(d) * (self.alpha[n][d] * combined);
        }
        row
    }

    fn channel_matrix(&self, gradients: &[[f64; 2]]) -> DMatrix<C64> {
        let m = self.b_rows[0].ncols();
        let mut h = DMatrix::zeros(gradients.len(), m);
        for (n, q) in gradients.iter().enumerate() {
            h.set_row(n, &self.row(n, *q));
        }
        h
    }
}

/// Alternating design: simulated annealing over the 2N gradient coordinates
/// with the wavefront fixed, then the phase ascent over the wavefront, both
/// warm-started from [`hpb_spp`]. The best visited configuration is retained,
/// so the result never falls below the warm start.
pub fn hpb_ao<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    config: &SystemConfig,
    params: &OptimizerParams,
    rng: &mut R,
) -> Result<RunResult> {
    params.validate()?;
    let warm = hpb_spp(realization, config)?;
    if params.sa_iters == 0 || params.ao_outer_iters == 0 {
        return Ok(warm);
    }
    let SolutionProfile::Structured(warm_profile) = &warm.profile else {
        unreachable!("hpb_spp returns a structured profile");
    };

    let eval = GradientEvaluator::new(realization, config)?;
    let q_bar = config.q_bar();
    let step = params.sa_step_frac * q_bar;
    let n_ris = config.num_ris;

    let mut gradients = warm_profile.gradients.clone();
    let mut v = warm_profile.wavefront();
    let mut rows: Vec<RowDVector<C64>> = (0..n_ris).map(|n| eval.row(n, gradients[n])).collect();
    // f(Q, v) = ‖Σ_n e^{jφ_n} row_n‖²
    let f_of = |rows: &[RowDVector<C64>], v: &DVector<C64>| -> f64 {
        let mut total = RowDVector::zeros(config.num_antennas);
        for (row, vn) in rows.iter().zip(v.iter()) {
            total += row * vn.conj();
        }
        total.norm_squared()
    };
    let mut f_cur = f_of(&rows, &v);

    let mut best_gradients = gradients.clone();
    let mut best_v = v.clone();
    let mut best_f = f_cur;
    let mut iterations = warm.iterations;

    for _ in 0..params.ao_outer_iters {
        let mut temperature = (params.sa_t0_scale * f_cur).max(f64::MIN_POSITIVE);
        let sweep_len = 2 * n_ris;
        for it in 0..params.sa_iters {
            let n = rng.gen_range(0..n_ris);
            let axis = rng.gen_range(0..2usize);
            let mut q_new = gradients[n];
            let noise: f64 = StandardNormal.sample(rng);
            q_new[axis] = (q_new[axis] + step * noise).clamp(-q_bar, q_bar);
            let row_new = eval.row(n, q_new);
            let row_old = std::mem::replace(&mut rows[n], row_new);
            let f_new = f_of(&rows, &v);
            let accept = f_new >= f_cur || rng.gen::<f64>() < ((f_new - f_cur) / temperature).exp();
            if accept {
                gradients[n] = q_new;
                f_cur = f_new;
                if f_cur > best_f {
                    best_f = f_cur;
                    best_gradients = gradients.clone();
                    best_v = v.clone();
                }
            } else {
                rows[n] = row_old;
            }
            if (it + 1) % sweep_len == 0 {
                temperature *= params.sa_cooling;
            }
            iterations += 1;
        }
        // Retain the best gradients seen, then re-align the wavefront.
        gradients = best_gradients.clone();
        let h = eval.channel_matrix(&gradients);
        let sca = sca_ascent(&h, best_v.clone(), config.max_sca_iters, config.sca_tol);
        iterations += sca.iterations;
        v = sca.v;
        rows = (0..n_ris).map(|n| eval.row(n, gradients[n])).collect();
        f_cur = f_of(&rows, &v);
        if f_cur > best_f {
            best_f = f_cur;
            best_gradients = gradients.clone();
            best_v = v.clone();
        }
    }

    let mut profile = PhaseProfile {
        gradients: best_gradients,
        ref_phases: vec![0.0; n_ris],
    };
    profile.set_wavefront(&best_v);
    let h = eval.channel_matrix(&profile.gradients);
    finish_structured(profile, &h, config, iterations)
}

/// Exhaustive grid search over the gradient pair of a single surface.
///
/// The objective does not depend on the reference phase when N = 1, so the
/// wavefront is fixed at 1.
pub fn hpb_es(
    realization: &ChannelRealization,
    config: &SystemConfig,
    grid: usize,
) -> Result<RunResult> {
    if config.num_ris != 1 {
        return Err(Error::EsRequiresSingleRis(config.num_ris));
    }
    if grid < 2 {
        return Err(Error::InvalidConfig(format!(
            "ES grid must have at least 2 points per axis, got {grid}"
        )));
    }
    config.validate()?;
    let eval = GradientEvaluator::new(realization, config)?;
    let q_bar = config.q_bar();
    let axis: Vec<f64> = (0..grid)
        .map(|i| -q_bar + 2.0 * q_bar * i as f64 / (grid - 1) as f64)
        .collect();

    // Per-axis Dirichlet tables: gains are separable across the two gradient
    // coordinates, so each axis is tabulated once.
    let (kn, dn) = eval.dir_x[0].shape();
    let table = |dirs: &DMatrix<f64>| -> Vec<Vec<f64>> {
        axis.iter()
            .map(|q| {
                let mut t = Vec::with_capacity(kn * dn);
                for d in 0..dn {
                    for k in 0..kn {
                        t.push(dirichlet_gain(dirs[(k, d)] - q, config.ura_side, config.spacing));
                    }
                }
                t
            })
            .collect()
    };
    let gx = table(&eval.dir_x[0]);
    let gy = table(&eval.dir_y[0]);

    let b_rows = &eval.b_rows[0];
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
    let mut r = vec![C64::new(0.0, 0.0); dn];
    for (ix, tx) in gx.iter().enumerate() {
        for (iy, ty) in gy.iter().enumerate() {
            for d in 0..dn {
                let mut combined = C64::new(0.0, 0.0);
                for k in 0..kn {
                    combined += eval.beta[0][k] * (tx[d * kn + k] * ty[d * kn + k]);
                }
                r[d] = eval.alpha[0][d] * combined;
            }
            let mut row = RowDVector::<C64>::zeros(config.num_antennas);
            for d in 0..dn {
                row += b_rows.row(d) * r[d];
            }
            let f = row.norm_squared();
            if f > best.0 {
                best = (f, [axis[ix], axis[iy]]);
            }
        }
    }

    let profile = PhaseProfile {
        gradients: vec![best.1],
        ref_phases: vec![0.0],
    };
    let h = eval.channel_matrix(&profile.gradients);
    finish_structured(profile, &h, config, grid * grid)
}

/// Stacked per-element channel matrix A (NL²×M): row block n is
/// √PL_n · diag(f_n^H) G_n, so the cascaded channel for element phasors x is
/// h^H = x^T A.
pub fn per_element_channel_matrix(
    realization: &ChannelRealization,
    config: &SystemConfig,
) -> Result<DMatrix<C64>> {
    let l2 = config.num_elements();
    let mut a = DMatrix::zeros(config.num_ris * l2, config.num_antennas);
    for n in 0..config.num_ris {
        let f = channel::assemble_ris_user_channel(realization, n, config)?;
        let g = channel::assemble_bs_ris_channel(realization, n, config)?;
        let pl_amp = channel::path_loss(config, n)?.sqrt();
        for e in 0..l2 {
            let scale = f[e] * pl_amp;
            for m in 0..config.num_antennas {
                a[(n * l2 + e, m)] = scale * g[(e, m)];
            }
        }
    }
    Ok(a)
}

fn element_phases_from_conj_phasors(v: &DVector<C64>, config: &SystemConfig) -> ElementPhases {
    let l = config.ura_side;
    let per_ris = (0..config.num_ris)
        .map(|n| {
            DMatrix::from_fn(l, l, |i, j| {
                let e = n * l * l + i * l + j;
                -v[e].arg()
            })
        })
        .collect();
    ElementPhases { per_ris }
}

fn conj_phasors_from_element_phases(phases: &ElementPhases, config: &SystemConfig) -> DVector<C64> {
    let l = config.ura_side;
    let l2 = l * l;
    let mut v = DVector::zeros(config.num_ris * l2);
    for (n, theta) in phases.per_ris.iter().enumerate() {
        for i in 0..l {
            for j in 0..l {
                v[n * l2 + i * l + j] = C64::from_polar(1.0, -theta[(i, j)]);
            }
        }
    }
    v
}

/// Free per-element phase ascent over all NL² reflecting elements, the
/// traditional passive beamforming baseline. Warm-started from the expanded
/// [`hpb_spp`] profile unless an explicit start is given.
pub fn pb_sca(realization: &ChannelRealization, config: &SystemConfig) -> Result<RunResult> {
    let warm = hpb_spp(realization, config)?;
    let SolutionProfile::Structured(profile) = &warm.profile else {
        unreachable!("hpb_spp returns a structured profile");
    };
    let start = expand_profile(profile, config.ura_side, config.spacing);
    pb_sca_from(realization, config, &start)
}

/// [`pb_sca`] from an explicit per-element starting point.
pub fn pb_sca_from(
    realization: &ChannelRealization,
    config: &SystemConfig,
    start: &ElementPhases,
) -> Result<RunResult> {
    config.validate()?;
    let a = per_element_channel_matrix(realization, config)?;
    let v0 = conj_phasors_from_element_phases(start, config);
    let sca = sca_ascent(&a, v0, config.max_sca_iters, config.sca_tol);
    let obj = objective(&a, &sca.v);
    let w = mrt(&a, &sca.v, config.tx_power)?;
    let rate = rate_from_objective(config.tx_power, obj, config.noise_power);
    Ok(RunResult {
        profile: SolutionProfile::PerElement(element_phases_from_conj_phasors(&sca.v, config)),
        w,
        objective: obj,
        rate,
        wall_time: 0.0,
        iterations: sca.iterations,
    })
}

/// Uniform-random per-element phases, averaged over `trials` draws.
///
/// Objective and rate are means over the draws; the returned profile and
/// beamformer come from the last draw.
pub fn random_phases<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    config: &SystemConfig,
    rng: &mut R,
    trials: usize,
) -> Result<RunResult> {
    if trials < 1 {
        return Err(Error::InvalidConfig("random-phase trials must be >= 1".into()));
    }
    config.validate()?;
    let a = per_element_channel_matrix(realization, config)?;
    let mut sum_obj = 0.0;
    let mut sum_rate = 0.0;
    let mut last_v = DVector::zeros(a.nrows());
    let mut last_w = DVector::zeros(config.num_antennas);
    for _ in 0..trials {
        let v = DVector::from_fn(a.nrows(), |_, _| {
            C64::from_polar(1.0, rng.gen_range(0.0..2.0 * std::f64::consts::PI))
        });
        let obj = objective(&a, &v);
        sum_obj += obj;
        sum_rate += rate_from_objective(config.tx_power, obj, config.noise_power);
        last_w = mrt(&a, &v, config.tx_power)?;
        last_v = v;
    }
    Ok(RunResult {
        profile: SolutionProfile::PerElement(element_phases_from_conj_phasors(&last_v, config)),
        w: last_w,
        objective: sum_obj / trials as f64,
        rate: sum_rate / trials as f64,
        wall_time: 0.0,
        iterations: trials,
    })
}
