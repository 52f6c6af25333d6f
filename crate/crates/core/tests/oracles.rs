//! Independent brute-force oracles for the channel and optimizer paths.
//!
//! Every oracle here re-derives its expected value from raw per-element /
//! per-path loops (or random search), not from the library routines under
//! test.

use hpb_core::C64;
use hpb_core::channel::{
    assemble_bs_ris_channel, assemble_ris_user_channel, path_loss, sample_realization,
};
use hpb_core::config::SystemConfig;
use hpb_core::harness::{Algorithm, TrialOptions, run_trial};
use hpb_core::optim::{self, SolutionProfile, mrt, objective, sca_ascent, sca_v_step};
use hpb_core::phase::{self, ElementPhases, PhaseProfile};
use nalgebra::{DMatrix, DVector, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Raw per-entry evaluation of the BS-side channel sum, independent of the
/// steering-vector helpers.
fn naive_bs_ris_entry(
    real: &hpb_core::channel::ChannelRealization,
    n: usize,
    e: usize,
    m: usize,
    cfg: &SystemConfig,
) -> C64 {
    let l = cfg.ura_side;
    let (i, j) = (e / l, e % l);
    let ci = i as f64 + 0.5 - l as f64 / 2.0;
    let cj = j as f64 + 0.5 - l as f64 / 2.0;
    let norm = 1.0 / (l as f64 * (cfg.num_antennas as f64).sqrt());
    let mut acc = C64::new(0.0, 0.0);
    for p in &real.links[n].bs_ris {
        let ax = p.elev_aoa.sin() * p.azim_aoa.cos();
        let ay = p.elev_aoa.sin() * p.azim_aoa.sin();
        let elem = C64::from_polar(1.0, -TWO_PI * cfg.spacing * (ci * ax + cj * ay));
        let bs = C64::from_polar(1.0, std::f64::consts::PI * m as f64 * p.aod_bs.sin());
        acc += p.gain * elem * bs * norm;
    }
    acc
}

fn naive_ris_user_entry(
    real: &hpb_core::channel::ChannelRealization,
    n: usize,
    e: usize,
    cfg: &SystemConfig,
) -> C64 {
    let l = cfg.ura_side;
    let (i, j) = (e / l, e % l);
    let ci = i as f64 + 0.5 - l as f64 / 2.0;
    let cj = j as f64 + 0.5 - l as f64 / 2.0;
    let mut acc = C64::new(0.0, 0.0);
    for p in &real.links[n].ris_user {
        let ux = p.elev_aod.sin() * p.azim_aod.cos();
        let uy = p.elev_aod.sin() * p.azim_aod.sin();
        acc += p.gain
            * C64::from_polar(
                1.0 / l as f64,
                -TWO_PI * cfg.spacing * (ci * ux + cj * uy),
            );
    }
    acc
}

#[test]
fn channel_assembly_matches_entrywise_oracle() {
    let cfg = SystemConfig::baseline(2, 6, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for _ in 0..5 {
        let real = sample_realization(&cfg, &mut rng).unwrap();
        for n in 0..2 {
            let g = assemble_bs_ris_channel(&real, n, &cfg).unwrap();
            let mut err = 0.0f64;
            for e in 0..cfg.num_elements() {
                for m in 0..cfg.num_antennas {
                    err += (g[(e, m)] - naive_bs_ris_entry(&real, n, e, m, &cfg)).norm_sqr();
                }
            }
            assert!(err.sqrt() / g.norm() < 1e-12);

            let f = assemble_ris_user_channel(&real, n, &cfg).unwrap();
            let mut err = 0.0f64;
            for e in 0..cfg.num_elements() {
                err += (f[e] - naive_ris_user_entry(&real, n, e, &cfg)).norm_sqr();
            }
            assert!(err.sqrt() / f.norm() < 1e-12);
        }
    }
}

#[test]
fn direct_channel_matches_naive_triple_loop() {
    let cfg = SystemConfig::baseline(2, 6, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let real = sample_realization(&cfg, &mut rng).unwrap();
    let l = cfg.ura_side;
    let phases = ElementPhases {
        per_ris: (0..2)
            .map(|_| DMatrix::from_fn(l, l, |_, _| rng.gen_range(0.0..TWO_PI)))
            .collect(),
    };
    let h = phase::direct_cascaded_channel(&real, &phases, &cfg).unwrap();
    let mut naive = RowDVector::<C64>::zeros(cfg.num_antennas);
    for n in 0..2 {
        let pl_amp = path_loss(&cfg, n).unwrap().sqrt();
        for m in 0..cfg.num_antennas {
            for e in 0..cfg.num_elements() {
                let theta = phases.per_ris[n][(e / l, e % l)];
                naive[m] += naive_ris_user_entry(&real, n, e, &cfg)
                    * C64::from_polar(pl_amp, theta)
                    * naive_bs_ris_entry(&real, n, e, m, &cfg);
            }
        }
    }
    assert!((h - &naive).norm() / naive.norm() < 1e-12);
}

#[test]
fn mrt_beats_random_unit_power_beamformers() {
    let cfg = SystemConfig::baseline(3, 6, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let real = sample_realization(&cfg, &mut rng).unwrap();
    let profile = PhaseProfile {
        gradients: optim::spp_gradients(&real, &cfg).unwrap(),
        ref_phases: vec![0.3, -1.0, 2.2],
    };
    let h = phase::compact_channel(&real, &profile, &cfg).unwrap().h;
    let v = profile.wavefront();
    let w_star = mrt(&h, &v, cfg.tx_power).unwrap();
    let row = v.adjoint() * &h;
    let best = (&row * &w_star)[(0, 0)].norm_sqr();
    for _ in 0..100 {
        let mut w = DVector::from_fn(cfg.num_antennas, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        w *= C64::new(cfg.tx_power.sqrt() / w.norm(), 0.0);
        let got = (&row * &w)[(0, 0)].norm_sqr();
        assert!(got <= best * (1.0 + 1e-12));
    }
}

#[test]
fn sca_reaches_the_random_search_maximum_on_three_surfaces() {
    let cfg = SystemConfig::baseline(3, 6, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let real = sample_realization(&cfg, &mut rng).unwrap();
    let profile = PhaseProfile {
        gradients: optim::spp_gradients(&real, &cfg).unwrap(),
        ref_phases: vec![0.0; 3],
    };
    let h = phase::compact_channel(&real, &profile, &cfg).unwrap().h;

    // 10⁶-point random search over the 3-torus.
    let mut best_rand = f64::NEG_INFINITY;
    let hh = &h * h.adjoint();
    for _ in 0..1_000_000 {
        let v = DVector::from_fn(3, |_, _| C64::from_polar(1.0, rng.gen_range(0.0..TWO_PI)));
        let f = (v.adjoint() * &hh * &v)[(0, 0)].re;
        best_rand = best_rand.max(f);
    }

    let v0 = DVector::from_element(3, C64::new(1.0, 0.0));
    let out = sca_ascent(&h, v0, 5000, 0.0);
    for pair in out.trace.windows(2) {
        assert!(pair[1] >= pair[0] * (1.0 - 1e-12));
    }
    let f_sca = objective(&h, &out.v);
    assert!(
        f_sca >= best_rand * (1.0 - 1e-6),
        "SCA {f_sca} vs random search {best_rand}"
    );
}

#[test]
fn sca_fixed_point_condition_holds_componentwise() {
    let cfg = SystemConfig::baseline(3, 6, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let real = sample_realization(&cfg, &mut rng).unwrap();
    let profile = PhaseProfile {
        gradients: optim::spp_gradients(&real, &cfg).unwrap(),
        ref_phases: vec![0.0; 3],
    };
    let h = phase::compact_channel(&real, &profile, &cfg).unwrap().h;
    let v0 = DVector::from_element(3, C64::new(1.0, 0.0));
    let v = sca_ascent(&h, v0, 5000, 1e-15).v;
    // At a fixed point arg(H H^H v) matches arg(v) componentwise.
    let z = &h * (h.adjoint() * &v);
    for (zi, vi) in z.iter().zip(v.iter()) {
        if zi.norm() > 0.0 {
            let misalign = (zi / zi.norm() - vi).norm();
            assert!(misalign < 1e-5, "phase misalignment {misalign}");
        }
    }
    assert!((sca_v_step(&h, &v) - &v).norm() < 1e-5);
}

#[test]
fn spp_stage_one_matches_exhaustive_index_scan() {
    let cfg = SystemConfig::baseline(1, 6, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    for _ in 0..10 {
        let real = sample_realization(&cfg, &mut rng).unwrap();
        let link = &real.links[0];
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for (k, out) in link.ris_user.iter().enumerate() {
            for (d, inc) in link.bs_ris.iter().enumerate() {
                // Independent scan maximizing the per-hop magnitudes.
                let score = out.gain.norm().ln() + inc.gain.norm().ln();
                if score > best.2 {
                    best = (k, d, score);
                }
            }
        }
        let (k, d) = optim::strongest_pair(&real, 0).unwrap();
        assert_eq!((k, d), (best.0, best.1));

        let expect = phase::q_from_angles(
            (link.bs_ris[d].elev_aoa, link.bs_ris[d].azim_aoa),
            (link.ris_user[k].elev_aod, link.ris_user[k].azim_aod),
        );
        let got = optim::spp_gradients(&real, &cfg).unwrap()[0];
        assert!((got[0] - phase::wrap_q(expect[0], cfg.spacing)).abs() < 1e-15);
        assert!((got[1] - phase::wrap_q(expect[1], cfg.spacing)).abs() < 1e-15);
    }
}

#[test]
fn single_path_trial_matches_closed_form_rate() {
    let cfg = SystemConfig::baseline(1, 30, 1);
    let seed = 424242u64;
    let opts = TrialOptions::default();
    let result = run_trial(&cfg, Algorithm::HpbSpp, seed, &opts).unwrap();
    // Re-sample the same realization and evaluate the closed form
    // log₂(1 + p·PL·|αβ|²/σ²): one perfectly steered path with |p̃| = 1 and a
    // unit-norm BS steering row.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = sample_realization(&cfg, &mut rng).unwrap();
    let alpha = real.links[0].bs_ris[0].gain;
    let beta = real.links[0].ris_user[0].gain;
    let pl = path_loss(&cfg, 0).unwrap();
    let snr = cfg.tx_power * pl * alpha.norm_sqr() * beta.norm_sqr() / cfg.noise_power;
    let expect = (1.0 + snr).log2();
    assert!(
        (result.rate / expect - 1.0).abs() < 1e-9,
        "rate {} vs closed form {expect}",
        result.rate
    );
    let SolutionProfile::Structured(p) = &result.profile else {
        panic!("expected structured profile");
    };
    assert_eq!(p.num_ris(), 1);
}

#[test]
fn pb_sca_single_element_block_aligns_the_single_product_term() {
    // Smallest valid per-element problem: L = 2, one path per hop, M = 1.
    let mut cfg = SystemConfig::baseline(1, 2, 1);
    cfg.num_antennas = 1;
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let real = sample_realization(&cfg, &mut rng).unwrap();
    let pb = optim::pb_sca(&real, &cfg).unwrap();
    // Upper bound: all four element terms perfectly phase-aligned.
    let a = optim::per_element_channel_matrix(&real, &cfg).unwrap();
    let bound: f64 = a.iter().map(|x| x.norm()).sum::<f64>();
    assert!(pb.objective <= bound * bound * (1.0 + 1e-9));
    assert!(pb.objective >= bound * bound * (1.0 - 1e-6));
}
