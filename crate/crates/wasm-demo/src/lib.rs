//! Thin wasm-bindgen surface over hpb-core for the static demo page.
//!
//! All numeric work lives in plain functions so the host test suite covers it
//! without a wasm toolchain; the `#[wasm_bindgen]` exports only marshal
//! arguments.

use hpb_core::config::SystemConfig;
use hpb_core::harness::{Algorithm, TrialOptions, run_trial};
use hpb_core::phase::dirichlet_gain;
use wasm_bindgen::prelude::wasm_bindgen;

/// Reflection gain over a (s_x, s_y) grid of direction sums for a surface
/// steered to gradient (qx, qy). Row-major `points × points`, both axes
/// spanning [-range, range].
pub fn pattern_grid(
    l: usize,
    delta: f64,
    qx: f64,
    qy: f64,
    range: f64,
    points: usize,
) -> Vec<f64> {
    let step = 2.0 * range / (points - 1) as f64;
    let axis: Vec<f64> = (0..points).map(|i| -range + i as f64 * step).collect();
    let gx: Vec<f64> = axis.iter().map(|s| dirichlet_gain(s - qx, l, delta)).collect();
    let gy: Vec<f64> = axis.iter().map(|s| dirichlet_gain(s - qy, l, delta)).collect();
    let mut out = Vec::with_capacity(points * points);
    for &x in &gx {
        for &y in &gy {
            out.push(x * y);
        }
    }
    out
}

/// One-axis cut of the reflection gain, D(s − q) over s ∈ [-range, range].
pub fn gain_cut(l: usize, delta: f64, q: f64, range: f64, points: usize) -> Vec<f64> {
    let step = 2.0 * range / (points - 1) as f64;
    (0..points)
        .map(|i| dirichlet_gain(-range + i as f64 * step - q, l, delta))
        .collect()
}

/// Runs a set of optimizers on one seeded channel realization and reports the
/// achieved rates as JSON: `[{"id": "hpb-spp", "rate": ..}, ..]`.
pub fn compare_on_realization(seed: u64, l: usize, paths: usize) -> Result<String, String> {
    let cfg = SystemConfig::baseline(1, l, paths);
    cfg.validate().map_err(|e| e.to_string())?;
    let opts = TrialOptions::default();
    let algos = [
        Algorithm::PbSca,
        Algorithm::HpbAo,
        Algorithm::HpbSpp,
        Algorithm::Random,
    ];
    let mut entries = Vec::new();
    for algo in algos {
        let r = run_trial(&cfg, algo, seed, &opts).map_err(|e| e.to_string())?;
        entries.push(serde_json::json!({ "id": algo.id(), "rate": r.rate }));
    }
    Ok(serde_json::Value::Array(entries).to_string())
}

#[wasm_bindgen]
pub fn beam_pattern(l: usize, delta: f64, qx: f64, qy: f64, range: f64, points: usize) -> Vec<f64> {
    pattern_grid(l, delta, qx, qy, range, points)
}

#[wasm_bindgen]
pub fn gain_curve(l: usize, delta: f64, q: f64, range: f64, points: usize) -> Vec<f64> {
    gain_cut(l, delta, q, range, points)
}

#[wasm_bindgen]
pub fn compare_algorithms(seed: u64, l: usize, paths: usize) -> Result<String, String> {
    compare_on_realization(seed, l, paths)
}
