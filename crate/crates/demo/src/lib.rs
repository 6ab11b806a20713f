//! wasm-bindgen surface for the browser demo.
//!
//! Three interactive operations, each returning a JSON string the page
//! renders onto canvases:
//! - [`cluster_blobs`]: generate a 2-view 2-D blob instance, run the full
//!   solver, and ship back points, labels, anchors, graph edges and the
//!   per-iteration history.
//! - [`sweep_p`]: clustering quality across a grid of Schatten exponents.
//! - [`shrinkage_curve`]: the generalized soft-threshold σ → δ map for a
//!   chosen weight and exponent.
//!
//! Everything is seeded and deterministic, so a given parameter set always
//! draws the same picture.

use wasm_bindgen::prelude::wasm_bindgen;

use tenview::anchor::select_anchors;
use tenview::metrics::report;
use tenview::solver::{solve, AnchorCount, SolverConfig};
use tenview::synth::{generate_synth, SynthSpec};
use tenview::tensor::gst_scalar;

fn json_error(msg: &str) -> String {
    format!("{{\"error\":\"{}\"}}", msg.replace('"', "'"))
}

fn push_pairs(out: &mut String, rows: impl Iterator<Item = (f64, f64)>) {
    out.push('[');
    let mut first = true;
    for (a, b) in rows {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format!("[{a},{b}]"));
    }
    out.push(']');
}

fn push_nums<T: std::fmt::Display>(out: &mut String, vals: impl Iterator<Item = T>) {
    out.push('[');
    let mut first = true;
    for v in vals {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&format!("{v}"));
    }
    out.push(']');
}

/// Generates a seeded 2-view 2-D blob dataset, clusters it, and returns the
/// scene as JSON: points (view 1), truth, learned labels, anchors (view 1),
/// sparse shared-graph edges, metrics, and the iteration history.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn cluster_blobs(
    n: u32,
    k: u32,
    separation: f64,
    noise: f64,
    corruption: f64,
    lambda: f64,
    p: f64,
    anchor_ratio: f64,
    seed: u32,
) -> String {
    let spec = SynthSpec {
        n: n as usize,
        k: k as usize,
        v: 2,
        dims: vec![2, 2],
        separation,
        noise: vec![noise, noise],
        view_corruption: corruption,
        seed: seed as u64,
    };
    let data = match generate_synth(&spec) {
        Ok(d) => d,
        Err(e) => return json_error(&e.to_string()),
    };
    let cfg = SolverConfig {
        anchors: AnchorCount::Ratio(anchor_ratio),
        k_clusters: k as usize,
        lambda,
        p,
        seed: seed as u64,
        max_iter: 150,
        ..Default::default()
    };
    let result = match solve(&data, &cfg) {
        Ok(r) => r,
        Err(e) => return json_error(&e.to_string()),
    };
    let m = match cfg.anchors.resolve(data.n_samples()) {
        Ok(m) => m,
        Err(e) => return json_error(&e.to_string()),
    };
    // same strategy and seed as the solver, so these are its anchors
    let anchors = match select_anchors(&data, m, cfg.anchor_strategy, cfg.seed) {
        Ok(a) => a,
        Err(e) => return json_error(&e.to_string()),
    };
    let truth = data.labels().expect("synthetic data is labeled");
    let metrics = report(&result.labels, truth).ok();

    let mut out = String::with_capacity(1 << 16);
    out.push_str("{\"points\":");
    let view = data.view(0);
    push_pairs(&mut out, (0..view.nrows()).map(|i| (view[[i, 0]], view[[i, 1]])));
    out.push_str(",\"truth\":");
    push_nums(&mut out, truth.iter());
    out.push_str(",\"labels\":");
    push_nums(&mut out, result.labels.iter());
    out.push_str(",\"anchors\":");
    let av = anchors.view(0);
    push_pairs(&mut out, (0..av.nrows()).map(|j| (av[[j, 0]], av[[j, 1]])));
    out.push_str(",\"edges\":[");
    let mut first = true;
    for ((i, j), &w) in result.shared.indexed_iter() {
        if w > 1e-3 {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("[{i},{j},{w:.4}]"));
        }
    }
    out.push(']');
    out.push_str(",\"history\":{\"residual\":");
    push_nums(&mut out, result.history.iter().map(|r| r.residual));
    out.push_str(",\"zero_eigs\":");
    push_nums(&mut out, result.history.iter().map(|r| r.zero_eigs));
    out.push_str(",\"beta\":");
    push_nums(&mut out, result.history.iter().map(|r| r.beta));
    out.push_str(",\"objective\":");
    push_nums(&mut out, result.history.iter().map(|r| r.objective));
    out.push('}');
    if let Some(rep) = metrics {
        out.push_str(&format!(
            ",\"metrics\":{{\"acc\":{},\"nmi\":{},\"purity\":{},\"ari\":{}}}",
            rep.acc, rep.nmi, rep.purity, rep.ari
        ));
    }
    out.push_str(&format!(
        ",\"exact_k\":{},\"status\":\"{}\",\"iterations\":{}}}",
        result.exact_k,
        result.status,
        result.history.len()
    ));
    out
}

/// ACC/NMI over a grid of Schatten exponents on a fixed seeded instance.
/// Returns `[[p, acc, nmi], ...]` as JSON.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep_p(
    n: u32,
    k: u32,
    separation: f64,
    noise: f64,
    corruption: f64,
    anchor_ratio: f64,
    seed: u32,
    steps: u32,
) -> String {
    let spec = SynthSpec {
        n: n as usize,
        k: k as usize,
        v: 2,
        dims: vec![2, 2],
        separation,
        noise: vec![noise, noise],
        view_corruption: corruption,
        seed: seed as u64,
    };
    let data = match generate_synth(&spec) {
        Ok(d) => d,
        Err(e) => return json_error(&e.to_string()),
    };
    let truth = data.labels().expect("synthetic data is labeled").to_vec();
    let steps = steps.clamp(2, 20);
    let mut out = String::from("[");
    for i in 0..steps {
        let p = 0.1 + 0.9 * i as f64 / (steps - 1) as f64;
        let cfg = SolverConfig {
            anchors: AnchorCount::Ratio(anchor_ratio),
            k_clusters: k as usize,
            p,
            seed: seed as u64,
            max_iter: 120,
            ..Default::default()
        };
        let result = match solve(&data, &cfg) {
            Ok(r) => r,
            Err(e) => return json_error(&e.to_string()),
        };
        let rep = match report(&result.labels, &truth) {
            Ok(r) => r,
            Err(e) => return json_error(&e.to_string()),
        };
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("[{p:.3},{},{}]", rep.acc, rep.nmi));
    }
    out.push(']');
    out
}

/// Samples the generalized soft-threshold map δ(σ) on [0, sigma_max].
/// Returns `[[sigma, delta], ...]` as JSON.
#[wasm_bindgen]
pub fn shrinkage_curve(w: f64, p: f64, sigma_max: f64, steps: u32) -> String {
    if !(p > 0.0 && p <= 1.0) {
        return json_error("p must lie in (0, 1]");
    }
    if !(w >= 0.0 && sigma_max > 0.0) {
        return json_error("need w >= 0 and sigma_max > 0");
    }
    let steps = steps.clamp(2, 2000);
    let mut out = String::from("[");
    for i in 0..=steps {
        let sigma = sigma_max * i as f64 / steps as f64;
        let delta = gst_scalar(sigma, w, p);
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("[{sigma:.6},{delta:.6}]"));
    }
    out.push(']');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_blobs_returns_scene() {
        let json = cluster_blobs(90, 3, 9.0, 1.0, 0.0, 1.0, 0.4, 0.2, 7);
        assert!(!json.contains("error"), "{json}");
        for key in [
            "\"points\":",
            "\"truth\":",
            "\"labels\":",
            "\"anchors\":",
            "\"edges\":",
            "\"history\":",
            "\"metrics\":",
            "\"exact_k\":",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        // deterministic for a fixed seed
        let again = cluster_blobs(90, 3, 9.0, 1.0, 0.0, 1.0, 0.4, 0.2, 7);
        assert_eq!(json, again);
    }

    #[test]
    fn cluster_blobs_reports_bad_parameters() {
        let json = cluster_blobs(30, 3, 9.0, 1.0, 0.9, 1.0, 0.4, 0.2, 7);
        assert!(json.contains("error"));
        let json = cluster_blobs(30, 3, 9.0, 1.0, 0.0, 1.0, 1.4, 0.2, 7);
        assert!(json.contains("error"));
    }

    #[test]
    fn shrinkage_curve_is_soft_threshold_at_p1() {
        let json = shrinkage_curve(0.5, 1.0, 2.0, 4);
        assert_eq!(json, "[[0.000000,0.000000],[0.500000,0.000000],[1.000000,0.500000],[1.500000,1.000000],[2.000000,1.500000]]");
        assert!(shrinkage_curve(0.5, 0.0, 2.0, 4).contains("error"));
    }

    #[test]
    fn sweep_p_produces_grid() {
        let json = sweep_p(60, 2, 9.0, 1.0, 0.0, 0.2, 3, 3);
        assert!(!json.contains("error"), "{json}");
        assert_eq!(json.matches('[').count(), 4); // outer + 3 rows
    }
}
