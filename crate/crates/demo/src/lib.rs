//! Browser bindings for three interactive views of the filter library.
//!
//! The plain functions return serialisable structs and are tested natively;
//! the `#[wasm_bindgen]` wrappers only convert them to JSON strings.

use gscnet::basis::FilterSpec;
use gscnet::data::{csbm_generate, random_connected_graph, CsbmParams};
use gscnet::pnca::{label_smoothness, positive_combination_check, rayleigh_quotient, ActivationClass};
use gscnet::verify::{dense_eigensystem, dense_shifted};
use gscnet::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest graph the page will decompose densely.
pub const MAX_DEMO_NODES: usize = 400;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponseCurve {
    pub lambda: Vec<f64>,
    pub total: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

/// `h(λ) = Σ α_i (2 − λ)^i + Σ β_j λ^j` sampled at `samples` evenly spaced
/// points of `[0, 2]`.
pub fn response_curve(alpha: &[f64], beta: &[f64], samples: usize) -> ResponseCurve {
    let spec = FilterSpec::new(alpha.to_vec(), beta.to_vec());
    let samples = samples.max(2);
    let lambda: Vec<f64> = (0..samples).map(|i| 2.0 * i as f64 / (samples - 1) as f64).collect();
    ResponseCurve {
        total: lambda.iter().map(|&l| spec.response(l)).collect(),
        positive: lambda.iter().map(|&l| spec.positive_response(l)).collect(),
        negative: lambda.iter().map(|&l| spec.negative_response(l)).collect(),
        lambda,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumView {
    pub eigenvalues: Vec<f64>,
    /// Share of the centred label signal's energy on each eigenvector, in
    /// eigenvalue order; sums to one.
    pub label_energy: Vec<f64>,
    pub label_smoothness: f64,
    /// `yᵀ L y / yᵀ y` for the centred label signal.
    pub label_rayleigh: f64,
    pub edges: usize,
}

/// Spectrum of a two-class CSBM graph and where its label signal lives in it.
pub fn csbm_spectrum(n: usize, expected_degree: f64, ratio: f64, seed: u64) -> Result<SpectrumView> {
    if n > MAX_DEMO_NODES {
        return Err(gscnet::Error::Size { what: "demo graph", n, limit: MAX_DEMO_NODES });
    }
    let ds = csbm_generate(&CsbmParams::with_degree_ratio(n, expected_degree, ratio, seed))?;
    let eig = dense_eigensystem(&ds.graph)?;
    let mean = ds.labels.iter().sum::<usize>() as f64 / n as f64;
    let y: Vec<f64> = ds.labels.iter().map(|&c| c as f64 - mean).collect();
    let norm2: f64 = y.iter().map(|v| v * v).sum();
    let label_energy = (0..n)
        .map(|k| {
            let proj: f64 = (0..n).map(|i| eig.vectors[(i, k)] * y[i]).sum();
            proj * proj / norm2
        })
        .collect();
    Ok(SpectrumView {
        eigenvalues: eig.values.clone(),
        label_energy,
        label_smoothness: label_smoothness(&ds.graph, &ds.labels)?,
        label_rayleigh: rayleigh_quotient(&ds.graph, &y)?,
        edges: ds.graph.undirected_edge_count(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityView {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub class: ActivationClass,
    /// Smallest entry of `2I − L` on the graph's edges and diagonal.
    pub min_edge_weight: f64,
}

/// Classifies `Σ α_i (2I − L)^i` on a random connected graph.
pub fn positivity(alpha: &[f64], n: usize, p: f64, seed: u64) -> Result<PositivityView> {
    if n > MAX_DEMO_NODES {
        return Err(gscnet::Error::Size { what: "demo graph", n, limit: MAX_DEMO_NODES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(n, p, &mut rng);
    let class = positive_combination_check(alpha, &g)?;
    let shifted = dense_shifted(&g)?;
    let edges: Vec<(usize, usize)> = g.undirected_edges().collect();
    let min_edge_weight = edges
        .iter()
        .map(|&(u, v)| shifted[(u, v)])
        .chain((0..n).map(|i| shifted[(i, i)]))
        .fold(f64::INFINITY, f64::min);
    Ok(PositivityView { n, edges, class, min_edge_weight })
}

fn to_json<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e.to_string()))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())))
}

#[wasm_bindgen(js_name = responseCurve)]
pub fn response_curve_js(alpha: &[f64], beta: &[f64], samples: usize) -> std::result::Result<String, JsValue> {
    to_json(Ok(response_curve(alpha, beta, samples)))
}

#[wasm_bindgen(js_name = csbmSpectrum)]
pub fn csbm_spectrum_js(n: usize, expected_degree: f64, ratio: f64, seed: u32) -> std::result::Result<String, JsValue> {
    to_json(csbm_spectrum(n, expected_degree, ratio, u64::from(seed)))
}

#[wasm_bindgen(js_name = positivityCheck)]
pub fn positivity_js(alpha: &[f64], n: usize, p: f64, seed: u32) -> std::result::Result<String, JsValue> {
    to_json(positivity(alpha, n, p, u64::from(seed)))
}
