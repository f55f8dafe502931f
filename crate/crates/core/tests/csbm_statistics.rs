//! Monte Carlo checks on the CSBM generator, 20 seeds each.

use gscnet::data::{csbm_generate, CsbmParams, CsbmPreset};

fn smoothness(params: &CsbmParams) -> f64 {
    csbm_generate(params).unwrap().stats().label_smoothness.unwrap()
}

#[test]
fn equal_probabilities_give_half_cross_edges() {
    for seed in 0..20 {
        let l = smoothness(&CsbmParams::with_degree_ratio(500, 10.0, 1.0, seed));
        assert!((l - 0.5).abs() <= 0.05, "seed {seed}: {l}");
    }
}

#[test]
fn homophily_preset_is_smooth_and_heterophily_preset_is_not() {
    for seed in 0..20 {
        let hom = smoothness(&CsbmParams::preset(CsbmPreset::Homophily, seed));
        let het = smoothness(&CsbmParams::preset(CsbmPreset::Heterophily, seed));
        assert!(hom <= 0.25, "seed {seed}: homophily {hom}");
        assert!(het >= 0.75, "seed {seed}: heterophily {het}");
    }
}

#[test]
fn example_probabilities_also_give_a_smooth_graph() {
    // p_intra = 20/n, p_inter = 4/n.
    for seed in 0..20 {
        let p = CsbmParams { n: 1000, p_intra: 0.02, p_inter: 0.004, mu: 1.0, sigma: 1.0, d: 16, seed };
        let l = smoothness(&p);
        assert!(l <= 0.25, "seed {seed}: {l}");
    }
}

#[test]
fn smoothness_falls_as_the_intra_ratio_grows() {
    let means: Vec<f64> = [0.5, 1.0, 2.0, 5.0]
        .iter()
        .map(|&ratio| {
            (0..20)
                .map(|seed| smoothness(&CsbmParams::with_degree_ratio(400, 10.0, ratio, seed)))
                .sum::<f64>()
                / 20.0
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}
