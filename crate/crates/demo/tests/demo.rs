use gscnet_demo::{csbm_spectrum, positivity, response_curve, MAX_DEMO_NODES};

#[test]
fn response_curve_samples_the_closed_form() {
    let flat = response_curve(&[1.0], &[], 5);
    assert_eq!(flat.lambda, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    assert!(flat.total.iter().all(|&h| h == 1.0));
    // (2 − λ) + λ = 2 at every frequency.
    let both = response_curve(&[0.0, 1.0], &[0.0, 1.0], 9);
    for (h, (p, n)) in both.total.iter().zip(both.positive.iter().zip(&both.negative)) {
        assert!((h - 2.0).abs() < 1e-15);
        assert!((p + n - h).abs() < 1e-15);
    }
    assert_eq!(response_curve(&[], &[], 0).lambda, vec![0.0, 2.0]);
}

#[test]
fn spectrum_energy_is_a_distribution_and_tracks_homophily() {
    let hom = csbm_spectrum(120, 8.0, 4.0, 3).unwrap();
    let het = csbm_spectrum(120, 8.0, 0.25, 3).unwrap();
    for s in [&hom, &het] {
        assert_eq!(s.eigenvalues.len(), 120);
        assert!(s.eigenvalues.iter().all(|&l| (-1e-9..=2.0 + 1e-9).contains(&l)));
        assert!((s.label_energy.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    assert!(hom.label_smoothness < het.label_smoothness);
    assert!(hom.label_rayleigh < 1.0 && het.label_rayleigh > 1.0);
    assert!(csbm_spectrum(MAX_DEMO_NODES + 2, 8.0, 4.0, 0).is_err());
}

#[test]
fn positivity_view_matches_the_activation_rules() {
    let pos = positivity(&[1.0, 1.0], 10, 0.2, 4).unwrap();
    assert!(pos.class.is_positive());
    assert!(pos.min_edge_weight > 0.0);
    assert!(pos.edges.len() >= 9);
    assert!(!positivity(&[1.0, 0.0], 10, 0.2, 4).unwrap().class.is_positive());
    assert!(positivity(&[1.0, -0.5], 10, 0.2, 4).is_err());
}
