use annealed_ising::graph_models::{sample_grg, DegreeSequence, WeightSequence};
use annealed_ising::samplers::{self, ChainConfig};
use annealed_ising::{cm2, rng, stats};

#[test]
fn cm2_chain_passes_clt_diagnostics() {
    let chi = cm2::susceptibility_cm2(0.5, 0.3).unwrap();
    let batch = samplers::joint_mcmc_cm(
        &DegreeSequence::two_regular(1000).unwrap(),
        0.5,
        0.3,
        &ChainConfig::new(41, 40_000),
    )
    .unwrap();
    let report = stats::clt_diagnostics(&batch.values, batch.n, Some(chi), Some(2.0)).unwrap();
    assert!(report.kurtosis_ok && report.ks_ok, "{report:?}");
    let h = 1e-3;
    let kappa3 = (cm2::susceptibility_cm2(0.5, 0.3 + h).unwrap() - cm2::susceptibility_cm2(0.5, 0.3 - h).unwrap()) / (2.0 * h);
    let predicted = kappa3 / (chi.powf(1.5) * (batch.n as f64).sqrt());
    assert!((report.skewness - predicted).abs() <= 4.0 * report.skewness_se, "{report:?} predicted {predicted}");
}

#[test]
fn grg_edge_frequency() {
    let w = WeightSequence::new(vec![1.0, 1.0]).unwrap();
    let mut g = rng::from_seed(5);
    let draws = 100_000;
    let hits = (0..draws).filter(|_| !sample_grg(&w, &mut g).edges.is_empty()).count();
    let freq = hits as f64 / draws as f64;
    let se = (1.0 / 3.0 * 2.0 / 3.0 / draws as f64).sqrt();
    assert!((freq - 1.0 / 3.0).abs() < 3.0 * se, "{freq}");
}

#[test]
fn pooled_chains_match_single_chain_scale() {
    let d = DegreeSequence::cm12(0.5, 400).unwrap();
    let mut pooled = Vec::new();
    for seed in 0..4 {
        let b = samplers::joint_mcmc_cm(&d, 0.4, 0.2, &ChainConfig::new(seed, 10_000)).unwrap();
        assert!(stats::estimate_moments(&b).unwrap().ess >= 100.0);
        pooled.extend(b.values);
    }
    let est = stats::estimate_moments_raw(&pooled, d.len()).unwrap();
    let s2 = annealed_ising::cm12::sigma2_variance(0.4, 0.2, 0.5).unwrap();
    assert!((est.variance - s2).abs() < 3.0 * est.variance_se + 2e-2, "{} vs {s2}", est.variance);
}

#[test]
fn annealed_grg_chain_is_reproducible() {
    let w = WeightSequence::power_law(3.5, 1.0, 300).unwrap();
    let cfg = ChainConfig::new(77, 500).with_thin(2);
    let a = samplers::glauber_annealed_grg(&w, 0.6, 0.0, &cfg).unwrap();
    let b = samplers::glauber_annealed_grg(&w, 0.6, 0.0, &cfg).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.len(), 500);
}
