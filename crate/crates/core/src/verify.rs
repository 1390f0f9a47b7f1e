//! Cross-checks between the closed-form results, the exact enumerators and
//! the samplers.

use std::time::Instant;

use crate::error::Result;
use crate::graph_models::{grg_edge_prob, DegreeSequence, Multigraph, WeightSequence};
use crate::numeric::{ln_two_cosh, sech2};
use crate::samplers::{self, ChainConfig};
use crate::{cm12, cm2, exact, grg};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Small,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed discrepancy against its tolerance.
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> Result<(bool, String)>;

fn small_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("transfer_matrix_vs_enumeration", transfer_matrices),
        ("grg_product_formula", grg_product_formula),
        ("cm2_finite_pressure", cm2_finite_pressure),
        ("cm12_finite_pressure", cm12_finite_pressure),
        ("beta_zero_identities", beta_zero),
        ("mn_pmf", mn_pmf_check),
        ("annealed_onset", annealed_onset),
        ("surface_concavity", surface_concavity),
    ]
}

fn full_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("cm12_pressure_limit", cm12_pressure_limit),
        ("sampler_glauber_triangle", sampler_triangle),
        ("sampler_annealed_grg", sampler_grg),
        ("sampler_joint_cm", sampler_cm),
    ]
}

/// Runs every check of the suite; errors count as failures.
pub fn run_suite(suite: Suite) -> Vec<CheckOutcome> {
    let mut checks = small_checks();
    if suite == Suite::Full {
        checks.extend(full_checks());
    }
    checks
        .into_iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckOutcome {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn within(err: f64, tol: f64) -> (bool, String) {
    (err <= tol, format!("max error {err:.3e} (tolerance {tol:.0e})"))
}

fn transfer_matrices() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &(beta, b) in &[(0.3, 0.1), (1.2, -0.4), (0.05, 2.0), (2.0, 0.0)] {
        for n in 2..=10 {
            let cyc = exact::exact_quenched_z(&Multigraph::cycle(n), beta, b)?.ln();
            let line = exact::exact_quenched_z(&Multigraph::path(n), beta, b)?.ln();
            worst = worst
                .max(((exact::transfer_matrix_cycle_z(n, beta, b)?.ln() - cyc).exp() - 1.0).abs())
                .max(((exact::transfer_matrix_line_z(n, beta, b)?.ln() - line).exp() - 1.0).abs());
        }
    }
    Ok(within(worst, 1e-12))
}

fn grg_product_formula() -> Result<(bool, String)> {
    let w = WeightSequence::new(vec![0.5, 1.0, 1.5, 2.5])?;
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
    let probs: Vec<f64> = pairs.iter().map(|&(i, j)| grg_edge_prob(&w, i, j)).collect::<Result<_>>()?;
    let (beta, b) = (0.7, 0.3);
    let mut avg = 0.0;
    for mask in 0u32..1 << pairs.len() {
        let mut prob = 1.0;
        let mut edges = Vec::new();
        for (k, &e) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                prob *= probs[k];
                edges.push(e);
            } else {
                prob *= 1.0 - probs[k];
            }
        }
        avg += prob * exact::exact_quenched_z(&Multigraph::new(4, edges)?, beta, b)?.to_f64();
    }
    let annealed = exact::exact_annealed_z_grg(&w, beta, b)?.to_f64();
    Ok(within((annealed / avg - 1.0).abs(), 1e-12))
}

fn cm2_finite_pressure() -> Result<(bool, String)> {
    let (beta, b) = (0.7, 0.2);
    let exact = exact::exact_annealed_z_cm(&DegreeSequence::two_regular(5)?, beta, b)?.ln() / 5.0;
    let err = (cm2::pressure_cm2_finite(5, beta, b)? - exact).abs();
    let limit = cm2::pressure_cm2(beta, b)?;
    let mut sandwich = true;
    for n in [10, 100, 1000] {
        let gap = (cm2::pressure_cm2_finite(n, beta, b)? - limit).abs();
        sandwich &= gap <= cm2::ln_two_to_k_expectation(n)? / n as f64 + 1e-14;
    }
    let (ok, detail) = within(err, 1e-10);
    Ok((ok && sandwich, format!("{detail}, sandwich bound {}", if sandwich { "holds" } else { "fails" })))
}

fn cm12_finite_pressure() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &(n1, n2) in &[(2, 1), (2, 3), (4, 2), (4, 3), (6, 1)] {
        let degrees = DegreeSequence::from_counts(n1, n2)?;
        for &(beta, b) in &[(0.5, 0.2), (1.1, -0.6)] {
            let exact = exact::exact_annealed_z_cm(&degrees, beta, b)?.ln() / (n1 + n2) as f64;
            worst = worst.max((cm12::pressure_cm12_finite_counts(n1, n2, beta, b)? - exact).abs());
        }
    }
    Ok(within(worst, 1e-10))
}

fn beta_zero() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let w = WeightSequence::constant(2.0, 50)?;
    for b in [0.0, 0.3, 1.0] {
        let (psi, m, chi) = (ln_two_cosh(b), f64::tanh(b), sech2(b));
        let model = grg::AnnealedGrgModel::new(w.clone(), 0.0, b)?;
        let values = [
            (grg::annealed_pressure(&model)?, psi),
            (grg::annealed_magnetization(&model)?, m),
            (grg::annealed_susceptibility(&model)?, chi),
            (cm2::pressure_cm2(0.0, b)?, psi),
            (cm2::magnetization_cm2(0.0, b)?, m),
            (cm2::susceptibility_cm2(0.0, b)?, chi),
            (cm12::pressure_cm12(0.0, b, 0.5)?, psi),
            (cm12::magnetization_cm12(0.0, b, 0.5)?, m),
            (cm12::sigma2_variance(0.0, b, 0.5)?, chi),
        ];
        for (got, want) in values {
            worst = worst.max((got - want).abs());
        }
    }
    Ok(within(worst, 1e-10))
}

fn mn_pmf_check() -> Result<(bool, String)> {
    let q = cm12::mn_pmf(2, 1)?;
    let exact = (q[0] - 2.0 / 3.0).abs().max((q[1] - 1.0 / 3.0).abs());
    let mut worst: f64 = 0.0;
    for n1 in (2..=400).step_by(38) {
        for n2 in (0..=400).step_by(40) {
            worst = worst.max((cm12::mn_pmf(n1, n2)?.iter().sum::<f64>() - 1.0).abs());
        }
    }
    Ok((
        exact <= 1e-15 && worst <= 1e-10,
        format!("mn_pmf(2,1) error {exact:.1e}, normalization error {worst:.1e}"),
    ))
}

fn annealed_onset() -> Result<(bool, String)> {
    let w = WeightSequence::constant(2.0, 10)?;
    let onset = grg::symmetry_breaking_onset(&w, 0.3, 0.7, 1e-6)?;
    let target = 0.5f64.asinh();
    let ordered = [1.5, 2.0, 5.0].iter().all(|&nu| {
        grg::critical_betas(nu).map(|c| c.annealed < c.quenched).unwrap_or(false)
    });
    let (ok, detail) = within((onset - target).abs(), 1e-3);
    Ok((ok && ordered, format!("onset {onset:.6}, {detail}")))
}

fn surface_concavity() -> Result<(bool, String)> {
    let mut worst_eig = f64::NEG_INFINITY;
    for &(p, a, r) in &[(0.5, 0.3, 0.4), (0.2, 1.5, 0.7), (0.8, 0.05, 0.1)] {
        let surface = cm12::Surface::new(p, a, r)?;
        let smax = surface.s_max();
        for i in 1..10 {
            for j in 1..10 {
                let s = smax * i as f64 / 10.0;
                let t = p * j as f64 / 10.0;
                let eig = cm12::symmetric_eigenvalues(surface.hessian(s, t)?);
                worst_eig = worst_eig.max(eig[0].max(eig[1]));
            }
        }
    }
    Ok((worst_eig < 0.0, format!("largest Hessian eigenvalue {worst_eig:.3e}")))
}

fn cm12_pressure_limit() -> Result<(bool, String)> {
    let (beta, b, p) = (0.5, 0.3, 0.5);
    let err = (cm12::pressure_cm12_finite(2000, beta, b, p)? - cm12::pressure_cm12(beta, b, p)?).abs();
    Ok(within(err, 5e-3))
}

fn tv_outcome(tv: f64) -> (bool, String) {
    (tv < 0.02, format!("total variation {tv:.4} (bound 0.02)"))
}

fn sampler_triangle() -> Result<(bool, String)> {
    let g = Multigraph::cycle(3);
    let cfg = ChainConfig::new(11, 200_000).recording_states();
    let batch = samplers::glauber_quenched(&g, 0.5, 0.2, &cfg)?;
    Ok(tv_outcome(samplers::total_variation(
        &batch.empirical_law(),
        &exact::quenched_gibbs_law(&g, 0.5, 0.2)?,
    )))
}

fn sampler_grg() -> Result<(bool, String)> {
    let w = WeightSequence::constant(1.0, 10)?;
    let cfg = ChainConfig::new(12, 400_000).recording_states();
    let batch = samplers::glauber_annealed_grg(&w, 0.5, 0.2, &cfg)?;
    Ok(tv_outcome(samplers::total_variation(
        &batch.empirical_law(),
        &exact::annealed_grg_law(&w, 0.5, 0.2)?,
    )))
}

fn sampler_cm() -> Result<(bool, String)> {
    let d = DegreeSequence::new(vec![1, 1, 2])?;
    let cfg = ChainConfig::new(13, 200_000).recording_states();
    let batch = samplers::joint_mcmc_cm(&d, 0.5, 0.2, &cfg)?;
    Ok(tv_outcome(samplers::total_variation(
        &batch.empirical_law(),
        &exact::annealed_cm_law(&d, 0.5, 0.2)?,
    )))
}
