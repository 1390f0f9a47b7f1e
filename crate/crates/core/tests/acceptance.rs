//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Exact targets are recomputed here by brute force (spin sums, pairing and
//! composition enumeration) rather than taken from the library oracles.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use annealed_ising::graph_models::{sample_cm, DegreeSequence, Multigraph, WeightSequence};
use annealed_ising::samplers::{self, ChainConfig};
use annealed_ising::stats::{self, SllnModel};
use annealed_ising::{cm12, cm2, exact, grg, rng};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn spin(mask: u32, i: usize) -> f64 {
    if mask >> i & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_σ exp(β Σ_edges σ_u σ_v + B Σ σ)`.
fn brute_z(n: usize, edges: &[(usize, usize)], beta: f64, b: f64) -> f64 {
    (0..1u32 << n)
        .map(|mask| {
            let e: f64 = edges.iter().map(|&(u, v)| spin(mask, u) * spin(mask, v)).sum();
            let m: f64 = (0..n).map(|i| spin(mask, i)).sum();
            (beta * e + b * m).exp()
        })
        .sum()
}

fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n - 1).map(|i| (i, i + 1)).collect()
}

/// All perfect matchings of `total` half-edges as mate arrays.
fn all_pairings(total: usize) -> Vec<Vec<usize>> {
    fn rec(mate: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some(first) = mate.iter().position(|&m| m == usize::MAX) else {
            out.push(mate.clone());
            return;
        };
        for other in first + 1..mate.len() {
            if mate[other] == usize::MAX {
                mate[first] = other;
                mate[other] = first;
                rec(mate, out);
                mate[first] = usize::MAX;
                mate[other] = usize::MAX;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; total], &mut out);
    out
}

fn stub_owners(degrees: &[usize]) -> Vec<usize> {
    degrees.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v, d)).collect()
}

fn pairing_edges(owner: &[usize], mate: &[usize]) -> Vec<(usize, usize)> {
    (0..mate.len()).filter(|&h| h < mate[h]).map(|h| (owner[h], owner[mate[h]])).collect()
}

/// Vertices on cycles of a graph with degrees in {1,2}: components without a degree-1 vertex.
fn torus_vertices(n: usize, degrees: &[usize], edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let mut has_leaf = vec![false; n];
    for v in 0..n {
        if degrees[v] == 1 {
            let r = find(&mut parent, v);
            has_leaf[r] = true;
        }
    }
    (0..n).filter(|&v| !has_leaf[find(&mut parent, v)]).count()
}

/// Annealed spin law of a configuration model by pairing enumeration.
fn brute_cm_law(degrees: &[usize], beta: f64, b: f64) -> Vec<f64> {
    let n = degrees.len();
    let owner = stub_owners(degrees);
    let mut law = vec![0.0; 1 << n];
    for mate in all_pairings(owner.len()) {
        let edges = pairing_edges(&owner, &mate);
        for (mask, slot) in law.iter_mut().enumerate() {
            let e: f64 = edges.iter().map(|&(u, v)| spin(mask as u32, u) * spin(mask as u32, v)).sum();
            let m: f64 = (0..n).map(|i| spin(mask as u32, i)).sum();
            *slot += (beta * e + b * m).exp();
        }
    }
    let z: f64 = law.iter().sum();
    law.iter().map(|x| x / z).collect()
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

fn ln_lambda_plus(beta: f64, b: f64) -> f64 {
    beta + (b.cosh() + (b.sinh().powi(2) + (-4.0 * beta).exp()).sqrt()).ln()
}

// 1
fn transfer_matrices() -> Outcome {
    let mut g = rng::from_seed(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let beta = g.random_range(0.0..2.0);
        let b = g.random_range(-1.5..1.5);
        for n in 2..=10 {
            let cyc = brute_z(n, &cycle_edges(n), beta, b);
            let line = brute_z(n, &path_edges(n), beta, b);
            let tc = exact::transfer_matrix_cycle_z(n, beta, b).unwrap().to_f64();
            let tl = exact::transfer_matrix_line_z(n, beta, b).unwrap().to_f64();
            worst = worst.max((tc / cyc - 1.0).abs()).max((tl / line - 1.0).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max relative error {worst:.2e} (tolerance 1e-12)"))
}

// 2
fn grg_product_formula() -> Outcome {
    let mut worst: f64 = 0.0;
    for (w, beta, b) in [
        (vec![1.0, 1.0, 1.0, 1.0], 0.4, 0.3),
        (vec![0.5, 1.0, 1.5, 2.5], 0.7, -0.2),
        (vec![3.0, 0.2, 1.0, 4.0], 1.3, 0.9),
    ] {
        let total: f64 = w.iter().sum();
        let pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
        let mut avg = 0.0;
        for mask in 0u32..1 << pairs.len() {
            let mut prob = 1.0;
            let mut edges = Vec::new();
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let p = w[i] * w[j] / (total + w[i] * w[j]);
                if mask >> k & 1 == 1 {
                    prob *= p;
                    edges.push((i, j));
                } else {
                    prob *= 1.0 - p;
                }
            }
            avg += prob * brute_z(4, &edges, beta, b);
        }
        let seq = WeightSequence::new(w).unwrap();
        let annealed = exact::exact_annealed_z_grg(&seq, beta, b).unwrap().to_f64();
        worst = worst.max((annealed / avg - 1.0).abs());
    }
    outcome(worst <= 1e-12, format!("max relative error {worst:.2e} over 3 weight sets (tolerance 1e-12)"))
}

// 3
fn cm2_finite_pressure() -> Outcome {
    let (beta, b) = (0.7, 0.2);
    let degrees = [2usize; 5];
    let owner = stub_owners(&degrees);
    let pairings = all_pairings(10);
    let avg: f64 = pairings
        .iter()
        .map(|mate| brute_z(5, &pairing_edges(&owner, mate), beta, b))
        .sum::<f64>()
        / pairings.len() as f64;
    let err = (cm2::pressure_cm2_finite(5, beta, b).unwrap() - avg.ln() / 5.0).abs();
    let limit = ln_lambda_plus(beta, b);
    let mut sandwich = Vec::new();
    for n in [10usize, 100, 1000] {
        let gap = (cm2::pressure_cm2_finite(n, beta, b).unwrap() - limit).abs();
        // E[2^K] with independent closing events of probability 1/(2m-1)
        let bound: f64 = (1..=n).map(|m| (1.0 + 1.0 / (2 * m - 1) as f64).ln()).sum::<f64>() / n as f64;
        sandwich.push((n, gap, bound));
    }
    let ok = err <= 1e-10 && sandwich.iter().all(|&(_, g, bd)| g <= bd);
    let detail = sandwich
        .iter()
        .map(|(n, g, bd)| format!("N={n}: {g:.2e}<={bd:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(ok, format!("{} pairings, error {err:.2e} (tolerance 1e-10); {detail}", pairings.len()))
}

// 4
fn annealed_onset() -> Outcome {
    let w = WeightSequence::constant(2.0, 100).unwrap();
    let onset = grg::symmetry_breaking_onset(&w, 0.2, 0.8, 1e-7).unwrap();
    let target = 0.5f64.asinh();
    let paper_value_ok = (target - 0.481212).abs() < 5e-7;
    let ordered: Vec<bool> = [1.5f64, 2.0, 5.0]
        .iter()
        .map(|&nu| {
            let c = grg::critical_betas(nu).unwrap();
            (c.annealed - (1.0 / nu).asinh()).abs() < 1e-15
                && (c.quenched - (1.0 / nu).atanh()).abs() < 1e-15
                && c.annealed < c.quenched
        })
        .collect();
    let err = (onset - target).abs();
    outcome(
        err <= 1e-3 && paper_value_ok && ordered.iter().all(|&x| x),
        format!("onset {onset:.6} vs asinh(0.5) = {target:.6}, error {err:.2e} (tolerance 1e-3); asinh < atanh at nu = 1.5, 2, 5: {ordered:?}"),
    )
}

// 5
fn beta_zero() -> Outcome {
    let mut worst: f64 = 0.0;
    let weights = [
        WeightSequence::constant(2.0, 200).unwrap(),
        WeightSequence::power_law(3.5, 1.0, 200).unwrap(),
    ];
    for b in [0.0f64, 0.3, 1.0] {
        let psi = (2.0 * b.cosh()).ln();
        let m = b.tanh();
        let chi = 1.0 / b.cosh().powi(2);
        let mut got = vec![
            (cm2::pressure_cm2(0.0, b).unwrap(), psi),
            (cm2::magnetization_cm2(0.0, b).unwrap(), m),
            (cm2::susceptibility_cm2(0.0, b).unwrap(), chi),
            (cm12::pressure_cm12(0.0, b, 0.5).unwrap(), psi),
            (cm12::magnetization_cm12(0.0, b, 0.5).unwrap(), m),
            (cm12::sigma2_variance(0.0, b, 0.5).unwrap(), chi),
        ];
        for w in &weights {
            let model = grg::AnnealedGrgModel::new(w.clone(), 0.0, b).unwrap();
            got.push((grg::annealed_pressure(&model).unwrap(), psi));
            got.push((grg::annealed_magnetization(&model).unwrap(), m));
            got.push((grg::annealed_susceptibility(&model).unwrap(), chi));
        }
        for (x, y) in got {
            worst = worst.max((x - y).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max error {worst:.2e} over 3 models x B in {{0, 0.3, 1}} (tolerance 1e-10)"))
}

// 6
fn mn_law() -> Outcome {
    // n1=2, n2=1: vertices 0,1 have degree 1, vertex 2 degree 2
    let small_deg = [1usize, 1, 2];
    let owner = stub_owners(&small_deg);
    let pairings = all_pairings(owner.len());
    let mut enumerated = [0.0f64; 2];
    for mate in &pairings {
        enumerated[torus_vertices(3, &small_deg, &pairing_edges(&owner, mate))] += 1.0;
    }
    let enumerated: Vec<f64> = enumerated.iter().map(|c| c / pairings.len() as f64).collect();
    let q = cm12::mn_pmf(2, 1).unwrap();
    let exact_match = q == vec![2.0 / 3.0, 1.0 / 3.0] && enumerated == vec![2.0 / 3.0, 1.0 / 3.0];

    let mut norm_err: f64 = 0.0;
    for n1 in (2..=400).step_by(2) {
        for n2 in 0..=400 {
            norm_err = norm_err.max((cm12::mn_pmf(n1, n2).unwrap().iter().sum::<f64>() - 1.0).abs());
        }
    }

    // (n1, n2) = (4, 3): enumeration law and 1e5 simulated pairings
    let deg: Vec<usize> = vec![1, 1, 1, 1, 2, 2, 2];
    let owner = stub_owners(&deg);
    let all = all_pairings(owner.len());
    let mut law = [0.0f64; 4];
    for mate in &all {
        law[torus_vertices(7, &deg, &pairing_edges(&owner, mate))] += 1.0 / all.len() as f64;
    }
    let pmf_gap = cm12::mn_pmf(4, 3)
        .unwrap()
        .iter()
        .zip(&law)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let seq = DegreeSequence::from_counts(4, 3).unwrap();
    let mut g = rng::from_seed(606);
    let draws = 100_000;
    let mut counts = [0usize; 4];
    for _ in 0..draws {
        counts[sample_cm(&seq, &mut g).unwrap().m_n()] += 1;
    }
    let support: Vec<usize> = (0..4).filter(|&m| law[m] > 0.0).collect();
    let chi2: f64 = support
        .iter()
        .map(|&m| {
            let e = law[m] * draws as f64;
            (counts[m] as f64 - e).powi(2) / e
        })
        .sum();
    let df = (support.len() - 1) as f64;
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(0.99);
    outcome(
        exact_match && norm_err <= 1e-10 && pmf_gap <= 1e-12 && chi2 <= critical,
        format!(
            "mn_pmf(2,1) = {q:?} (3-pairing enumeration {enumerated:?}); normalization error {norm_err:.1e} (tolerance 1e-10); \
             chi-square {chi2:.2} vs critical {critical:.2} (df {df}, 1e5 pairings)"
        ),
    )
}

fn compositions(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() + 1 == parts {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in 0..=total {
        cur.push(first);
        compositions(total - first, parts, cur, out);
        cur.pop();
    }
}

// 7
fn lines_gf() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for lines in 1..=4usize {
        for n2 in 0..=8usize {
            for m in 0..=n2 {
                let mut all = Vec::new();
                compositions(n2 - m, lines, &mut Vec::new(), &mut all);
                for a in [0.1, 0.5] {
                    for r in [0.2f64, 0.8] {
                        let brute: f64 = all
                            .iter()
                            .map(|c| c.iter().map(|&i| 1.0 + a * r.powi(i as i32 + 2)).product::<f64>())
                            .sum::<f64>()
                            / all.len() as f64;
                        let gf = cm12::lines_gf(2 * lines, n2, m, a, r).unwrap().to_f64();
                        worst = worst.max((gf / brute - 1.0).abs());
                        cases += 1;
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("{cases} cases, max relative error {worst:.2e} (tolerance 1e-10)"))
}

/// Rate surface written out term by term.
fn surface_h(s: f64, t: f64, p: f64, a: f64, r: f64) -> f64 {
    let xl = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    let c = (1.0 - p) / 2.0;
    let d = (1.0 + p) / 2.0;
    (1.0 - p) * c.ln() - 2.0 * xl(s) - 2.0 * xl(c - s) + s * (a * r * r).ln() + t * r.ln() + xl(s + t) - xl(t)
        + xl(d - s - t)
        - xl(p - t)
        - xl(d)
        + xl(p)
}

// 8
fn laplace() -> Outcome {
    let (p, a, r) = (0.5, 0.3, 0.4);
    let sol = cm12::solve_saddle(p, a, r, 1e-13).unwrap();
    // maximum of the surface by a fine grid as an independent check on H*
    let grid = 800;
    let mut h_grid = f64::NEG_INFINITY;
    for i in 0..=grid {
        for j in 0..=grid {
            let s = (1.0 - p) / 2.0 * i as f64 / grid as f64 * 0.05;
            let t = p * j as f64 / grid as f64 * 0.05;
            h_grid = h_grid.max(surface_h(s, t, p, a, r));
        }
    }
    let mut gaps = Vec::new();
    for n in [200usize, 400, 800, 1600] {
        let params = cm12::Cm12Params::new(p, n).unwrap();
        let gf = cm12::lines_gf(params.n1, params.n2, 0, a, r).unwrap();
        gaps.push((gf.ln() / params.order() as f64 - sol.h_star).abs());
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = gaps[3];
    outcome(
        decreasing && last <= 0.01 && (h_grid - sol.h_star).abs() < 1e-6,
        format!(
            "H* = {:.7} (grid {:.7}); gaps {:?}; decreasing {decreasing}; gap at N=1600 {last:.2e} (tolerance 1e-2)",
            sol.h_star,
            h_grid,
            gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>()
        ),
    )
}

// 9
fn concavity() -> Outcome {
    let mut g = rng::from_seed(909);
    let mut max_eig = f64::NEG_INFINITY;
    let mut grad_err: f64 = 0.0;
    let h = 1e-6;
    for _ in 0..5 {
        let p = g.random_range(0.1..0.9);
        let a = g.random_range(0.05..2.0);
        let r = g.random_range(0.1..0.9);
        let sf = cm12::Surface::new(p, a, r).unwrap();
        for _ in 0..100 {
            let s = sf.s_max() * g.random_range(0.02..0.98);
            let t = p * g.random_range(0.02..0.98);
            let eig = cm12::symmetric_eigenvalues(sf.hessian(s, t).unwrap());
            max_eig = max_eig.max(eig[0]).max(eig[1]);
            let grad = sf.grad(s, t).unwrap();
            let fs = (surface_h(s + h, t, p, a, r) - surface_h(s - h, t, p, a, r)) / (2.0 * h);
            let ft = (surface_h(s, t + h, p, a, r) - surface_h(s, t - h, p, a, r)) / (2.0 * h);
            grad_err = grad_err.max((grad[0] - fs).abs()).max((grad[1] - ft).abs());
        }
    }
    outcome(
        max_eig < 0.0 && grad_err <= 1e-6,
        format!("500 points: largest eigenvalue {max_eig:.3e}; gradient vs FD max error {grad_err:.2e} (tolerance 1e-6)"),
    )
}

// 10
fn cm12_pressure() -> Outcome {
    let (beta, b, p) = (0.5, 0.3, 0.5);
    let finite = cm12::pressure_cm12_finite(2000, beta, b, p).unwrap();
    let limit = cm12::pressure_cm12(beta, b, p).unwrap();
    let err = (finite - limit).abs();
    outcome(err <= 5e-3, format!("finite {finite:.6}, limit {limit:.6}, gap {err:.2e} (tolerance 5e-3)"))
}

fn variance_check(label: &str, batch: &samplers::SampleBatch, predicted: f64) -> (bool, String) {
    match stats::estimate_moments(batch) {
        Ok(est) => {
            let z = (est.variance - predicted).abs() / est.variance_se;
            let ok = z <= 3.0 && est.ess >= 500.0;
            (
                ok,
                format!(
                    "{label}: MC {:.4} +- {:.4} vs {predicted:.4} ({z:.2} SE, ESS {:.0})",
                    est.variance, est.variance_se, est.ess
                ),
            )
        }
        Err(e) => (false, format!("{label}: {e}")),
    }
}

// 11
fn mc_variances() -> Outcome {
    let w = WeightSequence::power_law(5.0, 1.0, 2000).unwrap();
    let model = grg::AnnealedGrgModel::new(w.clone(), 0.3, 0.1).unwrap();
    let chi_grg = grg::annealed_susceptibility(&model).unwrap();
    let cfg = ChainConfig::new(1111, 100_000);
    let grg_batch = samplers::glauber_annealed_grg(&w, 0.3, 0.1, &cfg).unwrap();
    let r1 = variance_check("GRG tau=5 N=2000", &grg_batch, chi_grg);

    let chi_cm2 = cm2::susceptibility_cm2(0.5, 0.3).unwrap();
    let cfg = ChainConfig::new(2222, 100_000);
    let cm2_batch = samplers::joint_mcmc_cm(&DegreeSequence::two_regular(1000).unwrap(), 0.5, 0.3, &cfg).unwrap();
    let r2 = variance_check("CM(2) N=1000", &cm2_batch, chi_cm2);

    let s2 = cm12::sigma2_variance(0.4, 0.2, 0.5).unwrap();
    let cfg = ChainConfig::new(3333, 100_000);
    let cm12_batch = samplers::joint_mcmc_cm(&DegreeSequence::cm12(0.5, 1000).unwrap(), 0.4, 0.2, &cfg).unwrap();
    let r3 = variance_check("CM(1,2) N=1000", &cm12_batch, s2);

    outcome(r1.0 && r2.0 && r3.0, format!("{}; {}; {}", r1.1, r2.1, r3.1))
}

// 12
fn sampler_laws() -> Outcome {
    let seeds = [12u64, 13, 14];
    let samples = 1_000_000;
    let (beta, b) = (0.5, 0.2);

    let tri = cycle_edges(3);
    let z = brute_z(3, &tri, beta, b);
    let tri_law: Vec<f64> = (0..8u32)
        .map(|mask| {
            let e: f64 = tri.iter().map(|&(u, v)| spin(mask, u) * spin(mask, v)).sum();
            let m: f64 = (0..3).map(|i| spin(mask, i)).sum();
            (beta * e + b * m).exp() / z
        })
        .collect();

    let n = 10;
    let weights = WeightSequence::constant(1.0, n).unwrap();
    let p = 1.0 / (n as f64 + 1.0);
    let mut grg_law: Vec<f64> = (0..1u32 << n)
        .map(|mask| {
            let mut ln = b * (0..n).map(|i| spin(mask, i)).sum::<f64>();
            for i in 0..n {
                for j in i + 1..n {
                    ln += (1.0 - p + p * (beta * spin(mask, i) * spin(mask, j)).exp()).ln();
                }
            }
            ln.exp()
        })
        .collect();
    let zg: f64 = grg_law.iter().sum();
    grg_law.iter_mut().for_each(|x| *x /= zg);

    let cm_deg = [1usize, 1, 2];
    let cm_law = brute_cm_law(&cm_deg, beta, b);
    let cm_seq = DegreeSequence::new(cm_deg.to_vec()).unwrap();

    let mut worst = [0.0f64; 3];
    for &seed in &seeds {
        let cfg = ChainConfig::new(seed, samples).recording_states();
        let t = samplers::glauber_quenched(&Multigraph::new(3, tri.clone()).unwrap(), beta, b, &cfg).unwrap();
        worst[0] = worst[0].max(tv(&t.empirical_law(), &tri_law));
        let g = samplers::glauber_annealed_grg(&weights, beta, b, &cfg).unwrap();
        worst[1] = worst[1].max(tv(&g.empirical_law(), &grg_law));
        let c = samplers::joint_mcmc_cm(&cm_seq, beta, b, &cfg).unwrap();
        worst[2] = worst[2].max(tv(&c.empirical_law(), &cm_law));
    }
    outcome(
        worst.iter().all(|&x| x < 0.02),
        format!(
            "max TV over 3 seeds x 1e6 sweeps: triangle {:.4}, GRG N=10 {:.4}, CM [1,1,2] {:.4} (bound 0.02)",
            worst[0], worst[1], worst[2]
        ),
    )
}

// 13
fn slln() -> Outcome {
    let cfg = ChainConfig::new(1313, 20_000);
    let rows = stats::slln_scan(&SllnModel::GrgConstant { w: 2.0 }, 0.3, 0.1, 0.1, &[100, 200, 400], &cfg).unwrap();
    let freqs: Vec<f64> = rows.iter().map(|r| r.frequency).collect();
    let ok = freqs.windows(2).all(|w| w[1] <= w[0]);
    outcome(ok, format!("deviation frequencies at N = 100, 200, 400: {freqs:?}"))
}

fn main() {
    type Criterion = (&'static str, f64, fn() -> Outcome);
    let criteria: [Criterion; 13] = [
        ("transfer matrices vs enumeration", 5.0, transfer_matrices),
        ("GRG product formula at N=4", 1.0, grg_product_formula),
        ("CM(2) finite pressure and sandwich bound", 10.0, cm2_finite_pressure),
        ("annealed critical temperature", 30.0, annealed_onset),
        ("beta=0 identities", 1.0, beta_zero),
        ("CM(1,2) pairing law", 60.0, mn_law),
        ("lines generating function", 60.0, lines_gf),
        ("Laplace asymptotics", 120.0, laplace),
        ("concavity of H", 5.0, concavity),
        ("CM(1,2) pressure convergence", 120.0, cm12_pressure),
        ("CLT variances by MC", 900.0, mc_variances),
        ("sampler correctness", 300.0, sampler_laws),
        ("SLLN concentration", 300.0, slln),
    ];
    let mut failures = 0;
    for (k, (title, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let passed = result.passed && secs < *limit;
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} | {} | {secs:.2} s (limit {limit} s)",
            k + 1,
            if passed { "PASS" } else { "FAIL" },
            title,
            result.detail
        );
    }
    println!("acceptance: {} of 13 criteria passed", 13 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
