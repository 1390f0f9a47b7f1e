//! Annealed Ising model on the generalized random graph.
//!
//! Averaging over the independent edges turns the model into an
//! inhomogeneous Curie–Weiss model on the complete graph with couplings
//! `β_ij`. Its pressure is a one-dimensional variational problem in `z`.

use crate::error::{invalid, Error, Result};
use crate::graph_models::{pair_probability, WeightSequence};
use crate::numeric::{ln_cosh, richardson_first_derivative, sech2};

/// `(β_ij, ln C_ij)` for an edge present with probability `p`:
/// `e^{βσσ'} p + 1 - p = C e^{β_ij σσ'}`.
#[inline]
pub fn pair_coupling(p: f64, beta: f64) -> (f64, f64) {
    let up = (p * beta.exp_m1()).ln_1p();
    let down = (p * (-beta).exp_m1()).ln_1p();
    (0.5 * (up - down), 0.5 * (up + down))
}

/// Dense effective couplings of the annealed GRG.
#[derive(Debug, Clone)]
pub struct EffectiveCouplings {
    n: usize,
    beta: f64,
    /// Row-major `N x N`; the diagonal holds `β_ii` built from `p_ii = w_i²/(ℓ_N + w_i²)`.
    matrix: Vec<f64>,
    ln_g2: f64,
}

impl EffectiveCouplings {
    pub fn new(weights: &WeightSequence, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let n = weights.len();
        let mut matrix = vec![0.0; n * n];
        let mut ln_g2 = 0.0;
        for i in 0..n {
            for j in i..n {
                let (bij, ln_c) = pair_coupling(pair_probability(weights, i, j), beta);
                matrix[i * n + j] = bij;
                matrix[j * n + i] = bij;
                if i == j {
                    ln_g2 -= 0.5 * bij;
                } else {
                    ln_g2 += ln_c;
                }
            }
        }
        Ok(EffectiveCouplings { n, beta, matrix, ln_g2 })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.n..(i + 1) * self.n]
    }

    /// `e^{-β_ii/2}`
    pub fn diagonal_correction(&self, i: usize) -> f64 {
        (-0.5 * self.coupling(i, i)).exp()
    }

    /// `ln G2(β) = Σ_{i<j} ln C_ij - Σ_i β_ii/2`.
    pub fn ln_g2(&self) -> f64 {
        self.ln_g2
    }
}

pub fn effective_couplings(weights: &WeightSequence, beta: f64) -> Result<EffectiveCouplings> {
    EffectiveCouplings::new(weights, beta)
}

/// `ln G2(β)` without storing the coupling matrix.
pub fn ln_g2(weights: &WeightSequence, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let n = weights.len();
    let mut total = 0.0;
    for i in 0..n {
        total -= 0.5 * pair_coupling(pair_probability(weights, i, i), beta).0;
        for j in (i + 1)..n {
            total += pair_coupling(pair_probability(weights, i, j), beta).1;
        }
    }
    Ok(total)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta = {beta} must be finite and non-negative")));
    }
    Ok(())
}

/// Annealed GRG at one `(β, B)` over an empirical weight sequence.
#[derive(Debug, Clone)]
pub struct AnnealedGrgModel {
    weights: WeightSequence,
    beta: f64,
    b: f64,
    kappa: f64,
    ln_g2: f64,
}

impl AnnealedGrgModel {
    pub fn new(weights: WeightSequence, beta: f64, b: f64) -> Result<Self> {
        check_beta(beta)?;
        if !b.is_finite() {
            return Err(invalid(format!("B = {b} must be finite")));
        }
        let ln_g2 = ln_g2(&weights, beta)?;
        let kappa = (beta.sinh() / weights.mean()).sqrt();
        Ok(AnnealedGrgModel {
            weights,
            beta,
            b,
            kappa,
            ln_g2,
        })
    }

    /// Same weights and `β`, new field; `ln G2` is reused.
    pub fn with_field(&self, b: f64) -> Self {
        AnnealedGrgModel { b, ..self.clone() }
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn field(&self) -> f64 {
        self.b
    }

    /// `sqrt(sinh β / E[W])`
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn nu(&self) -> f64 {
        self.weights.nu()
    }

    /// Finite-`N` value `(1/N) ln G2(β)`.
    pub fn alpha(&self) -> f64 {
        self.ln_g2 / self.weights.len() as f64
    }

    fn mean_over_weights<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let w = self.weights.weights();
        w.iter().map(|&x| f(x)).sum::<f64>() / w.len() as f64
    }

    /// `F(z) = E[ln cosh(κ W z + B)]`
    pub fn f(&self, z: f64) -> f64 {
        self.mean_over_weights(|w| ln_cosh(self.kappa * w * z + self.b))
    }

    /// `H_B(z) = E[tanh(κ W z + B) κ W]`
    pub fn h_map(&self, z: f64) -> f64 {
        self.mean_over_weights(|w| (self.kappa * w * z + self.b).tanh() * self.kappa * w)
    }
}

/// `F(z) - z²/2`
pub fn cw_objective(model: &AnnealedGrgModel, z: f64) -> f64 {
    model.f(z) - 0.5 * z * z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    SymmetricZero,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointResult {
    pub z_star: f64,
    pub iterations: usize,
    pub residual: f64,
    pub branch: Branch,
}

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 100_000;
const DAMPING: f64 = 0.5;
/// Probe for the symmetric-breaking test `H(z) > z` at `B = 0`.
const ONSET_PROBE: f64 = 1e-6;

/// Solves `z = H_B(z)`. For `B > 0` the positive root is returned, for
/// `B < 0` its mirror, and for `B = 0` the `B → 0+` branch.
pub fn solve_fixed_point(model: &AnnealedGrgModel, tol: f64, max_iter: usize) -> Result<FixedPointResult> {
    if model.b < 0.0 {
        let mirrored = model.with_field(-model.b);
        let res = solve_fixed_point(&mirrored, tol, max_iter)?;
        return Ok(FixedPointResult {
            z_star: -res.z_star,
            branch: if res.branch == Branch::Positive { Branch::Negative } else { res.branch },
            ..res
        });
    }
    let symmetric = FixedPointResult {
        z_star: 0.0,
        iterations: 0,
        residual: 0.0,
        branch: Branch::SymmetricZero,
    };
    if model.kappa == 0.0 {
        return Ok(symmetric);
    }
    let upper = model.kappa * model.weights.max_weight();
    let g = |z: f64| z - model.h_map(z);
    if model.b == 0.0 && model.h_map(ONSET_PROBE) <= ONSET_PROBE {
        return Ok(symmetric);
    }

    // Damped iteration from the top of the bracket decreases to the largest root.
    let mut z = upper;
    let mut iterations = 0;
    while iterations < max_iter {
        let next = (1.0 - DAMPING) * z + DAMPING * model.h_map(z);
        iterations += 1;
        let done = (next - z).abs() <= tol;
        z = next;
        if done && g(z).abs() <= tol {
            return Ok(FixedPointResult {
                z_star: z,
                iterations,
                residual: g(z).abs(),
                branch: Branch::Positive,
            });
        }
        if iterations >= 2_000 {
            break;
        }
    }

    // Bisection fallback on g(z) = z - H(z).
    let mut hi = upper;
    let mut lo = if model.b == 0.0 {
        let mut lo = ONSET_PROBE;
        while g(lo) >= 0.0 && lo > f64::MIN_POSITIVE {
            lo *= 0.5;
        }
        lo
    } else {
        0.0
    };
    if !(g(lo) < 0.0 && g(hi) >= 0.0) {
        return Err(Error::NoConvergence {
            operation: "solve_fixed_point bracket",
            iterations,
            residual: g(z).abs(),
        });
    }
    while iterations < max_iter {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let r = g(mid).abs();
        if r <= tol || hi - lo <= f64::EPSILON * hi {
            return Ok(FixedPointResult {
                z_star: mid,
                iterations,
                residual: r,
                branch: Branch::Positive,
            });
        }
    }
    Err(Error::NoConvergence {
        operation: "solve_fixed_point",
        iterations,
        residual: g(0.5 * (lo + hi)).abs(),
    })
}

/// Thermodynamic quantities of the annealed GRG at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrgThermo {
    pub beta: f64,
    pub b: f64,
    pub n: usize,
    pub z_star: f64,
    pub alpha: f64,
    pub pressure: f64,
    pub magnetization: f64,
    pub susceptibility: f64,
    pub non_unique: bool,
    pub ill_conditioned: bool,
}

/// `ψ̃ = ln 2 + α + F(z*) - z*²/2` with `α = (1/N) ln G2(β)`.
pub fn annealed_pressure(model: &AnnealedGrgModel) -> Result<f64> {
    let fp = solve_fixed_point(model, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)?;
    Ok(std::f64::consts::LN_2 + model.alpha() + cw_objective(model, fp.z_star))
}

/// `M̃ = E[tanh(κ W z* + B)]`; at `B = 0` beyond the critical point this is
/// the `B → 0+` value.
pub fn annealed_magnetization(model: &AnnealedGrgModel) -> Result<f64> {
    let fp = solve_fixed_point(model, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)?;
    Ok(magnetization_at(model, fp.z_star))
}

fn magnetization_at(model: &AnnealedGrgModel, z: f64) -> f64 {
    model.mean_over_weights(|w| (model.kappa * w * z + model.b).tanh())
}

const FD_STEP: f64 = 1e-3;
const CRITICAL_WINDOW: f64 = 1e-3;

/// `χ̃ = ∂_B M̃` by a Richardson-refined central difference.
/// At `B = 0` in the non-uniqueness region the derivative of the `B → 0+`
/// branch is returned from the implicit-function formula.
pub fn annealed_susceptibility(model: &AnnealedGrgModel) -> Result<f64> {
    if model.b == 0.0 && !uniqueness_check(model.beta, 0.0, model.nu()) && model.beta > 0.0 {
        return susceptibility_implicit(model);
    }
    let failure = std::cell::RefCell::new(None);
    let value = richardson_first_derivative(
        |x| match annealed_magnetization(&model.with_field(x)) {
            Ok(m) => m,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        model.b,
        FD_STEP,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `χ = E[sech²u] + E[sech²u κW] dz/dB` with `u = κWz* + B` and
/// `dz/dB = E[sech²u κW] / (1 - E[sech²u κ²W²])`.
pub fn susceptibility_implicit(model: &AnnealedGrgModel) -> Result<f64> {
    let fp = solve_fixed_point(model, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)?;
    let k = model.kappa;
    let u = |w: f64| k * w * fp.z_star + model.b;
    let e0 = model.mean_over_weights(|w| sech2(u(w)));
    let e1 = model.mean_over_weights(|w| sech2(u(w)) * k * w);
    let e2 = model.mean_over_weights(|w| sech2(u(w)) * k * k * w * w);
    if !(e2 < 1.0) {
        return Err(Error::NoConvergence {
            operation: "susceptibility_implicit",
            iterations: fp.iterations,
            residual: 1.0 - e2,
        });
    }
    Ok(e0 + e1 * e1 / (1.0 - e2))
}

pub fn thermo_point(model: &AnnealedGrgModel) -> Result<GrgThermo> {
    let fp = solve_fixed_point(model, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)?;
    let nu = model.nu();
    let ill_conditioned = model.b == 0.0 && (model.beta.sinh() * nu - 1.0).abs() < CRITICAL_WINDOW;
    if ill_conditioned {
        log::warn!(
            "susceptibility at beta = {} is within {CRITICAL_WINDOW} of the critical point",
            model.beta
        );
    }
    Ok(GrgThermo {
        beta: model.beta,
        b: model.b,
        n: model.weights.len(),
        z_star: fp.z_star,
        alpha: model.alpha(),
        pressure: std::f64::consts::LN_2 + model.alpha() + cw_objective(model, fp.z_star),
        magnetization: magnetization_at(model, fp.z_star),
        susceptibility: annealed_susceptibility(model)?,
        non_unique: !uniqueness_check(model.beta, model.b, nu),
        ill_conditioned,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalBetas {
    pub annealed: f64,
    pub quenched: f64,
}

/// `asinh(1/ν)` and `atanh(1/ν)` (`+∞` when `ν <= 1`).
pub fn critical_betas(nu: f64) -> Result<CriticalBetas> {
    if !(nu > 0.0) {
        return Err(invalid(format!("nu = {nu} must be positive")));
    }
    let quenched = if nu <= 1.0 { f64::INFINITY } else { (1.0 / nu).atanh() };
    Ok(CriticalBetas {
        annealed: (1.0 / nu).asinh(),
        quenched,
    })
}

/// `B ≠ 0`, or `B = 0` below the annealed critical point.
pub fn uniqueness_check(beta: f64, b: f64, nu: f64) -> bool {
    if b != 0.0 {
        return beta >= 0.0;
    }
    beta >= 0.0 && beta < (1.0 / nu).asinh()
}

/// Bisection in `β` for the smallest value at which the `B = 0` solver
/// returns `z* ≠ 0`.
pub fn symmetry_breaking_onset(weights: &WeightSequence, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let broken = |beta: f64| -> Result<bool> {
        let model = AnnealedGrgModel::new(weights.clone(), beta, 0.0)?;
        Ok(solve_fixed_point(&model, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)?.z_star != 0.0)
    };
    if broken(lo)? || !broken(hi)? {
        return Err(invalid(format!("[{lo}, {hi}] does not bracket the onset")));
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if broken(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
