//! Annealed Ising model on the 2-regular configuration model `CM_N(2)`.
//!
//! Every component is a torus, so the partition function on a realization is
//! a product of periodic transfer-matrix traces `λ₊^L + λ₋^L`.

use crate::error::{invalid, Result};
use crate::graph_models::first_cycle_law_unchecked;

/// Transfer-matrix eigenvalues at one `(β, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cm2Thermo {
    pub beta: f64,
    pub b: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// `λ₋ / λ₊`
    pub r: f64,
}

impl Cm2Thermo {
    pub fn new(beta: f64, b: f64) -> Result<Self> {
        let (lambda_plus, lambda_minus) = lambda_pm(beta, b)?;
        Ok(Cm2Thermo {
            beta,
            b,
            lambda_plus,
            lambda_minus,
            r: lambda_minus / lambda_plus,
        })
    }

    pub fn ln_lambda_plus(&self) -> f64 {
        ln_lambda_plus(self.beta, self.b)
    }
}

fn check_params(beta: f64, b: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid(format!("beta = {beta} must be finite and non-negative")));
    }
    if !b.is_finite() {
        return Err(invalid(format!("B = {b} must be finite")));
    }
    Ok(())
}

/// `sqrt(sinh²B + e^{-4β})`
#[inline]
pub(crate) fn root_q(beta: f64, b: f64) -> f64 {
    b.sinh().hypot((-2.0 * beta).exp())
}

/// `λ± = e^β [cosh B ± sqrt(sinh²B + e^{-4β})]`, with `λ₋` in cancellation-free form.
pub fn lambda_pm(beta: f64, b: f64) -> Result<(f64, f64)> {
    check_params(beta, b)?;
    let q = root_q(beta, b);
    let e = beta.exp();
    let plus = e * (b.cosh() + q);
    let minus = e * -(-4.0 * beta).exp_m1() / (b.cosh() + q);
    Ok((plus, minus))
}

pub(crate) fn ln_lambda_plus(beta: f64, b: f64) -> f64 {
    beta + (b.cosh() + root_q(beta, b)).ln()
}

/// Limiting annealed pressure `ln λ₊`.
pub fn pressure_cm2(beta: f64, b: f64) -> Result<f64> {
    check_params(beta, b)?;
    Ok(ln_lambda_plus(beta, b))
}

pub fn magnetization_cm2(beta: f64, b: f64) -> Result<f64> {
    check_params(beta, b)?;
    Ok(b.sinh() / root_q(beta, b))
}

/// `cosh B e^{-4β} / (sinh²B + e^{-4β})^{3/2}`
pub fn susceptibility_cm2(beta: f64, b: f64) -> Result<f64> {
    check_params(beta, b)?;
    let q = root_q(beta, b);
    Ok(b.cosh() * (-4.0 * beta).exp() / (q * q * q))
}

/// Table `𝒵_0..=𝒵_N` of `E[Π_i (1 + α γ^{L_i})]` over the torus lengths of
/// `CM_n(2)`, from `𝒵_n = Σ_l q_n(l) (1 + α γ^l) 𝒵_{n-l}`.
pub fn torus_product_table(n: usize, alpha: f64, gamma: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(invalid(format!("gamma = {gamma} must lie in [0,1)")));
    }
    if !(alpha > -1.0) {
        return Err(invalid(format!("alpha = {alpha} must exceed -1")));
    }
    let mut powers = Vec::with_capacity(n + 1);
    let mut g = 1.0;
    for _ in 0..=n {
        powers.push(1.0 + alpha * g);
        g *= gamma;
    }
    let mut table = Vec::with_capacity(n + 1);
    table.push(1.0);
    for size in 1..=n {
        let q = first_cycle_law_unchecked(size);
        let value: f64 = q
            .iter()
            .enumerate()
            .map(|(idx, ql)| {
                let l = idx + 1;
                ql * powers[l] * table[size - l]
            })
            .sum();
        table.push(value);
    }
    Ok(table)
}

pub fn torus_product_recursion(n: usize, alpha: f64, gamma: f64) -> Result<f64> {
    Ok(torus_product_table(n, alpha, gamma)?[n])
}

/// `ψ̃_N = ln λ₊ + (1/N) ln 𝒵_N(1, r)`.
pub fn pressure_cm2_finite(n: usize, beta: f64, b: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let th = Cm2Thermo::new(beta, b)?;
    let z = torus_product_recursion(n, 1.0, th.r)?;
    Ok(th.ln_lambda_plus() + z.ln() / n as f64)
}

/// `E[2^{K_N}] = Π_{i=1}^N (1 + 1/(2N-2i+1))`.
pub fn two_to_k_expectation(n: usize) -> Result<f64> {
    Ok(ln_two_to_k_expectation(n)?.exp())
}

pub fn ln_two_to_k_expectation(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    Ok((1..=n)
        .map(|i| (1.0 / (2 * n - 2 * i + 1) as f64).ln_1p())
        .sum())
}
