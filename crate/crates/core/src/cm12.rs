//! Annealed Ising model on the configuration model with degrees in `{1,2}`.
//!
//! Components are lines (free boundary) and tori. The annealed partition
//! function splits into a torus factor, handled by the `CM(2)` recursion, and
//! a line factor whose generating function is a double sum of binomial
//! coefficients `B_{ℓ,k}`. Its exponential rate is the maximum of the concave
//! surface `H(s,t)`.

use rayon::prelude::*;

use crate::cm2::{ln_lambda_plus, root_q, torus_product_table};
use crate::error::{invalid, Error, Result};
use crate::graph_models::cm12_counts;
use crate::numeric::{richardson_first_derivative, richardson_second_derivative, LnFactorials, LogSumExp, LogValue};

/// Free-boundary transfer-matrix data: `Z_line(n) = A₊λ₊^n + A₋λ₋^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineIngredients {
    pub beta: f64,
    pub b: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    /// `λ₋ / λ₊`
    pub r: f64,
    /// `A₋ / A₊`
    pub a: f64,
}

impl LineIngredients {
    /// At `β = 0` the minus branch vanishes and `A₋`, `a` are set to 0.
    pub fn new(beta: f64, b: f64) -> Result<Self> {
        let (lambda_plus, lambda_minus) = crate::cm2::lambda_pm(beta, b)?;
        let q = root_q(beta, b);
        let e = beta.exp();
        // λ₊ - e^{β+B}
        let d = if b >= 0.0 {
            e * (-4.0 * beta).exp() / (q + b.sinh())
        } else {
            e * (q - b.sinh())
        };
        let em = (-beta).exp();
        let den = em * em + d * d;
        let half = (0.5 * b).exp();
        let a_plus = (em * half + d / half).powi(2) / (den * lambda_plus);
        let a_minus = if lambda_minus > 0.0 {
            (em / half - d * half).powi(2) / (den * lambda_minus)
        } else {
            log::debug!("beta = 0: lambda_- vanishes, A_- and a set to 0");
            0.0
        };
        Ok(LineIngredients {
            beta,
            b,
            lambda_plus,
            lambda_minus,
            a_plus,
            a_minus,
            r: lambda_minus / lambda_plus,
            a: a_minus / a_plus,
        })
    }

    /// `c_l = 1 + a r^l`
    pub fn c(&self, l: usize) -> f64 {
        1.0 + self.a * self.r.powi(l as i32)
    }

    /// `ln Z` of a line with `n` vertices.
    pub fn ln_line_z(&self, n: usize) -> f64 {
        self.a_plus.ln() + n as f64 * self.lambda_plus.ln() + (self.a * self.r.powi(n as i32)).ln_1p()
    }
}

/// Degree counts of `CM_N(1,2)` after the parity adjustment of `n1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cm12Params {
    pub p: f64,
    pub n1: usize,
    pub n2: usize,
}

impl Cm12Params {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        let (n1, n2) = cm12_counts(p, n)?;
        Ok(Cm12Params { p, n1, n2 })
    }

    /// Number of vertices, `n1 + n2`.
    pub fn order(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn total_degree(&self) -> usize {
        self.n1 + 2 * self.n2
    }
}

fn check_counts(n1: usize) -> Result<()> {
    if n1 < 2 || n1 % 2 == 1 {
        return Err(invalid(format!("n1 = {n1} must be even and at least 2")));
    }
    Ok(())
}

/// Law of `M_N`, the number of vertices on tori, over `m = 0..=n2`.
pub fn mn_pmf(n1: usize, n2: usize) -> Result<Vec<f64>> {
    check_counts(n1)?;
    let half = n1 / 2;
    // q(m+1)/q(m) = (2m+1)/(2m+2) · (n2-m)/(half+n2-m-1) <= 1
    let mut w = Vec::with_capacity(n2 + 1);
    let mut cur = 1.0;
    w.push(cur);
    for m in 0..n2 {
        cur *= (2 * m + 1) as f64 / (2 * m + 2) as f64 * (n2 - m) as f64 / (half + n2 - m - 1) as f64;
        w.push(cur);
    }
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// Limit of `M_N`: `Σ_l l·Poisson(λ_l)` with `λ_l = x^l / (2l)`, `x = 2p/(1+p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToriLaw {
    pub p: f64,
    pub x: f64,
}

pub fn tori_limit_law(p: f64) -> Result<ToriLaw> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p = {p} must lie in (0,1)")));
    }
    Ok(ToriLaw {
        p,
        x: 2.0 * p / (1.0 + p),
    })
}

impl ToriLaw {
    pub fn rate(&self, l: usize) -> f64 {
        self.x.powi(l as i32) / (2 * l) as f64
    }

    /// `(1+p)/(2p)`; the mgf is finite only below it.
    pub fn radius(&self) -> f64 {
        1.0 / self.x
    }

    /// `E[b^M] = sqrt((1-x)/(1-bx))`.
    pub fn mgf(&self, b: f64) -> Result<f64> {
        if !(b < self.radius()) {
            return Err(invalid(format!("mgf diverges at b = {b} >= {}", self.radius())));
        }
        Ok(((1.0 - self.x) / (1.0 - b * self.x)).sqrt())
    }

    /// `P(M = m) = sqrt(1-x) C(2m,m) 4^{-m} x^m`.
    pub fn pmf(&self, m: usize) -> f64 {
        let ln = 0.5 * (-self.x).ln_1p() + crate::numeric::ln_binomial(2 * m as i64, m as i64)
            - 2.0 * m as f64 * std::f64::consts::LN_2
            + m as f64 * self.x.ln();
        ln.exp()
    }

    pub fn pmf_table(&self, m_max: usize) -> Vec<f64> {
        (0..=m_max).map(|m| self.pmf(m)).collect()
    }

    /// Compound-Poisson (Panjer) recursion `m P(m) = Σ_l l λ_l P(m-l)`.
    pub fn panjer_table(&self, m_max: usize) -> Vec<f64> {
        let mut p = vec![(1.0 - self.x).sqrt()];
        for m in 1..=m_max {
            let s: f64 = (1..=m).map(|l| l as f64 * self.rate(l) * p[m - l]).sum();
            p.push(s / m as f64);
        }
        p
    }
}

#[inline]
fn ln_pow(ln_base: f64, exponent: usize) -> f64 {
    if exponent == 0 {
        0.0
    } else {
        exponent as f64 * ln_base
    }
}

/// Evaluates `B_{ℓ,k}` for fixed `n1/2` lines, `a` and `r`.
struct LinesKernel<'a> {
    lf: &'a LnFactorials,
    lines: usize,
    ln_abs_ar2: f64,
    negative_a: bool,
    ln_r: f64,
}

impl<'a> LinesKernel<'a> {
    fn new(lf: &'a LnFactorials, lines: usize, a: f64, r: f64) -> Self {
        LinesKernel {
            lf,
            lines,
            ln_abs_ar2: (a.abs() * r * r).ln(),
            negative_a: a < 0.0,
            ln_r: r.ln(),
        }
    }

    /// `(sign, ln|B_{ℓ,k}(n)|)` where `n` degree-2 vertices sit on lines.
    #[inline]
    fn term(&self, ell: usize, k: usize, n: usize) -> (i8, f64) {
        let lf = self.lf;
        let (l, ell_i, k_i, n_i) = (self.lines as i64, ell as i64, k as i64, n as i64);
        let ln = lf.ln_binomial(l, ell_i)
            + ln_pow(self.ln_abs_ar2, ell)
            + ln_pow(self.ln_r, k)
            + lf.ln_binomial(ell_i + k_i - 1, k_i)
            + lf.ln_binomial(l - ell_i + n_i - k_i - 1, n_i - k_i)
            - lf.ln_binomial(l + n_i - 1, n_i);
        let sign = if self.negative_a && ell % 2 == 1 { -1 } else { 1 };
        (sign, ln)
    }

    fn sum(&self, n: usize, ell_min: usize) -> LogValue {
        let mut pos = LogSumExp::new();
        let mut neg = LogSumExp::new();
        for ell in ell_min..=self.lines {
            for k in 0..=n {
                let (sign, ln) = self.term(ell, k, n);
                if sign > 0 {
                    pos.push(ln);
                } else {
                    neg.push(ln);
                }
            }
        }
        LogValue::from_ln(pos.value()).add(LogValue::from_signed_ln(-1, neg.value()))
    }
}

fn check_lines_args(n1: usize, n2: usize, m: usize, r: f64) -> Result<()> {
    check_counts(n1)?;
    if m > n2 {
        return Err(invalid(format!("m = {m} exceeds n2 = {n2}")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(invalid(format!("r = {r} must lie in [0,1)")));
    }
    Ok(())
}

/// `B_{ℓ,k}(n2 - m)` as a signed log value.
pub fn b_coeff(ell: usize, k: usize, n1: usize, n2: usize, m: usize, a: f64, r: f64) -> Result<LogValue> {
    check_lines_args(n1, n2, m, r)?;
    let n = n2 - m;
    if ell > n1 / 2 || k > n {
        return Err(invalid(format!("(l,k) = ({ell},{k}) outside 0..={} x 0..={n}", n1 / 2)));
    }
    let lf = LnFactorials::new(n1 / 2 + n2 + 2);
    let kernel = LinesKernel::new(&lf, n1 / 2, a, r);
    let (sign, ln) = kernel.term(ell, k, n);
    Ok(LogValue::from_signed_ln(sign, ln))
}

/// `E[Π_l c_l^{N_l} | M_N = m] = Σ_ℓ Σ_k B_{ℓ,k}(n2 - m)`.
pub fn lines_gf(n1: usize, n2: usize, m: usize, a: f64, r: f64) -> Result<LogValue> {
    check_lines_args(n1, n2, m, r)?;
    let lf = LnFactorials::new(n1 / 2 + n2 + 2);
    Ok(LinesKernel::new(&lf, n1 / 2, a, r).sum(n2 - m, 0))
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// The rate surface `H(s,t)` for fixed `(p, a, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub p: f64,
    pub a: f64,
    pub r: f64,
    ln_ar2: f64,
    ln_r: f64,
}

impl Surface {
    pub fn new(p: f64, a: f64, r: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("p = {p} must lie in (0,1)")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("a = {a} must be positive")));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid(format!("r = {r} must lie in (0,1)")));
        }
        Ok(Surface {
            p,
            a,
            r,
            ln_ar2: (a * r * r).ln(),
            ln_r: r.ln(),
        })
    }

    /// `(1-p)/2`, the upper end of the `s` range.
    pub fn s_max(&self) -> f64 {
        (1.0 - self.p) / 2.0
    }

    fn d(&self) -> f64 {
        (1.0 + self.p) / 2.0
    }

    pub fn in_closed_domain(&self, s: f64, t: f64) -> bool {
        (0.0..=self.s_max()).contains(&s) && (0.0..=self.p).contains(&t)
    }

    pub fn in_interior(&self, s: f64, t: f64) -> bool {
        s > 0.0 && s < self.s_max() && t > 0.0 && t < self.p
    }

    fn check_interior(&self, s: f64, t: f64) -> Result<()> {
        if self.in_interior(s, t) {
            Ok(())
        } else {
            Err(invalid(format!("(s,t) = ({s},{t}) is not interior")))
        }
    }

    pub fn h(&self, s: f64, t: f64) -> Result<f64> {
        if !self.in_closed_domain(s, t) {
            return Err(invalid(format!("(s,t) = ({s},{t}) is outside the domain")));
        }
        let (p, c, d) = (self.p, self.s_max(), self.d());
        let ar2_term = if s == 0.0 { 0.0 } else { s * self.ln_ar2 };
        Ok(2.0 * c * c.ln() - 2.0 * xlnx(s) - 2.0 * xlnx(c - s) + ar2_term + t * self.ln_r + xlnx(s + t)
            - xlnx(t)
            + xlnx(d - s - t)
            - xlnx(p - t)
            - xlnx(d)
            + xlnx(p))
    }

    pub fn grad(&self, s: f64, t: f64) -> Result<[f64; 2]> {
        self.check_interior(s, t)?;
        Ok(self.grad_unchecked(s, t))
    }

    fn grad_unchecked(&self, s: f64, t: f64) -> [f64; 2] {
        let (p, c, d) = (self.p, self.s_max(), self.d());
        let ls = (s + t).ln();
        let lr = (d - s - t).ln();
        [
            2.0 * (c - s).ln() - lr + ls - 2.0 * s.ln() + self.ln_ar2,
            ls - t.ln() - lr + (p - t).ln() + self.ln_r,
        ]
    }

    pub fn hessian(&self, s: f64, t: f64) -> Result<[[f64; 2]; 2]> {
        self.check_interior(s, t)?;
        Ok(self.hessian_unchecked(s, t))
    }

    fn hessian_unchecked(&self, s: f64, t: f64) -> [[f64; 2]; 2] {
        let (p, c, d) = (self.p, self.s_max(), self.d());
        let q12 = 1.0 / (d - s - t) + 1.0 / (s + t);
        let q11 = q12 - 2.0 / (c - s) - 2.0 / s;
        let q22 = q12 - 1.0 / (p - t) - 1.0 / t;
        [[q11, q12], [q12, q22]]
    }
}

pub fn surface_h(s: f64, t: f64, p: f64, a: f64, r: f64) -> Result<f64> {
    Surface::new(p, a, r)?.h(s, t)
}

pub fn surface_grad(s: f64, t: f64, p: f64, a: f64, r: f64) -> Result<[f64; 2]> {
    Surface::new(p, a, r)?.grad(s, t)
}

pub fn surface_hessian(s: f64, t: f64, p: f64, a: f64, r: f64) -> Result<[[f64; 2]; 2]> {
    Surface::new(p, a, r)?.hessian(s, t)
}

/// Eigenvalues of a symmetric 2x2 matrix, smaller first.
pub fn symmetric_eigenvalues(m: [[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let rad = half_diff.hypot(m[0][1]);
    [mean - rad, mean + rad]
}

/// Maximum point of `H` with the quantities entering the Laplace asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleSolution {
    pub p: f64,
    pub a: f64,
    pub r: f64,
    pub s_star: f64,
    pub t_star: f64,
    pub h_star: f64,
    pub grad_norm: f64,
    pub hessian: [[f64; 2]; 2],
    pub det: f64,
    pub c_star: f64,
    pub b_star: f64,
    pub iterations: usize,
}

impl SaddleSolution {
    /// Residuals of the critical-point system in product form.
    pub fn product_residuals(&self) -> [f64; 2] {
        let (s, t, p) = (self.s_star, self.t_star, self.p);
        let c = (1.0 - p) / 2.0;
        let d = (1.0 + p) / 2.0;
        let common = (s + t) / (d - s - t);
        [
            ((c - s) / s).powi(2) * common * self.a * self.r * self.r - 1.0,
            (p - t) / t * common * self.r - 1.0,
        ]
    }
}

/// Stirling constant of `B_{sN,tN} ≈ C(s,t)/N · e^{N H(s,t)}`.
pub fn stirling_constant(s: f64, t: f64, p: f64) -> f64 {
    let d = (1.0 + p) / 2.0;
    (p * d).sqrt() / (t * (s + t) * (p - t) * (d - s - t)).sqrt() / (2.0 * std::f64::consts::PI)
}

pub const SADDLE_MAX_ITER: usize = 500;

/// Damped Newton ascent on `H` from `((1-p)/4, p/2)`; the step is halved
/// until the iterate stays interior and does not decrease `H`.
pub fn solve_saddle(p: f64, a: f64, r: f64, tol: f64) -> Result<SaddleSolution> {
    let surface = Surface::new(p, a, r)?;
    let (mut s, mut t) = (surface.s_max() / 2.0, p / 2.0);
    let mut h = surface.h(s, t)?;
    let mut g = surface.grad_unchecked(s, t);
    let mut iterations = 0;
    while g[0].hypot(g[1]) > tol {
        if iterations == SADDLE_MAX_ITER {
            return Err(Error::NoConvergence {
                operation: "solve_saddle",
                iterations,
                residual: g[0].hypot(g[1]),
            });
        }
        iterations += 1;
        let q = surface.hessian_unchecked(s, t);
        let det = q[0][0] * q[1][1] - q[0][1] * q[0][1];
        let mut dir = [
            -(q[1][1] * g[0] - q[0][1] * g[1]) / det,
            -(-q[0][1] * g[0] + q[0][0] * g[1]) / det,
        ];
        if !(dir[0] * g[0] + dir[1] * g[1] > 0.0) || !dir[0].is_finite() || !dir[1].is_finite() {
            dir = g;
        }
        let mut step = 1.0;
        loop {
            let (ns, nt) = (s + step * dir[0], t + step * dir[1]);
            if surface.in_interior(ns, nt) {
                let nh = surface.h(ns, nt)?;
                let ng = surface.grad_unchecked(ns, nt);
                if nh >= h || ng[0].hypot(ng[1]) < g[0].hypot(g[1]) {
                    s = ns;
                    t = nt;
                    h = nh;
                    g = ng;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::NoConvergence {
                    operation: "solve_saddle line search",
                    iterations,
                    residual: g[0].hypot(g[1]),
                });
            }
        }
    }
    let hessian = surface.hessian_unchecked(s, t);
    let det = hessian[0][0] * hessian[1][1] - hessian[0][1] * hessian[0][1];
    let eig = symmetric_eigenvalues(hessian);
    let d = (1.0 + p) / 2.0;
    let b_star = (1.0 + p) / (2.0 * p) * (p - t) / (d - s - t);
    if !(eig[1] < 0.0) || !(b_star < (1.0 + p) / (2.0 * p)) {
        return Err(Error::NoConvergence {
            operation: "solve_saddle verification",
            iterations,
            residual: eig[1],
        });
    }
    Ok(SaddleSolution {
        p,
        a,
        r,
        s_star: s,
        t_star: t,
        h_star: h,
        grad_norm: g[0].hypot(g[1]),
        hessian,
        det,
        c_star: stirling_constant(s, t, p),
        b_star,
        iterations,
    })
}

/// `2π C(s*,t*) det(Q)^{-1/2} (b*)^m`
pub fn laplace_prefactor(solution: &SaddleSolution, m: usize) -> f64 {
    2.0 * std::f64::consts::PI * solution.c_star / solution.det.sqrt() * solution.b_star.powi(m as i32)
}

const SADDLE_TOL: f64 = 1e-12;

fn check_thermo(beta: f64, b: f64, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p = {p} must lie in (0,1)")));
    }
    if !(beta >= 0.0 && beta.is_finite() && b.is_finite()) {
        return Err(invalid(format!("(beta, B) = ({beta}, {b}) out of range")));
    }
    Ok(())
}

/// Saddle point at `(β, B, p)`; `None` when `a = 0` (`B = 0` or `β = 0`).
pub fn saddle_at(beta: f64, b: f64, p: f64) -> Result<Option<SaddleSolution>> {
    check_thermo(beta, b, p)?;
    let ing = LineIngredients::new(beta, b)?;
    if b == 0.0 || !(ing.a > 0.0) || !(ing.r > 0.0) {
        return Ok(None);
    }
    solve_saddle(p, ing.a, ing.r, SADDLE_TOL).map(Some)
}

/// `ψ̃ = ln λ₊ + ((1-p)/2) ln A₊ + H(s*,t*)`, with `H* = 0` when `a = 0`.
pub fn pressure_cm12(beta: f64, b: f64, p: f64) -> Result<f64> {
    check_thermo(beta, b, p)?;
    if beta == 0.0 {
        return Ok(crate::numeric::ln_two_cosh(b));
    }
    let ing = LineIngredients::new(beta, b)?;
    let base = ln_lambda_plus(beta, b) + 0.5 * (1.0 - p) * ing.a_plus.ln();
    Ok(match saddle_at(beta, b, p)? {
        Some(sol) => base + sol.h_star,
        None => base,
    })
}

/// Terms below `max - TRUNCATION_GAP` (log scale) for `TRUNCATION_RUN`
/// consecutive `m` end the sum over `m`.
const TRUNCATION_GAP: f64 = 50.0;
const TRUNCATION_RUN: usize = 10;
const M_CHUNK: usize = 16;

/// `ln Σ_m 𝒵_m(1,r) w_m Q(M_N = m)` with `w_m` computed by `weight(m)` in
/// log scale, truncated adaptively in `m`.
fn tori_weighted_sum<F>(n1: usize, n2: usize, r: f64, weight: F) -> Result<f64>
where
    F: Fn(usize) -> f64 + Sync,
{
    let pmf = mn_pmf(n1, n2)?;
    let tori = torus_product_table(n2, 1.0, r)?;
    let mut acc = LogSumExp::new();
    let mut best = f64::NEG_INFINITY;
    let mut small_run = 0;
    let mut start = 0;
    'outer: while start <= n2 {
        let end = (start + M_CHUNK).min(n2 + 1);
        let terms: Vec<f64> = (start..end)
            .into_par_iter()
            .map(|m| tori[m].ln() + pmf[m].ln() + weight(m))
            .collect();
        for term in terms {
            acc.push(term);
            best = best.max(term);
            if term < best - TRUNCATION_GAP {
                small_run += 1;
                if small_run >= TRUNCATION_RUN {
                    break 'outer;
                }
            } else {
                small_run = 0;
            }
        }
        start = end;
    }
    Ok(acc.value())
}

/// Finite-`N` annealed pressure from the exact decomposition over `M_N`.
/// `N` is the order after the parity adjustment, `n1 + n2`.
pub fn pressure_cm12_finite(n: usize, beta: f64, b: f64, p: f64) -> Result<f64> {
    check_thermo(beta, b, p)?;
    let params = Cm12Params::new(p, n)?;
    pressure_cm12_finite_counts(params.n1, params.n2, beta, b)
}

/// Same as [`pressure_cm12_finite`] for explicit degree counts.
pub fn pressure_cm12_finite_counts(n1: usize, n2: usize, beta: f64, b: f64) -> Result<f64> {
    check_counts(n1)?;
    let ing = LineIngredients::new(beta, b)?;
    let lf = LnFactorials::new(n1 / 2 + n2 + 2);
    let kernel = LinesKernel::new(&lf, n1 / 2, ing.a, ing.r);
    let ln_sum = tori_weighted_sum(n1, n2, ing.r, |m| kernel.sum(n2 - m, 0).ln())?;
    let order = (n1 + n2) as f64;
    Ok(ln_lambda_plus(beta, b) + n1 as f64 / (2.0 * order) * ing.a_plus.ln() + ln_sum / order)
}

/// Share of the `M_N`-averaged double sum carried by `ℓ > (1-ε) n1/2`.
pub fn boundary_contribution_check(n: usize, p: f64, a: f64, r: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("epsilon = {eps} must lie in (0, 1/2)")));
    }
    let params = Cm12Params::new(p, n)?;
    let (n1, n2) = (params.n1, params.n2);
    check_lines_args(n1, n2, 0, r)?;
    if a == 0.0 {
        return Ok(0.0);
    }
    let lines = n1 / 2;
    let ell_min = ((1.0 - eps) * lines as f64).floor() as usize + 1;
    let lf = LnFactorials::new(lines + n2 + 2);
    let kernel = LinesKernel::new(&lf, lines, a, r);
    let total = tori_weighted_sum(n1, n2, r, |m| kernel.sum(n2 - m, 0).ln())?;
    if ell_min > lines {
        return Ok(0.0);
    }
    let tail = tori_weighted_sum(n1, n2, r, |m| kernel.sum(n2 - m, ell_min).ln())?;
    Ok((tail - total).exp())
}

const FD_FIRST: f64 = 1e-4;
const FD_SECOND: f64 = 1e-3;
const FD_EVEN: f64 = 1e-2;
/// Below this `|B|` the magnetization is taken from the pressure directly.
const SMALL_FIELD: f64 = 1e-2;

/// `∂_B ψ̃` from the envelope formula
/// `∂ ln λ₊ + ((1-p)/2) ∂ ln A₊ + s* ∂ ln(a r²) + t* ∂ ln r`.
pub fn magnetization_cm12(beta: f64, b: f64, p: f64) -> Result<f64> {
    check_thermo(beta, b, p)?;
    if beta == 0.0 {
        return Ok(b.tanh());
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    if b.abs() < SMALL_FIELD {
        return magnetization_cm12_direct(beta, b, p);
    }
    let sol = saddle_at(beta, b, p)?.ok_or_else(|| invalid("no saddle point at this (beta, B)"))?;
    let ing = |x: f64| LineIngredients::new(beta, x).expect("validated parameters");
    let d_ln_a_plus = richardson_first_derivative(|x| ing(x).a_plus.ln(), b, FD_FIRST);
    let d_ln_ar2 = richardson_first_derivative(
        |x| {
            let i = ing(x);
            (i.a * i.r * i.r).ln()
        },
        b,
        FD_FIRST,
    );
    let d_ln_r = richardson_first_derivative(|x| ing(x).r.ln(), b, FD_FIRST);
    Ok(b.sinh() / root_q(beta, b) + 0.5 * (1.0 - p) * d_ln_a_plus + sol.s_star * d_ln_ar2 + sol.t_star * d_ln_r)
}

/// Central difference of [`pressure_cm12`] in `B` with one Richardson step.
pub fn magnetization_cm12_direct(beta: f64, b: f64, p: f64) -> Result<f64> {
    check_thermo(beta, b, p)?;
    pressure_cm12(beta, b + FD_FIRST, p)?;
    pressure_cm12(beta, b - FD_FIRST, p)?;
    Ok(richardson_first_derivative(
        |x| pressure_cm12(beta, x, p).unwrap_or(f64::NAN),
        b,
        FD_FIRST,
    ))
}

/// `σ₂² = ∂²_B ψ̃`. At `B = 0` an even five-point stencil is used.
pub fn sigma2_variance(beta: f64, b: f64, p: f64) -> Result<f64> {
    check_thermo(beta, b, p)?;
    if beta == 0.0 {
        return Ok(crate::numeric::sech2(b));
    }
    let f = |x: f64| pressure_cm12(beta, x, p);
    let value = if b == 0.0 {
        let h = FD_EVEN;
        let (f0, f1, f2) = (f(0.0)?, f(h)?, f(2.0 * h)?);
        (-2.0 * f2 + 32.0 * f1 - 30.0 * f0) / (12.0 * h * h)
    } else {
        f(b + FD_SECOND)?;
        f(b - FD_SECOND)?;
        richardson_second_derivative(|x| f(x).unwrap_or(f64::NAN), b, FD_SECOND)
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::NoConvergence {
            operation: "sigma2_variance",
            iterations: 0,
            residual: value,
        });
    }
    Ok(value)
}
