//! Brute-force partition functions for small instances: spin enumeration on a
//! fixed multigraph, the exact annealed GRG sum, pairing enumeration for the
//! configuration model, and 1-D transfer matrices.

use std::collections::HashMap;

use crate::cm12::LineIngredients;
use crate::cm2::Cm2Thermo;
use crate::error::{invalid, Error, Result};
use crate::graph_models::{pair_probability, DegreeSequence, Multigraph, WeightSequence};
use crate::grg::pair_coupling;
use crate::numeric::{LogSumExp, LogValue};

/// Largest number of spins enumerated by default.
pub const MAX_SPINS: usize = 24;
/// Largest number of half-edges whose pairings are enumerated by default.
pub const MAX_STUBS: usize = 14;

/// Spins `±1`; bit `i` of a mask is set when `σ_i = +1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn from_mask(mask: u64, n: usize) -> Self {
        SpinConfiguration {
            spins: (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect(),
        }
    }

    pub fn from_spins(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("spins must be +1 or -1"));
        }
        Ok(SpinConfiguration { spins })
    }

    pub fn mask(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.spins.iter().map(|&s| i64::from(s)).sum()
    }
}

pub(crate) fn mask_spin(mask: u64, i: usize) -> i64 {
    if mask >> i & 1 == 1 {
        1
    } else {
        -1
    }
}

fn check_spins(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "N",
            value: n,
            cap,
        });
    }
    Ok(())
}

/// Count of configurations by (edge energy `Σ σσ'`, magnetization `Σσ`) for
/// one connected piece with `n` vertices.
struct EnergyHistogram {
    max_energy: i64,
    n: i64,
    counts: Vec<u64>,
}

impl EnergyHistogram {
    fn build(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut energy: i64 = 0;
        for &(u, v) in edges {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
            energy += 1; // all spins start at -1
        }
        let max_energy = edges.len() as i64;
        let width = (2 * max_energy + 1) as usize;
        let mut counts = vec![0u64; width * (n + 1)];
        let mut spins = vec![-1i64; n];
        let mut up = 0usize;
        let record = |counts: &mut Vec<u64>, energy: i64, up: usize| {
            counts[up * width + (energy + max_energy) as usize] += 1;
        };
        record(&mut counts, energy, up);
        // Gray code: step g flips the lowest set bit of g.
        for g in 1u64..(1u64 << n) {
            let i = g.trailing_zeros() as usize;
            let field: i64 = adj[i].iter().map(|&j| spins[j]).sum();
            energy -= 2 * spins[i] * field;
            spins[i] = -spins[i];
            if spins[i] == 1 {
                up += 1;
            } else {
                up -= 1;
            }
            record(&mut counts, energy, up);
        }
        EnergyHistogram {
            max_energy,
            n: n as i64,
            counts,
        }
    }

    fn ln_z(&self, beta: f64, b: f64) -> f64 {
        let width = (2 * self.max_energy + 1) as usize;
        let mut acc = LogSumExp::new();
        for (idx, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let up = (idx / width) as i64;
            let energy = (idx % width) as i64 - self.max_energy;
            let magnet = 2 * up - self.n;
            acc.push((c as f64).ln() + beta * energy as f64 + b * magnet as f64);
        }
        acc.value()
    }
}

/// Subgraph induced on each component, with vertices relabelled `0..k`.
fn component_pieces(graph: &Multigraph) -> Vec<(usize, Vec<(usize, usize)>)> {
    let comps = graph.components();
    let mut label = vec![(0usize, 0usize); graph.order()];
    for (c, verts) in comps.iter().enumerate() {
        for (k, &v) in verts.iter().enumerate() {
            label[v] = (c, k);
        }
    }
    let mut pieces: Vec<(usize, Vec<(usize, usize)>)> = comps.iter().map(|v| (v.len(), Vec::new())).collect();
    for &(u, v) in graph.edges() {
        let (c, lu) = label[u];
        pieces[c].1.push((lu, label[v].1));
    }
    pieces
}

/// `ln Σ_σ exp(β Σ_edges σ_i σ_j + B Σ_i σ_i)`; self-loops count `β` each.
pub fn exact_quenched_z(graph: &Multigraph, beta: f64, b: f64) -> Result<LogValue> {
    exact_quenched_z_with_cap(graph, beta, b, MAX_SPINS)
}

pub fn exact_quenched_z_with_cap(graph: &Multigraph, beta: f64, b: f64, cap: usize) -> Result<LogValue> {
    check_spins(graph.order(), cap)?;
    let ln: f64 = component_pieces(graph)
        .iter()
        .map(|(n, edges)| EnergyHistogram::build(*n, edges).ln_z(beta, b))
        .sum();
    Ok(LogValue::from_ln(ln))
}

/// Unnormalized log-weights `β Σ_edges σσ' + B Σσ` of all `2^N` configurations.
fn quenched_log_weights(graph: &Multigraph, beta: f64, b: f64) -> Vec<f64> {
    let n = graph.order();
    (0..1u64 << n)
        .map(|mask| {
            let e: i64 = graph.edges().iter().map(|&(u, v)| mask_spin(mask, u) * mask_spin(mask, v)).sum();
            let m: i64 = (0..n).map(|i| mask_spin(mask, i)).sum();
            beta * e as f64 + b * m as f64
        })
        .collect()
}

fn normalize(log_weights: Vec<f64>) -> Vec<f64> {
    let ln_z = crate::numeric::log_sum_exp(log_weights.iter().copied());
    log_weights.into_iter().map(|w| (w - ln_z).exp()).collect()
}

/// Boltzmann–Gibbs law on a fixed graph, indexed by spin mask.
pub fn quenched_gibbs_law(graph: &Multigraph, beta: f64, b: f64) -> Result<Vec<f64>> {
    check_spins(graph.order(), 20)?;
    Ok(normalize(quenched_log_weights(graph, beta, b)))
}

/// Effective couplings and `Σ_{i<j} ln C_ij` of the GRG edge average.
fn grg_pair_terms(weights: &WeightSequence, beta: f64) -> (Vec<f64>, f64) {
    let n = weights.len();
    let mut j = vec![0.0; n * n];
    let mut ln_c_sum = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            let (bij, ln_c) = pair_coupling(pair_probability(weights, u, v), beta);
            j[u * n + v] = bij;
            j[v * n + u] = bij;
            ln_c_sum += ln_c;
        }
    }
    (j, ln_c_sum)
}

/// Log-weights `Σ_{i<j} β_ij σ_i σ_j + B Σσ` over all masks by Gray code,
/// with fields recomputed every 1024 flips.
fn grg_log_weights<F: FnMut(u64, f64)>(n: usize, j: &[f64], b: f64, mut visit: F) {
    let mut spins = vec![-1.0f64; n];
    let recompute = |spins: &[f64]| -> (Vec<f64>, f64) {
        let fields: Vec<f64> = (0..n).map(|u| (0..n).map(|v| j[u * n + v] * spins[v]).sum()).collect();
        let pair: f64 = 0.5 * (0..n).map(|u| spins[u] * fields[u]).sum::<f64>();
        (fields, pair + b * spins.iter().sum::<f64>())
    };
    let (mut fields, mut w) = recompute(&spins);
    let mut mask = 0u64;
    visit(mask, w);
    for g in 1u64..(1u64 << n) {
        let i = g.trailing_zeros() as usize;
        let old = spins[i];
        w -= 2.0 * old * (fields[i] + b);
        spins[i] = -old;
        mask ^= 1 << i;
        if g % 1024 == 0 {
            let (f, ww) = recompute(&spins);
            fields = f;
            w = ww;
        } else {
            for (u, f) in fields.iter_mut().enumerate() {
                *f -= 2.0 * old * j[u * n + i];
            }
        }
        visit(mask, w);
    }
}

/// `ln Q_N(Z_N) = ln Σ_σ e^{BΣσ} Π_{i<j} (e^{βσ_iσ_j} p_ij + 1 - p_ij)`.
pub fn exact_annealed_z_grg(weights: &WeightSequence, beta: f64, b: f64) -> Result<LogValue> {
    exact_annealed_z_grg_with_cap(weights, beta, b, MAX_SPINS)
}

pub fn exact_annealed_z_grg_with_cap(weights: &WeightSequence, beta: f64, b: f64, cap: usize) -> Result<LogValue> {
    let n = weights.len();
    check_spins(n, cap)?;
    let (j, ln_c_sum) = grg_pair_terms(weights, beta);
    let mut acc = LogSumExp::new();
    grg_log_weights(n, &j, b, |_, w| acc.push(w));
    Ok(LogValue::from_ln(ln_c_sum + acc.value()))
}

/// Annealed GRG spin law, indexed by spin mask.
pub fn annealed_grg_law(weights: &WeightSequence, beta: f64, b: f64) -> Result<Vec<f64>> {
    let n = weights.len();
    check_spins(n, 20)?;
    let (j, _) = grg_pair_terms(weights, beta);
    let mut logw = vec![0.0; 1 << n];
    grg_log_weights(n, &j, b, |mask, w| logw[mask as usize] = w);
    Ok(normalize(logw))
}

fn check_stubs(degrees: &DegreeSequence, cap: usize) -> Result<()> {
    let total = degrees.total();
    if total > cap {
        return Err(Error::CapExceeded {
            what: "total degree",
            value: total,
            cap,
        });
    }
    if total % 2 == 1 {
        return Err(invalid(format!("total degree {total} is odd")));
    }
    Ok(())
}

/// Calls `visit` with the mate array of every perfect matching of
/// `0..total` half-edges.
pub fn for_each_pairing<F: FnMut(&[usize])>(total: usize, mut visit: F) {
    fn rec<F: FnMut(&[usize])>(mate: &mut Vec<usize>, visit: &mut F) {
        let Some(first) = mate.iter().position(|&m| m == usize::MAX) else {
            visit(mate);
            return;
        };
        for other in (first + 1)..mate.len() {
            if mate[other] != usize::MAX {
                continue;
            }
            mate[first] = other;
            mate[other] = first;
            rec(mate, visit);
            mate[first] = usize::MAX;
            mate[other] = usize::MAX;
        }
    }
    if total % 2 == 1 {
        return;
    }
    let mut mate = vec![usize::MAX; total];
    rec(&mut mate, &mut visit);
}

pub fn count_pairings(total: usize) -> u64 {
    let mut count = 0;
    for_each_pairing(total, |_| count += 1);
    count
}

fn pairing_graph(owner: &[usize], n: usize, mate: &[usize]) -> Multigraph {
    let edges = (0..mate.len())
        .filter(|&h| h < mate[h])
        .map(|h| (owner[h], owner[mate[h]]))
        .collect();
    Multigraph::new(n, edges).expect("owners are valid vertices")
}

/// `ln` of the average of `Z_N(G)` over all `(ℓ_N - 1)!!` uniform pairings.
pub fn exact_annealed_z_cm(degrees: &DegreeSequence, beta: f64, b: f64) -> Result<LogValue> {
    exact_annealed_z_cm_with_cap(degrees, beta, b, MAX_STUBS)
}

pub fn exact_annealed_z_cm_with_cap(degrees: &DegreeSequence, beta: f64, b: f64, cap: usize) -> Result<LogValue> {
    check_stubs(degrees, cap)?;
    let owner = degrees.stub_owners();
    let n = degrees.len();
    let mut cache: HashMap<Vec<(usize, usize)>, f64> = HashMap::new();
    let mut acc = LogSumExp::new();
    let mut count = 0u64;
    let mut failure = None;
    for_each_pairing(owner.len(), |mate| {
        let graph = pairing_graph(&owner, n, mate);
        let key = graph.canonical_edges();
        let ln_z = match cache.get(&key) {
            Some(&v) => v,
            None => match exact_quenched_z_with_cap(&graph, beta, b, usize::MAX) {
                Ok(v) => {
                    cache.insert(key, v.ln());
                    v.ln()
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
        };
        acc.push(ln_z);
        count += 1;
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(LogValue::from_ln(acc.value() - (count as f64).ln()))
}

/// Annealed CM spin law `∝ Σ_pairings exp(β Σ_edges σσ' + B Σσ)`.
pub fn annealed_cm_law(degrees: &DegreeSequence, beta: f64, b: f64) -> Result<Vec<f64>> {
    check_stubs(degrees, 12)?;
    let owner = degrees.stub_owners();
    let n = degrees.len();
    let mut per_state: Vec<LogSumExp> = vec![LogSumExp::new(); 1 << n];
    for_each_pairing(owner.len(), |mate| {
        let graph = pairing_graph(&owner, n, mate);
        for (mask, w) in quenched_log_weights(&graph, beta, b).into_iter().enumerate() {
            per_state[mask].push(w);
        }
    });
    Ok(normalize(per_state.iter().map(|a| a.value()).collect()))
}

/// `ln(λ₊^n + λ₋^n)`, the periodic chain of `n` spins.
pub fn transfer_matrix_cycle_z(n: usize, beta: f64, b: f64) -> Result<LogValue> {
    if n == 0 {
        return Err(invalid("cycle length must be at least 1"));
    }
    let th = Cm2Thermo::new(beta, b)?;
    let ln = n as f64 * th.ln_lambda_plus() + th.r.powi(n as i32).ln_1p();
    Ok(LogValue::from_ln(ln))
}

/// `ln(A₊λ₊^n + A₋λ₋^n)`, the free chain of `n` spins.
pub fn transfer_matrix_line_z(n: usize, beta: f64, b: f64) -> Result<LogValue> {
    if n < 2 {
        return Err(invalid("line length must be at least 2"));
    }
    Ok(LogValue::from_ln(LineIngredients::new(beta, b)?.ln_line_z(n)))
}
