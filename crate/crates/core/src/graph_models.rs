//! Weight and degree sequences, GRG and configuration-model sampling, and the
//! line/torus decomposition of `{1,2}`-degree multigraphs.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, SimRng};

/// Vertex weights of a generalized random graph with cached moments.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    weights: Vec<f64>,
    total: f64,
    mean: f64,
    second_moment: f64,
    nu: f64,
}

impl WeightSequence {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("weight sequence is empty"));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(invalid(format!("weight {i} is {w}; weights must be positive and finite")));
        }
        let n = weights.len() as f64;
        let total: f64 = weights.iter().sum();
        let second: f64 = weights.iter().map(|w| w * w).sum();
        let mean = total / n;
        let second_moment = second / n;
        Ok(WeightSequence {
            nu: second / total,
            weights,
            total,
            mean,
            second_moment,
        })
    }

    pub fn constant(w: f64, n: usize) -> Result<Self> {
        Self::new(vec![w; n])
    }

    /// Deterministic quantile sequence `w_i = w_min (N/i)^{1/(tau-1)}`, `i = 1..N`.
    pub fn power_law(tau: f64, w_min: f64, n: usize) -> Result<Self> {
        if !(tau > 1.0) {
            return Err(invalid(format!("power-law exponent tau = {tau} must exceed 1")));
        }
        if tau <= 3.0 {
            log::warn!(
                "tau = {tau} <= 3: the limiting weight has infinite second moment; \
                 finite-N results remain well defined"
            );
        }
        let exponent = 1.0 / (tau - 1.0);
        let weights = (1..=n)
            .map(|i| w_min * (n as f64 / i as f64).powf(exponent))
            .collect();
        Self::new(weights)
    }

    /// Regular sequence for a finite-support law: value `k` is repeated
    /// `round(N * prob_k)` times (the last value absorbs rounding).
    pub fn from_discrete_law(values: &[f64], probs: &[f64], n: usize) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(invalid("values and probabilities must be non-empty and of equal length"));
        }
        let mut weights = Vec::with_capacity(n);
        let mut cumulative = 0.0;
        for (k, (&v, &q)) in values.iter().zip(probs).enumerate() {
            cumulative += q;
            let upto = if k + 1 == values.len() {
                n
            } else {
                ((cumulative * n as f64).round() as usize).min(n)
            };
            while weights.len() < upto {
                weights.push(v);
            }
        }
        Self::new(weights)
    }

    /// One ASCII decimal per line; blank lines and `#` comments are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::new(parse_values(&text)?)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ℓ_N`, the total weight.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// `ν_N = E[W_N^2] / E[W_N]`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for w in &self.weights {
            let _ = writeln!(out, "{w}");
        }
        out
    }
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            message: format!("`{line}` is not a decimal number"),
        })?;
        values.push(v);
    }
    Ok(values)
}

/// Weight sequence constructions exposed to the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    Constant { w: f64 },
    PowerLaw { tau: f64, w_min: f64 },
    FromFile(std::path::PathBuf),
}

pub fn build_weights(kind: &WeightKind, n: usize) -> Result<WeightSequence> {
    match kind {
        WeightKind::Constant { w } => WeightSequence::constant(*w, n),
        WeightKind::PowerLaw { tau, w_min } => WeightSequence::power_law(*tau, *w_min, n),
        WeightKind::FromFile(path) => WeightSequence::from_file(path),
    }
}

/// `p_ij = w_i w_j / (ℓ_N + w_i w_j)` for distinct vertices (0-based).
pub fn grg_edge_prob(weights: &WeightSequence, i: usize, j: usize) -> Result<f64> {
    let n = weights.len();
    if i >= n || j >= n {
        return Err(invalid(format!("vertex index out of range for N = {n}")));
    }
    if i == j {
        return Err(invalid("GRG edge probability needs two distinct vertices"));
    }
    Ok(pair_probability(weights, i, j))
}

/// `w_i w_j / (ℓ_N + w_i w_j)`, also used with `i == j` for the diagonal term.
pub(crate) fn pair_probability(weights: &WeightSequence, i: usize, j: usize) -> f64 {
    let w = weights.weights();
    let prod = w[i] * w[j];
    prod / (weights.total() + prod)
}

/// Undirected multigraph; self-loops and repeated edges allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(u, v)) = edges.iter().find(|(u, v)| *u >= n || *v >= n) {
            return Err(invalid(format!("edge ({u},{v}) references a vertex outside 0..{n}")));
        }
        Ok(Multigraph { n, edges })
    }

    pub fn empty(n: usize) -> Self {
        Multigraph { n, edges: Vec::new() }
    }

    pub fn cycle(n: usize) -> Self {
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Multigraph { n, edges }
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        Multigraph { n, edges }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edge list with each pair ordered and the list sorted.
    pub fn canonical_edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        e.sort_unstable();
        e
    }

    /// Vertex sets of the connected components, in order of smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru.max(rv)] = ru.min(rv);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.n];
        for v in 0..self.n {
            let root = find(&mut parent, v);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(v);
        }
        groups
    }
}

/// A realization of `GRG_N(w)`: the set of present edges `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrgSample {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub seed: Option<u64>,
}

impl GrgSample {
    pub fn to_multigraph(&self) -> Multigraph {
        Multigraph {
            n: self.n,
            edges: self.edges.clone(),
        }
    }
}

/// Each pair `i < j` is present independently with probability `p_ij`.
pub fn sample_grg<R: Rng + ?Sized>(weights: &WeightSequence, rng: &mut R) -> GrgSample {
    let n = weights.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < pair_probability(weights, i, j) {
                edges.push((i, j));
            }
        }
    }
    GrgSample { n, edges, seed: None }
}

pub fn sample_grg_seeded(weights: &WeightSequence, seed: u64) -> GrgSample {
    let mut rng = rng::from_seed(seed);
    let mut sample = sample_grg(weights, &mut rng);
    sample.seed = Some(seed);
    sample
}

/// Degree sequence of a configuration model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<usize>,
    n1: usize,
    n2: usize,
    total: usize,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(invalid("degree sequence is empty"));
        }
        if degrees.iter().any(|&d| d == 0) {
            return Err(invalid("degrees must be at least 1"));
        }
        let n1 = degrees.iter().filter(|&&d| d == 1).count();
        let n2 = degrees.iter().filter(|&&d| d == 2).count();
        let total = degrees.iter().sum();
        Ok(DegreeSequence {
            degrees,
            n1,
            n2,
            total,
        })
    }

    /// `n1` vertices of degree 1 followed by `n2` of degree 2.
    pub fn from_counts(n1: usize, n2: usize) -> Result<Self> {
        let mut d = vec![1; n1];
        d.extend(std::iter::repeat_n(2, n2));
        Self::new(d)
    }

    /// `CM_N(2)`.
    pub fn two_regular(n: usize) -> Result<Self> {
        Self::from_counts(0, n)
    }

    /// `CM_N(1,2)`: `n2 = floor(pN)`, `n1 = N - n2`, with `n1` raised by one
    /// (one more vertex) when it is odd.
    pub fn cm12(p: f64, n: usize) -> Result<Self> {
        let (n1, n2) = cm12_counts(p, n)?;
        Self::from_counts(n1, n2)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let values = parse_values(&text)?;
        let mut degrees = Vec::with_capacity(values.len());
        for v in values {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(invalid(format!("degree {v} is not a positive integer")));
            }
            degrees.push(v as usize);
        }
        Self::new(degrees)
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// `ℓ_N`, the number of half-edges.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn only_ones_and_twos(&self) -> bool {
        self.n1 + self.n2 == self.degrees.len()
    }

    /// Owner vertex of every half-edge, grouped by vertex.
    pub fn stub_owners(&self) -> Vec<usize> {
        self.degrees
            .iter()
            .enumerate()
            .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
            .collect()
    }
}

/// `(n1, n2)` for `CM_N(1,2)` after the parity adjustment.
pub fn cm12_counts(p: f64, n: usize) -> Result<(usize, usize)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p = {p} must lie in (0,1)")));
    }
    let n2 = (p * n as f64 + 1e-9).floor() as usize;
    let mut n1 = n - n2;
    if n1 % 2 == 1 {
        n1 += 1;
    }
    if n1 == 0 {
        return Err(invalid("CM(1,2) needs at least two degree-1 vertices"));
    }
    Ok((n1, n2))
}

/// A perfect matching of half-edges: `mate[h]` is the partner of half-edge `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    owner: Vec<usize>,
    mate: Vec<usize>,
    n: usize,
}

impl Pairing {
    pub fn from_mates(degrees: &DegreeSequence, mate: Vec<usize>) -> Result<Self> {
        let owner = degrees.stub_owners();
        if mate.len() != owner.len() || mate.iter().enumerate().any(|(h, &m)| m >= owner.len() || mate[m] != h || m == h) {
            return Err(invalid("mate array is not a perfect matching of the half-edges"));
        }
        Ok(Pairing {
            owner,
            mate,
            n: degrees.len(),
        })
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    pub fn mates(&self) -> &[usize] {
        &self.mate
    }

    pub fn to_multigraph(&self) -> Multigraph {
        let edges = (0..self.mate.len())
            .filter(|&h| h < self.mate[h])
            .map(|h| (self.owner[h], self.owner[self.mate[h]]))
            .collect();
        Multigraph { n: self.n, edges }
    }

    /// Lines and tori of a multigraph whose degrees are all 1 or 2.
    pub fn decompose(&self) -> Result<GraphDecomposition> {
        let n = self.n;
        let mut stubs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (h, &v) in self.owner.iter().enumerate() {
            stubs[v].push(h);
        }
        if stubs.iter().any(|s| s.len() > 2) {
            return Err(invalid("decomposition requires all degrees in {1,2}"));
        }
        let mut seen = vec![false; n];
        let mut lines = Vec::new();
        for start in 0..n {
            if seen[start] || stubs[start].len() != 1 {
                continue;
            }
            let mut len = 1;
            seen[start] = true;
            let mut h = stubs[start][0];
            loop {
                let next_stub = self.mate[h];
                let v = self.owner[next_stub];
                seen[v] = true;
                len += 1;
                if stubs[v].len() == 1 {
                    break;
                }
                h = if stubs[v][0] == next_stub { stubs[v][1] } else { stubs[v][0] };
            }
            lines.push(len);
        }
        let mut tori = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut v = start;
            let mut h = stubs[start][0];
            loop {
                seen[v] = true;
                len += 1;
                let next_stub = self.mate[h];
                v = self.owner[next_stub];
                if v == start {
                    break;
                }
                h = if stubs[v][0] == next_stub { stubs[v][1] } else { stubs[v][0] };
            }
            tori.push(len);
        }
        Ok(GraphDecomposition { lines, tori })
    }
}

/// Uniform perfect matching by sequential pairing: the first free half-edge is
/// paired with a uniformly chosen other free half-edge.
pub fn sample_pairing<R: Rng + ?Sized>(degrees: &DegreeSequence, rng: &mut R) -> Result<Pairing> {
    let total = degrees.total();
    if total % 2 == 1 {
        return Err(invalid(format!("total degree {total} is odd")));
    }
    let mut free: Vec<usize> = (0..total).rev().collect();
    let mut mate = vec![usize::MAX; total];
    while let Some(h) = free.pop() {
        let k = rng.random_range(0..free.len());
        let other = free.swap_remove(k);
        mate[h] = other;
        mate[other] = h;
    }
    Ok(Pairing {
        owner: degrees.stub_owners(),
        mate,
        n: degrees.len(),
    })
}

/// Line and torus lengths (vertex counts) of a `{1,2}`-degree multigraph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphDecomposition {
    pub lines: Vec<usize>,
    pub tori: Vec<usize>,
}

impl GraphDecomposition {
    pub fn k_line(&self) -> usize {
        self.lines.len()
    }

    pub fn k_torus(&self) -> usize {
        self.tori.len()
    }

    /// `M_N`, the number of vertices on tori.
    pub fn m_n(&self) -> usize {
        self.tori.iter().sum()
    }

    pub fn order(&self) -> usize {
        self.lines.iter().sum::<usize>() + self.m_n()
    }

    /// CSV with columns `kind,length`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,length\n");
        for l in &self.lines {
            let _ = writeln!(out, "line,{l}");
        }
        for t in &self.tori {
            let _ = writeln!(out, "torus,{t}");
        }
        out
    }
}

pub fn sample_cm<R: Rng + ?Sized>(degrees: &DegreeSequence, rng: &mut R) -> Result<GraphDecomposition> {
    sample_pairing(degrees, rng)?.decompose()
}

pub fn sample_cm_seeded(degrees: &DegreeSequence, seed: u64) -> Result<GraphDecomposition> {
    let mut rng: SimRng = rng::from_seed(seed);
    sample_cm(degrees, &mut rng)
}

/// Number of tori of `CM_N(2)`: a sum of independent
/// `Bernoulli(1/(2N-2j+1))`, `j = 1..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleCountLaw {
    pub n: usize,
}

pub fn cycle_count_cm2(n: usize) -> Result<CycleCountLaw> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    Ok(CycleCountLaw { n })
}

impl CycleCountLaw {
    fn success_probs(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n).map(move |j| 1.0 / (2 * self.n - 2 * j + 1) as f64)
    }

    pub fn mean(&self) -> f64 {
        self.success_probs().sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.success_probs().filter(|&q| rng.random::<f64>() < q).count()
    }
}

/// Law of the length of the torus through the first half-edge of `CM_N(2)`:
/// entry `l - 1` is `q_N(l)`.
pub fn first_cycle_law_cm2(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    Ok(first_cycle_law_unchecked(n))
}

pub(crate) fn first_cycle_law_unchecked(n: usize) -> Vec<f64> {
    let mut q = Vec::with_capacity(n);
    let mut survive = 1.0;
    for l in 1..=n {
        let close = 1.0 / (2 * n - 2 * l + 1) as f64;
        q.push(survive * close);
        survive *= 1.0 - close;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weights() {
        let w = WeightSequence::constant(2.0, 4).unwrap();
        assert_eq!(w.weights(), &[2.0; 4]);
        assert_eq!(w.total(), 8.0);
        assert_eq!(w.nu(), 2.0);
    }

    #[test]
    fn power_law_weights() {
        let w = WeightSequence::power_law(5.0, 1.0, 4).unwrap();
        let ws = w.weights();
        assert!((ws[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ws[3], 1.0);
        let sum: f64 = ws.iter().sum();
        let sq: f64 = ws.iter().map(|x| x * x).sum();
        assert!((w.nu() - sq / sum).abs() < 1e-12 * w.nu());
        // heavy tail is accepted with a warning
        assert!(WeightSequence::power_law(2.5, 1.0, 10).is_ok());
    }

    #[test]
    fn non_positive_weights_rejected() {
        let dir = std::env::temp_dir().join(format!("ai-weights-{}", std::process::id()));
        std::fs::write(&dir, "1.0\n2.5\n-1\n").unwrap();
        assert!(matches!(WeightSequence::from_file(&dir), Err(Error::InvalidParameter(_))));
        std::fs::write(&dir, "1.0\n# comment\n2.5\n").unwrap();
        assert_eq!(WeightSequence::from_file(&dir).unwrap().weights(), &[1.0, 2.5]);
        std::fs::remove_file(&dir).ok();
        assert!(WeightSequence::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn discrete_law_sequence() {
        let w = WeightSequence::from_discrete_law(&[1.0, 3.0], &[0.75, 0.25], 8).unwrap();
        assert_eq!(w.weights(), &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn edge_probabilities() {
        let w = WeightSequence::new(vec![1.0, 1.0]).unwrap();
        assert!((grg_edge_prob(&w, 0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(grg_edge_prob(&w, 1, 1).is_err());
        let w = WeightSequence::constant(2.0, 4).unwrap();
        assert!((grg_edge_prob(&w, 0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let w = WeightSequence::new(vec![1e-12, 1.0, 1.0]).unwrap();
        assert!(grg_edge_prob(&w, 0, 1).unwrap() < 1e-11);
    }

    #[test]
    fn grg_sampling() {
        let w = WeightSequence::constant(1.0, 1).unwrap();
        assert!(sample_grg_seeded(&w, 3).edges.is_empty());
        let w = WeightSequence::power_law(3.5, 1.0, 30).unwrap();
        assert_eq!(sample_grg_seeded(&w, 11), sample_grg_seeded(&w, 11));

        let w = WeightSequence::new(vec![1.0, 1.0]).unwrap();
        let mut rng = rng::from_seed(5);
        let draws = 100_000;
        let hits = (0..draws).filter(|_| !sample_grg(&w, &mut rng).edges.is_empty()).count();
        let freq = hits as f64 / draws as f64;
        let se = (1.0 / 3.0 * 2.0 / 3.0 / draws as f64).sqrt();
        assert!((freq - 1.0 / 3.0).abs() < 3.0 * se, "freq {freq}");
    }

    #[test]
    fn cm_small_cases() {
        let mut rng = rng::from_seed(1);
        let d = DegreeSequence::new(vec![2]).unwrap();
        let dec = sample_cm(&d, &mut rng).unwrap();
        assert_eq!(dec.tori, vec![1]);
        assert_eq!(dec.m_n(), 1);
        let d = DegreeSequence::new(vec![1, 1]).unwrap();
        assert_eq!(sample_cm(&d, &mut rng).unwrap().lines, vec![2]);
        let d = DegreeSequence::new(vec![1, 2]).unwrap();
        assert!(sample_cm(&d, &mut rng).is_err());
    }

    #[test]
    fn cm_self_loop_frequency() {
        let d = DegreeSequence::from_counts(2, 1).unwrap();
        let mut rng = rng::from_seed(2);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| sample_cm(&d, &mut rng).unwrap().m_n() == 1)
            .count();
        let freq = hits as f64 / draws as f64;
        let se = (2.0 / 9.0 / draws as f64).sqrt();
        assert!((freq - 1.0 / 3.0).abs() < 3.0 * se, "freq {freq}");
    }

    #[test]
    fn decomposition_invariants() {
        let mut rng = rng::from_seed(9);
        for (n1, n2) in [(10, 7), (2, 40), (30, 0), (0, 25)] {
            let d = DegreeSequence::from_counts(n1, n2).unwrap();
            for _ in 0..50 {
                let dec = sample_cm(&d, &mut rng).unwrap();
                assert_eq!(dec.order(), n1 + n2);
                assert_eq!(dec.k_line(), n1 / 2);
                if n1 == 0 {
                    assert!(dec.lines.is_empty());
                }
                if n2 == 0 {
                    assert!(dec.tori.is_empty() && dec.lines.iter().all(|&l| l == 2));
                }
            }
        }
        let csv = GraphDecomposition { lines: vec![3], tori: vec![1] }.to_csv();
        assert_eq!(csv, "kind,length\nline,3\ntorus,1\n");
    }

    #[test]
    fn cm12_parity_adjustment() {
        assert_eq!(cm12_counts(0.5, 10).unwrap(), (6, 5));
        assert_eq!(cm12_counts(0.5, 2000).unwrap(), (1000, 1000));
        let d = DegreeSequence::cm12(0.3, 11).unwrap();
        assert_eq!(d.total() % 2, 0);
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(cycle_count_cm2(1).unwrap().mean(), 1.0);
        assert!((cycle_count_cm2(2).unwrap().mean() - 4.0 / 3.0).abs() < 1e-15);
        let law = cycle_count_cm2(100).unwrap();
        let mut rng = rng::from_seed(4);
        let draws = 100_000;
        let xs: Vec<f64> = (0..draws).map(|_| law.sample(&mut rng) as f64).collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        assert!((mean - law.mean()).abs() < 3.0 * (var / draws as f64).sqrt());
    }

    #[test]
    fn first_cycle_law() {
        assert_eq!(first_cycle_law_cm2(1).unwrap(), vec![1.0]);
        let q = first_cycle_law_cm2(2).unwrap();
        assert!((q[0] - 1.0 / 3.0).abs() < 1e-15 && (q[1] - 2.0 / 3.0).abs() < 1e-15);
        for n in [3, 17, 1000, 100_000] {
            let q = first_cycle_law_cm2(n).unwrap();
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // L/N against the density 1/(2 sqrt(1-x)), CDF 1 - sqrt(1-x)
        let n = 2000;
        let q = first_cycle_law_cm2(n).unwrap();
        let mut cdf = 0.0;
        let mut ks: f64 = 0.0;
        for (i, qi) in q.iter().enumerate() {
            let x_left = i as f64 / n as f64;
            ks = ks.max((cdf - (1.0 - (1.0 - x_left).sqrt())).abs());
            cdf += qi;
            let x = (i + 1) as f64 / n as f64;
            ks = ks.max((cdf - (1.0 - (1.0 - x).sqrt())).abs());
        }
        assert!(ks < 0.02, "Kolmogorov distance {ks}");
    }
}
