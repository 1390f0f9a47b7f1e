//! Markov chains targeting quenched and annealed Ising measures.
//!
//! Spins are updated by heat-bath moves. For the configuration model the
//! chain runs on (pairing, spins) jointly, so its spin marginal is the
//! annealed measure.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::graph_models::{sample_pairing, DegreeSequence, Multigraph, WeightSequence};
use crate::grg::EffectiveCouplings;
use crate::rng::{self, SimRng};

/// Largest order for the exact dense-coupling GRG chain.
pub const DENSE_GRG_CAP: usize = 4000;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub seed: u64,
    /// Sweeps discarded before recording.
    pub burn_in: usize,
    /// Sweeps between recorded samples.
    pub thin: usize,
    pub samples: usize,
    /// Double-edge switch attempts per sweep for the configuration-model
    /// chain; `None` means `max(1, ℓ_N / 10)`.
    pub switches_per_sweep: Option<usize>,
    /// Keep the spin configuration (as a bit mask) of every sample; needs `N <= 64`.
    pub record_states: bool,
}

impl ChainConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        ChainConfig {
            seed,
            burn_in: 100,
            thin: 1,
            samples,
            switches_per_sweep: None,
            record_states: false,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_thin(mut self, thin: usize) -> Self {
        self.thin = thin;
        self
    }

    pub fn with_switches(mut self, switches: usize) -> Self {
        self.switches_per_sweep = Some(switches);
        self
    }

    pub fn recording_states(mut self) -> Self {
        self.record_states = true;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.thin == 0 || self.samples == 0 {
            return Err(invalid("thinning and sample count must be positive"));
        }
        if n == 0 {
            return Err(invalid("graph has no vertices"));
        }
        if self.record_states && n > 64 {
            return Err(invalid("state recording needs N <= 64"));
        }
        Ok(())
    }
}

/// Recorded total spins `S_N` with chain metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n: usize,
    pub values: Vec<f64>,
    pub states: Vec<u64>,
    pub config: ChainConfig,
    /// Acceptance rate of pairing moves (configuration-model chain only).
    pub switch_acceptance: Option<f64>,
    /// Set when couplings were replaced by their rank-1 approximation.
    pub approximate: bool,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Empirical law over spin masks from the recorded states.
    pub fn empirical_law(&self) -> Vec<f64> {
        let mut law = vec![0.0; 1 << self.n];
        let w = 1.0 / self.states.len() as f64;
        for &s in &self.states {
            law[s as usize] += w;
        }
        law
    }
}

#[inline]
fn heat_bath<R: Rng + ?Sized>(rng: &mut R, field: f64) -> i8 {
    if rng.random::<f64>() < 1.0 / (1.0 + (-2.0 * field).exp()) {
        1
    } else {
        -1
    }
}

fn random_spins<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn mask_of(spins: &[i8]) -> u64 {
    spins.iter().enumerate().filter(|(_, &s)| s == 1).fold(0, |m, (i, _)| m | 1 << i)
}

/// Shared record/burn-in loop around a sweep closure.
fn run_chain<F>(n: usize, config: &ChainConfig, spins: &mut Vec<i8>, mut sweep: F) -> (Vec<f64>, Vec<u64>)
where
    F: FnMut(&mut Vec<i8>),
{
    for _ in 0..config.burn_in {
        sweep(spins);
    }
    let mut values = Vec::with_capacity(config.samples);
    let mut states = Vec::with_capacity(if config.record_states { config.samples } else { 0 });
    for _ in 0..config.samples {
        for _ in 0..config.thin {
            sweep(spins);
        }
        values.push(spins.iter().map(|&s| f64::from(s)).sum());
        if config.record_states {
            states.push(mask_of(spins));
        }
    }
    debug_assert_eq!(spins.len(), n);
    (values, states)
}

/// Heat-bath Glauber dynamics on a fixed multigraph.
pub fn glauber_quenched(graph: &Multigraph, beta: f64, b: f64, config: &ChainConfig) -> Result<SampleBatch> {
    let n = graph.order();
    config.validate(n)?;
    let mut nbrs = vec![Vec::new(); n];
    for &(u, v) in graph.edges() {
        if u != v {
            nbrs[u].push(v);
            nbrs[v].push(u);
        }
    }
    let mut rng = rng::from_seed(config.seed);
    let mut spins = random_spins(&mut rng, n);
    let (values, states) = run_chain(n, config, &mut spins, |s| {
        for i in 0..n {
            let local: i32 = nbrs[i].iter().map(|&j| i32::from(s[j])).sum();
            s[i] = heat_bath(&mut rng, b + beta * f64::from(local));
        }
    });
    Ok(SampleBatch {
        n,
        values,
        states,
        config: config.clone(),
        switch_acceptance: None,
        approximate: false,
    })
}

/// Heat-bath dynamics for the annealed GRG: the complete-graph model with
/// couplings `β_ij`. Above [`DENSE_GRG_CAP`] vertices the couplings are
/// replaced by `sinh(β) w_i w_j / ℓ_N` and the batch is marked approximate.
pub fn glauber_annealed_grg(weights: &WeightSequence, beta: f64, b: f64, config: &ChainConfig) -> Result<SampleBatch> {
    let n = weights.len();
    config.validate(n)?;
    let mut rng = rng::from_seed(config.seed);
    let mut spins = random_spins(&mut rng, n);
    let approximate = n > DENSE_GRG_CAP;
    let (values, states) = if approximate {
        log::warn!("N = {n} exceeds {DENSE_GRG_CAP}: using rank-1 approximate couplings");
        rank_one_chain(weights, beta, b, config, &mut rng, &mut spins)
    } else {
        dense_chain(weights, beta, b, config, &mut rng, &mut spins)?
    };
    Ok(SampleBatch {
        n,
        values,
        states,
        config: config.clone(),
        switch_acceptance: None,
        approximate,
    })
}

fn dense_chain(
    weights: &WeightSequence,
    beta: f64,
    b: f64,
    config: &ChainConfig,
    rng: &mut SimRng,
    spins: &mut Vec<i8>,
) -> Result<(Vec<f64>, Vec<u64>)> {
    let n = weights.len();
    let couplings = EffectiveCouplings::new(weights, beta)?;
    // h_i = Σ_{j≠i} β_ij σ_j
    let mut fields: Vec<f64> = (0..n)
        .map(|i| {
            couplings
                .row(i)
                .iter()
                .zip(spins.iter())
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, (c, &s))| c * f64::from(s))
                .sum()
        })
        .collect();
    Ok(run_chain(n, config, spins, |s| {
        for i in 0..n {
            let new = heat_bath(rng, b + fields[i]);
            if new != s[i] {
                s[i] = new;
                let delta = 2.0 * f64::from(new);
                for (f, c) in fields.iter_mut().zip(couplings.row(i)) {
                    *f += delta * c;
                }
                fields[i] -= delta * couplings.coupling(i, i);
            }
        }
    }))
}

fn rank_one_chain(
    weights: &WeightSequence,
    beta: f64,
    b: f64,
    config: &ChainConfig,
    rng: &mut SimRng,
    spins: &mut Vec<i8>,
) -> (Vec<f64>, Vec<u64>) {
    let n = weights.len();
    let w = weights.weights().to_vec();
    let scale = beta.sinh() / weights.total();
    let mut weighted: f64 = w.iter().zip(spins.iter()).map(|(x, &s)| x * f64::from(s)).sum();
    run_chain(n, config, spins, |s| {
        for i in 0..n {
            let field = b + scale * w[i] * (weighted - w[i] * f64::from(s[i]));
            let new = heat_bath(rng, field);
            if new != s[i] {
                weighted += 2.0 * w[i] * f64::from(new);
                s[i] = new;
            }
        }
    })
}

/// Joint chain on (pairing, spins) for the configuration model. Each sweep
/// is one heat-bath pass over the spins followed by double-edge switches
/// accepted with probability `min(1, e^{βΔ})`.
pub fn joint_mcmc_cm(degrees: &DegreeSequence, beta: f64, b: f64, config: &ChainConfig) -> Result<SampleBatch> {
    let n = degrees.len();
    config.validate(n)?;
    let total = degrees.total();
    if total % 2 == 1 {
        return Err(invalid(format!("total degree {total} is odd")));
    }
    if total < 2 {
        return Err(invalid("at least two half-edges are needed"));
    }
    let mut rng = rng::from_seed(config.seed);
    let pairing = sample_pairing(degrees, &mut rng)?;
    let owner: Vec<usize> = pairing.owner().to_vec();
    let mut mate: Vec<usize> = pairing.mates().to_vec();
    let mut stubs_of = vec![Vec::new(); n];
    for (h, &v) in owner.iter().enumerate() {
        stubs_of[v].push(h);
    }
    let switches = config.switches_per_sweep.unwrap_or((total / 10).max(1));
    let mut spins = random_spins(&mut rng, n);
    let mut attempted = 0u64;
    let mut accepted = 0u64;
    let can_switch = total >= 4;

    let (values, states) = run_chain(n, config, &mut spins, |s| {
        for v in 0..n {
            let mut local = 0i32;
            for &h in &stubs_of[v] {
                let u = owner[mate[h]];
                if u != v {
                    local += i32::from(s[u]);
                }
            }
            s[v] = heat_bath(&mut rng, b + beta * f64::from(local));
        }
        if !can_switch {
            return;
        }
        let spin_of = |h: usize| i32::from(s[owner[h]]);
        for _ in 0..switches {
            let a = rng.random_range(0..total);
            let bb = mate[a];
            let c = loop {
                let c = rng.random_range(0..total);
                if c != a && c != bb {
                    break c;
                }
            };
            let d = mate[c];
            let (x, y) = if rng.random::<bool>() { (c, d) } else { (d, c) };
            // new pairs: (a, x), (bb, y)
            let old = spin_of(a) * spin_of(bb) + spin_of(c) * spin_of(d);
            let new = spin_of(a) * spin_of(x) + spin_of(bb) * spin_of(y);
            let delta = f64::from(new - old);
            attempted += 1;
            if delta >= 0.0 || rng.random::<f64>() < (beta * delta).exp() {
                accepted += 1;
                mate[a] = x;
                mate[x] = a;
                mate[bb] = y;
                mate[y] = bb;
            }
        }
    });
    Ok(SampleBatch {
        n,
        values,
        states,
        config: config.clone(),
        switch_acceptance: if attempted > 0 {
            Some(accepted as f64 / attempted as f64)
        } else {
            None
        },
        approximate: false,
    })
}

/// Total variation distance between two laws on the same index set.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
