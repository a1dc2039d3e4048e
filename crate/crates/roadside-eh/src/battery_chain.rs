//! Quantized battery Markov chain over `{0, ..., N_s}` energy quanta.
//!
//! One chain step spans one cycle: the battery gains the (quantized)
//! harvested energy, capped at capacity, then loses one quantum per
//! transmit-phase slot, floored at empty. The stationary distribution of
//! this chain is the battery level seen at cycle starts.

use crate::energy_cdf::EnergyCdf;
use crate::error::{Error, Result};
use crate::scenario::{Derived, TrafficModel};

/// What a probability mass function over battery quanta describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfRole {
    /// Energy quanta harvested in one cycle.
    HarvestQuanta,
    /// Transmit-phase slots in one cycle (quanta drained), capped at capacity.
    DrainSlots,
    /// Battery level at the start of a cycle.
    BatteryStart,
    /// Battery level just after the harvest phase.
    PostHarvest,
    /// Stationary distribution of the cycle chain.
    SteadyState,
}

/// Probability mass function over battery quanta `0..=N_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedPmf {
    probs: Vec<f64>,
    role: PmfRole,
}

impl QuantizedPmf {
    /// Validates non-negativity and unit mass (then normalizes away the
    /// last few ulps so downstream sums telescope exactly).
    pub fn new(mut probs: Vec<f64>, role: PmfRole) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter {
                field: "probs",
                reason: "empty probability vector".into(),
            });
        }
        let mut sum = 0.0;
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -1e-9 {
                return Err(Error::numerical(
                    "quantized_pmf",
                    format!("entry {i} is {p}, expected a probability"),
                ));
            }
            // Forgive approximation jitter from saddle-point increments.
            if *p < 0.0 {
                *p = 0.0;
            }
            sum += *p;
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::numerical(
                "quantized_pmf",
                format!("mass sums to {sum}, expected 1"),
            ));
        }
        for p in probs.iter_mut() {
            *p /= sum;
        }
        Ok(QuantizedPmf { probs, role })
    }

    /// Unit mass on a single quantum level.
    pub fn delta(quanta: usize, at: usize, role: PmfRole) -> Self {
        let mut probs = vec![0.0; quanta + 1];
        probs[at.min(quanta)] = 1.0;
        QuantizedPmf { probs, role }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn role(&self) -> PmfRole {
        self.role
    }

    /// Battery capacity in quanta (`len - 1`).
    pub fn quanta(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// Index of the most probable level.
    pub fn mode(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(k, _)| k)
            .unwrap()
    }

    /// Total variation distance to another pmf over the same support.
    pub fn total_variation(&self, other: &QuantizedPmf) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// Running CDF of the pmf.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// Row-stochastic transition matrix of the battery chain, `(N_s+1)²` dense.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    quanta: usize,
    rows: Vec<f64>,
}

impl TransitionMatrix {
    pub fn quanta(&self) -> usize {
        self.quanta
    }

    pub fn entry(&self, from: usize, to: usize) -> f64 {
        self.rows[from * (self.quanta + 1) + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.quanta + 1;
        &self.rows[from * n..(from + 1) * n]
    }

    /// v ← v M (left multiplication by a distribution).
    fn apply_left(&self, v: &[f64], out: &mut [f64]) {
        let n = self.quanta + 1;
        out.fill(0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let row = &self.rows[i * n..(i + 1) * n];
            for (o, &m) in out.iter_mut().zip(row) {
                *o += vi * m;
            }
        }
    }

    /// True when the positive-entry graph is strongly connected.
    fn is_irreducible(&self) -> bool {
        let n = self.quanta + 1;
        let reach = |forward: bool| -> usize {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let edge = if forward { self.entry(u, v) } else { self.entry(v, u) };
                    if edge > 0.0 && !seen[v] {
                        seen[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
            count
        };
        reach(true) == n && reach(false) == n
    }
}

/// Distribution of the energy quanta harvested in one cycle: increments of
/// the continuous CDF at quantum boundaries, with all mass above capacity
/// folded into the top state.
pub fn harvest_quanta_pmf(cdf: &EnergyCdf, d: &Derived) -> Result<QuantizedPmf> {
    let n = d.battery_quanta;
    let e = d.packet_energy;
    let mut probs = Vec::with_capacity(n + 1);
    let mut prev = 0.0; // F(0) clamps to 0
    for k in 1..=n {
        let f = cdf.eval(k as f64 * e)?;
        probs.push(f - prev);
        prev = f;
    }
    probs.push(1.0 - prev);
    QuantizedPmf::new(probs, PmfRole::HarvestQuanta)
}

/// Distribution of the transmit-phase slot count (quanta drained per
/// cycle), capped at battery capacity.
pub fn drain_quanta_pmf(traffic: &TrafficModel, d: &Derived) -> Result<QuantizedPmf> {
    let n = d.battery_quanta;
    let ell2 = 2.0 * d.effective_harvest_distance;
    match traffic {
        TrafficModel::Poisson { .. } => {
            let mut probs = Vec::with_capacity(n + 1);
            probs.push(traffic.spacing_cdf(ell2));
            for k in 1..n {
                let hi = traffic.spacing_cdf(ell2 + k as f64 * d.slot_length);
                let lo = traffic.spacing_cdf(ell2 + (k - 1) as f64 * d.slot_length);
                probs.push(hi - lo);
            }
            probs.push(1.0 - traffic.spacing_cdf(ell2 + (n - 1) as f64 * d.slot_length));
            QuantizedPmf::new(probs, PmfRole::DrainSlots)
        }
        TrafficModel::Platoon { spacing } => {
            let at = if *spacing < ell2 {
                0
            } else {
                let slots = (spacing - ell2).min(n as f64 * d.slot_length) / d.slot_length;
                // Guard exact-ratio inputs against float noise before flooring.
                let slots = if (slots - slots.round()).abs() < 1e-9 { slots.round() } else { slots };
                (slots.floor() as usize).min(n)
            };
            Ok(QuantizedPmf::delta(n, at, PmfRole::DrainSlots))
        }
    }
}

/// Transition matrix of the battery chain from the harvest and drain pmfs.
pub fn transition_matrix(
    harvest: &QuantizedPmf,
    drain: &QuantizedPmf,
) -> Result<TransitionMatrix> {
    let n = harvest.quanta();
    if drain.quanta() != n {
        return Err(Error::InvalidParameter {
            field: "drain",
            reason: format!("support mismatch: {} vs {}", drain.quanta(), n),
        });
    }
    let pe = harvest.probs();
    let pt = drain.probs();
    // Tail sums of the drain pmf: tail[k] = P(drain >= k).
    let mut tail = vec![0.0; n + 2];
    for k in (0..=n).rev() {
        tail[k] = tail[k + 1] + pt[k];
    }

    let width = n + 1;
    let mut rows = vec![0.0; width * width];
    for i in 0..=n {
        let row = &mut rows[i * width..(i + 1) * width];
        for (h, &peh) in pe.iter().enumerate() {
            if peh == 0.0 {
                continue;
            }
            let charged = (i + h).min(n);
            // Drain k quanta: end state charged - k for k < charged, else 0.
            row[0] += peh * tail[charged];
            for j in 1..=charged {
                row[j] += peh * pt[charged - j];
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::numerical(
                "transition_matrix",
                format!("row {i} sums to {sum}"),
            ));
        }
    }
    Ok(TransitionMatrix { quanta: n, rows })
}

/// Stationary distribution of the battery chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub pmf: QuantizedPmf,
    /// Set when the chain is reducible, in which case the returned vector
    /// is the limit of power iteration started from the uniform
    /// distribution rather than a unique stationary law.
    pub reducible: bool,
    pub iterations: u64,
    pub residual: f64,
}

/// Stationary distribution by damped power iteration from the uniform
/// vector, to an L1 residual below `1e-12` on the undamped chain.
pub fn steady_state(m: &TransitionMatrix) -> Result<SteadyState> {
    let n = m.quanta() + 1;
    let mut v = vec![1.0 / n as f64; n];
    let mut moved = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0u64;
    const MAX_ITER: u64 = 1_000_000;
    while iterations < MAX_ITER {
        m.apply_left(&v, &mut moved);
        residual = v.iter().zip(&moved).map(|(a, b)| (a - b).abs()).sum();
        if residual < 1e-12 {
            break;
        }
        // Half-lazy step: same stationary set, kills periodic oscillation.
        let mut sum = 0.0;
        for (vi, mi) in v.iter_mut().zip(&moved) {
            *vi = 0.5 * (*vi + mi);
            sum += *vi;
        }
        for vi in v.iter_mut() {
            *vi /= sum;
        }
        iterations += 1;
    }
    if residual >= 1e-12 {
        return Err(Error::numerical(
            "steady_state",
            format!("power iteration stalled at residual {residual:e} after {iterations} steps"),
        ));
    }
    Ok(SteadyState {
        pmf: QuantizedPmf::new(v, PmfRole::SteadyState)?,
        reducible: !m.is_irreducible(),
        iterations,
        residual,
    })
}

/// Battery distribution just after the harvest phase: convolution of the
/// cycle-start distribution with the harvested quanta, overflow folded
/// into the full state so the mass still sums to one.
pub fn post_harvest_pmf(start: &QuantizedPmf, harvest: &QuantizedPmf) -> Result<QuantizedPmf> {
    let n = start.quanta();
    if harvest.quanta() != n {
        return Err(Error::InvalidParameter {
            field: "harvest",
            reason: format!("support mismatch: {} vs {}", harvest.quanta(), n),
        });
    }
    let mut probs = vec![0.0; n + 1];
    for (j, &pb) in start.probs().iter().enumerate() {
        if pb == 0.0 {
            continue;
        }
        for (h, &pe) in harvest.probs().iter().enumerate() {
            probs[(j + h).min(n)] += pb * pe;
        }
    }
    QuantizedPmf::new(probs, PmfRole::PostHarvest)
}
