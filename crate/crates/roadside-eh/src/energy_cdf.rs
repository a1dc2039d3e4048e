//! Distribution of the energy harvested over one cycle.
//!
//! During a harvest phase the vehicle crosses a road segment of length
//! twice the harvest distance, split into `L` per-slot segments. The energy
//! collected per segment is an exponentially weighted channel-gain draw, so
//! the cycle total is a weighted sum of unit-mean gains. Three evaluable
//! CDFs are provided:
//!
//! * [`saddle_cdf`] — Lugannani–Rice saddle-point approximation, valid for
//!   Rician fading with any K-factor (including 0);
//! * [`rayleigh_cdf`] — exact closed form for Rayleigh fading: the
//!   half-cycle sum is hypoexponential and the full cycle is its
//!   self-convolution;
//! * [`empirical_cdf`] — seeded Monte Carlo oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{self, normal_cdf, normal_pdf};
use crate::scenario::{FadingModel, Scenario};

/// Internal seed and size for the degenerate-rate fallback of [`rayleigh_cdf`].
const FALLBACK_SEED: u64 = 0x0D06_F00D;
const FALLBACK_DRAWS: usize = 200_000;

/// Exponential rates of the per-segment harvested energy, one per slot of
/// the harvest phase. Rate `i` is the reciprocal mean energy collected
/// while the vehicle crosses segment `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRates {
    /// Per-segment rates \[1/J\], symmetric about the midpoint and strictly
    /// decreasing on the first half (the vehicle approaches the device).
    pub rates: Vec<f64>,
    /// Rates scaled by `2 (K + 1)` for the noncentral chi-square form used
    /// by the Rician moment generating function.
    pub rician_rates: Vec<f64>,
    /// Linear Rice K-factor the scaled rates were built with (0 = Rayleigh).
    pub k_factor: f64,
}

/// Rates for the scenario's harvest phase, evaluated at segment midpoints.
///
/// The mirror symmetry of the two half-phases is exact by construction.
pub fn segment_rates(s: &Scenario) -> SegmentRates {
    let d = &s.derived;
    let p = &s.params;
    let half = d.harvest_slots / 2;
    let scale = p.harvest_efficiency * p.vehicle_tx_power * p.slot_duration;
    let k_factor = p.fading.k_factor();

    let mut rates = Vec::with_capacity(d.harvest_slots);
    for i in 0..half {
        let along_road = (i as f64 + 0.5) * d.slot_length - d.effective_harvest_distance;
        let dist_sq = p.road_offset * p.road_offset + along_road * along_road;
        rates.push(dist_sq.powf(p.path_loss_exp / 2.0) / scale);
    }
    for i in (0..half).rev() {
        let mirrored = rates[i];
        rates.push(mirrored);
    }
    let rician_rates = rates.iter().map(|l| 2.0 * (k_factor + 1.0) * l).collect();
    SegmentRates { rates, rician_rates, k_factor }
}

impl SegmentRates {
    /// Mean per-cycle harvested energy \[J\].
    pub fn mean(&self) -> f64 {
        self.rates.iter().map(|l| 1.0 / l).sum()
    }

    /// Variance of the per-cycle harvested energy \[J²\].
    pub fn variance(&self) -> f64 {
        let k = self.k_factor;
        let scale = (1.0 + 2.0 * k) / ((1.0 + k) * (1.0 + k));
        scale * self.rates.iter().map(|l| 1.0 / (l * l)).sum::<f64>()
    }

    /// Third cumulant of the per-cycle harvested energy \[J³\].
    pub fn third_cumulant(&self) -> f64 {
        let k = self.k_factor;
        let scale = 2.0 * (1.0 + 3.0 * k) / (1.0 + k).powi(3);
        scale * self.rates.iter().map(|l| 1.0 / (l * l * l)).sum::<f64>()
    }

    /// Upper end of the open domain of the moment generating function.
    pub fn cgf_domain_end(&self) -> f64 {
        0.5 * self.rician_rates.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Cumulant generating function of the per-cycle energy and its first two
/// derivatives, at argument `t` (must satisfy `t < cgf_domain_end()`).
///
/// The second derivative is positive on the whole domain, as convexity of
/// a CGF requires.
pub fn cgf_and_derivatives(rates: &SegmentRates, t: f64) -> Result<(f64, f64, f64)> {
    let end = rates.cgf_domain_end();
    if !(t < end) {
        return Err(Error::domain(
            "cgf_and_derivatives",
            format!("t = {t} outside MGF domain (must be < {end})"),
        ));
    }
    let k = rates.k_factor;
    let (mut k0, mut k1, mut k2) = (0.0, 0.0, 0.0);
    for &lh in &rates.rician_rates {
        let gap = lh - 2.0 * t;
        k0 += (lh / gap).ln() + 2.0 * k * t / gap;
        k1 += 2.0 / gap * (1.0 + k * lh / gap);
        k2 += 4.0 / (gap * gap) * (1.0 + 2.0 * k * lh / gap);
    }
    Ok((k0, k1, k2))
}

/// Saddle-point (Lugannani–Rice) CDF of the per-cycle harvested energy.
#[derive(Debug, Clone)]
pub struct SaddleCdf {
    rates: SegmentRates,
    mean: f64,
    variance: f64,
    third_cumulant: f64,
    domain_end: f64,
}

/// Relative window around the mean where the formula's removable
/// singularity is patched by its quadratic expansion.
const MEAN_PATCH_REL: f64 = 1e-6;

impl SaddleCdf {
    fn new(rates: SegmentRates) -> Self {
        let mean = rates.mean();
        let variance = rates.variance();
        let third_cumulant = rates.third_cumulant();
        let domain_end = rates.cgf_domain_end();
        SaddleCdf { rates, mean, variance, third_cumulant, domain_end }
    }

    /// Limit of the approximation at the mean plus a first-order term, used
    /// inside the patch window where the saddle point crosses zero.
    fn near_mean(&self, x: f64) -> f64 {
        let sigma = self.variance.sqrt();
        let skew_shift = self.third_cumulant / (6.0 * self.variance * sigma);
        0.5 + normal_pdf(0.0) * (skew_shift + (x - self.mean) / sigma)
    }

    fn eval(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if (x - self.mean).abs() <= MEAN_PATCH_REL * self.mean {
            return Ok(self.near_mean(x).clamp(0.0, 1.0));
        }

        // Saddle point: K'(z) = x. K' is increasing from 0+ (z -> -inf) to
        // +inf (z -> domain end), so the root is bracketed by sign of x - mean.
        let d1 = |t: f64| {
            let mut acc = 0.0;
            let k = self.rates.k_factor;
            for &lh in &self.rates.rician_rates {
                let gap = lh - 2.0 * t;
                acc += 2.0 / gap * (1.0 + k * lh / gap);
            }
            acc
        };
        let d2 = |t: f64| {
            let mut acc = 0.0;
            let k = self.rates.k_factor;
            for &lh in &self.rates.rician_rates {
                let gap = lh - 2.0 * t;
                acc += 4.0 / (gap * gap) * (1.0 + 2.0 * k * lh / gap);
            }
            acc
        };

        let (lo, hi) = if x >= self.mean {
            (0.0, self.domain_end * (1.0 - 1e-13))
        } else {
            let mut lo = -self.domain_end;
            let mut grow = 0;
            while d1(lo) > x {
                lo *= 2.0;
                grow += 1;
                if grow > 200 {
                    return Err(Error::numerical(
                        "saddle_cdf",
                        format!("could not bracket saddle point for x = {x:e}"),
                    ));
                }
            }
            (lo, 0.0)
        };
        let ftol = 1e-11 * x.max(self.mean);
        let xtol = 1e-14 * (hi - lo).abs().max(self.domain_end);
        let root = numerics::newton_bisect(|t| d1(t) - x, d2, lo, hi, xtol, ftol)?;

        let (k0, _, k2) = cgf_and_derivatives(&self.rates, root)?;
        let exponent = (root * x - k0).max(0.0);
        let u = (2.0 * exponent).sqrt().copysign(root);
        let v = root * k2.sqrt();
        // 1/u - 1/v cancels catastrophically as both vanish at the mean;
        // hand over to the expansion well before that happens.
        if u.abs() < 1e-3 || v.abs() < 1e-3 {
            return Ok(self.near_mean(x).clamp(0.0, 1.0));
        }
        let f = normal_cdf(u) + normal_pdf(u) * (1.0 / u - 1.0 / v);
        Ok(f.clamp(0.0, 1.0))
    }
}

/// Exact Rayleigh-fading CDF: self-convolution of the half-phase
/// hypoexponential distribution, reduced to exponential-family terms.
#[derive(Debug, Clone)]
pub struct HypoexpCdf {
    /// Distinct rates of the first half-phase.
    half_rates: Vec<f64>,
    /// Per-rate coefficients of `exp(-rate x)` and `x exp(-rate x)`.
    coeff_const: Vec<f64>,
    coeff_linear: Vec<f64>,
    mean: f64,
}

impl HypoexpCdf {
    /// Builds the closed form; `None` when the rates are too close for the
    /// partial-fraction coefficients to be trustworthy.
    fn new(rates: &SegmentRates) -> Option<Self> {
        let half = &rates.rates[..rates.rates.len() / 2];
        let n = half.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if (half[i] - half[j]).abs() <= 1e-9 * half[i].abs() {
                    return None;
                }
            }
        }

        // ln A = sum of 2 ln(rate) over the half; coefficients are assembled
        // in log space to keep intermediates in range for long phases.
        let ln_a: f64 = half.iter().map(|l| 2.0 * l.ln()).sum();
        let mut ln_gap_prod = vec![0.0f64; n]; // ln |Lambda_i|
        let mut gap_sign = vec![1.0f64; n];
        for i in 0..n {
            for k in 0..n {
                if k != i {
                    let d = half[k] - half[i];
                    ln_gap_prod[i] += d.abs().ln();
                    if d < 0.0 {
                        gap_sign[i] = -gap_sign[i];
                    }
                }
            }
        }

        let mut coeff_const = vec![0.0f64; n];
        let mut coeff_linear = vec![0.0f64; n];
        for m in 0..n {
            // Pair terms: antisymmetric weights A / ((r_i - r_m) L_i L_m).
            let mut pair_sum = 0.0;
            for i in 0..n {
                if i == m {
                    continue;
                }
                let d = half[i] - half[m];
                let magnitude = (ln_a - d.abs().ln() - ln_gap_prod[i] - ln_gap_prod[m]).exp();
                pair_sum += magnitude * d.signum() * gap_sign[i] * gap_sign[m];
            }
            let self_weight = (ln_a - 2.0 * (half[m].ln() + ln_gap_prod[m])).exp();
            coeff_const[m] = 2.0 * pair_sum / half[m] + self_weight;
            coeff_linear[m] = self_weight * half[m];
        }

        // F(0) must vanish, i.e. the constant coefficients sum to 1. A large
        // residual means the partial fractions cancelled badly.
        let residual = (coeff_const.iter().sum::<f64>() - 1.0).abs();
        if residual > 1e-6 {
            return None;
        }

        Some(HypoexpCdf {
            half_rates: half.to_vec(),
            coeff_const,
            coeff_linear,
            mean: rates.mean(),
        })
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let mut tail = 0.0;
        for (m, &rate) in self.half_rates.iter().enumerate() {
            let e = (-rate * x).exp();
            tail += (self.coeff_const[m] + self.coeff_linear[m] * x) * e;
        }
        (1.0 - tail).clamp(0.0, 1.0)
    }
}

/// Sorted-sample empirical CDF.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
    mean: f64,
}

impl EmpiricalCdf {
    fn from_samples(mut samples: Vec<f64>) -> Self {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        EmpiricalCdf { samples, mean }
    }

    fn eval(&self, x: f64) -> f64 {
        let below = self.samples.partition_point(|s| *s <= x);
        below as f64 / self.samples.len() as f64
    }

    /// Order statistics, ascending.
    pub fn sorted_samples(&self) -> &[f64] {
        &self.samples
    }

    /// Empirical quantile at level `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.samples.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.samples[idx]
    }
}

/// Evaluable CDF of the per-cycle harvested energy.
#[derive(Debug, Clone)]
pub enum EnergyCdf {
    SaddleRician(SaddleCdf),
    HypoexpRayleigh(HypoexpCdf),
    Empirical(EmpiricalCdf),
}

impl EnergyCdf {
    /// F(x), clamped to [0, 1]; 0 for x <= 0.
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            EnergyCdf::SaddleRician(c) => c.eval(x),
            EnergyCdf::HypoexpRayleigh(c) => Ok(c.eval(x)),
            EnergyCdf::Empirical(c) => Ok(c.eval(x)),
        }
    }

    /// Mean per-cycle energy: analytic for the model-based variants,
    /// sample mean for the empirical one.
    pub fn mean(&self) -> f64 {
        match self {
            EnergyCdf::SaddleRician(c) => c.mean,
            EnergyCdf::HypoexpRayleigh(c) => c.mean,
            EnergyCdf::Empirical(c) => c.mean,
        }
    }

    pub fn provenance(&self) -> &'static str {
        match self {
            EnergyCdf::SaddleRician(_) => "saddle_rician",
            EnergyCdf::HypoexpRayleigh(_) => "hypoexp_rayleigh",
            EnergyCdf::Empirical(_) => "empirical",
        }
    }

    /// Analytic CDF matching the scenario's fading model: saddle-point for
    /// Rician, exact hypoexponential for Rayleigh.
    pub fn analytic_for(s: &Scenario) -> EnergyCdf {
        let rates = segment_rates(s);
        match s.params.fading {
            FadingModel::Rician { .. } => saddle_cdf(rates),
            FadingModel::Rayleigh => rayleigh_cdf(&rates),
        }
    }
}

/// Saddle-point CDF for the given rates (Rician, any K-factor >= 0).
pub fn saddle_cdf(rates: SegmentRates) -> EnergyCdf {
    EnergyCdf::SaddleRician(SaddleCdf::new(rates))
}

/// Exact Rayleigh-fading CDF. Falls back to a seeded empirical CDF when
/// rates nearly coincide and the closed form would be numerically garbage.
pub fn rayleigh_cdf(rates: &SegmentRates) -> EnergyCdf {
    match HypoexpCdf::new(rates) {
        Some(c) => EnergyCdf::HypoexpRayleigh(c),
        None => empirical_cdf(rates, FadingModel::Rayleigh, FALLBACK_DRAWS, FALLBACK_SEED)
            .expect("fallback draw count is above the minimum"),
    }
}

/// Monte Carlo CDF from `n_draws` independent cycles; deterministic given
/// `seed`. Requires at least 10^4 draws.
pub fn empirical_cdf(
    rates: &SegmentRates,
    fading: FadingModel,
    n_draws: usize,
    seed: u64,
) -> Result<EnergyCdf> {
    if n_draws < 10_000 {
        return Err(Error::InvalidParameter {
            field: "n_draws",
            reason: format!("need at least 10^4 draws for a usable CDF, got {n_draws}"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n_draws)
        .map(|_| draw_cycle_energy(&rates.rates, fading, &mut rng))
        .collect();
    Ok(EnergyCdf::Empirical(EmpiricalCdf::from_samples(samples)))
}

/// Unit-mean channel power gain draw for the given fading model.
pub(crate) fn channel_power_gain<R: Rng>(fading: FadingModel, rng: &mut R) -> f64 {
    match fading {
        FadingModel::Rayleigh => -(1.0 - rng.gen::<f64>()).ln(),
        FadingModel::Rician { k_factor } => {
            let offset = (2.0 * k_factor).sqrt();
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            ((z1 + offset) * (z1 + offset) + z2 * z2) / (2.0 * (k_factor + 1.0))
        }
    }
}

/// One cycle's harvested energy: sum of per-segment channel gains weighted
/// by the reciprocal rates.
pub(crate) fn draw_cycle_energy<R: Rng>(rates: &[f64], fading: FadingModel, rng: &mut R) -> f64 {
    rates
        .iter()
        .map(|l| channel_power_gain(fading, rng) / l)
        .sum()
}

/// Relative-deviation report between an approximate CDF and a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyReport {
    /// Max of |F - F̂| / F̂ over the lower band of the CDF.
    pub cdf: f64,
    /// Max of |(1-F) - (1-F̂)| / (1-F̂) over the upper band.
    pub ccdf: f64,
}

impl AccuracyReport {
    pub fn worst(&self) -> f64 {
        self.cdf.max(self.ccdf)
    }
}

/// Maximum relative deviation of `approx` from `reference`, measured on the
/// CDF where the reference lies in `cdf_band` and on the complementary CDF
/// where it lies in `ccdf_band`. Deviation points are the reference
/// quantiles of `levels_per_band` evenly spaced levels in each band.
pub fn accuracy_metric(
    approx: &EnergyCdf,
    reference: &EnergyCdf,
    cdf_band: (f64, f64),
    ccdf_band: (f64, f64),
    levels_per_band: usize,
) -> Result<AccuracyReport> {
    if !(cdf_band.0 < cdf_band.1 && ccdf_band.0 < ccdf_band.1) || levels_per_band < 2 {
        return Err(Error::domain("accuracy_metric", "empty evaluation band"));
    }
    let quantile = |p: f64| -> Result<f64> {
        match reference {
            EnergyCdf::Empirical(e) => Ok(e.quantile(p)),
            _ => {
                // Invert by bisection on a bracket expanded from the mean.
                let mut lo = 0.0;
                let mut hi = reference.mean().max(f64::MIN_POSITIVE);
                while reference.eval(hi)? < p {
                    hi *= 2.0;
                    if hi > reference.mean() * 1e9 {
                        return Err(Error::numerical("accuracy_metric", "quantile bracket"));
                    }
                }
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if reference.eval(mid)? < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    };

    let mut worst_cdf = 0.0f64;
    let mut worst_ccdf = 0.0f64;
    for i in 0..levels_per_band {
        let frac = i as f64 / (levels_per_band - 1) as f64;

        let level = cdf_band.0 + frac * (cdf_band.1 - cdf_band.0);
        let x = quantile(level)?;
        let reference_v = reference.eval(x)?;
        if reference_v > 0.0 {
            let dev = (approx.eval(x)? - reference_v).abs() / reference_v;
            worst_cdf = worst_cdf.max(dev);
        }

        let level = ccdf_band.0 + frac * (ccdf_band.1 - ccdf_band.0);
        let x = quantile(level)?;
        let reference_tail = 1.0 - reference.eval(x)?;
        if reference_tail > 0.0 {
            let dev = ((1.0 - approx.eval(x)?) - reference_tail).abs() / reference_tail;
            worst_ccdf = worst_ccdf.max(dev);
        }
    }
    Ok(AccuracyReport { cdf: worst_cdf, ccdf: worst_ccdf })
}
