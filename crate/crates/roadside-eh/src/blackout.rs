//! Per-cycle black-out probability for platoon traffic.
//!
//! A black-out is the age of information reaching `x` slots, i.e. a window
//! of at least `x - 1` consecutive slots without a decoded packet. The
//! longest silent window in a cycle is the harvest phase plus the trailing
//! energy-outage slots of the previous transmit phase; the decode failures
//! adjacent to that window supply the remainder, which is where the
//! success-run combinatorics below come in.

use crate::battery_chain::QuantizedPmf;
use crate::error::{Error, Result};
use crate::numerics::{binomial, binomial_u128};
use crate::scenario::{Scenario, TrafficModel};

/// A black-out query resolved to slot counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlackoutQuery {
    /// Age-of-information threshold in slots (x), rounded from seconds.
    pub aoi_threshold_slots: u32,
    /// Slots per cycle (spacing over slot length).
    pub cycle_slots: u32,
    /// Harvest-phase slots per cycle.
    pub harvest_slots: u32,
}

impl BlackoutQuery {
    /// Resolves the threshold for a platoon scenario. Poisson traffic is
    /// rejected: the closed form only covers regular spacing.
    pub fn new(s: &Scenario, aoi_threshold_s: f64) -> Result<Self> {
        let TrafficModel::Platoon { spacing } = s.params.traffic else {
            return Err(Error::Unsupported(
                "black-out closed form requires platoon traffic".into(),
            ));
        };
        let x = (aoi_threshold_s / s.params.slot_duration).round();
        if !(x >= 1.0) {
            return Err(Error::InvalidParameter {
                field: "aoi_threshold_s",
                reason: format!("threshold {aoi_threshold_s}s is below one slot"),
            });
        }
        let n = (spacing / s.derived.slot_length).round();
        let harvest_slots = s.derived.harvest_slots as u32;
        if n as u32 <= harvest_slots {
            return Err(Error::InvalidParameter {
                field: "traffic.spacing",
                reason: format!("cycle of {n} slots has no transmit phase"),
            });
        }
        Ok(BlackoutQuery {
            aoi_threshold_slots: x as u32,
            cycle_slots: n as u32,
            harvest_slots,
        })
    }
}

/// Probability that the longest success run is exactly `run_len`, given
/// `successes` hits among `slots` i.i.d. slots. Valid for `run_len >=
/// slots / 2`, where at most one such run fits.
pub fn exact_run_given_count(slots: u32, run_len: u32, successes: u32) -> Result<f64> {
    let (num, den) = exact_run_given_count_rational(slots, run_len, successes)?;
    Ok(num as f64 / den as f64)
}

/// Exact rational form of [`exact_run_given_count`], for oracle-grade
/// comparisons. Returns `(numerator, denominator)` with denominator
/// `C(slots, successes)`.
pub fn exact_run_given_count_rational(
    slots: u32,
    run_len: u32,
    successes: u32,
) -> Result<(u128, u128)> {
    if slots == 0 || run_len == 0 || run_len > slots || successes > slots {
        return Err(Error::domain(
            "exact_run_given_count",
            format!("bad arguments: slots={slots}, run_len={run_len}, successes={successes}"),
        ));
    }
    if 2 * run_len < slots {
        return Err(Error::domain(
            "exact_run_given_count",
            format!("run_len {run_len} below half of {slots}: single-run form does not apply"),
        ));
    }
    if slots > 120 {
        return Err(Error::domain(
            "exact_run_given_count",
            "rational form overflows above 120 slots".to_string(),
        ));
    }
    let (l, j, k) = (slots, run_len, successes);
    if k == l {
        return Ok((u128::from(j == l), 1));
    }
    if j > k {
        return Ok((0, binomial_u128(l as u64, k as u64)));
    }
    // Place the run of j successes: 2 boundary positions need one blocking
    // failure, the l-j-1 interior positions need two.
    let free = |n: i64, r: i64| -> u128 {
        if r < 0 || n < 0 || r > n {
            0
        } else {
            binomial_u128(n as u64, r as u64)
        }
    };
    let li = l as i64;
    let ji = j as i64;
    let ki = k as i64;
    let num = 2 * free(li - ji - 1, ki - ji)
        + (li - ji - 1).max(0) as u128 * free(li - ji - 2, ki - ji);
    Ok((num, binomial_u128(l as u64, k as u64)))
}

/// Probability of at least `run_len` consecutive successes among
/// `2 * run_len` i.i.d. attempts with per-attempt success probability `p`.
pub fn long_run_prob(run_len: u32, p: f64) -> Result<f64> {
    if run_len == 0 {
        return Err(Error::domain("long_run_prob", "run length must be positive"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("long_run_prob", format!("probability {p} out of range")));
    }
    let l = 2 * run_len;
    let mut acc = 0.0;
    for j in run_len..=l {
        for k in j..=l {
            let q = run_prob_f64(l, j, k);
            if q == 0.0 {
                continue;
            }
            let weight = binomial(l as i64, k as i64)
                * p.powi(k as i32)
                * (1.0 - p).powi((l - k) as i32);
            acc += q * weight;
        }
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// `exact_run_given_count` without the rational detour, usable for any
/// window size (binomials switch to log space when large).
fn run_prob_f64(slots: u32, run_len: u32, successes: u32) -> f64 {
    let (l, j, k) = (slots as i64, run_len as i64, successes as i64);
    if k == l {
        return f64::from(j == l);
    }
    if j > k {
        return 0.0;
    }
    let num = 2.0 * binomial(l - j - 1, k - j) + (l - j - 1) as f64 * binomial(l - j - 2, k - j);
    num / binomial(l, k)
}

/// Per-cycle black-out probability, conditioned on the battery level after
/// the harvest phase.
///
/// Certain when the threshold fits inside the harvest phase; otherwise each
/// post-harvest level `i` either cannot bridge the window (probability 1)
/// or leaves a window that only decode failures can extend, covered by
/// [`long_run_prob`] with the failure probability.
pub fn blackout_probability(
    query: &BlackoutQuery,
    post_harvest: &QuantizedPmf,
    decode_prob: f64,
) -> Result<f64> {
    let x = query.aoi_threshold_slots as i64;
    let n = query.cycle_slots as i64;
    if x <= query.harvest_slots as i64 {
        return Ok(1.0);
    }
    let failure = 1.0 - decode_prob;
    let mut acc = 0.0;
    for (i, &p) in post_harvest.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let i = i as i64;
        let conditional = if i <= n - x + 1 {
            1.0
        } else {
            long_run_prob((i - n + x - 1) as u32, failure)?
        };
        acc += p * conditional;
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Full pipeline: steady state, post-harvest distribution, black-out.
pub fn blackout_for_scenario(
    s: &Scenario,
    energy: &crate::energy_cdf::EnergyCdf,
    aoi_threshold_s: f64,
) -> Result<f64> {
    let query = BlackoutQuery::new(s, aoi_threshold_s)?;
    let harvest = crate::battery_chain::harvest_quanta_pmf(energy, &s.derived)?;
    let drain = crate::battery_chain::drain_quanta_pmf(&s.params.traffic, &s.derived)?;
    let matrix = crate::battery_chain::transition_matrix(&harvest, &drain)?;
    let stationary = crate::battery_chain::steady_state(&matrix)?;
    let post = crate::battery_chain::post_harvest_pmf(&stationary.pmf, &harvest)?;
    blackout_probability(&query, &post, s.decode_prob())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_cdf::{saddle_cdf, segment_rates};
    use crate::scenario::ScenarioParams;
    use rand::Rng;
    use rand::SeedableRng;

    /// Longest run of set bits in the low `len` bits of `mask`.
    fn longest_run(mask: u32, len: u32) -> u32 {
        let mut best = 0;
        let mut current = 0;
        for b in 0..len {
            if mask & (1 << b) != 0 {
                current += 1;
                best = best.max(current);
            } else {
                current = 0;
            }
        }
        best
    }

    fn enumerate_exact_run(slots: u32, run_len: u32, successes: u32) -> (u128, u128) {
        let mut hits = 0u128;
        let mut total = 0u128;
        for mask in 0u32..(1 << slots) {
            if mask.count_ones() != successes {
                continue;
            }
            total += 1;
            if longest_run(mask, slots) == run_len {
                hits += 1;
            }
        }
        (hits, total)
    }

    #[test]
    fn run_probability_known_values() {
        assert!((exact_run_given_count(4, 2, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(exact_run_given_count(5, 5, 5).unwrap(), 1.0);
        assert_eq!(exact_run_given_count(5, 3, 5).unwrap(), 0.0);
        // 6 of the 15 placements of 4 successes in 6 slots peak at a 3-run.
        assert!((exact_run_given_count(6, 3, 4).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn run_probability_matches_enumeration_exactly() {
        for slots in 2..=10u32 {
            for run_len in slots.div_ceil(2)..=slots {
                for successes in 0..=slots {
                    let (num, den) =
                        exact_run_given_count_rational(slots, run_len, successes).unwrap();
                    let (onum, oden) = enumerate_exact_run(slots, run_len, successes);
                    // Compare as exact cross-products.
                    assert_eq!(
                        num * oden,
                        onum * den,
                        "L={slots} j={run_len} k={successes}: {num}/{den} vs {onum}/{oden}"
                    );
                }
            }
        }
    }

    #[test]
    fn run_probability_rejects_short_runs() {
        assert!(exact_run_given_count(8, 3, 4).is_err());
        assert!(exact_run_given_count(8, 0, 4).is_err());
    }

    #[test]
    fn long_run_known_values() {
        // One slot either side: at least one success among two attempts.
        assert!((long_run_prob(1, 0.5).unwrap() - 0.75).abs() < 1e-15);
        for w in [1, 2, 5, 9] {
            assert!((long_run_prob(w, 1.0).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(long_run_prob(w, 0.0).unwrap(), 0.0);
        }
        assert!(long_run_prob(0, 0.5).is_err());
        assert!(long_run_prob(1, 1.5).is_err());
    }

    #[test]
    fn long_run_matches_monte_carlo() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let (w, q) = (3u32, 0.3);
        let n = 1_000_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let mut run = 0;
            let mut best = 0;
            for _ in 0..(2 * w) {
                if rng.gen::<f64>() < q {
                    run += 1;
                    best = best.max(run);
                } else {
                    run = 0;
                }
            }
            if best >= w {
                hits += 1;
            }
        }
        let mc = hits as f64 / n as f64;
        let analytic = long_run_prob(w, q).unwrap();
        assert!((mc - analytic).abs() < 0.002, "MC {mc} vs analytic {analytic}");
    }

    #[test]
    fn long_run_monotonicity() {
        for w in 1..8u32 {
            let mut prev = -1.0;
            for dq in 0..=10 {
                let q = dq as f64 / 10.0;
                let v = long_run_prob(w, q).unwrap();
                assert!(v >= prev - 1e-12, "must not decrease in q");
                prev = v;
            }
        }
        for q in [0.2, 0.5, 0.8] {
            let mut prev = 2.0;
            for w in 1..10u32 {
                let v = long_run_prob(w, q).unwrap();
                assert!(v <= prev + 1e-12, "must not increase in run length");
                prev = v;
            }
        }
    }

    fn platoon_scenario(ell: f64, spacing: f64) -> Scenario {
        let mut p = ScenarioParams::baseline();
        p.traffic = TrafficModel::Platoon { spacing };
        p.harvest_distance = ell;
        p.build().unwrap()
    }

    #[test]
    fn certain_blackout_when_harvest_fills_window() {
        // Twenty harvest slots swallow the whole 2 s threshold.
        let s = platoon_scenario(10.0, 50.0);
        let cdf = saddle_cdf(segment_rates(&s));
        let p = blackout_for_scenario(&s, &cdf, 2.0).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn blackout_non_increasing_in_threshold() {
        let s = platoon_scenario(4.0, 50.0);
        let cdf = saddle_cdf(segment_rates(&s));
        let mut prev = 2.0;
        for x_slots in [10, 15, 20, 25, 30, 40, 49] {
            let p = blackout_for_scenario(&s, &cdf, x_slots as f64 * 0.1).unwrap();
            assert!(p <= prev + 1e-12, "P_BO must not grow with the threshold");
            assert!((0.0..=1.0).contains(&p));
            prev = p;
        }
    }

    #[test]
    fn blackout_rejects_poisson() {
        let mut p = ScenarioParams::baseline();
        p.traffic = TrafficModel::Poisson { intensity: 0.02 };
        let s = p.build().unwrap();
        match BlackoutQuery::new(&s, 2.0) {
            Err(Error::Unsupported(_)) => {}
            other => panic!("expected Unsupported, got {other:?}"),
        }
    }

    #[test]
    fn blackout_conditional_structure() {
        let s = platoon_scenario(4.0, 50.0);
        let query = BlackoutQuery::new(&s, 2.0).unwrap();
        assert_eq!(query.aoi_threshold_slots, 20);
        assert_eq!(query.cycle_slots, 50);
        assert_eq!(query.harvest_slots, 8);
        let n = s.derived.battery_quanta;
        // All mass below the bridging level: certain black-out.
        let low = QuantizedPmf::delta(n, 25, crate::battery_chain::PmfRole::PostHarvest);
        assert_eq!(blackout_probability(&query, &low, s.decode_prob()).unwrap(), 1.0);
        // Mass just above: only a decode-failure run can cause it.
        let high = QuantizedPmf::delta(n, 40, crate::battery_chain::PmfRole::PostHarvest);
        let p = blackout_probability(&query, &high, s.decode_prob()).unwrap();
        let w = 40 - 50 + 20 - 1;
        assert!((p - long_run_prob(w as u32, 1.0 - s.decode_prob()).unwrap()).abs() < 1e-15);
    }
}
