//! Throughput, incident RF power density and energy efficiency.
//!
//! The cycle-conditional transmission count is computed three ways: a
//! general quadrature form valid for any spacing distribution, and closed
//! forms specialized to Poisson and platoon traffic. The throughput then
//! averages over the battery chain's stationary distribution.

use crate::battery_chain::{
    drain_quanta_pmf, harvest_quanta_pmf, steady_state, transition_matrix, QuantizedPmf,
};
use crate::energy_cdf::EnergyCdf;
use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, gamma};
use crate::scenario::{Scenario, TrafficModel};

/// Target absolute accuracy of the per-state transmission count, relative
/// to the quantum count. Much tighter than needed so the quadrature never
/// dominates the error budget.
const TX_COUNT_REL_TOL: f64 = 1e-9;

/// Throughput of a scenario, with the per-state diagnostics that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputResult {
    /// Correctly delivered packets per second.
    pub packets_per_s: f64,
    /// Correctly delivered bits per second.
    pub bits_per_s: f64,
    /// Expected transmissions per cycle, conditioned on the quanta at cycle start.
    pub per_state_tx: Vec<f64>,
    /// Stationary battery distribution the average was taken over.
    pub steady_state: QuantizedPmf,
    pub decode_prob: f64,
    pub harvest_distance: f64,
    pub traffic: TrafficModel,
}

/// Result of the energy-efficiency computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyResult {
    /// Average incident RF power density at the device \[W\].
    pub incident_power: f64,
    /// Correctly delivered bits per joule of incident RF energy.
    pub bits_per_joule: f64,
}

/// Expected transmissions in a cycle that starts with `k` quanta, for an
/// arbitrary inter-vehicle spacing CDF.
///
/// Counts from the full-battery maximum and subtracts the two loss terms:
/// cycles cut short by the next vehicle, and cycles starved of harvested
/// energy.
pub fn expected_tx_general<F>(
    k: usize,
    energy: &EnergyCdf,
    spacing_cdf: F,
    s: &Scenario,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let d = &s.derived;
    let n = d.battery_quanta;
    if k > n {
        return Err(Error::domain(
            "expected_tx_general",
            format!("state {k} above capacity {n}"),
        ));
    }
    let ell2 = 2.0 * d.effective_harvest_distance;
    let reach = d.sustainable_gap(k);
    let max_reach = d.max_sustainable_gap();
    let deficit = d.deficit_energy(k);
    let energy_per_meter = d.tx_energy_per_meter;

    let tol = 0.5 * TX_COUNT_REL_TOL * n as f64;
    let cutoff_loss = adaptive_simpson(&|y| spacing_cdf(y), ell2, max_reach, tol * d.slot_length)?
        / d.slot_length;
    let starvation_loss = if deficit > 0.0 {
        adaptive_simpson(
            &|y| {
                let f = energy.eval(y).unwrap_or(f64::NAN);
                f * (1.0 - spacing_cdf(y / energy_per_meter + reach))
            },
            0.0,
            deficit,
            tol * d.packet_energy,
        )? / d.packet_energy
    } else {
        0.0
    };
    Ok((n as f64 - cutoff_loss - starvation_loss).max(0.0))
}

/// Closed form of [`expected_tx_general`] for Poisson arrivals.
pub fn expected_tx_poisson(k: usize, energy: &EnergyCdf, intensity: f64, s: &Scenario) -> Result<f64> {
    let d = &s.derived;
    let n = d.battery_quanta;
    if k > n {
        return Err(Error::domain(
            "expected_tx_poisson",
            format!("state {k} above capacity {n}"),
        ));
    }
    let ell2 = 2.0 * d.effective_harvest_distance;
    let reach = d.sustainable_gap(k);
    let deficit = d.deficit_energy(k);
    let energy_per_meter = d.tx_energy_per_meter;

    let head = ((-intensity * ell2).exp() - (-intensity * reach).exp())
        / (intensity * d.slot_length);
    let tail = if deficit > 0.0 {
        let integral = adaptive_simpson(
            &|y| {
                let f = energy.eval(y).unwrap_or(f64::NAN);
                (1.0 - f) * (-intensity * y / energy_per_meter).exp()
            },
            0.0,
            deficit,
            0.5 * TX_COUNT_REL_TOL * n as f64 * d.packet_energy,
        )?;
        (-intensity * reach).exp() * integral / d.packet_energy
    } else {
        0.0
    };
    Ok((head + tail).max(0.0))
}

/// Closed form of [`expected_tx_general`] for platoon traffic with fixed
/// spacing; four regimes depending on where the spacing falls.
pub fn expected_tx_platoon(k: usize, energy: &EnergyCdf, spacing: f64, s: &Scenario) -> Result<f64> {
    let d = &s.derived;
    let n = d.battery_quanta;
    if k > n {
        return Err(Error::domain(
            "expected_tx_platoon",
            format!("state {k} above capacity {n}"),
        ));
    }
    let ell2 = 2.0 * d.effective_harvest_distance;
    let reach = d.sustainable_gap(k);
    let max_reach = d.max_sustainable_gap();

    if spacing < ell2 {
        // Back-to-back vehicles: the cycle is all harvest phase.
        return Ok(0.0);
    }
    if spacing < reach {
        // Initial charge already covers the whole transmit phase.
        return Ok((spacing - ell2) / d.slot_length);
    }
    let upper = if spacing < max_reach {
        d.tx_energy_per_meter * (spacing - reach)
    } else {
        d.deficit_energy(k)
    };
    let integral = if upper > 0.0 {
        adaptive_simpson(
            &|y| 1.0 - energy.eval(y).unwrap_or(f64::NAN),
            0.0,
            upper,
            0.5 * TX_COUNT_REL_TOL * n as f64 * d.packet_energy,
        )?
    } else {
        0.0
    };
    Ok(k as f64 + integral / d.packet_energy)
}

/// Expected transmissions per cycle using the closed form matching the
/// scenario's traffic model.
pub fn expected_tx(k: usize, energy: &EnergyCdf, s: &Scenario) -> Result<f64> {
    match s.params.traffic {
        TrafficModel::Poisson { intensity } => expected_tx_poisson(k, energy, intensity, s),
        TrafficModel::Platoon { spacing } => expected_tx_platoon(k, energy, spacing, s),
    }
}

/// Spacing CDF with a hard minimum distance and exponential excess, for
/// plugging more realistic traffic into [`expected_tx_general`].
pub fn truncated_exp_spacing_cdf(min_spacing: f64, rate: f64) -> impl Fn(f64) -> f64 {
    move |y: f64| {
        if y <= min_spacing {
            0.0
        } else {
            1.0 - (-rate * (y - min_spacing)).exp()
        }
    }
}

/// Average throughput: decode probability times cycle rate times the
/// stationary average of the per-state transmission count.
pub fn throughput(s: &Scenario, energy: &EnergyCdf) -> Result<ThroughputResult> {
    let d = &s.derived;
    let harvest = harvest_quanta_pmf(energy, d)?;
    let drain = drain_quanta_pmf(&s.params.traffic, d)?;
    let matrix = transition_matrix(&harvest, &drain)?;
    let stationary = steady_state(&matrix)?;

    let per_state_tx: Vec<f64> = (0..=d.battery_quanta)
        .map(|k| expected_tx(k, energy, s))
        .collect::<Result<_>>()?;
    let mean_tx: f64 = stationary
        .pmf
        .probs()
        .iter()
        .zip(&per_state_tx)
        .map(|(p, tx)| p * tx)
        .sum();

    let decode_prob = s.decode_prob();
    let packets_per_s =
        decode_prob * s.params.vehicle_speed / s.params.traffic.mean_spacing() * mean_tx;
    Ok(ThroughputResult {
        packets_per_s,
        bits_per_s: packets_per_s * s.params.packet_bits,
        per_state_tx,
        steady_state: stationary.pmf,
        decode_prob,
        harvest_distance: d.effective_harvest_distance,
        traffic: s.params.traffic,
    })
}

/// Average incident RF power density at the device: one vehicle's path-loss
/// line integral spread over the mean spacing.
pub fn energy_density(s: &Scenario) -> Result<f64> {
    let p = &s.params;
    let alpha = p.path_loss_exp;
    if alpha <= 1.0 {
        return Err(Error::domain(
            "energy_density",
            format!("path-loss exponent {alpha} gives a divergent line integral"),
        ));
    }
    let shape = std::f64::consts::PI.sqrt() * p.road_offset.powf(1.0 - alpha)
        * gamma((alpha - 1.0) / 2.0)
        / gamma(alpha / 2.0);
    Ok(p.vehicle_tx_power / p.traffic.mean_spacing() * shape)
}

/// Bits correctly delivered per joule of incident RF energy.
pub fn efficiency(s: &Scenario, theta: &ThroughputResult) -> Result<EfficiencyResult> {
    let incident_power = energy_density(s)?;
    Ok(EfficiencyResult {
        incident_power,
        bits_per_joule: theta.bits_per_s / incident_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_cdf::{saddle_cdf, segment_rates};
    use crate::scenario::{FadingModel, ScenarioParams};

    fn scenario(traffic: TrafficModel, ell: f64) -> Scenario {
        let mut p = ScenarioParams::baseline();
        p.traffic = traffic;
        p.harvest_distance = ell;
        p.build().unwrap()
    }

    fn cdf_for(s: &Scenario) -> EnergyCdf {
        saddle_cdf(segment_rates(s))
    }

    #[test]
    fn general_form_zero_when_vehicles_back_to_back() {
        let s = scenario(TrafficModel::Poisson { intensity: 0.02 }, 4.0);
        let cdf = cdf_for(&s);
        let ell2 = 2.0 * s.derived.effective_harvest_distance;
        let step = move |y: f64| if y >= ell2 { 1.0 } else { 0.0 };
        for k in [0, 10, 50, 100] {
            let tx = expected_tx_general(k, &cdf, step, &s).unwrap();
            assert!(tx.abs() < 1e-5, "k={k}: {tx}");
        }
    }

    #[test]
    fn general_form_full_battery_drops_starvation_term() {
        let s = scenario(TrafficModel::Poisson { intensity: 0.02 }, 4.0);
        let cdf = cdf_for(&s);
        let n = s.derived.battery_quanta;
        let intensity = 0.02;
        let spacing_cdf = move |y: f64| 1.0 - (-intensity * y).exp();
        let tx = expected_tx_general(n, &cdf, spacing_cdf, &s).unwrap();
        let cutoff = adaptive_simpson(
            &spacing_cdf,
            2.0 * s.derived.effective_harvest_distance,
            s.derived.max_sustainable_gap(),
            1e-12,
        )
        .unwrap() / s.derived.slot_length;
        assert!((tx - (n as f64 - cutoff)).abs() < 1e-6);
    }

    #[test]
    fn general_matches_poisson_closed_form() {
        let s = scenario(TrafficModel::Poisson { intensity: 0.02 }, 4.0);
        let cdf = cdf_for(&s);
        let spacing_cdf = |y: f64| 1.0 - (-0.02 * y).exp();
        for k in [0usize, 25, 50, 75, 100] {
            let general = expected_tx_general(k, &cdf, spacing_cdf, &s).unwrap();
            let closed = expected_tx_poisson(k, &cdf, 0.02, &s).unwrap();
            assert!(
                (general - closed).abs() < 1e-6,
                "k={k}: general {general} vs closed {closed}"
            );
        }
    }

    #[test]
    fn poisson_closed_form_edges() {
        let s = scenario(TrafficModel::Poisson { intensity: 0.02 }, 4.0);
        let cdf = cdf_for(&s);
        // Dense traffic starves every cycle.
        let tx = expected_tx_poisson(50, &cdf, 1e4, &s).unwrap();
        assert!(tx < 1e-12);
        // Full battery: only the cutoff term, in closed form.
        let n = s.derived.battery_quanta;
        let mu = 0.02;
        let ell2 = 2.0 * s.derived.effective_harvest_distance;
        let w = s.derived.max_sustainable_gap();
        let expected =
            ((-mu * ell2).exp() - (-mu * w).exp()) / (mu * s.derived.slot_length);
        let tx = expected_tx_poisson(n, &cdf, mu, &s).unwrap();
        assert!((tx - expected).abs() < 1e-12);
    }

    #[test]
    fn platoon_branches() {
        let s = scenario(TrafficModel::Platoon { spacing: 50.0 }, 4.0);
        let cdf = cdf_for(&s);
        // Spacing below the harvest window: never transmits.
        for k in [0, 30, 100] {
            assert_eq!(expected_tx_platoon(k, &cdf, 7.9, &s).unwrap(), 0.0);
        }
        // Continuity where the initial charge exactly covers the cycle:
        // both middle branches give k.
        let k = 42usize;
        let reach = s.derived.sustainable_gap(k);
        let below = expected_tx_platoon(k, &cdf, reach - 1e-9, &s).unwrap();
        let above = expected_tx_platoon(k, &cdf, reach + 1e-9, &s).unwrap();
        assert!((below - k as f64).abs() < 1e-7);
        assert!((above - k as f64).abs() < 1e-7);
        // Far spacing saturates at branch four.
        let far = expected_tx_platoon(10, &cdf, 1e5, &s).unwrap();
        let cap = expected_tx_platoon(10, &cdf, s.derived.max_sustainable_gap(), &s).unwrap();
        assert!((far - cap).abs() < 1e-9);
    }

    #[test]
    fn expected_tx_monotone_in_charge() {
        for traffic in [
            TrafficModel::Poisson { intensity: 0.02 },
            TrafficModel::Platoon { spacing: 50.0 },
        ] {
            let s = scenario(traffic, 4.0);
            let cdf = cdf_for(&s);
            let mut prev = -1.0;
            for k in (0..=100).step_by(5) {
                let tx = expected_tx(k, &cdf, &s).unwrap();
                assert!(tx >= prev - 1e-9, "tx must not decrease with charge");
                prev = tx;
            }
        }
    }

    #[test]
    fn throughput_zero_without_energy() {
        // Platoon tighter than the harvest window: all-harvest cycles.
        let s = scenario(TrafficModel::Platoon { spacing: 7.0 }, 4.0);
        let cdf = cdf_for(&s);
        let t = throughput(&s, &cdf).unwrap();
        assert_eq!(t.packets_per_s, 0.0);
        assert_eq!(t.bits_per_s, 0.0);
    }

    #[test]
    fn throughput_bounded_by_decode_rate() {
        let s = scenario(TrafficModel::Poisson { intensity: 0.02 }, 4.0);
        let cdf = cdf_for(&s);
        let t = throughput(&s, &cdf).unwrap();
        assert!(t.packets_per_s > 0.0);
        assert!(t.packets_per_s <= t.decode_prob / s.params.slot_duration);
        assert!((t.bits_per_s - t.packets_per_s * 1000.0).abs() < 1e-9);
    }

    #[test]
    fn throughput_invariant_under_energy_rescaling() {
        // Doubling every power and the capacity leaves the decode
        // probability, quantum count and normalized rates unchanged, so the
        // result must match to rounding noise.
        for traffic in [
            TrafficModel::Poisson { intensity: 0.02 },
            TrafficModel::Platoon { spacing: 50.0 },
        ] {
            let s = scenario(traffic, 4.0);
            let mut scaled_params = s.params.clone();
            scaled_params.device_tx_power *= 2.0;
            scaled_params.vehicle_tx_power *= 2.0;
            scaled_params.battery_capacity *= 2.0;
            scaled_params.noise_power *= 2.0;
            let scaled = scaled_params.build().unwrap();

            let a = throughput(&s, &cdf_for(&s)).unwrap();
            let b = throughput(&scaled, &cdf_for(&scaled)).unwrap();
            assert!((a.decode_prob - b.decode_prob).abs() < 1e-15);
            for (x, y) in a.per_state_tx.iter().zip(&b.per_state_tx) {
                assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
            }
            assert!(
                (a.packets_per_s - b.packets_per_s).abs()
                    <= 1e-13 * a.packets_per_s.max(1e-300)
            );
        }
    }

    #[test]
    fn energy_density_baseline() {
        let s = scenario(TrafficModel::Poisson { intensity: 0.02 }, 4.0);
        let eps = energy_density(&s).unwrap();
        // Simplified cubic-path-loss form: 2 Pv / (w^2 E[dv]).
        assert!((eps - 1.6e-4).abs() < 1e-12);
    }

    #[test]
    fn energy_density_gamma_form_matches_quadrature() {
        // Line-process average incident power: mu * Pv * integral of the
        // path-loss kernel along the road.
        for alpha in [2.5, 3.0, 3.5] {
            let mut p = ScenarioParams::baseline();
            p.path_loss_exp = alpha;
            let s = p.build().unwrap();
            let eps = energy_density(&s).unwrap();
            let w = s.params.road_offset;
            let kernel = move |x: f64| (w * w + x * x).powf(-alpha / 2.0);
            let integral =
                adaptive_simpson(&kernel, -1e5, 1e5, 1e-12).unwrap();
            let oracle = 0.02 * s.params.vehicle_tx_power * integral;
            assert!(
                (eps - oracle).abs() < 1e-6 * oracle,
                "alpha={alpha}: {eps} vs {oracle}"
            );
        }
    }

    #[test]
    fn energy_density_rejects_flat_path_loss() {
        // Scenario validation already excludes alpha <= 1, so exercise the
        // operation's own guard directly.
        let mut p = ScenarioParams::baseline();
        p.path_loss_exp = 1.5;
        let mut s = p.build().unwrap();
        s.params.path_loss_exp = 0.9;
        assert!(energy_density(&s).is_err());
    }

    #[test]
    fn efficiency_scales_inversely_with_vehicle_power() {
        let s = scenario(TrafficModel::Platoon { spacing: 50.0 }, 4.0);
        let cdf = cdf_for(&s);
        let t = throughput(&s, &cdf).unwrap();
        let e = efficiency(&s, &t).unwrap();
        assert!(e.bits_per_joule > 0.0);

        let mut doubled = s.params.clone();
        doubled.vehicle_tx_power *= 2.0;
        let s2 = doubled.build().unwrap();
        // Same throughput result by construction of the check.
        let e2 = efficiency(&s2, &t).unwrap();
        assert!((e2.bits_per_joule - e.bits_per_joule / 2.0).abs() < 1e-9 * e.bits_per_joule);

        let zero = ThroughputResult { packets_per_s: 0.0, bits_per_s: 0.0, ..t };
        assert_eq!(efficiency(&s, &zero).unwrap().bits_per_joule, 0.0);
    }

    #[test]
    fn truncated_spacing_cdf_plugs_into_general_form() {
        let s = scenario(TrafficModel::Poisson { intensity: 0.02 }, 4.0);
        let cdf = cdf_for(&s);
        let plain = expected_tx_general(50, &cdf, |y| 1.0 - (-0.02f64 * y).exp(), &s).unwrap();
        let spaced = expected_tx_general(
            50,
            &cdf,
            truncated_exp_spacing_cdf(10.0, 0.02),
            &s,
        )
        .unwrap();
        // A guaranteed minimum gap can only help.
        assert!(spaced >= plain);
    }

    #[test]
    fn rayleigh_variance_exceeds_rician_at_equal_mean() {
        let mut p = ScenarioParams::baseline();
        p.traffic = TrafficModel::Platoon { spacing: 50.0 };
        let rician = segment_rates(&p.build().unwrap());
        p.fading = FadingModel::Rayleigh;
        let rayleigh = segment_rates(&p.build().unwrap());
        assert!((rician.mean() - rayleigh.mean()).abs() < 1e-18);
        assert!(rayleigh.variance() > rician.variance());
    }
}
