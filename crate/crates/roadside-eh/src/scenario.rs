//! Physical/protocol parameters, validation, and derived quantities.
//!
//! All values are SI (meters, seconds, watts, joules, hertz, bits). Unit
//! conversions for presentation (µW, kbit, µJ, dB) belong to the CLI layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Small-scale fading model of the vehicle-to-device channel.
///
/// `Rician { k_factor: 0.0 }` is distributionally identical to `Rayleigh`:
/// the power gain has unit mean in both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FadingModel {
    /// Rician fading with linear (not dB) K-factor.
    Rician { k_factor: f64 },
    Rayleigh,
}

impl FadingModel {
    /// Linear K-factor; 0 for Rayleigh.
    pub fn k_factor(&self) -> f64 {
        match self {
            FadingModel::Rician { k_factor } => *k_factor,
            FadingModel::Rayleigh => 0.0,
        }
    }
}

/// Vehicle arrival model along the lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrafficModel {
    /// Poisson arrivals with `intensity` vehicles per meter (exponential gaps).
    Poisson { intensity: f64 },
    /// Platooning / congested traffic: constant inter-vehicle spacing in meters.
    Platoon { spacing: f64 },
}

impl TrafficModel {
    /// Mean inter-vehicle distance in meters.
    pub fn mean_spacing(&self) -> f64 {
        match self {
            TrafficModel::Poisson { intensity } => 1.0 / intensity,
            TrafficModel::Platoon { spacing } => *spacing,
        }
    }

    /// CDF of the inter-vehicle distance.
    pub fn spacing_cdf(&self, y: f64) -> f64 {
        match self {
            TrafficModel::Poisson { intensity } => {
                if y <= 0.0 {
                    0.0
                } else {
                    1.0 - (-intensity * y).exp()
                }
            }
            TrafficModel::Platoon { spacing } => {
                if y >= *spacing {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn is_platoon(&self) -> bool {
        matches!(self, TrafficModel::Platoon { .. })
    }
}

/// Raw parameter record, as ingested from a config file or CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Distance device → access point \[m\].
    pub ap_distance: f64,
    /// Distance device → lane center \[m\].
    pub road_offset: f64,
    /// Slot duration \[s\].
    pub slot_duration: f64,
    /// Vehicle speed \[m/s\].
    pub vehicle_speed: f64,
    /// Device transmit power \[W\].
    pub device_tx_power: f64,
    /// Vehicle transmit power \[W\].
    pub vehicle_tx_power: f64,
    /// Noise power at the access point \[W\].
    pub noise_power: f64,
    /// Path-loss exponent (must exceed 1 for a finite energy density).
    pub path_loss_exp: f64,
    /// Harvesting efficiency in (0, 1].
    pub harvest_efficiency: f64,
    /// Device → access point channel bandwidth \[Hz\].
    pub bandwidth: f64,
    /// Packet size \[bit\].
    pub packet_bits: f64,
    /// Battery capacity \[J\]; snapped down to a whole number of quanta.
    pub battery_capacity: f64,
    pub fading: FadingModel,
    pub traffic: TrafficModel,
    /// Harvest distance \[m\], measured along the road from the device's
    /// projection; snapped so the harvest phase covers an even slot count.
    pub harvest_distance: f64,
}

impl ScenarioParams {
    /// Baseline parameter set used throughout the experiments: 200 m link,
    /// 5 m road offset, 100 ms slots, 10 m/s traffic, 40 µW / 100 mW powers,
    /// −90 dBm noise, α = 3, η = 0.5, 15 kHz, 1 kbit packets, 400 µJ battery,
    /// Rician fading with a 10 dB K-factor.
    pub fn baseline() -> Self {
        ScenarioParams {
            ap_distance: 200.0,
            road_offset: 5.0,
            slot_duration: 0.1,
            vehicle_speed: 10.0,
            device_tx_power: 40e-6,
            vehicle_tx_power: 0.1,
            noise_power: 1e-12,
            path_loss_exp: 3.0,
            harvest_efficiency: 0.5,
            bandwidth: 15e3,
            packet_bits: 1000.0,
            battery_capacity: 400e-6,
            fading: FadingModel::Rician { k_factor: 10.0 },
            traffic: TrafficModel::Poisson { intensity: 0.02 },
            harvest_distance: 4.0,
        }
    }

    /// Validates the record and computes the derived quantities.
    pub fn build(&self) -> Result<Scenario> {
        Scenario::build(self.clone())
    }
}

/// Quantities derived from the raw parameters; pure functions of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    /// Energy drained by one packet transmission \[J\] (one battery quantum).
    pub packet_energy: f64,
    /// Battery capacity in quanta; effective capacity is `battery_quanta * packet_energy`.
    pub battery_quanta: usize,
    /// Effective battery capacity after snapping \[J\].
    pub effective_capacity: f64,
    /// Number of harvest-phase slots (even by construction).
    pub harvest_slots: usize,
    /// Effective harvest distance after snapping \[m\].
    pub effective_harvest_distance: f64,
    /// Distance covered by a vehicle in one slot \[m\].
    pub slot_length: f64,
    /// Energy the device spends per meter of vehicle travel while
    /// transmitting continuously \[J/m\].
    pub tx_energy_per_meter: f64,
    /// True if the battery capacity was rounded down to a whole quantum count.
    pub capacity_snapped: bool,
    /// True if the harvest distance was moved to the nearest even slot count.
    pub harvest_distance_snapped: bool,
}

impl Derived {
    /// Largest inter-vehicle gap a cycle can bridge given `k` quanta at the
    /// start: twice the harvest distance plus one slot length per quantum \[m\].
    pub fn sustainable_gap(&self, k: usize) -> f64 {
        self.effective_harvest_distance * 2.0 + k as f64 * self.slot_length
    }

    /// Gap a full battery can bridge \[m\].
    pub fn max_sustainable_gap(&self) -> f64 {
        self.sustainable_gap(self.battery_quanta)
    }

    /// Energy missing from a battery holding `k` quanta \[J\].
    pub fn deficit_energy(&self, k: usize) -> f64 {
        (self.battery_quanta - k) as f64 * self.packet_energy
    }
}

/// Validated parameter set plus derived quantities. Immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: ScenarioParams,
    pub derived: Derived,
}

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidParameter {
            field,
            reason: format!("must be strictly positive and finite, got {value}"),
        });
    }
    Ok(())
}

/// Rounds `x` to the nearest integer when within a small relative tolerance,
/// otherwise leaves it alone. Protects exact-ratio inputs from float noise.
fn snap_to_integer(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest
    } else {
        x
    }
}

impl Scenario {
    /// Validates every field and derives slot geometry and battery quanta.
    ///
    /// The battery is snapped *down* to a whole number of quanta
    /// (under-provisioning is the conservative direction), and the harvest
    /// distance is snapped to the nearest even slot count, since the
    /// harvest phase is split symmetrically around the device.
    pub fn build(params: ScenarioParams) -> Result<Self> {
        require_positive("ap_distance", params.ap_distance)?;
        require_positive("road_offset", params.road_offset)?;
        require_positive("slot_duration", params.slot_duration)?;
        require_positive("vehicle_speed", params.vehicle_speed)?;
        require_positive("device_tx_power", params.device_tx_power)?;
        require_positive("vehicle_tx_power", params.vehicle_tx_power)?;
        require_positive("noise_power", params.noise_power)?;
        require_positive("bandwidth", params.bandwidth)?;
        require_positive("packet_bits", params.packet_bits)?;
        require_positive("battery_capacity", params.battery_capacity)?;
        require_positive("harvest_distance", params.harvest_distance)?;
        if !(params.path_loss_exp.is_finite() && params.path_loss_exp > 1.0) {
            return Err(Error::InvalidParameter {
                field: "path_loss_exp",
                reason: format!("must exceed 1, got {}", params.path_loss_exp),
            });
        }
        if !(params.harvest_efficiency > 0.0 && params.harvest_efficiency <= 1.0) {
            return Err(Error::InvalidParameter {
                field: "harvest_efficiency",
                reason: format!("must lie in (0, 1], got {}", params.harvest_efficiency),
            });
        }
        match params.fading {
            FadingModel::Rician { k_factor } => {
                if !(k_factor.is_finite() && k_factor >= 0.0) {
                    return Err(Error::InvalidParameter {
                        field: "fading.k_factor",
                        reason: format!("must be >= 0, got {k_factor}"),
                    });
                }
            }
            FadingModel::Rayleigh => {}
        }
        match params.traffic {
            TrafficModel::Poisson { intensity } => require_positive("traffic.intensity", intensity)?,
            TrafficModel::Platoon { spacing } => require_positive("traffic.spacing", spacing)?,
        }

        let packet_energy = params.device_tx_power * params.slot_duration;
        let slot_length = params.vehicle_speed * params.slot_duration;

        let quanta_ratio = snap_to_integer(params.battery_capacity / packet_energy);
        let battery_quanta = quanta_ratio.floor() as usize;
        if battery_quanta < 1 {
            return Err(Error::InvalidParameter {
                field: "battery_capacity",
                reason: format!(
                    "holds less than one packet's energy ({packet_energy} J per packet)"
                ),
            });
        }
        let effective_capacity = battery_quanta as f64 * packet_energy;
        let capacity_snapped = quanta_ratio.fract() != 0.0;

        // Harvest phase covers 2*ell of road, one slot_length per slot; force
        // an even slot count so the phase splits symmetrically around the device.
        let slots_ratio = snap_to_integer(2.0 * params.harvest_distance / slot_length);
        let half_slots = snap_to_integer(slots_ratio / 2.0).round();
        let harvest_slots = (2.0 * half_slots) as usize;
        if harvest_slots == 0 {
            return Err(Error::EmptyHarvestPhase {
                ell: params.harvest_distance,
                slot_len: slot_length,
            });
        }
        let effective_harvest_distance = harvest_slots as f64 * slot_length / 2.0;
        let harvest_distance_snapped = (effective_harvest_distance - params.harvest_distance).abs()
            > 1e-9 * params.harvest_distance;

        Ok(Scenario {
            derived: Derived {
                packet_energy,
                battery_quanta,
                effective_capacity,
                harvest_slots,
                effective_harvest_distance,
                slot_length,
                tx_energy_per_meter: params.device_tx_power / params.vehicle_speed,
                capacity_snapped,
                harvest_distance_snapped,
            },
            params,
        })
    }

    /// Probability that a packet sent to the access point is decoded, under
    /// Rayleigh fading on the uplink and the Shannon-capacity threshold.
    pub fn decode_prob(&self) -> f64 {
        let p = &self.params;
        let snr_scale = p.noise_power * p.ap_distance.powf(p.path_loss_exp) / p.device_tx_power;
        let rate_threshold = (p.packet_bits / (p.bandwidth * p.slot_duration)).exp2() - 1.0;
        (-snr_scale * rate_threshold).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn baseline() -> Scenario {
        ScenarioParams::baseline().build().unwrap()
    }

    #[test]
    fn baseline_derived_quantities() {
        let s = baseline();
        assert!((s.derived.packet_energy - 4e-6).abs() < 1e-18);
        assert_eq!(s.derived.battery_quanta, 100);
        assert_eq!(s.derived.harvest_slots, 8);
        assert!((s.derived.slot_length - 1.0).abs() < 1e-12);
        assert!((s.derived.tx_energy_per_meter - 4e-6).abs() < 1e-18);
        assert!(!s.derived.capacity_snapped);
        assert!(!s.derived.harvest_distance_snapped);
        assert!((s.derived.max_sustainable_gap() - 108.0).abs() < 1e-9);
        assert!((s.derived.deficit_energy(40) - 240e-6).abs() < 1e-15);
    }

    #[test]
    fn battery_snaps_down() {
        let mut p = ScenarioParams::baseline();
        p.battery_capacity = 403e-6; // 100.75 quanta
        let s = p.build().unwrap();
        assert_eq!(s.derived.battery_quanta, 100);
        assert!(s.derived.capacity_snapped);
        assert!((s.derived.effective_capacity - 400e-6).abs() < 1e-15);
    }

    #[test]
    fn harvest_distance_snaps_to_even_slots() {
        let mut p = ScenarioParams::baseline();
        p.harvest_distance = 4.4; // 8.8 nominal slots -> L = 8
        let s = p.build().unwrap();
        assert_eq!(s.derived.harvest_slots, 8);
        assert!(s.derived.harvest_distance_snapped);
        assert!((s.derived.effective_harvest_distance - 4.0).abs() < 1e-12);

        p.harvest_distance = 4.6; // 9.2 nominal slots -> L = 10
        let s = p.build().unwrap();
        assert_eq!(s.derived.harvest_slots, 10);
        assert!((s.derived.effective_harvest_distance - 5.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_harvest_distance_is_rejected() {
        let mut p = ScenarioParams::baseline();
        p.harvest_distance = 0.2; // 0.4 nominal slots -> L = 0
        match p.build() {
            Err(Error::EmptyHarvestPhase { .. }) => {}
            other => panic!("expected EmptyHarvestPhase, got {other:?}"),
        }
    }

    #[test]
    fn invalid_parameters_name_the_field() {
        let mut p = ScenarioParams::baseline();
        p.harvest_efficiency = 0.0;
        match p.build() {
            Err(Error::InvalidParameter { field, .. }) => {
                assert_eq!(field, "harvest_efficiency")
            }
            other => panic!("expected InvalidParameter, got {other:?}"),
        }

        let mut p = ScenarioParams::baseline();
        p.noise_power = -1.0;
        match p.build() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "noise_power"),
            other => panic!("expected InvalidParameter, got {other:?}"),
        }

        let mut p = ScenarioParams::baseline();
        p.path_loss_exp = 1.0;
        assert!(p.build().is_err());
    }

    #[test]
    fn decode_prob_baseline_value() {
        // exp(-0.2 * (2^(2/3) - 1)) evaluated directly.
        let s = baseline();
        let expected = (-0.2 * ((2.0f64).powf(2.0 / 3.0) - 1.0)).exp();
        assert!((s.decode_prob() - expected).abs() < 1e-15);
        assert!((s.decode_prob() - 0.8891).abs() < 5e-4);
    }

    #[test]
    fn decode_prob_monte_carlo_cross_check() {
        // Fraction of unit-mean exponential channel gains that clear the
        // Shannon threshold, against the closed form.
        let s = baseline();
        let p = &s.params;
        let snr_scale = p.device_tx_power / (p.noise_power * p.ap_distance.powi(3));
        let threshold = (p.packet_bits / (p.bandwidth * p.slot_duration)).exp2() - 1.0;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let gain = -(1.0 - rng.gen::<f64>()).ln();
            if snr_scale * gain >= threshold {
                hits += 1;
            }
        }
        let estimate = hits as f64 / n as f64;
        assert!(
            (estimate - s.decode_prob()).abs() < 1.5e-3,
            "MC {estimate} vs analytic {}",
            s.decode_prob()
        );
    }

    #[test]
    fn decode_prob_high_power_large_packet() {
        let mut p = ScenarioParams::baseline();
        p.device_tx_power = 80e-6;
        p.packet_bits = 4000.0;
        let s = p.build().unwrap();
        let expected = (-0.1 * ((2.0f64).powf(8.0 / 3.0) - 1.0)).exp();
        assert!((s.decode_prob() - expected).abs() < 1e-12);
        assert!((s.decode_prob() - 0.5857).abs() < 1e-4);
    }

    #[test]
    fn decode_prob_tiny_packet_tends_to_one() {
        let mut p = ScenarioParams::baseline();
        p.packet_bits = 1e-12;
        let s = p.build().unwrap();
        assert!((s.decode_prob() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decode_prob_monotonicity() {
        let base = ScenarioParams::baseline();
        let eval = |f: &dyn Fn(&mut ScenarioParams)| {
            let mut p = base.clone();
            f(&mut p);
            p.build().unwrap().decode_prob()
        };
        // Increasing in device power and bandwidth.
        let powers = [10e-6, 20e-6, 40e-6, 80e-6, 160e-6];
        for w in powers.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(eval(&|p| p.device_tx_power = a) < eval(&|p| p.device_tx_power = b));
        }
        for w in [5e3, 10e3, 15e3, 30e3].windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(eval(&|p| p.bandwidth = a) < eval(&|p| p.bandwidth = b));
        }
        // Decreasing in packet size, link distance and noise power.
        for w in [500.0, 1000.0, 2000.0, 4000.0].windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(eval(&|p| p.packet_bits = a) > eval(&|p| p.packet_bits = b));
        }
        for w in [100.0, 200.0, 400.0].windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(eval(&|p| p.ap_distance = a) > eval(&|p| p.ap_distance = b));
        }
        for w in [1e-13, 1e-12, 1e-11].windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(eval(&|p| p.noise_power = a) > eval(&|p| p.noise_power = b));
        }
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let p = ScenarioParams::baseline();
        let a = p.build().unwrap();
        let b = p.build().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rician_zero_matches_rayleigh_k_factor() {
        assert_eq!(FadingModel::Rician { k_factor: 0.0 }.k_factor(), 0.0);
        assert_eq!(FadingModel::Rayleigh.k_factor(), 0.0);
    }
}
