//! Parameter sweeps, optimal harvest-distance search, regular-vs-Poisson
//! traffic comparison, throughput/black-out trade-off tables, and the
//! pinned experiment recipes behind the `reproduce` CLI subcommand.
//!
//! Sweep output is a pure function of the spec and its seed: per-point
//! simulation seeds are derived from the point index, so rerunning (or
//! reordering the parallel evaluation) cannot change a single byte.

use rayon::prelude::*;

use crate::battery_chain::{harvest_quanta_pmf, post_harvest_pmf};
use crate::blackout::{blackout_probability, BlackoutQuery};
use crate::energy_cdf::{accuracy_metric, empirical_cdf, segment_rates, EnergyCdf};
use crate::error::{Error, Result};
use crate::metrics::{efficiency, energy_density, throughput};
use crate::scenario::{FadingModel, ScenarioParams, TrafficModel};
use crate::simulator::{
    quantization_error, run_simulation, DecodeMode, HarvestSources, RunLength, SimConfig,
};

/// Which metrics a sweep should attach to each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOutput {
    Throughput,
    Efficiency,
    Blackout,
    SimValidation,
}

/// Grid specification. Empty axes fall back to the base scenario's value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioParams,
    /// Harvest distances \[m\]. The experiments keep a 1 m step; finer grids
    /// would outrun realistic vehicle-localization precision.
    pub harvest_distances: Vec<f64>,
    /// Device transmit powers \[W\].
    pub device_powers: Vec<f64>,
    /// Packet sizes \[bit\].
    pub packet_sizes: Vec<f64>,
    pub traffic: Vec<TrafficModel>,
    pub fading: Vec<FadingModel>,
    /// Black-out threshold \[s\], for rows that request it.
    pub aoi_threshold_s: Option<f64>,
    /// Cycles per validation run.
    pub sim_cycles: u64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(base: ScenarioParams) -> Self {
        SweepSpec {
            base,
            harvest_distances: Vec::new(),
            device_powers: Vec::new(),
            packet_sizes: Vec::new(),
            traffic: Vec::new(),
            fading: Vec::new(),
            aoi_threshold_s: None,
            sim_cycles: 100_000,
            seed: 0x5EED,
        }
    }
}

/// One fully evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: ScenarioParams,
    pub harvest_distance: f64,
    pub mean_spacing: f64,
    pub theta_pkt_s: f64,
    pub theta_bits_s: f64,
    pub incident_power: Option<f64>,
    pub bits_per_joule: Option<f64>,
    pub blackout: Option<f64>,
    pub sim_theta_bits_s: Option<f64>,
    pub sim_blackout: Option<f64>,
}

fn grid_or_base<T: Copy>(axis: &[T], base: T) -> Vec<T> {
    if axis.is_empty() {
        vec![base]
    } else {
        axis.to_vec()
    }
}

/// Evaluates the full cartesian grid. Point order is the nested axis order
/// (traffic, fading, power, packet size, harvest distance); rows come back
/// in that order regardless of scheduling.
pub fn evaluate(spec: &SweepSpec, outputs: &[SweepOutput]) -> Result<Vec<SweepRow>> {
    let traffic = grid_or_base(&spec.traffic, spec.base.traffic);
    let fading = grid_or_base(&spec.fading, spec.base.fading);
    let powers = grid_or_base(&spec.device_powers, spec.base.device_tx_power);
    let sizes = grid_or_base(&spec.packet_sizes, spec.base.packet_bits);
    let distances = grid_or_base(&spec.harvest_distances, spec.base.harvest_distance);

    let mut points = Vec::new();
    for &t in &traffic {
        for &f in &fading {
            for &pw in &powers {
                for &sz in &sizes {
                    for &ell in &distances {
                        let mut p = spec.base.clone();
                        p.traffic = t;
                        p.fading = f;
                        p.device_tx_power = pw;
                        p.packet_bits = sz;
                        p.harvest_distance = ell;
                        points.push(p);
                    }
                }
            }
        }
    }

    points
        .into_par_iter()
        .enumerate()
        .map(|(idx, params)| evaluate_point(spec, outputs, idx as u64, params))
        .collect()
}

fn evaluate_point(
    spec: &SweepSpec,
    outputs: &[SweepOutput],
    index: u64,
    params: ScenarioParams,
) -> Result<SweepRow> {
    let scenario = params.build()?;
    let energy = EnergyCdf::analytic_for(&scenario);
    let theta = throughput(&scenario, &energy)?;

    let mut row = SweepRow {
        harvest_distance: scenario.derived.effective_harvest_distance,
        mean_spacing: scenario.params.traffic.mean_spacing(),
        theta_pkt_s: theta.packets_per_s,
        theta_bits_s: theta.bits_per_s,
        incident_power: None,
        bits_per_joule: None,
        blackout: None,
        sim_theta_bits_s: None,
        sim_blackout: None,
        params,
    };

    if outputs.contains(&SweepOutput::Efficiency) {
        let eff = efficiency(&scenario, &theta)?;
        row.incident_power = Some(eff.incident_power);
        row.bits_per_joule = Some(eff.bits_per_joule);
    }
    if outputs.contains(&SweepOutput::Blackout) {
        let qs = spec.aoi_threshold_s.ok_or_else(|| Error::InvalidParameter {
            field: "aoi_threshold_s",
            reason: "black-out output requested without a threshold".into(),
        })?;
        let query = BlackoutQuery::new(&scenario, qs)?;
        let harvest = harvest_quanta_pmf(&energy, &scenario.derived)?;
        let post = post_harvest_pmf(&theta.steady_state, &harvest)?;
        row.blackout = Some(blackout_probability(&query, &post, theta.decode_prob)?);
    }
    if outputs.contains(&SweepOutput::SimValidation) {
        let mut cfg = SimConfig::new(
            scenario.clone(),
            RunLength::Cycles(spec.sim_cycles),
            derive_point_seed(spec.seed, index),
        );
        cfg.harvest_sources = HarvestSources::ClosestOnly;
        cfg.decode_mode = DecodeMode::Bernoulli;
        cfg.aoi_threshold_s = spec.aoi_threshold_s;
        let out = run_simulation(&cfg)?;
        row.sim_theta_bits_s = Some(out.throughput_bits_s);
        if spec.aoi_threshold_s.is_some() {
            row.sim_blackout = Some(out.blackout_rate());
        }
    }
    Ok(row)
}

fn derive_point_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xA24B_AED4_963E_E407));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What [`optimal_harvest_distance`] should optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaxThroughput,
    MinBlackout,
}

/// Result of the harvest-distance grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalEll {
    pub harvest_distance: f64,
    pub value: f64,
    /// Set when even the optimum carries no information (zero throughput,
    /// or certain black-out); the returned point is then arbitrary.
    pub degenerate: bool,
    pub rows: Vec<SweepRow>,
}

/// Grid search over the harvest distance; ties break toward the smaller
/// distance (the first grid point reaching the optimum).
pub fn optimal_harvest_distance(spec: &SweepSpec, objective: Objective) -> Result<OptimalEll> {
    if spec.harvest_distances.is_empty() {
        return Err(Error::InvalidParameter {
            field: "harvest_distances",
            reason: "empty grid".into(),
        });
    }
    let outputs = match objective {
        Objective::MaxThroughput => vec![SweepOutput::Throughput],
        Objective::MinBlackout => vec![SweepOutput::Blackout],
    };
    let rows = evaluate(spec, &outputs)?;
    let metric = |row: &SweepRow| -> f64 {
        match objective {
            Objective::MaxThroughput => row.theta_bits_s,
            Objective::MinBlackout => row.blackout.unwrap_or(1.0),
        }
    };
    let mut best = 0usize;
    for i in 1..rows.len() {
        let better = match objective {
            Objective::MaxThroughput => metric(&rows[i]) > metric(&rows[best]),
            Objective::MinBlackout => metric(&rows[i]) < metric(&rows[best]),
        };
        if better {
            best = i;
        }
    }
    let value = metric(&rows[best]);
    let degenerate = match objective {
        Objective::MaxThroughput => value <= 0.0,
        Objective::MinBlackout => value >= 1.0,
    };
    Ok(OptimalEll {
        harvest_distance: rows[best].harvest_distance,
        value,
        degenerate,
        rows,
    })
}

/// Platoon-vs-Poisson comparison at one mean spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyRow {
    pub mean_spacing: f64,
    pub device_tx_power: f64,
    pub platoon_theta_bits_s: f64,
    pub platoon_bits_per_joule: f64,
    pub platoon_best_ell: f64,
    pub poisson_theta_bits_s: f64,
    pub poisson_bits_per_joule: f64,
    pub poisson_best_ell: f64,
    /// Relative throughput gain of regular spacing over Poisson arrivals.
    pub theta_gain: f64,
    /// Relative efficiency gain of regular spacing over Poisson arrivals.
    pub efficiency_gain: f64,
}

/// Cost of irregular arrivals: for each mean spacing and power level, the
/// throughput-optimal harvest distance is found separately per traffic
/// model and the resulting throughput and efficiency are compared.
pub fn price_of_uncertainty(
    base: &ScenarioParams,
    mean_spacings: &[f64],
    device_powers: &[f64],
    ell_grid: &[f64],
) -> Result<Vec<UncertaintyRow>> {
    let mut rows = Vec::new();
    for &spacing in mean_spacings {
        for &power in device_powers {
            let best = |traffic: TrafficModel| -> Result<(f64, f64, f64)> {
                let mut params = base.clone();
                params.traffic = traffic;
                params.device_tx_power = power;
                let mut spec = SweepSpec::new(params);
                spec.harvest_distances = ell_grid.to_vec();
                let opt = optimal_harvest_distance(&spec, Objective::MaxThroughput)?;
                let at_best = opt
                    .rows
                    .iter()
                    .find(|r| r.harvest_distance == opt.harvest_distance)
                    .expect("optimum comes from the rows");
                let scenario = at_best.params.build()?;
                let upsilon = at_best.theta_bits_s / energy_density(&scenario)?;
                Ok((opt.value, upsilon, opt.harvest_distance))
            };
            let (platoon_theta, platoon_upsilon, platoon_ell) =
                best(TrafficModel::Platoon { spacing })?;
            let (poisson_theta, poisson_upsilon, poisson_ell) =
                best(TrafficModel::Poisson { intensity: 1.0 / spacing })?;
            rows.push(UncertaintyRow {
                mean_spacing: spacing,
                device_tx_power: power,
                platoon_theta_bits_s: platoon_theta,
                platoon_bits_per_joule: platoon_upsilon,
                platoon_best_ell: platoon_ell,
                poisson_theta_bits_s: poisson_theta,
                poisson_bits_per_joule: poisson_upsilon,
                poisson_best_ell: poisson_ell,
                theta_gain: gain(platoon_theta, poisson_theta),
                efficiency_gain: gain(platoon_upsilon, poisson_upsilon),
            });
        }
    }
    Ok(rows)
}

fn gain(regular: f64, irregular: f64) -> f64 {
    if irregular == 0.0 {
        if regular == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        regular / irregular - 1.0
    }
}

/// Throughput/black-out pair at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffRow {
    pub harvest_distance: f64,
    pub device_tx_power: f64,
    pub packet_bits: f64,
    pub theta_bits_s: f64,
    pub blackout: f64,
}

/// Trade-off analysis: the full grid plus the unconstrained optimum and
/// the best point whose black-out probability meets the bound (`None`
/// when the bound is infeasible everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffTable {
    pub rows: Vec<TradeoffRow>,
    pub best_unconstrained: TradeoffRow,
    pub best_constrained: Option<TradeoffRow>,
    pub blackout_bound: f64,
}

/// Pairs throughput with black-out probability over an
/// (ell, power, packet-size) grid and answers the constrained query
/// "maximize throughput subject to a black-out bound".
pub fn tradeoff_table(
    spec: &SweepSpec,
    blackout_bound: f64,
) -> Result<TradeoffTable> {
    if !spec.base.traffic.is_platoon() && spec.traffic.iter().any(|t| !t.is_platoon()) {
        return Err(Error::Unsupported(
            "trade-off table requires platoon traffic".into(),
        ));
    }
    let rows = evaluate(spec, &[SweepOutput::Throughput, SweepOutput::Blackout])?;
    let rows: Vec<TradeoffRow> = rows
        .into_iter()
        .map(|r| TradeoffRow {
            harvest_distance: r.harvest_distance,
            device_tx_power: r.params.device_tx_power,
            packet_bits: r.params.packet_bits,
            theta_bits_s: r.theta_bits_s,
            blackout: r.blackout.expect("blackout requested"),
        })
        .collect();
    let best = |filter: &dyn Fn(&TradeoffRow) -> bool| -> Option<TradeoffRow> {
        rows.iter()
            .filter(|r| filter(r))
            .max_by(|a, b| a.theta_bits_s.partial_cmp(&b.theta_bits_s).unwrap())
            .cloned()
    };
    let best_unconstrained = best(&|_| true).ok_or_else(|| Error::InvalidParameter {
        field: "spec",
        reason: "empty trade-off grid".into(),
    })?;
    let best_constrained = best(&|r| r.blackout <= blackout_bound);
    Ok(TradeoffTable { rows, best_unconstrained, best_constrained, blackout_bound })
}

// ---------------------------------------------------------------------------
// Experiment recipes
// ---------------------------------------------------------------------------

/// Plot-ready data behind one `reproduce` recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

fn num(v: f64) -> String {
    format!("{v:.6e}")
}

const DB_6: f64 = 3.981_071_705_534_972; // 10^(6/10)
const DB_10: f64 = 10.0;

fn ell_grid_1_to(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64).collect()
}

fn power_grid() -> Vec<f64> {
    vec![20e-6, 40e-6, 60e-6, 80e-6, 100e-6]
}

/// Known recipe identifiers, in figure order.
pub const RECIPES: &[&str] = &[
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
];

/// Builds the data for one pinned experiment recipe.
///
/// `with_sim` attaches slot-simulator markers where the recipe has them;
/// analytic-only runs are much faster. All randomness derives from `seed`.
pub fn reproduce_figure(id: &str, with_sim: bool, seed: u64) -> Result<FigureData> {
    match id {
        "fig2" => fig2_cdf_accuracy(seed),
        "fig3" => fig3_quantization_error(seed),
        "fig4" => fig4_poisson_throughput(with_sim, seed),
        "fig5" => fig5_platoon_throughput(with_sim, seed),
        "fig6" => fig6_power_poisson(with_sim, seed),
        "fig7" => fig7_power_platoon(with_sim, seed),
        "fig8" => fig8_packet_size(),
        "fig9" => fig9_price_of_uncertainty(),
        "fig10" => fig10_blackout_vs_ell(with_sim, seed),
        "fig11" => fig11_blackout_vs_packet(),
        "fig12" => fig12_channel_models(),
        other => Err(Error::InvalidParameter {
            field: "figure",
            reason: format!("unknown recipe `{other}`; known: {RECIPES:?}"),
        }),
    }
}

/// Saddle-point CDF accuracy against a 10^6-draw Monte Carlo reference,
/// swept over the harvest distance for two Rice factors.
fn fig2_cdf_accuracy(seed: u64) -> Result<FigureData> {
    let combos: Vec<(usize, f64, f64)> = [DB_6, DB_10]
        .iter()
        .flat_map(|&k| (1..=10usize).map(move |ell| (ell, ell as f64, k)))
        .collect();
    let rows: Vec<Vec<String>> = combos
        .par_iter()
        .map(|&(idx, ell, k_factor)| -> Result<Vec<String>> {
            let mut p = ScenarioParams::baseline();
            p.harvest_distance = ell;
            p.fading = FadingModel::Rician { k_factor };
            let s = p.build()?;
            let rates = segment_rates(&s);
            let analytic = crate::energy_cdf::saddle_cdf(rates.clone());
            let reference = empirical_cdf(
                &rates,
                FadingModel::Rician { k_factor },
                1_000_000,
                derive_point_seed(seed, idx as u64),
            )?;
            let report =
                accuracy_metric(&analytic, &reference, (0.001, 0.5), (0.5, 0.999), 100)?;
            let kappa_db = 10.0 * k_factor.log10();
            Ok(vec![num(ell), format!("{kappa_db:.0}"), num(report.cdf), num(report.ccdf)])
        })
        .collect::<Result<_>>()?;
    Ok(FigureData {
        name: "fig2".into(),
        columns: vec!["ell_m", "kappa_dB", "acc_cdf", "acc_ccdf"],
        rows,
    })
}

/// Throughput error from whole-quantum energy storage, paired simulations.
fn fig3_quantization_error(seed: u64) -> Result<FigureData> {
    let traffics = [
        ("platoon", TrafficModel::Platoon { spacing: 50.0 }),
        ("poisson", TrafficModel::Poisson { intensity: 0.02 }),
    ];
    let grid: Vec<(usize, &str, TrafficModel, f64)> = traffics
        .iter()
        .flat_map(|&(tag, t)| (1..=8usize).map(move |ell| (ell, tag, t, ell as f64)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(idx, tag, traffic, ell)| -> Result<Vec<String>> {
            let mut p = ScenarioParams::baseline();
            p.traffic = traffic;
            p.harvest_distance = ell;
            let cfg = SimConfig::new(
                p.build()?,
                RunLength::Cycles(100_000),
                derive_point_seed(seed, idx as u64 + 100),
            );
            let err = quantization_error(&cfg)?;
            Ok(vec![tag.to_string(), num(ell), num(err)])
        })
        .collect::<Result<_>>()?;
    Ok(FigureData {
        name: "fig3".into(),
        columns: vec!["traffic", "ell_m", "rel_error"],
        rows,
    })
}

fn throughput_sweep_rows(
    spec: &SweepSpec,
    with_sim: bool,
    extra: &dyn Fn(&SweepRow) -> Vec<String>,
) -> Result<Vec<Vec<String>>> {
    let mut outputs = vec![SweepOutput::Throughput];
    if with_sim {
        outputs.push(SweepOutput::SimValidation);
    }
    let rows = evaluate(spec, &outputs)?;
    Ok(rows
        .iter()
        .map(|r| {
            let mut cells = extra(r);
            cells.push(num(r.harvest_distance));
            cells.push(num(r.theta_bits_s / 1000.0));
            cells.push(
                r.sim_theta_bits_s
                    .map(|v| num(v / 1000.0))
                    .unwrap_or_default(),
            );
            cells
        })
        .collect())
}

/// Poisson throughput over the harvest distance for three intensities.
fn fig4_poisson_throughput(with_sim: bool, seed: u64) -> Result<FigureData> {
    let mut spec = SweepSpec::new(ScenarioParams::baseline());
    spec.seed = seed;
    spec.traffic = [25.0, 50.0, 100.0]
        .iter()
        .map(|&d| TrafficModel::Poisson { intensity: 1.0 / d })
        .collect();
    spec.harvest_distances = ell_grid_1_to(10);
    let rows = throughput_sweep_rows(&spec, with_sim, &|r| vec![num(r.mean_spacing)])?;
    Ok(FigureData {
        name: "fig4".into(),
        columns: vec!["mean_dv_m", "ell_m", "theta_kbit_s", "theta_sim_kbit_s"],
        rows,
    })
}

/// Platoon throughput over the harvest distance, two battery sizes.
fn fig5_platoon_throughput(with_sim: bool, seed: u64) -> Result<FigureData> {
    let mut rows = Vec::new();
    for &capacity in &[400e-6, 200e-6] {
        let mut base = ScenarioParams::baseline();
        base.battery_capacity = capacity;
        let mut spec = SweepSpec::new(base);
        spec.seed = seed ^ (capacity.to_bits());
        spec.traffic = [25.0, 50.0, 100.0]
            .iter()
            .map(|&d| TrafficModel::Platoon { spacing: d })
            .collect();
        spec.harvest_distances = ell_grid_1_to(10);
        let chunk = throughput_sweep_rows(&spec, with_sim, &|r| {
            vec![num(r.mean_spacing), num(capacity * 1e6)]
        })?;
        rows.extend(chunk);
    }
    Ok(FigureData {
        name: "fig5".into(),
        columns: vec!["d0_m", "G_uJ", "ell_m", "theta_kbit_s", "theta_sim_kbit_s"],
        rows,
    })
}

fn power_sweep(traffic: TrafficModel, with_sim: bool, seed: u64) -> Result<Vec<Vec<String>>> {
    let mut base = ScenarioParams::baseline();
    base.packet_bits = 2000.0;
    base.traffic = traffic;
    let mut spec = SweepSpec::new(base);
    spec.seed = seed;
    spec.device_powers = power_grid();
    spec.harvest_distances = ell_grid_1_to(10);
    throughput_sweep_rows(&spec, with_sim, &|r| {
        vec![num(r.params.device_tx_power * 1e6)]
    })
}

/// Transmit-power sweep, sparse traffic (2 kbit packets, 50 m mean gap).
fn fig6_power_poisson(with_sim: bool, seed: u64) -> Result<FigureData> {
    let rows = power_sweep(TrafficModel::Poisson { intensity: 0.02 }, with_sim, seed)?;
    Ok(FigureData {
        name: "fig6".into(),
        columns: vec!["Pt_uW", "ell_m", "theta_kbit_s", "theta_sim_kbit_s"],
        rows,
    })
}

/// Transmit-power sweep, platoon traffic (2 kbit packets, 50 m spacing).
fn fig7_power_platoon(with_sim: bool, seed: u64) -> Result<FigureData> {
    let rows = power_sweep(TrafficModel::Platoon { spacing: 50.0 }, with_sim, seed)?;
    Ok(FigureData {
        name: "fig7".into(),
        columns: vec!["Pt_uW", "ell_m", "theta_kbit_s", "theta_sim_kbit_s"],
        rows,
    })
}

/// Packet-size/power grid at three harvest distances, platoon 50 m.
fn fig8_packet_size() -> Result<FigureData> {
    let mut base = ScenarioParams::baseline();
    base.traffic = TrafficModel::Platoon { spacing: 50.0 };
    let mut spec = SweepSpec::new(base);
    spec.device_powers = power_grid();
    spec.packet_sizes = (1..=6).map(|k| k as f64 * 1000.0).collect();
    spec.harvest_distances = vec![2.0, 4.0, 6.0];
    let rows = evaluate(&spec, &[SweepOutput::Throughput])?
        .iter()
        .map(|r| {
            vec![
                num(r.params.device_tx_power * 1e6),
                num(r.params.packet_bits),
                num(r.harvest_distance),
                num(r.theta_bits_s / 1000.0),
            ]
        })
        .collect();
    Ok(FigureData {
        name: "fig8".into(),
        columns: vec!["Pt_uW", "S_bit", "ell_m", "theta_kbit_s"],
        rows,
    })
}

/// Efficiency of platoon vs Poisson traffic at matched mean spacing, each
/// at its own throughput-optimal harvest distance (2 kbit packets).
fn fig9_price_of_uncertainty() -> Result<FigureData> {
    let mut base = ScenarioParams::baseline();
    base.packet_bits = 2000.0;
    let spacings = [25.0, 50.0, 75.0, 100.0, 150.0, 200.0];
    let rows = price_of_uncertainty(&base, &spacings, &power_grid(), &ell_grid_1_to(10))?
        .iter()
        .map(|r| {
            vec![
                num(r.mean_spacing),
                num(r.device_tx_power * 1e6),
                num(r.platoon_theta_bits_s / 1000.0),
                num(r.poisson_theta_bits_s / 1000.0),
                num(r.platoon_bits_per_joule),
                num(r.poisson_bits_per_joule),
                num(r.theta_gain),
                num(r.efficiency_gain),
            ]
        })
        .collect();
    Ok(FigureData {
        name: "fig9".into(),
        columns: vec![
            "mean_dv_m",
            "Pt_uW",
            "theta_platoon_kbit_s",
            "theta_poisson_kbit_s",
            "upsilon_platoon_bit_J",
            "upsilon_poisson_bit_J",
            "theta_gain",
            "upsilon_gain",
        ],
        rows,
    })
}

/// Black-out probability over the harvest distance for five power levels
/// (platoon 50 m, 2 kbit packets, 2 s threshold).
fn fig10_blackout_vs_ell(with_sim: bool, seed: u64) -> Result<FigureData> {
    let mut base = ScenarioParams::baseline();
    base.traffic = TrafficModel::Platoon { spacing: 50.0 };
    base.packet_bits = 2000.0;
    let mut spec = SweepSpec::new(base);
    spec.seed = seed;
    spec.device_powers = power_grid();
    spec.harvest_distances = ell_grid_1_to(10);
    spec.aoi_threshold_s = Some(2.0);
    let mut outputs = vec![SweepOutput::Throughput, SweepOutput::Blackout];
    if with_sim {
        outputs.push(SweepOutput::SimValidation);
    }
    let rows = evaluate(&spec, &outputs)?
        .iter()
        .map(|r| {
            vec![
                num(r.params.device_tx_power * 1e6),
                num(r.harvest_distance),
                num(r.blackout.unwrap_or(f64::NAN)),
                r.sim_blackout.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(FigureData {
        name: "fig10".into(),
        columns: vec!["Pt_uW", "ell_m", "P_BO_analytic", "P_BO_sim"],
        rows,
    })
}

/// Black-out probability against packet size (platoon 50 m, 2 s threshold).
fn fig11_blackout_vs_packet() -> Result<FigureData> {
    let mut base = ScenarioParams::baseline();
    base.traffic = TrafficModel::Platoon { spacing: 50.0 };
    let mut spec = SweepSpec::new(base);
    spec.device_powers = power_grid();
    spec.packet_sizes = (1..=6).map(|k| k as f64 * 1000.0).collect();
    spec.harvest_distances = vec![2.0, 4.0, 6.0];
    spec.aoi_threshold_s = Some(2.0);
    let rows = evaluate(&spec, &[SweepOutput::Throughput, SweepOutput::Blackout])?
        .iter()
        .map(|r| {
            vec![
                num(r.params.device_tx_power * 1e6),
                num(r.params.packet_bits),
                num(r.harvest_distance),
                num(r.blackout.unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    Ok(FigureData {
        name: "fig11".into(),
        columns: vec!["Pt_uW", "S_bit", "ell_m", "P_BO_analytic"],
        rows,
    })
}

/// Channel-model comparison: throughput and black-out across fading models
/// (platoon 50 m, 2 kbit packets, two power levels).
fn fig12_channel_models() -> Result<FigureData> {
    let mut base = ScenarioParams::baseline();
    base.traffic = TrafficModel::Platoon { spacing: 50.0 };
    base.packet_bits = 2000.0;
    let mut spec = SweepSpec::new(base);
    spec.device_powers = vec![60e-6, 100e-6];
    spec.fading = vec![
        FadingModel::Rayleigh,
        FadingModel::Rician { k_factor: DB_6 },
        FadingModel::Rician { k_factor: DB_10 },
    ];
    spec.harvest_distances = ell_grid_1_to(10);
    spec.aoi_threshold_s = Some(2.0);
    let rows = evaluate(&spec, &[SweepOutput::Throughput, SweepOutput::Blackout])?
        .iter()
        .map(|r| {
            let fading = match r.params.fading {
                FadingModel::Rayleigh => "rayleigh".to_string(),
                FadingModel::Rician { k_factor } => {
                    format!("rician_{:.0}dB", 10.0 * k_factor.log10())
                }
            };
            vec![
                num(r.params.device_tx_power * 1e6),
                fading,
                num(r.harvest_distance),
                num(r.theta_bits_s / 1000.0),
                num(r.blackout.unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    Ok(FigureData {
        name: "fig12".into(),
        columns: vec!["Pt_uW", "fading", "ell_m", "theta_kbit_s", "P_BO_analytic"],
        rows,
    })
}
