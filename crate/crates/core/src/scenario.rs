//! Seeded instance generation: spatial layouts, windows, demands and
//! fees, plus hourly price ingestion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::charging::{Charger, ChargingInstance, Company, Ev};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario parameter: {0}")]
    Parameter(String),
    #[error("price csv line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("price csv: missing hour {0}")]
    MissingHour(usize),
    #[error("no feasible stand-alone schedule for company {company} after {attempts} attempts")]
    Infeasible { company: Company, attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvDistribution {
    Uniform,
    Clustered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargerLayout {
    Uniform,
    Centralized,
}

/// Hourly fees in minor units per energy unit (öre/kWh by default).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub prices: Vec<i64>,
    pub source: String,
}

/// A synthetic weekday profile shaped like a Nordic day-ahead curve.
const EXAMPLE_PRICES: [i64; 24] = [
    52, 48, 45, 44, 46, 58, 95, 140, 165, 150, 120, 105, 98, 92, 96, 110, 138, 172, 185, 160, 125, 98, 80, 65,
];

impl Default for PriceSeries {
    fn default() -> Self {
        PriceSeries {
            prices: EXAMPLE_PRICES.to_vec(),
            source: "builtin-example".into(),
        }
    }
}

fn to_minor(major: f64) -> i64 {
    (major * 100.0).round() as i64
}

/// Parses `hour,price` rows (price in major units per energy unit).
pub fn load_price_series(csv_text: &str) -> Result<PriceSeries, ScenarioError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let mut prices: [Option<i64>; 24] = [None; 24];
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| ScenarioError::Format {
            line,
            message: e.to_string(),
        })?;
        let field = |k: usize| record.get(k).unwrap_or("");
        let hour: usize = field(0).parse().map_err(|_| ScenarioError::Format {
            line,
            message: format!("hour `{}` is not an integer in 0..=23", field(0)),
        })?;
        if hour > 23 {
            return Err(ScenarioError::Format {
                line,
                message: format!("hour {hour} is outside 0..=23"),
            });
        }
        let price: f64 =
            field(1)
                .parse()
                .ok()
                .filter(|p: &f64| p.is_finite())
                .ok_or_else(|| ScenarioError::Format {
                    line,
                    message: format!("price `{}` is not numeric", field(1)),
                })?;
        if price < 0.0 {
            return Err(ScenarioError::Format {
                line,
                message: format!("negative price {price}"),
            });
        }
        if prices[hour].replace(to_minor(price)).is_some() {
            return Err(ScenarioError::Format {
                line,
                message: format!("duplicate hour {hour}"),
            });
        }
    }
    let prices = prices
        .iter()
        .enumerate()
        .map(|(h, p)| p.ok_or(ScenarioError::MissingHour(h)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PriceSeries {
        prices,
        source: "csv".into(),
    })
}

/// Road distance between two planar points, km.
pub trait DistanceProvider {
    fn distance_km(&self, from: [f64; 2], to: [f64; 2]) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl DistanceProvider for Euclidean {
    fn distance_km(&self, from: [f64; 2], to: [f64; 2]) -> f64 {
        (from[0] - to[0]).hypot(from[1] - to[1])
    }
}

/// `w_ij = distance × rate` in minor units, Euclidean distance.
pub fn energy_cost_matrix(evs: &[[f64; 2]], chargers: &[[f64; 2]], sek_per_km: f64) -> Vec<Vec<i64>> {
    energy_cost_matrix_with(&Euclidean, evs, chargers, sek_per_km)
}

pub fn energy_cost_matrix_with(
    provider: &dyn DistanceProvider,
    evs: &[[f64; 2]],
    chargers: &[[f64; 2]],
    sek_per_km: f64,
) -> Vec<Vec<i64>> {
    evs.iter()
        .map(|&e| {
            chargers
                .iter()
                .map(|&c| to_minor(provider.distance_km(e, c) * sek_per_km))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub ev_distribution: EvDistribution,
    pub charger_layout: ChargerLayout,
    pub n_evs: usize,
    pub n_chargers: usize,
    pub area_km: f64,
    pub seed: u64,
    pub horizon: i64,
    pub rental_fee_sek: f64,
    pub vot_sek_per_hour: f64,
    pub travel_sek_per_km: f64,
    pub collab_discount: f64,
    /// Public charging fee the collaborative fee is discounted from.
    pub public_fee_sek_per_kwh: f64,
    pub charge_rate_kw: i64,
    pub window_length_h: i64,
    pub earliest_start_range: [i64; 2],
    /// Session length range, whole intervals.
    pub demand_intervals: [i64; 2],
    pub price_scale: f64,
    pub max_attempts: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            ev_distribution: EvDistribution::Uniform,
            charger_layout: ChargerLayout::Uniform,
            n_evs: 10,
            n_chargers: 10,
            area_km: 10.0,
            seed: 0,
            horizon: 24,
            rental_fee_sek: 1500.0,
            vot_sek_per_hour: 300.0,
            travel_sek_per_km: 6.0,
            collab_discount: 0.5,
            // 1500 SEK buys about 7 hours at 50 kW
            public_fee_sek_per_kwh: 4.29,
            charge_rate_kw: 50,
            window_length_h: 4,
            earliest_start_range: [1, 20],
            demand_intervals: [1, 3],
            price_scale: 1.0,
            max_attempts: 200,
        }
    }
}

impl ScenarioConfig {
    /// Small instances the brute-force oracle can enumerate.
    pub fn desk(seed: u64, n_evs: usize, n_chargers: usize) -> Self {
        Self {
            n_evs,
            n_chargers,
            seed,
            horizon: 6,
            earliest_start_range: [0, 2],
            window_length_h: 4,
            demand_intervals: [1, 2],
            ..Self::default()
        }
    }

    /// `DistEV-DistChar-NumEV-NumCharger`.
    pub fn case_name(&self) -> String {
        let ev = match self.ev_distribution {
            EvDistribution::Uniform => "UniEV",
            EvDistribution::Clustered => "CluEV",
        };
        let ch = match self.charger_layout {
            ChargerLayout::Uniform => "UniChar",
            ChargerLayout::Centralized => "CenChar",
        };
        format!("{ev}-{ch}-{}-{}", self.n_evs, self.n_chargers)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Parameter(m));
        if self.n_evs == 0 || self.n_chargers == 0 {
            return bad("n_evs and n_chargers must be positive".into());
        }
        if !(self.area_km.is_finite() && self.area_km > 0.0) {
            return bad(format!("area_km must be positive, got {}", self.area_km));
        }
        if !(self.collab_discount > 0.0 && self.collab_discount <= 1.0) {
            return bad(format!(
                "collab_discount must be in (0, 1], got {}",
                self.collab_discount
            ));
        }
        if !(self.price_scale.is_finite() && self.price_scale > 0.0) {
            return bad(format!("price_scale must be positive, got {}", self.price_scale));
        }
        if !(1..=24).contains(&self.horizon) {
            return bad(format!(
                "horizon must be in 1..=24 hourly intervals, got {}",
                self.horizon
            ));
        }
        for (name, v) in [
            ("rental_fee_sek", self.rental_fee_sek),
            ("vot_sek_per_hour", self.vot_sek_per_hour),
            ("travel_sek_per_km", self.travel_sek_per_km),
            ("public_fee_sek_per_kwh", self.public_fee_sek_per_kwh),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.charge_rate_kw < 1 || self.window_length_h < 1 {
            return bad("charge_rate_kw and window_length_h must be positive".into());
        }
        let [lo, hi] = self.earliest_start_range;
        if lo < 0 || lo > hi || hi >= self.horizon {
            return bad(format!(
                "earliest_start_range [{lo}, {hi}] must lie within [0, {}]",
                self.horizon - 1
            ));
        }
        let [dlo, dhi] = self.demand_intervals;
        if dlo < 1 || dlo > dhi {
            return bad(format!("demand_intervals [{dlo}, {dhi}] must satisfy 1 <= lo <= hi"));
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive".into());
        }
        Ok(())
    }
}

fn scaled(base: i64, theta: f64) -> i64 {
    (base as f64 * theta).round() as i64
}

fn uniform_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 2] {
    [rng.random_range(lo..=hi), rng.random_range(lo..=hi)]
}

/// Draws a complete instance. Identical configs give identical instances.
pub fn generate_scenario(config: &ScenarioConfig, prices: &PriceSeries) -> Result<ChargingInstance, ScenarioError> {
    config.validate()?;
    if prices.prices.len() != 24 || prices.prices.iter().any(|&p| p < 0) {
        return Err(ScenarioError::Parameter(
            "price series must hold 24 non-negative entries".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let area = config.area_km;
    let companies: Vec<Company> = (0..config.n_evs)
        .map(|i| if i % 2 == 0 { Company::One } else { Company::Two })
        .collect();

    let ev_locations: Vec<[f64; 2]> = match config.ev_distribution {
        EvDistribution::Uniform => (0..config.n_evs).map(|_| uniform_point(&mut rng, 0.0, area)).collect(),
        EvDistribution::Clustered => {
            let sd = area / 10.0;
            let centers = [uniform_point(&mut rng, 0.0, area), uniform_point(&mut rng, 0.0, area)];
            let normal = Normal::new(0.0, sd).expect("positive deviation");
            companies
                .iter()
                .map(|k| {
                    let c = centers[k.index()];
                    loop {
                        let p = [c[0] + normal.sample(&mut rng), c[1] + normal.sample(&mut rng)];
                        if (p[0] - c[0]).hypot(p[1] - c[1]) <= 3.0 * sd {
                            break [p[0].clamp(0.0, area), p[1].clamp(0.0, area)];
                        }
                    }
                })
                .collect()
        }
    };
    let charger_locations: Vec<[f64; 2]> = match config.charger_layout {
        ChargerLayout::Uniform => (0..config.n_chargers)
            .map(|_| uniform_point(&mut rng, 0.0, area))
            .collect(),
        ChargerLayout::Centralized => (0..config.n_chargers)
            .map(|_| uniform_point(&mut rng, area / 4.0, 3.0 * area / 4.0))
            .collect(),
    };

    let rate = config.charge_rate_kw;
    let horizon = config.horizon;
    let mut windows = vec![(0i64, 0i64, 0i64); config.n_evs];
    let draw = |rng: &mut ChaCha8Rng| -> (i64, i64, i64) {
        let [lo, hi] = config.earliest_start_range;
        let e = rng.random_range(lo..=hi);
        let l = (e + config.window_length_h).min(horizon);
        let [dlo, dhi] = config.demand_intervals;
        let d = rng.random_range(dlo..=dhi).min(l - e);
        (e, l, d)
    };
    for w in windows.iter_mut() {
        *w = draw(&mut rng);
    }
    for k in Company::ALL {
        let fleet: Vec<usize> = (0..config.n_evs).filter(|&i| companies[i] == k).collect();
        let mut attempts = 1;
        while !greedy_fits(&fleet, &windows, config.n_chargers) {
            if attempts >= config.max_attempts {
                return Err(ScenarioError::Infeasible { company: k, attempts });
            }
            for &i in &fleet {
                windows[i] = draw(&mut rng);
            }
            attempts += 1;
        }
    }

    let rental = to_minor(config.rental_fee_sek);
    let vot = to_minor(config.vot_sek_per_hour);
    let collab_base = (to_minor(config.public_fee_sek_per_kwh) as f64 * config.collab_discount).round() as i64;
    let theta = config.price_scale;
    let own_row: Vec<i64> = (0..horizon as usize).map(|t| scaled(prices.prices[t], theta)).collect();
    let collab_row: Vec<i64> = vec![scaled(collab_base, theta); horizon as usize];

    let evs = (0..config.n_evs)
        .map(|i| {
            let (e, l, d) = windows[i];
            Ev {
                id: format!("v{}", i + 1),
                company: companies[i],
                earliest: e,
                latest: l,
                demand_min: d * rate,
                demand_max: d * rate,
                value_of_time: vot,
                location: Some(ev_locations[i]),
            }
        })
        .collect();
    let chargers = (0..config.n_chargers)
        .map(|j| Charger {
            id: format!("c{}", j + 1),
            rental_fee: [rental, rental],
            location: Some(charger_locations[j]),
        })
        .collect();
    let instance = ChargingInstance {
        name: config.case_name(),
        minor_per_major: 100,
        horizon,
        evs,
        chargers,
        own_energy_fee: vec![own_row; config.n_chargers],
        collab_energy_fee: vec![collab_row; config.n_chargers],
        charge_rate: vec![vec![rate; config.n_chargers]; config.n_evs],
        travel_cost: energy_cost_matrix(&ev_locations, &charger_locations, config.travel_sek_per_km),
    };
    instance
        .validate()
        .map_err(|e| ScenarioError::Parameter(format!("generated instance rejected: {e}")))?;
    Ok(instance)
}

/// Earliest-deadline placement of one fleet on `chargers` parallel
/// chargers. Sufficient, not necessary, for stand-alone feasibility.
fn greedy_fits(fleet: &[usize], windows: &[(i64, i64, i64)], chargers: usize) -> bool {
    let mut order: Vec<usize> = fleet.to_vec();
    order.sort_by_key(|&i| (windows[i].1, windows[i].0, i));
    let mut free_at = vec![0i64; chargers];
    for i in order {
        let (e, l, d) = windows[i];
        let best = free_at
            .iter()
            .enumerate()
            .map(|(j, &f)| (f.max(e), j))
            .min()
            .expect("at least one charger");
        if best.0 + d > l {
            return false;
        }
        free_at[best.1] = best.0 + d;
    }
    true
}

/// The hand-checkable two-EV, two-charger, four-interval instance.
pub fn canonical_t1() -> ChargingInstance {
    let ev = |id: &str, company| Ev {
        id: id.into(),
        company,
        earliest: 0,
        latest: 4,
        demand_min: 10,
        demand_max: 10,
        value_of_time: 200,
        location: None,
    };
    let charger = |id: &str| Charger {
        id: id.into(),
        rental_fee: [1000, 1000],
        location: None,
    };
    ChargingInstance {
        name: "T1".into(),
        minor_per_major: 100,
        horizon: 4,
        evs: vec![ev("v1", Company::One), ev("v2", Company::Two)],
        chargers: vec![charger("A"), charger("B")],
        own_energy_fee: vec![vec![100; 4]; 2],
        collab_energy_fee: vec![vec![200; 4]; 2],
        charge_rate: vec![vec![5; 2]; 2],
        travel_cost: vec![vec![100, 300], vec![300, 100]],
    }
}
