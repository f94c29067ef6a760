//! Bundled instances: the Black Saturday case study and a two-asset toy.
//!
//! The case study keeps the published impact times and requirement vectors. Road travel
//! times are not available, so coordinates (km around the depot) and values are drawn from
//! a fixed seed and travel is straight-line at 60 km/h.

use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg32;
use serde_json::{json, Map};

use crate::error::Result;
use crate::firespread::{derive_windows, WindowParams};
use crate::instance::{
    Asset, Fleet, Instance, Meta, Point, Scenario, ScenarioSet, TimeWindows, TravelMatrix, Window,
};
use crate::io::{normalize_value, quantize};

pub const CASE_SEED: u64 = 2009;
pub const CASE_RADIUS_KM: f64 = 30.0;

/// Hours after noon; 6:30pm.
pub const CASE_STAGING_TIME: f64 = 6.5;
/// The second change is taken one hour after the staging time.
pub const CASE_SECOND_CHANGE: f64 = 7.5;

/// (requirements, stage-1 impact, scenario-1 impact, scenario-2 impact); 0 means not impacted.
pub const BLACK_SATURDAY: [([u32; 3], f64, f64, f64); 25] = [
    ([2, 1, 0], 0.0, 0.0, 7.0),
    ([2, 0, 1], 3.0, 0.0, 0.0),
    ([1, 0, 2], 0.0, 7.5, 7.5),
    ([0, 2, 1], 4.0, 0.0, 0.0),
    ([1, 0, 2], 0.0, 10.0, 0.0),
    ([1, 1, 1], 0.0, 7.0, 7.0),
    ([2, 1, 0], 4.0, 0.0, 0.0),
    ([2, 0, 1], 0.0, 0.0, 8.0),
    ([1, 2, 0], 0.0, 11.5, 0.0),
    ([1, 0, 2], 0.0, 8.0, 8.0),
    ([1, 0, 2], 5.0, 0.0, 0.0),
    ([1, 2, 0], 5.5, 0.0, 0.0),
    ([1, 0, 2], 6.0, 0.0, 0.0),
    ([0, 2, 1], 0.0, 0.0, 7.0),
    ([2, 1, 0], 0.0, 8.0, 8.0),
    ([2, 0, 1], 6.5, 0.0, 0.0),
    ([2, 0, 1], 4.0, 0.0, 0.0),
    ([2, 0, 1], 0.0, 7.0, 0.0),
    ([2, 0, 1], 0.0, 12.0, 0.0),
    ([1, 2, 0], 0.0, 0.0, 8.0),
    ([1, 2, 1], 0.0, 10.0, 10.0),
    ([1, 2, 1], 0.0, 11.0, 0.0),
    ([1, 2, 1], 0.0, 11.0, 11.0),
    ([1, 2, 1], 0.0, 11.5, 0.0),
    ([2, 0, 1], 0.0, 9.5, 0.0),
];

fn unit(rng: &mut Pcg32) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Impact rows in the layout expected by `derive_windows`: stage-1 impacts are shared by
/// both scenarios.
fn impact_rows() -> Vec<Vec<Option<f64>>> {
    BLACK_SATURDAY
        .iter()
        .map(|&(_, s1, a, b)| {
            if s1 > 0.0 {
                vec![Some(s1), Some(s1)]
            } else {
                vec![(a > 0.0).then_some(a), (b > 0.0).then_some(b)]
            }
        })
        .collect()
}

pub fn black_saturday() -> Result<Instance> {
    let mut rng = Pcg32::seed_from_u64(CASE_SEED);
    let n = BLACK_SATURDAY.len();
    let mut points = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        // uniform in the disc
        let r = CASE_RADIUS_KM * unit(&mut rng).sqrt();
        let theta = 2.0 * std::f64::consts::PI * unit(&mut rng);
        points.push(Point::new(quantize(r * theta.cos()), quantize(r * theta.sin())));
        values.push(10 + ((unit(&mut rng) * 91.0) as u32).min(90));
    }
    let depot = Point::new(0.0, 0.0);
    let speed = 60.0;
    let params = WindowParams {
        tw1: 1.0,
        tw2: 1.0,
        service: 0.5,
    };
    let derived = derive_windows(&impact_rows(), CASE_STAGING_TIME, params);
    let qw = |w: Option<Window>| w.map(|w| Window::new(quantize(w.open), quantize(w.close)));
    let stage1: Vec<Option<Window>> = derived.stage1.into_iter().map(qw).collect();
    let stage2: Vec<Vec<Option<Window>>> = derived
        .stage2
        .into_iter()
        .map(|l| l.into_iter().map(qw).collect())
        .collect();

    let mut locations = vec![depot];
    locations.extend(&points);
    locations.push(depot);
    let travel = TravelMatrix::uniform(3, n + 2, |i, j| quantize(locations[i].dist(locations[j]) / speed));
    let latest = stage1
        .iter()
        .chain(stage2.iter().flatten())
        .flatten()
        .map(|w| w.close)
        .fold(CASE_STAGING_TIME, f64::max);
    let horizon = quantize(latest + travel.max_time());

    let mut meta_params = Map::new();
    meta_params.insert("source".into(), json!("Black Saturday case study, synthesized coordinates"));
    meta_params.insert("coordinate_seed".into(), json!(CASE_SEED));
    meta_params.insert("radius_km".into(), json!(CASE_RADIUS_KM));
    meta_params.insert("speed".into(), json!(speed));
    meta_params.insert("tw1".into(), json!(params.tw1));
    meta_params.insert("tw2".into(), json!(params.tw2));
    meta_params.insert("service".into(), json!(params.service));
    meta_params.insert("time_origin".into(), json!("12:00"));

    let instance = Instance {
        meta: Meta {
            name: "black-saturday".into(),
            seed: Some(CASE_SEED),
            params: meta_params.into_iter().map(|(k, v)| (k, normalize_value(v))).collect(),
            category_retries: 0,
        },
        assets: (0..n)
            .map(|k| Asset {
                id: k + 1,
                location: points[k],
                value: values[k] as f64,
                service_duration: params.service,
                requirements: BLACK_SATURDAY[k].0.to_vec(),
            })
            .collect(),
        start_depot: depot,
        end_depot: depot,
        fleet: Fleet::new(vec![5, 3, 2]),
        scenarios: ScenarioSet {
            staging_time: CASE_STAGING_TIME,
            scenarios: vec![
                Scenario {
                    probability: 0.7,
                    occurrence_time: CASE_STAGING_TIME,
                },
                Scenario {
                    probability: 0.3,
                    occurrence_time: CASE_SECOND_CHANGE,
                },
            ],
        },
        travel,
        windows: TimeWindows {
            horizon,
            stage1,
            stage2,
        },
    };
    instance.validate()?;
    Ok(instance)
}

/// Two assets, one vehicle type, two scenarios: asset 1 is impacted before the staging
/// time, asset 2 only in scenario 1.
pub fn tiny_two_asset() -> Result<Instance> {
    let depot = Point::new(0.0, 0.0);
    let points = [Point::new(10.0, 0.0), Point::new(0.0, 15.0)];
    let mut locations = vec![depot];
    locations.extend(points);
    locations.push(depot);
    let instance = Instance {
        meta: Meta {
            name: "tiny-2asset".into(),
            seed: None,
            params: Map::new(),
            category_retries: 0,
        },
        assets: vec![
            Asset {
                id: 1,
                location: points[0],
                value: 10.0,
                service_duration: 0.5,
                requirements: vec![1],
            },
            Asset {
                id: 2,
                location: points[1],
                value: 20.0,
                service_duration: 0.5,
                requirements: vec![2],
            },
        ],
        start_depot: depot,
        end_depot: depot,
        fleet: Fleet::new(vec![2]),
        scenarios: ScenarioSet {
            staging_time: 4.5,
            scenarios: vec![
                Scenario {
                    probability: 0.6,
                    occurrence_time: 4.5,
                },
                Scenario {
                    probability: 0.4,
                    occurrence_time: 6.5,
                },
            ],
        },
        travel: TravelMatrix::uniform(1, 4, |i, j| quantize(locations[i].dist(locations[j]) / 30.0)),
        windows: TimeWindows {
            horizon: 8.0,
            stage1: vec![Some(Window::new(1.0, 2.0)), None],
            stage2: vec![vec![None, Some(Window::new(4.5, 5.5))], vec![None, None]],
        },
    };
    instance.validate()?;
    Ok(instance)
}
