//! Seeded benchmark instances on a square grid.

use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg32;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::firespread::{self, FireModel, RiskCategory, WindowParams};
use crate::instance::{
    Asset, Fleet, Instance, Meta, Point, Scenario, ScenarioSet, TimeWindows, TravelMatrix, Window,
};
use crate::io::{normalize_value, quantize};

/// Requirement vectors observed in the case-study data.
pub const REQUIREMENT_POOL: [[u32; 3]; 7] = [
    [2, 1, 0],
    [2, 0, 1],
    [1, 0, 2],
    [0, 2, 1],
    [1, 1, 1],
    [1, 2, 0],
    [1, 2, 1],
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub probability: f64,
    /// Hours between the staging time and this scenario's wind change.
    pub delay: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_assets: usize,
    pub grid_size: f64,
    pub fleet: Vec<u32>,
    pub vx0: f64,
    pub vy0: f64,
    pub scenarios: Vec<ScenarioParams>,
    pub tw1: f64,
    pub tw2: f64,
    pub service: f64,
    pub speed: f64,
    pub staging_time: f64,
    pub value_range: (u32, u32),
    pub requirement_pool: Vec<Vec<u32>>,
    pub ignition: Point,
    pub depot: Point,
    /// Impacts later than this are ignored. Defaults to the last wind change.
    pub fire_horizon: Option<f64>,
    pub seed: u64,
    pub max_retries: u32,
    /// Redraw until all four risk categories occur; defaults to `n_assets >= 50`.
    pub require_all_categories: Option<bool>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            n_assets: 50,
            grid_size: 80.0,
            fleet: vec![3, 2, 2],
            vx0: 14.0,
            vy0: 16.0,
            scenarios: vec![
                ScenarioParams {
                    probability: 0.6,
                    delay: 0.0,
                    vx: 19.0,
                    vy: 17.0,
                },
                ScenarioParams {
                    probability: 0.4,
                    delay: 2.0,
                    vx: 21.0,
                    vy: 19.0,
                },
            ],
            tw1: 1.0,
            tw2: 1.0,
            service: 0.5,
            speed: 30.0,
            staging_time: 4.5,
            value_range: (10, 100),
            requirement_pool: REQUIREMENT_POOL.iter().map(|r| r.to_vec()).collect(),
            ignition: Point::new(-30.0, 35.0),
            depot: Point::new(80.0, 80.0),
            fire_horizon: None,
            seed: 1,
            max_retries: 100,
            require_all_categories: None,
        }
    }
}

/// Named fleet sizes of the benchmark study.
pub fn preset_fleet(name: &str) -> Result<Fleet> {
    let counts = match name.to_ascii_lowercase().as_str() {
        "set1" => vec![3, 2, 2],
        "set2" => vec![4, 3, 2],
        // the variant printed in the results table caption
        "set2-caption" | "set2c" => vec![3, 3, 2],
        other => {
            return Err(Error::Param(format!(
                "unknown fleet preset `{other}` (expected set1, set2 or set2-caption)"
            )))
        }
    };
    Ok(Fleet::new(counts))
}

/// Parses a preset name or an explicit comma-separated count list such as `5,3,2`.
pub fn parse_fleet(spec: &str) -> Result<Fleet> {
    if spec.contains(',') || spec.chars().all(|c| c.is_ascii_digit()) {
        let counts = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Param(format!("bad fleet count `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Fleet::new(counts));
    }
    preset_fleet(spec)
}

impl GeneratorParams {
    pub fn fire_horizon(&self) -> f64 {
        self.fire_horizon.unwrap_or_else(|| {
            self.staging_time + self.scenarios.iter().map(|s| s.delay).fold(0.0, f64::max)
        })
    }

    pub fn fire_model(&self) -> FireModel {
        let changes: Vec<(f64, f64, f64)> = self
            .scenarios
            .iter()
            .map(|s| (self.staging_time + s.delay, s.vx, s.vy))
            .collect();
        FireModel::with_changes(self.ignition, (self.vx0, self.vy0), &changes)
    }

    pub fn window_params(&self) -> WindowParams {
        WindowParams {
            tw1: self.tw1,
            tw2: self.tw2,
            service: self.service,
        }
    }

    /// Sets one parameter from `key=value` text.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = || -> Result<f64> {
            value
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Param(format!("`{key}` needs a number, got `{value}`")))
        };
        let num_scenarios = self.scenarios.len();
        let scenario = |c: usize| -> Result<usize> {
            if c < num_scenarios {
                Ok(c)
            } else {
                Err(Error::Param(format!("`{key}`: there is no scenario {}", c + 1)))
            }
        };
        match key {
            "grid" | "grid_size" => self.grid_size = num()?,
            "vx0" => self.vx0 = num()?,
            "vy0" => self.vy0 = num()?,
            "vx1" => self.scenarios[scenario(0)?].vx = num()?,
            "vy1" => self.scenarios[scenario(0)?].vy = num()?,
            "vx2" => self.scenarios[scenario(1)?].vx = num()?,
            "vy2" => self.scenarios[scenario(1)?].vy = num()?,
            "delay" => self.scenarios[scenario(1)?].delay = num()?,
            "p1" => self.scenarios[scenario(0)?].probability = num()?,
            "p2" => self.scenarios[scenario(1)?].probability = num()?,
            "tw1" => self.tw1 = num()?,
            "tw2" => self.tw2 = num()?,
            "a" | "service" => self.service = num()?,
            "v" | "speed" => self.speed = num()?,
            "st" | "staging_time" => self.staging_time = num()?,
            "horizon" => self.fire_horizon = Some(num()?),
            "ignition_x" => self.ignition.x = num()?,
            "ignition_y" => self.ignition.y = num()?,
            "depot_x" => self.depot.x = num()?,
            "depot_y" => self.depot.y = num()?,
            "value_min" => self.value_range.0 = num()? as u32,
            "value_max" => self.value_range.1 = num()? as u32,
            "retries" => self.max_retries = num()? as u32,
            _ => return Err(Error::Param(format!("unknown generator parameter `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grid", self.grid_size),
            ("vx0", self.vx0),
            ("vy0", self.vy0),
            ("tw1", self.tw1),
            ("tw2", self.tw2),
            ("speed", self.speed),
            ("staging_time", self.staging_time),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Param(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_assets == 0 {
            return Err(Error::Param("at least one asset is required".into()));
        }
        if !(self.service.is_finite() && self.service >= 0.0) {
            return Err(Error::Param("service duration must be non-negative".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Param("at least one scenario is required".into()));
        }
        let total: f64 = self.scenarios.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > 1e-9 || self.scenarios.iter().any(|s| s.probability < 0.0) {
            return Err(Error::Param(format!(
                "scenario probabilities must be non-negative and sum to 1, got {total}"
            )));
        }
        if self.scenarios[0].delay != 0.0 {
            return Err(Error::Param("the first scenario changes at the staging time".into()));
        }
        for w in self.scenarios.windows(2) {
            if w[0].delay >= w[1].delay {
                return Err(Error::Param("scenario delays must be increasing".into()));
            }
        }
        for s in &self.scenarios {
            if !(s.vx > 0.0 && s.vy > 0.0) {
                return Err(Error::Param("fire velocities must be positive".into()));
            }
        }
        if self.value_range.0 > self.value_range.1 {
            return Err(Error::Param("value range is empty".into()));
        }
        if self.fleet.is_empty() {
            return Err(Error::Param("fleet has no vehicle types".into()));
        }
        if self.requirement_pool.is_empty()
            || self
                .requirement_pool
                .iter()
                .any(|r| r.len() != self.fleet.len() || r.iter().all(|&x| x == 0))
        {
            return Err(Error::Param(format!(
                "requirement pool entries must be non-zero vectors of length {}",
                self.fleet.len()
            )));
        }
        Ok(())
    }

    fn meta_params(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("n_assets".into(), json!(self.n_assets));
        m.insert("grid_size".into(), json!(self.grid_size));
        m.insert("fleet".into(), json!(self.fleet));
        m.insert("vx0".into(), json!(self.vx0));
        m.insert("vy0".into(), json!(self.vy0));
        m.insert(
            "scenarios".into(),
            Value::Array(
                self.scenarios
                    .iter()
                    .map(|s| json!({"probability": s.probability, "delay": s.delay, "vx": s.vx, "vy": s.vy}))
                    .collect(),
            ),
        );
        m.insert("tw1".into(), json!(self.tw1));
        m.insert("tw2".into(), json!(self.tw2));
        m.insert("service".into(), json!(self.service));
        m.insert("speed".into(), json!(self.speed));
        m.insert("staging_time".into(), json!(self.staging_time));
        m.insert("value_range".into(), json!([self.value_range.0, self.value_range.1]));
        m.insert("requirement_pool".into(), json!(self.requirement_pool));
        m.insert("ignition".into(), json!([self.ignition.x, self.ignition.y]));
        m.insert("depot".into(), json!([self.depot.x, self.depot.y]));
        m.insert("fire_horizon".into(), json!(self.fire_horizon()));
        m.into_iter().map(|(k, v)| (k, normalize_value(v))).collect()
    }
}

/// Uniform draws built directly on the PCG32 output so results do not depend on
/// any sampling-algorithm changes in other crates.
struct Stream(Pcg32);

impl Stream {
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.unit() * n as f64) as usize).min(n - 1)
    }

    fn int_in(&mut self, lo: u32, hi: u32) -> u32 {
        lo + self.below((hi - lo) as usize + 1) as u32
    }
}

struct Draw {
    points: Vec<Point>,
    values: Vec<u32>,
    requirements: Vec<Vec<u32>>,
    impacts: Vec<Vec<Option<f64>>>,
}

fn draw(params: &GeneratorParams, rng: &mut Stream, fire: &FireModel) -> Draw {
    let n = params.n_assets;
    let mut points = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut requirements = Vec::with_capacity(n);
    for _ in 0..n {
        let x = quantize(rng.unit() * params.grid_size);
        let y = quantize(rng.unit() * params.grid_size);
        points.push(Point::new(x, y));
        values.push(rng.int_in(params.value_range.0, params.value_range.1));
        let k = rng.below(params.requirement_pool.len());
        requirements.push(params.requirement_pool[k].clone());
    }
    let impacts = firespread::impact_table(&points, fire, params.fire_horizon());
    Draw {
        points,
        values,
        requirements,
        impacts,
    }
}

fn has_all_categories(cats: &[RiskCategory]) -> bool {
    let stage1 = cats.iter().any(|c| *c == RiskCategory::Stage1);
    let single = cats.iter().any(|c| matches!(c, RiskCategory::Scenario(_)));
    let all = cats.iter().any(|c| *c == RiskCategory::AllScenarios);
    let none = cats.iter().any(|c| *c == RiskCategory::NotAtRisk);
    stage1 && single && all && none
}

/// Generates an instance; a pure function of `params`.
pub fn generate(params: &GeneratorParams) -> Result<Instance> {
    params.validate()?;
    let fire = params.fire_model();
    fire.validate()?;
    let st = params.staging_time;
    let mut rng = Stream(Pcg32::seed_from_u64(params.seed));
    let require = params
        .require_all_categories
        .unwrap_or(params.n_assets >= 50);

    let mut retries = 0;
    let mut d = draw(params, &mut rng, &fire);
    while require {
        let cats: Vec<RiskCategory> = d
            .impacts
            .iter()
            .map(|row| firespread::classify_impacts(row, st))
            .collect();
        if has_all_categories(&cats) {
            break;
        }
        if retries >= params.max_retries {
            return Err(Error::Param(format!(
                "no draw with all four risk categories after {retries} retries"
            )));
        }
        retries += 1;
        d = draw(params, &mut rng, &fire);
    }

    let derived = firespread::derive_windows(&d.impacts, st, params.window_params());
    for dw in &derived.dropped {
        log::info!(
            "asset {} dropped from {}: impact at {:.3} leaves no service window",
            dw.asset,
            dw.scenario
                .map_or("stage 1".to_string(), |c| format!("scenario {}", c + 1)),
            dw.impact
        );
    }
    let qw = |w: Option<Window>| w.map(|w| Window::new(quantize(w.open), quantize(w.close)));
    let stage1: Vec<Option<Window>> = derived.stage1.into_iter().map(qw).collect();
    let stage2: Vec<Vec<Option<Window>>> = derived
        .stage2
        .into_iter()
        .map(|l| l.into_iter().map(qw).collect())
        .collect();

    let n = params.n_assets;
    let mut locations = vec![params.depot];
    locations.extend(d.points.iter().copied());
    locations.push(params.depot);
    let travel = TravelMatrix::uniform(params.fleet.len(), n + 2, |i, j| {
        quantize(locations[i].dist(locations[j]) / params.speed)
    });
    let latest_close = stage1
        .iter()
        .chain(stage2.iter().flatten())
        .flatten()
        .map(|w| w.close)
        .fold(st, f64::max);
    let horizon = quantize(latest_close + travel.max_time());

    let assets = (0..n)
        .map(|k| Asset {
            id: k + 1,
            location: d.points[k],
            value: d.values[k] as f64,
            service_duration: params.service,
            requirements: d.requirements[k].clone(),
        })
        .collect();
    let instance = Instance {
        meta: Meta {
            name: format!("gen-n{}-seed{}", n, params.seed),
            seed: Some(params.seed),
            params: params.meta_params(),
            category_retries: retries,
        },
        assets,
        start_depot: params.depot,
        end_depot: params.depot,
        fleet: Fleet::new(params.fleet.clone()),
        scenarios: ScenarioSet {
            staging_time: st,
            scenarios: params
                .scenarios
                .iter()
                .map(|s| Scenario {
                    probability: s.probability,
                    occurrence_time: st + s.delay,
                })
                .collect(),
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

/// Fleets used for the small instances that the exhaustive oracle can still enumerate.
pub const MICRO_FLEETS: [&[u32]; 3] = [&[3], &[2, 1], &[1, 1, 1]];

/// Parameters of a small instance: 2 to 7 assets, at most three vehicles, two scenarios,
/// on a grid close enough to the fire that most assets are at risk.
pub fn micro_params(seed: u64) -> GeneratorParams {
    let fleet = MICRO_FLEETS[(seed % 3) as usize].to_vec();
    let mut pool = Vec::new();
    let mut v = vec![0u32; fleet.len()];
    loop {
        if v.iter().any(|&x| x > 0) {
            pool.push(v.clone());
        }
        let mut k = 0;
        while k < v.len() && v[k] == fleet[k] {
            v[k] = 0;
            k += 1;
        }
        if k == v.len() {
            break;
        }
        v[k] += 1;
    }
    GeneratorParams {
        n_assets: 2 + (seed / 3 % 6) as usize,
        grid_size: 40.0,
        fleet,
        requirement_pool: pool,
        ignition: Point::new(-45.0, -35.0),
        depot: Point::new(45.0, 45.0),
        seed,
        require_all_categories: Some(false),
        ..GeneratorParams::default()
    }
}

/// Risk category of every asset of a generated instance, recomputed from its parameters.
pub fn categories(params: &GeneratorParams, instance: &Instance) -> Vec<RiskCategory> {
    let points: Vec<Point> = instance.assets.iter().map(|a| a.location).collect();
    firespread::classify(
        &points,
        &params.fire_model(),
        params.staging_time,
        params.fire_horizon(),
    )
}
